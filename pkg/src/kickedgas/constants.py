"""Physical constants (CODATA 2018) and atomic masses.

Physical units enter only here and in :mod:`kickedgas.core`; both simulation
engines work exclusively with dimensionless parameters.
"""

HBAR = 1.054571817e-34  # reduced Planck constant, J s
K_B = 1.380649e-23      # Boltzmann constant, J / K

# Atomic masses, kg
MASS_CS133 = 2.20694650e-25
MASS_RB87 = 1.44316060e-25

# Common laser wavelength: cesium D2 line, m
WAVELENGTH_CS_D2 = 852.34727582e-9
