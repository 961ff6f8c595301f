import math

import numpy as np
import pytest

from kickedgas.core import ScaledParams
from kickedgas.dopri import pendulum_flow_arrays
from kickedgas.pseudoclassical import (PhasePoint, Trajectory, drift_angle,
                                       evolve_arrays, free_map, kick_cycle,
                                       pendulum_flow, poincare_section)

PHI_D = 0.8 * math.pi
TWO_PI = 2 * math.pi


def rk4_reference(theta, J, v_tilde, n_steps=200_000, reverse=False):
    """Fine fixed-step RK4 over unit time: independent flow oracle."""
    sign = 1.0 if reverse else -1.0
    h = 1.0 / n_steps
    th, jj = float(theta), float(J)
    for _ in range(n_steps):
        k1t, k1j = jj, sign * v_tilde * math.sin(th)
        k2t = jj + 0.5 * h * k1j
        k2j = sign * v_tilde * math.sin(th + 0.5 * h * k1t)
        k3t = jj + 0.5 * h * k2j
        k3j = sign * v_tilde * math.sin(th + 0.5 * h * k2t)
        k4t = jj + h * k3j
        k4j = sign * v_tilde * math.sin(th + h * k3t)
        th += h / 6 * (k1t + 2 * k2t + 2 * k3t + k4t)
        jj += h / 6 * (k1j + 2 * k2j + 2 * k3j + k4j)
    return th, jj


class TestPendulumFlow:
    def test_stable_fixed_point(self):
        pt = pendulum_flow(PhasePoint(0.0, 0.0), 0.251)
        assert pt.theta == 0.0 and pt.J == 0.0

    def test_unstable_fixed_point(self):
        pt = pendulum_flow(PhasePoint(math.pi, 0.0), 0.251)
        assert pt.theta == pytest.approx(math.pi, abs=1e-12)
        assert pt.J == pytest.approx(0.0, abs=1e-12)

    def test_small_angle_harmonic_oracle(self):
        # theta(t) = theta0 cos(sqrt(V) t), J(t) = -theta0 sqrt(V) sin(sqrt(V) t)
        v = 0.251
        pt = pendulum_flow(PhasePoint(0.01, 0.0), v)
        assert pt.theta == pytest.approx(0.01 * math.cos(math.sqrt(v)),
                                         abs=1e-5)
        assert pt.J == pytest.approx(-0.01 * math.sqrt(v) * math.sin(math.sqrt(v)),
                                     abs=1e-5)

    @pytest.mark.parametrize("theta0,J0,v", [
        (0.01, 0.0, 0.251),
        (2.0, 0.3, 0.251),
        (1.0, -0.8, 2.51),
        (4.5, 1.5, 7.51),
    ])
    def test_against_fixed_step_reference(self, theta0, J0, v):
        ref_th, ref_j = rk4_reference(theta0, J0, v)
        pt = pendulum_flow(PhasePoint(theta0, J0), v)
        assert pt.theta == pytest.approx(ref_th % TWO_PI, abs=1e-8)
        assert pt.J == pytest.approx(ref_j, abs=1e-8)

    def test_energy_conserved_along_flow(self):
        rng = np.random.default_rng(11)
        theta = rng.uniform(0, TWO_PI, 2000)
        J = rng.normal(0.0, 0.5, 2000)
        for v in (0.251, 2.51):
            th1, j1 = pendulum_flow_arrays(theta, J, v)
            h0 = J**2 / 2 - v * np.cos(theta)
            h1 = j1**2 / 2 - v * np.cos(th1)
            assert np.max(np.abs(h1 - h0)) < 1e-8

    def test_reversal_equals_pi_shifted_forward(self):
        # sin(theta + pi) = -sin(theta): the reversed flow is the forward
        # flow conjugated by a pi rotation of the angle
        for theta0, J0 in ((0.7, 0.1), (3.0, -0.4)):
            fwd = pendulum_flow(PhasePoint((theta0 + math.pi) % TWO_PI, J0),
                                0.251)
            rev = pendulum_flow(PhasePoint(theta0, J0), 0.251, reverse=True)
            assert fwd.theta == pytest.approx((rev.theta + math.pi) % TWO_PI,
                                              abs=1e-9)
            assert fwd.J == pytest.approx(rev.J, abs=1e-9)

    def test_zero_strength_is_exact_drift(self):
        pt = pendulum_flow(PhasePoint(1.0, 0.7), 0.0)
        assert pt.theta == 1.7 and pt.J == 0.7

    def test_negative_v_rejected(self):
        with pytest.raises(ValueError):
            pendulum_flow_arrays(np.zeros(2), np.zeros(2), -0.1)


class TestFreeMap:
    def test_direct_substitution(self):
        pt = free_map(PhasePoint(1.0, 0.5, 0.0), ell=2)
        assert pt.theta == pytest.approx(0.5, abs=1e-15)
        assert pt.J == 0.5

    def test_quarter_quasimomentum_shifts_by_pi(self):
        pt = free_map(PhasePoint(0.0, 0.0, 0.25), ell=2)
        assert pt.theta == pytest.approx(math.pi, abs=1e-12)
        assert pt.J == 0.0

    def test_two_pi_momentum_wraps_away(self):
        pt = free_map(PhasePoint(0.2, TWO_PI, 0.0), ell=2)
        assert pt.theta == pytest.approx(0.2, abs=1e-12)
        assert pt.J == TWO_PI  # J preserved bit for bit

    def test_J_preserved_exactly(self):
        values = [0.1, -3.7, 123.456, 1e-9]
        for j in values:
            assert free_map(PhasePoint(2.0, j, 0.3), ell=2).J == j


class TestKickCycle:
    def test_origin_invariant(self):
        sp = ScaledParams(epsilon=0.1, phi_d=2.51)
        pt = PhasePoint(0.0, 0.0, 0.0)
        for _ in range(20):
            pt = kick_cycle(pt, sp)
        assert pt.theta == 0.0 and pt.J == 0.0

    def test_matches_flow_then_drift(self):
        sp = ScaledParams(epsilon=0.1, phi_d=2.51)
        pt0 = PhasePoint(1.2, 0.3, 0.1)
        manual = free_map(pendulum_flow(pt0, sp.v_tilde), sp.ell)
        auto = kick_cycle(pt0, sp)
        assert auto.theta == manual.theta and auto.J == manual.J

    def test_antiresonant_ensemble_stays_cold(self):
        # beta = 1/4 alternation: <J^2> of a J=0 ensemble stays far below
        # the resonant beta = 0 ensemble by kick 30
        rng = np.random.default_rng(4)
        theta0 = rng.uniform(0, TWO_PI, 20_000)
        sp = ScaledParams(epsilon=0.1, phi_d=2.51)
        out = {}
        for beta in (0.0, 0.25):
            _, J = evolve_arrays(theta0, np.zeros_like(theta0), beta, sp, 30)
            out[beta] = np.mean(J**2)
        assert out[0.0] > 10 * out[0.25]


class TestMapSymmetries:
    def test_v_tilde_only_dependence(self):
        # (epsilon, phi_d) enters only through the product epsilon * phi_d
        rng = np.random.default_rng(9)
        theta0 = rng.uniform(0, TWO_PI, 500)
        J0 = rng.normal(0, 0.2, 500)
        a = ScaledParams(epsilon=0.1, phi_d=3.0)
        b = ScaledParams(epsilon=0.3, phi_d=1.0)
        assert a.v_tilde == pytest.approx(b.v_tilde, rel=1e-15)
        tha, ja = evolve_arrays(theta0, J0, 0.1, a, 50)
        thb, jb = evolve_arrays(theta0, J0, 0.1, b, 50)
        # identical up to the rounding of v_tilde itself
        np.testing.assert_allclose(tha, thb, atol=1e-9)
        np.testing.assert_allclose(ja, jb, atol=1e-9)

    def test_beta_translation_exact(self):
        # ell = 2: drift angles for beta and beta + 1/2 agree mod 2 pi, so
        # the maps coincide. beta = -0.45 keeps both labels in domain.
        beta_a, beta_b = -0.45, 0.05
        assert drift_angle(beta_a, 2) == pytest.approx(drift_angle(beta_b, 2),
                                                       abs=1e-12)
        rng = np.random.default_rng(10)
        theta0 = rng.uniform(0, TWO_PI, 300)
        J0 = rng.normal(0, 0.3, 300)
        sp = ScaledParams(epsilon=0.1, phi_d=PHI_D)
        tha, ja = evolve_arrays(theta0, J0, beta_a, sp, 30)
        thb, jb = evolve_arrays(theta0, J0, beta_b, sp, 30)
        np.testing.assert_allclose(tha, thb, atol=1e-10)
        np.testing.assert_allclose(ja, jb, atol=1e-10)

    def test_beta_parity_equivariance(self):
        # (theta, J, beta) -> (-theta, -J, -beta) maps orbits onto orbits
        rng = np.random.default_rng(12)
        theta0 = rng.uniform(0, TWO_PI, 200)
        J0 = rng.normal(0, 0.3, 200)
        sp = ScaledParams(epsilon=0.1, phi_d=PHI_D)
        th_p, j_p = evolve_arrays(theta0, J0, 0.2, sp, 25)
        th_m, j_m = evolve_arrays(TWO_PI - theta0, -J0, -0.2, sp, 25)
        # angular residual of (th_m + th_p) mod 2 pi, mapped near zero
        resid = np.mod(th_m + th_p + math.pi, TWO_PI) - math.pi
        np.testing.assert_allclose(resid, np.zeros_like(th_p), atol=1e-8)
        np.testing.assert_allclose(j_m, -j_p, atol=1e-8)

    def test_chunked_equals_whole(self):
        rng = np.random.default_rng(13)
        theta0 = rng.uniform(0, TWO_PI, 400)
        J0 = rng.normal(0, 0.5, 400)
        sp = ScaledParams(epsilon=0.13, phi_d=PHI_D)
        th_all, j_all = evolve_arrays(theta0, J0, 0.0, sp, 10)
        th_a, j_a = evolve_arrays(theta0[:123], J0[:123], 0.0, sp, 10)
        th_b, j_b = evolve_arrays(theta0[123:], J0[123:], 0.0, sp, 10)
        assert np.array_equal(np.concatenate([th_a, th_b]), th_all)
        assert np.array_equal(np.concatenate([j_a, j_b]), j_all)


class TestPhaseSpaceStructure:
    """Verified stroboscopic-map structure at the weak and strong driving
    strengths of the phase-portrait figures.

    Note the between-pulse drift theta -> theta - J makes the map's invariant
    curves very different from bare-pendulum energy contours: (pi, 0) is a
    stable fixed point of the map (it is hyperbolic for the pendulum alone),
    and orbits seeded at J = 0 extend well beyond the pendulum separatrix
    |J| = 2 sqrt(v_tilde). The verified invariant structure is the resonance
    cell: at v_tilde = 0.251 all J = 0 orbits stay inside |J| < 2 pi for
    thousands of kicks, while at v_tilde = 7.51 the chaotic sea carries
    orbits far beyond it.
    """

    def test_weak_driving_orbits_confined_to_cell(self):
        rng = np.random.default_rng(21)
        theta0 = rng.uniform(0, TWO_PI, 100)
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        max_abs_j = 0.0

        def record(n, th, jj):
            nonlocal max_abs_j
            max_abs_j = max(max_abs_j, float(np.max(np.abs(jj))))

        evolve_arrays(theta0, np.zeros_like(theta0), 0.0, sp, 1000,
                      record=record)
        assert max_abs_j < TWO_PI

    def test_weak_driving_exceeds_pendulum_separatrix(self):
        # orbits through theta0 near pi/2 reach |J| well above 2 sqrt(V):
        # the pendulum separatrix is not an invariant of the kicked map
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        theta = np.array([math.pi / 2])
        J = np.zeros(1)
        max_abs_j = 0.0

        def record(n, th, jj):
            nonlocal max_abs_j
            max_abs_j = max(max_abs_j, float(np.abs(jj[0])))

        evolve_arrays(theta, J, 0.0, sp, 200, record=record)
        assert max_abs_j > 2 * math.sqrt(0.251)

    def test_strong_driving_breaks_weak_bound(self):
        # chaotic sea at v_tilde = 7.51: ensemble max |J| far exceeds the
        # weak-driving separatrix scale 2 sqrt(0.251)
        rng = np.random.default_rng(22)
        theta0 = rng.uniform(0, TWO_PI, 100)
        sp = ScaledParams.from_v_tilde(7.51, PHI_D)
        theta, J = evolve_arrays(theta0, np.zeros_like(theta0), 0.0, sp, 200)
        assert np.max(np.abs(J)) > 2 * math.sqrt(0.251)
        assert np.max(np.abs(J)) > TWO_PI


class TestPoincareSection:
    def test_snapshot_count_and_types(self):
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        trajs = poincare_section([PhasePoint(1.0, 0.0)], sp, 17)
        assert len(trajs) == 1
        assert isinstance(trajs[0], Trajectory)
        assert len(trajs[0]) == 18

    def test_fixed_point_trajectory_constant(self):
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        traj = poincare_section([PhasePoint(0.0, 0.0)], sp, 50)[0]
        assert np.all(traj.theta == 0.0)
        assert np.all(traj.J == 0.0)

    def test_no_cross_talk(self):
        sp = ScaledParams.from_v_tilde(2.51, PHI_D)
        pts = [PhasePoint(0.5, 0.0), PhasePoint(2.5, 0.1), PhasePoint(4.0, -0.2)]
        together = poincare_section(pts, sp, 20)
        for i, pt in enumerate(pts):
            alone = poincare_section([pt], sp, 20)[0]
            assert np.array_equal(alone.theta, together[i].theta)
            assert np.array_equal(alone.J, together[i].J)

    def test_symmetric_angles_available(self):
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        traj = poincare_section([PhasePoint(5.0, 0.3)], sp, 10)[0]
        sym = traj.theta_symmetric
        assert np.all(sym >= -math.pi) and np.all(sym < math.pi)
        np.testing.assert_allclose(np.mod(sym, TWO_PI),
                                   np.mod(traj.theta, TWO_PI), atol=1e-12)

    def test_requires_at_least_one_kick(self):
        sp = ScaledParams.from_v_tilde(0.251, PHI_D)
        with pytest.raises(ValueError):
            poincare_section([PhasePoint(1.0, 0.0)], sp, 0)
