import numpy as np
import pytest

from pairtunnel import (CmVariant, CoupledModeParams, amplitude_norm, cm_analytic_rabi,
                        cm_integrate, cm_rhs, estimate_params, make_grid)
from pairtunnel.coupledmode import MODE_WEIGHTS, cm_matrix

from conftest import make_fig1_structure
from oracles import rk4_complex

RABI = CoupledModeParams(kappa1=0.212, kappa2=0.0, kappa3=0.0, delta1=0.0, delta2=0.0)
CURVE4 = CoupledModeParams(kappa1=0.38, kappa2=0.16, kappa3=0.80, delta1=18.9, delta2=20.0)


class TestParams:
    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            CoupledModeParams(kappa1=-0.1, kappa2=0, kappa3=0, delta1=0, delta2=0)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            CoupledModeParams(kappa1=np.nan, kappa2=0, kappa3=0, delta1=0, delta2=0)

    def test_variant_parsing(self):
        assert CmVariant.from_string("two-mode") is CmVariant.TWO_MODE
        with pytest.raises(ValueError):
            CmVariant.from_string("bogus")


class TestRhs:
    def test_initial_condition_derivative(self):
        p = CoupledModeParams(kappa1=0.3, kappa2=0.2, kappa3=0.1, delta1=0.0, delta2=7.0)
        dc = cm_rhs(np.array([1, 0, 0, 0, 0], dtype=complex), p)
        assert np.allclose(dc, [0, 0, 1j * 0.3, 1j * 0.2, 1j * 0.1])

    def test_decoupled_phases_without_coupling(self):
        p = CoupledModeParams(kappa1=0.0, kappa2=0.0, kappa3=0.0, delta1=1.3, delta2=4.0)
        c0 = np.array([0.5, 0.5j, 0.3, 0.2, 0.1], dtype=complex)
        traj = rk4_complex(lambda c: cm_rhs(c, p), c0, dz=0.001, n_steps=2000)
        z = 2.0
        assert np.allclose(traj[-1][0], np.exp(-1j * p.delta1 * z) * c0[0], atol=1e-9)
        assert np.allclose(traj[-1][2], c0[2], atol=1e-12)  # c3 is unforced
        assert np.allclose(traj[-1][3], np.exp(-1j * p.delta2 * z) * c0[3], atol=1e-9)

    def test_weighted_norm_analytically_conserved(self):
        # d/dz sum(w |c|^2) = 2 Re sum(w conj(c) dc/dz) = 0 for any state
        rng = np.random.default_rng(42)
        p = CoupledModeParams(kappa1=0.4, kappa2=0.25, kappa3=0.9, delta1=3.0, delta2=11.0)
        for variant in CmVariant:
            for _ in range(5):
                c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
                dn = 2 * np.sum(MODE_WEIGHTS * (np.conj(c) * cm_rhs(c, p, variant)).real)
                assert abs(dn) < 1e-12

    def test_variant_pins_amplitudes(self):
        p = CURVE4
        c = np.array([0.3, 0.1, 0.2, 0.4, 0.5], dtype=complex)
        dc = cm_rhs(c, p, CmVariant.FERMIONIZED)
        assert dc[2] == 0
        dc = cm_rhs(c, p, CmVariant.TWO_MODE)
        assert dc[3] == 0 and dc[4] == 0


class TestAnalyticRabi:
    def test_endpoints(self):
        out = cm_analytic_rabi(0.212, np.array([0.0]))
        assert out["p_r"][0] == 1.0 and out["p_2"][0] == 1.0

    def test_quarter_period(self):
        k = 0.212
        z = np.pi / (4 * k)
        out = cm_analytic_rabi(k, np.array([z]))
        assert out["p_r"][0] == pytest.approx(0.5, abs=1e-12)
        assert out["p_2"][0] == pytest.approx(0.5, abs=1e-12)

    def test_satisfies_the_ode(self):
        # closed form plugged into the equations of motion
        k = 0.3
        z = np.linspace(0, 10, 11)
        out = cm_analytic_rabi(k, z)
        c = np.stack([out["c1"], out["c2"], out["c3"],
                      np.zeros_like(z), np.zeros_like(z)]).astype(complex)
        p = CoupledModeParams(kappa1=k, kappa2=0, kappa3=0, delta1=0, delta2=0)
        dz = 1e-6
        out2 = cm_analytic_rabi(k, z + dz)
        c2 = np.stack([out2["c1"], out2["c2"], out2["c3"],
                       np.zeros_like(z), np.zeros_like(z)]).astype(complex)
        numeric = (c2 - c) / dz
        analytic = np.stack([cm_rhs(c[:, j], p) for j in range(z.size)], axis=1)
        assert np.allclose(numeric, analytic, atol=1e-5)

    def test_norm_identically_one(self):
        z = np.linspace(0, 60, 601)
        out = cm_analytic_rabi(0.212, z)
        n = (np.abs(out["c1"]) ** 2 + np.abs(out["c2"]) ** 2
             + 2 * np.abs(out["c3"]) ** 2)
        assert np.allclose(n, 1.0, atol=1e-14)


class TestIntegrate:
    def test_matches_analytic_rabi(self):
        _, tr = cm_integrate(RABI, z_max_mm=60.0, dz_mm=0.01)
        ref = cm_analytic_rabi(0.212, tr.z_mm)
        assert np.abs(tr.p_r - ref["p_r"]).max() < 1e-8
        assert np.abs(tr.p_2 - ref["p_2"]).max() < 1e-8

    def test_matches_independent_rk4(self):
        p = CURVE4
        dz, n = 0.01, 500
        amps, tr = cm_integrate(p, z_max_mm=dz * n, dz_mm=dz)
        ref = rk4_complex(lambda c: cm_rhs(c, p),
                          np.array([1, 0, 0, 0, 0], dtype=complex), dz, n)
        assert np.abs(amps - ref).max() < 1e-12

    def test_stride_path_equals_loop_path(self):
        p = CURVE4
        amps1, tr1 = cm_integrate(p, z_max_mm=10.0, dz_mm=0.001)
        amps2, tr2 = cm_integrate(p, z_max_mm=10.0, dz_mm=0.001, sample_every_mm=0.1)
        assert np.allclose(amps1[::100], amps2, atol=1e-11)
        assert np.allclose(tr1.p_r[::100], tr2.p_r, atol=1e-11)

    def test_norm_column_records_weighted_norm(self):
        amps, tr = cm_integrate(CURVE4, z_max_mm=5.0, dz_mm=0.01)
        ns = np.array([amplitude_norm(a) for a in amps])
        assert np.allclose(tr.norm, ns, atol=1e-13)
        assert np.all(tr.sym_err == 0.0)

    def test_conservation_small_random_params(self):
        # RK4 contracts |g(i theta)| by theta^6/72 per step; for moderate
        # rates at dz = 0.01 the 100 mm drift stays below 1e-10
        rng = np.random.default_rng(7)
        for variant in CmVariant:
            k1, k2, k3 = rng.uniform(0, 0.1, size=3)
            d1, d2 = rng.uniform(0, 0.3, size=2)
            p = CoupledModeParams(kappa1=k1, kappa2=k2, kappa3=k3, delta1=d1, delta2=d2)
            _, tr = cm_integrate(p, variant=variant, z_max_mm=100.0, dz_mm=0.01)
            assert np.abs(tr.norm - 1.0).max() < 1e-10

    def test_two_mode_variant_keeps_pair_empty(self):
        _, tr = cm_integrate(CURVE4, variant=CmVariant.TWO_MODE, z_max_mm=20.0, dz_mm=0.01)
        amps, _ = cm_integrate(CURVE4, variant=CmVariant.TWO_MODE, z_max_mm=20.0, dz_mm=0.01)
        assert np.abs(amps[:, 3:]).max() == 0.0

    def test_fermionized_oscillatory_and_conserved(self):
        # rates ~20 mm^-1 need a fine step for tight conservation: the RK4
        # amplitude defect is (delta2 * dz)^6 / 72 per step
        p = CoupledModeParams(kappa1=0.38, kappa2=0.16, kappa3=0.80, delta1=20.0, delta2=20.0)
        amps, tr = cm_integrate(p, variant=CmVariant.FERMIONIZED, z_max_mm=20.0,
                                dz_mm=5e-4, sample_every_mm=0.005)
        assert np.abs(amps[:, 2]).max() == 0.0
        assert np.abs(tr.norm - 1.0).max() < 1e-8
        # p_R is not monotone over any half Rabi period
        half = tr.p_r[: len(tr) // 2]
        assert np.any(np.diff(half) > 0) and np.any(np.diff(half) < 0)

    def test_rk4_order(self):
        # error at step h measured against an h/10 reference; halving the
        # step must shrink it by ~2^4
        p = CoupledModeParams(kappa1=0.5, kappa2=0.2, kappa3=0.4, delta1=1.0, delta2=2.0)

        def p_r_end(dz):
            _, tr = cm_integrate(p, z_max_mm=10.0, dz_mm=dz)
            return tr.p_r[-1]

        err_h = abs(p_r_end(0.2) - p_r_end(0.02))
        err_h2 = abs(p_r_end(0.1) - p_r_end(0.01))
        assert 12.0 <= err_h / err_h2 <= 20.0

    def test_validation(self):
        with pytest.raises(ValueError):
            cm_integrate(RABI, z_max_mm=-1.0)
        with pytest.raises(ValueError):
            cm_integrate(RABI, z_max_mm=10.0, dz_mm=0.3)  # not an integer step count
        with pytest.raises(ValueError):
            cm_integrate(RABI, z_max_mm=10.0, dz_mm=0.01, sample_every_mm=0.015)


class TestEstimateParams:
    def test_symmetric_geometry_fast(self, constants):
        # coarse grid keeps this quick; the acceptance suite runs full scale
        g = make_grid(128, 15.0)
        p = estimate_params(make_fig1_structure(0.0), g, constants)
        assert abs(p.delta1) < 1e-3
        assert 0.1 < p.kappa1 < 0.35
        assert p.delta2 > 5.0
        assert p.kappa2 <= p.kappa3
