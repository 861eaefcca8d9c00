import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numerovcn.stability import (NecessaryConstants, PhysicalParams, PoleError,
                                 StabilityParams, amplification_factor,
                                 converse_threshold_tau, growth_factor_sq,
                                 min_kappa, necessary_condition,
                                 rewritten_condition, spectral_condition,
                                 step_bound_holds)

BUNDLED_PAIR = 2.57301 + 0.024621j
BUNDLED_H_OMEGA0 = 30.0 / 14.0


class TestPhysicalParams:
    def test_unit_scaling_defaults(self):
        p = PhysicalParams()
        assert p.c_hbar == 1.0
        assert p.a == 1.0

    def test_derived_values(self):
        p = PhysicalParams(hbar=2.0, m0=4.0)
        assert p.c_hbar == pytest.approx(0.5)
        assert p.a == pytest.approx(0.25)

    def test_validation(self):
        with pytest.raises(ValueError):
            PhysicalParams(hbar=0.0)
        with pytest.raises(ValueError):
            StabilityParams(kappa=1.0, tau0=-1.0)


class TestAmplificationFactor:
    def test_lambda_zero(self):
        assert amplification_factor(0.0, 0.01) == 1.0

    def test_real_lambda_unimodular(self):
        rng = np.random.default_rng(0)
        for lam in rng.uniform(-1e4, 1e4, 100):
            assert abs(amplification_factor(lam, 0.01)) == pytest.approx(1.0, abs=1e-15)

    def test_hand_case(self):
        assert amplification_factor(1j, 1.0) == pytest.approx(3.0)
        assert growth_factor_sq(1j, 1.0) == pytest.approx(9.0)

    def test_pole_raises(self):
        with pytest.raises(PoleError):
            amplification_factor(2j / 0.01, 0.01)

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            amplification_factor(1.0, 0.0)

    def test_two_formulas_agree(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            lam = complex(rng.uniform(-100, 100), rng.uniform(-10, 10))
            tau = 10.0 ** rng.uniform(-6, 0)
            a = rng.choice([0.5, 1.0, 2.0])
            q2 = abs(amplification_factor(lam, tau, a)) ** 2
            assert q2 == pytest.approx(growth_factor_sq(lam, tau, a),
                                       rel=1e-13, abs=1e-13)

    def test_conjugate_moduli_product_is_one(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            lam = complex(rng.uniform(-100, 100), rng.uniform(-20, 20))
            tau = 10.0 ** rng.uniform(-5, 0)
            q1 = abs(amplification_factor(lam, tau))
            q2 = abs(amplification_factor(np.conj(lam), tau))
            assert q1 * q2 == pytest.approx(1.0, rel=1e-12)


class TestSpectralCondition:
    def test_real_lambda_always_stable(self):
        assert spectral_condition(123.4, 0.01, kappa=1e-6)

    def test_hand_cases(self):
        assert not spectral_condition(1j, 1.0, kappa=1.0)
        assert spectral_condition(1j, 1.0, kappa=2.0)   # boundary equality

    def test_decaying_mode_stable(self):
        assert spectral_condition(1.0 - 5j, 0.1, kappa=1e-9)

    def test_kappa_validation(self):
        with pytest.raises(ValueError):
            spectral_condition(1j, 1.0, kappa=0.0)


class TestRewrittenCondition:
    def test_hand_cases(self):
        assert rewritten_condition(1j, 1.0, kappa=2.0)
        assert not rewritten_condition(1j, 1.0, kappa=1.0)

    def test_tiny_imaginary_part_true(self):
        assert rewritten_condition(1.0 + 1e-9j, 1e-3, kappa=1.0)

    def test_nonpositive_imag_rejected(self):
        with pytest.raises(ValueError):
            rewritten_condition(1.0, 1e-3, kappa=1.0)
        with pytest.raises(ValueError):
            rewritten_condition(1.0 - 1j, 1e-3, kappa=1.0)

    @settings(max_examples=300, deadline=None)
    @given(
        lam_re=st.floats(-1e3, 1e3),
        lam_im=st.floats(1e-9, 1e3),
        tau=st.floats(1e-6, 1.0),
        kappa=st.floats(1e-3, 10.0),
        a=st.sampled_from([0.5, 1.0, 2.0]),
    )
    def test_equivalent_to_spectral_condition(self, lam_re, lam_im, tau, kappa, a):
        lam = complex(lam_re, lam_im)
        assert rewritten_condition(lam, tau, kappa, a) == \
            spectral_condition(lam, tau, kappa, a)


class TestMinKappa:
    def test_real_lambda_zero(self):
        assert min_kappa(17.0, 0.3) == 0.0

    def test_hand_case(self):
        assert min_kappa(1j, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_negative_imag_zero(self):
        assert min_kappa(1.0 - 2j, 0.1) == 0.0

    def test_threshold_behavior(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            lam = complex(rng.uniform(-50, 50), rng.uniform(1e-3, 20))
            tau = 10.0 ** rng.uniform(-4, -0.5)
            k0 = min_kappa(lam, tau)
            if k0 > 0:
                assert spectral_condition(lam, tau, k0 * (1 + 1e-9))
                assert not spectral_condition(lam, tau, k0 * (1 - 1e-9))

    def test_increasing_in_imaginary_part(self):
        tau, a, lam_re = 0.01, 1.0, 5.0
        ts = np.linspace(1e-3, 0.9 / (a * tau), 40)
        vals = [min_kappa(complex(lam_re, t), tau, a) for t in ts]
        assert all(v2 > v1 for v1, v2 in zip(vals, vals[1:]))


class TestNecessaryCondition:
    def test_hand_case(self):
        consts = necessary_condition(1j, h_omega0=1.0, a=1.0, kappa=1.0, tau0=0.1)
        assert consts.c0 == pytest.approx(0.5, rel=1e-14)

    def test_real_lambda_rejected(self):
        with pytest.raises(ValueError):
            necessary_condition(2.0, 1.0, 1.0, 1.0, 0.1)

    def test_conjugation_invariance(self):
        up = necessary_condition(BUNDLED_PAIR, BUNDLED_H_OMEGA0, 1.0, 1.0, 0.1)
        dn = necessary_condition(np.conj(BUNDLED_PAIR), BUNDLED_H_OMEGA0, 1.0, 1.0, 0.1)
        assert up == dn

    def test_bundled_pair_constants_finite_positive(self):
        consts = necessary_condition(BUNDLED_PAIR, BUNDLED_H_OMEGA0, 1.0, 1.0, 0.1)
        for value in (consts.c1, consts.c2, consts.c0):
            assert np.isfinite(value) and value > 0.0

    def test_implication_on_replicated_modes(self):
        # whenever the per-mode condition holds for the replicated eigenvalue,
        # the derived inequality must hold with the returned constants
        kappa, tau0, a = 1.0, 0.1, 1.0
        consts = necessary_condition(BUNDLED_PAIR, BUNDLED_H_OMEGA0, a, kappa, tau0)
        taus = np.logspace(-5, -1, 25)
        checked = 0
        for k in (10, 20, 40, 80):
            lam = BUNDLED_PAIR * k * k
            h_omega = BUNDLED_H_OMEGA0 / k
            for tau in taus:
                if min_kappa(lam, tau, a) <= kappa:
                    assert step_bound_holds(tau, h_omega, consts, kappa, tau0)
                    checked += 1
        assert checked > 0

    def test_converse_threshold(self):
        consts = necessary_condition(1j, 1.0, 1.0, 1.0, 0.1)
        assert converse_threshold_tau(2.0, consts) == pytest.approx(2.0 / consts.c0)
        assert isinstance(consts, NecessaryConstants)
