import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from diagsym import (
    KL,
    PEARSON,
    REVERSE_KL,
    DivergenceFamily,
    DomainError,
    ProbTable,
    RangeError,
    band_contrasts,
    dps_parameter,
    dps_parameters,
    f_divergence,
    fit_dps,
    g_inverse,
    g_transform,
    power,
    to_probabilities,
)
from diagsym.divergence import big_f, big_f_inv, f_eval

from conftest import random_dps_probs

FAMILIES = [KL, REVERSE_KL, PEARSON, power(-2), power(-0.5), power(0.5), power(3)]
IDS = [f.name for f in FAMILIES]

TABLE1_ODDS = [42 / 274, 11 / 212, 7 / 127]


class TestFamily:
    @pytest.mark.parametrize("lam", [0, -1, None, math.inf, math.nan])
    def test_power_lambda_rejected(self, lam):
        with pytest.raises(ValueError):
            DivergenceFamily("power", lam)

    def test_unknown(self):
        with pytest.raises(ValueError):
            DivergenceFamily("hellinger")
        with pytest.raises(ValueError):
            DivergenceFamily("kl", 2.0)


class TestF:
    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_f_of_one_is_zero(self, fam):
        assert f_eval(fam, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_values(self):
        assert f_eval(KL, 1.0) == 0.0
        assert f_eval(PEARSON, 3.0) == 4.0
        assert f_eval(power(3), 2.0) == pytest.approx(14 / 12, rel=1e-15)

    def test_limits_at_zero(self):
        assert f_eval(KL, 0.0) == 0.0
        assert f_eval(REVERSE_KL, 0.0) == math.inf
        assert f_eval(PEARSON, 0.0) == 1.0
        assert f_eval(power(3), 0.0) == 0.0
        assert f_eval(power(-2), 0.0) == math.inf

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            f_eval(KL, -0.1)

    def test_big_f_closed_forms(self):
        assert big_f(KL, 1.0) == 1.0
        assert big_f(REVERSE_KL, 2.0) == -0.5
        assert big_f_inv(PEARSON, 0.0) == 1.0

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_big_f_is_derivative(self, fam):
        # central differences of f
        for x in (0.3, 0.9, 1.0, 1.7):
            h = 1e-6
            fd = (f_eval(fam, x + h) - f_eval(fam, x - h)) / (2 * h)
            assert big_f(fam, x) == pytest.approx(fd, rel=1e-7, abs=1e-8)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_inverse_round_trip(self, fam):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 2, 1000)
        x = x[x > 0]
        back = np.array([big_f_inv(fam, big_f(fam, v)) for v in x])
        # F(x) = x^lam / lam - 1/(lam(lam+1)) cancels when x^lam is small, so
        # the recoverable precision of x is limited by |F(x)| / |x F'(x)| = |F(x)| / x^lam.
        fx = np.array([big_f(fam, v) for v in x])
        cond = np.maximum(1.0, np.abs(fx) / x**fam.lam) if fam.tag == "power" else 1.0
        assert np.all(np.abs(back - x) <= 1e-12 * cond * x)
        if fam.tag != "power" or fam.lam < 3:
            np.testing.assert_allclose(back, x, rtol=1e-12)

    def test_inverse_range(self):
        with pytest.raises(RangeError):
            big_f_inv(REVERSE_KL, 0.5)
        with pytest.raises(RangeError):
            big_f_inv(PEARSON, -2.0)
        with pytest.raises(RangeError):
            big_f_inv(power(3), -1.0)  # F > -1/12 for lambda = 3

    def test_big_f_domain(self):
        with pytest.raises(DomainError):
            big_f(KL, 0.0)


class TestG:
    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_zero_at_one(self, fam):
        assert g_transform(fam, 1.0) == 0.0

    @given(st.floats(1e-6, 1e6))
    def test_kl_is_log(self, d):
        assert g_transform(KL, d) == pytest.approx(math.log(d), abs=1e-12)

    @given(st.floats(1e-4, 1e4))
    def test_reverse_kl_closed_form(self, d):
        assert g_transform(REVERSE_KL, d) == pytest.approx((d * d - 1) / (2 * d), rel=1e-11, abs=1e-12)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_strictly_increasing(self, fam):
        rng = np.random.default_rng(1)
        x = np.exp(rng.uniform(-6, 6, size=(1000, 2)))
        x.sort(axis=1)
        x = x[x[:, 0] < x[:, 1]]
        g1 = np.array([g_transform(fam, v) for v in x[:, 0]])
        g2 = np.array([g_transform(fam, v) for v in x[:, 1]])
        assert np.all(g1 < g2)

    def test_domain(self):
        with pytest.raises(DomainError):
            g_transform(KL, 0.0)

    def test_inverse_known(self):
        assert g_inverse(KL, 0.0) == 1.0
        assert g_inverse(KL, math.log(2)) == pytest.approx(2.0, rel=1e-13)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_inverse_against_brentq(self, fam):
        rng = np.random.default_rng(2)
        for x in np.exp(rng.uniform(-4, 4, 50)):
            a = g_transform(fam, x)
            ref = brentq(lambda t: g_transform(fam, t) - a, 1e-3, 1e3, xtol=1e-15, rtol=1e-15)
            got = g_inverse(fam, a)
            assert got == pytest.approx(ref, rel=1e-10)
            assert g_transform(fam, got) == pytest.approx(a, abs=1e-10)

    def test_inverse_outside_bounded_range(self):
        # Pearson G(x) = 4 (x - 1) / (x + 1) lies in (-4, 4)
        with pytest.raises(RangeError):
            g_inverse(PEARSON, 4.5)
        with pytest.raises(RangeError):
            g_inverse(power(3), -3.0)  # |G| < 2^3 / 3


class TestDpsParameter:
    def test_table1_reverse_kl(self):
        vals = [dps_parameter(d, REVERSE_KL) for d in TABLE1_ODDS]
        np.testing.assert_array_equal(np.round(vals, 2), [6.37, 19.22, 18.09])

    def test_table1_pearson(self):
        vals = [dps_parameter(d, PEARSON) for d in TABLE1_ODDS]
        np.testing.assert_array_equal(np.round(vals, 2), [-0.73, -0.90, -0.90])

    def test_table1_power3(self):
        vals = [dps_parameter(d, power(3)) for d in TABLE1_ODDS]
        np.testing.assert_array_equal(np.round(vals, 2), [-0.65, -0.86, -0.85])

    def test_kl_is_odds(self):
        assert dps_parameter(0.3, KL) == 0.3

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_symmetry_fixed_point(self, fam):
        assert dps_parameter(1.0, fam) == (1.0 if fam is KL else 0.0)

    @pytest.mark.parametrize("fam", [REVERSE_KL, PEARSON, power(-2), power(0.5), power(3)],
                             ids=lambda f: f.name)
    def test_linear_in_contrast(self, fam):
        # rkl = -2 a, pearson = a / 4, power = lam a / 2^lam, with a = G(d)
        scale = {"rkl": -2.0, "pearson": 0.25}.get(fam.tag)
        if scale is None:
            scale = fam.lam / 2**fam.lam
        for d in (0.05, 0.4, 1.0, 2.5, 17.0):
            assert dps_parameter(d, fam) == pytest.approx(scale * g_transform(fam, d), rel=1e-12, abs=1e-14)

    def test_matches_conditional_probability_contrast(self):
        for d in (0.1, 0.7, 3.0):
            c, cbar = d / (1 + d), 1 / (1 + d)
            assert dps_parameter(d, REVERSE_KL) == pytest.approx(1 / c - 1 / cbar)
            assert dps_parameter(d, PEARSON) == pytest.approx(c - cbar)
            assert dps_parameter(d, power(-2)) == pytest.approx(c**-2 - cbar**-2)

    def test_undefined_and_boundary(self):
        assert math.isnan(dps_parameter(math.nan, PEARSON))
        assert dps_parameter(math.inf, PEARSON) == 1.0
        with pytest.raises(DomainError):
            dps_parameter(0.0, PEARSON)

    def test_vector(self):
        p = dps_parameters(TABLE1_ODDS, PEARSON)
        assert p.values.shape == (3,) and p.family is PEARSON


class TestFDivergence:
    def _pair(self):
        p = ProbTable.from_array([[0.6, 0.0], [0.0, 0.4]])
        q = ProbTable.from_array([[0.5, 0.0], [0.0, 0.5]])
        return p, q

    def test_kl(self):
        p, q = self._pair()
        expected = 0.6 * math.log(1.2) + 0.4 * math.log(0.8)
        assert f_divergence(p, q, KL) == pytest.approx(expected, rel=1e-14)
        assert f_divergence(p, q, KL) == pytest.approx(0.02014, abs=5e-6)

    def test_pearson(self):
        p, q = self._pair()
        assert f_divergence(p, q, PEARSON) == pytest.approx(0.04, rel=1e-12)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_zero_on_equal(self, fam):
        p = np.full((3, 3), 1 / 9)
        assert f_divergence(p, p, fam) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_nonnegative(self, fam):
        rng = np.random.default_rng(9)
        for _ in range(50):
            p, q = rng.dirichlet(np.ones(9)).reshape(3, 3), rng.dirichlet(np.ones(9)).reshape(3, 3)
            assert f_divergence(p, q, fam) >= -1e-14

    def test_zero_conventions(self):
        p = np.array([[0.5, 0.5], [0.0, 0.0]])
        q = np.array([[0.5, 0.0], [0.5, 0.0]])
        # p > 0 against q = 0: KL slope at infinity is infinite
        assert f_divergence(p, q, KL) == math.inf
        # reverse KL: p = 0 against q > 0 is infinite, q = 0 < p costs p * 0
        assert f_divergence(p, q, REVERSE_KL) == math.inf
        # power(-0.5): lim f(t)/t = -1/(lam(lam+1)) = 4, f(0) = 0
        assert f_divergence(p, q, power(-0.5)) == pytest.approx(0.5 * 4.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            f_divergence(np.eye(2) / 2, np.eye(3) / 3, KL)


class TestBandContrasts:
    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_symmetric_is_zero(self, fam):
        a = np.arange(1.0, 10.0).reshape(3, 3)
        p = (a + a.T) / (a + a.T).sum()
        np.testing.assert_allclose(band_contrasts(p, fam), 0.0, atol=1e-13)

    def test_table1_dps_fit_kl(self, table1):
        p = fit_dps(table1).fitted / table1.n
        c = band_contrasts(p, KL)
        np.testing.assert_allclose(np.diag(c, 1), math.log(42 / 274), rtol=1e-12)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_antisymmetric(self, fam, table1):
        c = band_contrasts(to_probabilities(table1), fam)
        np.testing.assert_allclose(c, -c.T, rtol=1e-15)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_dps_structure_gives_band_constant(self, fam):
        rng = np.random.default_rng(10)
        p, d = random_dps_probs(rng, 5)
        c = band_contrasts(p, fam)
        for k in range(1, 5):
            band = np.diag(c, k)
            np.testing.assert_allclose(band, g_transform(fam, d[k - 1]), rtol=1e-9, atol=1e-12)

    def test_undefined_pair(self):
        p = np.array([[0.2, 0.0, 0.1], [0.0, 0.3, 0.1], [0.1, 0.1, 0.1]])
        with pytest.warns(UserWarning):
            c = band_contrasts(p, KL)
        assert np.isnan(c[0, 1]) and np.isnan(c[1, 0])
        assert np.isfinite(c[0, 2])
