from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from restrictlab.families import Gaussian, sample
from restrictlab.norms import (epstein_zeta, exponent_profile, lp_norm, mixed_norm, sobolev_norm,
                               sobolev_norm_along_axis)
from restrictlab.spectral import make_grid, physical

CATALAN = 0.915965594177219015


def gaussian_sobolev(d, s, w=1.0):
    """Closed-form H^s norm of exp(-|x|^2 / (2 w^2))."""
    sq = (2 * np.pi) ** d * w ** (2 * d) * np.pi ** (d / 2) * special.gamma(d / 2 + s) / special.gamma(d / 2)
    return np.sqrt(sq * w ** (-2 * s - d))


class TestLebesgue:
    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("p", [1.0, 1.2, 2.0, 4.0])
    def test_gaussian(self, d, p):
        g = make_grid(d, 64, 10.0)
        expected = (2 * np.pi / p) ** (d / (2 * p))
        assert lp_norm(sample(Gaussian(), g), p) == pytest.approx(expected, rel=1e-12)

    def test_sup(self):
        g = make_grid(2, 16, 3.0)
        v = np.zeros(g.shape)
        v[3, 4] = -2.5
        assert lp_norm(physical(g, v), np.inf) == 2.5

    def test_rejects_small_exponent(self):
        g = make_grid(1, 16, 3.0)
        with pytest.raises(ValueError):
            lp_norm(physical(g, np.ones(g.shape)), 0.5)

    def test_mixed_separable(self):
        g = make_grid(3, 96, 14.0)
        f = sample(Gaussian(width=(0.8, 1.0, 1.5)), g)
        one = lambda w, p: (2 * np.pi * w * w / p) ** (1 / (2 * p))
        inner = one(0.8, 4.0) * one(1.0, 4.0)
        assert mixed_norm(f, (2,), (0, 1), 2.0, 4.0) == pytest.approx(inner * one(1.5, 2.0), rel=1e-12)

    def test_mixed_equal_exponents_is_lp(self):
        g = make_grid(2, 48, 9.0)
        f = sample(Gaussian(width=(0.9, 1.1), modulation=(1.0, 0)), g)
        assert mixed_norm(f, (0,), (1,), 3.0, 3.0) == pytest.approx(lp_norm(f, 3.0), rel=1e-13)

    @pytest.mark.parametrize("outer,inner", [((0,), (0, 1)), ((0,), (2,)), ((0,), ())])
    def test_mixed_bad_partition(self, outer, inner):
        g = make_grid(2, 16, 3.0)
        with pytest.raises(ValueError, match="partition"):
            mixed_norm(physical(g, np.ones(g.shape)), outer, inner, 2.0, 2.0)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), q=st.floats(1.0, 6.0), r=st.floats(1.0, 6.0))
    def test_minkowski_swap(self, seed, q, r):
        # || ||f||_r ||_q <= || ||f||_q ||_r whenever r <= q
        g = make_grid(2, 8, 2.0)
        f = physical(g, np.random.default_rng(seed).standard_normal(g.shape))
        lo, hi = min(q, r), max(q, r)
        assert mixed_norm(f, (0,), (1,), hi, lo) <= mixed_norm(f, (1,), (0,), lo, hi) * (1 + 1e-12)


class TestEpstein:
    @pytest.mark.parametrize("sigma", [-1.5, -0.25, 0.75, 1.5, 3.0])
    def test_one_dimension(self, sigma):
        assert epstein_zeta(1, sigma) == pytest.approx(2 * special.zeta(2 * sigma) if sigma > 0.5
                                                       else _zeta_continued(2 * sigma), rel=1e-10)

    def test_square_lattice(self):
        assert epstein_zeta(2, 2.0) == pytest.approx(4 * special.zeta(2.0) * CATALAN, rel=1e-10)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_trivial_values(self, d):
        assert epstein_zeta(d, 0.0) == pytest.approx(-1.0, abs=1e-10)
        assert epstein_zeta(d, -1.0) == pytest.approx(0.0, abs=1e-10)


def _zeta_continued(s):
    # functional equation for 2 zeta(s), s < 1
    return 2 * 2**s * np.pi ** (s - 1) * np.sin(np.pi * s / 2) * special.gamma(1 - s) * special.zeta(1 - s)


class TestSobolev:
    @pytest.mark.parametrize("d,s", [(1, -0.25), (1, 0.5), (1, -1 / 3), (2, -1 / 3), (2, 0.5),
                                     (3, -0.25), (3, 1.0), (3, -0.5)])
    def test_gaussian_closed_form(self, d, s):
        # frequency spacing pi/10; the dropped lattice term is O(h^{d+2s+4})
        g = make_grid(d, 64 if d < 3 else 48, 10.0)
        assert sobolev_norm(sample(Gaussian(), g), s) == pytest.approx(gaussian_sobolev(d, s), rel=5e-6)

    @pytest.mark.parametrize("d,s", [(2, -1 / 3), (3, -0.5)])
    def test_lattice_remainder_order(self, d, s):
        errs = []
        for L in (10.0, 16.0):
            g = make_grid(d, int(6.4 * L) // 2 * 2, L)
            errs.append(abs(sobolev_norm(sample(Gaussian(), g), s) / gaussian_sobolev(d, s) - 1))
        order = np.log(errs[0] / errs[1]) / np.log(1.6)
        assert order == pytest.approx(d + 2 * s + 4, abs=0.5)

    def test_order_zero_is_plancherel(self):
        g = make_grid(2, 48, 8.0)
        f = sample(Gaussian(width=0.7, center=(0.5, 0)), g)
        assert sobolev_norm(f, 0.0) == pytest.approx(np.sqrt((2 * np.pi) ** 2) * lp_norm(f, 2), rel=1e-12)

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_homogeneity(self, lam):
        # ||f(./lam)||_{H^s} = lam^{d/2 - s} ||f||_{H^s}
        g = make_grid(1, 512, 32.0)
        s = -1 / 3
        base = sobolev_norm(sample(Gaussian(), g), s)
        assert sobolev_norm(sample(Gaussian(width=lam), g), s) == pytest.approx(lam ** (0.5 - s) * base, rel=1e-7)

    def test_order_bound(self):
        g = make_grid(2, 32, 4.0)
        with pytest.raises(ValueError, match="exceed"):
            sobolev_norm(sample(Gaussian(width=0.5), g), -1.0)

    def test_along_axis_matches_one_dimensional(self):
        g = make_grid(2, 64, 10.0)
        f = sample(Gaussian(width=(1.0, 0.8)), g)
        slices = sobolev_norm_along_axis(f, 1, -1 / 3)
        ref = gaussian_sobolev(1, -1 / 3, 0.8) * np.exp(-0.5 * g.x(0) ** 2)
        np.testing.assert_allclose(slices.values.real, ref, rtol=1e-6, atol=1e-14)


class TestExponents:
    @pytest.mark.parametrize("d,p0,p0d,alpha,s", [
        (2, Fraction(6, 5), 6, Fraction(1, 6), Fraction(-1, 3)),
        (3, Fraction(4, 3), 4, Fraction(1, 4), Fraction(-1, 4)),
    ])
    def test_table(self, d, p0, p0d, alpha, s):
        prof = exponent_profile(d)
        assert (prof.p0, prof.p0_dual, prof.alpha, prof.s) == (p0, p0d, alpha, s)

    @given(st.integers(2, 12))
    def test_relations(self, d):
        prof = exponent_profile(d)
        assert prof.alpha == 1 / prof.p0_dual
        assert prof.s == Fraction(1, 2) - 1 / prof.p0
        assert prof.s == Fraction(-1, d + 1)

    @pytest.mark.parametrize("d", [1, 0, 2.5])
    def test_rejects(self, d):
        with pytest.raises(ValueError):
            exponent_profile(d)
