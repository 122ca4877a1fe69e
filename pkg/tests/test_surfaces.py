import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restrictlab.families import Gaussian, sample
from restrictlab.quadrature import circle_nodes, singular_endpoint, sphere_nodes
from restrictlab.spectral import forward_transform, make_grid
from restrictlab.surfaces import (ConeGraph, HyperplaneGraph, MFGraph, MGraph, Sphere, extension_operator,
                                  product_restrict, restrict_physical, restrict_to_surface, trace_lq_norm)


# int_{R^2} |f^(xi, |xi|)|^2 dxi / |xi| for the unit Gaussian on R^3
CONE_GAUSSIAN = np.sqrt((2 * np.pi) ** 3 * 2 * np.pi * np.sqrt(np.pi / 8))


class TestQuadrature:
    @pytest.mark.parametrize("dim,R,area", [(2, 1.5, 3 * np.pi), (3, 2.0, 16 * np.pi)])
    def test_total_measure(self, dim, R, area):
        _, w = sphere_nodes(dim, R, 32)
        assert w.sum() == pytest.approx(area, rel=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(a=st.integers(0, 6), b=st.integers(0, 6), c=st.integers(0, 6))
    def test_sphere_monomials(self, a, b, c):
        # int_{S^2} x^a y^b z^c: zero unless all even, else 2 prod Gamma((k+1)/2) / Gamma((n+3)/2)
        from scipy.special import gamma
        pts, w = sphere_nodes(3, 1.0, 24)
        got = (w * pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c).sum()
        if a % 2 or b % 2 or c % 2:
            expected = 0.0
        else:
            expected = 2 * gamma((a + 1) / 2) * gamma((b + 1) / 2) * gamma((c + 1) / 2) / gamma((a + b + c + 3) / 2)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_circle_trigonometric(self):
        pts, w = circle_nodes(1.0, 16)
        for k in range(1, 16):
            assert abs((w * np.exp(1j * k * np.arctan2(pts[:, 1], pts[:, 0]))).sum()) < 1e-13

    @pytest.mark.parametrize("kappa", [1 / 3, 2 / 3, 1 / 6])
    def test_singular_endpoint(self, kappa):
        x, w = singular_endpoint(0.0, 2.0, 40)
        assert (w * x ** (-kappa)).sum() == pytest.approx(2 ** (1 - kappa) / (1 - kappa), rel=1e-12)


class TestSphereTrace:
    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_circle_gaussian(self, R):
        g = make_grid(2, 64, 10.0)
        tr = restrict_to_surface(forward_transform(sample(Gaussian(), g)), Sphere(2, R))
        expected = np.sqrt(2 * np.pi * R) * 2 * np.pi * np.exp(-R * R / 2)
        assert trace_lq_norm(tr, 2.0) == pytest.approx(expected, rel=1e-12)

    def test_sphere_gaussian(self):
        g = make_grid(3, 32, 8.0)
        tr = restrict_physical(sample(Gaussian(), g), Sphere(3, 1.0, nodes=24))
        expected = np.sqrt(4 * np.pi) * (2 * np.pi) ** 1.5 * np.exp(-0.5)
        assert trace_lq_norm(tr, 2.0) == pytest.approx(expected, rel=1e-12)

    def test_radius_outside_box(self):
        g = make_grid(2, 16, 8.0)
        with pytest.raises(ValueError, match="outside"):
            restrict_to_surface(forward_transform(sample(Gaussian(width=2.0), g, None)), Sphere(2, 5.0))

    @pytest.mark.parametrize("bad", [dict(dim=4, radius=1.0), dict(dim=2, radius=0.0)])
    def test_bad_spheres(self, bad):
        with pytest.raises(ValueError):
            Sphere(**bad)


class TestGraphTrace:
    def test_cone_gaussian(self):
        # int_{R^2} |f^(xi, |xi|)|^2 dxi / |xi| = (2 pi)^3 2 pi sqrt(pi / 8)
        g = make_grid(3, 64, 12.0)
        tr = restrict_physical(sample(Gaussian(), g), ConeGraph(2), outside="drop")
        assert trace_lq_norm(tr, 2.0) == pytest.approx(CONE_GAUSSIAN, rel=2e-5)

    def test_cone_apex_remainder_order(self):
        # the first lattice term not removed at the apex is O(h^{d - 1 + 4})
        errs = []
        for N, L in [(64, 12.0), (96, 16.0)]:
            tr = restrict_physical(sample(Gaussian(), make_grid(3, N, L)), ConeGraph(2), outside="drop")
            errs.append(abs(trace_lq_norm(tr, 2.0) / CONE_GAUSSIAN - 1))
        assert np.log(errs[0] / errs[1]) / np.log(16 / 12) == pytest.approx(5.0, abs=0.5)

    @pytest.mark.parametrize("spec", [MGraph(), MFGraph(2.0), MFGraph(1.2), ConeGraph(3, 0.5)])
    def test_values_match_closed_form(self, spec):
        g = make_grid(4, 48, 9.0)
        fam = Gaussian(width=(1.0, 0.9, 1.1, 1.0), modulation=(0.5, 0, 0, 0))
        tr = restrict_physical(sample(fam, g), spec, outside="drop")
        amb = np.column_stack([tr.nodes, spec.height(tr.nodes)])
        np.testing.assert_allclose(tr.values, fam.spectrum(amb), atol=1e-10)
        np.testing.assert_allclose(tr.weights, spec.weight(tr.nodes) * np.prod(g.dxi[:3]))

    def test_leaving_box(self):
        g = make_grid(3, 16, 4.0)
        f = sample(Gaussian(width=0.5), g, None)
        with pytest.raises(ValueError, match="leaves"):
            restrict_physical(f, ConeGraph(2, 2.0))
        kept = restrict_physical(f, ConeGraph(2, 2.0), outside="drop")
        assert 0 < len(kept.values) < g.N**2

    @pytest.mark.parametrize("make", [lambda: MFGraph(1.0), lambda: MGraph(dim=2), lambda: ConeGraph(2, 0.0)])
    def test_bad_graphs(self, make):
        with pytest.raises(ValueError):
            make()

    def test_grid_dimension_mismatch(self):
        g = make_grid(3, 16, 4.0)
        with pytest.raises(ValueError, match="needs a 4-D grid"):
            restrict_to_surface(forward_transform(sample(Gaussian(width=0.7), g, None)), MGraph())


class TestExtension:
    def test_hyperplane_is_inverse_transform(self):
        g = make_grid(2, 32, 7.0)
        f = sample(Gaussian(width=0.8), g)
        out = extension_operator(forward_transform(f), HyperplaneGraph(2), 1.7)
        np.testing.assert_allclose(out.values, f.values, atol=1e-13)

    def test_cone_multiplier(self):
        g = make_grid(2, 32, 7.0)
        fh = forward_transform(sample(Gaussian(width=0.8), g))
        r = np.sqrt(sum(x**2 for x in g.mesh("frequency")))
        density = fh * r
        out = forward_transform(extension_operator(density, ConeGraph(2), 2.5))
        expected = np.where(r > 0, np.exp(2.5j * r) * fh.values, 0.0)
        np.testing.assert_allclose(out.values, expected, atol=1e-12)

    def test_rejects_sphere(self):
        g = make_grid(2, 16, 4.0)
        with pytest.raises(ValueError, match="graph"):
            extension_operator(forward_transform(sample(Gaussian(width=0.6), g, None)), Sphere(2, 1.0), 0.0)


def test_product_trace_separable():
    g = make_grid(4, 40, 9.0)
    fam = Gaussian(width=(1.0, 1.0, 0.8, 0.8))
    tr = product_restrict(forward_transform(sample(fam, g)), Sphere(2, 1.0, nodes=16), Sphere(2, 1.5, nodes=16))
    np.testing.assert_allclose(tr.values, fam.spectrum(tr.nodes), atol=1e-11)
    assert tr.weights.sum() == pytest.approx(2 * np.pi * 3 * np.pi, rel=1e-13)
