import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restrictlab.families import Gaussian, sample
from restrictlab.norms import lp_norm
from restrictlab.propagators import (StrichartzSpec, WaveData, WindowError, anisotropic_ratio, default_window,
                                     gamma_decompose, gaussian_wave_data, rotating_evolve, space_outer_norm,
                                     strichartz_ratio, time_grid, wave_evolve)
from restrictlab.spectral import make_grid, physical


def spread(v):
    v = np.asarray(v)
    return (v.max() - v.min()) / v.mean()


class TestSpec:
    def test_rotating_default(self):
        spec = StrichartzSpec.rotating()
        assert (spec.q_t, spec.r_x, spec.orders) == (6.0, 6.0, (1.0,))

    @settings(max_examples=40)
    @given(q=st.floats(6.0, 60.0), slack=st.floats(0.0, 0.1))
    def test_rotating_range(self, q, slack):
        inv_r = max(1 / 3 - 1 / q - slack, 1e-3)
        spec = StrichartzSpec.rotating(q, 1 / inv_r)
        assert spec.orders[0] == pytest.approx(1.5 - 3 * inv_r)

    @pytest.mark.parametrize("q,r", [(4.0, 12.0), (6.0, 4.0)])
    def test_rotating_outside_range(self, q, r):
        with pytest.raises(ValueError, match="1/q"):
            StrichartzSpec.rotating(q, r)

    @pytest.mark.parametrize("dim,p", [(2, 6.0), (3, 4.0)])
    def test_wave_restriction(self, dim, p):
        spec = StrichartzSpec.wave_restriction(dim)
        assert (spec.q_t, spec.r_x, spec.orders) == (p, p, (0.5, -0.5))

    def test_wave_energy(self):
        spec = StrichartzSpec.wave_energy(3, 4.0)
        assert spec.r_x == pytest.approx(12.0)
        with pytest.raises(ValueError, match="balances"):
            StrichartzSpec.wave_energy(2, 4.0)

    @pytest.mark.parametrize("kwargs,match", [
        (dict(equation="heat", q_t=4, r_x=4, orders=(0.5, -0.5)), "equation"),
        (dict(equation="wave", q_t=4, r_x=4, orders=(0.5, 0.0)), "differ by one"),
        (dict(equation="wave", q_t=4, r_x=5, orders=(0.5, -0.5)), "scale balanced"),
        (dict(equation="rotating", q_t=6, r_x=6, orders=(0.5,)), "scale balanced"),
        (dict(equation="rotating", q_t=6, r_x=6, orders=(1.0,), dim=2), "R\\^3"),
    ])
    def test_validation(self, kwargs, match):
        with pytest.raises(ValueError, match=match):
            StrichartzSpec(**kwargs)


class TestWave:
    def test_dalembert_one_dimension(self):
        g = make_grid(1, 512, 24.0)
        x = g.x(0)
        f = np.exp(-x**2 / 2)
        data = WaveData(physical(g, f), physical(g, -x * f))
        t = np.array([0.0, 1.5, 4.0])
        u = wave_evolve(data, t)
        G = lambda y: np.exp(-y**2 / 2)
        for k, tk in enumerate(t):
            exact = 0.5 * (G(x + tk) + G(x - tk)) + 0.5 * (G(x + tk) - G(x - tk))
            np.testing.assert_allclose(u.values[k], exact, atol=1e-12)

    def test_mean_mode_is_stationary(self):
        g = make_grid(2, 16, 4.0)
        data = WaveData(physical(g, np.full(g.shape, 2.0)), physical(g, np.zeros(g.shape)))
        u = wave_evolve(data, [0.0, 1.0, 3.0])
        np.testing.assert_allclose(u.values, 2.0, atol=1e-13)

    def test_velocity_mean_rejected(self):
        g = make_grid(2, 16, 4.0)
        data = WaveData(physical(g, np.zeros(g.shape)), sample(Gaussian(width=0.5), g, None))
        with pytest.raises(ValueError, match="mean mode"):
            gamma_decompose(data)

    def test_data_validation(self):
        a, b = make_grid(2, 16, 4.0), make_grid(2, 16, 5.0)
        with pytest.raises(ValueError, match="share"):
            WaveData(physical(a, np.zeros(a.shape)), physical(b, np.zeros(b.shape)))

    def test_initial_velocity(self):
        g = make_grid(3, 48, 12.0)
        data = gaussian_wave_data(g, 1.0, 1.0)
        eps = 1e-3
        u = wave_evolve(data, [-eps, 0.0, eps])
        np.testing.assert_allclose(u.values[1], data.f.values, atol=1e-13)
        deriv = (u.values[2] - u.values[0]) / (2 * eps)
        assert np.abs(deriv - data.g.values).max() < 1e-6

    def test_window_defaults(self):
        g = make_grid(3, 16, 8.0)
        data = gaussian_wave_data(g, 0.6)
        assert default_window(data, StrichartzSpec.wave_restriction(3)) == 6.0
        assert default_window(data.f, StrichartzSpec.rotating()) == 64.0


@pytest.fixture(scope="module")
def setup():
    g = make_grid(3, 32, 8.0)
    return sample(Gaussian(width=0.9, center=(0.3, 0, -0.2)), g, None)


class TestRotating:
    def test_energy_and_motion(self, setup):
        u = rotating_evolve(setup, [0.0, 2.0, 7.5])
        e0 = lp_norm(setup, 2)
        for k in range(3):
            assert abs(lp_norm(u.snapshot(k), 2) - e0) < 1e-12 * e0
        assert np.abs(u.values[2] - setup.values).max() > 1e-2

    def test_group_law_and_reversal(self, setup):
        a = rotating_evolve(setup, [1.3, 4.0])
        b = rotating_evolve(a.snapshot(0), [2.7])
        np.testing.assert_allclose(b.values[0], a.values[1], atol=1e-13)
        back = rotating_evolve(a.snapshot(1), [4.0], sign=-1)
        np.testing.assert_allclose(back.values[0], setup.values, atol=1e-13)

    def test_rejects(self, setup):
        with pytest.raises(ValueError, match="sign"):
            rotating_evolve(setup, [1.0], sign=2)
        with pytest.raises(ValueError, match="R\\^3"):
            rotating_evolve(sample(Gaussian(), make_grid(2, 32, 8.0)), [1.0])


class TestRatios:
    def test_zero_data(self):
        g = make_grid(3, 16, 4.0)
        with pytest.raises(ValueError, match="degenerate"):
            strichartz_ratio(physical(g, np.zeros(g.shape)), StrichartzSpec.rotating())

    def test_short_window_raises(self):
        g = make_grid(3, 32, 8.0)
        with pytest.raises(WindowError, match="tail fraction") as info:
            strichartz_ratio(sample(Gaussian(), g, None), StrichartzSpec.rotating(), window=2.0, snapshots=32)
        assert info.value.tail > info.value.budget

    def test_spec_data_mismatch(self):
        g = make_grid(3, 16, 8.0)
        with pytest.raises(ValueError, match="WaveData"):
            strichartz_ratio(sample(Gaussian(width=0.7), g, None), StrichartzSpec.wave_restriction(3))

    def test_time_grid(self):
        np.testing.assert_allclose(time_grid(2.0, 5), [0, 0.5, 1, 1.5, 2])
        with pytest.raises(ValueError):
            time_grid(0.0)
        with pytest.raises(ValueError):
            time_grid(1.0, 2)

    def test_space_outer_norm(self):
        inner = np.array([1.0, 8.0, 27.0])
        assert space_outer_norm(inner, 0.5, 2.0, 3.0) == pytest.approx(np.sqrt(0.5 * 14.0))

    @pytest.mark.slow
    def test_anisotropic_dilation(self):
        g = make_grid(3, 96, 24.0)
        ests = [anisotropic_ratio(sample(Gaussian(width=1 / lam), g, None), window=40.0)
                for lam in (0.5, 1.0, 2.0)]
        assert spread([e.ratio for e in ests]) < 0.1
        assert max(e.extra["tail"] for e in ests) <= 0.01
        assert all(e.extra["time_outer"] > 0 for e in ests)
