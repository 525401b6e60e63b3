"""Tests for path simulation, the small-time tail estimate and increment CSV I/O."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from levybreak import (
    IncrementSeries,
    JumpModel,
    ProcessSpec,
    SamplerConfig,
    read_increments_csv,
    read_prices_csv,
    simulate_path,
    small_time_tail_probability,
    write_increments_csv,
)
from levybreak.simulator import floor_index

B1 = JumpModel.beta_family(1.0)


class TestIncrementSeries:
    def test_k_n(self, toy: IncrementSeries) -> None:
        assert toy.n == 4
        assert toy.k_n == 1.0

    def test_read_only(self, toy: IncrementSeries) -> None:
        with pytest.raises(ValueError):
            toy.values[0] = 1.0

    def test_copies_input(self) -> None:
        raw = np.array([1.0, 2.0])
        s = IncrementSeries.from_values(raw, 1.0)
        raw[0] = 5.0
        assert s.values[0] == 1.0

    @pytest.mark.parametrize(
        "values, delta_n",
        [([1.0], 1.0), ([1.0, float("nan")], 1.0), ([1.0, 2.0], 0.0), ([1.0, float("inf")], 1.0)],
    )
    def test_invalid(self, values: list[float], delta_n: float) -> None:
        with pytest.raises(ValueError):
            IncrementSeries.from_values(values, delta_n)


class TestProcessSpec:
    def test_break_fields_together(self) -> None:
        with pytest.raises(ValueError):
            ProcessSpec(jump_post=B1)
        with pytest.raises(ValueError):
            ProcessSpec(theta0=0.5)

    @pytest.mark.parametrize("theta0", [0.0, 1.0, 1.2])
    def test_theta0_open_interval(self, theta0: float) -> None:
        with pytest.raises(ValueError):
            ProcessSpec(jump_post=B1, theta0=theta0)

    def test_negative_sigma(self) -> None:
        with pytest.raises(ValueError):
            ProcessSpec(sigma=-1.0)


class TestFloorIndex:
    @pytest.mark.parametrize("n, theta, expected", [(22500, 0.7, 15750), (10, 0.3, 3), (4, 0.25, 1), (7, 1.0, 7)])
    def test_representation_error(self, n: int, theta: float, expected: int) -> None:
        assert floor_index(n, theta) == expected


class TestSimulatePath:
    def test_exact_stable_positive(self) -> None:
        s = simulate_path(ProcessSpec(), 5000, 1 / 90, SamplerConfig(method="exact-stable", seed=3))
        assert np.all(s.values > 0)
        assert np.all(np.diff(np.cumsum(s.values)) > 0)

    def test_pure_drift(self) -> None:
        # U(1e20) * delta * n is about 5e-10 expected jumps.
        cfg = SamplerConfig(eps_sim=1e20, compensate_small=False, seed=1)
        s = simulate_path(ProcessSpec(b=1.0), 1000, 0.01, cfg)
        np.testing.assert_allclose(s.values, 0.01, rtol=1e-12)

    def test_deterministic(self) -> None:
        spec = ProcessSpec(b=1.0, sigma=1.0, jump_post=JumpModel.beta_family(3.0), theta0=0.4)
        cfg = SamplerConfig(seed=99)
        assert simulate_path(spec, 2000, 1 / 90, cfg) == simulate_path(spec, 2000, 1 / 90, cfg)
        other = simulate_path(spec, 2000, 1 / 90, SamplerConfig(seed=100))
        assert not np.array_equal(other.values, simulate_path(spec, 2000, 1 / 90, cfg).values)

    def test_break_split(self) -> None:
        a = ProcessSpec(jump_post=JumpModel.beta_family(2.0), theta0=0.3)
        b = ProcessSpec(jump_post=JumpModel.beta_family(5.0), theta0=0.3)
        sa = simulate_path(a, 1000, 0.01, SamplerConfig(seed=5))
        sb = simulate_path(b, 1000, 0.01, SamplerConfig(seed=5))
        # The two segments use separate streams, so the post-break law leaves the
        # first 300 increments untouched.
        np.testing.assert_array_equal(sa.values[:300], sb.values[:300])
        assert not np.array_equal(sa.values[300:], sb.values[300:])
        assert sa.n == 1000

    def test_exact_stable_requires_beta(self) -> None:
        tab = JumpModel.tabulated([0.1, 1.0], [2.0, 1.0])
        with pytest.raises(ValueError, match="parametric"):
            simulate_path(ProcessSpec(jump_pre=tab), 10, 0.1, SamplerConfig(method="exact-stable"))

    def test_invalid_n(self) -> None:
        with pytest.raises(ValueError):
            simulate_path(ProcessSpec(), 1, 0.1)

    def test_exact_stable_law(self) -> None:
        # (beta delta^2 / 2) / Z^2 is Levy distributed with scale beta delta^2 / 2.
        delta = 1 / 90
        s = simulate_path(ProcessSpec(), 20000, delta, SamplerConfig(method="exact-stable", seed=11))
        res = stats.kstest(s.values, stats.levy(scale=delta**2 / 2).cdf)
        assert res.pvalue > 0.01

    def test_h1_with_equal_measures_matches_h0(self) -> None:
        n, delta = 100_000, 1 / 90
        h1 = ProcessSpec(b=1.0, sigma=1.0, jump_post=B1, theta0=0.5)
        h0 = ProcessSpec(b=1.0, sigma=1.0)
        x1 = simulate_path(h1, n, delta, SamplerConfig(seed=21)).values
        x0 = simulate_path(h0, n, delta, SamplerConfig(seed=22)).values
        assert stats.ks_2samp(x1, x0).pvalue > 0.01

    def test_clipped_means_agree(self) -> None:
        # Increments have infinite mean, so the check compares means of min(X, 1).
        n, delta = 100_000, 1 / 90
        cfg = dict(compensate_small=True)
        a = np.minimum(simulate_path(ProcessSpec(), n, delta, SamplerConfig(seed=31, **cfg)).values, 1.0)
        b = np.minimum(
            simulate_path(ProcessSpec(), n, delta, SamplerConfig(method="exact-stable", seed=32)).values, 1.0
        )
        se = math.sqrt(a.var(ddof=1) / n + b.var(ddof=1) / n)
        assert abs(a.mean() - b.mean()) < 3 * se

    def test_lag_one_autocorrelation(self) -> None:
        x = simulate_path(ProcessSpec(sigma=1.0), 50_000, 1 / 90, SamplerConfig(seed=41)).values
        x = np.minimum(x, np.quantile(x, 0.99))
        r = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(r) < 3 / math.sqrt(x.size)


class TestSmallTime:
    def test_first_order_term(self) -> None:
        # For the exact sampler P(X_t >= 1) = 2 Phi(t / sqrt 2) - 1, about t / sqrt(pi).
        t, reps = 2.0**-6, 100_000
        p, se = small_time_tail_probability(
            ProcessSpec(), t, 1.0, reps, seed=3, sampler=SamplerConfig(method="exact-stable")
        )
        assert abs(p / t - math.sqrt(1 / math.pi)) < 4 * se / t

    def test_pure_drift_never_reaches(self) -> None:
        sampler = SamplerConfig(eps_sim=1e20, compensate_small=False)
        p, se = small_time_tail_probability(ProcessSpec(b=1.0), 1.0, 2.0, 10_000, seed=0, sampler=sampler)
        assert p == 0.0 and se == 0.0

    def test_rejects_break(self) -> None:
        spec = ProcessSpec(jump_post=B1, theta0=0.5)
        with pytest.raises(ValueError):
            small_time_tail_probability(spec, 0.1, 1.0, 100, seed=0)


class TestCsv:
    def test_round_trip(self, tmp_path) -> None:
        s = simulate_path(ProcessSpec(sigma=1.0), 50, 1 / 90, SamplerConfig(seed=2))
        p = tmp_path / "x.csv"
        write_increments_csv(s, p, seed=2)
        assert read_increments_csv(p) == s
        assert p.read_text().splitlines()[0].startswith("# delta_n=")

    def test_byte_identical(self, tmp_path) -> None:
        s = simulate_path(ProcessSpec(), 50, 1 / 90, SamplerConfig(seed=2))
        write_increments_csv(s, tmp_path / "a.csv", seed=2)
        write_increments_csv(s, tmp_path / "b.csv", seed=2)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    @pytest.mark.parametrize(
        "body, match",
        [
            ("# delta_n=0.1\nj,increment\n1,0.5\n2,abc\n", ":4:"),
            ("# delta_n=0.1\nj,increment\n1,0.5\n2,nan\n", ":4:"),
            ("j,increment\n1,0.5\n2,0.1\n", "delta_n"),
            ("# delta_n=0.1\nfoo,bar\n1,0.5\n", ":2:"),
        ],
    )
    def test_diagnostics(self, tmp_path, body: str, match: str) -> None:
        p = tmp_path / "bad.csv"
        p.write_text(body)
        with pytest.raises(ValueError, match=match):
            read_increments_csv(p)

    def test_prices(self, tmp_path) -> None:
        p = tmp_path / "prices.csv"
        p.write_text("t,price\n0,1.0\n0.5,1.5\n1.0,1.25\n1.5,2.0\n")
        s = read_prices_csv(p)
        assert s.delta_n == 0.5
        np.testing.assert_allclose(s.values, [0.5, -0.25, 0.75])

    def test_prices_not_equidistant(self, tmp_path) -> None:
        p = tmp_path / "prices.csv"
        p.write_text("t,price\n0,1.0\n0.5,1.5\n2.0,1.25\n")
        with pytest.raises(ValueError, match="equidistant"):
            read_prices_csv(p)
