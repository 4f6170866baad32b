"""OLS engine against a hand-rolled oracle, plus the panel regressions."""

import math

import numpy as np
import pytest

from bookshape.errors import (
    DegenerateEstimate,
    MissingVolumes,
    NoSeries,
    RankDeficient,
    TooFewObservations,
)
from bookshape.regression import (
    AR1_NAMES,
    DISCOVERY_NAMES,
    DYNAMIC_NAMES,
    RegressionResult,
    ar1_kappa,
    book_return,
    dynamic_adjustment,
    ols,
    price_discovery,
    summarize_per_stock,
)
from bookshape.stats import IntervalRecord, RecordPanel
from bookshape.synthetic import (
    generate_discovery_panel,
    generate_dynamic_panel,
    generate_kappa_panel,
)

from oracles import ols_reference, student_t_two_sided


class TestOls:
    def test_matches_reference_on_small_problems(self, rng):
        for trial in range(20):
            n = int(rng.integers(4, 7))
            k = int(rng.integers(1, n - 2))
            X = rng.standard_normal((n, k))
            y = rng.standard_normal(n)
            res = ols(y, X)
            rows = [[1.0] + list(map(float, X[i])) for i in range(n)]
            beta, se, t, p, r2 = ols_reference(list(map(float, y)), rows)
            for j in range(k + 1):
                assert abs(res.estimates[j] - beta[j]) <= 1e-12 * max(1.0, abs(beta[j]))
                assert abs(res.std_errors[j] - se[j]) <= 1e-12 * max(1.0, abs(se[j]))
                assert abs(res.t_stats[j] - t[j]) <= 1e-12 * max(1.0, abs(t[j]))
                assert abs(res.p_values[j] - p[j]) <= 1e-10
            assert abs(res.r_squared - r2) <= 1e-12

    def test_r_squared_equals_independent_residual_path(self, rng):
        X = rng.standard_normal((40, 2))
        y = 1.0 + X @ np.array([0.5, -0.2]) + 0.3 * rng.standard_normal(40)
        res = ols(y, X)
        fitted = np.column_stack([np.ones(40), X]) @ res.estimates
        rss = float(((y - fitted) ** 2).sum())
        tss = float(((y - y.mean()) ** 2).sum())
        assert abs(res.r_squared - (1.0 - rss / tss)) <= 1e-12

    def test_exact_fit_on_collinear_response(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0]])
        y = 2.0 + 3.0 * X[:, 0]
        res = ols(y, X)
        assert abs(res.estimates[0] - 2.0) <= 1e-12
        assert abs(res.estimates[1] - 3.0) <= 1e-12
        assert res.r_squared == 1.0

    def test_without_intercept_uses_uncentred_r_squared(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([2.0, 4.0, 6.0, 8.0])
        res = ols(y, X, add_intercept=False, names=("slope",))
        assert abs(res.estimates[0] - 2.0) <= 1e-12
        assert res.r_squared == 1.0
        assert res.names == ("slope",)

    def test_degrees_of_freedom_guard(self):
        X = np.ones((3, 2))
        with pytest.raises(TooFewObservations):
            ols(np.zeros(3), X)

    def test_rank_deficiency_detected(self):
        x = np.arange(6.0)
        X = np.column_stack([x, 2.0 * x])
        with pytest.raises(RankDeficient):
            ols(np.arange(6.0), X)

    def test_rejects_non_finite_inputs(self):
        X = np.arange(6.0)[:, None]
        y = np.arange(6.0)
        y[2] = np.nan
        with pytest.raises(ValueError):
            ols(y, X)

    def test_p_values_probe_both_beta_branches(self):
        # one huge and one tiny t statistic to hit both continued-fraction
        # branches of the reference
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        y = 5.0 * x + np.array([0.01, -0.02, 0.015, -0.005, 0.01, -0.01])
        res = ols(y, x[:, None])
        for j in range(2):
            expected = student_t_two_sided(float(res.t_stats[j]), res.df_resid)
            assert abs(res.p_values[j] - expected) <= 1e-10
        assert res.p_values[1] < 1e-8


class TestSummarizePerStock:
    def _result(self, estimate, p):
        return RegressionResult(
            names=("a",),
            estimates=np.array([estimate]),
            std_errors=np.array([1.0]),
            t_stats=np.array([estimate]),
            p_values=np.array([p]),
            r_squared=0.25,
            n_obs=50,
            df_resid=48,
        )

    def test_sign_conditioned_counts(self):
        per_stock = {
            "S00": self._result(-1.0, 0.01),
            "S01": self._result(-1.0, 0.07),
            "S02": self._result(1.0, 0.01),
            "S03": self._result(1.0, 0.20),
        }
        summary = summarize_per_stock(per_stock, skipped=("S04",))
        assert summary.n_stocks == 4
        assert summary.skipped == ("S04",)
        assert summary.n_sig_neg_5.tolist() == [1]
        assert summary.n_sig_neg_10.tolist() == [2]
        assert summary.n_sig_pos_5.tolist() == [1]
        assert summary.n_sig_pos_10.tolist() == [1]
        assert summary.mean_estimates[0] == 0.0
        assert summary.mean_r_squared == 0.25

    def test_empty_panel_rejected(self):
        with pytest.raises(NoSeries):
            summarize_per_stock({})


class TestAr1Kappa:
    def test_recovers_coefficient_and_matches_its_own_r_squared(self):
        b = -0.42
        panel = generate_kappa_panel(seed=7, b=b, n_days=500)
        summary = ar1_kappa(panel, "bid", min_pairs=100)
        res = summary.per_stock["S00"]
        assert abs(res.estimates[1] - b) <= 0.02
        assert abs(res.r_squared - b * b) <= 0.02
        assert res.names == AR1_NAMES

    def test_pools_single_pair_days(self):
        # pairs never straddle days, but sixty days of one pair each still
        # pool into one regression per stock
        kappa = {
            ("S00", f"D{j:03d}"): np.array([np.nan, 0.1 + 0.005 * j, -0.2 + 0.003 * j])
            for j in range(60)
        }
        summary = ar1_kappa(kappa, "bid", min_pairs=50)
        res = summary.per_stock["S00"]
        assert res.n_obs == 60

    def test_thin_stocks_are_skipped(self):
        panel = generate_kappa_panel(seed=3, b=0.2, n_days=4)
        rich = {key: arr for key, arr in panel.items()}
        thin = {("ZZ", "D000"): np.array(list(panel.values())[0])}
        merged = {**rich, **thin}
        summary = ar1_kappa(merged, "bid", min_pairs=100)
        assert summary.skipped == ("ZZ",)
        assert set(summary.per_stock) == {"S00"}

    def test_no_usable_stock_raises(self):
        with pytest.raises(NoSeries):
            ar1_kappa({("S00", "D000"): np.full(48, np.nan)}, "bid")


class TestDynamicAdjustment:
    def test_recovers_generating_coefficients(self):
        truth = dict(alpha=-0.35, beta=0.4, gamma=-0.15, lam=3.0, eta=40.0)
        panel = generate_dynamic_panel(seed=11, side="bid", n_days=400, **truth)
        summary = dynamic_adjustment(panel, "bid")
        res = summary.per_stock["S00"]
        assert res.names == DYNAMIC_NAMES
        targets = (truth["alpha"], truth["beta"], truth["gamma"], truth["lam"], truth["eta"])
        for est, se, target in zip(res.estimates, res.std_errors, targets):
            assert abs(est - target) <= 3.0 * se

    def test_lagged_market_variables_change_the_design(self):
        panel = generate_dynamic_panel(
            seed=5, side="ask", alpha=-0.3, beta=0.5, gamma=0.0, lam=0.0, eta=0.0, n_days=50
        )
        lead = dynamic_adjustment(panel, "ask")
        lagged = dynamic_adjustment(panel, "ask", lag_market_vars=True)
        assert lead.per_stock["S00"].n_obs == lagged.per_stock["S00"].n_obs
        assert not np.allclose(
            lead.per_stock["S00"].estimates, lagged.per_stock["S00"].estimates
        )

    def test_empty_panel_raises(self):
        with pytest.raises(NoSeries):
            dynamic_adjustment(RecordPanel(4), "bid")


class TestBookReturn:
    def _record(self, **overrides):
        fields = dict(
            stock_id="S00",
            day_id="D000",
            t=1,
            c_bid=0.5,
            c_ask=0.6,
            W_bid=3e-4,
            W_ask=2e-4,
            v_buy=100.0,
            v_sell=50.0,
        )
        fields.update(overrides)
        return IntervalRecord(**fields)

    def test_matches_hand_computation(self):
        r = book_return(self._record())
        expected = 2e-4 * 100.0**0.6 - 3e-4 * 50.0**0.5
        assert r == pytest.approx(expected, rel=1e-12, abs=0.0)

    def test_zero_volume_contributes_nothing(self):
        assert book_return(self._record(v_buy=0.0, v_sell=0.0)) == 0.0
        r = book_return(self._record(v_buy=0.0))
        assert r == pytest.approx(-3e-4 * math.sqrt(50.0), rel=1e-12, abs=0.0)

    def test_degenerate_or_missing_fit_rejected(self):
        with pytest.raises(DegenerateEstimate):
            book_return(self._record(c_ask=float("nan")))
        with pytest.raises(DegenerateEstimate):
            book_return(self._record(c_bid=-0.2))

    def test_missing_volumes_rejected(self):
        with pytest.raises(MissingVolumes):
            book_return(self._record(v_sell=float("nan")))

    def test_negative_volume_is_a_programming_error(self):
        with pytest.raises(ValueError):
            book_return(self._record(v_buy=-1.0))


class TestPriceDiscovery:
    def test_recovers_generating_coefficients(self):
        truth = dict(alpha_scale=0.9, beta=0.9, gamma=20.0, lam=0.3)
        panel = generate_discovery_panel(seed=13, n_days=400, **truth)
        summary = price_discovery(panel)
        res = summary.per_stock["S00"]
        assert res.names == DISCOVERY_NAMES
        alpha = truth["alpha_scale"] * (1.0 - truth["beta"]) * math.log(10.0)
        targets = (alpha, truth["beta"], truth["gamma"], truth["lam"])
        for est, se, target in zip(res.estimates, res.std_errors, targets):
            assert abs(est - target) <= 3.0 * se

    def test_needs_volumes(self):
        records = [
            IntervalRecord("S00", "D000", t, c_bid=0.5, c_ask=0.6, W_bid=2e-4,
                           W_ask=2e-4, mid=10.0, r=0.001)
            for t in range(1, 21)
        ]
        panel = RecordPanel.from_records(records, n_intervals=48)
        with pytest.raises(NoSeries):
            price_discovery(panel)
