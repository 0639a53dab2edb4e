import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from springcurl.errors import (InvalidComparisonError, InvalidInputError,
                               ModelSpecError)
from springcurl.stats import (ModelSpec, behavior_model, build_design,
                              compare_models, contrast, fit_lmm, holm_adjust,
                              learning_model, loc_transform, mains,
                              marginal_prediction, normalize_likert,
                              training_model, transfer_model)


def grid_loglik(X, y, groups, lam):
    """Independent likelihood evaluation with explicit dense matrices."""
    labels = {g: i for i, g in enumerate(dict.fromkeys(groups))}
    Z = np.zeros((len(y), len(labels)))
    for row, g in enumerate(groups):
        Z[row, labels[g]] = 1.0
    n = len(y)
    V = np.eye(n) + lam * Z @ Z.T
    Vi = np.linalg.inv(V)
    beta = np.linalg.solve(X.T @ Vi @ X, X.T @ Vi @ y)
    r = y - X @ beta
    sigma2 = max(float(r @ Vi @ r) / n, 1e-12)
    sign, logdet = np.linalg.slogdet(V)
    return -0.5 * (n * (math.log(2 * math.pi) + math.log(sigma2))
                   + logdet + float(r @ Vi @ r) / sigma2)


def simulate_dataset(rng, n_groups=6, per_group=8, beta=(1.0, 0.5),
                     sigma_b=0.7, sigma_e=0.4):
    rows = []
    for g in range(n_groups):
        b = rng.normal(0, sigma_b)
        for _ in range(per_group):
            x = rng.uniform(-1, 1)
            y = beta[0] + beta[1] * x + b + rng.normal(0, sigma_e)
            rows.append({"ID": f"g{g}", "x": float(x), "y": float(y)})
    return rows


SLOPE_SPEC = ModelSpec.build(mains("x"), name="slope")


class TestTransforms:
    def test_likert_extremes(self):
        assert normalize_likert([1, 1, 1]) == 0.0
        assert normalize_likert([7, 7]) == 1.0
        assert normalize_likert([4, 4, 4, 4]) == 0.5

    def test_likert_range_check(self):
        with pytest.raises(InvalidInputError):
            normalize_likert([0, 4])
        with pytest.raises(InvalidInputError):
            normalize_likert([8])

    def test_loc_endpoints(self):
        assert loc_transform(0) == -1.0
        assert loc_transform(23) == 1.0
        assert loc_transform(11.5) == pytest.approx(0.0)
        assert loc_transform(18) == pytest.approx(0.565217, abs=1e-6)

    def test_loc_range(self):
        with pytest.raises(InvalidInputError):
            loc_transform(24)


class TestHolm:
    def test_worked_example(self):
        assert holm_adjust([0.01, 0.04, 0.03, 0.005]) == \
            pytest.approx([0.03, 0.06, 0.06, 0.02])

    def test_single(self):
        assert holm_adjust([0.5]) == [0.5]

    def test_carry(self):
        assert holm_adjust([0.02, 0.02]) == pytest.approx([0.04, 0.04])

    def test_cap_at_one(self):
        assert holm_adjust([0.4, 0.4, 0.4]) == [1.0, 1.0, 1.0]

    def test_range_check(self):
        with pytest.raises(InvalidInputError):
            holm_adjust([1.2])

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
    def test_properties(self, ps):
        adjusted = holm_adjust(ps)
        assert all(a >= p - 1e-15 for a, p in zip(adjusted, ps))
        assert all(0 <= a <= 1 for a in adjusted)
        order = sorted(range(len(ps)), key=lambda i: ps[i])
        ranked = [adjusted[i] for i in order]
        assert all(b >= a for a, b in zip(ranked, ranked[1:]))

    def test_idempotent_at_one(self):
        assert holm_adjust([1.0, 1.0]) == [1.0, 1.0]


class TestFitBasics:
    def test_toy_intercept_model(self):
        rows = [{"ID": p, "y": v} for p in "abc" for v in (1.0, 2.0)]
        fit = fit_lmm(ModelSpec.build([], name="intercept"), rows)
        assert fit.beta[0] == pytest.approx(1.5)
        assert fit.lambda_ratio == 0.0
        assert fit.sigma_e2 == pytest.approx(0.25)

    def test_matches_ols_when_no_group_variance(self):
        rows = [{"ID": p, "y": v} for p in "abc" for v in (1.0, 2.0)]
        fit = fit_lmm(ModelSpec.build([], name="intercept"), rows)
        n = 6
        ols = -n / 2 * (math.log(2 * math.pi) + math.log(0.25) + 1)
        assert fit.loglik == pytest.approx(ols, abs=1e-8)

    def test_aic_bic_identities(self):
        rng = np.random.default_rng(0)
        fit = fit_lmm(SLOPE_SPEC, simulate_dataset(rng))
        assert fit.aic == pytest.approx(2 * fit.n_params - 2 * fit.loglik, abs=1e-12)
        assert fit.bic == pytest.approx(
            fit.n_params * math.log(fit.n_obs) - 2 * fit.loglik, abs=1e-12)
        assert fit.n_params == len(fit.beta) + 2

    def test_degenerate_constant_response(self):
        rows = [{"ID": p, "y": 3.0} for p in "ab" for _ in range(4)]
        with pytest.warns(UserWarning):
            fit = fit_lmm(ModelSpec.build([], name="intercept"), rows)
        assert fit.sigma_e2 == 1e-12
        assert fit.degenerate

    def test_needs_two_groups(self):
        rows = [{"ID": "a", "y": float(i)} for i in range(5)]
        with pytest.raises(InvalidInputError):
            fit_lmm(ModelSpec.build([], name="i"), rows)

    def test_singleton_group_allowed(self):
        rng = np.random.default_rng(1)
        rows = simulate_dataset(rng) + [{"ID": "solo", "x": 0.2, "y": 1.3}]
        fit = fit_lmm(SLOPE_SPEC, rows)
        assert fit.n_groups == 7

    def test_rank_deficiency_names_columns(self):
        rng = np.random.default_rng(2)
        rows = simulate_dataset(rng)
        for row in rows:
            row["x2"] = 2.0 * row["x"]
        spec = ModelSpec.build(mains("x", "x2"), name="aliased")
        with pytest.raises(ModelSpecError, match="x2"):
            fit_lmm(spec, rows)


class TestGridOracle:
    def test_profiled_beats_dense_grid(self):
        # brute-force oracle over lambda on a dense grid, vs the optimizer
        for seed in range(6):
            rng = np.random.default_rng(seed)
            rows = simulate_dataset(rng, n_groups=5, per_group=6)
            fit = fit_lmm(SLOPE_SPEC, rows)
            X, _ = build_design(SLOPE_SPEC, rows)
            y = np.array([r["y"] for r in rows])
            groups = [r["ID"] for r in rows]
            lam_grid = np.linspace(0.0, 50.0, 2000)
            best = max(grid_loglik(X, y, groups, lam) for lam in lam_grid)
            assert fit.loglik >= best - 1e-8

    def test_huge_variance_ratio(self):
        # sigma_b >> sigma_e pushes lambda to ~1e4; the optimizer must
        # follow it and clearly beat the no-intercept solution
        rng = np.random.default_rng(21)
        rows = simulate_dataset(rng, n_groups=8, per_group=6,
                                sigma_b=10.0, sigma_e=0.1)
        fit = fit_lmm(SLOPE_SPEC, rows)
        assert fit.lambda_ratio > 1e3
        X, _ = build_design(SLOPE_SPEC, rows)
        y = np.array([r["y"] for r in rows])
        ols = grid_loglik(X, y, [r["ID"] for r in rows], 0.0)
        assert fit.loglik > ols + 10
        assert fit.sigma_b2 == pytest.approx(100.0, rel=0.8)

    def test_lambda_zero_reduction(self):
        rng = np.random.default_rng(11)
        rows = simulate_dataset(rng, sigma_b=0.0, n_groups=8, per_group=10)
        fit = fit_lmm(SLOPE_SPEC, rows)
        X, _ = build_design(SLOPE_SPEC, rows)
        y = np.array([r["y"] for r in rows])
        ols = grid_loglik(X, y, [r["ID"] for r in rows], 0.0)
        assert fit.loglik >= ols - 1e-8


class TestExternalOracle:
    def test_matches_statsmodels_ml(self):
        # independent reference implementation of the same model
        import warnings
        import statsmodels.api as sm

        for seed in (42, 7, 123):
            rng = np.random.default_rng(seed)
            rows = simulate_dataset(rng, n_groups=12, per_group=9,
                                    beta=(2.0, -0.7), sigma_b=0.8, sigma_e=0.5)
            fit = fit_lmm(SLOPE_SPEC, rows)
            y = np.array([r["y"] for r in rows])
            X = np.column_stack([np.ones(len(rows)), [r["x"] for r in rows]])
            labels = np.array([r["ID"] for r in rows])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                reference = sm.MixedLM(y, X, groups=labels).fit(reml=False)
            assert np.abs(fit.beta - np.asarray(reference.fe_params)).max() < 1e-6
            assert abs(fit.loglik - reference.llf) < 1e-8
            assert fit.sigma_e2 == pytest.approx(reference.scale, rel=1e-4)
            assert fit.sigma_b2 == pytest.approx(
                float(np.asarray(reference.cov_re)[0, 0]), rel=1e-2, abs=1e-4)
            assert np.abs(fit.se - np.asarray(reference.bse_fe)).max() < 1e-3


class TestParameterRecovery:
    def test_recovers_known_coefficients(self):
        rng = np.random.default_rng(2024)
        beta_true = (2.0, -0.8)
        rows = simulate_dataset(rng, n_groups=30, per_group=28,
                                beta=beta_true, sigma_b=0.6, sigma_e=0.5)
        fit = fit_lmm(SLOPE_SPEC, rows)
        for estimate, truth, se in zip(fit.beta, beta_true, fit.se):
            assert abs(estimate - truth) < 3 * se
        assert fit.sigma_b2 == pytest.approx(0.36, abs=0.2)
        assert fit.sigma_e2 == pytest.approx(0.25, abs=0.05)


class TestCompare:
    def test_identities(self):
        # AIC for logLik -100, k=5; BIC for logLik -50, k=3, n=100
        assert 2 * 5 - 2 * (-100) == 210
        assert 3 * math.log(100) - 2 * (-50) == pytest.approx(113.8155, abs=1e-4)

    def test_ranking_and_deltas(self):
        rng = np.random.default_rng(5)
        rows = simulate_dataset(rng)
        fit1 = fit_lmm(ModelSpec.build([], name="null"), rows)
        fit2 = fit_lmm(SLOPE_SPEC, rows)
        table = compare_models([fit1, fit2])
        assert table[0]["deltaAic"] == 0.0
        assert [row["aic"] for row in table] == sorted(row["aic"] for row in table)

    def test_mismatched_data_rejected(self):
        rng = np.random.default_rng(6)
        fit1 = fit_lmm(SLOPE_SPEC, simulate_dataset(rng))
        fit2 = fit_lmm(SLOPE_SPEC, simulate_dataset(rng))
        with pytest.raises(InvalidComparisonError):
            compare_models([fit1, fit2])

    def test_tie_break_by_bic_then_params(self):
        from dataclasses import replace
        rng = np.random.default_rng(12)
        base = fit_lmm(SLOPE_SPEC, simulate_dataset(rng))
        # same AIC, lower BIC wins; same BIC too, fewer parameters win
        tied_bic = replace(base, spec=replace(base.spec, name="lower-bic"),
                           bic=base.bic - 1.0)
        tied_params = replace(base, spec=replace(base.spec, name="fewer-params"),
                              n_params=base.n_params - 1)
        table = compare_models([base, tied_bic])
        assert table[0]["model"] == "lower-bic"
        table = compare_models([base, tied_params])
        assert table[0]["model"] == "fewer-params"


class TestMarginal:
    def test_intercept_prediction(self):
        rows = [{"ID": p, "y": v} for p in "abc" for v in (1.0, 2.0)]
        fit = fit_lmm(ModelSpec.build([], name="intercept"), rows)
        out = marginal_prediction(fit, {})
        assert out["estimate"] == pytest.approx(1.5)
        assert out["ci"][0] < 1.5 < out["ci"][1]

    def test_self_contrast(self):
        rng = np.random.default_rng(7)
        fit = fit_lmm(SLOPE_SPEC, simulate_dataset(rng))
        out = contrast(fit, {"x": 0.5}, {"x": 0.5})
        assert out["difference"] == 0.0
        assert out["p"] == 1.0

    def test_unknown_level_rejected(self):
        rows = []
        rng = np.random.default_rng(8)
        for g in range(4):
            for stage in ("BL", "STR", "LTR"):
                for _ in range(4):
                    rows.append({"ID": f"g{g}", "Stage": stage,
                                 "y": float(rng.normal())})
        fit = fit_lmm(ModelSpec.build(mains("Stage"), name="stage"), rows)
        with pytest.raises(InvalidInputError):
            marginal_prediction(fit, {"Stage": "XXX"})

    def test_ci_width_against_simulation(self):
        # simulate responses from the fitted model and recompute the
        # fixed-lambda GLS estimate many times; the spread of the
        # simulated estimates must match the analytic CI width
        rng = np.random.default_rng(9)
        rows = simulate_dataset(rng, n_groups=3, per_group=4)
        fit = fit_lmm(SLOPE_SPEC, rows)
        X, _ = build_design(SLOPE_SPEC, rows)
        groups = [r["ID"] for r in rows]
        labels = {g: i for i, g in enumerate(dict.fromkeys(groups))}
        Z = np.zeros((len(rows), len(labels)))
        for i, g in enumerate(groups):
            Z[i, labels[g]] = 1.0
        lam = fit.lambda_ratio
        w = np.diag(1.0 / (1.0 + lam * Z.sum(axis=0)))
        Vi = np.linalg.inv(np.eye(len(rows)) + lam * Z @ Z.T)
        A = np.linalg.solve(X.T @ Vi @ X, X.T @ Vi)
        n_draws = 100_000
        sim_rng = np.random.default_rng(123)
        b = sim_rng.normal(0, math.sqrt(fit.sigma_b2), (len(labels), n_draws))
        e = sim_rng.normal(0, math.sqrt(fit.sigma_e2), (len(rows), n_draws))
        Y = (X @ fit.beta)[:, None] + Z @ b + e
        betas = A @ Y
        point = np.array([1.0, 0.5])  # intercept + x = 0.5
        sim_sd = float(np.std(point @ betas))
        analytic = marginal_prediction(fit, {"x": 0.5})
        width_sim = 2 * 1.959963984540054 * sim_sd
        width_analytic = analytic["ci"][1] - analytic["ci"][0]
        assert width_analytic == pytest.approx(width_sim, rel=0.05)


@pytest.fixture(scope="module")
def stage_rows():
    rng = np.random.default_rng(31)
    springs = ["LS", "GS", "AGS"]
    rows = []
    for p in range(12):
        cond = springs[p % 3]
        fs, ch, cu = rng.uniform(-0.5, 0.5, 3)
        for stage in ("BL", "STR", "LTR"):
            for tn in (0, 1):
                for sn in range(6):
                    for tt in (0, 1):
                        rows.append({
                            "ID": f"p{p}", "SpringType": cond, "Condition": cond,
                            "Stage": stage, "TransTask": tt, "TrialNumber": tn,
                            "ShotNumber": sn, "FS_c": fs, "CH_c": ch, "CU_c": cu,
                            "y": float(rng.normal())})
    return rows


@pytest.fixture(scope="module")
def training_rows():
    rng = np.random.default_rng(32)
    springs = ["LS", "GS", "AGS"]
    rows = []
    for p in range(12):
        cond = springs[p % 3]
        fs, ch = rng.uniform(-0.5, 0.5, 2)
        for tn in range(28):
            st_label = "LS" if tn in (4, 9, 13, 18, 22, 27) else cond
            for sn in range(4):
                rows.append({"ID": f"p{p}", "SpringType": st_label,
                             "TrialNumber": tn, "FS_c": fs, "CH_c": ch,
                             "y": float(rng.normal())})
    return rows


class TestCsvRoundTrip:
    def test_fit_from_exported_csv(self):
        from springcurl.protocol import GroupCondition
        from springcurl.runner import SessionConfig, run_session
        from springcurl.session_io import export_csv
        from springcurl.stats import rows_from_csv, training_model
        from springcurl.subjects import TraitProfile

        records = []
        traits = {}
        conditions = list(GroupCondition)
        for i in range(6):  # two per condition so trait interactions are estimable
            pid = f"p{i}"
            traits[pid] = TraitProfile(free_spirit=round(0.1 + 0.15 * i, 2))
            result = run_session(SessionConfig(pid, conditions[i % 3], 7, 100 + i))
            records.extend(result.records)
        text = export_csv(records, "training")
        rows = rows_from_csv(text, traits_by_id=traits)
        assert len(rows) == 6 * 112
        fs_mean = sum(r["FS_c"] for r in rows) / len(rows)
        assert abs(fs_mean) < 1e-10
        fit = fit_lmm(training_model(), rows, dependent="logAbsForceErr")
        assert fit.n_obs == 672
        assert np.isfinite(fit.loglik)


class TestModelFamilies:
    def test_column_counts(self, stage_rows, training_rows):
        # sizes of the four published coefficient tables
        assert build_design(training_model(), training_rows)[0].shape[1] == 12
        assert build_design(behavior_model(), training_rows)[0].shape[1] == 18
        assert build_design(learning_model(), stage_rows)[0].shape[1] == 32
        assert build_design(transfer_model(), stage_rows)[0].shape[1] == 24

    def test_families_fit(self, stage_rows, training_rows):
        for spec, rows in ((training_model(), training_rows),
                           (learning_model(), stage_rows),
                           (transfer_model(), stage_rows)):
            fit = fit_lmm(spec, rows)
            assert fit.n_obs == len(rows)
            assert np.isfinite(fit.loglik)
