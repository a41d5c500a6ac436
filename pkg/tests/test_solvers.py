import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.linear_model import ElasticNet, Lasso, LassoCV, Ridge

from arlasso.exceptions import DegenerateSignalError, PreconditionError
from arlasso.solvers import (
    CvSpec,
    SelectionResult,
    adaptive_lasso,
    cv_lasso,
    default_ridge_grid,
    elastic_net_cv,
    enet_cd,
    enet_path,
    kfold_indices,
    lambda_grid,
    lambda_max,
    lasso_cd,
    objective,
    ols,
    ridge,
    ridge_cv,
    soft_threshold,
)


def standardized(rng, n, p):
    X = rng.standard_normal((n, p))
    return (X - X.mean(0)) / X.std(0)


def orthonormal_design(rng, n, p):
    # columns orthogonal, centered, with X'X = n I
    A = rng.standard_normal((n, p))
    A -= A.mean(0)
    Q, _ = np.linalg.qr(A)
    return Q * np.sqrt(n)


def kkt_residual(X, y, coef, intercept, lam, l1_ratio=1.0):
    n = len(y)
    g = X.T @ (y - X @ coef - intercept) / n - lam * (1 - l1_ratio) * coef
    on = coef != 0
    v = np.where(on, np.abs(g - lam * l1_ratio * np.sign(coef)), np.abs(g) - lam * l1_ratio)
    return float(v.max())


@pytest.mark.parametrize("z,t,out", [(2, 1, 1), (0.5, 1, 0), (-3, 1, -2)])
def test_soft_threshold_examples(z, t, out):
    assert soft_threshold(z, t) == out


def test_soft_threshold_rejects_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_lambda_above_max_gives_empty_support():
    rng = np.random.default_rng(0)
    X = standardized(rng, 100, 8)
    y = X[:, 0] * 2 + rng.standard_normal(100)
    lmax = np.max(np.abs(X.T @ (y - y.mean()))) / 100
    assert lambda_max(X, y) == pytest.approx(lmax)
    assert lasso_cd(X, y, lmax).n_selected == 0
    assert lasso_cd(X, y, lmax * 1.01).n_selected == 0
    assert lasso_cd(X, y, lmax * 0.99).n_selected >= 1


def test_single_feature_ols_limit():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(50)
    x = ((x - x.mean()) / x.std())[:, None]
    res = lasso_cd(x, 2 * x[:, 0], 0.0, tol=1e-10)
    assert res.coefficients[0] == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_orthonormal_design_matches_soft_threshold(seed):
    rng = np.random.default_rng(seed)
    n, p = 200, 20
    X = orthonormal_design(rng, n, p)
    y = X @ rng.normal(0, 1, p) + rng.standard_normal(n)
    lam = rng.uniform(0.05, 1.0)
    res = lasso_cd(X, y, lam, tol=1e-10)
    z = X.T @ (y - y.mean()) / n
    expected = np.sign(z) * np.maximum(np.abs(z) - lam, 0)
    np.testing.assert_allclose(res.coefficients, expected, atol=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_lasso_matches_sklearn(seed):
    rng = np.random.default_rng(seed)
    X = standardized(rng, 120, 30)
    y = X[:, :4] @ np.array([3.0, -2, 1, 0.5]) + rng.standard_normal(120)
    lam = 0.08
    ours = lasso_cd(X, y, lam, tol=1e-10, max_iter=100_000)
    ref = Lasso(alpha=lam, tol=1e-12, max_iter=100_000).fit(X, y)
    np.testing.assert_allclose(ours.coefficients, ref.coef_, atol=1e-7)
    assert ours.intercept == pytest.approx(ref.intercept_, abs=1e-7)


def test_enet_matches_sklearn():
    rng = np.random.default_rng(3)
    X = standardized(rng, 150, 25)
    y = X[:, :3] @ np.array([2.0, 1, -1]) + rng.standard_normal(150)
    ours = enet_cd(X, y, 0.1, 0.5, tol=1e-10, max_iter=100_000)
    ref = ElasticNet(alpha=0.1, l1_ratio=0.5, tol=1e-12, max_iter=100_000).fit(X, y)
    np.testing.assert_allclose(ours.coefficients, ref.coef_, atol=1e-7)


def test_enet_ratio_one_is_lasso():
    rng = np.random.default_rng(4)
    X = standardized(rng, 80, 10)
    y = X[:, 0] - X[:, 3] + rng.standard_normal(80)
    a = enet_cd(X, y, 0.05, 1.0)
    b = lasso_cd(X, y, 0.05)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_enet_above_scaled_lambda_max_is_empty():
    rng = np.random.default_rng(5)
    X = standardized(rng, 80, 10)
    y = X[:, 0] + rng.standard_normal(80)
    r = 0.5
    lmax = lambda_max(X, y) / r
    assert lambda_max(X, y, r) == pytest.approx(lmax)
    assert enet_cd(X, y, lmax, r).n_selected == 0


def test_enet_grouping_effect_on_duplicate_pair():
    rng = np.random.default_rng(6)
    n = 200
    x = rng.standard_normal(n)
    X = np.column_stack([x, x, rng.standard_normal((n, 4))])
    X = (X - X.mean(0)) / X.std(0)
    y = 3 * X[:, 0] + rng.standard_normal(n)
    res = enet_cd(X, y, 0.1, 0.5, tol=1e-10, max_iter=100_000)
    assert {0, 1} <= set(res.support.tolist())
    assert abs(res.coefficients[0] - res.coefficients[1]) < 1e-4


def test_nonfinite_input_raises():
    X = np.ones((5, 2))
    X[0, 0] = np.nan
    with pytest.raises(ValueError):
        lasso_cd(X, np.arange(5.0), 0.1)
    with pytest.raises(ValueError):
        lasso_cd(np.eye(5)[:, :2], np.array([1, 2, np.inf, 4, 5.0]), 0.1)


def test_bad_arguments_raise():
    X = np.eye(4)
    with pytest.raises(PreconditionError):
        lasso_cd(X, np.arange(4.0), -1)
    with pytest.raises(PreconditionError):
        lasso_cd(X, np.arange(4.0), 0.1, tol=0)


def test_nonconvergence_flags_and_warns():
    rng = np.random.default_rng(7)
    X = standardized(rng, 60, 40)
    y = X[:, :5].sum(1) + rng.standard_normal(60)
    with pytest.warns(RuntimeWarning, match="did not converge"):
        res = lasso_cd(X, y, 1e-4, tol=1e-12, max_iter=2)
    assert not res.converged
    assert res.n_iter == 2


@pytest.mark.parametrize("l1_ratio", [1.0, 0.5])
def test_objective_non_increasing_per_sweep(l1_ratio):
    rng = np.random.default_rng(8)
    X = standardized(rng, 80, 30)
    y = X[:, :6] @ rng.uniform(1, 3, 6) + rng.standard_normal(80)
    lam = 0.05
    values = [objective(X, y, np.zeros(30), y.mean(), lam, l1_ratio)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for k in range(1, 25):
            r = enet_cd(X, y, lam, l1_ratio, tol=1e-12, max_iter=k)
            values.append(objective(X, y, r.coefficients, r.intercept, lam, l1_ratio))
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("seed", range(3))
def test_kkt_at_convergence(seed):
    rng = np.random.default_rng(seed)
    X = standardized(rng, 100, 50)
    y = X[:, :5] @ rng.uniform(1, 4, 5) + rng.standard_normal(100)
    tol = 0.005
    for lam in lambda_grid(X, y, 20):
        res = lasso_cd(X, y, lam, tol=tol)
        assert res.converged
        assert kkt_residual(X, y, res.coefficients, res.intercept, lam) < 10 * tol


def test_support_matches_nonzero_coefficients():
    rng = np.random.default_rng(9)
    X = standardized(rng, 100, 20)
    y = X[:, 0] * 2 + rng.standard_normal(100)
    res = lasso_cd(X, y, 0.1)
    np.testing.assert_array_equal(res.support, np.flatnonzero(res.coefficients))
    assert res.lam >= 0


def test_selection_result_to_dict_round_numbers():
    res = SelectionResult.from_coef(np.array([0.0, 1.5, 0.0, -2.0]), 0.5, 0.1, "lasso")
    d = res.to_dict()
    assert d["support"] == [1, 3]
    assert d["method"] == "lasso"


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_permuting_features_permutes_coefficients(seed):
    rng = np.random.default_rng(seed)
    X = standardized(rng, 60, 8)
    y = X @ rng.normal(0, 2, 8) + rng.standard_normal(60)
    perm = rng.permutation(8)
    a = lasso_cd(X, y, 0.1, tol=1e-10, max_iter=10_000)
    b = lasso_cd(X[:, perm], y, 0.1, tol=1e-10, max_iter=10_000)
    np.testing.assert_allclose(b.coefficients, a.coefficients[perm], atol=1e-7)


def test_lambda_grid_log_spacing():
    # two features, lambda_max = 1 by construction
    x = np.array([1.0, -1, 1, -1])
    X = np.column_stack([x, np.array([1.0, 1, -1, -1])])
    y = x.copy()
    assert lambda_max(X, y) == pytest.approx(1.0)
    np.testing.assert_allclose(lambda_grid(X, y, 3, 0.01), [1, 0.1, 0.01])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n_points=st.integers(2, 50), ratio=st.floats(1e-4, 0.9))
def test_lambda_grid_strictly_decreasing_and_first_point_kills(seed, n_points, ratio):
    rng = np.random.default_rng(seed)
    X = standardized(rng, 30, 5)
    y = rng.standard_normal(30)
    g = lambda_grid(X, y, n_points, ratio)
    assert len(g) == n_points
    assert np.all(np.diff(g) < 0)
    assert lasso_cd(X, y, g[0]).n_selected == 0


def test_lambda_grid_constant_response_raises():
    with pytest.raises(DegenerateSignalError):
        lambda_grid(np.eye(4), np.ones(4))


def test_cv_spec_validation():
    with pytest.raises(ValueError):
        CvSpec(folds=1)
    with pytest.raises(ValueError):
        CvSpec(grid=np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        CvSpec(grid=np.array([0.2, -0.1]))


def test_cv_folds_precondition():
    rng = np.random.default_rng(10)
    X = standardized(rng, 4, 2)
    y = np.array([1.0, 2.0, 0.5, 3.0])
    cv_lasso(X, y, CvSpec(folds=2))
    with pytest.raises(PreconditionError):
        cv_lasso(X, y, CvSpec(folds=5))
    with pytest.raises(PreconditionError):
        kfold_indices(4, 5, 0)


def test_cv_lasso_noiseless_recovers_support():
    rng = np.random.default_rng(11)
    X = standardized(rng, 200, 10)
    beta = np.array([3.0, 2] + [0] * 8)
    res = cv_lasso(X, X @ beta)
    assert {0, 1} <= set(res.support.tolist())


def test_cv_lasso_pure_noise_is_sparse():
    sizes = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = standardized(rng, 100, 20)
        sizes.append(cv_lasso(X, rng.standard_normal(100), CvSpec(seed=seed)).n_selected)
    assert np.median(sizes) <= 2


def test_cv_lasso_matches_sklearn_choice_on_shared_folds():
    rng = np.random.default_rng(12)
    X = standardized(rng, 150, 30)
    y = X[:, :5] @ np.array([2.0, -1, 1, 0.5, 3]) + 2 * rng.standard_normal(150)
    cv = CvSpec(folds=5, seed=3)
    ours = cv_lasso(X, y, cv, tol=1e-8, max_iter=100_000)
    splits = [(np.setdiff1d(np.arange(150), t), t) for t in kfold_indices(150, 5, 3)]
    ref = LassoCV(alphas=ours.info["grid"], cv=splits, tol=1e-10, max_iter=100_000).fit(X, y)
    assert ours.lam == pytest.approx(ref.alpha_, rel=1e-9)


def test_cv_lasso_deterministic():
    rng = np.random.default_rng(13)
    X = standardized(rng, 90, 15)
    y = X[:, 0] + rng.standard_normal(90)
    a = cv_lasso(X, y, CvSpec(seed=5))
    b = cv_lasso(X, y, CvSpec(seed=5))
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_cv_tie_prefers_larger_lambda():
    # pure noise with constant-prediction ties: flat MSE at the top of the grid
    rng = np.random.default_rng(14)
    X = standardized(rng, 40, 3)
    y = rng.standard_normal(40)
    grid = np.array([100.0, 50.0, 10.0])  # all above lambda_max -> identical fits
    res = cv_lasso(X, y, CvSpec(folds=4, grid=grid))
    assert res.lam == 100.0


def test_cv_skips_fold_with_constant_training_response():
    X = np.linspace(-1, 1, 6)[:, None]
    X = (X - X.mean()) / X.std()
    y = np.array([0.0, 0, 0, 0, 1, 1])
    cv = CvSpec(folds=3, seed=0)
    folds = kfold_indices(6, 3, 0)
    constant = [k for k, t in enumerate(folds) if np.ptp(np.delete(y, t)) == 0]
    if constant:
        with pytest.warns(RuntimeWarning, match="skipped"):
            cv_lasso(X, y, cv)
    else:
        cv_lasso(X, y, cv)


def test_elastic_net_cv_runs_and_records_ratio():
    rng = np.random.default_rng(15)
    X = standardized(rng, 100, 20)
    y = X[:, :3].sum(1) + rng.standard_normal(100)
    res = elastic_net_cv(X, y)
    assert res.info["l1_ratio"] in (0.1, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0)
    assert {0, 1, 2} <= set(res.support.tolist())
    with pytest.raises(PreconditionError):
        elastic_net_cv(X, y, l1_ratios=[0.0])


def test_enet_path_warm_start_matches_single_fits():
    rng = np.random.default_rng(16)
    X = standardized(rng, 80, 12)
    y = X[:, :2].sum(1) + rng.standard_normal(80)
    lams = lambda_grid(X, y, 5)
    coefs, _, ok = enet_path(X, y, lams, 1.0, 1e-10, 100_000)
    assert ok.all()
    for k, lam in enumerate(lams):
        np.testing.assert_allclose(coefs[k], lasso_cd(X, y, lam, 1e-10, 100_000).coefficients, atol=1e-7)


def test_ridge_identity_design_closed_form():
    rng = np.random.default_rng(17)
    n, p = 100, 6
    X = orthonormal_design(rng, n, p)
    y = rng.standard_normal(n)
    for alpha in (0.01, 1.0, 10.0):
        b = ridge(X, y, alpha).coefficients
        np.testing.assert_allclose(b, X.T @ (y - y.mean()) / (n * (1 + alpha)), atol=1e-8)


def test_ridge_matches_sklearn_scaled_alpha():
    rng = np.random.default_rng(18)
    X = standardized(rng, 70, 10)
    y = rng.standard_normal(70)
    ours = ridge(X, y, 0.3)
    ref = Ridge(alpha=0.3 * 70).fit(X, y)
    np.testing.assert_allclose(ours.coefficients, ref.coef_, atol=1e-10)


def test_ridge_norm_shrinks_monotonically():
    rng = np.random.default_rng(19)
    X = standardized(rng, 50, 8)
    y = X[:, 0] + rng.standard_normal(50)
    norms = [np.linalg.norm(ridge(X, y, a).coefficients) for a in np.logspace(-3, 6, 20)]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-5


def test_ridge_rejects_nonpositive_alpha():
    with pytest.raises(PreconditionError):
        ridge(np.eye(3), np.arange(3.0), 0.0)
    with pytest.raises(PreconditionError):
        ridge_cv(np.eye(3), np.arange(3.0), grid=[1.0, 0.0], folds=3)


def test_default_ridge_grid():
    g = default_ridge_grid()
    assert len(g) == 100
    assert g[0] == pytest.approx(1e-5)
    assert g[-1] == pytest.approx(1e5)


def test_ridge_cv_picks_an_alpha_from_the_grid():
    rng = np.random.default_rng(20)
    X = standardized(rng, 80, 10)
    y = X[:, 0] + rng.standard_normal(80)
    fit = ridge_cv(X, y, seed=1)
    assert fit.alpha in default_ridge_grid()


def test_adaptive_lasso_equal_ridge_coefficients_reduce_to_lasso():
    rng = np.random.default_rng(21)
    X = standardized(rng, 100, 15)
    y = X[:, :3].sum(1) + rng.standard_normal(100)
    # uniform weights c rescale the problem: lasso at lam with X*c  ==  lasso at lam/c on X
    c = 2.0
    ada = adaptive_lasso(X, y, lam=0.1, ridge_coef=np.full(15, c), tol=1e-10, max_iter=100_000)
    plain = lasso_cd(X, y, 0.1 / (c + 1e-10), tol=1e-10, max_iter=100_000)
    np.testing.assert_array_equal(ada.support, plain.support)
    np.testing.assert_allclose(ada.coefficients, plain.coefficients, atol=1e-6)


def test_adaptive_lasso_zero_ridge_coefficient_never_selected():
    rng = np.random.default_rng(22)
    X = standardized(rng, 100, 5)
    y = 5 * X[:, 0] + X[:, 1] + rng.standard_normal(100)
    w = np.array([0.0, 1.0, 1.0, 1.0, 1.0])
    res = adaptive_lasso(X, y, lam=0.01, ridge_coef=w)
    assert 0 not in res.support
    assert res.info["weights"][0] == pytest.approx(1e10)


def test_adaptive_lasso_recovers_support_more_often_than_cv_lasso():
    exact_ada = exact_cv = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        # n < p so the plain Lasso can pick up spurious columns
        X = standardized(rng, 60, 100)
        beta = np.zeros(100)
        beta[:4] = [3.0, -2.0, 1.5, 2.0]
        y = X @ beta
        cv = CvSpec(seed=seed)
        exact_ada += set(adaptive_lasso(X, y, cv).support.tolist()) == {0, 1, 2, 3}
        exact_cv += set(cv_lasso(X, y, cv).support.tolist()) == {0, 1, 2, 3}
    assert exact_ada > exact_cv


def test_ols_full_and_subset():
    rng = np.random.default_rng(23)
    X = rng.standard_normal((50, 4))
    y = X @ np.array([1.0, 0, -2, 0]) + 3
    coef, icpt = ols(X, y, [0, 2])
    np.testing.assert_allclose(coef, [1, 0, -2, 0], atol=1e-10)
    assert icpt == pytest.approx(3)
    coef, icpt = ols(X, y, [])
    assert not coef.any() and icpt == pytest.approx(y.mean())


def test_ols_rank_deficient_warns_min_norm():
    x = np.arange(10.0)
    X = np.column_stack([x, x])
    with pytest.warns(RuntimeWarning, match="rank-deficient"):
        coef, _ = ols(X, 2 * x)
    np.testing.assert_allclose(coef, [1, 1], atol=1e-10)
