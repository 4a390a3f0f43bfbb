import math

import numpy as np
import pytest
from scipy.optimize import minimize

from src.optimizer.cmaes import CmaConfig, Mode
from src.space.archive import Trial
from src.utils.errors import InsufficientDataError
from src.warmstart.promising import (
    PromisingGMM,
    build_gmm,
    fit_full,
    fit_separable,
    select_top_gamma,
    top_gamma_count,
    warm_start_init,
)


def _gmm(centers, alpha=0.1):
    return PromisingGMM(centers=np.asarray(centers, dtype=float), alpha=alpha)


def test_select_top_gamma_count(sphere_source):
    top = select_top_gamma(sphere_source, 0.1)
    assert len(top) == 10
    values = [trial.value for trial in top]
    assert values == sorted(values)
    assert values[-1] <= np.sort(sphere_source.values())[9]


def test_select_all_with_gamma_one(make_archive):
    rng = np.random.default_rng(0)
    archive = make_archive(rng.random((10, 2)), rng.random(10))
    top = select_top_gamma(archive, 1.0)
    assert len(top) == 10
    assert [t.value for t in top] == sorted(archive.values().tolist())


def test_select_fails_when_floor_is_zero(make_archive):
    archive = make_archive(np.full((5, 2), 0.5), np.arange(5.0))
    with pytest.raises(InsufficientDataError):
        select_top_gamma(archive, 0.1)


def test_top_gamma_count_floor_guard():
    assert top_gamma_count(100, 0.29) == 29
    with pytest.raises(ValueError):
        top_gamma_count(10, 0.0)


def test_build_gmm_single_trial():
    gmm = build_gmm([Trial((0.3, 0.4), 1.0)], alpha=0.1)
    assert gmm.n_components == 1
    np.testing.assert_array_equal(gmm.centers, [[0.3, 0.4]])
    np.testing.assert_array_equal(gmm.weights, [1.0])


def test_build_gmm_rejects_non_positive_alpha():
    with pytest.raises(ValueError):
        build_gmm([Trial((0.3, 0.4), 1.0)], alpha=0.0)


def test_fit_full_single_center():
    init = fit_full(_gmm([[0.3, 0.7]]))
    np.testing.assert_array_equal(init.m_star, [0.3, 0.7])
    np.testing.assert_allclose(init.Sigma_star, 0.01 * np.eye(2))


def test_fit_full_two_corners():
    init = fit_full(_gmm([[0.0, 0.0], [1.0, 1.0]]))
    np.testing.assert_allclose(init.m_star, [0.5, 0.5])
    np.testing.assert_allclose(init.Sigma_star, [[0.26, 0.25], [0.25, 0.26]])


def test_fit_separable_single_center_and_corners():
    np.testing.assert_allclose(fit_separable(_gmm([[0.3, 0.7]])).Sigma_star, [0.01, 0.01])
    np.testing.assert_allclose(fit_separable(_gmm([[0.0, 0.0], [1.0, 1.0]])).Sigma_star, [0.26, 0.26])


def test_separable_is_diagonal_of_full():
    rng = np.random.default_rng(1)
    for _ in range(20):
        gmm = _gmm(rng.random((rng.integers(1, 12), 3)), alpha=rng.uniform(0.05, 0.25))
        np.testing.assert_array_equal(np.diag(fit_full(gmm).Sigma_star), fit_separable(gmm).Sigma_star)


def test_spectrum_is_bounded_below_by_alpha_squared():
    rng = np.random.default_rng(2)
    for _ in range(20):
        alpha = rng.uniform(0.05, 0.25)
        gmm = _gmm(rng.random((10, 3)), alpha=alpha)
        sigma_star = fit_full(gmm).Sigma_star
        np.testing.assert_array_equal(sigma_star, sigma_star.T)
        assert np.linalg.eigvalsh(sigma_star).min() >= alpha ** 2 - 1e-12
        assert np.all(fit_separable(gmm).Sigma_star >= alpha ** 2)


def test_warm_start_init_pipeline(sphere_source):
    init = warm_start_init(sphere_source, gamma=0.1, alpha=0.1)
    assert init.mode is Mode.FULL
    # 상위 10개는 최적해 (0.6, 0.6) 근처
    np.testing.assert_allclose(init.m_star, [0.6, 0.6], atol=0.1)

    state = init.to_state(CmaConfig())
    np.testing.assert_allclose(state.covariance, init.Sigma_star, rtol=1e-10, atol=1e-15)
    assert np.linalg.det(state.C) == pytest.approx(1.0)


def test_warm_start_separable_state(sphere_source):
    init = warm_start_init(sphere_source, mode=Mode.SEPARABLE)
    state = init.to_state()
    assert state.C[0, 1] == 0.0
    np.testing.assert_allclose(np.diag(state.covariance), init.Sigma_star, rtol=1e-10)


def test_warm_start_is_translation_equivariant(make_archive):
    rng = np.random.default_rng(3)
    points = 0.2 + 0.3 * rng.random((40, 2))
    values = rng.random(40)
    shift = np.array([0.3, -0.1])

    base = warm_start_init(make_archive(points, values), gamma=0.25, alpha=0.1)
    moved = warm_start_init(make_archive(points + shift, values), gamma=0.25, alpha=0.1)
    np.testing.assert_allclose(moved.m_star, base.m_star + shift, rtol=0, atol=1e-12)
    np.testing.assert_allclose(moved.Sigma_star, base.Sigma_star, rtol=0, atol=1e-12)


def _gaussian_cross_entropy(params, first_moment, second_moment, dimension):
    """−E_p[log q], q = N(m, LLᵀ). L 의 대각은 log 로 매개화"""
    mean = params[:dimension]
    lower = np.zeros((dimension, dimension))
    lower[np.tril_indices(dimension)] = params[dimension:]
    lower[np.diag_indices(dimension)] = np.exp(np.diag(lower))
    cov = lower @ lower.T
    scatter = second_moment - np.outer(first_moment, mean) - np.outer(mean, first_moment) + np.outer(mean, mean)
    log_det = 2 * float(np.sum(np.log(np.diag(lower))))
    return 0.5 * (dimension * math.log(2 * math.pi) + log_det + np.trace(np.linalg.solve(cov, scatter)))


def test_closed_form_matches_numerical_kl_minimizer():
    dimension = 3
    gmm = _gmm(np.random.default_rng(4).random((10, dimension)), alpha=0.1)
    # GMM 의 1·2차 모멘트
    first = gmm.centers.mean(axis=0)
    second = gmm.alpha ** 2 * np.eye(dimension) + gmm.centers.T @ gmm.centers / gmm.n_components

    start = np.zeros(dimension + dimension * (dimension + 1) // 2)
    start[:dimension] = 0.5
    diagonal = [i * (i + 1) // 2 + i for i in range(dimension)]
    start[dimension + np.array(diagonal)] = math.log(0.3)
    result = minimize(
        _gaussian_cross_entropy,
        start,
        args=(first, second, dimension),
        method="BFGS",
        options={"gtol": 1e-10, "maxiter": 10_000},
    )

    mean = result.x[:dimension]
    lower = np.zeros((dimension, dimension))
    lower[np.tril_indices(dimension)] = result.x[dimension:]
    lower[np.diag_indices(dimension)] = np.exp(np.diag(lower))
    cov = lower @ lower.T

    init = fit_full(gmm)
    assert np.linalg.norm(mean - init.m_star) <= 0.02 * np.linalg.norm(init.m_star)
    assert np.linalg.norm(cov - init.Sigma_star) <= 0.02 * np.linalg.norm(init.Sigma_star)
