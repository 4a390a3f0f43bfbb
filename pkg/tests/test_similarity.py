import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from src.bench.problems import SyntheticProblem
from src.baselines.optimizers import random_search
from src.similarity.densities import GaussianDensity, GMMDensity, UniformDensity, gmm_logpdf, prior_density
from src.similarity.divergence import gamma_similarity, gaussian_kl, kl_mc
from src.utils.errors import InsufficientDataError
from src.warmstart.promising import PromisingGMM


def _gmm(centers, alpha=0.1):
    return PromisingGMM(centers=np.asarray(centers, dtype=float), alpha=alpha)


def test_single_component_matches_normal_pdf():
    gmm = _gmm([[0.2, 0.7]], alpha=0.15)
    x = np.random.default_rng(0).random((50, 2))
    expected = multivariate_normal(mean=[0.2, 0.7], cov=0.15 ** 2 * np.eye(2)).logpdf(x)
    np.testing.assert_allclose(gmm_logpdf(gmm, x), expected, rtol=0, atol=1e-12)


def test_log_density_at_center():
    value = gmm_logpdf(_gmm([[0.5, 0.5]]), [0.5, 0.5])
    assert value == pytest.approx(math.log(1 / (2 * math.pi * 0.01)), abs=1e-12)
    assert value == pytest.approx(2.7672, abs=1e-4)


def test_symmetric_two_center_density():
    gmm = _gmm([[0.2, 0.2], [0.8, 0.8]])
    assert gmm_logpdf(gmm, [0.2, 0.2]) == pytest.approx(gmm_logpdf(gmm, [0.8, 0.8]), abs=1e-12)


def test_corner_centers_midpoint_density():
    gmm = _gmm([[0.0, 0.0], [1.0, 1.0]])
    pdf = lambda c: math.exp(-np.sum((np.array([0.5, 0.5]) - c) ** 2) / (2 * 0.01)) / (2 * math.pi * 0.01)
    expected = 0.5 * (pdf(np.zeros(2)) + pdf(np.ones(2)))
    assert math.exp(gmm_logpdf(gmm, [0.5, 0.5])) == pytest.approx(expected, rel=1e-9)


def test_identical_centers_collapse_to_single_gaussian():
    x = np.random.default_rng(1).random((20, 2))
    np.testing.assert_allclose(
        gmm_logpdf(_gmm([[0.4, 0.4], [0.4, 0.4]]), x), gmm_logpdf(_gmm([[0.4, 0.4]]), x), atol=1e-12
    )


def test_log_density_finite_inside_unit_cube():
    gmm = _gmm(np.random.default_rng(2).random((10, 3)), alpha=0.05)
    corners = np.array(np.meshgrid(*[[0.0, 1.0]] * 3)).reshape(3, -1).T
    assert np.all(np.isfinite(gmm_logpdf(gmm, corners)))


def test_uniform_density():
    density = UniformDensity(2)
    np.testing.assert_array_equal(density.log_prob([[0.5, 0.5], [1.5, 0.5]]), [0.0, -np.inf])


def test_prior_density_kinds():
    assert isinstance(prior_density("gaussian", 2), GaussianDensity)
    assert isinstance(prior_density("uniform", 2), UniformDensity)
    with pytest.raises(ValueError):
        prior_density("laplace", 2)


def test_kl_of_same_object_is_exactly_zero():
    density = GaussianDensity([0.5, 0.5], 0.04 * np.eye(2))
    assert kl_mc(density, density, n=1000) == (0.0, 0.0)


def test_gaussian_kl_closed_form():
    assert gaussian_kl([0, 0], 0.04 * np.eye(2), [0.1, 0], 0.04 * np.eye(2)) == pytest.approx(0.125)


def test_kl_mc_matches_analytic_gaussian_kl():
    p = GaussianDensity([0.0, 0.0], 0.04 * np.eye(2))
    q = GaussianDensity([0.1, 0.0], 0.04 * np.eye(2))
    estimate = kl_mc(p, q, n=1_000_000, seed=0)
    assert abs(estimate.estimate - 0.125) <= 3 * estimate.standard_error


def test_kl_mc_single_sample_has_zero_standard_error():
    p = GaussianDensity([0.0, 0.0], 0.04 * np.eye(2))
    q = GaussianDensity([0.1, 0.0], 0.04 * np.eye(2))
    estimate = kl_mc(p, q, n=1, seed=0)
    assert estimate.standard_error == 0.0
    assert math.isfinite(estimate.estimate)
    assert estimate.low_confidence
    assert not kl_mc(p, q, n=2, seed=0).low_confidence


def test_single_sample_similarity_is_low_confidence():
    archive = _random_archive(0.6, 100, 0)
    target = _random_archive(0.5, 100, 1)
    assert gamma_similarity(archive, target, n=1, seed=0).low_confidence
    assert not gamma_similarity(archive, target, n=100, seed=0).low_confidence


def test_kl_mc_standard_error_shrinks_with_square_root_of_n():
    p = GMMDensity(_gmm([[0.3, 0.3], [0.6, 0.5]]))
    q = GaussianDensity([0.5, 0.5], 0.04 * np.eye(2))
    small = kl_mc(p, q, n=1_000, seed=4)
    large = kl_mc(p, q, n=100_000, seed=4)
    assert 8 <= small.standard_error / large.standard_error <= 12.5


def test_kl_mc_is_independent_of_jobs():
    p = GMMDensity(_gmm([[0.3, 0.3], [0.6, 0.5]]))
    q = GaussianDensity([0.5, 0.5], 0.04 * np.eye(2))
    serial = kl_mc(p, q, n=50_000, seed=3, batch_size=4096, jobs=1)
    parallel = kl_mc(p, q, n=50_000, seed=3, batch_size=4096, jobs=4)
    assert serial == parallel


def test_kl_mc_rejects_non_finite_log_density():
    p = GaussianDensity([0.5, 0.5], 0.04 * np.eye(2))
    with pytest.raises(ValueError):
        kl_mc(p, UniformDensity(2), n=1000)


def _random_archive(b, n, seed):
    problem = SyntheticProblem("sphere", b)
    return random_search(problem.space, problem, n, seed=seed, run_id="source")


def test_identical_archives_give_non_negative_similarity():
    archive = _random_archive(0.6, 200, 0)
    estimate = gamma_similarity(archive, archive, n=20_000, seed=1)
    assert estimate.kl_source == 0.0
    assert estimate.s_hat == estimate.kl_prior - estimate.kl_source
    assert estimate.s_hat >= -3 * estimate.standard_error
    assert estimate.standard_error >= 0


def test_similarity_requires_enough_trials():
    small = _random_archive(0.6, 5, 0)
    large = _random_archive(0.6, 100, 1)
    with pytest.raises(InsufficientDataError):
        gamma_similarity(small, large, n=100)
    with pytest.raises(InsufficientDataError):
        gamma_similarity(large, small, n=100)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_closer_source_is_more_similar(seed):
    target = _random_archive(0.6, 1000, seed + 100)
    near = gamma_similarity(_random_archive(0.6, 1000, seed), target, n=100_000, seed=seed)
    far = gamma_similarity(_random_archive(0.8, 1000, seed), target, n=100_000, seed=seed)
    assert near.s_hat > far.s_hat
