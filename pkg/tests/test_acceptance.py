"""
재현 실험 수준의 검증. 수 초 ~ 수십 초가 걸리므로 slow 로 표시합니다.

    pytest -m slow
"""

import math

import numpy as np
import pytest

from src.baselines.optimizers import OptimizerKind, SourceMethod
from src.bench.problems import SyntheticProblem, monotone_wrap
from src.optimizer.ask_tell import run_optimizer
from src.optimizer.cmaes import CMAOptimizer, CmaConfig, Mode
from src.runner.experiment import run_experiment
from src.runner.experiment_config import ExperimentConfig
from src.runner.reports import similarity_report
from src.similarity.densities import GaussianDensity
from src.similarity.divergence import gaussian_kl, kl_mc
from src.warmstart.promising import PromisingGMM, fit_full

pytestmark = pytest.mark.slow

WS, CMA = "ws_cma@0.6", "cma"


def _protocol_config(tmp_path, **kwargs):
    defaults = dict(budget=50, reps=20, population_size=8, gamma=0.1, alpha=0.1, out=tmp_path)
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


def test_sphere_warm_start_beats_cma(tmp_path):
    ws_means, cma_means = [], []
    for seed in (0, 1000, 2000, 3000, 4000):
        summary = run_experiment(_protocol_config(tmp_path, offset_source=(0.6,), seed=seed), write=False)
        ws_means.append(summary.mean_best(WS))
        cma_means.append(summary.mean_best(CMA))
    assert np.mean(cma_means) / np.mean(ws_means) >= 3


def test_rotated_ellipsoid_warm_start_beats_cma(tmp_path):
    wins = 0
    for seed in (0, 1000, 2000):
        config = _protocol_config(tmp_path, problem="rotated_ellipsoid", offset_source=(0.6,), seed=seed)
        summary = run_experiment(config, write=False)
        wins += summary.mean_best(WS) < summary.mean_best(CMA)
    assert wins >= 2


def test_similarity_and_improvement_peak_at_matching_offset(tmp_path):
    offsets = (0.4, 0.5, 0.6, 0.7, 0.8)
    config = _protocol_config(tmp_path, offset_source=offsets, reps=100, mc_samples=100_000)
    frame = similarity_report(config).set_index("b_source")

    assert frame["improvement"].idxmax() == 0.6
    assert frame.loc[0.4, "improvement"] < 0
    assert frame.loc[0.8, "improvement"] < 0
    assert frame["s_hat"].idxmax() == 0.6


def test_naive_transfer_comparison(tmp_path):
    methods = (OptimizerKind.WS_CMA, OptimizerKind.REUSE_NORMAL, OptimizerKind.REUSE_GMM)
    near_ok, far_ok = 0, 0
    for seed in (0, 1000, 2000):
        config = _protocol_config(
            tmp_path, offset_source=(0.6, 0.8), methods=methods, seed=seed, source_method=SourceMethod.RANDOM
        )
        summary = run_experiment(config, write=False)
        near_ok += summary.mean_best("reuse_normal@0.6") <= summary.mean_best("ws_cma@0.6")
        ws_far = summary.mean_best("ws_cma@0.8")
        far_ok += ws_far < summary.mean_best("reuse_normal@0.8") and ws_far < summary.mean_best("reuse_gmm@0.8")
    assert near_ok >= 2
    assert far_ok >= 2


def _sampled_cross_entropy(first_moment, second_moment, mean, cov):
    """(1/n) Σ −log q(x_k), 표본 1·2차 모멘트만으로 계산"""
    d = mean.shape[0]
    scatter = second_moment - np.outer(first_moment, mean) - np.outer(mean, first_moment) + np.outer(mean, mean)
    _, logdet = np.linalg.slogdet(cov)
    return 0.5 * (d * math.log(2 * math.pi) + logdet + np.trace(np.linalg.solve(cov, scatter)))


def test_moment_matching_minimizes_sampled_kl():
    rng = np.random.default_rng(0)
    successes = 0
    for _ in range(50):
        d = int(rng.integers(1, 4))
        gmm = PromisingGMM(centers=rng.random((int(rng.integers(1, 11)), d)), alpha=rng.uniform(0.05, 0.25))
        index = rng.integers(gmm.n_components, size=200_000)
        samples = gmm.centers[index] + gmm.alpha * rng.standard_normal((200_000, d))
        first, second = samples.mean(axis=0), samples.T @ samples / samples.shape[0]

        init = fit_full(gmm)
        best = _sampled_cross_entropy(first, second, init.m_star, init.Sigma_star)

        perturbed = []
        for _ in range(1000):
            mean = init.m_star * (1 + 0.05 * rng.choice([-1.0, 1.0], size=d))
            factors = 1 + 0.05 * rng.choice([-1.0, 1.0], size=(d, d))
            factors = np.triu(factors) + np.triu(factors, 1).T
            cov = init.Sigma_star * factors
            if np.linalg.eigvalsh(cov).min() <= 0:
                continue
            perturbed.append(_sampled_cross_entropy(first, second, mean, cov))
        successes += best <= min(perturbed)
    assert successes >= 48


def test_kl_estimator_matches_analytic_gaussian_kl():
    rng = np.random.default_rng(1)
    inside = 0
    for trial in range(100):
        mean_p, mean_q = rng.random(2), rng.random(2)
        a, b = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
        cov_p, cov_q = 0.02 * (a @ a.T + np.eye(2)), 0.02 * (b @ b.T + np.eye(2))
        estimate = kl_mc(GaussianDensity(mean_p, cov_p), GaussianDensity(mean_q, cov_q), n=100_000, seed=trial)
        exact = gaussian_kl(mean_p, cov_p, mean_q, cov_q)
        inside += abs(estimate.estimate - exact) <= 4 * estimate.standard_error
    assert inside >= 95


def test_monotone_transform_leaves_trajectory_identical():
    problem = SyntheticProblem("rotated_ellipsoid", 0.5)
    wrapped = monotone_wrap(problem, math.exp)
    config = CmaConfig(seed=21)
    plain, transformed = CMAOptimizer.default(2, config), CMAOptimizer.default(2, config)
    for _ in range(6):
        x, y = plain.ask(), transformed.ask()
        np.testing.assert_array_equal(x, y)
        plain.tell([problem(xi) for xi in x])
        transformed.tell([wrapped(yi) for yi in y])
        np.testing.assert_array_equal(plain.state.mean, transformed.state.mean)
        np.testing.assert_array_equal(plain.state.C, transformed.state.C)
        assert plain.state.sigma == transformed.state.sigma


def test_cma_converges_on_sphere():
    problem = SyntheticProblem("sphere", 0.6)
    reached = 0
    for seed in range(20):
        log = run_optimizer(CMAOptimizer.default(2, CmaConfig(seed=seed)), problem, 2000, problem.space)
        reached += log.values().min() < 1e-10
    assert reached >= 18


def test_separable_mode_structure_over_long_run():
    problem = SyntheticProblem("rotated_ellipsoid", 0.6)
    optimizer = CMAOptimizer.default(2, CmaConfig(mode=Mode.SEPARABLE, seed=4))
    for _ in range(200):
        x = optimizer.ask()
        optimizer.tell([problem(xi) for xi in x])
        assert optimizer.state.C[0, 1] == 0.0 and optimizer.state.C[1, 0] == 0.0


# α 가 클수록 WS 와 CMA 평균의 차이가 작습니다.
_ROBUSTNESS_REPS = {"alpha": 2000, "gamma": 200}


@pytest.mark.parametrize("parameter", ["alpha", "gamma"])
@pytest.mark.parametrize("value", [0.05, 0.10, 0.15, 0.20, 0.25])
def test_warm_start_is_robust_to_alpha_and_gamma(tmp_path, parameter, value):
    config = _protocol_config(tmp_path, offset_source=(0.6,), reps=_ROBUSTNESS_REPS[parameter], **{parameter: value})
    summary = run_experiment(config, write=False)
    assert summary.mean_best(WS) <= summary.mean_best(CMA)
