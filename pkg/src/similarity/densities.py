# src/similarity/densities.py
"""
Densities

γ-similarity 계산과 고정 분포 샘플러(WS-only, ReuseGMM)가 공유하는 확률밀도 객체들입니다.
모두 log_prob(x) 와 sample(n, rng) 를 제공하며 R^d 전체에서 정의됩니다
(단위 큐브 밖 샘플을 걸러내는 것은 호출하는 쪽의 몫).
"""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from src.utils.config import Config
from src.utils.errors import InvalidDistributionError
from src.utils.logger import get_logger
from src.warmstart.promising import PromisingGMM

logger = get_logger(__name__)

LOG_2PI = math.log(2 * math.pi)


class Density(Protocol):
    dimension: int

    def log_prob(self, x: np.ndarray) -> np.ndarray: ...

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray: ...


def _as_points(x, dimension: int) -> np.ndarray:
    points = np.atleast_2d(np.asarray(x, dtype=float))
    if points.shape[1] != dimension:
        raise ValueError(f"차원 불일치: 기대 {dimension}, 입력 {points.shape[1]}")
    return points


class GaussianDensity:
    """다변량 정규분포 N(mean, cov). cov 가 1차원이면 대각 공분산으로 봅니다."""

    def __init__(self, mean, cov):
        self.mean = np.array(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        self.cov = np.diag(cov) if cov.ndim == 1 else cov.copy()
        self.dimension = int(self.mean.shape[0])
        if self.cov.shape != (self.dimension, self.dimension):
            raise ValueError(f"차원 불일치: mean d={self.dimension}, cov {self.cov.shape}")
        try:
            self._chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as e:
            raise InvalidDistributionError(f"공분산이 양의 정부호가 아닙니다: {e}") from e
        self._log_norm = -0.5 * self.dimension * LOG_2PI - float(np.sum(np.log(np.diag(self._chol))))

    def log_prob(self, x) -> np.ndarray:
        points = _as_points(x, self.dimension)
        whitened = solve_triangular(self._chol, (points - self.mean).T, lower=True)
        return self._log_norm - 0.5 * np.sum(whitened ** 2, axis=0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.dimension))
        return self.mean + z @ self._chol.T


class GMMDensity:
    """promising GMM (1/N_γ) Σ N(x | x_i, α²I) 의 밀도."""

    def __init__(self, gmm: PromisingGMM):
        self.gmm = gmm
        self.dimension = gmm.dimension
        self._log_component_norm = -0.5 * self.dimension * (LOG_2PI + 2 * math.log(gmm.alpha))
        self._log_weight = -math.log(gmm.n_components)

    def log_prob(self, x) -> np.ndarray:
        points = _as_points(x, self.dimension)
        diff = points[:, None, :] - self.gmm.centers[None, :, :]
        squared = np.sum(diff ** 2, axis=2)
        component = self._log_component_norm - squared / (2 * self.gmm.alpha ** 2)
        return logsumexp(component, axis=1) + self._log_weight

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # 성분이 하나뿐이면 성분 선택에 난수를 쓰지 않음
        if self.gmm.n_components > 1:
            index = rng.integers(self.gmm.n_components, size=n)
        else:
            index = np.zeros(n, dtype=int)
        z = rng.standard_normal((n, self.dimension))
        return self.gmm.centers[index] + self.gmm.alpha * z


class UniformDensity:
    """[0,1]^d 위의 균등분포."""

    def __init__(self, dimension: int):
        self.dimension = int(dimension)

    def log_prob(self, x) -> np.ndarray:
        points = _as_points(x, self.dimension)
        inside = np.all((points >= 0.0) & (points <= 1.0), axis=1)
        return np.where(inside, 0.0, -np.inf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.dimension))


def gmm_logpdf(gmm: PromisingGMM, x):
    """
    GMM 의 로그 밀도 (log-sum-exp 안정화).

    Example:
        >>> gmm = PromisingGMM(centers=np.array([[0.5, 0.5]]), alpha=0.1)
        >>> gmm_logpdf(gmm, [0.5, 0.5])  # log(1 / (2π·0.01)) ≈ 2.7672
    """
    result = GMMDensity(gmm).log_prob(x)
    if np.ndim(x) == 1:
        return float(result[0])
    return result


def prior_density(kind: str, dimension: int) -> Density:
    """
    비정보적 사전분포 P*.

    Args:
        kind: "gaussian" (CMA-ES 기본 초기분포 N(0.5, 0.2²)) 또는 "uniform"
    """
    if kind == "gaussian":
        return GaussianDensity(
            np.full(dimension, Config.INITIAL_MEAN),
            np.full(dimension, Config.INITIAL_SIGMA ** 2),
        )
    if kind == "uniform":
        return UniformDensity(dimension)
    raise ValueError(f"알 수 없는 prior 종류입니다: {kind} (gaussian / uniform)")
