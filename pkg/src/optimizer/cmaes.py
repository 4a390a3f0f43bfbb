# src/optimizer/cmaes.py
"""
CMA-ES

표준 CMA-ES (양수 재조합 가중치만 사용, rank-one + rank-μ 공분산 업데이트, CSA 스텝 사이즈)와
대각 공분산만 학습하는 separable 모드를 제공합니다.

다변량 정규분포는 Σ = σ²·C 로 분해해서 다룹니다. σ 는 스케일, C 는 모양을 담당합니다.
모든 후보는 단위 큐브 [0,1]^d 에서 생성되며, 박스 밖 후보는 재샘플링 후 clamp 합니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from src.utils.config import Config
from src.utils.errors import DistributionCollapseError, InvalidDistributionError
from src.utils.logger import get_logger

logger = get_logger(__name__)

SYMMETRY_TOLERANCE = 1e-12


class Mode(str, Enum):
    FULL = "full"
    SEPARABLE = "separable"


def separable_rate_factor(dimension: int) -> float:
    """
    sep-CMA-ES 의 학습률 배수 (d + 2) / 3.

    대각 성분만 학습하면 자유도가 d 개뿐이라 c_1, c_μ 를 이만큼 키워도 안정적입니다.
    """
    return (dimension + 2.0) / 3.0


@dataclass(frozen=True, eq=False)
class StrategyConstants:
    """d 와 λ 에서 유도되는 전략 상수들 (표준 튜토리얼 기본값)."""

    dimension: int
    population_size: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float


@lru_cache(maxsize=64)
def strategy_constants(dimension: int, population_size: int, mode: Mode = Mode.FULL) -> StrategyConstants:
    if dimension < 1:
        raise ValueError(f"차원은 1 이상이어야 합니다: {dimension}")
    if population_size < 2:
        raise ValueError(f"population size(λ)는 2 이상이어야 합니다: {population_size}")

    d = float(dimension)
    mu = population_size // 2
    raw = math.log((population_size + 1) / 2) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    weights.setflags(write=False)
    mu_eff = 1.0 / float(np.sum(weights ** 2))

    c_sigma = (mu_eff + 2) / (d + mu_eff + 5)
    d_sigma = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (d + 1)) - 1) + c_sigma
    c_c = (4 + mu_eff / d) / (d + 4 + 2 * mu_eff / d)
    c_1 = 2 / ((d + 1.3) ** 2 + mu_eff)
    c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((d + 2) ** 2 + mu_eff))

    if mode is Mode.SEPARABLE:
        factor = separable_rate_factor(dimension)
        c_1 = min(1.0, c_1 * factor)
        c_mu = min(1 - c_1, c_mu * factor)

    # E||N(0, I)||
    chi_n = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d ** 2))

    return StrategyConstants(
        dimension=dimension,
        population_size=population_size,
        mu=mu,
        weights=weights,
        mu_eff=mu_eff,
        c_sigma=c_sigma,
        d_sigma=d_sigma,
        c_c=c_c,
        c_1=c_1,
        c_mu=c_mu,
        chi_n=chi_n,
    )


@dataclass(frozen=True)
class CmaConfig:
    """
    CMA-ES 실행 설정.

    Attributes:
        population_size: λ (기본 8)
        mode: full / separable
        seed: 64비트 정수 시드. 세대 g 의 난수열은 (seed, g) 로 결정됩니다.
        max_resample: 박스 밖 후보 재샘플링 최대 횟수
    """

    population_size: int = Config.DEFAULT_POPULATION_SIZE
    mode: Mode = Mode.FULL
    seed: int = 0
    max_resample: int = Config.MAX_RESAMPLE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.population_size < 2:
            raise ValueError(f"population size(λ)는 2 이상이어야 합니다: {self.population_size}")
        if self.max_resample < 1:
            raise ValueError("max_resample 은 1 이상이어야 합니다.")

    def constants(self, dimension: int) -> StrategyConstants:
        return strategy_constants(dimension, self.population_size, self.mode)


@dataclass(frozen=True, eq=False)
class MGDState:
    """탐색 분포 N(m, σ²C) 와 진화 경로, 세대 카운터."""

    mean: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int = 0

    @property
    def dimension(self) -> int:
        return int(self.mean.shape[0])

    @property
    def covariance(self) -> np.ndarray:
        """샘플링에 쓰이는 실제 공분산 Σ = σ²·C"""
        return self.sigma ** 2 * self.C

    def with_reset_paths(self) -> "MGDState":
        """진화 경로와 세대 카운터를 0 으로 되돌린 복사본 (분포 m, σ, C 는 유지)."""
        zeros = np.zeros(self.dimension)
        return replace(self, p_sigma=zeros, p_c=zeros.copy(), generation=0)


@dataclass(frozen=True, eq=False)
class Generation:
    """ask() 가 만든 한 세대의 후보와 그에 사용된 표준정규 난수 z."""

    candidates: np.ndarray
    z: np.ndarray
    generation: int
    clamped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


# ---------------------------------------------------------------------- #
# 분포 초기화
# ---------------------------------------------------------------------- #
def _check_dimension(dimension: int):
    if dimension < 1:
        raise ValueError(f"차원은 1 이상이어야 합니다: {dimension}")


def init_default(dimension: int, config: Optional[CmaConfig] = None) -> MGDState:
    """비정보적 초기 분포 N(0.5·1, 0.2²·I)."""
    _check_dimension(dimension)
    return MGDState(
        mean=np.full(dimension, Config.INITIAL_MEAN),
        sigma=Config.INITIAL_SIGMA,
        C=np.eye(dimension),
        p_sigma=np.zeros(dimension),
        p_c=np.zeros(dimension),
        generation=0,
    )


def factorize_covariance(covariance, mode: Mode = Mode.FULL) -> Tuple[float, np.ndarray]:
    """
    Σ 를 σ²·C 로 분해합니다. σ = det(Σ)^(1/(2d)) 로 잡아 det(C) = 1 이 되게 합니다.

    Args:
        covariance: d×d 공분산 또는 (separable 용) 길이 d 의 대각 벡터
        mode: separable 이면 대각 성분만 사용

    Raises:
        InvalidDistributionError: 대칭이 아니거나 양의 정부호가 아닌 경우
    """
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim == 1:
        cov = np.diag(cov)
    elif mode is Mode.SEPARABLE and np.any(cov != np.diag(np.diag(cov))):
        logger.debug("separable 모드: 공분산의 비대각 성분을 버리고 대각만 사용합니다.")
        cov = np.diag(np.diag(cov))

    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidDistributionError(f"공분산은 정방행렬이어야 합니다: shape={cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise InvalidDistributionError("공분산에 유한하지 않은 값이 있습니다.")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
        raise InvalidDistributionError("공분산이 대칭이 아닙니다.")

    if mode is Mode.SEPARABLE:
        eigenvalues = np.diag(cov).copy()
    else:
        eigenvalues = np.linalg.eigvalsh(cov)
    if np.min(eigenvalues) <= 0:
        raise InvalidDistributionError(f"공분산이 양의 정부호가 아닙니다 (최소 고유값 {np.min(eigenvalues):.3e}).")

    dimension = cov.shape[0]
    sigma = math.exp(float(np.sum(np.log(eigenvalues))) / (2 * dimension))
    shape = cov / sigma ** 2
    if mode is Mode.SEPARABLE:
        shape = np.diag(np.diag(shape))
    return sigma, shape


def init_from(mean, covariance, config: Optional[CmaConfig] = None) -> MGDState:
    """warm start 결과 (m*, Σ*) 로 초기 분포를 만듭니다."""
    config = config or CmaConfig()
    m0 = np.asarray(mean, dtype=float).copy()
    if m0.ndim != 1:
        raise ValueError(f"평균은 1차원 벡터여야 합니다: shape={m0.shape}")
    _check_dimension(m0.shape[0])

    sigma, shape = factorize_covariance(covariance, config.mode)
    if shape.shape != (m0.shape[0], m0.shape[0]):
        raise ValueError(f"차원 불일치: mean d={m0.shape[0]}, covariance {shape.shape}")

    logger.debug(f"warm start 초기 분포 - sigma={sigma:.4g}, det(C)={np.linalg.det(shape):.6g}")
    return MGDState(
        mean=m0,
        sigma=sigma,
        C=shape,
        p_sigma=np.zeros(m0.shape[0]),
        p_c=np.zeros(m0.shape[0]),
        generation=0,
    )


# ---------------------------------------------------------------------- #
# ask / tell
# ---------------------------------------------------------------------- #
def _seed_entropy(seed: int) -> int:
    return int(seed) & 0xFFFF_FFFF_FFFF_FFFF


def generation_rng(seed: int, generation: int) -> np.random.Generator:
    """(seed, generation) 으로 결정되는 난수 생성기."""
    return np.random.default_rng([_seed_entropy(seed), int(generation)])


def eigen_decomposition(C: np.ndarray, mode: Mode = Mode.FULL) -> Tuple[np.ndarray, np.ndarray]:
    """
    C = B·D²·Bᵀ 분해. D 는 고유값의 제곱근.

    Raises:
        InvalidDistributionError: 분해 실패 또는 양의 정부호가 아닌 C
    """
    if mode is Mode.SEPARABLE:
        eigenvalues = np.diag(C).copy()
        basis = np.eye(C.shape[0])
    else:
        try:
            eigenvalues, basis = np.linalg.eigh(C)
        except np.linalg.LinAlgError as e:
            raise InvalidDistributionError(f"C 의 고유분해에 실패했습니다: {e}") from e

    if not np.all(np.isfinite(eigenvalues)) or np.min(eigenvalues) <= 0:
        raise InvalidDistributionError("C 가 수치적으로 퇴화했습니다 (고유값 ≤ 0).")
    return basis, np.sqrt(eigenvalues)


def in_unit_box(x: np.ndarray) -> bool:
    return bool(np.all((x >= 0.0) & (x <= 1.0)))


def ask(state: MGDState, config: CmaConfig) -> Generation:
    """
    λ 개의 후보 x_i = m + σ·B·D·z_i 를 생성합니다.

    박스 밖 후보는 최대 max_resample 번까지 다시 뽑고, 그래도 밖이면 [0,1] 로 clamp 합니다.
    (state, seed, generation) 이 같으면 항상 같은 후보를 돌려줍니다.
    """
    basis, scales = eigen_decomposition(state.C, config.mode)
    rng = generation_rng(config.seed, state.generation)
    dimension = state.dimension

    candidates = np.empty((config.population_size, dimension))
    draws = np.empty((config.population_size, dimension))
    clamped = np.zeros(config.population_size, dtype=bool)

    for i in range(config.population_size):
        for _ in range(config.max_resample):
            z = rng.standard_normal(dimension)
            x = state.mean + state.sigma * (basis @ (scales * z))
            if in_unit_box(x):
                break
        else:
            x = np.clip(x, 0.0, 1.0)
            clamped[i] = True
        candidates[i] = x
        draws[i] = z

    if clamped.any():
        logger.warning(f"generation {state.generation}: 후보 {int(clamped.sum())}개를 [0,1] 로 clamp 했습니다.")
    return Generation(candidates=candidates, z=draws, generation=state.generation, clamped=clamped)


def rank_order(values: np.ndarray) -> np.ndarray:
    """(value, candidate index) 기준 안정 정렬 순서."""
    return np.lexsort((np.arange(values.shape[0]), values))


def normalize_determinant(
    sigma: float, C: np.ndarray, p_c: np.ndarray, mode: Mode = Mode.FULL
) -> Tuple[float, np.ndarray, np.ndarray]:
    """k = det(C)^(1/(2d)) 로 (σ·k, C/k², p_c/k) 를 반환합니다. σ²·C 는 변하지 않습니다."""
    if mode is Mode.SEPARABLE:
        diagonal = np.diag(C)
        sign = 1.0 if np.all(diagonal > 0) else -1.0
        log_det = float(np.sum(np.log(np.abs(diagonal))))
    else:
        sign, log_det = np.linalg.slogdet(C)
    if sign <= 0 or not math.isfinite(log_det):
        raise InvalidDistributionError(f"C 가 양의 정부호가 아닙니다 (sign={sign}, log det={log_det}).")
    k = math.exp(log_det / (2 * C.shape[0]))
    return sigma * k, C / k ** 2, p_c / k


def check_resolution(mean: np.ndarray, sigma: float, C: np.ndarray, mode: Mode = Mode.FULL) -> None:
    """
    가장 긴 축의 표준편차 σ·√λmax(C) 가 m 의 부동소수 간격 이상인지 확인합니다.

    Raises:
        DistributionCollapseError
    """
    largest = float(np.max(np.diag(C))) if mode is Mode.SEPARABLE else float(np.linalg.eigvalsh(C)[-1])
    spread = sigma * math.sqrt(largest)
    resolution = float(np.spacing(np.max(np.abs(mean))))
    if not spread >= resolution:
        raise DistributionCollapseError(
            f"탐색 분포가 붕괴했습니다: σ·√λmax(C) = {spread:.3e} < m 의 해상도 {resolution:.3e}"
        )


def tell(state: MGDState, generation: Generation, values, config: CmaConfig) -> MGDState:
    """
    평가값의 순위만 사용해 분포를 업데이트합니다.

    - 평균: 상위 μ 개 후보의 가중 재조합
    - σ: CSA (누적 스텝 사이즈 적응)
    - C: rank-one (p_c) + rank-μ 업데이트. separable 모드에서는 대각 성분만 적용
    - det(C) = 1 정규화: C ← C/k², σ ← σ·k, p_c ← p_c/k (샘플링 분포와 이후 궤적은 그대로)

    Raises:
        ValueError: 후보 수와 평가값 수가 다르거나 NaN / 무한대가 있는 경우
        InvalidDistributionError: 업데이트된 C 가 양의 정부호가 아닌 경우
        DistributionCollapseError: σ·√λmax(C) 가 m 의 부동소수 해상도보다 작아진 경우
    """
    values = np.asarray(values, dtype=float)
    candidates = generation.candidates
    if values.shape != (candidates.shape[0],):
        raise ValueError(f"평가값 개수({values.shape})가 후보 수({candidates.shape[0]})와 다릅니다.")
    if np.any(np.isnan(values)):
        raise ValueError("평가값에 NaN 이 있습니다.")
    if not np.all(np.isfinite(values)):
        raise ValueError("평가값은 유한해야 합니다.")
    if generation.generation != state.generation:
        raise ValueError(
            f"다른 세대의 후보입니다 (state={state.generation}, generation={generation.generation})."
        )

    consts = config.constants(state.dimension)
    basis, scales = eigen_decomposition(state.C, config.mode)

    order = rank_order(values)
    selected = candidates[order[: consts.mu]]
    y = (selected - state.mean) / state.sigma
    y_w = consts.weights @ y

    mean = state.mean + state.sigma * y_w

    # C^(-1/2)·y_w
    whitened = basis @ ((basis.T @ y_w) / scales)
    p_sigma = (1 - consts.c_sigma) * state.p_sigma + math.sqrt(
        consts.c_sigma * (2 - consts.c_sigma) * consts.mu_eff
    ) * whitened

    norm_p_sigma = float(np.linalg.norm(p_sigma))
    threshold = (1.4 + 2 / (state.dimension + 1)) * consts.chi_n
    correction = math.sqrt(1 - (1 - consts.c_sigma) ** (2 * (state.generation + 1)))
    h_sigma = 1.0 if norm_p_sigma / correction < threshold else 0.0

    p_c = (1 - consts.c_c) * state.p_c + h_sigma * math.sqrt(
        consts.c_c * (2 - consts.c_c) * consts.mu_eff
    ) * y_w

    delta_h = (1 - h_sigma) * consts.c_c * (2 - consts.c_c)
    decay = 1 - consts.c_1 - consts.c_mu + consts.c_1 * delta_h

    if config.mode is Mode.SEPARABLE:
        diagonal = (
            decay * np.diag(state.C)
            + consts.c_1 * p_c ** 2
            + consts.c_mu * (consts.weights @ (y ** 2))
        )
        C = np.diag(diagonal)
    else:
        rank_one = np.outer(p_c, p_c)
        rank_mu = (y.T * consts.weights) @ y
        C = decay * state.C + consts.c_1 * rank_one + consts.c_mu * rank_mu
        C = (C + C.T) / 2

    sigma = state.sigma * math.exp((consts.c_sigma / consts.d_sigma) * (norm_p_sigma / consts.chi_n - 1))
    sigma, C, p_c = normalize_determinant(sigma, C, p_c, config.mode)
    check_resolution(mean, sigma, C, config.mode)

    logger.debug(
        f"generation {state.generation} → {state.generation + 1}: "
        f"best={values[order[0]]:.6g}, sigma={sigma:.4g}, h_sigma={h_sigma:.0f}"
    )
    return MGDState(
        mean=mean,
        sigma=sigma,
        C=C,
        p_sigma=p_sigma,
        p_c=p_c,
        generation=state.generation + 1,
    )


class CMAOptimizer:
    """
    ask/tell 인터페이스를 가진 CMA-ES 래퍼.

    분포가 붕괴하면 (DistributionCollapseError) 경고를 한 번 남기고 stopped 가 됩니다.
    이후에는 마지막 분포 (m, σ, C) 를 고정한 채 세대 카운터만 올려 샘플링을 계속합니다.

    Example:
        >>> optimizer = CMAOptimizer.default(2, CmaConfig(seed=1))
        >>> x = optimizer.ask()
        >>> optimizer.tell([f(xi) for xi in x])
    """

    def __init__(self, state: MGDState, config: Optional[CmaConfig] = None):
        self.config = config or CmaConfig()
        self.state = state
        self._pending: Optional[Generation] = None
        self.stopped = False
        # 분포가 유효한지 미리 확인
        eigen_decomposition(state.C, self.config.mode)

    @classmethod
    def default(cls, dimension: int, config: Optional[CmaConfig] = None) -> "CMAOptimizer":
        return cls(init_default(dimension, config), config)

    @classmethod
    def from_distribution(cls, mean, covariance, config: Optional[CmaConfig] = None) -> "CMAOptimizer":
        return cls(init_from(mean, covariance, config), config)

    @property
    def batch_size(self) -> int:
        return self.config.population_size

    def ask(self) -> np.ndarray:
        self._pending = ask(self.state, self.config)
        return self._pending.candidates.copy()

    def tell(self, values) -> None:
        if self._pending is None:
            raise RuntimeError("tell() 전에 ask() 를 호출해야 합니다.")
        pending, self._pending = self._pending, None
        if self.stopped:
            self.state = replace(self.state, generation=self.state.generation + 1)
            return
        try:
            self.state = tell(self.state, pending, values, self.config)
        except DistributionCollapseError as e:
            logger.warning(f"⚠️ generation {self.state.generation}: 분포 업데이트를 멈춥니다 - {e}")
            self.stopped = True
            self.state = replace(self.state, generation=self.state.generation + 1)
