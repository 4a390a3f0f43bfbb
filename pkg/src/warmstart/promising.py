# src/warmstart/promising.py
"""
Warm Starting

source task archive 에서 상위 γ 비율의 trial 을 골라 등가중 등방 GMM
    p(x) = (1/N_γ) Σ N(x | x_i, α²I)
을 만들고, KL(p‖q) 를 최소화하는 정규분포 q = N(m*, Σ*) 를 닫힌 형태로 구합니다.
    m* = (1/N_γ) Σ x_i
    Σ* = α²I + (1/N_γ) Σ (x_i − m*)(x_i − m*)ᵀ
separable 버전은 Σ* 의 대각 성분 l_j 만 사용합니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.optimizer.cmaes import CmaConfig, MGDState, Mode, init_from
from src.space.archive import Trial, TrialArchive
from src.utils.config import Config
from src.utils.errors import InsufficientDataError
from src.utils.logger import get_logger

logger = get_logger(__name__)

# γ·N 의 부동소수 표현 오차 (예: 0.29 * 100 = 28.999...) 보정
_FLOOR_EPS = 1e-9


def top_gamma_count(n_trials: int, gamma: float) -> int:
    """⌊γ·N⌋"""
    if not 0 < gamma <= 1:
        raise ValueError(f"γ 는 (0, 1] 범위여야 합니다: {gamma}")
    return int(math.floor(gamma * n_trials + _FLOOR_EPS))


@dataclass(frozen=True, eq=False)
class PromisingGMM:
    """상위 γ trial 을 중심으로 하는 등가중 등방 GMM. centers 는 value 오름차순."""

    centers: np.ndarray
    alpha: float
    values: Tuple[float, ...] = ()

    @property
    def n_components(self) -> int:
        return int(self.centers.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.centers.shape[1])

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n_components, 1.0 / self.n_components)


@dataclass(frozen=True, eq=False)
class WarmStartInit:
    """KL 최소화로 얻은 초기 분포 (m*, Σ*). separable 이면 Sigma_star 는 대각 벡터."""

    m_star: np.ndarray
    Sigma_star: np.ndarray
    mode: Mode = Mode.FULL

    def to_state(self, config: Optional[CmaConfig] = None) -> MGDState:
        return init_from(self.m_star, self.Sigma_star, config or CmaConfig(mode=self.mode))


def select_top_gamma(archive: TrialArchive, gamma: float = Config.DEFAULT_GAMMA) -> list:
    """
    평가값이 가장 작은 ⌊γ·N⌋ 개 trial 을 오름차순으로 반환합니다 (동률은 eval_index 순).

    Raises:
        InsufficientDataError: archive 가 비었거나 ⌊γ·N⌋ = 0 인 경우
    """
    n_top = top_gamma_count(len(archive), gamma)
    if n_top < 1:
        raise InsufficientDataError(
            f"⌊γ·N⌋ = ⌊{gamma}·{len(archive)}⌋ = 0 입니다. γ 를 키우거나 source 데이터를 늘려주세요."
        )
    ranked = sorted(archive.trials, key=lambda trial: (trial.value, trial.eval_index))
    return ranked[:n_top]


def build_gmm(top_trials: Sequence[Trial], alpha: float = Config.DEFAULT_ALPHA) -> PromisingGMM:
    if not alpha > 0:
        raise ValueError(f"α 는 양수여야 합니다: {alpha}")
    if len(top_trials) == 0:
        raise ValueError("GMM 을 만들 trial 이 없습니다.")
    centers = np.array([trial.unit_point for trial in top_trials], dtype=float)
    values = tuple(trial.value for trial in top_trials)
    logger.debug(f"promising GMM 생성 - 성분 {len(values)}개, α={alpha}")
    return PromisingGMM(centers=centers, alpha=float(alpha), values=values)


def _centered_scatter(gmm: PromisingGMM) -> Tuple[np.ndarray, np.ndarray]:
    m_star = gmm.centers.mean(axis=0)
    diff = gmm.centers - m_star
    # 모분산 (1/N_γ), Bessel 보정 없음
    return m_star, diff.T @ diff / gmm.n_components


def fit_full(gmm: PromisingGMM) -> WarmStartInit:
    m_star, scatter = _centered_scatter(gmm)
    sigma_star = gmm.alpha ** 2 * np.eye(gmm.dimension) + scatter
    return WarmStartInit(m_star=m_star, Sigma_star=sigma_star, mode=Mode.FULL)


def fit_separable(gmm: PromisingGMM) -> WarmStartInit:
    m_star, scatter = _centered_scatter(gmm)
    # fit_full 과 같은 연산 순서를 써서 대각 성분이 비트 단위로 일치
    diagonal = np.diag(gmm.alpha ** 2 * np.eye(gmm.dimension) + scatter).copy()
    return WarmStartInit(m_star=m_star, Sigma_star=diagonal, mode=Mode.SEPARABLE)


def warm_start_init(
    archive: TrialArchive,
    gamma: float = Config.DEFAULT_GAMMA,
    alpha: float = Config.DEFAULT_ALPHA,
    mode: Mode = Mode.FULL,
) -> WarmStartInit:
    """select_top_gamma → build_gmm → fit_full / fit_separable 을 한 번에 수행합니다."""
    gmm = build_gmm(select_top_gamma(archive, gamma), alpha)
    init = fit_separable(gmm) if Mode(mode) is Mode.SEPARABLE else fit_full(gmm)
    logger.info(
        f"warm start 초기화 - mode={Mode(mode).value}, γ={gamma}, α={alpha}, "
        f"N_γ={gmm.n_components}, m*={np.round(init.m_star, 4).tolist()}"
    )
    return init
