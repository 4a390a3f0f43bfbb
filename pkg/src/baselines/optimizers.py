# src/baselines/optimizers.py
"""
Optimizers & Baselines

비교 실험에 쓰는 모든 optimizer 를 같은 ask/tell 계약으로 제공합니다.

- cma / sep_cma          : 기본 초기분포 N(0.5, 0.2²) 의 CMA-ES / sep-CMA-ES
- ws_cma / ws_sep_cma    : source archive 로 warm start 한 CMA-ES / sep-CMA-ES
- random                 : [0,1]^d 균등 랜덤 서치
- ws_only                : warm start 분포 N(m*, Σ*) 에서 적응 없이 계속 샘플링
- reuse_gmm              : source promising GMM 에서 적응 없이 계속 샘플링
- reuse_normal           : source CMA-ES 의 최종 (m, σ, C) 로 시작하는 CMA-ES

source archive 는 source task 에서 돌린 기본 CMA-ES (cma) 또는 랜덤 서치 (random) 의 평가 기록입니다.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from src.optimizer.ask_tell import AskTellOptimizer, Objective, run_optimizer
from src.optimizer.cmaes import (
    CMAOptimizer,
    CmaConfig,
    MGDState,
    Mode,
    eigen_decomposition,
    generation_rng,
    in_unit_box,
)
from src.similarity.densities import Density, GaussianDensity, GMMDensity
from src.space.archive import TrialArchive, best_seen
from src.space.parameter_space import ParameterSpace
from src.utils.config import Config
from src.utils.logger import get_logger
from src.warmstart.promising import PromisingGMM, WarmStartInit, build_gmm, select_top_gamma, warm_start_init

logger = get_logger(__name__)


class OptimizerKind(str, Enum):
    CMA = "cma"
    SEP_CMA = "sep_cma"
    WS_CMA = "ws_cma"
    WS_SEP_CMA = "ws_sep_cma"
    RANDOM = "random"
    WS_ONLY = "ws_only"
    REUSE_GMM = "reuse_gmm"
    REUSE_NORMAL = "reuse_normal"

    @property
    def needs_archive(self) -> bool:
        return self in (OptimizerKind.WS_CMA, OptimizerKind.WS_SEP_CMA, OptimizerKind.WS_ONLY, OptimizerKind.REUSE_GMM)

    @property
    def needs_state(self) -> bool:
        return self is OptimizerKind.REUSE_NORMAL

    @property
    def is_cma(self) -> bool:
        return self in (
            OptimizerKind.CMA,
            OptimizerKind.SEP_CMA,
            OptimizerKind.WS_CMA,
            OptimizerKind.WS_SEP_CMA,
            OptimizerKind.REUSE_NORMAL,
        )

    @property
    def mode(self) -> Mode:
        if self in (OptimizerKind.SEP_CMA, OptimizerKind.WS_SEP_CMA):
            return Mode.SEPARABLE
        return Mode.FULL


class SourceMethod(str, Enum):
    """source archive 를 만드는 optimizer."""

    CMA = "cma"
    RANDOM = "random"


@dataclass(frozen=True, eq=False)
class OptimizerSpec:
    """optimizer 종류 + (필요하면) source 지식 + 하이퍼파라미터."""

    kind: OptimizerKind
    source_archive: Optional[TrialArchive] = None
    source_state: Optional[MGDState] = None
    gamma: float = Config.DEFAULT_GAMMA
    alpha: float = Config.DEFAULT_ALPHA
    population_size: int = Config.DEFAULT_POPULATION_SIZE
    seed: int = 0

    def __post_init__(self):
        kind = OptimizerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind.needs_archive and self.source_archive is None:
            raise ValueError(f"{kind.value} 는 source archive 가 필요합니다.")
        if kind.needs_state and self.source_state is None:
            raise ValueError(f"{kind.value} 는 source task 의 최종 MGD 상태가 필요합니다.")
        if not kind.needs_archive and self.source_archive is not None:
            raise ValueError(f"{kind.value} 는 source archive 를 받지 않습니다.")
        if not kind.needs_state and self.source_state is not None:
            raise ValueError(f"{kind.value} 는 MGD 상태를 받지 않습니다.")

    def cma_config(self) -> CmaConfig:
        return CmaConfig(population_size=self.population_size, mode=self.kind.mode, seed=self.seed)


class RandomSearchOptimizer:
    """[0,1]^d 균등분포에서 i.i.d. 샘플링. tell 은 무시합니다."""

    def __init__(self, dimension: int, seed: int = 0, batch_size: int = 1):
        self.dimension = dimension
        self.batch_size = batch_size
        self._rng = np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)

    def ask(self) -> np.ndarray:
        return self._rng.random((self.batch_size, self.dimension))

    def tell(self, values) -> None:
        pass


class DistributionSampler:
    """
    고정된 분포에서 적응 없이 샘플링합니다 (WS-only, ReuseGMM).

    박스 처리는 CMA-ES 의 ask 와 같습니다: 최대 max_resample 번 재샘플링, 실패 시 clamp.
    """

    def __init__(
        self,
        density: Density,
        seed: int = 0,
        batch_size: int = Config.DEFAULT_POPULATION_SIZE,
        max_resample: int = Config.MAX_RESAMPLE,
    ):
        self.density = density
        self.batch_size = batch_size
        self.max_resample = max_resample
        self.seed = seed
        self._batches = 0

    def _draw(self, rng: np.random.Generator) -> np.ndarray:
        for _ in range(self.max_resample):
            x = self.density.sample(1, rng)[0]
            if in_unit_box(x):
                return x
        return np.clip(x, 0.0, 1.0)

    def ask(self) -> np.ndarray:
        rng = generation_rng(self.seed, self._batches)
        self._batches += 1
        return np.array([self._draw(rng) for _ in range(self.batch_size)])

    def tell(self, values) -> None:
        pass


# ---------------------------------------------------------------------- #
# 실행 함수들 (run log = TrialArchive)
# ---------------------------------------------------------------------- #
def random_search(
    space: ParameterSpace, objective: Objective, budget: int, seed: int = 0, run_id: str = "random"
) -> TrialArchive:
    if budget < 1:
        raise ValueError(f"budget 은 1 이상이어야 합니다: {budget}")
    return run_optimizer(RandomSearchOptimizer(space.dimension, seed), objective, budget, space, run_id)


def ws_only(
    space: ParameterSpace,
    init: WarmStartInit,
    objective: Objective,
    budget: int,
    seed: int = 0,
    run_id: str = "ws_only",
) -> TrialArchive:
    sampler = DistributionSampler(GaussianDensity(init.m_star, init.Sigma_star), seed)
    return run_optimizer(sampler, objective, budget, space, run_id)


def reuse_gmm(
    space: ParameterSpace,
    gmm: PromisingGMM,
    objective: Objective,
    budget: int,
    seed: int = 0,
    run_id: str = "reuse_gmm",
) -> TrialArchive:
    sampler = DistributionSampler(GMMDensity(gmm), seed)
    return run_optimizer(sampler, objective, budget, space, run_id)


def reuse_normal_optimizer(final_state: MGDState, config: CmaConfig) -> CMAOptimizer:
    """source run 의 최종 (m, σ, C) 로 시작. 진화 경로와 세대 카운터는 0 으로 초기화합니다."""
    if not final_state.sigma > 0:
        raise ValueError(f"sigma 는 양수여야 합니다: {final_state.sigma}")
    eigen_decomposition(final_state.C)
    return CMAOptimizer(final_state.with_reset_paths(), config)


def reuse_normal(
    space: ParameterSpace,
    final_state: MGDState,
    objective: Objective,
    budget: int,
    seed: int = 0,
    config: Optional[CmaConfig] = None,
    run_id: str = "reuse_normal",
) -> TrialArchive:
    config = replace(config or CmaConfig(), seed=seed)
    return run_optimizer(reuse_normal_optimizer(final_state, config), objective, budget, space, run_id)


def run_source_cma(
    space: ParameterSpace, objective: Objective, budget: int, config: CmaConfig
) -> MGDState:
    """ReuseNormal 의 source task: 기본 초기분포 CMA-ES 를 budget 만큼 돌린 최종 상태."""
    optimizer = CMAOptimizer.default(space.dimension, config)
    run_optimizer(optimizer, objective, budget, space, run_id="source_cma")
    logger.info(
        f"source CMA-ES 완료 - generation={optimizer.state.generation}, "
        f"m={np.round(optimizer.state.mean, 4).tolist()}, sigma={optimizer.state.sigma:.4g}"
    )
    return optimizer.state


def source_search(
    method: SourceMethod,
    space: ParameterSpace,
    objective: Objective,
    budget: int,
    seed: int = 0,
    population_size: int = Config.DEFAULT_POPULATION_SIZE,
) -> TrialArchive:
    """
    source task 의 평가 기록 (warm start 의 입력).

    cma 는 기본 초기분포 CMA-ES 를 budget 번 평가한 전체 기록, random 은 균등 랜덤 서치입니다.
    """
    method = SourceMethod(method)
    if budget < 1:
        raise ValueError(f"budget 은 1 이상이어야 합니다: {budget}")
    if method is SourceMethod.RANDOM:
        return random_search(space, objective, budget, seed, run_id="source")
    optimizer = CMAOptimizer.default(space.dimension, CmaConfig(population_size=population_size, seed=seed))
    archive = run_optimizer(optimizer, objective, budget, space, run_id="source")
    logger.info(f"source CMA-ES 기록 - {len(archive)} trials, best={best_seen(archive)[1]:.4g}")
    return archive


def build_optimizer(spec: OptimizerSpec, dimension: int) -> AskTellOptimizer:
    """OptimizerSpec 에 맞는 ask/tell optimizer 를 만듭니다."""
    kind = spec.kind
    config = spec.cma_config()

    if kind in (OptimizerKind.CMA, OptimizerKind.SEP_CMA):
        return CMAOptimizer.default(dimension, config)
    if kind in (OptimizerKind.WS_CMA, OptimizerKind.WS_SEP_CMA):
        init = warm_start_init(spec.source_archive, spec.gamma, spec.alpha, kind.mode)
        return CMAOptimizer(init.to_state(config), config)
    if kind is OptimizerKind.REUSE_NORMAL:
        return reuse_normal_optimizer(spec.source_state, config)
    if kind is OptimizerKind.RANDOM:
        return RandomSearchOptimizer(dimension, spec.seed)
    if kind is OptimizerKind.WS_ONLY:
        init = warm_start_init(spec.source_archive, spec.gamma, spec.alpha, Mode.FULL)
        return DistributionSampler(GaussianDensity(init.m_star, init.Sigma_star), spec.seed, spec.population_size)
    if kind is OptimizerKind.REUSE_GMM:
        gmm = build_gmm(select_top_gamma(spec.source_archive, spec.gamma), spec.alpha)
        return DistributionSampler(GMMDensity(gmm), spec.seed, spec.population_size)
    raise ValueError(f"알 수 없는 optimizer 종류입니다: {kind}")
