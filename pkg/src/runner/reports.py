# src/runner/reports.py
"""
Reports

run_experiment 결과 위에 얹는 보고서들.
- similarity_report    : source offset 별 γ-similarity 와 warm start 개선량 (similarity.csv)
- sensitivity_sweep    : α 또는 γ 값별 전체 실험 + 결합 궤적 CSV (sweep_<param>.csv)
- transfer_comparison  : naive transfer baseline 비교 (transfer_comparison.csv)
- generate_source      : source archive 만 생성해서 저장 (gen-source)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Sequence

import pandas as pd

from src.baselines.optimizers import OptimizerKind, SourceMethod, random_search, source_search
from src.runner.experiment import RunSummary, run_experiment, write_csv
from src.runner.experiment_config import ExperimentConfig
from src.similarity.densities import prior_density
from src.similarity.divergence import gamma_similarity
from src.space.archive import TrialArchive, save_archive
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

logger = get_logger(__name__)

SIMILARITY_COLUMNS = ["b_source", "s_hat", "stderr", "improvement"]
COMPARISON_COLUMNS = ["b_source", "method", "mean_best", "stderr_best"]

COMPARISON_METHODS = (
    OptimizerKind.CMA,
    OptimizerKind.SEP_CMA,
    OptimizerKind.WS_CMA,
    OptimizerKind.WS_SEP_CMA,
    OptimizerKind.REUSE_GMM,
    OptimizerKind.REUSE_NORMAL,
)


class SweepParameter(str, Enum):
    ALPHA = "alpha"
    GAMMA = "gamma"


def with_methods(config: ExperimentConfig, required: Sequence[OptimizerKind]) -> ExperimentConfig:
    methods = tuple(config.methods) + tuple(kind for kind in required if kind not in config.methods)
    return replace(config, methods=methods)


def _transfer_label(kind: OptimizerKind, b: float) -> str:
    return f"{kind.value}@{float(b)!r}"


def _lookup(summary: RunSummary, label: str, column: str) -> float:
    try:
        return summary.mean_best(label) if column == "mean_best" else summary.stderr_best(label)
    except KeyError:
        logger.warning(f"[{label}] 결과가 없어 NaN 으로 기록합니다. (실패 사유: {summary.failures.get(label, '없음')})")
        return math.nan


# ---------------------------------------------------------------------- #
# γ-similarity vs 성능
# ---------------------------------------------------------------------- #
def similarity_report(config: ExperimentConfig, summary: Optional[RunSummary] = None) -> pd.DataFrame:
    """
    source offset 별 (b_source, s_hat, stderr, improvement) 표를 만들고 similarity.csv 로 저장합니다.

    improvement = mean_best(cma) − mean_best(ws_cma@b). summary 가 없으면 cma, ws_cma 를 포함해 실험을 먼저 돌립니다.
    similarity 용 archive 는 source 가 similarity_points 개의 랜덤 서치(source_seed),
    target 은 같은 크기의 랜덤 서치(source_seed + 1) 입니다.
    similarity 추정이 실패한 offset 은 s_hat, stderr 를 NaN 으로 기록하고 다음 offset 으로 넘어갑니다.
    """
    if summary is None:
        summary = run_experiment(with_methods(config, (OptimizerKind.CMA, OptimizerKind.WS_CMA)))

    target = config.problem_at(config.offset_target)
    seed = config.effective_source_seed
    target_archive = random_search(target.space, target, config.similarity_points, seed + 1, run_id="target")
    prior = prior_density(config.prior, target.dimension)
    cma_mean = _lookup(summary, OptimizerKind.CMA.value, "mean_best")

    rows = []
    for b in config.offset_source:
        source = config.problem_at(b)
        source_archive = random_search(source.space, source, config.similarity_points, seed, run_id="source")
        improvement = cma_mean - _lookup(summary, _transfer_label(OptimizerKind.WS_CMA, b), "mean_best")
        try:
            estimate = gamma_similarity(
                source_archive,
                target_archive,
                gamma1=config.similarity_gamma1,
                gamma2=config.similarity_gamma2,
                alpha=config.alpha,
                prior=prior,
                n=config.mc_samples,
                seed=config.seed,
                jobs=config.jobs,
            )
        except Exception as e:
            logger.error(f"b={b}: γ-similarity 추정 실패, NaN 으로 기록합니다: {e}", exc_info=True)
            rows.append((b, math.nan, math.nan, improvement))
            continue
        rows.append((b, estimate.s_hat, estimate.standard_error, improvement))
        logger.info(f"b={b}: s_hat={estimate.s_hat:.4f}, improvement={improvement:.4g}")

    frame = pd.DataFrame(rows, columns=SIMILARITY_COLUMNS)
    write_csv(frame, config.out / "similarity.csv")
    return frame


# ---------------------------------------------------------------------- #
# 민감도 분석
# ---------------------------------------------------------------------- #
@dataclass
class SweepResult:
    parameter: SweepParameter
    frame: pd.DataFrame
    summaries: Dict[float, RunSummary] = field(default_factory=dict)

    @property
    def has_failures(self) -> bool:
        return any(summary.has_failures for summary in self.summaries.values())


def sweep_directory(config: ExperimentConfig, parameter: SweepParameter, value: float) -> Path:
    return config.out / f"sweep_{parameter.value}_{float(value)!r}"


def sensitivity_sweep(
    config: ExperimentConfig, parameter: SweepParameter, values: Sequence[float]
) -> SweepResult:
    """
    값마다 나머지 설정을 고정한 전체 실험을 돌리고,
    trajectory_summary 를 parameter, value 열과 함께 이어 붙여 sweep_<param>.csv 로 저장합니다.
    """
    parameter = SweepParameter(parameter)
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep 값이 비어 있습니다.")
    if any(not v > 0 for v in values):
        raise ConfigError(f"sweep 값은 모두 양수여야 합니다: {values}")

    frames = []
    summaries: Dict[float, RunSummary] = {}
    for value in values:
        logger.info(f"🔁 sweep {parameter.value}={value}")
        swept = replace(config, **{parameter.value: value, "out": sweep_directory(config, parameter, value)})
        summary = run_experiment(swept)
        summaries[value] = summary

        frame = summary.trajectory_summary.copy()
        frame.insert(0, "value", value)
        frame.insert(0, "parameter", parameter.value)
        frames.append(frame)

    combined = pd.concat(frames, ignore_index=True)
    write_csv(combined, config.out / f"sweep_{parameter.value}.csv")
    return SweepResult(parameter=parameter, frame=combined, summaries=summaries)


# ---------------------------------------------------------------------- #
# naive transfer 비교
# ---------------------------------------------------------------------- #
def transfer_comparison(config: ExperimentConfig) -> tuple[pd.DataFrame, RunSummary]:
    """
    source offset 마다 CMA 계열 6종의 평균 best 와 표준오차를 transfer_comparison.csv 로 저장합니다.

    source_method 를 지정하지 않으면 source archive 는 랜덤 서치 기록입니다.
    ReuseNormal 의 source 는 항상 CMA-ES 최종 상태입니다.
    """
    source_method = config.source_method or SourceMethod.RANDOM
    summary = run_experiment(replace(config, methods=COMPARISON_METHODS, source_method=source_method))

    rows = []
    for b in config.offset_source:
        for kind in COMPARISON_METHODS:
            label = _transfer_label(kind, b) if (kind.needs_archive or kind.needs_state) else kind.value
            rows.append((b, kind.value, _lookup(summary, label, "mean_best"), _lookup(summary, label, "stderr_best")))

    frame = pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
    write_csv(frame, config.out / "transfer_comparison.csv")
    return frame, summary


# ---------------------------------------------------------------------- #
# source archive 생성
# ---------------------------------------------------------------------- #
def generate_source(config: ExperimentConfig, b: float, path: Optional[Path] = None) -> TrialArchive:
    """offset b 문제에 source_method 로 source_count 회 평가한 기록을 archive 로 저장합니다."""
    problem = config.problem_at(b)
    archive = source_search(
        config.effective_source_method,
        problem.space,
        problem,
        config.source_count,
        config.effective_source_seed,
        config.population_size,
    )
    path = Path(path) if path is not None else config.out / "sources" / f"source_b{float(b)!r}.archive"
    save_archive(archive, path)
    logger.info(f"source archive 저장 - {problem.label}, {len(archive)}개 → {path}")
    return archive
