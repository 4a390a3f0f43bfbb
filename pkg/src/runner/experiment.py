# src/runner/experiment.py
"""
Experiment Runner

source archive 생성 → warm start → (방법 × 반복) 실행 → 집계 → CSV 저장까지 이어지는 실험 파이프라인.

각 cell 은 (방법, source offset) 한 쌍입니다. 전이하지 않는 방법(cma, sep_cma, random)은
source 와 무관하므로 offset 없이 한 번만 실행합니다. 한 cell 의 오류는 그 cell 만 실패로 기록하고
나머지 cell 은 계속 진행합니다.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.baselines.optimizers import OptimizerKind, OptimizerSpec, build_optimizer, run_source_cma, source_search
from src.bench.problems import ProblemKind, SyntheticProblem
from src.optimizer.ask_tell import run_optimizer
from src.optimizer.cmaes import CmaConfig, MGDState
from src.optimizer.state_io import save_state
from src.runner.experiment_config import ExperimentConfig
from src.space.archive import TrialArchive, best_so_far, load_archive, save_archive
from src.utils.logger import get_logger

logger = get_logger(__name__)

TRAJECTORY_COLUMNS = ["method", "run", "eval_index", "value", "best_so_far"]
SUMMARY_COLUMNS = ["method", "mean_best", "stderr_best"]
TRAJECTORY_SUMMARY_COLUMNS = ["method", "eval_index", "mean_best_so_far", "stderr_best_so_far"]


@dataclass(frozen=True)
class Cell:
    kind: OptimizerKind
    b_source: Optional[float] = None

    @property
    def label(self) -> str:
        if self.b_source is None:
            return self.kind.value
        return f"{self.kind.value}@{self.b_source!r}"


@dataclass(frozen=True, eq=False)
class RunTask:
    """worker 프로세스로 넘기는 run 한 번의 모든 입력 (pickle 가능)."""

    label: str
    kind: OptimizerKind
    problem: ProblemKind
    b_target: float
    run: int
    seed: int
    budget: int
    gamma: float
    alpha: float
    population_size: int
    source_archive: Optional[TrialArchive] = None
    source_state: Optional[MGDState] = None


def execute_run(task: RunTask) -> TrialArchive:
    """run 한 번을 실행하고 run log 를 반환합니다."""
    problem = SyntheticProblem(task.problem, task.b_target)
    spec = OptimizerSpec(
        kind=task.kind,
        source_archive=task.source_archive,
        source_state=task.source_state,
        gamma=task.gamma,
        alpha=task.alpha,
        population_size=task.population_size,
        seed=task.seed,
    )
    optimizer = build_optimizer(spec, problem.dimension)
    return run_optimizer(optimizer, problem, task.budget, problem.space, run_id=f"{task.label}#{task.run}")


def _safe_execute(task: RunTask) -> Tuple[Optional[TrialArchive], Optional[str]]:
    try:
        return execute_run(task), None
    except Exception as e:
        logger.error(f"[{task.label}] run {task.run} 실패: {e}", exc_info=True)
        return None, f"{type(e).__name__}: {e}"


def standard_error(values: np.ndarray) -> float:
    """표본표준편차 / √n (n = 1 이면 0)."""
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


@dataclass
class RunSummary:
    """실험 결과 집계."""

    method_stats: pd.DataFrame
    trajectories: pd.DataFrame
    trajectory_summary: pd.DataFrame
    failures: Dict[str, str] = field(default_factory=dict)
    run_logs: Dict[str, List[TrialArchive]] = field(default_factory=dict)

    @property
    def has_failures(self) -> bool:
        return bool(self.failures)

    def mean_best(self, label: str) -> float:
        row = self.method_stats.loc[self.method_stats["method"] == label]
        if row.empty:
            raise KeyError(f"결과가 없는 cell 입니다: {label}")
        return float(row["mean_best"].iloc[0])

    def stderr_best(self, label: str) -> float:
        row = self.method_stats.loc[self.method_stats["method"] == label]
        if row.empty:
            raise KeyError(f"결과가 없는 cell 입니다: {label}")
        return float(row["stderr_best"].iloc[0])


def summarize(run_logs: Dict[str, List[TrialArchive]], failures: Optional[Dict[str, str]] = None) -> RunSummary:
    """cell 별 run log 로부터 평균/표준오차와 best-so-far 궤적을 계산합니다."""
    trajectory_rows = []
    stats_rows = []
    curve_rows = []
    for label, logs in run_logs.items():
        curves = []
        for run, log in enumerate(logs):
            values = log.values()
            curve = best_so_far(values)
            curves.append(curve)
            for eval_index, (value, best) in enumerate(zip(values, curve)):
                trajectory_rows.append((label, run, eval_index, float(value), float(best)))

        finals = np.array([curve[-1] for curve in curves])
        stats_rows.append((label, float(np.mean(finals)), standard_error(finals)))

        matrix = np.vstack(curves)
        for eval_index in range(matrix.shape[1]):
            column = matrix[:, eval_index]
            curve_rows.append((label, eval_index, float(np.mean(column)), standard_error(column)))

    return RunSummary(
        method_stats=pd.DataFrame(stats_rows, columns=SUMMARY_COLUMNS),
        trajectories=pd.DataFrame(trajectory_rows, columns=TRAJECTORY_COLUMNS),
        trajectory_summary=pd.DataFrame(curve_rows, columns=TRAJECTORY_SUMMARY_COLUMNS),
        failures=dict(failures or {}),
        run_logs=run_logs,
    )


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")


class ExperimentRunner:
    """
    ExperimentConfig 하나를 실행하는 파이프라인.

    Example:
        >>> runner = ExperimentRunner(ExperimentConfig(reps=5, out=Path("results/demo")))
        >>> summary = runner.run()
        >>> summary.mean_best("ws_cma@0.6")
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._source_archives: Dict[float, TrialArchive] = {}
        self._source_states: Dict[float, MGDState] = {}

    # ------------------------------------------------------------------ #
    # source task
    # ------------------------------------------------------------------ #
    def source_archive(self, b: float) -> TrialArchive:
        """offset b 의 source archive (source_method 로 만든 평가 기록 또는 설정된 파일)."""
        if b not in self._source_archives:
            if self.config.source_archive is not None:
                archive = load_archive(self.config.source_archive)
            else:
                problem = self.config.problem_at(b)
                method = self.config.effective_source_method
                archive = source_search(
                    method,
                    problem.space,
                    problem,
                    self.config.source_count,
                    self.config.effective_source_seed,
                    self.config.population_size,
                )
                logger.info(f"source archive 생성 - {problem.label}, {method.value}, {len(archive)}개 평가")
            self._source_archives[b] = archive
        return self._source_archives[b]

    def source_state(self, b: float) -> MGDState:
        """ReuseNormal 용 source CMA-ES 최종 상태."""
        if b not in self._source_states:
            problem = self.config.problem_at(b)
            config = CmaConfig(
                population_size=self.config.population_size,
                seed=self.config.effective_source_seed,
            )
            self._source_states[b] = run_source_cma(
                problem.space, problem, self.config.effective_reuse_budget, config
            )
        return self._source_states[b]

    # ------------------------------------------------------------------ #
    # 실행
    # ------------------------------------------------------------------ #
    def cells(self) -> List[Cell]:
        cells = []
        for kind in self.config.methods:
            if kind.needs_archive or kind.needs_state:
                cells.extend(Cell(kind, b) for b in self.config.offset_source)
            else:
                cells.append(Cell(kind))
        return cells

    def _tasks(self, cell: Cell) -> List[RunTask]:
        source_archive = self.source_archive(cell.b_source) if cell.kind.needs_archive else None
        source_state = self.source_state(cell.b_source) if cell.kind.needs_state else None
        return [
            RunTask(
                label=cell.label,
                kind=cell.kind,
                problem=self.config.problem,
                b_target=self.config.offset_target,
                run=run,
                seed=self.config.seed + run,
                budget=self.config.budget,
                gamma=self.config.gamma,
                alpha=self.config.alpha,
                population_size=self.config.population_size,
                source_archive=source_archive,
                source_state=source_state,
            )
            for run in range(self.config.reps)
        ]

    def _execute(self, tasks: List[RunTask]) -> List[Tuple[Optional[TrialArchive], Optional[str]]]:
        if self.config.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                return list(pool.map(_safe_execute, tasks))
        return [_safe_execute(task) for task in tasks]

    def run(self, write: bool = True) -> RunSummary:
        logger.info(f"🚀 실험 시작 - {len(self.cells())}개 cell × {self.config.reps}회")
        failures: Dict[str, str] = {}
        cell_tasks: Dict[str, List[RunTask]] = {}

        for cell in self.cells():
            try:
                cell_tasks[cell.label] = self._tasks(cell)
            except Exception as e:
                logger.error(f"[{cell.label}] 준비 실패: {e}", exc_info=True)
                failures[cell.label] = f"{type(e).__name__}: {e}"

        flat = [task for tasks in cell_tasks.values() for task in tasks]
        results = iter(self._execute(flat))

        run_logs: Dict[str, List[TrialArchive]] = {}
        for label, tasks in cell_tasks.items():
            outcomes = [next(results) for _ in tasks]
            errors = [error for _, error in outcomes if error is not None]
            if errors:
                logger.error(f"[{label}] 실행 실패: {errors[0]}")
                failures[label] = errors[0]
                continue
            run_logs[label] = [log for log, _ in outcomes]
            logger.info(f"✅ [{label}] {len(tasks)}회 완료")

        summary = summarize(run_logs, failures)
        if write:
            self.write(summary)
        logger.info(f"실험 종료 - 성공 {len(run_logs)}개 cell, 실패 {len(failures)}개 cell")
        return summary

    # ------------------------------------------------------------------ #
    # 저장
    # ------------------------------------------------------------------ #
    def write(self, summary: RunSummary) -> None:
        out = self.config.out
        out.mkdir(parents=True, exist_ok=True)

        for b, archive in sorted(self._source_archives.items()):
            save_archive(archive, out / "sources" / f"source_b{b!r}.archive")
        for b, state in sorted(self._source_states.items()):
            save_state(state, out / "sources" / f"source_b{b!r}.mgd")
        for label, logs in summary.run_logs.items():
            for run, log in enumerate(logs):
                save_archive(log, out / "runs" / label / f"run_{run:03d}.archive")

        write_csv(summary.trajectories, out / "trajectories.csv")
        write_csv(summary.method_stats, out / "summary.csv")
        write_csv(summary.trajectory_summary, out / "trajectory_summary.csv")
        if summary.failures:
            failures = pd.DataFrame(sorted(summary.failures.items()), columns=["method", "error"])
            write_csv(failures, out / "failures.csv")
        logger.info(f"결과 저장 완료 - {out}")


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunSummary:
    """설정 하나로 전체 실험을 실행합니다."""
    return ExperimentRunner(config).run(write=write)
