# src/runner/experiment_config.py
"""
Experiment Config

`key=value` 텍스트 파일과 CLI 인자를 합쳐 ExperimentConfig 를 만듭니다.

    # 예시 (experiment.cfg)
    problem=sphere
    offset_source=0.4,0.5,0.6,0.7,0.8
    offset_target=0.6
    methods=cma,ws_cma
    budget=50
    reps=20
    seed=0
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from src.baselines.optimizers import OptimizerKind, SourceMethod
from src.bench.problems import ProblemKind, SyntheticProblem
from src.utils.config import Config
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    한 번의 실험 설정. run k 의 시드는 seed + k 입니다.

    None 인 필드는 기본값을 따릅니다: source_method 는 Config.DEFAULT_SOURCE_METHOD,
    source_seed 는 seed, reuse_source_budget 은 budget.
    """

    problem: ProblemKind = ProblemKind.SPHERE
    offset_source: Tuple[float, ...] = (0.6,)
    offset_target: float = 0.6
    methods: Tuple[OptimizerKind, ...] = (OptimizerKind.CMA, OptimizerKind.WS_CMA)
    budget: int = Config.DEFAULT_BUDGET
    reps: int = Config.DEFAULT_REPETITIONS
    seed: int = Config.DEFAULT_SEED
    gamma: float = Config.DEFAULT_GAMMA
    alpha: float = Config.DEFAULT_ALPHA
    population_size: int = Config.DEFAULT_POPULATION_SIZE
    source_count: int = Config.DEFAULT_SOURCE_SIZE
    source_method: Optional[SourceMethod] = None
    source_seed: Optional[int] = None
    source_archive: Optional[Path] = None
    reuse_source_budget: Optional[int] = None
    similarity_gamma1: float = Config.DEFAULT_GAMMA
    similarity_gamma2: float = Config.DEFAULT_GAMMA
    mc_samples: int = Config.DEFAULT_MC_SAMPLES
    prior: str = "gaussian"
    similarity_points: int = Config.SIMILARITY_ARCHIVE_SIZE
    out: Path = Config.OUTPUT_DIR
    jobs: int = Config.DEFAULT_JOBS

    def __post_init__(self):
        object.__setattr__(self, "problem", ProblemKind(self.problem))
        object.__setattr__(self, "methods", tuple(OptimizerKind(m) for m in self.methods))
        object.__setattr__(self, "offset_source", tuple(float(b) for b in self.offset_source))
        object.__setattr__(self, "out", Path(self.out))
        if self.source_method is not None:
            object.__setattr__(self, "source_method", SourceMethod(self.source_method))
        self.validate()

    @property
    def effective_source_method(self) -> SourceMethod:
        if self.source_method is None:
            return SourceMethod(Config.DEFAULT_SOURCE_METHOD)
        return self.source_method

    @property
    def effective_source_seed(self) -> int:
        return self.seed if self.source_seed is None else self.source_seed

    @property
    def effective_reuse_budget(self) -> int:
        return self.budget if self.reuse_source_budget is None else self.reuse_source_budget

    def problem_at(self, b: float) -> SyntheticProblem:
        return SyntheticProblem(self.problem, b)

    def validate(self):
        if self.reps < 1:
            raise ConfigError(f"reps 는 1 이상이어야 합니다: {self.reps}")
        if self.budget < 1:
            raise ConfigError(f"budget 은 1 이상이어야 합니다: {self.budget}")
        if self.population_size < 2:
            raise ConfigError(f"lambda 는 2 이상이어야 합니다: {self.population_size}")
        if any(kind.is_cma for kind in self.methods) and self.budget < self.population_size:
            raise ConfigError(f"CMA 계열은 budget({self.budget}) ≥ lambda({self.population_size}) 가 필요합니다.")
        if not self.methods:
            raise ConfigError("methods 가 비어 있습니다.")
        if not self.offset_source:
            raise ConfigError("offset_source 가 비어 있습니다.")
        if self.source_count < 1 or self.similarity_points < 1 or self.mc_samples < 1:
            raise ConfigError("source_count / similarity_points / mc_samples 는 1 이상이어야 합니다.")
        if self.jobs < 1:
            raise ConfigError(f"jobs 는 1 이상이어야 합니다: {self.jobs}")
        if self.prior not in ("gaussian", "uniform"):
            raise ConfigError(f"prior 는 gaussian / uniform 중 하나여야 합니다: {self.prior}")
        for b in (*self.offset_source, self.offset_target):
            try:
                self.problem_at(b)
            except ValueError as e:
                raise ConfigError(str(e)) from None


def _floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(token) for token in raw.split(",") if token.strip())


def _methods(raw: str) -> Tuple[OptimizerKind, ...]:
    return tuple(OptimizerKind(token.strip()) for token in raw.split(",") if token.strip())


def _optional_int(raw: str) -> Optional[int]:
    return None if raw.strip().lower() in ("", "none") else int(raw)


def _optional_path(raw: str) -> Optional[Path]:
    return None if raw.strip().lower() in ("", "none") else Path(raw.strip())


# 설정 파일 키 → (dataclass 필드, 변환 함수)
_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "problem": ("problem", lambda raw: ProblemKind(raw.strip())),
    "offset_source": ("offset_source", _floats),
    "offset_target": ("offset_target", float),
    "methods": ("methods", _methods),
    "method": ("methods", _methods),
    "budget": ("budget", int),
    "reps": ("reps", int),
    "seed": ("seed", int),
    "gamma": ("gamma", float),
    "alpha": ("alpha", float),
    "lambda": ("population_size", int),
    "source_count": ("source_count", int),
    "source_method": ("source_method", lambda raw: SourceMethod(raw.strip())),
    "source_seed": ("source_seed", _optional_int),
    "source_archive": ("source_archive", _optional_path),
    "reuse_source_budget": ("reuse_source_budget", _optional_int),
    "similarity_gamma1": ("similarity_gamma1", float),
    "similarity_gamma2": ("similarity_gamma2", float),
    "mc_samples": ("mc_samples", int),
    "prior": ("prior", str.strip),
    "similarity_points": ("similarity_points", int),
    "out": ("out", lambda raw: Path(raw.strip())),
    "jobs": ("jobs", int),
}


def parse_key_values(text: str) -> Dict[str, str]:
    """`key=value` 줄들을 읽습니다. `#` 주석과 빈 줄은 무시합니다."""
    entries: Dict[str, str] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ConfigError(f"line {line_number}: key=value 형식이 아닙니다: {line!r}")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _coerce(entries: Mapping[str, str]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for key, raw in entries.items():
        if key not in _KEYS:
            raise ConfigError(f"알 수 없는 설정 키입니다: {key}")
        field_name, convert = _KEYS[key]
        try:
            values[field_name] = convert(raw)
        except ValueError as e:
            raise ConfigError(f"{key}={raw!r} 값이 올바르지 않습니다: {e}") from None
    return values


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, str]] = None,
    base: Optional[ExperimentConfig] = None,
) -> ExperimentConfig:
    """
    설정 파일(선택)을 읽고 CLI override 를 덮어써 ExperimentConfig 를 만듭니다.

    Raises:
        ConfigError: 파일 없음, 알 수 없는 키, 잘못된 값, 검증 실패
    """
    entries: Dict[str, str] = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"설정 파일을 찾을 수 없습니다: {config_path}")
        entries.update(parse_key_values(config_path.read_text(encoding="utf-8")))
    entries.update({key.replace("-", "_"): value for key, value in (overrides or {}).items() if value is not None})

    values = _coerce(entries)
    config = replace(base or ExperimentConfig(), **values)
    logger.info(
        f"실험 설정 - problem={config.problem.value}, offsets={list(config.offset_source)}, "
        f"target={config.offset_target}, methods={[m.value for m in config.methods]}, "
        f"budget={config.budget}, reps={config.reps}, seed={config.seed}"
    )
    return config
