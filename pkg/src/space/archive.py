# src/space/archive.py

"""
Trial Archive Module

평가된 점(trial)들을 모아 두는 archive 와 그 텍스트 파일 입출력을 담당합니다.
source task 의 평가 기록과 각 최적화 run 의 로그가 모두 이 형식을 씁니다.

파일 형식 (UTF-8):
    #ws-archive v1 d=<dim>
    #space <name>:<scale>:<lower>:<upper>:<int-flag>;...
    <run_id>,<eval_index>,<u_1>,...,<u_d>,<value>
실수는 repr() 로 저장하므로 (shortest round-trip) 읽고 다시 쓰면 바이트 단위로 동일합니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.space.parameter_space import ParameterSpace, ParamSpec
from src.utils.errors import ArchiveFormatError
from src.utils.logger import get_logger

logger = get_logger(__name__)

ARCHIVE_MAGIC = "#ws-archive"
ARCHIVE_VERSION = "v1"
PathLike = Union[str, Path]


@dataclass(frozen=True)
class Trial:
    """평가된 점 하나. value 는 작을수록 좋습니다."""

    unit_point: Tuple[float, ...]
    value: float
    run_id: str = "source"
    eval_index: int = 0

    def __post_init__(self):
        point = tuple(float(u) for u in self.unit_point)
        object.__setattr__(self, "unit_point", point)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "eval_index", int(self.eval_index))
        if not all(0.0 <= u <= 1.0 for u in point):
            raise ValueError(f"unit_point 는 [0,1]^d 안에 있어야 합니다: {point}")
        if not math.isfinite(self.value):
            raise ValueError(f"value 는 유한해야 합니다: {self.value}")
        if not self.run_id or any(ch in self.run_id for ch in ",\n"):
            raise ValueError(f"run_id 가 올바르지 않습니다: {self.run_id!r}")

    @property
    def point(self) -> np.ndarray:
        return np.array(self.unit_point)


@dataclass(frozen=True)
class TrialArchive:
    """ParameterSpace 와 그 위에서 평가된 Trial 목록 (평가 순서 유지)."""

    space: ParameterSpace
    trials: Tuple[Trial, ...] = field(default_factory=tuple)

    def __post_init__(self):
        trials = tuple(self.trials)
        object.__setattr__(self, "trials", trials)
        for trial in trials:
            if len(trial.unit_point) != self.space.dimension:
                raise ValueError(
                    f"trial 차원({len(trial.unit_point)})이 archive 차원({self.space.dimension})과 다릅니다."
                )

    def __len__(self) -> int:
        return len(self.trials)

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def points(self) -> np.ndarray:
        if not self.trials:
            return np.empty((0, self.dimension))
        return np.array([trial.unit_point for trial in self.trials])

    def values(self) -> np.ndarray:
        return np.array([trial.value for trial in self.trials], dtype=float)


def best_seen(archive: TrialArchive) -> Tuple[np.ndarray, float]:
    """
    run 전체에서 가장 작은 평가값과 그 점을 반환합니다.
    동률이면 먼저 평가된 trial 이 이깁니다.
    """
    if not archive.trials:
        raise ValueError("평가 기록이 비어 있습니다.")
    index = int(np.argmin(archive.values()))
    best = archive.trials[index]
    return best.point, best.value


def best_so_far(values: Sequence[float]) -> np.ndarray:
    """평가 순서별 누적 최솟값 (비증가 수열)."""
    return np.minimum.accumulate(np.asarray(values, dtype=float))


# ---------------------------------------------------------------------- #
# 직렬화
# ---------------------------------------------------------------------- #
def _format_real(value: float) -> str:
    return repr(float(value))


def _format_space(space: ParameterSpace) -> str:
    parts = [
        f"{spec.name}:{spec.scale.value}:{_format_real(spec.lower)}:{_format_real(spec.upper)}:{int(spec.integer)}"
        for spec in space.specs
    ]
    return "#space " + ";".join(parts)


def save_archive(archive: TrialArchive, destination: PathLike) -> None:
    """archive 를 텍스트 파일로 저장합니다. load_archive 와 정확히 왕복됩니다."""
    path = Path(destination)
    lines = [
        f"{ARCHIVE_MAGIC} {ARCHIVE_VERSION} d={archive.dimension}",
        _format_space(archive.space),
    ]
    for trial in archive.trials:
        fields = [trial.run_id, str(trial.eval_index)]
        fields.extend(_format_real(u) for u in trial.unit_point)
        fields.append(_format_real(trial.value))
        lines.append(",".join(fields))

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        logger.error(f"archive 저장 실패: {path} ({e})")
        raise
    logger.info(f"archive 저장 완료 - {path} ({len(archive)}개 trial, d={archive.dimension})")


def _parse_header(line: str) -> int:
    parts = line.split()
    if len(parts) != 3 or parts[0] != ARCHIVE_MAGIC or not parts[2].startswith("d="):
        raise ArchiveFormatError(f"archive 헤더가 아닙니다: {line!r}", 1)
    if parts[1] != ARCHIVE_VERSION:
        raise ArchiveFormatError(f"지원하지 않는 버전입니다: {parts[1]}", 1)
    try:
        return int(parts[2][2:])
    except ValueError:
        raise ArchiveFormatError(f"차원 값이 올바르지 않습니다: {parts[2]}", 1) from None


def _parse_space(line: str, dimension: int) -> ParameterSpace:
    if not line.startswith("#space "):
        raise ArchiveFormatError("#space 줄이 필요합니다.", 2)
    specs: List[ParamSpec] = []
    try:
        for token in line[len("#space "):].split(";"):
            name, scale, lower, upper, int_flag = token.split(":")
            if int_flag not in ("0", "1"):
                raise ValueError(f"int-flag 는 0/1 이어야 합니다: {int_flag}")
            specs.append(ParamSpec(name, scale, float(lower), float(upper), int_flag == "1"))
        space = ParameterSpace(tuple(specs))
    except ValueError as e:
        raise ArchiveFormatError(f"#space 파싱 실패: {e}", 2) from None
    if space.dimension != dimension:
        raise ArchiveFormatError(f"#space 차원({space.dimension})이 헤더 d={dimension} 와 다릅니다.", 2)
    return space


def _parse_record(line: str, dimension: int, line_number: int) -> Trial:
    fields = line.split(",")
    if len(fields) != dimension + 3:
        raise ArchiveFormatError(
            f"필드 수 {len(fields)} (기대 {dimension + 3}) - 차원이 일치하지 않습니다.", line_number
        )
    run_id, eval_index = fields[0], fields[1]
    try:
        index = int(eval_index)
        coords = [float(token) for token in fields[2:-1]]
        value = float(fields[-1])
    except ValueError:
        raise ArchiveFormatError(f"숫자가 아닌 필드가 있습니다: {line!r}", line_number) from None
    try:
        return Trial(tuple(coords), value, run_id, index)
    except ValueError as e:
        raise ArchiveFormatError(str(e), line_number) from None


def load_archive(source: PathLike) -> TrialArchive:
    """
    save_archive 형식의 파일을 읽어 TrialArchive 를 만듭니다 (파일 순서 유지).

    Raises:
        ArchiveFormatError: 헤더/레코드 형식 오류, 범위 밖 좌표, 차원 불일치 (줄 번호 포함)
    """
    path = Path(source)
    lines = path.read_text(encoding="utf-8").splitlines()
    if len(lines) < 2:
        raise ArchiveFormatError("헤더 두 줄이 필요합니다.", len(lines) + 1)

    dimension = _parse_header(lines[0])
    space = _parse_space(lines[1], dimension)

    trials = [
        _parse_record(line, dimension, line_number)
        for line_number, line in enumerate(lines[2:], start=3)
        if line.strip()
    ]
    logger.info(f"archive 로드 완료 - {path} ({len(trials)}개 trial, d={dimension})")
    return TrialArchive(space, tuple(trials))
