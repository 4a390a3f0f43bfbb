# src/space/parameter_space.py
"""
Parameter Space

최적화는 항상 단위 큐브 [0,1]^d 위에서 이루어지고,
사용자에게 보이는 파라미터 값(linear / log / integer)은 경계에서만 변환합니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from src.utils.logger import get_logger

logger = get_logger(__name__)

ExternalValue = Union[float, int]


class Scale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class ParamSpec:
    """하나의 하이퍼파라미터 정의 (이름, 스케일, 범위, 정수 여부)."""

    name: str
    scale: Scale = Scale.LINEAR
    lower: float = 0.0
    upper: float = 1.0
    integer: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scale", Scale(self.scale))
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if not self.name or any(ch in self.name for ch in ":;,\n"):
            raise ValueError(f"파라미터 이름이 올바르지 않습니다: {self.name!r}")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"{self.name}: 범위는 유한해야 합니다.")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower({self.lower}) < upper({self.upper}) 이어야 합니다.")
        if self.scale is Scale.LOG and self.lower <= 0:
            raise ValueError(f"{self.name}: log 스케일은 lower > 0 이 필요합니다.")

    def scale_value(self, u: float) -> ExternalValue:
        """단위 좌표 u 를 외부 값으로 변환합니다. u ∈ {0, 1} 은 정확히 범위 끝점으로 보냅니다."""
        if u == 0.0:
            value = self.lower
        elif u == 1.0:
            value = self.upper
        elif self.scale is Scale.LOG:
            log_lower, log_upper = math.log(self.lower), math.log(self.upper)
            value = math.exp(log_lower + u * (log_upper - log_lower))
        else:
            value = self.lower + u * (self.upper - self.lower)

        if self.integer:
            return round_half_away_from_zero(value)
        return value


def round_half_away_from_zero(value: float) -> int:
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


@dataclass(frozen=True)
class ParameterSpace:
    """순서가 있는 ParamSpec 목록. 차원 d = len(specs)."""

    specs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        specs = tuple(self.specs)
        object.__setattr__(self, "specs", specs)
        if len(specs) < 1:
            raise ValueError("ParameterSpace 는 최소 1개의 파라미터가 필요합니다.")
        names = [spec.name for spec in specs]
        if len(set(names)) != len(names):
            raise ValueError(f"파라미터 이름이 중복되었습니다: {names}")

    @classmethod
    def unit(cls, dimension: int, prefix: str = "x") -> "ParameterSpace":
        """[0,1]^d 항등 공간 (합성 벤치마크용)."""
        return cls(tuple(ParamSpec(f"{prefix}{i + 1}") for i in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.specs)

    @property
    def names(self) -> List[str]:
        return [spec.name for spec in self.specs]

    def validate_point(self, u: Iterable[float]) -> np.ndarray:
        point = np.asarray(u, dtype=float)
        if point.shape != (self.dimension,):
            raise ValueError(f"차원 불일치: 기대 {self.dimension}, 입력 {point.shape}")
        if not np.all((point >= 0.0) & (point <= 1.0)):
            raise ValueError(f"단위 큐브 [0,1]^d 밖의 좌표입니다: {point.tolist()}")
        return point

    def to_external(self, u: Sequence[float]) -> Dict[str, ExternalValue]:
        point = self.validate_point(u)
        return {spec.name: spec.scale_value(float(ui)) for spec, ui in zip(self.specs, point)}

    def to_external_vector(self, u: Sequence[float]) -> np.ndarray:
        return np.array(list(self.to_external(u).values()), dtype=float)


def to_external(space: ParameterSpace, u: Sequence[float]) -> Dict[str, ExternalValue]:
    """
    단위 좌표를 사용자 파라미터 값으로 변환합니다.

    - linear: lower + u·(upper − lower)
    - log: exp(ln lower + u·(ln upper − ln lower))
    - integer: 스케일 변환 후 반올림 (0.5 는 0 에서 먼 쪽으로)

    Example:
        >>> space = ParameterSpace((ParamSpec("lr", "log", 1e-3, 1.0),))
        >>> to_external(space, [0.5])["lr"]  # ≈ 0.0316
    """
    return space.to_external(u)
