# src/bench/problems.py
"""
Synthetic Problems

[0,1]² 위의 offset 계열 벤치마크 함수들입니다.
- sphere:            (x₁ − b)² + (x₂ − b)²
- rotated ellipsoid: f_ell(R·x),  f_ell(y) = (y₁ − b)² + 5²(y₂ − b)²,  R = 원점 기준 π/6 반시계 회전
source / target task 는 offset b 만 다르게 해서 만듭니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from src.space.parameter_space import ParameterSpace
from src.utils.logger import get_logger

logger = get_logger(__name__)

ROTATION_ANGLE = math.pi / 6
ELLIPSOID_COEFFICIENT = 5.0 ** 2
ROTATION = np.array(
    [
        [math.cos(ROTATION_ANGLE), -math.sin(ROTATION_ANGLE)],
        [math.sin(ROTATION_ANGLE), math.cos(ROTATION_ANGLE)],
    ]
)


class ProblemKind(str, Enum):
    SPHERE = "sphere"
    ROTATED_ELLIPSOID = "rotated_ellipsoid"


def sphere(x, b: float) -> float:
    x = np.asarray(x, dtype=float)
    return float((x[0] - b) ** 2 + (x[1] - b) ** 2)


def rotated_ellipsoid(x, b: float) -> float:
    y = ROTATION @ np.asarray(x, dtype=float)
    return float((y[0] - b) ** 2 + ELLIPSOID_COEFFICIENT * (y[1] - b) ** 2)


def monotone_wrap(f: Callable, g: Callable[[float], float]) -> Callable:
    """x ↦ g(f(x)). g 가 단조 증가면 순위 기반 optimizer 의 궤적은 바뀌지 않습니다."""

    def wrapped(x):
        return g(f(x))

    return wrapped


_FUNCTIONS = {
    ProblemKind.SPHERE: sphere,
    ProblemKind.ROTATED_ELLIPSOID: rotated_ellipsoid,
}


@dataclass(frozen=True)
class SyntheticProblem:
    """
    offset b 를 가진 2차원 합성 문제. 최적해가 [0,1]² 밖으로 나가는 offset 은 거부합니다.

    Example:
        >>> problem = SyntheticProblem("sphere", 0.6)
        >>> problem([0.6, 0.6])
        0.0
    """

    kind: ProblemKind
    b: float
    space: ParameterSpace = field(default_factory=lambda: ParameterSpace.unit(2), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind(self.kind))
        object.__setattr__(self, "b", float(self.b))
        optimum = self.minimizer
        if not np.all((optimum >= 0.0) & (optimum <= 1.0)):
            raise ValueError(
                f"{self.kind.value}(b={self.b}) 의 최적해 {np.round(optimum, 4).tolist()} 가 [0,1]² 밖에 있습니다."
            )

    @property
    def dimension(self) -> int:
        return 2

    @property
    def minimizer(self) -> np.ndarray:
        offset = np.array([self.b, self.b])
        if self.kind is ProblemKind.ROTATED_ELLIPSOID:
            return ROTATION.T @ offset
        return offset

    @property
    def label(self) -> str:
        return f"{self.kind.value}(b={self.b})"

    def __call__(self, u) -> float:
        x = self.space.to_external_vector(u)
        return _FUNCTIONS[self.kind](x, self.b)
