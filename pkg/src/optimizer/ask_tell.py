# src/optimizer/ask_tell.py
"""
Ask/Tell 공통 인터페이스

모든 optimizer (CMA-ES 계열, 랜덤 서치, 고정 분포 샘플러)는 같은 계약을 따릅니다.
    ask()  -> (batch_size, d) 후보 배열
    tell(values) -> 평가값 반영 (적응하지 않는 optimizer 는 무시)
run_optimizer() 는 어떤 optimizer 든 budget 만큼 돌려 동일한 형식의 run log(TrialArchive)를 만듭니다.
"""

from typing import Callable, Protocol, Sequence

import numpy as np

from src.space.archive import Trial, TrialArchive
from src.space.parameter_space import ParameterSpace
from src.utils.logger import get_logger

logger = get_logger(__name__)

Objective = Callable[[np.ndarray], float]


class AskTellOptimizer(Protocol):
    batch_size: int

    def ask(self) -> np.ndarray: ...

    def tell(self, values: Sequence[float]) -> None: ...


def run_optimizer(
    optimizer: AskTellOptimizer,
    objective: Objective,
    budget: int,
    space: ParameterSpace,
    run_id: str = "run",
) -> TrialArchive:
    """
    optimizer 를 budget 번 평가할 때까지 실행합니다.

    마지막 세대가 budget 을 넘으면 남은 개수만 평가하고 tell 하지 않습니다.

    Returns:
        평가 순서대로 기록된 run log
    """
    if budget < 0:
        raise ValueError(f"budget 은 0 이상이어야 합니다: {budget}")

    trials = []
    evaluated = 0
    while evaluated < budget:
        candidates = optimizer.ask()
        batch = candidates[: budget - evaluated]
        values = [float(objective(x)) for x in batch]
        for x, value in zip(batch, values):
            trials.append(Trial(tuple(x), value, run_id, evaluated))
            evaluated += 1
        if len(batch) == len(candidates):
            optimizer.tell(values)

    logger.debug(f"[{run_id}] {evaluated}회 평가 완료")
    return TrialArchive(space, tuple(trials))
