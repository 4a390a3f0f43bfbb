# tests/conftest.py
import os
import tempfile

# 로거가 import 시점에 로그 디렉터리를 만들기 때문에 테스트 모듈 import 전에 설정
os.environ.setdefault("LOGS_DIR", tempfile.mkdtemp(prefix="ws-cmaes-logs-"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from src.bench.problems import SyntheticProblem  # noqa: E402
from src.baselines.optimizers import random_search  # noqa: E402
from src.space.archive import Trial, TrialArchive  # noqa: E402
from src.space.parameter_space import ParameterSpace  # noqa: E402


@pytest.fixture
def unit_space():
    return ParameterSpace.unit(2)


@pytest.fixture
def sphere_source():
    """sphere(b=0.6) 에 랜덤 서치 100회를 돌린 source archive"""
    problem = SyntheticProblem("sphere", 0.6)
    return random_search(problem.space, problem, 100, seed=0, run_id="source")


def _make_archive(points, values, space=None):
    points = np.asarray(points, dtype=float)
    space = space or ParameterSpace.unit(points.shape[1])
    trials = tuple(Trial(tuple(p), v, "source", i) for i, (p, v) in enumerate(zip(points, values)))
    return TrialArchive(space, trials)


@pytest.fixture
def make_archive():
    """(points, values) → TrialArchive 팩토리"""
    return _make_archive

