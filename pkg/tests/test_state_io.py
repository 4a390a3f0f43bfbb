import numpy as np
import pytest

from src.bench.problems import SyntheticProblem
from src.optimizer.cmaes import CMAOptimizer, CmaConfig
from src.optimizer.state_io import load_state, save_state
from src.utils.errors import ArchiveFormatError, InvalidDistributionError


def _advance(optimizer, problem, generations):
    for _ in range(generations):
        candidates = optimizer.ask()
        optimizer.tell([problem(x) for x in candidates])


def test_round_trip_preserves_state_exactly(tmp_path):
    problem = SyntheticProblem("rotated_ellipsoid", 0.5)
    optimizer = CMAOptimizer.default(2, CmaConfig(seed=4))
    _advance(optimizer, problem, 5)

    path = tmp_path / "state.mgd"
    save_state(optimizer.state, path)
    loaded = load_state(path)

    np.testing.assert_array_equal(loaded.mean, optimizer.state.mean)
    assert loaded.sigma == optimizer.state.sigma
    np.testing.assert_array_equal(loaded.C, optimizer.state.C)
    np.testing.assert_array_equal(loaded.p_sigma, optimizer.state.p_sigma)
    np.testing.assert_array_equal(loaded.p_c, optimizer.state.p_c)
    assert loaded.generation == 5


def test_deserialized_state_continues_identically(tmp_path):
    problem = SyntheticProblem("sphere", 0.3)
    config = CmaConfig(seed=9)
    original = CMAOptimizer.default(2, config)
    _advance(original, problem, 3)

    path = tmp_path / "state.mgd"
    save_state(original.state, path)
    restored = CMAOptimizer(load_state(path), config)

    for _ in range(4):
        a, b = original.ask(), restored.ask()
        np.testing.assert_array_equal(a, b)
        values = [problem(x) for x in a]
        original.tell(values)
        restored.tell(values)


def test_minimal_file_without_paths(tmp_path):
    path = tmp_path / "minimal.mgd"
    path.write_text("#ws-mgd v1 d=2\nm=0.5,0.5\nsigma=0.2\nC=\n1.0,0.0\n0.0,1.0\n", encoding="utf-8")
    state = load_state(path)
    np.testing.assert_array_equal(state.p_sigma, np.zeros(2))
    assert state.generation == 0


@pytest.mark.parametrize(
    "body, error",
    [
        ("#ws-mgd v1 d=x\n", ArchiveFormatError),
        ("#ws-mgd v1 d=2\nm=0.5\nsigma=0.2\nC=\n1.0,0.0\n0.0,1.0\n", ArchiveFormatError),
        ("#ws-mgd v1 d=2\nm=0.5,0.5\nsigma=-1\nC=\n1.0,0.0\n0.0,1.0\n", ArchiveFormatError),
        ("#ws-mgd v1 d=2\nm=0.5,0.5\nsigma=0.2\nC=\n1.0,0.0\n", ArchiveFormatError),
        ("#ws-mgd v1 d=2\nm=0.5,0.5\nsigma=0.2\nC=\n1.0,2.0\n2.0,1.0\n", InvalidDistributionError),
    ],
)
def test_malformed_files_rejected(tmp_path, body, error):
    path = tmp_path / "bad.mgd"
    path.write_text(body, encoding="utf-8")
    with pytest.raises(error):
        load_state(path)
