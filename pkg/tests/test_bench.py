import math

import numpy as np
import pytest

from src.bench.problems import ROTATION, SyntheticProblem, monotone_wrap, rotated_ellipsoid, sphere


def test_sphere_values():
    assert sphere([0.6, 0.6], 0.6) == 0.0
    assert sphere([0.0, 0.0], 0.6) == pytest.approx(0.72)
    assert sphere([0.5, 0.5], 0.6) == pytest.approx(0.02)


def test_rotated_ellipsoid_values():
    assert rotated_ellipsoid([0.0, 0.0], 0.0) == 0.0
    assert rotated_ellipsoid([1.0, 0.0], 0.0) == pytest.approx(7.0)
    # y = R·(1, 0) = (cos π/6, sin π/6)
    np.testing.assert_allclose(ROTATION @ [1.0, 0.0], [math.cos(math.pi / 6), math.sin(math.pi / 6)])


@pytest.mark.parametrize("b", [0.3, 0.5, 0.6, 0.7])
def test_rotated_ellipsoid_minimizer(b):
    problem = SyntheticProblem("rotated_ellipsoid", b)
    assert problem(problem.minimizer) == pytest.approx(0.0, abs=1e-28)
    np.testing.assert_allclose(problem.minimizer, ROTATION.T @ [b, b])


def test_offsets_with_minimizer_outside_box_rejected():
    with pytest.raises(ValueError):
        SyntheticProblem("rotated_ellipsoid", 0.8)
    with pytest.raises(ValueError):
        SyntheticProblem("sphere", 1.2)
    assert SyntheticProblem("sphere", 0.8).label == "sphere(b=0.8)"


def test_monotone_wrap():
    f = lambda x: sphere(x, 0.6)
    points = np.random.default_rng(0).random((20, 2))
    assert [monotone_wrap(f, lambda v: v)(x) for x in points] == [f(x) for x in points]
    wrapped = [monotone_wrap(f, lambda v: 2 * v + 1)(x) for x in points]
    assert int(np.argmin(wrapped)) == int(np.argmin([f(x) for x in points]))
