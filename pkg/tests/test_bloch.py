import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymcert.bloch import (
    ConfigTriple,
    Observable,
    born_probability,
    expectation,
    is_mirror_symmetric,
    state_vector,
    trace_distance,
)
from asymcert.witness import TargetTriple

from oracles import born_matrix, random_ball, random_rotation, random_unit

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])

component = st.floats(-1.0, 1.0, allow_nan=False)
vec3 = st.tuples(component, component, component).map(np.array)
balls = vec3.filter(lambda v: np.linalg.norm(v) <= 1.0)
units = vec3.filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


def test_born_examples():
    assert born_probability(Z, Observable(0.0, Z), 0) == 1.0
    assert born_probability(np.zeros(3), Observable(0.0, X), 0) == 0.5
    assert born_probability(X, Observable(0.0, Z), 0) == 0.5


def test_expectation_examples():
    assert expectation(Z, Observable(0.0, -Z)) == -1.0
    assert expectation(np.array([0.3, -0.2, 0.1]), Observable(1.0, X)) == 1.0
    assert expectation([0.6, 0.0, 0.8], Observable(0.0, Z)) == pytest.approx(0.8, abs=1e-15)


def test_born_matches_density_matrix_trace():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n, m, c = random_ball(rng), random_unit(rng), rng.uniform(-1, 1)
        assert born_probability(n, Observable(c, m), 0) == pytest.approx(born_matrix(n, c, m), abs=1e-13)


@given(balls, units, st.floats(-1.0, 1.0))
def test_outcomes_normalize(n, m, c):
    obs = Observable(c, m)
    total = born_probability(n, obs, 0) + born_probability(n, obs, 1)
    assert abs(total - 1.0) <= 1e-15
    assert born_probability(n, obs, 0) - born_probability(n, obs, 1) == pytest.approx(expectation(n, obs), abs=1e-15)


def test_rotation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(100):
        R = random_rotation(rng)
        n, m, c = random_ball(rng), random_unit(rng), rng.uniform(-1, 1)
        before = expectation(n, Observable(c, m))
        after = expectation(R @ n, Observable(c, R @ m))
        assert abs(before - after) <= 1e-12


def test_trace_distance_examples():
    assert trace_distance(Z, -Z) == 1.0
    assert trace_distance(X, X) == 0.0
    assert trace_distance(X, Y) == pytest.approx(math.sqrt(2) / 2)


@settings(max_examples=200)
@given(balls, balls, balls)
def test_trace_distance_metric(a, b, c):
    assert trace_distance(a, b) == trace_distance(b, a)
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-15


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        expectation([np.nan, 0, 0], Observable(0.0, Z))
    with pytest.raises(ValueError):
        state_vector([1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        Observable(1.5, Z)
    with pytest.raises(ValueError):
        Observable(0.0, [0.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        born_probability(Z, Observable(0.0, Z), 2)


def test_tiny_norm_excess_clamped():
    v = state_vector([0.0, 0.0, 1.0 + 5e-13])
    assert np.linalg.norm(v) <= 1.0


def test_mirror_examples():
    trine = [np.array([math.sin(t), 0.0, math.cos(t)]) for t in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
    assert is_mirror_symmetric(ConfigTriple(*trine)) == (1, 2, 3)
    assert is_mirror_symmetric(ConfigTriple(X, Y, -Y)) == (1, 2, 3)
    asym = ConfigTriple(*TargetTriple.from_angles(58.4, 121.6, 180.0).vectors())
    assert is_mirror_symmetric(asym, tol=1e-9) is None


def test_mirror_other_apexes():
    # apex 2: |n2 - n1| = |n2 - n3|
    assert is_mirror_symmetric(ConfigTriple(X, Z, -X)) == (2, 1, 3)
    # apex 3
    assert is_mirror_symmetric(ConfigTriple(X, -X, Z)) == (3, 1, 2)


def test_mirror_relabeling_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        apex = random_unit(rng)
        leg = random_unit(rng)
        # reflect the leg through a plane containing the apex and the origin
        normal = np.cross(apex, random_unit(rng))
        normal /= np.linalg.norm(normal)
        other = leg - 2 * np.dot(leg, normal) * normal
        for layout in ((apex, leg, other), (leg, apex, other), (leg, other, apex)):
            cfg = ConfigTriple(*layout)
            perm = is_mirror_symmetric(cfg)
            assert perm is not None
            assert is_mirror_symmetric(cfg.relabeled(perm)) == (1, 2, 3)
