"""Bloch-representation kinematics for qubit states and two-outcome observables.

Everything here works on real 3-vectors; density and measurement matrices are
never built because every statistic we need reduces to dot products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

NORM_SLACK = 1e-12
UNIT_TOL = 1e-12
DEFAULT_MIRROR_TOL = 1e-9

# apex first; order fixed so the reported permutation is reproducible
MIRROR_PERMUTATIONS: Tuple[Tuple[int, int, int], ...] = ((1, 2, 3), (2, 1, 3), (3, 1, 2))


def _finite_vector(v, name="vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr}")
    return arr


def state_vector(v) -> np.ndarray:
    """Validate a Bloch vector of a state.

    Norms up to ``1 + 1e-12`` are pulled back onto the unit sphere; anything
    further outside the ball is rejected.
    """
    arr = _finite_vector(v, "state Bloch vector")
    norm = float(np.linalg.norm(arr))
    if norm > 1.0 + NORM_SLACK:
        raise ValueError(f"state Bloch vector has norm {norm!r} > 1")
    if norm > 1.0:
        arr = arr / norm
    return arr


def unit_vector(v, tol: float = UNIT_TOL) -> np.ndarray:
    arr = _finite_vector(v, "direction")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"direction must be a unit vector, got norm {norm!r}")
    return arr


@dataclass(frozen=True)
class Observable:
    """Two-outcome observable ``c*I + (1-|c|) m.sigma``.

    ``c = 0`` is a rank-1 projective measurement along ``m``; ``|c| = 1`` is a
    degenerate measurement whose outcome ignores the state.
    """

    c: float
    m: np.ndarray

    def __post_init__(self):
        c = float(self.c)
        if not np.isfinite(c) or abs(c) > 1.0:
            raise ValueError(f"observable bias must lie in [-1, 1], got {self.c!r}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "m", unit_vector(self.m))

    @classmethod
    def projective(cls, m) -> "Observable":
        return cls(0.0, m)


@dataclass(frozen=True)
class ConfigTriple:
    """The three certified preparations."""

    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            object.__setattr__(self, name, state_vector(getattr(self, name)))

    def vectors(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.n1, self.n2, self.n3

    def relabeled(self, order) -> "ConfigTriple":
        """Return the triple whose k-th state is the ``order[k]``-th (1-based) of this one."""
        vs = self.vectors()
        return ConfigTriple(*(vs[i - 1] for i in order))


def expectation(n, obs: Observable) -> float:
    n = state_vector(n)
    value = obs.c + (1.0 - abs(obs.c)) * float(np.dot(n, obs.m))
    return min(1.0, max(-1.0, value))  # |n.m| can round past 1


def born_probability(n, obs: Observable, outcome: int) -> float:
    """Probability of ``outcome`` (0 or 1) when measuring ``obs`` on state ``n``."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    sign = 1.0 if outcome == 0 else -1.0
    return 0.5 * (1.0 + sign * expectation(n, obs))


def trace_distance(n1, n2) -> float:
    a, b = state_vector(n1), state_vector(n2)
    return 0.5 * float(np.linalg.norm(a - b))


def is_mirror_symmetric(
    cfg: ConfigTriple, tol: float = DEFAULT_MIRROR_TOL
) -> Optional[Tuple[int, int, int]]:
    """Return the first apex permutation with equal legs, or ``None`` when asymmetric.

    Legs are compared as squared distances, so ``tol`` applies to squared
    side lengths.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    vs = cfg.vectors()
    for i, j, k in MIRROR_PERMUTATIONS:
        ni, nj, nk = vs[i - 1], vs[j - 1], vs[k - 1]
        dij = float(np.dot(ni - nj, ni - nj))
        dik = float(np.dot(ni - nk, ni - nk))
        if abs(dij - dik) <= tol:
            return (i, j, k)
    return None
