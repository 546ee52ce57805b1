"""Biased three-preparation witness and the six-preparation witness built from it.

The biased witness on an expectation table ``E`` (rows: preparations 1..3,
columns: measurements 1..2) is::

    I3(w) = w * (E11 + E21 - E31) + (1 - w) * (E12 - E22)

Three copies of it, one per pair of certified states, are summed into the
six-preparation witness whose coefficient matrix is :func:`witness_matrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .bloch import Observable, expectation, state_vector, unit_vector

PAIRS: Tuple[Tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))

# Per pair: (certified i1, certified i2, auxiliary i3, measurement j1, j2), 1-based.
PAIR_LAYOUT = {
    (1, 2): (1, 2, 4, 1, 2),
    (1, 3): (1, 3, 5, 3, 4),
    (2, 3): (2, 3, 6, 5, 6),
}

GRAM_TOL = 1e-10
ALIGN_TOL = 1e-12


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not (0.0 <= omega <= 1.0):
        raise ValueError(f"bias must lie in [0, 1], got {omega!r}")
    return omega


def omega_from_cos(cos_alpha: float) -> float:
    """Bias whose optimal preparations subtend an angle with cosine ``cos_alpha``.

    Uses the conjugate form ``(1+c) / (1+c+sqrt(1-c^2))`` of the root lying in
    [0, 1]; it has no singularity at ``c = 0``.
    """
    c = float(cos_alpha)
    if not math.isfinite(c) or abs(c) > 1.0:
        raise ValueError(f"cosine must lie in [-1, 1], got {cos_alpha!r}")
    if c == -1.0:
        return 0.0
    s = math.sqrt((1.0 - c) * (1.0 + c))
    return (1.0 + c) / (1.0 + c + s)


def cos_from_omega(omega: float) -> float:
    w = _check_omega(omega)
    return (2.0 * w - 1.0) / (w * w + (1.0 - w) ** 2)


def i3_classical_bound(omega: float) -> float:
    w = _check_omega(omega)
    return 2.0 - w if w <= 0.5 else 3.0 * w


def i3_quantum_max(omega: float) -> float:
    w = _check_omega(omega)
    return 2.0 * math.sqrt(w * w + (1.0 - w) ** 2) + w


def i3_conditional_max(omega: float, n1, n2) -> float:
    """Largest I3 value reachable with the certified states ``n1``, ``n2`` held fixed.

    The auxiliary state and both observables are optimized out; traceless
    measurements along ``n1 + n2`` and ``n1 - n2`` attain it.
    """
    w = _check_omega(omega)
    a, b = state_vector(n1), state_vector(n2)
    return w * float(np.linalg.norm(a + b)) + (1.0 - w) * float(np.linalg.norm(a - b)) + w


def i3_value(omega: float, table) -> float:
    """Evaluate I3 on a 3x2 expectation table (auxiliary preparation in row 3)."""
    w = _check_omega(omega)
    E = np.asarray(table, dtype=float)
    if E.shape != (3, 2):
        raise ValueError(f"I3 table must be 3x2, got {E.shape}")
    return w * (E[0, 0] + E[1, 0] - E[2, 0]) + (1.0 - w) * (E[0, 1] - E[1, 1])


def i3_value_on_states(omega: float, states, observables) -> float:
    E = [[expectation(n, obs) for obs in observables] for n in states]
    return i3_value(omega, E)


def optimal_preparations(omega: float, m1, m2):
    """Pure preparations attaining the quantum maximum for orthonormal ``m1``, ``m2``."""
    w = _check_omega(omega)
    m1, m2 = unit_vector(m1), unit_vector(m2)
    if abs(float(np.dot(m1, m2))) > 1e-9:
        raise ValueError("measurement directions must be orthogonal")
    norm = math.sqrt(w * w + (1.0 - w) ** 2)
    n1 = (w * m1 + (1.0 - w) * m2) / norm
    n2 = (w * m1 - (1.0 - w) * m2) / norm
    return state_vector(n1), state_vector(n2), -m1


@dataclass(frozen=True)
class TargetTriple:
    """Pairwise cosines of three unit target Bloch vectors."""

    cos12: float
    cos13: float
    cos23: float

    def __post_init__(self):
        cs = []
        for name in ("cos12", "cos13", "cos23"):
            c = float(getattr(self, name))
            if not math.isfinite(c) or abs(c) > 1.0 + ALIGN_TOL:
                raise ValueError(f"{name} must lie in [-1, 1], got {c!r}")
            c = min(1.0, max(-1.0, c))
            object.__setattr__(self, name, c)
            cs.append(c)
        if min(np.linalg.eigvalsh(self.gram())) < -GRAM_TOL:
            raise ValueError(f"cosines {tuple(cs)} are not realizable by three unit vectors")
        if any(c >= 1.0 - ALIGN_TOL for c in cs):
            raise ValueError("degenerate target: two target states coincide")
        if sum(c <= -1.0 + ALIGN_TOL for c in cs) > 1:
            raise ValueError("degenerate target: more than one antipodal pair")

    @classmethod
    def from_angles(cls, a12: float, a13: float, a23: float) -> "TargetTriple":
        """Build from pairwise angles in degrees; reflex angles are accepted."""
        return cls(*(math.cos(math.radians(a)) for a in (a12, a13, a23)))

    def cosines(self) -> Tuple[float, float, float]:
        return (self.cos12, self.cos13, self.cos23)

    def angles(self) -> Tuple[float, float, float]:
        """Pairwise angles in degrees, folded into [0, 180]."""
        return tuple(math.degrees(math.acos(c)) for c in self.cosines())

    def gram(self) -> np.ndarray:
        return np.array(
            [
                [1.0, self.cos12, self.cos13],
                [self.cos12, 1.0, self.cos23],
                [self.cos13, self.cos23, 1.0],
            ]
        )

    def vectors(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unit vectors realizing the cosines, from an eigendecomposition of the Gram matrix."""
        vals, vecs = np.linalg.eigh(self.gram())
        rows = vecs * np.sqrt(np.clip(vals, 0.0, None))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        return rows[0], rows[1], rows[2]


def witness_matrix(omega12: float, omega13: float, omega23: float) -> np.ndarray:
    """6x6 coefficients; rows are preparations 1..6, columns measurements 1..6."""
    W = np.zeros((6, 6))
    for (i, j), w in zip(PAIRS, (omega12, omega13, omega23)):
        w = _check_omega(w)
        i1, i2, i3, j1, j2 = (idx - 1 for idx in PAIR_LAYOUT[(i, j)])
        W[i1, j1] += w
        W[i2, j1] += w
        W[i3, j1] -= w
        W[i1, j2] += 1.0 - w
        W[i2, j2] -= 1.0 - w
    return W


@dataclass(frozen=True)
class WitnessSpec:
    omega12: float
    omega13: float
    omega23: float
    W: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("omega12", "omega13", "omega23"):
            object.__setattr__(self, name, _check_omega(getattr(self, name)))
        W = witness_matrix(self.omega12, self.omega13, self.omega23)
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    def omegas(self) -> Tuple[float, float, float]:
        return (self.omega12, self.omega13, self.omega23)

    def pair_mask(self, pair) -> np.ndarray:
        """Boolean 6x6 mask of the cells belonging to one pair's I3 term."""
        i1, i2, i3, j1, j2 = (idx - 1 for idx in PAIR_LAYOUT[tuple(pair)])
        mask = np.zeros((6, 6), dtype=bool)
        mask[[i1, i2, i3], j1] = True
        mask[[i1, i2], j2] = True
        return mask


def build_witness(target: TargetTriple) -> WitnessSpec:
    return WitnessSpec(*(omega_from_cos(c) for c in target.cosines()))


def i6_value(spec: WitnessSpec, table) -> float:
    E = np.asarray(table, dtype=float)
    if E.shape != (6, 6):
        raise ValueError(f"expectation table must be 6x6, got {E.shape}")
    used = spec.W != 0.0
    if np.any(np.isnan(E[used])):
        raise ValueError("expectation table has nan in a cell the witness uses")
    # unused cells may legitimately hold nan
    return float(np.sum(spec.W[used] * E[used]))


def pair_values(spec: WitnessSpec, table) -> Tuple[float, float, float]:
    """I3 contribution of each pair (12), (13), (23)."""
    E = np.asarray(table, dtype=float)
    values = []
    for p in PAIRS:
        mask = spec.pair_mask(p)
        values.append(float(np.sum(spec.W[mask] * E[mask])))
    return tuple(values)


def q_max(spec: WitnessSpec) -> float:
    return sum(i3_quantum_max(w) for w in spec.omegas())


def expectation_table(preparations, observables) -> np.ndarray:
    """6x6 table of expectations for six states and six :class:`Observable` s."""
    if len(preparations) != 6 or len(observables) != 6:
        raise ValueError("need six preparations and six observables")
    for obs in observables:
        if not isinstance(obs, Observable):
            raise TypeError("observables must be Observable instances")
    return np.array([[expectation(n, obs) for obs in observables] for n in preparations])
