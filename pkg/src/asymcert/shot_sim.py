"""Finite-shot simulation of the six-preparation experiment.

Each (preparation, measurement) cell is an independent binomial experiment
with its own random stream derived from ``(seed, x, y)``, so the counts do
not depend on the order in which cells are sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .bloch import Observable, born_probability, state_vector
from .witness import PAIRS, TargetTriple, WitnessSpec, i6_value, pair_values


@dataclass(frozen=True)
class Scenario:
    preparations: Tuple[np.ndarray, ...]
    observables: Tuple[Observable, ...]

    def __post_init__(self):
        if len(self.preparations) != 6 or len(self.observables) != 6:
            raise ValueError("a scenario has six preparations and six observables")
        object.__setattr__(self, "preparations", tuple(state_vector(n) for n in self.preparations))
        for obs in self.observables:
            if not isinstance(obs, Observable):
                raise TypeError("observables must be Observable instances")
        object.__setattr__(self, "observables", tuple(self.observables))

    def depolarized(self, p: float) -> "Scenario":
        return Scenario(tuple((1.0 - p) * n for n in self.preparations), self.observables)

    def probabilities(self) -> np.ndarray:
        """6x6 table of P(outcome 0 | x, y)."""
        return np.array([[born_probability(n, obs, 0) for obs in self.observables]
                         for n in self.preparations])

    def expectations(self) -> np.ndarray:
        return 2.0 * self.probabilities() - 1.0


@dataclass(frozen=True)
class ShotPlan:
    shots_per_pair: int = 8192
    seed: int = 0
    depolarizing_p: float = 0.0
    full_table: bool = False

    def __post_init__(self):
        if int(self.shots_per_pair) < 1:
            raise ValueError("shots_per_pair must be >= 1")
        if not (0.0 <= self.depolarizing_p <= 1.0):
            raise ValueError("depolarizing_p must lie in [0, 1]")


@dataclass
class ShotResult:
    counts: np.ndarray  # (6, 6, 2) outcome-0 / outcome-1 counts; zeros where not sampled
    sampled: np.ndarray  # (6, 6) bool
    empirical_E: np.ndarray  # nan where not sampled
    i6_estimate: float
    sigma: float
    per_pair_i3: Tuple[float, float, float]
    exact_i6: float
    shots: int

    def to_dict(self) -> dict:
        return {
            "shots_per_cell": self.shots,
            "counts_outcome0": self.counts[..., 0].tolist(),
            "counts_outcome1": self.counts[..., 1].tolist(),
            "sampled": self.sampled.tolist(),
            "empirical_E": [[None if np.isnan(v) else float(v) for v in row] for row in self.empirical_E],
            "i6_estimate": self.i6_estimate,
            "sigma": self.sigma,
            "per_pair_i3": {"".join(map(str, p)): v for p, v in zip(PAIRS, self.per_pair_i3)},
            "exact_i6": self.exact_i6,
        }


def i6_sigma(spec: WitnessSpec, probabilities, shots: int) -> float:
    """Shot-noise standard deviation of the witness estimate with ``shots`` per cell."""
    P = np.asarray(probabilities, dtype=float)
    if P.shape != (6, 6):
        raise ValueError(f"probability table must be 6x6, got {P.shape}")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    used = spec.W != 0.0
    if np.any(np.isnan(P[used])) or np.any((P[used] < 0.0) | (P[used] > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    variance = 4.0 / shots * np.sum(spec.W[used] ** 2 * P[used] * (1.0 - P[used]))
    return float(np.sqrt(variance))


def pair_sigmas(spec: WitnessSpec, probabilities, shots: int) -> Tuple[float, float, float]:
    """Per-pair I3 standard deviations with weights w^2 and (1-w)^2."""
    P = np.asarray(probabilities, dtype=float)
    var_E = 4.0 * P * (1.0 - P) / shots
    out = []
    for pair in PAIRS:
        mask = spec.pair_mask(pair)
        out.append(float(np.sqrt(np.sum(spec.W[mask] ** 2 * var_E[mask]))))
    return tuple(out)


def cell_rng(seed: int, x: int, y: int) -> np.random.Generator:
    """Independent stream for cell (x, y), 1-based."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(x), int(y)]))


def simulate(scenario: Scenario, spec: WitnessSpec, plan: ShotPlan = ShotPlan()) -> ShotResult:
    noisy = scenario.depolarized(plan.depolarizing_p)
    P = noisy.probabilities()
    sampled = np.ones((6, 6), dtype=bool) if plan.full_table else spec.W != 0.0
    N = int(plan.shots_per_pair)
    counts = np.zeros((6, 6, 2), dtype=np.int64)
    E = np.full((6, 6), np.nan)
    for x in range(6):
        for y in range(6):
            if not sampled[x, y]:
                continue
            k0 = int(cell_rng(plan.seed, x + 1, y + 1).binomial(N, P[x, y]))
            counts[x, y] = (k0, N - k0)
            E[x, y] = (2 * k0 - N) / N
    return ShotResult(
        counts=counts,
        sampled=sampled,
        empirical_E=E,
        i6_estimate=i6_value(spec, E),
        sigma=i6_sigma(spec, P, N),
        per_pair_i3=pair_values(spec, np.where(np.isnan(E), 0.0, E)),
        exact_i6=i6_value(spec, 2.0 * P - 1.0),
        shots=N,
    )


def _unit(v, fallback: Optional[np.ndarray] = None) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        return fallback
    return v / norm


def _orthogonal_to(v: np.ndarray) -> np.ndarray:
    helper = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return _unit(np.cross(v, helper))


def scenario_from_targets(target: TargetTriple) -> Scenario:
    """Scenario attaining the quantum maximum of the witness built for ``target``.

    The certified states come from the target Gram matrix; each pair's
    measurements are aligned with ``n_i + n_j`` and ``n_i - n_j`` and its
    auxiliary is anti-aligned with the first of them.
    """
    n1, n2, n3 = target.vectors()
    measurements = []
    for a, b in ((n1, n2), (n1, n3), (n2, n3)):
        minus = _unit(a - b)  # never zero for a valid target
        plus = _unit(a + b, fallback=_orthogonal_to(minus))
        measurements.extend([plus, minus])
    n4, n5, n6 = -measurements[0], -measurements[2], -measurements[4]
    observables = tuple(Observable.projective(m) for m in measurements)
    return Scenario((n1, n2, n3, n4, n5, n6), observables)


def repeat_estimates(scenario: Scenario, spec: WitnessSpec, plan: ShotPlan, seeds: Sequence[int]) -> np.ndarray:
    """Witness estimates for the same plan under several seeds."""
    out = []
    for s in seeds:
        p = ShotPlan(plan.shots_per_pair, int(s), plan.depolarizing_p, plan.full_table)
        out.append(simulate(scenario, spec, p).i6_estimate)
    return np.array(out)
