"""Mirror-symmetric bound of the six-preparation witness.

With traceless measurements and the three auxiliary preparations eliminated,
the bound for apex ``i`` and legs ``j, k`` is the maximum over unit ``m_y`` and
``|n_x| <= 1`` with ``n_i.n_j = n_i.n_k`` of::

    w12 + w13 + w23
      + w12 (n1+n2).m1 + (1-w12) (n1-n2).m2
      + w13 (n1+n3).m3 + (1-w13) (n1-n3).m4
      + w23 (n2+n3).m5 + (1-w23) (n2-n3).m6

It is solved by block coordinate ascent with closed-form block maximizers,
repeated from many random feasible starts.  A relabeling of the states
(with the biases relabeled alongside) maps every permutation onto the
apex-first problem, so the solver core only ever handles apex 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bloch import MIRROR_PERMUTATIONS
from .witness import TargetTriple, WitnessSpec, build_witness, q_max

ZERO_NORM = 1e-14
AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iterations: int = 10000
    improvement_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.improvement_tol > 0:
            raise ValueError("improvement_tol must be > 0")


@dataclass(frozen=True)
class MirrorProblem:
    spec: WitnessSpec
    permutation: Tuple[int, int, int] = (1, 2, 3)

    def __post_init__(self):
        perm = tuple(int(p) for p in self.permutation)
        if perm not in MIRROR_PERMUTATIONS:
            raise ValueError(f"permutation must be one of {MIRROR_PERMUTATIONS}, got {perm}")
        object.__setattr__(self, "permutation", perm)


@dataclass
class PermutationResult:
    permutation: Tuple[int, int, int]
    value: float
    states: np.ndarray  # (3, 3), rows n1, n2, n3
    measurements: np.ndarray  # (6, 3), rows m1..m6
    converged: bool
    restarts_agreeing: int
    restart_values: np.ndarray
    iterations: np.ndarray
    restart_converged: np.ndarray
    degenerate_steps: int
    trace: Optional[np.ndarray] = None  # (iterations + 1, restarts) when recorded

    def __iter__(self):
        # allows ``value, states, measurements = q_mirror_ijk(...)``
        return iter((self.value, self.states, self.measurements))


@dataclass
class BoundsReport:
    omegas: Tuple[float, float, float]
    q_max: float
    q_mirror_123: float
    q_mirror_213: float
    q_mirror_312: float
    q_mirror: float
    delta: float
    best_permutation: Tuple[int, int, int]
    best_states: np.ndarray
    best_measurements: np.ndarray
    converged: bool
    restarts_agreeing: int
    per_permutation: Dict[Tuple[int, int, int], PermutationResult] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "omegas": [float(w) for w in self.omegas],
            "q_max": self.q_max,
            "q_mirror_123": self.q_mirror_123,
            "q_mirror_213": self.q_mirror_213,
            "q_mirror_312": self.q_mirror_312,
            "q_mirror": self.q_mirror,
            "delta": self.delta,
            "best_permutation": "".join(map(str, self.best_permutation)),
            "best_states": self.best_states.tolist(),
            "best_measurements": self.best_measurements.tolist(),
            "converged": self.converged,
            "restarts_agreeing": self.restarts_agreeing,
            "permutations": {
                "".join(map(str, p)): {
                    "value": r.value,
                    "converged": r.converged,
                    "restarts_agreeing": r.restarts_agreeing,
                    "max_iterations_used": int(r.iterations.max()),
                    "degenerate_steps": r.degenerate_steps,
                }
                for p, r in self.per_permutation.items()
            },
        }


def _normalize(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norm = np.linalg.norm(v, axis=-1)
    safe = np.where(norm < ZERO_NORM, 1.0, norm)
    return v / safe[..., None], norm


def _perpendicular(v: np.ndarray, axis: np.ndarray, previous: np.ndarray):
    """Unit component of ``v`` orthogonal to unit ``axis``; falls back to ``previous``'s."""
    p = v - np.sum(v * axis, -1, keepdims=True) * axis
    u, norm = _normalize(p)
    q = previous - np.sum(previous * axis, -1, keepdims=True) * axis
    uq, qnorm = _normalize(q)
    # last resort when previous is parallel to axis too: any orthogonal direction
    helper = np.where(np.abs(axis[..., :1]) < 0.9, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    uh, _ = _normalize(np.cross(axis, helper))
    fallback = np.where((qnorm < ZERO_NORM)[..., None], uh, uq)
    degenerate = norm < ZERO_NORM
    return np.where(degenerate[..., None], fallback, u), degenerate, norm


def measurement_directions(states: np.ndarray, previous: Optional[np.ndarray] = None) -> np.ndarray:
    """Optimal unit measurements for given states, shape (..., 6, 3)."""
    n1, n2, n3 = states[..., 0, :], states[..., 1, :], states[..., 2, :]
    raw = np.stack([n1 + n2, n1 - n2, n1 + n3, n1 - n3, n2 + n3, n2 - n3], axis=-2)
    unit, norm = _normalize(raw)
    if previous is None:
        previous = np.broadcast_to(np.array([0.0, 0.0, 1.0]), raw.shape)
    return np.where((norm < ZERO_NORM)[..., None], previous, unit)


def _omega_columns(omegas):
    w = np.asarray(omegas, dtype=float)
    return w[..., 0], w[..., 1], w[..., 2]


def mirror_objective(omegas, states, measurements):
    """Objective for explicit states and measurements; batched over leading axes."""
    w12, w13, w23 = _omega_columns(omegas)
    n = np.asarray(states, dtype=float)
    m = np.asarray(measurements, dtype=float)
    n1, n2, n3 = n[..., 0, :], n[..., 1, :], n[..., 2, :]

    def dot(a, b):
        return np.sum(a * b, axis=-1)

    return (
        w12 + w13 + w23
        + w12 * dot(n1 + n2, m[..., 0, :]) + (1 - w12) * dot(n1 - n2, m[..., 1, :])
        + w13 * dot(n1 + n3, m[..., 2, :]) + (1 - w13) * dot(n1 - n3, m[..., 3, :])
        + w23 * dot(n2 + n3, m[..., 4, :]) + (1 - w23) * dot(n2 - n3, m[..., 5, :])
    )


def mirror_objective_optimal(omegas, states):
    """Objective with every measurement already at its optimum."""
    w12, w13, w23 = _omega_columns(omegas)
    n = np.asarray(states, dtype=float)
    n1, n2, n3 = n[..., 0, :], n[..., 1, :], n[..., 2, :]
    norm = lambda v: np.linalg.norm(v, axis=-1)  # noqa: E731
    return (
        w12 + w13 + w23
        + w12 * norm(n1 + n2) + (1 - w12) * norm(n1 - n2)
        + w13 * norm(n1 + n3) + (1 - w13) * norm(n1 - n3)
        + w23 * norm(n2 + n3) + (1 - w23) * norm(n2 - n3)
    )


def _state_coefficients(omegas, m):
    w12, w13, w23 = (w[:, None] for w in _omega_columns(omegas))
    m1, m2, m3, m4, m5, m6 = (m[:, y, :] for y in range(6))
    v1 = w12 * m1 + (1 - w12) * m2 + w13 * m3 + (1 - w13) * m4
    v2 = w12 * m1 - (1 - w12) * m2 + w23 * m5 + (1 - w23) * m6
    v3 = w13 * m3 - (1 - w13) * m4 + w23 * m5 - (1 - w23) * m6
    return v1, v2, v3


def _ascend(omegas, states, measurements, cfg: OptimizerConfig, record_trace=False):
    """Block coordinate ascent for the apex-1 problem, batched over restarts.

    ``omegas`` is (B, 3), ``states`` (B, 3, 3) feasible, ``measurements`` (B, 6, 3).
    Each iteration: measurements, apex, then both legs jointly.
    """
    n = states.copy()
    m = measurements.copy()
    batch = n.shape[0]
    active = np.ones(batch, dtype=bool)
    converged = np.zeros(batch, dtype=bool)
    iterations = np.zeros(batch, dtype=int)
    degenerate = np.zeros(batch, dtype=int)
    value = mirror_objective_optimal(omegas, n)
    trace = [value.copy()] if record_trace else None

    for _ in range(cfg.max_iterations):
        m_new = measurement_directions(n, m)
        v1, v2, v3 = _state_coefficients(omegas, m_new)
        n1, n2, n3 = n[:, 0, :], n[:, 1, :], n[:, 2, :]

        # apex: maximize v1.n1 on the unit disk orthogonal to n2 - n3
        normal, normal_len = _normalize(n2 - n3)
        free = normal_len < ZERO_NORM
        p = np.where(free[:, None], v1, v1 - np.sum(v1 * normal, -1, keepdims=True) * normal)
        u, plen = _normalize(p)
        stuck = plen < ZERO_NORM
        n1_new = np.where(stuck[:, None], n1, u)
        degenerate += stuck & active

        # legs: n2 = t n1 + sqrt(1-t^2) u2, n3 = t n1 + sqrt(1-t^2) u3, shared t
        a = np.sum(v2 * n1_new, -1) + np.sum(v3 * n1_new, -1)
        u2, deg2, b2 = _perpendicular(v2, n1_new, n2)
        u3, deg3, b3 = _perpendicular(v3, n1_new, n3)
        b = b2 + b3
        h = np.hypot(a, b)
        flat = h < ZERO_NORM
        t = np.where(flat, np.sum(n1_new * n2, -1), a / np.where(flat, 1.0, h))
        t = np.clip(t, -1.0, 1.0)
        s = np.sqrt(1.0 - t * t)[:, None]
        n2_new = t[:, None] * n1_new + s * u2
        n3_new = t[:, None] * n1_new + s * u3
        n2_new = np.where(flat[:, None], n2, n2_new)
        n3_new = np.where(flat[:, None], n3, n3_new)
        degenerate += flat & active

        n_new = np.stack([n1_new, n2_new, n3_new], axis=1)
        new_value = mirror_objective_optimal(omegas, n_new)
        improvement = new_value - value

        n = np.where(active[:, None, None], n_new, n)
        m = np.where(active[:, None, None], m_new, m)
        value = np.where(active, new_value, value)
        iterations += active
        done = active & (improvement < cfg.improvement_tol)
        converged |= done
        active &= ~done
        if record_trace:
            trace.append(value.copy())
        if not active.any():
            break

    m = measurement_directions(n, m)
    value = mirror_objective(omegas, n, m)
    return n, m, value, converged, iterations, degenerate, (np.array(trace) if record_trace else None)


def _relabel(permutation, omegas):
    """Internal-label biases for apex-first relabeling of ``permutation``."""
    i, j, k = permutation
    lookup = {(1, 2): omegas[0], (1, 3): omegas[1], (2, 3): omegas[2]}
    pair = lambda a, b: lookup[(min(a, b), max(a, b))]  # noqa: E731
    return (pair(i, j), pair(i, k), pair(j, k))


def _random_unit(rng, size):
    v = rng.normal(size=size)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _initial_batch(permutation, restarts, seed):
    """Feasible pure-state starts (internal labels) and random measurements."""
    code = int("".join(map(str, permutation)))
    states = np.empty((restarts, 3, 3))
    meas = np.empty((restarts, 6, 3))
    for r in range(restarts):
        rng = np.random.default_rng([seed, code, r])
        states[r] = _random_unit(rng, (3, 3))
        meas[r] = _random_unit(rng, (6, 3))
    apex = states[:, 0, :]
    t = np.sum(apex * states[:, 1, :], -1)
    u3, _, _ = _perpendicular(states[:, 2, :], apex, states[:, 2, :])
    states[:, 2, :] = t[:, None] * apex + np.sqrt(np.clip(1.0 - t * t, 0.0, None))[:, None] * u3
    return states, meas


def _solve_batch(spec: WitnessSpec, permutations, cfg: OptimizerConfig, record_trace=False):
    sizes = cfg.restarts
    omegas, starts, meas = [], [], []
    for perm in permutations:
        s, m = _initial_batch(perm, sizes, cfg.seed)
        starts.append(s)
        meas.append(m)
        omegas.append(np.tile(_relabel(perm, spec.omegas()), (sizes, 1)))
    n, m, value, conv, iters, degenerate, trace = _ascend(
        np.concatenate(omegas), np.concatenate(starts), np.concatenate(meas), cfg, record_trace
    )
    results = {}
    for idx, perm in enumerate(permutations):
        sl = slice(idx * sizes, (idx + 1) * sizes)
        results[perm] = _collect(spec, perm, n[sl], value[sl], conv[sl], iters[sl], degenerate[sl],
                                 None if trace is None else trace[:, sl])
    return results


def _collect(spec, perm, internal_states, values, conv, iters, degenerate, trace):
    best = int(np.argmax(values))  # lowest index wins ties
    states = np.empty((3, 3))
    for internal, label in enumerate(perm):
        states[label - 1] = internal_states[best, internal]
    measurements = measurement_directions(states[None])[0]
    value = float(mirror_objective(spec.omegas(), states, measurements))
    return PermutationResult(
        permutation=perm,
        value=value,
        states=states,
        measurements=measurements,
        converged=bool(conv.any()),
        restarts_agreeing=int(np.count_nonzero(values >= values.max() - AGREEMENT_TOL)),
        restart_values=values.copy(),
        iterations=iters.copy(),
        restart_converged=conv.copy(),
        degenerate_steps=int(degenerate.sum()),
        trace=trace,
    )


def q_mirror_ijk(problem: MirrorProblem, cfg: OptimizerConfig = OptimizerConfig(),
                 record_trace: bool = False) -> PermutationResult:
    """Best mirror-constrained witness value for one apex permutation."""
    return _solve_batch(problem.spec, [problem.permutation], cfg, record_trace)[problem.permutation]


def q_mirror(spec: WitnessSpec, cfg: OptimizerConfig = OptimizerConfig()) -> BoundsReport:
    results = _solve_batch(spec, list(MIRROR_PERMUTATIONS), cfg)
    values = [results[p].value for p in MIRROR_PERMUTATIONS]
    best_perm = MIRROR_PERMUTATIONS[int(np.argmax(values))]
    best = results[best_perm]
    qm = q_max(spec)
    return BoundsReport(
        omegas=spec.omegas(),
        q_max=qm,
        q_mirror_123=values[0],
        q_mirror_213=values[1],
        q_mirror_312=values[2],
        q_mirror=best.value,
        delta=qm - best.value,
        best_permutation=best_perm,
        best_states=best.states,
        best_measurements=best.measurements,
        converged=all(r.converged for r in results.values()),
        restarts_agreeing=best.restarts_agreeing,
        per_permutation=results,
    )


def bounds_for_target(target: TargetTriple, cfg: OptimizerConfig = OptimizerConfig()) -> BoundsReport:
    return q_mirror(build_witness(target), cfg)


def brute_force_q_mirror(spec: WitnessSpec, permutation=(1, 2, 3), grid_resolution: int = 60) -> float:
    """Grid lower bound on the mirror-constrained value over pure states.

    Rotations fix the apex at +z and put the first leg in the x-z half-plane
    at polar angle ``a``; the constraint then pins the second leg to the cone
    of the same polar angle, leaving its azimuth ``phi`` (reflection restricts
    it to [0, pi]).
    """
    if grid_resolution < 12:
        raise ValueError("grid_resolution must be at least 12")
    perm = MirrorProblem(spec, permutation).permutation
    a = np.linspace(0.0, math.pi, grid_resolution)
    phi = np.linspace(0.0, math.pi, grid_resolution)
    A, P = np.meshgrid(a, phi, indexing="ij")
    sa, ca = np.sin(A), np.cos(A)
    apex = np.broadcast_to([0.0, 0.0, 1.0], A.shape + (3,))
    leg1 = np.stack([sa, np.zeros_like(sa), ca], axis=-1)
    leg2 = np.stack([sa * np.cos(P), sa * np.sin(P), ca], axis=-1)
    internal = np.stack([apex, leg1, leg2], axis=-2)
    states = np.empty_like(internal)
    for idx, label in enumerate(perm):
        states[..., label - 1, :] = internal[..., idx, :]
    values = mirror_objective_optimal(spec.omegas(), states)
    return float(values.max())


@dataclass
class GapResult:
    target: TargetTriple
    delta: float
    report: BoundsReport
    evaluations: int
    converged: bool


def target_from_params(a12: float, a13: float, dihedral: float) -> TargetTriple:
    """Target with n1 = z, n2 at polar angle ``a12`` and n3 at ``a13`` (degrees).

    ``dihedral`` is the angle between the planes (n1, n2) and (n1, n3); every
    point of the box [0, 180]^3 is realizable, which keeps the search feasible.
    """
    a, b, p = (math.radians(x) for x in (a12, a13, dihedral))
    n2 = np.array([math.sin(a), 0.0, math.cos(a)])
    n3 = np.array([math.sin(b) * math.cos(p), math.sin(b) * math.sin(p), math.cos(b)])
    return TargetTriple(math.cos(a), math.cos(b), float(np.clip(np.dot(n2, n3), -1.0, 1.0)))


_DIRECTIONS = np.array(
    [s * np.eye(3)[i] for i in range(3) for s in (1.0, -1.0)]
    + [s1 * np.eye(3)[i] + s2 * np.eye(3)[j]
       for i in range(3) for j in range(i + 1, 3) for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)]
)


def optimize_gap(
    cfg: OptimizerConfig = OptimizerConfig(),
    *,
    candidates: int = 32,
    refine: int = 3,
    search_restarts: int = 12,
    initial_step: float = 8.0,
    min_step: float = 1e-3,
    start: Optional[TargetTriple] = None,
) -> GapResult:
    """Search pure targets for the largest gap between the quantum and mirror bounds.

    Random starts in (a12, a13, dihedral) are scored with a cheap inner solve,
    the best ``refine`` are polished by a compass search over coordinate and
    pairwise-diagonal moves with a halving step, and the incumbent is finally
    re-solved with the full ``cfg``.  When ``start`` is given it is the first
    start and, with ``candidates=0``, the only one.
    """
    inner = OptimizerConfig(search_restarts if search_restarts else cfg.restarts,
                            cfg.max_iterations, cfg.improvement_tol, cfg.seed)
    cache: Dict[Tuple[float, float, float], float] = {}

    def score(params) -> float:
        key = tuple(round(float(x), 9) for x in np.clip(params, 0.0, 180.0))
        if key not in cache:
            try:
                target = target_from_params(*key)
            except ValueError:
                cache[key] = -math.inf
            else:
                cache[key] = q_mirror(build_witness(target), inner).delta
        return cache[key]

    rng = np.random.default_rng([cfg.seed, 0x6A9])
    starts: List[np.ndarray] = []
    if start is not None:
        starts.append(np.array(_params_from_target(start)))
    starts.extend(rng.uniform(0.0, 180.0, size=(candidates, 3)))
    if not starts:
        raise ValueError("need a start target or at least one random candidate")
    ranked = sorted(((score(p), idx, p) for idx, p in enumerate(starts)), key=lambda t: (-t[0], t[1]))

    best_params, best_score = ranked[0][2], ranked[0][0]
    for value, _, params in ranked[: max(1, refine)]:
        params, value = _compass(score, params, value, initial_step, min_step)
        if value > best_score:
            best_params, best_score = params, value

    target = target_from_params(*np.clip(best_params, 0.0, 180.0))
    report = q_mirror(build_witness(target), cfg)
    return GapResult(target, report.delta, report, len(cache), report.converged)


def _compass(score, params, value, step, min_step):
    params = np.clip(np.asarray(params, dtype=float), 0.0, 180.0)
    while step >= min_step:
        moved = False
        for d in _DIRECTIONS:
            trial = np.clip(params + step * d, 0.0, 180.0)
            if np.array_equal(trial, params):
                continue
            v = score(trial)
            if v > value + 1e-12:
                params, value, moved = trial, v, True
                break
        if not moved:
            step /= 2.0
    return params, value


def _params_from_target(target: TargetTriple) -> Tuple[float, float, float]:
    n1, n2, n3 = target.vectors()
    a12, a13, _ = target.angles()
    # dihedral between planes (n1, n2) and (n1, n3)
    p2 = n2 - np.dot(n2, n1) * n1
    p3 = n3 - np.dot(n3, n1) * n1
    l2, l3 = np.linalg.norm(p2), np.linalg.norm(p3)
    if l2 < ZERO_NORM or l3 < ZERO_NORM:
        return (a12, a13, 0.0)
    cos_p = float(np.clip(np.dot(p2, p3) / (l2 * l3), -1.0, 1.0))
    return (a12, a13, math.degrees(math.acos(cos_p)))
