"""Reference computations that share no code path with the package internals."""

import itertools
import math

import numpy as np

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ]
)


def density_matrix(n):
    return 0.5 * (np.eye(2) + np.tensordot(n, PAULI, axes=1))


def povm_outcome0(c, m):
    """M_0 of the observable c*I + (1-|c|) m.sigma, i.e. (I + B) / 2."""
    B = c * np.eye(2) + (1 - abs(c)) * np.tensordot(m, PAULI, axes=1)
    return 0.5 * (np.eye(2) + B)


def born_matrix(n, c, m):
    return float(np.real(np.trace(density_matrix(n) @ povm_outcome0(c, m))))


def i3_classical_enumeration(omega):
    """Max of the biased witness over every deterministic one-bit strategy."""
    best = -math.inf
    responses = list(itertools.product((1, -1), repeat=2))  # f(0), f(1)
    for bits in itertools.product((0, 1), repeat=3):
        for f1 in responses:
            for f2 in responses:
                E = [[f1[b], f2[b]] for b in bits]
                value = omega * (E[0][0] + E[1][0] - E[2][0]) + (1 - omega) * (E[0][1] - E[1][1])
                best = max(best, value)
    return best


def i3_conditional_scan(omega, samples=20001):
    """Max over the angle between unit n1, n2 of w|n1+n2| + (1-w)|n1-n2| + w."""
    theta = np.linspace(0.0, math.pi, samples)
    values = omega * 2 * np.cos(theta / 2) + (1 - omega) * 2 * np.sin(theta / 2) + omega
    return float(values.max())


def random_unit(rng, size=None):
    v = rng.normal(size=(3,) if size is None else (size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_ball(rng):
    return random_unit(rng) * rng.uniform() ** (1 / 3)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
