"""Certification verdicts and external expectation tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CERTIFIED = "asymmetry_certified"
NOT_CERTIFIED = "not_certified"


class ConvergenceError(RuntimeError):
    """The mirror bound was not computed to convergence."""


@dataclass(frozen=True)
class CertificationVerdict:
    i6_observed: float
    q_mirror: float
    q_max: float
    sigma: float
    k: float
    excess: float
    significance: float
    verdict: str

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "i6_observed": self.i6_observed,
            "q_mirror": self.q_mirror,
            "q_max": self.q_max,
            "sigma": self.sigma,
            "sigma_k": self.k,
            "excess": self.excess,
            "significance": self.significance if math.isfinite(self.significance) else None,
            "verdict": self.verdict,
        }


def certify(i6_observed: float, sigma: float, q_mirror: float, q_max: float = math.nan,
            k: float = 3.0, converged: bool = True) -> CertificationVerdict:
    """Asymmetry is certified when the observed value beats the mirror bound by more than k sigma."""
    if not converged:
        raise ConvergenceError("refusing to certify against an unconverged mirror bound")
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite and non-negative, got {sigma!r}")
    if k < 0:
        raise ValueError("k must be non-negative")
    excess = float(i6_observed) - float(q_mirror)
    if sigma > 0:
        significance = excess / sigma
    else:
        significance = math.copysign(math.inf, excess) if excess else math.nan
    verdict = CERTIFIED if excess > k * sigma else NOT_CERTIFIED
    return CertificationVerdict(float(i6_observed), float(q_mirror), float(q_max), float(sigma),
                                float(k), excess, significance, verdict)


def load_expectations(path) -> np.ndarray:
    """Read a 6x6 whitespace/comma separated table; ``#`` starts a comment, ``nan`` marks unused cells."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].replace(",", " ").strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    table = np.array(rows, dtype=float) if rows else np.empty((0, 0))
    if table.shape != (6, 6):
        raise ValueError(f"{path}: expected 6 rows of 6 values, got shape {table.shape}")
    finite = table[~np.isnan(table)]
    if np.any(np.abs(finite) > 1.0) or np.any(np.isinf(finite)):
        raise ValueError(f"{path}: expectation values must lie in [-1, 1]")
    return table
