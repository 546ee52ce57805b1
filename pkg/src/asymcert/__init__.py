"""Certify mirror asymmetry of three qubit states from prepare-and-measure statistics."""

__version__ = "0.1.0"

from .bloch import ConfigTriple, Observable, born_probability, expectation, is_mirror_symmetric, trace_distance
from .mirror_opt import (
    BoundsReport,
    MirrorProblem,
    OptimizerConfig,
    bounds_for_target,
    brute_force_q_mirror,
    optimize_gap,
    q_mirror,
    q_mirror_ijk,
)
from .shot_sim import Scenario, ShotPlan, ShotResult, i6_sigma, scenario_from_targets, simulate
from .verdict import CertificationVerdict, certify
from .witness import (
    TargetTriple,
    WitnessSpec,
    build_witness,
    cos_from_omega,
    i3_classical_bound,
    i3_conditional_max,
    i3_quantum_max,
    i6_value,
    omega_from_cos,
    optimal_preparations,
    q_max,
)
