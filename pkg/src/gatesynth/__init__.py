"""Gate synthesis by global polynomial optimization over truncated generators."""

from gatesynth.bch import (
    adjudicate_gbchd,
    bch_compose,
    build_sigma,
    gbchd_eq12,
    slice_generator,
)
from gatesynth.hamlib import SystemPair, build_ising, ibmq3
from gatesynth.magnus import (
    PiecewiseControl,
    PolyControl,
    ProblemSpec,
    build_generator,
    build_lambda,
    magnus_term,
)
from gatesynth.numerics import (
    PropagationError,
    QuadratureError,
    action_integral,
    adaptive_simpson,
    expm_antihermitian,
    midpoint_propagate,
    propagate_piecewise,
    propagate_reference,
    spectral_norm,
)
from gatesynth.objective import (
    BranchAmbiguityError,
    TargetGate,
    build_objective,
    infidelity,
    principal_log,
)
from gatesynth.polymat import (
    Polynomial,
    PolyMatrix,
    Ring,
    frobenius_sq,
    pm_commutator,
    pm_eval,
    pm_mul,
    poly_add,
    poly_eval,
    poly_mul,
    simplex_integrate,
)
from gatesynth.pop import (
    MomentRelaxation,
    PolishDivergenceError,
    SDPProblem,
    SDPSolution,
    SynthesisResult,
    ball_scan_minimum,
    extract_minimizer,
    minimize_global,
    moment_relax,
    newton_polish,
    sdp_solve,
)

__all__ = [
    "BranchAmbiguityError",
    "MomentRelaxation",
    "PiecewiseControl",
    "PolishDivergenceError",
    "PolyControl",
    "PolyMatrix",
    "Polynomial",
    "ProblemSpec",
    "PropagationError",
    "QuadratureError",
    "Ring",
    "SDPProblem",
    "SDPSolution",
    "SynthesisResult",
    "SystemPair",
    "TargetGate",
    "action_integral",
    "adaptive_simpson",
    "adjudicate_gbchd",
    "ball_scan_minimum",
    "bch_compose",
    "build_generator",
    "build_ising",
    "build_lambda",
    "build_objective",
    "build_sigma",
    "expm_antihermitian",
    "extract_minimizer",
    "frobenius_sq",
    "gbchd_eq12",
    "ibmq3",
    "infidelity",
    "magnus_term",
    "midpoint_propagate",
    "minimize_global",
    "moment_relax",
    "newton_polish",
    "pm_commutator",
    "pm_eval",
    "pm_mul",
    "poly_add",
    "poly_eval",
    "poly_mul",
    "principal_log",
    "propagate_piecewise",
    "propagate_reference",
    "sdp_solve",
    "simplex_integrate",
    "slice_generator",
    "spectral_norm",
]

__version__ = "0.1.0"
