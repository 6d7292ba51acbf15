"""Global polynomial minimization: moment relaxation, SDP solver, extraction."""

from gatesynth.pop.minimize import (
    SynthesisResult,
    ball_scan_minimum,
    minimize_global,
)
from gatesynth.pop.polish import PolishDivergenceError, newton_polish
from gatesynth.pop.relax import MomentRelaxation, extract_minimizer, moment_relax
from gatesynth.pop.sdp import SDPProblem, SDPSolution, sdp_solve

__all__ = [
    "MomentRelaxation",
    "PolishDivergenceError",
    "SDPProblem",
    "SDPSolution",
    "SynthesisResult",
    "ball_scan_minimum",
    "extract_minimizer",
    "minimize_global",
    "moment_relax",
    "newton_polish",
    "sdp_solve",
]
