"""Deterministic planted-target generation for synthesis benchmarks."""

from typing import NamedTuple

import numpy as np

from gatesynth.magnus import ProblemSpec
from gatesynth.numerics import action_integral, propagate_reference
from gatesynth.objective import principal_log

ACTION_CEILING = np.pi - 1e-3
MAX_REDRAWS = 100


class TargetGenerationError(RuntimeError):
    """Raised when no admissible control is found after many redraws."""


class PlantedTarget(NamedTuple):
    x_star: np.ndarray
    unitary: np.ndarray
    generator: np.ndarray


def trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by (base_seed, trial).

    Every trial owns an independent stream, so trials can run in any order
    (or in parallel) and still reproduce bit-identical draws.
    """
    if base_seed < 0 or trial < 0:
        raise ValueError("base_seed and trial must be non-negative")
    key = np.array([base_seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def gen_target(spec: ProblemSpec, base_seed: int, trial: int = 0) -> PlantedTarget:
    """Draw a reachable target gate from a planted control vector.

    Controls are uniform on [-1, 1]^m.  Draws whose action integral reaches
    pi - 1e-3 are rejected and redrawn, which keeps the principal branch of
    the target generator unambiguous.
    """
    rng = trial_rng(base_seed, trial)
    for _ in range(MAX_REDRAWS):
        x_star = rng.uniform(-1.0, 1.0, spec.m)
        if action_integral(spec, x_star) >= ACTION_CEILING:
            continue
        unitary = propagate_reference(spec, x_star)
        return PlantedTarget(x_star, unitary, principal_log(unitary))
    raise TargetGenerationError(
        f"no control with action below {ACTION_CEILING:.6f} in "
        f"{MAX_REDRAWS} draws; the horizon or system norm is too large"
    )
