"""Global minimization of the synthesis objective over a control ball.

Pipeline: moment relaxation -> interior-point SDP -> rank-1 extraction ->
Newton polish, escalating the relaxation order when extraction fails and
falling back to deterministic multi-start polish as a last resort.  The SDP
bound is retained in every outcome as the certificate reference.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from gatesynth.polymat import Polynomial
from gatesynth.pop.polish import PolishDivergenceError, newton_polish
from gatesynth.pop.relax import extract_minimizer, moment_relax
from gatesynth.pop.sdp import SDPProblem, SDPSolution, sdp_solve

MAX_ORDER = 5
MULTISTART_SEED = 0xC0FFEE
MULTISTART_COUNT = 32
TRACE_EPS = 1e-5


@dataclass
class SynthesisResult:
    x: np.ndarray | None
    value: float
    bound: float
    status: str
    order: int
    radius: float
    timings: dict = field(default_factory=dict)
    sdp: SDPSolution | None = None

    @property
    def gap(self) -> float:
        return self.value - self.bound


def _certified_bound(relax, sol, scale: float) -> float:
    """Lower bound on p over the ball, valid for any PSD solver iterate.

    The PSD blocks of X define a polynomial that is nonnegative on the ball
    by construction; matching its coefficients against p leaves the primal
    residual, whose worst-case effect over the ball is ||rp|| times the peak
    norm of the monomial vector, K = sqrt(sum_a R^(2|a|)).
    """
    ksq = 0.0
    for e in relax.moment_index:
        if sum(e) > 0:
            ksq += relax.radius ** (2 * sum(e))
    return scale * (
        relax.constant_term
        - sol.primal_value
        - math.sqrt(ksq) * sol.primal_residual
    )


def _trace_resolve(prob: SDPProblem, relax, eps: float = TRACE_EPS):
    """Same relaxation with a small trace term added to the moment objective.

    The interior-point iterate lands in the analytic center of the optimal
    face, which is far from rank one whenever the face is not a single point
    (the objective is itself a sum of squares, so this is the common case).
    Minimizing L_y(p) + eps * tr M_d(y) collapses the face toward a point
    mass.  The perturbed bound is never used; only the moment vector is.
    """
    delta = np.zeros_like(prob.b)
    for be in relax.basis:
        idx = relax.moment_index[tuple(2 * e for e in be)]
        if idx >= 0:
            delta[idx] -= eps
    return SDPProblem(prob.block_sizes, prob.c_blocks, prob.a_blocks, prob.b + delta)


def _multistart_points(m: int, radius: float) -> np.ndarray:
    """32 scrambled low-discrepancy starts in the cube inscribed in the ball."""
    sob = qmc.Sobol(d=m, scramble=True, seed=MULTISTART_SEED)
    u = sob.random(MULTISTART_COUNT)
    half = radius / math.sqrt(m)
    return (2.0 * u - 1.0) * half


def _merge_candidates(p: Polynomial, cands: list[np.ndarray]):
    """Lowest value wins; exact value ties break by lexicographic order."""
    best = None
    for x in cands:
        v = p.eval(x).real
        key = (v, tuple(x))
        if best is None or key < best[0]:
            best = (key, x, v)
    if best is None:
        return None, math.inf
    return best[1], best[2]


def minimize_global(
    p: Polynomial,
    radius: float | None = None,
    order: int | None = None,
    polish: bool = True,
) -> SynthesisResult:
    """Certified global minimum of a real polynomial over the radius ball."""
    coeffs = p.real_coeff_dict()
    m = p.ring.controls
    if radius is None:
        radius = math.sqrt(m) * 1.05
    deg = p.degree()
    d0 = order if order is not None else max(1, (deg + 1) // 2)
    if 2 * d0 < deg:
        raise ValueError(f"relaxation order {d0} too small for degree {deg}")

    # scale so the SDP sees O(1) data; moments are scale-invariant
    scale = max((abs(c) for c in coeffs.values()), default=1.0)
    if scale == 0.0:
        scale = 1.0
    p_scaled = p * (1.0 / scale)

    timings: dict[str, float] = {"relax": 0.0, "solve": 0.0, "extract": 0.0}
    best_bound = -math.inf
    best_order = d0
    last_sol = None
    x_hat = None
    for d in range(d0, MAX_ORDER + 1):
        t0 = time.perf_counter()
        prob, relax = moment_relax(p_scaled, radius, d)
        t1 = time.perf_counter()
        sol = sdp_solve(prob)
        t2 = time.perf_counter()
        timings["relax"] += t1 - t0
        timings["solve"] += t2 - t1
        last_sol = sol
        if sol.status in ("optimal", "stalled", "max_iterations"):
            bound = _certified_bound(relax, sol, scale)
            if bound > best_bound:
                best_bound = bound
                best_order = d
            t3 = time.perf_counter()
            x_hat = extract_minimizer(relax, sol.y)
            if x_hat is None:
                sol_t = sdp_solve(_trace_resolve(prob, relax))
                if sol_t.status in ("optimal", "stalled", "max_iterations"):
                    x_hat = extract_minimizer(relax, sol_t.y)
            timings["extract"] += time.perf_counter() - t3
            if x_hat is not None:
                break
        if sol.status in ("numerical_failure", "suspected_infeasible"):
            break

    if x_hat is not None:
        status = "rank-1"
        if polish:
            t0 = time.perf_counter()
            try:
                x_hat = newton_polish(p, x_hat, radius)
            except PolishDivergenceError:
                pass
            timings["polish"] = time.perf_counter() - t0
        value = p.eval(x_hat).real
        return SynthesisResult(
            x=x_hat,
            value=value,
            bound=best_bound,
            status=status,
            order=best_order,
            radius=radius,
            timings=timings,
            sdp=last_sol,
        )

    # extraction never succeeded: deterministic multi-start polish
    t0 = time.perf_counter()
    cands = []
    for x0 in _multistart_points(m, radius):
        try:
            cands.append(newton_polish(p, x0, radius))
        except PolishDivergenceError:
            continue
    x_best, value = _merge_candidates(p, cands)
    timings["polish"] = time.perf_counter() - t0
    status = "polished" if x_best is not None else "failed"
    if best_bound == -math.inf:
        status = "failed"
    return SynthesisResult(
        x=x_best,
        value=value,
        bound=best_bound,
        status=status,
        order=best_order,
        radius=radius,
        timings=timings,
        sdp=last_sol,
    )


def ball_scan_minimum(
    p: Polynomial, radius: float, count: int = 1_000_000, seed: int = 7
) -> float:
    """Minimum of p over a deterministic uniform sample of the ball."""
    m = p.ring.controls
    rng = np.random.default_rng(seed)
    best = math.inf
    chunk = 200_000
    done = 0
    while done < count:
        k = min(chunk, count - done)
        g = rng.standard_normal((k, m))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = radius * rng.random(k) ** (1.0 / m)
        pts = g * r[:, None]
        vals = p.eval_many(pts).real
        best = min(best, float(vals.min()))
        done += k
    best = min(best, p.eval(np.zeros(m)).real)
    return best
