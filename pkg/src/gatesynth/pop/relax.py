"""Dense moment relaxation of polynomial minimization over a ball.

The order-d relaxation minimizes the linear functional L_y(p) over moment
vectors y with PSD moment matrix M_d(y) and PSD localizing matrix
M_{d-1}((R^2 - |x|^2) y).  It is encoded as a standard-form SDP whose dual
variable IS the moment vector, so the solver returns moments directly and the
primal value yields the certified lower bound p(0)-independent part.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from gatesynth.polymat import Polynomial
from gatesynth.pop.sdp import SDPProblem

RANK1_TOL = 1e-6


def monomials_up_to(m: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors in m variables of total degree <= d, graded order."""
    out = [(0,) * m]
    for total in range(1, d + 1):
        block = []
        for combo in combinations_with_replacement(range(m), total):
            e = [0] * m
            for v in combo:
                e[v] += 1
            block.append(tuple(e))
        out.extend(sorted(block, reverse=True))
    return out


@dataclass(frozen=True, eq=False)
class MomentRelaxation:
    """Index bookkeeping for one relaxation instance."""

    n_vars: int
    order: int
    radius: float
    basis: tuple[tuple[int, ...], ...]
    loc_basis: tuple[tuple[int, ...], ...]
    moment_index: dict
    constant_term: float

    @property
    def basis_size(self) -> int:
        return len(self.basis)

    def moment_matrix(self, y: np.ndarray) -> np.ndarray:
        """Assemble M_d(y) from a solved moment vector (y excludes y_0 = 1)."""
        n = len(self.basis)
        mm = np.empty((n, n))
        for i, be in enumerate(self.basis):
            for j, ge in enumerate(self.basis):
                e = tuple(a + b for a, b in zip(be, ge))
                idx = self.moment_index[e]
                mm[i, j] = 1.0 if idx < 0 else y[idx]
        return mm

    def point_moments(self, x: np.ndarray) -> np.ndarray:
        """Moment vector of the point mass at x (for tests and diagnostics)."""
        x = np.asarray(x, dtype=float)
        y = np.empty(len(self.moment_index) - 1)
        for e, idx in self.moment_index.items():
            if idx >= 0:
                y[idx] = float(np.prod(x**np.array(e)))
        return y


def moment_relax(
    p: Polynomial, radius: float, order: int
) -> tuple[SDPProblem, MomentRelaxation]:
    """Order-``order`` moment relaxation of min p over the radius ball.

    The SDP is the conjugate standard form: C carries the y_0 = 1 pattern,
    each constraint matrix is the negated pattern of one moment variable, and
    b holds the negated objective coefficients.  Lower bound on p equals
    p_constant - primal value; the dual y is the moment vector.
    """
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    coeffs = p.real_coeff_dict()
    m = p.ring.controls
    if p.ring.times:
        raise ValueError("objective must live in a time-free ring")
    if m < 1:
        raise ValueError("objective needs at least one variable")
    if 2 * order < p.degree():
        raise ValueError(
            f"relaxation order {order} too small for degree {p.degree()}"
        )
    basis = monomials_up_to(m, order)
    loc_basis = monomials_up_to(m, order - 1)
    n = len(basis)
    nl = len(loc_basis)
    assert n == comb(m + order, order)

    # moment variables: all monomials of degree 1..2*order
    all_moments = monomials_up_to(m, 2 * order)
    moment_index: dict[tuple[int, ...], int] = {}
    for e in all_moments:
        moment_index[e] = -1 if sum(e) == 0 else len(moment_index) - 1
    n_y = len(all_moments) - 1

    # pattern matrices: moment block
    pat_mom = np.zeros((n_y + 1, n, n))
    for i, be in enumerate(basis):
        for j, ge in enumerate(basis):
            e = tuple(a + b for a, b in zip(be, ge))
            pat_mom[moment_index[e] + 1, i, j] += 1.0
    # pattern matrices: localizing block for g = R^2 - sum x_k^2
    pat_loc = np.zeros((n_y + 1, nl, nl))
    rsq = radius * radius
    unit = np.eye(m, dtype=int)
    for i, be in enumerate(loc_basis):
        for j, ge in enumerate(loc_basis):
            e = tuple(a + b for a, b in zip(be, ge))
            pat_loc[moment_index[e] + 1, i, j] += rsq
            for k in range(m):
                ek = tuple(a + 2 * b for a, b in zip(e, unit[k]))
                pat_loc[moment_index[ek] + 1, i, j] -= 1.0
    # index 0 of the pattern stacks is the fixed y_0 = 1 part -> cost C
    c_blocks = (pat_mom[0], pat_loc[0])
    a_blocks = (-pat_mom[1:], -pat_loc[1:])
    b = np.zeros(n_y)
    constant = 0.0
    for e, c in coeffs.items():
        idx = moment_index[e]
        if idx < 0:
            constant = c
        else:
            b[idx] = -c
    prob = SDPProblem((n, nl), c_blocks, a_blocks, b)
    relax = MomentRelaxation(
        n_vars=m,
        order=order,
        radius=radius,
        basis=tuple(basis),
        loc_basis=tuple(loc_basis),
        moment_index=moment_index,
        constant_term=constant,
    )
    return prob, relax


def extract_minimizer(relax: MomentRelaxation, y: np.ndarray):
    """Read the minimizer off a numerically rank-1 moment matrix, else None."""
    mm = relax.moment_matrix(np.asarray(y, dtype=float))
    svals = np.linalg.svd(mm, compute_uv=False)
    if svals[0] <= 0 or svals[1] / svals[0] >= RANK1_TOL:
        return None
    x = np.empty(relax.n_vars)
    unit = np.eye(relax.n_vars, dtype=int)
    for k in range(relax.n_vars):
        x[k] = y[relax.moment_index[tuple(unit[k])]]
    return x
