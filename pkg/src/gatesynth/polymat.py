"""Sparse complex multivariate polynomials and matrices with polynomial entries.

Variables live in a fixed ring context: ``controls`` real optimization
variables x0..x{m-1} followed by ``times`` ordered time variables t1..tk.
Matrix-valued polynomials are stored as a map from exponent vectors to dense
numpy coefficient matrices, which keeps products and commutators of large
(2^N dimensional) operator families cheap; scalar entries are recovered on
demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Coefficients smaller than this are dropped at canonicalization.  Every exact
# coefficient produced here is a small-denominator rational times a Hamiltonian
# entry, orders of magnitude above the threshold.
PRUNE_EPS = 1e-14


@dataclass(frozen=True)
class Ring:
    """Variable context: ``controls`` x-slots followed by ``times`` t-slots."""

    controls: int
    times: int = 0

    def __post_init__(self):
        if self.controls < 0 or self.times < 0:
            raise ValueError("ring arities must be non-negative")

    @property
    def arity(self) -> int:
        return self.controls + self.times

    def var_name(self, slot: int) -> str:
        if slot < self.controls:
            return f"x{slot}"
        return f"t{slot - self.controls + 1}"

    def drop_times(self) -> "Ring":
        return Ring(self.controls, 0)


def grlex_key(exponents: tuple[int, ...]) -> tuple:
    """Sort key for graded lexicographic monomial order."""
    return (sum(exponents), exponents)


def _check_same_ring(a, b):
    if a.ring != b.ring:
        raise ValueError(f"ring context mismatch: {a.ring} vs {b.ring}")


class Polynomial:
    """Immutable sparse polynomial with complex coefficients.

    ``terms`` maps exponent tuples (one entry per ring slot) to nonzero
    complex coefficients.  Construction canonicalizes: coefficients for equal
    exponents merge and anything below ``PRUNE_EPS`` in magnitude is dropped.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict | None = None):
        merged: dict[tuple[int, ...], complex] = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != ring.arity:
                    raise ValueError(
                        f"exponent vector {exps} does not match ring arity {ring.arity}"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = merged.get(exps, 0j) + complex(coeff)
                if c == 0:
                    merged.pop(exps, None)
                else:
                    merged[exps] = c
        self.ring = ring
        self.terms = {e: c for e, c in merged.items() if abs(c) >= PRUNE_EPS}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring) -> "Polynomial":
        return cls(ring)

    @classmethod
    def constant(cls, ring: Ring, value: complex) -> "Polynomial":
        return cls(ring, {(0,) * ring.arity: value})

    @classmethod
    def variable(cls, ring: Ring, slot: int, coeff: complex = 1.0) -> "Polynomial":
        if not 0 <= slot < ring.arity:
            raise ValueError(f"slot {slot} outside ring arity {ring.arity}")
        e = [0] * ring.arity
        e[slot] = 1
        return cls(ring, {tuple(e): coeff})

    @classmethod
    def monomial(cls, ring: Ring, exponents, coeff: complex = 1.0) -> "Polynomial":
        return cls(ring, {tuple(exponents): coeff})

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=0)

    def constant_term(self) -> complex:
        return self.terms.get((0,) * self.ring.arity, 0j)

    def uses_time_slots(self) -> bool:
        nc = self.ring.controls
        return any(any(e[nc:]) for e in self.terms)

    def sorted_terms(self):
        """Terms in graded lexicographic order (deterministic iteration)."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def real_coeff_dict(self, imag_tol: float = 1e-13) -> dict[tuple[int, ...], float]:
        """Term map with coefficients coerced to real; error on large residues."""
        out = {}
        for e, c in self.terms.items():
            if abs(c.imag) > imag_tol:
                raise ValueError(
                    f"coefficient {c} of {e} has imaginary residue above {imag_tol}"
                )
            out[e] = c.real
        return out

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial.constant(self.ring, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        _check_same_ring(self, other)
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, 0j) + c
        return Polynomial(self.ring, merged)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial.constant(self.ring, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Polynomial(self.ring, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        _check_same_ring(self, other)
        prod: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod[e] = prod.get(e, 0j) + c1 * c2
        return Polynomial(self.ring, prod)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def isclose(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        _check_same_ring(self, other)
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) <= tol for k in keys
        )

    def diff(self, slot: int) -> "Polynomial":
        """Formal partial derivative with respect to one slot."""
        if not 0 <= slot < self.ring.arity:
            raise ValueError(f"slot {slot} outside ring arity {self.ring.arity}")
        out = {}
        for e, c in self.terms.items():
            if e[slot] == 0:
                continue
            d = list(e)
            d[slot] -= 1
            out[tuple(d)] = c * e[slot]
        return Polynomial(self.ring, out)

    # -- evaluation --------------------------------------------------------

    def eval(self, x, t=None) -> complex:
        """Evaluate at control values ``x`` (and time values ``t`` if given).

        Without ``t`` the polynomial must not use any time slot.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ring.controls,):
            raise ValueError(
                f"expected {self.ring.controls} control values, got shape {x.shape}"
            )
        if t is None:
            if self.uses_time_slots():
                raise ValueError("polynomial still uses time slots; pass t values")
            vals = np.concatenate([x, np.zeros(self.ring.times)])
        else:
            t = np.asarray(t, dtype=float)
            if t.shape != (self.ring.times,):
                raise ValueError(
                    f"expected {self.ring.times} time values, got shape {t.shape}"
                )
            vals = np.concatenate([x, t])
        acc = 0j
        for e, c in self.sorted_terms():
            term = c
            for v, p in zip(vals, e):
                if p:
                    term *= v**p
            acc += term
        return acc

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at an (n, controls) array of real points."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.ring.controls:
            raise ValueError("points must have shape (n, controls)")
        if self.uses_time_slots():
            raise ValueError("polynomial still uses time slots")
        maxdeg = self.degree()
        n, m = points.shape
        # powers[v][p] = column v raised to p
        powers = [
            np.vander(points[:, v], N=maxdeg + 1, increasing=True) for v in range(m)
        ]
        acc = np.zeros(n, dtype=complex)
        for e, c in self.sorted_terms():
            term = np.full(n, c, dtype=complex)
            for v in range(m):
                if e[v]:
                    term *= powers[v][:, e[v]]
            acc += term
        return acc

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{self.ring.var_name(i)}^{p}" if p > 1 else self.ring.var_name(i)
                for i, p in enumerate(e)
                if p
            )
            bits.append(f"({c:g}){'*' + mono if mono else ''}")
        return " + ".join(bits)


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def poly_eval(p: Polynomial, x, t=None) -> complex:
    return p.eval(x, t)


class PolyMatrix:
    """Square matrix of polynomials, stored as exponent -> coefficient matrix.

    All entries share one ring context.  The representation is equivalent to a
    d x d grid of :class:`Polynomial` (see :meth:`entry` / :meth:`from_entries`)
    but keeps products as dense numpy matrix products.
    """

    __slots__ = ("ring", "dim", "coeffs")

    def __init__(self, ring: Ring, dim: int, coeffs: dict | None = None):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        self.ring = ring
        self.dim = dim
        cleaned: dict[tuple[int, ...], np.ndarray] = {}
        if coeffs:
            for exps, mat in coeffs.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != ring.arity or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent vector {exps}")
                mat = np.asarray(mat, dtype=complex)
                if mat.shape != (dim, dim):
                    raise ValueError(f"coefficient shape {mat.shape} != ({dim},{dim})")
                if exps in cleaned:
                    cleaned[exps] = cleaned[exps] + mat
                else:
                    cleaned[exps] = mat.copy()
        self.coeffs = {
            e: m for e, m in cleaned.items() if np.abs(m).max() >= PRUNE_EPS
        }
        for m in self.coeffs.values():
            # zero out sub-threshold entries so entry() round-trips cleanly
            m[np.abs(m) < PRUNE_EPS] = 0.0
            m.setflags(write=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring, dim: int) -> "PolyMatrix":
        return cls(ring, dim)

    @classmethod
    def constant(cls, ring: Ring, mat: np.ndarray) -> "PolyMatrix":
        mat = np.asarray(mat, dtype=complex)
        return cls(ring, mat.shape[0], {(0,) * ring.arity: mat})

    @classmethod
    def identity(cls, ring: Ring, dim: int) -> "PolyMatrix":
        return cls.constant(ring, np.eye(dim))

    @classmethod
    def from_entries(cls, grid) -> "PolyMatrix":
        """Build from a d x d nested sequence of Polynomial entries."""
        dim = len(grid)
        ring = grid[0][0].ring
        coeffs: dict[tuple[int, ...], np.ndarray] = {}
        for i in range(dim):
            if len(grid[i]) != dim:
                raise ValueError("grid must be square")
            for j in range(dim):
                p = grid[i][j]
                if p.ring != ring:
                    raise ValueError("all entries must share one ring context")
                for e, c in p.terms.items():
                    if e not in coeffs:
                        coeffs[e] = np.zeros((dim, dim), dtype=complex)
                    coeffs[e][i, j] = c
        return cls(ring, dim, coeffs)

    # -- access ------------------------------------------------------------

    def entry(self, i: int, j: int) -> Polynomial:
        return Polynomial(self.ring, {e: m[i, j] for e, m in self.coeffs.items()})

    def entries(self) -> list[list[Polynomial]]:
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_entry_degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def uses_time_slots(self) -> bool:
        nc = self.ring.controls
        return any(any(e[nc:]) for e in self.coeffs)

    def sorted_coeffs(self):
        return sorted(self.coeffs.items(), key=lambda kv: grlex_key(kv[0]))

    def filter_degree(self, total: int) -> "PolyMatrix":
        """Keep only terms whose total degree equals ``total``."""
        return PolyMatrix(
            self.ring,
            self.dim,
            {e: m for e, m in self.coeffs.items() if sum(e) == total},
        )

    # -- arithmetic --------------------------------------------------------

    def _check_compat(self, other):
        _check_same_ring(self, other)
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_compat(other)
        merged = {e: m for e, m in self.coeffs.items()}
        for e, m in other.coeffs.items():
            merged[e] = merged[e] + m if e in merged else m
        return PolyMatrix(self.ring, self.dim, merged)

    def __neg__(self):
        return PolyMatrix(self.ring, self.dim, {e: -m for e, m in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self + (-other)

    def __matmul__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_compat(other)
        prod: dict[tuple[int, ...], np.ndarray] = {}
        for e1, m1 in self.coeffs.items():
            for e2, m2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                block = m1 @ m2
                if e in prod:
                    prod[e] = prod[e] + block
                else:
                    prod[e] = block
        return PolyMatrix(self.ring, self.dim, prod)

    def scale(self, factor) -> "PolyMatrix":
        """Multiply by a scalar or by a scalar Polynomial."""
        if isinstance(factor, Polynomial):
            _check_same_ring(self, factor)
            prod: dict[tuple[int, ...], np.ndarray] = {}
            for e1, c in factor.terms.items():
                for e2, m in self.coeffs.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    block = c * m
                    prod[e] = prod[e] + block if e in prod else block
            return PolyMatrix(self.ring, self.dim, prod)
        return PolyMatrix(
            self.ring, self.dim, {e: factor * m for e, m in self.coeffs.items()}
        )

    def eval(self, x, t=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ring.controls,):
            raise ValueError(
                f"expected {self.ring.controls} control values, got shape {x.shape}"
            )
        if t is None:
            if self.uses_time_slots():
                raise ValueError("matrix still uses time slots; pass t values")
            vals = np.concatenate([x, np.zeros(self.ring.times)])
        else:
            t = np.asarray(t, dtype=float)
            if t.shape != (self.ring.times,):
                raise ValueError(
                    f"expected {self.ring.times} time values, got shape {t.shape}"
                )
            vals = np.concatenate([x, t])
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for e, m in self.sorted_coeffs():
            w = 1.0
            for v, p in zip(vals, e):
                if p:
                    w *= v**p
            acc += w * m
        return acc

    def __repr__(self):
        return f"PolyMatrix(dim={self.dim}, ring={self.ring}, terms={len(self.coeffs)})"


def pm_mul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    return a @ b


def pm_commutator(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Matrix commutator a@b - b@a."""
    return a @ b - b @ a


def pm_eval(a: PolyMatrix, x, t=None) -> np.ndarray:
    return a.eval(x, t)


def _simplex_weight(time_exps: tuple[int, ...]) -> tuple[int, int]:
    """Iterated ordered integration of t1^a1 ... tk^ak over 0<=tk<=...<=t1<=T.

    Integrating innermost-first, each level contributes a factor 1/(e+1) and
    raises the next-outer exponent by e+1.  Returns (power, denominator) with
    the integral equal to T**power / denominator.
    """
    carry = 0
    denom = 1
    for a in reversed(time_exps):
        e = a + carry
        denom *= e + 1
        carry = e + 1
    return carry, denom


def simplex_integrate(obj, horizon: float):
    """Integrate out all time slots over the ordered simplex of size ``horizon``.

    t1 is the outermost variable.  Works on a Polynomial or a PolyMatrix;
    the result lives in the time-free ring with the same control slots.
    """
    if horizon <= 0:
        raise ValueError("integration horizon must be positive")
    ring = obj.ring
    if ring.times < 1:
        raise ValueError("ring has no time slots to integrate")
    nc = ring.controls
    out_ring = ring.drop_times()
    if isinstance(obj, Polynomial):
        out: dict[tuple[int, ...], complex] = {}
        for e, c in obj.terms.items():
            power, denom = _simplex_weight(e[nc:])
            key = e[:nc]
            out[key] = out.get(key, 0j) + c * horizon**power / denom
        return Polynomial(out_ring, out)
    if isinstance(obj, PolyMatrix):
        out_m: dict[tuple[int, ...], np.ndarray] = {}
        for e, m in obj.coeffs.items():
            power, denom = _simplex_weight(e[nc:])
            key = e[:nc]
            block = m * (horizon**power / denom)
            out_m[key] = out_m[key] + block if key in out_m else block
        return PolyMatrix(out_ring, obj.dim, out_m)
    raise TypeError(f"cannot integrate object of type {type(obj)!r}")


def frobenius_sq(a: PolyMatrix) -> Polynomial:
    """Squared Frobenius norm of a PolyMatrix as a real polynomial in x.

    For real control values, ||A(x)||_F^2 = sum over coefficient pairs of
    x^(a+b) * <A_b, A_a>_F.  Pairing (a, b) with (b, a) keeps the result real
    by construction; any larger imaginary residue is an error.
    """
    if a.uses_time_slots() or a.ring.times != 0:
        raise ValueError("frobenius_sq requires a time-free ring")
    items = a.sorted_coeffs()
    out: dict[tuple[int, ...], float] = {}
    for ia, (ea, ma) in enumerate(items):
        # diagonal pair: exactly real
        key = tuple(2 * v for v in ea)
        out[key] = out.get(key, 0.0) + float(np.vdot(ma, ma).real)
        for eb, mb in items[ia + 1 :]:
            ip = np.vdot(mb, ma)  # conj(B) . A
            key = tuple(p + q for p, q in zip(ea, eb))
            out[key] = out.get(key, 0.0) + 2.0 * float(ip.real)
    return Polynomial(a.ring, out)
