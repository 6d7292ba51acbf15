"""Tests for the moment relaxation pipeline and the embedded SDP solver."""

import numpy as np
import pytest

from gatesynth.hamlib import ibmq3
from gatesynth.magnus import PolyControl, ProblemSpec, build_lambda
from gatesynth.numerics import expm_antihermitian
from gatesynth.objective import TargetGate, build_objective
from gatesynth.polymat import Polynomial, Ring, pm_eval
from gatesynth.pop import (
    PolishDivergenceError,
    SDPProblem,
    ball_scan_minimum,
    extract_minimizer,
    minimize_global,
    moment_relax,
    newton_polish,
    sdp_solve,
)
from gatesynth.pop.polish import gradient_polys, hessian_polys
from gatesynth.pop.relax import monomials_up_to


def planted_instance(seed, m=3, horizon=1.0, order=3):
    sys_ = ibmq3()
    spec = ProblemSpec(sys_.h0, sys_.hc, horizon, PolyControl(m), label="ibmq3")
    lam = build_lambda(spec, order)
    rng = np.random.default_rng(seed)
    xstar = rng.uniform(-1, 1, m)
    target = TargetGate(expm_antihermitian(pm_eval(lam, xstar)))
    return build_objective(lam, target.generator), xstar


# ---------------------------------------------------------------- sdp_solve


def test_sdp_psd_boundary_2x2():
    # min x subject to [[x,1],[1,x]] PSD has optimum x = 1
    c = (np.array([[1.0, 0.0], [0.0, 0.0]]),)
    a = (np.stack([np.array([[0.0, 0.5], [0.5, 0.0]]), np.diag([1.0, -1.0])]),)
    prob = SDPProblem((2,), c, a, np.array([1.0, 0.0]))
    sol = sdp_solve(prob)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 1.0) < 1e-6
    assert abs(sol.dual_value - 1.0) < 1e-6


def test_sdp_identity_cost_3x3():
    e11 = np.zeros((3, 3))
    e11[0, 0] = 1.0
    prob = SDPProblem((3,), (np.eye(3),), (e11[None],), np.array([1.0]))
    sol = sdp_solve(prob)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 1.0) < 1e-6
    x = sol.x_blocks[0]
    assert abs(x[0, 0] - 1.0) < 1e-6
    assert np.abs(x[1:, 1:]).max() < 1e-6


def test_sdp_rejects_zero_constraint():
    z = np.zeros((2, 2))
    prob = SDPProblem((2,), (np.eye(2),), (z[None],), np.array([0.0]))
    with pytest.raises(ValueError):
        sdp_solve(prob)


def test_sdp_validates_shapes():
    with pytest.raises(ValueError):
        SDPProblem((2,), (np.eye(3),), (np.zeros((1, 2, 2)),), np.array([1.0]))
    with pytest.raises(ValueError):
        SDPProblem(
            (2,),
            (np.array([[0.0, 1.0], [0.0, 0.0]]),),
            (np.eye(2)[None],),
            np.array([1.0]),
        )


def test_sdp_block_structure():
    # two independent blocks solved jointly: min x+y with x,y >= 1 on diagonals
    c = (np.eye(1), np.eye(1))
    a1 = np.ones((1, 1, 1)), np.zeros((1, 1, 1))
    a2 = np.zeros((1, 1, 1)), np.ones((1, 1, 1))
    a = (np.concatenate([a1[0], a2[0]]), np.concatenate([a1[1], a2[1]]))
    prob = SDPProblem((1, 1), c, a, np.array([1.0, 2.0]))
    sol = sdp_solve(prob)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 3.0) < 1e-6


# ------------------------------------------------------------- moment_relax


def test_monomial_basis_count():
    assert len(monomials_up_to(3, 3)) == 20
    assert len(monomials_up_to(3, 2)) == 10
    assert len(monomials_up_to(1, 2)) == 3


def test_relax_sos_square_first_order():
    # p = x^2 is already a square: first-order bound is 0
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    prob, relax = moment_relax(x * x, 1.0, 1)
    assert relax.basis_size == 2
    sol = sdp_solve(prob)
    bound = relax.constant_term - sol.primal_value
    assert sol.status == "optimal"
    assert abs(bound) < 1e-7


def test_relax_shifted_square_moment():
    # grid-scan oracle for min of (x-1/2)^2 on [-1,1]: 0 at x = 1/2
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    p = (x - 0.5) * (x - 0.5)
    grid = np.linspace(-1.0, 1.0, 200001)
    oracle = float(np.min((grid - 0.5) ** 2))
    prob, relax = moment_relax(p, 1.0, 1)
    sol = sdp_solve(prob)
    bound = relax.constant_term - sol.primal_value
    assert abs(bound - oracle) < 1e-7
    y1 = sol.y[relax.moment_index[(1,)]]
    assert abs(y1 - 0.5) < 1e-3


def test_relax_rejects_low_order():
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    with pytest.raises(ValueError):
        moment_relax(x * x * x * x, 1.0, 1)


def test_relax_rejects_bad_radius():
    r = Ring(1)
    with pytest.raises(ValueError):
        moment_relax(Polynomial.variable(r, 0), 0.0, 1)


def test_relax_block_sizes_match_binomial():
    r = Ring(3)
    x = Polynomial.variable(r, 0)
    p = x * x * x * x * x * x
    prob, relax = moment_relax(p, 1.0, 3)
    assert relax.basis_size == 20
    assert prob.block_sizes[0] == 20
    assert prob.block_sizes[1] == 10


# -------------------------------------------------------- extract_minimizer


def test_extract_point_mass_exact():
    r = Ring(3)
    x = Polynomial.variable(r, 0)
    prob, relax = moment_relax(x * x, 1.5, 2)
    point = np.array([0.3, -0.2, 0.7])
    y = relax.point_moments(point)
    got = extract_minimizer(relax, y)
    assert got is not None
    np.testing.assert_allclose(got, point, atol=1e-12)


def test_extract_two_point_measure_returns_none():
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    prob, relax = moment_relax((x * x - 1.0) * (x * x - 1.0), 1.5, 2)
    y = 0.5 * (relax.point_moments(np.array([1.0]))
               + relax.point_moments(np.array([-1.0])))
    assert extract_minimizer(relax, y) is None


def test_extract_planted_single_control():
    # single-control planted instance: the relaxation concentrates on the
    # minimizer and extraction lands within 1e-4 before any polish
    obj, xstar = planted_instance(3, m=1, horizon=0.5)
    scale = max(abs(c) for c in obj.real_coeff_dict().values())
    prob, relax = moment_relax(obj * (1.0 / scale), 1.05, 2)
    sol = sdp_solve(prob)
    xh = extract_minimizer(relax, sol.y)
    assert xh is not None
    assert abs(xh[0] - xstar[0]) < 1e-4


# ------------------------------------------------------------ newton_polish


def test_polish_quadratic_one_step():
    r = Ring(2)
    x0 = Polynomial.variable(r, 0)
    x1 = Polynomial.variable(r, 1)
    p = (x0 - 0.25) * (x0 - 0.25) + 2.0 * (x1 + 0.5) * (x1 + 0.5)
    got = newton_polish(p, np.array([0.9, 0.9]), 2.0, max_steps=1)
    np.testing.assert_allclose(got, [0.25, -0.5], atol=1e-12)


def test_polish_quartic_flat_minimum():
    # derivative 4(x-1/2)^3 has its zero at 1/2; bisection oracle
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    p = (x - 0.5) * (x - 0.5) * (x - 0.5) * (x - 0.5)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if 4 * (mid - 0.5) ** 3 < 0:
            lo = mid
        else:
            hi = mid
    oracle = 0.5 * (lo + hi)
    got = newton_polish(p, np.array([0.0]), 1.0)
    assert abs(got[0] - oracle) < 1e-3


def test_polish_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    obj, _ = planted_instance(5)
    grads = gradient_polys(obj)
    h = 1e-5
    for _ in range(10):
        x = rng.uniform(-1, 1, 3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (obj.eval(x + e).real - obj.eval(x - e).real) / (2 * h)
            sym = grads[k].eval(x).real
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(fd))


def test_polish_hessian_matches_finite_differences():
    rng = np.random.default_rng(12)
    obj, _ = planted_instance(6)
    grads = gradient_polys(obj)
    hess = hessian_polys(grads)
    h = 1e-5
    x = rng.uniform(-1, 1, 3)
    for i in range(3):
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (grads[i].eval(x + e).real - grads[i].eval(x - e).real) / (2 * h)
            sym = hess[i][j].eval(x).real
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(fd))


def test_polish_divergence_raises():
    # maximize-like start: p = -x^2 pushes the iterate away without bound
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    p = Polynomial.constant(r, 0.0) - x * x
    with pytest.raises(PolishDivergenceError):
        newton_polish(p, np.array([0.5]), 0.4)


def test_polish_validates_start_shape():
    r = Ring(2)
    p = Polynomial.variable(r, 0)
    with pytest.raises(ValueError):
        newton_polish(p, np.array([1.0]), 1.0)


# ---------------------------------------------------------- minimize_global


def test_minimize_sum_of_squares():
    r = Ring(2)
    x0 = Polynomial.variable(r, 0)
    x1 = Polynomial.variable(r, 1)
    res = minimize_global(x0 * x0 + x1 * x1)
    np.testing.assert_allclose(res.x, [0.0, 0.0], atol=1e-8)
    assert res.value <= 1e-12
    assert abs(res.gap) <= 1e-9


def test_minimize_constant_polynomial():
    r = Ring(2)
    res = minimize_global(Polynomial.constant(r, 3.5))
    assert abs(res.bound - 3.5) < 1e-8
    assert abs(res.value - 3.5) < 1e-12
    assert np.linalg.norm(res.x) <= res.radius + 1e-9


def test_minimize_planted_instance():
    obj, xstar = planted_instance(42, horizon=0.5)
    res = minimize_global(obj)
    assert res.status in ("rank-1", "polished")
    assert res.gap <= 1e-6
    assert np.linalg.norm(res.x - xstar) < 1e-4
    assert res.gap >= -1e-8


def test_minimize_gap_never_significantly_negative():
    for seed in range(6):
        obj, _ = planted_instance(seed)
        res = minimize_global(obj)
        assert res.gap >= -1e-8


def test_minimize_respects_explicit_order():
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    res = minimize_global(x * x, order=2)
    assert res.order >= 2
    assert abs(res.value) < 1e-10


def test_minimize_rejects_too_small_order():
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    with pytest.raises(ValueError):
        minimize_global(x * x * x * x, order=1)


def test_bound_below_ball_scan():
    # certificate validity against a dense deterministic scan
    for seed in (0, 1, 2):
        obj, _ = planted_instance(seed)
        res = minimize_global(obj)
        scan = ball_scan_minimum(obj, res.radius, count=200_000)
        assert res.bound <= scan + 1e-7


def test_bound_monotone_in_order():
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    p = (x - 0.5) * (x - 0.5)
    bounds = []
    for d in (1, 2, 3):
        res = minimize_global(p, order=d)
        bounds.append(res.bound)
    for lo, hi in zip(bounds, bounds[1:]):
        assert hi >= lo - 1e-8


def test_extraction_soundness_pre_polish():
    # whenever extraction succeeds the unpolished point is already close to
    # optimal in value
    for seed in (3, 5, 11):
        obj, _ = planted_instance(seed, m=1, horizon=0.5)
        res = minimize_global(obj, polish=False)
        if res.status == "rank-1":
            assert obj.eval(res.x).real - res.bound <= 1e-5


def test_multistart_merge_deterministic():
    # quartic with two symmetric wells: the same well must win every run
    r = Ring(1)
    x = Polynomial.variable(r, 0)
    p = (x * x - 1.0) * (x * x - 1.0)
    picks = {float(np.round(minimize_global(p).x[0], 6)) for _ in range(3)}
    assert len(picks) == 1


def test_timings_recorded():
    obj, _ = planted_instance(9)
    res = minimize_global(obj)
    assert res.timings["relax"] > 0
    assert res.timings["solve"] > 0
