"""Acceptance suite: ten observable criteria, one test and one printed
pass/fail line each.

Run with -s (or read captured output) to see the per-criterion lines; every
line carries the measured quantities behind the verdict.
"""

import time

import numpy as np
import pytest

from conftest import rand_family, rand_invertible, rand_operator, rand_unit
from blockjacobi.coeffs import carleman_diagnostic, custom_family, total_variation
from blockjacobi.commutator import (
    ANWeights,
    CustomWeights,
    check_growth_criterion,
    check_log_weight_criterion,
    commutator_value,
)
from blockjacobi.fixtures import (
    X_OP,
    Y_OP,
    indeterminate_doubling,
    paper_blockrepeat,
    paper_constant,
    paper_logweight,
    paper_unbounded,
    sqrt_growth,
)
from blockjacobi.opcore import adj, invert, neg_part, op_norm, sym
from blockjacobi.recurrence import (
    propagate,
    transfer,
    transfer_inv,
    window_product,
)
from blockjacobi.turan import (
    COMPLETE_INDETERMINATE,
    asymptotic_band,
    christoffel_limit,
    definiteness_scan,
    exact_asymptotics,
    extract_periodic_limits,
    indeterminacy_probe,
    lambda_scan,
    limit_form,
    make_periodic_limits,
    principal_minors,
    turan_traces,
    turan_value,
)

XN = op_norm(X_OP)
XINV = invert(X_OP)
LAM_LO = (-3.0 + np.sqrt(13.0)) / 2.0
LAM_HI = (9.0 - np.sqrt(37.0)) / 2.0
Q_EDGE = 3.0 - np.sqrt(5.0)


def _line(num, ok, detail):
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    return f"criterion {num:02d}: {detail}"


def _unit_sample(rng, count, n):
    return [rand_unit(rng, n) for _ in range(count)]


def test_criterion_01_definiteness_interval_endpoints():
    t0 = time.perf_counter()
    lim = extract_periodic_limits(paper_constant(), 1, 2000)
    lset = lambda_scan(lim, (-5.0, 10.0), grid=201)
    elapsed = time.perf_counter() - t0
    single = len(lset.intervals) == 1
    err_lo = abs(lset.intervals[0].lo - LAM_LO) if single else np.inf
    err_hi = abs(lset.intervals[0].hi - LAM_HI) if single else np.inf
    ok = single and err_lo < 1e-6 and err_hi < 1e-6 and elapsed < 1.0
    detail = _line(1, ok, f"endpoint errs {err_lo:.1e}, {err_hi:.1e}; {elapsed:.2f}s")
    assert ok, detail


def test_criterion_02_minor_polynomials():
    lim = extract_periodic_limits(paper_constant(), 1, 2000)
    rng = np.random.default_rng(102)
    worst = 0.0
    for lam in rng.uniform(-4.0, 4.0, 20):
        lam = float(lam)
        got = principal_minors(XN * limit_form(lim, lam))
        want = [1.0, 1.0,
                -lam ** 2 / 2.0 + 1.5 * lam - 0.25,
                lam ** 4 / 16.0 - 3.0 * lam ** 3 / 8.0 - 17.0 * lam ** 2 / 16.0
                + 21.0 * lam / 8.0 - 11.0 / 16.0]
        worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
    at_one = principal_minors(XN * limit_form(lim, 1.0))
    err_one = np.abs(np.array(at_one) - [1.0, 1.0, 0.75, 0.5625]).max()
    ok = worst < 1e-9 and err_one < 1e-9
    detail = _line(2, ok, f"poly err {worst:.1e} over 20 draws, at 1: {err_one:.1e}")
    assert ok, detail


def test_criterion_03_q_band_endpoints():
    def form_at(q):
        lim = make_periodic_limits(1, [np.zeros((2, 2))], [q * XINV @ Y_OP],
                                   [np.eye(2)], [X_OP / XN])
        return limit_form(lim, 0.0)

    lset = definiteness_scan(form_at, -1.5, 1.5, grid=301)
    single = len(lset.intervals) == 1
    err_lo = abs(lset.intervals[0].lo + Q_EDGE) if single else np.inf
    err_hi = abs(lset.intervals[0].hi - Q_EDGE) if single else np.inf
    # Cross-check against limits extracted from the actual q = 1/2 family.
    lim_half = extract_periodic_limits(paper_unbounded(), 1, 20000)
    extract_err = op_norm(lim_half.Q[0] - 0.5 * XINV @ Y_OP)
    ok = single and err_lo < 1e-6 and err_hi < 1e-6 and extract_err < 1e-6
    detail = _line(3, ok, f"edge errs {err_lo:.1e}, {err_hi:.1e}; "
                          f"extracted-Q err {extract_err:.1e}")
    assert ok, detail


def test_criterion_04_band_stable_under_horizon_doubling():
    rng = np.random.default_rng(104)
    alphas = _unit_sample(rng, 20, 4)
    t0 = time.perf_counter()
    base = asymptotic_band(paper_constant(), 1, 1.0, alphas, 5000)
    doubled = asymptotic_band(paper_constant(), 1, 1.0, alphas, 10000)
    elapsed = time.perf_counter() - t0
    change = abs(doubled.ratio - base.ratio) / base.ratio
    finite = np.isfinite(base.ratio) and base.c1 > 0.0
    ok = finite and change < 0.05 and elapsed < 5.0
    detail = _line(4, ok, f"ratio {base.ratio:.3f}, doubling change {change:.1e}; "
                          f"{elapsed:.2f}s")
    assert ok, detail


def test_criterion_05_turan_values_cauchy_and_nonvanishing():
    rng = np.random.default_rng(105)
    alphas = _unit_sample(rng, 20, 4)
    traces = turan_traces(paper_constant(), 1, 1.0, alphas, 2000)
    worst_osc, min_g = 0.0, np.inf
    for tr in traces:
        tail = tr.values[-200:]
        mean = float(tail.mean())
        worst_osc = max(worst_osc, float(tail.max() - tail.min()) / abs(mean))
        min_g = min(min_g, abs(mean))
    ok = worst_osc < 1e-6 and min_g > 0.1
    detail = _line(5, ok, f"last-decade oscillation {worst_osc:.1e}, "
                          f"min |g| {min_g:.3f} over 20 seeds")
    assert ok, detail


def test_criterion_06_algebraic_identity_suite():
    rng = np.random.default_rng(106)
    fails = []

    # symmetrization congruence, additivity, and norm contraction
    worst_cong = worst_add = worst_norm = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        x, y = rand_operator(rng, d), rand_operator(rng, d)
        scale = max(1.0, op_norm(y) ** 2 * op_norm(x))
        worst_cong = max(worst_cong,
                         op_norm(adj(y) @ sym(x) @ y - sym(adj(y) @ x @ y)) / scale)
        scale = max(1.0, op_norm(x) + op_norm(y))
        worst_add = max(worst_add,
                        op_norm(sym(x + y) - sym(x) - sym(y)) / scale)
        worst_norm = max(worst_norm, op_norm(sym(x)) - op_norm(x))
    if worst_cong >= 1e-10:
        fails.append(f"congruence {worst_cong:.1e}")
    if worst_add >= 1e-12:
        fails.append(f"additivity {worst_add:.1e}")
    if worst_norm > 1e-12:
        fails.append(f"contraction {worst_norm:.1e}")

    # weight-shift identity of the transfer step
    worst_shift = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        fam = rand_family(rng, d, n + 2)
        lam = float(rng.uniform(-3, 3))
        zero = np.zeros((d, d))
        w_hi = np.block([[zero, -fam.a(n)], [adj(fam.a(n)), zero]])
        w_lo = np.block([[zero, -fam.a(n - 1)], [adj(fam.a(n - 1)), zero]])
        lhs = w_hi @ transfer(fam, n, lam)
        rhs = adj(transfer_inv(fam, n, lam)) @ w_lo
        worst_shift = max(worst_shift, op_norm(lhs - rhs) / max(1.0, op_norm(rhs)))
    if worst_shift >= 1e-9:
        fails.append(f"weight shift {worst_shift:.1e}")

    # dual representation of the weighted functional
    worst_dual = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        fam = rand_family(rng, d, n + 4)
        lam = float(rng.uniform(-2, 2))
        weights = [rand_invertible(rng, d) for _ in range(n + 4)]
        strat = CustomWeights(lambda k, w=weights: w[k])
        traj = propagate(fam, lam, rand_unit(rng, 2 * d), n + 3)
        vi = commutator_value(fam, strat, n, lam, traj=traj,
                              representation="interior")
        vb = commutator_value(fam, strat, n, lam, traj=traj,
                              representation="boundary")
        worst_dual = max(worst_dual, abs(vi - vb) / max(1.0, abs(vi)))
    if worst_dual >= 1e-9:
        fails.append(f"dual representation {worst_dual:.1e}")

    # transfer times its inverse
    worst_inv = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        fam = rand_family(rng, d, n + 2)
        z = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        prod = transfer(fam, n, z) @ transfer_inv(fam, n, z)
        worst_inv = max(worst_inv, op_norm(prod - np.eye(2 * d)))
    if worst_inv >= 1e-9:
        fails.append(f"transfer inverse {worst_inv:.1e}")

    # product rule for the windowed N-variation
    violations = 0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        N = int(rng.integers(1, 3))
        length = int(rng.integers(6, 16))
        xs = [rand_operator(rng, d) for _ in range(length + N)]
        ys = [rand_operator(rng, d) for _ in range(length + N)]
        prod = lambda n: xs[n] @ ys[n]
        lhs = total_variation(prod, N, (0, length)).partial_sum
        sup_x = max(op_norm(m) for m in xs)
        sup_y = max(op_norm(m) for m in ys)
        rhs = (sup_x * total_variation(lambda n: ys[n], N, (0, length)).partial_sum
               + sup_y * total_variation(lambda n: xs[n], N, (0, length)).partial_sum)
        if lhs > rhs + 1e-9:
            violations += 1
    if violations:
        fails.append(f"variation product {violations} violations")

    ok = not fails
    detail = _line(6, ok, "; ".join(fails) if fails else
                   f"7 identities x 100 instances, worst rel err {worst_shift:.1e}")
    assert ok, detail


def test_criterion_07_increment_bounds():
    rng = np.random.default_rng(107)

    # decrease bound for weighted functionals
    worst_neg = 0.0
    for _ in range(110):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        fam = rand_family(rng, d, n + 5)
        lam = float(rng.uniform(-2, 2))
        weights = [rand_invertible(rng, d) for _ in range(n + 5)]
        strat = CustomWeights(lambda k, w=weights: w[k])
        traj = propagate(fam, lam, rand_unit(rng, 2 * d), n + 3)
        s_now = commutator_value(fam, strat, n, lam, traj=traj)
        s_next = commutator_value(fam, strat, n + 1, lam, traj=traj)
        denom = np.linalg.norm(traj.u[n]) ** 2 + np.linalg.norm(traj.u[n + 1]) ** 2
        lhs = max(0.0, -(s_next - s_now)) / denom
        cross = fam.a_inv(n - 1) @ weights[n - 1] @ fam.a(n)
        increment = weights[n + 1] @ adj(fam.a(n + 1)) - adj(fam.a(n)) @ cross
        rhs = (op_norm(neg_part(sym(increment)))
               + abs(lam) * op_norm(cross - weights[n])
               + op_norm(weights[n] @ fam.b(n + 1) - fam.b(n) @ cross))
        if rhs > 0:
            worst_neg = max(worst_neg, lhs / rhs)

    # window-form increment bound under coefficient variation
    worst_var = 0.0
    for _ in range(110):
        d = int(rng.integers(1, 4))
        N = int(rng.integers(1, 3))
        n = int(rng.integers(1, 5))
        fam = rand_family(rng, d, n + N + 5)
        if rng.integers(0, 2):
            z = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        else:
            z = complex(rng.uniform(-2, 2), 0.0)
        alpha = rand_unit(rng, 2 * d)
        traj = propagate(fam, z, alpha, n + 2)
        s_now = turan_value(fam, N, n, z, alpha)
        s_next = turan_value(fam, N, n + 1, z, alpha)
        denom = np.linalg.norm(traj.u[n - 1]) ** 2 + np.linalg.norm(traj.u[n]) ** 2
        lhs = abs(s_next - s_now) / denom
        budget = (
            op_norm(fam.a_inv(n + N) @ adj(fam.a(n + N - 1))
                    - fam.a_inv(n) @ adj(fam.a(n - 1)))
            + abs(z) * op_norm(fam.a_inv(n + N) - fam.a_inv(n))
            + abs(z - np.conj(z)) * op_norm(fam.a_inv(n + N))
            + op_norm(fam.a_inv(n + N) @ fam.b(n + N) - fam.a_inv(n) @ fam.b(n))
        )
        rhs = op_norm(window_product(fam, z, n, N)) * fam.norm_a(n + N) * budget
        if rhs > 0:
            worst_var = max(worst_var, lhs / rhs)

    ok = worst_neg <= 1.0 + 1e-6 and worst_var <= 1.0 + 1e-6
    detail = _line(7, ok, f"worst ratios: decrease {worst_neg:.3f}, "
                          f"variation {worst_var:.3f} over 110 instances each")
    assert ok, detail


def test_criterion_08_complete_indeterminacy():
    t0 = time.perf_counter()
    fam = indeterminate_doubling()
    probe = indeterminacy_probe(fam, [1j, -1j, 0.0, 1 + 1j], horizon=900)
    car = carleman_diagnostic(fam, 900)
    elapsed = time.perf_counter() - t0
    want = 2.0 / XN
    partial_err = abs(car.partial_sum - want) / want
    dims_ok = all(e["solution_dim"] == 2 and e["ok"] for e in probe.per_z)
    ok = (probe.verdict == COMPLETE_INDETERMINATE and car.verdict == "converges"
          and partial_err < 1e-6 and dims_ok and elapsed < 2.0)
    detail = _line(8, ok, f"verdict {probe.verdict}, geometric-sum err "
                          f"{partial_err:.1e}, dims 2 at 4 points; {elapsed:.2f}s")
    assert ok, detail


def test_criterion_09_exact_asymptotics_and_christoffel():
    t0 = time.perf_counter()
    fam = sqrt_growth()
    lim = extract_periodic_limits(fam, 1, 100000)
    rng = np.random.default_rng(109)
    alphas = _unit_sample(rng, 20, 4)
    rep = exact_asymptotics(fam, lim, 0.0, alphas, 100000)
    herm = op_norm(rep.C - adj(rep.C))
    worst_gap = max(e["gap"] / abs(e["g"]) for e in rep.per_alpha)
    traj = propagate(fam, 0.0, alphas[0], 100000)
    chris = christoffel_limit(fam, rep.C, traj)
    g = rep.per_alpha[0]["g"]
    chris_gap = abs(chris.limit_estimate - g / 2.0) / abs(g / 2.0)
    elapsed = time.perf_counter() - t0
    ok = herm < 1e-12 and worst_gap < 0.01 and chris_gap < 0.02 and elapsed < 30.0
    detail = _line(9, ok, f"C self-adjoint to {herm:.1e}, trace gap {worst_gap:.1e}, "
                          f"ratio gap {chris_gap:.1e}; {elapsed:.1f}s")
    assert ok, detail


def test_criterion_10_hypothesis_checkers():
    fails = []

    growth = check_growth_criterion(paper_blockrepeat(), 10000)
    if not growth.passed:
        fails.append("growth criterion rejected the block-repeat family")
    for name in ("neg_part_summable", "commutator_summable",
                 "norm_square_sum_diverges"):
        if "partial_sum" not in growth.item(name).evidence:
            fails.append(f"growth {name} evidence lacks a partial sum")

    if check_growth_criterion(paper_constant(), 4000).passed:
        fails.append("growth criterion accepted bounded weights")
    linear_b = custom_family(2, lambda n: (n + 1.0) * np.eye(2),
                             lambda n: (n + 1.0) * Y_OP)
    rep = check_growth_criterion(linear_b, 4000)
    if rep.passed or rep.item("inverse_b_vanishes").ok:
        fails.append("growth criterion accepted unbounded b over a")

    logw = check_log_weight_criterion(paper_logweight(), 1, horizon=10000)
    if not logw.passed:
        fails.append("log-weight criterion rejected the log-product family")
    if "partial_sum" not in logw.item("envelope_slack_summable").evidence:
        fails.append("log-weight envelope evidence lacks a partial sum")

    fast = custom_family(2, lambda n: 2.0 ** n * np.eye(2),
                         lambda n: np.zeros((2, 2)))
    rep = check_log_weight_criterion(fast, 1, horizon=600)
    if rep.passed or rep.item("envelope_slack_summable").ok:
        fails.append("log-weight criterion accepted doubling weights")
    unb = custom_family(2, lambda n: paper_logweight().a(n),
                        lambda n: np.sqrt(n + 1.0) * Y_OP)
    rep = check_log_weight_criterion(unb, 1, horizon=4000)
    if rep.passed or rep.item("b_bounded").ok:
        fails.append("log-weight criterion accepted unbounded b")

    ok = not fails
    detail = _line(10, ok, "; ".join(fails) if fails else
                   "both checkers pass their example and reject 2+2 counter-families")
    assert ok, detail
