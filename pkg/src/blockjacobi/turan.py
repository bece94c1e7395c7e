"""Turan-determinant functionals of transfer-matrix windows.

The central object is the quadratic form

    Q_n^z(v) = <sym{ diag(a_{n+N-1}, a_{n+N-1}^*) E X_n(z) } v, v> / ||a_{n+N-1}||

with X_n(z) the ordered window product of N transfer matrices and
E = [[0, -Id], [Id, 0]].  Evaluated along a trajectory it yields the shifted
Turan sequence S_n; its n -> infinity limit form, built from the periodic
limits of a_n^{-1}, a_n^{-1} b_n, a_n^{-1} a_{n-1}^* and a_n / ||a_n||,
decides membership of a real parameter in the asymptotic band through strict
definiteness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import coeffs as _coeffs
from .coeffs import (
    CAUCHY_TOL,
    CoefficientFamily,
    SequenceLimit,
    carleman_diagnostic,
    sequence_limit,
    series_verdict,
    total_variation,
)
from .opcore import (
    Definiteness,
    HypothesisViolatedError,
    NotConvergentError,
    SingularError,
    adj,
    as_operator,
    classify_definiteness,
    condition_estimate,
    exchange_matrix,
    invert,
    op_norm,
    pair_diag,
    quad_form,
    require_hermitian,
    sym,
)
from .recurrence import (
    NOT_SQUARE_SUMMABLE,
    SQUARE_SUMMABLE,
    Trajectory,
    basis_trajectories,
    coefficient_stacks,
    l2_tail_diagnostic,
    norm_stack,
    propagate,
    propagate_block,
    solution_space_dimension,
    transfer,
    transfer_stack,
    window_product,
    weighted_norm_trace,
)

# Endpoints of definiteness intervals are bisected to this width.
ENDPOINT_TOL = 1e-8

# Acceptance threshold for extracted periodic limits.
EXTRACTION_TOL = 1e-8


def _we_matrix(fam: CoefficientFamily, m: int) -> np.ndarray:
    """diag(a_m, a_m^*) E = [[0, -a_m], [a_m^*, 0]]."""
    d = fam.dim
    a = fam.a(m)
    out = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    out[:d, d:] = -a
    out[d:, :d] = adj(a)
    return out


def turan_form(fam: CoefficientFamily, N: int, n: int, z: complex) -> np.ndarray:
    """Normalized Hermitian form matrix of Q_n^z on H (+) H."""
    if N < 1:
        raise ValueError("window length N must be >= 1")
    if n < 1:
        raise ValueError("forms start at n = 1")
    x = window_product(fam, z, n, N)
    m = _we_matrix(fam, n + N - 1) @ x
    return sym(m) / fam.norm_a(n + N - 1)


def turan_value(fam: CoefficientFamily, N: int, n: int, z: complex,
                alpha: np.ndarray) -> float:
    """S_n = ||a_{n+N-1}|| Q_n^z((u_{n-1}, u_n)) for the trajectory seeded by
    alpha = (u_0, u_1)."""
    traj = propagate(fam, z, alpha, max(n + 1, 2))
    v = np.concatenate([traj.u[n - 1], traj.u[n]])
    m = _we_matrix(fam, n + N - 1) @ window_product(fam, z, n, N)
    return quad_form(m, v)


@dataclass
class TuranTrace:
    N: int
    z: complex
    alpha: np.ndarray
    n_start: int
    values: np.ndarray  # values[k] is S_{n_start + k}


def _traces_from(fam: CoefficientFamily, N: int, z: complex,
                 trajs: Sequence[Trajectory], horizon: int) -> list[TuranTrace]:
    """S_n, n = 1 .. horizon-1, for already-propagated trajectories.

    The stacked form matrices sym-free products are shared across
    trajectories: window products come from batched matrix multiplication of
    shifted transfer stacks, values from batched quadratic forms.
    """
    count = horizon - 1
    bst = transfer_stack(fam, z, 1, count + N - 1)
    x = bst[:count]
    for k in range(1, N):
        x = bst[k:k + count] @ x
    a_lead = coefficient_stacks(fam, N, count)[0]
    d = fam.dim
    m = np.zeros((count, 2 * d, 2 * d), dtype=np.complex128)
    m[:, :d, d:] = -a_lead
    m[:, d:, :d] = a_lead.conj().transpose(0, 2, 1)
    m = m @ x
    out = []
    for traj in trajs:
        avail = min(count, traj.last_index)
        vals = np.full(count, np.nan)
        if avail >= 1:
            v = np.concatenate([traj.u[0:avail], traj.u[1:avail + 1]], axis=1)
            mv = np.einsum("nij,nj->ni", m[:avail], v)
            vals[:avail] = np.einsum("ni,ni->n", v.conj(), mv).real
        out.append(TuranTrace(N, z, traj.alpha, 1, vals))
    return out


def turan_traces(fam: CoefficientFamily, N: int, z: complex,
                 alphas: Sequence[np.ndarray], horizon: int) -> list[TuranTrace]:
    """S_n for n = 1 .. horizon-1 along each seeded trajectory."""
    if N < 1:
        raise ValueError("window length N must be >= 1")
    trajs = propagate_block(fam, z, alphas, horizon)
    return _traces_from(fam, N, z, trajs, horizon)


# ---- periodic limit data ----


@dataclass
class PeriodicLimitData:
    """Residue-wise limits of the transfer data: T_j = lim a_n^{-1},
    Q_j = lim a_n^{-1} b_n, R_j = lim a_n^{-1} a_{n-1}^*, C_j = lim a_n/||a_n||
    along n = j (mod N), plus the norm-ratio limits r_j.

    D, when present, holds the common diagonal block of limit forms that are
    block-diagonal with equal halves (the weighted-trace reduction).
    """

    N: int
    T: list[np.ndarray]
    Q: list[np.ndarray]
    R: list[np.ndarray]
    C: list[np.ndarray]
    r: list[float]
    D: list[np.ndarray] | None = None
    residuals: dict = field(default_factory=dict)
    converged: bool = True
    horizon: int | None = None

    @property
    def dim(self) -> int:
        return self.C[0].shape[0]


def make_periodic_limits(N: int, T: Sequence, Q: Sequence, R: Sequence,
                         C: Sequence) -> PeriodicLimitData:
    """Build limit data directly from period lists; computes the norm-ratio
    limits r_j = ||C_j^{-1} C_{j-1}^* R_j^{-1}||."""
    T = [as_operator(m) for m in T]
    Q = [as_operator(m) for m in Q]
    R = [as_operator(m) for m in R]
    C = [as_operator(m) for m in C]
    if not (len(T) == len(Q) == len(R) == len(C) == N):
        raise ValueError("all period lists must have length N")
    r = []
    for j in range(N):
        r.append(float(op_norm(invert(C[j]) @ adj(C[j - 1]) @ invert(R[j]))))
    lim = PeriodicLimitData(N, T, Q, R, C, r)
    lim.D = _diagonal_reduction(lim)
    return lim


def _diagonal_reduction(lim: PeriodicLimitData, tol: float = 1e-8) -> list[np.ndarray] | None:
    """Common diagonal block of each window form, when the forms are z-free
    (T = 0) and block-diagonal with equal Hermitian halves."""
    if any(op_norm(t) > tol for t in lim.T):
        return None
    out = []
    for j in range(lim.N):
        f = limit_form(lim, 0.0, start=j)
        d = lim.dim
        tl, tr, bl, br = f[:d, :d], f[:d, d:], f[d:, :d], f[d:, d:]
        scale = max(1.0, op_norm(f))
        if op_norm(tr) > tol * scale or op_norm(bl) > tol * scale:
            return None
        if op_norm(tl - br) > tol * scale:
            return None
        out.append(tl)
    return out


def extract_periodic_limits(fam: CoefficientFamily, N: int,
                            horizon: int = _coeffs.DEFAULT_HORIZON) -> PeriodicLimitData:
    """Estimate the residue-wise limit data from the family itself.

    Each entry is accepted by the Cauchy rule over the last decade of indices
    or, for slow power-law tails, by agreement of staggered Aitken
    extrapolations.  Failures leave the last raw value in place and clear the
    converged flag; extraction is diagnostic, not fatal.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    getters: dict[str, Callable[[int], np.ndarray]] = {
        "T": lambda n: fam.a_inv(n),
        "Q": lambda n: fam.a_inv(n) @ fam.b(n),
        "R": lambda n: fam.a_inv(n) @ adj(fam.a(n - 1)),
        "C": lambda n: fam.a(n) / fam.norm_a(n),
    }
    data: dict[str, list[np.ndarray]] = {k: [] for k in getters}
    residuals: dict[str, list[float]] = {k: [] for k in getters}
    converged = True
    for name, g in getters.items():
        lo = 1 if name == "R" else 0
        for j in range(N):
            first = j if j >= lo else j + N
            idx = list(range(first, horizon, N))
            if not idx:
                raise ValueError("horizon too small for the requested period")
            lim = sequence_limit(g, idx, tol=EXTRACTION_TOL)
            data[name].append(lim.value)
            residuals[name].append(lim.residual)
            converged = converged and lim.converged
    r = []
    invertible = True
    for j in range(N):
        C, R = data["C"][j], data["R"][j]
        if condition_estimate(C) > 1e12 or condition_estimate(R) > 1e12:
            invertible = False
            r.append(float("nan"))
            continue
        r.append(float(op_norm(invert(C) @ adj(data["C"][j - 1]) @ invert(R))))
    out = PeriodicLimitData(N, data["T"], data["Q"], data["R"], data["C"], r,
                            residuals=residuals, converged=converged and invertible,
                            horizon=horizon)
    if invertible:
        out.D = _diagonal_reduction(out)
    return out


def limit_block(lim: PeriodicLimitData, z: complex, i: int) -> np.ndarray:
    """Limit transfer factor [[0, Id], [-R_i, z T_i - Q_i]] (indices mod N)."""
    d = lim.dim
    i = i % lim.N
    out = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    out[:d, d:] = np.eye(d)
    out[d:, :d] = -lim.R[i]
    out[d:, d:] = z * lim.T[i] - lim.Q[i]
    return out


def limit_form_window(lim: PeriodicLimitData, z: complex, start: int = 0) -> np.ndarray:
    """Un-symmetrized limit form with window [start, start + N), built as
    [[0, -C_e], [C_e^*, 0]] times the ordered product of limit factors,
    highest index leftmost, where e = start + N - 1 (mod N)."""
    d = lim.dim
    prod = np.eye(2 * d, dtype=np.complex128)
    for k in range(start, start + lim.N):
        prod = limit_block(lim, z, k) @ prod
    ce = lim.C[(start + lim.N - 1) % lim.N]
    pre = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    pre[:d, d:] = -ce
    pre[d:, :d] = adj(ce)
    return pre @ prod


def limit_form(lim: PeriodicLimitData, lam: float, start: int = 0) -> np.ndarray:
    """Hermitian limit form F(lambda); strict definiteness marks lambda as a
    point of the asymptotic band."""
    return sym(limit_form_window(lim, lam, start))


def principal_minors(m, rtol: float = 1e-10) -> list[float]:
    """Leading principal minors of a Hermitian matrix, as reals."""
    h = require_hermitian(m, rtol)
    return [float(np.linalg.det(h[:k, :k]).real) for k in range(1, h.shape[0] + 1)]


# ---- definiteness scans ----


@dataclass(frozen=True)
class SignInterval:
    lo: float
    hi: float
    sign: Definiteness


@dataclass
class LambdaSet:
    """Disjoint parameter intervals of strict definiteness, endpoints located
    by bisection to ENDPOINT_TOL."""

    intervals: list[SignInterval]
    grid: int
    eps: float
    scan_range: tuple[float, float]

    def contains(self, x: float) -> bool:
        return any(iv.lo <= x <= iv.hi for iv in self.intervals)

    @property
    def empty(self) -> bool:
        return not self.intervals

    def to_dict(self) -> dict:
        return {
            "scan_range": list(self.scan_range),
            "grid": self.grid,
            "eps": self.eps,
            "intervals": [
                {"lo": iv.lo, "hi": iv.hi, "sign": iv.sign.value} for iv in self.intervals
            ],
        }


def definiteness_scan(fn: Callable[[float], np.ndarray], lo: float, hi: float,
                      grid: int = 201, eps: float = 1e-9,
                      endpoint_tol: float = ENDPOINT_TOL) -> LambdaSet:
    """Scan a Hermitian-matrix-valued function for strict definiteness.

    Classifies on a uniform grid, merges runs of equal strict sign, and
    bisects each run boundary between differing classifications down to
    endpoint_tol.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    xs = np.linspace(lo, hi, grid)
    cls = [classify_definiteness(fn(float(x)), eps) for x in xs]
    strict = (Definiteness.STRICTLY_POSITIVE, Definiteness.STRICTLY_NEGATIVE)
    intervals: list[SignInterval] = []
    i = 0
    while i < grid:
        if cls[i] not in strict:
            i += 1
            continue
        sign = cls[i]
        j = i
        while j + 1 < grid and cls[j + 1] == sign:
            j += 1
        left = xs[i] if i == 0 else _bisect_edge(fn, xs[i - 1], xs[i], sign, eps,
                                                 endpoint_tol)
        right = xs[j] if j == grid - 1 else _bisect_edge(fn, xs[j + 1], xs[j], sign, eps,
                                                        endpoint_tol)
        intervals.append(SignInterval(float(left), float(right), sign))
        i = j + 1
    return LambdaSet(intervals, grid, eps, (float(lo), float(hi)))


def _bisect_edge(fn, outside: float, inside: float, sign: Definiteness, eps: float,
                 tol: float) -> float:
    """Locate the sign boundary between a point outside the region and a
    point classified as `sign`."""
    while abs(inside - outside) > tol:
        m = 0.5 * (inside + outside)
        if classify_definiteness(fn(m), eps) == sign:
            inside = m
        else:
            outside = m
    return 0.5 * (inside + outside)


def lambda_scan(lim: PeriodicLimitData, scan_range: tuple[float, float],
                grid: int = 201, eps: float = 1e-9, start: int = 0) -> LambdaSet:
    """Definiteness scan of the limit form over a real parameter range."""
    lo, hi = scan_range
    return definiteness_scan(lambda lam: limit_form(lim, lam, start), lo, hi,
                             grid=grid, eps=eps)


# ---- band and convergence diagnostics ----


@dataclass
class BandAlphaStats:
    alpha: np.ndarray
    c1: float
    c2: float
    overflow: bool


@dataclass
class BandReport:
    N: int
    z: complex
    horizon: int
    burn_in: int
    c1: float
    c2: float
    per_alpha: list[BandAlphaStats]

    @property
    def ratio(self) -> float:
        return self.c2 / self.c1 if self.c1 > 0 else float("inf")


def asymptotic_band(fam: CoefficientFamily, N: int, z: complex,
                    alphas: Sequence[np.ndarray], horizon: int,
                    burn_in: int = 10) -> BandReport:
    """Empirical two-sided bounds on ||a_n|| (||u_{n-1}||^2 + ||u_n||^2),
    normalized by ||alpha||^2, over n in [burn_in, horizon)."""
    stats = []
    c1, c2 = float("inf"), 0.0
    for traj in propagate_block(fam, z, alphas, horizon):
        s = weighted_norm_trace(fam, traj)
        nrm2 = float(np.linalg.norm(traj.alpha) ** 2)
        seg = s[burn_in - 1:] / nrm2
        lo, hi = float(seg.min()), float(seg.max())
        stats.append(BandAlphaStats(traj.alpha, lo, hi, traj.overflow))
        c1, c2 = min(c1, lo), max(c2, hi)
    return BandReport(N, z, horizon, burn_in, c1, c2, stats)


@dataclass
class ConvergenceAlphaStats:
    alpha: np.ndarray
    g: float
    residual: float
    converged: bool


@dataclass
class ConvergenceReport:
    N: int
    z: complex
    horizon: int
    per_alpha: list[ConvergenceAlphaStats]
    rate_bound_ok: bool
    rate_constant: float
    rate_details: list[dict]

    @property
    def g_values(self) -> list[float]:
        return [s.g for s in self.per_alpha]


def _variation_tails(fam: CoefficientFamily, N: int, z: complex, m: int,
                     horizon: int) -> float:
    """Tail driving the Turan increment bound: windowed N-variations of
    a_n^{-1} a_{n-1}^*, a_n^{-1} and a_n^{-1} b_n past m, plus the
    non-real-shift term |z - conj(z)| sum ||a_n^{-1}||."""
    v1 = total_variation(lambda n: fam.a_inv(n) @ adj(fam.a(n - 1)), N, (m, horizon)).partial_sum
    v2 = total_variation(lambda n: fam.a_inv(n), N, (m, horizon)).partial_sum
    v3 = total_variation(lambda n: fam.a_inv(n) @ fam.b(n), N, (m, horizon)).partial_sum
    tail = v1 + abs(z) * v2 + v3
    imag = abs(z - np.conj(z))
    if imag > 0:
        tail += imag * sum(op_norm(fam.a_inv(n)) for n in range(m, horizon))
    return float(tail)


def turan_convergence(fam: CoefficientFamily, N: int, z: complex,
                      alphas: Sequence[np.ndarray], horizon: int) -> ConvergenceReport:
    """Limits g of the Turan sequences S_n with Cauchy residuals, plus a
    consistency check of |g - S_m| against the variation tails past m for a
    single fitted constant.

    Raises NotConvergentError when an S_n sequence oscillates as widely as its
    putative limit.
    """
    traces = turan_traces(fam, N, z, alphas, horizon)
    per = []
    for tr in traces:
        vals = tr.values[~np.isnan(tr.values)]
        cut = max(1, len(vals) // 10)
        tail = vals[-cut:]
        g = float(tail.mean())
        residual = float(np.abs(tail - g).max())
        if abs(g) <= residual:
            raise NotConvergentError(
                f"Turan sequence oscillates by {residual:.3e} around {g:.3e}"
            )
        per.append(ConvergenceAlphaStats(tr.alpha, g, residual,
                                         residual < 1e-6 * abs(g)))
    ms = sorted({max(20, horizon // (2 ** k)) for k in range(2, 7)})
    details = []
    worst = 0.0
    for m in ms:
        tail = _variation_tails(fam, N, z, m, horizon)
        dev = max(abs(per[i].g - traces[i].values[m - 1]) for i in range(len(per)))
        details.append({"m": m, "deviation": dev, "tail": tail})
        if tail > 0:
            worst = max(worst, dev / tail)
    rate_ok = True
    for dct in details:
        bound = worst * dct["tail"] * (1 + 1e-6) + 1e-12
        ok = dct["deviation"] <= bound or dct["tail"] == 0 and dct["deviation"] <= 1e-10
        dct["ok"] = bool(ok)
        rate_ok = rate_ok and ok
    return ConvergenceReport(N, z, horizon, per, rate_ok, worst, details)


# ---- indeterminacy probe ----

COMPLETE_INDETERMINATE = "complete_indeterminate"
SELF_ADJOINT_REGIME = "self_adjoint_regime"
PROBE_UNDECIDED = "undecided"


@dataclass
class IndeterminacyReport:
    verdict: str
    carleman: object
    lambda_set: LambdaSet | None
    per_z: list[dict]
    horizon: int

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "carleman": {
                "partial_sum": self.carleman.partial_sum,
                "verdict": self.carleman.verdict,
            },
            "lambda_set": self.lambda_set.to_dict() if self.lambda_set else None,
            "per_z": [
                {**d, "z": [d["z"].real, d["z"].imag]} for d in
                [dict(entry) for entry in self.per_z]
            ],
        }


def indeterminacy_probe(fam: CoefficientFamily, z_samples: Sequence[complex],
                        horizon: int = _coeffs.DEFAULT_HORIZON, N: int = 1,
                        scan_range: tuple[float, float] = (-10.0, 10.0),
                        scan_grid: int = 101) -> IndeterminacyReport:
    """Detect complete indeterminacy: a convergent Carleman sum, a nonempty
    definiteness region of the limit form, and at every sampled z all 2d basis
    trajectories square-summable with a d-dimensional space of solutions
    seeded through the n = 0 boundary relation.

    A divergent Carleman sum yields the self-adjoint-regime verdict instead;
    anything short of either standard stays undecided.
    """
    car = carleman_diagnostic(fam, horizon)
    if car.verdict == _coeffs.DIVERGES:
        return IndeterminacyReport(SELF_ADJOINT_REGIME, car, None, [], horizon)
    lim = extract_periodic_limits(fam, N, horizon)
    lset = lambda_scan(lim, scan_range, grid=scan_grid)
    traj_horizon = min(horizon, 2000)
    per_z = []
    all_ok = True
    for z in z_samples:
        diags = [l2_tail_diagnostic(t) for t in basis_trajectories(fam, z, traj_horizon)]
        dim = solution_space_dimension(fam, z, traj_horizon)
        ok = all(dg.verdict == SQUARE_SUMMABLE for dg in diags) and dim == fam.dim
        all_ok = all_ok and ok
        per_z.append({
            "z": complex(z),
            "basis_verdicts": [dg.verdict for dg in diags],
            "solution_dim": dim,
            "ok": ok,
        })
    if car.verdict == _coeffs.CONVERGES and not lset.empty and all_ok:
        verdict = COMPLETE_INDETERMINATE
    else:
        verdict = PROBE_UNDECIDED
    return IndeterminacyReport(verdict, car, lset, per_z, horizon)


# ---- exact asymptotics along odd windows ----


@dataclass
class ExactAsymptoticsReport:
    C: np.ndarray
    per_alpha: list[dict]
    horizon: int


def exact_asymptotics(fam: CoefficientFamily, lim: PeriodicLimitData, z: float,
                      alphas: Sequence[np.ndarray], horizon: int,
                      tol: float = 1e-8) -> ExactAsymptoticsReport:
    """In the odd-window regime with T = 0, Q = 0, R = Id and constant C, the
    limit form collapses to diag(sym C, sym C); C is then forced Hermitian and
    the weighted trace ||a_n|| (<C u_{n-1}, u_{n-1}> + <C u_n, u_n>) shares
    the Turan limit g.  Verifies the hypotheses on the supplied limit data,
    then compares both limits per trajectory.
    """
    N = lim.N
    if N % 2 == 0:
        raise HypothesisViolatedError("window length N must be odd")
    d = lim.dim
    for name, seq, target in (("T", lim.T, np.zeros((d, d))),
                              ("Q", lim.Q, np.zeros((d, d))),
                              ("R", lim.R, np.eye(d))):
        for j, m in enumerate(seq):
            if op_norm(m - target) > tol:
                raise HypothesisViolatedError(
                    f"{name}[{j}] deviates from the required limit by "
                    f"{op_norm(m - target):.3e}"
                )
    C = lim.C[0]
    for j, m in enumerate(lim.C):
        if op_norm(m - C) > tol:
            raise HypothesisViolatedError(f"C[{j}] is not constant across the period")
    if op_norm(C - adj(C)) > tol:
        raise HypothesisViolatedError("C is not self-adjoint")
    C = sym(C)
    trajs = propagate_block(fam, z, alphas, horizon)
    traces = _traces_from(fam, N, z, trajs, horizon)
    per = []
    for tr, traj in zip(traces, trajs):
        q = np.einsum("nd,de,ne->n", traj.u.conj(), C, traj.u).real
        w = norm_stack(fam, 1, traj.last_index - 1)
        wtrace = w * (q[:-2] + q[1:-1])
        cut = max(1, len(wtrace) // 10)
        vals = tr.values[~np.isnan(tr.values)]
        g = float(vals[-max(1, len(vals) // 10):].mean())
        west = float(wtrace[-cut:].mean())
        per.append({
            "alpha": tr.alpha,
            "g": g,
            "weighted_trace_limit": west,
            "gap": abs(west - g),
            "last_decade_spread": float(np.abs(wtrace[-cut:] - west).max()),
        })
    return ExactAsymptoticsReport(C, per, horizon)


@dataclass
class ChristoffelReport:
    ratios: np.ndarray
    limit_estimate: float
    residual: float


def christoffel_limit(fam: CoefficientFamily, C: np.ndarray,
                      traj: Trajectory) -> ChristoffelReport:
    """Cesaro ratio [sum_k 1/||a_k||]^{-1} sum_k <C u_k, u_k> along the
    trajectory; under the exact-asymptotics hypotheses with a divergent
    Carleman sum it tends to g/2.
    """
    C = require_hermitian(C)
    L = traj.last_index
    inv_norms = 1.0 / norm_stack(fam, 0, L + 1)
    ev = series_verdict(inv_norms)
    if ev.verdict == _coeffs.CONVERGES:
        raise HypothesisViolatedError("Carleman sum converges; the Cesaro ratio needs divergence")
    q = np.einsum("nd,de,ne->n", traj.u.conj(), C, traj.u).real
    ratios = np.cumsum(q) / np.cumsum(inv_norms)
    cut = max(1, len(ratios) // 10)
    est = float(ratios[-1])
    residual = float(np.abs(ratios[-cut:] - est).max())
    return ChristoffelReport(ratios, est, residual)
