"""Commutator-type quadratic functionals with weight sequences alpha_n.

The weighted functional

    S_n = <sym{[[alpha_n a_n^*, -(lambda - b_n) a_{n-1}^{-1} alpha_{n-1} a_n],
                [0, a_n^* a_{n-1}^{-1} alpha_{n-1} a_n]]} (u_n, u_{n+1}),
          (u_n, u_{n+1})>

controls trajectory growth once four summability conditions on the weights
hold; normalizing by ||alpha_n a_n^*|| and letting n grow produces the limit
form whose strict definiteness yields two-sided norm bounds.  Two concrete
weight choices are packaged: alpha_n = a_n for rapidly growing families, and
iterated-log weights alpha_n = n log(n) ... (a_n^*)^{-1} for families growing
just fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import coeffs as _coeffs
from .coeffs import (
    CoefficientFamily,
    SumEvidence,
    bounded_verdict,
    g_product,
    iter_log,
    sequence_limit,
    series_verdict,
    vanishing_verdict,
)
from .opcore import (
    Definiteness,
    DomainError,
    NotConvergentError,
    abs_val,
    adj,
    as_operator,
    block2x2,
    classify_definiteness,
    condition_estimate,
    hermitian_extremes,
    neg_part,
    op_norm,
    quad_form,
    sym,
)
from .recurrence import Trajectory, propagate


# ---- weight strategies ----


class AlphaStrategy:
    """Invertible weight sequence alpha_n attached to a family."""

    name = "abstract"

    def alpha(self, fam: CoefficientFamily, n: int) -> np.ndarray:
        raise NotImplementedError


class IdentityWeights(AlphaStrategy):
    name = "identity"

    def alpha(self, fam: CoefficientFamily, n: int) -> np.ndarray:
        return np.eye(fam.dim, dtype=np.complex128)


class ANWeights(AlphaStrategy):
    """alpha_n = a_n; the natural choice when ||a_n^{-1}|| -> 0."""

    name = "an"

    def alpha(self, fam: CoefficientFamily, n: int) -> np.ndarray:
        return fam.a(n)


class LogWeights(AlphaStrategy):
    """alpha_n = n log(n) loglog(n) ... (depth factors) (a_n^*)^{-1} from
    n_start on, identity before; n_start must support the nested logs."""

    def __init__(self, depth: int, n_start: int = 20):
        if iter_log(depth, float(n_start)) <= 0.0:
            raise DomainError(f"n_start {n_start} too small for {depth} nested logs")
        self.depth = depth
        self.n_start = n_start
        self.name = f"log(depth={depth},start={n_start})"

    def alpha(self, fam: CoefficientFamily, n: int) -> np.ndarray:
        if n < self.n_start:
            return np.eye(fam.dim, dtype=np.complex128)
        return n * g_product(self.depth, float(n)) * adj(fam.a_inv(n))


class CustomWeights(AlphaStrategy):
    def __init__(self, fn, name: str = "custom"):
        self._fn = fn
        self.name = name

    def alpha(self, fam: CoefficientFamily, n: int) -> np.ndarray:
        return as_operator(self._fn(n))


# ---- forms and values ----


def _cross_term(fam: CoefficientFamily, strategy: AlphaStrategy, n: int) -> np.ndarray:
    """a_{n-1}^{-1} alpha_{n-1} a_n, the conjugated lower weight."""
    return fam.a_inv(n - 1) @ strategy.alpha(fam, n - 1) @ fam.a(n)


def commutator_form(fam: CoefficientFamily, strategy: AlphaStrategy, n: int,
                    lam: float) -> np.ndarray:
    """Un-normalized Hermitian form matrix evaluated at (u_n, u_{n+1}); n >= 1."""
    if n < 1:
        raise ValueError("forms start at n = 1")
    d = fam.dim
    g = _cross_term(fam, strategy, n)
    m11 = strategy.alpha(fam, n) @ adj(fam.a(n))
    m12 = -(lam * np.eye(d) - fam.b(n)) @ g
    m22 = adj(fam.a(n)) @ g
    return sym(block2x2(m11, m12, np.zeros((d, d)), m22))


def boundary_form(fam: CoefficientFamily, strategy: AlphaStrategy, n: int,
                  lam: float) -> np.ndarray:
    """Equivalent representation evaluated at (u_{n-1}, u_n); n >= 1."""
    if n < 1:
        raise ValueError("forms start at n = 1")
    d = fam.dim
    al_prev = strategy.alpha(fam, n - 1)
    m11 = al_prev @ adj(fam.a(n - 1))
    m12 = -al_prev @ (lam * np.eye(d) - fam.b(n))
    m22 = strategy.alpha(fam, n) @ adj(fam.a(n))
    return sym(block2x2(m11, m12, np.zeros((d, d)), m22))


def commutator_value(fam: CoefficientFamily, strategy: AlphaStrategy, n: int,
                     lam: float, alpha: np.ndarray | None = None,
                     traj: Trajectory | None = None,
                     representation: str = "interior") -> float:
    """S_n along a trajectory, through either equivalent representation:
    "interior" pairs the form with (u_n, u_{n+1}), "boundary" with
    (u_{n-1}, u_n).  Both agree on generalised eigenvectors."""
    if traj is None:
        if alpha is None:
            raise ValueError("need either a trajectory or initial data")
        traj = propagate(fam, lam, alpha, n + 2)
    if representation == "interior":
        m = commutator_form(fam, strategy, n, lam)
        v = np.concatenate([traj.u[n], traj.u[n + 1]])
    elif representation == "boundary":
        m = boundary_form(fam, strategy, n, lam)
        v = np.concatenate([traj.u[n - 1], traj.u[n]])
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return quad_form(m, v)


def weight_scale(fam: CoefficientFamily, strategy: AlphaStrategy, n: int) -> float:
    """Normalization ||alpha_n a_n^*||."""
    return op_norm(strategy.alpha(fam, n) @ adj(fam.a(n)))


# ---- the limit form C(lambda) ----


@dataclass
class CLimitReport:
    C_lambda: np.ndarray
    residual: float
    converged: bool
    definiteness: Definiteness
    horizon: int


def c_limit(fam: CoefficientFamily, strategy: AlphaStrategy, lam: float,
            horizon: int = _coeffs.DEFAULT_HORIZON) -> CLimitReport:
    """Numerical limit of the normalized form matrices.

    The last-decade Cauchy residual under 1e-8 marks clean convergence; a
    residual that refuses to contract (no better than half the mid-trace
    residual, and larger than 1e-3) raises NotConvergentError.
    """
    def form(n: int) -> np.ndarray:
        return commutator_form(fam, strategy, n, lam) / weight_scale(fam, strategy, n)

    def window_residual(lo: int, hi: int, step: int) -> tuple[np.ndarray, float]:
        pts = list(range(lo, hi, step))
        vals = [form(n) for n in pts]
        mean = sum(vals) / len(vals)
        return mean, max(float(op_norm(v - mean)) for v in vals)

    step = max(1, horizon // 400)
    mid, mid_res = window_residual(max(1, int(0.45 * horizon)), int(0.55 * horizon), step)
    last, last_res = window_residual(max(1, int(0.9 * horizon)), horizon, step)
    scale = max(1.0, op_norm(last))
    if last_res > 1e-3 * scale and last_res > 0.5 * mid_res:
        raise NotConvergentError(
            f"normalized forms do not settle: residual {last_res:.3e} "
            f"after {mid_res:.3e} mid-trace"
        )
    converged = last_res < 1e-8 * scale
    return CLimitReport(last, last_res, converged, classify_definiteness(sym(last)),
                        horizon)


# ---- the four weight conditions ----


@dataclass
class ConditionReport:
    """Per-condition term traces, partial sums and verdicts for a weight
    sequence: (a) summable negative parts, (b) summable weight drift,
    (c) summable commutator defect, (d) divergent inverse weight norms."""

    strategy: str
    horizon: int
    neg_part_sum: SumEvidence
    drift_sum: SumEvidence
    commutator_sum: SumEvidence
    inverse_weight_sum: SumEvidence
    traces: dict

    @property
    def all_hold(self) -> bool:
        return (
            self.neg_part_sum.verdict == _coeffs.CONVERGES
            and self.drift_sum.verdict == _coeffs.CONVERGES
            and self.commutator_sum.verdict == _coeffs.CONVERGES
            and self.inverse_weight_sum.verdict == _coeffs.DIVERGES
        )


def weight_conditions(fam: CoefficientFamily, strategy: AlphaStrategy,
                      horizon: int = _coeffs.DEFAULT_HORIZON) -> ConditionReport:
    """Evaluate the four summability conditions for the given weights.

    Terms start at n = 1 (the n = 0 commutator term would reach back to the
    undefined a_{-1}; summability is a tail property, so the start index does
    not affect any verdict).
    """
    scales = np.array([weight_scale(fam, strategy, n) for n in range(horizon + 1)])
    t_neg = np.empty(horizon - 1)
    t_drift = np.empty(horizon - 1)
    t_comm = np.empty(horizon - 1)
    for n in range(1, horizon):
        g = _cross_term(fam, strategy, n)
        m = strategy.alpha(fam, n + 1) @ adj(fam.a(n + 1)) - adj(fam.a(n)) @ g
        t_neg[n - 1] = op_norm(neg_part(sym(m))) / scales[n]
        t_drift[n - 1] = op_norm(g - strategy.alpha(fam, n)) / scales[n]
        t_comm[n - 1] = op_norm(strategy.alpha(fam, n) @ fam.b(n + 1)
                                - fam.b(n) @ g) / scales[n]
    t_inv = 1.0 / scales[:horizon]
    return ConditionReport(
        strategy=strategy.name,
        horizon=horizon,
        neg_part_sum=series_verdict(t_neg, first_index=1),
        drift_sum=series_verdict(t_drift, first_index=1),
        commutator_sum=series_verdict(t_comm, first_index=1),
        inverse_weight_sum=series_verdict(t_inv, first_index=0),
        traces={"neg_part": t_neg, "drift": t_drift, "commutator": t_comm,
                "inverse_weight": t_inv},
    )


# ---- packaged criteria ----


@dataclass
class CheckItem:
    name: str
    ok: bool
    evidence: dict


@dataclass
class CriterionReport:
    name: str
    horizon: int
    items: list[CheckItem]

    @property
    def passed(self) -> bool:
        return all(item.ok for item in self.items)

    def item(self, name: str) -> CheckItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)


def check_growth_criterion(fam: CoefficientFamily,
                           horizon: int = _coeffs.DEFAULT_HORIZON) -> CriterionReport:
    """Criterion for alpha_n = a_n: vanishing ||a_n^{-1}|| and ||a_n^{-1} b_n||,
    summable negative parts of a_{n+1} a_{n+1}^* - a_n^* a_n (normalized by
    ||a_n||^2), summable normalized commutators a_n b_{n+1} - b_n a_n,
    divergent sum of 1/||a_n||^2, and convergence of a_n/||a_n|| to an
    invertible direction."""
    inv_norms = np.array([op_norm(fam.a_inv(n)) for n in range(horizon)])
    invb_norms = np.array([op_norm(fam.a_inv(n) @ fam.b(n)) for n in range(horizon)])
    ok_inv, ev_inv = vanishing_verdict(inv_norms)
    ok_invb, ev_invb = vanishing_verdict(invb_norms)

    sq = np.array([fam.norm_a(n) ** 2 for n in range(horizon)])
    t_neg = np.empty(horizon - 1)
    t_comm = np.empty(horizon - 1)
    for n in range(1, horizon):
        diff = fam.a(n + 1) @ adj(fam.a(n + 1)) - adj(fam.a(n)) @ fam.a(n)
        t_neg[n - 1] = op_norm(neg_part(sym(diff))) / sq[n]
        t_comm[n - 1] = op_norm(fam.a(n) @ fam.b(n + 1) - fam.b(n) @ fam.a(n)) / sq[n]
    ev_neg = series_verdict(t_neg, first_index=1)
    ev_comm = series_verdict(t_comm, first_index=1)
    ev_sq = series_verdict(1.0 / sq, first_index=0)

    lim = sequence_limit(lambda n: fam.a(n) / fam.norm_a(n), list(range(horizon)))
    cond = condition_estimate(lim.value) if lim.converged else float("inf")
    ok_dir = lim.converged and np.isfinite(cond) and cond <= 1e12

    items = [
        CheckItem("inverse_vanishes", ok_inv, ev_inv),
        CheckItem("inverse_b_vanishes", ok_invb, ev_invb),
        CheckItem("neg_part_summable", ev_neg.verdict == _coeffs.CONVERGES, ev_neg.to_dict()),
        CheckItem("commutator_summable", ev_comm.verdict == _coeffs.CONVERGES, ev_comm.to_dict()),
        CheckItem("norm_square_sum_diverges", ev_sq.verdict == _coeffs.DIVERGES, ev_sq.to_dict()),
        CheckItem("direction_converges", ok_dir,
                  {"residual": lim.residual, "condition": cond, "method": lim.method}),
    ]
    return CriterionReport("growth_criterion", horizon, items)


def check_log_weight_criterion(fam: CoefficientFamily, depth: int,
                               n_start: int = 20,
                               horizon: int = _coeffs.DEFAULT_HORIZON) -> CriterionReport:
    """Criterion for iterated-log weights: vanishing ||a_n^{-1}||, the
    two-sided envelope

        (1 - c_n) Id <= |(a_{n-1}^*)^{-1} a_n| <= (1 + 1/n + sum_j 1/(n g_j(n)) + c_n) Id

    with summable slack c_n, bounded b_n with summable inverse-twisted
    commutators, and summable ||a_n^{-1}||/n."""
    if iter_log(depth, float(n_start)) <= 0.0:
        raise DomainError(f"n_start {n_start} too small for {depth} nested logs")
    inv_norms = np.array([op_norm(fam.a_inv(n)) for n in range(horizon)])
    ok_inv, ev_inv = vanishing_verdict(inv_norms)

    ns = np.arange(n_start + 1, horizon)
    slack = np.empty(len(ns))
    for i, n in enumerate(ns):
        w = abs_val(adj(fam.a_inv(n - 1)) @ fam.a(n))
        lo, hi = hermitian_extremes(w)
        env = 1.0 + 1.0 / n + sum(1.0 / (n * g_product(j, float(n)))
                                  for j in range(1, depth + 1))
        slack[i] = max(0.0, 1.0 - lo, hi - env)
    ev_slack = series_verdict(slack, first_index=int(ns[0]))

    b_norms = np.array([op_norm(fam.b(n)) for n in range(horizon)])
    ok_b, ev_b = bounded_verdict(b_norms)
    t_tw = np.array([op_norm(fam.a_inv(n) @ fam.b(n) - fam.b(n + 1) @ fam.a_inv(n))
                     for n in range(horizon)])
    ev_tw = series_verdict(t_tw, first_index=0)

    ev_wsum = series_verdict(inv_norms[1:] / np.arange(1, horizon), first_index=1)

    items = [
        CheckItem("inverse_vanishes", ok_inv, ev_inv),
        CheckItem("envelope_slack_summable", ev_slack.verdict == _coeffs.CONVERGES,
                  ev_slack.to_dict()),
        CheckItem("b_bounded", ok_b, ev_b),
        CheckItem("twisted_commutator_summable", ev_tw.verdict == _coeffs.CONVERGES,
                  ev_tw.to_dict()),
        CheckItem("weighted_inverse_summable", ev_wsum.verdict == _coeffs.CONVERGES,
                  ev_wsum.to_dict()),
    ]
    return CriterionReport("log_weight_criterion", horizon, items)
