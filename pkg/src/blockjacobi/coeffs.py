"""Coefficient families a_n (invertible), b_n (self-adjoint) and the scalar
weight sequences used to build them, together with sequence diagnostics:
total N-variation, Carleman sums, and the heuristic series verdicts shared by
every summability check in the package.

Families evaluate lazily and memoize; instances are treated as immutable.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .opcore import (
    DomainError,
    SingularError,
    as_operator,
    condition_estimate,
    herm_defect,
    invert,
    op_norm,
)

# Default index horizon for whole-family diagnostics.
DEFAULT_HORIZON = 10_000

# Cauchy acceptance threshold for numerical limits of sequences.
CAUCHY_TOL = 1e-8

# A variation window "has converged" when its last tenth contributes less
# than this fraction of the whole partial sum.
VARIATION_CONVERGED_FRACTION = 1e-8

# Series whose largest term sits at or below this level are treated as
# numerically zero.  Every call site feeds normalized (relative) terms, so
# values this small are rounding residue of cancellations, not data.
SERIES_NOISE_FLOOR = 1e-12


# ---- iterated logarithms ----


def iter_log(depth: int, x: float) -> float:
    """log applied depth times; depth 0 is the identity.

    Raises DomainError when an intermediate value is not positive, since the
    next log would be undefined.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    v = float(x)
    for _ in range(depth):
        if v <= 0.0:
            raise DomainError(f"iterated log hit non-positive value {v!r}")
        v = math.log(v)
    return v


def g_product(depth: int, x: float) -> float:
    """Product log(x) * loglog(x) * ... down to depth nested logs; g_0 = 1."""
    out = 1.0
    v = float(x)
    for _ in range(depth):
        if v <= 0.0:
            raise DomainError(f"iterated log hit non-positive value {v!r}")
        v = math.log(v)
        out *= v
    return out


# ---- scalar weights ----


class ScalarWeight:
    """Positive scalar sequence n -> w(n), n >= 0."""

    kind = "abstract"

    def __call__(self, n: int) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantWeight(ScalarWeight):
    value: float = 1.0
    kind = "constant"

    def __call__(self, n: int) -> float:
        return self.value


@dataclass(frozen=True)
class PowerWeight(ScalarWeight):
    """(n + offset)^exponent."""

    exponent: float
    offset: int = 1
    kind = "power"

    def __post_init__(self):
        if self.offset < 1:
            raise ValueError("offset must be >= 1")

    def __call__(self, n: int) -> float:
        return float(n + self.offset) ** self.exponent


@dataclass(frozen=True)
class TabulatedWeight(ScalarWeight):
    values: tuple[float, ...]
    kind = "tabulated"

    def __call__(self, n: int) -> float:
        return self.values[n]


@dataclass(frozen=True)
class LogProductWeight(ScalarWeight):
    """(n + offset) * log(n+offset) * loglog(n+offset) * ... (depth factors).

    Requires all depth nested logs of the offset to be positive, so the weight
    is positive from n = 0 on.
    """

    depth: int
    offset: int
    kind = "log_product"

    def __post_init__(self):
        if iter_log(self.depth, float(self.offset)) <= 0.0:
            raise DomainError(
                f"offset {self.offset} too small for {self.depth} nested logs"
            )

    def __call__(self, n: int) -> float:
        return (n + self.offset) * g_product(self.depth, float(n + self.offset))


@dataclass(frozen=True)
class RecipIterLogWeight(ScalarWeight):
    """1 / log^(depth)(n + offset)."""

    depth: int
    offset: int
    kind = "recip_iter_log"

    def __post_init__(self):
        if iter_log(self.depth, float(self.offset)) <= 0.0:
            raise DomainError(
                f"offset {self.offset} too small for {self.depth} nested logs"
            )

    def __call__(self, n: int) -> float:
        return 1.0 / iter_log(self.depth, float(n + self.offset))


def block_index(n: int) -> int:
    """Block number k >= 1 of position n >= 0 when block k is repeated k times.

    Blocks tile the index line as [0], [1,2], [3,4,5], ...; block k starts at
    k(k-1)/2.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return (1 + math.isqrt(8 * n + 1)) // 2


@dataclass(frozen=True)
class BlockSqrtLogWeight(ScalarWeight):
    """k * sqrt(log(k+1)) held constant across block k (repeated k times)."""

    kind = "block_sqrt_log"

    def __call__(self, n: int) -> float:
        k = block_index(n)
        return k * math.sqrt(math.log(k + 1.0))


@dataclass(frozen=True)
class BlockRecipLogWeight(ScalarWeight):
    """1 / (k * log(k+1)) held constant across block k, aligned with the same
    block tiling as BlockSqrtLogWeight."""

    kind = "block_recip_log"

    def __call__(self, n: int) -> float:
        k = block_index(n)
        return 1.0 / (k * math.log(k + 1.0))


WEIGHT_KINDS: dict[str, type] = {
    "constant": ConstantWeight,
    "power": PowerWeight,
    "tabulated": TabulatedWeight,
    "log_product": LogProductWeight,
    "recip_iter_log": RecipIterLogWeight,
    "block_sqrt_log": BlockSqrtLogWeight,
    "block_recip_log": BlockRecipLogWeight,
}


# ---- coefficient families ----


class _MemoSeq:
    """Grow-only memoized integer-indexed sequence, safe under concurrent reads."""

    def __init__(self, fn: Callable[[int], object]):
        self._fn = fn
        self._vals: list = []
        self._lock = threading.Lock()

    def __call__(self, n: int):
        if n < 0:
            raise ValueError("index must be >= 0")
        vals = self._vals
        if n < len(vals):
            return vals[n]
        with self._lock:
            while len(self._vals) <= n:
                self._vals.append(self._fn(len(self._vals)))
            return self._vals[n]


class CoefficientFamily:
    """Pair of operator sequences: a(n) invertible, b(n) self-adjoint.

    Evaluation is lazy and memoized; entries are owned by the family and must
    not be mutated by callers.  Validation of invertibility and Hermiticity is
    a separate pass (validate_family), so that defective families can still be
    probed and reported on.
    """

    def __init__(self, dim: int, a_fn: Callable[[int], np.ndarray],
                 b_fn: Callable[[int], np.ndarray], description: str = ""):
        self.dim = int(dim)
        self.description = description
        self._a = _MemoSeq(lambda n: as_operator(a_fn(n)))
        self._b = _MemoSeq(lambda n: as_operator(b_fn(n)))
        self._a_inv = _MemoSeq(lambda n: invert(self._a(n)))
        self._norm_a = _MemoSeq(lambda n: op_norm(self._a(n)))

    def a(self, n: int) -> np.ndarray:
        return self._a(n)

    def b(self, n: int) -> np.ndarray:
        return self._b(n)

    def a_inv(self, n: int) -> np.ndarray:
        return self._a_inv(n)

    def norm_a(self, n: int) -> float:
        return self._norm_a(n)

    def __repr__(self):
        return f"<CoefficientFamily dim={self.dim} {self.description!r}>"


class ScaledPeriodicFamily(CoefficientFamily):
    """a_n = x_n * X_(n mod N), b_n = y_n * Y_(n mod N) with scalar weights
    x, y > 0 and a fixed period of operators.

    Inverses and norms factor through the scalars, which keeps large-horizon
    scans cheap: a_n^-1 = X_j^-1 / x_n and ||a_n|| = x_n ||X_j||.
    """

    def __init__(self, period: int, x: ScalarWeight, y: ScalarWeight,
                 X: Sequence, Y: Sequence, description: str = ""):
        X = [as_operator(m) for m in X]
        Y = [as_operator(m) for m in Y]
        if len(X) != period or len(Y) != period:
            raise ValueError("need exactly `period` operators for X and Y")
        dim = X[0].shape[0]
        self.period = period
        self.x = x
        self.y = y
        self.X = X
        self.Y = Y
        self._X_inv = [invert(m) for m in X]
        self._X_norm = [op_norm(m) for m in X]
        super().__init__(
            dim,
            lambda n: x(n) * X[n % period],
            lambda n: y(n) * Y[n % period],
            description,
        )
        # cheap exact overrides; no memo tables needed
        self._a_inv = lambda n: self._X_inv[n % period] / x(n)  # type: ignore
        self._norm_a = lambda n: self._X_norm[n % period] * x(n)  # type: ignore

    def scalar_arrays(self, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        xs = np.fromiter((self.x(n) for n in range(start, start + count)),
                         dtype=float, count=count)
        ys = np.fromiter((self.y(n) for n in range(start, start + count)),
                         dtype=float, count=count)
        return xs, ys


def constant_family(a, b, description: str = "constant") -> CoefficientFamily:
    a = as_operator(a)
    b = as_operator(b)
    try:
        # period-1 scaled family with unit weights; gives the exact
        # inverse/norm shortcuts and the vectorised stack path for free
        one = ConstantWeight(1.0)
        return ScaledPeriodicFamily(1, one, one, [a], [b], description)
    except SingularError:
        # keep non-invertible data constructible so validate_family can
        # report on it
        return CoefficientFamily(a.shape[0], lambda n: a, lambda n: b, description)


def scaled_periodic_family(period: int, x: ScalarWeight, y: ScalarWeight,
                           X: Sequence, Y: Sequence,
                           description: str = "scaled periodic") -> ScaledPeriodicFamily:
    return ScaledPeriodicFamily(period, x, y, X, Y, description)


def tabulated_family(a_list: Sequence, b_list: Sequence,
                     description: str = "tabulated") -> CoefficientFamily:
    a_list = [as_operator(m) for m in a_list]
    b_list = [as_operator(m) for m in b_list]
    if len(a_list) != len(b_list):
        raise ValueError("a and b tables must have equal length")
    dim = a_list[0].shape[0]
    return CoefficientFamily(dim, lambda n: a_list[n], lambda n: b_list[n], description)


def custom_family(dim: int, a_fn: Callable[[int], np.ndarray],
                  b_fn: Callable[[int], np.ndarray],
                  description: str = "custom") -> CoefficientFamily:
    return CoefficientFamily(dim, a_fn, b_fn, description)


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str  # "singular_a" | "non_hermitian_b" | "non_finite"
    detail: str = ""


def validate_family(fam: CoefficientFamily, indices: Sequence[int],
                    herm_rtol: float = 1e-10) -> list[Violation]:
    """Check invertibility of a_n and self-adjointness of b_n on the indices."""
    out: list[Violation] = []
    for n in indices:
        try:
            a = fam.a(n)
        except ValueError as exc:
            out.append(Violation(n, "non_finite", str(exc)))
            continue
        cond = condition_estimate(a)
        if not np.isfinite(cond) or cond > 1e12:
            out.append(Violation(n, "singular_a", f"condition estimate {cond:.3e}"))
        try:
            b = fam.b(n)
        except ValueError as exc:
            out.append(Violation(n, "non_finite", str(exc)))
            continue
        defect = herm_defect(b)
        scale = max(1.0, op_norm(b))
        if defect > herm_rtol * scale:
            out.append(Violation(n, "non_hermitian_b", f"defect {defect:.3e}"))
    return out


# ---- total N-variation ----


@dataclass
class VariationReport:
    N: int
    window: tuple[int, int]
    partial_sum: float
    tail_estimate: float
    converged: bool


def total_variation(seq: Callable[[int], np.ndarray], N: int,
                    window: tuple[int, int]) -> VariationReport:
    """Windowed total N-variation sum ||seq(n+N) - seq(n)|| for n in [start, end).

    seq must be evaluable on [start, end + N).  The report flags convergence
    when the last tenth of the window contributes a negligible fraction, and
    carries a geometric tail extrapolation of the increments.
    """
    start, end = window
    if N < 1:
        raise ValueError("N must be >= 1")
    if end <= start:
        raise ValueError("empty window")
    incs = np.empty(end - start)
    for i, n in enumerate(range(start, end)):
        incs[i] = op_norm(np.asarray(seq(n + N)) - np.asarray(seq(n)))
    total = float(incs.sum())
    cut = max(1, len(incs) // 10)
    last = float(incs[-cut:].sum())
    converged = (total == 0.0) or (last < VARIATION_CONVERGED_FRACTION * total)
    tail = _geometric_tail(incs)
    return VariationReport(N, (start, end), total, tail, converged)


def _geometric_tail(incs: np.ndarray) -> float:
    """Extrapolated remainder after the window, from the last two tenths."""
    cut = max(1, len(incs) // 10)
    if len(incs) < 2 * cut:
        return float("inf") if incs[-cut:].sum() > 0 else 0.0
    a = float(incs[-2 * cut:-cut].sum())
    b = float(incs[-cut:].sum())
    if b == 0.0:
        return 0.0
    if a <= b:
        return float("inf")
    q = b / a
    return b * q / (1.0 - q)


# ---- series verdicts ----

DIVERGES = "diverges"
CONVERGES = "converges"
UNDECIDED = "undecided"


@dataclass
class SumEvidence:
    """Evidence bundle behind a heuristic series verdict."""

    verdict: str
    partial_sum: float
    count: int
    slope: float | None = None          # log-log slope of terms, last decade
    log_exponent: float | None = None   # fitted p in terms ~ 1/(n log^p n)
    log_exponent_shifted: float | None = None  # same fit with a shift in the log
    window_ratio: float | None = None   # sum(last tenth) / sum(previous tenth)
    tail_estimate: float | None = None  # geometric extrapolation of remainder

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "partial_sum": self.partial_sum,
            "count": self.count,
            "slope": self.slope,
            "log_exponent": self.log_exponent,
            "log_exponent_shifted": self.log_exponent_shifted,
            "window_ratio": self.window_ratio,
            "tail_estimate": self.tail_estimate,
        }


def _fit_slope(xs: np.ndarray, ys: np.ndarray) -> float | None:
    if len(xs) < 5:
        return None
    x = xs - xs.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return None
    return float(np.dot(x, ys - ys.mean()) / denom)


def series_verdict(terms: np.ndarray, first_index: int = 0) -> SumEvidence:
    """Heuristic classification of sum(terms) as a truncated infinite series.

    Term k of the array is understood as index n = first_index + k.  The
    ladder: series at the noise floor converge; geometric tails converge; a last-decade
    log-log slope >= -0.95 diverges (terms decaying no faster than c/n) and
    <= -1.3 converges; slopes in between are refined by fitting the exponent p
    in t_n ~ 1/(n log^p n), since that family straddles the boundary.  The
    refinement cannot settle deeper iterated-log boundaries; those remain
    whatever the p-fit reports, and callers get the evidence either way.
    """
    t = np.asarray(terms, dtype=float)
    if np.any(t < 0):
        raise ValueError("series terms must be non-negative")
    total = float(t.sum())
    count = len(t)
    ev = SumEvidence(UNDECIDED, total, count)
    if count > 0 and float(t.max()) <= SERIES_NOISE_FLOOR:
        ev.verdict = CONVERGES
        ev.tail_estimate = 0.0
        return ev
    if count < 20:
        if total == 0.0:
            ev.verdict = CONVERGES
            ev.tail_estimate = 0.0
        return ev

    cut = max(1, count // 10)
    last = t[-cut:]
    prev = t[-2 * cut:-cut]
    a, b = float(prev.sum()), float(last.sum())
    ev.window_ratio = b / a if a > 0 else None
    if b == 0.0:
        ev.verdict = CONVERGES
        ev.tail_estimate = 0.0
        return ev
    if a > b:
        q = b / a
        ev.tail_estimate = b * q / (1.0 - q)
        if q < 0.5 and ev.tail_estimate < 1e-10 * max(total, 1e-300):
            ev.verdict = CONVERGES
            return ev

    ns = first_index + np.arange(count, dtype=float)
    sel = (t > 0) & (ns >= 1)
    tail_sel = sel & (ns >= ns[-1] * 0.9)
    ev.slope = _fit_slope(np.log(ns[tail_sel]), np.log(t[tail_sel])) if tail_sel.sum() >= 5 else None
    if ev.slope is None:
        return ev
    if ev.slope >= -0.95:
        ev.verdict = DIVERGES
        return ev
    if ev.slope <= -1.30:
        ev.verdict = CONVERGES
        return ev

    # boundary band: peel the 1/n factor and fit the exponent p of
    # t_n ~ 1/(n log^p n) two ways, against log(log n) and against
    # log(s + log n) with the shift s chosen by least squares.  The plain fit
    # is biased low when the data's effective logarithm carries a shift, the
    # shifted fit is biased high when the polynomial factor carries an offset,
    # so the two straddle the truth for the scales handled here.
    wide = sel & (ns >= max(10.0, ns[-1] / 100.0)) & (ns >= 3.0)
    if wide.sum() >= 10:
        ln = np.log(ns[wide])
        y = np.log(t[wide]) + ln
        p_flat = _fit_slope(np.log(ln), y)
        p_shift = None
        best_ssr = None
        for sft in np.linspace(0.0, 3.0, 31):
            if sft + ln[0] < 0.5:
                continue
            x = np.log(sft + ln)
            p = _fit_slope(x, y)
            if p is None:
                continue
            resid = (y - y.mean()) - p * (x - x.mean())
            ssr = float(np.dot(resid, resid))
            if best_ssr is None or ssr < best_ssr:
                best_ssr, p_shift = ssr, p
        ps = [-q for q in (p_flat, p_shift) if q is not None]
        ev.log_exponent = -p_flat if p_flat is not None else None
        ev.log_exponent_shifted = -p_shift if p_shift is not None else None
        if ps:
            if min(ps) <= 1.20:
                ev.verdict = DIVERGES
            elif max(ps) >= 1.35:
                ev.verdict = CONVERGES
    return ev


def vanishing_verdict(values: np.ndarray) -> tuple[bool, dict]:
    """Does the non-negative sequence tend to zero?  Compares the last decade
    against the first."""
    v = np.asarray(values, dtype=float)
    if len(v) < 20:
        return bool(np.all(v == 0.0)), {"last_max": float(v.max(initial=0.0))}
    cut = max(1, len(v) // 10)
    head = float(v[:cut].max())
    tail = float(v[-cut:].max())
    ok = tail <= max(1e-12, 1e-2 * head)
    return ok, {"first_decade_max": head, "last_decade_max": tail}


def bounded_verdict(values: np.ndarray) -> tuple[bool, dict]:
    """Does the sequence stay bounded?  A last-decade maximum clearly above
    everything earlier reads as growth."""
    v = np.asarray(values, dtype=float)
    if len(v) < 20:
        return True, {"max": float(v.max(initial=0.0))}
    cut = max(1, len(v) // 10)
    head = float(v[:-cut].max())
    tail = float(v[-cut:].max())
    ok = tail <= 1.05 * max(head, 1e-300)
    return ok, {"head_max": head, "last_decade_max": tail}


# ---- sequence limits (matrix valued) ----


def _aitken(s1: np.ndarray, s2: np.ndarray, s3: np.ndarray) -> np.ndarray:
    """Entrywise Aitken extrapolation from samples at geometrically spaced
    indices; exact for limits approached like c * n^(-p) or c * r^n."""
    d1 = s2 - s1
    d2 = s3 - s2
    denom = d2 - d1
    scale = max(float(np.abs(s3).max()), 1.0)
    out = s3.astype(np.complex128).copy()
    mask = np.abs(denom) > 1e-14 * scale
    out[mask] = s3[mask] - d2[mask] ** 2 / denom[mask]
    return out


def _neville_at_zero(ts: Sequence[float], ys: Sequence[np.ndarray]) -> np.ndarray:
    """Polynomial extrapolation of samples y_i = f(t_i) to t = 0, entrywise.

    With t = 1/n and exact abscissas this is Richardson extrapolation; it
    collapses smooth 1/n tails regardless of how the sample indices round.
    """
    cur = [np.asarray(y, dtype=np.complex128) for y in ys]
    for m in range(1, len(cur)):
        cur = [
            (ts[i] * cur[i + 1] - ts[i + m] * cur[i]) / (ts[i] - ts[i + m])
            for i in range(len(cur) - 1)
        ]
    return cur[0]


@dataclass
class SequenceLimit:
    value: np.ndarray
    residual: float
    converged: bool
    method: str  # "cauchy" | "extrapolated" | "none"


def sequence_limit(getter: Callable[[int], np.ndarray], indices: Sequence[int],
                   tol: float = CAUCHY_TOL) -> SequenceLimit:
    """Numerical limit of getter(n) along the given increasing index list.

    Accepts by the plain Cauchy rule over the last decade of indices; when
    the raw terms still drift (slow power tails), falls back to Aitken
    extrapolation over geometrically spaced samples and accepts when two
    staggered extrapolations agree.
    """
    idx = list(indices)
    if len(idx) < 16:
        last = np.asarray(getter(idx[-1]))
        return SequenceLimit(last, float("inf"), False, "none")
    cut = max(2, len(idx) // 10)
    tail = idx[-cut:]
    vals = [np.asarray(getter(n), dtype=np.complex128) for n in tail]
    # drift across the whole last decade, not between neighbours: slow
    # monotone tails have tiny consecutive steps but large remaining drift
    raw_res = max(float(np.linalg.norm(v - vals[-1], 2)) for v in vals)
    scale = max(1.0, float(np.linalg.norm(vals[-1], 2)))
    if raw_res < tol * scale:
        return SequenceLimit(vals[-1], raw_res, True, "cauchy")

    k = len(idx) - 1
    picks = sorted({k // 32, k // 16, k // 8, k // 4, k // 2, k})
    if len(picks) == 6 and picks[0] >= 1:
        s = [np.asarray(getter(idx[j]), dtype=np.complex128) for j in picks]
        a = [_aitken(s[i], s[i + 1], s[i + 2]) for i in range(4)]
        ext_scale = max(1.0, float(np.linalg.norm(a[3], 2)))
        first_res = float(np.linalg.norm(a[3] - a[2], 2))
        if first_res < tol * ext_scale:
            return SequenceLimit(a[3], first_res, True, "extrapolated")
        # iterate once more on the extrapolants themselves and accept when
        # the two staggered second-stage values agree
        b1 = _aitken(a[0], a[1], a[2])
        b2 = _aitken(a[1], a[2], a[3])
        second_res = float(np.linalg.norm(b2 - b1, 2))
        if second_res < tol * max(1.0, float(np.linalg.norm(b2, 2))):
            return SequenceLimit(b2, second_res, True, "extrapolated")
        # Richardson in 1/n with the exact sample indices; staggered
        # agreement (with and without the farthest node) gates acceptance
        ts = [1.0 / idx[j] for j in picks]
        v_full = _neville_at_zero(ts, s)
        v_part = _neville_at_zero(ts[1:], s[1:])
        rich_res = float(np.linalg.norm(v_full - v_part, 2))
        if rich_res < tol * max(1.0, float(np.linalg.norm(v_full, 2))):
            return SequenceLimit(v_full, rich_res, True, "extrapolated")
    return SequenceLimit(vals[-1], raw_res, False, "none")


# ---- Carleman diagnostic ----


@dataclass
class CarlemanReport:
    horizon: int
    partial_sum: float
    evidence: SumEvidence

    @property
    def verdict(self) -> str:
        return self.evidence.verdict


def carleman_diagnostic(fam: CoefficientFamily, horizon: int = DEFAULT_HORIZON) -> CarlemanReport:
    """Partial sums of 1/||a_n|| with a divergence verdict.

    Divergence of this sum is the classical sufficient condition for the
    matrix to be essentially self-adjoint; its failure opens the door to
    complete indeterminacy.
    """
    terms = np.array([1.0 / fam.norm_a(n) for n in range(horizon)])
    ev = series_verdict(terms, first_index=0)
    return CarlemanReport(horizon, float(terms.sum()), ev)
