"""Maximum-likelihood fitting of the bivariate discrete Weibull model.

The observed data are integer pairs; the estimation route goes through the
continuous shared-shock representation.  Each outer round imputes the most
likely latent lifetimes cell by cell, then an inner EM refits the shape and
the three rates from the imputed sample by treating the latent failure
causes as missing.  Imputation by maximization (rather than conditional
expectation) means the observed-data log-likelihood need not climb at every
round, so the best observed-likelihood point seen along the trajectory is
polished by a direct local ascent before it is reported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import ndtri

from . import bivariate
from .mobw import MOBWParams, CompleteObservation, complete_loglik, ml_predict
from .univariate import ALPHA_HI, ALPHA_LO, DWParams, dw_fit_minchisq

__all__ = [
    "BivariateDataset",
    "MLFitReport",
    "bdw_loglik",
    "initial_params_from_marginals",
    "init_estimates",
    "impute_dataset",
    "inner_em_mobw",
    "nested_em",
    "numerical_hessian",
    "observed_info_ci",
    "alpha_equals_one_test",
    "AlphaTestReport",
]

PARAM_NAMES = ("alpha", "lambda0", "lambda1", "lambda2")


@dataclass(frozen=True)
class BivariateDataset:
    """Immutable container of observed integer pairs with their partition.

    The partition into below-diagonal, above-diagonal and tie rows drives
    everything downstream, as does the compression to distinct cells: all
    likelihood and imputation work is done once per distinct cell and
    weighted by its count, which also makes every estimate invariant to row
    order.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValueError("dataset is empty")
        clean = []
        for row, (x1, x2) in enumerate(self.pairs):
            for v in (x1, x2):
                if v < 0 or v != int(v):
                    raise ValueError(
                        f"row {row}: entries must be non-negative integers, got ({x1}, {x2})"
                    )
            clean.append((int(x1), int(x2)))
        object.__setattr__(self, "pairs", tuple(clean))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[int]]) -> "BivariateDataset":
        return cls(tuple((int(a), int(b)) for a, b in pairs))

    @property
    def n(self) -> int:
        return len(self.pairs)

    @cached_property
    def below(self) -> tuple[int, ...]:
        """Indices of rows with x1 < x2."""
        return tuple(i for i, (a, b) in enumerate(self.pairs) if a < b)

    @cached_property
    def above(self) -> tuple[int, ...]:
        """Indices of rows with x1 > x2."""
        return tuple(i for i, (a, b) in enumerate(self.pairs) if a > b)

    @cached_property
    def ties(self) -> tuple[int, ...]:
        """Indices of rows with x1 = x2."""
        return tuple(i for i, (a, b) in enumerate(self.pairs) if a == b)

    @property
    def n_below(self) -> int:
        return len(self.below)

    @property
    def n_above(self) -> int:
        return len(self.above)

    @property
    def n_ties(self) -> int:
        return len(self.ties)

    @cached_property
    def cells(self) -> tuple[tuple[tuple[int, int], int, int], ...]:
        """Distinct cells as (cell, count, first row index), first-seen order."""
        seen: dict[tuple[int, int], list] = {}
        for row, cell in enumerate(self.pairs):
            rec = seen.setdefault(cell, [cell, 0, row])
            rec[1] += 1
        return tuple((c, k, r) for c, k, r in sorted(seen.values(), key=lambda t: t[0]))

    def column(self, which: str) -> np.ndarray:
        """One of the three univariate views: ``x1``, ``x2`` or ``min``."""
        arr = np.asarray(self.pairs, dtype=np.int64)
        if which == "x1":
            return arr[:, 0]
        if which == "x2":
            return arr[:, 1]
        if which == "min":
            return arr.min(axis=1)
        raise ValueError(f"column must be x1, x2 or min, got {which!r}")

    def swapped(self) -> "BivariateDataset":
        """The same rows with the coordinates exchanged."""
        return BivariateDataset(tuple((b, a) for a, b in self.pairs))


@dataclass(frozen=True)
class AlphaTestReport:
    """Decision on whether the common shape could be one (geometric case)."""

    reject: bool
    ci_low: float
    ci_high: float
    level: float
    verdict: str


@dataclass(frozen=True)
class MLFitReport:
    """Outcome of the nested fitting run."""

    params: MOBWParams
    bdw: bivariate.BDWParams
    loglik: float
    ci95: dict | None
    iterations: int
    converged: bool
    trajectory: tuple


def bdw_loglik(theta: MOBWParams, data: BivariateDataset) -> float:
    """Observed-data log-likelihood of the discrete pairs under ``theta``.

    Evaluated per distinct cell and weighted by multiplicity; a cell whose
    probability underflows to zero aborts with that cell's first row index,
    since a silent ``-inf`` would poison every comparison built on top.
    """
    params = bivariate.from_mobw(theta)
    cells = data.cells
    x1 = np.array([c[0] for c, _, _ in cells], dtype=float)
    x2 = np.array([c[1] for c, _, _ in cells], dtype=float)
    w = np.array([k for _, k, _ in cells], dtype=float)
    lp = bivariate._log_joint_pmf_arr(params, x1, x2)
    bad = ~np.isfinite(lp)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ValueError(
            f"data row {cells[idx][2]} (cell {cells[idx][0]}) has zero probability"
        )
    return float(w @ lp)


def initial_params_from_marginals(
    first: DWParams, second: DWParams, minimum: DWParams
) -> MOBWParams:
    """Starting point from three univariate fits.

    The two coordinate fits and the fit of the coordinatewise minimum carry
    survival bases ``p0*p1``, ``p0*p2`` and ``p0*p1*p2``; this inverts that
    map and averages the three shapes.  A product falling outside (0, 1] is
    clamped to the boundary with a warning — the inversion is exact only
    when the three fits are mutually consistent.
    """
    alpha = (first.alpha + second.alpha + minimum.alpha) / 3.0
    q1, q2, q12 = first.p, second.p, minimum.p
    p0 = q1 * q2 / q12
    p1 = q12 / q2
    p2 = q12 / q1
    eps = 1e-10
    if p0 > 1.0:
        warnings.warn(f"inconsistent marginal fits: shared base {p0:.6f} clamped to 1")
        p0 = 1.0
    for name, v in (("p1", p1), ("p2", p2)):
        if v >= 1.0:
            warnings.warn(f"inconsistent marginal fits: {name} = {v:.6f} clamped below 1")
    p1 = min(p1, 1.0 - eps)
    p2 = min(p2, 1.0 - eps)
    lam0 = 0.0 if p0 == 1.0 else -math.log(p0)
    return MOBWParams(alpha, lam0, -math.log(p1), -math.log(p2))


def init_estimates(data: BivariateDataset) -> MOBWParams:
    """Data-driven starting point for the nested fit.

    Each of the three univariate views is fitted by minimum chi-square on
    its observed support — the criterion whose per-column fits the full
    pipeline is benchmarked against — and the three fits are inverted
    through :func:`initial_params_from_marginals`.
    """
    f1 = dw_fit_minchisq(data.column("x1")).params
    f2 = dw_fit_minchisq(data.column("x2")).params
    fm = dw_fit_minchisq(data.column("min")).params
    return initial_params_from_marginals(f1, f2, fm)


def impute_dataset(theta: MOBWParams, data: BivariateDataset) -> list[CompleteObservation]:
    """Most likely latent lifetimes for every row, aligned with row order.

    The predictor runs once per distinct cell and the result is replicated,
    so permuted datasets impute identical multisets.
    """
    cache: dict[tuple[int, int], CompleteObservation] = {}
    for cell, _, _ in data.cells:
        pred = ml_predict(theta, *cell)
        cache[cell] = CompleteObservation(pred.y1hat, pred.y2hat, pred.kind)
    return [cache[cell] for cell in data.pairs]


def _aggregate(sample: Sequence[CompleteObservation]):
    # compress to distinct (y1, y2, kind) with weights
    agg: dict[tuple[float, float, str], float] = {}
    for obs in sample:
        key = (obs.y1, obs.y2, obs.kind)
        agg[key] = agg.get(key, 0.0) + 1.0
    y1 = np.array([k[0] for k in agg])
    y2 = np.array([k[1] for k in agg])
    kind = np.array([k[2] for k in agg])
    w = np.array(list(agg.values()))
    return y1, y2, kind, w


def inner_em_mobw(
    sample: Sequence[CompleteObservation],
    start: MOBWParams,
    tol: float = 1e-9,
    max_iter: int = 1000,
    trace: list | None = None,
) -> MOBWParams:
    """Fit the continuous shared-shock model to fully observed pairs.

    The missing information is which component caused each recorded
    minimum.  The E-step attributes causes fractionally from the current
    rates; the M-step is closed-form in the rates given the shape and
    reduces the shape update to one bracketed one-dimensional maximization
    of the profiled objective.  The log-likelihood of the flagged pairs is
    non-decreasing across iterations; pass ``trace`` to collect it.

    A zero lifetime among the recorded events leaves the boundary value
    finite only at shape one, so such samples are fitted with the shape
    pinned there.  A sample that is all ties, or has an identically zero
    coordinate, does not identify the coordinate rates and is rejected.
    """
    y1, y2, kind, w = _aggregate(sample)
    below = kind == "below"
    above = kind == "above"
    tie = kind == "tie"
    n_below = float(w[below].sum())
    n_above = float(w[above].sum())
    n_tie = float(w[tie].sum())
    if n_below + n_above == 0.0:
        raise ValueError(
            "sample is all ties: coordinate rates are not identifiable"
        )
    for name, col in (("first", y1), ("second", y2)):
        if not np.any(col > 0):
            raise ValueError(
                f"{name} coordinate is identically zero: its rate is not identifiable"
            )

    # event values: two per off-diagonal pair, one per tie
    ev = np.concatenate([y1[~tie], y2[~tie], y1[tie]])
    ev_w = np.concatenate([w[~tie], w[~tie], w[tie]])
    n_events = float(ev_w.sum())
    zero_events = bool(np.any((ev == 0.0) & (ev_w > 0)))
    with np.errstate(divide="ignore"):
        log_ev = np.where(ev > 0, np.log(ev), 0.0)
    sum_log = float(ev_w @ log_ev) if not zero_events else -math.inf
    mx = np.maximum(y1, y2)

    def exposures(alpha: float):
        p1 = np.where(y1 > 0, y1**alpha, 0.0)
        p2 = np.where(y2 > 0, y2**alpha, 0.0)
        pm = np.where(mx > 0, mx**alpha, 0.0)
        return float(w @ p1), float(w @ p2), float(w @ pm)

    def m_step(counts):
        # maximize the attributed-cause objective over shape and rates;
        # rates profile out exactly, leaving one bounded search
        c1, c2, c0 = counts

        def profiled(z: float) -> float:
            a = math.exp(z)
            t1, t2, t0 = exposures(a)
            val = n_events * z + (a - 1.0) * sum_log
            for c, t in ((c1, t1), (c2, t2), (c0, t0)):
                if c > 0.0:
                    val += c * (math.log(c) - math.log(t)) - c
            return val

        if zero_events:
            a = 1.0
        else:
            res = minimize_scalar(
                lambda z: -profiled(z),
                bounds=(math.log(ALPHA_LO), math.log(ALPHA_HI)),
                method="bounded",
                options={"xatol": 1e-8},
            )
            a = math.exp(res.x)
        t1, t2, t0 = exposures(a)
        return MOBWParams(a, c0 / t0 if c0 > 0 else 0.0, c1 / t1, c2 / t2)

    theta = start
    prev = None
    for _ in range(max_iter):
        l0, l1, l2 = theta.lambda0, theta.lambda1, theta.lambda2
        # expected cause counts given the current rates
        share2 = l0 / (l0 + l2)
        share1 = l0 / (l0 + l1)
        c1 = n_below + n_above * (1.0 - share1)
        c2 = n_above + n_below * (1.0 - share2)
        c0 = n_tie + n_below * share2 + n_above * share1
        theta = m_step((c1, c2, c0))
        cur = complete_loglik(theta, list(sample))
        if trace is not None:
            trace.append(cur)
        if prev is not None and abs(cur - prev) < tol:
            break
        prev = cur
    return theta


def _ascend_observed(
    theta: MOBWParams, data: BivariateDataset
) -> tuple[MOBWParams, float]:
    """Local observed-likelihood ascent from a trajectory point.

    Restarted Nelder-Mead on log-parameters followed by damped Newton
    steps from numerical derivatives, so the reported optimum is located
    to within gradient noise regardless of the simplex geometry; returns
    the refined point and its log-likelihood.
    """

    def neg(z: np.ndarray) -> float:
        try:
            return -bdw_loglik(MOBWParams(*np.exp(z)), data)
        except (ValueError, OverflowError):
            return np.inf

    z = np.log(
        [theta.alpha, max(theta.lambda0, 1e-8), theta.lambda1, theta.lambda2]
    )
    res = None
    for _ in range(2):
        res = minimize(
            neg,
            z,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        z = res.x
    value = float(res.fun)
    h = 1e-4
    for _ in range(12):
        grad = np.empty(z.size)
        for i in range(z.size):
            shifted = []
            for m in (-2.0, -1.0, 1.0, 2.0):
                zs = z.copy()
                zs[i] += m * h
                shifted.append(neg(zs))
            # fourth-order stencil keeps roundoff below the Newton radius
            grad[i] = (shifted[0] - 8.0 * shifted[1] + 8.0 * shifted[2] - shifted[3]) / (
                12.0 * h
            )
        hess = numerical_hessian(neg, z, steps=np.full(z.size, 1e-4))
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        # below float resolution of the objective a strict descent test
        # would reject the final micro-steps, so allow last-bit wobble
        slack = 64.0 * np.finfo(float).eps * max(1.0, abs(value))
        scale = 1.0
        for _ in range(10):
            cand = z - scale * step
            cand_value = neg(cand)
            if cand_value <= value + slack:
                z, value = cand, min(cand_value, value)
                break
            scale /= 2.0
        else:
            break
        if np.max(np.abs(scale * step)) < 1e-11:
            break
    refined = MOBWParams(*(float(v) for v in np.exp(z)))
    return refined, -float(value)


def nested_em(
    data: BivariateDataset,
    start: MOBWParams | None = None,
    tol: float = 1e-4,
    max_outer: int = 500,
) -> MLFitReport:
    """Alternate cell-wise imputation with the inner EM until stable.

    Convergence is declared when the attained imputed-sample log-likelihood
    moves by less than ``tol`` between rounds.  Because the imputation step
    maximizes rather than averages, the observed-data log-likelihood can
    dip along the way; the best observed-likelihood point seen along the
    trajectory is therefore refined by a direct local ascent of the
    observed log-likelihood before reporting, so the returned parameters
    attain (at least) the likelihood a direct numerical maximization from
    the same start would reach.  Confidence half-widths come from the
    numerical observed information at the reported point when it is
    well-conditioned.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    theta = init_estimates(data) if start is None else start
    best_theta = theta
    best_ll = bdw_loglik(theta, data)
    trajectory = []
    prev_pl = None
    converged = False
    iterations = 0
    for _ in range(max_outer):
        iterations += 1
        sample = impute_dataset(theta, data)
        theta = inner_em_mobw(sample, theta)
        pl = complete_loglik(theta, sample)
        ll = bdw_loglik(theta, data)
        trajectory.append((theta, ll))
        if ll > best_ll:
            best_ll, best_theta = ll, theta
        if prev_pl is not None and abs(pl - prev_pl) < tol:
            converged = True
            break
        prev_pl = pl
    if not converged:
        warnings.warn(f"no convergence within {max_outer} outer rounds")
    refined, refined_ll = _ascend_observed(best_theta, data)
    if refined_ll > best_ll - 1e-9:
        best_theta, best_ll = refined, refined_ll
    best_theta = MOBWParams(
        float(best_theta.alpha),
        float(best_theta.lambda0),
        float(best_theta.lambda1),
        float(best_theta.lambda2),
    )
    best_ll = float(best_ll)
    try:
        intervals = observed_info_ci(best_theta, data)
        ci95 = {
            name: float((hi - lo) / 2.0) for name, (lo, hi) in intervals.items()
        }
    except ValueError as exc:
        warnings.warn(f"confidence intervals unavailable: {exc}")
        ci95 = None
    return MLFitReport(
        params=best_theta,
        bdw=bivariate.from_mobw(best_theta),
        loglik=best_ll,
        ci95=ci95,
        iterations=iterations,
        converged=converged,
        trajectory=tuple(trajectory),
    )


def numerical_hessian(f, x: np.ndarray, steps: np.ndarray | None = None) -> np.ndarray:
    """Central-difference Hessian of a scalar function.

    Steps default to ``1e-4 * max(|x_i|, 0.01)`` per coordinate, halved
    where needed to keep evaluation points strictly positive for positive
    arguments.
    """
    x = np.asarray(x, dtype=float)
    k = x.size
    if steps is None:
        steps = 1e-4 * np.maximum(np.abs(x), 0.01)
    h = np.asarray(steps, dtype=float).copy()
    for i in range(k):
        if x[i] > 0:
            h[i] = min(h[i], x[i] / 2.0)
    hess = np.empty((k, k))
    f0 = f(x)

    def at(shifts: dict[int, float]) -> float:
        z = x.copy()
        for i, m in shifts.items():
            z[i] += m * h[i]
        return f(z)

    for i in range(k):
        hess[i, i] = (at({i: 1}) - 2.0 * f0 + at({i: -1})) / h[i] ** 2
    for i in range(k):
        for j in range(i + 1, k):
            v = (
                at({i: 1, j: 1}) - at({i: 1, j: -1}) - at({i: -1, j: 1}) + at({i: -1, j: -1})
            ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = v
    return hess


def observed_info_ci(
    theta: MOBWParams, data: BivariateDataset, level: float = 0.95
) -> dict[str, tuple[float, float]]:
    """Wald intervals from the numerically inverted observed information.

    Raises when the negative Hessian is not positive definite — the
    quadratic approximation is then untrustworthy and profile likelihood
    is the honest fallback.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    x0 = np.array([theta.alpha, theta.lambda0, theta.lambda1, theta.lambda2])

    def f(x):
        return bdw_loglik(MOBWParams(*x), data)

    hess = numerical_hessian(f, x0)
    info = -hess
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise ValueError(
            "observed information is not positive definite at the fit; "
            "use profile likelihood for interval estimates"
        ) from None
    cov = np.linalg.inv(info)
    z = float(ndtri(0.5 + level / 2.0))
    out = {}
    for i, name in enumerate(PARAM_NAMES):
        se = math.sqrt(cov[i, i])
        out[name] = (float(x0[i] - z * se), float(x0[i] + z * se))
    return out


def alpha_equals_one_test(
    fit: MLFitReport, data: BivariateDataset | None = None, level: float = 0.05
) -> AlphaTestReport:
    """Wald test of shape one, the bivariate geometric submodel.

    Rejects when 1 falls outside the two-sided confidence interval for the
    shape at the complementary confidence level.  The default 5% level
    reads the interval off the fit report; other levels recompute it and
    need the dataset.
    """
    if level == 0.05 and fit.ci95 is not None:
        hw = fit.ci95["alpha"]
        lo, hi = fit.params.alpha - hw, fit.params.alpha + hw
    else:
        if data is None:
            raise ValueError("testing away from the reported 95% interval needs the dataset")
        lo, hi = observed_info_ci(fit.params, data, level=1 - level)["alpha"]
    reject = not (lo <= 1.0 <= hi)
    verdict = (
        "shape one rejected: the bivariate geometric submodel is not adequate"
        if reject
        else "shape one not rejected: the bivariate geometric submodel is tenable"
    )
    return AlphaTestReport(reject, lo, hi, level, verdict)
