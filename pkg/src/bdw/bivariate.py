"""Bivariate discrete Weibull (BDW) law.

The pair is built from three independent DW components sharing one shape:
``X1 = min(U1, U0)`` and ``X2 = min(U2, U0)`` with ``Ui ~ DW(alpha, pi)``.
The shared component ``U0`` can floor both coordinates at once, so the
diagonal ``x1 == x2`` carries strictly positive mass whenever ``p0 < 1``,
and ``p0 = 1`` (a never-failing shock) makes the coordinates independent.

The joint survival function, with weak inequalities on both coordinates, is

    S(x1, x2) = p1**(x1**alpha) * p2**(x2**alpha) * p0**(max(x1, x2)**alpha)

and all probability computations below are exact rearrangements of its
rectangle differences, evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .univariate import DWParams, dw_sample, dw_sf

__all__ = [
    "BDWParams",
    "BivariateGeomParams",
    "BdwMoments",
    "GridCheckReport",
    "joint_sf",
    "joint_pmf",
    "joint_logpmf",
    "joint_cdf",
    "joint_pmf_grid",
    "marginals",
    "min_distribution",
    "closure_min",
    "cond_pmf",
    "cond_sf_given_ge",
    "cond_sf_given_eq",
    "sample",
    "moments",
    "to_mobw",
    "from_mobw",
    "is_tp2_on_grid",
    "pqd_check_on_grid",
]


@dataclass(frozen=True)
class BDWParams:
    """Parameters of the bivariate discrete Weibull law.

    Parameters
    ----------
    alpha : float
        Common shape of the three latent DW components, strictly positive.
    p0 : float
        Survival base of the shared component, in (0, 1].  ``p0 = 1``
        expresses independence of the two coordinates.
    p1, p2 : float
        Survival bases of the coordinate-specific components, in (0, 1).

    The marginal survival bases ``p0*p1`` and ``p0*p2`` are below one
    automatically, so both marginals are proper DW laws.
    """

    alpha: float
    p0: float
    p1: float
    p2: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"shape must be positive and finite, got {self.alpha}")
        if not 0 < self.p0 <= 1:
            raise ValueError(f"p0 must lie in (0, 1], got {self.p0}")
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True)
class BivariateGeomParams:
    """Bivariate geometric law: the shape-one special case of :class:`BDWParams`."""

    p0: float
    p1: float
    p2: float

    def as_bdw(self) -> BDWParams:
        return BDWParams(1.0, self.p0, self.p1, self.p2)


@dataclass(frozen=True)
class BdwMoments:
    """First and second moments of a BDW law from a truncated double sum."""

    mean1: float
    mean2: float
    var1: float
    var2: float
    covariance: float
    correlation: float
    truncation_bound: int


@dataclass(frozen=True)
class GridCheckReport:
    """Result of an inequality sweep over a finite grid of survival ratios."""

    passed: bool
    worst_ratio: float
    max_ratio: float
    witness: tuple | None
    checked: int


def _check_cell(x1, x2) -> tuple[int, int]:
    for v in (x1, x2):
        if v < 0 or v != int(v):
            raise ValueError(f"support is pairs of non-negative integers, got ({x1}, {x2})")
    return int(x1), int(x2)


def joint_sf(params: BDWParams, x1: float, x2: float) -> float:
    """Joint survival ``P(X1 >= x1, X2 >= x2)`` for real non-negative arguments.

    Both inequalities are weak; non-integer arguments are floored, matching
    the univariate convention.
    """
    if x1 < 0 or x2 < 0:
        raise ValueError("arguments must be non-negative")
    a = params.alpha
    t1 = float(math.floor(x1)) ** a
    t2 = float(math.floor(x2)) ** a
    tz = max(t1, t2)
    return math.exp(
        t1 * math.log(params.p1) + t2 * math.log(params.p2) + tz * math.log(params.p0)
    )


def _logdw(y: np.ndarray, alpha: float, lnq: float) -> np.ndarray:
    # log pmf of DW(alpha, e**lnq) on integer-valued float arrays
    t1 = np.where(y > 0, np.power(y, alpha), 0.0)
    t2 = np.power(y + 1.0, alpha)
    with np.errstate(invalid="ignore", over="ignore"):
        out = t1 * lnq + np.log1p(-np.exp((t2 - t1) * lnq))
    return np.where(np.isfinite(t1), out, -np.inf)


def _log_joint_pmf_arr(params: BDWParams, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Log joint pmf on arrays of integer-valued floats (no validation)."""
    a = params.alpha
    lnp0 = math.log(params.p0)
    lnp1 = math.log(params.p1)
    lnp2 = math.log(params.p2)
    out = np.empty(np.broadcast(x1, x2).shape)
    x1, x2 = np.broadcast_arrays(x1, x2)

    below = x1 < x2
    above = x1 > x2
    diag = ~(below | above)

    if np.any(below):
        out[below] = _logdw(x1[below], a, lnp1) + _logdw(x2[below], a, lnp0 + lnp2)
    if np.any(above):
        out[above] = _logdw(x1[above], a, lnp0 + lnp1) + _logdw(x2[above], a, lnp2)
    if np.any(diag):
        x = x1[diag]
        if params.p0 == 1.0:
            # independence: the diagonal has no shared-shock atom
            out[diag] = _logdw(x, a, lnp1) + _logdw(x, a, lnp2)
        else:
            t1 = np.where(x > 0, np.power(x, a), 0.0)
            t2 = np.power(x + 1.0, a)
            # difference of two positive terms, kept in log space: the
            # leading term dominates for every valid parameter point
            lead = t1 * lnp1 + _logdw(x, a, lnp0 + lnp2)
            trail = t2 * (lnp0 + lnp1) + _logdw(x, a, lnp2)
            with np.errstate(invalid="ignore"):
                d = np.where(trail < lead, np.log1p(-np.exp(trail - lead)), -np.inf)
            out[diag] = np.where(np.isfinite(t1), lead + d, -np.inf)
    return out


def joint_logpmf(params: BDWParams, x1: int, x2: int) -> float:
    """Natural log of the joint mass at an integer pair."""
    i, j = _check_cell(x1, x2)
    return float(_log_joint_pmf_arr(params, np.asarray([float(i)]), np.asarray([float(j)]))[0])


def joint_pmf(params: BDWParams, x1: int, x2: int) -> float:
    """Joint probability mass at an integer pair.

    Off the diagonal the mass factorises into two DW masses; on the
    diagonal it is a difference of two products reflecting the shared
    shock's atom, evaluated stably in log space.
    """
    return math.exp(joint_logpmf(params, x1, x2))


def joint_cdf(params: BDWParams, x1: int, x2: int) -> float:
    """Joint distribution function ``P(X1 <= x1, X2 <= x2)``.

    Computed through the survival inclusion-exclusion identity: with weak-
    inequality survival functions, ``P(X1 > x1, X2 > x2)`` is the joint
    survival at ``(x1+1, x2+1)``.
    """
    i, j = _check_cell(x1, x2)
    m1, m2 = marginals(params)
    f1 = 1.0 - dw_sf(m1, i + 1)
    f2 = 1.0 - dw_sf(m2, j + 1)
    return f1 + f2 - 1.0 + joint_sf(params, i + 1, j + 1)


def joint_pmf_grid(params: BDWParams, k1: int, k2: int) -> np.ndarray:
    """Joint pmf table over the rectangle [0, k1] x [0, k2].

    Returns an array of shape (k1+1, k2+1) with entry [i, j] equal to
    ``joint_pmf(params, i, j)``.
    """
    if k1 < 0 or k2 < 0:
        raise ValueError("grid bounds must be non-negative")
    g1 = np.arange(k1 + 1, dtype=float)[:, None]
    g2 = np.arange(k2 + 1, dtype=float)[None, :]
    return np.exp(_log_joint_pmf_arr(params, g1, g2))


def marginals(params: BDWParams) -> tuple[DWParams, DWParams]:
    """Marginal laws: ``X1 ~ DW(alpha, p0*p1)`` and ``X2 ~ DW(alpha, p0*p2)``."""
    return (
        DWParams(params.alpha, params.p0 * params.p1),
        DWParams(params.alpha, params.p0 * params.p2),
    )


def min_distribution(params: BDWParams) -> DWParams:
    """Law of ``min(X1, X2)``: a DW with survival base ``p0*p1*p2``."""
    return DWParams(params.alpha, params.p0 * params.p1 * params.p2)


def closure_min(components: list[BDWParams]) -> DWParams:
    """Law of the overall minimum across several independent BDW pairs.

    All entries must share the same shape; the survival bases multiply.
    """
    if not components:
        raise ValueError("need at least one component")
    alpha = components[0].alpha
    prod = 1.0
    for c in components:
        if c.alpha != alpha:
            raise ValueError("all components must share the same shape")
        prod *= c.p0 * c.p1 * c.p2
    return DWParams(alpha, prod)


def cond_pmf(params: BDWParams, x1: int, x2: int) -> float:
    """Conditional mass ``P(X1 = x1 | X2 = x2)``."""
    i, j = _check_cell(x1, x2)
    _, m2 = marginals(params)
    denom = math.exp(_logdw(np.asarray([float(j)]), params.alpha, math.log(m2.p))[0])
    if denom == 0.0:
        raise ValueError(f"conditioning event X2 = {j} has zero probability numerically")
    return joint_pmf(params, i, j) / denom


def cond_sf_given_ge(params: BDWParams, x1: int, x2: int) -> float:
    """Conditional survival ``P(X1 >= x1 | X2 >= x2)``."""
    i, j = _check_cell(x1, x2)
    _, m2 = marginals(params)
    denom = dw_sf(m2, j)
    if denom == 0.0:
        raise ValueError(f"conditioning event X2 >= {j} has zero probability numerically")
    return joint_sf(params, i, j) / denom


def cond_sf_given_eq(params: BDWParams, x1: int, x2: int) -> float:
    """Conditional survival ``P(X1 >= x1 | X2 = x2)``.

    For ``x1 <= x2`` this collapses to the survival of the first
    coordinate's own component, ``p1**(x1**alpha)``: knowing the second
    coordinate's exact value pins the shared shock beyond ``x2`` already.
    """
    i, j = _check_cell(x1, x2)
    a = params.alpha
    if i <= j:
        return math.exp(float(i) ** a * math.log(params.p1))
    _, m2 = marginals(params)
    num = math.exp(
        float(i) ** a * math.log(params.p0 * params.p1)
        + _logdw(np.asarray([float(j)]), a, math.log(params.p2))[0]
    )
    denom = math.exp(_logdw(np.asarray([float(j)]), a, math.log(m2.p))[0])
    if denom == 0.0:
        raise ValueError(f"conditioning event X2 = {j} has zero probability numerically")
    return num / denom


def sample(params: BDWParams, rng: np.random.Generator, size=None):
    """Draw pairs by the shock construction.

    Three independent DW draws are taken per pair (the shared one skipped
    when ``p0 = 1``) and the coordinatewise minima returned.  With ``size``
    given, returns an array of shape (size, 2); otherwise a single tuple.
    """
    n = 1 if size is None else int(size)
    u1 = dw_sample(DWParams(params.alpha, params.p1), rng, size=n)
    u2 = dw_sample(DWParams(params.alpha, params.p2), rng, size=n)
    if params.p0 < 1.0:
        u0 = dw_sample(DWParams(params.alpha, params.p0), rng, size=n)
        x1 = np.minimum(u1, u0)
        x2 = np.minimum(u2, u0)
    else:
        x1, x2 = u1, u2
    if size is None:
        return int(x1[0]), int(x2[0])
    return np.column_stack([x1, x2])


def _truncation_bound(params: BDWParams, epsilon: float) -> int:
    # smallest K with the heavier marginal's survival below epsilon; the
    # heavier tail has the larger survival base, so it controls both
    qmax = params.p0 * max(params.p1, params.p2)
    k = max(1, math.ceil((math.log(epsilon) / math.log(qmax)) ** (1.0 / params.alpha)))
    while math.exp(float(k) ** params.alpha * math.log(qmax)) >= epsilon:
        k += 1
    while k > 1 and math.exp(float(k - 1) ** params.alpha * math.log(qmax)) < epsilon:
        k -= 1
    return k


def moments(params: BDWParams, epsilon: float = 1e-10) -> BdwMoments:
    """Means, variances, covariance and correlation by truncated summation.

    The double sum runs over [0, K]^2 where K is the smallest integer at
    which the heavier marginal's survival drops below ``epsilon``; K is
    reported so callers can judge the truncation.
    """
    if not 0 < epsilon <= 1e-4:
        raise ValueError(f"epsilon must lie in (0, 1e-4], got {epsilon}")
    k = _truncation_bound(params, epsilon)
    grid = joint_pmf_grid(params, k, k)
    xs = np.arange(k + 1, dtype=float)
    p1m = grid.sum(axis=1)
    p2m = grid.sum(axis=0)
    mean1 = float(xs @ p1m)
    mean2 = float(xs @ p2m)
    var1 = float(xs**2 @ p1m) - mean1**2
    var2 = float(xs**2 @ p2m) - mean2**2
    exy = float(xs @ grid @ xs)
    cov = exy - mean1 * mean2
    corr = cov / math.sqrt(var1 * var2)
    return BdwMoments(mean1, mean2, var1, var2, cov, corr, k)


def to_mobw(params: BDWParams):
    """Rates of the continuous latent model: ``lambda_i = -ln(p_i)``."""
    from .mobw import MOBWParams

    lam0 = 0.0 if params.p0 == 1.0 else -math.log(params.p0)
    return MOBWParams(params.alpha, lam0, -math.log(params.p1), -math.log(params.p2))


def from_mobw(params) -> BDWParams:
    """Survival bases from latent rates: ``p_i = exp(-lambda_i)``."""
    return BDWParams(
        params.alpha,
        1.0 if params.lambda0 == 0.0 else math.exp(-params.lambda0),
        math.exp(-params.lambda1),
        math.exp(-params.lambda2),
    )


def is_tp2_on_grid(params: BDWParams, k: int = 10) -> GridCheckReport:
    """Sweep the order-2 total-positivity inequality of the joint survival.

    For every ``x11 <= x12`` and ``x21 <= x22`` in [0, k] the product
    ``S(x11,x21)*S(x12,x22)`` must dominate ``S(x12,x21)*S(x11,x22)``.  The
    coordinate-specific factors cancel exactly in the ratio, which therefore
    reduces to a power of ``p0``; evaluating that reduced form keeps the
    sweep immune to spurious last-ulp violations, and makes the ratio
    identically one when ``p0 = 1``.
    """
    if k < 1:
        raise ValueError("grid bound must be at least 1")
    a = params.alpha
    lnp0 = math.log(params.p0)
    pw = [float(v) ** a for v in range(k + 1)]
    worst = math.inf
    best = -math.inf
    witness = None
    checked = 0
    for x11 in range(k + 1):
        for x12 in range(x11, k + 1):
            for x21 in range(k + 1):
                for x22 in range(x21, k + 1):
                    m1 = pw[max(x11, x21)]
                    m3 = pw[max(x12, x21)]
                    m4 = pw[max(x11, x22)]
                    # the largest of the four maxima appears on both sides
                    # and cancels exactly; only the smaller pair survives
                    logratio = lnp0 * (m1 - min(m3, m4))
                    checked += 1
                    if logratio < worst:
                        worst = logratio
                        if logratio < 0:
                            witness = (x11, x12, x21, x22)
                    best = max(best, logratio)
    return GridCheckReport(
        passed=worst >= 0.0,
        worst_ratio=math.exp(worst),
        max_ratio=math.exp(best),
        witness=witness,
        checked=checked,
    )


def pqd_check_on_grid(params: BDWParams, k: int = 10) -> GridCheckReport:
    """Sweep positive quadrant dependence: joint survival vs product of marginals.

    The ratio reduces exactly to ``p0**(-min(x1, x2)**alpha)``: the
    coordinatewise factors cancel and the shared component does the work.
    Equality holds everywhere iff ``p0 = 1``; otherwise the boundary rows
    ``min(x1, x2) = 0`` are the only equality cells.
    """
    if k < 1:
        raise ValueError("grid bound must be at least 1")
    a = params.alpha
    lnp0 = math.log(params.p0)
    worst = math.inf
    best = -math.inf
    witness = None
    checked = 0
    for x1 in range(k + 1):
        for x2 in range(k + 1):
            logratio = -lnp0 * float(min(x1, x2)) ** a
            checked += 1
            if logratio < worst:
                worst = logratio
                if logratio < 0:
                    witness = (x1, x2)
            best = max(best, logratio)
    return GridCheckReport(
        passed=worst >= 0.0,
        worst_ratio=math.exp(worst),
        max_ratio=math.exp(best),
        witness=witness,
        checked=checked,
    )
