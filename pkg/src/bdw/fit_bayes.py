"""Bayesian fitting of the bivariate discrete Weibull model.

The rates carry a Dirichlet-Gamma prior: the total rate is gamma, the
split between shared and individual shocks is Dirichlet.  The shape has
an independent gamma prior.  Estimation augments the integer data to
latent continuous lifetimes cell by cell (as in the ML route) and runs a
Gibbs sweep over the latent failure causes, the three rates, and the
shape; the outer loop re-imputes at the current draw averages and the
final round's draws carry the reported summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .fit_ml import PARAM_NAMES, BivariateDataset, impute_dataset, init_estimates
from .mobw import CompleteObservation, MOBWParams

__all__ = [
    "DGPrior",
    "AlphaPrior",
    "PosteriorDraws",
    "dg_logpdf",
    "cause_counts",
    "exposures",
    "sample_lambdas_conditional",
    "sample_alpha_conditional",
    "augmented_gibbs",
    "credible_interval",
    "hpd_interval",
]

# slice-sampler search window for the shape draw
SLICE_ALPHA_LO = 1e-3
SLICE_ALPHA_HI = 1e3
SLICE_WIDTH = 0.5


@dataclass(frozen=True)
class DGPrior:
    """Dirichlet-Gamma prior on the three rates.

    ``a`` and ``b`` shape the total rate; ``a0, a1, a2`` split it.  When
    ``a = a0 + a1 + a2`` the prior factorizes into independent gammas and
    the rate draws are exact conditionals.
    """

    a: float = 1e-4
    b: float = 1e-4
    a0: float = 1e-4
    a1: float = 1e-4
    a2: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("a", "b", "a0", "a1", "a2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"hyper-parameter {name} must be positive")


@dataclass(frozen=True)
class AlphaPrior:
    """Gamma prior (shape ``c``, rate ``d``) on the common shape."""

    c: float = 1e-4
    d: float = 1e-4

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("shape c must be positive")
        if not (math.isfinite(self.d) and self.d > 0):
            raise ValueError("rate d must be positive")

    def logpdf(self, alpha: float) -> float:
        if alpha <= 0:
            return -math.inf
        return (
            self.c * math.log(self.d)
            - math.lgamma(self.c)
            + (self.c - 1.0) * math.log(alpha)
            - self.d * alpha
        )


def dg_logpdf(
    prior: DGPrior, lambda0: float, lambda1: float, lambda2: float
) -> float:
    """Log density of the Dirichlet-Gamma prior at a rate triple."""
    lams = (lambda0, lambda1, lambda2)
    if any(l <= 0 for l in lams):
        raise ValueError("rates must be strictly positive")
    total = sum(lams)
    splits = (prior.a0, prior.a1, prior.a2)
    out = (
        math.lgamma(sum(splits))
        - math.lgamma(prior.a)
        + (prior.a - sum(splits)) * math.log(prior.b * total)
    )
    for ai, li in zip(splits, lams):
        out += (
            ai * math.log(prior.b)
            - math.lgamma(ai)
            + (ai - 1.0) * math.log(li)
            - prior.b * li
        )
    return out


@dataclass(frozen=True)
class _SampleStats:
    """Partition sizes and exposure-value tables of a complete sample."""

    n_below: int
    n_above: int
    n_tie: int
    vals1: np.ndarray
    w1: np.ndarray
    vals2: np.ndarray
    w2: np.ndarray
    vals0: np.ndarray
    w0: np.ndarray
    event_count: int
    log_y_sum: float


@lru_cache(maxsize=16)
def _stats(sample: tuple[CompleteObservation, ...]) -> _SampleStats:
    n_below = sum(1 for o in sample if o.kind == "below")
    n_above = sum(1 for o in sample if o.kind == "above")
    n_tie = len(sample) - n_below - n_above

    def table(values: list[float]) -> tuple[np.ndarray, np.ndarray]:
        pos = [v for v in values if v > 0]
        vals, counts = np.unique(np.asarray(pos, dtype=float), return_counts=True)
        return vals, counts.astype(float)

    y1 = [o.y1 for o in sample]
    y2 = [o.y2 for o in sample]
    ym = [max(o.y1, o.y2) for o in sample]
    event_count = 2 * (n_below + n_above) + n_tie
    log_y = 0.0
    for o in sample:
        if o.kind == "tie":
            log_y += math.log(o.y1)
        else:
            log_y += math.log(o.y1) + math.log(o.y2)
    v1, w1 = table(y1)
    v2, w2 = table(y2)
    v0, w0 = table(ym)
    return _SampleStats(
        n_below, n_above, n_tie, v1, w1, v2, w2, v0, w0, event_count, log_y
    )


def exposures(
    sample: Sequence[CompleteObservation], alpha: float
) -> tuple[float, float, float]:
    """Cause-specific exposure sums ``(T0, T1, T2)`` at a given shape.

    ``T1 = Σ y1^α``, ``T2 = Σ y2^α``, ``T0 = Σ max(y1, y2)^α`` over the
    whole sample; zero lifetimes contribute nothing.
    """
    st = _stats(tuple(sample))
    t1 = float(np.dot(st.w1, st.vals1**alpha))
    t2 = float(np.dot(st.w2, st.vals2**alpha))
    t0 = float(np.dot(st.w0, st.vals0**alpha))
    return t0, t1, t2


def cause_counts(
    sample: Sequence[CompleteObservation],
    lambdas: tuple[float, float, float],
    rng: np.random.Generator | None = None,
) -> tuple[float, float, float]:
    """Failure counts ``(N0, N1, N2)`` attributed to each latent cause.

    A coordinate that failed strictly first is its own cause; the later
    coordinate of an off-diagonal pair is attributed to the shared or the
    individual shock.  With ``rng`` the ambiguous attributions are drawn
    (two binomials), otherwise their expectations are used.
    """
    l0, l1, l2 = lambdas
    st = _stats(tuple(sample))
    share1 = l1 / (l0 + l1)
    share2 = l2 / (l0 + l2)
    if rng is None:
        k1 = st.n_above * share1
        k2 = st.n_below * share2
    else:
        k1 = float(rng.binomial(st.n_above, share1))
        k2 = float(rng.binomial(st.n_below, share2))
    n1 = st.n_below + k1
    n2 = st.n_above + k2
    n0 = st.n_tie + (st.n_below - k2) + (st.n_above - k1)
    return n0, n1, n2


def sample_lambdas_conditional(
    prior: DGPrior,
    alpha: float,
    sample: Sequence[CompleteObservation],
    lambdas: tuple[float, float, float],
    rng: np.random.Generator,
) -> tuple[float, float, float]:
    """One draw of the three rates given shape, sample, and current rates.

    The latent causes are drawn first; each rate then has a gamma full
    conditional.  When the prior total-shape ``a`` differs from
    ``a0+a1+a2`` the gamma product is only a proposal and a Metropolis
    accept step corrects for the ``(bλ)^(a-a0-a1-a2)`` factor; the
    current rates are kept on rejection.
    """
    n0, n1, n2 = cause_counts(sample, lambdas, rng)
    t0, t1, t2 = exposures(sample, alpha)
    shapes = (prior.a0 + n0, prior.a1 + n1, prior.a2 + n2)
    rates = (prior.b + t0, prior.b + t1, prior.b + t2)
    # near-zero shapes make gamma draws underflow; keep them positive
    prop = tuple(
        max(rng.gamma(s, 1.0 / r), 5e-324) for s, r in zip(shapes, rates)
    )
    excess = prior.a - (prior.a0 + prior.a1 + prior.a2)
    if excess == 0.0:
        return prop
    ratio = excess * (math.log(sum(prop)) - math.log(sum(lambdas)))
    if math.log(rng.uniform()) < ratio:
        return prop
    return lambdas


def _alpha_logtarget(
    alpha_prior: AlphaPrior,
    lambdas: tuple[float, float, float],
    st: _SampleStats,
) -> Callable[[float], float]:
    l0, l1, l2 = lambdas
    # density events: two per off-diagonal pair, one per tie; every tie
    # also carries its shared-cause rate factor
    rate_logs = 0.0
    if st.n_below:
        rate_logs += st.n_below * (math.log(l1) + math.log(l0 + l2))
    if st.n_above:
        rate_logs += st.n_above * (math.log(l0 + l1) + math.log(l2))
    if st.n_tie:
        rate_logs += st.n_tie * math.log(l0)

    def g(alpha: float) -> float:
        if not (0 < alpha < math.inf):
            return -math.inf
        try:
            t1 = float(np.dot(st.w1, st.vals1**alpha))
            t2 = float(np.dot(st.w2, st.vals2**alpha))
            t0 = float(np.dot(st.w0, st.vals0**alpha))
            out = (
                (alpha_prior.c - 1.0) * math.log(alpha)
                - alpha_prior.d * alpha
                + st.event_count * math.log(alpha)
                + rate_logs
                + (alpha - 1.0) * st.log_y_sum
                - l1 * t1
                - l2 * t2
                - l0 * t0
            )
        except (OverflowError, ValueError):
            return -math.inf
        return out if math.isfinite(out) else -math.inf

    return g


def sample_alpha_conditional(
    alpha_prior: AlphaPrior,
    lambdas: tuple[float, float, float],
    sample: Sequence[CompleteObservation],
    alpha: float,
    rng: np.random.Generator,
) -> float:
    """One draw of the shape from its conditional given rates and sample.

    Slice sampling with stepping-out and shrinkage; exact in stationarity
    for the conditional known up to its normalizing constant.
    """
    g = _alpha_logtarget(alpha_prior, lambdas, _stats(tuple(sample)))
    x0 = min(max(alpha, SLICE_ALPHA_LO), SLICE_ALPHA_HI)
    gx0 = g(x0)
    if not math.isfinite(gx0):
        raise ValueError("conditional density vanishes at the current shape")
    level = gx0 - rng.exponential()
    left = x0 - rng.uniform(0.0, SLICE_WIDTH)
    right = left + SLICE_WIDTH
    while left > SLICE_ALPHA_LO and g(left) > level:
        left -= SLICE_WIDTH
    while right < SLICE_ALPHA_HI and g(right) > level:
        right += SLICE_WIDTH
    left = max(left, SLICE_ALPHA_LO)
    right = min(right, SLICE_ALPHA_HI)
    while True:
        x1 = rng.uniform(left, right)
        if g(x1) > level:
            return x1
        if x1 < x0:
            left = x1
        else:
            right = x1


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Draws of ``(alpha, lambda0, lambda1, lambda2)`` with summaries."""

    draws: np.ndarray
    M: int
    N: int
    means: dict[str, float]
    credible: dict[str, tuple[float, float]]
    hpd: dict[str, tuple[float, float]]


def credible_interval(
    draws: Sequence[float], beta: float = 0.05
) -> tuple[float, float]:
    """Equal-tailed credible interval covering mass ``1 - beta``."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    g = np.asarray(draws, dtype=float)
    if g.size == 0:
        raise ValueError("draws must be non-empty")
    lo, hi = np.quantile(g, [beta / 2.0, 1.0 - beta / 2.0])
    return float(lo), float(hi)


def hpd_interval(
    draws: Sequence[float], beta: float = 0.05
) -> tuple[float, float]:
    """Shortest order-statistic window covering mass ``1 - beta``.

    Scans windows ``[g_(i), g_(i+k)]`` with ``k = ceil((1-β) M)`` over
    the sorted draws and keeps the shortest, leftmost on ties.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    g = np.sort(np.asarray(draws, dtype=float))
    m = g.size
    if m * (1.0 - beta) < 2:
        raise ValueError("too few draws for the requested mass")
    k = math.ceil((1.0 - beta) * m)
    if k >= m:
        raise ValueError("too few draws for the requested mass")
    lengths = g[k:] - g[: m - k]
    i = int(np.argmin(lengths))
    return float(g[i]), float(g[i + k])


def augmented_gibbs(
    data: BivariateDataset,
    prior: DGPrior | None = None,
    alpha_prior: AlphaPrior | None = None,
    M: int = 10_000,
    N: int = 20,
    start: MOBWParams | None = None,
    rng: np.random.Generator | None = None,
    burn_in: float = 0.1,
) -> PosteriorDraws:
    """Posterior draws by alternating imputation with Gibbs sweeps.

    Each outer round imputes latent lifetimes at the current point, runs
    ``M`` sweeps of (causes, rates, shape), and moves the point to the
    draw averages (first ``burn_in`` fraction discarded).  After ``N``
    rounds the last round's draws are returned; their means are the point
    estimates.
    """
    if M < 100:
        raise ValueError("M must be at least 100")
    if N < 1:
        raise ValueError("N must be at least 1")
    if not 0 <= burn_in < 1:
        raise ValueError("burn_in must lie in [0, 1)")
    prior = DGPrior() if prior is None else prior
    alpha_prior = AlphaPrior() if alpha_prior is None else alpha_prior
    rng = np.random.default_rng() if rng is None else rng
    theta = init_estimates(data) if start is None else start
    drop = int(M * burn_in)
    draws = np.empty((M, 4))
    for _ in range(N):
        sample = tuple(impute_dataset(theta, data))
        alpha = theta.alpha
        lams = (theta.lambda0, theta.lambda1, theta.lambda2)
        for i in range(M):
            lams = sample_lambdas_conditional(prior, alpha, sample, lams, rng)
            alpha = sample_alpha_conditional(
                alpha_prior, lams, sample, alpha, rng
            )
            draws[i, 0] = alpha
            draws[i, 1:] = lams
        center = draws[drop:].mean(axis=0)
        theta = MOBWParams(*center)
    means = {}
    cred = {}
    hpd = {}
    for j, name in enumerate(PARAM_NAMES):
        col = draws[:, j]
        means[name] = float(col.mean())
        cred[name] = credible_interval(col)
        hpd[name] = hpd_interval(col)
    return PosteriorDraws(
        draws=draws.copy(), M=M, N=N, means=means, credible=cred, hpd=hpd
    )
