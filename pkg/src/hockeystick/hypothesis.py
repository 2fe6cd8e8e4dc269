"""Hypothesis-testing picture of differential privacy.

A binary test ``{M, 1 - M}`` applied to ``A(rho)`` versus ``A(sigma)`` has
Type-I error ``alpha = Tr (1 - M) A(rho)`` and Type-II error
``beta = Tr M A(sigma)``.  ``A`` is ``(eps, delta)``-DP exactly when every
achievable ``(alpha, beta)`` lies in the privacy region ``R(eps, delta)``.
Sampling can refute that, never prove it; :func:`certify_pair` is the
exact path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    CPMap,
    SeedLike,
    ValidationError,
    check_density_matrix,
    check_same_dim,
    positive_projector,
    sample_effect,
    spawn_seeds,
)
from .divergences import PreconditionError
from .privacy import certify_pair_symmetric

REGION_SLACK = 1e-9


@dataclass(frozen=True)
class ErrorPoint:
    alpha: float
    beta: float
    kind: str = "sampled"

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not -REGION_SLACK <= v <= 1 + REGION_SLACK:
                raise ValidationError(f"{name} = {v} outside [0, 1]")


@dataclass(frozen=True)
class PrivacyRegion:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValidationError(f"delta must lie in [0, 1], got {self.delta}")


def region_slacks(r: PrivacyRegion, alpha: float, beta: float) -> tuple[float, float, float, float]:
    """Slack of each defining inequality; all four are >= 0 inside the region."""
    g, d = math.exp(r.epsilon), r.delta
    return (
        g * beta + d - (1.0 - alpha),
        g * (1.0 - beta) + d - alpha,
        g * (1.0 - alpha) + d - beta,
        g * alpha + d - (1.0 - beta),
    )


def region_contains(r: PrivacyRegion, pt: ErrorPoint, slack: float = REGION_SLACK) -> bool:
    return min(region_slacks(r, pt.alpha, pt.beta)) >= -slack


def region_corner(epsilon: float, delta: float) -> ErrorPoint:
    """Point where the two lower boundary lines meet."""
    r = PrivacyRegion(epsilon, delta)
    c = (1.0 - r.delta) / (1.0 + math.exp(r.epsilon))
    return ErrorPoint(c, c, "corner")


def region_boundary(epsilon: float, delta: float, n: int = 1000) -> list[ErrorPoint]:
    """``n`` points on each of the four boundary lines of ``R(eps, delta)``.

    Each line is swept in ``alpha``; only points on the region's edge
    (the binding constraint and the unit square) are kept.
    """
    r = PrivacyRegion(epsilon, delta)
    g, d = math.exp(epsilon), delta
    out = []
    for a in np.linspace(0.0, 1.0, n):
        lower = max(0.0, 1.0 - d - g * a, (1.0 - d - a) / g)
        upper = min(1.0, g * (1.0 - a) + d, 1.0 - (a - d) / g)
        for b, kind in ((lower, "lower"), (upper, "upper")):
            if region_contains(r, ErrorPoint(float(a), b, kind)):
                out.append(ErrorPoint(float(a), b, kind))
    return out


def relax_budget(epsilon: float, delta: float, delta_tilde: float) -> float:
    """Smallest ``eps~`` with ``R(eps, delta)`` inside ``R(eps~, delta~)``."""
    if delta_tilde < delta:
        raise PreconditionError(f"delta~ = {delta_tilde} < delta = {delta}")
    if not 0.0 <= delta < 1.0:
        raise PreconditionError(f"delta must lie in [0, 1), got {delta}")
    if delta_tilde > 1.0:
        raise ValidationError("delta~ must be <= 1")
    if delta_tilde == delta:
        return float(epsilon)
    arg = (1.0 - delta_tilde) / (1.0 - delta) * (1.0 + math.exp(epsilon)) - 1.0
    if arg <= 1.0:
        return 0.0
    return math.log(arg)


# --------------------------------------------------------------------------
# channel regions

def _error_point(m: np.ndarray, a_rho: np.ndarray, a_sigma: np.ndarray, kind: str) -> ErrorPoint:
    alpha = 1.0 - float(np.real(np.trace(m @ a_rho)))
    beta = float(np.real(np.trace(m @ a_sigma)))
    return ErrorPoint(min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0), kind)


def sample_channel_region(channel: CPMap, rho, sigma, n_povms: int = 1000,
                          seed: SeedLike = None, epsilons: Iterable[float] = ()) -> list[ErrorPoint]:
    """Error points of ``A`` on the pair ``(rho, sigma)``.

    Order: the endpoints ``M = 0`` and ``M = 1``; for each ``eps`` the optimal
    projectors onto the positive parts of ``A(rho) - e^eps A(sigma)`` and of
    ``A(sigma) - e^eps A(rho)``; then ``n_povms`` random effects, effect ``i``
    drawn from the ``i``-th spawned seed.
    """
    if n_povms < 1:
        raise ValidationError("n_povms must be >= 1")
    rho = check_density_matrix(rho, name="rho")
    sigma = check_density_matrix(sigma, name="sigma")
    check_same_dim(rho, sigma)
    a_rho, a_sigma = channel(rho), channel(sigma)
    d = a_rho.shape[0]
    eye = np.eye(d, dtype=complex)

    pts = [_error_point(np.zeros_like(eye), a_rho, a_sigma, "endpoint"),
           _error_point(eye, a_rho, a_sigma, "endpoint")]
    for eps in epsilons:
        g = math.exp(eps)
        pts.append(_error_point(positive_projector(a_rho - g * a_sigma), a_rho, a_sigma, "optimal"))
        pts.append(_error_point(positive_projector(a_sigma - g * a_rho), a_rho, a_sigma, "optimal"))
    for child in spawn_seeds(seed, n_povms):
        pts.append(_error_point(sample_effect(d, child), a_rho, a_sigma, "sampled"))
    return pts


def max_excess(points: Sequence[ErrorPoint], epsilon: float) -> float:
    """Largest ``1 - alpha - e^eps beta``: the best violation of ``Tr M A(rho) <= e^eps Tr M A(sigma) + delta``."""
    g = math.exp(epsilon)
    return max(1.0 - p.alpha - g * p.beta for p in points)


@dataclass
class SubsetVerdict:
    verdict: str
    n_points: int
    n_outside: int
    worst_excess: float
    worst_point: ErrorPoint | None
    certify_delta: float

    @property
    def violated(self) -> bool:
        return self.verdict == "certified_violation"

    def report(self, delta: float) -> str:
        exact = "holds" if self.certify_delta <= delta + REGION_SLACK else "fails"
        return (f"{self.verdict}: {self.n_outside}/{self.n_points} points outside; "
                f"exact delta = {self.certify_delta:.12g} ({exact} for delta = {delta:g})")


def region_subset_check(channel: CPMap, pairs, epsilon: float, delta: float,
                        n_povms: int = 1000, seed: SeedLike = None) -> SubsetVerdict:
    """Search for points of ``R(A)`` outside ``R(eps, delta)``.

    ``certified_violation`` is a sound refutation of ``(eps, delta)``-DP;
    ``no_violation_found`` is not a proof.  The exact symmetric
    ``certify_pair`` value is attached for comparison.
    """
    region = PrivacyRegion(epsilon, delta)
    pairs = list(pairs)
    seeds = spawn_seeds(seed, len(pairs))
    n_points = n_outside = 0
    worst, worst_pt, exact = -math.inf, None, 0.0
    for (rho, sigma), child in zip(pairs, seeds):
        pts = sample_channel_region(channel, rho, sigma, n_povms, child, [epsilon])
        for pt in pts:
            s = -min(region_slacks(region, pt.alpha, pt.beta))
            if s > worst:
                worst, worst_pt = s, pt
            n_outside += s > REGION_SLACK
        n_points += len(pts)
        exact = max(exact, certify_pair_symmetric(channel, rho, sigma, epsilon))
    verdict = "certified_violation" if n_outside else "no_violation_found"
    return SubsetVerdict(verdict, n_points, n_outside, worst, worst_pt, exact)
