"""Contraction coefficients ``eta_gamma(N)`` of the hockey-stick divergence.

The coefficient is a supremum over orthogonal pure input pairs, so a
numerical lower bound comes from maximising over such pairs.  Sound upper
bounds come from closed forms (depolarizing noise) and from the smallest
eigenvalue of the Choi matrix of ``N^dagger o N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    CPMap,
    SeedLike,
    ValidationError,
    _fidelity,
    match_depolarizing,
    sample_unitary,
    spawn_seeds,
    trace_plus,
)
from .divergences import check_gamma, fvdg_formula

CLOSED_FORM = "closed_form"
OPTIMIZED_LOWER = "optimized_lower"
FVDG_UPPER = "fvdg_upper"
TRACE_UPPER = "trace_upper"
CHOI_FIDELITY_UPPER = "choi_fidelity_upper"

DEFAULT_RESTARTS = 200
_STEP_START = 0.5
_STEP_MIN = 1e-4
_IMPROVE_TOL = 1e-10


class MethodError(ValueError):
    """Requested estimation method does not apply to this channel."""


@dataclass
class ContractionEstimate:
    channel_id: str
    gamma: float
    lower: float
    upper: float
    method_tags: list[str] = field(default_factory=list)
    best_pair: Optional[tuple[np.ndarray, np.ndarray]] = None

    @property
    def exact(self) -> bool:
        return CLOSED_FORM in self.method_tags


# --------------------------------------------------------------------------
# closed forms and formula-backed bounds

def eta_depolarizing_closed(p: float, dim: int, gamma: float) -> float:
    """``eta_gamma(D_p) = max{0, (1 - gamma) p / D + (1 - p)}``."""
    gamma = check_gamma(gamma)
    _check_p(p, dim)
    return max(0.0, (1.0 - gamma) * p / dim + (1.0 - p))


def eta_local_depolarizing_upper(p: float, dim: int, k: int, gamma: float) -> float:
    """Upper bound ``max{0, (1 - gamma) p^k / D^k + (1 - p^k)}`` on ``eta_gamma(D_p^{(x)k})``.

    Only an upper bound; not known to be tight for ``k > 1``.
    """
    gamma = check_gamma(gamma)
    _check_p(p, dim)
    if k < 1:
        raise ValidationError("k must be at least 1")
    pk = p ** k
    return max(0.0, (1.0 - gamma) * pk / dim ** k + (1.0 - pk))


def eta_upper_trace(eta1: float, gamma: float) -> float:
    """``eta_gamma <= eta_1``."""
    check_gamma(gamma)
    return float(eta1)


def eta_lower_from_eta1(eta1: float, gamma: float) -> float:
    """``eta_gamma >= 1 - gamma (1 - eta_1)`` (clamped at 0)."""
    gamma = check_gamma(gamma)
    return max(0.0, 1.0 - gamma * (1.0 - eta1))


def choi_min_eigenvalue(channel: CPMap) -> float:
    """Smallest eigenvalue of the Choi matrix of ``N^dagger o N``."""
    c = channel.adjoint().compose(channel).choi()
    return float(np.linalg.eigvalsh(c)[0])


def eta_choi_upper(channel: CPMap, gamma: float, k: int = 1) -> float:
    """Fidelity-based upper bound on ``eta_gamma(N^{(x)k})`` for a ``d``-dimensional ``N``.

    Uses ``F >= (lambda_min(C_{N^dagger o N}) / d^2)^k`` inside the
    Fuchs-van de Graaf type bound.
    """
    gamma = check_gamma(gamma)
    if channel.dim_in != channel.dim_out:
        raise ValidationError("square channel required")
    d = channel.dim_in
    lam = max(choi_min_eigenvalue(channel), 0.0)
    return fvdg_formula((lam / d ** 2) ** k, gamma)


def eta_qubit_tensor_upper(channel: CPMap, k: int, gamma: float) -> float:
    """``eta_gamma(N^{(x)k}) <= sqrt((1+gamma)^2 - 4 gamma (lambda/4)^k) / 2 + (1 - gamma) / 2``
    for a qubit channel ``N`` with ``lambda = lambda_min(C_{N^dagger o N})``."""
    if channel.dim_in != 2 or channel.dim_out != 2:
        raise ValidationError("eta_qubit_tensor_upper needs a qubit channel")
    if k < 1:
        raise ValidationError("k must be at least 1")
    if not channel.is_unital():
        lam = choi_min_eigenvalue(channel)
        assert lam > 0, f"non-unital qubit channel with lambda_min = {lam}"
    return eta_choi_upper(channel, gamma, k)


def _check_p(p: float, dim: int) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    if dim < 2:
        raise ValidationError("dimension must be at least 2")


# --------------------------------------------------------------------------
# optimisation over orthogonal pure pairs

def _givens(u: np.ndarray, i: int, j: int, imag: bool, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    out = u.copy()
    ci, cj = u[:, i], u[:, j]
    if imag:
        out[:, i] = c * ci + 1j * s * cj
        out[:, j] = 1j * s * ci + c * cj
    else:
        out[:, i] = c * ci + s * cj
        out[:, j] = -s * ci + c * cj
    return out


def _moves(dim: int) -> list[tuple[int, int, bool]]:
    return [(i, j, imag) for i in (0, 1) for j in range(i + 1, dim) for imag in (False, True)]


def _coordinate_ascent(objective: Callable[[np.ndarray], float], u: np.ndarray):
    moves = _moves(u.shape[0])
    val = objective(u)
    step = _STEP_START
    while step >= _STEP_MIN:
        improved = False
        for i, j, imag in moves:
            for theta in (step, -step):
                cand = _givens(u, i, j, imag, theta)
                v = objective(cand)
                if v > val + _IMPROVE_TOL:
                    u, val, improved = cand, v, True
                    break
        if not improved:
            step *= 0.5
    return val, u


def optimize_pairs(objective: Callable[[np.ndarray, np.ndarray], float], dim: int,
                   restarts: int = DEFAULT_RESTARTS, seed: SeedLike = None):
    """Maximise ``objective(phi, psi)`` over orthonormal kets.

    Multi-start coordinate ascent over Givens rotations of a unitary whose
    first two columns are the pair.  Returns ``(value, (phi, psi))``; ties go
    to the lowest restart index.
    """
    if dim < 2:
        raise ValidationError("orthogonal pairs need dim >= 2")
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")

    def f(u):
        return objective(u[:, 0], u[:, 1])

    best_val, best_u = -math.inf, None
    for child in spawn_seeds(seed, restarts):
        val, u = _coordinate_ascent(f, sample_unitary(dim, child))
        if val > best_val:
            best_val, best_u = val, u
    return best_val, (best_u[:, 0].copy(), best_u[:, 1].copy())


def _pure_output(superop: np.ndarray, ket: np.ndarray, dim_out: int) -> np.ndarray:
    return (superop @ np.outer(ket, ket.conj()).ravel()).reshape(dim_out, dim_out)


def eta_lower_optimize(channel: CPMap, gamma: float, restarts: int = DEFAULT_RESTARTS,
                       seed: SeedLike = None):
    """Lower bound on ``eta_gamma(N)``: the best ``E_gamma(N(phi) || N(psi))``
    found over orthogonal pure pairs.  Returns ``(value, (phi, psi))``."""
    gamma = check_gamma(gamma)
    if channel.dim_in != channel.dim_out:
        raise ValidationError("square channel required")
    s = channel.superoperator()
    d = channel.dim_out

    def objective(phi, psi):
        return trace_plus(_pure_output(s, phi, d) - gamma * _pure_output(s, psi, d))

    val, pair = optimize_pairs(objective, channel.dim_in, restarts, seed)
    return max(val, 0.0), pair


def min_output_fidelity(channel: CPMap, restarts: int = DEFAULT_RESTARTS,
                        seed: SeedLike = None):
    """Smallest ``F(N(phi), N(psi))`` found over orthogonal pure pairs (an
    over-estimate of the true infimum)."""
    s = channel.superoperator()
    d = channel.dim_out

    def objective(phi, psi):
        return -_fidelity(_pure_output(s, phi, d), _pure_output(s, psi, d))

    val, pair = optimize_pairs(objective, channel.dim_in, restarts, seed)
    return min(max(-val, 0.0), 1.0), pair


def eta_upper_fvdg(channel: CPMap, gamma: float, restarts: int = DEFAULT_RESTARTS,
                   seed: SeedLike = None) -> float:
    """Heuristic upper estimate of ``eta_gamma`` from the minimum output fidelity.

    The inner minimisation is numerical, so this is diagnostics only and is
    never used in a privacy certificate.
    """
    gamma = check_gamma(gamma)
    f_min, _ = min_output_fidelity(channel, restarts, seed)
    return fvdg_formula(f_min, gamma)


# --------------------------------------------------------------------------
# dispatcher

METHODS = ("closed", "optimize", "fvdg", "trace", "choi")


def estimate_contraction(channel: CPMap, gamma: float, method: str = "optimize",
                         restarts: int = DEFAULT_RESTARTS, seed: SeedLike = None) -> ContractionEstimate:
    """Bracket ``eta_gamma(channel)`` with the requested method.

    ``closed`` needs a channel that acts exactly as global depolarizing noise
    and raises :class:`MethodError` otherwise.
    """
    gamma = check_gamma(gamma)
    cid = channel.label or repr(channel)
    p = match_depolarizing(channel)
    if method == "closed":
        if p is None:
            raise MethodError("closed form is only available for depolarizing channels")
        eta = eta_depolarizing_closed(p, channel.dim_in, gamma)
        return ContractionEstimate(cid, gamma, eta, eta, [CLOSED_FORM])
    if method not in METHODS:
        raise MethodError(f"unknown method {method!r}; expected one of {METHODS}")

    lower, pair = eta_lower_optimize(channel, gamma, restarts, seed)
    if method == "optimize":
        upper = eta_depolarizing_closed(p, channel.dim_in, gamma) if p is not None else 1.0
        return ContractionEstimate(cid, gamma, lower, max(upper, lower), [OPTIMIZED_LOWER], pair)
    if method == "fvdg":
        upper = eta_upper_fvdg(channel, gamma, restarts, seed)
        return ContractionEstimate(cid, gamma, lower, max(upper, lower),
                                   [OPTIMIZED_LOWER, FVDG_UPPER], pair)
    if method == "choi":
        upper = eta_choi_upper(channel, gamma)
        return ContractionEstimate(cid, gamma, lower, upper,
                                   [OPTIMIZED_LOWER, CHOI_FIDELITY_UPPER], pair)
    # trace: eta_gamma <= eta_1 with a sound eta_1, and the matching lower bound
    eta1_up = (eta_depolarizing_closed(p, channel.dim_in, 1.0) if p is not None
               else eta_choi_upper(channel, 1.0))
    eta1_low, _ = eta_lower_optimize(channel, 1.0, restarts, seed)
    lower = max(lower, eta_lower_from_eta1(eta1_low, gamma))
    return ContractionEstimate(cid, gamma, lower, eta_upper_trace(eta1_up, gamma),
                               [OPTIMIZED_LOWER, TRACE_UPPER], pair)
