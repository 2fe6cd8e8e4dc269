"""Hockey-stick divergence, its equivalent forms and the relative-entropy family.

All logarithms are natural.  ``gamma = exp(epsilon) >= 1`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .core import (
    SPECTRAL_TOL,
    CPMap,
    SeedLike,
    ValidationError,
    _eigh,
    as_rng,
    check_density_matrix,
    check_same_dim,
    positive_projector,
    psd_power,
    psd_root_product_norm,
    sample_effect,
    trace_norm,
    trace_plus,
    _fidelity,
)

SUPPORT_TOL = 1e-9


class PreconditionError(ValueError):
    """Raised when a check's premise does not hold for the supplied inputs."""


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 1.0:
        raise ValidationError(f"gamma must be >= 1, got {gamma}")
    return gamma


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    rho = check_density_matrix(rho, name="rho")
    sigma = check_density_matrix(sigma, name="sigma")
    check_same_dim(rho, sigma)
    return rho, sigma


# --------------------------------------------------------------------------
# hockey-stick divergence

def hockey_stick(rho, sigma, gamma: float) -> float:
    """``E_gamma(rho || sigma) = Tr (rho - gamma sigma)^+`` for ``gamma >= 1``."""
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    return trace_plus(rho - gamma * sigma)


def hockey_stick_trace_form(rho, sigma, gamma: float) -> float:
    """Same quantity via ``||rho - gamma sigma||_1 / 2 + (1 - gamma) / 2``."""
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    return 0.5 * trace_norm(rho - gamma * sigma) + 0.5 * (1.0 - gamma)


def hockey_stick_measurement_oracle(rho, sigma, gamma: float, n_samples: int = 1000,
                                    seed: SeedLike = None) -> float:
    """Maximise ``Tr L (rho - gamma sigma)`` over the positive-part projector
    and ``n_samples`` random effects ``0 <= L <= 1``."""
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    x = rho - gamma * sigma
    best = float(np.trace(positive_projector(x) @ x).real)
    rng = as_rng(seed)
    d = x.shape[0]
    for _ in range(n_samples):
        m = sample_effect(d, rng)
        best = max(best, float(np.trace(m @ x).real))
    return max(best, 0.0)


def classical_hockey_stick(p, q, gamma: float) -> float:
    """``sum_x (p_x - gamma q_x)^+`` for probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.clip(p - gamma * q, 0.0, None).sum())


def trace_distance(rho, sigma) -> float:
    rho, sigma = _pair(rho, sigma)
    return 0.5 * trace_norm(rho - sigma)


def fvdg_upper_bound(rho, sigma, gamma: float) -> float:
    """Fuchs-van de Graaf type bound
    ``E_gamma <= sqrt((1+gamma)^2 - 4 gamma F) / 2 + (1 - gamma) / 2``."""
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    return fvdg_formula(_fidelity(rho, sigma), gamma)


def fvdg_formula(fid: float, gamma: float) -> float:
    rad = max((1.0 + gamma) ** 2 - 4.0 * gamma * fid, 0.0)
    return 0.5 * math.sqrt(rad) + 0.5 * (1.0 - gamma)


def trace_distance_sandwich(rho, sigma, gamma: float) -> tuple[float, float]:
    """``(1 - gamma (1 - T), T)`` bracketing ``E_gamma`` where ``T`` is the trace distance."""
    gamma = check_gamma(gamma)
    t = trace_distance(rho, sigma)
    return 1.0 - gamma * (1.0 - t), t


# --------------------------------------------------------------------------
# structural properties as executable checks

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    residual: float


def _e(rho, sigma, gamma):
    return trace_plus(rho - gamma * sigma)


def _triangle(rho, sigma, tau, g1, g2):
    return _e(rho, tau, g1) + g1 * _e(tau, sigma, g2) - _e(rho, sigma, g1 * g2)


def _strong_convexity(p, rhos, q, sigmas, g1, g2):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    rho = sum(px * r for px, r in zip(p, rhos))
    sigma = sum(qx * s for qx, s in zip(q, sigmas))
    rhs = sum(px * _e(r, s, g1) for px, r, s in zip(p, rhos, sigmas))
    rhs += g1 * classical_hockey_stick(p, q, g2)
    return rhs - _e(rho, sigma, g1 * g2)


def _stability(rho, sigma, tau, gamma):
    return _e(np.kron(rho, tau), np.kron(sigma, tau), gamma) - _e(rho, sigma, gamma)


def _subadditivity(rho1, rho2, sigma1, sigma2, g1, g2):
    lhs = _e(np.kron(rho1, rho2), np.kron(sigma1, sigma2), g1 * g2)
    first = _e(rho1, sigma1, g1) + g1 * _e(rho2, sigma2, g2) - lhs
    second = _e(rho2, sigma2, g1) + g1 * _e(rho1, sigma1, g2) - lhs
    return min(first, second)


def _symmetry(rho, sigma, gamma):
    # E_{1/gamma}(sigma || rho) evaluated directly; 1/gamma < 1 is outside the public domain
    reverse = trace_plus(sigma - rho / gamma)
    return _e(rho, sigma, gamma) - (gamma * reverse + 1.0 - gamma)


def _trace_bound(rho, sigma, tau, gamma):
    w = np.linalg.eigvalsh(tau - sigma)
    rhs = 0.5 * gamma * np.abs(w).sum() + 1.0 - gamma
    return _e(rho, sigma, gamma) + _e(rho, tau, gamma) - rhs


def _joint_convexity(p, rhos, sigmas, gamma):
    p = np.asarray(p, dtype=float)
    rho = sum(px * r for px, r in zip(p, rhos))
    sigma = sum(px * s for px, s in zip(p, sigmas))
    return sum(px * _e(r, s, gamma) for px, r, s in zip(p, rhos, sigmas)) - _e(rho, sigma, gamma)


def _data_processing(channel, rho, sigma, gamma):
    return _e(rho, sigma, gamma) - _e(channel(rho), channel(sigma), gamma)


def _fvdg_psd(a, b):
    lhs = np.abs(np.linalg.eigvalsh(a - b)).sum() ** 2 + 4.0 * psd_root_product_norm(a, b) ** 2
    return np.trace(a + b).real ** 2 - lhs


# name -> (residual function, arity, is_identity)
PROPERTIES: dict[str, tuple[Callable[..., float], int, bool]] = {
    "triangle": (_triangle, 5, False),
    "strong_convexity": (_strong_convexity, 6, False),
    "stability": (_stability, 4, True),
    "subadditivity": (_subadditivity, 6, False),
    "symmetry": (_symmetry, 3, True),
    "trace_bound": (_trace_bound, 4, False),
    "joint_convexity": (_joint_convexity, 4, False),
    "data_processing": (_data_processing, 4, False),
    "fvdg_psd": (_fvdg_psd, 2, False),
}


def property_check(property_id: str, *inputs, tol: float = 1e-8) -> PropertyCheck:
    """Evaluate one structural property of ``E_gamma`` on concrete inputs.

    Inequalities pass when ``rhs - lhs >= -tol``; identities when
    ``|lhs - rhs| <= tol``.

    ============================  ==========================================
    ``triangle``                  ``rho, sigma, tau, gamma1, gamma2``
    ``strong_convexity``          ``p, rhos, q, sigmas, gamma1, gamma2``
    ``stability``                 ``rho, sigma, tau, gamma``
    ``subadditivity``             ``rho1, rho2, sigma1, sigma2, gamma1, gamma2``
    ``symmetry``                  ``rho, sigma, gamma``
    ``trace_bound``               ``rho, sigma, tau, gamma``
    ``joint_convexity``           ``p, rhos, sigmas, gamma``
    ``data_processing``           ``channel, rho, sigma, gamma``
    ``fvdg_psd``                  ``A, B`` (any PSD pair)
    ============================  ==========================================
    """
    try:
        fn, arity, identity = PROPERTIES[property_id]
    except KeyError:
        raise ValidationError(f"unknown property {property_id!r}") from None
    if len(inputs) != arity:
        raise ValidationError(f"{property_id} takes {arity} inputs, got {len(inputs)}")
    residual = float(fn(*inputs))
    passed = abs(residual) <= tol if identity else residual >= -tol
    return PropertyCheck(property_id, passed, residual)


# --------------------------------------------------------------------------
# max-relative entropy and smoothing

def _support_violation(rho: np.ndarray, sigma: np.ndarray) -> bool:
    w, v = _eigh(sigma)
    vk = v[:, w <= SPECTRAL_TOL]
    if vk.shape[1] == 0:
        return False
    return float(np.trace(vk.conj().T @ rho @ vk).real) > SUPPORT_TOL


def d_max(rho, sigma) -> float:
    """``inf{lambda : rho <= e^lambda sigma}``; ``inf`` when supports are incompatible."""
    rho, sigma = _pair(rho, sigma)
    return _d_max(rho, sigma)


def _d_max(rho: np.ndarray, sigma: np.ndarray) -> float:
    if _support_violation(rho, sigma):
        return math.inf
    s = psd_power(sigma, -0.5)
    top = np.linalg.eigvalsh(s @ rho @ s)[-1]
    return math.log(top) if top > 0 else -math.inf


@dataclass(frozen=True)
class SmoothingWitness:
    """Positive operator ``rho_bar <= exp(dmax_value) sigma`` near ``rho``.

    ``smoothing_radius`` is ``Tr (rho - rho_bar)^+``; ``half_trace_norm`` is
    ``||rho - rho_bar||_1 / 2``.  The two differ because ``rho_bar`` is not
    normalised.
    """

    rho_bar: np.ndarray
    dmax_value: float
    smoothing_radius: float
    half_trace_norm: float


def smooth_dmax_witness(rho, sigma, gamma: float) -> SmoothingWitness:
    """Witness ``rho_bar = gamma sigma``: it has ``D_max <= ln gamma`` and
    smoothing radius exactly ``E_gamma(rho || sigma)``."""
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    rho_bar = gamma * sigma
    diff = rho - rho_bar
    return SmoothingWitness(
        rho_bar=rho_bar,
        dmax_value=math.log(gamma),
        smoothing_radius=trace_plus(diff),
        half_trace_norm=0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum()),
    )


def witness_implies_bound(rho, sigma, gamma: float, rho_bar) -> tuple[bool, float]:
    """Check an external witness.

    Returns ``(valid, radius)`` where ``valid`` says ``0 <= rho_bar <= gamma sigma``
    and ``radius = Tr (rho - rho_bar)^+``; a valid witness certifies
    ``E_gamma(rho || sigma) <= radius``.
    """
    gamma = check_gamma(gamma)
    rho, sigma = _pair(rho, sigma)
    rho_bar = np.asarray(rho_bar, dtype=complex)
    ok = (np.linalg.eigvalsh(rho_bar)[0] >= -1e-9
          and np.linalg.eigvalsh(gamma * sigma - rho_bar)[0] >= -1e-9)
    return bool(ok), trace_plus(rho - rho_bar)


# --------------------------------------------------------------------------
# Renyi family

RENYI_KINDS = ("sandwiched", "petz", "umegaki")


def _check_alpha(kind: str, alpha: float) -> None:
    if kind == "sandwiched":
        if not (alpha >= 0.5 and alpha != 1.0):
            raise ValidationError(f"sandwiched Renyi divergence needs alpha >= 1/2, alpha != 1; got {alpha}")
    elif kind == "petz":
        if not (0.0 < alpha < 1.0 or 1.0 < alpha <= 2.0):
            raise ValidationError(f"Petz Renyi divergence needs alpha in (0,1) or (1,2]; got {alpha}")
    elif kind != "umegaki":
        raise ValidationError(f"unknown divergence kind {kind!r}; expected one of {RENYI_KINDS}")


def renyi_divergence(kind: str, rho, sigma, alpha: float = 1.0) -> float:
    """Quantum Renyi relative entropy of the given ``kind`` (natural log).

    ``sandwiched``: ``log Tr[(sigma^s rho sigma^s)^alpha] / (alpha - 1)`` with
    ``s = (1 - alpha) / (2 alpha)``; ``alpha = inf`` gives ``D_max``.
    ``petz``: ``log Tr[rho^alpha sigma^(1 - alpha)] / (alpha - 1)``.
    ``umegaki``: ``Tr rho (log rho - log sigma)``; ``alpha`` is ignored.
    """
    _check_alpha(kind, alpha)
    rho, sigma = _pair(rho, sigma)
    return _renyi(kind, rho, sigma, float(alpha))


def _renyi(kind: str, rho: np.ndarray, sigma: np.ndarray, alpha: float) -> float:
    if kind == "umegaki":
        return _umegaki(rho, sigma)
    if alpha > 1.0 and _support_violation(rho, sigma):
        return math.inf
    if kind == "sandwiched":
        if math.isinf(alpha):
            return _d_max(rho, sigma)
        s = psd_power(sigma, (1.0 - alpha) / (2.0 * alpha))
        mu = np.linalg.eigvalsh(s @ rho @ s)
        mu = mu[mu > 0]
        if mu.size == 0:
            return math.inf
        return float(logsumexp(alpha * np.log(mu))) / (alpha - 1.0)
    # petz
    a, va = _eigh(rho)
    b, vb = _eigh(sigma)
    ka = a > SPECTRAL_TOL
    kb = b > SPECTRAL_TOL
    overlap = np.abs(va[:, ka].conj().T @ vb[:, kb]) ** 2
    q = float((a[ka] ** alpha) @ overlap @ (b[kb] ** (1.0 - alpha)))
    if q <= 0:
        return math.inf
    return math.log(q) / (alpha - 1.0)


def _umegaki(rho: np.ndarray, sigma: np.ndarray) -> float:
    if _support_violation(rho, sigma):
        return math.inf
    a, va = _eigh(rho)
    b, vb = _eigh(sigma)
    ka = a > SPECTRAL_TOL
    kb = b > SPECTRAL_TOL
    overlap = np.abs(va[:, ka].conj().T @ vb[:, kb]) ** 2
    ent = float(a[ka] @ np.log(a[ka]))
    cross = float(a[ka] @ overlap @ np.log(b[kb]))
    return ent - cross


def kl_divergence(p, q) -> float:
    """Classical relative entropy with ``0 log 0 = 0`` and ``p > 0, q = 0 -> inf``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


@dataclass(frozen=True)
class MeasuredRelEntCheck:
    passed: bool
    max_kl: float
    bound: float
    envelope: float
    n_measurements: int


def measured_relent_bound_check(channel: CPMap, rho, sigma, epsilon: float,
                                n_povms: int = 1000, seed: SeedLike = None) -> MeasuredRelEntCheck:
    """Check ``KL(p_M || q_M) <= 2 eps E_1(A(rho) || A(sigma))`` on sampled
    two-outcome measurements of an ``eps``-DP pair of outputs.

    ``bound`` is ``2 eps E_1`` and ``envelope`` is ``2 eps (1 - e^-eps)``.
    Raises :class:`PreconditionError` if the outputs are not ``eps``-related
    in ``D_max`` (both orders).
    """
    rho, sigma = _pair(rho, sigma)
    out_r = channel(rho)
    out_s = channel(sigma)
    dm = max(_d_max(out_r, out_s), _d_max(out_s, out_r))
    if dm > epsilon + 1e-9:
        raise PreconditionError(
            f"outputs are not {epsilon}-DP related: D_max = {dm:.6g} exceeds epsilon")
    e1 = trace_plus(out_r - out_s)
    bound = 2.0 * epsilon * e1
    envelope = 2.0 * epsilon * (1.0 - math.exp(-epsilon))

    effects = [positive_projector(out_r - out_s)]
    rng = as_rng(seed)
    d = out_r.shape[0]
    effects += [sample_effect(d, rng) for _ in range(n_povms)]
    max_kl = 0.0
    for m in effects:
        pr = min(max(float(np.trace(m @ out_r).real), 0.0), 1.0)
        qr = min(max(float(np.trace(m @ out_s).real), 0.0), 1.0)
        max_kl = max(max_kl, kl_divergence([pr, 1 - pr], [qr, 1 - qr]))
    return MeasuredRelEntCheck(
        passed=max_kl <= bound + 1e-9,
        max_kl=max_kl,
        bound=bound,
        envelope=envelope,
        n_measurements=len(effects),
    )
