"""(epsilon, delta)-, local- and Renyi-differential privacy certificates.

Neighbouring inputs are states within trace distance ``kappa``.  Layered
algorithms alternate a gate with a noise channel; only sound (formula
backed) upper bounds on contraction coefficients enter a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .contraction import (
    eta_choi_upper,
    eta_depolarizing_closed,
    eta_local_depolarizing_upper,
)
from .core import (
    Channel,
    CPMap,
    SeedLike,
    ValidationError,
    as_rng,
    channel_from_json,
    check_density_matrix,
    compress_kraus,
    check_same_dim,
    decode_matrix,
    depolarizing,
    identity_channel,
    ket_to_dm,
    local_depolarizing,
    sample_orthonormal_pair,
    tensor_power,
    trace_plus,
    unitary_channel,
)
from .divergences import _renyi, _check_alpha


class SoundnessError(ValueError):
    """A certificate would need an unsound (lower-bound) contraction estimate."""


@dataclass(frozen=True)
class DpBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValidationError(f"delta must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class RenyiBudget:
    epsilon: float
    alpha: float
    kind: str = "sandwiched"

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.alpha > 1:
            raise ValidationError(f"alpha must be > 1, got {self.alpha}")
        if self.kind not in ("sandwiched", "petz"):
            raise ValidationError(f"unknown divergence kind {self.kind!r}")


@dataclass(frozen=True)
class NeighborRelation:
    """``rho ~ sigma`` iff ``||rho - sigma||_1 / 2 <= kappa``."""

    kappa: float
    kind: str = "trace_distance_ball"

    def __post_init__(self):
        if self.kind != "trace_distance_ball":
            raise ValidationError(f"unsupported neighbour relation {self.kind!r}")
        if not 0.0 < self.kappa <= 1.0:
            raise ValidationError(f"kappa must lie in (0, 1], got {self.kappa}")

    def related(self, rho, sigma, tol: float = 1e-12) -> bool:
        w = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
        return 0.5 * np.abs(w).sum() <= self.kappa + tol


# --------------------------------------------------------------------------
# layered algorithms

@dataclass(frozen=True)
class NoiseSpec:
    """One noise layer.

    ``type`` is ``global_depolarizing`` (``p``), ``local_depolarizing``
    (``p`` on each of ``k`` subsystems of size ``local_dim``) or ``kraus``
    (``channel`` applied to each of ``k`` subsystems).
    """

    type: str
    p: float = 0.0
    k: int = 1
    local_dim: int = 2
    channel: CPMap | None = None

    def __post_init__(self):
        if self.type not in ("global_depolarizing", "local_depolarizing", "kraus"):
            raise ValidationError(f"unknown noise type {self.type!r}")
        if self.type != "kraus" and not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.type == "kraus" and self.channel is None:
            raise ValidationError("kraus noise needs a channel")

    def to_channel(self, dim: int) -> Channel:
        if self.type == "global_depolarizing":
            return depolarizing(self.p, dim)
        if self.type == "local_depolarizing":
            if self.local_dim ** self.k != dim:
                raise ValidationError(f"local_dim**k = {self.local_dim ** self.k} != D = {dim}")
            return local_depolarizing(self.p, self.local_dim, self.k)
        ch = tensor_power(self.channel, self.k)
        if ch.dim_in != dim or ch.dim_out != dim:
            raise ValidationError(f"kraus noise acts on dim {ch.dim_in}, algorithm has D = {dim}")
        return ch

    def eta_upper(self, dim: int, gamma: float) -> float:
        """Sound upper bound on this layer's contraction coefficient."""
        if self.type == "global_depolarizing":
            return eta_depolarizing_closed(self.p, dim, gamma)
        if self.type == "local_depolarizing":
            return eta_local_depolarizing_upper(self.p, self.local_dim, self.k, gamma)
        return eta_choi_upper(self.channel, gamma, self.k)


@dataclass
class LayeredAlgorithm:
    """``A = (N_n o C_n) o ... o (N_1 o C_1)``, applied layer 1 first."""

    dim: int
    layers: list[tuple[Channel, NoiseSpec]] = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def channel(self) -> Channel:
        out = identity_channel(self.dim)
        for gate, noise in self.layers:
            out = compress_kraus(noise.to_channel(self.dim).compose(compress_kraus(gate.compose(out))))
        return out

    def __call__(self, rho) -> np.ndarray:
        out = np.asarray(rho, dtype=complex)
        for gate, noise in self.layers:
            out = noise.to_channel(self.dim)(gate(out))
        return out

    @classmethod
    def from_json(cls, obj) -> "LayeredAlgorithm":
        if not isinstance(obj, dict) or "layers" not in obj or "dim" not in obj:
            raise ValidationError("algorithm JSON needs 'dim' and 'layers'")
        dim = int(obj["dim"])
        layers = []
        for lay in obj["layers"]:
            gate = lay.get("gate")
            if gate is None:
                gate_ch = identity_channel(dim)
            elif "unitary" in gate:
                gate_ch = unitary_channel(decode_matrix(gate["unitary"]))
            else:
                gate_ch = channel_from_json(gate)
            if gate_ch.dim_in != dim or gate_ch.dim_out != dim:
                raise ValidationError(f"gate dimension {gate_ch.dim_in} does not match D = {dim}")
            layers.append((gate_ch, noise_from_json(lay["noise"], dim)))
        return cls(dim, layers)


def noise_from_json(obj, dim: int) -> NoiseSpec:
    kind = obj.get("type")
    if kind == "global_depolarizing":
        return NoiseSpec(kind, p=float(obj["p"]))
    if kind == "local_depolarizing":
        k = int(obj.get("k", 1))
        local_dim = int(obj.get("D", round(dim ** (1.0 / k))))
        return NoiseSpec(kind, p=float(obj["p"]), k=k, local_dim=local_dim)
    if kind == "kraus":
        return NoiseSpec(kind, k=int(obj.get("k", 1)), channel=channel_from_json(obj["channel"]))
    raise ValidationError(f"unknown noise type {kind!r}")


def depolarizing_algorithm(p_list: Sequence[float], dim: int = 2, gates=None) -> LayeredAlgorithm:
    gates = gates or [identity_channel(dim)] * len(p_list)
    return LayeredAlgorithm(dim, [(g, NoiseSpec("global_depolarizing", p=p))
                                  for g, p in zip(gates, p_list)])


# --------------------------------------------------------------------------
# certificates

def _states(rho, sigma):
    rho = check_density_matrix(rho, name="rho")
    sigma = check_density_matrix(sigma, name="sigma")
    check_same_dim(rho, sigma)
    return rho, sigma


def certify_pair(channel, rho, sigma, epsilon: float) -> float:
    """``delta = E_{e^eps}(A(rho) || A(sigma))`` for one ordered pair."""
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    rho, sigma = _states(rho, sigma)
    return min(trace_plus(channel(rho) - math.exp(epsilon) * channel(sigma)), 1.0)


def certify_pair_symmetric(channel, rho, sigma, epsilon: float) -> float:
    return max(certify_pair(channel, rho, sigma, epsilon),
               certify_pair(channel, sigma, rho, epsilon))


def _kappa(rel) -> float:
    return rel.kappa if isinstance(rel, NeighborRelation) else float(rel)


def delta_layered_generic(algo: LayeredAlgorithm, rel, epsilon: float,
                          contraction_mode: str = "sound") -> float:
    """``delta = kappa * prod_i eta_{e^eps}(N_i)`` with sound per-layer bounds.

    Gates contribute a factor of one.  ``contraction_mode='optimized'`` is
    refused with :class:`SoundnessError`: optimised values are lower bounds.
    """
    if contraction_mode != "sound":
        raise SoundnessError(
            f"contraction mode {contraction_mode!r} yields lower bounds on eta; "
            "certificates need sound upper bounds")
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    kappa = _kappa(rel)
    gamma = math.exp(epsilon)
    delta = kappa
    for _, noise in algo.layers:
        delta *= noise.eta_upper(algo.dim, gamma)
    return min(max(delta, 0.0), 1.0)


def _p_star(p_list: Sequence[float]) -> float:
    ps = np.asarray(list(p_list), dtype=float)
    if ps.size and (ps.min() < 0 or ps.max() > 1):
        raise ValidationError("noise parameters must lie in [0, 1]")
    return float(1.0 - np.prod(1.0 - ps))


def _delta_formula(p_star: float, scale: float, kappa: float, epsilon: float) -> float:
    if not 0.0 <= kappa <= 1.0:
        raise ValidationError(f"kappa must lie in [0, 1], got {kappa}")
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    val = (1.0 - math.exp(epsilon)) * p_star / scale + (1.0 - p_star) * kappa
    return min(max(val, 0.0), 1.0)


def _eps_formula(p_star: float, scale: float, kappa: float, delta: float) -> float:
    if not 0.0 <= delta <= 1.0:
        raise ValidationError(f"delta must lie in [0, 1], got {delta}")
    slack = (1.0 - p_star) * kappa - delta
    if slack <= 0:
        return 0.0
    if p_star == 0:
        return math.inf
    return max(0.0, math.log(scale / p_star * slack + 1.0))


def delta_global_depolarizing(p_list: Sequence[float], dim: int, kappa: float,
                              epsilon: float) -> float:
    """``max{0, (1 - e^eps) p*/D + (1 - p*) kappa}`` with ``p* = 1 - prod(1 - p_i)``."""
    return _delta_formula(_p_star(p_list), dim, kappa, epsilon)


def eps_global_depolarizing(p_list: Sequence[float], dim: int, kappa: float,
                            delta: float) -> float:
    """``max{0, log(D/p* ((1 - p*) kappa - delta) + 1)}``."""
    return _eps_formula(_p_star(p_list), dim, kappa, delta)


def _p_star_local(p: float, k: int, n: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValidationError("p must lie in [0, 1]")
    if k < 1 or n < 0:
        raise ValidationError("need k >= 1 and n >= 0")
    return 1.0 - (1.0 - p ** k) ** n


def delta_local_depolarizing(p: float, dim: int, k: int, n: int, kappa: float,
                             epsilon: float) -> float:
    """``max{0, (1 - e^eps) p*/D^k + (1 - p*) kappa}`` with ``p* = 1 - (1 - p^k)^n``."""
    return _delta_formula(_p_star_local(p, k, n), dim ** k, kappa, epsilon)


def eps_local_depolarizing(p: float, dim: int, k: int, n: int, kappa: float,
                           delta: float) -> float:
    return _eps_formula(_p_star_local(p, k, n), dim ** k, kappa, delta)


def delta_qubit_noise(lam: float, k: int, n: int, kappa: float, epsilon: float) -> float:
    """``(sqrt((1+g)^2 - 4 g (lam/4)^k) / 2 + (1 - g) / 2)^n kappa`` with ``g = e^eps``."""
    if not 0.0 <= lam <= 4.0:
        raise ValidationError(f"lambda_min must lie in [0, 4], got {lam}")
    g = math.exp(epsilon)
    rad = max((1.0 + g) ** 2 - 4.0 * g * (lam / 4.0) ** k, 0.0)
    factor = max(0.5 * math.sqrt(rad) + 0.5 * (1.0 - g), 0.0)
    return min(factor ** n * kappa, 1.0)


class TraceLowerBound(NamedTuple):
    value: float
    vacuous: bool


def trace_lower_bound_local(p: float, k: int, n: int, initial_distance: float) -> TraceLowerBound:
    """``E_1(A(rho) || A(sigma)) >= (1 - 2p)^{kn} * initial_distance`` for unitary gates.

    Vacuous (value 0, flagged) for ``p >= 1/2``.
    """
    if p >= 0.5:
        return TraceLowerBound(0.0, True)
    return TraceLowerBound((1.0 - 2.0 * p) ** (k * n) * initial_distance, False)


class LightconeBound(NamedTuple):
    value: float
    decays: bool


def wasserstein_lightcone_upper(k: int, n: int, p: float, lightcone_size: int) -> LightconeBound:
    """``||A(rho) - A(sigma)||_1 <= 2k (2|I| (1 - p))^n``; ``decays`` iff ``2|I|(1 - p) < 1``."""
    if lightcone_size < 1:
        raise ValidationError("light-cone size must be >= 1")
    factor = 2.0 * lightcone_size * (1.0 - p)
    return LightconeBound(2.0 * k * factor ** n, factor < 1.0)


def compose_parallel(b1: DpBudget, b2: DpBudget) -> DpBudget:
    return DpBudget(b1.epsilon + b2.epsilon, min(1.0, b1.delta + b2.delta))


def post_process(b: DpBudget) -> DpBudget:
    return b


# --------------------------------------------------------------------------
# local DP

def ldp_delta_estimate(channel: CPMap, epsilon: float, samples: int = 1000,
                       seed: SeedLike = None) -> float:
    """Best ``E_{e^eps}`` over sampled orthogonal pure input pairs.

    A lower bound on the true LDP ``delta``; calls with the same seed
    evaluate the same pairs.
    """
    g = math.exp(epsilon)
    rng = as_rng(seed)
    best = 0.0
    for _ in range(samples):
        phi, psi = sample_orthonormal_pair(channel.dim_in, rng)
        best = max(best, trace_plus(channel(ket_to_dm(phi)) - g * channel(ket_to_dm(psi))))
    return min(best, 1.0)


def ldp_eta1_bound(epsilon: float, delta: float) -> float:
    """``phi(eps, delta) = 1 - e^-eps (1 - delta)`` bounds ``eta_1`` of an LDP channel."""
    return 1.0 - math.exp(-epsilon) * (1.0 - delta)


# --------------------------------------------------------------------------
# Renyi DP

def renyi_dp_certify(channel, pairs, alpha: float, kind: str = "sandwiched") -> float:
    """Largest Renyi divergence of outputs over the supplied pairs, both orders.

    Only an empirical lower bound on the supremum over all neighbours.
    """
    _check_alpha(kind, alpha)
    best = 0.0
    for rho, sigma in pairs:
        rho, sigma = _states(rho, sigma)
        a, b = channel(rho), channel(sigma)
        best = max(best, _renyi(kind, a, b, alpha), _renyi(kind, b, a, alpha))
    return best


def renyi_from_pure_dp(epsilon: float, alpha: float = math.inf, kind: str = "sandwiched") -> RenyiBudget:
    """``eps``-DP implies ``(eps, alpha)``-Renyi DP for every ``alpha``."""
    return RenyiBudget(epsilon, alpha, kind)


def g_delta(delta: float) -> float:
    """``-log(1 - sqrt(1 - delta^2))``, evaluated without cancellation."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta}")
    return -math.log(delta * delta / (1.0 + math.sqrt(1.0 - delta * delta)))


def renyi_to_approx_dp(b: RenyiBudget, delta: float) -> DpBudget:
    """``(eps, alpha)``-Renyi DP implies ``(eps + g(delta)/(alpha - 1), delta)``-DP."""
    if not b.alpha > 1:
        raise ValidationError("conversion needs alpha > 1")
    return DpBudget(b.epsilon + g_delta(delta) / (b.alpha - 1.0), delta)
