"""Dense complex-matrix foundation: states, channels, spectra and sampling.

States, effects and Hermitian operators are plain ``numpy`` arrays; the
``check_*`` helpers validate them at API boundaries.  Channels are Kraus
lists wrapped in :class:`CPMap` / :class:`Channel`.
"""

from __future__ import annotations

import itertools
import json
from typing import Iterable, Sequence, Union

import numpy as np

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

# eigenvalues below this magnitude are treated as zero
SPECTRAL_TOL = 1e-12
STATE_TOL = 1e-10
HERMITIAN_TOL = 1e-8
CHANNEL_TOL = 1e-9


class ValidationError(ValueError):
    """Raised when an input violates a type invariant."""


def as_rng(seed: SeedLike) -> np.random.Generator:
    """Return a PCG64 generator for ``seed`` (passes generators through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: SeedLike, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds, stable for a given parent seed."""
    if isinstance(seed, np.random.Generator):
        return seed.bit_generator.seed_seq.spawn(n)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)


# --------------------------------------------------------------------------
# validation

def _square(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    return arr


def check_hermitian(x, tol: float = HERMITIAN_TOL, name: str = "operator") -> np.ndarray:
    arr = _square(x, name)
    asym = np.max(np.abs(arr - arr.conj().T))
    if asym > tol:
        raise ValidationError(f"{name} is not Hermitian (asymmetry {asym:.3g})")
    return 0.5 * (arr + arr.conj().T)


def check_density_matrix(rho, tol: float = STATE_TOL, name: str = "state") -> np.ndarray:
    """Validate a density matrix and return it as a Hermitian complex array."""
    arr = _square(rho, name)
    asym = np.max(np.abs(arr - arr.conj().T))
    if asym > tol:
        raise ValidationError(f"{name} is not Hermitian (asymmetry {asym:.3g})")
    arr = 0.5 * (arr + arr.conj().T)
    tr = np.trace(arr).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{name} does not have unit trace (trace {float(tr):.6g})")
    lam_min = np.linalg.eigvalsh(arr)[0]
    if lam_min < -tol:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {lam_min:.3g})")
    return arr


def check_effect(m, tol: float = STATE_TOL) -> np.ndarray:
    arr = check_hermitian(m, tol, "effect")
    w = np.linalg.eigvalsh(arr)
    if w[0] < -tol or w[-1] > 1 + tol:
        raise ValidationError(f"effect eigenvalues must lie in [0, 1], got [{w[0]:.3g}, {w[-1]:.3g}]")
    return arr


def check_same_dim(*mats: np.ndarray) -> None:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise ValidationError(f"dimension mismatch: {sorted(dims)}")


def is_density_matrix(rho, tol: float = STATE_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValidationError:
        return False
    return True


# --------------------------------------------------------------------------
# spectral helpers

def _eigh(x: np.ndarray):
    return np.linalg.eigh(0.5 * (x + x.conj().T))


def positive_part(x) -> tuple[np.ndarray, float]:
    """Split off the positive part of a Hermitian operator.

    Returns ``(P, tr_plus)`` with ``P = sum_{l_i > 0} l_i v_i v_i^dagger``.
    """
    x = check_hermitian(x)
    w, v = _eigh(x)
    keep = w > SPECTRAL_TOL
    wp = w[keep]
    vp = v[:, keep]
    return (vp * wp) @ vp.conj().T, float(wp.sum())


def positive_projector(x: np.ndarray) -> np.ndarray:
    """Projector onto the span of eigenvectors with positive eigenvalue."""
    w, v = _eigh(x)
    vp = v[:, w > SPECTRAL_TOL]
    return vp @ vp.conj().T


def trace_plus(x: np.ndarray) -> float:
    """``Tr X^+`` without validation; used on hot paths."""
    w = np.linalg.eigvalsh(x)
    return float(w[w > SPECTRAL_TOL].sum())


def trace_norm(x) -> float:
    """Schatten-1 norm (sum of absolute eigenvalues) of a Hermitian operator."""
    x = check_hermitian(x)
    w = np.linalg.eigvalsh(x)
    w = w[np.abs(w) > SPECTRAL_TOL]
    return float(np.abs(w).sum())


def psd_power(x: np.ndarray, power: float, support_tol: float = SPECTRAL_TOL) -> np.ndarray:
    """Matrix power of a PSD operator, taken on its support (pseudo-inverse
    convention for negative powers)."""
    w, v = _eigh(x)
    keep = w > support_tol
    wp = w[keep] ** power
    vp = v[:, keep]
    return (vp * wp) @ vp.conj().T


def psd_sqrt(x: np.ndarray) -> np.ndarray:
    w, v = _eigh(x)
    w = np.sqrt(np.where(w > SPECTRAL_TOL, w, 0.0))
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Quantum fidelity ``F = ||sqrt(rho) sqrt(sigma)||_1^2``."""
    rho = check_density_matrix(rho, name="rho")
    sigma = check_density_matrix(sigma, name="sigma")
    check_same_dim(rho, sigma)
    return _fidelity(rho, sigma)


def _fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    s = psd_sqrt(rho)
    w = np.linalg.eigvalsh(s @ sigma @ s)
    return float(np.sqrt(np.where(w > SPECTRAL_TOL, w, 0.0)).sum() ** 2)


def psd_root_product_norm(a: np.ndarray, b: np.ndarray) -> float:
    """``||A^{1/2} B^{1/2}||_1`` for PSD ``A`` and ``B``."""
    return float(np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False).sum())


# --------------------------------------------------------------------------
# channels

class CPMap:
    """Completely positive map given by Kraus operators ``X -> sum K X K^dagger``.

    Not required to be trace preserving; adjoints of channels live here.
    """

    def __init__(self, kraus: Iterable, label: str | None = None):
        ops = [np.array(k, dtype=complex) for k in kraus]
        if not ops:
            raise ValidationError("at least one Kraus operator is required")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ValidationError("Kraus operators must be matrices of equal shape")
        for k in ops:
            k.setflags(write=False)
        self.kraus: tuple[np.ndarray, ...] = tuple(ops)
        self.label = label
        self._superop: np.ndarray | None = None

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __repr__(self) -> str:
        name = self.label or f"{len(self.kraus)} Kraus ops"
        return f"{type(self).__name__}({name}, {self.dim_in}->{self.dim_out})"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_in, self.dim_in):
            raise ValidationError(
                f"input of shape {x.shape} does not match channel input dim {self.dim_in}")
        return self.apply_unchecked(x)

    def apply_unchecked(self, x: np.ndarray) -> np.ndarray:
        d = self.dim_out
        return (self.superoperator() @ x.reshape(-1)).reshape(d, d)

    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(N(X)) = S vec(X)`` for row-major ``vec``."""
        if self._superop is None:
            s = sum(np.kron(k, k.conj()) for k in self.kraus)
            s.setflags(write=False)
            self._superop = s
        return self._superop

    def adjoint(self) -> "CPMap":
        """Heisenberg-picture map ``M -> sum K^dagger M K``."""
        label = f"adjoint({self.label})" if self.label else None
        return CPMap([k.conj().T for k in self.kraus], label=label)

    def compose(self, inner: "CPMap") -> "CPMap":
        """``self o inner``: apply ``inner`` first."""
        if inner.dim_out != self.dim_in:
            raise ValidationError("dimension mismatch in composition")
        ops = [a @ b for a in self.kraus for b in inner.kraus]
        cls = Channel if isinstance(self, Channel) and isinstance(inner, Channel) else CPMap
        return _build(cls, ops)

    def tensor(self, other: "CPMap") -> "CPMap":
        ops = [np.kron(a, b) for a in self.kraus for b in other.kraus]
        cls = Channel if isinstance(self, Channel) and isinstance(other, Channel) else CPMap
        return _build(cls, ops)

    def choi(self) -> np.ndarray:
        """Choi matrix ``sum_ij N(|i><j|) (x) |i><j|`` (output factor first)."""
        if self.dim_in != self.dim_out:
            raise ValidationError("Choi matrix is only defined here for square channels")
        d = self.dim_in
        c = np.zeros((d * d, d * d), dtype=complex)
        for i, j in itertools.product(range(d), repeat=2):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(self.apply_unchecked(e), e)
        return c

    def relabel(self, label: str | None) -> "CPMap":
        self.label = label
        return self

    def is_trace_preserving(self, tol: float = CHANNEL_TOL) -> bool:
        s = sum(k.conj().T @ k for k in self.kraus)
        return bool(np.max(np.abs(s - np.eye(self.dim_in))) <= tol)

    def is_unital(self, tol: float = CHANNEL_TOL) -> bool:
        s = sum(k @ k.conj().T for k in self.kraus)
        return s.shape[0] == s.shape[1] and bool(np.max(np.abs(s - np.eye(s.shape[0]))) <= tol)


class Channel(CPMap):
    """CPTP map; ``sum K^dagger K = 1`` is checked on construction."""

    def __init__(self, kraus: Iterable, label: str | None = None, tol: float = CHANNEL_TOL):
        super().__init__(kraus, label=label)
        if not self.is_trace_preserving(tol):
            raise ValidationError("Kraus operators do not satisfy sum K^dagger K = 1")


def _build(cls, ops):
    if cls is Channel:
        return Channel(ops)
    return CPMap(ops)


def kraus_from_choi(choi: np.ndarray, dim: int, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators of the CP map with the given Choi matrix."""
    choi = np.asarray(choi, dtype=complex)
    if choi.shape != (dim * dim, dim * dim):
        raise ValidationError(f"Choi matrix of shape {choi.shape} does not match dim {dim}")
    w, v = _eigh(choi)
    if w[0] < -1e-9:
        raise ValidationError("Choi matrix is not positive semidefinite; map is not CP")
    return [np.sqrt(lam) * v[:, a].reshape(dim, dim) for a, lam in enumerate(w) if lam > tol]


def channel_from_choi(choi: np.ndarray, dim: int) -> Channel:
    return Channel(kraus_from_choi(choi, dim))


def compress_kraus(ch: CPMap) -> CPMap:
    """Same map with at most ``dim**2`` Kraus operators (via the Choi spectrum)."""
    if ch.dim_in != ch.dim_out or len(ch.kraus) <= ch.dim_in ** 2:
        return ch
    return _build(type(ch), kraus_from_choi(ch.choi(), ch.dim_in)).relabel(ch.label)


def identity_channel(dim: int) -> Channel:
    return Channel([np.eye(dim)], label=f"identity(d={dim})")


def unitary_channel(u) -> Channel:
    u = np.asarray(u, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=CHANNEL_TOL):
        raise ValidationError("matrix is not unitary")
    return Channel([u], label="unitary")


def weyl_operators(dim: int) -> list[np.ndarray]:
    """The ``dim**2`` clock-and-shift operators ``X^a Z^b``; ``(0, 0)`` first."""
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(dim) for b in range(dim)]


def depolarizing(p: float, dim: int = 2) -> Channel:
    """``D_p(rho) = (1 - p) rho + p 1/dim``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"depolarizing parameter must lie in [0, 1], got {p}")
    if dim < 2:
        raise ValidationError("dimension must be at least 2")
    ws = weyl_operators(dim)
    d2 = dim * dim
    ops = [np.sqrt(1.0 - p + p / d2) * ws[0]]
    ops += [np.sqrt(p / d2) * w for w in ws[1:]] if p > 0 else []
    return Channel(ops, label=f"depolarizing(p={p}, D={dim})")


def local_depolarizing(p: float, dim: int = 2, k: int = 1) -> Channel:
    """``D_p`` applied independently to each of ``k`` subsystems of size ``dim``."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    return tensor_power(depolarizing(p, dim), k, label=f"local_depolarizing(p={p}, D={dim}, k={k})")


def tensor_power(ch: Channel, k: int, label: str | None = None) -> Channel:
    out = Channel(ch.kraus, label=label or ch.label)
    for _ in range(k - 1):
        out = out.tensor(ch)
    out.label = label or out.label
    return out


def amplitude_damping(decay: float) -> Channel:
    if not 0.0 <= decay <= 1.0:
        raise ValidationError("decay probability must lie in [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - decay)]])
    k1 = np.array([[0.0, np.sqrt(decay)], [0.0, 0.0]])
    return Channel([k0, k1], label=f"amplitude_damping({decay})")


def partial_trace(x: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of ``x`` on subsystems of sizes ``dims``, keeping ``keep``."""
    n = len(dims)
    t = np.asarray(x).reshape(list(dims) * 2)
    idx = list(range(2 * n))
    for s in range(n):
        if s not in keep:
            idx[n + s] = idx[s]
    out_rows = [s for s in range(n) if s in keep]
    out = np.einsum(t, idx, [idx[s] for s in out_rows] + [idx[n + s] for s in out_rows])
    d = int(np.prod([dims[s] for s in out_rows])) if out_rows else 1
    return out.reshape(d, d)


def match_depolarizing(ch: CPMap, tol: float = 1e-9) -> float | None:
    """Return ``p`` if ``ch`` acts exactly as ``D_p``, else ``None``."""
    if ch.dim_in != ch.dim_out or ch.dim_in < 2:
        return None
    d = ch.dim_in
    e01 = np.zeros((d, d), dtype=complex)
    e01[0, 1] = 1.0
    p = 1.0 - ch.apply_unchecked(e01)[0, 1].real
    if not -tol <= p <= 1 + tol:
        return None
    p = min(max(p, 0.0), 1.0)
    target = depolarizing(p, d).superoperator()
    if np.max(np.abs(ch.superoperator() - target)) > tol:
        return None
    return p


# --------------------------------------------------------------------------
# sampling

def ket_to_dm(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def basis_state(dim: int, i: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[i, i] = 1.0
    return rho


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def sample_state(dim: int, rank: int | None = None, seed: SeedLike = None) -> np.ndarray:
    """Random density matrix ``G G^dagger / Tr`` with ``G`` a ``dim x rank`` Ginibre matrix."""
    rank = dim if rank is None else rank
    if dim < 1 or not 1 <= rank <= dim:
        raise ValidationError(f"need 1 <= rank <= dim, got dim={dim}, rank={rank}")
    g = _ginibre(as_rng(seed), dim, rank)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def sample_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    q, r = np.linalg.qr(_ginibre(as_rng(seed), dim, dim))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def sample_orthonormal_pair(dim: int, seed: SeedLike = None) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal Haar-distributed kets."""
    if dim < 2:
        raise ValidationError("orthogonal pairs need dim >= 2")
    u = sample_unitary(dim, seed)
    return u[:, 0], u[:, 1]


def sample_orthogonal_pure_pair(dim: int, seed: SeedLike = None) -> tuple[np.ndarray, np.ndarray]:
    """Two orthogonal pure density matrices."""
    phi, psi = sample_orthonormal_pair(dim, seed)
    return ket_to_dm(phi), ket_to_dm(psi)


def sample_effect(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Random effect ``u H / lambda_max(H)`` with ``H`` Wishart and ``u ~ U[0, 1]``."""
    if dim < 1:
        raise ValidationError("dim must be positive")
    rng = as_rng(seed)
    g = _ginibre(rng, dim, dim)
    h = g @ g.conj().T
    h = 0.5 * (h + h.conj().T)
    return rng.uniform() * h / np.linalg.eigvalsh(h)[-1]


def sample_channel(dim: int, n_kraus: int = 3, seed: SeedLike = None) -> Channel:
    """Random channel from an isometry (Stinespring dilation of a Haar unitary)."""
    u = sample_unitary(dim * n_kraus, seed)
    v = u[:, :dim]
    return Channel([v[a * dim:(a + 1) * dim, :] for a in range(n_kraus)], label="random")


# --------------------------------------------------------------------------
# JSON schema: complex entries as [re, im]

def _decode_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValidationError(f"complex entries must be [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    raise ValidationError(f"cannot decode matrix entry {x!r}")


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValidationError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError("matrix rows have unequal length")
    return np.array([[_decode_entry(x) for x in r] for r in rows], dtype=complex)


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def state_from_json(obj) -> np.ndarray:
    """Decode ``{"dim": d, "matrix": [[...]]}`` into a validated state."""
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise ValidationError("state JSON must be an object with a 'matrix' field")
    m = decode_matrix(obj["matrix"])
    if "dim" in obj and m.shape != (obj["dim"], obj["dim"]):
        raise ValidationError(f"declared dim {obj['dim']} does not match matrix shape {m.shape}")
    return m


def state_to_json(rho: np.ndarray) -> dict:
    return {"dim": int(rho.shape[0]), "matrix": encode_matrix(rho)}


def channel_from_json(obj) -> Channel:
    """Decode ``{"dim_in": d, "dim_out": d, "kraus": [matrix, ...]}``."""
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise ValidationError("channel JSON must be an object with a 'kraus' field")
    ops = [decode_matrix(k) for k in obj["kraus"]]
    ch = Channel(ops, label=obj.get("label"))
    for key, val in (("dim_in", ch.dim_in), ("dim_out", ch.dim_out)):
        if key in obj and obj[key] != val:
            raise ValidationError(f"declared {key}={obj[key]} does not match Kraus shape ({val})")
    return ch


def channel_to_json(ch: CPMap) -> dict:
    out = {"dim_in": ch.dim_in, "dim_out": ch.dim_out,
           "kraus": [encode_matrix(k) for k in ch.kraus]}
    if ch.label:
        out["label"] = ch.label
    return out


def load_json(path) -> object:
    with open(path) as fh:
        return json.load(fh)
