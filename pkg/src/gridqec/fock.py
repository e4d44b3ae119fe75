"""Truncated Fock-space linear algebra.

Dense complex matrices on a truncated oscillator (dimension n_max), a
two-level ancilla, and their tensor product, with the fixed ordering
qubit (x) oscillator. Unitarity and completeness statements are only
meaningful on the trusted subspace (lowest Fock levels); the top
guard-band levels absorb truncation artifacts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionMismatch, NotHermitian, TruncationWarning

OSC = "oscillator"
QUBIT = "qubit"
COMPOSITE = "composite"

_FLAG_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """Truncated oscillator Hilbert space.

    n_max is the dimension (Fock levels 0 .. n_max-1); the top
    guard_band fraction of levels is untrusted.
    """

    n_max: int
    guard_band: float = 0.25

    def __post_init__(self):
        if self.n_max < 8:
            raise ValueError(f"n_max must be >= 8, got {self.n_max}")
        if not 0.0 <= self.guard_band < 1.0:
            raise ValueError(f"guard_band must be in [0, 1), got {self.guard_band}")

    @property
    def dim(self) -> int:
        return self.n_max

    @property
    def trusted_dim(self) -> int:
        """Number of trusted Fock levels (0 .. trusted_dim-1)."""
        return int(np.floor((1.0 - self.guard_band) * self.n_max))


@dataclass
class Operator:
    """Dense operator with a space tag and optional verified flags."""

    matrix: np.ndarray
    space_tag: str = OSC
    hermitian: bool | None = None
    unitary: bool | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {m.shape}")
        if self.space_tag == QUBIT and m.shape[0] != 2:
            raise DimensionMismatch("qubit operator must be 2x2")
        if self.space_tag == COMPOSITE and (m.shape[0] % 2 or m.shape[0] < 4):
            raise DimensionMismatch("composite operator dimension must be 2*n_max")
        self.matrix = m
        if self.hermitian:
            dev = np.linalg.norm(m - m.conj().T)
            if dev > _FLAG_TOL * max(1.0, np.linalg.norm(m)):
                raise NotHermitian(f"hermitian flag set but deviation {dev:.2e}")
        if self.unitary:
            dev = np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]))
            if dev > _FLAG_TOL * m.shape[0]:
                raise ValueError(f"unitary flag set but ||U+U - I|| = {dev:.2e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space_tag)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dim != other.dim:
            raise DimensionMismatch(f"{self.dim} @ {other.dim}")
        return Operator(self.matrix @ other.matrix, self.space_tag)


@dataclass
class QuantumState:
    """Pure state vector or density matrix."""

    data: np.ndarray
    space_tag: str = OSC

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        if d.ndim == 1:
            norm = np.linalg.norm(d)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"pure state norm {norm} != 1")
        elif d.ndim == 2:
            if d.shape[0] != d.shape[1]:
                raise DimensionMismatch("density matrix must be square")
            if np.linalg.norm(d - d.conj().T) > 1e-10 * max(1.0, np.linalg.norm(d)):
                raise NotHermitian("density matrix not Hermitian")
            tr = np.trace(d).real
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix trace {tr} != 1")
            if np.linalg.eigvalsh(d).min() < -1e-9:
                raise ValueError("density matrix has negative eigenvalues")
        else:
            raise DimensionMismatch("state must be a vector or a matrix")
        self.data = d

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def expectation(self, op: np.ndarray | Operator) -> complex:
        m = op.matrix if isinstance(op, Operator) else op
        if self.is_pure:
            return complex(np.vdot(self.data, m @ self.data))
        return complex(np.trace(m @ self.data))


@dataclass
class WignerGrid:
    """Wigner function sampled on a set of phase-space points."""

    alphas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex).ravel()
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.alphas.shape != self.values.shape:
            raise DimensionMismatch("alphas and values must have the same length")
        bound = 2.0 / np.pi + 1e-9
        if np.any(np.abs(self.values) > bound):
            raise ValueError("Wigner values exceed the 2/pi bound")


# ---------------------------------------------------------------------------
# qubit operators

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
QUBIT_G = np.array([1, 0], dtype=complex)
QUBIT_E = np.array([0, 1], dtype=complex)


def qubit_rotation(phi: float, theta: float) -> np.ndarray:
    """Rotation about an equatorial axis: exp[-i(theta/2)(cos(phi) sx + sin(phi) sy)]."""
    gen = np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen


# ---------------------------------------------------------------------------
# oscillator operators


@lru_cache(maxsize=64)
def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max)), 1).astype(complex)


def make_oscillator_ops(space: FockSpace) -> dict[str, Operator]:
    """Annihilation, number, quadratures, and photon-number parity."""
    n = space.n_max
    a = _ladder(n)
    ad = a.conj().T
    x = (a + ad) / np.sqrt(2)
    p = 1j * (ad - a) / np.sqrt(2)
    num = np.diag(np.arange(n, dtype=float)).astype(complex)
    parity = np.diag((-1.0) ** np.arange(n)).astype(complex)
    return {
        "a": Operator(a, OSC),
        "n": Operator(num, OSC, hermitian=True),
        "x": Operator(x, OSC, hermitian=True),
        "p": Operator(p, OSC, hermitian=True),
        "parity": Operator(parity, OSC, hermitian=True, unitary=True),
    }


def _displacement_matrix(n_max: int, alpha: complex) -> np.ndarray:
    # exp(alpha a+ - alpha* a) through the eigenbasis of its Hermitian
    # generator: exactly unitary in the truncated space for any alpha.
    a = _ladder(n_max)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    h = -1j * gen
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def displacement(space: FockSpace, alpha: complex) -> Operator:
    """Displacement operator D(alpha) = exp(alpha a+ - alpha* a)."""
    if abs(alpha) ** 2 > 0.5 * space.n_max:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha)**2:.1f} exceeds n_max/2 = {space.n_max/2}; "
            "displacement leaves the trusted subspace",
            TruncationWarning,
            stacklevel=2,
        )
    if alpha == 0:
        return Operator(np.eye(space.n_max, dtype=complex), OSC, unitary=True)
    return Operator(_displacement_matrix(space.n_max, alpha), OSC, unitary=True)


def squeeze(space: FockSpace, r: float) -> Operator:
    """Squeezing exp[(r/2)(a^2 - a+^2)]; r > 0 narrows the x quadrature."""
    a = _ladder(space.n_max)
    gen = 0.5 * r * (a @ a - a.conj().T @ a.conj().T)
    h = -1j * gen
    w, v = np.linalg.eigh(h)
    return Operator((v * np.exp(1j * w)) @ v.conj().T, OSC, unitary=True)


def displacement_elements(n_max: int, alpha: complex) -> np.ndarray:
    """Matrix elements of the untruncated D(alpha) via the Laguerre closed form.

    <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^(-|a|^2/2) L_n^(m-n)(|a|^2)  (m >= n)
    and the adjoint relation for m < n. Independent of matrix exponentials.
    """
    m = np.arange(n_max)[:, None]
    n = np.arange(n_max)[None, :]
    x = abs(alpha) ** 2
    k = m - n  # order of the associated Laguerre polynomial
    lower = np.minimum(m, n)
    # log sqrt(min! / max!) = -0.5 |log m! - log n!|
    logpref = -0.5 * np.abs(gammaln(m + 1) - gammaln(n + 1))
    lag = eval_genlaguerre(lower, np.abs(k), x)
    mag = np.exp(logpref - x / 2 + np.abs(k) * (np.log(abs(alpha)) if alpha != 0 else 0.0))
    if alpha == 0:
        return np.eye(n_max, dtype=complex)
    phase_up = (alpha / abs(alpha)) ** np.where(k > 0, k, 0)
    phase_dn = (-np.conj(alpha) / abs(alpha)) ** np.where(k < 0, -k, 0)
    return mag * lag * phase_up * phase_dn


def hermitian_function(op: Operator, f: Callable[[np.ndarray], np.ndarray]) -> Operator:
    """Apply a scalar function to a Hermitian operator through its eigenbasis."""
    m = op.matrix
    if np.linalg.norm(m - m.conj().T) > 1e-10 * max(1.0, np.linalg.norm(m)):
        raise NotHermitian("hermitian_function requires a Hermitian operator")
    w, v = np.linalg.eigh(m)
    fw = np.asarray(f(w), dtype=complex)
    return Operator((v * fw) @ v.conj().T, op.space_tag)


def tensor(qubit_op: Operator | np.ndarray, osc_op: Operator | np.ndarray) -> Operator:
    """Kronecker product with the fixed ordering qubit (x) oscillator."""
    q = qubit_op.matrix if isinstance(qubit_op, Operator) else np.asarray(qubit_op)
    o = osc_op.matrix if isinstance(osc_op, Operator) else np.asarray(osc_op)
    if q.shape != (2, 2):
        raise DimensionMismatch("qubit factor must be 2x2")
    if isinstance(qubit_op, Operator) and qubit_op.space_tag != QUBIT:
        raise DimensionMismatch("first factor must be qubit-tagged")
    if isinstance(osc_op, Operator) and osc_op.space_tag != OSC:
        raise DimensionMismatch("second factor must be oscillator-tagged")
    return Operator(np.kron(q, o), COMPOSITE)


def trace_out_qubit(state: QuantumState | np.ndarray) -> np.ndarray:
    """Reduce a composite state to the oscillator density matrix."""
    if isinstance(state, QuantumState):
        rho = state.density()
    else:
        d = np.asarray(state)
        rho = np.outer(d, d.conj()) if d.ndim == 1 else d
    full = rho.shape[0]
    n = full // 2
    r = rho.reshape(2, n, 2, n)
    return r[0, :, 0, :] + r[1, :, 1, :]


def wigner(state: QuantumState, alphas: Sequence[complex], space: FockSpace | None = None) -> WignerGrid:
    """Wigner function W(alpha) = (2/pi) Tr[rho D(2 alpha) Pi].

    Uses the identity D(a) Pi D(-a) = D(2a) Pi and closed-form displacement
    matrix elements, so the values are those of the untruncated operator
    restricted to the state's support.
    """
    rho = state.density()
    dim = rho.shape[0]
    if state.space_tag == COMPOSITE or (space is not None and dim == 2 * space.n_max):
        rho = trace_out_qubit(state)
        dim = rho.shape[0]
    if space is not None:
        td = space.trusted_dim
        guard_pop = np.trace(rho[td:, td:]).real
        if guard_pop > 1e-4:
            warnings.warn(
                f"guard-band population {guard_pop:.2e} > 1e-4; Wigner values unreliable",
                TruncationWarning,
                stacklevel=2,
            )
    alphas = np.asarray(alphas, dtype=complex).ravel()
    parity = (-1.0) ** np.arange(dim)
    # Tr[rho D(2a) Pi] = sum_ij rho[i,j] D[j,i] parity[i]
    rho_p = parity[:, None] * rho
    vals = np.empty(alphas.size)
    for i, al in enumerate(alphas):
        d2 = displacement_elements(dim, 2 * al)
        vals[i] = (2.0 / np.pi) * np.einsum("nm,mn->", rho_p, d2, optimize=True).real
    vals = np.clip(vals, -2.0 / np.pi, 2.0 / np.pi)
    return WignerGrid(alphas, vals)
