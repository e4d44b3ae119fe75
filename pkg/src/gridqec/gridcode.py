"""Finite-energy grid codes on a det-1 phase-space lattice.

Codewords are the envelope image exp(-delta^2 n) of ideal grid states.
The envelope of a position eigenstate is an exact Gaussian (Mehler
kernel), so each codeword is assembled as a finite, weighted comb of
displaced squeezed states with analytically known centers, widths, and
weights; no infinitely squeezed intermediate is ever represented.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import sqrtm

from .errors import PairingAmbiguous, TruncationError, TruncationWarning
from .fock import (
    OSC,
    FockSpace,
    Operator,
    QuantumState,
    _displacement_matrix,
    displacement,
    squeeze,
)

L_S = np.sqrt(2 * np.pi)  # length of a grid unit cell


@dataclass(frozen=True)
class LatticeMatrix:
    """Real 2x2 matrix defining the grid geometry; normalized to det 1."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        det = self.m11 * self.m22 - self.m12 * self.m21
        if det <= 0:
            raise ValueError(f"lattice determinant must be positive, got {det}")
        if abs(det - 1.0) > 1e-12:
            s = 1.0 / np.sqrt(det)
            object.__setattr__(self, "m11", self.m11 * s)
            object.__setattr__(self, "m12", self.m12 * s)
            object.__setattr__(self, "m21", self.m21 * s)
            object.__setattr__(self, "m22", self.m22 * s)

    @classmethod
    def square(cls) -> "LatticeMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def hexagonal(cls) -> "LatticeMatrix":
        s = np.sqrt(2 / np.sqrt(3))
        return cls(s, s / 2, 0.0, s * np.sqrt(3) / 2)

    @property
    def alpha_x(self) -> complex:
        """Displacement amplitude of the X stabilizer."""
        return L_S * (self.m22 - 1j * self.m12)

    @property
    def alpha_z(self) -> complex:
        """Displacement amplitude of the Z stabilizer."""
        return L_S * (1j * self.m11 - self.m21)


@dataclass
class GridCode:
    """Codewords, stabilizers, logicals, and projector of one grid code."""

    delta: float
    lattice: LatticeMatrix
    space: FockSpace
    l_s: float = L_S
    codewords: dict[str, QuantumState] = field(default_factory=dict)
    stabilizers: dict[str, Operator] = field(default_factory=dict)
    logicals: dict[str, Operator] = field(default_factory=dict)
    code_projector: Operator | None = None

    def envelope(self, inverse: bool = False) -> np.ndarray:
        sign = 1.0 if inverse else -1.0
        return np.diag(np.exp(sign * self.delta**2 * np.arange(self.space.n_max))).astype(complex)

    def finite_logical(self, which: str) -> Operator:
        """Envelope-transformed logical N L N^-1 (exact +1/-1 action on codewords)."""
        ideal = self.logicals[which].matrix
        return Operator(self.envelope() @ ideal @ self.envelope(inverse=True), OSC)


@dataclass
class SubspaceHierarchy:
    """Ordered 2-dimensional error subspaces from the cycle's gg Kraus operator."""

    levels: list[np.ndarray]  # each (n_max, 2), orthonormal columns
    eigenvalues: list[tuple[float, float]]

    def projector(self, level: int) -> np.ndarray:
        v = self.levels[level]
        return v @ v.conj().T


def _comb_codeword(mu: int, delta: float, lattice: LatticeMatrix, space: FockSpace) -> np.ndarray:
    """Envelope image of the ideal mu codeword as a weighted peak comb."""
    n_max = space.n_max
    a_x, a_z = lattice.alpha_x, lattice.alpha_z
    theta_r = np.angle(a_z) + np.pi / 2  # frame where the peak comb lies on the x axis
    t = np.tanh(delta**2)
    ch = np.cosh(delta**2)
    r_pk = -0.5 * np.log(t)  # peak x-variance = tanh(delta^2)/2
    sq0 = squeeze(space, r_pk).matrix[:, 0]
    psi = np.zeros(n_max, dtype=complex)
    dropped = 0.0
    for s in range(-24, 25):
        m = 2 * s + mu
        bp = (m * a_x / 2.0) * np.exp(-1j * theta_r)
        u, v = bp.real, bp.imag
        x0 = np.sqrt(2) * u
        w = np.exp(-t * x0**2 / 2.0)
        if w < 1e-9:
            continue
        center = (x0 / ch) / np.sqrt(2)
        if abs(center) ** 2 > 0.7 * n_max:
            # peak does not fit the truncated space; drop it cleanly
            dropped = max(dropped, w)
            continue
        psi += w * np.exp(1j * u * v) * (_displacement_matrix(n_max, center) @ sq0)
    if dropped > 1e-3:
        raise TruncationError(
            f"dropped comb peak of relative weight {dropped:.1e}; increase n_max"
        )
    rot = np.exp(1j * theta_r * np.arange(n_max))
    psi = rot * psi
    return psi / np.linalg.norm(psi)


def _lowdin_pair(zp: np.ndarray, zm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric orthogonalization of two nearly orthogonal unit vectors."""
    s = np.array([[1.0, np.vdot(zp, zm)], [np.vdot(zm, zp), 1.0]])
    w = np.linalg.inv(sqrtm(s))
    return w[0, 0] * zp + w[1, 0] * zm, w[0, 1] * zp + w[1, 1] * zm


def build_code(delta: float, lattice: LatticeMatrix, space: FockSpace) -> GridCode:
    """Construct codewords, stabilizers, logicals, and the code projector."""
    if not 0.2 <= delta <= 0.6:
        warnings.warn(
            f"delta = {delta} outside [0.2, 0.6]; truncation artifacts likely",
            TruncationWarning,
            stacklevel=2,
        )
    code = GridCode(delta=delta, lattice=lattice, space=space)
    zp = _comb_codeword(0, delta, lattice, space)
    zm = _comb_codeword(1, delta, lattice, space)
    td = space.trusted_dim
    for name, v in (("+Z", zp), ("-Z", zm)):
        guard = np.sum(np.abs(v[td:]) ** 2)
        if guard > 1e-4:
            raise TruncationError(f"{name} codeword guard-band population {guard:.1e} > 1e-4")

    def normed(v):
        return v / np.linalg.norm(v)

    cw = {
        "+Z": zp,
        "-Z": zm,
        "+X": normed(zp + zm),
        "-X": normed(zp - zm),
        "+Y": normed(zp + 1j * zm),
        "-Y": normed(zp - 1j * zm),
    }
    code.codewords = {k: QuantumState(v, OSC) for k, v in cw.items()}

    a_x, a_z = lattice.alpha_x, lattice.alpha_z
    s0x = displacement(space, a_x).matrix
    s0z = displacement(space, a_z).matrix
    env, env_i = code.envelope(), code.envelope(inverse=True)
    code.stabilizers = {
        "S0x": Operator(s0x, OSC, unitary=True),
        "S0z": Operator(s0z, OSC, unitary=True),
        "Sdx": Operator(env @ s0x @ env_i, OSC),
        "Sdz": Operator(env @ s0z @ env_i, OSC),
    }
    xl = displacement(space, a_x / 2).matrix
    zl = displacement(space, a_z / 2).matrix
    code.logicals = {
        "X": Operator(xl, OSC, unitary=True),
        "Z": Operator(zl, OSC, unitary=True),
        "Y": Operator(-1j * (zl @ xl), OSC, unitary=True),
    }
    v1, v2 = _lowdin_pair(zp, zm)
    proj = np.outer(v1, v1.conj()) + np.outer(v2, v2.conj())
    code.code_projector = Operator(proj, OSC, hermitian=True)
    return code


def logical_pauli(code: GridCode, which: str) -> Operator:
    """Ideal-code logical Pauli as a halved stabilizer displacement."""
    if which not in ("X", "Y", "Z"):
        raise ValueError(f"which must be X, Y, or Z, got {which!r}")
    return code.logicals[which]


def subspace_hierarchy(code: GridCode, k_gg: Operator, n_levels: int = 6) -> SubspaceHierarchy:
    """Group the eigenbasis of K_gg+ K_gg into 2-dim error subspaces.

    The eigenproblem is solved on the trusted Fock block: edge eigenvectors
    of the full truncated operator are meaningless and can hybridize with
    physical subspaces through accidental degeneracies.
    """
    td = code.space.trusted_dim
    m = k_gg.matrix
    h = (m.conj().T @ m)[:td, :td]
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if 2 * n_levels > td:
        raise ValueError("n_levels too large for the trusted subspace")
    levels, eigs = [], []
    for lev in range(n_levels):
        i = 2 * lev
        gap_in = abs(w[i] - w[i + 1])
        gap_out = abs(w[i + 1] - w[i + 2]) if i + 2 < len(w) else np.inf
        if gap_in > 10 * gap_out:
            raise PairingAmbiguous(
                f"level {lev}: in-pair gap {gap_in:.2e} vs gap to next {gap_out:.2e}"
            )
        block = np.zeros((code.space.n_max, 2), dtype=complex)
        block[:td, :] = v[:, i : i + 2]
        q, _ = np.linalg.qr(block)
        levels.append(q)
        eigs.append((float(w[i]), float(w[i + 1])))
    hier = SubspaceHierarchy(levels=levels, eigenvalues=eigs)
    f0 = subspace_fidelity(hier.projector(0), code.code_projector.matrix)
    if f0 < 0.99:
        warnings.warn(
            f"hierarchy level 0 matches the code projector to {f0:.4f} only",
            TruncationWarning,
            stacklevel=2,
        )
    return hier


def subspace_fidelity(p: np.ndarray, q: np.ndarray) -> float:
    """Mean overlap Tr[P Q]/2 of two rank-2 projectors."""
    return float(np.trace(p @ q).real / 2)


def knill_laflamme_check(code: GridCode, errors: list[Operator | np.ndarray]) -> np.ndarray:
    """Residuals || Pi E_i+ E_j Pi - c_ij Pi || for the best scalar c_ij."""
    proj = code.code_projector.matrix
    mats = [e.matrix if isinstance(e, Operator) else np.asarray(e) for e in errors]
    k = len(mats)
    res = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            m = proj @ mats[i].conj().T @ mats[j] @ proj
            c = np.trace(m) / 2.0
            res[i, j] = np.linalg.norm(m - c * proj)
    return res
