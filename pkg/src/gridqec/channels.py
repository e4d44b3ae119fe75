"""Quantum channels: physical noise models, Kraus application and sampling,
Pauli-transfer-matrix and average-fidelity metrics.

Oscillator noise per segment is the exact photon-loss Kraus family and the
exact number-dephasing Kraus family, composed with symmetric (Strang)
splitting; ancilla noise is generalized amplitude damping (finite thermal
population) composed with pure dephasing. Oscillator thermal excitation is
negligible in the regime of interest and not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, StepTooLarge, ZeroNormBranch
from .fock import COMPOSITE, OSC, QUBIT, FockSpace, Operator, QuantumState, _ladder

_KMAX = 10  # cap on Kraus family order per segment
_TAIL = 1e-12  # neglected-weight target for the trusted subspace


@dataclass(frozen=True)
class NoiseParams:
    """Physical error rates and system parameters.

    Times in microseconds, angular frequencies in rad/us, probabilities
    dimensionless. Leakage is phenomenological: an entry probability per
    QEC cycle and a geometric persistence with the given mean duration.
    """

    t1_c: float = 606.0
    t2_c: float = 980.0
    t1_t: float = 280.0
    t2e_t: float = 238.0
    nth_t: float = 0.043
    chi: float = 2 * np.pi * 0.0465
    chi_prime: float = 2 * np.pi * 5.8e-6
    kerr: float = -2 * np.pi * 4.8e-6
    readout_fid_g: float = 0.9997
    readout_fid_e: float = 0.9914
    leak_rate: float = 0.0
    leak_mean_duration: float = 17.2

    def __post_init__(self):
        for name in ("t1_c", "t2_c", "t1_t", "t2e_t"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("readout_fid_g", "readout_fid_e", "leak_rate", "nth_t"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.gamma_phi_c < -1e-12 or self.gamma_phi_t < -1e-12:
            raise ValueError("pure dephasing rate must be nonnegative (T2 <= 2 T1)")

    @property
    def gamma_phi_c(self) -> float:
        """Oscillator pure-dephasing rate (1/us)."""
        return 1.0 / self.t2_c - 0.5 / self.t1_c

    @property
    def gamma_phi_t(self) -> float:
        """Ancilla pure-dephasing rate from the echo coherence time (1/us)."""
        return 1.0 / self.t2e_t - 0.5 / self.t1_t


@dataclass
class KrausSet:
    """Labeled Kraus operators of one channel."""

    labels: list[str]
    operators: list[np.ndarray]
    trace_preserving: bool = True
    space_tag: str = OSC

    def __post_init__(self):
        self.operators = [np.asarray(k, dtype=complex) for k in self.operators]
        if len(self.labels) != len(self.operators):
            raise DimensionMismatch("labels and operators must match")
        dims = {k.shape for k in self.operators}
        if len(dims) != 1:
            raise DimensionMismatch(f"inconsistent Kraus shapes {dims}")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_defect(self, trusted_dim: int | None = None) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        d = trusted_dim or self.dim
        return float(np.linalg.norm((s - np.eye(self.dim))[:d, :d]))

    def compose(self, other: "KrausSet", sep: str = "") -> "KrausSet":
        """self after other: K = K_self K_other, labels self+sep+other."""
        labels, ops = [], []
        for ls, ks in zip(self.labels, self.operators):
            for lo, ko in zip(other.labels, other.operators):
                labels.append(f"{ls}{sep}{lo}")
                ops.append(ks @ ko)
        return KrausSet(labels, ops, self.trace_preserving and other.trace_preserving, self.space_tag)


@dataclass
class PauliTransferMatrix:
    """4x4 real channel representation R_ij = Tr(sigma_i E[sigma_j])/2."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (4, 4):
            raise DimensionMismatch("PTM must be 4x4")
        if abs(e[0, 0] - 1.0) > 1e-9:
            raise ValueError(f"R_II = {e[0,0]} != 1 (channel not trace preserving)")
        if np.any(np.abs(e) > 1.0 + 1e-9):
            raise ValueError("PTM entries must lie in [-1, 1]")
        self.entries = e

    def __matmul__(self, other: "PauliTransferMatrix") -> "PauliTransferMatrix":
        return PauliTransferMatrix(self.entries @ other.entries)


# ---------------------------------------------------------------------------
# oscillator noise


@lru_cache(maxsize=512)
def _loss_family(n_max: int, gamma_t: float) -> tuple[np.ndarray, ...]:
    """Exact photon-loss Kraus family K_k = eta^(n/2) a^k sqrt((1-eta)^k / k!)."""
    if gamma_t == 0:
        return (np.eye(n_max, dtype=complex),)
    eta = math.exp(-gamma_t)
    n = np.arange(n_max)
    damp = np.power(eta, n / 2.0)
    a = _ladder(n_max)
    out = []
    ak = np.eye(n_max, dtype=complex)
    for k in range(_KMAX + 1):
        if k > 0:
            ak = a @ ak
        coef = math.sqrt((1 - eta) ** k / math.factorial(k))
        out.append(coef * (damp[:, None] * ak))
        # Poisson-like tail bound on the trusted subspace
        lam = (1 - eta) * n_max
        if k >= 1 and (lam**(k + 1)) / math.factorial(k + 1) < _TAIL:
            break
    return tuple(out)


@lru_cache(maxsize=512)
def _dephasing_family(n_max: int, s: float) -> tuple[np.ndarray, ...]:
    """Exact number-dephasing Kraus family K_j = e^(-s n^2/2) (s n^2)^(j/2)/sqrt(j!)."""
    if s == 0:
        return (np.eye(n_max, dtype=complex),)
    n = np.arange(n_max, dtype=float)
    out = []
    for j in range(_KMAX + 1):
        diag = np.exp(-s * n**2 / 2.0) * (s * n**2) ** (j / 2.0) / math.sqrt(math.factorial(j))
        out.append(np.diag(diag).astype(complex))
        lam = s * n_max**2
        if j >= 1 and (lam**(j + 1)) / math.factorial(j + 1) < _TAIL:
            break
    return tuple(out)


def loss_dephasing_channel(params: NoiseParams, duration: float, space: FockSpace) -> KrausSet:
    """Oscillator loss + dephasing over one segment, Strang-split.

    deph(t/2) . loss(t) . deph(t/2); each factor is its exact channel, so the
    composition is second-order accurate in the segment duration.
    """
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    if duration * space.n_max / params.t1_c > 0.5:
        raise StepTooLarge(
            f"loss step duration*n_max/t1_c = {duration * space.n_max / params.t1_c:.2f} > 0.5"
        )
    if duration == 0:
        return KrausSet(["0"], [np.eye(space.n_max, dtype=complex)], True, OSC)
    loss = _loss_family(space.n_max, duration / params.t1_c)
    deph = _dephasing_family(space.n_max, params.gamma_phi_c * duration / 2.0)
    labels, ops = [], []
    for i, d2 in enumerate(deph):
        for k, l in enumerate(loss):
            for j, d1 in enumerate(deph):
                op = d2 @ l @ d1
                # prune negligible branches to keep sampling cheap
                if i + k + j > 0 and np.max(np.abs(op)) < 1e-9:
                    continue
                labels.append(f"d{i}l{k}d{j}")
                ops.append(op)
    return KrausSet(labels, ops, True, OSC)


def ancilla_channel(params: NoiseParams, duration: float) -> KrausSet:
    """Two-level amplitude damping with thermal excitation, plus pure dephasing."""
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    if duration / params.t1_t > 0.5:
        raise StepTooLarge("ancilla step exceeds half a lifetime")
    if duration == 0:
        return KrausSet(["0"], [np.eye(2, dtype=complex)], True, QUBIT)
    g = 1 - math.exp(-duration / params.t1_t)
    p = 1 - params.nth_t
    gad = [
        ("keep", math.sqrt(p) * np.diag([1, math.sqrt(1 - g)]).astype(complex)),
        ("decay", math.sqrt(p * g) * np.array([[0, 1], [0, 0]], dtype=complex)),
        ("keep_h", math.sqrt(1 - p) * np.diag([math.sqrt(1 - g), 1]).astype(complex)),
        ("excite", math.sqrt((1 - p) * g) * np.array([[0, 0], [1, 0]], dtype=complex)),
    ]
    q = (1 - math.exp(-params.gamma_phi_t * duration)) / 2.0
    deph = [("i", math.sqrt(1 - q) * np.eye(2, dtype=complex)),
            ("z", math.sqrt(q) * np.diag([1, -1]).astype(complex))]
    labels, ops = [], []
    for ld, kd in deph:
        for lg, kg in gad:
            labels.append(f"{lg}.{ld}")
            ops.append(kd @ kg)
    return KrausSet(labels, ops, True, QUBIT)


# ---------------------------------------------------------------------------
# application and sampling


def apply_channel(state: QuantumState, ks: KrausSet) -> QuantumState:
    """Deterministic channel application rho -> sum K rho K+."""
    rho = state.density()
    if rho.shape[0] != ks.dim:
        raise DimensionMismatch(f"state dim {rho.shape[0]} vs Kraus dim {ks.dim}")
    out = np.zeros_like(rho)
    for k in ks.operators:
        out += k @ rho @ k.conj().T
    if ks.trace_preserving:
        # renormalize away truncation dust so the output is a valid state;
        # the trace-preservation contract is tested on the raw Kraus sums
        out = out / np.trace(out).real
    out = 0.5 * (out + out.conj().T)
    return QuantumState(out, state.space_tag)


def sample_kraus(
    state: QuantumState | np.ndarray, ks: KrausSet, rng: np.random.Generator
) -> tuple[str, np.ndarray]:
    """Sample one Kraus branch of a pure state; returns (label, normalized vector)."""
    psi = state.data if isinstance(state, QuantumState) else np.asarray(state)
    if psi.ndim != 1:
        raise DimensionMismatch("sample_kraus requires a pure state")
    return _sample_kraus_vec(psi, ks.labels, ks.operators, rng)


def _sample_kraus_vec(psi, labels, operators, rng):
    r = rng.random()
    acc = 0.0
    last = None
    for lab, k in zip(labels, operators):
        phi = k @ psi
        prob = np.vdot(phi, phi).real
        acc += prob
        last = (lab, phi, prob)
        if r < acc:
            break
    lab, phi, prob = last
    if acc < 1e-14:
        raise ZeroNormBranch("all Kraus branch probabilities vanish")
    if prob <= 0:
        raise ZeroNormBranch(f"selected branch {lab} has zero probability")
    return lab, phi / math.sqrt(prob)


# ---------------------------------------------------------------------------
# logical-channel metrics

_PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_EIGENSTATES = {
    "+X": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-X": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "+Y": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-Y": np.array([1, -1j], dtype=complex) / np.sqrt(2),
    "+Z": np.array([1, 0], dtype=complex),
    "-Z": np.array([0, 1], dtype=complex),
}


def ptm_of_logical_channel(channel) -> PauliTransferMatrix:
    """PTM of a qubit channel given as a callable rho (2x2) -> rho' (2x2)."""
    names = ["I", "X", "Y", "Z"]
    r = np.zeros((4, 4))
    for j, nj in enumerate(names):
        out = np.asarray(channel(_PAULIS[nj]), dtype=complex)
        for i, ni in enumerate(names):
            r[i, j] = np.trace(_PAULIS[ni] @ out).real / 2.0
    return PauliTransferMatrix(r)


def six_state_fidelity(channel) -> float:
    """Average fidelity to the identity from the six Pauli eigenstates."""
    total = 0.0
    for p in ("X", "Y", "Z"):
        plus = np.asarray(channel(np.outer(_EIGENSTATES[f"+{p}"], _EIGENSTATES[f"+{p}"].conj())))
        minus = np.asarray(channel(np.outer(_EIGENSTATES[f"-{p}"], _EIGENSTATES[f"-{p}"].conj())))
        total += np.trace(_PAULIS[p] @ plus).real - np.trace(_PAULIS[p] @ minus).real
    return total / 12.0 + 0.5


def avg_channel_fidelity(ptm: PauliTransferMatrix, target: PauliTransferMatrix | None = None) -> float:
    """Average channel fidelity (2 F_e + 1)/3 with F_e = Tr(R_U^T R_E)/4."""
    r_u = np.eye(4) if target is None else target.entries
    f_e = np.trace(r_u.T @ ptm.entries) / 4.0
    return float((2 * f_e + 1) / 3.0)


def depolarization_rate(lifetimes: dict[str, float]) -> float:
    """Effective depolarization rate (1/time) of a qubit encoding.

    Accepts either {"t1": ..., "t2": ...} for amplitude-damping plus
    dephasing qubits, or {"tx": ..., "ty": ..., "tz": ...} for a Pauli
    channel; units follow the inputs.
    """
    keys = {k.lower() for k in lifetimes}
    lt = {k.lower(): v for k, v in lifetimes.items()}
    if any(v <= 0 for v in lt.values()):
        raise ValueError("lifetimes must be positive")
    if keys == {"t1", "t2"}:
        return (1.0 / lt["t1"] + 2.0 / lt["t2"]) / 3.0
    if keys == {"tx", "ty", "tz"}:
        return (1.0 / lt["tx"] + 1.0 / lt["ty"] + 1.0 / lt["tz"]) / 3.0
    raise ValueError(f"unrecognized lifetime set {sorted(keys)}")


def coherence_gain(gamma_ref: float, gamma_corrected: float) -> float:
    """G = Gamma_ref / Gamma_corrected; G > 1 means the memory beats break-even."""
    return gamma_ref / gamma_corrected


def pauli_channel_fidelity(t: float, gamma_x: float, gamma_y: float, gamma_z: float) -> float:
    """Average fidelity of a Pauli channel after time t."""
    return (math.exp(-gamma_x * t) + math.exp(-gamma_y * t) + math.exp(-gamma_z * t)) / 6.0 + 0.5


def damping_qubit_fidelity(t: float, gamma_1: float, gamma_2: float) -> float:
    """Average fidelity of an amplitude-damping + dephasing qubit after time t."""
    return math.exp(-gamma_1 * t) / 6.0 + math.exp(-gamma_2 * t) / 3.0 + 0.5
