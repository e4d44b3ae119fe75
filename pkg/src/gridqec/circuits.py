"""Parametrized echoed-conditional-displacement circuits.

A circuit is layers of qubit rotation R(phi, theta) followed by ECD(beta),
layer 1 acting first. ECD gates compile to displacement / dispersive-wait /
echo-pulse primitives; pulse envelopes are abstracted to zero-width gates
whose durations only matter as noise exposure windows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, OutOfRange, TruncationWarning
from .fock import (
    COMPOSITE,
    FockSpace,
    Operator,
    _displacement_matrix,
    qubit_rotation,
)
from .gridcode import L_S, GridCode

# primitive pulse durations, ns
T_ROTATION = 32.0
T_DISPLACEMENT = 40.0


@dataclass
class CircuitParams:
    """Layered ECD-circuit parameters."""

    betas: np.ndarray
    phis: np.ndarray
    thetas: np.ndarray

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=complex).ravel()
        self.phis = np.asarray(self.phis, dtype=float).ravel()
        self.thetas = np.asarray(self.thetas, dtype=float).ravel()
        n = self.betas.size
        if self.phis.size != n or self.thetas.size != n:
            raise DimensionMismatch("betas, phis, thetas must have equal length")
        if np.any(np.abs(self.betas) > 2 * L_S):
            raise OutOfRange("conditional displacement amplitude exceeds 2*l_s")

    @property
    def n_layers(self) -> int:
        return self.betas.size

    def to_json(self) -> str:
        return json.dumps(
            {
                "betas": [[b.real, b.imag] for b in self.betas],
                "phis": list(self.phis),
                "thetas": list(self.thetas),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CircuitParams":
        d = json.loads(text)
        betas = [complex(re, im) for re, im in d["betas"]]
        return cls(betas, d["phis"], d["thetas"])

    def copy(self) -> "CircuitParams":
        return CircuitParams(self.betas.copy(), self.phis.copy(), self.thetas.copy())


@dataclass(frozen=True)
class EcdCalibration:
    """Empirical model of the compiled ECD gate.

    tau(alpha, beta) = beta (p0 + p1/(2 alpha)) - p2 gives the dispersive
    wait per gate half; the compiled gate also imprints a qubit phase
    xi |beta|^2. The ideal dispersive model is (p0, p1, p2) = (0, 1/chi, 0).
    """

    p0: float = 0.0
    p1: float = 1.0 / (2 * np.pi * 0.0465)
    p2: float = 0.0
    xi: float = 0.0
    alpha_max: float = 26.0

    def __post_init__(self):
        if self.p1 <= 0:
            raise ValueError("p1 must be positive")

    @classmethod
    def ideal(cls, chi: float) -> "EcdCalibration":
        return cls(p0=0.0, p1=1.0 / chi, p2=0.0, xi=0.0)

    def tau(self, alpha: float, beta_mag: float) -> float:
        """Wait time (us) per gate half for the requested |beta|."""
        return beta_mag * (self.p0 + self.p1 / (2 * alpha)) - self.p2

    def qubit_phase(self, beta: complex) -> float:
        return self.xi * abs(beta) ** 2


@dataclass
class GateElement:
    kind: str  # rotation | displacement | conditional_rotation | virtual_rotation
    duration_ns: float
    phi: float = 0.0
    theta: float = 0.0
    alpha: complex = 0.0


@dataclass
class GateSequence:
    """Ordered primitive gates; total duration is the sum of parts."""

    elements: list[GateElement] = field(default_factory=list)
    induced_qubit_phase: float = 0.0  # xi |beta|^2 bookkeeping of compiled ECDs

    @property
    def duration_ns(self) -> float:
        return sum(e.duration_ns for e in self.elements)

    def unitary(self, space: FockSpace, chi: float, include_qubit_phase: bool = True) -> Operator:
        """Ideal-model product of the sequence on the composite space."""
        n = space.n_max
        u = np.eye(2 * n, dtype=complex)
        for e in self.elements:
            if e.kind == "rotation":
                g = np.kron(qubit_rotation(e.phi, e.theta), np.eye(n))
            elif e.kind == "displacement":
                g = np.kron(np.eye(2), _displacement_matrix(n, e.alpha))
            elif e.kind == "conditional_rotation":
                g = cr_gate(e.theta, space).matrix
            elif e.kind == "virtual_rotation":
                g = np.kron(np.eye(2), np.diag(np.exp(1j * e.theta * np.arange(n))))
            elif e.kind == "qubit_phase":
                if not include_qubit_phase:
                    continue
                g = np.kron(np.diag(np.exp(-0.5j * e.theta * np.array([1, -1]))), np.eye(n))
            else:
                raise ValueError(f"unknown gate kind {e.kind!r}")
            u = g @ u
        return Operator(u, COMPOSITE)


def ecd_gate(beta: complex, space: FockSpace) -> Operator:
    """Echoed conditional displacement sigma_x D(sigma_z beta / 2)."""
    n = space.n_max
    if abs(beta / 2) ** 2 > 0.5 * n:
        import warnings

        warnings.warn("ECD amplitude exceeds the truncation budget", TruncationWarning, stacklevel=2)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    d = _displacement_matrix(n, beta / 2) if beta != 0 else np.eye(n, dtype=complex)
    m[:n, n:] = d.conj().T
    m[n:, :n] = d
    return Operator(m, COMPOSITE, unitary=True)


def cr_gate(theta: float, space: FockSpace) -> Operator:
    """Conditional rotation exp(i theta sigma_z a+ a)."""
    n = np.arange(space.n_max)
    diag = np.concatenate([np.exp(1j * theta * n), np.exp(-1j * theta * n)])
    return Operator(np.diag(diag), COMPOSITE, unitary=True)


def ecd_beta_ideal(alpha: float, tau: float, chi: float) -> float:
    """|beta| produced by out-and-back halves of wait tau under the ideal model."""
    return 2 * alpha * np.sin(chi * tau)


def compile_ecd(beta: complex, alpha: float, cal: EcdCalibration, chi: float) -> GateSequence:
    """Compile ECD(beta) into displacements, dispersive waits, and an echo pulse.

    Layout: displace out by alpha, wait tau, displace back; echo pi pulse;
    mirrored half. Return amplitudes are chosen so the ideal-model product
    equals ECD(beta) (up to the calibrated xi |beta|^2 qubit phase).
    """
    if not 0 < alpha <= cal.alpha_max:
        raise OutOfRange(f"alpha = {alpha} outside (0, {cal.alpha_max}]")
    b = abs(beta)
    tau_us = cal.tau(alpha, b)
    if tau_us < 0:
        raise OutOfRange("calibrated wait time is negative for these parameters")
    # conditional displacement accumulates orthogonally to the excursion
    phi_dir = np.angle(beta) + np.pi / 2 if beta != 0 else np.pi / 2
    e = np.exp(1j * phi_dir)
    th = chi * tau_us / 2.0  # branch rotation per wait
    # branch geometry: out, rotate, return to +-i alpha sin(th); echo; mirror
    d_ret1 = -alpha * np.cos(th)
    d_out2 = -alpha
    d_ret2 = alpha * (np.cos(th) - np.sin(th) ** 2)
    # rescale the whole excursion so the net amplitude matches |beta| exactly
    net = 2 * alpha * np.sin(th) * (1 + np.cos(th))
    scale = b / net if net > 0 else 0.0
    # constant geometric phase of each branch loop (area term); cancelled so
    # the ideal-model product is exactly ECD(beta)
    a_eff = scale * alpha
    phi_geo = a_eff**2 * np.sin(th) * (1 + np.cos(th)) * (np.cos(th) - 1 - np.sin(th) ** 2)
    theta_b = cal.qubit_phase(beta) - 2 * phi_geo
    seq = GateSequence(
        elements=[
            GateElement("displacement", T_DISPLACEMENT, alpha=scale * alpha * e),
            GateElement("conditional_rotation", tau_us * 1e3, theta=-chi * tau_us / 2.0),
            GateElement("displacement", T_DISPLACEMENT, alpha=scale * d_ret1 * e),
            GateElement("rotation", T_ROTATION, phi=0.0, theta=np.pi),
            GateElement("displacement", T_DISPLACEMENT, alpha=scale * d_out2 * e),
            GateElement("conditional_rotation", tau_us * 1e3, theta=-chi * tau_us / 2.0),
            GateElement("displacement", T_DISPLACEMENT, alpha=scale * d_ret2 * e),
        ],
        induced_qubit_phase=cal.qubit_phase(beta),
    )
    if theta_b:
        seq.elements.append(GateElement("qubit_phase", 0.0, theta=theta_b))
    return seq


def phase_correction(params: CircuitParams, cal: EcdCalibration) -> CircuitParams:
    """Absorb the compiled-gate qubit phases into the rotation phases.

    phi_t -> phi_t - sum_{tau<t} (-1)^(t-tau) Theta[beta_tau], applied for t > 1,
    with Theta[beta] = xi |beta|^2.
    """
    out = params.copy()
    thetas_beta = np.array([cal.qubit_phase(b) for b in params.betas])
    for t in range(1, params.n_layers):  # zero-based t>=1 is layer index t+1>1
        corr = 0.0
        for s in range(t):
            corr += (-1.0) ** (t - s) * thetas_beta[s]
        out.phis[t] = out.phis[t] - corr
    return out


def build_circuit_unitary(
    params: CircuitParams, space: FockSpace, final_displacement: bool = False
) -> Operator:
    """Product of circuit layers; layer 1 acts first.

    With final_displacement=True the last layer's ECD(beta_T) is replaced by
    the simple displacement D(beta_T / 2), valid when the ancilla disentangles.
    """
    n = space.n_max
    u = np.eye(2 * n, dtype=complex)
    last = params.n_layers - 1
    for i in range(params.n_layers):
        r = np.kron(qubit_rotation(params.phis[i], params.thetas[i]), np.eye(n))
        u = r @ u
        b = params.betas[i]
        if i == last and final_displacement:
            if b != 0:
                u = np.kron(np.eye(2), _displacement_matrix(n, b / 2.0)) @ u
        else:
            u = ecd_gate(b, space).matrix @ u
    return Operator(u, COMPOSITE)


def sbs_nominal_params(code: GridCode, quadrature: str = "X", reset_axis: tuple[float, float] | None = None) -> CircuitParams:
    """Nominal 4-layer cycle parameters: betas l_s-scaled (i delta^2/2, 1, i delta^2/2, 0).

    The big amplitude follows the stabilizer direction of the requested
    quadrature; the small trimming amplitudes are rotated 90 degrees from it.
    reset_axis sets the layer-4 rotation (phi, theta) that selects the
    measurement axis; the default preferentially returns g.
    """
    if quadrature not in ("X", "Z"):
        raise ValueError("quadrature must be X or Z")
    big = code.lattice.alpha_x if quadrature == "X" else code.lattice.alpha_z
    small = 1j * code.delta**2 * big / 2.0
    if reset_axis is None:
        reset_axis = (np.pi / 2, -np.pi / 2)
    return CircuitParams(
        betas=[small, big, small, 0.0],
        phis=[np.pi / 2, 0.0, 0.0, reset_axis[0]],
        thetas=[np.pi / 2, -np.pi / 2, np.pi / 2, reset_axis[1]],
    )


def compile_circuit(
    params: CircuitParams,
    cal: EcdCalibration,
    chi: float,
    alphas: float | np.ndarray = 10.0,
    correct_phases: bool = True,
) -> GateSequence:
    """Compile a full parametrized circuit into a primitive gate sequence."""
    if np.isscalar(alphas):
        alphas = np.full(params.n_layers, float(alphas))
    p = phase_correction(params, cal) if correct_phases else params.copy()
    seq = GateSequence()
    for i in range(params.n_layers):
        seq.elements.append(
            GateElement("rotation", T_ROTATION, phi=p.phis[i], theta=p.thetas[i])
        )
        if p.betas[i] != 0:
            sub = compile_ecd(p.betas[i], alphas[i], cal, chi)
            seq.elements.extend(sub.elements)
    return seq
