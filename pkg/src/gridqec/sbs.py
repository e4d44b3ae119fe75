"""The QEC cycle: error-correcting dissipation, trajectories, and readout.

One full cycle is two half-cycles, position quadrature first, then momentum.
Each half-cycle runs the four-layer trimming circuit on the ancilla+oscillator,
measures and resets the ancilla, and compensates the dispersive-rotation
feedback. The analytic rank-2 Kraus pair of a half-cycle is exactly the
(g, e) block column of the noiseless circuit unitary, so Kraus completeness
holds at machine precision by construction.

Two simulation levels:
  L1 - analytic half-cycle Kraus sampling with lumped noise per half-cycle.
  L2 - gate-compiled half-cycle with per-segment noise, readout
       misclassification with feedback back-action, and optional leakage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import CircuitParams, build_circuit_unitary, sbs_nominal_params
from .channels import KrausSet, NoiseParams, _sample_kraus_vec, ancilla_channel, loss_dephasing_channel
from .errors import ConfigMismatch, OutOfRange, TruncationError, ZeroNormBranch
from .fock import COMPOSITE, OSC, FockSpace, Operator, QuantumState, qubit_rotation, trace_out_qubit
from .gridcode import GridCode

# Half-cycle timing, ns. Bookkeeping paddings surround the four circuit
# layers, the measurement-based reset, the feedback rotation update, and the
# idle section; the default budget totals 4924 ns per half-cycle.
LAYER_DURATIONS_NS = (502.0, 708.0, 262.0, 76.0)
PAD_ENTER_CYCLE = 24.0
PAD_ENTER_SBS = 24.0
PAD_EXIT_SBS = 24.0
PAD_ENTER_RESET = 24.0
PAD_EXIT_RESET = 24.0
PAD_EXIT_CYCLE = 24.0


@dataclass
class CycleConfig:
    """Durations, feedback angles, and circuit parameters of a QEC cycle."""

    code: GridCode
    t_sbs: float = sum(LAYER_DURATIONS_NS)  # ns, circuit layers only
    t_reset: float = 2332.0  # ns
    t_vr: float = 448.0  # ns
    t_idle: float = 452.0  # ns
    theta_g: float = 0.0  # rad, feedback rotation for outcome g
    theta_e: float = 0.0
    theta_f: float = 0.0
    reset_axis_params: tuple[float, float] = (np.pi / 2, -np.pi / 2)
    params_x: CircuitParams | None = None
    params_z: CircuitParams | None = None
    layer_fractions: tuple[float, ...] = tuple(
        d / sum(LAYER_DURATIONS_NS) for d in LAYER_DURATIONS_NS
    )

    def __post_init__(self):
        for name in ("t_sbs", "t_reset", "t_vr", "t_idle"):
            if getattr(self, name) < 0:
                raise ConfigMismatch(f"{name} must be nonnegative")
        if self.params_x is None:
            self.params_x = sbs_nominal_params(self.code, "X", self.reset_axis_params)
        if self.params_z is None:
            self.params_z = sbs_nominal_params(self.code, "Z", self.reset_axis_params)

    @classmethod
    def nominal(cls, code: GridCode, noise: NoiseParams | None = None, **kw) -> "CycleConfig":
        """Table-level defaults with dispersive-model feedback angles."""
        chi = (noise or NoiseParams()).chi  # rad/us
        cfg = cls(code=code, **kw)
        t_g = (cfg.t_vr + cfg.t_idle + cfg.t_reset) * 1e-3  # us
        t_e = (cfg.t_vr + cfg.t_idle - cfg.t_reset) * 1e-3
        cfg.theta_g = chi * t_g / 2.0
        cfg.theta_e = chi * t_e / 2.0
        cfg.theta_f = cfg.theta_e
        return cfg

    @property
    def half_cycle_ns(self) -> float:
        return (
            PAD_ENTER_CYCLE
            + PAD_ENTER_SBS
            + self.t_sbs
            + PAD_EXIT_SBS
            + PAD_ENTER_RESET
            + self.t_reset
            + PAD_EXIT_RESET
            + self.t_vr
            + self.t_idle
            + PAD_EXIT_CYCLE
        )

    @property
    def cycle_us(self) -> float:
        return 2 * self.half_cycle_ns * 1e-3

    def layer_durations_ns(self) -> tuple[float, ...]:
        return tuple(f * self.t_sbs for f in self.layer_fractions)


@dataclass
class TrajectoryRecord:
    """Outcome record of one simulated QEC shot."""

    syndromes: str  # one character per half-cycle, from {g, e, f}
    pauli_frame: tuple[int, int]  # parities of accumulated (X_L, Z_L) flips
    final_state: QuantumState
    logical_outcome: int | None = None
    expectations: np.ndarray | None = None  # recorded observable trace
    record_stride: int = 1

    @property
    def n_half_cycles(self) -> int:
        return len(self.syndromes)

    def frame_sign(self, pauli: str) -> int:
        return _frame_sign(self.pauli_frame[0], self.pauli_frame[1], pauli)


def _frame_sign(fx: int, fz: int, pauli: str) -> int:
    """Sign relating a measured ideal Pauli to the frame-corrected one."""
    if pauli == "X":
        return -1 if fz % 2 else 1
    if pauli == "Z":
        return -1 if fx % 2 else 1
    if pauli == "Y":
        return -1 if (fx + fz) % 2 else 1
    raise ValueError(f"pauli must be X, Y, or Z, got {pauli!r}")


@dataclass
class SyndromeDataset:
    """Shots x half-cycles outcome matrix plus generation metadata."""

    outcomes: np.ndarray  # dtype '<U1', values in {g, e, f}
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.outcomes = np.asarray(self.outcomes)
        if self.outcomes.ndim != 2:
            raise ValueError("outcomes must be a 2-d shots x half-cycles array")
        bad = set(np.unique(self.outcomes)) - {"g", "e", "f"}
        if bad:
            raise ValueError(f"invalid outcome characters {bad}")

    @property
    def n_shots(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_half_cycles(self) -> int:
        return self.outcomes.shape[1]

    def save(self, path: str) -> None:
        """One line of g/e/f per shot, with a JSON metadata sidecar."""
        with open(path, "w") as f:
            for row in self.outcomes:
                f.write("".join(row) + "\n")
        with open(path + ".meta.json", "w") as f:
            json.dump(self.metadata, f, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "SyndromeDataset":
        with open(path) as f:
            rows = [list(line.strip()) for line in f if line.strip()]
        meta = {}
        try:
            with open(path + ".meta.json") as f:
                meta = json.load(f)
        except FileNotFoundError:
            pass
        return cls(np.array(rows, dtype="<U1"), meta)


# ---------------------------------------------------------------------------
# analytic Kraus operators


def sbs_kraus(code: GridCode, quadrature: str) -> KrausSet:
    """Rank-2 Kraus pair (g, e) of one noiseless half-cycle.

    Built as the measured-ancilla blocks of the exact four-layer circuit
    unitary, which matches the closed trigonometric forms in cos/sin of the
    quadratures on the trusted subspace and is exactly complete.
    """
    params = sbs_nominal_params(code, quadrature)
    u = build_circuit_unitary(params, code.space, final_displacement=True).matrix
    n = code.space.n_max
    k_g = u[:n, :n]
    k_e = u[n:, :n]
    ks = KrausSet(["g", "e"], [k_g, k_e], True, OSC)
    defect = ks.completeness_defect(code.space.trusted_dim)
    if defect > 1e-6:
        raise TruncationError(f"half-cycle Kraus completeness defect {defect:.1e}")
    return ks


def rank4_cycle(code: GridCode) -> KrausSet:
    """Rank-4 Kraus set of a full cycle: K_ab = K_a^Z K_b^X, labels 'ab'."""
    kx = sbs_kraus(code, "X")
    kz = sbs_kraus(code, "Z")
    out = kz.compose(kx)
    defect = out.completeness_defect(code.space.trusted_dim)
    if defect > 1e-6:
        raise TruncationError(f"rank-4 completeness defect {defect:.1e}")
    return out


def sbs_kraus_trig(code: GridCode, quadrature: str) -> KrausSet:
    """Closed-form rank-2 Kraus pair as matrix functions of x and p.

    K_g = c cos(k u) cos(k d^2 v) + s cos(k v) - i s sin(k u) sin(k v)
    style forms with k = sqrt(pi), (u, v) = (x, p) for the position
    half-cycle and (-p, x) for the momentum one. Provided as an independent
    cross-check of the circuit-derived operators; truncation limits its
    completeness, so the circuit route is the production path.
    """
    from .fock import hermitian_function, make_oscillator_ops

    ops = make_oscillator_ops(code.space)
    x, p = ops["x"], ops["p"]
    if quadrature == "X":
        small, big = x, p
    elif quadrature == "Z":
        small, big = Operator(-p.matrix, OSC, hermitian=True), x
    else:
        raise ValueError("quadrature must be X or Z")
    d2 = code.delta**2
    rt = np.sqrt(np.pi)
    cos_b = hermitian_function(big, lambda w: np.cos(rt * w)).matrix
    sin_b = hermitian_function(big, lambda w: np.sin(rt * w)).matrix
    cos_s = hermitian_function(small, lambda w: np.cos(rt * d2 * w)).matrix
    sin_s = hermitian_function(small, lambda w: np.sin(rt * d2 * w)).matrix
    c = np.cos(np.pi * d2 / 2)
    s = np.sin(np.pi * d2 / 2)
    k_g = c * cos_s @ cos_b + s * cos_b - 1j * s * sin_s @ sin_b
    k_e = 1j * c * sin_s @ cos_b - s * cos_s @ sin_b - c * sin_b
    return KrausSet(["g", "e"], [k_g, k_e], True, OSC)


# ---------------------------------------------------------------------------
# phase estimation, injection, feedback


def phase_estimation_readout(
    state: QuantumState | np.ndarray, code: GridCode, pauli: str, rng: np.random.Generator
) -> int:
    """One-bit phase estimation of an ideal-code logical Pauli: returns +-1."""
    p_plus = phase_estimation_prob(state, code, pauli)
    return 1 if rng.random() < p_plus else -1


def phase_estimation_prob(state: QuantumState | np.ndarray, code: GridCode, pauli: str) -> float:
    """P(+1) = (1 + Re<P_ideal>)/2 on the oscillator state."""
    rho = _oscillator_density(state, code.space)
    expect = np.trace(code.logicals[pauli].matrix @ rho).real
    return float(np.clip((1.0 + expect) / 2.0, 0.0, 1.0))


def inject_displacement(state: QuantumState | np.ndarray, epsilon: complex, space: FockSpace) -> QuantumState:
    """Apply D(epsilon) to the oscillator factor of a state."""
    from .fock import _displacement_matrix

    d = _displacement_matrix(space.n_max, epsilon) if epsilon != 0 else np.eye(space.n_max)
    psi = state.data if isinstance(state, QuantumState) else np.asarray(state)
    tag = state.space_tag if isinstance(state, QuantumState) else OSC
    if psi.ndim == 1:
        if psi.size == 2 * space.n_max:
            d = np.kron(np.eye(2), d)
        out = d @ psi
        return QuantumState(out / np.linalg.norm(out), tag)
    if psi.shape[0] == 2 * space.n_max:
        d = np.kron(np.eye(2), d)
    rho = d @ psi @ d.conj().T
    return QuantumState(0.5 * (rho + rho.conj().T), tag)


def expected_feedback_rounds(p_y: float, y: int) -> float:
    """Expected rounds of verification feedback: (p_y^-Y - 1)/(1 - p_y)."""
    if not 0 < p_y <= 1:
        raise OutOfRange("p_y must be in (0, 1]")
    if y < 1:
        raise OutOfRange("y must be >= 1")
    if p_y == 1.0:
        return float(y)
    return (p_y ** (-y) - 1.0) / (1.0 - p_y)


def _oscillator_density(state, space: FockSpace) -> np.ndarray:
    if isinstance(state, QuantumState):
        data = state.data
    else:
        data = np.asarray(state)
    if data.ndim == 1:
        rho = np.outer(data, data.conj())
    else:
        rho = data
    if rho.shape[0] == 2 * space.n_max:
        rho = trace_out_qubit(rho)
    return rho


# ---------------------------------------------------------------------------
# trajectory engine


class _HalfCycleOps:
    """Cached dense operators for one (config, noise, level) combination."""

    def __init__(self, config: CycleConfig, noise: NoiseParams | None, level: str):
        code = config.code
        space = code.space
        n = space.n_max
        self.n = n
        self.level = level
        self.noise = noise
        self.config = config
        nse = noise or NoiseParams()
        self.rot_err = {
            "ge": np.exp(1j * (config.theta_g - config.theta_e) * np.arange(n)),
            "eg": np.exp(-1j * (config.theta_g - config.theta_e) * np.arange(n)),
        }
        if level == "L1":
            self.kraus = {q: sbs_kraus(code, q) for q in ("X", "Z")}
            if noise is not None:
                t_half = config.half_cycle_ns * 1e-3
                self.lumped = loss_dephasing_channel(noise, t_half, space)
            else:
                self.lumped = None
            return
        # L2: per-layer gate list [(unitary, duration_ns)]
        self.gates = {}
        for quad, params in (("X", config.params_x), ("Z", config.params_z)):
            layers = []
            durs = config.layer_durations_ns()
            for i in range(params.n_layers):
                r = np.kron(qubit_rotation(params.phis[i], params.thetas[i]), np.eye(n))
                b = params.betas[i]
                if i == params.n_layers - 1:
                    from .fock import _displacement_matrix

                    g = r if b == 0 else np.kron(np.eye(2), _displacement_matrix(n, b / 2)) @ r
                else:
                    from .circuits import ecd_gate

                    g = ecd_gate(b, space).matrix @ r
                layers.append((g, durs[i]))
            self.gates[quad] = layers
        if noise is None:
            self.seg_noise = None
            return
        self.seg_noise = {}
        pre = PAD_ENTER_CYCLE + PAD_ENTER_SBS
        post_sbs = PAD_EXIT_SBS + PAD_ENTER_RESET
        reset = config.t_reset
        tail = PAD_EXIT_RESET + config.t_vr + config.t_idle + PAD_EXIT_CYCLE
        for nm, d_ns in (
            ("pre", pre),
            ("l0", config.layer_durations_ns()[0]),
            ("l1", config.layer_durations_ns()[1]),
            ("l2", config.layer_durations_ns()[2]),
            ("l3", config.layer_durations_ns()[3]),
            ("post_sbs", post_sbs),
            ("reset", reset),
            ("tail", tail),
        ):
            t_us = d_ns * 1e-3
            osc = loss_dephasing_channel(nse, t_us, space)
            anc = ancilla_channel(nse, t_us)
            self.seg_noise[nm] = (osc.operators, anc.operators, osc.labels, anc.labels)
        # deterministic Kerr / second-order dispersive phases per segment
        nvec = np.arange(n)
        self.kerr_phase = {}
        for nm, d_ns in (("l0", config.layer_durations_ns()[0]),
                         ("l1", config.layer_durations_ns()[1]),
                         ("l2", config.layer_durations_ns()[2]),
                         ("l3", config.layer_durations_ns()[3])):
            t_us = d_ns * 1e-3
            kerr = np.exp(-1j * 0.5 * nse.kerr * nvec**2 * t_us)
            chip_g = np.exp(-1j * 0.25 * nse.chi_prime * nvec**2 * t_us)
            chip_e = np.exp(+1j * 0.25 * nse.chi_prime * nvec**2 * t_us)
            self.kerr_phase[nm] = np.concatenate([kerr * chip_g, kerr * chip_e])


def _apply_osc_kraus(m: np.ndarray, ops, labels, rng) -> tuple[np.ndarray, str]:
    """Sample an oscillator Kraus branch on a (2, n) composite state."""
    r = rng.random()
    acc = 0.0
    chosen = None
    for lab, k in zip(labels, ops):
        phi = m @ k.T
        p = np.vdot(phi.ravel(), phi.ravel()).real
        acc += p
        chosen = (lab, phi, p)
        if r < acc:
            break
    lab, phi, p = chosen
    if p <= 0:
        raise ZeroNormBranch("oscillator noise branch probability vanished")
    return phi / math.sqrt(p), lab


def _apply_anc_kraus(m: np.ndarray, ops, labels, rng) -> tuple[np.ndarray, str]:
    r = rng.random()
    acc = 0.0
    chosen = None
    for lab, k in zip(labels, ops):
        phi = k @ m
        p = np.vdot(phi.ravel(), phi.ravel()).real
        acc += p
        chosen = (lab, phi, p)
        if r < acc:
            break
    lab, phi, p = chosen
    if p <= 0:
        raise ZeroNormBranch("ancilla noise branch probability vanished")
    return phi / math.sqrt(p), lab


def run_trajectory(
    initial: QuantumState | np.ndarray,
    n_cycles: int,
    config: CycleConfig,
    noise: NoiseParams | None,
    fidelity_level: str,
    rng: np.random.Generator,
    record_observable: np.ndarray | None = None,
    record_stride: int = 1,
    readout_pauli: str | None = None,
) -> TrajectoryRecord:
    """Sample one QEC trajectory; position half-cycle first within each cycle.

    record_observable, if given, is an oscillator-space matrix whose
    frame-corrected expectation is stored every record_stride cycles (the
    frame sign is applied for the Pauli named by readout_pauli).
    """
    if n_cycles < 1:
        raise ConfigMismatch("n_cycles must be >= 1")
    if fidelity_level not in ("L1", "L2"):
        raise ConfigMismatch(f"fidelity_level must be L1 or L2, got {fidelity_level!r}")
    ops = _get_ops(config, noise, fidelity_level)
    n = config.code.space.n_max
    psi = initial.data if isinstance(initial, QuantumState) else np.asarray(initial, dtype=complex)
    if psi.ndim != 1:
        raise ConfigMismatch("trajectories require a pure initial state")
    if psi.size == 2 * n:  # composite input: keep the oscillator factor
        m = psi.reshape(2, n)
        w = np.linalg.norm(m, axis=1)
        psi = m[int(np.argmax(w))] / w.max()
    osc = psi.astype(complex)
    nse = noise or NoiseParams()
    leak_q = 0.0
    leak_exit = 0.0
    if noise is not None and nse.leak_rate > 0:
        leak_q = 1.0 - math.sqrt(max(0.0, 1.0 - nse.leak_rate))  # per half-cycle
        leak_exit = 1.0 / (2.0 * nse.leak_mean_duration)
    leaked = False
    anc = np.array([1.0, 0.0], dtype=complex)
    syndromes = []
    fx = fz = 0
    expect = []
    for cyc in range(n_cycles):
        for quad in ("X", "Z"):
            # leakage Markov chain, per half-cycle
            if leak_q > 0.0:
                if leaked:
                    if rng.random() < leak_exit:
                        leaked = False
                    else:
                        syndromes.append("f")
                        if fidelity_level == "L1" and ops.lumped is not None:
                            _, osc = _sample_kraus_vec(osc, ops.lumped.labels, ops.lumped.operators, rng)
                        elif fidelity_level == "L2" and ops.seg_noise is not None:
                            osc = _idle_noise(osc, ops, rng)
                        continue
                if not leaked and rng.random() < leak_q:
                    leaked = True
                    syndromes.append("f")
                    anc = np.array([1.0, 0.0], dtype=complex)
                    if fidelity_level == "L1" and ops.lumped is not None:
                        _, osc = _sample_kraus_vec(osc, ops.lumped.labels, ops.lumped.operators, rng)
                    elif fidelity_level == "L2" and ops.seg_noise is not None:
                        osc = _idle_noise(osc, ops, rng)
                    continue
            if fidelity_level == "L1":
                if ops.lumped is not None:
                    _, osc = _sample_kraus_vec(osc, ops.lumped.labels, ops.lumped.operators, rng)
                lab, osc = _sample_kraus_vec(
                    osc, ops.kraus[quad].labels, ops.kraus[quad].operators, rng
                )
                syndromes.append(lab)
            else:
                osc, anc, lab = _half_cycle_l2(osc, anc, quad, ops, nse, noise is not None, rng)
                syndromes.append(lab)
            if quad == "X":
                fx ^= 1
            else:
                fz ^= 1
        if record_observable is not None and (cyc + 1) % record_stride == 0:
            v = np.vdot(osc, record_observable @ osc).real
            if readout_pauli is not None:
                v *= _frame_sign(fx, fz, readout_pauli)
            expect.append(v)
    outcome = None
    if readout_pauli is not None:
        raw = phase_estimation_readout(osc, config.code, readout_pauli, rng)
        outcome = int(raw * _frame_sign(fx, fz, readout_pauli))
    return TrajectoryRecord(
        syndromes="".join(syndromes),
        pauli_frame=(fx, fz),
        final_state=QuantumState(osc, OSC),
        logical_outcome=outcome,
        expectations=np.array(expect) if expect else None,
        record_stride=record_stride,
    )


def _idle_noise(osc: np.ndarray, ops: "_HalfCycleOps", rng) -> np.ndarray:
    """Oscillator-only noise over a whole half-cycle (QEC inactive)."""
    m = osc[None, :]
    for nm in ("pre", "l0", "l1", "l2", "l3", "post_sbs", "reset", "tail"):
        o_ops, _, o_labs, _ = ops.seg_noise[nm]
        m, _ = _apply_osc_kraus(m, o_ops, o_labs, rng)
    return m[0] / np.linalg.norm(m[0])


def _half_cycle_l2(osc, anc, quad, ops: "_HalfCycleOps", nse: NoiseParams, noisy: bool, rng):
    n = ops.n
    m = np.outer(anc, osc)  # (2, n) composite amplitude table
    if noisy:
        o_ops, a_ops, o_labs, a_labs = ops.seg_noise["pre"]
        m, _ = _apply_osc_kraus(m, o_ops, o_labs, rng)
        m, _ = _apply_anc_kraus(m, a_ops, a_labs, rng)
    for i, (gate, _) in enumerate(ops.gates[quad]):
        v = gate @ m.reshape(-1)
        m = v.reshape(2, n)
        if noisy:
            seg = f"l{i}"
            m = (ops.kerr_phase[seg] * m.reshape(-1)).reshape(2, n)
            o_ops, a_ops, o_labs, a_labs = ops.seg_noise[seg]
            m, _ = _apply_osc_kraus(m, o_ops, o_labs, rng)
            m, _ = _apply_anc_kraus(m, a_ops, a_labs, rng)
    if noisy:
        o_ops, a_ops, o_labs, a_labs = ops.seg_noise["post_sbs"]
        m, _ = _apply_osc_kraus(m, o_ops, o_labs, rng)
        m, _ = _apply_anc_kraus(m, a_ops, a_labs, rng)
    # projective ancilla measurement
    pg = np.vdot(m[0], m[0]).real
    total = np.vdot(m.ravel(), m.ravel()).real
    pg = pg / total
    true_g = rng.random() < pg
    if true_g:
        osc = m[0] / np.linalg.norm(m[0])
        lab = "g"
    else:
        osc = m[1] / np.linalg.norm(m[1])
        lab = "e"
    reported = lab
    if noisy:
        fid = nse.readout_fid_g if lab == "g" else nse.readout_fid_e
        if rng.random() > fid:
            reported = "e" if lab == "g" else "g"
    # reset feedback flips the ancilla when e is reported; the compensating
    # virtual rotation uses the reported label, so misclassification leaves a
    # net oscillator rotation of +-(theta_g - theta_e)
    anc_out = np.array([1.0, 0.0], dtype=complex)
    if reported != lab:
        anc_out = np.array([0.0, 1.0], dtype=complex)  # wrong feedback pulse
        osc = ops.rot_err["ge" if lab == "g" else "eg"] * osc
    if noisy:
        for seg in ("reset", "tail"):
            o_ops, a_ops, o_labs, a_labs = ops.seg_noise[seg]
            mm = np.outer(anc_out, osc)
            mm, _ = _apply_osc_kraus(mm, o_ops, o_labs, rng)
            mm, _ = _apply_anc_kraus(mm, a_ops, a_labs, rng)
            w = np.linalg.norm(mm, axis=1)
            k = int(np.argmax(w))
            anc_out = np.zeros(2, dtype=complex)
            anc_out[k] = 1.0
            osc = mm[k] / w[k]
    return osc, anc_out, reported


_OPS_CACHE: dict = {}


def _get_ops(config: CycleConfig, noise: NoiseParams | None, level: str) -> _HalfCycleOps:
    # hold strong references to the keyed objects so ids cannot be recycled
    key = (id(config), id(noise), level)
    entry = _OPS_CACHE.get(key)
    if entry is None or entry[0] is not config or entry[1] is not noise:
        ops = _HalfCycleOps(config, noise, level)
        if len(_OPS_CACHE) > 16:
            _OPS_CACHE.clear()
        _OPS_CACHE[key] = (config, noise, ops)
        return ops
    return entry[2]


def run_shots(
    initial: QuantumState | np.ndarray,
    n_cycles: int,
    config: CycleConfig,
    noise: NoiseParams | None,
    fidelity_level: str,
    seed: int,
    n_shots: int,
    **kw,
) -> list[TrajectoryRecord]:
    """Independent trajectories with per-shot RNG streams, merged by index."""
    seqs = np.random.SeedSequence(seed).spawn(n_shots)
    out = []
    for k in range(n_shots):
        rng = np.random.Generator(np.random.Philox(seqs[k]))
        out.append(run_trajectory(initial, n_cycles, config, noise, fidelity_level, rng, **kw))
    return out


# ---------------------------------------------------------------------------
# dissipative cooling


def cooling_cycle(epsilon: complex, space: FockSpace) -> KrausSet:
    """One quadrature of trimming dissipation toward vacuum.

    The unitary is the five-gate first-order splitting of the excitation-swap
    interaction (trimming amplitude epsilon), followed by ancilla reset
    (trace-out and reinitialization to g). The returned Kraus pair acts on
    the oscillator; alternate the quadrature by passing epsilon -> i epsilon.
    """
    if abs(epsilon) > 0.6:
        raise OutOfRange("epsilon must satisfy |epsilon| <= 0.6")
    n = space.n_max
    if epsilon == 0:
        return KrausSet(["g", "e"], [np.eye(n, dtype=complex), np.zeros((n, n), complex)], True, OSC)
    from .circuits import ecd_gate

    def rot(phi, theta):
        return np.kron(qubit_rotation(phi, theta), np.eye(n))

    u = (
        rot(np.pi / 2, -np.pi / 2)
        @ ecd_gate(-1j * epsilon, space).matrix
        @ rot(0, -np.pi / 2)
        @ ecd_gate(epsilon, space).matrix
        @ rot(np.pi / 2, np.pi / 2)
    )
    return KrausSet(["g", "e"], [u[:n, :n], u[n:, :n]], True, OSC)
