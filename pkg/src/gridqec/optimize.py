"""Circuit-parameter optimization.

Two routes: deterministic gradient ascent with central finite differences
for noiseless unitary objectives, and a clipped Gaussian policy-gradient
trainer for stochastic rewards from the simulated QEC system. The policy
is the mean/stddev vector itself; no network stands between the learned
distribution and the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import CircuitParams, build_circuit_unitary
from .errors import Divergence, InvalidParams
from .fock import FockSpace, QuantumState
from .gridcode import GridCode
from .sbs import CycleConfig, NoiseParams, phase_estimation_readout, run_trajectory


@dataclass
class ObjectiveSpec:
    """What a circuit optimization is asked to produce."""

    kind: str  # state-prep | gate | qec-lifetime
    target: np.ndarray | None = None
    shots: int = 1
    horizon_cycles: int = 160

    def __post_init__(self):
        if self.kind not in ("state-prep", "gate", "qec-lifetime"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.shots < 1 or self.horizon_cycles < 1:
            raise ValueError("shots and horizon_cycles must be >= 1")


@dataclass
class PolicyState:
    """Factorized Gaussian policy over a real parameter vector."""

    mean: np.ndarray
    stddev: np.ndarray
    learning_rate: float = 0.08
    clip_ratio: float = 0.2
    grad_steps: int = 8
    stddev_floor: float = 1e-4
    normalize_advantages: bool = True
    freeze_stddev: bool = False

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).ravel()
        self.stddev = np.asarray(self.stddev, dtype=float).ravel()
        if self.mean.shape != self.stddev.shape:
            raise ValueError("mean and stddev must have equal length")
        if np.any(self.stddev <= 0):
            raise ValueError("stddev entries must be positive")

    @property
    def n_params(self) -> int:
        return self.mean.size


@dataclass
class OptimizeResult:
    params: CircuitParams
    objective: float
    evaluations: int
    converged: bool
    status: str


# ---------------------------------------------------------------------------
# deterministic circuit objectives


def state_prep_fidelity(params: CircuitParams, target: np.ndarray, space: FockSpace) -> float:
    """|<g, target | U | g, 0>|^2 for an oscillator target state."""
    n = space.n_max
    u = build_circuit_unitary(params, space, final_displacement=True).matrix
    vin = np.zeros(2 * n, dtype=complex)
    vin[0] = 1.0
    out = (u @ vin).reshape(2, n)
    return float(abs(np.vdot(target, out[0])) ** 2)


def gate_process_fidelity(params: CircuitParams, target: np.ndarray, space: FockSpace, span: int = 2) -> float:
    """Entanglement fidelity of the g->g block against a target on Fock span."""
    n = space.n_max
    u = build_circuit_unitary(params, space, final_displacement=True).matrix
    block = u[:n, :n][:span, :span]
    return float(abs(np.trace(target.conj().T @ block)) ** 2 / span**2)


def _pack(params: CircuitParams) -> np.ndarray:
    return np.concatenate([params.betas.real, params.betas.imag, params.phis, params.thetas])


def _unpack(x: np.ndarray, n_layers: int) -> CircuitParams:
    b = x[:n_layers] + 1j * x[n_layers : 2 * n_layers]
    return CircuitParams(b, x[2 * n_layers : 3 * n_layers], x[3 * n_layers :])


def optimize_circuit(
    objective: ObjectiveSpec,
    init: CircuitParams,
    budget: int = 5000,
    space: FockSpace | None = None,
    grad_step: float = 1e-5,
    grad_tol: float = 1e-6,
) -> OptimizeResult:
    """Gradient ascent with central differences and backtracking line search."""
    if objective.kind == "qec-lifetime":
        raise InvalidParams("qec-lifetime objectives are stochastic; use rl_train")
    if space is None:
        raise InvalidParams("a FockSpace is required")
    target = objective.target
    if target is None:
        raise InvalidParams("objective.target is required")

    if objective.kind == "state-prep":
        fun = lambda p: state_prep_fidelity(p, target, space)
    else:
        fun = lambda p: gate_process_fidelity(p, target, space)

    n_layers = init.n_layers
    x = _pack(init)
    evals = 0

    def f(xv):
        nonlocal evals
        evals += 1
        return fun(_unpack(xv, n_layers))

    best_x, best_f = x.copy(), f(x)
    cur_f = best_f
    while evals < budget:
        grad = np.zeros_like(x)
        for i in range(x.size):
            if evals + 2 > budget:
                break
            xp = x.copy()
            xp[i] += grad_step
            xm = x.copy()
            xm[i] -= grad_step
            grad[i] = (f(xp) - f(xm)) / (2 * grad_step)
        gnorm = np.linalg.norm(grad)
        if gnorm < grad_tol:
            return OptimizeResult(_unpack(best_x, n_layers), best_f, evals, True, "converged")
        step = 1.0
        improved = False
        while step > 1e-8 and evals < budget:
            cand = x + step * grad / max(gnorm, 1e-12)
            fc = f(cand)
            if fc > cur_f + 1e-12:
                x, cur_f = cand, fc
                improved = True
                break
            step *= 0.5
        if cur_f > best_f:
            best_x, best_f = x.copy(), cur_f
        if not improved:
            # stuck on a ridge the line search cannot climb
            return OptimizeResult(_unpack(best_x, n_layers), best_f, evals, gnorm < 1e-3, "stalled")
        if best_f > 1.0 - 1e-9:
            return OptimizeResult(_unpack(best_x, n_layers), best_f, evals, True, "converged")
    return OptimizeResult(_unpack(best_x, n_layers), best_f, evals, False, "budget_exhausted")


# ---------------------------------------------------------------------------
# QEC reward environment


@dataclass
class QecRewardEnv:
    """Maps a parameter vector onto a logical-lifetime proxy reward.

    The vector perturbs the nominal cycle parameters; dims orders selected
    entries of (Re/Im of layer betas, phis, thetas) shared by both
    quadratures (the momentum-quadrature betas are rotated 90 degrees).
    """

    config: CycleConfig
    noise: NoiseParams | None
    dims: tuple[str, ...] = ("re_beta1",)
    n_cycles: int = 40
    n_avg: int = 30
    level: str = "L2"

    def _apply(self, vec: np.ndarray) -> CycleConfig:
        if vec.shape != (len(self.dims),):
            raise InvalidParams(f"expected {len(self.dims)} parameters")
        px = self.config.params_x.copy()
        for v, dim in zip(vec, self.dims):
            kind, idx = dim.split("_beta") if "_beta" in dim else (dim, None)
            if idx is not None:
                i = int(idx)
                if kind == "re":
                    px.betas[i] = v + 1j * px.betas[i].imag
                elif kind == "im":
                    px.betas[i] = px.betas[i].real + 1j * v
                else:
                    raise InvalidParams(f"unknown dim {dim!r}")
            elif dim.startswith("phi"):
                px.phis[int(dim[3:])] = v
            elif dim.startswith("theta"):
                px.thetas[int(dim[5:])] = v
            else:
                raise InvalidParams(f"unknown dim {dim!r}")
        pz = px.copy()
        pz.betas = 1j * px.betas
        cfg = CycleConfig(
            code=self.config.code,
            t_sbs=self.config.t_sbs,
            t_reset=self.config.t_reset,
            t_vr=self.config.t_vr,
            t_idle=self.config.t_idle,
            theta_g=self.config.theta_g,
            theta_e=self.config.theta_e,
            theta_f=self.config.theta_f,
            reset_axis_params=self.config.reset_axis_params,
            params_x=px,
            params_z=pz,
        )
        return cfg

    def nominal_vector(self) -> np.ndarray:
        px = self.config.params_x
        out = []
        for dim in self.dims:
            if dim.startswith("re_beta"):
                out.append(px.betas[int(dim[7:])].real)
            elif dim.startswith("im_beta"):
                out.append(px.betas[int(dim[7:])].imag)
            elif dim.startswith("phi"):
                out.append(px.phis[int(dim[3:])])
            elif dim.startswith("theta"):
                out.append(px.thetas[int(dim[5:])])
            else:
                raise InvalidParams(f"unknown dim {dim!r}")
        return np.array(out)

    def __call__(self, vec: np.ndarray, rng: np.random.Generator) -> float:
        return qec_reward_episode(vec, self, rng)


def qec_reward_episode(params: np.ndarray, env: QecRewardEnv, rng: np.random.Generator) -> float:
    """Average +-1 logical Pauli outcome after the episode horizon.

    Alternates |+X> and |+Z> initializations, runs the cycle at the
    environment's level, reads out the matching ideal-code Pauli with
    one-bit phase estimation, and frame-corrects the sign.
    """
    cfg = env._apply(np.asarray(params, dtype=float))
    code = env.config.code
    total = 0
    for k in range(env.n_avg):
        pauli = "X" if k % 2 == 0 else "Z"
        initial = code.codewords[f"+{pauli}"]
        rec = run_trajectory(
            initial, env.n_cycles, cfg, env.noise, env.level, rng, readout_pauli=pauli
        )
        total += rec.logical_outcome
    return total / env.n_avg


# ---------------------------------------------------------------------------
# Gaussian policy-gradient trainer


def rl_train(
    env,
    policy: PolicyState,
    epochs: int,
    batch: int = 10,
    rng: np.random.Generator | None = None,
) -> tuple[PolicyState, np.ndarray]:
    """Clipped policy-gradient training of a factorized Gaussian policy.

    env(vec, rng) -> stochastic reward in [-1, 1]. Per epoch: sample a batch
    of candidates, normalize advantages, and take a few clipped surrogate
    gradient steps on (mean, log stddev). Returns the trained policy and the
    per-epoch mean-reward trace.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    mu = policy.mean.copy()
    log_sig = np.log(policy.stddev.copy())
    trace = np.zeros(epochs)
    floor = math.log(policy.stddev_floor)
    for ep in range(epochs):
        sig = np.exp(log_sig)
        cand = mu[None, :] + sig[None, :] * rng.standard_normal((batch, policy.n_params))
        rewards = np.array([env(c, rng) for c in cand])
        trace[ep] = rewards.mean()
        adv = rewards - rewards.mean()
        if policy.normalize_advantages:
            s = adv.std()
            if s > 1e-12:
                adv = adv / s
        mu_old, sig_old = mu.copy(), sig.copy()
        for _ in range(policy.grad_steps):
            sig = np.exp(log_sig)
            z_old = (cand - mu_old[None, :]) / sig_old[None, :]
            z_new = (cand - mu[None, :]) / sig[None, :]
            logp_old = -0.5 * np.sum(z_old**2, axis=1) - np.sum(np.log(sig_old))
            logp_new = -0.5 * np.sum(z_new**2, axis=1) - np.sum(log_sig)
            ratio = np.exp(np.clip(logp_new - logp_old, -30, 30))
            lo, hi = 1 - policy.clip_ratio, 1 + policy.clip_ratio
            # gradient flows only through unclipped samples that matter
            active = ~((ratio > hi) & (adv > 0) | (ratio < lo) & (adv < 0))
            w = ratio * adv * active
            g_mu = (w[:, None] * z_new / sig[None, :]).mean(axis=0)
            g_ls = (w[:, None] * (z_new**2 - 1.0)).mean(axis=0)
            mu = mu + policy.learning_rate * g_mu
            if not policy.freeze_stddev:
                log_sig = log_sig + policy.learning_rate * g_ls
            log_sig = np.maximum(log_sig, floor)
            if np.any(~np.isfinite(mu)) or np.any(log_sig > 10):
                raise Divergence("policy parameters diverged")
    out = PolicyState(
        mean=mu,
        stddev=np.exp(log_sig),
        learning_rate=policy.learning_rate,
        clip_ratio=policy.clip_ratio,
        grad_steps=policy.grad_steps,
        stddev_floor=policy.stddev_floor,
        normalize_advantages=policy.normalize_advantages,
        freeze_stddev=policy.freeze_stddev,
    )
    return out, trace
