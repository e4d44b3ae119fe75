"""Estimators over syndrome datasets and state data.

Every estimator is a deterministic function of its inputs; bootstrap
uncertainties use a fixed internal seed so identical data give identical
reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, minimize

from .errors import (
    EmptySelection,
    FitFailure,
    InsufficientData,
    NoLeakage,
    ZeroVariance,
)
from .fock import WignerGrid, displacement_elements
from .sbs import SyndromeDataset

_BOOTSTRAP = 200
_SETTLE_CYCLES = 10  # initial-state correction transient skipped by default


@dataclass
class GgFit:
    """Exponential fit of the all-g string probability P(n) = a lambda^n."""

    a: float
    lam: float
    a_err: float
    lam_err: float
    covariance: np.ndarray

    @property
    def p_err(self) -> float:
        return 1.0 - self.lam

    @property
    def pi0(self) -> float:
        return self.a * self.lam

    @property
    def pi0_err(self) -> float:
        j = np.array([self.lam, self.a])
        return float(np.sqrt(j @ self.covariance @ j))


@dataclass
class DecayFit:
    lifetime: float
    amplitude: float
    offset: float
    lifetime_err: float
    amplitude_err: float
    residual_norm: float


@dataclass
class ReconstructionResult:
    rho: np.ndarray
    fit_cost: float
    contrast: tuple[float, float]
    converged: bool
    n_starts: int


@dataclass
class LeakageStats:
    duration_histogram: dict[int, int]
    tau_l: float
    tau_l_err: float
    tau_l_ge2: float
    tail_decay_cycles: float


# ---------------------------------------------------------------------------
# syndrome-string statistics


def _e_indicator(ds: SyndromeDataset) -> np.ndarray:
    return (ds.outcomes == "e").astype(np.int8)


def gg_string_probability(
    ds: SyndromeDataset, n: int, skip_cycles: int = _SETTLE_CYCLES
) -> float:
    """Probability that a window of n full cycles contains only g outcomes.

    Windows slide over every half-cycle start after the settling transient
    and are averaged over shots and positions.
    """
    good = (ds.outcomes == "g").astype(np.int8)
    start = 2 * skip_cycles
    width = 2 * n
    usable = ds.n_half_cycles - start - width + 1
    if usable < 1 or ds.n_shots * usable < 100:
        raise InsufficientData(
            f"{max(usable, 0) * ds.n_shots} windows available, need >= 100"
        )
    # prefix sums: window is all-g iff its sum equals its width
    c = np.cumsum(good[:, start:], axis=1)
    c = np.concatenate([np.zeros((ds.n_shots, 1), dtype=c.dtype), c], axis=1)
    sums = c[:, width:] - c[:, :-width]
    return float(np.mean(sums == width))


def fit_gg_decay(
    lengths: np.ndarray, probabilities: np.ndarray, counts: np.ndarray | None = None
) -> GgFit:
    """Weighted least squares of log P(n) = log a + n log lambda."""
    n = np.asarray(lengths, dtype=float).ravel()
    p = np.asarray(probabilities, dtype=float).ravel()
    if n.size < 5:
        raise FitFailure("need at least 5 points")
    if np.any(p <= 0):
        keep = p > 0
        n, p = n[keep], p[keep]
        if counts is not None:
            counts = np.asarray(counts, dtype=float).ravel()[keep]
        if n.size < 5:
            raise FitFailure("too many empty probability bins")
    if np.any(np.diff(p) > 1e-12):
        raise FitFailure("probabilities must be non-increasing in n")
    y = np.log(p)
    if counts is None:
        w = np.ones_like(y)
    else:
        counts = np.asarray(counts, dtype=float).ravel()
        # var(log p) ~ (1 - p) / (N p) for binomial sampling
        w = counts * p / np.maximum(1.0 - p, 1e-9)
    x = np.column_stack([np.ones_like(n), n])
    wx = x * w[:, None]
    cov = np.linalg.inv(x.T @ wx)
    beta = cov @ (wx.T @ y)
    resid = y - x @ beta
    dof = max(n.size - 2, 1)
    scale = float(resid @ (w * resid)) / dof if n.size > 2 else 1.0
    cov = cov * max(scale, 1e-30)
    log_a, log_lam = beta
    a, lam = math.exp(log_a), math.exp(log_lam)
    if not 0 < lam < 1 or not 0 < a <= 1 + 1e-6:
        raise FitFailure(f"fit outside the model range: a={a:.4f}, lambda={lam:.4f}")
    # delta method to (a, lambda)
    j = np.diag([a, lam])
    cov_al = j @ cov @ j
    return GgFit(
        a=a,
        lam=lam,
        a_err=float(np.sqrt(cov_al[0, 0])),
        lam_err=float(np.sqrt(cov_al[1, 1])),
        covariance=cov_al,
    )


def gg_decay_curve(
    ds: SyndromeDataset, max_n: int = 12, skip_cycles: int = _SETTLE_CYCLES
) -> tuple[np.ndarray, np.ndarray]:
    ns = np.arange(1, max_n + 1)
    ps = np.array([gg_string_probability(ds, int(k), skip_cycles) for k in ns])
    return ns, ps


def correlation_matrix(ds: SyndromeDataset) -> np.ndarray:
    """Pearson correlation of numeric outcomes (g=0, e=1, f=2) across half-cycles."""
    if ds.n_shots < 1000:
        raise InsufficientData(f"{ds.n_shots} shots, need >= 1000")
    codes = np.zeros(ds.outcomes.shape, dtype=float)
    codes[ds.outcomes == "e"] = 1.0
    codes[ds.outcomes == "f"] = 2.0
    mean = codes.mean(axis=0)
    centered = codes - mean
    std = centered.std(axis=0)
    zero = std < 1e-12
    std_safe = np.where(zero, 1.0, std)
    r = (centered.T @ centered) / ds.n_shots / np.outer(std_safe, std_safe)
    r[zero, :] = np.nan
    r[:, zero] = np.nan
    np.fill_diagonal(r, 1.0)
    return r


def leakage_stats(ds: SyndromeDataset) -> LeakageStats:
    """Leakage-event histogram and constant-rate first-passage fits.

    A cycle counts as leaked when either of its half-cycles reads f; an event
    is a maximal run of leaked cycles. L(t) = 1 - exp(-t / tau_l) is fitted
    to the fraction of shots that saw an event by cycle t (and separately for
    events of duration >= 2).
    """
    f = ds.outcomes == "f"
    if not np.any(f):
        raise NoLeakage("dataset contains no f outcomes")
    n_cycles = ds.n_half_cycles // 2
    leaked = f[:, : 2 * n_cycles].reshape(ds.n_shots, n_cycles, 2).any(axis=2)
    hist: dict[int, int] = {}
    first_any = np.full(ds.n_shots, -1)
    first_ge2 = np.full(ds.n_shots, -1)
    for s in range(ds.n_shots):
        row = leaked[s]
        t = 0
        while t < n_cycles:
            if row[t]:
                start = t
                while t < n_cycles and row[t]:
                    t += 1
                dur = t - start
                hist[dur] = hist.get(dur, 0) + 1
                if first_any[s] < 0:
                    first_any[s] = start
                if dur >= 2 and first_ge2[s] < 0:
                    first_ge2[s] = start
            else:
                t += 1

    def passage_fit(first: np.ndarray) -> tuple[float, float]:
        t = np.arange(1, n_cycles + 1, dtype=float)
        frac = np.array([np.mean((first >= 0) & (first < k)) for k in t])
        if frac[-1] <= 0:
            return math.inf, math.inf
        try:
            popt, pcov = curve_fit(
                lambda tt, tau: 1.0 - np.exp(-tt / tau),
                t,
                frac,
                p0=[n_cycles / max(frac[-1], 1e-6) / 2],
                maxfev=10000,
            )
        except RuntimeError as exc:
            raise FitFailure(f"leakage fit failed: {exc}") from exc
        return float(popt[0]), float(np.sqrt(pcov[0, 0]))

    tau_l, tau_err = passage_fit(first_any)
    tau_ge2 = passage_fit(first_ge2)[0] if np.any(first_ge2 >= 0) else math.inf
    durs = np.array(sorted(hist))
    tail = durs[durs >= 3]
    tail_decay = math.nan
    if tail.size >= 3:
        counts = np.array([hist[d] for d in tail], dtype=float)
        slope = np.polyfit(tail, np.log(counts), 1)[0]
        if slope < 0:
            tail_decay = -1.0 / slope
    return LeakageStats(hist, tau_l, tau_err, tau_ge2, tail_decay)


def postselect(
    ds: SyndromeDataset, rule: str = "consecutive-e", d: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Shot survival masks under a post-selection rule.

    rule="consecutive-e": reject a shot at the horizon where it first shows
    d consecutive e outcomes in same-quadrature (stride 2) positions.
    rule="leakage": reject at the first f outcome. Returns (alive, survival)
    where alive[s, t] says shot s survives through full cycle t+1 and
    survival[t] is the surviving fraction.
    """
    n_cycles = ds.n_half_cycles // 2
    if rule == "leakage":
        bad = ds.outcomes == "f"
        first_bad_half = np.where(bad.any(axis=1), bad.argmax(axis=1), 2 * n_cycles)
    elif rule == "consecutive-e":
        if d < 1:
            raise ValueError("d must be >= 1")
        e = (ds.outcomes == "e").astype(np.int8)
        first_bad_half = np.full(ds.n_shots, 2 * n_cycles)
        for parity in (0, 1):
            sub = e[:, parity::2]
            run = np.zeros(ds.n_shots, dtype=np.int32)
            found = np.full(ds.n_shots, -1)
            for j in range(sub.shape[1]):
                run = (run + 1) * sub[:, j]
                hit = (run >= d) & (found < 0)
                found[hit] = j
            has = found >= 0
            first_bad_half[has] = np.minimum(
                first_bad_half[has], 2 * found[has] + parity
            )
    else:
        raise ValueError(f"unknown rule {rule!r}")
    first_bad_cycle = first_bad_half // 2
    t = np.arange(n_cycles)
    alive = first_bad_cycle[:, None] > t[None, :]
    survival = alive.mean(axis=0)
    if survival[-1] == 0 and survival[0] == 0:
        raise EmptySelection("post-selection rejected every shot immediately")
    return alive, survival


def survival_per_cycle(survival: np.ndarray) -> float:
    """Geometric survival rate from the log-linear tail of a survival curve."""
    s = np.asarray(survival, dtype=float)
    keep = s > 0
    t = np.arange(1, s.size + 1)[keep]
    y = np.log(s[keep])
    if t.size < 2:
        return 1.0
    slope = np.polyfit(t, y, 1)[0]
    return float(np.exp(slope))


# ---------------------------------------------------------------------------
# decay fits


def fit_state_decay(times: np.ndarray, expectations: np.ndarray) -> DecayFit:
    """Exponential decay A exp(-t/tau) with the offset fixed to zero."""
    t = np.asarray(times, dtype=float).ravel()
    y = np.asarray(expectations, dtype=float).ravel()
    if t.size < 4:
        raise FitFailure("need at least 4 time points")
    if np.std(y) < 1e-12 or np.all(y <= 0) or (y[0] - y[-1]) <= 0:
        raise FitFailure("data show no decay")
    try:
        popt, pcov = curve_fit(
            lambda tt, amp, tau: amp * np.exp(-tt / tau),
            t,
            y,
            p0=[y[0], max(t[-1] / 2, 1e-9)],
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise FitFailure(str(exc)) from exc
    amp, tau = popt
    if tau <= 0:
        raise FitFailure("fitted lifetime is not positive")
    resid = y - amp * np.exp(-t / tau)
    # residual bootstrap with a fixed seed: estimators stay deterministic
    rng = np.random.default_rng(12345)
    taus = []
    for _ in range(_BOOTSTRAP):
        yb = amp * np.exp(-t / tau) + rng.choice(resid, size=resid.size, replace=True)
        try:
            pb, _ = curve_fit(
                lambda tt, a2, tau2: a2 * np.exp(-tt / tau2), t, yb, p0=[amp, tau], maxfev=5000
            )
            taus.append(pb[1])
        except RuntimeError:
            continue
    tau_err = float(np.std(taus)) if taus else float(np.sqrt(pcov[1, 1]))
    return DecayFit(
        lifetime=float(tau),
        amplitude=float(amp),
        offset=0.0,
        lifetime_err=tau_err,
        amplitude_err=float(np.sqrt(pcov[0, 0])),
        residual_norm=float(np.linalg.norm(resid)),
    )


# ---------------------------------------------------------------------------
# Wigner reconstruction


def reconstruct_density(
    grid: WignerGrid,
    contrast: tuple[float, float] = (0.0, 0.0),
    truncation: int = 32,
    n_starts: int = 3,
    max_iter: int = 400,
) -> ReconstructionResult:
    """Least-squares density-matrix fit of Wigner data.

    rho = C+C / Tr[C+C] keeps the iterate positive with unit trace; the cost
    sum_i ((2/pi) Tr[rho Pi_a_i] P(a_i) - W_i)^2 is minimized with L-BFGS
    from a maximally mixed start plus perturbed restarts.
    """
    eta0, eta2 = contrast
    alphas = grid.alphas
    w = grid.values
    n_pts = alphas.size
    # displaced-parity design tensor at the reconstruction truncation
    parity = (-1.0) ** np.arange(truncation)
    ms = np.empty((n_pts, truncation, truncation), dtype=complex)
    for i, al in enumerate(alphas):
        ms[i] = displacement_elements(truncation, 2 * al) * parity[None, :]
    p_cal = np.sqrt(np.clip(1.0 - eta0 - eta2 * np.abs(alphas) ** 2, 0.0, 1.0))
    coef = (2.0 / np.pi) * p_cal

    def cost_grad(xr: np.ndarray):
        c = (xr[: truncation**2] + 1j * xr[truncation**2 :]).reshape(truncation, truncation)
        gram = c.conj().T @ c
        tr = np.trace(gram).real
        rho = gram / tr
        f = coef * np.einsum("aij,ji->a", ms, rho, optimize=True).real
        e = f - w
        cost = float(e @ e)
        # dcost/drho = sum_i 2 e_i coef_i M_i (Hermitian part)
        h = np.einsum("a,aij->ij", 2.0 * e * coef, ms, optimize=True)
        h = 0.5 * (h + h.conj().T)
        # rho = G/tr with G = C+C: dcost/dC* = C (h - Tr[rho h] I)/tr
        hp = (h - np.trace(rho @ h).real * np.eye(truncation)) / tr
        gc = c @ hp
        return cost, np.concatenate([2 * gc.real.ravel(), 2 * gc.imag.ravel()])

    rng = np.random.default_rng(2024)
    best = None
    for start in range(max(n_starts, 1)):
        c0 = np.eye(truncation) / np.sqrt(truncation)
        x0 = np.concatenate([c0.ravel(), np.zeros(truncation**2)])
        if start > 0:
            x0 = x0 + 0.05 * rng.standard_normal(x0.size)
        res = minimize(
            cost_grad,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "ftol": 1e-14, "gtol": 1e-12},
        )
        if best is None or res.fun < best.fun:
            best = res
    xr = best.x
    c = (xr[: truncation**2] + 1j * xr[truncation**2 :]).reshape(truncation, truncation)
    gram = c.conj().T @ c
    rho = gram / np.trace(gram).real
    return ReconstructionResult(
        rho=rho,
        fit_cost=float(best.fun),
        contrast=(eta0, eta2),
        converged=bool(best.success),
        n_starts=max(n_starts, 1),
    )


# ---------------------------------------------------------------------------
# noise-sensitivity sweeps


def sensitivity_sweep(
    axis: str,
    scale_factors: np.ndarray,
    base_config,
    base_noise,
    paulis: tuple[str, ...] = ("Z", "Y"),
    n_shots: int = 40,
    n_cycles: int = 60,
    seed: int = 77,
) -> dict:
    """Logical decay rates versus a scaled physical ancilla rate.

    axis selects the physical knob: gamma1_t scales 1/t1_t, gammaphi_t
    scales the ancilla pure-dephasing rate. Returns per-Pauli linear-fit
    slopes d(gamma_L)/d(gamma_phys) plus the sampled points.
    """
    from dataclasses import replace as dc_replace

    from .sbs import run_shots

    if axis not in ("gamma1_t", "gammaphi_t"):
        raise ValueError("axis must be gamma1_t or gammaphi_t")
    scale_factors = np.asarray(scale_factors, dtype=float)
    if scale_factors.size < 4:
        raise FitFailure("need at least 4 sweep points")
    code = base_config.code
    gamma_phys = []
    rates = {p: [] for p in paulis}
    t_cycle_ms = base_config.cycle_us * 1e-3
    for j, s in enumerate(scale_factors):
        if axis == "gamma1_t":
            noise = dc_replace(base_noise, t1_t=base_noise.t1_t / s)
            gamma_phys.append(s / base_noise.t1_t * 1e3)  # 1/ms
        else:
            g_phi = base_noise.gamma_phi_t * s
            t2e = 1.0 / (g_phi + 0.5 / base_noise.t1_t)
            noise = dc_replace(base_noise, t2e_t=t2e)
            gamma_phys.append(g_phi * 1e3)
        for p in paulis:
            obs = code.logicals[p].matrix
            recs = run_shots(
                code.codewords[f"+{p}"],
                n_cycles,
                base_config,
                noise,
                "L2",
                seed + 1000 * j,
                n_shots,
                record_observable=obs,
                record_stride=max(n_cycles // 8, 1),
                readout_pauli=p,
            )
            traces = np.array([r.expectations for r in recs])
            mean = traces.mean(axis=0)
            ts = (np.arange(1, mean.size + 1) * max(n_cycles // 8, 1)) * t_cycle_ms
            fit = fit_state_decay(ts, mean)
            rates[p].append(1.0 / fit.lifetime)
    gamma_phys = np.array(gamma_phys)
    out = {"axis": axis, "gamma_phys": gamma_phys, "rates": {}, "slopes": {}}
    for p in paulis:
        r = np.array(rates[p])
        slope, intercept = np.polyfit(gamma_phys, r, 1)
        out["rates"][p] = r
        out["slopes"][p] = float(slope)
        out[f"intercept_{p}"] = float(intercept)
    return out
