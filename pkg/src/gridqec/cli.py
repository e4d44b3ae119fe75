"""Batch experiment runner.

Reads a YAML experiment description (units are annotated in the key names:
*_us, *_ns, *_rad_per_us), runs the requested simulation or analysis, and
writes deterministic CSV/JSON artifacts plus a manifest. A fixed (config,
seed) pair yields byte-identical artifacts at any worker count: every shot
owns an RNG stream derived from (seed, shot index) and results are merged
in shot order.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analysis import (
    fit_gg_decay,
    fit_state_decay,
    gg_decay_curve,
    leakage_stats,
    reconstruct_density,
    sensitivity_sweep,
)
from .channels import NoiseParams, depolarization_rate
from .errors import ConfigError, GridQecError
from .fock import FockSpace, QuantumState, wigner
from .gridcode import L_S, LatticeMatrix, build_code
from .optimize import (
    ObjectiveSpec,
    PolicyState,
    QecRewardEnv,
    optimize_circuit,
    rl_train,
)
from .sbs import (
    CycleConfig,
    SyndromeDataset,
    cooling_cycle,
    inject_displacement,
    run_trajectory,
)

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    raw: dict
    space: FockSpace
    noise: NoiseParams
    delta: float
    lattice: LatticeMatrix
    kind: str
    shots: int
    cycles: int
    seed: int
    level: str
    out_dir: Path
    threads: int = 1

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except Exception as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema version {raw.get('schema')}")
        overrides = overrides or {}
        try:
            sys_c = raw.get("system", {})
            noise_c = dict(sys_c.get("noise", {}))
            noise = NoiseParams(
                t1_c=noise_c.pop("t1_c_us", 606.0),
                t2_c=noise_c.pop("t2_c_us", 980.0),
                t1_t=noise_c.pop("t1_t_us", 280.0),
                t2e_t=noise_c.pop("t2e_t_us", 238.0),
                nth_t=noise_c.pop("nth_t", 0.043),
                chi=noise_c.pop("chi_rad_per_us", 2 * np.pi * 0.0465),
                chi_prime=noise_c.pop("chi_prime_rad_per_us", 2 * np.pi * 5.8e-6),
                kerr=noise_c.pop("kerr_rad_per_us", -2 * np.pi * 4.8e-6),
                readout_fid_g=noise_c.pop("readout_fid_g", 0.9997),
                readout_fid_e=noise_c.pop("readout_fid_e", 0.9914),
                leak_rate=noise_c.pop("leak_rate_per_cycle", 0.0),
                leak_mean_duration=noise_c.pop("leak_mean_duration_cycles", 17.2),
            )
            if noise_c:
                raise ConfigError(f"unknown noise keys {sorted(noise_c)}")
            space = FockSpace(
                n_max=int(sys_c.get("n_max", 80)),
                guard_band=float(sys_c.get("guard_band", 0.25)),
            )
            code_c = raw.get("code", {})
            delta = float(code_c.get("delta", 0.34))
            lat = code_c.get("lattice", "square")
            if lat == "square":
                lattice = LatticeMatrix.square()
            elif lat == "hexagonal":
                lattice = LatticeMatrix.hexagonal()
            else:
                (m11, m12), (m21, m22) = lat
                lattice = LatticeMatrix(m11, m12, m21, m22)
            run_c = raw.get("run", {})
            if "seed" not in run_c and "seed" not in overrides:
                raise ConfigError("run.seed is mandatory for stochastic runs")
            out_c = raw.get("output", {})
            cfg = cls(
                raw=raw,
                space=space,
                noise=noise,
                delta=delta,
                lattice=lattice,
                kind=overrides.get("kind", run_c.get("kind", "lifetime")),
                shots=int(run_c.get("shots", 50)),
                cycles=int(run_c.get("cycles", 40)),
                seed=int(overrides.get("seed", run_c.get("seed", 0))),
                level=str(overrides.get("level", run_c.get("level", "L2"))),
                out_dir=Path(overrides.get("out", out_c.get("directory", "out"))),
                threads=int(overrides.get("threads", run_c.get("threads", 1))),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        if cfg.level not in ("L1", "L2"):
            raise ConfigError(f"level must be L1 or L2, got {cfg.level}")
        return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# shot-level parallel engine

_WORKER_STATE: dict = {}


def _worker_init(payload: dict) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(_build_system(payload))
    _WORKER_STATE["payload"] = payload


def _build_system(payload: dict) -> dict:
    space = FockSpace(payload["n_max"], payload["guard_band"])
    lattice = LatticeMatrix(*payload["lattice"])
    code = build_code(payload["delta"], lattice, space)
    noise = NoiseParams(**payload["noise"]) if payload["noise"] is not None else None
    config = CycleConfig.nominal(code, noise or NoiseParams())
    return {"space": space, "code": code, "noise": noise, "config": config}


def _run_shot_batch(args) -> list[tuple[int, str, np.ndarray | None, int | None]]:
    payload, shot_ids = args
    if _WORKER_STATE.get("payload") != payload:
        _worker_init(payload)
    code = _WORKER_STATE["code"]
    config = _WORKER_STATE["config"]
    noise = _WORKER_STATE["noise"]
    out = []
    for k in shot_ids:
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(payload["seed"], spawn_key=(k,)))
        )
        initial = code.codewords[payload["initial"]]
        if payload.get("inject_eps"):
            initial = inject_displacement(initial, complex(*payload["inject_eps"]), code.space)
        obs = None
        if payload.get("observable"):
            obs = code.logicals[payload["observable"]].matrix
        rec = run_trajectory(
            initial,
            payload["cycles"],
            config,
            noise,
            payload["level"],
            rng,
            record_observable=obs,
            record_stride=payload.get("stride", 1),
            readout_pauli=payload.get("observable"),
        )
        out.append((k, rec.syndromes, rec.expectations, rec.logical_outcome))
    return out


def run_shot_sweep(cfg: ExperimentConfig, payload: dict) -> list:
    """Run shots 0..shots-1 for one payload, merged in shot order."""
    payload = dict(payload)
    payload.setdefault("n_max", cfg.space.n_max)
    payload.setdefault("guard_band", cfg.space.guard_band)
    payload.setdefault("delta", cfg.delta)
    payload.setdefault(
        "lattice", [cfg.lattice.m11, cfg.lattice.m12, cfg.lattice.m21, cfg.lattice.m22]
    )
    payload.setdefault("noise", _noise_dict(cfg.noise))
    payload.setdefault("seed", cfg.seed)
    payload.setdefault("cycles", cfg.cycles)
    payload.setdefault("level", cfg.level)
    shot_ids = list(range(cfg.shots))
    if cfg.threads <= 1:
        results = _run_shot_batch((payload, shot_ids))
    else:
        chunks = [shot_ids[i :: cfg.threads] for i in range(cfg.threads)]
        results = []
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            for part in ex.map(_run_shot_batch, [(payload, c) for c in chunks if c]):
                results.extend(part)
    results.sort(key=lambda r: r[0])
    return results


def _noise_dict(noise: NoiseParams) -> dict:
    return {
        "t1_c": noise.t1_c,
        "t2_c": noise.t2_c,
        "t1_t": noise.t1_t,
        "t2e_t": noise.t2e_t,
        "nth_t": noise.nth_t,
        "chi": noise.chi,
        "chi_prime": noise.chi_prime,
        "kerr": noise.kerr,
        "readout_fid_g": noise.readout_fid_g,
        "readout_fid_e": noise.readout_fid_e,
        "leak_rate": noise.leak_rate,
        "leak_mean_duration": noise.leak_mean_duration,
    }


# ---------------------------------------------------------------------------
# experiment kinds


def _kind_lifetime(cfg: ExperimentConfig, out: Path) -> list[str]:
    code = _build_system_from_cfg(cfg)["code"]
    config = CycleConfig.nominal(code, cfg.noise)
    stride = max(cfg.cycles // 20, 1)
    artifacts = []
    report = {}
    for pauli in ("X", "Y", "Z"):
        payload = {
            "initial": f"+{pauli}",
            "observable": pauli,
            "stride": stride,
            "seed": cfg.seed + {"X": 0, "Y": 1, "Z": 2}[pauli] * 10_000_019,
        }
        res = run_shot_sweep(cfg, payload)
        traces = np.array([r[2] for r in res])
        mean = traces.mean(axis=0)
        err = traces.std(axis=0) / np.sqrt(len(res))
        times = np.arange(1, mean.size + 1) * stride * config.cycle_us
        rows = [[t, m, e] for t, m, e in zip(times, mean, err)]
        name = f"decay_{pauli}.csv"
        write_csv(out / name, ["time_us", "expectation", "stderr"], rows)
        artifacts.append(name)
        try:
            fit = fit_state_decay(times * 1e-3, mean)
            report[pauli] = {
                "lifetime_ms": fit.lifetime,
                "lifetime_err_ms": fit.lifetime_err,
                "amplitude": fit.amplitude,
            }
        except GridQecError as exc:
            report[pauli] = {"error": str(exc)}
    if all("lifetime_ms" in report[p] for p in "XYZ"):
        gkp = depolarization_rate(
            {"tx": report["X"]["lifetime_ms"], "ty": report["Y"]["lifetime_ms"], "tz": report["Z"]["lifetime_ms"]}
        )
        fock = depolarization_rate({"t1": cfg.noise.t1_c * 1e-3, "t2": cfg.noise.t2_c * 1e-3})
        report["gamma_gkp_per_ms"] = gkp
        report["gamma_fock01_per_ms"] = fock
        report["gain"] = fock / gkp
    write_json(out / "lifetime_report.json", report)
    artifacts.append("lifetime_report.json")
    return artifacts


def _kind_syndromes(cfg: ExperimentConfig, out: Path) -> list[str]:
    res = run_shot_sweep(cfg, {"initial": "+Z"})
    outcomes = np.array([list(r[1]) for r in res], dtype="<U1")
    ds = SyndromeDataset(
        outcomes,
        metadata={
            "seed": cfg.seed,
            "cycles": cfg.cycles,
            "level": cfg.level,
            "delta": cfg.delta,
            "noise": _noise_dict(cfg.noise),
        },
    )
    ds.save(str(out / "syndromes.txt"))
    stats = {
        "p_e": float(np.mean(outcomes == "e")),
        "p_f": float(np.mean(outcomes == "f")),
        "shots": int(ds.n_shots),
        "half_cycles": int(ds.n_half_cycles),
    }
    write_json(out / "syndrome_stats.json", stats)
    return ["syndromes.txt", "syndromes.txt.meta.json", "syndrome_stats.json"]


def _kind_inject(cfg: ExperimentConfig, out: Path) -> list[str]:
    run_c = cfg.raw.get("run", {})
    fracs = run_c.get("eps_over_ls", [0.0, 0.125, 0.25, 0.375, 0.5])
    rows = []
    for i, frac in enumerate(fracs):
        eps = frac * L_S
        payload = {
            "initial": "+Z",
            "inject_eps": (eps, 0.0),
            "seed": cfg.seed + i * 97_003,
        }
        res = run_shot_sweep(cfg, payload)
        syn = np.array([list(r[1]) for r in res], dtype="<U1")
        e_rate = (syn == "e").mean(axis=0)
        for cyc in range(cfg.cycles):
            p_cycle = (e_rate[2 * cyc] + e_rate[2 * cyc + 1]) / 2.0
            rows.append([frac, cyc, p_cycle])
    write_csv(out / "inject.csv", ["eps_over_ls", "cycle", "p_e"], rows)
    return ["inject.csv"]


def _kind_wigner(cfg: ExperimentConfig, out: Path) -> list[str]:
    run_c = cfg.raw.get("run", {})
    code = _build_system_from_cfg(cfg)["code"]
    extent = float(run_c.get("extent", 3.2))
    points = int(run_c.get("grid_points", 41))
    ax = np.linspace(-extent, extent, points)
    grid = (ax[None, :] + 1j * ax[:, None]).ravel()
    state = code.codewords.get(run_c.get("state", "+Z"), code.codewords["+Z"])
    wg = wigner(state, grid, code.space)
    rows = [[a.real, a.imag, v] for a, v in zip(wg.alphas, wg.values)]
    write_csv(out / "wigner.csv", ["re_alpha", "im_alpha", "value"], rows)
    artifacts = ["wigner.csv"]
    if run_c.get("reconstruct", False):
        rec = reconstruct_density(wg, truncation=int(run_c.get("truncation", 32)))
        write_json(
            out / "reconstruction.json",
            {
                "fit_cost": rec.fit_cost,
                "converged": rec.converged,
                "rho_real": rec.rho.real.tolist(),
                "rho_imag": rec.rho.imag.tolist(),
            },
        )
        artifacts.append("reconstruction.json")
    return artifacts


def _kind_optimize(cfg: ExperimentConfig, out: Path) -> list[str]:
    from .circuits import CircuitParams

    run_c = cfg.raw.get("run", {})
    layers = int(run_c.get("layers", 5))
    budget = int(run_c.get("budget", 5000))
    target_name = run_c.get("target", "fock1")
    space = FockSpace(int(run_c.get("opt_n_max", 30)), cfg.space.guard_band)
    if target_name == "fock1":
        target = np.zeros(space.n_max, dtype=complex)
        target[1] = 1.0
    else:
        raise ConfigError(f"unknown optimize target {target_name!r}")
    rng = np.random.default_rng(cfg.seed)
    init = CircuitParams(
        betas=0.5 * (rng.standard_normal(layers) + 1j * rng.standard_normal(layers)),
        phis=rng.uniform(-np.pi, np.pi, layers),
        thetas=rng.uniform(-np.pi, np.pi, layers),
    )
    res = optimize_circuit(
        ObjectiveSpec("state-prep", target), init, budget=budget, space=space
    )
    (out / "optimized_params.json").write_text(res.params.to_json() + "\n")
    write_json(
        out / "optimize_report.json",
        {"objective": res.objective, "evaluations": res.evaluations, "status": res.status},
    )
    return ["optimized_params.json", "optimize_report.json"]


def _kind_rl(cfg: ExperimentConfig, out: Path) -> list[str]:
    run_c = cfg.raw.get("run", {})
    system = _build_system_from_cfg(cfg)
    config = CycleConfig.nominal(system["code"], cfg.noise)
    env = QecRewardEnv(
        config=config,
        noise=cfg.noise if run_c.get("noisy", False) else None,
        dims=tuple(run_c.get("dims", ["re_beta1"])),
        n_cycles=cfg.cycles,
        n_avg=int(run_c.get("n_avg", 30)),
        level=cfg.level,
    )
    nominal = env.nominal_vector()
    perturb = np.asarray(run_c.get("perturbation", [0.0] * len(nominal)), dtype=float)
    policy = PolicyState(
        mean=nominal * (1 + perturb),
        stddev=np.maximum(0.05 * np.abs(nominal), 0.02),
    )
    epochs = int(run_c.get("epochs", 60))
    rng = np.random.default_rng(cfg.seed)
    trained, trace = rl_train(env, policy, epochs, batch=int(run_c.get("batch", 10)), rng=rng)
    rows = [[ep, trace[ep]] + list(np.atleast_1d(trained.mean)) for ep in range(epochs)]
    header = ["epoch", "mean_reward"] + [f"mean_{d}" for d in env.dims]
    write_csv(out / "training_log.csv", header, rows)
    write_json(
        out / "rl_report.json",
        {
            "final_mean": list(trained.mean),
            "final_stddev": list(trained.stddev),
            "first10_mean_reward": float(trace[: min(10, epochs)].mean()),
            "last10_mean_reward": float(trace[-min(10, epochs) :].mean()),
        },
    )
    return ["training_log.csv", "rl_report.json"]


def _kind_cool(cfg: ExperimentConfig, out: Path) -> list[str]:
    run_c = cfg.raw.get("run", {})
    eps = float(run_c.get("epsilon", 0.4))
    t_cool_us = float(run_c.get("t_cool_us", 3.38))
    system = _build_system_from_cfg(cfg)
    code, space = system["code"], system["space"]
    n_apps = cfg.cycles
    nvec = np.arange(space.n_max)
    rho0 = code.codewords["+Z"].density()
    rows = []
    n0 = float(np.trace(rho0 @ np.diag(nvec)).real)
    loss_eta = np.exp(-t_cool_us / cfg.noise.t1_c)

    def trace_n(rho):
        return float(np.einsum("ii,i->", rho, nvec).real)

    rho = rho0.copy()
    for k in range(n_apps + 1):
        t_us = k * t_cool_us
        n_cool = trace_n(rho)
        n_passive = n0 * np.exp(-t_us / cfg.noise.t1_c)
        rows.append([k, t_us, n_cool, n_passive])
        if k == n_apps:
            break
        ks = cooling_cycle(eps * (1j ** (k % 2)), space)
        rho = sum(km @ rho @ km.conj().T for km in ks.operators)
        # natural decay during the cycle
        from .channels import loss_dephasing_channel

        lk = loss_dephasing_channel(cfg.noise, t_cool_us, space)
        rho = sum(km @ rho @ km.conj().T for km in lk.operators)
        rho = rho / np.trace(rho).real
    write_csv(out / "cool.csv", ["cycle", "time_us", "n_cooled", "n_passive"], rows)
    arr = np.array(rows, dtype=float)
    half = n0 / 2.0
    below = arr[arr[:, 2] < half]
    t_half_cool = float(below[0, 1]) if below.size else float("inf")
    t_half_passive = float(np.log(2.0) * cfg.noise.t1_c)
    write_json(
        out / "cool_report.json",
        {
            "epsilon": eps,
            "n0": n0,
            "t_half_cooled_us": t_half_cool,
            "t_half_passive_us": t_half_passive,
            "speedup": t_half_passive / t_half_cool if t_half_cool > 0 else 0.0,
        },
    )
    return ["cool.csv", "cool_report.json"]


def _kind_sensitivity(cfg: ExperimentConfig, out: Path) -> list[str]:
    run_c = cfg.raw.get("run", {})
    system = _build_system_from_cfg(cfg)
    config = CycleConfig.nominal(system["code"], cfg.noise)
    res = sensitivity_sweep(
        run_c.get("axis", "gamma1_t"),
        np.asarray(run_c.get("scales", [1.0, 2.0, 4.0, 8.0]), dtype=float),
        config,
        cfg.noise,
        n_shots=cfg.shots,
        n_cycles=cfg.cycles,
        seed=cfg.seed,
    )
    rows = []
    for i, g in enumerate(res["gamma_phys"]):
        row = [g] + [res["rates"][p][i] for p in res["rates"]]
        rows.append(row)
    write_csv(out / "sensitivity.csv", ["gamma_phys_per_ms"] + [f"gamma_{p}" for p in res["rates"]], rows)
    write_json(out / "sensitivity_report.json", {"axis": res["axis"], "slopes": res["slopes"]})
    return ["sensitivity.csv", "sensitivity_report.json"]


_KINDS = {
    "lifetime": _kind_lifetime,
    "syndromes": _kind_syndromes,
    "inject": _kind_inject,
    "wigner": _kind_wigner,
    "optimize": _kind_optimize,
    "rl": _kind_rl,
    "cool": _kind_cool,
    "sensitivity": _kind_sensitivity,
}

_SYSTEM_CACHE: dict = {}


def _build_system_from_cfg(cfg: ExperimentConfig) -> dict:
    key = (
        cfg.space.n_max,
        cfg.space.guard_band,
        cfg.delta,
        cfg.lattice.m11,
        cfg.lattice.m12,
        cfg.lattice.m21,
        cfg.lattice.m22,
    )
    if key not in _SYSTEM_CACHE:
        space = FockSpace(cfg.space.n_max, cfg.space.guard_band)
        code = build_code(cfg.delta, cfg.lattice, space)
        _SYSTEM_CACHE[key] = {"space": space, "code": code}
        if len(_SYSTEM_CACHE) > 8:
            first = next(iter(_SYSTEM_CACHE))
            if first != key:
                del _SYSTEM_CACHE[first]
    return _SYSTEM_CACHE[key]


def run(config_path: str | Path, overrides: dict | None = None) -> int:
    """Execute one experiment config; returns a process exit code."""
    try:
        cfg = ExperimentConfig.from_file(config_path, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        kind_fn = _KINDS.get(cfg.kind)
        if kind_fn is None:
            raise ConfigError(f"unknown run kind {cfg.kind!r}")
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        artifacts = kind_fn(cfg, cfg.out_dir)
        digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
        write_json(
            cfg.out_dir / "manifest.json",
            {
                "config_sha256": digest,
                "schema": SCHEMA_VERSION,
                "version": __version__,
                "kind": cfg.kind,
                "seed": cfg.seed,
                "level": cfg.level,
                "artifacts": sorted(artifacts),
            },
        )
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GridQecError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


def _kind_analyze(args) -> int:
    """Fit reports for an externally produced syndrome file."""
    ds = SyndromeDataset.load(args.syndromes)
    report: dict = {"shots": ds.n_shots, "half_cycles": ds.n_half_cycles}
    try:
        ns, ps = gg_decay_curve(ds, max_n=args.max_n, skip_cycles=args.skip_cycles)
        fit = fit_gg_decay(ns, ps)
        report["gg_fit"] = {
            "a": fit.a,
            "lambda": fit.lam,
            "p_err": fit.p_err,
            "pi0": fit.pi0,
            "a_err": fit.a_err,
            "lambda_err": fit.lam_err,
        }
    except GridQecError as exc:
        report["gg_fit"] = {"error": str(exc)}
    try:
        ls = leakage_stats(ds)
        report["leakage"] = {
            "tau_l_cycles": ls.tau_l,
            "tau_l_err": ls.tau_l_err,
            "tau_l_ge2_cycles": ls.tau_l_ge2,
            "histogram": {str(k): v for k, v in sorted(ls.duration_histogram.items())},
        }
    except GridQecError as exc:
        report["leakage"] = {"error": str(exc)}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "analysis_report.json", report)
    print(json.dumps(report["gg_fit"], indent=1, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gridqec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gridqec {__version__} (schema {SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", "-c", required=True, help="experiment YAML")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--threads", type=int, default=None, help="worker processes")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--level", choices=["L1", "L2"], default=None)

    for name, kind in (
        ("simulate", None),
        ("optimize-circuit", "optimize"),
        ("train-rl", "rl"),
        ("wigner", "wigner"),
        ("cool", "cool"),
        ("sensitivity", "sensitivity"),
    ):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(kind=kind)

    p_an = sub.add_parser("analyze", help="fit reports from a syndrome file")
    p_an.add_argument("--syndromes", required=True)
    p_an.add_argument("--out", default="out")
    p_an.add_argument("--max-n", type=int, default=10, dest="max_n")
    p_an.add_argument("--skip-cycles", type=int, default=10, dest="skip_cycles")

    p_v = sub.add_parser("version")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(f"gridqec {__version__} (config schema {SCHEMA_VERSION})")
        return 0
    if args.command == "analyze":
        try:
            return _kind_analyze(args)
        except (OSError, GridQecError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    overrides = {}
    for key in ("seed", "threads", "out", "level"):
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    if args.kind is not None:
        overrides["kind"] = args.kind
    return run(args.config, overrides)


if __name__ == "__main__":
    sys.exit(main())
