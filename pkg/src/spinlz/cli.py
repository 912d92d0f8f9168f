"""Command-line experiment runner and reproduction harness.

Subcommands: ``analytic``, ``tables``, ``simulate``, ``reproduce-fig1``,
``adiabatic``.  Every run writes a manifest tying the emitted artifacts to
the exact configuration, seed and code version.  Exit codes: 0 success,
2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from math import exp, pi, sqrt
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import AdiabaticConfig, adiabatic_survival
from .averaged import rational_table, transition_probability_matrix
from .config import build_noise, config_snapshot, parse_config, parse_document
from .errors import ConfigError, NumericError, SpinLZError
from .lz_analytic import LZParams
from .noise import NoiseSpec, theta as noise_theta
from .propagator import ExperimentConfig, run_ensemble
from .spin_algebra import SpinValue

_FIG1_THETAS = (0.0, 0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
_FIG1_LAMBDA = 125.0


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _m_label(spin: SpinValue, index: int) -> str:
    two_m = spin.two_s - 2 * index
    if two_m == 0:
        return "0"
    if two_m % 2 == 0:
        return f"{two_m // 2:+d}"
    return f"{two_m:+d}/2"


def _write_manifest(out_dir: Path, command: str, cfg_dict, seed, outputs,
                    wall_time: float) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": cfg_dict,
        "master_seed": seed,
        "wall_time_s": wall_time,
        "outputs": [str(p) for p in outputs],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _rational_text(spin: SpinValue) -> str:
    table = rational_table(spin)
    d = spin.dimension
    lines = [f"# transition probabilities at gamma = 0, S = {spin}",
             "# P(j -> j') = 1/(2S+1) + sum_s c_s E_s,  E_s = exp(-s(s+1) theta/2)"]
    for j in range(d):
        for i in range(d):
            terms = [str(Fraction(table[i, j, 0]))]
            for s in range(1, spin.two_s + 1):
                c = table[i, j, s]
                if c != 0:
                    sign = "+" if c > 0 else "-"
                    terms.append(f"{sign} {abs(c)} E{s}")
            lines.append(
                f"P({_m_label(spin, j)} -> {_m_label(spin, i)}) = " + " ".join(terms))
    return "\n".join(lines) + "\n"


def cmd_analytic(spin: SpinValue, gamma: float, theta: float, out_dir: Path,
                 seed: int = 0) -> list:
    """Transition matrix as CSV, plus exact rationals at gamma = 0, S <= 4."""
    t0 = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    tm = transition_probability_matrix(spin, gamma, theta)
    csv_path = out_dir / "analytic_transitions.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m_from", "m_to", "probability"])
        d = spin.dimension
        for j in range(d):
            for i in range(d):
                w.writerow([_m_label(spin, j), _m_label(spin, i), _fmt(tm.P[i, j])])
    outputs = [csv_path]
    if gamma == 0.0 and spin.two_s <= 8:
        txt_path = out_dir / "analytic_table.txt"
        txt_path.write_text(_rational_text(spin))
        outputs.append(txt_path)
    cfg = {"spin": spin.spin, "gamma": gamma, "theta": theta}
    outputs.append(_write_manifest(out_dir, "analytic", cfg, seed, outputs,
                                   time.time() - t0))
    return outputs


def cmd_tables(out_dir: Path) -> list:
    """Exact-rational tables for S = 1, 3/2 and 2."""
    t0 = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for two_s in (2, 3, 4):
        spin = SpinValue(two_s)
        name = f"table_spin_{two_s}over2.txt" if two_s % 2 else f"table_spin_{two_s // 2}.txt"
        path = out_dir / name
        path.write_text(_rational_text(spin))
        outputs.append(path)
    outputs.append(_write_manifest(out_dir, "tables", {}, 0, outputs,
                                   time.time() - t0))
    return outputs


def _analytic_reference(cfg: ExperimentConfig) -> dict:
    gamma = LZParams.from_fields(cfg.b_x, cfg.sweep_rate).gamma
    th = noise_theta(cfg.spec, cfg.sweep_rate)
    tm = transition_probability_matrix(cfg.spin, gamma, th)
    init = cfg.initial_state
    ref = {"gamma": gamma, "theta": th}
    if np.isscalar(init):
        j = (cfg.spin.two_s - round(2 * float(init))) // 2
        ref["initial_m"] = float(init)
        ref["transition_probabilities"] = [float(x) for x in tm.P[:, j]]
    return ref


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, threads: int = 1) -> list:
    """Run one ensemble; emit time series CSV, finals JSON and manifest."""
    t0 = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_ensemble(cfg, threads=threads)
    d = cfg.spin.dimension
    ts_path = out_dir / "timeseries.csv"
    with ts_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        labels = [_m_label(cfg.spin, k) for k in range(d)]
        w.writerow(["t"] + [f"p[{m}]" for m in labels] + [f"se[{m}]" for m in labels])
        for i, t in enumerate(result.times):
            w.writerow([_fmt(t)] + [_fmt(x) for x in result.pop_mean[i]]
                       + [_fmt(x) for x in result.pop_se[i]])
    finals = {
        "manifest": {"command": "simulate", "version": __version__,
                     "master_seed": cfg.master_seed},
        "results": {
            "P_hat": [float(x) for x in result.final_mean],
            "std_error": [float(x) for x in result.final_se],
            "variance": [float(x) for x in result.pop_var[-1]],
            "n_realizations": result.n_realizations,
            "norm_drift_max": result.norm_drift_max,
            "tail_exponent_bound": result.tail_bound,
        },
        "analytic_reference": _analytic_reference(cfg),
    }
    js_path = out_dir / "finals.json"
    js_path.write_text(json.dumps(finals, indent=2, sort_keys=True) + "\n")
    outputs = [ts_path, js_path]
    outputs.append(_write_manifest(out_dir, "simulate", config_snapshot(cfg),
                                   cfg.master_seed, outputs, time.time() - t0))
    return outputs


def fig1_configs(ensemble: int, seed: int, thetas=_FIG1_THETAS):
    """Spin-1 benchmark configs: H = t S_z + eta_x S_x, lambda = 125."""
    spin = SpinValue(2)
    tau = 1.0 / _FIG1_LAMBDA
    for k, th in enumerate(thetas):
        j = sqrt(th / pi)
        spec = NoiseSpec(j_x=j, tau_x=tau) if j > 0 else NoiseSpec()
        yield th, j, ExperimentConfig(
            spin=spin, sweep_rate=1.0, b_x=0.0, spec=spec,
            ensemble_size=ensemble if j > 0 else 1,
            master_seed=seed + k, initial_state=1.0, store_points=2)


def cmd_reproduce_fig1(out_dir: Path, ensemble: int = 200, seed: int = 1723,
                       threads: int = 1, thetas=_FIG1_THETAS) -> list:
    """Sweep the noise amplitude and compare MC with the rank-decay table."""
    t0 = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    spin = SpinValue(2)
    rows = []
    for th, j, cfg in fig1_configs(ensemble, seed, thetas):
        if j == 0.0:
            # diagonal Hamiltonian: populations are frozen exactly
            for k in range(3):
                rows.append([0.0, 0.0, _m_label(spin, k), 1.0 if k == 0 else 0.0,
                             0.0, 1.0 if k == 0 else 0.0])
            continue
        tm = transition_probability_matrix(spin, 0.0, th)
        result = run_ensemble(cfg, threads=threads)
        for k in range(3):
            rows.append([j, th, _m_label(spin, k), result.final_mean[k],
                         result.final_se[k], tm.P[k, 0]])
    path = out_dir / "fig1.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["J", "theta", "m_final", "p_mc", "se", "p_analytic"])
        for row in rows:
            w.writerow([_fmt(row[0]), _fmt(row[1]), row[2]] + [_fmt(x) for x in row[3:]])
    cfg_dict = {"ensemble": ensemble, "lambda": _FIG1_LAMBDA,
                "thetas": list(thetas), "initial_m": 1}
    outputs = [path]
    outputs.append(_write_manifest(out_dir, "reproduce-fig1", cfg_dict, seed,
                                   outputs, time.time() - t0))
    return outputs


def cmd_adiabatic(spec: NoiseSpec, sweep_rate: float, out_dir: Path,
                  bxtau_min: float = 1e-3, bxtau_max: float = 30.0,
                  points: int = 13) -> list:
    """Survival factor over a log grid of b_x tau_n, with e^-theta reference."""
    t0 = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    tau = spec.tau_max
    if tau is None:
        raise ConfigError("adiabatic sweep needs at least one active noise axis",
                          path="noise")
    th = noise_theta(spec, sweep_rate)
    path = out_dir / "adiabatic.csv"
    grid = np.geomspace(bxtau_min, bxtau_max, points)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bx_tau", "survival", "exp_minus_theta"])
        for bxtau in grid:
            cfg = AdiabaticConfig(b_x=bxtau / tau, sweep_rate=sweep_rate, spec=spec)
            w.writerow([_fmt(bxtau), _fmt(adiabatic_survival(cfg)), _fmt(exp(-th))])
    cfg_dict = {"sweep_rate": sweep_rate, "theta": th,
                "bxtau_min": bxtau_min, "bxtau_max": bxtau_max, "points": points}
    outputs = [path]
    outputs.append(_write_manifest(out_dir, "adiabatic", cfg_dict, 0, outputs,
                                   time.time() - t0))
    return outputs


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinlz", description=__doc__)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="closed-form transition matrix")
    pa.add_argument("--spin", type=float, required=True)
    pa.add_argument("--gamma", type=float, default=0.0)
    pa.add_argument("--theta", type=float, default=0.0)

    sub.add_parser("tables", help="exact-rational tables for S = 1, 3/2, 2")

    ps = sub.add_parser("simulate", help="run one Monte Carlo ensemble")
    ps.add_argument("--config", type=Path, required=True)

    pf = sub.add_parser("reproduce-fig1", help="spin-1 noise-amplitude sweep")
    pf.add_argument("--ensemble", type=int, default=200)
    pf.add_argument("--points", type=int, default=8)

    pd = sub.add_parser("adiabatic", help="adiabatic survival sweep")
    pd.add_argument("--config", type=Path, required=True,
                    help="config with sweep_rate and noise.* keys")
    pd.add_argument("--min", dest="bxtau_min", type=float, default=1e-3)
    pd.add_argument("--max", dest="bxtau_max", type=float, default=30.0)
    pd.add_argument("--points", type=int, default=13)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analytic":
            cmd_analytic(SpinValue.from_spin(args.spin), args.gamma, args.theta,
                         args.out, seed=args.seed or 0)
        elif args.command == "tables":
            cmd_tables(args.out)
        elif args.command == "simulate":
            cfg = parse_config(args.config.read_text())
            if args.seed is not None:
                cfg.master_seed = args.seed
            cmd_simulate(cfg, args.out, threads=args.threads)
        elif args.command == "reproduce-fig1":
            thetas = tuple(np.linspace(0.0, 3.0, args.points)) \
                if args.points != 8 else _FIG1_THETAS
            cmd_reproduce_fig1(args.out, ensemble=args.ensemble,
                               seed=1723 if args.seed is None else args.seed,
                               threads=args.threads, thetas=thetas)
        elif args.command == "adiabatic":
            values = parse_document(args.config.read_text())
            if "sweep_rate" not in values:
                raise ConfigError("required key missing", path="sweep_rate")
            cmd_adiabatic(build_noise(values), values["sweep_rate"], args.out,
                          args.bxtau_min, args.bxtau_max, args.points)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except SpinLZError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
