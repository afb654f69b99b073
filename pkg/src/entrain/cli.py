"""Command-line front end.

Subcommands:

- ``simulate``   integrate a scenario, write trajectory CSV + JSON report
- ``lyapunov``   estimate the largest Lyapunov exponent, print JSON
- ``montecarlo`` seeded sweep over random inputs/ICs, write verdicts JSONL
- ``freqresp``   tabulate the front-end filter's frequency response

Exit codes: 0 success, 2 bad arguments, 3 integration failure (the message
names the last time the integrator reached). ``--out-dir`` defaults to the
``ENTRAIN_OUT_DIR`` environment variable, then the current directory.

Every ``simulate`` run drops a ``manifest.json`` holding all parameters and
the tool version; ``run_from_manifest`` replays it and, the integrator
being deterministic, reproduces the trajectory CSV byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    detect_steady_state,
    lyapunov_max,
    monte_carlo,
    tail_stats,
)
from .lti import has_zero_at_origin, transfer_eval
from .scenarios import DEFAULT_K, SCENARIO_IDS, build_reference_system, build_system, default_spec
from .signals import parse_input_spec
from .solver import IntegrationError, IntegratorConfig, Trajectory, integrate

__all__ = ["main", "run_from_manifest", "RunArtifacts"]

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class RunArtifacts:
    trajectory_csv_path: Path
    report_json_path: Path
    run_manifest: dict


def _write_csv(path: Path, traj: Trajectory) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("t," + ",".join(traj.state_names) + "\n")
        for t, row in zip(traj.times, traj.states):
            fields = [_FLOAT_FMT % t] + [_FLOAT_FMT % v for v in row]
            fh.write(",".join(fields) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_x0(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"could not parse --x0 {text!r} as comma-separated floats")


def _config_from(params: dict) -> IntegratorConfig:
    return IntegratorConfig(
        method=params["method"],
        rel_tol=params["rel_tol"],
        abs_tol=params["abs_tol"],
    )


def _simulate_from_params(params: dict, out_dir: Path) -> RunArtifacts:
    """Shared core of ``simulate`` and manifest replay: identical inputs
    produce identical bytes."""
    sys_obj = build_system(params["scenario"], K=params["K"])
    x0 = np.asarray(params["x0"], dtype=float)
    if x0.shape != (sys_obj.dim,):
        raise ValueError(
            f"scenario {params['scenario']!r} needs {sys_obj.dim} initial values, "
            f"got {x0.size}"
        )
    signal = parse_input_spec(params["input"])
    t0, t1 = params["t_start"], params["t_end"]
    if not t1 > t0:
        raise ValueError(f"--t-end must exceed --t-start, got {t0} .. {t1}")
    step = params["grid_step"]
    if step <= 0:
        raise ValueError(f"--grid-step must be positive, got {step}")
    grid = np.arange(t0, t1 + step / 2, step)
    cfg = _config_from(params)

    traj = integrate(sys_obj, signal, x0, (t0, t1), cfg, output_grid=grid)

    report: dict = {
        "scenario_id": sys_obj.scenario_id,
        "input_spec": signal.spec,
        "x0": list(map(float, x0)),
        "t_span": [t0, t1],
        "converged": None,
        "steady_state": None,
        "tail_stats": None,
    }
    if t1 - t0 >= 10.0:
        steady = detect_steady_state(traj)
        ss = asdict(steady)
        ss["final_state"] = list(map(float, steady.final_state))
        ss["tail_window"] = list(steady.tail_window)
        report["converged"] = steady.converged
        report["steady_state"] = ss
    if "p" in traj.state_names:
        ts = tail_stats(traj, "p")
        d = asdict(ts)
        d["window"] = list(ts.window)
        report["tail_stats"] = d

    manifest = {"tool": "entrain", "version": __version__, "command": "simulate"}
    manifest.update(params)
    manifest["x0"] = list(map(float, x0))
    manifest["csv"] = "trajectory.csv"
    manifest["report"] = "report.json"

    csv_path = out_dir / "trajectory.csv"
    report_path = out_dir / "report.json"
    _write_csv(csv_path, traj)
    _write_json(report_path, report)
    _write_json(out_dir / "manifest.json", manifest)
    return RunArtifacts(csv_path, report_path, manifest)


def run_from_manifest(manifest_path: str | Path, out_dir: str | Path | None = None) -> RunArtifacts:
    """Replay a recorded simulate run; output lands next to the manifest
    unless ``out_dir`` says otherwise."""
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("command") != "simulate":
        raise ValueError(f"manifest {manifest_path} does not describe a simulate run")
    keys = ("scenario", "K", "input", "x0", "t_start", "t_end",
            "grid_step", "rel_tol", "abs_tol", "method")
    params = {k: manifest[k] for k in keys}
    target = Path(out_dir) if out_dir is not None else manifest_path.parent
    target.mkdir(parents=True, exist_ok=True)
    return _simulate_from_params(params, target)


def _cmd_simulate(args) -> int:
    spec = default_spec(args.scenario)
    params = {
        "scenario": args.scenario,
        "K": DEFAULT_K[args.scenario] if args.K is None else args.K,
        "input": spec.input_spec if args.input is None else args.input,
        "x0": list(spec.x0) if args.x0 is None else list(_parse_x0(args.x0)),
        "t_start": args.t_start,
        "t_end": spec.t_span[1] if args.t_end is None else args.t_end,
        "grid_step": args.grid_step,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
        "method": args.method,
    }
    artifacts = _simulate_from_params(params, _out_dir(args))
    with open(artifacts.report_json_path) as fh:
        converged = json.load(fh)["converged"]
    print(f"wrote {artifacts.trajectory_csv_path}")
    print(f"wrote {artifacts.report_json_path}")
    print(f"converged: {converged}")
    return 0


def _cmd_lyapunov(args) -> int:
    cfg = IntegratorConfig(method=args.method, rel_tol=args.rel_tol,
                           abs_tol=args.abs_tol)
    if args.system is not None:
        sys_obj, x0_default = build_reference_system(args.system)
        signal = parse_input_spec("const:0")
    else:
        if args.scenario is None:
            raise ValueError("lyapunov needs --scenario or --system")
        sys_obj = build_system(args.scenario, K=args.K)
        x0_default = default_spec(args.scenario).x0
        signal = parse_input_spec(args.input)
    x0 = np.asarray(x0_default if args.x0 is None else _parse_x0(args.x0), dtype=float)

    est = lyapunov_max(sys_obj, signal, x0, cfg)
    print(json.dumps(asdict(est)))
    return 0


def _cmd_montecarlo(args) -> int:
    rows = monte_carlo(args.scenario, args.n, seed=args.seed, jobs=args.jobs,
                       cfg=IntegratorConfig(method=args.method,
                                            rel_tol=args.rel_tol,
                                            abs_tol=args.abs_tol))
    out = _out_dir(args)
    path = out / "verdicts.jsonl"
    with open(path, "w", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row.to_json_dict()) + "\n")

    const_counts = Counter(r.verdict_const for r in rows)
    sin_counts = Counter(r.verdict_sin for r in rows)

    def fmt(counts: Counter) -> str:
        return ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))

    print(f"wrote {path}")
    print(f"summary (n={args.n}, seed={args.seed}): "
          f"const[{fmt(const_counts)}] sin[{fmt(sin_counts)}]")
    return 0


def _cmd_freqresp(args) -> int:
    from .scenarios import front_end

    filt = front_end(args.scenario)
    zero = has_zero_at_origin(filt)
    w0 = abs(transfer_eval(filt, 0.0))
    print(f"zero at origin: {'yes' if zero else 'no'} (|W(0)| = {w0:.3e})")
    print("omega,magnitude,phase")
    for omega in np.logspace(-2, 2, 41):
        mag, phase = abs(transfer_eval(filt, 1j * omega)), np.angle(
            transfer_eval(filt, 1j * omega))
        print(f"{omega:.6g},{mag:.10g},{phase:.10g}")
    return 0


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--method", choices=("rk45_adaptive", "rk4_fixed"),
                   default="rk45_adaptive")
    p.add_argument("--out-dir", default=os.environ.get("ENTRAIN_OUT_DIR", "."),
                   help="output directory (default: $ENTRAIN_OUT_DIR or .)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrain",
        description="Simulate forced cascades that settle under constant "
                    "inputs yet stay chaotic under periodic ones.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate and write CSV + report")
    sim.add_argument("--scenario", required=True, choices=SCENARIO_IDS)
    sim.add_argument("--input", default=None,
                     help="const:<c> | sin:<amp>:<omega>[:<phase>] | file:<path>")
    sim.add_argument("--x0", default=None, help="comma-separated initial state")
    sim.add_argument("--t-start", type=float, default=0.0)
    sim.add_argument("--t-end", type=float, default=None)
    sim.add_argument("--grid-step", type=float, default=0.01)
    sim.add_argument("--K", type=float, default=None,
                     help="saturation constant (default: scenario preset)")
    _add_common_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    lya = sub.add_parser("lyapunov", help="largest Lyapunov exponent as JSON")
    lya.add_argument("--scenario", choices=SCENARIO_IDS, default=None)
    lya.add_argument("--system", choices=("lorenz",), default=None,
                     help="bare reference system instead of a scenario")
    lya.add_argument("--input", default="sin:1:1")
    lya.add_argument("--x0", default=None)
    lya.add_argument("--K", type=float, default=None)
    _add_common_flags(lya)
    lya.set_defaults(func=_cmd_lyapunov)

    mc = sub.add_parser("montecarlo", help="random input/IC sweep to JSONL")
    mc.add_argument("--scenario", required=True, choices=SCENARIO_IDS)
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--jobs", type=int, default=1)
    _add_common_flags(mc)
    mc.set_defaults(func=_cmd_montecarlo)

    fr = sub.add_parser("freqresp", help="front-end filter frequency response")
    fr.add_argument("--scenario", choices=SCENARIO_IDS, default="example1")
    fr.set_defaults(func=_cmd_freqresp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        # The solver reports non-finite states itself; numpy's element-wise
        # overflow warnings would only add noise on top of exit code 3.
        with np.errstate(all="ignore"):
            return args.func(args)
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
