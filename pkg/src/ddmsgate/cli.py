"""Command-line front end.

    ddmsgate simulate --config gate.toml
    ddmsgate figure fig5b [--config overrides.toml]
    ddmsgate zeeman --table transitions.csv [--config drive.toml]
    ddmsgate sweep --config sweep.toml

Outputs go to ``--out-dir`` (default: $DDMSGATE_OUT_DIR or ./ddmsgate-out),
each run adding a ``manifest.json``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, dynamics, noise, zeeman
from .config import SWEEP_AXES, RunConfig, bundled_config, load_config, parse_config
from .io import RunManifest, csv_text, json_text, sha256_bytes, tool_version, write_text
from .model import ConfigError, compile_gate, gate_time, total_time
from .operators import HilbertSpec, fock_populations

OUT_DIR_ENV = "DDMSGATE_OUT_DIR"
DEFAULT_OUT_DIR = "ddmsgate-out"
FIGURES = ("fig2a", "fig2b", "fig3a", "fig3b", "fig5a", "fig5b", "table2")
TWO_PI = 2 * np.pi


class Run:
    """Collects outputs for one command and writes the manifest last."""

    def __init__(self, command: str, args, cfg: RunConfig, config_path: str):
        self.command = command
        self.out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)
        self.cfg = cfg
        self.argv = list(args.argv)
        self.config_path = config_path
        self.outputs = []

    def write(self, name: str, text: str):
        write_text(self.out_dir / name, text)
        self.outputs.append(name)

    def finish(self):
        m = RunManifest(
            command=self.command,
            config_digest=sha256_bytes(self.cfg.digest_source),
            seed=int(self.cfg.jitter.seed),
            tool_version=tool_version(),
            outputs=sorted(self.outputs),
            argv=self.argv,
            config_path=self.config_path,
        )
        write_text(self.out_dir / "manifest.json", m.to_json())
        return self.out_dir


def _load(args, default_name=None) -> tuple:
    if args.config:
        path = args.config
        cfg = load_config(path)
    elif default_name is not None:
        path = bundled_config(default_name)
        cfg = parse_config(path.read_text(encoding="utf-8"))
    else:
        cfg, path = parse_config(""), ""
    if getattr(args, "seed", None) is not None:
        cfg.jitter = replace(cfg.jitter, seed=args.seed)
        cfg.ramsey = cfg.ramsey.replace(seed=args.seed)
    if getattr(args, "shots", None) is not None:
        cfg.jitter = replace(cfg.jitter, shots=args.shots)
        cfg.ramsey = cfg.ramsey.replace(shots=args.shots)
    return cfg, str(path)


def _pop_row(state, spec):
    p = analysis.populations(state).as_array()
    nbar = float(np.arange(spec.fock_dim) @ fock_populations(state, spec))
    return list(p) + [nbar, dynamics.spin_purity(state, spec.fock_dim)]


# commands -----------------------------------------------------------------


def cmd_simulate(args) -> Path:
    cfg, path = _load(args)
    gate = cfg.gate.validate()
    run = Run("simulate", args, cfg, path)
    opts = cfg.solver
    if opts.samples_per_segment == 1:
        opts = replace(opts, samples_per_segment=50)
    result = dynamics.run_gate(gate, opts)
    spec = HilbertSpec(gate.fock_dim)
    rows = [[t] + _pop_row(s, spec) for t, s in zip(result.times, result.states)]
    run.write("timeseries.csv", csv_text(["t", "p_uu", "p_ud", "p_du", "p_dd", "nbar", "spin_purity"], rows))
    final = result.final_state
    pops = analysis.populations(final)
    scan = analysis.parity_scan(final, np.linspace(0, np.pi, 32, endpoint=False))
    theta = analysis.bell_phase(final)
    summary = {
        "gate_time": gate_time(gate),
        "total_time": total_time(gate),
        "populations": dict(zip(["p_uu", "p_ud", "p_du", "p_dd"], pops.as_array())),
        "parity_amplitude": scan.fitted_amplitude,
        "fidelity": analysis.direct_fidelity(final, theta),
        "tomographic_fidelity": analysis.bell_fidelity(pops, scan.fitted_amplitude).fidelity,
        "bell_phase": theta,
        "max_top_occupancy": result.stats["max_top_occupancy"],
        "schedule": compile_gate(gate).to_dict(),
    }
    run.write("final.json", json_text(summary))
    return run.finish()


def _figure_values(fig: dict, key: str, default):
    v = fig.get(key, default)
    if isinstance(v, dict):
        return np.linspace(v["start"], v["stop"], int(v["points"])).tolist()
    return list(v) if isinstance(v, (list, tuple)) else v


def _fig2a(run: Run):
    cfg, fig = run.cfg, run.cfg.figure
    gate = cfg.gate.validate()
    fixed = total_time(gate)
    lo = fig.get("delta_start_hz", 1100.0)
    hi = fig.get("delta_stop_hz", 1360.0)
    grid = np.linspace(lo, hi, int(fig.get("points", 27)))
    rows = []
    for d_hz in grid:
        g = gate.replace(delta=TWO_PI * d_hz, duration=fixed)
        p2, p1, p0 = analysis.populations(dynamics.run_gate(g, cfg.solver).final_state).by_excitation()
        rows.append([float(d_hz), p2, p1, p0])
    run.write("fig2a.csv", csv_text(["delta_hz", "p2", "p1", "p0"], rows))


def _fig2b(run: Run):
    cfg, fig = run.cfg, run.cfg.figure
    gate = cfg.gate.validate()
    final = dynamics.run_gate(gate, cfg.solver).final_state
    phases = _figure_values(fig, "phases", {"start": 0.0, "stop": 2 * np.pi, "points": 41})
    scan = analysis.parity_scan(final, phases)
    rows = [[p, y, float(scan.model([p])[0])] for p, y in zip(scan.phases, scan.parities)]
    run.write("fig2b.csv", csv_text(["phase", "parity", "fit"], rows))
    pops = analysis.populations(final)
    run.write("fig2b.json", json_text({
        "parity_amplitude": scan.fitted_amplitude,
        "phase_offset": scan.fitted_phase_offset,
        "even_population": pops.even,
        "fidelity": analysis.bell_fidelity(pops, scan.fitted_amplitude).fidelity,
    }))


def _fig3a(run: Run):
    cfg, fig = run.cfg, run.cfg.figure
    phases = np.asarray(_figure_values(fig, "phases", {"start": 0.0, "stop": 2 * np.pi, "points": 25}))
    off = noise.ramsey_contrast(cfg.ramsey.replace(dd_enabled=False), phases)
    on = noise.ramsey_contrast(cfg.ramsey.replace(dd_enabled=True), phases)
    rows = [[p, a, b] for (p, a), (_, b) in zip(off.fringe, on.fringe)]
    run.write("fig3a.csv", csv_text(["phase", "p_up_no_dd", "p_up_dd"], rows))
    run.write("fig3a.json", json_text({
        "contrast_no_dd": off.contrast, "stderr_no_dd": off.stderr,
        "contrast_dd": on.contrast, "stderr_dd": on.stderr,
        "analytic_contrast_no_dd": off.analytic_contrast, "shots": off.shots,
    }))


def _fig3b(run: Run, workers: int):
    cfg, fig = run.cfg, run.cfg.figure
    sigmas = _figure_values(fig, "sigma_hz", [0.0, 5.0, 10.0, 15.0, 19.7, 25.0])
    table = noise.contrast_to_error_curve(cfg.gate, [TWO_PI * s for s in sigmas], cfg.jitter.shots,
                                          cfg.jitter.seed, cfg.solver, workers)
    rows = [[r.sigma / TWO_PI, r.contrast, r.mean_error, r.stderr, r.shots] for r in table]
    run.write("fig3b.csv", csv_text(["sigma_hz", "contrast", "ms_gate_error", "stderr", "shots"], rows))


def _fig5a(run: Run):
    cfg, fig = run.cfg, run.cfg.figure
    opts = replace(cfg.solver, samples_per_segment=int(fig.get("samples_per_segment", 100)))
    rows = []
    for scheme in fig.get("schemes", ["DDMS", "SSB"]):
        g = cfg.gate.replace(scheme=scheme)
        if scheme == "SSB" and "ssb_fock_dim" in fig:
            g = g.replace(fock_dim=int(fig["ssb_fock_dim"]))
        res = dynamics.run_gate(g.validate(), opts)
        for t, s in zip(res.times, res.states):
            rows.append([scheme, t] + list(analysis.populations(s).as_array()))
    run.write("fig5a.csv", csv_text(["scheme", "t", "p_uu", "p_ud", "p_du", "p_dd"], rows))


def _fig5b(run: Run, workers: int):
    cfg, fig = run.cfg, run.cfg.figure
    ratios = _figure_values(fig, "omega_c_over_omega", {"start": 0.0, "stop": 20.0, "points": 21})
    omega = cfg.gate.omega
    res = noise.error_vs_carrier(cfg.gate, [r * omega for r in ratios],
                                 TWO_PI * fig.get("delta_prime_hz", 20.0),
                                 tuple(fig.get("schemes", ["DDMS", "SSB"])), cfg.solver, workers)
    rows = [[r["series"], r["value"] / TWO_PI, r["value"] / omega, r["mean_error"]] for r in res.rows()]
    run.write("fig5b.csv", csv_text(["series", "omega_c_hz", "omega_c_over_omega", "gate_error"], rows))


def _budget_outputs(run: Run, entries, drive, stem: str):
    b = zeeman.budget(entries, drive)
    hz = b.in_hz()
    run.write(f"{stem}.csv", csv_text(["label", "rsb_shift_hz", "bsb_shift_hz"], hz["rows"]))
    totals = {k: v for k, v in hz.items() if k != "rows"}
    if drive is not None:
        rsb, bsb = zeeman.sideband_frequencies(drive)
        totals.update(rsb_frequency_hz=rsb / TWO_PI, bsb_frequency_hz=bsb / TWO_PI)
    run.write(f"{stem}.json", json_text(totals))


def _table2(run: Run):
    cfg = run.cfg
    path = cfg.resolve(cfg.table) if cfg.table else zeeman.bundled_table()
    _budget_outputs(run, zeeman.load_table(path), cfg.drive, "table2")


def cmd_figure(args) -> Path:
    if args.name not in FIGURES:
        raise ConfigError(f"unknown figure {args.name!r}; supported: {', '.join(FIGURES)}")
    cfg, path = _load(args, default_name=args.name)
    run = Run(f"figure {args.name}", args, cfg, path)
    workers = max(1, args.threads or 1)
    {
        "fig2a": lambda: _fig2a(run),
        "fig2b": lambda: _fig2b(run),
        "fig3a": lambda: _fig3a(run),
        "fig3b": lambda: _fig3b(run, workers),
        "fig5a": lambda: _fig5a(run),
        "fig5b": lambda: _fig5b(run, workers),
        "table2": lambda: _table2(run),
    }[args.name]()
    return run.finish()


def cmd_zeeman(args) -> Path:
    cfg, path = _load(args)
    table = args.table or cfg.table
    if not table:
        raise ConfigError("no transition table given (use --table or drive.table)")
    table_path = Path(table) if args.table else cfg.resolve(table)
    entries = zeeman.load_table(table_path)
    run = Run("zeeman", args, cfg, path)
    cfg.digest_source += b"\0" + table_path.read_bytes()
    _budget_outputs(run, entries, cfg.drive, "zeeman")
    return run.finish()


def cmd_sweep(args) -> Path:
    cfg, path = _load(args)
    values = cfg.sweep_values()
    shown = cfg.sweep_values(internal=False)
    axis = cfg.sweep["axis"]
    section, field_name, unit = SWEEP_AXES[axis]
    schemes = cfg.sweep.get("schemes", [cfg.gate.scheme])
    workers = max(1, args.threads or 1)
    run = Run("sweep", args, cfg, path)
    base = cfg.gate
    if "delta_prime_hz" in cfg.sweep:
        base = base.replace(delta_prime=TWO_PI * float(cfg.sweep["delta_prime_hz"]))
    rows = []
    for scheme in schemes:
        g0 = base.replace(scheme=scheme)
        if scheme == "MS":
            g0 = g0.replace(omega_c=0.0, refocus_pulse=False)
        theta = None if section == "gate" else noise.reference_phase(g0.validate(), cfg.solver)
        for v, v_shown in zip(values, shown):
            g, jit = g0, cfg.jitter
            if section == "gate":
                g = g.replace(**{field_name: v})
            else:
                jit = replace(jit, **{field_name: v})
            mc = noise.mc_gate_error(g.validate(), jit, cfg.solver, workers, theta)
            rows.append([axis, v_shown, scheme, mc.mean_error, mc.stderr, mc.shots])
    run.write("sweep.csv", csv_text(["axis", "value", "series", "mean_error", "stderr", "shots"], rows))
    run.write("summary.json", json_text({
        "axis": axis, "unit": unit, "config": cfg.raw,
        "points": [dict(zip(["value", "series", "mean_error", "stderr", "shots"], r[1:])) for r in rows],
    }))
    return run.finish()


# entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    common.add_argument("--seed", type=int, help="override the random seed")
    common.add_argument("--shots", type=int, help="override the Monte-Carlo shot count")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")

    p = argparse.ArgumentParser(prog="ddmsgate", description="Decoupled Molmer-Sorensen gate simulations.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="evolve one gate and write its time series")
    s.set_defaults(func=cmd_simulate)
    f = sub.add_parser("figure", parents=[common], help="regenerate the data behind a figure or table")
    f.add_argument("name", help=f"one of: {', '.join(FIGURES)}")
    f.set_defaults(func=cmd_figure)
    z = sub.add_parser("zeeman", parents=[common], help="a.c. Zeeman shift budget from a transition table")
    z.add_argument("--table", help="transition table CSV")
    z.set_defaults(func=cmd_zeeman)
    w = sub.add_parser("sweep", parents=[common], help="gate error along one parameter axis")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    if args.shots is not None and args.shots < 1:
        parser.error("--shots must be >= 1")
    try:
        out = args.func(args)
    except (ConfigError, zeeman.TableError, zeeman.ResonanceError, dynamics.TruncationError,
            dynamics.IntegrationError, noise.ShotError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
