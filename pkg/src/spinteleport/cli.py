"""Command-line front end.

Subcommands: ``analytic``, ``mc``, ``sweep``, ``swap``, ``calibrate``.
Exit status is 0 on success, 2 for configuration errors and 3 when a Monte
Carlo run fails its statistical comparison with the closed forms.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings

import numpy as np

from . import protocol
from .config import ConfigError, ScenarioConfig, load_config
from .montecarlo import MonteCarloError, compare_run, set_threads, write_trajectory_csv
from .states import is_entangled, validate_small_tilt

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STATS = 3


def fmt(v) -> str:
    """12 significant digits; empty string for missing values."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".12g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])


def print_table(header, rows, out=None) -> None:
    out = out or sys.stdout
    cells = [list(header)] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for k, r in enumerate(cells):
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)
        if k == 0:
            print("  ".join("-" * w for w in widths), file=out)


class Units:
    """Shot-noise units by default; spin units (J) with --raw-spin."""

    def __init__(self, raw: bool, n_atoms: float):
        self.raw = raw
        self.var_scale = n_atoms / 4 if raw else 1.0
        self.mean_scale = math.sqrt(n_atoms / 4) if raw else 1.0
        self.label = "spin units" if raw else "shot-noise units"

    def var(self, v):
        return None if v is None else v * self.var_scale

    def mean(self, v):
        return None if v is None else v * self.mean_scale


def _load(args) -> ScenarioConfig:
    return load_config(args.config) if args.config else ScenarioConfig().validate()


def _warn_tilt(cfg: ScenarioConfig) -> None:
    for msg in validate_small_tilt(cfg.input_state(), cfg["n_atoms"]):
        print(f"warning: {msg}", file=sys.stderr)


def _analytic_row(cfg, report, units, param_value=None):
    out = report.output_state
    return [cfg["n_atoms"], report.params.cooperativity, report.params.gamma0 / (2 * math.pi),
            report.params.squeezing_r, report.params.gain_g, report.eta,
            units.mean(out.mean_x), units.mean(out.mean_y), units.var(out.var_x), units.var(out.var_y),
            units.var(out.cov_xy), units.var(report.n_x), units.var(report.n_y), units.var(report.v_q),
            report.fidelity_coherent]


ANALYTIC_HEADER = ["n_atoms", "cooperativity", "gamma0_hz", "squeezing_r", "gain_g", "eta",
                   "mean_x_out", "mean_y_out", "var_x_out", "var_y_out", "cov_xy_out",
                   "n_x", "n_y", "v_q", "fidelity"]


def cmd_analytic(args) -> int:
    cfg = _load(args)
    _warn_tilt(cfg)
    units = Units(args.raw_spin, cfg["n_atoms"])
    report = protocol.teleport_moments(cfg.params(), cfg.input_state(), cfg["input.excess_noise"])
    row = _analytic_row(cfg, report, units)
    print(f"teleportation, closed form ({units.label})")
    print_table(["quantity", "value"], [[h, v] for h, v in zip(ANALYTIC_HEADER, row)])
    verdict = "beats" if report.v_q < 2 else "does not beat"
    print(f"V_q = {fmt(report.v_q)} {verdict} the classical limit 2")
    if args.csv:
        write_csv(args.csv, ANALYTIC_HEADER, [row])
    return EXIT_OK


MC_HEADER = ["moment", "estimate", "se", "analytic", "allowance", "z", "z_adjusted", "pass"]


def cmd_mc(args) -> int:
    cfg = _load(args)
    _warn_tilt(cfg)
    if cfg["input.excess_noise"] != 0:
        raise ConfigError(f"{cfg.where('input.excess_noise')}: not supported by the Monte Carlo engine")
    units = Units(args.raw_spin, cfg["n_atoms"])
    tcfg = cfg.trajectory_config(seed=args.seed)
    if args.threads is not None:
        set_threads(args.threads)
    params, state = cfg.params(), cfg.input_state()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=UserWarning)
        est, report, _ = compare_run(params, state, tcfg, backend=args.backend)
    from .montecarlo import compare_to_analytic

    cmp = compare_to_analytic(est, report, bias_allowance=cfg["mc.bias_allowance"])
    rows = []
    for r in cmp.rows:
        scale = units.mean if r.name.startswith("mean") else units.var
        rows.append([r.name, scale(r.estimate), scale(r.se), scale(r.analytic), scale(r.allowance),
                     r.z, r.z_adjusted, r.ok])
    print(f"Monte Carlo: {est.n_traj} trajectories, dt = {fmt(tcfg.dt)}/gamma0, "
          f"t_max = {fmt(tcfg.t_max)}/gamma0, seed = {tcfg.seed} ({units.label})")
    if est.n_invalid:
        print(f"invalid trajectories: {est.n_invalid}")
    print_table(MC_HEADER, rows)
    print("comparison with closed form:", "PASS" if cmp.passed else "FAIL")
    if args.csv:
        write_csv(args.csv, MC_HEADER, rows)
    if args.dump:
        write_trajectory_csv(est.samples, args.dump)
    return EXIT_OK if cmp.passed else EXIT_STATS


SWEEP_HEADER = ["parameter", "eta", "n_x", "n_y", "v_q", "fidelity"]


def sweep_grid(cfg: ScenarioConfig) -> np.ndarray:
    start, stop = cfg["sweep.start"], cfg["sweep.stop"]
    name = cfg.sweep_parameter()
    if start is None:
        start = cfg[name]
    if stop is None:
        stop = start
    n = int(cfg["sweep.points"])
    if n == 1:
        return np.array([float(start)])
    if cfg["sweep.scale"] == "log":
        return np.geomspace(start, stop, n)
    return np.linspace(start, stop, n)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    name = cfg.sweep_parameter()
    units = Units(args.raw_spin, cfg["n_atoms"])
    state = cfg.input_state()
    rows = []
    for value in sweep_grid(cfg):
        report = protocol.teleport_moments(cfg.params(**{name: float(value)}), state,
                                           cfg["input.excess_noise"])
        rows.append([float(value), report.eta, units.var(report.n_x), units.var(report.n_y),
                     units.var(report.v_q), report.fidelity_coherent])
    print(f"sweep over {name} ({units.label})")
    print_table(SWEEP_HEADER, rows)
    if args.csv:
        write_csv(args.csv, SWEEP_HEADER, rows)
    return EXIT_OK


SWAP_HEADER = ["r01", "r23", "eta", "gain_g", "inseparability", "entangled"]


def cmd_swap(args) -> int:
    cfg = _load(args)
    params = cfg.params()
    eta = protocol.params_coefficients(params).eta
    value = protocol.entanglement_swap(cfg["swap.r01"], cfg["swap.r23"], eta, params.gain_g)
    row = [cfg["swap.r01"], cfg["swap.r23"], eta, params.gain_g, value, is_entangled(value)]
    print("entanglement swapping: inseparability of ensembles 0 and 3")
    print_table(SWAP_HEADER, [row])
    print("entangled" if is_entangled(value) else "separable")
    if args.csv:
        write_csv(args.csv, SWAP_HEADER, [row])
    return EXIT_OK


CAL_HEADER = ["n_atoms", "gamma0_hz", "gyromagnetic_hz_per_gauss", "theta_rad", "larmor_omega_rad_s",
              "larmor_hz", "b_gauss", "b_milligauss"]


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    cal = protocol.calibrate_magnetic_field(cfg["n_atoms"], cfg.gamma0,
                                            cfg["calibration.gyromagnetic_hz_per_gauss"])
    row = [cfg["n_atoms"], cfg["gamma0_hz"], cal.gyromagnetic, cal.rotation_theta, cal.larmor_omega,
           cal.larmor_hz, cal.b_amplitude, cal.b_milligauss]
    print("unity-gain magnetic feedback calibration")
    print_table(["quantity", "value"], [[h, v] for h, v in zip(CAL_HEADER, row)])
    if args.csv:
        write_csv(args.csv, CAL_HEADER, [row])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file (key = value lines)")
    common.add_argument("--csv", metavar="PATH", help="also write results as CSV")
    common.add_argument("--seed", type=int, help="override mc.seed")
    common.add_argument("--raw-spin", action="store_true", help="report spin units instead of shot-noise units")

    parser = argparse.ArgumentParser(prog="spinteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="closed-form output moments").set_defaults(func=cmd_analytic)
    p = sub.add_parser("mc", parents=[common], help="Monte Carlo run checked against the closed form")
    p.add_argument("--threads", type=int, help="numba worker threads")
    p.add_argument("--backend", choices=["numba", "numpy"], help="kernel implementation")
    p.add_argument("--dump", metavar="PATH", help="write one CSV row per trajectory")
    p.set_defaults(func=cmd_mc)
    sub.add_parser("sweep", parents=[common], help="equivalent input noise over a parameter grid").set_defaults(func=cmd_sweep)
    sub.add_parser("swap", parents=[common], help="entanglement swapping").set_defaults(func=cmd_swap)
    sub.add_parser("calibrate", parents=[common], help="magnetic field for unity gain").set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError included
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MonteCarloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS


if __name__ == "__main__":
    sys.exit(main())
