"""Command-line front end: ``crow bands|susceptibility|store|estimate``.

Exit status: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, preset_config
from .dynamics import RampSchedule, adiabaticity_margin, make_gaussian_pulse, run_storage_protocol
from .errors import ConfigError, NoWindowFound
from .model import KGrid, assemble_mode_matrix
from .presets import preset_names
from .response import find_transparency_window, susceptibility_scan_delta, susceptibility_scan_J
from .spectra import band_structure, group_velocity, polariton_branches

log = logging.getLogger("crow")

EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path: Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _kvalues(cfg: RunConfig) -> np.ndarray:
    grid = cfg.section("grid")
    n = grid.get("n_modes", 201)
    if n < 2:
        raise UsageError("[grid] n_modes: need at least 2 points")
    if "k_min" in grid or "k_max" in grid:
        lo = grid.get("k_min", -math.pi / cfg.params.ell)
        hi = grid.get("k_max", math.pi / cfg.params.ell)
        if not lo < hi:
            raise UsageError(f"[grid] empty k-range: k_min={lo} >= k_max={hi}")
        return np.linspace(lo, hi, n)
    return KGrid(n, cfg.params.ell).values


def cmd_bands(cfg: RunConfig, out: Path) -> dict:
    k = _kvalues(cfg)
    bands = band_structure(k, cfg.params)
    header = ["k", "lambda_1", "lambda_2", "lambda_3"]
    header += [f"d{j}_{i}" for j in (1, 2, 3) for i in (1, 2, 3)]
    comps = bands.vectors.transpose(0, 2, 1).reshape(len(k), 9)
    write_csv(out / "bands.csv", header, np.column_stack([bands.k, bands.eigenvalues, comps]))
    return {"bandwidths": [float(w) for w in bands.bandwidths]}


def cmd_susceptibility(cfg: RunConfig, out: Path) -> dict:
    scan = cfg.section("scan")
    if not scan:
        raise UsageError("missing [scan] block")
    variable = scan.get("variable", "delta")
    if variable not in ("delta", "J"):
        raise UsageError(f"[scan] variable: must be 'delta' or 'J', got {variable!r}")
    lo, hi, n = scan.get("min"), scan.get("max"), scan.get("n_points", 1001)
    if lo is None or hi is None:
        raise UsageError("[scan] min and max are required")
    if not lo < hi:
        raise UsageError(f"[scan] malformed range: min={lo} >= max={hi}")
    if n < 2:
        raise UsageError("[scan] n_points: need at least 2")
    k = scan.get("k", cfg.params.k0)
    scanner = susceptibility_scan_delta if variable == "delta" else susceptibility_scan_J
    points = scanner(k, cfg.params, (lo, hi), n)
    write_csv(out / "susceptibility.csv", ["scan_var", "chi_r", "chi_i"],
              ([getattr(s, variable), s.chi_r, s.chi_i] for s in points))
    summary = {"variable": variable, "k": k, "singular_points": sum(s.singular for s in points)}
    try:
        w = find_transparency_window(points, variable)
        summary["window"] = {"center": w.center, "width": w.width, "residual": w.residual}
    except NoWindowFound:
        summary["window"] = None
    write_json(out / "susceptibility.json", summary)
    return summary


def _schedule(cfg: RunConfig) -> RampSchedule:
    block = cfg.section("schedule")
    if not block:
        raise UsageError("missing [schedule] block")
    try:
        return RampSchedule(**block)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"[schedule] {exc}") from None


def cmd_store(cfg: RunConfig, out: Path) -> dict:
    schedule = _schedule(cfg)
    pulse_cfg = cfg.section("pulse")
    n = cfg.section("grid").get("n_modes", 64)
    grid = KGrid(n, cfg.params.ell)
    branch = pulse_cfg.get("branch", 2)
    p0 = schedule.initial_params(cfg.params)
    pulse = make_gaussian_pulse(grid, pulse_cfg.get("center_k", cfg.params.k0),
                                pulse_cfg.get("width_k", 0.1), branch, p0)
    report = run_storage_protocol(pulse, cfg.params, schedule, pulse_cfg.get("sample_dt", 5.0), branch)
    occupied = np.flatnonzero(np.sum(np.abs(pulse.amplitudes) ** 2, axis=1) > 1e-8)
    margin = adiabaticity_margin(cfg.params, schedule, grid, branch, modes=occupied)
    write_csv(out / "store.csv", ["t", "photon_fraction", "A_fraction", "C_fraction", "pulse_center"],
              zip(report.times, report.photon_fraction, report.a_fraction,
                  report.c_fraction, report.pulse_center))
    summary = {
        "peak_retrieval_photon_fraction": report.peak_retrieval_photon_fraction,
        "hold_photon_fraction": report.hold_photon_fraction,
        "fidelity": report.fidelity,
        "adiabaticity_margin": margin,
        "final_norm": float(report.norm[-1]),
        "velocity_estimates": report.velocity_estimates,
    }
    write_json(out / "store.json", summary)
    return summary


def cmd_estimate(cfg: RunConfig, out: Path) -> dict:
    if cfg.units != "SI":
        raise UsageError("estimate needs SI parameters: set 'units = SI' in [run]")
    p = cfg.params
    k0 = p.k0
    branches = polariton_branches(assemble_mode_matrix(k0, p), k0)
    speeds = [abs(group_velocity(b, p)) for b in branches]
    summary = {
        "G1_per_s": p.G1,
        "k0_per_m": k0,
        "group_velocity_m_per_s": {f"branch_{b.branch_index}": v for b, v in zip(branches, speeds)},
    }
    print(f"G1 = g1*sqrt(N_A) = {p.G1:.6g} 1/s")
    for b, v in zip(branches, speeds):
        print(f"branch {b.branch_index}: |v_g(k0)| = {v:.6g} m/s")
    write_json(out / "estimate.json", summary)
    return summary


COMMANDS = {
    "bands": cmd_bands,
    "susceptibility": cmd_susceptibility,
    "store": cmd_store,
    "estimate": cmd_estimate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crow", description="Slow and stopped light in an atom-doped CROW.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="key = value config file")
    parser.add_argument("--preset", help="baked-in parameter set, e.g. fig3a or store")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            cfg = load_config(args.config, command=args.command, preset=args.preset)
        elif args.preset is not None:
            cfg = preset_config(args.preset, command=args.command)
        else:
            names = ", ".join(preset_names(args.command))
            raise UsageError(f"give --config or --preset (presets for {args.command}: {names})")
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{args.command}.ini").write_text(cfg.dumps(), encoding="utf-8")
        COMMANDS[args.command](cfg, args.out)
    except (UsageError, ConfigError) as exc:
        print(f"crow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"crow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"crow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
