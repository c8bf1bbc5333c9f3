"""Command-line entry point.

    condemit couplings  --config exp.ini
    condemit g3-map     --config exp.ini --out results/ --workers 4
    condemit rate-scan  --config exp.ini --out results/
    condemit g1-pattern --config exp.ini --out results/

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure,
4 non-finite numerical result.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod
from ._accel import backend_name
from .analysis import normalize_rows, parallel_rows, scan_rates
from .correlations import conditioned_coherences, free_coherences, intensity_map
from .coupling import pair_couplings

log = logging.getLogger("condemit")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class NumericalError(RuntimeError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, scientific notation; non-finite as empty field."""
    return f"{x:.16e}" if np.isfinite(x) else ""


def _check_finite(name: str, arr) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {name}")


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _couplings_payload(cfg, couplings):
    return [{"pair": [c.pair[0] + 1, c.pair[1] + 1], "delta_omega": c.delta_omega,
             "delta_gamma": c.delta_gamma, "psi": c.psi, "k0_r": c.k0_r,
             "zeroed_by_paper_mode": bool(cfg.paper_mode and 2 in c.pair)}
            for c in couplings]


def _write_manifest(path: Path, cfg, couplings, extra=None) -> None:
    manifest = {
        "code_version": __version__,
        "kernel_backend": backend_name(),
        "config": cfg.to_dict(),
        "config_text": cfgmod.dumps(cfg),
        "couplings": _couplings_payload(cfg, couplings),
    }
    manifest.update(extra or {})
    _write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _require_three(cfg, what):
    if cfg.n_atoms != 3:
        raise cfgmod.ConfigError("n_atoms", f"{what} requires 3 atoms")


def run_couplings(cfg, stream=None) -> str:
    stream = stream or sys.stdout
    ens = cfg.ensemble()
    couplings = pair_couplings(ens, paper_mode=False)
    g = ens.gamma
    lines = [f"# couplings in units of gamma (paper_mode={'on' if cfg.paper_mode else 'off'})",
             "pair  psi_rad  k0R  delta_omega  delta_gamma  Gamma_s  Gamma_a  note"]
    for c in couplings:
        zeroed = cfg.paper_mode and 2 in c.pair
        dg, do = c.delta_gamma / g, c.delta_omega / g
        note = "zeroed (paper_mode)" if zeroed else "active"
        lines.append(f"({c.pair[0] + 1},{c.pair[1] + 1})  {c.psi:.6f}  {c.k0_r:.6f}  "
                     f"{do:.6f}  {dg:.6f}  {2 * (1 + dg):.6f}  {2 * (1 - dg):.6f}  {note}")
    if not couplings:
        lines.append("(single atom: no pairs)")
    text = "\n".join(lines) + "\n"
    stream.write(text)
    return text


def run_g3_map(cfg, out_dir=None, workers=None) -> dict:
    _require_three(cfg, "g3-map")
    out = Path(out_dir or cfg.out_dir)
    workers = workers or cfg.resolved_workers()
    ens = cfg.ensemble()
    couplings = pair_couplings(ens, cfg.paper_mode)
    angles = cfg.phi3_grid.values()
    tau = cfg.t3_grid.values()
    coh = conditioned_coherences(ens, couplings, cfg.phi1_rad, cfg.phi2_rad, tau / ens.gamma)
    raw = parallel_rows(lambda sl: intensity_map(ens, coh, angles[sl]), len(angles), workers)
    _check_finite("g3", raw)
    norm, ok = normalize_rows(raw)

    rows = ["phi3,t3,g3_raw,g3_normalized"]
    for i, phi in enumerate(angles):
        for j, t in enumerate(tau):
            rows.append(f"{fmt(phi)},{fmt(t)},{fmt(raw[i, j])},{fmt(norm[i, j]) if ok[i] else ''}")
    data_path = out / "g3_map.csv"
    _write_text(data_path, "\n".join(rows) + "\n")
    _write_manifest(out / "g3_map.manifest.json", cfg, couplings, {
        "data_file": data_path.name,
        "not_normalizable_phi3": [float(a) for a in angles[~ok]],
        "workers": workers,
    })
    return {"data": data_path, "raw": raw, "normalized": norm, "angles": angles, "times": tau}


def run_rate_scan(cfg, out_dir=None, workers=None) -> dict:
    out = Path(out_dir or cfg.out_dir)
    workers = workers or cfg.resolved_workers()
    ens = cfg.ensemble()
    couplings = pair_couplings(ens, cfg.paper_mode)
    scan = scan_rates(ens, couplings, cfg.phi1_rad, cfg.phi2_rad, cfg.phi3_grid.values(),
                      cfg.fit_window, cfg.fit_samples, workers)

    rows = ["phi3,gamma_eff_3,gamma_eff_1,residual_3,residual_1,status"]
    for k, phi in enumerate(scan.angles):
        bad = [f"g3_{s.split(':', 1)[1]}" for s in [scan.status3[k]] if s != "ok"]
        bad += [f"g1_{s.split(':', 1)[1]}" for s in [scan.status1[k]] if s != "ok"]
        status = ";".join(bad) if bad else "ok"
        rows.append(",".join([fmt(phi), fmt(scan.rates3[k]), fmt(scan.rates1[k]),
                              fmt(scan.residuals3[k]), fmt(scan.residuals1[k]), status]))
    data_path = out / "rate_scan.csv"
    _write_text(data_path, "\n".join(rows) + "\n")
    _write_manifest(out / "rate_scan.manifest.json", cfg, couplings, {
        "data_file": data_path.name,
        "reference_rates_per_gamma": {"Gamma": scan.gamma_single, "Gamma_s": scan.gamma_sym,
                                      "Gamma_a": scan.gamma_anti},
        "excluded_dead_directions": int(cfg.phi3_count - len(scan.angles)),
        "workers": workers,
    })
    return {"data": data_path, "scan": scan}


def run_g1_pattern(cfg, out_dir=None, workers=None) -> dict:
    out = Path(out_dir or cfg.out_dir)
    workers = workers or cfg.resolved_workers()
    ens = cfg.ensemble()
    couplings = pair_couplings(ens, cfg.paper_mode)
    angles = cfg.phi3_grid.values()
    coh = free_coherences(ens, couplings, [0.0])
    vals = parallel_rows(lambda sl: intensity_map(ens, coh, angles[sl]), len(angles), workers)[:, 0]
    _check_finite("g1", vals)
    rows = ["phi,G1"] + [f"{fmt(a)},{fmt(v)}" for a, v in zip(angles, vals)]
    data_path = out / "g1_pattern.csv"
    _write_text(data_path, "\n".join(rows) + "\n")
    _write_manifest(out / "g1_pattern.manifest.json", cfg, couplings, {"data_file": data_path.name})
    return {"data": data_path, "angles": angles, "g1": vals}


def _bool_arg(text: str) -> bool:
    try:
        return cfgmod._parse_bool(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment file; defaults to the paper setup")
    common.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
    common.add_argument("--workers", type=int, help="parallel workers (default: all cores)")
    common.add_argument("--paper-mode", type=_bool_arg, metavar="BOOL",
                        help="only atoms 1 and 2 interact (default true)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="condemit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("couplings", parents=[common], help="print pair couplings")
    sub.add_parser("g3-map", parents=[common], help="G3 over (phi3, t3), raw and normalized")
    sub.add_parser("rate-scan", parents=[common], help="effective G3 and G1 decay rates vs phi3")
    sub.add_parser("g1-pattern", parents=[common], help="G1(phi, 0) emission pattern")
    return p


COMMANDS = {
    "g3-map": run_g3_map,
    "rate-scan": run_rate_scan,
    "g1-pattern": run_g1_pattern,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config) if args.config else cfgmod.ExperimentConfig()
        cfg = cfg.with_overrides(paper_mode=args.paper_mode, workers=args.workers)
        if args.out is not None:
            cfg = cfg.with_overrides(out_dir=str(args.out))
        log.info("backend=%s workers=%d", backend_name(), cfg.resolved_workers())
        if args.command == "couplings":
            run_couplings(cfg)
        else:
            res = COMMANDS[args.command](cfg)
            print(res["data"])
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
