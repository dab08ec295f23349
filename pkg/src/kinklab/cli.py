"""Command line entry points.

Subcommands map one-to-one onto the scenario drivers; each writes a JSON
summary (and CSV tracks where there are time series) into --out and exits
0 on success, 1 if any check failed, 2 on configuration errors, 3 on
numerical failures.  Runs with the same config and seed produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import scenarios
from .io import read_json, write_csv, write_json
from .modulation import OutOfTubeError
from .solver import BlowUpError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _load_overrides(args, section: str) -> dict:
    """Merge the config file section with the command line flags."""
    overrides = {}
    if args.config:
        try:
            cfg = read_json(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        overrides.update(cfg.get(section, {}))
    if getattr(args, "grid", None) is not None:
        overrides["n"] = args.grid
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "shape", None) is not None:
        overrides["shape"] = args.shape
    return overrides


def _run(fn, overrides: dict):
    try:
        return fn(**overrides)
    except TypeError as exc:
        raise ConfigError(f"bad option for {fn.__name__}: {exc}") from exc


def _emit(result: dict, out: Path, stem: str) -> int:
    write_json(out / f"{stem}.json", result)
    worst = EXIT_OK
    for check in result["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: {check['value']:.6g} "
              f"{check['op']} {check['threshold']:.6g}")
        if not check["passed"]:
            worst = EXIT_CHECK_FAILED
    return worst


def _stability_csv(result: dict, out: Path, stem: str) -> None:
    rows = []
    for run in result["runs"]:
        for i, t in enumerate(run["times"]):
            rows.append([run["alpha"], t, run["z_h1"][i], *run["shifts"][i]])
    n_shift = len(result["runs"][0]["shifts"][0])
    header = "alpha,t,z_h1," + ",".join(f"x_{j+1}" for j in range(n_shift))
    write_csv(out / f"{stem}.csv", header, rows)


def cmd_identities(args, out: Path) -> int:
    res = _run(scenarios.run_identities, _load_overrides(args, "identities"))
    return _emit(res, out, "identities")


def cmd_transforms(args, out: Path) -> int:
    res = _run(scenarios.run_transform_checks, _load_overrides(args, "transforms"))
    return _emit(res, out, "transforms")


def cmd_stability(args, out: Path) -> int:
    section = f"stability_{args.parity}"
    overrides = _load_overrides(args, section)
    fn = (scenarios.run_even_stability if args.parity == "even"
          else scenarios.run_odd_stability)
    res = _run(fn, overrides)
    _stability_csv(res, out, f"{section}_tracks")
    return _emit(res, out, section)


def cmd_collision(args, out: Path) -> int:
    overrides = _load_overrides(args, "collision")
    overrides.pop("dt", None)
    overrides.pop("horizon", None)
    res = _run(scenarios.run_collision, overrides)
    return _emit(res, out, "collision")


def cmd_coercivity(args, out: Path) -> int:
    overrides = _load_overrides(args, "coercivity")
    res = _run(scenarios.run_coercivity, overrides)
    code = _emit(res, out, "coercivity")
    exp = _run(scenarios.run_expansion, _load_overrides(args, "expansion"))
    code = max(code, _emit(exp, out, "expansion"))
    return code


def cmd_report(args, out: Path) -> int:
    paths = sorted(out.glob("*.json"))
    if not paths:
        print(f"no JSON artifacts under {out}", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    n_fail = 0
    for path in paths:
        data = read_json(path)
        for check in data.get("checks", []):
            rows.append((path.stem, check))
            n_fail += 0 if check["passed"] else 1
    width = max(len(c["name"]) for _, c in rows)
    for stem, check in rows:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status}  {stem:<18} {check['name']:<{width}} "
              f"{check['value']:>12.5g} {check['op']:>2} {check['threshold']:.5g}")
    print(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinklab",
        description="numerical experiments for multi-kink dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with per-command overrides")
        p.add_argument("--out", default="out", help="artifact directory")
        p.add_argument("--seed", type=int, help="RNG seed for perturbations")
        p.add_argument("--grid", type=int, help="number of grid points")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--horizon", type=float, help="final time")

    common(sub.add_parser("identities", help="soliton profile identities"))
    common(sub.add_parser("transforms", help="solution-map commutation checks"))
    p = sub.add_parser("stability", help="perturbed multi-kink sweeps")
    common(p)
    p.add_argument("--parity", choices=("even", "odd"), required=True)
    p.add_argument("--shape", choices=("bump", "scaling", "noise"))
    common(sub.add_parser("collision", help="two-soliton collision defect"))
    common(sub.add_parser("coercivity",
                          help="quadratic form spectra and energy expansion"))
    common(sub.add_parser("report", help="summarize artifacts in --out"))
    return parser


_COMMANDS = {
    "identities": cmd_identities,
    "transforms": cmd_transforms,
    "stability": cmd_stability,
    "collision": cmd_collision,
    "coercivity": cmd_coercivity,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        return _COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, OutOfTubeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
