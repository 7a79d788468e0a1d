"""Command line interface: ``run``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 invalid configuration, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from .clock import make_cyclic_clock
from .models import ORACLE, PIPELINE, TwoLevelParams, max_disagreement, sweep
from .scenarios import (
    DEFAULT_CLOCK_DIM,
    DEFAULT_TOL,
    FORMATS,
    SCENARIOS,
    ConfigError,
    ScenarioConfig,
    metadata,
    parse_energy,
    parse_sector,
    run_scenario,
)
from .verify import flipped_generator_clock, info_lines, run_all

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2

SWEEP_HEADER = ("lambda", "omega", "phi", "singular")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _fmt(x: float) -> str:
    return repr(float(x))


def _energy_arg(name):
    def parse(text):
        try:
            return parse_energy(text, name)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _sector_arg(text):
    try:
        return parse_sector(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range_arg(text):
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected min:max:n, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected min:max:n, got {text!r}")
    return lo, hi, n


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pagewootters", description="Finite-clock relational quantum dynamics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--lambda", dest="lam", type=float, help="gravitational coupling scale")
        p.add_argument("--energy", type=_energy_arg("energy"), default=0.0, help="constraint eigenvalue (suffix eV or J allowed)")
        p.add_argument("--mass-energy", type=_energy_arg("mass-energy"), default=0.0)
        p.add_argument("--e-internal", type=_energy_arg("e-internal"), default=1.0)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    run = sub.add_parser("run", help="run a named scenario")
    run.add_argument("--scenario", required=True, choices=SCENARIOS)
    run.add_argument("--clock-dim", type=int, default=DEFAULT_CLOCK_DIM)
    run.add_argument("--t0", type=float, default=0.0)
    run.add_argument("--dt", type=float, help="clock spacing (qubit-clock: the reading difference)")
    run.add_argument("--sector", type=_sector_arg, action="append", default=[], help="p:E, repeatable")
    run.add_argument("--distance", type=float, help="clock distance in metres for the SI coherence ratio")
    run.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
    common(run)

    sw = sub.add_parser("sweep", help="tabulate omega and phi over the coupling")
    sw.add_argument("--range", dest="lam_range", type=_range_arg, default=(-3.0, 3.0, 601), help="min:max:n")
    sw.add_argument("--backend", choices=(ORACLE, PIPELINE, "both"), default=ORACLE)
    sw.add_argument("--format", dest="fmt", choices=FORMATS, default="csv")
    common(sw)

    ver = sub.add_parser("verify", help="run the invariant battery")
    ver.add_argument("--inject-fault", choices=("none", "flip-clock-generator"), default="none")
    ver.add_argument("--seed", type=int, default=0)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stamp(meta: dict) -> dict:
    return {**meta, "generated_utc": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _write_sidecar(meta: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(_stamp(meta)), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out + ".meta.json", "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


def cmd_run(args) -> int:
    cfg = ScenarioConfig(
        scenario=args.scenario,
        clock_dim=args.clock_dim,
        t0=args.t0,
        dt=args.dt,
        lam=args.lam,
        energy=args.energy,
        mass_energy=args.mass_energy,
        e_internal=args.e_internal,
        sectors=tuple(args.sector),
        distance=args.distance,
        fmt=args.fmt,
        tol=args.tol,
    ).validate()
    extra, rows = run_scenario(cfg)
    meta = metadata(cfg.to_dict(), cfg.digest(), cfg.tol, "run")
    meta["results"] = extra
    if cfg.fmt == "json":
        doc = {"metadata": _stamp(meta), "rows": rows}
        _emit(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "t", "bloch_x", "bloch_y", "bloch_z", "purity", "expect_sx", "expect_sy", "expect_sz",
                "rho00_re", "rho00_im", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "rho11_re", "rho11_im"])
    for r in rows:
        rho = r["rho"].ravel()
        w.writerow([r["k"], _fmt(r["t"]), *map(_fmt, r["bloch"]), _fmt(r["purity"]),
                    _fmt(r["expect_sx"]), _fmt(r["expect_sy"]), _fmt(r["expect_sz"]),
                    *[_fmt(v) for z in rho for v in (z.real, z.imag)]])
    _emit(buf.getvalue(), args.out)
    _write_sidecar(meta, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    lo, hi, n = args.lam_range
    if n < 1 or (n > 1 and hi <= lo):
        raise ConfigError("range", "need n >= 1 and max > min")
    if not args.e_internal > 0:
        raise ConfigError("e-internal", "must be positive")
    if args.mass_energy < 0:
        raise ConfigError("mass-energy", "must be non-negative")
    lams = np.linspace(lo, hi, n)
    base = TwoLevelParams(1.0, args.energy, args.mass_energy, args.e_internal)
    config = {
        "range": [lo, hi, n], "backend": args.backend, "energy": args.energy,
        "mass_energy": args.mass_energy, "e_internal": args.e_internal, "tol": args.tol,
    }
    meta = metadata(config, hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest(), args.tol, "sweep")
    rows = sweep(lams, base, ORACLE if args.backend != PIPELINE else PIPELINE)
    status = EXIT_OK
    if args.backend == "both":
        gap = max_disagreement(rows, sweep(lams, base, PIPELINE))
        meta["results"] = {"backend_max_disagreement": gap}
        if gap > args.tol:
            sys.stderr.write(f"oracle and pipeline disagree by {gap:.3e} > tol {args.tol:g}\n")
            status = EXIT_VERIFY_FAILED
    if args.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            if r.singular:
                w.writerow([_fmt(r.lam), "", "", "true"])
            else:
                w.writerow([_fmt(r.lam), _fmt(r.omega), _fmt(r.phi), "false"])
        _emit(buf.getvalue(), args.out)
        _write_sidecar(meta, args.out)
    else:
        doc = {"metadata": _stamp(meta), "rows": [
            {"lambda": r.lam, "omega": r.omega, "phi": r.phi, "singular": r.singular} for r in rows]}
        _emit(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n", args.out)
    return status


def cmd_verify(args) -> int:
    factory = flipped_generator_clock if args.inject_fault == "flip-clock-generator" else make_cyclic_clock
    results = run_all(factory, seed=args.seed)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.name:<15} worst residual {r.residual:.3e} (threshold {r.threshold:.0e}) [{r.detail}]")
    for line in info_lines():
        print(line)
    ok = all(r.passed for r in results)
    print("all suites passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except ConfigError as exc:
        sys.stderr.write(f"invalid configuration: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
