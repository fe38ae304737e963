"""Command-line front end.

Subcommands: ``sweep``, ``figure <preset>``, ``point``, ``verify``.
Exit codes: 0 success, 1 usage error, 2 verification failure (``verify --strict``).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

from .errors import QcrbError
from .fock import DEFAULT_TOL
from .probes import CANONICAL_ORDER, PARAM_NAMES, ProbeKind, ProbeSpec, parse_constraint, solve_params_for_nbar
from .qfim import SensingConfig
from .sweep import PRESETS, dumps, point_record, preset, run_sweep, spec_from_mapping, write_csv, write_jsonl
from .verify import PROFILES, VerifyGrid, verify

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_shared(p: argparse.ArgumentParser) -> None:
    # defaults are None so a JSON config can fill what flags leave unset
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--probe", type=_csv_list, help="comma-separated subset of MNOONS,MECS,MESVS,MESCS")
    p.add_argument("--nbar", type=float, help="total mean photon number")
    p.add_argument("--d", type=int, help="number of estimated angular displacements")
    p.add_argument("--l", type=int, help="OAM quanta per photon")
    p.add_argument("--eta", type=float, help="transmissivity in (0, 1]")
    p.add_argument("--delta", type=float, help="variational parameter (default: optimal)")
    p.add_argument("--mescs-constraint", help="equal_split | fixed_r2:<r> | fixed_beta:<beta>")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--tol", type=float, help="Fock-oracle tolerance (verify: uniform check tolerance)")
    p.add_argument("--jobs", type=int, help="worker processes for sweep evaluation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="angular-qcrb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="sweep one axis")
    _add_shared(p)
    p.add_argument("--axis", choices=("nbar_total", "d", "l", "eta"))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--outputs", type=_csv_list, help="comma-separated subset of ideal,lossy,robustness,g2")

    p = sub.add_parser("figure", help="run a figure preset")
    p.add_argument("preset", choices=sorted(PRESETS))
    _add_shared(p)

    p = sub.add_parser("point", help="evaluate one probe with full diagnostics")
    _add_shared(p)
    p.add_argument("--N", type=float, dest="N", help="MNOONS photon number")
    p.add_argument("--alpha", type=float)
    p.add_argument("--r1", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--r2", type=float)

    p = sub.add_parser("verify", help="run the cross-check suite")
    _add_shared(p)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--grid-nbar", type=_csv_list, help="comma-separated N values (empty string: empty grid)")
    p.add_argument("--grid-d", type=_csv_list, help="comma-separated d values (empty string: empty grid)")
    p.add_argument("--strict", action="store_true", help="exit 2 if any check fails")
    return parser


def _merged(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for k, v in vars(args).items():
        if v is not None and k != "config":
            cfg[k] = v
    return cfg


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _probes(cfg: dict) -> tuple:
    names = cfg.get("probe") or [k.value for k in CANONICAL_ORDER]
    if isinstance(names, str):
        names = _csv_list(names)
    try:
        return tuple(ProbeKind(n.upper()) for n in names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(points, cfg: dict) -> None:
    fmt = cfg.get("format", "csv")
    with _output(cfg.get("out")) as fh:
        (write_jsonl if fmt == "jsonl" else write_csv)(points, fh)


def _cmd_sweep(cfg: dict) -> int:
    for key in ("axis", "start", "stop", "steps"):
        if cfg.get(key) is None:
            raise UsageError(f"sweep needs --{key}")
    flat = dict(cfg)
    flat["nbar_total"] = cfg.get("nbar")
    flat["probes"] = _probes(cfg)
    if flat.get("axis") != "eta" and flat.get("eta") is None:
        flat["eta"] = 1.0
    try:
        spec = spec_from_mapping(flat)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    _emit(run_sweep(spec, jobs=int(cfg.get("jobs") or 1)), cfg)
    return EXIT_OK


def _cmd_figure(cfg: dict) -> int:
    overrides = {}
    if cfg.get("probe"):
        overrides["probes"] = _probes(cfg)
    if cfg.get("mescs_constraint"):
        overrides["mescs_constraint"] = parse_constraint(cfg["mescs_constraint"])
    if cfg.get("delta") is not None:
        overrides["delta"] = float(cfg["delta"])
    if cfg.get("tol") is not None:
        overrides["tol"] = float(cfg["tol"])
    spec = preset(cfg["preset"], **overrides)
    fixed = dict(spec.fixed)
    for flag, key in (("nbar", "nbar_total"), ("d", "d"), ("l", "l"), ("eta", "eta")):
        if cfg.get(flag) is not None and key != spec.axis:
            fixed[key] = cfg[flag]
    try:
        spec = preset(cfg["preset"], fixed=fixed, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(run_sweep(spec, jobs=int(cfg.get("jobs") or 1)), cfg)
    return EXIT_OK


def _point_probe(cfg: dict, kind: ProbeKind, d: int) -> ProbeSpec:
    names = PARAM_NAMES[kind]
    given = [cfg.get(n) for n in names]
    if all(v is not None for v in given):
        return ProbeSpec(kind, d, tuple(given))
    if cfg.get("nbar") is not None:
        constraint = parse_constraint(cfg["mescs_constraint"]) if cfg.get("mescs_constraint") else None
        return solve_params_for_nbar(kind, cfg["nbar"], d, constraint)
    raise UsageError(f"{kind} needs --nbar or --{' --'.join(names)}")


def _cmd_point(cfg: dict) -> int:
    probes = _probes(cfg)
    if len(probes) != 1:
        raise UsageError("point needs exactly one --probe")
    if cfg.get("d") is None:
        raise UsageError("point needs --d")
    kind = probes[0]
    try:
        probe = _point_probe(cfg, kind, cfg["d"])
        rec = point_record(
            probe, SensingConfig(cfg.get("l", 1), cfg["d"]), cfg.get("eta"), cfg.get("delta"), cfg.get("tol", DEFAULT_TOL)
        )
    except QcrbError as exc:
        rec = {"probe": kind.value, "error_code": exc.code, "message": str(exc)}
    with _output(cfg.get("out")) as fh:
        fh.write(dumps(rec) + "\n")
    return EXIT_OK


def _cmd_verify(cfg: dict) -> int:
    profile = cfg.get("profile", "default")
    if cfg.get("tol") is not None:
        profile = {k: float(cfg["tol"]) for k in PROFILES["default"]}
    grid = VerifyGrid()
    try:
        if "grid_nbar" in cfg:
            grid = VerifyGrid(nbar=tuple(float(x) for x in cfg["grid_nbar"]), d=grid.d)
        if "grid_d" in cfg:
            grid = VerifyGrid(nbar=grid.nbar, d=tuple(int(x) for x in cfg["grid_d"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = verify(profile, grid)
    with _output(cfg.get("out")) as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if cfg.get("strict") and not report["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"sweep": _cmd_sweep, "figure": _cmd_figure, "point": _cmd_point, "verify": _cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merged(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"angular-qcrb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
