"""Command line driver: run verification suites, print series expansions.

Reports are deterministic for a fixed config and seed: suites run
concurrently but assembly is sorted by check id, and nothing wall-clock
dependent enters the output (timings go to stderr, opt-in).  Exit codes:
0 all checks pass, 1 at least one failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .gauss import G
from .heisenberg import (
    conformal_battery,
    graded_conformal_check,
    heisenberg_suite,
    q3_identity,
    szego_candidate,
)
from .moser import MoserData, _quantity, example_data, moser_structure, moser_suite
from .report import has_failure, reports_to_json, reports_to_text
from .sphere import QuadratureConfig, sphere_suite

SUITES = ("all", "moser", "heisenberg", "conformal", "sphere")

# expansion quantities and the engine series they name
QUANTITY_KEYS = {
    "R": "curvature",
    "A": "torsion",
    "g": "metric",
    "lambda": "lambda",
    "pe_tensor": "pseudo_einstein",
}

CORRUPT_OWNER = {"green-power": "heisenberg", "moser-weight4": "moser"}

_CONFIG_KEYS = ("order", "tol", "grid", "seed", "format")


class UsageError(Exception):
    pass


def _parse_config_file(path) -> dict:
    out = {}
    try:
        text = open(path).read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = val
    return out


def _parse_grid(text: str):
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise UsageError(f"bad grid {text!r}: expected RADIALxANGULARxAZIMUTHAL")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad grid {text!r}: node counts must be integers")


def _effective_settings(args) -> dict:
    """Config-file values overridden by explicit command line flags."""
    merged = _parse_config_file(args.config) if args.config else {}
    if args.order is not None:
        merged["order"] = args.order
    if args.tol is not None:
        merged["tol"] = args.tol
    if args.grid is not None:
        merged["grid"] = args.grid
    if args.seed is not None:
        merged["seed"] = args.seed
    if args.format is not None:
        merged["format"] = args.format
    try:
        if "order" in merged:
            merged["order"] = int(merged["order"])
        if "seed" in merged:
            merged["seed"] = int(merged["seed"])
        if "tol" in merged:
            merged["tol"] = float(merged["tol"])
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}")
    if "grid" in merged and isinstance(merged["grid"], str):
        merged["grid"] = _parse_grid(merged["grid"])
    if merged.get("format", "text") not in ("text", "json"):
        raise UsageError(f"bad format {merged['format']!r}: expected text or json")
    return merged


def _quad_config(settings) -> QuadratureConfig | None:
    if "grid" not in settings and "tol" not in settings:
        return None
    kw = {}
    if "grid" in settings:
        nr, na, nz = settings["grid"]
        kw.update(n_radial=nr, n_angular=na, n_azimuthal=nz)
    if "tol" in settings:
        kw["tol"] = settings["tol"]
    try:
        return QuadratureConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _corrupted_moser_data() -> MoserData:
    # a weight-4 monomial is not reachable from any normal-form hypersurface;
    # the expansion and chain checks are expected to flag it
    md = example_data()
    return MoserData(c42=md.c42, c33=md.c33,
                     extra=(((2, 2, 0), G(1)),), allow_low_weight=True)


def _suite_reports(name, settings, golden=None, corrupt=None) -> list:
    seed = settings.get("seed", 0)
    if name == "moser":
        md = _corrupted_moser_data() if corrupt == "moser-weight4" else None
        return moser_suite(md, golden_path=golden)
    if name == "heisenberg":
        reports = heisenberg_suite()
        if corrupt == "green-power":
            reports = [r for r in reports if r.check_id != "heisenberg.q3_identity"]
            reports.append(q3_identity(wrong_power=True))
        return reports
    if name == "conformal":
        order = settings.get("order", 16)
        if order < 10:
            raise UsageError("conformal suite needs --order >= 10")
        return conformal_battery() + graded_conformal_check(order=order)
    if name == "sphere":
        return sphere_suite(_quad_config(settings), seed=seed)
    raise UsageError(f"unknown suite {name!r}")


def run_command(args) -> int:
    settings = _effective_settings(args)
    if args.corrupt and args.suite not in (CORRUPT_OWNER[args.corrupt], "all"):
        raise UsageError(
            f"--corrupt {args.corrupt} belongs to the {CORRUPT_OWNER[args.corrupt]} suite")
    if args.golden and args.suite not in ("moser", "all"):
        raise UsageError("--golden only applies to the moser suite")

    names = ("moser", "heisenberg", "conformal", "sphere") if args.suite == "all" else (args.suite,)
    reports = []
    timings = {}
    with ThreadPoolExecutor(max_workers=len(names)) as pool:
        futures = {}
        for name in names:
            start = time.monotonic()
            futures[name] = (pool.submit(_suite_reports, name, settings,
                                         golden=args.golden, corrupt=args.corrupt), start)
        for name in names:
            fut, start = futures[name]
            reports += fut.result()
            timings[name] = time.monotonic() - start
    if args.timings:
        for name in names:
            print(f"{name}: {timings[name]:.2f}s", file=sys.stderr)

    meta = {"suite": args.suite, "seed": settings.get("seed", 0)}
    if "grid" in settings:
        meta["grid"] = "x".join(str(n) for n in settings["grid"])
    if "tol" in settings:
        meta["tol"] = settings["tol"]
    if "order" in settings:
        meta["order"] = settings["order"]

    emit = reports_to_json if settings.get("format", "text") == "json" else reports_to_text
    sys.stdout.write(emit(reports, meta))
    return 1 if has_failure(reports) else 0


def _series_terms(poly):
    rows = []
    for (ez, ezb, eu, epi), c in sorted(poly.terms.items(),
                                        key=lambda kv: (kv[0][0] + kv[0][1] + 2 * kv[0][2], kv[0])):
        row = {"coeff": repr(c), "z": ez, "zb": ezb, "u": eu}
        if epi:
            row["pi"] = epi
        rows.append(row)
    return rows


def expand_command(args) -> int:
    settings = _effective_settings(args)
    order = settings.get("order", 7)
    fmt = settings.get("format", "text")

    if args.quantity == "szego":
        closed = szego_candidate()
        if fmt == "json":
            import json
            sys.stdout.write(json.dumps(
                {"quantity": "szego", "closed_form": repr(closed)},
                indent=2, sort_keys=True) + "\n")
        else:
            print(f"szego = {closed!r}")
        return 0

    key = QUANTITY_KEYS[args.quantity]
    md = MoserData() if args.flat else example_data()
    solve_order = order + 1 if order + 1 > 13 else None
    series = _quantity(moser_structure(md, order=solve_order), key)
    shown = series.truncated(order + 1)
    if fmt == "json":
        import json
        doc = {
            "quantity": args.quantity,
            "order": order,
            "flat": bool(args.flat),
            "terms": _series_terms(shown.poly),
        }
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        print(f"{args.quantity} = {shown.poly!r} + O({order + 1})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crprime",
        description="verification suites and series expansions for the Q-prime engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--order", type=int, default=None, help="weighted truncation order")
        p.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
        p.add_argument("--grid", default=None, help="quadrature nodes, e.g. 96x40x16")
        p.add_argument("--seed", type=int, default=None, help="probe-point seed")
        p.add_argument("--format", choices=("text", "json"), default=None)
        p.add_argument("--config", default=None, help="flat key = value settings file")

    runp = sub.add_parser("run", help="run a verification suite")
    runp.add_argument("suite", choices=SUITES)
    common(runp)
    runp.add_argument("--golden", default=None,
                      help="alternate reference-series file (moser suite)")
    runp.add_argument("--corrupt", choices=tuple(CORRUPT_OWNER), default=None,
                      help="negative-control switches that must produce failures")
    runp.add_argument("--timings", action="store_true",
                      help="per-suite wall time on stderr (never in the report)")

    expp = sub.add_parser("expand", help="print an engine series or closed form")
    expp.add_argument("quantity", choices=tuple(QUANTITY_KEYS) + ("szego",))
    common(expp)
    expp.add_argument("--flat", action="store_true", help="use the flat model (E = 0)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "run":
            return run_command(args)
        return expand_command(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
