"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from machstiff import __version__
from machstiff.center import center_from_lines, load_center_file, projection_plots
from machstiff.errors import MachStiffError, NumericalError, SchemaError, ValidationError
from machstiff.fitting import midline_plot, paths_from_series
from machstiff.ingest import (
    dumps_exact,
    campaign_to_dict,
    load_json_exact,
    parse_campaign,
    reading_matrix,
)
from machstiff.report import (
    assembly_report,
    center_csv,
    center_report,
    identification_report,
    matrix_csv,
    sizing_report,
    to_json,
)
from machstiff.sizing import BeamSpec, sweep_csv, sweep_lengths, sweep_plot
from machstiff.solver import PLANES, TWIST_LABELS, extract_block, identify
from machstiff.synth import load_spec, simulate_campaign

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _vec3(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(float(p) for p in parts)


def _sweep(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}")
    return tuple(float(p) for p in parts)


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _planes(names) -> tuple[str, ...]:
    for p in names:
        if p not in PLANES:
            raise ValidationError(f"unknown plane {p!r}; choose from {sorted(PLANES)}")
    return tuple(names)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    c = parse_campaign(args.campaign)
    n = sum(len(case.steps) for case in c.cases)
    print(f"ok: {c.block_id} campaign, {len(c.cases)} load cases, {n} steps")
    return EXIT_OK


def cmd_identify(args) -> int:
    c = parse_campaign(args.campaign)
    at = None if args.at_mm is None else np.asarray(args.at_mm) / 1000.0
    ident = identify(c, at)
    doc, err = identification_report(ident, [args.campaign], _planes(args.plane))
    stem = Path(args.campaign).stem
    if args.format == "json":
        path = _write(args.out, f"{stem}.identify.json", to_json(doc))
    else:
        path = _write(args.out, f"{stem}.stiffness.csv", matrix_csv(ident.stiffness))
        rows = doc["error_matrix"]["rows"]
        _write(args.out, f"{stem}.error_matrix.csv", matrix_csv(ident.error_matrix, rows, doc["error_matrix"]["cases"]))
    if args.plots:
        R = reading_matrix(c.sensor_config)
        for case, cf in zip(c.cases, ident.case_fits):
            tw = np.array([R @ np.asarray(s.readings) for s in case.steps])
            for k, name in enumerate(TWIST_LABELS):
                if ident.block_id == "BW" and k < 3:
                    continue
                ch, dis = paths_from_series([s.force for s in case.steps], tw[:, k], [s.phase for s in case.steps])
                svg = midline_plot(ch, dis, cf.fits[k], title=f"{case.label} {name}", ylabel=name)
                _write(args.out, f"{stem}.{case.label}.{name}.svg", svg)
    print(f"{ident.block_id}: max error {doc['error_matrix']['max_percent']:.3g} %, wrote {path}")
    if err is not None:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _load_kf(path) -> np.ndarray:
    try:
        doc = load_json_exact(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    if "K_F" in doc:
        M = doc["K_F"]
    elif "blocks" in doc:
        M = doc["blocks"]["F"]
    elif "stiffness" in doc:
        M = doc["stiffness"]
    else:
        raise SchemaError(f"{path}: no K_F, blocks or stiffness entry")
    try:
        M = np.array([[float(v) for v in row] for row in M])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: matrix is not numeric") from exc
    if M.shape == (6, 6):
        M = extract_block(M, "F")
    if M.shape != (3, 3):
        raise SchemaError(f"{path}: expected a 3x3 or 6x6 matrix, got {M.shape}")
    return M


def cmd_assemble(args) -> int:
    kt, kw = _load_kf(args.bt), _load_kf(args.bw)
    doc, err = assembly_report(kt, kw, [args.bt, args.bw], _planes(args.plane))
    if args.format == "json":
        path = _write(args.out, "assembly.json", to_json(doc))
    else:
        path = _write(args.out, "assembly.csv", matrix_csv(doc["K_F_assembled"]))
    print(f"wrote {path}")
    if err is not None:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_center(args) -> int:
    lines, _ = load_center_file(args.center)
    sol = center_from_lines(lines)
    origin = np.asarray(args.origin_mm) / 1000.0
    doc = center_report(sol, [args.center], args.v3, origin)
    stem = Path(args.center).stem
    if args.format == "json":
        path = _write(args.out, f"{stem}.center.json", to_json(doc))
    else:
        path = _write(args.out, f"{stem}.center.csv", center_csv(sol))
    if args.plots:
        for name, svg in projection_plots(sol).items():
            _write(args.out, f"{stem}.center.{name}.svg", svg)
    msg = f"CR = ({', '.join(f'{v:.4g}' for v in sol.CR)}) m, r = {sol.residual:.3g} m"
    if "direction_check" in doc:
        msg += f", angle to v3 = {doc['direction_check']['angle_deg']:.2f} deg"
    print(f"{msg}; wrote {path}")
    return EXIT_OK


def cmd_size_fixture(args) -> int:
    spec = BeamSpec(args.force_n, args.length_mm, args.young_nmm2, args.diameter_mm)
    rows = sweep_lengths(spec, *args.sweep) if args.sweep else None
    doc = sizing_report(spec, rows)
    if args.format == "json":
        path = _write(args.out, "sizing.json", to_json(doc))
    else:
        path = _write(args.out, "sizing.csv", sweep_csv(rows if rows is not None else sweep_lengths(spec, spec.L, spec.L, 1.0)))
    if args.plots and rows:
        _write(args.out, "sizing.svg", sweep_plot(rows, spec))
    print(f"delta = {doc['deflection_mm']:.4g} mm, k = {doc['stiffness_N_per_m']:.4g} N/m; wrote {path}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = load_spec(args.spec)
    c = simulate_campaign(spec)
    name = args.output or f"{Path(args.spec).stem}.campaign.json"
    path = _write(args.out, name, dumps_exact(campaign_to_dict(c)) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="machstiff", description="Static stiffness identification of machining systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--plots", action="store_true", help="also write SVG plots")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a campaign file")
    s.add_argument("campaign")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("identify", help="campaign -> compliance, stiffness, error matrix")
    s.add_argument("campaign")
    s.add_argument("--at-mm", type=_vec3, help="express results at this point x,y,z (mm)")
    s.add_argument("--plane", nargs="+", default=["xy", "yz", "xz"], help="planes for principal angles")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("assemble", help="add BT and BW displacement stiffnesses")
    s.add_argument("bt")
    s.add_argument("bw")
    s.add_argument("--plane", nargs="+", default=["xy", "yz", "xz"])
    s.set_defaults(func=cmd_assemble)

    s = sub.add_parser("center", help="stiffness center from displacement lines")
    s.add_argument("center")
    s.add_argument("--v3", type=_vec3, help="eigenvector to compare with CR - origin")
    s.add_argument("--origin-mm", type=_vec3, default=(0.0, 0.0, 0.0))
    s.set_defaults(func=cmd_center)

    s = sub.add_parser("size-fixture", help="cantilever fixture deflection and stiffness")
    s.add_argument("--force-n", type=float, required=True)
    s.add_argument("--young-nmm2", type=float, required=True)
    s.add_argument("--diameter-mm", type=float, required=True)
    s.add_argument("--length-mm", type=float, required=True)
    s.add_argument("--sweep", type=_sweep, help="length sweep lo:hi:step (mm)")
    s.set_defaults(func=cmd_size_fixture)

    s = sub.add_parser("synth", help="simulate a campaign from a synth spec")
    s.add_argument("spec")
    s.add_argument("-o", "--output", help="campaign file name inside --out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MachStiffError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
