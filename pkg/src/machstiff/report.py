"""Report documents for the command-line tools.

Reports are plain JSON-ready dicts. They carry the tool version and the
sha256 of every input file and nothing time-dependent, so re-running a
command on the same inputs gives byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from machstiff import __version__
from machstiff.center import CenterSolution, center_direction_angle
from machstiff.errors import ComplexSpectrum, DegenerateProjection
from machstiff.sizing import BeamSpec, SweepRow, deflection
from machstiff.solver import (
    BLOCKS,
    TWIST_LABELS,
    Identification,
    principal_angle_in_plane,
    principal_decomposition,
    symmetry_deviation,
)

TOOL = "machstiff"


def file_digest(path) -> dict:
    data = Path(path).read_bytes()
    return {"name": Path(path).name, "sha256": hashlib.sha256(data).hexdigest()}


def header(command: str, inputs=()) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "inputs": [file_digest(p) for p in inputs]}


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def matrix_csv(M, row_labels=None, col_labels=None) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if col_labels is not None:
        w.writerow([""] + list(col_labels) if row_labels is not None else list(col_labels))
    for i, row in enumerate(M):
        vals = [repr(float(v)) for v in row]
        w.writerow(([row_labels[i]] if row_labels is not None else []) + vals)
    return buf.getvalue()


def principal_section(K3, source: str, planes=("xy", "yz", "xz")) -> tuple[dict, ComplexSpectrum | None]:
    """Eigen-decomposition and plane angles, or the complex spectrum if any."""
    try:
        pd = principal_decomposition(K3, source)
    except ComplexSpectrum as exc:
        return {
            "source": source,
            "error": f"ComplexSpectrum: {exc}",
            "eigenvalues_real": [float(np.real(v)) for v in exc.eigenvalues],
            "eigenvalues_imag": [float(np.imag(v)) for v in exc.eigenvalues],
        }, exc
    sec = pd.as_dict()
    angles = {}
    for p in planes:
        try:
            angles[p] = principal_angle_in_plane(pd, p)
        except DegenerateProjection as exc:
            angles[p] = None
            sec.setdefault("warnings", []).append(f"{p}: {exc}")
    sec["alpha_K_deg"] = angles
    return sec, None


def identification_report(ident: Identification, inputs=(), planes=("xy", "yz", "xz")):
    doc = header("identify", inputs)
    labels = [c.label for c in ident.case_fits]
    rows = list(TWIST_LABELS) if ident.block_id == "BT" else list(TWIST_LABELS[3:])
    E = ident.error_matrix
    doc.update({
        "block_id": ident.block_id,
        "expressed_at_m": ident.at.tolist(),
        "load_condition": ident.load_condition,
        "compliance": ident.compliance.tolist(),
        "stiffness": ident.stiffness.tolist(),
        "symmetry_deviation": symmetry_deviation(ident.stiffness),
        "relation_residual": ident.relation_residual(),
        "error_matrix": {"rows": rows, "cases": labels, "percent": E.tolist(), "max_percent": float(E.max())},
    })
    if ident.block_id == "BT":
        doc["blocks"] = {k: ident.stiffness[r, c].tolist() for k, (r, c) in BLOCKS.items()}
    sec, err = principal_section(ident.K_F, "K_F", planes)
    doc["principal"] = sec
    doc["fits"] = [
        {
            "case": cf.label,
            "components": {
                name: f.as_dict()
                for name, f in zip(TWIST_LABELS, cf.fits)
                if ident.block_id == "BT" or name.startswith("eps")
            },
        }
        for cf in ident.case_fits
    ]
    return doc, err


def assembly_report(kf_bt, kf_bw, inputs=(), planes=("xy", "yz", "xz")):
    kf_bt, kf_bw = np.asarray(kf_bt, float), np.asarray(kf_bw, float)
    K = kf_bt + kf_bw
    doc = header("assemble", inputs)
    doc.update({
        "K_F_BT": kf_bt.tolist(),
        "K_F_BW": kf_bw.tolist(),
        "K_F_assembled": K.tolist(),
        "symmetry_deviation": symmetry_deviation(K),
    })
    sec, err = principal_section(K, "K_F_assembled", planes)
    doc["principal"] = sec
    return doc, err


def center_report(sol: CenterSolution, inputs=(), v3=None, origin=(0.0, 0.0, 0.0)) -> dict:
    doc = header("center", inputs)
    doc.update(sol.as_dict())
    if v3 is not None:
        doc["direction_check"] = {
            "v3": [float(v) for v in v3],
            "origin_m": [float(v) for v in origin],
            "angle_deg": center_direction_angle(sol.CR, v3, origin),
        }
    return doc


def center_csv(sol: CenterSolution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["item", "x_m", "y_m", "z_m", "mu_m", "theta_deg"])
    for name, ix in zip("xyz", sol.intersections):
        w.writerow([f"M_{name}"] + [repr(float(v)) for v in ix.M] + [repr(ix.mu), repr(ix.theta)])
    w.writerow(["CR"] + [repr(float(v)) for v in sol.CR] + ["", ""])
    w.writerow(["residual_m", repr(sol.residual), "", "", "", ""])
    return buf.getvalue()


def sizing_report(spec: BeamSpec, rows: list[SweepRow] | None = None) -> dict:
    d, k = deflection(spec)
    doc = header("size-fixture")
    doc.update({
        "force_N": spec.P,
        "length_mm": spec.L,
        "young_N_per_mm2": spec.E,
        "diameter_mm": spec.D,
        "inertia_mm4": spec.inertia,
        "deflection_mm": d,
        "stiffness_N_per_m": k,
    })
    if rows is not None:
        doc["sweep"] = [{"L_mm": r.L, "delta_mm": r.delta, "k_N_per_m": r.k} for r in rows]
    return doc

