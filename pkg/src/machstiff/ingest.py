"""Campaign files, transducer geometry and conversion to torsors.

A campaign file is JSON with unit-tagged keys (``spacing_mm``,
``force_daN``, ``applied_at_mm``, ``readings_um``); everything is converted
to SI on load. Numbers are parsed as exact decimals and rescaled by powers
of ten before rounding to float once, so ``parse(write(c)) == c`` holds
bit for bit.

Transducer model
----------------
Each of the three pairs straddles the reference point: its two sensors sit
at ``expressed_at -/+ (a/2) * separation_axis`` and both read the
displacement along ``measure_axis``. For a twist (rho, eps) at
``expressed_at`` the readings are::

    m_i = eps . u - (a/2) rho . w
    m_j = eps . u + (a/2) rho . w      with w = separation_axis x measure_axis

hence ``eps . u = (m_i + m_j) / 2`` and ``rho . w = (m_j - m_i) / a``.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

from machstiff.errors import GeometryError, RankError, SchemaError
from machstiff.torsor import Twist, Wrench, wrench_from_point_force

SCHEMA_VERSION = 1
PHASES = ("charge", "discharge")
UNIT_TOL = 1e-6

# powers of ten from file units to SI
_MM = -3
_UM = -6
_DAN = 1

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_six = {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6}

CAMPAIGN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Static load-test campaign",
    "type": "object",
    "required": ["schema_version", "block_id", "sensor_config", "cases", "repetitions"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "block_id": {"enum": ["BT", "BW"]},
        "description": {"type": "string"},
        "repetitions": {"type": "integer", "minimum": 1},
        "sensor_config": {
            "type": "object",
            "required": ["pairs", "expressed_at_mm"],
            "additionalProperties": False,
            "properties": {
                "expressed_at_mm": _vec3,
                "pairs": {
                    "type": "array",
                    "minItems": 3,
                    "maxItems": 3,
                    "items": {
                        "type": "object",
                        "required": ["measure_axis", "separation_axis", "spacing_mm", "sensors"],
                        "additionalProperties": False,
                        "properties": {
                            "measure_axis": _vec3,
                            "separation_axis": _vec3,
                            "spacing_mm": {"type": "number"},
                            "sensors": {
                                "type": "array",
                                "items": {"type": "integer"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                },
            },
        },
        "cases": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "steps"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "steps": {
                        "type": "array",
                        "minItems": 2,
                        "items": {
                            "type": "object",
                            "required": ["force_daN", "direction", "applied_at_mm", "phase", "readings_um"],
                            "additionalProperties": False,
                            "properties": {
                                "force_daN": {"type": "number", "minimum": 0},
                                "direction": _vec3,
                                "applied_at_mm": _vec3,
                                "phase": {"enum": list(PHASES)},
                                "readings_um": {
                                    "oneOf": [_six, {"type": "array", "minItems": 1, "items": _six}],
                                },
                                "readings_std_um": _six,
                            },
                        },
                    },
                },
            },
        },
    },
}


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensorPair:
    """Two transducers reading along ``measure_axis``, ``spacing`` metres apart.

    ``sensors`` are 1-based indices into the six readings.
    """

    measure_axis: tuple[float, float, float]
    separation_axis: tuple[float, float, float]
    spacing: float
    sensors: tuple[int, int]

    @property
    def rotation_axis(self) -> np.ndarray:
        return np.cross(self.separation_axis, self.measure_axis)


@dataclass(frozen=True)
class SensorConfig:
    pairs: tuple[SensorPair, SensorPair, SensorPair]
    expressed_at: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.pairs) != 3:
            raise GeometryError(f"expected 3 sensor pairs, got {len(self.pairs)}")
        for k, p in enumerate(self.pairs, 1):
            u, s = np.asarray(p.measure_axis), np.asarray(p.separation_axis)
            for name, v in (("measure_axis", u), ("separation_axis", s)):
                if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
                    raise GeometryError(f"pair {k}: {name} {tuple(v)} is not a unit vector")
            if abs(u @ s) > UNIT_TOL:
                raise GeometryError(f"pair {k}: measure and separation axes are not perpendicular")
            if not p.spacing > 0.0:
                raise GeometryError(f"pair {k}: spacing must be positive, got {p.spacing}")
        idx = sorted(i for p in self.pairs for i in p.sensors)
        if idx != [1, 2, 3, 4, 5, 6]:
            raise GeometryError(f"sensor indices must be a permutation of 1..6, got {idx}")
        U = np.array([p.measure_axis for p in self.pairs])
        W = np.array([p.rotation_axis for p in self.pairs])
        if abs(np.linalg.det(U)) < UNIT_TOL:
            raise GeometryError("the three measure axes do not span 3D")
        if abs(np.linalg.det(W)) < UNIT_TOL:
            raise GeometryError("the three pair rotation axes do not span 3D")


def default_sensor_config(spacing: float, expressed_at=(0.0, 0.0, 0.0)) -> SensorConfig:
    """Three orthogonal pairs around the cube centre.

    Pair 1 (sensors 1, 2) reads x and is split along z, so it senses rotation
    about y; pair 2 (3, 4) reads y split along x (rotation about z); pair 3
    (5, 6) reads z split along y (rotation about x). The spacing has no
    default on purpose.
    """
    x, y, z = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)
    return SensorConfig(
        pairs=(
            SensorPair(x, z, spacing, (1, 2)),
            SensorPair(y, x, spacing, (3, 4)),
            SensorPair(z, y, spacing, (5, 6)),
        ),
        expressed_at=tuple(float(c) for c in expressed_at),
    )


@dataclass(frozen=True)
class ReadingSet:
    """Six transducer readings m1..m6 in metres (mean over repetitions)."""

    values: tuple[float, ...]
    std: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.values) != 6 or not np.all(np.isfinite(self.values)):
            raise SchemaError(f"a reading set needs 6 finite values, got {self.values}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class LoadStep:
    force: float  # N
    direction: tuple[float, float, float]
    applied_at: tuple[float, float, float]  # m, relative to the cube centre frame
    phase: str
    readings: ReadingSet

    def __post_init__(self):
        if not self.force >= 0.0:
            raise SchemaError(f"force magnitude must be >= 0, got {self.force}")
        if self.phase not in PHASES:
            raise SchemaError(f"phase must be one of {PHASES}, got {self.phase!r}")
        if abs(np.linalg.norm(self.direction) - 1.0) > UNIT_TOL:
            raise GeometryError(f"load direction {self.direction} is not a unit vector")


@dataclass(frozen=True)
class LoadCase:
    label: str
    steps: tuple[LoadStep, ...]

    def __post_init__(self):
        n_charge = sum(s.phase == "charge" for s in self.steps)
        if n_charge < 2:
            raise SchemaError(f"case {self.label!r}: at least 2 charge steps required, got {n_charge}")
        first = self.steps[0]
        for s in self.steps[1:]:
            if s.direction != first.direction or s.applied_at != first.applied_at:
                raise SchemaError(f"case {self.label!r}: load direction or point changes between steps")

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.steps[0].direction)

    @property
    def applied_at(self) -> np.ndarray:
        return np.asarray(self.steps[0].applied_at)


@dataclass(frozen=True)
class Campaign:
    block_id: str
    sensor_config: SensorConfig
    cases: tuple[LoadCase, ...]
    repetitions: int = 1
    description: str = ""
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.block_id not in ("BT", "BW"):
            raise SchemaError(f"block_id must be BT or BW, got {self.block_id!r}")
        if self.repetitions < 1:
            raise SchemaError("repetitions must be a positive integer")


# ---------------------------------------------------------------------------
# Readings <-> twist
# ---------------------------------------------------------------------------

def reading_matrix(cfg: SensorConfig) -> np.ndarray:
    """6x6 map from readings m1..m6 to the twist vector [rho, eps]."""
    U = np.array([p.measure_axis for p in cfg.pairs], dtype=float)
    W = np.array([p.rotation_axis for p in cfg.pairs], dtype=float)
    S_mean = np.zeros((3, 6))
    S_diff = np.zeros((3, 6))
    for k, p in enumerate(cfg.pairs):
        i, j = p.sensors[0] - 1, p.sensors[1] - 1
        S_mean[k, i] = S_mean[k, j] = 0.5
        S_diff[k, i] = -1.0 / p.spacing
        S_diff[k, j] = 1.0 / p.spacing
    return np.vstack([np.linalg.solve(W, S_diff), np.linalg.solve(U, S_mean)])


def twist_to_reading_matrix(cfg: SensorConfig) -> np.ndarray:
    """6x6 forward map from a twist vector [rho, eps] to readings m1..m6."""
    G = np.zeros((6, 6))
    for p in cfg.pairs:
        i, j = p.sensors[0] - 1, p.sensors[1] - 1
        u = np.asarray(p.measure_axis, dtype=float)
        half_w = 0.5 * p.spacing * p.rotation_axis
        G[i, :3], G[i, 3:] = -half_w, u
        G[j, :3], G[j, 3:] = half_w, u
    return G


def readings_to_twist(r: ReadingSet | Sequence[float], cfg: SensorConfig) -> Twist:
    m = np.asarray(r, dtype=float)
    return Twist.from_vector(reading_matrix(cfg) @ m, at=cfg.expressed_at)


def step_to_wrench(s: LoadStep, expressed_at=(0.0, 0.0, 0.0)) -> Wrench:
    return wrench_from_point_force(s.force * np.asarray(s.direction), s.applied_at, expressed_at)


def unit_wrench(case: LoadCase, expressed_at=(0.0, 0.0, 0.0)) -> Wrench:
    """Wrench of a 1 N load of ``case``."""
    return wrench_from_point_force(case.direction, case.applied_at, expressed_at)


def check_rank(campaign: Campaign) -> None:
    """Raise RankError unless the load cases can be inverted for the block type."""
    at = campaign.sensor_config.expressed_at
    T = np.column_stack([unit_wrench(c, at).vector for c in campaign.cases])
    if campaign.block_id == "BT":
        if T.shape[1] < 6 or np.linalg.matrix_rank(T) < 6:
            raise RankError(
                f"BT campaign needs 6 independent load wrenches, got rank "
                f"{np.linalg.matrix_rank(T)} from {T.shape[1]} cases"
            )
    else:
        F = T[:3]
        if F.shape[1] < 3 or np.linalg.matrix_rank(F) < 3:
            raise RankError(
                f"BW campaign needs load forces spanning 3D, got rank "
                f"{np.linalg.matrix_rank(F)} from {F.shape[1]} cases"
            )


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

_UNIT_KEY = re.compile(r"^(?P<stem>.+)_(?P<unit>mm|m|um|daN|N|kN)$")


def _schema_error(data) -> None:
    validator = jsonschema.Draft202012Validator(CAMPAIGN_SCHEMA)
    errors = list(validator.iter_errors(data))
    if not errors:
        return
    for e in errors:
        if e.validator == "required" and isinstance(e.instance, dict):
            for name in e.validator_value:
                if name in e.instance:
                    continue
                m = _UNIT_KEY.match(name)
                if m:
                    wrong = [k for k in e.instance if k.startswith(m["stem"] + "_")]
                    if wrong:
                        raise SchemaError(
                            f"wrong unit tag at /{'/'.join(map(str, e.absolute_path))}: "
                            f"found {wrong[0]!r}, expected {name!r}"
                        )
    e = jsonschema.exceptions.best_match(errors)
    where = "/".join(map(str, e.absolute_path))
    raise SchemaError(f"schema violation at /{where}: {e.message}")


def _si(x, exp: int) -> float:
    return float(Decimal(x).scaleb(exp))


def _si3(v, exp: int) -> tuple[float, float, float]:
    return tuple(_si(c, exp) for c in v)


def campaign_from_dict(data: dict) -> Campaign:
    """Validate a decoded campaign document and build the Campaign.

    Numbers in ``data`` should be ``Decimal`` or ``int`` for exact unit
    conversion; plain floats are accepted too.
    """
    _schema_error(data)
    sc = data["sensor_config"]
    cfg = SensorConfig(
        pairs=tuple(
            SensorPair(
                measure_axis=_si3(p["measure_axis"], 0),
                separation_axis=_si3(p["separation_axis"], 0),
                spacing=_si(p["spacing_mm"], _MM),
                sensors=tuple(int(i) for i in p["sensors"]),
            )
            for p in sc["pairs"]
        ),
        expressed_at=_si3(sc["expressed_at_mm"], _MM),
    )
    reps = int(data["repetitions"])
    cases = []
    for c in data["cases"]:
        steps = []
        for s in c["steps"]:
            raw = s["readings_um"]
            if isinstance(raw[0], list):
                if len(raw) != reps:
                    raise SchemaError(
                        f"case {c['label']!r}: {len(raw)} reading series given, repetitions is {reps}"
                    )
                series = np.array([[_si(v, _UM) for v in row] for row in raw])
                mean = tuple(float(v) for v in series.mean(axis=0))
                std = tuple(float(v) for v in series.std(axis=0, ddof=1)) if reps > 1 else None
                readings = ReadingSet(mean, std)
            else:
                std = s.get("readings_std_um")
                readings = ReadingSet(
                    tuple(_si(v, _UM) for v in raw),
                    tuple(_si(v, _UM) for v in std) if std is not None else None,
                )
            steps.append(
                LoadStep(
                    force=_si(s["force_daN"], _DAN),
                    direction=_si3(s["direction"], 0),
                    applied_at=_si3(s["applied_at_mm"], _MM),
                    phase=s["phase"],
                    readings=readings,
                )
            )
        cases.append(LoadCase(c["label"], tuple(steps)))
    campaign = Campaign(
        block_id=data["block_id"],
        sensor_config=cfg,
        cases=tuple(cases),
        repetitions=reps,
        description=data.get("description", ""),
    )
    check_rank(campaign)
    return campaign


def load_json_exact(text: str):
    return json.loads(text, parse_float=Decimal)


def parse_campaign(path) -> Campaign:
    """Read, validate and convert a campaign JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = load_json_exact(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return campaign_from_dict(data)


def _file(x: float, exp: int) -> Decimal:
    # shortest round-tripping decimal, rescaled exactly to file units
    return Decimal(repr(float(x))).scaleb(-exp)


def _file3(v, exp: int) -> list[Decimal]:
    return [_file(c, exp) for c in v]


def campaign_to_dict(c: Campaign) -> dict:
    """Document form of ``c`` with exact ``Decimal`` numbers in file units."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "block_id": c.block_id,
    }
    if c.description:
        doc["description"] = c.description
    doc["repetitions"] = c.repetitions
    doc["sensor_config"] = {
        "pairs": [
            {
                "measure_axis": _file3(p.measure_axis, 0),
                "separation_axis": _file3(p.separation_axis, 0),
                "spacing_mm": _file(p.spacing, _MM),
                "sensors": list(p.sensors),
            }
            for p in c.sensor_config.pairs
        ],
        "expressed_at_mm": _file3(c.sensor_config.expressed_at, _MM),
    }
    cases = []
    for case in c.cases:
        steps = []
        for s in case.steps:
            step = {
                "force_daN": _file(s.force, _DAN),
                "direction": _file3(s.direction, 0),
                "applied_at_mm": _file3(s.applied_at, _MM),
                "phase": s.phase,
                "readings_um": [_file(v, _UM) for v in s.readings.values],
            }
            if s.readings.std is not None:
                step["readings_std_um"] = [_file(v, _UM) for v in s.readings.std]
            steps.append(step)
        cases.append({"label": case.label, "steps": steps})
    doc["cases"] = cases
    return doc


_NUM_MARK = re.compile(r'"@num:([^"]+)"')


def dumps_exact(doc, indent: int | None = 2) -> str:
    """``json.dumps`` that writes ``Decimal`` values verbatim as JSON numbers."""
    text = json.dumps(doc, indent=indent, default=lambda d: f"@num:{d}")
    return _NUM_MARK.sub(r"\1", text)


def write_campaign(c: Campaign, path) -> None:
    Path(path).write_text(dumps_exact(campaign_to_dict(c)) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# CSV logger dumps
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("case", "phase", "force_daN", "m1", "m2", "m3", "m4", "m5", "m6")


def campaign_from_csv(
    path,
    block_id: str,
    sensor_config: SensorConfig,
    case_geometry: dict,
    description: str = "",
) -> Campaign:
    """Build a campaign from a raw logger CSV (readings in micrometres).

    ``case_geometry`` maps each case label to ``(direction, applied_at_m)``.
    Rows sharing (case, phase, force) are repetitions and are averaged.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing CSV columns {missing}")
        groups: dict[tuple, list[list[float]]] = {}
        for n, row in enumerate(reader, start=2):
            try:
                key = (row["case"], row["phase"], Decimal(row["force_daN"]))
                vals = [_si(Decimal(row[f"m{i}"]), _UM) for i in range(1, 7)]
            except (ArithmeticError, ValueError) as exc:
                raise SchemaError(f"{path}:{n}: bad numeric field ({exc})") from exc
            groups.setdefault(key, []).append(vals)

    counts = {len(v) for v in groups.values()}
    if len(counts) != 1:
        raise SchemaError(f"{path}: inconsistent repetition counts {sorted(counts)}")
    reps = counts.pop()

    by_case: dict[str, list[LoadStep]] = {}
    for (label, phase, force_dan), series in groups.items():
        if label not in case_geometry:
            raise SchemaError(f"{path}: no geometry given for case {label!r}")
        direction, applied_at = case_geometry[label]
        arr = np.array(series)
        std = tuple(float(v) for v in arr.std(axis=0, ddof=1)) if reps > 1 else None
        by_case.setdefault(label, []).append(
            LoadStep(
                force=_si(force_dan, _DAN),
                direction=tuple(float(v) for v in direction),
                applied_at=tuple(float(v) for v in applied_at),
                phase=phase,
                readings=ReadingSet(tuple(float(v) for v in arr.mean(axis=0)), std),
            )
        )
    campaign = Campaign(
        block_id=block_id,
        sensor_config=sensor_config,
        cases=tuple(LoadCase(k, tuple(v)) for k, v in by_case.items()),
        repetitions=reps,
        description=description,
    )
    check_rank(campaign)
    return campaign


def iter_twists(case: LoadCase, cfg: SensorConfig) -> Iterable[tuple[LoadStep, Twist]]:
    R = reading_matrix(cfg)
    for s in case.steps:
        yield s, Twist.from_vector(R @ np.asarray(s.readings), at=cfg.expressed_at)
