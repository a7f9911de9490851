"""Forward simulation of static load campaigns from a known stiffness.

Used as the oracle for the identification chain: readings are generated
from ``D = K_true^-1 T``, offset by a constant hysteresis whose sign follows
the phase, and perturbed by i.i.d. Gaussian noise on each transducer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

import numpy as np

from machstiff.errors import SchemaError, SingularK, ValidationError
from machstiff.ingest import (
    Campaign,
    LoadCase,
    LoadStep,
    ReadingSet,
    SensorConfig,
    SensorPair,
    default_sensor_config,
    load_json_exact,
    twist_to_reading_matrix,
)
from machstiff.torsor import wrench_from_point_force

MAX_CONDITION = 1e6


@dataclass(frozen=True)
class CaseGeometry:
    label: str
    direction: tuple[float, float, float]
    applied_at: tuple[float, float, float]  # m


def default_load_cases(half_size: float = 0.05) -> tuple[CaseGeometry, ...]:
    """Six loads, two points per axis direction, giving independent wrenches."""
    c = float(half_size)
    return (
        CaseGeometry("x1", (1.0, 0.0, 0.0), (0.0, 0.0, c)),
        CaseGeometry("x2", (1.0, 0.0, 0.0), (0.0, c, 0.0)),
        CaseGeometry("y1", (0.0, 1.0, 0.0), (c, 0.0, 0.0)),
        CaseGeometry("y2", (0.0, 1.0, 0.0), (0.0, 0.0, c)),
        CaseGeometry("z1", (0.0, 0.0, 1.0), (c, 0.0, 0.0)),
        CaseGeometry("z2", (0.0, 0.0, 1.0), (0.0, c, 0.0)),
    )


def translational_load_cases() -> tuple[CaseGeometry, ...]:
    o = (0.0, 0.0, 0.0)
    return (
        CaseGeometry("x", (1.0, 0.0, 0.0), o),
        CaseGeometry("y", (0.0, 1.0, 0.0), o),
        CaseGeometry("z", (0.0, 0.0, 1.0), o),
    )


def protocol_levels(step: float = 300.0, max_force: float = 2000.0) -> list[float]:
    """Loading levels ``step, 2 step, ...`` capped by ``max_force`` (included)."""
    if not (step > 0 and max_force >= step):
        raise ValidationError("need 0 < step <= max_force")
    n = int(np.floor(max_force / step + 1e-9))
    levels = [k * step for k in range(1, n + 1)]
    if max_force - levels[-1] > 1e-9 * max_force:
        levels.append(float(max_force))
    return levels


@dataclass(frozen=True, eq=False)
class SynthSpec:
    K_true: np.ndarray  # 6x6 (BT) or 3x3 translational (BW)
    sensor_config: SensorConfig
    cases: tuple[CaseGeometry, ...] = field(default_factory=default_load_cases)
    step: float = 300.0
    max_force: float = 2000.0
    hysteresis: float | tuple[float, ...] = 0.0  # m, per reading channel
    sigma: float = 0.0  # m
    seed: int = 0
    repetitions: int = 1

    def __post_init__(self):
        K = np.asarray(self.K_true, dtype=float)
        object.__setattr__(self, "K_true", K)
        if K.shape not in ((6, 6), (3, 3)):
            raise ValidationError(f"K_true must be 6x6 or 3x3, got {K.shape}")
        if np.any(np.asarray(self.hysteresis) < 0) or self.sigma < 0:
            raise ValidationError("hysteresis and sigma must be non-negative")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")

    @property
    def block_id(self) -> str:
        return "BT" if self.K_true.shape == (6, 6) else "BW"


def simulate_campaign(spec: SynthSpec) -> Campaign:
    K = spec.K_true
    cond = np.linalg.cond(K)
    if not np.isfinite(cond):
        raise SingularK("K_true is singular")
    if cond >= MAX_CONDITION:
        raise ValidationError(f"K_true condition {cond:.3g} exceeds {MAX_CONDITION:g}")
    cfg = spec.sensor_config
    G = twist_to_reading_matrix(cfg)
    h = np.broadcast_to(np.asarray(spec.hysteresis, dtype=float), (6,))
    rng = np.random.default_rng(spec.seed)
    levels = protocol_levels(spec.step, spec.max_force)

    cases = []
    for geo in spec.cases:
        w = wrench_from_point_force(geo.direction, geo.applied_at, cfg.expressed_at)
        if spec.block_id == "BT":
            d = np.linalg.solve(K, w.vector)
        else:
            d = np.concatenate([np.zeros(3), np.linalg.solve(K, w.force)])
        steps = []
        for phase, sign, seq in (("charge", 1.0, levels), ("discharge", -1.0, levels[::-1])):
            for f in seq:
                base = G @ (f * d) + sign * h
                if spec.sigma > 0:
                    runs = base + rng.normal(0.0, spec.sigma, size=(spec.repetitions, 6))
                else:
                    runs = np.tile(base, (spec.repetitions, 1))
                std = tuple(float(v) for v in runs.std(axis=0, ddof=1)) if spec.repetitions > 1 else None
                steps.append(LoadStep(
                    force=float(f),
                    direction=geo.direction,
                    applied_at=geo.applied_at,
                    phase=phase,
                    readings=ReadingSet(tuple(float(v) for v in runs.mean(axis=0)), std),
                ))
        cases.append(LoadCase(geo.label, tuple(steps)))
    return Campaign(
        block_id=spec.block_id,
        sensor_config=cfg,
        cases=tuple(cases),
        repetitions=spec.repetitions,
        description=f"synthetic campaign (seed {spec.seed})",
    )


def random_stiffness(rng: np.random.Generator, max_condition: float = 1e4, scale: float = 1e6) -> np.ndarray:
    """Random dense 6x6 matrix with condition number in [1, max_condition]."""
    U, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    V, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    s = np.geomspace(1.0, rng.uniform(1.0, max_condition), 6)
    return scale * (U * s) @ V.T


def tool_block_like_spec(seed: int = 0, sigma: float = 1e-7, repetitions: int = 5,
                    hysteresis: float = 2e-6) -> SynthSpec:
    """Tool-block-like test case: dense coupling, tens of micrometres at full load.

    The true compliance is built so every load case moves every twist
    component (translations ~1e-8 m/N, rotations ~2e-8 rad/N), which is what
    keeps every error-matrix entry meaningful.
    """
    cfg = default_sensor_config(0.1)
    geos = default_load_cases()
    T = np.column_stack([wrench_from_point_force(g.direction, g.applied_at, cfg.expressed_at).vector for g in geos])
    structure = np.random.default_rng(2090)
    dense = structure.uniform(0.5, 1.0, (6, 6)) * structure.choice([-1.0, 1.0], (6, 6))
    D = np.diag([2e-8] * 3 + [1e-8] * 3) @ (dense + 2.5 * np.eye(6))
    K = T @ np.linalg.inv(D)
    return SynthSpec(K, cfg, geos, hysteresis=hysteresis, sigma=sigma, seed=seed, repetitions=repetitions)


# ---------------------------------------------------------------------------
# SynthSpec JSON
# ---------------------------------------------------------------------------

def _f(x) -> float:
    return float(x)


def spec_from_dict(data: dict) -> SynthSpec:
    """Build a SynthSpec from its JSON document.

    Keys: ``K_true`` (SI), ``sensor_config`` (campaign format, mm),
    optional ``protocol`` {``step_N``, ``max_N``, ``cases`` [{label,
    direction, applied_at_mm}]}, ``hysteresis_m``, ``sigma_m``, ``seed``,
    ``repetitions``.
    """
    try:
        sc = data["sensor_config"]
        cfg = SensorConfig(
            pairs=tuple(
                SensorPair(
                    tuple(_f(v) for v in p["measure_axis"]),
                    tuple(_f(v) for v in p["separation_axis"]),
                    float(Decimal(p["spacing_mm"]).scaleb(-3)),
                    tuple(int(i) for i in p["sensors"]),
                )
                for p in sc["pairs"]
            ),
            expressed_at=tuple(float(Decimal(v).scaleb(-3)) for v in sc["expressed_at_mm"]),
        )
        K = np.array([[_f(v) for v in row] for row in data["K_true"]])
        proto = data.get("protocol", {})
        if "cases" in proto:
            cases = tuple(
                CaseGeometry(c["label"], tuple(_f(v) for v in c["direction"]),
                             tuple(float(Decimal(v).scaleb(-3)) for v in c["applied_at_mm"]))
                for c in proto["cases"]
            )
        else:
            cases = default_load_cases() if K.shape == (6, 6) else translational_load_cases()
        h = data.get("hysteresis_m", 0.0)
        h = tuple(_f(v) for v in h) if isinstance(h, list) else _f(h)
        return SynthSpec(
            K_true=K,
            sensor_config=cfg,
            cases=cases,
            step=_f(proto.get("step_N", 300.0)),
            max_force=_f(proto.get("max_N", 2000.0)),
            hysteresis=h,
            sigma=_f(data.get("sigma_m", 0.0)),
            seed=int(data.get("seed", 0)),
            repetitions=int(data.get("repetitions", 1)),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"invalid synth spec: {exc!r}") from exc


def load_spec(path) -> SynthSpec:
    return spec_from_dict(load_json_exact(Path(path).read_text(encoding="utf-8")))
