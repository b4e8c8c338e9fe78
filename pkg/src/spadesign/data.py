"""Neutral lift-dataset schema, validation, trimming, export and conversion.

Stored datasets are JSON.  Absent rings are explicit ``null``; optional
channels (heights, flow, contact) are either arrays or ``null``.  Sample
channels are stored column-wise.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import jsonschema
import numpy as np

from .designvec import DesignVector
from .errors import ValidationError
from .surrogate import SampleSet

FORMAT = "spadesign-lift-dataset"
VERSION = 1

_NUM_ARRAY = {"type": "array", "items": {"type": "number"}}
_OPT_NUM_ARRAY = {"oneOf": [{"type": "null"}, _NUM_ARRAY]}
_RING = {
    "oneOf": [
        {"type": "null"},
        {
            "type": "object",
            "required": ["radius_mm", "width_mm"],
            "properties": {"radius_mm": {"type": "number", "exclusiveMinimum": 0},
                           "width_mm": {"type": "number", "exclusiveMinimum": 0}},
        },
    ]
}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "version", "membranes"],
    "properties": {
        "format": {"const": FORMAT},
        "version": {"const": VERSION},
        "membranes": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["design", "trials"],
                "properties": {
                    "design": {
                        "type": "object",
                        "required": ["contact_radius_mm", "thickness_mm", "ring1", "ring2"],
                        "properties": {
                            "contact_radius_mm": {"type": "number", "exclusiveMinimum": 0},
                            "thickness_mm": {"type": "number", "exclusiveMinimum": 0},
                            "ring1": _RING,
                            "ring2": _RING,
                        },
                    },
                    "trials": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["height_mm", "trial", "samples"],
                            "properties": {
                                "height_mm": {"type": "number", "minimum": 0},
                                "trial": {"type": "integer", "minimum": 1, "maximum": 3},
                                "fracture": {"type": "boolean"},
                                "metadata": {"type": "object"},
                                "samples": {
                                    "type": "object",
                                    "required": ["time_s", "pressure_kpa", "force_n"],
                                    "properties": {
                                        "time_s": _NUM_ARRAY,
                                        "pressure_kpa": _NUM_ARRAY,
                                        "force_n": _NUM_ARRAY,
                                        "height_left_mm": _OPT_NUM_ARRAY,
                                        "height_right_mm": _OPT_NUM_ARRAY,
                                        "flow": _OPT_NUM_ARRAY,
                                        "contact": {"oneOf": [{"type": "null"},
                                                              {"type": "array", "items": {"type": "boolean"}}]},
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}

_KNOWN = {
    "": {"format", "version", "membranes"},
    "membrane": {"design", "trials"},
    "design": {"contact_radius_mm", "thickness_mm", "ring1", "ring2"},
    "ring": {"radius_mm", "width_mm"},
    "trial": {"height_mm", "trial", "fracture", "metadata", "samples"},
    "samples": {"time_s", "pressure_kpa", "force_n", "height_left_mm", "height_right_mm", "flow", "contact"},
}


@dataclass(frozen=True)
class Trial:
    height: float
    index: int
    time: tuple[float, ...]
    pressure: tuple[float, ...]
    force: tuple[float, ...]
    height_left: Optional[tuple[float, ...]] = None
    height_right: Optional[tuple[float, ...]] = None
    flow: Optional[tuple[float, ...]] = None
    contact: Optional[tuple[bool, ...]] = None
    fracture: bool = False
    metadata: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        n = len(self.time)
        if not 1 <= self.index <= 3:
            raise ValidationError(f"trial index must be 1, 2 or 3, got {self.index}")
        if len(self.pressure) != n or len(self.force) != n:
            raise ValidationError("time, pressure and force channels must have equal length")
        for name in ("height_left", "height_right", "flow", "contact"):
            v = getattr(self, name)
            if v is not None and len(v) != n:
                raise ValidationError(f"channel {name} has {len(v)} samples, expected {n}")
        if any(b < a for a, b in zip(self.time, self.time[1:])):
            raise ValidationError("samples must be time-ordered")

    def __len__(self) -> int:
        return len(self.time)

    def sliced(self, stop: int) -> "Trial":
        cut = lambda v: None if v is None else tuple(v[:stop])
        return replace(
            self, time=cut(self.time), pressure=cut(self.pressure), force=cut(self.force),
            height_left=cut(self.height_left), height_right=cut(self.height_right),
            flow=cut(self.flow), contact=cut(self.contact),
        )

    def to_dict(self) -> dict:
        lst = lambda v: None if v is None else list(v)
        return {
            "height_mm": self.height,
            "trial": self.index,
            "fracture": self.fracture,
            "metadata": dict(self.metadata),
            "samples": {
                "time_s": list(self.time),
                "pressure_kpa": list(self.pressure),
                "force_n": list(self.force),
                "height_left_mm": lst(self.height_left),
                "height_right_mm": lst(self.height_right),
                "flow": lst(self.flow),
                "contact": lst(self.contact),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trial":
        s = d["samples"]
        opt = lambda k: None if s.get(k) is None else tuple(s[k])
        return cls(
            float(d["height_mm"]), int(d["trial"]), tuple(map(float, s["time_s"])),
            tuple(map(float, s["pressure_kpa"])), tuple(map(float, s["force_n"])),
            opt("height_left_mm"), opt("height_right_mm"), opt("flow"), opt("contact"),
            bool(d.get("fracture", False)), dict(d.get("metadata") or {}),
        )


@dataclass(frozen=True)
class Membrane:
    design: DesignVector
    trials: tuple[Trial, ...] = ()


@dataclass(frozen=True)
class LiftDataset:
    membranes: dict = field(default_factory=dict, hash=False)

    def __len__(self) -> int:
        return len(self.membranes)

    def n_points(self) -> dict[str, int]:
        return {k: sum(len(t) for t in m.trials) for k, m in self.membranes.items()}

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "membranes": {
                k: {"design": m.design.to_dict(), "trials": [t.to_dict() for t in m.trials]}
                for k, m in self.membranes.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LiftDataset":
        validate(d)
        out = {}
        for k, m in d["membranes"].items():
            where = f"membranes/{k}"
            try:
                out[k] = Membrane(DesignVector.from_dict(m["design"]), tuple(Trial.from_dict(t) for t in m["trials"]))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
        return cls(out)


def _unknown_fields(d: dict) -> list[str]:
    found = []

    def check(obj, kind, path):
        if isinstance(obj, dict):
            for key in obj:
                if key not in _KNOWN[kind]:
                    found.append(f"{path}/{key}" if path else key)

    check(d, "", "")
    for mid, m in (d.get("membranes") or {}).items():
        base = f"membranes/{mid}"
        check(m, "membrane", base)
        des = m.get("design") or {}
        check(des, "design", base + "/design")
        for rk in ("ring1", "ring2"):
            check(des.get(rk) or {}, "ring", f"{base}/design/{rk}")
        for i, t in enumerate(m.get("trials") or []):
            check(t, "trial", f"{base}/trials/{i}")
            check(t.get("samples") or {}, "samples", f"{base}/trials/{i}/samples")
    return found


def validate(d: Any) -> list[str]:
    """Raise ValidationError with a JSON path on schema violation; warn about unknown fields."""
    try:
        jsonschema.validate(d, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"schema violation at {path}: {exc.message}") from None
    unknown = _unknown_fields(d)
    for u in unknown:
        warnings.warn(f"unknown dataset field ignored: {u}", stacklevel=3)
    return unknown


def load_dataset(path) -> LiftDataset:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return LiftDataset.from_dict(d)


def save_dataset(ds: LiftDataset, path) -> None:
    Path(path).write_text(json.dumps(ds.to_dict(), indent=1, allow_nan=False) + "\n")


# ---------------------------------------------------------------------------
# Trimming


@dataclass(frozen=True)
class TrimPolicy:
    keep_trial: int = 3
    inflation_only: bool = True
    drop_fracture: bool = True

    def __post_init__(self):
        if self.keep_trial not in (1, 2, 3):
            raise ValidationError("keep_trial must be 1, 2 or 3")


def inflation_cut(trial: Trial) -> Trial:
    """Keep samples up to and including the first global pressure maximum."""
    if len(trial) == 0:
        return trial
    stop = int(np.argmax(np.asarray(trial.pressure))) + 1
    return trial if stop == len(trial) else trial.sliced(stop)


def trim_dataset(ds: LiftDataset, policy: TrimPolicy = TrimPolicy()) -> LiftDataset:
    out = {}
    for k, m in ds.membranes.items():
        trials = [t for t in m.trials if t.index == policy.keep_trial and not (policy.drop_fracture and t.fracture)]
        if policy.inflation_only:
            trials = [inflation_cut(t) for t in trials]
        out[k] = Membrane(m.design, tuple(trials))
    return LiftDataset(out)


def to_samples(ds: LiftDataset) -> SampleSet:
    """Flatten to the surrogate's training table; each (membrane, plate height) is one test."""
    mem, test, hs, ps, fs = [], [], [], [], []
    for k, m in ds.membranes.items():
        for t in m.trials:
            n = len(t)
            mem += [k] * n
            test += [f"{t.height:.17g}"] * n
            hs += [t.height] * n
            ps += list(t.pressure)
            fs += list(t.force)
    designs = {k: m.design for k, m in ds.membranes.items() if any(len(t) for t in m.trials)}
    return SampleSet(designs, np.array(mem, dtype=object), np.array(test, dtype=object), hs, ps, fs)


def samples_to_dataset(samples: SampleSet, trial: int = 3) -> LiftDataset:
    """Group a flat table back into per-membrane constant-height trials (pressure-ordered)."""
    out = {}
    for k in samples.membrane_ids:
        sel = samples.membrane == k
        trials = []
        for t in dict.fromkeys(samples.test[sel].tolist()):
            rows = sel & (samples.test == t)
            order = np.argsort(samples.pressure[rows], kind="stable")
            p, f = samples.pressure[rows][order], samples.force[rows][order]
            trials.append(Trial(float(samples.height[rows][0]), trial, tuple(float(i) for i in range(p.size)),
                                tuple(map(float, p)), tuple(map(float, f))))
        out[k] = Membrane(samples.designs[k], tuple(trials))
    return LiftDataset(out)


def map_to_dataset(
    rows, design: DesignVector, heights_mm: Sequence[float], membrane_id: str = "bvp", trial: int = 3
) -> LiftDataset:
    """Resample a solved force-height map (SI rows) as constant-height lift trials.

    Every converged pressure column is interpolated at each plate height; the
    resulting trial has one sample per pressure in increasing order.
    """
    from .membrane import ForceInterpolator

    interp = ForceInterpolator.from_rows(rows)
    pressures = [c[0] for c in interp.columns]
    trials = []
    for h in heights_mm:
        f = [interp.force(p, h * 1e-3) for p in pressures]
        trials.append(Trial(float(h), trial, tuple(float(i) for i in range(len(pressures))),
                            tuple(p * 1e-3 for p in pressures), tuple(f), metadata={"source": "membrane map"}))
    return LiftDataset({membrane_id: Membrane(design, tuple(trials))})


# ---------------------------------------------------------------------------
# Tables


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def format_table(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for r in rows:
        if len(r) != len(columns):
            raise ValidationError(f"row has {len(r)} cells, expected {len(columns)}")
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def export_table(columns: Sequence[str], rows: Iterable[Sequence[Any]], path=None) -> str:
    """CSV with 17 significant digits; written to ``path`` when given, returned always."""
    text = format_table(columns, rows)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _parse(cell: str):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    if cell == "-0":  # negative zero is written by the float formatter
        return -0.0
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def load_table(path) -> tuple[list[str], list[list[Any]]]:
    with open(path, newline="") as fh:
        return parse_table(fh.read())


def parse_table(text: str) -> tuple[list[str], list[list[Any]]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValidationError("table has no header")
    return rows[0], [[_parse(c) for c in r] for r in rows[1:]]


def export_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def map_table(rows) -> tuple[list[str], list[list[Any]]]:
    cols = ["pressure_pa", "force_n", "height_m", "residual", "converged", "multiple_roots", "message"]
    return cols, [[r.pressure, r.force, r.height, r.residual, r.converged, r.multiple_roots, r.message] for r in rows]


def design_row(d: DesignVector) -> list:
    return d.table_row()


DESIGN_COLUMNS = ["thickness_mm", "contact_radius_mm", "ring1_radius_mm", "ring1_width_mm", "ring2_radius_mm", "ring2_width_mm"]
