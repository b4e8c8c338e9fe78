"""Membrane design vectors in millimetres, their bounds, and feasibility repair.

A design is (contact radius, thickness, ring 1, ring 2) where each ring is an
optional (centre radius, half-width) pair.  Ring absence is explicit
(``None``), never a sentinel number.  For optimisation a design is flattened
to the 6-vector ``[contact, thickness, r1, w1, r2, w2]`` together with a ring
count that fixes which slots are active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleError, ValidationError

RingMM = Optional[tuple[float, float]]


@dataclass(frozen=True)
class DesignVector:
    contact_radius: float
    thickness: float
    ring1: RingMM = None
    ring2: RingMM = None

    def __post_init__(self):
        if not (self.contact_radius > 0 and self.thickness > 0):
            raise ValidationError(f"contact radius and thickness must be positive: {self}")
        for ring in (self.ring1, self.ring2):
            if ring is not None:
                if len(ring) != 2 or not all(math.isfinite(v) and v > 0 for v in ring):
                    raise ValidationError(f"ring must be a positive (radius, width) pair, got {ring}")

    @property
    def n_rings(self) -> int:
        return int(self.ring1 is not None) + int(self.ring2 is not None)

    def rings(self) -> list[tuple[float, float]]:
        return [r for r in (self.ring1, self.ring2) if r is not None]

    def swapped(self) -> "DesignVector":
        return DesignVector(self.contact_radius, self.thickness, self.ring2, self.ring1)

    def as_array(self) -> np.ndarray:
        """Flat 6-vector; absent ring slots are NaN (in-memory only, never stored)."""
        r1 = self.ring1 if self.ring1 is not None else (math.nan, math.nan)
        r2 = self.ring2 if self.ring2 is not None else (math.nan, math.nan)
        return np.array([self.contact_radius, self.thickness, *r1, *r2], dtype=float)

    @classmethod
    def from_array(cls, x, n_rings: int) -> "DesignVector":
        x = [float(v) for v in x]
        r1 = (x[2], x[3]) if n_rings >= 1 else None
        r2 = (x[4], x[5]) if n_rings >= 2 else None
        return cls(x[0], x[1], r1, r2)

    def to_dict(self) -> dict:
        def ring(r):
            return None if r is None else {"radius_mm": r[0], "width_mm": r[1]}

        return {
            "contact_radius_mm": self.contact_radius,
            "thickness_mm": self.thickness,
            "ring1": ring(self.ring1),
            "ring2": ring(self.ring2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignVector":
        def ring(v):
            return None if v is None else (float(v["radius_mm"]), float(v["width_mm"]))

        return cls(float(d["contact_radius_mm"]), float(d["thickness_mm"]), ring(d.get("ring1")), ring(d.get("ring2")))

    def table_row(self) -> list:
        """Thickness, contact radius, ring 1 radius/width, ring 2 radius/width (nan when absent)."""
        r1 = self.ring1 or (math.nan, math.nan)
        r2 = self.ring2 or (math.nan, math.nan)
        return [self.thickness, self.contact_radius, r1[0], r1[1], r2[0], r2[1]]


@dataclass(frozen=True)
class DesignBounds:
    """Box bounds plus the spacing rules of the studied actuator class [mm]."""

    contact: tuple[float, float] = (25.4, 38.1)
    thickness: tuple[float, float] = (1.0, 3.0)
    ring_width: tuple[float, float] = (5.0, 10.0)
    outer_radius: float = 70.0
    edge_gap: float = 3.0
    ring_counts: tuple[int, ...] = (0, 1, 2)

    def __post_init__(self):
        for name in ("contact", "thickness", "ring_width"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValidationError(f"{name} bounds reversed: {lo} > {hi}")
        if not set(self.ring_counts) <= {0, 1, 2} or not self.ring_counts:
            raise ValidationError("ring_counts must be a nonempty subset of {0, 1, 2}")

    def ring_radius_range(self, width: float) -> tuple[float, float]:
        lo = self.contact[0] + self.edge_gap + width
        hi = self.outer_radius - self.edge_gap - width
        return lo, hi

    def lower_upper(self) -> tuple[np.ndarray, np.ndarray]:
        """Loose 6-d box used for sampling; projection enforces the coupled rules."""
        wlo, whi = self.ring_width
        rlo = self.contact[0] + self.edge_gap + wlo
        rhi = self.outer_radius - self.edge_gap - wlo
        lo = np.array([self.contact[0], self.thickness[0], rlo, wlo, rlo, wlo])
        hi = np.array([self.contact[1], self.thickness[1], rhi, whi, rhi, whi])
        return lo, hi


def is_feasible(d: DesignVector, b: DesignBounds, tol: float = 1e-9) -> bool:
    if d.n_rings not in b.ring_counts:
        return False
    if not (b.contact[0] - tol <= d.contact_radius <= b.contact[1] + tol):
        return False
    if not (b.thickness[0] - tol <= d.thickness <= b.thickness[1] + tol):
        return False
    if d.ring1 is None and d.ring2 is not None:
        return False
    rings = sorted(d.rings())
    edge = d.contact_radius + b.edge_gap
    for r, w in rings:
        if not (b.ring_width[0] - tol <= w <= b.ring_width[1] + tol):
            return False
        if r - w < edge - tol:
            return False
        edge = r + w + b.edge_gap
    return edge <= b.outer_radius + tol


def project(x, n_rings: int, b: DesignBounds) -> Optional[np.ndarray]:
    """Deterministic, idempotent feasibility repair of a flat 6-vector.

    Clamp every coordinate to its box, order the rings by radius, then shift
    rings inward from the rim and finally push them outward from the contact
    edge.  Returns None when the rings cannot fit at all.
    """
    x = np.array(x, dtype=float).copy()
    x[0] = min(max(x[0], b.contact[0]), b.contact[1])
    x[1] = min(max(x[1], b.thickness[0]), b.thickness[1])
    if n_rings == 0:
        x[2:] = math.nan
        return x
    rings = []
    for k in range(n_rings):
        r, w = x[2 + 2 * k], x[3 + 2 * k]
        w = min(max(w, b.ring_width[0]), b.ring_width[1])
        rings.append([r, w])
    rings.sort(key=lambda q: q[0])
    need = b.edge_gap * (n_rings + 1) + sum(2 * w for _, w in rings)
    if x[0] + need > b.outer_radius + 1e-12:
        return None
    # inward pass from the rim
    limit = b.outer_radius - b.edge_gap
    for q in reversed(rings):
        q[0] = min(q[0], limit - q[1])
        limit = q[0] - q[1] - b.edge_gap
    # outward pass from the contact edge
    edge = x[0] + b.edge_gap
    for q in rings:
        q[0] = max(q[0], edge + q[1])
        edge = q[0] + q[1] + b.edge_gap
    for k, (r, w) in enumerate(rings):
        x[2 + 2 * k], x[3 + 2 * k] = r, w
    if n_rings == 1:
        x[4:] = math.nan
    return x


def project_design(d: DesignVector, b: DesignBounds) -> DesignVector:
    x = project(d.as_array(), d.n_rings, b)
    if x is None:
        raise InfeasibleError(f"rings of {d} cannot fit within the bounds")
    return DesignVector.from_array(x, d.n_rings)


def sample_designs(b: DesignBounds, n: int, rng: np.random.Generator, n_rings: Optional[int] = None) -> list[DesignVector]:
    """Uniform box samples repaired by ``project``; ring count drawn from the allowed set."""
    lo, hi = b.lower_upper()
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100 * n + 100:
            raise InfeasibleError("could not draw feasible designs within the bounds")
        k = n_rings if n_rings is not None else int(rng.choice(b.ring_counts))
        x = project(lo + (hi - lo) * rng.random(6), k, b)
        if x is not None:
            out.append(DesignVector.from_array(x, k))
    return out
