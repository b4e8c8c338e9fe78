"""Closed-form objectives for a Wolfrom compound planetary gearbox and a dome check valve.

Gear lengths are in mm, as are valve lengths; valve forces come out in N and
pressures in Pa.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, InfeasibleError, ValidationError

VALID_OFFSETS = (-1, 0, 1, 2)


@dataclass(frozen=True)
class GearSet:
    zs: int
    zp1: int
    zr1: int
    zp2: int
    zr2: int
    xs: float
    xp1: float
    xr1: float
    xp2: float
    xr2: float
    m1: float = 1.0
    m2: float = 1.0
    clearance: float = 0.0
    mu_g: float = 0.0
    eps_a: float = 1.5
    eps_b: float = 1.5
    eps_c: float = 1.5

    def __post_init__(self):
        for name in ("zs", "zp1", "zr1", "zp2", "zr2"):
            v = getattr(self, name)
            if int(v) != v or v < 5:
                raise ValidationError(f"{name} must be an integer >= 5, got {v}")
        if not (self.m1 > 0 and self.m2 > 0):
            raise ValidationError("modules must be positive")
        if self.mu_g < 0:
            raise ValidationError("mesh friction coefficient must be nonnegative")
        if min(self.eps_a, self.eps_b, self.eps_c) <= 0:
            raise ValidationError("contact ratios must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def _rad(m: float, z: int, x: float, tip: bool) -> float:
    """Tip (+1) or root (-1) radius of a profile-shifted spur gear."""
    return 0.5 * m * (z + 2.0 * x + (1.0 if tip else -1.0))


def center_distances(g: GearSet) -> tuple[float, float, float]:
    """Sun/planet-1, planet-1/ring-1 and planet-2/ring-2 centre distances.

    Ring radii take the same ``+1`` convention as the external tip so that the
    three expressions are mutually consistent.
    """
    c = g.clearance
    ra = _rad(g.m1, g.zs, g.xs, True) + _rad(g.m1, g.zp1, g.xp1, False) + c
    rb = 0.5 * g.m1 * (g.zr1 + 2.0 * g.xr1 + 1.0) - _rad(g.m1, g.zp1, g.xp1, True) - c
    rc = 0.5 * g.m2 * (g.zr2 + 2.0 * g.xr2 + 1.0) - _rad(g.m2, g.zp2, g.xp2, True) - c
    return ra, rb, rc


def _split(y: float, offset: int, which: str) -> tuple[int, float]:
    zp = math.floor(y) + int(offset)
    xp = 0.5 * (y - zp)
    if abs(xp) > 1.0 + 1e-12:
        raise InfeasibleError(
            f"{which} offset {offset} gives tooth count {zp} with profile shift {xp:.4g} outside [-1, 1]"
        )
    return zp, xp


def solve_coaxial(
    zs: int,
    zr2: int,
    xs: float,
    xr2: float,
    zr1: int = 90,
    xr1: float = 2.0,
    m1: float = 1.0,
    m2: float = 1.0,
    clearance: float = 0.0,
    p1_offset: int = 0,
    p2_offset: int = 0,
    **kw,
) -> GearSet:
    """Planet tooth counts and profile shifts satisfying the coaxial constraint.

    ``Zp + 2 Xp = Y`` is split as ``Zp = floor(Y) + offset`` and
    ``Xp = (Y - Zp) / 2``; offsets in [-1, 2] always give ``|Xp| <= 1``.
    """
    c = clearance
    y1 = 0.5 * ((zr1 + 2.0 * xr1) - (zs + 2.0 * xs)) - 2.0 * c / m1
    zp1, xp1 = _split(y1, p1_offset, "planet 1")
    y2 = (m1 / m2) * ((zp1 + 2.0 * xp1) - (zr1 + 2.0 * xr1)) + (zr2 + 2.0 * xr2)
    zp2, xp2 = _split(y2, p2_offset, "planet 2")
    try:
        return GearSet(zs, zp1, zr1, zp2, zr2, xs, xp1, xr1, xp2, xr2, m1, m2, clearance, **kw)
    except ValidationError as exc:
        raise InfeasibleError(f"coaxial solution is not a valid gear set: {exc}") from exc


def ratio_terms(g: GearSet) -> tuple[Fraction, Fraction]:
    i1 = Fraction(g.zr1, g.zs)
    i2 = Fraction(g.zr1 * g.zp2, g.zr2 * g.zp1)
    return i1, i2


def gear_ratio_exact(g: GearSet) -> Fraction:
    i1, i2 = ratio_terms(g)
    return (1 - i2) / (1 + i1)


def gear_ratio(g: GearSet) -> float:
    """Output/input speed ratio; its reciprocal is the reduction."""
    return float(gear_ratio_exact(g))


def mesh_efficiency(z1: int, z2: int, sign: int, mu_g: float, eps: float) -> float:
    if z1 <= 0 or z2 <= 0:
        raise ValidationError("tooth counts must be positive")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 (external mesh) or -1 (internal mesh)")
    if eps <= 0:
        raise ValidationError("contact ratio must be positive")
    return 1.0 - mu_g * math.pi * (1.0 / z1 + sign / z2) * eps


def mesh_efficiencies(g: GearSet) -> tuple[float, float, float]:
    ea = mesh_efficiency(g.zs, g.zp1, 1, g.mu_g, g.eps_a)
    eb = mesh_efficiency(g.zp1, g.zr1, -1, g.mu_g, g.eps_b)
    ec = mesh_efficiency(g.zp2, g.zr2, -1, g.mu_g, g.eps_c)
    return ea, eb, ec


def backdrive_efficiency(g: GearSet) -> float:
    """Efficiency when torque enters at the output ring and leaves at the sun."""
    i1f, i2f = ratio_terms(g)
    if i2f == 1:
        raise DomainError("I2 = 1: the gearbox has zero ratio and back-drive efficiency is undefined")
    i1, i2 = float(i1f), float(i2f)
    ea, eb, ec = mesh_efficiencies(g)
    if i2 < 1:
        return (1 + i1) * ea * (eb * ec - i2) / (ec * (ea * eb + i1) * (1 - i2))
    return (1 + i1) * ea * (1 - eb * ec * i2) / ((ea * eb + i1) * (1 - i2))


def gear_reward(ratio: float, trials: Sequence[float]) -> float:
    """Reduction ratio divided by the largest trial torque once the worst trial is dropped."""
    ts = [float(t) for t in trials]
    if len(ts) < 2:
        raise ValidationError("need at least two torque trials")
    if any(not (0.0 < t <= 1.0) for t in ts):
        raise ValidationError("torque trials must be fractions of stall torque in (0, 1]")
    ts.remove(max(ts))
    return ratio / max(ts)


def standard_gear_set(**kw) -> GearSet:
    """Reference set-up used for the one-factor efficiency sweeps."""
    base = dict(zs=12, zp1=39, zr1=90, zp2=32, zr2=81, xs=0.48, xp1=0.76, xr1=2.0, xp2=0.54, xr2=1.21)
    base.update(kw)
    return GearSet(**base)


def one_factor_sweep(base: GearSet, field: str, values: Sequence[float]) -> list[tuple[float, float]]:
    """Back-drive efficiency as one attribute of the set is varied alone."""
    out = []
    for v in values:
        g = replace(base, **{field: type(getattr(base, field))(v)})
        out.append((float(v), backdrive_efficiency(g)))
    return out


@dataclass(frozen=True)
class ValveSpec:
    h_dome: float
    b0: float
    k_s: float
    k_r: float
    area: float

    def __post_init__(self):
        if not (self.h_dome > 0 and self.b0 > 0 and self.area > 0):
            raise ValidationError("dome height, dome radius and area must be positive")
        if self.k_s < 0 or self.k_r < 0:
            raise ValidationError("spring constants must be nonnegative")


def valve_spring_force(x: float, spec: ValveSpec) -> float:
    """Restoring force [N] of the dome with its apex at ``x`` [mm]."""
    b0, h = spec.b0, spec.h_dome
    s = math.sqrt(x * x + b0 * b0)
    linear = -spec.k_s * ((math.sqrt(h * h + b0 * b0) - s) / s) * x
    rot = spec.k_r / b0 * (math.atan(h / b0) + math.atan(x / b0)) / (x * x / (b0 * b0) + 1.0)
    return linear + rot


def crack_pressure(spec: ValveSpec) -> float:
    """Pressure difference [Pa] that drives the apex to x = 0."""
    return valve_spring_force(0.0, spec) / spec.area * 1e6


def valve_loss(target: float, actual: float) -> float:
    return abs(target - actual)


def reference_valve() -> ValveSpec:
    return ValveSpec(h_dome=3.0, b0=3.75, k_s=2.9e7, k_r=3.6e8, area=math.pi * 3.75**2)
