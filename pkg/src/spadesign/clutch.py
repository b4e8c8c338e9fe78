"""Electroadhesive clutch forces, silicone sheath tension and the drop-stage model."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, NumericError, ValidationError
from .material import LOCKUP_GUARD, GentMaterial, uniaxial_stress

EPS0 = 8.8541878128e-12  # vacuum permittivity [F/m]
G = 9.80665


@dataclass(frozen=True)
class ClutchSpec:
    mu_f: float
    eps_r: float
    area: float
    gap_d: float
    voltage: float

    def __post_init__(self):
        for name in ("area", "gap_d"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.mu_f < 0 or self.voltage < 0:
            raise ValidationError("friction coefficient and voltage must be nonnegative")
        if not self.eps_r >= 1:
            raise ValidationError(f"relative permittivity must be >= 1, got {self.eps_r}")


def ea_normal_force_ideal(spec: ClutchSpec) -> float:
    """Parallel-plate attraction with the whole gap filled by dielectric."""
    return EPS0 * spec.eps_r * spec.area * spec.voltage**2 / (2.0 * spec.gap_d**2)


def ea_normal_force_airgap(spec: ClutchSpec) -> float:
    """Attraction across a thin air gap in series with the dielectric layer."""
    return EPS0 * spec.area * (spec.eps_r * spec.voltage / spec.gap_d) ** 2 / 2.0


def clutch_friction_force(spec: ClutchSpec, model: str = "airgap") -> float:
    if model == "airgap":
        return spec.mu_f * ea_normal_force_airgap(spec)
    if model == "ideal":
        return spec.mu_f * ea_normal_force_ideal(spec)
    raise ValidationError(f"unknown clutch model {model!r}; use 'airgap' or 'ideal'")


@dataclass(frozen=True)
class SheathSpec:
    material: GentMaterial
    cross_section: float
    rest_length: float

    def __post_init__(self):
        if not (self.cross_section > 0 and self.rest_length > 0):
            raise ValidationError("sheath cross-section and rest length must be positive")

    def max_extension(self, guard: float = LOCKUP_GUARD) -> float:
        return (self.material.lockup_stretch("uniaxial", guard) - 1.0) * self.rest_length


def sheath_force(extension: float, spec: SheathSpec) -> float:
    """Tension [N] of a uniaxially stretched sheath (negative in compression)."""
    lam = 1.0 + extension / spec.rest_length
    if lam <= 0:
        raise DomainError(f"extension {extension} m collapses the sheath")
    return uniaxial_stress(lam, spec.material) * spec.cross_section


def sheath_energy(e_lo: float, e_hi: float, spec: SheathSpec) -> float:
    """Work [J] stored in the sheath between two extensions, by adaptive quadrature."""
    val, _ = quad(lambda e: sheath_force(e, spec), e_lo, e_hi, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def combined_holding_force(sheath_f: float, clutch_f: float, zeta: float) -> float:
    if not 0.0 <= zeta <= 1.0:
        raise ValidationError(f"zeta must lie in [0, 1], got {zeta}")
    return sheath_f + zeta * clutch_f


@dataclass(frozen=True)
class DutyCalibration:
    duty: tuple[float, ...]
    zeta: tuple[float, ...]

    def __post_init__(self):
        d, z = np.asarray(self.duty, float), np.asarray(self.zeta, float)
        if d.shape != z.shape or d.ndim != 1 or d.size < 2:
            raise ValidationError("calibration needs matching duty and zeta knot lists")
        if np.any(np.diff(d) <= 0):
            raise ValidationError("duty knots must be strictly increasing")
        if d[0] != 0.0 or d[-1] != 1.0 or z[0] != 0.0 or z[-1] != 1.0:
            raise ValidationError("calibration must start at (0, 0) and end at (1, 1)")
        if np.any(np.diff(z) < 0) or np.any(z < 0) or np.any(z > 1):
            raise ValidationError("zeta knots must be nondecreasing within [0, 1]")

    @classmethod
    def from_knots(cls, knots: Sequence[tuple[float, float]]) -> "DutyCalibration":
        """Sort knots and pin the terminal points (0, 0) and (1, 1)."""
        pts = {float(d): float(z) for d, z in knots if 0.0 < d < 1.0}
        pts[0.0] = 0.0
        pts[1.0] = 1.0
        ds = sorted(pts)
        return cls(tuple(ds), tuple(pts[d] for d in ds))

    @classmethod
    def from_csv(cls, path) -> "DutyCalibration":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        if not rows:
            raise ValidationError(f"empty calibration file {path}")
        try:
            body = rows[1:] if not _is_number(rows[0][0]) else rows
            knots = [(float(r[0]), float(r[1])) for r in body]
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"bad calibration row in {path}: {exc}") from exc
        return cls.from_knots(knots)

    @classmethod
    def default(cls) -> "DutyCalibration":
        """Approximate table shipped in the package data directory (see file header)."""
        with resources.as_file(resources.files("spadesign") / "data" / "pwm_zeta.csv") as p:
            return cls.from_csv(p)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def zeta_from_duty(duty: float, cal: DutyCalibration) -> float:
    if not 0.0 <= duty <= 1.0:
        raise ValidationError(f"duty must lie in [0, 1], got {duty}")
    return float(np.interp(duty, cal.duty, cal.zeta))


@dataclass(frozen=True)
class StageDropParams:
    mass: float
    stage_mass: float
    h0: float
    friction: float
    sheath: SheathSpec
    clutch_max: float
    zeta: float = 0.0
    g: float = G

    def __post_init__(self):
        if self.mass < 0 or self.stage_mass < 0 or self.h0 < 0:
            raise ValidationError("masses and drop height must be nonnegative")
        if self.friction < 0 or self.clutch_max < 0:
            raise ValidationError("friction and clutch force must be nonnegative")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValidationError(f"zeta must lie in [0, 1], got {self.zeta}")
        if self.mass + self.stage_mass <= 0:
            raise ValidationError("total mass must be positive")

    @property
    def total_mass(self) -> float:
        return self.mass + self.stage_mass


@dataclass(frozen=True)
class StageDropResult:
    displacement: float
    oscillates: bool
    pretension_extension: float
    initial_ke: float
    residual_force: float
    energy_residual: float


def pretension_extension(p: StageDropParams) -> float:
    """Sheath extension at which the sheath alone carries the stage weight."""
    w = p.stage_mass * p.g
    if w == 0.0:
        return 0.0
    hi = p.sheath.max_extension()
    if sheath_force(hi, p.sheath) < w:
        raise DomainError("sheath locks up before it can carry the stage weight")
    return brentq(lambda e: sheath_force(e, p.sheath) - w, 0.0, hi, xtol=1e-15, rtol=1e-14)


def initial_ke(p: StageDropParams) -> float:
    """Kinetic energy right after a perfectly inelastic landing."""
    return p.mass * p.g * p.h0 * p.mass / p.total_mass


def stage_ke(d: float, p: StageDropParams, e0: Optional[float] = None) -> float:
    """Kinetic energy of stage plus mass after a downward travel ``d``."""
    if e0 is None:
        e0 = pretension_extension(p)
    return (
        initial_ke(p)
        + p.total_mass * p.g * d
        - p.friction * d
        - sheath_energy(e0, e0 + d, p.sheath)
        - p.zeta * p.clutch_max * d
    )


def stage_drop(p: StageDropParams) -> StageDropResult:
    """Travel until the kinetic energy is used up, and whether the stage rebounds.

    The stage rebounds when the sheath tension at rest exceeds the combined weight.
    """
    e0 = pretension_extension(p)
    ke0 = initial_ke(p)
    d_max = p.sheath.max_extension() - e0
    ke = lambda d: stage_ke(d, p, e0)
    if ke0 == 0.0:
        d_star = 0.0
    else:
        # The KE curve is concave (sheath force rises with extension), so the
        # first zero is bracketed by stepping out until it goes negative.
        n = 64
        grid = np.linspace(0.0, d_max, n + 1)[1:]
        d_star = None
        prev = 0.0
        for d in grid:
            if ke(d) <= 0.0:
                d_star = brentq(ke, prev, d, xtol=1e-15, rtol=1e-14)
                break
            prev = d
        if d_star is None:
            raise NumericError(
                f"kinetic energy stays positive up to sheath lock-up ({d_max * 1e3:.3g} mm travel); model breaks down"
            )
    resid_force = sheath_force(e0 + d_star, p.sheath) - p.total_mass * p.g
    return StageDropResult(
        displacement=float(d_star),
        oscillates=bool(resid_force > 0.0),
        pretension_extension=float(e0),
        initial_ke=float(ke0),
        residual_force=float(resid_force),
        energy_residual=float(ke(d_star)) if d_star > 0 else 0.0,
    )


def reference_drop_setup(zeta: float = 0.0, mu_kpa: float = 17.0, jm: float = 39.6) -> StageDropParams:
    """Drop-stage rig: 200 g dropped 200 mm onto a 700 g stage held by two sheathed clutches.

    Each clutch uses two 3 mm x 30 mm Ecoflex strips (four in total) with 60 mm
    of free length between adhesive bonds.  The clutch force ceiling is two
    clutches at 22 N each.  The extension limit is not reported for the
    published shear modulus and defaults to the measured value.
    """
    sheath = SheathSpec(GentMaterial.from_kpa(mu_kpa, jm), cross_section=4 * 3e-3 * 30e-3, rest_length=60e-3)
    return StageDropParams(
        mass=0.2, stage_mass=0.7, h0=0.2, friction=2.5, sheath=sheath, clutch_max=2 * 22.0, zeta=zeta
    )


def oscillation_threshold(base: StageDropParams, tol: float = 1e-6) -> float:
    """Smallest zeta at which the stage no longer rebounds, by bisection on the flag."""
    flag = lambda z: stage_drop(_with_zeta(base, z)).oscillates
    if not flag(0.0):
        return 0.0
    if flag(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flag(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _with_zeta(p: StageDropParams, z: float) -> StageDropParams:
    from dataclasses import replace

    return replace(p, zeta=z)


def zeta_sweep(base: StageDropParams, zetas: Sequence[float]) -> list[tuple[float, StageDropResult]]:
    return [(float(z), stage_drop(_with_zeta(base, float(z)))) for z in zetas]
