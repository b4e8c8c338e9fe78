"""Axisymmetric inflation of strain-limited membranes.

The membrane is clamped at the rim ``rf`` and carries a rigid contact disc of
radius ``r0`` that pushes against an external load ``F``.  For a given gauge
pressure and load we solve the meridian equilibrium equations from the disc
edge to the rim by shooting on the unknown meridional stretch ``lambda1(r0)``
so that the rim condition ``lambda2(rf) = 1`` holds.

Internally the meridian is integrated with the angle convention
``R' = lambda1 cos(beta)`` and ``Z' = lambda1 sin(beta)``, in which positive
``beta`` means the sheet descends from the disc towards the rim.  Reported
heights flip that axis so that upward is positive and the rim sits at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    DomainError,
    InfeasibleError,
    NoConvergenceError,
    NumericError,
    SingularityError,
    ValidationError,
)
from .material import LOCKUP_GUARD, GentMaterial, membrane_partials

# Contact disc size limits and rim radius of the studied actuator class [m].
DEFAULT_OUTER_RADIUS = 70e-3


@dataclass(frozen=True)
class Ring:
    """Strain-limiting annulus described by its centre radius and half-width [m]."""

    center: float
    half_width: float

    def __post_init__(self):
        if not (self.center > 0 and self.half_width > 0):
            raise ValidationError(f"ring centre and half-width must be positive: {self}")

    @property
    def inner(self) -> float:
        return self.center - self.half_width

    @property
    def outer(self) -> float:
        return self.center + self.half_width


@dataclass(frozen=True)
class MembraneDesign:
    thickness: float
    contact_radius: float
    elastic: GentMaterial
    limiter: Optional[GentMaterial] = None
    ring1: Optional[Ring] = None
    ring2: Optional[Ring] = None
    outer_radius: float = DEFAULT_OUTER_RADIUS

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValidationError(f"thickness must be positive, got {self.thickness}")
        if not (0 < self.contact_radius < self.outer_radius):
            raise ValidationError(
                f"need 0 < contact radius < outer radius, got {self.contact_radius}, {self.outer_radius}"
            )
        rings = self.rings
        if rings and self.limiter is None:
            raise ValidationError("a ringed design needs a limiter material")
        for ring in rings:
            if not (self.contact_radius < ring.inner and ring.outer < self.outer_radius):
                raise ValidationError(
                    f"ring [{ring.inner}, {ring.outer}] must lie strictly inside "
                    f"({self.contact_radius}, {self.outer_radius})"
                )
        if len(rings) == 2:
            a, b = sorted(rings, key=lambda g: g.center)
            if not a.outer < b.inner:
                raise ValidationError(f"rings overlap: {a} and {b}")

    @property
    def rings(self) -> tuple[Ring, ...]:
        return tuple(g for g in (self.ring1, self.ring2) if g is not None)

    def segments(self) -> list[tuple[float, float, GentMaterial]]:
        """Material layout from the disc edge to the rim.

        Adjacent pieces that share a material are merged, so a design whose
        limiter equals the elastic material integrates exactly like a ringless one.
        """
        cuts = [(self.contact_radius, self.elastic)]
        for ring in sorted(self.rings, key=lambda g: g.center):
            cuts.append((ring.inner, self.limiter))
            cuts.append((ring.outer, self.elastic))
        segs: list[tuple[float, float, GentMaterial]] = []
        for i, (start, mat) in enumerate(cuts):
            end = cuts[i + 1][0] if i + 1 < len(cuts) else self.outer_radius
            if segs and segs[-1][2] == mat:
                segs[-1] = (segs[-1][0], end, mat)
            else:
                segs.append((start, end, mat))
        return segs

    @classmethod
    def from_mm(
        cls,
        thickness_mm: float,
        contact_radius_mm: float,
        elastic: GentMaterial,
        limiter: Optional[GentMaterial] = None,
        ring1_mm: Optional[tuple[float, float]] = None,
        ring2_mm: Optional[tuple[float, float]] = None,
        outer_radius_mm: float = 70.0,
    ) -> "MembraneDesign":
        """Build from mm-based inputs, rings as (centre radius, half-width)."""

        def ring(v):
            return None if v is None else Ring(v[0] * 1e-3, v[1] * 1e-3)

        return cls(
            thickness=thickness_mm * 1e-3,
            contact_radius=contact_radius_mm * 1e-3,
            elastic=elastic,
            limiter=limiter,
            ring1=ring(ring1_mm),
            ring2=ring(ring2_mm),
            outer_radius=outer_radius_mm * 1e-3,
        )

    def to_dict(self) -> dict:
        """JSON-friendly description in mm and kPa."""

        def ring(g):
            return None if g is None else {"radius_mm": g.center * 1e3, "width_mm": g.half_width * 1e3}

        def mat(m):
            return None if m is None else {"mu_kpa": m.mu * 1e-3, "jm": m.jm}

        return {
            "thickness_mm": self.thickness * 1e3,
            "contact_radius_mm": self.contact_radius * 1e3,
            "outer_radius_mm": self.outer_radius * 1e3,
            "ring1": ring(self.ring1),
            "ring2": ring(self.ring2),
            "elastic": mat(self.elastic),
            "limiter": mat(self.limiter),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MembraneDesign":
        try:
            def ring(v):
                return None if v is None else (float(v["radius_mm"]), float(v["width_mm"]))

            def mat(v):
                return None if v is None else GentMaterial.from_kpa(float(v["mu_kpa"]), float(v["jm"]))

            return cls.from_mm(
                thickness_mm=float(d["thickness_mm"]),
                contact_radius_mm=float(d["contact_radius_mm"]),
                elastic=mat(d["elastic"]),
                limiter=mat(d.get("limiter")),
                ring1_mm=ring(d.get("ring1")),
                ring2_mm=ring(d.get("ring2")),
                outer_radius_mm=float(d.get("outer_radius_mm", 70.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed design description: {exc!r}") from exc


@dataclass(frozen=True)
class MembraneState:
    lambda1: float
    lambda2: float
    beta: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValidationError(f"stretches must be positive: {self}")
        # The sheet may bulge outward past the rim radius near the clamp, where
        # beta exceeds pi/2; only a full fold-back is excluded.
        if not abs(self.beta) < math.pi:
            raise ValidationError(f"|beta| must stay below pi: {self}")


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    tolerance: float = 1e-6
    # Search interval for lambda1(r0); None for the upper end means 0.95 of the
    # uniaxial-equivalent lock-up stretch of the elastic material.
    bracket: tuple[float, Optional[float]] = (1.0, None)
    n_scan: int = 48
    max_step: float = np.inf
    n_nodes: int = 201
    # "stretch": lambda1, lambda2, beta continuous across material boundaries.
    # "traction": lambda2, beta and the meridional traction W1 continuous.
    interface: str = "stretch"
    lambda2_contact: float = 1.0
    guard: float = LOCKUP_GUARD

    def __post_init__(self):
        if self.interface not in ("stretch", "traction"):
            raise ValidationError(f"unknown interface condition {self.interface!r}")
        if self.n_scan < 2 or self.n_nodes < 2:
            raise ValidationError("n_scan and n_nodes must be at least 2")


@dataclass(frozen=True)
class MembraneSolution:
    r: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    beta: np.ndarray
    R: np.ndarray
    Z: np.ndarray
    pressure: float
    force: float
    height: float
    residual: float
    x: float
    multiple_roots: bool = False
    n_roots: int = 1

    def state(self, i: int) -> MembraneState:
        return MembraneState(float(self.lambda1[i]), float(self.lambda2[i]), float(self.beta[i]))


def free_inflation_pressure(lam: float, t0: float, r: float, m: GentMaterial, guard: float = LOCKUP_GUARD) -> float:
    """Gauge pressure of an equibiaxially stretched spherical cap of radius ``r``."""
    if lam < 1:
        raise ValidationError(f"free inflation needs stretch >= 1, got {lam}")
    if not (t0 > 0 and r > 0):
        raise ValidationError("thickness and radius must be positive")
    i1 = 2.0 * lam * lam + lam**-4
    if i1 - 3.0 >= guard * m.jm:
        raise DomainError(f"Gent lock-up at equibiaxial stretch {lam}")
    return 2.0 * t0 * m.mu * m.jm / (r * (m.jm - i1 + 3.0)) * (1.0 - lam**-6)


def spheroid_area(equatorial: float, polar: float) -> float:
    """Area of the upper half of an oblate spheroid (polar <= equatorial)."""
    a, c = equatorial, polar
    if a <= c * (1 + 1e-12):
        return 2.0 * math.pi * a * a
    e = math.sqrt(1.0 - (c / a) ** 2)
    return math.pi * a * a + math.pi * c * c / e * math.atanh(e)


def spheroid_radius(lam: float, r_aperture: float) -> float:
    """Effective curvature radius of the bubble at areal stretch ``lam**2``.

    Up to the hemisphere (``lam <= sqrt 2``) the aperture radius is used.  Beyond
    it the bubble is taken to be half of an oblate spheroid whose polar
    semi-axis stays at the aperture radius; its equatorial radius is chosen so
    the surface area equals ``lam**2`` times the flat aperture area.
    """
    if lam < 1:
        raise ValidationError(f"stretch must be >= 1, got {lam}")
    if lam <= math.sqrt(2.0):
        return r_aperture
    target = lam * lam * math.pi * r_aperture**2
    lo, hi = r_aperture, 2.0 * r_aperture
    while spheroid_area(hi, r_aperture) < target:
        hi *= 2.0
        if hi > 1e6 * r_aperture:
            raise NumericError(f"no spheroid bracket found for stretch {lam} in [{lo}, {hi}]")
    f = lambda a: spheroid_area(a, r_aperture) - target
    try:
        return brentq(f, lo, hi, xtol=1e-15 * r_aperture, rtol=1e-14)
    except ValueError as exc:
        raise NumericError(f"spheroid root solve failed on bracket [{lo}, {hi}]: {exc}") from exc


def equilibrium_rhs(state: MembraneState, r: float, p_tilde: float, m: GentMaterial, guard: float = LOCKUP_GUARD) -> np.ndarray:
    """Derivatives (dlambda1/dr, dlambda2/dr, dbeta/dr) of the meridian equations."""
    l1, l2, b = state.lambda1, state.lambda2, state.beta
    if r <= 0:
        raise ValidationError(f"radius must be positive, got {r}")
    w = membrane_partials(l1, l2, m, guard)
    if w.w11 == 0.0 or w.w1 == 0.0:
        raise SingularityError(f"vanishing W11 or W1 at r={r}", r=r, state=state)
    cb, sb = math.cos(b), math.sin(b)
    d1 = (w.w2 - l1 * w.w12) / (r * w.w11) * cb + (l2 * w.w12 - w.w1) / (r * w.w11)
    d2 = (l1 * cb - l2) / r
    db = (p_tilde * r * l1 * l2 - w.w2 * sb) / (r * w.w1)
    return np.array([d1, d2, db])


def boundary_beta(
    p: float,
    F: float,
    r0: float,
    lambda1: float,
    lambda2: float,
    t: float,
    m: GentMaterial,
    guard: float = LOCKUP_GUARD,
) -> float:
    """Meridian angle at the disc edge implied by the load balance there."""
    w1 = membrane_partials(lambda1, lambda2, m, guard).w1
    if w1 == 0.0:
        raise InfeasibleError(f"no meridional tension at lambda1={lambda1}; load cannot be carried")
    arg = (math.pi * p * r0 * r0 * lambda2 * lambda2 - F) / (2.0 * math.pi * t * r0 * w1)
    if abs(arg) > 1.0:
        raise InfeasibleError(
            f"pressure {p} Pa and force {F} N unsupportable at lambda1={lambda1}: sin(beta) = {arg:.6g}"
        )
    return math.asin(arg)


class _Breakdown(Exception):
    pass


def _make_rhs(m: GentMaterial, p_tilde: float, guard: float):
    mu_jm = 0.5 * m.mu * m.jm
    lim = guard * m.jm

    def rhs(r, y):
        l1, l2, b = y[0], y[1], y[2]
        if l1 <= 0 or l2 <= 0:
            raise _Breakdown("non-positive stretch")
        inv = 1.0 / (l1 * l2)
        inv2 = inv * inv
        i1 = l1 * l1 + l2 * l2 + inv2
        if i1 - 3.0 >= lim:
            raise _Breakdown("lock-up")
        d = m.jm - i1 + 3.0
        f = mu_jm / d
        i_1 = 2.0 * l1 - 2.0 * inv2 / l1
        i_2 = 2.0 * l2 - 2.0 * inv2 / l2
        w1 = f * i_1
        if w1 <= 1e-12 * m.mu:
            raise _Breakdown("slack meridian")
        w2 = f * i_2
        w11 = f * (2.0 + 6.0 * inv2 / (l1 * l1) + i_1 * i_1 / d)
        w12 = f * (4.0 * inv2 / (l1 * l2) + i_1 * i_2 / d)
        cb, sb = math.cos(b), math.sin(b)
        return [
            ((w2 - l1 * w12) * cb + l2 * w12 - w1) / (r * w11),
            (l1 * cb - l2) / r,
            (p_tilde * r * l1 * l2 - w2 * sb) / (r * w1),
            l1 * cb,
            l1 * sb,
        ]

    return rhs


def _traction_match(l1: float, l2: float, old: GentMaterial, new: GentMaterial, guard: float) -> float:
    """Meridional stretch in ``new`` carrying the same W1 as ``l1`` does in ``old``."""
    target = membrane_partials(l1, l2, old, guard).w1
    lo = 1.0 / math.sqrt(l2) * (1 + 1e-12)  # W1 = 0 where l1^2 l2 = 1
    hi = lo
    i1_max = 3.0 + guard * new.jm
    while True:
        nxt = hi * 1.5
        if nxt * nxt + l2 * l2 >= i1_max:
            hi = math.sqrt(max(i1_max - l2 * l2, lo * lo)) * (1 - 1e-9)
            break
        hi = nxt
        if membrane_partials(hi, l2, new, guard).w1 > target:
            break
    g = lambda s: membrane_partials(s, l2, new, guard).w1 - target
    try:
        return brentq(g, lo, hi, xtol=1e-15, rtol=1e-14)
    except (ValueError, DomainError) as exc:
        raise _Breakdown(f"traction continuity unsatisfiable: {exc}") from exc


def _integrate(design: MembraneDesign, p: float, F: float, x: float, cfg: SolverConfig, dense: bool = False):
    """Integrate from the disc edge with lambda1(r0) = x.

    Returns the list of per-segment solve_ivp results, or None when the start
    is infeasible or the integration breaks down before reaching the rim.
    """
    t0 = design.thickness
    segs = design.segments()
    l2_0 = cfg.lambda2_contact
    try:
        beta0 = boundary_beta(p, F, design.contact_radius, x, l2_0, t0, segs[0][2], cfg.guard)
    except (InfeasibleError, DomainError):
        return None
    y = [x, l2_0, beta0, design.contact_radius * l2_0, 0.0]
    out = []
    prev_mat = None
    for a, b, mat in segs:
        if prev_mat is not None and cfg.interface == "traction":
            try:
                y[0] = _traction_match(y[0], y[1], prev_mat, mat, cfg.guard)
            except _Breakdown:
                return None
        try:
            membrane_partials(y[0], y[1], mat, cfg.guard)
        except DomainError:
            return None
        try:
            sol = solve_ivp(
                _make_rhs(mat, p / t0, cfg.guard),
                (a, b),
                y,
                method="RK45",
                rtol=cfg.rtol,
                atol=cfg.atol,
                max_step=cfg.max_step,
                dense_output=dense,
            )
        except _Breakdown:
            return None
        if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
            return None
        out.append(sol)
        y = list(sol.y[:, -1])
        prev_mat = mat
    return out


def _residual(design, p, F, x, cfg) -> float:
    sols = _integrate(design, p, F, x, cfg)
    if sols is None:
        return math.nan
    return float(sols[-1].y[1, -1] - 1.0)


def shoot_bracket(design: MembraneDesign, cfg: SolverConfig) -> tuple[float, float]:
    lo, hi = cfg.bracket
    if hi is None:
        hi = 0.95 * design.elastic.lockup_stretch("uniaxial", cfg.guard)
    if not hi > lo:
        raise ValidationError(f"empty shooting bracket [{lo}, {hi}]")
    return lo, hi


def _feasible_start(design: MembraneDesign, p: float, F: float, cfg: SolverConfig, hi: float) -> float:
    """Smallest lambda1(r0) for which the disc-edge load balance admits an angle.

    With lambda2 fixed, W1 grows monotonically with lambda1, so the boundary
    angle exists once W1 exceeds the net load per unit edge length.
    """
    m = design.segments()[0][2]
    l2 = cfg.lambda2_contact
    net = abs(math.pi * p * design.contact_radius**2 * l2 * l2 - F) / (2.0 * math.pi * design.thickness * design.contact_radius)
    lo = 1.0 / math.sqrt(l2)
    w1 = lambda s: membrane_partials(s, l2, m, cfg.guard).w1
    try:
        if w1(hi) < net:
            return hi
        if w1(lo) >= net:
            return lo
        return brentq(lambda s: w1(s) - net, lo, hi, xtol=1e-14) * (1 + 1e-12)
    except (DomainError, ValueError):
        return lo


def _scan_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    # Quadratic spacing clusters samples near lambda1 = 1 where small loads live.
    s = np.linspace(0.0, 1.0, n)
    return lo + (hi - lo) * s * s


def shoot(design: MembraneDesign, p: float, F: float, cfg: SolverConfig = SolverConfig()) -> MembraneSolution:
    """Solve the loaded-membrane boundary value problem at pressure ``p`` [Pa] and load ``F`` [N]."""
    if p < 0 or F < 0 or not (math.isfinite(p) and math.isfinite(F)):
        raise ValidationError(f"pressure and force must be finite and nonnegative, got {p}, {F}")
    if p == 0.0 and F == 0.0 and cfg.lambda2_contact == 1.0:
        return _identity_solution(design, cfg)

    lo, hi = shoot_bracket(design, cfg)
    lo = max(lo, _feasible_start(design, p, F, cfg, hi))
    xs = _scan_nodes(lo, hi, cfg.n_scan)
    gs = np.array([_residual(design, p, F, x, cfg) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        ga, gb = gs[i], gs[i + 1]
        if not (math.isfinite(ga) and math.isfinite(gb)):
            continue
        if ga == 0.0:
            roots.append(xs[i])
        elif ga * gb < 0:
            try:
                roots.append(
                    brentq(lambda s: _strict_residual(design, p, F, s, cfg), xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15)
                )
            except (ValueError, _Breakdown):
                continue
    if not roots and math.isfinite(gs[-1]) and gs[-1] == 0.0:
        roots.append(xs[-1])
    if not roots:
        finite = np.isfinite(gs)
        raise NoConvergenceError(
            f"no bracketing lambda1(r0) in [{lo:.6g}, {hi:.6g}] for p={p:.6g} Pa, F={F:.6g} N "
            f"({int(finite.sum())}/{len(gs)} scan points integrable)"
        )
    x = min(roots)
    sol = _assemble(design, p, F, x, cfg)
    sol = replace(sol, multiple_roots=len(roots) > 1, n_roots=len(roots))
    if not sol.residual <= cfg.tolerance:
        raise NoConvergenceError(f"shooting residual {sol.residual:.3g} exceeds tolerance {cfg.tolerance:.3g}")
    return sol


def _strict_residual(design, p, F, x, cfg):
    g = _residual(design, p, F, x, cfg)
    if not math.isfinite(g):
        raise _Breakdown("integration failed inside a bracket")
    return g


def _identity_solution(design: MembraneDesign, cfg: SolverConfig) -> MembraneSolution:
    r = _output_grid(design, cfg)
    one = np.ones_like(r)
    zero = np.zeros_like(r)
    return MembraneSolution(r, one, one.copy(), zero, r.copy(), zero.copy(), 0.0, 0.0, 0.0, 0.0, 1.0)


def _output_grid(design: MembraneDesign, cfg: SolverConfig) -> np.ndarray:
    segs = design.segments()
    pts = np.linspace(design.contact_radius, design.outer_radius, cfg.n_nodes)
    cuts = np.array([a for a, _, _ in segs[1:]])
    return np.unique(np.concatenate([pts, cuts]))


def _assemble(design, p, F, x, cfg) -> MembraneSolution:
    sols = _integrate(design, p, F, x, cfg, dense=True)
    if sols is None:
        raise NumericError(f"integration failed at the converged shooting value {x}")
    r = _output_grid(design, cfg)
    segs = design.segments()
    Y = np.empty((5, r.size))
    for k, ((a, b, _), sol) in enumerate(zip(segs, sols)):
        sel = (r >= a) & ((r < b) if k + 1 < len(segs) else (r <= b))
        Y[:, sel] = sol.sol(r[sel])
    Y[:, -1] = sols[-1].y[:, -1]
    Y[:, 0] = sols[0].y[:, 0]
    z_down = Y[4]
    z_up = z_down[-1] - z_down  # rim anchored at zero, upward positive
    residual = abs(float(sols[-1].y[1, -1]) - 1.0)
    return MembraneSolution(
        r=r,
        lambda1=Y[0],
        lambda2=Y[1],
        beta=Y[2],
        R=Y[3],
        Z=z_up,
        pressure=float(p),
        force=float(F),
        height=float(z_up[0]),
        residual=residual,
        x=float(x),
    )


@dataclass(frozen=True)
class MapRow:
    pressure: float
    force: float
    height: float
    residual: float
    converged: bool
    multiple_roots: bool = False
    message: str = ""


def force_height_map(
    design: MembraneDesign,
    pressures: Sequence[float],
    forces: Sequence[float],
    cfg: SolverConfig = SolverConfig(),
) -> list[MapRow]:
    """Solve every (p, F) pair; failures are kept as flagged rows."""
    pressures = [float(v) for v in pressures]
    forces = [float(v) for v in forces]
    if not pressures or not forces:
        raise ValidationError("pressure and force grids must be nonempty")
    if min(pressures) < 0 or min(forces) < 0:
        raise ValidationError("grids must be nonnegative")
    rows = []
    for p in pressures:
        for F in forces:
            try:
                s = shoot(design, p, F, cfg)
                rows.append(MapRow(p, F, s.height, s.residual, True, s.multiple_roots))
            except (NumericError, InfeasibleError) as exc:
                rows.append(MapRow(p, F, math.nan, math.nan, False, False, str(exc)))
    return rows


@dataclass
class ForceInterpolator:
    """Force as a function of (pressure, height) read off a solved map.

    For every pressure on the map, converged rows give a height-versus-force
    curve; force is interpolated in height along each pressure column and then
    linearly in pressure.  Queries outside a column's height range are clamped
    to the column end points.
    """

    columns: list[tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: Sequence[MapRow]) -> "ForceInterpolator":
        by_p: dict[float, list[tuple[float, float]]] = {}
        for row in rows:
            if row.converged:
                by_p.setdefault(row.pressure, []).append((row.height, row.force))
        cols = []
        for p in sorted(by_p):
            pts = sorted(by_p[p])
            h = np.array([q[0] for q in pts])
            f = np.array([q[1] for q in pts])
            keep = np.concatenate([[True], np.diff(h) > 0])
            cols.append((p, h[keep], f[keep]))
        if not cols:
            raise ValidationError("map contains no converged rows")
        return cls(cols)

    def _column_force(self, k: int, h: float) -> float:
        _, hs, fs = self.columns[k]
        if hs.size == 1:
            return float(fs[0])
        return float(np.interp(h, hs, fs))

    def force(self, p: float, h: float) -> float:
        ps = np.array([c[0] for c in self.columns])
        if p <= ps[0]:
            return self._column_force(0, h)
        if p >= ps[-1]:
            return self._column_force(len(ps) - 1, h)
        k = int(np.searchsorted(ps, p)) - 1
        w = (p - ps[k]) / (ps[k + 1] - ps[k])
        return (1 - w) * self._column_force(k, h) + w * self._column_force(k + 1, h)

