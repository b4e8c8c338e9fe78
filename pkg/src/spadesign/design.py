"""Inverse design against lift targets: waypoint error, height posterior, multi-start search, co-design.

Force functions are JAX-traceable ``f(x6, mask, h, p) -> F`` on one flat
design (see ``surrogate.model_force_fn``); a trained ``SurrogateModel`` is
accepted wherever a force function is.  Units: mm, kPa, N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import jax
import jax.numpy as jnp
import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .clutch import G
from .designvec import DesignBounds, DesignVector, is_feasible, project
from .errors import InfeasibleError, ValidationError
from .optim import projected_ascent
from .surrogate import SurrogateModel, model_force_fn, ring_mask

ForceFn = Callable


def as_force_fn(model: Union[SurrogateModel, ForceFn]) -> ForceFn:
    if isinstance(model, SurrogateModel):
        return model_force_fn(model)
    if callable(model):
        return model
    raise ValidationError("expected a SurrogateModel or a force function f(x6, mask, h, p)")


# ---------------------------------------------------------------------------
# Trajectory error


@dataclass(frozen=True)
class LiftTrajectory:
    pressure: tuple[float, ...]
    height: tuple[float, ...]
    force: tuple[float, ...]

    def __post_init__(self):
        n = len(self.pressure)
        if n == 0 or len(self.height) != n or len(self.force) != n:
            raise ValidationError("trajectory needs matching, nonempty pressure/height/force samples")
        if min(self.pressure) < 0:
            raise ValidationError("trajectory pressures must be nonnegative")


@dataclass(frozen=True)
class Waypoint:
    pressure: float
    height: float
    mass: float = 0.0

    def __post_init__(self):
        if self.pressure < 0 or self.height < 0 or self.mass < 0:
            raise ValidationError(f"waypoint values must be nonnegative: {self}")


def trajectory_rmse(traj: LiftTrajectory, targets: Sequence[Waypoint], p_max: float = 10.0, h_max: float = 50.0) -> float:
    """Root mean of per-target squared normalised distance to the nearest trajectory sample."""
    if not targets:
        raise ValidationError("need at least one waypoint")
    p = np.asarray(traj.pressure, float)
    h = np.asarray(traj.height, float)
    errs = [np.min(((p - t.pressure) / p_max) ** 2 + ((h - t.height) / h_max) ** 2) for t in targets]
    return float(np.sqrt(np.mean(errs)))


def smooth_min(values, k_s: float) -> float:
    """LogSumExp soft minimum, never above the true minimum."""
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValidationError("smooth_min of an empty set")
    if not k_s > 0:
        raise ValidationError("sharpness must be positive")
    return float(-logsumexp(-k_s * v) / k_s)


def _smooth_min_jax(v, k_s):
    return -jax.scipy.special.logsumexp(-k_s * v) / k_s


# ---------------------------------------------------------------------------
# Height-maximisation posterior


@dataclass(frozen=True)
class PosteriorWeights:
    k_force: float = 1.0
    k_pressure: float = 1.0
    k_height: float = 1.0
    k_s: float = 0.5

    def __post_init__(self):
        if min(self.k_force, self.k_pressure, self.k_height) < 0:
            raise ValidationError("posterior weights must be nonnegative")
        if not self.k_s > 0:
            raise ValidationError("smooth-min sharpness must be positive")


@dataclass(frozen=True)
class PosteriorConfig:
    h_max: float = 70.0
    n_grid: int = 141
    n_bisect: int = 60
    penalty: float = 1e3
    p_cap_factor: float = 4.0


@dataclass(frozen=True)
class LiftTarget:
    pressure: float
    force: float

    def __post_init__(self):
        if self.pressure < 0 or self.force <= 0:
            raise ValidationError(f"targets need p >= 0 and F > 0: {self}")


@dataclass(frozen=True)
class PosteriorResult:
    value: float
    heights: tuple[float, ...]
    feasible: tuple[bool, ...]
    force_error: float
    pressure_error: float


def _bisect(fun, lo, hi, glo, n):
    def body(_, c):
        lo, hi = c
        mid = 0.5 * (lo + hi)
        same = jnp.sign(fun(mid)) == jnp.sign(glo)
        return jnp.where(same, mid, lo), jnp.where(same, hi, mid)

    lo, hi = jax.lax.fori_loop(0, n, body, (lo, hi))
    return 0.5 * (lo + hi)


def posterior_terms(force_fn: ForceFn, targets: Sequence[LiftTarget], w: PosteriorWeights, cfg: PosteriorConfig):
    """Build ``terms(x6, mask) -> (Pi, heights, feasible, F_err, p_err)``, differentiable in x6.

    Heights are the largest root of ``h -> F(p*, h) - F*`` on [0, h_max]
    (grid scan then bisection); their design sensitivity follows from the
    implicit function theorem.  An unreachable target uses the height of
    closest approach, adds ``cfg.penalty`` and reports the extra pressure
    the model would need there as the pressure error.
    """
    if not targets:
        raise ValidationError("need at least one (pressure, force) target")
    p_t = jnp.asarray([t.pressure for t in targets], float)
    f_t = jnp.asarray([t.force for t in targets], float)
    K = len(targets)
    H = jnp.linspace(0.0, cfg.h_max, cfg.n_grid)
    p_cap = cfg.p_cap_factor * float(max(1.0, max(t.pressure for t in targets)))

    def terms(x6, mask):
        xs = jax.lax.stop_gradient(x6)
        F = lambda h, p: force_fn(xs, mask, h, p)
        g = F(jnp.tile(H, K), jnp.repeat(p_t, cfg.n_grid)).reshape(K, cfg.n_grid) - f_t[:, None]
        crossing = (g[:, :-1] * g[:, 1:] <= 0) & ~((g[:, :-1] == 0) & (g[:, 1:] == 0))
        idx = jnp.max(jnp.where(crossing, jnp.arange(cfg.n_grid - 1), -1), axis=1)
        feasible = idx >= 0
        i = jnp.maximum(idx, 0)
        glo = g[jnp.arange(K), i]
        root = _bisect(lambda h: F(h, p_t) - f_t, H[i], H[i + 1], glo, cfg.n_bisect)
        closest = H[jnp.argmin(jnp.abs(g), axis=1)]
        h0 = jnp.where(feasible, root, closest)

        # implicit-function correction: value h0, gradient -dF/dx / dF/dh
        r = force_fn(x6, mask, h0, p_t) - f_t
        f_h = jax.vmap(jax.grad(lambda hh, pp: force_fn(xs, mask, hh[None], pp[None])[0]))(h0, p_t)
        ok = feasible & (jnp.abs(f_h) > 1e-12)
        corr = jnp.where(ok, (r - jax.lax.stop_gradient(r)) / jnp.where(ok, f_h, 1.0), 0.0)
        h = h0 - corr

        resid = force_fn(x6, mask, h, p_t) - f_t
        f_err = jnp.sum(resid * resid)

        # pressure shortfall at the closest-approach height of unreachable targets
        gp_cap = F(h0, jnp.full((K,), p_cap)) - f_t
        p_req = _bisect(lambda pp: F(h0, pp) - f_t, p_t, jnp.full((K,), p_cap), F(h0, p_t) - f_t, cfg.n_bisect)
        p_req = jnp.where(gp_cap >= 0, p_req, p_cap)
        p_err = jnp.sum(jnp.where(feasible, 0.0, (p_req - p_t) ** 2))

        n_bad = jnp.sum(~feasible)
        pi = -w.k_force * f_err - w.k_pressure * p_err + w.k_height * _smooth_min_jax(h, w.k_s) - cfg.penalty * n_bad
        return pi, h, feasible, f_err, p_err

    return terms


def _design_args(design: DesignVector):
    return jnp.asarray(np.nan_to_num(design.as_array())), jnp.asarray(ring_mask(design.n_rings))


def lift_posterior(
    model: Union[SurrogateModel, ForceFn],
    design: DesignVector,
    targets: Sequence[LiftTarget],
    w: PosteriorWeights = PosteriorWeights(),
    cfg: PosteriorConfig = PosteriorConfig(),
) -> PosteriorResult:
    terms = posterior_terms(as_force_fn(model), targets, w, cfg)
    pi, h, feas, fe, pe = terms(*_design_args(design))
    return PosteriorResult(float(pi), tuple(np.asarray(h).tolist()), tuple(bool(v) for v in np.asarray(feas)),
                           float(fe), float(pe))


def posterior_gradient(
    model: Union[SurrogateModel, ForceFn],
    design: DesignVector,
    targets: Sequence[LiftTarget],
    w: PosteriorWeights = PosteriorWeights(),
    cfg: PosteriorConfig = PosteriorConfig(),
) -> np.ndarray:
    """dPi/d[contact, thickness, r1, w1, r2, w2]; absent ring slots get zero."""
    terms = posterior_terms(as_force_fn(model), targets, w, cfg)
    x, m = _design_args(design)
    g = jax.grad(lambda z: terms(z, m)[0])(x)
    return np.asarray(g) * np.array([1, 1, m[0], m[0], m[1], m[1]])


@dataclass(frozen=True)
class DesignOptimum:
    design: DesignVector
    value: float


@dataclass(frozen=True)
class OptimizeResult:
    best: DesignVector
    value: float
    top: tuple[DesignOptimum, ...]
    starts: int


def _distinct(cands, lo, hi, n_keep, rtol=1e-3):
    width = np.where(hi > lo, hi - lo, 1.0)
    kept = []
    for val, x, k in sorted(cands, key=lambda c: -c[0]):
        z = np.nan_to_num(x) / np.tile(width, len(x) // 6)
        if any(k == k2 and np.max(np.abs(z - z2)) < rtol for _, z2, k2, _ in kept):
            continue
        kept.append((val, z, k, x))
        if len(kept) == n_keep:
            break
    return kept


def optimize_design(
    model: Union[SurrogateModel, ForceFn],
    targets: Sequence[LiftTarget],
    w: PosteriorWeights = PosteriorWeights(),
    bounds: DesignBounds = DesignBounds(),
    starts: int = 64,
    seed: int = 0,
    cfg: PosteriorConfig = PosteriorConfig(),
    iters: int = 200,
    n_top: int = 10,
) -> OptimizeResult:
    """Multi-start projected gradient ascent of the posterior."""
    terms = posterior_terms(as_force_fn(model), targets, w, cfg)
    vg = jax.jit(jax.value_and_grad(lambda z, m: terms(z, m)[0]))
    lo, hi = bounds.lower_upper()
    scale = hi - lo
    rng = np.random.default_rng(seed)
    cands = []
    for _ in range(starts):
        k = int(rng.choice(bounds.ring_counts))
        m = jnp.asarray(ring_mask(k))
        proj = lambda z, k=k: (None if (y := project(z, k, bounds)) is None else np.nan_to_num(y))
        z0 = proj(lo + scale * rng.random(6))
        if z0 is None:
            continue

        def fg(z, m=m):
            v, g = vg(jnp.asarray(z), m)
            return float(v), np.asarray(g, float)

        z, val = projected_ascent(fg, z0, proj, scale, iters)
        cands.append((val, project(z, k, bounds), k))
    if not cands:
        raise InfeasibleError("every optimisation start was infeasible within the bounds")
    kept = _distinct(cands, lo, hi, n_top)
    top = tuple(DesignOptimum(DesignVector.from_array(x, k), float(v)) for v, _, k, x in kept)
    for opt in top:
        assert is_feasible(opt.design, bounds)
    return OptimizeResult(top[0].design, top[0].value, top, starts)


# ---------------------------------------------------------------------------
# Shared-pressure co-design of two membranes under a pivoted rigid body


@dataclass(frozen=True)
class LeverBody:
    """Rigid body on a revolute joint resting on two membranes.

    Lever arms are measured from the joint [m]; contact heights rise as
    ``h_i = rest_i + 1000 * arm_i * theta`` [mm] for small rotations.  A
    contact arm of None removes that membrane (its force is identically 0).
    """

    mass: float
    com_arm: float
    arm_a: float
    arm_b: Optional[float]
    rest_a: float = 0.0
    rest_b: float = 0.0
    theta_max: float = 0.5
    g: float = G

    def __post_init__(self):
        if not (self.mass > 0 and self.com_arm > 0 and self.arm_a > 0):
            raise ValidationError("mass, centre-of-mass arm and contact arm A must be positive")
        if self.arm_b is not None and not self.arm_b > 0:
            raise ValidationError("contact arm B must be positive or None")
        if not self.theta_max > 0:
            raise ValidationError("theta_max must be positive")

    @property
    def moment(self) -> float:
        return self.mass * self.g * self.com_arm

    def heights(self, theta):
        ha = self.rest_a + 1e3 * self.arm_a * theta
        hb = self.rest_b + 1e3 * (self.arm_b or 0.0) * theta
        return ha, hb


@dataclass(frozen=True)
class SweepResult:
    pressures: np.ndarray
    theta: np.ndarray
    force_a: np.ndarray
    force_b: np.ndarray
    lifted: np.ndarray
    has_b: bool = True

    @property
    def peak_force(self) -> float:
        return float(max(self.force_a.max(), self.force_b.max()))

    @property
    def contact_kept(self) -> bool:
        """Once lifted, both present membranes keep pushing on the body."""
        fa_ok = np.all(self.force_a[self.lifted] > 0)
        fb_ok = not self.has_b or np.all(self.force_b[self.lifted] > 0)
        return bool(self.lifted.any() and fa_ok and fb_ok)


@dataclass(frozen=True)
class CoDesignConfig:
    steps: int = 50
    p_max: Optional[float] = None
    n_theta: int = 201
    n_bisect: int = 50
    starts: int = 16
    polish_iters: int = 400


def _sweep_fn(force_fn, body: LeverBody, pressures: np.ndarray, cfg: CoDesignConfig):
    th = jnp.linspace(0.0, body.theta_max, cfg.n_theta)
    P = jnp.asarray(pressures)
    n_p = P.size
    has_b = body.arm_b is not None

    def forces(xa, ma, xb, mb, theta, p):
        ha, hb = body.heights(theta)
        fa = force_fn(xa, ma, ha, p)
        fb = force_fn(xb, mb, hb, p) if has_b else jnp.zeros_like(fa)
        return fa, fb

    def moment(xa, ma, xb, mb, theta, p):
        fa, fb = forces(xa, ma, xb, mb, theta, p)
        return fa * body.arm_a + fb * (body.arm_b or 0.0) - body.moment

    @jax.jit
    def run(xa, ma, xb, mb):
        tt = jnp.tile(th, n_p)
        pp = jnp.repeat(P, cfg.n_theta)
        m = moment(xa, ma, xb, mb, tt, pp).reshape(n_p, cfg.n_theta)
        cross = (m[:, :-1] > 0) & (m[:, 1:] <= 0)
        # smallest equilibrium above the rest stop; rest if the moment never exceeds the load
        first = jnp.argmax(cross, axis=1)
        has_cross = jnp.any(cross, axis=1)
        i = jnp.where(has_cross, first, 0)
        root = _bisect(lambda t: moment(xa, ma, xb, mb, t, P), th[i], th[i + 1], m[jnp.arange(n_p), i], cfg.n_bisect)
        theta = jnp.where(m[:, 0] <= 0, 0.0, jnp.where(has_cross, root, body.theta_max))
        fa, fb = forces(xa, ma, xb, mb, theta, P)
        return theta, fa, fb, m[:, 0] > 0

    return run


def pressure_sweep(
    model: Union[SurrogateModel, ForceFn],
    design_a: DesignVector,
    design_b: Optional[DesignVector],
    body: LeverBody,
    cfg: CoDesignConfig = CoDesignConfig(),
) -> SweepResult:
    p = _sweep_pressures(model, cfg)
    run = _sweep_fn(as_force_fn(model), body, p, cfg)
    xa, ma = _design_args(design_a)
    xb, mb = _design_args(design_b or design_a)
    theta, fa, fb, lifted = run(xa, ma, xb, mb)
    return SweepResult(p, np.asarray(theta), np.asarray(fa), np.asarray(fb), np.asarray(lifted),
                       body.arm_b is not None)


def _sweep_pressures(model, cfg: CoDesignConfig) -> np.ndarray:
    if cfg.p_max is not None:
        p_max = cfg.p_max
    elif isinstance(model, SurrogateModel):
        p_max = model.norm.p_scale
    else:
        raise ValidationError("p_max must be given when the model is a bare force function")
    return np.linspace(p_max / cfg.steps, p_max, cfg.steps)


@dataclass(frozen=True)
class CoDesignResult:
    design_a: DesignVector
    design_b: Optional[DesignVector]
    peak_force: float
    sweep: SweepResult


def co_design(
    model: Union[SurrogateModel, ForceFn],
    body: LeverBody,
    bounds_a: DesignBounds = DesignBounds(),
    bounds_b: Optional[DesignBounds] = None,
    seed: int = 0,
    cfg: CoDesignConfig = CoDesignConfig(),
) -> CoDesignResult:
    """Minimise the sweep-wide peak membrane force subject to lifting the body and keeping contact.

    Random feasible starts are polished by Nelder-Mead in box-normalised
    coordinates, with infeasible points scored as +inf.
    """
    bounds_b = bounds_b or bounds_a
    force_fn = as_force_fn(model)
    p = _sweep_pressures(model, cfg)
    run = _sweep_fn(force_fn, body, p, cfg)
    has_b = body.arm_b is not None
    rng = np.random.default_rng(seed)
    la, ha = bounds_a.lower_upper()
    lb, hb = bounds_b.lower_upper()
    wa, wb = ha - la, hb - lb

    def decode(z, ka, kb):
        xa = project(la + wa * z[:6], ka, bounds_a)
        xb = project(lb + wb * z[6:], kb, bounds_b) if has_b else xa
        return xa, xb

    def score(z, ka, kb):
        xa, xb = decode(z, ka, kb)
        if xa is None or xb is None:
            return math.inf
        theta, fa, fb, lifted = run(jnp.asarray(np.nan_to_num(xa)), jnp.asarray(ring_mask(ka)),
                                    jnp.asarray(np.nan_to_num(xb)), jnp.asarray(ring_mask(kb)))
        sr = SweepResult(p, np.asarray(theta), np.asarray(fa), np.asarray(fb), np.asarray(lifted),
                       body.arm_b is not None)
        if not sr.contact_kept:
            return math.inf
        return sr.peak_force

    best = None
    for _ in range(cfg.starts):
        ka = int(rng.choice(bounds_a.ring_counts))
        kb = int(rng.choice(bounds_b.ring_counts)) if has_b else ka
        z0 = rng.random(12)
        f0 = score(z0, ka, kb)
        if not math.isfinite(f0):
            continue
        res = minimize(lambda z: score(np.clip(z, 0.0, 1.0), ka, kb), z0, method="Nelder-Mead",
                       options={"maxiter": cfg.polish_iters, "xatol": 1e-6, "fatol": 1e-9})
        z = np.clip(res.x, 0.0, 1.0)
        fz = score(z, ka, kb)
        if not math.isfinite(fz):
            z, fz = z0, f0
        if best is None or fz < best[0]:
            best = (fz, z, ka, kb)
    if best is None:
        raise InfeasibleError("no design pair lifts the body while keeping contact through the sweep")
    fz, z, ka, kb = best
    xa, xb = decode(z, ka, kb)
    da = DesignVector.from_array(xa, ka)
    db = DesignVector.from_array(xb, kb) if has_b else None
    sweep = pressure_sweep(model, da, db, body, cfg)
    return CoDesignResult(da, db, float(fz), sweep)
