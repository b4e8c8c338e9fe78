"""Randomised-prior ensembles, the parallel acquisition score and design-space uncertainty."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import jax
import jax.numpy as jnp
import numpy as np
from scipy.stats import qmc

from .designvec import DesignBounds, DesignVector, is_feasible, project
from .errors import InfeasibleError, StateError, ValidationError
from .optim import projected_ascent
from .surrogate import (
    Normalization,
    SampleSet,
    SurrogateConfig,
    SurrogateModel,
    fit_normalization,
    flat_inputs,
    force_from_arrays,
    init_params,
    load_model,
    new_model,
    ring_mask,
    save_model,
    train,
)


@dataclass(frozen=True)
class AcquisitionGrid:
    heights: tuple[float, ...]
    pressures: tuple[float, ...]

    def __post_init__(self):
        h, p = list(self.heights), list(self.pressures)
        if not h or not p:
            raise ValidationError("acquisition grid needs at least one height and one pressure")
        if h != sorted(h) or p != sorted(p):
            raise ValidationError("acquisition grid axes must be sorted")
        object.__setattr__(self, "heights", tuple(float(v) for v in h))
        object.__setattr__(self, "pressures", tuple(float(v) for v in p))

    @classmethod
    def default(cls) -> "AcquisitionGrid":
        return cls(tuple(np.linspace(0.0, 70.0, 8)), tuple(np.linspace(0.5, 7.0, 14)))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        hh, pp = np.meshgrid(self.heights, self.pressures, indexing="ij")
        return hh.ravel(), pp.ravel()


@dataclass
class SurrogateEnsemble:
    members: list[SurrogateModel]
    seed: int = 0

    def __post_init__(self):
        if not self.members:
            raise ValidationError("an ensemble needs at least one member")

    def __len__(self) -> int:
        return len(self.members)

    def check_trained(self) -> None:
        for i, m in enumerate(self.members):
            if not m.trained:
                raise StateError(f"ensemble member {i} has not been trained")

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        names = []
        for i, m in enumerate(self.members):
            name = f"member_{i:03d}.bin"
            save_model(m, d / name)
            names.append(name)
        (d / "ensemble.json").write_text(json.dumps({"seed": self.seed, "members": names}, indent=2))

    @classmethod
    def load(cls, directory) -> "SurrogateEnsemble":
        d = Path(directory)
        try:
            meta = json.loads((d / "ensemble.json").read_text())
        except FileNotFoundError as exc:
            raise ValidationError(f"{d} does not contain ensemble.json") from exc
        return cls([load_model(d / n) for n in meta["members"]], int(meta.get("seed", 0)))


def member_seeds(seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def train_ensemble(
    samples: SampleSet,
    cfg: SurrogateConfig = SurrogateConfig(),
    n: int = 8,
    prior_scale: float = 1.0,
    seed: int = 0,
) -> SurrogateEnsemble:
    """Train ``n`` members, each a frozen random prior plus an independently seeded trainable net."""
    if n < 1:
        raise ValidationError("ensemble size must be >= 1")
    norm = fit_normalization(samples)
    members = []
    for s in member_seeds(seed, n):
        k_prior, _ = jax.random.split(jax.random.PRNGKey(s))
        prior = init_params(k_prior, cfg)
        members.append(train(samples, replace(cfg, seed=s), prior=prior, prior_scale=prior_scale, norm=norm))
    return SurrogateEnsemble(members, seed)


def untrained_ensemble(cfg: SurrogateConfig, n: int, norm: Optional[Normalization] = None,
                       prior_scale: float = 1.0, seed: int = 0) -> SurrogateEnsemble:
    members = []
    for s in member_seeds(seed, n):
        k_prior, k_train = jax.random.split(jax.random.PRNGKey(s))
        m = new_model(replace(cfg, seed=s), norm, key=k_train)
        members.append(replace(m, prior=init_params(k_prior, cfg), prior_scale=prior_scale))
    return SurrogateEnsemble(members, seed)


# ---------------------------------------------------------------------------
# Ensemble evaluation on flat design vectors (differentiable)


def member_forces(ens: SurrogateEnsemble, x6, mask, h, p) -> jnp.ndarray:
    """Forces of every member, shape (N_members, len(h))."""
    x = flat_inputs(x6, jnp.asarray(mask, dtype=float), h, p)
    return jnp.stack([force_from_arrays(m.params, m.prior, m.prior_scale, m.norm, x) for m in ens.members])


def ensemble_predict(ens: SurrogateEnsemble, design: DesignVector, h, p) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population standard deviation of the member forces."""
    ens.check_trained()
    h = np.atleast_1d(np.asarray(h, float))
    p = np.atleast_1d(np.asarray(p, float))
    h, p = np.broadcast_arrays(h, p)
    f = np.asarray(member_forces(ens, jnp.asarray(np.nan_to_num(design.as_array())), ring_mask(design.n_rings),
                                 jnp.asarray(h.ravel()), jnp.asarray(p.ravel())))
    mean = f.mean(axis=0)
    std = np.sqrt(np.mean((f - mean) ** 2, axis=0))
    shape = h.shape
    return mean.reshape(shape), std.reshape(shape)


def _safe_sqrt(s):
    ok = s > 0
    return jnp.where(ok, jnp.sqrt(jnp.where(ok, s, 1.0)), 0.0)


def _acq_from_forces(forces: Sequence[jnp.ndarray]) -> jnp.ndarray:
    """forces: list over designs of (N_members, N_grid) arrays."""
    per_design = []
    for f in forces:
        dev = f - f.mean(axis=0, keepdims=True)
        per_design.append(_safe_sqrt(jnp.sum(dev * dev, axis=1)))
    return jnp.sum(jnp.max(jnp.stack(per_design), axis=0))


def acquisition_flat(ens: SurrogateEnsemble, xs, masks, grid: AcquisitionGrid) -> jnp.ndarray:
    """Acquisition for flat designs ``xs`` (q, 6) with ring masks (q, 2)."""
    hh, pp = grid.mesh()
    h, p = jnp.asarray(hh), jnp.asarray(pp)
    return _acq_from_forces([member_forces(ens, xs[k], masks[k], h, p) for k in range(xs.shape[0])])


def acquisition_batch(ens: SurrogateEnsemble, designs: Sequence[DesignVector], grid: AcquisitionGrid) -> float:
    """Sum over members of the largest (over designs) deviation norm from the ensemble mean."""
    ens.check_trained()
    if not designs:
        raise ValidationError("need at least one design")
    xs = jnp.asarray(np.stack([np.nan_to_num(d.as_array()) for d in designs]))
    masks = jnp.asarray(np.stack([ring_mask(d.n_rings) for d in designs]))
    return float(acquisition_flat(ens, xs, masks, grid))


def acquisition(ens: SurrogateEnsemble, m1: DesignVector, m2: DesignVector, grid: AcquisitionGrid) -> float:
    return acquisition_batch(ens, [m1, m2], grid)


@dataclass(frozen=True)
class Acquired:
    designs: tuple[DesignVector, ...]
    score: float
    starts: int


def select_next(
    ens: SurrogateEnsemble,
    q: int = 2,
    bounds: DesignBounds = DesignBounds(),
    starts: int = 64,
    seed: int = 0,
    grid: Optional[AcquisitionGrid] = None,
    iters: int = 60,
) -> Acquired:
    """Multi-start maximisation of the batch acquisition over ``q`` feasible designs."""
    ens.check_trained()
    if q < 1:
        raise ValidationError("batch size q must be >= 1")
    grid = grid or AcquisitionGrid.default()
    rng = np.random.default_rng(seed)
    lo, hi = bounds.lower_upper()
    width = np.where(hi > lo, hi - lo, 0.0)
    scale = np.tile(width, q)

    vg = jax.jit(jax.value_and_grad(lambda z, m: acquisition_flat(ens, z.reshape(q, 6), m, grid)))

    def objective(topo):
        m = jnp.asarray(np.stack([ring_mask(k) for k in topo]))

        def fg(z):
            v, g = vg(jnp.asarray(z), m)
            return float(v), np.asarray(g, dtype=float)

        return fg

    def proj_fn(topo):
        def proj(z):
            out = []
            for k in range(q):
                xk = project(z[6 * k : 6 * k + 6], topo[k], bounds)
                if xk is None:
                    return None
                out.append(np.nan_to_num(xk))
            return np.concatenate(out)

        return proj

    best = None
    for _ in range(starts):
        topo = tuple(int(rng.choice(bounds.ring_counts)) for _ in range(q))
        proj = proj_fn(topo)
        z0 = proj(np.tile(lo, q) + scale * rng.random(6 * q))
        if z0 is None:
            continue
        z, fz = projected_ascent(objective(topo), z0, proj, scale, iters)
        if best is None or fz > best[0]:
            best = (fz, z, topo)
    if best is None:
        raise InfeasibleError("no feasible design could be drawn within the bounds")
    fz, z, topo = best
    designs = tuple(DesignVector.from_array(z[6 * k : 6 * k + 6], topo[k]) for k in range(q))
    assert all(is_feasible(d, bounds) for d in designs)
    return Acquired(designs, float(acquisition_batch(ens, designs, grid)), starts)


# ---------------------------------------------------------------------------
# Uncertainty profiling


def uncertainty_at(ens: SurrogateEnsemble, designs: Sequence[DesignVector], grid: AcquisitionGrid) -> np.ndarray:
    """Grid-averaged predictive std for each design."""
    hh, pp = grid.mesh()
    out = []
    for d in designs:
        _, s = ensemble_predict(ens, d, hh, pp)
        out.append(float(np.mean(s)))
    return np.array(out)


def latin_designs(bounds: DesignBounds, n: int, seed: int = 0) -> list[DesignVector]:
    """Latin-hypercube designs; the seventh coordinate picks the ring count.

    Rows whose ring widths cannot fit are retried with the narrowest rings;
    rows that still cannot fit are dropped.
    """
    lo, hi = bounds.lower_upper()
    u = qmc.LatinHypercube(d=7, seed=seed).random(n)
    counts = bounds.ring_counts
    out = []
    for row in u:
        k = counts[min(int(row[6] * len(counts)), len(counts) - 1)]
        x0 = lo + (hi - lo) * row[:6]
        x = project(x0, k, bounds)
        if x is None:
            x0[[3, 5]] = bounds.ring_width[0]
            x = project(x0, k, bounds)
        if x is not None:
            out.append(DesignVector.from_array(x, k))
    return out


def uncertainty_profile(
    ens: SurrogateEnsemble,
    sample_count: int = 10000,
    bounds: DesignBounds = DesignBounds(),
    seed: int = 0,
    grid: Optional[AcquisitionGrid] = None,
) -> float:
    ens.check_trained()
    grid = grid or AcquisitionGrid.default()
    designs = latin_designs(bounds, sample_count, seed)
    if not designs:
        raise InfeasibleError("no feasible designs in the Latin-hypercube sample")
    return float(np.mean(uncertainty_at(ens, designs, grid)))
