"""Known monotone-polynomial force families used as round-trip oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .designvec import DesignBounds, DesignVector, sample_designs
from .surrogate import SampleSet


@dataclass(frozen=True)
class LinearFamily:
    """F = max(0, c0 + c1 p) with c1 >= 0, smooth in the design and height."""

    gain: float = 3.0
    height_scale: float = 120.0
    ring_gain: float = 0.3

    def coefficients(self, d: DesignVector, h):
        h = np.asarray(h, float)
        c1 = (d.contact_radius / 25.0) ** 2 * (1 + 0.2 * d.thickness) * (1 + self.ring_gain * d.n_rings)
        c1 = self.gain * c1 * np.clip(1.0 - h / self.height_scale, 0.0, None)
        c0 = -2.0 * d.thickness * h / 20.0
        return c0, c1

    def __call__(self, d: DesignVector, h, p):
        c0, c1 = self.coefficients(d, h)
        return np.maximum(0.0, c0 + c1 * np.asarray(p, float))


def synthesize(
    designs: dict[str, DesignVector],
    truth: Callable,
    heights: Sequence[float],
    pressures: Sequence[float],
    noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> SampleSet:
    """One test per (membrane, height), each sampled at every pressure."""
    mem, test, hs, ps, fs = [], [], [], [], []
    p = np.asarray(pressures, float)
    for mid, d in designs.items():
        for h in heights:
            f = truth(d, h, p)
            if noise:
                f = f + noise * (rng or np.random.default_rng(0)).standard_normal(p.size)
            mem += [mid] * p.size
            test += [float(h)] * p.size
            hs += [float(h)] * p.size
            ps += p.tolist()
            fs += np.asarray(f, float).tolist()
    return SampleSet(dict(designs), mem, test, hs, ps, fs)


def random_family_dataset(
    n_designs: int,
    seed: int = 0,
    truth: Callable = LinearFamily(),
    heights: Sequence[float] = tuple(range(0, 80, 10)),
    pressures: Sequence[float] = tuple(np.linspace(0.0, 7.0, 30)),
    bounds: DesignBounds = DesignBounds(),
    prefix: str = "m",
) -> SampleSet:
    rng = np.random.default_rng(seed)
    ds = sample_designs(bounds, n_designs, rng)
    return synthesize({f"{prefix}{i:03d}": d for i, d in enumerate(ds)}, truth, heights, pressures)


def split_tests(samples: SampleSet, fraction: float, seed: int = 0) -> tuple[SampleSet, SampleSet]:
    """Hold out a random fraction of whole (membrane, height) tests."""
    keys = np.array([f"{m}\x00{t}" for m, t in zip(samples.membrane, samples.test)])
    uniq = np.unique(keys)
    n_held = max(1, int(round(fraction * uniq.size)))
    held = set(np.random.default_rng(seed).choice(uniq, n_held, replace=False).tolist())
    mask = np.array([k in held for k in keys])
    return samples.subset(~mask), samples.subset(mask)


@dataclass(frozen=True)
class ToyStudyResult:
    design: DesignVector
    std_before: float
    std_after: float
    score: float

    @property
    def reduced(self) -> bool:
        return self.std_after < self.std_before


def toy_active_study(
    seed: int,
    n_members: int = 4,
    iterations: int = 1500,
    initial_contacts: Sequence[float] = (25.4, 27.0, 28.6),
    starts: int = 8,
) -> ToyStudyResult:
    """One acquire-and-retrain round on a 1-D (contact radius only) design family.

    Reports the grid-averaged ensemble std at the acquired design before and
    after its synthetic data are added to the training set.
    """
    from .active import AcquisitionGrid, select_next, train_ensemble, uncertainty_at
    from .surrogate import SurrogateConfig

    truth = LinearFamily()
    heights = (0.0, 20.0, 40.0)
    pressures = tuple(np.linspace(0.0, 7.0, 8))
    bounds = DesignBounds(thickness=(2.0, 2.0), ring_counts=(0,))
    grid = AcquisitionGrid(heights, (1.0, 4.0, 7.0))
    cfg = SurrogateConfig(iterations=iterations, width=16, depth=2, seed=seed)
    designs = {f"c{i}": DesignVector(c, 2.0) for i, c in enumerate(initial_contacts)}
    data = synthesize(designs, truth, heights, pressures)
    ens = train_ensemble(data, cfg, n=n_members, seed=seed)
    acq = select_next(ens, q=1, bounds=bounds, starts=starts, seed=seed, grid=grid)
    new = acq.designs[0]
    before = float(uncertainty_at(ens, [new], grid)[0])
    data2 = data.concat(synthesize({"acq": new}, truth, heights, pressures))
    ens2 = train_ensemble(data2, cfg, n=n_members, seed=seed)
    after = float(uncertainty_at(ens2, [new], grid)[0])
    return ToyStudyResult(new, before, after, acq.score)
