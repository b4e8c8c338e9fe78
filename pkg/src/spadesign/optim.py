"""Bounded multi-start local search shared by acquisition and design optimisation."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np


def projected_ascent(
    f_and_g: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    proj: Callable[[np.ndarray], Optional[np.ndarray]],
    scale: np.ndarray,
    iters: int = 100,
    tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Projected gradient ascent with a backtracking step.

    Steps are taken along the gradient preconditioned by ``scale**2`` (box
    widths), so coordinates with zero width never move.  ``proj`` returns
    None for a point it cannot repair; such trial steps are rejected.
    """
    x = np.asarray(x0, float)
    fx, g = f_and_g(x)
    s2 = np.asarray(scale, float) ** 2
    step = 0.1
    for _ in range(iters):
        d = s2 * g
        dn = float(np.sqrt(np.sum(d * g)))
        if not math.isfinite(dn) or dn == 0.0:
            break
        t = step
        improved = False
        while t > 1e-10:
            cand = proj(x + t * d / dn)
            if cand is not None and np.any(cand != x):
                fc, gc = f_and_g(cand)
                if math.isfinite(fc) and fc > fx + tol * max(1.0, abs(fx)):
                    x, fx, g = cand, fc, gc
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
        step = min(2.0 * t, 1.0)
    return x, fx
