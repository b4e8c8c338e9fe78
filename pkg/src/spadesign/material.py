"""Gent hyperelastic constitutive relations.

All quantities are SI (Pa for moduli and stresses).  The Gent strain energy
density is

    W = -(mu * Jm / 2) * ln(1 - (I1 - 3) / Jm)

and diverges when ``I1 - 3`` reaches ``Jm``.  Stress evaluations refuse states
closer than ``LOCKUP_GUARD * Jm`` to that asymptote so that iterative solvers
never step onto the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .errors import DomainError, FitError, ValidationError

LOCKUP_GUARD = 0.999


@dataclass(frozen=True)
class GentMaterial:
    mu: float
    jm: float

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValidationError(f"shear modulus must be positive, got {self.mu}")
        if not (self.jm > 0 and math.isfinite(self.jm)):
            raise ValidationError(f"extension limit Jm must be positive, got {self.jm}")

    @classmethod
    def from_kpa(cls, mu_kpa: float, jm: float) -> "GentMaterial":
        return cls(mu_kpa * 1e3, jm)

    def lockup_i1(self, guard: float = LOCKUP_GUARD) -> float:
        """Largest admissible first invariant for the given guard band."""
        return 3.0 + guard * self.jm

    def lockup_stretch(self, mode: str = "uniaxial", guard: float = LOCKUP_GUARD) -> float:
        """Stretch at which the guarded lock-up invariant is reached along a loading path."""
        target = self.lockup_i1(guard)
        i1 = {
            "uniaxial": lambda s: s * s + 2.0 / s,
            "equibiaxial": lambda s: 2.0 * s * s + 1.0 / s**4,
        }[mode]
        lo, hi = 1.0, 2.0
        while i1(hi) < target:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if i1(mid) < target:
                lo = mid
            else:
                hi = mid
        return lo


@dataclass(frozen=True)
class PrincipalStretches:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        if not (self.l1 > 0 and self.l2 > 0 and self.l3 > 0):
            raise ValidationError(f"principal stretches must be positive: {self}")

    @classmethod
    def incompressible(cls, l1: float, l2: float) -> "PrincipalStretches":
        return cls(l1, l2, 1.0 / (l1 * l2))

    @classmethod
    def uniaxial(cls, lam: float) -> "PrincipalStretches":
        lat = 1.0 / math.sqrt(lam)
        return cls(lam, lat, 1.0 / (lam * lat))

    @classmethod
    def equibiaxial(cls, lam: float) -> "PrincipalStretches":
        return cls(lam, lam, 1.0 / (lam * lam))

    @classmethod
    def from_mode(cls, lam: float, mode: str) -> "PrincipalStretches":
        if mode == "uniaxial":
            return cls.uniaxial(lam)
        if mode == "equibiaxial":
            return cls.equibiaxial(lam)
        raise ValidationError(f"unknown loading mode {mode!r}")

    @property
    def volume_ratio(self) -> float:
        return self.l1 * self.l2 * self.l3


def first_invariant(s: PrincipalStretches) -> float:
    return s.l1 * s.l1 + s.l2 * s.l2 + s.l3 * s.l3


def _check_lockup(i1: float, m: GentMaterial, guard: float, what) -> float:
    """Return the Gent denominator ``Jm - I1 + 3`` after checking the guard band."""
    if i1 - 3.0 >= guard * m.jm:
        raise DomainError(
            f"Gent lock-up: I1 - 3 = {i1 - 3.0:.6g} reaches {guard:g}*Jm = {guard * m.jm:.6g} at {what}"
        )
    return m.jm - i1 + 3.0


def gent_energy(s: PrincipalStretches, m: GentMaterial, guard: float = 1.0) -> float:
    """Strain energy density [Pa].

    Only the true singularity is rejected by default; pass ``guard=LOCKUP_GUARD``
    to apply the solver guard band.
    """
    i1 = first_invariant(s)
    _check_lockup(i1, m, guard, s)
    return -0.5 * m.mu * m.jm * math.log1p(-(i1 - 3.0) / m.jm)


def uniaxial_stress(lam: float, m: GentMaterial, guard: float = LOCKUP_GUARD) -> float:
    """Cauchy stress along the loading axis for unconstrained uniaxial tension."""
    if lam <= 0:
        raise ValidationError(f"stretch must be positive, got {lam}")
    i1 = lam * lam + 2.0 / lam
    denom = _check_lockup(i1, m, guard, f"uniaxial stretch {lam}")
    return m.mu * m.jm / denom * (lam * lam - 1.0 / lam)


def equibiaxial_stress(lam: float, m: GentMaterial, guard: float = LOCKUP_GUARD) -> float:
    """In-plane Cauchy stress for equibiaxial stretching of a thin sheet."""
    if lam <= 0:
        raise ValidationError(f"stretch must be positive, got {lam}")
    i1 = 2.0 * lam * lam + 1.0 / lam**4
    denom = _check_lockup(i1, m, guard, f"equibiaxial stretch {lam}")
    return m.mu * m.jm / denom * (lam * lam - 1.0 / lam**4)


class MembranePartials(NamedTuple):
    w1: float
    w2: float
    w11: float
    w12: float
    w22: float


def membrane_energy(l1: float, l2: float, m: GentMaterial, guard: float = 1.0) -> float:
    """Gent energy of an incompressible sheet as a function of its two in-plane stretches."""
    return gent_energy(PrincipalStretches.incompressible(l1, l2), m, guard)


def membrane_partials(l1: float, l2: float, m: GentMaterial, guard: float = LOCKUP_GUARD) -> MembranePartials:
    """Analytic first and second derivatives of W(l1, l2) with l3 = 1/(l1 l2).

    Writing ``f = mu Jm / (2 D)`` with ``D = Jm - I1 + 3``, every partial has the
    form ``f * (I1_ab + I1_a I1_b / D)``.
    """
    inv = 1.0 / (l1 * l2)
    i1 = l1 * l1 + l2 * l2 + inv * inv
    d = _check_lockup(i1, m, guard, f"(l1={l1}, l2={l2})")
    f = 0.5 * m.mu * m.jm / d
    inv2 = inv * inv
    i_1 = 2.0 * l1 - 2.0 * inv2 / l1
    i_2 = 2.0 * l2 - 2.0 * inv2 / l2
    i_11 = 2.0 + 6.0 * inv2 / (l1 * l1)
    i_22 = 2.0 + 6.0 * inv2 / (l2 * l2)
    i_12 = 4.0 * inv2 / (l1 * l2)
    return MembranePartials(
        w1=f * i_1,
        w2=f * i_2,
        w11=f * (i_11 + i_1 * i_1 / d),
        w12=f * (i_12 + i_1 * i_2 / d),
        w22=f * (i_22 + i_2 * i_2 / d),
    )


@dataclass(frozen=True)
class GentFit:
    material: GentMaterial
    rms_residual: float
    n_samples: int


def _uniaxial_shape(lam: np.ndarray, jm: float) -> np.ndarray:
    """Uniaxial stress per unit shear modulus."""
    i1 = lam * lam + 2.0 / lam
    return jm / (jm - i1 + 3.0) * (lam * lam - 1.0 / lam)


def fit_gent_uniaxial(samples: Sequence[tuple[float, float]]) -> GentFit:
    """Least-squares fit of (mu, Jm) to uniaxial (stretch, stress [Pa]) data.

    The stress is linear in mu, so mu is eliminated in closed form and Jm is
    found by a bounded 1-D search on log(Jm), then both are polished jointly.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise FitError("need at least 3 (stretch, stress) samples")
    lam, sig = data[:, 0], data[:, 1]
    if np.any(lam <= 0) or not np.all(np.isfinite(data)):
        raise FitError("stretches must be positive and all values finite")
    informative = np.unique(np.round(lam[np.abs(lam - 1.0) > 1e-9], 12))
    if informative.size < 2:
        raise FitError("data must contain at least two distinct stretches away from 1")

    i1max = float(np.max(lam * lam + 2.0 / lam))
    jm_lo = max((i1max - 3.0) / LOCKUP_GUARD, 1e-6) * (1.0 + 1e-9)
    jm_hi = 1e8

    def best_mu(jm):
        g = _uniaxial_shape(lam, jm)
        gg = float(g @ g)
        return float(g @ sig) / gg if gg > 0 else 0.0

    def sse(log_jm):
        jm = math.exp(log_jm)
        r = best_mu(jm) * _uniaxial_shape(lam, jm) - sig
        return float(r @ r)

    grid = np.linspace(math.log(jm_lo), math.log(jm_hi), 200)
    vals = [sse(g) for g in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(sse, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    jm0 = math.exp(res.x)
    mu0 = best_mu(jm0)
    if not mu0 > 0:
        raise FitError("fitted shear modulus is not positive; data inconsistent with tension")

    scale = max(float(np.max(np.abs(sig))), 1e-300)

    def resid(theta):
        mu, jm = math.exp(theta[0]), math.exp(theta[1])
        return (mu * _uniaxial_shape(lam, jm) - sig) / scale

    pol = least_squares(
        resid,
        x0=[math.log(mu0), math.log(jm0)],
        bounds=([-np.inf, math.log(jm_lo)], [np.inf, math.log(jm_hi)]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    def pair_sse(mu, jm):
        r = mu * _uniaxial_shape(lam, jm) - sig
        return float(r @ r)

    mu, jm = math.exp(pol.x[0]), math.exp(pol.x[1])
    if pair_sse(mu, jm) > pair_sse(mu0, jm0):
        mu, jm = mu0, jm0
    rms = math.sqrt(pair_sse(mu, jm) / len(lam))
    return GentFit(GentMaterial(mu, jm), rms, len(lam))
