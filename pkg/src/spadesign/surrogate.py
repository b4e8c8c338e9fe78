"""Constrained neural surrogate mapping (design, height, pressure) to contact force.

Architecture: a shared linear ring encoder (present ring -> ``T v``, absent
ring -> ``e_nan``; the two slots are summed so ring order does not matter),
optionally followed by a small ring MLP, concatenated with thickness, contact
radius and height and fed to a tanh MLP that outputs polynomial coefficients
in pressure.  Coefficients of order >= 1 are squared so they are never
negative, and the polynomial is clamped at zero.  Force is therefore
nondecreasing in pressure and nonnegative by construction.

Units at the interface are mm, kPa and N.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, replace
from functools import partial
from pathlib import Path
from typing import Optional, Sequence

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402
import numpy as np  # noqa: E402
import optax  # noqa: E402

from .designvec import DesignVector  # noqa: E402
from .errors import ValidationError  # noqa: E402

MAGIC = b"SPASURR\x00"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class SurrogateConfig:
    embed_dim: int = 12
    ring_mlp: Optional[tuple[int, ...]] = None
    depth: int = 3
    width: int = 32
    degree: int = 1
    iterations: int = 10000
    learning_rate: float = 3e-3
    final_lr_fraction: float = 0.05
    batch_size: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 3:
            raise ValidationError("ring embedding dimension must be >= 3 so the absent marker is separable")
        if self.degree < 1:
            raise ValidationError("polynomial degree must be >= 1")
        if self.depth < 1 or self.width < 1:
            raise ValidationError("MLP depth and width must be positive")
        if self.iterations < 0 or self.batch_size < 1:
            raise ValidationError("iterations must be >= 0 and batch size >= 1")
        if self.ring_mlp is not None:
            object.__setattr__(self, "ring_mlp", tuple(int(v) for v in self.ring_mlp))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ring_mlp"] = list(self.ring_mlp) if self.ring_mlp is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown surrogate config keys: {sorted(extra)}")
        d = dict(d)
        if d.get("ring_mlp") is not None:
            d["ring_mlp"] = tuple(d["ring_mlp"])
        return cls(**d)


@dataclass(frozen=True)
class Normalization:
    """Affine input scaling fitted on the training data; pressure and force are scaled only."""

    scalar_mean: tuple[float, float, float]  # thickness, contact radius, height
    scalar_std: tuple[float, float, float]
    ring_mean: tuple[float, float]
    ring_std: tuple[float, float]
    p_scale: float
    f_scale: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        return cls(
            tuple(d["scalar_mean"]), tuple(d["scalar_std"]), tuple(d["ring_mean"]), tuple(d["ring_std"]),
            float(d["p_scale"]), float(d["f_scale"]),
        )

    @classmethod
    def identity(cls) -> "Normalization":
        return cls((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.0, 0.0), (1.0, 1.0), 1.0, 1.0)


# a pytree so that jitted training can share compiled code across normalizations
jax.tree_util.register_dataclass(
    Normalization,
    data_fields=["scalar_mean", "scalar_std", "ring_mean", "ring_std", "p_scale", "f_scale"],
    meta_fields=[],
)


@dataclass
class SampleSet:
    """Flat training table: one row per (design, height, pressure, force) sample."""

    designs: dict[str, DesignVector]
    membrane: np.ndarray
    test: np.ndarray
    height: np.ndarray
    pressure: np.ndarray
    force: np.ndarray

    def __post_init__(self):
        self.membrane = np.asarray(self.membrane, dtype=object)
        self.test = np.asarray(self.test)
        self.height = np.asarray(self.height, dtype=float)
        self.pressure = np.asarray(self.pressure, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        n = self.height.size
        if not all(a.shape == (n,) for a in (self.membrane, self.test, self.pressure, self.force)):
            raise ValidationError("sample columns must all have the same length")
        missing = set(self.membrane.tolist()) - set(self.designs)
        if missing:
            raise ValidationError(f"samples reference unknown membranes: {sorted(missing)}")

    def __len__(self) -> int:
        return int(self.height.size)

    @property
    def membrane_ids(self) -> list[str]:
        return sorted(set(self.membrane.tolist()))

    def subset(self, mask) -> "SampleSet":
        mask = np.asarray(mask, dtype=bool)
        ids = set(self.membrane[mask].tolist())
        return SampleSet(
            {k: v for k, v in self.designs.items() if k in ids},
            self.membrane[mask], self.test[mask], self.height[mask], self.pressure[mask], self.force[mask],
        )

    def select_membranes(self, ids: Sequence[str]) -> "SampleSet":
        ids = set(ids)
        return self.subset(np.array([m in ids for m in self.membrane], dtype=bool))

    def weights(self) -> np.ndarray:
        """Per-sample weights giving every (membrane, height) test equal total weight; sums to 1."""
        keys = [f"{m}\x00{t}" for m, t in zip(self.membrane, self.test)]
        uniq, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
        return 1.0 / (len(uniq) * counts[inv])

    def concat(self, other: "SampleSet") -> "SampleSet":
        designs = dict(self.designs)
        designs.update(other.designs)
        return SampleSet(
            designs,
            np.concatenate([self.membrane, other.membrane]),
            np.concatenate([self.test.astype(object), other.test.astype(object)]),
            np.concatenate([self.height, other.height]),
            np.concatenate([self.pressure, other.pressure]),
            np.concatenate([self.force, other.force]),
        )


# ---------------------------------------------------------------------------
# Feature packing


def pack_designs(designs: Sequence[DesignVector]) -> dict[str, np.ndarray]:
    """Column arrays: scalars (N, 2), rings (N, 2, 2), ring presence mask (N, 2)."""
    n = len(designs)
    scal = np.zeros((n, 2))
    rings = np.zeros((n, 2, 2))
    mask = np.zeros((n, 2))
    for i, d in enumerate(designs):
        scal[i] = (d.thickness, d.contact_radius)
        for k, r in enumerate((d.ring1, d.ring2)):
            if r is not None:
                rings[i, k] = r
                mask[i, k] = 1.0
    return {"scal": scal, "rings": rings, "mask": mask}


def ring_mask(n_rings: int) -> np.ndarray:
    return np.array([float(n_rings >= 1), float(n_rings >= 2)])


def flat_inputs(x6, mask, h, p) -> dict:
    """Packed model inputs for one flat design evaluated at paired (h, p) arrays.

    ``mask`` is the (2,) ring-presence vector; it may be traced, so one
    compiled function serves every ring topology.
    """
    n = h.shape[0]
    r = jnp.stack([x6[2:4], x6[4:6]])
    r = jnp.where(mask[:, None] > 0, jnp.nan_to_num(r), 0.0)
    return {
        "scal": jnp.broadcast_to(jnp.stack([x6[1], x6[0]]), (n, 2)),
        "rings": jnp.broadcast_to(r, (n, 2, 2)),
        "mask": jnp.broadcast_to(mask, (n, 2)),
        "h": h,
        "p": p,
    }


def _inputs(samples: SampleSet) -> dict[str, np.ndarray]:
    packed = pack_designs([samples.designs[m] for m in samples.membrane])
    packed["h"] = samples.height
    packed["p"] = samples.pressure
    return packed


def _weighted_moments(a: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = w / w.sum()
    mean = w @ a
    return mean, np.sqrt(w @ (a - mean) ** 2)


def fit_normalization(samples: SampleSet) -> Normalization:
    """Feature moments under the per-test sample weights, so duplicated samples change nothing."""
    if len(samples) == 0:
        return Normalization.identity()
    x = _inputs(samples)
    w = samples.weights()
    sc = np.column_stack([x["scal"], x["h"]])
    mean, std = _weighted_moments(sc, w)
    std = np.where(std > 1e-12, std, 1.0)
    sel = x["mask"] > 0
    present = x["rings"][sel]
    if present.size:
        rw = np.broadcast_to(w[:, None], sel.shape)[sel]
        rmean, rstd = _weighted_moments(present, rw)
        rstd = np.where(rstd > 1e-12, rstd, 1.0)
    else:
        rmean, rstd = np.zeros(2), np.ones(2)
    p_scale = float(np.max(np.abs(samples.pressure))) if len(samples) else 1.0
    f_scale = float(np.max(np.abs(samples.force))) if len(samples) else 1.0
    return Normalization(
        tuple(mean.tolist()), tuple(std.tolist()), tuple(rmean.tolist()), tuple(rstd.tolist()),
        p_scale if p_scale > 0 else 1.0, f_scale if f_scale > 0 else 1.0,
    )


# ---------------------------------------------------------------------------
# Parameters and forward pass


def _dense(key, n_in, n_out, scale=1.0):
    w = jax.random.normal(key, (n_in, n_out)) * scale * math.sqrt(1.0 / n_in)
    return {"w": w, "b": jnp.zeros((n_out,))}


def init_params(key, cfg: SurrogateConfig) -> dict:
    keys = iter(jax.random.split(key, 4 + cfg.depth + (len(cfg.ring_mlp) if cfg.ring_mlp else 0)))
    p = {
        "T": jax.random.normal(next(keys), (cfg.embed_dim, 2)) / math.sqrt(2.0),
        "e_nan": jax.random.normal(next(keys), (cfg.embed_dim,)),
    }
    latent = cfg.embed_dim
    if cfg.ring_mlp:
        layers = []
        for n in cfg.ring_mlp:
            layers.append(_dense(next(keys), latent, n))
            latent = n
        p["ring_mlp"] = layers
    n_in = latent + 3
    hidden = []
    for _ in range(cfg.depth):
        hidden.append(_dense(next(keys), n_in, cfg.width))
        n_in = cfg.width
    p["mlp"] = hidden
    p["head"] = _dense(next(keys), n_in, cfg.degree + 1)
    return p


def _encode(params, rings, mask):
    """rings (N, 2, 2) normalised, mask (N, 2) -> summed latent (N, d)."""
    tv = jnp.einsum("dk,nsk->nsd", params["T"], rings)
    m = mask[..., None]
    e = m * tv + (1.0 - m) * params["e_nan"]
    return e[:, 0, :] + e[:, 1, :]


def _raw_coefficients(params, norm_arrays, x):
    smean, sstd, rmean, rstd = norm_arrays
    rings = (x["rings"] - rmean) / rstd
    z = _encode(params, rings, x["mask"])
    for layer in params.get("ring_mlp", ()):
        z = jnp.tanh(z @ layer["w"] + layer["b"])
    sc = jnp.concatenate([x["scal"], x["h"][:, None]], axis=1)
    sc = (sc - smean) / sstd
    hdn = jnp.concatenate([z, sc], axis=1)
    for layer in params["mlp"]:
        hdn = jnp.tanh(hdn @ layer["w"] + layer["b"])
    return hdn @ params["head"]["w"] + params["head"]["b"]


def constrain(raw):
    """Map raw head outputs to polynomial coefficients with a_k >= 0 for k >= 1."""
    return jnp.concatenate([raw[:, :1], raw[:, 1:] ** 2], axis=1)


def _poly(coef, p_norm):
    powers = p_norm[:, None] ** jnp.arange(coef.shape[1])
    return jnp.sum(coef * powers, axis=1)


def unclamped_force(params, prior, prior_scale, norm: Normalization, x) -> jnp.ndarray:
    """Pressure polynomial before the nonnegativity clamp, in units of ``norm.f_scale``."""
    na = _norm_arrays(norm)
    raw = _raw_coefficients(params, na, x)
    if prior is not None:
        raw = raw + prior_scale * _raw_coefficients(prior, na, x)
    return _poly(constrain(raw), x["p"] / norm.p_scale)


def force_from_arrays(params, prior, prior_scale, norm: Normalization, x) -> jnp.ndarray:
    """Force [N] for packed inputs; ``prior`` (may be None) is added to the raw head output."""
    return norm.f_scale * jax.nn.relu(unclamped_force(params, prior, prior_scale, norm, x))


def _norm_arrays(norm: Normalization):
    return (
        jnp.asarray(norm.scalar_mean),
        jnp.asarray(norm.scalar_std),
        jnp.asarray(norm.ring_mean),
        jnp.asarray(norm.ring_std),
    )


@dataclass
class SurrogateModel:
    config: SurrogateConfig
    params: Optional[dict]
    norm: Normalization
    prior: Optional[dict] = None
    prior_scale: float = 0.0
    final_loss: float = math.nan
    trained: bool = False

    def force_arrays(self, x) -> jnp.ndarray:
        return force_from_arrays(self.params, self.prior, self.prior_scale, self.norm, x)

    def coefficients(self, designs: Sequence[DesignVector], h) -> np.ndarray:
        """Pressure-polynomial coefficients in normalised pressure units, shape (N, degree + 1)."""
        x = pack_designs(designs)
        x["h"] = np.broadcast_to(np.asarray(h, float), (len(designs),)).copy()
        na = _norm_arrays(self.norm)
        raw = _raw_coefficients(self.params, na, x)
        if self.prior is not None:
            raw = raw + self.prior_scale * _raw_coefficients(self.prior, na, x)
        return np.asarray(constrain(raw))


def new_model(cfg: SurrogateConfig, norm: Optional[Normalization] = None, key=None) -> SurrogateModel:
    key = jax.random.PRNGKey(cfg.seed) if key is None else key
    return SurrogateModel(cfg, init_params(key, cfg), norm or Normalization.identity())


def zero_head(model: SurrogateModel) -> SurrogateModel:
    params = jax.tree_util.tree_map(lambda a: a, model.params)
    params["head"] = {"w": jnp.zeros_like(params["head"]["w"]), "b": jnp.zeros_like(params["head"]["b"])}
    return replace(model, params=params)


def encode_rings(model: SurrogateModel, v1, v2) -> np.ndarray:
    """Latent ring representation of one design's two ring slots (raw mm inputs)."""
    rings = np.zeros((1, 2, 2))
    mask = np.zeros((1, 2))
    for k, v in enumerate((v1, v2)):
        if v is not None:
            rings[0, k] = v
            mask[0, k] = 1.0
    _, _, rmean, rstd = _norm_arrays(model.norm)
    return np.asarray(_encode(model.params, (jnp.asarray(rings) - rmean) / rstd, jnp.asarray(mask))[0])


def predict_force(model: SurrogateModel, design: DesignVector, h, p) -> np.ndarray:
    """Force [N] at height(s) ``h`` [mm] and pressure(s) ``p`` [kPa] for a single design."""
    h = np.asarray(h, float)
    p = np.asarray(p, float)
    shape = np.broadcast_shapes(h.shape, p.shape)
    hb = np.broadcast_to(h, shape).ravel()
    pb = np.broadcast_to(p, shape).ravel()
    x = pack_designs([design] * max(hb.size, 1))
    x["h"], x["p"] = hb, pb
    out = np.asarray(model.force_arrays(x))
    return out.reshape(shape) if shape else out[0]


def predict_samples(model: SurrogateModel, samples: SampleSet) -> np.ndarray:
    return np.asarray(model.force_arrays(_inputs(samples)))


def model_force_fn(model: SurrogateModel):
    """JAX-traceable ``f(x6, mask, h, p)`` for one flat design at paired height/pressure arrays."""

    def f(x6, mask, h, p):
        return force_from_arrays(model.params, model.prior, model.prior_scale, model.norm, flat_inputs(x6, mask, h, p))

    return f


# ---------------------------------------------------------------------------
# Training


def weighted_loss(params, prior, prior_scale, norm, x, f, w):
    """Weighted squared error of the clamped force, in normalised force units."""
    pred = force_from_arrays(params, prior, prior_scale, norm, x)
    r = (pred - f) / norm.f_scale
    return jnp.sum(w * r * r)


def training_loss(params, prior, prior_scale, norm, x, f, w):
    """Clamp-aware surrogate of ``weighted_loss`` used for gradient steps.

    Where the target is positive the residual uses the unclamped polynomial,
    otherwise only a positive prediction is penalised.  It equals
    ``weighted_loss`` wherever the clamp is inactive or the target is zero,
    bounds it from above elsewhere, and keeps a nonzero gradient for a
    member whose polynomial has gone negative on every sample.
    """
    u = unclamped_force(params, prior, prior_scale, norm, x)
    t = f / norm.f_scale
    r = jnp.where(t > 0, u - t, jax.nn.relu(u))
    return jnp.sum(w * r * r)


def train(
    samples: SampleSet,
    cfg: SurrogateConfig = SurrogateConfig(),
    prior: Optional[dict] = None,
    prior_scale: float = 0.0,
    init: Optional[dict] = None,
    norm: Optional[Normalization] = None,
) -> SurrogateModel:
    """Fit the surrogate by Adam on the test-weighted squared force error.

    Gradient steps use ``training_loss``; the reported final loss is the
    clamped ``weighted_loss``.

    When the table is larger than the batch size, minibatches are drawn with
    probability proportional to the sample weights, which keeps the stochastic
    gradient unbiased for the weighted objective.
    """
    if len(samples) == 0:
        raise ValidationError("cannot train on an empty dataset")
    norm = norm or fit_normalization(samples)
    key = jax.random.PRNGKey(cfg.seed)
    k_init, k_batch = jax.random.split(key)
    params = init if init is not None else init_params(k_init, cfg)
    x_all = {k: jnp.asarray(v) for k, v in _inputs(samples).items()}
    f_all = jnp.asarray(samples.force)
    w_all = jnp.asarray(samples.weights())
    if cfg.iterations > 0:
        params = _fit(
            params, prior, float(prior_scale), norm, x_all, f_all, w_all, k_batch,
            iterations=cfg.iterations, batch_size=min(cfg.batch_size, len(samples)),
            full_batch=len(samples) <= cfg.batch_size, lr=cfg.learning_rate, final_frac=cfg.final_lr_fraction,
        )
    final = float(weighted_loss(params, prior, prior_scale, norm, x_all, f_all, w_all))
    return SurrogateModel(cfg, params, norm, prior, prior_scale, final, True)


@partial(jax.jit, static_argnames=("iterations", "batch_size", "full_batch", "lr", "final_frac"))
def _fit(params, prior, prior_scale, norm, x_all, f_all, w_all, key, *, iterations, batch_size, full_batch, lr, final_frac):
    sched = optax.exponential_decay(lr, transition_steps=max(iterations, 1), decay_rate=final_frac)
    opt = optax.adam(sched)
    n = f_all.shape[0]

    def loss_fn(pr, idx):
        if full_batch:
            return training_loss(pr, prior, prior_scale, norm, x_all, f_all, w_all)
        xb = {k: v[idx] for k, v in x_all.items()}
        wb = jnp.full((batch_size,), 1.0 / batch_size)
        return training_loss(pr, prior, prior_scale, norm, xb, f_all[idx], wb)

    def step(carry, k):
        pr, st = carry
        idx = None if full_batch else jax.random.choice(k, n, (batch_size,), replace=True, p=w_all)
        g = jax.grad(loss_fn)(pr, idx)
        upd, st = opt.update(g, st, pr)
        return (optax.apply_updates(pr, upd), st), None

    (params, _), _ = jax.lax.scan(step, (params, opt.init(params)), jax.random.split(key, iterations))
    return params


def rmse(model: SurrogateModel, samples: SampleSet) -> float:
    r = predict_samples(model, samples) - samples.force
    return float(np.sqrt(np.mean(r * r)))


@dataclass(frozen=True)
class KFoldResult:
    fold_rmse: tuple[float, ...]
    folds: tuple[tuple[str, ...], ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_rmse))


def membrane_folds(ids: Sequence[str], k: int, seed: int = 0) -> list[list[str]]:
    ids = sorted(ids)
    if not 1 <= k <= len(ids):
        raise ValidationError(f"k = {k} folds needs between 1 and {len(ids)} membranes")
    if k < 2:
        raise ValidationError("k-fold needs k >= 2")
    order = np.random.default_rng(seed).permutation(len(ids))
    return [sorted(ids[i] for i in order[j::k]) for j in range(k)]


def kfold_rmse(samples: SampleSet, k: int, cfg: SurrogateConfig = SurrogateConfig(), fit=None) -> KFoldResult:
    """Cross-validated force RMSE with folds split by membrane.

    ``fit`` overrides the trainer: ``fit(train_set)`` must return a callable
    mapping a SampleSet to predicted forces.
    """
    ids = samples.membrane_ids
    if len(ids) < 2:
        raise ValidationError("k-fold needs at least two membranes")
    folds = membrane_folds(ids, k, cfg.seed)
    scores = []
    for fold in folds:
        held = set(fold)
        tr = samples.select_membranes([m for m in ids if m not in held])
        te = samples.select_membranes(fold)
        if fit is None:
            model = train(tr, cfg)
            pred = predict_samples(model, te)
        else:
            pred = np.asarray(fit(tr)(te))
        scores.append(float(np.sqrt(np.mean((pred - te.force) ** 2))))
    return KFoldResult(tuple(scores), tuple(tuple(f) for f in folds))


# ---------------------------------------------------------------------------
# Serialisation


def _flatten(tree) -> list[tuple[str, np.ndarray]]:
    leaves = jax.tree_util.tree_flatten_with_path(tree)[0]
    return [(jax.tree_util.keystr(path), np.asarray(leaf, dtype="<f8")) for path, leaf in leaves]


def _unflatten(template, arrays: dict[str, np.ndarray]):
    leaves, treedef = jax.tree_util.tree_flatten_with_path(template)
    vals = []
    for path, leaf in leaves:
        name = jax.tree_util.keystr(path)
        if name not in arrays:
            raise ValidationError(f"model file is missing tensor {name}")
        a = arrays[name]
        if a.shape != np.shape(leaf):
            raise ValidationError(f"tensor {name} has shape {a.shape}, expected {np.shape(leaf)}")
        vals.append(jnp.asarray(a))
    return jax.tree_util.tree_unflatten(treedef, vals)


def save_model(model: SurrogateModel, path) -> None:
    """Write ``MAGIC | u32 version | u64 header length | JSON header | float64 LE tensors``."""
    tensors, blobs, offset = [], [], 0
    groups = [("params", model.params)] + ([("prior", model.prior)] if model.prior is not None else [])
    for group, tree in groups:
        for name, arr in _flatten(tree):
            tensors.append({"group": group, "name": name, "shape": list(arr.shape), "offset": offset})
            blobs.append(arr.tobytes(order="C"))
            offset += arr.nbytes
    header = {
        "format": "spadesign-surrogate",
        "config": model.config.to_dict(),
        "normalization": model.norm.to_dict(),
        "prior_scale": model.prior_scale,
        "final_loss": model.final_loss if math.isfinite(model.final_loss) else None,
        "trained": model.trained,
        "tensors": tensors,
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        for b in blobs:
            fh.write(b)


def load_model(path) -> SurrogateModel:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValidationError(f"{path} is not a surrogate model file")
    (version,) = struct.unpack("<I", data[8:12])
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported model format version {version}")
    (hlen,) = struct.unpack("<Q", data[12:20])
    header = json.loads(data[20 : 20 + hlen].decode("utf-8"))
    blob = data[20 + hlen :]
    cfg = SurrogateConfig.from_dict(header["config"])
    groups: dict[str, dict[str, np.ndarray]] = {}
    for t in header["tensors"]:
        count = int(np.prod(t["shape"])) if t["shape"] else 1
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=t["offset"]).reshape(t["shape"])
        groups.setdefault(t["group"], {})[t["name"]] = arr.copy()
    template = init_params(jax.random.PRNGKey(0), cfg)
    params = _unflatten(template, groups.get("params", {}))
    prior = _unflatten(template, groups["prior"]) if "prior" in groups else None
    fl = header.get("final_loss")
    return SurrogateModel(
        cfg, params, Normalization.from_dict(header["normalization"]), prior,
        float(header.get("prior_scale", 0.0)), math.nan if fl is None else float(fl), bool(header.get("trained")),
    )
