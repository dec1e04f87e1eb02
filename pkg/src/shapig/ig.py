"""Integrated Gradients, baseline strategies and Shapley Integrated Gradients.

The path integral is approximated with the midpoint rule: ``m`` gradient
evaluations at ``x' + (t + 0.5)/m * (x - x')`` for ``t = 0..m-1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .micronet import MicroNet, forward, input_gradient
from .sampling import RngLike, SampledCoalitionSet, as_rng, sample_coalitions

BASELINE_KINDS = ("zero", "mean", "random", "sig")
DEFAULT_IG_STEPS = 256
_CHUNK_ROWS = 256  # path points per gradient batch; larger batches fall out of cache


@dataclass(frozen=True, eq=False)
class PlayerMap:
    """Partition of feature indices ``0..d-1`` into players."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(int(j) for j in g) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("every player needs at least one feature")
        flat = [j for g in groups for j in g]
        d = len(flat)
        if sorted(flat) != list(range(d)):
            raise ValueError("groups must be disjoint and cover 0..d-1 exactly once")
        object.__setattr__(self, "groups", groups)
        owner = np.empty(d, dtype=np.int64)
        for p, g in enumerate(groups):
            owner[list(g)] = p
        owner.setflags(write=False)
        object.__setattr__(self, "_owner", owner)

    @classmethod
    def identity(cls, d: int) -> "PlayerMap":
        return cls(tuple((j,) for j in range(d)))

    @property
    def n_players(self) -> int:
        return len(self.groups)

    @property
    def n_features(self) -> int:
        return len(self._owner)

    @property
    def owner(self) -> np.ndarray:
        """Player index of every feature."""
        return self._owner

    def aggregate(self, per_feature: np.ndarray) -> np.ndarray:
        per_feature = np.asarray(per_feature, dtype=float)
        return np.array([per_feature[list(g)].sum() for g in self.groups])

    def feature_masks(self, masks: np.ndarray) -> np.ndarray:
        """Boolean (len(masks), d) array: feature j is on when its player is."""
        masks = np.asarray(masks, dtype=np.int64)
        return ((masks[:, None] >> self._owner[None, :]) & 1).astype(bool)


@dataclass(frozen=True)
class AttributionResult:
    per_feature: np.ndarray
    per_player: np.ndarray
    method: str
    completeness_gap: float
    ig_steps: int
    sample_size: int = 1
    seed: Optional[int] = None
    output_index: int = 0
    extra: dict = field(default_factory=dict)

    def to_csv(self, pmap: Optional[PlayerMap] = None) -> str:
        """Metadata as ``# key=value`` lines, then ``feature,value,player`` rows."""
        owner = pmap.owner if pmap is not None else np.arange(len(self.per_feature))
        buf = io.StringIO()
        meta = {
            "method": self.method,
            "ig_steps": self.ig_steps,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "output_index": self.output_index,
            "completeness_gap": repr(float(self.completeness_gap)),
            **self.extra,
        }
        for k, v in meta.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature", "value", "player"])
        for j, val in enumerate(self.per_feature):
            w.writerow([j, repr(float(val)), int(owner[j])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AttributionResult":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("# "):
                k, _, v = line[2:].partition("=")
                meta[k] = v
            elif line and not line.startswith("feature,"):
                rows.append(line.split(","))
        per_feature = np.array([float(r[1]) for r in rows])
        owner = np.array([int(r[2]) for r in rows], dtype=np.int64)
        per_player = np.zeros(owner.max() + 1 if len(owner) else 0)
        for j, p in enumerate(owner):
            per_player[p] += per_feature[j]
        seed = meta.pop("seed", "None")
        known = {"method", "ig_steps", "sample_size", "output_index", "completeness_gap"}
        return cls(
            per_feature=per_feature,
            per_player=PlayerMap(
                tuple(tuple(np.nonzero(owner == p)[0]) for p in range(len(per_player)))
            ).aggregate(per_feature),
            method=meta["method"],
            completeness_gap=float(meta["completeness_gap"]),
            ig_steps=int(meta["ig_steps"]),
            sample_size=int(meta["sample_size"]),
            seed=None if seed == "None" else int(seed),
            output_index=int(meta["output_index"]),
            extra={k: v for k, v in meta.items() if k not in known},
        )


def _output(net: MicroNet, X: np.ndarray, output_index: int) -> np.ndarray:
    return forward(net, X)[..., output_index]


def _check_inputs(net: MicroNet, *vectors):
    for v in vectors:
        if v.shape[-1] != net.n_inputs:
            raise ValueError(f"input width {v.shape[-1]} does not match net ({net.n_inputs})")


def ig_many(net: MicroNet, x, baselines, output_index: int, m: int = DEFAULT_IG_STEPS) -> np.ndarray:
    """Per-feature IG from each row of ``baselines`` to ``x``; shape (B, d).

    All ``B * m`` path points are evaluated in batched chunks.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    x = np.asarray(x, dtype=float)
    base = np.atleast_2d(np.asarray(baselines, dtype=float))
    _check_inputs(net, x, base)
    alphas = (np.arange(m) + 0.5) / m
    delta = x[None, :] - base
    out = np.empty_like(base)
    per_chunk = max(1, _CHUNK_ROWS // m)
    for s in range(0, len(base), per_chunk):
        b = base[s : s + per_chunk]
        dl = delta[s : s + per_chunk]
        pts = b[:, None, :] + alphas[None, :, None] * dl[:, None, :]
        g = input_gradient(net, pts.reshape(-1, x.size), output_index)
        out[s : s + per_chunk] = dl * g.reshape(len(b), m, x.size).mean(axis=1)
    return out


def integrated_gradients(net: MicroNet, x, x_base, output_index: int = 0,
                         m: int = DEFAULT_IG_STEPS, pmap: Optional[PlayerMap] = None,
                         method: str = "ig") -> AttributionResult:
    x = np.asarray(x, dtype=float)
    x_base = np.asarray(x_base, dtype=float)
    if x.shape != x_base.shape or x.ndim != 1:
        raise ValueError("x and the baseline must be vectors of equal length")
    pmap = pmap or PlayerMap.identity(x.size)
    attr = ig_many(net, x, x_base[None, :], output_index, m)[0]
    f = _output(net, np.stack([x, x_base]), output_index)
    gap = abs(attr.sum() - (f[0] - f[1]))
    return AttributionResult(attr, pmap.aggregate(attr), method, float(gap), m)


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    default_sample: Optional[np.ndarray] = None
    reference_pool: Optional[np.ndarray] = None
    sample_size: int = 1
    ig_steps: int = DEFAULT_IG_STEPS
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if self.ig_steps < 1:
            raise ValueError("ig_steps must be >= 1")
        if self.kind == "sig" and self.sample_size < 1:
            raise ValueError("sig needs sample_size >= 1")


def sig_baselines(x, x_default, pmap: PlayerMap, masks: np.ndarray) -> np.ndarray:
    """One baseline per coalition: ``x_default`` with every member player's
    features copied from ``x``."""
    on = pmap.feature_masks(masks)
    return np.where(on, np.asarray(x, dtype=float)[None, :],
                    np.asarray(x_default, dtype=float)[None, :])


def make_baselines(spec: BaselineSpec, x, pmap: PlayerMap, rng: RngLike = None,
                   coalitions: Optional[SampledCoalitionSet] = None) -> np.ndarray:
    """Baseline vectors for ``spec`` as rows of a 2-D array.

    For ``sig`` the coalitions are drawn with :func:`sample_coalitions` unless
    a pre-sampled set is passed in ``coalitions``.
    """
    x = np.asarray(x, dtype=float)
    if spec.kind == "zero":
        return np.zeros((1, x.size))
    if spec.kind in ("mean", "random"):
        pool = None if spec.reference_pool is None else np.atleast_2d(spec.reference_pool)
        if pool is None or len(pool) == 0:
            raise ValueError(f"{spec.kind} baseline needs a non-empty reference_pool")
        if spec.kind == "mean":
            return pool.mean(axis=0, keepdims=True)
        gen, _ = as_rng(spec.seed if rng is None else rng)
        return pool[int(gen.integers(len(pool)))][None, :].astype(float)
    if spec.default_sample is None:
        raise ValueError("sig baseline needs default_sample")
    if coalitions is None:
        coalitions = sample_coalitions(pmap.n_players, spec.sample_size,
                                       spec.seed if rng is None else rng)
    return sig_baselines(x, spec.default_sample, pmap, coalitions.masks)


def sig_attribute(net: MicroNet, x, x_default, pmap: PlayerMap, output_index: int = 0,
                  B: int = 200, m: int = DEFAULT_IG_STEPS, rng: RngLike = None,
                  coalitions: Optional[SampledCoalitionSet] = None,
                  batched: bool = True) -> AttributionResult:
    """Average IG over ``B`` coalition baselines.

    ``batched=False`` runs one IG call per baseline, which is only useful for
    timing comparisons; the result is the same up to float summation order.
    The completeness gap reported is the mean absolute per-baseline gap.
    """
    if B < 1 or m < 1:
        raise ValueError("B and m must be >= 1")
    x = np.asarray(x, dtype=float)
    x_default = np.asarray(x_default, dtype=float)
    if coalitions is None:
        gen, seed = as_rng(rng)
        coalitions = sample_coalitions(pmap.n_players, B, gen)
    else:
        seed = coalitions.seed
    base = sig_baselines(x, x_default, pmap, coalitions.masks)
    if batched:
        attrs = ig_many(net, x, base, output_index, m)
    else:
        attrs = np.stack([ig_many(net, x, b[None, :], output_index, m)[0] for b in base])
    per_feature = attrs.mean(axis=0)
    f = _output(net, np.vstack([x[None, :], base]), output_index)
    gaps = np.abs(attrs.sum(axis=1) - (f[0] - f[1:]))
    return AttributionResult(per_feature, pmap.aggregate(per_feature), "sig",
                             float(gaps.mean()), m, len(base), seed, output_index)


def attribute(net: MicroNet, x, spec: BaselineSpec, pmap: PlayerMap, output_index: int = 0,
              rng: RngLike = None,
              coalitions: Optional[SampledCoalitionSet] = None) -> AttributionResult:
    """Dispatch on ``spec.kind``: one IG call for zero/mean/random, SIG otherwise."""
    gen = None if rng is None and spec.seed is None else as_rng(
        spec.seed if rng is None else rng)[0]
    if spec.kind == "sig":
        return sig_attribute(net, x, spec.default_sample, pmap, output_index,
                             spec.sample_size, spec.ig_steps, gen, coalitions)
    base = make_baselines(spec, x, pmap, gen)[0]
    res = integrated_gradients(net, x, base, output_index, spec.ig_steps, pmap, spec.kind)
    return AttributionResult(res.per_feature, res.per_player, spec.kind, res.completeness_gap,
                             spec.ig_steps, 1, spec.seed, output_index)
