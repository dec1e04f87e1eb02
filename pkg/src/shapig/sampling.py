"""Coalition sampling: the size-weighted acceptance loop used to build SIG
baselines, a two-stage pooled variant for game data, and a Monte-Carlo
Shapley estimator that draws coalitions with probability equal to their
Shapley weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .game import Coalition, Game, coalition_weight, mask_popcount

RngLike = Union[int, np.random.Generator, None]


def as_rng(rng: RngLike) -> tuple[np.random.Generator, Optional[int]]:
    """Return ``(generator, seed)``; the seed is only known for int inputs."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise ValueError("an explicit seed or numpy Generator is required")
    return np.random.default_rng(int(rng)), int(rng)


@dataclass(frozen=True)
class SizeDistribution:
    """Normalized per-size weights; entry ``k`` is the probability mass ŵ(k)."""

    normalized_weights: np.ndarray

    @property
    def n_players(self) -> int:
        return len(self.normalized_weights)


@dataclass(frozen=True)
class SampledCoalitionSet:
    masks: np.ndarray
    n_players: int
    seed: Optional[int]
    target_size: int
    pool_masks: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def coalitions(self) -> list[Coalition]:
        return [Coalition(int(m), self.n_players) for m in self.masks]

    @property
    def sizes(self) -> np.ndarray:
        return mask_popcount(self.masks, self.n_players)


def build_size_distribution(n: int) -> SizeDistribution:
    if n < 1:
        raise ValueError("n must be >= 1")
    raw = np.array([coalition_weight(k, n) for k in range(n)])
    w = raw / raw.sum()
    w.setflags(write=False)
    return SizeDistribution(w)


def _random_subsets(sizes: np.ndarray, n: int, rng: np.random.Generator,
                    exclude: Optional[int] = None) -> np.ndarray:
    """Bitmasks of uniformly random subsets with the given sizes."""
    sizes = np.asarray(sizes, dtype=np.int64)
    if len(sizes) == 0 or n == 0:
        return np.zeros(len(sizes), dtype=np.int64)
    keys = rng.random((len(sizes), n))
    if exclude is not None:
        keys[:, exclude] = np.inf
    ranks = np.argsort(np.argsort(keys, axis=1, kind="stable"), axis=1, kind="stable")
    member = ranks < sizes[:, None]
    return member.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))


def _accepted_sizes(w: np.ndarray, B: int, rng: np.random.Generator,
                    allowed: Optional[np.ndarray] = None) -> np.ndarray:
    """Run acceptance sweeps (one uniform per size, accept k if r < ŵ(k))
    until at least ``B`` sizes are accepted, then truncate to ``B``."""
    n = len(w)
    out: list[np.ndarray] = []
    total = 0
    chunk = max(16, B)
    while total < B:
        r = rng.random((chunk, n))
        hit = r < w
        if allowed is not None:
            hit &= allowed
        sizes = np.nonzero(hit)[1]  # row-major: sweep order, then k order
        out.append(sizes)
        total += len(sizes)
    return np.concatenate(out)[:B]


def sample_coalitions(n: int, B: int, rng: RngLike) -> SampledCoalitionSet:
    """Draw ``B`` coalitions of ``n`` players with the size-weighted acceptance
    loop: each sweep visits sizes 0..n-1, accepts size k with probability ŵ(k)
    and fills it with k distinct uniformly chosen players. Duplicates are kept.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    gen, seed = as_rng(rng)
    w = build_size_distribution(n).normalized_weights
    sizes = _accepted_sizes(w, B, gen)
    masks = _random_subsets(sizes, n, gen)
    return SampledCoalitionSet(masks, n, seed, B)


def pool_size(n: int, Q: float) -> int:
    # rounding guards against Q * 2**n landing a hair above an integer
    return max(1, math.ceil(round(Q * (1 << n), 9)))


def sample_coalitions_two_stage(n: int, Q: float, B: int, rng: RngLike) -> SampledCoalitionSet:
    """Stage 1: a uniform pool of ``ceil(Q * 2**n)`` distinct coalitions.
    Stage 2: ``B`` draws from the pool, with replacement, each coalition
    picked with probability proportional to its Shapley weight ``w(|S|)``.

    The grand coalition has no weight; it is drawn only when the pool holds
    nothing else.
    """
    if not 0 < Q <= 1:
        raise ValueError(f"Q must lie in (0, 1], got {Q}")
    if B < 1:
        raise ValueError("B must be >= 1")
    gen, seed = as_rng(rng)
    pool = np.sort(gen.choice(1 << n, size=pool_size(n, Q), replace=False)).astype(np.int64)
    size_w = np.array([coalition_weight(k, n) for k in range(n)] + [0.0])
    w = size_w[mask_popcount(pool, n)]
    if w.sum() == 0:
        w = np.ones(len(pool))
    masks = pool[gen.choice(len(pool), size=B, p=w / w.sum())]
    return SampledCoalitionSet(masks, n, seed, B, pool)


def mc_shapley_proportional(game: Game, i: int, M: int, rng: RngLike,
                            return_stderr: bool = False):
    """Monte-Carlo Shapley estimate for player ``i``.

    Coalitions ``S`` not containing ``i`` are drawn with probability equal to
    their Shapley weight ``w(|S|)`` (a uniform size in 0..n-1, then uniform
    members among the other players), and marginal contributions are averaged
    with unit weights. With ``return_stderr`` the standard error of the mean is
    also returned (``nan`` when ``M == 1``).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    n = game.n_players
    if not 0 <= i < n:
        raise ValueError(f"player {i} out of range({n})")
    gen, _ = as_rng(rng)
    sizes = gen.integers(0, n, size=M)
    masks = _random_subsets(sizes, n, gen, exclude=i)
    uniq, inverse = np.unique(masks, return_inverse=True)
    gains = game.values(uniq | (1 << i)) - game.values(uniq)
    samples = gains[inverse]
    est = float(samples.mean())
    if not return_stderr:
        return est
    se = float(samples.std(ddof=1) / math.sqrt(M)) if M > 1 else float("nan")
    return est, se
