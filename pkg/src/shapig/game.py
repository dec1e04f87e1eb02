"""Cooperative games, coalitions and the exact Shapley value.

Coalitions are stored as membership bitmasks (bit ``i`` set means player ``i``
is in the coalition), which doubles as the memoization key for utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 20


class EnumerationCapError(ValueError):
    """Raised when an exhaustive 2^n computation exceeds the configured cap."""


@dataclass(frozen=True)
class Coalition:
    """A subset of ``range(n_players)`` encoded as a bitmask."""

    mask: int
    n_players: int

    def __post_init__(self):
        if self.n_players < 0:
            raise ValueError("n_players must be non-negative")
        if self.mask < 0 or self.mask >> self.n_players:
            raise ValueError(
                f"mask {self.mask:#b} has members outside range({self.n_players})"
            )

    @classmethod
    def from_members(cls, members: Iterable[int], n_players: int) -> "Coalition":
        mask = 0
        for i in members:
            i = int(i)
            if not 0 <= i < n_players:
                raise ValueError(f"player {i} out of range({n_players})")
            if mask >> i & 1:
                raise ValueError(f"duplicate player {i}")
            mask |= 1 << i
        return cls(mask, n_players)

    @classmethod
    def empty(cls, n_players: int) -> "Coalition":
        return cls(0, n_players)

    @classmethod
    def grand(cls, n_players: int) -> "Coalition":
        return cls((1 << n_players) - 1, n_players)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_players) if self.mask >> i & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.n_players and bool(self.mask >> i & 1)

    def with_player(self, i: int) -> "Coalition":
        return Coalition(self.mask | (1 << i), self.n_players)

    def to_vector(self) -> np.ndarray:
        """0/1 membership vector (the one-hot coalition encoding)."""
        return ((self.mask >> np.arange(self.n_players)) & 1).astype(float)


@dataclass(frozen=True)
class Game:
    """A transferable-utility game.

    ``utility`` maps a :class:`Coalition` to a real number. ``batch_utility``
    optionally maps an integer array of bitmasks to an array of values and is
    used instead of ``utility`` when many coalitions are evaluated at once.
    """

    n_players: int
    utility: Callable[[Coalition], float]
    batch_utility: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.n_players < 1:
            raise ValueError("a game needs at least one player")

    @classmethod
    def from_table(cls, table: Sequence[float]) -> "Game":
        """Game whose utility is looked up in a table indexed by bitmask."""
        values = np.asarray(table, dtype=float).copy()
        n = int(round(math.log2(len(values)))) if len(values) else 0
        if len(values) != 1 << n or n < 1:
            raise ValueError("table length must be 2**n_players with n_players >= 1")
        values.setflags(write=False)
        return cls(
            n,
            lambda S: float(values[S.mask]),
            lambda masks: values[np.asarray(masks, dtype=np.int64)],
        )

    def value(self, S: Coalition) -> float:
        self._check(S)
        return float(self.utility(S))

    def values(self, masks: np.ndarray) -> np.ndarray:
        """Utilities of many coalitions given as bitmasks."""
        masks = np.asarray(masks, dtype=np.int64)
        if self.batch_utility is not None:
            return np.asarray(self.batch_utility(masks), dtype=float)
        return np.array(
            [self.utility(Coalition(int(m), self.n_players)) for m in masks], dtype=float
        )

    def _check(self, S: Coalition):
        if S.n_players != self.n_players:
            raise ValueError(
                f"coalition is over {S.n_players} players, game has {self.n_players}"
            )


def coalition_weight(k: int, n: int, exact: bool = False):
    """Shapley weight ``k!(n-k-1)!/n!`` of one coalition of size ``k``.

    Evaluated as ``1 / (n * C(n-1, k))`` so no factorial is ever formed.
    With ``exact=True`` a :class:`~fractions.Fraction` is returned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= k <= n - 1:
        raise ValueError(f"coalition size k={k} outside [0, {n - 1}]")
    denom = n * math.comb(n - 1, k)
    return Fraction(1, denom) if exact else 1.0 / denom


def marginal_contribution(game: Game, S: Coalition, i: int) -> float:
    """``v(S + {i}) - v(S)``."""
    if not 0 <= i < game.n_players:
        raise ValueError(f"player {i} out of range({game.n_players})")
    if i in S:
        raise ValueError(f"player {i} already belongs to the coalition")
    return game.value(S.with_player(i)) - game.value(S)


def popcounts(n: int) -> np.ndarray:
    """Popcount of every bitmask in ``range(2**n)``."""
    pop = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pop[1 << i : 1 << (i + 1)] = pop[: 1 << i] + 1
    return pop


def mask_popcount(masks: np.ndarray, n: int) -> np.ndarray:
    """Popcount of arbitrary bitmasks over ``n`` bits."""
    masks = np.asarray(masks, dtype=np.int64)
    return sum(((masks >> j) & 1) for j in range(n)) if n else np.zeros_like(masks)


def _check_cap(n: int, cap: int):
    if n > cap:
        raise EnumerationCapError(
            f"{n} players means 2**{n} coalitions, above the enumeration cap of {cap}; "
            "raise the cap explicitly if this is intended"
        )


def utility_table(game: Game, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Evaluate every coalition exactly once; entry ``m`` is ``v(mask m)``."""
    _check_cap(game.n_players, cap)
    return game.values(np.arange(1 << game.n_players, dtype=np.int64))


def shapley_from_table(table: np.ndarray) -> np.ndarray:
    """Exact Shapley values from a full utility table indexed by bitmask.

    Marginal gains are first summed per coalition size and only then
    weighted, so interchangeable players get bitwise-equal values whenever
    those per-size sums are exact (e.g. utilities on a coarse grid).
    """
    table = np.asarray(table, dtype=float)
    n = int(round(math.log2(len(table))))
    pop = popcounts(n)
    weights = np.array([coalition_weight(k, n) for k in range(n)])
    masks = np.arange(1 << n, dtype=np.int64)
    phi = np.empty(n)
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        gains = table[without | bit] - table[without]
        per_size = np.bincount(pop[without], weights=gains, minlength=n)[:n]
        phi[i] = sum(float(w) * float(g) for w, g in zip(weights, per_size))
    return phi


def shapley_exact(
    game: Game, cap: int = DEFAULT_ENUMERATION_CAP, exact: bool = False
) -> np.ndarray:
    """Exact Shapley value of every player by full coalition enumeration.

    Each of the ``2**n`` utilities is evaluated once. ``exact=True`` accumulates
    in rationals (utilities are converted with :class:`Fraction`) and returns an
    object array of Fractions; this is only practical for small games.
    """
    table = utility_table(game, cap)
    if not exact:
        return shapley_from_table(table)
    n = game.n_players
    vals = [Fraction(float(v)) for v in table]
    w = [coalition_weight(k, n, exact=True) for k in range(n)]
    phi = []
    for i in range(n):
        bit = 1 << i
        total = Fraction(0)
        for m in range(1 << n):
            if not m & bit:
                total += w[bin(m).count("1")] * (vals[m | bit] - vals[m])
        phi.append(total)
    return np.array(phi, dtype=object)
