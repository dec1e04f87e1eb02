"""GridWorld with time-step players.

Each player is one recorded ``(state, action)`` step of a trajectory. The
utility of a coalition is the best total reward over orderings of *all* its
steps that chain into a valid walk from the start cell; coalitions with no
such ordering (and the empty coalition) are worth 0.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .game import DEFAULT_ENUMERATION_CAP, EnumerationCapError, Coalition, Game
from .sampling import RngLike, as_rng

ACTIONS = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
REWARD_VARIANTS = ("r1", "r2")
DEFAULT_DATASET_CAP = 16


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    start: tuple = (0, 0)
    goal: Optional[tuple] = None
    reward_variant: str = "r1"

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")
        if self.goal is None:
            object.__setattr__(self, "goal", (self.rows - 1, self.cols - 1))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        for cell in (self.start, self.goal):
            if not self.inside(cell):
                raise ValueError(f"cell {cell} is outside the {self.rows}x{self.cols} grid")
        if self.start == self.goal:
            raise ValueError("start and goal must differ")
        if self.reward_variant not in REWARD_VARIANTS:
            raise ValueError(f"unknown reward variant {self.reward_variant!r}")

    @property
    def n_states(self) -> int:
        return self.rows * self.cols

    def inside(self, cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def state_index(self, cell) -> int:
        return cell[0] * self.cols + cell[1]

    def valid_actions(self, cell) -> list[str]:
        return [a for a, (dr, dc) in ACTIONS.items()
                if self.inside((cell[0] + dr, cell[1] + dc))]


@dataclass(frozen=True)
class TimeStepPlayer:
    state: tuple
    action: str

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action {self.action!r}")
        object.__setattr__(self, "state", tuple(self.state))

    def next_state(self) -> tuple:
        dr, dc = ACTIONS[self.action]
        return (self.state[0] + dr, self.state[1] + dc)


@dataclass(frozen=True)
class Trajectory:
    steps: tuple
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.steps)


def _check_step(spec: GridSpec, step: TimeStepPlayer):
    if not spec.inside(step.state) or not spec.inside(step.next_state()):
        raise ValueError(f"step {step} leaves the grid")


def generate_trajectory(spec: GridSpec, length: int, rng: RngLike,
                        max_attempts: int = 100_000) -> Trajectory:
    """Seeded random walk of ``length`` valid steps from ``spec.start`` that
    lands on the goal at least once (rejection sampling over whole walks)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    dist = abs(spec.goal[0] - spec.start[0]) + abs(spec.goal[1] - spec.start[1])
    if length < dist:
        raise ValueError(f"length {length} is shorter than the start-goal distance {dist}")
    gen, seed = as_rng(rng)
    for _ in range(max_attempts):
        cell = spec.start
        steps, hit = [], False
        for _ in range(length):
            acts = spec.valid_actions(cell)
            step = TimeStepPlayer(cell, acts[int(gen.integers(len(acts)))])
            steps.append(step)
            cell = step.next_state()
            hit |= cell == spec.goal
        if hit:
            return Trajectory(tuple(steps), seed)
    raise ValueError("no goal-visiting walk found; the grid/length pair looks infeasible")


def step_reward(variant: str, arrived_before: bool, lands_on_goal: bool) -> float:
    if not arrived_before:
        return 1.0 if lands_on_goal else -1.0
    if variant == "r1":
        return -1.0
    return 1.5 if lands_on_goal else -0.5


def sequence_reward(spec: GridSpec, ordered_steps: Sequence[TimeStepPlayer]) -> float:
    """Total reward of a chained walk that starts at ``spec.start``."""
    cell = spec.start
    arrived = False
    total = 0.0
    for step in ordered_steps:
        if step.state != cell:
            raise ValueError(f"broken chain: step {step} does not start at {cell}")
        _check_step(spec, step)
        cell = step.next_state()
        lands = cell == spec.goal
        total += step_reward(spec.reward_variant, arrived, lands)
        arrived |= lands
    return total


def _chain_table(spec: GridSpec, steps: Sequence[TimeStepPlayer]) -> np.ndarray:
    """Best chain reward for every subset of ``steps`` (indexed by bitmask).

    Layered DP over (subset, end state, goal-reached flag): subsets are
    processed by popcount and each is extended by every step it lacks whose
    state matches the chain's end state.
    """
    for s in steps:
        _check_step(spec, s)
    k = len(steps)
    size = 1 << k
    best = np.full((size, spec.n_states, 2), -np.inf)
    best[0, spec.state_index(spec.start), 0] = 0.0
    src = [spec.state_index(s.state) for s in steps]
    dst = [spec.state_index(s.next_state()) for s in steps]
    lands = [s.next_state() == spec.goal for s in steps]
    pop = np.zeros(size, dtype=np.int64)
    for j in range(k):
        pop[1 << j : 1 << (j + 1)] = pop[: 1 << j] + 1
    masks = np.arange(size, dtype=np.int64)
    layers = [masks[pop == c] for c in range(k + 1)]
    for c in range(k):
        layer = layers[c]
        for j in range(k):
            sel = layer[(layer >> j) & 1 == 0]
            if not len(sel):
                continue
            tgt = sel | (1 << j)
            for flag in (0, 1):
                val = best[sel, src[j], flag]
                val = val + step_reward(spec.reward_variant, bool(flag), lands[j])
                nf = 1 if (flag or lands[j]) else 0
                cur = best[tgt, dst[j], nf]
                best[tgt, dst[j], nf] = np.maximum(cur, val)
    out = best.reshape(size, -1).max(axis=1)
    out[~np.isfinite(out)] = 0.0
    out[0] = 0.0
    return out


def coalition_utility(spec: GridSpec, traj: Trajectory, S: Coalition) -> float:
    if S.n_players != len(traj.steps):
        raise ValueError("coalition size does not match the trajectory")
    members = [traj.steps[i] for i in S.members]
    if not members:
        return 0.0
    return float(_chain_table(spec, members)[-1])


def coalition_utility_bruteforce(spec: GridSpec, traj: Trajectory, S: Coalition) -> float:
    """Reference implementation enumerating all |S|! orderings."""
    members = [traj.steps[i] for i in S.members]
    best = None
    for perm in itertools.permutations(members):
        try:
            r = sequence_reward(spec, perm)
        except ValueError:
            continue
        best = r if best is None else max(best, r)
    return 0.0 if best is None or not members else best


def utility_table(spec: GridSpec, traj: Trajectory,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """``v(S)`` for all ``2**n`` coalitions from one DP over the trajectory."""
    if len(traj) > cap:
        raise EnumerationCapError(
            f"{len(traj)} players exceeds the enumeration cap of {cap}")
    return _chain_table(spec, traj.steps)


def gridworld_game(spec: GridSpec, traj: Trajectory,
                   cap: int = DEFAULT_ENUMERATION_CAP) -> Game:
    return Game.from_table(utility_table(spec, traj, cap))


def coalition_dataset(spec: GridSpec, traj: Trajectory, cap: int = DEFAULT_DATASET_CAP,
                      table: Optional[np.ndarray] = None):
    """All coalitions as 0/1 membership rows ``X`` (row ``m`` is bitmask ``m``)
    with their utilities ``y``."""
    n = len(traj)
    if n > cap:
        raise EnumerationCapError(f"{n} players exceeds the dataset cap of {cap}")
    masks = np.arange(1 << n, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    y = utility_table(spec, traj, max(cap, n)) if table is None else np.asarray(table, float)
    return X, y


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "state_row", "state_col", "action"])
    for t, s in enumerate(traj.steps):
        w.writerow([t, s.state[0], s.state[1], s.action])
    return buf.getvalue()


def read_trajectory_csv(text: str, seed: Optional[int] = None) -> Trajectory:
    rows = list(csv.DictReader(io.StringIO(text)))
    steps = tuple(TimeStepPlayer((int(r["state_row"]), int(r["state_col"])), r["action"])
                  for r in rows)
    return Trajectory(steps, seed)


def dataset_csv(y: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coalition_mask", "utility"])
    for m, v in enumerate(y):
        w.writerow([m, repr(float(v))])
    return buf.getvalue()
