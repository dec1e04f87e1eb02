"""Experiment pipelines behind the command line.

Every run writes one directory holding ``config.ini`` (the resolved
configuration), ``metadata.csv`` (every setting plus derived quantities) and
the result CSVs. Outputs are a pure function of the configuration: all
randomness flows from ``master_seed`` through :func:`derive_seed`.

Seed derivation is counter based: the seed for stream ``s`` (a fixed small
integer per purpose, see ``STREAMS``) at counters ``(c1, c2, ...)`` is the
first 32-bit word of ``numpy.random.SeedSequence([master_seed, s, c1, c2, ...])``.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import gridworld as gw
from .game import Game, shapley_from_table, shapley_exact
from .ig import BaselineSpec, PlayerMap, attribute, integrated_gradients, sig_attribute
from .metrics import (UndefinedCorrelationError, aggregate, iaccuracy_curve,
                      plot_data_csv, reports_csv, spearman)
from .micronet import MicroNet, TrainConfig, forward, train
from .sampling import mc_shapley_proportional, pool_size, sample_coalitions_two_stage
from . import synth_image as si

log = logging.getLogger(__name__)

METHODS = ("zero", "mean", "random", "sig")
TASKS = ("gridworld", "sweep", "synthimage", "unbiasedness", "bench")
STREAMS = {"init": 1, "shuffle": 2, "pool": 3, "random_baseline": 4, "data": 5,
           "games": 6, "mc": 7, "sig": 8}
FIDELITY_GATE = 0.95


def derive_seed(master: int, stream: str, *counters: int) -> int:
    seq = np.random.SeedSequence([int(master), STREAMS[stream], *map(int, counters)])
    return int(seq.generate_state(1)[0])


# section name -> fields it may set; sections only organise the file
SECTIONS = {
    "experiment": ("task", "master_seed", "repetitions", "methods", "workers"),
    "gridworld": ("rows", "cols", "reward_variant", "traj_length", "traj_seed", "enum_cap"),
    "sampling": ("Q", "B", "ig_steps"),
    "surrogate": ("hidden", "activation", "learning_rate", "epochs", "batch_size", "optimizer"),
    "sweep": ("axis", "values"),
    "synthimage": ("n_images", "n_train", "height", "width", "n_classes", "patch_h",
                   "patch_w", "fill", "L_max", "patch_levels", "image_B",
                   "image_ig_steps", "classifier_epochs", "classifier_hidden"),
    "unbiasedness": ("n_games", "max_players", "mc_samples"),
}


@dataclass
class ExperimentConfig:
    task: str = "gridworld"
    master_seed: int = 0
    repetitions: int = 10
    methods: tuple = METHODS
    workers: int = 1
    rows: int = 2
    cols: int = 2
    reward_variant: str = "r1"
    traj_length: int = 12
    traj_seed: int = 0
    enum_cap: int = 16
    Q: float = 0.4
    B: int = 200
    ig_steps: int = 256
    hidden: tuple = (64, 32)
    activation: str = "tanh"
    learning_rate: float = 3e-3
    epochs: int = 300
    batch_size: int = 64
    optimizer: str = "adam"
    axis: str = "B"
    values: tuple = ()
    n_images: int = 500
    n_train: int = 1000
    height: int = 8
    width: int = 8
    n_classes: int = 4
    patch_h: int = 2
    patch_w: int = 2
    fill: str = "mean"
    L_max: int = 16
    patch_levels: tuple = (0, 1, 2, 3)
    image_B: int = 64
    image_ig_steps: int = 64
    classifier_epochs: int = 60
    classifier_hidden: tuple = (64, 32)
    n_games: int = 20
    max_players: int = 10
    mc_samples: int = 100_000

    def validate(self) -> "ExperimentConfig":
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")
        if not 0 < self.Q <= 1:
            raise ValueError("Q must lie in (0, 1]")
        if self.B < 1 or self.ig_steps < 1 or self.image_B < 1 or self.image_ig_steps < 1:
            raise ValueError("sample sizes and step counts must be >= 1")
        if self.reward_variant not in gw.REWARD_VARIANTS:
            raise ValueError(f"reward_variant must be one of {gw.REWARD_VARIANTS}")
        if self.axis not in ("Q", "B"):
            raise ValueError("sweep axis must be Q or B")
        if self.fill not in ("mean", "zero"):
            raise ValueError("fill must be mean or zero")
        if self.task in ("gridworld", "sweep", "bench") and self.traj_length > self.enum_cap:
            raise ValueError(f"traj_length {self.traj_length} exceeds enum_cap {self.enum_cap}")
        return self

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw).validate()


def _field_types() -> dict:
    return {f.name: f.default for f in dataclasses.fields(ExperimentConfig)}


def parse_value(name: str, text: str):
    defaults = _field_types()
    if name not in defaults:
        raise KeyError(f"unknown configuration key {name!r}")
    proto = defaults[name]
    text = text.strip()
    if isinstance(proto, tuple):
        items = [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]
        if name in ("methods",):
            return tuple(items)
        if name == "values":
            return tuple(float(t) for t in items)
        return tuple(int(t) for t in items)
    if isinstance(proto, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(proto, int):
        return int(text)
    if isinstance(proto, float):
        return float(text)
    return text


def load_config(path=None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read an INI-style ``key = value`` file (sections as in ``SECTIONS``)
    and apply ``overrides`` (already-typed values or strings) on top."""
    cfg = ExperimentConfig()
    values = {}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        with open(path) as fh:
            cp.read_file(fh)
        for section in cp.sections():
            if section not in SECTIONS:
                raise KeyError(f"unknown config section [{section}]")
            for key, raw in cp.items(section):
                if key not in SECTIONS[section]:
                    raise KeyError(f"key {key!r} does not belong in section [{section}]")
                values[key] = parse_value(key, raw)
    for key, val in (overrides or {}).items():
        values[key] = parse_value(key, val) if isinstance(val, str) else val
    return dataclasses.replace(cfg, **values).validate()


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_ini(cfg: ExperimentConfig) -> str:
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {_fmt(getattr(cfg, k))}" for k in keys)
        lines.append("")
    return "\n".join(lines)


class RunWriter:
    """Collects files and metadata for one run directory."""

    def __init__(self, out_dir, cfg: ExperimentConfig):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.meta: list[tuple[str, str]] = [(k, _fmt(getattr(cfg, k)))
                                            for k in _field_types()]
        self.write("config.ini", config_ini(cfg))

    def note(self, key: str, value):
        self.meta.append((key, _fmt(value)))

    def write(self, name: str, text: str):
        (self.out / name).write_text(text)

    def rows(self, name: str, header: Sequence[str], rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        self.write(name, buf.getvalue())

    def close(self):
        self.rows("metadata.csv", ["key", "value"], self.meta)


# --------------------------------------------------------------------- gridworld


@dataclass
class GridContext:
    spec: gw.GridSpec
    traj: gw.Trajectory
    table: np.ndarray
    reference: np.ndarray
    X: np.ndarray


def grid_context(cfg: ExperimentConfig) -> GridContext:
    spec = gw.GridSpec(cfg.rows, cfg.cols, reward_variant=cfg.reward_variant)
    traj = gw.generate_trajectory(spec, cfg.traj_length, cfg.traj_seed)
    X, y = gw.coalition_dataset(spec, traj, cap=cfg.enum_cap)
    return GridContext(spec, traj, y, shapley_from_table(y), X)


def train_surrogate(cfg: ExperimentConfig, ctx: GridContext, init_seed: int,
                    shuffle_seed: int) -> MicroNet:
    n = len(ctx.traj)
    net = MicroNet.init([n, *cfg.hidden, 1], init_seed, cfg.activation)
    tc = TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size, shuffle_seed,
                     "squared-error", cfg.optimizer)
    return train(net, ctx.X, ctx.table, tc)


def _safe_spearman(a, b) -> tuple[float, bool]:
    try:
        return spearman(a, b), True
    except UndefinedCorrelationError:
        return 0.0, False


def gridworld_repetition(cfg: ExperimentConfig, ctx: GridContext, rep: int,
                         point: int = 0) -> dict:
    """One independent repetition: fresh surrogate, fresh coalition pool."""
    n = len(ctx.traj)
    seeds = {s: derive_seed(cfg.master_seed, s, point, rep)
             for s in ("init", "shuffle", "pool", "random_baseline")}
    net = train_surrogate(cfg, ctx, seeds["init"], seeds["shuffle"])
    pred = forward(net, ctx.X)[:, 0]
    fidelity, _ = _safe_spearman(shapley_from_table(pred), ctx.reference)
    coalitions = sample_coalitions_two_stage(n, cfg.Q, cfg.B, seeds["pool"])
    pool = ctx.X[coalitions.pool_masks]
    x, x_default = np.ones(n), np.zeros(n)
    pmap = PlayerMap.identity(n)
    out = {"seeds": seeds, "fidelity": fidelity,
           "train_mse": float(np.mean((pred - ctx.table) ** 2)), "spearman": {},
           "defined": {}}
    for method in cfg.methods:
        spec = BaselineSpec(method, default_sample=x_default, reference_pool=pool,
                            sample_size=cfg.B, ig_steps=cfg.ig_steps,
                            seed=seeds["random_baseline"] if method == "random" else seeds["pool"])
        res = attribute(net, x, spec, pmap, 0, coalitions=coalitions if method == "sig" else None)
        rho, ok = _safe_spearman(res.per_player, ctx.reference)
        out["spearman"][method] = rho
        out["defined"][method] = ok
    return out


def _run_reps(cfg: ExperimentConfig, ctx: GridContext, point: int) -> list[dict]:
    args = [(cfg, ctx, r, point) for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            return list(ex.map(gridworld_repetition, *zip(*args)))
    return [gridworld_repetition(*a) for a in args]


def gridworld_point(cfg: ExperimentConfig, ctx: GridContext, point: int = 0):
    reps = _run_reps(cfg, ctx, point)
    reports = {}
    for m in cfg.methods:
        reports[m] = aggregate([r["spearman"][m] for r in reps], name=m,
                               seeds=[r["seeds"]["pool"] for r in reps],
                               require_variance=cfg.repetitions > 1)
    return reps, reports


def _write_grid_context(w: RunWriter, ctx: GridContext, cfg: ExperimentConfig):
    w.write("trajectory.csv", gw.trajectory_csv(ctx.traj))
    w.rows("reference_shapley.csv", ["player", "shapley"],
           [(i, float(v)) for i, v in enumerate(ctx.reference)])
    w.note("n_players", len(ctx.traj))
    w.note("pool_size", pool_size(len(ctx.traj), cfg.Q))
    w.note("grid_start", ctx.spec.start)
    w.note("grid_goal", ctx.spec.goal)
    w.note("assumption_invalid_orderings", "excluded; chainless coalitions score 0")
    w.note("assumption_mean_random_pool", "stage-1 coalition pool")
    w.note("assumption_undefined_spearman", "constant attribution scored as 0")
    w.note("seed_scheme", "SeedSequence([master_seed, stream, point, repetition])")


def run_gridworld(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Spearman agreement of each baseline method with exact Shapley values."""
    ctx = grid_context(cfg)
    reps, reports = gridworld_point(cfg, ctx)
    if out_dir is not None:
        w = RunWriter(out_dir, cfg)
        _write_grid_context(w, ctx, cfg)
        for m in cfg.methods:
            w.rows(f"spearman_{m}.csv", ["repetition", "seed", "spearman", "defined"],
                   [(i, r["seeds"]["pool"], r["spearman"][m], r["defined"][m])
                    for i, r in enumerate(reps)])
        w.write("comparison.csv", reports_csv([reports[m] for m in cfg.methods]))
        w.rows("fidelity.csv", ["repetition", "init_seed", "fidelity_spearman", "train_mse"],
               [(i, r["seeds"]["init"], r["fidelity"], r["train_mse"])
                for i, r in enumerate(reps)])
        low = [i for i, r in enumerate(reps) if r["fidelity"] < FIDELITY_GATE]
        if low:
            log.warning("surrogate fidelity below %.2f in repetitions %s", FIDELITY_GATE, low)
        w.note("fidelity_gate", FIDELITY_GATE)
        w.note("fidelity_warnings", ";".join(map(str, low)) or "none")
        w.close()
    return {"reports": reports, "repetitions": reps, "reference": ctx.reference,
            "trajectory": ctx.traj}


def run_sweep(cfg: ExperimentConfig, axis: Optional[str] = None,
              values: Optional[Sequence] = None, out_dir=None) -> dict:
    """Repeat the GridWorld comparison along one hyperparameter axis, the other
    held fixed; every axis value is an independent experiment (own seeds)."""
    axis = axis or cfg.axis
    values = tuple(values if values is not None else cfg.values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis not in ("Q", "B"):
        raise ValueError("sweep axis must be Q or B")
    ctx = grid_context(cfg)
    per_method = {m: [] for m in cfg.methods}
    for p, val in enumerate(values):
        point_cfg = cfg.replace(**{axis: float(val) if axis == "Q" else int(val)})
        reps, _ = gridworld_point(point_cfg, ctx, point=p)
        for m in cfg.methods:
            per_method[m].append(aggregate([1.0 - r["spearman"][m] for r in reps],
                                           name=f"{m}@{axis}={val}",
                                           require_variance=cfg.repetitions > 1))
    spread = {m: max(r.mean for r in rs) - min(r.mean for r in rs)
              for m, rs in per_method.items()}
    if out_dir is not None:
        w = RunWriter(out_dir, cfg)
        _write_grid_context(w, ctx, cfg)
        w.note("sweep_axis", axis)
        w.note("sweep_values", values)
        for m, rs in per_method.items():
            xs = [int(v) if axis == "B" else float(v) for v in values]
            w.rows(f"sweep_{axis}_{m}.csv",
                   [axis, "mean_1_minus_rho", "variance", "ci_low", "ci_high"],
                   [(x, r.mean, r.variance, *r.ci()) for x, r in zip(xs, rs)])
        w.rows(f"sweep_{axis}_spread.csv", ["method", "spread_mean_1_minus_rho"],
               [(m, spread[m]) for m in cfg.methods])
        w.close()
    return {"axis": axis, "values": values, "reports": per_method, "spread": spread}


# ------------------------------------------------------------------- synthimage


def blob_mass(per_player: np.ndarray, pmap: PlayerMap, blob: np.ndarray) -> tuple[float, float]:
    """Attribution summed over players touching the blob, and over the rest."""
    hit = np.zeros(pmap.n_players, dtype=bool)
    np.logical_or.at(hit, pmap.owner, blob.ravel())
    return float(per_player[hit].sum()), float(per_player[~hit].sum())


def run_synthimage(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Deletion curves (iAccuracy vs removed pixels) per method and patch level."""
    H, W = cfg.height, cfg.width
    train_set = si.generate_dataset(cfg.n_train, H, W, cfg.n_classes,
                                    derive_seed(cfg.master_seed, "data", 0))
    eval_set = si.generate_dataset(cfg.n_images, H, W, cfg.n_classes,
                                   derive_seed(cfg.master_seed, "data", 1))
    Xtr = si.stack_pixels(train_set)
    ytr = np.array([im.label for im in train_set])
    net = MicroNet.init([H * W, *cfg.classifier_hidden, cfg.n_classes],
                        derive_seed(cfg.master_seed, "init", 0), cfg.activation, "classification")
    net = train(net, Xtr, ytr, TrainConfig(cfg.learning_rate, cfg.classifier_epochs,
                                           cfg.batch_size,
                                           derive_seed(cfg.master_seed, "shuffle", 0),
                                           "cross-entropy", cfg.optimizer))
    train_acc = float(np.mean(np.argmax(forward(net, Xtr), axis=1) == ytr))
    fill = si.fill_values(train_set, cfg.fill)
    x_default = Xtr.mean(axis=0)
    pmap = si.patch_player_map(H, W, si.PatchSpec(cfg.patch_h, cfg.patch_w))
    L = min(cfg.L_max, H * W)
    curves = {(m, n): [] for m in cfg.methods for n in cfg.patch_levels}
    align = {m: [] for m in cfg.methods}
    orders = {m: [] for m in cfg.methods}
    correct = 0
    for idx, im in enumerate(eval_set):
        x = im.flat()
        probs = forward(net, x)
        c = int(np.argmax(probs))
        is_correct = c == im.label
        correct += is_correct
        for m in cfg.methods:
            seed = derive_seed(cfg.master_seed, "sig" if m == "sig" else "random_baseline", idx)
            spec = BaselineSpec(m, default_sample=x_default, reference_pool=Xtr,
                                sample_size=cfg.image_B, ig_steps=cfg.image_ig_steps, seed=seed)
            res = attribute(net, x, spec, pmap, c)
            order = np.argsort(-res.per_feature, kind="stable")
            orders[m].append(order)
            for n in cfg.patch_levels:
                curves[(m, n)].append(iaccuracy_curve(net, im, order, L, fill, n))
            if is_correct:
                inside, outside = blob_mass(res.per_player, pmap, im.blob)
                align[m].append(inside > outside)
    curve_reports = {}
    for (m, n), cs in curves.items():
        arr = np.array(cs)
        curve_reports[(m, n)] = [aggregate(arr[:, l], name=f"{m}/patch{n}/L={l}",
                                           require_variance=len(arr) > 1)
                                 for l in range(L + 1)]
    alignment = {m: (float(np.mean(v)) if v else float("nan")) for m, v in align.items()}
    if out_dir is not None:
        w = RunWriter(out_dir, cfg)
        w.note("train_accuracy", train_acc)
        w.note("eval_accuracy", correct / len(eval_set))
        w.note("n_players", pmap.n_players)
        w.note("sig_default_sample", "training-set mean image")
        w.note("mean_baseline", "training-set mean image")
        w.note("random_baseline", "uniform draw from the training images")
        w.note("window_convention", "start = center - n//2, size n+1, clipped")
        for (m, n), reps in curve_reports.items():
            w.write(f"curve_{m}_patch{n}.csv", plot_data_csv(range(L + 1), reps, "L"))
        w.rows("alignment.csv", ["method", "n_correct", "fraction_inside_exceeds_outside"],
               [(m, len(align[m]), alignment[m]) for m in cfg.methods])
        w.close()
    return {"curves": curve_reports, "alignment": alignment, "train_accuracy": train_acc,
            "eval_accuracy": correct / len(eval_set), "raw_curves": curves,
            "orders": orders, "net": net, "fill": fill, "images": eval_set}


# ----------------------------------------------------------------- unbiasedness


def unbiasedness_games(cfg: ExperimentConfig) -> list[tuple[str, Game]]:
    """Seeded random games (standard normal utilities, v(empty) = 0) with
    2..max_players players, plus one additive and one unanimity game."""
    games = []
    for g in range(cfg.n_games):
        rng = np.random.default_rng(derive_seed(cfg.master_seed, "games", g))
        n = 2 + g % (cfg.max_players - 1)
        table = rng.normal(size=1 << n)
        table[0] = 0.0
        games.append(("random", Game.from_table(table)))
    n = min(cfg.max_players, 3)
    masks = np.arange(1 << n)
    games.append(("additive", Game.from_table(
        [bin(int(m)).count("1") for m in masks])))
    games.append(("unanimity", Game.from_table(((masks & 3) == 3).astype(float))))
    return games


def run_unbiasedness(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Monte-Carlo proportional estimates against exact Shapley values."""
    M = cfg.mc_samples
    rows, summary = [], []
    for g, (kind, game) in enumerate(unbiasedness_games(cfg)):
        exact = shapley_exact(game)
        zs = []
        for i in range(game.n_players):
            est, se = mc_shapley_proportional(game, i, M, derive_seed(cfg.master_seed, "mc", g, i),
                                              return_stderr=True)
            bias = est - exact[i]
            z = bias / se if se > 0 else (0.0 if bias == 0 else math.inf)
            zs.append(z)
            rows.append((g, kind, game.n_players, i, exact[i], est, bias, se, z))
        max_z = max(abs(z) for z in zs) if M > 1 else float("nan")
        summary.append((g, kind, game.n_players, max_z, bool(max_z <= 4) if M > 1 else ""))
    if out_dir is not None:
        w = RunWriter(out_dir, cfg)
        if M > 1:
            w.rows("unbiasedness.csv", ["game", "kind", "n", "player", "exact", "estimate",
                                        "bias", "stderr", "z"], rows)
        else:
            w.rows("unbiasedness.csv", ["game", "kind", "n", "player", "exact", "estimate",
                                        "bias"], [r[:7] for r in rows])
        w.rows("unbiasedness_summary.csv", ["game", "kind", "n", "max_abs_z", "within_4se"],
               summary)
        w.close()
    return {"rows": rows, "summary": summary}


# ------------------------------------------------------------------------ bench


def run_bench(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Wall-clock time of each attribution method on a trained GridWorld
    surrogate. SIG is timed twice: one IG call per baseline (serial) and all
    baselines in one batched call."""
    ctx = grid_context(cfg)
    n = len(ctx.traj)
    net = train_surrogate(cfg, ctx, derive_seed(cfg.master_seed, "init", 0, 0),
                          derive_seed(cfg.master_seed, "shuffle", 0, 0))
    x, x_default = np.ones(n), np.zeros(n)
    coalitions = sample_coalitions_two_stage(n, cfg.Q, cfg.B,
                                             derive_seed(cfg.master_seed, "pool", 0, 0))
    pool = ctx.X[coalitions.pool_masks]
    pmap = PlayerMap.identity(n)
    seed = derive_seed(cfg.master_seed, "random_baseline", 0, 0)
    jobs = {
        "zero": lambda: integrated_gradients(net, x, np.zeros(n), 0, cfg.ig_steps),
        "mean": lambda: integrated_gradients(net, x, pool.mean(axis=0), 0, cfg.ig_steps),
        "random": lambda: integrated_gradients(
            net, x, pool[np.random.default_rng(seed).integers(len(pool))], 0, cfg.ig_steps),
        "sig": lambda: sig_attribute(net, x, x_default, pmap, 0, cfg.B, cfg.ig_steps,
                                     coalitions=coalitions, batched=False),
        "sig_batched": lambda: sig_attribute(net, x, x_default, pmap, 0, cfg.B, cfg.ig_steps,
                                             coalitions=coalitions, batched=True),
    }
    runs = []
    for rep in range(cfg.repetitions):
        for name, job in jobs.items():
            t0 = time.perf_counter()
            job()
            runs.append((name, rep, time.perf_counter() - t0))
    env = f"{cfg.rows}x{cfg.cols}"
    stats = {name: (float(np.mean([t for m, _, t in runs if m == name])),
                    float(np.min([t for m, _, t in runs if m == name]))) for name in jobs}
    if out_dir is not None:
        w = RunWriter(out_dir, cfg)
        w.rows("bench_runs.csv", ["environment", "reward", "Q", "N", "method", "repetition",
                                  "seconds"],
               [(env, cfg.reward_variant, cfg.Q, cfg.B, m, r, t) for m, r, t in runs])
        w.rows("timing_table.csv", ["environment", "reward", "Q", "N", "random", "sig", "zero",
                              "mean", "sig_batched"],
               [(env, cfg.reward_variant, cfg.Q, cfg.B, *(stats[k][0] for k in
                 ("random", "sig", "zero", "mean", "sig_batched")))])
        w.rows("bench_summary.csv", ["method", "mean_seconds", "min_seconds"],
               [(k, *v) for k, v in stats.items()])
        w.close()
    return {"runs": runs, "stats": stats}
