import csv
import json

import pytest

from shapig import experiments as ex
from shapig.cli import main

FAST = dict(repetitions=2, epochs=15, B=20, ig_steps=16, traj_length=8)


def small(**kw):
    return ex.ExperimentConfig(**{**FAST, **kw}).validate()


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_seed_derivation_is_stable_and_distinct():
    a = ex.derive_seed(0, "pool", 0, 1)
    assert a == ex.derive_seed(0, "pool", 0, 1)
    assert len({a, ex.derive_seed(0, "pool", 0, 2), ex.derive_seed(0, "init", 0, 1),
                ex.derive_seed(1, "pool", 0, 1)}) == 4


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[sampling]\nQ = 0.2\nB = 50\n[experiment]\nmethods = zero, sig\n")
    cfg = ex.load_config(path, {"B": "70"})
    assert (cfg.Q, cfg.B, cfg.methods) == (0.2, 70, ("zero", "sig"))
    path.write_text(ex.config_ini(cfg))
    assert ex.load_config(path) == cfg


@pytest.mark.parametrize("text", ["[sampling]\nbogus = 1\n", "[nowhere]\nB = 1\n",
                                  "[gridworld]\nB = 1\n"])
def test_config_rejects_unknown_keys(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(KeyError):
        ex.load_config(path)


@pytest.mark.parametrize("kw", [dict(repetitions=0), dict(Q=0.0), dict(methods=("median",)),
                                dict(traj_length=30), dict(task="chess")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small(**kw)


def test_gridworld_outputs(tmp_path):
    res = ex.run_gridworld(small(), tmp_path)
    names = {p.name for p in tmp_path.iterdir()}
    assert {"config.ini", "metadata.csv", "trajectory.csv", "reference_shapley.csv",
            "comparison.csv", "fidelity.csv"} | {f"spearman_{m}.csv" for m in ex.METHODS} <= names
    for r in res["reports"].values():
        assert -1 <= r.mean <= 1 and r.n == 2
    meta = dict(read(tmp_path / "metadata.csv")[1:])
    for key in ("Q", "B", "ig_steps", "master_seed", "learning_rate", "hidden", "fill",
                "patch_h", "seed_scheme", "fidelity_warnings"):
        assert key in meta


def test_sig_only_comparison_has_one_row(tmp_path):
    ex.run_gridworld(small(methods=("sig",)), tmp_path)
    assert len(read(tmp_path / "comparison.csv")) == 2


def test_rerun_is_byte_identical(tmp_path):
    cfg = small()
    ex.run_gridworld(cfg, tmp_path / "a")
    ex.run_gridworld(cfg, tmp_path / "b")
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_sweep_rows(tmp_path):
    out = ex.run_sweep(small(), "B", [10, 20, 40], tmp_path)
    for m in ex.METHODS:
        rows = read(tmp_path / f"sweep_B_{m}.csv")
        assert rows[0][:3] == ["B", "mean_1_minus_rho", "variance"]
        assert [r[0] for r in rows[1:]] == ["10", "20", "40"]
    assert set(out["spread"]) == set(ex.METHODS)
    ex.run_sweep(small(), "Q", [0.5], tmp_path / "q")
    assert len(read(tmp_path / "q" / "sweep_Q_sig.csv")) == 2
    with pytest.raises(ValueError):
        ex.run_sweep(small(), "B", [], tmp_path)


def test_synthimage_flat_curve_at_zero_length(tmp_path):
    cfg = small(n_images=8, n_train=80, classifier_epochs=5, L_max=0, image_B=4,
                image_ig_steps=4)
    ex.run_synthimage(cfg, tmp_path)
    for m in ex.METHODS:
        for n in cfg.patch_levels:
            rows = read(tmp_path / f"curve_{m}_patch{n}.csv")
            assert rows[1][:2] == ["0", "1.0"] and len(rows) == 2


def test_unbiasedness_tables(tmp_path):
    cfg = small(n_games=2, max_players=4, mc_samples=2000)
    ex.run_unbiasedness(cfg, tmp_path)
    rows = read(tmp_path / "unbiasedness.csv")
    assert rows[0][-2:] == ["stderr", "z"]
    additive = [r for r in rows[1:] if r[1] == "additive"]
    assert additive and all(float(r[6]) == 0.0 for r in additive)
    ex.run_unbiasedness(small(n_games=2, max_players=4, mc_samples=1), tmp_path / "m1")
    rows = read(tmp_path / "m1" / "unbiasedness.csv")
    assert "stderr" not in rows[0] and all(len(r) == len(rows[0]) for r in rows)


def test_bench_schema(tmp_path):
    out = ex.run_bench(small(repetitions=3), tmp_path)
    header = read(tmp_path / "timing_table.csv")[0]
    assert header == ["environment", "reward", "Q", "N", "random", "sig", "zero", "mean",
                      "sig_batched"]
    runs = read(tmp_path / "bench_runs.csv")[1:]
    for m in ("zero", "mean", "random", "sig", "sig_batched"):
        assert sum(r[4] == m for r in runs) == 3
    assert out["stats"]["sig"][0] > 0


def test_cli_success_and_errors(tmp_path, capsys):
    rc = main(["gridworld", "--out", str(tmp_path), "--repetitions", "2", "--epochs", "5",
               "--traj-length", "6", "--B", "5", "--ig-steps", "4", "--methods", "zero,sig"])
    assert rc == 0 and json.loads(capsys.readouterr().out)["status"] == "ok"
    assert (tmp_path / "spearman_sig.csv").exists()
    assert not (tmp_path / "spearman_mean.csv").exists()
    assert main(["gridworld", "--Q", "3"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["type"] == "ValueError"
    assert main(["teleport"]) == 2
    assert "error" in json.loads(capsys.readouterr().err)


def test_parallel_repetitions_match_serial(tmp_path):
    ex.run_gridworld(small(repetitions=3), tmp_path / "serial")
    ex.run_gridworld(small(repetitions=3, workers=2), tmp_path / "pool")
    for name in ("comparison.csv", "fidelity.csv", "spearman_sig.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "pool" / name).read_bytes()
