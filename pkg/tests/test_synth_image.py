import numpy as np
import pytest

from shapig.micronet import MicroNet, TrainConfig, forward, train
from shapig.synth_image import (PatchSpec, SynthImage, dataset_csv, deletion_stack,
                                generate_dataset, patch_player_map, read_dataset_csv,
                                remove_patches, remove_pixels, stack_pixels)


def test_dataset_balance_and_determinism():
    a = generate_dataset(100, 8, 8, 4, 3)
    b = generate_dataset(100, 8, 8, 4, 3)
    counts = np.bincount([im.label for im in a], minlength=4)
    assert len(a) == 100 and np.all(np.abs(counts - 25) <= 2.5)
    assert all(np.array_equal(x.pixels, y.pixels) for x, y in zip(a, b))
    for im in a:
        assert im.blob.sum() == 4 and np.all(im.pixels[im.blob] == 1.0)


def test_two_class_task_is_learnable():
    ims = generate_dataset(200, 8, 8, 2, 0)
    X = stack_pixels(ims)
    y = np.array([im.label for im in ims])
    net = train(MicroNet.init([64, 16, 2], 0, head="classification"), X, y,
                TrainConfig(learning_rate=1e-2, epochs=60, batch_size=32, loss="cross-entropy"))
    assert np.mean(np.argmax(forward(net, X), axis=1) == y) >= 0.95


def test_dataset_errors():
    with pytest.raises(ValueError):
        generate_dataset(10, 2, 2, 4, 0)
    with pytest.raises(ValueError):
        generate_dataset(10, 8, 8, 1, 0)


@pytest.mark.parametrize("ph,pw,players,size", [(2, 2, 16, 4), (8, 8, 1, 64), (1, 1, 64, 1)])
def test_patch_maps(ph, pw, players, size):
    pm = patch_player_map(8, 8, PatchSpec(ph, pw))
    assert pm.n_players == players and all(len(g) == size for g in pm.groups)


def test_patch_map_must_tile():
    with pytest.raises(ValueError):
        patch_player_map(8, 8, PatchSpec(3, 2))


def test_remove_pixels_cases():
    img = np.arange(1.0, 17.0).reshape(4, 4)
    order = np.arange(16)[::-1]
    assert np.array_equal(remove_pixels(img, order, 0, 0.0), img)
    assert np.all(remove_pixels(img, order, 16, 7.0) == 7.0)
    assert (remove_pixels(img, order, 1, 0.0) != img).sum() == 1
    with pytest.raises(ValueError):
        remove_pixels(img, order, 17, 0.0)


def test_remove_patches_corner_and_equivalence():
    img = np.ones((4, 4))
    # n=1 windows span the center and the cell below/right of it
    top_left = remove_patches(img, [0], 1, 1, 0.0)
    assert top_left[:2, :2].sum() == 0 and top_left.sum() == 12
    bottom_right = remove_patches(img, [15], 1, 1, 0.0)
    assert bottom_right[3, 3] == 0 and bottom_right.sum() == 15
    n2 = remove_patches(img, [0], 2, 1, 0.0)
    assert n2[:2, :2].sum() == 0 and n2.sum() == 12
    order = np.random.default_rng(0).permutation(16)
    for k in range(17):
        assert np.array_equal(remove_patches(img, order, 0, k, 0.0),
                              remove_pixels(img, order, k, 0.0))
    assert np.array_equal(remove_patches(img, order, 2, 0, 0.0), img)


def test_deletion_stack_matches_single_removals():
    img = np.random.default_rng(1).random((5, 5))
    order = np.random.default_rng(2).permutation(25)
    for n in (0, 1, 2, 3):
        stack = deletion_stack(img, order, 10, 0.5, n)
        for k in range(11):
            assert np.array_equal(stack[k], remove_patches(img, order, n, k, 0.5))


def test_synth_image_is_preserved():
    im = generate_dataset(1, 8, 8, 4, 0)[0]
    out = remove_pixels(im, np.arange(64), 3, 0.0)
    assert isinstance(out, SynthImage) and out.label == im.label


def test_dataset_csv_round_trip():
    ims = generate_dataset(6, 8, 8, 4, 9)
    back, header = read_dataset_csv(dataset_csv(ims, seed=9))
    assert header["seed"] == "9"
    for a, b in zip(ims, back):
        assert a.label == b.label and np.array_equal(a.pixels, b.pixels)
