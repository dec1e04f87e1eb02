"""Procedural blob images, patch players and pixel/patch deletion.

Each class owns one rectangular region of the image; an image of class ``c``
is low-amplitude noise plus a bright square blob placed at a random position
inside region ``c``. The blob pixels are the ground-truth evidence.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .ig import PlayerMap
from .sampling import RngLike, as_rng


@dataclass(frozen=True, eq=False)
class SynthImage:
    pixels: np.ndarray
    label: int
    blob: Optional[np.ndarray] = None  # boolean mask of the generating blob

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def flat(self) -> np.ndarray:
        return self.pixels.ravel()


@dataclass(frozen=True)
class PatchSpec:
    patch_h: int
    patch_w: int

    def __post_init__(self):
        if self.patch_h < 1 or self.patch_w < 1:
            raise ValueError("patch dimensions must be positive")


def class_regions(H: int, W: int, n_classes: int) -> list[tuple[slice, slice]]:
    """Split the image into an ``r x c`` grid of regions, ``r * c = n_classes``
    with ``r`` the largest divisor not above ``sqrt(n_classes)``."""
    r = int(math.isqrt(n_classes))
    while n_classes % r:
        r -= 1
    c = n_classes // r
    rh, cw = H // r, W // c
    return [(slice(i * rh, (i + 1) * rh), slice(j * cw, (j + 1) * cw))
            for i in range(r) for j in range(c)]


def generate_dataset(n_images: int, H: int, W: int, n_classes: int, rng: RngLike,
                     blob_size: int = 2, noise: float = 0.2,
                     intensity: float = 1.0) -> list[SynthImage]:
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if n_images < 1 or H < 1 or W < 1 or blob_size < 1:
        raise ValueError("degenerate dataset dimensions")
    regions = class_regions(H, W, n_classes)
    rh = regions[0][0].stop - regions[0][0].start
    cw = regions[0][1].stop - regions[0][1].start
    if rh < blob_size or cw < blob_size:
        raise ValueError(f"{H}x{W} is too small for {n_classes} regions of a {blob_size}px blob")
    gen, _ = as_rng(rng)
    labels = np.arange(n_images) % n_classes
    gen.shuffle(labels)
    out = []
    for label in labels:
        rs, cs = regions[label]
        r0 = rs.start + int(gen.integers(rh - blob_size + 1))
        c0 = cs.start + int(gen.integers(cw - blob_size + 1))
        pix = gen.uniform(0.0, noise, size=(H, W))
        blob = np.zeros((H, W), dtype=bool)
        blob[r0 : r0 + blob_size, c0 : c0 + blob_size] = True
        pix[blob] = intensity
        out.append(SynthImage(pix, int(label), blob))
    return out


def stack_pixels(images: Sequence[SynthImage]) -> np.ndarray:
    return np.stack([im.flat() for im in images])


def patch_player_map(H: int, W: int, spec: PatchSpec) -> PlayerMap:
    """One player per ``patch_h x patch_w`` block, blocks in row-major order."""
    if H % spec.patch_h or W % spec.patch_w:
        raise ValueError(f"patch {spec.patch_h}x{spec.patch_w} does not tile {H}x{W}")
    idx = np.arange(H * W).reshape(H, W)
    groups = []
    for r in range(0, H, spec.patch_h):
        for c in range(0, W, spec.patch_w):
            groups.append(tuple(idx[r : r + spec.patch_h, c : c + spec.patch_w].ravel()))
    return PlayerMap(tuple(groups))


def fill_values(images: Sequence[SynthImage], kind: str = "mean") -> np.ndarray:
    """Per-pixel replacement values for deletion: dataset mean or zeros."""
    shape = images[0].shape
    if kind == "mean":
        return np.mean([im.pixels for im in images], axis=0)
    if kind == "zero":
        return np.zeros(shape)
    raise ValueError(f"unknown fill {kind!r}")


Fill = Union[float, np.ndarray]


def _pixels(image) -> np.ndarray:
    return image.pixels if isinstance(image, SynthImage) else np.asarray(image, dtype=float)


def _rebuild(image, pixels):
    if isinstance(image, SynthImage):
        return SynthImage(pixels, image.label, image.blob)
    return pixels


def _window(r: int, c: int, n: int, H: int, W: int) -> tuple[slice, slice]:
    # size n+1; for even sizes the extra row/column falls below/right of center
    lo = n // 2
    return (slice(max(r - lo, 0), min(r - lo + n + 1, H)),
            slice(max(c - lo, 0), min(c - lo + n + 1, W)))


def removal_mask(shape, order, k: int, n: int = 0) -> np.ndarray:
    """Pixels filled when the top ``k`` entries of ``order`` are removed with
    ``(n+1) x (n+1)`` windows (``n = 0`` means single pixels)."""
    H, W = shape
    if not 0 <= k <= H * W:
        raise ValueError(f"k={k} outside [0, {H * W}]")
    mask = np.zeros(H * W, dtype=bool)
    top = np.asarray(order, dtype=np.int64)[:k]
    if n == 0:
        mask[top] = True
        return mask.reshape(H, W)
    mask = mask.reshape(H, W)
    for p in top:
        mask[_window(int(p) // W, int(p) % W, n, H, W)] = True
    return mask


def remove_pixels(image, order, k: int, fill: Fill):
    """Copy of ``image`` with its top-``k`` ranked pixels set to ``fill``."""
    pix = _pixels(image)
    if k > pix.size:
        raise ValueError(f"k={k} exceeds the pixel count {pix.size}")
    return _apply(image, removal_mask(pix.shape, order, k), fill)


def remove_patches(image, centers, n: int, k: int, fill: Fill):
    """Fill the ``(n+1) x (n+1)`` window around each of the top-``k`` centers,
    clipped at the borders; ``n = 0`` is pixel removal."""
    if n < 0:
        raise ValueError("n must be >= 0")
    pix = _pixels(image)
    return _apply(image, removal_mask(pix.shape, centers, k, n), fill)


def _apply(image, mask, fill):
    pix = _pixels(image).copy()
    fill_arr = np.broadcast_to(np.asarray(fill, dtype=float), pix.shape)
    pix[mask] = fill_arr[mask]
    return _rebuild(image, pix)


def deletion_stack(image, order, L: int, fill: Fill, n: int = 0) -> np.ndarray:
    """Images ``x^0..x^L`` with the top ``k`` ranked pixels (or windows) removed,
    shape ``(L + 1, H, W)``."""
    pix = _pixels(image)
    if L > pix.size:
        raise ValueError(f"L={L} exceeds the pixel count {pix.size}")
    fill_arr = np.broadcast_to(np.asarray(fill, dtype=float), pix.shape)
    out = np.empty((L + 1,) + pix.shape)
    cur = pix.copy()
    H, W = pix.shape
    out[0] = cur
    order = np.asarray(order, dtype=np.int64)
    for k in range(1, L + 1):
        p = int(order[k - 1])
        win = _window(p // W, p % W, n, H, W) if n else (p // W, p % W)
        cur[win] = fill_arr[win]
        out[k] = cur
    return out


def dataset_csv(images: Sequence[SynthImage], seed: Optional[int] = None) -> str:
    """Header line ``# H=..,W=..,n_classes=..,seed=..``, then one row per
    image: label followed by the row-major pixels."""
    H, W = images[0].shape
    n_classes = max(im.label for im in images) + 1
    buf = io.StringIO()
    buf.write(f"# H={H},W={W},n_classes={n_classes},seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label"] + [f"p{j}" for j in range(H * W)])
    for im in images:
        w.writerow([im.label] + [repr(float(v)) for v in im.flat()])
    return buf.getvalue()


def read_dataset_csv(text: str) -> tuple[list[SynthImage], dict]:
    lines = text.splitlines()
    header = dict(kv.split("=") for kv in lines[0][2:].split(","))
    H, W = int(header["H"]), int(header["W"])
    images = []
    for row in csv.reader(lines[2:]):
        images.append(SynthImage(np.array([float(v) for v in row[1:]]).reshape(H, W), int(row[0])))
    return images, header
