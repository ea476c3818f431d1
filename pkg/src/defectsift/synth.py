"""Synthetic labeled images: uniform impulse noise versus clustered defects."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .imaging import GrayImage, default_lost_threshold, write_pgm

LABEL_NOISE, LABEL_DEFECT = 0, 1
# 8-neighbourhood steps of the blob random walk.
_STEPS = np.array([(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)])


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters.

    ``noise_density`` is the lost-pixel fraction of noise images; defect images
    carry ``defect_blob_count`` blobs plus uniform impulses at
    ``residual_frac * noise_density``. ``density_jitter`` scales the density of
    each dataset image by a uniform factor in ``[1 - j, 1 + j]``.
    """

    width: int = 64
    height: int = 64
    bit_depth: int = 8
    noise_density: float = 0.03
    density_jitter: float = 0.5
    defect_blob_count: int = 2
    blob_radius_px: float = 4.0
    blob_fill: float = 0.85
    residual_frac: float = 0.25
    background_level: float = 128.0
    texture_sigma: float = 12.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be positive")
        if self.bit_depth not in (8, 16):
            raise ValueError("bit_depth must be 8 or 16")
        if not 0.0 <= self.noise_density <= 1.0:
            raise ValueError("noise_density must lie in [0, 1]")
        if self.blob_radius_px < 1:
            raise ValueError("blob_radius_px must be >= 1")
        if not 0.0 <= self.blob_fill <= 1.0 or not 0.0 <= self.density_jitter <= 1.0:
            raise ValueError("blob_fill and density_jitter must lie in [0, 1]")
        if self.defect_blob_count < 0 or self.residual_frac < 0:
            raise ValueError("blob count and residual fraction must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        unknown = sorted(set(d) - {f.name for f in fields(cls)})
        if unknown:
            raise KeyError(f"unknown synth config keys: {unknown}")
        return cls(**d)


def _rng(cfg: SynthConfig, rng):
    return rng if rng is not None else np.random.default_rng(cfg.seed)


def background(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Gaussian texture clipped above the lost threshold, so only planted pixels are lost."""
    top = (1 << cfg.bit_depth) - 1
    scale = 1 << (cfg.bit_depth - 8)
    u = rng.normal(cfg.background_level * scale, cfg.texture_sigma * scale, (cfg.height, cfg.width))
    lo = default_lost_threshold(cfg.bit_depth)
    return np.clip(np.floor(u + 0.5), lo, top).astype(np.int64)


def _drop_uniform(u: np.ndarray, n: int, rng: np.random.Generator) -> None:
    if n > 0:
        u.flat[rng.choice(u.size, size=min(n, u.size), replace=False)] = 0


def gen_noise_image(cfg: SynthConfig, rng: np.random.Generator | None = None,
                    n_lost: int | None = None) -> GrayImage:
    """Background with ``floor(density * M N)`` (or ``n_lost``) uniformly placed lost pixels."""
    rng = _rng(cfg, rng)
    u = background(cfg, rng)
    if n_lost is None:
        n_lost = int(math.floor(cfg.noise_density * u.size))
    _drop_uniform(u, n_lost, rng)
    return GrayImage(u, cfg.bit_depth)


def blob_pixels(center, radius: float, target: int, shape, rng: np.random.Generator) -> np.ndarray:
    """Distinct pixels visited by an 8-neighbour random walk confined to a disc."""
    H, W = shape
    cy, cx = center
    pos = np.array([cy, cx])
    seen = {(cy, cx)}
    lim = (radius + 0.5) ** 2
    max_steps = 200 * max(target, 1)
    for _ in range(max_steps):
        if len(seen) >= target:
            break
        nxt = pos + _STEPS[rng.integers(8)]
        if not (0 <= nxt[0] < H and 0 <= nxt[1] < W):
            continue
        if (nxt[0] - cy) ** 2 + (nxt[1] - cx) ** 2 > lim:
            continue
        pos = nxt
        seen.add((int(pos[0]), int(pos[1])))
    return np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)


def gen_defect_image(cfg: SynthConfig, rng: np.random.Generator | None = None,
                     centers=None) -> GrayImage:
    """Background with random-walk blobs of about ``fill * pi r^2`` pixels plus residual impulses."""
    rng = _rng(cfg, rng)
    u = background(cfg, rng)
    H, W = u.shape
    r = cfg.blob_radius_px
    target = max(1, int(round(cfg.blob_fill * math.pi * r * r)))
    if centers is None:
        m = int(math.ceil(r))
        centers = [
            (int(rng.integers(min(m, H - 1), max(H - m, m + 1))),
             int(rng.integers(min(m, W - 1), max(W - m, m + 1))))
            for _ in range(cfg.defect_blob_count)
        ]
    for c in centers:
        px = blob_pixels(c, r, target, u.shape, rng)
        u[px[:, 0], px[:, 1]] = 0
    residual = int(math.floor(cfg.residual_frac * cfg.noise_density * u.size))
    _drop_uniform(u, residual, rng)
    return GrayImage(u, cfg.bit_depth)


@dataclass(frozen=True, eq=False)
class SynthSample:
    name: str
    image: GrayImage
    label: int


def gen_dataset(n_per_class: int, cfg: SynthConfig | None = None, seed: int | None = None) -> list[SynthSample]:
    """``n`` noise then ``n`` defect images, each from its own spawned seed."""
    cfg = cfg or SynthConfig()
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    master = np.random.SeedSequence(cfg.seed if seed is None else seed)
    children = master.spawn(2 * n_per_class)
    out = []
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        label = LABEL_NOISE if k < n_per_class else LABEL_DEFECT
        j = cfg.density_jitter
        density = min(1.0, cfg.noise_density * rng.uniform(1 - j, 1 + j)) if j > 0 else cfg.noise_density
        icfg = replace(cfg, noise_density=density)
        idx = k % n_per_class
        if label == LABEL_NOISE:
            out.append(SynthSample(f"noise_{idx:04d}.pgm", gen_noise_image(icfg, rng), label))
        else:
            out.append(SynthSample(f"defect_{idx:04d}.pgm", gen_defect_image(icfg, rng), label))
    return out


def write_dataset(out_dir, samples: list[SynthSample]) -> Path:
    """Write PGMs and ``labels.csv`` (``path,label``, paths relative to ``out_dir``)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in samples:
        write_pgm(out / s.name, s.image)
    labels = out / "labels.csv"
    with open(labels, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label"])
        for s in samples:
            w.writerow([s.name, s.label])
    return labels
