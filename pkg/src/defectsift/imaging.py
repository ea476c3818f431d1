"""Image containers, PGM I/O, histograms, normalization and small-kernel filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    EmptyInput,
    EvenKernel,
    InvalidImage,
    MalformedHeader,
    TruncatedPayload,
    UnsupportedMaxval,
    UpsampleRequested,
)

LAPLACIAN = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=float)
# Oriented so that ``convolve2d`` returns +d/dx (+d/dy) on increasing ramps.
SOBEL_X = np.array([[1, 0, -1], [2, 0, -2], [1, 0, -1]], dtype=float)
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Grayscale image with a declared bit depth (8 or 16).

    ``pixels`` is a 2-D integer array indexed ``[row, col]``.
    """

    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidImage(f"expected a non-empty 2-D grid, got shape {arr.shape}")
        if self.bit_depth not in (8, 16):
            raise InvalidImage(f"bit depth must be 8 or 16, got {self.bit_depth}")
        if arr.dtype.kind == "f":
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InvalidImage("pixel values must be integers")
        elif arr.dtype.kind not in "iub":
            raise InvalidImage(f"unsupported pixel dtype {arr.dtype}")
        arr = arr.astype(np.int64)
        if arr.size and (arr.min() < 0 or arr.max() > self.max_value):
            raise InvalidImage(f"pixel values outside [0, {self.max_value}]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_sequence(cls, width, height, pixels, bit_depth=8):
        values = np.asarray(list(pixels))
        if values.size != width * height:
            raise InvalidImage(f"{values.size} pixels for a {width}x{height} image")
        return cls(values.reshape(height, width), bit_depth)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def levels(self) -> int:
        return 1 << self.bit_depth

    def crop(self, roi: "Roi") -> "GrayImage":
        r = roi.clip(self.width, self.height)
        return GrayImage(self.pixels[r.y : r.y + r.h, r.x : r.x + r.w], self.bit_depth)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True)
class Roi:
    x: int
    y: int
    w: int
    h: int

    def clip(self, width: int, height: int) -> "Roi":
        x0 = min(max(self.x, 0), width - 1)
        y0 = min(max(self.y, 0), height - 1)
        x1 = min(max(self.x + self.w, x0 + 1), width)
        y1 = min(max(self.y + self.h, y0 + 1), height)
        return Roi(x0, y0, x1 - x0, y1 - y0)

    @classmethod
    def full(cls, img: GrayImage) -> "Roi":
        return cls(0, 0, img.width, img.height)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned counts over the half-open intensity range ``[lo, hi)``."""

    bins: np.ndarray
    lo: float = 0.0
    hi: float = 256.0

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=float)
        if b.ndim != 1 or b.size < 1:
            raise InvalidImage("histogram needs a 1-D array of bins")
        if np.any(b < 0):
            raise InvalidImage("histogram counts must be nonnegative")
        object.__setattr__(self, "bins", b)

    @property
    def n_bins(self) -> int:
        return self.bins.size

    @property
    def total(self) -> float:
        return float(self.bins.sum())

    def normalized(self) -> np.ndarray:
        t = self.total
        if t <= 0:
            return np.zeros_like(self.bins)
        return self.bins / t

    def centers(self) -> np.ndarray:
        """Representative intensity of each bin (mean of the integer levels it spans)."""
        width = (self.hi - self.lo) / self.n_bins
        return self.lo + np.arange(self.n_bins) * width + (width - 1.0) / 2.0


# --------------------------------------------------------------------------- #
# PGM I/O
# --------------------------------------------------------------------------- #

def _header_tokens(data: bytes, count: int):
    tokens = []
    pos = 0
    while len(tokens) < count:
        # Skip whitespace and comments.
        while True:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if data[pos : pos + 1] == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedHeader("unexpected end of header")
        tokens.append(data[start:pos])
    return tokens, pos


def load_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM payload."""
    if data[:2] not in (b"P2", b"P5"):
        raise MalformedHeader("missing P2/P5 magic")
    tokens, pos = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise MalformedHeader(f"non-integer header field: {exc}") from None
    if width < 1 or height < 1:
        raise MalformedHeader("width and height must be positive")
    if maxval not in (255, 65535):
        raise UnsupportedMaxval(f"maxval {maxval} not supported (255 or 65535)")
    depth = 8 if maxval == 255 else 16
    n = width * height
    if tokens[0] == b"P2":
        body = data[pos:].split()
        if len(body) < n:
            raise TruncatedPayload(f"expected {n} samples, found {len(body)}")
        try:
            values = np.array([int(v) for v in body[:n]], dtype=np.int64)
        except ValueError:
            raise MalformedHeader("non-integer sample in P2 body") from None
        if values.min() < 0 or values.max() > maxval:
            raise MalformedHeader("sample exceeds maxval")
    else:
        # Exactly one whitespace byte separates the header from binary data.
        pos += 1
        nbytes = n * (1 if depth == 8 else 2)
        payload = data[pos : pos + nbytes]
        if len(payload) < nbytes:
            raise TruncatedPayload(f"expected {nbytes} bytes, found {len(payload)}")
        dtype = np.uint8 if depth == 8 else np.dtype(">u2")
        values = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    return GrayImage(values.reshape(height, width), depth)


def dump_pgm(img: GrayImage, binary: bool = True) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.max_value}\n".encode()
    if binary:
        dtype = np.uint8 if img.bit_depth == 8 else np.dtype(">u2")
        return header + img.pixels.astype(dtype).tobytes()
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in img.pixels)
    return header + rows.encode() + b"\n"


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def write_pgm(path, img: GrayImage, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_pgm(img, binary))


# --------------------------------------------------------------------------- #
# Normalization, masks, histograms
# --------------------------------------------------------------------------- #


def _values(img) -> np.ndarray:
    return np.asarray(img.pixels if isinstance(img, GrayImage) else img, dtype=float)


def minmax_normalize(img) -> np.ndarray:
    u = _values(img)
    lo, hi = u.min(), u.max()
    if hi == lo:
        return np.zeros_like(u)
    return (u - lo) / (hi - lo)


def zscore_normalize(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInput("z-score of an empty sequence")
    if np.ptp(v) == 0:
        return np.zeros_like(v)
    std = v.std()
    if std == 0:
        return np.zeros_like(v)
    return (v - v.mean()) / std


def default_lost_threshold(bit_depth: int) -> int:
    """Three-bit threshold (8 at 8-bit) scaled to the image depth."""
    return 8 << (bit_depth - 8)


def lost_mask(img: GrayImage, thresh: float | None = None) -> np.ndarray:
    """Boolean mask of pixels strictly below ``thresh``."""
    if thresh is None:
        thresh = default_lost_threshold(img.bit_depth)
    return img.pixels < thresh


def histogram(img, n_bins: int = 256, bit_depth: int | None = None) -> Histogram:
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if isinstance(img, GrayImage):
        values, depth = img.pixels.ravel(), img.bit_depth
    else:
        values, depth = np.asarray(img).ravel(), bit_depth or 8
    hi = float(1 << depth)
    idx = np.floor(values.astype(float) * n_bins / hi).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    return Histogram(np.bincount(idx, minlength=n_bins).astype(float), 0.0, hi)


def convolve2d(img, kernel) -> np.ndarray:
    """2-D convolution (kernel flipped) with replicated borders."""
    k = np.asarray(kernel, dtype=float)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise EvenKernel(f"kernel must be odd-sized, got {k.shape}")
    return ndimage.convolve(_values(img), k, mode="nearest")


def local_mean_var(u: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and variance over a square window, replicated borders."""
    u = np.asarray(u, dtype=float)
    mean = ndimage.uniform_filter(u, size=window, mode="nearest")
    sq = ndimage.uniform_filter(u * u, size=window, mode="nearest")
    return mean, np.maximum(sq - mean * mean, 0.0)


# --------------------------------------------------------------------------- #
# Resampling and contrast
# --------------------------------------------------------------------------- #


def _area_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Row i holds the overlap of output cell i with each input cell, in input units."""
    scale = n_in / n_out
    edges = np.arange(n_out + 1) * scale
    m = np.zeros((n_out, n_in))
    for i in range(n_out):
        a, b = edges[i], edges[i + 1]
        j0, j1 = int(np.floor(a)), min(int(np.ceil(b)), n_in)
        for j in range(j0, j1):
            m[i, j] = min(b, j + 1) - max(a, j)
    return m / scale


def downsample(img: GrayImage, w: int, h: int) -> GrayImage:
    """Area-average resampling to ``w x h``, rounding half up."""
    if w > img.width or h > img.height or w < 1 or h < 1:
        raise UpsampleRequested(f"cannot resample {img.width}x{img.height} to {w}x{h}")
    ry = _area_matrix(h, img.height)
    rx = _area_matrix(w, img.width)
    out = ry @ img.pixels.astype(float) @ rx.T
    out = np.floor(out + 0.5 + 1e-9)
    return GrayImage(np.clip(out, 0, img.max_value).astype(np.int64), img.bit_depth)


def _split_edges(n: int, parts: int) -> np.ndarray:
    return np.array([round(i * n / parts) for i in range(parts + 1)], dtype=np.int64)


def clahe(img: GrayImage, clip_limit: float = 2.0, tiles=(8, 8)) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Each tile's histogram is clipped at ``clip_limit * tile_pixels / levels``
    (at least one count), the excess is spread evenly over all levels, and the
    resulting CDF becomes the tile's lookup table. Pixels blend the LUTs of the
    four nearest tile centres bilinearly. Constant tiles use the identity LUT.
    """
    if clip_limit <= 0:
        raise ValueError("clip_limit must be positive")
    if isinstance(tiles, int):
        tiles = (tiles, tiles)
    u = img.pixels
    H, W = u.shape
    L = img.levels
    ty, tx = max(1, min(tiles[0], H)), max(1, min(tiles[1], W))
    ye, xe = _split_edges(H, ty), _split_edges(W, tx)
    identity = np.arange(L, dtype=float)
    luts = np.empty((ty, tx, L))
    for i in range(ty):
        for j in range(tx):
            tile = u[ye[i] : ye[i + 1], xe[j] : xe[j + 1]].ravel()
            if tile.min() == tile.max():
                luts[i, j] = identity
                continue
            hist = np.bincount(tile, minlength=L).astype(float)
            limit = max(clip_limit * tile.size / L, 1.0)
            excess = np.sum(np.maximum(hist - limit, 0.0))
            hist = np.minimum(hist, limit) + excess / L
            cdf = np.cumsum(hist)
            luts[i, j] = cdf / cdf[-1] * (L - 1)
    cy = (ye[:-1] + ye[1:] - 1) / 2.0
    cx = (xe[:-1] + xe[1:] - 1) / 2.0

    def _weights(coords, centers):
        if centers.size > 1:
            pos = np.interp(coords, centers, np.arange(centers.size))
        else:
            pos = np.zeros_like(coords)
        i0 = np.clip(np.floor(pos).astype(int), 0, max(centers.size - 2, 0))
        i1 = np.minimum(i0 + 1, centers.size - 1)
        t = np.clip(pos - i0, 0.0, 1.0)
        return i0, i1, t

    y0, y1, wy = _weights(np.arange(H, dtype=float), cy)
    x0, x1, wx = _weights(np.arange(W, dtype=float), cx)
    Y0, X0 = np.meshgrid(y0, x0, indexing="ij")
    Y1, X1 = np.meshgrid(y1, x1, indexing="ij")
    WY, WX = np.meshgrid(wy, wx, indexing="ij")
    out = (
        (1 - WY) * (1 - WX) * luts[Y0, X0, u]
        + (1 - WY) * WX * luts[Y0, X1, u]
        + WY * (1 - WX) * luts[Y1, X0, u]
        + WY * WX * luts[Y1, X1, u]
    )
    out = np.floor(out + 0.5)
    return GrayImage(np.clip(out, 0, L - 1).astype(np.int64), img.bit_depth)
