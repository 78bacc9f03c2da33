"""Scan enhancement chain: grayscale, bilateral denoise, Otsu binarization.

All operations are pure functions over small value types, so callers can
process pages in parallel without shared state. The binarization chain is
what upstream OCR quality depends on, so the numerics here are pinned down
exactly:

* grayscale uses the BT.601 luminance weights 0.299/0.587/0.114,
* the bilateral filter uses joint Gaussian spatial/range weights over a
  (2*radius+1)^2 window with edge-replicated borders,
* Otsu's threshold maximizes between-class variance with exact integer
  arithmetic, breaking ties toward the smallest threshold so repeated runs
  and alternative implementations agree bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster; ``pixels`` is row-major, values in [0, 255]."""

    width: int
    height: int
    pixels: list[int]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel count {len(self.pixels)} does not match {self.width}x{self.height}"
            )
        for v in self.pixels:
            if not (0 <= v <= 255):
                raise ValueError(f"pixel value {v} outside [0, 255]")

    def at(self, x: int, y: int) -> int:
        return self.pixels[y * self.width + x]


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB raster; ``pixels`` is row-major [r, g, b, r, g, b, ...]."""

    width: int
    height: int
    pixels: list[int]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != 3 * self.width * self.height:
            raise ValueError("pixel buffer must hold width*height RGB triples")
        for v in self.pixels:
            if not (0 <= v <= 255):
                raise ValueError(f"channel value {v} outside [0, 255]")


@dataclass(frozen=True)
class BilateralParams:
    """sigma_spatial in pixels, sigma_range in intensity units.

    When no radius is given the window is truncated at ceil(3*sigma_spatial);
    Gaussian mass beyond three sigma is negligible.
    """

    sigma_spatial: float
    sigma_range: float
    radius: int | None = None

    def __post_init__(self):
        if self.sigma_spatial <= 0 or self.sigma_range <= 0:
            raise ValueError("sigma_spatial and sigma_range must be positive")
        if self.radius is None:
            object.__setattr__(self, "radius", max(1, math.ceil(3.0 * self.sigma_spatial)))
        if self.radius < 1:
            raise ValueError("radius must be >= 1")


def to_grayscale(rgb: RgbImage) -> GrayImage:
    """BT.601 luminance: round(0.299 R + 0.587 G + 0.114 B), clamped."""
    out: list[int] = []
    px = rgb.pixels
    for i in range(0, len(px), 3):
        y = 0.299 * px[i] + 0.587 * px[i + 1] + 0.114 * px[i + 2]
        out.append(min(255, max(0, int(math.floor(y + 0.5)))))
    return GrayImage(width=rgb.width, height=rgb.height, pixels=out)


def bilateral_filter(img: GrayImage, params: BilateralParams) -> GrayImage:
    """Edge-preserving smoothing with joint spatial/range Gaussian weights.

    output[p] = sum_q w(p,q) I[q] / sum_q w(p,q) over the window, where
    w(p,q) = exp(-d(p,q)^2 / (2 sigma_spatial^2))
           * exp(-(I[p]-I[q])^2 / (2 sigma_range^2)).
    Coordinates outside the image are clamped to the border (edge
    replication). Output is rounded to the nearest integer.
    """
    r = params.radius
    arr = np.asarray(img.pixels, dtype=np.float64).reshape(img.height, img.width)
    padded = np.pad(arr, r, mode="edge")

    two_ss = 2.0 * params.sigma_spatial**2
    two_sr = 2.0 * params.sigma_range**2

    acc = np.zeros_like(arr)
    norm = np.zeros_like(arr)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = padded[r + dy : r + dy + img.height, r + dx : r + dx + img.width]
            w = np.exp(-(dx * dx + dy * dy) / two_ss) * np.exp(-((arr - shifted) ** 2) / two_sr)
            acc += w * shifted
            norm += w

    result = np.clip(np.floor(acc / norm + 0.5), 0, 255).astype(np.int64)
    return GrayImage(width=img.width, height=img.height, pixels=result.reshape(-1).tolist())


def otsu_threshold(img: GrayImage) -> tuple[int, GrayImage]:
    """Global binarization threshold maximizing between-class variance.

    Scans t in [0, 254] with class 0 = pixels <= t. The objective
    w0*w1*(mu0-mu1)^2 is compared as an exact rational
    (s0*n1 - s1*n0)^2 / (n0*n1), so plateaus (every histogram gap produces
    one) resolve deterministically to the smallest threshold. A single
    distinct intensity v yields (v, all-zero image) by definition.

    Returns (threshold, binary image with values in {0, 255}).
    """
    if not img.pixels:
        raise ValueError("cannot threshold an empty image")

    hist = [0] * 256
    for v in img.pixels:
        hist[v] += 1

    distinct = [v for v, c in enumerate(hist) if c]
    if len(distinct) == 1:
        only = distinct[0]
        return only, GrayImage(img.width, img.height, [0] * len(img.pixels))

    total_n = len(img.pixels)
    total_s = sum(v * c for v, c in enumerate(hist))

    best_t = 0
    best_num = -1  # (s0*n1 - s1*n0)^2, exact
    best_den = 1  # n0*n1, exact
    n0 = 0
    s0 = 0
    for t in range(255):
        n0 += hist[t]
        s0 += t * hist[t]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            num, den = 0, 1
        else:
            s1 = total_s - s0
            diff = s0 * n1 - s1 * n0
            num, den = diff * diff, n0 * n1
        # strict improvement only: ties keep the smaller threshold
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    binary = [0 if v <= best_t else 255 for v in img.pixels]
    return best_t, GrayImage(img.width, img.height, binary)


def enhance(img: GrayImage, params: BilateralParams) -> tuple[int, GrayImage]:
    """Full chain on an already-gray image: denoise then binarize."""
    smoothed = bilateral_filter(img, params)
    return otsu_threshold(smoothed)


# --- raster I/O ---------------------------------------------------------------


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM with maxval 255."""
    tokens: list[bytes] = []
    i = 0
    # header is whitespace-separated tokens; '#' starts a comment to end of line
    while len(tokens) < 4 and i < len(data):
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
                i += 1
            tokens.append(data[start:i])
    if len(tokens) < 4:
        raise ValueError("truncated PGM header")
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM file (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:4])
    if maxval != 255:
        raise ValueError(f"unsupported PGM maxval {maxval} (only 255)")
    i += 1  # single whitespace byte after maxval
    raster = data[i : i + width * height]
    if len(raster) < width * height:
        raise ValueError("truncated PGM raster")
    return GrayImage(width=width, height=height, pixels=list(raster))


def write_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + bytes(img.pixels)


def load_image(path: str | Path) -> GrayImage:
    """Load a PGM or PNG file as grayscale (PNG color input is converted)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path.read_bytes())
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("L", "1"):
            gray = im.convert("L")
            return GrayImage(gray.width, gray.height, list(gray.tobytes()))
        rgb = im.convert("RGB")
        return to_grayscale(RgbImage(rgb.width, rgb.height, list(rgb.tobytes())))


def save_image(path: str | Path, img: GrayImage) -> None:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        path.write_bytes(write_pgm(img))
        return
    from PIL import Image

    im = Image.frombytes("L", (img.width, img.height), bytes(img.pixels))
    im.save(path)
