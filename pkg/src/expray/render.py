"""Escape-region rasters of the parameter plane and of dynamical planes.

Pixels are sampled at their centers, row 0 at the top.  Each pixel holds the
escape detection index or ``NOT_ESCAPED`` (bounded or indeterminate).

Palette: ``NOT_ESCAPED`` is black; an escape index n is drawn with
``PALETTE[min(n, len(PALETTE)) - 1]``, with index 0 sharing the first entry.
Early escapes are bright yellow, late ones fade through orange and red into
dark blue.  Overlaid ray polylines cycle through ``RAY_COLORS`` in the order
the traces are given.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import BUDGET, GROWTH_FACTOR, L_CONFIRM, R_ESC, checked_point

NOT_ESCAPED = -1

PALETTE = np.array([
    (255, 255, 160), (255, 236, 120), (255, 214, 84), (252, 188, 56),
    (246, 158, 40), (236, 126, 32), (220, 96, 32), (198, 68, 40),
    (172, 46, 54), (142, 32, 70), (110, 26, 84), (80, 24, 92),
    (56, 22, 96), (38, 20, 90), (26, 16, 74), (18, 12, 56),
], dtype=np.uint8)

RAY_COLORS = np.array([
    (0, 255, 255), (255, 255, 255), (0, 255, 0), (255, 0, 255),
    (64, 160, 255), (255, 128, 0),
], dtype=np.uint8)


@dataclass(frozen=True)
class GridSpec:
    center: complex
    width: float
    height: float
    px_w: int
    px_h: int
    budget: int = BUDGET
    r_esc: float = R_ESC

    def __post_init__(self):
        checked_point(self.center)
        if self.px_w < 1 or self.px_h < 1:
            raise ValueError("grid needs at least one pixel in each direction")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("grid width and height must be positive")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates: x per column, y per row (top row first).

        Offsets are formed from odd integers so that a grid centred on the
        real axis has rows that are exact mirror images.
        """
        c = complex(self.center)
        i = np.arange(self.px_w, dtype=np.float64)
        j = np.arange(self.px_h, dtype=np.float64)
        x = c.real + (2 * i + 1 - self.px_w) / (2 * self.px_w) * self.width
        y = c.imag - (2 * j + 1 - self.px_h) / (2 * self.px_h) * self.height
        return x, y

    def points(self) -> np.ndarray:
        x, y = self.axes()
        return x[None, :] + 1j * y[:, None]

    def to_pixel(self, z: complex) -> tuple[float, float]:
        """Continuous (column, row) of z; pixel centers sit on integers."""
        c = complex(self.center)
        col = (z.real - c.real) / self.width * self.px_w + 0.5 * (self.px_w - 1)
        row = (c.imag - z.imag) / self.height * self.px_h + 0.5 * (self.px_h - 1)
        return col, row


@dataclass(frozen=True)
class EscapeImage:
    grid: GridSpec
    counts: np.ndarray   # shape (px_h, px_w), int64

    def __post_init__(self):
        if self.counts.shape != (self.grid.px_h, self.grid.px_w):
            raise ValueError("counts do not match the grid")

    @property
    def escaped(self) -> np.ndarray:
        return self.counts != NOT_ESCAPED


def _codes_to_counts(codes: np.ndarray) -> np.ndarray:
    return np.where(codes >= 0, codes, NOT_ESCAPED).astype(np.int64)


def render_parameter_plane(grid: GridSpec, threads=None, use_numba=None) -> EscapeImage:
    pts = grid.points()
    codes = kernels.escape_codes(pts, pts, grid.budget, grid.r_esc, L_CONFIRM,
                                 GROWTH_FACTOR, threads=threads, use_numba=use_numba)
    return EscapeImage(grid, _codes_to_counts(codes))


def render_dynamic_plane(kappa, grid: GridSpec, threads=None, use_numba=None) -> EscapeImage:
    kappa = checked_point(kappa)
    codes = kernels.escape_codes(kappa, grid.points(), grid.budget, grid.r_esc, L_CONFIRM,
                                 GROWTH_FACTOR, threads=threads, use_numba=use_numba)
    return EscapeImage(grid, _codes_to_counts(codes))


def colorize(image: EscapeImage) -> np.ndarray:
    counts = image.counts
    idx = np.clip(counts, 1, len(PALETTE)) - 1
    rgb = PALETTE[idx]
    rgb[counts == NOT_ESCAPED] = 0
    return rgb


# --------------------------------------------------------------------------
# ray overlays
# --------------------------------------------------------------------------

def _clip_segment(x0, y0, x1, y1, xmax, ymax):
    """Liang-Barsky clip of a segment to [-0.5, xmax+0.5] x [-0.5, ymax+0.5]."""
    dx, dy = x1 - x0, y1 - y0
    lo, hi = 0.0, 1.0
    for p, q in ((-dx, x0 + 0.5), (dx, xmax + 0.5 - x0),
                 (-dy, y0 + 0.5), (dy, ymax + 0.5 - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            lo = max(lo, r)
        else:
            hi = min(hi, r)
        if lo > hi:
            return None
    return x0 + lo * dx, y0 + lo * dy, x0 + hi * dx, y0 + hi * dy


def _bresenham(c0, r0, c1, r1):
    dc, dr = abs(c1 - c0), -abs(r1 - r0)
    sc = 1 if c0 < c1 else -1
    sr = 1 if r0 < r1 else -1
    err = dc + dr
    while True:
        yield c0, r0
        if c0 == c1 and r0 == r1:
            return
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c0 += sc
        if e2 <= dc:
            err += dc
            r0 += sr


def _trace_points(trace) -> list[complex]:
    if hasattr(trace, "samples"):
        return [p.value for p in trace.samples]
    return [p.kappa if hasattr(p, "kappa") else complex(p) for p in trace]


def rasterize_polyline(grid: GridSpec, points) -> list[tuple[int, int]]:
    """Pixels (row, col) covered by the polyline through ``points``, clipped to the grid."""
    out = []
    seen = set()
    w, h = grid.px_w, grid.px_h
    pix = [grid.to_pixel(z) for z in points
           if math.isfinite(z.real) and math.isfinite(z.imag)]
    segs = list(zip(pix, pix[1:])) if len(pix) > 1 else [(p, p) for p in pix]
    for (x0, y0), (x1, y1) in segs:
        clipped = _clip_segment(x0, y0, x1, y1, w - 1, h - 1)
        if clipped is None:
            continue
        a, b, c, d = clipped
        c0, r0, c1, r1 = (int(math.floor(v + 0.5)) for v in (a, b, c, d))
        for col, row in _bresenham(c0, r0, c1, r1):
            if 0 <= col < w and 0 <= row < h and (row, col) not in seen:
                seen.add((row, col))
                out.append((row, col))
    return out


def overlay_rays(image: EscapeImage, traces=(), rgb: np.ndarray | None = None) -> np.ndarray:
    """RGB array of the escape image with each trace drawn as a polyline."""
    rgb = colorize(image) if rgb is None else rgb.copy()
    for i, trace in enumerate(traces):
        color = RAY_COLORS[i % len(RAY_COLORS)]
        for row, col in rasterize_polyline(image.grid, _trace_points(trace)):
            rgb[row, col] = color
    return rgb


# --------------------------------------------------------------------------
# file output
# --------------------------------------------------------------------------

def ppm_bytes(rgb: np.ndarray) -> bytes:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(path, rgb: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(rgb))


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError(f"{path}: not an 8-bit P6 file")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)


def write_counts_csv(path, image: EscapeImage) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(image.counts.tolist())


# --------------------------------------------------------------------------
# broken preimage rays
# --------------------------------------------------------------------------

def broken_ray_figure(kappa, s, grid: GridSpec, branches=(-1, 0, 1), t_span: float = 6.0,
                      n_samples: int = 60, threads=None):
    """Dynamic plane of kappa with the preimage rays k.s drawn on top.

    Intended for kappa on (or at the end of) the ray of address s: every
    preimage ray then runs into the singular value and ends prematurely.
    Returns (rgb, traces).
    """
    from .rays import minimal_potential, trace_ray

    image = render_dynamic_plane(kappa, grid, threads=threads)
    traces = []
    for k in branches:
        sk = s.prepend(k)
        t_lo = minimal_potential(sk)
        traces.append(trace_ray(kappa, sk, t_lo, t_lo + t_span, n_samples))
    return overlay_rays(image, traces), traces
