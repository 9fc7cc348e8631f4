"""Electrostatic field simulation over the image/sensor planes.

Geometry: two 28x28 charged image planes face a 28x28 sensor plane that
sits a distance ``d2`` from each of them; grid pitch is ``d1`` on every
plane and cells correspond one-to-one.  Each white pixel carries a point
charge ``q``; the potential at a sensor cell is the superposition of
``K*q/r`` over all charges, with
``r = sqrt((dr*d1)^2 + (dc*d1)^2 + d2^2)``.

A pair weight table is the elementwise difference of the two images'
potential tables (first image charged +q, second -q).

Two equivalent paths produce potential tables: :func:`potential_table`
evaluates distances directly, while :func:`potential_table_fast` adds
windows of a precomputed per-charge kernel.  Both accumulate charges in
row-major pixel order in float64, so dumps are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import ConfigMismatchError
from .mnist_io import GRID, BinaryImage

COULOMB_TEXTBOOK = 8.9875e9   # V*m/C
COULOMB_ROUNDED = 9e9


@dataclass(frozen=True)
class PhysicalConfig:
    """Physical parameters of the simulated system (SI units)."""

    coulomb_k: float = COULOMB_TEXTBOOK   # V*m/C
    charge: float = 1e-9                  # coulombs per white pixel
    pixel_pitch: float = 0.02             # d1, meters
    plane_gap: float = 0.04               # d2, image plane to sensors, meters
    bin_threshold: int = 150

    def __post_init__(self):
        for name in ("coulomb_k", "charge", "pixel_pitch", "plane_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.bin_threshold <= 255:
            raise ValueError("bin_threshold outside [0, 255]")

    @classmethod
    def from_cm(cls, d1_cm: float = 2.0, d2_cm: float = 4.0, **kw) -> "PhysicalConfig":
        """Construct with plane distances given in centimeters."""
        return cls(pixel_pitch=d1_cm / 100.0, plane_gap=d2_cm / 100.0, **kw)

    def as_dict(self) -> dict:
        return {
            "coulomb_k": self.coulomb_k,
            "charge": self.charge,
            "pixel_pitch": self.pixel_pitch,
            "plane_gap": self.plane_gap,
            "bin_threshold": self.bin_threshold,
        }


def charge_sensor_distance(p_img: tuple[int, int], p_sensor: tuple[int, int],
                           cfg: PhysicalConfig) -> float:
    """Distance from a charge cell on the image plane to a sensor cell."""
    dr = (p_img[0] - p_sensor[0]) * cfg.pixel_pitch
    dc = (p_img[1] - p_sensor[1]) * cfg.pixel_pitch
    return math.sqrt(dr * dr + dc * dc + cfg.plane_gap * cfg.plane_gap)


@dataclass(frozen=True)
class DistanceKernel:
    """Per-charge potential, tabulated by sensor offset.

    ``values[dr + 27, dc + 27]`` is the potential one charge induces at a
    sensor displaced by (dr, dc) cells, for offsets in [-27, 27]^2.
    """

    values: np.ndarray
    cfg: PhysicalConfig


def build_kernel(cfg: PhysicalConfig) -> DistanceKernel:
    """Tabulate K*q/r for every possible charge-sensor cell offset."""
    off = np.arange(-(GRID - 1), GRID, dtype=np.float64) * cfg.pixel_pitch
    r = np.sqrt(off[:, None] ** 2 + off[None, :] ** 2 + cfg.plane_gap ** 2)
    return DistanceKernel(cfg.coulomb_k * cfg.charge / r, cfg)


def potential_table(img: BinaryImage, cfg: PhysicalConfig) -> np.ndarray:
    """Summed Coulomb potential (volts) at each of the 28x28 sensor cells.

    Direct path: distances are evaluated per charge, and charges are
    accumulated in row-major pixel order.
    """
    out = np.zeros((GRID, GRID))
    kq = cfg.coulomb_k * cfg.charge
    grid = np.arange(GRID, dtype=np.float64) * cfg.pixel_pitch
    d2sq = cfg.plane_gap ** 2
    for idx in img.active_flat:
        r, c = divmod(int(idx), GRID)
        dist = np.sqrt((grid - grid[r])[:, None] ** 2
                       + (grid - grid[c])[None, :] ** 2 + d2sq)
        out += kq / dist
    return out


def potential_table_fast(img: BinaryImage, kernel: DistanceKernel) -> np.ndarray:
    """Same table as :func:`potential_table`, via the precomputed kernel."""
    rows, cols = np.divmod(img.active_flat, GRID)
    out = np.zeros((GRID, GRID))
    backends.accumulate_potentials(kernel.values, rows, cols, out)
    return out


def pair_weight_table(img_a: BinaryImage, img_b: BinaryImage,
                      cfg: PhysicalConfig,
                      kernel: DistanceKernel | None = None) -> np.ndarray:
    """Weight table of the comparison neuron for (img_a, img_b).

    img_a's plane is charged +q and img_b's -q, both at ``d2`` from the
    sensors, so the table is the difference of their potential tables.
    """
    if kernel is None:
        return potential_table(img_a, cfg) - potential_table(img_b, cfg)
    if kernel.cfg != cfg:
        raise ConfigMismatchError("kernel was built from a different config")
    return potential_table_fast(img_a, kernel) - potential_table_fast(img_b, kernel)


def table_to_csv(table: np.ndarray) -> str:
    """28 lines of 28 comma-separated full-precision decimals."""
    return "\n".join(",".join(repr(float(v)) for v in row) for row in table) + "\n"


def table_from_csv(text: str) -> np.ndarray:
    rows = [[float(v) for v in line.split(",")]
            for line in text.strip().splitlines()]
    return np.array(rows)


def table_to_pgm(table: np.ndarray) -> bytes:
    """8-bit binary PGM, affinely normalized so min -> 0 and max -> 255."""
    lo, hi = float(table.min()), float(table.max())
    if hi > lo:
        scaled = np.rint((table - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(table)
    pixels = scaled.astype(np.uint8)
    header = f"P5\n{table.shape[1]} {table.shape[0]}\n255\n".encode()
    return header + pixels.tobytes()
