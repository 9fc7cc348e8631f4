"""Backend selection for the hot loops.

Two interchangeable implementations exist:

* ``cython`` — the compiled extension ``fieldnet._kernels``;
* ``numpy``  — vectorized fallback, always available.

The default is the compiled backend when the extension imported cleanly.
Set ``FIELDNET_BACKEND=numpy`` or ``FIELDNET_BACKEND=cython`` to force a
choice (forcing ``cython`` without the extension raises).  Both backends
accumulate potentials per active pixel in the same order, so the
potential path is bit-identical across them; neuron-state sums may
differ in the last ulp because the numpy path reduces via BLAS.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def _select(name: str | None) -> str:
    name = (name or os.environ.get("FIELDNET_BACKEND", "auto")).lower()
    if name == "auto":
        return "cython" if HAVE_COMPILED else "numpy"
    if name == "cython":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "FIELDNET_BACKEND=cython requested but the compiled "
                "extension is not available")
        return "cython"
    if name == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend {name!r}")


def active_backend(name: str | None = None) -> str:
    """Resolved backend name ('cython' or 'numpy')."""
    return _select(name)


def accumulate_potentials(kernel: np.ndarray, rows: np.ndarray,
                          cols: np.ndarray, out: np.ndarray,
                          backend: str | None = None) -> None:
    """Accumulate per-charge kernel windows into the sensor grid ``out``."""
    if _select(backend) == "cython":
        _kernels.accumulate_potentials(kernel, rows, cols, out)
        return
    H, W = out.shape
    for r, c in zip(rows, cols):
        out += kernel[H - 1 - r:2 * H - 1 - r, W - 1 - c:2 * W - 1 - c]


def masked_row_sums(weights: np.ndarray, idx_flat: np.ndarray,
                    idx_offsets: np.ndarray, backend: str | None = None
                    ) -> np.ndarray:
    """Sum each weight row over every input's active flat indices.

    ``weights`` is (n_rows, n_cells) float64; the inputs are given CSR
    style.  Returns (n_inputs, n_rows) float64.
    """
    n_inputs = len(idx_offsets) - 1
    out = np.empty((n_inputs, weights.shape[0]))
    if _select(backend) == "cython":
        _kernels.masked_row_sums(weights, idx_flat, idx_offsets, out)
        return out
    # fallback: one dense indicator block, reduced by BLAS
    indicator = np.zeros((n_inputs, weights.shape[1]))
    for b in range(n_inputs):
        indicator[b, idx_flat[idx_offsets[b]:idx_offsets[b + 1]]] = 1.0
    np.dot(indicator, weights.T, out=out)
    return out
