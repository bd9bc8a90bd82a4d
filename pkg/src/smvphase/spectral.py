"""2D FFT plumbing: frequency grids and frequency-domain transfer functions.

All filtering in this package happens here: an image is transformed with the
unnormalized DFT, multiplied by a transfer function sampled on the angular
frequency grid, and transformed back.  Images are square throughout; callers
that need the full frame machinery additionally require power-of-two sides.

Conventions
-----------
* ``samples[i, j]`` indexes the first spatial coordinate with ``i`` and the
  second with ``j`` (row-major), and the frequency grid follows the same
  layout: ``u`` varies along axis 0, ``v`` along axis 1.
* Angular frequencies are in radians per sample, standard DFT ordering
  (index k maps to 2*pi*k/n for k < n/2 and 2*pi*(k-n)/n otherwise).
* Transfer functions that are singular at the origin declare an explicit DC
  gain; by default DC is forced to 0 so derived transforms annihilate
  constants.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .errors import ConjugateSymmetryError, ShapeError

# Relative imaginary residue tolerated when casting an inverse DFT to real.
_IMAG_RESIDUE_TOL = 1e-8

TransferFn = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def ensure_real_image(img: np.ndarray) -> np.ndarray:
    """Validate and return ``img`` as a square, finite float64 array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square 2D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite samples")
    return arr


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def ensure_pow2_image(img: np.ndarray) -> np.ndarray:
    """Like :func:`ensure_real_image` but additionally require 2**m side."""
    arr = ensure_real_image(img)
    if not is_power_of_two(arr.shape[0]):
        raise ShapeError(f"side length {arr.shape[0]} is not a power of two")
    return arr


def forward_fft(img: np.ndarray) -> np.ndarray:
    """Unnormalized 2D DFT of a square real image."""
    return np.fft.fft2(ensure_real_image(img))


def inverse_fft(spec: np.ndarray) -> np.ndarray:
    """Real part of the normalized inverse 2D DFT.

    Raises :class:`ConjugateSymmetryError` if the inverse has an imaginary
    residue above ``1e-8`` times the peak magnitude, which means the input
    spectrum did not come from a real image.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    if spec.ndim != 2 or spec.shape[0] != spec.shape[1]:
        raise ShapeError(f"expected a square 2D spectrum, got shape {spec.shape}")
    out = np.fft.ifft2(spec)
    mag = np.abs(out)
    peak = mag.max()
    if peak > 0.0:
        residue = np.abs(out.imag).max()
        if residue > _IMAG_RESIDUE_TOL * peak:
            raise ConjugateSymmetryError(
                f"imaginary residue {residue:.3e} exceeds {_IMAG_RESIDUE_TOL:.0e} "
                f"* peak magnitude {peak:.3e}"
            )
    return out.real


def ifft_real(spec: np.ndarray) -> np.ndarray:
    """Real part of the normalized inverse DFT, without the symmetry check.

    For internal multiplier pipelines only: their gains are Hermitian by
    construction, but a component that cancels to rounding noise is not
    Hermitian to *relative* precision and would trip :func:`inverse_fft`.
    """
    return np.fft.ifft2(spec).real


def frequency_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequency arrays (u, v) for an n-by-n grid, DFT ordering.

    ``u[i, j]`` depends only on ``i`` and ``v[i, j]`` only on ``j``;
    ``(u, v) == (0, 0)`` exactly at index (0, 0).
    """
    if n < 2 or not is_power_of_two(n):
        raise ShapeError(f"side length must be a power of two >= 2, got {n}")
    w = 2.0 * np.pi * np.fft.fftfreq(n)
    u, v = np.meshgrid(w, w, indexing="ij")
    return u, v


def apply_transfer(spec: np.ndarray, h: TransferFn, dc_gain: complex | None = 0.0) -> np.ndarray:
    """Multiply a spectrum pointwise by a transfer function.

    ``h`` is either a gain array of matching shape or a callable evaluated on
    the angular frequency grid.  ``dc_gain`` overrides the gain at (0, 0);
    pass ``None`` to keep whatever ``h`` produced there.  Gains must be
    finite everywhere else.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    n = spec.shape[0]
    if callable(h):
        u, v = frequency_grid(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.asarray(h(u, v), dtype=np.complex128)
    else:
        gain = np.asarray(h, dtype=np.complex128)
    if gain.shape != spec.shape:
        raise ShapeError(f"gain shape {gain.shape} does not match spectrum {spec.shape}")
    if dc_gain is not None:
        gain = gain.copy()
        gain[0, 0] = dc_gain
    off_dc = gain.ravel()[1:]
    if not np.all(np.isfinite(off_dc.real) & np.isfinite(off_dc.imag)):
        raise ValueError("transfer function is non-finite away from DC")
    if not (np.isfinite(gain[0, 0].real) and np.isfinite(gain[0, 0].imag)):
        raise ValueError("transfer function is non-finite at DC and no dc_gain given")
    return spec * gain


def filter_image(img: np.ndarray, h: TransferFn, dc_gain: complex | None = 0.0) -> np.ndarray:
    """Convenience: inverse_fft(apply_transfer(forward_fft(img), h))."""
    return inverse_fft(apply_transfer(forward_fft(img), h, dc_gain=dc_gain))
