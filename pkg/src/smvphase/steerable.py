"""Isotropic tight wavelet frames with dyadic scales and subscales.

The radial windows are raised-cosine (Meyer/Simoncelli style) with smooth-step
transitions, one transition per cut radius, so that the squared windows form a
partition of unity on the whole frequency grid.  That partition, not the exact
window shape, is the contract everything downstream relies on: it gives exact
reconstruction by the adjoint and makes band energies sum to the image energy.

Scale layout for an image of side ``2**m_max`` with ``k_sub`` subscales:

* cut radii ``pi * 2**(-m / k_sub)`` for ``m = 0 .. (D + 1) * k_sub - 1``
  with ``D = m_max - m_min``;
* band ``m`` peaks exactly at cut ``m`` and is supported one sub-octave to
  each side; band 0 additionally covers everything above ``pi`` (grid
  corners);
* the approximation band is the final low-pass.

Band ``m`` belongs to dyadic scale ``s = m_max - m // k_sub`` (so ``s = m_max``
is the finest scale, peak radius ``pi / 2**(m_max - s)``) and subscale
``j = m % k_sub + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import spectral
from .errors import ShapeError


@dataclass(frozen=True)
class FrameSpec:
    """Parameters of one frame decomposition."""

    m_min: int = 3
    m_max: int = 8
    k_sub: int = 1
    overcomplete: bool = False

    def __post_init__(self):
        if self.m_min < 1:
            raise ValueError("m_min must be >= 1")
        if self.m_min > self.m_max:
            raise ValueError(f"m_min={self.m_min} exceeds m_max={self.m_max}")
        if self.k_sub < 1:
            raise ValueError("k_sub must be >= 1")

    @classmethod
    def for_side(cls, n: int, m_min: int = 3, k_sub: int = 1,
                 overcomplete: bool = False) -> "FrameSpec":
        """Spec whose largest dyadic scale matches an n-by-n image."""
        if not spectral.is_power_of_two(n):
            raise ShapeError(f"side length {n} is not a power of two")
        return cls(m_min=m_min, m_max=int(np.log2(n)), k_sub=k_sub,
                   overcomplete=overcomplete)

    @property
    def side(self) -> int:
        return 2 ** self.m_max

    @property
    def n_dyadic(self) -> int:
        return self.m_max - self.m_min + 1

    @property
    def n_bands(self) -> int:
        return self.n_dyadic * self.k_sub


class Band(NamedTuple):
    j: int          # subscale index, 1..K
    s: int          # dyadic scale, m_min..m_max (m_max = finest)
    image: np.ndarray


class Lowpass(NamedTuple):
    s: int          # dyadic scale whose cumulative low-pass this is
    image: np.ndarray


@dataclass
class ScaleStack:
    """Frame coefficients of one image: bands, approximation, optional extras.

    ``bands`` are ordered fine to coarse.  ``extras`` hold the cumulative
    low-pass image per dyadic scale (analysis-only, never reconstructed).
    """

    bands: list[Band]
    approx: np.ndarray
    extras: Optional[list[Lowpass]] = None

    @property
    def side(self) -> int:
        return self.approx.shape[0]


@dataclass
class FilterBank:
    """Frequency-domain windows realizing a FrameSpec at a given side length."""

    spec: FrameSpec
    band_windows: list[np.ndarray]
    band_labels: list[tuple[int, int]]   # (j, s) per band
    approx_window: np.ndarray
    lowpass_windows: list[tuple[int, np.ndarray]]   # (s, window) per dyadic scale

    def all_windows(self) -> list[np.ndarray]:
        return self.band_windows + [self.approx_window]


def _smooth_step(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _edge_pair(r: np.ndarray, cut: float, k_sub: int) -> tuple[np.ndarray, np.ndarray]:
    """Complementary (low, high) edges with cos^2 + sin^2 = 1 at one cut.

    The low edge passes r <= cut * 2**(-1/k_sub) and vanishes at r >= cut;
    the transition occupies one sub-octave in log radius.
    """
    with np.errstate(divide="ignore"):
        t = k_sub * np.log2(r / cut) + 1.0
    s = 0.5 * np.pi * _smooth_step(t)
    return np.cos(s), np.sin(s)


def design_filters(spec: FrameSpec, n: int) -> FilterBank:
    """Radial window maps for ``spec`` on an n-by-n grid (cached)."""
    if n != spec.side:
        raise ShapeError(f"side {n} does not match 2**m_max = {spec.side}")
    return _design_cached(n, spec.m_min, spec.m_max, spec.k_sub)


@lru_cache(maxsize=32)
def _design_cached(n: int, m_min: int, m_max: int, k_sub: int) -> FilterBank:
    spec = FrameSpec(m_min=m_min, m_max=m_max, k_sub=k_sub)
    u, v = spectral.frequency_grid(n)
    r = np.hypot(u, v)

    cuts = [np.pi * 2.0 ** (-m / k_sub) for m in range(spec.n_bands)]
    lows = []
    highs = []
    for c in cuts:
        lo, hi = _edge_pair(r, c, k_sub)
        lows.append(lo)
        highs.append(hi)

    windows = [highs[0]]
    for m in range(1, spec.n_bands):
        windows.append(highs[m] * lows[m - 1])
    approx = lows[-1]

    labels = [(m % k_sub + 1, m_max - m // k_sub) for m in range(spec.n_bands)]
    lowpass = []
    for d in range(spec.n_dyadic):
        idx = (d + 1) * k_sub - 1
        lowpass.append((m_max - d, lows[idx]))
    return FilterBank(spec, windows, labels, approx, lowpass)


def decompose(f: np.ndarray, spec: FrameSpec) -> ScaleStack:
    """Analyze ``f`` into the frame bands (plus extras if overcomplete)."""
    f = spectral.ensure_pow2_image(f)
    if f.shape[0] != spec.side:
        raise ShapeError(f"image side {f.shape[0]} does not match 2**m_max = {spec.side}")
    bank = design_filters(spec, f.shape[0])
    fhat = spectral.forward_fft(f)
    bands = [
        Band(j, s, spectral.ifft_real(w * fhat))
        for (j, s), w in zip(bank.band_labels, bank.band_windows)
    ]
    approx = spectral.ifft_real(bank.approx_window * fhat)
    extras = None
    if spec.overcomplete:
        extras = [
            Lowpass(s, spectral.ifft_real(w * fhat))
            for s, w in bank.lowpass_windows
        ]
    return ScaleStack(bands, approx, extras)


def reconstruct(stack: ScaleStack) -> np.ndarray:
    """Adjoint synthesis; exact up to floating point for tight frames."""
    n = stack.side
    shapes = {b.image.shape for b in stack.bands} | {stack.approx.shape}
    if shapes != {(n, n)}:
        raise ShapeError(f"inconsistent band shapes: {sorted(shapes)}")
    m_max = max(b.s for b in stack.bands)
    m_min = min(b.s for b in stack.bands)
    k_sub = max(b.j for b in stack.bands)
    spec = FrameSpec(m_min=m_min, m_max=m_max, k_sub=k_sub)
    bank = design_filters(spec, n)
    if len(bank.band_windows) != len(stack.bands):
        raise ShapeError(
            f"stack has {len(stack.bands)} bands, spec implies {len(bank.band_windows)}"
        )
    acc = bank.approx_window * spectral.forward_fft(stack.approx)
    for band, w in zip(stack.bands, bank.band_windows):
        acc += w * spectral.forward_fft(band.image)
    return spectral.inverse_fft(acc)
