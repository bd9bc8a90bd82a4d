"""Riesz transform and the monogenic amplitude/orientation/phase triple.

The Riesz pair uses the frequency response ``-i * u_k / |u|`` (DC gain 0),
which turns a cosine into a positive sine along the wave direction.  That
sign convention is fixed here once and everything downstream (the structure
field, demodulation) is built against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral

# Orientation is meaningless where the odd energy is this far below the peak
# amplitude; every consumer gets the mask instead of garbage angles.
LOW_AMPLITUDE_REL = 1e-3


@dataclass
class IapMono:
    """Per-pixel monogenic features of one image or band.

    amplitude is >= 0 everywhere, phase lies in [0, pi] (two-argument
    arctangent of (|Rf|, f)), orientation is atan2(r2, r1) and only
    meaningful where ``low_amplitude_mask`` is clear.
    """

    amplitude: np.ndarray
    orientation: np.ndarray
    phase: np.ndarray
    low_amplitude_mask: np.ndarray


def riesz_multipliers(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequency responses (-i u/|u|, -i v/|u|) with DC forced to 0."""
    u, v = spectral.frequency_grid(n)
    r = np.hypot(u, v)
    r[0, 0] = 1.0
    m1 = -1j * u / r
    m2 = -1j * v / r
    m1[0, 0] = 0.0
    m2[0, 0] = 0.0
    return m1, m2


def riesz(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both Riesz components of a square real image."""
    f = spectral.ensure_real_image(f)
    spec = spectral.forward_fft(f)
    return riesz_from_spectrum(spec)


def riesz_from_spectrum(spec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m1, m2 = riesz_multipliers(spec.shape[0])
    r1 = spectral.ifft_real(spec * m1)
    r2 = spectral.ifft_real(spec * m2)
    return r1, r2


def monogenic_features(f: np.ndarray) -> IapMono:
    """Amplitude, orientation and phase of the monogenic extension of ``f``."""
    f = spectral.ensure_real_image(f)
    r1, r2 = riesz(f)
    return features_from_parts(f, r1, r2)


def features_from_parts(f: np.ndarray, r1: np.ndarray, r2: np.ndarray,
                        amp_scale: float | None = None) -> IapMono:
    """Assemble the feature triple from the image and its Riesz pair.

    ``amp_scale`` overrides the amplitude reference for the low-amplitude
    mask (band images in a multiscale stack pass their parent image's scale).
    """
    odd = np.hypot(r1, r2)
    amplitude = np.sqrt(f * f + odd * odd)
    orientation = np.arctan2(r2, r1)
    phase = np.arctan2(odd, f)
    if amp_scale is None:
        amp_scale = float(amplitude.max())
    mask = odd <= LOW_AMPLITUDE_REL * amp_scale
    return IapMono(amplitude, orientation, phase, mask)
