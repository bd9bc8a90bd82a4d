"""Quality-map-driven scale selection over per-scale structure features.

Every frame band (and, for overcomplete stacks, every per-dyadic low-pass)
gets a feature set from either the structure-multivector backend or the plain
monogenic backend.  A quality function scores each scale per pixel, the scale
with the best score wins, and the winning scale's features are gathered into
one multiscale feature set.

Scales are ordered fine to coarse and ties break toward the finest scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from . import monogenic, smv, spectral, steerable
from .errors import ShapeError

QUALITY_KINDS = ("amplitude", "ovar", "product")

# Pixels whose per-scale amplitude falls below this fraction of the parent
# image's amplitude scale are excluded from orientation-variance windows:
# spectral leakage of a clean wave produces smooth (hence "coherent") but
# meaningless orientations in otherwise empty bands.
AMP_FLOOR_REL = 1e-2


@dataclass
class PerScaleFeatures:
    """Backend-normalized features of one analysis scale.

    ``theta`` is the orientation representative used for variance filtering
    (period pi/2 for the SMV backend, pi for the monogenic one, encoded by
    ``period_factor`` = angle multiplier that maps one period onto 2*pi).
    ``phase`` is signed, measured along ``wave_direction`` in [0, pi).
    """

    kind: str                 # "band" or "lowpass"
    j: int                    # subscale (0 for lowpass entries)
    s: int                    # dyadic scale, m_max = finest
    amp: np.ndarray
    phase: np.ndarray
    theta: np.ndarray
    wave_direction: np.ndarray
    minor_amp: np.ndarray
    minor_phase: np.ndarray
    invalid: np.ndarray       # orientation undefined / below amplitude floor
    var_window: int
    period_factor: int

    @property
    def label(self) -> str:
        if self.kind == "band":
            return f"band j={self.j} s={self.s}"
        return f"lowpass s={self.s}"


@dataclass
class MultiscaleFeatures:
    """Per-pixel winning scale and the features gathered from it."""

    k_map: np.ndarray
    amp: np.ndarray
    phase: np.ndarray
    theta: np.ndarray
    minor_amp: np.ndarray
    minor_phase: np.ndarray
    wave_direction: np.ndarray
    quality: np.ndarray       # winning quality value per pixel
    labels: list[str]         # index -> human-readable scale name


def variance_window(s: int, m_max: int, lowpass: bool = False) -> int:
    """Orientation-variance window: twice the scale wavelength, forced odd.

    Dyadic scale ``s`` has wavelength 2 * 2**(m_max - s) samples; the low-pass
    at that scale holds coarser content and gets the next scale's window.
    """
    d = m_max - s + (1 if lowpass else 0)
    return 4 * 2 ** d + 1


def _amp_floor(energy_scale: float) -> float:
    # amplitude scale of a unit-amplitude wave with mean energy E is sqrt(2E)
    return AMP_FLOOR_REL * np.sqrt(2.0 * energy_scale)


def _smv_scale(kind, j, s, spec_band, window, energy_scale):
    feats = smv.features_from_field(smv.transform_from_spectrum(spec_band),
                                    energy_scale=energy_scale)
    invalid = feats.theta.undefined | (feats.major_amp <= _amp_floor(energy_scale))
    return PerScaleFeatures(
        kind=kind, j=j, s=s,
        amp=feats.major_amp,
        phase=feats.major_phase,
        theta=feats.theta.theta,
        wave_direction=feats.wave_direction,
        minor_amp=feats.minor_amp,
        minor_phase=feats.minor_phase,
        invalid=invalid,
        var_window=window,
        period_factor=4,
    )


def _mono_scale(kind, j, s, spec_band, window, energy_scale):
    band = spectral.ifft_real(spec_band)
    r1, r2 = monogenic.riesz_from_spectrum(spec_band)
    feats = monogenic.features_from_parts(band, r1, r2,
                                          amp_scale=np.sqrt(2.0 * energy_scale))
    # canonical direction in [0, pi); flips of the Riesz vector negate the phase
    positive = (feats.orientation >= 0.0) & (feats.orientation < np.pi)
    signed_phase = np.where(positive, feats.phase, -feats.phase)
    invalid = feats.low_amplitude_mask | (feats.amplitude <= _amp_floor(energy_scale))
    return PerScaleFeatures(
        kind=kind, j=j, s=s,
        amp=feats.amplitude,
        phase=signed_phase,
        theta=np.mod(feats.orientation, np.pi),
        wave_direction=np.mod(feats.orientation, np.pi),
        minor_amp=np.zeros_like(feats.amplitude),
        minor_phase=np.zeros_like(feats.amplitude),
        invalid=invalid,
        var_window=window,
        period_factor=2,
    )


def scale_features(f: np.ndarray, frame: steerable.FrameSpec,
                   backend: str = "smv") -> list[PerScaleFeatures]:
    """Feature sets for every analysis scale of ``f``, fine to coarse.

    Bands come first; with ``frame.overcomplete`` the per-dyadic low-pass
    images follow, again fine to coarse.
    """
    if backend not in ("smv", "ms"):
        raise ValueError(f"unknown backend {backend!r}")
    f = spectral.ensure_pow2_image(f)
    bank = steerable.design_filters(frame, f.shape[0])
    fhat = spectral.forward_fft(f)
    build = _smv_scale if backend == "smv" else _mono_scale
    energy_scale = float(np.mean(f * f))

    out = []
    for (j, s), w in zip(bank.band_labels, bank.band_windows):
        win = variance_window(s, frame.m_max)
        out.append(build("band", j, s, w * fhat, win, energy_scale))
    if frame.overcomplete:
        for s, w in bank.lowpass_windows:
            win = variance_window(s, frame.m_max, lowpass=True)
            out.append(build("lowpass", 0, s, w * fhat, win, energy_scale))
    return out


# ---------------------------------------------------------------------------
# quality maps


def _box_mean(x: np.ndarray, size: int) -> np.ndarray:
    return ndimage.uniform_filter(x, size=size, mode="constant", cval=0.0)


def circular_variance_quality(theta: np.ndarray, period_factor: int, window: int,
                              exclude: Optional[np.ndarray] = None) -> np.ndarray:
    """1 / (1 + V) with V the windowed circular variance of the orientation.

    The angle is multiplied by ``period_factor`` so its period maps onto a
    full turn, then V = 1 - |windowed mean unit vector|.  Excluded pixels get
    zero weight; windows are clipped at the image edges.  A window with no
    valid pixels counts as fully incoherent (V = 1).
    """
    if window % 2 == 0:
        raise ValueError(f"window size must be odd, got {window}")
    ang = period_factor * theta
    weight = np.ones_like(theta) if exclude is None else (~exclude).astype(np.float64)
    mc = _box_mean(weight * np.cos(ang), window)
    ms = _box_mean(weight * np.sin(ang), window)
    mw = _box_mean(weight, window)
    rbar = np.zeros_like(mw)
    ok = mw > 1e-12
    rbar[ok] = np.hypot(mc[ok], ms[ok]) / mw[ok]
    v = 1.0 - np.clip(rbar, 0.0, 1.0)
    return 1.0 / (1.0 + v)


def amplitude_quality(stack: list[PerScaleFeatures]) -> list[np.ndarray]:
    """Q per scale = that scale's (major) amplitude."""
    if not stack:
        raise ValueError("empty feature stack")
    return [ps.amp for ps in stack]


def orientation_variance_quality(stack: list[PerScaleFeatures],
                                 windows: Optional[list[int]] = None
                                 ) -> list[np.ndarray]:
    """Q per scale from the windowed circular variance of its orientation."""
    if not stack:
        raise ValueError("empty feature stack")
    if windows is None:
        windows = [ps.var_window for ps in stack]
    if len(windows) != len(stack):
        raise ValueError("one window size per scale required")
    return [
        circular_variance_quality(ps.theta, ps.period_factor, w, exclude=ps.invalid)
        for ps, w in zip(stack, windows)
    ]


def product_quality(amp: list[np.ndarray], ovar: list[np.ndarray]) -> list[np.ndarray]:
    """Pointwise product of amplitude and orientation-variance qualities."""
    if len(amp) != len(ovar):
        raise ShapeError(f"{len(amp)} amplitude maps vs {len(ovar)} variance maps")
    out = []
    for qa, qv in zip(amp, ovar):
        if qa.shape != qv.shape:
            raise ShapeError(f"shape mismatch {qa.shape} vs {qv.shape}")
        out.append(qa * qv)
    return out


def quality_maps(stack: list[PerScaleFeatures], kind: str) -> list[np.ndarray]:
    """Quality maps of the requested kind for every scale in the stack."""
    if kind == "amplitude":
        return amplitude_quality(stack)
    if kind in ("ovar", "orientation_variance"):
        return orientation_variance_quality(stack)
    if kind == "product":
        return product_quality(amplitude_quality(stack),
                               orientation_variance_quality(stack))
    raise ValueError(f"unknown quality kind {kind!r}")


# ---------------------------------------------------------------------------
# selection


def select(stack: list[PerScaleFeatures], qualities: list[np.ndarray]
           ) -> MultiscaleFeatures:
    """Per-pixel argmax over scales; ties go to the earliest (finest) scale."""
    if not stack:
        raise ValueError("empty feature stack")
    if len(qualities) != len(stack):
        raise ValueError("one quality map per scale required")
    q = np.stack(qualities)
    k_map = np.argmax(q, axis=0)
    sel = k_map[None]

    def gather(field):
        return np.take_along_axis(np.stack(field), sel, axis=0)[0]

    return MultiscaleFeatures(
        k_map=k_map,
        amp=gather([ps.amp for ps in stack]),
        phase=gather([ps.phase for ps in stack]),
        theta=gather([ps.theta for ps in stack]),
        minor_amp=gather([ps.minor_amp for ps in stack]),
        minor_phase=gather([ps.minor_phase for ps in stack]),
        wave_direction=gather([ps.wave_direction for ps in stack]),
        quality=np.take_along_axis(q, sel, axis=0)[0],
        labels=[ps.label for ps in stack],
    )


def multiscale_features(f: np.ndarray, frame: steerable.FrameSpec,
                        backend: str = "smv", quality: str = "product"
                        ) -> MultiscaleFeatures:
    """One-call pipeline: decompose, score, select."""
    stack = scale_features(f, frame, backend=backend)
    return select(stack, quality_maps(stack, quality))
