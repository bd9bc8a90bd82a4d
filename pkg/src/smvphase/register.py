"""Fine-scale deformable registration by phase differencing.

Given a coarsely registered pair, both images get a multiscale phase; the
wrapped difference, locally unwrapped and divided by a local frequency
estimate, gives a displacement along the local ridge normal.  Warping the
moving image by that field aligns it to the fixed one.  No global phase
unwrapping is attempted anywhere.

Sign convention: with ``delta = phase(fixed) - phase(moving)`` the recovered
field d is the *correcting* one, i.e. sampling the moving image at
``x + d(x)`` reproduces the fixed image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from . import multiscale, spectral, steerable, synthlab
from .errors import ShapeError

OMEGA_MIN = 2.0 * np.pi / 64.0    # rad/px floor for the local frequency
DEFAULT_UNWRAP_WINDOW = 9
DEFAULT_MASK_PERCENTILE = 60.0


@dataclass
class DisplacementField:
    """Per-pixel displacement in pixels, zero outside the quality mask."""

    dx: np.ndarray
    dy: np.ndarray
    mask: np.ndarray


@dataclass
class RegistrationReport:
    corr_before: float
    corr_after: float
    mask_coverage: float
    displacement_rms: Optional[float] = None


def phase_pair(fixed: np.ndarray, moving: np.ndarray, frame: steerable.FrameSpec,
               quality: str = "product", backend: str = "smv"
               ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Multiscale phases of both images, plus the fixed image's direction and
    winning quality map."""
    fixed = spectral.ensure_pow2_image(fixed)
    moving = spectral.ensure_pow2_image(moving)
    if fixed.shape != moving.shape:
        raise ShapeError(f"shape mismatch {fixed.shape} vs {moving.shape}")
    ff = multiscale.multiscale_features(fixed, frame, backend=backend, quality=quality)
    fm = multiscale.multiscale_features(moving, frame, backend=backend, quality=quality)
    return ff.phase, fm.phase, ff.wave_direction, ff.quality


def wrapped_difference(phase_fixed: np.ndarray, phase_moving: np.ndarray) -> np.ndarray:
    """Phase difference wrapped into (-pi, pi]."""
    return synthlab.wrap_to_pi(np.asarray(phase_fixed) - np.asarray(phase_moving))


def windowed_unwrap(delta: np.ndarray, window: int = DEFAULT_UNWRAP_WINDOW) -> np.ndarray:
    """Re-express each pixel consistently with its local circular mean.

    Every output value equals the input modulo 2*pi and lies within pi of the
    windowed circular mean around it, which removes 2*pi jumps from any
    locally smooth field.  Global consistency is not promised (and not
    needed: the consumers only take local derivatives).
    """
    if window % 2 == 0:
        raise ValueError(f"window size must be odd, got {window}")
    mc = ndimage.uniform_filter(np.cos(delta), size=window, mode="reflect")
    ms = ndimage.uniform_filter(np.sin(delta), size=window, mode="reflect")
    ref = np.arctan2(ms, mc)
    return ref + synthlab.wrap_to_pi(delta - ref)


def local_frequency(phase_src: np.ndarray, theta: np.ndarray,
                    window: int = DEFAULT_UNWRAP_WINDOW,
                    omega_min: float = OMEGA_MIN) -> np.ndarray:
    """Directional derivative of the locally unwrapped phase, rad/px.

    Central differences of the windowed-unwrapped phase, re-wrapped so a
    2*pi seam never produces a spike, projected on (cos theta, sin theta)
    and clamped below at ``omega_min`` (the displacement formula divides by
    this map).
    """
    pu = windowed_unwrap(phase_src, window)
    gx = synthlab.wrap_to_pi(np.roll(pu, -1, axis=0) - np.roll(pu, 1, axis=0)) / 2.0
    gy = synthlab.wrap_to_pi(np.roll(pu, -1, axis=1) - np.roll(pu, 1, axis=1)) / 2.0
    omega = np.abs(gx * np.cos(theta) + gy * np.sin(theta))
    return np.maximum(omega, omega_min)


def displacement(delta_u: np.ndarray, omega_map: np.ndarray, theta: np.ndarray,
                 q: np.ndarray, q_threshold: float) -> DisplacementField:
    """Displacement along the local orientation where quality clears the bar."""
    shapes = {np.shape(a) for a in (delta_u, omega_map, theta, q)}
    if len(shapes) != 1:
        raise ShapeError(f"misaligned inputs: {sorted(shapes)}")
    mask = q >= q_threshold
    mag = np.where(mask, delta_u / omega_map, 0.0)
    return DisplacementField(dx=mag * np.cos(theta), dy=mag * np.sin(theta), mask=mask)


def warp(moving: np.ndarray, d: DisplacementField) -> np.ndarray:
    """Bilinear resampling of ``moving`` at x + d(x); edge-clamped reads."""
    n = moving.shape[0]
    i, j = np.meshgrid(np.arange(n, dtype=np.float64),
                       np.arange(n, dtype=np.float64), indexing="ij")
    return ndimage.map_coordinates(moving, [i + d.dx, j + d.dy],
                                   order=1, mode="nearest")


def assess(fixed: np.ndarray, moving: np.ndarray, registered: np.ndarray,
           field: DisplacementField,
           truth: Optional[tuple[np.ndarray, np.ndarray]] = None
           ) -> RegistrationReport:
    """Masked correlations before/after, plus displacement RMS if truth given."""
    mask = field.mask
    corr_before = synthlab.correlation(fixed[mask], moving[mask])
    corr_after = synthlab.correlation(fixed[mask], registered[mask])
    rms = None
    if truth is not None:
        tdx, tdy = truth
        err2 = (field.dx - tdx) ** 2 + (field.dy - tdy) ** 2
        rms = float(np.sqrt(err2[mask].mean()))
    return RegistrationReport(
        corr_before=float(corr_before),
        corr_after=float(corr_after),
        mask_coverage=float(mask.mean()),
        displacement_rms=rms,
    )


def register_pair(fixed: np.ndarray, moving: np.ndarray,
                  frame: Optional[steerable.FrameSpec] = None,
                  quality: str = "product", backend: str = "smv",
                  mask_percentile: float = DEFAULT_MASK_PERCENTILE,
                  freq_source: str = "fixed",
                  unwrap_window: int = DEFAULT_UNWRAP_WINDOW,
                  truth: Optional[tuple[np.ndarray, np.ndarray]] = None
                  ) -> tuple[DisplacementField, np.ndarray, RegistrationReport]:
    """One-shot registration of a coarsely aligned pair.

    ``freq_source`` selects where the local frequency comes from: "fixed"
    (default) differentiates the fixed image's ridge phase, which is the
    frequency the displacement formula divides by; "delta" differentiates
    the phase difference itself, the literal windowed-unwrapping route.
    """
    fixed = spectral.ensure_pow2_image(fixed)
    if frame is None:
        frame = steerable.FrameSpec.for_side(fixed.shape[0], overcomplete=True)
    if freq_source not in ("fixed", "delta"):
        raise ValueError(f"unknown freq_source {freq_source!r}")

    phi_f, phi_m, theta, q = phase_pair(fixed, moving, frame,
                                        quality=quality, backend=backend)
    delta = wrapped_difference(phi_f, phi_m)
    delta_u = windowed_unwrap(delta, unwrap_window)
    src = phi_f if freq_source == "fixed" else delta
    omega = local_frequency(src, theta, unwrap_window)
    threshold = float(np.percentile(q, mask_percentile))
    field = displacement(delta_u, omega, theta, q, threshold)
    registered = warp(moving, field)
    report = assess(fixed, moving, registered, field, truth=truth)
    return field, registered, report
