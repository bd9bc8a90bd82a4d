"""2D phase demodulation: recover a message from a phase-modulated image.

The message estimate is the multiscale major phase minus the known carrier
ramp.  The raw quadrature phase is measured along each pixel's canonical
direction (an angle mod pi), so before subtracting the signed ramp the phase
sign is flipped wherever that direction points against the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import multiscale, spectral, steerable, synthlab
from .errors import AmbiguousPeakError, UndefinedValueError


@dataclass
class CarrierSpec:
    """Known carrier wave: frequency, direction, phase offset."""

    omega_c: float
    theta_c: float = 0.0
    phi_c: float = 0.0

    def __post_init__(self):
        if not self.omega_c > 0.0:
            raise ValueError(f"carrier frequency must be positive, got {self.omega_c}")

    def ramp(self, n: int) -> np.ndarray:
        x, y = synthlab.grid_coords(n)
        return (self.omega_c * (np.cos(self.theta_c) * x + np.sin(self.theta_c) * y)
                + self.phi_c)


@dataclass
class DemodResult:
    message_est: np.ndarray   # wrapped to (-pi, pi]
    quality_kind: str
    k_map: np.ndarray


def align_phase_to_direction(phase: np.ndarray, direction: np.ndarray,
                             target_theta: float) -> np.ndarray:
    """Negate the phase wherever ``direction`` points against ``target_theta``.

    ``direction`` is the mod-pi angle along which ``phase`` was measured;
    negating the phase re-measures it along direction + pi.
    """
    flip = np.cos(direction - target_theta) < 0.0
    return np.where(flip, -phase, phase)


def demodulate(pm: np.ndarray, carrier: CarrierSpec,
               frame: Optional[steerable.FrameSpec] = None,
               quality: str = "product", backend: str = "smv") -> DemodResult:
    """Recover the message of a PM image given its carrier.

    The overcomplete feature set is on by default: phase modulation spreads
    energy into neighbouring bands and the extra low-pass scales keep the
    estimate usable there.
    """
    pm = spectral.ensure_pow2_image(pm)
    n = pm.shape[0]
    if frame is None:
        frame = steerable.FrameSpec.for_side(n, overcomplete=True)
    feats = multiscale.multiscale_features(pm, frame, backend=backend, quality=quality)
    aligned = align_phase_to_direction(feats.phase, feats.wave_direction,
                                       carrier.theta_c)
    message = synthlab.wrap_to_pi(aligned - carrier.ramp(n))
    return DemodResult(message_est=message, quality_kind=quality, k_map=feats.k_map.copy())


def estimate_carrier(pm: np.ndarray) -> CarrierSpec:
    """Advisory carrier estimate from the dominant non-DC spectral peak.

    Raises if there is no non-DC energy or if a second, unrelated bin comes
    within 1% of the peak magnitude.  On noise-like inputs the result is
    meaningless and callers must treat it as advisory.
    """
    pm = spectral.ensure_real_image(pm)
    n = pm.shape[0]
    spec = spectral.forward_fft(pm)
    mag = np.abs(spec)
    mag[0, 0] = 0.0
    peak = float(mag.max())
    if peak == 0.0:
        raise UndefinedValueError("image has no non-DC spectral energy")
    i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)

    k = np.fft.fftfreq(n) * n
    k1, k2 = float(k[i]), float(k[j])
    # canonical representative with direction in [0, pi)
    angle = np.arctan2(k2, k1)
    if not (0.0 <= angle < np.pi):
        k1, k2 = -k1, -k2
        i, j = (-i) % n, (-j) % n
        angle = np.arctan2(k2, k1)

    # mask the peak, its conjugate, and their leakage neighbours, then look
    # for an unrelated runner-up
    masked = mag.copy()
    for ci, cj in ((i, j), ((-i) % n, (-j) % n)):
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                masked[(ci + di) % n, (cj + dj) % n] = 0.0
    runner = float(masked.max())
    if runner >= 0.99 * peak:
        raise AmbiguousPeakError(
            f"two unrelated spectral peaks within 1%: {peak:.4g} vs {runner:.4g}"
        )

    omega_c = float(np.hypot(k1, k2))
    # cos(k . x + phi) on the [-pi, pi) grid puts exp(i phi') at bin k with
    # phi' = phi - (k1 + k2) * pi from the grid's origin offset
    phi = float(np.angle(spec[i, j]) + (k1 + k2) * np.pi)
    phi = float(synthlab.wrap_to_pi(phi))
    return CarrierSpec(omega_c=omega_c, theta_c=float(angle), phi_c=phi)
