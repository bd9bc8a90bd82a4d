"""Synthetic signals with ground truth, scoring metrics, and closed-form oracles.

The sample grid follows x[i, j] = (-pi + 2*pi*i/n, -pi + 2*pi*j/n), so a wave
``cos(k1*x + k2*y)`` with integer (k1, k2) occupies exactly one DFT bin pair.
All generators are deterministic given (parameters, seed); independent trials
should derive their generators from :func:`trial_rng` so results do not depend
on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import BandConditionError, ShapeError, UndefinedValueError

# ---------------------------------------------------------------------------
# grid and angle helpers


def grid_coords(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Spatial coordinates over [-pi, pi)^2; first coordinate along axis 0."""
    ax = -np.pi + 2.0 * np.pi * np.arange(n) / n
    return np.meshgrid(ax, ax, indexing="ij")


def wrap_to_pi(x: np.ndarray) -> np.ndarray:
    """Wrap angles into (-pi, pi]."""
    w = np.mod(np.asarray(x, dtype=np.float64), 2.0 * np.pi)
    return np.where(w > np.pi, w - 2.0 * np.pi, w)


def fold_phase(x: np.ndarray) -> np.ndarray:
    """Fold a phase map into [0, pi], removing the sign ambiguity of cos."""
    return np.abs(wrap_to_pi(x))


def interior_slice(n: int, margin: int) -> tuple[slice, slice]:
    """Index slices selecting the interior of an n-by-n image."""
    if 2 * margin >= n:
        raise ValueError(f"margin {margin} leaves no interior in side {n}")
    return slice(margin, n - margin), slice(margin, n - margin)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, order-insensitive generator for one trial of a sweep."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


# ---------------------------------------------------------------------------
# generators


@dataclass
class GroundTruth:
    """A synthetic image together with everything needed to score estimates."""

    image: np.ndarray                 # observed (noisy) image
    clean: np.ndarray                 # noiseless image
    phase: np.ndarray                 # true phase, wrapped to [0, 2*pi)
    orientation: np.ndarray           # true wave direction, radians mod pi
    message: Optional[np.ndarray] = None
    displacement: Optional[tuple[np.ndarray, np.ndarray]] = None


def _noisy(clean: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma == 0.0:
        return clean.copy()
    return clean + rng.normal(0.0, sigma, size=clean.shape)


def plane_wave(n: int, omega: float, theta: float, sigma: float = 0.0,
               seed: int = 0) -> GroundTruth:
    """Noisy plane wave cos(omega * (n . x)) with wrapped-phase ground truth."""
    x, y = grid_coords(n)
    raw = omega * (np.cos(theta) * x + np.sin(theta) * y)
    clean = np.cos(raw)
    rng = np.random.default_rng(seed)
    return GroundTruth(
        image=_noisy(clean, sigma, rng),
        clean=clean,
        phase=np.mod(raw, 2.0 * np.pi),
        orientation=np.full((n, n), np.mod(theta, np.pi)),
    )


def parabolic_chirp(n: int, a: float = 8.0 / np.pi, sigma: float = 0.0,
                    seed: int = 0) -> GroundTruth:
    """Radial chirp cos(a * (x^2 + y^2)); local frequency grows linearly in radius.

    The chirp rate must keep the local frequency below pi radians per sample
    everywhere on the grid, which is checked, not assumed.
    """
    x, y = grid_coords(n)
    max_freq = 2.0 * a * np.pi * np.sqrt(2.0) * (2.0 * np.pi / n)
    if max_freq >= np.pi:
        raise ValueError(
            f"chirp rate {a} aliases: edge frequency {max_freq:.3f} rad/px >= pi"
        )
    raw = a * (x * x + y * y)
    clean = np.cos(raw)
    rng = np.random.default_rng(seed)
    return GroundTruth(
        image=_noisy(clean, sigma, rng),
        clean=clean,
        phase=np.mod(raw, 2.0 * np.pi),
        orientation=np.mod(np.arctan2(y, x), np.pi),
    )


def check_band_condition(message: np.ndarray, omega_c: float) -> None:
    """Reject messages with spectral energy at or above half the carrier frequency."""
    n = message.shape[0]
    k = np.fft.fftfreq(n) * n
    ku, kv = np.meshgrid(k, k, indexing="ij")
    radius = np.hypot(ku, kv)
    power = np.abs(np.fft.fft2(message)) ** 2
    total = power.sum()
    if total == 0.0:
        return
    high = power[radius >= 0.5 * omega_c].sum()
    if high >= 0.01 * total:
        raise BandConditionError(
            f"message has {100.0 * high / total:.1f}% of its energy at "
            f"|k| >= omega_c/2 = {0.5 * omega_c:g}"
        )


def pm_signal(n: int, omega_c: float, theta_c: float, phi_c: float,
              message: np.ndarray, sigma: float = 0.0, seed: int = 0) -> GroundTruth:
    """Phase-modulated carrier cos(omega_c * (n . x) + phi_c + m(x))."""
    message = np.asarray(message, dtype=np.float64)
    if message.shape != (n, n):
        raise ShapeError(f"message shape {message.shape} does not match side {n}")
    check_band_condition(message, omega_c)
    x, y = grid_coords(n)
    raw = omega_c * (np.cos(theta_c) * x + np.sin(theta_c) * y) + phi_c + message
    clean = np.cos(raw)
    rng = np.random.default_rng(seed)
    return GroundTruth(
        image=_noisy(clean, sigma, rng),
        clean=clean,
        phase=np.mod(raw, 2.0 * np.pi),
        orientation=np.full((n, n), np.mod(theta_c, np.pi)),
        message=message.copy(),
    )


def default_message(n: int, amplitude: float = 0.5, k: int = 4) -> np.ndarray:
    """The sinusoidal message used by the demodulation benchmarks."""
    x, _ = grid_coords(n)
    return amplitude * np.cos(k * x)


def oriented_wave(n: int, k1: float, k2: float, amplitude: float = 1.0,
                  phase: float = 0.0) -> np.ndarray:
    """cos(k1*x + k2*y + phase); integer (k1, k2) give exact DFT bins."""
    x, y = grid_coords(n)
    return amplitude * np.cos(k1 * x + k2 * y + phase)


def snap_wave_vector(omega: float, theta: float) -> tuple[int, int]:
    """Round a polar wave vector to integer bins (exact on the DFT grid)."""
    k1 = int(round(omega * np.cos(theta)))
    k2 = int(round(omega * np.sin(theta)))
    if k1 == 0 and k2 == 0:
        raise ValueError(f"omega={omega}, theta={theta} rounds to the DC bin")
    return k1, k2


def deformed_fringe_pair(n: int, sigma: float = 0.0, seed: int = 0,
                         max_disp: float = 3.0, omega0: float = 24.0,
                         theta0: float = np.pi / 4.0,
                         ) -> tuple[np.ndarray, np.ndarray, GroundTruth]:
    """Fingerprint-like fringe plus a smoothly deformed, renoised copy.

    The fixed image is cos(phi) for a gently curved phase around orientation
    ``theta0``; the moving image is the fixed one warped by a smooth
    displacement directed along the local ridge normal with peak magnitude
    ``max_disp`` pixels (phase-based registration only observes that normal
    component).  Ground truth stores the correcting field d with
    moving(x + d(x)) = fixed(x), in pixels.  Noise is added to both images
    independently, after the deformation.
    """
    rng = np.random.default_rng(seed)
    q1, q2 = 2.0, 3.0
    beta1 = 0.18 * omega0 / q1
    beta2 = 0.18 * omega0 / q2
    c1, c2 = rng.uniform(0.0, 2.0 * np.pi, size=2)

    def phi(xc, yc):
        return (omega0 * (np.cos(theta0) * xc + np.sin(theta0) * yc)
                + beta1 * np.sin(q1 * xc + c1) + beta2 * np.cos(q2 * yc + c2))

    def grad_phi(xc, yc):
        gx = omega0 * np.cos(theta0) + beta1 * q1 * np.cos(q1 * xc + c1)
        gy = omega0 * np.sin(theta0) - beta2 * q2 * np.sin(q2 * yc + c2)
        return gx, gy

    x, y = grid_coords(n)
    clean_fixed = np.cos(phi(x, y))

    # smooth normal-directed displacement, in pixels
    d1, d2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
    tau = max_disp * np.sin(1.0 * x + d1) * np.sin(2.0 * y + d2)
    gx, gy = grad_phi(x, y)
    norm = np.hypot(gx, gy)
    tx_px = tau * gx / norm
    ty_px = tau * gy / norm

    # moving(x) = fixed(x + T): evaluate the analytic phase at displaced points
    step = 2.0 * np.pi / n
    clean_moving = np.cos(phi(x + tx_px * step, y + ty_px * step))

    fixed = _noisy(clean_fixed, sigma, rng)
    moving = _noisy(clean_moving, sigma, rng)
    truth = GroundTruth(
        image=fixed,
        clean=clean_fixed,
        phase=np.mod(phi(x, y), 2.0 * np.pi),
        orientation=np.mod(np.arctan2(gy, gx), np.pi),
        displacement=(-tx_px, -ty_px),
    )
    return fixed, moving, truth


# ---------------------------------------------------------------------------
# metrics

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5            # 11x11 Gaussian window
_SSIM_TRUNCATE = 10.0 / 3.0  # yields kernel radius 5 at sigma 1.5


def ssim(a: np.ndarray, b: np.ndarray, data_range: float = 2.0 * np.pi) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    ``data_range`` defaults to 2*pi because the maps compared in this package
    are wrapped phases in [0, 2*pi).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")

    def filt(img):
        return ndimage.gaussian_filter(img, SSIM_SIGMA, truncate=_SSIM_TRUNCATE)

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    smap = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
            / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)))
    r = _SSIM_RADIUS
    return float(smap[r:-r, r:-r].mean())


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation over all pixels; undefined for constant inputs."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    ssa = float(da @ da)
    ssb = float(db @ db)
    if ssa == 0.0 or ssb == 0.0:
        raise UndefinedValueError("correlation is undefined for a constant input")
    return float((da @ db) / np.sqrt(ssa * ssb))


# ---------------------------------------------------------------------------
# closed-form orientation-bias oracle


def _bias_core(a_amp, b_amp, theta, epsilon, cross, convention):
    """theta + arg(A^2 + B^2 e^{4ie} - 2AB e^{2ie} * cross) / 4.

    ``cross`` is cos(a)cos(b) + sin(e)sin(a)sin(b) for mode phases a, b; the
    whole bracket is the quarter-argument estimator's response to two crossed
    cosine modes, expanded symbolically from the per-mode component forms
    (the expansion is pinned against the measured transform in the tests).

    ``convention="principal"`` takes the single-argument arctangent of the
    imaginary/real ratio (well defined for any cross term, and yielding
    exactly theta + epsilon/2 when A == B); ``convention="arg"`` takes the
    two-argument form, which matches what the estimator actually measures,
    including the quarter-turn branch at pixels where the bracket's real
    part goes negative.
    """
    num = (b_amp * b_amp * np.sin(4.0 * epsilon)
           - 2.0 * a_amp * b_amp * np.sin(2.0 * epsilon) * cross)
    den = (a_amp * a_amp + b_amp * b_amp * np.cos(4.0 * epsilon)
           - 2.0 * a_amp * b_amp * np.cos(2.0 * epsilon) * cross)
    if convention == "principal":
        with np.errstate(divide="ignore", invalid="ignore"):
            quarter = 0.25 * np.arctan(num / den)
        quarter = np.where(np.isnan(quarter), 0.0, quarter)
    elif convention == "arg":
        quarter = 0.25 * np.arctan2(num, den)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return theta + quarter


def predicted_orientation_bias(a_amp: float, b_amp: float, theta: float,
                               epsilon: float, x1, x2, omega: float = 1.0,
                               convention: str = "principal"):
    """Closed-form orientation estimate for two crossed cosine modes.

    The modes are ``A cos(omega n . x)`` along direction ``theta`` and
    ``B cos(omega p . x)`` along the perturbed perpendicular
    ``p = (sin(theta+epsilon), -cos(theta+epsilon))``; requires
    ``|epsilon| < pi/4``.  Limits: B = 0 returns theta; A = B returns
    theta + epsilon/2 at every position; epsilon = 0 returns theta.
    """
    if abs(epsilon) >= np.pi / 4.0:
        raise ValueError(f"|epsilon| must be below pi/4, got {epsilon}")
    ka = (omega * np.cos(theta), omega * np.sin(theta))
    kb = (omega * np.sin(theta + epsilon), -omega * np.cos(theta + epsilon))
    return orientation_bias_for_vectors(a_amp, b_amp, ka, kb, x1, x2,
                                        convention=convention)


def orientation_bias_for_vectors(a_amp: float, b_amp: float,
                                 ka: tuple[float, float], kb: tuple[float, float],
                                 x1, x2, convention: str = "principal"):
    """Same closed form, parameterized by explicit wave vectors.

    Useful when the modes have been snapped to integer DFT bins: the
    effective direction and perpendicularity defect are recomputed from the
    vectors, and the cross term uses the true per-mode phases.
    """
    theta = np.arctan2(ka[1], ka[0])
    epsilon = np.arctan2(kb[1], kb[0]) + 0.5 * np.pi - theta
    epsilon = float(wrap_to_pi(epsilon))
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    pa = ka[0] * x1 + ka[1] * x2
    pb = kb[0] * x1 + kb[1] * x2
    cross = np.cos(pa) * np.cos(pb) + np.sin(epsilon) * np.sin(pa) * np.sin(pb)
    return _bias_core(a_amp, b_amp, theta, epsilon, cross, convention)
