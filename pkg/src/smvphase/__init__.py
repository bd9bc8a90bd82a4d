"""Multiscale spatial phase estimation with the structure multivector.

A numpy/scipy library for monogenic and structure-multivector signal
analysis on square images: isotropic tight wavelet frames, quality-driven
scale selection, 2D phase demodulation and fine-scale fringe registration,
plus synthetic benchmarks with ground truth.
"""

from . import (
    clifford,
    demod,
    fileio,
    monogenic,
    multiscale,
    register,
    smv,
    spectral,
    steerable,
    synthlab,
)
from .demod import CarrierSpec, DemodResult, demodulate, estimate_carrier
from .monogenic import IapMono, monogenic_features, riesz
from .multiscale import MultiscaleFeatures, multiscale_features, scale_features
from .register import DisplacementField, RegistrationReport, register_pair
from .smv import IapFeatures, SmvField, smv_features, smv_transform
from .steerable import FrameSpec, ScaleStack, decompose, reconstruct
from .synthlab import (
    GroundTruth,
    correlation,
    deformed_fringe_pair,
    parabolic_chirp,
    plane_wave,
    pm_signal,
    predicted_orientation_bias,
    ssim,
)

__version__ = "0.1.0"

__all__ = [
    "CarrierSpec",
    "DemodResult",
    "DisplacementField",
    "FrameSpec",
    "GroundTruth",
    "IapFeatures",
    "IapMono",
    "MultiscaleFeatures",
    "RegistrationReport",
    "ScaleStack",
    "SmvField",
    "clifford",
    "correlation",
    "decompose",
    "deformed_fringe_pair",
    "demod",
    "demodulate",
    "estimate_carrier",
    "fileio",
    "monogenic",
    "monogenic_features",
    "multiscale",
    "multiscale_features",
    "parabolic_chirp",
    "plane_wave",
    "pm_signal",
    "predicted_orientation_bias",
    "reconstruct",
    "register",
    "register_pair",
    "riesz",
    "scale_features",
    "smv",
    "smv_features",
    "smv_transform",
    "spectral",
    "ssim",
    "steerable",
    "synthlab",
]
