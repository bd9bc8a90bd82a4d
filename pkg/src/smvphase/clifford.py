"""Minimal Cl3 blade arithmetic.

Just enough geometric algebra to express the seven-component structure field,
the {1, e12} complex plane, and to verify component routing in tests.  The
basis is ordered ``(1, e1, e2, e3, e23, e31, e12, e123)`` with
``e_i e_j + e_j e_i = 2 delta_ij``; note the bivectors use the cyclic
orientation ``e23 = e2 e3``, ``e31 = e3 e1``, ``e12 = e1 e2``.

The full 8x8 product is realized as a precomputed sign/blade tensor rather
than symbolic expansion, so it is constant-time and exhaustively testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UndefinedValueError

BLADE_NAMES = ("1", "e1", "e2", "e3", "e23", "e31", "e12", "e123")

# Bitmask per basis blade (bit k set <=> e_{k+1} present) and the sign of the
# declared orientation relative to the ascending-index product; e31 = e3 e1
# is the reverse of e1 e3, hence the -1.
_BLADE_MASKS = (0b000, 0b001, 0b010, 0b100, 0b110, 0b101, 0b011, 0b111)
_CANON_SIGNS = (1, 1, 1, 1, 1, -1, 1, 1)
_MASK_TO_INDEX = {m: i for i, m in enumerate(_BLADE_MASKS)}


def _build_product_table() -> np.ndarray:
    """Dense (8, 8, 8) tensor T with (a b)_k = sum_ij a_i b_j T[i, j, k]."""
    table = np.zeros((8, 8, 8))
    for i, (ma, ca) in enumerate(zip(_BLADE_MASKS, _CANON_SIGNS)):
        for j, (mb, cb) in enumerate(zip(_BLADE_MASKS, _CANON_SIGNS)):
            # Reorder the concatenation e_a e_b: each generator of a must hop
            # over the lower generators of b it passes; duplicates square to 1.
            sign = 1
            a_rem = ma
            while a_rem:
                k = a_rem.bit_length() - 1
                a_rem &= ~(1 << k)
                hop = mb & ((1 << k) - 1)
                sign *= -1 if bin(hop).count("1") % 2 else 1
            mr = ma ^ mb
            r = _MASK_TO_INDEX[mr]
            table[i, j, r] = sign * ca * cb * _CANON_SIGNS[r]
    return table


PRODUCT_TABLE = _build_product_table()


@dataclass
class Multivector:
    """A Cl3 element as eight real coefficients in blade order."""

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(8))

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (8,):
            raise ValueError("a multivector has exactly 8 blade coefficients")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("blade coefficients must be finite")

    @classmethod
    def blade(cls, name: str, value: float = 1.0) -> "Multivector":
        c = np.zeros(8)
        c[BLADE_NAMES.index(name)] = value
        return cls(c)

    def __getitem__(self, name: str) -> float:
        return float(self.coeffs[BLADE_NAMES.index(name)])

    def __add__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return Multivector(self.coeffs * float(other))

    __rmul__ = __mul__

    def __repr__(self):
        terms = [
            f"{c:+g}*{n}" for c, n in zip(self.coeffs, BLADE_NAMES) if c != 0.0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    """Bilinear Cl3 product under the anticommutation relations."""
    return Multivector(np.einsum("i,j,ijk->k", a.coeffs, b.coeffs, PRODUCT_TABLE))


@dataclass
class PlaneComplex:
    """The value re + im * I2 with I2 = e12, the plane where I2**2 = -1."""

    re: float
    im: float

    def __mul__(self, other: "PlaneComplex") -> "PlaneComplex":
        return PlaneComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def as_multivector(self) -> Multivector:
        c = np.zeros(8)
        c[0] = self.re
        c[BLADE_NAMES.index("e12")] = self.im
        return Multivector(c)


def arg(z: PlaneComplex) -> float:
    """Two-argument arctangent of (im, re), in (-pi, pi].  Undefined at 0."""
    if z.re == 0.0 and z.im == 0.0:
        raise UndefinedValueError("argument of the zero element is undefined")
    return math.atan2(z.im, z.re)
