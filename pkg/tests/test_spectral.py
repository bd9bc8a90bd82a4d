import numpy as np
import pytest

from smvphase import spectral
from smvphase.errors import ConjugateSymmetryError, ShapeError


def brute_force_dft2(img):
    """O(n^4) reference DFT, kept deliberately independent of numpy.fft."""
    n = img.shape[0]
    out = np.zeros((n, n), dtype=complex)
    idx = np.arange(n)
    for k1 in range(n):
        for k2 in range(n):
            w = np.exp(-2j * np.pi * (k1 * idx[:, None] + k2 * idx[None, :]) / n)
            out[k1, k2] = (img * w).sum()
    return out


def test_forward_fft_constant():
    n = 16
    c = 2.5
    spec = spectral.forward_fft(np.full((n, n), c))
    assert spec[0, 0] == pytest.approx(c * n * n)
    rest = spec.copy()
    rest[0, 0] = 0.0
    assert np.abs(rest).max() < 1e-9


def test_forward_fft_delta():
    n = 8
    img = np.zeros((n, n))
    img[0, 0] = 1.0
    assert np.allclose(spectral.forward_fft(img), np.ones((n, n)))


def test_forward_fft_cosine_two_bins():
    n = 64
    i = np.arange(n)
    img = np.cos(2 * np.pi * 4 * i / n)[:, None] * np.ones((1, n))
    spec = spectral.forward_fft(img)
    mag = np.abs(spec)
    expected = np.zeros((n, n))
    expected[4, 0] = expected[n - 4, 0] = n * n / 2
    assert np.allclose(mag, expected, atol=1e-7)


def test_forward_fft_matches_brute_force():
    rng = np.random.default_rng(0)
    img = rng.standard_normal((8, 8))
    assert np.allclose(spectral.forward_fft(img), brute_force_dft2(img), atol=1e-9)


def test_round_trip_identity():
    rng = np.random.default_rng(1)
    for n in (16, 64, 512):
        img = rng.standard_normal((n, n))
        back = spectral.inverse_fft(spectral.forward_fft(img))
        assert np.linalg.norm(back - img) <= 1e-12 * np.linalg.norm(img)


def test_inverse_fft_zero():
    out = spectral.inverse_fft(np.zeros((8, 8), dtype=complex))
    assert np.all(out == 0.0)


def test_inverse_fft_rejects_non_hermitian():
    spec = np.zeros((16, 16), dtype=complex)
    spec[3, 5] = 1.0  # single off-axis bin, conjugate partner missing
    with pytest.raises(ConjugateSymmetryError):
        spectral.inverse_fft(spec)


def test_non_square_rejected():
    with pytest.raises(ShapeError):
        spectral.forward_fft(np.zeros((4, 8)))
    with pytest.raises(ShapeError):
        spectral.inverse_fft(np.zeros((4, 8), dtype=complex))


def test_frequency_grid_ordering():
    u4, v4 = spectral.frequency_grid(4)
    assert np.allclose(u4[:, 0], [0.0, np.pi / 2, -np.pi, -np.pi / 2])
    assert np.allclose(v4[0, :], [0.0, np.pi / 2, -np.pi, -np.pi / 2])
    u2, _ = spectral.frequency_grid(2)
    assert np.allclose(u2[:, 0], [0.0, -np.pi])
    for n in (2, 4, 16):
        u, v = spectral.frequency_grid(n)
        assert u[0, 0] == 0.0 and v[0, 0] == 0.0
        assert np.abs(u).max() <= np.pi and np.abs(v).max() <= np.pi


def test_frequency_grid_rejects_bad_sides():
    for n in (0, 1, 3, 12):
        with pytest.raises(ShapeError):
            spectral.frequency_grid(n)


def test_apply_transfer_identity_and_zero():
    rng = np.random.default_rng(2)
    spec = spectral.forward_fft(rng.standard_normal((16, 16)))
    same = spectral.apply_transfer(spec, np.ones((16, 16)), dc_gain=None)
    assert np.array_equal(same, spec)
    zero = spectral.apply_transfer(spec, np.zeros((16, 16)))
    assert np.all(zero == 0.0)


def test_apply_transfer_linearity():
    rng = np.random.default_rng(3)
    n = 32
    f = spectral.forward_fft(rng.standard_normal((n, n)))
    g = spectral.forward_fft(rng.standard_normal((n, n)))
    gain = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    lhs = spectral.apply_transfer(2.0 * f + 3.0 * g, gain)
    rhs = 2.0 * spectral.apply_transfer(f, gain) + 3.0 * spectral.apply_transfer(g, gain)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_quadrature_gain_turns_cosine_into_negative_sine():
    # gain i*sign(u) on a pure cosine row wave; cross-check the expectation
    # against the brute-force DFT at small size
    n = 16
    i = np.arange(n)
    img = np.cos(2 * np.pi * 3 * i / n)[:, None] * np.ones((1, n))
    want = -np.sin(2 * np.pi * 3 * i / n)[:, None] * np.ones((1, n))

    spec_bf = brute_force_dft2(img)
    u, _ = spectral.frequency_grid(n)
    gained = spec_bf * (1j * np.sign(u))
    back_bf = np.fft.ifft2(gained)
    assert np.allclose(back_bf.real, want, atol=1e-9)

    out = spectral.filter_image(img, lambda uu, vv: 1j * np.sign(uu))
    assert np.allclose(out, want, atol=1e-10)


def test_apply_transfer_rejects_non_finite():
    spec = np.zeros((8, 8), dtype=complex)
    gain = np.ones((8, 8))
    gain[2, 2] = np.inf
    with pytest.raises(ValueError):
        spectral.apply_transfer(spec, gain)


def test_apply_transfer_dc_forcing():
    u, v = spectral.frequency_grid(8)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = u / np.hypot(u, v)   # NaN at DC
    spec = np.ones((8, 8), dtype=complex)
    out = spectral.apply_transfer(spec, gain, dc_gain=0.0)
    assert out[0, 0] == 0.0


def test_parseval():
    rng = np.random.default_rng(4)
    n = 128
    img = rng.standard_normal((n, n))
    spec = spectral.forward_fft(img)
    e_space = np.sum(img * img)
    e_freq = np.sum(np.abs(spec) ** 2) / (n * n)
    assert e_freq == pytest.approx(e_space, rel=1e-12)
