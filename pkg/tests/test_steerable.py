import numpy as np
import pytest

from smvphase import spectral, steerable, synthlab
from smvphase.errors import ShapeError
from smvphase.steerable import FrameSpec


def partition_residual(bank):
    total = sum(w * w for w in bank.all_windows())
    return np.abs(total - 1.0).max()


def test_single_scale_single_band():
    spec = FrameSpec(m_min=5, m_max=5, k_sub=1)
    bank = steerable.design_filters(spec, 32)
    assert len(bank.band_windows) == 1
    assert partition_residual(bank) <= 1e-10


@pytest.mark.parametrize("m_min,k_sub,n", [(3, 2, 256), (3, 1, 256), (1, 2, 64), (4, 3, 64)])
def test_partition_of_unity(m_min, k_sub, n):
    spec = FrameSpec.for_side(n, m_min=m_min, k_sub=k_sub)
    bank = steerable.design_filters(spec, n)
    assert partition_residual(bank) <= 1e-10


def test_band_count_256():
    spec = FrameSpec(m_min=3, m_max=8, k_sub=2)
    bank = steerable.design_filters(spec, 256)
    assert len(bank.band_windows) == 12
    assert partition_residual(bank) <= 1e-10


def test_k1_band_count():
    spec = FrameSpec(m_min=3, m_max=8, k_sub=1)
    stack = steerable.decompose(np.zeros((256, 256)), spec)
    assert len(stack.bands) == 8 - 3 + 1


def test_dc_bin_partition():
    spec = FrameSpec(m_min=3, m_max=6, k_sub=2)
    bank = steerable.design_filters(spec, 64)
    assert bank.approx_window[0, 0] == 1.0
    for w in bank.band_windows:
        assert w[0, 0] == 0.0


def test_band_labels_and_peaks():
    spec = FrameSpec(m_min=3, m_max=8, k_sub=2)
    bank = steerable.design_filters(spec, 256)
    assert bank.band_labels[0] == (1, 8)
    assert bank.band_labels[1] == (2, 8)
    assert bank.band_labels[-1] == (2, 3)
    # band peak radius pi / 2**(m_max - s) for the first subscale of scale s
    u, v = spectral.frequency_grid(256)
    r = np.hypot(u, v)
    for m, ((j, s), w) in enumerate(zip(bank.band_labels, bank.band_windows)):
        if j == 1:
            peak = np.pi / 2.0 ** (8 - s)
            at_peak = w[np.isclose(r, peak, rtol=1e-3)]
            assert at_peak.size > 0 and at_peak.max() > 0.999


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        FrameSpec(m_min=7, m_max=5)
    with pytest.raises(ValueError):
        FrameSpec(m_min=0, m_max=5)
    with pytest.raises(ValueError):
        FrameSpec(m_min=3, m_max=5, k_sub=0)


def test_decompose_zero_image():
    spec = FrameSpec(m_min=3, m_max=5, k_sub=2)
    stack = steerable.decompose(np.zeros((32, 32)), spec)
    for band in stack.bands:
        assert np.all(band.image == 0.0)
    assert np.all(stack.approx == 0.0)


def test_wave_energy_concentrates_in_peak_band():
    # integer-bin wave at the exact peak radius of band (1, s); expected
    # shares evaluated from the window values at the occupied bins
    n = 256
    spec = FrameSpec.for_side(n, k_sub=2)
    bank = steerable.design_filters(spec, n)
    k = 32  # radius 32 bins = pi/4 rad/px = peak of scale s=6
    img = synthlab.oriented_wave(n, k, 0)
    expected = [float(w[k, 0] ** 2) for w in bank.band_windows]
    stack = steerable.decompose(img, spec)
    energies = np.array([np.sum(b.image ** 2) for b in stack.bands])
    shares = energies / (energies.sum() + np.sum(stack.approx ** 2))
    peak_band = int(np.argmax(expected))
    assert bank.band_labels[peak_band] == (1, 6)
    assert shares[peak_band] >= 0.9
    assert np.allclose(shares, expected, atol=1e-9)


def test_white_noise_energy_conserved():
    rng = np.random.default_rng(7)
    n = 256
    img = rng.standard_normal((n, n))
    stack = steerable.decompose(img, FrameSpec.for_side(n, k_sub=2))
    total = sum(np.sum(b.image ** 2) for b in stack.bands) + np.sum(stack.approx ** 2)
    assert total == pytest.approx(np.sum(img * img), rel=1e-10)


@pytest.mark.parametrize("m_min,k_sub", [(3, 1), (3, 2), (5, 2), (1, 1)])
def test_round_trip(m_min, k_sub):
    rng = np.random.default_rng(8)
    n = 256
    img = rng.standard_normal((n, n))
    spec = FrameSpec.for_side(n, m_min=m_min, k_sub=k_sub)
    recon = steerable.reconstruct(steerable.decompose(img, spec))
    assert np.linalg.norm(recon - img) <= 1e-10 * np.linalg.norm(img)


def test_reconstruct_zero_stack():
    spec = FrameSpec(m_min=3, m_max=5, k_sub=1)
    stack = steerable.decompose(np.zeros((32, 32)), spec)
    assert np.all(steerable.reconstruct(stack) == 0.0)


def test_single_band_synthesis_spectrum():
    # keeping one band and reconstructing applies |H|^2 to the spectrum
    rng = np.random.default_rng(9)
    n = 64
    img = rng.standard_normal((n, n))
    spec = FrameSpec.for_side(n, m_min=3, k_sub=1)
    bank = steerable.design_filters(spec, n)
    stack = steerable.decompose(img, spec)
    keep = 2
    for i, band in enumerate(stack.bands):
        if i != keep:
            band.image[:] = 0.0
    stack.approx[:] = 0.0
    recon = steerable.reconstruct(stack)
    want = spectral.inverse_fft(bank.band_windows[keep] ** 2 * spectral.forward_fft(img))
    assert np.allclose(recon, want, atol=1e-12)


def test_reconstruct_rejects_inconsistent_shapes():
    spec = FrameSpec(m_min=3, m_max=5, k_sub=1)
    stack = steerable.decompose(np.zeros((32, 32)), spec)
    stack.bands[0] = steerable.Band(1, 5, np.zeros((16, 16)))
    with pytest.raises(ShapeError):
        steerable.reconstruct(stack)


def test_decompose_rejects_wrong_side():
    spec = FrameSpec(m_min=3, m_max=5, k_sub=1)
    with pytest.raises(ShapeError):
        steerable.decompose(np.zeros((64, 64)), spec)


def test_radial_isotropy():
    spec = FrameSpec(m_min=3, m_max=6, k_sub=2)
    bank = steerable.design_filters(spec, 64)
    for w in bank.all_windows():
        assert np.array_equal(w, w.T)


def test_overcomplete_extras():
    n = 64
    rng = np.random.default_rng(10)
    img = rng.standard_normal((n, n))
    spec = FrameSpec.for_side(n, m_min=3, k_sub=2, overcomplete=True)
    stack = steerable.decompose(img, spec)
    assert stack.extras is not None
    assert len(stack.extras) == spec.n_dyadic
    assert [lp.s for lp in stack.extras] == [6, 5, 4, 3]
    # extras are analysis-only: reconstruction ignores them entirely
    recon = steerable.reconstruct(stack)
    assert np.linalg.norm(recon - img) <= 1e-10 * np.linalg.norm(img)
    # each extra is a genuine low-pass: its spectrum vanishes above its cut
    bank = steerable.design_filters(spec, n)
    for (s, w), lp in zip(bank.lowpass_windows, stack.extras):
        assert lp.s == s
        spec_lp = spectral.forward_fft(lp.image)
        u, v = spectral.frequency_grid(n)
        r = np.hypot(u, v)
        cut = np.pi * 2.0 ** (-(6 - s + 1) + 1.0 / 2)
        assert np.abs(spec_lp[r > cut * 1.01]).max() < 1e-9 * np.abs(spec_lp).max()


def test_filter_bank_cached():
    a = steerable.design_filters(FrameSpec(3, 6, 2), 64)
    b = steerable.design_filters(FrameSpec(3, 6, 2), 64)
    assert a is b
