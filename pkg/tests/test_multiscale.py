import numpy as np
import pytest

from smvphase import multiscale, steerable, synthlab
from smvphase.errors import ShapeError
from smvphase.steerable import FrameSpec


def make_stack(img, k_sub=2, overcomplete=False, backend="smv"):
    frame = FrameSpec.for_side(img.shape[0], k_sub=k_sub, overcomplete=overcomplete)
    return multiscale.scale_features(img, frame, backend=backend)


def test_single_scale_stack():
    img = synthlab.oriented_wave(32, 4, 0)
    frame = FrameSpec(m_min=5, m_max=5, k_sub=1)
    stack = multiscale.scale_features(img, frame)
    assert len(stack) == 1
    q = multiscale.amplitude_quality(stack)
    assert np.array_equal(q[0], stack[0].amp)
    feats = multiscale.select(stack, q)
    assert np.all(feats.k_map == 0)
    assert np.array_equal(feats.phase, stack[0].phase)


def test_zero_image_zero_amplitude_quality():
    stack = make_stack(np.zeros((32, 32)))
    for q in multiscale.amplitude_quality(stack):
        assert np.all(q == 0.0)


def test_wave_selects_its_band():
    n = 128
    img = synthlab.oriented_wave(n, 16, 0)   # radius 16 bins = peak of a band
    stack = make_stack(img)
    q = multiscale.amplitude_quality(stack)
    feats = multiscale.select(stack, q)
    sl = synthlab.interior_slice(n, 16)
    peak = [i for i, ps in enumerate(stack)
            if ps.kind == "band" and ps.amp[sl].mean() > 0.9]
    assert len(peak) == 1
    assert (feats.k_map[sl] == peak[0]).mean() >= 0.95


def test_ovar_constant_orientation_is_perfect():
    theta = np.full((64, 64), 0.7)
    q = multiscale.circular_variance_quality(theta, 4, 15)
    assert np.allclose(q, 1.0, atol=1e-12)


def test_ovar_uniform_random_orientation_is_poor():
    rng = np.random.default_rng(0)
    theta = rng.uniform(0.0, np.pi / 2, size=(128, 128))
    q = multiscale.circular_variance_quality(theta, 4, 15)
    assert q.mean() <= 0.6


def test_ovar_rejects_even_window():
    with pytest.raises(ValueError):
        multiscale.circular_variance_quality(np.zeros((8, 8)), 4, 4)


def test_ovar_coherent_beats_noise_under_noise():
    # the mechanism behind the noise benchmarks, at one operating point
    n = 256
    gt = synthlab.plane_wave(n, 16.0, np.pi / 4, sigma=1.0, seed=11)
    stack = make_stack(gt.image)
    qs = multiscale.orientation_variance_quality(stack)
    sl = synthlab.interior_slice(n, 32)
    signal_band = max(range(len(stack)), key=lambda i: stack[i].amp[sl].mean())
    noise_band = 0   # finest band: noise-dominated at sigma = 1
    assert signal_band != noise_band
    frac = (qs[signal_band][sl] > qs[noise_band][sl]).mean()
    assert frac >= 0.8


def test_ovar_fully_excluded_window_is_worst():
    theta = np.zeros((32, 32))
    exclude = np.ones((32, 32), dtype=bool)
    q = multiscale.circular_variance_quality(theta, 4, 9, exclude=exclude)
    assert np.allclose(q, 0.5)


def test_product_quality():
    stack = make_stack(synthlab.plane_wave(64, 8.0, 0.6, 0.2, seed=1).image)
    amp = multiscale.amplitude_quality(stack)
    ones = [np.ones_like(a) for a in amp]
    prod = multiscale.product_quality(amp, ones)
    for p, a in zip(prod, amp):
        assert np.array_equal(p, a)
    zeros = [np.zeros_like(a) for a in amp]
    for p in multiscale.product_quality(zeros, ones):
        assert np.all(p == 0.0)
    with pytest.raises(ShapeError):
        multiscale.product_quality(amp, ones[:-1])
    with pytest.raises(ShapeError):
        multiscale.product_quality([np.zeros((4, 4))], [np.zeros((8, 8))])


def test_select_matches_bruteforce_argmax():
    rng = np.random.default_rng(2)
    stack = make_stack(rng.standard_normal((64, 64)))
    qs = [rng.random((64, 64)) for _ in stack]
    feats = multiscale.select(stack, qs)
    brute = np.zeros((64, 64), dtype=int)
    for i in range(64):
        for j in range(64):
            brute[i, j] = int(np.argmax([q[i, j] for q in qs]))
    assert np.array_equal(feats.k_map, brute)


def test_select_tie_breaks_to_finest():
    stack = make_stack(np.ones((32, 32)) * 0.5 + synthlab.oriented_wave(32, 4, 0))
    qs = [np.ones((32, 32)) for _ in stack]
    feats = multiscale.select(stack, qs)
    assert np.all(feats.k_map == 0)
    assert stack[0].s == max(ps.s for ps in stack)   # first entry is finest


def test_select_empty_stack_rejected():
    with pytest.raises(ValueError):
        multiscale.select([], [])
    with pytest.raises(ValueError):
        multiscale.amplitude_quality([])


def test_selection_consistency_invariant():
    gt = synthlab.plane_wave(128, 16.0, np.pi / 4, sigma=0.5, seed=3)
    stack = make_stack(gt.image)
    qs = multiscale.quality_maps(stack, "product")
    feats = multiscale.select(stack, qs)
    q_arr = np.stack(qs)
    ph_arr = np.stack([ps.phase for ps in stack])
    n = gt.image.shape[0]
    idx = np.indices((n, n))
    assert np.array_equal(feats.phase, ph_arr[feats.k_map, idx[0], idx[1]])
    winner_q = q_arr[feats.k_map, idx[0], idx[1]]
    assert np.all(winner_q >= q_arr.max(axis=0) - 1e-15)
    assert np.array_equal(feats.quality, winner_q)


def test_select_monotone_invariance():
    gt = synthlab.plane_wave(64, 8.0, 0.7, sigma=0.4, seed=4)
    stack = make_stack(gt.image)
    qs = multiscale.quality_maps(stack, "product")
    a = multiscale.select(stack, qs)
    b = multiscale.select(stack, [np.exp(q) for q in qs])
    assert np.array_equal(a.k_map, b.k_map)


def test_ovar_invariant_to_global_orientation_offset():
    rng = np.random.default_rng(5)
    theta = rng.uniform(0.0, np.pi / 2, size=(64, 64))
    q0 = multiscale.circular_variance_quality(theta, 4, 9)
    q1 = multiscale.circular_variance_quality(np.mod(theta + 0.3, np.pi / 2), 4, 9)
    assert np.allclose(q0, q1, atol=1e-10)


def test_variance_window_rule():
    # twice the scale wavelength, forced odd; lowpass extras step one coarser
    assert multiscale.variance_window(8, 8) == 5
    assert multiscale.variance_window(7, 8) == 9
    assert multiscale.variance_window(3, 8) == 129
    assert multiscale.variance_window(8, 8, lowpass=True) == 9
    for s in range(3, 9):
        assert multiscale.variance_window(s, 8) % 2 == 1


def test_overcomplete_stack_layout():
    img = synthlab.plane_wave(64, 8.0, 0.5, 0.0, seed=6).image
    stack = make_stack(img, overcomplete=True)
    kinds = [ps.kind for ps in stack]
    n_bands = kinds.count("band")
    assert kinds == ["band"] * n_bands + ["lowpass"] * (len(stack) - n_bands)
    ss = [ps.s for ps in stack if ps.kind == "lowpass"]
    assert ss == sorted(ss, reverse=True)   # fine to coarse


def test_ms_backend_shapes_and_ranges():
    img = synthlab.plane_wave(64, 8.0, np.pi / 3, sigma=0.2, seed=7).image
    for backend in ("smv", "ms"):
        frame = FrameSpec.for_side(64, k_sub=2)
        feats = multiscale.multiscale_features(img, frame, backend=backend)
        assert feats.phase.shape == (64, 64)
        assert feats.amp.min() >= 0.0
        period = np.pi / 2 if backend == "smv" else np.pi
        assert feats.theta.min() >= 0.0 and feats.theta.max() < period
    with pytest.raises(ValueError):
        multiscale.scale_features(img, FrameSpec.for_side(64), backend="bogus")


def test_quality_maps_unknown_kind():
    stack = make_stack(np.zeros((32, 32)))
    with pytest.raises(ValueError):
        multiscale.quality_maps(stack, "magic")
