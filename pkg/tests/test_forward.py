import numpy as np
import pytest

from ptybench import (Mode, ScanGeometry, dft2, diffract, exit_wave,
                      make_probe, raster_positions, simulate_dataset,
                      synthesize_object)


def random_object(shape, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --- probes ---------------------------------------------------------------

def test_tophat_radius_zero_single_pixel():
    probe = make_probe("tophat", 0, (8, 8))
    assert np.count_nonzero(probe) == 1
    assert probe[4, 4] == 1.0


def test_tophat_pixel_count_matches_enumeration():
    radius, window = 4, (16, 16)
    probe = make_probe("tophat", radius, window)
    # brute-force disc rasterization oracle
    count = 0
    for i in range(16):
        for j in range(16):
            if (i - 7.5) ** 2 + (j - 7.5) ** 2 <= radius ** 2:
                count += 1
    assert np.count_nonzero(probe == 1.0) == count
    assert np.count_nonzero(probe) == count


def test_gaussian_center_and_radius_values():
    # odd window so a pixel sits exactly at the center
    probe = make_probe("gaussian", 4, (17, 17))
    assert probe[8, 8] == pytest.approx(1.0, abs=1e-12)
    assert probe[8, 12].real == pytest.approx(np.exp(-0.5), abs=1e-12)


def test_probe_radius_too_large_raises():
    with pytest.raises(ValueError):
        make_probe("tophat", 10, (16, 16))


# --- scan geometry ---------------------------------------------------------

def test_raster_count_no_jitter():
    geom = raster_positions((64, 64), (32, 32), step=16, jitter=0)
    assert len(geom.positions) == 9


def test_raster_determinism():
    a = raster_positions((64, 64), (32, 32), step=8, jitter=2, seed=7)
    b = raster_positions((64, 64), (32, 32), step=8, jitter=2, seed=7)
    assert a.positions == b.positions


def test_raster_windows_in_bounds_many_configs():
    rng = np.random.default_rng(0)
    for _ in range(500):
        oh = int(rng.integers(16, 100))
        ow = int(rng.integers(16, 100))
        wh = int(rng.integers(4, oh + 1))
        ww = int(rng.integers(4, ow + 1))
        step = int(rng.integers(1, max(2, min(wh, ww))))
        jitter = int(rng.integers(0, max(1, (step + 1) // 2)))
        geom = raster_positions((oh, ow), (wh, ww), step, jitter,
                                seed=int(rng.integers(1 << 31)))
        for (r, c) in geom.positions:
            assert 0 <= r <= oh - wh
            assert 0 <= c <= ow - ww


def test_geometry_rejects_out_of_bounds_window():
    with pytest.raises(ValueError):
        ScanGeometry(((40, 0),), (32, 32), (64, 64))


# --- exit waves and diffraction ---------------------------------------------

def test_exit_wave_identity_object():
    probe = make_probe("gaussian", 3, (8, 8))
    obj = np.ones((16, 16), dtype=complex)
    assert np.array_equal(exit_wave(obj, probe, (4, 2)), probe)


def test_exit_wave_identity_probe():
    obj = random_object((16, 16), 0)
    probe = np.ones((8, 8), dtype=complex)
    assert np.array_equal(exit_wave(obj, probe, (3, 5)), obj[3:11, 5:13])


def test_exit_wave_matches_direct_loop():
    obj = random_object((12, 12), 1)
    probe = random_object((8, 8), 2)
    pos = (2, 3)
    got = exit_wave(obj, probe, pos)
    for i in range(8):
        for j in range(8):
            expected = obj[pos[0] + i, pos[1] + j] * probe[i, j]
            # vectorized and scalar complex multiplies may differ in the
            # last ulp
            assert got[i, j] == pytest.approx(expected, rel=1e-14)


def test_exit_wave_out_of_bounds_raises():
    with pytest.raises(ValueError):
        exit_wave(np.ones((8, 8), dtype=complex),
                  np.ones((4, 4), dtype=complex), (6, 0))


def test_diffract_zero_field():
    out = diffract(np.zeros((8, 8), dtype=complex), 2)
    assert out.shape == (16, 16)
    assert np.all(out == 0)


@pytest.mark.parametrize("oversampling", [1, 2, 5])
def test_diffract_energy_conservation(oversampling):
    exit_field = random_object((8, 8), 3)
    total = diffract(exit_field, oversampling).sum()
    assert total == pytest.approx(np.linalg.norm(exit_field) ** 2, rel=1e-10)


def test_diffract_single_pixel_constant():
    exit_field = np.zeros((8, 8), dtype=complex)
    a = 2.5 - 1.5j
    exit_field[3, 3] = a
    out = diffract(exit_field, 2)
    assert np.allclose(out, abs(a) ** 2 / 256, atol=1e-12)


# --- dataset simulation ------------------------------------------------------

def test_fourier_mode_duality():
    obj = random_object((32, 32), 4)
    probe = make_probe("tophat", 6, (16, 16))
    geom = raster_positions((32, 32), (16, 16), step=8, jitter=0)
    fourier = simulate_dataset(obj, probe, geom, Mode.FOURIER_SPACE, 1)
    real_of_spectrum = simulate_dataset(dft2(obj), probe, geom,
                                        Mode.REAL_SPACE, 1)
    assert np.allclose(fourier, real_of_spectrum, atol=1e-10)


def test_stack_length_matches_positions():
    obj = random_object((32, 32), 5)
    probe = make_probe("tophat", 6, (16, 16))
    geom = raster_positions((32, 32), (16, 16), step=8, jitter=1, seed=3)
    stack = simulate_dataset(obj, probe, geom, Mode.REAL_SPACE, 1)
    assert len(stack) == len(geom.positions)


def test_constant_object_gives_identical_patterns():
    obj = np.full((32, 32), 0.8 + 0.1j)
    probe = make_probe("gaussian", 4, (16, 16))
    geom = raster_positions((32, 32), (16, 16), step=8, jitter=0)
    stack = simulate_dataset(obj, probe, geom, Mode.REAL_SPACE, 1)
    for pattern in stack[1:]:
        assert np.allclose(pattern, stack[0], atol=1e-12)


# --- synthetic objects -------------------------------------------------------

def test_degenerate_ranges_give_constant_object():
    obj = synthesize_object("checkerboard_text", (16, 16), (1, 1), (0, 0))
    assert np.allclose(obj, 1.0 + 0.0j, atol=1e-14)


@pytest.mark.parametrize("kind", ["checkerboard_text", "smooth_portrait"])
def test_amplitudes_within_range(kind):
    obj = synthesize_object(kind, (32, 32), (0.3, 0.9), (-1.0, 1.0), seed=2)
    amp = np.abs(obj)
    assert amp.min() >= 0.3 - 1e-12
    assert amp.max() <= 0.9 + 1e-12


def test_checkerboard_amplitude_two_valued():
    obj = synthesize_object("checkerboard_text", (32, 32), (0.2, 1.0),
                            (-0.5, 0.5), seed=0)
    assert len(np.unique(np.abs(obj).round(12))) == 2


def test_object_determinism():
    a = synthesize_object("smooth_portrait", (32, 32), seed=11)
    b = synthesize_object("smooth_portrait", (32, 32), seed=11)
    assert np.array_equal(a, b)


def test_invalid_ranges_raise():
    with pytest.raises(ValueError):
        synthesize_object("checkerboard_text", (16, 16),
                          amplitude_range=(0.0, 1.0))
    with pytest.raises(ValueError):
        synthesize_object("checkerboard_text", (16, 16),
                          phase_range=(-4.0, 0.0))
