from dataclasses import replace

import numpy as np
import pytest
from conftest import F10, separated_model
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sarsynth.augment import (
    RandomizationPolicy,
    augment_chip,
    drop_bright_points,
    iter_params,
    render_chip,
    sample_params,
    translate_target,
)
from sarsynth.centers import M3dModel, Scatterer
from sarsynth.imaging import ClutterModel, GridConfig, SensorModel, SourceImage, noise_power, rasterize, splat
from sarsynth.imaging.chipio import chip_bytes
from sarsynth.sbr import Contributions
from sarsynth.scene import AcquisitionGeometry

GEOM = AcquisitionGeometry(0.0, 17.0, F10)
FLAT = AcquisitionGeometry(0.0, 0.0, F10)
GRID = GridConfig(chip_size=64, spacing=0.2, oversampling=4)
SMALL = GridConfig(chip_size=32, spacing=0.2, oversampling=2)
QUIET = SensorModel(nesigma0_db=-200.0)

WIDE = RandomizationPolicy(
    range_resolution=(0.25, 0.5),
    cross_resolution=(0.3, 0.45),
    clutter_sigma0_db=(-25.0, -10.0),
    clutter_families=("rayleigh", "weibull", "k"),
    clutter_shape=(0.8, 3.0),
    nesigma0_db=(-30.0, -20.0),
    translation=5,
    max_dropout=4,
    master_seed=11,
)
INTERVALS = ("range_resolution", "cross_resolution", "clutter_sigma0_db", "clutter_shape", "nesigma0_db")


def _model(points, geom=GEOM):
    return M3dModel([Scatterer("plate", [x, y, 0.0], a) for x, y, a in points], geom)


def _peak(chip):
    return np.abs(chip.data).max()


def test_policy_validation():
    with pytest.raises(ValueError):
        RandomizationPolicy(nesigma0_db=(-20.0, -30.0))
    with pytest.raises(ValueError):
        RandomizationPolicy(max_dropout=-1)
    with pytest.raises(ValueError):
        RandomizationPolicy(clutter_families=("gamma",))
    assert RandomizationPolicy.from_dict(WIDE.to_dict()) == WIDE


def test_degenerate_intervals_give_the_bounds():
    pol = RandomizationPolicy(range_resolution=0.4, cross_resolution=0.35, clutter_sigma0_db=-17.5,
                              clutter_shape=1.5, nesigma0_db=-28.0, translation=0, max_dropout=0)
    for p in iter_params(pol, 0, 20):
        assert (p.range_resolution, p.cross_resolution, p.clutter_sigma0_db) == (0.4, 0.35, -17.5)
        assert (p.clutter_shape, p.nesigma0_db) == (1.5, -28.0)
        assert p.shift_range == p.shift_cross == p.dropout == 0


def test_same_seed_and_index_same_params():
    assert sample_params(WIDE, 42) == sample_params(WIDE, 42)
    assert sample_params(WIDE, 42) != sample_params(WIDE, 43)
    assert sample_params(WIDE, 42) != sample_params(replace(WIDE, master_seed=12), 42)


def test_iterator_matches_direct_sampling():
    assert list(iter_params(WIDE, 5, 9)) == [sample_params(WIDE, i) for i in range(5, 9)]


def test_uniformity_ks():
    draws = list(iter_params(WIDE, 0, 10_000))
    for name in INTERVALS:
        lo, hi = getattr(WIDE, name)
        x = np.array([getattr(p, name) for p in draws])
        assert stats.kstest(x, "uniform", args=(lo, hi - lo)).statistic < 0.02, name
    fam = np.array([p.clutter_family for p in draws])
    counts = [np.count_nonzero(fam == f) for f in WIDE.clutter_families]
    assert stats.chisquare(counts).pvalue > 1e-3
    shifts = np.array([p.shift_range for p in draws])
    assert stats.chisquare(np.bincount(shifts + 5, minlength=11)).pvalue > 1e-3


def test_containment_fuzz():
    for p in iter_params(WIDE, 0, 100_000):
        for name in INTERVALS:
            lo, hi = getattr(WIDE, name)
            assert lo <= getattr(p, name) <= hi
        assert abs(p.shift_range) <= 5 and abs(p.shift_cross) <= 5
        assert 0 <= p.dropout <= 4
        assert p.clutter_family in WIDE.clutter_families


def test_drop_ordering_and_edges():
    m = _model([(0, 0, 3.0), (1, 0, 2.0), (2, 0, 1.0)])
    out = drop_bright_points(m, 1)
    assert [s.amplitude for s in out.scatterers] == [2.0, 1.0]
    assert drop_bright_points(m, 0) is m
    assert len(drop_bright_points(m, 3)) == 0 and len(drop_bright_points(m, 10)) == 0
    tie = _model([(0, 0, 1.0), (1, 0, -1.0), (2, 0, 0.5)])
    assert [s.amplitude for s in drop_bright_points(tie, 1).scatterers] == [-1.0, 0.5]
    with pytest.raises(ValueError):
        drop_bright_points(m, -1)


def test_drop_contributions():
    amp = np.zeros((3, 4), complex)
    amp[:, 0] = [1.0, 5.0, 2.0]
    c = Contributions(amp, np.ones(3), np.zeros(3), np.zeros(3), np.ones(3, np.int32), np.zeros((3, 1), np.int32))
    np.testing.assert_array_equal(drop_bright_points(c, 1).channel("HH"), [1.0, 2.0])


def test_dropping_the_plate_lowers_the_peak():
    m = M3dModel([Scatterer("plate", [0, 0, 0], 3.0),
                  Scatterer("diffuse", [1.0, 0.4, 0], 0.3, coherent=False),
                  Scatterer("diffuse", [-0.6, 1.2, 0], 0.3, coherent=False)], GEOM)
    full = render_chip(m, GEOM, QUIET, GRID, diffuse_seed=1)
    less = render_chip(drop_bright_points(m, 1), GEOM, QUIET, GRID, diffuse_seed=1)
    assert _peak(less) < _peak(full)


def test_dropout_monotonicity_on_random_models():
    grid = GridConfig(chip_size=64, spacing=SMALL.spacing, oversampling=2)
    rng = np.random.default_rng(2024)
    for _ in range(100):
        m = separated_model(rng, SMALL.spacing)
        peaks = [_peak(render_chip(drop_bright_points(m, k), FLAT, QUIET, grid)) for k in range(len(m) + 1)]
        assert np.all(np.diff(peaks) <= 0), peaks


def test_translate_zero_and_inverse():
    src = splat([1.0, 2j], [0.3, -1.1], [0.0, 0.7], GRID, GEOM)
    same = translate_target(src, 0, 0)
    np.testing.assert_array_equal(same.data, src.data)
    back = translate_target(translate_target(src, 3, 0), -3, 0)
    np.testing.assert_array_equal(back.data, src.data)
    moved = translate_target(src, 2, -4)
    assert moved.data.sum() == src.data.sum()
    with pytest.raises(ValueError, match="off the grid"):
        translate_target(src, 40, 0)


def test_translated_chip_peak_moves_three_pixels():
    m = _model([(0.1, -0.3, 1.0), (1.0, 0.8, 0.6j)])
    a = render_chip(m, GEOM, QUIET, GRID).data
    b = render_chip(m, GEOM, QUIET, GRID, shift=(3, 0)).data
    xc = np.fft.ifft2(np.fft.fft2(np.abs(b)) * np.conj(np.fft.fft2(np.abs(a))))
    lag = np.unravel_index(np.argmax(np.abs(xc)), xc.shape)
    assert lag == (3, 0)


def test_identity_policy_is_the_plain_chip():
    sensor = SensorModel(range_resolution=0.35, nesigma0_db=-27.0)
    clutter = ClutterModel("k", -18.0, 2.5)
    pol = RandomizationPolicy.identity(sensor, clutter, master_seed=3)
    m = M3dModel([Scatterer("plate", [0, 0, 0], 2.0), Scatterer("diffuse", [0.5, 0.5, 0], 0.2, coherent=False)], GEOM)
    p = sample_params(pol, 7)
    got = augment_chip(m, GEOM, pol, 7, sensor, GRID)
    ref = render_chip(m, GEOM, sensor, GRID, clutter, p.clutter_seed, p.noise_seed, p.diffuse_seed)
    assert chip_bytes(got) == chip_bytes(ref)
    assert got.meta["randomization"] == p.to_dict()


def test_distinct_indices_differ_and_reruns_match():
    m = _model([(0, 0, 1.0)])
    a = augment_chip(m, GEOM, WIDE, 0, grid=GRID)
    b = augment_chip(m, GEOM, WIDE, 1, grid=GRID)
    again = augment_chip(m, GEOM, WIDE, 0, grid=GRID)
    assert chip_bytes(a) != chip_bytes(b)
    assert chip_bytes(a) == chip_bytes(again)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_augment_chip_is_pure(index):
    m = _model([(0.2, 0.0, 1.0), (-0.8, 0.6, 0.5)])
    assert chip_bytes(augment_chip(m, GEOM, WIDE, index, grid=SMALL)) == \
        chip_bytes(augment_chip(m, GEOM, WIDE, index, grid=SMALL))


def test_clutter_level_spread_matches_interval():
    pol = RandomizationPolicy(clutter_sigma0_db=(-25.0, -15.0), nesigma0_db=-90.0, translation=0, max_dropout=0,
                              master_seed=5)
    sensor = SensorModel()
    empty = M3dModel([], GEOM)
    unit = noise_power(replace(sensor, nesigma0_db=0.0), SourceImage.zeros(SMALL, GEOM))
    levels = np.array([10 * np.log10(np.mean(np.abs(augment_chip(empty, GEOM, pol, i, sensor, SMALL).data) ** 2)
                                     / unit) for i in range(1000)])
    drawn = np.array([sample_params(pol, i).clutter_sigma0_db for i in range(1000)])
    spread = np.std(levels) * np.sqrt(12.0)
    assert abs(spread / 10.0 - 1) < 0.10
    assert np.corrcoef(levels, drawn)[0, 1] > 0.95


def test_rasterize_after_dropout_on_contributions():
    amp = np.zeros((2, 4), complex)
    amp[:, 0] = [4.0, 1.0]
    c = Contributions(amp, np.array([10.0, 10.0]), np.array([0.0, 1.0]), np.array([0.0, 0.0]),
                      np.ones(2, np.int32), np.zeros((2, 1), np.int32), GEOM)
    src = rasterize(drop_bright_points(c, 1), GEOM, GRID)
    assert src.data.sum() == pytest.approx(1.0)
