import numpy as np
import pytest
from conftest import F10
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal, stats

from sarsynth.centers import M3dModel, Scatterer
from sarsynth.imaging import (
    RECT_WIDTH,
    ClutterModel,
    GridConfig,
    OffGridError,
    RadarChip,
    SensorModel,
    SourceImage,
    apply_sensor,
    broadening_factor,
    chip_files,
    convolve,
    ipr_kernel,
    measure_ipr,
    noise_power,
    rasterize,
    read_chip,
    save_preview,
    sensor_preset,
    splat,
    synth_clutter,
    taylor,
    to_preview,
    verify_chip,
    write_chip,
)
from sarsynth.imaging.chipio import chip_bytes
from sarsynth.imaging.ipr import axis_spectrum
from sarsynth.scene import AcquisitionGeometry
from sarsynth.sbr import Contributions

GRID = GridConfig(chip_size=64, spacing=0.2, oversampling=4)
GEOM = AcquisitionGeometry(0.0, 17.0, F10)


def _point_chip(sensor, rng=0.0, cross=0.0, grid=GRID):
    return apply_sensor(splat(1.0, rng, cross, grid, GEOM), None, sensor, None)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(chip_size=63)
    with pytest.raises(ValueError):
        GridConfig(oversampling=0)
    assert GRID.size == 256 and GRID.source_spacing == 0.05
    assert GRID.coordinates()[GRID.size // 2] == 0.0


def test_exact_center_splat():
    img = splat(1.0, 0.0, 0.0, GRID)
    nz = np.argwhere(img.data != 0)
    assert nz.tolist() == [[128, 128]]
    assert img.data[128, 128] == 1 + 0j


def test_corner_splat_quarters():
    d = GRID.source_spacing
    img = splat(1.0, d / 2, d / 2, GRID)
    vals = img.data[128:130, 128:130]
    assert np.all(vals == 0.25)
    assert img.data.sum() == 1.0
    assert np.count_nonzero(img.data) == 4


def test_splat_conservation_random():
    rng = np.random.default_rng(0)
    amp = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    pos = rng.uniform(-5, 5, (2, 1000))
    img = splat(amp, pos[0], pos[1], GRID)
    assert abs(img.data.sum() - amp.sum()) <= 1e-9 * abs(amp.sum())


def test_off_grid_lists_offenders():
    with pytest.raises(OffGridError, match="2 input") as err:
        splat([1.0, 1.0, 1.0], [0.0, 100.0, -50.0], [0.0, 0.0, 1.0], GRID)
    assert "#1" in str(err.value) and "#2" in str(err.value)


def test_source_image_invariants():
    with pytest.raises(ValueError):
        SourceImage(np.zeros((3, 4)), 0.1, 0.1)
    with pytest.raises(ValueError):
        SourceImage(np.full((2, 2), np.nan), 0.1, 0.1)
    with pytest.raises(ValueError):
        SourceImage(np.zeros((2, 2)), 0.0, 0.1)


def test_rasterize_both_inputs():
    c = Contributions(np.array([[2.0, 0, 0, 0]], complex), np.array([10.0]), np.array([0.0]), np.array([0.0]),
                      np.ones(1, np.int32), np.zeros((1, 1), np.int32), GEOM)
    img = rasterize(c, GEOM, GRID)
    assert img.data.sum() == 2.0 and img.meta["paradigm"] == "sbr"
    m = M3dModel([Scatterer("plate", [0, 0, 0], 3.0), Scatterer("diffuse", [0.4, 0.2, 0], 1.0, coherent=False)], GEOM)
    a = rasterize(m, GEOM, GRID, diffuse_seed=1)
    b = rasterize(m, GEOM, GRID, diffuse_seed=2)
    assert a.meta["paradigm"] == "centers"
    assert a.data[128, 128] == pytest.approx(3.0)
    assert not np.allclose(a.data, b.data)
    np.testing.assert_allclose(np.abs(a.data.sum() - 3.0), 1.0, rtol=1e-12)


def test_taylor_matches_scipy():
    m = 257
    xi = (np.arange(m) - m / 2 + 0.5) / m
    ours = taylor(xi, -35.0, 4)
    ref = signal.windows.taylor(m, nbar=4, sll=35, norm=False)
    np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-12)


def test_sensor_invariants():
    with pytest.raises(ValueError):
        SensorModel(range_resolution=0.1, pixel_spacing=0.2)
    with pytest.raises(ValueError):
        SensorModel(sidelobe_db=-15.0)
    with pytest.raises(ValueError):
        SensorModel(nbar=1)
    with pytest.raises(ValueError):
        axis_spectrum(SensorModel(), 0.01, 64, 0.05)


def test_broadening_factors():
    assert broadening_factor(sensor_preset("rect")) == pytest.approx(RECT_WIDTH, rel=1e-3)
    assert broadening_factor(sensor_preset("mstar")) == pytest.approx(1.19, abs=0.01)


@pytest.mark.parametrize("preset", ["mstar", "rect"])
def test_kernel_width_sidelobes_and_dc(preset):
    sensor = sensor_preset(preset)
    k = ipr_kernel(sensor, oversampling=4, n=4096)
    assert k.range.sum() == pytest.approx(1.0, abs=1e-9)
    assert k.cross.sum() == pytest.approx(1.0, abs=1e-9)
    x, h = k.centered()
    m = measure_ipr(h[2048 - 256:2048 + 256], k.spacing)
    assert abs(m["width"] / sensor.design_width(0.3) - 1) < 0.1
    design = sensor.sidelobe_db if preset == "mstar" else -13.26
    assert m["psl_db"] <= design + 1.0
    if preset == "mstar":
        assert abs(m["width"] - 0.357) < 0.01
    else:
        assert abs(m["psl_db"] + 13.26) < 0.1


@pytest.mark.parametrize("preset", ["mstar", "rect"])
def test_point_chip_peak_and_ipr(preset):
    sensor = sensor_preset(preset)
    chip = _point_chip(sensor)
    assert chip.shape == (64, 64)
    assert np.unravel_index(np.argmax(np.abs(chip.data)), chip.shape) == (32, 32)
    for cut in (chip.data[:, 32], chip.data[32, :]):
        m = measure_ipr(cut, chip.spacing)
        assert abs(m["width"] / sensor.design_width(0.3) - 1) < 0.1


def test_zero_everything_gives_zero_chip():
    chip = apply_sensor(SourceImage.zeros(GRID, GEOM), None, SensorModel(), None)
    assert np.all(chip.data == 0)


def test_decimation_spacing_is_exact():
    chip = _point_chip(SensorModel())
    assert chip.spacing == GRID.source_spacing * GRID.oversampling
    assert chip.shape == (GRID.size // GRID.oversampling,) * 2


def test_spacing_and_shape_errors():
    src = SourceImage.zeros(GRID, GEOM)
    with pytest.raises(ValueError, match="spacing"):
        apply_sensor(src, None, SensorModel(pixel_spacing=0.25, range_resolution=0.3, cross_resolution=0.3), None)
    with pytest.raises(ValueError, match="clutter"):
        apply_sensor(src, np.zeros((4, 4)), SensorModel(), None)
    with pytest.raises(ValueError, match="non-finite"):
        noise_power(SensorModel(nesigma0_db=1e6), src)


def test_linearity():
    rng = np.random.default_rng(4)
    pos = rng.uniform(-4, 4, (2, 2, 30))
    amp = rng.normal(size=(2, 30)) + 1j * rng.normal(size=(2, 30))
    s1 = splat(amp[0], pos[0, 0], pos[0, 1], GRID, GEOM)
    s2 = splat(amp[1], pos[1, 0], pos[1, 1], GRID, GEOM)
    both = s1.with_data(s1.data + s2.data)
    sensor = SensorModel()
    lhs = apply_sensor(both, None, sensor, None).data
    rhs = apply_sensor(s1, None, sensor, None).data + apply_sensor(s2, None, sensor, None).data
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(lhs))


@settings(max_examples=10, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5))
def test_translation_equivariance(dr, dc):
    sensor = SensorModel()
    base = _point_chip(sensor, 0.03, -0.07).data
    moved = _point_chip(sensor, 0.03 + dr * 0.2, -0.07 + dc * 0.2).data
    n = base.shape[0]
    r0, r1 = max(0, dr), n + min(0, dr)
    c0, c1 = max(0, dc), n + min(0, dc)
    ref = base[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
    np.testing.assert_allclose(moved[r0:r1, c0:c1], ref, rtol=0, atol=1e-12 * np.abs(base).max())


def test_spectral_equals_direct_convolution():
    n = 64
    rng = np.random.default_rng(9)
    src = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    sensor = SensorModel()
    d = 0.05
    spectral = convolve(src, sensor, d)
    hr = np.fft.ifft(axis_spectrum(sensor, 0.3, 2 * n, d))
    hc = np.fft.ifft(axis_spectrum(sensor, 0.3, 2 * n, d))
    lags = np.arange(-(n - 1), n)
    kernel = np.outer(hr[lags % (2 * n)], hc[lags % (2 * n)])
    direct = signal.convolve2d(src, kernel, mode="full")[n - 1:2 * n - 1, n - 1:2 * n - 1]
    assert np.max(np.abs(spectral - direct)) <= 1e-6 * np.max(np.abs(direct))


def test_noise_floor_matches_configured_power():
    grid = GridConfig(chip_size=1024, spacing=0.2, oversampling=1)
    sensor = SensorModel(nesigma0_db=-25.0)
    src = SourceImage.zeros(grid, GEOM)
    chip = apply_sensor(src, None, sensor, noise_seed=12)
    assert chip.data.size >= 10**6
    measured = np.mean(np.abs(chip.data) ** 2)
    assert abs(10 * np.log10(measured / noise_power(sensor, src))) < 0.2


def test_noise_level_equals_clutter_at_nesigma0():
    """Independent route to the same level: clutter of reflectivity NESigma0 through the sensor."""
    grid = GridConfig(chip_size=512, spacing=0.2, oversampling=2)
    sensor = SensorModel(nesigma0_db=-25.0)
    src = SourceImage.zeros(grid, GEOM)
    clutter = synth_clutter(ClutterModel(sigma0_db=-25.0), src.shape, src.pixel_ground_area, seed=3)
    chip = apply_sensor(src, clutter, sensor, None)
    inner = chip.data[16:-16, 16:-16]
    assert abs(10 * np.log10(np.mean(np.abs(inner) ** 2) / noise_power(sensor, src))) < 0.2


def test_chip_determinism():
    rng = np.random.default_rng(2)
    src = splat(rng.normal(size=50), rng.uniform(-3, 3, 50), rng.uniform(-3, 3, 50), GRID, GEOM)
    clutter = synth_clutter(ClutterModel("k", -20, 3.0), src.shape, src.pixel_ground_area, 5)
    a = apply_sensor(src, clutter, SensorModel(), 8)
    b = apply_sensor(src, clutter, SensorModel(), 8)
    assert chip_bytes(a) == chip_bytes(b)
    assert a.meta["noise_seed"] == 8 and a.meta["sensor"] == SensorModel().to_dict()


def test_rayleigh_power():
    z = synth_clutter(ClutterModel("rayleigh", -15.0), (1024, 1024), 0.04, seed=1)
    expected = 10 ** -1.5 * 0.04
    assert abs(np.mean(np.abs(z) ** 2) / expected - 1) < 0.01


@pytest.mark.parametrize("family,shape", [("weibull", 1.2), ("weibull", 2.0), ("k", 0.8), ("k", 50.0)])
def test_family_mean_power(family, shape):
    z = synth_clutter(ClutterModel(family, -10.0, shape), (1000, 1000), 0.5, seed=2)
    assert abs(np.mean(np.abs(z) ** 2) / (0.1 * 0.5) - 1) < 0.02


def test_k_kurtosis_ordering():
    def kurt(z):
        return stats.kurtosis(np.abs(z).ravel())

    rayleigh = kurt(synth_clutter(ClutterModel("rayleigh"), (1000, 1000), 1.0, 0))
    k1 = kurt(synth_clutter(ClutterModel("k", shape=1.0), (1000, 1000), 1.0, 0))
    k100 = kurt(synth_clutter(ClutterModel("k", shape=100.0), (1000, 1000), 1.0, 0))
    assert k1 > k100 > rayleigh - 0.02
    assert abs(k100 - rayleigh) < abs(k1 - rayleigh)


def test_clutter_seed_and_validation():
    m = ClutterModel("weibull", -12.0, 1.5)
    np.testing.assert_array_equal(synth_clutter(m, (32, 32), 1.0, 4), synth_clutter(m, (32, 32), 1.0, 4))
    with pytest.raises(ValueError):
        ClutterModel("k", shape=0.0)
    with pytest.raises(ValueError):
        ClutterModel("gamma")


def test_preview_cases():
    assert np.all(to_preview(np.zeros((8, 8))) == 0)
    x = np.full((8, 8), 1e-3)
    x[3, 4] = 1.0
    p = to_preview(x, 50.0)
    assert p[3, 4] == 255 and p[0, 0] == 0
    np.testing.assert_array_equal(to_preview(x * 7.5), to_preview(x))
    with pytest.raises(ValueError):
        to_preview(np.zeros((0, 0)))


def test_preview_png(tmp_path):
    from PIL import Image

    chip = _point_chip(SensorModel())
    save_preview(chip, tmp_path / "p.png")
    img = np.asarray(Image.open(tmp_path / "p.png"))
    np.testing.assert_array_equal(img, to_preview(chip))


def test_chip_io_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    chip = RadarChip(rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)), 0.2, {"label": "x"})
    side = write_chip(chip, tmp_path / "a" / "az012.500")
    raw, js = chip_files(tmp_path / "a" / "az012.500")
    assert raw.name == "az012.500.raw" and js.name == "az012.500.json"
    assert raw.read_bytes() == np.abs(chip.data).astype("<f4").tobytes()
    back = read_chip(raw)
    assert back.meta == {"label": "x"} and side["shape"] == [16, 16]
    np.testing.assert_array_equal(back.magnitude.astype("<f4"), np.abs(chip.data).astype("<f4"))
    assert verify_chip(tmp_path / "a" / "az012.500")
    raw.write_bytes(b"\0" * len(raw.read_bytes()))
    assert not verify_chip(raw)
    with pytest.raises(ValueError, match="checksum"):
        read_chip(raw)
