import numpy as np
import pytest

from sarsynth.centers import M3dModel, Scatterer
from sarsynth.scene import AcquisitionGeometry, shapes

F10 = 10e9
LAMBDA10 = 299_792_458.0 / F10


def db(x):
    return 10.0 * np.log10(x)


@pytest.fixture(scope="session")
def plate03():
    return shapes.plate(0.3, normal=(1.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def face_on():
    return AcquisitionGeometry(0.0, 0.0, F10)


def unit_cube_obj(path, scale_note=""):
    """Write the 12-triangle unit cube in [0, 1]^3 as OBJ."""
    v = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    quads = [(1, 2, 4, 3), (5, 7, 8, 6), (1, 5, 6, 2), (3, 4, 8, 7), (1, 3, 7, 5), (2, 6, 8, 4)]
    lines = [f"# cube {scale_note}"] + [f"v {a} {b} {c}" for a, b, c in v]
    lines += ["g body"] + [f"f {a} {b} {c}\nf {a} {c} {d}" for a, b, c, d in quads]
    path.write_text("\n".join(lines) + "\n")
    return path


def small_production(out, **over):
    """Raw config for a quick production: two small built-in targets on 32-pixel chips."""
    raw = {
        "targets": [
            {"label": "plate", "mesh": "shape:plate", "params": {"a": 0.6}},
            {"label": "dihedral", "mesh": "shape:dihedral", "params": {"a": 0.5, "b": 0.4}},
        ],
        "depressions": [17.0],
        "azimuth": "0:90:45",
        "paradigm": "centers",
        "chip": {"chip_size": 32, "oversampling": 2},
        "clutter": {"family": "rayleigh", "sigma0_db": -25.0},
        "sbr": {"ray_area": 1e-4},
        "frequency": F10,
        "output": str(out),
        "seed": 7,
    }
    raw.update(over)
    return raw


def separated_model(rng, spacing):
    """Random M3D whose scatterers sit on distinct rows and columns of a coarse lattice.

    Sidelobes of a separable IPR lie on the principal axes, so scatterers
    that share no row or column band interact only at the product of two
    sidelobe levels. Distinct magnitudes (at least 2 % apart) then pin the
    chip peak on the brightest remaining scatterer. Zero depression keeps
    the lattice on exact pixel centres, so there is no scallop loss.
    """
    n = int(rng.integers(3, 8))
    slots = np.arange(-3, 4) * 8 * spacing
    rows, cols = rng.permutation(slots)[:n], rng.permutation(slots)[:n]
    mags = np.sort(rng.uniform(0.1, 1.0, n))
    while np.any(np.diff(mags) < 0.02 * mags[1:]):
        mags = np.sort(rng.uniform(0.1, 1.0, n))
    amps = rng.permutation(mags) * np.exp(2j * np.pi * rng.uniform(size=n))
    flat = AcquisitionGeometry(0.0, 0.0, F10)
    return M3dModel([Scatterer("plate", [-r, c, 0.0], a) for r, c, a in zip(rows, cols, amps)], flat)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
