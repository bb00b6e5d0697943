import numpy as np
import pytest

from crmap import kernels
from crmap.grid import GridSpec, MapBelief, bin_centers
from crmap.oracle import line_grid

BACKENDS = sorted(kernels.backends())


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the duration of a test."""
    mod = kernels.backends()[request.param]
    for name in ("trace", "crm_cone_update", "ism_cone_update"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


def belief_with_means(spec: GridSpec, means, bins: int = 101) -> MapBelief:
    """Map belief whose voxels have the given means, using the two extreme bins.

    Means must lie within the span of the bin centers.
    """
    c = bin_centers(bins)
    means = np.asarray(means, dtype=float)
    w = (means - c[0]) / (c[-1] - c[0])
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError("mean outside the representable range")
    mass = np.zeros((spec.n, bins))
    mass[:, 0] = 1.0 - w
    mass[:, -1] = w
    return MapBelief(spec, mass)


def random_belief(spec: GridSpec, rng: np.random.Generator, bins: int = 101) -> MapBelief:
    mass = rng.dirichlet(np.full(bins, 0.3), size=spec.n)
    return MapBelief(spec, mass)


@pytest.fixture
def line3():
    return line_grid(3)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
