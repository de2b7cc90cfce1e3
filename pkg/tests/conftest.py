import cmath
import math

import numpy as np
import pytest

from eislab.eisenstein import build_context
from eislab.hyperbolic import DiscIsometry, cayley_to_disc, geodesic_from_endpoints
from eislab.schottky import GeneratorSpec, build_group

XI_CANONICAL = cmath.exp(0.25j * math.pi)
CHART_CANONICAL = (cmath.exp(2.6j), cmath.exp(-0.9j))
XI_ELEMENTARY = cayley_to_disc(2.5)


def random_disc_points(rng, n, rmax=0.9):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def random_boundary_points(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def random_isometry(rng, rmax=0.9):
    p = complex(random_disc_points(rng, 1, rmax)[0])
    return DiscIsometry.translation_to(p) @ DiscIsometry.rotation(2 * math.pi * rng.random())


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def canonical_group():
    return build_group([GeneratorSpec.axis(-1, 1, 4.0), GeneratorSpec.axis(-1j, 1j, 4.0)])


@pytest.fixture(scope="session")
def canonical_chart():
    return geodesic_from_endpoints(*CHART_CANONICAL)


@pytest.fixture(scope="session")
def canonical_ctx_coarse(canonical_group):
    return build_context(canonical_group, XI_CANONICAL, 0.05)


@pytest.fixture(scope="session")
def canonical_ctx(canonical_group):
    return build_context(canonical_group, XI_CANONICAL, 0.02)


@pytest.fixture(scope="session")
def canonical_ctx_fine(canonical_group):
    return build_context(canonical_group, XI_CANONICAL, 5e-3)


@pytest.fixture(scope="session")
def elementary_group():
    return build_group([GeneratorSpec.half_plane_dilation(1.5)])


@pytest.fixture(scope="session")
def elementary_ctx(elementary_group):
    return build_context(elementary_group, XI_ELEMENTARY, 1e-8)


@pytest.fixture(scope="session")
def trivial_group():
    return build_group([])


@pytest.fixture(scope="session")
def trivial_ctx(trivial_group):
    return build_context(trivial_group, 1.0, 1e-8)


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE = []


def pytest_runtest_makereport(item, call):
    if call.when != "call" or item.get_closest_marker("acceptance") is None:
        return
    label = (item.function.__doc__ or item.name).strip().splitlines()[0]
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    ok = call.excinfo is None
    _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
