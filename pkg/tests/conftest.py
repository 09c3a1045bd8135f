import numpy as np
import pytest

from kobayashi_lab import (
    Ellipsoid,
    MetricField,
    UnitBall,
    UnitDisc,
    build_lattice,
    default_config,
    power_gauge,
    sqrt_gauge,
)


@pytest.fixture(scope="session")
def disc():
    return UnitDisc()


@pytest.fixture(scope="session")
def ball():
    return UnitBall(2)


@pytest.fixture(scope="session")
def egg():
    return Ellipsoid(2)


@pytest.fixture(scope="session")
def sqrt_profile():
    return sqrt_gauge()


@pytest.fixture(scope="session")
def egg_profile():
    return power_gauge(4, C=1.6)


@pytest.fixture(scope="session")
def disc_field(disc):
    return MetricField(disc)


@pytest.fixture(scope="session")
def ball_field(ball):
    return MetricField(ball)


@pytest.fixture(scope="session")
def disc_lattice(disc, disc_field):
    cfg = default_config(disc)
    return cfg, build_lattice(disc, cfg, disc_field)


@pytest.fixture(scope="session")
def ball_lattice(ball, ball_field):
    cfg = default_config(ball)
    return cfg, build_lattice(ball, cfg, ball_field)


def random_disc_point(rng, depth_range=(-3, -0.2)):
    d = 10 ** rng.uniform(*depth_range)
    return np.array([(1 - d) * np.exp(2j * np.pi * rng.uniform())])


def random_ball_point(rng, dim=2, depth_range=(-3, -0.2)):
    w = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    w /= np.linalg.norm(w)
    return (1 - 10 ** rng.uniform(*depth_range)) * w
