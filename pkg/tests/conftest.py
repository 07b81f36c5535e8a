from fractions import Fraction

import numpy as np
import pytest

import mmsot


@pytest.fixture(scope="session")
def tripod_unit():
    return mmsot.build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))


@pytest.fixture(scope="session")
def interval_fine():
    return mmsot.build_interval(1.0, Fraction(1, 32))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def line_space(coords):
    """Integer points on a line; every pairwise distance is an exact integer."""
    coords = np.asarray(coords)
    assert len(set(coords.tolist())) == len(coords)
    dist = np.abs(coords[:, None] - coords[None, :]).astype(float)
    ids = [f"x{k}" for k in range(len(coords))]
    return mmsot.FiniteMetricMeasureSpace(ids, dist, [1] * len(coords))


def random_line_space(rng, n, spread=40):
    coords = rng.integers(0, spread, size=n)
    while len(set(coords.tolist())) < n:
        coords = rng.integers(0, spread, size=n)
    return line_space(coords)


def random_marginals(rng, space, m, n, high=9):
    """Disjoint supports: first m points vs next n points, exact weights."""
    a = [Fraction(int(x)) for x in rng.integers(1, high, size=m)]
    b = [Fraction(int(x)) for x in rng.integers(1, high, size=n)]
    sa, sb = sum(a), sum(b)
    w0 = [x / sa for x in a] + [Fraction(0)] * n
    w1 = [Fraction(0)] * m + [x / sb for x in b]
    pad = space.n - m - n
    mu0 = mmsot.DiscreteMeasure(space, w0 + [Fraction(0)] * pad)
    mu1 = mmsot.DiscreteMeasure(space, w1 + [Fraction(0)] * pad)
    return mu0, mu1
