import itertools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nodal_plumbing.series import ComplexSeries

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def exponents(nvars, trunc):
    return [e for e in itertools.product(range(trunc + 1), repeat=nvars) if sum(e) <= trunc]


def gaussian_series(rng, vars, trunc, density=0.6, zero_constant=False, bound=3):
    """Small Gaussian-integer coefficients keep every ring operation exact in floating point."""
    terms = {}
    for e in exponents(len(vars), trunc):
        if zero_constant and sum(e) == 0:
            continue
        if rng.random() < density:
            terms[e] = complex(int(rng.integers(-bound, bound + 1)), int(rng.integers(-bound, bound + 1)))
    return ComplexSeries(tuple(vars), trunc, terms)


def normal_series(rng, vars, trunc, scale=1.0):
    terms = {e: complex(*rng.normal(size=2)) * scale for e in exponents(len(vars), trunc)}
    return ComplexSeries(tuple(vars), trunc, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def report(capsys):
    """Print a line straight to the terminal so it lands in the captured test log."""

    def emit(line):
        with capsys.disabled():
            print(line)

    return emit
