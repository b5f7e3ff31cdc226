"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from hesscond import CircleGrid, HessianModel, build_soar, make_operator


def soar_entry_reference(i: int, j: int, n: int, lengthscale: float) -> float:
    """Scalar-formula oracle for one SOAR entry, independent of the library.

    Evaluates (1 + |2 sin(theta/2)|/L) * exp(-|2 sin(theta/2)|/L) with the
    angle theta = 2*pi*(i - j)/n taken directly, relying on |sin| for the
    periodic wraparound.
    """
    theta = 2.0 * math.pi * (i - j) / n
    d = abs(2.0 * math.sin(theta / 2.0))
    return (1.0 + d / lengthscale) * math.exp(-d / lengthscale)


def make_model(kind: str, lb: float, lr: float, n: int = 200, p: int = 100,
               seed: int = 42, **kwargs) -> HessianModel:
    """SOAR-B, SOAR-R model with one canonical operator."""
    return HessianModel(
        background=build_soar(CircleGrid(n), lb),
        observation=build_soar(CircleGrid(p), lr),
        operator=make_operator(kind, p, n, seed=seed if kind == "random-direct" else None),
        **kwargs,
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
