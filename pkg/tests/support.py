"""Random ensembles shared by the test modules."""

from __future__ import annotations

import numpy as np

from hardy_toeplitz.symbol import Symbol


def disc_point(rng: np.random.Generator, radius: float) -> complex:
    r = radius * np.sqrt(rng.uniform())
    return complex(r * np.exp(2j * np.pi * rng.uniform()))


def random_symbol(rng: np.random.Generator, max_n: int = 3, max_d: int = 4, radius: float = 2.0) -> Symbol:
    n = int(rng.integers(1, max_n + 1))
    d = int(rng.integers(0, max_d + 1))
    anti = [disc_point(rng, radius) for _ in range(n)]
    while abs(anti[-1]) < 1e-3:
        anti[-1] = disc_point(rng, radius)
    ana = [disc_point(rng, radius) for _ in range(d + 1)]
    return Symbol(tuple(anti), tuple(ana))


def random_poly(rng: np.random.Generator, degree: int, radius: float = 2.0) -> np.ndarray:
    return np.array([disc_point(rng, radius) for _ in range(degree + 1)])
