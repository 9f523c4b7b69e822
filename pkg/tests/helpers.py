"""Shared random-state generators for the test suite."""

import numpy as np

from spinport.spinalg import Ket
from spinport.teleport import BeamState


def random_ket(rng: np.random.Generator, dim: int) -> Ket:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket(v / np.linalg.norm(v))


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_beam(rng: np.random.Generator) -> BeamState:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = v / np.linalg.norm(v)
    return BeamState(v[0], v[1])
