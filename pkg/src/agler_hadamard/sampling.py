"""Seeded random instances used by the reproduction sweeps."""
from __future__ import annotations

import numpy as np

from .polyalg import MatPoly, box_indices, indices_up_to_degree
from .tuples import DiscreteMeasure


def random_poly(
    rng: np.random.Generator,
    dim: int,
    max_degree: int,
    shape: tuple[int, int] = (1, 1),
    density: float = 0.5,
) -> MatPoly:
    """Complex Gaussian coefficients on a random subset of ``{|alpha| <= max_degree}``."""
    terms = {}
    for alpha in indices_up_to_degree(dim, max_degree):
        if rng.random() < density:
            terms[alpha] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return MatPoly(dim, shape, terms)


def random_box_poly(rng: np.random.Generator, n: tuple[int, ...], density: float = 0.6) -> MatPoly:
    """Scalar polynomial with random coefficients on the box ``alpha <= n``."""
    terms = {a: complex(rng.standard_normal(), rng.standard_normal())
             for a in box_indices(n) if rng.random() < density}
    return MatPoly.scalar(len(n), terms)


def random_torus(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(shape))


def random_measure(rng: np.random.Generator, dim: int, atoms: int, total_variation: float = 1.0) -> DiscreteMeasure:
    """Discrete measure with random torus atoms and complex weights of the given total variation."""
    w = rng.standard_normal(atoms) + 1j * rng.standard_normal(atoms)
    w = w * (total_variation / np.sum(np.abs(w)))
    return DiscreteMeasure(dim, random_torus(rng, (atoms, dim)), w)
