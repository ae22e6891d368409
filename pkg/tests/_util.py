"""Shared helpers for the test suite."""

import numpy as np

from hopqa.kge import ComplexModel


def random_model(rng: np.random.Generator, n_ent: int, n_rel: int, d: int) -> ComplexModel:
    scale = 1.0 / np.sqrt(d)
    return ComplexModel(
        entity_re=rng.normal(0, scale, (n_ent, d)),
        entity_im=rng.normal(0, scale, (n_ent, d)),
        relation_re=rng.normal(0, scale, (n_rel, d)),
        relation_im=rng.normal(0, scale, (n_rel, d)),
    )


def entity_complex(model: ComplexModel, idx: int) -> np.ndarray:
    return model.entity_re[idx] + 1j * model.entity_im[idx]


def relation_complex(model: ComplexModel, idx: int) -> np.ndarray:
    return model.relation_re[idx] + 1j * model.relation_im[idx]


def central_difference(fn, array: np.ndarray, idx, step: float = 1e-5) -> float:
    """Two-point central difference of ``fn()`` along one array coordinate."""
    orig = array[idx]
    array[idx] = orig + step
    plus = fn()
    array[idx] = orig - step
    minus = fn()
    array[idx] = orig
    return (plus - minus) / (2.0 * step)


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-6)
