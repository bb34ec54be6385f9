"""Small named pencils with known resolvents, used by the CLI and the tests."""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from .core import LinearPencil, as_matrix
from .markov import perturbed_pencil, staircase_chain
from .spectral import shift_pencil


def _m(rows) -> np.ndarray:
    return as_matrix([[float(x) for x in row] for row in rows])


def double_pole_pencil() -> LinearPencil:
    """3x3 pencil with det = z^2 (z + 1) and a second-order pole at 0."""
    return LinearPencil(_m([[1, 0, 1], [1, 0, 0], [1, 0, 0]]),
                        _m([[1, 0, -1], [0, 1, 0], [0, 1, 1]]))


#: R_{-2}, R_{-1}, R_0 of the double pole at 0
DOUBLE_POLE_COEFFS = (
    _m([[0, 0, 0], [0, -1, 1], [0, 0, 0]]),
    _m([[0, 1, -1], [-1, 3, -2], [0, -1, 1]]),
    _m([[1, -2, 2], [1, -2, 2], [0, 0, 0]]),
)


def three_pole_pencil() -> LinearPencil:
    """3x3 pencil with simple poles at 0, -1 and -3."""
    return LinearPencil(_m([[1, 1, 1], [1, 2, 1], [2, 1, 2]]),
                        _m([[1, 0, 0], [0, 1, 0], [1, 0, 1]]))


#: residues at 0, -1, -3
THREE_POLE_RESIDUES = {
    0: _m([[1, F(-1, 3), F(-1, 3)], [0, 0, 0], [-1, F(1, 3), F(1, 3)]]),
    -1: _m([[0, 0, 0], [0, F(1, 2), F(-1, 2)], [0, F(-1, 2), F(1, 2)]]),
    -3: _m([[0, F(1, 3), F(1, 3)], [0, F(1, 2), F(1, 2)], [0, F(1, 6), F(1, 6)]]),
}

#: (s, r) -> (R_{-1}, R_0) of the expansion about 0 on s < |z| < r
THREE_POLE_REGIONS = {
    (0.0, 1.0): (
        _m([[1, F(-1, 3), F(-1, 3)], [0, 0, 0], [-1, F(1, 3), F(1, 3)]]),
        _m([[0, F(1, 9), F(1, 9)], [0, F(2, 3), F(-1, 3)], [0, F(-4, 9), F(5, 9)]]),
    ),
    (1.0, 3.0): (
        _m([[1, F(-1, 3), F(-1, 3)], [0, F(1, 2), F(-1, 2)], [-1, F(-1, 6), F(5, 6)]]),
        _m([[0, F(1, 9), F(1, 9)], [0, F(1, 6), F(1, 6)], [0, F(1, 18), F(1, 18)]]),
    ),
    (3.0, float("inf")): (
        _m([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]),
        _m([[0, 0, 0], [0, 0, 0], [0, 0, 0]]),
    ),
}


def identity_pencil(n: int = 3) -> LinearPencil:
    return LinearPencil(np.eye(n), np.zeros((n, n)))


def staircase_pencil(r: int) -> LinearPencil:
    return perturbed_pencil(staircase_chain(r)).pencil


NAMED = {
    "double-pole": double_pole_pencil,
    "three-pole": three_pole_pencil,
    "identity": identity_pencil,
    "staircase-2": lambda: staircase_pencil(2),
    "staircase-4": lambda: staircase_pencil(4),
    "weighted-shift": lambda: shift_pencil(0.5, 6),
}


def named(name: str) -> LinearPencil:
    try:
        return NAMED[name]()
    except KeyError:
        raise KeyError(f"unknown pencil {name!r}; known: {', '.join(sorted(NAMED))}") from None
