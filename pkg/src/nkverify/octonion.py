"""Octonion multiplication table and the seven-dimensional cross product.

Single source of truth: FANO_TRIPLES lists the oriented lines of the Fano
plane in the convention e1*e2 = e3, e1*e4 = e5, e2*e4 = e6, e3*e4 = e7.
Every product below is generated from that constant; nothing else encodes
signs. Indices 1..7 are the imaginary units, index 0 the real unit.
"""

from __future__ import annotations

import numpy as np

FANO_TRIPLES: tuple[tuple[int, int, int], ...] = (
    (1, 2, 3),
    (1, 4, 5),
    (2, 4, 6),
    (3, 4, 7),
    (1, 7, 6),
    (2, 5, 7),
    (3, 6, 5),
)


def _build_table():
    idx = np.zeros((8, 8), dtype=int)
    sgn = np.zeros((8, 8), dtype=int)
    idx[0, :] = np.arange(8)
    idx[:, 0] = np.arange(8)
    sgn[0, :] = 1
    sgn[:, 0] = 1
    for i in range(1, 8):
        idx[i, i] = 0
        sgn[i, i] = -1
    for a, b, c in FANO_TRIPLES:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            idx[x, y] = z
            sgn[x, y] = 1
            idx[y, x] = z
            sgn[y, x] = -1
    return idx, sgn


MULT_INDEX, MULT_SIGN = _build_table()


def multiply(a, b) -> np.ndarray:
    """Octonion product of two coefficient vectors of length 8."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(8)
    for i in range(8):
        ai = a[i]
        if ai == 0.0:
            continue
        for j in range(8):
            bj = b[j]
            if bj == 0.0:
                continue
            out[MULT_INDEX[i, j]] += MULT_SIGN[i, j] * ai * bj
    return out


def cross7(u, v) -> np.ndarray:
    """Cross product of imaginary octonions: Im(u * v) on R^7 coefficients."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.concatenate(([0.0], u))
    b = np.concatenate(([0.0], v))
    return multiply(a, b)[1:]


def unit(i: int) -> np.ndarray:
    """Imaginary unit e_i (i in 1..7) as an R^7 coefficient vector."""
    out = np.zeros(7)
    out[i - 1] = 1.0
    return out
