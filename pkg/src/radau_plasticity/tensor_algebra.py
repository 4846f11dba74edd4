"""Symmetric second- and fourth-order tensors in 6-component storage.

Second-order tensors are numpy arrays with trailing axis of length 6, ordered
``(xx, yy, zz, xy, yz, zx)``.  The entries are true tensor components: the
off-diagonals are *not* doubled (no engineering shear).  The doubling lives in
the contraction instead, ``A:B = sum(WEIGHTS * A * B)``.

Fourth-order tensors are 6x6 arrays ``C[I, J] = C_ijkl`` in the same ordering,
applied as ``apply(C, T) = C @ (WEIGHTS * T)``.  With this convention the
stored matrix of an elasticity tensor coincides with the familiar
engineering-Voigt stiffness matrix.

Internally some algorithms work in the orthonormal (Mandel) basis where the
contraction is the plain dot product; ``to_mandel``/``from_mandel`` convert.
"""

import numpy as np

WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
MANDEL = np.sqrt(WEIGHTS)
ONE = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

# (row, col) of each stored component in the 3x3 matrix
_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0))

IDENTITY4 = np.diag(1.0 / WEIGHTS)
ONE_ONE = np.outer(ONE, ONE)
DEV_PROJECTOR = IDENTITY4 - ONE_ONE / 3.0


def trace(t):
    t = np.asarray(t, dtype=float)
    return t[..., 0] + t[..., 1] + t[..., 2]


def deviator(t):
    t = np.asarray(t, dtype=float)
    return t - (trace(t) / 3.0)[..., None] * ONE


def contract(a, b):
    """Double contraction ``a:b`` of two symmetric tensors."""
    return np.sum(WEIGHTS * np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def norm(t):
    return np.sqrt(contract(t, t))


def dyad(a, b):
    return np.multiply.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def apply(c, t):
    """Contract a fourth-order tensor with a second-order one, ``c:t``."""
    return np.asarray(c, dtype=float) @ (WEIGHTS * np.asarray(t, dtype=float))


def compose(c, d):
    """Fourth-order composition ``c:d``."""
    return np.asarray(c, dtype=float) @ (WEIGHTS[:, None] * np.asarray(d, dtype=float))


def to_matrix(t):
    t = np.asarray(t, dtype=float)
    m = np.empty(t.shape[:-1] + (3, 3))
    for k, (i, j) in enumerate(_INDEX):
        m[..., i, j] = t[..., k]
        m[..., j, i] = t[..., k]
    return m


def from_matrix(m):
    """Symmetric part of a 3x3 matrix in 6-component storage."""
    m = np.asarray(m, dtype=float)
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.stack([sym[..., i, j] for i, j in _INDEX], axis=-1)


def to_mandel(t):
    return np.asarray(t, dtype=float) * MANDEL


def from_mandel(v):
    return np.asarray(v, dtype=float) / MANDEL


def tangent_to_mandel(c):
    return np.asarray(c, dtype=float) * np.outer(MANDEL, MANDEL)


def tangent_from_mandel(cm):
    return np.asarray(cm, dtype=float) / np.outer(MANDEL, MANDEL)


def isotropic_elasticity(kappa, mu):
    """``kappa 1(x)1 + 2 mu P`` as a stored 6x6 matrix."""
    return kappa * ONE_ONE + 2.0 * mu * DEV_PROJECTOR
