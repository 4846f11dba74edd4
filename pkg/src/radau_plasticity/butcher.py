"""Radau IIa Butcher tableaus for one, two and three stages."""

from dataclasses import dataclass

import numpy as np

_R6 = np.sqrt(6.0)


@dataclass(frozen=True)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def s(self):
        return len(self.b)

    @property
    def nominal_order(self):
        return 2 * self.s - 1

    def is_stiffly_accurate(self):
        return bool(np.array_equal(self.A[-1], self.b))


def radau_iia(s):
    """Closed-form coefficients; ``s=1`` is Backward Euler."""
    if s == 1:
        A = np.array([[1.0]])
        c = np.array([1.0])
    elif s == 2:
        A = np.array([[5.0 / 12.0, -1.0 / 12.0], [3.0 / 4.0, 1.0 / 4.0]])
        c = np.array([1.0 / 3.0, 1.0])
    elif s == 3:
        A = np.array(
            [
                [(88.0 - 7.0 * _R6) / 360.0, (296.0 - 169.0 * _R6) / 1800.0, (-2.0 + 3.0 * _R6) / 225.0],
                [(296.0 + 169.0 * _R6) / 1800.0, (88.0 + 7.0 * _R6) / 360.0, (-2.0 - 3.0 * _R6) / 225.0],
                [(16.0 - _R6) / 36.0, (16.0 + _R6) / 36.0, 1.0 / 9.0],
            ]
        )
        c = np.array([(4.0 - _R6) / 10.0, (4.0 + _R6) / 10.0, 1.0])
    else:
        raise ValueError(f"Radau IIa tableaus are provided for s in {{1, 2, 3}}, got {s!r}")
    A.setflags(write=False)
    c.setflags(write=False)
    b = A[-1].copy()
    b.setflags(write=False)
    return ButcherTableau(A=A, b=b, c=c)


def verify_order_conditions(tableau):
    """Residuals of the order conditions up to order three.

    Returns ``[(name, residual), ...]`` for
    ``sum b = 1``, ``sum b c = 1/2``, ``sum b c^2 = 1/3`` and ``sum b A c = 1/6``.
    """
    A, b, c = tableau.A, tableau.b, tableau.c
    return [
        ("sum b_i = 1", float(b.sum() - 1.0)),
        ("sum b_i c_i = 1/2", float(b @ c - 0.5)),
        ("sum b_i c_i^2 = 1/3", float(b @ c**2 - 1.0 / 3.0)),
        ("sum b_i a_ij c_j = 1/6", float(b @ A @ c - 1.0 / 6.0)),
    ]
