"""Trilinear 8-node hexahedron with 2x2x2 Gauss quadrature, total Lagrangian."""

import numpy as np

from .. import tensor_algebra as ta

# natural coordinates of the nodes, counter-clockwise bottom face then top face
NODE_XI = np.array(
    [[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1], [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]],
    dtype=float,
)
_G = 1.0 / np.sqrt(3.0)
GAUSS_POINTS = NODE_XI * _G
GAUSS_WEIGHTS = np.ones(8)
N_GAUSS = 8

# stored-component order (xx, yy, zz, xy, yz, zx) as index pairs
_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0))


class ElementInversionError(RuntimeError):
    pass


def shape_functions(xi):
    xi = np.atleast_2d(xi)
    return 0.125 * np.prod(1.0 + xi[:, None, :] * NODE_XI[None], axis=-1)


def shape_gradients(xi):
    """dN_a/dxi_k with shape ``(n_points, 8, 3)``."""
    xi = np.atleast_2d(xi)
    f = 1.0 + xi[:, None, :] * NODE_XI[None]
    out = np.empty(f.shape)
    for k in range(3):
        others = [m for m in range(3) if m != k]
        out[..., k] = 0.125 * NODE_XI[None, :, k] * f[..., others[0]] * f[..., others[1]]
    return out


def reference_gradients(coords, points=GAUSS_POINTS):
    """Material gradients ``dN_a/dX`` (n_el, n_gp, 8, 3) and ``detJ * w`` (n_el, n_gp)."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 2:
        coords = coords[None]
    dxi = shape_gradients(points)
    J = np.einsum("gak,eai->egik", dxi, coords)
    det = np.linalg.det(J)
    if np.any(det <= 0.0):
        e, g = np.argwhere(det <= 0.0)[0]
        raise ElementInversionError(f"non-positive reference Jacobian in element {e}, Gauss point {g}")
    grad = np.einsum("gak,egki->egai", dxi, np.linalg.inv(J))
    weights = GAUSS_WEIGHTS[: len(points)] if len(points) == 8 else np.ones(len(points))
    return grad, det * weights


def displacement_gradient(grad, u_el):
    """``H = sum_a u_a (x) dN_a/dX`` for all elements and points."""
    return np.einsum("eai,egaJ->egiJ", u_el, grad)


def deformation_gradient(grad, u_el):
    """``F = I + H``."""
    return np.eye(3) + displacement_gradient(grad, u_el)


def strain_from_displacement_gradient(H):
    """``E = (H + H^T + H^T H) / 2``; keeps relative precision at small strain."""
    HtH = np.einsum("...kI,...kJ->...IJ", H, H)
    return ta.from_matrix(0.5 * (H + np.swapaxes(H, -1, -2) + HtH))


def green_lagrange(F):
    """``E = (F^T F - I) / 2`` in 6-component storage."""
    return strain_from_displacement_gradient(F - np.eye(3))


def green_lagrange_strain(element_coords, nodal_displacements, gauss_point):
    """Green-Lagrange strain of one element at natural coordinates ``gauss_point``."""
    grad, _ = reference_gradients(element_coords, np.atleast_2d(gauss_point))
    H = displacement_gradient(grad, np.asarray(nodal_displacements, dtype=float).reshape(1, 8, 3))
    if np.linalg.det(np.eye(3) + H[0, 0]) <= 0.0:
        raise ElementInversionError("non-positive deformation Jacobian")
    return strain_from_displacement_gradient(H)[0, 0]


def strain_displacement(F, grad):
    """Variation matrix ``B`` with engineering shear rows, shape (..., 6, 24).

    ``B du`` gives ``(dE_xx, dE_yy, dE_zz, 2 dE_xy, 2 dE_yz, 2 dE_zx)``, so the
    internal virtual work is ``du . B^T S`` with S in stored components.
    """
    # FN[..., a, i, J] = F_iJ dN_a/dX_J (no sum)
    B = np.empty(F.shape[:-2] + (6, 8, 3))
    for row, (I, J) in enumerate(_PAIRS):
        if I == J:
            B[..., row, :, :] = F[..., None, :, I] * grad[..., :, I, None]
        else:
            B[..., row, :, :] = F[..., None, :, I] * grad[..., :, J, None] + F[..., None, :, J] * grad[..., :, I, None]
    return B.reshape(F.shape[:-2] + (6, 24))
