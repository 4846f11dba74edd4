"""Displacement-driven global Newton iteration with Gauss-point Radau IIa updates.

Partitioned ansatz: within each global iteration the current displacement
iterate defines ``E_n+1`` at every Gauss point, the local stage systems are
solved from the converged state at ``t_n``, and stresses plus consistent
tangents are assembled.  Local histories roll only when the step is accepted.
"""

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .. import tensor_algebra as ta
from ..stage_solver import StageSolverError, step_batch
from .hex8 import (N_GAUSS, ElementInversionError, displacement_gradient, reference_gradients,
                   strain_displacement, strain_from_displacement_gradient)


class NonConvergenceError(RuntimeError):
    pass


class GaussPointError(RuntimeError):
    pass


@dataclass
class GlobalState:
    """Converged state at time ``t``; arrays over points are (n_el * 8, ...)."""

    t: float
    u: np.ndarray
    Ep: np.ndarray
    alpha: np.ndarray
    E_n: np.ndarray
    E_prev: np.ndarray
    quad_ok: np.ndarray
    was_plastic: np.ndarray
    S: np.ndarray
    n_steps: int = 0
    u_prev: np.ndarray = None
    t_prev: float = 0.0

    def copy(self):
        return replace(self, **{k: np.array(v) for k, v in self.__dict__.items() if isinstance(v, np.ndarray)})


@dataclass
class StepInfo:
    iterations: int
    residuals: List[float] = field(default_factory=list)
    n_plastic: int = 0
    n_switching: int = 0


class FESolver:
    """Total-Lagrangian hex8 solver for one mesh, material and integrator."""

    def __init__(self, mesh, params, config, rel_tol=1e-10, abs_tol=1e-12, max_iter=25, tangent="consistent",
                 predictor="extrapolate"):
        if tangent not in ("consistent", "elastic"):
            raise ValueError("tangent must be 'consistent' or 'elastic'")
        if predictor not in ("extrapolate", "constant"):
            raise ValueError("predictor must be 'extrapolate' or 'constant'")
        self.predictor = predictor
        self.mesh = mesh
        self.params = params
        self.config = config
        self.tableau = config.tableau
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_iter = max_iter
        self.tangent = tangent
        self.grad, self.wdet = reference_gradients(mesh.nodes[mesh.elements])
        self.edofs = mesh.element_dofs()
        self.free = mesh.free_dofs
        n = mesh.n_dofs
        self._pair_index = (self.edofs[:, :, None] * n + self.edofs[:, None, :]).ravel()
        self.n_points = len(mesh.elements) * N_GAUSS

    def initial_state(self):
        npt = self.n_points
        z6 = np.zeros((npt, 6))
        return GlobalState(
            t=0.0, u=np.zeros(self.mesh.n_dofs), Ep=z6.copy(), alpha=np.zeros(npt), E_n=z6.copy(),
            E_prev=z6.copy(), quad_ok=np.zeros(npt, dtype=bool), was_plastic=np.zeros(npt, dtype=bool),
            S=z6.copy(),
        )

    def strains(self, u):
        u_el = u[self.edofs].reshape(-1, 8, 3)
        H = displacement_gradient(self.grad, u_el)
        F = np.eye(3) + H
        det = np.linalg.det(F)
        if np.any(det <= 0.0):
            e, g = np.argwhere(det <= 0.0)[0]
            raise ElementInversionError(f"element {e} inverted at Gauss point {g}")
        return F, strain_from_displacement_gradient(H)

    def assemble(self, u, state, with_tangent=True):
        """Internal forces, global tangent and the Gauss-point results at ``u``."""
        F, E = self.strains(u)
        ne = F.shape[0]
        try:
            res = step_batch(
                self.params, self.tableau, self.config, state.Ep, state.alpha, E.reshape(-1, 6),
                E_n=state.E_n, E_prev=state.E_prev, quad_ok=state.quad_ok, was_plastic=state.was_plastic,
                with_tangent=with_tangent and self.tangent == "consistent",
            )
        except StageSolverError as exc:
            raise GaussPointError(f"local update failed: {exc}") from exc
        S = res.S.reshape(ne, N_GAUSS, 6)
        B = strain_displacement(F, self.grad)
        wS = S * self.wdet[..., None]
        # stack the 8 Gauss points so that element sums become single matmuls
        Bs = B.reshape(ne, N_GAUSS * 6, 24)
        f_el = (wS.reshape(ne, 1, N_GAUSS * 6) @ Bs)[:, 0]
        f = np.bincount(self.edofs.ravel(), f_el.ravel(), minlength=self.mesh.n_dofs)
        K = None
        if with_tangent:
            if self.tangent == "consistent":
                C = res.tangent.reshape(ne, N_GAUSS, 6, 6)
            else:
                C = np.broadcast_to(self.params.elasticity, (ne, N_GAUSS, 6, 6))
            wCB = (C * self.wdet[..., None, None]) @ B
            k_mat = np.swapaxes(Bs, 1, 2) @ wCB.reshape(ne, N_GAUSS * 6, 24)
            Smat = ta.to_matrix(wS)
            g = (self.grad @ Smat @ np.swapaxes(self.grad, -1, -2)).sum(axis=1)
            k_geo = np.zeros((ne, 8, 3, 8, 3))
            for i in range(3):
                k_geo[:, :, i, :, i] = g
            k_geo = k_geo.reshape(ne, 24, 24)
            n = self.mesh.n_dofs
            K = np.bincount(self._pair_index, (k_mat + k_geo).ravel(), minlength=n * n).reshape(n, n)
        return f, K, res, E.reshape(-1, 6)

    def solve_time_step(self, state, t_next):
        """Advance the converged ``state`` to ``t_next``; returns ``(new_state, info)``."""
        u = state.u.copy()
        free = self.free
        bc = self.mesh.bc_dofs
        if self.predictor == "extrapolate" and state.u_prev is not None and state.t > state.t_prev:
            # linear extrapolation of the free DOFs only changes the starting iterate
            u[free] += (t_next - state.t) / (state.t - state.t_prev) * (state.u[free] - state.u_prev[free])
        elif self.predictor == "extrapolate" and len(free) and len(bc):
            # no history yet: carry the prescribed increment into the interior through the tangent at u_n
            _, K, _, _ = self.assemble(state.u, state, with_tangent=True)
            du = self.mesh.prescribed(t_next) - state.u[bc]
            u[free] -= np.linalg.solve(K[np.ix_(free, free)], K[np.ix_(free, bc)] @ du)
        u[bc] = self.mesh.prescribed(t_next)
        info = StepInfo(iterations=0)
        for it in range(self.max_iter + 1):
            f, K, res, E = self.assemble(u, state, with_tangent=True)
            r = np.linalg.norm(f[free])
            info.residuals.append(float(r))
            if r <= max(self.rel_tol * np.linalg.norm(f), self.abs_tol):
                break
            if it == self.max_iter:
                raise NonConvergenceError(
                    f"global Newton did not converge in {self.max_iter} iterations at t={t_next:g} (residual {r:.3e})"
                )
            u[free] -= np.linalg.solve(K[np.ix_(free, free)], f[free])
            info.iterations += 1
        info.n_plastic = int(res.plastic.sum())
        info.n_switching = int(res.sp_detected.sum())
        new = GlobalState(
            t=t_next, u=u, Ep=res.Ep, alpha=res.alpha, E_n=E, E_prev=state.E_n,
            quad_ok=~res.sp_detected, was_plastic=res.plastic, S=res.S, n_steps=state.n_steps + 1,
            u_prev=state.u, t_prev=state.t,
        )
        return new, info
