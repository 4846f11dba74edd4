"""Radau IIa stage equations for von Mises plasticity at material points.

The stage system for ``s`` stages has unknowns ``Ep_i`` (6 each) and
``dGamma_i`` (1 each)::

    Ep_i   = Ep_n + sum_j a_ij dGamma_j N_j,      N_j = x_j / |x_j|
    Lam_i  = alpha_n + sqrt(2/3) sum_j a_ij dGamma_j
    0      = 2 mu |x_j| - sqrt(2/3) (sigma_Y + K'(Lam_i)),   x_i = dev(E_i) - Ep_i

and is solved by Newton's method with the exact Jacobian.  Because Radau IIa
is stiffly accurate the step result is the last stage.  The consistent
tangent follows from the same Jacobian by implicit differentiation with
respect to the end-of-step strain.

All heavy lifting is vectorized over a batch of material points and done in
the orthonormal (Mandel) basis; public functions take and return tensors in
the 6-component storage of :mod:`tensor_algebra`.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from . import tensor_algebra as ta
from .butcher import radau_iia
from .constitutive import SQRT23, PlasticState, StressResult, hardening_d1, stress, yield_radius
from .strain_path import (
    InterpolationMode,
    SPDetection,
    StrainHistory,
    SwitchingPoint,
    detect_sp_extrapolation,
    detect_sp_linear,
    detect_sp_quadratic,
    interpolation_slopes,
    interpolation_weights,
)

METHOD_LABELS = ("BE", "RIIa-l", "RIIa-l-SP", "RIIa-q", "RIIa-q-SP", "RIIa-q-exSP")

_METHODS = {
    "BE": (InterpolationMode.CONSTANT, SPDetection.OFF),
    "RIIa-l": (InterpolationMode.LINEAR, SPDetection.OFF),
    "RIIa-l-SP": (InterpolationMode.LINEAR, SPDetection.LINEAR),
    "RIIa-q": (InterpolationMode.QUADRATIC, SPDetection.OFF),
    "RIIa-q-SP": (InterpolationMode.QUADRATIC, SPDetection.QUADRATIC),
    "RIIa-q-exSP": (InterpolationMode.QUADRATIC, SPDetection.EXTRAPOLATION),
}

_E6 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
_I6 = np.eye(6)
_P6 = _I6 - np.outer(_E6, _E6) / 3.0


class StageSolverError(RuntimeError):
    def __init__(self, message, residual=np.nan):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class TangentError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    stages: int = 2
    interpolation: InterpolationMode = InterpolationMode.QUADRATIC
    sp_detection: SPDetection = SPDetection.OFF
    clamp_stages: bool = True
    newton_tol: float = 1e-12
    max_iter: int = 50
    backend: str = "compiled"

    def __post_init__(self):
        if self.backend not in ("compiled", "numpy"):
            raise ValueError("backend must be 'compiled' or 'numpy'")
        object.__setattr__(self, "interpolation", InterpolationMode(self.interpolation))
        object.__setattr__(self, "sp_detection", SPDetection(self.sp_detection))
        if self.stages not in (1, 2, 3):
            raise ValueError(f"stages must be 1, 2 or 3, got {self.stages}")

    @classmethod
    def from_label(cls, label, stages=2, **kwargs):
        if label not in _METHODS:
            raise ValueError(f"unknown method {label!r}; valid: {', '.join(METHOD_LABELS)}")
        interpolation, sp = _METHODS[label]
        if label == "BE":
            stages = 1
        return cls(stages=stages, interpolation=interpolation, sp_detection=sp, **kwargs)

    @property
    def label(self):
        for name, (interp, sp) in _METHODS.items():
            if (interp, sp) == (self.interpolation, self.sp_detection):
                return name
        return f"{self.interpolation.value}/{self.sp_detection.value}"

    @property
    def tableau(self):
        return radau_iia(self.stages)


@dataclass
class StageSolution:
    Ep_stages: np.ndarray
    dGamma_stages: np.ndarray
    Lambda_stages: np.ndarray
    flow_directions: np.ndarray
    norms: np.ndarray
    active: np.ndarray
    stage_strains: np.ndarray
    iterations: int = 0
    residuals: List[float] = field(default_factory=list)


@dataclass
class StepResult:
    new_state: PlasticState
    stress: StressResult
    tangent: np.ndarray
    stage_strains_used: Optional[np.ndarray]
    iterations: int
    plastic: bool
    switching_point: Optional[SwitchingPoint] = None
    residuals: List[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# batched kernels (Mandel basis)


def _dev(v):
    return v - (v[..., :3].sum(axis=-1, keepdims=True) / 3.0) * _E6


class _StageProblem:
    """Stage equations of a batch of points sharing material and tableau."""

    def __init__(self, params, tableau, Ep_n, alpha_n, Ehat, coupling=None):
        self.params = params
        self.A = np.asarray(tableau.A)
        self.s = tableau.s
        self.Ep_n = Ep_n
        self.alpha_n = alpha_n
        self.Ehat = Ehat
        self.coupling = coupling
        self.dxdEp = -_I6 if coupling is None else _P6 @ coupling - _I6
        self.inv2mu = 1.0 / (2.0 * params.mu)

    def subset(self, idx):
        sub = object.__new__(_StageProblem)
        sub.__dict__.update(self.__dict__)
        sub.Ep_n = self.Ep_n[idx]
        sub.alpha_n = self.alpha_n[idx]
        sub.Ehat = self.Ehat[idx]
        return sub

    def kinematics(self, Ep):
        E = self.Ehat if self.coupling is None else self.Ehat + Ep @ self.coupling.T
        x = _dev(E) - Ep
        nx = np.sqrt(np.einsum("...k,...k->...", x, x))
        if np.any(nx == 0.0):
            raise StageSolverError("undefined flow direction: |dev(E) - Ep| = 0", 0.0)
        return x / nx[..., None], nx

    def lam(self, dG):
        return self.alpha_n[:, None] + SQRT23 * dG @ self.A.T

    def residual(self, Ep, dG, active):
        N, nx = self.kinematics(Ep)
        lam = self.lam(dG)
        r_ep = Ep - self.Ep_n[:, None, :] - np.einsum("ij,nj,njk->nik", self.A, dG, N)
        r_f = np.where(active, nx - yield_radius(self.params, lam) * self.inv2mu, dG)
        return np.concatenate([r_ep.reshape(len(Ep), -1), r_f], axis=1), N, nx, lam

    def jacobian(self, dG, N, nx, lam, active):
        n, s = dG.shape
        A = self.A
        proj = (_I6 - N[..., :, None] * N[..., None, :]) / nx[..., None, None]
        Q = proj @ self.dxdEp
        J = np.empty((n, 7 * s, 7 * s))
        blk = -np.einsum("ij,nj,njkl->nikjl", A, dG, Q)
        for i in range(s):
            blk[:, i, :, i, :] += _I6
        J[:, : 6 * s, : 6 * s] = blk.reshape(n, 6 * s, 6 * s)
        J[:, : 6 * s, 6 * s :] = -np.einsum("ij,njk->nikj", A, N).reshape(n, 6 * s, s)
        row = np.zeros((n, s, s, 6))
        idx = np.arange(s)
        row[:, idx, idx, :] = np.where(active[..., None], N @ self.dxdEp, 0.0)
        J[:, 6 * s :, : 6 * s] = row.reshape(n, s, 6 * s)
        k2 = hardening_d1(self.params, lam)
        gg = -(2.0 / 3.0) * self.inv2mu * k2[:, :, None] * A[None]
        J[:, 6 * s :, 6 * s :] = np.where(active[:, :, None], gg, np.eye(s)[None])
        return J, proj


def _newton(problem, Ep, dG, active, tol, max_iter, log=None):
    n, s = dG.shape
    iters = np.zeros(n, dtype=int)
    todo = np.arange(n)
    for _ in range(max_iter + 1):
        if todo.size == 0:
            break
        sub = problem.subset(todo)
        R, N, nx, lam = sub.residual(Ep[todo], dG[todo], active[todo])
        rn = np.linalg.norm(R, axis=1)
        if log is not None:
            log.append(float(rn[0]))
        if not np.all(np.isfinite(rn)):
            raise StageSolverError("non-finite stage residual", float(np.nanmax(rn)))
        if iters[todo].max() >= max_iter:
            bad = rn >= tol
            if np.any(bad):
                raise StageSolverError("stage Newton did not converge", float(rn[bad].max()))
        J, _ = sub.jacobian(dG[todo], N, nx, lam, active[todo])
        delta = np.linalg.solve(J, -R[..., None])[..., 0]
        Ep[todo] += delta[:, : 6 * s].reshape(-1, s, 6)
        dG[todo] += delta[:, 6 * s :]
        iters[todo] += 1
        # one extra update after reaching tol polishes to round-off
        todo = todo[rn >= tol]
    return iters


def solve_stage_batch(params, tableau, Ep_n, alpha_n, Ehat, coupling=None, clamp=True, tol=1e-12, max_iter=50, log=None):
    """Solve the stage system for a batch (Mandel basis).

    ``Ep_n (n, 6)``, ``alpha_n (n,)``, ``Ehat (n, s, 6)``.  ``coupling`` is an
    optional 6x6 matrix ``M`` making the stage strain ``Ehat_i + M Ep_i``.
    Returns ``(Ep, dG, active, iterations)``.
    """
    n, s = Ehat.shape[0], tableau.s
    Ep = np.repeat(Ep_n[:, None, :], s, axis=1).copy()
    dG = np.zeros((n, s))
    active = np.ones((n, s), dtype=bool)
    problem = _StageProblem(params, tableau, Ep_n, alpha_n, Ehat, coupling)
    iters = _newton(problem, Ep, dG, active, tol, max_iter, log)
    if not clamp or s == 1:
        return Ep, dG, active, iters
    for _ in range(2 * s):
        # active set: a stage with negative increment is held elastic, and released
        # again if its yield function turns positive
        _, nx = problem.kinematics(Ep)
        f = nx - yield_radius(params, problem.lam(dG)) * problem.inv2mu
        new_active = active.copy()
        new_active[:, :-1] &= ~(dG[:, :-1] < -1e-15)
        new_active[:, :-1] |= ~active[:, :-1] & (f[:, :-1] > 1e-13)
        changed = np.flatnonzero(np.any(new_active != active, axis=1))
        if changed.size == 0:
            break
        active = new_active
        dG[changed] = np.where(active[changed], dG[changed], 0.0)
        sub_iters = np.zeros(n, dtype=int)
        Ep_c, dG_c = Ep[changed], dG[changed]
        sub_iters[changed] = _newton(problem.subset(changed), Ep_c, dG_c, active[changed], tol, max_iter)
        Ep[changed], dG[changed] = Ep_c, dG_c
        iters += sub_iters
    return Ep, dG, active, iters


def tangent_batch(params, tableau, alpha_n, Ep, dG, active, Ehat, G):
    """Consistent tangent ``dS/dE_n+1`` (Mandel) for converged stage solutions.

    ``G (n, s, 6, 6)`` holds ``dEhat_i / dE_n+1``; for plain interpolation it
    is ``cbar_i * I`` with ``cbar_i = c_i`` (linear) or ``c_i (c_i + 1) / 2``
    (quadratic).  Linearizing the stage residual gives the system
    ``J dX = -dR/dE`` whose last-stage block yields ``dEp_n+1 / dE_n+1``.
    """
    n, s = dG.shape
    problem = _StageProblem(params, tableau, None, alpha_n, Ehat)
    N, nx = problem.kinematics(Ep)
    lam = problem.lam(dG)
    J, proj = problem.jacobian(dG, N, nx, lam, active)
    PG = _P6 @ G
    rhs = np.zeros((n, 7 * s, 6))
    A = problem.A
    for i in range(s):
        acc = np.zeros((n, 6, 6))
        for j in range(s):
            acc -= A[i, j] * dG[:, j, None, None] * (proj[:, j] @ PG[:, j])
        rhs[:, 6 * i : 6 * i + 6] = acc
        rhs[:, 6 * s + i] = np.where(active[:, i, None], np.einsum("nk,nkl->nl", N[:, i], PG[:, i]), 0.0)
    try:
        dX = np.linalg.solve(J, -rhs)
    except np.linalg.LinAlgError as exc:
        raise TangentError("singular tangent system") from exc
    dEp = dX[:, 6 * (s - 1) : 6 * s]
    C = ta.tangent_to_mandel(params.elasticity)
    return C[None] - 2.0 * params.mu * dEp


# ---------------------------------------------------------------------------
# predictor-corrector step for a batch of points


@dataclass
class BatchStepResult:
    Ep: np.ndarray
    alpha: np.ndarray
    S: np.ndarray
    tangent: np.ndarray
    plastic: np.ndarray
    sp_detected: np.ndarray
    sp_x: np.ndarray
    stage_strains: Optional[np.ndarray]
    iterations: np.ndarray
    sp_E: Optional[np.ndarray] = None


def _trial(params, E, Ep, alpha):
    x = ta.deviator(E) - Ep
    nx = ta.norm(x)
    return 2.0 * params.mu * nx - yield_radius(params, alpha), nx


def _cbar(mode, c):
    if mode is InterpolationMode.CONSTANT:
        return np.ones_like(c)
    if mode is InterpolationMode.LINEAR:
        return c.copy()
    return 0.5 * c * (c + 1.0)


def step_batch(params, tableau, config, Ep, alpha, E_next, E_n=None, E_prev=None, quad_ok=None,
               was_plastic=None, with_tangent=True):
    """Table-style predictor-corrector update of ``n`` points.

    Tensors in 6-component storage with shape ``(n, 6)``.  ``quad_ok`` marks
    points whose ``E_prev`` may support quadratic reconstruction,
    ``was_plastic`` points whose last accepted step was plastic (no switching
    point is searched for those).
    """
    E_next = np.atleast_2d(np.asarray(E_next, dtype=float))
    n = E_next.shape[0]
    Ep = np.atleast_2d(np.asarray(Ep, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if E_n is None:
        E_n = np.zeros_like(E_next)
    quad_ok = np.zeros(n, dtype=bool) if quad_ok is None or E_prev is None else np.asarray(quad_ok, dtype=bool)
    was_plastic = np.zeros(n, dtype=bool) if was_plastic is None else np.asarray(was_plastic, dtype=bool)
    s = tableau.s
    c = np.asarray(tableau.c)
    mu2 = 2.0 * params.mu

    f_next, nx_next = _trial(params, E_next, Ep, alpha)
    plastic = (f_next >= 0.0) & (nx_next > 0.0)

    Ep_new = Ep.copy()
    alpha_new = alpha.copy()
    C = params.elasticity
    tangent = np.broadcast_to(C, (n, 6, 6)).copy() if with_tangent else None
    sp_detected = np.zeros(n, dtype=bool)
    sp_x = np.full(n, np.nan)
    sp_E = np.full((n, 6), np.nan)
    iterations = np.zeros(n, dtype=int)
    stage_out = None

    pl = np.flatnonzero(plastic)
    if pl.size:
        mode = config.interpolation
        use_quad = quad_ok[pl] & (mode is InterpolationMode.QUADRATIC)
        Em = ta.to_mandel(E_n[pl])
        Enx = ta.to_mandel(E_next[pl])
        Epr = ta.to_mandel(E_prev[pl]) if E_prev is not None else np.zeros_like(Em)
        dE = Enx - Em

        # default reconstruction on the full step
        if mode is InterpolationMode.CONSTANT:
            Ehat = np.repeat(Enx[:, None, :], s, axis=1)
        else:
            Ehat = Em[:, None, :] + c[None, :, None] * dE[:, None, :]
            if np.any(use_quad):
                wp, wn, wx = interpolation_weights(InterpolationMode.QUADRATIC, c)
                q = use_quad
                Ehat[q] = wp[None, :, None] * Epr[q, None, :] + wn[None, :, None] * Em[q, None, :] + wx[None, :, None] * Enx[q, None, :]
        cb_lin = _cbar(InterpolationMode.LINEAR if mode is not InterpolationMode.CONSTANT else mode, c)
        cb_quad = _cbar(InterpolationMode.QUADRATIC, c)
        cb = np.where(use_quad[:, None], cb_quad[None, :], cb_lin[None, :])
        G = cb[..., None, None] * _I6

        if config.sp_detection is not SPDetection.OFF:
            f_n, _ = _trial(params, E_n[pl], Ep[pl], alpha[pl])
            cand = np.flatnonzero(~was_plastic[pl] & (f_n < 0.0))
            for k in cand:
                g = pl[k]
                variant = config.sp_detection
                if variant is not SPDetection.LINEAR and not quad_ok[g]:
                    variant = SPDetection.LINEAR
                hist = StrainHistory(E_n=E_n[g], E_next=E_next[g], dt=1.0,
                                     E_prev=E_prev[g] if quad_ok[g] else None)
                state = PlasticState(Ep=Ep[g], alpha=float(alpha[g]))
                if variant is SPDetection.LINEAR:
                    sp = detect_sp_linear(hist, params, state)
                elif variant is SPDetection.QUADRATIC:
                    sp = detect_sp_quadratic(hist, params, state)
                else:
                    sp = detect_sp_extrapolation(hist, params, state, fallback=False)
                    if sp is None:
                        # extrapolated line misses the surface within the step
                        variant = SPDetection.LINEAR
                        sp = detect_sp_linear(hist, params, state)
                if sp is None or sp.degenerate:
                    continue
                sp_detected[g] = True
                sp_x[g] = sp.x
                sp_E[g] = sp.E_sp
                x = sp.x
                tau = x + c * (1.0 - x)
                if variant is SPDetection.EXTRAPOLATION:
                    Esp = ta.to_mandel(sp.E_sp)
                    Ehat[k] = Esp[None, :] + c[:, None] * (Enx[k] - Esp)[None, :]
                    G[k] = c[:, None, None] * _I6
                    continue
                imode = InterpolationMode.QUADRATIC if variant is SPDetection.QUADRATIC else InterpolationMode.LINEAR
                wp, wn, wx = (np.broadcast_to(w, tau.shape) for w in interpolation_weights(imode, tau))
                dp, dn, dx_ = (np.broadcast_to(w, tau.shape) for w in interpolation_slopes(imode, tau))
                Ehat[k] = wp[:, None] * Epr[k] + wn[:, None] * Em[k] + wx[:, None] * Enx[k]
                # the switching point moves with E_n+1: dx/dE = -w_next(x) N_sp / (N_sp . E'(x))
                xw = [float(v) for v in interpolation_weights(imode, x)]
                xs = [float(v) for v in interpolation_slopes(imode, x)]
                nsp = _dev(xw[0] * Epr[k] + xw[1] * Em[k] + xw[2] * Enx[k]) - ta.to_mandel(Ep[g])
                nsp = nsp / np.linalg.norm(nsp)
                dpath = xs[0] * Epr[k] + xs[1] * Em[k] + xs[2] * Enx[k]
                dxdE = -xw[2] * nsp / (nsp @ dpath)
                dEi_dx = (dp[:, None] * Epr[k] + dn[:, None] * Em[k] + dx_[:, None] * Enx[k]) * (1.0 - c)[:, None]
                G[k] = wx[:, None, None] * _I6 + np.einsum("si,j->sij", dEi_dx, dxdE)

        Ep_m = ta.to_mandel(Ep[pl])
        stage_out = ta.from_mandel(Ehat)
        if config.backend == "compiled":
            mat = np.array([params.mu, params.sigma_Y, params.sigma_inf_minus_Y, params.H, params.delta, params.kappa])
            Ep_end, alpha_end, _, _, iters, Cm, status = _kernels.stage_update(
                np.ascontiguousarray(tableau.A), mat, Ep_m, alpha[pl].copy(), Ehat, G,
                config.clamp_stages, config.newton_tol, config.max_iter, with_tangent,
            )
            if np.any(status != _kernels.OK):
                code = int(status[status != _kernels.OK][0])
                raise StageSolverError(
                    "undefined flow direction: |dev(E) - Ep| = 0" if code == _kernels.DEGENERATE
                    else "stage Newton did not converge"
                )
            Ep_new[pl] = ta.from_mandel(Ep_end)
            alpha_new[pl] = alpha_end
            iterations[pl] = iters
            if with_tangent:
                tangent[pl] = ta.tangent_from_mandel(Cm)
        else:
            Ep_st, dG, active, iters = solve_stage_batch(
                params, tableau, Ep_m, alpha[pl], Ehat, clamp=config.clamp_stages,
                tol=config.newton_tol, max_iter=config.max_iter,
            )
            Ep_new[pl] = ta.from_mandel(Ep_st[:, -1])
            alpha_new[pl] = alpha[pl] + SQRT23 * dG @ np.asarray(tableau.A)[-1]
            iterations[pl] = iters
            if with_tangent:
                Cm = tangent_batch(params, tableau, alpha[pl], Ep_st, dG, active, Ehat, G)
                tangent[pl] = ta.tangent_from_mandel(Cm)

    S = params.kappa * ta.trace(E_next)[:, None] * ta.ONE + mu2 * (ta.deviator(E_next) - Ep_new)
    return BatchStepResult(
        Ep=Ep_new, alpha=alpha_new, S=S, tangent=tangent, plastic=plastic,
        sp_detected=sp_detected, sp_x=sp_x, stage_strains=stage_out, iterations=iterations, sp_E=sp_E,
    )


# ---------------------------------------------------------------------------
# single-point API


def solve_stages(params, tableau, state_n, stage_strains, coupling=None, clamp=True, tol=1e-12, max_iter=50):
    """Solve the stage system of one point for given stage strains ``(s, 6)``."""
    stage_strains = np.asarray(stage_strains, dtype=float)
    Ehat = ta.to_mandel(stage_strains)[None]
    M = None
    if coupling is not None:
        M = ta.tangent_to_mandel(coupling)
    log = []
    Ep, dG, active, iters = solve_stage_batch(
        params, tableau, ta.to_mandel(state_n.Ep)[None], np.array([state_n.alpha]), Ehat,
        coupling=M, clamp=clamp, tol=tol, max_iter=max_iter, log=log,
    )
    problem = _StageProblem(params, tableau, None, np.array([state_n.alpha]), Ehat, M)
    N, nx = problem.kinematics(Ep)
    return StageSolution(
        Ep_stages=ta.from_mandel(Ep[0]),
        dGamma_stages=dG[0],
        Lambda_stages=problem.lam(dG)[0],
        flow_directions=ta.from_mandel(N[0]),
        norms=nx[0],
        active=active[0],
        stage_strains=stage_strains,
        iterations=int(iters[0]),
        residuals=log,
    )


def consistent_tangent(params, tableau, solution, stage_strains=None, interpolation_mode="linear", sensitivity=None):
    """Elasto-plastic tangent of a converged stage solution (6x6 stored form).

    ``sensitivity`` overrides the stage-strain derivatives ``dE_i/dE_n+1``
    as an ``(s, 6, 6)`` array in stored form; otherwise they are
    ``cbar_i * Id`` from ``interpolation_mode``.
    """
    if stage_strains is None:
        stage_strains = solution.stage_strains
    c = np.asarray(tableau.c)
    if sensitivity is None:
        G = _cbar(InterpolationMode(interpolation_mode), c)[:, None, None] * _I6
    else:
        G = ta.tangent_to_mandel(sensitivity)
    alpha_n = solution.Lambda_stages[0] - SQRT23 * np.asarray(tableau.A)[0] @ solution.dGamma_stages
    Cm = tangent_batch(
        params, tableau, np.array([alpha_n]), ta.to_mandel(solution.Ep_stages)[None], solution.dGamma_stages[None],
        solution.active[None], ta.to_mandel(np.asarray(stage_strains, dtype=float))[None], G[None],
    )
    return ta.tangent_from_mandel(Cm[0])


def step(params, tableau, state_n, history, config, t_n=0.0, previously_plastic=False):
    """Predictor-corrector update of one point over ``[t_n, t_n + dt]``."""
    E_prev = None if history.E_prev is None else np.asarray(history.E_prev, dtype=float)[None]
    res = step_batch(
        params, tableau, config, np.asarray(state_n.Ep, dtype=float)[None], np.array([state_n.alpha]),
        np.asarray(history.E_next, dtype=float)[None], E_n=np.asarray(history.E_n, dtype=float)[None],
        E_prev=E_prev, quad_ok=np.array([E_prev is not None]), was_plastic=np.array([previously_plastic]),
    )
    new_state = PlasticState(Ep=res.Ep[0], alpha=float(res.alpha[0]))
    sp = None
    if res.sp_detected[0]:
        x = float(res.sp_x[0])
        sp = SwitchingPoint(x=x, t_sp=t_n + x * history.dt, E_sp=res.sp_E[0].copy())
    return StepResult(
        new_state=new_state,
        stress=stress(params, history.E_next, new_state),
        tangent=res.tangent[0],
        stage_strains_used=None if res.stage_strains is None else res.stage_strains[0],
        iterations=int(res.iterations[0]),
        plastic=bool(res.plastic[0]),
        switching_point=sp,
    )
