"""Benchmark definitions, time-stepping drivers and the reference cache."""

import hashlib
import json
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import __version__
from . import tensor_algebra as ta
from .constitutive import MaterialParams, PlasticState, yield_trial
from .fem import FESolver, annulus_quarter_mesh, biaxial_mesh, simple_shear_mesh
from .stage_solver import IntegratorConfig, solve_stages
from .strain_path import SPDetection, StrainHistory, detect_sp_linear

DEFAULT_LADDER = (0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625)

_MESHES = {
    "simple_shear": simple_shear_mesh,
    "biaxial": biaxial_mesh,
    "annulus_quarter": annulus_quarter_mesh,
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """A benchmark: material, loading program, evaluation times and Δt ladder.

    FEM scenarios name a mesh builder plus keyword arguments.  Material-point
    scenarios prescribe ``E(t) = strain_rate * t``; components listed in
    ``coupled`` instead follow the plastic strain (``E_kk = Ep_kk``).
    """

    name: str
    params: MaterialParams
    eval_times: Tuple[float, ...]
    dts: Tuple[float, ...] = DEFAULT_LADDER
    ref_dt: float = 1e-4
    kind: str = "fem"
    mesh: str = ""
    mesh_kwargs: Dict[str, float] = field(default_factory=dict)
    strain_rate: Tuple[float, ...] = (0.0,) * 6
    coupled: Tuple[int, ...] = ()
    quantity: str = "S"
    ref_method: str = "RIIa-q-exSP"
    ref_stages: int = 3
    ref_rel_tol: float = 1e-13

    def __post_init__(self):
        if self.kind not in ("fem", "material_point"):
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "fem" and self.mesh not in _MESHES:
            raise ScenarioError(f"unknown mesh builder {self.mesh!r}; valid: {', '.join(_MESHES)}")
        object.__setattr__(self, "eval_times", tuple(float(t) for t in self.eval_times))
        object.__setattr__(self, "dts", tuple(float(d) for d in self.dts))

    @property
    def is_material_point(self):
        return self.kind == "material_point"

    def build_mesh(self):
        return _MESHES[self.mesh](**self.mesh_kwargs)

    def coupling_matrix(self):
        if not self.coupled:
            return None
        M = np.zeros((6, 6))
        for k in self.coupled:
            M[k, k] = 1.0 / ta.WEIGHTS[k]
        return M

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return Scenario.from_dict(d)

    def to_dict(self):
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "eval_times": list(self.eval_times),
            "dts": list(self.dts),
            "ref_dt": self.ref_dt,
            "kind": self.kind,
            "mesh": self.mesh,
            "mesh_kwargs": dict(self.mesh_kwargs),
            "strain_rate": list(self.strain_rate),
            "coupled": list(self.coupled),
            "quantity": self.quantity,
            "ref_method": self.ref_method,
            "ref_stages": self.ref_stages,
            "ref_rel_tol": self.ref_rel_tol,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        params = d.pop("params")
        if not isinstance(params, MaterialParams):
            params = MaterialParams.from_dict(params)
        for key in ("eval_times", "dts", "strain_rate", "coupled"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(params=params, **d)
        except TypeError as exc:
            raise ScenarioError(str(exc)) from exc

    def check_times(self, dt, eval_times=None):
        for t in self.eval_times if eval_times is None else eval_times:
            k = t / dt
            if abs(k - round(k)) > 1e-9 * max(1.0, k):
                raise ScenarioError(f"evaluation time {t:g} is not a multiple of dt={dt:g}")

    def cache_key(self, ref_dt=None, eval_times=None):
        payload = self.to_dict()
        payload["ref_dt"] = self.ref_dt if ref_dt is None else float(ref_dt)
        if eval_times is not None:
            payload["eval_times"] = [float(t) for t in eval_times]
        payload["version"] = __version__
        h = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
        if self.kind == "fem":
            for arr in self.build_mesh().fingerprint():
                h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:20]


_BIAXIAL = MaterialParams(E=700000.0, nu=0.2, sigma_Y=875.0, sigma_inf_minus_Y=211.0, H=1500.0, delta=300.0)
_ANNULUS = {
    "A0": (0.0, 0.0, 10000.0, 0.0),
    "B0": (0.0, 200.0, 3000.0, 5000.0),
    "A": (300.0, 0.0, 10000.0, 0.0),
    "B": (300.0, 200.0, 3000.0, 5000.0),
}
ANNULUS_LADDER = (0.05, 0.025, 0.0125, 0.00625, 0.003125)


def builtin_scenarios():
    """All benchmark scenarios, in a fixed order."""
    out = [
        Scenario(
            name="simple_shear",
            params=MaterialParams(E=210000.0, nu=0.3, sigma_Y=460.0, sigma_inf_minus_Y=0.0, H=10000.0, delta=0.0),
            eval_times=(20.0, 60.0, 100.0),
            dts=(4.0, 2.0, 1.0, 0.5, 0.25, 0.125),
            ref_dt=0.005,
            mesh="simple_shear",
            mesh_kwargs={"L": 1.0, "rate": 0.001},
        ),
        Scenario(
            name="biaxial",
            params=_BIAXIAL,
            eval_times=(1.0, 2.0, 5.0, 10.0),
            mesh="biaxial",
            mesh_kwargs={"L": 1.0, "rate_x": 0.0005, "rate_y": -0.002},
        ),
        Scenario(
            name="case_I",
            params=_BIAXIAL.replace(sigma_Y=0.0),
            eval_times=(1.5, 3.0),
            mesh="biaxial",
            mesh_kwargs={"L": 1.0, "rate_x": 0.0005, "rate_y": -0.002},
        ),
        Scenario(
            name="case_II",
            params=_BIAXIAL.replace(nu=0.0),
            eval_times=(1.0, 2.0, 5.0, 10.0),
            kind="material_point",
            strain_rate=(0.0005, 0.002, 0.0, 0.0, 0.0, 0.0),
            coupled=(2,),
            dts=tuple(d / 2 for d in DEFAULT_LADDER),
            ref_dt=1e-3,
            quantity="Ep_zz",
            ref_method="RIIa-q-SP",
        ),
    ]
    for case, (sy, sinf, H, delta) in _ANNULUS.items():
        out.append(
            Scenario(
                name=f"annulus_{case}",
                params=MaterialParams(E=68900.0, nu=0.33, sigma_Y=sy, sigma_inf_minus_Y=sinf, H=H, delta=delta),
                eval_times=(0.10, 0.25, 0.50),
                dts=ANNULUS_LADDER,
                ref_dt=1e-4,
                mesh="annulus_quarter",
                mesh_kwargs={"r_inner": 20.0, "r_outer": 40.0, "thickness": 1.0, "n_circ": 10, "n_rad": 10, "rate": 1.0},
            )
        )
    return out


def get_scenario(name):
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    raise ScenarioError(f"unknown scenario {name!r}; valid: {', '.join(s.name for s in builtin_scenarios())}")


@dataclass
class Snapshot:
    """Gauss-point fields at one time, arrays of shape (n_points, ...)."""

    t: float
    S: np.ndarray
    E: np.ndarray
    Ep: np.ndarray
    alpha: np.ndarray

    def field(self, quantity):
        if quantity in ("S", "E", "Ep"):
            return getattr(self, quantity)
        if quantity.startswith("Ep_") or quantity.startswith("S_") or quantity.startswith("E_"):
            base, comp = quantity.split("_")
            k = ("xx", "yy", "zz", "xy", "yz", "zx").index(comp)
            return getattr(self, base)[:, k : k + 1]
        raise ScenarioError(f"unknown quantity {quantity!r}")


@dataclass
class RunResult:
    scenario: str
    method: str
    stages: int
    dt: float
    snapshots: Dict[float, Snapshot]
    wall_time: float
    n_steps: int
    newton_iterations: int = 0
    switching_times: list = field(default_factory=list)
    trace: Optional[np.ndarray] = None


def _snapshot_times(eval_times, dt):
    return {int(round(t / dt)): float(t) for t in eval_times}


def run_material_point(scenario, config, dt, eval_times=None):
    """Integrate a homogeneous strain-driven point with exact stage strains.

    The prescribed strain is linear in time, so stage strains carry no
    interpolation error and the switching point from linear detection is the
    exact crossing time.  Before the crossing the state stays frozen.
    """
    if not scenario.is_material_point:
        raise ScenarioError(f"{scenario.name} is not a material-point scenario")
    eval_times = scenario.eval_times if eval_times is None else tuple(eval_times)
    scenario.check_times(dt, eval_times)
    params = scenario.params
    tab = config.tableau
    rate = np.asarray(scenario.strain_rate, dtype=float)
    M = scenario.coupling_matrix()
    c = np.asarray(tab.c)
    marks = _snapshot_times(eval_times, dt)
    n_steps = max(marks)

    def total(t, Ep):
        E = rate * t
        return E if M is None else E + ta.apply(M, Ep)

    state = PlasticState()
    was_plastic = False
    snaps = {}
    sp_times = []
    iters = 0
    t0 = time.perf_counter()
    for k in range(n_steps):
        t_n, t1 = k * dt, (k + 1) * dt
        E_trial = total(t1, state.Ep)
        plastic = yield_trial(params, E_trial, state) >= 0.0
        if plastic:
            start = t_n
            if config.sp_detection is not SPDetection.OFF and not was_plastic:
                E_n = total(t_n, state.Ep)
                if yield_trial(params, E_n, state) < 0.0:
                    sp = detect_sp_linear(StrainHistory(E_n=E_n, E_next=E_trial, dt=dt), params, state, t_n)
                    if sp is not None and not sp.degenerate:
                        start = t_n + sp.x * dt
                        sp_times.append(start)
            h = t1 - start
            Ehat = rate[None, :] * (start + c[:, None] * h)
            sol = solve_stages(params, tab, state, Ehat, coupling=M, clamp=config.clamp_stages,
                               tol=config.newton_tol, max_iter=config.max_iter)
            iters += sol.iterations
            state = PlasticState(Ep=sol.Ep_stages[-1], alpha=float(sol.Lambda_stages[-1]))
        was_plastic = plastic
        if k + 1 in marks:
            E = total(t1, state.Ep)
            S = params.kappa * ta.trace(E) * ta.ONE + 2.0 * params.mu * (ta.deviator(E) - state.Ep)
            snaps[marks[k + 1]] = Snapshot(t=marks[k + 1], S=S[None], E=E[None], Ep=state.Ep[None],
                                           alpha=np.array([state.alpha]))
    wall = time.perf_counter() - t0
    return RunResult(scenario.name, config.label, config.stages, dt, snaps, wall, n_steps, iters, sp_times)


def run_fem(scenario, config, dt, eval_times=None, trace_points=None, solver_kwargs=None):
    """Displacement-driven FEM run; snapshots at ``eval_times``.

    ``trace_points`` (indices into the flattened element x Gauss point list)
    records the total strain of those points after every step, shape
    ``(n_steps + 1, len(trace_points), 6)``.
    """
    if scenario.is_material_point:
        raise ScenarioError(f"{scenario.name} is a material-point scenario")
    eval_times = scenario.eval_times if eval_times is None else tuple(eval_times)
    scenario.check_times(dt, eval_times)
    solver = FESolver(scenario.build_mesh(), scenario.params, config, **(solver_kwargs or {}))
    state = solver.initial_state()
    marks = _snapshot_times(eval_times, dt)
    n_steps = max(marks)
    trace = None
    if trace_points is not None:
        trace_points = np.asarray(trace_points, dtype=int)
        trace = np.zeros((n_steps + 1, len(trace_points), 6))
    snaps = {}
    iters = 0
    sp_times = []
    t0 = time.perf_counter()
    for k in range(n_steps):
        state, info = solver.solve_time_step(state, (k + 1) * dt)
        iters += info.iterations
        if info.n_switching:
            sp_times.append(state.t)
        if trace is not None:
            trace[k + 1] = state.E_n[trace_points]
        if k + 1 in marks:
            snaps[marks[k + 1]] = Snapshot(t=marks[k + 1], S=state.S.copy(), E=state.E_n.copy(), Ep=state.Ep.copy(),
                                           alpha=state.alpha.copy())
    wall = time.perf_counter() - t0
    return RunResult(scenario.name, config.label, config.stages, dt, snaps, wall, n_steps, iters, sp_times, trace)


def run(scenario, config, dt, eval_times=None, **kwargs):
    if scenario.is_material_point:
        return run_material_point(scenario, config, dt, eval_times)
    return run_fem(scenario, config, dt, eval_times, **kwargs)


def write_strain_trace(path, result, trace_points):
    """CSV of per-step total strain at selected Gauss points."""
    if result.trace is None:
        raise ScenarioError("run has no strain trace; pass trace_points to run_fem")
    rows = ["t,point,E_xx,E_yy,E_zz,E_xy,E_yz,E_zx"]
    for k, frame in enumerate(result.trace):
        for p, E in zip(trace_points, frame):
            rows.append(",".join(["%.17g" % (k * result.dt), str(int(p))] + ["%.17g" % v for v in E]))
    _atomic_write_text(path, "\n".join(rows) + "\n")


# ---------------------------------------------------------------------------
# reference solutions


def _atomic_write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def default_cache_dir():
    return os.environ.get("RADAU_PLASTICITY_CACHE", os.path.join(os.path.expanduser("~"), ".cache", "radau_plasticity"))


def reference_solution(scenario, cache_dir=None, ref_dt=None, eval_times=None):
    """Overkill solution at the evaluation times, cached on disk by content hash.

    Returns ``(snapshots, key)``.  A cached file whose stored key differs from
    the current one is ignored and regenerated.
    """
    ref_dt = scenario.ref_dt if ref_dt is None else float(ref_dt)
    eval_times = scenario.eval_times if eval_times is None else tuple(float(t) for t in eval_times)
    key = scenario.cache_key(ref_dt, eval_times)
    cache_dir = default_cache_dir() if cache_dir is None else cache_dir
    path = os.path.join(cache_dir, f"{scenario.name}-{key}.npz")
    if os.path.exists(path):
        try:
            with np.load(path) as data:
                if str(data["key"]) == key:
                    return _unpack(data, eval_times), key
        except (OSError, KeyError, ValueError):
            pass
        warnings.warn(f"discarding stale reference cache {path}")
    config = IntegratorConfig.from_label(scenario.ref_method, stages=scenario.ref_stages)
    # the global residual floor must sit below the finest-ladder errors, so references iterate tighter
    kwargs = {} if scenario.is_material_point else {"solver_kwargs": {"rel_tol": scenario.ref_rel_tol}}
    result = run(scenario, config, ref_dt, eval_times, **kwargs)
    os.makedirs(cache_dir, exist_ok=True)
    arrays = {"key": np.array(key)}
    for i, t in enumerate(eval_times):
        sn = result.snapshots[t]
        for name in ("S", "E", "Ep", "alpha"):
            arrays[f"{name}_{i}"] = getattr(sn, name)
        arrays[f"t_{i}"] = np.array(t)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp-", suffix=".npz")
    with os.fdopen(fd, "wb") as fh:
        np.savez(fh, **arrays)
    os.replace(tmp, path)
    return result.snapshots, key


def _unpack(data, eval_times):
    snaps = {}
    for i, t in enumerate(eval_times):
        snaps[t] = Snapshot(t=float(data[f"t_{i}"]), S=data[f"S_{i}"], E=data[f"E_{i}"], Ep=data[f"Ep_{i}"],
                            alpha=data[f"alpha_{i}"])
    return snaps
