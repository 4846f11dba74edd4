import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radau_plasticity import METHOD_LABELS, IntegratorConfig, MaterialParams, PlasticState, StrainHistory, radau_iia
from radau_plasticity import consistent_tangent, solve_stages, step
from radau_plasticity import tensor_algebra as ta
from radau_plasticity.constitutive import yield_radius, yield_trial
from radau_plasticity.stage_solver import StageSolverError, step_batch

BIAXIAL = MaterialParams(E=700000.0, nu=0.2, sigma_Y=875.0, sigma_inf_minus_Y=211.0, H=1500.0, delta=300.0)
LINEAR = MaterialParams(E=210000.0, nu=0.3, sigma_Y=460.0, H=10000.0)


def radial_return(params, E, Ep, alpha):
    """Closed-form backward Euler for linear hardening, written independently."""
    x = ta.deviator(E) - Ep
    nx = ta.norm(x)
    f = 2 * params.mu * nx - np.sqrt(2 / 3) * (params.sigma_Y + params.H * alpha)
    if f < 0:
        return Ep, alpha
    dg = f / (2 * params.mu + 2 / 3 * params.H)
    return Ep + dg * x / nx, alpha + np.sqrt(2 / 3) * dg


def curved_path(seed, scale=2e-3):
    rng = np.random.default_rng(seed)
    a1 = rng.normal(size=6) * scale
    a2 = rng.normal(size=6) * scale / 4

    def path(t):
        return a1 * t + a2 * t * t

    return path


def walk(params, config, path, dt, n_steps):
    """Yield ``(inputs, result)`` for each step of a strain-driven point."""
    Ep, alpha, was = np.zeros((1, 6)), np.zeros(1), np.zeros(1, bool)
    for k in range(n_steps):
        kw = dict(E_n=path(k * dt)[None], E_prev=path((k - 1) * dt)[None], quad_ok=np.array([k > 0]),
                  was_plastic=was)
        E_next = path((k + 1) * dt)[None]
        res = step_batch(params, config.tableau, config, Ep, alpha, E_next, **kw)
        yield (Ep, alpha, E_next, kw), res
        Ep, alpha, was = res.Ep, res.alpha, res.plastic


class TestConfig:
    def test_backward_euler_forces_one_stage(self):
        cfg = IntegratorConfig.from_label("BE", stages=3)
        assert cfg.stages == 1 and cfg.interpolation.value == "constant"

    @pytest.mark.parametrize("label", METHOD_LABELS)
    def test_label_round_trip(self, label):
        assert IntegratorConfig.from_label(label).label == label

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="valid"):
            IntegratorConfig.from_label("RIIa-c")

    def test_bad_backend_and_stages(self):
        with pytest.raises(ValueError):
            IntegratorConfig(backend="gpu")
        with pytest.raises(ValueError):
            IntegratorConfig(stages=4)


class TestRadialReturnOracle:
    @pytest.mark.parametrize("backend", ["compiled", "numpy"])
    def test_thousand_random_steps(self, backend):
        cfg = IntegratorConfig.from_label("BE", backend=backend)
        rng = np.random.default_rng(11)
        Ep, alpha, E = np.zeros(6), 0.0, np.zeros(6)
        n_plastic = 0
        for _ in range(1000):
            E = E + rng.normal(size=6) * 1.5e-3
            res = step_batch(LINEAR, radau_iia(1), cfg, Ep[None], np.array([alpha]), E[None])
            Ep_o, alpha_o = radial_return(LINEAR, E, Ep, alpha)
            assert np.max(np.abs(res.Ep[0] - Ep_o)) <= 1e-12 * max(np.max(np.abs(Ep_o)), 1e-3)
            assert abs(res.alpha[0] - alpha_o) <= 1e-12 * max(alpha_o, 1e-3)
            n_plastic += int(res.plastic[0])
            Ep, alpha = res.Ep[0], float(res.alpha[0])
        assert n_plastic > 100


class TestTangent:
    @pytest.mark.parametrize("label", METHOD_LABELS)
    @pytest.mark.parametrize("stages", [2, 3])
    def test_central_differences(self, label, stages):
        cfg = IntegratorConfig.from_label(label, stages=stages)
        checked = 0
        for (Ep, alpha, E_next, kw), res in walk(BIAXIAL, cfg, curved_path(5), 0.07, 30):
            if not res.plastic[0]:
                continue
            h = 1e-8
            fd = np.zeros((6, 6))
            for j in range(6):
                e = np.zeros(6)
                e[j] = h
                sp = step_batch(BIAXIAL, cfg.tableau, cfg, Ep, alpha, E_next + e, with_tangent=False, **kw).S[0]
                sm = step_batch(BIAXIAL, cfg.tableau, cfg, Ep, alpha, E_next - e, with_tangent=False, **kw).S[0]
                fd[:, j] = (sp - sm) / (2 * h) / ta.WEIGHTS[j]
            assert np.linalg.norm(fd - res.tangent[0]) <= 1e-5 * np.linalg.norm(fd)
            checked += 1
        assert checked > 5

    def test_symmetric_for_backward_euler(self):
        cfg = IntegratorConfig.from_label("BE")
        for _, res in walk(BIAXIAL, cfg, curved_path(2), 0.1, 20):
            C = ta.tangent_to_mandel(res.tangent[0])
            assert np.allclose(C, C.T, atol=1e-8 * np.abs(C).max())

    def test_elastic_step_returns_elastic_tangent(self):
        cfg = IntegratorConfig.from_label("RIIa-q")
        res = step_batch(BIAXIAL, cfg.tableau, cfg, np.zeros((1, 6)), np.zeros(1), np.full((1, 6), 1e-6))
        assert not res.plastic[0]
        assert np.array_equal(res.tangent[0], BIAXIAL.elasticity)

    def test_single_point_api_matches_batch(self):
        tab = radau_iia(2)
        Ehat = np.array([[2e-3, 0, 0, 1e-3, 0, 0], [3e-3, 0, 0, 1.5e-3, 0, 0]])
        sol = solve_stages(BIAXIAL, tab, PlasticState(), Ehat)
        C = consistent_tangent(BIAXIAL, tab, sol, interpolation_mode="linear")
        h = 1e-8
        fd = np.zeros((6, 6))
        c = np.asarray(tab.c)
        E0 = Ehat[-1]
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            out = []
            for sgn in (1, -1):
                # linear stage strains from E_n = 0: stage i moves by c_i dE
                s2 = solve_stages(BIAXIAL, tab, PlasticState(), Ehat + sgn * c[:, None] * e)
                E = E0 + sgn * e
                out.append(BIAXIAL.kappa * ta.trace(E) * ta.ONE + 2 * BIAXIAL.mu * (ta.deviator(E) - s2.Ep_stages[-1]))
            fd[:, j] = (out[0] - out[1]) / (2 * h) / ta.WEIGHTS[j]
        assert np.linalg.norm(fd - C) <= 1e-6 * np.linalg.norm(fd)


class TestBackends:
    @pytest.mark.parametrize("label", ["RIIa-l", "RIIa-q-SP", "RIIa-q-exSP"])
    @pytest.mark.parametrize("stages", [2, 3])
    def test_compiled_matches_numpy(self, label, stages):
        a = IntegratorConfig.from_label(label, stages=stages)
        b = IntegratorConfig.from_label(label, stages=stages, backend="numpy")
        path = curved_path(9)
        for (_, ra), (_, rb) in zip(walk(BIAXIAL, a, path, 0.05, 40), walk(BIAXIAL, b, path, 0.05, 40)):
            assert np.allclose(ra.S, rb.S, rtol=1e-11, atol=1e-9)
            assert np.allclose(ra.tangent, rb.tangent, rtol=1e-8, atol=1e-6)
            assert np.array_equal(ra.sp_detected, rb.sp_detected)


class TestStageSystem:
    def test_stiff_accuracy(self):
        cfg = IntegratorConfig.from_label("RIIa-q", stages=3)
        for (Ep, alpha, _, _), res in walk(BIAXIAL, cfg, curved_path(3), 0.1, 15):
            if not res.plastic[0]:
                continue
            sol = solve_stages(BIAXIAL, cfg.tableau, PlasticState(Ep=Ep[0], alpha=float(alpha[0])),
                               res.stage_strains[0])
            assert np.allclose(sol.Ep_stages[-1], res.Ep[0], rtol=1e-12, atol=1e-16)
            assert sol.Lambda_stages[-1] == pytest.approx(res.alpha[0], rel=1e-12)

    def test_nonconvergence_raises(self):
        cfg = IntegratorConfig.from_label("RIIa-q", max_iter=1)
        with pytest.raises(StageSolverError):
            step_batch(BIAXIAL, cfg.tableau, cfg, np.zeros((1, 6)), np.zeros(1), np.array([[0.05, 0, 0, 0, 0, 0]]))

    def test_clamped_stage_is_inactive(self):
        # strain moves back inside, then out: the first stage would flow backwards
        tab = radau_iia(2)
        E_yield = np.array([2e-3, 0, 0, 0, 0, 0])
        Ehat = np.array([0.2 * E_yield, 1.6 * E_yield])
        sol = solve_stages(BIAXIAL, tab, PlasticState(), Ehat, clamp=True)
        assert not sol.active[0] and sol.active[-1]
        assert sol.dGamma_stages[0] == 0.0 and sol.dGamma_stages[-1] > 0

    def test_coupled_component_follows_plastic_strain(self):
        params = BIAXIAL.replace(nu=0.0)
        M = np.zeros((6, 6))
        M[2, 2] = 1.0
        rate = np.array([0.0005, 0.002, 0, 0, 0, 0])
        tab = radau_iia(2)
        Ehat = rate[None] * (1.0 + np.asarray(tab.c)[:, None])
        sol = solve_stages(params, tab, PlasticState(), Ehat, coupling=M)
        E_last = Ehat[-1] + ta.apply(M, sol.Ep_stages[-1])
        x = ta.deviator(E_last) - sol.Ep_stages[-1]
        assert sol.dGamma_stages[-1] > 0
        assert 2 * params.mu * ta.norm(x) == pytest.approx(yield_radius(params, sol.Lambda_stages[-1]), rel=1e-10)


class TestSinglePointStep:
    def test_switching_point_reported(self):
        cfg = IntegratorConfig.from_label("RIIa-l-SP")
        rate = np.array([0.0005, 0.002, 0, 0, 0, 0])
        params = BIAXIAL.replace(nu=0.0)
        h = StrainHistory(E_n=rate * 0.65, E_next=rate * 0.75, dt=0.1)
        out = step(params, cfg.tableau, PlasticState(), h, cfg, t_n=0.65)
        assert out.plastic
        assert 0.65 < out.switching_point.t_sp < 0.75
        assert out.switching_point.t_sp == pytest.approx(0.65 + 0.1 * out.switching_point.x)
        assert abs(yield_trial(params, out.switching_point.E_sp, PlasticState())) < 1e-8

    def test_previously_plastic_skips_detection(self):
        cfg = IntegratorConfig.from_label("RIIa-l-SP")
        params = BIAXIAL.replace(nu=0.0)
        rate = np.array([0.0005, 0.002, 0, 0, 0, 0])
        h = StrainHistory(E_n=rate * 0.65, E_next=rate * 0.75, dt=0.1)
        out = step(params, cfg.tableau, PlasticState(), h, cfg, previously_plastic=True)
        assert out.switching_point is None


strains = st.lists(st.floats(-4e-3, 4e-3, allow_nan=False), min_size=6, max_size=6).map(np.array)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(d1=strains, d2=strains, stages=st.sampled_from([1, 2, 3]),
           label=st.sampled_from(["RIIa-l", "RIIa-q", "RIIa-q-SP", "RIIa-q-exSP"]))
    def test_yield_consistency_and_isochoric_flow(self, d1, d2, stages, label):
        cfg = IntegratorConfig.from_label(label, stages=stages)

        def path(t):
            return d1 * t + d2 * t * t

        for (_, _, E_next, _), res in walk(BIAXIAL, cfg, path, 0.25, 8):
            assert abs(ta.trace(res.Ep[0])) < 1e-12
            f = yield_trial(BIAXIAL, E_next[0], PlasticState(Ep=res.Ep[0], alpha=float(res.alpha[0])))
            # admissible at the end of the step, on the surface when plastic
            assert f <= 1e-10 * BIAXIAL.sigma_Y
            if res.plastic[0]:
                assert abs(f) <= 1e-10 * BIAXIAL.sigma_Y
            # stiff accuracy: the step result is the last stage
            if res.plastic[0] and res.stage_strains is not None:
                assert np.allclose(res.stage_strains[0][-1], E_next[0], rtol=0, atol=1e-15)
