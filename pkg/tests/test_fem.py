import numpy as np
import pytest

from radau_plasticity import IntegratorConfig, MaterialParams
from radau_plasticity.fem import (ElementInversionError, FESolver, Mesh, MeshError, NonConvergenceError,
                                  annulus_quarter_mesh, biaxial_mesh, box_nodes, green_lagrange_strain,
                                  simple_shear_mesh, write_mesh_text)
from radau_plasticity.fem.hex8 import GAUSS_POINTS, reference_gradients
from radau_plasticity.scenarios import get_scenario

_NODES, _ELEMS = box_nodes((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (1, 1, 1))
CUBE = _NODES[_ELEMS[0]]


def rotation(axis, angle):
    axis = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def run_steps(solver, dt, n):
    state = solver.initial_state()
    infos = []
    for k in range(n):
        state, info = solver.solve_time_step(state, (k + 1) * dt)
        infos.append(info)
    return state, infos


class TestKinematics:
    @pytest.mark.parametrize("gp", list(GAUSS_POINTS))
    def test_zero_displacement(self, gp):
        assert np.array_equal(green_lagrange_strain(CUBE, np.zeros((8, 3)), gp), np.zeros(6))

    @pytest.mark.parametrize("angle", [0.3, 1.2, 2.9])
    def test_rigid_rotation_is_strain_free(self, angle):
        R = rotation([1.0, 2.0, -0.5], angle)
        u = CUBE @ R.T + np.array([0.4, -1.0, 2.0]) - CUBE
        for gp in GAUSS_POINTS:
            assert np.max(np.abs(green_lagrange_strain(CUBE, u, gp))) < 1e-12

    @pytest.mark.parametrize("lam", [1e-3, 0.2, -0.3])
    def test_uniaxial_stretch(self, lam):
        u = np.zeros((8, 3))
        u[:, 0] = lam * CUBE[:, 0]
        for gp in GAUSS_POINTS:
            E = green_lagrange_strain(CUBE, u, gp)
            assert E[0] == pytest.approx(lam + lam * lam / 2, rel=1e-14)
            assert np.max(np.abs(E[1:])) < 1e-15

    def test_inverted_element(self):
        u = np.zeros((8, 3))
        u[:, 0] = -2.0 * CUBE[:, 0]
        with pytest.raises(ElementInversionError):
            green_lagrange_strain(CUBE, u, GAUSS_POINTS[0])

    def test_small_strain_keeps_relative_precision(self):
        u = np.zeros((8, 3))
        u[:, 1] = 1e-9 * CUBE[:, 2]
        E = green_lagrange_strain(CUBE, u, GAUSS_POINTS[3])
        assert E[4] == pytest.approx(0.5e-9, rel=1e-14)


class TestMesh:
    def test_annulus_geometry(self):
        mesh = annulus_quarter_mesh()
        assert mesh.elements.shape == (100, 8)
        _, wdet = reference_gradients(mesh.nodes[mesh.elements])
        assert np.all(wdet > 0)
        assert wdet.sum() == pytest.approx(np.pi / 4 * (40 ** 2 - 20 ** 2), rel=1e-2)
        r = np.hypot(*mesh.nodes[:, :2].T)
        inner = np.flatnonzero(np.isclose(r, 20.0))
        rate = mesh.bc_rates[np.searchsorted(mesh.bc_dofs, 3 * inner)]
        assert np.allclose(rate, mesh.nodes[inner, 0] / 20.0, atol=1e-15)

    def test_validation(self):
        nodes, elems = box_nodes((0, 0, 0), (1, 1, 1), (1, 1, 1))
        with pytest.raises(MeshError):
            Mesh(nodes, elems + 1, [], [])
        with pytest.raises(MeshError):
            Mesh(nodes, elems, [0, 0], [1.0, 2.0])
        with pytest.raises(MeshError):
            Mesh(nodes[:, :2], elems, [], [])

    def test_text_dump(self, tmp_path):
        mesh = simple_shear_mesh()
        path = tmp_path / "mesh.txt"
        write_mesh_text(mesh, str(path))
        lines = path.read_text().splitlines()
        assert sum(l.startswith("v ") for l in lines) == 8
        assert sum(l.startswith("h ") for l in lines) == 1


class TestAssembly:
    def test_stress_free_body_has_zero_residual(self):
        sc = get_scenario("annulus_B")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q"))
        state = solver.initial_state()
        f, K, _, _ = solver.assemble(state.u, state)
        assert np.array_equal(f, np.zeros_like(f))
        assert np.allclose(K, K.T, atol=1e-9 * np.abs(K).max())
        assert solver.n_points == 800

    def test_simple_shear_is_homogeneous(self):
        sc = get_scenario("simple_shear")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q-SP"))
        state, infos = run_steps(solver, 2.0, 5)
        assert state.alpha.min() > 0
        assert np.ptp(state.E_n, axis=0).max() < 1e-12
        assert np.ptp(state.S, axis=0).max() < 1e-10 * np.abs(state.S).max()

    def test_biaxial_plane_stress(self):
        sc = get_scenario("biaxial")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q-exSP"))
        state, _ = run_steps(solver, 0.25, 8)
        assert state.alpha.min() > 0
        scale = np.abs(state.S).max()
        assert np.abs(state.S[:, [2, 4, 5]]).max() < 1e-9 * scale
        assert np.ptp(state.E_n, axis=0).max() < 1e-12

    def test_prescribed_dofs_exact(self):
        sc = get_scenario("biaxial")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-l"))
        state, _ = run_steps(solver, 0.3, 3)
        mesh = solver.mesh
        assert np.array_equal(state.u[mesh.bc_dofs], mesh.bc_rates * state.t)


class TestGlobalNewton:
    def test_elastic_small_load(self):
        sc = get_scenario("biaxial")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q"))
        _, infos = run_steps(solver, 0.01, 2)
        assert all(i.iterations <= 2 for i in infos)
        assert all(i.n_plastic == 0 for i in infos)

    def test_equilibrium_at_convergence(self):
        sc = get_scenario("annulus_B")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q-exSP"))
        prev, _ = run_steps(solver, 0.05, 3)
        state, info = solver.solve_time_step(prev, 0.2)
        f, _, res, _ = solver.assemble(state.u, prev, with_tangent=False)
        assert info.n_plastic > 0
        assert np.array_equal(res.S, state.S)
        assert np.linalg.norm(f[solver.free]) <= max(1e-10 * np.linalg.norm(f), 1e-12)

    def test_quadratic_decay_annulus_b(self):
        sc = get_scenario("annulus_B")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("RIIa-q"))
        _, infos = run_steps(solver, 0.05, 6)
        plastic = [i for i in infos if i.n_plastic > 0]
        assert len(plastic) >= 3
        for info in plastic:
            assert info.iterations <= 6
            r = info.residuals
            # terminal decay: r_{k+1} / r_k^2 bounded once the iterate is close
            ratios = [b / a ** 2 for a, b in zip(r[1:-1], r[2:]) if a < 1e-2 * r[0]]
            assert all(q < 1e3 / r[0] for q in ratios)
            assert r[-1] < 1e-6 * r[1]

    def test_elastic_tangent_converges_linearly(self):
        sc = get_scenario("annulus_B")
        cfg = IntegratorConfig.from_label("RIIa-q")
        good = FESolver(sc.build_mesh(), sc.params, cfg)
        bad = FESolver(sc.build_mesh(), sc.params, cfg, tangent="elastic", max_iter=200)
        _, info_good = run_steps(good, 0.05, 4)
        _, info_bad = run_steps(bad, 0.05, 4)
        assert info_good[-1].n_plastic > 0
        assert info_bad[-1].iterations > 2 * info_good[-1].iterations
        r = info_bad[-1].residuals
        # linear: successive ratios stay roughly constant instead of collapsing
        ratios = np.array(r[2:]) / np.array(r[1:-1])
        assert np.median(ratios) > 0.05

    def test_first_step_lifts_prescribed_increment(self):
        sc = get_scenario("annulus_B")
        cfg = IntegratorConfig.from_label("BE")
        lifted = FESolver(sc.build_mesh(), sc.params, cfg)
        _, info = lifted.solve_time_step(lifted.initial_state(), 0.05)
        assert info.iterations <= 3

    def test_nonconvergence(self):
        sc = get_scenario("annulus_B")
        solver = FESolver(sc.build_mesh(), sc.params, IntegratorConfig.from_label("BE"), max_iter=1)
        state = solver.initial_state()
        with pytest.raises(NonConvergenceError):
            for k in range(4):
                state, _ = solver.solve_time_step(state, 0.05 * (k + 1))

    def test_bad_options(self):
        mesh = simple_shear_mesh()
        params = MaterialParams(E=1.0, nu=0.3, sigma_Y=1.0)
        with pytest.raises(ValueError):
            FESolver(mesh, params, IntegratorConfig(), tangent="secant")
        with pytest.raises(ValueError):
            FESolver(mesh, params, IntegratorConfig(), predictor="quadratic")

