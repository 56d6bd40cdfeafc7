import numpy as np
import pytest

from eoqubit import optimizers as opt
from eoqubit.eo_model import target_by_name
from eoqubit.pulse_sequence import build_table1_gate, count_pulses, propagate, verify_sequence


def _fd_gradient(model, target, grid, h=1e-6):
    out = np.zeros_like(grid.values)
    for idx in np.ndindex(grid.values.shape):
        up, down = grid.copy(), grid.copy()
        up.values[idx] += h
        down.values[idx] -= h
        out[idx] = (opt.grid_jtre(model, target, up) - opt.grid_jtre(model, target, down)) / (2 * h)
    return out


@pytest.fixture(scope="module")
def t_gate_grid():
    """Exact four-pulse T gate on qubit A followed by an identity (p = 2) pulse."""
    base = opt.ControlGrid.from_sequence(build_table1_gate("T", "A"))
    values = np.vstack([base.values, [[2.0, 0, 0, 0]]])
    return opt.ControlGrid(values, first_parity=base.first_parity)


class TestControlGrid:
    def test_parity_alternates(self):
        g = opt.ControlGrid(np.zeros((3, 4)))
        assert [g.parity(k) for k in range(3)] == ["odd", "even", "odd"]
        assert g.pairs(1) == (1, 3, 5, 7)
        g = opt.ControlGrid(np.zeros((2, 4)), first_parity="even")
        assert g.pairs(0) == (1, 3, 5, 7)

    def test_invariants(self):
        with pytest.raises(ValueError, match="masked"):
            opt.ControlGrid(np.ones((2, 4)), mask=np.zeros((2, 4), dtype=bool))
        with pytest.raises(ValueError):
            opt.ControlGrid(np.zeros((2, 4)), mask=np.ones((3, 4), dtype=bool))
        with pytest.raises(ValueError):
            opt.ControlGrid(np.zeros((2, 4)), first_parity="left")

    def test_sequence_round_trip(self, jk_sequence):
        grid = opt.ControlGrid.from_sequence(jk_sequence)
        assert grid.pulse_count() == 92
        back = grid.to_sequence()
        np.testing.assert_array_equal(back.as_array(), jk_sequence.as_array())

    def test_mask_zeros_freezes_pattern(self, jk_sequence):
        grid = opt.ControlGrid.from_sequence(jk_sequence, mask_zeros=True)
        assert grid.mask.sum() == 92

    def test_from_sequence_requires_alternation(self):
        seq = build_table1_gate("T", "A") + build_table1_gate("T", "B")
        # T(A) ends on an even step and T(B) starts on an even step
        with pytest.raises(ValueError, match="alternation"):
            opt.ControlGrid.from_sequence(seq)

    def test_drop_empty(self):
        g = opt.ControlGrid(np.array([[0.1, 0, 0, 0], [0, 0, 0, 0], [0.2, 0, 0, 0]]))
        assert count_pulses(g.to_sequence(drop_empty=True)) == (2, 2)
        assert count_pulses(g.to_sequence()) == (2, 3)


class TestInitialGrid:
    def test_structural_mask_size(self):
        mask = opt.structural_mask(55, "even", excluded_pairs=(1,))
        assert mask.sum() == 192
        assert opt.structural_mask(25).sum() == 100

    def test_random_grid(self):
        mask = opt.structural_mask(10, "odd", (1,))
        a = opt.random_initial_grid(10, 0.5, seed=3, mask=mask)
        b = opt.random_initial_grid(10, 0.5, seed=3, mask=mask)
        np.testing.assert_array_equal(a.values, b.values)
        assert np.all(a.values[~mask] == 0)
        assert np.abs(a.values).max() <= 0.5
        c = opt.random_initial_grid(10, 0.5, seed=4, mask=mask)
        assert not np.array_equal(a.values, c.values)

    def test_range_must_be_finite(self):
        with pytest.raises(ValueError):
            opt.random_initial_grid(3, np.inf, seed=0)


class TestGradient:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_central_differences(self, model, toffoli, seed):
        grid = opt.random_initial_grid(6, 0.8, seed=seed)
        exact = opt.jtre_gradient(model, toffoli, grid)
        fd = _fd_gradient(model, toffoli, grid)
        assert np.abs(exact - fd).max() <= 1e-6 * np.abs(exact).max()

    def test_propagator_matches_dense(self, model, toffoli):
        grid = opt.random_initial_grid(8, 0.8, seed=5)
        prop = opt.Propagator(model, toffoli)
        U = propagate(grid.to_sequence(), model)
        ref = verify_sequence(grid.to_sequence(), toffoli, model)
        assert prop.jtre(prop.forward(grid)) == pytest.approx(ref.infidelity_jtre, abs=1e-13)
        assert 1 - prop.fidelity_d24(prop.forward(grid)) == pytest.approx(ref.infidelity_d24, abs=1e-13)
        assert U.shape == (90, 90)


class TestGrape:
    def test_zero_iterations_returns_initial(self, model, toffoli):
        res = opt.grape_optimize(model, toffoli, L=5, iterations=0, seed=2)
        np.testing.assert_array_equal(res.grid.values, opt.random_initial_grid(5, 0.5, 2).values)
        assert len(res.phi_trace) == 1

    def test_ascends(self, model, toffoli):
        res = opt.grape_optimize(model, toffoli, L=10, lr=0.02, iterations=20, seed=0)
        assert len(res.phi_trace) == 21
        assert res.phi_trace[-1] > res.phi_trace[0]

    def test_deterministic(self, model, toffoli):
        a = opt.grape_optimize(model, toffoli, L=6, iterations=5, seed=9)
        b = opt.grape_optimize(model, toffoli, L=6, iterations=5, seed=9)
        assert a.phi_trace == b.phi_trace

    def test_rejects_bad_rate(self, model, toffoli):
        with pytest.raises(ValueError):
            opt.grape_optimize(model, toffoli, lr=0.0)

    def test_trace_file(self, model, toffoli, tmp_path):
        path = tmp_path / "grape.jsonl"
        opt.grape_optimize(model, toffoli, L=4, iterations=3, seed=0, trace_path=path)
        rows = opt.read_trace(path)
        assert [r["iteration"] for r in rows] == [0, 1, 2, 3]


class TestKrotov:
    def test_first_update_follows_gradient(self, model, toffoli):
        grid = opt.random_initial_grid(6, 0.8, seed=11)
        lam = 1e6
        prop = opt.Propagator(model, toffoli)
        chis = prop.costates(grid, 1 / (2 * prop.n_states))
        trial = grid.copy()
        weights = np.full(grid.values.shape, 1 / lam)
        opt.krotov_update_sweep(prop, trial, chis, weights, sequential=True, p_max=2.5,
                                safeguard=False)
        step = (trial.values - grid.values) * (-2 * lam)
        fd = _fd_gradient(model, toffoli, grid)
        assert np.abs(step - fd).max() <= 1e-5 * np.abs(fd).max()

    @pytest.mark.parametrize("sequential", [True, False])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_monotone(self, model, toffoli, sequential, seed):
        cfg = opt.KrotovConfig(max_iterations=25, sequential=sequential)
        res = opt.krotov_optimize(model, toffoli, opt.random_initial_grid(25, 0.5, seed), cfg)
        tr = np.array(res.trace)
        assert np.all(np.diff(tr) <= 1e-12)
        assert tr[-1] < tr[0]

    def test_converged_input_returns_immediately(self, model, toffoli, jk_sequence):
        grid = opt.ControlGrid.from_sequence(jk_sequence)
        res = opt.krotov_optimize(model, toffoli, grid)
        assert res.converged and res.iterations == 0 and res.reason == "converged"
        np.testing.assert_array_equal(res.grid.values, grid.values)

    def test_masked_entries_never_move(self, model, toffoli):
        mask = opt.structural_mask(12, "odd", excluded_pairs=(1, 8))
        mask[3, :] = False
        grid = opt.random_initial_grid(12, 0.5, seed=0, mask=mask)
        res = opt.krotov_optimize(model, toffoli, grid, opt.KrotovConfig(max_iterations=10), mask=mask)
        assert np.all(res.grid.values[~mask] == 0)
        assert np.any(res.grid.values[mask] != grid.values[mask])

    def test_mask_inconsistency(self, model, toffoli):
        grid = opt.random_initial_grid(4, 0.5, seed=0)
        with pytest.raises(ValueError, match="nonzero"):
            opt.krotov_optimize(model, toffoli, grid, mask=np.zeros((4, 4), dtype=bool))
        with pytest.raises(ValueError, match="shape"):
            opt.krotov_optimize(model, toffoli, grid, mask=np.ones((3, 4), dtype=bool))

    def test_shape_zero_freezes(self, model, toffoli):
        grid = opt.random_initial_grid(6, 0.5, seed=1)
        shape = np.ones((6, 4))
        shape[0] = 0
        res = opt.krotov_optimize(model, toffoli, grid, opt.KrotovConfig(max_iterations=5, shape=shape))
        np.testing.assert_array_equal(res.grid.values[0], grid.values[0])

    def test_stall_detection(self, model, toffoli):
        # two steps cannot make a Toffoli; the objective flattens out quickly
        cfg = opt.KrotovConfig(max_iterations=2000, stall_window=20, stall_tolerance=1e-6)
        res = opt.krotov_optimize(model, toffoli, opt.random_initial_grid(2, 0.5, 0), cfg)
        assert res.reason == "stalled" and not res.converged
        assert res.iterations < 2000

    def test_config_validation(self):
        with pytest.raises(ValueError):
            opt.KrotovConfig(lambda_l=0)
        with pytest.raises(ValueError):
            opt.KrotovConfig(shape=np.full((2, 4), 1.5))

    def test_deterministic_and_traced(self, model, toffoli, tmp_path):
        cfg = opt.KrotovConfig(max_iterations=5)
        grid = opt.random_initial_grid(8, 0.5, seed=4)
        a = opt.krotov_optimize(model, toffoli, grid, cfg, trace_path=tmp_path / "k.jsonl")
        b = opt.krotov_optimize(model, toffoli, grid, cfg)
        assert a.trace == b.trace
        rows = opt.read_trace(tmp_path / "k.jsonl")
        assert [r["jtre"] for r in rows] == a.trace

    def test_reaches_threshold_on_small_problem(self, model):
        target = target_by_name("t-gate:A", model)
        mask = opt.structural_mask(6, "odd", excluded_pairs=(3, 4, 5, 6, 7, 8))
        grid = opt.random_initial_grid(6, 0.5, seed=0, mask=mask)
        res = opt.krotov_optimize(model, target, grid, opt.KrotovConfig(max_iterations=3000,
                                                                        lambda_l=0.2), mask=mask)
        assert res.converged, res.final_jtre


class TestJenga:
    def test_identity_pulse_removed(self, model, t_gate_grid):
        target = target_by_name("t-gate:A", model)
        cfg = opt.JengaConfig(opt.KrotovConfig(max_iterations=30))
        res = opt.jenga_prune(model, target, t_gate_grid, cfg, seed=0)
        assert count_pulses(res.sequence) == (4, 4)
        assert res.final_jtre < 1e-8
        assert res.state.n_ex == 4
        assert res.state.M[0, 4] == 0

    def test_deterministic(self, model, t_gate_grid, tmp_path):
        target = target_by_name("t-gate:A", model)
        cfg = opt.JengaConfig(opt.KrotovConfig(max_iterations=10))
        a = opt.jenga_prune(model, target, t_gate_grid, cfg, seed=5, log_path=tmp_path / "jk.jsonl")
        b = opt.jenga_prune(model, target, t_gate_grid, cfg, seed=5)
        np.testing.assert_array_equal(a.state.M, b.state.M)
        assert [h["step"] for h in a.state.history] == [h["step"] for h in b.state.history]
        np.testing.assert_array_equal(a.sequence.as_array(), b.sequence.as_array())
        assert len(opt.read_trace(tmp_path / "jk.jsonl")) == len(a.state.history)

    def test_n_ex_never_increases(self, model, t_gate_grid):
        target = target_by_name("t-gate:A", model)
        seen = []
        opt.jenga_prune(model, target, t_gate_grid, opt.JengaConfig(opt.KrotovConfig(max_iterations=5)),
                        seed=1, progress=lambda r: seen.append(r["n_ex"]))
        assert seen == sorted(seen, reverse=True)
        assert len(seen) == 20

    def test_rejects_unconverged_input(self, model, toffoli):
        with pytest.raises(ValueError, match="not converged"):
            opt.jenga_prune(model, toffoli, opt.random_initial_grid(4, 0.5, 0))

    def test_masked_entries_start_removed(self, model):
        target = target_by_name("t-gate:A", model)
        base = opt.ControlGrid.from_sequence(build_table1_gate("T", "A"), mask_zeros=True)
        res = opt.jenga_prune(model, target, base, opt.JengaConfig(opt.KrotovConfig(max_iterations=5)),
                              seed=0)
        assert len(res.state.history) == 4
        assert count_pulses(res.sequence)[0] <= 4
