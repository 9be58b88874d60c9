from fractions import Fraction as F

import numpy as np
import pytest

from beliefavg.observations import BeliefModel, sample_matrix
from beliefavg.protocols import (EXACT, PUSH_SUM, QUANTIZED, InvariantError, NetworkState,
                                 QuantizationConfig, estimates, init_state, push_sum_matrix, quantize,
                                 ratio_estimates, run, step_push_sum, step_quantized, step_undirected)
from beliefavg.analysis import check_trace, last_z_change
from beliefavg.topology import (DynamicProbabilistic, Graph, Static, make_connected_rgg,
                                make_directed_rgg)
from beliefavg.weights import WeightMatrix, metropolis, modified_metropolis

HALF = WeightMatrix.from_float([[0.5, 0.5], [0.5, 0.5]])


def exact_state(y, z=None, t=1):
    y = np.asarray(y, float)
    z = y.copy() if z is None else np.asarray(z, float)
    return NetworkState(EXACT, t, y, z * t, z)


class TestInit:
    def test_examples(self):
        st = init_state([1, 2, 3])
        assert st.y.tolist() == [1, 2, 3] and st.z.tolist() == [1, 2, 3]
        ps = init_state([0, 2], PUSH_SUM)
        assert ps.y.tolist() == [0, 2] and ps.v.tolist() == [1, 1]
        qs = init_state([1.26], QUANTIZED, QuantizationConfig("truncation", 0.1))
        assert qs.y == pytest.approx([1.3]) and qs.z == pytest.approx([1.3])

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            init_state([1, 2], n=3)
        with pytest.raises(ValueError):
            init_state([1, 2], "bogus")


class TestUndirected:
    def test_pure_averaging(self):
        st = step_undirected(exact_state([0, 2], [1, 1]), HALF, [1, 1])
        assert st.y.tolist() == [1, 1]

    def test_identity_keeps_state(self):
        st = step_undirected(exact_state([4, -1, 7], [3, 3, 3]), WeightMatrix.from_float(np.eye(3)), [3, 3, 3])
        assert st.y.tolist() == [4, -1, 7]

    def test_path_example_against_fraction_oracle(self):
        W = metropolis(Graph(3, ((0, 1), (1, 2))))
        # running averages at t=1 chosen so that z(2) - z(1) = [0.1, -0.1, 0]
        z1 = np.array([1.0, 1.0, 1.0])
        x2 = np.array([1.2, 0.8, 1.0])
        st = step_undirected(exact_state([0, 3, 6], z1), W, x2)
        Wf = metropolis(Graph(3, ((0, 1), (1, 2))), exact=True).to_fractions()
        y = [F(0), F(3), F(6)]
        dz = [F(1, 10), F(-1, 10), F(0)]
        oracle = [sum(Wf[i, j] * y[j] for j in range(3)) + dz[i] for i in range(3)]
        assert st.y == pytest.approx([float(v) for v in oracle], abs=1e-14)
        # W y = [1, 3, 5] for the path weights (rows 2/3,1/3 | 1/3,1/3,1/3 | 1/3,2/3)
        assert st.y == pytest.approx([1.1, 2.9, 5.0], abs=1e-14)
        assert st.t == 2 and st.z == pytest.approx([1.1, 0.9, 1.0])

    def test_mode_and_size_checks(self):
        with pytest.raises(ValueError):
            step_undirected(init_state([1, 2], PUSH_SUM), HALF, [1, 2])
        with pytest.raises(ValueError):
            step_undirected(exact_state([1, 2, 3]), HALF, [1, 2, 3])


class TestPushSum:
    def test_two_agents(self):
        g = Graph(2, ((0, 1), (1, 0)), directed=True)
        st = step_push_sum(init_state([0, 2], PUSH_SUM), g, [0, 2])
        # constant samples: z(2) = z(1), so y = mu
        assert st.mu.tolist() == [1, 1] and st.v.tolist() == [1, 1]
        assert ratio_estimates(st).tolist() == [1, 1]

    def test_edgeless_is_stationary(self):
        st0 = init_state([3, -2, 5], PUSH_SUM)
        st = step_push_sum(st0, Graph.empty(3, directed=True), [3, -2, 5])
        assert st.y.tolist() == [3, -2, 5] and st.v.tolist() == [1, 1, 1]

    def test_three_cycle(self):
        g = Graph(3, ((0, 1), (1, 2), (2, 0)), directed=True)
        st0 = NetworkState(PUSH_SUM, 1, np.array([3.0, 0, 0]), np.zeros(3), np.zeros(3), v=np.ones(3))
        st = step_push_sum(st0, g, [0, 0, 0])
        # hand transfer: each agent keeps half and sends half to its single out-neighbor
        assert st.mu.tolist() == [1.5, 1.5, 0.0]
        assert st.v.tolist() == [1, 1, 1]
        assert st.mu.sum() == 3.0

    def test_transfer_is_column_stochastic(self):
        g = make_directed_rgg(10, 0.6, seed=3)
        A = push_sum_matrix(g)
        assert np.allclose(A.sum(axis=0), 1, atol=1e-15)
        assert (A >= 0).all()

    def test_ratio_examples(self):
        mk = lambda mu, v: NetworkState(PUSH_SUM, 2, np.zeros(2), np.zeros(2), np.zeros(2),
                                        mu=np.array(mu, float), v=np.array(v, float))
        assert ratio_estimates(mk([1, 1], [1, 1])).tolist() == [1, 1]
        assert ratio_estimates(mk([2, 4], [2, 2])).tolist() == [1, 2]
        with pytest.raises(InvariantError):
            ratio_estimates(mk([2, 4], [0, 2]))
        assert estimates(init_state([4, 6], PUSH_SUM)).tolist() == [4, 6]


class TestQuantize:
    def test_examples(self):
        assert quantize(1.7) == 1
        assert quantize(-0.3) == -1
        assert quantize(1.2, "ceiling") == 2
        assert quantize(2.5, "rounding") == 3
        assert quantize(-2.5, "rounding") == -2
        with pytest.raises(ValueError):
            quantize(1.0, "stochastic")


def quant_state(y, zk, grid=F(1, 10)):
    y_num = np.array([int(F(v) * grid.denominator) for v in y], dtype=object)
    return NetworkState(QUANTIZED, 1, np.asarray(y, float), np.asarray(zk, float) * float(grid),
                        np.asarray(zk, float) * float(grid), quant=QuantizationConfig("truncation", float(grid)),
                        y_num=y_num, den=grid.denominator, zk=np.array(zk, dtype=object))


class TestQuantized:
    def test_identity_keeps_integer_state(self):
        st = quant_state([2, 5], [20, 50])
        out = step_quantized(st, WeightMatrix.from_fractions([[1, 0], [0, 1]]), None, [2, 5])
        assert out.y.tolist() == [2, 5]

    def test_two_agent_example_against_fraction_oracle(self):
        W = WeightMatrix.from_fractions([[F(3, 4), F(1, 4)], [F(1, 4), F(3, 4)]])
        st = quant_state([F(3, 2), F(7, 2)], [25, 25])
        out = step_quantized(st, W, None, [2.5, 2.5])  # z~ stays at 2.5
        y = [F(3, 2), F(7, 2)]
        fl = [F(1), F(3)]
        Wf = W.to_fractions()
        oracle = [sum(Wf[i, j] * fl[j] for j in range(2)) + y[i] - fl[i] for i in range(2)]
        assert oracle == [F(2), F(3)]
        assert out.y.tolist() == [2.0, 3.0]
        assert F(int(sum(out.y_num)), out.den) == 5

    def test_rejects_float_weights(self):
        with pytest.raises(TypeError):
            step_quantized(quant_state([1, 2], [10, 20]), HALF, None, [1, 2])

    @pytest.mark.parametrize("kind", ["truncation", "ceiling", "rounding"])
    def test_exact_mass_every_step(self, kind):
        g = make_connected_rgg(8, 0.6, seed=2)
        W = modified_metropolis(g)
        q = QuantizationConfig(kind, 0.1)
        beliefs = BeliefModel.gaussian(np.linspace(3, 71, 8), 10.0)
        x = sample_matrix(beliefs, 4, 300)
        st = init_state(x[0], QUANTIZED, q)
        for k in range(1, 300):
            st = step_quantized(st, W, q, x[k])
            assert F(int(sum(st.y_num)), st.den) == F(int(sum(st.zk))) * q.grid

    def test_floors_monotone_once_grid_frozen(self):
        # constant beliefs freeze z~ from the start, so the floor envelope must never widen
        g = make_connected_rgg(10, 0.5, seed=8)
        beliefs = BeliefModel.constant(np.linspace(1.03, 47.61, 10))
        tr = run(Static(g), modified_metropolis(g), beliefs, QUANTIZED, 400, seed=0,
                 quant=QuantizationConfig("truncation", 0.1))
        assert last_z_change(tr) == 1
        assert (np.diff(tr.floor_max) <= 0).all() and (np.diff(tr.floor_min) >= 0).all()
        assert check_trace(tr) == []

    def test_zero_precision_float_path(self):
        g = make_connected_rgg(6, 0.7, seed=1)
        q = QuantizationConfig("truncation", 0.0)
        tr = run(Static(g), modified_metropolis(g), BeliefModel.gaussian([10, 20, 30, 40, 50, 60], 10.0),
                 QUANTIZED, 200, seed=1, quant=q)
        assert np.allclose(tr.mass_y, tr.mass_z, atol=1e-9)


class TestRun:
    def test_single_step_trace(self):
        g = make_connected_rgg(5, 0.7, seed=0)
        b = BeliefModel.gaussian([1, 2, 3, 4, 5], 10.0)
        tr = run(Static(g), metropolis(g), b, EXACT, 1, seed=3)
        assert len(tr) == 1 and tr.t.tolist() == [1]
        assert np.array_equal(tr.y[0], sample_matrix(b, 3, 1)[0])

    def test_constant_beliefs_reach_consensus(self):
        g = make_connected_rgg(10, 0.5, seed=5)
        vals = np.linspace(-4, 90, 10)
        tr = run(Static(g), metropolis(g), BeliefModel.constant(vals), EXACT, 1000, seed=0)
        assert tr.seminorm[-1] < 1e-9
        assert np.abs(tr.est[-1] - vals.mean()).max() < 1e-9

    def test_bit_identical_repeat(self):
        u = make_connected_rgg(10, 0.5, seed=5)
        b = BeliefModel.gaussian(np.arange(10) * 7.0, 10.0)
        a = run(DynamicProbabilistic(u, 0.5, seed=2), metropolis, b, EXACT, 300, seed=9)
        c = run(DynamicProbabilistic(u, 0.5, seed=2), metropolis, b, EXACT, 300, seed=9)
        assert np.array_equal(a.y, c.y) and np.array_equal(a.e_t, c.e_t)

    def test_edgeless_network_learns_own_beliefs(self):
        g = Graph.empty(4)
        b = BeliefModel.gaussian([0.0, 10.0, 20.0, 30.0], 10.0)
        tr = run(Static(g), metropolis(g), b, EXACT, 2000, seed=1)
        x = sample_matrix(b, 1, 2000)
        assert np.allclose(tr.y[-1], x.mean(axis=0), atol=1e-9)
        assert tr.seminorm[-1] > 10

    def test_push_sum_mass(self):
        g = make_directed_rgg(10, 0.6, seed=1)
        b = BeliefModel.gaussian(np.arange(10) * 9.0, 10.0)
        tr = run(Static(g), None, b, PUSH_SUM, 500, seed=2)
        assert np.abs(tr.mass_v - 10).max() <= 1e-9
        assert (tr.v_min > 0).all()
        assert check_trace(tr) == []

    def test_mode_schedule_mismatch(self):
        g = make_connected_rgg(4, 0.8, seed=0)
        b = BeliefModel.constant([1, 2, 3, 4])
        with pytest.raises(ValueError):
            run(Static(g), None, b, PUSH_SUM, 5, seed=0)
