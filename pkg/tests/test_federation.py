import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import make_shards, random_dataset
from src.data import Dataset, Shard, synth_logistic
from src.errors import ConfigError, LineSearchError, PartitionError, SketchError
from src.federation import (
    ExitRule,
    FedNDESConfig,
    Federation,
    RoundMetrics,
    RoundUpload,
    RunTrace,
    aggregate_sketched_hessian,
    aggregate_weighted,
    armijo_predicate,
    communication_ledger,
    fedavg_baseline_run,
    fedndes_run,
    fedndes_sketch_sizes,
    fednewton_round,
    fednewton_run,
    fedns_round,
    fedns_run,
    local_line_search,
    local_sketch_round,
    newton_decrement,
    newton_direction,
    predicted_scalars_up,
    sketch_upload,
    worker_sketch,
    zero_one_accuracy,
)
from src.objective import (
    ModelState,
    Objective,
    centralized_newton,
    gradient,
    krr_closed_form,
    loss,
    reference_optimum,
    sqrt_hessian,
)
from src.sketch import make_sketch


def relative(actual, expected):
    return np.linalg.norm(actual - expected) / max(np.linalg.norm(expected), 1.0)


def single_shard(data: Dataset) -> Shard:
    return Shard(data.features, data.labels, 1.0, 0, np.arange(data.n_samples))


class TestWorker:
    def test_identity_sketch_uploads_the_factor(self):
        data = random_dataset(8, 3, seed=0)
        obj = Objective("logistic", 1e-2)
        w = np.array([0.1, -0.2, 0.3])
        shard = single_shard(data)
        upsilon, g = local_sketch_round(shard, obj, w, make_sketch("identity", 8, 8, seed=0))
        assert np.array_equal(upsilon, sqrt_hessian(obj, data, w).factor)
        assert np.array_equal(g, gradient(obj, data, w))

    def test_sketch_must_match_shard(self):
        shard = single_shard(random_dataset(8, 3, seed=0))
        with pytest.raises(SketchError):
            local_sketch_round(shard, Objective("logistic"), np.zeros(3), make_sketch("gaussian", 4, 9, seed=0))

    def test_worker_sketches_differ_by_round_and_worker(self):
        shards = make_shards(random_dataset(40, 2, seed=0), 2)
        base = worker_sketch(shards[0], "gaussian", 4, seed=1, round_index=1)
        assert not np.array_equal(base.gaussian, worker_sketch(shards[0], "gaussian", 4, 1, 2).gaussian)
        assert not np.array_equal(base.gaussian, worker_sketch(shards[1], "gaussian", 4, 1, 1).gaussian)
        assert np.array_equal(base.gaussian, worker_sketch(shards[0], "gaussian", 4, 1, 1).gaussian)

    def test_weighted_local_gradients_sum_to_global(self):
        data = random_dataset(90, 4, seed=1)
        obj = Objective("logistic", 0.1)
        w = np.array([0.5, -1.0, 0.2, 0.0])
        shards = make_shards(data, 4, "label_skew", alpha=0.5, seed=2)
        total = aggregate_weighted([(gradient(obj, shard, w), shard.weight) for shard in shards])
        assert relative(total, gradient(obj, data, w)) <= 1e-12


class TestServer:
    def test_aggregate_sketched_hessian_adds_exact_ridge(self):
        H = aggregate_sketched_hessian([(np.eye(2), 1.0)], lam=0.5)
        assert np.array_equal(H, 1.5 * np.eye(2))

    def test_aggregate_sketched_hessian_weights(self):
        first = np.array([[1.0, 0.0]])
        second = np.array([[0.0, 2.0]])
        H = aggregate_sketched_hessian([(first, 0.25), (second, 0.75)], lam=0.0)
        assert np.array_equal(H, np.diag([0.25, 3.0]))

    def test_aggregate_requires_uploads(self):
        with pytest.raises(ValueError):
            aggregate_sketched_hessian([], lam=1.0)
        with pytest.raises(ValueError):
            aggregate_weighted([])

    def test_newton_decrement(self):
        assert newton_decrement(np.array([1.0, 2.0]), np.array([-1.0, -0.5])) == 2.0

    def test_newton_direction(self):
        assert np.allclose(newton_direction(np.diag([2.0, 4.0]), np.array([2.0, 2.0])), [-1.0, -0.5])

    def test_federation_rejects_bad_shards(self):
        data = random_dataset(20, 2, seed=0)
        shards = make_shards(data, 2)
        obj = Objective("logistic")
        with pytest.raises(PartitionError):
            Federation([shards[0], shards[0]], obj)
        with pytest.raises(PartitionError):
            Federation([shards[0]], obj)
        with pytest.raises(PartitionError):
            Federation([], obj)

    def test_federation_orders_workers(self):
        shards = make_shards(random_dataset(20, 2, seed=0), 3)
        fed = Federation(list(reversed(shards)), Objective("logistic"))
        assert fed.map(lambda shard: shard.worker_id) == [0, 1, 2]
        assert fed.map(lambda shard, own, x: own + x, 10, per_worker=[1, 2, 3]) == [11, 12, 13]
        assert (fed.m, fed.M) == (3, 2)


class TestFedNewton:
    def test_single_worker_is_centralized_newton(self):
        data = random_dataset(120, 5, seed=3)
        obj = Objective("logistic", 1e-3)
        w0 = np.full(5, 0.1)
        state = fednewton_round([single_shard(data)], obj, w0)
        expected = centralized_newton(obj, data, w0, tol=0.0, max_iter=1).state.w
        assert relative(state.w, expected) <= 1e-12
        assert state.round == 1

    def test_worker_count_does_not_change_the_step(self):
        data = random_dataset(120, 5, seed=3)
        obj = Objective("logistic", 1e-3)
        w0 = np.zeros(5)
        one = fednewton_round(make_shards(data, 1), obj, w0)
        four = fednewton_round(make_shards(data, 4, "label_skew", alpha=0.5), obj, w0)
        assert relative(four.w, one.w) <= 1e-10

    @pytest.mark.parametrize(
        "m,strategy,alpha", [(2, "iid", None), (5, "iid", None), (4, "label_skew", 0.5), (8, "label_skew", 1.0)]
    )
    def test_trajectory_does_not_depend_on_partition(self, m, strategy, alpha):
        data = random_dataset(400, 6, seed=8)
        obj = Objective("logistic", 1e-3)
        reference = reference_optimum(obj, data)
        pooled = fednewton_run(make_shards(data, 1), obj, np.zeros(6), T=6, reference=reference)
        shards = make_shards(data, m, strategy, alpha=alpha, seed=4)
        split = fednewton_run(shards, obj, np.zeros(6), T=6, reference=reference)
        assert len(split.iterates) == len(pooled.iterates) == 7
        for w_split, w_pooled in zip(split.iterates, pooled.iterates):
            assert relative(w_split, w_pooled) <= 1e-10
        for a, b in zip(split.rows, pooled.rows):
            assert a.loss == pytest.approx(b.loss, abs=1e-12)

    def test_quadratic_in_one_round(self, ridge_dataset):
        obj = Objective("squared", 1e-2)
        state = fednewton_round(make_shards(ridge_dataset, 4), obj, np.zeros(6))
        assert relative(state.w, krr_closed_form(ridge_dataset, 1e-2)) <= 1e-8

    def test_quadratic_convergence(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        trace = fednewton_run(shards, obj, np.zeros(20), T=10, reference=reference)
        gaps = trace.gaps
        assert abs(gaps[-1]) <= 1e-12
        last = max(t for t in range(len(gaps) - 1) if gaps[t] > 1e-10)
        assert gaps[last + 1] / gaps[last] <= 1e-2

    def test_zero_rounds(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        trace = fednewton_run(shards, obj, np.zeros(20), T=0, reference=reference)
        assert len(trace.rows) == 1
        assert trace.uploads == []
        expected = loss(obj, Federation(shards, obj).pooled, np.zeros(20)) - loss(
            obj, Federation(shards, obj).pooled, reference.w
        )
        assert trace.rows[0].optimal_gap == pytest.approx(expected, abs=1e-15)

    def test_row_zero_has_no_communication(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        row = fednewton_run(shards, obj, np.zeros(20), T=1, reference=reference).rows[0]
        assert (row.scalars_up, row.scalars_down, row.sketch_size) == (0, 0, 0)
        assert math.isnan(row.decrement) and math.isnan(row.step_size)

    def test_wrong_start_length(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        with pytest.raises(ConfigError):
            fednewton_run(shards, obj, np.zeros(3), T=1, reference=reference)


class TestFedNS:
    @pytest.mark.parametrize("strategy,alpha", [("iid", None), ("label_skew", 0.5)])
    def test_identity_sketch_reproduces_fednewton(self, strategy, alpha):
        data = random_dataset(500, 10, seed=5)
        obj = Objective("logistic", 1e-3)
        shards = make_shards(data, 4, strategy, alpha=alpha, seed=1)
        reference = reference_optimum(obj, data)
        newton = fednewton_run(shards, obj, np.zeros(10), T=5, reference=reference)
        sketched = fedns_run(shards, obj, np.zeros(10), 1.0, 1, 5, seed=0, kind="identity", reference=reference)
        for w_newton, w_sketched in zip(newton.iterates, sketched.iterates):
            assert relative(w_sketched, w_newton) <= 1e-10

    def test_large_sketches_converge_fast(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        finals = [
            fedns_run(shards, obj, np.zeros(20), 1.0, 80, 10, seed=seed, reference=reference).gaps[-1]
            for seed in range(1, 11)
        ]
        assert sum(gap <= 1e-8 for gap in finals) >= 9

    def test_round_reproduces_run(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        trace = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 2, seed=3, reference=reference)
        state = ModelState(np.zeros(20))
        for _ in range(2):
            state = fedns_round(shards, obj, state, 1.0, 20, seed=3)
        assert np.array_equal(state.w, trace.iterates[-1])
        assert state.round == 2

    def test_seed_changes_the_path(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        first = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 2, seed=1, reference=reference)
        second = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 2, seed=2, reference=reference)
        assert not np.array_equal(first.iterates[-1], second.iterates[-1])

    def test_threads_are_bit_identical(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        serial = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 4, seed=7, reference=reference)
        with ThreadPoolExecutor(max_workers=4) as executor:
            threaded = fedns_run(
                shards, obj, np.zeros(20), 1.0, 20, 4, seed=7, reference=reference, executor=executor
            )
        for a, b in zip(serial.iterates, threaded.iterates):
            assert np.array_equal(a, b)
        assert [row.loss for row in serial.rows] == [row.loss for row in threaded.rows]

    def test_accuracy_column(self, benchmark_problem, benchmark_dataset):
        obj, shards, reference = benchmark_problem
        test = benchmark_dataset.subset(np.arange(200))
        with_test = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 1, seed=0, reference=reference, test=test)
        without = fedns_run(shards, obj, np.zeros(20), 1.0, 20, 1, seed=0, reference=reference)
        assert all(0.0 <= row.test_accuracy <= 1.0 for row in with_test.rows)
        assert all(math.isnan(row.test_accuracy) for row in without.rows)


class TestFedAvg:
    def test_one_local_step_is_gradient_descent(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        w0 = np.full(20, 0.05)
        trace = fedavg_baseline_run(shards, obj, w0, local_steps=1, step_size=0.5, T=1, reference=reference)
        pooled = Federation(shards, obj).pooled
        assert relative(trace.iterates[1], w0 - 0.5 * gradient(obj, pooled, w0)) <= 1e-12

    def test_lags_behind_sketched_newton(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        avg = fedavg_baseline_run(shards, obj, np.zeros(20), local_steps=1, step_size=0.1, T=8, reference=reference)
        assert avg.gaps[8] >= 1e-2
        sketched = [
            fedns_run(shards, obj, np.zeros(20), 1.0, 80, 8, seed=seed, reference=reference).gaps[8]
            for seed in range(1, 11)
        ]
        assert sum(gap <= 1e-10 for gap in sketched) >= 9

    def test_quadratic_descent_is_monotone(self, ridge_dataset):
        obj = Objective("squared", 1e-2)
        trace = fedavg_baseline_run(make_shards(ridge_dataset, 4), obj, np.zeros(6), step_size=0.5, T=20)
        losses = [row.loss for row in trace.rows]
        assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))

    @pytest.mark.parametrize("local_steps,step_size", [(0, 1.0), (1, 0.0), (2, -1.0)])
    def test_invalid_parameters(self, benchmark_problem, local_steps, step_size):
        obj, shards, reference = benchmark_problem
        with pytest.raises(ConfigError):
            fedavg_baseline_run(shards, obj, np.zeros(20), local_steps, step_size, reference=reference)


class TestLineSearch:
    @pytest.fixture
    def parabola(self):
        # L(w) = w^2 / 2 on a single sample
        return single_shard(Dataset(np.array([[1.0]]), np.array([0.0]))), Objective("squared", 0.0)

    def test_full_step_accepted(self, parabola):
        shard, obj = parabola
        assert local_line_search(shard, obj, np.array([1.0]), np.array([-1.0]), 1.0, 0.1, 0.5) == 1.0

    def test_overshoot_backtracks(self, parabola):
        shard, obj = parabola
        assert local_line_search(shard, obj, np.array([1.0]), np.array([-4.0]), 4.0, 0.1, 0.5) == 0.25

    def test_ascent_direction_fails(self, parabola):
        shard, obj = parabola
        with pytest.raises(LineSearchError) as excinfo:
            local_line_search(shard, obj, np.array([1.0]), np.array([1.0]), 1.0, 0.1, 0.5, max_backtracks=5)
        assert excinfo.value.worker_id == 0
        assert excinfo.value.backtracks == 5

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_predicate_scan(self, seed):
        data = random_dataset(60, 3, seed=seed)
        shard = single_shard(data)
        obj = Objective("logistic", 1e-2)
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(3)
        delta_w = -3.0 * gradient(obj, data, w) + 0.5 * rng.standard_normal(3)
        decrement = 0.5
        g = rng.standard_normal(3)

        for local_gradient, correction in ((None, 0.0), (g, float(g @ delta_w) + decrement)):
            expected = None
            for i in range(51):
                mu = 0.5**i
                if armijo_predicate(loss(obj, data, w + mu * delta_w), loss(obj, data, w), mu, decrement, 0.1, correction):
                    expected = mu
                    break
            if expected is None:
                with pytest.raises(LineSearchError):
                    local_line_search(shard, obj, w, delta_w, decrement, 0.1, 0.5, local_gradient=local_gradient)
            else:
                assert local_line_search(shard, obj, w, delta_w, decrement, 0.1, 0.5, local_gradient=local_gradient) == expected

    def test_corrected_search_terminates_on_every_worker(self, benchmark_problem):
        obj, shards, _ = benchmark_problem
        w = np.zeros(20)
        g = aggregate_weighted([(gradient(obj, shard, w), shard.weight) for shard in shards])
        H = 0.01 * np.eye(20)
        delta_w = newton_direction(H, g)
        decrement = newton_decrement(g, delta_w)
        for shard in shards:
            mu = local_line_search(
                shard, obj, w, delta_w, decrement, 0.1, 0.5, local_gradient=gradient(obj, shard, w)
            )
            assert 0.0 < mu <= 1.0


class TestFedNDESConfig:
    def test_default_rule_squares_the_decrement(self):
        cfg = FedNDESConfig(delta=1e-12)
        assert cfg.exit_rule is ExitRule.PAPER
        assert not cfg.should_exit(1e-6)
        assert cfg.should_exit(1e-7)

    @pytest.mark.parametrize("name", ["paper", "squared"])
    def test_default_rule_by_name(self, name):
        cfg = FedNDESConfig(exit_rule=name)
        assert cfg.exit_rule is ExitRule.PAPER
        assert cfg == FedNDESConfig()

    def test_linear_rule(self):
        cfg = FedNDESConfig(delta=1.0, exit_rule="linear")
        assert cfg.exit_rule is ExitRule.LINEAR
        assert cfg.should_exit(0.7)
        assert not cfg.should_exit(0.8)

    @pytest.mark.parametrize(
        "kwargs", [{"a": 0.6}, {"b": 1.0}, {"delta": 0.0}, {"mbar1": 0}, {"unknown": 1}, {"eta": float("inf")}]
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            FedNDESConfig(**kwargs)

    def test_is_frozen(self):
        with pytest.raises(ValidationError):
            FedNDESConfig().delta = 1.0


class TestFedNDES:
    def test_quadratic_exits_after_one_full_step(self, ridge_dataset):
        obj = Objective("squared", 1e-2)
        trace = fedndes_run(make_shards(ridge_dataset, 4), obj, np.zeros(6), kind="identity", T_max=5)
        assert trace.exited and not trace.max_rounds_reached
        assert len(trace.rows) <= 3
        assert trace.rows[1].step_size == 1.0
        assert abs(trace.gaps[-1]) <= 1e-12

    def test_exit_at_the_optimum(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        trace = fedndes_run(shards, obj, reference.w, seed=1, reference=reference)
        assert trace.exited
        assert len(trace.rows) == 2
        exit_row = trace.rows[1]
        assert exit_row.step_size == 0.0
        assert exit_row.scalars_down == 0
        assert np.array_equal(trace.iterates[1], trace.iterates[0])
        assert communication_ledger(trace).matches_formula

    def test_converges_on_fast_decay(self):
        data = synth_logistic(2000, 20, 2.0, seed=0, decay=4.0)
        obj = Objective("logistic", 1e-3)
        shards = make_shards(data, 4)
        reference = reference_optimum(obj, data)
        cfg = FedNDESConfig(delta=1e-14)
        finals = [
            fedndes_run(shards, obj, np.zeros(20), cfg, T_max=20, seed=seed, reference=reference).gaps[-1]
            for seed in range(1, 11)
        ]
        assert sum(gap <= 1e-6 for gap in finals) >= 8

    @pytest.mark.parametrize("strategy,alpha", [("iid", None), ("label_skew", 0.3)])
    def test_every_round_meets_sufficient_decrease(self, benchmark_dataset, strategy, alpha):
        obj = Objective("logistic", 1e-3)
        shards = make_shards(benchmark_dataset, 4, strategy, alpha=alpha, seed=1)
        reference = reference_optimum(obj, benchmark_dataset)
        cfg = FedNDESConfig(mbar1=10, mbar2=40)
        trace = fedndes_run(shards, obj, np.zeros(20), cfg, T_max=10, seed=2, reference=reference)
        for t, (previous, row) in enumerate(zip(trace.rows, trace.rows[1:]), start=1):
            if trace.exited and t == len(trace.rows) - 1:
                assert row.step_size == 0.0 and row.loss == previous.loss
                continue
            assert 0.0 < row.step_size <= 1.0
            bound = previous.loss - cfg.a * row.step_size * max(row.decrement, 0.0) + 1e-12
            assert row.loss <= bound, f"round {t}"

    def test_sketch_size_follows_the_decrement(self, benchmark_problem):
        obj, shards, reference = benchmark_problem
        cfg = FedNDESConfig(mbar1=10, mbar2=40)
        trace = fedndes_run(shards, obj, np.zeros(20), cfg, T_max=10, seed=2, reference=reference)
        rows = trace.rows
        assert rows[1].sketch_size == 10
        for previous, row in zip(rows[1:], rows[2:]):
            assert row.sketch_size == (10 if previous.decrement > cfg.eta else 40)

    def test_default_sketch_sizes(self, benchmark_problem):
        obj, shards, _ = benchmark_problem
        mbar1, mbar2 = fedndes_sketch_sizes(shards, obj, np.zeros(20), FedNDESConfig())
        assert 1 <= mbar1 <= mbar2
        assert fedndes_sketch_sizes(shards, obj, np.zeros(20), FedNDESConfig(mbar1=3, mbar2=7)) == (3, 7)

    def test_round_limit_is_flagged(self, benchmark_problem, caplog):
        obj, shards, reference = benchmark_problem
        with caplog.at_level(logging.WARNING):
            trace = fedndes_run(shards, obj, np.zeros(20), FedNDESConfig(mbar1=10, mbar2=10), T_max=1, reference=reference)
        assert trace.max_rounds_reached and not trace.exited
        assert "T_max=1" in caplog.text


class TestLedger:
    @pytest.fixture
    def problem(self):
        data = random_dataset(400, 10, seed=11)
        obj = Objective("logistic", 1e-2)
        return obj, make_shards(data, 4), reference_optimum(obj, data)

    def test_fedns_counts(self, problem):
        obj, shards, reference = problem
        trace = fedns_run(shards, obj, np.zeros(10), 1.0, 10, 3, seed=0, reference=reference)
        ledger = communication_ledger(trace)
        assert ledger.per_round_up == [440, 440, 440]
        assert ledger.per_round_down == [10, 10, 10]
        assert ledger.cumulative_up == [440, 880, 1320]
        assert (ledger.total_up, ledger.bytes_up, ledger.bytes_down) == (1320, 10560, 240)
        assert ledger.matches_formula

    def test_fednewton_and_fedavg_counts(self, problem):
        obj, shards, reference = problem
        newton = communication_ledger(fednewton_run(shards, obj, np.zeros(10), T=2, reference=reference))
        avg = communication_ledger(fedavg_baseline_run(shards, obj, np.zeros(10), T=2, reference=reference))
        assert newton.per_round_up == [440, 440] and newton.matches_formula
        assert avg.per_round_up == [40, 40] and avg.matches_formula

    def test_fedndes_counts(self, problem):
        obj, shards, reference = problem
        cfg = FedNDESConfig(mbar1=10, mbar2=10, delta=1e-12)
        trace = fedndes_run(shards, obj, np.zeros(10), cfg, T_max=15, seed=0, reference=reference)
        ledger = communication_ledger(trace)
        assert ledger.matches_formula
        for upload, up, down in zip(trace.uploads, ledger.per_round_up, ledger.per_round_down):
            assert (up, down) == ((440, 0) if upload.exit_round else (444, 22))

    def test_clipped_srht_counts_actual_rows(self, caplog):
        data = random_dataset(20, 3, seed=0)
        obj = Objective("logistic", 1e-2)
        shards = make_shards(data, 4)
        with caplog.at_level(logging.WARNING):
            trace = fedns_run(shards, obj, np.zeros(3), 1.0, 50, 1, seed=0, reference=reference_optimum(obj, data))
        assert "clipping" in caplog.text
        assert trace.uploads[0].sketch_rows == (8, 8, 8, 8)
        assert communication_ledger(trace).per_round_up == [4 * (8 * 3 + 3)]
        assert communication_ledger(trace).matches_formula

    def test_worker_ignoring_requested_size_is_flagged(self, problem, monkeypatch, caplog):
        obj, shards, reference = problem

        def three_rows(shard, obj, w, kind, k, seed, round_index):
            return sketch_upload(shard, obj, w, kind, 3, seed, round_index)

        monkeypatch.setattr("src.federation.algorithms.sketch_upload", three_rows)
        with caplog.at_level(logging.WARNING):
            trace = fedns_run(shards, obj, np.zeros(10), 1.0, 10, 2, seed=0, reference=reference)
        ledger = communication_ledger(trace)
        assert [row.sketch_size for row in trace.rows[1:]] == [10, 10]
        assert ledger.per_round_up == [160, 160]
        assert not ledger.matches_formula
        assert "expected 440" in caplog.text

    def test_prediction_uses_requested_size(self):
        upload = RoundUpload(
            1,
            worker_scalars=(40, 40),
            sketch_rows=(3, 3),
            requested_k=10,
            sketch_kind="gaussian",
            shard_sizes=(100, 100),
        )
        assert upload.expected_rows == (10, 10)
        assert predicted_scalars_up("fedns", 2, 10, upload) == 220
        clipped = RoundUpload(1, (0,), requested_k=50, sketch_kind="srht", shard_sizes=(5,))
        assert clipped.expected_rows == (8,)


class TestTrace:
    def test_rounds_must_increase(self):
        trace = RunTrace("fedns", 1, 2)
        row = RoundMetrics(round=0, loss=1.0, optimal_gap=0.0, grad_norm=0.0)
        trace.record(row, np.zeros(2))
        with pytest.raises(ValueError):
            trace.record(row, np.zeros(2))

    def test_zero_one_accuracy_ties_predict_positive(self):
        data = Dataset(np.ones((4, 2)), np.array([1.0, 1.0, 1.0, -1.0]))
        assert zero_one_accuracy(data, np.zeros(2)) == 0.75
