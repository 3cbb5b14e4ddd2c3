import copy
import json
import math
import os

import pytest

from conftest import FIXTURES_DIR
from scripts.run_experiment import int_list, main
from src.constants import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_OK, SWEEP_COLUMNS, TRACE_COLUMNS
from src.errors import ConfigError
from src.experiment import (
    estimate_effective_dimension,
    load_config,
    mean_rows,
    parse_config,
    prepare_problem,
    read_trace,
    run_experiment,
    sweep_sketch_size,
)
from src.experiment.runner import load_dataset
from src.experiment.trace_io import format_value

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "configs")

BASE = {
    "name": "unit",
    "dataset": {"source": "synthetic_logistic", "n": 400, "d": 5, "separability": 2.0, "seed": 0},
    "objective": {"family": "logistic", "lam": 0.001},
    "partition": {"strategy": "iid", "m": 4},
    "algorithm": {"name": "fedns", "sketch_size": 10, "rounds": 3},
    "seeds": [1, 2, 3],
}


def make_config(**overrides) -> dict:
    data = copy.deepcopy(BASE)
    for key, value in overrides.items():
        data[key] = value
    return data


def write_json(path, data) -> str:
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestConfig:
    def test_valid(self):
        config = parse_config(make_config())
        assert config.algorithm.resolve_sketch_size(5) == 10
        assert config.feature_map.kind == "identity"

    @pytest.mark.parametrize(
        "overrides",
        [
            {"unexpected": 1},
            {"algorithm": {"name": "fedns", "sketch_size": 10, "colour": "red"}},
            {"algorithm": {"name": "fedns", "sketch_size": 10, "sketch_factor": 1.0}},
            {"algorithm": {"name": "fedns", "sketch_kind": "cauchy"}},
            {"algorithm": {"name": "fedndes", "fedndes": {"exit_rule": "cubic"}}},
            {"algorithm": {"name": "newton"}},
            {"seeds": [1, 1]},
            {"seeds": []},
            {"sweep_k_values": []},
            {"partition": {"strategy": "label_skew", "m": 4}},
            {"objective": {"family": "logistic", "lam": 0.0}},
            {"feature_map": {"kind": "random_fourier"}},
            {"test_fraction": 1.0},
            {"dataset": {"source": "synthetic_logistic", "n": 0, "d": 5}},
        ],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            parse_config(make_config(**overrides))

    def test_sketch_factor(self):
        config = parse_config(make_config(algorithm={"name": "fedns", "sketch_factor": 2.5}))
        assert config.algorithm.resolve_sketch_size(4) == 10

    def test_hash_ignores_key_order(self):
        reordered = dict(reversed(list(make_config().items())))
        assert parse_config(reordered).config_hash() == parse_config(make_config()).config_hash()
        assert parse_config(make_config(seeds=[1])).config_hash() != parse_config(make_config()).config_hash()

    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "absent.json"))
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(broken))
        latin = tmp_path / "latin.json"
        latin.write_bytes(b'{"name": "caf\xe9"}')
        with pytest.raises(ConfigError, match="UTF-8"):
            load_config(str(latin))

    @pytest.mark.parametrize("filename", sorted(os.listdir(CONFIG_DIR)))
    def test_shipped_configs_validate(self, filename):
        assert load_config(os.path.join(CONFIG_DIR, filename)).name


class TestTraceFiles:
    def test_format_value(self):
        assert format_value(3) == "3"
        assert format_value(float("nan")) == "nan"
        assert format_value(0.1) == "0.1"

    def test_mean_carries_final_rows_forward(self):
        def row(t, gap):
            values = {column: 0.0 for column in TRACE_COLUMNS}
            values.update(round=t, optimal_gap=gap)
            return values

        short = [row(0, 1.0), row(1, 0.5)]
        long = [row(0, 3.0), row(1, 1.5), row(2, 0.5)]
        averaged = mean_rows([short, long])
        assert [r["optimal_gap"] for r in averaged] == [2.0, 1.0, 0.5]
        assert [r["round"] for r in averaged] == [0, 1, 2]


class TestRunExperiment:
    def test_writes_traces(self, tmp_path):
        config = parse_config(make_config(test_fraction=0.2))
        result = run_experiment(config, str(tmp_path))
        names = sorted(os.path.basename(path) for path in result.files)
        assert names == sorted(
            [f"trace_seed{seed}.{ext}" for seed in (1, 2, 3) for ext in ("csv", "json")]
            + ["trace_mean.csv", "trace_mean.json"]
        )

        with open(tmp_path / "trace_seed1.csv", encoding="utf-8") as f:
            assert f.readline().strip() == ",".join(TRACE_COLUMNS)
        rows = read_trace(str(tmp_path / "trace_seed1.csv"))
        assert [row["round"] for row in rows] == [0, 1, 2, 3]
        assert rows[0]["scalars_up"] == 0
        assert rows[0]["loss"] == pytest.approx(math.log(2), abs=1e-15)
        assert rows[0]["optimal_gap"] > 0
        assert all(0.0 <= row["test_accuracy"] <= 1.0 for row in rows)

        header = json.loads((tmp_path / "trace_seed1.json").read_text(encoding="utf-8"))
        assert header["config_hash"] == config.config_hash()
        assert (header["seed"], header["k"], header["m"], header["M"], header["N"]) == (1, 10, 4, 5, 320)
        assert header["communication"]["matches_formula"]
        assert header["communication"]["scalars_up"] == 3 * 4 * (10 * 5 + 5)
        assert rows[0]["optimal_gap"] == pytest.approx(math.log(2) - header["reference_loss"], abs=1e-15)

        mean_header = json.loads((tmp_path / "trace_mean.json").read_text(encoding="utf-8"))
        assert mean_header["seeds"] == [1, 2, 3]
        assert mean_header["aggregate"] == "mean"

    def test_threads_give_identical_files(self, tmp_path):
        config = parse_config(make_config())
        serial = run_experiment(config, str(tmp_path / "serial"), threads=1)
        threaded = run_experiment(config, str(tmp_path / "threaded"), threads=4)
        for a, b in zip(serial.files, threaded.files):
            assert os.path.basename(a) == os.path.basename(b)
            with open(a, "rb") as fa, open(b, "rb") as fb:
                assert fa.read() == fb.read()

    def test_seed_override(self, tmp_path):
        result = run_experiment(parse_config(make_config()), str(tmp_path), seeds=[7])
        assert list(result.traces) == [7]

    @pytest.mark.parametrize(
        "algorithm",
        [
            {"name": "fednewton", "rounds": 2},
            {"name": "fedavg", "rounds": 2, "local_steps": 2, "step_size": 0.5},
            {"name": "fedndes", "rounds": 4, "fedndes": {"mbar1": 8, "mbar2": 16}},
        ],
    )
    def test_every_algorithm_runs(self, tmp_path, algorithm):
        result = run_experiment(parse_config(make_config(algorithm=algorithm, seeds=[1])), str(tmp_path))
        header = json.loads((tmp_path / "trace_seed1.json").read_text(encoding="utf-8"))
        assert header["algorithm"] == algorithm["name"]
        assert header["communication"]["matches_formula"]
        assert result.traces[1].rows[-1].optimal_gap < result.traces[1].rows[0].optimal_gap

    def test_ridge_has_no_accuracy(self, tmp_path):
        config = make_config(
            dataset={"source": "synthetic_ridge", "n": 200, "d": 4},
            objective={"family": "squared", "lam": 0.01},
            algorithm={"name": "fednewton", "rounds": 1},
            seeds=[1],
            test_fraction=0.25,
        )
        run_experiment(parse_config(config), str(tmp_path))
        rows = read_trace(str(tmp_path / "trace_seed1.csv"))
        assert all(math.isnan(row["test_accuracy"]) for row in rows)
        assert abs(rows[-1]["optimal_gap"]) <= 1e-12

    def test_random_fourier_problem(self):
        config = make_config(feature_map={"kind": "random_fourier", "output_dim": 32, "bandwidth": 2.0})
        problem = prepare_problem(parse_config(config))
        assert problem.M == 32
        assert problem.train.name.endswith("+rff32")

    def test_many_workers_ledger(self, tmp_path):
        config = make_config(
            dataset={"source": "synthetic_logistic", "n": 2000, "d": 68, "seed": 1},
            partition={"strategy": "iid", "m": 40},
            algorithm={"name": "fedns", "sketch_size": 17, "rounds": 2},
            seeds=[1],
        )
        run_experiment(parse_config(config), str(tmp_path))
        communication = json.loads((tmp_path / "trace_seed1.json").read_text(encoding="utf-8"))["communication"]
        assert communication["scalars_up"] == 2 * 40 * (17 * 68 + 68)
        assert communication["bytes_up"] == 8 * communication["scalars_up"]
        assert communication["scalars_down"] == 2 * 68
        assert communication["matches_formula"]

    def test_libsvm_source(self):
        config = make_config(dataset={"source": "libsvm", "path": os.path.join(FIXTURES_DIR, "golden.svm")})
        data = load_dataset(parse_config(config))
        assert (data.n_samples, data.feature_dim) == (3, 3)


class TestSweep:
    @pytest.mark.slow
    def test_gap_shrinks_with_sketch_size(self, tmp_path):
        config = parse_config(
            make_config(
                dataset={"source": "synthetic_logistic", "n": 2000, "d": 20, "decay": 4.0, "seed": 0},
                algorithm={"name": "fedns", "sketch_size": 10, "rounds": 10},
                seeds=list(range(1, 11)),
            )
        )
        # ceil(M/4), ceil(M/2), M and 2M for M = 20
        summary = sweep_sketch_size(config, [5, 10, 20, 40], str(tmp_path))
        gaps = [row["mean_final_gap"] for row in summary]
        for smaller, larger in zip(gaps, gaps[1:]):
            assert larger <= 2 * smaller + 1e-12
        with open(tmp_path / "sweep_k.csv", encoding="utf-8") as f:
            assert f.readline().strip() == ",".join(SWEEP_COLUMNS)
        assert json.loads((tmp_path / "sweep_k.json").read_text(encoding="utf-8"))["k_values"] == [5, 10, 20, 40]

    @pytest.mark.parametrize(
        "k_values,algorithm",
        [
            ([], {"name": "fedns"}),
            ([0, 5], {"name": "fedns"}),
            ([5], {"name": "fednewton"}),
        ],
    )
    def test_rejects_bad_requests(self, tmp_path, k_values, algorithm):
        with pytest.raises(ConfigError):
            sweep_sketch_size(parse_config(make_config(algorithm=algorithm)), k_values, str(tmp_path))


class TestEffectiveDimension:
    def test_report(self):
        report = estimate_effective_dimension(parse_config(make_config()))
        assert 0 < report.effective_dimension <= 5
        assert report.suggested_mbar1 == math.ceil(4 * report.effective_dimension)
        assert report.suggested_mbar2 == math.ceil(16 * report.effective_dimension)
        assert "effective dimension" in report.format()


class TestCli:
    def test_int_list(self):
        assert int_list("1-3,5") == [1, 2, 3, 5]

    def test_validate_config(self, capsys, tmp_path):
        path = os.path.join(CONFIG_DIR, "synthetic_fedns.json")
        assert main(["validate-config", "--config", path, "--env-file", str(tmp_path / ".env")]) == EXIT_OK
        assert "valid" in capsys.readouterr().out

    def test_invalid_config_exit_code(self, tmp_path):
        path = write_json(tmp_path / "bad.json", make_config(unexpected=True))
        assert main(["run", "--config", path, "--env-file", str(tmp_path / ".env")]) == EXIT_CONFIG_ERROR

    def test_missing_dataset_exit_code(self, tmp_path):
        config = make_config(dataset={"source": "libsvm", "path": str(tmp_path / "absent.svm")})
        path = write_json(tmp_path / "libsvm.json", config)
        code = main(["run", "--config", path, "--out", str(tmp_path / "out"), "--env-file", str(tmp_path / ".env")])
        assert code == EXIT_DATA_ERROR

    def test_undecodable_dataset_exit_code(self, tmp_path):
        dataset = tmp_path / "binary.svm"
        dataset.write_bytes(b"+1 1:0.5\n\xff\xfe 1:1\n")
        config = make_config(dataset={"source": "libsvm", "path": str(dataset)})
        path = write_json(tmp_path / "libsvm.json", config)
        code = main(["run", "--config", path, "--out", str(tmp_path / "out"), "--env-file", str(tmp_path / ".env")])
        assert code == EXIT_DATA_ERROR

    def test_undecodable_config_exit_code(self, tmp_path):
        path = tmp_path / "latin.json"
        path.write_bytes(b'{"name": "caf\xe9"}')
        assert main(["validate-config", "--config", str(path), "--env-file", str(tmp_path / ".env")]) == EXIT_CONFIG_ERROR

    def test_run_writes_output(self, tmp_path):
        path = write_json(tmp_path / "ok.json", make_config(seeds=[1, 2]))
        out = tmp_path / "out"
        args = ["run", "--config", path, "--out", str(out), "--seeds", "4", "--env-file", str(tmp_path / ".env")]
        assert main(args) == EXIT_OK
        assert (out / "trace_seed4.csv").exists()
        assert not (out / "trace_seed1.csv").exists()

    def test_effdim(self, capsys, tmp_path):
        path = write_json(tmp_path / "ok.json", make_config())
        assert main(["effdim", "--config", path, "--env-file", str(tmp_path / ".env")]) == EXIT_OK
        assert "mbar1=" in capsys.readouterr().out

    def test_threads_must_be_positive(self, tmp_path):
        path = write_json(tmp_path / "ok.json", make_config())
        assert main(["run", "--config", path, "--threads", "0", "--env-file", str(tmp_path / ".env")]) == EXIT_CONFIG_ERROR
