import json
import math

import numpy as np
import pytest

from calamp.cli import main as cli_main
from calamp.harness import (
    SweepSpec,
    aggregate_rows,
    alpha_min,
    cell_seed,
    measurement_count,
    read_rows_csv,
    run_cell_replicate,
    run_phase_diagram,
    run_sigma_p_diagram,
    run_sweep,
    run_transition_profile,
    sparsity_count,
    write_rows_csv,
)

FAST_SOLVER = {"max_iters": 60}


def small_spec(**kw):
    base = dict(
        alphas=(0.3, 0.75),
        rhos=(0.2,),
        Ps=(2,),
        sigma2s=(0.01,),
        Ns=(64,),
        replicates=3,
        base_seed=11,
        solver=dict(FAST_SOLVER),
    )
    base.update(kw)
    return SweepSpec(**base)


class TestSweepSpec:
    def test_json_roundtrip(self):
        spec = small_spec()
        back = SweepSpec.from_json(spec.to_json())
        assert back == spec

    def test_documented_schema(self):
        doc = json.loads(small_spec().to_json())
        assert set(doc) == {"axes", "replicates", "base_seed", "solver", "success_threshold"}
        assert set(doc["axes"]) == {"alpha", "rho", "P", "sigma2", "N"}

    @pytest.mark.parametrize(
        "kw",
        [
            dict(rhos=(1.5,)),
            dict(alphas=(0.0,)),
            dict(Ps=(0,)),
            dict(sigma2s=(-0.1,)),
            dict(Ns=(8,)),
            dict(replicates=0),
            dict(solver={"bogus": 1}),
            dict(alphas=()),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            small_spec(**kw)

    def test_alpha_min(self):
        assert alpha_min(1, 0.2) == math.inf
        assert alpha_min(2, 0.2) == pytest.approx(0.4)
        assert alpha_min(3, 0.5) == pytest.approx(0.75)

    def test_counting_helpers(self):
        assert measurement_count(0.75, 250) == 188
        assert sparsity_count(0.2, 250) == 50


class TestSweep:
    def test_deterministic_rows(self):
        spec = small_spec()
        r1 = run_sweep(spec)
        r2 = run_sweep(spec)
        assert r1.rows == r2.rows

    def test_thread_count_does_not_change_results(self):
        spec = small_spec()
        serial = run_sweep(spec, threads=1)
        parallel = run_sweep(spec, threads=4)
        assert serial.rows == parallel.rows

    def test_rows_reproducible_from_recorded_seed(self):
        spec = small_spec()
        result = run_sweep(spec)
        row = result.rows[-1]
        again = run_cell_replicate(
            row.alpha, row.rho, row.P, row.sigma2, row.N, row.seed, spec.solver
        )
        assert again == row

    def test_replicate_count_and_cell_structure(self):
        spec = small_spec()
        result = run_sweep(spec)
        assert len(result.rows) == 2 * 3
        assert len(result.aggregates) == 2
        assert all(agg.n_rows == 3 for agg in result.aggregates)

    def test_aggregates_match_recomputation(self):
        spec = small_spec()
        result = run_sweep(spec)
        again = aggregate_rows(result.rows, spec.success_threshold)
        assert again == result.aggregates

    def test_per_cell_seeds_differ(self):
        seeds = {cell_seed(0, (i, 0, 0, 0, 0, r)) for i in range(4) for r in range(4)}
        assert len(seeds) == 16


class TestProgramWrappers:
    def test_phase_diagram_shape_checks(self):
        with pytest.raises(ValueError):
            run_phase_diagram(small_spec(Ps=(1, 2)))

    def test_transition_profile_shape_checks(self):
        with pytest.raises(ValueError):
            run_transition_profile(small_spec(rhos=(0.1, 0.2)))

    def test_sigma_p_shape_checks(self):
        with pytest.raises(ValueError):
            run_sigma_p_diagram(small_spec(alphas=(0.3, 0.75)))

    def test_phase_diagram_annotates_alpha_min_and_below_bound_cells_fail(self):
        # alpha = 0.3 sits below alpha_min = 0.4: success rate must be 0
        spec = small_spec(Ns=(125,), solver={})
        result = run_phase_diagram(spec)
        below = [g for g in result.aggregates if g.alpha < g.alpha_min]
        assert below and all(g.success_rate == 0.0 for g in below)
        assert all(g.alpha_min == pytest.approx(0.4) for g in result.aggregates)
        # and the easy cell is mostly recoverable at this size
        easy = [g for g in result.aggregates if g.alpha == 0.75]
        assert easy[0].success_rate >= 2.0 / 3.0


class TestCsv:
    def test_roundtrip_exact(self, tmp_path):
        result = run_sweep(small_spec())
        path = tmp_path / "grid.csv"
        write_rows_csv(result.rows, path)
        back = read_rows_csv(path)
        assert back == result.rows

    def test_header_schema(self, tmp_path):
        result = run_sweep(small_spec())
        path = tmp_path / "grid.csv"
        write_rows_csv(result.rows, path)
        header = path.read_text().splitlines()[0]
        assert header == "alpha,rho,P,sigma2,N,seed,mse_corr,iterations,converged"

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            read_rows_csv(path)


class TestCli:
    def write_config(self, tmp_path):
        cfg = {
            "N": 64, "M": 48, "P": 2, "rho": 0.2, "sigma2": 0.01,
            "delta": 0.0, "seed": 9,
        }
        path = tmp_path / "gen.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_generate_and_solve(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        inst = tmp_path / "inst.npz"
        assert cli_main(["generate", "--config", str(cfg), "--out", str(inst)]) == 0
        capsys.readouterr()
        assert cli_main(["solve", "--instance", str(inst)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"converged", "iterations", "crit_final", "mse_corr", "s_hat"}

    def test_solve_is_stable_across_runs(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        inst = tmp_path / "inst.npz"
        cli_main(["generate", "--config", str(cfg), "--out", str(inst)])
        capsys.readouterr()
        cli_main(["solve", "--instance", str(inst)])
        first = capsys.readouterr().out
        cli_main(["solve", "--instance", str(inst)])
        second = capsys.readouterr().out
        assert first == second

    def test_solve_trace_csv(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        inst = tmp_path / "inst.npz"
        cli_main(["generate", "--config", str(cfg), "--out", str(inst)])
        trace = tmp_path / "trace.csv"
        assert cli_main(["solve", "--instance", str(inst), "--trace", str(trace)]) == 0
        capsys.readouterr()
        lines = trace.read_text().splitlines()
        assert lines[0] == "iteration,crit"
        assert len(lines) >= 2
        assert float(lines[-1].split(",")[1]) >= 0.0

    def test_generate_seed_override(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        a, b, c = tmp_path / "a.npz", tmp_path / "b.npz", tmp_path / "c.npz"
        cli_main(["generate", "--config", str(cfg), "--out", str(a)])
        cli_main(["generate", "--config", str(cfg), "--out", str(b), "--seed", "77"])
        cli_main(["generate", "--config", str(cfg), "--out", str(c), "--seed", "77"])
        data_a, data_b, data_c = (np.load(p) for p in (a, b, c))
        assert not np.array_equal(data_a["F"], data_b["F"])
        assert np.array_equal(data_b["F"], data_c["F"])

    def sweep_spec_file(self, tmp_path):
        spec = small_spec().to_dict()
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        return path

    def test_sweep_writes_csv(self, tmp_path, capsys):
        spec = self.sweep_spec_file(tmp_path)
        out = tmp_path / "grid.csv"
        assert cli_main(["sweep", "--spec", str(spec), "--out", str(out)]) == 0
        rows = read_rows_csv(out)
        assert len(rows) == 6

    def test_sweep_byte_identical_across_thread_counts(self, tmp_path):
        spec = self.sweep_spec_file(tmp_path)
        out1, out8 = tmp_path / "t1.csv", tmp_path / "t8.csv"
        cli_main(["sweep", "--spec", str(spec), "--out", str(out1), "--threads", "1"])
        cli_main(["sweep", "--spec", str(spec), "--out", str(out8), "--threads", "8"])
        assert out1.read_bytes() == out8.read_bytes()

    def test_annotate_appends_columns(self, tmp_path, capsys):
        spec = self.sweep_spec_file(tmp_path)
        grid = tmp_path / "grid.csv"
        cli_main(["sweep", "--spec", str(spec), "--out", str(grid)])
        out = tmp_path / "annotated.csv"
        code = cli_main(
            ["annotate", "--csv", str(grid), "--out", str(out), "--ref", "alpha_cs=0.27"]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        assert header[-2:] == ["alpha_min", "alpha_cs"]
        first = lines[1].split(",")
        assert float(first[-1]) == pytest.approx(0.27)
        assert float(first[-2]) == pytest.approx(0.4)

    def test_unknown_flag_usage_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli_main(["sweep", "--bogus", "x"])
        assert info.value.code == 2

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        assert cli_main(["solve", "--instance", str(tmp_path / "nope.npz")]) == 3

    def test_invalid_spec_is_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"axes": {"alpha": [0.5], "rho": [2.0], "P": [2],
                                            "sigma2": [0.01], "N": [64]}}))
        out = tmp_path / "x.csv"
        assert cli_main(["sweep", "--spec", str(bad), "--out", str(out)]) == 2

    def test_invalid_json_is_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli_main(["sweep", "--spec", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
