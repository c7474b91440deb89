import json
import math

import numpy as np
import pytest

from swarmstack import cli
from swarmstack.swarm import RatedPoint


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        f = tmp_path / "empty.cfg"
        f.write_text("# just a comment\n\n")
        c = cli.parse_config(str(f))
        assert c.temperatures == (1.0, 0.75, 0.5, 0.25, 0.0)
        assert c.trials == 10
        assert c.evals_per_trial == 10_000
        assert c.stack_capacity == 120
        assert c.tol == 1e-4

    def test_values_and_overrides(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("dim = 3\nseed = 42\nfunction = rastrigin\n"
                     "temperatures = 1, 0.5, 0\nbounds = -1:1, 0:2, 3:9\n")
        c = cli.parse_config(str(f), {"seed": "99", "trials": "4"})
        assert c.dim == 3
        assert c.seed == 99  # flag beats file
        assert c.trials == 4
        assert c.temperatures == (1.0, 0.5, 0.0)
        assert c.bounds == [(-1.0, 1.0), (0.0, 2.0), (3.0, 9.0)]

    def test_unknown_key_named_with_line(self, tmp_path):
        f = tmp_path / "bad.cfg"
        f.write_text("dim = 2\nfoo = 1\n")
        with pytest.raises(ValueError, match=r"bad.cfg:2.*'foo'"):
            cli.parse_config(str(f))

    def test_type_error_named_with_line(self, tmp_path):
        f = tmp_path / "bad.cfg"
        f.write_text("evals_per_trial = soon\n")
        with pytest.raises(ValueError, match=r"bad.cfg:1.*evals_per_trial"):
            cli.parse_config(str(f))

    def test_missing_file(self):
        with pytest.raises(ValueError, match="not found"):
            cli.parse_config("/nonexistent/path.cfg")

    def test_dotted_keys(self, tmp_path):
        f = tmp_path / "k.cfg"
        f.write_text("fatTail3.c1 = 12\nr_eq.slope = 0.08\n"
                     "recombine.ratio_low_t = 4\n")
        c = cli.parse_config(str(f))
        assert c.fat_tail3_c1 == 12.0
        assert c.r_eq_slope == 0.08
        assert c.recombine_ratio_low_t == 4.0


TINY = {"dim": "2", "function": "sphere", "bounds_style": "offset",
        "trials": "2", "evals_per_trial": "150", "stack_capacity": "10",
        "seed": "5"}


class TestRunCommand:
    def test_sphere_tiny_budget_writes_outputs(self, tmp_path, capsys):
        cfg = cli.parse_config(None, dict(TINY, out_dir=str(tmp_path / "o")))
        assert cli.run_command(cfg) == 0
        stack_file = tmp_path / "o" / "stack.csv"
        assert stack_file.is_file()
        assert len(stack_file.read_text().splitlines()) >= 2
        diag_file = tmp_path / "o" / "diagnostics.jsonl"
        records = [json.loads(line)
                   for line in diag_file.read_text().splitlines()]
        # one record per stage per trial per temperature
        assert len(records) == 5 * 2 * 4
        assert sum(r["evals"] for r in records) >= 5 * 2 * 150
        # diagnostics reconcile with the printed summary total
        out = capsys.readouterr().out
        summary_total = int(out.split("total evaluations:")[1].split()[0])
        assert sum(r["evals"] for r in records) == summary_total

    def test_same_seed_byte_identical_outputs(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = cli.parse_config(None, dict(TINY, out_dir=str(out_a)))
        cfg_b = cli.parse_config(None, dict(TINY, out_dir=str(out_b)))
        assert cli.run_command(cfg_a) == 0
        assert cli.run_command(cfg_b) == 0
        assert (out_a / "stack.csv").read_bytes() == \
               (out_b / "stack.csv").read_bytes()

    def test_invalid_function_nonzero_exit(self, tmp_path, capsys):
        cfg = cli.parse_config(None, dict(TINY, function="not_a_function",
                                          out_dir=str(tmp_path)))
        assert cli.run_command(cfg) != 0
        assert "not_a_function" in capsys.readouterr().err

    def test_stack_csv_round_trip(self, tmp_path):
        out = tmp_path / "o"
        cfg = cli.parse_config(None, dict(TINY, out_dir=str(out)))
        run_config, handle = cli.build_run(cfg)
        from swarmstack.scheduler import run_optimization
        stack, diag = run_optimization(run_config, handle)
        cli.write_stack_csv(stack, handle.bounds, out.mkdir(parents=True)
                            or out / "stack.csv")
        back, _ = cli.read_stack_csv(out / "stack.csv", stack.capacity,
                                     stack.r_eq)
        assert [e.value for e in back.entries] == \
               [e.value for e in stack.entries]
        for a, b in zip(back.entries, stack.entries):
            assert np.array_equal(a.position, b.position)

    def test_main_with_config_file_and_flags(self, tmp_path, capsys):
        f = tmp_path / "run.cfg"
        f.write_text("dim = 2\nfunction = sphere\ntrials = 2\n"
                     "evals_per_trial = 150\nstack_capacity = 8\n")
        rc = cli.main(["--config", str(f), "--seed", "3",
                       "--out_dir", str(tmp_path / "out")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "best value" in out
        assert (tmp_path / "out" / "stack.csv").is_file()

    def test_main_unknown_key_fails(self, tmp_path, capsys):
        f = tmp_path / "run.cfg"
        f.write_text("nonsense = 4\n")
        assert cli.main(["--config", str(f)]) == 2
        assert "nonsense" in capsys.readouterr().err


def rated(coords, value, idx=0):
    return RatedPoint(np.asarray(coords, dtype=float), value, idx)


class TestProjections:
    def test_coordinate_plane_identity(self, tmp_path):
        history = [rated([0.1, 0.2, 0.9], 1.0, 3),
                   rated([0.5, 0.6, 0.0], 2.0, 7)]
        planes = cli.parse_planes("0-1", 3)
        (path,) = cli.export_projections(history, planes, tmp_path)
        rows = path.read_text().splitlines()[1:]
        assert len(rows) == 2
        u0, v0, val0, idx0 = rows[0].split("\t")
        assert float(u0) == 0.1 and float(v0) == 0.2
        assert float(val0) == 1.0 and int(idx0) == 3

    def test_center_projects_to_plane_center(self, tmp_path):
        dim = 5
        center = rated([0.5] * dim, 0.0)
        u = np.zeros(dim)
        u[0] = 1.0
        v = np.full(dim, 0.0)
        v[1:3] = 1.0 / math.sqrt(2)
        planes = [("oblique", u, v)]
        (path,) = cli.export_projections([center], planes, tmp_path)
        _, row = path.read_text().splitlines()
        pu, pv, _, _ = row.split("\t")
        assert float(pu) == pytest.approx(0.5)
        assert float(pv) == pytest.approx(0.5)

    def test_oblique_rescaled_into_unit_square(self, tmp_path):
        dim = 2
        r = 1.0 / math.sqrt(2)
        planes = [("diag", np.array([r, r]), np.array([r, -r]))]
        history = [rated([0.0, 0.0], 0.0), rated([1.0, 1.0], 1.0),
                   rated([1.0, 0.0], 2.0), rated([0.3, 0.8], 3.0)]
        (path,) = cli.export_projections(history, planes, tmp_path)
        for row in path.read_text().splitlines()[1:]:
            pu, pv = (float(x) for x in row.split("\t")[:2])
            assert -1e-12 <= pu <= 1 + 1e-12
            assert -1e-12 <= pv <= 1 + 1e-12

    def test_non_orthonormal_plane_rejected(self, tmp_path):
        history = [rated([0.5, 0.5], 0.0)]
        bad = [("bad", np.array([1.0, 0.0]), np.array([0.7, 0.7]))]
        with pytest.raises(ValueError, match="unit length"):
            cli.export_projections(history, bad, tmp_path)
        bad2 = [("bad2", np.array([1.0, 0.0]),
                 np.array([math.sqrt(0.5), math.sqrt(0.5)]))]
        with pytest.raises(ValueError, match="orthogonal"):
            cli.export_projections(history, bad2, tmp_path)

    def test_empty_history_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            cli.export_projections([], cli.parse_planes("0-1", 2), tmp_path)

    def test_emit_projections_through_run(self, tmp_path):
        cfg = cli.parse_config(None, dict(
            TINY, out_dir=str(tmp_path / "o"), emit_projections="true",
            projection_planes="0-1"))
        assert cli.run_command(cfg) == 0
        proj = tmp_path / "o" / "projections" / "e0-e1.tsv"
        assert proj.is_file()
        assert len(proj.read_text().splitlines()) > 1

    def test_bad_plane_specs(self):
        with pytest.raises(ValueError):
            cli.parse_planes("0-0", 3)
        with pytest.raises(ValueError):
            cli.parse_planes("0-9", 3)
        with pytest.raises(ValueError):
            cli.parse_planes("1 0/0 1", 3)  # wrong dimension


class TestExternalThroughCli:
    def test_external_worker_run(self, tmp_path):
        import sys as _sys
        worker = tmp_path / "w.py"
        worker.write_text(
            "import sys\n"
            "for line in sys.stdin:\n"
            "    xs = [float(v) for v in line.split()]\n"
            "    print(sum((x - 0.2) ** 2 for x in xs), flush=True)\n")
        cfg = cli.parse_config(None, {
            "external_cmd": f"{_sys.executable} {worker}",
            "dim": "2", "bounds": "-1:1", "trials": "2",
            "evals_per_trial": "120", "stack_capacity": "8",
            "seed": "1", "out_dir": str(tmp_path / "o")})
        assert cli.run_command(cfg) == 0
        lines = (tmp_path / "o" / "stack.csv").read_text().splitlines()
        best = lines[1].split(",")
        # optimum at user (0.2, 0.2)
        assert float(best[1]) < 1e-4
        assert abs(float(best[4]) - 0.2) < 0.05

    def test_external_requires_bounds(self):
        cfg = cli.parse_config(None, {"external_cmd": "cat", "dim": "2"})
        with pytest.raises(ValueError, match="bounds"):
            cli.build_run(cfg)
