import json
import os

import numpy as np
import pytest

from snmoments import cli, verify


def run(argv):
    return cli.main(argv)


class TestPartitionsCmd:
    def test_lists_sectors(self, tmp_path, capsys):
        code = run(["partitions", "--n", "4", "--d", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0] == "n,partition,dim,multiplicity"
        assert '4,"(3,1)",3,3' in out

    def test_to_file(self, tmp_path):
        path = tmp_path / "parts.csv"
        assert run(["partitions", "--n", "3..4", "--out", str(path)]) == 0
        assert path.read_text().count("\n") >= 5


class TestRepCmd:
    def test_exports_json(self, capsys):
        assert run(["rep", "--shape", "2,1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dim"] == 2
        assert doc["basis"][0] == [[1, 2], [3]]


class TestBoundsCmd:
    def test_knabe(self, capsys):
        assert run(["bounds", "knabe", "--m", "2", "--gap", "0.375"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == pytest.approx(-11 / 48)
        assert doc["valid"] is False

    def test_detectability(self, capsys):
        assert run(["bounds", "detectability", "--delta", "4"]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == 0.5

    def test_convergence_steps(self, capsys):
        code = run(["bounds", "convergence_steps", "--k", "2", "--n", "10",
                    "--d", "2", "--epsilon", "0.01", "--delta", "0.1"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["value"] == 2120

    def test_one_design(self, capsys):
        code = run(["bounds", "one_design_steps", "--n", "5", "--d", "2",
                    "--epsilon", "0.01"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["value"] == 47

    def test_missing_argument_is_usage_error(self, capsys):
        assert run(["bounds", "knabe", "--m", "2"]) == 64

    def test_domain_violation_is_usage_error(self, capsys):
        assert run(["bounds", "knabe", "--m", "1", "--gap", "0.5"]) == 64


class TestConvergenceCmd:
    def test_emits_both_step_counts(self, capsys):
        code = run(["convergence", "--k", "2", "--n", "10", "--d", "2",
                    "--epsilon", "0.01", "--delta", "0.1"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["walk_steps"] == 2120
        assert doc["one_design_steps"] == one_design_expected()


def one_design_expected():
    import math
    return math.ceil(9 * (20 * math.log(2) + math.log(100)))


class TestGapScanCmd:
    def test_csv_and_determinism(self, tmp_path):
        import csv as csvmod
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["gap-scan", "--m", "2..3", "--out", str(p1)]) == 0
        assert run(["gap-scan", "--m", "2..3", "--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()
        lines = p1.read_text().splitlines()
        assert lines[0] == "m_or_n,tuple,dim,gap,second_eig,unit_dim,threshold,bound,valid"
        first = next(csvmod.reader([lines[1]]))
        assert first[0] == "2"
        assert float(first[3]) == pytest.approx(0.375, abs=1e-12)

    def test_resume_skips_completed_rows(self, tmp_path):
        path = tmp_path / "scan.csv"
        assert run(["gap-scan", "--m", "2..2", "--out", str(path)]) == 0
        before = path.read_text()
        assert run(["gap-scan", "--m", "2..3", "--out", str(path), "--resume"]) == 0
        after = path.read_text()
        assert after.startswith(before)
        assert after.count("\n") == before.count("\n") + 1

    def test_json_format(self, capsys):
        assert run(["gap-scan", "--m", "2..2", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["rows"][0]["gap"] == pytest.approx(0.375)

    def test_dim_cap_gives_partial_exit(self, tmp_path):
        path = tmp_path / "capped.csv"
        assert run(["gap-scan", "--m", "3..3", "--dim-cap", "50",
                    "--out", str(path)]) == 2

    def test_missing_range_is_usage(self):
        assert run(["gap-scan"]) == 64

    def test_bad_range_is_usage(self):
        assert run(["gap-scan", "--m", "6..2"]) == 64


class TestAllToAllCmd:
    def test_constant_rows(self, tmp_path):
        path = tmp_path / "ata.csv"
        assert run(["all-to-all", "--n", "4..5", "--out", str(path)]) == 0
        lines = path.read_text().splitlines()
        gaps = [float(l.split('",')[1].split(",")[1]) for l in lines[1:]]
        assert gaps[0] == pytest.approx(0.5, abs=1e-9)
        assert gaps[1] == pytest.approx(0.5, abs=1e-9)


class TestCounterexampleCmd:
    def test_small_self_conjugate_sector(self, capsys):
        code = run(["counterexample", "--d", "3", "--shape", "2,1"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["self_conjugate"] is True
        assert doc["haar_commutant_dim"] == 2
        assert code == (0 if doc["unit_dim_cqa"] == 2 else 1)

    def test_impossible_sector_rejected(self, capsys):
        assert run(["counterexample", "--d", "2", "--shape", "2,2,1"]) == 64


class TestFramePotentialCmd:
    def test_exact_columns(self, tmp_path):
        path = tmp_path / "fp.csv"
        assert run(["frame-potential", "--n", "2..4", "--out", str(path)]) == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "n,exact,paper_formula,mc_estimate,mc_stderr"
        assert lines[1].startswith("2,118,119,")
        assert lines[2].startswith("3,544,544,")
        assert lines[3].startswith("4,1825,1825,")

    def test_with_samples_deterministic(self, tmp_path):
        p1, p2 = tmp_path / "m1.csv", tmp_path / "m2.csv"
        args = ["frame-potential", "--n", "2..2", "--samples", "20000",
                "--seed", "9"]
        assert run(args + ["--out", str(p1)]) == 0
        assert run(args + ["--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()
        val = float(p1.read_text().splitlines()[1].split(",")[3])
        assert abs(val - 118) < 5


class TestConfigPrecedence:
    def test_flag_beats_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("d=3\nseed=5\n")
        code = run(["--config", str(cfg), "partitions", "--n", "3", "--d", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert '"(1,1,1)"' not in out     # d=2 from the flag pruned 3-row shapes

    def test_config_used_when_flag_absent(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("d=3\n")
        code = run(["--config", str(cfg), "partitions", "--n", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert '"(1,1,1)"' in out

    def test_env_sets_workers(self, monkeypatch):
        monkeypatch.setenv(cli.WORKERS_ENV, "3")
        assert cli.resolve_threads(None, {}) == 3
        assert cli.resolve_threads(2, {}) == 2   # flag wins


class TestVerifyMutation:
    def test_sign_flip_breaks_braid_check(self, monkeypatch):
        import numpy as np
        import snmoments.yor as yor_mod
        real = yor_mod.build_irrep

        def sabotaged(shape, n):
            # one mixing coefficient with the wrong sign
            rep = real(shape, n)
            off = rep.adj[-1].off
            if rep.dim >= 2 and np.abs(off).max() > 0:
                off[int(np.argmax(np.abs(off)))] *= -1.0
            return rep

        ok, _ = verify.check_representation_suite(quick=True)
        assert ok
        monkeypatch.setattr(yor_mod, "build_irrep", sabotaged)
        ok, detail = verify.check_representation_suite(quick=True)
        assert not ok
