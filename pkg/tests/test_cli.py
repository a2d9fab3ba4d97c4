import subprocess
import sys

import pytest

from colearn.cli import main
from colearn.harness import read_results


def run_cli(args):
    return main(list(args))


class TestGenInstance:
    def test_emits_versioned_file(self, tmp_path, capsys):
        out = tmp_path / "psi.txt"
        assert run_cli(["gen-instance", "--generator", "psi", "--k", "4", "--d", "2",
                        "--epsilon", "0.2", "--seed", "4", "--out", str(out)]) == 0
        assert out.read_text().startswith("colearn-instance v1\n")


class TestRun:
    def test_prints_result_row_and_diagnostics(self, tmp_path, capsys):
        inst = tmp_path / "psi.txt"
        run_cli(["gen-instance", "--generator", "psi", "--k", "4", "--d", "2",
                 "--epsilon", "0.2", "--seed", "4", "--out", str(inst)])
        capsys.readouterr()
        out_csv = tmp_path / "row.csv"
        diag_csv = tmp_path / "diag.csv"
        code = run_cli(["run", "--instance", str(inst), "--algo", "mweights",
                        "--epsilon", "0.2", "--delta", "0.1", "--d", "2",
                        "--seed", "3", "--out", str(out_csv),
                        "--diagnostics-out", str(diag_csv)])
        assert code == 0
        printed = capsys.readouterr().out.splitlines()
        assert printed[0].startswith("instance_id,algorithm,epsilon,budget_found")
        rows = read_results(out_csv)
        assert rows[0].algorithm == "mweights"
        assert rows[0].total_samples == rows[0].learning_samples + rows[0].test_samples
        header = diag_csv.read_text().splitlines()[0]
        assert header == "t,W,Q,chi,psi_count"

    def test_exact_mode_has_no_test_draws(self, tmp_path, capsys):
        inst = tmp_path / "psi.txt"
        run_cli(["gen-instance", "--generator", "psi", "--k", "4", "--d", "2",
                 "--epsilon", "0.2", "--seed", "4", "--out", str(inst)])
        out_csv = tmp_path / "row.csv"
        run_cli(["run", "--instance", str(inst), "--algo", "basicmw", "--epsilon", "0.2",
                 "--delta", "0.1", "--d", "2", "--profile", "theory",
                 "--test-mode", "exact", "--out", str(out_csv)])
        assert read_results(out_csv)[0].test_samples == 0.0


class TestBudgetSearchCommand:
    def args(self, inst, out, seed="11"):
        return ["budget-search", "--instance", str(inst), "--algo", "naive",
                "--epsilon", "0.3,0.5", "--runs", "8", "--delta", "0.1",
                "--seed", seed, "--out", str(out)]

    def test_grid_and_determinism(self, tmp_path, capsys):
        inst = tmp_path / "psi.txt"
        run_cli(["gen-instance", "--generator", "psi", "--k", "2", "--d", "2",
                 "--epsilon", "0.2", "--seed", "4", "--out", str(inst)])
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(self.args(inst, out1)) == 0
        assert run_cli(self.args(inst, out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()
        rows = read_results(out1)
        assert [r.epsilon for r in rows] == [0.3, 0.5]

    def test_config_file_supplies_options_and_flags_override(self, tmp_path, capsys):
        inst = tmp_path / "psi.txt"
        run_cli(["gen-instance", "--generator", "psi", "--k", "2", "--d", "2",
                 "--epsilon", "0.2", "--seed", "4", "--out", str(inst)])
        config = tmp_path / "conf.txt"
        config.write_text(
            f"instance = {inst}\nalgo = naive\ndelta = 0.1\nruns = 8\nseed = 11\n"
        )
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["budget-search", "--config", str(config), "--epsilon", "0.3,0.5",
                 "--out", str(out1)])
        run_cli(self.args(inst, out2))
        assert out1.read_bytes() == out2.read_bytes()
        # explicit flag beats the file value
        out3 = tmp_path / "c.csv"
        run_cli(["budget-search", "--config", str(config), "--epsilon", "0.3,0.5",
                 "--seed", "12", "--out", str(out3)])
        assert read_results(out3)[0].seed_base == 12

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "conf.txt"
        config.write_text("does-not-exist = 1\n")
        with pytest.raises(SystemExit):
            run_cli(["budget-search", "--config", str(config), "--epsilon", "0.5"])


class TestPartitionCommand:
    def test_dataset_to_instance_file(self, tmp_path, capsys):
        csv_path = tmp_path / "data.csv"
        from test_harness import write_dataset

        write_dataset(csv_path, n=40, seed=2)
        out = tmp_path / "inst.txt"
        code = run_cli(["partition", "--dataset", str(csv_path), "--label-col", "cls",
                        "--partition", "class-dup", "--k", "4", "--seed", "1",
                        "--out", str(out)])
        assert code == 0
        from colearn.harness import read_instance

        inst = read_instance(out)
        assert inst.k == 4


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "phi.txt"
        proc = subprocess.run(
            [sys.executable, "-m", "colearn.cli", "gen-instance", "--generator", "phi",
             "--d", "3", "--epsilon", "0.05", "--seed", "1", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
