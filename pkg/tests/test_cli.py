import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from biasaudit.cli import cli
from biasaudit.embeddings import save_table
from biasaudit.lexicon import builtin_lexicon_path, load_lexicon

from synthetic import planted_table


@pytest.fixture(scope="module")
def table_file(tmp_path_factory):
    lex = load_lexicon(builtin_lexicon_path("en"))
    path = tmp_path_factory.mktemp("tables") / "planted.vec"
    save_table(planted_table(lex), path)
    return path


def invoke(args, env=None):
    return CliRunner().invoke(cli, args, env=env, catch_exceptions=False)


class TestWeatRun:
    def test_json_report(self, table_file):
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--lexicon", "en", "--permutations", "200", "--seed", "4"])
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert len(obj["runs"]) == 14
        assert obj["config_echo"]["permutations"]["count"] == 200
        assert obj["config_echo"]["permutations"]["seed"] == 4

    def test_csv_report_to_file(self, table_file, tmp_path):
        out = tmp_path / "report.csv"
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--permutations", "100", "--format", "csv",
                      "--output", str(out)])
        assert res.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 15

    def test_exact_subcommand(self, table_file):
        res = invoke(["weat", "exact", "--table", str(table_file)])
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert all(r["permutation_mode"] == "exact" for r in obj["runs"])

    def test_config_file_defaults_and_flag_precedence(self, table_file, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"permutations": 123, "seed": 7}))
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--config", str(cfg)])
        obj = json.loads(res.output)
        assert obj["config_echo"]["permutations"]["count"] == 123
        assert obj["config_echo"]["permutations"]["seed"] == 7
        # explicit flag beats the config file
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--config", str(cfg), "--seed", "99"])
        obj = json.loads(res.output)
        assert obj["config_echo"]["permutations"]["seed"] == 99
        assert obj["config_echo"]["permutations"]["count"] == 123

    def test_env_seed_is_last_resort(self, table_file, tmp_path):
        env = {"WEAT_AUDIT_SEED": "55"}
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--permutations", "50"], env=env)
        obj = json.loads(res.output)
        assert obj["config_echo"]["permutations"]["seed"] == 55
        # config beats env
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 7}))
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--permutations", "50", "--config", str(cfg)], env=env)
        obj = json.loads(res.output)
        assert obj["config_echo"]["permutations"]["seed"] == 7
        # flag beats both
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--permutations", "50", "--config", str(cfg),
                      "--seed", "1"], env=env)
        obj = json.loads(res.output)
        assert obj["config_echo"]["permutations"]["seed"] == 1

    def test_deterministic_output_bytes(self, table_file):
        args = ["weat", "run", "--table", str(table_file), "--permutations",
                "100", "--seed", "3"]
        assert invoke(args).output == invoke(args).output


class TestExitCodes:
    def run_main(self, *args, env=None):
        cmd = [sys.executable, "-m", "biasaudit.cli", *args]
        return subprocess.run(cmd, capture_output=True, text=True, env=env)

    def test_missing_table_file_is_input_error(self):
        res = self.run_main("weat", "run", "--table", "/nonexistent.vec")
        assert res.returncode == 1

    def test_malformed_table_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.vec"
        bad.write_text("1 2\nking 1.0\n")
        res = self.run_main("weat", "run", "--table", str(bad))
        assert res.returncode == 1
        assert "expected 2" in res.stderr

    def test_invalid_lexicon_is_validation_error(self, tmp_path):
        lex = tmp_path / "lex.json"
        lex.write_text(json.dumps({
            "language": "en", "version": "x",
            "attributes": {"male": ["he"], "female": ["she"]},
            "categories": [{"id": "c", "group": "career_role",
                            "male_stereotyped": ["a", "b"],
                            "female_stereotyped": ["c"]}],
        }))
        table = tmp_path / "t.vec"
        table.write_text("1 2\na 1.0 0.0\n")
        res = self.run_main("weat", "run", "--table", str(table),
                            "--lexicon", str(lex), "--allow-partial")
        assert res.returncode == 2
        assert "unequal target sets" in res.stderr

    def test_usage_error(self):
        res = self.run_main("weat", "run")  # --table required
        assert res.returncode == 2

    def test_success_exit_zero(self, table_file):
        res = self.run_main("weat", "run", "--table", str(table_file),
                            "--permutations", "50")
        assert res.returncode == 0


class TestLexiconCheck:
    def test_builtin_lexicons_pass(self):
        for lang in ("en", "zh"):
            res = invoke(["lexicon", "check", "--lexicon", lang])
            assert res.exit_code == 0
            obj = json.loads(res.output)
            assert obj["valid"] is True
            assert obj["categories"] == 14
            assert obj["version_hash"].startswith("1.0.0-sha256:")

    def test_coverage_against_table(self, table_file):
        res = invoke(["lexicon", "check", "--lexicon", "en",
                      "--table", str(table_file)])
        obj = json.loads(res.output)
        assert obj["coverage"]["oov_rate"] == 0.0
        assert len(obj["coverage"]["runnable_categories"]) == 14


class TestSim:
    def test_train_reports_learned_params(self):
        res = invoke(["sim", "train", "--p-male", "0.8", "--p-female", "0.4",
                      "--n-samples", "30000", "--epochs", "120", "--seed", "2"])
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert obj["gamma"] == pytest.approx(obj["closed_form"]["gamma"], abs=0.08)
        assert obj["b"] == pytest.approx(obj["closed_form"]["b"], abs=0.08)
        assert obj["w_norm"] < 0.1

    def test_sweep_csv(self):
        res = invoke(["sim", "sweep", "--rates", "0.8:0.4", "--rates", "0.4:0.8",
                      "--seeds", "2", "--n-samples", "5000", "--epochs", "60"])
        assert res.exit_code == 0
        lines = res.output.strip().split("\n")
        assert lines[0].startswith("seed,p_pos_given_male,p_pos_given_female,")
        assert len(lines) == 1 + 4
        rows = [line.split(",") for line in lines[1:]]
        assert [r[0] for r in rows] == ["0", "1", "0", "1"]
        pos = [float(r[4]) for r in rows[:2]]
        neg = [float(r[4]) for r in rows[2:]]
        assert all(g > 0 for g in pos)
        assert all(g < 0 for g in neg)

    def test_bad_rates_spec(self):
        runner = CliRunner()
        res = runner.invoke(cli, ["sim", "sweep", "--rates", "oops"],
                            catch_exceptions=True)
        assert res.exit_code != 0


class TestEmployerCompare:
    def test_agreement_reported(self):
        res = invoke(["employer", "compare", "--p-male", "0.8", "--p-female", "0.4",
                      "--threshold", "0.6", "--n-samples", "20000",
                      "--n-candidates", "1000", "--epochs", "120"])
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert obj["agreement"] >= 0.95
        assert obj["employer"]["male"] == pytest.approx(0.8, abs=0.02)
        assert obj["employer"]["female"] == pytest.approx(0.4, abs=0.02)
        assert obj["model"]["male_at_mean_x"] > obj["model"]["female_at_mean_x"]


class TestReportRender:
    def test_rerender_json_is_idempotent(self, table_file, tmp_path):
        report_path = tmp_path / "r.json"
        res = invoke(["weat", "run", "--table", str(table_file),
                      "--permutations", "100", "--output", str(report_path)])
        assert res.exit_code == 0
        res = invoke(["report", "render", "--input", str(report_path),
                      "--format", "json"])
        assert res.output.encode() == report_path.read_bytes()

    def test_rerender_csv_matches_direct(self, table_file, tmp_path):
        json_path = tmp_path / "r.json"
        csv_direct = tmp_path / "direct.csv"
        invoke(["weat", "run", "--table", str(table_file), "--permutations",
                "100", "--output", str(json_path)])
        invoke(["weat", "run", "--table", str(table_file), "--permutations",
                "100", "--format", "csv", "--output", str(csv_direct)])
        res = invoke(["report", "render", "--input", str(json_path),
                      "--format", "csv"])
        assert res.output == csv_direct.read_text()
