import json
import subprocess
import sys
from fractions import Fraction

import pytest

from qconf.adversary import solve_threshold
from qconf.cli import main

CONFIG = {
    "protocol": 2,
    "preset": "table2-3p-1b",
    "messages": {"P1": "1", "P2": "1", "P3": "1"},
    "decoys_per_hop": 16,
    "seed": 3,
}


def parse_table(text):
    lines = [l.split("\t") for l in text.strip().splitlines()]
    return lines[0], lines[1:]


@pytest.fixture
def config_file(tmp_path):
    def write(**overrides):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({**CONFIG, **overrides}))
        return str(path)

    return write


class TestRun:
    def test_decodes(self, config_file, capsys):
        assert main(["run", "--config", config_file(), "--seed", "42"]) == 0
        out = capsys.readouterr().out
        decoded = [json.loads(l.split("\t")[2]) for l in out.splitlines() if l.startswith("decoded")]
        assert decoded == [{"P1": "1", "P2": "1", "P3": "1"}] * 3
        assert out.strip().endswith("status\tok")

    def test_deterministic_transcript(self, config_file, tmp_path):
        cfg = config_file()
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert main(["run", "--config", cfg, "--seed", "42", "--out", str(a)]) == 0
        assert main(["run", "--config", cfg, "--seed", "42", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert main(["run", "--config", cfg, "--seed", "43", "--out", str(b)]) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_seed_flag_overrides(self, config_file, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["run", "--config", config_file(seed=42), "--out", str(a)])
        main(["run", "--config", config_file(seed=7), "--seed", "42", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_eavesdropper_aborts(self, config_file, tmp_path, capsys):
        out = tmp_path / "t.jsonl"
        cfg = config_file(decoys_per_hop=50, adversary={"kind": "intercept_resend", "f": 1.0}, seed=0)
        assert main(["run", "--config", cfg, "--out", str(out)]) == 1
        events = [json.loads(l) for l in out.read_text().splitlines()]
        assert events[-1]["event_type"] == "abort"
        assert "abort" in capsys.readouterr().out

    def test_cheater_exit_code(self, config_file, capsys):
        cfg = config_file(commitment=True, dishonest_initiator={})
        assert main(["run", "--config", cfg]) == 1
        assert "cheater\tP3" in capsys.readouterr().out

    @pytest.mark.parametrize("overrides", [{"messages": {"P1": "11"}}, {"colour": 1}, {"preset": "nope"}])
    def test_bad_config(self, config_file, overrides):
        assert main(["run", "--config", config_file(**overrides)]) == 2

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json")]) == 2

    @pytest.mark.parametrize("seed", ["-1", "18446744073709551616", "abc"])
    def test_bad_seed(self, config_file, seed):
        assert main(["run", "--config", config_file(), "--seed", seed]) == 2


class TestValidate:
    def test_presets(self, capsys):
        for name in ("table2-3p-1b", "table2-3p-2b-cluster", "table2-4p-1b-ghz", "table2-4p-1b-cluster"):
            assert main(["validate", name]) == 0
        assert capsys.readouterr().out.count("PASS") == 4

    def test_non_disjoint_file(self, tmp_path, capsys):
        path = tmp_path / "book.json"
        path.write_text(json.dumps({
            "protocol": 1, "parties": [{"ops": ["I", "X"]}, {"ops": ["I", "X"]}],
            "receiver": "N", "travel": [0], "state": "bell",
        }))
        assert main(["validate", str(path)]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_collisions_listed(self, tmp_path, capsys):
        path = tmp_path / "book.json"
        path.write_text(json.dumps({
            "protocol": 1,
            "parties": [{"ops": ["I.I", "X.I"]}, {"ops": ["I.I", "X.X"]}, {"ops": ["I.I", "iY.X"]}],
            "receiver": "N", "travel": [0, 1], "state": "bell",
        }))
        assert main(["validate", str(path)]) == 1
        assert "collision" in capsys.readouterr().out

    def test_unknown_target(self):
        assert main(["validate", "no-such-thing"]) == 2


class TestCurve:
    def test_default(self, capsys):
        assert main(["curve"]) == 0
        header, rows = parse_table(capsys.readouterr().out)
        assert header == ["f", "e", "I_AE", "I_AB"]
        threshold = float(rows[-1][1])
        assert rows[-1][0] == "threshold" and threshold == solve_threshold()
        assert abs(threshold - 0.68) < 0.01
        values = [[float(c) for c in r] for r in rows[:-1]]
        i_ae = [v[2] for v in values]
        i_ab = [v[3] for v in values]
        assert i_ae == sorted(i_ae) and i_ab == sorted(i_ab, reverse=True)

    def test_single_step(self, capsys):
        assert main(["curve", "--fmin", "0.2", "--fmax", "0.8", "--steps", "1"]) == 0
        _, rows = parse_table(capsys.readouterr().out)
        assert [r[0] for r in rows[:-1]] == ["0.2", "0.8"]

    def test_values_round_trip(self, capsys):
        from qconf.adversary import intercept_resend_analytics

        main(["curve", "--steps", "7"])
        _, rows = parse_table(capsys.readouterr().out)
        for r in rows[:-1]:
            a = intercept_resend_analytics(float(r[0]))
            assert [float(x) for x in r[1:]] == [a.analytic_error_rate, a.i_ae, a.i_ab]

    @pytest.mark.parametrize("args", [["--fmin", "0.5", "--fmax", "0.2"], ["--fmax", "1.5"], ["--steps", "0"], ["--fmin", "x"]])
    def test_bad_range(self, args):
        assert main(["curve", *args]) == 2


class TestEfficiency:
    @pytest.mark.parametrize("argv,eta,pct", [
        (["--protocol", "2", "--N", "2", "--k", "2", "--n", "2", "--m", "1"], "2/3", "67%"),
        (["--protocol", "2", "--N", "3", "--k", "1", "--n", "2", "--m", "1"], "3/7", "43%"),
        (["--protocol", "1", "--N", "3", "--k", "1", "--n", "2", "--m", "1"], "1/5", "20%"),
    ])
    def test_values(self, argv, eta, pct, capsys):
        assert main(["efficiency", *argv]) == 0
        header, (row,) = parse_table(capsys.readouterr().out)
        rec = dict(zip(header, row))
        assert rec["eta"] == eta and rec["percent"] == pct
        assert Fraction(rec["eta2"]) > Fraction(rec["eta1"])

    @pytest.mark.parametrize("argv", [
        ["--protocol", "3", "--N", "2", "--k", "1", "--n", "2", "--m", "1"],
        ["--protocol", "2", "--N", "2", "--k", "1", "--n", "1", "--m", "2"],
        ["--protocol", "2", "--N", "0", "--k", "1", "--n", "1", "--m", "1"],
        ["--protocol", "2", "--N", "2"],
    ])
    def test_usage_errors(self, argv):
        assert main(["efficiency", *argv]) == 2


class TestAttack:
    def values(self, out):
        _, rows = parse_table(out)
        return dict(rows)

    def test_intercept(self, capsys):
        assert main(["attack", "--scenario", "intercept-resend", "--trials", "20000", "--seed", "1"]) == 0
        v = self.values(capsys.readouterr().out)
        assert v["within_3sigma"] == "True" and float(v["analytic_error_rate"]) == 0.25

    def test_entangle_with_parameter(self, capsys):
        assert main(["attack", "--scenario", "entangle-measure:0.2", "--trials", "20000"]) == 0
        v = self.values(capsys.readouterr().out)
        assert float(v["analytic_error_rate"]) == 0.1

    def test_escape(self, capsys):
        assert main(["attack", "--scenario", "escape:3", "--trials", "50000"]) == 0
        v = self.values(capsys.readouterr().out)
        assert float(v["analytic_escape"]) == 0.75**3

    def test_dishonest(self, capsys):
        assert main(["attack", "--scenario", "dishonest-announcer", "--trials", "20"]) == 0
        assert self.values(capsys.readouterr().out)["flag_rate"] == "1.0"

    @pytest.mark.parametrize("scenario", ["teleport", "intercept-resend:2", "escape:x", "escape:0", "dishonest-announcer:1"])
    def test_bad_scenario(self, scenario):
        assert main(["attack", "--scenario", scenario, "--trials", "10"]) == 2

    def test_bad_trials(self):
        assert main(["attack", "--scenario", "escape", "--trials", "0"]) == 2


def test_presets(capsys):
    assert main(["presets"]) == 0
    header, rows = parse_table(capsys.readouterr().out)
    assert header[0] == "name" and len(rows) == 4


def test_no_command():
    assert main([]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qconf", "presets"], capture_output=True, text=True)
    assert proc.returncode == 0 and "table2-3p-1b" in proc.stdout


CONFIG_DIR = __import__("pathlib").Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name,code", [
    ("three-party-bell.json", 0),
    ("ghz-protocol1-subcircles.json", 0),
    ("custom-codebook.json", 0),
    ("intercept-resend.json", 1),
])
def test_shipped_configs(name, code, capsys):
    assert main(["run", "--config", str(CONFIG_DIR / name)]) == code
