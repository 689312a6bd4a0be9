from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from tsbandit import cli
from tsbandit.cli import ConfigError, main, parse_config


def write(tmp_path: Path, doc: dict, name: str = "cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def read_csv(path: Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestParseConfig:
    def test_valid(self):
        cfg = parse_config('{"arms":[0.5,0.45],"policy":"ts","T":100000,"runs":1000,"seed":7}')
        assert (cfg.T, cfg.num_runs, cfg.master_seed, cfg.policy) == (100_000, 1000, 7, "ts")
        assert cfg.instance.n_arms == 2

    def test_discrete_arm(self):
        cfg = parse_config('{"arms":[{"support":[0,1],"probs":[0.5,0.5]},0.2],"T":10}')
        assert cfg.instance.means[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("text, field", [
        ('{"arms":[1.5,0.4],"T":10}', "arms[0]"),
        ('{"arms":[0.5,{"support":[0,1],"probs":[0.5,0.6]}],"T":10}', "arms[1]"),
        ('{"arms":[0.5,0.45]}', "T"),
        ('{"T":10}', "arms"),
        ('{"arms":[0.5],"T":10}', "arms"),
        ('{"arms":[0.5,0.4],"T":10,"checkpoints":[5,3]}', "checkpoints"),
        ('{"arms":[0.5,0.4],"T":10,"runs":0}', "runs"),
        ('{"arms":[0.5,0.4],"T":10,"policy":"greedy"}', "policy"),
        ('{"arms":[0.5,0.4],"T":10,"event_tracking":{"source":"x"}}', "event_tracking"),
        ('{"arms":[0.5,0.4],"T":"ten"}', "T"),
        ('{"arms":[0.5,0.4],', "<document>"),
        ('[1, 2]', "<document>"),
    ])
    def test_errors_name_the_field(self, text, field):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.field == field
        assert field in str(info.value)

    def test_overrides_win(self):
        cfg = parse_config('{"arms":[0.5,0.4],"T":10,"seed":1}', {"seed": 9, "T": 20})
        assert (cfg.master_seed, cfg.T) == (9, 20)


class TestFormatting:
    def test_round_trip(self):
        for v in (0.1, 1 / 3, 1e-300, 123456789.123456789, 2.0 ** -1074):
            assert float(cli.fmt(v)) == v
        assert cli.fmt(7) == "7"


class TestSubcommands:
    CFG = {"arms": [0.5, 0.45, 0.3], "policy": "ts", "T": 1500, "runs": 12, "seed": 5,
           "event_tracking": {"source": "thm2"}, "track_p": True}

    def test_simulate_outputs(self, tmp_path):
        out = tmp_path / "out" / "nested"
        assert main(["simulate", "--config", str(write(tmp_path, self.CFG)), "--out", str(out)]) == 0
        rows = read_csv(out / "regret.csv")
        assert list(rows[0]) == ["checkpoint", "mean_regret", "se_regret", "mean_pulls_0", "mean_pulls_1",
                                 "mean_pulls_2"]
        assert rows[-1]["checkpoint"] == "1500"
        assert len(read_csv(out / "events.csv")) == 2
        assert read_csv(out / "p_series.csv")[0]["j"] == "0"

    def test_simulate_deterministic_across_workers(self, tmp_path):
        cfg = write(tmp_path, self.CFG)
        outs = []
        for w in (1, 4, 16):
            out = tmp_path / f"w{w}"
            assert main(["simulate", "--config", str(cfg), "--out", str(out), "--workers", str(w)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        assert outs[0] == outs[1] == outs[2]

    def test_cli_overrides(self, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "--config", str(write(tmp_path, self.CFG)), "--out", str(out), "--horizon", "64",
              "--runs", "2"])
        assert read_csv(out / "regret.csv")[-1]["checkpoint"] == "64"

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = write(tmp_path, {"arms": [1.5, 0.2], "T": 10})
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert "arms[0]" in capsys.readouterr().err
        assert main(["simulate", "--out", str(tmp_path / "o")]) == 2
        assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2

    def test_bounds_csv(self, tmp_path):
        out = tmp_path / "b"
        assert main(["bounds", "--config", str(write(tmp_path, {"arms": [0.5, 0.45], "T": 100000})),
                     "--out", str(out)]) == 0
        rows = read_csv(out / "bounds.csv")
        assert list(rows[0]) == ["bound_name", "T", "arm", "leading_term", "additive_term", "total", "caveats"]
        lr = [r for r in rows if r["bound_name"] == "lai_robbins" and r["arm"] == "all"][0]
        assert float(lr["total"]) == pytest.approx(114.94, abs=0.01)
        assert {r["bound_name"] for r in rows} == {"thm1", "lai_robbins", "ucb1", "thm2"}

    def test_bounds_rejects_tied_optimum(self, tmp_path):
        cfg = write(tmp_path, {"arms": [0.5, 0.5], "T": 100})
        assert main(["bounds", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 2

    def test_compare(self, tmp_path):
        out = tmp_path / "c"
        doc = dict(self.CFG, policies=["ts", "ucb1"])
        assert main(["compare", "--config", str(write(tmp_path, doc)), "--out", str(out)]) == 0
        header = list(read_csv(out / "comparison.csv")[0])
        assert header[:5] == ["checkpoint", "ts_mean_regret", "ts_se_regret", "ucb1_mean_regret", "ucb1_se_regret"]
        assert "lai_robbins" in header

    def test_sweep(self, tmp_path):
        out = tmp_path / "s"
        doc = {"runs": 3, "seed": 1, "sweep": {"N": [2, 4], "T": [200, 400], "families": ["uniform", "worst_case"]}}
        assert main(["sweep", "--config", str(write(tmp_path, doc)), "--out", str(out)]) == 0
        rows = read_csv(out / "sweep.csv")
        assert len(rows) == 8
        assert {(r["N"], r["T"], r["family"]) for r in rows} == {
            (n, t, f) for n in ("2", "4") for t in ("200", "400") for f in ("uniform", "worst_case")}

    def test_sweep_bad_family(self, tmp_path):
        doc = {"sweep": {"N": [2], "T": [100], "families": ["zipf"]}}
        assert main(["sweep", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path / "s")]) == 2


class TestVerifyCommand:
    def test_passes(self, tmp_path):
        out = tmp_path / "v"
        assert main(["verify", "--quick", "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["failures"] == 0
        assert (out / "lemma1.csv").exists() and (out / "partial_sums.csv").exists()

    def test_broken_constant_fails(self, tmp_path):
        out = tmp_path / "v"
        assert main(["verify", "--quick", "--theta-constant", "0.001", "--out", str(out)]) == 1
        assert json.loads((out / "summary.json").read_text())["failures"] > 0

    def test_with_simulation_logs(self, tmp_path):
        out = tmp_path / "v"
        cfg = write(tmp_path, {"arms": [0.6, 0.4], "T": 2000, "runs": 10})
        assert main(["verify", "--quick", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(read_csv(out / "event_tallies.csv")) == 2
