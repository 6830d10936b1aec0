import json
import math

import pytest

from persuasion_net.cli import main
from persuasion_net.config import ConfigError, load_config, parse_config
from persuasion_net.serialize import dumps_json, format_float


def island_doc(lam=math.sqrt(2.0), **engine):
    doc = {
        "model": {
            "gamma_h": 0.5, "mu_h1": 0.6, "mu_l1": 0.4, "mu_s1": 0.5, "q": 1.0,
            "f_h": [{"lambda": lam, "prob": 1.0}],
            "f_l": [{"lambda": lam, "prob": 1.0}],
            "payoff": {"kind": "linear"},
        },
    }
    if engine:
        doc["engine"] = engine
    return doc


def write_cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestConfig:
    def test_round_trip(self, tmp_path):
        doc = island_doc(n=500, base_seed=7)
        doc["strategy"] = {"signals": [
            {"label": "good", "pi1": 1.0, "pi0": 0.4 / 0.6, "seeding": "on_l1"}]}
        cfg = load_config(write_cfg(tmp_path, doc))
        back = parse_config(cfg.to_dict())
        assert back == cfg

    def test_unknown_key_rejected(self, tmp_path):
        doc = island_doc()
        doc["model"]["typo_key"] = 1
        with pytest.raises(ConfigError, match="typo_key|additional"):
            load_config(write_cfg(tmp_path, doc))

    def test_malformed_json_line_anchored(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\n  \"model\": [,]\n}")
        with pytest.raises(ConfigError, match=r":2:"):
            load_config(str(path))

    def test_prior_schema_bounds(self, tmp_path):
        doc = island_doc()
        doc["model"]["mu_h1"] = 0.4
        with pytest.raises(ConfigError, match="mu_h1"):
            load_config(write_cfg(tmp_path, doc))


class TestSerialize:
    def test_seventeen_digit_floats(self):
        x = 1.0 / 3.0
        assert format_float(x) == f"{x:.17g}"
        assert float(format_float(x)) == x

    def test_sorted_keys(self):
        assert dumps_json({"b": 1, "a": 2}).index('"a"') < dumps_json(
            {"b": 1, "a": 2}).index('"b"')


class TestCli:
    def test_limits_subcommand(self, tmp_path):
        cfg = write_cfg(tmp_path, island_doc())
        out = tmp_path / "out"
        assert main(["limits", "--config", cfg, "--out-dir", str(out)]) == 0
        doc = json.loads((out / "limits.json").read_text())
        assert doc["c"] == pytest.approx(0.7968121300200202, abs=1e-9)
        lines = (out / "limits.csv").read_text().splitlines()
        assert lines[0] == "type,d,p_d,forward_p_d,zeta,zeta_hat"
        first = lines[1].split(",")
        assert first[0] == "h" and first[1] == "0" and float(first[4]) == 0.0
        # the resolved config a run writes must re-parse to an equal config
        resolved = json.loads((out / "config.resolved.json").read_text())
        assert parse_config(resolved) == load_config(cfg)

    def test_sample_subcommand(self, tmp_path):
        cfg = write_cfg(tmp_path, island_doc(n=2000, base_seed=3))
        out = tmp_path / "out"
        assert main(["sample", "--config", cfg, "--out-dir", str(out), "--dump"]) == 0
        doc = json.loads((out / "sample.json").read_text())
        assert doc["n"] == 2000
        from persuasion_net.netgen import load_network

        net = load_network(out / "network.edges", out / "network.nodes")
        assert net.n == 2000
        assert net.edge_count == doc["edges"]

    def test_simulate_requires_strategy(self, tmp_path):
        cfg = write_cfg(tmp_path, island_doc(n=500))
        assert main(["simulate", "--config", cfg,
                     "--out-dir", str(tmp_path / "o")]) == 1

    def test_simulate_outputs(self, tmp_path):
        doc = island_doc(n=800, reps=3, pilot_reps=2, base_seed=5)
        doc["strategy"] = {"signals": [
            {"label": "good", "pi1": 1.0, "pi0": 0.4 / 0.6, "seeding": "on_l1"}]}
        cfg = write_cfg(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out-dir", str(out)]) == 0
        sim = (out / "sim.csv").read_text().splitlines()
        assert sim[0].startswith("rep,state,signal,n_observed,fraction_action1")
        assert len(sim) == 4
        assert (out / "obsfrac.csv").exists()

    def test_optimize_and_compare(self, tmp_path):
        cfg = write_cfg(tmp_path, island_doc(grid_n=41, refine_iters=1))
        out = tmp_path / "out"
        assert main(["optimize", "--config", cfg, "--out-dir", str(out),
                     "--network"]) == 0
        doc = json.loads((out / "optimum.json").read_text())
        assert "network" in doc and "public" not in doc
        assert main(["compare", "--config", cfg, "--out-dir", str(out)]) == 0
        comp = json.loads((out / "compare.json").read_text())
        assert comp["gap"] <= 1e-6

    def test_scenario_exit_codes(self, tmp_path):
        doc = island_doc(grid_n=41, refine_iters=1)
        doc["model"]["payoff"] = {"kind": "step", "x_bar": 0.52}
        doc["model"]["f_h"] = [{"lambda": math.sqrt(3.0), "prob": 1.0}]
        doc["model"]["f_l"] = [{"lambda": math.sqrt(3.0), "prob": 1.0}]
        cfg = write_cfg(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["scenario", "--config", cfg, "--out-dir", str(out),
                     "voting"]) == 0
        rep = json.loads((out / "scenario_voting.json").read_text())
        assert rep["verdict"] is True
        assert rep["v_net"] == 1.0
        assert (out / "report.csv").read_text().count("\n") == 2

        # hypothesis violation: trivial threshold -> exit 2
        doc["model"]["payoff"] = {"kind": "step", "x_bar": 0.3}
        cfg2 = write_cfg(tmp_path, doc, "cfg2.json")
        assert main(["scenario", "--config", cfg2, "--out-dir", str(out),
                     "voting"]) == 2

    def test_bad_config_exit_one(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope}")
        assert main(["limits", "--config", str(path),
                     "--out-dir", str(tmp_path)]) == 1

    def test_byte_identical_across_runs_and_threads(self, tmp_path):
        doc = island_doc(n=600, reps=4, pilot_reps=2, base_seed=11,
                         grid_n=41, refine_iters=1)
        doc["strategy"] = {"signals": [
            {"label": "good", "pi1": 1.0, "pi0": 0.4 / 0.6, "seeding": "on_l1"}]}
        cfg = write_cfg(tmp_path, doc)
        outputs = {}
        for tag, threads in (("a", 1), ("b", 4), ("c", 1)):
            out = tmp_path / tag
            assert main(["--threads", str(threads), "simulate",
                         "--config", cfg, "--out-dir", str(out)]) == 0
            assert main(["--threads", str(threads), "limits",
                         "--config", cfg, "--out-dir", str(out)]) == 0
            outputs[tag] = {
                name: (out / name).read_bytes()
                for name in ("sim.csv", "obsfrac.csv", "limits.csv", "limits.json")
            }
        assert outputs["a"] == outputs["b"] == outputs["c"]
