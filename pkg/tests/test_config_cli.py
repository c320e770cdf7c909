"""Config round-trips, system assembly, and the command line pipeline."""

import json
from pathlib import Path

import pytest
import yaml

from graphscale import cli
from graphscale.config import (ExperimentConfig, SystemSpec, build_system,
                               bundled_names, config_sha256, from_dict,
                               load_config, save_config, to_dict)
from graphscale.errors import ConfigError
from graphscale.graph import pullback_value
from graphscale.maps import pc42_system

REPO = Path(__file__).resolve().parent.parent

BUNDLED = ["baker-r1.74", "baker-r2.2", "baker-r2.5", "pc42", "t3"]


# ---------------------------------------------------------------------------
# config serialization


def test_defaults_round_trip(tmp_path):
    cfg = ExperimentConfig()
    assert from_dict(to_dict(cfg)) == cfg
    p = tmp_path / "cfg.yaml"
    save_config(cfg, p)
    assert load_config(str(p)) == cfg


def test_bundled_names_and_round_trips():
    assert bundled_names() == BUNDLED
    for name in BUNDLED:
        cfg = load_config(name)
        assert from_dict(to_dict(cfg)) == cfg


def test_load_by_name_matches_path():
    src = REPO / "src" / "graphscale" / "configs" / "pc42.yaml"
    assert load_config("pc42") == load_config(str(src))


def test_repo_configs_mirror_bundled():
    # the top-level configs/ directory must stay in sync with the copies
    # shipped inside the package
    for name in BUNDLED:
        top = REPO / "configs" / f"{name}.yaml"
        pkg = REPO / "src" / "graphscale" / "configs" / f"{name}.yaml"
        assert top.read_bytes() == pkg.read_bytes()


def test_from_dict_rejects_unknown_and_bad_fields():
    with pytest.raises(ConfigError, match=r"config\.nope"):
        from_dict({"nope": {}})
    with pytest.raises(ConfigError, match=r"config\.graph\.bogus"):
        from_dict({"graph": {"bogus": 1}})
    with pytest.raises(ConfigError, match=r"config\.graph\.depth"):
        from_dict({"graph": {"depth": "deep"}})
    with pytest.raises(ConfigError, match="mapping"):
        from_dict({"graph": 7})
    with pytest.raises(ConfigError, match="mapping"):
        from_dict([1, 2])


def test_load_config_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError, match="bundled"):
        load_config("no-such-config")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML parse error"):
        load_config(str(bad))


def test_config_sha256_stability():
    a = config_sha256(ExperimentConfig())
    b = config_sha256(ExperimentConfig())
    c = config_sha256(ExperimentConfig(seed=99))
    assert a == b and a != c
    assert len(a) == 64 and set(a) <= set("0123456789abcdef")


# ---------------------------------------------------------------------------
# system assembly


def test_build_system_custom_matches_pc42():
    spec = SystemSpec(kind="custom", breaks=(0.0, 0.5, 1.0), values=(4.0, 0.5))
    custom = build_system(spec)
    ref = pc42_system()
    for th in (0.07, 0.3, 0.81):
        assert pullback_value(custom, th, 25) == pullback_value(ref, th, 25)


def test_build_system_validation():
    with pytest.raises(ConfigError, match="system.kind"):
        build_system(SystemSpec(kind="weird"))
    with pytest.raises(ConfigError, match="custom system needs"):
        build_system(SystemSpec(kind="custom", breaks=(0.0, 1.0), values=(2.0,)))
    with pytest.raises(ConfigError, match="custom system needs"):
        build_system(SystemSpec(kind="custom", breaks=(0.0, 0.5, 1.0),
                                values=(2.0,)))


# ---------------------------------------------------------------------------
# command line

def _write_yaml(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def _tiny_graph_cfg(tmp_path, **over):
    data = {
        "system": {"kind": "pc42"},
        "graph": {"grid_size": 2000, "depth": 30},
        "formats": ["csv"],
        "out_dir": str(tmp_path / "out"),
    }
    data.update(over)
    return _write_yaml(tmp_path / "cfg.yaml", data)


def _manifest(out_dir):
    with open(Path(out_dir) / "manifest.json", encoding="utf-8") as f:
        return json.load(f)


def test_cli_rejects_bad_config(tmp_path, capsys):
    assert cli.main(["graph", "--config", str(tmp_path / "absent.yaml")]) == 2
    assert "invalid input" in capsys.readouterr().err


def test_cli_graph_small_run(tmp_path):
    cfg = _tiny_graph_cfg(tmp_path)
    assert cli.main(["graph", "--config", cfg]) == 0
    out = tmp_path / "out"
    man = _manifest(out)
    assert man["command"] == "graph"
    assert man["exit_code"] == 0
    assert man["files"] == ["graph.csv"]
    assert set(man["versions"]) == {"python", "numpy", "scipy", "graphscale"}
    assert man["config_sha256"] == config_sha256(load_config(cfg))
    g = man["results"]["graph"]
    assert g["grid_size"] == 2000 and g["depth"] == 30
    assert 0.0 <= g["fraction_zero"] <= g["fraction_below_floor"] <= 1.0
    assert man["results"]["hypotheses"]["status"] == "satisfied"
    header = (out / "graph.csv").read_text().splitlines()[0]
    assert header == "theta,phi,depth,converged"


def test_cli_runs_are_deterministic(tmp_path):
    cfg1 = _tiny_graph_cfg(tmp_path, out_dir=str(tmp_path / "o1"))
    assert cli.main(["graph", "--config", cfg1]) == 0
    assert cli.main(["graph", "--config", cfg1, "--out",
                     str(tmp_path / "o2")]) == 0
    b1 = (tmp_path / "o1" / "graph.csv").read_bytes()
    b2 = (tmp_path / "o2" / "graph.csv").read_bytes()
    assert b1 == b2
    m1, m2 = _manifest(tmp_path / "o1"), _manifest(tmp_path / "o2")
    for m in (m1, m2):
        m["config"]["out_dir"] = None
        m.pop("config_sha256")
    assert m1 == m2


def test_cli_seed_override(tmp_path):
    cfg = _tiny_graph_cfg(tmp_path)
    assert cli.main(["graph", "--config", cfg, "--seed", "777"]) == 0
    man = _manifest(tmp_path / "out")
    assert man["seed"] == 777 and man["config"]["seed"] == 777


def test_cli_gating_low_amplitude(tmp_path, capsys):
    # r = 1.2 fails the drift hypothesis: pressure is gated, graph is not
    cfg = _write_yaml(tmp_path / "r12.yaml", {
        "system": {"kind": "baker", "r": 1.2},
        "graph": {"grid_size": 2000, "depth": 30, "zero_floor": 1e-4},
        "formats": [],
        "out_dir": str(tmp_path / "out"),
    })
    assert cli.main(["pressure", "--config", cfg]) == 2
    assert "violated" in capsys.readouterr().err
    man = _manifest(tmp_path / "out")
    assert man["exit_code"] == 2
    assert man["results"]["hypotheses"]["status"] == "violated"
    assert "pressure" not in man["results"]

    assert cli.main(["graph", "--config", cfg]) == 0
    man = _manifest(tmp_path / "out")
    assert man["exit_code"] == 0
    assert "graph" in man["results"]
    lo, hi = man["results"]["hypotheses"]["r_window"]
    # the admissible amplitude window does not depend on r itself
    assert lo == pytest.approx(1.7359215381279693, rel=1e-9)
    assert hi == pytest.approx(3.5441300947237675, rel=1e-9)


def test_cli_high_amplitude_has_no_positive_zero(tmp_path, capsys):
    cfg = _write_yaml(tmp_path / "r36.yaml", {
        "system": {"kind": "baker", "r": 3.6, "a": 15},
        "formats": [],
        "out_dir": str(tmp_path / "out"),
    })
    assert cli.main(["pressure", "--config", cfg]) == 3
    err = capsys.readouterr().err
    assert "attempting anyway" in err
    assert "numerical failure" in err
    assert "pressure stays nonpositive up to s = 64.0" in err
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_cli_high_amplitude_needs_taller_fibre(tmp_path, capsys):
    cfg = _write_yaml(tmp_path / "r36-default.yaml", {
        "system": {"kind": "baker", "r": 3.6},
        "out_dir": str(tmp_path / "out"),
    })
    assert cli.main(["pressure", "--config", cfg]) == 2
    assert "exceeds a" in capsys.readouterr().err


def test_cli_bundled_baker_pressure(tmp_path):
    assert cli.main(["pressure", "--config", "baker-r2.2",
                     "--out", str(tmp_path / "out")]) == 0
    man = _manifest(tmp_path / "out")
    assert man["results"]["pressure"]["s_star"] == pytest.approx(
        0.8402427455098664, abs=1e-9)
    assert man["results"]["pressure"]["mode"] == "ulam"
    assert man["results"]["hypotheses"]["status"] == "satisfied"
    assert "pressure.csv" in man["files"] and "pressure.png" in man["files"]


def test_cli_index_failure_exits_3(tmp_path, capsys):
    cfg = _write_yaml(tmp_path / "starved.yaml", {
        "system": {"kind": "pc42"},
        "index": {"points": [0.0], "k_min": 6, "k_max": 8, "local_grid": 2000},
        "formats": [],
        "out_dir": str(tmp_path / "out"),
    })
    assert cli.main(["index", "--config", cfg]) == 3
    assert "numerical failure" in capsys.readouterr().err
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_cli_unknown_command_exits_via_argparse(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["bogus", "--config", "pc42"])
    with pytest.raises(SystemExit):
        cli.main([])


def test_cli_baker_graph_floor_fractions(tmp_path):
    cfg = _write_yaml(tmp_path / "r22.yaml", {
        "system": {"kind": "baker", "r": 2.2},
        "graph": {"grid_size": 200000, "zero_floor": 1e-4},
        "formats": [],
        "out_dir": str(tmp_path / "out"),
    })
    assert cli.main(["graph", "--config", cfg, "--threads", "4"]) == 0
    g = _manifest(tmp_path / "out")["results"]["graph"]
    assert 0.0 < g["fraction_zero"] <= g["fraction_below_floor"] < 0.01
    assert g["fraction_below_floor"] == pytest.approx(0.00079, abs=2e-4)
