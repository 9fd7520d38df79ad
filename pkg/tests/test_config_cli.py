from __future__ import annotations

import json

import pytest

from skl import __version__
from skl.artifacts import read_csv, write_csv
from skl.cli import run_cli
from skl.config import ConfigError, config_from_dict, default_document, load_config, parse_config

MINIMAL = """
experiment = "solve"

[data]
u0 = {name = "constant", value = 0.0}
"""

SOLVE_K0 = """
experiment = "solve"
master_seed = 7

[grid]
n_cells = 50

[solver]
t_end = 0.1
record_every = 20

[noise]
K = 0
sigma = 0.0

[data]
u0 = [{name = "linear", left = 0.5, right = -0.25}]
left = 0.5
right = -0.25
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.noise["K"] == 8 and cfg.solver["cfl"] == 0.5
    assert cfg.solver["xi_N"] is None  # the kinetic default level 4 max(N0, 1)
    assert cfg.n_paths == 1 and cfg.workers == 1


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="vicosity"):
        parse_config(MINIMAL + "\n[solver]\nvicosity = 0.1\n")
    with pytest.raises(ConfigError, match="colour"):
        parse_config('colour = 1\n' + MINIMAL)


def test_type_mismatch_named():
    with pytest.raises(ConfigError, match="grid.n_cells"):
        parse_config(MINIMAL + '\n[grid]\nn_cells = "many"\n')
    with pytest.raises(ConfigError, match="n_paths"):
        parse_config('n_paths = true\n' + MINIMAL)


def test_missing_required():
    with pytest.raises(ConfigError, match="data"):
        parse_config('experiment = "solve"\n')
    with pytest.raises(ConfigError, match="experiment"):
        parse_config('[data]\nu0 = {name = "constant"}\n')


def test_contraction_needs_data2():
    doc = default_document("contraction")
    del doc["data2"]
    with pytest.raises(ConfigError, match="data2"):
        config_from_dict(doc)


def test_unresolvable_names():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + '\n[flux]\nname = "quartic"\n')
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("constant", "sawtooth"))


def test_json_is_the_same_schema():
    doc = {"experiment": "solve", "data": {"u0": {"name": "constant", "value": 0.0}}}
    a = parse_config(json.dumps(doc))
    b = parse_config(MINIMAL)
    assert a.resolved() == b.resolved()


def test_resolved_excludes_scheduling():
    cfg = parse_config(MINIMAL)
    r1 = cfg.resolved()
    cfg.workers, cfg.output_dir = 4, "/elsewhere"
    assert cfg.resolved() == r1


def test_csv_round_trip(tmp_path):
    conf = {"a": 1, "b": [0.1, 0.2]}
    p = write_csv(tmp_path / "x.csv", conf, ["t", "v"], [(0.0, 1 / 3), (1.0, True)])
    lines = p.read_text().splitlines()
    assert lines[0] == f"# skl {__version__}"
    got_conf, cols, data = read_csv(p)
    assert got_conf == conf and cols == ["t", "v"]
    assert data[0, 1] == 1 / 3 and data[1, 1] == 1.0


# -- CLI ------------------------------------------------------------------------------------

def test_validate_riemann_shock(tmp_path, capsys):
    assert run_cli(["validate", "riemann_shock", "--out", str(tmp_path)]) == 0
    summary = tmp_path / "validate_riemann_shock_summary.json"
    assert capsys.readouterr().out.strip() == str(summary)
    doc = json.loads(summary.read_text())
    assert doc["passed"] and doc["version"] == __version__ and doc["config"]["validate"]["suite"] == "riemann_shock"


def test_solve_twice_identical(tmp_path):
    cfg = tmp_path / "solve.toml"
    cfg.write_text(SOLVE_K0)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert run_cli(["solve", "--config", str(cfg), "--out", str(o)]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == ["solve_energy.csv", "solve_fields.csv", "solve_summary.json"]
    for n in names:
        assert (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
    conf, _, _ = read_csv(outs[0] / "solve_fields.csv")
    assert conf["master_seed"] == 7 and conf["noise"]["K"] == 0
    assert load_config(cfg).resolved() == conf


def test_seed_override_changes_header(tmp_path):
    cfg = tmp_path / "solve.toml"
    cfg.write_text(SOLVE_K0)
    assert run_cli(["solve", "--config", str(cfg), "--seed", "11", "--out", str(tmp_path)]) == 0
    conf, _, _ = read_csv(tmp_path / "solve_fields.csv")
    assert conf["master_seed"] == 11


def test_bad_config_path(tmp_path, capsys):
    assert run_cli(["solve", "--config", str(tmp_path / "missing.toml"), "--out", str(tmp_path)]) == 2
    assert "missing.toml" in capsys.readouterr().err


def test_bad_subcommand_and_mismatch(tmp_path):
    assert run_cli(["simulate"]) == 2
    cfg = tmp_path / "solve.toml"
    cfg.write_text(SOLVE_K0)
    assert run_cli(["kinetic", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_env_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("SKL_WORKERS", "zero")
    assert run_cli(["validate", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("SKL_WORKERS", "2")
    assert run_cli(["validate", "--out", str(tmp_path)]) == 0


def test_failed_predicate_exit_code(tmp_path, monkeypatch):
    import skl.cli as cli

    monkeypatch.setitem(cli._RUNNERS, "validate", lambda cfg, out, conf: ({"forced": False}, {}, []))
    assert run_cli(["validate", "--out", str(tmp_path)]) == 1


REDUCTION = """
experiment = "reduction"
master_seed = 5
n_paths = 6

[grid]
n_cells = 40

[solver]
t_end = 0.1
eps = 0.05
n_bins = 64

[data]
u0 = [{name = "linear", left = 0.5, right = -0.25}, {name = "sine", amp = 0.3, mode = 2}]
left = 0.5
right = -0.25
"""


def test_artifacts_independent_of_workers(tmp_path):
    cfg = tmp_path / "red.toml"
    cfg.write_text(REDUCTION)
    a, b = tmp_path / "w1", tmp_path / "w3"
    assert run_cli(["reduction", "--config", str(cfg), "--workers", "1", "--out", str(a)]) == 0
    assert run_cli(["reduction", "--config", str(cfg), "--workers", "3", "--out", str(b)]) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()
