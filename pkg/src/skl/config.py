"""Run configuration: TOML (or JSON) documents with sections, validated strictly."""
from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .experiments import Data, Shared
from .flux import flux_from_spec
from .grid import make_grid
from .noise import noise_from_spec
from .profiles import boundary_profile, initial_profile
from .solver import SolverConfig
from .validation import SUITES

EXPERIMENTS = ("solve", "contraction", "reduction", "sweep", "kinetic", "validate")

_REAL = (int, float)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# section -> key -> (accepted types, default); a default of ... marks a required key
_SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {
        "x_left": (_REAL, 0.0),
        "x_right": (_REAL, 1.0),
        "n_cells": (int, 200),
    },
    "solver": {
        "eps": (_REAL, 0.02),
        "t_end": (_REAL, 0.5),
        "cfl": (_REAL, 0.5),
        "scheme": (str, "godunov"),
        "record_every": (int, 10),
        "xi_N": (_REAL, None),
        "n_bins": (int, 256),
        "formulation": (str, "shifted"),
        "lift_method": (str, "implicit"),
        "speed_N": (_REAL, None),
        "dt": (_REAL, None),
    },
    "flux": {
        "name": (str, "burgers"),
        "c": (_REAL, None),
    },
    "noise": {
        "kind": (str, "linear_multiplicative"),
        "sigma": (_REAL, 0.25),
        "K": (int, 8),
        "shift": (_REAL, 1.0),
        "r_clip": (_REAL, 1e3),
    },
    "data": {
        "u0": ((dict, list), ...),
        "left": ((int, float, dict), 0.0),
        "right": ((int, float, dict), 0.0),
    },
    "contraction": {
        "margin_const": (_REAL, 10.0),
        "antithetic": (bool, False),
    },
    "reduction": {
        "eps_list": (list, []),
    },
    "sweep": {
        "eps_list": (list, [0.2, 0.1, 0.05, 0.025]),
    },
    "kinetic": {
        "layer_widths": (list, None),
        "moment_p": (_REAL, 2.0),
    },
    "validate": {
        "suite": (str, "riemann_shock"),
    },
}

_TOP: dict[str, tuple] = {
    "experiment": (str, ...),
    "master_seed": (int, 0),
    "n_paths": (int, 1),
    "workers": (int, 1),
    "output_dir": (str, "skl_out"),
}

_DATA_SECTIONS = ("data", "data1", "data2")


def _check_type(key: str, value: Any, types) -> Any:
    types = types if isinstance(types, tuple) else (types,)
    # bool is an int subclass; only accept it where bool is asked for
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(f"{key}: expected {'/'.join(t.__name__ for t in types)}, got bool")
    if not isinstance(value, types):
        raise ConfigError(f"{key}: expected {'/'.join(t.__name__ for t in types)}, got {type(value).__name__}")
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _fill(section: str, given: dict, schema: dict) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"{section}: expected a table, got {type(given).__name__}")
    for key in given:
        if key not in schema:
            raise ConfigError(f"unknown key {section + '.' if section else ''}{key}")
    out = {}
    for key, (types, default) in schema.items():
        name = f"{section}.{key}" if section else key
        if key in given:
            val = given[key]
            out[key] = None if val is None else _check_type(name, val, types)
        elif default is ...:
            raise ConfigError(f"missing required key {name}")
        else:
            out[key] = copy.deepcopy(default)
    return out


@dataclass
class RunConfig:
    experiment: str
    grid: dict
    solver: dict
    flux: dict
    noise: dict
    data: Optional[dict]
    data2: Optional[dict]
    options: dict
    output_dir: str = "skl_out"
    master_seed: int = 0
    n_paths: int = 1
    workers: int = 1
    extra: dict = field(default_factory=dict)

    # -- builders ------------------------------------------------------------

    def build_shared(self) -> Shared:
        g = self.grid
        grid = make_grid(g["x_left"], g["x_right"], g["n_cells"])
        s = self.solver
        cfg = SolverConfig(
            eps=s["eps"], t_end=s["t_end"], cfl=s["cfl"], scheme=s["scheme"], K=self.noise["K"],
            seed=self.master_seed, record_every=s["record_every"], xi_N=s["xi_N"], n_bins=s["n_bins"],
            formulation=s["formulation"], lift_method=s["lift_method"], speed_N=s["speed_N"], dt=s["dt"],
        )
        fparams = {"c": self.flux["c"]} if self.flux["c"] is not None else {}
        flux = flux_from_spec(self.flux["name"], **fparams)
        n = self.noise
        kw = {"r_clip": n["r_clip"], "x_left": grid.x_left, "length": grid.length}
        if n["kind"] == "affine_multiplicative":
            kw["shift"] = n["shift"]
        noise = noise_from_spec(n["kind"], n["sigma"], n["K"], **kw)
        return Shared(grid, cfg, flux, noise)

    def build_data(self, shared: Shared, which: str = "data") -> Data:
        spec = self.data if which == "data" else self.data2
        if spec is None:
            raise ConfigError(f"missing required section {which}")
        u0 = initial_profile(shared.grid, spec["u0"])
        b = boundary_profile({"left": spec["left"], "right": spec["right"]}, shared.cfg.t_end)
        return Data(u0, b)

    def resolved(self) -> dict:
        """Every setting that affects results; worker count and paths are excluded."""
        doc = {
            "experiment": self.experiment,
            "master_seed": self.master_seed,
            "n_paths": self.n_paths,
            "grid": self.grid,
            "solver": self.solver,
            "flux": self.flux,
            "noise": self.noise,
        }
        if self.data is not None:
            doc["data1" if self.data2 is not None else "data"] = self.data
        if self.data2 is not None:
            doc["data2"] = self.data2
        if self.options:
            doc[self.experiment] = self.options
        return copy.deepcopy(doc)


def _check_names(cfg: RunConfig) -> None:
    """Resolve every named model and profile so errors surface at parse time."""
    try:
        shared = cfg.build_shared()
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err)) from None
    for which in ("data", "data2"):
        if getattr(cfg, which) is None:
            continue
        label = "data1" if which == "data" and cfg.data2 is not None else which
        try:
            cfg.build_data(shared, which)
        except (ValueError, TypeError, KeyError) as err:
            raise ConfigError(f"{label}: {err}") from None


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a table at top level")
    known = set(_TOP) | {s for s in _SCHEMA if s != "data"} | set(_DATA_SECTIONS)
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown key {key}")
    top = _fill("", {k: v for k, v in doc.items() if k in _TOP}, _TOP)
    exp = top["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown value {exp!r}; choose from {EXPERIMENTS}")
    sections = {s: _fill(s, doc.get(s, {}), _SCHEMA[s]) for s in ("grid", "solver", "flux", "noise")}

    if "data" in doc and "data1" in doc:
        raise ConfigError("data1: give either data or data1, not both")
    first_key = "data1" if "data1" in doc else "data"
    data = _fill(first_key, doc[first_key], _SCHEMA["data"]) if first_key in doc else None
    data2 = _fill("data2", doc["data2"], _SCHEMA["data"]) if "data2" in doc else None
    if exp == "contraction":
        if data is None:
            raise ConfigError("missing required section data1")
        if data2 is None:
            raise ConfigError("missing required section data2 (contraction compares two data sets)")
    elif exp != "validate":
        if data is None:
            raise ConfigError("missing required section data")
        if data2 is not None:
            raise ConfigError(f"data2: only used by the contraction experiment, not {exp}")

    options = {}
    for s in ("contraction", "reduction", "sweep", "kinetic", "validate"):
        if s in doc and s != exp:
            raise ConfigError(f"{s}: section does not apply to experiment {exp}")
    if exp in _SCHEMA:
        options = _fill(exp, doc.get(exp, {}), _SCHEMA[exp])
    if exp == "validate" and options["suite"] not in SUITES:
        raise ConfigError(f"validate.suite: unknown suite {options['suite']!r}; choose from {SUITES}")
    for key in ("eps_list", "layer_widths"):
        vals = options.get(key)
        if vals is not None and not all(isinstance(v, _REAL) and not isinstance(v, bool) for v in vals):
            raise ConfigError(f"{exp}.{key}: expected a list of numbers")
        if vals is not None:
            options[key] = [float(v) for v in vals]

    if top["n_paths"] < 1:
        raise ConfigError("n_paths: must be >= 1")
    if top["workers"] < 1:
        raise ConfigError("workers: must be >= 1")
    cfg = RunConfig(
        experiment=exp, data=data, data2=data2, options=options,
        output_dir=top["output_dir"], master_seed=top["master_seed"], n_paths=top["n_paths"],
        workers=top["workers"], **sections,
    )
    if exp != "validate":
        _check_names(cfg)
    return cfg


def parse_config(text: str, fmt: str | None = None) -> RunConfig:
    """Parse a TOML document, or JSON when ``fmt == "json"`` or the text starts with ``{``."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        doc = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"malformed {fmt} document: {err}") from None
    return config_from_dict(doc)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    return parse_config(text, "json" if path.suffix.lower() == ".json" else None)


def default_document(experiment: str) -> dict:
    """The built-in scenario for ``experiment``, as a config document."""
    from .scenarios import BUMP, STANDARD_B, STANDARD_U0

    doc: dict = {"experiment": experiment}
    data = {"u0": copy.deepcopy(STANDARD_U0), **STANDARD_B}
    if experiment == "contraction":
        doc["data1"] = data
        doc["data2"] = {"u0": [*copy.deepcopy(STANDARD_U0), dict(BUMP)], **STANDARD_B}
        doc["n_paths"] = 200
    elif experiment == "validate":
        pass
    else:
        doc["data"] = data
        doc["n_paths"] = {"solve": 1, "reduction": 50, "sweep": 100, "kinetic": 100}[experiment]
    return doc
