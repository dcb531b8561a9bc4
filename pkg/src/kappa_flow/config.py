"""INI experiment configuration: sections [grid], [params], [scheme], [experiment].

Unknown sections or keys are errors. ``resolved_text`` writes the full
configuration back, defaults included, so every run directory records
exactly what was run.
"""
from __future__ import annotations

import configparser
from dataclasses import fields, replace
from pathlib import Path
from typing import Optional

from .dynamics import SchemeConfig
from .errors import ConfigError
from .grid import Grid
from .harness import ExperimentConfig
from .states import Params
from .thermo import PressureLaw


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.replace(",", " ").split())


def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.replace(",", " ").split())


_SCHEMA = {
    "grid": {"dim": int, "n": int, "length": float},
    "params": {"mu": float, "kappa": float, "a": float, "gamma": float},
    "scheme": {
        "formulation": str, "cfl_advective": float, "cfl_viscous": float,
        "t_end": float, "snapshot_every": float,
    },
    "experiment": {
        "kind": str, "family": str, "amplitude": float, "seed": int, "delta": float,
        "eps_list": _floats, "ref_multiplier": int, "levels": int, "resolutions": _ints,
        "mms_alpha": float, "mms_beta": float, "kappa_list": _floats,
    },
}

_GRID_DEFAULTS = {"dim": 1, "n": 256, "length": 1.0}


def _parse(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"unreadable config: {err}") from None
    out = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        out[section] = {}
        for key, raw in cp.items(section):
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                out[section][key] = conv(raw.strip())
            except ValueError:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from None
    return out


def parse_config(text: str, kind: Optional[str] = None, seed: Optional[int] = None,
                 threads: int = 1) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig`; ``kind``/``seed`` override the file."""
    raw = _parse(text)
    exp = dict(raw.get("experiment", {}))
    file_kind = exp.pop("kind", None)
    if kind is not None and file_kind is not None and kind != file_kind:
        raise ConfigError(f"config is for {file_kind!r} but {kind!r} was requested")
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("experiment kind not given")
    if seed is not None:
        exp["seed"] = seed
    g = {**_GRID_DEFAULTS, **raw.get("grid", {})}
    pr = raw.get("params", {})
    try:
        grid = Grid.uniform(g["dim"], g["n"], g["length"])
        law = PressureLaw(pr.get("a", 1.0), pr.get("gamma", 2.0))
        params = Params(pr.get("mu", 0.1), pr.get("kappa", 0.5), law)
        scheme = SchemeConfig(**raw.get("scheme", {}))
        return ExperimentConfig(kind=kind, grid=grid, params=params, scheme=scheme, threads=threads, **exp)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text, **overrides)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def resolved_text(cfg: ExperimentConfig) -> str:
    """Full configuration as INI (thread count excluded: it never changes results)."""
    g, p, s = cfg.grid, cfg.params, cfg.scheme
    if len(set(g.n)) != 1 or len(set(g.length)) != 1:
        raise ConfigError("only cubic grids can be written back")
    sections = {
        "grid": {"dim": g.dim, "n": g.n[0], "length": g.length[0]},
        "params": {"mu": p.mu, "kappa": p.kappa, "a": p.law.a, "gamma": p.law.gamma},
        "scheme": {f.name: getattr(s, f.name) for f in fields(s)},
        "experiment": {f.name: getattr(cfg, f.name) for f in fields(cfg)
                       if f.name not in ("grid", "params", "scheme", "threads")},
    }
    lines = []
    for name, items in sections.items():
        lines.append(f"[{name}]")
        lines += [f"{k} = {_fmt(v)}" for k, v in items.items()]
        lines.append("")
    return "\n".join(lines)


def with_threads(cfg: ExperimentConfig, threads: int) -> ExperimentConfig:
    return replace(cfg, threads=threads)
