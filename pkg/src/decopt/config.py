"""Flat ``key = value`` experiment configuration with dotted sections.

Example::

    # logistic regression on a random network
    network.topology = er
    network.m = 20
    network.p = 0.5
    network.seed = 0
    problem.family = logistic
    problem.data = synthetic
    problem.n_per_agent = 50
    problem.d = 20
    problem.sigma.mode = uniform
    problem.sigma.value = 1e-3
    methods = mudag, agd, dgd, extra, nids
    T = 400
    method.mudag.K = auto
    method.extra.step_size = tuned

Blank lines and ``#`` comments are ignored. See ``SCHEMA`` for every key,
its type and default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

METHOD_NAMES = ("mudag", "agd", "dgd", "extra", "nids")


def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _str(s):
    return s


def _methods(s):
    names = tuple(n.strip() for n in s.split(",") if n.strip())
    unknown = [n for n in names if n not in METHOD_NAMES]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; expected a subset of {METHOD_NAMES}")
    if len(set(names)) != len(names):
        raise ValueError("methods listed twice")
    return names


def _K(s):
    if s in ("theoretical", "auto"):
        return s
    k = int(s)
    if k < 0:
        raise ValueError("K must be non-negative")
    return k


def _step(s):
    return s if s == "tuned" else float(s)


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {options}")
        return s

    return parse


# key -> (parser, default)
SCHEMA = {
    "network.topology": (_str, "er"),
    "network.m": (_int, 20),
    "network.p": (_float, 0.5),
    "network.seed": (_int, 0),
    "problem.family": (_choice("logistic", "quadratic"), "logistic"),
    "problem.data": (_str, "synthetic"),
    "problem.d": (_int, 20),
    "problem.n_per_agent": (_int, 50),
    "problem.seed": (_int, 0),
    "problem.label_noise": (_float, 0.1),
    "problem.kappa": (_float, 100.0),
    "problem.heterogeneity": (_float, 0.5),
    "problem.sigma.mode": (_choice("uniform", "nonconvex"), "uniform"),
    "problem.sigma.value": (_float, 1e-3),
    "problem.sigma.a": (_float, -1e-2),
    "problem.sigma.b": (_float, 1.0),
    "methods": (_methods, METHOD_NAMES),
    "T": (_int, 300),
    "eps": (_float, 1e-8),
    "output": (_str, "out"),
    "reference.tol": (_float, 1e-10),
    "reference.max_iter": (_int, 200_000),
    "method.mudag.K": (_K, "auto"),
    "method.mudag.K_max": (_int, 8),
    "method.mudag.form": (_choice("direct", "tracking"), "direct"),
    "method.mudag.eta": (_float, None),
    "method.mudag.alpha": (_float, None),
    "method.agd.step_size": (_float, None),
    "method.agd.momentum": (_float, None),
    "method.dgd.step_size": (_step, "tuned"),
    "method.dgd.K_mix": (_int, 1),
    "method.extra.step_size": (_step, "tuned"),
    "method.nids.step_size": (_step, "tuned"),
    "tuning.k_max": (_int, 12),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings keyed by their dotted names."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        if key not in SCHEMA:
            raise KeyError(key)
        return self.values.get(key, SCHEMA[key][1])

    def with_values(self, **updates) -> "ExperimentConfig":
        """Copy with keys overridden; dots in keys are written as ``__``."""
        merged = dict(self.values)
        for k, v in updates.items():
            key = k.replace("__", ".")
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            merged[key] = v
        cfg = ExperimentConfig(merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self["network.m"] < 2:
            raise ConfigError("network.m must be at least 2")
        if self["T"] < 0:
            raise ConfigError("T must be non-negative")
        if not 0.0 < self["eps"] < 1.0:
            raise ConfigError("eps must lie in (0, 1)")
        if self["problem.family"] == "logistic":
            m = self["network.m"]
            if self["problem.sigma.mode"] == "uniform":
                mean = self["problem.sigma.value"]
            else:
                mean = ((m - 1) * self["problem.sigma.a"] + self["problem.sigma.b"]) / m
            if not mean > 0.0:
                raise ConfigError(f"sigma schedule averages to {mean:g}; the global objective would not be strongly convex")

    def to_text(self) -> str:
        lines = []
        for key in SCHEMA:
            if key in self.values:
                lines.append(f"{key} = {format_value(self.values[key])}")
        return "\n".join(lines) + "\n"


def format_value(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    cfg = ExperimentConfig(values)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
