"""Flat ``key = value`` configuration files and distribution strings.

Recognised keys::

    ensemble    = wigner | er
    offdiag     = rademacher | real-gaussian(v) | complex-gaussian
                  | centered-bernoulli(p) | custom-discrete(x:p, ...)
    diag        = same grammar, or zero
    p           = edge probability for er
    samples     = sample count per n
    seed        = master seed (64-bit unsigned)
    n           = comma separated sizes
    deltas      = comma separated positive reals
    z           = comma separated reals
    epsilons    = comma separated reals in (0, 1]
    edge_epsilon, dist_tol, intervals, distances, out, format, threads

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import replace

from .ensembles import EntryDistribution
from .harness import ExperimentConfig

__all__ = ["ConfigError", "parse_distribution", "parse_config_text", "load_config", "apply_overrides"]


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit status 2."""


_CALL = re.compile(r"^\s*([a-z][a-z-]*)\s*(?:\((.*)\))?\s*$")


def parse_distribution(text: str) -> EntryDistribution:
    m = _CALL.match(text)
    if not m:
        raise ConfigError(f"cannot parse distribution {text!r}")
    name, args = m.group(1), m.group(2)
    try:
        if name == "zero" and args is None:
            return EntryDistribution.zero()
        if name == "rademacher" and args is None:
            return EntryDistribution.rademacher()
        if name == "complex-gaussian" and args is None:
            return EntryDistribution.complex_gaussian()
        if name == "real-gaussian":
            return EntryDistribution.real_gaussian(1.0 if not args else float(args))
        if name == "centered-bernoulli" and args:
            return EntryDistribution.centered_bernoulli(float(args))
        if name == "custom-discrete" and args:
            pts, probs = [], []
            for item in args.split(","):
                x, p = item.split(":")
                pts.append(float(x))
                probs.append(float(p))
            return EntryDistribution.custom_discrete(pts, probs)
    except ValueError as exc:
        raise ConfigError(f"bad distribution {text!r}: {exc}") from exc
    raise ConfigError(f"unknown distribution {text!r}")


def _floats(v):
    return tuple(float(x) for x in v.split(",") if x.strip())


def _ints(v):
    return tuple(int(x) for x in v.split(",") if x.strip())


def _bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# config key -> (ExperimentConfig field, parser)
KEYS = {
    "ensemble": ("ensemble", str.strip),
    "offdiag": ("offdiag", parse_distribution),
    "diag": ("diag", parse_distribution),
    "p": ("p", float),
    "samples": ("samples", int),
    "seed": ("master_seed", lambda v: int(v, 0)),
    "n": ("n_list", _ints),
    "deltas": ("deltas", _floats),
    "z": ("z_grid", _floats),
    "epsilons": ("epsilons", _floats),
    "edge_epsilon": ("edge_epsilon", float),
    "dist_tol": ("dist_tol", float),
    "intervals": ("intervals", int),
    "distances": ("distances", _bool),
    "out": ("output", str.strip),
    "format": ("format", str.strip),
    "threads": ("threads", int),
}


def parse_config_text(text: str) -> dict:
    """Raw ``{key: string value}`` pairs from the file contents."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def apply_overrides(base: ExperimentConfig, values: dict) -> ExperimentConfig:
    """Parse string values by key and return an updated, validated config."""
    changes = {}
    for key, raw in values.items():
        if raw is None:
            continue
        name, parse = KEYS[key]
        try:
            changes[name] = parse(raw) if isinstance(raw, str) else raw
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    try:
        return replace(base, **changes)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None = None, overrides: dict | None = None,
                base: ExperimentConfig | None = None) -> ExperimentConfig:
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return apply_overrides(base or ExperimentConfig(), values)
