"""Run configuration: flags over ``GINPROD_*`` environment over a config file
over built-in defaults.

The config file is flat ``key = value`` text, one setting per line, ``#``
starts a comment. Keys mirror the long flags (``k-max`` and ``k_max`` are
the same key)::

    n = 40
    m = 2
    rel-tol = 1e-12
    format = json
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import DomainError
from .moments import EnsembleParams
from .quadrature import QuadratureSpec

__all__ = ["RunConfig", "load_config", "parse_config_file", "parse_grid", "ENV_PREFIX"]

ENV_PREFIX = "GINPROD_"
FORMATS = ("csv", "json")


def _optional_int(text):
    return None if text in (None, "", "none") else int(text)


def _optional_str(text):
    return None if text in (None, "", "none") else str(text)


_CONVERTERS = {
    "n": int,
    "m": int,
    "k_max": int,
    "grid": str,
    "trials": _optional_int,
    "seed": _optional_int,
    "rel_tol": float,
    "cache": _optional_str,
    "format": str,
    "out": _optional_str,
    "workers": int,
}


@dataclass(frozen=True)
class RunConfig:
    n: int = 10
    m: int = 1
    k_max: int = 8
    grid: str = "-1.5:1.5:61"
    trials: int | None = None
    seed: int | None = None
    rel_tol: float = 1e-12
    cache: str | None = None
    format: str = "csv"
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.k_max < 0:
            raise DomainError("k-max must be non-negative")
        if self.trials is not None and self.trials < 1:
            raise DomainError("trials must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")

    @property
    def params(self):
        return EnsembleParams(self.n, self.m)

    @property
    def quadrature(self):
        return QuadratureSpec(rel_tol=self.rel_tol)

    @property
    def output_format(self):
        return self.format

    @property
    def cache_path(self):
        return self.cache

    def as_dict(self):
        return dataclasses.asdict(self)


def _key(raw):
    key = raw.strip().lower().replace("-", "_")
    if key not in _CONVERTERS:
        raise DomainError(f"unknown configuration key {raw.strip()!r}")
    return key


def _convert(key, text, source):
    try:
        return _CONVERTERS[key](text)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"bad value {text!r} for {key} in {source}") from exc


def parse_config_file(path):
    """Settings from a flat ``key = value`` file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            raw, _, text = line.partition("=")
            key = _key(raw)
            out[key] = _convert(key, text.strip(), f"{path}:{lineno}")
    return out


def _from_env(environ):
    out = {}
    for key in _CONVERTERS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            out[key] = _convert(key, environ[name], name)
    return out


def load_config(flags=None, config_path=None, environ=None):
    """Merge the four layers into a ``RunConfig``.

    ``flags`` maps keys to values given on the command line; ``None`` means
    not given. The config file comes from ``config_path`` or
    ``GINPROD_CONFIG``.
    """
    environ = os.environ if environ is None else environ
    merged = {}
    path = config_path or environ.get(ENV_PREFIX + "CONFIG")
    if path:
        merged.update(parse_config_file(path))
    merged.update(_from_env(environ))
    merged.update({_key(k): v for k, v in (flags or {}).items() if v is not None})
    return RunConfig(**merged)


def parse_grid(text, m):
    """``start:stop:num`` into a list of points; ``x = 0`` is dropped when ``m >= 2``.

    Returns ``(points, dropped_zero)``.
    """
    try:
        start, stop, num = text.split(":")
        start, stop, num = float(start), float(stop), int(num)
    except ValueError as exc:
        raise DomainError(f"grid must look like start:stop:num, got {text!r}") from exc
    if num < 2 or not stop > start:
        raise DomainError("grid needs num >= 2 and stop > start")
    step = (stop - start) / (num - 1)
    pts = [start + i * step for i in range(num)]
    # snap rounding residue at the origin
    pts = [0.0 if abs(p) < 1e-12 * max(abs(start), abs(stop)) else p for p in pts]
    dropped = False
    if m >= 2 and 0.0 in pts:
        pts = [p for p in pts if p != 0.0]
        dropped = True
    return pts, dropped
