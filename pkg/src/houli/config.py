"""Run configurations: ``key = value`` files plus ``--key value`` overrides.

Unknown keys are errors.  Defaults follow the library defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = [
    "ConfigError",
    "SimulateConfig",
    "RescaleConfig",
    "CertifyConfig",
    "IdentitiesConfig",
    "SweepConfig",
    "CONFIGS",
    "parse_config_text",
    "build_config",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulateConfig:
    a: float = 1.0
    nu: float = 0.0
    M: int = 256
    t_end: float = 1.0
    dt_max: float = 1e-2
    initial: str = "steady"  # "steady" or the path of a profile dump
    sample_every: int = 10
    out: str = "simulate.csv"
    svg: str = ""


@dataclass(frozen=True)
class RescaleConfig:
    a: float = 0.95
    nu: float = 0.0
    alpha: float = 1.0
    C_u0: float = 1.0
    M: int = 256
    dtau: float = 5e-4
    tol_J: float = 1e-10
    tol_dc: float = 1e-12
    max_tau: float = 400.0
    record_every: float = 1.0
    holder_M: int = 4096
    out_dir: str = "."


@dataclass(frozen=True)
class CertifyConfig:
    N: int = 200
    delta: float = 0.84
    sigma: float = math.nan  # nan selects 2/N + margin
    margin: float = math.nan  # nan selects 0.2/N
    out_dir: str = "."
    tamper: bool = False  # test hook: corrupt the coefficient table after hashing


@dataclass(frozen=True)
class IdentitiesConfig:
    tol: float = 1e-10
    seed: int = 0
    M: int = 32
    trials: int = 50
    inject_sign_error: bool = False  # test hook: flip one coefficient family


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "a"
    values: str = "0.99,0.97,0.95,0.9"
    a: float = 0.95
    nu: float = 0.0
    alpha: float = 1.0
    C_u0: float = 1.0
    M: int = 128
    dtau: float = 2e-3
    tol_J: float = 1e-10
    tol_dc: float = 1e-12
    max_tau: float = 400.0
    holder_M: int = 4096
    out_dir: str = "."
    svg: bool = True

    def value_list(self) -> list[float]:
        try:
            return [float(v) for v in self.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"values: {exc}") from None


CONFIGS = {
    "simulate": SimulateConfig,
    "rescale": RescaleConfig,
    "certify": CertifyConfig,
    "identities": IdentitiesConfig,
    "sweep": SweepConfig,
}


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _coerce(name: str, typ, value: str):
    try:
        if typ in ("bool", bool):
            v = value.strip().lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if typ in ("int", int):
            return int(value)
        if typ in ("float", float):
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def build_config(command: str, file_values: dict[str, str] | None = None, overrides: dict[str, str] | None = None):
    """Config object for ``command``; ``overrides`` win over file values."""
    cls = CONFIGS[command]
    types = {f.name: f.type for f in fields(cls)}
    merged = dict(file_values or {})
    merged.update(overrides or {})
    kwargs = {}
    for key, value in merged.items():
        if key not in types:
            raise ConfigError(f"unknown key {key!r} for command {command!r}")
        kwargs[key] = _coerce(key, types[key], value)
    return cls(**kwargs)
