"""Flat key = value simulation configs.

Dotted keys express nesting (pas.sigma_deg, nze.l).  Unknown keys are hard
errors: a silently ignored typo corrupts an experiment.  Angles are given
in degrees, matching the CSV output columns.
"""

import hashlib
import math
from dataclasses import dataclass, fields, replace

__all__ = ["SimConfig", "ConfigError", "parse_config", "load_config", "CODE_KINDS"]

CODE_KINDS = ("single", "ac", "ostbc", "qostbc", "ciod", "nze_tc", "nze_oac")
FOUR_PORT_KINDS = ("ostbc", "qostbc", "ciod")


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class SimConfig:
    code: str = "ac"
    rate: int = 1
    m: int = 64
    gamma: int = 1
    spacing_ratio: float = 1.0 / math.sqrt(3.0)
    theta0_deg: float = 0.0
    sigma_deg: float = 5.0
    snr_db: tuple = ()
    theta0_deg_list: tuple = ()
    k_users: int = 1
    max_trials: int = 1_000_000
    min_bit_errors: int = 200
    master_seed: int = 1
    workers: int = 1
    nze_l: int = 0
    nze_n: int = 0
    precoder_override: str = "zc"

    def n_ports(self):
        if self.code == "single":
            return 1
        if self.code == "ac":
            return 2
        if self.code in FOUR_PORT_KINDS:
            return 4
        return self.nze_n

    def validate(self):
        if self.code not in CODE_KINDS:
            raise ConfigError(f"code: unknown kind {self.code!r}")
        if self.rate < 1:
            raise ConfigError(f"rate: must be a positive integer, got {self.rate}")
        if self.code in ("nze_tc", "nze_oac"):
            if self.nze_l < 1 or self.nze_n < 1:
                raise ConfigError("nze.l, nze.n: required for Toeplitz-family codes")
            if self.code == "nze_tc" and self.nze_l < self.nze_n:
                raise ConfigError("nze.l: must be at least nze.n")
            if self.code == "nze_oac":
                if self.nze_l % 2 != 0:
                    raise ConfigError("nze.l: must be even for the overlapped code")
                floor = self.nze_n - 1 if self.nze_n % 2 == 1 else self.nze_n
                if self.nze_l < floor:
                    raise ConfigError(f"nze.l: must be at least {floor}")
        n = self.n_ports()
        if self.m % (n * n) != 0:
            raise ConfigError(f"m: {self.m} is not a multiple of N^2 = {n * n}")
        if not 1 <= self.gamma < self.m or math.gcd(self.gamma, self.m) != 1:
            raise ConfigError(f"gamma: {self.gamma} is not a valid ZC root for m = {self.m}")
        if self.spacing_ratio <= 0:
            raise ConfigError("spacing_ratio: must be positive")
        if self.sigma_deg <= 0:
            raise ConfigError("pas.sigma_deg: must be positive")
        if self.max_trials < 1:
            raise ConfigError("max_trials: must be at least 1")
        if self.min_bit_errors < 0:
            raise ConfigError("min_bit_errors: must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers: must be at least 1")
        if self.k_users < 1:
            raise ConfigError("k: must be at least 1")
        if self.precoder_override not in ("zc", "prbs"):
            raise ConfigError(
                f"precoder_override: expected zc or prbs, got {self.precoder_override!r}"
            )
        return self

    def digest(self):
        text = ",".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


_KEY_MAP = {
    "code": ("code", str),
    "rate": ("rate", int),
    "m": ("m", int),
    "gamma": ("gamma", int),
    "spacing_ratio": ("spacing_ratio", float),
    "pas.theta0_deg": ("theta0_deg", float),
    "pas.sigma_deg": ("sigma_deg", float),
    "snr_db": ("snr_db", "float_list"),
    "theta0_deg_list": ("theta0_deg_list", "float_list"),
    "k": ("k_users", int),
    "max_trials": ("max_trials", int),
    "min_bit_errors": ("min_bit_errors", int),
    "master_seed": ("master_seed", int),
    "workers": ("workers", int),
    "nze.l": ("nze_l", int),
    "nze.n": ("nze_n", int),
    "precoder_override": ("precoder_override", str),
}


def _convert(key, kind, raw):
    try:
        if kind == "float_list":
            items = [s for s in (p.strip() for p in raw.split(",")) if s]
            if not items:
                raise ValueError("empty list")
            return tuple(float(s) for s in items)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse value {raw!r} ({exc})") from None


def parse_config(text, **overrides):
    """Parse config text; keyword overrides replace parsed fields."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _KEY_MAP:
            raise ConfigError(f"{key}: unknown configuration key")
        if key in values:
            raise ConfigError(f"{key}: duplicate key")
        field_name, kind = _KEY_MAP[key]
        values[field_name] = _convert(key, kind, raw.strip())
    cfg = SimConfig(**values)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg.validate()


def load_config(path, **overrides):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)
