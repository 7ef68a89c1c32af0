"""Protocol constants, configuration validation and derived slot timings.

All durations are microseconds and all sizes are bits. Defaults form the
reference parameter set:

=================  ==========================
MAC header         272 bits
PHY header         128 bits
uW payload         8184 bits
mmW payload        81840 bits
ACK                112 bits + PHY header
propagation delay  1 us
slot time          50 us
SIFS / DIFS        28 us / 128 us
uW / mmW rate      1 Mbps / 1 Gbps
FST setup req/res  240 bits each
=================  ==========================

The 50 us slot is large for 802.11 but is kept as the reference value.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import ConfigError

US_PER_SECOND = 1_000_000

MMW_ESTIMATORS = ("subset_sum", "capped_binomial")


def frame_time(bits: float, rate: float) -> float:
    """Airtime in microseconds of ``bits`` sent at ``rate`` bits per second."""
    if not bits > 0 or not rate > 0:
        raise ConfigError(f"frame_time needs positive bits and rate, got {bits!r}, {rate!r}")
    return bits * US_PER_SECOND / rate


@dataclass(frozen=True)
class ProtocolConfig:
    """Full definition of one operating point of the multi-band MAC."""

    W: int = 32
    m: int = 3
    alpha: float = 0.6
    beta: float = 1.0
    J: int = 20

    h_mac_bits: int = 272
    h_phy_bits: int = 128
    payload_uw_bits: int = 8184
    payload_mmw_bits: int = 81840
    ack_bits: int = 112

    sifs_us: float = 28.0
    difs_us: float = 128.0
    sigma_us: float = 50.0
    delta_us: float = 1.0

    rate_uw_bps: float = 1e6
    rate_mmw_bps: float = 1e9

    fst_setup_req_bits: int = 240
    fst_setup_res_bits: int = 240

    # "subset_sum" sums subset products without complement factors; "capped_binomial" is E[min(N, J_hat)].
    mmw_estimator: str = field(default="subset_sum")

    def __post_init__(self) -> None:
        for name in ("W", "m", "J"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.W < 1:
            raise ConfigError(f"W must be >= 1, got {self.W}")
        if self.m < 0:
            raise ConfigError(f"m must be >= 0, got {self.m}")
        if self.J < 1:
            raise ConfigError(f"J must be >= 1, got {self.J}")
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")
        for name in (
            "h_mac_bits",
            "h_phy_bits",
            "payload_uw_bits",
            "payload_mmw_bits",
            "ack_bits",
            "fst_setup_req_bits",
            "fst_setup_res_bits",
            "rate_uw_bps",
            "rate_mmw_bps",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        for name in ("sifs_us", "difs_us", "sigma_us", "delta_us"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value!r}")
        if self.mmw_estimator not in MMW_ESTIMATORS:
            raise ConfigError(
                f"mmw_estimator must be one of {MMW_ESTIMATORS}, got {self.mmw_estimator!r}"
            )

    def replace(self, **changes: Any) -> "ProtocolConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: "ProtocolConfig | None" = None) -> "ProtocolConfig":
        """Build a config from a mapping; absent keys keep the ``base`` values.

        Unknown keys raise :class:`ConfigError` so that typos do not silently
        fall back to defaults.
        """
        base = base if base is not None else cls()
        known = set(cls.field_names())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration field(s): {', '.join(unknown)}")
        coerced = {name: _coerce(name, value) for name, value in data.items()}
        return dataclasses.replace(base, **coerced)


_FIELD_TYPES = {f.name: f.type for f in fields(ProtocolConfig)}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if kind == "int":
        if isinstance(value, bool):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                raise ConfigError(f"{name} must be an integer, got {value!r}") from None
        return value
    if kind == "float":
        if isinstance(value, bool):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a number, got {value!r}") from None
    return value


def parse_overrides(pairs: Iterable[str]) -> tuple[dict[str, Any], list[str]]:
    """Parse ``key=value`` strings.

    Returns the override mapping and the list of keys given more than once
    (the last occurrence wins).
    """
    out: dict[str, Any] = {}
    duplicates: list[str] = []
    known = set(ProtocolConfig.field_names())
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        if key not in known:
            raise ConfigError(f"unknown configuration field in override: {key!r}")
        if key in out:
            duplicates.append(key)
        out[key] = _coerce(key, raw.strip())
    return out, duplicates


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> ProtocolConfig:
    """Defaults, then the JSON file at ``path``, then ``overrides``."""
    cfg = ProtocolConfig()
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        cfg = ProtocolConfig.from_dict(data, cfg)
    if overrides:
        cfg = ProtocolConfig.from_dict(overrides, cfg)
    return cfg


@dataclass(frozen=True)
class DerivedTimings:
    gamma_us: float
    ack_us: float
    t_s_us: float
    t_c_us: float
    t_fst_us: float
    sigma_us: float
    delta_us: float

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def derive_timings(cfg: ProtocolConfig) -> DerivedTimings:
    """Slot durations for basic access.

    Every frame, including the ACK and both FST setup frames, goes out at the
    uW rate. The FST ACK request/response travel on the mmW band and are not
    charged.
    """
    r = cfg.rate_uw_bps
    gamma = frame_time(cfg.h_phy_bits + cfg.h_mac_bits + cfg.payload_uw_bits, r)
    ack = frame_time(cfg.ack_bits + cfg.h_phy_bits, r)
    t_s = gamma + cfg.sifs_us + ack + cfg.difs_us + 2 * cfg.delta_us
    t_c = gamma + cfg.difs_us + cfg.delta_us
    t_fst = (
        frame_time(cfg.fst_setup_req_bits, r)
        + frame_time(cfg.fst_setup_res_bits, r)
        + 2 * ack
        + 4 * cfg.delta_us
    )
    return DerivedTimings(
        gamma_us=gamma,
        ack_us=ack,
        t_s_us=t_s,
        t_c_us=t_c,
        t_fst_us=t_fst,
        sigma_us=cfg.sigma_us,
        delta_us=cfg.delta_us,
    )
