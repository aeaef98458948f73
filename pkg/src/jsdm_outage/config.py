"""Network configuration, unit conversions and YAML loading.

Defaults reproduce the two-tier 28 GHz setup: 128-antenna macro BSs serving
two user groups, single-antenna pico BSs, alpha = 4 in both segments.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

SPEED_OF_LIGHT = 2.998e8

INTERFERENCE_MODES = ("analysis_match", "physical")
LAPLACE_FORMS = ("campbell", "as_written")
BEAM_GAIN_MODELS = ("exponential", "full")


def dbm_to_watt(p_dbm):
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class TierParams:
    """One tier of base stations.

    ``tx_power`` is the total BS transmit power in watts; for the macro tier
    the per-stream power is obtained by dividing by the number of streams.
    """

    density: float
    tx_power: float
    disc_radius: float
    los_radius: float
    alpha_los: float = 4.0
    alpha_nlos: float = 4.0

    def validate(self, name):
        if self.density < 0:
            raise ConfigError(f"{name}.density must be >= 0, got {self.density}")
        if self.tx_power <= 0:
            raise ConfigError(f"{name}.tx_power must be > 0, got {self.tx_power}")
        if self.disc_radius <= 0:
            raise ConfigError(f"{name}.disc_radius must be > 0, got {self.disc_radius}")
        if not 0 < self.los_radius <= self.disc_radius:
            raise ConfigError(
                f"{name}.los_radius must lie in (0, disc_radius], got {self.los_radius}")
        if self.alpha_los <= 0 or self.alpha_nlos <= 0:
            raise ConfigError(f"{name}: path loss exponents must be > 0")
        if self.alpha_los > self.alpha_nlos:
            raise ConfigError(f"{name}: alpha_los must not exceed alpha_nlos")

    def alpha(self, distance):
        """Path loss exponent of a link of the given length (LOS ball)."""
        return self.alpha_los if distance < self.los_radius else self.alpha_nlos

    def mean_count(self):
        return self.density * math.pi * self.disc_radius ** 2


@dataclass(frozen=True)
class GroupGeometry:
    """AOA and angular spread (radians) of one user group."""

    aoa: float
    angular_spread: float
    antenna_spacing: float = 0.5
    num_antennas: int = 128

    def validate(self):
        if not 0 < self.angular_spread < math.pi / 2:
            raise ConfigError(
                f"angular_spread must lie in (0, pi/2), got {self.angular_spread}")
        if self.num_antennas < 1:
            raise ConfigError("num_antennas must be >= 1")
        if self.antenna_spacing <= 0:
            raise ConfigError("antenna_spacing must be > 0")


def _default_groups():
    return (
        GroupGeometry(math.radians(-30.0), math.radians(15.0)),
        GroupGeometry(math.radians(0.0), math.radians(15.0)),
    )


@dataclass(frozen=True)
class NetworkConfig:
    macro: TierParams = TierParams(1e-5, dbm_to_watt(53.0), 200.0, 20.0)
    pico: TierParams = TierParams(1e-4, dbm_to_watt(33.0), 60.0, 20.0)
    carrier_frequency: float = 28e9
    bandwidth: float = 1e9
    noise_figure: float = 10.0
    num_antennas: int = 128
    antenna_spacing: float = 0.5
    num_users: int = 10
    user_density: float = 1e-3
    groups: tuple = field(default_factory=_default_groups)
    streams_per_group: tuple = (5, 5)
    # B_g per group; None means B_g = S_g
    beams_per_group: tuple | None = None
    # None means S = sum(streams_per_group)
    total_streams: int | None = None
    energy_fraction: float = 0.99
    subspace_cap: int | None = None
    interference_mode: str = "analysis_match"
    laplace_form: str = "campbell"
    beam_gain_model: str = "exponential"
    include_nobs: bool = True
    seed: int = 2024

    def __post_init__(self):
        # keep group antenna geometry in sync with the array fields
        groups = tuple(
            dataclasses.replace(g, antenna_spacing=self.antenna_spacing,
                                num_antennas=self.num_antennas)
            for g in self.groups)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "streams_per_group", tuple(self.streams_per_group))
        if self.beams_per_group is not None:
            object.__setattr__(self, "beams_per_group", tuple(self.beams_per_group))

    # -- derived quantities -------------------------------------------------
    @property
    def num_streams(self):
        if self.total_streams is not None:
            return self.total_streams
        return sum(self.streams_per_group)

    @property
    def beams(self):
        if self.beams_per_group is None:
            return self.streams_per_group
        return self.beams_per_group

    @property
    def macro_power(self):
        """Per-stream macro power P_m = P_1 / S (watts)."""
        return self.macro.tx_power / self.num_streams

    @property
    def pico_power(self):
        return self.pico.tx_power

    @property
    def power_ratio(self):
        """P_s / P_m."""
        return self.pico_power / self.macro_power

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def kappa2(self):
        return (self.wavelength / (4.0 * math.pi)) ** 2

    @property
    def noise_power(self):
        from .link import noise_power
        return noise_power(self.bandwidth, self.noise_figure)

    # -- helpers ------------------------------------------------------------
    def validate(self):
        self.macro.validate("macro")
        self.pico.validate("pico")
        if not self.groups:
            raise ConfigError("groups: at least one group is required")
        for g in self.groups:
            g.validate()
        if len(self.streams_per_group) != len(self.groups):
            raise ConfigError("streams_per_group must have one entry per group")
        if any(s < 1 for s in self.streams_per_group):
            raise ConfigError("streams_per_group entries must be >= 1")
        if len(self.beams) != len(self.groups):
            raise ConfigError("beams_per_group must have one entry per group")
        if any(b < s for b, s in zip(self.beams, self.streams_per_group)):
            raise ConfigError("beams_per_group: need B_g >= S_g")
        if self.num_streams < 1 or sum(self.streams_per_group) > self.num_antennas:
            raise ConfigError("total streams must satisfy 1 <= S <= num_antennas")
        for name in ("carrier_frequency", "bandwidth", "antenna_spacing",
                     "user_density"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.num_antennas < 1 or self.num_users < 1:
            raise ConfigError("num_antennas and num_users must be >= 1")
        if not 0 < self.energy_fraction <= 1:
            raise ConfigError("energy_fraction must lie in (0, 1]")
        if self.interference_mode not in INTERFERENCE_MODES:
            raise ConfigError(f"interference_mode must be one of {INTERFERENCE_MODES}")
        if self.laplace_form not in LAPLACE_FORMS:
            raise ConfigError(f"laplace_form must be one of {LAPLACE_FORMS}")
        if self.beam_gain_model not in BEAM_GAIN_MODELS:
            raise ConfigError(f"beam_gain_model must be one of {BEAM_GAIN_MODELS}")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes).validate()

    def with_tier(self, tier, **changes):
        """Copy with fields of ``"macro"`` or ``"pico"`` replaced."""
        params = dataclasses.replace(getattr(self, tier), **changes)
        return self.replace(**{tier: params})

    def one_tier(self):
        return self.with_tier("pico", density=0.0)

    def group_weights(self):
        """Probability that the typical user belongs to each group (K_g / K)."""
        total = sum(self.streams_per_group)
        return [s / total for s in self.streams_per_group]

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """Short stable hash of every field, embedded in output files."""
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


DEFAULTS = NetworkConfig()


def mixed_alpha_preset():
    """Defaults with alpha_L = 2, alpha_N = 4, exercising every region case."""
    cfg = DEFAULTS.with_tier("macro", alpha_los=2.0)
    return cfg.with_tier("pico", alpha_los=2.0)


# -- file loading -------------------------------------------------------------

_TIER_KEYS = {
    "density": ("density", float),
    "power_dbm": ("tx_power", lambda v: dbm_to_watt(float(v))),
    "radius": ("disc_radius", float),
    "los_radius": ("los_radius", float),
    "alpha_los": ("alpha_los", float),
    "alpha_nlos": ("alpha_nlos", float),
}

_TOP_KEYS = {
    "carrier_frequency_hz": ("carrier_frequency", float),
    "bandwidth_hz": ("bandwidth", float),
    "noise_figure_db": ("noise_figure", float),
    "num_antennas": ("num_antennas", int),
    "antenna_spacing": ("antenna_spacing", float),
    "num_users": ("num_users", int),
    "user_density": ("user_density", float),
    "streams_per_group": ("streams_per_group", lambda v: tuple(int(x) for x in v)),
    "beams_per_group": ("beams_per_group", lambda v: tuple(int(x) for x in v)),
    "total_streams": ("total_streams", int),
    "energy_fraction": ("energy_fraction", float),
    "subspace_cap": ("subspace_cap", int),
    "interference_mode": ("interference_mode", str),
    "laplace_form": ("laplace_form", str),
    "beam_gain_model": ("beam_gain_model", str),
    "include_nobs": ("include_nobs", bool),
    "seed": ("seed", int),
}


def config_from_mapping(data, base=DEFAULTS):
    """Apply a (possibly partial) mapping of overrides on top of ``base``."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    changes = {}
    for key, value in data.items():
        if key in ("macro", "pico"):
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a mapping")
            tier_changes = {}
            for tk, tv in value.items():
                if tk not in _TIER_KEYS:
                    raise ConfigError(f"unknown field {key}.{tk}")
                name, conv = _TIER_KEYS[tk]
                tier_changes[name] = _convert(f"{key}.{tk}", conv, tv)
            changes[key] = dataclasses.replace(getattr(base, key), **tier_changes)
        elif key == "groups":
            changes["groups"] = tuple(_group(i, g) for i, g in enumerate(value))
        elif key in _TOP_KEYS:
            name, conv = _TOP_KEYS[key]
            changes[name] = _convert(key, conv, value)
        else:
            raise ConfigError(f"unknown field {key}")
    try:
        cfg = dataclasses.replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def _convert(name, conv, value):
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot convert {value!r}") from exc


def _group(i, g):
    if not isinstance(g, dict) or "aoa_deg" not in g or "spread_deg" not in g:
        raise ConfigError(f"groups[{i}] needs aoa_deg and spread_deg")
    return GroupGeometry(math.radians(float(g["aoa_deg"])),
                         math.radians(float(g["spread_deg"])))


def load_config(path=None):
    """Load a YAML config; missing fields fall back to the defaults."""
    if path is None:
        return DEFAULTS
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from exc
    return config_from_mapping(data)
