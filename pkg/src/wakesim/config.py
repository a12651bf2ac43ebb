"""INI-style configuration files shared by the CLI commands.

Sections and keys are optional; command-line flags override file values.
Tables (vdd-dependent parameters) use the compact `x:y,x:y` pair syntax.
"""

from __future__ import annotations

import configparser

from .energymodel import EnergyParams
from .errors import ConfigError
from .memsim import DeviceDistributions, OperatingPoint, ReadErrorModel, regime_preset

DEFAULTS: dict[str, dict[str, str]] = {
    "dataset": {
        "source": "synthetic",
        "seed": "11",
        "beats_per_class": "800",
        "test_per_class": "800",
        "noise_sigma": "0.05",
    },
    "codec": {"base": "0.15", "scale": "16", "width": "8"},
    "train": {"lr": "0.05", "epochs": "200", "batch_size": "64", "seed": "3"},
    "operating_point": {"preset": "A"},
    "policy": {
        "wake_on_abnormal": "true",
        "wake_on_ambiguous": "true",
        "wake_on_invalid": "true",
    },
    "energy": {
        "e_fe_nominal": "2.0e-9",
        "e_service": "3.2e-6",
        "p_mon_nominal": "2.9e-6",
        "static_frac": "0.55",
        "vdd_nominal": "1.2",
        "pi": "0.01",
        "t_s": "2.0e-3",
    },
    "seeds": {"program": "5", "read": "7"},
}


def load_config(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.read_dict(DEFAULTS)
    if path is not None:
        try:
            with open(path, "r") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}")
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}")
    return parser


def config_as_dict(parser: configparser.ConfigParser) -> dict:
    return {section: dict(parser[section]) for section in parser.sections()}


def get_float(parser, section: str, key: str) -> float:
    try:
        return parser.getfloat(section, key)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number ({exc})")


def get_int(parser, section: str, key: str) -> int:
    try:
        return parser.getint(section, key)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not an integer ({exc})")


def get_bool(parser, section: str, key: str) -> bool:
    try:
        return parser.getboolean(section, key)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a boolean ({exc})")


def parse_table(text: str, key: str = "") -> tuple[tuple[float, float], ...]:
    """Parse `x:y,x:y` pairs, sorted by x."""
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ConfigError(f"{key}: expected x:y pairs, got {chunk!r}")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"{key}: non-numeric pair {chunk!r}")
    if not pairs:
        raise ConfigError(f"{key}: empty table")
    return tuple(sorted(pairs))


def build_energy_params(parser) -> EnergyParams:
    sec = "energy"
    curve = None
    if parser.has_option(sec, "e_fe_curve"):
        curve = parse_table(parser.get(sec, "e_fe_curve"), f"[{sec}] e_fe_curve")
    try:
        return EnergyParams(
            e_fe_nominal=get_float(parser, sec, "e_fe_nominal"),
            e_service=get_float(parser, sec, "e_service"),
            p_mon_nominal=get_float(parser, sec, "p_mon_nominal"),
            static_frac=get_float(parser, sec, "static_frac"),
            vdd_nominal=get_float(parser, sec, "vdd_nominal"),
            pi=get_float(parser, sec, "pi"),
            t_s=get_float(parser, sec, "t_s"),
            e_fe_curve=curve,
        )
    except ValueError as exc:
        raise ConfigError(f"[{sec}]: {exc}")


def build_operating_setup(parser) -> tuple[OperatingPoint, DeviceDistributions, ReadErrorModel]:
    """Resolve an operating point from a preset name or explicit tables."""
    sec = "operating_point"
    if parser.has_option(sec, "preset") and parser.get(sec, "preset").strip():
        name = parser.get(sec, "preset").strip()
        try:
            return regime_preset(name)
        except ValueError as exc:
            raise ConfigError(str(exc))
    required = ("vdd", "vddr", "lrs_log10_mean", "lrs_log10_sigma",
                "hrs_log10_mean", "hrs_log10_sigma", "sigma_n")
    for key in required:
        if not parser.has_option(sec, key):
            raise ConfigError(f"[{sec}] missing key {key!r} (or give preset=A|B|C)")
    try:
        op = OperatingPoint(
            vdd=get_float(parser, sec, "vdd"),
            vddr=get_float(parser, sec, "vddr"),
            label=parser.get(sec, "label", fallback=""),
        )
        dists = DeviceDistributions(
            lrs_log10_mean_table=parse_table(parser.get(sec, "lrs_log10_mean"), "lrs_log10_mean"),
            lrs_log10_sigma_table=parse_table(parser.get(sec, "lrs_log10_sigma"), "lrs_log10_sigma"),
            hrs_log10_mean=get_float(parser, sec, "hrs_log10_mean"),
            hrs_log10_sigma=get_float(parser, sec, "hrs_log10_sigma"),
        )
        noise = ReadErrorModel(sigma_n_table=parse_table(parser.get(sec, "sigma_n"), "sigma_n"))
    except ValueError as exc:
        raise ConfigError(f"[{sec}]: {exc}")
    return op, dists, noise
