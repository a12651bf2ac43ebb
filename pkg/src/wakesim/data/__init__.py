"""Bundled data files."""

from importlib import resources


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled fixture file."""
    return str(resources.files(__package__) / name)


def default_rates_fixture() -> str:
    """Shipped wake-rate-versus-supply table used by sweep demonstrations."""
    return fixture_path("pwake_vs_vdd.csv")
