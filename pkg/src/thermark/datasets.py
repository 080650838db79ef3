"""Paths to the data files bundled with the package."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path


def data_dir() -> Path:
    return Path(str(files("thermark") / "data"))


def two_zone_benchmark_dir() -> Path:
    """Pinned two-zone benchmark: building, occupancy logs and tariff."""
    return data_dir() / "two_zone_benchmark"


def seven_day_log_csv() -> Path:
    """Seven-day occupancy log used by the estimation benchmark."""
    return data_dir() / "seven_day_benchmark.csv"
