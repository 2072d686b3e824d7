"""Paths to the bundled sample dataset (a single-machine CPU suite snapshot)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _data_path(name: str) -> Path:
    with resources.as_file(resources.files("benchlens").joinpath("data", name)) as path:
        return Path(path)


def sample_store_path() -> Path:
    """Canonical store with instruction/cycle/load/store/branch counters."""
    return _data_path("cpu_suite_store.csv")


def sample_scores_path() -> Path:
    """Synthetic running scores and wallclocks for the sample store."""
    return _data_path("cpu_suite_scores.csv")


def sample_countermap_path() -> Path:
    """Example counter map manifest for the sample machine."""
    return _data_path("countermap_cpu_c.yaml")


def sample_raw_dump_path() -> Path:
    """Example raw counter dump in the parse format, for ingest demos."""
    return _data_path("raw_stockfish_cpu_c.txt")
