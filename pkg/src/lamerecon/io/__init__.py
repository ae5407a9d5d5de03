"""Field and artifact storage for lamerecon."""

from .lfld import read_field, write_field, write_csv, field_digest
from .artifacts import (
    save_bundle,
    load_bundle,
    save_traces,
    load_traces,
    write_json,
)
from .quicklook import save_heatmap

__all__ = [
    "read_field",
    "write_field",
    "write_csv",
    "field_digest",
    "save_bundle",
    "load_bundle",
    "save_traces",
    "load_traces",
    "write_json",
    "save_heatmap",
]
