"""
结果持久化模块（CSV / JSON）
"""
from .files import MANIFEST_NAME, ensure_out_dir, read_json, write_json, write_manifest
from .tables import (
    FLOAT_FORMAT,
    load_factor,
    read_chain,
    read_locations,
    read_matrix,
    read_ordering,
    save_factor,
    write_chain,
    write_locations,
    write_matrix,
    write_ordering,
    write_records,
    write_table,
)

__all__ = [
    "MANIFEST_NAME",
    "ensure_out_dir",
    "read_json",
    "write_json",
    "write_manifest",
    "FLOAT_FORMAT",
    "load_factor",
    "read_chain",
    "read_locations",
    "read_matrix",
    "read_ordering",
    "save_factor",
    "write_chain",
    "write_locations",
    "write_matrix",
    "write_ordering",
    "write_records",
    "write_table",
]
