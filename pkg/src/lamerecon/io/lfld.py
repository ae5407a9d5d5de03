"""LFLD binary field format and CSV export.

Layout (little-endian): magic ``LFLD1\\n``, uint32 dim, uint32 extents[dim],
uint32 components, uint8 complex flag, float64 origin[dim],
float64 spacing[dim], then the float64 payload in row-major point order
with components innermost and complex values interleaved (re, im).
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import ContractViolation, FieldFormatError
from ..models import Grid, GridField, Rank

logger = logging.getLogger(__name__)

MAGIC = b"LFLD1\n"
CSV_POINT_LIMIT = 256 * 256


def encode_field(field: GridField) -> bytes:
    grid = field.grid
    flag = 1 if field.is_complex else 0
    header = [MAGIC, struct.pack("<I", grid.dim), struct.pack(f"<{grid.dim}I", *grid.extents),
              struct.pack("<I", field.components), struct.pack("<B", flag),
              struct.pack(f"<{grid.dim}d", *grid.origin),
              struct.pack(f"<{grid.dim}d", *grid.spacing)]
    flat = np.ascontiguousarray(field.flat_values())
    if flag:
        payload = np.stack([flat.real, flat.imag], axis=-1)
    else:
        payload = flat
    return b"".join(header) + payload.astype("<f8").tobytes()


def decode_field(data: bytes, rank: Optional[Rank] = None) -> GridField:
    if not data.startswith(MAGIC):
        raise FieldFormatError("Not an LFLD file (bad magic)")
    offset = len(MAGIC)

    def take(fmt: str):
        nonlocal offset
        size = struct.calcsize(fmt)
        if offset + size > len(data):
            raise FieldFormatError("Truncated LFLD header")
        out = struct.unpack_from(fmt, data, offset)
        offset += size
        return out

    (dim,) = take("<I")
    if dim not in (2, 3):
        raise FieldFormatError(f"Unsupported LFLD dim {dim}")
    extents = take(f"<{dim}I")
    (components,) = take("<I")
    (flag,) = take("<B")
    origin = take(f"<{dim}d")
    spacing = take(f"<{dim}d")
    grid = Grid(dim=dim, extents=tuple(extents), origin=tuple(origin), spacing=tuple(spacing))

    width = 2 if flag else 1
    expected = grid.n_points * components * width * 8
    if len(data) - offset != expected:
        raise FieldFormatError(
            f"LFLD payload has {len(data) - offset} bytes, expected {expected}")
    payload = np.frombuffer(data, dtype="<f8", offset=offset).astype(np.float64)
    if flag:
        payload = payload.reshape(-1, 2)
        payload = payload[:, 0] + 1j * payload[:, 1]

    if rank is Rank.MATRIX:
        side = int(round(np.sqrt(components)))
        if side * side != components:
            raise FieldFormatError(f"{components} components cannot form a square matrix")
        tail = (side, side)
    elif rank is Rank.SCALAR or (rank is None and components == 1):
        if components != 1:
            raise FieldFormatError(f"Scalar requested but file has {components} components")
        tail = ()
    else:
        tail = (components,)
    return GridField(grid=grid, values=payload.reshape(grid.shape + tail))


def write_field(field: GridField, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_field(field))
    logger.debug(f"Wrote {path} ({field.rank.value}, {field.components} components)")
    return path


def read_field(path: Union[str, Path], rank: Optional[Rank] = None) -> GridField:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Field file not found: {path}")
    return decode_field(path.read_bytes(), rank=rank)


def field_digest(field: GridField) -> str:
    """sha256 of the encoded field."""
    return hashlib.sha256(encode_field(field)).hexdigest()


def write_csv(field: GridField, path: Union[str, Path]) -> Path:
    """One row per point: coordinates, then components (re/im split if complex)."""
    grid = field.grid
    if grid.n_points > CSV_POINT_LIMIT:
        raise ContractViolation(
            f"CSV export is limited to {CSV_POINT_LIMIT} points, grid has {grid.n_points}")
    coords = [f"x{a + 1}" for a in range(grid.dim)]
    values = field.flat_values()
    if field.is_complex:
        names = [f"c{i}_{part}" for i in range(field.components) for part in ("re", "im")]
        values = np.stack([values.real, values.imag], axis=-1).reshape(grid.n_points, -1)
    else:
        names = [f"c{i}" for i in range(field.components)]
    table = np.hstack([grid.points(), values])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=",", header=",".join(coords + names), comments="",
               fmt="%.17g")
    return path
