"""Bit-exact binary container for a single dense tensor (`.lftk`).

Layout, all little-endian:

    magic   4 bytes  b"LFTK"
    version u32      1
    dtype   u32      0 = float32, 1 = float64
    ndim    u32
    dims    ndim x u64
    payload row-major element data
"""

import logging
import struct
from pathlib import Path

import numpy as np

from lformer.core.errors import (
    ContainerFormatError,
    ContainerMagicError,
    ContainerTruncatedError,
    ContainerVersionError,
    DataError,
)
from lformer.core.tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b"LFTK"
VERSION = 1
HEADER = struct.Struct("<4sIII")
DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}
CODE_DTYPES = {code: dtype for dtype, code in DTYPE_CODES.items()}


def header_size(ndim: int) -> int:
    return HEADER.size + 8 * ndim


def encode_tensor(value: Tensor | np.ndarray) -> bytes:
    """Serialize a float32/float64 array into container bytes"""
    array = value.data if isinstance(value, Tensor) else np.asarray(value)
    dtype = array.dtype.newbyteorder("<")
    if dtype not in DTYPE_CODES:
        raise ContainerFormatError(f"cannot store dtype {array.dtype}")
    header = HEADER.pack(MAGIC, VERSION, DTYPE_CODES[dtype], array.ndim)
    dims = np.asarray(array.shape, dtype="<u8").tobytes()
    return header + dims + np.ascontiguousarray(array, dtype=dtype).tobytes()


def decode_tensor(blob: bytes) -> np.ndarray:
    """Parse container bytes back into an array.

    Raises:
        ContainerMagicError: If the magic bytes are wrong.
        ContainerVersionError: If the version is not 1.
        ContainerTruncatedError: If the header or payload is short.
        ContainerFormatError: For an unknown dtype code or trailing bytes.
    """
    if len(blob) >= 4 and blob[:4] != MAGIC:
        raise ContainerMagicError(blob[:4])
    if len(blob) < HEADER.size:
        raise ContainerTruncatedError(f"header needs {HEADER.size} bytes, file has {len(blob)}")
    magic, version, code, ndim = HEADER.unpack_from(blob)
    if version != VERSION:
        raise ContainerVersionError(version)
    if code not in CODE_DTYPES:
        raise ContainerFormatError(f"unknown dtype code {code}")
    if len(blob) < header_size(ndim):
        raise ContainerTruncatedError(f"dimension table needs {header_size(ndim)} bytes, file has {len(blob)}")
    shape = tuple(int(d) for d in np.frombuffer(blob, dtype="<u8", count=ndim, offset=HEADER.size))
    dtype = CODE_DTYPES[code]
    expected = header_size(ndim) + int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(blob) < expected:
        raise ContainerTruncatedError(f"payload needs {expected} bytes, file has {len(blob)}")
    if len(blob) > expected:
        raise ContainerFormatError(f"{len(blob) - expected} unexpected trailing bytes")
    payload = np.frombuffer(blob, dtype=dtype, offset=header_size(ndim))
    return payload.reshape(shape).astype(dtype.newbyteorder("="), copy=True)


def save_tensor(path: str | Path, value: Tensor | np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tensor(value))
    logger.debug(f"Wrote {path}")
    return path


def load_tensor(path: str | Path) -> Tensor:
    """Read a container file into a Tensor"""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"tensor file not found: {path}")
    try:
        return Tensor(decode_tensor(path.read_bytes()))
    except ContainerFormatError:
        logger.exception(f"Could not decode {path}")
        raise
