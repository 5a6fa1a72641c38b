"""Binary cache files for coefficient tables.

Layout (all integers little-endian):

    magic    8 bytes  b"APMCOEF1"
    kind     1 byte   b"d" or b"f"
    dtype    1 byte   b"i" (int64) or b"r" (float64)
    weight   uint16   cusp-form weight (0 for the divisor kind)
    n_max    uint64
    crc      uint32   zlib.crc32 of the payload
    payload  n_max little-endian 64-bit values for n = 1 .. n_max

A read with mismatching parameters or checksum simply reports a miss; the
caller rebuilds and overwrites.
"""

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"APMCOEF1"
_HEADER = struct.Struct("<8sccHQI")


def cache_path(cache_dir, kind, weight, n_max):
    return Path(cache_dir) / f"coeffs_{kind}_k{weight}_n{n_max}.bin"


def write_values(path, kind, weight, values):
    """values: array indexed 1..n_max (index 0 ignored)."""
    arr = np.asarray(values[1:])
    if arr.dtype == np.int64:
        code = b"i"
    else:
        arr = arr.astype(np.float64)
        code = b"r"
    payload = arr.astype("<i8" if code == b"i" else "<f8").tobytes()
    header = _HEADER.pack(
        MAGIC, kind.encode(), code, weight, len(arr), zlib.crc32(payload)
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(header + payload)
    tmp.replace(path)


def read_values(path, kind, weight, n_max):
    """Return the 1-indexed value array, or None on any mismatch."""
    path = Path(path)
    if not path.is_file():
        return None
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        return None
    magic, k, code, w, n, crc = _HEADER.unpack_from(blob)
    if magic != MAGIC or k != kind.encode() or w != weight or n != n_max:
        return None
    payload = blob[_HEADER.size :]
    if len(payload) != 8 * n or zlib.crc32(payload) != crc:
        return None
    dt = "<i8" if code == b"i" else "<f8"
    arr = np.frombuffer(payload, dtype=dt)
    out = np.zeros(n + 1, dtype=np.int64 if code == b"i" else np.float64)
    out[1:] = arr
    return out


def header_info(path):
    """(kind, weight, n_max, crc) of a cache file, or None."""
    path = Path(path)
    if not path.is_file():
        return None
    blob = path.read_bytes()[: _HEADER.size]
    if len(blob) < _HEADER.size:
        return None
    magic, k, code, w, n, crc = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        return None
    return (k.decode(), w, n, crc)
