"""Versioned binary container for named float64 arrays.

    magic    8 bytes  b"ATRCKPT\\0"
    version  u32 little-endian
    hlen     u64 little-endian
    header   hlen bytes of JSON (sorted keys): {"arch", "arrays", "meta"}
    data     concatenated little-endian float64 arrays in header order
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import ActiveTaskError

logger = logging.getLogger(__name__)

MAGIC = b"ATRCKPT\0"
VERSION = 1
_PREFIX = struct.Struct("<8sIQ")


class CheckpointFormatError(ActiveTaskError):
    pass


class ArchMismatchError(ActiveTaskError):
    pass


def encode(arrays: Mapping[str, np.ndarray], arch: Any, meta: Optional[Dict[str, Any]] = None) -> bytes:
    manifest = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        manifest.append({"name": name, "offset": offset, "shape": list(arr.shape)})
        blob = arr.tobytes()
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"arch": arch, "arrays": manifest, "meta": meta or {}}, sort_keys=True).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(header)) + header + b"".join(blobs)


def decode(raw: bytes, expected_arch: Any = None) -> Tuple[Dict[str, np.ndarray], Any, Dict[str, Any]]:
    if len(raw) < _PREFIX.size:
        raise CheckpointFormatError("file shorter than the checkpoint prefix")
    magic, version, hlen = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size
    if start + hlen > len(raw):
        raise CheckpointFormatError("truncated header")
    try:
        header = json.loads(raw[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"corrupted header: {e}") from e
    if not isinstance(header, dict) or not {"arch", "arrays", "meta"} <= set(header):
        raise CheckpointFormatError("header lacks arch/arrays/meta")

    if expected_arch is not None and json.dumps(header["arch"], sort_keys=True) != json.dumps(expected_arch, sort_keys=True):
        raise ArchMismatchError("checkpoint architecture does not match the requested model")

    data = raw[start + hlen:]
    arrays: Dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        lo = entry["offset"]
        hi = lo + 8 * count
        if hi > len(data):
            raise CheckpointFormatError(f"array {entry['name']} runs past the end of the file")
        arrays[entry["name"]] = np.frombuffer(data[lo:hi], dtype="<f8").astype(np.float64).reshape(shape)
    return arrays, header["arch"], header["meta"]


def write_checkpoint(path: Union[str, Path], arrays: Mapping[str, np.ndarray], arch: Any,
                     meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = encode(arrays, arch, meta)
    path.write_bytes(raw)
    logger.info(f"Wrote checkpoint {path} ({len(raw)} bytes, {len(arrays)} arrays)")
    return path


def read_checkpoint(path: Union[str, Path], expected_arch: Any = None):
    return decode(Path(path).read_bytes(), expected_arch)
