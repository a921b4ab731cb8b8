"""Self-describing binary container: a JSON header followed by named
little-endian arrays. Used for dataset and model files.

Layout: magic, uint64 header length, UTF-8 header JSON (canonical: sorted
keys, compact separators), then the raw array payload. The header carries the
array manifest (name, dtype, shape, offset), so files are deterministic byte
for byte given the same content — no timestamps, no insertion-order effects.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

MAGIC = b"DFOC\x01\x00"
_ALLOWED = {"<f8", "<i8"}


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj)).hexdigest()


def _normalize(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype.kind == "f":
        return np.ascontiguousarray(arr, dtype="<f8")
    if arr.dtype.kind in "iu":
        return np.ascontiguousarray(arr, dtype="<i8")
    raise ValueError(f"unsupported array dtype {arr.dtype}")


def write_container(path, header: dict, arrays: dict) -> None:
    manifest = []
    offset = 0
    blobs = []
    for name in sorted(arrays):
        arr = _normalize(arrays[name])
        blob = arr.tobytes(order="C")
        manifest.append({"name": name, "dtype": arr.dtype.str,
                         "shape": list(arr.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    full = dict(header)
    full["arrays"] = manifest
    head = canonical_json(full)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(len(head)).tobytes())
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def read_container(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a container file")
        (hlen,) = np.frombuffer(fh.read(8), dtype="<u8")
        header = json.loads(fh.read(int(hlen)).decode("utf-8"))
        payload = fh.read()
    arrays = {}
    for entry in header.pop("arrays"):
        dtype = entry["dtype"]
        if dtype not in _ALLOWED:
            raise ValueError(f"unsupported dtype {dtype} in manifest")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=start)
        arrays[entry["name"]] = arr.reshape(shape)
    return header, arrays


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
