"""MPS checkpoint container.

Layout of a file::

    b"DWASPT-MPS\\n"             magic line
    <8-byte little-endian n>    length of the JSON header
    <n bytes UTF-8 JSON>        version, layout, center, log_norm,
                                truncation log, Schmidt spectra, tensor
                                shapes/dtypes, free-form metadata
    raw tensor bytes            C-order, in site order, little-endian

The raw float bytes make the round trip exact, and no timestamps are
written, so equal states give byte-identical files.
"""
from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from ..lattice import LatticeLayout
from .state import MPS

MAGIC = b"DWASPT-MPS\n"
VERSION = 1


def save_mps(path, mps: MPS, metadata: dict | None = None) -> None:
    tensors = [np.ascontiguousarray(t, dtype=t.dtype.newbyteorder("<")) for t in mps.tensors]
    header = {
        "version": VERSION,
        "layout": {"L": mps.layout.L, "boundary": mps.layout.boundary, "doubled": mps.layout.doubled},
        "center": mps.center,
        "log_norm": mps.log_norm.hex(),
        "trunc_log": [float(x).hex() for x in mps.trunc_log],
        "schmidt": {str(k): [float(x).hex() for x in v] for k, v in sorted(mps.schmidt.items())},
        "tensors": [{"shape": list(t.shape), "dtype": t.dtype.str} for t in tensors],
        "metadata": metadata or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for t in tensors:
            fh.write(t.tobytes(order="C"))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_mps(path) -> tuple[MPS, dict]:
    """Return the stored state and its metadata dict."""
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not an MPS checkpoint")
        (n,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(n).decode())
        if header["version"] != VERSION:
            raise ValueError(f"unsupported checkpoint version {header['version']}")
        tensors = []
        for spec in header["tensors"]:
            dt = np.dtype(spec["dtype"])
            count = int(np.prod(spec["shape"]))
            buf = fh.read(count * dt.itemsize)
            tensors.append(np.frombuffer(buf, dtype=dt).reshape(spec["shape"]).astype(dt.newbyteorder("=")))
    lay = header["layout"]
    mps = MPS(tensors, LatticeLayout(lay["L"], lay["boundary"], lay["doubled"]), header["center"],
              float.fromhex(header["log_norm"]))
    mps.trunc_log = [float.fromhex(x) for x in header["trunc_log"]]
    mps.schmidt = {int(k): np.array([float.fromhex(x) for x in v]) for k, v in header["schmidt"].items()}
    return mps, header["metadata"]
