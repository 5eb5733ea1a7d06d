"""Binary matrix persistence with a plain-text sidecar.

Format: an 8-byte magic tag, a little-endian uint32 dtype code and uint32
rank, the dimensions as little-endian uint64, then the raw little-endian
payload. Complex matrices are stored as interleaved double pairs. Every file
gets a ``.txt`` sidecar describing shape, dtype and free-form metadata so the
contents stay inspectable without this module.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_MAGIC = b"XDMAMAT\x00"
_DTYPES = {1: np.dtype("<c16"), 2: np.dtype("<f8")}
_CODES = {np.dtype(np.complex128): 1, np.dtype(np.float64): 2}


def save_matrix(path: str | Path, array: np.ndarray,
                meta: dict | None = None) -> None:
    """Write an array (float64 or complex128) plus its text sidecar."""
    path = Path(path)
    arr = np.ascontiguousarray(array)
    if arr.dtype not in _CODES:
        if np.iscomplexobj(arr):
            arr = arr.astype(np.complex128)
        else:
            arr = arr.astype(np.float64)
    code = _CODES[arr.dtype]
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<II", code, arr.ndim))
        f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        f.write(arr.astype(_DTYPES[code]).tobytes())
    lines = [f"shape: {'x'.join(str(s) for s in arr.shape)}",
             f"dtype: {'complex128' if code == 1 else 'float64'}",
             "layout: row-major, little-endian"]
    for key, value in (meta or {}).items():
        lines.append(f"{key}: {value}")
    path.with_suffix(path.suffix + ".txt").write_text("\n".join(lines) + "\n")


def load_matrix(path: str | Path) -> np.ndarray:
    """Read an array written by :func:`save_matrix`."""
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(8) != _MAGIC:
            raise ValueError(f"{path} is not a matrix file (bad magic)")
        code, rank = struct.unpack("<II", f.read(8))
        if code not in _DTYPES:
            raise ValueError(f"{path}: unknown dtype code {code}")
        shape = struct.unpack(f"<{rank}Q", f.read(8 * rank))
        data = np.frombuffer(f.read(), dtype=_DTYPES[code])
    expected = int(np.prod(shape)) if shape else 1
    if data.size != expected:
        raise ValueError(f"{path}: payload holds {data.size} values, "
                         f"header promises {expected}")
    return data.reshape(shape).astype(
        np.complex128 if code == 1 else np.float64)


def save_design(directory: str | Path, design) -> None:
    """Persist a measurement design as matrix files plus a descriptor."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_matrix(directory / "weights.mat", design.weights,
                {"role": "effective measurement matrices W, strips x elems x pilots"})
    if design.dma_weights is not None:
        save_matrix(directory / "element_weights.mat", design.dma_weights,
                    {"role": "element weight matrices Q"})
    if design.guide_diag is not None:
        save_matrix(directory / "guide_diag.mat", design.guide_diag,
                    {"role": "waveguide diagonal entries per strip"})
    lines = [f"mode: {design.mode}", f"provenance: {design.provenance}",
             f"seed: {design.seed}"]
    (directory / "design.txt").write_text("\n".join(lines) + "\n")


def load_design(directory: str | Path):
    """Load a design saved by :func:`save_design`."""
    from .mmo import MeasurementDesign

    directory = Path(directory)
    fields = {}
    for line in (directory / "design.txt").read_text().splitlines():
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    weights = load_matrix(directory / "weights.mat")
    q_path = directory / "element_weights.mat"
    v_path = directory / "guide_diag.mat"
    seed = None if fields.get("seed") in (None, "None") else int(fields["seed"])
    return MeasurementDesign(
        fields["mode"], fields["provenance"], weights,
        load_matrix(q_path) if q_path.exists() else None,
        load_matrix(v_path) if v_path.exists() else None,
        seed)
