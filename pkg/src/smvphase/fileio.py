"""Dependency-free bit-exact file formats used by the command line driver.

* Images come in as binary PGM (P5), 8- or 16-bit, rescaled to [-1, 1].
* Float planes go out as little-endian raw float32 next to a JSON sidecar
  recording dims, dtype and a semantic name.
* 8-bit PGM visualizations use per-image min/max scaling, with the scale
  recorded in the sidecar so the mapping is invertible.

All writes are atomic (temp file + rename) so partial artifacts never appear.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(Path(path), text.encode("utf-8"))


def read_pgm(path) -> np.ndarray:
    """Binary PGM (P5) to float64 in [-1, 1]."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header tokens: magic, width, height, maxval; '#' comments run to newline
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval >= 65536:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    count = width * height
    if maxval < 256:
        raw = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
    else:
        raw = np.frombuffer(data, dtype=">u2", count=count, offset=pos)
    img = raw.astype(np.float64).reshape(height, width)
    return 2.0 * img / maxval - 1.0


def write_pgm(path, img: np.ndarray, maxval: int = 255) -> dict:
    """Write a float image as PGM with per-image min/max scaling.

    Returns the scaling record {"vmin": ..., "vmax": ...} for the sidecar.
    """
    img = np.asarray(img, dtype=np.float64)
    vmin, vmax = float(img.min()), float(img.max())
    span = vmax - vmin
    scaled = (img - vmin) / span if span > 0.0 else np.zeros_like(img)
    q = np.round(scaled * maxval)
    height, width = img.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    body = (q.astype(np.uint8).tobytes() if maxval < 256
            else q.astype(">u2").tobytes())
    _atomic_write_bytes(Path(path), header + body)
    return {"vmin": vmin, "vmax": vmax}


def write_plane(out_dir, name: str, img: np.ndarray, extra: dict | None = None) -> Path:
    """Raw little-endian float32 plane plus a JSON sidecar."""
    out_dir = Path(out_dir)
    img = np.asarray(img)
    plane = out_dir / f"{name}.f32"
    _atomic_write_bytes(plane, np.ascontiguousarray(img, dtype="<f4").tobytes())
    meta = {
        "name": name,
        "width": int(img.shape[1]),
        "height": int(img.shape[0]),
        "dtype": "float32-le",
        "order": "row-major",
    }
    if extra:
        meta.update(extra)
    atomic_write_text(plane.with_suffix(".json"), json.dumps(meta, indent=2) + "\n")
    return plane


def read_plane(path) -> np.ndarray:
    """Read back a float plane written by :func:`write_plane`."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    return raw.reshape(meta["height"], meta["width"]).astype(np.float64)


def write_visualization(out_dir, name: str, img: np.ndarray) -> None:
    """8-bit PGM preview with the min/max scale recorded alongside."""
    out_dir = Path(out_dir)
    scale = write_pgm(out_dir / f"{name}.pgm", img)
    atomic_write_text(out_dir / f"{name}.pgm.json",
                      json.dumps({"name": name, **scale}, indent=2) + "\n")
