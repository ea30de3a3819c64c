"""Grayscale image file IO: native PGM (P2/P5, 8- or 16-bit) plus
optional PNG via Pillow.

Pixel values are normalized to ``[0, 1]`` on read (division by the
file's maxval) and quantized back with round-half-even on write, so a
write/read round trip is exact up to the quantization step of the
chosen bit depth.  16-bit P5 samples are big-endian per the netpbm
convention.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

__all__ = ["read_pgm", "write_pgm", "read_image", "write_image"]


def _read_tokens(data: bytes, count: int, pos: int):
    """Read whitespace/comment-separated ASCII tokens from a PGM header."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """Read a P2/P5 PGM file and return intensities in ``[0, 1]``."""
    data = Path(path).read_bytes()
    if data[:2] not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {data[:2]!r})")
    binary = data[:2] == b"P5"
    (width_b, height_b, maxval_b), pos = _read_tokens(data, 3, 2)
    width, height, maxval = int(width_b), int(height_b), int(maxval_b)
    if not (0 < maxval < 65536):
        raise ValueError(f"{path}: invalid maxval {maxval}")
    if binary:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        count = width * height
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    else:
        values = re.split(rb"\s+", data[pos:].strip())
        raw = np.array([int(v) for v in values], dtype=np.uint32)
        if raw.size != width * height:
            raise ValueError(f"{path}: expected {width * height} samples, got {raw.size}")
    img = raw.reshape(height, width).astype(np.float64) / maxval
    return img


def write_pgm(path, u: np.ndarray, bits: int = 16, binary: bool = True) -> None:
    """Write an image (values nominally in ``[0, 1]``) as PGM.

    Values are scaled by the maxval of the requested bit depth, rounded
    half-even, and clipped to the representable range.
    """
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("image must be 2-D")
    maxval = (1 << bits) - 1
    q = np.clip(np.rint(u * maxval), 0, maxval)
    height, width = u.shape
    if binary:
        header = f"P5\n{width} {height}\n{maxval}\n".encode()
        body = q.astype(">u2" if bits == 16 else "u1").tobytes()
        Path(path).write_bytes(header + body)
    else:
        lines = [f"P2\n{width} {height}\n{maxval}"]
        for row in q.astype(np.uint32):
            lines.append(" ".join(str(int(x)) for x in row))
        Path(path).write_text("\n".join(lines) + "\n")


def _require_pil():
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("PNG support requires Pillow (pip install Pillow)") from exc
    return Image


def read_image(path) -> np.ndarray:
    """Read a grayscale image by extension (.pgm native, .png via Pillow)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".png":
        image_mod = _require_pil()
        with image_mod.open(path) as im:
            if im.mode == "I;16":
                arr = np.asarray(im, dtype=np.float64)
                return arr / 65535.0
            arr = np.asarray(im.convert("L"), dtype=np.float64)
            return arr / 255.0
    raise ValueError(f"unsupported image format {suffix!r} (use .pgm or .png)")


def write_image(path, u: np.ndarray, bits: int = 16) -> None:
    """Write a grayscale image by extension (.pgm native, .png via Pillow)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        write_pgm(path, u, bits=bits)
        return
    if suffix == ".png":
        image_mod = _require_pil()
        u = np.asarray(u, dtype=np.float64)
        maxval = (1 << bits) - 1
        q = np.clip(np.rint(u * maxval), 0, maxval)
        if bits == 16:
            image_mod.fromarray(q.astype(np.uint16), mode="I;16").save(path)
        else:
            image_mod.fromarray(q.astype(np.uint8), mode="L").save(path)
        return
    raise ValueError(f"unsupported image format {suffix!r} (use .pgm or .png)")
