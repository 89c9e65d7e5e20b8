"""Connectivity heatmaps written as PNG with the standard library only."""

import struct
import zlib
from pathlib import Path

import numpy as np

# single-hue ramp: lightness falls monotonically from LIGHT to DARK
LIGHT = np.array([247, 251, 255], dtype=float)
DARK = np.array([8, 48, 107], dtype=float)


def _chunk(kind, data):
    body = kind + data
    return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)


def encode_png(rgb):
    """Encode an ``h x w x 3`` uint8 array as PNG bytes (deterministic)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    raw = np.zeros((h, 1 + 3 * w), dtype=np.uint8)  # filter byte 0 per row
    raw[:, 1:] = rgb.reshape(h, 3 * w)
    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + _chunk(b"IHDR", header)
            + _chunk(b"IDAT", zlib.compress(raw.tobytes(), 9)) + _chunk(b"IEND", b""))


def heatmap_rgb(m, cell=None):
    """RGB image of ``|m| / max|m|``; darkest cell is the largest magnitude.

    Each matrix entry becomes a ``cell x cell`` block (default chosen so the
    image is roughly 256-512 pixels wide).
    """
    a = np.abs(np.asarray(m, dtype=float))
    if a.ndim != 2:
        raise ValueError("heatmap needs a 2-D matrix")
    peak = a.max() if a.size else 0.0
    v = a / peak if peak > 0 else np.zeros_like(a)
    rgb = np.rint(LIGHT + v[..., None] * (DARK - LIGHT)).astype(np.uint8)
    if cell is None:
        cell = max(1, 512 // max(a.shape))
    return np.repeat(np.repeat(rgb, cell, axis=0), cell, axis=1)


def render_heatmap(m, path, cell=None):
    """Write the heatmap of ``m`` to ``path`` and return the path."""
    path = Path(path)
    path.write_bytes(encode_png(heatmap_rgb(m, cell)))
    return path


def decode_png(data):
    """Decode PNGs produced by :func:`encode_png` (8-bit RGB, filter 0)."""
    if data[:8] != b"\x89PNG\r\n\x1a\n":
        raise ValueError("not a PNG")
    pos, idat, w, h = 8, b"", None, None
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        kind = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + length]
        if kind == b"IHDR":
            w, h = struct.unpack(">II", body[:8])
        elif kind == b"IDAT":
            idat += body
        pos += 12 + length
    raw = np.frombuffer(zlib.decompress(idat), dtype=np.uint8).reshape(h, 1 + 3 * w)
    return raw[:, 1:].reshape(h, w, 3)
