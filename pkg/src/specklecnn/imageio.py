"""Minimal image I/O: PPM (P6) round-trip and a PNG decode subset.

PPM P6 with maxval 255 is the mandatory zero-dependency format. PNG
support covers 8-bit RGB/RGBA, non-interlaced, alpha dropped; inflate is
stdlib zlib, chunk CRCs are not verified. Everything decodes to an
(H, W, 3) uint8 array in RGB order.
"""

import struct
import zlib

import numpy as np

from .errors import ImageFormatError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def load_image(path):
    """Decode a PPM (P6) or PNG file to an (H, W, 3) uint8 RGB array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P6":
        return _decode_ppm(path, data)
    if data[:8] == PNG_SIGNATURE:
        return _decode_png(path, data)
    raise ImageFormatError(f"{path}: not a PPM (P6) or PNG file")


def save_ppm(path, img):
    """Write an (H, W, 3) uint8 RGB array as binary PPM."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageFormatError(f"save_ppm: expected (H, W, 3), got "
                               f"{img.shape}")
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def _ppm_tokens(data, start, count):
    """Yield `count` whitespace-separated header tokens, skipping
    '#' comments; returns (tokens, position after the final token)."""
    tokens = []
    pos = start
    while len(tokens) < count:
        if pos >= len(data):
            raise ImageFormatError("PPM header ended unexpectedly")
        ch = data[pos:pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            end = pos
            while end < len(data) and data[end:end + 1] not in b" \t\r\n#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    return tokens, pos


def _decode_ppm(path, data):
    try:
        (magic,), pos = _ppm_tokens(data, 0, 1)
        if magic != b"P6":
            raise ImageFormatError(f"{path}: PPM type {magic!r} not "
                                   f"supported (only P6)")
        (w, h, maxval), pos = _ppm_tokens(data, pos, 3)
        w, h, maxval = int(w), int(h), int(maxval)
    except ImageFormatError:
        raise
    except ValueError:
        raise ImageFormatError(f"{path}: malformed PPM header") from None
    if maxval != 255:
        raise ImageFormatError(f"{path}: PPM maxval {maxval} not supported "
                               f"(only 8-bit, maxval 255)")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos:pos + w * h * 3]
    if len(pixels) < w * h * 3:
        raise ImageFormatError(f"{path}: PPM pixel data truncated "
                               f"({len(pixels)} of {w * h * 3} bytes)")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w, 3).copy()


def _decode_png(path, data):
    pos = 8
    header = None
    idat = []
    while pos + 8 <= len(data):
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        chunk = data[pos + 8:pos + 8 + length]
        if len(chunk) < length:
            raise ImageFormatError(f"{path}: PNG chunk "
                                   f"{ctype.decode('latin1')} truncated")
        pos += 12 + length  # skip CRC, which we do not verify
        if ctype == b"IHDR":
            header = struct.unpack(">IIBBBBB", chunk)
        elif ctype == b"IDAT":
            idat.append(chunk)
        elif ctype == b"IEND":
            break
    if header is None:
        raise ImageFormatError(f"{path}: PNG is missing its IHDR chunk")

    w, h, depth, color, compression, filt, interlace = header
    if depth != 8:
        raise ImageFormatError(f"{path}: PNG bit depth {depth} not "
                               f"supported (only 8)")
    if color not in (2, 6):
        raise ImageFormatError(f"{path}: PNG color type {color} not "
                               f"supported (only RGB=2 or RGBA=6)")
    if compression != 0 or filt != 0:
        raise ImageFormatError(f"{path}: nonstandard PNG compression or "
                               f"filter method")
    if interlace != 0:
        raise ImageFormatError(f"{path}: interlaced PNG not supported")
    if not idat:
        raise ImageFormatError(f"{path}: PNG has no IDAT data")

    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise ImageFormatError(f"{path}: PNG inflate failed: {exc}") from None

    bpp = 3 if color == 2 else 4
    stride = w * bpp
    if len(raw) != h * (stride + 1):
        raise ImageFormatError(f"{path}: PNG pixel data has {len(raw)} "
                               f"bytes, expected {h * (stride + 1)}")

    rows = np.frombuffer(raw, dtype=np.uint8).reshape(h, stride + 1)
    img = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(h):
        ftype = int(rows[y, 0])
        img[y] = _unfilter_row(path, ftype, rows[y, 1:], prev, bpp)
        prev = img[y]
    img = img.reshape(h, w, bpp)
    return np.ascontiguousarray(img[:, :, :3])


def _unfilter_row(path, ftype, filt, prev, bpp):
    if ftype == 0:
        return filt.copy()
    if ftype == 1:  # Sub: per byte-lane running sum mod 256
        lanes = filt.reshape(-1, bpp).astype(np.int64)
        return (lanes.cumsum(axis=0) & 0xFF).astype(np.uint8).reshape(-1)
    if ftype == 2:  # Up: uint8 addition wraps mod 256 as required
        return filt + prev
    if ftype == 3:  # Average
        out = np.zeros_like(filt)
        for x in range(len(filt)):
            left = int(out[x - bpp]) if x >= bpp else 0
            out[x] = (int(filt[x]) + (left + int(prev[x])) // 2) & 0xFF
        return out
    if ftype == 4:  # Paeth
        out = np.zeros_like(filt)
        for x in range(len(filt)):
            a = int(out[x - bpp]) if x >= bpp else 0
            b = int(prev[x])
            c = int(prev[x - bpp]) if x >= bpp else 0
            p = a + b - c
            pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
            if pa <= pb and pa <= pc:
                pred = a
            elif pb <= pc:
                pred = b
            else:
                pred = c
            out[x] = (int(filt[x]) + pred) & 0xFF
        return out
    raise ImageFormatError(f"{path}: unknown PNG filter type {ftype}")
