"""Image-to-tensor preprocessing.

A captured speckle image is reduced to the single color plane matching
the laser source, resampled to the network's input side, and scaled to
[0, 1]. Everything downstream sees only the selected plane, so edits to
the other two channels can never change a prediction.
"""

import enum

import numpy as np

from .errors import ShapeError


class LaserColor(enum.Enum):
    """Laser color and its plane index in RGB byte order."""
    RED = 0
    GREEN = 1
    BLUE = 2

    @property
    def channel(self):
        return self.value

    @classmethod
    def from_name(cls, name):
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown laser color {name!r}: expected "
                             f"red, green or blue") from None


def extract_channel(img, laser):
    """Select the plane matching the laser color from an RGB image
    (H, W, 3); the other two planes are discarded."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"extract_channel: expected an (H, W, 3) RGB "
                         f"image, got shape {img.shape}")
    return np.ascontiguousarray(img[:, :, laser.channel])


def _axis_coords(src, dst):
    """Source sample positions for half-pixel-center bilinear mapping."""
    s = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    s = np.clip(s, 0.0, src - 1)
    lo = np.floor(s).astype(np.intp)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, s - lo


def resize_bilinear(plane, target_side):
    """Resample a 2-D plane to target_side x target_side.

    Bilinear with half-pixel-center alignment; constant planes stay
    constant exactly. Returns float64 values in the input's range.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ShapeError(f"resize_bilinear: expected a 2-D plane, got "
                         f"shape {plane.shape}")
    if target_side < 1:
        raise ShapeError(f"resize_bilinear: target side must be >= 1, "
                         f"got {target_side}")
    h, w = plane.shape
    y0, y1, fy = _axis_coords(h, target_side)
    x0, x1, fx = _axis_coords(w, target_side)

    rows = plane[y0, :] + fy[:, None] * (plane[y1, :] - plane[y0, :])
    out = rows[:, x0] + fx[None, :] * (rows[:, x1] - rows[:, x0])
    return out


def center_crop(plane, target_side):
    """Crop the central target_side x target_side window."""
    plane = np.asarray(plane)
    h, w = plane.shape
    if h < target_side or w < target_side:
        raise ShapeError(f"center_crop: source {h}x{w} smaller than "
                         f"target {target_side}x{target_side}")
    oy = (h - target_side) // 2
    ox = (w - target_side) // 2
    return plane[oy:oy + target_side, ox:ox + target_side]


def normalize(plane):
    """Scale 8-bit sample values to [0, 1] float32 with a trailing
    channel axis: output shape (side, side, 1)."""
    plane = np.asarray(plane, dtype=np.float64)
    return (plane / 255.0).astype(np.float32)[:, :, None]


def preprocess(img, laser, side, crop=False):
    """Full pipeline: extract the laser plane, resize (or center-crop
    when crop=True) to `side`, normalize to a float32 tensor."""
    plane = extract_channel(img, laser)
    if crop:
        plane = center_crop(plane, side).astype(np.float64)
    else:
        plane = resize_bilinear(plane, side)
    return normalize(plane)
