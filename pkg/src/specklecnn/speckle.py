"""Synthetic speckle data for desk-scale training runs.

A complex Gaussian random field is low-pass filtered by a circular
frequency mask and transformed back; its intensity gives fully developed
speckle (approximately exponential before the contrast mapping). The mask
radius controls grain size, the contrast/background mapping sets the
8-bit output range:

    value = background * (1 + contrast * (I / mean(I) - 1))

Classes written by synth_dataset differ in (mask_radius, contrast), drawn
from a documented grid, so they are separable by construction.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imageio import save_ppm

#: Grid corners for per-class parameter sweeps.
RADIUS_RANGE = (0.05, 0.4)
CONTRAST_RANGE = (1.0, 0.45)

#: Amplitude of the filler noise in the two non-laser channels.
OFF_CHANNEL_NOISE = 10


@dataclass
class SpeckleParams:
    """One speckle plane's recipe; identical params give identical output."""
    grid: int
    mask_radius: float
    contrast: float
    background: float = 110.0
    seed: int = 0

    def validate(self):
        if self.grid < 1:
            raise ValueError(f"grid must be >= 1, got {self.grid}")
        if not 0.0 < self.mask_radius <= 0.5:
            raise ValueError(f"mask_radius must be in (0, 0.5], got "
                             f"{self.mask_radius}")
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError(f"contrast must be in [0, 1], got "
                             f"{self.contrast}")
        if not 0.0 <= self.background <= 255.0:
            raise ValueError(f"background must be in [0, 255], got "
                             f"{self.background}")


def synth_speckle(p):
    """Render one speckle plane as a (grid, grid) uint8 array."""
    p.validate()
    rng = np.random.default_rng(p.seed)
    field = (rng.standard_normal((p.grid, p.grid))
             + 1j * rng.standard_normal((p.grid, p.grid)))

    f = np.fft.fftfreq(p.grid)
    mask = (f[:, None] ** 2 + f[None, :] ** 2) <= p.mask_radius ** 2
    intensity = np.abs(np.fft.ifft2(field * mask)) ** 2

    mean = intensity.mean()
    if mean > 0:
        intensity /= mean
    else:
        intensity = np.ones_like(intensity)
    value = p.background * (1.0 + p.contrast * (intensity - 1.0))
    return np.clip(np.rint(value), 0, 255).astype(np.uint8)


def class_params_grid(class_count):
    """Per-class (mask_radius, contrast) assignments.

    Radii sweep RADIUS_RANGE geometrically, contrasts sweep
    CONTRAST_RANGE linearly; class k takes radius k mod n_r and contrast
    k div n_r.
    """
    n_r = int(np.ceil(np.sqrt(class_count)))
    n_c = int(np.ceil(class_count / n_r))
    radii = np.geomspace(*RADIUS_RANGE, num=n_r) if n_r > 1 \
        else np.array([RADIUS_RANGE[0]])
    contrasts = np.linspace(*CONTRAST_RANGE, num=n_c) if n_c > 1 \
        else np.array([CONTRAST_RANGE[0]])
    return [(float(radii[k % n_r]), float(contrasts[k // n_r]))
            for k in range(class_count)]


def _compose_rgb(plane, laser, noise_rng, background):
    """Place the pattern in the laser's channel; fill the other two with
    independent low-amplitude noise around the background level."""
    side = plane.shape[0]
    noise = noise_rng.integers(-OFF_CHANNEL_NOISE, OFF_CHANNEL_NOISE + 1,
                               size=(side, side, 2))
    filler = np.clip(background + noise, 0, 255).astype(np.uint8)
    rgb = np.zeros((side, side, 3), dtype=np.uint8)
    others = [c for c in range(3) if c != laser.channel]
    rgb[:, :, laser.channel] = plane
    rgb[:, :, others[0]] = filler[:, :, 0]
    rgb[:, :, others[1]] = filler[:, :, 1]
    return rgb


def synth_dataset(class_count, per_class, side, out_dir, laser, seed):
    """Write a class-per-folder PPM tree plus manifest.csv; returns the
    ordered class-name list. Regeneration with the same arguments is
    bit-identical."""
    if class_count < 2:
        raise ValueError(f"class_count must be >= 2, got {class_count}")
    if per_class < 1:
        raise ValueError(f"per_class must be >= 1, got {per_class}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = class_params_grid(class_count)
    width = max(2, len(str(class_count - 1)))
    class_names = [f"mat{k:0{width}d}" for k in range(class_count)]

    rows = []
    for k, name in enumerate(class_names):
        mask_radius, contrast = grid[k]
        class_dir = out / name
        class_dir.mkdir(exist_ok=True)
        for j in range(per_class):
            s_speckle, s_noise = (
                int(v) for v in
                np.random.SeedSequence([seed, k, j]).generate_state(2))
            params = SpeckleParams(grid=side, mask_radius=mask_radius,
                                   contrast=contrast, seed=s_speckle)
            plane = synth_speckle(params)
            rgb = _compose_rgb(plane, laser,
                               np.random.default_rng(s_noise),
                               params.background)
            rel = f"{name}/img{j:04d}.ppm"
            save_ppm(out / rel, rgb)
            rows.append((rel, name, s_speckle, mask_radius, contrast))

    with open(out / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "class", "seed", "mask_radius", "contrast"])
        writer.writerows(rows)
    return class_names
