"""Dataset ingestion, splitting and batching.

On-disk layout is one folder per class containing .ppm/.png images.
An optional remap CSV (variant_folder,material) collapses several
capture folders into one material class. All ordering is deterministic:
class names sort lexicographically and files sort by path.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, ImageFormatError
from .imageio import load_image
from .preprocess import preprocess

IMAGE_SUFFIXES = (".ppm", ".png")


@dataclass
class Dataset:
    """Preprocessed samples plus the class vocabulary they index into."""
    class_names: list
    samples: list  # (tensor, class_index) pairs
    laser: object
    seed: int = 0

    @property
    def class_count(self):
        return len(self.class_names)

    def __len__(self):
        return len(self.samples)


def load_remap(path):
    """Read a two-column CSV mapping variant folder names to materials."""
    remap = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise DatasetError(f"{path}: remap rows need exactly two "
                                   f"columns, got {row!r}")
            remap[row[0].strip()] = row[1].strip()
    return remap


def scan_dataset(root_dir, laser, side, crop=False, remap=None):
    """Load every image under root/<class>/ into a Dataset.

    Folders not covered by `remap` keep their own name as the class.
    Decode failures abort with the offending file in the message.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    folders = sorted(p for p in root.iterdir() if p.is_dir())
    if not folders:
        raise DatasetError(f"dataset root {root} has no class folders")

    remap = remap or {}
    labels = {f: remap.get(f.name, f.name) for f in folders}
    class_names = sorted(set(labels.values()))
    index = {name: i for i, name in enumerate(class_names)}

    samples = []
    for folder in folders:
        files = sorted(p for p in folder.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise DatasetError(f"class folder {folder} contains no "
                               f".ppm/.png images")
        for path in files:
            try:
                img = load_image(path)
            except (ImageFormatError, OSError) as exc:
                raise DatasetError(f"failed to decode {path}: {exc}") \
                    from None
            tensor = preprocess(img, laser, side, crop=crop)
            samples.append((tensor, index[labels[folder]]))
    return Dataset(class_names=class_names, samples=samples, laser=laser)


def split_train_val(ds, val_fraction=0.2, seed=0):
    """Stratified split: floor(val_fraction * n) of each class (at least
    one) goes to validation after a seeded per-class shuffle."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got "
                         f"{val_fraction}")
    by_class = {i: [] for i in range(ds.class_count)}
    for pos, (_, label) in enumerate(ds.samples):
        by_class[label].append(pos)

    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for label in range(ds.class_count):
        positions = by_class[label]
        if len(positions) < 2:
            raise DatasetError(
                f"class '{ds.class_names[label]}' has {len(positions)} "
                f"sample(s); need at least 2 to split")
        take = max(1, int(val_fraction * len(positions)))
        perm = rng.permutation(len(positions))
        shuffled = [positions[i] for i in perm]
        val_idx.extend(shuffled[:take])
        train_idx.extend(shuffled[take:])

    def subset(indices):
        return Dataset(class_names=ds.class_names,
                       samples=[ds.samples[i] for i in indices],
                       laser=ds.laser, seed=seed)

    return subset(train_idx), subset(val_idx)


def make_batches(ds, batch_size=32, epoch_seed=0):
    """Shuffle the dataset with `epoch_seed` and chunk it; a final
    partial batch is kept."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.default_rng(epoch_seed)
    order = rng.permutation(len(ds.samples))
    shuffled = [ds.samples[i] for i in order]
    return [shuffled[i:i + batch_size]
            for i in range(0, len(shuffled), batch_size)]
