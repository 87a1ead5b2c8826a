"""Training loop: Adamax over shuffled mini-batches with history logging.

Per-epoch history rows carry running training loss/accuracy (measured on
each batch before its update, as a streaming fit would report) and full
validation loss/accuracy. The checkpoint with the best validation
accuracy so far is kept; everything is reproducible from the seed.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .checkpoint import save_checkpoint
from .dataset import load_remap, make_batches, scan_dataset, split_train_val
from .model import _batch_pass, build_network, forward
from .optimizer import adamax_init, adamax_step
from . import ops


@dataclass
class TrainConfig:
    data_dir: str
    out_path: str
    history_path: str
    laser: object
    input_side: int = 256
    epochs: int = 100
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 32
    val_fraction: float = 0.2
    seed: int = 0
    remap_path: str = None
    crop: bool = False

    def validate(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")

    def metadata(self, class_names, epoch):
        """Checkpoint metadata: config echo without filesystem paths."""
        return {
            "class_names": class_names,
            "laser": self.laser.name.lower(),
            "seed": self.seed,
            "epoch": epoch,
            "input_side": self.input_side,
            "epochs": self.epochs,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "batch_size": self.batch_size,
            "val_fraction": self.val_fraction,
            "crop": self.crop,
        }


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


def _onehot(label, class_count, dtype):
    v = np.zeros(class_count, dtype=dtype)
    v[label] = 1
    return v


def eval_loss_acc(params, samples, class_count):
    """Mean loss and accuracy of `params` over (tensor, label) samples."""
    total = 0.0
    correct = 0
    for tensor, label in samples:
        probs = forward(params, tensor).probs
        onehot = _onehot(label, class_count, params.dtype)
        total += ops.cross_entropy(probs, onehot)
        if int(np.argmax(probs)) == label:
            correct += 1
    n = len(samples)
    return total / n, correct / n


def run_training(config, log=None):
    """Train per `config`; returns (history list, best_epoch).

    Writes one history CSV row per epoch as it finishes and saves the
    checkpoint whenever validation accuracy improves.
    """
    config.validate()
    log = log or (lambda msg: None)

    remap = load_remap(config.remap_path) if config.remap_path else None
    ds = scan_dataset(config.data_dir, config.laser, config.input_side,
                      crop=config.crop, remap=remap)
    train, val = split_train_val(ds, config.val_fraction, config.seed)
    log(f"dataset: {len(ds)} samples, {ds.class_count} classes "
        f"({len(train)} train / {len(val)} val)")

    params = build_network(config.input_side, ds.class_count, config.seed)
    state = adamax_init(params, alpha=config.lr, beta1=config.beta1,
                        beta2=config.beta2)

    history = []
    best_acc = -1.0
    best_epoch = 0
    with open(config.history_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_acc",
                         "val_loss", "val_acc"])
        for epoch in range(1, config.epochs + 1):
            batches = make_batches(train, config.batch_size,
                                   epoch_seed=[config.seed, epoch])
            loss_sum = 0.0
            correct = 0
            for batch in batches:
                pairs = [(tensor, _onehot(label, ds.class_count,
                                          params.dtype))
                         for tensor, label in batch]
                mean_loss, grads, batch_correct = _batch_pass(params, pairs)
                loss_sum += mean_loss * len(batch)
                correct += batch_correct
                adamax_step(params, grads, state)
            train_loss = loss_sum / len(train)
            train_acc = correct / len(train)
            val_loss, val_acc = eval_loss_acc(params, val.samples,
                                              ds.class_count)
            stats = EpochStats(epoch, train_loss, train_acc,
                               val_loss, val_acc)
            history.append(stats)
            writer.writerow([epoch, f"{train_loss:.6f}",
                             f"{train_acc:.6f}", f"{val_loss:.6f}",
                             f"{val_acc:.6f}"])
            fh.flush()
            log(f"epoch {epoch}/{config.epochs}: "
                f"train_loss={train_loss:.4f} train_acc={train_acc:.4f} "
                f"val_loss={val_loss:.4f} val_acc={val_acc:.4f}")
            if val_acc > best_acc:
                best_acc = val_acc
                best_epoch = epoch
                save_checkpoint(params,
                                config.metadata(ds.class_names, epoch),
                                config.out_path)
    log(f"best validation accuracy {best_acc:.4f} at epoch {best_epoch}; "
        f"checkpoint: {config.out_path}")
    return history, best_epoch
