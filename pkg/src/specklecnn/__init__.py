"""Single-channel laser-speckle material classifier.

Train a small convolutional network on the color plane matching the
laser source, evaluate with per-class precision/recall/F1, and generate
synthetic speckle datasets for desk-scale experiments.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import Dataset, make_batches, scan_dataset, split_train_val
from .kernels import BACKEND
from .metrics import (ClassificationReport, ConfusionMatrix, confusion,
                      evaluate, precision_recall_f1, report)
from .model import (ForwardTrace, NetworkParams, build_network, forward,
                    loss_and_gradients, predict)
from .optimizer import AdamaxState, adamax_init, adamax_step
from .preprocess import LaserColor, preprocess
from .speckle import SpeckleParams, synth_dataset, synth_speckle
from .training import TrainConfig, run_training

__version__ = "0.1.0"

__all__ = [
    "AdamaxState", "BACKEND", "ClassificationReport", "ConfusionMatrix",
    "Dataset", "ForwardTrace", "LaserColor", "NetworkParams",
    "SpeckleParams", "TrainConfig", "adamax_init", "adamax_step",
    "build_network", "confusion", "evaluate", "forward",
    "load_checkpoint", "loss_and_gradients", "make_batches", "predict",
    "precision_recall_f1", "preprocess", "report", "run_training",
    "save_checkpoint", "scan_dataset", "split_train_val", "synth_dataset",
    "synth_speckle",
]
