"""Confusion matrix and per-class precision/recall/F1 reporting.

Metrics are computed from exact integer counts and rounded to 4 decimals
(half-up) only for presentation. Zero denominators yield 0 by convention.
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .model import predict


def round4(x):
    """Round to 4 decimals, half-up, as the report tables do."""
    return float(Decimal(str(x)).quantize(Decimal("0.0001"),
                                          rounding=ROUND_HALF_UP))


@dataclass
class ConfusionMatrix:
    """counts[true][predicted] over an evaluation set."""
    counts: np.ndarray
    class_names: list

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass
class ClassificationReport:
    """Per-class precision/recall/F1 (4-decimal) plus aggregates."""
    class_names: list
    precision: list
    recall: list
    f1: list
    accuracy: float
    macro_f1: float
    samples: int


def confusion(true_labels, predicted_labels, class_count, class_names=None):
    """Count (true, predicted) pairs into a class_count^2 matrix."""
    if len(true_labels) != len(predicted_labels):
        raise ValueError(f"label lists differ in length: "
                         f"{len(true_labels)} vs {len(predicted_labels)}")
    counts = np.zeros((class_count, class_count), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        if not (0 <= t < class_count) or not (0 <= p < class_count):
            raise ValueError(f"label pair ({t}, {p}) out of range for "
                             f"{class_count} classes")
        counts[t, p] += 1
    if class_names is None:
        class_names = [str(i) for i in range(class_count)]
    return ConfusionMatrix(counts=counts, class_names=list(class_names))


def _raw_prf(cm, class_index):
    tp = int(cm.counts[class_index, class_index])
    fp = int(cm.counts[:, class_index].sum()) - tp
    fn = int(cm.counts[class_index, :].sum()) - tp
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return precision, recall, f1


def precision_recall_f1(cm, class_index):
    """(precision, recall, f1) for one class, rounded to 4 decimals."""
    p, r, f = _raw_prf(cm, class_index)
    return round4(p), round4(r), round4(f)


def report(cm):
    """Full per-class report plus accuracy and macro-F1."""
    total = cm.total
    if total == 0:
        raise ValueError("confusion matrix is empty")
    precisions, recalls, f1s, raw_f1s = [], [], [], []
    for i in range(len(cm.class_names)):
        p, r, f = _raw_prf(cm, i)
        raw_f1s.append(f)
        precisions.append(round4(p))
        recalls.append(round4(r))
        f1s.append(round4(f))
    accuracy = int(np.trace(cm.counts)) / total
    macro = sum(raw_f1s) / len(raw_f1s)
    return ClassificationReport(class_names=list(cm.class_names),
                                precision=precisions, recall=recalls,
                                f1=f1s, accuracy=round4(accuracy),
                                macro_f1=round4(macro), samples=total)


def evaluate(params, ds):
    """Predict every sample of `ds`; returns (report, confusion matrix)."""
    if ds.class_count != params.class_count:
        raise ValueError(f"dataset has {ds.class_count} classes but the "
                         f"model expects {params.class_count}")
    true, pred = [], []
    for tensor, label in ds.samples:
        idx, _ = predict(params, tensor)
        true.append(label)
        pred.append(idx)
    cm = confusion(true, pred, ds.class_count, ds.class_names)
    return report(cm), cm


def format_report(rep):
    """Plain-text table mirroring the CSV layout."""
    width = max(len(n) for n in rep.class_names + ["macro_f1"])
    lines = [f"{'class':<{width}}  precision  recall  f1"]
    for i, name in enumerate(rep.class_names):
        lines.append(f"{name:<{width}}  {rep.precision[i]:>9.4f}  "
                     f"{rep.recall[i]:>6.4f}  {rep.f1[i]:.4f}")
    lines.append(f"{'accuracy':<{width}}  {rep.accuracy:.4f}")
    lines.append(f"{'macro_f1':<{width}}  {rep.macro_f1:.4f}")
    lines.append(f"{'samples':<{width}}  {rep.samples}")
    return "\n".join(lines)


def write_report_csv(rep, path):
    """class,precision,recall,f1 rows followed by aggregate rows."""
    with open(path, "w", newline="") as fh:
        fh.write("class,precision,recall,f1\n")
        for i, name in enumerate(rep.class_names):
            fh.write(f"{name},{rep.precision[i]:.4f},{rep.recall[i]:.4f},"
                     f"{rep.f1[i]:.4f}\n")
        fh.write(f"accuracy,{rep.accuracy:.4f},,\n")
        fh.write(f"macro_f1,{rep.macro_f1:.4f},,\n")
        fh.write(f"samples,{rep.samples},,\n")


def write_confusion_csv(cm, path):
    """Plot-ready matrix with class names on both axes."""
    with open(path, "w", newline="") as fh:
        fh.write("true\\pred," + ",".join(cm.class_names) + "\n")
        for i, name in enumerate(cm.class_names):
            row = ",".join(str(int(v)) for v in cm.counts[i])
            fh.write(f"{name},{row}\n")
