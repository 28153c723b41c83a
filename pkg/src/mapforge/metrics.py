"""Segmentation metrics over class masks.

All metrics derive from a single confusion matrix whose rows are the
true class and whose columns are the predicted class, both indexed by
the 1-based class ids used in mask files. A metric whose denominator
is zero (a class absent from both prediction and truth) is reported as
None rather than 0, and macro means average only the defined classes.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class ConfusionMatrix:
    """C x C pixel counts; counts[t - 1][p - 1] is truth t predicted p."""

    class_count: int = 5
    counts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.class_count < 1:
            raise ValidationError("class_count must be positive")
        if self.counts is None:
            self.counts = np.zeros((self.class_count, self.class_count), dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (self.class_count, self.class_count):
                raise ValidationError(
                    f"counts shape {self.counts.shape} does not match class_count {self.class_count}"
                )
            if (self.counts < 0).any():
                raise ValidationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def copy(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.class_count, self.counts.copy())


def accumulate_confusion(pred: np.ndarray, truth: np.ndarray, cm: ConfusionMatrix) -> ConfusionMatrix:
    """Add one pred/truth mask pair into cm (mutates and returns cm)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValidationError(f"mask shapes differ: pred {pred.shape} vs truth {truth.shape}")
    c = cm.class_count
    for name, arr in (("pred", pred), ("truth", truth)):
        if arr.size and (int(arr.min()) < 1 or int(arr.max()) > c):
            raise ValidationError(f"{name} mask holds classes outside 1..{c}")
    idx = (truth.astype(np.int64) - 1) * c + (pred.astype(np.int64) - 1)
    cm.counts += np.bincount(idx.ravel(), minlength=c * c).reshape(c, c)
    return cm


def merge_confusion(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    if a.class_count != b.class_count:
        raise ValidationError("cannot merge confusion matrices of different class counts")
    return ConfusionMatrix(a.class_count, a.counts + b.counts)


@dataclass
class ClassMetrics:
    precision: float | None
    recall: float | None
    f1: float | None
    iou: float | None


@dataclass
class MetricsReport:
    accuracy: float
    kappa: float | None
    micro_f1: float
    per_class: dict[int, ClassMetrics]
    macro_precision: float | None
    macro_recall: float | None
    macro_f1: float | None
    macro_iou: float | None


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


def _mean_defined(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def metrics_report(cm: ConfusionMatrix) -> MetricsReport:
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValidationError("confusion matrix is empty")
    row = counts.sum(axis=1)  # truth marginals
    col = counts.sum(axis=0)  # prediction marginals
    diag = np.diag(counts)

    accuracy = float(diag.sum() / total)
    p_e = float((row * col).sum() / (total * total))
    if p_e >= 1.0:
        # Every pixel sits in one row and one column; agreement beyond
        # chance is meaningless unless observed agreement is also total.
        kappa = 1.0 if accuracy >= 1.0 else None
    else:
        kappa = (accuracy - p_e) / (1.0 - p_e)

    per_class: dict[int, ClassMetrics] = {}
    for i in range(cm.class_count):
        tp = float(diag[i])
        precision = _ratio(tp, float(col[i]))
        recall = _ratio(tp, float(row[i]))
        # F1's own denominator is precision + recall; it is undefined
        # when either factor is undefined or both are zero.
        if precision is None or recall is None or precision + recall == 0:
            f1 = None
        else:
            f1 = 2 * precision * recall / (precision + recall)
        iou = _ratio(tp, float(row[i] + col[i] - tp))
        per_class[i + 1] = ClassMetrics(precision, recall, f1, iou)

    return MetricsReport(
        accuracy=accuracy,
        kappa=kappa,
        micro_f1=accuracy,  # pixel-level F1 over all classes collapses to accuracy
        per_class=per_class,
        macro_precision=_mean_defined([m.precision for m in per_class.values()]),
        macro_recall=_mean_defined([m.recall for m in per_class.values()]),
        macro_f1=_mean_defined([m.f1 for m in per_class.values()]),
        macro_iou=_mean_defined([m.iou for m in per_class.values()]),
    )


def normalize_confusion(cm: ConfusionMatrix) -> tuple[np.ndarray, list[int]]:
    """Row-stochastic matrix plus the 1-based ids of all-zero truth rows."""
    counts = cm.counts.astype(np.float64)
    if counts.sum() <= 0:
        raise ValidationError("confusion matrix is empty")
    row = counts.sum(axis=1)
    zero_rows = [i + 1 for i in range(cm.class_count) if row[i] == 0]
    safe = np.where(row == 0, 1.0, row)
    return counts / safe[:, None], zero_rows


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "kappa": report.kappa,
        "micro_f1": report.micro_f1,
        "macro": {
            "precision": report.macro_precision,
            "recall": report.macro_recall,
            "f1": report.macro_f1,
            "iou": report.macro_iou,
        },
        "per_class": {
            str(cid): {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "iou": m.iou,
            }
            for cid, m in report.per_class.items()
        },
    }


def report_text_from_dict(d: dict) -> str:
    """Human-readable rendering of the report_to_dict form."""

    def fmt(v):
        return "undefined" if v is None else f"{v:.4f}"

    macro = d.get("macro", {})
    lines = [
        f"accuracy      {fmt(d.get('accuracy'))}",
        f"kappa         {fmt(d.get('kappa'))}",
        f"micro_f1      {fmt(d.get('micro_f1'))}",
        f"macro_prec    {fmt(macro.get('precision'))}",
        f"macro_recall  {fmt(macro.get('recall'))}",
        f"macro_f1      {fmt(macro.get('f1'))}",
        f"macro_iou     {fmt(macro.get('iou'))}",
    ]
    for cid in sorted(d.get("per_class", {}), key=int):
        m = d["per_class"][cid]
        lines.append(
            f"class {cid}: precision {fmt(m.get('precision'))}  recall {fmt(m.get('recall'))}  "
            f"f1 {fmt(m.get('f1'))}  iou {fmt(m.get('iou'))}"
        )
    return "\n".join(lines) + "\n"


def report_to_text(report: MetricsReport) -> str:
    return report_text_from_dict(report_to_dict(report))


def write_report(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- adaptive class weights -------------------------------------------------

ACW_DECAY = 0.9


@dataclass
class AcwState:
    """Running per-class pixel frequencies, EMA-updated batch by batch."""

    class_count: int = 5
    decay: float = ACW_DECAY
    freq: np.ndarray = field(default=None)  # type: ignore[assignment]
    iterations: int = 0

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValidationError("decay must lie in (0, 1)")
        if self.freq is None:
            self.freq = np.zeros(self.class_count, dtype=np.float64)
        else:
            self.freq = np.asarray(self.freq, dtype=np.float64)


def acw_update(state: AcwState, batch_truth: np.ndarray) -> tuple[AcwState, list[float | None]]:
    """Fold one batch of truth labels into the running frequencies and
    return the rebalancing weight per class.

    The first batch seeds the frequencies directly; later batches blend
    with factor `decay` on the running value. Weights are median(f)/f_c
    over classes seen so far, scaled so their mean is 1; a class never
    seen yet gets None.
    """
    batch = np.asarray(batch_truth)
    if batch.size == 0:
        raise ValidationError("batch must be nonempty")
    c = state.class_count
    if int(batch.min()) < 1 or int(batch.max()) > c:
        raise ValidationError(f"batch holds classes outside 1..{c}")
    counts = np.bincount(batch.ravel().astype(np.int64) - 1, minlength=c)
    batch_freq = counts / counts.sum()
    if state.iterations == 0:
        state.freq = batch_freq
    else:
        state.freq = state.decay * state.freq + (1.0 - state.decay) * batch_freq
    state.iterations += 1

    defined = [i for i in range(c) if state.freq[i] > 0]
    weights: list[float | None] = [None] * c
    if defined:
        med = statistics.median(float(state.freq[i]) for i in defined)
        raw = {i: med / float(state.freq[i]) for i in defined}
        mean_raw = sum(raw.values()) / len(raw)
        for i in defined:
            weights[i] = raw[i] / mean_raw
    return state, weights
