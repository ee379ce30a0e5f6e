"""Exact-span, exact-label scoring of predicted against gold annotations."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .document import AnnotatedDoc


class AlignmentError(ValueError):
    def __init__(self, message: str, doc_index: int | None = None):
        self.doc_index = doc_index
        prefix = f"document {doc_index}: " if doc_index is not None else ""
        super().__init__(prefix + message)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "Counts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    @property
    def scores(self) -> tuple[float, float, float]:
        return prf(self.tp, self.fp, self.fn)


@dataclass
class Alignment:
    true_positives: list = field(default_factory=list)
    false_positives: list = field(default_factory=list)
    false_negatives: list = field(default_factory=list)


def align(gold: AnnotatedDoc, pred: AnnotatedDoc) -> Alignment:
    if gold.text != pred.text:
        raise AlignmentError("gold and predicted raw text differ")
    remaining = Counter(a.key() for a in gold.annotations)
    out = Alignment()
    for ann in pred.annotations:
        k = ann.key()
        if remaining[k] > 0:
            remaining[k] -= 1
            out.true_positives.append(ann)
        else:
            out.false_positives.append(ann)
    for ann in gold.annotations:
        k = ann.key()
        if remaining[k] > 0:
            remaining[k] -= 1
            out.false_negatives.append(ann)
    return out


@dataclass
class EvalReport:
    true_positive: int = 0
    false_positive: int = 0
    false_negative: int = 0
    per_label: dict[str, Counts] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return prf(self.true_positive, self.false_positive, self.false_negative)[0]

    @property
    def recall(self) -> float:
        return prf(self.true_positive, self.false_positive, self.false_negative)[1]

    @property
    def f1(self) -> float:
        return prf(self.true_positive, self.false_positive, self.false_negative)[2]

    def table(self, name: str = "EVAD") -> str:
        """Plain-text table: Recall, Precision, F1-Score to four places."""
        width = max([len(name)] + [len(k) for k in self.per_label]) + 2
        rows = [f"{'':<{width}}{'Recall':>10}{'Precision':>11}{'F1-Score':>10}",
                f"{name:<{width}}{self.recall:>10.4f}{self.precision:>11.4f}{self.f1:>10.4f}"]
        if self.per_label:
            rows.append("")
            for label in sorted(self.per_label):
                p, r, f = self.per_label[label].scores
                rows.append(f"{label:<{width}}{r:>10.4f}{p:>11.4f}{f:>10.4f}")
        return "\n".join(rows) + "\n"

    def dump(self) -> str:
        lines = [f"tp={self.true_positive}", f"fp={self.false_positive}",
                 f"fn={self.false_negative}", f"precision={self.precision:.4f}",
                 f"recall={self.recall:.4f}", f"f1={self.f1:.4f}"]
        for label in sorted(self.per_label):
            c = self.per_label[label]
            p, r, f = c.scores
            lines.append(f"label.{label}=tp:{c.tp},fp:{c.fp},fn:{c.fn},"
                         f"p:{p:.4f},r:{r:.4f},f1:{f:.4f}")
        return "\n".join(lines) + "\n"


def _label_key(ann) -> str:
    return ann.label if ann.attribute is None else f"{ann.label}={ann.attribute}"


def score(corpus_gold: Iterable[AnnotatedDoc], corpus_pred: Iterable[AnnotatedDoc]) -> EvalReport:
    gold_docs, pred_docs = list(corpus_gold), list(corpus_pred)
    if len(gold_docs) != len(pred_docs):
        raise AlignmentError(f"gold has {len(gold_docs)} documents, prediction "
                             f"has {len(pred_docs)}")
    report = EvalReport()
    for i, (g, p) in enumerate(zip(gold_docs, pred_docs)):
        try:
            al = align(g, p)
        except AlignmentError as exc:
            raise AlignmentError(str(exc), i) from None
        for bucket, attr in ((al.true_positives, "tp"), (al.false_positives, "fp"),
                             (al.false_negatives, "fn")):
            for ann in bucket:
                c = report.per_label.setdefault(_label_key(ann), Counts())
                setattr(c, attr, getattr(c, attr) + 1)
        report.true_positive += len(al.true_positives)
        report.false_positive += len(al.false_positives)
        report.false_negative += len(al.false_negatives)
    return report
