"""Exact-match scoring and error-type analysis.

A predicted quad counts as correct only when every element equals the gold
annotation. Precision, recall, and F1 are micro-averaged over the corpus:
true positives, predicted counts, and gold counts are summed across
examples before the ratios are taken. Both sides are treated as sets per
example, so duplicated predictions neither help nor hurt.

Error analysis attributes each wrong prediction to the gold quad it
overlaps most, counting every mismatched element; independently, quads
whose elements fall outside their legal domains (vocabulary, sentence
spans, polarity words) count as generation errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .core import SentimentQuad
from .recover import ParsedQuad

#: How generation errors interact with element attribution.
COUNT_MODES = ("overlapping", "exclusive")


@dataclass(frozen=True)
class EvalReport:
    """Micro-averaged precision/recall/F1 with the underlying counts."""

    tp: int
    n_pred: int
    n_gold: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gold: int) -> "EvalReport":
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_gold if n_gold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, n_pred, n_gold, precision, recall, f1)

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "n_pred": self.n_pred,
            "n_gold": self.n_gold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class ErrorBreakdown:
    """Counts of wrong quads per mistake type."""

    aspect_term: int = 0
    opinion_term: int = 0
    category: int = 0
    polarity: int = 0
    generation: int = 0
    total_wrong: int = 0

    def as_dict(self) -> dict:
        return {
            "aspect_term": self.aspect_term,
            "opinion_term": self.opinion_term,
            "category": self.category,
            "polarity": self.polarity,
            "generation": self.generation,
            "total_wrong": self.total_wrong,
        }


def _as_key(quad: object) -> Hashable:
    if isinstance(quad, (SentimentQuad, ParsedQuad)):
        return quad.key()
    return quad  # already a hashable key


def score(
    preds: Sequence[Iterable[object]],
    golds: Sequence[Iterable[object]],
) -> EvalReport:
    """Micro-averaged exact-match scores over aligned per-example quad sets.

    Accepts SentimentQuad, ParsedQuad, or plain hashable keys on either
    side; each example's collection is deduplicated before counting.
    """
    if len(preds) != len(golds):
        raise ValueError(
            f"prediction/gold example counts differ: {len(preds)} vs {len(golds)}"
        )
    tp = n_pred = n_gold = 0
    for pred_quads, gold_quads in zip(preds, golds):
        pred_set = {_as_key(q) for q in pred_quads}
        gold_set = {_as_key(q) for q in gold_quads}
        tp += len(pred_set & gold_set)
        n_pred += len(pred_set)
        n_gold += len(gold_set)
    return EvalReport.from_counts(tp, n_pred, n_gold)


def detect_generation_error(parsed: ParsedQuad) -> set[str]:
    """Labels of the validity flags that are False (empty set when valid)."""
    return set(parsed.invalid_flags())


_ELEMENTS = ("category", "aspect", "opinion", "polarity")
_ELEMENT_COUNTERS = {
    "category": "category",
    "aspect": "aspect_term",
    "opinion": "opinion_term",
    "polarity": "polarity",
}


def _element_matches(pred: ParsedQuad, gold: SentimentQuad) -> dict[str, bool]:
    return {
        "category": pred.category == gold.category,
        "aspect": pred.aspect == gold.aspect,
        "opinion": pred.opinion == gold.opinion,
        "polarity": pred.polarity == gold.polarity,
    }


def categorize_errors(
    parsed_preds: Sequence[Sequence[ParsedQuad]],
    golds: Sequence[Iterable[SentimentQuad]],
    count_mode: str = "overlapping",
) -> ErrorBreakdown:
    """Tally mistake types over aligned predictions and gold quad sets.

    Each incorrect prediction is matched to the gold quad sharing the most
    elements (ties broken by gold order; with no golds, all four elements
    count as wrong) and every mismatched element increments its counter.
    Any false validity flag additionally counts one generation error; in
    "exclusive" mode a flagged quad counts only as a generation error.
    """
    if count_mode not in COUNT_MODES:
        raise ValueError(f"count_mode must be one of {COUNT_MODES}")
    if len(parsed_preds) != len(golds):
        raise ValueError(
            f"prediction/gold example counts differ: {len(parsed_preds)} vs {len(golds)}"
        )

    counters = {name: 0 for name in ErrorBreakdown().as_dict()}
    for preds, gold_quads in zip(parsed_preds, golds):
        gold_list = list(dict.fromkeys(gold_quads))
        gold_keys = {g.key() for g in gold_list}
        for pred in dict.fromkeys(preds):
            if pred.key() in gold_keys:
                continue
            counters["total_wrong"] += 1
            flagged = bool(detect_generation_error(pred))
            if flagged:
                counters["generation"] += 1
                if count_mode == "exclusive":
                    continue
            if gold_list:
                matches = max(
                    (_element_matches(pred, g) for g in gold_list),
                    key=lambda m: sum(m.values()),
                )
            else:
                matches = {element: False for element in _ELEMENTS}
            for element, equal in matches.items():
                if not equal:
                    counters[_ELEMENT_COUNTERS[element]] += 1
    return ErrorBreakdown(**counters)
