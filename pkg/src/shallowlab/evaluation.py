"""Scoring and agreement statistics.

POS scoring is token-level with macro-averaged P/R/F1 as the headline
(plus accuracy, which equals micro P and R when every token carries one
label).  Chunk scoring is exact span+label matching, micro-averaged over
the corpus, with an optional per-token BIO variant.  Any score with a
zero denominator reports 0 and the label is flagged in the report.

Fleiss' kappa follows the standard formulation over an item x rater
label matrix:

              P̄o - P̄e                 sum_j n_ij (n_ij - 1)
    kappa = -----------    with  P_i = ---------------------,  P̄e = sum_j p_j^2
              1 - P̄e                        n (n - 1)
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import Chunk, Corpus, Sentence
from .errors import (
    DegenerateAgreementError,
    InsufficientRatersError,
    TokenMismatchError,
)
from .features import chunks_to_bio


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    accuracy: float | None
    per_label: dict[str, LabelScore]
    zero_division_labels: tuple[str, ...]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of (gold label, predicted label) pairs."""

    counts: dict[tuple[str, str], int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def row_sum(self, gold_label: str) -> int:
        return sum(c for (g, _), c in self.counts.items() if g == gold_label)


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    raters: int
    items: int


def _prf(tp: int, pred: int, gold: int) -> tuple[float, float, float, bool]:
    zero_division = pred == 0 or gold == 0
    p = tp / pred if pred else 0.0
    r = tp / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1, zero_division


def _aligned_sentences(gold: Corpus, predicted: Corpus) -> list[tuple[Sentence, Sentence]]:
    if len(gold.sentences) != len(predicted.sentences):
        raise TokenMismatchError(
            f"gold has {len(gold.sentences)} sentences, predicted has "
            f"{len(predicted.sentences)}"
        )
    pairs = []
    for g_sent, p_sent in zip(gold.sentences, predicted.sentences):
        if [t.text for t in g_sent.tokens] != [t.text for t in p_sent.tokens]:
            raise TokenMismatchError(
                f"sentence {g_sent.id}: token sequences differ; "
                "evaluation refuses to align heuristically"
            )
        pairs.append((g_sent, p_sent))
    return pairs


def _score_label_pairs(pairs: list[tuple[str, str]]) -> tuple[EvalReport, ConfusionMatrix]:
    confusion: Counter[tuple[str, str]] = Counter()
    tp: Counter[str] = Counter()
    gold_support: Counter[str] = Counter()
    pred_support: Counter[str] = Counter()
    matches = 0
    for g, p in pairs:
        confusion[(g, p)] += 1
        gold_support[g] += 1
        pred_support[p] += 1
        if g == p:
            tp[g] += 1
            matches += 1

    labels = sorted(set(gold_support) | set(pred_support))
    per_label: dict[str, LabelScore] = {}
    flagged: list[str] = []
    for label in labels:
        p, r, f1, zero_div = _prf(tp[label], pred_support[label], gold_support[label])
        per_label[label] = LabelScore(p, r, f1, gold_support[label])
        if zero_div:
            flagged.append(label)

    n = len(labels)
    macro_p = sum(s.precision for s in per_label.values()) / n if n else 0.0
    macro_r = sum(s.recall for s in per_label.values()) / n if n else 0.0
    macro_f1 = sum(s.f1 for s in per_label.values()) / n if n else 0.0
    accuracy = matches / len(pairs) if pairs else 0.0
    report = EvalReport(macro_p, macro_r, macro_f1, accuracy, per_label, tuple(flagged))
    return report, ConfusionMatrix(dict(sorted(confusion.items())))


def eval_pos(gold: Corpus, predicted: Corpus) -> tuple[EvalReport, ConfusionMatrix]:
    """Token-level POS scores over aligned corpora.

    Both corpora must carry a POS tag on every token and share the exact
    token sequence; otherwise TokenMismatchError is raised.
    """
    pairs: list[tuple[str, str]] = []
    for g_sent, p_sent in _aligned_sentences(gold, predicted):
        for g_tok, p_tok in zip(g_sent.tokens, p_sent.tokens):
            if g_tok.pos is None or p_tok.pos is None:
                raise TokenMismatchError(
                    f"sentence {g_sent.id}: token {g_tok.text!r} is missing a POS tag"
                )
            pairs.append((g_tok.pos, p_tok.pos))
    return _score_label_pairs(pairs)


def _spans(sentence: Sentence) -> set[tuple[str, int, int]]:
    spans = set()
    offset = 0
    for el in sentence.elements:
        if isinstance(el, Chunk):
            spans.add((el.label, offset, offset + len(el.tokens)))
            offset += len(el.tokens)
        else:
            offset += 1
    return spans


def eval_chunks(gold: Corpus, predicted: Corpus, per_token: bool = False) -> EvalReport:
    """Chunk scores over aligned corpora.

    By default a predicted chunk is correct iff its label and exact token
    span both match a gold chunk; P = correct/predicted, R = correct/gold,
    micro over the corpus.  With ``per_token=True`` the corpora are
    compared as per-token BIO label sequences instead (scored like POS,
    including accuracy).
    """
    aligned = _aligned_sentences(gold, predicted)

    if per_token:
        pairs = [
            pair
            for g_sent, p_sent in aligned
            for pair in zip(chunks_to_bio(g_sent), chunks_to_bio(p_sent))
        ]
        report, _ = _score_label_pairs(pairs)
        return report

    tp: Counter[str] = Counter()
    gold_support: Counter[str] = Counter()
    pred_support: Counter[str] = Counter()
    for g_sent, p_sent in aligned:
        g_spans = _spans(g_sent)
        p_spans = _spans(p_sent)
        for label, _, _ in g_spans:
            gold_support[label] += 1
        for label, _, _ in p_spans:
            pred_support[label] += 1
        for label, _, _ in g_spans & p_spans:
            tp[label] += 1

    labels = sorted(set(gold_support) | set(pred_support))
    per_label: dict[str, LabelScore] = {}
    flagged: list[str] = []
    for label in labels:
        p, r, f1, zero_div = _prf(tp[label], pred_support[label], gold_support[label])
        per_label[label] = LabelScore(p, r, f1, gold_support[label])
        if zero_div:
            flagged.append(label)

    p, r, f1, _ = _prf(
        sum(tp.values()), sum(pred_support.values()), sum(gold_support.values())
    )
    return EvalReport(p, r, f1, None, per_label, tuple(flagged))


def fleiss_kappa(ratings) -> AgreementReport:
    """Fleiss' kappa over an item x rater matrix of label strings.

    Requires at least two raters, at least one item, and a label in every
    cell.  Kappa is 1.0 exactly under perfect agreement; if expected
    agreement is 1 while raters disagree, DegenerateAgreementError is
    raised rather than returning NaN.
    """
    rows = [list(row) for row in ratings]
    if not rows:
        raise ValueError("need at least one item")
    n_raters = len(rows[0])
    if any(len(row) != n_raters for row in rows):
        raise ValueError("every item must have the same number of ratings")
    if n_raters < 2:
        raise InsufficientRatersError(f"need at least 2 raters, got {n_raters}")
    if any(not label for row in rows for label in row):
        raise ValueError("every cell must contain a label")

    n_items = len(rows)
    category_totals: Counter[str] = Counter()
    observed = 0.0
    for row in rows:
        cell_counts = Counter(row)
        category_totals.update(cell_counts)
        agree_pairs = sum(c * (c - 1) for c in cell_counts.values())
        observed += agree_pairs / (n_raters * (n_raters - 1))
    observed /= n_items

    total = n_items * n_raters
    expected = sum((c / total) ** 2 for c in category_totals.values())

    if expected == 1.0:
        if observed == 1.0:
            kappa = 1.0
        else:
            raise DegenerateAgreementError(
                "expected agreement is 1 while raters disagree; kappa undefined"
            )
    else:
        kappa = (observed - expected) / (1.0 - expected)
    return AgreementReport(kappa, observed, expected, n_raters, n_items)


def confusion_report(
    cm: ConfusionMatrix, top_k: int
) -> list[tuple[str, str, int]]:
    """The ``top_k`` largest off-diagonal confusions, sorted by descending
    count with lexicographic tie-breaking."""
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    cells = [
        (gold, pred, count)
        for (gold, pred), count in cm.counts.items()
        if gold != pred and count > 0
    ]
    cells.sort(key=lambda cell: (-cell[2], cell[0], cell[1]))
    return cells[:top_k]
