"""Feature templates for POS tagging and chunking, plus the BIO bridge
between chunked sentences and per-token label sequences.

Feature strings carry a template prefix and an extracted value:

    w=ଭଲ  pre2=ଭଲ  suf1=ଲ  len=2  w[-1]=<BOS>  w[+1]=ପିଲାକୁ
    pos=JJ  pos[-1]=<BOS>  pos[+1]=NN

Character units are Unicode code points after NFC normalization, so Indic
matras count as characters.  Affixes longer than the word are not emitted.
Out-of-range window positions produce the sentinels <BOS> and <EOS>, which
are reserved and rejected as real tokens.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Sequence

from .corpus import Chunk, Token
from .errors import LengthMismatchError

BOS = "<BOS>"
EOS = "<EOS>"


@dataclass(frozen=True)
class PosTemplateConfig:
    """Template parameters for POS features: max prefix length, max suffix
    length, and token context window radius."""

    prefix_max: int = 4
    suffix_max: int = 7
    window: int = 1

    def __post_init__(self):
        if min(self.prefix_max, self.suffix_max, self.window) < 0:
            raise ValueError("template parameters must be non-negative")


@dataclass(frozen=True)
class ChunkTemplateConfig:
    """Template parameters for chunk features: token window radius and POS
    tag window radius."""

    word_window: int = 1
    pos_window: int = 1

    def __post_init__(self):
        if min(self.word_window, self.pos_window) < 0:
            raise ValueError("template parameters must be non-negative")


def _normalize_tokens(tokens: Sequence[str]) -> list[str]:
    if not tokens:
        raise ValueError("token sequence must be non-empty")
    out = []
    for tok in tokens:
        tok = unicodedata.normalize("NFC", tok)
        if tok in (BOS, EOS):
            raise ValueError(f"{tok!r} is reserved as a context sentinel")
        out.append(tok)
    return out


def _window(values: Sequence[str], i: int, radius: int, tag: str) -> list[str]:
    feats = []
    for d in range(1, radius + 1):
        left = values[i - d] if i - d >= 0 else BOS
        right = values[i + d] if i + d < len(values) else EOS
        feats.append(f"{tag}[-{d}]={left}")
        feats.append(f"{tag}[+{d}]={right}")
    return feats


def pos_features(
    tokens: Sequence[str], cfg: PosTemplateConfig | None = None
) -> list[list[str]]:
    """Per-position feature strings for the POS task.

    Each position gets the current word, prefixes of length 1..min(m, L),
    suffixes of length 1..min(n, L), the word length, and the word context
    window of radius s.
    """
    cfg = cfg or PosTemplateConfig()
    words = _normalize_tokens(tokens)
    vectors = []
    for i, w in enumerate(words):
        length = len(w)
        feats = [f"w={w}"]
        for k in range(1, min(cfg.prefix_max, length) + 1):
            feats.append(f"pre{k}={w[:k]}")
        for k in range(1, min(cfg.suffix_max, length) + 1):
            feats.append(f"suf{k}={w[-k:]}")
        feats.append(f"len={length}")
        feats.extend(_window(words, i, cfg.window, "w"))
        vectors.append(feats)
    return vectors


def chunk_features(
    tokens: Sequence[str],
    pos_tags: Sequence[str],
    cfg: ChunkTemplateConfig | None = None,
) -> list[list[str]]:
    """Per-position feature strings for the chunk task: current word,
    current POS, and word/POS context windows."""
    cfg = cfg or ChunkTemplateConfig()
    if len(tokens) != len(pos_tags):
        raise LengthMismatchError(
            f"{len(tokens)} tokens but {len(pos_tags)} POS tags"
        )
    words = _normalize_tokens(tokens)
    tags = [unicodedata.normalize("NFC", t) for t in pos_tags]
    vectors = []
    for i, (w, p) in enumerate(zip(words, tags)):
        feats = [f"w={w}", f"pos={p}"]
        feats.extend(_window(words, i, cfg.word_window, "w"))
        feats.extend(_window(tags, i, cfg.pos_window, "pos"))
        vectors.append(feats)
    return vectors


# ---------------------------------------------------------------------------
# BIO encoding


def chunks_to_bio(sentence) -> list[str]:
    """Encode a sentence's chunking as per-token BIO labels.

    The first token of each chunk gets ``B-label``, the rest ``I-label``;
    tokens outside any chunk get ``O``.
    """
    labels: list[str] = []
    for el in sentence.elements:
        if isinstance(el, Chunk):
            labels.append(f"B-{el.label}")
            labels.extend(f"I-{el.label}" for _ in el.tokens[1:])
        else:
            labels.append("O")
    return labels


def _split_bio(label: str) -> tuple[str, str | None]:
    if label == "O":
        return "O", None
    if len(label) > 2 and label[1] == "-" and label[0] in "BI":
        return label[0], label[2:]
    raise ValueError(f"not a BIO label: {label!r}")


def repair_bio(labels: Sequence[str]) -> list[str]:
    """Rewrite an arbitrary BIO-shaped sequence into a well-formed one.

    An I-X that follows the sentence start, an O, or a different chunk
    label is treated as B-X.  Decoders must accept any model output, so
    this never rejects; it only raises for strings that are not BIO-shaped
    at all.
    """
    repaired: list[str] = []
    prev_chunk: str | None = None
    for label in labels:
        prefix, name = _split_bio(label)
        if prefix == "I" and name != prev_chunk:
            label = f"B-{name}"
        repaired.append(label)
        prev_chunk = name
    return repaired


def is_well_formed_bio(labels: Sequence[str]) -> bool:
    """True iff no I-X follows the start, an O, or a different label."""
    prev_chunk: str | None = None
    for label in labels:
        prefix, name = _split_bio(label)
        if prefix == "I" and name != prev_chunk:
            return False
        prev_chunk = name
    return True


def bio_to_elements(
    tokens: Sequence[Token], bio: Sequence[str]
) -> tuple[Chunk | Token, ...]:
    """Decode BIO labels (repairing first) into ordered sentence elements:
    chunks for maximal B/I runs, bare tokens for O positions."""
    if len(tokens) != len(bio):
        raise LengthMismatchError(f"{len(tokens)} tokens but {len(bio)} BIO labels")
    labels = repair_bio(bio)
    elements: list[Chunk | Token] = []
    run_label: str | None = None
    run_tokens: list[Token] = []

    def flush():
        nonlocal run_label, run_tokens
        if run_label is not None:
            elements.append(Chunk(run_label, tuple(run_tokens)))
            run_label, run_tokens = None, []

    for tok, label in zip(tokens, labels):
        prefix, name = _split_bio(label)
        if prefix == "O":
            flush()
            elements.append(tok)
        elif prefix == "B":
            flush()
            run_label, run_tokens = name, [tok]
        else:  # I continuing the current run (guaranteed by repair)
            run_tokens.append(tok)
    flush()
    return tuple(elements)


def bio_to_chunks(tokens: Sequence[Token], bio: Sequence[str]) -> list[Chunk]:
    """Decode BIO labels into the chunk list, dropping O tokens."""
    return [el for el in bio_to_elements(tokens, bio) if isinstance(el, Chunk)]
