"""Document model for shallow-parse annotations.

Tokens carry an optional POS label, chunks group tokens under a chunk
label, and sentences hold an ordered mix of chunks and loose (unchunked)
tokens.  Everything is immutable after construction and normalized to
Unicode NFC, so structural equality and hashing behave predictably.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import cache
from importlib.resources import files
from pathlib import Path

from .errors import OutOfRangeError, UnknownLabelError

#: Strings that may never appear as token text.  The angle-bracket pair is
#: reserved by the feature templates as context sentinels; "((" would be
#: indistinguishable from a chunk-open marker in the SSF profile.
RESERVED_TOKEN_TEXT = frozenset({"<BOS>", "<EOS>", "(("})


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class Token:
    """A single surface token with an optional POS label."""

    text: str
    pos: str | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if any(ch.isspace() for ch in self.text):
            raise ValueError(f"token text may not contain whitespace: {self.text!r}")
        if self.text in RESERVED_TOKEN_TEXT:
            raise ValueError(f"token text {self.text!r} is reserved")
        object.__setattr__(self, "text", _nfc(self.text))
        if self.pos is not None:
            object.__setattr__(self, "pos", _nfc(self.pos))


@dataclass(frozen=True)
class Chunk:
    """A non-recursive group of tokens under a chunk label.

    Chunks never nest; the token tuple is guaranteed non-empty.
    """

    label: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("chunk must contain at least one token")
        if not self.label:
            raise ValueError("chunk label must be non-empty")
        object.__setattr__(self, "label", _nfc(self.label))


@dataclass(frozen=True)
class Sentence:
    """An ordered sequence of chunks and loose tokens with a positive id.

    Tokens outside any chunk are legal (a corpus may be POS-annotated
    only), so ``elements`` mixes Chunk and Token in document order.
    """

    id: int
    elements: tuple[Chunk | Token, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 1:
            raise ValueError(f"sentence id must be a positive integer, got {self.id!r}")
        for el in self.elements:
            if not isinstance(el, (Chunk, Token)):
                raise TypeError(f"sentence element must be Chunk or Token, got {type(el)!r}")

    @property
    def chunks(self) -> tuple[Chunk, ...]:
        return tuple(el for el in self.elements if isinstance(el, Chunk))

    @property
    def tokens(self) -> tuple[Token, ...]:
        """Flat token sequence: chunk contents and loose tokens, in order."""
        out: list[Token] = []
        for el in self.elements:
            if isinstance(el, Chunk):
                out.extend(el.tokens)
            else:
                out.append(el)
        return tuple(out)


@dataclass(frozen=True)
class TagSet:
    """A named, ordered inventory of unique label strings."""

    name: str
    labels: tuple[str, ...]
    _members: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(_nfc(lb) for lb in self.labels)
        for lb in labels:
            if not lb or any(ch.isspace() for ch in lb):
                raise ValueError(f"tagset label must be non-empty and whitespace-free: {lb!r}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"tagset {self.name!r} contains duplicate labels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_members", frozenset(labels))

    def __contains__(self, label: str) -> bool:
        return label in self._members

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


def parse_tagset(text: str, name: str) -> TagSet:
    """Build a TagSet from tagset-file text: one label per line, ``#``
    starts a comment, blank lines ignored."""
    labels = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            labels.append(line)
    return TagSet(name=name, labels=tuple(labels))


def load_tagset(path: str | Path, name: str | None = None) -> TagSet:
    path = Path(path)
    return parse_tagset(path.read_text(encoding="utf-8"), name or path.stem)


@cache
def ilmt_pos_tagset() -> TagSet:
    """The bundled 27-label ILMT POS inventory."""
    text = (files("shallowlab") / "data" / "ilmt_pos.txt").read_text(encoding="utf-8")
    return parse_tagset(text, "ilmt-pos")


@cache
def ilmt_chunk_tagset() -> TagSet:
    """The bundled 11-label ILMT chunk inventory."""
    text = (files("shallowlab") / "data" / "ilmt_chunk.txt").read_text(encoding="utf-8")
    return parse_tagset(text, "ilmt-chunk")


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of sentences validated against two tagsets."""

    sentences: tuple[Sentence, ...]
    pos_tagset: TagSet
    chunk_tagset: TagSet

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        seen_ids: set[int] = set()
        for sent in self.sentences:
            if sent.id in seen_ids:
                raise ValueError(f"duplicate sentence id {sent.id}")
            seen_ids.add(sent.id)
            where = f"sentence {sent.id}"
            for el in sent.elements:
                if isinstance(el, Chunk):
                    if el.label not in self.chunk_tagset:
                        raise UnknownLabelError(el.label, where)
                    for tok in el.tokens:
                        self._check_token(tok, where)
                else:
                    self._check_token(el, where)

    def _check_token(self, tok: Token, where: str) -> None:
        if tok.pos is not None and tok.pos not in self.pos_tagset:
            raise UnknownLabelError(tok.pos, where)

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class CorpusStats:
    sentences: int
    tokens: int
    chunks: int
    pos_counts: dict[str, int]
    chunk_counts: dict[str, int]
    untagged_tokens: int


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Count sentences, tokens, and chunks, with per-label breakdowns.

    ``pos_counts`` plus ``untagged_tokens`` always sums to ``tokens``;
    ``chunk_counts`` sums to ``chunks``.
    """
    pos_counts: Counter[str] = Counter()
    chunk_counts: Counter[str] = Counter()
    tokens = 0
    chunks = 0
    untagged = 0
    for sent in corpus.sentences:
        for chunk in sent.chunks:
            chunk_counts[chunk.label] += 1
            chunks += 1
        for tok in sent.tokens:
            tokens += 1
            if tok.pos is None:
                untagged += 1
            else:
                pos_counts[tok.pos] += 1
    return CorpusStats(
        sentences=len(corpus.sentences),
        tokens=tokens,
        chunks=chunks,
        pos_counts=dict(sorted(pos_counts.items())),
        chunk_counts=dict(sorted(chunk_counts.items())),
        untagged_tokens=untagged,
    )


def split_corpus(corpus: Corpus, train_count: int) -> tuple[Corpus, Corpus]:
    """Split into (first ``train_count`` sentences, remainder), in document
    order, without shuffling."""
    n = len(corpus.sentences)
    if not 0 <= train_count <= n:
        raise OutOfRangeError(
            f"train_count must be between 0 and {n} (corpus size), got {train_count}"
        )
    head = Corpus(corpus.sentences[:train_count], corpus.pos_tagset, corpus.chunk_tagset)
    tail = Corpus(corpus.sentences[train_count:], corpus.pos_tagset, corpus.chunk_tagset)
    return head, tail
