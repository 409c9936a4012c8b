"""Rule-based word tokenization and sentence splitting for Indic and
Latin text.

Rules (all deterministic, applied to NFC-normalized text):

* words are whitespace-delimited; leading and trailing punctuation
  (danda, double danda, comma, period, question/exclamation mark,
  semicolon, colon, quotes, brackets) is detached into its own tokens;
* decimal numbers ("3.5") and hyphenated words survive intact, because
  only the *edges* of a word are ever detached;
* a sentence ends after a maximal run of terminator tokens — danda ।,
  double danda ॥, '.', '?' or '!' — unless the token before the
  terminator is listed as an abbreviation;
* a word that exactly matches an abbreviation entry (e.g. "Dr.") is kept
  as a single token and never ends a sentence.

The abbreviation list is plain text, one entry per line, empty by default.
"""

from __future__ import annotations

import unicodedata
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import InvalidEncodingError

#: Tokens that terminate a sentence.
TERMINATORS = frozenset({"।", "॥", ".", "?", "!"})

#: Characters detached from word edges.
_DETACHABLE = frozenset(
    {"।", "॥", ",", ".", "?", "!", ";", ":",
     '"', "'", "“", "”", "‘", "’", "(", ")", "[", "]", "{", "}"}
)


class _Span(NamedTuple):
    text: str
    start: int
    end: int
    protected: bool  # abbreviation match: never a sentence end


def _decode(text: str | bytes) -> str:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncodingError(f"input is not valid UTF-8: {exc}") from None
    return unicodedata.normalize("NFC", text)


def _words_with_offsets(text: str) -> Iterable[tuple[str, int]]:
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                yield text[start:i], start
                start = None
        elif start is None:
            start = i
    if start is not None:
        yield text[start:], start


def _split_word(word: str, offset: int, abbreviations: frozenset[str]) -> list[_Span]:
    if word in abbreviations:
        return [_Span(word, offset, offset + len(word), True)]
    left = 0
    right = len(word)
    while left < right and word[left] in _DETACHABLE:
        left += 1
    while right > left and word[right - 1] in _DETACHABLE:
        right -= 1
    spans = [_Span(word[i], offset + i, offset + i + 1, False) for i in range(left)]
    if left < right:
        spans.append(_Span(word[left:right], offset + left, offset + right, False))
    spans.extend(
        _Span(word[i], offset + i, offset + i + 1, False) for i in range(right, len(word))
    )
    return spans


def _sentence_spans(text: str, abbreviations: frozenset[str]) -> list[list[_Span]]:
    tokens: list[_Span] = []
    for word, offset in _words_with_offsets(text):
        tokens.extend(_split_word(word, offset, abbreviations))

    sentences: list[list[_Span]] = []
    current: list[_Span] = []
    for i, tok in enumerate(tokens):
        current.append(tok)
        if tok.protected or tok.text not in TERMINATORS:
            continue
        prev = tokens[i - 1] if i > 0 else None
        if prev is not None and prev.text in abbreviations:
            continue
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        if nxt is not None and not nxt.protected and nxt.text in TERMINATORS:
            continue  # defer the break to the end of the terminator run
        sentences.append(current)
        current = []
    if current:
        sentences.append(current)
    return sentences


def tokenize(text: str | bytes, abbreviations: Iterable[str] = ()) -> list[list[str]]:
    """Tokenize raw text into sentences of token strings.

    Every non-whitespace character of the (NFC-normalized) input appears
    in exactly one token, in order; only whitespace is altered.
    """
    text = _decode(text)
    abbrev = frozenset(unicodedata.normalize("NFC", a) for a in abbreviations)
    return [[span.text for span in sent] for sent in _sentence_spans(text, abbrev)]


def sentence_boundaries(
    text: str | bytes, abbreviations: Iterable[str] = ()
) -> list[tuple[int, int]]:
    """Character-offset spans of sentences in the NFC-normalized text.

    Spans are ordered, non-overlapping, and jointly cover every
    non-whitespace character; each span runs from the first to one past
    the last character of its sentence.
    """
    text = _decode(text)
    abbrev = frozenset(unicodedata.normalize("NFC", a) for a in abbreviations)
    return [
        (sent[0].start, sent[-1].end) for sent in _sentence_spans(text, abbrev)
    ]


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read an abbreviation list: one entry per line, ``#`` comments."""
    text = _decode(Path(path).read_bytes())
    entries = []
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            entries.append(entry)
    return frozenset(entries)
