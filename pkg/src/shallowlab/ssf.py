"""Reading and writing the Shakti Standard Format (SSF) text profile.

The concrete grammar accepted and produced here is the minimal common SSF
profile, frozen as follows (UTF-8, LF line endings, tab field separator):

    <Sentence id=1>
    1	((	NP
    1.1	ଭଲ	JJ
    1.2	ପିଲାକୁ	NN
    ))
    2	ଦିଅ	VM
    </Sentence>

* a sentence is wrapped in ``<Sentence id=N>`` / ``</Sentence>`` lines;
* a token row is ``index<TAB>token<TAB>tag`` (the tag column is omitted
  for untagged tokens);
* a chunk opens with ``index<TAB>((<TAB>chunkLabel`` and closes with a
  bare ``))`` line; chunks never nest;
* tokens may also appear at top level, outside any chunk;
* blank lines are ignored; sentences are serialized with one blank line
  between blocks.

The serializer emits canonical indices (top-level elements 1..N, tokens
inside chunk k as k.1, k.2, ...); the parser treats the index column as
presentational and does not validate it.  Input is normalized to NFC at
parse time so string equality is well-defined.
"""

from __future__ import annotations

import re
import unicodedata

from .corpus import Chunk, Corpus, Sentence, TagSet, Token
from .errors import MalformedSSFError, UnknownLabelError

_SENTENCE_OPEN = re.compile(r"<Sentence\s+id=(\d+)>\Z")


def _decode(stream: str | bytes) -> str:
    if isinstance(stream, bytes):
        try:
            stream = stream.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedSSFError(f"input is not valid UTF-8: {exc}") from None
    return unicodedata.normalize("NFC", stream)


def _column_of_field(fields: list[str], index: int) -> int:
    # 1-based column of the first character of fields[index].
    return sum(len(f) + 1 for f in fields[:index]) + 1


def parse_ssf(stream: str | bytes, pos_tagset: TagSet, chunk_tagset: TagSet) -> Corpus:
    """Parse SSF text into a validated Corpus.

    Every POS tag and chunk label is checked against the given tagsets;
    the first offending label raises UnknownLabelError with its location.
    Structural problems raise MalformedSSFError with line (and column)
    information.  An empty stream yields an empty corpus.
    """
    text = _decode(stream)
    sentences: list[Sentence] = []
    seen_ids: set[int] = set()

    sent_id: int | None = None
    elements: list[Chunk | Token] = []
    chunk_label: str | None = None
    chunk_tokens: list[Token] = []
    chunk_open_line = 0

    def make_token(fields: list[str], lineno: int) -> Token:
        pos = fields[2] if len(fields) == 3 else None
        if pos is not None and pos not in pos_tagset:
            raise UnknownLabelError(pos, f"line {lineno}, column {_column_of_field(fields, 2)}")
        try:
            return Token(fields[1], pos)
        except ValueError as exc:
            raise MalformedSSFError(str(exc), lineno, _column_of_field(fields, 1)) from None

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped:
            continue

        if "\t" not in line:
            if (m := _SENTENCE_OPEN.match(stripped)) is not None:
                if sent_id is not None:
                    raise MalformedSSFError("nested <Sentence> block", lineno)
                sent_id = int(m.group(1))
                if sent_id < 1:
                    raise MalformedSSFError(f"sentence id must be positive, got {sent_id}", lineno)
                if sent_id in seen_ids:
                    raise MalformedSSFError(f"duplicate sentence id {sent_id}", lineno)
                continue
            if stripped == "</Sentence>":
                if sent_id is None:
                    raise MalformedSSFError("</Sentence> without matching <Sentence>", lineno)
                if chunk_label is not None:
                    raise MalformedSSFError(
                        f"chunk opened on line {chunk_open_line} is never closed", lineno
                    )
                seen_ids.add(sent_id)
                sentences.append(Sentence(sent_id, tuple(elements)))
                sent_id, elements = None, []
                continue
            if stripped == "))":
                if sent_id is None:
                    raise MalformedSSFError("content outside <Sentence> block", lineno)
                if chunk_label is None:
                    raise MalformedSSFError(")) without matching ((", lineno)
                if not chunk_tokens:
                    raise MalformedSSFError("chunk contains no tokens", lineno)
                elements.append(Chunk(chunk_label, tuple(chunk_tokens)))
                chunk_label, chunk_tokens = None, []
                continue
            raise MalformedSSFError(f"unrecognized line {stripped!r}", lineno)

        if sent_id is None:
            raise MalformedSSFError("content outside <Sentence> block", lineno)
        fields = line.split("\t")
        if len(fields) not in (2, 3) or any(not f.strip() for f in fields):
            raise MalformedSSFError(
                "expected 2 or 3 non-empty tab-separated fields", lineno, 1
            )
        fields = [f.strip() for f in fields]

        if fields[1] == "((":
            if len(fields) != 3:
                raise MalformedSSFError("chunk-open row needs a chunk label", lineno, 1)
            if chunk_label is not None:
                raise MalformedSSFError("nested chunks are not allowed", lineno, 1)
            if fields[2] not in chunk_tagset:
                raise UnknownLabelError(
                    fields[2], f"line {lineno}, column {_column_of_field(fields, 2)}"
                )
            chunk_label = fields[2]
            chunk_tokens = []
            chunk_open_line = lineno
            continue

        token = make_token(fields, lineno)
        if chunk_label is not None:
            chunk_tokens.append(token)
        else:
            elements.append(token)

    if sent_id is not None:
        raise MalformedSSFError("unterminated <Sentence> block at end of input")
    return Corpus(tuple(sentences), pos_tagset, chunk_tagset)


def _token_row(index: str, token: Token) -> str:
    if token.pos is None:
        return f"{index}\t{token.text}"
    return f"{index}\t{token.text}\t{token.pos}"


def serialize_ssf(corpus: Corpus) -> str:
    """Serialize a corpus to canonical SSF text.

    Output is deterministic and re-parses to an equal corpus; an empty
    corpus serializes to the empty string.
    """
    lines: list[str] = []
    for sent in corpus.sentences:
        lines.append(f"<Sentence id={sent.id}>")
        for top, el in enumerate(sent.elements, start=1):
            if isinstance(el, Chunk):
                lines.append(f"{top}\t((\t{el.label}")
                for i, tok in enumerate(el.tokens, start=1):
                    lines.append(_token_row(f"{top}.{i}", tok))
                lines.append("))")
            else:
                lines.append(_token_row(str(top), el))
        lines.append("</Sentence>")
        lines.append("")
    return "\n".join(lines)
