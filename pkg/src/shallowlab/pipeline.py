"""The shallow-parser pipeline: tokenizer, POS tagger, and chunker
composed per sentence with no hidden state between stages.

The chunker is trained on gold POS features; at inference it consumes
whatever POS tags it is given (predicted tags in the full pipeline, gold
tags when evaluating the chunker in isolation).  That train/test feature
mismatch is deliberate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Chunk, Corpus, Sentence, TagSet, Token, ilmt_chunk_tagset, ilmt_pos_tagset
from .crf import CrfModel, LabelAlphabet, TrainConfig, train, viterbi
from .errors import EmptyTrainingSetError, LengthMismatchError, UnknownLabelError
from .features import (
    ChunkTemplateConfig,
    PosTemplateConfig,
    bio_to_chunks,
    bio_to_elements,
    chunk_features,
    chunks_to_bio,
    pos_features,
)
from .tokenizer import tokenize


def tag_pos(pos_model: CrfModel, tokens) -> list[str]:
    """Viterbi-decode POS labels for one token sequence."""
    if not tokens:
        raise ValueError("cannot tag an empty sentence")
    labels, _ = viterbi(pos_model, pos_features(tokens, pos_model.template))
    return labels


def chunk(chunk_model: CrfModel, tokens, pos_tags) -> list[Chunk]:
    """Viterbi-decode BIO labels and assemble chunks (repairing any
    ill-formed output)."""
    if len(tokens) != len(pos_tags):
        raise LengthMismatchError(f"{len(tokens)} tokens but {len(pos_tags)} POS tags")
    bio, _ = viterbi(chunk_model, chunk_features(tokens, pos_tags, chunk_model.template))
    token_objs = tuple(Token(w, p) for w, p in zip(tokens, pos_tags))
    return bio_to_chunks(token_objs, bio)


@dataclass(frozen=True)
class ShallowParser:
    """A tokenizer configuration plus trained POS and chunk models."""

    pos_model: CrfModel
    chunk_model: CrfModel
    pos_tagset: TagSet = field(default_factory=ilmt_pos_tagset)
    chunk_tagset: TagSet = field(default_factory=ilmt_chunk_tagset)
    abbreviations: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.pos_model.task != "pos":
            raise ValueError(f"pos_model has task {self.pos_model.task!r}, expected 'pos'")
        if self.chunk_model.task != "chunk":
            raise ValueError(
                f"chunk_model has task {self.chunk_model.task!r}, expected 'chunk'"
            )
        for label in self.pos_model.labels:
            if label not in self.pos_tagset:
                raise UnknownLabelError(label, "POS model alphabet")
        for label in self.chunk_model.labels:
            if label == "O":
                continue
            if len(label) > 2 and label[0] in "BI" and label[1] == "-":
                if label[2:] in self.chunk_tagset:
                    continue
            raise UnknownLabelError(label, "chunk model alphabet")

    def parse_sentence(self, sent_id: int, tokens: list[str]) -> Sentence:
        pos_tags = tag_pos(self.pos_model, tokens)
        bio, _ = viterbi(
            self.chunk_model,
            chunk_features(tokens, pos_tags, self.chunk_model.template),
        )
        token_objs = tuple(Token(w, p) for w, p in zip(tokens, pos_tags))
        return Sentence(sent_id, bio_to_elements(token_objs, bio))


def parse(parser: ShallowParser, text: str | bytes) -> Corpus:
    """Tokenize, POS-tag, and chunk raw text into a predicted corpus."""
    sentences = [
        parser.parse_sentence(i, tokens)
        for i, tokens in enumerate(tokenize(text, parser.abbreviations), start=1)
    ]
    return Corpus(tuple(sentences), parser.pos_tagset, parser.chunk_tagset)


def _pos_examples(corpus: Corpus, template: PosTemplateConfig):
    examples = []
    label_set: set[str] = set()
    for sent in corpus.sentences:
        tokens = sent.tokens
        if not tokens:
            continue
        tags = []
        for tok in tokens:
            if tok.pos is None:
                raise UnknownLabelError(
                    "<missing>", f"sentence {sent.id}: token {tok.text!r} has no POS tag"
                )
            tags.append(tok.pos)
        examples.append((pos_features([t.text for t in tokens], template), tags))
        label_set.update(tags)
    return examples, sorted(label_set)


def _chunk_examples(corpus: Corpus, template: ChunkTemplateConfig):
    examples = []
    label_set: set[str] = set()
    any_chunks = False
    for sent in corpus.sentences:
        tokens = sent.tokens
        if not tokens:
            continue
        if sent.chunks:
            any_chunks = True
        words = [t.text for t in tokens]
        tags = []
        for tok in tokens:
            if tok.pos is None:
                raise UnknownLabelError(
                    "<missing>", f"sentence {sent.id}: token {tok.text!r} has no POS tag"
                )
            tags.append(tok.pos)
        bio = chunks_to_bio(sent)
        examples.append((chunk_features(words, tags, template), bio))
        label_set.update(bio)
    if not any_chunks:
        raise EmptyTrainingSetError("corpus has no chunk annotation")
    return examples, sorted(label_set)


def train_pipeline(
    train_corpus: Corpus,
    pos_template: PosTemplateConfig | None = None,
    chunk_template: ChunkTemplateConfig | None = None,
    train_config: TrainConfig | None = None,
    abbreviations: frozenset[str] = frozenset(),
) -> ShallowParser:
    """Train both models from a gold-annotated corpus.

    The POS model is trained on gold POS labels; the chunk model on gold
    POS *features* with gold BIO labels (never on predicted tags).
    """
    pos_template = pos_template or PosTemplateConfig()
    chunk_template = chunk_template or ChunkTemplateConfig()
    train_config = train_config or TrainConfig()

    pos_examples, pos_labels = _pos_examples(train_corpus, pos_template)
    if not pos_examples:
        raise EmptyTrainingSetError("corpus has no sentences with tokens")
    pos_model = train(
        pos_examples,
        LabelAlphabet(pos_labels),
        train_config,
        template=pos_template,
        task="pos",
    )

    chunk_examples, bio_labels = _chunk_examples(train_corpus, chunk_template)
    chunk_model = train(
        chunk_examples,
        LabelAlphabet(bio_labels),
        train_config,
        template=chunk_template,
        task="chunk",
    )

    return ShallowParser(
        pos_model=pos_model,
        chunk_model=chunk_model,
        pos_tagset=train_corpus.pos_tagset,
        chunk_tagset=train_corpus.chunk_tagset,
        abbreviations=abbreviations,
    )


def predict_pos_corpus(pos_model: CrfModel, corpus: Corpus) -> Corpus:
    """Re-tag every sentence with predicted POS labels (chunks dropped)."""
    sentences = []
    for sent in corpus.sentences:
        tokens = sent.tokens
        if not tokens:
            sentences.append(Sentence(sent.id, ()))
            continue
        tags = tag_pos(pos_model, [t.text for t in tokens])
        sentences.append(
            Sentence(sent.id, tuple(Token(t.text, p) for t, p in zip(tokens, tags)))
        )
    return Corpus(tuple(sentences), corpus.pos_tagset, corpus.chunk_tagset)


def predict_chunks_corpus(
    chunk_model: CrfModel, corpus: Corpus, pos_model: CrfModel | None = None
) -> Corpus:
    """Re-chunk every sentence, using gold POS tags when ``pos_model`` is
    None and predicted tags otherwise."""
    sentences = []
    for sent in corpus.sentences:
        tokens = sent.tokens
        if not tokens:
            sentences.append(Sentence(sent.id, ()))
            continue
        words = [t.text for t in tokens]
        if pos_model is None:
            tags = []
            for tok in tokens:
                if tok.pos is None:
                    raise UnknownLabelError(
                        "<missing>",
                        f"sentence {sent.id}: token {tok.text!r} has no POS tag",
                    )
                tags.append(tok.pos)
        else:
            tags = tag_pos(pos_model, words)
        bio, _ = viterbi(
            chunk_model, chunk_features(words, tags, chunk_model.template)
        )
        token_objs = tuple(Token(w, p) for w, p in zip(words, tags))
        sentences.append(Sentence(sent.id, bio_to_elements(token_objs, bio)))
    return Corpus(tuple(sentences), corpus.pos_tagset, corpus.chunk_tagset)
