"""Deterministic synthetic corpora for smoke tests and demos.

Words are stem + suffix, and the suffix alone determines the POS tag, so
a tagger with suffix features can learn the task essentially perfectly.
Chunks follow a small phrase grammar whose BIO labels are a function of
the local POS context, so the chunker is equally learnable.  Everything
is driven by a seeded RNG and reproducible bit-for-bit.
"""

from __future__ import annotations

import random

from .corpus import Chunk, Corpus, Sentence, TagSet, Token, ilmt_chunk_tagset, ilmt_pos_tagset

#: Each suffix pins down one POS tag (all suffixes differ in their last
#: two code points, so suffix features up to length 2 already separate
#: the classes).
SUFFIX_TO_POS = {
    "ନା": "NN",
    "ଲା": "JJ",
    "ଇବ": "VM",
    "ଛି": "VAUX",
    "କରି": "RB",
    "ମେ": "PRP",
    "ରେ": "PSP",
}

_CONSONANTS = "କଖଗଘଚଛଜଟଡତଦଧପବଭମରଲସହ"
_MATRAS = ["", "ା", "ି", "ୁ", "େ", "ୋ"]


def _make_stems(rng: random.Random, count: int) -> list[str]:
    stems: list[str] = []
    seen: set[str] = set()
    while len(stems) < count:
        syllables = rng.randint(1, 2)
        stem = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_MATRAS) for _ in range(syllables)
        )
        if stem not in seen:
            seen.add(stem)
            stems.append(stem)
    return stems


def _word(rng: random.Random, stems: list[str], pos: str) -> Token:
    suffix = next(s for s, p in SUFFIX_TO_POS.items() if p == pos)
    return Token(rng.choice(stems) + suffix, pos)


def _noun_phrase(rng: random.Random, stems) -> Chunk:
    if rng.random() < 0.25:
        return Chunk("NP", (_word(rng, stems, "PRP"),))
    tokens = []
    if rng.random() < 0.5:
        tokens.append(_word(rng, stems, "JJ"))
    tokens.append(_word(rng, stems, "NN"))
    if rng.random() < 0.4:
        tokens.append(_word(rng, stems, "PSP"))
    return Chunk("NP", tuple(tokens))


def _verb_phrase(rng: random.Random, stems) -> Chunk:
    tokens = [_word(rng, stems, "VM")]
    if rng.random() < 0.5:
        tokens.append(_word(rng, stems, "VAUX"))
    return Chunk("VGF", tuple(tokens))


def synthetic_corpus(
    n_sentences: int = 700,
    seed: int = 0,
    n_stems: int = 40,
    pos_tagset: TagSet | None = None,
    chunk_tagset: TagSet | None = None,
) -> Corpus:
    """Generate a gold POS+chunk annotated corpus of NP+ [RBP] VGF
    sentences."""
    rng = random.Random(seed)
    stems = _make_stems(rng, n_stems)
    sentences = []
    for i in range(1, n_sentences + 1):
        elements: list[Chunk] = []
        for _ in range(rng.randint(1, 3)):
            elements.append(_noun_phrase(rng, stems))
        if rng.random() < 0.4:
            elements.append(Chunk("RBP", (_word(rng, stems, "RB"),)))
        elements.append(_verb_phrase(rng, stems))
        sentences.append(Sentence(i, tuple(elements)))
    return Corpus(
        tuple(sentences),
        pos_tagset or ilmt_pos_tagset(),
        chunk_tagset or ilmt_chunk_tagset(),
    )


def inject_pos_noise(corpus: Corpus, rate: float, seed: int = 0) -> Corpus:
    """Return a copy with the POS tag of roughly ``rate`` of all tokens
    flipped to a different label drawn from the tags present."""
    if not 0 <= rate <= 1:
        raise ValueError("rate must be in [0, 1]")
    rng = random.Random(seed)
    present = sorted({t.pos for s in corpus.sentences for t in s.tokens if t.pos})

    def corrupt(token: Token) -> Token:
        if token.pos is None or rng.random() >= rate:
            return token
        alternatives = [p for p in present if p != token.pos]
        if not alternatives:
            return token
        return Token(token.text, rng.choice(alternatives))

    sentences = []
    for sent in corpus.sentences:
        elements: list[Chunk | Token] = []
        for el in sent.elements:
            if isinstance(el, Chunk):
                elements.append(Chunk(el.label, tuple(corrupt(t) for t in el.tokens)))
            else:
                elements.append(corrupt(el))
        sentences.append(Sentence(sent.id, tuple(elements)))
    return Corpus(tuple(sentences), corpus.pos_tagset, corpus.chunk_tagset)
