"""shallowlab: a shallow-parsing toolkit for SSF-annotated corpora.

Capabilities, one module each:

* :mod:`shallowlab.corpus` - immutable document model (tokens, chunks,
  sentences, corpora) and tagset handling, with the bundled ILMT
  inventories (27 POS labels, 11 chunk labels);
* :mod:`shallowlab.ssf` - Shakti Standard Format reading and writing;
* :mod:`shallowlab.tokenizer` - rule-based Indic/Latin tokenization and
  sentence splitting;
* :mod:`shallowlab.features` - POS and chunk feature templates plus the
  BIO chunk encoding;
* :mod:`shallowlab.crf` - a from-scratch first-order linear-chain CRF
  (forward-backward training, Viterbi decoding, binary model files);
* :mod:`shallowlab.pipeline` - tokenizer -> tagger -> chunker composition;
* :mod:`shallowlab.evaluation` - POS/chunk scoring, confusion reports,
  and Fleiss' kappa;
* :mod:`shallowlab.cli` - the ``shallowlab`` command.
"""

__version__ = "0.1.0"

from .corpus import (
    Chunk,
    Corpus,
    CorpusStats,
    Sentence,
    TagSet,
    Token,
    corpus_stats,
    ilmt_chunk_tagset,
    ilmt_pos_tagset,
    load_tagset,
    parse_tagset,
    split_corpus,
)
from .crf import (
    CrfModel,
    FeatureAlphabet,
    LabelAlphabet,
    Lattice,
    TrainConfig,
    load_model,
    log_partition,
    marginals,
    nll_and_gradient,
    save_model,
    score_lattice,
    train,
    viterbi,
)
from .errors import (
    CorruptModelError,
    DegenerateAgreementError,
    EmptyTrainingSetError,
    InsufficientRatersError,
    InvalidEncodingError,
    LengthMismatchError,
    MalformedSSFError,
    NonFiniteObjectiveError,
    OutOfRangeError,
    ShallowlabError,
    TokenMismatchError,
    UnknownLabelError,
    VersionMismatchError,
)
from .evaluation import (
    AgreementReport,
    ConfusionMatrix,
    EvalReport,
    confusion_report,
    eval_chunks,
    eval_pos,
    fleiss_kappa,
)
from .features import (
    ChunkTemplateConfig,
    PosTemplateConfig,
    bio_to_chunks,
    chunk_features,
    chunks_to_bio,
    pos_features,
    repair_bio,
)
from .pipeline import ShallowParser, chunk, parse, tag_pos, train_pipeline
from .ssf import parse_ssf, serialize_ssf
from .tokenizer import load_abbreviations, sentence_boundaries, tokenize

__all__ = [name for name in dir() if not name.startswith("_")]
