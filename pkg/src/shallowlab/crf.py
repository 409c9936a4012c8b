"""First-order linear-chain conditional random field.

The model scores a label sequence y for an observed sentence x as

    score(y | x) = start[y_0] + sum_t node[t, y_t] + sum_t trans[y_{t-1}, y_t]

where node[t, k] is the sum of emission weights of the features active at
position t for label k, and trans is a label-bigram matrix not conjoined
with observations.  All probability computations run in log space with
log-sum-exp; there is no scaling-factor variant.

Training minimizes the L2-regularized negative log-likelihood

    sum_sentences [log Z(x) - score(y_gold | x)] + ||w||^2 / (2 sigma^2)

with exact gradients from forward-backward marginals, driven by a
limited-memory quasi-Newton optimizer (history 10, full-batch gradients).
Everything is deterministic: feature ids are assigned in first-seen scan
order, weights start at zero, and repeated runs on identical inputs write
bit-identical model files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import optimize, sparse

from .errors import (
    CorruptModelError,
    EmptyTrainingSetError,
    LengthMismatchError,
    NonFiniteObjectiveError,
    UnknownLabelError,
    VersionMismatchError,
)
from .features import ChunkTemplateConfig, PosTemplateConfig

MODEL_MAGIC = b"SLABCRF\x00"
MODEL_FORMAT_VERSION = 1


class LabelAlphabet:
    """Bijection between label strings and indices 0..K-1."""

    def __init__(self, labels: Iterable[str]):
        self.labels = tuple(labels)
        self._index = {label: i for i, label in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise ValueError("duplicate labels in alphabet")
        if not self.labels:
            raise ValueError("label alphabet must be non-empty")

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabelError(label, "label alphabet") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelAlphabet) and self.labels == other.labels

    def __repr__(self) -> str:
        return f"LabelAlphabet({list(self.labels)!r})"


class FeatureAlphabet:
    """Frozen mapping from feature strings to integer ids.

    Built by scanning the training set once; features unseen at training
    time have no id and therefore contribute nothing at test time.
    """

    def __init__(self, feature_strings: Iterable[str]):
        self.strings = tuple(feature_strings)
        self._index = {s: i for i, s in enumerate(self.strings)}
        if len(self._index) != len(self.strings):
            raise ValueError("duplicate feature strings in alphabet")

    @classmethod
    def scan(
        cls, sequences: Iterable[Sequence[Sequence[str]]], cutoff: int = 0
    ) -> "FeatureAlphabet":
        """Collect features in first-seen order, dropping those that occur
        ``cutoff`` times or fewer (cutoff 0 keeps everything)."""
        counts: dict[str, int] = {}
        for vectors in sequences:
            for feats in vectors:
                for f in feats:
                    counts[f] = counts.get(f, 0) + 1
        return cls(f for f, c in counts.items() if c > cutoff)

    def get(self, feature: str) -> int | None:
        return self._index.get(feature)

    def __len__(self) -> int:
        return len(self.strings)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureAlphabet) and self.strings == other.strings


@dataclass(frozen=True)
class TrainConfig:
    """Trainer hyperparameters: Gaussian prior sigma, iteration budget,
    relative-objective-change stopping tolerance, and feature count cutoff."""

    l2_sigma: float = 1.0
    max_iterations: int = 200
    tolerance: float = 1e-5
    feature_cutoff: int = 0

    def __post_init__(self):
        if self.l2_sigma <= 0:
            raise ValueError("l2_sigma must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.feature_cutoff < 0:
            raise ValueError("feature_cutoff must be non-negative")


class Lattice(NamedTuple):
    """Log-space potentials for one sentence: node scores (T, K), the
    label-transition matrix (K, K), and start scores (K,)."""

    node: np.ndarray
    transition: np.ndarray
    start: np.ndarray


class Weights(NamedTuple):
    """Parameter (or gradient) arrays: emission (F, K), transition (K, K),
    start (K,)."""

    emission: np.ndarray
    transition: np.ndarray
    start: np.ndarray


@dataclass
class CrfModel:
    """A trained linear-chain CRF: alphabets, weights, template config,
    and training metadata."""

    labels: LabelAlphabet
    features: FeatureAlphabet
    emission: np.ndarray
    transition: np.ndarray
    start: np.ndarray
    template: PosTemplateConfig | ChunkTemplateConfig
    task: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.labels)
        f = len(self.features)
        if self.emission.shape != (f, k):
            raise ValueError(f"emission weights must have shape ({f}, {k})")
        if self.transition.shape != (k, k):
            raise ValueError(f"transition weights must have shape ({k}, {k})")
        if self.start.shape != (k,):
            raise ValueError(f"start weights must have shape ({k},)")
        for arr in (self.emission, self.transition, self.start):
            if not np.all(np.isfinite(arr)):
                raise ValueError("model weights must be finite")


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis)
    return m + np.log(np.sum(np.exp(a - np.expand_dims(m, axis)), axis=axis))


def feature_ids(alphabet: FeatureAlphabet, vectors: Sequence[Sequence[str]]) -> list[np.ndarray]:
    """Map per-position feature strings to id arrays, dropping unseen ones."""
    out = []
    for feats in vectors:
        ids = [i for f in feats if (i := alphabet.get(f)) is not None]
        out.append(np.asarray(ids, dtype=np.intp))
    return out


def score_lattice(model: CrfModel, vectors: Sequence[Sequence[str]]) -> Lattice:
    """Assemble the log-space lattice for one sentence: node[t, k] is the
    sum of emission weights of features active at t, for label k."""
    if len(vectors) == 0:
        raise ValueError("cannot score an empty sentence")
    node = np.zeros((len(vectors), len(model.labels)))
    for t, ids in enumerate(feature_ids(model.features, vectors)):
        if ids.size:
            node[t] = model.emission[ids].sum(axis=0)
    return Lattice(node, model.transition.copy(), model.start.copy())


def forward_log_alphas(lattice: Lattice) -> np.ndarray:
    """Forward recursion: alpha[t, k] = log sum of exp-scores of all length
    t+1 prefixes ending in label k."""
    node, trans, start = lattice
    alpha = np.empty_like(node)
    alpha[0] = start + node[0]
    for t in range(1, node.shape[0]):
        alpha[t] = node[t] + _logsumexp(alpha[t - 1][:, None] + trans, axis=0)
    return alpha


def backward_log_betas(lattice: Lattice) -> np.ndarray:
    node, trans, _ = lattice
    beta = np.zeros_like(node)
    for t in range(node.shape[0] - 2, -1, -1):
        beta[t] = _logsumexp(trans + node[t + 1] + beta[t + 1], axis=1)
    return beta


def log_partition(lattice: Lattice) -> float:
    """log Z: the log-sum-exp of the scores of all K^T label sequences."""
    return float(_logsumexp(forward_log_alphas(lattice)[-1], axis=0))


class Marginals(NamedTuple):
    unary: np.ndarray      # (T, K) posterior label probabilities
    pairwise: np.ndarray   # (T-1, K, K) posterior label-bigram probabilities
    log_partition: float


def marginals(lattice: Lattice) -> Marginals:
    """Exact posterior marginals from forward-backward."""
    node, trans, _ = lattice
    alpha = forward_log_alphas(lattice)
    beta = backward_log_betas(lattice)
    log_z = float(_logsumexp(alpha[-1], axis=0))
    unary = np.exp(alpha + beta - log_z)
    t_count = node.shape[0] - 1
    pairwise = np.empty((t_count, node.shape[1], node.shape[1]))
    for t in range(t_count):
        pairwise[t] = np.exp(
            alpha[t][:, None] + trans + node[t + 1] + beta[t + 1] - log_z
        )
    return Marginals(unary, pairwise, log_z)


def sequence_score(lattice: Lattice, labels: Sequence[int]) -> float:
    """Score of one label-index sequence under the lattice."""
    node, trans, start = lattice
    if len(labels) != node.shape[0]:
        raise LengthMismatchError(
            f"{node.shape[0]} positions but {len(labels)} labels"
        )
    score = start[labels[0]] + node[0, labels[0]]
    for t in range(1, len(labels)):
        score += trans[labels[t - 1], labels[t]] + node[t, labels[t]]
    return float(score)


def viterbi_path(lattice: Lattice) -> tuple[list[int], float]:
    """Highest-scoring label-index sequence and its score; ties break
    toward the lowest label index at every backtrack step."""
    node, trans, start = lattice
    t_len, k = node.shape
    delta = start + node[0]
    backpointers = np.empty((t_len, k), dtype=np.intp)
    for t in range(1, t_len):
        scores = delta[:, None] + trans
        backpointers[t] = np.argmax(scores, axis=0)
        delta = node[t] + np.max(scores, axis=0)
    best = int(np.argmax(delta))
    path = [best]
    for t in range(t_len - 1, 0, -1):
        best = int(backpointers[t, best])
        path.append(best)
    path.reverse()
    return path, float(np.max(delta))


def viterbi(model: CrfModel, vectors: Sequence[Sequence[str]]) -> tuple[list[str], float]:
    """Decode one sentence: (best label strings, score of that sequence)."""
    path, score = viterbi_path(score_lattice(model, vectors))
    return [model.labels.labels[i] for i in path], score


# ---------------------------------------------------------------------------
# Training


class _Dataset(NamedTuple):
    """A feature-compiled batch: one sparse indicator matrix over all
    positions of all sentences, sentence offsets, and gold label ids."""

    design: sparse.csr_matrix      # (total positions, F) 0/1 indicators
    bounds: np.ndarray             # (S+1,) sentence offsets into the rows
    gold: np.ndarray               # (total positions,) label ids


def _compile(
    batch: Sequence[tuple[Sequence[Sequence[str]], Sequence[str]]],
    features: FeatureAlphabet,
    labels: LabelAlphabet,
) -> _Dataset:
    rows: list[int] = []
    cols: list[int] = []
    gold: list[int] = []
    bounds = [0]
    pos = 0
    for vectors, gold_labels in batch:
        if len(vectors) != len(gold_labels):
            raise LengthMismatchError(
                f"{len(vectors)} feature vectors but {len(gold_labels)} gold labels"
            )
        if not vectors:
            raise ValueError("cannot train on an empty sentence")
        for feats, y in zip(vectors, gold_labels):
            for f in feats:
                fid = features.get(f)
                if fid is not None:
                    rows.append(pos)
                    cols.append(fid)
            gold.append(labels.index(y))
            pos += 1
        bounds.append(pos)
    design = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(pos, len(features))
    )
    return _Dataset(design, np.asarray(bounds, dtype=np.intp), np.asarray(gold, dtype=np.intp))


def _pack(weights: Weights) -> np.ndarray:
    return np.concatenate(
        [weights.emission.ravel(), weights.transition.ravel(), weights.start]
    )


def _unpack(flat: np.ndarray, n_features: int, n_labels: int) -> Weights:
    f, k = n_features, n_labels
    emission = flat[: f * k].reshape(f, k)
    transition = flat[f * k : f * k + k * k].reshape(k, k)
    start = flat[f * k + k * k :]
    return Weights(emission, transition, start)


def _objective(
    flat: np.ndarray, dataset: _Dataset, n_labels: int, sigma: float
) -> tuple[float, np.ndarray]:
    """Regularized NLL and its gradient over a compiled dataset.

    Gradient = (expected feature counts under the model - empirical
    counts) + w / sigma^2, with expectations from forward-backward.
    """
    k = n_labels
    weights = _unpack(flat, dataset.design.shape[1], k)
    node_all = dataset.design @ weights.emission  # (P, K)

    objective = 0.0
    node_grad = np.zeros_like(node_all)
    trans_grad = np.zeros((k, k))
    start_grad = np.zeros(k)

    for s in range(len(dataset.bounds) - 1):
        lo, hi = dataset.bounds[s], dataset.bounds[s + 1]
        node = node_all[lo:hi]
        gold = dataset.gold[lo:hi]
        lattice = Lattice(node, weights.transition, weights.start)
        unary, pairwise, log_z = marginals(lattice)

        gold_score = weights.start[gold[0]] + node[np.arange(hi - lo), gold].sum()
        if hi - lo > 1:
            gold_score += weights.transition[gold[:-1], gold[1:]].sum()
        objective += log_z - gold_score

        node_grad[lo:hi] = unary
        node_grad[lo + np.arange(hi - lo), gold] -= 1.0
        trans_grad += pairwise.sum(axis=0)
        np.add.at(trans_grad, (gold[:-1], gold[1:]), -1.0)
        start_grad += unary[0]
        start_grad[gold[0]] -= 1.0

    emission_grad = np.asarray(dataset.design.T @ node_grad)

    inv_var = 1.0 / (sigma * sigma)
    objective += 0.5 * inv_var * float(flat @ flat)
    grad = _pack(Weights(emission_grad, trans_grad, start_grad)) + inv_var * flat

    if not (np.isfinite(objective) and np.all(np.isfinite(grad))):
        raise NonFiniteObjectiveError(
            "objective or gradient became non-finite; this signals a bug "
            "or a pathological configuration"
        )
    return float(objective), grad


def nll_and_gradient(
    model: CrfModel,
    batch: Sequence[tuple[Sequence[Sequence[str]], Sequence[str]]],
    cfg: TrainConfig | None = None,
) -> tuple[float, Weights]:
    """Regularized negative log-likelihood of ``batch`` at the model's
    current weights, with the exact gradient in the same shapes.

    An empty batch yields the regularizer alone with gradient w / sigma^2.
    Gold labels outside the model's alphabet raise UnknownLabelError.
    """
    cfg = cfg or TrainConfig()
    dataset = _compile(batch, model.features, model.labels)
    flat = _pack(Weights(model.emission, model.transition, model.start))
    objective, grad = _objective(flat, dataset, len(model.labels), cfg.l2_sigma)
    return objective, _unpack(grad, len(model.features), len(model.labels))


def train(
    batch: Sequence[tuple[Sequence[Sequence[str]], Sequence[str]]],
    labels: LabelAlphabet,
    cfg: TrainConfig | None = None,
    *,
    template: PosTemplateConfig | ChunkTemplateConfig | None = None,
    task: str = "pos",
) -> CrfModel:
    """Train a CRF by regularized maximum likelihood.

    The feature alphabet is frozen from a single scan of the batch (with
    the configured cutoff), weights start at zero, and the optimizer is
    limited-memory BFGS with history 10 on full-batch gradients, stopping
    at ``cfg.tolerance`` relative objective change or ``max_iterations``.
    Identical inputs produce bit-identical models.
    """
    cfg = cfg or TrainConfig()
    if not batch:
        raise EmptyTrainingSetError("training batch contains no sentences")
    features = FeatureAlphabet.scan((vectors for vectors, _ in batch), cfg.feature_cutoff)
    dataset = _compile(batch, features, labels)
    k = len(labels)

    x0 = np.zeros(len(features) * k + k * k + k)
    result = optimize.minimize(
        _objective,
        x0,
        args=(dataset, k, cfg.l2_sigma),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": cfg.max_iterations,
            "ftol": cfg.tolerance,
            "gtol": 1e-6,
            "maxcor": 10,
        },
    )
    if not np.all(np.isfinite(result.x)):
        raise NonFiniteObjectiveError("optimizer returned non-finite weights")

    weights = _unpack(result.x, len(features), k)
    metadata = {
        "task": task,
        "l2_sigma": cfg.l2_sigma,
        "max_iterations": cfg.max_iterations,
        "tolerance": cfg.tolerance,
        "feature_cutoff": cfg.feature_cutoff,
        "iterations_run": int(result.nit),
        "final_objective": float(result.fun),
        "n_features": len(features),
        "n_labels": k,
    }
    return CrfModel(
        labels=labels,
        features=features,
        emission=np.ascontiguousarray(weights.emission),
        transition=np.ascontiguousarray(weights.transition),
        start=np.ascontiguousarray(weights.start),
        template=template if template is not None else PosTemplateConfig(),
        task=task,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# Serialization
#
# Binary layout (all integers little-endian):
#
#   offset  size  field
#   0       8     magic "SLABCRF\0"
#   8       4     format version (uint32)
#   12      4     header length H (uint32)
#   16      H     header JSON (UTF-8, sorted keys): task, labels,
#                 template, metadata
#   ..      4     feature count F (uint32)
#   ..      F x   uint32 byte length + UTF-8 feature string
#   ..      8FK   emission weights, float64 little-endian, C order
#   ..      8KK   transition weights
#   ..      8K    start weights
#   ..      32    SHA-256 of everything before it


def _template_to_dict(template) -> dict:
    if isinstance(template, PosTemplateConfig):
        return {
            "kind": "pos",
            "prefix_max": template.prefix_max,
            "suffix_max": template.suffix_max,
            "window": template.window,
        }
    if isinstance(template, ChunkTemplateConfig):
        return {
            "kind": "chunk",
            "word_window": template.word_window,
            "pos_window": template.pos_window,
        }
    raise TypeError(f"unsupported template config {type(template)!r}")


def _template_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "pos":
        return PosTemplateConfig(data["prefix_max"], data["suffix_max"], data["window"])
    if kind == "chunk":
        return ChunkTemplateConfig(data["word_window"], data["pos_window"])
    raise CorruptModelError(f"unknown template kind {kind!r}")


def save_model(model: CrfModel) -> bytes:
    """Serialize a model to its versioned, checksummed byte form."""
    header = json.dumps(
        {
            "task": model.task,
            "labels": list(model.labels.labels),
            "template": _template_to_dict(model.template),
            "metadata": model.metadata,
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    parts = [MODEL_MAGIC, struct.pack("<II", MODEL_FORMAT_VERSION, len(header)), header]
    parts.append(struct.pack("<I", len(model.features)))
    for s in model.features.strings:
        encoded = s.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    for arr in (model.emission, model.transition, model.start):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def load_model(data: bytes) -> CrfModel:
    """Reconstruct a model from ``save_model`` output.

    Raises VersionMismatchError for unknown format versions and
    CorruptModelError for bad magic, failed checksum, or truncation.
    """
    if len(data) < len(MODEL_MAGIC) + 8 + 32:
        raise CorruptModelError("model file is truncated")
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise CorruptModelError("bad magic: not a model file")
    version, header_len = struct.unpack_from("<II", data, len(MODEL_MAGIC))
    if version != MODEL_FORMAT_VERSION:
        raise VersionMismatchError(
            f"model format version {version} is not supported "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    body, checksum = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != checksum:
        raise CorruptModelError("checksum mismatch")

    try:
        cursor = len(MODEL_MAGIC) + 8
        header = json.loads(body[cursor : cursor + header_len].decode("utf-8"))
        cursor += header_len
        (n_features,) = struct.unpack_from("<I", body, cursor)
        cursor += 4
        strings = []
        for _ in range(n_features):
            (n,) = struct.unpack_from("<I", body, cursor)
            cursor += 4
            strings.append(body[cursor : cursor + n].decode("utf-8"))
            cursor += n

        labels = LabelAlphabet(header["labels"])
        k = len(labels)
        shapes = [(n_features, k), (k, k), (k,)]
        arrays = []
        for shape in shapes:
            count = int(np.prod(shape))
            arr = np.frombuffer(body, dtype="<f8", count=count, offset=cursor)
            cursor += 8 * count
            arrays.append(arr.reshape(shape).copy())
        if cursor != len(body):
            raise CorruptModelError("trailing bytes after weight arrays")

        return CrfModel(
            labels=labels,
            features=FeatureAlphabet(strings),
            emission=arrays[0],
            transition=arrays[1],
            start=arrays[2],
            template=_template_from_dict(header["template"]),
            task=header["task"],
            metadata=header.get("metadata", {}),
        )
    except CorruptModelError:
        raise
    except (KeyError, ValueError, struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModelError(f"malformed model file: {exc}") from None
