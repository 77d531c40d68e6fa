"""CBOW word embeddings over SSLR tokens and per-file vector composition.

Training predicts each target token from the mean of the input vectors
inside its window, with negative samples drawn from the unigram^(3/4)
noise distribution.  Single-threaded training with a fixed seed is
bit-reproducible for a given kernel backend; the numba and numpy
backends agree behaviourally but not bit-for-bit (different summation
order inside the dot products).

File vectors are the arithmetic mean of the input vectors of all
in-vocabulary tokens (multiplicity respected); accumulation runs in
vocabulary-index order, so the result is exactly invariant under
sentence reordering.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._cbow import build_stream, train_epoch
from .errors import EmptyVocabularyError, ZeroVectorError
from .sslr import SslrDocument

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbedHyperparams:
    dim: int = 100
    window: int = 5
    min_count: int = 2
    negative_samples: int = 5
    epochs: int = 15
    initial_learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negative_samples < 1 or self.epochs < 1:
            raise ValueError("dim, window, negative_samples and epochs must all be >= 1")


@dataclass
class EmbeddingModel:
    vocabulary: dict[str, int]
    input_vectors: np.ndarray  # |V| x dim
    output_vectors: np.ndarray | None  # training artifact; absent after load
    dim: int
    epoch_losses: list[float] = field(default_factory=list)

    def vector(self, token: str) -> np.ndarray:
        return self.input_vectors[self.vocabulary[token]]

    @property
    def vocab_list(self) -> list[str]:
        ordered = sorted(self.vocabulary.items(), key=lambda kv: kv[1])
        return [token for token, _ in ordered]


@dataclass(frozen=True)
class FileVector:
    source: str
    values: np.ndarray
    known_token_count: int


def _build_vocabulary(documents: list[SslrDocument], min_count: int) -> tuple[dict[str, int], np.ndarray]:
    counts: Counter[str] = Counter()
    for doc in documents:
        counts.update(doc.tokens())
    surviving = [(tok, cnt) for tok, cnt in counts.items() if cnt >= min_count]
    # frequent first, alphabetical within ties: deterministic index order
    surviving.sort(key=lambda kv: (-kv[1], kv[0]))
    vocabulary = {tok: i for i, (tok, _) in enumerate(surviving)}
    freqs = np.array([cnt for _, cnt in surviving], dtype=np.float64)
    return vocabulary, freqs


def train_cbow(
    documents: list[SslrDocument],
    p: EmbedHyperparams,
    use_numba: bool | None = None,
) -> EmbeddingModel:
    """Train CBOW with negative sampling over the documents' sentences."""
    if not documents:
        raise EmptyVocabularyError("no documents to train on")
    vocabulary, freqs = _build_vocabulary(documents, p.min_count)
    if not vocabulary:
        raise EmptyVocabularyError(
            f"no token occurs at least min_count={p.min_count} times"
        )
    vocab_size = len(vocabulary)

    sentences: list[np.ndarray] = []
    for doc in documents:
        for sentence in doc.sentences:
            idx = [vocabulary[t] for t in sentence if t in vocabulary]
            if idx:
                sentences.append(np.asarray(idx, dtype=np.int32))
    targets, ctx_flat, ctx_off = build_stream(sentences, p.window)

    rng = np.random.Generator(np.random.PCG64(p.seed))
    w_in = (rng.random((vocab_size, p.dim)) - 0.5) / p.dim
    w_out = np.zeros((vocab_size, p.dim), dtype=np.float64)

    noise_cum = np.cumsum(freqs**0.75)
    n_pos = int(targets.shape[0])
    epoch_losses: list[float] = []
    if n_pos == 0:
        logger.warning("training stream is empty (all sentences too short); vectors stay at init")
        return EmbeddingModel(vocabulary, w_in, w_out, p.dim, epoch_losses)

    t_total = p.epochs * n_pos
    for epoch in range(p.epochs):
        draws = rng.random((n_pos, p.negative_samples)) * noise_cum[-1]
        negatives = np.searchsorted(noise_cum, draws, side="right").astype(np.int32)
        loss = train_epoch(
            w_in, w_out, targets, ctx_flat, ctx_off, negatives,
            p.initial_learning_rate, epoch * n_pos, t_total,
            use_numba=use_numba,
        )
        epoch_losses.append(loss / n_pos)
    return EmbeddingModel(vocabulary, w_in, w_out, p.dim, epoch_losses)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """S(x, y) = x.y / (||x|| ||y||); undefined for all-zero input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity undefined for an all-zero vector")
    return float(np.dot(u, v) / (nu * nv))


def embed_file(doc: SslrDocument, model: EmbeddingModel) -> FileVector:
    """Uniform average of the in-vocabulary token vectors of a document."""
    index_counts: Counter[int] = Counter()
    for token in doc.tokens():
        idx = model.vocabulary.get(token)
        if idx is not None:
            index_counts[idx] += 1
    total = sum(index_counts.values())
    if total == 0:
        logger.warning("document %s has no in-vocabulary token; zero vector", doc.source)
        return FileVector(source=doc.source, values=np.zeros(model.dim), known_token_count=0)
    acc = np.zeros(model.dim, dtype=np.float64)
    for idx in sorted(index_counts):
        acc += index_counts[idx] * model.input_vectors[idx]
    return FileVector(source=doc.source, values=acc / total, known_token_count=total)


# ---------------------------------------------------------------------------
# Persistence: `<vocab_size> <dim>` header line, then one `<token> <floats>`
# line per token at 9 significant digits.  Only input vectors are stored.
# ---------------------------------------------------------------------------


def render_embedding(model: EmbeddingModel) -> str:
    lines = [f"{len(model.vocabulary)} {model.dim}"]
    for token in model.vocab_list:
        vec = model.input_vectors[model.vocabulary[token]]
        lines.append(token + " " + " ".join(f"{x:.9g}" for x in vec))
    return "\n".join(lines) + "\n"


def save_embedding(model: EmbeddingModel, path: str | Path) -> None:
    Path(path).write_text(render_embedding(model), encoding="utf-8")


def parse_embedding(text: str) -> EmbeddingModel:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty embedding file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"malformed embedding header: {lines[0]!r}")
    vocab_size, dim = int(header[0]), int(header[1])
    vocabulary: dict[str, int] = {}
    vectors = np.zeros((vocab_size, dim), dtype=np.float64)
    row = 0
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise ValueError(f"embedding row has {len(parts) - 1} values, expected {dim}")
        vocabulary[parts[0]] = row
        vectors[row] = [float(x) for x in parts[1:]]
        row += 1
    if row != vocab_size:
        raise ValueError(f"embedding file declares {vocab_size} rows but has {row}")
    return EmbeddingModel(vocabulary, vectors, None, dim)


def load_embedding(path: str | Path) -> EmbeddingModel:
    return parse_embedding(Path(path).read_text(encoding="utf-8"))
