"""Question tokenization, the trainable question encoder, and the hop
classifier.

Both models mean-pool token embeddings, which keeps them cheap enough to
train from scratch on generated questions. The encoder maps the pooled
vector through one hidden rectifier layer to a 2d output read as the real
and imaginary halves of a d-dimensional complex question embedding; the
classifier is a single affine + softmax over the three hop classes. Either
can be swapped for a transformer-backed encoder behind the same
tokens-to-vector interface.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .optim import AdamW

logger = logging.getLogger(__name__)

UNKNOWN_TOKEN = "<unk>"

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; punctuation splits except intra-word hyphens."""
    return _TOKEN_RE.findall(text.lower())


class TokenVocabulary:
    """Dense token indices with a reserved unknown slot at index 0."""

    def __init__(self, tokens: Iterable[str] = ()):
        self.tokens: list[str] = []
        self.index: dict[str, int] = {}
        self._add(UNKNOWN_TOKEN)
        for tok in tokens:
            self._add(tok)

    def _add(self, tok: str) -> int:
        idx = self.index.get(tok)
        if idx is None:
            idx = len(self.tokens)
            self.index[tok] = idx
            self.tokens.append(tok)
        return idx

    @classmethod
    def build(cls, texts: Iterable[str], min_freq: int = 1) -> "TokenVocabulary":
        counts: dict[str, int] = {}
        for text in texts:
            for tok in tokenize(text):
                counts[tok] = counts.get(tok, 0) + 1
        vocab = cls()
        for tok, c in counts.items():
            if c >= min_freq:
                vocab._add(tok)
        return vocab

    @property
    def unknown_index(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.index.get(tok, 0) for tok in tokens]

    def encode_text(self, text: str) -> list[int]:
        return self.encode(tokenize(text))


def _relu(x):
    return np.maximum(x, 0.0)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _mean_pool(emb: np.ndarray, token_ids: Sequence[int]) -> np.ndarray:
    if len(token_ids) == 0:
        return np.zeros(emb.shape[1])
    return emb[list(token_ids)].mean(axis=0)


@dataclass
class QuestionEncoder:
    """tokens -> complex question embedding of dimension d."""

    vocab: TokenVocabulary
    emb: np.ndarray  # (|V|, m)
    w1: np.ndarray   # (m, m)
    b1: np.ndarray   # (m,)
    w2: np.ndarray   # (m, 2d)
    b2: np.ndarray   # (2d,)

    @property
    def m(self) -> int:
        return self.emb.shape[1]

    @property
    def d(self) -> int:
        return self.b2.size // 2

    def params(self) -> list[np.ndarray]:
        return [self.emb, self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "QuestionEncoder":
        return QuestionEncoder(
            self.vocab, self.emb.copy(), self.w1.copy(), self.b1.copy(),
            self.w2.copy(), self.b2.copy(),
        )


def init_encoder(vocab: TokenVocabulary, m: int, d: int, seed: int) -> QuestionEncoder:
    rng = np.random.default_rng(seed)

    def uniform(rows, cols):
        bound = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-bound, bound, (rows, cols))

    return QuestionEncoder(
        vocab=vocab,
        emb=uniform(len(vocab), m),
        w1=uniform(m, m),
        b1=np.zeros(m),
        w2=uniform(m, 2 * d),
        b2=np.zeros(2 * d),
    )


def encode_question(enc: QuestionEncoder, token_ids: Sequence[int]) -> np.ndarray:
    """Complex question embedding: mean-pool, hidden rectifier, affine out."""
    pooled = _mean_pool(enc.emb, token_ids)
    hidden = _relu(pooled @ enc.w1 + enc.b1)
    out = hidden @ enc.w2 + enc.b2
    d = enc.d
    return out[:d] + 1j * out[d:]


@dataclass
class HopClassifier:
    """tokens -> hop class in {1, 2, 3} via a single affine + softmax."""

    vocab: TokenVocabulary
    emb: np.ndarray  # (|V|, m)
    w: np.ndarray    # (m, 3)
    b: np.ndarray    # (3,)

    @property
    def m(self) -> int:
        return self.emb.shape[1]

    @property
    def num_classes(self) -> int:
        return self.b.size

    def params(self) -> list[np.ndarray]:
        return [self.emb, self.w, self.b]

    def copy(self) -> "HopClassifier":
        return HopClassifier(self.vocab, self.emb.copy(), self.w.copy(), self.b.copy())


def init_classifier(vocab: TokenVocabulary, m: int, seed: int, num_classes: int = 3):
    rng = np.random.default_rng(seed)
    bound = np.sqrt(6.0 / (len(vocab) + m))
    return HopClassifier(
        vocab=vocab,
        emb=rng.uniform(-bound, bound, (len(vocab), m)),
        w=rng.uniform(-np.sqrt(6.0 / (m + num_classes)), np.sqrt(6.0 / (m + num_classes)), (m, num_classes)),
        b=np.zeros(num_classes),
    )


def classify_hops(clf: HopClassifier, token_ids: Sequence[int]) -> tuple[int, np.ndarray]:
    """Predicted hop count and class probabilities.

    Exact probability ties resolve toward the smaller hop count.
    """
    pooled = _mean_pool(clf.emb, token_ids)
    probs = _softmax(pooled @ clf.w + clf.b)
    return int(np.argmax(probs)) + 1, probs


def classifier_loss_and_grads(
    clf: HopClassifier, batch: Sequence[tuple[Sequence[int], int]]
) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over (token_ids, hop_label) pairs and its
    gradients in ``clf.params()`` order."""
    n = len(batch)
    pooled = np.stack([_mean_pool(clf.emb, ids) for ids, _ in batch])
    labels = np.array([hop - 1 for _, hop in batch])
    probs = _softmax(pooled @ clf.w + clf.b)
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))

    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    g_w = pooled.T @ dlogits
    g_b = dlogits.sum(axis=0)
    dpooled = dlogits @ clf.w.T
    g_emb = np.zeros_like(clf.emb)
    for i, (ids, _) in enumerate(batch):
        if len(ids) == 0:
            continue
        np.add.at(g_emb, list(ids), dpooled[i] / len(ids))
    return loss, [g_emb, g_w, g_b]


@dataclass
class ClassifierConfig:
    m: int = 128
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 5e-3
    weight_decay: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.m < 1:
            raise ConfigError("counts must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")


def accuracy(clf: HopClassifier, data: Sequence[tuple[Sequence[int], int]]) -> float:
    if not data:
        return 0.0
    hits = sum(1 for ids, hop in data if classify_hops(clf, ids)[0] == hop)
    return hits / len(data)


def train_classifier(
    dataset: Sequence[tuple[Sequence[int], int]],
    config: ClassifierConfig,
    valid: Sequence[tuple[Sequence[int], int]] | None = None,
    vocab: TokenVocabulary | None = None,
) -> HopClassifier:
    """Mini-batch AdamW on cross-entropy; returns the best-validation
    snapshot (final model when no validation data is given)."""
    present = {hop for _, hop in dataset}
    if present != {1, 2, 3}:
        raise DataError(f"training data must contain all three hop classes, got {sorted(present)}")
    if vocab is None:
        raise ConfigError("a token vocabulary is required")
    clf = init_classifier(vocab, config.m, config.seed)
    opt = AdamW(clf.params(), lr=config.learning_rate, weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed + 1)

    best_acc = -1.0
    best: HopClassifier | None = None
    n = len(dataset)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            batch = [dataset[i] for i in perm[start : start + config.batch_size]]
            loss, grads = classifier_loss_and_grads(clf, batch)
            opt.step(grads)
            total += loss
            batches += 1
        train_acc = accuracy(clf, dataset)
        if valid:
            val_acc = accuracy(clf, valid)
            if val_acc > best_acc:
                best_acc = val_acc
                best = clf.copy()
            logger.info(
                "classifier epoch %d: loss %.4f, train acc %.4f, valid acc %.4f",
                epoch, total / batches, train_acc, val_acc,
            )
        else:
            logger.info(
                "classifier epoch %d: loss %.4f, train acc %.4f", epoch, total / batches, train_acc
            )
    return best if best is not None else clf
