"""Answer scoring and the question-to-ranked-answers pipeline.

A question's complex embedding stands in the relation slot of the triple
scoring function, so scoring every candidate answer against the head entity
is the same two matrix products as tail prediction. Per-hop encoders train
against a frozen embedding model with a sigmoid/BCE objective over the full
entity set, which handles multi-answer questions natively.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AmbiguousEntityError,
    ConfigError,
    ContractError,
    DataError,
    DivergenceError,
)
from .gazetteer import Gazetteer, extract_head
from .kg import KnowledgeGraph
from .kge import ComplexModel, _sigmoid, _softplus
from .optim import AdamW
from .questions import (
    HopClassifier,
    QuestionEncoder,
    TokenVocabulary,
    classify_hops,
    encode_question,
    init_encoder,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QAExample:
    question: str
    head: int
    answers: frozenset[int]
    hops: int
    template_id: str | None = None

    def __post_init__(self):
        if not self.answers:
            raise ContractError("a QA example needs at least one answer")
        if self.hops not in (1, 2, 3):
            raise ContractError(f"hop count must be 1..3, got {self.hops}")


def score_answers(model: ComplexModel, head: int, question_vec: np.ndarray) -> np.ndarray:
    """Score every entity as an answer, with the question vector in the
    relation slot of the trilinear form."""
    question_vec = np.asarray(question_vec)
    if question_vec.shape != (model.d,):
        raise ContractError(
            f"question vector has dimension {question_vec.shape}, expected ({model.d},)"
        )
    if not 0 <= head < model.num_entities:
        raise IndexError(f"entity index {head} out of range")
    hre, him = model.entity_re[head], model.entity_im[head]
    qre, qim = question_vec.real, question_vec.imag
    coef_re = hre * qre - him * qim
    coef_im = him * qre + hre * qim
    return model.entity_re @ coef_re + model.entity_im @ coef_im


def ranked_entities(scores: np.ndarray, exclude: Sequence[int] = ()) -> np.ndarray:
    """Entity indices by descending score; ties resolve to the smaller index."""
    order = np.lexsort((np.arange(len(scores)), -scores))
    if len(exclude) == 0:
        return order
    drop = np.zeros(len(scores), dtype=bool)
    drop[list(exclude)] = True
    return order[~drop[order]]


def smoothed_targets(
    answer_sets: Sequence[frozenset[int]], num_entities: int, label_smoothing: float
) -> np.ndarray:
    """Multi-hot answer targets interpolated toward uniform: answers get
    ~1-eps, everything else eps/|entities|."""
    targets = np.full((len(answer_sets), num_entities), label_smoothing / num_entities)
    for i, answers in enumerate(answer_sets):
        targets[i, list(answers)] += 1.0 - label_smoothing
    return targets


def qa_loss_and_grads(
    model: ComplexModel,
    enc: QuestionEncoder,
    batch: Sequence[tuple[Sequence[int], int, frozenset[int]]],
    label_smoothing: float = 0.1,
) -> tuple[float, list[np.ndarray]]:
    """Binary cross-entropy of sigmoid answer scores against smoothed
    multi-hot targets; gradients in ``enc.params()`` order only (the
    embedding model is frozen)."""
    if not batch:
        raise ContractError("batch must be non-empty")
    d = enc.d
    n_ent = model.num_entities
    heads = np.array([head for _, head, _ in batch])

    pooled = np.stack(
        [
            enc.emb[list(ids)].mean(axis=0) if len(ids) else np.zeros(enc.m)
            for ids, _, _ in batch
        ]
    )
    pre_hidden = pooled @ enc.w1 + enc.b1
    hidden = np.maximum(pre_hidden, 0.0)
    out = hidden @ enc.w2 + enc.b2
    q_re, q_im = out[:, :d], out[:, d:]

    h_re = model.entity_re[heads]
    h_im = model.entity_im[heads]
    c_re = h_re * q_re - h_im * q_im
    c_im = h_im * q_re + h_re * q_im
    scores = c_re @ model.entity_re.T + c_im @ model.entity_im.T

    targets = smoothed_targets([a for _, _, a in batch], n_ent, label_smoothing)
    loss = float(
        np.mean(targets * _softplus(-scores) + (1.0 - targets) * _softplus(scores))
    )

    dscores = (_sigmoid(scores) - targets) / scores.size
    dc_re = dscores @ model.entity_re
    dc_im = dscores @ model.entity_im
    dq_re = h_re * dc_re + h_im * dc_im
    dq_im = -h_im * dc_re + h_re * dc_im
    dout = np.concatenate([dq_re, dq_im], axis=1)

    g_w2 = hidden.T @ dout
    g_b2 = dout.sum(axis=0)
    dhidden = dout @ enc.w2.T
    dpre = dhidden * (pre_hidden > 0)
    g_w1 = pooled.T @ dpre
    g_b1 = dpre.sum(axis=0)
    dpooled = dpre @ enc.w1.T
    g_emb = np.zeros_like(enc.emb)
    for i, (ids, _, _) in enumerate(batch):
        if len(ids):
            np.add.at(g_emb, list(ids), dpooled[i] / len(ids))
    return loss, [g_emb, g_w1, g_b1, g_w2, g_b2]


@dataclass
class QATrainConfig:
    m: int = 128
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 2e-3
    weight_decay: float = 1e-5
    label_smoothing: float = 0.1
    patience: int = 20
    eval_every: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("m", "epochs", "batch_size", "patience", "eval_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ConfigError("label_smoothing must be in [0, 1)")


def _encode_examples(
    examples: Sequence[QAExample], vocab: TokenVocabulary
) -> list[tuple[list[int], int, frozenset[int]]]:
    return [(vocab.encode_text(ex.question), ex.head, ex.answers) for ex in examples]


def train_qa(
    model: ComplexModel,
    train: Sequence[QAExample],
    valid: Sequence[QAExample],
    config: QATrainConfig,
    vocab: TokenVocabulary,
) -> QuestionEncoder:
    """Train one hop class's question encoder against the frozen model.

    Early-stops on validation hits@10 with the same patience rule as
    embedding training and returns the best-validation snapshot.
    """
    if not train:
        raise ContractError("training examples required")
    hop_classes = {ex.hops for ex in train}
    if len(hop_classes) != 1:
        raise DataError(f"train_qa expects a single hop class, got {sorted(hop_classes)}")

    encoded_train = _encode_examples(train, vocab)
    enc = init_encoder(vocab, config.m, model.d, config.seed)
    opt = AdamW(enc.params(), lr=config.learning_rate, weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed + 1)

    best_metric = -np.inf
    best: QuestionEncoder | None = None
    stagnant = 0
    n = len(encoded_train)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            batch = [encoded_train[i] for i in perm[start : start + config.batch_size]]
            loss, grads = qa_loss_and_grads(model, enc, batch, config.label_smoothing)
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            opt.step(grads)
            total += loss
            batches += 1
        if valid and epoch % config.eval_every == 0:
            metric = evaluate_qa(model, enc, valid, k=10)
            if metric > best_metric:
                best_metric = metric
                best = enc.copy()
                stagnant = 0
            else:
                stagnant += 1
            logger.info(
                "qa epoch %d: loss %.5f, valid hits@10 %.4f (best %.4f)",
                epoch, total / batches, metric, best_metric,
            )
            if stagnant >= config.patience:
                logger.info("qa early stop at epoch %d", epoch)
                break
        else:
            logger.debug("qa epoch %d: loss %.5f", epoch, total / batches)
    return best if best is not None else enc


def hits_at_k(
    score_fn: Callable[[QAExample], np.ndarray],
    examples: Sequence[QAExample],
    k: int = 10,
) -> float:
    """Fraction of questions with a gold answer in the top k (head masked)."""
    if not examples:
        raise ContractError("evaluation set must be non-empty")
    hits = 0
    for ex in examples:
        top = ranked_entities(score_fn(ex), exclude=(ex.head,))[:k]
        if ex.answers.intersection(top.tolist()):
            hits += 1
    return hits / len(examples)


def evaluate_qa(
    model: ComplexModel,
    encoder: QuestionEncoder,
    examples: Sequence[QAExample],
    k: int = 10,
) -> float:
    vocab = encoder.vocab

    def score_fn(ex: QAExample) -> np.ndarray:
        return score_answers(model, ex.head, encode_question(encoder, vocab.encode_text(ex.question)))

    return hits_at_k(score_fn, examples, k)


@dataclass(frozen=True)
class ScoredAnswer:
    index: int
    entity_id: str
    name: str
    kind: str
    score: float


@dataclass(frozen=True)
class AnswerResult:
    head: int
    head_id: str
    head_name: str
    span: tuple[int, int]
    hops: int
    hop_probs: tuple[float, float, float]
    answers: tuple[ScoredAnswer, ...]


@dataclass
class QAPipeline:
    """Everything the ask path needs, immutable once assembled."""

    kg: KnowledgeGraph
    model: ComplexModel
    gazetteer: Gazetteer
    classifier: HopClassifier
    encoders: dict[int, QuestionEncoder]
    top_k: int = 10
    fingerprint: str = ""

    def __post_init__(self):
        missing = {1, 2, 3} - set(self.encoders)
        if missing:
            raise ConfigError(f"missing encoders for hop classes {sorted(missing)}")


def answer_question(pipeline: QAPipeline, question: str, top_k: int | None = None) -> AnswerResult:
    """Full ask path: head extraction, hop routing, answer scoring.

    The head entity is masked from the candidates; results are sorted by
    descending score with index ties ascending. Ambiguous head matches raise
    :class:`AmbiguousEntityError` with the candidate list.
    """
    match = extract_head(question, pipeline.gazetteer)
    if match.ambiguous:
        raise AmbiguousEntityError(match.surface, match.entity_ids)
    head = match.entity

    hop, probs = classify_hops(
        pipeline.classifier, pipeline.classifier.vocab.encode_text(question)
    )
    encoder = pipeline.encoders[hop]
    question_vec = encode_question(encoder, encoder.vocab.encode_text(question))
    scores = score_answers(pipeline.model, head, question_vec)

    k = pipeline.top_k if top_k is None else top_k
    top = ranked_entities(scores, exclude=(head,))[:k]
    kg = pipeline.kg
    answers = tuple(
        ScoredAnswer(
            index=int(idx),
            entity_id=kg.entities[int(idx)],
            name=kg.name_of(int(idx)),
            kind=kg.kind_of(int(idx)),
            score=float(scores[int(idx)]),
        )
        for idx in top
    )
    return AnswerResult(
        head=head,
        head_id=kg.entities[head],
        head_name=kg.name_of(head),
        span=match.span,
        hops=hop,
        hop_probs=tuple(float(p) for p in probs),
        answers=answers,
    )
