"""Complex-valued knowledge graph embeddings.

Entities and relations live in C^d, stored as paired real/imaginary float64
matrices. A triple (h, r, t) is scored by the real part of the trilinear
product with the tail conjugated:

    score = sum_k  h_re*r_re*t_re + h_im*r_re*t_im + h_re*r_im*t_im - h_im*r_im*t_re

True triples are driven above zero and corrupted ones below via a logistic
loss over sampled negatives. Parameter updates use row-wise AdaGrad with
decoupled L2 decay on the rows touched by each batch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels as kernels
from .errors import ConfigError, ContractError, DivergenceError, ExhaustedNegativesError
from .kg import KnowledgeGraph, Triple

logger = logging.getLogger(__name__)

CORRUPTION_MODES = ("head", "tail", "both")


@dataclass
class ComplexModel:
    """Embedding tables: real/imaginary parts for entities and relations."""

    entity_re: np.ndarray
    entity_im: np.ndarray
    relation_re: np.ndarray
    relation_im: np.ndarray

    def __post_init__(self):
        if not (
            self.entity_re.shape == self.entity_im.shape
            and self.relation_re.shape == self.relation_im.shape
            and self.entity_re.shape[1] == self.relation_re.shape[1]
        ):
            raise ContractError("embedding matrices disagree on shape")

    @property
    def d(self) -> int:
        return self.entity_re.shape[1]

    @property
    def num_entities(self) -> int:
        return self.entity_re.shape[0]

    @property
    def num_relations(self) -> int:
        return self.relation_re.shape[0]

    def copy(self) -> "ComplexModel":
        return ComplexModel(
            self.entity_re.copy(),
            self.entity_im.copy(),
            self.relation_re.copy(),
            self.relation_im.copy(),
        )

    def all_finite(self) -> bool:
        return all(
            np.isfinite(m).all()
            for m in (self.entity_re, self.entity_im, self.relation_re, self.relation_im)
        )


@dataclass
class TrainConfig:
    d: int = 64
    epochs: int = 200
    batch_size: int = 256
    learning_rate: float = 0.1
    negatives_per_positive: int = 8
    l2_weight: float = 0.05
    patience: int = 20
    eval_every: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("d", "epochs", "batch_size", "negatives_per_positive", "eval_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.l2_weight < 0:
            raise ConfigError(f"l2_weight must be >= 0, got {self.l2_weight}")


@dataclass
class SparseGrads:
    """Gradients restricted to the embedding rows a batch touched."""

    entity_rows: np.ndarray
    entity_re: np.ndarray
    entity_im: np.ndarray
    relation_rows: np.ndarray
    relation_re: np.ndarray
    relation_im: np.ndarray


@dataclass
class EvalRecord:
    epoch: int
    metric: float
    best_so_far: float


def init_model(num_entities: int, num_relations: int, d: int, seed: int) -> ComplexModel:
    """Seeded uniform initialization in [-0.5/sqrt(d), 0.5/sqrt(d)]."""
    rng = np.random.default_rng(seed)
    bound = 0.5 / np.sqrt(d)
    shape_e = (num_entities, d)
    shape_r = (num_relations, d)
    return ComplexModel(
        entity_re=rng.uniform(-bound, bound, shape_e),
        entity_im=rng.uniform(-bound, bound, shape_e),
        relation_re=rng.uniform(-bound, bound, shape_r),
        relation_im=rng.uniform(-bound, bound, shape_r),
    )


def _check_entity(model: ComplexModel, idx: int):
    if not 0 <= idx < model.num_entities:
        raise IndexError(f"entity index {idx} out of range")


def _check_relation(model: ComplexModel, idx: int):
    if not 0 <= idx < model.num_relations:
        raise IndexError(f"relation index {idx} out of range")


def score_triple(model: ComplexModel, h: int, r: int, t: int) -> float:
    """Real part of <e_h, e_r, conj(e_t)> for one triple."""
    _check_entity(model, h)
    _check_relation(model, r)
    _check_entity(model, t)
    hre, him = model.entity_re[h], model.entity_im[h]
    rre, rim = model.relation_re[r], model.relation_im[r]
    tre, tim = model.entity_re[t], model.entity_im[t]
    return float(
        hre @ (rre * tre) + him @ (rre * tim) + hre @ (rim * tim) - him @ (rim * tre)
    )


def score_all_tails(model: ComplexModel, h: int, r: int) -> np.ndarray:
    """Scores of (h, r, a) for every entity a, as two matrix products."""
    _check_entity(model, h)
    _check_relation(model, r)
    hre, him = model.entity_re[h], model.entity_im[h]
    rre, rim = model.relation_re[r], model.relation_im[r]
    coef_re = hre * rre - him * rim
    coef_im = him * rre + hre * rim
    return model.entity_re @ coef_re + model.entity_im @ coef_im


def score_all_heads(model: ComplexModel, r: int, t: int) -> np.ndarray:
    """Scores of (a, r, t) for every entity a.

    Uses the conjugation identity score(h,r,t) = score(t, conj(r), h), so a
    head query is a tail query with the relation's imaginary part negated.
    """
    _check_relation(model, r)
    _check_entity(model, t)
    tre, tim = model.entity_re[t], model.entity_im[t]
    rre, rim = model.relation_re[r], model.relation_im[r]
    coef_re = tre * rre + tim * rim
    coef_im = tim * rre - tre * rim
    return model.entity_re @ coef_re + model.entity_im @ coef_im


def corrupt_triple(
    triple: Triple,
    kg: KnowledgeGraph,
    rng: np.random.Generator,
    max_retries: int = 100,
    forbidden: set[Triple] | None = None,
    mode: str | None = None,
) -> Triple:
    """Sample a corrupted variant of ``triple`` by rejection.

    The corruption mode (replace head, tail, or both) is drawn uniformly per
    attempt unless forced via ``mode``. Rejected candidates: members of
    ``forbidden`` (the training triple set), the input triple itself, and
    self-loops (head == tail), which are degenerate negatives.
    """
    n = kg.num_entities
    if n < 2:
        raise ContractError("corruption needs at least 2 entities")
    if forbidden is None:
        forbidden = kg.triples
    h, r, t = triple
    for _ in range(max_retries):
        m = mode if mode is not None else CORRUPTION_MODES[rng.integers(3)]
        h2, t2 = h, t
        if m in ("head", "both"):
            h2 = int(rng.integers(n))
        if m in ("tail", "both"):
            t2 = int(rng.integers(n))
        candidate = (h2, r, t2)
        if candidate == triple or h2 == t2 or candidate in forbidden:
            continue
        return candidate
    raise ExhaustedNegativesError(
        f"no negative found for {triple} after {max_retries} attempts"
    )


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _batch_arrays(batch: Sequence[tuple[Triple, int]]):
    h = np.fromiter((b[0][0] for b in batch), dtype=np.int64, count=len(batch))
    r = np.fromiter((b[0][1] for b in batch), dtype=np.int64, count=len(batch))
    t = np.fromiter((b[0][2] for b in batch), dtype=np.int64, count=len(batch))
    y = np.fromiter((b[1] for b in batch), dtype=np.float64, count=len(batch))
    return h, r, t, y


def loss_and_gradient(
    model: ComplexModel,
    batch: Sequence[tuple[Triple, int]],
    l2_weight: float = 0.0,
) -> tuple[float, SparseGrads]:
    """Mean logistic loss over a labeled batch plus an L2 penalty on the
    touched rows, with analytic gradients restricted to those rows.

    The penalty is ``l2_weight`` times the mean squared norm of the distinct
    entity and relation rows appearing in the batch.
    """
    if len(batch) == 0:
        raise ContractError("batch must be non-empty")
    h, r, t, y = _batch_arrays(batch)
    scores = kernels.batch_scores(
        model.entity_re, model.entity_im, model.relation_re, model.relation_im, h, r, t
    )
    margins = y * scores
    loss = float(np.mean(_softplus(-margins)))
    # d/ds softplus(-y*s) = -y * sigmoid(-y*s); mean over the batch.
    coef = -y * _sigmoid(-margins) / len(batch)

    ent_rows, ent_inv = np.unique(np.concatenate([h, t]), return_inverse=True)
    rel_rows, rel_inv = np.unique(r, return_inverse=True)
    ent_inv = ent_inv.astype(np.int64)
    rel_inv = rel_inv.astype(np.int64)
    d = model.d
    g_ent_re = np.zeros((len(ent_rows), d))
    g_ent_im = np.zeros((len(ent_rows), d))
    g_rel_re = np.zeros((len(rel_rows), d))
    g_rel_im = np.zeros((len(rel_rows), d))
    kernels.accumulate_grads(
        model.entity_re, model.entity_im, model.relation_re, model.relation_im,
        h, r, t, coef,
        ent_inv[: len(h)], rel_inv, ent_inv[len(h) :],
        g_ent_re, g_ent_im, g_rel_re, g_rel_im,
    )

    if l2_weight > 0.0:
        ent_re = model.entity_re[ent_rows]
        ent_im = model.entity_im[ent_rows]
        rel_re = model.relation_re[rel_rows]
        rel_im = model.relation_im[rel_rows]
        n_touched = len(ent_rows) + len(rel_rows)
        sq = (
            np.sum(ent_re**2) + np.sum(ent_im**2) + np.sum(rel_re**2) + np.sum(rel_im**2)
        )
        loss += l2_weight * sq / n_touched
        scale = 2.0 * l2_weight / n_touched
        g_ent_re += scale * ent_re
        g_ent_im += scale * ent_im
        g_rel_re += scale * rel_re
        g_rel_im += scale * rel_im

    grads = SparseGrads(ent_rows, g_ent_re, g_ent_im, rel_rows, g_rel_re, g_rel_im)
    return loss, grads


def default_valid_metric(
    valid: Iterable[Triple], known: set[Triple], k: int = 10
) -> Callable[[ComplexModel], float]:
    """Filtered hits@k on the validation triples (the early-stopping metric)."""
    valid_list = sorted(valid)

    def metric(model: ComplexModel) -> float:
        from .ranking import evaluate_link_prediction

        report = evaluate_link_prediction(model, valid_list, known, ks=(k,))
        return report.hits_at[k]

    return metric


def train_kge(
    train: set[Triple] | Sequence[Triple],
    valid: set[Triple] | Sequence[Triple],
    kg: KnowledgeGraph,
    config: TrainConfig,
    eval_fn: Callable[[ComplexModel], float] | None = None,
    on_eval: Callable[[EvalRecord], None] | None = None,
) -> ComplexModel:
    """Train embeddings by SGD over shuffled mini-batches with sampled
    negatives, early-stopping on validation hits@10.

    Validation runs every ``config.eval_every`` epochs; training stops once
    the metric has not improved for ``config.patience`` consecutive
    evaluations, and the best-validation snapshot is returned. An empty
    validation set disables early stopping (all epochs run, final model
    returned). Bit-reproducible for a fixed seed on one machine.
    """
    train_list = sorted(train)
    if not train_list:
        raise ContractError("training triple set must be non-empty")
    valid_list = sorted(valid)
    model = init_model(kg.num_entities, kg.num_relations, config.d, config.seed)
    rng = np.random.default_rng(config.seed + 1)

    if eval_fn is None and valid_list:
        eval_fn = default_valid_metric(valid_list, set(train_list) | set(valid_list))

    forbidden = set(train_list)
    accum = {
        "entity_re": np.zeros(kg.num_entities),
        "entity_im": np.zeros(kg.num_entities),
        "relation_re": np.zeros(kg.num_relations),
        "relation_im": np.zeros(kg.num_relations),
    }
    decay = config.learning_rate * config.l2_weight

    best_metric = -np.inf
    best_model = None
    stagnant = 0
    n = len(train_list)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            positives = [train_list[i] for i in perm[start : start + config.batch_size]]
            batch: list[tuple[Triple, int]] = [(p, 1) for p in positives]
            for p in positives:
                for _ in range(config.negatives_per_positive):
                    batch.append((corrupt_triple(p, kg, rng, forbidden=forbidden), -1))
            loss, grads = loss_and_gradient(model, batch, l2_weight=0.0)
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            epoch_loss += loss
            n_batches += 1

            kernels.adagrad_update(
                model.entity_re, accum["entity_re"], grads.entity_rows,
                grads.entity_re, config.learning_rate, 1e-8,
            )
            kernels.adagrad_update(
                model.entity_im, accum["entity_im"], grads.entity_rows,
                grads.entity_im, config.learning_rate, 1e-8,
            )
            kernels.adagrad_update(
                model.relation_re, accum["relation_re"], grads.relation_rows,
                grads.relation_re, config.learning_rate, 1e-8,
            )
            kernels.adagrad_update(
                model.relation_im, accum["relation_im"], grads.relation_rows,
                grads.relation_im, config.learning_rate, 1e-8,
            )
            if decay > 0.0:
                for table, rows in (
                    (model.entity_re, grads.entity_rows),
                    (model.entity_im, grads.entity_rows),
                    (model.relation_re, grads.relation_rows),
                    (model.relation_im, grads.relation_rows),
                ):
                    table[rows] *= 1.0 - decay

        if eval_fn is not None and epoch % config.eval_every == 0:
            metric = float(eval_fn(model))
            if metric > best_metric:
                best_metric = metric
                best_model = model.copy()
                stagnant = 0
            else:
                stagnant += 1
            if on_eval is not None:
                on_eval(EvalRecord(epoch=epoch, metric=metric, best_so_far=best_metric))
            logger.info(
                "epoch %d: loss %.4f, valid metric %.4f (best %.4f, stagnant %d)",
                epoch, epoch_loss / max(n_batches, 1), metric, best_metric, stagnant,
            )
            if stagnant >= config.patience:
                logger.info("early stop at epoch %d", epoch)
                break
        else:
            logger.debug("epoch %d: loss %.4f", epoch, epoch_loss / max(n_batches, 1))

    return best_model if best_model is not None else model
