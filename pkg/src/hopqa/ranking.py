"""Filtered rank-based link-prediction evaluation.

Each evaluation triple yields a tail query and a head query; every other
triple known to be true is masked out of the candidate list (filtered
setting). Besides arithmetic mean rank and hits@k, the report carries the
adjusted variants that divide out the expected rank of a random scorer, so
results stay comparable across candidate-set sizes: the adjusted mean rank
AMR/E[rank] in (0,2) where lower is better, and its index
1 - (AMR-1)/(E[rank]-1) in [-1,1] where 1 is perfect and 0 is random.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError
from .kg import Triple
from .kge import ComplexModel, score_all_heads, score_all_tails


@dataclass(frozen=True)
class RankRecord:
    """Rank of one query's true answer under three tie conventions."""

    optimistic: int
    pessimistic: int
    realistic: float
    num_candidates: int


@dataclass
class MetricsReport:
    amr: float
    aamr: float
    aamri: float
    hits_at: dict[int, float]

    def to_text(self) -> str:
        lines = [
            f"amr: {self.amr:.4f}",
            f"aamr: {self.aamr:.6f}",
            f"aamri: {self.aamri:.6f}",
        ]
        for k in sorted(self.hits_at):
            lines.append(f"hits@{k}: {self.hits_at[k]:.4f}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "amr": self.amr,
                "aamr": self.aamr,
                "aamri": self.aamri,
                "hits_at": {str(k): v for k, v in self.hits_at.items()},
            }
        )


def compute_rank(
    scores: np.ndarray, true_idx: int, filter_mask: np.ndarray | None = None
) -> RankRecord:
    """Rank of ``true_idx`` among unmasked candidates.

    Optimistic counts only strictly better scores; pessimistic counts all
    scores at least as good (the true entry included); realistic is their
    mean, which averages out ties.
    """
    scores = np.asarray(scores)
    if filter_mask is not None:
        filter_mask = np.asarray(filter_mask, dtype=bool)
        if filter_mask.shape != scores.shape:
            raise ContractError("filter mask and scores must have the same length")
        if filter_mask[true_idx]:
            raise ContractError(f"true index {true_idx} is masked")
        kept = scores[~filter_mask]
    else:
        kept = scores
    true_score = scores[true_idx]
    optimistic = 1 + int(np.sum(kept > true_score))
    pessimistic = int(np.sum(kept >= true_score))
    return RankRecord(
        optimistic=optimistic,
        pessimistic=pessimistic,
        realistic=(optimistic + pessimistic) / 2.0,
        num_candidates=int(kept.size),
    )


def summarize_ranks(records: Sequence[RankRecord], ks: Iterable[int]) -> MetricsReport:
    """Aggregate per-query ranks into the adjusted-metric report."""
    if not records:
        raise ContractError("no rank records to summarize")
    realistic = np.array([rec.realistic for rec in records])
    amr = float(np.mean(realistic))
    # Expected realistic rank of a uniformly random scorer per query.
    expected = np.array([(rec.num_candidates + 1) / 2.0 for rec in records])
    xi = float(np.mean(expected))
    aamr = amr / xi
    aamri = 1.0 if xi == 1.0 else 1.0 - (amr - 1.0) / (xi - 1.0)
    # mathematically in [-1, 1]; division rounding can overshoot by one ulp
    aamri = min(1.0, max(-1.0, aamri))
    hits = {int(k): float(np.mean(realistic <= k)) for k in ks}
    return MetricsReport(amr=amr, aamr=aamr, aamri=aamri, hits_at=hits)


def evaluate_link_prediction(
    model: ComplexModel,
    eval_triples: Iterable[Triple],
    all_known_triples: set[Triple],
    ks: Iterable[int] = (1, 3, 10),
    filtered: bool = True,
) -> MetricsReport:
    """Two-sided (tail and head) ranking over the full entity set.

    In the filtered setting, every other triple present in
    ``all_known_triples`` is masked out of a query's candidates.
    """
    eval_list = sorted(eval_triples)
    if not eval_list:
        raise ContractError("evaluation triple set must be non-empty")

    known_tails: dict[tuple[int, int], list[int]] = {}
    known_heads: dict[tuple[int, int], list[int]] = {}
    if filtered:
        for h, r, t in all_known_triples:
            known_tails.setdefault((h, r), []).append(t)
            known_heads.setdefault((r, t), []).append(h)

    n = model.num_entities
    records: list[RankRecord] = []
    for h, r, t in eval_list:
        tail_scores = score_all_tails(model, h, r)
        mask = None
        if filtered:
            mask = np.zeros(n, dtype=bool)
            mask[known_tails.get((h, r), ())] = True
            mask[t] = False
        records.append(compute_rank(tail_scores, t, mask))

        head_scores = score_all_heads(model, r, t)
        mask = None
        if filtered:
            mask = np.zeros(n, dtype=bool)
            mask[known_heads.get((r, t), ())] = True
            mask[h] = False
        records.append(compute_rank(head_scores, h, mask))

    return summarize_ranks(records, ks)
