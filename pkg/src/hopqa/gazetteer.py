"""Rule-based head-entity extraction.

Every graph entity's name and synonyms become gazetteer entries (the
entity inventory is closed, so a dictionary matcher beats statistical NER
here). Matching is over normalized tokens: lowercase, whitespace-collapsed,
with punctuation stripped from token edges but preserved inside tokens so
forms like "IL-6" survive. Matches respect token boundaries ("generate"
never matches "gene") and the longest match wins, leftmost on ties.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass

from .errors import NoEntityFoundError, ParseError
from .kg import KnowledgeGraph

logger = logging.getLogger(__name__)

_EDGE_PUNCT = string.punctuation


def _clean_token(tok: str) -> str:
    return tok.strip(_EDGE_PUNCT).lower()


def normalize_surface(text: str) -> tuple[str, ...]:
    """Token tuple of a surface form; idempotent."""
    out = []
    for tok in text.split():
        cleaned = _clean_token(tok)
        if cleaned:
            out.append(cleaned)
    return tuple(out)


def tokens_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Normalized tokens of ``text`` with their character spans.

    Spans cover the cleaned token (edge punctuation excluded) so a match's
    span indexes straight back into the original text.
    """
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        raw = text[i:j]
        start = i + (len(raw) - len(raw.lstrip(_EDGE_PUNCT)))
        end = j - (len(raw) - len(raw.rstrip(_EDGE_PUNCT)))
        if end > start:
            out.append((text[start:end].lower(), start, end))
        i = j
    return out


@dataclass(frozen=True)
class HeadMatch:
    """Winning gazetteer match: one entity, or several on an ambiguous form."""

    entity_ids: tuple[int, ...]
    span: tuple[int, int]
    surface: str

    @property
    def ambiguous(self) -> bool:
        return len(self.entity_ids) > 1

    @property
    def entity(self) -> int:
        return self.entity_ids[0]


class Gazetteer:
    """Normalized surface form -> entity ids, with longest-match scanning."""

    def __init__(self):
        self.entries: dict[tuple[str, ...], list[int]] = {}
        self.max_tokens = 0
        self.skipped_unnamed = 0

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, surface: str, entity_idx: int):
        key = normalize_surface(surface)
        if not key:
            return
        owners = self.entries.setdefault(key, [])
        if entity_idx not in owners:
            owners.append(entity_idx)
        self.max_tokens = max(self.max_tokens, len(key))

    def lookup(self, surface: str) -> list[int]:
        return list(self.entries.get(normalize_surface(surface), ()))

    def surfaces(self) -> list[tuple[str, int]]:
        """(normalized surface, entity) pairs, for prefix search."""
        out = []
        for key, owners in self.entries.items():
            text = " ".join(key)
            for idx in owners:
                out.append((text, idx))
        return out


def build_gazetteer(kg: KnowledgeGraph, synonyms_path=None) -> Gazetteer:
    """Entries from every node's name and synonyms; optionally augmented
    from a 2-column TSV of (entity-id, synonym) rows.

    Entities without any name are skipped and counted. Colliding surface
    forms keep all owning entities; ambiguity is reported at match time.
    """
    gz = Gazetteer()
    for idx in range(kg.num_entities):
        meta = kg.node_meta.get(idx)
        if meta is None or not normalize_surface(meta.name):
            gz.skipped_unnamed += 1
            continue
        gz.add(meta.name, idx)
        for syn in meta.synonyms:
            gz.add(syn, idx)
    if synonyms_path is not None:
        with open(synonyms_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise ParseError(synonyms_path, line_no, "expected 2 fields")
                ent_id, synonym = fields
                if ent_id not in kg.entities:
                    raise ParseError(synonyms_path, line_no, f"unknown entity {ent_id!r}")
                gz.add(synonym, kg.entities.index[ent_id])
    if gz.skipped_unnamed:
        logger.info("gazetteer: skipped %d unnamed entities", gz.skipped_unnamed)
    return gz


def find_matches(question: str, gz: Gazetteer) -> list[tuple[int, int, tuple[str, ...]]]:
    """All gazetteer matches as (token_start, token_len, key) tuples."""
    toks = tokens_with_spans(question)
    words = [t[0] for t in toks]
    matches = []
    for i in range(len(words)):
        limit = min(gz.max_tokens, len(words) - i)
        for length in range(limit, 0, -1):
            key = tuple(words[i : i + length])
            if key in gz.entries:
                matches.append((i, length, key))
    return matches


def extract_head(question: str, gz: Gazetteer) -> HeadMatch:
    """Longest gazetteer match in the question (leftmost on length ties).

    Returns every owning entity when the winning surface form is ambiguous;
    raises :class:`NoEntityFoundError` when nothing matches.
    """
    if not gz.entries:
        raise NoEntityFoundError(question)
    toks = tokens_with_spans(question)
    words = [t[0] for t in toks]
    best: tuple[int, int] | None = None  # (token_start, token_len)
    for i in range(len(words)):
        limit = min(gz.max_tokens, len(words) - i)
        for length in range(limit, 0, -1):
            if length <= (best[1] if best else 0):
                break
            key = tuple(words[i : i + length])
            if key in gz.entries:
                best = (i, length)
                break
    if best is None:
        raise NoEntityFoundError(question)
    i, length = best
    start = toks[i][1]
    end = toks[i + length - 1][2]
    key = tuple(words[i : i + length])
    return HeadMatch(
        entity_ids=tuple(gz.entries[key]),
        span=(start, end),
        surface=question[start:end],
    )
