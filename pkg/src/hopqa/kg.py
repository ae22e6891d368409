"""Triple store: TSV ingestion, adjacency indexes, metapath traversal.

The graph is immutable after :func:`load_kg`; everything downstream
(embedding training, question generation, the gazetteer) reads from it
concurrently without locking.

File formats
------------
triples: 3-column TSV ``head-id <TAB> relation-id <TAB> tail-id``
nodes:   3/4-column TSV ``id <TAB> name <TAB> kind [<TAB> syn1|syn2|...]``
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError

logger = logging.getLogger(__name__)

FORWARD = "fwd"
INVERSE = "inv"

Triple = tuple[int, int, int]


class Vocabulary:
    """Ordered string vocabulary with dense indices in first-appearance order."""

    def __init__(self, ids: Iterable[str] = ()):
        self.ids: list[str] = []
        self.index: dict[str, int] = {}
        for s in ids:
            self.add(s)

    def add(self, s: str) -> int:
        idx = self.index.get(s)
        if idx is None:
            idx = len(self.ids)
            self.index[s] = idx
            self.ids.append(s)
        return idx

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, s: str) -> bool:
        return s in self.index

    def __getitem__(self, idx: int) -> str:
        return self.ids[idx]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.ids == other.ids


@dataclass(frozen=True)
class NodeMeta:
    name: str = ""
    kind: str = ""
    synonyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class Metapath:
    """A sequence of directed relation steps, up to three hops."""

    steps: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if len(self.steps) > 3:
            raise ValueError(f"metapath length {len(self.steps)} exceeds 3 hops")
        for rel, direction in self.steps:
            if direction not in (FORWARD, INVERSE):
                raise ValueError(f"bad direction {direction!r}")

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class LoadSummary:
    entities: int
    relations: int
    triples: int
    duplicates_dropped: int

    def __str__(self) -> str:
        return (
            f"entities: {self.entities}\n"
            f"relations: {self.relations}\n"
            f"triples: {self.triples}\n"
            f"duplicates dropped: {self.duplicates_dropped}"
        )


@dataclass
class KnowledgeGraph:
    """Entity/relation vocabularies, the deduplicated triple set, and
    adjacency indexes in both edge directions."""

    entities: Vocabulary
    relations: Vocabulary
    triples: set[Triple]
    out_adjacency: list[list[tuple[int, int]]]
    in_adjacency: list[list[tuple[int, int]]]
    node_meta: dict[int, NodeMeta] = field(default_factory=dict)
    summary: LoadSummary | None = None

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[tuple[str, str, str]],
        node_rows: Iterable[tuple[str, str, str, Sequence[str]]] = (),
    ) -> "KnowledgeGraph":
        """Build a graph from in-memory id triples (test/tool convenience)."""
        entities = Vocabulary()
        relations = Vocabulary()
        triple_set: set[Triple] = set()
        n_seen = 0
        for h, r, t in triples:
            n_seen += 1
            triple_set.add((entities.add(h), relations.add(r), entities.add(t)))
        meta: dict[int, NodeMeta] = {}
        for ent_id, name, kind, synonyms in node_rows:
            idx = entities.add(ent_id)
            meta[idx] = NodeMeta(name=name, kind=kind, synonyms=tuple(synonyms))
        out_adj, in_adj = _build_adjacency(len(entities), triple_set)
        return cls(
            entities=entities,
            relations=relations,
            triples=triple_set,
            out_adjacency=out_adj,
            in_adjacency=in_adj,
            node_meta=meta,
            summary=LoadSummary(
                len(entities), len(relations), len(triple_set), n_seen - len(triple_set)
            ),
        )

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def name_of(self, idx: int) -> str:
        meta = self.node_meta.get(idx)
        return meta.name if meta and meta.name else self.entities[idx]

    def kind_of(self, idx: int) -> str:
        meta = self.node_meta.get(idx)
        return meta.kind if meta else ""


def _build_adjacency(n_entities: int, triples: set[Triple]):
    out_adj: list[list[tuple[int, int]]] = [[] for _ in range(n_entities)]
    in_adj: list[list[tuple[int, int]]] = [[] for _ in range(n_entities)]
    for h, r, t in sorted(triples):
        out_adj[h].append((r, t))
        in_adj[t].append((r, h))
    return out_adj, in_adj


def load_kg(triples_path, nodes_path=None) -> KnowledgeGraph:
    """Load a graph from a triples TSV and an optional nodes TSV.

    Vocabulary indices follow first appearance in the triples file, then the
    nodes file; duplicate triple lines collapse silently (counted in the
    summary); entities present only in the nodes file are still registered.
    """
    entities = Vocabulary()
    relations = Vocabulary()
    triples: set[Triple] = set()
    n_lines = 0
    with open(triples_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    triples_path, line_no, f"expected 3 tab-separated fields, got {len(fields)}"
                )
            h, r, t = fields
            n_lines += 1
            triples.add((entities.add(h), relations.add(r), entities.add(t)))

    node_meta: dict[int, NodeMeta] = {}
    if nodes_path is not None:
        with open(nodes_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) not in (3, 4):
                    raise ParseError(
                        nodes_path,
                        line_no,
                        f"expected 3 or 4 tab-separated fields, got {len(fields)}",
                    )
                ent_id, name, kind = fields[0], fields[1], fields[2]
                synonyms = tuple(s for s in fields[3].split("|") if s) if len(fields) == 4 else ()
                idx = entities.add(ent_id)
                node_meta[idx] = NodeMeta(name=name, kind=kind, synonyms=synonyms)

    out_adj, in_adj = _build_adjacency(len(entities), triples)
    summary = LoadSummary(
        entities=len(entities),
        relations=len(relations),
        triples=len(triples),
        duplicates_dropped=n_lines - len(triples),
    )
    logger.info("loaded graph: %s", str(summary).replace("\n", ", "))
    return KnowledgeGraph(
        entities=entities,
        relations=relations,
        triples=triples,
        out_adjacency=out_adj,
        in_adjacency=in_adj,
        node_meta=node_meta,
        summary=summary,
    )


def neighbors(kg: KnowledgeGraph, entity: int, relation: int, direction: str) -> set[int]:
    """Entities one step away from ``entity`` via ``relation``.

    Forward follows edges out of the entity, inverse follows edges into it.
    """
    if not 0 <= entity < kg.num_entities:
        raise IndexError(f"entity index {entity} out of range")
    if not 0 <= relation < kg.num_relations:
        raise IndexError(f"relation index {relation} out of range")
    if direction == FORWARD:
        return {t for r, t in kg.out_adjacency[entity] if r == relation}
    if direction == INVERSE:
        return {h for r, h in kg.in_adjacency[entity] if r == relation}
    raise ValueError(f"bad direction {direction!r}")


def traverse_metapath(kg: KnowledgeGraph, head: int, path: Metapath) -> set[int]:
    """All entities reachable from ``head`` by following the full path.

    The empty path is the identity: it returns ``{head}``.
    """
    if not 0 <= head < kg.num_entities:
        raise IndexError(f"entity index {head} out of range")
    frontier = {head}
    for relation, direction in path.steps:
        nxt: set[int] = set()
        for node in frontier:
            nxt |= neighbors(kg, node, relation, direction)
        frontier = nxt
        if not frontier:
            break
    return frontier


def split_triples(
    kg: KnowledgeGraph, ratios: tuple[float, float, float], seed: int
) -> tuple[set[Triple], set[Triple], set[Triple]]:
    """Deterministic train/valid/test partition of the triple set.

    Every entity and relation that occurs in any triple is guaranteed at
    least one training triple: a greedy first-coverage pass pins one covering
    triple per vocabulary item to the training side before the ratio cut.
    """
    train_ratio, valid_ratio, test_ratio = ratios
    if min(ratios) <= 0:
        raise ConfigError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {sum(ratios)}")

    ordered = sorted(kg.triples)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    shuffled = [ordered[i] for i in perm]

    uncovered_ents = {h for h, _, _ in kg.triples} | {t for _, _, t in kg.triples}
    uncovered_rels = {r for _, r, _ in kg.triples}
    forced: list[Triple] = []
    rest: list[Triple] = []
    for h, r, t in shuffled:
        if h in uncovered_ents or t in uncovered_ents or r in uncovered_rels:
            uncovered_ents.discard(h)
            uncovered_ents.discard(t)
            uncovered_rels.discard(r)
            forced.append((h, r, t))
        else:
            rest.append((h, r, t))

    n = len(ordered)
    n_valid = min(int(round(n * valid_ratio)), len(rest))
    n_test = min(int(round(n * test_ratio)), max(len(rest) - n_valid, 0))
    valid = set(rest[:n_valid])
    test = set(rest[n_valid : n_valid + n_test])
    train = set(rest[n_valid + n_test :]) | set(forced)
    return train, valid, test
