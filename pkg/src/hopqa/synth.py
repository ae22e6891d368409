"""Synthetic benchmark graph: cyclic shift relations over Z_n.

Each relation adds a fixed offset modulo the entity count (``fork`` adds two,
giving multi-answer questions), so relation composition is exact arithmetic
and ground truth for any metapath is trivially checkable. Shift relations are
also a best case for complex bilinear embeddings, which keeps end-to-end
training fast enough for tests.
"""

from __future__ import annotations

import os

from .errors import ConfigError
from .kg import KnowledgeGraph

SHIFTS: dict[str, tuple[int, ...]] = {
    "step_one": (1,),
    "step_three": (3,),
    "step_seven": (7,),
    "step_eleven": (11,),
    "fork": (2, 9),
}

# (template id, path spec, text forms); paths mix directions and every hop
# class keeps template-specific wording so hop classification is learnable.
TEMPLATES: list[tuple[str, str, list[str]]] = [
    ("one-after", "step_one", [
        "Which item comes right after {head}?",
        "What directly follows {head}?",
    ]),
    ("three-after", "step_three", [
        "Which item sits three places beyond {head}?",
    ]),
    ("seven-after", "step_seven", [
        "What do you reach seven hops past {head}?",
    ]),
    ("one-before", "step_one:inv", [
        "Which item comes immediately before {head}?",
        "What sits just in front of {head}?",
    ]),
    ("branches", "fork", [
        "Which items branch straight out of {head}?",
    ]),
    ("one-then-three", "step_one,step_three", [
        "Starting at {head}, advance one place and then three more. Where do you land?",
        "Which item is three beyond the successor of {head}?",
    ]),
    ("three-then-seven", "step_three,step_seven", [
        "Which item lies three places and then another seven on from {head}?",
    ]),
    ("seven-back-one", "step_seven,step_one:inv", [
        "Move seven ahead of {head} and back up one. Which item is that?",
    ]),
    ("branch-then-one", "fork,step_one", [
        "Which items are one step past the branches of {head}?",
    ]),
    ("eleven-twice", "step_eleven,step_eleven", [
        "Which item is eleven places beyond the item eleven places beyond {head}?",
    ]),
    ("triple-single", "step_one,step_one,step_one", [
        "Take three single steps from {head}. Where do you end up?",
        "Which item is three successors down the line from {head}?",
    ]),
    ("three-seven-eleven", "step_three,step_seven,step_eleven", [
        "From {head} hop three, then seven, then eleven places. Which item do you reach?",
    ]),
    ("two-sevens-back-one", "step_seven,step_seven,step_one:inv", [
        "Which item lies two sevens forward and one place back from {head}?",
    ]),
    ("branch-three-three", "fork,step_three,step_three", [
        "After branching out of {head}, advance three places twice over. Which items result?",
    ]),
    ("reverse-walk", "step_one:inv,step_one:inv,step_eleven:inv", [
        "Step back one, back one again, then back eleven from {head}. Where are you?",
    ]),
]


def _entity_id(i: int) -> str:
    return f"n{i:03d}"


def synthetic_compositional_kg(n_entities: int = 200) -> KnowledgeGraph:
    """Build the shift graph in memory; deterministic for a given size."""
    if n_entities < 40:
        raise ConfigError("n_entities must be >= 40 so no shift path wraps onto its head")
    triples = []
    for i in range(n_entities):
        for rel, shifts in SHIFTS.items():
            for s in shifts:
                triples.append((_entity_id(i), rel, _entity_id((i + s) % n_entities)))
    nodes = [(_entity_id(i), f"item {i:03d}", "node", ()) for i in range(n_entities)]
    return KnowledgeGraph.from_triples(triples, nodes)


def templates_tsv() -> str:
    lines = []
    for template_id, path_spec, texts in TEMPLATES:
        for text in texts:
            lines.append(f"{template_id}\t{path_spec}\t{text}")
    return "\n".join(lines) + "\n"


def write_synthetic_dataset(out_dir: str, n_entities: int = 200) -> dict[str, str]:
    """Write triples.tsv, nodes.tsv and templates.tsv; returns their paths."""
    kg = synthetic_compositional_kg(n_entities)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "triples": os.path.join(out_dir, "triples.tsv"),
        "nodes": os.path.join(out_dir, "nodes.tsv"),
        "templates": os.path.join(out_dir, "templates.tsv"),
    }
    with open(paths["triples"], "w", encoding="utf-8") as fh:
        for h, r, t in sorted(kg.triples):
            fh.write(f"{kg.entities[h]}\t{kg.relations[r]}\t{kg.entities[t]}\n")
    with open(paths["nodes"], "w", encoding="utf-8") as fh:
        for i in range(kg.num_entities):
            meta = kg.node_meta[i]
            fh.write(f"{kg.entities[i]}\t{meta.name}\t{meta.kind}\n")
    with open(paths["templates"], "w", encoding="utf-8") as fh:
        fh.write(templates_tsv())
    return paths
