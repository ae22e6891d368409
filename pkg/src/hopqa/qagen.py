"""Template-driven question generation and dataset splitting.

Templates pair a relation path with natural-language text containing a
``{head}`` placeholder. Ground-truth answers come from exhaustive traversal,
so generated datasets are exact by construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GenerationError, ParseError
from .kg import FORWARD, INVERSE, KnowledgeGraph, Metapath, traverse_metapath
from .qa import QAExample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuestionTemplate:
    template_id: str
    path: Metapath
    texts: tuple[str, ...]

    @property
    def hops(self) -> int:
        return len(self.path.steps)


def _parse_path(spec: str, kg: KnowledgeGraph, path: str, line_no: int) -> Metapath:
    steps = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            raise ParseError(path, line_no, "empty step in path")
        name, _, direction = part.partition(":")
        direction = direction or FORWARD
        if direction not in (FORWARD, INVERSE):
            raise ParseError(path, line_no, f"bad direction {direction!r} in step {part!r}")
        if name not in kg.relations.index:
            raise GenerationError(f"unknown relation {name!r} (line {line_no} of {path})")
        steps.append((kg.relations.index[name], direction))
    if not 1 <= len(steps) <= 3:
        raise ParseError(path, line_no, f"path must have 1 to 3 steps, got {len(steps)}")
    return Metapath(tuple(steps))


def parse_templates(path: str, kg: KnowledgeGraph) -> list[QuestionTemplate]:
    """Read templates from TSV: ``id<TAB>rel[:fwd|:inv][,...]<TAB>text``.

    Repeated ids accumulate alternative texts and must repeat the same path.
    Each text must contain the ``{head}`` placeholder exactly once.
    """
    paths: dict[str, Metapath] = {}
    texts: dict[str, list[str]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(fields)}")
            template_id, path_spec, text = fields
            if text.count("{head}") != 1:
                raise ParseError(path, line_no, "text must contain {head} exactly once")
            metapath = _parse_path(path_spec, kg, path, line_no)
            if template_id in paths:
                if metapath != paths[template_id]:
                    raise ParseError(
                        path, line_no, f"template {template_id!r} repeats with a different path"
                    )
            else:
                paths[template_id] = metapath
                texts[template_id] = []
                order.append(template_id)
            texts[template_id].append(text)
    return [QuestionTemplate(tid, paths[tid], tuple(texts[tid])) for tid in order]


def _candidate_heads(kg: KnowledgeGraph, template: QuestionTemplate) -> list[int]:
    rel, direction = template.path.steps[0]
    adjacency = kg.out_adjacency if direction == FORWARD else kg.in_adjacency
    return [e for e in range(kg.num_entities) if any(r == rel for r, _ in adjacency[e])]


def generate_qa(
    kg: KnowledgeGraph,
    templates: list[QuestionTemplate],
    max_per_template: int | None = None,
    seed: int = 0,
) -> list[QAExample]:
    """One example per (template, reachable named head), answers by traversal.

    Heads with no answers or no display name are skipped; a cap samples heads
    without replacement under the given seed. Texts rotate round-robin across
    a template's examples.
    """
    if max_per_template is not None and max_per_template < 1:
        raise ConfigError("max_per_template must be >= 1 when given")
    rng = np.random.default_rng(seed)
    examples: list[QAExample] = []
    for template in templates:
        heads = []
        answer_sets = []
        for head in _candidate_heads(kg, template):
            meta = kg.node_meta.get(head)
            if meta is None or not meta.name:
                continue
            answers = traverse_metapath(kg, head, template.path)
            answers.discard(head)
            if not answers:
                continue
            heads.append(head)
            answer_sets.append(frozenset(answers))
        if max_per_template is not None and len(heads) > max_per_template:
            keep = sorted(rng.choice(len(heads), size=max_per_template, replace=False))
            heads = [heads[i] for i in keep]
            answer_sets = [answer_sets[i] for i in keep]
        for j, (head, answers) in enumerate(zip(heads, answer_sets)):
            text = template.texts[j % len(template.texts)]
            examples.append(
                QAExample(
                    question=text.replace("{head}", kg.node_meta[head].name),
                    head=head,
                    answers=answers,
                    hops=template.hops,
                    template_id=template.template_id,
                )
            )
        logger.debug("template %s: %d examples", template.template_id, len(heads))
    if not examples:
        raise GenerationError("no examples generated; every template came up empty")
    return examples


def split_qa(
    examples: list[QAExample],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[list[QAExample], list[QAExample], list[QAExample]]:
    """Split with no (head, template) group straddling two splits."""
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must be three non-negatives summing to 1, got {ratios}")
    groups: dict[tuple[int, str | None], list[QAExample]] = {}
    for ex in examples:
        groups.setdefault((ex.head, ex.template_id), []).append(ex)
    keys = sorted(groups, key=lambda k: (k[0], k[1] or ""))
    rng = np.random.default_rng(seed)
    rng.shuffle(keys)

    n = len(examples)
    n_train = round(n * ratios[0])
    n_valid = round(n * ratios[1])
    out: tuple[list[QAExample], ...] = ([], [], [])
    seen = 0
    for key in keys:
        if seen < n_train:
            bucket = 0
        elif seen < n_train + n_valid:
            bucket = 1
        else:
            bucket = 2
        out[bucket].extend(groups[key])
        seen += len(groups[key])
    return out


def write_qa(examples: list[QAExample], kg: KnowledgeGraph, path: str) -> None:
    """TSV rows: question, head id, pipe-separated answer ids, hop count."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            answers = "|".join(kg.entities[a] for a in sorted(ex.answers))
            fh.write(f"{ex.question}\t{kg.entities[ex.head]}\t{answers}\t{ex.hops}\n")


def read_qa(path: str, kg: KnowledgeGraph) -> list[QAExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(path, line_no, f"expected 4 tab-separated fields, got {len(fields)}")
            question, head_id, answer_ids, hops_text = fields
            if head_id not in kg.entities.index:
                raise ParseError(path, line_no, f"unknown entity id {head_id!r}")
            try:
                hops = int(hops_text)
            except ValueError:
                raise ParseError(path, line_no, f"bad hop count {hops_text!r}") from None
            if hops not in (1, 2, 3):
                raise ParseError(path, line_no, f"hop count must be 1..3, got {hops}")
            answers = set()
            for answer_id in answer_ids.split("|"):
                if answer_id not in kg.entities.index:
                    raise ParseError(path, line_no, f"unknown entity id {answer_id!r}")
                answers.add(kg.entities.index[answer_id])
            examples.append(
                QAExample(question=question, head=kg.entities.index[head_id],
                          answers=frozenset(answers), hops=hops)
            )
    return examples
