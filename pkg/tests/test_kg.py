"""Graph container, TSV loading, traversal, and triple splitting."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopqa.errors import ConfigError, ParseError
from hopqa.kg import (
    FORWARD,
    INVERSE,
    KnowledgeGraph,
    Metapath,
    Vocabulary,
    load_kg,
    neighbors,
    split_triples,
    traverse_metapath,
)


class TestVocabulary:
    def test_first_appearance_order(self):
        vocab = Vocabulary(["b", "a", "b", "c"])
        assert vocab.ids == ["b", "a", "c"]
        assert vocab.index == {"b": 0, "a": 1, "c": 2}
        assert vocab.add("a") == 1
        assert len(vocab) == 3
        assert "c" in vocab and "z" not in vocab
        assert vocab[2] == "c"

    def test_equality_is_order_sensitive(self):
        assert Vocabulary(["a", "b"]) == Vocabulary(["a", "b"])
        assert Vocabulary(["a", "b"]) != Vocabulary(["b", "a"])


class TestMetapath:
    def test_length_cap_and_direction_check(self):
        Metapath(((0, FORWARD),) * 3)
        with pytest.raises(ValueError):
            Metapath(((0, FORWARD),) * 4)
        with pytest.raises(ValueError):
            Metapath(((0, "sideways"),))
        assert len(Metapath(((0, INVERSE), (1, FORWARD)))) == 2


class TestLoading:
    def _write(self, tmp_path, name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_load_with_nodes_and_synonyms(self, tmp_path):
        triples = self._write(tmp_path, "t.tsv", "\n".join([
            "a\tr\tb", "b\tr\tc", "a\ts\tc", "a\tr\tb",
        ]) + "\n")
        nodes = self._write(tmp_path, "n.tsv", "\n".join([
            "a\talpha\tgene\tfirst|letter",
            "b\tbeta\tgene",
            "d\tdelta\tdisease\t",
        ]) + "\n")
        kg = load_kg(triples, nodes)
        assert kg.num_entities == 4  # d only appears in the nodes file
        assert kg.num_relations == 2
        assert len(kg.triples) == 3
        assert kg.summary.duplicates_dropped == 1
        idx_a = kg.entities.index["a"]
        assert kg.node_meta[idx_a].synonyms == ("first", "letter")
        assert kg.name_of(idx_a) == "alpha"
        assert kg.kind_of(idx_a) == "gene"
        idx_c = kg.entities.index["c"]
        assert kg.name_of(idx_c) == "c"  # falls back to the id
        assert kg.kind_of(idx_c) == ""
        assert str(kg.summary).splitlines() == [
            "entities: 4", "relations: 2", "triples: 3",
            "duplicates dropped: 1",
        ]

    def test_triples_file_field_count(self, tmp_path):
        path = self._write(tmp_path, "t.tsv", "a\tr\tb\nbad line\n")
        with pytest.raises(ParseError) as err:
            load_kg(path)
        assert err.value.line_no == 2

    def test_nodes_file_field_count(self, tmp_path):
        triples = self._write(tmp_path, "t.tsv", "a\tr\tb\n")
        nodes = self._write(tmp_path, "n.tsv", "a\tname\n")
        with pytest.raises(ParseError):
            load_kg(triples, nodes)

    def test_blank_lines_ignored(self, tmp_path):
        path = self._write(tmp_path, "t.tsv", "\na\tr\tb\n\n")
        assert len(load_kg(path).triples) == 1


@pytest.fixture()
def diamond():
    # a -> b -> d and a -> c -> d, plus a side edge d -> a
    return KnowledgeGraph.from_triples([
        ("a", "r", "b"), ("a", "r", "c"), ("b", "s", "d"),
        ("c", "s", "d"), ("d", "back", "a"),
    ])


class TestTraversal:
    def test_neighbors_both_directions(self, diamond):
        kg = diamond
        a = kg.entities.index["a"]
        d = kg.entities.index["d"]
        r = kg.relations.index["r"]
        s = kg.relations.index["s"]
        assert neighbors(kg, a, r, FORWARD) == {
            kg.entities.index["b"], kg.entities.index["c"],
        }
        assert neighbors(kg, d, s, INVERSE) == {
            kg.entities.index["b"], kg.entities.index["c"],
        }
        assert neighbors(kg, a, s, FORWARD) == set()

    def test_neighbors_bounds_and_direction(self, diamond):
        with pytest.raises(IndexError):
            neighbors(diamond, 99, 0, FORWARD)
        with pytest.raises(IndexError):
            neighbors(diamond, 0, 99, FORWARD)
        with pytest.raises(ValueError):
            neighbors(diamond, 0, 0, "both")

    def test_branches_merge(self, diamond):
        kg = diamond
        a = kg.entities.index["a"]
        path = Metapath((
            (kg.relations.index["r"], FORWARD),
            (kg.relations.index["s"], FORWARD),
        ))
        assert traverse_metapath(kg, a, path) == {kg.entities.index["d"]}

    def test_empty_path_is_identity(self, diamond):
        a = diamond.entities.index["a"]
        assert traverse_metapath(diamond, a, Metapath(())) == {a}

    def test_dead_end_returns_empty(self, diamond):
        kg = diamond
        b = kg.entities.index["b"]
        path = Metapath((
            (kg.relations.index["r"], FORWARD),
            (kg.relations.index["r"], FORWARD),
        ))
        assert traverse_metapath(kg, b, path) == set()

    def test_inverse_steps_in_paths(self, diamond):
        kg = diamond
        d = kg.entities.index["d"]
        path = Metapath((
            (kg.relations.index["s"], INVERSE),
            (kg.relations.index["r"], INVERSE),
        ))
        assert traverse_metapath(kg, d, path) == {kg.entities.index["a"]}


def _chain_graph(n=40, extra_rels=2):
    triples = [(f"v{i}", "follows", f"v{i + 1}") for i in range(n - 1)]
    for k in range(extra_rels):
        triples += [(f"v{i}", f"rel{k}", f"v{(i + 2 + k) % n}") for i in range(n)]
    return KnowledgeGraph.from_triples(triples)


class TestSplit:
    def test_partition_is_exact_and_disjoint(self):
        kg = _chain_graph()
        train, valid, test = split_triples(kg, (0.8, 0.1, 0.1), seed=0)
        assert train | valid | test == kg.triples
        assert not (train & valid) and not (train & test) and not (valid & test)
        n = len(kg.triples)
        assert len(valid) == round(n * 0.1)
        assert len(test) == round(n * 0.1)

    def test_training_covers_every_entity_and_relation(self):
        kg = _chain_graph()
        for seed in range(5):
            train, _, _ = split_triples(kg, (0.6, 0.2, 0.2), seed=seed)
            ents = {h for h, _, _ in train} | {t for _, _, t in train}
            rels = {r for _, r, _ in train}
            assert ents == set(range(kg.num_entities))
            assert rels == set(range(kg.num_relations))

    def test_deterministic_per_seed(self):
        kg = _chain_graph()
        assert split_triples(kg, (0.8, 0.1, 0.1), 3) == split_triples(kg, (0.8, 0.1, 0.1), 3)
        assert split_triples(kg, (0.8, 0.1, 0.1), 3) != split_triples(kg, (0.8, 0.1, 0.1), 4)

    def test_ratio_validation(self):
        kg = _chain_graph()
        with pytest.raises(ConfigError):
            split_triples(kg, (0.8, 0.2, 0.0), 0)
        with pytest.raises(ConfigError):
            split_triples(kg, (0.5, 0.3, 0.3), 0)

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_coverage_property_over_seeds(self, seed):
        kg = _chain_graph(n=20, extra_rels=1)
        train, valid, test = split_triples(kg, (0.7, 0.15, 0.15), seed=seed)
        assert train | valid | test == kg.triples
        ents = {h for h, _, _ in train} | {t for _, _, t in train}
        assert ents == set(range(kg.num_entities))
