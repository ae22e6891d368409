"""Command-line behavior: arguments, precedence, exit codes, output shapes."""

import json

import pytest

from hopqa import cli

ENTITIES = 40


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A tiny end-to-end run: graph, embeddings, questions, models."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert cli.main(["synth", "--out", str(data), "--entities", str(ENTITIES)]) == 0

    base = [
        "--triples", str(data / "triples.tsv"),
        "--nodes", str(data / "nodes.tsv"),
    ]
    assert cli.main([
        "train-kge", *base, "--out", str(root / "model.kge"),
        "--d", "8", "--epochs", "3", "--patience", "3",
    ]) == 0
    assert cli.main([
        "gen-qa", *base, "--templates", str(data / "templates.tsv"),
        "--out", str(root / "qa.tsv"), "--split", "--seed", "7",
    ]) == 0
    assert cli.main([
        "train-classifier", *base,
        "--qa", str(root / "qa-train.tsv"), "--valid", str(root / "qa-valid.tsv"),
        "--out", str(root / "clf.qcl"), "--m", "16", "--epochs", "2",
    ]) == 0
    for hop in (1, 2, 3):
        assert cli.main([
            "train-qa", *base, "--kge", str(root / "model.kge"),
            "--hops", str(hop), "--qa", str(root / "qa-train.tsv"),
            "--out", str(root / f"enc{hop}.qen"),
            "--m", "16", "--epochs", "2",
        ]) == 0
    return root


def _ask_flags(root):
    data = root / "data"
    return [
        "--triples", str(data / "triples.tsv"),
        "--nodes", str(data / "nodes.tsv"),
        "--kge", str(root / "model.kge"),
        "--classifier", str(root / "clf.qcl"),
        "--encoder-1", str(root / "enc1.qen"),
        "--encoder-2", str(root / "enc2.qen"),
        "--encoder-3", str(root / "enc3.qen"),
    ]


class TestParser:
    @pytest.mark.parametrize("command", [
        "synth", "ingest", "train-kge", "eval-kge", "gen-qa",
        "train-classifier", "train-qa", "eval-qa", "ask", "serve",
    ])
    def test_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as exit_info:
            cli.main([command, "--help"])
        assert exit_info.value.code == 0
        assert "--" in capsys.readouterr().out

    def test_unknown_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exit_info:
            cli.main(["transmogrify"])
        assert exit_info.value.code == 2

    def test_missing_subcommand_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exit_info:
            cli.main([])
        assert exit_info.value.code == 2


class TestIngest:
    def test_prints_summary(self, workdir, capsys):
        data = workdir / "data"
        rc = cli.main([
            "ingest", "--triples", str(data / "triples.tsv"),
            "--nodes", str(data / "nodes.tsv"),
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert f"entities: {ENTITIES}" in out
        assert f"triples: {ENTITIES * 6}" in out

    def test_env_supplies_paths(self, workdir, capsys, monkeypatch):
        data = workdir / "data"
        monkeypatch.setenv("HOPQA_TRIPLES", str(data / "triples.tsv"))
        assert cli.main(["ingest"]) == 0
        assert f"entities: {ENTITIES}" in capsys.readouterr().out

    def test_flag_beats_env(self, workdir, capsys, monkeypatch):
        data = workdir / "data"
        monkeypatch.setenv("HOPQA_TRIPLES", str(data / "nope.tsv"))
        assert cli.main(["ingest", "--triples", str(data / "triples.tsv")]) == 0

    def test_missing_file_exits_one(self, tmp_path, capsys):
        rc = cli.main(["ingest", "--triples", str(tmp_path / "absent.tsv")])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "absent.tsv" in err


class TestEval:
    def test_eval_kge_json(self, workdir, capsys):
        data = workdir / "data"
        rc = cli.main([
            "eval-kge", "--triples", str(data / "triples.tsv"),
            "--kge", str(workdir / "model.kge"), "--json",
        ])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"amr", "aamr", "aamri", "hits_at"}
        assert set(report["hits_at"]) == {"1", "3", "10"}

    def test_eval_qa_table_and_json(self, workdir, capsys):
        data = workdir / "data"
        flags = [
            "--triples", str(data / "triples.tsv"),
            "--kge", str(workdir / "model.kge"),
            "--encoder-1", str(workdir / "enc1.qen"),
            "--encoder-2", str(workdir / "enc2.qen"),
            "--encoder-3", str(workdir / "enc3.qen"),
            "--qa", str(workdir / "qa-test.tsv"),
        ]
        assert cli.main(["eval-qa", *flags]) == 0
        out = capsys.readouterr().out
        assert "hops" in out and "questions" in out and "hits@10" in out
        assert cli.main(["eval-qa", *flags, "--json", "--k", "5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        for hop, row in payload.items():
            assert hop in {"1", "2", "3"}
            assert "questions" in row and "hits@5" in row

    def test_eval_qa_missing_encoder(self, workdir, capsys):
        data = workdir / "data"
        rc = cli.main([
            "eval-qa", "--triples", str(data / "triples.tsv"),
            "--kge", str(workdir / "model.kge"),
            "--encoder-1", str(workdir / "enc1.qen"),
            "--qa", str(workdir / "qa-test.tsv"),
        ])
        assert rc == 1
        assert "2-hop" in capsys.readouterr().err


class TestGenQA:
    def test_seeded_runs_are_byte_identical(self, workdir, tmp_path):
        data = workdir / "data"
        outs = []
        for name in ("first", "second"):
            out = tmp_path / f"{name}.tsv"
            rc = cli.main([
                "gen-qa", "--triples", str(data / "triples.tsv"),
                "--nodes", str(data / "nodes.tsv"),
                "--templates", str(data / "templates.tsv"),
                "--out", str(out), "--split", "--seed", "7",
            ])
            assert rc == 0
            outs.append(out)
        for suffix in ("", "-train", "-valid", "-test"):
            a = outs[0].with_name(f"first{suffix}.tsv").read_bytes()
            b = outs[1].with_name(f"second{suffix}.tsv").read_bytes()
            assert a == b

    def test_split_files_partition_the_whole(self, workdir):
        total = (workdir / "qa.tsv").read_text().count("\n")
        parts = sum(
            (workdir / f"qa-{name}.tsv").read_text().count("\n")
            for name in ("train", "valid", "test")
        )
        assert total == parts
        assert total == 15 * ENTITIES

    def test_bad_ratios_exit_one(self, workdir, tmp_path, capsys):
        data = workdir / "data"
        rc = cli.main([
            "gen-qa", "--triples", str(data / "triples.tsv"),
            "--nodes", str(data / "nodes.tsv"),
            "--templates", str(data / "templates.tsv"),
            "--out", str(tmp_path / "x.tsv"), "--split", "--ratios", "0.9,0.1",
        ])
        assert rc == 1
        assert "ratios" in capsys.readouterr().err


class TestTrainErrors:
    def test_train_qa_without_examples_for_hop_class(self, workdir, tmp_path, capsys):
        data = workdir / "data"
        one_hop_only = tmp_path / "one.tsv"
        lines = [
            line for line in (workdir / "qa-train.tsv").read_text().splitlines()
            if line.endswith("\t1")
        ]
        one_hop_only.write_text("\n".join(lines) + "\n")
        rc = cli.main([
            "train-qa", "--triples", str(data / "triples.tsv"),
            "--kge", str(workdir / "model.kge"), "--hops", "2",
            "--qa", str(one_hop_only), "--out", str(tmp_path / "enc.qen"),
            "--epochs", "1",
        ])
        assert rc == 1
        assert "2-hop" in capsys.readouterr().err

    def test_missing_checkpoint_exits_one(self, workdir, capsys):
        data = workdir / "data"
        rc = cli.main([
            "ask", "--triples", str(data / "triples.tsv"),
            "--kge", str(workdir / "missing.kge"),
            "--classifier", str(workdir / "clf.qcl"),
            "--encoder-1", str(workdir / "enc1.qen"),
            "--encoder-2", str(workdir / "enc2.qen"),
            "--encoder-3", str(workdir / "enc3.qen"),
            "--question", "Which item comes right after item 003?",
        ])
        assert rc == 1
        assert "missing.kge" in capsys.readouterr().err


class TestAsk:
    def test_prints_head_hops_and_table(self, workdir, capsys):
        rc = cli.main([
            "ask", *_ask_flags(workdir),
            "--question", "Which item comes right after item 003?",
            "--top-k", "3",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "head: item 003 (n003)" in out
        assert "hops:" in out
        assert out.count("\n") == 6  # head + hops + header + 3 answers
        assert "1" in out.splitlines()[3]

    def test_unknown_entity_exits_one(self, workdir, capsys):
        rc = cli.main([
            "ask", *_ask_flags(workdir),
            "--question", "what is the meaning of life?",
        ])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")


class TestConfigFile:
    def test_config_file_supplies_paths(self, workdir, tmp_path, capsys):
        data = workdir / "data"
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "triples": str(data / "triples.tsv"),
            "nodes": str(data / "nodes.tsv"),
        }))
        assert cli.main(["ingest", "--config", str(config)]) == 0
        assert f"entities: {ENTITIES}" in capsys.readouterr().out

    def test_env_names_the_config_file(self, workdir, tmp_path, capsys, monkeypatch):
        data = workdir / "data"
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"triples": str(data / "triples.tsv")}))
        monkeypatch.setenv("HOPQA_CONFIG", str(config))
        assert cli.main(["ingest"]) == 0

    def test_serve_fails_fast_on_missing_artifacts(self, tmp_path, capsys):
        rc = cli.main(["serve", "--triples", str(tmp_path / "absent.tsv")])
        assert rc == 1
        assert "missing required settings" in capsys.readouterr().err
