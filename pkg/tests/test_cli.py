"""Command-line surface, driven through click's CliRunner."""

import hashlib
import json

import pytest
import yaml
from click.testing import CliRunner

from vqasieve.cli import cli
from vqasieve.engine.export import STATS_COLUMNS, question_digest, read_qa
from vqasieve.engine.provenance import load_manifest


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def generated(runner, native_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["generate", "--input", str(native_file), "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


class TestGenerate:
    def test_writes_outputs(self, generated):
        for name in ("qa.jsonl", "manifest.json", "stats.txt", "stats.csv"):
            assert (generated / name).is_file()
        manifest = load_manifest(generated / "manifest.json")
        assert manifest.total_pairs == len(read_qa(generated / "qa.jsonl")) > 0
        assert manifest.scene_counts["loaded"] == 4

    def test_same_seed_same_bytes(self, runner, native_file, tmp_path):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = runner.invoke(
                cli, ["generate", "-i", str(native_file), "-o", str(out), "--seed", "5", "-w", "2"]
            )
            assert result.exit_code == 0, result.output
            outputs.append(out)
        a, b = outputs
        assert (a / "qa.jsonl").read_bytes() == (b / "qa.jsonl").read_bytes()
        assert load_manifest(a / "manifest.json").digest() == load_manifest(b / "manifest.json").digest()

    def test_split(self, runner, native_file, tmp_path):
        out = tmp_path / "split"
        result = runner.invoke(
            cli, ["generate", "-i", str(native_file), "-o", str(out), "--split", "0.5"]
        )
        assert result.exit_code == 0, result.output
        total = sum(len(read_qa(out / f"qa_{s}.jsonl")) for s in ("train", "val"))
        assert total == load_manifest(out / "manifest.json").total_pairs

    def test_depth_template_without_depth_source(self, runner, native_file, tmp_path):
        result = runner.invoke(
            cli, ["generate", "-i", str(native_file), "-o", str(tmp_path / "o"), "-t", "Closer"]
        )
        assert result.exit_code == 2
        assert "depth source" in result.output

    def test_missing_input(self, runner, tmp_path):
        result = runner.invoke(cli, ["generate", "-i", str(tmp_path / "nope.jsonl")])
        assert result.exit_code == 2
        assert "input file not found" in result.output

    def test_unknown_template(self, runner, native_file, tmp_path):
        result = runner.invoke(
            cli, ["generate", "-i", str(native_file), "-o", str(tmp_path / "o"), "-t", "HowMany,Nope"]
        )
        assert result.exit_code == 2
        assert "Nope" in result.output

    def test_from_scaffolded_config(self, runner, mixed_corpus, tmp_path):
        from vqasieve.data.loader import write_native

        config_path = tmp_path / "run.yaml"
        assert runner.invoke(cli, ["init", str(config_path)]).exit_code == 0
        write_native(mixed_corpus, tmp_path / "annotations.jsonl")

        result = runner.invoke(cli, ["generate", "--config", str(config_path)], catch_exceptions=False)
        # output_dir resolves next to the config file
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "qa.jsonl").is_file()


class TestStats:
    def test_text(self, runner, generated):
        result = runner.invoke(cli, ["stats", str(generated / "manifest.json")])
        assert result.exit_code == 0
        assert "HowMany" in result.output

    def test_csv_from_qa_file(self, runner, generated):
        result = runner.invoke(cli, ["stats", str(generated / "qa.jsonl"), "--format", "csv"])
        assert result.exit_code == 0
        assert result.output.splitlines()[0].split(",") == STATS_COLUMNS

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["stats", str(tmp_path / "none.json")])
        assert result.exit_code == 2


class TestSample:
    def test_balanced(self, runner, generated, tmp_path):
        out = tmp_path / "balanced.jsonl"
        result = runner.invoke(
            cli, ["sample", str(generated / "qa.jsonl"), "-t", "HowMany,RightOf", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        picked = read_qa(out)
        counts = {t: sum(1 for p in picked if p.template_id == t) for t in ("HowMany", "RightOf")}
        assert counts["HowMany"] == counts["RightOf"] > 0

    def test_empty_template_warns(self, runner, generated, tmp_path):
        args = ["sample", str(generated / "qa.jsonl"), "-t", "HowMany,Nope", "-o", str(tmp_path / "s.jsonl")]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0
        assert "Warning" in result.output

        strict = runner.invoke(cli, args + ["--strict"])
        assert strict.exit_code == 2


class TestValidate:
    def test_clean_file(self, runner, native_file):
        result = runner.invoke(cli, ["validate", str(native_file)])
        assert result.exit_code == 0
        assert "scenes: 4" in result.output
        assert "0 issues" in result.output

    def test_degenerate_box_is_a_warning(self, runner, coco_document, tmp_path):
        coco_document["annotations"].append(
            {"id": 13, "image_id": 2, "category_id": 1, "bbox": [10, 10, 0, 5]}
        )
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(coco_document), encoding="utf-8")
        result = runner.invoke(cli, ["validate", str(path)])
        assert result.exit_code == 0
        assert "dropped degenerate boxes: 1" in result.output
        assert "0 issues" in result.output

    def test_dangling_reference(self, runner, coco_document, tmp_path):
        coco_document["annotations"][0]["category_id"] = 99
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(coco_document), encoding="utf-8")
        result = runner.invoke(cli, ["validate", str(path)])
        assert result.exit_code == 1
        assert "1 issues" in result.output

    def test_malformed_lines(self, runner, native_file):
        with open(native_file, "a", encoding="utf-8") as f:
            f.write("not json\n")
        result = runner.invoke(cli, ["validate", str(native_file)])
        assert result.exit_code == 1
        assert "1 issues" in result.output


class TestBench:
    def test_outputs_agree(self, runner, native_file):
        result = runner.invoke(cli, ["bench", "-i", str(native_file)])
        assert result.exit_code == 0, result.output
        assert "QA digest:" in result.output
        assert "speedup" in result.output

    def test_no_sieve_digest_matches_generate(self, runner, native_file, generated):
        result = runner.invoke(cli, ["bench", "-i", str(native_file), "--no-sieve"])
        assert result.exit_code == 0
        expected = hashlib.sha256((generated / "qa.jsonl").read_bytes()).hexdigest()
        assert f"QA digest: {expected}" in result.output


class TestScore:
    def test_accuracy(self, runner, generated, tmp_path):
        pairs = read_qa(generated / "qa.jsonl")
        predictions = tmp_path / "predictions.jsonl"
        with open(predictions, "w", encoding="utf-8") as f:
            for pair in pairs:
                record = {
                    "image_id": pair.image_id,
                    "question_digest": question_digest(pair),
                    "model_answer": pair.answer,
                }
                f.write(json.dumps(record) + "\n")
        result = runner.invoke(cli, ["score", str(generated / "qa.jsonl"), str(predictions)])
        assert result.exit_code == 0, result.output
        assert f"Accuracy 100.0% ({len(pairs)}/{len(pairs)} answered)" in result.output

    def test_missing_predictions(self, runner, generated, tmp_path):
        result = runner.invoke(cli, ["score", str(generated / "qa.jsonl"), str(tmp_path / "p.jsonl")])
        assert result.exit_code == 2


class TestInitAndList:
    def test_init_with_depth(self, runner, tmp_path):
        path = tmp_path / "run.yaml"
        result = runner.invoke(cli, ["init", str(path), "--variant", "with_depth"])
        assert result.exit_code == 0
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert "Closer" in data["templates"]["enabled"]
        assert data["depth_dir"] == "depth"

    def test_init_declines_overwrite(self, runner, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("keep", encoding="utf-8")
        result = runner.invoke(cli, ["init", str(path)], input="n\n")
        assert "Aborted" in result.output
        assert path.read_text(encoding="utf-8") == "keep"

    def test_list_templates(self, runner):
        result = runner.invoke(cli, ["list-templates"])
        assert result.exit_code == 0
        assert "  RightOf: SpatialRelations" in result.output
        assert "[depth]" in result.output

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "vqasieve" in result.output
