"""
vqasieve Command Line Interface

Click-based CLI: dataset generation, statistics, balanced sampling,
annotation validation, sieve benchmarking and prediction scoring.

Exit codes: 0 success, 1 runtime fault, 2 invalid input or configuration.
"""

import logging
import sys
from pathlib import Path

import click

from vqasieve import __version__

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_INVALID = 2


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


@click.group(invoke_without_command=True)
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.pass_context
@click.version_option(version=__version__, prog_name="vqasieve")
def cli(ctx, verbose):
    """
    vqasieve: spatial-reasoning VQA pairs from object-detection annotations.

    Every template checks cheap predicates before it realizes questions, so
    scenes that cannot yield a question are rejected early.

    Exit codes: 0 ok, 1 runtime fault, 2 invalid input or configuration.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


# =============================================================================
# Shared run options
# =============================================================================


def run_options(func):
    """Options that build a RunConfig, shared by generate and bench."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(),
            envvar="VQASIEVE_CONFIG",
            help="Run config YAML (default: $VQASIEVE_CONFIG)",
        ),
        click.option("--input", "-i", "inputs", multiple=True, type=click.Path(), help="Annotation file (repeatable)"),
        click.option("--format", "fmt", type=click.Choice(["coco", "native"]), default=None, help="Annotation format"),
        click.option("--depth-dir", type=click.Path(), default=None, help="Directory of depth-grid files"),
        click.option("--inline-depth", is_flag=True, help="Native detections carry their own depth"),
        click.option("--templates", "-t", default=None, help='Comma-separated ids, e.g. "HowMany,Quadrants(2,3)"'),
        click.option("--seed", type=int, default=None, help="Run seed"),
        click.option("--workers", "-w", type=int, default=None, help="Worker processes"),
        click.option("--frame-select", is_flag=True, help="Keep one frame per group"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_overrides(inputs, fmt, depth_dir, inline_depth, templates, seed, workers, frame_select, **extra):
    from vqasieve.project.structure import split_template_list

    overrides = {
        "inputs": [Path(p) for p in inputs] or None,
        "format": fmt,
        "depth_dir": Path(depth_dir) if depth_dir else None,
        "inline_depth": True if inline_depth else None,
        "templates": split_template_list(templates) if templates else None,
        "seed": seed,
        "workers": workers,
        "frame_select": True if frame_select else None,
    }
    overrides.update(extra)
    return overrides


def _load_config(config_path, overrides):
    from vqasieve.project.structure import RunConfigError, load_run_config, validate_run_config

    try:
        config = load_run_config(Path(config_path) if config_path else None, overrides)
        validate_run_config(config)
    except RunConfigError as e:
        _fail(str(e), EXIT_INVALID)
    return config


def _load_corpus(config):
    """Scenes of every input file, frame-selected when configured."""
    from vqasieve.data.loader import (
        DanglingReference,
        IngestTally,
        MalformedDocument,
        load_scenes,
    )
    from vqasieve.engine.selection import select_frames

    tally = IngestTally()
    scenes = []
    for path in config.inputs:
        try:
            scenes.extend(
                load_scenes(path, config.format, tally, config.template_config.depth_percentile)
            )
        except (MalformedDocument, DanglingReference) as e:
            _fail(f"{path}: {e}", EXIT_INVALID)
        except OSError as e:
            _fail(f"Cannot read {path}: {e}", EXIT_INVALID)

    if tally.errors:
        click.echo(f"Warning: skipped {len(tally.errors)} malformed line(s)", err=True)
    loaded = len(scenes)
    if config.frame_select:
        scenes = select_frames(scenes, config.frame_group_key, config.frame_camera)
    return scenes, tally, loaded


# =============================================================================
# generate
# =============================================================================


@cli.command()
@run_options
@click.option("--out", "-o", type=click.Path(), default=None, help="Output directory")
@click.option("--split", type=float, default=None, help="Train fraction; writes qa_train/qa_val")
@click.pass_context
def generate(ctx, config_path, inputs, fmt, depth_dir, inline_depth, templates, seed, workers, frame_select, out, split):
    """
    Generate QA pairs from annotations.

    Writes qa.jsonl (or qa_train.jsonl / qa_val.jsonl with --split), a
    manifest.json and the stats report into the output directory.

    Examples:

        vqasieve generate --input ann.jsonl --out out/

        vqasieve generate --config run.yaml --seed 7 --workers 8
    """
    from vqasieve.engine.export import IoFailure, write_qa, write_stats
    from vqasieve.engine.provenance import GenerationManifest, source_file_entry, write_manifest
    from vqasieve.engine.runner import generate_dataset
    from vqasieve.engine.selection import partition_pairs, split_dataset

    overrides = _run_overrides(
        inputs, fmt, depth_dir, inline_depth, templates, seed, workers, frame_select,
        output_dir=Path(out) if out else None,
        split_fraction=split,
    )
    config = _load_config(config_path, overrides)
    scenes, tally, loaded = _load_corpus(config)
    verbose = ctx.obj.get("verbose", False)

    def progress_callback(message, current, total):
        if verbose:
            click.echo(f"  [{current}/{total}] {message}", err=True)

    click.echo(
        f"Generating from {len(scenes)} scenes with {len(config.enabled_templates)} templates..."
    )
    result = generate_dataset(
        scenes,
        config.enabled_templates,
        template_config=config.template_config,
        overrides=config.template_overrides,
        seed=config.seed,
        workers=config.workers,
        use_sieve=config.use_sieve,
        depth_dir=config.depth_dir,
        plugin_dir=config.plugin_dir,
        progress_callback=progress_callback,
    )

    paths = config.paths
    scene_counts = {"loaded": loaded, "selected": len(scenes)}
    written = {}
    try:
        if config.split_fraction is not None:
            assignment = split_dataset(scenes, config.split_fraction, config.seed)
            for name, part in partition_pairs(result.pairs, assignment).items():
                written[name] = write_qa(part, paths.qa(name))
                scene_counts[name] = sum(1 for s in assignment.values() if s.value == name)
        else:
            written["all"] = write_qa(result.pairs, paths.qa())

        manifest = GenerationManifest(
            tool_version=__version__,
            config_digest=config.digest(),
            seed=config.seed,
            source_files=[source_file_entry(p) for p in config.inputs],
            scene_counts=scene_counts,
            template_metrics=result.metrics,
            category_counts=result.category_counts,
            total_pairs=result.total_pairs,
            faults=result.faults,
            ingest=tally.as_dict(),
            partial=result.partial,
            duration_seconds=result.duration_seconds,
        )
        write_manifest(manifest, paths.manifest)
        write_stats(manifest, paths.stats_text, paths.stats_csv)
    except (IoFailure, OSError) as e:
        _fail(str(e), EXIT_FAULT)

    click.echo(result.summary_str())
    for name, count in written.items():
        click.echo(f"  {name}: {count} pairs")
    click.echo(f"  manifest: {paths.manifest}")

    if result.faults:
        click.echo(f"\n{len(result.faults)} fault(s):", err=True)
        for fault in result.faults[:20]:
            click.echo(
                f"  {fault['image_id']} {fault['template_id'] or '-'}: {fault['error']}", err=True
            )
        sys.exit(EXIT_FAULT)
    if result.partial:
        click.echo("Generation interrupted; outputs are partial.", err=True)
        sys.exit(EXIT_FAULT)


# =============================================================================
# stats
# =============================================================================


def _manifest_for(path: Path):
    """Manifest of a run, from manifest.json or from a QA file (and its sibling manifest)."""
    from collections import Counter

    from vqasieve.engine.export import IoFailure, metrics_from_pairs, read_qa
    from vqasieve.engine.provenance import GenerationManifest, load_manifest

    try:
        if path.suffix == ".json":
            return load_manifest(path)
        sibling = path.parent / "manifest.json"
        if sibling.is_file():
            return load_manifest(sibling)
        pairs = read_qa(path)
    except (IoFailure, OSError, ValueError, KeyError) as e:
        _fail(f"Cannot read {path}: {e}", EXIT_INVALID)

    categories = Counter(p.category.value for p in pairs)
    return GenerationManifest(
        tool_version=__version__,
        config_digest="",
        seed=0,
        template_metrics=metrics_from_pairs(pairs),
        category_counts=dict(sorted(categories.items())),
        total_pairs=len(pairs),
    )


@cli.command()
@click.argument("path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text", help="Report format")
def stats(path, fmt):
    """
    Print the per-template sieve metrics of a run.

    PATH is a manifest.json or a QA file. For a QA file without a manifest
    next to it, only pair counts are available.
    """
    from vqasieve.engine.export import stats_report

    path = Path(path)
    if not path.is_file():
        _fail(f"File not found: {path}", EXIT_INVALID)

    text, table = stats_report(_manifest_for(path))
    if fmt == "csv":
        click.echo(table.to_csv(index=False), nl=False)
    else:
        click.echo(text, nl=False)


# =============================================================================
# sample
# =============================================================================


@cli.command()
@click.argument("qa_file", type=click.Path())
@click.option("--seed", type=int, default=0, help="Sampling seed")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output file (default: <qa>_balanced.jsonl)")
@click.option("--templates", "-t", default=None, help="Templates that must be represented")
@click.option("--strict", is_flag=True, help="Exit 2 when an enabled template has no pairs")
def sample(qa_file, seed, out, templates, strict):
    """
    Write a balanced sample: as many pairs from every template as the
    rarest template has.

    The template list comes from --templates, else from manifest.json next
    to QA_FILE, else from the templates present in QA_FILE.
    """
    from vqasieve.engine.export import IoFailure, read_qa, write_qa
    from vqasieve.engine.provenance import load_manifest
    from vqasieve.engine.selection import EmptyTemplate, balanced_sample
    from vqasieve.project.structure import split_template_list

    qa_path = Path(qa_file)
    if not qa_path.is_file():
        _fail(f"File not found: {qa_path}", EXIT_INVALID)
    try:
        pairs = read_qa(qa_path)
    except IoFailure as e:
        _fail(str(e), EXIT_INVALID)

    wanted = None
    if templates:
        wanted = split_template_list(templates)
    elif (qa_path.parent / "manifest.json").is_file():
        wanted = list(load_manifest(qa_path.parent / "manifest.json").template_metrics)

    try:
        picked = balanced_sample(pairs, seed, wanted)
    except EmptyTemplate as e:
        click.echo(f"Warning: {e}", err=True)
        if strict:
            sys.exit(EXIT_INVALID)
        remaining = [t for t in wanted if t not in e.template_ids]
        picked = balanced_sample(pairs, seed, remaining)

    destination = Path(out) if out else qa_path.with_name(f"{qa_path.stem}_balanced.jsonl")
    try:
        count = write_qa(picked, destination)
    except IoFailure as e:
        _fail(str(e), EXIT_FAULT)
    click.echo(f"Wrote {count} pairs to {destination}")


# =============================================================================
# validate
# =============================================================================


@cli.command()
@click.argument("input_path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["coco", "native"]), default=None, help="Default: coco for .json, else native")
def validate(input_path, fmt):
    """
    Audit an annotation file.

    Reports clamp and drop tallies; dangling references, malformed
    documents and malformed lines are issues (exit 1). Degenerate boxes
    are dropped with a warning only.

    Example:

        vqasieve validate annotations.json
    """
    from vqasieve.data.loader import DanglingReference, IngestTally, MalformedDocument, load_scenes

    path = Path(input_path)
    if not path.is_file():
        _fail(f"File not found: {path}", EXIT_INVALID)
    fmt = fmt or ("coco" if path.suffix == ".json" else "native")

    click.echo(f"Validating {fmt} annotations: {path}")
    tally = IngestTally()
    issues = []
    try:
        load_scenes(path, fmt, tally)
    except (MalformedDocument, DanglingReference) as e:
        issues.append(str(e))
    issues.extend(str(error) for error in tally.errors)

    click.echo(f"  scenes: {tally.scenes}")
    click.echo(f"  detections: {tally.detections}")
    click.echo(f"  clamped boxes: {tally.clamped_boxes}")
    click.echo(f"  skipped crowd annotations: {tally.skipped_crowd}")
    if tally.dropped_degenerate:
        click.echo(f"  ⚠ dropped degenerate boxes: {tally.dropped_degenerate}")
    if tally.dropped_masks:
        click.echo(f"  ⚠ dropped masks: {tally.dropped_masks}")

    click.echo()
    for issue in issues:
        click.echo(f"  X {issue}")
    click.echo(f"{len(issues)} issues")
    if issues:
        sys.exit(EXIT_FAULT)


# =============================================================================
# bench
# =============================================================================


@cli.command()
@run_options
@click.option("--no-sieve", is_flag=True, help="Run only the unsieved pass")
def bench(config_path, inputs, fmt, depth_dir, inline_depth, templates, seed, workers, frame_select, no_sieve):
    """
    Measure what the predicate sieve saves.

    Runs the corpus with and without the sieve, prints per-template apply
    calls and speedup, and checks that both passes produce identical QA
    output. With --no-sieve only the unsieved pass runs and its digest is
    printed.
    """
    from vqasieve.engine.export import qa_digest, sieve_benefit_table
    from vqasieve.engine.runner import generate_dataset

    overrides = _run_overrides(
        inputs, fmt, depth_dir, inline_depth, templates, seed, workers, frame_select
    )
    config = _load_config(config_path, overrides)
    scenes, _, _ = _load_corpus(config)

    def run(use_sieve: bool):
        return generate_dataset(
            scenes,
            config.enabled_templates,
            template_config=config.template_config,
            overrides=config.template_overrides,
            seed=config.seed,
            workers=config.workers,
            use_sieve=use_sieve,
            depth_dir=config.depth_dir,
            plugin_dir=config.plugin_dir,
        )

    unsieved = run(use_sieve=False)
    unsieved_digest = qa_digest(unsieved.pairs)
    if no_sieve:
        click.echo(f"Scenes: {len(scenes)}")
        click.echo(f"QA digest: {unsieved_digest}")
        return

    sieved = run(use_sieve=True)
    sieved_digest = qa_digest(sieved.pairs)
    table = sieve_benefit_table(sieved.metrics, unsieved.metrics)

    click.echo(f"Scenes: {len(scenes)}")
    click.echo(table.to_string(index=False) if not table.empty else "no templates")
    click.echo()
    overall = (
        unsieved.duration_seconds / sieved.duration_seconds if sieved.duration_seconds > 0 else 0.0
    )
    click.echo(
        f"Wall time: {sieved.duration_seconds:.3f}s with sieve, "
        f"{unsieved.duration_seconds:.3f}s without ({overall:.2f}x)"
    )
    click.echo(f"QA digest: {sieved_digest}")
    if sieved_digest != unsieved_digest:
        _fail(
            f"Sieved and unsieved outputs differ ({sieved_digest} != {unsieved_digest})",
            EXIT_FAULT,
        )


# =============================================================================
# score
# =============================================================================


@cli.command()
@click.argument("qa_file", type=click.Path())
@click.argument("predictions_file", type=click.Path())
def score(qa_file, predictions_file):
    """
    Score model predictions against generated answers.

    PREDICTIONS_FILE holds one JSON object per line with image_id,
    question_digest and model_answer.
    """
    import json

    from vqasieve.engine.export import IoFailure, read_predictions, read_qa, score_predictions

    for p in (qa_file, predictions_file):
        if not Path(p).is_file():
            _fail(f"File not found: {p}", EXIT_INVALID)
    try:
        pairs = read_qa(Path(qa_file))
        predictions = read_predictions(Path(predictions_file))
    except (IoFailure, json.JSONDecodeError) as e:
        _fail(str(e), EXIT_INVALID)

    report = score_predictions(pairs, predictions)
    click.echo(report.summary_str())
    click.echo()
    click.echo("Per template:")
    click.echo(report.per_template.to_string(index=False) if not report.per_template.empty else "  (none)")
    click.echo()
    click.echo("Per category:")
    click.echo(report.per_category.to_string(index=False) if not report.per_category.empty else "  (none)")


# =============================================================================
# init / list-templates
# =============================================================================


@cli.command()
@click.argument("path", type=click.Path())
@click.option(
    "--variant",
    type=click.Choice(["without_depth", "with_depth"]),
    default="without_depth",
    help="Default template set",
)
@click.option("--force", is_flag=True, help="Overwrite an existing file without prompting")
def init(path, variant, force):
    """
    Write a default run config.

    Example:

        vqasieve init run.yaml --variant with_depth
    """
    from vqasieve.project.structure import write_default_config

    path = Path(path)
    if path.exists() and not force:
        if not click.confirm(f"'{path}' exists. Overwrite?"):
            click.echo("Aborted.")
            return
    write_default_config(path, variant)
    click.echo(f"Wrote {variant} config to {path}")


@cli.command("list-templates")
@click.option("--plugin-dir", type=click.Path(exists=True, file_okay=False), default=None, help="Also load templates from this directory")
def list_templates_cmd(plugin_dir):
    """List registered templates with their category and predicates."""
    from vqasieve.registry.discovery import discover_templates
    from vqasieve.templates import build_template, list_templates

    if plugin_dir:
        discover_templates(Path(plugin_dir))

    click.echo("=== Templates ===")
    for name, cls in sorted(list_templates().items()):
        info = build_template(name).describe()
        depth = " [depth]" if info.requires_depth else ""
        click.echo(f"  {info.template_id}: {info.category.value}{depth} (v{cls.version})")
        click.echo(f"      predicates: {', '.join(info.predicates)}")


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
