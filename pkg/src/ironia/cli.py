"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 data error, 4 backend error.
"""

from __future__ import annotations

import json
import sys
from functools import wraps
from pathlib import Path

import click

from . import corpus, encoders, gateway
from .classifier import EmbeddedSet, TrainingConfig, init_head, load_head, save_head, train
from .config import validate_config
from .corpus import Mode
from .errors import BackendError, ConfigError, DataError
from .metrics import evaluate
from .phases import run_phase
from .reports import (
    render_agreement_markdown,
    render_distribution_markdown,
    write_report_files,
)
from .review import ReviewQueue, agreement_report, verified_distribution

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_BACKEND = 4


def handle_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(exc, EXIT_CONFIG)
        except DataError as exc:
            _fail(exc, EXIT_DATA)
        except BackendError as exc:
            _fail(exc, EXIT_BACKEND)

    return wrapper


def _fail(exc, code):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _build_client(client, fixtures, base_url, model, credential_env):
    if client == "remote":
        if not base_url:
            raise ConfigError("--base-url is required for the remote client")
        return gateway.RemoteLlmClient(base_url, model, credential_env=credential_env)
    if not fixtures:
        raise ConfigError("--fixtures is required for the mock client")
    return gateway.MockLlmClient.from_jsonl(fixtures)


@click.group()
def cli():
    """Annotation and classification workbench for historical irony detection."""


client_options = [
    click.option("--client", type=click.Choice(["mock", "remote"]), default="mock"),
    click.option("--fixtures", type=click.Path(exists=True), default=None,
                 help="JSONL fixture table for the mock client."),
    click.option("--base-url", default="", help="Remote chat-completion endpoint."),
    click.option("--model", default="gpt-4o"),
    click.option("--credential-env", default="IRONIA_API_KEY"),
    click.option("--language", type=click.Choice(["es", "en"]), default="es"),
]


def with_client_options(fn):
    for option in reversed(client_options):
        fn = option(fn)
    return fn


@cli.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--failures", "failures_path", type=click.Path(), default=None)
@click.option("--retries", default=2, show_default=True)
@click.option("--max-in-flight", default=1, show_default=True)
@with_client_options
@handle_errors
def annotate(dataset, out, failures_path, retries, max_in_flight,
             client, fixtures, base_url, model, credential_env, language):
    """Classify every entry of a dataset with the LLM prompt."""
    ds = corpus.load_dataset(dataset)
    llm = _build_client(client, fixtures, base_url, model, credential_env)
    policy = gateway.RetryPolicy(retries=retries, max_in_flight=max_in_flight)
    annotations, failures = gateway.annotate_batch(
        list(ds.entries), llm, policy=policy, language=language
    )
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write(json.dumps(a.to_dict(), ensure_ascii=False) + "\n")
    if failures_path:
        with Path(failures_path).open("w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps(f.to_dict(), ensure_ascii=False) + "\n")
    click.echo(f"annotated {len(annotations)} entries, {len(failures)} failures")


@cli.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--audit", "audit_path", type=click.Path(), default=None,
              help="Where to keep original/expanded text pairs.")
@with_client_options
@handle_errors
def enhance(dataset, out, audit_path,
            client, fixtures, base_url, model, credential_env, language):
    """Expand every entry's text while preserving its label."""
    ds = corpus.load_dataset(dataset)
    llm = _build_client(client, fixtures, base_url, model, credential_env)
    results, failures = gateway.enhance_batch(list(ds.entries), llm, language=language)
    expanded = {r.entry_id: r for r in results}
    entries = []
    for entry in ds.entries:
        result = expanded.get(entry.id)
        if result is None:
            continue
        entries.append(
            corpus.Entry(
                id=entry.id,
                text=result.expanded_text,
                label=entry.label,
                provenance=entry.provenance,
                version_tag=corpus.VersionTag.ENHANCED,
            )
        )
    corpus.save_dataset(
        corpus.Dataset(name=f"{ds.name}-enhanced", mode=ds.mode, entries=tuple(entries)),
        out,
    )
    if audit_path:
        with Path(audit_path).open("w", encoding="utf-8") as fh:
            for r in results:
                fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
    click.echo(f"enhanced {len(results)} entries, {len(failures)} failures")


@cli.command("review-serve")
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="Append-only event log (created if missing).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--lease-seconds", default=1800.0, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Directory with the built reviewer UI to serve at /.")
@handle_errors
def review_serve(log_path, host, port, lease_seconds, ui_dir):
    """Serve the review queue HTTP API (and optionally the reviewer UI)."""
    import uvicorn

    from .review_api import create_app

    queue = ReviewQueue(log_path=log_path, lease_seconds=lease_seconds)
    app = create_app(queue, ui_dir=ui_dir)
    click.echo(f"serving review queue from {log_path} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("enqueue")
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--dataset", required=True, type=click.Path(exists=True),
              help="Entries the annotations refer to.")
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@handle_errors
def enqueue(log_path, dataset, annotations_path):
    """Queue machine annotations for human review."""
    ds = corpus.load_dataset(dataset)
    by_id = {entry.id: entry for entry in ds.entries}
    pairs = []
    with Path(annotations_path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            annotation = gateway.Annotation.from_dict(json.loads(line))
            entry = by_id.get(annotation.entry_id)
            if entry is None:
                raise DataError(f"annotation {annotation.entry_id!r} has no entry in {dataset}")
            pairs.append((entry, annotation))
    queue = ReviewQueue(log_path=log_path)
    added = queue.enqueue(pairs)
    queue.close()
    click.echo(f"queued {added} items for review")


@cli.command("export")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(),
              help="Where to write the verified entries (JSONL).")
@click.option("--merge-into", "primary_path", type=click.Path(exists=True), default=None,
              help="Primary dataset; writes the merged, augmented dataset instead.")
@handle_errors
def export(log_path, out, primary_path):
    """Export verified entries from a fully resolved review log."""
    from .review import export_verified

    queue = ReviewQueue(log_path=log_path)
    verified = export_verified(queue)
    if primary_path:
        primary = corpus.load_dataset(primary_path)
        merged = corpus.merge_augmented(primary, verified)
        corpus.save_dataset(merged, out)
        click.echo(
            f"merged {len(primary)} + {len(verified)} = {len(merged)} entries into {out}"
        )
    else:
        ds = corpus.Dataset(name="verified", mode=Mode.MULTICLASS, entries=tuple(verified))
        corpus.save_dataset(ds, out)
        click.echo(f"exported {len(verified)} verified entries to {out}")


@cli.command("train")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--encoder", "encoder_id", default="stub", show_default=True)
@click.option("--pooling", type=click.Choice(list(encoders.POOLINGS)), default="first_token")
@click.option("--mode", type=click.Choice([m.value for m in Mode]), default="multiclass")
@click.option("--out", required=True, type=click.Path(), help="Checkpoint path.")
@click.option("--history", "history_path", type=click.Path(), default=None)
@click.option("--ratios", default="0.7,0.15,0.15", show_default=True)
@click.option("--max-epochs", default=1500, show_default=True)
@click.option("--patience", default=50.0, show_default=True)
@click.option("--divergence-gap", default=0.1, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--seed", default=13, show_default=True)
@handle_errors
def train_cmd(dataset, encoder_id, pooling, mode, out, history_path, ratios,
              max_epochs, patience, divergence_gap, learning_rate, batch_size, seed):
    """Train the classification head on an embedded dataset."""
    mode = Mode(mode)
    try:
        ratio_values = tuple(float(x) for x in ratios.split(","))
        config = TrainingConfig(
            max_epochs=max_epochs,
            patience=patience,
            divergence_gap=divergence_gap,
            learning_rate=learning_rate,
            batch_size=batch_size,
            seed=seed,
            mode=mode,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    ds = corpus.load_dataset(dataset)
    if mode is Mode.BINARY:
        ds = corpus.to_binary(ds)
    ds = corpus.encode_categories(ds)
    train_ds, val_ds, test_ds = corpus.split(ds, ratio_values, seed=seed)

    import numpy as np

    def embed_part(part):
        matrix = encoders.embed([e.text for e in part.entries], encoder_id, pooling)
        y = np.array([e.category_encoded for e in part.entries], dtype=np.int64)
        return EmbeddedSet(x=matrix, y=y)

    head = init_head(config.output_dim, seed)
    head, history = train(head, embed_part(train_ds), embed_part(val_ds), config)
    save_head(out, head, mode, encoder_id, pooling, seed)
    if history_path:
        Path(history_path).write_text(
            json.dumps(history.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    report = evaluate(head, embed_part(test_ds))
    click.echo(
        f"trained {len(history)} epochs ({history.stop_reason.value}, "
        f"best epoch {history.best_epoch}); test accuracy {report.accuracy:.3f}"
    )
    click.echo(f"checkpoint written to {out}")


@cli.command("evaluate")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out-dir", default="reports", show_default=True)
@click.option("--name", default=None, help="Model name used in the tables.")
@handle_errors
def evaluate_cmd(model_path, dataset, out_dir, name):
    """Score a trained head against a labeled dataset."""
    import numpy as np

    head, header = load_head(model_path)
    mode = Mode(header["mode"])
    ds = corpus.load_dataset(dataset)
    if mode is Mode.BINARY:
        ds = corpus.to_binary(ds)
    ds = corpus.encode_categories(ds)
    matrix = encoders.embed(
        [e.text for e in ds.entries], header["encoder_id"], header["pooling"]
    )
    y = np.array([e.category_encoded for e in ds.entries], dtype=np.int64)
    report = evaluate(head, EmbeddedSet(x=matrix, y=y))
    model_name = name or f"{header['encoder_id']} ({mode.value})"
    paths = write_report_files([(model_name, report)], out_dir, f"eval_{mode.value}")
    click.echo(f"accuracy {report.accuracy:.4f}")
    for kind, path in paths.items():
        click.echo(f"{kind}: {path}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@handle_errors
def phase(config_path):
    """Run one experiment phase from a config file."""
    config = validate_config(config_path)
    paths = run_phase(config)
    for kind, path in sorted(paths.items()):
        click.echo(f"{kind}: {path}")


@cli.command()
@click.option("--json", "json_path", required=True, type=click.Path(exists=True),
              help="Report JSON produced by the phase command.")
@click.option("--out-dir", default="reports", show_default=True)
@click.option("--basename", default="report", show_default=True)
@handle_errors
def report(json_path, out_dir, basename):
    """Re-emit markdown and CSV tables from stored report JSON."""
    from .metrics import EvalReport

    raw = json.loads(Path(json_path).read_text(encoding="utf-8"))
    reports = [(item["model"], EvalReport.from_dict(item["report"])) for item in raw]
    paths = write_report_files(reports, out_dir, basename)
    for kind, path in paths.items():
        click.echo(f"{kind}: {path}")


@cli.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--partial/--strict", default=True,
              help="Allow unresolved items (default) or require completion.")
@handle_errors
def stats(log_path, partial):
    """Print agreement and class-distribution tables from a review log."""
    queue = ReviewQueue(log_path=log_path)
    agreement = agreement_report(queue, partial=partial)
    click.echo(render_agreement_markdown(agreement))
    distribution = verified_distribution(queue)
    if distribution is not None:
        click.echo(render_distribution_markdown(distribution))
    counts = queue.counts()
    click.echo(
        f"pending {counts['pending']}, assigned {counts['assigned']}, "
        f"resolved {counts['resolved']}, total {counts['total']}"
    )


def main():
    cli(prog_name="ironia")


if __name__ == "__main__":
    main()
