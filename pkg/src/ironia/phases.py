"""Experiment phase orchestration.

Four phases share one pipeline skeleton: load the dataset, convert to the
requested mode, encode labels, split. The GPT baseline scores the machine
tags on the test split directly; the encoder phases embed, train the head
per encoder, and evaluate. Reports land in the configured output directory
as markdown, CSV and JSON. Outputs contain no timestamps, so a re-run with
mock/stub backends is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import corpus, encoders, gateway
from .classifier import EmbeddedSet, init_head, save_head, train
from .config import Phase, RunConfig
from .corpus import ENCODING, MODE_LABELS, Dataset, Mode, merge_to_binary
from .errors import ConfigError, FileError
from .metrics import DISPLAY_NAMES, EvalReport, confusion_from_pairs, evaluate, metrics_from_confusion
from .reports import write_report_files


def build_client(config: RunConfig) -> gateway.LlmClient:
    if config.llm.client == "remote":
        if not config.llm.base_url:
            raise ConfigError("[llm] remote client needs a base_url")
        return gateway.RemoteLlmClient(
            base_url=config.llm.base_url,
            model_id=config.llm.model,
            credential_env=config.llm.credential_env,
        )
    if config.llm.fixtures is None:
        raise ConfigError("[llm] mock client needs a fixtures file")
    if not Path(config.llm.fixtures).exists():
        raise FileError(f"fixtures file not found: {config.llm.fixtures}")
    return gateway.MockLlmClient.from_jsonl(config.llm.fixtures)


def prepare_dataset(config: RunConfig) -> Dataset:
    ds = corpus.load_dataset(config.dataset)
    if config.mode is Mode.BINARY:
        ds = corpus.to_binary(ds)
    return corpus.encode_categories(ds)


def embedded_split(ds: Dataset, matrix: np.ndarray, subset: Dataset) -> EmbeddedSet:
    index = {entry.id: i for i, entry in enumerate(ds.entries)}
    rows = [index[entry.id] for entry in subset.entries]
    y = np.array([entry.category_encoded for entry in subset.entries], dtype=np.int64)
    return EmbeddedSet(x=np.ascontiguousarray(matrix[rows]), y=y)


def run_phase(config: RunConfig) -> dict[str, Path]:
    """Execute one experiment phase; returns the written file paths."""
    if not Path(config.dataset).exists():
        raise FileError(f"dataset file not found: {config.dataset}")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    basename = f"report_{config.phase.value}_{config.mode.value}"

    ds = prepare_dataset(config)
    train_ds, val_ds, test_ds = corpus.split(ds, config.ratios, seed=config.training.seed)

    if config.phase is Phase.BASELINE_GPT:
        reports, extra = _gpt_baseline(config, test_ds, out_dir)
    else:
        reports, extra = _encoder_pipeline(config, ds, train_ds, val_ds, test_ds, out_dir)

    paths = write_report_files(reports, out_dir, basename)
    json_path = out_dir / f"{basename}.json"
    json_path.write_text(
        json.dumps(
            [{"model": model, "report": report.to_dict()} for model, report in reports],
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    paths["json"] = json_path
    paths.update(extra)
    return paths


def _gpt_baseline(config: RunConfig, test_ds: Dataset, out_dir: Path):
    client = build_client(config)
    # Fixed clock keeps re-runs of the same config byte-identical.
    annotations, failures = gateway.annotate_batch(
        list(test_ds.entries), client, language=config.llm.language, now=lambda: 0.0
    )
    k = len(MODE_LABELS[config.mode])
    encoding = ENCODING[config.mode]
    annotated = {a.entry_id: a for a in annotations}
    gold, predicted = [], []
    for entry in test_ds.entries:
        annotation = annotated.get(entry.id)
        if annotation is None:
            continue
        tag = annotation.tag if config.mode is Mode.MULTICLASS else merge_to_binary(annotation.tag)
        gold.append(entry.category_encoded)
        predicted.append(encoding[tag])
    confusion = confusion_from_pairs(gold, predicted, k)
    averaging = "macro" if config.mode is Mode.BINARY else "weighted"
    labels = [DISPLAY_NAMES[label] for label in MODE_LABELS[config.mode]]
    report = metrics_from_confusion(confusion, averaging, class_labels=labels)
    model_name = f"{config.llm.model} prompt baseline"

    extra = {}
    annotations_path = out_dir / "baseline_annotations.jsonl"
    with annotations_path.open("w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write(json.dumps(a.to_dict(), ensure_ascii=False) + "\n")
    extra["annotations"] = annotations_path
    if failures:
        failures_path = out_dir / "baseline_failures.jsonl"
        with failures_path.open("w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps(f.to_dict(), ensure_ascii=False) + "\n")
        extra["failures"] = failures_path
    return [(model_name, report)], extra


def _encoder_pipeline(config: RunConfig, ds, train_ds, val_ds, test_ds, out_dir: Path):
    texts = [entry.text for entry in ds.entries]

    def run_one(encoder_id: str):
        matrix = encoders.embed(texts, encoder_id, pooling=config.pooling)
        parts = [embedded_split(ds, matrix, part) for part in (train_ds, val_ds, test_ds)]
        head = init_head(config.training.output_dim, config.training.seed)
        head, history = train(head, parts[0], parts[1], config.training)
        report = evaluate(head, parts[2])

        slug = encoder_id.replace("/", "__")
        head_path = out_dir / f"head_{slug}_{config.mode.value}.bin"
        save_head(
            head_path, head, config.mode, encoder_id, config.pooling, config.training.seed
        )
        history_path = out_dir / f"history_{slug}_{config.mode.value}.json"
        history_path.write_text(
            json.dumps(history.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        return report, head_path, history_path

    # Encoder runs are independent and internally seeded, so the fan-out
    # cannot change any result, only wall time. Reports keep config order.
    if config.parallel_encoders and len(config.encoder_ids) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=len(config.encoder_ids)) as pool:
            outcomes = list(pool.map(run_one, config.encoder_ids))
    else:
        outcomes = [run_one(encoder_id) for encoder_id in config.encoder_ids]

    reports: list[tuple[str, EvalReport]] = []
    extra: dict[str, Path] = {}
    for encoder_id, (report, head_path, history_path) in zip(config.encoder_ids, outcomes):
        reports.append((encoder_id, report))
        extra[f"head:{encoder_id}"] = head_path
        extra[f"history:{encoder_id}"] = history_path
    return reports, extra
