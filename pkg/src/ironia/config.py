"""Run configuration: one INI-style file with a section per subsystem.

Every constraint violation is collected so a bad file reports all of its
problems at once. Credentials are never stored in the file; the [llm]
section only names the environment variable that holds them.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .classifier import TrainingConfig
from .corpus import Mode
from .encoders import DEFAULT_REGISTRY, POOLINGS
from .errors import ConfigError


class Phase(str, Enum):
    BASELINE_GPT = "baseline_gpt"
    BASELINE_BERT = "baseline_bert"
    ENHANCED = "enhanced"
    AUGMENTED = "augmented"


MAX_AUGMENTED_ENCODERS = 3


@dataclass
class LlmSettings:
    client: str = "mock"  # mock | remote
    fixtures: Path | None = None
    base_url: str = ""
    model: str = "gpt-4o"
    credential_env: str = "IRONIA_API_KEY"
    language: str = "es"


@dataclass
class RunConfig:
    phase: Phase
    mode: Mode
    dataset: Path
    output_dir: Path
    encoder_ids: tuple[str, ...] = ("stub",)
    pooling: str = "first_token"
    ratios: tuple[float, float, float] = (0.7, 0.15, 0.15)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    llm: LlmSettings = field(default_factory=LlmSettings)
    # Encoder runs are independent; this fans them out over a thread pool.
    parallel_encoders: bool = False

    def __post_init__(self) -> None:
        if self.phase is Phase.AUGMENTED and len(self.encoder_ids) > MAX_AUGMENTED_ENCODERS:
            raise ConfigError(
                f"augmented phase allows at most {MAX_AUGMENTED_ENCODERS} encoders, "
                f"got {len(self.encoder_ids)}"
            )


def validate_config(path: str | Path) -> RunConfig:
    """Parse and check a run config file; reports every violation found."""
    path = Path(path)
    problems: list[str] = []
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError([f"cannot parse {path}: {exc}"])

    def get(section: str, option: str, default=None):
        if parser.has_option(section, option):
            return parser.get(section, option).strip()
        return default

    phase_raw = get("run", "phase")
    phase = None
    if phase_raw is None:
        problems.append("[run] phase is required")
    else:
        try:
            phase = Phase(phase_raw)
        except ValueError:
            problems.append(
                f"[run] unknown phase {phase_raw!r}; expected one of "
                f"{[p.value for p in Phase]}"
            )

    mode_raw = get("run", "mode", "multiclass")
    mode = None
    try:
        mode = Mode(mode_raw)
    except ValueError:
        problems.append(f"[run] unknown mode {mode_raw!r}; expected multiclass or binary")

    output_dir = Path(get("run", "output_dir", "out"))
    parallel_raw = get("run", "parallel_encoders", "false").lower()
    if parallel_raw not in ("true", "false", "1", "0", "yes", "no"):
        problems.append(f"[run] parallel_encoders must be a boolean, got {parallel_raw!r}")
    parallel_encoders = parallel_raw in ("true", "1", "yes")

    dataset_raw = get("data", "dataset")
    dataset = None
    if dataset_raw is None:
        problems.append("[data] dataset is required")
    else:
        dataset = Path(dataset_raw)

    ratios = (0.7, 0.15, 0.15)
    ratios_raw = get("data", "ratios")
    if ratios_raw:
        try:
            parts = tuple(float(x) for x in ratios_raw.split(","))
            if len(parts) != 3 or any(r <= 0 for r in parts) or abs(sum(parts) - 1) > 1e-9:
                raise ValueError
            ratios = parts
        except ValueError:
            problems.append(
                f"[data] ratios must be three positive numbers summing to 1, got {ratios_raw!r}"
            )

    ids_raw = get("encoders", "ids", "stub")
    encoder_ids = tuple(x.strip() for x in ids_raw.split(",") if x.strip())
    for encoder_id in encoder_ids:
        if encoder_id not in DEFAULT_REGISTRY:
            problems.append(f"[encoders] unknown encoder id {encoder_id!r}")
    if not encoder_ids:
        problems.append("[encoders] ids must list at least one encoder")
    if phase is Phase.AUGMENTED and len(encoder_ids) > MAX_AUGMENTED_ENCODERS:
        problems.append(
            f"[encoders] augmented phase allows at most {MAX_AUGMENTED_ENCODERS} "
            f"encoders, got {len(encoder_ids)}"
        )

    pooling = get("encoders", "pooling", "first_token")
    if pooling not in POOLINGS:
        problems.append(f"[encoders] pooling must be one of {POOLINGS}, got {pooling!r}")

    training = None
    try:
        training = TrainingConfig(
            max_epochs=int(get("training", "max_epochs", "1500")),
            patience=float(get("training", "patience", "50")),
            divergence_gap=float(get("training", "divergence_gap", "0.1")),
            learning_rate=float(get("training", "learning_rate", "0.001")),
            batch_size=int(get("training", "batch_size", "32")),
            seed=int(get("training", "seed", "13")),
            mode=mode or Mode.MULTICLASS,
        )
    except (ValueError, TypeError) as exc:
        problems.append(f"[training] {exc}")

    client = get("llm", "client", "mock")
    if client not in ("mock", "remote"):
        problems.append(f"[llm] client must be mock or remote, got {client!r}")
    fixtures_raw = get("llm", "fixtures")
    language = get("llm", "language", "es")
    if language not in ("es", "en"):
        problems.append(f"[llm] language must be es or en, got {language!r}")
    llm = LlmSettings(
        client=client,
        fixtures=Path(fixtures_raw) if fixtures_raw else None,
        base_url=get("llm", "base_url", ""),
        model=get("llm", "model", "gpt-4o"),
        credential_env=get("llm", "credential_env", "IRONIA_API_KEY"),
        language=language if language in ("es", "en") else "es",
    )
    if client == "mock" and phase is Phase.BASELINE_GPT and fixtures_raw is None:
        problems.append("[llm] mock client for baseline_gpt needs a fixtures file")

    if problems:
        raise ConfigError(problems)

    return RunConfig(
        phase=phase,
        mode=mode,
        dataset=dataset,
        output_dir=output_dir,
        encoder_ids=encoder_ids,
        pooling=pooling,
        ratios=ratios,
        training=training,
        llm=llm,
        parallel_encoders=parallel_encoders,
    )
