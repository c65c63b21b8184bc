"""Semi-automated annotation and classification workbench for irony
detection in 19th-century Spanish newspaper text."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Dataset,
    DistributionReport,
    Entry,
    Label,
    Mode,
    Provenance,
    VersionTag,
    class_distribution,
    encode_categories,
    load_dataset,
    merge_augmented,
    save_dataset,
    split,
    to_binary,
)
from .gateway import (  # noqa: F401
    Annotation,
    MockLlmClient,
    RemoteLlmClient,
    annotate_batch,
    enhance_batch,
    parse_classification_response,
    render_classification_prompt,
    render_enhancement_prompt,
)
from .review import AgreementReport, ReviewQueue, Verdict, agreement_report, export_verified  # noqa: F401
from .encoders import embed, stub_embed  # noqa: F401
from .classifier import HeadParams, TrainingConfig, TrainingHistory, init_head, train  # noqa: F401
from .metrics import EvalReport, evaluate, metrics_from_confusion  # noqa: F401
