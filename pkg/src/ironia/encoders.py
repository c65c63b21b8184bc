"""Text to 768-dim embedding bridge.

Five registered transformer checkpoints cover the real encoders; the "stub"
encoder derives deterministic unit vectors from a keyed hash so the whole
pipeline runs offline and in tests. Real checkpoints are loaded lazily via
transformers/torch and resolved against a local cache directory.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from . import kernels
from .errors import EmptyTextError, EncoderLoadError, UnknownEncoderError

EMBEDDING_DIM = 768
MAX_TOKENS = 512

STUB_ENCODER = "stub"

# Registry: encoder id -> checkpoint reference handed to the model hub /
# local cache. The five transformer ids plus the stub are always present.
DEFAULT_REGISTRY: dict[str, str] = {
    "bert-base-uncased": "bert-base-uncased",
    "bert-base-multilingual-uncased": "bert-base-multilingual-uncased",
    "dccuchile/bert-base-spanish-wwm-uncased": "dccuchile/bert-base-spanish-wwm-uncased",
    "dccuchile/bert-base-spanish-wwm-cased": "dccuchile/bert-base-spanish-wwm-cased",
    "beto-cased-finetuned-xix-latam": "beto-cased-finetuned-xix-latam",
    STUB_ENCODER: STUB_ENCODER,
}

POOLINGS = ("first_token", "mean")

CACHE_ENV = "IRONIA_ENCODER_CACHE"

_model_cache: dict[str, tuple] = {}


def registered_encoders() -> tuple[str, ...]:
    return tuple(DEFAULT_REGISTRY)


def normalize_text(text: str) -> str:
    """Collapse all whitespace runs to single spaces and trim."""
    return " ".join(text.split())


def stub_embed(text: str, backend=None) -> np.ndarray:
    """Deterministic unit-norm 768-vector from a keyed hash of the text.

    The whitespace-normalized text is hashed with 64-bit FNV-1a; the hash
    seeds a splitmix-style counter generator expanded to 768 values in
    [-1, 1), which are then L2-normalized. Fixed-width arithmetic plus an
    exactly-rounded norm make the result byte-identical across platforms
    and backends.
    """
    normalized = normalize_text(text)
    if not normalized:
        raise EmptyTextError("cannot embed empty text")
    kb = backend or kernels.get_backend()
    key = kb.fnv1a64(normalized.encode("utf-8"))
    raw = kb.stub_expand(key, EMBEDDING_DIM)
    norm = math.sqrt(math.fsum(x * x for x in raw))
    return raw / norm


def embed(
    texts,
    encoder_id: str,
    pooling: str = "first_token",
    cache_dir: str | os.PathLike | None = None,
) -> np.ndarray:
    """Embed a sequence of texts; returns an (n, 768) float64 matrix.

    Order-preserving and deterministic for a fixed checkpoint and pooling.
    """
    if encoder_id not in DEFAULT_REGISTRY:
        raise UnknownEncoderError(encoder_id)
    if pooling not in POOLINGS:
        raise ValueError(f"pooling must be one of {POOLINGS}, got {pooling!r}")
    texts = list(texts)
    for t in texts:
        if not str(t).strip():
            raise EmptyTextError("cannot embed empty text")

    if DEFAULT_REGISTRY[encoder_id] == STUB_ENCODER:
        out = np.empty((len(texts), EMBEDDING_DIM), dtype=np.float64)
        for i, t in enumerate(texts):
            out[i] = stub_embed(t)
        return out
    return _transformer_embed(texts, encoder_id, pooling, cache_dir)


def _transformer_embed(texts, encoder_id, pooling, cache_dir):
    tokenizer, model, torch = _load_checkpoint(encoder_id, cache_dir)
    vectors = np.empty((len(texts), EMBEDDING_DIM), dtype=np.float64)
    with torch.no_grad():
        for i, text in enumerate(texts):
            batch = tokenizer(
                text, return_tensors="pt", truncation=True, max_length=MAX_TOKENS
            )
            hidden = model(**batch).last_hidden_state[0]
            if pooling == "first_token":
                vec = hidden[0]
            else:
                mask = batch["attention_mask"][0].unsqueeze(-1)
                vec = (hidden * mask).sum(dim=0) / mask.sum()
            vectors[i] = vec.cpu().numpy().astype(np.float64)
    if vectors.shape[1] != EMBEDDING_DIM:
        raise EncoderLoadError(
            f"{encoder_id} produced {vectors.shape[1]}-dim vectors, expected {EMBEDDING_DIM}"
        )
    if not np.isfinite(vectors).all():
        raise EncoderLoadError(f"{encoder_id} produced non-finite embedding values")
    return vectors


def _load_checkpoint(encoder_id, cache_dir):
    if encoder_id in _model_cache:
        return _model_cache[encoder_id]
    reference = DEFAULT_REGISTRY[encoder_id]
    cache = Path(cache_dir or os.environ.get(CACHE_ENV, Path.home() / ".cache" / "ironia"))
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except ImportError as exc:
        raise EncoderLoadError(f"transformers/torch not installed: {exc}") from exc
    try:
        local = cache / reference.replace("/", "__")
        source = local if local.exists() else reference
        tokenizer = AutoTokenizer.from_pretrained(source, cache_dir=cache)
        model = AutoModel.from_pretrained(source, cache_dir=cache)
        model.eval()
    except Exception as exc:
        raise EncoderLoadError(f"cannot load checkpoint for {encoder_id!r}: {exc}") from exc
    _model_cache[encoder_id] = (tokenizer, model, torch)
    return _model_cache[encoder_id]


def save_embeddings(path: str | Path, matrix: np.ndarray, encoder_id: str, pooling: str) -> None:
    """Cache an embedding matrix as little-endian float64 with a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    path.write_bytes(matrix.tobytes())
    sidecar = {
        "encoder_id": encoder_id,
        "pooling": pooling,
        "count": int(matrix.shape[0]),
        "dim": int(matrix.shape[1]),
    }
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def load_embeddings(path: str | Path) -> tuple[np.ndarray, dict]:
    """Load a cached embedding matrix and its sidecar metadata."""
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text(encoding="utf-8"))
    flat = np.frombuffer(path.read_bytes(), dtype="<f8")
    matrix = flat.reshape(sidecar["count"], sidecar["dim"]).astype(np.float64)
    return matrix, sidecar
