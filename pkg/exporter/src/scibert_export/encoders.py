"""Sentence encoders.

``TransformerEncoder`` runs the pretrained uncased scientific-text model and
mean-pools the final hidden states over non-padding tokens (truncating at the
configured maximum sequence length). ``HashedEncoder`` is a deterministic
offline stand-in that exercises the export pipeline and binary format without
model weights; its vectors carry no semantics.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_MODEL = "allenai/scibert_scivocab_uncased"


class ModelUnavailableError(RuntimeError):
    """The pretrained model (or its runtime) could not be loaded."""


class TransformerEncoder:
    def __init__(self, model_name: str = DEFAULT_MODEL, max_seq_len: int = 512,
                 batch_size: int = 16):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelUnavailableError(
                f"transformers/torch not installed: {exc}"
            ) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as exc:
            raise ModelUnavailableError(
                f"could not load pretrained model '{model_name}': {exc}"
            ) from exc
        self._torch = torch
        self.model.eval()
        self.model_name = model_name
        self.max_seq_len = max_seq_len
        self.batch_size = batch_size
        self.dim = int(self.model.config.hidden_size)
        self.revision = getattr(self.model.config, "_commit_hash", None)

    def encode(self, texts: list[str]) -> tuple[np.ndarray, list[bool]]:
        torch = self._torch
        rows = []
        truncated = []
        for start in range(0, len(texts), self.batch_size):
            batch = texts[start : start + self.batch_size]
            full_lengths = [
                len(self.tokenizer(t, truncation=False)["input_ids"]) for t in batch
            ]
            truncated.extend(length > self.max_seq_len for length in full_lengths)
            enc = self.tokenizer(
                batch,
                padding=True,
                truncation=True,
                max_length=self.max_seq_len,
                return_tensors="pt",
            )
            with torch.no_grad():
                hidden = self.model(**enc).last_hidden_state
            mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
            rows.append(pooled.cpu().numpy().astype(np.float32))
        return np.vstack(rows), truncated


class HashedEncoder:
    """Deterministic pseudo-embeddings seeded from a hash of each text."""

    model_name = "hashed-stand-in"
    revision = None

    def __init__(self, dim: int = 768, max_seq_len: int = 512):
        self.dim = dim
        self.max_seq_len = max_seq_len

    def encode(self, texts: list[str]) -> tuple[np.ndarray, list[bool]]:
        rows = np.empty((len(texts), self.dim), dtype=np.float32)
        truncated = []
        for i, text in enumerate(texts):
            if not isinstance(text, str):
                raise TypeError(f"text at position {i} is not a string")
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            rows[i] = np.random.default_rng(seed).standard_normal(self.dim)
            truncated.append(len(text.split()) > self.max_seq_len)
        return rows, truncated
