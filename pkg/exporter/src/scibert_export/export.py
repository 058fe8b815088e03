"""Export job: corpus JSON in, one embedding row per paper out.

Each paper's title and abstract are concatenated (a single space between,
abstract optional) and encoded; rows are written in paper-id order. Papers
whose text fails to encode are skipped, logged, and listed in the sidecar;
the output row count is the paper count minus the skip count.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import DEFAULT_MODEL, HashedEncoder, TransformerEncoder
from .writer import write_embeddings

logger = logging.getLogger("scibert_export")


@dataclass
class ExportJob:
    input_path: str
    output_path: str
    model_name: str = DEFAULT_MODEL
    max_seq_len: int = 512
    batch_size: int = 16
    backend: str = "transformer"  # "transformer" | "hashed"

    def validate(self) -> None:
        if self.max_seq_len != 512:
            raise ValueError("max sequence length is fixed at 512")
        if self.backend not in ("transformer", "hashed"):
            raise ValueError(f"unknown backend '{self.backend}'")
        if not Path(self.input_path).exists():
            raise FileNotFoundError(f"corpus file not found: {self.input_path}")


@dataclass
class ExportResult:
    n_rows: int
    n_truncated: int
    skipped: list[str] = field(default_factory=list)


def read_papers(path) -> list[dict]:
    """Papers from the corpus JSON: id, title, optional abstract."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or "papers" not in raw:
        raise ValueError(f"{path} does not contain a 'papers' array")
    papers = []
    for i, rec in enumerate(raw["papers"]):
        if "id" not in rec or "title" not in rec:
            raise ValueError(f"papers[{i}] is missing 'id' or 'title'")
        papers.append(
            {
                "id": rec["id"],
                "title": rec["title"],
                "abstract": rec.get("abstract") or "",
            }
        )
    return papers


def paper_text(paper: dict) -> str:
    title = paper["title"].strip()
    abstract = paper["abstract"].strip()
    return f"{title} {abstract}" if abstract else title


def make_encoder(job: ExportJob):
    if job.backend == "hashed":
        return HashedEncoder(max_seq_len=job.max_seq_len)
    return TransformerEncoder(
        model_name=job.model_name,
        max_seq_len=job.max_seq_len,
        batch_size=job.batch_size,
    )


def run_export(job: ExportJob, encoder=None) -> ExportResult:
    job.validate()
    if encoder is None:
        encoder = make_encoder(job)

    papers = sorted(read_papers(job.input_path), key=lambda p: p["id"])
    ids: list[str] = []
    rows: list[np.ndarray] = []
    skipped: list[str] = []
    n_truncated = 0

    for start in range(0, len(papers), job.batch_size):
        batch = papers[start : start + job.batch_size]
        texts = [paper_text(p) for p in batch]
        try:
            vectors, truncated = encoder.encode(texts)
            items = zip(batch, vectors, truncated)
        except Exception:
            # batch failed: retry one by one so a single bad text only
            # costs its own row
            items = []
            for paper, text in zip(batch, texts):
                try:
                    vector, flags = encoder.encode([text])
                    items.append((paper, vector[0], flags[0]))
                except Exception as exc:
                    logger.warning("skipping paper %s: %s", paper["id"], exc)
                    skipped.append(paper["id"])
        for paper, vector, was_truncated in items:
            ids.append(paper["id"])
            rows.append(np.asarray(vector, dtype=np.float32))
            n_truncated += bool(was_truncated)

    matrix = (
        np.vstack(rows) if rows else np.empty((0, encoder.dim), dtype=np.float32)
    )
    sidecar = {
        "model_name": encoder.model_name,
        "pooling": "mean",
        "max_seq_len": job.max_seq_len,
        "dim": int(matrix.shape[1]),
        "n_rows": len(ids),
        "n_truncated": n_truncated,
        "skipped": skipped,
        "revision": getattr(encoder, "revision", None),
    }
    write_embeddings(job.output_path, ids, matrix, sidecar=sidecar)
    return ExportResult(n_rows=len(ids), n_truncated=n_truncated, skipped=skipped)
