"""Writer for the engine's binary embedding exchange format.

Little-endian layout:

    magic 'PGEM' | u32 version=1 | u32 count | u32 dim |
    per row: u16 id length | UTF-8 id bytes | dim * f32

A sidecar ``<file>.json`` records provenance: model name, pooling strategy,
max sequence length, dimension, plus row/truncation/skip accounting.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"PGEM"
VERSION = 1


def write_embeddings(path, ids, vectors, sidecar: dict | None = None) -> None:
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    if len(ids) != vectors.shape[0]:
        raise ValueError(
            f"id count {len(ids)} does not match row count {vectors.shape[0]}"
        )
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids")

    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, vectors.shape[0], vectors.shape[1]))
        for doc_id, row in zip(ids, vectors):
            encoded = doc_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValueError(f"document id too long: {doc_id[:40]}...")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(row.astype("<f4", copy=False).tobytes())

    if sidecar is not None:
        Path(str(path) + ".json").write_text(
            json.dumps(sidecar, ensure_ascii=False, indent=1), encoding="utf-8"
        )
