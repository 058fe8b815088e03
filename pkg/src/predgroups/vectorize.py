"""Text vectorization: a natively fitted TF-IDF space and dense embeddings.

TF-IDF weights use the add-one-smoothed formula

    weight(t, doc) = tf(t, doc) * (ln((1 + N) / (1 + df(t))) + 1)

followed by L2 normalization of each document vector. Tokens are maximal
runs of two or more word characters, lowercased; single-character tokens are
dropped; no stemming or stop-word removal. Out-of-vocabulary tokens are
ignored at transform time, so a document of only unseen tokens yields the
zero vector.

Dense embeddings are exchanged through a little-endian binary file:

    magic 'PGEM' | u32 version=1 | u32 count | u32 dim |
    per row: u16 id length | UTF-8 id bytes | dim * f32

A sidecar ``<file>.json`` records provenance (model name, pooling, max
sequence length, dimension).
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DataError

DEFAULT_TOKEN_PATTERN = r"(?u)\b\w\w+\b"

EMBEDDING_MAGIC = b"PGEM"
EMBEDDING_VERSION = 1


def tokenize(text: str, token_pattern: str = DEFAULT_TOKEN_PATTERN) -> list[str]:
    return re.findall(token_pattern, text.lower())


def concat_title_abstract(title: str, abstract: str = "") -> str:
    """One query text per paper: title, a space, then the abstract.

    An empty abstract degrades gracefully to the title alone; an empty title
    is an error.
    """
    if not title or not title.strip():
        raise ValueError("title must be non-empty")
    title = title.strip()
    abstract = (abstract or "").strip()
    return f"{title} {abstract}" if abstract else title


class TfidfTextVectorizer(BaseEstimator, TransformerMixin):
    """Fit a TF-IDF vector space over raw texts; transform texts to sparse
    L2-normalized document vectors.

    Fitted attributes: ``vocabulary_`` (term -> column index, alphabetical),
    ``document_frequency_`` (term -> count), ``n_documents_``.
    """

    def __init__(self, norm: str = "l2", token_pattern: str = DEFAULT_TOKEN_PATTERN):
        self.norm = norm
        self.token_pattern = token_pattern

    def fit(self, texts, y=None):
        if self.norm != "l2":
            raise ValueError(f"unsupported norm '{self.norm}'")
        texts = list(texts)
        if not texts:
            raise DataError("cannot fit a vector space on an empty corpus")

        df: dict[str, int] = {}
        any_tokens = False
        for text in texts:
            seen = set(tokenize(text, self.token_pattern))
            if seen:
                any_tokens = True
            for term in seen:
                df[term] = df.get(term, 0) + 1
        if not any_tokens:
            raise DataError("all documents are empty after tokenization")

        terms = sorted(df)
        self.vocabulary_ = {t: i for i, t in enumerate(terms)}
        self.document_frequency_ = {t: df[t] for t in terms}
        self.n_documents_ = len(texts)
        df_arr = np.array([df[t] for t in terms], dtype=np.float64)
        self._idf = np.log((1.0 + self.n_documents_) / (1.0 + df_arr)) + 1.0
        return self

    def _check_fitted(self):
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("vectorizer is not fitted")

    def transform(self, texts):
        """Transform texts into a CSR matrix of shape (n_texts, |vocabulary|)."""
        self._check_fitted()
        texts = list(texts)
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for text in texts:
            counts: dict[int, int] = {}
            for token in tokenize(text, self.token_pattern):
                col = self.vocabulary_.get(token)
                if col is not None:
                    counts[col] = counts.get(col, 0) + 1
            for col in sorted(counts):
                indices.append(col)
                data.append(counts[col] * self._idf[col])
            indptr.append(len(indices))
        X = sp.csr_matrix(
            (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), indptr),
            shape=(len(texts), len(self.vocabulary_)),
        )
        # L2-normalize non-empty rows; all-OOV rows stay zero
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        X = sp.diags(scale) @ X
        return X.tocsr()

    def idf(self, term: str) -> float:
        self._check_fitted()
        if term not in self.vocabulary_:
            raise KeyError(term)
        return float(self._idf[self.vocabulary_[term]])

    @property
    def n_terms(self) -> int:
        self._check_fitted()
        return len(self.vocabulary_)

    @property
    def fingerprint(self) -> str:
        """Stable hash of the fitted vocabulary, used to pair clustering
        models with the vector space they were fitted on."""
        self._check_fitted()
        h = hashlib.sha256()
        h.update(f"tfidf:{self.n_documents_}\n".encode("utf-8"))
        for term, idx in sorted(self.vocabulary_.items(), key=lambda kv: kv[1]):
            h.update(f"{term}\t{idx}\t{self.document_frequency_[term]}\n".encode("utf-8"))
        return h.hexdigest()

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        self._check_fitted()
        terms = sorted(self.vocabulary_, key=self.vocabulary_.get)
        payload = {
            "format": "predgroups-tfidf",
            "version": 1,
            "norm": self.norm,
            "token_pattern": self.token_pattern,
            "n_documents": self.n_documents_,
            "terms": [[t, self.document_frequency_[t]] for t in terms],
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TfidfTextVectorizer":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if raw.get("format") != "predgroups-tfidf" or raw.get("version") != 1:
            raise DataError(f"unrecognized vectorizer file: {path}")
        model = cls(norm=raw["norm"], token_pattern=raw["token_pattern"])
        model.vocabulary_ = {t: i for i, (t, _) in enumerate(raw["terms"])}
        model.document_frequency_ = {t: int(d) for t, d in raw["terms"]}
        model.n_documents_ = int(raw["n_documents"])
        df_arr = np.array([d for _, d in raw["terms"]], dtype=np.float64)
        model._idf = np.log((1.0 + model.n_documents_) / (1.0 + df_arr)) + 1.0
        return model


# -- dense embedding matrices --------------------------------------------------


@dataclass
class EmbeddingMatrix:
    """Dense document embeddings in a fixed row order. Rows are float32 and
    stored exactly as loaded (never renormalized)."""

    ids: list[str]
    vectors: np.ndarray  # (n, dim) float32

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise DataError("embedding matrix must be 2-dimensional")
        if len(self.ids) != self.vectors.shape[0]:
            raise DataError(
                f"id count {len(self.ids)} does not match row count {self.vectors.shape[0]}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise DataError("duplicate document ids in embedding matrix")
        self._index = {doc_id: i for i, doc_id in enumerate(self.ids)}

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, doc_id: str) -> np.ndarray:
        return self.vectors[self._index[doc_id]]

    def submatrix(self, doc_ids) -> np.ndarray:
        """Rows for the given ids, in the given order. KeyError on a miss."""
        return self.vectors[[self._index[d] for d in doc_ids]]

    def match_ids(self, known_ids) -> tuple[list[str], list[str]]:
        """Split this matrix's ids into (resolvable, missing) against a
        collection of known document ids."""
        known = set(known_ids)
        present = [d for d in self.ids if d in known]
        missing = [d for d in self.ids if d not in known]
        return present, missing

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"embedding:{self.dim}\n".encode("utf-8"))
        for doc_id in self.ids:
            h.update(doc_id.encode("utf-8") + b"\n")
        return h.hexdigest()


def save_embeddings(matrix: EmbeddingMatrix, path, sidecar: dict | None = None) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<III", EMBEDDING_VERSION, len(matrix), matrix.dim))
        for i, doc_id in enumerate(matrix.ids):
            encoded = doc_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise DataError(f"document id too long to serialize: {doc_id[:40]}...")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(matrix.vectors[i].astype("<f4", copy=False).tobytes())
    if sidecar is not None:
        Path(str(path) + ".json").write_text(
            json.dumps(sidecar, ensure_ascii=False, indent=1), encoding="utf-8"
        )


def load_embeddings(path) -> EmbeddingMatrix:
    """Load an embedding file, validating magic, version, dimensions, and
    completeness. Truncation errors name the failing byte offset."""
    path = Path(path)
    blob = path.read_bytes()
    offset = 0

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(blob):
            raise DataError(
                f"truncated embedding file {path}: needed {n} bytes for {what} "
                f"at byte offset {offset}, file has {len(blob)}"
            )
        chunk = blob[offset : offset + n]
        offset += n
        return chunk

    if take(4, "magic") != EMBEDDING_MAGIC:
        raise DataError(f"{path} is not an embedding file (bad magic)")
    version, count, dim = struct.unpack("<III", take(12, "header"))
    if version != EMBEDDING_VERSION:
        raise DataError(f"unsupported embedding file version {version} in {path}")
    if dim <= 0:
        raise DataError(f"embedding dimension must be positive, got {dim}")

    ids: list[str] = []
    rows = np.empty((count, dim), dtype=np.float32)
    for i in range(count):
        (id_len,) = struct.unpack("<H", take(2, f"id length of row {i}"))
        ids.append(take(id_len, f"id of row {i}").decode("utf-8"))
        rows[i] = np.frombuffer(take(4 * dim, f"vector of row {i}"), dtype="<f4")
    if offset != len(blob):
        raise DataError(
            f"embedding file {path} has {len(blob) - offset} trailing bytes "
            f"after byte offset {offset}"
        )
    if len(set(ids)) != len(ids):
        raise DataError(f"duplicate document ids in embedding file {path}")
    return EmbeddingMatrix(ids=ids, vectors=rows)
