"""Seeded synthetic data: blob vectors, toy corpora, and random embedding
matrices. Used by the test suite and handy for demos."""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, ingest
from .vectorize import EmbeddingMatrix


def blob_vectors(
    counts: list[int], *, dim: int = 5, separation: float = 10.0, sigma: float = 1.0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian blobs with centers ``separation * sigma`` apart along
    orthogonal-ish directions. Returns (vectors, blob labels)."""
    rng = np.random.default_rng(seed)
    centers = []
    for i in range(len(counts)):
        direction = np.zeros(dim)
        direction[i % dim] = 1.0
        centers.append(direction * separation * sigma * (1 + i // dim))
    rows, labels = [], []
    for label, (count, center) in enumerate(zip(counts, centers)):
        rows.append(rng.normal(0.0, sigma, size=(count, dim)) + center)
        labels.extend([label] * count)
    return np.vstack(rows), np.asarray(labels)


def random_embedding_matrix(ids, dim: int = 768, seed: int = 0) -> EmbeddingMatrix:
    """Seeded random float32 matrix keyed by the given document ids."""
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((len(ids), dim)).astype(np.float32)
    return EmbeddingMatrix(ids=list(ids), vectors=vectors)


def build_corpus(spec: dict[str, list[tuple[list[str], str]]],
                 research_fields: dict[str, str] | None = None) -> Corpus:
    """Build a toy corpus from a mapping of comparison id to a list of
    (predicate ids, paper text) contributions. One paper per contribution;
    the text becomes the title."""
    research_fields = research_fields or {}
    papers, contributions, comparisons, predicates = [], [], [], set()
    counter = 0
    for comparison_id in sorted(spec):
        comparisons.append({"id": comparison_id, "title": f"about {comparison_id}"})
        for preds, text in spec[comparison_id]:
            counter += 1
            paper_id = f"paper-{counter:04d}"
            contribution_id = f"contrib-{counter:04d}"
            papers.append(
                {
                    "id": paper_id,
                    "title": text,
                    "research_field": research_fields.get(comparison_id, "Field X"),
                    "contributions": [contribution_id],
                }
            )
            contributions.append(
                {
                    "id": contribution_id,
                    "paper_id": paper_id,
                    "comparison_id": comparison_id,
                    "predicates": list(preds),
                }
            )
            predicates.update(preds)
    return ingest(
        {
            "papers": papers,
            "contributions": contributions,
            "comparisons": comparisons,
            "predicates": [{"id": p, "label": f"label of {p}"} for p in sorted(predicates)],
        }
    )


def topical_corpus(
    n_comparisons: int, contributions_per_comparison: int, *, seed: int = 0,
    words_per_text: int = 12,
) -> Corpus:
    """A corpus whose comparisons have disjoint vocabularies and predicate
    sets, so text clustering can recover them."""
    rng = np.random.default_rng(seed)
    spec: dict[str, list[tuple[list[str], str]]] = {}
    for c in range(n_comparisons):
        comparison_id = f"comp-{c:04d}"
        vocab = [f"word{c}x{w}" for w in range(8)]
        preds = [f"pred-{c:04d}-{j}" for j in range(3)]
        members = []
        for _ in range(contributions_per_comparison):
            words = rng.choice(vocab, size=words_per_text, replace=True)
            members.append((preds, " ".join(words)))
        spec[comparison_id] = members
    return build_corpus(spec)
