"""Live recommendation path: from a title/DOI to a ranked predicate group.

Steps: resolve the abstract (cache-first provider) when absent, concatenate
title and abstract, vectorize, assign to the most relevant cluster of a
pre-fitted model, then combine the predicate sets of the cluster's source
contributions into one ranked group. A cluster without source contributions
yields an empty recommendation, never an error.

Recommendation is a pure function of the query text and the immutable
models; concurrent queries are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cluster import ClusterAssignment
from .corpus import Corpus
from .errors import FingerprintMismatchError
from .vectorize import TfidfTextVectorizer, concat_title_abstract


@dataclass(frozen=True)
class RecommendationQuery:
    title: str | None = None
    doi: str | None = None
    abstract: str | None = None

    def __post_init__(self):
        if not (self.title or self.doi):
            raise ValueError("a query needs a title or a DOI")


@dataclass(frozen=True)
class RankedPredicate:
    predicate_id: str
    label: str
    support: int
    support_fraction: float


@dataclass
class Recommendation:
    cluster_id: int
    predicates: list[RankedPredicate]
    contributing_contribution_ids: list[str]
    empty: bool
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "empty": self.empty,
            "predicates": [
                {
                    "id": p.predicate_id,
                    "label": p.label,
                    "support": p.support,
                    "support_fraction": p.support_fraction,
                }
                for p in self.predicates
            ],
            "contributing_contribution_ids": self.contributing_contribution_ids,
            "flags": self.flags,
        }


@dataclass
class ExplanationReport:
    cluster_id: int
    contributions: list[dict]  # id, paper_id, comparison_id, comparison_title
    predicate_supporters: dict[str, list[str]]

    def as_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "contributions": self.contributions,
            "predicate_supporters": self.predicate_supporters,
        }


class Recommender:
    """Binds a corpus, a fitted vector space, and a fitted clustering model
    into the serving workflow.

    ``assignment`` maps the model's fitted documents (contribution ids) to
    clusters; ``source_ids`` limits which of them may contribute predicates
    (under the evaluation protocol, the training split). ``predicate_source``
    selects between combining the member contributions' own predicate sets
    (``cps_union``, the workflow default) and the comparison-level predicate
    sets of the members' comparisons (``comparison``).
    """

    def __init__(
        self,
        corpus: Corpus,
        vectorizer: TfidfTextVectorizer,
        model,
        assignment: ClusterAssignment,
        *,
        model_fingerprint: str | None = None,
        source_ids=None,
        predicate_source: str = "cps_union",
        provider=None,
    ):
        if predicate_source not in ("cps_union", "comparison"):
            raise ValueError(f"unknown predicate source '{predicate_source}'")
        if model_fingerprint is not None and model_fingerprint != vectorizer.fingerprint:
            raise FingerprintMismatchError(
                "clustering model was fitted on a different vector space than "
                "the given vectorizer"
            )
        self.corpus = corpus
        self.vectorizer = vectorizer
        self.model = model
        self.assignment = assignment
        self.source_ids = (
            frozenset(source_ids)
            if source_ids is not None
            else frozenset(assignment.assignment)
        )
        self.predicate_source = predicate_source
        self.provider = provider

    def resolve_text(self, query: RecommendationQuery) -> tuple[str, list[str]]:
        flags: list[str] = []
        title = query.title
        abstract = query.abstract

        if abstract is None and self.provider is not None:
            lookup = query.doi or query.title
            try:
                abstract = self.provider.fetch(lookup)
            except Exception:
                abstract = None
                flags.append("abstract_lookup_failed")
        if title is None:
            # DOI-only query without a resolvable title: fall back to the DOI
            # string itself so the pipeline stays total
            title = query.doi
            flags.append("title_missing_used_doi")
        if not abstract:
            abstract = ""
            if "abstract_lookup_failed" not in flags:
                flags.append("title_only")
        return concat_title_abstract(title, abstract), flags

    def recommend(self, query: RecommendationQuery) -> Recommendation:
        text, flags = self.resolve_text(query)
        vector = self.vectorizer.transform([text])
        if vector.nnz == 0:
            flags.append("zero_vector")
        cluster_id = int(self.model.predict(vector)[0])
        return self._recommend_cluster(cluster_id, flags)

    def recommend_document(self, doc_id: str) -> Recommendation:
        """Recommendation for a document that is already part of the fitted
        assignment (no vectorization or cluster prediction involved)."""
        return self._recommend_cluster(self.assignment.cluster_of(doc_id), [])

    def _recommend_cluster(self, cluster_id: int, flags: list[str]) -> Recommendation:
        members = [
            m for m in self.assignment.members(cluster_id) if m in self.source_ids
        ]
        support: dict[str, int] = {}
        if self.predicate_source == "cps_union":
            for m in members:
                for p in self.corpus.contributions[m].cps:
                    support[p] = support.get(p, 0) + 1
        else:
            comparisons = {self.corpus.contributions[m].comparison_id for m in members}
            predicates: set[str] = set()
            for comparison_id in comparisons:
                predicates |= self.corpus.comparison_predicates(comparison_id)
            # support counted over member contributions, as in the union mode
            for p in predicates:
                support[p] = sum(
                    1 for m in members if p in self.corpus.contributions[m].cps
                ) or 1

        n_members = len(members)
        ranked = sorted(
            (
                RankedPredicate(
                    predicate_id=p,
                    label=self.corpus.predicate_label(p),
                    support=c,
                    support_fraction=c / n_members if n_members else 0.0,
                )
                for p, c in support.items()
            ),
            key=lambda rp: (-rp.support, rp.label),
        )
        return Recommendation(
            cluster_id=cluster_id,
            predicates=ranked,
            contributing_contribution_ids=members,
            empty=not ranked,
            flags=flags,
        )

    def explain(self, recommendation: Recommendation) -> ExplanationReport:
        """List the cluster's source contributions, their comparisons, and the
        contributions supporting each recommended predicate."""
        contributions = []
        for cid in recommendation.contributing_contribution_ids:
            record = self.corpus.contributions[cid]
            contributions.append(
                {
                    "id": cid,
                    "paper_id": record.paper_id,
                    "comparison_id": record.comparison_id,
                    "comparison_title": self.corpus.comparisons[
                        record.comparison_id
                    ].title,
                }
            )
        supporters: dict[str, list[str]] = {}
        for ranked in recommendation.predicates:
            supporters[ranked.predicate_id] = [
                cid
                for cid in recommendation.contributing_contribution_ids
                if ranked.predicate_id in self.corpus.contributions[cid].cps
            ]
        return ExplanationReport(
            cluster_id=recommendation.cluster_id,
            contributions=contributions,
            predicate_supporters=supporters,
        )
