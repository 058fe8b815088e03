"""Corpus data model: papers, contributions, comparisons, predicates.

The canonical dataset format is a UTF-8 JSON object with four arrays:

    {
      "papers":        [{"id", "doi"?, "title", "abstract"?, "research_field",
                         "contributions": [contribution ids]}],
      "contributions": [{"id", "paper_id", "comparison_id",
                         "predicates": [predicate ids]}],
      "comparisons":   [{"id", "title"}],
      "predicates":    [{"id", "label"}]
    }

Ingestion cross-links everything and rejects duplicate ids and dangling
references. A loaded corpus is immutable and safe for concurrent reads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError, DanglingReferenceError, DuplicateIdError

DEFAULT_MIN_CONTRIBUTIONS = 10


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    research_field: str
    abstract: str = ""
    doi: str | None = None
    contribution_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ContributionRecord:
    contribution_id: str
    paper_id: str
    comparison_id: str
    cps: frozenset[str]


@dataclass(frozen=True)
class ComparisonRecord:
    comparison_id: str
    title: str
    contribution_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class PredicateGroup:
    """A set of predicates aggregated from the contributions of one group,
    with per-predicate support counts (how many member contributions use
    each predicate)."""

    comparison_id: str
    predicates: frozenset[str]
    support: dict[str, int] = field(hash=False, default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.predicates)


@dataclass(frozen=True)
class CorpusStats:
    n_papers: int
    n_contributions: int
    n_unique_predicates: int
    n_research_fields: int
    n_comparisons: int
    # per-comparison (min, max, mean) aggregates
    papers_per_comparison: tuple[int, int, float]
    contributions_per_comparison: tuple[int, int, float]
    predicates_per_comparison: tuple[int, int, float]
    fields_per_comparison: tuple[int, int, float]

    def as_dict(self) -> dict:
        return {
            "n_papers": self.n_papers,
            "n_contributions": self.n_contributions,
            "n_unique_predicates": self.n_unique_predicates,
            "n_research_fields": self.n_research_fields,
            "n_comparisons": self.n_comparisons,
            "papers_per_comparison": list(self.papers_per_comparison),
            "contributions_per_comparison": list(self.contributions_per_comparison),
            "predicates_per_comparison": list(self.predicates_per_comparison),
            "fields_per_comparison": list(self.fields_per_comparison),
        }


class Corpus:
    """Cross-linked, validated view of one dataset file.

    Treat instances as read-only after construction.
    """

    def __init__(self, papers, contributions, comparisons, predicate_labels):
        self.papers: dict[str, PaperRecord] = papers
        self.contributions: dict[str, ContributionRecord] = contributions
        self.comparisons: dict[str, ComparisonRecord] = comparisons
        self.predicate_labels: dict[str, str] = predicate_labels

    # -- accessors ---------------------------------------------------------

    def contribution_text(self, contribution_id: str) -> str:
        """Title + abstract of the contribution's paper (single query text)."""
        from .vectorize import concat_title_abstract

        paper = self.papers[self.contributions[contribution_id].paper_id]
        return concat_title_abstract(paper.title, paper.abstract)

    def comparison_predicates(self, comparison_id: str) -> frozenset[str]:
        """Union of the predicate sets of every contribution in the comparison.

        Always recomputed from members so it can never go stale.
        """
        comp = self.comparisons[comparison_id]
        out: set[str] = set()
        for cid in comp.contribution_ids:
            out |= self.contributions[cid].cps
        return frozenset(out)

    def predicate_label(self, predicate_id: str) -> str:
        return self.predicate_labels.get(predicate_id, predicate_id)

    @property
    def stats(self) -> CorpusStats:
        return compute_stats(self)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        papers = []
        for p in sorted(self.papers.values(), key=lambda r: r.paper_id):
            rec = {
                "id": p.paper_id,
                "title": p.title,
                "research_field": p.research_field,
                "contributions": list(p.contribution_ids),
            }
            if p.doi is not None:
                rec["doi"] = p.doi
            if p.abstract:
                rec["abstract"] = p.abstract
            papers.append(rec)
        contributions = [
            {
                "id": c.contribution_id,
                "paper_id": c.paper_id,
                "comparison_id": c.comparison_id,
                "predicates": sorted(c.cps),
            }
            for c in sorted(self.contributions.values(), key=lambda r: r.contribution_id)
        ]
        comparisons = [
            {"id": c.comparison_id, "title": c.title}
            for c in sorted(self.comparisons.values(), key=lambda r: r.comparison_id)
        ]
        predicates = [
            {"id": pid, "label": label}
            for pid, label in sorted(self.predicate_labels.items())
        ]
        return {
            "papers": papers,
            "contributions": contributions,
            "comparisons": comparisons,
            "predicates": predicates,
        }

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), ensure_ascii=False, indent=1),
            encoding="utf-8",
        )


# -- ingestion ---------------------------------------------------------------


def _require(obj, key, ctx, kind=str, optional=False, default=None):
    if key not in obj:
        if optional:
            return default
        raise CorpusFormatError(f"missing required field '{key}'", context=ctx)
    value = obj[key]
    if kind is str and not isinstance(value, str):
        raise CorpusFormatError(f"field '{key}' must be a string", context=ctx)
    if kind is list and not isinstance(value, list):
        raise CorpusFormatError(f"field '{key}' must be an array", context=ctx)
    return value


def ingest(source) -> Corpus:
    """Load and validate a dataset from a file path, JSON string, or dict.

    Raises :class:`CorpusFormatError` (with line/field context where
    available), :class:`DuplicateIdError`, or :class:`DanglingReferenceError`.
    """
    if isinstance(source, dict):
        raw = source
    else:
        if isinstance(source, (str, Path)) and Path(str(source)).exists():
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = str(source)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"invalid JSON: {exc.msg}", context=f"line {exc.lineno}, column {exc.colno}"
            ) from exc

    if not isinstance(raw, dict):
        raise CorpusFormatError("top level must be a JSON object")
    for key in ("papers", "contributions", "comparisons", "predicates"):
        if key not in raw or not isinstance(raw[key], list):
            raise CorpusFormatError(f"top-level array '{key}' is required")

    predicate_labels: dict[str, str] = {}
    for i, rec in enumerate(raw["predicates"]):
        ctx = f"predicates[{i}]"
        pid = _require(rec, "id", ctx)
        if pid in predicate_labels:
            raise DuplicateIdError(f"duplicate predicate id '{pid}'")
        predicate_labels[pid] = _require(rec, "label", ctx, optional=True, default=pid)

    comparisons_raw: dict[str, str] = {}
    for i, rec in enumerate(raw["comparisons"]):
        ctx = f"comparisons[{i}]"
        cid = _require(rec, "id", ctx)
        if cid in comparisons_raw:
            raise DuplicateIdError(f"duplicate comparison id '{cid}'")
        comparisons_raw[cid] = _require(rec, "title", ctx, optional=True, default="")

    papers: dict[str, PaperRecord] = {}
    declared_links: dict[str, list[str]] = {}
    for i, rec in enumerate(raw["papers"]):
        ctx = f"papers[{i}]"
        pid = _require(rec, "id", ctx)
        if pid in papers:
            raise DuplicateIdError(f"duplicate paper id '{pid}'")
        title = _require(rec, "title", ctx)
        if not title.strip():
            raise CorpusFormatError("paper title must be non-empty", context=ctx)
        papers[pid] = PaperRecord(
            paper_id=pid,
            title=title,
            research_field=_require(rec, "research_field", ctx),
            abstract=_require(rec, "abstract", ctx, optional=True, default="") or "",
            doi=_require(rec, "doi", ctx, optional=True),
        )
        declared_links[pid] = _require(rec, "contributions", ctx, kind=list, optional=True, default=[])

    contributions: dict[str, ContributionRecord] = {}
    for i, rec in enumerate(raw["contributions"]):
        ctx = f"contributions[{i}]"
        cid = _require(rec, "id", ctx)
        if cid in contributions:
            raise DuplicateIdError(f"duplicate contribution id '{cid}'")
        paper_id = _require(rec, "paper_id", ctx)
        if paper_id not in papers:
            raise DanglingReferenceError(
                f"contribution '{cid}' references unknown paper_id '{paper_id}'"
            )
        comparison_id = _require(rec, "comparison_id", ctx)
        if comparison_id not in comparisons_raw:
            raise DanglingReferenceError(
                f"contribution '{cid}' references unknown comparison_id '{comparison_id}'"
            )
        preds = _require(rec, "predicates", ctx, kind=list)
        if not preds:
            raise CorpusFormatError(
                f"contribution '{cid}' has an empty predicate set", context=ctx
            )
        for p in preds:
            if p not in predicate_labels:
                raise DanglingReferenceError(
                    f"contribution '{cid}' references unknown predicate '{p}'"
                )
        contributions[cid] = ContributionRecord(
            contribution_id=cid,
            paper_id=paper_id,
            comparison_id=comparison_id,
            cps=frozenset(preds),
        )

    # cross-link (declared paper->contribution links are validated, then the
    # authoritative links are rebuilt from the contribution records)
    for pid, links in declared_links.items():
        for cid in links:
            if cid not in contributions:
                raise DanglingReferenceError(
                    f"paper '{pid}' lists unknown contribution '{cid}'"
                )
            if contributions[cid].paper_id != pid:
                raise CorpusFormatError(
                    f"paper '{pid}' lists contribution '{cid}' which belongs to "
                    f"paper '{contributions[cid].paper_id}'"
                )

    by_paper: dict[str, list[str]] = {pid: [] for pid in papers}
    by_comparison: dict[str, list[str]] = {cid: [] for cid in comparisons_raw}
    for c in sorted(contributions.values(), key=lambda r: r.contribution_id):
        by_paper[c.paper_id].append(c.contribution_id)
        by_comparison[c.comparison_id].append(c.contribution_id)

    papers = {
        pid: PaperRecord(
            paper_id=p.paper_id,
            title=p.title,
            research_field=p.research_field,
            abstract=p.abstract,
            doi=p.doi,
            contribution_ids=tuple(by_paper[pid]),
        )
        for pid, p in papers.items()
    }
    comparisons = {
        cid: ComparisonRecord(
            comparison_id=cid,
            title=title,
            contribution_ids=tuple(by_comparison[cid]),
        )
        for cid, title in comparisons_raw.items()
    }
    return Corpus(papers, contributions, comparisons, predicate_labels)


def compute_stats(corpus: Corpus) -> CorpusStats:
    def agg(values):
        if not values:
            return (0, 0, 0.0)
        return (min(values), max(values), sum(values) / len(values))

    papers_per, contribs_per, preds_per, fields_per = [], [], [], []
    for comp in corpus.comparisons.values():
        members = [corpus.contributions[cid] for cid in comp.contribution_ids]
        if not members:
            continue
        contribs_per.append(len(members))
        papers_per.append(len({m.paper_id for m in members}))
        preds = set()
        for m in members:
            preds |= m.cps
        preds_per.append(len(preds))
        fields_per.append(
            len({corpus.papers[m.paper_id].research_field for m in members})
        )

    return CorpusStats(
        n_papers=len(corpus.papers),
        n_contributions=len(corpus.contributions),
        n_unique_predicates=len(corpus.predicate_labels),
        n_research_fields=len({p.research_field for p in corpus.papers.values()}),
        n_comparisons=len(corpus.comparisons),
        papers_per_comparison=agg(papers_per),
        contributions_per_comparison=agg(contribs_per),
        predicates_per_comparison=agg(preds_per),
        fields_per_comparison=agg(fields_per),
    )


# -- predicate-group derivation ----------------------------------------------


def derive_predicate_groups(
    corpus: Corpus, min_contributions: int = DEFAULT_MIN_CONTRIBUTIONS
) -> list[PredicateGroup]:
    """Derive one predicate group per comparison that has at least
    ``min_contributions`` member contributions.

    The group is the union of the members' predicate sets; support counts how
    many members use each predicate. An empty result is valid.
    """
    groups: list[PredicateGroup] = []
    for cid in sorted(corpus.comparisons):
        comp = corpus.comparisons[cid]
        if len(comp.contribution_ids) < min_contributions:
            continue
        support: dict[str, int] = {}
        for member in comp.contribution_ids:
            for p in corpus.contributions[member].cps:
                support[p] = support.get(p, 0) + 1
        groups.append(
            PredicateGroup(
                comparison_id=cid,
                predicates=frozenset(support),
                support=support,
            )
        )
    return groups


# -- train/test splitting ------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic per-comparison train/test assignment of contributions."""

    train_ratio: float
    seed: int
    assignment: dict[str, str]  # contribution_id -> "train" | "test"

    @property
    def train_ids(self) -> list[str]:
        return sorted(k for k, v in self.assignment.items() if v == "train")

    @property
    def test_ids(self) -> list[str]:
        return sorted(k for k, v in self.assignment.items() if v == "test")

    @property
    def n_train(self) -> int:
        return sum(1 for v in self.assignment.values() if v == "train")

    @property
    def n_test(self) -> int:
        return sum(1 for v in self.assignment.values() if v == "test")

    def comparisons_in(self, corpus: Corpus, which: str) -> set[str]:
        return {
            corpus.contributions[cid].comparison_id
            for cid, v in self.assignment.items()
            if v == which
        }

    def as_dict(self) -> dict:
        return {
            "train_ratio": self.train_ratio,
            "seed": self.seed,
            "assignment": dict(sorted(self.assignment.items())),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SplitSpec":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            train_ratio=raw["train_ratio"],
            seed=raw["seed"],
            assignment=raw["assignment"],
        )


def split(corpus: Corpus, ratio: float = 0.7, seed: int = 0) -> SplitSpec:
    """Split contributions into train/test per comparison.

    Each comparison sends ``floor(ratio * n)`` of its contributions to train
    (at least 1 whenever it has >= 2), the rest to test. Contributions of the
    same paper are independently assignable. Deterministic for a given seed.
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")

    rng = np.random.default_rng(seed)
    assignment: dict[str, str] = {}
    for comparison_id in sorted(corpus.comparisons):
        members = sorted(corpus.comparisons[comparison_id].contribution_ids)
        if not members:
            continue
        n = len(members)
        n_train = math.floor(ratio * n)
        if n >= 2 and n_train == 0:
            n_train = 1
        order = rng.permutation(n)
        for rank, idx in enumerate(order):
            assignment[members[idx]] = "train" if rank < n_train else "test"
    return SplitSpec(train_ratio=ratio, seed=seed, assignment=assignment)


# -- trendline exports ---------------------------------------------------------


def trendlines(corpus: Corpus) -> dict[str, list[tuple[str, int]]]:
    """Distribution tables for plotting: contributions per comparison and
    contributions per predicate, each sorted by count descending."""
    per_comparison = sorted(
        (
            (cid, len(comp.contribution_ids))
            for cid, comp in corpus.comparisons.items()
        ),
        key=lambda t: (-t[1], t[0]),
    )
    pred_counts: dict[str, int] = {}
    for c in corpus.contributions.values():
        for p in c.cps:
            pred_counts[p] = pred_counts.get(p, 0) + 1
    per_predicate = sorted(pred_counts.items(), key=lambda t: (-t[1], t[0]))
    return {
        "contributions_per_comparison": per_comparison,
        "contributions_per_predicate": per_predicate,
    }
