"""Evaluation harness: set-overlap precision/recall/F1 with macro and micro
averaging, the k sweep, the comparison-regeneration measure, and the two
reference baselines (one predicate group per research field; topic-model
groups).

Protocol: one clustering is fitted over the entire dataset (train + test).
Each test instance is scored by comparing the predicates contributed by the
training documents in its cluster against its gold set. Macro scores are
unweighted means of per-instance precision and recall (macro-F1 is the
harmonic mean of those two means; the mean of per-instance F1 values is also
reported). Micro scores pool true/false positive/negative counts across
instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cluster import (
    ClusterAssignment,
    ClusteringConfig,
    EvalAssignment,
    WardAgglomerative,
    fit_clustering,
)
from .corpus import Corpus, SplitSpec
from .errors import DataError
from .lda import GibbsLda
from .validation import stack_rows
from .vectorize import tokenize

GOLD_DEFINITIONS = ("comparison_cpg", "contribution_cps")
PREDICTED_DEFINITIONS = ("cluster_comparison_predicates", "cluster_cps_union")


@dataclass(frozen=True)
class EvalConfig:
    gold_definition: str = "comparison_cpg"
    predicted_definition: str = "cluster_comparison_predicates"
    averaging_unit: str = "instance"  # or "comparison"
    k_min: int = 200
    k_max: int = 2050
    k_step: int = 50

    def __post_init__(self):
        if self.gold_definition not in GOLD_DEFINITIONS:
            raise ValueError(f"unknown gold definition '{self.gold_definition}'")
        if self.predicted_definition not in PREDICTED_DEFINITIONS:
            raise ValueError(
                f"unknown predicted definition '{self.predicted_definition}'"
            )
        if self.averaging_unit not in ("instance", "comparison"):
            raise ValueError(f"unknown averaging unit '{self.averaging_unit}'")
        if self.k_step <= 0:
            raise ValueError("k_step must be positive")
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")

    def k_values(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1, self.k_step))


@dataclass(frozen=True)
class InstanceScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0


def score_instance(predicted: set, gold: set) -> InstanceScore:
    """Set-overlap counts and scores for one recommendation against its gold
    set. An empty prediction scores zero precision; an empty gold set is an
    error."""
    if not gold:
        raise DataError("gold predicate set must be non-empty")
    predicted = set(predicted)
    gold = set(gold)
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    precision = tp / (tp + fp) if predicted else 0.0
    recall = tp / (tp + fn)
    return InstanceScore(tp, fp, fn, precision, recall, _f1(precision, recall))


@dataclass
class InstanceDetail:
    instance_id: str
    comparison_id: str
    cluster_id: int | None
    score: InstanceScore


@dataclass
class ScoreRow:
    """One evaluation result (one model / one k)."""

    name: str
    k: int | None
    n_instances: int
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_mean: float  # mean of per-instance F1 values (secondary reading)
    micro_precision: float
    micro_recall: float
    micro_f1: float
    error: str | None = None
    details: list[InstanceDetail] = field(default_factory=list, repr=False)

    def as_dict(self, with_details: bool = False) -> dict:
        out = {
            "name": self.name,
            "k": self.k,
            "n_instances": self.n_instances,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_f1_mean": self.macro_f1_mean,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "error": self.error,
        }
        if with_details:
            out["details"] = [
                {
                    "instance_id": d.instance_id,
                    "comparison_id": d.comparison_id,
                    "cluster_id": d.cluster_id,
                    "tp": d.score.tp,
                    "fp": d.score.fp,
                    "fn": d.score.fn,
                    "precision": d.score.precision,
                    "recall": d.score.recall,
                    "f1": d.score.f1,
                }
                for d in self.details
            ]
        return out


_CSV_COLUMNS = (
    "name,k,n_instances,macro_precision,macro_recall,macro_f1,"
    "macro_f1_mean,micro_precision,micro_recall,micro_f1,error"
)


def _row_csv(row: ScoreRow) -> str:
    def fmt(x):
        return f"{x:.3f}"  # tables are conventionally reported to 3 decimals

    return ",".join(
        [
            row.name,
            "" if row.k is None else str(row.k),
            str(row.n_instances),
            fmt(row.macro_precision),
            fmt(row.macro_recall),
            fmt(row.macro_f1),
            fmt(row.macro_f1_mean),
            fmt(row.micro_precision),
            fmt(row.micro_recall),
            fmt(row.micro_f1),
            row.error or "",
        ]
    )


@dataclass
class ScoreReport:
    rows: list[ScoreRow]

    def save_csv(self, path) -> None:
        lines = [_CSV_COLUMNS] + [_row_csv(r) for r in self.rows]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def save_json(self, path, with_details: bool = False) -> None:
        Path(path).write_text(
            json.dumps([r.as_dict(with_details) for r in self.rows], indent=1),
            encoding="utf-8",
        )


def _aggregate(name, k, scored: list[InstanceDetail], averaging_unit: str) -> ScoreRow:
    if not scored:
        raise DataError("no test instances to score")
    if averaging_unit == "instance":
        units = [[d] for d in scored]
    else:
        by_comp: dict[str, list[InstanceDetail]] = {}
        for d in scored:
            by_comp.setdefault(d.comparison_id, []).append(d)
        units = [by_comp[c] for c in sorted(by_comp)]

    def unit_mean(getter):
        return [sum(getter(d) for d in unit) / len(unit) for unit in units]

    unit_p = unit_mean(lambda d: d.score.precision)
    unit_r = unit_mean(lambda d: d.score.recall)
    unit_f = unit_mean(lambda d: d.score.f1)
    macro_p = sum(unit_p) / len(units)
    macro_r = sum(unit_r) / len(units)

    tp = sum(d.score.tp for d in scored)
    fp = sum(d.score.fp for d in scored)
    fn = sum(d.score.fn for d in scored)
    micro_p = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    micro_r = tp / (tp + fn) if (tp + fn) > 0 else 0.0

    return ScoreRow(
        name=name,
        k=k,
        n_instances=len(scored),
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=_f1(macro_p, macro_r),
        macro_f1_mean=sum(unit_f) / len(units),
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=_f1(micro_p, micro_r),
        details=scored,
    )


def gold_set(corpus: Corpus, contribution_id: str, config: EvalConfig) -> frozenset[str]:
    contribution = corpus.contributions[contribution_id]
    if config.gold_definition == "comparison_cpg":
        return corpus.comparison_predicates(contribution.comparison_id)
    return contribution.cps


def predicted_set(
    corpus: Corpus, training_members: list[str], config: EvalConfig
) -> set[str]:
    predicted: set[str] = set()
    if config.predicted_definition == "cluster_comparison_predicates":
        for comparison_id in {
            corpus.contributions[m].comparison_id for m in training_members
        }:
            predicted |= corpus.comparison_predicates(comparison_id)
    else:
        for m in training_members:
            predicted |= corpus.contributions[m].cps
    return predicted


def evaluate_model(
    assignment: EvalAssignment,
    corpus: Corpus,
    config: EvalConfig,
    *,
    name: str = "model",
    k: int | None = None,
) -> ScoreRow:
    """Score every test instance of the assignment against its gold set."""
    scored: list[InstanceDetail] = []
    for cid in sorted(assignment.test_ids):
        if cid not in assignment.clusters.assignment:
            raise DataError(f"test instance '{cid}' missing from the assignment")
        members = assignment.training_members(cid)
        predicted = predicted_set(corpus, members, config)
        gold = gold_set(corpus, cid, config)
        scored.append(
            InstanceDetail(
                instance_id=cid,
                comparison_id=corpus.contributions[cid].comparison_id,
                cluster_id=assignment.clusters.cluster_of(cid),
                score=score_instance(predicted, gold),
            )
        )
    return _aggregate(name, k, scored, config.averaging_unit)


# -- k sweep --------------------------------------------------------------------


class SweepInterrupted(Exception):
    """Raised by an ``on_row`` callback to stop a sweep early (it can be
    resumed from its checkpoint)."""


def _row_from_checkpoint(raw: dict) -> ScoreRow:
    return ScoreRow(
        name=raw["name"],
        k=raw["k"],
        n_instances=raw["n_instances"],
        macro_precision=raw["macro_precision"],
        macro_recall=raw["macro_recall"],
        macro_f1=raw["macro_f1"],
        macro_f1_mean=raw["macro_f1_mean"],
        micro_precision=raw["micro_precision"],
        micro_recall=raw["micro_recall"],
        micro_f1=raw["micro_f1"],
        error=raw.get("error"),
    )


def sweep(
    corpus: Corpus,
    split: SplitSpec,
    train_vectors,
    test_vectors,
    *,
    algorithm: str,
    config: EvalConfig,
    seed: int = 0,
    n_init: int = 10,
    name: str | None = None,
    checkpoint_path=None,
    on_row=None,
) -> ScoreReport:
    """Evaluate one model per k in the configured range.

    Rows are appended to the JSONL checkpoint as they finish, so an
    interrupted sweep resumes where it stopped and produces identical output.
    Per-k fit errors are recorded in their row without aborting the sweep.
    The agglomerative dendrogram is fitted once; every k is a cut.
    """
    name = name or algorithm
    train_ids = split.train_ids
    test_ids = split.test_ids
    n_docs = len(train_ids) + len(test_ids)

    done: dict[int, ScoreRow] = {}
    meta = {"name": name, "algorithm": algorithm, "seed": seed, "n_docs": n_docs}
    if checkpoint_path is not None:
        checkpoint_path = Path(checkpoint_path)
        if checkpoint_path.exists():
            lines = checkpoint_path.read_text(encoding="utf-8").splitlines()
            if lines:
                stored_meta = json.loads(lines[0])
                if stored_meta != meta:
                    raise DataError(
                        f"checkpoint {checkpoint_path} belongs to a different sweep "
                        f"({stored_meta} != {meta})"
                    )
                for line in lines[1:]:
                    if line.strip():
                        row = _row_from_checkpoint(json.loads(line))
                        done[row.k] = row
        else:
            checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
            checkpoint_path.write_text(json.dumps(meta) + "\n", encoding="utf-8")

    dendrogram = None
    todo = [k for k in config.k_values() if k not in done]
    if todo and algorithm == "agglomerative":
        X = stack_rows([train_vectors, test_vectors])
        dendrogram = WardAgglomerative(n_clusters=2).fit(X)

    rows: dict[int, ScoreRow] = dict(done)
    try:
        for k in todo:
            try:
                if algorithm == "agglomerative":
                    labels = dendrogram.cut(k)
                    assignment = EvalAssignment.from_labels(train_ids, test_ids, labels)
                else:
                    assignment = _fit_union_assignment(
                        train_vectors, test_vectors, train_ids, test_ids,
                        ClusteringConfig(
                            algorithm=algorithm, k=k, seed=seed, n_init=n_init
                        ),
                    )
                row = evaluate_model(assignment, corpus, config, name=name, k=k)
            except (ValueError, DataError) as exc:
                row = ScoreRow(
                    name=name, k=k, n_instances=0,
                    macro_precision=0.0, macro_recall=0.0, macro_f1=0.0,
                    macro_f1_mean=0.0, micro_precision=0.0, micro_recall=0.0,
                    micro_f1=0.0, error=str(exc),
                )
            rows[k] = row
            if checkpoint_path is not None:
                with checkpoint_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(row.as_dict()) + "\n")
            if on_row is not None:
                on_row(row)
    except SweepInterrupted:
        pass

    return ScoreReport(rows=[rows[k] for k in sorted(rows)])


def _fit_union_assignment(train_vectors, test_vectors, train_ids, test_ids, config):
    X = stack_rows([train_vectors, test_vectors])
    model = fit_clustering(X, config)
    return EvalAssignment.from_labels(train_ids, test_ids, model.labels_)


# -- comparison regeneration ------------------------------------------------------


@dataclass
class RegenRow:
    comparison_id: str
    n_clusters_spanned: int
    n_pure_clusters: int
    value: float


@dataclass
class RegenReport:
    rows: list[RegenRow]
    average: float

    def save_csv(self, path) -> None:
        lines = ["comparison_id,n_clusters_spanned,n_pure_clusters,regen"]
        lines += [
            f"{r.comparison_id},{r.n_clusters_spanned},{r.n_pure_clusters},{r.value:.3f}"
            for r in self.rows
        ]
        lines.append(f"average,,,{self.average:.3f}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def regen(assignment: ClusterAssignment, corpus: Corpus) -> RegenReport:
    """Per comparison: the fraction of the clusters it spans that contain
    contributions from that comparison only."""
    comparison_of = {
        cid: corpus.contributions[cid].comparison_id
        for cid in assignment.assignment
    }
    spanned: dict[str, set[int]] = {}
    for cid, cluster in assignment.assignment.items():
        spanned.setdefault(comparison_of[cid], set()).add(cluster)

    pure_cluster: dict[int, bool] = {}
    for cluster in {c for s in spanned.values() for c in s}:
        comps = {comparison_of[d] for d in assignment.members(cluster)}
        pure_cluster[cluster] = len(comps) == 1

    rows = []
    for comparison_id in sorted(spanned):
        clusters = spanned[comparison_id]
        pure = sum(1 for c in clusters if pure_cluster[c])
        rows.append(
            RegenRow(
                comparison_id=comparison_id,
                n_clusters_spanned=len(clusters),
                n_pure_clusters=pure,
                value=pure / len(clusters),
            )
        )
    average = sum(r.value for r in rows) / len(rows) if rows else 0.0
    return RegenReport(rows=rows, average=average)


# -- baselines --------------------------------------------------------------------


def baseline_research_field(
    corpus: Corpus, split: SplitSpec, config: EvalConfig | None = None
) -> ScoreRow:
    """One predicate group per research field, built from training
    contributions; every test instance receives its field's group. A field
    unseen in training yields an empty prediction (scored zero)."""
    config = config or EvalConfig()
    field_groups: dict[str, set[str]] = {}
    for cid in split.train_ids:
        contribution = corpus.contributions[cid]
        research_field = corpus.papers[contribution.paper_id].research_field
        field_groups.setdefault(research_field, set()).update(contribution.cps)

    scored = []
    for cid in split.test_ids:
        contribution = corpus.contributions[cid]
        research_field = corpus.papers[contribution.paper_id].research_field
        predicted = field_groups.get(research_field, set())
        scored.append(
            InstanceDetail(
                instance_id=cid,
                comparison_id=contribution.comparison_id,
                cluster_id=None,
                score=score_instance(predicted, gold_set(corpus, cid, config)),
            )
        )
    return _aggregate("baseline_research_field", None, scored, config.averaging_unit)


def baseline_lda(
    corpus: Corpus,
    split: SplitSpec,
    n_topics: int = 192,
    seed: int = 0,
    config: EvalConfig | None = None,
    *,
    alpha: float | None = None,
    beta: float = 0.01,
    n_iterations: int = 1000,
    burn_in: int = 200,
) -> ScoreRow:
    """Topic-model baseline: train a collapsed-Gibbs topic model on training
    texts, form one predicate group per topic from the training documents
    assigned to it, fold test documents in with topics frozen, and score each
    test instance against its best topic's group."""
    config = config or EvalConfig()
    train_ids = split.train_ids
    test_ids = split.test_ids

    vocab: dict[str, int] = {}
    train_docs = []
    for cid in train_ids:
        tokens = tokenize(corpus.contribution_text(cid))
        doc = []
        for tok in tokens:
            if tok not in vocab:
                vocab[tok] = len(vocab)
            doc.append(vocab[tok])
        train_docs.append(doc)

    lda = GibbsLda(
        n_topics, alpha=alpha, beta=beta,
        n_iterations=n_iterations, burn_in=burn_in, seed=seed,
    ).fit(train_docs, len(vocab))

    topic_groups: dict[int, set[str]] = {}
    for cid, topic in zip(train_ids, lda.best_topics()):
        topic_groups.setdefault(int(topic), set()).update(corpus.contributions[cid].cps)

    test_docs = [
        [vocab[t] for t in tokenize(corpus.contribution_text(cid)) if t in vocab]
        for cid in test_ids
    ]
    theta = lda.fold_in(test_docs)

    scored = []
    for i, cid in enumerate(test_ids):
        topic = int(theta[i].argmax())
        predicted = topic_groups.get(topic, set())
        scored.append(
            InstanceDetail(
                instance_id=cid,
                comparison_id=corpus.contributions[cid].comparison_id,
                cluster_id=topic,
                score=score_instance(predicted, gold_set(corpus, cid, config)),
            )
        )
    return _aggregate("baseline_lda", n_topics, scored, config.averaging_unit)
