"""Command-line surface. Exit codes: 0 success, 1 usage error, 2 data error,
3 model/fingerprint error. With ``--json``, errors are printed as one-line
JSON objects on stderr."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .cluster import (
    ClusterAssignment,
    ClusteringConfig,
    fit_clustering,
    load_model,
    save_model,
)
from .config import AppConfig, load_config
from .corpus import SplitSpec, derive_predicate_groups, ingest, split as split_corpus, trendlines
from .errors import DataError, ModelError, PredgroupsError
from .evaluate import (
    EvalConfig,
    baseline_lda,
    baseline_research_field,
    evaluate_model,
    regen as regen_measure,
    sweep as run_sweep,
)
from .metadata import AbstractProvider
from .recommend import Recommender, RecommendationQuery
from .vectorize import TfidfTextVectorizer, load_embeddings


def _echo_json(payload):
    click.echo(json.dumps(payload, indent=1, ensure_ascii=False))


def _corpus_vectors(corpus, config: AppConfig):
    """Document vectors for every contribution (sorted by id), plus the
    fingerprint of the vector space and the fitted vectorizer (TF-IDF only).

    Embedding files may be keyed by contribution id or by paper id.
    """
    doc_ids = sorted(corpus.contributions)
    if config.vectorizer == "tfidf":
        texts = [corpus.contribution_text(cid) for cid in doc_ids]
        vectorizer = TfidfTextVectorizer().fit(texts)
        return doc_ids, vectorizer.transform(texts), vectorizer.fingerprint, vectorizer
    if not config.embedding_file:
        raise DataError("embedding vectorizer selected but no embedding file given")
    matrix = load_embeddings(config.embedding_file)
    known = set(matrix.ids)
    keys = []
    missing = []
    for cid in doc_ids:
        paper_id = corpus.contributions[cid].paper_id
        if cid in known:
            keys.append(cid)
        elif paper_id in known:
            keys.append(paper_id)
        else:
            missing.append(cid)
    if missing:
        raise DataError(
            f"{len(missing)} contributions have no embedding row "
            f"(first few: {missing[:5]})"
        )
    return doc_ids, matrix.submatrix(keys).astype(float), matrix.fingerprint, None


def _load_split(corpus, split_path, ratio, seed) -> SplitSpec:
    if split_path:
        return SplitSpec.load(split_path)
    return split_corpus(corpus, ratio=ratio, seed=seed)


def _split_vectors(doc_ids, X, spec: SplitSpec):
    index = {d: i for i, d in enumerate(doc_ids)}
    train_ids = spec.train_ids
    test_ids = spec.test_ids
    for cid in train_ids + test_ids:
        if cid not in index:
            raise DataError(f"split references unknown contribution '{cid}'")
    return train_ids, test_ids, X[[index[d] for d in train_ids]], X[[index[d] for d in test_ids]]


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; flags and PREDGROUPS_* env vars override it.")
@click.option("--json", "json_errors", is_flag=True, default=False,
              help="Print errors as one-line JSON on stderr.")
@click.pass_context
def cli(ctx, config_path, json_errors):
    """Cluster scholarly papers and recommend predicate groups."""
    ctx.obj = {"config_path": config_path, "json_errors": json_errors}


def _app_config(ctx, **overrides) -> AppConfig:
    config = load_config(ctx.obj.get("config_path"), overrides)
    config.validate()
    return config


# named explicitly: the function name would collide with the imported ingest()
@cli.command("ingest")
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--out", type=click.Path(), default=None,
              help="Write the normalized corpus JSON here.")
def ingest_cmd(dataset, out):
    """Validate a dataset file and print its statistics."""
    corpus = ingest(dataset)
    if out:
        corpus.save(out)
    _echo_json(corpus.stats.as_dict())


@cli.command()
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--min-contributions", type=int, default=10, show_default=True)
@click.option("--trend-dir", type=click.Path(), default=None,
              help="Write distribution trendline CSVs into this directory.")
def stats(dataset, min_contributions, trend_dir):
    """Corpus totals, per-comparison aggregates, and derived group counts."""
    corpus = ingest(dataset)
    payload = corpus.stats.as_dict()
    payload["n_derived_groups"] = len(
        derive_predicate_groups(corpus, min_contributions)
    )
    if trend_dir:
        out = Path(trend_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, pairs in trendlines(corpus).items():
            lines = ["id,count"] + [f"{i},{c}" for i, c in pairs]
            (out / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _echo_json(payload)


@cli.command("split")
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--ratio", type=float, default=0.7, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def split_cmd(dataset, ratio, seed, out):
    """Write a deterministic per-comparison train/test split."""
    corpus = ingest(dataset)
    try:
        spec = split_corpus(corpus, ratio=ratio, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    spec.save(out)
    _echo_json(
        {
            "n_train": spec.n_train,
            "n_test": spec.n_test,
            "train_comparisons": len(spec.comparisons_in(corpus, "train")),
            "test_comparisons": len(spec.comparisons_in(corpus, "test")),
        }
    )


@cli.command()
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--algo", type=click.Choice(["kmeans", "agglomerative"]), required=True)
@click.option("--k", type=int, required=True)
@click.option("--vec", type=click.Choice(["tfidf", "embedding"]), default="tfidf",
              show_default=True)
@click.option("--embedding-file", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
@click.pass_context
def fit(ctx, dataset, algo, k, vec, embedding_file, seed, out_dir):
    """Fit a clustering model on every contribution and persist it."""
    config = _app_config(ctx, dataset=dataset, vectorizer=vec,
                         embedding_file=embedding_file)
    corpus = ingest(dataset)
    doc_ids, X, fingerprint, vectorizer = _corpus_vectors(corpus, config)
    try:
        model = fit_clustering(X, ClusteringConfig(algorithm=algo, k=k, seed=seed))
    except ValueError as exc:
        raise DataError(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / f"{algo}-k{k}.pgcm"
    save_model(model_path, model, fingerprint=fingerprint, doc_ids=doc_ids)
    if vectorizer is not None:
        vectorizer.save(out / "tfidf.json")
    ClusterAssignment.from_labels(doc_ids, model.labels_).save_csv(
        out / f"{algo}-k{k}-assignment.csv"
    )
    _echo_json(
        {
            "model": str(model_path),
            "algorithm": algo,
            "k": k,
            "n_documents": len(doc_ids),
            "fingerprint": fingerprint,
        }
    )


@cli.command()
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--algo", type=click.Choice(["kmeans", "agglomerative"]), required=True)
@click.option("--vec", type=click.Choice(["tfidf", "embedding"]), default="tfidf",
              show_default=True)
@click.option("--embedding-file", type=click.Path(), default=None)
@click.option("--split", "split_path", type=click.Path(), default=None,
              help="Existing split JSON; computed from --ratio/--seed otherwise.")
@click.option("--ratio", type=float, default=0.7, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k-min", type=int, default=200, show_default=True)
@click.option("--k-max", type=int, default=2050, show_default=True)
@click.option("--k-step", type=int, default=50, show_default=True)
@click.option("--gold", type=click.Choice(["comparison_cpg", "contribution_cps"]),
              default="comparison_cpg", show_default=True)
@click.option("--predicted",
              type=click.Choice(["cluster_comparison_predicates", "cluster_cps_union"]),
              default="cluster_comparison_predicates", show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Report CSV path.")
@click.option("--checkpoint", type=click.Path(), default=None,
              help="JSONL checkpoint for resumable sweeps (defaults to OUT.jsonl).")
@click.pass_context
def sweep(ctx, dataset, algo, vec, embedding_file, split_path, ratio, seed,
          k_min, k_max, k_step, gold, predicted, out, checkpoint):
    """Evaluate one model per k over the configured range."""
    config = _app_config(ctx, dataset=dataset, vectorizer=vec,
                         embedding_file=embedding_file)
    corpus = ingest(dataset)
    spec = _load_split(corpus, split_path, ratio, seed)
    doc_ids, X, _, _ = _corpus_vectors(corpus, config)
    _, _, X_train, X_test = _split_vectors(doc_ids, X, spec)
    eval_config = EvalConfig(
        gold_definition=gold, predicted_definition=predicted,
        k_min=k_min, k_max=k_max, k_step=k_step,
    )
    report = run_sweep(
        corpus, spec, X_train, X_test,
        algorithm=algo, config=eval_config, seed=seed,
        checkpoint_path=checkpoint or (out + ".jsonl"),
        on_row=lambda row: click.echo(
            f"k={row.k} macro_f1={row.macro_f1:.3f} micro_f1={row.micro_f1:.3f}"
            + (f" error={row.error}" if row.error else ""),
            err=True,
        ),
    )
    report.save_csv(out)
    _echo_json({"rows": len(report.rows), "report": out})


@cli.command()
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--algo",
              type=click.Choice(["kmeans", "agglomerative", "research-field", "lda"]),
              required=True)
@click.option("--k", type=int, default=None, help="Cluster count (or LDA topic count).")
@click.option("--vec", type=click.Choice(["tfidf", "embedding"]), default="tfidf",
              show_default=True)
@click.option("--embedding-file", type=click.Path(), default=None)
@click.option("--split", "split_path", type=click.Path(), default=None)
@click.option("--ratio", type=float, default=0.7, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gold", type=click.Choice(["comparison_cpg", "contribution_cps"]),
              default="comparison_cpg", show_default=True)
@click.option("--predicted",
              type=click.Choice(["cluster_comparison_predicates", "cluster_cps_union"]),
              default="cluster_comparison_predicates", show_default=True)
@click.option("--lda-iterations", type=int, default=1000, show_default=True)
@click.option("--lda-burn-in", type=int, default=200, show_default=True)
@click.option("--details-out", type=click.Path(), default=None,
              help="Write the per-instance detail table as JSON.")
@click.pass_context
def evaluate(ctx, dataset, algo, k, vec, embedding_file, split_path, ratio, seed,
             gold, predicted, lda_iterations, lda_burn_in, details_out):
    """Score one model (or baseline) under the evaluation protocol."""
    config = _app_config(ctx, dataset=dataset, vectorizer=vec,
                         embedding_file=embedding_file)
    corpus = ingest(dataset)
    spec = _load_split(corpus, split_path, ratio, seed)
    eval_config = EvalConfig(gold_definition=gold, predicted_definition=predicted)

    if algo == "research-field":
        row = baseline_research_field(corpus, spec, eval_config)
    elif algo == "lda":
        row = baseline_lda(
            corpus, spec, n_topics=k or 192, seed=seed, config=eval_config,
            n_iterations=lda_iterations, burn_in=lda_burn_in,
        )
    else:
        if k is None:
            raise click.UsageError("--k is required for clustering algorithms")
        doc_ids, X, _, _ = _corpus_vectors(corpus, config)
        train_ids, test_ids, X_train, X_test = _split_vectors(doc_ids, X, spec)
        from .cluster import assign_eval_protocol

        assignment = assign_eval_protocol(
            X_train, X_test, train_ids, test_ids,
            ClusteringConfig(algorithm=algo, k=k, seed=seed),
        )
        row = evaluate_model(assignment, corpus, eval_config, name=algo, k=k)

    if details_out:
        Path(details_out).write_text(
            json.dumps(row.as_dict(with_details=True), indent=1), encoding="utf-8"
        )
    _echo_json(row.as_dict())


@cli.command()
@click.argument("dataset", type=click.Path(exists=False))
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None, help="Report CSV path.")
def regen(dataset, model_path, out):
    """Comparison-regeneration report for a fitted model's assignment."""
    corpus = ingest(dataset)
    if not Path(model_path).exists():
        raise ModelError(
            f"model file not found: {model_path}; fit one first with "
            f"'predgroups fit'"
        )
    loaded = load_model(model_path)
    assignment = ClusterAssignment.from_labels(
        loaded.doc_ids, loaded.estimator.labels_
    )
    report = regen_measure(assignment, corpus)
    if out:
        report.save_csv(out)
    _echo_json(
        {
            "average": report.average,
            "n_comparisons": len(report.rows),
            "report": out,
        }
    )


def _build_recommender(config: AppConfig, model_path, offline):
    if not Path(model_path).exists():
        raise ModelError(
            f"no fitted model at {model_path}; run 'predgroups fit' first "
            f"(the recommend and serve commands need a persisted model)"
        )
    if config.dataset is None:
        raise DataError("a dataset is required to resolve cluster predicates")
    corpus = ingest(config.dataset)

    vec_path = Path(model_path).parent / "tfidf.json"
    if config.vectorizer != "tfidf" or not vec_path.exists():
        raise ModelError(
            "live recommendation needs the TF-IDF vector space saved next to "
            "the model (tfidf.json); embedding-backed models cannot vectorize "
            "new query texts"
        )
    vectorizer = TfidfTextVectorizer.load(vec_path)
    loaded = load_model(model_path, expected_fingerprint=vectorizer.fingerprint)

    provider_kwargs = {}
    if config.provider_endpoint:
        provider_kwargs["doi_endpoint"] = config.provider_endpoint
    if config.provider_search_endpoint:
        provider_kwargs["search_endpoint"] = config.provider_search_endpoint
    provider = AbstractProvider(
        Path(config.cache_dir) / "abstracts.jsonl",
        rate_limit_per_sec=config.provider_rate_limit,
        offline=offline,
        **provider_kwargs,
    )
    return Recommender(
        corpus,
        vectorizer,
        loaded.estimator,
        ClusterAssignment.from_labels(loaded.doc_ids, loaded.estimator.labels_),
        model_fingerprint=loaded.fingerprint,
        provider=provider,
    ), loaded


@cli.command()
@click.option("--title", default=None)
@click.option("--doi", default=None)
@click.option("--abstract", default=None)
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--dataset", type=click.Path(), default=None)
@click.option("--offline", is_flag=True, default=False,
              help="Serve abstracts from the cache only.")
@click.option("--explain", "with_explanation", is_flag=True, default=False)
@click.pass_context
def recommend(ctx, title, doi, abstract, model_path, dataset, offline,
              with_explanation):
    """Recommend a ranked predicate group for a paper."""
    if not (title or doi):
        raise click.UsageError("provide --title and/or --doi")
    config = _app_config(ctx, dataset=dataset)
    recommender, _ = _build_recommender(config, model_path, offline)
    recommendation = recommender.recommend(
        RecommendationQuery(title=title, doi=doi, abstract=abstract)
    )
    payload = recommendation.as_dict()
    if with_explanation and not recommendation.empty:
        payload["explanation"] = recommender.explain(recommendation).as_dict()
    _echo_json(payload)


@cli.command()
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--dataset", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--offline", is_flag=True, default=False)
@click.pass_context
def serve(ctx, model_path, dataset, host, port, offline):
    """Serve recommendations over HTTP."""
    import uvicorn

    from .service import ServiceState, create_app

    config = _app_config(ctx, dataset=dataset, server_host=host, server_port=port)
    recommender, loaded = _build_recommender(config, model_path, offline)
    state = ServiceState(
        recommender=recommender,
        fingerprint=loaded.fingerprint,
        algorithm=loaded.algorithm,
        k=getattr(loaded.estimator, "n_clusters", None),
    )
    uvicorn.run(
        create_app(state), host=config.server_host, port=config.server_port,
        workers=1,
    )


def main(argv=None):
    json_errors = "--json" in (argv or sys.argv[1:])

    def report(kind, message, code):
        if json_errors:
            click.echo(json.dumps({"error": kind, "message": message}), err=True)
        else:
            click.echo(f"error: {message}", err=True)
        sys.exit(code)

    try:
        cli(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        report("usage", exc.format_message(), 1)
    except click.ClickException as exc:
        report("usage", exc.format_message(), 1)
    except ModelError as exc:
        report("model", str(exc), 3)
    except DataError as exc:
        report("data", str(exc), 2)
    except PredgroupsError as exc:
        report("data", str(exc), 2)
    sys.exit(0)


if __name__ == "__main__":
    main()
