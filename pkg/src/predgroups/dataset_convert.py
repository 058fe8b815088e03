"""Converter stub from the published archive layout to the canonical corpus
JSON.

The engine only ever reads the canonical schema (see ``corpus``); this module
is the single place to adapt when the upstream archive layout differs. It was
authored offline against the dataset description, not the archive itself, so
it accepts two shapes:

  * a file already in the canonical schema (validated and passed through);
  * a flat export with one record per contribution, each carrying its paper
    and comparison inline:

        [{"contribution_id", "comparison_id", "comparison_title"?,
          "paper_id", "title", "abstract"?, "doi"?, "research_field",
          "predicates": [{"id", "label"?}] or [id, ...]}, ...]

Anything else raises a :class:`DataError` describing what to adapt here.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import Corpus, ingest
from .errors import DataError


def _from_flat_records(records: list[dict]) -> dict:
    papers: dict[str, dict] = {}
    contributions: list[dict] = []
    comparisons: dict[str, str] = {}
    predicates: dict[str, str] = {}

    for i, rec in enumerate(records):
        try:
            contribution_id = rec["contribution_id"]
            paper_id = rec["paper_id"]
            comparison_id = rec["comparison_id"]
            title = rec["title"]
            research_field = rec["research_field"]
            raw_predicates = rec["predicates"]
        except KeyError as exc:
            raise DataError(
                f"flat record {i} is missing field {exc}; adapt "
                f"dataset_convert._from_flat_records to the archive layout"
            ) from exc

        pred_ids = []
        for p in raw_predicates:
            if isinstance(p, dict):
                pid = p["id"]
                predicates.setdefault(pid, p.get("label", pid))
            else:
                pid = p
                predicates.setdefault(pid, pid)
            pred_ids.append(pid)

        comparisons.setdefault(comparison_id, rec.get("comparison_title", ""))
        paper = papers.setdefault(
            paper_id,
            {
                "id": paper_id,
                "title": title,
                "research_field": research_field,
                "contributions": [],
            },
        )
        if rec.get("abstract"):
            paper["abstract"] = rec["abstract"]
        if rec.get("doi"):
            paper["doi"] = rec["doi"]
        paper["contributions"].append(contribution_id)
        contributions.append(
            {
                "id": contribution_id,
                "paper_id": paper_id,
                "comparison_id": comparison_id,
                "predicates": pred_ids,
            }
        )

    return {
        "papers": list(papers.values()),
        "contributions": contributions,
        "comparisons": [
            {"id": cid, "title": title} for cid, title in comparisons.items()
        ],
        "predicates": [
            {"id": pid, "label": label} for pid, label in predicates.items()
        ],
    }


def convert_archive(path) -> Corpus:
    """Load a dataset archive file into a validated :class:`Corpus`."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(
            f"{path} is not JSON ({exc}); if the archive ships CSV or RDF, "
            f"add a loader in dataset_convert.convert_archive"
        ) from exc

    if isinstance(raw, dict) and {"papers", "contributions"} <= set(raw):
        return ingest(raw)
    if isinstance(raw, list):
        return ingest(_from_flat_records(raw))
    raise DataError(
        f"unrecognized archive layout in {path}: expected the canonical "
        f"object schema or a flat list of contribution records; adapt "
        f"dataset_convert.convert_archive"
    )
