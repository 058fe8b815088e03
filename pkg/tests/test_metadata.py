import json
import threading
from pathlib import Path

import pytest

from predgroups.errors import ProviderError
from predgroups.metadata import (
    AbstractProvider,
    clean_abstract,
    fetch_abstract,
    looks_like_doi,
)

FIXTURE = json.loads(
    (Path(__file__).parent / "data" / "provider_fixture.json").read_text()
)

KNOWN_DOI = "10.1371/journal.pmed.0020124"


class _Response:
    def __init__(self, payload=None, status_code=200, text=None):
        self._payload = payload
        self.status_code = status_code
        self._text = text

    def json(self):
        if self._payload is None:
            raise ValueError(f"not JSON: {self._text!r}")
        return self._payload


class ReplaySession:
    """Replays the recorded provider responses; counts live requests."""

    def __init__(self):
        self.calls = []

    def get(self, url, headers=None, timeout=None):
        self.calls.append(url)
        for table in ("doi_responses", "search_responses"):
            if url in FIXTURE[table]:
                return _Response(FIXTURE[table][url])
        return _Response(status_code=404)


class ExplodingSession:
    def get(self, url, headers=None, timeout=None):
        raise AssertionError(f"unexpected network call to {url}")


def _provider(tmp_path, session, **kwargs):
    kwargs.setdefault("rate_limit_per_sec", 10000.0)
    return AbstractProvider(tmp_path / "cache.jsonl", session=session, **kwargs)


def test_doi_detection():
    assert looks_like_doi("10.1371/journal.pmed.0020124")
    assert not looks_like_doi("Some paper title")


def test_fetch_known_doi_replayed_fixture(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    abstract = provider.fetch(KNOWN_DOI)
    assert abstract
    assert abstract.startswith("There is increasing concern")
    assert "<jats:p>" not in abstract  # markup stripped


def test_fetch_by_title_uses_search_endpoint(tmp_path):
    session = ReplaySession()
    provider = _provider(tmp_path, session)
    abstract = provider.fetch("Why Most Published Research Findings Are False")
    assert abstract and "published research findings" in abstract
    assert "query.title=" in session.calls[0]


def test_cache_hit_avoids_network(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    first = provider.fetch(KNOWN_DOI)
    # same cache file, a session that fails on any request
    offline_provider = _provider(tmp_path, ExplodingSession())
    assert offline_provider.fetch(KNOWN_DOI) == first


def test_not_found_is_none_and_cached(tmp_path):
    session = ReplaySession()
    provider = _provider(tmp_path, session)
    assert provider.fetch("10.5555/completely.unknown") is None
    assert provider.fetch("10.5555/completely.unknown") is None
    assert len(session.calls) == 1  # second answer came from the cache


def test_record_without_abstract_is_not_found(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    assert provider.fetch("10.9999/no.abstract") is None


def test_offline_unknown_is_not_found(tmp_path):
    provider = _provider(tmp_path, ExplodingSession(), offline=True)
    assert provider.fetch("10.5555/never.seen") is None


def test_network_failure_raises_and_is_not_cached(tmp_path):
    class FailingSession:
        def get(self, url, headers=None, timeout=None):
            raise OSError("connection reset")

    provider = _provider(tmp_path, FailingSession())
    with pytest.raises(ProviderError):
        provider.fetch(KNOWN_DOI)
    assert KNOWN_DOI not in provider.cache


def test_http_error_raises(tmp_path):
    class ErrorSession:
        def get(self, url, headers=None, timeout=None):
            return _Response(status_code=500)

    with pytest.raises(ProviderError):
        _provider(tmp_path, ErrorSession()).fetch(KNOWN_DOI)


def test_malformed_response_raises(tmp_path):
    class GarbageSession:
        def get(self, url, headers=None, timeout=None):
            return _Response(payload=None, text="<html>not json</html>")

    with pytest.raises(ProviderError):
        _provider(tmp_path, GarbageSession()).fetch(KNOWN_DOI)


def test_empty_query_rejected(tmp_path):
    with pytest.raises(ValueError):
        _provider(tmp_path, ReplaySession()).fetch("   ")


def test_cache_file_format(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    provider.fetch(KNOWN_DOI)
    provider.fetch("10.5555/completely.unknown")
    lines = (tmp_path / "cache.jsonl").read_text().splitlines()
    records = [json.loads(line) for line in lines]
    assert {r["query"] for r in records} == {KNOWN_DOI, "10.5555/completely.unknown"}
    for r in records:
        assert set(r) == {"query", "abstract", "fetched_at"}
    assert any(r["abstract"] is None for r in records)


def test_concurrent_cache_writes(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    queries = [f"10.7777/item.{i}" for i in range(20)]
    threads = [
        threading.Thread(target=provider.fetch, args=(q,)) for q in queries
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    lines = (tmp_path / "cache.jsonl").read_text().splitlines()
    assert len(lines) == 20
    assert all(json.loads(line)["abstract"] is None for line in lines)


def test_clean_abstract():
    assert clean_abstract("<jats:p>Hi  there</jats:p>\n<b>x</b>") == "Hi there x"


def test_fetch_abstract_operation(tmp_path):
    provider = _provider(tmp_path, ReplaySession())
    assert fetch_abstract(KNOWN_DOI, provider) == provider.fetch(KNOWN_DOI)
