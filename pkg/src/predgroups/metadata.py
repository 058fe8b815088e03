"""Cache-first client for fetching paper abstracts from a metadata HTTP API.

The provider is endpoint-agnostic: the DOI endpoint, title-search endpoint,
and the dot-paths into the JSON responses are configurable, with defaults
shaped like the Crossref works API. Every answer (including not-found) is
cached to a JSONL file, one object per line:

    {"query": "...", "abstract": "..." | null, "fetched_at": "..."}

Offline mode serves only the cache. Network failures raise
:class:`ProviderError` and are never cached, so a transient outage cannot
poison the cache with a false not-found.
"""

from __future__ import annotations

import json
import re
import threading
import time
from datetime import datetime, timezone
from pathlib import Path

import requests

from .errors import ProviderError

DEFAULT_DOI_ENDPOINT = "https://api.crossref.org/works/{doi}"
DEFAULT_DOI_ABSTRACT_PATH = "message.abstract"
DEFAULT_SEARCH_ENDPOINT = "https://api.crossref.org/works?query.title={title}&rows=1"
DEFAULT_SEARCH_ABSTRACT_PATH = "message.items.0.abstract"
DEFAULT_USER_AGENT = "predgroups/0.1 (mailto:maintainers@example.org)"

_DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")
_TAG_RE = re.compile(r"<[^>]+>")


def looks_like_doi(query: str) -> bool:
    return bool(_DOI_RE.match(query.strip()))


def _walk_path(obj, dotted_path: str):
    """Follow a dot-path through nested dicts/lists; None when absent."""
    node = obj
    for part in dotted_path.split("."):
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                return None
        elif isinstance(node, dict):
            if part not in node:
                return None
            node = node[part]
        else:
            return None
    return node


def clean_abstract(text: str) -> str:
    """Strip XML/JATS markup and collapse whitespace."""
    return re.sub(r"\s+", " ", _TAG_RE.sub(" ", text)).strip()


class AbstractCache:
    """Append-only JSONL cache keyed by query string. Writes are serialized."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str | None] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                self._entries[rec["query"]] = rec.get("abstract")

    def __contains__(self, query: str) -> bool:
        return query in self._entries

    def get(self, query: str) -> str | None:
        return self._entries[query]

    def put(self, query: str, abstract: str | None) -> None:
        record = {
            "query": query,
            "abstract": abstract,
            "fetched_at": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            self._entries[query] = abstract
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def fetch_abstract(doi_or_title: str, provider: "AbstractProvider") -> str | None:
    """Abstract text for a DOI or title query, or ``None`` when the provider
    has no abstract for it. Cache-first; see :class:`AbstractProvider`."""
    return provider.fetch(doi_or_title)


class AbstractProvider:
    """Fetch an abstract for a DOI or title, cache-first.

    Returns the abstract text, or ``None`` for an explicit not-found. A
    polite rate limit (default 1 request/second) is enforced between live
    requests. Pass ``session`` to inject a transport (used by tests to replay
    recorded responses).
    """

    def __init__(
        self,
        cache_path,
        *,
        doi_endpoint: str = DEFAULT_DOI_ENDPOINT,
        doi_abstract_path: str = DEFAULT_DOI_ABSTRACT_PATH,
        search_endpoint: str = DEFAULT_SEARCH_ENDPOINT,
        search_abstract_path: str = DEFAULT_SEARCH_ABSTRACT_PATH,
        rate_limit_per_sec: float = 1.0,
        user_agent: str = DEFAULT_USER_AGENT,
        offline: bool = False,
        timeout: float = 30.0,
        session=None,
    ):
        self.cache = AbstractCache(cache_path)
        self.doi_endpoint = doi_endpoint
        self.doi_abstract_path = doi_abstract_path
        self.search_endpoint = search_endpoint
        self.search_abstract_path = search_abstract_path
        self.min_interval = 1.0 / rate_limit_per_sec if rate_limit_per_sec > 0 else 0.0
        self.user_agent = user_agent
        self.offline = offline
        self.timeout = timeout
        self._session = session
        self._last_request = 0.0
        self._request_lock = threading.Lock()

    def fetch(self, query: str) -> str | None:
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        query = query.strip()

        if query in self.cache:
            return self.cache.get(query)
        if self.offline:
            return None

        abstract = self._fetch_live(query)
        self.cache.put(query, abstract)
        return abstract

    # -- internals ---------------------------------------------------------

    def _fetch_live(self, query: str) -> str | None:
        if looks_like_doi(query):
            url = self.doi_endpoint.format(doi=query)
            path = self.doi_abstract_path
        else:
            url = self.search_endpoint.format(title=requests.utils.quote(query))
            path = self.search_abstract_path

        payload = self._get_json(url)
        value = _walk_path(payload, path)
        if not isinstance(value, str) or not value.strip():
            return None
        return clean_abstract(value)

    def _get_json(self, url: str):
        session = self._session or requests
        with self._request_lock:
            wait = self.min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
        try:
            response = session.get(
                url, headers={"User-Agent": self.user_agent}, timeout=self.timeout
            )
        except Exception as exc:
            raise ProviderError(f"metadata request failed: {exc}") from exc
        status = getattr(response, "status_code", 200)
        if status == 404:
            return {}
        if status >= 400:
            raise ProviderError(f"metadata provider returned HTTP {status} for {url}")
        try:
            return response.json()
        except Exception as exc:
            raise ProviderError(f"malformed provider response from {url}: {exc}") from exc
