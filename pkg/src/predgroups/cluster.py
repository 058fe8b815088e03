"""Clustering: K-means and Ward-linkage agglomerative, over dense or sparse
document vectors.

K-means runs Lloyd iterations from k-means++ seeding with ``n_init`` restarts,
keeping the best inertia. Distances use the expansion
``|x|^2 - 2 x.c + |c|^2`` so sparse documents are never densified; centroids
stay dense.

The agglomerative side builds a full Ward dendrogram with the
nearest-neighbor-chain scheme and Lance-Williams cost updates, so any number
of clusters is a cut of one fitted tree, never a refit. Merge costs are the
increase in total within-cluster sum of squared distances to centroids.

Fitted models persist to a little-endian binary container:

    magic 'PGCM' | u32 version=1 | u8 algorithm tag |
    u32 header length | UTF-8 JSON header (params, vectorizer fingerprint,
    document ids) | algorithm payload (centroid matrix or merge list)

Loading refuses a model whose recorded vectorizer fingerprint does not match
the expected one, which prevents scoring with a model fitted on a different
vector space.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .errors import FingerprintMismatchError, ModelError
from .validation import check_matrix, check_same_dim, row_norms_sq, stack_rows

MODEL_MAGIC = b"PGCM"
MODEL_VERSION = 1
_ALGO_TAGS = {"kmeans": 1, "agglomerative": 2}
_TAG_ALGOS = {v: k for k, v in _ALGO_TAGS.items()}


@dataclass(frozen=True)
class ClusteringConfig:
    algorithm: str  # "kmeans" | "agglomerative"
    k: int
    seed: int = 0
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-4
    n_init: int = 10

    def validate(self, n_documents: int) -> None:
        if self.algorithm not in _ALGO_TAGS:
            raise ValueError(f"unknown clustering algorithm '{self.algorithm}'")
        if not (2 <= self.k <= n_documents):
            raise ValueError(
                f"k must satisfy 2 <= k <= n_documents={n_documents}, got {self.k}"
            )


def _pairwise_sq_dists_to_centers(X, x_sq, centers):
    """(n, k) squared Euclidean distances, clipped at zero."""
    c_sq = np.einsum("ij,ij->i", centers, centers)
    cross = X @ centers.T
    if sp.issparse(cross):
        cross = cross.toarray()
    d = x_sq[:, None] - 2.0 * np.asarray(cross) + c_sq[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _group_sums(X, labels, k):
    """(k, dim) per-cluster row sums for dense or sparse X."""
    n = X.shape[0]
    if sp.issparse(X):
        indicator = sp.csr_matrix(
            (np.ones(n), (labels, np.arange(n))), shape=(k, n)
        )
        return np.asarray((indicator @ X).todense())
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    return sums


class KMeans(BaseEstimator, ClusterMixin):
    """Lloyd K-means with k-means++ seeding and restart selection.

    Fitted attributes: ``cluster_centers_`` (k, dim), ``labels_``,
    ``inertia_``, ``inertia_history_`` (per assignment step of the winning
    restart, checked non-increasing), ``n_iter_``.
    """

    def __init__(self, n_clusters=8, *, seed=0, n_init=10, max_iter=300, tol=1e-4):
        self.n_clusters = n_clusters
        self.seed = seed
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = check_matrix(X)
        n = X.shape[0]
        if not (1 <= self.n_clusters <= n):
            raise ValueError(
                f"n_clusters={self.n_clusters} must be between 1 and the number "
                f"of vectors ({n})"
            )
        x_sq = row_norms_sq(X)
        master = np.random.default_rng(self.seed)
        child_seeds = master.integers(0, 2**63 - 1, size=self.n_init)

        best = None
        for child in child_seeds:
            result = self._lloyd(X, x_sq, np.random.default_rng(int(child)))
            if best is None or result[2] < best[2]:
                best = result
        centers, labels, inertia, history, n_iter = best
        self.cluster_centers_ = centers
        self.labels_ = labels
        self.inertia_ = inertia
        self.inertia_history_ = history
        self.n_iter_ = n_iter
        return self

    def _lloyd(self, X, x_sq, rng):
        k = self.n_clusters
        centers = self._kmeans_pp(X, x_sq, rng)
        history: list[float] = []
        prev_inertia = np.inf
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            dists = _pairwise_sq_dists_to_centers(X, x_sq, centers)
            labels = np.argmin(dists, axis=1)
            point_costs = dists[np.arange(X.shape[0]), labels]
            inertia = float(point_costs.sum())
            if inertia > prev_inertia * (1.0 + 1e-9) + 1e-12:
                raise RuntimeError(
                    f"inertia increased across Lloyd iterations "
                    f"({prev_inertia} -> {inertia})"
                )
            history.append(inertia)
            prev_inertia = inertia

            counts = np.bincount(labels, minlength=k)
            sums = _group_sums(X, labels, k)
            new_centers = np.where(
                counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], centers
            )
            empty = np.flatnonzero(counts == 0)
            if empty.size:
                # relocate empty clusters to the currently worst-fit points
                farthest = np.argsort(point_costs)[::-1]
                for j, cluster in enumerate(empty):
                    src = farthest[j]
                    if sp.issparse(X):
                        new_centers[cluster] = np.asarray(X[src].todense()).ravel()
                    else:
                        new_centers[cluster] = X[src]

            shift = float(((new_centers - centers) ** 2).sum())
            centers = new_centers
            if shift <= self.tol and not empty.size:
                break

        # final assignment against the final centers, so that predicting a
        # training vector always returns its fitted cluster
        dists = _pairwise_sq_dists_to_centers(X, x_sq, centers)
        labels = np.argmin(dists, axis=1)
        inertia = float(dists[np.arange(X.shape[0]), labels].sum())
        if inertia > prev_inertia * (1.0 + 1e-9) + 1e-12:
            raise RuntimeError("inertia increased after the final centroid update")
        history.append(inertia)
        return centers, labels, inertia, history, n_iter

    def _kmeans_pp(self, X, x_sq, rng):
        n = X.shape[0]
        k = self.n_clusters
        take = (
            (lambda i: np.asarray(X[i].todense()).ravel())
            if sp.issparse(X)
            else (lambda i: np.asarray(X[i], dtype=np.float64))
        )
        dim = X.shape[1]
        centers = np.empty((k, dim))
        first = int(rng.integers(n))
        centers[0] = take(first)
        closest = _pairwise_sq_dists_to_centers(X, x_sq, centers[0:1])[:, 0]
        for j in range(1, k):
            total = closest.sum()
            if total > 0:
                idx = int(rng.choice(n, p=closest / total))
            else:
                idx = int(rng.integers(n))
            centers[j] = take(idx)
            new_d = _pairwise_sq_dists_to_centers(X, x_sq, centers[j : j + 1])[:, 0]
            np.minimum(closest, new_d, out=closest)
        return centers

    def predict(self, X):
        """Nearest-centroid assignment; ties go to the lowest cluster id."""
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("KMeans is not fitted")
        X = check_matrix(X)
        check_same_dim(X, self.cluster_centers_.shape[1])
        dists = _pairwise_sq_dists_to_centers(X, row_norms_sq(X), self.cluster_centers_)
        return np.argmin(dists, axis=1)


# -- Ward agglomerative ---------------------------------------------------------


class _LabelUnionFind:
    """Union-find that assigns dendrogram labels n, n+1, ... to merges."""

    def __init__(self, n):
        self.parent = np.arange(2 * n - 1)
        self.size = np.ones(2 * n - 1, dtype=np.int64)
        self.next_label = n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def merge_roots(self, rx, ry):
        label = self.next_label
        self.parent[rx] = label
        self.parent[ry] = label
        self.size[label] = self.size[rx] + self.size[ry]
        self.next_label += 1
        return label, int(self.size[label])


def _ward_nn_chain(X):
    """Build the Ward merge list with the nearest-neighbor-chain scheme.

    Returns an (n-1, 4) float64 array in the usual linkage convention
    (left label, right label, merge cost, merged size) sorted by cost, where
    leaves are 0..n-1 and the i-th row creates cluster label n+i. Costs are
    increases in total within-cluster sum of squares.
    """
    n = X.shape[0]
    sq = row_norms_sq(X)
    gram = X @ X.T
    if sp.issparse(gram):
        gram = gram.toarray()
    D = sq[:, None] + sq[None, :] - 2.0 * np.asarray(gram, dtype=np.float64)
    np.maximum(D, 0.0, out=D)
    D /= 2.0  # Ward cost between singletons
    np.fill_diagonal(D, np.inf)

    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    chain = np.empty(n + 1, dtype=np.int64)
    chain_len = 0
    raw = np.empty((n - 1, 3))  # (slot a, slot b, cost); slots are leaf indices

    for step in range(n - 1):
        if chain_len == 0:
            chain[0] = int(np.flatnonzero(active)[0])
            chain_len = 1
        while True:
            a = chain[chain_len - 1]
            row = D[a]
            b = int(np.argmin(row))
            # prefer the previous chain element on cost ties (termination)
            if chain_len >= 2:
                prev = chain[chain_len - 2]
                if row[b] >= row[prev]:
                    b = int(prev)
            if chain_len >= 2 and b == chain[chain_len - 2]:
                break
            chain[chain_len] = b
            chain_len += 1
        cost = float(D[a, b])
        chain_len -= 2

        raw[step] = (min(a, b), max(a, b), cost)
        # merged cluster occupies slot b; slot a retires
        sa, sb = size[a], size[b]
        total = sa + sb + size
        updated = ((sa + size) * D[a] + (sb + size) * D[b] - size * cost) / total
        D[b] = np.where(active, updated, np.inf)
        D[:, b] = D[b]
        D[b, b] = np.inf
        D[a, :] = np.inf
        D[:, a] = np.inf
        size[b] += size[a]
        active[a] = False

    order = np.argsort(raw[:, 2], kind="stable")
    raw = raw[order]

    uf = _LabelUnionFind(n)
    merges = np.empty((n - 1, 4))
    for i in range(n - 1):
        ra = uf.find(int(raw[i, 0]))
        rb = uf.find(int(raw[i, 1]))
        left, right = (ra, rb) if ra < rb else (rb, ra)
        _, merged_size = uf.merge_roots(ra, rb)
        merges[i] = (left, right, raw[i, 2], merged_size)
    return merges


def cut_linkage(merges: np.ndarray, n_leaves: int, k: int) -> np.ndarray:
    """Partition the leaves into exactly ``k`` clusters by applying the
    ``n_leaves - k`` cheapest merges. Labels are 0..k-1 in order of each
    cluster's smallest leaf index."""
    if not (1 <= k <= n_leaves):
        raise ValueError(f"cut level k={k} must be between 1 and {n_leaves}")
    parent = np.arange(n_leaves)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    # representative leaf of the cluster created by each merge row
    rep = np.empty(len(merges), dtype=np.int64)
    for i in range(n_leaves - k):
        a, b = int(merges[i, 0]), int(merges[i, 1])
        la = a if a < n_leaves else rep[a - n_leaves]
        lb = b if b < n_leaves else rep[b - n_leaves]
        ra, rb = find(la), find(lb)
        parent[ra] = rb
        rep[i] = lb
    for i in range(n_leaves - k, len(merges)):
        a = int(merges[i, 0])
        rep[i] = a if a < n_leaves else rep[a - n_leaves]

    labels = np.empty(n_leaves, dtype=np.int64)
    next_label = 0
    seen: dict[int, int] = {}
    for leaf in range(n_leaves):
        root = find(leaf)
        if root not in seen:
            seen[root] = next_label
            next_label += 1
        labels[leaf] = seen[root]
    assert next_label == k
    return labels


class WardAgglomerative(BaseEstimator, ClusterMixin):
    """Bottom-up Ward clustering retaining the full dendrogram.

    Fitted attributes: ``merges_`` ((n-1, 4) linkage rows sorted by cost),
    ``n_leaves_``, ``labels_`` (cut at ``n_clusters``), ``cut_means_``
    (cluster means of that cut, used for serving-time assignment).
    """

    def __init__(self, n_clusters=2):
        self.n_clusters = n_clusters

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=2)
        n = X.shape[0]
        if not (1 <= self.n_clusters <= n):
            raise ValueError(
                f"n_clusters={self.n_clusters} must be between 1 and the number "
                f"of vectors ({n})"
            )
        self.merges_ = _ward_nn_chain(X)
        self.n_leaves_ = n
        self.labels_ = cut_linkage(self.merges_, n, self.n_clusters)
        sums = _group_sums(X, self.labels_, self.n_clusters)
        counts = np.bincount(self.labels_, minlength=self.n_clusters)
        self.cut_means_ = sums / counts[:, None]
        return self

    def _check_fitted(self):
        if not hasattr(self, "merges_"):
            raise NotFittedError("WardAgglomerative is not fitted")

    def cut(self, k: int) -> np.ndarray:
        """Labels for any cut level of the fitted dendrogram (no refit)."""
        self._check_fitted()
        return cut_linkage(self.merges_, self.n_leaves_, k)

    def predict(self, X):
        """Assign new vectors to the nearest cluster mean of the fitted cut
        (squared Euclidean); ties go to the lowest cluster id.

        This serving-time assignment exists for the live recommendation path
        only; evaluation never uses it.
        """
        self._check_fitted()
        if not hasattr(self, "cut_means_") or self.cut_means_ is None:
            raise ModelError(
                "this dendrogram has no stored cut means; refit or load a model "
                "saved with its serving cut"
            )
        X = check_matrix(X)
        check_same_dim(X, self.cut_means_.shape[1])
        dists = _pairwise_sq_dists_to_centers(X, row_norms_sq(X), self.cut_means_)
        return np.argmin(dists, axis=1)


def fit_clustering(X, config: ClusteringConfig):
    """Fit the estimator described by ``config`` on the given vectors."""
    config.validate(X.shape[0])
    if config.algorithm == "kmeans":
        return KMeans(
            n_clusters=config.k,
            seed=config.seed,
            n_init=config.n_init,
            max_iter=config.kmeans_max_iter,
            tol=config.kmeans_tol,
        ).fit(X)
    return WardAgglomerative(n_clusters=config.k).fit(X)


# -- assignments -----------------------------------------------------------------


@dataclass
class ClusterAssignment:
    """Partition of documents into clusters: every document is in exactly
    one cluster."""

    assignment: dict[str, int]
    _members: dict[int, list[str]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._members:
            for doc_id in sorted(self.assignment):
                self._members.setdefault(self.assignment[doc_id], []).append(doc_id)

    @classmethod
    def from_labels(cls, doc_ids, labels) -> "ClusterAssignment":
        if len(doc_ids) != len(labels):
            raise ValueError("doc id and label counts differ")
        return cls({d: int(c) for d, c in zip(doc_ids, labels)})

    def cluster_of(self, doc_id: str) -> int:
        return self.assignment[doc_id]

    def members(self, cluster_id: int) -> list[str]:
        return self._members.get(cluster_id, [])

    @property
    def n_clusters(self) -> int:
        return len(self._members)

    def save_csv(self, path) -> None:
        lines = ["doc_id,cluster_id"]
        lines += [f"{d},{c}" for d, c in sorted(self.assignment.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class EvalAssignment:
    """Clustering fitted once over train + test documents, exposing the
    training members of each test document's cluster for the evaluator."""

    clusters: ClusterAssignment
    train_ids: frozenset[str]
    test_ids: frozenset[str]

    def training_members(self, doc_id: str) -> list[str]:
        cluster = self.clusters.cluster_of(doc_id)
        return [d for d in self.clusters.members(cluster) if d in self.train_ids]

    @classmethod
    def from_labels(cls, train_ids, test_ids, labels) -> "EvalAssignment":
        train_ids = list(train_ids)
        test_ids = list(test_ids)
        overlap = set(train_ids) & set(test_ids)
        if overlap:
            raise ValueError(f"train and test ids overlap: {sorted(overlap)[:5]}")
        clusters = ClusterAssignment.from_labels(train_ids + test_ids, labels)
        return cls(
            clusters=clusters,
            train_ids=frozenset(train_ids),
            test_ids=frozenset(test_ids),
        )


def assign_eval_protocol(
    train_vectors, test_vectors, train_ids, test_ids, config: ClusteringConfig
) -> EvalAssignment:
    """Fit one clustering over the union of train and test vectors and record
    every document's cluster. Test documents are never predicted into a
    train-only model; the whole dataset is clustered once."""
    X = stack_rows([train_vectors, test_vectors])
    model = fit_clustering(X, config)
    return EvalAssignment.from_labels(train_ids, test_ids, model.labels_)


# -- persistence -------------------------------------------------------------------


def save_model(path, model, *, fingerprint: str, doc_ids) -> None:
    """Serialize a fitted model with its config, vectorizer fingerprint, and
    the ids of the documents it was fitted on."""
    if isinstance(model, KMeans):
        algorithm = "kmeans"
    elif isinstance(model, WardAgglomerative):
        algorithm = "agglomerative"
    else:
        raise ModelError(f"cannot persist model of type {type(model).__name__}")

    header = {
        "algorithm": algorithm,
        "fingerprint": fingerprint,
        "params": model.get_params(),
        "doc_ids": list(doc_ids),
    }
    header_bytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")

    with Path(path).open("wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<IB", MODEL_VERSION, _ALGO_TAGS[algorithm]))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        if algorithm == "kmeans":
            k, dim = model.cluster_centers_.shape
            fh.write(struct.pack("<II", k, dim))
            fh.write(model.cluster_centers_.astype("<f8", copy=False).tobytes())
            fh.write(struct.pack("<I", len(model.labels_)))
            fh.write(model.labels_.astype("<i4", copy=False).tobytes())
        else:
            fh.write(struct.pack("<I", model.n_leaves_))
            fh.write(model.merges_.astype("<f8", copy=False).tobytes())
            k, dim = model.cut_means_.shape
            fh.write(struct.pack("<II", k, dim))
            fh.write(model.cut_means_.astype("<f8", copy=False).tobytes())
            fh.write(struct.pack("<I", len(model.labels_)))
            fh.write(model.labels_.astype("<i4", copy=False).tobytes())


@dataclass
class LoadedModel:
    algorithm: str
    estimator: object
    fingerprint: str
    doc_ids: list[str]


def load_model(path, *, expected_fingerprint: str | None = None) -> LoadedModel:
    path = Path(path)
    blob = path.read_bytes()
    offset = 0

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(blob):
            raise ModelError(
                f"truncated model file {path}: needed {n} bytes for {what} at "
                f"offset {offset}"
            )
        chunk = blob[offset : offset + n]
        offset += n
        return chunk

    if take(4, "magic") != MODEL_MAGIC:
        raise ModelError(f"{path} is not a clustering model file (bad magic)")
    version, tag = struct.unpack("<IB", take(5, "version/tag"))
    if version != MODEL_VERSION:
        raise ModelError(f"unsupported model file version {version}")
    if tag not in _TAG_ALGOS:
        raise ModelError(f"unknown algorithm tag {tag}")
    algorithm = _TAG_ALGOS[tag]

    (header_len,) = struct.unpack("<I", take(4, "header length"))
    header = json.loads(take(header_len, "header").decode("utf-8"))
    fingerprint = header["fingerprint"]
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        raise FingerprintMismatchError(
            f"model {path} was fitted on a vector space with fingerprint "
            f"{fingerprint[:12]}..., expected {expected_fingerprint[:12]}..."
        )

    if algorithm == "kmeans":
        k, dim = struct.unpack("<II", take(8, "kmeans shape"))
        centers = np.frombuffer(take(8 * k * dim, "centroids"), dtype="<f8").reshape(
            k, dim
        )
        (n,) = struct.unpack("<I", take(4, "label count"))
        labels = np.frombuffer(take(4 * n, "labels"), dtype="<i4").astype(np.int64)
        est = KMeans(n_clusters=k, **{
            key: header["params"][key] for key in ("seed", "n_init", "max_iter", "tol")
        })
        est.cluster_centers_ = centers.copy()
        est.labels_ = labels
        est.inertia_ = None
    else:
        (n_leaves,) = struct.unpack("<I", take(4, "leaf count"))
        merges = np.frombuffer(
            take(8 * 4 * (n_leaves - 1), "merge list"), dtype="<f8"
        ).reshape(n_leaves - 1, 4)
        k, dim = struct.unpack("<II", take(8, "cut means shape"))
        means = np.frombuffer(take(8 * k * dim, "cut means"), dtype="<f8").reshape(
            k, dim
        )
        (n,) = struct.unpack("<I", take(4, "label count"))
        labels = np.frombuffer(take(4 * n, "labels"), dtype="<i4").astype(np.int64)
        est = WardAgglomerative(n_clusters=header["params"]["n_clusters"])
        est.merges_ = merges.copy()
        est.n_leaves_ = n_leaves
        est.cut_means_ = means.copy()
        est.labels_ = labels

    if offset != len(blob):
        raise ModelError(f"model file {path} has trailing bytes after offset {offset}")
    return LoadedModel(
        algorithm=algorithm,
        estimator=est,
        fingerprint=fingerprint,
        doc_ids=list(header["doc_ids"]),
    )
