"""Naive O(n^3) Ward clustering used as the independent oracle.

At every step it recomputes the merge cost of ALL active cluster pairs from
their centroids and sizes and merges the cheapest pair, breaking exact cost
ties by the lexicographically smallest (node id, node id) pair. Node ids
follow the linkage convention: leaves are 0..n-1, the i-th merge creates
node n+i.
"""

import numpy as np


def naive_ward(X):
    """Returns (merges, partitions) where merges is a list of
    (left, right, cost, size) in merge order and partitions[k] is the set of
    frozensets of leaf indices when exactly k clusters remain."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    centroids = [X[i].copy() for i in range(n)]
    sizes = [1] * n
    members = [frozenset([i]) for i in range(n)]
    labels = list(range(n))

    partitions = {n: frozenset(members)}
    merges = []
    next_label = n
    while len(members) > 1:
        m = len(members)
        C = np.vstack(centroids)
        s = np.asarray(sizes, dtype=np.float64)
        diff = C[:, None, :] - C[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        cost = (s[:, None] * s[None, :] / (s[:, None] + s[None, :])) * sq

        rows, cols = np.triu_indices(m, k=1)
        vals = cost[rows, cols]
        minimum = vals.min()
        candidates = np.flatnonzero(vals == minimum)
        if len(candidates) == 1:
            i, j = int(rows[candidates[0]]), int(cols[candidates[0]])
        else:
            # exact tie: lexicographically smallest (node id, node id)
            def pair_key(c):
                a, b = labels[rows[c]], labels[cols[c]]
                return (min(a, b), max(a, b))

            chosen = min(candidates, key=pair_key)
            i, j = int(rows[chosen]), int(cols[chosen])

        pair = (min(labels[i], labels[j]), max(labels[i], labels[j]))
        new_centroid = (sizes[i] * centroids[i] + sizes[j] * centroids[j]) / (
            sizes[i] + sizes[j]
        )
        new_members = members[i] | members[j]
        new_size = sizes[i] + sizes[j]
        merges.append((pair[0], pair[1], float(minimum), new_size))

        for idx in sorted((i, j), reverse=True):
            del centroids[idx], sizes[idx], members[idx], labels[idx]
        centroids.append(new_centroid)
        sizes.append(new_size)
        members.append(new_members)
        labels.append(next_label)
        next_label += 1
        partitions[len(members)] = frozenset(members)
    return merges, partitions


def partition_of(labels):
    """Cluster labels -> canonical partition (set of frozensets of indices)."""
    groups = {}
    for i, label in enumerate(labels):
        groups.setdefault(int(label), set()).add(i)
    return frozenset(frozenset(g) for g in groups.values())


def total_within_cluster_ss(X, groups):
    """Sum over clusters of squared distances to the cluster centroid."""
    X = np.asarray(X, dtype=np.float64)
    total = 0.0
    for g in groups:
        rows = X[sorted(g)]
        centroid = rows.mean(axis=0)
        total += float(((rows - centroid) ** 2).sum())
    return total
