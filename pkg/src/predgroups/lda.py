"""Plain latent-Dirichlet topic model trained by collapsed Gibbs sampling.

Used as an evaluation baseline: documents are tokenized with the same
tokenizer as the TF-IDF space, each training document is assigned to its
highest-probability topic, and unseen documents are folded in by sampling
their token-topic assignments with the trained topic-word counts frozen.

Doc-topic distributions are averaged over the post-burn-in sweeps.
Deterministic for a given seed: all randomness comes from one seeded
generator feeding pre-drawn uniforms into the sampling kernel.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _gibbs_sweep(words, doc_of, z, n_mk, n_kt, n_k, alpha, beta, uniforms, update_topics):
    n_topics = n_mk.shape[1]
    vocab_size = n_kt.shape[1]
    probs = np.empty(n_topics)
    for t in range(words.shape[0]):
        w = words[t]
        m = doc_of[t]
        k_old = z[t]
        n_mk[m, k_old] -= 1
        if update_topics:
            n_kt[k_old, w] -= 1
            n_k[k_old] -= 1

        total = 0.0
        for k in range(n_topics):
            p = (n_kt[k, w] + beta) / (n_k[k] + beta * vocab_size) * (n_mk[m, k] + alpha)
            total += p
            probs[k] = total

        u = uniforms[t] * total
        k_new = n_topics - 1
        for k in range(n_topics):
            if probs[k] >= u:
                k_new = k
                break

        z[t] = k_new
        n_mk[m, k_new] += 1
        if update_topics:
            n_kt[k_new, w] += 1
            n_k[k_new] += 1


class GibbsLda:
    """Collapsed-Gibbs LDA over documents given as token-id sequences.

    ``alpha`` defaults to ``50 / n_topics``; ``beta`` to 0.01. ``fit`` runs
    ``n_iterations`` full sweeps and averages doc-topic counts after
    ``burn_in`` sweeps. ``fold_in`` samples new documents against the frozen
    topic-word counts of the fitted model.
    """

    def __init__(
        self,
        n_topics: int,
        *,
        alpha: float | None = None,
        beta: float = 0.01,
        n_iterations: int = 1000,
        burn_in: int = 200,
        seed: int = 0,
    ):
        if n_topics < 2:
            raise ValueError(f"n_topics must be at least 2, got {n_topics}")
        if not (0 <= burn_in < n_iterations):
            raise ValueError("burn_in must be smaller than n_iterations")
        self.n_topics = n_topics
        self.alpha = 50.0 / n_topics if alpha is None else alpha
        self.beta = beta
        self.n_iterations = n_iterations
        self.burn_in = burn_in
        self.seed = seed

    @staticmethod
    def _flatten(docs):
        words, doc_of = [], []
        for m, doc in enumerate(docs):
            words.extend(doc)
            doc_of.extend([m] * len(doc))
        return (
            np.asarray(words, dtype=np.int64),
            np.asarray(doc_of, dtype=np.int64),
        )

    def fit(self, docs: list[list[int]], vocab_size: int):
        self.vocab_size_ = int(vocab_size)
        words, doc_of = self._flatten(docs)
        if words.size < self.n_topics:
            raise ValueError(
                f"degenerate corpus: {words.size} tokens for {self.n_topics} topics"
            )
        if words.size and words.max() >= vocab_size:
            raise ValueError("token id out of vocabulary range")
        n_docs = len(docs)
        rng = np.random.default_rng(self.seed)

        z = rng.integers(0, self.n_topics, size=words.size)
        n_mk = np.zeros((n_docs, self.n_topics), dtype=np.int64)
        n_kt = np.zeros((self.n_topics, vocab_size), dtype=np.int64)
        n_k = np.zeros(self.n_topics, dtype=np.int64)
        for t in range(words.size):
            n_mk[doc_of[t], z[t]] += 1
            n_kt[z[t], words[t]] += 1
            n_k[z[t]] += 1

        acc_mk = np.zeros_like(n_mk, dtype=np.float64)
        acc_kt = np.zeros_like(n_kt, dtype=np.float64)
        kept = 0
        for sweep in range(self.n_iterations):
            uniforms = rng.random(words.size)
            _gibbs_sweep(
                words, doc_of, z, n_mk, n_kt, n_k,
                self.alpha, self.beta, uniforms, True,
            )
            if sweep >= self.burn_in:
                acc_mk += n_mk
                acc_kt += n_kt
                kept += 1

        self.doc_topic_ = (acc_mk / kept + self.alpha)
        self.doc_topic_ /= self.doc_topic_.sum(axis=1, keepdims=True)
        self.topic_word_counts_ = acc_kt / kept
        self.topic_totals_ = self.topic_word_counts_.sum(axis=1)
        return self

    def _check_fitted(self):
        if not hasattr(self, "topic_word_counts_"):
            raise RuntimeError("GibbsLda is not fitted")

    def best_topics(self) -> np.ndarray:
        """Highest-probability topic of every training document."""
        self._check_fitted()
        return np.argmax(self.doc_topic_, axis=1)

    def fold_in(self, docs: list[list[int]]) -> np.ndarray:
        """Doc-topic distributions of unseen documents, sampled with the
        trained topic-word counts frozen. Out-of-vocabulary token ids must be
        filtered by the caller; empty documents get the uniform prior."""
        self._check_fitted()
        words, doc_of = self._flatten(docs)
        n_docs = len(docs)
        rng = np.random.default_rng(self.seed + 1)

        theta = np.full((n_docs, self.n_topics), 1.0 / self.n_topics)
        if words.size == 0:
            return theta

        # frozen topic-word statistics, rounded onto integer counts for the kernel
        n_kt = np.rint(self.topic_word_counts_).astype(np.int64)
        n_k = n_kt.sum(axis=1)

        z = rng.integers(0, self.n_topics, size=words.size)
        n_mk = np.zeros((n_docs, self.n_topics), dtype=np.int64)
        for t in range(words.size):
            n_mk[doc_of[t], z[t]] += 1

        acc_mk = np.zeros_like(n_mk, dtype=np.float64)
        kept = 0
        for sweep in range(self.n_iterations):
            uniforms = rng.random(words.size)
            _gibbs_sweep(
                words, doc_of, z, n_mk, n_kt, n_k,
                self.alpha, self.beta, uniforms, False,
            )
            if sweep >= self.burn_in:
                acc_mk += n_mk
                kept += 1

        theta = acc_mk / kept + self.alpha
        theta /= theta.sum(axis=1, keepdims=True)
        return theta
