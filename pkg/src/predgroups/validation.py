"""Input validation helpers for the estimator-style API.

Clustering and vectorization accept either dense ``numpy`` arrays or
``scipy.sparse`` CSR matrices behind one interface; these helpers normalize
and sanity-check both representations.
"""

import numpy as np
import scipy.sparse as sp


def check_matrix(X, *, name="X", min_rows=1):
    """Validate a 2-D float matrix (dense or CSR sparse).

    Returns the matrix as float64, converting sparse input to CSR. Raises
    ``ValueError`` on NaN/inf entries, wrong dimensionality, or too few rows.
    """
    if sp.issparse(X):
        X = X.tocsr()
        if X.dtype != np.float64:
            X = X.astype(np.float64)
        if not np.all(np.isfinite(X.data)):
            raise ValueError(f"{name} contains NaN or infinite values")
    else:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError(f"{name} contains NaN or infinite values")
    if X.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    return X


def check_same_dim(X, dim, *, name="X"):
    """Raise ``ValueError`` unless ``X`` has exactly ``dim`` columns."""
    if X.shape[1] != dim:
        raise ValueError(
            f"{name} has dimension {X.shape[1]}, expected {dim} (dimension mismatch)"
        )
    return X


def stack_rows(parts):
    """Vertically stack matrices, staying sparse if any part is sparse."""
    if any(sp.issparse(p) for p in parts):
        return sp.vstack([sp.csr_matrix(p) for p in parts], format="csr")
    return np.vstack(parts)


def row_norms_sq(X):
    """Squared L2 norm of every row, for dense or sparse input."""
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", X, X)


def as_dense_row(X, i):
    """Row ``i`` of a dense or sparse matrix as a flat dense array."""
    if sp.issparse(X):
        return np.asarray(X[i].todense()).ravel()
    return np.asarray(X[i]).ravel()
