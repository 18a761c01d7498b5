"""Laplacian eigenpairs, spectral embeddings and subspace distances."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import DisconnectedGraphError, EigensolverError, GraphError
from .graph import Graph, connected_components, laplacian

DENSE_LIMIT = 2000
RESIDUAL_RTOL = 1e-8
TIE_GAP = 1e-10


class EigenTieWarning(UserWarning):
    """lambda_{K+1} - lambda_K is numerically zero; the embedding basis is arbitrary."""


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    K: int
    eigenvalues: np.ndarray  # lambda_2 .. lambda_K, ascending
    Y: np.ndarray  # n x (K-1), columns u_2 .. u_K
    lambda_next: float  # lambda_{K+1}

    def block(self, rows) -> np.ndarray:
        """Rows of ``Y`` belonging to one cluster."""
        return self.Y[np.asarray(rows)]


def _scale(L) -> float:
    d = L.diagonal() if sp.issparse(L) else np.diag(L)
    s = float(np.max(np.abs(d))) if d.size else 0.0
    return s if s > 0 else 1.0


def _check_symmetric(L, scale):
    if sp.issparse(L):
        diff = abs(L - L.T)
        asym = diff.max() if diff.nnz else 0.0
    else:
        asym = np.max(np.abs(L - L.T)) if L.size else 0.0
    if asym > 1e-12 * scale:
        raise GraphError(f"matrix is not symmetric (max |L - L^T| = {asym:.3g})")


def _canonical_signs(vecs):
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _dense_eigh(L, count):
    Ld = L.toarray() if sp.issparse(L) else np.asarray(L, dtype=np.float64)
    vals, vecs = sla.eigh(Ld, subset_by_index=[0, count - 1])
    return vals, vecs


def _iterative_eigh(L, count, scale, tol):
    n = L.shape[0]
    L = sp.csc_matrix(L, dtype=np.float64)
    sigma = -1e-5 * scale
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        vals, vecs = eigsh(L, k=count, sigma=sigma, which="LM", v0=v0,
                           tol=tol, maxiter=max(1000, 20 * n))
    except ArpackNoConvergence as exc:
        raise EigensolverError(
            f"shift-invert Lanczos did not converge: {len(exc.eigenvalues)} of "
            f"{count} eigenpairs after maxiter={max(1000, 20 * n)}"
        ) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    # re-orthonormalise; clustered eigenvalues can leave O(tol) drift
    q, r = np.linalg.qr(vecs)
    vecs = q * np.sign(np.diag(r))
    return vals, vecs


def smallest_eigenpairs(L, count, method="auto", tol=1e-10):
    """The ``count`` smallest eigenvalues (ascending) and orthonormal eigenvectors.

    Parameters
    ----------
    L : ndarray or sparse matrix
        Symmetric matrix; the iterative path assumes it is positive semidefinite.
    count : int
        Number of eigenpairs, ``1 <= count <= n``.
    method : {"auto", "dense", "iterative"}
        ``auto`` uses LAPACK for ``n <= 2000`` and shift-invert Lanczos
        (ARPACK) above that.

    Raises
    ------
    EigensolverError
        Non-convergence, or a residual ``|L u - lambda u|`` above
        ``1e-8 * max|diag L|``.
    """
    n = L.shape[0]
    if L.ndim != 2 or L.shape[1] != n:
        raise GraphError("matrix must be square")
    if not 1 <= count <= n:
        raise GraphError(f"count must be in [1, {n}], got {count}")
    scale = _scale(L)
    _check_symmetric(L, scale)
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "iterative" and count >= n - 1:
        method = "dense"
    if method == "dense":
        vals, vecs = _dense_eigh(L, count)
    elif method == "iterative":
        vals, vecs = _iterative_eigh(L, count, scale, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    vecs = _canonical_signs(vecs)
    resid = np.linalg.norm(L @ vecs - vecs * vals, axis=0)
    worst = float(resid.max())
    if worst > RESIDUAL_RTOL * scale:
        raise EigensolverError(
            f"{method} eigensolver residual {worst:.3g} exceeds "
            f"{RESIDUAL_RTOL * scale:.3g} (n={n}, count={count})"
        )
    return vals, vecs


def embedding(g: Graph, K: int, method="auto") -> SpectralEmbedding:
    """Spectral embedding ``Y = [u_2 .. u_K]`` of a connected graph."""
    n = g.n
    if not 2 <= K <= n - 1:
        raise GraphError(f"K must be in [2, {n - 1}], got {K}")
    ncomp, _ = connected_components(g)
    if ncomp != 1:
        raise DisconnectedGraphError(f"graph has {ncomp} connected components")
    vals, vecs = smallest_eigenpairs(laplacian(g), K + 1, method=method)
    vals = np.maximum(vals, 0.0)
    if vals[K] - vals[K - 1] < TIE_GAP:
        warnings.warn(
            f"lambda_{K + 1} - lambda_{K} = {vals[K] - vals[K - 1]:.3g}; "
            "embedding basis is not unique",
            EigenTieWarning,
            stacklevel=2,
        )
    return SpectralEmbedding(K=K, eigenvalues=vals[1:K], Y=vecs[:, 1:K],
                             lambda_next=float(vals[K]))


def partial_eigen_sum(L, K: int, method="auto") -> float:
    """Sum of the 2nd through K-th smallest eigenvalues of ``L``."""
    if K < 2:
        raise GraphError("K must be at least 2")
    if K > L.shape[0]:
        raise GraphError(f"K={K} exceeds matrix order {L.shape[0]}")
    vals, _ = smallest_eigenpairs(L, K, method=method)
    return float(np.sum(vals[1:K]))


def sin_theta_distance(Y, Yt) -> float:
    """Frobenius norm of the sines of the principal angles between column spaces."""
    Y = np.asarray(Y, dtype=np.float64)
    Yt = np.asarray(Yt, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Yt.ndim == 1:
        Yt = Yt[:, None]
    if Y.shape != Yt.shape:
        raise ValueError(f"shape mismatch: {Y.shape} vs {Yt.shape}")
    for name, M in (("Y", Y), ("Yt", Yt)):
        norms = np.linalg.norm(M, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError(f"{name} does not have unit-norm columns")
    # ||(I - Y Y^T) Yt||_F equals sqrt(sum(1 - sigma^2)) for orthonormal Y but
    # keeps full precision when the angles are tiny
    return float(np.linalg.norm(Yt - Y @ (Y.T @ Yt)))
