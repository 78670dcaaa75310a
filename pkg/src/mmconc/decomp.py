"""Matrix decompositions over R, C and H.

Hermitian eigendecomposition, SVD and polar factors, plus the distances
built on them: distance to a scaled frame manifold, and the two quotient
distances (right-unitary and unit-scalar orbits).

The real and complex cases run on numpy's symmetric eigensolver
directly; the quaternionic case goes through the realified picture and
extracts quaternionic eigenvectors from the block structure.  Batched
component-array variants of the hot kernels are provided for samplers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    FMatrix,
    column_inner,
    comp_adjoint,
    comp_conj,
    comp_matmul,
    comp_mul,
    comp_norm,
    field_dim,
    realify_comps,
)
from .errors import NotHermitianError, ShapeMismatchError


@dataclass(frozen=True)
class PolarFactors:
    q: FMatrix
    h: FMatrix


@dataclass(frozen=True)
class SingularTriple:
    u: FMatrix
    lam: np.ndarray
    v: FMatrix


def _diag_matrix(field, vals, N=None):
    n = len(vals)
    if N is None:
        N = n
    comps = np.zeros((N, n, 4))
    comps[np.arange(n), np.arange(n), 0] = vals
    return FMatrix(field, comps)


def orthonormalize(field, candidates, base=(), need=None, reject_tol=0.25):
    """Right-module Gram-Schmidt over F.

    candidates and base are sequences of column component arrays (N, 4
    per entry axis, i.e. shape (N, 4)).  Candidates whose residual after
    projection is shorter than reject_tol are dropped; accepted columns
    are returned normalized, in order.
    """
    accepted = list(base)
    out = []
    for cand in candidates:
        r = np.array(cand, dtype=np.float64, copy=True)
        if accepted:
            B = np.stack(accepted)  # (k, N, 4)
            # Two projection passes: classical Gram-Schmidt against the
            # whole accepted block, repeated once to restore
            # orthogonality lost to cancellation.
            for _ in range(2):
                coeffs = comp_mul(comp_conj(B), r).sum(axis=-2)  # (k, 4)
                r = r - comp_mul(B, coeffs[:, None, :]).sum(axis=0)
        norm = float(np.sqrt(np.sum(np.square(r))))
        if norm >= reject_tol:
            col = r / norm
            accepted.append(col)
            out.append(col)
            if need is not None and len(out) == need:
                break
    return out


def _std_basis_columns(N):
    for m in range(N):
        col = np.zeros((N, 4))
        col[m, 0] = 1.0
        yield col


def hermitian_eig(H, tol=1e-10):
    """Eigendecomposition of a Hermitian matrix over F.

    Returns (P, sigma) with H = P diag(sigma) P*, sigma real and sorted
    non-increasing, P unitary over F.
    """
    if H.N != H.n:
        raise ShapeMismatchError("hermitian_eig needs a square matrix")
    defect = (H - H.adjoint()).norm
    if defect > tol * max(1.0, H.norm):
        raise NotHermitianError("matrix is not Hermitian (defect %.3e)" % defect)
    N = H.N
    if H.field == "R":
        w, vecs = np.linalg.eigh(H.comps[..., 0])
        order = np.argsort(-w)
        sigma = w[order]
        comps = np.zeros((N, N, 4))
        comps[..., 0] = vecs[:, order]
        return FMatrix("R", comps), sigma
    if H.field == "C":
        cmat = H.comps[..., 0] + 1j * H.comps[..., 1]
        w, vecs = np.linalg.eigh(cmat)
        order = np.argsort(-w)
        sigma = w[order]
        vecs = vecs[:, order]
        comps = np.zeros((N, N, 4))
        comps[..., 0] = vecs.real
        comps[..., 1] = vecs.imag
        return FMatrix("C", comps), sigma
    # Quaternions: solve the realified 4N problem and pull quaternionic
    # eigenvectors out of the first block column structure.
    R = realify_comps(H.comps, "H")
    w, vecs = np.linalg.eigh(R)
    order = np.argsort(-w)
    cols = []
    sigma = []
    for idx in order:
        flat = vecs[:, idx]
        cand = np.zeros((N, 4))
        for c in range(4):
            cand[:, c] = flat[c * N : (c + 1) * N]
        got = orthonormalize("H", [cand], base=cols, need=1)
        if got:
            cols.extend(got)
            sigma.append(w[idx])
            if len(cols) == N:
                break
    comps = np.stack(cols, axis=1)
    return FMatrix("H", comps), np.array(sigma)


def _gram(Z):
    """Z* Z, symmetrized to kill round-off skew."""
    G = Z.adjoint() @ Z
    sym = 0.5 * (G.comps + comp_adjoint(G.comps))
    return FMatrix(Z.field, sym)


def singular_values(Z):
    """Non-increasing singular values, the root spectrum of Z* Z."""
    if Z.N < Z.n:
        raise ShapeMismatchError("need N >= n")
    _, sig = hermitian_eig(_gram(Z))
    return np.sqrt(np.clip(sig, 0.0, None))


def svd(Z):
    """Z = U Lambda V* with U, V unitary and Lambda the (N, n) diagonal."""
    if Z.N < Z.n:
        raise ShapeMismatchError("need N >= n")
    N, n = Z.shape
    V, sig = hermitian_eig(_gram(Z))
    lam = np.sqrt(np.clip(sig, 0.0, None))
    ZV = Z @ V
    cut = max(1.0, lam[0] if n else 1.0) * 1e-13
    cands = [ZV.comps[:, l, :] / lam[l] for l in range(n) if lam[l] > cut]
    # Columns of a numerically rank-deficient input collapse onto the
    # leading ones; Gram-Schmidt rejection filters them out and the
    # standard basis completes the frame.
    cols = orthonormalize(Z.field, cands, reject_tol=0.5)
    rest = orthonormalize(Z.field, _std_basis_columns(N), base=cols, need=N - len(cols))
    U = FMatrix(Z.field, np.stack(cols + rest, axis=1))
    return SingularTriple(u=U, lam=lam, v=V)


def polar(Z, rank_tol=1e-6):
    """Z = Q H with Q an orthonormal frame and H Hermitian PSD.

    Full-rank inputs use H = (Z* Z)^(1/2) and Q = Z H^(-1); otherwise
    the factors come from the SVD.
    """
    if Z.N < Z.n:
        raise ShapeMismatchError("need N >= n")
    n = Z.n
    V, sig = hermitian_eig(_gram(Z))
    lam = np.sqrt(np.clip(sig, 0.0, None))
    H = V @ _diag_matrix(Z.field, lam) @ V.adjoint()
    if n == 0 or lam[-1] > rank_tol * max(1.0, lam[0]):
        Hinv = V @ _diag_matrix(Z.field, 1.0 / lam) @ V.adjoint()
        return PolarFactors(q=Z @ Hinv, h=H)
    t = svd(Z)
    Qcomps = t.u.comps[:, :n, :]
    Q = FMatrix(Z.field, Qcomps) @ t.v.adjoint()
    return PolarFactors(q=Q, h=H)


def dist_to_scaled_stiefel(Z, r):
    """Frobenius distance from Z to the frames scaled by r > 0."""
    if r <= 0:
        raise ShapeMismatchError("radius must be positive")
    lam = singular_values(Z)
    return float(np.sqrt(np.sum(np.square(lam - r))))


def grassmann_dist(Z, W):
    """min over unitary U of ||Z - W U|| (right-orbit quotient distance)."""
    Z._check_like(W)
    M = W.adjoint() @ Z
    lam = singular_values(M)
    d2 = Z.norm**2 + W.norm**2 - 2.0 * float(np.sum(lam))
    return float(np.sqrt(max(d2, 0.0)))


def hopf_dist(Z, W):
    """min over unit scalars t of ||t Z - W|| (scalar-orbit distance)."""
    Z._check_like(W)
    S = comp_mul(W.comps, comp_conj(Z.comps)).sum(axis=(0, 1))
    d2 = Z.norm**2 + W.norm**2 - 2.0 * float(comp_norm(S))
    return float(np.sqrt(max(d2, 0.0)))


# ---------------------------------------------------------------------------
# Batched component-array kernels (hot paths for the samplers).


def _batched_gram(comps):
    return comp_matmul(comp_adjoint(comps), comps)


def gram_eigvals_batched(comps, field):
    """Ascending eigenvalues of Z* Z for a batch (..., N, n, 4)."""
    G = _batched_gram(comps)
    G = 0.5 * (G + comp_adjoint(G))
    if field == "R":
        return np.linalg.eigvalsh(G[..., 0])
    if field == "C":
        return np.linalg.eigvalsh(G[..., 0] + 1j * G[..., 1])
    w = np.linalg.eigvalsh(realify_comps(G, "H"))
    # Quadruple degeneracy: keep one representative per block.
    return w[..., ::4]


def singular_values_batched(comps, field):
    """Non-increasing singular values for a batch, shape (..., n)."""
    w = gram_eigvals_batched(comps, field)
    return np.sqrt(np.clip(w[..., ::-1], 0.0, None))


def _inv_sqrt_psd(w, vecs):
    inv = 1.0 / np.sqrt(np.clip(w, 1e-300, None))
    return np.einsum("...ik,...k,...jk->...ij", vecs, inv, np.conj(vecs))


def polar_q_batched(comps, field):
    """Polar frames Q for a full-rank batch (..., N, n, 4).

    Returns (q_comps, lam_min) where lam_min is the smallest singular
    value per batch entry (callers guard rank with it).
    """
    n = comps.shape[-2]
    if n == 1:
        total = np.sqrt(np.sum(np.square(comps), axis=(-3, -2, -1)))
        safe = np.where(total > 0.0, total, 1.0)
        q = comps / safe[..., None, None, None]
        return q, total
    G = _batched_gram(comps)
    G = 0.5 * (G + comp_adjoint(G))
    if field == "R":
        w, vecs = np.linalg.eigh(G[..., 0])
        M = _inv_sqrt_psd(w, vecs)
        Mc = np.zeros(M.shape + (4,))
        Mc[..., 0] = M
        lam_min = np.sqrt(np.clip(w[..., 0], 0.0, None))
    elif field == "C":
        w, vecs = np.linalg.eigh(G[..., 0] + 1j * G[..., 1])
        M = _inv_sqrt_psd(w, vecs)
        Mc = np.zeros(M.shape + (4,))
        Mc[..., 0] = M.real
        Mc[..., 1] = M.imag
        lam_min = np.sqrt(np.clip(w[..., 0], 0.0, None))
    else:
        R = realify_comps(G, "H")
        w, vecs = np.linalg.eigh(R)
        M = _inv_sqrt_psd(w, vecs)
        Mc = np.zeros(M.shape[:-2] + (n, n, 4))
        for c in range(4):
            Mc[..., c] = M[..., c * n : (c + 1) * n, :n]
        lam_min = np.sqrt(np.clip(w[..., 0], 0.0, None))
    return comp_matmul(comps, Mc), lam_min
