"""Scalar and matrix arithmetic over the real, complex and quaternion fields.

Every quantity is stored componentwise: a scalar is four reals
(z0, z1, z2, z3) with z = z0 + z1*i + z2*j + z3*k and the unused
components pinned at zero for R and C.  Matrices carry their entries in a
float64 array of shape (N, n, 4); batched helpers accept extra leading
axes so hot loops can stay vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    DomainError,
    FieldMismatchError,
    NotUnitaryError,
    ShapeMismatchError,
)

FIELDS = {"R": 1, "C": 2, "H": 4}

# Block sign/source table of the real picture of left multiplication:
# block (r, c) of the realified matrix is _BLOCK_SIGN[r][c] * component
# _BLOCK_COMP[r][c] of the original matrix.
_BLOCK_COMP = ((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))
_BLOCK_SIGN = ((1, -1, -1, -1), (1, 1, -1, 1), (1, 1, 1, -1), (1, -1, 1, 1))


def field_dim(field):
    """Real dimension of the scalar field: 1, 2 or 4."""
    try:
        return FIELDS[field]
    except KeyError:
        raise DomainError("unknown field tag %r (expected R, C or H)" % (field,))


def _check_comps(field, comps):
    d = field_dim(field)
    if comps.shape[-1] != 4:
        raise ShapeMismatchError("component axis must have length 4")
    if d < 4 and np.any(comps[..., d:] != 0.0):
        raise DomainError("components beyond dim %d must vanish for field %s" % (d, field))


def comp_mul(a, b):
    """Componentwise product of scalar arrays shaped (..., 4).

    Real and complex values are quaternions with vanishing upper
    components, so the single Hamilton formula covers all three fields.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.float64)
    out[..., 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    out[..., 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
    out[..., 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
    out[..., 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    return out


def comp_conj(a):
    out = np.array(a, dtype=np.float64, copy=True)
    out[..., 1:] = -out[..., 1:]
    return out


def comp_norm(a):
    """Scalar norm sqrt(z0^2 + z1^2 + z2^2 + z3^2) over the last axis."""
    return np.sqrt(np.sum(np.square(a), axis=-1))


@dataclass(frozen=True)
class Scalar:
    """An element of R, C or H."""

    field: str
    comps: np.ndarray = dc_field(repr=True)

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=np.float64)
        if comps.shape != (4,):
            raise ShapeMismatchError("Scalar needs exactly 4 components")
        _check_comps(self.field, comps)
        object.__setattr__(self, "comps", comps)

    @classmethod
    def of(cls, field, z0, z1=0.0, z2=0.0, z3=0.0):
        return cls(field, np.array([z0, z1, z2, z3], dtype=np.float64))

    @classmethod
    def one(cls, field):
        return cls.of(field, 1.0)

    @property
    def real(self):
        return float(self.comps[0])

    @property
    def norm(self):
        return float(comp_norm(self.comps))

    def conj(self):
        return Scalar(self.field, comp_conj(self.comps))

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError(
                    "mixed fields %s and %s" % (self.field, other.field)
                )
            return other
        return Scalar.of(self.field, float(other))

    def __mul__(self, other):
        other = self._coerce(other)
        return Scalar(self.field, comp_mul(self.comps, other.comps))

    def __add__(self, other):
        other = self._coerce(other)
        return Scalar(self.field, self.comps + other.comps)

    def __sub__(self, other):
        other = self._coerce(other)
        return Scalar(self.field, self.comps - other.comps)

    def __neg__(self):
        return Scalar(self.field, -self.comps)

    def allclose(self, other, tol=1e-12):
        other = self._coerce(other)
        return bool(np.all(np.abs(self.comps - other.comps) <= tol))


def comp_matmul(a, b):
    """Matrix product of component arrays (..., N, k, 4) x (..., k, n, 4)."""
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3,
            a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2,
            a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1,
            a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0,
        ],
        axis=-1,
    )


def comp_adjoint(a):
    """Conjugate transpose of a component array (..., N, n, 4)."""
    return comp_conj(np.swapaxes(a, -3, -2))


@dataclass(frozen=True)
class FMatrix:
    """A dense N x n matrix over R, C or H, stored componentwise."""

    field: str
    comps: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=np.float64)
        if comps.ndim != 3:
            raise ShapeMismatchError("FMatrix components must be (N, n, 4)")
        _check_comps(self.field, comps)
        object.__setattr__(self, "comps", comps)

    @classmethod
    def zeros(cls, field, N, n):
        field_dim(field)
        return cls(field, np.zeros((N, n, 4)))

    @classmethod
    def identity(cls, field, n):
        return cls.tall_identity(field, n, n)

    @classmethod
    def tall_identity(cls, field, N, n):
        """The N x n matrix with ones on the diagonal, zeros elsewhere."""
        if n > N:
            raise ShapeMismatchError("need n <= N")
        comps = np.zeros((N, n, 4))
        comps[np.arange(n), np.arange(n), 0] = 1.0
        return cls(field, comps)

    @classmethod
    def from_real(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        comps = np.zeros(arr.shape + (4,))
        comps[..., 0] = arr
        return cls("R", comps)

    @property
    def N(self):
        return self.comps.shape[0]

    @property
    def n(self):
        return self.comps.shape[1]

    @property
    def shape(self):
        return (self.comps.shape[0], self.comps.shape[1])

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.square(self.comps))))

    def _check_like(self, other, shapes=True):
        if not isinstance(other, FMatrix):
            raise TypeError("expected FMatrix")
        if other.field != self.field:
            raise FieldMismatchError(
                "mixed fields %s and %s" % (self.field, other.field)
            )
        if shapes and other.shape != self.shape:
            raise ShapeMismatchError(
                "shape %r vs %r" % (self.shape, other.shape)
            )

    def adjoint(self):
        return FMatrix(self.field, comp_adjoint(self.comps))

    def __matmul__(self, other):
        self._check_like(other, shapes=False)
        if self.n != other.N:
            raise ShapeMismatchError(
                "inner dimensions %d and %d differ" % (self.n, other.N)
            )
        return FMatrix(self.field, comp_matmul(self.comps, other.comps))

    def __add__(self, other):
        self._check_like(other)
        return FMatrix(self.field, self.comps + other.comps)

    def __sub__(self, other):
        self._check_like(other)
        return FMatrix(self.field, self.comps - other.comps)

    def __neg__(self):
        return FMatrix(self.field, -self.comps)

    def scale(self, r):
        """Multiply by a real number."""
        return FMatrix(self.field, float(r) * self.comps)

    def scalar_left(self, t):
        """Left scalar multiple t * Z."""
        if t.field != self.field:
            raise FieldMismatchError("mixed fields")
        return FMatrix(self.field, comp_mul(t.comps, self.comps))

    def scalar_right(self, t):
        """Right scalar multiple Z * t."""
        if t.field != self.field:
            raise FieldMismatchError("mixed fields")
        return FMatrix(self.field, comp_mul(self.comps, t.comps))

    def trace(self):
        if self.N != self.n:
            raise ShapeMismatchError("trace needs a square matrix")
        idx = np.arange(self.N)
        return Scalar(self.field, np.sum(self.comps[idx, idx], axis=0))

    def column(self, l):
        return self.comps[:, l, :]

    def allclose(self, other, tol=1e-10):
        self._check_like(other)
        return bool(np.max(np.abs(self.comps - other.comps)) <= tol)


def frobenius_inner(Z, W):
    """tr(Z* W); its real part is the realified Euclidean inner product."""
    Z._check_like(W)
    total = comp_mul(comp_conj(Z.comps), W.comps).sum(axis=(0, 1))
    return Scalar(Z.field, total)


def column_inner(a, b):
    """Inner product sum_m conj(a_m) b_m of two column component arrays.

    Accepts (..., N, 4) batches and returns (..., 4).
    """
    return comp_mul(comp_conj(a), b).sum(axis=-2)


def realify_comps(comps, field):
    """Real matrix of left multiplication by the given component array.

    (..., N, n, 4) maps to (..., d*N, d*n) where d is the field dimension.
    The first block column stacks the components, so matrix-vector actions
    agree with component stacking.
    """
    comps = np.asarray(comps, dtype=np.float64)
    d = field_dim(field)
    N, n = comps.shape[-3], comps.shape[-2]
    out = np.empty(comps.shape[:-3] + (d * N, d * n))
    for r in range(d):
        for c in range(d):
            k = _BLOCK_COMP[r][c]
            s = _BLOCK_SIGN[r][c]
            out[..., r * N : (r + 1) * N, c * n : (c + 1) * n] = s * comps[..., k]
    return out


def derealify_comps(mat, field, N, n):
    """Inverse of realify_comps, reading the first block column."""
    mat = np.asarray(mat, dtype=np.float64)
    d = field_dim(field)
    if mat.shape[-2] != d * N or mat.shape[-1] < n:
        raise ShapeMismatchError("realified shape does not match (N, n)")
    comps = np.zeros(mat.shape[:-2] + (N, n, 4))
    for c in range(d):
        comps[..., c] = mat[..., c * N : (c + 1) * N, :n]
    return comps


def realify_vector(vec, field, N):
    """Stack the components of a column, (..., N, 4) -> (..., d*N)."""
    d = field_dim(field)
    return np.concatenate([vec[..., c] for c in range(d)], axis=-1)


def derealify_vector(flat, field, N):
    """Unstack a realified column back to (..., N, 4)."""
    d = field_dim(field)
    comps = np.zeros(flat.shape[:-1] + (N, 4))
    for c in range(d):
        comps[..., c] = flat[..., c * N : (c + 1) * N]
    return comps


def unitary_deviation(U):
    """The defect norm of the frame property, ||U*U - I||."""
    G = U.adjoint() @ U
    return (G - FMatrix.identity(U.field, U.n)).norm


def realify(U, tol=1e-10):
    """Real orthogonal picture of a unitary matrix over R, C or H.

    Checks unitarity first; the map is a group homomorphism sending the
    adjoint to the transpose, so the output is orthogonal of size d*N.
    """
    if U.N != U.n:
        raise ShapeMismatchError("realify needs a square matrix")
    dev = unitary_deviation(U)
    if dev > tol * max(1, U.N):
        raise NotUnitaryError("input is not unitary", deviation=dev)
    return realify_comps(U.comps, U.field)
