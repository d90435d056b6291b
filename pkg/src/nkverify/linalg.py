"""Dense linear and multilinear algebra kernel.

Everything downstream works with plain numpy arrays: vectors are 1-d,
bilinear forms and endomorphisms are (d, d), trilinear objects are
(d, d, d) with entries[i, j, k] = value on the basis triple (e_i, e_j, e_k).
Dimensions stay small (d <= 14), so the symmetric eigensolver is a cyclic
Jacobi iteration chosen for robustness, not speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotSymmetric

DEFAULT_TOL = 1e-9

_JACOBI_SWEEPS = 60


def as_square(m, name="matrix"):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class SymEigResult:
    """Eigenvalues sorted ascending; eigenvectors as orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def sym_eigendecomposition(m, tol: float = DEFAULT_TOL) -> SymEigResult:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Raises NotSymmetric when max |m_ij - m_ji| > tol. The reconstruction
    residual ||V L V^T - m||_inf stays far below 100*tol for d <= 14.
    """
    a = as_square(m)
    d = a.shape[0]
    skew = np.abs(a - a.T).max() if d else 0.0
    if skew > tol:
        raise NotSymmetric(f"matrix is not symmetric: max |m - m^T| = {skew:.3e}")
    a = 0.5 * (a + a.T)
    v = np.eye(d)
    scale = max(1.0, np.abs(a).max() if d else 1.0)
    stop = 1e-15 * scale
    for _ in range(_JACOBI_SWEEPS):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= stop:
                    continue
                off = max(off, abs(apq))
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                row_p = c * a[p, :] - s * a[q, :]
                row_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = row_p, row_q
                col_p = c * a[:, p] - s * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = col_p, col_q
                a[p, q] = a[q, p] = 0.0
                vcol_p = c * v[:, p] - s * v[:, q]
                vcol_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = vcol_p, vcol_q
        if off <= stop:
            break
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return SymEigResult(values=values[order], vectors=v[:, order])


@dataclass(frozen=True)
class EigenGroup:
    value: float
    multiplicity: int
    basis: np.ndarray  # (d, multiplicity), orthonormal columns


def group_eigenvalues(e: SymEigResult, tol: float = DEFAULT_TOL) -> list[EigenGroup]:
    """Merge eigenvalues whose neighbours differ by at most tol.

    Multiplicities sum to d; each group carries the orthonormal basis of
    its summed eigenspace.
    """
    values, vectors = e.values, e.vectors
    d = len(values)
    groups: list[EigenGroup] = []
    start = 0
    for i in range(1, d + 1):
        if i == d or values[i] - values[i - 1] > tol:
            block = vectors[:, start:i]
            groups.append(
                EigenGroup(
                    value=float(np.mean(values[start:i])),
                    multiplicity=i - start,
                    basis=block,
                )
            )
            start = i
    return groups


def trilinear_eval(t, x, y, z) -> float:
    """Evaluate a (d, d, d) array as a trilinear form."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if t.ndim != 3 or t.shape[0] != t.shape[1] or t.shape[1] != t.shape[2]:
        raise DimensionMismatch(f"trilinear array has shape {t.shape}")
    if x.shape != (t.shape[0],) or y.shape != (t.shape[0],) or z.shape != (t.shape[0],):
        raise DimensionMismatch(
            f"vector shapes {x.shape}, {y.shape}, {z.shape} do not match dimension {t.shape[0]}"
        )
    return float(np.einsum("ijk,i,j,k->", t, x, y, z))


def gram_schmidt(vectors, g=None, tol: float = 1e-12) -> np.ndarray:
    """Orthonormalize the columns of `vectors` w.r.t. the metric g (default euclidean).

    Raises DimensionMismatch when the columns are dependent within tol.
    """
    v = np.array(vectors, dtype=float)
    if v.ndim != 2:
        raise DimensionMismatch("expected a matrix of column vectors")
    d, k = v.shape
    gm = np.eye(d) if g is None else as_square(g)
    out = np.zeros_like(v)
    for j in range(k):
        w = v[:, j].copy()
        for i in range(j):
            w -= (out[:, i] @ gm @ w) * out[:, i]
        # second pass for numerical orthogonality
        for i in range(j):
            w -= (out[:, i] @ gm @ w) * out[:, i]
        nrm = np.sqrt(w @ gm @ w)
        if nrm <= tol:
            raise DimensionMismatch(f"spanning vectors are dependent (column {j})")
        out[:, j] = w / nrm
    return out


def orthonormal_frame(g) -> np.ndarray:
    """Frame matrix F with F^T g F = I (Gram-Schmidt on the identity basis)."""
    gm = as_square(g, "metric")
    return gram_schmidt(np.eye(gm.shape[0]), g=gm)


def nullspace(a, rtol: float = 1e-11) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of a, by SVD."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    return scipy.linalg.null_space(a, rcond=rtol)


def column_space(a, rtol: float = 1e-11) -> np.ndarray:
    """Orthonormal basis (columns) of the range of a."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    u, s, _ = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * max(1.0, s[0] if len(s) else 1.0)))
    return u[:, :rank]


def subspace_intersection(b1, b2, thresh: float = 0.5) -> np.ndarray:
    """Basis of span(b1) & span(b2) via eigenvalues of the projector product.

    b1, b2 carry orthonormal columns. Eigenvectors of P1 P2 P1 with
    eigenvalue above thresh span the intersection; ties break by the
    deterministic ordering of the Jacobi output.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    p1 = b1 @ b1.T
    p2 = b2 @ b2.T
    m = p1 @ p2 @ p1
    eig = sym_eigendecomposition(0.5 * (m + m.T), tol=1e-8)
    cols = [eig.vectors[:, i] for i in range(len(eig.values)) if eig.values[i] > thresh]
    if not cols:
        return np.zeros((b1.shape[0], 0))
    raw = np.column_stack(cols)
    # project onto both subspaces to polish, then orthonormalize
    return gram_schmidt(p2 @ raw)


def matrix_rank(a, tol=None) -> int:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    return int(np.linalg.matrix_rank(a, tol=tol))


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish orthogonal matrix, deterministic for a given generator state."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def multi_indices(dim: int, degree: int) -> list[tuple[int, ...]]:
    return list(combinations(range(dim), degree))


@dataclass(frozen=True)
class ExteriorForm:
    """Alternating p-form stored on increasing multi-indices."""

    dim: int
    degree: int
    coeffs: np.ndarray  # length C(dim, degree), ordered like multi_indices()

    @classmethod
    def zero(cls, dim: int, degree: int) -> "ExteriorForm":
        return cls(dim, degree, np.zeros(len(multi_indices(dim, degree))))

    @classmethod
    def from_tensor(cls, t) -> "ExteriorForm":
        """Antisymmetrize a full tensor of rank p into increasing-index storage."""
        t = np.asarray(t, dtype=float)
        p = t.ndim
        dim = t.shape[0] if p else 0
        idx = multi_indices(dim, p)
        coeffs = np.zeros(len(idx))
        from itertools import permutations

        for pos, mi in enumerate(idx):
            val = 0.0
            for perm in permutations(range(p)):
                sign = _perm_sign(perm)
                val += sign * t[tuple(mi[q] for q in perm)]
            coeffs[pos] = val / _factorial(p)
        return cls(dim, p, coeffs)

    def __call__(self, *vectors) -> float:
        if len(vectors) != self.degree:
            raise DimensionMismatch(
                f"{self.degree}-form evaluated on {len(vectors)} vectors"
            )
        from itertools import permutations

        vs = [np.asarray(v, dtype=float) for v in vectors]
        total = 0.0
        for pos, mi in enumerate(multi_indices(self.dim, self.degree)):
            c = self.coeffs[pos]
            if c == 0.0:
                continue
            det = 0.0
            for perm in permutations(range(self.degree)):
                sign = _perm_sign(perm)
                prod = 1.0
                for slot, q in enumerate(perm):
                    prod *= vs[slot][mi[q]]
                det += sign * prod
            total += c * det
        return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _factorial(p: int) -> int:
    out = 1
    for i in range(2, p + 1):
        out *= i
    return out
