"""Three-symmetric spaces from Lie algebra data.

A Lie algebra with an order-3 automorphism splits as h + m, where h is the
fixed algebra and m the image of the algebraic projector (2 - s - s^2)/3.
The almost complex structure on m is recovered from the real identity
s|m = -1/2 Id + (sqrt(3)/2) J, and a naturally reductive choice of metric B
turns the data into a pointwise nearly Kahler model with
A(X, Y) = -J [X, Y]_m.

Conventions: su(2) is realized with [e_i, e_j] = 2 eps_ijk e_k; structure
constants arrays satisfy c[i, j, k] = coefficient of e_k in [e_i, e_j].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import model as model_mod
from .errors import (
    DegenerateDecomposition,
    NotAutomorphism,
    NotLagrangian,
    NotNaturallyReductive,
    NotOrderThree,
    NotSubalgebra,
    UsageError,
)
from .linalg import DEFAULT_TOL, column_space, gram_schmidt, nullspace
from .report import CheckReport, make_check


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants plus the differential of an order-3 symmetry."""

    dim: int
    c: np.ndarray        # (d, d, d)
    s_star: np.ndarray   # (d, d)
    B_g: np.ndarray | None = None  # optional invariant form on all of g

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.c)


def lie_algebra_from_dict(doc: dict) -> LieAlgebraData:
    try:
        dim = doc["dim"]
        c = np.array(doc["c"], dtype=float)
        s = np.array(doc["s_star"], dtype=float)
        b = np.array(doc["B_m"], dtype=float) if "B_m" in doc else None
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed structure-constant document: {exc}") from None
    if not isinstance(dim, int) or dim <= 0:
        raise UsageError(f"'dim' must be a positive integer, got {dim!r}")
    if c.shape != (dim, dim, dim):
        raise UsageError(f"'c' must be a {dim}^3 array")
    if s.shape != (dim, dim):
        raise UsageError(f"'s_star' must be a {dim}x{dim} matrix")
    if b is not None and b.shape != (dim, dim):
        raise UsageError(f"'B_m' must be a {dim}x{dim} matrix")
    return LieAlgebraData(dim=dim, c=c, s_star=s, B_g=b)


def load_lie_algebra(path) -> LieAlgebraData:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read structure file {path}: {exc}") from None
    return lie_algebra_from_dict(doc)


def killing_form(c) -> np.ndarray:
    """K(X, Y) = tr(ad X ad Y) from structure constants."""
    return np.einsum("ikl,jlk->ij", c, c)


# ---------------------------------------------------------------------------
# built-in algebras
# ---------------------------------------------------------------------------

def su2_structure() -> np.ndarray:
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 2.0
        c[j, i, k] = -2.0
    return c

def su2_cubed() -> LieAlgebraData:
    """su(2)^3 with the cyclic factor permutation (X1,X2,X3)->(X3,X1,X2)."""
    c3 = su2_structure()
    d = 9
    c = np.zeros((d, d, d))
    for f in range(3):
        sl = slice(3 * f, 3 * f + 3)
        c[sl, sl, sl] = c3
    s = np.zeros((d, d))
    s[0:3, 6:9] = np.eye(3)
    s[3:6, 0:3] = np.eye(3)
    s[6:9, 3:6] = np.eye(3)
    return LieAlgebraData(dim=d, c=c, s_star=s)


def so5_order3() -> LieAlgebraData:
    """so(5) with the inner order-3 automorphism fixing u(2).

    The conjugating rotation acts by angle 2*pi/3 on two coordinate planes
    of R^5; the fixed algebra is u(2) (dim 4), leaving a six-dimensional m.
    """
    basis = []
    for a in range(5):
        for b in range(a + 1, 5):
            x = np.zeros((5, 5))
            x[a, b] = 1.0
            x[b, a] = -1.0
            basis.append(x)
    d = len(basis)  # 10
    norm = 2.0  # tr(X_ab X_ab^T)

    def coords(x):
        return np.array([np.trace(bk.T @ x) / norm for bk in basis])

    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            c[i, j] = coords(basis[i] @ basis[j] - basis[j] @ basis[i])
    th = 2.0 * np.pi / 3.0
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    r = np.eye(5)
    r[0:2, 0:2] = rot
    r[2:4, 2:4] = rot
    s = np.zeros((d, d))
    for j in range(d):
        s[:, j] = coords(r @ basis[j] @ r.T)
    return LieAlgebraData(dim=d, c=c, s_star=s)


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeSymmetricSpace:
    lie_dim: int
    c: np.ndarray
    s_star: np.ndarray
    h_basis: np.ndarray      # (d, dim_h), orthonormal columns
    m_basis: np.ndarray      # (d, dim_m), orthonormal columns
    m_projector: np.ndarray  # (d, d) reductive projector onto m along h
    B: np.ndarray            # metric on m in m_basis coordinates
    J: np.ndarray            # complex structure on m in m_basis coordinates
    bracket_m: np.ndarray    # (dm, dm, dm): m-projected bracket in m coords
    tol: float
    reports: list[CheckReport] = field(default_factory=list, compare=False)

    @property
    def dim_h(self) -> int:
        return self.h_basis.shape[1]

    @property
    def dim_m(self) -> int:
        return self.m_basis.shape[1]

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def project_m(self, x) -> np.ndarray:
        return self.m_projector @ x

    def m_coords(self, x) -> np.ndarray:
        return self.m_basis.T @ x


def decompose(data: LieAlgebraData, B_g=None, tol: float = DEFAULT_TOL) -> ThreeSymmetricSpace:
    """Split g = h + m under the order-3 automorphism and extract J and B."""
    d, c, s = data.dim, data.c, data.s_star
    res_order = np.abs(np.linalg.matrix_power(s, 3) - np.eye(d)).max()
    if res_order > tol:
        raise NotOrderThree(f"s^3 differs from identity by {res_order:.3e}")
    lhs = np.einsum("lk,ijk->ijl", s, c)
    rhs = np.einsum("ai,bj,abl->ijl", s, s, c)
    res_auto = np.abs(lhs - rhs).max()
    if res_auto > tol:
        raise NotAutomorphism(f"s fails s[X,Y] = [sX,sY] by {res_auto:.3e}")

    p_m = (2.0 * np.eye(d) - s - s @ s) / 3.0
    h_basis = nullspace(s - np.eye(d))
    m_basis = column_space(p_m)
    if m_basis.shape[1] == 0:
        raise DegenerateDecomposition(
            "automorphism acts trivially: m = 0 carries no complex structure")
    if h_basis.shape[1] + m_basis.shape[1] != d:
        raise DegenerateDecomposition("h and m do not span the algebra")

    reports = []
    # reductivity [h, m] <= m
    res = 0.0
    for zi in range(h_basis.shape[1]):
        for mi in range(m_basis.shape[1]):
            w = data.bracket(h_basis[:, zi], m_basis[:, mi])
            res = max(res, np.abs(w - p_m @ w).max())
    reports.append(make_check("reductive", "[h, m] contained in m", res, 10 * tol))

    s_m = m_basis.T @ s @ m_basis
    j_m = (2.0 / np.sqrt(3.0)) * (s_m + 0.5 * np.eye(m_basis.shape[1]))
    reports.append(make_check(
        "j-from-s", "s|m = -1/2 Id + (sqrt(3)/2) J with J^2 = -Id",
        np.abs(j_m @ j_m + np.eye(m_basis.shape[1])).max(), 10 * tol))

    if B_g is None:
        B_g = data.B_g
    if B_g is None:
        B_g = -killing_form(c)
    B_g = np.asarray(B_g, dtype=float)
    b_m = m_basis.T @ B_g @ m_basis
    model_mod._require_positive_definite(b_m, tol)
    reports.append(make_check(
        "b-s-invariant", "B(sX, sY) = B(X, Y)",
        np.abs(s_m.T @ b_m @ s_m - b_m).max(), 10 * tol))
    bracket_m = np.zeros((m_basis.shape[1],) * 3)
    for a in range(m_basis.shape[1]):
        for b in range(m_basis.shape[1]):
            w = data.bracket(m_basis[:, a], m_basis[:, b])
            bracket_m[a, b] = m_basis.T @ (p_m @ w)
    res = 0.0
    for zi in range(h_basis.shape[1]):
        ad_z = np.zeros((m_basis.shape[1],) * 2)
        for b in range(m_basis.shape[1]):
            w = data.bracket(h_basis[:, zi], m_basis[:, b])
            ad_z[:, b] = m_basis.T @ (p_m @ w)
        res = max(res, np.abs(ad_z.T @ b_m + b_m @ ad_z).max())
    reports.append(make_check(
        "b-h-invariant", "B([Z,X]_m, Y) + B(X, [Z,Y]_m) = 0 for Z in h",
        res, 10 * tol))
    reports.append(make_check(
        "b-j-compatible", "B(JX, JY) = B(X, Y)",
        np.abs(j_m.T @ b_m @ j_m - b_m).max(), 10 * tol))

    return ThreeSymmetricSpace(
        lie_dim=d, c=c, s_star=s, h_basis=h_basis, m_basis=m_basis,
        m_projector=p_m, B=b_m, J=j_m, bracket_m=bracket_m, tol=tol,
        reports=reports)


@dataclass(frozen=True)
class NaturalReductivityReport:
    residual: float
    passes: bool


def check_naturally_reductive(t: ThreeSymmetricSpace,
                              tol: float | None = None) -> NaturalReductivityReport:
    """Residual of B([X,Y]_m, Z) = B(X, [Y,Z]_m) over all m-basis triples."""
    tol = t.tol if tol is None else tol
    lhs = np.einsum("abk,kc->abc", t.bracket_m, t.B)
    rhs = np.einsum("ak,bck->abc", t.B, t.bracket_m)
    res = float(np.abs(lhs - rhs).max())
    return NaturalReductivityReport(residual=res, passes=res <= tol)


def to_nk_model(t: ThreeSymmetricSpace, name: str,
                tol: float = DEFAULT_TOL) -> model_mod.NKModel:
    """Pointwise model at the base point: g = B, A(X,Y) = -J [X,Y]_m."""
    nr = check_naturally_reductive(t)
    if not nr.passes:
        raise NotNaturallyReductive(
            f"decomposition is not naturally reductive (residual {nr.residual:.3e})")
    a_m = -np.einsum("kl,abl->abk", t.J, t.bracket_m)
    m = model_mod.from_frame(name, t.B, t.J, a_m, tol=tol, aux={"tss": t})
    model_mod.require_valid(m)
    return m


def base_point_connections(t: ThreeSymmetricSpace, x, y):
    """(Levi-Civita derivative, canonical-connection difference) at the base
    point: (1/2 [X,Y]_m, -1/2 [X,Y]_m), both in ambient algebra coordinates."""
    w = t.project_m(t.bracket(np.asarray(x, float), np.asarray(y, float)))
    return 0.5 * w, -0.5 * w


def invariant_second_fundamental(t: ThreeSymmetricSpace, L,
                                 tol: float | None = None):
    """C(X,Y,Z) = 1/2 B([X,Y]_m, JZ) on a Lagrangian subalgebra L of m.

    L holds column vectors in m-basis coordinates. For a genuine Lagrangian
    subalgebra the tensor vanishes identically: invariant Lagrangian orbits
    are totally geodesic.
    """
    tol = t.tol if tol is None else tol
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != t.dim_m:
        raise UsageError(f"L must be a {t.dim_m} x k coordinate matrix")
    L = gram_schmidt(L, g=t.B)
    k = L.shape[1]
    if 2 * k != t.dim_m:
        raise NotLagrangian(f"subspace has dimension {k}, expected {t.dim_m // 2}")
    for a in range(k):
        for b in range(k):
            w = float(L[:, a] @ t.J.T @ t.B @ L[:, b])
            if abs(w) > tol:
                raise NotLagrangian(
                    f"omega(x_{a}, x_{b}) = {w:.3e} exceeds tolerance")
    # subalgebra condition [L, L]_m <= L, measured B-orthogonally
    proj = L @ L.T @ t.B
    res_sub = 0.0
    brackets = np.zeros((k, k, t.dim_m))
    for a in range(k):
        for b in range(k):
            w = np.einsum("i,j,ijk->k", L[:, a], L[:, b], t.bracket_m)
            brackets[a, b] = w
            leak = w - proj @ w
            res_sub = max(res_sub, np.sqrt(leak @ t.B @ leak))
    if res_sub > 100 * tol:
        raise NotSubalgebra(
            f"[L, L]_m leaves L by {res_sub:.3e}: not an invariant subspace")
    C = 0.5 * np.einsum("abi,ik,kc->abc", brackets, t.B, t.J @ L)
    reports = [
        make_check("invariant-subalgebra", "[L, L]_m contained in L",
                   res_sub, 100 * tol),
        make_check("totally-geodesic", "C(X,Y,Z) = 1/2 B([X,Y]_m, JZ) = 0",
                   np.abs(C).max(), 100 * tol),
    ]
    return C, reports


# ---------------------------------------------------------------------------
# the S^3 x S^3 model with its adapted frames
# ---------------------------------------------------------------------------

def su2_pair_embedding() -> np.ndarray:
    """Columns: m-vectors (in su(2)^3 coordinates) of the identification
    su(2)+su(2) ~ m, (U, V) -> ((2U - V)/3, (2V - U)/3, -(U + V)/3)."""
    cols = []
    for i in range(3):
        u = np.zeros(3)
        u[i] = 1.0
        cols.append(np.concatenate((2 * u, -u, -u)) / 3.0)
    for i in range(3):
        v = np.zeros(3)
        v[i] = 1.0
        cols.append(np.concatenate((-v, 2 * v, -v)) / 3.0)
    return np.column_stack(cols)


def build_s3s3_model(scale: float = 1.0, tol: float = DEFAULT_TOL) -> model_mod.NKModel:
    data = su2_cubed()
    b_g = scale * (-killing_form(data.c))
    tss = decompose(data, B_g=b_g, tol=tol)
    m = to_nk_model(tss, name=f"s3s3:{scale:g}", tol=tol)
    frame = m.aux["frame"]  # onb columns in m-basis coordinates
    finv = np.linalg.inv(frame)
    emb = su2_pair_embedding()
    # model coordinates of the e-hat / f-hat frame of su(2)+su(2)
    m.aux["su2_pair_frame"] = finv @ tss.m_basis.T @ emb
    m.aux["kind"] = "s3s3"
    m.aux["scale"] = scale
    return m


def build_cp3_model(tol: float = DEFAULT_TOL) -> model_mod.NKModel:
    """Strict six-dimensional model from so(5)/u(2) (the twistor space CP^3)."""
    data = so5_order3()
    tss = decompose(data, tol=tol)
    m = to_nk_model(tss, name="cp3", tol=tol)
    m.aux["kind"] = "cp3"
    return m
