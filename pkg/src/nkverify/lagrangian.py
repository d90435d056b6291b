"""Lagrangian subspaces of a pointwise nearly Kahler model.

A LagrangianSubspace is a half-dimensional subspace on which the
characteristic two-form omega(X, Y) = g(JX, Y) vanishes. Subspaces tangent
to an actual Lagrangian submanifold also annihilate the three-form
g(A(X, Y), Z); random_lagrangian only produces such realizable subspaces,
because isotropy alone does not survive the tangency checks (the span of
e2, e4, e6 on the six-sphere is omega-isotropic yet A(e2, e4) = e6 is
tangent to it).

The second-fundamental-form calculus works on the linear space of totally
symmetric C-tensors: geometric C's are only computable in the invariant
homogeneous setting, everywhere else the constrained C-space stands in for
"all possible second fundamental forms", which is exactly the
quantification the minimality statements need.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
import scipy.optimize

from .errors import (
    Cyc2Violated,
    DimensionMismatch,
    NotDimension6,
    NotLagrangian,
    NotStrict,
    RNotReducing,
    SpectraOverlap,
    TorsionNotTangential,
)
from .linalg import (
    gram_schmidt,
    matrix_rank,
    nullspace,
    random_orthogonal,
    subspace_intersection,
)
from .model import GROUP_TOL, NKModel, r_operator, torsion, type_constant
from .report import CheckReport, all_passed, make_check

R_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class LagrangianSubspace:
    model: NKModel
    basis: np.ndarray  # (dim, n) orthonormal columns

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def normal_basis(self) -> np.ndarray:
        return self.model.J @ self.basis


def make_lagrangian(m: NKModel, spanning, tol: float | None = None) -> LagrangianSubspace:
    """Orthonormalize spanning vectors and verify omega vanishes on them."""
    tol = m.tol if tol is None else tol
    spanning = np.asarray(spanning, dtype=float)
    if spanning.ndim != 2:
        spanning = np.column_stack(list(spanning))
    if spanning.shape[0] != m.dim:
        spanning = spanning.T
    if spanning.shape != (m.dim, m.n):
        raise DimensionMismatch(
            f"expected {m.n} spanning vectors of dimension {m.dim}, "
            f"got shape {spanning.shape}")
    basis = gram_schmidt(spanning)
    om = basis.T @ m.J @ basis
    worst = np.abs(om).max()
    if worst > tol:
        i, j = np.unravel_index(np.abs(om).argmax(), om.shape)
        raise NotLagrangian(
            f"omega(x_{j}, x_{i}) = {om[i, j]:.6e} on the orthonormalized basis")
    return LagrangianSubspace(model=m, basis=basis)


def lemma1_check(L: LagrangianSubspace) -> list[CheckReport]:
    """Tangency pattern of A on tangent/normal slots of a Lagrangian."""
    m = L.model
    X = L.basis
    JX = m.J @ X
    lag1 = np.einsum("ai,bj,abc,ck->ijk", X, X, m.A, X)
    lag2 = np.einsum("ai,bj,abc,ck->ijk", JX, JX, m.A, X)
    lag3 = np.einsum("ai,bj,abc,ck->ijk", X, JX, m.A, JX)
    return [
        make_check("lag1", "A(X, Y) normal for tangent X, Y",
                   np.abs(lag1).max(), 100 * m.tol),
        make_check("lag2", "A(U, V) normal for normal U, V",
                   np.abs(lag2).max(), 100 * m.tol),
        make_check("lag3", "A(X, U) tangent for mixed slots",
                   np.abs(lag3).max(), 100 * m.tol),
    ]


def is_realizable(L: LagrangianSubspace) -> bool:
    return all_passed(lemma1_check(L))


# ---------------------------------------------------------------------------
# random sampling of realizable Lagrangian subspaces
# ---------------------------------------------------------------------------

def random_lagrangian(m: NKModel, seed) -> LagrangianSubspace:
    """Random realizable Lagrangian subspace.

    Strategy by structure: flat models take a greedy isotropic basis;
    strict six-dimensional models close a random isotropic pair with
    J A(X1, X2); products sample factorwise; twistor-type models pick a
    vertical direction W and quaternionically orthogonal (x, T(W,.)x/kappa)
    pairs. Anything else falls back to a least-squares retraction onto the
    tangency constraints. The returned basis is mixed by a random rotation
    so downstream splitting logic cannot rely on its ordering.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    basis = _sample_basis(m, rng)
    basis = basis @ random_orthogonal(rng, basis.shape[1])
    return make_lagrangian(m, basis)


def _sample_basis(m: NKModel, rng) -> np.ndarray:
    if "factors" in m.aux:
        m1, m2 = m.aux["factors"]
        b1 = _sample_basis(m1, rng)
        b2 = _sample_basis(m2, rng)
        out = np.zeros((m.dim, m.n))
        out[: m1.dim, : m1.n] = b1
        out[m1.dim:, m1.n:] = b2
        return out
    if np.abs(m.A).max() <= m.tol:
        return _greedy_isotropic(m, rng)
    tw = m.aux.get("twistor")
    if tw is not None and tw["n"] > 1:
        return _twistor_basis(m, rng)
    if m.dim == 6:
        return _strict6_basis(m, rng)
    return _retracted_basis(m, rng)


def _greedy_isotropic(m: NKModel, rng) -> np.ndarray:
    cols = []
    for _ in range(m.n):
        for _ in range(50):
            v = rng.standard_normal(m.dim)
            for u in cols:
                v -= (u @ v) * u
                ju = m.J @ u
                v -= (ju @ v) * ju
            nrm = np.linalg.norm(v)
            if nrm > 1e-6:
                cols.append(v / nrm)
                break
        else:
            raise NotLagrangian("greedy isotropic construction ran out of directions")
    return np.column_stack(cols)


def _strict6_basis(m: NKModel, rng) -> np.ndarray:
    for _ in range(50):
        x1 = rng.standard_normal(6)
        x1 /= np.linalg.norm(x1)
        x2 = rng.standard_normal(6)
        for u in (x1, m.J @ x1):
            x2 -= (u @ x2) * u
        nrm = np.linalg.norm(x2)
        if nrm < 1e-6:
            continue
        x2 /= nrm
        w = m.J @ np.einsum("i,j,ijk->k", x1, x2, m.A)
        nrm = np.linalg.norm(w)
        if nrm < 1e-8:
            continue
        return gram_schmidt(np.column_stack((x1, x2, w / nrm)))
    raise NotLagrangian("could not complete a Lagrangian triple")


def _twistor_basis(m: NKModel, rng) -> np.ndarray:
    tw = m.aux["twistor"]
    n, kappa, h = tw["n"], tw["kappa"], 4 * tw["n"]
    T = np.einsum("kl,ijl->ijk", -m.J, m.A)
    t_angle = rng.uniform(0.0, 2.0 * np.pi)
    w_full = np.zeros(m.dim)
    w_full[h] = np.cos(t_angle)
    w_full[h + 1] = np.sin(t_angle)
    jw = np.einsum("w,wba->ab", w_full, T[:, :h, :h]) / kappa
    i_mat = m.J[:h, :h]
    kw = i_mat @ jw
    cols: list[np.ndarray] = []
    for _ in range(n):
        for _ in range(50):
            v = rng.standard_normal(h)
            for u in cols:
                for img in (u, i_mat @ u, jw @ u, kw @ u):
                    v -= (img @ v) * img
            nrm = np.linalg.norm(v)
            if nrm > 1e-6:
                break
        else:
            raise NotLagrangian("quaternionic pair construction failed")
        x = v / nrm
        cols.extend([x, jw @ x])
    out = np.zeros((m.dim, m.n))
    for i, c in enumerate(cols):
        out[:h, i] = c
    out[:, -1] = w_full
    return gram_schmidt(out)


def _retracted_basis(m: NKModel, rng) -> np.ndarray:
    """Least-squares retraction of a random isotropic plane onto the
    A-tangency constraints, in the symmetric-matrix chart of the
    Lagrangian Grassmannian."""
    n = m.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    for _ in range(20):
        x0 = _greedy_isotropic(m, rng)
        jx0 = m.J @ x0

        def unpack(vec):
            s = np.zeros((n, n))
            k = 0
            for i in range(n):
                for j in range(i, n):
                    s[i, j] = s[j, i] = vec[k]
                    k += 1
            return s

        def resid(vec):
            s = unpack(vec)
            y = gram_schmidt(x0 + jx0 @ s)
            vals = np.einsum("ai,bj,abc,ck->ijk", y, y, m.A, y)
            return np.array([vals[i, j, k] for i, j in pairs for k in range(n)])

        try:
            sol = scipy.optimize.least_squares(
                resid, np.zeros(n * (n + 1) // 2), xtol=1e-15, ftol=1e-15,
                gtol=1e-15, max_nfev=400)
        except DimensionMismatch:
            continue
        if np.abs(sol.fun).max() < 10 * m.tol:
            return gram_schmidt(x0 + jx0 @ unpack(sol.x))
    raise NotLagrangian("retraction onto the tangency constraints failed")


# ---------------------------------------------------------------------------
# C-tensor calculus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CTensor:
    """Totally symmetric cubic form C(X, Y, Z) = <II(X, Y), JZ> on L."""

    entries: np.ndarray  # (n, n, n)


def c_from_invariant(tss, L_m) -> tuple[CTensor, list[CheckReport]]:
    """Second fundamental form of an invariant Lagrangian subalgebra;
    delegates to the homogeneous machinery."""
    from .homogeneous import invariant_second_fundamental

    C, reports = invariant_second_fundamental(tss, L_m)
    return CTensor(entries=C), reports


def check_c_symmetry(C: CTensor, tol: float = 1e-9) -> CheckReport:
    e = C.entries
    res = max(
        np.abs(e - e.transpose(1, 0, 2)).max(),
        np.abs(e - e.transpose(0, 2, 1)).max(),
        np.abs(e - e.transpose(2, 1, 0)).max(),
    )
    return make_check("c-symmetry", "C(X, Y, Z) is totally symmetric", res, tol)


def tangential_torsion(L: LagrangianSubspace) -> tuple[np.ndarray, float]:
    """Torsion restricted to L, with the normal leakage it incurs."""
    m = L.model
    T = np.einsum("kl,ijl->ijk", -m.J, m.A)
    X = L.basis
    t_l = np.einsum("ai,bj,abc,ck->ijk", X, X, T, X)
    leak = np.einsum("ai,bj,abc,ck->ijk", X, X, T, m.J @ X)
    return t_l, float(np.abs(leak).max())


@dataclass(frozen=True)
class TraceTensors:
    alpha: np.ndarray  # alpha(X, Y) = sum_i C(e_i, X, T(e_i, Y))
    beta: np.ndarray   # beta(X, Y, Z) = sum_i C(T(e_i, X), Y, T(e_i, Z))
    precondition_residual: float


def trace_tensors(C: CTensor, T_L: np.ndarray,
                  leak: float = 0.0, tol: float = 1e-9) -> TraceTensors:
    if leak > 100 * tol:
        raise TorsionNotTangential(
            f"torsion leaves the subspace by {leak:.3e}")
    c = C.entries
    alpha = np.einsum("ixw,iyw->xy", c, T_L)
    beta = np.einsum("ixw,wyv,izv->xyz", T_L, c, T_L)
    return TraceTensors(alpha=alpha, beta=beta, precondition_residual=leak)


def mean_curvature_form(C: CTensor) -> np.ndarray:
    """h(Z) = sum_i C(e_i, e_i, Z) = <H, JZ>."""
    return np.einsum("iiz->z", C.entries)


def cyc2_residual(C: CTensor, T_L: np.ndarray) -> float:
    c = C.entries
    r = (np.einsum("xyw,zvw->xyzv", c, T_L)
         + np.einsum("xzw,vyw->xyzv", c, T_L)
         + np.einsum("xvw,yzw->xyzv", c, T_L))
    return float(np.abs(r).max())


def check_cyclic_identities(C: CTensor, T_L: np.ndarray,
                            tol: float = 1e-9) -> list[CheckReport]:
    """Trace identities that follow from the cyclic coupling of C and T."""
    pre = cyc2_residual(C, T_L)
    if pre > 100 * tol:
        raise Cyc2Violated(
            f"input C violates the cyclic coupling identity by {pre:.3e}")
    tt = trace_tensors(C, T_L, tol=tol)
    alpha, beta = tt.alpha, tt.beta
    h = mean_curvature_form(C)
    mean = alpha - alpha.T - np.einsum("w,xyw->xy", h, T_L)
    beta_sym = beta - beta.transpose(2, 1, 0)
    alpha_of_t = np.einsum("yxw,wz->xyz", T_L, alpha)
    beta_alpha = beta - beta.transpose(1, 0, 2) - alpha_of_t
    cyc = np.einsum("xyw,wz->xyz", T_L, alpha)
    beta2 = cyc + cyc.transpose(1, 2, 0) + cyc.transpose(2, 0, 1)
    return [
        make_check("cyc2", "C(X,Y,T(Z,V)) + C(X,Z,T(V,Y)) + C(X,V,T(Y,Z)) = 0",
                   pre, tol),
        make_check("cyc-mean", "alpha(X,Y) - alpha(Y,X) = h(T(X,Y))",
                   np.abs(mean).max(), tol),
        make_check("cyc-beta-symmetric", "beta(X,Y,Z) = beta(Z,Y,X)",
                   np.abs(beta_sym).max(), tol),
        make_check("cyc-beta-alpha",
                   "beta(X,Y,Z) = beta(Y,X,Z) + alpha(T(Y,X), Z)",
                   np.abs(beta_alpha).max(), tol),
        make_check("cyc-beta2",
                   "alpha(T(X,Y),Z) + alpha(T(Y,Z),X) + alpha(T(Z,X),Y) = 0",
                   np.abs(beta2).max(), tol),
    ]


# ---------------------------------------------------------------------------
# the linear space of admissible C-tensors
# ---------------------------------------------------------------------------

def sym_multisets(n: int) -> list[tuple[int, int, int]]:
    return list(combinations_with_replacement(range(n), 3))


def sym_coord_index(n: int) -> dict[tuple[int, int, int], int]:
    return {ms: k for k, ms in enumerate(sym_multisets(n))}


def tensor_from_coords(n: int, coords) -> np.ndarray:
    out = np.zeros((n, n, n))
    for ms, k in sym_coord_index(n).items():
        i, j, l = ms
        val = coords[k]
        for p in {(i, j, l), (i, l, j), (j, i, l), (j, l, i), (l, i, j), (l, j, i)}:
            out[p] = val
    return out


def cyc2_constraint_rows(T_L: np.ndarray) -> np.ndarray:
    """Rows of the cyclic coupling identity over symmetric-C coordinates."""
    n = T_L.shape[0]
    index = sym_coord_index(n)
    rows = []
    for x in range(n):
        for y in range(n):
            for z in range(n):
                for v in range(n):
                    row = np.zeros(len(index))
                    for w in range(n):
                        row[index[tuple(sorted((x, y, w)))]] += T_L[z, v, w]
                        row[index[tuple(sorted((x, z, w)))]] += T_L[v, y, w]
                        row[index[tuple(sorted((x, v, w)))]] += T_L[y, z, w]
                    rows.append(row)
    return np.array(rows)


def mean_curvature_rows(n: int) -> np.ndarray:
    """One row per direction z: the functional C -> sum_i C(e_i, e_i, z)."""
    index = sym_coord_index(n)
    rows = np.zeros((n, len(index)))
    for z in range(n):
        for i in range(n):
            rows[z, index[tuple(sorted((i, i, z)))]] += 1.0
    return rows


def alpha_functional_matrix(T_L: np.ndarray) -> np.ndarray:
    """Matrix of the map (symmetric C) -> alpha-trace, one row per (x, y)."""
    n = T_L.shape[0]
    index = sym_coord_index(n)
    rows = np.zeros((n * n, len(index)))
    for x in range(n):
        for y in range(n):
            r = rows[x * n + y]
            for i in range(n):
                for w in range(n):
                    r[index[tuple(sorted((i, x, w)))]] += T_L[i, y, w]
    return rows


@dataclass(frozen=True)
class AdmissibleCSpace:
    n: int
    constraints: np.ndarray       # cyc2 rows over symmetric coordinates
    coord_basis: np.ndarray       # (N, dim) nullspace basis as columns
    basis: list[np.ndarray]       # the same basis as full (n,n,n) tensors

    @property
    def dim(self) -> int:
        return self.coord_basis.shape[1]


def admissible_c_space(T_L: np.ndarray) -> AdmissibleCSpace:
    """Solution space of {C totally symmetric, cyclic coupling identity}."""
    n = T_L.shape[0]
    rows = cyc2_constraint_rows(T_L)
    coords = nullspace(rows)
    tensors = [tensor_from_coords(n, coords[:, k]) for k in range(coords.shape[1])]
    return AdmissibleCSpace(n=n, constraints=rows, coord_basis=coords,
                            basis=tensors)


def functional_in_rowspace(constraints: np.ndarray, rows: np.ndarray) -> bool:
    """Exact integer rank agreement: rank(M) == rank([M; rows])."""
    base = matrix_rank(constraints)
    aug = matrix_rank(np.vstack([constraints, rows]))
    return base == aug


# ---------------------------------------------------------------------------
# minimality of Lagrangians in strict six-dimensional models
# ---------------------------------------------------------------------------

def theorem_a_check(m: NKModel, L: LagrangianSubspace,
                    tol: float = 1e-9) -> list[CheckReport]:
    """Orientability and minimality, as a constrained-linear-system fact.

    (a) tau restricted to L is a volume form whose coefficient a satisfies
        a^2 = alpha_type;
    (b) the alpha-trace annihilates every totally symmetric C;
    (c) the mean-curvature functional lies in the row space of the cyclic
        coupling constraints, so every admissible C is trace-free.
    """
    rop = r_operator(m)
    if m.dim != 6:
        raise NotDimension6(f"model dimension is {m.dim}, need 6")
    if not rop.is_strict:
        raise NotStrict("model has Kahler directions (ker r is nontrivial)")
    reports = lemma1_check(L)
    t_l, leak = tangential_torsion(L)
    reports.append(make_check(
        "torsion-tangential", "T(X, Y) tangent to L for tangent X, Y",
        leak, 100 * m.tol))
    tc = type_constant(m)
    eps = _levi_civita(3)
    a = float(t_l[0, 1, 2])
    reports.append(make_check(
        "tau-volume-form", "tau|L = a vol(L)",
        np.abs(t_l - a * eps).max(), 1e-7))
    reports.append(make_check(
        "type-constant-match", "a^2 = alpha_type",
        abs(a * a - tc.alpha_type), 1e-7))
    reports.append(make_check(
        "alpha-trace-vanishes", "alpha = 0 for every symmetric C",
        np.abs(alpha_functional_matrix(t_l)).max(), tol))
    space = admissible_c_space(t_l)
    h_rows = mean_curvature_rows(3)
    contained = functional_in_rowspace(space.constraints, h_rows)
    reports.append(make_check(
        "mean-curvature-in-rowspace",
        "trace functional lies in the cyclic-constraint row space",
        0.0 if contained else 1.0, 0.5))
    worst = 0.0
    for C in space.basis:
        worst = max(worst, np.abs(np.einsum("iiz->z", C)).max())
    reports.append(make_check(
        "admissible-trace-free", "h = 0 on the admissible C-space",
        worst, tol))
    return reports


def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    if n == 3:
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            eps[i, j, k] = 1.0
            eps[i, k, j] = -1.0
    return eps


# ---------------------------------------------------------------------------
# splitting by the r-operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitByR:
    kahler_part: np.ndarray       # basis of L intersect ker(r)
    strict_part: np.ndarray       # basis of L intersect ker(r)^perp
    group_dims: list[tuple[float, int, int]]  # (eigenvalue, mult, dim in TL)
    reports: list[CheckReport]


def split_by_r(L: LagrangianSubspace, group_tol: float = GROUP_TOL) -> SplitByR:
    """Intersect TL with the r-eigenspaces.

    Tangent and normal spaces must be r-invariant and every eigenvalue
    group of multiplicity 2k must meet TL in dimension exactly k; a
    violation raises RNotReducing, which no realizable input should do.
    """
    m = L.model
    rop = r_operator(m, group_tol=group_tol)
    X = L.basis
    leak = float(np.abs((m.J @ X).T @ rop.r @ X).max())
    reports = [make_check(
        "r-reduces-l", "r(TL) in TL and r(normal) in normal", leak, R_LEAK_TOL)]
    if leak > R_LEAK_TOL:
        raise RNotReducing(
            f"r mixes tangent and normal directions by {leak:.3e}")
    group_dims = []
    kahler_cols = []
    strict_cols = []
    law_residual = 0.0
    for grp in rop.spectrum:
        inter = subspace_intersection(grp.basis, X)
        k = inter.shape[1]
        group_dims.append((grp.value, grp.multiplicity, k))
        law_residual = max(law_residual, abs(k - grp.multiplicity / 2.0))
        if abs(grp.value) <= group_tol:
            kahler_cols.append(inter)
        else:
            strict_cols.append(inter)
    reports.append(make_check(
        "eigenvalue-dimension-law",
        "dim(Eig(lambda) & TL) = multiplicity / 2 for every eigenvalue",
        law_residual, 0.25))
    lk = np.column_stack(kahler_cols) if kahler_cols else np.zeros((m.dim, 0))
    ls = np.column_stack(strict_cols) if strict_cols else np.zeros((m.dim, 0))
    if lk.shape[1]:
        lk = gram_schmidt(lk)
    if ls.shape[1]:
        ls = gram_schmidt(ls)
    reports.append(make_check(
        "kahler-dimension", "dim L_K = dim ker(r) / 2",
        abs(lk.shape[1] - rop.kernel_dim / 2.0), 0.25))
    return SplitByR(kahler_part=lk, strict_part=ls, group_dims=group_dims,
                    reports=reports)


def split_by_spectrum(L: LagrangianSubspace, m1: NKModel, m2: NKModel,
                      group_tol: float = GROUP_TOL):
    """Split a Lagrangian of a product along factors with disjoint r-spectra.

    Returns the two factor Lagrangians (as LagrangianSubspace of m1, m2)
    plus reports. Raises SpectraOverlap when an eigenvalue is shared.
    """
    r1 = r_operator(m1, group_tol=group_tol)
    r2 = r_operator(m2, group_tol=group_tol)
    for g1 in r1.spectrum:
        for g2 in r2.spectrum:
            if abs(g1.value - g2.value) <= group_tol:
                raise SpectraOverlap(
                    f"factors share the eigenvalue {g1.value:.6g}")
    m = L.model
    d1 = m1.dim
    if m.dim != d1 + m2.dim:
        raise DimensionMismatch("L does not live in the product of m1 and m2")
    e1 = np.zeros((m.dim, d1))
    e1[:d1] = np.eye(d1)
    e2 = np.zeros((m.dim, m2.dim))
    e2[d1:] = np.eye(m2.dim)
    b1 = subspace_intersection(e1, L.basis)
    b2 = subspace_intersection(e2, L.basis)
    reports = [
        make_check("split-dimensions",
                   "L = (L & V1) + (L & V2) with Lagrangian factors",
                   abs(b1.shape[1] - m1.n) + abs(b2.shape[1] - m2.n), 0.25),
    ]
    L1 = make_lagrangian(m1, b1[:d1])
    L2 = make_lagrangian(m2, b2[d1:])
    reports.extend(r for r in lemma1_check(L1))
    reports.extend(r for r in lemma1_check(L2))
    return L1, L2, reports
