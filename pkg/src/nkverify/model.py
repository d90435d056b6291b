"""Pointwise nearly Kahler models and the structure-identity suite.

An NKModel is the value of (g, J, A = nabla J) at a single point, stored in
a g-orthonormal frame. The A-tensor is the only datum separating models:
flat Kahler space has A = 0, the six-sphere gets A from the octonion cross
product, S^3 x S^3 comes through the three-symmetric construction, and the
twistor family is built synthetically in its own module.

The operator r is computed purely algebraically from the Koto sum
    <rX, Y> = sum_i <A(X, e_i), A(Y, e_i)>
which avoids any curvature computation and is exact at a point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import octonion
from .errors import BadMetric, ModelInvalid, UsageError
from .linalg import (
    DEFAULT_TOL,
    EigenGroup,
    as_square,
    group_eigenvalues,
    orthonormal_frame,
    random_orthogonal,
    sym_eigendecomposition,
)
from .report import CheckReport, all_passed, make_check

GROUP_TOL = 1e-7  # eigenvalue clustering width for spectra


@dataclass(frozen=True)
class NKModel:
    """Pointwise (g, J, A) data in a g-orthonormal frame (so g = identity).

    A[i, j, :] holds the components of A(e_i, e_j). Values are immutable
    after construction; all operations on them are pure.
    """

    name: str
    g: np.ndarray
    J: np.ndarray
    A: np.ndarray
    tol: float = DEFAULT_TOL
    aux: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        g = as_square(self.g, "g")
        j = as_square(self.J, "J")
        a = np.asarray(self.A, dtype=float)
        d = g.shape[0]
        if d % 2 != 0:
            raise ModelInvalid(f"model dimension must be even, got {d}")
        if j.shape != (d, d) or a.shape != (d, d, d):
            raise ModelInvalid(
                f"inconsistent tensor shapes: g {g.shape}, J {j.shape}, A {a.shape}"
            )
        for arr in (g, j, a):
            arr.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "J", j)
        object.__setattr__(self, "A", a)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2


def from_frame(name, g, J, A, tol: float = DEFAULT_TOL, aux=None) -> NKModel:
    """Build a model from tensors in an arbitrary frame.

    The frame is Gram-Schmidt orthonormalized against g and all tensors are
    rewritten in the new frame, so every identity sweep downstream runs
    with g = identity.
    """
    g = as_square(g, "g")
    _require_positive_definite(g, tol)
    f = orthonormal_frame(g)
    finv = np.linalg.inv(f)
    j = finv @ as_square(J, "J") @ f
    a = np.einsum("ia,jb,ijk,ck->abc", f, f, np.asarray(A, dtype=float), finv)
    aux = dict(aux or {})
    aux["frame"] = f  # columns: orthonormal frame in the input coordinates
    return NKModel(name=name, g=np.eye(g.shape[0]), J=j, A=a, tol=tol, aux=aux)


def _require_positive_definite(g, tol):
    if np.abs(g - g.T).max() > tol:
        raise BadMetric("metric is not symmetric")
    try:
        np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError:
        raise BadMetric("metric is not positive definite") from None


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

def verify_model(m: NKModel) -> list[CheckReport]:
    """Run the pointwise structure identities; one report per identity."""
    _require_positive_definite(m.g, m.tol)
    d, J, A = m.dim, m.J, m.A
    eye = np.eye(d)
    reports = [
        make_check("j-squared", "J^2 = -Id",
                   np.abs(J @ J + eye).max(), m.tol),
        make_check("j-isometry", "g(JX, JY) = g(X, Y)",
                   np.abs(J.T @ m.g @ J - m.g).max(), m.tol),
        make_check("a-skew", "A(X, X) = 0",
                   np.abs(A + A.transpose(1, 0, 2)).max(), m.tol),
        make_check("a-cyclic", "g(A(X,Y), Z) antisymmetric under Y <-> Z",
                   np.abs(A + A.transpose(0, 2, 1)).max(), m.tol),
        make_check("a-j-anticommute", "A(JX, Y) = -J A(X, Y)",
                   np.abs(np.einsum("ia,ibk->abk", J, A)
                          + np.einsum("kl,abl->abk", J, A)).max(), m.tol),
    ]
    return reports


def require_valid(m: NKModel) -> None:
    reports = verify_model(m)
    if not all_passed(reports):
        failing = ", ".join(r.name for r in reports if not r.passed)
        raise ModelInvalid(f"model '{m.name}' fails identities: {failing}")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_flat_kahler(n: int, tol: float = DEFAULT_TOL) -> NKModel:
    """Flat Kahler C^n: standard metric, block-rotation J, A = 0."""
    if n < 1:
        raise UsageError("flat-kahler needs n >= 1")
    d = 2 * n
    J = np.zeros((d, d))
    for k in range(n):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return NKModel(name=f"flat-kahler:{n}", g=np.eye(d), J=J,
                   A=np.zeros((d, d, d)), tol=tol)


def build_s6(tol: float = DEFAULT_TOL) -> NKModel:
    """The round six-sphere at the base point p = e1.

    Tangent basis: imaginary units e2..e7. J X = p x X, and
    A(X, Y) = X x Y + <X, JY> p (the tangential part of the cross product).
    """
    p = octonion.unit(1)
    basis = [octonion.unit(i) for i in range(2, 8)]
    d = 6
    J = np.zeros((d, d))
    for b in range(d):
        jb = octonion.cross7(p, basis[b])
        for a in range(d):
            J[a, b] = jb @ basis[a]
    A = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            cross = octonion.cross7(basis[i], basis[j])
            jy = octonion.cross7(p, basis[j])
            val = cross + (basis[i] @ jy) * p
            for k in range(d):
                A[i, j, k] = val @ basis[k]
    return NKModel(name="s6", g=np.eye(d), J=J, A=A, tol=tol)


def build_s3s3(scale: float = 1.0, tol: float = DEFAULT_TOL) -> NKModel:
    """S^3 x S^3 through the SU(2)^3 / diagonal three-symmetric construction."""
    from . import homogeneous

    if scale <= 0:
        raise UsageError("s3s3 scale must be positive")
    return homogeneous.build_s3s3_model(scale=scale, tol=tol)


def build_product(m1: NKModel, m2: NKModel, tol: float | None = None) -> NKModel:
    """Almost Hermitian product: block-diagonal g, J and A."""
    require_valid(m1)
    require_valid(m2)
    d1, d2 = m1.dim, m2.dim
    d = d1 + d2
    J = np.zeros((d, d))
    J[:d1, :d1] = m1.J
    J[d1:, d1:] = m2.J
    A = np.zeros((d, d, d))
    A[:d1, :d1, :d1] = m1.A
    A[d1:, d1:, d1:] = m2.A
    blocks = []
    off = 0
    for m in (m1, m2):
        sub = m.aux.get("blocks")
        if sub:
            blocks.extend((off + s, off + e) for s, e in sub)
        else:
            blocks.append((off, off + m.dim))
        off += m.dim
    aux = {"factors": (m1, m2), "blocks": blocks}
    return NKModel(name=f"product:{m1.name},{m2.name}", g=np.eye(d), J=J, A=A,
                   tol=tol if tol is not None else max(m1.tol, m2.tol), aux=aux)


def scale_metric(m: NKModel, c: float) -> NKModel:
    """Model with metric c*g; in orthonormal frames A scales by 1/sqrt(c)."""
    if c <= 0:
        raise UsageError("metric scale must be positive")
    aux = {k: v for k, v in m.aux.items() if k != "blocks"}
    out = from_frame(f"{m.name}~scale:{c:g}", c * m.g, m.J, m.A, tol=m.tol, aux=aux)
    if "blocks" in m.aux:
        out.aux["blocks"] = list(m.aux["blocks"])
    return out


# ---------------------------------------------------------------------------
# derived operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionData:
    """Canonical-connection torsion T(X,Y) = -J A(X,Y) and tau = g(T(.,.),.)."""

    T: np.ndarray
    tau: np.ndarray
    reports: list[CheckReport]


def torsion(m: NKModel) -> TorsionData:
    require_valid(m)
    T = np.einsum("kl,ijl->ijk", -m.J, m.A)
    tau = T  # orthonormal frame: tau[i,j,k] = <T(e_i,e_j), e_k>
    reports = [
        make_check("tau-skew-12", "tau(X,Y,Z) = -tau(Y,X,Z)",
                   np.abs(tau + tau.transpose(1, 0, 2)).max(), m.tol),
        make_check("tau-skew-23", "tau(X,Y,Z) = -tau(X,Z,Y)",
                   np.abs(tau + tau.transpose(0, 2, 1)).max(), m.tol),
        make_check("torsion-j-left", "T(JX, Y) = -J T(X, Y)",
                   np.abs(np.einsum("ia,ijk->ajk", m.J, T)
                          + np.einsum("kl,ajl->ajk", m.J, T)).max(), m.tol),
        make_check("torsion-j-right", "T(X, JY) = -J T(X, Y)",
                   np.abs(np.einsum("jb,ajk->abk", m.J, T)
                          + np.einsum("kl,abl->abk", m.J, T)).max(), m.tol),
    ]
    return TorsionData(T=T, tau=tau, reports=reports)


@dataclass(frozen=True)
class ROperatorReport:
    r: np.ndarray
    spectrum: list[EigenGroup]
    kernel_dim: int
    is_strict: bool
    reports: list[CheckReport]


def r_operator(m: NKModel, group_tol: float = GROUP_TOL) -> ROperatorReport:
    """r from the Koto sum over the orthonormal basis; no curvature needed."""
    require_valid(m)
    r = np.einsum("xik,yik->xy", m.A, m.A)
    eig = sym_eigendecomposition(r, tol=m.tol)
    groups = group_eigenvalues(eig, tol=group_tol)
    kernel_dim = 0
    for grp in groups:
        if abs(grp.value) <= group_tol:
            kernel_dim += grp.multiplicity
    reports = [
        make_check("r-symmetric", "r is selfadjoint",
                   np.abs(r - r.T).max(), m.tol),
        make_check("r-psd", "r is positive semidefinite",
                   max(0.0, -float(eig.values[0])) if len(eig.values) else 0.0,
                   m.tol),
        make_check("r-j-commute", "[r, J] = 0",
                   np.abs(r @ m.J - m.J @ r).max(), m.tol),
    ]
    inv_res = 0.0
    odd = 0
    for grp in groups:
        p = grp.basis @ grp.basis.T
        inv_res = max(inv_res, np.abs((np.eye(m.dim) - p) @ m.J @ p).max())
        odd = max(odd, grp.multiplicity % 2)
    reports.append(make_check(
        "r-eigenspaces-j-invariant", "every r-eigenspace is J-invariant",
        inv_res, 100 * m.tol))
    reports.append(make_check(
        "r-eigenspaces-even", "every r-eigenspace is even dimensional",
        float(odd), 0.5))
    return ROperatorReport(r=r, spectrum=groups, kernel_dim=kernel_dim,
                           is_strict=kernel_dim == 0, reports=reports)


@dataclass(frozen=True)
class TypeConstantReport:
    alpha_type: float
    residual: float
    is_strict: bool
    scalar_curvature: float  # s = 30 * alpha for strict six-dimensional models
    is_reliable: bool


def type_constant(m: NKModel) -> TypeConstantReport:
    """Least-squares fit of alpha in
    |A(X,Y)|^2 = alpha (|X|^2 |Y|^2 - <X,Y>^2 - <X,JY>^2)
    over basis pairs in the native frame and one fixed rotated frame.

    A non-constant-type model is first class: it simply reports a large
    residual and the fitted value is flagged unreliable.
    """
    require_valid(m)
    lhs_list, w_list = [], []
    rng = np.random.default_rng(12345)  # fixed frame rotation, deterministic
    q = random_orthogonal(rng, m.dim)
    for J, A in ((m.J, m.A), (q.T @ m.J @ q,
                              np.einsum("ia,jb,ijk,kc->abc", q, q, m.A, q))):
        lhs = np.einsum("ijk,ijk->ij", A, A)
        w = 1.0 - np.eye(m.dim) - np.square(J)
        lhs_list.append(lhs)
        w_list.append(w)
    lhs = np.concatenate([x.ravel() for x in lhs_list])
    w = np.concatenate([x.ravel() for x in w_list])
    denom = float(w @ w)
    alpha = float(lhs @ w / denom) if denom > 0 else 0.0
    residual = float(np.abs(lhs - alpha * w).max()) if len(lhs) else 0.0
    rop = r_operator(m)
    return TypeConstantReport(alpha_type=alpha, residual=residual,
                              is_strict=rop.is_strict,
                              scalar_curvature=30.0 * alpha,
                              is_reliable=residual <= m.tol)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def model_to_dict(m: NKModel) -> dict:
    return {
        "name": m.name,
        "dim": m.dim,
        "g": m.g.tolist(),
        "J": m.J.tolist(),
        "A": m.A.tolist(),
        "tol": m.tol,
    }


def model_from_dict(doc: dict) -> NKModel:
    try:
        name = str(doc["name"])
        dim = doc["dim"]
        g = np.array(doc["g"], dtype=float)
        J = np.array(doc["J"], dtype=float)
        A = np.array(doc["A"], dtype=float)
        tol = float(doc.get("tol", DEFAULT_TOL))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed model document: {exc}") from None
    if not isinstance(dim, int) or dim % 2 != 0 or dim <= 0:
        raise UsageError(f"model dimension must be a positive even integer, got {dim!r}")
    if g.ndim != 2 or g.shape != (dim, dim):
        raise UsageError(f"field 'g' must be a {dim}x{dim} matrix")
    if J.shape != (dim, dim):
        raise UsageError(f"field 'J' must be a {dim}x{dim} matrix")
    if A.shape != (dim, dim, dim):
        raise UsageError(f"field 'A' must be a {dim}x{dim}x{dim} array")
    return from_frame(name, g, J, A, tol=tol)


def load_model(path) -> NKModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read model file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("model file must hold a JSON object")
    return model_from_dict(doc)


def save_model(m: NKModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), sort_keys=True, indent=2))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _split_top_level(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def resolve_model(spec: str, tol: float = DEFAULT_TOL) -> NKModel:
    """Resolve a registry name (flat-kahler:n, s6, s3s3[:scale],
    twistor:n:kappa, product:a,b, c1/c2/c3 aliases) or a JSON file path."""
    s = spec.strip()
    try:
        if s == "s6":
            return build_s6(tol=tol)
        if s in ("c1", "c2", "c3"):
            return build_flat_kahler(int(s[1]), tol=tol)
        if s.startswith("flat-kahler"):
            _, _, arg = s.partition(":")
            return build_flat_kahler(int(arg or "3"), tol=tol)
        if s.startswith("s3s3"):
            _, _, arg = s.partition(":")
            return build_s3s3(scale=float(arg or "1"), tol=tol)
        if s.startswith("twistor"):
            from . import twistor

            parts = s.split(":")
            n = int(parts[1]) if len(parts) > 1 else 2
            kappa = float(parts[2]) if len(parts) > 2 else 1.0
            return twistor.build_twistor_model(n, kappa, tol=tol).model
        if s.startswith("product:"):
            names = _split_top_level(s[len("product:"):])
            if len(names) != 2:
                raise UsageError(f"product needs exactly two factors, got {names}")
            return build_product(resolve_model(names[0], tol=tol),
                                 resolve_model(names[1], tol=tol))
    except (ValueError, IndexError) as exc:
        raise UsageError(f"cannot parse model spec '{spec}': {exc}") from None
    if Path(s).exists():
        return load_model(s)
    raise UsageError(f"unknown model '{spec}'")
