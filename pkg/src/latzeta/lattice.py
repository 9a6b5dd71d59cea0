"""Lattice bases and the arithmetic the rest of the package is built on.

A lattice of rank d in R^n is stored as the n x d matrix ``B`` whose columns
are basis vectors.  All arithmetic is double precision; the tolerances used
for equality decisions live in :class:`Tolerances`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np

from . import integer
from .errors import (
    ContainmentError,
    DegenerateBasisError,
    EnumerationBudgetError,
    PrimitivityError,
)


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-9
    integrality: float = 1e-9
    det_one: float = 1e-9
    max_condition: float = 1e13
    node_budget: int = 10**7


DEFAULT_TOL = Tolerances()


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Columns of ``columns`` are the basis vectors b_1..b_d of L in R^n.

    The trivial lattice {0} is represented by an n x 0 matrix; its
    determinant is 1 by convention.
    """

    columns: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        B = np.asarray(self.columns, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2:
            raise DegenerateBasisError("basis must be a 2-d array")
        if not np.all(np.isfinite(B)):
            raise DegenerateBasisError("basis has non-finite entries")
        n, d = B.shape
        if d > n:
            raise DegenerateBasisError(f"{d} vectors cannot be independent in R^{n}")
        object.__setattr__(self, "columns", _readonly(B))
        if d:
            G = B.T @ B
            ev = np.linalg.eigvalsh(G)
            if ev[0] <= 0 or ev[-1] / ev[0] > self.tol.max_condition:
                raise DegenerateBasisError("basis vectors are (numerically) linearly dependent")

    @classmethod
    def from_rows(cls, rows, tol: Tolerances = DEFAULT_TOL) -> "LatticeBasis":
        """Build from the row-major rows of B (each row has d entries)."""
        return cls(np.array(rows, dtype=float), tol)

    @classmethod
    def trivial(cls, ambient_dim: int = 0) -> "LatticeBasis":
        return cls(np.zeros((ambient_dim, 0)))

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def rank(self) -> int:
        return self.columns.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.ambient_dim

    @cached_property
    def gram(self) -> np.ndarray:
        return _readonly(self.columns.T @ self.columns)

    @cached_property
    def reduction(self) -> "Reduction":
        return lll_reduce(self.columns)

    def __repr__(self):
        return f"LatticeBasis(n={self.ambient_dim}, d={self.rank}, columns={self.columns.tolist()})"


# -- constructors -----------------------------------------------------------


def integer_lattice(n: int) -> LatticeBasis:
    return LatticeBasis(np.eye(n))


def diagonal_lattice(diag) -> LatticeBasis:
    return LatticeBasis(np.diag(np.asarray(diag, dtype=float)))


def hexagonal_lattice(det: float | None = 1.0) -> LatticeBasis:
    """The A2 lattice; scaled to the given determinant (``None`` keeps unit minimal vectors)."""
    B = np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]])
    if det is not None:
        B *= math.sqrt(det / (math.sqrt(3) / 2))
    return LatticeBasis(B)


def fcc_lattice(det: float = 1.0) -> LatticeBasis:
    """A3 (face-centred cubic) scaled to determinant ``det``."""
    B = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    return LatticeBasis(B * (det / 2.0) ** (1 / 3))


def d4_lattice(det: float = 1.0) -> LatticeBasis:
    B = np.array(
        [[1.0, -1.0, 0.0, 0.0], [0.0, 1.0, -1.0, 0.0], [0.0, 0.0, 1.0, -1.0], [0.0, 0.0, 1.0, 1.0]]
    ).T
    return LatticeBasis(B * (det / 2.0) ** 0.25)


# -- basic invariants ---------------------------------------------------------


def determinant(basis: LatticeBasis) -> float:
    """sqrt(det(B^T B)); 1 for the trivial lattice."""
    if basis.is_trivial:
        return 1.0
    sign, logdet = np.linalg.slogdet(basis.gram)
    if sign <= 0:
        raise DegenerateBasisError("Gram matrix is not positive definite")
    return math.exp(0.5 * logdet)


def dual(basis: LatticeBasis) -> LatticeBasis:
    """Dual basis B (B^T B)^{-1}, living in span(L)."""
    if basis.is_trivial:
        return basis
    return LatticeBasis(np.linalg.solve(basis.gram, basis.columns.T).T, basis.tol)


def apply_transform(basis: LatticeBasis, M) -> LatticeBasis:
    M = np.asarray(M, dtype=float)
    if M.shape != (basis.ambient_dim, basis.ambient_dim):
        raise DegenerateBasisError(f"transform must be {basis.ambient_dim}x{basis.ambient_dim}")
    sv = np.linalg.svd(M, compute_uv=False) if M.size else np.ones(1)
    if sv[-1] <= sv[0] * 1e-13:
        raise DegenerateBasisError("transform is singular")
    return LatticeBasis(M @ basis.columns, basis.tol)


def direct_sum(a: LatticeBasis, b: LatticeBasis) -> LatticeBasis:
    """Block-diagonal basis of a ⊕ b in R^{n_a + n_b}."""
    na, nb = a.ambient_dim, b.ambient_dim
    B = np.zeros((na + nb, a.rank + b.rank))
    B[:na, : a.rank] = a.columns
    B[na:, a.rank :] = b.columns
    return LatticeBasis(B, a.tol)


def frame(basis: LatticeBasis) -> tuple[LatticeBasis, np.ndarray]:
    """Rewrite L in an orthonormal frame of span(L).

    Returns ``(C, F)`` where C is a full-rank d x d basis and F is n x d with
    orthonormal columns such that ``F @ C.columns == basis.columns``.
    """
    if basis.is_trivial:
        return LatticeBasis.trivial(0), np.zeros((basis.ambient_dim, 0))
    Q, R = np.linalg.qr(basis.columns)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return LatticeBasis(R * signs[:, None], basis.tol), Q * signs[None, :]


def full_rank(basis: LatticeBasis) -> LatticeBasis:
    return basis if basis.is_full_rank else frame(basis)[0]


# -- LLL ------------------------------------------------------------------------


class Reduction(NamedTuple):
    """LLL output: ``B_red = B @ U`` with ``U`` unimodular; ``R`` is the
    upper-triangular factor of ``B_red`` with positive diagonal."""

    B: np.ndarray
    U: np.ndarray
    R: np.ndarray


def _qr_r(B: np.ndarray) -> np.ndarray:
    R = np.linalg.qr(B, mode="r")
    return R * np.where(np.diag(R) < 0, -1.0, 1.0)[:, None]


def lll_reduce(B, delta: float = 0.99) -> Reduction:
    """Floating-point LLL reduction of the columns of ``B``."""
    B = np.array(B, dtype=float)
    d = B.shape[1]
    U = np.eye(d, dtype=np.int64)
    if d == 0:
        return Reduction(B, U, np.zeros((0, 0)))
    R = _qr_r(B)
    k = 1
    iters = 0
    while k < d:
        iters += 1
        if iters > 100000:
            raise DegenerateBasisError("LLL failed to converge")
        for j in range(k - 1, -1, -1):
            mu = R[j, k] / R[j, j]
            r = round(mu)
            if r:
                B[:, k] -= r * B[:, j]
                U[:, k] -= r * U[:, j]
                R[:, k] -= r * R[:, j]
        mu = R[k - 1, k] / R[k - 1, k - 1]
        if R[k, k] ** 2 >= (delta - mu**2) * R[k - 1, k - 1] ** 2:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            R = _qr_r(B)
            k = max(k - 1, 1)
    # a final pass with exact recomputation guards against drift
    R = _qr_r(B)
    return Reduction(B, U, R)


def gram_schmidt_norms(basis: LatticeBasis) -> np.ndarray:
    return np.abs(np.diag(basis.reduction.R))


# -- enumeration ------------------------------------------------------------------


class LatticeVector(NamedTuple):
    coeffs: np.ndarray
    embedding: np.ndarray
    norm_sq: float


@dataclass(frozen=True, eq=False)
class LatticeVectors:
    """Nonzero lattice vectors as parallel arrays, sorted by norm.

    Ties in norm are broken by descending lexicographic order of the
    coefficient vectors so the order is reproducible.
    """

    coeffs: np.ndarray  # m x d integer, w.r.t. the input basis
    vectors: np.ndarray  # m x n
    norm_sq: np.ndarray  # m
    radius: float

    def __len__(self):
        return len(self.norm_sq)

    def __iter__(self) -> Iterator[LatticeVector]:
        for a, v, r in zip(self.coeffs, self.vectors, self.norm_sq):
            yield LatticeVector(a, v, float(r))

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.norm_sq)

    def within(self, radius: float) -> "LatticeVectors":
        cut = np.searchsorted(self.norm_sq, radius * radius * (1 + 1e-12), side="right")
        return LatticeVectors(self.coeffs[:cut], self.vectors[:cut], self.norm_sq[:cut], radius)

    def slice(self, start: int, stop: int) -> "LatticeVectors":
        return LatticeVectors(
            self.coeffs[start:stop], self.vectors[start:stop], self.norm_sq[start:stop], self.radius
        )

    def half(self) -> "LatticeVectors":
        """One representative of each ±y pair (first nonzero coefficient positive)."""
        c = self.coeffs
        if len(c) == 0:
            return self
        first = c[np.arange(len(c)), np.argmax(c != 0, axis=1)]
        keep = first > 0
        return LatticeVectors(c[keep], self.vectors[keep], self.norm_sq[keep], self.radius)


def _predicted_count(R: np.ndarray, radius: float) -> float:
    d = R.shape[0]
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d
    return vol / float(np.prod(np.diag(R)))


def enumerate_vectors(
    basis: LatticeBasis, radius: float, node_budget: int | None = None
) -> LatticeVectors:
    """All nonzero y in L with ||y|| <= radius (both signs).

    Breadth-first Fincke-Pohst enumeration on an LLL-reduced basis; each
    level is expanded with vectorised interval arithmetic.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    budget = basis.tol.node_budget if node_budget is None else node_budget
    n, d = basis.ambient_dim, basis.rank
    if d == 0:
        return LatticeVectors(np.zeros((0, 0), np.int64), np.zeros((0, n)), np.zeros(0), radius)
    red = basis.reduction
    R = red.R
    if _predicted_count(R, radius) > budget:
        raise EnumerationBudgetError(
            f"radius {radius:g} would produce ~{_predicted_count(R, radius):.3g} vectors"
        )
    r2 = radius * radius * (1 + 1e-10)
    X = np.zeros((1, 0), dtype=np.int64)
    rho = np.array([r2])
    nodes = 0
    for i in range(d - 1, -1, -1):
        rii = R[i, i]
        c = X @ R[i, i + 1 :] if X.shape[1] else np.zeros(len(rho))
        w = np.sqrt(np.maximum(rho, 0.0))
        lo = np.ceil((-w - c) / rii - 1e-12).astype(np.int64)
        hi = np.floor((w - c) / rii + 1e-12).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        nodes += total
        if nodes > budget:
            raise EnumerationBudgetError(f"enumeration exceeded {budget} nodes")
        parent = np.repeat(np.arange(len(rho)), cnt)
        start = np.repeat(np.cumsum(cnt) - cnt, cnt)
        xi = lo[parent] + (np.arange(total) - start)
        rho = rho[parent] - (rii * xi + c[parent]) ** 2
        X = np.column_stack([xi, X[parent]])
        keep = rho >= -1e-12 * r2
        X, rho = X[keep], rho[keep]
    nz = np.any(X != 0, axis=1)
    X = X[nz]
    vecs = X @ red.B.T
    coeffs = X @ red.U.T
    nsq = np.einsum("ij,ij->i", vecs, vecs)
    inside = nsq <= r2
    coeffs, vecs, nsq = coeffs[inside], vecs[inside], nsq[inside]
    keys = [-coeffs[:, j] for j in range(d - 1, -1, -1)] + [np.round(nsq, 9)]
    order = np.lexsort(keys)
    return LatticeVectors(coeffs[order], vecs[order], nsq[order], radius)


class VectorCache:
    """Per-call memo of enumerated vectors that grows on demand."""

    def __init__(self, basis: LatticeBasis):
        self.basis = basis
        self._vecs: LatticeVectors | None = None

    def upto(self, radius: float) -> LatticeVectors:
        if self._vecs is None or self._vecs.radius < radius:
            grow = radius if self._vecs is None else max(radius, self._vecs.radius * 1.25)
            self._vecs = enumerate_vectors(self.basis, grow)
        return self._vecs.within(radius)


def lambda1(basis: LatticeBasis) -> float:
    """Length of a shortest nonzero vector."""
    if basis.is_trivial:
        raise DegenerateBasisError("the trivial lattice has no nonzero vectors")
    red = basis.reduction
    r = float(np.min(np.linalg.norm(red.B, axis=0)))
    vecs = enumerate_vectors(basis, r)
    return float(math.sqrt(vecs.norm_sq[0]))


def shortest_vector(basis: LatticeBasis) -> LatticeVector:
    r = float(np.min(np.linalg.norm(basis.reduction.B, axis=0)))
    return next(iter(enumerate_vectors(basis, r)))


def point_count_bound(r: float, lam: float, d: int) -> float:
    """Upper bound on |L ∩ rB| (zero included) from disjoint packing balls."""
    return (1.0 + 2.0 * r / lam) ** d


# -- sublattices --------------------------------------------------------------------


def coefficients(basis: LatticeBasis, vectors) -> np.ndarray:
    """Integer coefficients of ``vectors`` (columns) w.r.t. ``basis``.

    Raises ContainmentError if any column is not (numerically) a lattice vector.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if basis.is_trivial:
        if np.allclose(V, 0):
            return np.zeros((0, V.shape[1]), dtype=np.int64)
        raise ContainmentError("nonzero vector in the trivial lattice")
    B = basis.columns
    x = np.linalg.solve(basis.gram, B.T @ V)
    scale = max(1.0, float(np.max(np.abs(V))))
    if np.max(np.abs(B @ x - V), initial=0.0) > 1e-8 * scale:
        raise ContainmentError("vector is not in the span of the lattice")
    xr = np.round(x)
    if np.max(np.abs(x - xr), initial=0.0) > basis.tol.integrality * max(1.0, float(np.max(np.abs(x)))):
        raise ContainmentError("vector has non-integral coordinates")
    return xr.astype(np.int64)


def is_primitive(basis: LatticeBasis, sub: LatticeBasis) -> bool:
    if sub.is_trivial:
        return True
    C = coefficients(basis, sub.columns)
    return integer.lattice_index(C.T) == 1


def sublattice(basis: LatticeBasis, coeffs) -> LatticeBasis:
    """Sublattice generated by integer coefficient rows (k x d)."""
    C = np.asarray(coeffs, dtype=float).reshape(-1, basis.rank)
    return LatticeBasis(basis.columns @ C.T, basis.tol)


def quotient_with_frame(basis: LatticeBasis, sub: LatticeBasis) -> tuple[LatticeBasis, np.ndarray, np.ndarray]:
    """L/L' as a full-rank lattice in an orthonormal frame of span(L) ∩ span(L')^⊥.

    Returns ``(Q, F, W)``: ``F`` (n x (d-k)) has orthonormal columns with
    ``F @ Q.columns`` equal to the projected lattice vectors, and ``W`` is the
    d x d unimodular coefficient matrix whose first k columns span L'.
    """
    if sub.is_trivial:
        C = np.zeros((0, basis.rank), dtype=np.int64)
    else:
        C = coefficients(basis, sub.columns).T
    if len(C) and integer.lattice_index(C) != 1:
        raise PrimitivityError("sublattice is not primitive")
    k, d = len(C), basis.rank
    W = integer.completion(C).T if k else np.eye(d, dtype=np.int64)
    full = basis.columns @ W
    if k:
        Qs, _ = np.linalg.qr(full[:, :k])
        rest = full[:, k:] - Qs @ (Qs.T @ full[:, k:])
    else:
        rest = full
    if d - k == 0:
        return LatticeBasis.trivial(0), np.zeros((basis.ambient_dim, 0)), W
    F, Rq = np.linalg.qr(rest)
    signs = np.where(np.diag(Rq) < 0, -1.0, 1.0)
    return LatticeBasis(Rq * signs[:, None], basis.tol), F * signs[None, :], W


def quotient(basis: LatticeBasis, sub: LatticeBasis) -> LatticeBasis:
    """Projection of L onto span(L')^⊥, as a full-rank basis in a rank-(d-k) frame."""
    return quotient_with_frame(basis, sub)[0]


def orthogonal_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))[None, :]


def unimodular_matrix(d: int, rng: np.random.Generator, steps: int = 12) -> np.ndarray:
    """Random unimodular integer matrix built from elementary operations."""
    U = np.eye(d, dtype=np.int64)
    if d < 2:
        return U * int(rng.choice([-1, 1]))
    for _ in range(steps):
        i, j = rng.choice(d, size=2, replace=False)
        U[:, i] += int(rng.integers(-2, 3)) * U[:, j]
    perm = rng.permutation(d)
    return U[:, perm]
