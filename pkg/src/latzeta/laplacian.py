"""Second variation of ζ' along symmetric deformations of an orthogonal summand.

For L = L1 ⊕ L2 with rank(L2) = d and a symmetric d x d matrix A put

    E(A) = ζ'(L1 ⊕ e^{A/2} L2, s; q).

Writing vectors as (x, y) with x in L1, y in L2 and N = ||x||² + ||y||² + q,
the second directional derivative at A = 0 is

    ∂²_A E = s Σ N^(-s-1) [(s+1) (yᵀAy)² / N - yᵀA²y].

Summing over an orthonormal basis of the symmetric or trace-zero matrices
gives the Laplacians computed here in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import ContainmentError, DomainError, EnumerationBudgetError
from .lattice import (
    LatticeBasis,
    VectorCache,
    coefficients,
    determinant,
    direct_sum,
    dual,
    frame,
    lambda1,
    quotient_with_frame,
)
from .special import kbar_array, kbar_scalar
from .sums import SplitPlan, SummationResult, Weight, count_bound, tail_bound, zeta_prime

NESTED_BUDGET = 2 * 10**6


@dataclass(frozen=True, eq=False)
class SymmetricPerturbation:
    entries: np.ndarray
    trace_zero: bool = False

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DomainError("perturbation must be square")
        if np.max(np.abs(A - A.T), initial=0.0) > 1e-12:
            raise DomainError("perturbation must be symmetric")
        if self.trace_zero and abs(np.trace(A)) > 1e-12:
            raise DomainError("perturbation is flagged trace-zero but has nonzero trace")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def symmetric_basis(d: int) -> list[SymmetricPerturbation]:
    """Orthonormal basis (Frobenius) of the symmetric d x d matrices."""
    out = []
    for i in range(d):
        E = np.zeros((d, d))
        E[i, i] = 1.0
        out.append(SymmetricPerturbation(E))
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1 / math.sqrt(2)
            out.append(SymmetricPerturbation(E))
    return out


def trace_zero_basis(d: int) -> list[SymmetricPerturbation]:
    """Orthonormal basis of the trace-zero symmetric d x d matrices.

    Off-diagonal directions (E_ij + E_ji)/√2 plus d - 1 orthonormal
    trace-zero diagonals (Helmert contrasts).
    """
    out = []
    for k in range(1, d):
        v = np.zeros(d)
        v[:k] = 1.0
        v[k] = -k
        out.append(SymmetricPerturbation(np.diag(v / np.linalg.norm(v)), trace_zero=True))
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1 / math.sqrt(2)
            out.append(SymmetricPerturbation(E, trace_zero=True))
    return out


class SplitLattice:
    """L1 ⊕ L2, each rewritten in its own orthonormal frame.

    The combined basis lives in R^(m + d) with the L2 coordinates last.
    """

    def __init__(self, part1: LatticeBasis, part2: LatticeBasis):
        if part2.is_trivial:
            raise DomainError("part2 must have rank at least one")
        self.part1 = frame(part1)[0] if not part1.is_trivial else LatticeBasis.trivial(0)
        self.part2 = frame(part2)[0]
        self.m = self.part1.rank
        self.d = self.part2.rank
        self.basis = direct_sum(self.part1, self.part2)

    @property
    def rank(self) -> int:
        return self.m + self.d

    def deformed(self, A) -> LatticeBasis:
        """L1 ⊕ e^{A/2} L2."""
        M = linalg.expm(0.5 * np.asarray(A, dtype=float))
        return direct_sum(self.part1, LatticeBasis(M @ self.part2.columns))

    def _plan(self) -> SplitPlan:
        if not hasattr(self, "_plan_cache"):
            self._plan_cache = SplitPlan(self.basis)
        return self._plan_cache

    def y2(self, vectors: np.ndarray) -> np.ndarray:
        return vectors[:, self.m :]


def _as_matrix(A, d: int) -> np.ndarray:
    if isinstance(A, SymmetricPerturbation):
        A = A.entries
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (d, d):
        raise DomainError(f"perturbation must be {d}x{d}")
    return A


def _check_s(split: SplitLattice, s: float, q: float) -> None:
    if not s > split.rank / 2:
        raise DomainError(f"need s > n/2 = {split.rank / 2}")
    if q < 0:
        raise DomainError("q must be nonnegative")


def epsilon_functional(split: SplitLattice, A, s: float, q: float, rel_tol: float = 1e-12) -> float:
    """E(A) = ζ'(L1 ⊕ e^{A/2} L2, s; q)."""
    _check_s(split, s, q)
    A = _as_matrix(A, split.d)
    return zeta_prime(split.deformed(A), s, q, rel_tol, method="direct").value


# -- weighted sums ---------------------------------------------------------------


def _norm4(split: SplitLattice) -> Weight:
    d = split.d
    return Weight(lambda v: np.einsum("ij,ij->i", split.y2(v), split.y2(v)) ** 2, 2, d * d + 2.0 * d, 1.0)


def _norm2(split: SplitLattice) -> Weight:
    return Weight(lambda v: np.einsum("ij,ij->i", split.y2(v), split.y2(v)), 1, float(split.d), 1.0)


def _quad_sq(split: SplitLattice, A: np.ndarray) -> Weight:
    op = float(np.max(np.abs(np.linalg.eigvalsh(A))))

    def f(v):
        y = split.y2(v)
        return np.einsum("ij,jk,ik->i", y, A, y) ** 2

    return Weight(f, 2, float(np.trace(A) ** 2 + 2 * np.trace(A @ A)), op * op)


def _quad_a2(split: SplitLattice, A: np.ndarray) -> Weight:
    A2 = A @ A
    op = float(np.max(np.abs(np.linalg.eigvalsh(A))))

    def f(v):
        y = split.y2(v)
        return np.einsum("ij,jk,ik->i", y, A2, y)

    return Weight(f, 1, float(np.trace(A2)), op * op)


def second_derivative(split: SplitLattice, A, s: float, q: float, rel_tol: float = 1e-12) -> float:
    """Closed-form ∂²/∂t² E(tA) at t = 0."""
    _check_s(split, s, q)
    A = _as_matrix(A, split.d)
    if not np.any(A):
        return 0.0
    plan = split._plan()
    quartic = plan.sum(s + 2, q, _quad_sq(split, A), rel_tol).value
    quadratic = plan.sum(s + 1, q, _quad_a2(split, A), rel_tol).value
    return s * ((s + 1) * quartic - quadratic)


class LaplacianParts(NamedTuple):
    """S4 = Σ ||y||⁴ N^(-s-2) and S2 = Σ ||y||² N^(-s-1), with derived Laplacians."""

    S4: float
    S2: float
    delta_S: float  # Laplacian over all symmetric matrices
    trace_term: float  # ∂²/∂I² with the unnormalised identity direction
    delta_S0: float  # Laplacian over trace-zero matrices


def laplacian_parts(split: SplitLattice, s: float, q: float, rel_tol: float = 1e-12) -> LaplacianParts:
    _check_s(split, s, q)
    d = split.d
    plan = split._plan()
    S4 = plan.sum(s + 2, q, _norm4(split), rel_tol).value
    S2 = plan.sum(s + 1, q, _norm2(split), rel_tol).value
    delta_S = s * ((s + 1) * S4 - (d + 1) / 2 * S2)
    trace_term = s * ((s + 1) * S4 - S2)
    delta_S0 = 0.0 if d == 1 else s * (d - 1) / d * ((s + 1) * S4 - (d + 2) / 2 * S2)
    return LaplacianParts(S4, S2, delta_S, trace_term, delta_S0)


def laplacian_S0(split: SplitLattice, s: float, q: float, rel_tol: float = 1e-12) -> float:
    """Laplacian of E over trace-zero symmetric matrices at A = 0.

    s (d-1)/d Σ_{y != 0} [(s+1) ||y||⁴ ζ(L1, s+2; ||y||²+q) - (d/2+1) ||y||² ζ(L1, s+1; ||y||²+q)],
    evaluated as weighted sums over L1 ⊕ L2.
    """
    if split.d == 1:
        _check_s(split, s, q)
        return 0.0
    return laplacian_parts(split, s, q, rel_tol).delta_S0


def laplacian_S(split: SplitLattice, s: float, q: float, rel_tol: float = 1e-12) -> float:
    return laplacian_parts(split, s, q, rel_tol).delta_S


def laplacian_S0_nested(split: SplitLattice, s: float, q: float, rel_tol: float = 1e-8) -> SummationResult:
    """The trace-zero Laplacian through its nested form, as a cross-check.

    The outer sum runs over y in L2 and the inner shifted zeta functions of
    L1 use the dual (Bessel) series.  The outer tail decays only like
    R^(n - 2s) and is estimated (not certified) from the volume term, so
    this route is practical for s well above n/2.
    """
    _check_s(split, s, q)
    d, m = split.d, split.m
    if d == 1:
        return SummationResult(0.0, 0.0, 1)
    L1, L2 = split.part1, split.part2
    lam2 = lambda1(L2)
    det1 = determinant(L1)

    def inner_factory(a: float):
        alpha = a - m / 2
        if m == 0:
            return lambda Q: Q ** (-a)
        D = dual(L1)
        counter = count_bound(D)
        k_min = 2 * math.pi * math.sqrt(lam2 * lam2 + q)
        g = lambda r: kbar_scalar(alpha, k_min * r) if r > 0 else math.gamma(alpha)  # noqa: E731
        R = counter.lam
        while tail_bound(g, R, counter, len(VectorCache(D).upto(R)) + 1) > 1e-16 * math.gamma(alpha):
            R *= 1.3
        wn = VectorCache(D).upto(R).norms

        def inner(Q):
            x = 2 * math.pi * np.sqrt(Q)[:, None] * wn[None, :]
            total = math.gamma(alpha) + kbar_array(alpha, x.ravel()).reshape(x.shape).sum(axis=1)
            return math.pi ** (m / 2) * Q ** (m / 2 - a) / (math.gamma(a) * det1) * total

        return inner

    z2, z1 = inner_factory(s + 2), inner_factory(s + 1)

    def term_sum(norm_sq):
        Q = norm_sq + q
        return (s + 1) * norm_sq**2 * z2(Q) - (d / 2 + 1) * norm_sq * z1(Q)

    # volume estimate of the outer tail: Σ_{||y||>R} ≈ ∫_R^∞ |S^{d-1}| r^{d-1}/det2 f(r) dr,
    # with the inner zeta replaced by its leading term
    det2 = determinant(L2)
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)

    def lead(a, Q):
        if m == 0:
            return Q ** (-a)
        return math.pi ** (m / 2) * math.gamma(a - m / 2) / (math.gamma(a) * det1) * Q ** (m / 2 - a)

    def tail_estimate(R):
        from scipy import integrate

        f = lambda r: area * r ** (d - 1) / det2 * (  # noqa: E731
            (s + 1) * r**4 * lead(s + 2, r * r + q) + (d / 2 + 1) * r * r * lead(s + 1, r * r + q)
        )
        return integrate.quad(f, R, np.inf, limit=200)[0]

    cache = VectorCache(L2)
    R = 4.0 * lam2
    val, done = 0.0, 0
    for _ in range(40):
        vecs = cache.upto(R)
        val += float(np.sum(term_sum(vecs.norm_sq[done:])))
        done = len(vecs)
        est = tail_estimate(R)
        if est <= rel_tol * abs(val):
            break
        # the tail falls like R^(n - 2s); refuse early when the radius it needs is out of reach
        need = R * (est / (rel_tol * abs(val))) ** (1 / (2 * s - split.rank))
        count = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * need**d / det2
        if count > NESTED_BUDGET:
            raise EnumerationBudgetError(f"nested sum needs ~{count:.3g} outer vectors (radius {need:.4g})")
        R *= math.sqrt(2)
    return SummationResult(s * (d - 1) / d * val, s * (d - 1) / d * est, len(vecs))


def fd_second_derivative(split: SplitLattice, A, s: float, q: float, eps: float = 1e-3) -> float:
    """Central second difference of E along A, Richardson-extrapolated from 10·eps and eps."""
    A = _as_matrix(A, split.d)
    E0 = epsilon_functional(split, 0 * A, s, q, 1e-13)

    def D(h):
        return (epsilon_functional(split, h * A, s, q, 1e-13) + epsilon_functional(split, -h * A, s, q, 1e-13) - 2 * E0) / (
            h * h
        )

    big, small = D(10 * eps), D(eps)
    return (100 * small - big) / 99


def fd_laplacian_S0(split: SplitLattice, s: float, q: float, eps: float = 1e-3) -> float:
    return sum(fd_second_derivative(split, E, s, q, eps) for E in trace_zero_basis(split.d))


class PositivityResult(NamedTuple):
    positive: bool
    value: float
    q_bound: float
    exploratory: bool


def positivity_q_bound(split: SplitLattice, s: float) -> float:
    """(2s - n)/(d + 2) · λ1(L2)²."""
    return (2 * s - split.rank) / (split.d + 2) * lambda1(split.part2) ** 2


def laplacian_positivity_check(
    split: SplitLattice, s: float, q: float, allow_outside: bool = False
) -> PositivityResult:
    """Evaluate the trace-zero Laplacian inside the region where it is positive."""
    if split.d < 2:
        raise DomainError("positivity needs rank(L2) >= 2")
    _check_s(split, s, q)
    bound = positivity_q_bound(split, s)
    outside = q > bound * (1 + 1e-12)
    if outside and not allow_outside:
        raise DomainError(f"q = {q} exceeds the bound {bound}")
    value = laplacian_S0(split, s, q)
    return PositivityResult(value > 0, value, bound, outside)


class DominanceResult(NamedTuple):
    lhs: float
    rhs: float
    gap: float
    tail: float
    splits: bool  # L equals L' ⊕ (L/L') exactly (lifted quotient lies in L)


def direct_sum_dominance(basis: LatticeBasis, sub: LatticeBasis, s: float, q: float) -> DominanceResult:
    """Compare ζ'(L) with ζ'((L/L') ⊕ L').

    Splitting off a primitive sublattice orthogonally can only increase ζ',
    with equality exactly when L already is that orthogonal sum.
    """
    if not s > basis.rank / 2:
        raise DomainError("need s > rank/2")
    Q, F, _W = quotient_with_frame(basis, sub)
    rebuilt = direct_sum(Q, frame(sub)[0]) if not sub.is_trivial else Q
    lhs = zeta_prime(basis, s, q, 1e-12)
    rhs = zeta_prime(rebuilt, s, q, 1e-12)
    try:
        coefficients(basis, F @ Q.columns) if Q.rank else None
        splits = True
    except ContainmentError:
        splits = False
    return DominanceResult(lhs.value, rhs.value, rhs.value - lhs.value, lhs.tail_bound + rhs.tail_bound, splits)
