"""Stability of lattices: minimal sublattice determinants and stabilization.

A lattice is stable when det(L) = 1 and det(L') >= 1 for every sublattice
L'.  The searches here are exhaustive over sublattices spanned by vectors
within a search radius; the radius is reported so that an inconclusive
answer is never silently promoted to a verdict.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import integer
from .errors import InsufficientRadiusError, NotSemistableError
from .lattice import (
    LatticeBasis,
    apply_transform,
    determinant,
    dual,
    enumerate_vectors,
    gram_schmidt_norms,
    quotient_with_frame,
    sublattice,
)

_CHUNK = 200_000


class MinDet(NamedTuple):
    """Minimal determinant over searched rank-k sublattices and a primitive minimizer."""

    det: float
    basis: LatticeBasis
    coeffs: np.ndarray  # k x d integer coefficient rows w.r.t. the searched basis


def default_radius(basis: LatticeBasis) -> float:
    """max(sqrt(d), 2 max_i ||b~_i||) over the reduced basis' Gram-Schmidt norms."""
    return max(math.sqrt(basis.rank), 2.0 * float(np.max(gram_schmidt_norms(basis))))


def _subset_dets(G: np.ndarray, k: int):
    """Yield (index tuples, det) in lexicographic order, in chunks."""
    m = len(G)
    combos = itertools.combinations(range(m), k)
    while True:
        idx = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.int64)
        if len(idx) == 0:
            return
        sub = G[idx[:, :, None], idx[:, None, :]]
        dets = np.linalg.det(sub)
        yield idx, dets


def _primal_min(basis: LatticeBasis, k: int, radius: float) -> MinDet:
    d = basis.rank
    vecs = enumerate_vectors(basis, radius).half()
    if len(vecs) == 0 or np.linalg.matrix_rank(vecs.vectors) < k:
        raise InsufficientRadiusError(f"fewer than {k} independent vectors within radius {radius:g}")
    G = vecs.vectors @ vecs.vectors.T
    norms2 = vecs.norm_sq
    best_det, best_idx = math.inf, None
    for idx, dets in _subset_dets(G, k):
        # drop (numerically) dependent subsets relative to their Hadamard bound
        had = np.prod(norms2[idx], axis=1)
        ok = dets > 1e-10 * had
        if not np.any(ok):
            continue
        dets = np.where(ok, dets, np.inf)
        cand = float(np.min(dets))
        # earlier chunks win ties, and so does the first subset within a chunk
        if cand < best_det * (1 - 1e-9):
            j = int(np.nonzero(dets <= cand * (1 + 1e-9))[0][0])
            best_det, best_idx = float(dets[j]), idx[j]
    if best_idx is None:
        raise InsufficientRadiusError(f"no {k} independent vectors within radius {radius:g}")
    C = vecs.coeffs[best_idx]
    sat, _index = integer.saturation(C)
    sub = sublattice(basis, sat)
    return MinDet(determinant(sub), sub, sat)


def min_sublattice_det(basis: LatticeBasis, k: int, search_radius: float | None = None) -> MinDet:
    """Minimal determinant over primitive rank-k sublattices of L.

    Every sublattice spanned by k independent vectors of norm at most
    ``search_radius`` is examined and the minimizer is saturated to a
    primitive sublattice.  The result is exact whenever the true minimizer
    has a basis within the radius.  With the default radius and k > d/2 the
    search runs on the dual lattice, using det(M) = det(L) det(M^⊥ ∩ L*).

    Ties are broken by the enumeration order of the spanning vectors
    (shorter first, then lexicographically larger coefficients).
    """
    d = basis.rank
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}")
    if k == d:
        return MinDet(determinant(basis), basis, np.eye(d, dtype=np.int64))
    if search_radius is None and k > d / 2:
        D = dual(basis)
        m = _primal_min(D, d - k, default_radius(D))
        K = integer.kernel(m.coeffs)
        sub = sublattice(basis, K)
        return MinDet(determinant(sub), sub, K)
    radius = default_radius(basis) if search_radius is None else search_radius
    return _primal_min(basis, k, radius)


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of :func:`is_stable`.

    ``verdict`` is one of ``stable``, ``unstable``, ``not-unit-det`` or
    ``inconclusive``; ``min_dets`` lists (k, det, sublattice) for k = 1..n.
    """

    verdict: str
    det: float
    witness: LatticeBasis | None = None
    min_dets: list[tuple[int, float, LatticeBasis]] = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "det": self.det,
            "witness": None if self.witness is None else self.witness.columns.T.tolist(),
            "min_dets": [{"rank": k, "det": v, "basis": b.columns.T.tolist()} for k, v, b in self.min_dets],
            "note": self.note,
        }


def is_stable(basis: LatticeBasis) -> StabilityCertificate:
    tol = basis.tol.det_one
    det = determinant(basis)
    d = basis.rank
    min_dets = []
    try:
        for k in range(1, d):
            m = min_sublattice_det(basis, k)
            min_dets.append((k, m.det, m.basis))
    except InsufficientRadiusError as exc:
        return StabilityCertificate("inconclusive", det, None, min_dets, str(exc))
    min_dets.append((d, det, basis))
    low = [(v, b) for k, v, b in min_dets[:-1] if v < 1 - tol]
    witness = min(low, key=lambda t: t[0])[1] if low else None
    if abs(det - 1) > tol:
        return StabilityCertificate("not-unit-det", det, witness, min_dets, f"det = {det:.12g}")
    if witness is not None:
        return StabilityCertificate("unstable", det, witness, min_dets)
    return StabilityCertificate("stable", det, None, min_dets)


def is_semistable(basis: LatticeBasis) -> bool:
    """det(L') >= 1 for every searched sublattice, L itself included."""
    tol = basis.tol.det_one
    return all(min_sublattice_det(basis, k).det >= 1 - tol for k in range(1, basis.rank + 1))


def _projector(F: np.ndarray) -> np.ndarray:
    return F @ F.T


def stabilize(basis: LatticeBasis, max_steps: int | None = None) -> tuple[LatticeBasis, np.ndarray]:
    """Contract a lattice without dense sublattices onto a stable one.

    Each step takes the maximal-rank determinant-one sublattice L1, finds the
    superlattice L2 of L1 minimising det(L2)^(1/rank(L2/L1)) = c, and shrinks
    span(L1)^⊥ by 1/c, which brings det(L2) to one.  The rank of the
    determinant-one part grows each step, so at most n steps are needed.

    Returns ``(A L, A)`` with A a contraction.
    """
    tol = basis.tol.det_one
    n, d = basis.ambient_dim, basis.rank
    for k in range(1, d + 1):
        if min_sublattice_det(basis, k).det < 1 - tol:
            raise NotSemistableError(f"a rank-{k} sublattice has determinant below one")
    A = np.eye(n)
    L = basis
    for _ in range(max_steps or d + 1):
        if abs(determinant(L) - 1) <= tol:
            return L, A
        # maximal rank determinant-one sublattice (unique by submodularity)
        L1 = LatticeBasis.trivial(n)
        for k in range(d - 1, 0, -1):
            m = min_sublattice_det(L, k)
            if m.det <= 1 + tol:
                L1 = m.basis
                break
        Q, F, _W = quotient_with_frame(L, L1)
        r = Q.rank
        best_c, best_j = math.inf, 0
        for j in range(1, r + 1):
            c = min_sublattice_det(Q, j).det ** (1.0 / j)
            if c <= best_c * (1 + tol):  # ties go to the larger rank
                best_c, best_j = min(c, best_c), j
        P_perp = _projector(F)
        step = np.eye(n) - P_perp + P_perp / best_c
        L = apply_transform(L, step)
        A = step @ A
    raise NotSemistableError("stabilization did not terminate")


class BoundaryResult(NamedTuple):
    status: str  # interior | boundary | not-stable | inconclusive
    witness: LatticeBasis | None


def on_stable_boundary(basis: LatticeBasis) -> BoundaryResult:
    """Stable lattices with a proper determinant-one sublattice lie on the boundary.

    For stable L and primitive L' with det(L') = 1, both L' and L/L' are
    stable, which is the boundary condition.
    """
    cert = is_stable(basis)
    if cert.verdict == "inconclusive":
        return BoundaryResult("inconclusive", None)
    if cert.verdict != "stable":
        return BoundaryResult("not-stable", cert.witness)
    tol = basis.tol.det_one
    for k, v, b in cert.min_dets[:-1]:
        if v <= 1 + tol:
            return BoundaryResult("boundary", b)
    return BoundaryResult("interior", None)
