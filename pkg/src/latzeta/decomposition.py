"""Orthogonal decomposition of lattices into indecomposable summands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import integer
from .errors import DegenerateBasisError, InsufficientRadiusError, ToleranceError
from .lattice import LatticeBasis, determinant, enumerate_vectors, frame, sublattice

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class DecompositionResult:
    """Summands in their own orthonormal frames.

    ``assembly`` is orthogonal and maps the block-diagonal direct sum of the
    summands onto span(L): column block i is the frame of summand i.
    """

    summands: list[LatticeBasis]
    assembly: np.ndarray
    certified: bool
    radius: float

    @property
    def ranks(self) -> list[int]:
        return [b.rank for b in self.summands]

    @property
    def dets(self) -> list[float]:
        return [determinant(b) for b in self.summands]

    def to_dict(self) -> dict:
        return {
            "summands": [b.columns.T.tolist() for b in self.summands],
            "ranks": self.ranks,
            "dets": self.dets,
            "certified": self.certified,
            "radius": self.radius,
        }


def _indecomposable(vecs, all_vecs) -> np.ndarray:
    """Mask of vectors v that are not x + (v - x) with <x, v - x> >= 0.

    Indecomposable vectors generate L and each lies in a single summand of
    the orthogonal decomposition, so they cannot bridge two summands.  Any
    such x satisfies ||x|| <= ||v||, so ``all_vecs`` (both signs, same
    radius) contains every candidate.
    """
    X = all_vecs.vectors
    ip = vecs.vectors @ X.T - all_vecs.norm_sq[None, :]  # <x, v> - ||x||²
    same = np.all(np.isclose(vecs.vectors[:, None, :], X[None, :, :], atol=1e-12), axis=2)
    scale = vecs.norm_sq[:, None]
    hit = (ip >= -ORTHO_TOL * scale) & ~same
    return ~np.any(hit, axis=1)


def _generates(coeffs: np.ndarray, d: int) -> bool:
    if len(coeffs) == 0:
        return False
    span = integer.row_span_basis(coeffs)
    return len(span) == d and abs(integer._det(span.tolist())) == 1


def _components(V: np.ndarray) -> list[list[int]]:
    m = len(V)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    norms = np.linalg.norm(V, axis=1)
    G = np.abs(V @ V.T) > ORTHO_TOL * np.outer(norms, norms)
    for i, j in zip(*np.nonzero(np.triu(G, 1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def decompose(basis: LatticeBasis, generating_radius: float | None = None) -> DecompositionResult:
    """Split L into pairwise orthogonal indecomposable sublattices.

    The short indecomposable vectors (norm <= ``generating_radius``) must
    generate L; they are grouped into connected components of the relation
    <u, v> != 0 and each component spans one summand.  The default radius is
    the longest reduced-basis vector, doubled once if that set does not
    generate.
    """
    if not basis.is_full_rank:
        raise DegenerateBasisError("decompose needs a full-rank basis")
    d = basis.rank
    if generating_radius is None:
        r0 = float(np.max(np.linalg.norm(basis.reduction.B, axis=0))) * (1 + 1e-9)
        radii = [r0, 2 * r0]
    else:
        radii = [generating_radius]
    for radius in radii:
        allv = enumerate_vectors(basis, radius)
        half = allv.half()
        keep = _indecomposable(half, allv)
        V, C = half.vectors[keep], half.coeffs[keep]
        if _generates(C, d):
            break
    else:
        raise InsufficientRadiusError(f"vectors within radius {radius:g} do not generate the lattice")

    summands, frames = [], []
    for comp in _components(V):
        rows = integer.row_span_basis(C[comp])
        Cb, F = frame(sublattice(basis, rows))
        summands.append(Cb)
        frames.append(F)
    Q = np.hstack(frames)
    if np.max(np.abs(Q.T @ Q - np.eye(d))) > 1e-9:
        raise ToleranceError("summand spans are not numerically orthogonal")
    total = float(np.prod([determinant(b) for b in summands]))
    if abs(total - determinant(basis)) > 1e-9 * determinant(basis):
        raise ToleranceError("summand determinants do not multiply to det(L)")
    return DecompositionResult(summands, Q, True, radius)


def is_isomorphic_to_Zn(basis: LatticeBasis) -> bool:
    """True iff L splits into rank-one summands of determinant one."""
    if basis.is_trivial:
        return True
    full = basis if basis.is_full_rank else frame(basis)[0]
    res = decompose(full)
    return all(b.rank == 1 and abs(determinant(b) - 1) <= basis.tol.det_one for b in res.summands)
