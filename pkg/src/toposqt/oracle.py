"""Brute-force oracles and random instance generators.

Everything here decides by exhaustive enumeration: daseinisation is computed
as a lattice extremum over all 2^k sums of minimal projections, and algebra
inclusion by Hilbert-Schmidt span containment. The fast paths in the other
modules are validated against these at desk scale, never the other way round.
"""

from __future__ import annotations

import itertools

import numpy as np

from .contexts import AbelianContext
from .errors import InvariantViolation
from .linalg import (
    HermitianOperator,
    ProjectionOperator,
    eigendecompose,
    max_abs,
    projection_leq,
)


def _subset_sums(v: AbelianContext):
    """All projections of the algebra: one per subset of the atoms."""
    k = v.k
    for r in range(k + 1):
        for combo in itertools.combinations(range(k), r):
            if not combo:
                yield ProjectionOperator(np.zeros((v.dim, v.dim), dtype=complex)), combo
            else:
                m = sum(v.projections[i].matrix for i in combo)
                yield ProjectionOperator(m), combo


def brute_inner_das(p: ProjectionOperator, v: AbelianContext) -> ProjectionOperator:
    """Largest algebra projection below p, by exhaustive lattice search."""
    candidates = [q for q, _ in _subset_sums(v) if projection_leq(q, p)]
    best = max(candidates, key=lambda q: q.rank)
    for q in candidates:
        if not projection_leq(q, best):
            raise InvariantViolation("lattice extremum below p is not unique")
    return best


def brute_outer_das(p: ProjectionOperator, v: AbelianContext) -> ProjectionOperator:
    """Smallest algebra projection above p, by exhaustive lattice search."""
    candidates = [q for q, _ in _subset_sums(v) if projection_leq(p, q)]
    best = min(candidates, key=lambda q: q.rank)
    for q in candidates:
        if not projection_leq(best, q):
            raise InvariantViolation("lattice extremum above p is not unique")
    return best


def brute_outer_das_operator(a: HermitianOperator, v: AbelianContext) -> HermitianOperator:
    """Outer daseinisation of an operator, evaluating the defining rule with
    brute-force inner daseinisations of the cumulative spectral projections."""
    pairs = eigendecompose(a)
    eigenvalues = [lam for lam, _ in pairs]
    cumulative = []
    total = np.zeros((a.dim, a.dim), dtype=complex)
    for _, p in pairs:
        total = total + p.matrix
        cumulative.append(ProjectionOperator((total + total.conj().T) / 2.0))
    inner = [brute_inner_das(e, v) for e in cumulative]
    out = np.zeros((a.dim, a.dim), dtype=complex)
    for q in v.projections:
        for lam, e_in in zip(eigenvalues, inner):
            if projection_leq(q, e_in):
                out = out + lam * q.matrix
                break
        else:
            raise InvariantViolation("no dominating spectral step; family broken")
    return HermitianOperator(out)


def span_contains(v: AbelianContext, m: np.ndarray, tol: float = 1e-8) -> bool:
    """Hilbert-Schmidt span membership of a matrix in the algebra of v."""
    proj = sum(
        (np.trace(q.matrix @ m) / q.rank) * q.matrix for q in v.projections
    )
    return max_abs(proj - m) <= tol


def brute_includes(small: AbelianContext, large: AbelianContext) -> bool:
    """Span containment of whole algebras, checked elementwise on a basis."""
    return all(span_contains(large, p.matrix) for p in small.projections)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 2.0) -> HermitianOperator:
    m = rng.normal(size=(dim, dim), scale=scale) + 1j * rng.normal(
        size=(dim, dim), scale=scale
    )
    return HermitianOperator((m + m.conj().T) / 2.0)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_context(rng: np.random.Generator, dim: int, blocks: int) -> AbelianContext:
    """Random context with the requested number of minimal projections."""
    if not 1 <= blocks <= dim:
        raise InvariantViolation("block count must lie between 1 and dim")
    u = random_unitary(rng, dim)
    # Random surjection of basis columns onto blocks.
    assignment = list(range(blocks)) + [
        int(rng.integers(blocks)) for _ in range(dim - blocks)
    ]
    rng.shuffle(assignment)
    projs = []
    for b in range(blocks):
        cols = u[:, [i for i, g in enumerate(assignment) if g == b]]
        p = cols @ cols.conj().T
        projs.append(ProjectionOperator((p + p.conj().T) / 2.0))
    return AbelianContext(dim, tuple(projs))


def random_projection(rng: np.random.Generator, dim: int, rank: int | None = None) -> ProjectionOperator:
    if rank is None:
        rank = int(rng.integers(0, dim + 1))
    u = random_unitary(rng, dim)
    cols = u[:, :rank]
    p = cols @ cols.conj().T
    return ProjectionOperator((p + p.conj().T) / 2.0)
