"""Dense complex linear algebra for small Hilbert spaces (dim <= 16).

Hermitian eigendecompositions with degenerate-eigenvalue merging, spectral
families, and the projection order P <= Q (range inclusion). All predicates
use EPS = 1e-9; reconstruction residuals get RESIDUAL_TOL = 1e-8 of headroom.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotProjection

# Algebraic predicates use EPS; reconstruction residuals get RESIDUAL_TOL of
# floating headroom. The target regime (n <= 16) keeps conditioning benign.
EPS = 1e-9
RESIDUAL_TOL = 1e-8


def as_square_matrix(entries) -> np.ndarray:
    """Coerce to an immutable square complex matrix with finite entries."""
    m = np.array(entries, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")
    m.setflags(write=False)
    return m


def max_abs(m: np.ndarray) -> float:
    """Entrywise max-abs norm; 0.0 for empty matrices."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = EPS) -> bool:
    return max_abs(m - m.conj().T) <= tol


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A self-adjoint operator on C^dim, stored as a dense matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square_matrix(self.matrix)
        if not is_hermitian(m):
            raise NotHermitian(
                f"matrix deviates from self-adjointness by {max_abs(m - m.conj().T):.3e}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self.dim == other.dim and max_abs(self.matrix - other.matrix) <= EPS

    def __hash__(self):
        return hash(rounded_key(self.matrix))


@dataclass(frozen=True, eq=False)
class ProjectionOperator:
    """An orthogonal projection: hermitian with P^2 = P."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square_matrix(self.matrix)
        if not is_hermitian(m):
            raise NotProjection("projection must be hermitian")
        if max_abs(m @ m - m) > EPS:
            raise NotProjection(
                f"matrix deviates from idempotency by {max_abs(m @ m - m):.3e}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def rank(self) -> int:
        # Trace of a projection is its rank.
        return int(round(float(np.real(np.trace(self.matrix)))))

    @property
    def is_zero(self) -> bool:
        return self.rank == 0

    def as_hermitian(self) -> HermitianOperator:
        return HermitianOperator(self.matrix)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectionOperator):
            return NotImplemented
        return self.dim == other.dim and max_abs(self.matrix - other.matrix) <= EPS

    def __hash__(self):
        return hash(rounded_key(self.matrix))


def identity_projection(dim: int) -> ProjectionOperator:
    return ProjectionOperator(np.eye(dim, dtype=complex))


def zero_projection(dim: int) -> ProjectionOperator:
    return ProjectionOperator(np.zeros((dim, dim), dtype=complex))


def rounded_key(m: np.ndarray, decimals: int = 6) -> tuple:
    """Hashable canonical key: entries rounded and normalized (-0.0 -> 0.0)."""
    flat = np.round(np.asarray(m, dtype=complex).reshape(-1), decimals)
    out = np.empty(flat.size * 2)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    out += 0.0
    return tuple(out.tolist())


def trusted_projection(m: np.ndarray) -> ProjectionOperator:
    """Wrap a matrix known to be an exact projection (e.g. a sum of validated
    orthogonal projections) without re-running the idempotency check."""
    p = ProjectionOperator.__new__(ProjectionOperator)
    m = np.asarray(m, dtype=complex)
    m.setflags(write=False)
    object.__setattr__(p, "matrix", m)
    return p


def eigendecompose(a: HermitianOperator) -> list[tuple[float, ProjectionOperator]]:
    """Spectral decomposition A = sum_i a_i P_i with strictly increasing a_i.

    Eigenvalues closer than EPS are merged into one eigenprojection, so the
    returned projections are mutually orthogonal and sum to the identity.
    """
    if not isinstance(a, HermitianOperator):
        a = HermitianOperator(a)
    w, v = np.linalg.eigh(a.matrix)
    pairs: list[tuple[float, ProjectionOperator]] = []
    i = 0
    n = a.dim
    while i < n:
        j = i
        # Chain-merge nearly equal eigenvalues (degeneracy at 1e-9).
        while j + 1 < n and w[j + 1] - w[j] <= EPS:
            j += 1
        block = v[:, i : j + 1]
        p = block @ block.conj().T
        p = (p + p.conj().T) / 2.0
        pairs.append((float(np.mean(w[i : j + 1])), ProjectionOperator(p)))
        i = j + 1
    return pairs


@dataclass(frozen=True)
class SpectralFamily:
    """Right-continuous spectral family: E_lam = sum of eigenprojections <= lam."""

    eigenvalues: tuple[float, ...]
    cumulative: tuple[ProjectionOperator, ...]

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.cumulative):
            raise ValueError("eigenvalues and cumulative projections must align")
        for x, y in zip(self.eigenvalues, self.eigenvalues[1:]):
            if not x < y:
                raise ValueError("eigenvalues must be strictly increasing")
        ranks = [e.rank for e in self.cumulative]
        if any(r2 <= r1 for r1, r2 in zip(ranks, ranks[1:])):
            raise ValueError("spectral-family ranks must strictly increase")
        last = self.cumulative[-1]
        if max_abs(last.matrix - np.eye(last.dim)) > EPS:
            raise ValueError("final spectral projection must be the identity")
        for i, e1 in enumerate(self.cumulative):
            for e2 in self.cumulative[i:]:
                if not projection_leq(e1, e2):
                    raise ValueError("spectral family must be monotone")

    @property
    def dim(self) -> int:
        return self.cumulative[-1].dim


def spectral_family(a: HermitianOperator) -> SpectralFamily:
    """Cumulative spectral projections of a hermitian operator."""
    pairs = eigendecompose(a)
    cum: list[ProjectionOperator] = []
    total = np.zeros((pairs[0][1].dim,) * 2, dtype=complex)
    for _, p in pairs:
        total = total + p.matrix
        cum.append(ProjectionOperator((total + total.conj().T) / 2.0))
    return SpectralFamily(tuple(val for val, _ in pairs), tuple(cum))


def projection_leq(p: ProjectionOperator, q: ProjectionOperator) -> bool:
    """Range inclusion P <= Q, decided by QP = P within EPS."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"projection dims differ: {p.dim} vs {q.dim}")
    return max_abs(q.matrix @ p.matrix - p.matrix) <= EPS


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return max_abs(a @ b - b @ a)


def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize a square complex matrix as {"dim", "entries"} with [re, im] pairs."""
    m = as_square_matrix(m)
    entries = [
        [[float(z.real + 0.0), float(z.imag + 0.0)] for z in row] for row in m
    ]
    return {"dim": int(m.shape[0]), "entries": entries}


def matrix_from_json(obj: dict) -> np.ndarray:
    """Inverse of matrix_to_json; validates shape against the declared dim."""
    dim = int(obj["dim"])
    entries = obj["entries"]
    if len(entries) != dim or any(len(row) != dim for row in entries):
        raise DimensionMismatch(f"entries do not form a {dim}x{dim} matrix")
    m = np.array(
        [[complex(cell[0], cell[1]) for cell in row] for row in entries],
        dtype=complex,
    )
    return as_square_matrix(m)
