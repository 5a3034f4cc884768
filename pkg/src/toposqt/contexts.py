"""Abelian contexts and their finite posets.

A context is a unital abelian von Neumann subalgebra of B(C^n), stored as its
orthogonal decomposition into minimal projections. The full lattice of such
subalgebras is uncountable; posets here are generated from user operators and
closed under coarsenings and pairwise algebra intersections, so every down-set
the presheaf layer needs is fully present.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NonCommuting,
    TooManyBlocks,
)
from .linalg import (
    EPS,
    HermitianOperator,
    ProjectionOperator,
    commutator_norm,
    eigendecompose,
    identity_projection,
    matrix_to_json,
    max_abs,
    rounded_key,
    trusted_projection,
)
from .topos import FinitePoset

# Set-partition closure is exponential; six blocks (Bell(6) = 203) is plenty
# for desk-scale posets and keeps generation fast.
MAX_COARSENING_BLOCKS = 6


@dataclass(frozen=True, eq=False)
class AbelianContext:
    """Orthogonal decomposition of C^dim into minimal projections.

    Projections are kept in canonical order (rank, then rounded entries), so
    equality and hashing are decidable and iteration order is stable.
    """

    dim: int
    projections: tuple[ProjectionOperator, ...]

    def __post_init__(self):
        projs = tuple(
            p if isinstance(p, ProjectionOperator) else ProjectionOperator(p)
            for p in self.projections
        )
        if not projs:
            raise InvariantViolation("a context needs at least one projection")
        if any(p.dim != self.dim for p in projs):
            raise DimensionMismatch("projection dimension differs from context dim")
        if any(p.is_zero for p in projs):
            raise InvariantViolation("minimal projections must be nonzero")
        for i, p in enumerate(projs):
            for q in projs[i + 1 :]:
                if max_abs(p.matrix @ q.matrix) > EPS:
                    raise InvariantViolation("minimal projections must be orthogonal")
        total = sum(p.matrix for p in projs)
        if max_abs(total - np.eye(self.dim)) > EPS:
            raise InvariantViolation("minimal projections must sum to the identity")
        projs = tuple(sorted(projs, key=lambda p: (p.rank, rounded_key(p.matrix))))
        object.__setattr__(self, "projections", projs)

    @classmethod
    def _trusted(cls, dim: int, projections) -> "AbelianContext":
        """Construct without re-validating orthogonality; for internal use on
        block sums of atoms that are orthogonal by construction."""
        obj = cls.__new__(cls)
        object.__setattr__(obj, "dim", dim)
        object.__setattr__(
            obj,
            "projections",
            tuple(sorted(projections, key=lambda p: (p.rank, rounded_key(p.matrix)))),
        )
        return obj

    @property
    def k(self) -> int:
        return len(self.projections)

    @property
    def is_trivial(self) -> bool:
        return self.k == 1

    @property
    def rank_signature(self) -> tuple[int, ...]:
        return tuple(p.rank for p in self.projections)

    @cached_property
    def canonical_key(self) -> tuple:
        return (self.dim,) + tuple(rounded_key(p.matrix) for p in self.projections)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AbelianContext):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self):
        return hash(self.canonical_key)

    def value_of(self, index: int, a: HermitianOperator) -> float:
        """Eigenvalue of an algebra element on the range of minimal projection i."""
        p = self.projections[index]
        return float(np.real(np.trace(p.matrix @ a.matrix)) / p.rank)

    def element_from_values(self, values) -> HermitianOperator:
        m = sum(float(v) * p.matrix for v, p in zip(values, self.projections))
        return HermitianOperator(m)

    def contains(self, a: HermitianOperator, tol: float = 1e-8) -> bool:
        """Membership of a hermitian operator in the algebra's linear span."""
        if a.matrix.shape[0] != self.dim:
            raise DimensionMismatch("operator dimension differs from context dim")
        recon = sum(
            self.value_of(i, a) * p.matrix for i, p in enumerate(self.projections)
        )
        return max_abs(recon - a.matrix) <= tol


def trivial_context(dim: int) -> AbelianContext:
    return AbelianContext(dim, (identity_projection(dim),))


def context_from_commuting(ops) -> AbelianContext:
    """Joint eigenspace decomposition of a commuting family of hermitians.

    The minimal projections of the generated algebra are obtained by
    iteratively splitting blocks with each operator's eigenprojections.
    """
    ops = [a if isinstance(a, HermitianOperator) else HermitianOperator(a) for a in ops]
    if not ops:
        raise InvariantViolation("need at least one operator (or use trivial_context)")
    dim = ops[0].dim
    if any(a.dim != dim for a in ops):
        raise DimensionMismatch("operators must share one dimension")
    for i, a in enumerate(ops):
        for b in ops[i + 1 :]:
            norm = commutator_norm(a.matrix, b.matrix)
            if norm > EPS:
                raise NonCommuting(f"operators fail to commute (|[A,B]| = {norm:.3e})")
    blocks = [np.eye(dim, dtype=complex)]
    for a in ops:
        refined = []
        for _, p in eigendecompose(a):
            for q in blocks:
                prod = q @ p.matrix
                cleaned = _projectify((prod + prod.conj().T) / 2.0)
                if cleaned is not None:
                    refined.append(cleaned)
        blocks = refined
    return AbelianContext(dim, tuple(ProjectionOperator(b) for b in blocks))


def _projectify(h: np.ndarray, tol: float = 1e-7):
    """Snap a nearly idempotent hermitian matrix to an exact-rank projection.

    Returns None when the matrix is (numerically) zero. Products of commuting
    projections drift at float scale; re-diagonalizing keeps block splitting
    stable through deep refinements.
    """
    w, v = np.linalg.eigh(h)
    if np.any((w > tol) & (w < 1 - tol)):
        raise NonCommuting("block refinement produced a non-projection")
    keep = v[:, w > 0.5]
    if keep.shape[1] == 0:
        return None
    p = keep @ keep.conj().T
    return (p + p.conj().T) / 2.0


def includes(small: AbelianContext, large: AbelianContext) -> bool:
    """Algebra inclusion small <= large: each minimal projection of `small`
    is a sum of minimal projections of `large`."""
    if small.dim != large.dim:
        raise DimensionMismatch("contexts live on different spaces")
    for p in small.projections:
        total = np.zeros((small.dim, small.dim), dtype=complex)
        for q in large.projections:
            if max_abs(p.matrix @ q.matrix - q.matrix) <= EPS:
                total = total + q.matrix
        if max_abs(total - p.matrix) > EPS:
            return False
    return True


def set_partitions(items: list) -> list[list[list]]:
    """All partitions of a list into nonempty blocks (Bell-number many)."""
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for part in set_partitions(rest):
        for i in range(len(part)):
            out.append(part[:i] + [part[i] + [first]] + part[i + 1 :])
        out.append([[first]] + part)
    return out


def coarsenings(v: AbelianContext) -> set[AbelianContext]:
    """All contexts below v: one per partition of its minimal projections."""
    if v.k > MAX_COARSENING_BLOCKS:
        raise TooManyBlocks(
            f"context has {v.k} minimal projections (limit {MAX_COARSENING_BLOCKS})"
        )
    out = set()
    for part in set_partitions(list(range(v.k))):
        projs = []
        for block in part:
            m = sum(v.projections[i].matrix for i in block)
            projs.append(trusted_projection(m))
        out.add(AbelianContext._trusted(v.dim, projs))
    return out


def intersection_context(v1: AbelianContext, v2: AbelianContext) -> AbelianContext:
    """Intersection of two abelian algebras.

    Joint elements force equal coefficients across any pair of minimal
    projections with nonzero product, so the intersection's minimal
    projections are the connected-component sums of that overlap graph.
    """
    if v1.dim != v2.dim:
        raise DimensionMismatch("contexts live on different spaces")
    k1, k2 = v1.k, v2.k
    parent = list(range(k1 + k2))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for i, p in enumerate(v1.projections):
        for j, q in enumerate(v2.projections):
            if max_abs(p.matrix @ q.matrix) > EPS:
                union(i, k1 + j)
    groups: dict[int, list[int]] = {}
    for i in range(k1):
        groups.setdefault(find(i), []).append(i)
    projs = []
    for members in groups.values():
        m = sum(v1.projections[i].matrix for i in members)
        projs.append(trusted_projection(m))
    return AbelianContext._trusted(v1.dim, projs)


def direct_sum_context(v1: AbelianContext, v2: AbelianContext) -> AbelianContext:
    """Block-diagonal context on C^{n1+n2} with atoms P_i + 0 and 0 + Q_j."""
    n1, n2 = v1.dim, v2.dim
    projs = []
    for p in v1.projections:
        m = np.zeros((n1 + n2, n1 + n2), dtype=complex)
        m[:n1, :n1] = p.matrix
        projs.append(ProjectionOperator(m))
    for q in v2.projections:
        m = np.zeros((n1 + n2, n1 + n2), dtype=complex)
        m[n1:, n1:] = q.matrix
        projs.append(ProjectionOperator(m))
    return AbelianContext(n1 + n2, tuple(projs))


def direct_sum_embed(v: AbelianContext, dim2: int) -> AbelianContext:
    """The monotone embedding V -> V + C1 into the direct-sum context poset."""
    if dim2 < 1:
        raise DimensionMismatch("second summand needs positive dimension")
    return direct_sum_context(v, trivial_context(dim2))


def tensor_context(v1: AbelianContext, v2: AbelianContext) -> AbelianContext:
    """Product context on C^{n1*n2} with atoms P_i (x) Q_j."""
    projs = tuple(
        ProjectionOperator(np.kron(p.matrix, q.matrix))
        for p in v1.projections
        for q in v2.projections
    )
    return AbelianContext(v1.dim * v2.dim, projs)


def context_from_hermitian_span(mats, dim: int) -> AbelianContext:
    """Context generated by a commuting hermitian spanning set (identity assumed)."""
    ops = [HermitianOperator(m) for m in mats]
    if not ops:
        return trivial_context(dim)
    return context_from_commuting(ops)


def _hermitian_basis(n: int) -> list[np.ndarray]:
    out = []
    for i in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1.0
        out.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = m[j, i] = 1.0
            out.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = -1.0j
            m[j, i] = 1.0j
            out.append(m)
    return out


def largest_factor_subalgebra(w: AbelianContext, n1: int, n2: int) -> AbelianContext:
    """The largest context V on C^{n1} with V (x) C1 inside the algebra of w.

    Solves the linear system {A hermitian : A (x) 1 in span(w)} and extracts
    the minimal projections of that (abelian) solution algebra by joint
    eigendecomposition of a basis.
    """
    if w.dim != n1 * n2:
        raise DimensionMismatch(f"context dim {w.dim} is not {n1}*{n2}")
    basis = _hermitian_basis(n1)
    columns = []
    eye2 = np.eye(n2, dtype=complex)
    for h in basis:
        x = np.kron(h, eye2)
        # Residual of x against the orthogonal (Hilbert-Schmidt) projection
        # onto span(w); zero residual means A (x) 1 lies in the algebra.
        proj = sum(
            (np.trace(q.matrix @ x) / q.rank) * q.matrix for q in w.projections
        )
        r = x - proj
        columns.append(np.concatenate([r.real.reshape(-1), r.imag.reshape(-1)]))
    m = np.stack(columns, axis=1)
    _, svals, vt = np.linalg.svd(m)
    tol = 1e-8
    null_dim = int(np.sum(svals <= tol)) + (vt.shape[0] - len(svals))
    if null_dim == 0:
        raise InvariantViolation("solution algebra lost the identity")
    null_vecs = vt[vt.shape[0] - null_dim :]
    gens = []
    for vec in null_vecs:
        a = sum(c * h for c, h in zip(vec, basis))
        a = (a + a.conj().T) / 2.0
        if max_abs(a) > 1e-9:
            gens.append(a)
    if not gens:
        return trivial_context(n1)
    return context_from_commuting(gens)


# ---------------------------------------------------------------------------
# Context posets
# ---------------------------------------------------------------------------

class ContextPoset:
    """Finite poset of contexts under algebra inclusion.

    Contexts are canonically sorted (block count, then canonical key), so ids
    are stable across runs. `augmented` records whether the trivial algebra is
    admitted as bottom element.
    """

    def __init__(self, contexts, augmented: bool):
        dedup: dict[tuple, AbelianContext] = {}
        for v in contexts:
            key = v.canonical_key
            if key in dedup:
                gap = _context_gap(dedup[key], v)
                if gap > EPS:
                    warnings.warn(
                        f"deduplication merged nearly degenerate contexts "
                        f"(entry gap {gap:.3e}); inputs may be under-resolved",
                        stacklevel=2,
                    )
            else:
                dedup[key] = v
        items = sorted(dedup.values(), key=lambda v: (v.k, v.canonical_key))
        if not items:
            raise InvariantViolation("a context poset cannot be empty")
        dim = items[0].dim
        if any(v.dim != dim for v in items):
            raise DimensionMismatch("poset contexts must share one dimension")
        if any(v.is_trivial for v in items) != augmented:
            raise InvariantViolation(
                "augmented flag disagrees with presence of the trivial context"
            )
        self.contexts: tuple[AbelianContext, ...] = tuple(items)
        self.augmented = bool(augmented)
        self.dim = dim
        n = len(items)
        leq = np.zeros((n, n), dtype=bool)
        for i, small in enumerate(items):
            for j, large in enumerate(items):
                leq[i, j] = includes(small, large)
        self._leq = leq
        self._validate_order()

    def _validate_order(self):
        leq = self._leq
        n = len(self.contexts)
        if not np.all(np.diag(leq)):
            raise InvariantViolation("inclusion must be reflexive")
        if np.any(leq & leq.T & ~np.eye(n, dtype=bool)):
            raise InvariantViolation("inclusion must be antisymmetric after dedup")
        closure = (leq.astype(int) @ leq.astype(int)) > 0
        if np.any(closure & ~leq):
            raise InvariantViolation("inclusion must be transitive")
        if self.augmented and not np.all(leq[self.trivial_id]):
            raise InvariantViolation("trivial context must be the bottom element")

    def __len__(self) -> int:
        return len(self.contexts)

    def __iter__(self):
        return iter(self.contexts)

    def __contains__(self, v: AbelianContext) -> bool:
        return any(v == w for w in self.contexts)

    @cached_property
    def trivial_id(self) -> int:
        for i, v in enumerate(self.contexts):
            if v.is_trivial:
                return i
        raise InvariantViolation("poset has no trivial context")

    def index_of(self, v: AbelianContext) -> int:
        for i, w in enumerate(self.contexts):
            if v == w:
                return i
        raise KeyError("context not in poset")

    def leq_ids(self, i: int, j: int) -> bool:
        return bool(self._leq[i, j])

    def down_set_ids(self, j: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self._leq[:, j]))

    def comparable_id_pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in np.argwhere(self._leq)]

    @cached_property
    def finite_poset(self) -> FinitePoset:
        n = len(self.contexts)
        rel = frozenset(
            (i, j) for i in range(n) for j in range(n) if self._leq[i, j]
        )
        return FinitePoset(tuple(range(n)), rel)

    def is_down_closed(self) -> bool:
        """Every coarsening of every member is present (trivial one only when
        the poset is augmented)."""
        cached = getattr(self, "_down_closed", None)
        if cached is None:
            cached = self._compute_down_closed()
            object.__setattr__(self, "_down_closed", cached)
        return cached

    def _compute_down_closed(self) -> bool:
        have = set(self.contexts)
        for v in self.contexts:
            for w in coarsenings(v):
                if w.is_trivial and not self.augmented:
                    continue
                if w not in have:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "augmented": self.augmented,
            "dim": self.dim,
            "contexts": [
                {
                    "id": i,
                    "rank_signature": list(v.rank_signature),
                    "projections": [matrix_to_json(p.matrix) for p in v.projections],
                }
                for i, v in enumerate(self.contexts)
            ],
            "leq": sorted(
                [i, j] for i, j in self.comparable_id_pairs() if i != j
            ),
        }

    def to_dot(self) -> str:
        """Hasse diagram in DOT format (edges point from smaller to larger)."""
        lines = ["digraph contexts {", "  rankdir=BT;"]
        for i, v in enumerate(self.contexts):
            sig = ",".join(str(r) for r in v.rank_signature)
            lines.append(f'  C{i} [label="C{i} ({sig})"];')
        for a, b in self.finite_poset.covers():
            lines.append(f"  C{a} -> C{b};")
        lines.append("}")
        return "\n".join(lines)


def _context_gap(a: AbelianContext, b: AbelianContext) -> float:
    return max(
        max_abs(p.matrix - q.matrix)
        for p, q in zip(a.projections, b.projections)
    )


def close_contexts(seeds, include_trivial: bool, dim: int) -> list[AbelianContext]:
    """Fixpoint closure under coarsenings and pairwise intersections."""
    found: dict[tuple, AbelianContext] = {}
    frontier: list[AbelianContext] = []
    intersected: set[tuple] = set()

    def add(v: AbelianContext):
        if v.is_trivial and not include_trivial:
            return
        key = v.canonical_key
        if key not in found:
            found[key] = v
            frontier.append(v)

    for v in seeds:
        add(v)
    if include_trivial:
        add(trivial_context(dim))
    while frontier:
        batch, frontier = frontier, []
        for v in batch:
            for w in coarsenings(v):
                add(w)
        current = list(found.values())
        for i, v in enumerate(current):
            for w in current[i + 1 :]:
                pair = (v.canonical_key, w.canonical_key)
                if pair not in intersected:
                    intersected.add(pair)
                    add(intersection_context(v, w))
    return list(found.values())


def generate_context_poset(
    generators, include_trivial: bool, dim: int | None = None
) -> ContextPoset:
    """Finite stand-in for the context poset, generated from operators.

    Takes every nonempty pairwise-commuting subset of the generators to its
    joint context, then closes under coarsenings and intersections.
    Non-commuting subsets are skipped, not an error.
    """
    ops = [
        a if isinstance(a, HermitianOperator) else HermitianOperator(a)
        for a in generators
    ]
    if len(ops) > 8:
        raise InvariantViolation("at most 8 generators are supported")
    if ops:
        dims = {a.dim for a in ops}
        if len(dims) > 1:
            raise DimensionMismatch("generators must share one dimension")
        dim = dims.pop()
    if dim is None:
        raise DimensionMismatch("dim is required when no generators are given")
    seeds = []
    n = len(ops)
    for mask in range(1, 1 << n):
        subset = [ops[i] for i in range(n) if mask >> i & 1]
        if all(
            commutator_norm(a.matrix, b.matrix) <= EPS
            for i, a in enumerate(subset)
            for b in subset[i + 1 :]
        ):
            seeds.append(context_from_commuting(subset))
    contexts = close_contexts(seeds, include_trivial, dim)
    if not contexts:
        raise InvariantViolation(
            "no contexts generated; pass include_trivial=True or add generators"
        )
    return ContextPoset(contexts, augmented=include_trivial)


def direct_sum_poset(
    poset1: ContextPoset, poset2: ContextPoset, include_trivial: bool = True
) -> ContextPoset:
    """Poset on C^{n1+n2} spanned by block sums V1 + V2 of member contexts."""
    seeds = [
        direct_sum_context(v1, v2) for v1 in poset1.contexts for v2 in poset2.contexts
    ]
    dim = poset1.dim + poset2.dim
    return ContextPoset(close_contexts(seeds, include_trivial, dim), include_trivial)


def tensor_composite_poset(
    poset1: ContextPoset,
    poset2: ContextPoset,
    extra_generator_sets=(),
    include_trivial: bool = True,
) -> ContextPoset:
    """Poset on C^{n1*n2} with all product contexts V1 (x) V2 (hence the
    factor images V (x) C1 and C1 (x) V) plus optional entangled generators."""
    seeds = [
        tensor_context(v1, v2) for v1 in poset1.contexts for v2 in poset2.contexts
    ]
    for gens in extra_generator_sets:
        seeds.append(context_from_commuting(gens))
    dim = poset1.dim * poset2.dim
    return ContextPoset(close_contexts(seeds, include_trivial, dim), include_trivial)
