"""The quantum representation over a context poset.

Spectral presheaf (Gel'fand spectra with coarsening restrictions), inner and
outer daseinisation of projections, outer daseinisation of self-adjoint
operators through their spectral families, the quantity-value presheaf of
order-reversing functions, physical quantities as natural transformations,
propositions as subobjects, and sieve-valued truth values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .contexts import AbelianContext, ContextPoset
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotUnitVector,
    PosetNotDownClosed,
)
from .linalg import (
    EPS,
    HermitianOperator,
    ProjectionOperator,
    SpectralFamily,
    max_abs,
    projection_leq,
    spectral_family,
)
from .topos import NaturalTransformation, Presheaf, Sieve

# Value tables are rounded to 9 decimals; equality of arrows is then exact
# table identity rather than a tolerance comparison.
TABLE_DECIMALS = 9


def round_value(x: float) -> float:
    return float(np.round(x, TABLE_DECIMALS)) + 0.0


@dataclass(frozen=True)
class Character:
    """Multiplicative functional of a context: marks one minimal projection."""

    context: AbelianContext
    index: int

    def value(self, a: HermitianOperator) -> float:
        return self.context.value_of(self.index, a)

    def restrict(self, smaller: AbelianContext) -> "Character":
        return Character(smaller, coarsen_index(self.context, self.index, smaller))


def coarsen_index(large: AbelianContext, index: int, small: AbelianContext) -> int:
    """Index of the unique minimal projection of `small` above the given atom."""
    p = large.projections[index]
    for j, q in enumerate(small.projections):
        if projection_leq(p, q):
            return j
    raise InvariantViolation("character does not coarsen; contexts not nested")


def gelfand_spectrum(v: AbelianContext) -> tuple[Character, ...]:
    """One character per minimal projection; the trivial context has exactly one."""
    return tuple(Character(v, i) for i in range(v.k))


def _require_down_closed(poset: ContextPoset):
    if not poset.is_down_closed():
        raise PosetNotDownClosed("poset must contain all coarsenings of its members")


def spectral_presheaf(poset: ContextPoset) -> Presheaf:
    """Stage V carries the character indices of V; restriction coarsens."""
    _require_down_closed(poset)
    sets = {i: tuple(range(v.k)) for i, v in enumerate(poset.contexts)}
    restrictions = {}
    for i, j in poset.comparable_id_pairs():
        if i == j:
            continue
        small, large = poset.contexts[i], poset.contexts[j]
        restrictions[(i, j)] = {
            c: coarsen_index(large, c, small) for c in range(large.k)
        }
    return Presheaf(poset.finite_poset, sets, restrictions)


# ---------------------------------------------------------------------------
# Daseinisation
# ---------------------------------------------------------------------------

def inner_das_projection(p: ProjectionOperator, v: AbelianContext) -> ProjectionOperator:
    """Largest projection in V below P: sum of the atoms under P."""
    if p.dim != v.dim:
        raise DimensionMismatch("projection and context dimensions differ")
    total = np.zeros((v.dim, v.dim), dtype=complex)
    for q in v.projections:
        if projection_leq(q, p):
            total = total + q.matrix
    return ProjectionOperator(total)


def outer_das_projection(p: ProjectionOperator, v: AbelianContext) -> ProjectionOperator:
    """Smallest projection in V above P: sum of the atoms meeting P."""
    if p.dim != v.dim:
        raise DimensionMismatch("projection and context dimensions differ")
    total = np.zeros((v.dim, v.dim), dtype=complex)
    for q in v.projections:
        if max_abs(q.matrix @ p.matrix) > EPS:
            total = total + q.matrix
    return ProjectionOperator(total)


@dataclass(frozen=True)
class DaseinisedOperator:
    """Outer daseinisation of a self-adjoint operator at one context.

    Carries the per-atom eigenvalue table alongside the assembled matrix so
    downstream consumers never re-diagonalize.
    """

    context: AbelianContext
    values: tuple[float, ...]

    @cached_property
    def operator(self) -> HermitianOperator:
        return self.context.element_from_values(self.values)

    def value_at(self, index: int) -> float:
        return self.values[index]


def outer_das_from_family(sf: SpectralFamily, v: AbelianContext) -> DaseinisedOperator:
    """Outer daseinisation via inner daseinisation of the spectral family.

    Each atom of V receives the least eigenvalue whose inner-daseinised
    spectral projection dominates it; the final step always does, since the
    family tops out at the identity.
    """
    if sf.dim != v.dim:
        raise DimensionMismatch("operator and context dimensions differ")
    inner_family = [inner_das_projection(e, v) for e in sf.cumulative]
    values = []
    for q in v.projections:
        for lam, e_inner in zip(sf.eigenvalues, inner_family):
            if projection_leq(q, e_inner):
                values.append(lam)
                break
        else:
            raise InvariantViolation("spectral family failed to reach the identity")
    return DaseinisedOperator(v, tuple(values))


def outer_das_operator(a: HermitianOperator, v: AbelianContext) -> DaseinisedOperator:
    return outer_das_from_family(spectral_family(a), v)


# ---------------------------------------------------------------------------
# Order-reversing functions and the quantity-value presheaf
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderReversingFunction:
    """Real function on the down-set of a stage, antitone in the stage order."""

    at: int
    values: tuple[tuple[int, float], ...]  # (stage id, value), sorted by id

    @classmethod
    def from_dict(cls, at: int, table: dict[int, float]) -> "OrderReversingFunction":
        vals = tuple(sorted((int(k), round_value(x)) for k, x in table.items()))
        return cls(at, vals)

    def as_dict(self) -> dict[int, float]:
        return dict(self.values)

    def validate(self, poset: ContextPoset) -> "OrderReversingFunction":
        table = self.as_dict()
        if set(table) != set(poset.down_set_ids(self.at)):
            raise InvariantViolation("function domain must be the full down-set")
        for i in table:
            for j in table:
                if poset.leq_ids(i, j) and table[i] < table[j] - 1e-9:
                    raise InvariantViolation(
                        f"order-reversal fails between stages {i} and {j}"
                    )
        return self


def _table_restrict(table: tuple, keep: set[int]) -> tuple:
    return tuple((i, x) for i, x in table if i in keep)


def presheaf_from_tables(poset: ContextPoset, stage_tables: dict) -> Presheaf:
    """Quantity-value presheaf holding the given value tables, closed under
    domain restriction. Points are the canonical (stage, value) tuples."""
    _require_down_closed(poset)
    n = len(poset)
    sets: dict[int, set] = {i: set() for i in range(n)}
    for i in range(n):
        for table in stage_tables.get(i, ()):  # tables may be sparse per stage
            sets[i].add(tuple(sorted((int(k), round_value(x)) for k, x in table)))
    # Closure: the restriction of a stored table must itself be stored.
    for j in range(n):
        for table in list(sets[j]):
            for i in poset.down_set_ids(j):
                keep = set(poset.down_set_ids(i))
                sets[i].add(_table_restrict(table, keep))
    sets_sorted = {i: tuple(sorted(sets[i])) for i in range(n)}
    restrictions = {}
    for i, j in poset.comparable_id_pairs():
        if i == j:
            continue
        keep = set(poset.down_set_ids(i))
        restrictions[(i, j)] = {t: _table_restrict(t, keep) for t in sets_sorted[j]}
    return Presheaf(poset.finite_poset, sets_sorted, restrictions)


def daseinisation_tables(a: HermitianOperator, poset: ContextPoset) -> dict:
    """Per-stage value tables of the arrow attached to one operator.

    At stage V, the character marking atom c yields the function sending each
    lower stage W to that character's (coarsened) evaluation of the outer
    daseinisation of the operator at W.
    """
    sf = spectral_family(a)
    das = [outer_das_from_family(sf, v) for v in poset.contexts]
    tables: dict[int, list] = {}
    for j, v in enumerate(poset.contexts):
        stage = []
        for c in range(v.k):
            table = []
            for i in poset.down_set_ids(j):
                w = poset.contexts[i]
                idx = coarsen_index(v, c, w)
                table.append((i, das[i].value_at(idx)))
            stage.append(tuple(table))
        tables[j] = stage
    return tables


def quantity_value_presheaf(poset: ContextPoset, operators=()) -> Presheaf:
    """Extensional quantity-value presheaf for the registered operators."""
    merged: dict[int, list] = {}
    for a in operators:
        if not isinstance(a, HermitianOperator):
            a = HermitianOperator(a)
        for j, stage in daseinisation_tables(a, poset).items():
            merged.setdefault(j, []).extend(stage)
    if not operators:
        merged = {i: [] for i in range(len(poset))}
    return presheaf_from_tables(poset, merged)


def daseinised_arrow(
    a: HermitianOperator,
    poset: ContextPoset,
    sigma: Presheaf | None = None,
    rvalue: Presheaf | None = None,
    tables: dict | None = None,
) -> NaturalTransformation:
    """The physical-quantity arrow from the spectral presheaf to the
    quantity-value presheaf attached to one operator."""
    if not isinstance(a, HermitianOperator):
        a = HermitianOperator(a)
    if a.dim != poset.dim:
        raise DimensionMismatch("operator does not act on the poset's space")
    if tables is None:
        tables = daseinisation_tables(a, poset)
    if sigma is None:
        sigma = spectral_presheaf(poset)
    if rvalue is None:
        rvalue = presheaf_from_tables(poset, tables)
    comps = {
        j: {c: _normalize_table(tables[j][c]) for c in range(poset.contexts[j].k)}
        for j in range(len(poset))
    }
    return NaturalTransformation(sigma, rvalue, comps)


def _normalize_table(table) -> tuple:
    return tuple(sorted((int(k), round_value(x)) for k, x in table))


def arrow_tables(eta: NaturalTransformation) -> dict:
    """Canonical stage -> point -> value-table form, for exact comparisons."""
    return {v: dict(eta.components[v]) for v in sorted(eta.components)}


# ---------------------------------------------------------------------------
# Propositions, truth objects, truth values
# ---------------------------------------------------------------------------

def proposition_subobject(p: ProjectionOperator, poset: ContextPoset, sigma=None):
    """Characters assigning 1 to the outer daseinisation of the projection."""
    from .topos import Subobject

    if sigma is None:
        sigma = spectral_presheaf(poset)
    comps = {}
    for j, v in enumerate(poset.contexts):
        das = outer_das_projection(p, v)
        comps[j] = frozenset(
            c for c in range(v.k) if v.value_of(c, das.as_hermitian()) > 0.5
        )
    return Subobject(sigma, comps)


def _as_unit_vector(psi) -> np.ndarray:
    vec = np.asarray(psi, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise NotUnitVector(f"state norm is {norm:.6f}, expected 1")
    return vec


@dataclass(frozen=True)
class TruthObject:
    """Per-context collection of projections assigned expectation 1 by a state."""

    state: tuple
    per_context: dict  # context id -> tuple of ProjectionOperator

    def projections_at(self, context_id: int) -> tuple:
        return self.per_context[context_id]


def truth_object(psi, poset: ContextPoset) -> TruthObject:
    psi = _as_unit_vector(psi)
    if psi.size != poset.dim:
        raise DimensionMismatch("state dimension differs from the poset's space")
    per = {}
    for j, v in enumerate(poset.contexts):
        listed = []
        for r in range(1, v.k + 1):
            for combo in itertools.combinations(range(v.k), r):
                m = sum(v.projections[i].matrix for i in combo)
                if float(np.real(psi.conj() @ m @ psi)) >= 1.0 - 1e-9:
                    listed.append(ProjectionOperator(m))
        if not any(q.rank == v.dim for q in listed):
            raise InvariantViolation("identity missing from a truth object stage")
        per[j] = tuple(listed)
    return TruthObject(tuple(complex(z) for z in psi), per)


def truth_value(
    p: ProjectionOperator, psi, v: AbelianContext, poset: ContextPoset
) -> Sieve:
    """Sieve of stages below V where the daseinised proposition holds in the
    state: expectation of the outer daseinisation reaches 1."""
    psi = _as_unit_vector(psi)
    at = poset.index_of(v)
    members = set()
    for i in poset.down_set_ids(at):
        das = outer_das_projection(p, poset.contexts[i])
        if float(np.real(psi.conj() @ das.matrix @ psi)) >= 1.0 - 1e-9:
            members.add(i)
    sieve = Sieve(at, frozenset(members))
    # Outer daseinisation only grows toward smaller contexts, so this is
    # automatic; assert it rather than assume it.
    return sieve.require_down_closed(poset.finite_poset)
