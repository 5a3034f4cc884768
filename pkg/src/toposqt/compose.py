"""Quantum translation representations along sum and composite arrows.

The disjoint-sum side is exact: pulling the block-operator arrow back through
the embedding V -> V + C1 reproduces the component arrow table-for-table. The
tensor side is entanglement-limited: the pulled-back arrow corresponds at each
stage W to the daseinised factor operator on the largest factor subalgebra
V_W, tensored with the identity, and in general that differs from daseinising
the ampliated operator directly in W. The gap explorer quantifies the
difference and hunts for witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .contexts import (
    AbelianContext,
    ContextPoset,
    close_contexts,
    context_from_commuting,
    direct_sum_context,
    direct_sum_embed,
    largest_factor_subalgebra,
    tensor_context,
    trivial_context,
)
from .errors import DimensionMismatch, InvariantViolation, MissingContext
from .linalg import (
    HermitianOperator,
    ProjectionOperator,
    max_abs,
    projection_leq,
)
from .quantum import (
    arrow_tables,
    daseinisation_tables,
    daseinised_arrow,
    outer_das_operator,
    presheaf_from_tables,
    round_value,
    spectral_presheaf,
)
from .topos import NaturalTransformation, Presheaf, inverse_image, inverse_image_nat

EQUALITY_TOL = 1e-8
# Reporting threshold sits a dead band above the equality threshold so that
# numerically marginal contexts never flap between witness and non-witness.
GAP_REPORT_TOL = 1e-6


def block_diag(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    n1, n2 = a1.shape[0], a2.shape[0]
    out = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    out[:n1, :n1] = a1
    out[n1:, n1:] = a2
    return out


def _as_op(a) -> HermitianOperator:
    return a if isinstance(a, HermitianOperator) else HermitianOperator(a)


# ---------------------------------------------------------------------------
# Direct-sum lemma and translation
# ---------------------------------------------------------------------------

def lemma_direct_sum_check(a1, a2, v1: AbelianContext, v2: AbelianContext) -> bool:
    """Daseinising a block operator in a block context equals daseinising the
    blocks separately: delta(A1+A2)_{V1+V2} = delta(A1)_{V1} + delta(A2)_{V2}."""
    a1, a2 = _as_op(a1), _as_op(a2)
    return direct_sum_lemma_residual(a1, a2, v1, v2) <= EQUALITY_TOL


def direct_sum_lemma_residual(a1, a2, v1: AbelianContext, v2: AbelianContext) -> float:
    a1, a2 = _as_op(a1), _as_op(a2)
    if a1.dim != v1.dim or a2.dim != v2.dim:
        raise DimensionMismatch("operators must act on their contexts' spaces")
    v = direct_sum_context(v1, v2)
    whole = outer_das_operator(HermitianOperator(block_diag(a1.matrix, a2.matrix)), v)
    left = outer_das_operator(a1, v1)
    right = outer_das_operator(a2, v2)
    split = block_diag(left.operator.matrix, right.operator.matrix)
    return max_abs(whole.operator.matrix - split)


@dataclass
class SumTranslationBundle:
    """All the pieces of the pulled-back arrow for a disjoint sum.

    phi embeds each component character into the block context's spectrum
    (its image omits exactly the extra character marking the second summand);
    beta reads block-side value tables back through the embedding's image.
    The composite arrow equals the component arrow exactly.
    """

    a1: HermitianOperator
    a2: HermitianOperator
    poset1: ContextPoset
    poset_sum: ContextPoset
    m_map: dict
    sigma1: Presheaf
    mu_sigma: Presheaf
    mu_r: Presheaf
    phi: NaturalTransformation
    mu_arrow: NaturalTransformation
    beta: NaturalTransformation
    arrow: NaturalTransformation
    lambda0_index: dict

    @cached_property
    def reference_arrow(self) -> NaturalTransformation:
        return daseinised_arrow(self.a1, self.poset1, sigma=self.sigma1)


def sum_translation_bundle(a1, a2, poset1: ContextPoset, poset_sum: ContextPoset) -> SumTranslationBundle:
    a1, a2 = _as_op(a1), _as_op(a2)
    n1 = poset1.dim
    if a1.dim != n1:
        raise DimensionMismatch("first operator must act on the component space")
    n2 = poset_sum.dim - n1
    if n2 < 1 or a2.dim != n2:
        raise DimensionMismatch("second operator must act on the complement space")

    m_map = {}
    for i, v in enumerate(poset1.contexts):
        embedded = direct_sum_embed(v, n2)
        try:
            m_map[i] = poset_sum.index_of(embedded)
        except KeyError:
            raise MissingContext(
                f"poset_sum lacks the embedded image of context {i}"
            ) from None

    fp1 = poset1.finite_poset
    big = HermitianOperator(block_diag(a1.matrix, a2.matrix))
    sigma_sum = spectral_presheaf(poset_sum)
    big_tables = daseinisation_tables(big, poset_sum)
    r_sum = presheaf_from_tables(poset_sum, big_tables)
    eta_sum = daseinised_arrow(big, poset_sum, sigma=sigma_sum, rvalue=r_sum, tables=big_tables)

    mu_sigma = inverse_image(m_map, fp1, sigma_sum)
    mu_r = inverse_image(m_map, fp1, r_sum)
    mu_arrow = inverse_image_nat(m_map, fp1, eta_sum)

    sigma1 = spectral_presheaf(poset1)
    phi_comps = {}
    lambda0 = {}
    for i, v in enumerate(poset1.contexts):
        mv = poset_sum.contexts[m_map[i]]
        comp = {}
        for c, p in enumerate(v.projections):
            embedded = ProjectionOperator(
                block_diag(p.matrix, np.zeros((n2, n2), dtype=complex))
            )
            comp[c] = _atom_index(mv, embedded)
        phi_comps[i] = comp
        extra = ProjectionOperator(
            block_diag(np.zeros((n1, n1), dtype=complex), np.eye(n2, dtype=complex))
        )
        lambda0[i] = _atom_index(mv, extra)
        image = set(comp.values())
        if len(image) != v.k or image | {lambda0[i]} != set(range(mv.k)):
            raise InvariantViolation(
                "embedded spectrum must be the component spectrum plus one character"
            )
    phi = NaturalTransformation(sigma1, mu_sigma, phi_comps)

    # beta reads block-side tables through the embedding's image: the value at
    # a component stage is the block table's value at that stage's image. On
    # the m-image-restricted tables this is a bijection with the target stage
    # sets; distinct full tables may coincide there, because the down-set of
    # V + C1 also contains mixed coarsenings that are images of nothing.
    beta_raw = {}
    target_tables: dict[int, list] = {i: [] for i in range(len(poset1))}
    for i in range(len(poset1)):
        down = poset1.down_set_ids(i)
        stage = {}
        for table in mu_r.sets[i]:
            lookup = dict(table)
            restricted = tuple(
                sorted((i2, round_value(lookup[m_map[i2]])) for i2 in down)
            )
            stage[table] = restricted
            target_tables[i].append(restricted)
        beta_raw[i] = stage
    r_target = presheaf_from_tables(poset1, target_tables)
    beta = NaturalTransformation(mu_r, r_target, beta_raw)
    for i, stage in beta_raw.items():
        if set(stage.values()) != set(r_target.sets[i]):
            raise InvariantViolation(
                "beta must map the restricted tables onto the target stage"
            )

    arrow_comps = {
        i: {
            c: beta_raw[i][mu_arrow.components[i][phi_comps[i][c]]]
            for c in range(poset1.contexts[i].k)
        }
        for i in range(len(poset1))
    }
    arrow = NaturalTransformation(sigma1, r_target, arrow_comps)

    return SumTranslationBundle(
        a1, a2, poset1, poset_sum, m_map, sigma1, mu_sigma, mu_r,
        phi, mu_arrow, beta, arrow, lambda0,
    )


def _atom_index(v: AbelianContext, p: ProjectionOperator) -> int:
    for j, q in enumerate(v.projections):
        if max_abs(q.matrix - p.matrix) <= 1e-9:
            return j
    raise MissingContext("projection is not an atom of the context")


def sum_translation(a1, a2, poset1: ContextPoset, poset_sum: ContextPoset) -> NaturalTransformation:
    """Pull the block arrow back along the sum embedding.

    The result is asserted equal, stage by stage and table by table, to the
    arrow of the first operator on the component poset: this is the exact
    commutativity of the disjoint-sum translation.
    """
    bundle = sum_translation_bundle(a1, a2, poset1, poset_sum)
    expected = arrow_tables(bundle.reference_arrow)
    actual = arrow_tables(bundle.arrow)
    if expected != actual:
        raise InvariantViolation(
            "sum translation deviates from the component arrow; "
            "the commutativity identity failed"
        )
    return bundle.arrow


# ---------------------------------------------------------------------------
# Composite (tensor) translation
# ---------------------------------------------------------------------------

@dataclass
class TensorTranslationBundle:
    """Pulled-back arrow for a composite, stage-indexed by tensor contexts.

    n_map sends each context W to (the id of) its largest factor subalgebra
    V_W inside the augmented component poset; the arrow's stage-W component
    corresponds to the operator delta(A1)_{V_W} (x) 1.
    """

    a1: HermitianOperator
    n1: int
    n2: int
    poset_w: ContextPoset
    poset1_star: ContextPoset
    n_map: dict
    sigma_w: Presheaf
    nu_sigma: Presheaf
    nu_r: Presheaf
    phi: NaturalTransformation
    nu_arrow: NaturalTransformation
    beta: NaturalTransformation
    arrow: NaturalTransformation

    def stage_operator(self, w_id: int) -> np.ndarray:
        """Operator reconstructed from the stage component's value tables."""
        w = self.poset_w.contexts[w_id]
        out = np.zeros((w.dim, w.dim), dtype=complex)
        comp = self.arrow.components[w_id]
        for c, table in comp.items():
            value = dict(table)[w_id]
            out = out + value * w.projections[c].matrix
        return out

    def expected_stage_operator(self, w_id: int) -> np.ndarray:
        v_w = self.poset1_star.contexts[self.n_map[w_id]]
        das = outer_das_operator(self.a1, v_w)
        return np.kron(das.operator.matrix, np.eye(self.n2, dtype=complex))


def tensor_translation_bundle(a1, poset_w: ContextPoset, n1: int | None = None) -> TensorTranslationBundle:
    a1 = _as_op(a1)
    n1 = n1 or a1.dim
    if a1.dim != n1:
        raise DimensionMismatch("operator must act on the first factor")
    if poset_w.dim % n1 != 0:
        raise DimensionMismatch("composite dimension is not a multiple of the factor")
    n2 = poset_w.dim // n1

    factor_contexts = [
        largest_factor_subalgebra(w, n1, n2) for w in poset_w.contexts
    ]
    poset1_star = ContextPoset(
        close_contexts(factor_contexts, include_trivial=True, dim=n1),
        augmented=True,
    )
    n_map = {i: poset1_star.index_of(v) for i, v in enumerate(factor_contexts)}

    fpw = poset_w.finite_poset
    sigma_star = spectral_presheaf(poset1_star)
    a1_tables = daseinisation_tables(a1, poset1_star)
    r_star = presheaf_from_tables(poset1_star, a1_tables)
    eta_star = daseinised_arrow(a1, poset1_star, sigma=sigma_star, rvalue=r_star, tables=a1_tables)

    nu_sigma = inverse_image(n_map, fpw, sigma_star)
    nu_r = inverse_image(n_map, fpw, r_star)
    nu_arrow = inverse_image_nat(n_map, fpw, eta_star)

    sigma_w = spectral_presheaf(poset_w)
    eye2 = np.eye(n2, dtype=complex)
    phi_comps = {}
    for i, w in enumerate(poset_w.contexts):
        v_w = poset1_star.contexts[n_map[i]]
        ampliated = [
            ProjectionOperator(np.kron(q.matrix, eye2)) for q in v_w.projections
        ]
        comp = {}
        for c, atom in enumerate(w.projections):
            hits = [
                j for j, big in enumerate(ampliated) if projection_leq(atom, big)
            ]
            if len(hits) != 1:
                raise InvariantViolation(
                    "every atom of W must refine exactly one atom of V_W (x) 1"
                )
            comp[c] = hits[0]
        phi_comps[i] = comp
    phi = NaturalTransformation(sigma_w, nu_sigma, phi_comps)

    beta_raw = {}
    target_tables: dict[int, list] = {i: [] for i in range(len(poset_w))}
    for i in range(len(poset_w)):
        down = poset_w.down_set_ids(i)
        stage = {}
        for table in nu_r.sets[i]:
            lookup = dict(table)
            pushed = tuple(
                sorted((w2, round_value(lookup[n_map[w2]])) for w2 in down)
            )
            stage[table] = pushed
            target_tables[i].append(pushed)
        beta_raw[i] = stage
    r_target = presheaf_from_tables(poset_w, target_tables)
    beta = NaturalTransformation(nu_r, r_target, beta_raw)

    arrow_comps = {
        i: {
            c: beta_raw[i][nu_arrow.components[i][phi_comps[i][c]]]
            for c in range(poset_w.contexts[i].k)
        }
        for i in range(len(poset_w))
    }
    arrow = NaturalTransformation(sigma_w, r_target, arrow_comps)

    bundle = TensorTranslationBundle(
        a1, n1, n2, poset_w, poset1_star, n_map, sigma_w, nu_sigma, nu_r,
        phi, nu_arrow, beta, arrow,
    )
    for i in range(len(poset_w)):
        gap = max_abs(bundle.stage_operator(i) - bundle.expected_stage_operator(i))
        if gap > EQUALITY_TOL:
            raise InvariantViolation(
                f"stage {i} reconstruction deviates from delta(A1)_VW (x) 1 by {gap:.3e}"
            )
    return bundle


def tensor_translation(a1, poset_w: ContextPoset) -> NaturalTransformation:
    """The composite-system translation of a factor quantity."""
    return tensor_translation_bundle(a1, poset_w).arrow


def phi_epic_report(bundle: TensorTranslationBundle) -> dict:
    """Stagewise surjectivity of the spectrum restriction (the conjectured
    epic behaviour of the composite arrow's state-object part)."""
    out = {}
    for i in range(len(bundle.poset_w)):
        image = set(bundle.phi.components[i].values())
        out[i] = image == set(bundle.nu_sigma.sets[i])
    return out


# ---------------------------------------------------------------------------
# The entanglement gap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapRecord:
    """One comparison of the two daseinisation routes at a context W."""

    witness: AbelianContext
    factor: AbelianContext
    lhs: np.ndarray  # delta(A1 (x) 1)_W
    rhs: np.ndarray  # delta(A1)_{V_W} (x) 1
    gap_norm: float

    @property
    def equal(self) -> bool:
        return self.gap_norm <= EQUALITY_TOL


def entanglement_gap(a1, w: AbelianContext, n1: int | None = None) -> GapRecord:
    """Compare daseinising the ampliated operator in W against ampliating the
    daseinised factor operator on V_W."""
    a1 = _as_op(a1)
    n1 = n1 or a1.dim
    if w.dim % n1 != 0:
        raise DimensionMismatch("context dimension is not a multiple of the factor")
    n2 = w.dim // n1
    v_w = largest_factor_subalgebra(w, n1, n2)
    big = HermitianOperator(np.kron(a1.matrix, np.eye(n2, dtype=complex)))
    lhs = outer_das_operator(big, w).operator.matrix
    rhs = np.kron(outer_das_operator(a1, v_w).operator.matrix, np.eye(n2, dtype=complex))
    return GapRecord(w, v_w, lhs, rhs, max_abs(lhs - rhs))


def _qubit_axis_projections() -> dict:
    sq = 1.0 / np.sqrt(2.0)
    return {
        "z+": np.diag([1.0, 0.0]).astype(complex),
        "z-": np.diag([0.0, 1.0]).astype(complex),
        "x+": 0.5 * np.array([[1, 1], [1, 1]], dtype=complex),
        "x-": 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex),
        "y+": 0.5 * np.array([[1, -1j], [1j, 1]], dtype=complex),
        "y-": 0.5 * np.array([[1, 1j], [-1j, 1]], dtype=complex),
    }


def witness_generator_contexts(n1: int, n2: int, budget: int, seed: int) -> list[AbelianContext]:
    """The documented generator family for gap hunting.

    Structured part (qubit factors): contexts generated by a pair of
    orthogonal product projections P_a (x) P_b, P_a' (x) P_c with the second
    factors drawn from different measurement axes. Random part: contexts from
    `budget` pairs of orthogonal rank-one projections, deterministic in the
    seed. Entangling contexts like alg{P_{z+} (x) P_{z+}, P_{z-} (x) P_{x+}}
    are exactly the structured ones.
    """
    dim = n1 * n2
    out = []
    if n1 == 2 and n2 == 2:
        axes = _qubit_axis_projections()
        for a in ("z+", "x+", "y+"):
            for b in axes:
                for c in axes:
                    g1 = np.kron(axes[a], axes[b])
                    g2 = np.kron(axes[_flip(a)], axes[c])
                    out.append(context_from_commuting([g1, g2]))
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        basis = _random_orthonormal(rng, dim)
        g1 = np.outer(basis[:, 0], basis[:, 0].conj())
        g2 = np.outer(basis[:, 1], basis[:, 1].conj())
        out.append(context_from_commuting([g1, g2]))
    return out


def _flip(axis: str) -> str:
    return axis[0] + ("-" if axis[1] == "+" else "+")


def _random_orthonormal(rng, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(m)
    return q


def product_contexts(n1: int, n2: int, seed: int, budget: int) -> list[AbelianContext]:
    """Product contexts V1 (x) V2 from structured and random factor bases."""
    rng = np.random.default_rng(seed)
    factors1 = _factor_contexts(rng, n1, budget)
    factors2 = _factor_contexts(rng, n2, budget)
    return [tensor_context(v1, v2) for v1 in factors1 for v2 in factors2]


def _factor_contexts(rng, n: int, budget: int) -> list[AbelianContext]:
    out = [trivial_context(n)]
    if n == 2:
        axes = _qubit_axis_projections()
        for a in ("z+", "x+", "y+"):
            out.append(context_from_commuting([axes[a]]))
    for _ in range(budget):
        basis = _random_orthonormal(rng, n)
        projs = [np.outer(basis[:, i], basis[:, i].conj()) for i in range(n)]
        out.append(context_from_commuting(projs[:-1]) if n > 1 else trivial_context(1))
    return out


def gap_search(
    a1,
    n2: int,
    generator_budget: int = 8,
    seed: int = 0,
    family: str = "all",
) -> list[GapRecord]:
    """Enumerate candidate contexts and return every witness whose two
    daseinisation routes differ beyond the reporting threshold, sorted by gap
    size (then canonical context key). Deterministic in the seed."""
    a1 = _as_op(a1)
    n1 = a1.dim
    if n1 * n2 > 16:
        raise DimensionMismatch("composite spaces beyond dimension 16 are out of scope")
    if family not in ("all", "product", "entangled"):
        raise InvariantViolation(f"unknown generator family {family!r}")
    candidates: list[AbelianContext] = []
    if family in ("all", "product"):
        candidates.extend(product_contexts(n1, n2, seed, budget=2))
    if family in ("all", "entangled"):
        candidates.extend(witness_generator_contexts(n1, n2, generator_budget, seed))
    seen = set()
    records = []
    for w in candidates:
        if w.canonical_key in seen:
            continue
        seen.add(w.canonical_key)
        rec = entanglement_gap(a1, w, n1)
        if rec.gap_norm > GAP_REPORT_TOL:
            records.append(rec)
    records.sort(key=lambda r: (-r.gap_norm, r.witness.canonical_key))
    return records
