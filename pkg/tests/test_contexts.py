import itertools
import warnings

import numpy as np
import pytest

from toposqt import contexts, oracle
from toposqt.contexts import (
    AbelianContext,
    ContextPoset,
    context_from_commuting,
    coarsenings,
    direct_sum_context,
    direct_sum_embed,
    generate_context_poset,
    includes,
    intersection_context,
    largest_factor_subalgebra,
    tensor_composite_poset,
    tensor_context,
    trivial_context,
)
from toposqt.errors import (
    DimensionMismatch,
    InvariantViolation,
    NonCommuting,
    TooManyBlocks,
)
from toposqt.linalg import ProjectionOperator, max_abs

from conftest import P_DOWN, P_UP, P_XPLUS, SIGMA_X, SIGMA_Z


def bell_count(n: int) -> int:
    """Independent partition count: canonicalized assignment vectors."""
    seen = set()
    for assignment in itertools.product(range(n), repeat=n):
        relabel = {}
        canon = []
        for a in assignment:
            relabel.setdefault(a, len(relabel))
            canon.append(relabel[a])
        seen.add(tuple(canon))
    return len(seen)


def test_context_invariants():
    with pytest.raises(InvariantViolation):
        AbelianContext(2, (ProjectionOperator(P_UP),))  # does not sum to identity
    with pytest.raises(InvariantViolation):
        AbelianContext(2, (ProjectionOperator(P_UP), ProjectionOperator(P_XPLUS)))


def test_context_from_commuting_sigma_z(vz):
    assert vz.k == 2
    mats = [p.matrix for p in vz.projections]
    assert any(max_abs(m - P_UP) <= 1e-9 for m in mats)
    assert any(max_abs(m - P_DOWN) <= 1e-9 for m in mats)


def test_context_from_commuting_identity_is_trivial():
    v = context_from_commuting([np.eye(3, dtype=complex)])
    assert v.is_trivial


def test_context_from_commuting_joint_diagonal():
    a = np.kron(SIGMA_Z, np.eye(2, dtype=complex))
    b = np.kron(np.eye(2, dtype=complex), SIGMA_Z)
    v = context_from_commuting([a, b])
    assert v.rank_signature == (1, 1, 1, 1)
    # Joint eigenbasis is the computational basis.
    for p in v.projections:
        off = p.matrix - np.diag(np.diag(p.matrix))
        assert max_abs(off) <= 1e-9


def test_context_from_commuting_rejects_noncommuting():
    with pytest.raises(NonCommuting):
        context_from_commuting([SIGMA_Z, SIGMA_X])


def test_includes_examples(vz, vx):
    assert includes(trivial_context(2), vz)
    assert includes(vz, vz)
    assert not includes(vz, vx)
    with pytest.raises(DimensionMismatch):
        includes(vz, trivial_context(3))


def test_includes_matches_span_oracle():
    rng = np.random.default_rng(23)
    two_level = generate_context_poset(
        [oracle.random_hermitian(rng, 2).matrix for _ in range(2)],
        include_trivial=True,
    )
    v4 = oracle.random_context(rng, 4, 3)
    op4 = sum((i + 1.0) * p.matrix for i, p in enumerate(v4.projections))
    three_block = generate_context_poset([op4], include_trivial=True)
    for poset in (two_level, three_block):
        assert len(poset) <= 12
        for v in poset.contexts:
            for w in poset.contexts:
                assert includes(v, w) == oracle.brute_includes(v, w)


def test_coarsenings_counts(vz):
    only = coarsenings(trivial_context(2))
    assert only == {trivial_context(2)}
    two = coarsenings(vz)
    assert two == {vz, trivial_context(2)}
    v3 = context_from_commuting([np.diag([1.0, 2.0, 3.0]).astype(complex)])
    assert len(coarsenings(v3)) == bell_count(3) == 5
    big = context_from_commuting([np.diag(np.arange(7.0)).astype(complex)])
    with pytest.raises(TooManyBlocks):
        coarsenings(big)


def test_intersection_context(vz, vx):
    assert intersection_context(vz, vx).is_trivial
    assert intersection_context(vz, vz) == vz
    diag3 = context_from_commuting([np.diag([1.0, 2.0, 3.0]).astype(complex)])
    merged = context_from_commuting([np.diag([1.0, 1.0, 2.0]).astype(complex)])
    assert intersection_context(diag3, merged) == merged


def test_generate_poset_incompatible_generators(vee_poset, vz, vx):
    assert len(vee_poset) == 3
    triv = vee_poset.trivial_id
    iz, ix = vee_poset.index_of(vz), vee_poset.index_of(vx)
    assert vee_poset.leq_ids(triv, iz) and vee_poset.leq_ids(triv, ix)
    assert not vee_poset.leq_ids(iz, ix) and not vee_poset.leq_ids(ix, iz)
    assert vee_poset.is_down_closed()


def test_generate_poset_empty_generators():
    poset = generate_context_poset([], include_trivial=True, dim=2)
    assert len(poset) == 1
    assert poset.contexts[0].is_trivial
    with pytest.raises(DimensionMismatch):
        generate_context_poset([], include_trivial=True)


def test_generate_poset_projection_generators(witness_context):
    g1 = np.kron(P_UP, P_UP)
    g2 = np.kron(P_DOWN, P_XPLUS)
    poset = generate_context_poset([g1, g2], include_trivial=True)
    assert witness_context in poset
    for w in coarsenings(witness_context):
        assert w in poset
    assert poset.is_down_closed()


def test_direct_sum_embed_examples(vz):
    m = direct_sum_embed(vz, 2)
    expected = [
        np.diag([1.0, 0, 0, 0]),
        np.diag([0.0, 1, 0, 0]),
        np.diag([0.0, 0, 1, 1]),
    ]
    for want in expected:
        assert any(max_abs(p.matrix - want) <= 1e-9 for p in m.projections)

    m2 = direct_sum_embed(trivial_context(2), 1)
    expected2 = [np.diag([1.0, 1, 0]), np.diag([0.0, 0, 1])]
    for want in expected2:
        assert any(max_abs(p.matrix - want) <= 1e-9 for p in m2.projections)


def test_direct_sum_embed_monotone_injective(vee_poset):
    images = {}
    for i, v in enumerate(vee_poset.contexts):
        images[i] = direct_sum_embed(v, 2)
    for i, j in vee_poset.comparable_id_pairs():
        assert includes(images[i], images[j])
    for i in images:
        for j in images:
            if i != j:
                assert images[i] != images[j]
    # Order preservation is two-sided on this poset.
    for i in images:
        for j in images:
            assert includes(images[i], images[j]) == vee_poset.leq_ids(i, j)


def test_largest_factor_subalgebra_examples(vz, witness_context):
    assert largest_factor_subalgebra(tensor_context(vz, vz), 2, 2) == vz
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1.0 / np.sqrt(2.0)
    p_bell = np.outer(phi, phi.conj())
    bell = AbelianContext(
        4, (ProjectionOperator(p_bell), ProjectionOperator(np.eye(4) - p_bell))
    )
    assert largest_factor_subalgebra(bell, 2, 2).is_trivial
    assert largest_factor_subalgebra(tensor_context(vz, trivial_context(2)), 2, 2) == vz
    assert largest_factor_subalgebra(witness_context, 2, 2).is_trivial


def test_largest_factor_subalgebra_monotone(vee_poset):
    poset_w = tensor_composite_poset(vee_poset, vee_poset)
    factors = [largest_factor_subalgebra(w, 2, 2) for w in poset_w.contexts]
    for i, j in poset_w.comparable_id_pairs():
        assert includes(factors[i], factors[j])


def test_poset_order_axioms(vee_poset):
    fp = vee_poset.finite_poset  # constructor re-validates the axioms
    assert len(fp.elements) == 3
    poset_w = tensor_composite_poset(vee_poset, vee_poset)
    assert poset_w.is_down_closed()
    fpw = poset_w.finite_poset
    assert all((v, v) in fpw.relation for v in fpw.elements)


def test_dedup_warning_on_near_degenerate_inputs(vz):
    # A slightly rotated basis: exactly a projection, but its entries differ
    # from the z-basis atoms by more than EPS while rounding to the same key.
    theta = 1e-7
    c, s = np.cos(theta), np.sin(theta)
    p = np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)
    bumped = AbelianContext(
        2, (ProjectionOperator(p), ProjectionOperator(np.eye(2) - p))
    )
    with warnings.catch_warnings(record=True) as captured:
        warnings.simplefilter("always")
        ContextPoset([vz, bumped, trivial_context(2)], augmented=True)
    assert any("degenerate" in str(w.message) for w in captured)


def test_direct_sum_context_block_structure(vz, vx):
    v = direct_sum_context(vz, vx)
    assert v.dim == 4
    assert v.rank_signature == (1, 1, 1, 1)
    top_left = [p.matrix[:2, :2] for p in v.projections]
    assert sum(max_abs(m) > 1e-9 for m in top_left) == 2


def test_poset_exports(vee_poset):
    blob = vee_poset.to_json()
    assert blob["augmented"] is True
    assert len(blob["contexts"]) == 3
    assert [0, 1] in blob["leq"] and [0, 2] in blob["leq"]
    dot = vee_poset.to_dot()
    assert dot.startswith("digraph") and "C0 -> C1" in dot


def test_trusted_paths_match_validated_construction(vz):
    for w in coarsenings(vz):
        rebuilt = AbelianContext(w.dim, w.projections)
        assert rebuilt == w
