import numpy as np
import pytest

from toposqt import compose, contexts, oracle, quantum, topos
from toposqt.compose import (
    block_diag,
    entanglement_gap,
    gap_search,
    lemma_direct_sum_check,
    phi_epic_report,
    sum_translation,
    sum_translation_bundle,
    tensor_translation,
    tensor_translation_bundle,
    witness_generator_contexts,
)
from toposqt.contexts import (
    context_from_commuting,
    direct_sum_poset,
    generate_context_poset,
    largest_factor_subalgebra,
    tensor_composite_poset,
    tensor_context,
    trivial_context,
)
from toposqt.errors import MissingContext
from toposqt.linalg import HermitianOperator, max_abs
from toposqt.quantum import arrow_tables, daseinised_arrow, outer_das_operator

from conftest import P_DOWN, P_UP, P_XPLUS, SIGMA_X, SIGMA_Z


@pytest.fixture(scope="module")
def sum_setup():
    p1 = generate_context_poset([SIGMA_Z, SIGMA_X], include_trivial=True)
    p2 = generate_context_poset([], include_trivial=True, dim=1)
    return p1, direct_sum_poset(p1, p2)


@pytest.fixture(scope="module")
def tensor_poset(vee_poset):
    witness = [np.kron(P_UP, P_UP), np.kron(P_DOWN, P_XPLUS)]
    return tensor_composite_poset(vee_poset, vee_poset, extra_generator_sets=[witness])


def test_lemma_worked_example(vz):
    assert lemma_direct_sum_check(SIGMA_Z, np.array([[3.0]]), vz, trivial_context(1))


def test_lemma_trivial_when_operators_live_inside(vz):
    a1 = np.diag([2.0, 7.0]).astype(complex)  # in the z context
    a2 = np.diag([1.0, 4.0]).astype(complex)
    v2 = context_from_commuting([a2])
    v = contexts.direct_sum_context(vz, v2)
    whole = outer_das_operator(
        HermitianOperator(block_diag(a1, a2)), v
    ).operator.matrix
    assert max_abs(whole - block_diag(a1, a2)) <= 1e-9
    assert lemma_direct_sum_check(a1, a2, vz, v2)


def test_lemma_random_instances():
    rng = np.random.default_rng(53)
    for _ in range(20):
        a1 = oracle.random_hermitian(rng, 2)
        a2 = oracle.random_hermitian(rng, 2)
        v1 = oracle.random_context(rng, 2, int(rng.integers(1, 3)))
        v2 = oracle.random_context(rng, 2, int(rng.integers(1, 3)))
        assert lemma_direct_sum_check(a1, a2, v1, v2)


def test_sum_translation_matches_component_arrow(sum_setup):
    p1, psum = sum_setup
    arrow = sum_translation(SIGMA_Z, np.array([[3.0]]), p1, psum)
    expected = daseinised_arrow(SIGMA_Z, p1)
    assert arrow_tables(arrow) == arrow_tables(expected)


def test_sum_translation_identity_gives_constant_one(sum_setup):
    p1, psum = sum_setup
    arrow = sum_translation(np.eye(2, dtype=complex), np.array([[5.0]]), p1, psum)
    values = {v for comp in arrow.components.values() for t in comp.values() for _, v in t}
    assert values == {1.0}


def test_sum_translation_random_pairs():
    rng = np.random.default_rng(59)
    for _ in range(10):
        a1 = oracle.random_hermitian(rng, 2)
        a2 = oracle.random_hermitian(rng, 2)
        q1 = generate_context_poset([a1], include_trivial=True)
        q2 = generate_context_poset([a2], include_trivial=True)
        sum_translation(a1, a2, q1, direct_sum_poset(q1, q2))  # raises on mismatch


def test_sum_translation_missing_context(sum_setup):
    p1, _ = sum_setup
    too_small = generate_context_poset([], include_trivial=True, dim=3)
    with pytest.raises(MissingContext):
        sum_translation(SIGMA_Z, np.array([[1.0]]), p1, too_small)


def test_phi_image_omits_exactly_lambda0(sum_setup):
    p1, psum = sum_setup
    bundle = sum_translation_bundle(SIGMA_Z, np.array([[2.0]]), p1, psum)
    for i, v in enumerate(p1.contexts):
        comp = bundle.phi.components[i]
        image = set(comp.values())
        stage = set(bundle.mu_sigma.sets[i])
        assert len(image) == v.k
        assert stage - image == {bundle.lambda0_index[i]}
    assert topos.is_monic(bundle.phi)
    assert not topos.naturality_failures(bundle.phi)
    assert not topos.naturality_failures(bundle.beta)
    assert not topos.naturality_failures(bundle.arrow)


def test_beta_merges_only_off_image_differences(vee_poset):
    # Two block-side tables may agree on every embedded stage yet differ on a
    # mixed coarsening; beta identifies them, which is exactly the documented
    # m-image restriction.
    p1 = vee_poset
    a2 = 0.5 * SIGMA_X + np.diag([3.0, 1.0])
    p2 = generate_context_poset([a2], include_trivial=True)
    psum = direct_sum_poset(p1, p2)
    bundle = sum_translation_bundle(SIGMA_Z, a2, p1, psum)
    merged = False
    for i, stage in bundle.beta.components.items():
        images = list(stage.values())
        if len(set(images)) < len(set(stage.keys())):
            merged = True
    assert merged
    # The commutativity theorem is untouched by the merge.
    assert arrow_tables(bundle.arrow) == arrow_tables(bundle.reference_arrow)


def test_tensor_stage_operators(tensor_poset, vz):
    bundle = tensor_translation_bundle(SIGMA_Z, tensor_poset)
    w_product = tensor_poset.index_of(tensor_context(vz, vz))
    stage_op = bundle.stage_operator(w_product)
    assert max_abs(stage_op - np.kron(SIGMA_Z, np.eye(2))) <= 1e-9

    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1.0 / np.sqrt(2.0)
    bell = contexts.AbelianContext(
        4,
        (
            quantum.ProjectionOperator(np.outer(phi, phi.conj())),
            quantum.ProjectionOperator(np.eye(4) - np.outer(phi, phi.conj())),
        ),
    )
    bell_poset = contexts.ContextPoset(
        contexts.close_contexts([bell], include_trivial=True, dim=4), augmented=True
    )
    bundle_bell = tensor_translation_bundle(SIGMA_Z, bell_poset)
    w_bell = bell_poset.index_of(bell)
    assert max_abs(bundle_bell.stage_operator(w_bell) - np.eye(4)) <= 1e-9


def test_tensor_translation_on_factor_image(tensor_poset, vz):
    # At contexts of the form V (x) C1 the translation is the daseinised
    # ampliated operator itself.
    bundle = tensor_translation_bundle(SIGMA_Z, tensor_poset)
    w_image = tensor_poset.index_of(tensor_context(vz, trivial_context(2)))
    stage_op = bundle.stage_operator(w_image)
    big = HermitianOperator(np.kron(SIGMA_Z, np.eye(2)))
    direct = outer_das_operator(big, tensor_poset.contexts[w_image]).operator.matrix
    assert max_abs(stage_op - direct) <= 1e-9
    arrow = tensor_translation(SIGMA_Z, tensor_poset)
    assert not topos.naturality_failures(arrow)


def test_entanglement_gap_zero_on_image_contexts(vz):
    w = tensor_context(vz, trivial_context(2))
    rec = entanglement_gap(SIGMA_Z, w)
    assert rec.equal and rec.gap_norm == 0.0


def test_entanglement_gap_witness(witness_context):
    rec = entanglement_gap(SIGMA_Z, witness_context)
    assert not rec.equal
    assert rec.factor.is_trivial
    assert max_abs(rec.rhs - np.eye(4)) <= 1e-9
    # delta(sigma_z (x) 1) in the witness context: the only atom under the
    # spectral projection of -1 is P_down (x) P_x+, so the result is
    # 1 - 2 P_down (x) P_x+.
    expected_lhs = np.eye(4) - 2.0 * np.kron(P_DOWN, P_XPLUS)
    assert max_abs(rec.lhs - expected_lhs) <= 1e-9
    assert rec.gap_norm == pytest.approx(1.0)
    # Cross-check the fast daseinisation against the lattice oracle.
    big = HermitianOperator(np.kron(SIGMA_Z, np.eye(2)))
    slow = oracle.brute_outer_das_operator(big, witness_context)
    assert max_abs(rec.lhs - slow.matrix) <= 1e-9


def test_entanglement_gap_product_contexts_report_equality(vee_poset):
    for v1 in vee_poset.contexts:
        for v2 in vee_poset.contexts:
            rec = entanglement_gap(SIGMA_Z, tensor_context(v1, v2))
            assert rec.equal


def test_gap_search_contracts(witness_context):
    found = gap_search(SIGMA_Z, 2, generator_budget=5, seed=3)
    assert found and found[0].gap_norm >= 1.0
    assert any(rec.witness == witness_context for rec in found)
    assert gap_search(SIGMA_Z, 2, generator_budget=5, seed=3, family="product") == []
    again = gap_search(SIGMA_Z, 2, generator_budget=5, seed=3)
    assert [(r.gap_norm, r.witness.canonical_key) for r in found] == [
        (r.gap_norm, r.witness.canonical_key) for r in again
    ]
    gaps = [r.gap_norm for r in found]
    assert gaps == sorted(gaps, reverse=True)


def test_witness_family_contains_documented_context(witness_context):
    family = witness_generator_contexts(2, 2, budget=0, seed=0)
    assert any(w == witness_context for w in family)


def test_phi_epic_report_all_true(tensor_poset):
    bundle = tensor_translation_bundle(SIGMA_Z, tensor_poset)
    report = phi_epic_report(bundle)
    assert all(report.values())


def test_sum_translation_composes_along_chains(vee_poset):
    # S1 -> S1 u S2 -> (S1 u S2) u S3 done stepwise equals the direct
    # embedding with the merged complement; both give the component arrow.
    p1 = vee_poset
    p2 = generate_context_poset([], include_trivial=True, dim=1)
    p12 = direct_sum_poset(p1, p2)
    p3 = generate_context_poset([], include_trivial=True, dim=1)
    p123 = direct_sum_poset(p12, p3)
    a2 = np.array([[4.0]])
    a3 = np.array([[6.0]])

    step1 = sum_translation(
        block_diag(SIGMA_Z, a2), a3, p12, p123
    )  # pull <<A1,A2>,A3> back to the middle system
    step2 = sum_translation(SIGMA_Z, a2, p1, p12)  # then down to the component

    direct_poset = direct_sum_poset(
        p1, generate_context_poset([], include_trivial=True, dim=2)
    )
    direct = sum_translation(SIGMA_Z, block_diag(a2, a3), p1, direct_poset)

    reference = arrow_tables(daseinised_arrow(SIGMA_Z, p1))
    assert arrow_tables(step2) == reference
    assert arrow_tables(direct) == reference
    assert arrow_tables(step1) == arrow_tables(daseinised_arrow(block_diag(SIGMA_Z, a2), p12))


def test_factor_map_composes_across_groupings():
    # Largest factor subalgebras computed in one step or through the middle
    # factor agree: the two routes to V'' coincide.
    sz8 = np.kron(SIGMA_Z, np.eye(4, dtype=complex))
    mid = np.kron(np.eye(2, dtype=complex), np.kron(SIGMA_Z, np.eye(2, dtype=complex)))
    w = context_from_commuting([sz8, mid])
    one_step = largest_factor_subalgebra(w, 2, 4)
    middle = largest_factor_subalgebra(w, 4, 2)
    two_step = largest_factor_subalgebra(middle, 2, 2)
    assert one_step == two_step
