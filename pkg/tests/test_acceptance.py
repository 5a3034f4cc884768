"""Acceptance criteria, one test per criterion.

Each test runs the corresponding invariant suite at its pinned tolerance,
prints a PASS/FAIL line, and enforces the stated runtime budget. The same
suites back the `check --suite all` command; a final test drives that
entry point end to end.
"""

import time

from toposqt import checks, cli


def _run(fn, budget_s, **kwargs):
    t0 = time.perf_counter()
    result = fn(**kwargs)
    elapsed = time.perf_counter() - t0
    print(result.line())
    assert result.passed, result.details
    assert elapsed < budget_s, f"{result.name} took {elapsed:.2f}s (budget {budget_s}s)"
    return result


def test_criterion_1_daseinisation_oracle():
    # >= 200 random projection/operator pairs on C^2..C^4, contexts up to
    # five blocks, fast path vs 2^k lattice brute force within 1e-8.
    _run(checks.check_oracle, budget_s=5.0, samples=200, tol=1e-8)


def test_criterion_2_direct_sum_lemma():
    # 100 random block instances on C^2+C^2 and C^2+C^3 within 1e-8.
    _run(checks.check_lemma, budget_s=5.0, samples=100, tol=1e-8)


def test_criterion_3_sum_translation_commutativity():
    # 50 random pairs; table identity is exact after 1e-9 rounding.
    _run(checks.check_sum, budget_s=5.0, samples=50)


def test_criterion_4_tensor_translation_correspondence():
    import numpy as np

    from toposqt import contexts

    poset = checks.acceptance_tensor_poset()
    assert len(poset) >= 10
    # The generated poset carries all three context classes: products,
    # factor images, and an entangled witness.
    vz = contexts.context_from_commuting([checks.SIGMA_Z])
    assert contexts.tensor_context(vz, vz) in poset
    assert contexts.tensor_context(vz, contexts.trivial_context(2)) in poset
    p_up = np.diag([1.0, 0.0]).astype(complex)
    p_xp = 0.5 * np.ones((2, 2), dtype=complex)
    witness = contexts.context_from_commuting(
        [np.kron(p_up, p_up), np.kron(np.eye(2) - p_up, p_xp)]
    )
    assert witness in poset
    _run(checks.check_tensor, budget_s=10.0, tol=1e-8)


def test_criterion_5_inequality_witness():
    _run(checks.check_gap, budget_s=10.0)


def test_criterion_6_topos_laws():
    _run(checks.check_heyting, budget_s=5.0)


def test_criterion_7_classical_backend():
    _run(checks.check_classical, budget_s=1.0)


def test_criterion_8_sys_axioms():
    _run(checks.check_sys, budget_s=1.0)


def test_criterion_9_trivial_system_topos():
    _run(checks.check_trivial, budget_s=1.0)


def test_criterion_10_truth_values():
    _run(checks.check_truth, budget_s=1.0)


def test_check_all_entry_point(capsys):
    assert cli.main(["check", "--suite", "all"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == len(checks.SUITES)
    assert "FAIL" not in out
