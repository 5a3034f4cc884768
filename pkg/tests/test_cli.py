import json

import pytest

from toposqt import cli


QUBIT = {
    "name": "qubit",
    "kind": "quantum",
    "dim": 2,
    "symbols": [
        {"name": "sz", "matrix": {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}},
        {"name": "sx", "matrix": {"dim": 2, "entries": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}},
        {"name": "Pup", "matrix": {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}},
    ],
}

PROBE = {
    "name": "probe",
    "kind": "quantum",
    "dim": 1,
    "symbols": [{"name": "e", "matrix": {"dim": 1, "entries": [[[3, 0]]]}}],
}


@pytest.fixture
def qubit_file(tmp_path):
    path = tmp_path / "qubit.json"
    path.write_text(json.dumps(QUBIT))
    return str(path)


@pytest.fixture
def probe_file(tmp_path):
    path = tmp_path / "probe.json"
    path.write_text(json.dumps(PROBE))
    return str(path)


def test_contexts_command(qubit_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["--out", str(out), "contexts", qubit_file])
    assert code == 0
    blob = json.loads((out / "qubit_poset.json").read_text())
    assert len(blob["contexts"]) == 3
    assert blob["counts"]["contexts"] == 3


def test_contexts_dot_export(qubit_file, capsys):
    assert cli.main(["--format", "dot", "contexts", qubit_file]) == 0
    assert "digraph" in capsys.readouterr().out


def test_contexts_empty_generators(tmp_path, capsys):
    path = tmp_path / "bare.json"
    path.write_text(json.dumps({"name": "bare", "kind": "quantum", "dim": 2, "symbols": []}))
    assert cli.main(["contexts", str(path)]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert len(blob["contexts"]) == 1


def test_contexts_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["contexts", str(path)]) == 2


def test_contexts_invariant_violation_exits_3(tmp_path):
    blob = {
        "name": "broken",
        "kind": "quantum",
        "dim": 2,
        "symbols": [
            {"name": "a", "matrix": {"dim": 2, "entries": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}}
        ],
    }
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(blob))
    assert cli.main(["contexts", str(path)]) == 3  # matrix is not hermitian


def test_das_table_matches_examples(qubit_file, capsys):
    assert cli.main(["das", qubit_file, "--op", "sx"]) == 0
    blob = json.loads(capsys.readouterr().out)
    by_context = {row["context"]: row["atoms"] for row in blob["table"]}
    assert [a["value"] for a in by_context[0]] == [1.0]
    assert [a["value"] for a in by_context[1]] == [1.0, 1.0]  # z stage: constant 1
    assert sorted(a["value"] for a in by_context[2]) == [-1.0, 1.0]


def test_das_identity_all_ones(qubit_file, tmp_path, capsys):
    blob = dict(QUBIT)
    blob["symbols"] = QUBIT["symbols"] + [
        {"name": "one", "matrix": {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}}
    ]
    path = tmp_path / "with_one.json"
    path.write_text(json.dumps(blob))
    assert cli.main(["das", str(path), "--op", "one"]) == 0
    table = json.loads(capsys.readouterr().out)["table"]
    assert all(a["value"] == 1.0 for row in table for a in row["atoms"])


def test_das_unknown_symbol(qubit_file):
    assert cli.main(["das", qubit_file, "--op", "nope"]) == 4


def test_truth_eigenstate(qubit_file, capsys):
    code = cli.main(["truth", qubit_file, "--state", "1,0", "--prop", "Pup", "--at", "1"])
    assert code == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["totally_true"] is True
    assert blob["members"] == [0, 1]


def test_truth_superposition(qubit_file, capsys):
    amp = "0.7071067811865476,0.7071067811865476"
    code = cli.main(["truth", qubit_file, "--state", amp, "--prop", "Pup", "--at", "1"])
    assert code == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["totally_true"] is False
    assert blob["members"] == [0]


def test_truth_rejects_non_unit_state(qubit_file):
    assert cli.main(["truth", qubit_file, "--state", "1,1", "--prop", "Pup"]) == 5


def test_check_single_suite(capsys):
    assert cli.main(["check", "--suite", "trivial"]) == 0
    assert "PASS trivial-topos" in capsys.readouterr().out


def test_check_unknown_suite():
    with pytest.raises(SystemExit) as err:
        cli.main(["check", "--suite", "nope"])
    assert err.value.code == 2


def test_check_perturbed_lemma_fails(capsys):
    assert cli.main(["check", "--suite", "lemma", "--perturb", "1e-3"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "residual" in out


def test_translate_sum_command(qubit_file, probe_file, capsys):
    code = cli.main(
        ["translate-sum", qubit_file, probe_file, "--op1", "sz", "--op2", "e"]
    )
    assert code == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["commutes"] is True
    assert blob["component_contexts"] == 3


def test_translate_tensor_command(qubit_file, capsys):
    code = cli.main(["translate-tensor", qubit_file, qubit_file, "--op", "sz"])
    assert code == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["contexts"] >= 10
    assert len(blob["stages"]) == blob["contexts"]


def test_gap_search_deterministic_output(qubit_file, tmp_path, capsys):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli.main(["--seed", "11", "--out", str(out1), "gap-search", qubit_file, "--op", "sz"]) == 0
    assert cli.main(["--seed", "11", "--out", str(out2), "gap-search", qubit_file, "--op", "sz"]) == 0
    b1 = (out1 / "gap_report.json").read_bytes()
    b2 = (out2 / "gap_report.json").read_bytes()
    assert b1 == b2
    blob = json.loads(b1)
    assert blob["witnesses"] and blob["witnesses"][0]["gap_norm"] >= 1.0


def test_gap_search_product_only_empty(qubit_file, tmp_path):
    out = tmp_path / "o"
    code = cli.main(
        ["--out", str(out), "gap-search", qubit_file, "--op", "sz", "--family", "product"]
    )
    assert code == 0
    blob = json.loads((out / "gap_report.json").read_text())
    assert blob["witnesses"] == []


def test_bad_seed_rejected(qubit_file):
    assert cli.main(["--seed", "-1", "contexts", qubit_file]) == 2


def test_text_format_das(qubit_file, capsys):
    assert cli.main(["--format", "text", "das", qubit_file, "--op", "sz"]) == 0
    out = capsys.readouterr().out
    assert "atom rank" in out
