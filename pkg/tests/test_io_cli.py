import json

import numpy as np
import pytest

from aqc import circuits as C
from aqc.cli import main
from aqc.composition import same_circuit
from aqc.nameblind import dump_matrix
from aqc.io import DocumentError, bundle_to_document, document_to_bundle, dump_state, load_bundle, save_bundle

BUILTINS = ["bell", "switch", "pbs", "phase", "identity", "empty", "bell-switch"]


@pytest.mark.parametrize("bundle", [C.bell_circuit(), C.quantum_switch(C.PAULI["H"], C.PAULI["Y"]),
                                    C.pbs_circuit(1, [None, {(1, 0): 1.0}, None, None]), C.phase_fixture()])
def test_document_round_trip(bundle, tmp_path):
    save_bundle(bundle, tmp_path / "c.json")
    assert same_circuit(load_bundle(tmp_path / "c.json"), bundle)


def test_document_errors_are_located():
    doc = bundle_to_document(C.bell_circuit())
    doc["initial_state"][0]["sectors"]["1"]["T"] = "x"
    with pytest.raises(DocumentError) as e:
        document_to_bundle(doc)
    assert "initial_state[0]" in str(e.value)
    doc = bundle_to_document(C.bell_circuit())
    doc["operators"][0] = {"gate": [1], "builtin": "nope"}
    with pytest.raises(DocumentError, match=r"operators\[0\]"):
        document_to_bundle(doc)
    doc = bundle_to_document(C.bell_circuit())
    del doc["gates"]
    with pytest.raises(DocumentError, match="gates"):
        document_to_bundle(doc)
    doc = bundle_to_document(C.bell_circuit())
    doc["initial_state"][0]["amplitude"] = [2.0, 0.0]
    with pytest.raises(DocumentError, match="norm"):
        document_to_bundle(doc)


def test_malformed_json_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n "addresses": [1,\n}')
    assert main(["run", "--circuit", str(p)]) == 1
    assert "bad.json:3" in capsys.readouterr().err


@pytest.mark.parametrize("name", BUILTINS)
def test_export_and_verify(name, tmp_path, capsys):
    out = tmp_path / f"{name}.json"
    assert main(["export", name, "--out", str(out)]) == 0
    code = main(["verify", "--circuit", str(out), "--nameblind", "--exhaustive"])
    report = json.loads(capsys.readouterr().out)
    assert code == (2 if name == "phase" else 0)
    assert report["ok"] is (name != "phase")


def test_verify_unitary_only(tmp_path, capsys):
    out = tmp_path / "sw.json"
    main(["export", "switch", "--out", str(out)])
    assert main(["verify", "--circuit", str(out), "--unitary"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert all("nameblind" not in g for g in report["gates"])


def test_run_dump_is_deterministic_across_threads(tmp_path, capsys, monkeypatch):
    out = tmp_path / "sw.json"
    main(["export", "switch", "--u", "H", "--v", "Y", "--out", str(out)])
    capsys.readouterr()
    dumps = []
    for threads in ("1", "4"):
        monkeypatch.setenv("AQC_THREADS", threads)
        assert main(["run", "--circuit", str(out), "--steps", "9", "--dump", "--at", "3", "9"]) == 0
        dumps.append(capsys.readouterr().out)
    assert dumps[0] == dumps[1] and "== step 9" in dumps[0]


def test_run_landmarks(tmp_path, capsys):
    out = tmp_path / "bell.json"
    main(["export", "bell", "--out", str(out)])
    assert main(["run", "--circuit", str(out), "--landmarks"]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]


def test_dump_format():
    text = dump_state(C.bell_circuit().initial)
    assert text == "1.0 0.0 | 1[T=2 WI= QI=0,0 WO= QO=] 2[T=3 WI= QI= WO= QO=] " \
                   "3[T=4 WI= QI= WO= QO=] 4[T= WI= QI= WO= QO=]\n"


def test_nameblind_commands(tmp_path, capsys):
    m = tmp_path / "m.txt"
    assert main(["nameblind", "gen", "--n", "4", "--pure", "--seed", "3", "--out", str(m)]) == 0
    assert main(["nameblind", "check", "--matrix", str(m), "--mode", "full"]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]
    assert main(["nameblind", "commutant-dim", "--n", "3"]) == 0
    assert capsys.readouterr().out.strip() == "6"
    assert main(["nameblind", "gen", "--n", "8"]) == 3
    bad = tmp_path / "bad.txt"
    single = np.zeros((24, 24))
    single[0, 0] = 1.0
    bad.write_text(dump_matrix(single, 4, 4))
    assert main(["nameblind", "check", "--matrix", str(bad)]) == 2


def test_compose_command(tmp_path, capsys):
    main(["export", "bell", "--out", str(tmp_path / "bell.json")])
    main(["export", "switch", "--out", str(tmp_path / "sw.json")])
    sw_doc = json.loads((tmp_path / "sw.json").read_text())
    sw = C.quantum_switch(C.PAULI["Y"], C.PAULI["Z"], 1, None)
    save_bundle(sw, tmp_path / "sw_empty.json")
    spec = {"mode": "concatenate",
            "circuits": [{"file": "bell.json", "relabel": {"1": 7, "2": 8, "3": 9, "4": 0}}, "sw_empty.json"],
            "pairs": [[1, 0]], "output": "composed.json"}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["compose", "--spec", str(tmp_path / "spec.json")]) == 0
    composed = load_bundle(tmp_path / "composed.json")
    assert composed.skeleton.addresses == (0, 2, 3, 4, 5, 6, 7, 8, 9)
    assert sw_doc["addresses"] == [1, 2, 3, 4, 5, 6]
    spec["pairs"] = [[1, 5]]
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["compose", "--spec", str(tmp_path / "spec.json")]) == 1


def test_qcgd_command(tmp_path, capsys):
    main(["export", "bell", "--out", str(tmp_path / "bell.json")])
    assert main(["qcgd", "--circuit", str(tmp_path / "bell.json"), "--steps", "6",
                 "--dot", str(tmp_path / "dot")]) == 0
    assert len(list((tmp_path / "dot").glob("step_*.dot"))) == 6
    assert json.loads(capsys.readouterr().out)["ok"]


def test_missing_file_is_input_error(capsys):
    assert main(["qcgd", "--circuit", "/nonexistent.json"]) == 1
