import json
import subprocess
import sys

import pytest

from conftest import W_STRING
from flatvirtual.cli import main
from flatvirtual.diagram import parse_diagram


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_invariant_w(capsys, fixtures):
    code, out, _ = run(capsys, "invariant", str(fixtures / "whitehead_W.diagram"), "--workers", "1")
    assert code == 0
    assert out == W_STRING + "\n"


def test_invariant_unknot(capsys, fixtures):
    assert run(capsys, "invariant", str(fixtures / "unknot.diagram"))[1] == "-a^-2 - a^2\n"


def test_table(capsys, fixtures):
    code, out, _ = run(capsys, "invariant", "--table", str(fixtures / "whitehead_W.diagram"))
    lines = out.splitlines()
    assert code == 0
    assert len(lines) == 5
    assert lines[-1] == W_STRING
    assert lines[0].startswith("1:A 2:A")


def test_records(capsys, fixtures):
    code, out, _ = run(capsys, "invariant", "--format", "records", "--table", str(fixtures / "whitehead_W.diagram"))
    recs = [json.loads(line) for line in out.splitlines()]
    assert recs[-1]["invariant"] == W_STRING
    assert sum(r.get("gamma_odd", 0) for r in recs[:-1]) == 6


def test_components_and_writhe(capsys, fixtures):
    w = str(fixtures / "whitehead_W.diagram")
    assert run(capsys, "components", w)[1] == "1\n"
    assert run(capsys, "writhe", w)[1] == "2\n"


def test_forget(capsys, fixtures):
    code, out, _ = run(capsys, "forget", str(fixtures / "whitehead_W.diagram"))
    d = parse_diagram(out)
    assert d.classical_ids == []
    assert len(d.flat_ids) == 4


def test_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.diagram"
    bad.write_text("components: 1\n1x 1-\n")
    code, out, err = run(capsys, "invariant", str(bad))
    assert code == 2
    assert out == ""
    assert "line 2" in err


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "invariant", str(tmp_path / "nope"))[0] == 2


def test_validation_error(capsys, tmp_path):
    bad = tmp_path / "bad.diagram"
    bad.write_text("components: 1\n1+ 1+\ncrossings:\n1 C +1\n")
    code, _, err = run(capsys, "invariant", str(bad))
    assert code == 3
    assert "classical visit roles must be {Over, Under}" in err


def test_cap_exceeded(capsys, tmp_path):
    n = 30
    text = "components: 1\n" + " ".join(f"{i}+ {i}-" for i in range(1, n + 1)) + "\ncrossings:\n"
    text += "".join(f"{i} C +1\n" for i in range(1, n + 1))
    f = tmp_path / "big.diagram"
    f.write_text(text)
    code, _, err = run(capsys, "invariant", str(f))
    assert code == 4
    assert "30" in err
    assert run(capsys, "invariant", "--table", str(f))[0] == 4


def test_phi_invariant(capsys, fixtures):
    code, out, _ = run(capsys, "phi", str(fixtures / "whitehead_companion.curve"), "--invariant")
    assert code == 0
    *diagram, last = out.splitlines()
    assert last == W_STRING
    assert "# restricted-eligible" in diagram
    d = parse_diagram("\n".join(diagram))
    assert len(d.classical_ids) == 2 and len(d.flat_ids) == 2


def test_phi_output_file(capsys, fixtures, tmp_path):
    target = tmp_path / "out.diagram"
    code, out, _ = run(capsys, "phi", str(fixtures / "whitehead_companion.curve"), "-o", str(target))
    assert code == 0 and out == ""
    assert run(capsys, "invariant", str(target))[1] == W_STRING + "\n"


def test_phi_circle(capsys, fixtures):
    code, out, _ = run(capsys, "phi", str(fixtures / "circle_d3.curve"))
    assert code == 0
    assert out.splitlines()[-2:] == ["components: 1", "O"]


def test_phi_degenerate(capsys, fixtures):
    code, out, err = run(capsys, "phi", str(fixtures / "degenerate.curve"))
    assert code == 5
    assert "non-generic" in err and "(0, 0.5)" in err


def test_phi_bad_curve(capsys, tmp_path):
    f = tmp_path / "c.curve"
    f.write_text("space: cylinder\ngroup: 2\n0 0 0\n")
    assert run(capsys, "phi", str(f))[0] == 2


def test_fuzz(capsys):
    code, out, _ = run(capsys, "fuzz", "--seed", "1", "--trials", "10", "--steps", "20", "--workers", "1")
    assert code == 0
    assert out == "10 trials, 200 moves (unrestricted): no violations\n"


def test_fuzz_deterministic_across_workers(capsys):
    args = ["fuzz", "--seed", "3", "--trials", "6", "--steps", "15", "--format", "records", "--restricted"]
    one = run(capsys, *args, "--workers", "1")
    two = run(capsys, *args, "--workers", "2")
    assert one == two
    assert json.loads(one[1])["failed_trials"] == 0


def test_bad_flag_values(capsys):
    with pytest.raises(SystemExit):
        main(["fuzz", "--workers", "0"])
    with pytest.raises(SystemExit):
        main(["invariant", "x", "--cap", "-1"])


def test_module_entry_point(fixtures):
    res = subprocess.run(
        [sys.executable, "-m", "flatvirtual.cli", "writhe", str(fixtures / "whitehead_W.diagram")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout == "2\n"
