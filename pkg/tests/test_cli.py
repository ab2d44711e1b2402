import csv
import io
import json
import subprocess
import sys

import pytest

from latsubst.cli import VERDICT_POSITIVE, VERDICT_UNKNOWN, main
from latsubst.systems import chair2d, dump_system, from_symbolic, parse_rules, system_to_dict
from latsubst.systems.io import descriptions_to_dict

from oracles import iterate_word


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- analyze --------------------------------------------------------------------------------

def test_analyze_chair_is_positive(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:chair2d")
    report = json.loads(out)
    assert code == 0
    assert report["verdict"] == VERDICT_POSITIVE
    assert report["modular_coincidence"]["power"] == 2
    assert report["primitivity_exponent"] == 2 and report["pf_eigenvector"] == [1, 1, 1, 1]
    assert report["window_measures"] == ["9/32"] * 4


def test_analyze_thue_morse_is_undecided(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:symbolic:a:ab,b:ba", "--max-power", "8")
    report = json.loads(out)
    assert code == 2
    assert report["verdict"] == VERDICT_UNKNOWN and report["searched_up_to"] == 8
    assert report["modular_coincidence"] is None


def test_analyze_period_doubling_at_first_power(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:symbolic:a:ab,b:aa")
    assert code == 0 and json.loads(out)["modular_coincidence"]["power"] == 1


def test_analyze_sphinx_undecided_and_fast(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:sphinx")
    report = json.loads(out)
    assert code == 2 and report["m"] == 36 and report["pf_condition"]


def test_analyze_budget_stops_early(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:symbolic:a:ab,b:ba", "--budget-maps", "64",
                       "--window-depth", "0")
    assert code == 2 and json.loads(out)["searched_up_to"] == 6


def test_analyze_text_format(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:chair2d", "--format", "text")
    assert code == 0 and f"verdict: {VERDICT_POSITIVE}" in out


def test_analyze_invalid_file(tmp_path, capsys):
    raw = system_to_dict(chair2d())
    raw["maps"] = raw["maps"][1:]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(raw))
    code, out, _ = run(capsys, "analyze", str(path))
    err = json.loads(out)
    assert code == 1 and err["error"] == "ValidationError" and err["hypothesis"] == "PF = |det Q|"


def test_analyze_missing_file(capsys):
    code, out, _ = run(capsys, "analyze", "/nonexistent/system.json")
    assert code == 1 and "error" in json.loads(out)


def test_analyze_file_round_trip(tmp_path, capsys):
    path = tmp_path / "chair.json"
    dump_system(chair2d(), path)
    a = run(capsys, "analyze", str(path))
    b = run(capsys, "analyze", "builtin:chair2d")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "system"}
    assert a[0] == b[0] == 0 and strip(a[1]) == strip(b[1])


# --- generate -------------------------------------------------------------------------------

def test_generate_chair_csv(capsys):
    code, out, _ = run(capsys, "generate", "builtin:chair2d", "--iterations", "6", "--radius", "32")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["x1", "x2", "type"]
    assert len(rows) - 1 == 65 * 65
    assert {r[2] for r in rows[1:]} == {"1", "2", "3", "4"}


def test_generate_sphinx_svg(capsys):
    code, out, _ = run(capsys, "generate", "builtin:sphinx", "--iterations", "6", "--radius", "32",
                       "--format", "svg")
    assert code == 0 and out.startswith("<svg") and out.count("<circle") == 65 * 65
    classes = {part.split('"')[1] for part in out.split("class=")[1:]}
    assert len(classes) == 36


def test_generate_period_doubling_matches_words(capsys):
    code, out, _ = run(capsys, "generate", "builtin:symbolic:a:ab,b:aa", "--iterations", "5",
                       "--radius", "16", "--format", "json")
    data = json.loads(out)
    letters = {int(x): data["types"][t] for x, t in data["points"]}
    table = {"a": "ab", "b": "aa"}
    seed = from_symbolic(parse_rules("a:ab,b:aa")).seed.as_dict()
    right = iterate_word(table, "ab"[seed[(0,)]], 5)
    left = iterate_word(table, "ab"[seed[(-1,)]], 5)
    assert "".join(letters[x] for x in range(0, 17)) == right[:17]
    assert "".join(letters[x] for x in range(-16, 0)) == left[-16:]


def test_generate_too_few_iterations(capsys):
    code, _, err = run(capsys, "generate", "builtin:chair2d", "--iterations", "2", "--radius", "32")
    assert code == 1 and json.loads(err)["error"] == "WindowTooSmall"


def test_generate_output_file_and_determinism(tmp_path, capsys):
    paths = [tmp_path / f"p{i}.csv" for i in range(2)]
    for p in paths:
        assert main(["generate", "builtin:chair2d", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


# --- index ----------------------------------------------------------------------------------

def test_index_chair_text(capsys):
    code, out, _ = run(capsys, "index", "builtin:chair2d")
    lines = out.splitlines()
    assert code == 0
    assert lines[:4] == [f"{t}\t1/4" for t in "1234"]
    assert lines[4:] == ["sum\t1/1", "verdict\ttrue"]


def test_index_chair3_json(capsys):
    code, out, _ = run(capsys, "index", "builtin:chairnd:3", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["indices"] == ["1/8"] * 8 and data["sum"] == "1/1" and data["verdict"]


def test_index_truncated_description(tmp_path, capsys):
    b = chair2d()
    raw = descriptions_to_dict(b.inflation, b.descriptions)
    raw["descriptions"][0]["families"] = raw["descriptions"][0]["families"][1:]
    path = tmp_path / "d.json"
    path.write_text(json.dumps(raw))
    code, out, _ = run(capsys, "index", str(path), "--format", "json")
    data = json.loads(out)
    assert code == 2 and not data["verdict"] and data["sum"] == "7/8"


def test_index_overlap_is_invalid(tmp_path, capsys):
    b = chair2d()
    raw = descriptions_to_dict(b.inflation, b.descriptions)
    raw["descriptions"][1]["cosets"] = [{"depth": 0, "rep": [0, 0]}]
    path = tmp_path / "d.json"
    path.write_text(json.dumps(raw))
    code, out, _ = run(capsys, "index", str(path))
    err = json.loads(out)
    assert code == 1 and err["error"] == "DisjointnessViolation" and len(err["witness"]) == 2


def test_index_builtin_without_descriptions(capsys):
    code, out, _ = run(capsys, "index", "builtin:sphinx")
    assert code == 1 and json.loads(out)["hypothesis"] == "closed-form descriptions"


# --- entry point ----------------------------------------------------------------------------

def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "latsubst", "index", "builtin:chair2d"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.endswith("verdict\ttrue\n")


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
