import functools
import json

import numpy as np
import pytest

from agler_hadamard import cli
from agler_hadamard import multipliers as mm
from agler_hadamard import tuples as tp
from agler_hadamard.polyalg import MatPoly, dumps_poly, eval_point, loads_poly
from agler_hadamard.verify import run_verify

FAST = ["--agler-trials", "10", "--torus-grid", "32", "--refine", "10"]


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_example_and_star_holbrook(tmp_path, capsys):
    P, F, out = tmp_path / "P.json", tmp_path / "F.json", tmp_path / "g.json"
    assert run(["example", "holbrook-poly", "--out", P], capsys)[0] == 0
    assert run(["example", "holbrook-multiplier", "--out", F], capsys)[0] == 0
    assert run(["star", P, F, "--out", out], capsys)[0] == 0
    g = loads_poly(out.read_text())
    assert eval_point(g, [1, 1, 1])[0, 0] == pytest.approx(6, abs=1e-12)


def test_star_identity_is_byte_identical(files, capsys, rng):
    from agler_hadamard.sampling import random_poly

    text = dumps_poly(random_poly(rng, 3, 4, (2, 2)))
    f = files("f.json", text)
    one = files("one.json", mm.dumps_multiplier(mm.geometric([1, 1, 1])))
    code, out, _ = run(["star", f, one], capsys)
    assert code == 0 and out == text


def test_star_zero_multiplier(files, capsys):
    f = files("f.json", dumps_poly(MatPoly.scalar(2, {(1, 0): 1, (0, 3): 2j})))
    zero = files("z.json", mm.dumps_multiplier(mm.zero(2)))
    code, out, _ = run(["star", f, zero], capsys)
    assert code == 0 and json.loads(out)["terms"] == []


def test_star_input_errors(files, capsys):
    f = files("f.json", dumps_poly(MatPoly.monomial((3, 3))))
    wrong_d = files("g.json", mm.dumps_multiplier(mm.geometric([1, 1, 1])))
    assert run(["star", f, wrong_d], capsys)[0] == 2
    capped = files("c.json", mm.dumps_multiplier(mm.diagonal_extraction(2, 4)))
    code, _, err = run(["star", f, capped], capsys)
    assert code == 2 and "cap" in err


def test_malformed_file_reports_location(files, capsys):
    bad = files("bad.json", '{"d": 2,\n "terms": [}')
    code, _, err = run(["norm", bad], capsys)
    assert code == 2 and "line 2" in err
    bad2 = files("bad2.json", '{"d": 2, "shape": [1, 1], "terms": [{"alpha": [1], "coeff": [[1]]}]}')
    code, _, err = run(["norm", bad2], capsys)
    assert code == 2 and "terms[0]" in err
    assert run(["norm", "/nonexistent/poly.json"], capsys)[0] == 2


def test_norm_holbrook(files, capsys):
    P = files("P.json", cli.EXAMPLES["holbrook-poly"]())
    code, out, _ = run(["norm", P, "--pool", "named", *FAST], capsys)
    res = json.loads(out)["results"]
    assert code == 0
    assert res["agler_lower_bound"]["value"] >= 6 - 1e-9
    assert res["coefficient_upper_bound"] == 9


@pytest.mark.parametrize("c", [1.0, 0.0])
def test_norm_constant_and_zero(files, capsys, c):
    f = files("c.json", dumps_poly(MatPoly.constant(3, c)))
    code, out, _ = run(["norm", f, *FAST], capsys)
    res = json.loads(out)["results"]
    assert code == 0
    for key in ("sup_norm_torus", "agler_lower_bound"):
        assert res[key]["value"] == pytest.approx(c, abs=1e-12)
    assert res["coefficient_upper_bound"] == c


def test_search_commands(files, capsys):
    P = files("P.json", cli.EXAMPLES["holbrook-poly"]())
    code, out, _ = run(["search", P, *FAST], capsys)
    res = json.loads(out)["results"]
    assert code == 0 and res["kind"].startswith("violation") and res["gap"] > 0.8
    z12 = files("z12.json", dumps_poly(MatPoly.monomial((1, 1))))
    assert json.loads(run(["search", z12, *FAST], capsys)[1])["results"]["kind"] == "none found"
    z = files("z.json", dumps_poly(MatPoly.variable(1, 0)))
    assert json.loads(run(["search", z, *FAST], capsys)[1])["results"]["kind"] == "none found"


def test_search_rejects_matrix_polynomial(files, capsys):
    f = files("m.json", dumps_poly(MatPoly.constant(2, np.eye(2))))
    assert run(["search", f], capsys)[0] == 2


def corrupted_holbrook():
    H = tp.holbrook()
    mats = list(H.tuple.matrices)
    mats[0] = 0.5 * mats[0]
    return tp.PairedTuple(tp.new_checked(mats), H.x, H.y)


def test_verify_negative_control(monkeypatch, capsys):
    rep = run_verify(agler_trials=5, holbrook_factory=corrupted_holbrook)
    assert not rep.passed
    assert "holbrook moments" in rep.failures
    monkeypatch.setattr(cli, "run_verify", functools.partial(run_verify, holbrook_factory=corrupted_holbrook))
    code, out, err = run(["verify", "--agler-trials", "5"], capsys)
    assert code == 1
    assert "FAILED: holbrook moments" in err
    assert json.loads(out)["all_passed"] is False


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["norm"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--agler-size", "0,2"])
    assert exc.value.code == 2
