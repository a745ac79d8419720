import json
import math

import numpy as np
import pytest

from mhdcert import cli
from mhdcert.data import (
    abc_norm3,
    load_datum,
    make_abc,
    make_orszag_tang,
    orszag_tang_norm3,
    parse_datum,
    save_datum,
)
from mhdcert.spectral import DivergenceWarning, pair_norm, sobolev_norm

SCALE = (2 * math.pi) ** 1.5


def test_abc_unit_norm():
    assert pair_norm(make_abc(1, 1, 1, 1), 3) == pytest.approx(41.6695, abs=1e-3)
    assert abc_norm3(1, 1, 1, 1) == pytest.approx(SCALE * math.sqrt(7), rel=1e-15)


def test_abc_supports():
    s = make_abc(1, 2, 3, 4)
    assert sorted(map(tuple, s.u.modes)) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert sorted(map(tuple, s.b.modes)) == [(1, -1, 0), (1, 1, 0)]
    assert sobolev_norm(make_abc(1, 1, 1, 0).b, 0) == 0


def test_orszag_tang_norms():
    assert pair_norm(make_orszag_tang(0.0), 3) == pytest.approx(2 * SCALE, rel=1e-14)
    assert sobolev_norm(make_orszag_tang(0.0).b, 0) == 0
    assert pair_norm(make_orszag_tang(1.0), 3) == pytest.approx(SCALE * math.sqrt(136), rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_closed_forms_random(seed):
    rng = np.random.default_rng(seed)
    A, B, C, D, beta = rng.uniform(-3, 3, 5)
    assert abs(pair_norm(make_abc(A, B, C, D), 3) - abc_norm3(A, B, C, D)) <= 1e-12 * abc_norm3(A, B, C, D)
    assert abs(pair_norm(make_orszag_tang(beta), 3) - orszag_tang_norm3(beta)) <= 1e-12 * orszag_tang_norm3(beta)


def test_named_data_are_solenoidal():
    for s in (make_abc(1, -2, 0.5, 3), make_orszag_tang(0.7)):
        assert s.u.divergence_residual() == 0.0
        assert s.b.divergence_residual() == 0.0


def test_abc_physical_values():
    """Spot-check the Fourier form against the trigonometric formula at one point."""
    A, B, C, D = 0.3, -1.1, 2.0, 0.8
    s = make_abc(A, B, C, D)
    x = np.array([0.4, 1.3, -2.2])

    def evaluate(f):
        m, c = f.full()
        return np.real(np.sum(c * np.exp(1j * (m @ x))[:, None], axis=0)) / SCALE

    u = np.array([B * np.cos(x[1]) + C * np.sin(x[2]), A * np.sin(x[0]) + C * np.cos(x[2]), A * np.cos(x[0]) + B * np.sin(x[1])])
    b = D * np.array([np.sin(x[0]) * np.cos(x[1]), -np.cos(x[0]) * np.sin(x[1]), 0])
    np.testing.assert_allclose(evaluate(s.u), u, atol=1e-13)
    np.testing.assert_allclose(evaluate(s.b), b, atol=1e-13)


def test_orszag_tang_physical_values():
    beta = 0.6
    s = make_orszag_tang(beta)
    x = np.array([0.9, -0.4, 2.5])

    def evaluate(f):
        m, c = f.full()
        return np.real(np.sum(c * np.exp(1j * (m @ x))[:, None], axis=0)) / SCALE

    u = np.array([-2 * np.sin(x[1]), 2 * np.sin(x[0]), 0])
    b = beta * np.array([-2 * np.sin(2 * x[1]) + np.sin(x[2]), 2 * np.sin(x[0]) + np.sin(x[2]), np.sin(x[0]) + np.sin(x[1])])
    np.testing.assert_allclose(evaluate(s.u), u, atol=1e-13)
    np.testing.assert_allclose(evaluate(s.b), b, atol=1e-13)


def test_roundtrip(tmp_path):
    s = make_abc(1, 1, 1, 1)
    save_datum(s, tmp_path / "d.json")
    t = load_datum(tmp_path / "d.json")
    np.testing.assert_allclose(t.u.coeffs, s.u.coeffs, atol=1e-15)
    np.testing.assert_allclose(t.b.coeffs, s.b.coeffs, atol=1e-15)


def test_load_rejects_mean_mode(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"u": [{"k": [0, 0, 0], "re": [1, 0, 0], "im": [0, 0, 0]}], "b": []}))
    with pytest.raises(ValueError):
        load_datum(p)


def test_load_projects_with_warning(tmp_path):
    p = tmp_path / "div.json"
    p.write_text(json.dumps({"u": [{"k": [1, 1, 0], "re": [1, 0, 0], "im": [0, 0, 0]}], "b": []}))
    with pytest.warns(DivergenceWarning):
        s = load_datum(p)
    np.testing.assert_allclose(s.u.coeffs[0], [0.5, -0.5, 0])


def test_load_errors(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ValueError, match="JSON"):
        load_datum(p)
    p.write_text(json.dumps({"u": []}))
    with pytest.raises(ValueError):
        load_datum(p)
    p.write_text(json.dumps({"dim": 3, "u": [{"k": [1, 0], "re": [0, 1], "im": [0, 0]}], "b": []}))
    with pytest.raises(ValueError, match="dimension"):
        load_datum(p)


def test_parse_datum(tmp_path):
    assert pair_norm(parse_datum("abc:1,1,1,1"), 3) == pytest.approx(41.6695, abs=1e-3)
    assert pair_norm(parse_datum("ot:1"), 3) == pytest.approx(SCALE * math.sqrt(136))
    save_datum(make_orszag_tang(2.0), tmp_path / "ot.json")
    assert pair_norm(parse_datum(f"file:{tmp_path / 'ot.json'}"), 3) == pytest.approx(orszag_tang_norm3(2.0))
    for bad in ("abc:1,2", "xyz:1"):
        with pytest.raises(ValueError):
            parse_datum(bad)


def test_cli_datum(tmp_path, capsys):
    out = tmp_path / "abc.json"
    assert cli.main(["datum", "--datum", "abc:1,1,1,1", "--emit", str(out), "--orders", "3"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["norms"]["3"] == pytest.approx(41.6695, abs=1e-3)
    assert pair_norm(load_datum(out), 3) == pytest.approx(41.6695, abs=1e-3)
