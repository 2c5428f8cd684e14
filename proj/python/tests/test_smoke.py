import json
import math
import pathlib

import pytest

import rpekit

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def test_projection():
    assert rpekit.project_truncated([1, 0, 0], 0.1) == pytest.approx([0.8, 0.1, 0.1])
    with pytest.raises(ValueError):
        rpekit.project_truncated([1, 0], 0.6)


def test_quadrature():
    v = rpekit.beta_marginal_expectation(lambda x: max(x, 0.5), 1, 3, breakpoints=[0.5])
    assert v == pytest.approx(13 / 24, abs=1e-12)


def test_three_path_closed_form():
    net = rpekit.load_network(str(FIXTURES / "networks" / "three_path.json"))
    eps = 1 / 60
    r = rpekit.solve_beckmann(net, eps)
    want = [(5 - 10 * eps + 6 * eps**2) / (6 - 6 * eps), eps, (1 - 2 * eps) / (6 - 6 * eps)]
    assert r["flow"] == pytest.approx(want, abs=1e-9)
    assert rpekit.verify_kkt(net, eps, r["flow"])["verdict"] == "pass"
    lim = rpekit.rpe_limit(net)
    assert lim["limit"] == pytest.approx([5 / 6, 0, 1 / 6], abs=1e-6)


def test_checks_on_attack_game():
    g = rpekit.load_game(str(FIXTURES / "games" / "attack.json"))
    h = g.named_profiles["half-half-zero"]
    assert rpekit.check_nash(g, h)["verdict"] == "pass"
    assert rpekit.check_admissible(g, h)["verdict"] == "pass"
    assert rpekit.search_certificate(g, h)["verdict"] == "fail"


def test_certificate_family():
    g = rpekit.load_game(str(FIXTURES / "games" / "three_path.json"))
    fam = rpekit.TemplateFamily.shared(rpekit.PerturbationTemplate.vertex_mix(3, [0.5, 0, 0], 0.5))
    assert rpekit.check_certificate(g, g.named_profiles["g0"], fam)["verdict"] == "pass"


def test_simulation_is_seeded():
    g = rpekit.load_game(str(FIXTURES / "games" / "three_path.json"))
    h = g.named_profiles["g0"]
    a = rpekit.sample_summary(g, h, 1000, 5)
    assert a == rpekit.sample_summary(g, h, 1000, 5)
    assert math.isclose(sum(a), 1.0)


def test_cli_roundtrip():
    code, out, _ = rpekit.run_cli(["poa", str(FIXTURES / "networks" / "pigou.json")])
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["price_of_anarchy"] == pytest.approx(4 / 3, abs=1e-6)
