import json

import pytest
from conftest import FIXTURES

from modlie.cli import load_settings, main, resolve_element
from modlie.divpow import DPDescriptor, vect_algebra
from modlie.errors import ParseError
from modlie.superalg import read_algebra_json, write_algebra_json

ALGEBRA = str(FIXTURES / "br2-eps1" / "algebra.json")


@pytest.fixture(autouse=True)
def no_fixture_override(monkeypatch):
    monkeypatch.delenv("MODLIE_FIXTURES", raising=False)


# ==================== SETTINGS ====================

def test_settings_from_config():
    """✅ config.yaml values are merged over the defaults"""
    settings = load_settings()
    assert settings["field"]["p"] == 3
    assert settings["field"]["k"] == 1
    assert settings["verification"]["seed"] == 20240601
    assert settings["fixtures"]["dir"] == "./data/fixtures"


def test_settings_missing_file(tmp_path):
    """✅ A missing config falls back to built-in defaults"""
    settings = load_settings(str(tmp_path / "nope.yaml"))
    assert settings["verification"]["semilinearity_trials"] == 100


# ==================== VERIFY ====================

def test_verify_eq_new():
    """✅ eq-new for m = 1, s = 1 exits 0"""
    assert main(["verify", "eq-new", "--p", "3", "--m", "1", "--s", "1"]) == 0


def test_verify_k31_jacobi():
    """✅ The contact bracket and the generating functions pass Jacobi"""
    assert main(["verify", "k31-jacobi"]) == 0


def test_verify_L3_pass_json(capsys):
    """✅ L3 at eps = 2, delta = 0, rho = 1 passes and prints JSON"""
    code = main(["verify", "L3", "--eps", "2", "--delta", "0", "--rho", "1", "--json"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["status"] == "pass"
    assert data["target"] == "L3(eps=2, delta=0, rho=1)"


def test_verify_L3_symbolic_mismatch(capsys):
    """✅ The symbolic L3 check reports the mismatches with exit code 1"""
    assert main(["verify", "L3", "--symbolic", "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["status"] == "fail"
    assert not any(c["check"].startswith("specialises") for c in data["checks"])


def test_verify_L3_eps_zero():
    """✅ eps = 0 is bad input"""
    assert main(["verify", "L3", "--eps", "0"]) == 2


def test_verify_L3_extension_field(capsys):
    """✅ --k 2 accepts a GF(9) value of eps and runs the full check"""
    code = main(["verify", "L3", "--k", "2", "--eps", "(x+1)", "--delta", "0", "--rho", "0", "--json"])
    data = json.loads(capsys.readouterr().out)
    assert code in (0, 1)
    assert data["target"].startswith("L3(eps=")
    assert any(c["check"] == "super identities" and c["matched"] for c in data["checks"])


def test_verify_L3_extension_literal_needs_k():
    """✅ A GF(9) literal is rejected over GF(3)"""
    assert main(["verify", "L3", "--eps", "(x+1)", "--delta", "0", "--rho", "0"]) == 2


def test_verify_L3_wrong_characteristic():
    """✅ L only exists in characteristic 3"""
    assert main(["verify", "L3", "--p", "5", "--eps", "1"]) == 2


def test_fingerprint_L_extension_field(capsys):
    """✅ L((x+1), 0, 0) over GF(9) is a 10-dimensional Lie algebra"""
    assert main(["fingerprint", "L", "--k", "2", "--eps", "(x+1)", "--delta", "0", "--rho", "0", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["dim"] == 10


def test_verify_unknown_target(capsys):
    """✅ Unknown targets exit 2"""
    assert main(["verify", "nonsense"]) == 2
    assert "UnknownTarget" in capsys.readouterr().out


@pytest.mark.parametrize(
    "target",
    [
        "fixture:br2-eps1:0",
        "fixture:br2-eps1:delta",
        "fixture:br2-eps1:delta:flip",
        "fixture:sl2-chevalley:lambda",
        "fixture:sl2-chevalley:lambda:flip",
    ],
)
def test_verify_fixture(target):
    """✅ Fixture targets conditional-pass with exit 0"""
    assert main(["verify", target]) == 0


def test_verify_fixture_env_override(monkeypatch, tmp_path):
    """✅ MODLIE_FIXTURES points at another fixture directory"""
    monkeypatch.setenv("MODLIE_FIXTURES", str(tmp_path))
    assert main(["verify", "fixture:br2-eps1:0"]) == 2


def test_verify_fixture_bad_form():
    """✅ fixture targets need a name and a cocycle"""
    assert main(["verify", "fixture:br2-eps1"]) == 2


def test_verify_file():
    """✅ file:<path> checks identities and restrictedness"""
    assert main(["verify", f"file:{ALGEBRA}"]) == 0


# ==================== PMAP ====================

def test_pmap_element(capsys):
    """✅ h2^[3] of L(1,0,0) is printed"""
    assert main(["pmap", ALGEBRA, "h2", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["checks"][0]["computed"] == "h2"


def test_pmap_not_restricted(tmp_path, capsys):
    """✅ d^[3] does not exist in W(1;2): exit 1"""
    path = tmp_path / "w12.json"
    write_algebra_json(vect_algebra(DPDescriptor(m=1, N=(2,), p=3)), path)
    assert main(["pmap", str(path), "d_u1"]) == 1
    assert "not restricted" in capsys.readouterr().out


def test_pmap_unknown_element():
    """✅ Unknown basis names are bad input"""
    assert main(["pmap", ALGEBRA, "z9"]) == 2


def test_resolve_element_forms():
    """✅ Names, coordinates and sums all resolve"""
    g = read_algebra_json(ALGEBRA)
    assert resolve_element(g, "h1") == g.element("h1")
    assert resolve_element(g, "2*h1 + y2") == g.vector([(2, "h1"), (1, "y2")])
    assert resolve_element(g, "0,0,0,0,1,0,0,0,0,0") == g.element("h1")
    with pytest.raises(ParseError):
        resolve_element(g, "1,2")


# ==================== FINGERPRINT / CHECK-FILE ====================

def test_fingerprint_sp4(capsys):
    """✅ sp4 fingerprint as JSON"""
    assert main(["fingerprint", "sp4", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["dim"] == 10
    assert data["center_dim"] == 0


def test_fingerprint_L_needs_parameters():
    """✅ fingerprint L without all three values is bad input"""
    assert main(["fingerprint", "L", "--eps", "1"]) == 2


def test_check_file():
    """✅ The shipped fixture algebra passes check-file"""
    assert main(["check-file", ALGEBRA]) == 0


def test_check_file_malformed(tmp_path):
    """✅ Malformed JSON exits 2"""
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    assert main(["check-file", str(path)]) == 2
