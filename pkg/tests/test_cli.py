import io
import json
import math
import subprocess
import sys

import pytest

from gaussbundle.cli import run
from gaussbundle.report import Check, Report, equal_check, le_check


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def values(text):
    return {r["name"]: r for r in json.loads(text)["results"]}


def test_norm_cosh2_constant():
    code, out, _ = invoke("norm", "--young", "cosh2", "--field", "2.0", "--dim", "1")
    assert code == 0
    assert values(out)["luxemburg_norm(cosh2)"]["value"] == pytest.approx(2 / math.acosh(2), rel=1e-9)


def test_dual_norm_flag():
    code, out, _ = invoke("norm", "--young", "power:2", "--field", "x1", "--dual")
    lux = 1 / math.sqrt(2)
    assert code == 0 and lux <= values(out)["dual_norm(power:2)"]["value"] <= 2 * lux


def test_divergence_hyvarinen():
    code, out, _ = invoke("divergence", "--kind", "hyvarinen", "--p", "H(1,1)", "--q", "0")
    assert code == 0
    assert values(out)["hyvarinen"]["value"] == pytest.approx(0.5, abs=1e-12)


def test_verify_transports_seed_7():
    code, out, _ = invoke("verify", "--suite", "transports", "--dim", "1", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["seed"] == 7 and all(r["pass"] for r in doc["results"])
    assert any("cocycle" in r["name"] for r in doc["results"])
    assert any("duality" in r["name"] for r in doc["results"])


def test_global_flags_before_or_after_subcommand():
    a = invoke("--dim", "2", "cumulant", "--field", "x1 + 0.5*x2")[1]
    b = invoke("cumulant", "--field", "x1 + 0.5*x2", "--dim", "2")[1]
    assert a == b
    assert values(a)["cumulant"]["value"] == pytest.approx(0.5 * 1.25, abs=1e-12)


def test_parse_error_exit_2_with_position():
    code, out, err = invoke("cumulant", "--field", "x1 + * 2")
    assert code == 2 and out == ""
    assert "position 5" in err and "^" in err


def test_inadmissible_tilt_exit_2_with_verdict():
    code, _, err = invoke("cumulant", "--field", "exp(x1)")
    assert code == 2 and "certificate: unbounded" in err
    code, _, err = invoke("divergence", "--p", "0.6*H(2,1)", "--q", "0")
    assert code == 2 and "certificate: quadratic" in err


def test_usage_errors_exit_2():
    assert invoke("frobnicate")[0] == 2
    assert invoke("norm", "--field", "x1")[0] == 2
    assert invoke("norm", "--young", "bogus", "--field", "x1")[0] == 2
    assert invoke("cumulant", "--field", "x1", "--dim", "9")[0] == 2


def test_failure_exit_1_names_both_sides():
    # an absurdly small tolerance scale turns round-off into failures
    code, out, err = invoke("verify", "--suite", "transports", "--tolerance-scale", "1e-30")
    assert code == 1
    failed = [r for r in json.loads(out)["results"] if not r["pass"]]
    assert failed and all("rhs" in r and "value" in r for r in failed)
    assert "FAILED" in err and "rhs=" in err


def test_transport_and_otto_grad():
    code, out, _ = invoke("transport", "--kind", "e", "--from", "0", "--to", "H(1,1)", "--vector", "H(2,1)")
    assert code == 0
    assert "transported=" in values(out)["centering_shift"]["note"]
    code, out, _ = invoke("otto-grad", "--p", "0", "--target", "H(2,1)", "--degree", "2")
    v = values(out)
    assert code == 0 and v["c[2]"]["value"] == pytest.approx(0.5, abs=1e-10)


def test_boltzmann_checks():
    for check in ("maxwellian", "conservation", "weak"):
        code, out, _ = invoke("boltzmann", "--f", "0.1*H(2,1)" if check != "maxwellian" else "0",
                              "--check", check, "--samples", "20000")
        assert code == 0, check


def test_csv_format():
    code, out, _ = invoke("--format", "csv", "divergence", "--p", "H(1,1)", "--q", "0")
    lines = out.strip().splitlines()
    assert lines[0] == "name,value,rhs,tolerance,se,pass"
    assert lines[-1].endswith(",true")


def test_json_is_byte_identical_and_timing_optional():
    argv = ("boltzmann", "--f", "0.1*H(2,1)", "--check", "weak", "--samples", "5000", "--seed", "3")
    assert invoke(*argv)[1] == invoke(*argv)[1]
    assert "elapsed_ms" not in invoke(*argv)[1]
    assert "elapsed_ms" in json.loads(invoke("--timing", *argv)[1])


def test_tolerance_scale_is_recorded():
    out = invoke("divergence", "--p", "H(1,1)", "--q", "0", "--tolerance-scale", "10")[1]
    assert values(out)["score_identity"]["tolerance"] == pytest.approx(1e-7)
    assert json.loads(out)["params"]["tolerance_scale"] == 10


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gaussbundle", "norm", "--young", "cosh2", "--field", "2.0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "luxemburg_norm" in proc.stdout


def test_report_serialization():
    rep = Report("x", {"b": 1, "a": [1.5, None]}, 0, [Check("v", 1 / 3), equal_check("e", 1.0, 1.0, 0.0),
                                                        le_check("l", 2.0, 1.0, 0.5), Check("n", float("nan"))])
    text = rep.to_json()
    doc = json.loads(text)
    assert doc["results"][0]["value"] == 1 / 3
    assert doc["results"][3]["value"] is None
    assert not rep.passed and [c.name for c in rep.failures()] == ["l"]
    assert "0.33333333333333331" in text
    assert rep.to_csv().splitlines()[2] == "e,1,1,0,,true"
