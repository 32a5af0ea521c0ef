import json
import os

import pytest

from config.settings import DATA_DIR
from conelab import catalog, jalg
from conelab.errors import InputError
from conelab.report import ReportFormatter
from main import RunConfig, main, run

BAD_ASYM = os.path.join(DATA_DIR, "algebras", "bad_asym.json")
ABELIAN_SWAP = os.path.join(DATA_DIR, "extensions", "abelian_swap.json")


def _json_run(capsys, *argv):
    code = main([*argv, "--json"])
    report = json.loads(capsys.readouterr().out)
    assert report["exit_code"] == code
    return code, report


def test_verify_hermitian(capsys):
    code, report = _json_run(capsys, "verify", "--catalog", "herm_complex", "--n", "2", "--samples", "20")
    assert code == 0
    assert report["verdict"] == "pass"
    assert report["sections"]["cartan"]["dim_k"] == 3
    assert report["sections"]["cartan"]["dim_p"] == 4
    assert report["sections"]["algebra"]["fingerprint"] == jalg.fingerprint(catalog.herm_complex(2))
    assert report["sections"]["order"]["kernel_dim"] == 0
    assert report["sections"]["order"]["agreements"] == 1.0
    equivalence = report["sections"]["equivalence"]
    assert 0.0 < equivalence["c"] <= equivalence["C"]
    assert 0.0 < equivalence["chart_r"] <= equivalence["chart_R"]


def test_verify_spin_factor(capsys):
    code, _ = _json_run(capsys, "verify", "--catalog", "spin", "--k", "4", "--samples", "20")
    assert code == 0


def test_verify_improper_cone_fails(capsys):
    path = os.path.join(DATA_DIR, "algebras", "dual_numbers.json")
    code, report = _json_run(capsys, "verify", "--file", path, "--samples", "20")
    assert code == 1
    assert report["verdict"] == "fail"


def test_verify_asymmetric_file_is_input_error(capsys):
    code, report = _json_run(capsys, "verify", "--file", BAD_ASYM)
    assert code == 2
    assert report["verdict"] == "input-error"
    assert report["sections"]["error"]["type"] == "AsymmetricStructureError"


def test_orient_writes_witness(capsys, tmp_path):
    witness = tmp_path / "witness.json"
    code, report = _json_run(capsys, "orient", "--catalog", "herm", "--n", "2", "--restarts", "16",
                             "--samples", "20", "--witness", str(witness))
    assert code == 0
    assert report["sections"]["solver"]["status"] == "Found"
    assert report["sections"]["jb_star"]["passed"] is True
    assert report["sections"]["positive_cone"]["residuals"]["imaginary_part"] < 1e-6
    stored = json.loads(witness.read_text())
    assert stored["basis_hash"] == report["sections"]["solver"]["basis_hash"]


def test_orient_spin_factor_not_found(capsys):
    code, report = _json_run(capsys, "orient", "--catalog", "spin_factor", "--k", "2", "--restarts", "8")
    assert code == 1
    assert report["sections"]["solver"]["status"] == "NotFound"
    assert "orientation" not in report["sections"]


def test_orient_abelian(capsys):
    code, report = _json_run(capsys, "orient", "--catalog", "abelian", "--n", "4", "--restarts", "4",
                             "--samples", "20")
    assert code == 0
    assert report["sections"]["solver"]["derivation_dim"] == 0


def test_reconstruct_symmetric_matrices(capsys):
    code, report = _json_run(capsys, "reconstruct", "--catalog", "sym_real", "--n", "2", "--samples", "40")
    assert code == 0
    dims = report["sections"]["reconstruction"]["dims"]
    assert dims == {"V": 3, "R(V)": 4, "complexification": 8}
    assert report["sections"]["reversibility"]["reversible"] is True


def test_reconstruct_quaternionic_scalars(capsys):
    code, report = _json_run(capsys, "reconstruct", "--catalog", "quat", "--n", "1", "--samples", "40")
    assert code == 0
    assert report["sections"]["reconstruction"]["dims"]["R(V)"] == 1


def test_reconstruct_extension_file(capsys):
    code, report = _json_run(capsys, "reconstruct", "--extension", ABELIAN_SWAP, "--samples", "40",
                             "--restarts", "4")
    assert code == 0
    assert report["sections"]["reconstruction"]["dims"]["V"] == 1


def test_reconstruct_malformed_extension(capsys, tmp_path):
    path = tmp_path / "ext.json"
    path.write_text(json.dumps({"ambient": {"dim": 1, "identity": [1.0]}, "phi": [[1.0]]}))
    code, _ = _json_run(capsys, "reconstruct", "--extension", str(path))
    assert code == 2


def test_reconstruct_without_builtin_extension(capsys):
    code, report = _json_run(capsys, "reconstruct", "--catalog", "spin", "--k", "3")
    assert code == 2
    assert "--extension" in report["sections"]["error"]["message"]


def test_catalog_listing(capsys):
    code, report = _json_run(capsys, "catalog", "--n", "2")
    assert code == 0
    rows = {row["name"].split("(")[0]: row for row in report["sections"]["catalog"]}
    assert len(rows) == 5
    assert rows["herm_complex"]["dim"] == 4
    assert rows["herm_complex"]["rank"] == 2
    assert rows["herm_complex"]["derivations"] == 3
    assert rows["abelian"]["derivations"] == 0


def test_json_report_is_deterministic():
    config = RunConfig.from_dict({"command": "orient", "catalog": "abelian", "n": 3, "restarts": 2,
                                  "samples": 10, "output_format": "json"})
    first = ReportFormatter("json").render(run(config)[1])
    second = ReportFormatter("json").render(run(config)[1])
    assert first == second
    assert json.loads(first)["schema"] == 1


def test_text_report_and_out_file(capsys, tmp_path):
    out = tmp_path / "reports" / "verify.txt"
    code = main(["verify", "--catalog", "abelian", "--n", "2", "--samples", "10", "--out", str(out)])
    printed = capsys.readouterr().out
    assert code == 0
    assert printed.startswith("verify abelian(2): pass (exit 0)")
    assert out.read_text() == printed


@pytest.mark.parametrize("overrides", [
    {"tol_success": 1e-3, "tol_fail": 1e-4},
    {"tol_success": 0.0},
    {"colour": "red"},
    {"seed": -1},
    {"command": "explode"},
    {"restarts": 0},
], ids=["inverted-tolerances", "zero-tolerance", "unknown-key", "negative-seed", "bad-command",
        "no-restarts"])
def test_run_config_rejects(overrides):
    with pytest.raises(InputError):
        RunConfig.from_dict({"command": "verify", "catalog": "sym", "n": 2, **overrides})


def test_cli_tolerance_error_exit_code(capsys):
    assert main(["orient", "--catalog", "herm", "--n", "2", "--tol-success", "1", "--tol-fail", "0.1"]) == 2
    assert "tol_success" in capsys.readouterr().err


def test_formatter_rejects_unknown_format():
    with pytest.raises(ValueError):
        ReportFormatter("xlsx")


def test_text_render_tables():
    report = ReportFormatter.build("verify", "toy", "pass", 0, {
        "summary": {"passed": True, "residual": 1.5e-12, "nested": {"dim": 3}},
        "rows": [{"name": "a", "dim": 1}],
    })
    text = ReportFormatter.render_text(report)
    assert "summary" in text
    assert "nested.dim" in text
    assert "1.500e-12" in text
    assert "yes" in text
