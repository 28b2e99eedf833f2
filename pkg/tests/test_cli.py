import json
import subprocess
import sys

import numpy as np
import pytest

from csduality import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


class TestFamily:
    def test_poisson_eval(self, capsys):
        code, out, _ = run(capsys, "family", "poisson", "--eval", "2", "1.0")
        assert code == 0
        assert out.strip() == "0.18393972"

    def test_binomial_eval(self, capsys):
        code, out, _ = run(capsys, "family", "binomial", "--param", "N=4", "--eval", "2", "0.5")
        assert (code, out.strip()) == (0, "0.375")

    def test_table(self, capsys):
        code, data = run_json(capsys, "family", "binomial", "--param", "N=3", "--table", "--lambdas", "0.2,0.5")
        assert code == 0
        pmf = np.array(data["data"]["pmf"])
        assert pmf.shape == (4, 2)
        np.testing.assert_allclose(pmf.sum(axis=0), 1.0, atol=1e-14)

    def test_malformed_json(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        code, _, err = run(capsys, "family", str(p), "--eval", "0", "1.0")
        assert code == 2
        assert "ParseError" in err

    def test_unknown_family(self, capsys):
        code, _, err = run(capsys, "family", "zeta", "--eval", "0", "1.0")
        assert code == 2 and "UnknownFamily" in err

    def test_out_of_range(self, capsys):
        code, _, _ = run(capsys, "family", "binomial", "--eval", "2", "1.5")
        assert code == 2


class TestVerify:
    def test_poisson_all(self, capsys):
        code, data = run_json(capsys, "verify", "poisson", "--suite", "all", "--size", "8")
        assert code == 0 and data["pass"]
        names = {r["name"] for r in data["results"]}
        assert {"poisson/moments", "poisson/gram", "poisson/roi", "poisson/duality/convergence"} <= names

    def test_negbinomial_duality(self, capsys):
        code, data = run_json(capsys, "verify", "negbinomial", "--param", "m=2", "--suite", "duality")
        assert code == 0
        conv = next(r for r in data["results"] if r["name"].endswith("duality/convergence"))
        assert conv["c"][1] == pytest.approx(1 / 6, rel=1e-9)

    def test_negative_term(self, capsys, tmp_path):
        p = tmp_path / "neg.json"
        p.write_text(json.dumps({"family": "nonlinear", "sequence": {"kind": "explicit", "values": [-1, 2]}}))
        code, _, err = run(capsys, "verify", str(p))
        assert code == 2 and "NonPositiveTerm" in err

    def test_failing_check_exit_1(self, capsys):
        code, _, _ = run(capsys, "verify", "poisson", "--suite", "gram", "--tol", "1e-30")
        assert code == 1

    def test_user_sequence(self, capsys, tmp_path):
        p = tmp_path / "seq.json"
        p.write_text(
            json.dumps(
                {
                    "family": "nonlinear",
                    "sequence": {"kind": "su2", "N": 5},
                }
            )
        )
        code, data = run_json(capsys, "verify", str(p), "--suite", "moments")
        assert code == 0 and data["pass"]

    def test_defaults_cover_builtins(self, capsys):
        code, data = run_json(capsys, "verify", "--suite", "gram")
        assert code == 0
        assert [r["name"].split("/")[0] for r in data["results"]] == ["poisson", "binomial", "negbinomial"]

    def test_bad_size(self, capsys):
        assert run(capsys, "verify", "poisson", "--size", "0")[0] == 2


class TestPosterior:
    def test_beta_8_4(self, capsys):
        code, data = run_json(capsys, "posterior", "binomial", "--param", "N=10", "--obs", "7")
        assert code == 0
        assert data["data"]["mean"] == pytest.approx(2 / 3, abs=1e-3)

    def test_bad_mass(self, capsys):
        assert run(capsys, "posterior", "binomial", "--obs", "7", "--mass", "1.5")[0] == 2

    def test_bad_obs(self, capsys):
        assert run(capsys, "posterior", "binomial", "--param", "N=3", "--obs", "7")[0] == 2

    def test_csv_peak(self, capsys, tmp_path):
        path = tmp_path / "post.csv"
        code, _, _ = run(capsys, "posterior", "poisson", "--obs", "3", "--csv", str(path))
        assert code == 0
        assert path.read_bytes().startswith(b"lambda,density,cdf\r\n")
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data[np.argmax(data[:, 1]), 0] == pytest.approx(3.0, abs=0.05)

    def test_out_dir(self, capsys, tmp_path):
        code, _, _ = run(capsys, "posterior", "poisson", "--obs", "1", "--out", str(tmp_path / "o"))
        assert code == 0
        assert (tmp_path / "o" / "report.json").is_file()
        assert (tmp_path / "o" / "posterior.csv").is_file()


class TestVCS:
    def test_dim2(self, capsys):
        code, data = run_json(capsys, "vcs", "--dim", "2", "--family", "poisson", "--lambdas", "1,2", "--samples", "2000")
        assert code == 0
        norm = next(r for r in data["results"] if r["name"] == "vcs/normalization")
        assert norm["value"] <= 1e-10

    def test_dim1_matches_scalar(self, capsys):
        code, data = run_json(capsys, "vcs", "--dim", "1", "--lambdas", "1.5", "--thetas", "0", "--samples", "100")
        assert code == 0
        vals = {r["name"]: r["value"] for r in data["results"]}
        assert vals["vcs/normalization"] <= 1e-14
        assert vals["vcs/trace_identity"] <= 1e-15

    def test_samples_zero(self, capsys):
        assert run(capsys, "vcs", "--samples", "0")[0] == 2

    def test_wrong_count(self, capsys):
        assert run(capsys, "vcs", "--dim", "3", "--lambdas", "1,2")[0] == 2


class TestTensor:
    def test_eval(self, capsys):
        code, data = run_json(capsys, "tensor", "--lambdas", "1,1", "--eval", "0,0")
        assert code == 0
        assert data["data"]["joint_prob"]["value"] == pytest.approx(np.exp(-2), rel=1e-14)

    def test_missing_lambdas(self, capsys):
        assert run(capsys, "tensor", "--lambdas", "")[0] == 2


class TestDeterminism:
    def test_byte_identical(self, capsys):
        argv = ("--seed", "42", "vcs", "--dim", "2", "--samples", "1500", "--json")
        a = run(capsys, *argv)[1]
        b = run(capsys, *argv)[1]
        assert a == b
        data = json.loads(a)
        assert data["seed"] == 42 and data["report_version"] == 1

    def test_seed_after_subcommand(self, capsys):
        a = run(capsys, "--seed", "3", "tensor", "--lambdas", "1,2", "--json")[1]
        b = run(capsys, "tensor", "--lambdas", "1,2", "--seed", "3", "--json")[1]
        strip = lambda s: {k: v for k, v in json.loads(s).items() if k not in ("command", "inputs_digest")}
        assert strip(a) == strip(b)


def test_usage_error_exit_code(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "family", "poisson")[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "csduality", "family", "poisson", "--eval", "0", "0"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1"
