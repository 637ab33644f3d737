import csv
import io
import subprocess
import sys

import pytest

from recbound import cli
from recbound.bases import affine_basis, binomial_basis, stirling_basis
from recbound.core_order import CoeffVec, GenSet
from recbound.engine import Status
from recbound.report import bound_lines, expanded_form, native_form, write_curves


def run(capsys, *argv):
    code = cli.main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def gs(basis, *vecs):
    return GenSet.of(basis, [CoeffVec.make(basis, v) for v in vecs])


# -- report ------------------------------------------------------------------


def test_native_and_expanded_forms():
    b = binomial_basis(2)
    g = CoeffVec.make(b, (1, 1, 0))
    assert native_form(g) == "C(n,2)+C(n,1)"
    assert expanded_form(g) == "(n^2+n)/2"
    assert native_form(CoeffVec.make(affine_basis(), (1, 0))) == "1*n + 0"
    assert expanded_form(CoeffVec.make(stirling_basis(2), (0, 1))) == "2^n-1"
    assert native_form(CoeffVec.top(b)) == "inf"
    assert expanded_form(CoeffVec.top(b)) is None


def test_bound_lines_min():
    A = gs(binomial_basis(2), (0, 2, 0), (1, 0, 1))
    lines = bound_lines(A)
    assert lines[0] == "f(n) <= min( 2*C(n,1), C(n,2)+1 )"
    assert lines[1:] == ["  2*C(n,1) = 2*n", "  C(n,2)+1 = (n^2-n+2)/2"]
    assert bound_lines(gs(affine_basis(), (1, 0), (0, 3))) == ["f(n) <= min( 0*n + 3, 1*n + 0 )"]


def test_curves_csv():
    A = gs(binomial_basis(2), (1, 1, 0))
    fh = io.StringIO()
    write_curves(fh, A, [0, 1, 3, 6, 10], 4)
    rows = list(csv.reader(io.StringIO(fh.getvalue())))
    assert rows[0] == ["n", "oracle", "g1"]
    assert rows[-1] == ["4", "10", "10"]
    assert len(rows) == 6


def test_curves_header_only_and_two_generators():
    fh = io.StringIO()
    write_curves(fh, None, [], 4)
    assert fh.getvalue() == "n,oracle\n"
    fh = io.StringIO()
    write_curves(fh, gs(affine_basis(), (1, 0), (0, 3)), [0] * 3, 2)
    assert fh.getvalue().splitlines()[0] == "n,oracle,g1,g2"


# -- commands ----------------------------------------------------------------


def test_analyze_quadratic(capsys, corpus):
    code, out, _ = run(capsys, "analyze", str(corpus / "quadratic.eq"), "--domain", "poly:2")
    assert code == 0
    assert "f(n) <= C(n,2)+C(n,1) = (n^2+n)/2" in out


def test_missing_and_malformed_files(capsys, corpus, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "nope.eq"))
    assert code == 1 and "error" in err
    bad = tmp_path / "bad.eq"
    bad.write_text("eq: push 0 (")
    assert run(capsys, "analyze", str(bad))[0] == 1
    assert run(capsys, "analyze", str(corpus / "linear.eq"), "--domain", "quartic")[0] == 1


def test_worst_code_over_files(capsys, corpus, tmp_path):
    code, out, _ = run(capsys, "analyze", str(corpus / "linear.eq"), str(tmp_path / "nope.eq"))
    assert code == 1
    assert "f(n) <= 1*n + 0" in out


def test_sampled_only_exit(capsys, corpus):
    code, out, _ = run(capsys, "analyze", str(corpus / "monus.eq"), "--iters", "2", "--no-early-exit")
    assert code == 2
    assert "status: SampledOnly" in out


def test_status_codes():
    assert cli.status_code(Status.EXACT_POSTFIX) == 0
    assert cli.status_code(Status.WIDENED_POSTFIX) == 0
    assert cli.status_code(Status.SAMPLED_ONLY) == 2
    assert cli.status_code(Status.DIVERGED) == 3
    assert cli.worst([0, 2, 3]) == 3
    assert cli.worst([0, 3, 1]) == 1
    assert cli.worst([]) == 0


def test_trace_and_prefix(capsys, corpus):
    code, out, _ = run(capsys, "analyze", str(corpus / "nested.eq"), "--trace", "--verify-prefix", "10")
    assert code == 0
    assert "iterate 1: {(0,1), (1,0)}" in out
    assert "prefix check on 0..10: holds" in out


def test_trace_environment(capsys, corpus, monkeypatch):
    monkeypatch.setenv("RECBOUND_TRACE", "1")
    _, out, _ = run(capsys, "analyze", str(corpus / "nested.eq"))
    assert "iterate 0: {(0,0)}" in out


def test_csv_option(capsys, corpus, tmp_path):
    path = tmp_path / "q.csv"
    code, _, _ = run(capsys, "analyze", str(corpus / "quadratic.eq"), "--csv", str(path), "--csv-N", "4")
    assert code == 0
    assert path.read_text().splitlines()[-1] == "4,10,10"


def test_parallel_jobs_match_serial(capsys, corpus):
    files = [str(corpus / f) for f in ("cubic.eq", "fib.eq", "linear.eq")]
    serial = run(capsys, "analyze", *files)
    parallel = run(capsys, "analyze", *files, "--jobs", "2")
    assert serial[:2] == parallel[:2]


def test_output_is_deterministic(capsys, corpus):
    a = run(capsys, "analyze", str(corpus / "cubic.eq"))
    b = run(capsys, "analyze", str(corpus / "cubic.eq"))
    assert a == b


def test_analyze_pw(capsys, corpus):
    code, out, _ = run(capsys, "analyze-pw", str(corpus / "loop.pw"), "--check-N", "6")
    assert code == 0
    assert "D3: {n - i}" in out and "D4: {i}" in out
    assert "dominated, exact" in out


def test_synth(capsys):
    code, out, _ = run(capsys, "synth", "--domain", "affine", "--coeffs", "1,3", "--base", "0")
    assert code == 0
    assert "minimal generators: {(1,2), (3,0)}" in out
    assert "u + v >= 3" in out


def test_oracle(capsys, corpus):
    code, out, _ = run(capsys, "oracle", str(corpus / "quadratic.eq"), "--N", "4")
    assert code == 0
    assert out.split()[-2:] == ["4", "10"]


def test_ode_check_simulation(capsys):
    code, out, _ = run(
        capsys, "ode-check", "--alpha", "0:2", "--beta", "2", "--gamma", "1", "--v0", "1/5",
        "--M", "1/2", "--simulate", "2", "--steps", "100",
    )
    assert code == 0
    assert "accepted" in out and "2/2 stayed" in out


def test_console_entry_point(corpus):
    proc = subprocess.run(
        [sys.executable, "-m", "recbound", "analyze", str(corpus / "nested.eq")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "f(n) <= 1*n + 0" in proc.stdout


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
