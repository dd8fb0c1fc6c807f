import os

from novtorsion.cli import (
    EXIT_INDETERMINATE,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    EXIT_VALIDATE,
    main,
)

DATA = os.path.join(os.path.dirname(__file__), "data")


def fixture(name):
    return os.path.join(DATA, name)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def report_value(out, key):
    for line in out.splitlines():
        if line.startswith(key + ":"):
            return line.partition(":")[2].strip()
    return None


def test_validate_ok(capsys):
    code, out = run(capsys, "validate", fixture("two_term.cplx"))
    assert code == EXIT_OK
    assert report_value(out, "status") == "valid"
    assert report_value(out, "certified-cutoff") == "exact"


def test_validate_bad_square(capsys):
    code, out = run(capsys, "validate", fixture("bad_square.cplx"))
    assert code == EXIT_VALIDATE
    assert report_value(out, "status") == "invalid"
    assert "failure:" in out


def test_ranks(capsys):
    code, out = run(capsys, "ranks", fixture("two_term.cplx"))
    assert code == EXIT_OK
    assert report_value(out, "rank 1") == "0"
    assert report_value(out, "rank 2") == "0"
    assert report_value(out, "acyclic") == "true"


def test_torsion_fixture_prints_class(capsys):
    code, out = run(capsys, "torsion", fixture("two_term.cplx"))
    assert code == EXIT_OK
    assert report_value(out, "torsion") == "1 - 1*g(1)"
    assert report_value(out, "trivial") == "false"
    assert report_value(out, "cutoff") == "exact"


def test_torsion_deterministic(capsys):
    _, first = run(capsys, "torsion", fixture("two_term.cplx"))
    _, second = run(capsys, "torsion", fixture("two_term.cplx"))
    assert first == second


def test_parse_failure_exit(capsys):
    code, out = run(capsys, "torsion", fixture("bad_parse.cplx"))
    assert code == EXIT_PARSE
    assert report_value(out, "category") == "parse"
    assert "ghost" in out


def test_missing_file_is_usage(capsys):
    code, out = run(capsys, "torsion", fixture("never_written.cplx"))
    assert code == EXIT_USAGE
    assert report_value(out, "category") == "usage"


def test_bad_flag_is_usage(capsys):
    code, out = run(capsys, "torsion", fixture("two_term.cplx"), "--cutoff", "nope")
    assert code == EXIT_USAGE


def test_not_acyclic_is_validate_category(capsys):
    code, out = run(capsys, "torsion", fixture("not_acyclic.cplx"))
    assert code == EXIT_VALIDATE
    assert report_value(out, "category") == "validate"


def test_ambiguous_leading_term_is_indeterminate(capsys):
    code, out = run(capsys, "torsion", fixture("ambiguous.cplx"))
    assert code == EXIT_INDETERMINATE
    assert report_value(out, "category") == "indeterminate"


def test_rel_torsion_selfmap(capsys):
    code, out = run(capsys, "rel-torsion", fixture("selfmap.cplx"), "--map", "double")
    assert code == EXIT_OK
    assert report_value(out, "torsion") == "2 - 1*g(1)"
    assert report_value(out, "trivial") == "false"


def test_rel_torsion_missing_map(capsys):
    code, out = run(capsys, "rel-torsion", fixture("selfmap.cplx"), "--map", "nonesuch")
    assert code == EXIT_USAGE


def test_torsion_cutoff_flag_controls_truncation(capsys):
    # even-degree source: the torsion is the inverse series, so it truncates
    code, out = run(capsys, "torsion", fixture("even_source.cplx"), "--cutoff", "6")
    assert code == EXIT_OK
    assert report_value(out, "torsion") == "1 + 1*g(1) + 1*g(2) + 1*g(3) + 1*g(4) + 1*g(5)"
    assert report_value(out, "cutoff") == "6"
    assert report_value(out, "trivial") == "false"


def test_modular_grading_through_cli(capsys):
    code, out = run(capsys, "ranks", fixture("mod_two.cplx"))
    assert code == EXIT_OK
    assert report_value(out, "acyclic") == "true"
    code, out = run(capsys, "torsion", fixture("mod_two.cplx"))
    assert code == EXIT_OK
    assert report_value(out, "torsion") == "1 - 1*g(1)"


def test_torus_example_report(capsys):
    code, out = run(capsys, "torus-example")
    assert code == EXIT_OK
    assert report_value(out, "orbit-count") == "2"
    assert report_value(out, "connecting-count") == "2"
    assert report_value(out, "connecting-labels") == "0,1"
    assert report_value(out, "torsion minus") == "1 - 1*g(1)"
    assert report_value(out, "torsion plus") == "1 + 1*g(1)"
    assert report_value(out, "torsion minus trivial") == "false"
    assert {report_value(out, "orbit 0 index"), report_value(out, "orbit 1 index")} == {"1", "2"}
    assert "begin-document minus" in out
    assert "o1: (1 - 1*g(1))*o2" in out
