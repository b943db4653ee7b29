"""Command-line frontend: grammar round-trips, frozen outputs, exit codes.

Every stdout assertion here is byte-exact against the canonical JSON line the
CLI prints (json.dumps with sort_keys=True), so any drift in rendering or
payload shape shows up as a diff, not just a semantic mismatch.
"""

import json
import shutil
import subprocess
import sys
from fractions import Fraction

import pytest

from starforge.cli_frontend import (ParseError, parse_expression, render_expr,
                                    run_command)


def go(capsys, *argv):
    """Run one CLI invocation in-process; return (CommandResult, stdout)."""
    res = run_command(list(argv))
    out = capsys.readouterr().out
    return res, out


# ============================================================
# Expression grammar: parse/render round trips
# ============================================================

COORDS = ("q", "p", "q1", "p1", "q2", "p2")


def rand_tree(rng, depth):
    # Mirror the node shapes the parser itself can produce: "num" payloads
    # stay nonnegative (a leading minus parses as a "neg" node instead).
    kinds = ["num", "i", "lam", "coord", "gauss"]
    if depth > 0:
        kinds += ["neg", "add", "sub", "mul", "pow"] * 2
    k = rng.choice(kinds)
    if k == "num":
        return ("num", Fraction(rng.randrange(0, 8), rng.randrange(1, 5)))
    if k == "i":
        return ("i",)
    if k == "lam":
        return ("lam",)
    if k == "coord":
        return ("coord", rng.choice(COORDS))
    if k == "gauss":
        return ("gauss", Fraction(rng.randrange(1, 5), rng.randrange(1, 4)))
    if k == "neg":
        return ("neg", rand_tree(rng, depth - 1))
    if k == "pow":
        return ("pow", rand_tree(rng, depth - 1), rng.randrange(-3, 4))
    return (k, rand_tree(rng, depth - 1), rand_tree(rng, depth - 1))


def test_random_trees_survive_render_then_parse(rng):
    for _ in range(50):
        tree = rand_tree(rng, depth=3)
        text = render_expr(tree)
        assert parse_expression(text) == tree, text


def test_render_is_a_canonical_form(rng):
    # Rendering a parsed expression and reparsing must give the same tree,
    # even for inputs whose parentheses carry value (q - (p - q) != q - p - q).
    for text in ["q - (p - q)", "-(q + p)", "q*(p*q)", "-(-q)",
                 "q + (p - 1)", "2*q^2 - 1/3*p", "gauss(1/2)^2 * (q + p)",
                 "(q + p)^2", "q - (-p)", "lam^-2 * I", "- q * p + 0/7"]:
        tree = parse_expression(text)
        assert parse_expression(render_expr(tree)) == tree


@pytest.mark.parametrize("text,canonical", [
    ("q+p", "q + p"),
    (" 2 * q ", "2*q"),
    ("-(q+p)", "-(q + p)"),
    ("q^2*p", "q^2*p"),
    ("4/2", "2"),
    ("lam ^ -1", "lam^-1"),
])
def test_canonical_spellings(text, canonical):
    assert render_expr(parse_expression(text)) == canonical


def test_functional_atoms_round_trip():
    for text, canonical in [
        ("delta(1/2, -1)", "delta(1/2, -1)"),
        ("delta()", "delta()"),
        ("density(q^2 * gauss(1))", "density(q^2*gauss(1))"),
        ("wigner(3)", "wigner(3)"),
    ]:
        tree = parse_expression(text, functional=True)
        assert render_expr(tree) == canonical
        assert parse_expression(canonical, functional=True) == tree


def test_functional_atoms_are_rejected_outside_functional_mode():
    # Without the flag, "delta" is just an unknown coordinate name followed
    # by "(", which the grammar cannot accept.
    with pytest.raises(ParseError):
        parse_expression("delta(0,0)")


@pytest.mark.parametrize("text,offset,expected", [
    ("q +* p", 3, "an atom"),
    ("q +", 3, "an atom"),
    ("(q", 2, "')'"),
    ("q p", 2, "end of input"),
    ("gauss(x)", 6, "a rational number"),
    ("q^x", 2, "an integer exponent"),
    ("1/0", 2, "a nonzero denominator"),
    ("q $ p", 2, "a token"),
])
def test_parse_errors_carry_offset_and_expectation(text, offset, expected):
    with pytest.raises(ParseError) as err:
        parse_expression(text)
    assert err.value.offset == offset
    assert err.value.expected == expected


# ============================================================
# Frozen command outputs (stdout is byte-exact, one JSON line)
# ============================================================

FROZEN = [
    # (argv, exit status, exact stdout line)
    (("commutator", "q", "p"), 0, '{"result": "I*lam"}'),
    (("star", "q", "p"), 0, '{"result": "q*p + 1/2*I*lam"}'),
    (("star", "q^2", "p^2"), 0,
     '{"result": "q^2*p^2 + 2*I*q*p*lam - 1/2*lam^2"}'),
    (("bullet", "q + lam*p", "q - lam*p"), 0, '{"result": "q^2 - p^2*lam^2"}'),
    (("trace", "gauss(1)"), 0, '{"result": "pi*lam^-1"}'),
    (("integrate", "q^2 * gauss(1)"), 0, '{"result": "1/2*pi"}'),
    (("star", "gauss(1)", "gauss(1)", "--order", "2"), 0,
     '{"result": "exp(-2*r^2) + ((-1 + 2*q^2 + 2*p^2)*exp(-2*r^2))*lam^2'
     ' + O(lam^3)"}'),
    (("normalize", "delta(0,0)"), 0, '{"normalizer": "lam"}'),
    (("normalize", "density(gauss(1))", "--order", "4"), 0,
     '{"normalizer": "1/pi*lam"}'),
    (("eigencheck", "1/2 * (q^2 + p^2)", "1/2 * lam", "density(gauss(1))",
      "--lambda", "1"), 0, '{"verdict": "pass"}'),
    (("eigencheck", "q", "1", "--kind", "classical", "--point", "1,0"), 0,
     '{"verdict": "pass"}'),
    (("eigencheck", "q", "1", "delta(1,0)", "--kind", "bullet"), 0,
     '{"verdict": "pass"}'),
    (("region", "q + I*p"), 0, '{"area": "pi*lam", "min": "-lam"}'),
    (("region", "(q - 1) + 2*I*(p + 1/2)", "--lambda", "1/3"), 0,
     '{"area": "pi*1/3", "min": "-2/3"}'),
    (("axioms", "--degree", "1", "--order", "2"), 0, '{"verdict": "pass"}'),
    # Fail verdicts exit 1.
    (("positivity", "delta(0,0)", "q + I*p"), 1,
     '{"negativity": {"lambda": "1/10", "value": "-1", "witness": "q + I*p"},'
     ' "verdict": "negative"}'),
    (("axioms", "--product", "bullet", "--order", "2", "--degree", "1"), 1,
     '{"failed_axioms": [6], "verdict": "fail"}'),
    # Engine and parse errors exit 2.
    (("star", "gauss(1)", "gauss(1)"), 2,
     '{"error": {"message": "star product does not terminate here;'
     ' pass a truncation order", "type": "TruncationRequired"}}'),
    (("star", "q +* p", "p"), 2,
     '{"error": {"expected": "an atom", "message": "at offset 3: expected an'
     ' atom, found \'*\'", "offset": 3, "type": "ParseError"}}'),
    (("star", "1/0", "p"), 2,
     '{"error": {"expected": "a nonzero denominator", "message": "at offset'
     ' 2: expected a nonzero denominator, found \'0\'", "offset": 2,'
     ' "type": "ParseError"}}'),
    (("star", "q2", "p"), 2,
     '{"error": {"message": "unknown coordinate \'q2\'",'
     ' "type": "UnknownCoordinate"}}'),
    (("integrate", "q"), 2,
     '{"error": {"message": "coefficient of lam^0 is not integrable: a'
     ' nonzero polynomial is not summable over phase space",'
     ' "type": "NotIntegrable"}}'),
    (("region", "q + I*p", "--lambda", "0"), 2,
     '{"error": {"message": "bad --lambda value: strict lambda must be'
     ' positive", "type": "EngineError"}}'),
    (("star", "q", "p", "--pairs", "0"), 2,
     '{"error": {"message": "need a positive number of canonical pairs",'
     ' "type": "EngineError"}}'),
    (("eigencheck", "q", "1", "--kind", "bullet"), 2,
     '{"error": {"message": "eigencheck needs a functional argument",'
     ' "type": "EngineError"}}'),
]


@pytest.mark.parametrize("argv,status,line", FROZEN,
                         ids=[" ".join(c[0])[:48] for c in FROZEN])
def test_frozen_output(capsys, argv, status, line):
    res, out = go(capsys, *argv)
    assert out == line + "\n"
    assert res.status == status


def test_second_pair_commutators(capsys):
    res, out = go(capsys, "commutator", "q2", "p2", "--pairs", "2")
    assert (res.status, out) == (0, '{"result": "I*lam"}\n')
    res, out = go(capsys, "commutator", "q1", "p2", "--pairs", "2")
    assert (res.status, out) == (0, '{"result": "0"}\n')


def test_output_is_deterministic(capsys):
    first = go(capsys, "star", "q^2", "p^2")[1]
    second = go(capsys, "star", "q^2", "p^2")[1]
    assert first == second


# ============================================================
# --json payloads
# ============================================================

def test_commutator_full_series_payload(capsys):
    res, out = go(capsys, "commutator", "q", "p", "--json")
    assert out == ('{"result": "I*lam", "series": {"coeffs": [[{"alpha":'
                   ' [0, 1], "terms": [{"coeff": [0, 1, 1, 1], "exps":'
                   ' [0, 0]}]}]], "tail": "exact", "valuation": 1}}\n')
    assert res.status == 0


def test_region_full_payload(capsys):
    res, out = go(capsys, "region", "q + I*p", "--json")
    assert out == ('{"area": "pi*lam", "center": ["0", "0"], "min": "-lam",'
                   ' "semi_axes_squared": ["lam", "lam"], "verified":'
                   ' true}\n')
    assert res.status == 0


def test_trace_json_degrades_for_pi_valued_scalars(capsys):
    # Traces carry pi coefficients, which have no exact-complex wire form;
    # the payload keeps its shape and reports the series slot as null.
    res, out = go(capsys, "trace", "gauss(1)", "--json")
    assert json.loads(out) == {"result": "pi*lam^-1", "series": None}
    assert res.status == 0


def test_axioms_full_report(capsys):
    res, out = go(capsys, "axioms", "--degree", "1", "--order", "2", "--json")
    payload = json.loads(out)
    assert payload["passed"] is True
    assert [e["axiom"] for e in payload["axioms"]] == list(range(1, 10))
    assert all(e["verdict"] in ("pass", "by_construction")
               for e in payload["axioms"])
    assert res.status == 0


def test_eigencheck_classical_full_report(capsys):
    res, out = go(capsys, "eigencheck", "q", "1", "--kind", "classical",
                  "--point", "1,0", "--json")
    assert out == ('{"commutation_residuals": [], "first_failure": null,'
                   ' "kind": "classical", "order": null, "residuals":'
                   ' [{"residual": "0", "witness": "1"}], "test_degree": 0,'
                   ' "verdict": "pass"}\n')
    assert res.status == 0


# ============================================================
# Process-level entry points
# ============================================================

def _run_proc(argv):
    return subprocess.run(argv, capture_output=True, text=True, timeout=60)


def test_module_entry_point():
    proc = _run_proc([sys.executable, "-m", "starforge",
                      "commutator", "q", "p"])
    assert proc.returncode == 0
    assert proc.stdout == '{"result": "I*lam"}\n'


def test_console_script():
    exe = shutil.which("starforge")
    assert exe, "console script should be installed with the package"
    proc = _run_proc([exe, "positivity", "delta(0,0)", "q + I*p"])
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["verdict"] == "negative"


def test_exit_codes_cover_the_contract():
    # 0 = success / pass verdict, 1 = fail verdict, 2 = error.
    by_status = {0: ["star", "q", "p"],
                 1: ["axioms", "--product", "bullet",
                     "--order", "1", "--degree", "1"],
                 2: ["star", "q +* p", "p"]}
    for want, argv in by_status.items():
        proc = _run_proc([sys.executable, "-m", "starforge"] + argv)
        assert proc.returncode == want, (argv, proc.stdout, proc.stderr)
