"""The starforge command line.

Expressions come in as a tiny exact language (rationals, I, lam, coordinates,
gauss(alpha)); commands route them through the engine and print canonical
JSON.  Exit status: 0 for success/Pass, 1 for Fail verdicts, 2 for errors.

grammar:
    expr   := ['-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' ['-'] int)?
    atom   := rational | 'I' | 'lam' | coord | 'gauss' '(' rational ')'
            | '(' expr ')'

Functional arguments (positivity, normalize, eigencheck) extend the atoms
with delta(point...), density(expr), and wigner(level).
"""

import argparse
import json
import sys
from fractions import Fraction

from .lambda_scalars import (EngineError, ExactComplex, FormalScalar,
                             LambdaBinding, FORMAL, render_scalar,
                             scalar_to_json)
from .phase_functions import PhaseContext, GaussPoly
from .formal_series import (FormalFunction, fs_bullet, fs_integrate,
                            render_function, fs_to_json)
from .star_products import (moyal_family, bullet_family, star_mul,
                            star_commutator, star_trace, axiom_suite)
from .functionals_states import (FormalFunctional, wigner_state,
                                 positivity_check, normalize_functional,
                                 eigencheck_classical, eigencheck_bullet,
                                 eigencheck_star, negative_region)


class ParseError(EngineError):
    def __init__(self, offset, expected, found=""):
        self.offset = offset
        self.expected = expected
        self.found = found
        msg = "at offset %d: expected %s" % (offset, expected)
        if found:
            msg += ", found %r" % found
        super(ParseError, self).__init__(msg)


# ============================================================
# Tokens
# ============================================================

NUM = "NUM"
NAME = "NAME"
OP = "OP"
END = "END"

_OPS = "+-*^/(),"


class Token(object):
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return "Token(%s, %r, %d)" % (self.kind, self.text, self.pos)


def tokenize(text):
    toks = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token(NUM, text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token(NAME, text[i:j], i))
            i = j
            continue
        if ch in _OPS:
            toks.append(Token(OP, ch, i))
            i += 1
            continue
        raise ParseError(i, "a token", ch)
    toks.append(Token(END, "", n))
    return toks


# ============================================================
# Parser -> Expr (nested tuples)
# ============================================================

class Parser(object):
    """Recursive descent over the expression grammar.

    Expr nodes: ("num", Fraction), ("i",), ("lam",), ("coord", name),
    ("gauss", Fraction), ("neg", e), ("add"|"sub"|"mul", l, r),
    ("pow", e, int), and for functionals ("delta", point), ("density", e),
    ("wigner", level).
    """

    def __init__(self, text, functional=False):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.functional = functional

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, ch):
        t = self.peek()
        if t.kind != OP or t.text != ch:
            raise ParseError(t.pos, "'%s'" % ch, t.text)
        return self.next()

    def at_op(self, ch):
        t = self.peek()
        return t.kind == OP and t.text == ch

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t.kind != END:
            raise ParseError(t.pos, "end of input", t.text)
        return e

    def expr(self):
        if self.at_op("-"):
            self.next()
            e = ("neg", self.term())
        else:
            e = self.term()
        while True:
            t = self.peek()
            if t.kind == OP and t.text in "+-":
                self.next()
                rhs = self.term()
                e = ("add" if t.text == "+" else "sub", e, rhs)
            else:
                return e

    def term(self):
        e = self.factor()
        while self.at_op("*"):
            self.next()
            e = ("mul", e, self.factor())
        return e

    def factor(self):
        e = self.atom()
        if self.at_op("^"):
            self.next()
            sign = 1
            if self.at_op("-"):
                self.next()
                sign = -1
            t = self.peek()
            if t.kind != NUM:
                raise ParseError(t.pos, "an integer exponent", t.text)
            self.next()
            e = ("pow", e, sign * int(t.text))
        return e

    def rational(self):
        t = self.peek()
        neg = False
        if self.at_op("-"):
            self.next()
            neg = True
            t = self.peek()
        if t.kind != NUM:
            raise ParseError(t.pos, "a rational number", t.text)
        self.next()
        value = Fraction(int(t.text))
        if self.at_op("/"):
            self.next()
            d = self.peek()
            if d.kind != NUM or int(d.text) == 0:
                raise ParseError(d.pos, "a nonzero denominator", d.text)
            self.next()
            value = Fraction(int(t.text), int(d.text))
        return -value if neg else value

    def atom(self):
        t = self.peek()
        if t.kind == NUM:
            self.next()
            value = Fraction(int(t.text))
            if self.at_op("/"):
                self.next()
                d = self.peek()
                if d.kind != NUM or int(d.text) == 0:
                    raise ParseError(d.pos, "a nonzero denominator", d.text)
                self.next()
                value = Fraction(int(t.text), int(d.text))
            return ("num", value)
        if t.kind == NAME:
            self.next()
            if t.text == "I":
                return ("i",)
            if t.text == "lam":
                return ("lam",)
            if t.text == "gauss":
                self.expect_op("(")
                alpha = self.rational()
                self.expect_op(")")
                return ("gauss", alpha)
            if self.functional and t.text == "delta":
                self.expect_op("(")
                point = []
                if not self.at_op(")"):
                    point.append(self.rational())
                    while self.at_op(","):
                        self.next()
                        point.append(self.rational())
                self.expect_op(")")
                return ("delta", tuple(point))
            if self.functional and t.text == "density":
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return ("density", inner)
            if self.functional and t.text == "wigner":
                self.expect_op("(")
                lvl = self.peek()
                if lvl.kind != NUM:
                    raise ParseError(lvl.pos, "a level", lvl.text)
                self.next()
                self.expect_op(")")
                return ("wigner", int(lvl.text))
            return ("coord", t.text)
        if t.kind == OP and t.text == "(":
            self.next()
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(t.pos, "an atom", t.text)


def parse_expression(text, ctx=None, functional=False):
    """Text -> Expr; the context is only consulted at lowering time."""
    return Parser(text, functional).parse()


def render_expr(e):
    """Canonical text for an Expr; reparses to the identical tree."""
    kind = e[0]
    if kind == "num":
        return str(e[1])
    if kind == "i":
        return "I"
    if kind == "lam":
        return "lam"
    if kind == "coord":
        return e[1]
    if kind == "gauss":
        return "gauss(%s)" % e[1]
    if kind == "neg":
        body = render_expr(e[1])
        if e[1][0] in ("add", "sub", "neg"):
            return "-(%s)" % body
        return "-" + body
    if kind == "add":
        return "%s + %s" % (render_expr(e[1]), _wrap_chain(e[2]))
    if kind == "sub":
        return "%s - %s" % (render_expr(e[1]), _wrap_chain(e[2]))
    if kind == "mul":
        return "%s*%s" % (_wrap_chain(e[1]), _wrap_factor(e[2]))
    if kind == "pow":
        return "%s^%d" % (_wrap_pow_base(e[1]), e[2])
    if kind == "delta":
        return "delta(%s)" % ", ".join(str(x) for x in e[1])
    if kind == "density":
        return "density(%s)" % render_expr(e[1])
    if kind == "wigner":
        return "wigner(%d)" % e[1]
    raise ValueError("unknown node %r" % (kind,))


def _wrap_chain(e):
    """Parenthesize sum-level nodes so +/- chains stay left-associated."""
    if e[0] in ("add", "sub", "neg"):
        return "(%s)" % render_expr(e)
    return render_expr(e)


def _wrap_factor(e):
    """The right factor of '*' also shields nested products."""
    if e[0] in ("add", "sub", "neg", "mul"):
        return "(%s)" % render_expr(e)
    return render_expr(e)


def _wrap_pow_base(e):
    if e[0] in ("add", "sub", "neg", "mul", "pow"):
        return "(%s)" % render_expr(e)
    return render_expr(e)


# ============================================================
# Lowering
# ============================================================

def _const_fn(ctx, c, power=0):
    return FormalFunction.of(GaussPoly.constant(ctx, c), power)


def lower_expression(e, ctx):
    """Expr -> FormalFunction (pointwise semantics; lam is the grading)."""
    kind = e[0]
    if kind == "num":
        return _const_fn(ctx, e[1])
    if kind == "i":
        return _const_fn(ctx, ExactComplex(0, 1))
    if kind == "lam":
        return _const_fn(ctx, 1, power=1)
    if kind == "coord":
        return FormalFunction.of(GaussPoly.coordinate(ctx, e[1]), 0)
    if kind == "gauss":
        return FormalFunction.of(GaussPoly.gaussian(ctx, e[1]), 0)
    if kind == "neg":
        return -lower_expression(e[1], ctx)
    if kind == "add":
        return lower_expression(e[1], ctx) + lower_expression(e[2], ctx)
    if kind == "sub":
        return lower_expression(e[1], ctx) - lower_expression(e[2], ctx)
    if kind == "mul":
        return fs_bullet(lower_expression(e[1], ctx), lower_expression(e[2], ctx))
    if kind == "pow":
        base = lower_expression(e[1], ctx)
        k = e[2]
        if k >= 0:
            out = FormalFunction.one(ctx)
            for _ in range(k):
                out = fs_bullet(out, base)
            return out
        inv = _invert_monomial(base, ctx)
        if inv is None:
            raise EngineError("negative powers need an invertible lam-monomial base")
        out = FormalFunction.one(ctx)
        for _ in range(-k):
            out = fs_bullet(out, inv)
        return out
    raise EngineError("functional atoms are not allowed in a plain expression")


def _invert_monomial(F, ctx):
    # invertible means a single lam-power whose coefficient is a nonzero constant
    if F.tail is not None or len(F.coeffs) != 1:
        return None
    gs = F.coeffs[0]
    if len(gs.parts) != 1:
        return None
    part = gs.parts[0]
    if part.alpha != 0 or set(part.terms) != {(0,) * ctx.dim}:
        return None
    c = part.terms[(0,) * ctx.dim]
    return _const_fn(ctx, c.reciprocal(), power=-F.valuation)


def function_to_scalar(F):
    """FormalFunction -> FormalScalar when coordinate-free, else None."""
    vals = []
    zero_exps = (0,) * F.ctx.dim
    for gs in F.coeffs:
        if not gs.parts:
            vals.append(ExactComplex(0))
            continue
        if len(gs.parts) != 1:
            return None
        part = gs.parts[0]
        if part.alpha != 0 or set(part.terms) - {zero_exps}:
            return None
        vals.append(part.terms.get(zero_exps, ExactComplex(0)))
    return FormalScalar(F.valuation if F.coeffs else 0, vals, F.tail)


def lower_functional(e, ctx):
    """Expr -> ("functional", T) or ("function", F), with scalars folded in."""
    kind = e[0]
    if kind == "delta":
        point = e[1] if e[1] else (0,) * ctx.dim
        return ("functional", FormalFunctional.delta(ctx, point))
    if kind == "density":
        inner = lower_expression(e[1], ctx)
        if inner.tail is not None or inner.valuation != 0 or len(inner.coeffs) != 1:
            raise EngineError("density(...) takes a single lam-free profile")
        return ("functional", FormalFunctional.density(ctx, inner.coeffs[0]))
    if kind == "wigner":
        return ("functional", wigner_state(ctx, e[1]))
    if kind == "neg":
        tag, v = lower_functional(e[1], ctx)
        if tag == "functional":
            return (tag, -v)
        return (tag, -v)
    if kind in ("add", "sub"):
        t1, v1 = lower_functional(e[1], ctx)
        t2, v2 = lower_functional(e[2], ctx)
        if t1 != t2:
            raise EngineError("cannot add a functional to a plain function")
        if kind == "add":
            return (t1, v1 + v2)
        return (t1, v1 - v2)
    if kind == "mul":
        t1, v1 = lower_functional(e[1], ctx)
        t2, v2 = lower_functional(e[2], ctx)
        if t1 == t2 == "function":
            return ("function", fs_bullet(v1, v2))
        if t1 == t2:
            raise EngineError("cannot multiply two functionals here")
        func = v1 if t1 == "functional" else v2
        other = v2 if t1 == "functional" else v1
        scal = function_to_scalar(other)
        if scal is None:
            raise EngineError("functionals can only be scaled by lam-scalars here")
        return ("functional", func.scale_by_scalar(scal))
    if kind == "pow":
        tag, v = lower_functional(e[1], ctx)
        if tag == "functional":
            raise EngineError("functionals cannot be raised to powers")
        return ("function", lower_expression(e, ctx))
    return ("function", lower_expression(e, ctx))


def parse_functional(text, ctx):
    tag, v = lower_functional(parse_expression(text, ctx, functional=True), ctx)
    if tag != "functional":
        raise EngineError("expected a functional (delta/density/wigner term)")
    return v


# ============================================================
# Commands
# ============================================================

class CommandResult(object):
    __slots__ = ("command", "payload", "status")

    def __init__(self, command, payload, status):
        self.command = command
        self.payload = payload
        self.status = status

    def __repr__(self):
        return "CommandResult(%s, exit=%d)" % (self.command, self.status)


def _family(name, ctx):
    return bullet_family(ctx) if name == "bullet" else moyal_family(ctx)


def _emit(payload):
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _scalar_payload(value, full):
    if not full:
        return {"result": render_scalar(value)}
    try:
        wire = scalar_to_json(value)
    except ValueError:
        wire = None
    return {"result": render_scalar(value), "series": wire}


def _make_parser():
    top = argparse.ArgumentParser(prog="starforge",
                                  description="exact deformation-quantization toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pairs", type=int, default=1, metavar="N",
                        help="number of coordinate pairs (default 1)")
    common.add_argument("--order", type=int, default=None, metavar="K",
                        help="lam truncation order")
    common.add_argument("--lambda", dest="lam", default=None, metavar="R",
                        help="strict lambda value (exact rational)")
    common.add_argument("--product", choices=("moyal", "bullet"),
                        default="moyal", help="star family (default moyal)")
    common.add_argument("--json", dest="full", action="store_true",
                        help="emit the full report payload")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized checks (reserved)")
    sub = top.add_subparsers(dest="command", required=True)

    for name in ("star", "bullet", "commutator"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("left")
        p.add_argument("right")
    for name in ("trace", "integrate", "region"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("operand")
    p = sub.add_parser("axioms", parents=[common])
    p.add_argument("--degree", type=int, default=3,
                   help="generator degree bound (default 3)")
    p = sub.add_parser("positivity", parents=[common])
    p.add_argument("functional")
    p.add_argument("witnesses", nargs="+")
    p = sub.add_parser("normalize", parents=[common])
    p.add_argument("functional")
    p = sub.add_parser("eigencheck", parents=[common])
    p.add_argument("xi")
    p.add_argument("value")
    p.add_argument("functional", nargs="?", default=None)
    p.add_argument("--kind", choices=("classical", "bullet", "star"),
                   default="star")
    p.add_argument("--point", default=None, metavar="R,R",
                   help="evaluation point for --kind classical")
    p.add_argument("--test-degree", type=int, default=2, dest="test_degree",
                   help="witness monomial degree bound (default 2)")
    return top


def _binding(args):
    if args.lam is None:
        return FORMAL
    try:
        return LambdaBinding.strict(Fraction(args.lam))
    except (ValueError, ZeroDivisionError) as exc:
        raise EngineError("bad --lambda value: %s" % exc)


def run_command(argv):
    """Parse argv, run the engine, print one canonical JSON line."""
    args = _make_parser().parse_args(argv)
    try:
        payload, status = _dispatch(args)
    except EngineError as exc:
        payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, ParseError):
            payload["error"]["offset"] = exc.offset
            payload["error"]["expected"] = exc.expected
        _emit(payload)
        return CommandResult(args.command, payload, 2)
    _emit(payload)
    return CommandResult(args.command, payload, status)


def _dispatch(args):
    cmd = args.command
    try:
        ctx = PhaseContext(args.pairs)
    except ValueError as exc:
        raise EngineError(str(exc))
    binding = _binding(args)

    if cmd in ("star", "bullet", "commutator"):
        F = lower_expression(parse_expression(args.left, ctx), ctx)
        G = lower_expression(parse_expression(args.right, ctx), ctx)
        fam = bullet_family(ctx) if cmd == "bullet" else _family(args.product, ctx)
        if cmd == "commutator":
            out = star_commutator(fam, F, G, args.order)
        else:
            out = star_mul(fam, F, G, args.order)
        payload = {"result": render_function(out)}
        if args.full:
            payload["series"] = fs_to_json(out)
        return payload, 0

    if cmd == "trace":
        F = lower_expression(parse_expression(args.operand, ctx), ctx)
        fam = _family(args.product, ctx)
        out = star_trace(fam, F)
        return _scalar_payload(out, args.full), 0

    if cmd == "integrate":
        F = lower_expression(parse_expression(args.operand, ctx), ctx)
        out = fs_integrate(F)
        return _scalar_payload(out, args.full), 0

    if cmd == "region":
        F = lower_expression(parse_expression(args.operand, ctx), ctx)
        if F.valuation != 0 or len(F.coeffs) != 1 or len(F.coeffs[0].parts) != 1:
            raise EngineError("region expects a lam-free linear expression")
        report = negative_region(F.coeffs[0].parts[0], binding)
        if args.full:
            return report.to_json(), 0
        return {"area": report.area_str, "min": report.min_value_str}, 0

    if cmd == "axioms":
        fam = _family(args.product, ctx)
        order = args.order if args.order is not None else 4
        report = axiom_suite(fam, args.degree, order)
        status = 0 if report.passed else 1
        if args.full:
            return report.to_json(), status
        failed = sorted(k for k, e in report.entries.items()
                        if e["verdict"] == "fail")
        payload = {"verdict": "pass" if report.passed else "fail"}
        if failed:
            payload["failed_axioms"] = failed
        return payload, status

    if cmd == "positivity":
        fam = _family(args.product, ctx)
        T = parse_functional(args.functional, ctx)
        wits = [lower_expression(parse_expression(w, ctx), ctx)
                for w in args.witnesses]
        samples = (Fraction(args.lam),) if args.lam is not None else None
        if samples is None:
            report = positivity_check(fam, T, wits, order=args.order)
        else:
            report = positivity_check(fam, T, wits, order=args.order,
                                      lambda_samples=samples)
        status = 0 if report.verdict != "negative" else 1
        if args.full:
            return report.to_json(), status
        payload = {"verdict": report.verdict}
        if report.negativity:
            payload["negativity"] = report.negativity
        return payload, status

    if cmd == "normalize":
        fam = _family(args.product, ctx)
        T = parse_functional(args.functional, ctx)
        order = args.order if args.order is not None else 6
        A, T2 = normalize_functional(fam, T, order)
        if args.full:
            return {"normalizer": render_scalar(A),
                    "functional": T2.to_json()}, 0
        return {"normalizer": render_scalar(A)}, 0

    if cmd == "eigencheck":
        fam = _family(args.product, ctx)
        xi = lower_expression(parse_expression(args.xi, ctx), ctx)
        a_fn = lower_expression(parse_expression(args.value, ctx), ctx)
        a = function_to_scalar(a_fn)
        if a is None:
            raise EngineError("the genvalue must be a lam-scalar expression")
        if args.kind == "classical":
            if args.point is None:
                raise EngineError("--kind classical needs --point r,r")
            try:
                point = tuple(Fraction(x) for x in args.point.split(","))
            except (ValueError, ZeroDivisionError) as exc:
                raise EngineError("bad --point value: %s" % exc)
            if xi.valuation != 0 or len(xi.coeffs) != 1:
                raise EngineError("classical checks take a lam-free expression")
            const = a.coefficient(0)
            if a.coeffs and (a.valuation != 0 or len(a.coeffs) != 1):
                raise EngineError("classical genvalues are plain rationals")
            report = eigencheck_classical(xi.coeffs[0], const, point)
        else:
            if args.functional is None:
                raise EngineError("eigencheck needs a functional argument")
            T = parse_functional(args.functional, ctx)
            if args.kind == "bullet":
                report = eigencheck_bullet(xi, a, T, args.test_degree)
            else:
                report = eigencheck_star(fam, xi, a, T, args.test_degree,
                                         order=args.order, binding=binding)
        status = 0 if report.passed else 1
        if args.full:
            return report.to_json(), status
        payload = {"verdict": report.verdict}
        if report.first_failure:
            payload["first_failure"] = report.first_failure
        return payload, status

    raise EngineError("unknown command %r" % cmd)


def main():
    result = run_command(sys.argv[1:])
    sys.exit(result.status)


if __name__ == "__main__":
    main()
