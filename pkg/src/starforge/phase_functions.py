"""Smooth functions on flat phase space that the engine can compute with exactly.

The working class is P(q,p) * exp(-alpha*(q1^2+p1^2+...+qn^2+pn^2)) with P a
polynomial over complex rationals and alpha a nonnegative rational.  It is
closed under sums (equal alpha), products (alphas add), partial derivatives,
conjugation, and has closed-form Gaussian moment integrals, which keeps every
downstream identity machine-checkable.

Integration values live in PiRational (a single c*pi^k term) and, where
division is unavoidable, in PiScalar: the field of rational functions in pi
over the Gaussian rationals, with sign decisions made through refinable
rational bounds on pi.
"""

from fractions import Fraction

from mpmath import libmp

from .lambda_scalars import (EngineError, ExactComplex, EC_ZERO, EC_ONE,
                             as_coeff, _frac)


class AlphaMismatch(EngineError):
    pass


class NotIntegrable(EngineError):
    pass


class UnknownCoordinate(EngineError, KeyError):
    __str__ = Exception.__str__  # KeyError's repr-style message reads badly


class DimensionMismatch(EngineError):
    pass


# ============================================================
# Phase context
# ============================================================

class PhaseContext(object):
    """n canonical pairs; coordinates ordered q1..qn, p1..pn."""

    __slots__ = ("n", "names", "_index")

    def __init__(self, n=1):
        if not isinstance(n, int) or n < 1:
            raise ValueError("need a positive number of canonical pairs")
        if n == 1:
            names = ("q", "p")
            index = {"q": 0, "p": 1, "q1": 0, "p1": 1}
        else:
            names = tuple("q%d" % (i + 1) for i in range(n)) + \
                    tuple("p%d" % (i + 1) for i in range(n))
            index = {name: i for i, name in enumerate(names)}
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("PhaseContext is immutable")

    @property
    def dim(self):
        return 2 * self.n

    def index(self, var):
        if isinstance(var, int):
            if 0 <= var < self.dim:
                return var
            raise UnknownCoordinate("coordinate index %d out of range" % var)
        try:
            return self._index[var]
        except KeyError:
            raise UnknownCoordinate("unknown coordinate %r" % (var,)) from None

    def __eq__(self, other):
        return isinstance(other, PhaseContext) and self.n == other.n

    def __hash__(self):
        return hash(self.n)

    def __repr__(self):
        return "PhaseContext(n=%d)" % self.n


def monomial_key(exps):
    # graded order, q-heavy monomials first inside a degree
    return (sum(exps), tuple(-e for e in exps))


# ============================================================
# pi bounds (for sign decisions only; values stay symbolic)
# ============================================================

def pi_bounds(bits):
    """Exact rational lo <= pi <= hi with roughly `bits` bits of agreement."""
    work = bits + 8
    fixed = libmp.pi_fixed(work)
    scale = 1 << work
    return Fraction(fixed - 16, scale), Fraction(fixed + 16, scale)


def _real_poly_interval(coeffs, lo, hi):
    # interval image of sum c_k x^k over [lo, hi], 0 < lo
    flo = Fraction(0)
    fhi = Fraction(0)
    plo = Fraction(1)
    phi = Fraction(1)
    for c in coeffs:
        r = c.re
        if r >= 0:
            flo += r * plo
            fhi += r * phi
        else:
            flo += r * phi
            fhi += r * plo
        plo *= lo
        phi *= hi
    return flo, fhi


def _poly_sign_at_pi(coeffs, max_bits=4096):
    if not coeffs:
        return 0
    bits = 32
    while bits <= max_bits:
        lo, hi = pi_bounds(bits)
        flo, fhi = _real_poly_interval(coeffs, lo, hi)
        if flo > 0:
            return 1
        if fhi < 0:
            return -1
        bits *= 2
    raise ArithmeticError("could not separate polynomial value at pi from zero")


# ============================================================
# PiRational: one term c * pi^k
# ============================================================

class PiRational(object):
    __slots__ = ("coeff", "pi_power")

    def __init__(self, coeff, pi_power=0):
        coeff = as_coeff(coeff)
        if not isinstance(coeff, ExactComplex):
            raise TypeError("PiRational coefficient must be complex-rational")
        pi_power = int(pi_power)
        if pi_power < 0:
            raise ValueError("pi_power must be nonnegative")
        if not coeff:
            pi_power = 0
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "pi_power", pi_power)

    def __setattr__(self, name, value):
        raise AttributeError("PiRational is immutable")

    def __bool__(self):
        return bool(self.coeff)

    def is_zero(self):
        return not self

    def is_real(self):
        return self.coeff.is_real()

    def conj(self):
        return PiRational(self.coeff.conj(), self.pi_power)

    def promote(self):
        num = [EC_ZERO] * self.pi_power + [self.coeff] if self.coeff else []
        return PiScalar(tuple(num), (EC_ONE,))

    def reciprocal(self):
        return self.promote().reciprocal()

    @staticmethod
    def _coerce(other):
        if isinstance(other, PiRational):
            return other
        if isinstance(other, (int, Fraction, ExactComplex)):
            return PiRational(as_coeff(other), 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self:
            return o
        if not o:
            return self
        if self.pi_power == o.pi_power:
            return PiRational(self.coeff + o.coeff, self.pi_power)
        return self.promote() + o.promote()

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return PiRational(-self.coeff, self.pi_power)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PiRational(self.coeff * o.coeff, self.pi_power + o.pi_power if self.coeff and o.coeff else 0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, ExactComplex)):
            return PiRational(self.coeff / as_coeff(other), self.pi_power)
        if isinstance(other, PiRational):
            return self.promote() / other.promote()
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, PiScalar):
            return self.promote() == other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self and not o:
            return True
        return self.coeff == o.coeff and self.pi_power == o.pi_power

    def __hash__(self):
        if not self:
            return hash(EC_ZERO)
        return hash((self.coeff, self.pi_power))

    def __str__(self):
        if not self:
            return "0"
        if self.pi_power == 0:
            return str(self.coeff)
        pi = "pi" if self.pi_power == 1 else "pi^%d" % self.pi_power
        if self.coeff == EC_ONE:
            return pi
        if self.coeff == -EC_ONE:
            return "-" + pi
        s = str(self.coeff)
        if "+" in s[1:] or "-" in s[1:]:
            s = "(%s)" % s
        return "%s*%s" % (s, pi)

    def __repr__(self):
        return "PiRational(%s)" % self

    def to_json(self):
        return {"coeff": self.coeff.to_json(), "pi_power": self.pi_power}


# ============================================================
# PiScalar: rational functions in pi
# ============================================================

def _pstrip(cs):
    cs = list(cs)
    while cs and not cs[-1]:
        cs.pop()
    return tuple(cs)


def _padd(a, b):
    out = [EC_ZERO] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = out[i] + c
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return _pstrip(out)


def _pneg(a):
    return tuple(-c for c in a)


def _pmul(a, b):
    if not a or not b:
        return ()
    out = [EC_ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j, cb in enumerate(b):
            if cb:
                out[i + j] = out[i + j] + ca * cb
    return _pstrip(out)


def _pdivmod(a, b):
    # coefficients form a field, so plain long division works
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quo = [EC_ZERO] * max(0, len(a) - len(b) + 1)
    inv = b[-1].reciprocal()
    for shift in range(len(a) - len(b), -1, -1):
        c = rem[shift + len(b) - 1] * inv
        if c:
            quo[shift] = c
            for j, bc in enumerate(b):
                rem[shift + j] = rem[shift + j] - c * bc
    return _pstrip(quo), _pstrip(rem)


def _pmonic(a):
    if not a:
        return a
    lc = a[-1]
    if lc == EC_ONE:
        return a
    inv = lc.reciprocal()
    return tuple(c * inv for c in a)


def _pgcd(a, b):
    a, b = _pstrip(a), _pstrip(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return _pmonic(a)


class PiScalar(object):
    """Element of the field of rational functions in pi, kept in lowest terms."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(EC_ONE,)):
        num = _pstrip(as_coeff(c) for c in num)
        den = _pstrip(as_coeff(c) for c in den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            den = (EC_ONE,)
        else:
            g = _pgcd(num, den)
            if len(g) > 1 or g[0] != EC_ONE:
                num, _ = _pdivmod(num, g)
                den, _ = _pdivmod(den, g)
            lc = den[-1]
            if lc != EC_ONE:
                inv = lc.reciprocal()
                num = tuple(c * inv for c in num)
                den = tuple(c * inv for c in den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("PiScalar is immutable")

    @staticmethod
    def const(c):
        return PiScalar((as_coeff(c),))

    @staticmethod
    def pi(power=1):
        return PiScalar(tuple([EC_ZERO] * power + [EC_ONE]))

    @staticmethod
    def _coerce(other):
        if isinstance(other, PiScalar):
            return other
        if isinstance(other, PiRational):
            return other.promote()
        if isinstance(other, (int, Fraction, ExactComplex)):
            return PiScalar.const(other)
        return None

    def __bool__(self):
        return bool(self.num)

    def is_zero(self):
        return not self

    def is_constant(self):
        return len(self.num) <= 1 and self.den == (EC_ONE,)

    def as_exact_complex(self):
        if not self.is_constant():
            raise ValueError("not a pi-free constant: %s" % self)
        return self.num[0] if self.num else EC_ZERO

    def conj(self):
        return PiScalar(tuple(c.conj() for c in self.num),
                        tuple(c.conj() for c in self.den))

    def is_real(self):
        return self == self.conj()

    def reciprocal(self):
        if not self.num:
            raise ZeroDivisionError("division by exact zero")
        return PiScalar(self.den, self.num)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PiScalar(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)),
                        _pmul(self.den, o.den))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return PiScalar(_pneg(self.num), self.den)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PiScalar(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("integer power expected")
        if k < 0:
            return self.reciprocal() ** (-k)
        out = PiScalar.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def sign(self, max_bits=4096):
        """Sign of a real value; decided through rational pi intervals."""
        if not self.is_real():
            raise ValueError("sign of a non-real value")
        if not self.num:
            return 0
        return _poly_sign_at_pi(self.num, max_bits) * _poly_sign_at_pi(self.den, max_bits)

    def _poly_str(self, coeffs):
        parts = []
        for k, c in enumerate(coeffs):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
                continue
            pi = "pi" if k == 1 else "pi^%d" % k
            if c == EC_ONE:
                parts.append(pi)
            elif c == -EC_ONE:
                parts.append("-" + pi)
            else:
                s = str(c)
                if "+" in s[1:] or "-" in s[1:]:
                    s = "(%s)" % s
                parts.append("%s*%s" % (s, pi))
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        return out

    def __str__(self):
        num = self._poly_str(self.num)
        if self.den == (EC_ONE,):
            return num
        den = self._poly_str(self.den)
        if " " in num or "*" in num:
            num = "(%s)" % num
        if " " in den or "*" in den:
            den = "(%s)" % den
        return "%s/%s" % (num, den)

    def __repr__(self):
        return "PiScalar(%s)" % self

    def to_json(self):
        return {"num": [c.to_json() for c in self.num],
                "den": [c.to_json() for c in self.den]}


def coeff_sign(value, max_bits=4096):
    """Sign of a real ExactComplex / PiRational / PiScalar."""
    if isinstance(value, (int, Fraction)):
        return (value > 0) - (value < 0)
    if isinstance(value, ExactComplex):
        if not value.is_real():
            raise ValueError("sign of a non-real value")
        return (value.re > 0) - (value.re < 0)
    if isinstance(value, PiRational):
        if not value.is_real():
            raise ValueError("sign of a non-real value")
        return (value.coeff.re > 0) - (value.coeff.re < 0)
    if isinstance(value, PiScalar):
        return value.sign(max_bits)
    raise TypeError("no sign for %r" % (value,))


# ============================================================
# GaussPoly
# ============================================================

def _double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


class GaussPoly(object):
    """P(q1..qn, p1..pn) * exp(-alpha * sum(qi^2 + pi^2)) with exact data.

    terms maps exponent tuples (length 2n, coordinates ordered q1..qn,p1..pn)
    to complex-rational coefficients; never mutated after construction.
    """

    __slots__ = ("ctx", "alpha", "terms")

    def __init__(self, ctx, terms, alpha=0):
        alpha = _frac(alpha)
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        clean = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != ctx.dim:
                raise DimensionMismatch("exponent tuple %r does not match 2n=%d" % (exps, ctx.dim))
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent in %r" % (exps,))
            c = as_coeff(c)
            if not isinstance(c, ExactComplex):
                raise TypeError("GaussPoly coefficients must be complex-rational")
            if c:
                prev = clean.get(exps)
                c = c if prev is None else prev + c
                if c:
                    clean[exps] = c
                elif exps in clean:
                    del clean[exps]
        if not clean:
            alpha = Fraction(0)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("GaussPoly is immutable")

    # ---- constructors ----

    @staticmethod
    def zero(ctx):
        return GaussPoly(ctx, {})

    @staticmethod
    def constant(ctx, c, alpha=0):
        return GaussPoly(ctx, {(0,) * ctx.dim: as_coeff(c)}, alpha)

    @staticmethod
    def coordinate(ctx, var):
        i = ctx.index(var)
        exps = [0] * ctx.dim
        exps[i] = 1
        return GaussPoly(ctx, {tuple(exps): EC_ONE})

    @staticmethod
    def monomial(ctx, exps, c=1, alpha=0):
        return GaussPoly(ctx, {tuple(exps): as_coeff(c)}, alpha)

    @staticmethod
    def gaussian(ctx, alpha):
        return GaussPoly(ctx, {(0,) * ctx.dim: EC_ONE}, alpha)

    # ---- queries ----

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_poly(self):
        return self.alpha == 0

    def total_degree(self):
        """Largest monomial degree, or None for the zero function."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0]))

    # ---- arithmetic ----

    def __add__(self, other):
        if not isinstance(other, GaussPoly):
            return NotImplemented
        if not self:
            return other
        if not other:
            return self
        if self.alpha != other.alpha:
            raise AlphaMismatch("cannot add Gaussian factors exp(-%s*r^2) and exp(-%s*r^2)"
                                % (self.alpha, other.alpha))
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, EC_ZERO) + c
        return GaussPoly(self.ctx, out, self.alpha)

    def __sub__(self, other):
        if not isinstance(other, GaussPoly):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return GaussPoly(self.ctx, {e: -c for e, c in self.terms.items()}, self.alpha)

    def __mul__(self, other):
        if not isinstance(other, GaussPoly):
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                acc = out.get(key, EC_ZERO) + c1 * c2
                out[key] = acc
        return GaussPoly(self.ctx, out, self.alpha + other.alpha)

    def scale(self, c):
        c = as_coeff(c)
        if not c:
            return GaussPoly.zero(self.ctx)
        return GaussPoly(self.ctx, {e: c * x for e, x in self.terms.items()}, self.alpha)

    def conj(self):
        return GaussPoly(self.ctx, {e: c.conj() for e, c in self.terms.items()}, self.alpha)

    def diff(self, var):
        return gp_diff(self, var)

    def eval(self, point):
        return gp_eval(self, point)

    def integrate(self):
        return gp_integrate(self)

    def __eq__(self, other):
        if not isinstance(other, GaussPoly):
            return NotImplemented
        return self.alpha == other.alpha and self.terms == other.terms

    def __str__(self):
        return render_gausspoly(self)

    def __repr__(self):
        return "GaussPoly(%s)" % self


def gp_arith(op, f, other=None):
    """Dispatcher: op in {add, mul, scale, conj}."""
    if op == "add":
        return f + other
    if op == "mul":
        return f * other
    if op == "scale":
        return f.scale(other)
    if op == "conj":
        return f.conj()
    raise ValueError("unknown op %r" % (op,))


def gp_diff(f, var):
    """Exact partial derivative, chain rule through the Gaussian factor."""
    i = f.ctx.index(var)
    out = {}

    def bump(exps, c):
        if c:
            out[exps] = out.get(exps, EC_ZERO) + c

    two_alpha = ExactComplex(2 * f.alpha)
    for exps, c in f.terms.items():
        if exps[i] > 0:
            lowered = list(exps)
            lowered[i] -= 1
            bump(tuple(lowered), c * exps[i])
        if f.alpha:
            raised = list(exps)
            raised[i] += 1
            bump(tuple(raised), -(two_alpha * c))
    return GaussPoly(f.ctx, out, f.alpha)


def gp_eval(f, point):
    """Exact pair (P(point), -alpha*|point|^2); no transcendental evaluation."""
    if len(point) != f.ctx.dim:
        raise DimensionMismatch("point dimension %d, expected %d" % (len(point), f.ctx.dim))
    point = [_frac(x) for x in point]
    total = EC_ZERO
    for exps, c in f.terms.items():
        m = Fraction(1)
        for x, e in zip(point, exps):
            if e:
                m *= x ** e
        total = total + c * m
    exp_arg = -f.alpha * sum(x * x for x in point)
    return total, exp_arg


def gp_integrate(f):
    """Exact integral over the whole phase space; always rational * pi^n.

    Per coordinate: int x^(2m) e^(-a x^2) dx = (2m-1)!!/(2a)^m * sqrt(pi/a),
    odd moments vanish; the 2n sqrt factors assemble to (pi/a)^n.
    """
    if f.alpha == 0:
        if not f.terms:
            return PiRational(EC_ZERO, 0)
        raise NotIntegrable("a nonzero polynomial is not summable over phase space")
    total = EC_ZERO
    for exps, c in f.terms.items():
        if any(e % 2 for e in exps):
            continue
        factor = Fraction(1)
        for e in exps:
            m = e // 2
            if m:
                factor *= Fraction(_double_factorial(e - 1), (2 * f.alpha) ** m)
        total = total + c * factor
    if not total:
        return PiRational(EC_ZERO, 0)
    scale = Fraction(1, f.alpha ** f.ctx.n)
    return PiRational(total * scale, f.ctx.n)


def gp_poisson(f, g):
    """{f,g} = sum_i df/dqi dg/dpi - df/dpi dg/dqi, exact in the class."""
    n = f.ctx.n
    out = GaussPoly.zero(f.ctx)
    for i in range(n):
        term = gp_diff(f, i) * gp_diff(g, n + i) - (gp_diff(f, n + i) * gp_diff(g, i))
        out = term if not out else out + term
    return out


# ============================================================
# Rendering and JSON
# ============================================================

def render_monomial(ctx, exps):
    parts = []
    for i, e in enumerate(exps):
        if e == 0:
            continue
        name = ctx.names[i]
        parts.append(name if e == 1 else "%s^%d" % (name, e))
    return "*".join(parts)


def render_gausspoly(f):
    if not f.terms:
        return "0"
    parts = []
    for exps, c in f.sorted_terms():
        mono = render_monomial(f.ctx, exps)
        if not mono:
            piece = str(c)
            if "+" in piece[1:] or "-" in piece[1:]:
                piece = "(%s)" % piece
        elif c == EC_ONE:
            piece = mono
        elif c == -EC_ONE:
            piece = "-" + mono
        else:
            cs = str(c)
            if "+" in cs[1:] or "-" in cs[1:]:
                cs = "(%s)" % cs
            piece = "%s*%s" % (cs, mono)
        parts.append(piece)
    out = parts[0]
    for p in parts[1:]:
        out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
    if f.alpha:
        if len(parts) > 1 or out.startswith("-"):
            out = "(%s)" % out
        arg = "r^2" if f.alpha == 1 else "%s*r^2" % f.alpha
        out = "%s*exp(-%s)" % (out, arg) if out != "1" else "exp(-%s)" % arg
    return out


def gp_to_json(f):
    return {
        "alpha": [f.alpha.numerator, f.alpha.denominator],
        "terms": [{"exps": list(exps), "coeff": c.to_json()} for exps, c in f.sorted_terms()],
    }


def gp_from_json(ctx, data):
    alpha = Fraction(data["alpha"][0], data["alpha"][1])
    terms = {tuple(t["exps"]): ExactComplex.from_json(t["coeff"]) for t in data["terms"]}
    return GaussPoly(ctx, terms, alpha)
