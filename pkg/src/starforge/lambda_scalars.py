"""Exact arithmetic in the scalar field of formal Laurent series in lam.

A scalar is sum_{z >= v} c_z * lam^z with complex-rational coefficients,
finitely many negative powers, and a tail marker recording whether the stored
coefficients are the whole series (tail None, "exact") or only correct through
lam^N (tail N, "truncated").  Everything here is immutable and pure; no
floating point anywhere.
"""

from fractions import Fraction

_INF = float("inf")


class EngineError(Exception):
    """Common base for engine-level failures (CLI maps these to exit 2)."""


class ZeroNotInvertible(EngineError, ZeroDivisionError):
    pass


class FormalModeError(EngineError):
    """Raised when an operation needs a concrete lambda but got formal mode."""


class TruncatedTailError(EngineError):
    """Raised when an operation refuses to drop unknown tail coefficients."""


# ============================================================
# Complex rationals
# ============================================================

def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError("expected an exact rational, got %r" % (x,))


class ExactComplex(object):
    """A Gaussian rational re + im*I with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def is_zero(self):
        return not self

    def is_real(self):
        return self.im == 0

    def conj(self):
        return ExactComplex(self.re, -self.im)

    def reciprocal(self):
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex(self.re / d, -self.im / d)

    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactComplex):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactComplex(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

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

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("integer power >= 0 expected")
        out, base = EC_ONE, self
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
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        # canonical flat form; callers parenthesise when embedding in products
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "I"
            if self.im == -1:
                return "-I"
            return "%s*I" % self.im
        im = "I" if self.im == 1 else ("-I" if self.im == -1 else "%s*I" % self.im)
        if self.im > 0 or im.startswith("-"):
            return "%s%s%s" % (self.re, "" if im.startswith("-") else "+", im)
        return "%s+%s" % (self.re, im)

    def __repr__(self):
        return "ExactComplex(%s)" % self

    def to_json(self):
        return [self.re.numerator, self.re.denominator,
                self.im.numerator, self.im.denominator]

    @staticmethod
    def from_json(data):
        rn, rd, im_n, im_d = data
        return ExactComplex(Fraction(rn, rd), Fraction(im_n, im_d))


EC_ZERO = ExactComplex(0)
EC_ONE = ExactComplex(1)
EC_I = ExactComplex(0, 1)


def as_coeff(c):
    """Coerce ints/Fractions to ExactComplex; pass richer coefficient algebras through."""
    if isinstance(c, (int, Fraction)):
        return ExactComplex(c)
    return c


# ============================================================
# Tail markers
# ============================================================
# tail None  -> exact (all unstored coefficients are zero)
# tail N int -> coefficients are only known through lam^N

def tail_depth(tail):
    return _INF if tail is None else tail


def tail_min(t1, t2):
    d = min(tail_depth(t1), tail_depth(t2))
    return None if d == _INF else int(d)


def mul_tail(a_val, a_tail, b_val, b_tail):
    # a known through Na, b exact from b_val up: product known through Na + b_val
    d = min(tail_depth(a_tail) + b_val, tail_depth(b_tail) + a_val)
    return None if d == _INF else int(d)


# ============================================================
# Formal Laurent scalars
# ============================================================

class FormalScalar(object):
    """Formal Laurent series in lam with a finite principal part.

    coeffs[i] is the coefficient of lam^(valuation + i).  A series known to
    vanish through lam^N but with unknown tail is stored as coeffs=(),
    valuation=N+1, tail=N.
    """

    __slots__ = ("valuation", "coeffs", "tail")

    def __init__(self, valuation, coeffs, tail=None):
        if not isinstance(valuation, int):
            raise ValueError("valuation must be a finite integer")
        coeffs = [as_coeff(c) for c in coeffs]
        while coeffs and not coeffs[0]:
            coeffs.pop(0)
            valuation += 1
        if tail is None:
            while coeffs and not coeffs[-1]:
                coeffs.pop()
            if not coeffs:
                valuation = 0
        else:
            tail = int(tail)
            # canonical truncated form stores exactly the powers valuation..tail
            keep = tail - valuation + 1
            if keep < 0:
                coeffs = []
            else:
                del coeffs[keep:]
                zero = EC_ZERO
                coeffs.extend([zero] * (keep - len(coeffs)))
            while coeffs and not coeffs[0]:
                coeffs.pop(0)
                valuation += 1
            if not coeffs:
                valuation = tail + 1
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("FormalScalar is immutable")

    # ---- constructors ----

    @staticmethod
    def zero():
        return FormalScalar(0, ())

    @staticmethod
    def one():
        return FormalScalar(0, (EC_ONE,))

    @staticmethod
    def from_const(c):
        return FormalScalar(0, (as_coeff(c),))

    @staticmethod
    def lam(power=1, coeff=1):
        return FormalScalar(power, (as_coeff(coeff),))

    @staticmethod
    def from_coeff_map(mapping, tail=None):
        if not mapping:
            return FormalScalar(0, (), tail) if tail is not None else FormalScalar.zero()
        lo = min(mapping)
        hi = max(mapping)
        return FormalScalar(lo, [mapping.get(z, 0) for z in range(lo, hi + 1)], tail)

    # ---- basic queries ----

    def is_zero(self):
        # zero as far as this representation knows
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def end(self):
        # highest stored power
        return self.valuation + len(self.coeffs) - 1

    def coefficient(self, z):
        """Coefficient of lam^z, or None when z lies beyond the known tail."""
        if self.tail is not None and z > self.tail:
            return None
        if self.valuation <= z <= self.end():
            return self.coeffs[z - self.valuation]
        return EC_ZERO

    def known_through(self):
        return tail_depth(self.tail)

    # ---- arithmetic ----

    def __add__(self, other):
        if not isinstance(other, FormalScalar):
            return NotImplemented
        return scalar_add(self, other)

    def __sub__(self, other):
        if not isinstance(other, FormalScalar):
            return NotImplemented
        return scalar_add(self, -other)

    def __neg__(self):
        return FormalScalar(self.valuation, [-c for c in self.coeffs], self.tail)

    def __mul__(self, other):
        if not isinstance(other, FormalScalar):
            return NotImplemented
        return scalar_mul(self, other)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("integer power expected")
        if k < 0:
            return scalar_invert(self ** (-k), 0)  # monomials only in practice
        out, base = FormalScalar.one(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c):
        c = as_coeff(c)
        if not c:
            return FormalScalar(0, (), self.tail) if self.tail is not None else FormalScalar.zero()
        return FormalScalar(self.valuation, [c * x for x in self.coeffs], self.tail)

    def shift(self, k):
        """Multiply by lam^k."""
        t = None if self.tail is None else self.tail + k
        return FormalScalar(self.valuation + k, self.coeffs, t)

    def conj(self):
        return scalar_conj(self)

    def truncate(self, order):
        """Forget everything above lam^order."""
        t = tail_min(self.tail, order)
        return FormalScalar(self.valuation, self.coeffs, t)

    # ---- comparison ----

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ExactComplex)):
            other = FormalScalar.from_const(other)
        if not isinstance(other, FormalScalar):
            return NotImplemented
        return agree(self, other)

    def __hash__(self):
        return hash((self.valuation, self.coeffs, self.tail))

    def __str__(self):
        return render_scalar(self)

    def __repr__(self):
        return "FormalScalar(%s)" % render_scalar(self)


def scalar_add(a, b):
    """Coefficientwise sum; the weaker tail marker wins."""
    t = tail_min(a.tail, b.tail)
    if not a.coeffs and not b.coeffs:
        return FormalScalar(0 if t is None else t + 1, (), t)
    lo = min(a.valuation, b.valuation)
    hi = max(a.end(), b.end())
    if t is not None:
        hi = min(hi, t)
    out = []
    for z in range(lo, hi + 1):
        ca = a.coefficient(z)
        cb = b.coefficient(z)
        out.append((EC_ZERO if ca is None else ca) + (EC_ZERO if cb is None else cb))
    return FormalScalar(lo, out, t)


def scalar_mul(a, b):
    """Cauchy product; truncation bounds shift by the partner's valuation."""
    if (not a.coeffs and a.tail is None) or (not b.coeffs and b.tail is None):
        return FormalScalar.zero()
    t = mul_tail(a.valuation, a.tail, b.valuation, b.tail)
    if not a.coeffs or not b.coeffs:
        return FormalScalar(0 if t is None else t + 1, (), t)
    lo = a.valuation + b.valuation
    hi = a.end() + b.end()
    if t is not None:
        hi = min(hi, t)
    out = [EC_ZERO] * (hi - lo + 1)
    for i, ca in enumerate(a.coeffs):
        if not ca:
            continue
        for j, cb in enumerate(b.coeffs):
            z = lo + i + j
            if z > hi:
                break
            if cb:
                out[z - lo] = out[z - lo] + ca * cb
    return FormalScalar(lo, out, t)


def scalar_conj(a):
    """Coefficientwise complex conjugate (lam itself is real)."""
    return FormalScalar(a.valuation, [c.conj() for c in a.coeffs], a.tail)


def _reciprocal(c):
    rec = getattr(c, "reciprocal", None)
    if rec is not None:
        return rec()
    return 1 / c


def scalar_invert(a, order):
    """Multiplicative inverse, correct so that a * invert(a, order) = 1 through lam^order.

    Monomials invert exactly; everything else gets a truncation tag.  The
    recurrence solves sum_{j<=m} c_j b_{m-j} = [m == 0] coefficient by
    coefficient.
    """
    if not a.coeffs:
        raise ZeroNotInvertible("cannot invert a scalar with no known nonzero coefficient")
    if not isinstance(order, int) or order < 0:
        raise ValueError("truncation order must be a nonnegative integer")
    v = a.valuation
    if len(a.coeffs) == 1 and a.tail is None:
        return FormalScalar(-v, (_reciprocal(a.coeffs[0]),))
    # coefficients of a relative to lam^v, known through index j_max
    j_max = len(a.coeffs) - 1 if a.tail is None else a.tail - v
    m_max = min(order, j_max) if a.tail is not None else order
    inv0 = _reciprocal(a.coeffs[0])
    bs = [inv0]
    for m in range(1, m_max + 1):
        acc = None
        for j in range(1, m + 1):
            cj = a.coeffs[j] if j < len(a.coeffs) else EC_ZERO
            if not cj:
                continue
            term = cj * bs[m - j]
            acc = term if acc is None else acc + term
        bs.append(EC_ZERO if acc is None else -(inv0 * acc))
    return FormalScalar(-v, bs, m_max - v)


def scalar_eval(a, binding):
    """Substitute the strict rational lambda into an exact-tailed scalar."""
    if not binding.is_strict:
        raise FormalModeError("evaluation requires a strict lambda binding")
    if a.tail is not None:
        raise TruncatedTailError("refusing to evaluate a series with unknown tail coefficients")
    v = binding.value
    total = EC_ZERO
    for i, c in enumerate(a.coeffs):
        total = total + c * (v ** (a.valuation + i))
    return total


class LambdaBinding(object):
    """Formal mode (lam stays a symbol) or strict mode (lam = positive rational)."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        if value is not None:
            value = _frac(value)
            if value <= 0:
                raise ValueError("strict lambda must be positive")
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("LambdaBinding is immutable")

    @property
    def is_strict(self):
        return self.value is not None

    @staticmethod
    def formal():
        return FORMAL

    @staticmethod
    def strict(value):
        return LambdaBinding(value)

    def __eq__(self, other):
        return isinstance(other, LambdaBinding) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return "LambdaBinding(formal)" if self.value is None else "LambdaBinding(lam=%s)" % self.value


FORMAL = LambdaBinding(None)


# ============================================================
# Comparison and convergence
# ============================================================

def agreement_depth(a, b):
    """Highest power through which the two series can be compared (inf if both exact)."""
    return min(a.known_through(), b.known_through())


def agree(a, b):
    """Mathematical equality as far as both tails allow."""
    d = agreement_depth(a, b)
    if d == _INF:
        return a.valuation == b.valuation and a.coeffs == b.coeffs if (a.coeffs or b.coeffs) \
            else True
    lo = min(a.valuation, b.valuation)
    for z in range(lo, int(d) + 1):
        ca = a.coefficient(z)
        cb = b.coefficient(z)
        if ca is None or cb is None:
            continue
        if ca != cb:
            return False
    return True


def converges_per_power(family, limit, powers):
    """Per-power stabilisation of a scalar sequence against its limit.

    Returns (verdict, {power: first index from which the coefficient equals
    the limit's, or None if it never stabilises within the family}).  This is
    the coefficientwise convergence criterion for scalar sequences, checked on
    a finite prefix of the family.
    """
    table = {}
    for z in powers:
        target = limit.coefficient(z)
        stable = None
        for idx, s in enumerate(family):
            if s.coefficient(z) == target:
                if stable is None:
                    stable = idx
            else:
                stable = None
        table[z] = stable
    return all(v is not None for v in table.values()), table


# ============================================================
# Rendering and JSON
# ============================================================

def _coeff_str(c):
    s = str(c)
    return "(%s)" % s if ("+" in s[1:] or "-" in s[1:]) else s


def render_scalar(a):
    """Canonical string, lam-powers ascending."""
    if not a.coeffs:
        if a.tail is None:
            return "0"
        return "0 + O(lam^%d)" % (a.tail + 1)
    parts = []
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        z = a.valuation + i
        if z == 0:
            piece = _coeff_str(c)
        else:
            lam = "lam" if z == 1 else "lam^%d" % z
            if c == EC_ONE:
                piece = lam
            elif c == -EC_ONE:
                piece = "-" + lam
            else:
                piece = "%s*%s" % (_coeff_str(c), lam)
        parts.append(piece)
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    if a.tail is not None:
        out += " + O(lam^%d)" % (a.tail + 1)
    return out


def scalar_to_json(a):
    """The complex-rational wire format; richer coefficient algebras do not fit here."""
    coeffs = []
    for c in a.coeffs:
        if not isinstance(c, ExactComplex):
            raise ValueError("only complex-rational scalars serialise to this schema")
        coeffs.append(c.to_json())
    return {
        "valuation": a.valuation if a.coeffs else (0 if a.tail is None else a.valuation),
        "coeffs": coeffs,
        "tail": "exact" if a.tail is None else {"truncated_at": a.tail},
    }


def scalar_from_json(data):
    tail = data["tail"]
    tail = None if tail == "exact" else int(tail["truncated_at"])
    return FormalScalar(int(data["valuation"]),
                        [ExactComplex.from_json(c) for c in data["coeffs"]],
                        tail)
