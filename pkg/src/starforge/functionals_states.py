"""Functionals on phase space and the state calculus built from them.

A functional is a formal Laurent series whose coefficients are finite lists of
elementary terms: point evaluations with derivatives, and integrals against a
Gaussian density.  Pairings come in two flavours: the plain one <T, f>, and the
star pairing <T, f>_* that routes the argument through a product family and its
trace density.  On top of the pairings sit the checks: reality, positivity on
witness sets, normalization, and the three classical/bullet/star genvalue
tests, all exact.
"""

from fractions import Fraction
from math import comb

from .lambda_scalars import (EngineError, FormalModeError, ZeroNotInvertible,
                             ExactComplex, EC_ZERO, EC_ONE, as_coeff,
                             FormalScalar, FORMAL,
                             tail_min, mul_tail, scalar_invert, scalar_eval,
                             render_scalar)
from .phase_functions import (GaussPoly, coeff_sign,
                              DimensionMismatch, render_gausspoly)
from .formal_series import GaussSum, FormalFunction, fs_bullet, fs_diff, render_function
from .star_products import star_mul, star_commutator, TruncationRequired, UNBOUNDED


class NotNormalizable(EngineError):
    """The functional pairs to zero against the constant function."""


class NotSupportedForm(EngineError):
    """The requested operation leaves the decidable fragment."""


class InfinitePrincipalPart(EngineError):
    """Functionals must have finitely many negative lambda powers."""


def _conj_weight(w):
    return w.conj() if hasattr(w, "conj") else w


def _is_zero_weight(w):
    return w == 0


def _point_key(point):
    return tuple(point)


# ============================================================
# Elementary terms
# ============================================================

class PointDeriv(object):
    """weight * (-1)^|index| * (d^index f)(point)."""

    __slots__ = ("ctx", "point", "index", "weight")

    def __init__(self, ctx, point, index=None, weight=EC_ONE):
        point = tuple(Fraction(x) for x in point)
        if len(point) != ctx.dim:
            raise DimensionMismatch("point has %d entries, phase space needs %d"
                                    % (len(point), ctx.dim))
        if index is None:
            index = (0,) * ctx.dim
        index = tuple(int(e) for e in index)
        if len(index) != ctx.dim or any(e < 0 for e in index):
            raise ValueError("derivative index must be %d nonnegative ints" % ctx.dim)
        if isinstance(weight, (int, Fraction)):
            weight = as_coeff(weight)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "weight", weight)

    def __setattr__(self, name, value):
        raise AttributeError("PointDeriv is immutable")

    def act(self, gs):
        """Pair with one GaussSum coefficient."""
        out = gs
        for i, e in enumerate(self.index):
            for _ in range(e):
                out = out.diff(i)
        total = EC_ZERO
        for value, exp_arg in out.eval_pairs(self.point):
            if exp_arg != 0:
                if not value.is_zero():
                    raise NotSupportedForm(
                        "point evaluation would produce %s * exp(%s); only "
                        "vanishing Gaussian arguments are supported"
                        % (value, exp_arg))
                continue
            total = total + value
        if sum(self.index) % 2:
            total = -total
        return self.weight * total

    def rescale(self, c):
        return PointDeriv(self.ctx, self.point, self.index, self.weight * c)

    def conj(self):
        return PointDeriv(self.ctx, self.point, self.index, _conj_weight(self.weight))

    def same_shape(self, other):
        return (isinstance(other, PointDeriv) and other.point == self.point
                and other.index == self.index)

    def combine(self, other):
        return PointDeriv(self.ctx, self.point, self.index,
                          self.weight + other.weight)

    def sort_key(self):
        return (0, self.point, self.index, "")

    def __eq__(self, other):
        if not isinstance(other, PointDeriv):
            return NotImplemented
        return (self.point == other.point and self.index == other.index
                and self.weight == other.weight)

    def __hash__(self):
        return hash(("PointDeriv", self.point, self.index, str(self.weight)))

    def __str__(self):
        name = "delta(%s)" % ", ".join(str(x) for x in self.point)
        if any(self.index):
            name = "d^%s %s" % (list(self.index), name)
        if self.weight == EC_ONE:
            return name
        return "(%s) * %s" % (self.weight, name)

    def to_json(self):
        return {
            "kind": "point_deriv",
            "point": [[x.numerator, x.denominator] for x in self.point],
            "index": list(self.index),
            "weight": _weight_json(self.weight),
        }


class Density(object):
    """weight * integral of g * f.

    width_lambda marks an extra lam^(-1)-sized Gaussian width: the effective
    exponent is alpha + width_lambda / lam, which only becomes a number once a
    strict lambda is bound.  Formal-mode pairings refuse such terms.
    """

    __slots__ = ("ctx", "g", "weight", "width_lambda")

    def __init__(self, ctx, g, weight=EC_ONE, width_lambda=0):
        if isinstance(g, GaussPoly):
            g = GaussSum.of(g)
        if not isinstance(g, GaussSum):
            raise TypeError("density profile must be a Gaussian-polynomial function")
        if isinstance(weight, (int, Fraction)):
            weight = as_coeff(weight)
        width_lambda = Fraction(width_lambda)
        if width_lambda < 0:
            raise ValueError("width_lambda must be nonnegative")
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "width_lambda", width_lambda)

    def __setattr__(self, name, value):
        raise AttributeError("Density is immutable")

    def act(self, gs):
        if self.width_lambda != 0:
            raise FormalModeError(
                "density carries a lam-dependent width; bind a strict lambda first")
        return self.weight * (self.g * gs).integrate()

    def rescale(self, c):
        return Density(self.ctx, self.g, self.weight * c, self.width_lambda)

    def conj(self):
        return Density(self.ctx, self.g.conj(), _conj_weight(self.weight),
                       self.width_lambda)

    def bind(self, binding):
        """Resolve the lam-width against a strict binding."""
        if self.width_lambda == 0:
            return self
        shift = self.width_lambda / binding.value
        moved = [GaussPoly(self.ctx, poly.terms, poly.alpha + shift)
                 for poly in self.g.parts]
        return Density(self.ctx, GaussSum(self.ctx, moved), self.weight, 0)

    def same_shape(self, other):
        return (isinstance(other, Density) and other.width_lambda == self.width_lambda
                and other.g == self.g)

    def combine(self, other):
        return Density(self.ctx, self.g, self.weight + other.weight,
                       self.width_lambda)

    def sort_key(self):
        return (1, (), (), "%s|%s" % (self.width_lambda, self.g))

    def __eq__(self, other):
        if not isinstance(other, Density):
            return NotImplemented
        return (self.g == other.g and self.weight == other.weight
                and self.width_lambda == other.width_lambda)

    def __hash__(self):
        return hash(("Density", str(self.g), str(self.weight), self.width_lambda))

    def __str__(self):
        core = "density(%s)" % self.g
        if self.width_lambda:
            core = "density((%s) * exp(-%s/lam*r^2))" % (self.g, self.width_lambda)
        if self.weight == EC_ONE:
            return core
        return "(%s) * %s" % (self.weight, core)

    def to_json(self):
        return {
            "kind": "density",
            "profile": str(self.g),
            "weight": _weight_json(self.weight),
            "width_lambda": [self.width_lambda.numerator,
                             self.width_lambda.denominator],
        }


def _weight_json(w):
    return w.to_json()


def _merge_terms(terms):
    out = []
    for t in terms:
        for i, u in enumerate(out):
            if u.same_shape(t):
                out[i] = u.combine(t)
                break
        else:
            out.append(t)
    out = [t for t in out if not _is_zero_weight(t.weight)]
    out.sort(key=lambda t: t.sort_key())
    return tuple(out)


# ============================================================
# Graded functionals
# ============================================================

class FormalFunctional(object):
    """Laurent series in lam whose coefficients are finite term lists."""

    __slots__ = ("ctx", "valuation", "coeffs", "tail")

    def __init__(self, ctx, valuation, coeffs, tail=None):
        if isinstance(valuation, bool) or not isinstance(valuation, int):
            raise InfinitePrincipalPart(
                "functional valuation must be a finite integer; a functional "
                "with infinitely many negative lambda powers is not representable")
        coeffs = [_merge_terms(tuple(c)) for c in coeffs]
        while coeffs and not coeffs[0]:
            coeffs.pop(0)
            valuation += 1
        if tail is None:
            while coeffs and not coeffs[-1]:
                coeffs.pop()
        else:
            tail = int(tail)
            want = tail - valuation + 1
            if want <= 0:
                coeffs = []
                valuation = tail + 1
            else:
                coeffs = coeffs[:want]
                while len(coeffs) < want:
                    coeffs.append(())
        if not coeffs and tail is not None:
            valuation = tail + 1
        if not coeffs and tail is None:
            valuation = 0
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("FormalFunctional is immutable")

    # ---- constructors ----

    @staticmethod
    def zero(ctx):
        return FormalFunctional(ctx, 0, ())

    @staticmethod
    def delta(ctx, point=None):
        if point is None:
            point = (0,) * ctx.dim
        return FormalFunctional(ctx, 0, ((PointDeriv(ctx, point),),))

    @staticmethod
    def point_deriv(ctx, point, index, weight=EC_ONE, power=0):
        return FormalFunctional(ctx, power,
                                ((PointDeriv(ctx, point, index, weight),),))

    @staticmethod
    def density(ctx, g, weight=EC_ONE, power=0, width_lambda=0):
        return FormalFunctional(ctx, power,
                                ((Density(ctx, g, weight, width_lambda),),))

    # ---- structure ----

    def coefficient(self, z):
        if z < self.valuation:
            return ()
        if self.tail is not None and z > self.tail:
            return None
        k = z - self.valuation
        return self.coeffs[k] if k < len(self.coeffs) else ()

    def end(self):
        return self.valuation + len(self.coeffs) - 1

    def known_through(self):
        return self.tail if self.tail is not None else None

    def has_width(self):
        return any(isinstance(t, Density) and t.width_lambda != 0
                   for grade in self.coeffs for t in grade)

    # ---- algebra ----

    def __add__(self, other):
        if not isinstance(other, FormalFunctional):
            return NotImplemented
        t = tail_min(self.tail, other.tail)
        lo = min(self.valuation, other.valuation)
        hi = max(self.end(), other.end())
        if t is not None:
            hi = min(hi, t)
        grades = []
        for z in range(lo, hi + 1):
            a = self.coefficient(z) or ()
            b = other.coefficient(z) or ()
            grades.append(tuple(a) + tuple(b))
        return FormalFunctional(self.ctx, lo, grades, t)

    def __neg__(self):
        return self.rescale(ExactComplex(-1, 0))

    def __sub__(self, other):
        if not isinstance(other, FormalFunctional):
            return NotImplemented
        return self + (-other)

    def rescale(self, c):
        """Multiply every weight by a plain scalar."""
        if isinstance(c, (int, Fraction)):
            c = as_coeff(c)
        grades = [tuple(t.rescale(c) for t in grade) for grade in self.coeffs]
        return FormalFunctional(self.ctx, self.valuation, grades, self.tail)

    def scale_by_scalar(self, A):
        """Multiply by a formal scalar, grading included."""
        if not isinstance(A, FormalScalar):
            return self.rescale(A)
        t = mul_tail(A.valuation, A.tail, self.valuation, self.tail)
        if not A.coeffs or not self.coeffs:
            if t is None:
                return FormalFunctional.zero(self.ctx)
            return FormalFunctional(self.ctx, t + 1, (), t)
        lo = A.valuation + self.valuation
        hi = A.end() + self.end()
        if t is not None:
            hi = min(hi, t)
        grades = [[] for _ in range(hi - lo + 1)]
        for m, c in enumerate(A.coeffs):
            if c.is_zero():
                continue
            for l, grade in enumerate(self.coeffs):
                z = A.valuation + m + self.valuation + l
                if z > hi:
                    break
                for term in grade:
                    grades[z - lo].append(term.rescale(c))
        return FormalFunctional(self.ctx, lo, grades, t)

    def shift(self, k):
        return FormalFunctional(self.ctx, self.valuation + k, self.coeffs,
                                None if self.tail is None else self.tail + k)

    def truncate(self, order):
        t = tail_min(self.tail, order)
        return FormalFunctional(self.ctx, self.valuation, self.coeffs, t)

    def conj(self):
        grades = [tuple(t.conj() for t in grade) for grade in self.coeffs]
        return FormalFunctional(self.ctx, self.valuation, grades, self.tail)

    def __eq__(self, other):
        if not isinstance(other, FormalFunctional):
            return NotImplemented
        lo = min(self.valuation, other.valuation)
        hi = max(self.end(), other.end())
        for t in (self.tail, other.tail):
            if t is not None:
                hi = min(hi, t)
        for z in range(lo, hi + 1):
            if (self.coefficient(z) or ()) != (other.coefficient(z) or ()):
                return False
        return True

    def __hash__(self):
        return hash((self.valuation, self.coeffs, self.tail))

    def __str__(self):
        if not self.coeffs:
            if self.tail is None:
                return "0"
            return "0 + O(lam^%d)" % (self.tail + 1)
        bits = []
        for k, grade in enumerate(self.coeffs):
            if not grade:
                continue
            z = self.valuation + k
            body = " + ".join(str(t) for t in grade)
            if z == 0:
                bits.append(body if len(grade) == 1 else "(%s)" % body)
            else:
                lam = "lam" if z == 1 else "lam^%d" % z
                bits.append("(%s)*%s" % (body, lam))
        s = " + ".join(bits)
        if self.tail is not None:
            s += " + O(lam^%d)" % (self.tail + 1)
        return s

    def to_json(self):
        return {
            "valuation": self.valuation,
            "coeffs": [[t.to_json() for t in grade] for grade in self.coeffs],
            "tail": "exact" if self.tail is None else {"truncated_at": self.tail},
        }


def bind_functional(T, binding):
    """Resolve lam-marked widths.  Strict bindings substitute; the formal
    binding refuses if any width is present."""
    if not binding.is_strict:
        if T.has_width():
            raise FormalModeError(
                "functional has lam-dependent Gaussian widths; they only "
                "resolve under a strict lambda binding")
        return T
    grades = []
    for grade in T.coeffs:
        grades.append(tuple(t.bind(binding) if isinstance(t, Density) else t
                            for t in grade))
    return FormalFunctional(T.ctx, T.valuation, grades, T.tail)


# ============================================================
# Pairings
# ============================================================

def func_action(T, F):
    """Plain pairing <T, F> as a formal scalar."""
    F = _as_function(T.ctx, F)
    t = mul_tail(T.valuation, T.tail, F.valuation, F.tail)
    if not T.coeffs or not F.coeffs:
        if t is None:
            return FormalScalar.zero()
        return FormalScalar(t + 1, (), t)
    lo = T.valuation + F.valuation
    hi = T.end() + F.end()
    if t is not None:
        hi = min(hi, t)
    vals = [EC_ZERO] * (hi - lo + 1)
    for m, grade in enumerate(T.coeffs):
        if not grade:
            continue
        for l, fl in enumerate(F.coeffs):
            z = T.valuation + m + F.valuation + l
            if z > hi:
                break
            if not fl:
                continue
            for term in grade:
                vals[z - lo] = vals[z - lo] + term.act(fl)
    return FormalScalar(lo, vals, t)


def _as_function(ctx, f):
    if isinstance(f, FormalFunction):
        return f
    if isinstance(f, GaussPoly):
        return FormalFunction.of(f, 0)
    if isinstance(f, GaussSum):
        return FormalFunction(ctx, 0, (f,))
    raise TypeError("expected a phase-space function")


def func_star_action(S, T, F, order=None):
    """Star pairing <T, F>_* through the family's trace density."""
    F = _as_function(S.ctx, F)
    if S.name == "moyal" and S._trace is None:
        return func_action(T, F).shift(-S.ctx.n)
    return _star_action_adjoint(S, T, F, order)


def _star_action_adjoint(S, T, F, order=None):
    # move the derivatives of each B_k off the functional side by parts:
    # <T, F>_* = lam^(-n) sum_k lam^k sum_(c,dl,dr) c (-1)^|dr| <T, d^dr((d^dl F) . t)>
    F = _as_function(S.ctx, F)
    t_density = S.trace_density
    n = S.ctx.n
    if order is None:
        # the family's own termination rule, driven by the function side only
        # (the functional side is opaque, so both slots get the same factor)
        k_stop = 0
        for gs in F.coeffs:
            if not gs:
                continue
            b = S.termination_bound(gs, gs)
            if b == UNBOUNDED:
                raise TruncationRequired(
                    "star pairing does not terminate here; pass a truncation order")
            k_stop = max(k_stop, b)
    else:
        k_stop = order + n - T.valuation - F.valuation - t_density.valuation
        if k_stop < 0:
            k_stop = 0
    total = FormalScalar.zero()
    for k in range(0, k_stop + 1):
        piece = None
        for c, dl, dr in S.terms(k):
            u = F
            for i, e in enumerate(dl):
                for _ in range(e):
                    u = fs_diff(u, i)
            u = fs_bullet(u, t_density)
            for i, e in enumerate(dr):
                for _ in range(e):
                    u = fs_diff(u, i)
            if sum(dr) % 2:
                c = -c
            contrib = func_action(T, u).scale(c)
            piece = contrib if piece is None else piece + contrib
        if piece is not None:
            total = total + piece.shift(k)
    total = total.shift(-n)
    if order is not None:
        total = total.truncate(order)
    return total


# ============================================================
# Products of functions with functionals
# ============================================================

class DualFunctional(object):
    """Star product of a function with a functional, kept as a pending
    operation: it acts by moving its function across the star pairing."""

    __slots__ = ("S", "side", "xi", "base")

    def __init__(self, S, side, xi, base):
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "base", base)

    def __setattr__(self, name, value):
        raise AttributeError("DualFunctional is immutable")

    def star_action(self, F, order=None):
        F = _as_function(self.S.ctx, F)
        if self.side == "left":
            # <xi * T, F>_* = <T, F * xi>_*
            return func_star_action(self.S, self.base,
                                    star_mul(self.S, F, self.xi, order), order)
        # <T * xi, F>_* = <T, xi * F>_*
        return func_star_action(self.S, self.base,
                                star_mul(self.S, self.xi, F, order), order)

    def __str__(self):
        if self.side == "left":
            return "(%s) * T" % render_function(self.xi)
        return "T * (%s)" % render_function(self.xi)


def _bullet_term_mul(ctx, gs, term):
    """Pointwise product of one GaussSum with one elementary term."""
    if isinstance(term, Density):
        return [Density(ctx, term.g * gs, term.weight, term.width_lambda)]
    # Leibniz: <xi . d^mu delta, f> expands into point derivatives of order
    # mu - nu weighted by d^nu xi at the point; the sign works out to (-1)^|nu|
    out = []
    mu = term.index
    ups = [tuple(range(e + 1)) for e in mu]

    def walk(i, nu):
        if i == len(mu):
            nu_t = tuple(nu)
            d = gs
            for j, e in enumerate(nu_t):
                for _ in range(e):
                    d = d.diff(j)
            val = EC_ZERO
            for value, exp_arg in d.eval_pairs(term.point):
                if exp_arg != 0:
                    if not value.is_zero():
                        raise NotSupportedForm(
                            "pointwise product against a point functional needs "
                            "the Gaussian factor to vanish at the point")
                    continue
                val = val + value
            if val.is_zero():
                return
            binom = 1
            for a, b in zip(mu, nu_t):
                binom *= comb(a, b)
            sign_nu = -1 if sum(nu_t) % 2 else 1
            rest = tuple(a - b for a, b in zip(mu, nu_t))
            w = term.weight * val * Fraction(binom * sign_nu)
            out.append(PointDeriv(ctx, term.point, rest, w))
            return
        for e in ups[i]:
            walk(i + 1, nu + [e])

    walk(0, [])
    return out


def func_mul(S, side, xi, T, order=None):
    """Multiply a functional by a function on the given side.

    side "bullet" materializes the pointwise product as a new functional;
    sides "left" and "right" return the star product as a pending operation
    acting through the dual pairing.
    """
    if side not in ("left", "right", "bullet"):
        raise ValueError("side must be left, right, or bullet")
    xi = _as_function(S.ctx, xi)
    if side in ("left", "right"):
        return DualFunctional(S, side, xi, T)
    t = mul_tail(xi.valuation, xi.tail, T.valuation, T.tail)
    if not xi.coeffs or not T.coeffs:
        if t is None:
            return FormalFunctional.zero(S.ctx)
        return FormalFunctional(S.ctx, t + 1, (), t)
    lo = xi.valuation + T.valuation
    hi = xi.end() + T.end()
    if t is not None:
        hi = min(hi, t)
    grades = [[] for _ in range(hi - lo + 1)]
    for l, gs in enumerate(xi.coeffs):
        if not gs:
            continue
        for m, grade in enumerate(T.coeffs):
            z = xi.valuation + l + T.valuation + m
            if z > hi:
                break
            for term in grade:
                grades[z - lo].extend(_bullet_term_mul(S.ctx, gs, term))
    return FormalFunctional(S.ctx, lo, grades, t)


# ============================================================
# Reality and positivity
# ============================================================

class RealityReport(object):
    __slots__ = ("structural", "witness_results", "verdict")

    def __init__(self, structural, witness_results):
        object.__setattr__(self, "structural", structural)
        object.__setattr__(self, "witness_results", tuple(witness_results))
        ok = structural and all(r[1] for r in witness_results)
        object.__setattr__(self, "verdict", "real" if ok else "fail")

    def __setattr__(self, name, value):
        raise AttributeError("RealityReport is immutable")

    def to_json(self):
        return {
            "verdict": self.verdict,
            "structural": self.structural,
            "witnesses": [{"witness": w, "real": bool(okv), "value": v}
                          for w, okv, v in self.witness_results],
        }

    def __repr__(self):
        return "RealityReport(%s)" % self.verdict


def reality_check(T, witnesses=()):
    """Structural self-conjugacy plus real pairings against real witnesses."""
    structural = (T.conj() == T)
    results = []
    for w in witnesses:
        wf = _as_function(T.ctx, w)
        if wf.conj() != wf:
            raise ValueError("reality witnesses must be real functions")
        v = func_action(T, wf)
        results.append((render_function(wf), v.conj() == v, render_scalar(v)))
    return RealityReport(structural, results)


class PositivityReport(object):
    __slots__ = ("verdict", "samples", "details", "negativity", "scope")

    def __init__(self, verdict, samples, details, negativity, scope):
        object.__setattr__(self, "verdict", verdict)
        object.__setattr__(self, "samples", tuple(samples))
        object.__setattr__(self, "details", tuple(details))
        object.__setattr__(self, "negativity", negativity)
        object.__setattr__(self, "scope", scope)

    def __setattr__(self, name, value):
        raise AttributeError("PositivityReport is immutable")

    def to_json(self):
        return {
            "verdict": self.verdict,
            "lambda_samples": [str(s) for s in self.samples],
            "witnesses": list(self.details),
            "negativity": self.negativity,
            "scope": self.scope,
        }

    def __repr__(self):
        return "PositivityReport(%s)" % self.verdict


DEFAULT_SAMPLES = (Fraction(1, 10), Fraction(1, 2), Fraction(1), Fraction(2))


def positivity_check(S, T, witness_fns, order=None, lambda_samples=DEFAULT_SAMPLES):
    """Partial-sum positivity of <T, conj(f) * f>_* at sample lambdas.

    For each witness and sample, the partial sums of the value series are
    scanned for a stabilization index past which they stay nonnegative; a
    strictly negative total is a negativity certificate.  The verdict only
    covers the finite witness set and sample list.
    """
    details = []
    negativity = None
    for f in witness_fns:
        ff = _as_function(S.ctx, f)
        prod = star_mul(S, ff.conj(), ff, order)
        val = func_star_action(S, T, prod, order)
        entry = {"witness": render_function(ff), "value": render_scalar(val),
                 "per_lambda": []}
        if not val.coeffs:
            entry["per_lambda"] = [{"lambda": str(s), "k0": val.valuation,
                                    "total_sign": 0} for s in lambda_samples]
            details.append(entry)
            continue
        for s in lambda_samples:
            run = None
            k0 = val.valuation
            for idx, c in enumerate(val.coeffs):
                z = val.valuation + idx
                step = c * (s ** z)
                run = step if run is None else run + step
                sign = coeff_sign(run)
                if sign < 0:
                    k0 = z + 1
            total_sign = coeff_sign(run)
            entry["per_lambda"].append({"lambda": str(s), "k0": k0,
                                        "total_sign": total_sign})
            if total_sign < 0 and negativity is None:
                negativity = {"witness": render_function(ff), "lambda": str(s),
                              "value": render_scalar(val)}
        details.append(entry)
    verdict = "negative" if negativity else "positive_on_samples"
    scope = {"witnesses": len(details), "samples": len(lambda_samples),
             "order": order,
             "note": "verdict covers the listed witnesses and lambda samples only"}
    return PositivityReport(verdict, lambda_samples, details, negativity, scope)


def normalize_functional(S, T, order):
    """Rescale so the functional pairs to 1 with the constant function."""
    one = FormalFunction.one(S.ctx)
    c = func_star_action(S, T, one, order)
    try:
        A = scalar_invert(c, order)
    except ZeroNotInvertible:
        raise NotNormalizable("functional pairs to 0 against the constant 1")
    return A, T.scale_by_scalar(A)


# ============================================================
# Genvalue checks
# ============================================================

class EigenReport(object):
    __slots__ = ("kind", "verdict", "test_degree", "order", "residuals",
                 "commutation", "first_failure")

    def __init__(self, kind, verdict, test_degree, order, residuals,
                 commutation, first_failure):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "verdict", verdict)
        object.__setattr__(self, "test_degree", test_degree)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "residuals", tuple(residuals))
        object.__setattr__(self, "commutation", tuple(commutation))
        object.__setattr__(self, "first_failure", first_failure)

    def __setattr__(self, name, value):
        raise AttributeError("EigenReport is immutable")

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_json(self):
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "test_degree": self.test_degree,
            "order": self.order,
            "residuals": [{"witness": w, "residual": r} for w, r in self.residuals],
            "commutation_residuals": [{"witness": w, "residual": r}
                                      for w, r in self.commutation],
            "first_failure": self.first_failure,
        }

    def __repr__(self):
        return "EigenReport(%s, %s)" % (self.kind, self.verdict)


def _test_monomials(ctx, test_degree):
    from .star_products import _monomial_generators
    return _monomial_generators(ctx, test_degree)


def eigencheck_classical(phi, a, point):
    """Decide phi(point) == a for a Gaussian-polynomial phi and rational a.

    Decidability leans on the exponentials being transcendental at nonzero
    rational arguments: a part P * exp(x) with x != 0 contributes a rational
    number only when P vanishes at the point.
    """
    gs = phi if isinstance(phi, GaussSum) else GaussSum.of(phi)
    if isinstance(a, (int, Fraction)):
        a = as_coeff(a)
    point = tuple(Fraction(x) for x in point)
    rational = EC_ZERO
    for value, exp_arg in gs.eval_pairs(point):
        if exp_arg == 0:
            rational = rational + value
        elif not value.is_zero():
            # nonzero * exp(nonzero rational) is irrational, so equality with
            # the rational target fails outright
            residual = "(%s)*exp(%s)" % (value, exp_arg)
            return EigenReport("classical", "fail", 0, None,
                               [("1", residual)], [],
                               {"witness": "1", "residual": residual})
    residual = rational - a
    if residual.is_zero():
        return EigenReport("classical", "pass", 0, None, [("1", "0")], [], None)
    return EigenReport("classical", "fail", 0, None,
                       [("1", str(residual))], [],
                       {"witness": "1", "residual": str(residual)})


def eigencheck_bullet(xi, a, T, test_degree):
    """Check <T, (xi - a) . psi> = 0 over all monomials of bounded degree."""
    ctx = T.ctx
    xi = _as_function(ctx, xi)
    if isinstance(a, (int, Fraction, ExactComplex)):
        a = FormalScalar.from_const(a)
    shifted = _fs_minus_scalar(xi, a)
    residuals = []
    first = None
    for psi in _test_monomials(ctx, test_degree):
        r = func_action(T, fs_bullet(shifted, FormalFunction.of(psi, 0)))
        ok = not r.coeffs
        residuals.append((render_gausspoly(psi), render_scalar(r)))
        if not ok and first is None:
            first = {"witness": render_gausspoly(psi), "residual": render_scalar(r)}
    verdict = "pass" if first is None else "fail"
    return EigenReport("bullet", verdict, test_degree, None, residuals, [], first)


def _fs_minus_scalar(xi, a):
    # xi - a*1 with a formal scalar and 1 the constant function
    one = FormalFunction.one(xi.ctx)
    t = tail_min(xi.tail, mul_tail(a.valuation, a.tail, 0, None))
    lo = min(xi.valuation, a.valuation if a.coeffs else xi.valuation)
    hi = max(xi.end(), a.end() if a.coeffs else xi.end())
    if t is not None:
        hi = min(hi, t)
    grades = []
    for z in range(lo, hi + 1):
        g = xi.coefficient(z)
        g = GaussSum.zero(xi.ctx) if g is None or not g else g
        c = a.coefficient(z)
        if c is not None and not c.is_zero():
            g = g + GaussSum.of(GaussPoly.constant(xi.ctx, 1).scale(-c))
        grades.append(g)
    return FormalFunction(xi.ctx, lo, grades, t)


def eigencheck_star(S, xi, a, T, test_degree, order=None, binding=FORMAL):
    """Star-genvalue test: <T, psi * xi>_* = a <T, psi>_* over monomials,
    plus the commutation residual <T, psi * xi - xi * psi>_*.

    Under a strict binding, widths are resolved first and residual series are
    evaluated at the bound lambda; formally, residuals must vanish as series.
    """
    ctx = S.ctx
    xi = _as_function(ctx, xi)
    if isinstance(a, (int, Fraction, ExactComplex)):
        a = FormalScalar.from_const(a)
    Tb = bind_functional(T, binding)
    residuals = []
    commutation = []
    first = None
    for psi in _test_monomials(ctx, test_degree):
        psif = FormalFunction.of(psi, 0)
        lhs = func_star_action(S, Tb, star_mul(S, psif, xi, order), order)
        base = func_star_action(S, Tb, psif, order)
        r = lhs - a * base
        cres = func_star_action(S, Tb, star_commutator(S, psif, xi, order), order)
        if binding.is_strict:
            rv = scalar_eval(r, binding)
            cv = scalar_eval(cres, binding)
            ok = rv.is_zero() and cv.is_zero()
            residuals.append((render_gausspoly(psi), str(rv)))
            commutation.append((render_gausspoly(psi), str(cv)))
            if not ok and first is None:
                first = {"witness": render_gausspoly(psi), "residual": str(rv if not rv.is_zero() else cv)}
        else:
            ok = (not r.coeffs) and (not cres.coeffs)
            residuals.append((render_gausspoly(psi), render_scalar(r)))
            commutation.append((render_gausspoly(psi), render_scalar(cres)))
            if not ok and first is None:
                bad = r if r.coeffs else cres
                first = {"witness": render_gausspoly(psi),
                         "residual": render_scalar(bad)}
    verdict = "pass" if first is None else "fail"
    return EigenReport("star", verdict, test_degree, order, residuals,
                       commutation, first)


# ============================================================
# States
# ============================================================

def _laguerre_coeffs(n):
    # L_0 = 1, L_1 = 1 - x, (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}
    prev = [Fraction(1)]
    if n == 0:
        return prev
    cur = [Fraction(1), Fraction(-1)]
    for k in range(1, n):
        nxt = [Fraction(0)] * (k + 2)
        for j, c in enumerate(cur):
            nxt[j] += Fraction(2 * k + 1, k + 1) * c
            nxt[j + 1] -= Fraction(1, k + 1) * c
        for j, c in enumerate(prev):
            nxt[j] -= Fraction(k, k + 1) * c
        prev, cur = cur, nxt
    return cur


def wigner_state(ctx, level):
    """Oscillator state functional at the given level.

    The profile is a Laguerre polynomial in 2 r^2 / lam against a Gaussian of
    width 1/lam; the inverse powers of lam give the functional a principal
    part of depth equal to the level.
    """
    if ctx.n != 1:
        raise NotSupportedForm("oscillator states are built for one pair of coordinates")
    if level < 0:
        raise ValueError("level must be nonnegative")
    coeffs = _laguerre_coeffs(level)
    sign = -1 if level % 2 else 1
    r2 = GaussPoly.monomial(ctx, (2, 0)) + GaussPoly.monomial(ctx, (0, 2))
    grades = [[] for _ in range(level + 1)]
    power = GaussPoly.constant(ctx, 1)
    for j, c in enumerate(coeffs):
        # coefficient of lam^(-j): c * (2 r^2)^j, graded at -j
        w = c * (2 ** j) * sign
        if w:
            grades[level - j].append(Density(ctx, power.scale(as_coeff(w)),
                                             EC_ONE, width_lambda=1))
        power = power * r2
    return FormalFunctional(ctx, -level, grades)


# ============================================================
# Negative regions
# ============================================================

class RegionReport(object):
    __slots__ = ("center", "min_value", "min_value_str", "semi_axes_squared",
                 "area_str", "verified")

    def __init__(self, center, min_value, min_value_str, semi_axes_squared,
                 area_str, verified):
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "min_value", min_value)
        object.__setattr__(self, "min_value_str", min_value_str)
        object.__setattr__(self, "semi_axes_squared", semi_axes_squared)
        object.__setattr__(self, "area_str", area_str)
        object.__setattr__(self, "verified", verified)

    def __setattr__(self, name, value):
        raise AttributeError("RegionReport is immutable")

    def to_json(self):
        return {
            "center": [str(x) for x in self.center],
            "min": self.min_value_str,
            "semi_axes_squared": [str(x) for x in self.semi_axes_squared],
            "area": self.area_str,
            "verified": self.verified,
        }

    def __repr__(self):
        return "RegionReport(min=%s, area=%s)" % (self.min_value_str, self.area_str)


def negative_region(f, binding=FORMAL):
    """Where conj(f) * f dips negative for f = (q - q0) + i a (p - p0), a > 0.

    The star square is (q - q0)^2 + a^2 (p - p0)^2 - a lam: an ellipse of
    negativity with area pi lam, independent of a.
    """
    ctx = f.ctx
    if ctx.n != 1:
        raise NotSupportedForm("negative regions are computed for one pair only")
    if isinstance(f, FormalFunction):
        if f.valuation != 0 or len(f.coeffs) != 1:
            raise NotSupportedForm("expected a lam-free linear expression")
        f = f.coefficient(0)
    if isinstance(f, GaussSum):
        if len(f.parts) != 1:
            raise NotSupportedForm("expected a single polynomial part")
        f = f.parts[0]
    if not f.is_poly() or (f.total_degree() or 0) != 1:
        raise NotSupportedForm(
            "expected a degree-1 complex coordinate: (q - q0) + i*a*(p - p0)")
    c0 = EC_ZERO
    cq = EC_ZERO
    cp = EC_ZERO
    for exps, c in f.terms.items():
        if exps == (0, 0):
            c0 = c
        elif exps == (1, 0):
            cq = c
        elif exps == (0, 1):
            cp = c
        else:
            raise NotSupportedForm("expected a linear expression in q and p")
    if cq != EC_ONE:
        raise NotSupportedForm("normalize so the q coefficient is exactly 1")
    if not cp.re == 0 or cp.im <= 0:
        raise NotSupportedForm("the p coefficient must be i*a with rational a > 0")
    a = cp.im
    q0 = -c0.re
    p0 = -c0.im / a

    from .star_products import moyal_family
    S = moyal_family(ctx)
    ff = FormalFunction.of(f, 0)
    square = star_mul(S, ff.conj(), ff)
    qs = GaussPoly.coordinate(ctx, "q") + GaussPoly.constant(ctx, -q0)
    ps = GaussPoly.coordinate(ctx, "p") + GaussPoly.constant(ctx, -p0)
    expect0 = qs * qs + (ps * ps).scale(as_coeff(a * a))
    expected = FormalFunction(ctx, 0, (GaussSum.of(expect0),
                                       GaussSum.of(GaussPoly.constant(ctx, -a))))
    verified = (square == expected)

    min_series = FormalScalar.lam(1, -a)
    if binding.is_strict:
        lam = binding.value
        min_val = -a * lam
        semi = (a * lam, lam / a)
        area = "pi" if lam == 1 else "pi*%s" % lam
        return RegionReport((q0, p0), min_val, str(Fraction(min_val)),
                            tuple(Fraction(x) for x in semi), area, verified)
    semi = (FormalScalar.lam(1, a), FormalScalar.lam(1, Fraction(1, 1) / a))
    return RegionReport((q0, p0), min_series, render_scalar(min_series),
                        tuple(render_scalar(x) for x in semi), "pi*lam", verified)
