"""Functionals and states: actions, reality, positivity, normalization, genvalue checks."""

from fractions import Fraction

import pytest

from starforge import (
    Density,
    EC_I,
    EC_ONE,
    ExactComplex,
    FORMAL,
    FormalFunction,
    FormalFunctional,
    FormalModeError,
    FormalScalar,
    GaussPoly,
    InfinitePrincipalPart,
    LambdaBinding,
    NotNormalizable,
    NotSupportedForm,
    PhaseContext,
    PiRational,
    PointDeriv,
    bind_functional,
    bullet_family,
    coeff_sign,
    eigencheck_bullet,
    eigencheck_classical,
    eigencheck_star,
    fs_bullet,
    fs_linear_comb,
    func_action,
    func_mul,
    func_star_action,
    moyal_family,
    negative_region,
    normalize_functional,
    positivity_check,
    reality_check,
    render_scalar,
    scalar_eval,
    star_mul,
    wigner_state,
)
from starforge.functionals_states import _laguerre_coeffs, _star_action_adjoint

from corpus import nonzero_coeff, rand_point, rand_poly, rand_scalar

CTX = PhaseContext(1)
Q = GaussPoly.coordinate(CTX, "q")
P = GaussPoly.coordinate(CTX, "p")
GAUSS = GaussPoly.gaussian(CTX, 1)
MOYAL = moyal_family(CTX)
BULLET = bullet_family(CTX)
DELTA = FormalFunctional.delta(CTX)
ONE = FormalFunction.one(CTX)


def fn(f, power=0):
    return FormalFunction.of(f, power)


def rand_functional(rng, with_density=True):
    grades = []
    for _ in range(rng.randint(1, 3)):
        grade = []
        for _ in range(rng.randint(0, 2)):
            idx = (rng.randint(0, 2), rng.randint(0, 2))
            grade.append(PointDeriv(CTX, rand_point(rng, CTX), idx, nonzero_coeff(rng)))
        if with_density and rng.random() < 0.4:
            grade.append(Density(CTX, rand_poly(rng, CTX, alpha=1)))
        grades.append(grade)
    return FormalFunctional(CTX, rng.randint(-1, 1), grades)


# ---- construction ----

def test_infinite_principal_part_is_rejected():
    for bad in (float("-inf"), 1.5, "everything", True):
        with pytest.raises(InfinitePrincipalPart):
            FormalFunctional(CTX, bad, ((PointDeriv(CTX, (0, 0)),),))


def test_same_shape_terms_merge():
    two = DELTA + DELTA
    grade = two.coefficient(0)
    assert len(grade) == 1
    assert grade[0].weight == ExactComplex(2)
    assert (DELTA - DELTA) == FormalFunctional.zero(CTX)


def test_functional_shift_truncate_conj():
    T = DELTA.shift(2)
    assert T.valuation == 2
    T2 = DELTA.rescale(EC_I).conj()
    assert T2 == DELTA.rescale(-EC_I)
    T3 = DELTA.truncate(1)
    assert T3.tail == 1
    assert T3.coefficient(2) is None


def test_scale_by_scalar_moves_grades():
    T = DELTA.scale_by_scalar(FormalScalar.lam())
    assert T.valuation == 1
    assert T.coefficient(1)[0].weight == EC_ONE


# ---- plain actions ----

def test_delta_evaluates_at_its_point():
    F = FormalFunction(CTX, 0, (Q * Q, P))  # q^2 + lam p
    assert func_action(DELTA, F).is_zero()
    d = FormalFunctional.delta(CTX, (1, 2))
    assert func_action(d, F) == FormalScalar.from_coeff_map({0: 1, 1: 2})


def test_point_derivative_sign_convention():
    dq = FormalFunctional.point_deriv(CTX, (0, 0), (1, 0))
    assert func_action(dq, fn(Q)) == FormalScalar.from_const(-1)
    d2 = FormalFunctional.point_deriv(CTX, (0, 0), (2, 0))
    assert func_action(d2, fn(Q * Q)) == FormalScalar.from_const(2)


def test_density_action_is_the_gaussian_integral():
    T = FormalFunctional.density(CTX, GAUSS)
    v = func_action(T, fn(Q * Q))
    assert v == FormalScalar(0, (PiRational(Fraction(1, 2), 1),))


def test_action_mixes_deltas_and_densities():
    T = DELTA + FormalFunctional.density(CTX, GAUSS, power=1)
    v = func_action(T, ONE)
    assert v.coefficient(0) == EC_ONE
    assert v.coefficient(1) == PiRational(1, 1)


def test_action_respects_function_truncation():
    F = FormalFunction(CTX, 0, (GaussPoly.constant(CTX, 1), Q), tail=1)
    v = func_action(DELTA, F)
    assert v.coefficient(0) == EC_ONE
    assert v.coefficient(2) is None


def test_action_is_linear(rng):
    # polynomial witnesses: point functionals away from the origin cannot
    # take exact values on Gaussian factors
    for _ in range(10):
        T = rand_functional(rng)
        F = fn(rand_poly(rng, CTX))
        G = fn(rand_poly(rng, CTX))
        c1 = rand_scalar(rng, lo=0, hi=2)
        c2 = rand_scalar(rng, lo=0, hi=2)
        lhs = func_action(T, fs_linear_comb(c1, F, c2, G))
        rhs = c1 * func_action(T, F) + c2 * func_action(T, G)
        assert lhs == rhs


def test_delta_on_a_gaussian_needs_a_rational_value():
    away = FormalFunctional.delta(CTX, (1, 0))
    with pytest.raises(NotSupportedForm):
        func_action(away, fn(GAUSS))
    # fine when the polynomial part kills the transcendental value
    shifted = (Q + GaussPoly.constant(CTX, -1)) * GAUSS
    assert func_action(away, fn(shifted)).is_zero()
    # and at the origin the exponential is exactly 1
    assert func_action(DELTA, fn(GAUSS)) == FormalScalar.one()


def test_width_markers_block_formal_actions():
    W = wigner_state(CTX, 0)
    assert W.has_width()
    with pytest.raises(FormalModeError):
        func_action(W, ONE)


# ---- star actions ----

def test_density_star_action_gains_the_volume_power():
    T = FormalFunctional.density(CTX, GAUSS)
    v = func_star_action(MOYAL, T, ONE)
    assert v == FormalScalar(-1, (PiRational(1, 1),))


def test_delta_is_not_a_moyal_state():
    f = fn(Q) + fn(P).scale(EC_I)
    v = func_star_action(MOYAL, DELTA, star_mul(MOYAL, f.conj(), f))
    assert v == FormalScalar.from_const(-1)


def test_bullet_star_action_is_the_plain_action_shifted():
    T = DELTA + FormalFunctional.density(CTX, GAUSS, power=1)
    v = func_star_action(BULLET, T, ONE)
    assert v == func_action(T, ONE).shift(-1)


def test_moyal_reduction_identity(rng):
    # the moyal fast path and the adjoint-route pairing agree
    for _ in range(8):
        T = rand_functional(rng)
        F = fn(rand_poly(rng, CTX))
        fast = func_star_action(MOYAL, T, F)
        slow = _star_action_adjoint(MOYAL, T, F)
        assert fast == func_action(T, F).shift(-1)
        assert slow == fast


# ---- products with functions ----

def test_bullet_mul_reduces_to_evaluation():
    d = FormalFunctional.delta(CTX, (1, 2))
    T = func_mul(BULLET, "bullet", fn(Q), d)
    assert func_action(T, fn(P)) == FormalScalar.from_const(2)


def test_left_star_mul_through_the_dual_pairing():
    view = func_mul(MOYAL, "left", fn(Q), DELTA)
    v = view.star_action(fn(P))
    assert v == FormalScalar.from_const(ExactComplex(0, Fraction(-1, 2)))


def test_right_star_mul_by_one_is_identity():
    d = FormalFunctional.delta(CTX, (1, 2))
    view = func_mul(MOYAL, "right", ONE, d)
    for psi in (ONE, fn(Q), fn(P), fn(Q * P)):
        assert view.star_action(psi) == func_star_action(MOYAL, d, psi)


def test_bullet_mul_matches_the_dual_definition(rng):
    # <xi . T, psi> = <T, xi . psi> on a monomial corpus
    monos = [GaussPoly.monomial(CTX, e) for e in
             ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))]
    for _ in range(8):
        T = rand_functional(rng)
        xi = fn(rand_poly(rng, CTX))
        prod = func_mul(BULLET, "bullet", xi, T)
        for m in monos:
            psi = fn(m)
            assert func_action(prod, psi) == func_action(T, fs_bullet(xi, psi))


def test_bullet_mul_needs_vanishing_gaussians_at_points():
    dq = FormalFunctional.point_deriv(CTX, (1, 0), (1, 0))
    with pytest.raises(NotSupportedForm):
        func_mul(BULLET, "bullet", fn(GAUSS), dq)


# ---- reality ----

def test_point_functionals_are_real():
    d = FormalFunctional.delta(CTX, (1, 2))
    rep = reality_check(d, [ONE, fn(Q), fn(Q * P)])
    assert rep.verdict == "real"
    assert rep.structural
    assert all(ok for _, ok, _ in rep.witness_results)


def test_imaginary_weight_fails_reality():
    rep = reality_check(DELTA.rescale(EC_I), [ONE])
    assert rep.verdict == "fail"
    assert not rep.structural
    witness, ok, value = rep.witness_results[0]
    assert witness == "1"
    assert not ok
    assert value == "I"


def test_mixed_real_functional():
    T = FormalFunctional.density(CTX, Q * GAUSS) + DELTA.scale_by_scalar(FormalScalar.lam())
    rep = reality_check(T, [ONE, fn(Q), fn(P * P)])
    assert rep.verdict == "real"


def test_reality_witnesses_must_be_real():
    with pytest.raises(ValueError):
        reality_check(DELTA, [fn(Q) + fn(P).scale(EC_I)])


# ---- positivity ----

def test_delta_is_negative_over_moyal():
    f = fn(Q) + fn(P).scale(EC_I)
    rep = positivity_check(MOYAL, DELTA, [f])
    assert rep.verdict == "negative"
    assert rep.negativity == {"witness": "q + I*p", "lambda": "1/10", "value": "-1"}
    # the witness value is the lambda-independent constant -1
    for entry in rep.details[0]["per_lambda"]:
        assert entry["total_sign"] == -1


def test_delta_is_positive_over_bullet():
    fns = [ONE + fn(Q), fn(Q) + fn(P).scale(EC_I), fn(P * P)]
    rep = positivity_check(BULLET, DELTA, fns)
    assert rep.verdict == "positive_on_samples"
    assert rep.negativity is None


def test_gaussian_density_is_positive_over_moyal():
    T = FormalFunctional.density(CTX, GAUSS)
    f = fn(Q) + fn(P).scale(EC_I)
    samples = (Fraction(1, 10), Fraction(1, 2), Fraction(1))
    rep = positivity_check(MOYAL, T, [f], lambda_samples=samples)
    assert rep.verdict == "positive_on_samples"
    assert rep.details[0]["value"] == "pi*lam^-1 - pi"


def test_classical_and_bullet_positivity_agree(rng):
    # the bullet verdict coincides with the verdict of the plain action
    monos = [ONE + fn(Q), fn(Q), fn(Q) + fn(P).scale(EC_I), fn(Q * P)]
    samples = (Fraction(1, 2), Fraction(1), Fraction(2))
    for _ in range(8):
        T = rand_functional(rng)
        T = (T + T.conj()).rescale(Fraction(1, 2))  # real part
        rep = positivity_check(BULLET, T, monos, lambda_samples=samples)
        classical_negative = False
        for f in monos:
            value = func_action(T, fs_bullet(f.conj(), f))
            for s in samples:
                if coeff_sign(scalar_eval(value, LambdaBinding.strict(s))) < 0:
                    classical_negative = True
        assert (rep.verdict == "negative") == classical_negative


def test_per_power_positivity_is_the_wrong_reading():
    # demanding nonnegativity per lambda power would force <delta, |f|^2> = 0
    phi = ONE + fn(Q)
    value = func_action(DELTA, fs_bullet(phi.conj(), phi))
    assert value == FormalScalar.one()  # |phi(0)|^2
    up = fs_linear_comb(FormalScalar.one() + FormalScalar.lam(), phi,
                        FormalScalar.zero(), phi)
    down = fs_linear_comb(FormalScalar.one() - FormalScalar.lam(), phi,
                          FormalScalar.zero(), phi)
    plus = func_action(DELTA, fs_bullet(up.conj(), up))
    minus = func_action(DELTA, fs_bullet(down.conj(), down))
    # the lam coefficients have opposite signs, so both can only be
    # nonnegative when the witness value vanishes
    assert plus.coefficient(1) == ExactComplex(2)
    assert minus.coefficient(1) == ExactComplex(-2)
    # while the adopted partial-sum reading accepts both witnesses
    rep = positivity_check(BULLET, DELTA, [up, down])
    assert rep.verdict == "positive_on_samples"


# ---- normalization ----

def test_normalize_delta_over_moyal():
    A, T = normalize_functional(MOYAL, DELTA, 4)
    assert A == FormalScalar.lam()
    assert A.tail is None
    assert func_star_action(MOYAL, T, ONE) == FormalScalar.one()


def test_normalize_gaussian_density():
    T0 = FormalFunctional.density(CTX, GAUSS)
    A, T = normalize_functional(MOYAL, T0, 4)
    assert render_scalar(A) == "1/pi*lam"
    assert A.coefficient(1) * PiRational(1, 1) == PiRational(1, 0)
    assert func_star_action(MOYAL, T, ONE) == FormalScalar.one()


def test_normalize_series_weights():
    # <T, 1> = 2 + lam inverts into the alternating geometric series
    T = FormalFunctional(CTX, 0, ((PointDeriv(CTX, (0, 0), None, ExactComplex(2)),),
                                  (PointDeriv(CTX, (0, 0)),)))
    A, Tn = normalize_functional(BULLET, T, 6)
    assert A.coefficient(1) == ExactComplex(Fraction(1, 2))
    assert A.coefficient(2) == ExactComplex(Fraction(-1, 4))
    assert A.coefficient(3) == ExactComplex(Fraction(1, 8))
    check = func_star_action(BULLET, Tn, ONE)
    assert check == FormalScalar.one()
    assert check.known_through() >= 6


def test_normalize_random_functionals(rng):
    # the lowest grade must pair nonzero with 1, as in the recurrence setup
    made = 0
    while made < 10:
        T = rand_functional(rng)
        c = func_star_action(MOYAL, T, ONE)
        if not c.coeffs or c.valuation != T.valuation - 1:
            continue
        made += 1
        A, Tn = normalize_functional(MOYAL, T, 6)
        check = func_star_action(MOYAL, Tn, ONE)
        assert check == FormalScalar.one()
        assert check.known_through() >= 6


def test_unnormalizable_functional():
    T = FormalFunctional.point_deriv(CTX, (0, 0), (1, 0))
    with pytest.raises(NotNormalizable):
        normalize_functional(MOYAL, T, 4)


# ---- classical genvalue check ----

def test_classical_eigen_examples():
    h = Q * Q + P * P
    assert eigencheck_classical(h, 5, (1, 2)).passed
    assert eigencheck_classical(h, 0, (0, 0)).passed
    rep = eigencheck_classical(Q, 2, (1, 0))
    assert not rep.passed
    assert rep.first_failure["witness"] == "1"


def test_classical_eigen_decides_transcendental_values():
    rep = eigencheck_classical(GAUSS, 0, (1, 0))
    assert not rep.passed
    assert "exp" in rep.first_failure["residual"]
    # a vanishing polynomial factor hides the exponential entirely
    f = (Q + GaussPoly.constant(CTX, -1)) * GAUSS
    assert eigencheck_classical(f, 0, (1, 0)).passed


# ---- bullet genvalue check ----

def test_bullet_eigen_accepts_matching_points():
    assert eigencheck_bullet(fn(Q), 1, FormalFunctional.delta(CTX, (1, 0)), 2).passed
    xi = FormalFunction(CTX, 0, (Q, P))  # q + lam p
    a = FormalScalar.from_coeff_map({0: 1, 1: 2})
    assert eigencheck_bullet(xi, a, FormalFunctional.delta(CTX, (1, 2)), 2).passed


def test_bullet_eigen_rejects_value_mismatch():
    rep = eigencheck_bullet(fn(Q), 2, FormalFunctional.delta(CTX, (1, 0)), 2)
    assert not rep.passed


def test_bullet_eigen_rejects_density_support():
    T = FormalFunctional.density(CTX, GAUSS)
    rep = eigencheck_bullet(fn(Q), 1, T, 2)
    assert not rep.passed
    assert rep.first_failure == {"witness": "1", "residual": "-pi"}


def test_bullet_eigen_solutions_form_a_module():
    # scalar multiples of a solution stay solutions
    T = FormalFunctional.delta(CTX, (1, 0))
    c = FormalScalar.from_coeff_map({0: ExactComplex(2, -3), 1: 5})
    assert eigencheck_bullet(fn(Q), 1, T.scale_by_scalar(c), 2).passed


# ---- star genvalue check ----

def oscillator():
    return fn((Q * Q + P * P).scale(Fraction(1, 2)))


def test_strict_oscillator_spectrum():
    for lam in (Fraction(1), Fraction(1, 2)):
        binding = LambdaBinding.strict(lam)
        for n in range(4):
            W = wigner_state(CTX, n)
            a = FormalScalar.lam(1, Fraction(2 * n + 1, 2))
            rep = eigencheck_star(MOYAL, oscillator(), a, W, 2, binding=binding)
            assert rep.passed, (lam, n)
            assert all(r == "0" for _, r in rep.residuals)
            assert all(c == "0" for _, c in rep.commutation)


def test_strict_oscillator_rejects_wrong_eigenvalues():
    binding = LambdaBinding.strict(Fraction(1))
    W = wigner_state(CTX, 0)
    a = FormalScalar.lam(1, Fraction(3, 2))
    rep = eigencheck_star(MOYAL, oscillator(), a, W, 2, binding=binding)
    assert not rep.passed


def test_formal_star_eigen_support_collapse():
    rep = eigencheck_star(MOYAL, fn(Q), FormalScalar.zero(), DELTA, 1)
    assert not rep.passed
    assert rep.first_failure["witness"] == "p"
    assert rep.first_failure["residual"] == "-1/2*I"


def test_formal_mode_rejects_lambda_widths():
    W = wigner_state(CTX, 1)
    a = FormalScalar.lam(1, Fraction(3, 2))
    with pytest.raises(FormalModeError):
        eigencheck_star(MOYAL, oscillator(), a, W, 1, binding=FORMAL)


# ---- oscillator states ----

def test_laguerre_recurrence_against_sympy():
    import sympy

    x = sympy.Symbol("x")
    for n in range(6):
        got = _laguerre_coeffs(n)
        poly = sympy.laguerre_poly(n, x)
        want = [Fraction(str(poly.coeff(x, k))) for k in range(n + 1)]
        assert got == want


def test_wigner_profiles_match_the_laguerre_expansion():
    import sympy

    x = sympy.Symbol("x")
    for n in range(4):
        W = wigner_state(CTX, n)
        assert W.valuation == -n
        poly = sympy.laguerre_poly(n, x)
        r2 = Q * Q + P * P
        for j in range(n + 1):
            grade = W.coefficient(-j)  # (r^2)^j rides at lam^-j
            c = Fraction(str(poly.coeff(x, j))) * 2 ** j * (-1) ** n
            expect = GaussPoly.constant(CTX, 1)
            for _ in range(j):
                expect = expect * r2
            expect = expect.scale(c)
            if not expect:
                assert grade == ()
                continue
            assert len(grade) == 1
            term = grade[0]
            assert isinstance(term, Density)
            assert term.width_lambda == 1
            assert term.g == expect


def test_wigner_binding_resolves_widths():
    W = wigner_state(CTX, 0)
    bound = bind_functional(W, LambdaBinding.strict(Fraction(1, 2)))
    assert not bound.has_width()
    term = bound.coefficient(0)[0]
    assert [p.alpha for p in term.g.parts] == [2]  # 1 / lam
    with pytest.raises(FormalModeError):
        bind_functional(W, FORMAL)


def test_wigner_state_guards():
    with pytest.raises(NotSupportedForm):
        wigner_state(PhaseContext(2), 0)
    with pytest.raises(ValueError):
        wigner_state(CTX, -1)


# ---- negative regions ----

def test_negative_region_formal():
    f = Q + P.scale(EC_I)
    rep = negative_region(fn(f))
    assert rep.verified
    assert rep.center == (0, 0)
    assert rep.min_value == FormalScalar.lam(1, -1)
    assert rep.area_str == "pi*lam"
    assert rep.to_json()["min"] == "-lam"


def test_negative_region_strict_spot_check():
    f = (Q + GaussPoly.constant(CTX, -1)) \
        + (P + GaussPoly.constant(CTX, Fraction(1, 2))).scale(ExactComplex(0, 2))
    rep = negative_region(fn(f), LambdaBinding.strict(Fraction(1, 3)))
    assert rep.verified
    assert rep.center == (1, Fraction(-1, 2))
    assert rep.min_value == Fraction(-2, 3)
    assert rep.semi_axes_squared == (Fraction(2, 3), Fraction(1, 6))
    assert rep.area_str == "pi*1/3"


def test_negative_region_guards():
    with pytest.raises(NotSupportedForm):
        negative_region(fn(Q))  # no imaginary part
    with pytest.raises(NotSupportedForm):
        negative_region(fn(Q * Q))  # not degree one
    with pytest.raises(NotSupportedForm):
        negative_region(fn(Q.scale(2) + P.scale(EC_I)))  # q coefficient not 1


# ---- JSON ----

def test_functional_json_schema():
    payload = DELTA.to_json()
    assert payload == {
        "valuation": 0,
        "coeffs": [[{"kind": "point_deriv", "point": [[0, 1], [0, 1]],
                     "index": [0, 0], "weight": [1, 1, 0, 1]}]],
        "tail": "exact",
    }
    wj = wigner_state(CTX, 1).to_json()
    assert wj["valuation"] == -1
    kinds = [t["kind"] for grade in wj["coeffs"] for t in grade]
    assert kinds == ["density", "density"]
