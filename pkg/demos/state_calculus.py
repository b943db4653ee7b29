#!/usr/bin/env python3
"""Which functionals are states: real, positive, normalized.

A delta at the origin is a perfectly good classical state but fails
positivity over the Moyal product at the concrete witness q + i*p, with
the exact value -1.  A Gaussian density passes every check once it is
normalized, and the normalizer is an honest Laurent scalar.
"""

from fractions import Fraction

from starforge import (FormalFunction, FormalFunctional, FormalScalar,
                       GaussPoly, PhaseContext, EC_I, func_star_action,
                       moyal_family, normalize_functional, positivity_check,
                       reality_check, render_scalar)

ctx = PhaseContext(1)
moyal = moyal_family(ctx)
Q = GaussPoly.coordinate(ctx, "q")
P = GaussPoly.coordinate(ctx, "p")
ONE = FormalFunction.one(ctx)
real_wits = [ONE + FormalFunction.of(Q), FormalFunction.of(P * P)]
witnesses = real_wits + [FormalFunction.of(Q)
                         + FormalFunction.of(P).scale(EC_I)]

print("--- the delta functional ---")
delta = FormalFunctional.delta(ctx)
print("real:", reality_check(delta, real_wits).verdict)
rep = positivity_check(moyal, delta, witnesses)
print("positive:", rep.verdict)
print("  counterexample:", rep.negativity)
print()

print("--- the Gaussian density ---")
T = FormalFunctional.density(ctx, GaussPoly.gaussian(ctx, 1))
small = tuple(Fraction(x) for x in ("1/10", "1/2", "1"))
print("real:", reality_check(T, real_wits).verdict)
print("positive (lam <= 1):",
      positivity_check(moyal, T, witnesses, lambda_samples=small).verdict)
# a width-1 Gaussian is only a state while lam stays within its width:
rep = positivity_check(moyal, T, witnesses, lambda_samples=(Fraction(2),))
print("positive at lam = 2:", rep.verdict, "->", rep.negativity)
print("<T, 1>_* =", render_scalar(func_star_action(moyal, T, ONE)),
      " (not yet normalized)")

A, Tn = normalize_functional(moyal, T, 6)
print("normalizer A =", render_scalar(A))
check = func_star_action(moyal, Tn, ONE)
print("<A.T, 1>_* =", render_scalar(check))
print("still positive:",
      positivity_check(moyal, Tn, witnesses, lambda_samples=small).verdict)
print()

print("--- a normalizer with an actual series tail ---")
T = FormalFunctional.delta(ctx).scale_by_scalar(
    FormalScalar.from_coeff_map({0: 2, 1: 1}))
A, Tn = normalize_functional(moyal, T, 6)
print("for (2 + lam) delta:  A =", render_scalar(A))
print("check:", render_scalar(func_star_action(moyal, Tn, ONE)))
