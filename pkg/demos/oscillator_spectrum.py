#!/usr/bin/env python3
"""The harmonic oscillator spectrum from the star-genvalue equation.

With lam bound to an actual rational, H * W_n = lam*(n + 1/2) * W_n holds
as an exact identity of functions for the Wigner states W_n, with the
commutation residual H * W_n - W_n * H exactly zero.  No operators, no
Hilbert space: the spectrum lives entirely on phase space.
"""

from fractions import Fraction

from starforge import (FormalFunction, FormalScalar, GaussPoly, LambdaBinding,
                       PhaseContext, eigencheck_star, moyal_family,
                       wigner_state)

ctx = PhaseContext(1)
moyal = moyal_family(ctx)
Q = GaussPoly.coordinate(ctx, "q")
P = GaussPoly.coordinate(ctx, "p")
H = FormalFunction.of((Q * Q + P * P).scale(Fraction(1, 2)))

lam = Fraction(1, 2)
binding = LambdaBinding.strict(lam)
print("H = (q^2 + p^2)/2, lam =", lam)
print()

for n in range(4):
    W = wigner_state(ctx, n)
    value = FormalScalar.lam(1, Fraction(2 * n + 1, 2))  # lam*(n + 1/2)
    rep = eigencheck_star(moyal, H, value, W, 2, binding=binding)
    energy = lam * Fraction(2 * n + 1, 2)
    print("n=%d  H * W = %s * W  ->  %s   (energy %s)"
          % (n, "lam*%d/2" % (2 * n + 1), rep.verdict, energy))
    assert all(r == "0" for _, r in rep.residuals)
    assert all(c == "0" for _, c in rep.commutation)

print()
print("Wrong eigenvalues are rejected, with the first residual shown:")
W = wigner_state(ctx, 0)
wrong = FormalScalar.lam(1, Fraction(3, 2))
rep = eigencheck_star(moyal, H, wrong, W, 2, binding=binding)
print("n=0 against lam*3/2 ->", rep.verdict, rep.first_failure)
