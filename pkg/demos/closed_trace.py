#!/usr/bin/env python3
"""Integration behaves like a matrix trace.

Two exact facts make phase-space integration a trace for the Moyal
product: every correction term B_k integrates to zero (closedness), and
Tr(F * G) = Tr(G * F) order by order in lam.
"""

from fractions import Fraction

from starforge import (FormalFunction, GaussPoly, PhaseContext,
                       closedness_check, moyal_family, render_function,
                       render_scalar, star_mul, star_trace)

ctx = PhaseContext(1)
moyal = moyal_family(ctx)
Q = GaussPoly.coordinate(ctx, "q")
P = GaussPoly.coordinate(ctx, "p")

f = GaussPoly.gaussian(ctx, 1)                       # exp(-r^2)
g = (Q * Q + P).scale(Fraction(1, 3))                # (q^2 + p)/3

print("f =", f)
print("g =", g)
print()

rep = closedness_check(moyal, f, g, 5)
print("closedness through k = 5:", "closed" if rep.closed else "NOT closed")
for k in range(1, 6):
    print("  integral of B_%d(f, g) = %s" % (k, rep.values[k]))
print("  integral of B_0(f, g) =", rep.b0_integral,
      "= pointwise integral of f*g:", rep.pointwise_integral)
print()

F = FormalFunction.of(f)
G = FormalFunction.of(GaussPoly.gaussian(ctx, Fraction(1, 2)))
left = star_trace(moyal, star_mul(moyal, F, G, 5))
right = star_trace(moyal, star_mul(moyal, G, F, 5))
print("F =", render_function(F))
print("G =", render_function(G))
print("Tr(F * G) =", render_scalar(left))
print("Tr(G * F) =", render_scalar(right))
print("equal through lam^4:", left == right)
