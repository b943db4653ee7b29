#!/usr/bin/env python3
"""Where a quantum 'probability density' goes negative.

The star square of g = (q - q0) + i a (p - p0) is not a square at all:
it undershoots zero on an ellipse around (q0, p0) whose area is pi*lam
no matter how the ellipse is squeezed.
"""

from fractions import Fraction

from starforge import (ExactComplex, FormalFunction, GaussPoly, LambdaBinding,
                       PhaseContext, moyal_family, negative_region,
                       render_function, star_mul)

ctx = PhaseContext(1)
moyal = moyal_family(ctx)
Q = GaussPoly.coordinate(ctx, "q")
P = GaussPoly.coordinate(ctx, "p")

a, q0, p0 = 2, Fraction(1), Fraction(-1, 2)
dq = Q + GaussPoly.constant(ctx, -q0)
dp = P + GaussPoly.constant(ctx, -p0)
g = FormalFunction.of(dq + dp.scale(ExactComplex(0, a)))

print("g           =", render_function(g))
print("conj(g)     =", render_function(g.conj()))

square = star_mul(moyal, g.conj(), g)
print("conj(g) * g =", render_function(square))
print()
print("Pointwise, conj(g)*g would be a sum of squares, nonnegative.")
print("The star product tacks on the constant -%d*lam." % a)
print()

report = negative_region(g)
print("formal negative region:", report.to_json())
print()

lam = Fraction(1, 3)
report = negative_region(g, LambdaBinding.strict(lam))
print("strict lam = %s:" % lam)
print("  min value  %s at center (%s, %s)" % (report.min_value,
                                              report.center[0],
                                              report.center[1]))
print("  semi-axes squared: %s, %s" % report.semi_axes_squared)
print("  area:", report.area_str, " (= pi*lam, independent of a)")
