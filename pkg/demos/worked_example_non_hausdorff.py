"""A three-element inverse semigroup whose groupoid of germs fails to be
Hausdorff at exactly one point, yet still carries a faithful conditional
expectation onto its unit space.

The semigroup S = {e, 1, s} has zero element e, unit 1 and an involution s
with s*s = 1.  It acts trivially on [-1, 1] with U_e = [-1, 0): over the
left half all three germs coincide, over [0, 1] the germs of 1 and s stay
distinct, and at 0 they cannot be separated.
"""

from fractions import Fraction as F

from germlab.cartanlab import (
    GridModel,
    WeightFunction,
    build_worked_example,
    norm_candidates,
    verify_conditional_expectation,
)
from germlab.germgpd import is_hausdorff

S, action, bundle, groupoid = build_worked_example(grid_resolution=101)

print("semigroup:", S.elements, "zero =", S.zero)
print("multiplication table:")
for a in S.elements:
    print("   ", [S.mul(a, b) for b in S.elements])

print("\ngerm cells (canonical representative, interval):")
for cell in groupoid.cells:
    p = cell.piece
    lo = "[" if p.lo_closed else "("
    hi = "]" if p.hi_closed else ")"
    print(f"    [{cell.s}, x]  for x in {lo}{p.lo}, {p.hi}{hi}")

print("\nover the shared region the three germs collapse:")
x = F(-1, 2)
print(f"    [e,{x}] = [1,{x}] = [s,{x}] :",
      groupoid.germ("e", x) == groupoid.germ("1", x) == groupoid.germ("s", x))

ok, witnesses = is_hausdorff(groupoid)
print("\nHausdorff:", ok)
for a, b in witnesses:
    print(f"    inseparable pair: {a} vs {b}")

print("\nconditional expectation onto the unit functions, weight p(x) = 1 - x/2:")
gm = GridModel(n=101)
p = WeightFunction.from_callable(gm, lambda x: 1 - F(x) / 2)
report = verify_conditional_expectation(gm, p, bundle=bundle)
for name in ("idempotent", "contractive", "positive", "bimodular", "faithful"):
    print(f"    {name:12s}: {getattr(report, name)}")

print("\nthe same suite with p = 1 loses faithfulness (upper level invisible):")
p1 = WeightFunction.from_callable(gm, lambda x: 1)
bad = verify_conditional_expectation(gm, p1)
print("    faithful:", bad.faithful)

print("\nnorm candidates for 1*delta_1 + 1*delta_s (equality not asserted):")
terms = {"1": bundle.fiber_basis("1")[0], "s": bundle.fiber_basis("s")[0]}
print("   ", norm_candidates(gm, bundle, terms))
