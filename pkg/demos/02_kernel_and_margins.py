"""Interval feature states, their kernel, and the ground-truth margin.

Each residue x maps to the uniform superposition over the 2^k exponents
starting at log x. Two such states overlap exactly as much as their exponent
intervals do, and a point is separated with margin 1 unless its interval
straddles the concept boundary.
"""

from svmqke import (
    Concept,
    FeatureConfig,
    GroupParams,
    brute_force_kernel,
    discrete_log,
    halfspace_overlap,
    kernel_exact,
    label,
)
from svmqke.diagnostics import ground_truth_margin, margin_census

params = GroupParams(23, 5)
cfg = FeatureConfig(2, params)
concept = Concept(1, params)

print("kernel(5, 2) =", kernel_exact(5, 2, cfg), " brute force:", round(brute_force_kernel(5, 2, cfg), 12))
print("kernel(5, 18) =", kernel_exact(5, 18, cfg))

print("\n x  log  overlap-with-halfspace  margin")
for x in range(1, params.p):
    margin = ground_truth_margin(x, label(x, concept), concept, cfg)
    print(f"{x:>2} {discrete_log(x, params):>4}  {halfspace_overlap(x, concept, cfg):>10.4f}  {str(margin):>8}")

report = margin_census(concept, cfg)
print("\nviolating fraction:", report.violating_fraction, " delta = 2^(k+1)/p:", report.delta_paper)
