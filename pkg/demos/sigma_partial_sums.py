"""
Local densities and their logarithmic growth
============================================

The conic family's sigma_p is exact: 3(p+1) / (2(p^2+p+1)), about (3/2)/p.
Partial sums over p <= x then grow like (3/2) log log x plus a constant,
and the fit below recovers both the slope and a stable constant term.
"""

import math

from fibstat.families import diagonal_conics
from fibstat.stats import build_sigma_table, sigma_partial_sums

fam = diagonal_conics()

tab = build_sigma_table(fam, 100_000)
print(f"{len(tab.entries)} exact entries, beta fit = {tab.beta_fit:.4f}")

fit = sigma_partial_sums(tab.entries, fam.Delta)
print(f"free regression: slope = {fit.slope:.4f} (Delta = 1.5), "
      f"intercept = {fit.intercept:.4f}")
print(f"residual envelope: |resid| * log x <= {fit.envelope_constant:.4f}")

# ----------------------------------------------------------------------
# The fit along its cutoff grid.

print(f"{'x':>8s} {'sum':>9s} {'1.5 llx + beta':>14s} {'resid':>9s}")
for x in sorted(fit.partial_sums):
    s = fit.partial_sums[x]
    model = 1.5 * math.log(math.log(x)) + fit.beta
    print(f"{x:8d} {s:9.4f} {model:14.4f} {s - model:+9.5f}")

# ----------------------------------------------------------------------
# The classic analogue: sigma_p = 1/p, Delta = 1, beta -> Mertens' constant.

from fractions import Fraction

from fibstat.arith import primes_up_to

classic = {int(p): Fraction(1, int(p)) for p in primes_up_to(100_000)}
cfit = sigma_partial_sums(classic, 1)
print(f"classic omega: slope = {cfit.slope:.4f}, beta = {cfit.beta:.4f} "
      "(Mertens: 0.2615)")
