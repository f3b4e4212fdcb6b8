"""
A first tour: where does a conic fail to have points?
=====================================================

For coefficients (a, b, c) the fibre is a x^2 + b y^2 = c z^2.  Solubility
over Q_v is one Hilbert symbol, so everything here is exact and instant.
"""

from fractions import Fraction

from fibstat.families import diagonal_conics, omega_formula_conics, omega_pi
from fibstat.localsolve import INF, conic_soluble, hilbert
from fibstat.projective import ProjPoint

fam = diagonal_conics()

# ----------------------------------------------------------------------
# One fibre in detail: x^2 + y^2 = 21 z^2

a, b, c = 1, 1, 21
for v in (2, 3, 5, 7, INF):
    name = "inf" if v == INF else v
    print(f"  Q_{name}: {'soluble' if conic_soluble(a, b, c, v) else 'INSOLUBLE'}")

# The full count over all places except infinity:
rec = omega_pi(fam, ProjPoint.from_vector((a, b, c)), S=(INF,))
print(f"omega(1, 1, 21) = {rec.omega} at places {sorted(rec.insoluble_places)}")

# ----------------------------------------------------------------------
# Insoluble places come in pairs (Hilbert reciprocity), so with S empty
# every fibre has even omega.

for coeffs in ((1, 1, 21), (5, 13, 1), (-3, 5, 17), (1, 2, 7)):
    rec = omega_pi(fam, ProjPoint.from_vector(coeffs), S=())
    print(f"S = {{}}: omega{coeffs} = {rec.omega}  (even, always)")

# ----------------------------------------------------------------------
# For squarefree pairwise-coprime coefficients, each 1 mod 4, a closed
# Legendre-symbol formula gives omega with no solubility engine at all.

for coeffs in ((1, 5, 21), (5, 13, 33), (1, 13, 57), (-3, 1, 5)):
    try:
        val = omega_formula_conics(*coeffs)
    except ValueError as exc:
        print(f"formula{coeffs}: rejected ({exc})")
        continue
    rec = omega_pi(fam, ProjPoint.from_vector(coeffs), S=(INF,))
    print(f"formula{coeffs} = {val}, engine agrees: {val == rec.omega}")

# ----------------------------------------------------------------------
# The local densities behind the statistics: sigma_p is the exact chance
# that the fibre over a random mod-p point degenerates.

from fibstat.families import conic_sigma_formula

print("sigma_p = 3(p+1) / (2(p^2+p+1)):")
for p in (3, 5, 7, 11, 97):
    s = conic_sigma_formula(p)
    print(f"  p={p:3d}: {s} = {float(s):.5f}  (3/p bound: {float(Fraction(3, p)):.5f})")
