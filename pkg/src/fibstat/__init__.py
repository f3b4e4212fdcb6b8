"""fibstat: local solubility statistics for families of varieties.

For a family of projective varieties fibred over P^n(Q), the library counts,
for each rational point x of the base, the primes p at which the fibre has no
p-adic point, and studies the distribution of that count as the height bound
grows: a normal law with mean and variance Delta * log log H when the family
has positive Delta, and a discrete limit law tau(j) when Delta = 0.

Modules:
    projective   points of bounded height on P^n(Q), exact counts, reductions
    localsolve   Legendre/Hilbert symbols, p-adic solubility search
    grouptheory  component actions, delta invariants
    families     concrete fibrations (diagonal conics, diagonal cubics)
    stats        moment statistics, normal-law distances, discrete law
    cli          command-line interface over the above
"""

__version__ = "0.1.0"
