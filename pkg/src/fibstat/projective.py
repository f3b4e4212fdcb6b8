"""Rational points of bounded height on projective space, and their reductions.

A point of P^n(Q) is stored as its primitive integer vector with first nonzero
coordinate positive; its height is the sup-norm of that vector.  The module
enumerates all points of height <= B, counts them exactly (including counts
restricted to congruence classes mod a squarefree Q), and computes the size of
P^n(Z/Q) for arbitrary moduli.

Counts at large B use Moebius inversion over the content of integer vectors,
which agrees with the streaming enumerator exactly; tests pin the two against
each other at small B.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.special import zeta

from .arith import factorize, moebius_up_to

__all__ = [
    "ProjPoint",
    "ResidueClass",
    "cn",
    "proj_size",
    "enumerate_points",
    "point_slabs",
    "count_points",
    "residue_classes",
    "reduce_point",
    "count_congruence",
]


def cn(n: int) -> float:
    """Leading density 2^n / zeta(n+1) of height-ordered points of P^n(Q)."""
    return 2.0**n / float(zeta(n + 1))


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^n(Q) in canonical primitive form."""

    coords: tuple[int, ...]
    height: int

    @staticmethod
    def from_vector(vec) -> "ProjPoint":
        coords = tuple(int(v) for v in vec)
        if not coords or all(v == 0 for v in coords):
            raise ValueError("zero vector does not define a projective point")
        g = math.gcd(*coords)
        coords = tuple(v // g for v in coords)
        for v in coords:
            if v != 0:
                if v < 0:
                    coords = tuple(-w for w in coords)
                break
        return ProjPoint(coords, max(abs(v) for v in coords))

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __str__(self) -> str:
        return "(" + ":".join(str(v) for v in self.coords) + ")"


def _canonical_residue(coords: tuple[int, ...], modulus: int) -> tuple[int, ...]:
    # Scale by the unique unit making, for each p | modulus, the first coordinate
    # that is a unit mod p congruent to 1.  CRT glues the per-prime scalings.
    lam = 0
    mod_acc = 1
    for p in factorize(modulus):
        first = next((v % p for v in coords if v % p != 0), None)
        if first is None:
            raise ValueError("vector not primitive modulo %d" % p)
        inv = pow(first, p - 2, p) if p > 2 else first % 2
        # CRT: lam == inv (mod p), lam == previous (mod mod_acc)
        g, x, _ = _egcd(mod_acc, p)
        assert g == 1
        lam = (lam + mod_acc * ((x * (inv - lam)) % p)) % (mod_acc * p)
        mod_acc *= p
    return tuple((lam * v) % modulus for v in coords)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


@dataclass(frozen=True)
class ResidueClass:
    """A point of P^n(Z/Q), canonicalized up to unit scaling (Q squarefree)."""

    modulus: int
    coords: tuple[int, ...]

    @staticmethod
    def from_vector(vec, modulus: int) -> "ResidueClass":
        if modulus < 2:
            raise ValueError("modulus must be >= 2")
        if any(e > 1 for e in factorize(modulus).values()):
            raise ValueError("residue classes require a squarefree modulus")
        coords = tuple(int(v) % modulus for v in vec)
        return ResidueClass(modulus, _canonical_residue(coords, modulus))


def proj_size(n: int, Q: int) -> int:
    """#P^n(Z/Q), multiplicative in Q; p^k contributes p^{n(k-1)}(p^{n+1}-1)/(p-1).

    Exact for every Q >= 1 (Python integers never overflow, so the result is
    always representable).
    """
    if n < 0 or Q < 1:
        raise ValueError("need n >= 0 and Q >= 1")
    size = 1
    for p, k in factorize(Q).items():
        size *= p ** (n * (k - 1)) * (p ** (n + 1) - 1) // (p - 1)
    return size


def enumerate_points(n: int, B: int) -> Iterator[ProjPoint]:
    """Stream every point of P^n(Q) with height <= B, each exactly once.

    Order: by the number of leading zero coordinates, then the (positive)
    leading coordinate, then the remaining coordinates lexicographically over
    [-B, B].  O(1) memory.
    """
    if n < 1 or B < 1:
        raise ValueError("need n >= 1 and B >= 1")
    for zeros in range(n + 1):
        tail_len = n - zeros
        for lead in range(1, B + 1):
            if tail_len == 0:
                if lead == 1:
                    yield ProjPoint((0,) * zeros + (1,), 1)
                continue
            for tail in itertools.product(range(-B, B + 1), repeat=tail_len):
                if math.gcd(lead, *tail) == 1:
                    coords = (0,) * zeros + (lead,) + tail
                    yield ProjPoint(coords, max(lead, max(abs(t) for t in tail)))


def point_slabs(n: int, B: int) -> Iterator[np.ndarray]:
    """Canonical primitive vectors of height <= B in numpy slabs (N, n+1).

    Same point set as enumerate_points, materialized slab-by-slab (one slab per
    leading coordinate value) for vectorized consumers.
    """
    if n < 1 or B < 1:
        raise ValueError("need n >= 1 and B >= 1")
    side = np.arange(-B, B + 1, dtype=np.int64)
    for zeros in range(n + 1):
        tail_len = n - zeros
        if tail_len == 0:
            yield np.array([[0] * zeros + [1]], dtype=np.int64)
            continue
        grids = np.meshgrid(*([side] * tail_len), indexing="ij")
        tails = np.stack([g.ravel() for g in grids], axis=1)
        for lead in range(1, B + 1):
            g = np.gcd.reduce(tails, axis=1)
            mask = np.gcd(g, lead) == 1
            sel = tails[mask]
            out = np.empty((sel.shape[0], n + 1), dtype=np.int64)
            out[:, :zeros] = 0
            out[:, zeros] = lead
            out[:, zeros + 1 :] = sel
            yield out


def count_points(n: int, B: int) -> int:
    """Exact #{x in P^n(Q) : H(x) <= B} by Moebius inversion over contents."""
    if n < 1 or B < 1:
        raise ValueError("need n >= 1 and B >= 1")
    mu = moebius_up_to(B)
    total = 0
    for k in range(1, B + 1):
        m = int(mu[k])
        if m == 0:
            continue
        box = 2 * (B // k) + 1
        total += m * (box ** (n + 1) - 1)
    assert total % 2 == 0
    return total // 2


def residue_classes(n: int, Q: int) -> list[ResidueClass]:
    """All points of P^n(Z/Q) for squarefree Q, in canonical form."""
    fac = factorize(Q)
    if any(e > 1 for e in fac.values()):
        raise ValueError("residue classes require a squarefree modulus")
    primes = sorted(fac)
    per_prime: list[list[tuple[int, ...]]] = []
    for p in primes:
        reps = []
        for i in range(n + 1):
            for tail in itertools.product(range(p), repeat=n - i):
                reps.append((0,) * i + (1,) + tail)
        per_prime.append(reps)
    classes = []
    for combo in itertools.product(*per_prime):
        coords = []
        for j in range(n + 1):
            x, acc = 0, 1
            for p, rep in zip(primes, combo):
                g, inv, _ = _egcd(acc, p)
                x = (x + acc * ((inv * (rep[j] - x)) % p)) % (acc * p)
                acc *= p
            coords.append(x)
        classes.append(ResidueClass(Q, tuple(coords)))
    return classes


def reduce_point(point: ProjPoint, Q: int) -> ResidueClass:
    """Reduction of a point mod squarefree Q; primitivity is automatic."""
    return ResidueClass.from_vector(point.coords, Q)


def count_congruence(
    n: int, B: int, Q: int, predicate: Callable[[ResidueClass], bool]
) -> tuple[int, float, float]:
    """Exact count of height <= B points whose reduction mod Q satisfies predicate.

    Returns (count, main_term, relative_error) where main_term is the density
    heuristic c_n * (#selected classes / #P^n(Z/Q)) * B^{n+1} and
    relative_error = |count - main_term| / main_term (0 when both vanish, inf
    if the main term vanishes but the count does not).
    """
    if B < 2:
        raise ValueError("need B >= 2")
    classes = residue_classes(n, Q)
    selected = [cls for cls in classes if predicate(cls)]
    upsilon = len(selected)
    main = cn(n) * (upsilon / proj_size(n, Q)) * float(B) ** (n + 1)
    if upsilon == 0:
        return 0, main, 0.0
    units = [u for u in range(1, Q) if math.gcd(u, Q) == 1]
    cone = np.array(
        [[(u * v) % Q for v in cls.coords] for cls in selected for u in units],
        dtype=np.int64,
    )
    mu = moebius_up_to(B)
    total = 0
    for k in range(1, B + 1):
        m = int(mu[k])
        if m == 0 or math.gcd(k, Q) != 1:
            continue
        T = B // k
        residue_counts = np.array(
            [(T - c) // Q + (T + c) // Q + 1 for c in range(Q)], dtype=np.int64
        )
        per_vec = residue_counts[cone].prod(axis=1)
        total += m * int(per_vec.sum())
    assert total % 2 == 0
    count = total // 2
    rel = abs(count - main) / main if main > 0 else (0.0 if count == 0 else math.inf)
    return count, main, rel
