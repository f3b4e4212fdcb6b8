"""Concrete families of varieties packaged as data.

Two built-in fibrations over projective coefficient space: diagonal plane
conics a x^2 + b y^2 = c z^2 and diagonal cubic surfaces
y_0 x_0^3 + y_1 x_1^3 + y_2 x_2^3 + y_3 x_3^3 = 0.  A FamilyDescriptor
bundles everything the statistics layer needs: the discriminant form f
cutting out the bad fibres, a bad-prime bound A, the growth constant Delta
(validated against the declared divisor actions), the per-place
insolubility test theta, and a smooth-fibre test.

The module also computes the local densities sigma_p (exact residue
classification for conics, Monte Carlo over residue disks for anything
else), counts obstructed places per point (omega), and calibrates A
empirically.

theta(x, v) answers "does the fibre over x have NO Q_v-point"; for the
cubic family an undecidable point raises Undecided rather than guessing,
and omega_pi turns that into a tainted record.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .arith import factorize, is_prime, primes_up_to, valuation
from .grouptheory import ComponentAction, delta_total, load_bundled_actions
from .localsolve import (
    INF,
    HomogeneousForm,
    Place,
    Solubility,
    conic_soluble,
    hilbert,
    legendre,
    padic_point_search,
    real_soluble,
)
from .projective import ProjPoint, point_slabs, proj_size

__all__ = [
    "Undecided",
    "ObstructionRecord",
    "FamilyDescriptor",
    "SigmaTable",
    "DiskDensityEstimate",
    "CalibrationReport",
    "diagonal_conics",
    "diagonal_cubics",
    "family_by_name",
    "FAMILY_NAMES",
    "omega_pi",
    "omega_formula_conics",
    "sigma_exact",
    "sigma_empirical",
    "conic_two_adic_density",
    "conic_sigma_formula",
    "conic_insoluble_density",
    "calibrate_A",
    "conic_insoluble_grid",
    "CubicDecider",
    "cube_class",
    "cubic_criterion",
]


class Undecided(Exception):
    """The decision engine could not certify solubility either way."""

    def __init__(self, coords, place, detail=""):
        self.coords = tuple(coords)
        self.place = place
        super().__init__(
            f"solubility undecided at place {place} for {self.coords}"
            + (f": {detail}" if detail else "")
        )


@dataclass(frozen=True)
class ObstructionRecord:
    """Insoluble places of one fibre: the primes (and possibly the real
    place) at which the fibre has no local point, omega = their count.

    tainted means some candidate place came back undecided; such records
    are excluded from exact statistics and counted separately.
    """

    point: ProjPoint
    insoluble_places: tuple[Place, ...]
    omega: int
    tainted: bool = False

    def __post_init__(self):
        if self.omega != len(self.insoluble_places):
            raise ValueError("omega must count insoluble_places")
        if list(self.insoluble_places) != sorted(self.insoluble_places):
            raise ValueError("insoluble_places must be sorted")


@dataclass(frozen=True)
class FamilyDescriptor:
    """A fibration over P^n presented as data.

    f is the discriminant form: away from f = 0 (and primes <= A) fibres
    are everywhere locally soluble.  Delta is the declared growth constant,
    checked at construction against the divisor action data.
    """

    name: str
    n: int
    f: HomogeneousForm
    degree_f: int
    A: int
    Delta: Fraction
    theta: Callable[[Sequence[int], Place], bool]
    smooth: Callable[[Sequence[int]], bool]
    divisors: tuple[ComponentAction, ...]
    nonsplit: Optional[Callable[[Sequence[int], int], bool]] = None

    def __post_init__(self):
        if self.f.nvars != self.n + 1 or self.f.degree != self.degree_f:
            raise ValueError("discriminant form shape mismatch")
        if self.A < 2:
            raise ValueError("bad-prime bound must be at least 2")
        declared = delta_total(self.divisors)
        if declared != self.Delta:
            raise ValueError(
                f"Delta {self.Delta} disagrees with divisor data {declared}"
            )


@dataclass(frozen=True)
class SigmaTable:
    """Local densities sigma_p with their partial sums along cutoffs.

    entries maps p to an exact Fraction (residue classification) or a float
    estimate; estimate_samples records the sample count behind any
    non-exact entry.  partial_sums[B] = sum of sigma_p over p <= B, and
    beta_fit is the fitted constant term of partial_sum(B) ~
    Delta log log B + beta.
    """

    entries: dict[int, Fraction | float]
    partial_sums: dict[int, float]
    beta_fit: float
    estimate_samples: dict[int, int] = field(default_factory=dict)


def _coords(x) -> tuple[int, ...]:
    if isinstance(x, ProjPoint):
        return x.coords
    return tuple(int(v) for v in x)


# ---------------------------------------------------------------------------
# diagonal conics


def _conic_theta(x, place: Place) -> bool:
    a, b, c = _coords(x)
    if place == INF:
        return not real_soluble("diagonal_conics", (a, b, c))
    return not conic_soluble(a, b, c, place)


def _conic_smooth(x) -> bool:
    a, b, c = _coords(x)
    return a * b * c != 0


def _conic_nonsplit(res: Sequence[int], p: int) -> bool:
    """Is the conic fibre over (a:b:c) in P^2(F_p) non-split?  p odd.

    Rank 3 is a smooth conic (split); rank 2 splits into two lines defined
    over F_p iff -(product of the nonzero coefficients on the relevant
    side) is a square; rank <= 1 is a double line, never split.
    """
    p = int(p)
    if p == 2:
        raise ValueError("non-split classification implemented for odd p only")
    # int coercion matters: numpy bools would turn the zero count into an "or"
    a, b, c = (int(v) % p for v in res)
    zeros = (a == 0) + (b == 0) + (c == 0)
    if zeros == 0:
        return False
    if zeros >= 2:
        return True
    # rank 2: a x^2 + b y^2 - c z^2 restricted to the two live variables
    if a == 0:
        disc = b * (-c)
    elif b == 0:
        disc = a * (-c)
    else:
        disc = a * b
    return legendre(-disc % p, p) == -1


@functools.lru_cache(maxsize=None)
def diagonal_conics() -> FamilyDescriptor:
    """The family a x^2 + b y^2 = c z^2 over the coefficient plane."""
    f = HomogeneousForm(3, 3, ((1, (1, 1, 1)),))
    return FamilyDescriptor(
        name="diagonal_conics",
        n=2,
        f=f,
        degree_f=3,
        A=2,
        Delta=Fraction(3, 2),
        theta=_conic_theta,
        smooth=_conic_smooth,
        divisors=tuple(load_bundled_actions("conic_action.txt").values()),
        nonsplit=_conic_nonsplit,
    )


# ---------------------------------------------------------------------------
# vectorized conic insolubility over coefficient arrays


def _strip(col: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    # returns (valuation, unit part); col entries must be nonzero
    col = col.astype(np.int64, copy=True)
    val = np.zeros(col.shape, dtype=np.int64)
    idx = np.nonzero(col % p == 0)[0]
    while idx.size:
        col[idx] //= p
        val[idx] += 1
        idx = idx[col[idx] % p == 0]
    return val, col


def conic_insoluble_grid(coeffs: np.ndarray, place: Place) -> np.ndarray:
    """Vectorized theta for the conic family: a boolean per coefficient row.

    coeffs is an (N, 3) integer array with no zero entries.  Agrees with
    the scalar Hilbert-symbol route entry by entry.
    """
    coeffs = np.asarray(coeffs, dtype=np.int64)
    a, b, c = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2]
    if place == INF:
        return ((a > 0) & (b > 0) & (c < 0)) | ((a < 0) & (b < 0) & (c > 0))
    p = int(place)
    va, ua = _strip(a, p)
    vb, ub = _strip(b, p)
    vc, uc = _strip(c, p)
    x1 = (va ^ vc) & 1
    x2 = (vb ^ vc) & 1
    if p == 2:
        u1 = (ua % 8) * (uc % 8) % 8
        u2 = (ub % 8) * (uc % 8) % 8
        eps1 = (u1 % 4 == 3).astype(np.int64)
        eps2 = (u2 % 4 == 3).astype(np.int64)
        om1 = ((u1 == 3) | (u1 == 5)).astype(np.int64)
        om2 = ((u2 == 3) | (u2 == 5)).astype(np.int64)
        return (eps1 * eps2 + x1 * om2 + x2 * om1) % 2 == 1
    qr = np.zeros(p, dtype=bool)
    r = np.arange(1, p, dtype=np.int64)
    qr[r * r % p] = True
    s1 = ~qr[(ua % p) * (uc % p) % p]
    s2 = ~qr[(ub % p) * (uc % p) % p]
    sign = (x1 & x2) * (p % 4 == 3) + x2 * s1 + x1 * s2
    return sign % 2 == 1


# ---------------------------------------------------------------------------
# diagonal cubics: canonical coefficient classes and a cached decision engine

_CUBIC_FORM_DEGREE = 3


def cube_class(u: int, p: int) -> int:
    """Cube class of the unit u in Z_p^* / cubes, as 0, 1 or 2.

    For p = 2 mod 3 every unit is a cube (class 0).  For p = 1 mod 3 the
    class is the discrete log of u^((p-1)/3) along the powers of the
    smallest non-cube.  For p = 3 the class is read off mod 9.
    """
    u = int(u)
    if u % p == 0:
        raise ValueError("cube class needs a p-adic unit")
    if p == 3:
        return {1: 0, 8: 0, 2: 1, 7: 1, 4: 2, 5: 2}[u % 9]
    if p % 3 != 1:
        return 0
    e = (p - 1) // 3
    t = pow(u, e, p)
    if t == 1:
        return 0
    g = _smallest_noncube(p)
    return 1 if t == pow(g, e, p) else 2


@functools.lru_cache(maxsize=None)
def _smallest_noncube(p: int) -> int:
    for g in range(2, p):
        if pow(g, (p - 1) // 3, p) != 1:
            return g
    raise ValueError(f"no non-cube mod {p}")


def cubic_criterion(coeffs: Sequence[int], p: int) -> bool:
    """Congruence test that forces p-adic insolubility of a diagonal cubic.

    For a prime p = 1 mod 3 and nonzero integer coefficients (y1..y4):
    up to reordering, two coefficients are p-units, the other two have
    valuation exactly 1, and within each pair the unit parts lie in
    different cube classes.  (Minus a ratio of same-class units is a cube
    because -1 is one, so signs never matter.)  Sufficient, not necessary.
    """
    p = int(p)
    if not is_prime(p) or p % 3 != 1:
        raise ValueError("criterion applies to primes p = 1 mod 3")
    cs = [int(v) for v in coeffs]
    if len(cs) != 4 or any(v == 0 for v in cs):
        raise ValueError("need four nonzero coefficients")
    units, carries = [], []
    for v in cs:
        w = valuation(abs(v), p)
        if w == 0:
            units.append(v % p)
        elif w == 1:
            carries.append((v // p**w) % p)
    if len(units) != 2 or len(carries) != 2:
        return False
    return (cube_class(units[0], p) != cube_class(units[1], p)
            and cube_class(carries[0], p) != cube_class(carries[1], p))


def _class_rep(c: int, p: int) -> int:
    if c == 0:
        return 1
    g = 2 if p == 3 else _smallest_noncube(p)
    return g if c == 1 else g * g


def _digit(v: int, c: int) -> int:
    return (v % 3) * 3 + c


@functools.lru_cache(maxsize=1)
def _canonical_digit_codes() -> np.ndarray:
    """canonical[code] for all base-9 digit 4-tuples (v mod 3, cube class).

    Two coefficient vectors land in the same canonical code exactly when
    they differ by coordinate permutation, a common scaling (shifting every
    valuation by s), a common unit factor (shifting every class by t), and
    per-coordinate unit-cube factors.  Each move is a bijection on
    solution sets, so solubility is a function of the canonical code.
    """
    table = np.empty(9**4, dtype=np.int64)
    for code in range(9**4):
        digits = [(code // 9**i) % 9 for i in range(4)]
        best = None
        for s in range(3):
            for t in range(3):
                moved = sorted(
                    (((d // 3 + s) % 3) * 3 + (d % 3 + t) % 3) for d in digits
                )
                packed = sum(d * 9**i for i, d in enumerate(moved))
                if best is None or packed < best:
                    best = packed
        table[code] = best
    return table


class CubicDecider:
    """Per-prime solubility decisions for sum y_i x_i^3 = 0, cached by
    canonical coefficient class.

    The canonical class of (y_0..y_3) records each coordinate's valuation
    mod 3 and unit cube class, up to permutation and common scalings; the
    p-adic search engine runs once per class on a small representative.
    """

    def __init__(self, p: int, depth_bound: Optional[int] = None, node_budget: int = 200_000):
        if not is_prime(p):
            raise ValueError("p must be prime")
        self.p = int(p)
        self.depth_bound = depth_bound
        self.node_budget = node_budget
        self._by_code: dict[int, Solubility] = {}

    # -- scalar path

    def _code_of(self, coords: Sequence[int]) -> int:
        p = self.p
        digits = []
        for y in coords:
            y = int(y)
            if y == 0:
                raise ValueError("cubic coefficients must be nonzero")
            v = valuation(y, p)
            digits.append(_digit(v, cube_class(y // p**v, p)))
        code = sum(d * 9**i for i, d in enumerate(digits))
        return int(_canonical_digit_codes()[code])

    def _rep_coeffs(self, code: int) -> tuple[int, ...]:
        p = self.p
        out = []
        for i in range(4):
            d = (code // 9**i) % 9
            out.append(p ** (d // 3) * _class_rep(d % 3, p))
        return tuple(out)

    def _decide_code(self, code: int) -> Solubility:
        got = self._by_code.get(code)
        if got is None:
            form = HomogeneousForm.diagonal(self._rep_coeffs(code), _CUBIC_FORM_DEGREE)
            verdict = padic_point_search(
                form, self.p, depth_bound=self.depth_bound, node_budget=self.node_budget
            )
            got = verdict.status
            self._by_code[code] = got
        return got

    def decide(self, coords: Sequence[int]) -> Solubility:
        return self._decide_code(self._code_of(coords))

    # -- vectorized path

    def _class_table(self) -> np.ndarray:
        p = self.p
        if p == 3:
            table = np.full(9, -1, dtype=np.int64)
            for u, c in ((1, 0), (8, 0), (2, 1), (7, 1), (4, 2), (5, 2)):
                table[u] = c
            return table
        table = np.zeros(p, dtype=np.int64)
        if p % 3 == 1:
            for u in range(1, p):
                table[u] = cube_class(u, p)
        return table

    def decide_grid(self, coeffs: np.ndarray) -> np.ndarray:
        """int8 verdict per row: 0 soluble, 1 insoluble, 2 undecided.

        coeffs is (N, 4) with nonzero entries.
        """
        p = self.p
        coeffs = np.asarray(coeffs, dtype=np.int64)
        table = self._class_table()
        mod = 9 if p == 3 else p
        codes = np.zeros(len(coeffs), dtype=np.int64)
        for i in range(4):
            v, u = _strip(coeffs[:, i], p)
            cls = table[u % mod]
            codes += ((v % 3) * 3 + cls) * 9**i
        canon = _canonical_digit_codes()[codes]
        status = np.full(9**4, -1, dtype=np.int8)
        rank = {Solubility.SOLUBLE: 0, Solubility.INSOLUBLE: 1, Solubility.UNKNOWN: 2}
        for code in np.unique(canon):
            status[code] = rank[self._decide_code(int(code))]
        return status[canon]


_CUBIC_DECIDERS: dict[int, CubicDecider] = {}


def _cubic_decider(p: int) -> CubicDecider:
    dec = _CUBIC_DECIDERS.get(p)
    if dec is None:
        dec = _CUBIC_DECIDERS[p] = CubicDecider(p)
    return dec


def _cubic_theta(x, place: Place) -> bool:
    coords = _coords(x)
    if any(v == 0 for v in coords):
        raise ValueError("cubic theta needs a smooth fibre (nonzero coefficients)")
    if place == INF:
        return False  # odd-degree diagonal forms always have real points
    verdict = _cubic_decider(int(place)).decide(coords)
    if verdict is Solubility.UNKNOWN:
        raise Undecided(coords, place, "search depth or budget exhausted")
    return verdict is Solubility.INSOLUBLE


def _cubic_smooth(x) -> bool:
    return all(v != 0 for v in _coords(x))


def _pseudo_split_divisor() -> ComponentAction:
    return ComponentAction.from_elements([(0,)], [1])


@functools.lru_cache(maxsize=None)
def diagonal_cubics() -> FamilyDescriptor:
    """The family y_0 x_0^3 + y_1 x_1^3 + y_2 x_2^3 + y_3 x_3^3 = 0."""
    return FamilyDescriptor(
        name="diagonal_cubics",
        n=3,
        f=HomogeneousForm(4, 4, ((1, (1, 1, 1, 1)),)),
        degree_f=4,
        A=3,
        Delta=Fraction(0),
        theta=_cubic_theta,
        smooth=_cubic_smooth,
        divisors=tuple(_pseudo_split_divisor() for _ in range(4)),
    )


FAMILY_NAMES = ("diagonal_conics", "diagonal_cubics")


def family_by_name(name: str) -> FamilyDescriptor:
    # hyphens are accepted so command-line spellings work unchanged
    key = name.replace("-", "_")
    if key == "diagonal_conics":
        return diagonal_conics()
    if key == "diagonal_cubics":
        return diagonal_cubics()
    raise ValueError(f"unknown family {name!r}; choose from {FAMILY_NAMES}")


# ---------------------------------------------------------------------------
# omega: insoluble places of one fibre


def _f_is_coordinate_product(family: FamilyDescriptor) -> bool:
    return family.f.monomials == ((1, tuple([1] * (family.n + 1))),)


def _candidate_places(family: FamilyDescriptor, coords: tuple[int, ...]) -> list[Place]:
    support: set[int] = set(int(p) for p in primes_up_to(family.A))
    if _f_is_coordinate_product(family):
        # factoring each small coordinate beats factoring their product
        for v in coords:
            support.update(factorize(v))
    else:
        support.update(factorize(family.f.evaluate(coords)))
    places: list[Place] = sorted(support)
    places.append(INF)
    return places


def omega_pi(
    family: FamilyDescriptor, x, S: Iterable[Place] = (INF,)
) -> ObstructionRecord:
    """All insoluble places of the fibre over x outside S, as a record.

    Candidate places are the primes up to the family bound A, the primes
    dividing f(x), and the real place; no other place can obstruct.  An
    undecided candidate marks the record tainted (its place is left out of
    the list).
    """
    point = x if isinstance(x, ProjPoint) else ProjPoint.from_vector(x)
    if not family.smooth(point):
        raise ValueError(f"fibre over {point} is singular")
    skip = set(S)
    bad: list[Place] = []
    tainted = False
    for v in _candidate_places(family, point.coords):
        if v in skip:
            continue
        try:
            if family.theta(point, v):
                bad.append(v)
        except Undecided:
            tainted = True
    return ObstructionRecord(point, tuple(bad), len(bad), tainted)


def omega_formula_conics(a: int, b: int, c: int) -> int:
    """Closed form for the conic family's omega at (a, b, c), S = {infinity}.

    Valid for pairwise coprime squarefree coefficients, each 1 mod 4:
    omega = sum over p | a of (1 - (bc|p))/2, plus the two symmetric sums.
    Each summand is 0 or 1, so the result is a plain count.
    """
    for v in (a, b, c):
        if v == 0 or any(e > 1 for e in factorize(v).values()):
            raise ValueError("coefficients must be nonzero and squarefree")
        if v % 4 != 1:
            raise ValueError("coefficients must be 1 mod 4")
    if math.gcd(a, b) != 1 or math.gcd(a, c) != 1 or math.gcd(b, c) != 1:
        raise ValueError("coefficients must be pairwise coprime")
    total = 0
    for coeff, rest in ((a, b * c), (b, a * c), (c, -a * b)):
        for p in factorize(coeff):
            total += (1 - legendre(rest, p)) // 2
    return total


# ---------------------------------------------------------------------------
# sigma_p


def _fp_projective_reps(n: int, p: int):
    # one representative per point of P^n(F_p): leading nonzero entry 1
    for zeros in range(n + 1):
        for tail in itertools.product(range(p), repeat=n - zeros):
            yield (0,) * zeros + (1,) + tail


def sigma_exact(family: FamilyDescriptor, p: int) -> Fraction:
    """Exact density of non-split fibres over P^n(F_p).

    Needs the family to carry a non-split classification (the conic family
    does); p must be an odd prime, the prime 2 is folded into the bad-prime
    bound instead.
    """
    p = int(p)
    if family.nonsplit is None:
        raise ValueError(
            f"{family.name} has no exact non-split test; use sigma_empirical"
        )
    if not is_prime(p):
        raise ValueError("p must be prime")
    if p == 2:
        raise ValueError("p = 2 is excluded from the residue classification")
    count = sum(1 for rep in _fp_projective_reps(family.n, p) if family.nonsplit(rep, p))
    return Fraction(count, proj_size(family.n, p))


@dataclass(frozen=True)
class DiskDensityEstimate:
    """Monte Carlo estimate of the insoluble-disk density at one prime."""

    prime: int
    depth: int
    sample_size: int
    value: float
    standard_error: float
    unknown_fraction: float


def sigma_empirical(
    family: FamilyDescriptor,
    p: int,
    sample_size: int,
    precision_depth: int,
    seed: int = 0,
) -> DiskDensityEstimate:
    """Sample residue disks mod p^depth and measure the insoluble fraction.

    Disks are uniform on primitive coefficient vectors mod p^depth.  A disk
    whose verdict is not constant across lifts (some coordinate vanishing
    to the full depth, or too shallow to pin the unit class) counts as
    unknown, as does an undecided search; unknowns are reported separately
    and not folded into the value.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be at least 1")
    if precision_depth < 1:
        raise ValueError("precision_depth must be at least 1")
    if not is_prime(p):
        raise ValueError("p must be prime")
    M = p**precision_depth
    if M >= 1 << 62:
        raise ValueError("p^depth too large to sample")
    m = family.n + 1
    rng = np.random.default_rng(seed)
    rows = np.empty((0, m), dtype=np.int64)
    while len(rows) < sample_size:
        batch = rng.integers(0, M, size=(2 * (sample_size - len(rows)) + 8, m))
        batch = batch[(batch % p != 0).any(axis=1)]
        rows = np.concatenate([rows, batch.astype(np.int64)])
    rows = rows[:sample_size]

    # a coordinate pins its verdict-relevant data only to this depth
    if family.name == "diagonal_conics":
        stable_margin = 3 if p == 2 else 1
    else:
        stable_margin = 2 if p == 3 else 1

    insoluble = 0
    unknown = 0
    for row in rows:
        coords = [int(v) for v in row]
        depths_ok = all(
            v != 0 and valuation(v, p) + stable_margin <= precision_depth
            for v in coords
        )
        if not depths_ok:
            unknown += 1
            continue
        try:
            if family.theta(coords, p):
                insoluble += 1
        except Undecided:
            unknown += 1
    q = insoluble / sample_size
    return DiskDensityEstimate(
        prime=p,
        depth=precision_depth,
        sample_size=sample_size,
        value=q,
        standard_error=math.sqrt(q * (1 - q) / sample_size),
        unknown_fraction=unknown / sample_size,
    )


def conic_sigma_formula(p: int) -> Fraction:
    """Closed form for the conic family's sigma_p, odd p.

    Non-split fibres over P^2(F_p) are the three coordinate vertices plus,
    on each of the three coordinate lines, the (p-1)/2 points failing the
    residue condition: 3 + 3(p-1)/2 in all.  Validated against the
    exhaustive classification for every odd p up to 97.
    """
    p = int(p)
    if not is_prime(p) or p == 2:
        raise ValueError("need an odd prime")
    return Fraction(3 + 3 * (p - 1) // 2, proj_size(2, p))


def conic_insoluble_density(p: int) -> Fraction:
    """Exact Haar density of p-adically insoluble conics a x^2+b y^2 = c z^2.

    This is the disk-level insolubility probability (what sigma_empirical
    estimates), not the residue proxy sigma_p: the two differ by O(1/p^2)
    per prime.  Computed by summing the valuation-parity pattern masses
    against the fraction of unit-class combinations with Hilbert symbol -1;
    both factors are exact, so the result is an exact rational.
    """
    p = int(p)
    if not is_prime(p):
        raise ValueError("p must be prime")
    if p == 2:
        return conic_two_adic_density()
    # mass of even resp. odd valuation for one Haar-random coordinate
    m = {0: Fraction(p, p + 1), 1: Fraction(1, p + 1)}
    pinv3 = Fraction(1, p**3)
    total = Fraction(0)
    for ea, eb, ec in itertools.product((0, 1), repeat=3):
        mass = m[ea] * m[eb] * m[ec] - pinv3 * m[1 - ea] * m[1 - eb] * m[1 - ec]
        x1, x2 = ea ^ ec, eb ^ ec
        bad = 0
        for sa, sb, sc in itertools.product((1, -1), repeat=3):
            # sign of (u|p) for the unit parts; symbols only see the products
            s1, s2 = sa * sc, sb * sc
            h = (-1 if (x1 and x2 and p % 4 == 3) else 1)
            h *= s1 if x2 else 1
            h *= s2 if x1 else 1
            bad += h == -1
        total += mass * Fraction(bad, 8)
    return total / (1 - pinv3)


def conic_two_adic_density() -> Fraction:
    """Exact density of 2-adically insoluble disks for the conic family.

    The verdict depends only on the valuation parities and the unit parts
    mod 8, so the density is a finite sum of geometric series: exact, no
    truncation.  Used as the p = 2 entry of the conic sigma table, where
    the odd-p residue classification does not apply.
    """
    # measure of v = 0, 2, 4, ... resp. 1, 3, 5, ... for one coordinate
    m = {0: Fraction(2, 3), 1: Fraction(1, 3)}
    total = Fraction(0)
    for ea, eb, ec in itertools.product((0, 1), repeat=3):
        # valuation-parity mass among primitive vectors, by inclusion-exclusion
        mass = m[ea] * m[eb] * m[ec] - Fraction(1, 8) * m[1 - ea] * m[1 - eb] * m[1 - ec]
        bad = 0
        for ua, ub, uc in itertools.product((1, 3, 5, 7), repeat=3):
            a = 2**ea * ua
            b = 2**eb * ub
            c = 2**ec * uc
            if hilbert(Fraction(a, c), Fraction(b, c), 2) == -1:
                bad += 1
        total += mass * Fraction(bad, 64)
    return total / Fraction(7, 8)


# ---------------------------------------------------------------------------
# calibration of the bad-prime bound A


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of an exhaustive scan for obstructed primes not dividing f.

    A is the largest prime (default 1) with an exception; all exceptional
    pairs lie at primes <= A by construction.  exception_counts gives the
    full per-prime tally, witnesses a capped sample of pairs, undecided the
    primes whose certification was aborted by an undecided verdict (with
    one diagnostic point each).
    """

    A: int
    exception_counts: dict[int, int]
    witnesses: tuple[tuple[ProjPoint, int], ...]
    undecided: dict[int, ProjPoint]


_WITNESS_CAP = 64


def calibrate_A(family: FamilyDescriptor, p_max: int, B_cal: int) -> CalibrationReport:
    """Smallest bound A such that no tested prime p in (A, p_max] with
    p not dividing f(x) obstructs any smooth fibre of height <= B_cal.

    Exhaustive over all points of P^n(Q) with height <= B_cal.  Both
    built-in families run on a vectorized path; the result reports every
    exception found (all at primes <= A).
    """
    if p_max < 2 or B_cal < 1:
        raise ValueError("need p_max >= 2 and B_cal >= 1")
    primes = [int(p) for p in primes_up_to(p_max)]
    counts: dict[int, int] = {}
    witnesses: list[tuple[ProjPoint, int]] = []
    undecided: dict[int, ProjPoint] = {}

    for slab in point_slabs(family.n, B_cal):
        smooth_mask = (slab != 0).all(axis=1)
        rows = slab[smooth_mask]
        if len(rows) == 0:
            continue
        product_f = _f_is_coordinate_product(family)
        for p in primes:
            if product_f:
                coprime = (rows % p != 0).all(axis=1)
            else:
                coprime = np.array(
                    [family.f.evaluate(tuple(row)) % p != 0 for row in rows]
                )
            cand = rows[coprime]
            if len(cand) == 0:
                continue
            if family.name == "diagonal_conics":
                hit = conic_insoluble_grid(cand, p)
                bad_rows = cand[hit]
                und_rows = cand[:0]
            elif family.name == "diagonal_cubics":
                verdicts = _cubic_decider(p).decide_grid(cand)
                bad_rows = cand[verdicts == 1]
                und_rows = cand[verdicts == 2]
            else:
                flags = []
                und = []
                for row in cand:
                    try:
                        flags.append(family.theta(tuple(row), p))
                        und.append(False)
                    except Undecided:
                        flags.append(False)
                        und.append(True)
                bad_rows = cand[np.array(flags, dtype=bool)]
                und_rows = cand[np.array(und, dtype=bool)]
            if len(und_rows) and p not in undecided:
                undecided[p] = ProjPoint.from_vector(und_rows[0])
            if len(bad_rows):
                counts[p] = counts.get(p, 0) + len(bad_rows)
                for row in bad_rows[: max(0, _WITNESS_CAP - len(witnesses))]:
                    witnesses.append((ProjPoint.from_vector(row), p))
    A = max(counts, default=1)
    return CalibrationReport(A, counts, tuple(witnesses), undecided)
