"""Aggregate statistics for obstruction counts over families.

Builds record sets (exhaustive scans over all points of bounded height, or
seeded uniform samples), then reduces them: standardized moments against the
normal reference, truncated centered counts, the exact histogram of
obstruction counts with its rational partition identity, partial sums of the
local densities with a constant-term fit, Kolmogorov-Smirnov distance to the
normal law, and the Euler-product prediction of the limiting histogram for
families whose growth constant vanishes.

A classic cross-check is included: the number of distinct prime factors of
the integers up to a bound, pushed through the same reductions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.stats import norm as _norm

from .arith import factorize, is_prime, primes_up_to
from .families import (
    CubicDecider,
    DiskDensityEstimate,
    FamilyDescriptor,
    ObstructionRecord,
    SigmaTable,
    conic_insoluble_grid,
    conic_sigma_formula,
    diagonal_cubics,
    omega_pi,
    sigma_empirical,
)
from .localsolve import INF, Place
from .projective import ProjPoint, count_points, enumerate_points, point_slabs

__all__ = [
    "RecordSet",
    "ScanSummary",
    "MomentReport",
    "TauHistogram",
    "TruncationWindow",
    "SigmaFit",
    "TauPrediction",
    "scan",
    "record_set",
    "sample_records",
    "moments",
    "truncated_omega",
    "truncated_moments",
    "moment_window",
    "tau_histogram",
    "n_moments",
    "build_sigma_table",
    "sigma_partial_sums",
    "standardized_values",
    "gaussian_distance",
    "tau_limit_prediction",
    "cubic_density_table",
    "classic_omega_set",
    "CLASSIC_OMEGA",
]

CLASSIC_OMEGA = "classic_omega"


# ---------------------------------------------------------------------------
# record containers


@dataclass(frozen=True)
class ScanSummary:
    point_count: int
    singular_count: int
    tainted_count: int


@dataclass
class RecordSet:
    """Columnar obstruction counts for one run.

    One row per smooth-fibre point (tainted rows carry the decided part of
    the count only).  singular_count completes the partition: every
    enumerated or sampled point is a row, a singular fibre, or nothing.
    """

    family_name: str
    B: int
    S: tuple[Place, ...]
    omegas: np.ndarray
    heights: np.ndarray
    tainted: np.ndarray
    singular_count: int
    sampled: bool = False

    def __post_init__(self):
        if not (len(self.omegas) == len(self.heights) == len(self.tainted)):
            raise ValueError("column lengths differ")

    @property
    def point_count(self) -> int:
        return len(self.omegas) + self.singular_count

    @property
    def untainted_count(self) -> int:
        return int((~self.tainted).sum())

    @property
    def tainted_count(self) -> int:
        return int(self.tainted.sum())

    def summary(self) -> ScanSummary:
        return ScanSummary(self.point_count, self.singular_count, self.tainted_count)

    def truncate_height(self, limit: int) -> "RecordSet":
        """Rows with height <= limit, as a set with bound `limit`.

        Only meaningful for exhaustive sets; the singular count is not
        re-derivable here, so it is kept only when nothing was dropped.
        """
        keep = self.heights <= limit
        singular = self.singular_count if bool(keep.all()) else 0
        return RecordSet(
            self.family_name,
            limit,
            self.S,
            self.omegas[keep],
            self.heights[keep],
            self.tainted[keep],
            singular,
            self.sampled,
        )

    @staticmethod
    def from_records(
        records: Iterable[ObstructionRecord],
        family_name: str,
        B: int,
        S,
        singular_count: int = 0,
        sampled: bool = False,
    ) -> "RecordSet":
        recs = list(records)
        return RecordSet(
            family_name,
            B,
            tuple(S),
            np.array([r.omega for r in recs], np.int64),
            np.array([r.point.height for r in recs], np.int64),
            np.array([r.tainted for r in recs], bool),
            singular_count,
            sampled,
        )


def _columns(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(records, RecordSet):
        return (
            np.asarray(records.omegas, float),
            np.asarray(records.heights, float),
            np.asarray(records.tainted, bool),
        )
    recs = list(records)
    return (
        np.array([r.omega for r in recs], float),
        np.array([r.point.height for r in recs], float),
        np.array([r.tainted for r in recs], bool),
    )


# ---------------------------------------------------------------------------
# scanning


def scan(family: FamilyDescriptor, B: int, S=(INF,)):
    """Every smooth fibre of height <= B, one ObstructionRecord each.

    Returns (records, ScanSummary).  Singular fibres are counted, not
    recorded; an undecided place taints its record rather than aborting.
    Deterministic given (family, B, S).  Meant for small B; record_set
    holds the vectorized large-B path.
    """
    if B < 3:
        raise ValueError("need B >= 3")
    S = tuple(S)
    records = []
    points = singular = 0
    for pt in enumerate_points(family.n, B):
        points += 1
        if not family.smooth(pt.coords):
            singular += 1
            continue
        records.append(omega_pi(family, pt, S))
    tainted = sum(1 for r in records if r.tainted)
    return records, ScanSummary(points, singular, tainted)


def _conic_slab_omega(rows: np.ndarray, primes: Sequence[int], S: tuple) -> np.ndarray:
    om = np.zeros(len(rows), np.int64)
    if 2 not in S:
        om += conic_insoluble_grid(rows, 2)
    for p in primes:
        if p in S:
            continue
        mask = (rows % p == 0).any(axis=1)
        if mask.any():
            om[mask] += conic_insoluble_grid(rows[mask], p)
    if INF not in S:
        om += conic_insoluble_grid(rows, INF)
    return om


def _cubic_slab_omega(rows, deciders: dict, S: tuple):
    om = np.zeros(len(rows), np.int64)
    taint = np.zeros(len(rows), bool)
    for p, dec in deciders.items():
        if p in S:
            continue
        if p <= 3:
            mask = np.ones(len(rows), bool)
        else:
            mask = (rows % p == 0).any(axis=1)
            if not mask.any():
                continue
        verdict = dec.decide_grid(rows[mask])
        om[mask] += verdict == 1
        taint[mask] |= verdict == 2
    # the real place never obstructs an odd-degree form
    return om, taint


def record_set(family: FamilyDescriptor, B: int, S=(INF,)) -> RecordSet:
    """Exhaustive scan of all points of height <= B, columnar.

    Vectorized for the two built-in families (a coefficient of a height-B
    point is at most B, so only primes <= B ever obstruct); any other
    family falls back to the scalar scan.
    """
    if B < 3:
        raise ValueError("need B >= 3")
    S = tuple(S)
    name = family.name
    if name == "diagonal_conics":
        odd = [int(p) for p in primes_up_to(B) if p > 2]
        worker = lambda rows: (_conic_slab_omega(rows, odd, S), np.zeros(len(rows), bool))
    elif name == "diagonal_cubics":
        deciders = {int(p): CubicDecider(int(p)) for p in primes_up_to(max(B, 3))}
        worker = lambda rows: _cubic_slab_omega(rows, deciders, S)
    else:
        records, summary = scan(family, B, S)
        return RecordSet.from_records(records, name, B, S, summary.singular_count)

    oms, hts, tns = [], [], []
    singular = 0
    for slab in point_slabs(family.n, B):
        smooth = np.ones(len(slab), bool)
        for j in range(slab.shape[1]):
            smooth &= slab[:, j] != 0
        singular += int((~smooth).sum())
        rows = slab[smooth]
        if not len(rows):
            continue
        om, taint = worker(rows)
        oms.append(om)
        hts.append(np.abs(rows).max(axis=1))
        tns.append(taint)
    return RecordSet(
        name,
        B,
        S,
        np.concatenate(oms),
        np.concatenate(hts),
        np.concatenate(tns),
        singular,
    )


def _sample_chunk(family, B, want, seed_seq, S):
    """One chunk of uniform points of height <= B with their counts.

    Uniform over primitive integer vectors in the box, which is uniform
    over points (each point has two primitive representatives).  Draws are
    consumed in order and stop at the one yielding the want-th smooth row,
    so the singular tally is an unbiased companion count.
    """
    rng = np.random.default_rng(seed_seq)
    n1 = family.n + 1
    builtin = family.name in ("diagonal_conics", "diagonal_cubics")
    kept = []
    singular = 0
    got = 0
    while got < want:
        raw = rng.integers(-B, B + 1, size=(2 * want + 64, n1))
        cand = raw[np.gcd.reduce(np.abs(raw), axis=1) == 1]
        if builtin:
            smooth = np.ones(len(cand), bool)
            for j in range(n1):
                smooth &= cand[:, j] != 0
        else:
            smooth = np.array(
                [family.smooth(tuple(int(v) for v in r)) for r in cand], bool
            )
        hits = np.flatnonzero(smooth)
        need = want - got
        if len(hits) >= need:
            cut = hits[need - 1] + 1
            singular += int((~smooth[:cut]).sum())
            kept.append(cand[:cut][smooth[:cut]])
            got = want
        else:
            singular += int((~smooth).sum())
            kept.append(cand[smooth])
            got += len(hits)
    rows = np.concatenate(kept)

    om = np.zeros(want, np.int64)
    taint = np.zeros(want, bool)
    if family.name == "diagonal_conics":
        support: dict[int, list[int]] = {}
        for i, row in enumerate(rows):
            seen = set()
            for v in row:
                seen.update(factorize(int(abs(v))))
            for p in seen:
                if p > 2:
                    support.setdefault(p, []).append(i)
        if 2 not in S:
            om += conic_insoluble_grid(rows, 2)
        for p, idx in support.items():
            if p in S:
                continue
            ia = np.array(idx)
            om[ia] += conic_insoluble_grid(rows[ia], p)
        if INF not in S:
            om += conic_insoluble_grid(rows, INF)
    else:
        for i, row in enumerate(rows):
            rec = omega_pi(family, ProjPoint.from_vector(tuple(int(v) for v in row)), S)
            om[i] = rec.omega
            taint[i] = rec.tainted
    heights = np.abs(rows).max(axis=1)
    return om, heights, taint, singular


def sample_records(
    family: FamilyDescriptor,
    B: int,
    sample_size: int,
    seed: int,
    S=(INF,),
    threads: int = 1,
    chunks: int = 64,
) -> RecordSet:
    """Seeded uniform sample of smooth-fibre points of height <= B.

    The seed is split into a fixed number of independent streams and the
    chunk results are concatenated in stream order, so the output is
    byte-identical for any thread count.
    """
    if B < 3:
        raise ValueError("need B >= 3")
    if sample_size < 1:
        raise ValueError("need a positive sample size")
    S = tuple(S)
    children = np.random.SeedSequence(seed).spawn(chunks)
    sizes = [sample_size // chunks + (i < sample_size % chunks) for i in range(chunks)]
    jobs = [(c, w) for c, w in zip(children, sizes) if w]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda cw: _sample_chunk(family, B, cw[1], cw[0], S), jobs)
            )
    else:
        parts = [_sample_chunk(family, B, w, c, S) for c, w in jobs]
    return RecordSet(
        family.name,
        B,
        S,
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
        sum(p[3] for p in parts),
        sampled=True,
    )


# ---------------------------------------------------------------------------
# sigma tables and centerings


def _sigma_entries(family_name: str, up_to: int) -> dict[int, Union[Fraction, float]]:
    if family_name == "diagonal_conics":
        return {int(p): conic_sigma_formula(int(p)) for p in primes_up_to(up_to) if p > 2}
    if family_name == CLASSIC_OMEGA:
        return {int(p): Fraction(1, int(p)) for p in primes_up_to(up_to)}
    raise ValueError(
        f"no exact sigma entries for {family_name!r}; supply a SigmaTable"
    )


def _center_sum(family_name: str, B: int, sigma: Optional[SigmaTable]) -> float:
    entries = sigma.entries if sigma is not None else _sigma_entries(family_name, B)
    return float(sum(float(v) for p, v in entries.items() if p <= B))


def _center_prefix(family_name: str, heights: np.ndarray) -> np.ndarray:
    """Sum of sigma_p over p <= H(x), per record, via one cumulative table."""
    top = int(heights.max())
    entries = _sigma_entries(family_name, top)
    ps = np.array(sorted(entries), float)
    csum = np.concatenate([[0.0], np.cumsum([float(entries[int(p)]) for p in sorted(entries)])])
    return csum[np.searchsorted(ps, heights, side="right")]


def build_sigma_table(
    family: FamilyDescriptor, p_max: int, cutoffs: Optional[Sequence[int]] = None
) -> SigmaTable:
    """Exact sigma entries up to p_max with partial sums and the beta fit."""
    entries = _sigma_entries(family.name, p_max)
    fit = sigma_partial_sums(entries, family.Delta, cutoffs)
    return SigmaTable(entries, dict(fit.partial_sums), fit.beta)


@dataclass(frozen=True)
class SigmaFit:
    """Constant-term fit of partial sums against Delta log log x."""

    beta: float
    partial_sums: dict[int, float]
    residuals: dict[int, float]
    envelope_constant: float
    slope: float
    intercept: float


def sigma_partial_sums(sigma, Delta, cutoffs: Optional[Sequence[int]] = None) -> SigmaFit:
    """Fit sum_{p<=x} sigma_p ~ Delta log log x + beta over a cutoff grid.

    beta is the least-squares constant (the mean deviation); residuals are
    reported per cutoff together with the smallest constant C making
    |residual| <= C / log x across the grid.  A free linear regression on
    log log x is included so the slope can be compared with Delta.
    """
    if float(Delta) <= 0:
        raise ValueError("Delta must be positive (tau_histogram covers Delta = 0)")
    entries = sigma.entries if isinstance(sigma, SigmaTable) else dict(sigma)
    ps = sorted(entries)
    if len(ps) < 25:
        raise ValueError("need at least 25 sigma entries for a stable fit")
    vals = np.array([float(entries[p]) for p in ps])
    cums = np.cumsum(vals)
    pa = np.array(ps, float)
    if cutoffs is None:
        lo = ps[min(24, len(ps) - 1)]
        grid = np.geomspace(lo, ps[-1], 24)
        cutoffs = sorted({int(round(x)) for x in grid})
    cutoffs = [int(x) for x in cutoffs]
    if any(x < 3 for x in cutoffs):
        raise ValueError("cutoffs must be at least 3")
    idx = np.searchsorted(pa, cutoffs, side="right")
    if (idx < 25).any():
        raise ValueError("every cutoff must cover at least 25 primes")
    sums = cums[idx - 1]
    llx = np.log(np.log(np.array(cutoffs, float)))
    dev = sums - float(Delta) * llx
    beta = float(dev.mean())
    resid = dev - beta
    envelope = float(np.max(np.abs(resid) * np.log(np.array(cutoffs, float))))
    slope, intercept = np.polyfit(llx, sums, 1)
    return SigmaFit(
        beta,
        {c: float(s) for c, s in zip(cutoffs, sums)},
        {c: float(r) for c, r in zip(cutoffs, resid)},
        envelope,
        float(slope),
        float(intercept),
    )


# ---------------------------------------------------------------------------
# moments


def _mu_reference(r: int) -> float:
    if r % 2:
        return 0.0
    h = r // 2
    return math.factorial(r) / (2**h * math.factorial(h))


@dataclass(frozen=True)
class MomentReport:
    B: int
    r: int
    value: float
    centering: str
    mu_r_reference: float


_CENTERINGS = ("paper", "empirical")


def moments(
    records,
    B: int,
    Delta,
    r: int,
    centering: str = "paper",
    sigma: Optional[SigmaTable] = None,
) -> MomentReport:
    """Standardized moment of the obstruction counts at height bound B.

    The r-th power mean of (omega - center) / sqrt(Delta log log B) over
    untainted smooth fibres of height >= 3.  Centering "paper" uses
    Delta log log B itself; "empirical" uses the sigma-table sum over
    p <= B, which differs by a constant and converges much faster at
    accessible heights.  The normal reference moment rides along.
    """
    if float(Delta) <= 0:
        raise ValueError("Delta must be positive (tau_histogram covers Delta = 0)")
    if r < 0 or int(r) != r:
        raise ValueError("moment order must be a non-negative integer")
    if centering not in _CENTERINGS:
        raise ValueError(f"centering must be one of {_CENTERINGS}")
    if r == 0:
        return MomentReport(B, 0, 1.0, centering, 1.0)
    om, hts, taint = _columns(records)
    keep = (~taint) & (hts >= 3)
    om = om[keep]
    if not len(om):
        raise ValueError("no usable records")
    llB = math.log(math.log(B))
    if centering == "paper":
        center = float(Delta) * llB
    else:
        name = records.family_name if isinstance(records, RecordSet) else None
        center = _center_sum(name, B, sigma) if (sigma is not None or name) else None
        if center is None:
            raise ValueError("empirical centering needs a RecordSet or a SigmaTable")
    scale = math.sqrt(float(Delta) * llB)
    value = float(np.mean(((om - center) / scale) ** r))
    return MomentReport(B, int(r), value, centering, _mu_reference(int(r)))


# ---------------------------------------------------------------------------
# truncated statistics


@dataclass(frozen=True)
class TruncationWindow:
    """Prime window (t0, t1] feeding the truncated centered count."""

    r: int
    t0: float
    t1: float

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("window must target a moment order r >= 1")
        if not (1 < self.t0 < self.t1):
            raise ValueError(f"need 1 < t0 < t1, got t0={self.t0}, t1={self.t1}")


def moment_window(B: int, r: int, n: int) -> TruncationWindow:
    """The asymptotic cutoff choice t0 = (log log B)^{2r}, t1 = B^{1/(5r(n+1))}.

    These separate only for astronomically large B; at accessible heights
    t0 >= t1 and the constructor reports the degeneracy instead of
    producing an unusable window.
    """
    llB = math.log(math.log(B))
    t0 = llB ** (2 * r)
    t1 = B ** (1.0 / (5 * r * (n + 1)))
    if not (1 < t0 < t1 < B):
        raise ValueError(
            f"window degenerate at B={B}: t0={t0:.3f}, t1={t1:.3f} "
            "(the asymptotic cutoffs need far larger B)"
        )
    return TruncationWindow(r, t0, t1)


def truncated_omega(record: ObstructionRecord, window: TruncationWindow, sigma):
    """Centered count over the window: #insoluble primes in (t0,t1] minus
    the sigma sum there.  Exact (Fraction) when the entries are exact."""
    entries = sigma.entries if isinstance(sigma, SigmaTable) else dict(sigma)
    hits = sum(
        1
        for pl in record.insoluble_places
        if pl != INF and window.t0 < pl <= window.t1
    )
    total = Fraction(0)
    for p in primes_up_to(int(window.t1)):
        p = int(p)
        if window.t0 < p <= window.t1:
            if p not in entries:
                raise ValueError(f"sigma table is missing p={p} inside the window")
            total = total + entries[p]
    return hits - total


def truncated_moments(
    records: Iterable[ObstructionRecord],
    B: int,
    Delta,
    window: TruncationWindow,
    sigma,
    r: int,
) -> MomentReport:
    """Moment of the windowed centered counts, normalized like moments().

    Needs full records (the place lists), so it runs on scan() output or
    sampled record lists rather than columnar sets.
    """
    if float(Delta) <= 0:
        raise ValueError("Delta must be positive")
    if r < 0 or int(r) != r:
        raise ValueError("moment order must be a non-negative integer")
    if not window.t1 < B:
        raise ValueError("window must sit strictly below the height bound")
    if r == 0:
        return MomentReport(B, 0, 1.0, "truncated", 1.0)
    vals = [
        float(truncated_omega(rec, window, sigma))
        for rec in records
        if not rec.tainted and rec.point.height >= 3
    ]
    if not vals:
        raise ValueError("no usable records")
    scale = math.sqrt(float(Delta) * math.log(math.log(B)))
    value = float(np.mean([(v / scale) ** r for v in vals]))
    return MomentReport(B, int(r), value, "truncated", _mu_reference(int(r)))


# ---------------------------------------------------------------------------
# the exact histogram


@dataclass(frozen=True)
class TauHistogram:
    """Exact distribution of the obstruction count over one scan.

    masses are fractions of all enumerated points, so the masses plus the
    singular and tainted fractions partition 1 exactly.
    """

    B: int
    counts: dict[int, int]
    masses: dict[int, Fraction]
    tainted_count: int
    singular_count: int
    point_count: int

    def __post_init__(self):
        if sum(self.counts.values()) + self.tainted_count + self.singular_count != self.point_count:
            raise ValueError("partition identity violated")
        for j, c in self.counts.items():
            if self.masses.get(j) != Fraction(c, self.point_count):
                raise ValueError("masses must be counts over the point count")


def tau_histogram(records, B: Optional[int] = None, singular_count: int = 0) -> TauHistogram:
    """Histogram of omega over untainted smooth fibres, exact fractions.

    With a RecordSet the bound and singular count come from the set; with a
    plain record list they can be passed in.
    """
    if isinstance(records, RecordSet):
        B = records.B if B is None else B
        singular_count = records.singular_count
        om = np.asarray(records.omegas)
        if not np.array_equal(om, np.round(om)):
            raise ValueError("histogram needs integer counts")
        om = om.astype(np.int64)
        taint = np.asarray(records.tainted, bool)
        kept = om[~taint]
        tainted_count = int(taint.sum())
    else:
        recs = list(records)
        if B is None:
            raise ValueError("B is required with a plain record list")
        kept = np.array([r.omega for r in recs if not r.tainted], np.int64)
        tainted_count = sum(1 for r in recs if r.tainted)
    total = len(kept) + tainted_count + singular_count
    binned = np.bincount(kept) if len(kept) else np.array([], np.int64)
    counts = {int(j): int(c) for j, c in enumerate(binned) if c}
    masses = {j: Fraction(c, total) for j, c in counts.items()}
    return TauHistogram(int(B), counts, masses, tainted_count, singular_count, total)


def n_moments(records, r: int) -> Fraction:
    """Average of omega^r over untainted smooth fibres, exact.

    Equals sum_j j^r tau(j) rescaled by point_count/untainted_count, since
    the histogram masses are taken over all enumerated points.
    """
    if r < 1 or int(r) != r:
        raise ValueError("moment order must be a positive integer")
    if isinstance(records, RecordSet):
        om = np.asarray(records.omegas)
        if not np.array_equal(om, np.round(om)):
            raise ValueError("integer counts required")
        kept = om.astype(np.int64)[~np.asarray(records.tainted, bool)]
        # power sum through bincount, in exact integers
        binned = np.bincount(kept) if len(kept) else np.array([], np.int64)
        power = sum(int(c) * j**r for j, c in enumerate(binned))
        count = len(kept)
    else:
        power = count = 0
        for rec in records:
            if rec.tainted:
                continue
            power += rec.omega**r
            count += 1
    if count == 0:
        raise ValueError("no untainted records")
    return Fraction(power, count)


# ---------------------------------------------------------------------------
# distance to the normal law


def standardized_values(records, Delta, centering: str = "paper") -> np.ndarray:
    """Per-point standardized counts (omega - center(H)) / sqrt(Delta log log H).

    center(H) is Delta log log H ("paper") or the sigma sum over p <= H
    ("empirical").  Tainted rows and heights below 3 are dropped.
    """
    if float(Delta) <= 0:
        raise ValueError("Delta must be positive")
    if centering not in _CENTERINGS:
        raise ValueError(f"centering must be one of {_CENTERINGS}")
    om, hts, taint = _columns(records)
    keep = (~taint) & (hts >= 3)
    om, hts = om[keep], hts[keep]
    llh = np.log(np.log(hts))
    if centering == "paper":
        center = float(Delta) * llh
    else:
        if not isinstance(records, RecordSet):
            raise ValueError("empirical centering needs a RecordSet")
        center = _center_prefix(records.family_name, hts)
    return (om - center) / np.sqrt(float(Delta) * llh)


def gaussian_distance(records, B: int, Delta, centering: str = "paper") -> float:
    """Kolmogorov-Smirnov distance between the standardized counts and the
    standard normal.

    Standardization is per point as in standardized_values; fewer than 100
    usable records is an error.
    """
    z = np.sort(standardized_values(records, Delta, centering))
    if len(z) < 100:
        raise ValueError("need at least 100 usable records")
    n = len(z)
    cdf = _norm.cdf(z)
    steps = np.arange(n, dtype=float)
    return float(max(np.max(steps / n + 1.0 / n - cdf), np.max(cdf - steps / n)))


# ---------------------------------------------------------------------------
# the Euler-product limit prediction


@dataclass(frozen=True)
class TauPrediction:
    j: int
    prime_cutoff: int
    value: float
    std_error: float
    tail_bound: float

    def __float__(self):
        return self.value


def _density_pair(entry) -> tuple[float, float]:
    if isinstance(entry, DiskDensityEstimate):
        # undecided disks could fall either way; fold them into the error
        return entry.value, entry.standard_error + entry.unknown_fraction
    if isinstance(entry, tuple):
        v, se = entry
        return float(v), float(se)
    return float(entry), 0.0


def cubic_density_table(
    prime_cutoff: int,
    sample_size: int = 60_000,
    seed: int = 0,
    depth: Optional[int] = None,
) -> dict[int, DiskDensityEstimate]:
    """Monte Carlo insoluble-disk densities for the cubic family, per prime.

    depth overrides the per-prime precision (default 10 / 7 / 4 for
    p = 2 / 3 / larger, enough to pin unit cube classes).
    """
    fam = diagonal_cubics()
    table = {}
    for p in primes_up_to(prime_cutoff):
        p = int(p)
        d = depth if depth is not None else 10 if p == 2 else 7 if p == 3 else 4
        table[p] = sigma_empirical(fam, p, sample_size, d, seed=seed + p)
    return table


def tau_limit_prediction(
    family: FamilyDescriptor,
    j: int,
    prime_cutoff: int,
    density_source,
) -> TauPrediction:
    """Probability that exactly j primes obstruct, in the independent-disk
    limit model: the degree-j coefficient of prod_p ((1-q_p) + q_p z) over
    primes up to the cutoff.

    density_source maps each prime <= cutoff to its insoluble density (a
    DiskDensityEstimate, a (value, error) pair, or a bare number).  The
    reported error combines the per-prime errors linearly through the
    product's partial derivatives; the tail bound is the d/p envelope of
    the first omitted prime.
    """
    if family.Delta != 0:
        raise ValueError("limit histogram exists only when Delta = 0")
    if j < 0 or int(j) != j:
        raise ValueError("j must be a non-negative integer")
    if prime_cutoff < 2:
        raise ValueError("prime cutoff must be at least 2")
    ps = [int(p) for p in primes_up_to(prime_cutoff)]
    qs, ses = [], []
    for p in ps:
        if callable(density_source):
            entry = density_source(p)
        else:
            if p not in density_source:
                raise ValueError(f"density source is missing p={p}")
            entry = density_source[p]
        q, se = _density_pair(entry)
        if not 0 <= q <= 1:
            raise ValueError(f"density at p={p} outside [0,1]")
        qs.append(q)
        ses.append(se)

    def coeff(skip: Optional[int]) -> np.ndarray:
        poly = np.zeros(j + 2)
        poly[0] = 1.0
        for k, q in enumerate(qs):
            if k == skip:
                continue
            upd = poly * (1 - q)
            upd[1:] += poly[:-1] * q
            poly = upd
        return poly

    full = coeff(None)
    value = float(full[j])
    var = 0.0
    for k in range(len(qs)):
        if ses[k] == 0.0:
            continue
        reduced = coeff(k)
        partial = (reduced[j - 1] if j >= 1 else 0.0) - reduced[j]
        var += (partial * ses[k]) ** 2
    tail = family.degree_f / float(prime_cutoff)
    return TauPrediction(int(j), int(prime_cutoff), value, math.sqrt(var), tail)


# ---------------------------------------------------------------------------
# classic cross-check


def classic_omega_set(limit: int, low: int = 3) -> RecordSet:
    """omega(m) for low <= m <= limit as a RecordSet.

    The integers stand in for heights, divisibility for insolubility:
    sigma_p = 1/p and Delta = 1, so the same reductions apply verbatim.
    """
    if limit < max(low, 3):
        raise ValueError("limit too small")
    om = np.zeros(limit + 1, np.int16)
    for p in primes_up_to(limit):
        om[p::p] += 1
    m = np.arange(low, limit + 1, dtype=np.int64)
    return RecordSet(
        CLASSIC_OMEGA,
        limit,
        (),
        om[low:].astype(np.int64),
        m,
        np.zeros(len(m), bool),
        0,
    )
