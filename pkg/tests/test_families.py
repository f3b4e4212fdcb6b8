"""Family descriptors: theta, omega, sigma, calibration, grid engines."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from fibstat.families import (
    CubicDecider,
    FamilyDescriptor,
    ObstructionRecord,
    Undecided,
    calibrate_A,
    conic_insoluble_grid,
    conic_two_adic_density,
    cube_class,
    diagonal_conics,
    diagonal_cubics,
    family_by_name,
    omega_formula_conics,
    omega_pi,
    sigma_empirical,
    sigma_exact,
)
from fibstat.grouptheory import delta_total
from fibstat.localsolve import (
    INF,
    HomogeneousForm,
    Solubility,
    conic_soluble,
    hilbert,
    padic_point_search,
)
from fibstat.projective import ProjPoint, proj_size


# ---------------------------------------------------------------------------
# descriptors


def test_conic_descriptor():
    fam = diagonal_conics()
    assert fam.n == 2 and fam.degree_f == 3 and fam.A == 2
    assert fam.Delta == Fraction(3, 2)
    assert fam.f.evaluate((2, 3, 5)) == 30
    assert fam.smooth((1, 1, 1))
    assert not fam.smooth((1, 0, 1))


def test_cubic_descriptor():
    fam = diagonal_cubics()
    assert fam.n == 3 and fam.degree_f == 4
    assert fam.Delta == 0
    assert fam.f.evaluate((1, 2, 3, 4)) == 24
    assert not fam.smooth((1, 2, 0, 4))


def test_delta_matches_divisor_actions():
    for fam in (diagonal_conics(), diagonal_cubics()):
        assert delta_total(fam.divisors) == fam.Delta


def test_family_by_name():
    assert family_by_name("diagonal_conics") is diagonal_conics()
    assert family_by_name("diagonal_cubics") is diagonal_cubics()
    with pytest.raises(ValueError):
        family_by_name("elliptic_pencils")


def test_descriptor_rejects_inconsistent_delta():
    fam = diagonal_conics()
    with pytest.raises(ValueError, match="disagrees"):
        FamilyDescriptor(
            name="broken",
            n=2,
            f=fam.f,
            degree_f=3,
            A=2,
            Delta=Fraction(1),
            theta=fam.theta,
            smooth=fam.smooth,
            divisors=fam.divisors,
        )


# ---------------------------------------------------------------------------
# theta


def test_conic_theta_frozen_values():
    fam = diagonal_conics()
    assert fam.theta((1, 1, 21), 3)
    assert fam.theta((1, 1, 21), 7)
    assert not fam.theta((1, 1, 21), 2)
    assert not fam.theta((1, 1, 21), 5)
    assert not fam.theta((1, 1, 21), INF)
    assert fam.theta((1, 1, -1), INF)


def test_conic_theta_bad_prime_contract():
    # an insoluble prime must divide the discriminant or be <= A
    fam = diagonal_conics()
    rng = np.random.default_rng(1)
    pts = rng.integers(-50, 51, size=(150, 3))
    pts = pts[(pts != 0).all(axis=1)]
    for row in pts.tolist():
        for p in (3, 5, 7, 11, 13, 17, 19, 23, 29):
            if fam.theta(row, p):
                assert row[0] * row[1] * row[2] % p == 0


def test_cubic_theta_frozen_values():
    fam = diagonal_cubics()
    assert fam.theta((1, 2, 7, 14), 7)
    for p in (2, 3, 5, 7, 13, 31):
        assert not fam.theta((1, 1, 1, 1), p)
    assert not fam.theta((1, 2, 7, 14), INF)


def test_cubic_theta_rejects_singular():
    with pytest.raises(ValueError):
        diagonal_cubics().theta((1, 0, 2, 3), 7)


def test_cubic_theta_bad_prime_contract():
    fam = diagonal_cubics()
    rng = np.random.default_rng(2)
    rows = rng.integers(-30, 31, size=(200, 4))
    rows = rows[(rows != 0).all(axis=1)]
    for p in (5, 7, 13):
        dec = CubicDecider(p)
        verdicts = dec.decide_grid(rows)
        for row, v in zip(rows.tolist(), verdicts):
            if v == 1:
                assert math.prod(row) % p == 0


# ---------------------------------------------------------------------------
# obstruction records


def test_record_validation():
    pt = ProjPoint.from_vector((1, 1, 21))
    with pytest.raises(ValueError):
        ObstructionRecord(pt, (3, 7), 3)
    with pytest.raises(ValueError):
        ObstructionRecord(pt, (7, 3), 2)
    rec = ObstructionRecord(pt, (3, 7, INF), 3)
    assert not rec.tainted


def test_omega_conics_frozen():
    fam = diagonal_conics()
    rec = omega_pi(fam, (1, 1, 21))
    assert rec.insoluble_places == (3, 7) and rec.omega == 2 and not rec.tainted
    assert omega_pi(fam, (1, 1, 1)).omega == 0


def test_omega_all_places_and_parity():
    fam = diagonal_conics()
    rec = omega_pi(fam, (1, 1, 21), S=())
    # the real place is soluble here, so S = {} changes nothing
    assert rec.insoluble_places == (3, 7) and rec.omega == 2
    # reciprocity makes the all-places count even for every smooth fibre
    rng = np.random.default_rng(3)
    pts = rng.integers(-40, 41, size=(120, 3))
    pts = pts[(pts != 0).all(axis=1)]
    for row in pts.tolist():
        assert omega_pi(fam, row, S=()).omega % 2 == 0


def test_omega_respects_S():
    fam = diagonal_conics()
    rec = omega_pi(fam, (1, 1, 21), S={3, INF})
    assert rec.insoluble_places == (7,) and rec.omega == 1
    rec2 = omega_pi(fam, (1, 1, -1), S=())
    assert INF in rec2.insoluble_places


def test_omega_rejects_singular_point():
    with pytest.raises(ValueError):
        omega_pi(diagonal_conics(), (1, 0, 21))


def test_omega_cubics():
    fam = diagonal_cubics()
    rec = omega_pi(fam, (1, 2, 7, 14))
    assert rec.insoluble_places == (7,) and rec.omega == 1 and not rec.tainted
    assert omega_pi(fam, (1, 1, 1, 1)).omega == 0


def test_omega_tainted_on_undecided():
    fam = diagonal_conics()

    def moody_theta(x, v):
        if v == 3:
            raise Undecided(tuple(x.coords if isinstance(x, ProjPoint) else x), v)
        return fam.theta(x, v)

    moody = FamilyDescriptor(
        name="moody",
        n=2,
        f=fam.f,
        degree_f=3,
        A=2,
        Delta=fam.Delta,
        theta=moody_theta,
        smooth=fam.smooth,
        divisors=fam.divisors,
    )
    rec = omega_pi(moody, (1, 1, 21))
    assert rec.tainted and rec.insoluble_places == (7,)


# ---------------------------------------------------------------------------
# the closed conic formula


def test_omega_formula_frozen():
    assert omega_formula_conics(1, 1, 21) == 2
    assert omega_formula_conics(5, 1, 1) == 0
    assert omega_formula_conics(1, 1, 1) == 0


@pytest.mark.parametrize(
    "abc", [(2, 1, 1), (3, 1, 1), (9, 1, 5), (5, 5, 1), (0, 1, 1), (21, 35, 1)]
)
def test_omega_formula_rejects(abc):
    with pytest.raises(ValueError):
        omega_formula_conics(*abc)


def admissible_triples(bound):
    ok = [
        v
        for v in range(-bound, bound + 1)
        if v != 0 and v % 4 == 1 and all(e == 1 for e in _sqfree(v))
    ]
    for a, b, c in itertools.product(ok, repeat=3):
        if math.gcd(a, b) == math.gcd(a, c) == math.gcd(b, c) == 1:
            yield a, b, c


def _sqfree(v):
    from fibstat.arith import factorize

    return factorize(v).values()


def test_formula_matches_scan_small():
    fam = diagonal_conics()
    checked = 0
    for a, b, c in admissible_triples(30):
        assert omega_formula_conics(a, b, c) == omega_pi(fam, (a, b, c)).omega
        checked += 1
    assert checked > 200


# ---------------------------------------------------------------------------
# sigma_p exact


def _oracle_nonsplit(rep, p):
    # structural + point-count classification, independent of the residue
    # symbol route: a double line is non-split; otherwise non-split conics
    # over F_p have exactly one rational point (the vertex of the pair of
    # conjugate lines), split ones have p+1 or 2p+1
    a, b, c = (v % p for v in rep)
    if (a == 0) + (b == 0) + (c == 0) >= 2:
        return True
    count = 0
    for zeros in range(3):
        for tail in itertools.product(range(p), repeat=2 - zeros):
            x = (0,) * zeros + (1,) + tail
            if (a * x[0] * x[0] + b * x[1] * x[1] - c * x[2] * x[2]) % p == 0:
                count += 1
    return count == 1


def test_sigma_exact_frozen_at_5():
    assert sigma_exact(diagonal_conics(), 5) == Fraction(9, 31)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_sigma_exact_matches_point_count_oracle(p):
    fam = diagonal_conics()
    count = 0
    for zeros in range(3):
        for tail in itertools.product(range(p), repeat=2 - zeros):
            rep = (0,) * zeros + (1,) + tail
            got = fam.nonsplit(rep, p)
            assert got == _oracle_nonsplit(rep, p), (rep, p)
            count += got
    assert sigma_exact(fam, p) == Fraction(count, proj_size(2, p))


def test_sigma_exact_sandwich():
    fam = diagonal_conics()
    for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        s = sigma_exact(fam, p)
        assert 0 < s <= Fraction(3, p)


def test_sigma_exact_rejections():
    with pytest.raises(ValueError):
        sigma_exact(diagonal_cubics(), 5)
    with pytest.raises(ValueError):
        sigma_exact(diagonal_conics(), 2)
    with pytest.raises(ValueError):
        sigma_exact(diagonal_conics(), 15)


# ---------------------------------------------------------------------------
# sigma_p empirical


def test_sigma_empirical_conics_vs_exact_disks():
    # oracle: exhaustive classification of residue disks mod 25
    p, depth = 5, 2
    M = p**depth
    stable_insoluble = unstable = total = 0
    for abc in itertools.product(range(M), repeat=3):
        if all(v % p == 0 for v in abc):
            continue
        total += 1
        if any(v == 0 or (v % p == 0 and (v // p) % p == 0) for v in abc):
            unstable += 1
            continue
        if hilbert(Fraction(abc[0], abc[2]), Fraction(abc[1], abc[2]), p) == -1:
            stable_insoluble += 1
    lo = stable_insoluble / total
    hi = (stable_insoluble + unstable) / total

    est = sigma_empirical(diagonal_conics(), 5, 10_000, 3, seed=7)
    assert est.value - 3 * est.standard_error <= hi
    assert est.value + est.unknown_fraction + 3 * est.standard_error >= lo


def test_sigma_empirical_cubics_positive():
    est = sigma_empirical(diagonal_cubics(), 7, 10_000, 4, seed=7)
    assert est.value > 0
    assert est.value > 3 * est.standard_error
    assert est.unknown_fraction < 0.01


def test_sigma_empirical_deterministic():
    a = sigma_empirical(diagonal_conics(), 3, 2000, 4, seed=5)
    b = sigma_empirical(diagonal_conics(), 3, 2000, 4, seed=5)
    assert a == b


def test_sigma_empirical_rejections():
    fam = diagonal_conics()
    with pytest.raises(ValueError):
        sigma_empirical(fam, 5, 0, 3)
    with pytest.raises(ValueError):
        sigma_empirical(fam, 5, 10, 0)
    with pytest.raises(ValueError):
        sigma_empirical(fam, 6, 10, 2)


def test_two_adic_density_exact_value_and_mc_cross_check():
    d = conic_two_adic_density()
    assert d == Fraction(5, 12)
    est = sigma_empirical(diagonal_conics(), 2, 20_000, 14, seed=11)
    assert abs(est.value - float(d)) <= 3 * est.standard_error
    assert est.unknown_fraction < 0.01


# ---------------------------------------------------------------------------
# calibration


def test_calibrate_conics_small():
    rep = calibrate_A(diagonal_conics(), 3, 10)
    assert rep.A == 2
    assert set(rep.exception_counts) == {2}
    assert rep.exception_counts[2] > 0
    assert not rep.undecided
    pt, p = rep.witnesses[0]
    assert p == 2
    a, b, c = pt.coords
    assert a * b * c % 2 != 0
    assert diagonal_conics().theta(pt, 2)


def test_calibrate_conics_exhaustive():
    rep = calibrate_A(diagonal_conics(), 50, 100)
    assert rep.A == 2
    assert set(rep.exception_counts) == {2}
    assert len(rep.witnesses) == 64  # capped sample of a large exception set
    assert not rep.undecided


def test_calibrate_cubics():
    rep = calibrate_A(diagonal_cubics(), 20, 30)
    assert rep.exception_counts == {}
    assert rep.A == 1
    assert not rep.undecided


def test_calibrate_rejections():
    with pytest.raises(ValueError):
        calibrate_A(diagonal_conics(), 1, 10)
    with pytest.raises(ValueError):
        calibrate_A(diagonal_conics(), 5, 0)


# ---------------------------------------------------------------------------
# vectorized engines


def test_conic_grid_matches_scalar():
    rng = np.random.default_rng(5)
    coeffs = rng.integers(-200, 201, size=(3000, 3))
    coeffs = coeffs[(coeffs != 0).all(axis=1)]
    for p in (2, 3, 5, 7, 13, 97, INF):
        grid = conic_insoluble_grid(coeffs, p)
        for g, row in zip(grid.tolist(), coeffs.tolist()):
            assert g == (not conic_soluble(*row, p)), (row, p)


def test_cubic_grid_matches_direct_engine():
    rng = np.random.default_rng(9)
    rank = {Solubility.SOLUBLE: 0, Solubility.INSOLUBLE: 1, Solubility.UNKNOWN: 2}
    for p in (2, 3, 7, 13):
        rows = rng.integers(-60, 61, size=(50, 4))
        rows = rows[(rows != 0).all(axis=1)]
        dec = CubicDecider(p)
        grid = dec.decide_grid(rows)
        for row, g in zip(rows.tolist(), grid.tolist()):
            form = HomogeneousForm.diagonal(row, 3)
            assert rank[padic_point_search(form, p).status] == g, (row, p)


def test_cubic_scalar_matches_grid():
    rng = np.random.default_rng(12)
    rows = rng.integers(-40, 41, size=(40, 4))
    rows = rows[(rows != 0).all(axis=1)]
    dec = CubicDecider(7)
    grid = dec.decide_grid(rows)
    rank = {Solubility.SOLUBLE: 0, Solubility.INSOLUBLE: 1, Solubility.UNKNOWN: 2}
    for row, g in zip(rows.tolist(), grid.tolist()):
        assert rank[dec.decide(row)] == g


def test_cubic_decider_validation():
    with pytest.raises(ValueError):
        CubicDecider(6)
    with pytest.raises(ValueError):
        CubicDecider(7).decide((1, 0, 2, 3))


# ---------------------------------------------------------------------------
# cube classes


def test_cube_class_frozen_mod_7():
    assert [cube_class(u, 7) for u in (1, 6)] == [0, 0]
    assert cube_class(2, 7) == 1 and cube_class(4, 7) == 2


def test_cube_class_mod_9_table():
    assert [cube_class(u, 3) for u in (1, 8, 2, 7, 4, 5)] == [0, 0, 1, 1, 2, 2]


def test_cube_class_multiplicative():
    for p in (3, 7, 13, 31):
        mod = 9 if p == 3 else p
        units = [u for u in range(1, 3 * mod) if u % p != 0][:20]
        for u in units:
            for v in units:
                assert cube_class(u * v, p) == (cube_class(u, p) + cube_class(v, p)) % 3


def test_cube_class_trivial_when_p_is_2_mod_3():
    for p in (2, 5, 11, 17):
        for u in range(1, p):
            assert cube_class(u, p) == 0


def test_cube_class_rejects_non_unit():
    with pytest.raises(ValueError):
        cube_class(14, 7)
