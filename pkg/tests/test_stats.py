"""Record sets, moments, histograms, sigma fits, KS distance, predictions."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hyp

from fibstat.arith import factorize, primes_up_to
from fibstat.families import (
    DiskDensityEstimate,
    conic_sigma_formula,
    diagonal_conics,
    diagonal_cubics,
)
from fibstat.localsolve import INF
from fibstat.projective import count_points
from fibstat.stats import (
    CLASSIC_OMEGA,
    MomentReport,
    RecordSet,
    ScanSummary,
    TruncationWindow,
    build_sigma_table,
    classic_omega_set,
    cubic_density_table,
    gaussian_distance,
    moments,
    n_moments,
    moment_window,
    record_set,
    sample_records,
    scan,
    sigma_partial_sums,
    tau_histogram,
    tau_limit_prediction,
    truncated_moments,
    truncated_omega,
)

CONICS = diagonal_conics()
CUBICS = diagonal_cubics()


# ---------------------------------------------------------------------------
# record sets and the two scan routes


def test_scan_small_conics():
    records, summary = scan(CONICS, 5)
    assert summary.point_count == count_points(2, 5)
    assert summary.point_count == len(records) + summary.singular_count
    assert summary.tainted_count == 0
    for rec in records:
        assert rec.omega == len(rec.insoluble_places)
        assert rec.point.height <= 5


def test_scan_rejects_tiny_bound():
    with pytest.raises(ValueError):
        scan(CONICS, 2)
    with pytest.raises(ValueError):
        record_set(CONICS, 1)


def test_vectorized_conic_route_matches_scalar():
    for S in ((INF,), ()):
        records, summary = scan(CONICS, 12, S)
        via_scan = RecordSet.from_records(
            records, "diagonal_conics", 12, S, summary.singular_count
        )
        fast = record_set(CONICS, 12, S)
        assert np.array_equal(via_scan.omegas, fast.omegas)
        assert np.array_equal(via_scan.heights, fast.heights)
        assert via_scan.summary() == fast.summary()


def test_vectorized_cubic_route_matches_scalar():
    records, summary = scan(CUBICS, 6)
    via_scan = RecordSet.from_records(
        records, "diagonal_cubics", 6, (INF,), summary.singular_count
    )
    fast = record_set(CUBICS, 6)
    assert np.array_equal(via_scan.omegas, fast.omegas)
    assert np.array_equal(via_scan.heights, fast.heights)
    assert via_scan.summary() == fast.summary()
    assert fast.tainted_count == 0


def test_record_set_partition():
    rs = record_set(CONICS, 10)
    assert rs.point_count == count_points(2, 10)
    assert rs.point_count == len(rs.omegas) + rs.singular_count
    assert rs.untainted_count + rs.tainted_count == len(rs.omegas)
    assert rs.summary() == ScanSummary(rs.point_count, rs.singular_count, 0)


def test_truncate_height():
    rs = record_set(CONICS, 10)
    cut = rs.truncate_height(6)
    assert cut.B == 6
    assert (cut.heights <= 6).all()
    # the singular tally is only known for the full box
    assert cut.singular_count == 0
    full = rs.truncate_height(10)
    assert full.singular_count == rs.singular_count
    assert np.array_equal(full.omegas, rs.omegas)
    # rows below the cut agree with a direct scan at that bound
    direct = record_set(CONICS, 6)
    assert np.sort(cut.omegas).tolist() == np.sort(direct.omegas).tolist()


def test_record_set_column_mismatch():
    with pytest.raises(ValueError):
        RecordSet(
            "x",
            5,
            (),
            np.zeros(3, np.int64),
            np.zeros(2, np.int64),
            np.zeros(3, bool),
            0,
        )


# ---------------------------------------------------------------------------
# sampling


def test_sampler_thread_count_invariance():
    one = sample_records(CONICS, 50, 600, seed=3, threads=1)
    two = sample_records(CONICS, 50, 600, seed=3, threads=2)
    assert np.array_equal(one.omegas, two.omegas)
    assert np.array_equal(one.heights, two.heights)
    assert one.singular_count == two.singular_count
    assert one.sampled and two.sampled


def test_sampler_rows_are_plausible():
    rs = sample_records(CONICS, 50, 400, seed=9)
    assert len(rs.omegas) == 400
    assert (rs.heights >= 1).all() and (rs.heights <= 50).all()
    assert (rs.omegas >= 0).all()
    assert rs.singular_count >= 0


def test_sampler_parity_with_empty_s():
    # with no excluded places the insoluble places pair up: omega is even
    rs = sample_records(CONICS, 50, 600, seed=3, S=())
    assert (rs.omegas % 2 == 0).all()


def test_sampler_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_records(CONICS, 50, 0, seed=1)
    with pytest.raises(ValueError):
        sample_records(CONICS, 2, 10, seed=1)


# ---------------------------------------------------------------------------
# sigma tables and partial-sum fits


def test_conic_sigma_table_entries():
    tab = build_sigma_table(CONICS, 1000)
    assert 2 not in tab.entries
    assert len(tab.entries) == len(primes_up_to(1000)) - 1
    for p in (3, 5, 97):
        assert tab.entries[p] == conic_sigma_formula(p)
    assert tab.entries[3] == Fraction(6, 13)


def test_conic_partial_sum_fit_frozen():
    # p_max 1e5, 24 geometric cutoffs: values pinned from this implementation
    tab = build_sigma_table(CONICS, 100_000)
    fit = sigma_partial_sums(tab.entries, Fraction(3, 2))
    assert abs(fit.slope - 1.4729) < 2e-3
    assert abs(fit.beta - (-0.4052)) < 2e-3
    assert fit.envelope_constant < 0.5
    cutoffs = sorted(fit.partial_sums)
    upper = cutoffs[len(cutoffs) // 2 :]
    betas = [
        fit.partial_sums[x] - 1.5 * math.log(math.log(x)) for x in upper
    ]
    assert max(betas) - min(betas) < 0.05


def test_classic_partial_sums_track_mertens():
    sigma = {int(p): Fraction(1, int(p)) for p in primes_up_to(100_000)}
    fit = sigma_partial_sums(sigma, 1)
    assert abs(fit.slope - 0.9809) < 2e-3
    # the constant term sits near Mertens' 0.2615
    assert abs(fit.beta - 0.2661) < 2e-3


def test_partial_sum_validation():
    sigma = {int(p): Fraction(1, int(p)) for p in primes_up_to(1000)}
    with pytest.raises(ValueError, match="tau_histogram"):
        sigma_partial_sums(sigma, 0)
    with pytest.raises(ValueError):
        sigma_partial_sums({3: Fraction(1, 3)}, 1)
    with pytest.raises(ValueError):
        sigma_partial_sums(sigma, 1, cutoffs=[50])  # covers fewer than 25 primes
    with pytest.raises(ValueError):
        sigma_partial_sums(sigma, 1, cutoffs=[2, 500])


def test_residuals_center_on_zero():
    tab = build_sigma_table(CONICS, 20_000)
    fit = sigma_partial_sums(tab.entries, Fraction(3, 2))
    assert abs(sum(fit.residuals.values())) < 1e-9


# ---------------------------------------------------------------------------
# moments


def test_moment_order_zero_is_one():
    rs = classic_omega_set(500)
    rep = moments(rs, 500, 1, 0)
    assert rep.value == 1.0 and rep.mu_r_reference == 1.0


def test_normal_reference_moments():
    rs = classic_omega_set(500)
    refs = {r: moments(rs, 500, 1, r).mu_r_reference for r in (1, 2, 3, 4, 6)}
    assert refs == {1: 0.0, 2: 1.0, 3: 0.0, 4: 3.0, 6: 15.0}


def test_moment_matches_hand_computation():
    rs = classic_omega_set(2000)
    llB = math.log(math.log(2000))
    scale = math.sqrt(llB)
    rep = moments(rs, 2000, 1, 1, centering="paper")
    hand = float(np.mean((rs.omegas - llB) / scale))
    assert abs(rep.value - hand) < 1e-12
    center = sum(1.0 / int(p) for p in primes_up_to(2000))
    rep_e = moments(rs, 2000, 1, 1, centering="empirical")
    hand_e = float(np.mean((rs.omegas - center) / scale))
    assert abs(rep_e.value - hand_e) < 1e-12


def test_moments_drop_low_heights_and_taint():
    rs = record_set(CONICS, 12)
    rep = moments(rs, 12, Fraction(3, 2), 2, centering="paper")
    keep = rs.heights >= 3
    llB = math.log(math.log(12))
    z = (rs.omegas[keep] - 1.5 * llB) / math.sqrt(1.5 * llB)
    assert abs(rep.value - float(np.mean(z**2))) < 1e-12


def test_moments_validation():
    rs = classic_omega_set(500)
    with pytest.raises(ValueError, match="tau_histogram"):
        moments(rs, 500, 0, 2)
    with pytest.raises(ValueError):
        moments(rs, 500, 1, -1)
    with pytest.raises(ValueError):
        moments(rs, 500, 1, 2, centering="other")
    records, _ = scan(CONICS, 8)
    with pytest.raises(ValueError, match="RecordSet or a SigmaTable"):
        moments(records, 8, Fraction(3, 2), 1, centering="empirical")
    # a sigma table unlocks empirical centering for plain record lists
    tab = build_sigma_table(CONICS, 200)
    rep = moments(records, 8, Fraction(3, 2), 1, centering="empirical", sigma=tab)
    assert isinstance(rep, MomentReport)


# ---------------------------------------------------------------------------
# truncation windows


def test_window_validation():
    with pytest.raises(ValueError):
        TruncationWindow(0, 2.0, 5.0)
    with pytest.raises(ValueError):
        TruncationWindow(1, 5.0, 2.0)
    with pytest.raises(ValueError):
        TruncationWindow(1, 0.5, 2.0)


def test_moment_window_degenerates_at_desk_scale():
    for B in (10**4, 10**5, 10**8):
        with pytest.raises(ValueError, match="degenerate"):
            moment_window(B, 2, 2)


def test_moment_window_opens_at_astronomical_heights():
    w = moment_window(10**80, 1, 2)
    llB = math.log(math.log(10**80))
    assert w.r == 1
    assert abs(w.t0 - llB**2) < 1e-9
    assert abs(w.t1 - (10**80) ** (1 / 15)) < 1e-3
    assert w.t0 < w.t1


def test_truncated_omega_exact():
    records, _ = scan(CONICS, 30)
    tab = build_sigma_table(CONICS, 200)
    window = TruncationWindow(1, 2.0, 10.0)
    expect_center = tab.entries[3] + tab.entries[5] + tab.entries[7]
    for rec in records[:40]:
        got = truncated_omega(rec, window, tab)
        hits = sum(1 for pl in rec.insoluble_places if pl != INF and 2 < pl <= 10)
        assert got == hits - expect_center
        assert isinstance(got, Fraction)


def test_truncated_omega_missing_entry():
    records, _ = scan(CONICS, 8)
    window = TruncationWindow(1, 2.0, 7.0)
    with pytest.raises(ValueError, match="missing p=5"):
        truncated_omega(records[0], window, {3: Fraction(6, 13), 7: Fraction(4, 19)})


def test_truncated_moments_match_hand_sum():
    records, _ = scan(CONICS, 30)
    tab = build_sigma_table(CONICS, 200)
    window = TruncationWindow(1, 2.0, 10.0)
    rep = truncated_moments(records, 30, Fraction(3, 2), window, tab, 1)
    scale = math.sqrt(1.5 * math.log(math.log(30)))
    vals = [
        float(truncated_omega(rec, window, tab)) / scale
        for rec in records
        if not rec.tainted and rec.point.height >= 3
    ]
    assert abs(rep.value - float(np.mean(vals))) < 1e-12
    assert rep.centering == "truncated"


def test_truncated_moments_window_must_fit():
    records, _ = scan(CONICS, 8)
    tab = build_sigma_table(CONICS, 200)
    with pytest.raises(ValueError):
        truncated_moments(records, 8, Fraction(3, 2), TruncationWindow(1, 2.0, 9.0), tab, 2)


# ---------------------------------------------------------------------------
# the exact histogram


def test_tau_partition_identity_conics():
    rs = record_set(CONICS, 10)
    th = tau_histogram(rs)
    assert th.point_count == count_points(2, 10)
    total = sum(th.masses.values()) + Fraction(
        th.tainted_count + th.singular_count, th.point_count
    )
    assert total == 1


def test_tau_partition_identity_cubics():
    rs = record_set(CUBICS, 6)
    th = tau_histogram(rs)
    assert th.tainted_count == 0
    assert sum(th.counts.values()) + th.singular_count == th.point_count
    for j, c in th.counts.items():
        assert th.masses[j] == Fraction(c, th.point_count)


def test_tau_histogram_from_plain_records():
    records, summary = scan(CONICS, 8)
    th = tau_histogram(records, B=8, singular_count=summary.singular_count)
    rs_th = tau_histogram(record_set(CONICS, 8))
    assert th.counts == rs_th.counts
    assert th.point_count == rs_th.point_count
    with pytest.raises(ValueError):
        tau_histogram(records)  # B is required for plain lists


def test_tau_histogram_rejects_non_integer():
    rs = RecordSet(
        "x", 5, (), np.array([0.5, 1.0]), np.array([3, 4]), np.zeros(2, bool), 0
    )
    with pytest.raises(ValueError):
        tau_histogram(rs)


def test_histogram_moment_identity():
    # sum_j j^r tau(j) equals the direct power mean, exactly, once the
    # histogram's all-points denominator is swapped for the untainted count
    rs = record_set(CUBICS, 6)
    th = tau_histogram(rs)
    for r in (1, 2, 3):
        direct = n_moments(rs, r)
        via_masses = (
            sum(Fraction(j**r) * m for j, m in th.masses.items())
            * Fraction(th.point_count, rs.untainted_count)
        )
        assert direct == via_masses


def test_n_moments_validation():
    rs = record_set(CONICS, 8)
    with pytest.raises(ValueError):
        n_moments(rs, 0)
    assert n_moments(rs, 1) == Fraction(int(rs.omegas.sum()), len(rs.omegas))


# ---------------------------------------------------------------------------
# distance to the normal law


def test_gaussian_distance_on_synthetic_normal():
    rng = np.random.default_rng(7)
    H, N = 1000, 5000
    center = math.log(math.log(H))
    om = center + math.sqrt(center) * rng.standard_normal(N)
    rs = RecordSet("synthetic", H, (), om, np.full(N, H, np.int64), np.zeros(N, bool), 0)
    ks = gaussian_distance(rs, H, 1)
    assert ks < 2 / math.sqrt(N)


def test_gaussian_distance_degenerate_mass():
    H = 1000
    center = math.log(math.log(H))
    om = np.full(200, center)
    rs = RecordSet("synthetic", H, (), om, np.full(200, H, np.int64), np.zeros(200, bool), 0)
    assert abs(gaussian_distance(rs, H, 1) - 0.5) < 1e-12


def test_gaussian_distance_validation():
    rs = classic_omega_set(50)
    with pytest.raises(ValueError):
        gaussian_distance(rs, 50, 0)
    with pytest.raises(ValueError):
        gaussian_distance(classic_omega_set(90), 90, 1)  # under 100 rows
    records, _ = scan(CONICS, 10)
    with pytest.raises(ValueError):
        gaussian_distance(records, 10, Fraction(3, 2), centering="empirical")


def test_gaussian_distance_classic_both_centerings():
    rs = classic_omega_set(20_000)
    paper = gaussian_distance(rs, 20_000, 1, centering="paper")
    empirical = gaussian_distance(rs, 20_000, 1, centering="empirical")
    assert 0 < paper < 1 and 0 < empirical < 1
    # the sigma-sum centering absorbs the Mertens constant, so it sits closer
    assert empirical < paper


# ---------------------------------------------------------------------------
# the limit histogram prediction


def test_tau_prediction_exact_toy():
    qs = {2: 0.0, 3: 0.5, 5: 0.25, 7: 0.0}
    # product: (0.5 + 0.5 z)(0.75 + 0.25 z)
    expect = {0: 0.375, 1: 0.5, 2: 0.125, 3: 0.0}
    for j, v in expect.items():
        pred = tau_limit_prediction(CUBICS, j, 7, qs)
        assert abs(pred.value - v) < 1e-12
        assert pred.std_error == 0.0
        assert pred.tail_bound == CUBICS.degree_f / 7
        assert float(pred) == pred.value


def test_tau_prediction_error_propagation():
    src = {2: (0.3, 0.01)}
    p0 = tau_limit_prediction(CUBICS, 0, 2, src)
    p1 = tau_limit_prediction(CUBICS, 1, 2, src)
    assert abs(p0.value - 0.7) < 1e-12 and abs(p1.value - 0.3) < 1e-12
    assert abs(p0.std_error - 0.01) < 1e-12
    assert abs(p1.std_error - 0.01) < 1e-12


def test_tau_prediction_folds_unknown_fraction():
    est = DiskDensityEstimate(2, 4, 100, 0.3, 0.01, 0.02)
    pred = tau_limit_prediction(CUBICS, 1, 2, {2: est})
    assert abs(pred.std_error - 0.03) < 1e-12


def test_tau_prediction_callable_source():
    pred = tau_limit_prediction(CUBICS, 0, 13, lambda p: 0.0)
    assert pred.value == 1.0


def test_tau_prediction_validation():
    with pytest.raises(ValueError):
        tau_limit_prediction(CONICS, 1, 7, {})  # Delta != 0
    with pytest.raises(ValueError):
        tau_limit_prediction(CUBICS, -1, 7, lambda p: 0.0)
    with pytest.raises(ValueError, match="missing p=3"):
        tau_limit_prediction(CUBICS, 0, 3, {2: 0.1})
    with pytest.raises(ValueError):
        tau_limit_prediction(CUBICS, 0, 2, {2: 1.5})


def test_cubic_density_table_shape():
    table = cubic_density_table(13, sample_size=400, seed=5)
    assert set(table) == {2, 3, 5, 7, 11, 13}
    for p, est in table.items():
        assert est.prime == p
        assert 0 <= est.value <= 1
    # only split primes can obstruct; the rest must come out structurally zero
    assert table[5].value == 0.0 and table[11].value == 0.0


# ---------------------------------------------------------------------------
# classic cross-check


def test_classic_omega_values():
    rs = classic_omega_set(30)
    expect = [1, 1, 1, 2, 1, 1, 1, 2, 1, 2, 1, 2, 2, 1, 1, 2, 1, 2, 2, 2, 1, 2, 1, 2, 1, 2, 1, 3]
    assert rs.omegas.tolist() == expect
    assert rs.heights.tolist() == list(range(3, 31))
    assert rs.family_name == CLASSIC_OMEGA


@settings(max_examples=60, deadline=None)
@given(hyp.integers(min_value=3, max_value=2000))
def test_classic_omega_matches_factorization(m):
    rs = classic_omega_set(2000)
    assert rs.omegas[m - 3] == len(factorize(m))


def test_classic_omega_validation():
    with pytest.raises(ValueError):
        classic_omega_set(2)
