"""Exact transforms, spectra, and the walk-based squared-coefficient estimator."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from junta_walk.fourier import (
    BULK_WHT_MAX_N,
    EstimatorParams,
    Spectrum,
    blocks_for,
    default_lag,
    estimate_bounded_influence,
    estimate_sq_coeff,
    estimate_sq_coeff_bulk,
    estimator_bias_bound,
    expected_bounded_influence,
    expected_sq_estimate,
    fourier_weight,
    inner_product,
    inverse_wht,
    project_spectrum,
    spectrum_to_csv,
    subcube_averages,
    subcube_projection_exact,
    wht,
    wht_int,
)
from junta_walk.functions import and_table, parity_table, random_table
from junta_walk.hypercube import IndexSet, TruthTable
from junta_walk.walk import RefreshPairs, WalkConfig, generate_walk, harvest_refresh_pairs

sign_tables = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.lists(
        st.sampled_from([-1, 1]), min_size=1 << n, max_size=1 << n
    ).map(lambda vals: TruthTable(n, vals))
)


# ---------------------------------------------------------------------------
# Transforms


def test_wht_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        wht(np.ones(3))


def test_wht_on_table_returns_spectrum():
    f = parity_table(5, [2, 4])
    spec = wht(f)
    assert isinstance(spec, Spectrum)
    expected = np.zeros(32)
    expected[IndexSet.of(5, [2, 4]).mask] = 1.0
    np.testing.assert_allclose(spec.coeffs, expected, atol=1e-12)


def test_wht_int_matches_float_butterfly():
    rng = np.random.default_rng(0)
    v = rng.integers(-3, 4, size=64)
    np.testing.assert_array_equal(wht_int(v), wht(v.astype(float)).astype(np.int64))
    assert wht_int(v).dtype == np.int64


def test_and2_coefficients():
    spec = Spectrum.from_table(and_table(2, [1, 2]))
    np.testing.assert_allclose(spec.coeffs, [0.5, 0.5, 0.5, -0.5], atol=1e-12)


def test_and3_coefficients():
    spec = Spectrum.from_table(and_table(3, [1, 2, 3]))
    np.testing.assert_allclose(
        spec.coeffs, [0.75, 0.25, 0.25, -0.25, 0.25, -0.25, -0.25, 0.25], atol=1e-12
    )


@given(sign_tables)
def test_parseval(f):
    assert abs(Spectrum.from_table(f).sq_weight() - 1.0) < 1e-12


@given(sign_tables)
def test_spectrum_table_round_trip(f):
    g = Spectrum.from_table(f).to_table()
    np.testing.assert_array_equal(g.values, f.values)


def test_inverse_wht_reproduces_values():
    f = random_table(6, np.random.default_rng(4))
    spec = Spectrum.from_table(f)
    np.testing.assert_allclose(inverse_wht(spec.coeffs), f.values, atol=1e-9)


def test_to_table_rejects_non_boolean_spectrum():
    with pytest.raises(ValueError):
        Spectrum(2, [0.3, 0.0, 0.0, 0.0]).to_table()


def test_largest_orders_by_magnitude():
    spec = Spectrum.from_table(and_table(3, [1, 2, 3]))
    top = spec.largest(2)
    assert top[0][0].mask == 0 and abs(top[0][1] - 0.75) < 1e-12
    assert abs(top[1][1]) == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# Projections and inner products


def test_project_spectrum_keeps_only_subsets():
    spec = Spectrum.from_table(and_table(3, [1, 2, 3]))
    proj = project_spectrum(spec, IndexSet.of(3, [1, 2]))
    for mask in range(8):
        if mask & 0b100:
            assert proj.coeffs[mask] == 0.0
        else:
            assert proj.coeffs[mask] == spec.coeffs[mask]


def test_fourier_weight_full_set_is_total_mass():
    f = random_table(5, np.random.default_rng(9))
    spec = Spectrum.from_table(f)
    assert fourier_weight(spec, IndexSet.full(5)) == pytest.approx(1.0, abs=1e-12)


def test_fourier_weight_monotone_under_inclusion():
    spec = Spectrum.from_table(random_table(5, np.random.default_rng(10)))
    small = fourier_weight(spec, IndexSet.of(5, [1, 3]))
    large = fourier_weight(spec, IndexSet.of(5, [1, 3, 4]))
    assert small <= large + 1e-12


@given(sign_tables, sign_tables)
def test_inner_product_parseval_form(f, g):
    if f.n != g.n:
        with pytest.raises(ValueError):
            inner_product(f, g)
        return
    direct = inner_product(f, g)
    via_spectra = inner_product(Spectrum.from_table(f), Spectrum.from_table(g))
    assert direct == pytest.approx(via_spectra, abs=1e-10)
    assert inner_product(f, f) == pytest.approx(1.0)


def test_inner_product_rejects_mixed_kinds():
    f = parity_table(3, [1])
    with pytest.raises(TypeError):
        inner_product(f, Spectrum.from_table(f))


def test_subcube_projection_exact_brute_force():
    # for every refresh set R, resampling exactly R's coordinates leaves
    # E[f(x) f(y)] = sum of squared coefficients disjoint from R
    n = 4
    f = random_table(n, np.random.default_rng(12))
    spec = Spectrum.from_table(f)
    for r_mask in range(1 << n):
        R = IndexSet(n, r_mask)
        acc = 0.0
        count = 0
        for x in range(1 << n):
            for z in range(1 << n):
                y = (x & ~r_mask) | (z & r_mask)
                acc += f(x) * f(y)
                count += 1
        assert acc / count == pytest.approx(subcube_projection_exact(spec, R), abs=1e-12)


def test_subcube_averages_on_and():
    f = and_table(2, [1, 2])
    avg = subcube_averages(f, IndexSet.of(2, [1]))
    # coordinate 1 = +1: f is constant +1; coordinate 1 = -1: mean of {+1, -1}
    np.testing.assert_allclose(avg, [1.0, 0.0])


def test_spectrum_to_csv():
    spec = Spectrum.from_table(parity_table(3, [1, 3]))
    buf = io.StringIO()
    spectrum_to_csv(spec, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "mask,coords,coefficient"
    assert len(lines) == 9
    mask, coords, coeff = lines[6].split(",")  # mask 5 = {1, 3}
    assert (mask, coords) == ("5", "1|3")
    assert float(coeff) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Estimator parameters


def test_estimator_params_validation():
    with pytest.raises(ValueError):
        EstimatorParams(lag=0, pair_count=5)
    with pytest.raises(ValueError):
        EstimatorParams(lag=3, pair_count=0)
    with pytest.raises(ValueError):
        EstimatorParams(lag=3, pair_count=5, block_spacing=-1)


def test_estimator_params_geometry():
    params = EstimatorParams(lag=4, pair_count=3, block_spacing=2)
    assert params.stride == 7
    assert params.required_walk_length == 2 * 7 + 4 + 2


def test_certified_params():
    params = EstimatorParams.certified(8, theta=0.1, delta=0.05)
    assert params.lag == default_lag(8, 0.1)
    assert params.pair_count == blocks_for(0.1 / 8, 0.05)
    assert params.tolerance == pytest.approx(0.025)
    assert params.confidence == pytest.approx(0.95)


def test_default_lag_and_blocks_frozen_values():
    assert default_lag(8, 0.1) == 18  # ceil(4 ln 80)
    assert blocks_for(0.1, 0.05) == 738
    with pytest.raises(ValueError):
        default_lag(8, 0.0)
    with pytest.raises(ValueError):
        blocks_for(0.0, 0.05)
    with pytest.raises(ValueError):
        blocks_for(0.1, 1.0)


def test_bias_bound():
    assert estimator_bias_bound(8, 18) == pytest.approx(math.exp(-4.5))


# ---------------------------------------------------------------------------
# Squared-coefficient estimation


def test_estimate_on_own_parity_is_exactly_one():
    # for f = chi_S each sample is chi_S(x)chi_S(y)chi_S(x xor y) = +1
    S = IndexSet.of(6, [2, 5])
    f = parity_table(6, [2, 5])
    params = EstimatorParams(lag=5, pair_count=200)
    walk = generate_walk(f, WalkConfig(6, params.required_walk_length, seed=3))
    assert estimate_sq_coeff(walk, S, params) == 1.0


def test_lag_averaging_cancels_full_set_alternation():
    # f = chi_[n] against S = empty: lag-t samples alternate (-1)^t, and the
    # two-lag average is identically zero
    n = 5
    f = parity_table(n, range(1, n + 1))
    params = EstimatorParams(lag=7, pair_count=300)
    walk = generate_walk(f, WalkConfig(n, params.required_walk_length, seed=8))
    assert estimate_sq_coeff(walk, IndexSet(n, 0), params) == 0.0
    spec = Spectrum.from_table(f)
    assert expected_sq_estimate(spec, IndexSet(n, 0), lag=7) == 0.0


def test_estimate_needs_long_enough_walk():
    f = parity_table(4, [1])
    params = EstimatorParams(lag=5, pair_count=100)
    walk = generate_walk(f, WalkConfig(4, params.required_walk_length - 1, seed=1))
    with pytest.raises(ValueError):
        estimate_sq_coeff(walk, IndexSet(4, 0), params)


def test_estimate_dimension_mismatch():
    f = parity_table(4, [1])
    walk = generate_walk(f, WalkConfig(4, 50, seed=1))
    with pytest.raises(ValueError):
        estimate_sq_coeff(walk, IndexSet(5, 0), EstimatorParams(lag=2, pair_count=5))


def test_expected_estimate_within_bias_bound_of_truth():
    rng = np.random.default_rng(5)
    for n in (4, 6):
        f = random_table(n, rng)
        spec = Spectrum.from_table(f)
        lag = default_lag(n, 0.05)
        for mask in (0, 1, (1 << n) - 1):
            S = IndexSet(n, mask)
            err = abs(expected_sq_estimate(spec, S, lag) - spec.coeff(S) ** 2)
            assert err <= estimator_bias_bound(n, lag) + 1e-12


@settings(max_examples=15)
@given(st.integers(min_value=0, max_value=200))
def test_estimator_concentrates_near_expectation(seed):
    n = 5
    f = random_table(n, np.random.default_rng(seed))
    spec = Spectrum.from_table(f)
    S = IndexSet.of(n, [1, 3])
    params = EstimatorParams(lag=default_lag(n, 0.2), pair_count=4000)
    walk = generate_walk(f, WalkConfig(n, params.required_walk_length, seed=seed + 1))
    est = estimate_sq_coeff(walk, S, params)
    # terms are means of [-1, 1] samples; walk correlation inflates variance
    # by a small constant, so test at a generous 8 / sqrt(m)
    assert abs(est - expected_sq_estimate(spec, S, params.lag)) < 8 / math.sqrt(4000)


def test_bulk_matches_per_set_estimates():
    n = 5
    f = random_table(n, np.random.default_rng(6))
    params = EstimatorParams(lag=6, pair_count=500)
    walk = generate_walk(f, WalkConfig(n, params.required_walk_length, seed=2))
    bulk = estimate_sq_coeff_bulk(walk, params)
    for mask in range(1 << n):
        single = estimate_sq_coeff(walk, IndexSet(n, mask), params)
        assert bulk[mask] == pytest.approx(single, abs=1e-9)


def test_bulk_rejects_large_n():
    params = EstimatorParams(lag=1, pair_count=1)
    walk = generate_walk(parity_table(4, [1]), WalkConfig(4, 10, seed=0))
    object.__setattr__(walk, "n", BULK_WHT_MAX_N + 1)
    with pytest.raises(ValueError):
        estimate_sq_coeff_bulk(walk, params)


# ---------------------------------------------------------------------------
# Bounded-influence contrasts


def _exhaustive_pairs(f: TruthTable, r_mask: int) -> RefreshPairs:
    """All (x, y) pairs whose y resamples exactly the coordinates in r_mask."""
    n = f.n
    xs, ys = [], []
    for x in range(1 << n):
        for z in range(1 << n):
            xs.append(x)
            ys.append((x & ~r_mask) | (z & r_mask))
    xs = np.array(xs, dtype=np.uint64)
    ys = np.array(ys, dtype=np.uint64)
    return RefreshPairs(
        n=n,
        x_bits=xs,
        y_bits=ys,
        label_x=f.values[xs.astype(np.int64)],
        label_y=f.values[ys.astype(np.int64)],
        refreshed_masks=np.full(len(xs), r_mask, dtype=np.uint64),
    )


def test_contrast_on_exhaustive_refresh_sets():
    # mixing exhaustive R and complement-of-R pair sets realizes the contrast
    # exactly: l(R without i) - l(R with i) for each coordinate i
    n = 4
    f = random_table(n, np.random.default_rng(13))
    spec = Spectrum.from_table(f)
    for r_mask in (0b0011, 0b1010, 0b0110):
        with_i = _exhaustive_pairs(f, r_mask | 0b0001)
        without_i = _exhaustive_pairs(f, r_mask & ~0b0001)
        merged = RefreshPairs(
            n=n,
            x_bits=np.concatenate([with_i.x_bits, without_i.x_bits]),
            y_bits=np.concatenate([with_i.y_bits, without_i.y_bits]),
            label_x=np.concatenate([with_i.label_x, without_i.label_x]),
            label_y=np.concatenate([with_i.label_y, without_i.label_y]),
            refreshed_masks=np.concatenate(
                [with_i.refreshed_masks, without_i.refreshed_masks]
            ),
        )
        got = estimate_bounded_influence(merged, 1)
        want = subcube_projection_exact(
            spec, IndexSet(n, r_mask & ~0b0001)
        ) - subcube_projection_exact(spec, IndexSet(n, r_mask | 0b0001))
        assert got == pytest.approx(want, abs=1e-12)


def test_contrast_examples_from_harvested_pairs():
    from junta_walk.walk import effective_refresh_density

    n, gap, m = 4, 3, 120_000
    p = effective_refresh_density(n, gap)
    tol = 6 / math.sqrt(m / 4)

    pairs = harvest_refresh_pairs(parity_table(n, [1]), n, m, gap, seed=20)
    assert estimate_bounded_influence(pairs, 1) == pytest.approx(1.0, abs=tol)
    assert estimate_bounded_influence(pairs, 2) == pytest.approx(0.0, abs=tol)

    pairs = harvest_refresh_pairs(and_table(n, [1, 2]), n, m, gap, seed=21)
    want = 0.25 + 0.25 * (1 - p)
    assert estimate_bounded_influence(pairs, 1) == pytest.approx(want, abs=tol)


def test_contrast_matches_exact_value_statistically():
    from junta_walk.walk import effective_refresh_density

    n, gap, m = 5, 4, 150_000
    f = random_table(n, np.random.default_rng(22))
    spec = Spectrum.from_table(f)
    p = effective_refresh_density(n, gap)
    pairs = harvest_refresh_pairs(f, n, m, gap, seed=23)
    for i in (1, 3, 5):
        got = estimate_bounded_influence(pairs, i)
        want = expected_bounded_influence(spec, i, p)
        assert got == pytest.approx(want, abs=6 / math.sqrt(m / 4))


def test_contrast_requires_both_buckets():
    f = parity_table(3, [1])
    pairs = _exhaustive_pairs(f, 0b111)  # every pair refreshes every coordinate
    with pytest.raises(ValueError):
        estimate_bounded_influence(pairs, 2)


def test_contrast_coordinate_range():
    f = parity_table(3, [1])
    pairs = harvest_refresh_pairs(f, 3, 100, 2, seed=1)
    with pytest.raises(ValueError):
        estimate_bounded_influence(pairs, 4)
    with pytest.raises(ValueError):
        expected_bounded_influence(Spectrum.from_table(f), 0, 0.5)
