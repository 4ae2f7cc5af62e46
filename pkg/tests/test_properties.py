import json
import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from siet_mac import errors
from siet_mac.equilibria import (
    DecoderSpec,
    GameParams,
    best_response,
    equilibrium_point,
    is_eta_ne,
    ne_rates_sic,
    ne_rates_sud,
    ne_region_contains,
    ne_region_samples,
    point_record,
    solve_beta_directional,
    solve_beta_uniform,
)
from siet_mac.model import SnrTable, b_coop, b_ind, energy_max
from siet_mac.regions import (
    BscParams,
    RateTuple,
    bsc_info_energy_capacity,
    capacity_witness,
    sum_rate_bound,
    witness_satisfies,
)

from oracles import capacity_ok, energy

snr_value = st.floats(0.1, 100.0)
unit = st.floats(0.0, 1.0)


@st.composite
def instances(draw, k_min=2, k_max=4):
    k = draw(st.integers(k_min, k_max))
    s1 = draw(st.lists(snr_value, min_size=k, max_size=k))
    s2 = draw(st.lists(snr_value, min_size=k, max_size=k))
    beta = draw(st.lists(unit, min_size=k, max_size=k))
    return SnrTable(s1, s2), np.array(beta)


@given(instances(), st.integers(0, 3))
def test_energy_non_increasing(inst, j):
    snr, beta = inst
    j = j % snr.k
    assume(beta[j] < 0.999)
    up = beta.copy()
    up[j] = min(1.0, beta[j] + 1e-3)
    assert energy_max(snr, up) <= energy_max(snr, beta) + 1e-12 * energy_max(snr, beta)


@given(instances())
def test_energy_matches_loop_formula_and_endpoints(inst):
    snr, beta = inst
    assert math.isclose(energy_max(snr, beta), energy(snr.snr2, beta), rel_tol=1e-12)
    assert energy_max(snr, np.ones(snr.k)) == b_ind(snr)
    assert energy_max(snr, np.zeros(snr.k)) == b_coop(snr)
    assert 1.0 <= b_ind(snr) <= b_coop(snr)


@given(instances(), st.randoms(use_true_random=False))
def test_sic_telescopes_and_dominates(inst, rnd):
    snr, beta = inst
    order = list(range(snr.k))
    rnd.shuffle(order)
    sic = ne_rates_sic(snr, beta, order)
    sud = ne_rates_sud(snr, beta)
    total = sum_rate_bound(snr, beta, range(snr.k))
    assert abs(sic.sum() - total) <= 1e-9
    assert math.isclose(sic[order[0]], sud[order[0]], rel_tol=1e-12, abs_tol=1e-15)
    assert np.all(sic >= sud - 1e-12)


@given(instances(), st.integers(0, 3), st.integers(0, 3))
def test_sum_rate_bound_monotone(inst, extra, j):
    snr, beta = inst
    base = [0]
    bigger = sorted({0, extra % snr.k})
    assert sum_rate_bound(snr, beta, bigger) >= sum_rate_bound(snr, beta, base)
    j = j % snr.k
    up = beta.copy()
    up[j] = min(1.0, up[j] + 0.1)
    assert sum_rate_bound(snr, up, range(snr.k)) >= sum_rate_bound(snr, beta, range(snr.k))


@given(instances(), unit, st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4))
def test_manifold_closure(inst, frac, w):
    snr, _ = inst
    b = b_ind(snr) + frac * (b_coop(snr) - b_ind(snr))
    for beta in (solve_beta_uniform(snr, b), solve_beta_directional(snr, b, w[: snr.k])):
        if b > b_ind(snr):
            assert abs(energy_max(snr, beta) - b) <= 1e-10 * max(1.0, b)
        else:
            assert np.all(beta == 1.0)


@given(instances(), unit, st.integers(0, 3))
def test_best_response_is_largest_feasible(inst, frac, i):
    snr, beta = inst
    i = i % snr.k
    b = 1.0 + frac * (b_coop(snr) - 1.0)
    try:
        br = best_response(snr, GameParams(b, 0.1), beta, i)
    except errors.NoFeasibleResponse:
        trial = beta.copy()
        trial[i] = 0.0
        assert energy_max(snr, trial) < b
        return
    trial = beta.copy()
    trial[i] = br
    assert energy_max(snr, trial) >= b - 1e-9 * b
    if br < 1.0:
        trial[i] = min(1.0, br + 1e-6)
        assert energy_max(snr, trial) < b + 1e-9 * b


@given(instances(k_max=3), unit, unit)
def test_capacity_witness_soundness(inst, shrink, frac):
    snr, beta = inst
    r = ne_rates_sud(snr, beta) * (0.5 + 0.5 * shrink)
    top = energy_max(snr, beta)
    b = frac * top
    pt = RateTuple(r, top)
    w = capacity_witness(snr, b, pt)
    assert w is not None  # beta itself certifies the point
    assert witness_satisfies(snr, b, pt, w)
    assert capacity_ok(snr.snr1, snr.snr2, b, r, top, w)


@given(instances(k_max=3), unit, st.integers(0, 1))
def test_equilibrium_soundness_and_containment(inst, frac, which):
    snr, _ = inst
    b = frac * b_coop(snr)
    params = GameParams(b, 1e-6)
    dec = DecoderSpec.sud() if which == 0 else DecoderSpec.sic(list(range(snr.k))[::-1])
    for pt in ne_region_samples(snr, params, dec, 4):
        assert is_eta_ne(snr, params, pt)
        assert ne_region_contains(snr, params, pt.rates, dec, tol=1e-7)
        assert capacity_witness(snr, b, pt.rates) is not None


@given(unit, unit, st.integers(0, 15), st.integers(0, 15))
def test_time_share_accepts_convex_combinations(frac, lam, i, j):
    snr = SnrTable([3.0, 8.0], [5.0, 2.0])
    b = frac * b_coop(snr)
    params = GameParams(b, 1e-3)
    sud = ne_region_samples(snr, params, DecoderSpec.sud(), 16)
    sic = ne_region_samples(snr, params, DecoderSpec.sic([1, 0]), 16)
    a = sud[i % len(sud)].rates.as_array()
    c = sic[j % len(sic)].rates.as_array()
    mix = lam * a + (1 - lam) * c
    pt = RateTuple(mix[:-1], mix[-1])
    assert ne_region_contains(snr, params, pt, DecoderSpec.time_share(), samples=16)


@given(st.floats(0.0, 0.5), unit, unit)
def test_bsc_non_increasing(p, x, y):
    lo, hi = sorted((x * (1 - p), y * (1 - p)))
    f_lo = bsc_info_energy_capacity(BscParams(p, lo))
    f_hi = bsc_info_energy_capacity(BscParams(p, hi))
    assert f_hi <= f_lo + 1e-15
    if hi <= 0.5:
        assert f_hi == f_lo


@given(instances(), unit)
def test_point_record_round_trip(inst, frac):
    snr, beta = inst
    params = GameParams(frac * b_coop(snr), 0.01)
    rec = point_record(equilibrium_point(snr, beta, DecoderSpec.sic(list(range(snr.k)))), params)
    back = json.loads(json.dumps(rec))
    assert back == rec
    assert back["order"] == list(range(1, snr.k + 1))
