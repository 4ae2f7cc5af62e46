import math

import numpy as np
import pytest

from siet_mac import errors
from siet_mac.model import SnrTable, energy_max
from siet_mac.regions import (
    BscParams,
    RateTuple,
    binary_entropy,
    bsc_curve,
    bsc_info_energy_capacity,
    capacity_contains,
    capacity_witness,
    corner_rates,
    region_boundary_samples,
    subset_masks,
    sum_rate_bound,
    witness_satisfies,
)

from oracles import (
    BSC_070_015,
    BSC_FLAT_015,
    R_SIC_LAST_615,
    R_SIC_LAST_FULL,
    R_SUD_FULL,
    R_SUM_FULL,
    capacity_grid_member,
    capacity_ok,
)

S10 = SnrTable.symmetric(2, 10)


def test_subset_masks():
    m = subset_masks(3)
    assert m.shape == (7, 3)
    assert {tuple(r) for r in m.astype(int)} == {
        (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)
    }


def test_sum_rate_bound_examples():
    assert sum_rate_bound(S10, [1, 1], [0, 1]) == pytest.approx(R_SUM_FULL, abs=1e-12)
    assert sum_rate_bound(S10, [0, 0], [0]) == 0.0
    assert sum_rate_bound(S10, [0, 0], [0, 1]) == 0.0
    assert sum_rate_bound(S10, [0.615, 0.615], [0]) == pytest.approx(R_SIC_LAST_615, abs=1e-12)
    with pytest.raises(errors.EmptySubset):
        sum_rate_bound(S10, [1, 1], [])


def test_capacity_examples():
    w = capacity_witness(S10, 0.0, RateTuple([R_SUD_FULL, R_SIC_LAST_FULL], 21.0))
    assert w is not None
    np.testing.assert_allclose(w, [1.0, 1.0], atol=1e-12)
    assert capacity_contains(S10, 0.0, RateTuple([0.0, 0.0], 1.0))
    assert not capacity_contains(S10, 0.0, RateTuple([1.15, 1.15], 21.0))


def test_capacity_energy_window():
    # B above E at the only split carrying the rates
    assert not capacity_contains(S10, 0.0, RateTuple([R_SUD_FULL, R_SIC_LAST_FULL], 21.5))
    # B below the demand
    assert not capacity_contains(S10, 30.0, RateTuple([0.1, 0.1], 25.0))
    # zero rates at full cooperation
    assert capacity_contains(S10, 41.0, RateTuple([0.0, 0.0], 41.0))
    assert not capacity_contains(S10, 0.0, RateTuple([0.0, 0.0], 41.5))
    with pytest.raises(errors.InfeasibleDemand):
        capacity_contains(S10, 42.0, RateTuple([0.0, 0.0], 42.0))


def test_capacity_interior_point_needs_refinement():
    # sum rate near the boundary at moderate energy: off the coarse grid
    s = SnrTable([3.0, 40.0, 0.5], [20.0, 1.0, 7.0])
    beta = np.array([0.37, 0.81, 0.22])
    r = corner_rates(s, beta)[0] * 0.999
    pt = RateTuple(r, energy_max(s, beta))
    w = capacity_witness(s, 0.0, pt)
    assert w is not None and witness_satisfies(s, 0.0, pt, w)


def test_brute_force_agreement_k2():
    """Grid members are found, and every answer is certified by the loop oracle."""
    rng = np.random.default_rng(2024)
    rate_axis = np.linspace(0.0, 2.2, 20)
    for _ in range(3):
        s1 = np.exp(rng.uniform(np.log(0.5), np.log(30), 2))
        s2 = np.exp(rng.uniform(np.log(0.5), np.log(30), 2))
        snr = SnrTable(s1, s2)
        b = float(rng.uniform(0, 0.9) * (1 + (np.sqrt(s2).sum()) ** 2))
        for r1 in rate_axis[::3]:
            for r2 in rate_axis:
                for B in (b, 0.5 * (b + 1 + s2.sum()), 1 + s2.sum() + 0.3):
                    pt = RateTuple([r1, r2], B)
                    grid_says = capacity_grid_member(s1, s2, b, [r1, r2], B, grid=16)
                    w = capacity_witness(snr, b, pt, grid=16, refine=False)
                    if grid_says:
                        assert w is not None, (s1, s2, b, r1, r2, B)
                    if w is not None:
                        assert capacity_ok(s1, s2, b, [r1, r2], B, w)


def test_region_nesting():
    s = SnrTable([2.0, 5.0], [4.0, 9.0])
    pt = RateTuple([0.3, 0.5], 20.0)
    for b_hi in (5.0, 15.0, 20.0):
        if capacity_contains(s, b_hi, pt):
            for b_lo in (0.0, b_hi / 2):
                assert capacity_contains(s, b_lo, pt)


def test_region_boundary_samples():
    pts = region_boundary_samples(S10, 0.0, 5)
    found = {tuple(np.round(p.point.r, 4)) + (round(p.point.b_rate, 6),) for p in pts}
    assert (0.4664, 1.7297, 21.0) in found
    assert (1.7297, 0.4664, 21.0) in found
    zero = region_boundary_samples(S10, 0.0, 5, betas=[[0.0, 0.0]])
    assert len(zero) == 1
    assert zero[0].point.r.tolist() == [0.0, 0.0] and zero[0].point.b_rate == 41.0
    assert region_boundary_samples(S10, 0.0, 0) == []
    with pytest.raises(errors.UnsupportedK):
        region_boundary_samples(SnrTable.symmetric(4, 1), 0.0, 3)
    for bp in region_boundary_samples(S10, 28.7, 7, n_energy=3):
        assert bp.point.b_rate >= 28.7 - 1e-9
        assert witness_satisfies(S10, 28.7, bp.point, bp.beta)


def test_corner_rates_sum():
    s = SnrTable([1.0, 4.0, 9.0], [1.0, 1.0, 1.0])
    beta = [0.5, 0.25, 1.0]
    total = sum_rate_bound(s, beta, [0, 1, 2])
    for row in corner_rates(s, beta):
        assert row.sum() == pytest.approx(total, abs=1e-12)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89), abs=1e-15)


def test_bsc_examples():
    assert bsc_info_energy_capacity(BscParams(0.15, 0.3)) == pytest.approx(BSC_FLAT_015, abs=1e-12)
    assert bsc_info_energy_capacity(BscParams(0.15, 0.85)) == 0.0
    assert bsc_info_energy_capacity(BscParams(0.15, 0.7)) == pytest.approx(BSC_070_015, abs=1e-12)
    assert bsc_info_energy_capacity(BscParams(0.0, 0.2)) == 1.0
    assert bsc_info_energy_capacity(BscParams(0.0, 0.8)) == pytest.approx(binary_entropy(0.8))
    assert bsc_info_energy_capacity(BscParams(0.0, 1.0)) == 0.0
    assert bsc_info_energy_capacity(BscParams(0.5, 0.3)) == 0.0
    with pytest.raises(errors.OutOfRange):
        BscParams(0.6, 0.1)
    with pytest.raises(errors.OutOfRange):
        BscParams(0.15, 0.9)


def test_bsc_curve():
    curve = bsc_curve(0.15)
    assert len(curve) == 200
    assert curve[0][0] == 0.0 and curve[-1] == (0.85, 0.0)
    vals = [r for _, r in curve]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert all(r == pytest.approx(0.0, abs=1e-15) for r in (v for _, v in bsc_curve(0.5)))


def test_rate_tuple_validation():
    with pytest.raises(ValueError):
        RateTuple([-0.1, 0.2], 1.0)
    with pytest.raises(ValueError):
        RateTuple([0.1, 0.2], -1.0)
    with pytest.raises(ValueError):
        RateTuple([math.inf], 1.0)
