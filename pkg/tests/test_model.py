import json
import math

import numpy as np
import pytest

from siet_mac import errors
from siet_mac.model import (
    ChannelConfig,
    SnrTable,
    b_coop,
    b_ind,
    check_demand,
    config_from_dict,
    energy_max,
    energy_max_many,
    is_feasible,
    load_config,
    parse_snr_option,
    power_split,
    regime,
    snr_table,
    validate_config,
)

from oracles import energy

P10 = 10 / 0.49  # makes 0.7**2 * p = 10


def cfg(**kw):
    base = dict(k=2, h1=[0.7, 0.7], h2=[0.7, 0.7], p_max=[P10, P10])
    base.update(kw)
    return ChannelConfig(**base)


def test_valid_config_passes_unchanged():
    c = cfg()
    assert validate_config(c) is c


@pytest.mark.parametrize(
    "kw, exc",
    [
        (dict(h1=[1.0, 1.0]), errors.NormViolation),
        (dict(h2=[0.8, 0.8]), errors.NormViolation),
        (dict(k=1, h1=[0.7], h2=[0.7], p_max=[1.0]), errors.KTooSmall),
        (dict(h1=[0.5, 0.5, 0.5]), errors.BadDimension),
        (dict(p_max=[1.0]), errors.BadDimension),
        (dict(sigma1_sq=0.0), errors.NonPositiveVariance),
        (dict(sigma2_sq=-1.0), errors.NonPositiveVariance),
        (dict(p_max=[-1.0, 1.0]), errors.NegativePower),
    ],
)
def test_invalid_configs(kw, exc):
    with pytest.raises(exc):
        validate_config(cfg(**kw))


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        validate_config(cfg(h1=[1.0, 1.0]))


def test_snr_table_hits_ten():
    s = snr_table(cfg())
    np.testing.assert_allclose(s.snr1, [10, 10], rtol=1e-14)
    np.testing.assert_allclose(s.snr2, [10, 10], rtol=1e-14)


def test_snr_zero_power_and_zero_gain():
    assert np.all(snr_table(cfg(p_max=[0.0, 0.0])).snr1 == 0)
    s = snr_table(cfg(h2=[0.0, 0.0]))
    assert np.all(s.snr2 == 0) and np.all(s.snr1 > 0)


def test_doubling_variance_halves_snr():
    a = snr_table(cfg())
    b = snr_table(cfg(sigma1_sq=2.0, sigma2_sq=2.0))
    np.testing.assert_allclose(b.snr1, a.snr1 / 2, rtol=1e-15)
    np.testing.assert_allclose(b.snr2, a.snr2 / 2, rtol=1e-15)


def test_from_snr_round_trips():
    c = ChannelConfig.from_snr([3.0, 0.0, 7.5], [1.0, 2.0, 0.0])
    validate_config(c)
    s = snr_table(c)
    np.testing.assert_allclose(s.snr1, [3.0, 0.0, 7.5], rtol=1e-14)
    np.testing.assert_allclose(s.snr2, [1.0, 2.0, 0.0], rtol=1e-14, atol=0)


def test_energy_bounds():
    s = SnrTable.symmetric(2, 10)
    assert b_ind(s) == 21.0
    assert abs(b_coop(s) - 41.0) <= 1e-12
    assert b_ind(SnrTable.symmetric(3, 10)) == 31.0
    zero = SnrTable.symmetric(4, 0)
    assert b_ind(zero) == 1.0 and b_coop(zero) == 1.0


def test_b_coop_equals_b_ind_with_one_active_user():
    s = SnrTable([1.0, 1.0, 1.0], [0.0, 5.0, 0.0])
    assert b_coop(s) == b_ind(s) == 6.0


@pytest.mark.parametrize(
    "beta, expected", [([1, 1], 21.0), ([0, 0], 41.0), ([0.615, 0.615], 28.7)]
)
def test_energy_max_examples(beta, expected):
    assert energy_max(SnrTable.symmetric(2, 10), beta) == pytest.approx(expected, rel=1e-13)


def test_energy_max_many_matches_scalar():
    s = SnrTable([1, 2, 3], [0.5, 4.0, 9.0])
    rng = np.random.default_rng(5)
    betas = rng.random((20, 3))
    got = energy_max_many(s, betas)
    want = [energy(s.snr2, row) for row in betas]
    np.testing.assert_allclose(got, want, rtol=1e-13)


def test_energy_max_at_full_information_is_exact():
    s = SnrTable([1, 2], [3.3, 0.7])
    assert energy_max(s, [1, 1]) == b_ind(s)


def test_feasibility_and_regimes():
    s = SnrTable.symmetric(2, 10)
    assert is_feasible(28.7, s)
    assert is_feasible(41.0, s)
    assert not is_feasible(41.0001, s)
    assert regime(0.0, s) == "vacuous"
    assert regime(21.0, s) == "vacuous"
    assert regime(28.7, s) == "binding"
    assert regime(41.0, s) == "binding"
    assert regime(50.0, s) == "infeasible"
    with pytest.raises(errors.NegativeDemand):
        is_feasible(-1.0, s)
    with pytest.raises(errors.InfeasibleDemand):
        check_demand(41.5, s)


def test_power_split_clips_round_off_only():
    assert power_split([1 + 1e-12, -1e-12]).tolist() == [1.0, 0.0]
    with pytest.raises(ValueError):
        power_split([1.1, 0.5])
    with pytest.raises(errors.BadDimension):
        power_split([0.5], k=2)
    with pytest.raises(ValueError):
        power_split([math.nan, 0.5])


def test_snr_table_validation():
    with pytest.raises(errors.BadDimension):
        SnrTable([1, 2], [1])
    with pytest.raises(errors.NegativePower):
        SnrTable([1, -2], [1, 1])


def test_config_documents(tmp_path):
    phys = {"k": 2, "h1": [0.7, 0.7], "h2": [0.7, 0.7], "sigma1_sq": 1.0, "sigma2_sq": 1.0, "p_max": [P10, P10]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(phys))
    s, c = load_config(path)
    np.testing.assert_allclose(s.snr2, [10, 10])
    assert c.k == 2

    s, c = config_from_dict({"snr1": [10, 10], "snr2": [10, 10]})
    assert s.snr1.tolist() == [10.0, 10.0]
    np.testing.assert_allclose(snr_table(c).snr2, [10, 10])

    with pytest.raises(errors.ConfigError):
        config_from_dict({"k": 2, "h1": [0.1, 0.1]})
    with pytest.raises(errors.KTooSmall):
        config_from_dict({"snr1": [1], "snr2": [1]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(errors.ConfigError):
        load_config(bad)


def test_parse_snr_option():
    s, _ = parse_snr_option("1,2;3,4")
    assert s.snr1.tolist() == [1, 2] and s.snr2.tolist() == [3, 4]
    s, _ = parse_snr_option("10,10")
    assert s.snr1.tolist() == s.snr2.tolist() == [10, 10]
    with pytest.raises(errors.ConfigError):
        parse_snr_option("a,b")
    with pytest.raises(errors.ConfigError):
        parse_snr_option("1;2;3")


def test_config_is_immutable():
    c = cfg()
    with pytest.raises(ValueError):
        c.h1[0] = 0.1
