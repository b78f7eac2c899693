import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from matchlab.errors import InvalidInput, InvalidParameter, InvalidWindow, OriginOccupied
from matchlab.points import (
    PointConfig,
    Seed,
    config_from_dict,
    config_to_dict,
    equal_count_pair,
    has_distinct_distances,
    make_config,
    palm_augment,
    sample_poisson,
)


def test_degenerate_window_rejected():
    with pytest.raises(InvalidWindow):
        sample_poisson((0.0, 0.0), 1.0, "two-colour", 1)


def test_intensity_must_be_positive():
    with pytest.raises(InvalidParameter):
        sample_poisson((0.0, 1.0), 0.0, "two-colour", 1)


def test_one_colour_count_law_of_large_numbers():
    # count/volume within 1% of the intensity, averaged over 100 seeds
    counts = [sample_poisson((0.0, 1e6), 1.0, "one-colour", Seed(s)).n_red for s in range(100)]
    assert abs(np.mean(counts) / 1e6 - 1.0) < 0.01
    assert all(abs(c / 1e6 - 1.0) < 0.01 for c in counts)


def test_same_seed_same_sample():
    a = sample_poisson((-50, 50), 1.0, "two-colour", Seed(7, 3))
    b = sample_poisson((-50, 50), 1.0, "two-colour", Seed(7, 3))
    c = sample_poisson((-50, 50), 1.0, "two-colour", Seed(7, 4))
    assert a == b
    assert a != c


def test_seed_bounds():
    with pytest.raises(InvalidParameter):
        Seed(-1)
    with pytest.raises(InvalidParameter):
        Seed(2**64)
    Seed(2**64 - 1).generator()


def test_palm_augment_inserts_origin():
    cfg = make_config([1.0], [2.0], window=(-5, 5))
    out = palm_augment(cfg)
    assert out.red.tolist() == [0.0, 1.0]
    assert out.blue.tolist() == [2.0]


def test_palm_augment_one_colour():
    cfg = make_config([-1.0, 1.0], window=(-5, 5), mode="one-colour")
    assert palm_augment(cfg).red.tolist() == [-1.0, 0.0, 1.0]


def test_palm_augment_errors():
    with pytest.raises(OriginOccupied):
        palm_augment(make_config([0.0], [2.0], window=(-5, 5)))
    with pytest.raises(OriginOccupied):
        palm_augment(make_config([1.0], [0.0], window=(-5, 5)))
    with pytest.raises(InvalidWindow):
        palm_augment(make_config([1.0], [2.0], window=(0.5, 5)))


def test_equal_count_pair():
    cfg = equal_count_pair((0.0, 1.0), 1, seed=2)
    assert cfg.n_red == 1 and cfg.n_blue == 1
    assert 0 <= cfg.red[0] <= 1 and 0 <= cfg.blue[0] <= 1
    with pytest.raises(InvalidParameter):
        equal_count_pair((0.0, 1.0), 0, seed=2)
    assert equal_count_pair((0, 1), 5, seed=9) == equal_count_pair((0, 1), 5, seed=9)


def test_equal_count_pair_2d():
    cfg = equal_count_pair([(0, 1), (0, 2)], 10, seed=1)
    assert cfg.dim == 2 and cfg.red.shape == (10, 2)
    assert np.all(cfg.red[:, 1] <= 2)


def test_invariants_enforced_on_construction():
    with pytest.raises(InvalidInput):
        PointConfig(1, (0, 1), [0.5, 0.2], [], "two-colour")
    with pytest.raises(InvalidInput):
        PointConfig(1, (0, 1), [0.5], [0.5], "two-colour")
    with pytest.raises(InvalidInput):
        PointConfig(1, (0, 1), [1.5], [], "two-colour")
    with pytest.raises(InvalidInput):
        PointConfig(1, (0, 1), [0.5], [0.7], "one-colour")


def _check_invariants(cfg):
    lo, hi = cfg.window[0]
    for arr in (cfg.red, cfg.blue):
        assert np.all((arr >= lo) & (arr <= hi))
        assert np.all(np.diff(arr) > 0)
    assert np.intersect1d(cfg.red, cfg.blue).size == 0


def test_invariants_seed_sweep():
    for s in range(10_000):
        cfg = sample_poisson((0.0, 3.0), 1.0, "two-colour", Seed(123, s))
        _check_invariants(cfg)
        assert has_distinct_distances(cfg)


@given(st.integers(0, 2**32), st.floats(1.0, 60.0))
def test_distinct_distances_enforced(seed, length):
    cfg = sample_poisson((0.0, length), 1.0, "two-colour", seed)
    assert cfg.n_points <= 200
    assert has_distinct_distances(cfg)


def test_has_distinct_distances_detects_ties():
    cfg = make_config([0.0, 1.0, 2.0], mode="one-colour")
    assert not has_distinct_distances(cfg)


def test_json_roundtrip():
    cfg = sample_poisson((-10, 10), 1.0, "two-colour", 4)
    d = config_to_dict(cfg)
    assert d["dim"] == 1 and d["window"] == [-10.0, 10.0] and d["mode"] == "two-colour"
    assert config_from_dict(json.loads(json.dumps(d))) == cfg
    cfg2 = sample_poisson([(0, 3), (0, 3)], 1.0, "one-colour", 4)
    assert config_from_dict(json.loads(json.dumps(config_to_dict(cfg2)))) == cfg2
