import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nomafair.model import (
    ChannelRealization,
    DomainError,
    InvalidConfig,
    PowerAllocation,
    SystemConfig,
    TdmaAllocation,
    db_to_linear,
    linear_to_db,
    validate_config,
)


def test_reference_config_is_valid():
    cfg = SystemConfig(n_users=5, total_power=10.0, target_rate=0.05,
                       channel_variance=1.0, noise_variance=1.0)
    validate_config(cfg)
    assert cfg.fading_rate == 1.0
    assert cfg.snr_threshold == pytest.approx(2 ** 0.05 - 1, rel=1e-15)


@pytest.mark.parametrize("field, kwargs", [
    ("n_users", dict(n_users=0, total_power=10.0)),
    ("n_users", dict(n_users=2.5, total_power=10.0)),
    ("total_power", dict(n_users=5, total_power=-1.0)),
    ("target_rate", dict(n_users=5, total_power=1.0, target_rate=0.0)),
    ("channel_variance", dict(n_users=5, total_power=1.0, channel_variance=0.0)),
    ("noise_variance", dict(n_users=5, total_power=1.0, noise_variance=-2.0)),
    ("bisect_tol", dict(n_users=5, total_power=1.0, bisect_tol=0.0)),
    ("total_power", dict(n_users=5, total_power=float("nan"))),
])
def test_invalid_config_names_field(field, kwargs):
    with pytest.raises(InvalidConfig) as exc:
        SystemConfig(**kwargs)
    assert exc.value.field == field


def test_fading_rate_tracks_variance():
    assert SystemConfig(3, 1.0, channel_variance=4.0).fading_rate == 0.25


def test_replace_revalidates():
    cfg = SystemConfig(3, 1.0)
    assert cfg.replace(total_power=2.0).total_power == 2.0
    with pytest.raises(InvalidConfig):
        cfg.replace(n_users=0)


def test_channel_realization_invariants():
    ChannelRealization([0.1, 0.1, 2.0])
    with pytest.raises(InvalidConfig):
        ChannelRealization([0.5, 0.2])
    with pytest.raises(InvalidConfig):
        ChannelRealization([0.0, 1.0])
    with pytest.raises(InvalidConfig):
        ChannelRealization([])
    assert ChannelRealization.from_unsorted([2.0, 0.5]).gains.tolist() == [0.5, 2.0]


def test_channel_gains_are_read_only():
    chan = ChannelRealization([0.5, 2.0])
    with pytest.raises(ValueError):
        chan.gains[0] = 3.0


def test_power_allocation_invariants():
    PowerAllocation([0.5, 0.5])
    PowerAllocation([0.5, 0.5 + 5e-7])
    with pytest.raises(InvalidConfig):
        PowerAllocation([0.7, 0.5])
    with pytest.raises(InvalidConfig):
        PowerAllocation([-0.1, 0.5])


def test_tdma_allocation_invariants():
    TdmaAllocation([0.5, 0.5], [0.3, 0.7])
    with pytest.raises(InvalidConfig):
        TdmaAllocation([0.5, 0.4], [0.3, 0.7])
    with pytest.raises(InvalidConfig):
        TdmaAllocation([0.5, 0.5], [0.6, 0.7])


def test_db_anchors():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == 10.0
    assert linear_to_db(db_to_linear(7.3)) == pytest.approx(7.3, abs=1e-12)


@pytest.mark.parametrize("bad", [0.0, -3.0])
def test_linear_to_db_domain(bad):
    with pytest.raises(DomainError):
        linear_to_db(bad)


@given(st.floats(min_value=-200, max_value=200))
def test_db_round_trip(x_db):
    assert math.isclose(linear_to_db(db_to_linear(x_db)), x_db, abs_tol=1e-12)


@given(st.lists(st.floats(min_value=1e-6, max_value=1e3), min_size=1, max_size=8))
def test_from_unsorted_always_valid(values):
    chan = ChannelRealization.from_unsorted(values)
    assert np.all(np.diff(chan.gains) >= 0)
