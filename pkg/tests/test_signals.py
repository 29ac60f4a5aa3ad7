from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualiop.errors import BadOrder, ZeroSeed
from dualiop.signals import (
    PRIMITIVE_POLYS,
    PrbsSpec,
    gaussian,
    impulse,
    lfsr_period,
    prbs,
    read_signal_csv,
    write_signal_csv,
)


@pytest.mark.parametrize("d", sorted(PRIMITIVE_POLYS))
def test_table_entries_have_full_period(d):
    assert lfsr_period(d) == 2**d - 1


def test_d3_balance():
    x = prbs(PrbsSpec(3))[:, 0]
    assert x.size == 7
    assert sorted([(x == 1).sum(), (x == -1).sum()]) == [3, 4]


def test_d8_length_and_levels():
    x = prbs(PrbsSpec(8))
    assert x.shape == (255, 1)
    assert set(np.unique(x)) == {-1.0, 1.0}


@pytest.mark.parametrize("d", [3, 8, 10])
def test_msequence_autocorrelation(d):
    x = prbs(PrbsSpec(d)).astype(np.int64)[:, 0]
    n = x.size
    # integer dot products, compared as exact fractions
    r = [Fraction(int(x @ np.roll(x, -k)), n) for k in range(n)]
    assert r[0] == 1
    assert all(v == Fraction(-1, n) for v in r[1:])


@given(st.integers(2, 12), st.integers(1, 2**12 - 1), st.floats(0.1, 5))
def test_seed_and_amplitude(d, seed, amp):
    seed = seed % (2**d - 1) + 1
    x = prbs(PrbsSpec(d, seed, amp))
    assert x.shape[0] == 2**d - 1
    assert np.allclose(np.abs(x), amp)
    assert lfsr_period(d, seed) == 2**d - 1


def test_bad_inputs():
    with pytest.raises(BadOrder):
        prbs(PrbsSpec(1))
    with pytest.raises(BadOrder):
        prbs(PrbsSpec(17))
    with pytest.raises(ZeroSeed):
        prbs(PrbsSpec(5, seed=0))


def test_gaussian_contract():
    assert np.all(gaussian(10, 2, 0.0, 1) == 0)
    a, b = gaussian(100, 1, 1.0, 42), gaussian(100, 1, 1.0, 42)
    assert np.array_equal(a, b)
    x = gaussian(10**6, 1, 1.0, 3)
    assert abs(x.mean()) <= 0.01
    assert abs(x.var() - 1.0) <= 0.01


def test_gaussian_seed_sequences_differ():
    assert not np.array_equal(gaussian(50, 1, 1.0, [4, 1]), gaussian(50, 1, 1.0, 4))


def test_csv_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(size=(17, 3))
    write_signal_csv(tmp_path / "s.csv", x)
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "k,ch0,ch1,ch2"
    assert np.array_equal(read_signal_csv(tmp_path / "s.csv"), x)
    assert impulse(4, 2, 1)[0, 1] == 1 and impulse(4, 2, 1).sum() == 1
