import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussmix.majorization import (
    WeightVector,
    diagonal_chain,
    majorizes,
    random_majorization_pair,
    robin_hood_transfers,
)
from gaussmix.numerics import RandomStream

vectors = st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=2, max_size=8)


class TestMajorizes:
    def test_hand_cases(self):
        assert majorizes((1, 0), (0.5, 0.5))
        assert not majorizes((0.5, 0.5), (1, 0))
        assert majorizes((0.6, 0.4), (0.5, 0.5))
        # unequal totals are incomparable
        assert not majorizes((1, 0), (0.4, 0.4))

    def test_reflexive(self):
        assert majorizes((0.3, 0.2, 0.5), (0.3, 0.2, 0.5))

    def test_extremes_dominate(self):
        # (1,0,...,0) majorizes every probability vector; the flat vector is minimal
        probs = [(0.2, 0.5, 0.3), (0.9, 0.05, 0.05), (1 / 3,) * 3]
        for v in probs:
            assert majorizes((1, 0, 0), v)
            assert majorizes(v, (1 / 3,) * 3)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            majorizes((1, -1), (0, 0))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            majorizes((1, 0), (1, 0, 0))

    @settings(max_examples=100, deadline=None)
    @given(vectors, st.randoms(use_true_random=False))
    def test_permutation_invariant(self, v, rnd):
        w = list(v)
        rnd.shuffle(w)
        assert majorizes(v, w) and majorizes(w, v)

    def test_transitive_on_sampled_triples(self):
        stream = RandomStream(2024, 0)
        for trial in range(1000):
            s = stream.child(trial)
            n = 2 + trial % 5
            b = WeightVector(tuple(s.uniform(n)))
            a = robin_hood_transfers(b, 1 + trial % 4, s)
            c = robin_hood_transfers(a, 1 + trial % 3, s)
            assert majorizes(b, a)
            assert majorizes(a, c)
            assert majorizes(b, c)


class TestDiagonalChain:
    def test_endpoints(self):
        chain = diagonal_chain(4)
        assert chain[0].coords == (1.0, 0.0, 0.0, 0.0)
        assert chain[-1].coords == (0.25, 0.25, 0.25, 0.25)

    def test_monotone_chain(self):
        chain = diagonal_chain(6)
        for later, earlier in zip(chain[1:], chain[:-1]):
            assert majorizes(earlier, later)
            assert not majorizes(later, earlier)

    def test_unit_totals(self):
        for v in diagonal_chain(5):
            np.testing.assert_allclose(v.total(), 1.0, atol=1e-15)


class TestRandomPair:
    def test_pairs_ordered_and_equal_total(self):
        stream = RandomStream(7, 0)
        for trial in range(500):
            a, b = random_majorization_pair(2 + trial % 6, stream.child(trial))
            assert majorizes(b, a)
            assert abs(a.total() - b.total()) < 1e-12
            assert min(a.coords) >= 0

    def test_zero_transfers_identity(self):
        v = WeightVector((0.7, 0.1, 0.2))
        out = robin_hood_transfers(v, 0, RandomStream(0, 0))
        assert out.coords == v.coords

    def test_reproducible(self):
        a1, b1 = random_majorization_pair(5, RandomStream(11, 3))
        a2, b2 = random_majorization_pair(5, RandomStream(11, 3))
        assert a1 == a2 and b1 == b2


class TestWeightVector:
    def test_compensated_total(self):
        # naive left-to-right accumulation would round every 1e-16 away
        w = WeightVector((1.0,) + (1e-16,) * 100)
        assert w.total() > 1.0
        np.testing.assert_allclose(w.total(), 1.0 + 1e-14, rtol=1e-15)

    def test_squared_sqrt_roundtrip(self):
        v = WeightVector((0.3, 0.4, 0.5))
        np.testing.assert_allclose(v.squared().sqrt().array, v.array, rtol=1e-15)

    def test_normalized(self):
        v = WeightVector((2.0, 6.0)).normalized()
        assert v.coords == (0.25, 0.75)

    def test_unit(self):
        v = WeightVector((3.0, 4.0)).unit()
        np.testing.assert_allclose(v.total_squares(), 1.0, rtol=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            WeightVector(())
        with pytest.raises(ValueError):
            WeightVector((math.inf, 1.0))
        with pytest.raises(ValueError):
            WeightVector((1.0, -2.0)).sqrt()
