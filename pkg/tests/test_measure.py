import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mfbox.ingest import PriceSeries, derive_box_scheme
from mfbox.measure import build_box_measure
from mfbox.synth import constant_series


def random_series(seed, T=240, sigma=1.0):
    rng = np.random.default_rng(seed)
    return PriceSeries(f"s{seed}", np.exp(sigma * rng.standard_normal(T)))


class TestExamples:
    def test_pair_boxes(self):
        m = build_box_measure(PriceSeries("d", [1.0, 2.0, 3.0, 4.0]), 2)
        assert_allclose(m.raw_mass, [3.0, 7.0], rtol=0)
        assert_allclose(np.exp(m.log_weights), [0.3, 0.7], atol=1e-15)

    def test_single_box(self):
        m = build_box_measure(PriceSeries("d", [1.0, 2.0, 3.0, 4.0]), 4)
        assert_allclose(m.raw_mass, [10.0], rtol=0)
        assert_allclose(np.exp(m.log_weights), [1.0], atol=1e-15)

    def test_uniform_measure(self):
        m = build_box_measure(constant_series(240, 5.0), 10)
        assert m.box_count == 24
        assert_allclose(m.raw_mass, np.full(24, 50.0), rtol=0)
        assert_allclose(np.exp(m.log_weights), np.full(24, 1 / 24), atol=1e-15)


class TestInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_mass_conservation(self, seed):
        s = random_series(seed)
        total = math.fsum(s.values)
        for l in derive_box_scheme(240).sizes:
            m = build_box_measure(s, l)
            assert math.isclose(math.fsum(m.raw_mass), total, rel_tol=1e-12)
            # normalized weights sum to 1
            assert abs(math.fsum(np.exp(m.log_weights)) - 1.0) < 1e-12

    def test_refinement_consistency(self):
        s = random_series(11)
        fine = build_box_measure(s, 2).raw_mass
        for coarse_l in (4, 6, 10, 240):
            coarse = build_box_measure(s, coarse_l).raw_mass
            rebuilt = fine.reshape(coarse.size, coarse_l // 2).sum(axis=1)
            assert_allclose(coarse, rebuilt, rtol=1e-12)

    def test_unit_box_multiset_shuffle_invariant(self):
        s = random_series(2, T=64)
        rng = np.random.default_rng(9)
        shuffled = PriceSeries("d", rng.permutation(s.values))
        a = build_box_measure(s, 1).raw_mass
        b = build_box_measure(shuffled, 1).raw_mass
        assert np.array_equal(np.sort(a), np.sort(b))

    def test_box_count_exact(self):
        s = random_series(3)
        for l in (1, 6, 40, 240):
            assert build_box_measure(s, l).box_count == 240 // l


class TestErrors:
    def test_non_divisor(self):
        with pytest.raises(ValueError, match="divide"):
            build_box_measure(PriceSeries("d", [1.0, 2.0, 3.0]), 2)

    def test_immutability(self):
        m = build_box_measure(PriceSeries("d", [1.0, 2.0, 3.0, 4.0]), 2)
        with pytest.raises(ValueError):
            m.raw_mass[0] = 5.0
        with pytest.raises(ValueError):
            m.log_weights[0] = 0.0
