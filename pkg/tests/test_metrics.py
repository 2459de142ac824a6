"""SI-SDR and permutation-invariant evaluation."""

import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepscale import pit_si_sdr, si_sdr
from sepscale.errors import ShapeError, ZeroReferenceError

from oracles import si_sdr_direct


class TestSiSdr:
    def test_perfect_reconstruction_is_positive_infinity(self):
        x = np.array([0.3, -0.7, 1.1])
        assert si_sdr(x, x) == math.inf

    def test_equal_energy_residual_is_zero_db(self):
        assert si_sdr([1.0, 1.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_half_projection_is_zero_db(self):
        assert si_sdr([1.0, 0.0], [1.0, 1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 4000))
            ref = rng.standard_normal(n)
            est = ref + 0.3 * rng.standard_normal(n)
            assert si_sdr(est, ref) == pytest.approx(si_sdr_direct(est, ref), abs=1e-9)

    @pytest.mark.parametrize("c", [1e-3, 1e-2, 0.5, 1.0, 3.0, 1e2, 1e3])
    def test_scale_invariance(self, c):
        rng = np.random.default_rng(1)
        ref = rng.standard_normal(8000)
        est = ref + 0.1 * rng.standard_normal(8000)
        assert abs(si_sdr(c * est, ref) - si_sdr(est, ref)) < 1e-9

    def test_zero_reference_rejected(self):
        with pytest.raises(ZeroReferenceError):
            si_sdr([1.0, 2.0], [0.0, 0.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeError, match="length"):
            si_sdr([1.0, 2.0], [1.0])

    def test_orthogonal_estimate_is_negative_infinity(self):
        assert si_sdr([0.0, 1.0], [1.0, 0.0]) == -math.inf

    def test_monotone_degradation_along_fixed_noise_direction(self):
        rng = np.random.default_rng(2)
        ref = rng.standard_normal(2000)
        noise = rng.standard_normal(2000)
        noise -= (noise @ ref) / (ref @ ref) * ref  # orthogonalize
        values = [si_sdr(ref + lam * noise, ref) for lam in (0.01, 0.1, 0.5, 1.0, 4.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_never_exceeds_perfect(self, seed):
        rng = np.random.default_rng(seed)
        ref = rng.standard_normal(64)
        est = rng.standard_normal(64)
        assert si_sdr(est, ref) <= math.inf


class TestPitSiSdr:
    def test_identity_when_in_order(self):
        rng = np.random.default_rng(3)
        refs = [rng.standard_normal(100), rng.standard_normal(100)]
        result = pit_si_sdr(refs, refs)
        assert result.best_permutation == (0, 1)
        assert all(v == math.inf for v in result.per_source_si_sdr)

    def test_swap_recovered(self):
        rng = np.random.default_rng(4)
        refs = [rng.standard_normal(100), rng.standard_normal(100)]
        swapped = [refs[1], refs[0]]
        result = pit_si_sdr(swapped, refs)
        assert result.best_permutation == (1, 0)
        assert result.mean_si_sdr == pit_si_sdr(refs, refs).mean_si_sdr

    def test_mean_invariant_to_any_estimate_permutation(self):
        rng = np.random.default_rng(5)
        refs = [rng.standard_normal(50) for _ in range(3)]
        ests = [r + 0.2 * rng.standard_normal(50) for r in refs]
        means = {pit_si_sdr([ests[i] for i in perm], refs).mean_si_sdr
                 for perm in permutations(range(3))}
        assert len({round(m, 9) for m in means}) == 1

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            refs = [rng.standard_normal(8000), rng.standard_normal(8000)]
            ests = [rng.standard_normal(8000), rng.standard_normal(8000)]
            result = pit_si_sdr(ests, refs)
            brute = max(
                (si_sdr(ests[p[0]], refs[0]) + si_sdr(ests[p[1]], refs[1])) / 2
                for p in permutations(range(2))
            )
            assert result.mean_si_sdr == pytest.approx(brute, abs=1e-12)

    def test_mean_is_arithmetic_mean(self):
        rng = np.random.default_rng(7)
        refs = [rng.standard_normal(64), rng.standard_normal(64)]
        ests = [r + 0.5 * rng.standard_normal(64) for r in refs]
        result = pit_si_sdr(ests, refs)
        assert result.mean_si_sdr == pytest.approx(
            sum(result.per_source_si_sdr) / 2, abs=1e-12)

    def test_count_mismatch_rejected(self):
        with pytest.raises(ShapeError, match="counts"):
            pit_si_sdr([np.ones(4)], [np.ones(4), np.ones(4)])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeError, match="lengths"):
            pit_si_sdr([np.ones(4), np.ones(5)], [np.ones(4), np.ones(4)])
