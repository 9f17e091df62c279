import math

import numpy as np
import pytest

from paulitree.family import (
    Axis,
    BasisString,
    CoefficientProfile,
    FamilyInstance,
    Outcome,
    check_physicality,
    corollary_profile,
    enumerate_bases,
    enumerate_outcomes,
    hard_pair_trace_distance,
    longest_common_prefix,
    outcome_distribution,
    outcome_probability,
    prefix_expectation,
    state_eigenvalues,
    trace_distance_bounds,
)


def random_physical_profile(rng, n, max_weight=0.98):
    raw = rng.standard_normal(n)
    raw /= np.abs(raw).sum()
    raw *= rng.uniform(0.2, max_weight)
    return CoefficientProfile(alpha=float(raw[-1]), betas=tuple(float(x) for x in raw[:-1]))


class TestBasisString:
    def test_str_round_trip(self):
        b = BasisString.from_str("XZYX")
        assert str(b) == "XZYX"
        assert b.axes == (Axis.X, Axis.Z, Axis.Y, Axis.X)

    def test_index_bijection_matches_lex_order(self):
        for n in (1, 2, 3):
            all_bases = list(enumerate_bases(n))
            assert len(all_bases) == 3**n
            assert all_bases == sorted(all_bases, key=lambda b: b.axes)
            for i, b in enumerate(all_bases):
                assert b.index() == i
                assert BasisString.from_index(n, i) == b

    def test_prefix_and_extended(self):
        b = BasisString.from_str("XYZ")
        assert b.prefix(2) == BasisString.from_str("XY")
        assert b.prefix(0) == BasisString(())
        assert BasisString.from_str("XY").extended(Axis.Z) == b

    def test_codes(self):
        assert BasisString.from_str("XYZ").codes().tolist() == [0, 1, 2]
        assert BasisString.from_codes([2, 0]) == BasisString.from_str("ZX")

    def test_bad_symbols(self):
        with pytest.raises(ValueError):
            BasisString.from_str("XQ")


class TestOutcome:
    def test_index_round_trip(self):
        for n in (1, 2, 3):
            for i in range(2**n):
                o = Outcome.from_index(n, i)
                assert o.index() == i

    def test_signs(self):
        o = Outcome((0, 1, 1))
        assert o.signs() == (1, -1, -1)
        assert o.sign_product(1) == 1
        assert o.sign_product(2) == -1
        assert o.sign_product(3) == 1


class TestProfile:
    def test_coefficient_indexing(self):
        p = CoefficientProfile(alpha=0.1, betas=(0.2, 0.3))
        assert p.n == 3
        assert p.coefficient(1) == 0.2
        assert p.coefficient(2) == 0.3
        assert p.coefficient(3) == 0.1
        assert p.coefficients().tolist() == [0.2, 0.3, 0.1]
        with pytest.raises(ValueError):
            p.coefficient(0)
        with pytest.raises(ValueError):
            p.coefficient(4)

    def test_without_alpha(self):
        p = CoefficientProfile(alpha=0.1, betas=(0.2,))
        q = p.without_alpha()
        assert q.alpha == 0.0 and q.betas == (0.2,)

    def test_require_nonzero(self):
        with pytest.raises(ValueError):
            CoefficientProfile(alpha=0.0, betas=(0.2,)).require_nonzero()
        with pytest.raises(ValueError):
            CoefficientProfile(alpha=0.1, betas=(0.0,)).require_nonzero()
        CoefficientProfile(alpha=0.1, betas=(0.2,)).require_nonzero()

    def test_corollary_profile(self):
        p = corollary_profile(5, 0.5)
        assert p.alpha == 0.125
        assert p.betas == (0.03125,) * 4
        assert check_physicality(p).margin == pytest.approx(0.75)
        with pytest.raises(ValueError):
            corollary_profile(0, 0.5)
        with pytest.raises(ValueError):
            corollary_profile(3, 1.0)

    def test_physicality_boundary(self):
        report = check_physicality(CoefficientProfile(alpha=0.5, betas=(0.3, 0.2)))
        assert report.physical and report.margin == 0.0
        report = check_physicality(CoefficientProfile(alpha=0.6, betas=(0.3, 0.2)))
        assert not report.physical and report.margin == pytest.approx(-0.1)


class TestSpectrum:
    def test_known_two_qubit_spectrum(self):
        inst = FamilyInstance(
            CoefficientProfile(alpha=0.2, betas=(0.3,)), BasisString.from_str("XY")
        )
        got = sorted(state_eigenvalues(inst))
        assert got == pytest.approx([0.125, 0.225, 0.275, 0.375], abs=1e-15)

    def test_unit_trace_and_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            inst = FamilyInstance(
                random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
            )
            vals = state_eigenvalues(inst)
            assert vals.shape == (2**n,)
            assert float(vals.sum()) == pytest.approx(1.0, abs=1e-12)
            assert vals.min() >= 0.0

    def test_boundary_profile_nonnegative(self):
        inst = FamilyInstance(
            CoefficientProfile(alpha=0.5, betas=(0.3, 0.2)), BasisString.from_str("ZZZ")
        )
        assert state_eigenvalues(inst).min() >= 0.0

    def test_unphysical_rejected(self):
        inst = FamilyInstance(
            CoefficientProfile(alpha=0.9, betas=(0.5,)), BasisString.from_str("XX")
        )
        with pytest.raises(ValueError):
            state_eigenvalues(inst)

    def test_cap(self):
        inst = FamilyInstance(corollary_profile(3, 0.5), BasisString.from_str("XYZ"))
        with pytest.raises(ValueError):
            state_eigenvalues(inst, max_n=2)


class TestOutcomeLaw:
    def test_distribution_matches_pointwise_probability(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            inst = FamilyInstance(
                random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
            )
            b = BasisString.from_index(n, int(rng.integers(3**n)))
            dist = outcome_distribution(inst, b)
            for o in enumerate_outcomes(n):
                assert dist[o.index()] == pytest.approx(outcome_probability(inst, b, o), abs=1e-15)
            assert float(dist.sum()) == pytest.approx(1.0, abs=1e-12)
            assert dist.min() >= 0.0

    def test_prefix_expectation_from_distribution(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            inst = FamilyInstance(
                random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
            )
            b = BasisString.from_index(n, int(rng.integers(3**n)))
            dist = outcome_distribution(inst, b)
            for k in range(1, n + 1):
                mean = sum(dist[o.index()] * o.sign_product(k) for o in enumerate_outcomes(n))
                assert mean == pytest.approx(prefix_expectation(inst, b, k), abs=1e-12)

    def test_mismatched_basis_gives_uniform_marginal(self):
        # no matched prefix at all: every outcome has probability 2^-n
        inst = FamilyInstance(corollary_profile(3, 0.5), BasisString.from_str("XXX"))
        dist = outcome_distribution(inst, BasisString.from_str("YZZ"))
        assert np.allclose(dist, 1 / 8, atol=1e-15)

    def test_depends_only_on_matched_prefix(self):
        inst = FamilyInstance(corollary_profile(3, 0.5), BasisString.from_str("XYZ"))
        # both bases share the length-2 matched prefix XY, differ afterwards
        d1 = outcome_distribution(inst, BasisString.from_str("XYX"))
        d2 = outcome_distribution(inst, BasisString.from_str("XYY"))
        assert np.array_equal(d1, d2)


class TestDistances:
    def test_lcp(self):
        assert longest_common_prefix(BasisString.from_str("XYZ"), BasisString.from_str("XYX")) == 2
        assert longest_common_prefix(BasisString.from_str("XYZ"), BasisString.from_str("XYZ")) == 3
        assert longest_common_prefix(BasisString.from_str("ZYZ"), BasisString.from_str("XYZ")) == 0

    def test_bounds_structure(self):
        prof = CoefficientProfile(alpha=0.1, betas=(0.2, 0.15))
        lower, upper = trace_distance_bounds(
            prof, BasisString.from_str("XYZ"), BasisString.from_str("XYX")
        )
        assert lower == pytest.approx(0.05)  # |c_3|/2 = alpha/2
        assert upper == pytest.approx(0.1)
        # first-symbol mismatch: every depth contributes to the upper bound
        lower2, upper2 = trace_distance_bounds(
            prof, BasisString.from_str("XYZ"), BasisString.from_str("ZYX")
        )
        assert lower2 == pytest.approx(0.1)  # |beta_1|/2
        assert upper2 == pytest.approx(0.45)
        assert 0 <= lower <= upper

    def test_bounds_identical_strings_rejected(self):
        b = BasisString.from_str("XY")
        with pytest.raises(ValueError):
            trace_distance_bounds(corollary_profile(2, 0.5), b, b)

    def test_hard_pair_value(self):
        assert hard_pair_trace_distance(0.125) == pytest.approx(0.08838834764831843, abs=1e-16)
        assert hard_pair_trace_distance(-0.125) == hard_pair_trace_distance(0.125)
        assert hard_pair_trace_distance(0.125) == pytest.approx(0.125 / math.sqrt(2), abs=1e-16)


class TestFamilyInstance:
    def test_length_validation(self):
        with pytest.raises(ValueError):
            FamilyInstance(corollary_profile(3, 0.5), BasisString.from_str("XY"))
