import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbox.boxcore import BoxError, make_deterministic, make_isotropic, make_uniform
from nsbox.functionals import (
    HYBRID_BOUND,
    bipartitions,
    correlator,
    evaluate,
    hybrid_local_bound,
    hybrid_local_optimum,
    sign_v,
    sign_v_parity,
    signed_settings,
    svetlichny_correlator,
    svetlichny_probability,
)

from conftest import bits, pair_sum, random_ns_box, random_table_box

SQRT2 = math.sqrt(2)

# signs of the eight terms in the three-party Svetlichny operator
TRIPARTITE_SIGNS = {
    "000": 1, "001": 1, "010": 1, "100": 1,
    "011": -1, "101": -1, "110": -1, "111": -1,
}


class TestSigns:
    @pytest.mark.parametrize("x,expected", [("000", 1), ("011", -1), ("100", 1)])
    def test_sign_v(self, x, expected):
        assert sign_v(x) == expected

    @pytest.mark.parametrize("x,expected", [("000", 1), ("111", -1)])
    def test_sign_v_parity(self, x, expected):
        assert sign_v_parity(x) == expected

    def test_tripartite_operator_signs(self):
        for x, s in TRIPARTITE_SIGNS.items():
            assert sign_v(x) == s == sign_v_parity(x)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_forms_agree_exhaustively(self, n):
        for xs in itertools.product((0, 1), repeat=n):
            assert sign_v(xs) == sign_v_parity(xs) == (-1) ** pair_sum(xs)

    def test_signed_settings(self):
        settings_ = signed_settings(3)
        assert [s.inputs for s in settings_] == [format(i, "03b") for i in range(8)]
        assert {s.inputs: s.sign for s in settings_} == TRIPARTITE_SIGNS


def direct_correlator(box, x):
    n = box.n_parties
    return sum(box.table[x, a] * (-1) ** sum(bits(a, n)) for a in range(2**n))


class TestCorrelator:
    def test_algebraic_000(self):
        assert correlator(make_isotropic(3, 1.0), "000") == 1.0

    def test_uniform_zero(self):
        for x in range(16):
            assert correlator(make_uniform(4), x) == pytest.approx(0.0, abs=1e-15)

    def test_half_bias_011(self):
        box = make_isotropic(3, 0.5)
        assert direct_correlator(box, 0b011) == pytest.approx(-0.5, abs=1e-15)
        assert correlator(box, "011") == pytest.approx(-0.5, abs=1e-15)

    def test_sign_relation(self, rng):
        """E(x) = v(x) (2 P(parity hit | x) - 1) on arbitrary tables."""
        for n in (2, 3, 4):
            box = random_table_box(rng, n)
            for x in range(2**n):
                target = pair_sum(bits(x, n))
                hit = sum(box.table[x, a] for a in range(2**n) if sum(bits(a, n)) % 2 == target)
                v = (-1) ** target
                assert correlator(box, x) == pytest.approx(v * (2 * hit - 1), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(BoxError):
            correlator(make_uniform(3), "0101")


class TestSvetlichnyProbability:
    @pytest.mark.parametrize("e", [0.0, 0.2, 0.5, SQRT2 / 2, 1.0])
    def test_tripartite_isotropic(self, e):
        assert svetlichny_probability(make_isotropic(3, e)) == pytest.approx((1 + e) / 2, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_uniform(self, n):
        assert svetlichny_probability(make_uniform(n)) == pytest.approx(0.5, abs=1e-15)

    def test_n5_quantum(self):
        box = make_isotropic(5, SQRT2 / 2)
        # full table summation, independent of the vectorized path
        total = 0.0
        for x in range(32):
            target = pair_sum(bits(x, 5))
            total += sum(box.table[x, a] for a in range(32) if sum(bits(a, 5)) % 2 == target)
        assert total / 32 == pytest.approx(0.8535533905932737, abs=1e-12)
        assert svetlichny_probability(box) == pytest.approx(0.8535533905932737, abs=1e-12)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_isotropic_exact(self, n):
        for e in (0.0, 0.25, 0.5, SQRT2 / 2, 0.9, 1.0):
            assert svetlichny_probability(make_isotropic(n, e)) == pytest.approx((1 + e) / 2, abs=1e-14)

    def test_strictly_increasing_in_bias(self):
        grid = np.linspace(0, 1, 41)
        values = [svetlichny_probability(make_isotropic(4, e)) for e in grid]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestSvetlichnyCorrelator:
    @pytest.mark.parametrize("e,expected", [(1.0, 8.0), (SQRT2 / 2, 4 * SQRT2), (0.5, 4.0)])
    def test_tripartite(self, e, expected):
        assert svetlichny_correlator(make_isotropic(3, e)) == pytest.approx(expected, abs=1e-9)

    def test_explicit_operator(self):
        box = make_isotropic(3, 0.3)
        s = abs(sum(sign * direct_correlator(box, int(x, 2)) for x, sign in TRIPARTITE_SIGNS.items()))
        assert svetlichny_correlator(box) == pytest.approx(s, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
    def test_identity_on_arbitrary_tables(self, n, seed):
        box = random_table_box(np.random.default_rng(seed), n)
        s = svetlichny_correlator(box)
        assert s == pytest.approx(abs(2 ** (n + 1) * svetlichny_probability(box) - 2**n), abs=1e-9)

    def test_identity_on_ns_mixtures(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 7))
            box = random_ns_box(rng, n)
            s = svetlichny_correlator(box)
            assert abs(s - abs(2 ** (n + 1) * svetlichny_probability(box) - 2**n)) < 1e-9


class TestEvaluate:
    def test_n4_quantum(self):
        report = evaluate(make_isotropic(4, SQRT2 / 2))
        assert report.correlator_value == pytest.approx(11.313708498984761, abs=1e-9)
        assert report.violates_hybrid_bound
        assert not report.exceeds_quantum

    def test_n3_above_hybrid(self):
        assert evaluate(make_isotropic(3, 0.6)).violates_hybrid_bound

    def test_uniform_no_flags(self):
        report = evaluate(make_uniform(3))
        assert not (report.violates_hybrid_bound or report.exceeds_quantum or report.at_algebraic_max)

    def test_hybrid_equality_not_flagged(self):
        assert not evaluate(make_isotropic(3, 0.5)).violates_hybrid_bound

    def test_algebraic_max(self):
        report = evaluate(make_isotropic(5, 1.0))
        assert report.at_algebraic_max and report.exceeds_quantum
        assert report.correlator_value == pytest.approx(32.0)

    def test_report_dict(self):
        doc = evaluate(make_isotropic(3, 1.0)).to_dict()
        assert doc["hybrid_bound"] == 4.0
        assert doc["correlator_value"] == pytest.approx(8.0)


def chsh_local_max_by_hand():
    """Classical CHSH-game value from the 16 pairs of one-bit functions."""
    best = 0
    for fa in itertools.product((0, 1), repeat=2):
        for fb in itertools.product((0, 1), repeat=2):
            wins = sum((fa[x] ^ fb[y]) == (x & y) for x in (0, 1) for y in (0, 1))
            best = max(best, wins)
    return best / 4


class TestHybridOracle:
    def test_bipartitions(self):
        assert bipartitions(3) == [((1,), (2, 3)), ((1, 2), (3,)), ((1, 3), (2,))]
        assert len(bipartitions(4)) == 7

    def test_n3(self):
        assert hybrid_local_bound(3) == 0.75 == HYBRID_BOUND

    def test_n2_is_chsh(self):
        assert hybrid_local_bound(2) == chsh_local_max_by_hand() == 0.75

    def test_n3_counts(self):
        opt = hybrid_local_optimum(3)
        # three 1|2 splits, 4 single-party maps times 256 two-party maps each
        assert opt.strategies_checked == 3 * 4 * 256

    def test_witness_wins_six_of_eight(self):
        opt = hybrid_local_optimum(3)
        assert opt.settings_won == 6
        witness = opt.witness_box()
        assert svetlichny_probability(witness) == 0.75
        wins = sum(
            sum(bits(int(opt.strategy[x], 2), 3)) % 2 == pair_sum(bits(int(x, 2), 3))
            for x in opt.strategy
        )
        assert wins == 6

    def test_witness_respects_bipartition(self):
        opt = hybrid_local_optimum(3)
        left, right = opt.groups
        for x, a in opt.strategy.items():
            for y, b in opt.strategy.items():
                for group in (left, right):
                    if all(x[p - 1] == y[p - 1] for p in group):
                        assert all(a[p - 1] == b[p - 1] for p in group)

    def test_parity_reduction_matches_full(self):
        assert hybrid_local_optimum(3, parity_only=True).value == hybrid_local_optimum(3).value

    def test_n4(self):
        assert hybrid_local_bound(4) == 0.75

    @pytest.mark.parametrize("n", [1, 5])
    def test_out_of_range(self, n):
        with pytest.raises(BoxError):
            hybrid_local_bound(n)

    def test_isotropic_above_half_beats_oracle(self):
        bound = hybrid_local_bound(3)
        assert svetlichny_probability(make_isotropic(3, 0.5)) <= bound
        assert svetlichny_probability(make_isotropic(3, 0.5001)) > bound

    def test_deterministic_hybrid_never_exceeds_bound(self, rng):
        """Random hybrid strategies for the {1}|{2,3} cut stay at or below 3/4."""
        for _ in range(200):
            f1 = rng.integers(0, 2, size=2)
            f23 = rng.integers(0, 4, size=4)
            strat = {}
            for x in range(8):
                xs = bits(x, 3)
                a1 = int(f1[xs[0]])
                a23 = int(f23[2 * xs[1] + xs[2]])
                strat[format(x, "03b")] = f"{a1}{a23:02b}"
            assert svetlichny_probability(make_deterministic(3, strat)) <= 0.75
