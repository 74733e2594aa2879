import collections
import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from avoidlimit.permcore import (
    Permutation,
    catalan,
    count_avoiders_brute,
    enumerate_avoiders,
    longest_decreasing,
)
from avoidlimit.rng import SeededRng
from avoidlimit.sampler import (
    ShapeTableauPair,
    avoider_count,
    bridge_dp,
    catalan_check,
    count_syt,
    hook_lengths,
    hook_walk,
    inverse_rsk,
    log_target_bound,
    partition_count,
    partitions,
    regev_offsets,
    rsk,
    sample_avoider,
    sample_lazy_walk,
    sample_shape,
    sample_weyl_bridge,
)
from avoidlimit.sampler import _log_target
from avoidlimit.wordpath import in_omega_n, in_weyl_k, path_from_words
from oracles import confined_bridge_words, confined_word_counts, standard_tableaux


def brute_partitions(n, d):
    out = set()
    for parts in itertools.product(range(n + 1), repeat=d):
        if sum(parts) == n and all(x >= y for x, y in zip(parts, parts[1:])):
            out.add(tuple(x for x in parts if x))
    return out


def chi_square_p(counts, expected):
    return sps.chisquare(counts, expected).pvalue


class TestRSK:
    def test_231(self):
        pair = rsk((2, 3, 1))
        assert pair.shape == (2, 1)
        assert pair.P == ((1, 3), (2,))
        assert pair.Q == ((1, 2), (3,))

    def test_decreasing_is_column(self):
        pair = rsk((4, 3, 2, 1))
        assert pair.shape == (1, 1, 1, 1)
        assert pair.P == ((1,), (2,), (3,), (4,))

    def test_round_trip_s6(self):
        seen = set()
        for p in itertools.permutations(range(1, 7)):
            pair = rsk(p)
            assert inverse_rsk(pair).values == p
            seen.add((pair.P, pair.Q))
        assert len(seen) == 720

    @pytest.mark.parametrize("n", range(1, 8))
    def test_rows_are_longest_decreasing(self, n):
        for p in itertools.permutations(range(1, n + 1)):
            pair = rsk(p)
            assert len(pair.shape) == longest_decreasing(p)

    def test_rejects_bad_tableau(self):
        with pytest.raises(ValueError, match="column"):
            ShapeTableauPair((2, 1), ((1, 2), (3,)), ((2, 3), (1,)))
        with pytest.raises(ValueError, match="shape"):
            ShapeTableauPair((2, 1), ((1, 2, 3),), ((1, 2), (3,)))
        with pytest.raises(ValueError, match="partition"):
            ShapeTableauPair((1, 2), ((1,), (2, 3)), ((1,), (2, 3)))


class TestCounting:
    @pytest.mark.parametrize("shape", [(1,), (2, 1), (3, 2, 1), (4, 4), (3, 1, 1), (5, 3, 2, 2)])
    def test_formulas_match_enumerated_tableaux(self, shape):
        n_tableaux = len(standard_tableaux(shape))
        assert hook_lengths(shape) == n_tableaux
        assert count_syt(shape) == n_tableaux
        assert count_syt(shape, len(shape) + 2) == n_tableaux

    @given(st.lists(st.integers(1, 7), min_size=1, max_size=5))
    def test_two_formulas_agree(self, parts):
        shape = tuple(sorted(parts, reverse=True))
        assert hook_lengths(shape) == count_syt(shape)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_two_row_sum_is_catalan(self, n):
        assert sum(count_syt(lam, 2) ** 2 for lam in partitions(n, 2)) == catalan(n)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_all_shapes_sum_to_factorial(self, n):
        assert avoider_count(n, n) == math.factorial(n)

    @pytest.mark.parametrize("n, d", [(6, 3), (7, 4), (8, 3)])
    def test_avoider_count_brute(self, n, d):
        assert avoider_count(n, d) == count_avoiders_brute(n, d)

    @pytest.mark.parametrize("n, d", [(n, d) for n in range(1, 9) for d in (1, 2, 3, 5)])
    def test_partitions(self, n, d):
        got = list(partitions(n, d))
        assert set(got) == brute_partitions(n, d)
        assert len(got) == len(set(got)) == partition_count(n, d)

    def test_catalan_check(self):
        assert catalan_check(12)


class TestShapeSampler:
    @pytest.mark.parametrize("n, d", [(12, 3), (40, 2), (30, 4), (500, 3)])
    def test_bound_dominates_integer_points(self, n, d):
        N = n + d * (d - 1) // 2
        best = max(
            float(_log_target(np.array([x + d - 1 - i for i, x in enumerate(lam + (0,) * (d - len(lam)))], float)))
            for lam in partitions(n, d)
        )
        assert best <= log_target_bound(n, d) + 1e-9 * N
        # the continuous maximum is not far above the best lattice point
        assert log_target_bound(n, d) - best < d

    @pytest.mark.parametrize("n, d", [(30, 3), (25, 4)])
    def test_rejection_matches_exact_weights(self, n, d):
        shapes = list(partitions(n, d))
        weights = np.array([count_syt(lam, d) ** 2 for lam in shapes], dtype=object)
        probs = np.array([float(w / weights.sum()) for w in weights])
        draws = 5000
        rng = SeededRng(11, 3)
        counts = collections.Counter(sample_shape(n, d, rng, method="reject") for _ in range(draws))
        assert set(counts) <= set(shapes)
        exp = probs * draws
        # pool the sparse tail into one class
        big = exp >= 5
        obs = [counts[lam] for lam, b in zip(shapes, big) if b]
        obs.append(draws - sum(obs))
        expected = list(exp[big]) + [draws - exp[big].sum()]
        assert chi_square_p(obs, expected) > 1e-3

    def test_enumeration_and_rejection_agree_on_mean(self):
        n, d = 400, 3
        rng = SeededRng(5)
        a = [sample_shape(n, d, rng, "enumerate")[0] for _ in range(3000)]
        b = [sample_shape(n, d, rng, "reject")[0] for _ in range(3000)]
        assert sps.ks_2samp(a, b).pvalue > 1e-3

    def test_size_one(self):
        assert sample_shape(1, 3, SeededRng(0)) == (1,)
        assert sample_avoider(1, 2, SeededRng(0)) == Permutation((1,))

    def test_bad_method(self):
        with pytest.raises(ValueError, match="method"):
            sample_shape(5, 2, SeededRng(0), method="guess")
        with pytest.raises(ValueError):
            sample_shape(0, 2, SeededRng(0))


class TestHookWalk:
    @pytest.mark.parametrize("shape", [(3, 2, 1), (4, 2), (2, 2, 2)])
    def test_uniform(self, shape):
        tableaux = standard_tableaux(shape)
        draws = 40 * len(tableaux) * 10
        rng = SeededRng(7)
        counts = collections.Counter(hook_walk(shape, rng) for _ in range(draws))
        assert set(counts) == set(tableaux)
        obs = [counts[t] for t in tableaux]
        assert chi_square_p(obs, [draws / len(tableaux)] * len(tableaux)) > 1e-3

    def test_output_is_standard(self):
        t = hook_walk((6, 4, 4, 1), SeededRng(1))
        ShapeTableauPair((6, 4, 4, 1), t, t)


class TestAvoiderSampler:
    def test_uniform_av5_d2(self):
        perms = [p.values for p in enumerate_avoiders(5, 2)]
        draws = 42 * 200
        rng = SeededRng(3)
        counts = collections.Counter(sample_avoider(5, 2, rng).values for _ in range(draws))
        assert set(counts) == set(perms)
        assert chi_square_p([counts[p] for p in perms], [draws / 42] * 42) > 1e-3

    def test_large_sample_avoids(self):
        p = sample_avoider(100_000, 5, SeededRng(1))
        assert sorted(p.values) == list(range(1, 100_001))
        assert longest_decreasing(p.values) <= 5

    def test_reproducible(self):
        assert sample_avoider(300, 3, SeededRng(4, 9)) == sample_avoider(300, 3, SeededRng(4, 9))
        assert sample_avoider(300, 3, SeededRng(4, 9)) != sample_avoider(300, 3, SeededRng(4, 10))


class TestLazyWalk:
    def test_step_frequencies(self):
        n, d = 90_000, 3
        w = sample_lazy_walk(n, d, SeededRng(2))
        steps = collections.Counter(zip(w.a, w.b))
        assert len(steps) == d * d
        sd = math.sqrt(n / d**2 * (1 - 1 / d**2))
        for c in steps.values():
            assert abs(c - n / d**2) < 4 * sd
        zero = sum(c for (i, j), c in steps.items() if i == j)
        assert abs(zero / n - 1 / d) < 0.01


class TestBridgeDP:
    def test_small_values(self):
        assert bridge_dp(1, 2).count(1) == 2
        assert bridge_dp(2, 2).count(2) == 5

    @pytest.mark.parametrize("n, d", [(n, d) for n in range(1, 9) for d in (2, 3)])
    def test_matches_exhaustive_search(self, n, d):
        confined, bridges = confined_word_counts(n, d)
        assert bridge_dp(n, d).count(n) == bridges
        assert bridge_dp(n, d, bridge=False).total == confined

    @pytest.mark.parametrize("n", range(1, 15))
    def test_d2_bridges_are_catalan(self, n):
        # a bridge of the d = 2 lazy walk corresponds to a Dyck path of length 2n + 2
        assert bridge_dp(n, 2).count(n) == catalan(n + 1)

    def test_bridge_pruning_keeps_final_count(self):
        assert bridge_dp(10, 3).count(10) == bridge_dp(10, 3, bridge=False).count(10)

    def test_backward_sampler_uniform(self):
        words = confined_bridge_words(4, 2)
        assert len(words) == 42
        table = bridge_dp(4, 2)
        rng = SeededRng(8)
        draws = 21_000
        counts = collections.Counter()
        for _ in range(draws):
            w = sample_weyl_bridge(table, rng)
            counts[(w.a, w.b)] += 1
        assert set(counts) == set(words)
        assert chi_square_p([counts[w] for w in words], [draws / 42] * 42) > 1e-3

    def test_samples_are_confined_bridges(self):
        table = bridge_dp(40, 3)
        rng = SeededRng(9)
        for _ in range(20):
            w = sample_weyl_bridge(table, rng)
            assert in_omega_n(w)
            assert all(in_weyl_k(x, 0) for x in path_from_words(w).points)

    def test_guard(self):
        with pytest.raises(ValueError, match="refusing"):
            bridge_dp(5000, 4)

    def test_json(self):
        table = bridge_dp(6, 3, bridge=False)
        data = json.loads(table.to_json())
        assert (data["n"], data["d"]) == (6, 3)
        assert sum(int(s["count"]) for s in data["states"]) == table.total
        assert all(isinstance(s["count"], str) for s in data["states"])


class TestRegev:
    def test_matches_lgamma(self):
        off = regev_offsets(2000)
        for n in (1, 10, 500, 2000):
            log_c = math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - math.log(n + 1)
            assert off[n - 1] == pytest.approx(log_c - (2 * n * math.log(2) - 1.5 * math.log(n)), abs=1e-9)

    def test_tends_to_minus_half_log_pi(self):
        off = regev_offsets(10_000)
        assert off[-1] == pytest.approx(-0.5 * math.log(math.pi), abs=1e-3)
        assert np.all(np.diff(off) > 0)
