import numpy as np
import pytest

from spellsom import (
    EXIT_TO_REGISTRATION, REGISTRATION_TO_EXIT, SpellRecord, TransitionPair,
    build_table, derive_pairs, merge_tables, rss_by_individual,
    rss_indicators, significant_cells,
)
from spellsom.transitions import table_from_counts

# Published percentage tables of the study population (total shares).
TABLE3_SHARES = np.array([
    [20.73, 1.21, 4.81, 8.33],
    [29.33, 1.57, 5.95, 9.95],
    [4.94, 0.18, 0.86, 1.05],
    [8.36, 0.41, 0.98, 1.32],
])
TABLE4_SHARES = np.array([
    [27.08, 41.20, 4.58, 5.37],
    [0.86, 0.68, 0.06, 0.18],
    [7.83, 4.86, 0.55, 0.72],
    [3.05, 2.21, 0.27, 0.48],
])


def pairs_of(spec, direction=REGISTRATION_TO_EXIT):
    out = []
    for (i, j), count in spec.items():
        out.extend(TransitionPair(i, j, direction, f"x{len(out) + k}")
                   for k in range(count))
    return out


def counts_from_shares(shares):
    return np.round(np.asarray(shares) * 10000).astype(int)


class TestBuildTable:
    def test_hand_case(self):
        pairs = pairs_of({(1, 1): 2, (2, 1): 1, (2, 4): 1})
        table = build_table(pairs, REGISTRATION_TO_EXIT)
        assert table.counts.sum() == 4
        assert table.total_share[0, 0] == pytest.approx(50.0)
        assert table.total_share[1, 0] == pytest.approx(25.0)
        assert table.total_share[1, 3] == pytest.approx(25.0)
        assert table.row_share[0, 0] == pytest.approx(100.0)
        assert table.row_share[1, 0] == pytest.approx(50.0)
        assert table.row_share[1, 3] == pytest.approx(50.0)

    def test_published_table3_row_shares(self):
        table = table_from_counts(counts_from_shares(TABLE3_SHARES),
                                  REGISTRATION_TO_EXIT)
        assert table.row_share[0, 0] == pytest.approx(59.08, abs=0.02)
        assert table.row_share[1, 0] == pytest.approx(62.67, abs=0.02)

    def test_published_table4_row_share(self):
        table = table_from_counts(counts_from_shares(TABLE4_SHARES),
                                  EXIT_TO_REGISTRATION)
        assert table.row_share[0, 0] == pytest.approx(34.62, abs=0.02)

    def test_mixed_directions_error(self):
        pairs = [TransitionPair(1, 1, REGISTRATION_TO_EXIT),
                 TransitionPair(1, 1, EXIT_TO_REGISTRATION)]
        with pytest.raises(ValueError, match="mixed"):
            build_table(pairs, REGISTRATION_TO_EXIT)

    def test_empty_input_flagged(self):
        table = build_table([], REGISTRATION_TO_EXIT)
        assert table.is_empty
        assert table.counts.sum() == 0
        assert table.empty_rows.all()

    def test_empty_row_marker(self):
        table = build_table(pairs_of({(1, 1): 3}), REGISTRATION_TO_EXIT)
        assert not table.empty_rows[0]
        assert table.empty_rows[1:].all()
        assert np.all(table.row_share[1:] == 0.0)

    def test_share_invariants_random(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            counts = rng.integers(0, 30, size=(4, 4))
            table = table_from_counts(counts, REGISTRATION_TO_EXIT)
            if table.is_empty:
                continue
            assert table.total_share.sum() == pytest.approx(100.0, abs=1e-9)
            for i in range(4):
                if table.empty_rows[i]:
                    continue
                assert table.row_share[i].sum() == pytest.approx(100.0,
                                                                 abs=1e-9)
                expected = table.total_share[i] / table.row_margins[i] * 100.0
                np.testing.assert_allclose(table.row_share[i], expected,
                                           atol=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        pairs = pairs_of({(i + 1, j + 1): int(c) for (i, j), c in
                          np.ndenumerate(rng.integers(0, 9, (4, 4)) + 1)})
        table = build_table(pairs, REGISTRATION_TO_EXIT)
        rng.shuffle(pairs)
        table2 = build_table(pairs, REGISTRATION_TO_EXIT)
        np.testing.assert_array_equal(table.counts, table2.counts)
        np.testing.assert_array_equal(table.total_share, table2.total_share)
        np.testing.assert_array_equal(table.row_share, table2.row_share)

    def test_merge_is_count_addition(self):
        a = build_table(pairs_of({(1, 1): 2, (2, 3): 1}), REGISTRATION_TO_EXIT)
        b = build_table(pairs_of({(1, 1): 1, (4, 4): 2}), REGISTRATION_TO_EXIT)
        merged = merge_tables(a, b)
        np.testing.assert_array_equal(merged.counts, a.counts + b.counts)


class TestSignificantCells:
    def test_table3_bold_set_at_8_percent(self):
        table = table_from_counts(counts_from_shares(TABLE3_SHARES),
                                  REGISTRATION_TO_EXIT)
        cells = significant_cells(table, 8.0)
        assert set(cells) == {(1, 1), (1, 4), (2, 1), (2, 4), (4, 1)}
        shares = [table.total_share[i - 1, j - 1] for i, j in cells]
        assert shares == sorted(shares, reverse=True)

    def test_table4_level_set_at_4_5_percent(self):
        # The threshold semantics are total_share >= threshold.  On the
        # published shares that includes (1,3)=4.58 and (1,4)=5.37, so the
        # level set has six cells, not the four bold ones; see the
        # acceptance suite for the bold-set reproduction attempt.
        table = table_from_counts(counts_from_shares(TABLE4_SHARES),
                                  EXIT_TO_REGISTRATION)
        cells = significant_cells(table, 4.5)
        assert set(cells) == {(1, 1), (1, 2), (1, 3), (1, 4), (3, 1), (3, 2)}

    def test_impossible_threshold(self):
        table = table_from_counts(counts_from_shares(TABLE3_SHARES),
                                  REGISTRATION_TO_EXIT)
        assert significant_cells(table, 101.0) == []

    def test_threshold_is_inclusive(self):
        table = build_table(pairs_of({(1, 1): 1, (2, 2): 3}),
                            REGISTRATION_TO_EXIT)
        assert (1, 1) in significant_cells(table, 25.0)


class TestRssIndicators:
    def test_two_pair_hand_case(self):
        pairs = [TransitionPair(1, 1, EXIT_TO_REGISTRATION, "a"),
                 TransitionPair(1, 2, EXIT_TO_REGISTRATION, "a")]
        ind = rss_indicators(pairs)
        assert ind.rss11 == 0.5
        assert ind.rss12 == 0.5
        assert ind.n_transitions == 2

    def test_degenerate_case(self):
        pairs = [TransitionPair(1, 2, EXIT_TO_REGISTRATION, "a")] * 3
        ind = rss_indicators(pairs)
        assert ind.rss11 == 0.0
        assert ind.rss12 == 1.0

    def test_zero_pairs_undefined(self):
        with pytest.raises(ValueError, match="undefined"):
            rss_indicators([])

    def test_exact_rationals(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = int(rng.integers(1, 12))
            pairs = [TransitionPair(int(rng.integers(1, 5)),
                                    int(rng.integers(1, 5)),
                                    EXIT_TO_REGISTRATION, "a")
                     for _ in range(n)]
            ind = rss_indicators(pairs)
            c11 = sum(1 for p in pairs
                      if (p.from_modality, p.to_modality) == (1, 1))
            c12 = sum(1 for p in pairs
                      if (p.from_modality, p.to_modality) == (1, 2))
            assert ind.rss11 == c11 / n
            assert ind.rss12 == c12 / n
            assert 0.0 <= ind.rss11 <= 1.0
            assert 0.0 <= ind.rss12 <= 1.0
            assert ind.rss11 + ind.rss12 <= 1.0

    def test_rejects_wrong_direction(self):
        with pytest.raises(ValueError):
            rss_indicators([TransitionPair(1, 1, REGISTRATION_TO_EXIT, "a")])

    def test_calibrated_cohort_population_means(self):
        # the default synthetic calibration lands near the study values
        from spellsom import default_synthetic_spec, generate_synthetic

        cohort = generate_synthetic(default_synthetic_spec(8000, seed=21))
        rss = rss_by_individual(cohort.pairs)
        assert len(rss) == 8000
        mean11 = np.mean([v.rss11 for v in rss.values()])
        mean12 = np.mean([v.rss12 for v in rss.values()])
        assert mean11 == pytest.approx(0.27, abs=0.03)
        assert mean12 == pytest.approx(0.40, abs=0.03)


class TestDerivePairs:
    def test_spell_sequence(self):
        def spell(ind, idx, rmotifi, rmotifa):
            return SpellRecord(individual_id=ind, spell_index=idx,
                               rmotifi=rmotifi, rmotifa=rmotifa)

        records = [spell("a", 2, 2, 1), spell("a", 1, 1, 2),
                   spell("b", 1, 4, None)]
        pairs = derive_pairs(records)
        reg_exit = [(p.from_modality, p.to_modality) for p in pairs
                    if p.direction == REGISTRATION_TO_EXIT]
        exit_reg = [(p.from_modality, p.to_modality) for p in pairs
                    if p.direction == EXIT_TO_REGISTRATION]
        assert reg_exit == [(1, 2), (2, 1)]     # ordered by spell index
        assert exit_reg == [(2, 2)]             # spell 1 exit -> spell 2 cause

    def test_rss_by_individual_groups(self):
        pairs = [TransitionPair(1, 1, EXIT_TO_REGISTRATION, "a"),
                 TransitionPair(1, 2, EXIT_TO_REGISTRATION, "a"),
                 TransitionPair(3, 1, EXIT_TO_REGISTRATION, "b"),
                 TransitionPair(1, 1, REGISTRATION_TO_EXIT, "c")]
        rss = rss_by_individual(pairs)
        assert set(rss) == {"a", "b"}    # c has no exit->registration pair
        assert rss["a"].rss11 == 0.5
        assert rss["b"].rss11 == 0.0
