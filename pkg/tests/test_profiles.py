import numpy as np
import pytest

from spellsom import (
    GridTopology, RssIndicators, SpellRecord, build_feature_matrix,
    class_profiles, codevector_profile, default_synthetic_spec,
    generate_synthetic, init_map, neighbor_distances,
    qualitative_distribution,
)
from spellsom.dataset import FEATURE_VARIABLES

from test_dataset import varied_records


def two_var_record(ind, a, b):
    return SpellRecord(individual_id=ind, spell_index=2, age=a, cmdur=b,
                       cppar=0, dur=0, exper=0, indur=0, mgain=0, mxmheur=0,
                       nchom=2, tindmoy=0, dipl3="bac", rmotifi=1, rmotifa=1)


class TestClassProfiles:
    def test_hand_case(self):
        records = [two_var_record("a", 0, 0), two_var_record("b", 2, 2),
                   two_var_record("c", 10, 10)]
        profile = class_profiles(records, [1, 1, 2],
                                 variables=["AGE", "CMDUR"])
        assert profile.classes == [1, 2]
        np.testing.assert_allclose(profile.means[0], [1.0, 1.0])
        np.testing.assert_allclose(profile.means[1], [10.0, 10.0])
        np.testing.assert_allclose(profile.sds[0], [1.0, 1.0])
        np.testing.assert_allclose(profile.sds[1], [0.0, 0.0])

    def test_population_column_is_direct_statistics(self):
        records = varied_records(40, seed=1)
        labels = np.random.default_rng(1).integers(1, 4, size=40)
        profile = class_profiles(records, labels)
        ages = np.array([r.age for r in records])
        j = profile.variables.index("AGE")
        assert profile.means[-1, j] == pytest.approx(ages.mean(), abs=1e-9)
        assert profile.sds[-1, j] == pytest.approx(ages.std(), abs=1e-9)

    def test_class_counts_sum_to_population(self):
        records = varied_records(60, seed=2)
        labels = np.random.default_rng(2).integers(1, 6, size=60)
        profile = class_profiles(records, labels)
        assert profile.class_record_counts.sum() == 60
        for j in range(len(profile.variables)):
            assert profile.counts[:-1, j].sum() == profile.counts[-1, j]

    def test_optional_wage_counts(self):
        records = varied_records(10, seed=3)
        for rec in records[:4]:
            rec.srreval = None
            rec.rmotifi = 4
        profile = class_profiles(records, [1] * 10)
        j = profile.variables.index("SRREVAL")
        assert profile.counts[0, j] == 6
        assert profile.counts[-1, j] == 6

    def test_rss_variables_joined_by_individual(self):
        records = varied_records(4, seed=4)
        rss = {records[0].individual_id:
               RssIndicators(records[0].individual_id, 0.5, 0.25, 4),
               records[2].individual_id:
               RssIndicators(records[2].individual_id, 0.0, 1.0, 2)}
        profile = class_profiles(records, [1, 1, 2, 2], rss=rss)
        j11 = profile.variables.index("RSS11")
        assert profile.counts[0, j11] == 1
        assert profile.means[0, j11] == pytest.approx(0.5)
        assert profile.means[1, j11] == pytest.approx(0.0)

    def test_record_order_invariance(self):
        records = varied_records(30, seed=5)
        labels = np.random.default_rng(5).integers(1, 4, size=30)
        profile = class_profiles(records, labels)
        perm = np.random.default_rng(6).permutation(30)
        shuffled = class_profiles([records[i] for i in perm], labels[perm])
        np.testing.assert_allclose(profile.means, shuffled.means, atol=1e-12)
        np.testing.assert_allclose(profile.sds, shuffled.sds, atol=1e-12)

    def test_labels_must_cover_records(self):
        with pytest.raises(ValueError):
            class_profiles(varied_records(3), [1, 2])


class TestQualitativeDistribution:
    @pytest.fixture
    def coded(self):
        return build_feature_matrix(varied_records(50, seed=7))

    def test_single_modality_class(self):
        records = varied_records(6, seed=8)
        for rec in records[:3]:
            rec.mxmheur = 0.0
        for rec in records[3:]:
            rec.mxmheur = 50.0
        coded = build_feature_matrix(records)
        dists = qualitative_distribution(coded, "HAR", [1, 1, 1, 2, 2, 2],
                                         scope="broad_class")
        class1 = [d for d in dists if d.group == 1][0]
        assert class1.frequencies["0"] == 1.0
        assert sum(class1.frequencies.values()) == pytest.approx(1.0)

    def test_frequencies_sum_to_one_per_scope(self, coded):
        labels = np.random.default_rng(8).integers(1, 4, size=50)
        for dist in qualitative_distribution(coded, "AGEC", labels,
                                             scope="broad_class"):
            if not dist.empty:
                assert sum(dist.frequencies.values()) == pytest.approx(
                    1.0, abs=1e-9)

    def test_cell_aggregation_matches_class_level(self, coded):
        rng = np.random.default_rng(9)
        cells = rng.integers(0, 9, size=50)          # cell per record
        cell_to_class = {c: 1 + c % 3 for c in range(9)}
        classes = np.array([cell_to_class[c] for c in cells])
        cell_dists = qualitative_distribution(coded, "DURC", cells,
                                              scope="grid_cell",
                                              groups=list(range(9)))
        class_dists = qualitative_distribution(coded, "DURC", classes,
                                               scope="broad_class")
        for target in (1, 2, 3):
            members = [d for d in cell_dists
                       if d.group is not None
                       and cell_to_class[d.group] == target]
            total = sum(d.count for d in members)
            for modality in members[0].frequencies:
                weighted = sum(d.count * d.frequencies[modality]
                               for d in members) / total
                direct = [d for d in class_dists if d.group == target][0]
                assert weighted == pytest.approx(
                    direct.frequencies[modality], abs=1e-9)

    def test_empty_cells_flagged_not_dropped(self, coded):
        dists = qualitative_distribution(coded, "AGEC", [5] * 50,
                                         scope="grid_cell",
                                         groups=[5, 6, 7])
        by_group = {d.group: d for d in dists if d.group is not None}
        assert set(by_group) == {5, 6, 7}
        assert not by_group[5].empty
        assert by_group[6].empty and by_group[7].empty

    def test_population_distribution_included(self, coded):
        dists = qualitative_distribution(coded, "DIPL3",
                                         [1] * 50, scope="broad_class")
        assert dists[-1].group is None
        assert dists[-1].count == 50

    def test_unknown_modality_named(self, coded):
        coded.qualitative["DIPL3"][3] = "phd"
        with pytest.raises(ValueError, match="phd"):
            qualitative_distribution(coded, "DIPL3", [1] * 50,
                                     scope="broad_class")

    def test_synthetic_class2_heavy_occasional_work(self):
        # generator ground truth: the second class works many monthly hours
        cohort = generate_synthetic(default_synthetic_spec(4000, seed=3))
        coded = build_feature_matrix(cohort.records)
        dists = qualitative_distribution(coded, "HAR", cohort.labels,
                                         scope="broad_class")
        class2 = [d for d in dists if d.group == 2][0]
        heavy = class2.frequencies[">117"] + class2.frequencies["78-117"]
        assert heavy > 0.5


class TestNeighborDistances:
    def test_identical_codebook_all_zero(self):
        som = init_map(GridTopology(3, 3), 2, np.ones((9, 2)), seed=0)
        som.codebook[:] = 1.0
        field = neighbor_distances(som)
        assert field.max_distance == 0.0
        assert all(d == 0.0 for pairs in field.distances.values()
                   for _, d in pairs)

    def test_linear_gradient_equal_steps(self):
        topo = GridTopology(1, 5)
        som = init_map(topo, 1, np.zeros((5, 1)) + np.arange(5)[:, None],
                       seed=0)
        som.codebook[:] = np.arange(5, dtype=float)[:, None] * 2.0
        field = neighbor_distances(som)
        consecutive = [d for u, pairs in field.distances.items()
                       for v, d in pairs if v == u + 1]
        assert consecutive == [2.0] * 4

    def test_neighbor_counts_on_10x10(self):
        rng = np.random.default_rng(1)
        som = init_map(GridTopology(10, 10), 3, rng.normal(size=(100, 3)),
                       seed=1)
        field = neighbor_distances(som)
        counts = sorted(len(v) for v in field.distances.values())
        assert counts.count(3) == 4
        assert counts.count(5) == 32
        assert counts.count(8) == 64

    def test_symmetry_exact(self):
        rng = np.random.default_rng(2)
        som = init_map(GridTopology(4, 4), 3, rng.normal(size=(16, 3)),
                       seed=2)
        field = neighbor_distances(som)
        for u, pairs in field.distances.items():
            for v, d in pairs:
                assert (u, d) in [(x, e) for x, e in field.distances[v]
                                  if x == u]


@pytest.fixture(scope="module")
def trained_synthetic():
    from spellsom import TrainingSchedule, assign, train, ward

    cohort = generate_synthetic(default_synthetic_spec(3000, seed=12))
    coded = build_feature_matrix(cohort.records)
    som = init_map(GridTopology(10, 10), 10, coded.features, seed=12)
    trained = train(som, coded.features, TrainingSchedule(seed=12))
    units, counts = assign(trained, coded.features)
    partition, _ = ward(trained.codebook, k=5)
    return trained, units, counts, partition


class TestTrainedMapProfiles:
    def test_distant_classes_have_distinct_profiles(self, trained_synthetic):
        trained, units, counts, partition = trained_synthetic
        # representative unit per class: the most occupied one
        reps = {}
        for label in range(1, 6):
            class_units = partition.units_of(label)
            reps[label] = int(class_units[np.argmax(counts[class_units])])
        centroids = {label: trained.codebook[unit]
                     for label, unit in reps.items()}
        # the two farthest-apart broad classes
        pairs = [(a, b) for a in centroids for b in centroids if a < b]
        far_a, far_b = max(pairs, key=lambda p: np.linalg.norm(
            centroids[p[0]] - centroids[p[1]]))
        pa = np.array([v for _, v in codevector_profile(trained, reps[far_a])])
        pb = np.array([v for _, v in codevector_profile(trained, reps[far_b])])
        all_dists = [np.linalg.norm(trained.codebook[u] - trained.codebook[v])
                     for u in range(trained.units)
                     for v in range(u + 1, trained.units)]
        assert np.linalg.norm(pa - pb) > np.median(all_dists)

    def test_occupancy_weighted_codebook_mean_near_zero(self,
                                                        trained_synthetic):
        trained, units, counts, _ = trained_synthetic
        weighted_mean = (counts[:, None] * trained.codebook).sum(axis=0) \
            / counts.sum()
        assert np.abs(weighted_mean).max() < 0.5


class TestCodevectorProfile:
    def test_zero_vector_flat_profile(self):
        som = init_map(GridTopology(2, 2), 10, np.random.default_rng(0)
                       .normal(size=(8, 10)), seed=0)
        som.codebook[1] = 0.0
        profile = codevector_profile(som, 1)
        assert len(profile) == 10
        assert [name for name, _ in profile] == list(FEATURE_VARIABLES)
        assert all(v == 0.0 for _, v in profile)

    def test_unit_out_of_range(self):
        som = init_map(GridTopology(2, 2), 2, np.zeros((4, 2)), seed=0)
        with pytest.raises(ValueError):
            codevector_profile(som, 4)

    def test_names_must_match_dim(self):
        som = init_map(GridTopology(2, 2), 2, np.zeros((4, 2)), seed=0)
        with pytest.raises(ValueError):
            codevector_profile(som, 0, ["only_one"])
