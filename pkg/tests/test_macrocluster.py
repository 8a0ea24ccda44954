import numpy as np
import pytest

from spellsom import GridTopology, MacroPartition, contiguity_report, ward


def naive_ward(points, weights=None):
    """From-scratch Ward: every step recomputes all cluster SSEs directly
    from the member points and merges the cheapest pair (ties on the
    lexicographically smallest (cost, smaller id, larger id))."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)

    def sse(members):
        pw = w[members]
        pts = points[members]
        centroid = (pw[:, None] * pts).sum(axis=0) / pw.sum()
        return float((pw * ((pts - centroid) ** 2).sum(axis=1)).sum())

    clusters = {i: [i] for i in range(n)}
    merges = []
    next_id = n
    while len(clusters) > 1:
        best = None
        for a in sorted(clusters):
            for b in sorted(clusters):
                if b <= a:
                    continue
                cost = sse(clusters[a] + clusters[b]) \
                    - sse(clusters[a]) - sse(clusters[b])
                key = (cost, a, b)
                if best is None or key < best:
                    best = key
        cost, a, b = best
        clusters[next_id] = clusters.pop(a) + clusters.pop(b)
        merges.append((a, b, cost, len(clusters[next_id])))
        next_id += 1
    return merges


class TestWard:
    def test_two_separated_pairs(self):
        points = np.array([[0.0], [0.1], [10.0], [10.1]])
        partition, dendrogram = ward(points, k=2)
        assert partition.labels[0] == partition.labels[1]
        assert partition.labels[2] == partition.labels[3]
        assert partition.labels[0] != partition.labels[2]
        assert dendrogram.merges[0].cost == pytest.approx(0.005)

    def test_exact_tie_breaks_to_smallest_ids(self):
        # integer coordinates make the two pair costs bitwise equal
        points = np.array([[0.0], [1.0], [10.0], [11.0]])
        _, dendrogram = ward(points, k=1)
        assert (dendrogram.merges[0].cluster_a,
                dendrogram.merges[0].cluster_b) == (0, 1)
        assert (dendrogram.merges[1].cluster_a,
                dendrogram.merges[1].cluster_b) == (2, 3)

    def test_identity_cut(self):
        rng = np.random.default_rng(0)
        points = rng.normal(size=(7, 3))
        partition, dendrogram = ward(points, k=7)
        assert sorted(partition.labels) == list(range(1, 8))
        assert len(dendrogram.merges) == 6      # full history still recorded

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(50):
            n = int(rng.integers(3, 13))
            dim = int(rng.integers(1, 4))
            points = rng.normal(size=(n, dim))
            _, dendrogram = ward(points, k=1)
            expected = naive_ward(points)
            got = [(m.cluster_a, m.cluster_b, m.cost, m.size)
                   for m in dendrogram.merges]
            assert [(a, b, s) for a, b, _, s in got] == \
                [(a, b, s) for a, b, _, s in expected]
            np.testing.assert_allclose([c for _, _, c, _ in got],
                                       [c for _, _, c, _ in expected],
                                       rtol=1e-9, atol=1e-12)

    def test_weighted_matches_naive_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            n = int(rng.integers(3, 11))
            points = rng.normal(size=(n, 2))
            weights = rng.integers(1, 9, size=n).astype(float)
            _, dendrogram = ward(points, weights=weights, k=1)
            expected = naive_ward(points, weights)
            got = [(m.cluster_a, m.cluster_b, m.cost, m.size)
                   for m in dendrogram.merges]
            assert [(a, b) for a, b, _, _ in got] == \
                [(a, b) for a, b, _, _ in expected]
            np.testing.assert_allclose([c for _, _, c, _ in got],
                                       [c for _, _, c, _ in expected],
                                       rtol=1e-9, atol=1e-12)

    def test_merge_costs_non_decreasing(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            points = rng.normal(size=(int(rng.integers(4, 40)), 3))
            _, dendrogram = ward(points, k=1)
            costs = [m.cost for m in dendrogram.merges]
            assert all(b >= a * (1 - 1e-12) - 1e-12
                       for a, b in zip(costs, costs[1:]))

    def test_unit_weights_equal_unweighted_exactly(self):
        rng = np.random.default_rng(4)
        points = rng.normal(size=(25, 4))
        p1, d1 = ward(points, k=4)
        p2, d2 = ward(points, weights=np.ones(25), k=4)
        np.testing.assert_array_equal(p1.labels, p2.labels)
        assert [(m.cluster_a, m.cluster_b, m.cost) for m in d1.merges] == \
            [(m.cluster_a, m.cluster_b, m.cost) for m in d2.merges]

    def test_permutation_gives_same_partition_up_to_renaming(self):
        rng = np.random.default_rng(5)
        points = rng.normal(size=(30, 3))
        partition, _ = ward(points, k=5)
        perm = rng.permutation(30)
        permuted, _ = ward(points[perm], k=5)
        # compare the induced partitions as sets of frozensets
        def groups(labels, index):
            out = {}
            for pos, lbl in enumerate(labels):
                out.setdefault(lbl, set()).add(index[pos])
            return {frozenset(v) for v in out.values()}
        assert groups(partition.labels, np.arange(30)) == \
            groups(permuted.labels, perm)

    def test_record_count_composition(self):
        # composed with assignments, per-class record counts sum to n
        rng = np.random.default_rng(6)
        points = rng.normal(size=(16, 2))
        occupancy = rng.integers(1, 100, size=16).astype(float)
        partition, _ = ward(points, weights=occupancy, k=3)
        per_class = {c: occupancy[partition.labels == c].sum()
                     for c in range(1, 4)}
        assert sum(per_class.values()) == occupancy.sum()
        # canonical labels: descending record mass
        masses = [per_class[c] for c in range(1, 4)]
        assert masses == sorted(masses, reverse=True)

    def test_cut_at_different_levels(self):
        from spellsom import cut

        rng = np.random.default_rng(7)
        points = rng.normal(size=(12, 2))
        _, dendrogram = ward(points, k=1)
        for k in (1, 3, 6, 12):
            partition = cut(dendrogram, k)
            assert partition.k == k
            assert sorted(set(partition.labels)) == list(range(1, k + 1))
        # coarser cuts only merge, never split, the finer ones
        fine = cut(dendrogram, 6).labels
        coarse = cut(dendrogram, 3).labels
        mapping = {}
        for f, c in zip(fine, coarse):
            assert mapping.setdefault(f, c) == c

    def test_k_out_of_range(self):
        points = np.zeros((4, 2))
        with pytest.raises(ValueError):
            ward(points, k=5)
        with pytest.raises(ValueError):
            ward(points, k=0)

    def test_positive_weights_required(self):
        with pytest.raises(ValueError):
            ward(np.zeros((3, 1)), weights=np.array([1.0, 0.0, 1.0]), k=2)


class TestContiguity:
    def test_block_is_contiguous(self):
        topo = GridTopology(4, 4)
        labels = np.full(16, 2)
        for r in (0, 1):
            for c in (0, 1):
                labels[topo.unit_at(r, c)] = 1
        report = contiguity_report(MacroPartition(labels=labels, k=2), topo)
        assert report[0].contiguous and report[0].components == 1

    def test_opposite_corners_flagged(self):
        topo = GridTopology(4, 4)
        labels = np.full(16, 1)
        labels[topo.unit_at(0, 0)] = 2
        labels[topo.unit_at(3, 3)] = 2
        report = contiguity_report(MacroPartition(labels=labels, k=2), topo)
        split = [e for e in report if e.broad_class == 2][0]
        assert not split.contiguous
        assert split.components == 2

    def test_whole_grid_single_class(self):
        topo = GridTopology(3, 5)
        report = contiguity_report(
            MacroPartition(labels=np.ones(15, dtype=int), k=1), topo)
        assert report[0].contiguous

    def test_diagonal_counts_as_adjacent(self):
        topo = GridTopology(2, 2)
        labels = np.array([1, 2, 2, 1])     # diagonal pair of class 1
        report = contiguity_report(MacroPartition(labels=labels, k=2), topo)
        assert all(e.contiguous for e in report)

    def test_partition_must_cover_grid(self):
        topo = GridTopology(3, 3)
        with pytest.raises(ValueError):
            contiguity_report(MacroPartition(labels=np.ones(4, dtype=int),
                                             k=1), topo)
