"""Ward grouping of map units into a handful of broad classes.

Agglomerative Ward linkage over the code vectors, optionally weighted by
unit occupancy, reduces the detailed classification (one class per map
unit) to a small number of broad classes.  The merge cost is the increase
in total within-cluster sum of squares; the Lance-Williams recurrence
keeps the pairwise costs exact across merges.  Broad classes of a trained
map tend to occupy contiguous patches of the grid; contiguity is reported
as a diagnostic, never enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .som import GridTopology


@dataclass(frozen=True)
class Merge:
    cluster_a: int      # ids: 0..n-1 leaves, then n, n+1, ... per merge
    cluster_b: int
    cost: float         # increase in within-cluster sum of squares
    size: int           # leaves in the merged cluster


@dataclass
class Dendrogram:
    merges: list[Merge]
    leaf_count: int

    def rows(self) -> list[list]:
        return [[m.cluster_a, m.cluster_b, m.cost, m.size]
                for m in self.merges]


@dataclass
class MacroPartition:
    """Unit-to-broad-class map; labels run 1..k by descending weight."""

    labels: np.ndarray          # (units,) int, 1-based broad classes
    k: int

    def units_of(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def class_sizes(self) -> dict[int, int]:
        return {c: int((self.labels == c).sum()) for c in range(1, self.k + 1)}


def ward(code_vectors, weights=None, k: int = 5) -> tuple[MacroPartition, Dendrogram]:
    """Agglomerative Ward run to completion, partition cut at k clusters.

    ``weights`` are optional per-unit occupancy counts; omitted, every
    unit counts once.  Ties are broken on the lexicographically smallest
    (cost, smaller id, larger id).  Labels are canonicalized 1..k by
    descending total weight (then smallest unit id).
    """
    x = np.asarray(code_vectors, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("code vectors must be a nonempty 2-D array")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError("weights length does not match code vectors")
        if (w <= 0).any():
            raise ValueError("weights must be positive")

    # Pairwise Ward costs over all cluster ids ever created (2n-1 of them).
    total = 2 * n - 1
    cost = np.full((total, total), np.inf)
    cw = np.zeros(total)
    size = np.zeros(total, dtype=int)
    cw[:n] = w
    size[:n] = 1
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    pairw = (w[:, None] * w[None, :]) / (w[:, None] + w[None, :])
    init = pairw * d2
    cost[:n, :n] = np.where(np.eye(n, dtype=bool), np.inf, init)

    active = list(range(n))
    merges: list[Merge] = []
    for step in range(n - 1):
        act = np.array(active)
        sub = cost[np.ix_(act, act)]
        flat = int(np.argmin(sub))            # row-major: lexicographic tie-break
        ia, ib = divmod(flat, len(act))
        a, b = int(act[min(ia, ib)]), int(act[max(ia, ib)])
        if a > b:
            a, b = b, a
        c = float(cost[a, b])
        new = n + step
        cw[new] = cw[a] + cw[b]
        size[new] = size[a] + size[b]
        merges.append(Merge(cluster_a=a, cluster_b=b, cost=c, size=int(size[new])))
        active.remove(a)
        active.remove(b)
        for other in active:
            upd = ((cw[a] + cw[other]) * cost[a, other]
                   + (cw[b] + cw[other]) * cost[b, other]
                   - cw[other] * c) / (cw[new] + cw[other])
            cost[new, other] = upd
            cost[other, new] = upd
        active.append(new)

    dendrogram = Dendrogram(merges=merges, leaf_count=n)
    return cut(dendrogram, k, weights=w), dendrogram


def cut(dendrogram: Dendrogram, k: int, weights=None) -> MacroPartition:
    """Partition obtained by applying the first leaf_count - k merges."""
    n = dendrogram.leaf_count
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    parent = list(range(2 * n - 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for step, m in enumerate(dendrogram.merges[:n - k]):
        new = n + step
        parent[find(m.cluster_a)] = new
        parent[find(m.cluster_b)] = new

    roots: dict[int, list[int]] = {}
    for leaf in range(n):
        roots.setdefault(find(leaf), []).append(leaf)
    order = sorted(roots.values(),
                   key=lambda units: (-sum(w[u] for u in units), units[0]))
    labels = np.zeros(n, dtype=int)
    for rank, units in enumerate(order, start=1):
        labels[units] = rank
    return MacroPartition(labels=labels, k=k)


@dataclass(frozen=True)
class ContiguityEntry:
    broad_class: int
    contiguous: bool
    components: int


def contiguity_report(partition: MacroPartition,
                      topology: GridTopology) -> list[ContiguityEntry]:
    """Connected components of each broad class under the 8-neighborhood."""
    if partition.labels.shape != (topology.units,):
        raise ValueError("partition does not cover the grid")
    report = []
    for label in range(1, partition.k + 1):
        units = set(int(u) for u in partition.units_of(label))
        components = 0
        seen: set[int] = set()
        for start in sorted(units):
            if start in seen:
                continue
            components += 1
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                for v in topology.neighbors(u):
                    if v in units and v not in seen:
                        seen.add(v)
                        stack.append(v)
        report.append(ContiguityEntry(broad_class=label,
                                      contiguous=components == 1,
                                      components=components))
    return report
