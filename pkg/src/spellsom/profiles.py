"""Descriptive outputs: class statistics, modality distributions,
code-vector profiles and inter-unit distances.

Statistics are computed on raw (unstandardized) units so that ages stay
in years and durations in days; the code-vector profiles, in contrast,
live in standardized space because that is what the map was trained on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FEATURE_VARIABLES, CodedDataset
from .som import SomMap

POPULATION = "population"
SCOPES = ("broad_class", "grid_cell", POPULATION)


@dataclass
class ClassProfile:
    """Per-class and whole-population mean/sd/count per variable.

    ``means``/``sds``/``counts`` have one row per class plus a final
    population row.  Counts are per variable because the descriptive-only
    variables (latest-job wage, transition indicators) can be absent for
    part of the population.
    """

    classes: list
    variables: list[str]
    means: np.ndarray       # (k+1, V)
    sds: np.ndarray         # (k+1, V)
    counts: np.ndarray      # (k+1, V) int
    class_record_counts: np.ndarray   # (k,) records per class
    empty_classes: np.ndarray         # (k,) bool

    def rows(self) -> list[list]:
        out = []
        scopes = [str(c) for c in self.classes] + [POPULATION]
        for si, scope in enumerate(scopes):
            for vi, var in enumerate(self.variables):
                out.append([scope, var, self.means[si, vi], self.sds[si, vi],
                            int(self.counts[si, vi])])
        return out


def _values_matrix(records, variables, rss):
    n = len(records)
    values = np.full((n, len(variables)), np.nan)
    for i, rec in enumerate(records):
        for j, var in enumerate(variables):
            if var in ("RSS11", "RSS12"):
                if rss is not None and rec.individual_id in rss:
                    ind = rss[rec.individual_id]
                    values[i, j] = ind.rss11 if var == "RSS11" else ind.rss12
            else:
                v = rec.feature_value(var)
                if v is not None:
                    values[i, j] = v
    return values


def class_profiles(records, labels, variables=None, rss=None) -> ClassProfile:
    """Raw-unit means and population SDs per class plus the population.

    ``labels`` assigns one class per record.  ``rss`` optionally maps an
    individual id to its transition indicators so RSS11/RSS12 can be
    profiled alongside the registry variables.
    """
    records = list(records)
    labels = np.asarray(labels)
    if labels.shape != (len(records),):
        raise ValueError("labels must cover all records")
    if variables is None:
        variables = list(FEATURE_VARIABLES) + ["SRREVAL"]
        if rss is not None:
            variables += ["RSS11", "RSS12"]
    classes = sorted(set(labels.tolist()))
    values = _values_matrix(records, variables, rss)

    k = len(classes)
    means = np.full((k + 1, len(variables)), np.nan)
    sds = np.full((k + 1, len(variables)), np.nan)
    counts = np.zeros((k + 1, len(variables)), dtype=int)
    record_counts = np.zeros(k, dtype=int)
    for si, cls in enumerate(classes):
        mask = labels == cls
        record_counts[si] = int(mask.sum())
        _fill_stats(values[mask], means, sds, counts, si)
    _fill_stats(values, means, sds, counts, k)
    return ClassProfile(
        classes=classes, variables=list(variables), means=means, sds=sds,
        counts=counts, class_record_counts=record_counts,
        empty_classes=record_counts == 0)


def _fill_stats(block, means, sds, counts, row):
    for j in range(block.shape[1]):
        col = block[:, j]
        col = col[~np.isnan(col)]
        counts[row, j] = col.size
        if col.size:
            means[row, j] = col.mean()
            sds[row, j] = col.std()


@dataclass
class QualDistribution:
    scope: str                       # broad_class | grid_cell | population
    group: object                    # class label, unit id, or None
    variable: str
    frequencies: dict[str, float]    # modality -> relative frequency
    count: int
    empty: bool = False


def qualitative_distribution(coded: CodedDataset, variable: str,
                             group_labels=None, scope: str = POPULATION,
                             groups=None) -> list[QualDistribution]:
    """Relative modality frequencies per group plus the population.

    ``groups`` forces the group universe (e.g. every grid cell) so empty
    groups are emitted with an explicit flag instead of dropped.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    modalities = coded.modalities(variable)
    values = coded.qualitative[variable]
    for i, v in enumerate(values):
        if v not in modalities:
            raise ValueError(f"unknown modality {v!r} for {variable} "
                             f"(record {i})")

    def distribution(indices, group):
        count = len(indices)
        freqs = {m: 0.0 for m in modalities}
        for i in indices:
            freqs[values[i]] += 1.0
        if count:
            for m in modalities:
                freqs[m] /= count
        return QualDistribution(scope=scope if group is not None else POPULATION,
                                group=group, variable=variable,
                                frequencies=freqs, count=count,
                                empty=count == 0)

    out = []
    if scope != POPULATION:
        if group_labels is None:
            raise ValueError("group labels required for a grouped scope")
        group_labels = list(group_labels)
        if len(group_labels) != coded.n_records:
            raise ValueError("group labels must cover all records")
        universe = groups if groups is not None else sorted(set(group_labels))
        members: dict = {g: [] for g in universe}
        for i, g in enumerate(group_labels):
            if g in members:
                members[g].append(i)
        for g in universe:
            out.append(distribution(members[g], g))
    out.append(distribution(range(coded.n_records), None))
    return out


@dataclass
class NeighborDistanceField:
    """Code-vector distances between lattice neighbors, for the distance map."""

    distances: dict[int, list[tuple[int, float]]]   # unit -> (neighbor, d)
    max_distance: float

    def rows(self) -> list[list]:
        out = []
        for unit in sorted(self.distances):
            for neighbor, d in self.distances[unit]:
                out.append([unit, neighbor, d])
        return out


def neighbor_distances(som: SomMap) -> NeighborDistanceField:
    """Euclidean code-vector distance for every lattice-neighbor pair."""
    distances: dict[int, list[tuple[int, float]]] = {
        u: [] for u in range(som.units)}
    max_d = 0.0
    for u in range(som.units):
        for v in som.topology.neighbors(u):
            if v < u:
                continue
            d = float(np.linalg.norm(som.codebook[u] - som.codebook[v]))
            distances[u].append((v, d))
            distances[v].append((u, d))
            max_d = max(max_d, d)
    for u in distances:
        distances[u].sort()
    return NeighborDistanceField(distances=distances, max_distance=max_d)


def codevector_profile(som: SomMap, unit: int,
                       variable_names=None) -> list[tuple[str, float]]:
    """The standardized components of one code vector in feature order."""
    if not 0 <= unit < som.units:
        raise ValueError(f"unit {unit} out of range")
    names = list(variable_names) if variable_names is not None \
        else list(FEATURE_VARIABLES)
    if len(names) != som.dim:
        raise ValueError("variable names do not match the map dimension")
    return [(name, float(v)) for name, v in zip(names, som.codebook[unit])]
