"""4x4 transition tables between registration causes and exit types.

Two crossings are built over the spell histories: the cause of a
registration against the exit that ended the same spell, and an exit
against the cause of the following re-registration.  Each cell is read
two ways: as a share of all transitions and as a share of its row.
Per-individual indicators summarize how often an exit-to-registration
step was of type job-to-lay-off or job-to-end-of-contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGISTRATION_TO_EXIT = "registration_to_exit"
EXIT_TO_REGISTRATION = "exit_to_registration"
DIRECTIONS = (REGISTRATION_TO_EXIT, EXIT_TO_REGISTRATION)

N_MODALITIES = 4


@dataclass(frozen=True)
class TransitionPair:
    from_modality: int
    to_modality: int
    direction: str
    individual_id: str = ""

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        for m in (self.from_modality, self.to_modality):
            if m not in (1, 2, 3, 4):
                raise ValueError(f"modality {m} out of range 1-4")


@dataclass
class TransitionTable:
    """Counts plus the two percentage views and the margins.

    ``total_share`` entries are percentages of the grand total,
    ``row_share`` percentages of each row sum.  Empty rows keep a zero
    row_share with an explicit marker instead of a special numeric.
    """

    direction: str
    counts: np.ndarray          # (4, 4) int
    total_share: np.ndarray     # (4, 4) percent of grand total
    row_share: np.ndarray       # (4, 4) percent of row sum, 0 where empty
    row_margins: np.ndarray     # (4,) percent of grand total
    col_margins: np.ndarray     # (4,) percent of grand total
    empty_rows: np.ndarray      # (4,) bool
    is_empty: bool = False


def build_table(pairs, direction: str) -> TransitionTable:
    """Aggregate transition pairs into one 4x4 table.

    All pairs must carry the requested direction.  An empty input yields
    an all-zero table flagged globally empty rather than an error.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    counts = np.zeros((N_MODALITIES, N_MODALITIES), dtype=np.int64)
    for p in pairs:
        if p.direction != direction:
            raise ValueError(
                f"pair direction {p.direction!r} mixed into a "
                f"{direction!r} table")
        counts[p.from_modality - 1, p.to_modality - 1] += 1
    return table_from_counts(counts, direction)


def table_from_counts(counts, direction: str) -> TransitionTable:
    """Build the percentage views from a ready-made count matrix."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (N_MODALITIES, N_MODALITIES):
        raise ValueError(f"expected a 4x4 count matrix, got {counts.shape}")
    if (counts < 0).any():
        raise ValueError("negative counts")
    total = counts.sum()
    row_sums = counts.sum(axis=1)
    empty_rows = row_sums == 0
    if total == 0:
        zeros = np.zeros((N_MODALITIES, N_MODALITIES))
        return TransitionTable(
            direction=direction, counts=counts, total_share=zeros.copy(),
            row_share=zeros.copy(), row_margins=np.zeros(N_MODALITIES),
            col_margins=np.zeros(N_MODALITIES), empty_rows=empty_rows,
            is_empty=True)
    total_share = counts / total * 100.0
    row_share = np.zeros((N_MODALITIES, N_MODALITIES))
    occupied = ~empty_rows
    row_share[occupied] = (counts[occupied]
                           / row_sums[occupied, None] * 100.0)
    return TransitionTable(
        direction=direction,
        counts=counts,
        total_share=total_share,
        row_share=row_share,
        row_margins=row_sums / total * 100.0,
        col_margins=counts.sum(axis=0) / total * 100.0,
        empty_rows=empty_rows,
        is_empty=False,
    )


def merge_tables(a: TransitionTable, b: TransitionTable) -> TransitionTable:
    """Combine tables built over disjoint pair lists by count addition."""
    if a.direction != b.direction:
        raise ValueError("cannot merge tables of different directions")
    return table_from_counts(a.counts + b.counts, a.direction)


def significant_cells(table: TransitionTable,
                      threshold: float) -> list[tuple[int, int]]:
    """Cells whose total share reaches the threshold, largest first.

    Returned coordinates are 1-based (from, to).
    """
    hits = []
    for i in range(N_MODALITIES):
        for j in range(N_MODALITIES):
            share = table.total_share[i, j]
            if share >= threshold:
                hits.append((-share, i + 1, j + 1))
    hits.sort()
    return [(i, j) for _, i, j in hits]


@dataclass(frozen=True)
class RssIndicators:
    """Per-individual shares of the exit-to-registration transition types.

    ``rss11`` is the fraction of the individual's exit-to-registration
    steps that go from a job exit back to a lay-off registration, and
    ``rss12`` the fraction going from a job exit to an end-of-contract
    registration.  Defined only for individuals with at least one step.
    """

    individual_id: str
    rss11: float
    rss12: float
    n_transitions: int

    def __post_init__(self):
        if self.n_transitions < 1:
            raise ValueError("indicators need at least one transition")
        if self.rss11 + self.rss12 > 1.0 + 1e-12:
            raise ValueError("rss11 + rss12 exceeds 1")


def rss_indicators(trajectory, individual_id: str = "") -> RssIndicators:
    """Summarize one individual's ordered exit-to-registration pairs."""
    pairs = list(trajectory)
    if not pairs:
        raise ValueError("undefined indicators: zero exit-to-registration "
                         "pairs")
    n = len(pairs)
    c11 = 0
    c12 = 0
    for p in pairs:
        if p.direction != EXIT_TO_REGISTRATION:
            raise ValueError("trajectory must contain exit-to-registration "
                             "pairs only")
        if individual_id and p.individual_id and p.individual_id != individual_id:
            raise ValueError("trajectory mixes individuals")
        if p.from_modality == 1 and p.to_modality == 1:
            c11 += 1
        elif p.from_modality == 1 and p.to_modality == 2:
            c12 += 1
    ident = individual_id or pairs[0].individual_id
    return RssIndicators(individual_id=ident, rss11=c11 / n, rss12=c12 / n,
                         n_transitions=n)


def derive_pairs(records) -> list[TransitionPair]:
    """Extract both transition directions from spell-level records.

    Records are grouped by individual and ordered by spell index; every
    completed spell yields a registration-to-exit pair and every pair of
    consecutive spells whose first has a known exit yields an
    exit-to-registration pair.
    """
    by_individual: dict[str, list] = {}
    for rec in records:
        by_individual.setdefault(rec.individual_id, []).append(rec)
    pairs: list[TransitionPair] = []
    for ind_id in by_individual:
        spells = sorted(by_individual[ind_id], key=lambda r: r.spell_index)
        for i, rec in enumerate(spells):
            if rec.rmotifi is None:
                continue
            if rec.rmotifa is not None:
                pairs.append(TransitionPair(
                    from_modality=rec.rmotifi, to_modality=rec.rmotifa,
                    direction=REGISTRATION_TO_EXIT, individual_id=ind_id))
                if i + 1 < len(spells) and spells[i + 1].rmotifi is not None:
                    pairs.append(TransitionPair(
                        from_modality=rec.rmotifa,
                        to_modality=spells[i + 1].rmotifi,
                        direction=EXIT_TO_REGISTRATION,
                        individual_id=ind_id))
    return pairs


def rss_by_individual(pairs) -> dict[str, RssIndicators]:
    """RSS indicators for every individual holding at least one
    exit-to-registration pair; others are simply absent from the map."""
    grouped: dict[str, list[TransitionPair]] = {}
    for p in pairs:
        if p.direction == EXIT_TO_REGISTRATION:
            grouped.setdefault(p.individual_id, []).append(p)
    return {ind: rss_indicators(ps, ind) for ind, ps in grouped.items()}


def table_rows(table: TransitionTable) -> list[list]:
    """Flatten a table for delimited export, both views stacked per cell."""
    rows = []
    for i in range(N_MODALITIES):
        for j in range(N_MODALITIES):
            rows.append([
                i + 1, j + 1, int(table.counts[i, j]),
                table.total_share[i, j], table.row_share[i, j],
                "empty_row" if table.empty_rows[i] else "",
            ])
    return rows
