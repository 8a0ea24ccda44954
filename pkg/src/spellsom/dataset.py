"""Spell records: ingestion, qualitative coding, standardization, synthesis.

One record describes one individual's unemployment spell as found in the
registry extract: quantitative characteristics (age, durations, benefit
amounts, occasional-work intensity, ...) plus qualitative codes for the
education level, the cause of registration and the type of exit.  The
population of interest is restricted to recurring unemployed, i.e.
individuals with at least two spells.

The module also hosts the seeded synthetic-cohort generator used in place
of the proprietary registry extract: per-class truncated-Gaussian
quantitative marginals, independent categorical draws and a small
registration/exit chain producing per-individual transition pairs.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingValueError, RowError, SchemaError, ZeroVarianceError

# Fixed feature order of the classification matrix.  The daily wage in the
# latest job (SRREVAL) is deliberately absent: it does not exist for
# first-job seekers and is used descriptively only.
FEATURE_VARIABLES = (
    "AGE", "CMDUR", "CPPAR", "DUR", "EXPER",
    "INDUR", "MGAIN", "MXMHEUR", "NCHOM", "TINDMOY",
)

QUALITATIVE_VARIABLES = (
    "AGEC", "CTINDMOY", "DIPL3", "DURC", "HAR", "PPARC", "RMOTIFA", "RMOTIFI",
)

# Derived qualitative variable -> quantitative source column.
DERIVED_SOURCES = {
    "AGEC": "AGE",
    "CTINDMOY": "TINDMOY",
    "DURC": "CMDUR",
    "HAR": "MXMHEUR",
    "PPARC": "CPPAR",
}

DIPL3_LEVELS = (">bac", "bac", "<bac")
MOTIF_CODES = ("1", "2", "3", "4")

# Raw registry exit code for administrative cancellations later judged to be
# unreported job finds; folded into exit category 1 at ingestion.
CANCELLED_EXIT_RAW_CODE = 90


@dataclass
class SpellRecord:
    """One spell-level observation of one individual.

    Quantitative fields keep the registry variable names (lowercased).
    ``srreval`` is optional (absent for first-job seekers) and ``rmotifa``
    is optional while the spell is ongoing.
    """

    individual_id: str
    spell_index: int
    age: float | None = None
    cmdur: float | None = None
    cppar: float | None = None
    dur: float | None = None
    exper: float | None = None
    indur: float | None = None
    mgain: float | None = None
    mxmheur: float | None = None
    nchom: int | None = None
    tindmoy: float | None = None
    srreval: float | None = None
    dipl3: str | None = None
    rmotifi: int | None = None
    rmotifa: int | None = None

    def feature_value(self, name: str) -> float | None:
        return getattr(self, name.lower())

    def validate(self) -> None:
        """Raise RowError on any record-invariant violation."""
        if self.spell_index is None or self.spell_index < 1:
            raise RowError("spell index must be >= 1")
        if self.nchom is not None and self.nchom < 2:
            raise RowError("not recurring")
        if self.cppar is not None and not 0.0 <= self.cppar <= 1.0:
            raise RowError("CPPAR outside [0,1]")
        for name in ("DUR", "INDUR", "MXMHEUR", "CMDUR", "EXPER", "AGE",
                     "MGAIN", "TINDMOY"):
            value = self.feature_value(name)
            if value is not None and value < 0:
                raise RowError(f"{name} negative")
        if self.dipl3 is not None and self.dipl3 not in DIPL3_LEVELS:
            raise RowError(f"unknown DIPL3 level {self.dipl3!r}")
        if self.rmotifi is not None and self.rmotifi not in (1, 2, 3, 4):
            raise RowError(f"unknown registration cause {self.rmotifi}")
        if self.rmotifa is not None and self.rmotifa not in (1, 2, 3, 4):
            raise RowError(f"unknown exit type {self.rmotifa}")
        if self.rmotifi == 4 and self.srreval is not None:
            raise RowError("SRREVAL present for a first-job seeker")


@dataclass(frozen=True)
class VariableCoding:
    """Binning rule for one derived qualitative variable.

    ``boundaries`` are the interior cut points of left-closed/right-open
    intervals covering [0, +inf); when ``zero_category`` is set, an exact
    0.0 is matched before any interval bin and the first interval label
    denotes (0, boundaries[0]).
    """

    variable: str
    source: str
    boundaries: tuple[float, ...]
    labels: tuple[str, ...]
    zero_category: bool = False

    def __post_init__(self):
        n_bins = len(self.boundaries) + 1 + (1 if self.zero_category else 0)
        if len(self.labels) != n_bins:
            raise ValueError(
                f"{self.variable}: {n_bins} bins but {len(self.labels)} labels")
        if any(b <= a for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError(f"{self.variable}: boundaries not increasing")


@dataclass(frozen=True)
class CodingSpec:
    """Full modality registry: binning rules plus exogenous modality lists."""

    rules: dict[str, VariableCoding]
    exogenous: dict[str, tuple[str, ...]]

    def modalities(self, variable: str) -> tuple[str, ...]:
        if variable in self.rules:
            return self.rules[variable].labels
        if variable in self.exogenous:
            return self.exogenous[variable]
        raise KeyError(f"unknown qualitative variable {variable!r}")

    def variables(self) -> tuple[str, ...]:
        return QUALITATIVE_VARIABLES


def default_coding_spec() -> CodingSpec:
    """The coding grid of the study population (left-closed intervals)."""
    rules = {
        "AGEC": VariableCoding(
            "AGEC", "AGE", (25.0, 35.0, 45.0, 55.0),
            ("<25", "25-35", "35-45", "45-55", ">55")),
        "CTINDMOY": VariableCoding(
            "CTINDMOY", "TINDMOY", (60.0, 100.0, 150.0),
            ("<60", "60-100", "100-150", ">150")),
        "DURC": VariableCoding(
            "DURC", "CMDUR", (12.0, 24.0),
            ("<12", "12-24", ">24")),
        "HAR": VariableCoding(
            "HAR", "MXMHEUR", (39.0, 78.0, 117.0),
            ("0", "0-39", "39-78", "78-117", ">117"), zero_category=True),
        "PPARC": VariableCoding(
            "PPARC", "CPPAR", (0.1, 0.3),
            ("0", "0-0.1", "0.1-0.3", ">0.3"), zero_category=True),
    }
    exogenous = {
        "DIPL3": DIPL3_LEVELS,
        "RMOTIFI": MOTIF_CODES,
        "RMOTIFA": MOTIF_CODES,
    }
    return CodingSpec(rules=rules, exogenous=exogenous)


def discretize(variable: str, value: float, spec: CodingSpec) -> str:
    """Map a quantitative value to its modality label.

    Total over [0, +inf): every nonnegative value falls in exactly one
    bin.  Negative values are a domain error for all coded variables.
    """
    rule = spec.rules.get(variable)
    if rule is None:
        raise KeyError(f"no binning rule for {variable!r}")
    value = float(value)
    if math.isnan(value):
        raise ValueError(f"{variable}: value is NaN")
    if value < 0:
        raise ValueError(f"{variable}: negative value {value!r} for a "
                         "nonnegative variable")
    offset = 0
    if rule.zero_category:
        if value == 0.0:
            return rule.labels[0]
        offset = 1
    return rule.labels[offset + bisect.bisect_right(rule.boundaries, value)]


def standardize(column) -> tuple[np.ndarray, float, float]:
    """Center and scale one column to mean 0, standard deviation 1.

    Population convention (divide by n).  Returns the z-scores together
    with the original mean and standard deviation for the inverse
    transform.
    """
    col = np.asarray(column, dtype=float)
    if col.size == 0:
        raise ValueError("cannot standardize an empty column")
    mean = float(col.mean())
    sd = float(col.std())
    if sd == 0.0:
        raise ZeroVarianceError(f"zero-variance column (constant {mean!r})")
    return (col - mean) / sd, mean, sd


def unstandardize(z, mean: float, sd: float) -> np.ndarray:
    return np.asarray(z, dtype=float) * sd + mean


@dataclass
class CodedDataset:
    """Standardized n x 10 feature matrix plus per-record modality codes."""

    n_records: int
    features: np.ndarray            # (n, 10) z-scores, FEATURE_VARIABLES order
    means: np.ndarray               # (10,) raw-unit column means
    sds: np.ndarray                 # (10,) raw-unit population sds
    qualitative: dict[str, list[str]]
    coding: CodingSpec
    individual_ids: list[str] = field(default_factory=list)
    spell_indices: list[int] = field(default_factory=list)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_VARIABLES

    def modalities(self, variable: str) -> tuple[str, ...]:
        return self.coding.modalities(variable)


def build_feature_matrix(records, spec: CodingSpec | None = None) -> CodedDataset:
    """Standardize the 10 feature columns and code the qualitative table.

    Every record must carry all 10 feature variables; a missing value is
    an error naming the record and the field.  The qualitative table maps
    the five derived variables through the coding grid and passes the
    education level and the registration/exit codes straight through.
    """
    spec = spec or default_coding_spec()
    records = list(records)
    if not records:
        raise ValueError("no records")
    n = len(records)

    raw = np.empty((n, len(FEATURE_VARIABLES)), dtype=float)
    for i, rec in enumerate(records):
        for j, name in enumerate(FEATURE_VARIABLES):
            value = rec.feature_value(name)
            if value is None:
                raise MissingValueError(
                    f"{name} missing for individual {rec.individual_id} "
                    f"(spell {rec.spell_index})")
            raw[i, j] = value

    features = np.empty_like(raw)
    means = np.empty(len(FEATURE_VARIABLES))
    sds = np.empty(len(FEATURE_VARIABLES))
    for j, name in enumerate(FEATURE_VARIABLES):
        features[:, j], means[j], sds[j] = standardize(raw[:, j])

    qualitative: dict[str, list[str]] = {v: [] for v in QUALITATIVE_VARIABLES}
    for rec in records:
        for var, source in DERIVED_SOURCES.items():
            qualitative[var].append(
                discretize(var, rec.feature_value(source), spec))
        qualitative["DIPL3"].append(rec.dipl3 if rec.dipl3 is not None else "")
        qualitative["RMOTIFI"].append(
            str(rec.rmotifi) if rec.rmotifi is not None else "")
        qualitative["RMOTIFA"].append(
            str(rec.rmotifa) if rec.rmotifa is not None else "")

    return CodedDataset(
        n_records=n,
        features=features,
        means=means,
        sds=sds,
        qualitative=qualitative,
        coding=spec,
        individual_ids=[r.individual_id for r in records],
        spell_indices=[r.spell_index for r in records],
    )


# ---------------------------------------------------------------------------
# Ingestion

DEFAULT_COLUMNS = ("ID", "SPELL") + tuple(
    v for v in ("AGE", "CMDUR", "CPPAR", "DUR", "EXPER", "INDUR", "MGAIN",
                "MXMHEUR", "NCHOM", "TINDMOY", "SRREVAL", "DIPL3",
                "RMOTIFI", "RMOTIFA"))

OPTIONAL_COLUMNS = frozenset({"SRREVAL", "RMOTIFA"})

_DIPL3_ALIASES = {"1": ">bac", "2": "bac", "3": "<bac",
                  ">bac": ">bac", "bac": "bac", "<bac": "<bac"}


@dataclass
class IngestResult:
    records: list[SpellRecord]
    rejections: list[tuple[int, str]]   # (1-based data row number, reason)

    @property
    def accepted(self) -> int:
        return len(self.records)

    @property
    def rejected(self) -> int:
        return len(self.rejections)


def _parse_float(token: str, name: str) -> float | None:
    token = token.strip()
    if token == "":
        return None
    try:
        return float(token)
    except ValueError:
        raise RowError(f"unparseable {name} value {token!r}") from None


def _parse_int(token: str, name: str) -> int | None:
    value = _parse_float(token, name)
    if value is None:
        return None
    if value != int(value):
        raise RowError(f"{name} is not an integer: {token!r}")
    return int(value)


def ingest(stream, schema: dict[str, str] | None = None,
           delimiter: str = ",") -> IngestResult:
    """Read spell records from delimited text.

    ``schema`` maps canonical column names to the file's header names
    when they differ.  Rows violating the record contract are rejected
    individually with their row number and a reason; a missing mandatory
    column aborts the whole read.
    """
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str)
                             else stream.decode("utf-8"))
    schema = schema or {}
    reader = csv.reader(stream, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: no header row") from None
    header = [h.strip() for h in header]
    position: dict[str, int] = {}
    for name in DEFAULT_COLUMNS:
        file_name = schema.get(name, name)
        if file_name in header:
            position[name] = header.index(file_name)
        elif name not in OPTIONAL_COLUMNS:
            raise SchemaError(f"missing mandatory column {file_name!r}")

    def cell(row, name):
        idx = position.get(name)
        if idx is None or idx >= len(row):
            return ""
        return row[idx]

    records: list[SpellRecord] = []
    rejections: list[tuple[int, str]] = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rmotifa = _parse_int(cell(row, "RMOTIFA"), "RMOTIFA")
            if rmotifa == CANCELLED_EXIT_RAW_CODE:
                # cancellations judged to be unreported job finds
                rmotifa = 1
            dipl3_raw = cell(row, "DIPL3").strip()
            dipl3 = _DIPL3_ALIASES.get(dipl3_raw)
            if dipl3 is None:
                raise RowError(f"unknown DIPL3 level {dipl3_raw!r}")
            rec = SpellRecord(
                individual_id=cell(row, "ID").strip(),
                spell_index=_parse_int(cell(row, "SPELL"), "SPELL"),
                age=_parse_float(cell(row, "AGE"), "AGE"),
                cmdur=_parse_float(cell(row, "CMDUR"), "CMDUR"),
                cppar=_parse_float(cell(row, "CPPAR"), "CPPAR"),
                dur=_parse_float(cell(row, "DUR"), "DUR"),
                exper=_parse_float(cell(row, "EXPER"), "EXPER"),
                indur=_parse_float(cell(row, "INDUR"), "INDUR"),
                mgain=_parse_float(cell(row, "MGAIN"), "MGAIN"),
                mxmheur=_parse_float(cell(row, "MXMHEUR"), "MXMHEUR"),
                nchom=_parse_int(cell(row, "NCHOM"), "NCHOM"),
                tindmoy=_parse_float(cell(row, "TINDMOY"), "TINDMOY"),
                srreval=_parse_float(cell(row, "SRREVAL"), "SRREVAL"),
                dipl3=dipl3,
                rmotifi=_parse_int(cell(row, "RMOTIFI"), "RMOTIFI"),
                rmotifa=rmotifa,
            )
            if not rec.individual_id:
                raise RowError("empty individual id")
            for name in ("SPELL", "AGE", "CMDUR", "CPPAR", "DUR", "EXPER",
                         "INDUR", "MGAIN", "MXMHEUR", "NCHOM", "TINDMOY",
                         "RMOTIFI"):
                attr = "spell_index" if name == "SPELL" else name.lower()
                if getattr(rec, attr) is None:
                    raise RowError(f"{name} missing")
            rec.validate()
        except RowError as exc:
            rejections.append((row_no, str(exc)))
            continue
        records.append(rec)
    return IngestResult(records=records, rejections=rejections)


def latest_spells(records) -> list:
    """Keep one record per individual: the one with the highest spell index.

    Output order follows each kept record's position in the input.
    """
    best: dict[str, SpellRecord] = {}
    for rec in records:
        current = best.get(rec.individual_id)
        if current is None or rec.spell_index > current.spell_index:
            best[rec.individual_id] = rec
    kept = set(id(rec) for rec in best.values())
    return [rec for rec in records if id(rec) in kept]


def records_to_rows(records) -> list[list]:
    """Serialize records in the canonical column order (None -> empty)."""
    rows = []
    for r in records:
        rows.append([
            r.individual_id, r.spell_index, r.age, r.cmdur, r.cppar, r.dur,
            r.exper, r.indur, r.mgain, r.mxmheur, r.nchom, r.tindmoy,
            r.srreval, r.dipl3, r.rmotifi, r.rmotifa,
        ])
    return rows


# ---------------------------------------------------------------------------
# Synthetic cohort generation

@dataclass(frozen=True)
class TransitionModel:
    """Chain probabilities for one synthetic class.

    ``first_registration`` draws the cause of the first registration;
    within the trajectory each non-final spell draws its exit from
    ``returning_exit`` and the next registration cause from the matching
    row of ``reregistration``; the final spell draws its exit from the
    ``final_exit`` row of its registration cause.
    """

    first_registration: tuple[float, ...]
    returning_exit: tuple[float, ...]
    reregistration: tuple[tuple[float, ...], ...]
    final_exit: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ClassSpec:
    proportion: float
    means: dict[str, float]          # 11 quantitative variables
    sds: dict[str, float]
    dipl3_probs: tuple[float, float, float]
    transitions: TransitionModel


@dataclass(frozen=True)
class SyntheticSpec:
    n_records: int
    classes: tuple[ClassSpec, ...]
    seed: int = 0

    def __post_init__(self):
        total = sum(c.proportion for c in self.classes)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"class proportions sum to {total!r}, not 1")
        for c in self.classes:
            if any(s < 0 for s in c.sds.values()):
                raise ValueError("negative dispersion")


@dataclass
class SyntheticCohort:
    """Generator output: one record per individual plus hidden ground truth."""

    records: list[SpellRecord]
    labels: np.ndarray               # planted class per record, 1-based
    pairs: list                      # TransitionPair list for both directions


# Default transition chain, identical for every class.  The conditional
# rows reproduce the observed registration->exit and exit->re-registration
# structure of the study population.
_EXIT_GIVEN_REGISTRATION = (
    (0.5908, 0.0345, 0.1371, 0.2375),
    (0.6267, 0.0335, 0.1272, 0.2126),
    (0.7029, 0.0250, 0.1231, 0.1490),
    (0.7551, 0.0372, 0.0887, 0.1190),
)
_REREGISTRATION_GIVEN_EXIT = (
    (0.3462, 0.5266, 0.0586, 0.0686),
    (0.4822, 0.3822, 0.0356, 0.1000),
    (0.5611, 0.3479, 0.0393, 0.0518),
    (0.5076, 0.3675, 0.0449, 0.0800),
)
# Exit mix among spells that are followed by a re-registration.
_RETURNING_EXIT = (0.7823, 0.0179, 0.1396, 0.0601)


def _normalized(row) -> tuple[float, ...]:
    total = float(sum(row))
    return tuple(float(v) / total for v in row)


def default_transition_model() -> TransitionModel:
    return TransitionModel(
        first_registration=_normalized((0.3509, 0.4681, 0.0703, 0.1107)),
        returning_exit=_normalized(_RETURNING_EXIT),
        reregistration=tuple(_normalized(r) for r in _REREGISTRATION_GIVEN_EXIT),
        final_exit=tuple(_normalized(r) for r in _EXIT_GIVEN_REGISTRATION),
    )


# Per-class calibration of the default cohort: proportions and the
# per-variable mean (sd) of the five broad classes of the study
# population, plus plausible education mixes.
_DEFAULT_CLASS_TABLE = {
    "proportions": (7908, 3793, 4519, 877, 2149),
    "AGE":      ((28.78, 8.01), (29.82, 8.06), (34.80, 9.25), (29.42, 8.16), (44.78, 8.03)),
    "CMDUR":    ((12.94, 9.80), (24.27, 19.84), (39.01, 20.00), (22.23, 13.24), (23.61, 17.63)),
    "CPPAR":    ((0.03, 0.06), (0.31, 0.20), (0.04, 0.08), (0.05, 0.09), (0.05, 0.09)),
    "DUR":      ((116.47, 96.95), (281.94, 200.50), (424.80, 253.95), (112.97, 114.94), (192.00, 155.37)),
    "EXPER":    ((2.51, 3.36), (3.81, 5.31), (4.15, 5.25), (2.88, 4.05), (16.79, 8.82)),
    "INDUR":    ((82.42, 131.35), (169.03, 202.03), (438.93, 414.16), (121.49, 182.21), (332.64, 245.01)),
    "MGAIN":    ((29.07, 254.73), (4612.14, 4386.92), (334.47, 1124.81), (126.66, 774.76), (204.58, 944.29)),
    "MXMHEUR":  ((2.01, 9.53), (127.88, 51.14), (19.04, 44.06), (11.92, 32.25), (13.32, 36.32)),
    "NCHOM":    ((2.22, 0.42), (2.26, 0.52), (2.13, 0.34), (4.36, 0.69), (2.25, 0.49)),
    "TINDMOY":  ((44.61, 59.80), (79.99, 80.45), (79.22, 63.52), (44.00, 58.51), (202.64, 155.71)),
    "SRREVAL":  ((215.52, 124.31), (263.19, 215.08), (223.60, 191.18), (230.71, 191.50), (439.40, 325.71)),
    "DIPL3":    ((0.30, 0.30, 0.40), (0.20, 0.30, 0.50), (0.15, 0.25, 0.60),
                 (0.20, 0.30, 0.50), (0.15, 0.20, 0.65)),
}


def default_synthetic_spec(n_records: int = 19246, seed: int = 0) -> SyntheticSpec:
    """Cohort spec calibrated to the five-class structure of the study."""
    table = _DEFAULT_CLASS_TABLE
    total = sum(table["proportions"])
    model = default_transition_model()
    classes = []
    for c in range(5):
        means = {}
        sds = {}
        for var in FEATURE_VARIABLES + ("SRREVAL",):
            mean, sd = table[var][c]
            means[var], sds[var] = mean, sd
        classes.append(ClassSpec(
            proportion=table["proportions"][c] / total,
            means=means,
            sds=sds,
            dipl3_probs=table["DIPL3"][c],
            transitions=model,
        ))
    return SyntheticSpec(n_records=n_records, classes=tuple(classes), seed=seed)


def _apportion(proportions, n: int) -> list[int]:
    """Largest-remainder allocation of n items to the given proportions."""
    shares = [p * n for p in proportions]
    counts = [int(math.floor(s)) for s in shares]
    remainder = n - sum(counts)
    order = sorted(range(len(shares)),
                   key=lambda i: (counts[i] - shares[i], i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def generate_synthetic(spec: SyntheticSpec) -> SyntheticCohort:
    """Draw a seeded cohort with planted class labels and transition pairs.

    Deterministic for a fixed spec: class sizes are apportioned exactly
    (largest remainder), quantitative marginals are Gaussian truncated at
    the domain bounds, and every individual's registration/exit chain has
    nchom spells, so each carries at least one exit-to-registration pair.
    """
    from .transitions import EXIT_TO_REGISTRATION, REGISTRATION_TO_EXIT, TransitionPair

    rng = np.random.default_rng(spec.seed)
    n = spec.n_records
    counts = _apportion([c.proportion for c in spec.classes], n)
    labels = np.repeat(np.arange(1, len(spec.classes) + 1), counts)
    rng.shuffle(labels)

    width = len(str(max(n, 1)))
    records: list[SpellRecord] = []
    pairs: list[TransitionPair] = []
    causes = np.array([1, 2, 3, 4])
    for i in range(n):
        cls = spec.classes[labels[i] - 1]
        ind_id = f"synth-{i + 1:0{width}d}"

        def draw(var, lo=0.0, hi=None):
            value = rng.normal(cls.means[var], cls.sds[var])
            value = max(value, lo)
            if hi is not None:
                value = min(value, hi)
            return float(value)

        nchom = max(2, round(rng.normal(cls.means["NCHOM"], cls.sds["NCHOM"])))
        model = cls.transitions
        registration = int(rng.choice(causes, p=model.first_registration))
        exit_type = None
        for _ in range(nchom - 1):
            exit_type = int(rng.choice(causes, p=model.returning_exit))
            pairs.append(TransitionPair(
                from_modality=registration, to_modality=exit_type,
                direction=REGISTRATION_TO_EXIT, individual_id=ind_id))
            next_registration = int(rng.choice(
                causes, p=model.reregistration[exit_type - 1]))
            pairs.append(TransitionPair(
                from_modality=exit_type, to_modality=next_registration,
                direction=EXIT_TO_REGISTRATION, individual_id=ind_id))
            registration = next_registration
        exit_type = int(rng.choice(causes, p=model.final_exit[registration - 1]))
        pairs.append(TransitionPair(
            from_modality=registration, to_modality=exit_type,
            direction=REGISTRATION_TO_EXIT, individual_id=ind_id))

        dipl3 = DIPL3_LEVELS[int(rng.choice(3, p=cls.dipl3_probs))]
        srreval = None if registration == 4 else draw("SRREVAL")
        records.append(SpellRecord(
            individual_id=ind_id,
            spell_index=nchom,
            age=draw("AGE"),
            cmdur=draw("CMDUR"),
            cppar=draw("CPPAR", 0.0, 1.0),
            dur=draw("DUR"),
            exper=draw("EXPER"),
            indur=draw("INDUR"),
            mgain=draw("MGAIN"),
            mxmheur=draw("MXMHEUR"),
            nchom=nchom,
            tindmoy=draw("TINDMOY"),
            srreval=srreval,
            dipl3=dipl3,
            rmotifi=registration,
            rmotifa=exit_type,
        ))
    return SyntheticCohort(records=records, labels=labels, pairs=pairs)
