"""Pipeline orchestration: config file, staged artifacts, run manifest.

Subcommands mirror the analysis steps: data (synth/ingest), coding,
map training, macro-clustering, transition tables, class profiling,
correspondence analysis and figure emission.  Every stage writes plain
delimited-text artifacts into the output directory and records them in
the manifest; a fixed global seed makes two identical runs byte-identical
(stage wall times go to a separate, unhashed timings file).

Exit codes: 0 success, 1 config error, 2 missing upstream stage,
3 computation error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    DEFAULT_COLUMNS, FEATURE_VARIABLES, QUALITATIVE_VARIABLES,
    build_feature_matrix, CodedDataset, default_coding_spec,
    default_synthetic_spec, generate_synthetic, ingest, latest_spells,
    records_to_rows,
)
from .errors import ConfigError, MissingStageError, SpellsomError
from .ioutil import derive_seed, fmt, fmt17, sha256_file, sha256_text, write_delimited
from .macrocluster import contiguity_report, ward
from .mca import fit_mca, indicator, modality_coordinates
from .profiles import (
    class_profiles, codevector_profile, neighbor_distances,
    qualitative_distribution,
)
from .som import (
    GridTopology, TrainingSchedule, assign, init_map, load_map,
    quantization_error, save_map, topographic_error, train,
)
from .transitions import (
    EXIT_TO_REGISTRATION, REGISTRATION_TO_EXIT, TransitionPair, build_table,
    derive_pairs, rss_by_individual, significant_cells, table_rows,
)

STAGES = ("synth", "ingest", "code", "train", "cluster", "transitions",
          "profile", "mca", "plot")

MANIFEST = "manifest.txt"
TIMINGS = "timings.txt"


@dataclass
class PipelineConfig:
    source: str = "synthetic"            # "synthetic" or "csv"
    n_records: int = 19246
    path: str | None = None
    schema_file: str | None = None
    delimiter: str = ","
    latest_spell_only: bool = True
    rows: int = 10
    cols: int = 10
    mode: str = "batch"
    epochs: int = 50
    radius_start: float = 5.0
    radius_end: float = 0.0
    learning_rate_start: float = 0.5
    learning_rate_end: float = 0.01
    decay: str = "linear"
    init: str = "random_sample"
    k: int = 5
    weighted: bool = False
    threshold_registration_exit: float = 8.0
    threshold_exit_registration: float = 4.5
    mca_variables: tuple[str, ...] = QUALITATIVE_VARIABLES
    mca_axes: int = 3
    mca_planes: tuple[tuple[int, int], ...] = ((1, 2), (1, 3))
    output_dir: str = "out"
    seed: int = 0

    def validate(self) -> None:
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"data.source: unknown source {self.source!r}")
        if self.source == "csv" and not self.path:
            raise ConfigError("data.path: required for a csv source")
        if self.source == "synthetic" and self.path:
            raise ConfigError("data.path: exactly one of a csv path and a "
                              "synthetic spec may be set")
        if self.source == "synthetic" and self.n_records < 1:
            raise ConfigError("data.n_records: must be positive")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("som.rows/som.cols: must be positive")
        if self.k < 1 or self.k > self.rows * self.cols:
            raise ConfigError("cluster.k: out of range")
        known = set(QUALITATIVE_VARIABLES) | {"BROAD"}
        for var in self.mca_variables:
            if var not in known:
                raise ConfigError(f"mca.variables: unknown variable {var!r}")
        if self.mca_axes < 2:
            raise ConfigError("mca.axes: need at least 2 for the planes")
        for a, b in self.mca_planes:
            if not (1 <= a <= self.mca_axes and 1 <= b <= self.mca_axes):
                raise ConfigError("mca.planes: plane axis outside mca.axes")
        try:
            TrainingSchedule(mode=self.mode, epochs=self.epochs,
                             radius_start=self.radius_start,
                             radius_end=self.radius_end,
                             learning_rate_start=self.learning_rate_start,
                             learning_rate_end=self.learning_rate_end,
                             decay=self.decay)
        except ValueError as exc:
            raise ConfigError(f"som: {exc}") from None
        if self.init not in ("random_sample", "pca_plane"):
            raise ConfigError(f"som.init: unknown strategy {self.init!r}")

    def semantic_hash(self) -> str:
        """Hash of every field that affects artifact content (not paths)."""
        items = []
        for key in sorted(vars(self)):
            if key == "output_dir":
                continue
            items.append(f"{key}={getattr(self, key)!r}")
        return sha256_text("\n".join(items))


def _get(parser, section, option, conv, default):
    if not parser.has_option(section, option):
        return default
    raw = parser.get(section, option)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{option}: {exc}") from None


def _bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_config(path) -> PipelineConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = PipelineConfig()

    def g(sec, opt, conv, default):
        return _get(parser, sec, opt, conv, default)

    cfg.source = g("data", "source", str, cfg.source).strip()
    cfg.n_records = g("data", "n_records", int, cfg.n_records)
    cfg.path = g("data", "path", str, cfg.path)
    cfg.schema_file = g("data", "schema_file", str, cfg.schema_file)
    cfg.delimiter = g("data", "delimiter", str, cfg.delimiter)
    cfg.latest_spell_only = g("data", "latest_spell_only", _bool,
                              cfg.latest_spell_only)
    cfg.rows = g("som", "rows", int, cfg.rows)
    cfg.cols = g("som", "cols", int, cfg.cols)
    cfg.mode = g("som", "mode", str, cfg.mode).strip()
    cfg.epochs = g("som", "epochs", int, cfg.epochs)
    cfg.radius_start = g("som", "radius_start", float, cfg.radius_start)
    cfg.radius_end = g("som", "radius_end", float, cfg.radius_end)
    cfg.learning_rate_start = g("som", "learning_rate_start", float,
                                cfg.learning_rate_start)
    cfg.learning_rate_end = g("som", "learning_rate_end", float,
                              cfg.learning_rate_end)
    cfg.decay = g("som", "decay", str, cfg.decay).strip()
    cfg.init = g("som", "init", str, cfg.init).strip()
    cfg.k = g("cluster", "k", int, cfg.k)
    cfg.weighted = g("cluster", "weighted", _bool, cfg.weighted)
    cfg.threshold_registration_exit = g(
        "transitions", "threshold_registration_exit", float,
        cfg.threshold_registration_exit)
    cfg.threshold_exit_registration = g(
        "transitions", "threshold_exit_registration", float,
        cfg.threshold_exit_registration)
    variables = g("mca", "variables", str, None)
    if variables is not None:
        cfg.mca_variables = tuple(v.strip() for v in variables.split(",")
                                  if v.strip())
    cfg.mca_axes = g("mca", "axes", int, cfg.mca_axes)
    planes = g("mca", "planes", str, None)
    if planes is not None:
        parsed = []
        for token in planes.split(","):
            token = token.strip()
            try:
                a, b = token.split("-")
                parsed.append((int(a), int(b)))
            except ValueError:
                raise ConfigError(f"mca.planes: bad plane {token!r}") from None
        cfg.mca_planes = tuple(parsed)
    cfg.output_dir = g("output", "dir", str, cfg.output_dir)
    cfg.seed = g("run", "seed", int, cfg.seed)

    if os.environ.get("SPELLSOM_OUTDIR"):
        cfg.output_dir = os.environ["SPELLSOM_OUTDIR"]
    if os.environ.get("SPELLSOM_SEED"):
        try:
            cfg.seed = int(os.environ["SPELLSOM_SEED"])
        except ValueError:
            raise ConfigError("SPELLSOM_SEED: not an integer") from None
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Manifest

class Manifest:
    """Plain-text run manifest: config hash, seed, versions, stage files."""

    def __init__(self, outdir: Path, cfg: PipelineConfig):
        self.outdir = outdir
        self.header = [
            "spellsom-manifest v1",
            f"config_hash {cfg.semantic_hash()}",
            f"seed {cfg.seed}",
            f"spellsom_version {__version__}",
            f"numpy_version {np.__version__}",
        ]
        self.stage_files: dict[str, list[str]] = {}
        self._load()

    def _load(self) -> None:
        path = self.outdir / MANIFEST
        if not path.exists():
            return
        stage = None
        for line in path.read_text().splitlines():
            if line.startswith("[stage "):
                stage = line[len("[stage "):-1]
                self.stage_files[stage] = []
            elif stage is not None and line.startswith("file "):
                self.stage_files[stage].append(line.split()[1])

    def record(self, stage: str, files: list[Path]) -> None:
        self.stage_files[stage] = [f.name for f in files]
        self.write()

    def write(self) -> None:
        lines = list(self.header)
        for stage in STAGES:
            if stage not in self.stage_files:
                continue
            lines.append("")
            lines.append(f"[stage {stage}]")
            for name in self.stage_files[stage]:
                digest = sha256_file(self.outdir / name)
                lines.append(f"file {name} sha256 {digest}")
        (self.outdir / MANIFEST).write_text("\n".join(lines) + "\n",
                                            encoding="utf-8")


def _record_timing(outdir: Path, stage: str, elapsed: float) -> None:
    path = outdir / TIMINGS
    entries: dict[str, str] = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if " " in line:
                name, value = line.split(" ", 1)
                entries[name] = value
    entries[stage] = f"{elapsed:.3f}s"
    lines = [f"{name} {entries[name]}" for name in STAGES if name in entries]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Stage I/O helpers

def _require(outdir: Path, filename: str, producer: str) -> Path:
    path = outdir / filename
    if not path.exists():
        raise MissingStageError(producer)
    return path


def _read_records(path, delimiter: str):
    with open(path, encoding="utf-8") as fh:
        result = ingest(fh, delimiter=delimiter)
    if result.rejected:
        row, reason = result.rejections[0]
        raise SpellsomError(f"invalid record in {path} (row {row}: {reason})")
    return result.records


def _read_csv_rows(path, delimiter: str):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        return header, list(reader)


def _selected_records(cfg: PipelineConfig, outdir: Path):
    path = _require(outdir, "records.csv", "ingest")
    records = _read_records(path, cfg.delimiter)
    if cfg.latest_spell_only:
        records = latest_spells(records)
    return records


def _read_coded(cfg: PipelineConfig, outdir: Path) -> CodedDataset:
    features_path = _require(outdir, "features.txt", "code")
    meta_path = _require(outdir, "features_meta.txt", "code")
    qual_path = _require(outdir, "qualitative.csv", "code")
    features = np.loadtxt(features_path, delimiter=cfg.delimiter, ndmin=2)
    meta = configparser.ConfigParser()
    meta.read(meta_path)
    means = np.array([float(meta["standardization"][f"mean_{v.lower()}"])
                      for v in FEATURE_VARIABLES])
    sds = np.array([float(meta["standardization"][f"sd_{v.lower()}"])
                    for v in FEATURE_VARIABLES])
    header, rows = _read_csv_rows(qual_path, cfg.delimiter)
    qualitative = {var: [] for var in QUALITATIVE_VARIABLES}
    ids, spells = [], []
    col = {name: i for i, name in enumerate(header)}
    for row in rows:
        ids.append(row[col["ID"]])
        spells.append(int(row[col["SPELL"]]))
        for var in QUALITATIVE_VARIABLES:
            qualitative[var].append(row[col[var]])
    return CodedDataset(
        n_records=features.shape[0], features=features, means=means,
        sds=sds, qualitative=qualitative, coding=default_coding_spec(),
        individual_ids=ids, spell_indices=spells)


def _read_pairs(path, delimiter: str):
    header, rows = _read_csv_rows(path, delimiter)
    col = {name: i for i, name in enumerate(header)}
    return [TransitionPair(individual_id=row[col["ID"]],
                           direction=row[col["DIRECTION"]],
                           from_modality=int(row[col["FROM"]]),
                           to_modality=int(row[col["TO"]]))
            for row in rows]


def _read_record_classes(cfg: PipelineConfig, outdir: Path):
    path = _require(outdir, "record_classes.csv", "cluster")
    header, rows = _read_csv_rows(path, cfg.delimiter)
    col = {name: i for i, name in enumerate(header)}
    ids = [row[col["ID"]] for row in rows]
    units = np.array([int(row[col["UNIT"]]) for row in rows])
    labels = np.array([int(row[col["BROAD_CLASS"]]) for row in rows])
    return ids, units, labels


def _read_rss(cfg: PipelineConfig, outdir: Path):
    path = _require(outdir, "rss.csv", "transitions")
    from .transitions import RssIndicators
    header, rows = _read_csv_rows(path, cfg.delimiter)
    col = {name: i for i, name in enumerate(header)}
    out = {}
    for row in rows:
        ind = RssIndicators(individual_id=row[col["ID"]],
                            rss11=float(row[col["RSS11"]]),
                            rss12=float(row[col["RSS12"]]),
                            n_transitions=int(row[col["N_TRANSITIONS"]]))
        out[ind.individual_id] = ind
    return out


# ---------------------------------------------------------------------------
# Stages

def stage_synth(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    if cfg.source != "synthetic":
        raise ConfigError("data.source: synth stage needs a synthetic source")
    spec = default_synthetic_spec(cfg.n_records,
                                  seed=derive_seed(cfg.seed, "synth"))
    cohort = generate_synthetic(spec)
    cohort_path = outdir / "cohort.csv"
    write_delimited(cohort_path, records_to_rows(cohort.records),
                    cfg.delimiter, header=list(DEFAULT_COLUMNS))
    labels_path = outdir / "planted_labels.csv"
    write_delimited(labels_path,
                    [[r.individual_id, int(lbl)]
                     for r, lbl in zip(cohort.records, cohort.labels)],
                    cfg.delimiter, header=["ID", "CLASS"])
    pairs_path = outdir / "pairs.csv"
    write_delimited(pairs_path,
                    [[p.individual_id, p.direction, p.from_modality,
                      p.to_modality] for p in cohort.pairs],
                    cfg.delimiter, header=["ID", "DIRECTION", "FROM", "TO"])
    return [cohort_path, labels_path, pairs_path]


def stage_ingest(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    if cfg.source == "synthetic":
        source = _require(outdir, "cohort.csv", "synth")
        schema = None
    else:
        source = Path(cfg.path)
        if not source.exists():
            raise ConfigError(f"data.path: no such file {source}")
        schema = _load_schema(cfg.schema_file)
    with open(source, encoding="utf-8") as fh:
        result = ingest(fh, schema=schema, delimiter=cfg.delimiter)
    records_path = outdir / "records.csv"
    write_delimited(records_path, records_to_rows(result.records),
                    cfg.delimiter, header=list(DEFAULT_COLUMNS))
    summary_path = outdir / "ingest_summary.txt"
    lines = [f"accepted {result.accepted}", f"rejected {result.rejected}"]
    lines += [f"row {row} rejected: {reason}"
              for row, reason in result.rejections]
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [records_path, summary_path]


def _load_schema(schema_file):
    if not schema_file:
        return None
    path = Path(schema_file)
    if not path.exists():
        raise ConfigError(f"data.schema_file: no such file {path}")
    schema = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"data.schema_file: bad line {line!r}")
        canonical, header = (t.strip() for t in line.split("=", 1))
        schema[canonical] = header
    return schema


def stage_code(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    records = _selected_records(cfg, outdir)
    coded = build_feature_matrix(records)
    features_path = outdir / "features.txt"
    with open(features_path, "w", encoding="utf-8", newline="\n") as fh:
        for row in coded.features:
            fh.write(cfg.delimiter.join(fmt17(v) for v in row))
            fh.write("\n")
    meta_path = outdir / "features_meta.txt"
    lines = ["[dataset]",
             f"n_records = {coded.n_records}",
             f"columns = {','.join(coded.feature_names)}",
             "",
             "[standardization]"]
    for j, name in enumerate(coded.feature_names):
        lines.append(f"mean_{name.lower()} = {fmt17(coded.means[j])}")
        lines.append(f"sd_{name.lower()} = {fmt17(coded.sds[j])}")
    lines.append("")
    lines.append("[qualitative]")
    lines.append(f"variables = {','.join(QUALITATIVE_VARIABLES)}")
    for var in QUALITATIVE_VARIABLES:
        lines.append(f"modalities_{var.lower()} = "
                     + ",".join(coded.modalities(var)))
    meta_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    qual_path = outdir / "qualitative.csv"
    rows = []
    for i in range(coded.n_records):
        rows.append([coded.individual_ids[i], coded.spell_indices[i]]
                    + [coded.qualitative[v][i] for v in QUALITATIVE_VARIABLES])
    write_delimited(qual_path, rows, cfg.delimiter,
                    header=["ID", "SPELL"] + list(QUALITATIVE_VARIABLES))
    return [features_path, meta_path, qual_path]


def stage_train(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    features_path = _require(outdir, "features.txt", "code")
    coded = _read_coded(cfg, outdir)
    data = coded.features
    topology = GridTopology(rows=cfg.rows, cols=cfg.cols)
    som = init_map(topology, data.shape[1], data, strategy=cfg.init,
                   seed=derive_seed(cfg.seed, "init"))
    schedule = TrainingSchedule(
        mode=cfg.mode, epochs=cfg.epochs, radius_start=cfg.radius_start,
        radius_end=cfg.radius_end,
        learning_rate_start=cfg.learning_rate_start,
        learning_rate_end=cfg.learning_rate_end, decay=cfg.decay,
        seed=derive_seed(cfg.seed, "train"))
    trained = train(som, data, schedule)
    map_path = outdir / "som_map.txt"
    save_map(trained, map_path)
    units, _ = assign(trained, data)
    assign_path = outdir / "assignments.csv"
    write_delimited(assign_path,
                    [[coded.individual_ids[i], int(units[i])]
                     for i in range(len(units))],
                    cfg.delimiter, header=["ID", "UNIT"])
    quality_path = outdir / "som_quality.txt"
    qe = quantization_error(trained, data)
    te = topographic_error(trained, data)
    quality_path.write_text(
        f"quantization_error {fmt17(qe)}\ntopographic_error {fmt17(te)}\n",
        encoding="utf-8")
    return [map_path, assign_path, quality_path]


def stage_cluster(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    map_path = _require(outdir, "som_map.txt", "train")
    assign_path = _require(outdir, "assignments.csv", "train")
    som = load_map(map_path)
    header, rows = _read_csv_rows(assign_path, cfg.delimiter)
    col = {name: i for i, name in enumerate(header)}
    ids = [row[col["ID"]] for row in rows]
    units = np.array([int(row[col["UNIT"]]) for row in rows])
    counts = np.bincount(units, minlength=som.units)
    weights = None
    if cfg.weighted:
        # Ward cannot take zero weights; floor empty units at one record.
        weights = np.maximum(counts.astype(float), 1.0)
    partition, dendrogram = ward(som.codebook, weights=weights, k=cfg.k)

    partition_path = outdir / "partition.csv"
    part_rows = []
    for unit in range(som.units):
        r, c = som.topology.coords(unit)
        part_rows.append([r, c, unit, int(partition.labels[unit])])
    write_delimited(partition_path, part_rows, cfg.delimiter,
                    header=["ROW", "COL", "UNIT", "BROAD_CLASS"])

    dendro_path = outdir / "dendrogram.csv"
    write_delimited(dendro_path, dendrogram.rows(), cfg.delimiter,
                    header=["CLUSTER_A", "CLUSTER_B", "COST", "SIZE"])

    contiguity_path = outdir / "contiguity.txt"
    lines = [f"class {e.broad_class} components {e.components} "
             f"{'contiguous' if e.contiguous else 'split'}"
             for e in contiguity_report(partition, som.topology)]
    contiguity_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    record_labels = partition.labels[units]
    record_path = outdir / "record_classes.csv"
    write_delimited(record_path,
                    [[ids[i], int(units[i]), int(record_labels[i])]
                     for i in range(len(ids))],
                    cfg.delimiter, header=["ID", "UNIT", "BROAD_CLASS"])

    counts_path = outdir / "class_counts.txt"
    lines = []
    for label in range(1, partition.k + 1):
        lines.append(f"class {label} records "
                     f"{int((record_labels == label).sum())}")
    lines.append(f"total {len(ids)}")
    counts_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [partition_path, dendro_path, contiguity_path, record_path,
            counts_path]


def stage_transitions(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    if cfg.source == "synthetic":
        pairs_path = _require(outdir, "pairs.csv", "synth")
        pairs = _read_pairs(pairs_path, cfg.delimiter)
    else:
        records_path = _require(outdir, "records.csv", "ingest")
        pairs = derive_pairs(_read_records(records_path, cfg.delimiter))
    out_files = []
    tables = {}
    for direction, filename in ((REGISTRATION_TO_EXIT, "table_reg_exit.csv"),
                                (EXIT_TO_REGISTRATION, "table_exit_reg.csv")):
        table = build_table([p for p in pairs if p.direction == direction],
                            direction)
        tables[direction] = table
        path = outdir / filename
        write_delimited(path, table_rows(table), cfg.delimiter,
                        header=["FROM", "TO", "COUNT", "TOTAL_SHARE",
                                "ROW_SHARE", "FLAG"])
        out_files.append(path)

    cells_path = outdir / "significant_cells.txt"
    lines = []
    for direction, threshold in (
            (REGISTRATION_TO_EXIT, cfg.threshold_registration_exit),
            (EXIT_TO_REGISTRATION, cfg.threshold_exit_registration)):
        cells = significant_cells(tables[direction], threshold)
        lines.append(f"{direction} threshold {fmt(threshold)}: "
                     + " ".join(f"({i},{j})" for i, j in cells))
    cells_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out_files.append(cells_path)

    rss = rss_by_individual(pairs)
    rss_path = outdir / "rss.csv"
    write_delimited(rss_path,
                    [[ind, rss[ind].rss11, rss[ind].rss12,
                      rss[ind].n_transitions] for ind in sorted(rss)],
                    cfg.delimiter,
                    header=["ID", "RSS11", "RSS12", "N_TRANSITIONS"])
    out_files.append(rss_path)
    return out_files


def stage_profile(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    records = _selected_records(cfg, outdir)
    coded = _read_coded(cfg, outdir)
    ids, units, labels = _read_record_classes(cfg, outdir)
    if ids != [r.individual_id for r in records]:
        raise SpellsomError("record_classes.csv does not match records.csv; "
                            "re-run the cluster stage")
    rss = _read_rss(cfg, outdir)
    map_path = _require(outdir, "som_map.txt", "train")
    som = load_map(map_path)

    profile = class_profiles(records, labels, rss=rss)
    profile_path = outdir / "class_profiles.csv"
    write_delimited(profile_path, profile.rows(), cfg.delimiter,
                    header=["SCOPE", "VARIABLE", "MEAN", "SD", "COUNT"])

    class_rows, cell_rows = [], []
    all_units = list(range(som.units))
    for var in QUALITATIVE_VARIABLES:
        for dist in qualitative_distribution(coded, var, labels,
                                             scope="broad_class"):
            scope = "population" if dist.group is None else str(dist.group)
            for modality, freq in dist.frequencies.items():
                class_rows.append([scope, var, modality, freq, dist.count,
                                   "empty" if dist.empty else ""])
        for dist in qualitative_distribution(coded, var, units,
                                             scope="grid_cell",
                                             groups=all_units):
            scope = "population" if dist.group is None else str(dist.group)
            for modality, freq in dist.frequencies.items():
                cell_rows.append([scope, var, modality, freq, dist.count,
                                  "empty" if dist.empty else ""])
    class_dist_path = outdir / "qual_dist_class.csv"
    write_delimited(class_dist_path, class_rows, cfg.delimiter,
                    header=["SCOPE", "VARIABLE", "MODALITY", "FREQUENCY",
                            "COUNT", "FLAG"])
    cell_dist_path = outdir / "qual_dist_cell.csv"
    write_delimited(cell_dist_path, cell_rows, cfg.delimiter,
                    header=["SCOPE", "VARIABLE", "MODALITY", "FREQUENCY",
                            "COUNT", "FLAG"])

    field = neighbor_distances(som)
    nd_path = outdir / "neighbor_distances.csv"
    write_delimited(nd_path, field.rows() + [["max", "", field.max_distance]],
                    cfg.delimiter, header=["UNIT", "NEIGHBOR", "DISTANCE"])

    cv_path = outdir / "codevector_profiles.csv"
    cv_rows = []
    for unit in range(som.units):
        for name, value in codevector_profile(som, unit):
            cv_rows.append([unit, name, value])
    write_delimited(cv_path, cv_rows, cfg.delimiter,
                    header=["UNIT", "VARIABLE", "VALUE"])
    return [profile_path, class_dist_path, cell_dist_path, nd_path, cv_path]


def _mca_inputs(cfg: PipelineConfig, outdir: Path):
    coded = _read_coded(cfg, outdir)
    values = {var: list(coded.qualitative[var]) for var in QUALITATIVE_VARIABLES}
    modalities = {var: list(coded.modalities(var))
                  for var in QUALITATIVE_VARIABLES}
    if "BROAD" in cfg.mca_variables:
        ids, units, labels = _read_record_classes(cfg, outdir)
        values["BROAD"] = [str(int(v)) for v in labels]
        modalities["BROAD"] = [str(c) for c in range(1, cfg.k + 1)]
    return coded, values, modalities


def stage_mca(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    coded, values, modalities = _mca_inputs(cfg, outdir)
    ind = indicator(values, cfg.mca_variables, modalities)
    result = fit_mca(ind, axes=cfg.mca_axes)

    eig_path = outdir / "mca_eigenvalues.csv"
    write_delimited(eig_path,
                    [[a + 1, float(result.eigenvalues[a]),
                      float(100 * result.inertia_shares[a])]
                     for a in range(len(result.eigenvalues))],
                    cfg.delimiter,
                    header=["AXIS", "EIGENVALUE", "INERTIA_PCT"])

    contribs = result.modality_contributions()
    mod_path = outdir / "mca_modalities.csv"
    rows = []
    for j, (var, mod) in enumerate(result.columns):
        rows.append([var, mod, float(result.modality_masses[j])]
                    + [float(result.modality_coords[j, a])
                       for a in range(result.axes)]
                    + [float(contribs[j, a]) for a in range(result.axes)])
    write_delimited(mod_path, rows, cfg.delimiter,
                    header=["VARIABLE", "MODALITY", "MASS"]
                    + [f"AXIS{a + 1}" for a in range(result.axes)]
                    + [f"CTR{a + 1}" for a in range(result.axes)])

    ind_path = outdir / "mca_individuals.csv"
    write_delimited(ind_path,
                    [[coded.individual_ids[i]]
                     + [float(result.individual_coords[i, a])
                        for a in range(result.axes)]
                     for i in range(coded.n_records)],
                    cfg.delimiter,
                    header=["ID"] + [f"AXIS{a + 1}" for a in range(result.axes)])
    return [eig_path, mod_path, ind_path]


def stage_plot(cfg: PipelineConfig, outdir: Path) -> list[Path]:
    from . import plots
    from .macrocluster import MacroPartition

    som = load_map(_require(outdir, "som_map.txt", "train"))
    header, rows = _read_csv_rows(_require(outdir, "partition.csv", "cluster"),
                                  cfg.delimiter)
    col = {name: i for i, name in enumerate(header)}
    labels = np.zeros(som.units, dtype=int)
    for row in rows:
        labels[int(row[col["UNIT"]])] = int(row[col["BROAD_CLASS"]])
    partition = MacroPartition(labels=labels, k=cfg.k)
    ids, units, record_labels = _read_record_classes(cfg, outdir)
    coded = _read_coded(cfg, outdir)

    files: list[Path] = []
    # One representative profile per broad class: its most occupied unit.
    counts = np.bincount(units, minlength=som.units)
    for label in range(1, cfg.k + 1):
        class_units = partition.units_of(label)
        unit = int(class_units[np.argmax(counts[class_units])])
        profile = codevector_profile(som, unit)
        files += plots.codevector_profile_figure(
            profile, f"Code vector of unit {unit} (broad class {label})",
            outdir / f"fig_profile_class_{label}.svg",
            outdir / f"fig_profile_class_{label}.csv", cfg.delimiter)

    files += plots.grid_classes_figure(
        som, partition, outdir / "fig_grid_classes.svg",
        outdir / "fig_grid_classes.csv", cfg.delimiter)

    field = neighbor_distances(som)
    files += plots.distance_map_figure(
        field, som, partition, outdir / "fig_distance_map.svg",
        outdir / "fig_distance_map.csv", cfg.delimiter)

    for var in QUALITATIVE_VARIABLES:
        dists = qualitative_distribution(coded, var, record_labels,
                                         scope="broad_class")
        files += plots.qualitative_figure(
            dists, var, outdir / f"fig_dist_{var.lower()}.svg",
            outdir / f"fig_dist_{var.lower()}.csv", cfg.delimiter)

    _, values, modalities = _mca_inputs(cfg, outdir)
    _require(outdir, "mca_modalities.csv", "mca")
    ind = indicator(values, cfg.mca_variables, modalities)
    result = fit_mca(ind, axes=cfg.mca_axes)
    for a, b in cfg.mca_planes:
        points = modality_coordinates(result, (a, b))
        files += plots.mca_plane_figure(
            points, (a, b), result.inertia_shares,
            outdir / f"fig_mca_plane_{a}_{b}.svg",
            outdir / f"fig_mca_plane_{a}_{b}.csv", cfg.delimiter)
    return files


STAGE_FUNCS = {
    "synth": stage_synth,
    "ingest": stage_ingest,
    "code": stage_code,
    "train": stage_train,
    "cluster": stage_cluster,
    "transitions": stage_transitions,
    "profile": stage_profile,
    "mca": stage_mca,
    "plot": stage_plot,
}


def run(subcommand: str, cfg: PipelineConfig) -> list[Path]:
    """Run one stage (or `all`) and update the manifest."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if subcommand == "all":
        stages = [s for s in STAGES
                  if not (s == "synth" and cfg.source != "synthetic")]
    elif subcommand in STAGE_FUNCS:
        stages = [subcommand]
    else:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    manifest = Manifest(outdir, cfg)
    written: list[Path] = []
    for stage in stages:
        start = time.perf_counter()
        files = STAGE_FUNCS[stage](cfg, outdir)
        manifest.record(stage, files)
        _record_timing(outdir, stage, time.perf_counter() - start)
        written.extend(files)
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def main(argv=None) -> int:
    parser = _Parser(prog="spellsom",
                     description="Spell-record classification pipeline")
    parser.add_argument("subcommand", choices=list(STAGES) + ["all"])
    parser.add_argument("-c", "--config", required=True,
                        help="INI pipeline configuration")
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        files = run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except MissingStageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (SpellsomError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
