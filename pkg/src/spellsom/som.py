"""Kohonen self-organizing map on a rectangular grid.

The map is a lattice of code vectors trained so that lattice neighbors
quantize neighboring regions of the data space.  Grid distance is
Chebyshev, making the 8-neighborhood the unit ball, and the neighborhood
kernel is Gaussian.  Batch training (the default) is deterministic and
order-independent: each epoch assigns every record by minimal
neighborhood-averaged distance and moves every code vector to the
matching neighborhood-weighted mean, which makes the epoch an exact
descent step of the extended distortion (and a plain Lloyd step once the
radius reaches 0).  The online variant applies the classical
single-sample best-matching-unit updates in a seeded shuffled order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .ioutil import fmt17

WEIGHT_CUTOFF = 1e-12   # Gaussian tail treated as exactly zero


@dataclass(frozen=True)
class GridTopology:
    """Rectangular lattice with Chebyshev grid distance."""

    rows: int = 10
    cols: int = 10

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def units(self) -> int:
        return self.rows * self.cols

    def coords(self, unit: int) -> tuple[int, int]:
        if not 0 <= unit < self.units:
            raise ValueError(f"unit {unit} out of range")
        return divmod(unit, self.cols)

    def unit_at(self, row: int, col: int) -> int:
        return row * self.cols + col

    def grid_distance(self, u: int, v: int) -> int:
        ru, cu = self.coords(u)
        rv, cv = self.coords(v)
        return max(abs(ru - rv), abs(cu - cv))

    def distance_matrix(self) -> np.ndarray:
        r = np.arange(self.units) // self.cols
        c = np.arange(self.units) % self.cols
        return np.maximum(np.abs(r[:, None] - r[None, :]),
                          np.abs(c[:, None] - c[None, :])).astype(float)

    def neighbors(self, unit: int) -> list[int]:
        """The 8-neighborhood (3 at corners, 5 on edges, 8 inside)."""
        row, col = self.coords(unit)
        out = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                r, c = row + dr, col + dc
                if 0 <= r < self.rows and 0 <= c < self.cols:
                    out.append(self.unit_at(r, c))
        return out


@dataclass(frozen=True)
class TrainingSchedule:
    mode: str = "batch"                 # "batch" or "online"
    epochs: int = 50
    radius_start: float = 5.0
    radius_end: float = 0.0
    learning_rate_start: float = 0.5    # online only
    learning_rate_end: float = 0.01
    decay: str = "linear"               # "linear" or "exponential"
    kernel: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("batch", "online"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.radius_start >= self.radius_end >= 0:
            raise ValueError("need radius_start >= radius_end >= 0")
        for rate in (self.learning_rate_start, self.learning_rate_end):
            if not 0 < rate <= 1:
                raise ValueError("learning rates must lie in (0, 1]")
        if self.decay not in ("linear", "exponential"):
            raise ValueError(f"unknown decay {self.decay!r}")
        if self.decay == "exponential" and (self.radius_end == 0
                                            or self.radius_start == 0):
            raise ValueError("exponential decay needs nonzero radii")
        if self.kernel != "gaussian":
            raise ValueError(f"unknown kernel {self.kernel!r}")

    def _interp(self, start: float, end: float, epoch: int) -> float:
        if self.epochs == 1:
            return start
        t = epoch / (self.epochs - 1)
        if self.decay == "linear":
            return start + (end - start) * t
        return start * (end / start) ** t

    def radius_at(self, epoch: int) -> float:
        return self._interp(self.radius_start, self.radius_end, epoch)

    def rate_at(self, epoch: int) -> float:
        return self._interp(self.learning_rate_start,
                            self.learning_rate_end, epoch)


@dataclass
class SomMap:
    topology: GridTopology
    codebook: np.ndarray                 # (units, dim)
    seed: int = 0
    schedule: TrainingSchedule | None = None
    trace: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.codebook.shape[1]

    @property
    def units(self) -> int:
        return self.codebook.shape[0]


def _as_data(data, dim: int | None = None) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("data must be a 2-D array")
    if data.shape[0] == 0:
        raise ValueError("data is empty")
    if dim is not None and data.shape[1] != dim:
        raise ValueError(f"dimension mismatch: data has {data.shape[1]} "
                         f"columns, map expects {dim}")
    return data


def _sq_dists(x: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, units).  Clamped at zero."""
    d2 = (np.sum(x * x, axis=1)[:, None]
          - 2.0 * x @ codebook.T
          + np.sum(codebook * codebook, axis=1)[None, :])
    return np.maximum(d2, 0.0)


def init_map(topology: GridTopology, dim: int, data,
             strategy: str = "random_sample", seed: int = 0) -> SomMap:
    """Build the initial codebook from the data.

    random_sample draws code vectors from data rows without replacement
    (with replacement when there are more units than rows); pca_plane
    spreads the lattice linearly over the two leading principal
    directions of the data.
    """
    data = _as_data(data, dim)
    rng = np.random.default_rng(seed)
    units = topology.units
    if strategy == "random_sample":
        idx = rng.choice(data.shape[0], size=units,
                         replace=units > data.shape[0])
        codebook = data[idx].copy()
    elif strategy == "pca_plane":
        mean = data.mean(axis=0)
        centered = data - mean
        cov = centered.T @ centered / data.shape[0]
        eigvals, eigvecs = np.linalg.eigh(cov)
        lead = eigvecs[:, -1] * np.sqrt(max(eigvals[-1], 0.0))
        second = np.zeros(dim)
        if dim > 1:
            second = eigvecs[:, -2] * np.sqrt(max(eigvals[-2], 0.0))
        span_c = (np.linspace(-1.0, 1.0, topology.cols)
                  if topology.cols > 1 else np.zeros(1))
        span_r = (np.linspace(-1.0, 1.0, topology.rows)
                  if topology.rows > 1 else np.zeros(1))
        codebook = (mean[None, :]
                    + np.repeat(span_r, topology.cols)[:, None] * second
                    + np.tile(span_c, topology.rows)[:, None] * lead)
    else:
        raise ValueError(f"unknown init strategy {strategy!r}")
    return SomMap(topology=topology, codebook=codebook, seed=seed)


def bmu(som: SomMap, x) -> int:
    """Index of the nearest code vector; ties go to the lowest unit."""
    x = np.asarray(x, dtype=float)
    if x.shape != (som.dim,):
        raise ValueError(f"dimension mismatch: vector has shape {x.shape}, "
                         f"map expects ({som.dim},)")
    return int(np.argmin(_sq_dists(x[None, :], som.codebook)[0]))


def assign(som: SomMap, data) -> tuple[np.ndarray, np.ndarray]:
    """Best-matching unit per record, plus per-unit occupancy counts."""
    data = _as_data(data, som.dim)
    units = np.argmin(_sq_dists(data, som.codebook), axis=1)
    counts = np.bincount(units, minlength=som.units)
    return units, counts


def neighborhood_weight(topology: GridTopology, u: int, v: int,
                        sigma: float) -> float:
    """Gaussian kernel of the grid distance, zeroed below the cutoff."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = topology.grid_distance(u, v)
    w = float(np.exp(-(d * d) / (2.0 * sigma * sigma)))
    return w if w >= WEIGHT_CUTOFF else 0.0


def _kernel_matrix(grid_dist: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return np.eye(grid_dist.shape[0])
    h = np.exp(-(grid_dist ** 2) / (2.0 * sigma * sigma))
    h[h < WEIGHT_CUTOFF] = 0.0
    return h


def normalized_kernel(h: np.ndarray) -> np.ndarray:
    """Row-normalize the kernel so every unit's neighborhood mass is 1.

    Normalization removes the lattice-edge bias of the raw Gaussian
    (corner units carry less mass) and is what makes the batch epoch an
    exact alternating-minimization step of the extended distortion.
    """
    return h / h.sum(axis=1, keepdims=True)


def smoothed_distances(codebook: np.ndarray, data: np.ndarray,
                       hn: np.ndarray) -> np.ndarray:
    """Neighborhood-averaged squared distances sum_k hn(j,k) ||x - w_k||^2
    for a row-normalized kernel.

    Expanded form: the kernel is applied to the code vectors once, so the
    cost is one (n, dim) x (dim, units) product instead of an (n, units)
    x (units, units) one.
    """
    hw = hn @ codebook
    hw2 = hn @ np.sum(codebook * codebook, axis=1)
    x2 = np.sum(data * data, axis=1)
    return np.maximum(x2[:, None] - 2.0 * data @ hw.T + hw2[None, :], 0.0)


def _batch_epoch(codebook: np.ndarray, data: np.ndarray,
                 h: np.ndarray) -> np.ndarray:
    # Assignment minimizes the neighborhood-averaged distance and the
    # update rebuilds each code vector as the matching weighted mean:
    # together one exact alternating-minimization step of the extended
    # distortion, which therefore never increases at fixed radius.  At
    # radius 0 both halves reduce to one Lloyd k-means step.
    units = codebook.shape[0]
    hn = normalized_kernel(h)
    bmus = np.argmin(smoothed_distances(codebook, data, hn), axis=1)
    sums = np.zeros_like(codebook)
    np.add.at(sums, bmus, data)
    counts = np.bincount(bmus, minlength=units).astype(float)
    numer = hn.T @ sums
    denom = hn.T @ counts
    new = codebook.copy()
    occupied = denom > 0
    new[occupied] = numer[occupied] / denom[occupied, None]
    return new


def extended_distortion(som: SomMap, data, sigma: float) -> float:
    """The energy the batch epochs descend: for each record the minimal
    neighborhood-averaged squared distance, summed over records."""
    data = _as_data(data, som.dim)
    h = _kernel_matrix(som.topology.distance_matrix(), sigma)
    sm = smoothed_distances(som.codebook, data, normalized_kernel(h))
    return float(np.sum(np.min(sm, axis=1)))


def _online_epoch(codebook: np.ndarray, data: np.ndarray, h: np.ndarray,
                  rate: float, rng: np.random.Generator) -> np.ndarray:
    codebook = codebook.copy()
    for i in rng.permutation(data.shape[0]):
        x = data[i]
        c = int(np.argmin(_sq_dists(x[None, :], codebook)[0]))
        codebook += rate * h[c][:, None] * (x[None, :] - codebook)
    return codebook


def train(som: SomMap, data, schedule: TrainingSchedule | None = None,
          on_epoch=None) -> SomMap:
    """Run the full training schedule and return the trained map.

    The per-epoch quantization error is recorded in the trace.
    ``on_epoch(epoch, codebook_copy, qe)``, when given, observes each
    epoch; it exists for diagnostics and must not mutate the codebook.
    """
    schedule = schedule or TrainingSchedule()
    data = _as_data(data, som.dim)
    grid_dist = som.topology.distance_matrix()
    rng = np.random.default_rng(schedule.seed)
    codebook = som.codebook.copy()
    trace: list[float] = []
    for epoch in range(schedule.epochs):
        h = _kernel_matrix(grid_dist, schedule.radius_at(epoch))
        if schedule.mode == "batch":
            codebook = _batch_epoch(codebook, data, h)
        else:
            codebook = _online_epoch(codebook, data, h,
                                     schedule.rate_at(epoch), rng)
        qe = _quantization_error(codebook, data)
        trace.append(qe)
        if on_epoch is not None:
            on_epoch(epoch, codebook.copy(), qe)
    return replace(som, codebook=codebook, schedule=schedule, trace=trace)


def _quantization_error(codebook: np.ndarray, data: np.ndarray) -> float:
    # expansion form ranks the units; the distance itself is recomputed
    # directly so an exact codebook hit scores exactly zero
    bmus = np.argmin(_sq_dists(data, codebook), axis=1)
    return float(np.mean(np.linalg.norm(data - codebook[bmus], axis=1)))


def quantization_error(som: SomMap, data) -> float:
    """Mean Euclidean distance of records to their best-matching unit."""
    data = _as_data(data, som.dim)
    return _quantization_error(som.codebook, data)


def topographic_error(som: SomMap, data) -> float:
    """Fraction of records whose two nearest units are not lattice
    neighbors under the 8-neighborhood."""
    if som.units < 2:
        raise ValueError("topographic error needs at least 2 units")
    data = _as_data(data, som.dim)
    d2 = _sq_dists(data, som.codebook)
    first = np.argmin(d2, axis=1)
    d2[np.arange(data.shape[0]), first] = np.inf
    second = np.argmin(d2, axis=1)
    r = np.arange(som.units) // som.topology.cols
    c = np.arange(som.units) % som.topology.cols
    cheb = np.maximum(np.abs(r[first] - r[second]),
                      np.abs(c[first] - c[second]))
    return float(np.mean(cheb > 1))


# ---------------------------------------------------------------------------
# Serialization: versioned plain text, bitwise round trip.

MAP_FORMAT_VERSION = 1


def dump_map(som: SomMap) -> str:
    out = io.StringIO()
    out.write(f"spellsom-map v{MAP_FORMAT_VERSION}\n")
    out.write(f"rows {som.topology.rows}\n")
    out.write(f"cols {som.topology.cols}\n")
    out.write(f"dim {som.dim}\n")
    out.write(f"seed {som.seed}\n")
    s = som.schedule
    if s is None:
        out.write("schedule none\n")
    else:
        out.write("schedule "
                  f"{s.mode} {s.epochs} {fmt17(s.radius_start)} "
                  f"{fmt17(s.radius_end)} {fmt17(s.learning_rate_start)} "
                  f"{fmt17(s.learning_rate_end)} {s.decay} {s.kernel} "
                  f"{s.seed}\n")
    out.write(f"trace {' '.join(fmt17(v) for v in som.trace)}\n")
    for row in som.codebook:
        out.write(" ".join(fmt17(v) for v in row))
        out.write("\n")
    return out.getvalue()


def save_map(som: SomMap, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_map(som))


def parse_map(text: str) -> SomMap:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("spellsom-map v"):
        raise ValueError("not a map file")
    version = int(lines[0].split("v", 1)[1])
    if version != MAP_FORMAT_VERSION:
        raise ValueError(f"unsupported map format version {version}")
    fields = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        key, _, rest = line.partition(" ")
        if key in ("rows", "cols", "dim", "seed", "schedule", "trace"):
            fields[key] = rest
            if key == "trace":
                body_start = i + 1
                break
        else:
            raise ValueError(f"unexpected header line {line!r}")
    topology = GridTopology(rows=int(fields["rows"]), cols=int(fields["cols"]))
    dim = int(fields["dim"])
    schedule = None
    if fields["schedule"] != "none":
        parts = fields["schedule"].split()
        schedule = TrainingSchedule(
            mode=parts[0], epochs=int(parts[1]),
            radius_start=float(parts[2]), radius_end=float(parts[3]),
            learning_rate_start=float(parts[4]),
            learning_rate_end=float(parts[5]),
            decay=parts[6], kernel=parts[7], seed=int(parts[8]))
    trace = [float(v) for v in fields["trace"].split()]
    rows = lines[body_start:body_start + topology.units]
    if len(rows) != topology.units:
        raise ValueError("truncated map file")
    codebook = np.array([[float(v) for v in line.split()] for line in rows])
    if codebook.shape != (topology.units, dim):
        raise ValueError("codebook shape does not match the header")
    return SomMap(topology=topology, codebook=codebook,
                  seed=int(fields["seed"]), schedule=schedule, trace=trace)


def load_map(path) -> SomMap:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read())
