"""Multiple correspondence analysis of the qualitative variables.

Correspondence analysis of the one-hot indicator matrix: the standardized
residuals of the correspondence matrix are decomposed by singular values,
eigenvalues are the squared singular values (the trivial constant
dimension is removed by the residual centering), and principal
coordinates are the standard coordinates scaled by the singular values.
With Q variables and J modalities the nontrivial eigenvalues sum to
(J - Q) / Q.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class IndicatorMatrix:
    matrix: np.ndarray                    # (n, J) of 0/1
    columns: list[tuple[str, str]]        # (variable, modality) per column
    variables: list[str]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modalities(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_variables(self) -> int:
        return len(self.variables)


def indicator(values, variables, modalities) -> IndicatorMatrix:
    """One-hot encode the qualitative table.

    ``values`` maps each variable to its per-record labels, ``modalities``
    to its ordered modality list.  Column order is variable order, then
    modality order.
    """
    variables = list(variables)
    if not variables:
        raise ValueError("no variables selected")
    n = len(values[variables[0]])
    columns: list[tuple[str, str]] = []
    blocks = []
    for var in variables:
        labels = values[var]
        if len(labels) != n:
            raise ValueError(f"variable {var} has {len(labels)} values, "
                             f"expected {n}")
        mods = list(modalities[var])
        index = {m: j for j, m in enumerate(mods)}
        block = np.zeros((n, len(mods)))
        for i, label in enumerate(labels):
            j = index.get(label)
            if j is None:
                raise ValueError(f"unknown modality {label!r} for {var} "
                                 f"(record {i})")
            block[i, j] = 1.0
        blocks.append(block)
        columns.extend((var, m) for m in mods)
    return IndicatorMatrix(matrix=np.hstack(blocks), columns=columns,
                           variables=variables)


@dataclass
class McaResult:
    eigenvalues: np.ndarray               # all J - Q nontrivial, descending
    inertia_shares: np.ndarray            # eigenvalues / total inertia
    modality_coords: np.ndarray           # (J, axes) principal coordinates
    modality_masses: np.ndarray           # (J,) column masses, sum to 1
    individual_coords: np.ndarray         # (n, axes) principal coordinates
    columns: list[tuple[str, str]]
    n_variables: int
    axes: int
    dropped: list[tuple[str, str]]        # empty modalities removed

    @property
    def n_modalities(self) -> int:
        return len(self.columns)

    def modality_contributions(self) -> np.ndarray:
        """Share of each axis' inertia carried by each modality, (J, axes)."""
        lam = self.eigenvalues[:self.axes]
        ctr = (self.modality_masses[:, None] * self.modality_coords ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            ctr = np.where(lam[None, :] > 0, ctr / lam[None, :], 0.0)
        return ctr


def fit_mca(ind: IndicatorMatrix, axes: int = 2) -> McaResult:
    """Correspondence analysis of the indicator matrix.

    Empty modality columns are dropped with a warning before the
    decomposition.  ``axes`` may not exceed the J - Q nontrivial
    dimensions.
    """
    z = np.asarray(ind.matrix, dtype=float)
    if z.shape[0] < 2:
        raise ValueError("need at least 2 records")
    columns = list(ind.columns)
    col_sums = z.sum(axis=0)
    dropped = []
    if (col_sums == 0).any():
        keep = col_sums > 0
        dropped = [columns[j] for j in np.flatnonzero(~keep)]
        warnings.warn("dropping empty modalities: "
                      + ", ".join(f"{v}:{m}" for v, m in dropped))
        z = z[:, keep]
        columns = [c for c, k in zip(columns, keep) if k]
        col_sums = col_sums[keep]

    n, j_mod = z.shape
    q = ind.n_variables
    max_axes = j_mod - q
    if not 1 <= axes <= max_axes:
        raise ValueError(f"axes={axes} out of range: maximum J-Q = {max_axes}")

    grand = n * q
    p = z / grand
    row_mass = p.sum(axis=1)               # = 1/n each
    col_mass = p.sum(axis=0)
    residual = p - np.outer(row_mass, col_mass)
    s = residual / np.sqrt(np.outer(row_mass, col_mass))
    u, sigma, vt = np.linalg.svd(s, full_matrices=False)
    if len(sigma) < max_axes:
        # fewer records than nontrivial dimensions: pad the null axes
        pad = max_axes - len(sigma)
        sigma = np.concatenate([sigma, np.zeros(pad)])
        u = np.hstack([u, np.zeros((u.shape[0], pad))])
        vt = np.vstack([vt, np.zeros((pad, vt.shape[1]))])

    eigenvalues = (sigma ** 2)[:max_axes]
    total_inertia = eigenvalues.sum()
    shares = (eigenvalues / total_inertia if total_inertia > 0
              else np.zeros_like(eigenvalues))

    # Principal coordinates on the retained axes.
    col_coords = (vt[:axes].T / np.sqrt(col_mass)[:, None]) * sigma[:axes]
    row_coords = (u[:, :axes] / np.sqrt(row_mass)[:, None]) * sigma[:axes]

    # Orient each axis so the lexicographically first modality with a
    # nonnegligible coordinate points positive.
    order = sorted(range(len(columns)), key=lambda jj: columns[jj])
    for a in range(axes):
        for jj in order:
            c = col_coords[jj, a]
            if abs(c) > 1e-10:
                if c < 0:
                    col_coords[:, a] = -col_coords[:, a]
                    row_coords[:, a] = -row_coords[:, a]
                break

    return McaResult(
        eigenvalues=eigenvalues,
        inertia_shares=shares,
        modality_coords=col_coords,
        modality_masses=col_mass,
        individual_coords=row_coords,
        columns=columns,
        n_variables=q,
        axes=axes,
        dropped=dropped,
    )


def modality_coordinates(result: McaResult,
                         axis_pair: tuple[int, int] = (1, 2)) -> list[tuple]:
    """Labeled modality points for one plane; axes are 1-based."""
    a, b = axis_pair
    for axis in (a, b):
        if not 1 <= axis <= result.axes:
            raise ValueError(f"axis {axis} outside the {result.axes} "
                             "retained dimensions")
    return [(var, mod,
             float(result.modality_coords[j, a - 1]),
             float(result.modality_coords[j, b - 1]))
            for j, (var, mod) in enumerate(result.columns)]
