"""Sampling the compound Poisson integrator on lattice cells and the
moving-average field on a finite window.

Each unit lattice cell c + [0,1)^d carries an i.i.d. compound Poisson
variable W_c (Poisson number of jumps times i.i.d. jump sizes); the field
observed on the window is the finite moving average

    Y_j = sum_k f_k W_{j - offset_k},  j in W.

Cells are materialised once per replication over the Minkowski-extended
window and consumed in row-major order, which makes every draw a pure
function of (master_seed, replication), independent of any parallelism in
the caller.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResourceLimitError
from .model import JumpLaw, SimpleKernel

__all__ = ["SeedSpec", "GridSample", "sample_cp_cell", "sample_field",
           "write_sample_csv", "read_sample_csv"]

_MAX_CELLS = 50_000_000


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic stream derivation from a single master seed.

    Identical SeedSpec and replication index give bit-identical samples on
    every platform (PCG64 behind numpy's Generator).
    """

    master_seed: int

    def replication_rng(self, rep: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(rep,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GridSample:
    """Observations Y_j = X(mesh * j) over a box window of Z^d."""

    values: np.ndarray
    mesh: float = 1.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size < 1:
            raise InvalidInputError("window must contain at least one point")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("sample contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def window(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def n(self) -> int:
        return int(self.values.size)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def _cp_sums(law: JumpLaw, volumes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vector of independent compound Poisson sums, one per volume entry."""
    counts = rng.poisson(volumes * law.mass)
    total = int(counts.sum())
    out = np.zeros(len(volumes))
    if total == 0:
        return out
    jumps = law.sample(rng, total)
    edges = np.concatenate([[0], np.cumsum(counts)])
    nonzero = counts > 0
    sums = np.add.reduceat(jumps, edges[:-1][nonzero])
    out[nonzero] = sums
    return out


def sample_cp_cell(law: JumpLaw, volume: float, rng: np.random.Generator) -> float:
    """One draw of Lambda(cell): Poisson(volume * mass) many i.i.d. jumps."""
    if volume <= 0:
        raise InvalidInputError("cell volume must be positive")
    return float(_cp_sums(law, np.array([volume]), rng)[0])


def sample_field(kernel: SimpleKernel, law: JumpLaw, window: tuple[int, ...],
                 seeds: SeedSpec, rep: int = 0, mesh: float = 1.0) -> GridSample:
    """Simulate Y_j = sum_k f_k W_{j - offset_k} on the given box window.

    All lattice cells touching window (-) offsets are drawn i.i.d. in
    row-major order, then combined by shifted slices, so the dependence
    structure of the field is exact and m-dependence holds with
    m = kernel.m_range by construction.
    """
    window = tuple(int(w) for w in window)
    if len(window) != kernel.d:
        raise InvalidInputError(
            f"window dimension {len(window)} does not match kernel d={kernel.d}"
        )
    if any(w < 1 for w in window):
        raise InvalidInputError("window must be nonempty in every dimension")
    if not np.allclose(kernel.volumes, 1.0):
        raise InvalidInputError(
            "lattice-cell simulation requires unit cell volumes"
        )
    stride = int(round(mesh))
    if abs(mesh - stride) > 1e-12 or stride < 1:
        raise InvalidInputError(
            "lattice-cell simulation supports positive integer mesh only"
        )
    if stride > 1:
        # observe every stride-th point of the dilated lattice window
        dilated = tuple((w - 1) * stride + 1 for w in window)
        full = sample_field(kernel, law, dilated, seeds, rep=rep, mesh=1.0)
        sub = full.values[tuple(slice(None, None, stride) for _ in window)]
        return GridSample(sub.copy(), mesh=mesh)
    off = kernel.offsets
    lo = off.min(axis=0)
    hi = off.max(axis=0)
    ext_shape = tuple(int(w + (h - l)) for w, l, h in zip(window, lo, hi))
    n_cells = int(np.prod(ext_shape))
    if n_cells > _MAX_CELLS:
        raise ResourceLimitError(
            f"window requires {n_cells} cells, exceeding the budget of {_MAX_CELLS}"
        )
    rng = seeds.replication_rng(rep)
    cells = _cp_sums(law, np.ones(n_cells), rng).reshape(ext_shape)
    out = np.zeros(window)
    for fk, ck in zip(kernel.coeffs, off):
        # Y_j uses cell j - ck; cell x sits at slot x + hi in the extended array
        start = hi - ck
        sl = tuple(slice(int(s), int(s + w)) for s, w in zip(start, window))
        out += fk * cells[sl]
    return GridSample(out, mesh=mesh)


def write_sample_csv(sample: GridSample, path) -> None:
    """CSV with header j1,...,jd,value; one row per lattice point, row-major."""
    d = sample.d
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"j{i + 1}" for i in range(d)] + ["value"])
        for idx, val in zip(np.ndindex(*sample.window), sample.flat()):
            writer.writerow([*idx, repr(float(val))])


def read_sample_csv(path) -> GridSample:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            d = len(header) - 1
            if d < 1 or header[-1] != "value":
                raise ValueError(f"unexpected header {header}")
            coords = []
            vals = []
            for row in reader:
                coords.append(tuple(int(c) for c in row[:d]))
                vals.append(float(row[d]))
    except (ValueError, IndexError, StopIteration) as exc:
        raise InvalidInputError(f"malformed sample CSV {path}: {exc}") from exc
    if not coords:
        raise InvalidInputError(f"sample CSV {path} contains no observations")
    shape = tuple(max(c[i] for c in coords) + 1 for i in range(d))
    if len(coords) != int(np.prod(shape)) or len(set(coords)) != len(coords):
        raise InvalidInputError(
            f"sample CSV {path} does not enumerate a full {shape} window"
        )
    arr = np.zeros(shape)
    for c, v in zip(coords, vals):
        arr[c] = v
    return GridSample(arr)
