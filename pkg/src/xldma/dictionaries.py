"""Sampled angle-distance dictionaries for sparse channel recovery.

Two dictionaries are used: a per-strip azimuth dictionary B whose columns are
near-field steering vectors on an (azimuth cosine, inverse range) grid, and a
joint dictionary over (elevation cosine, azimuth cosine, inverse range)
triples whose columns factor as Kronecker products. The joint dictionary can
be huge, so it is generated lazily and materialization is guarded by a memory
budget.

Grid conventions: azimuth cosines are uniform on the half-open interval
[-1, 1), which makes the angle-only dictionary a row-orthogonal (DFT-like)
frame at half-wave spacing; elevation cosines are uniform on the closed
interval [-1, 1]; inverse ranges are uniform between 1/r_max and 1/r_min.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, manifold_from_cosines, steering_az_inv, steering_el

DEFAULT_MEMORY_BUDGET = 4 * 1024 ** 3
_COMPLEX_BYTES = 16


class CapacityError(MemoryError):
    """A dense dictionary would exceed the configured memory budget."""

    def __init__(self, required_bytes: int, budget_bytes: int):
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes
        super().__init__(
            f"dense dictionary needs {required_bytes} bytes, "
            f"budget is {budget_bytes} bytes")


def az_cosine_grid(count: int) -> np.ndarray:
    """Uniform azimuth-cosine samples on [-1, 1), DFT-style."""
    return -1.0 + 2.0 * np.arange(count) / count


def build_el_grid(num_strips: int) -> np.ndarray:
    """2M elevation-cosine samples, endpoints included, spacing 2/(2M-1)."""
    return np.linspace(-1.0, 1.0, 2 * num_strips)


@dataclass(frozen=True)
class PolarGrid:
    """Azimuth-cosine by inverse-range grid; column order is angle-major."""

    az_cos: np.ndarray
    inv_range: np.ndarray

    @classmethod
    def default(cls, geom: ArrayGeometry, angle_count: int | None = None,
                range_count: int = 20,
                range_bounds: tuple[float, float] = (5.0, 100.0)) -> "PolarGrid":
        if angle_count is None:
            angle_count = 2 * geom.elems_per_strip
        r_lo, r_hi = range_bounds
        if not 0 < r_lo < r_hi:
            raise ValueError("range bounds must satisfy 0 < r_min < r_max")
        inv = np.linspace(1.0 / r_hi, 1.0 / r_lo, range_count)
        return cls(az_cosine_grid(angle_count), inv)

    @classmethod
    def angle_only(cls, geom: ArrayGeometry,
                   angle_count: int | None = None) -> "PolarGrid":
        """Pure-angle grid: a single far-field (zero inverse range) shell."""
        if angle_count is None:
            angle_count = 2 * geom.elems_per_strip
        return cls(az_cosine_grid(angle_count), np.array([0.0]))

    @property
    def num_angles(self) -> int:
        return len(self.az_cos)

    @property
    def num_ranges(self) -> int:
        return len(self.inv_range)

    @property
    def num_columns(self) -> int:
        return self.num_angles * self.num_ranges

    def column_of(self, angle_idx: int, range_idx: int) -> int:
        return angle_idx * self.num_ranges + range_idx

    def params_of(self, column: int) -> tuple[float, float]:
        """(azimuth cosine, inverse range) of one dictionary column."""
        a, r = divmod(int(column), self.num_ranges)
        return float(self.az_cos[a]), float(self.inv_range[r])

    @property
    def angle_spacing(self) -> float:
        return 2.0 / self.num_angles

    @property
    def inv_range_spacing(self) -> float:
        if self.num_ranges < 2:
            return float(self.inv_range[0]) if self.inv_range[0] > 0 else 1.0
        return float(self.inv_range[1] - self.inv_range[0])


@dataclass(frozen=True)
class AzDictionary:
    """Dense per-strip dictionary: matrix (N, num_columns) plus its grid."""

    matrix: np.ndarray
    grid: PolarGrid
    geom: ArrayGeometry


def build_az_dictionary(geom: ArrayGeometry, grid: PolarGrid) -> AzDictionary:
    """Evaluate the azimuth steering vector at every grid point (angle-major)."""
    n = geom.elems_per_strip
    mat = np.empty((n, grid.num_columns), dtype=complex)
    for a, phi in enumerate(grid.az_cos):
        for r, inv_r in enumerate(grid.inv_range):
            mat[:, grid.column_of(a, r)] = steering_az_inv(
                float(phi), float(inv_r), n, geom.spacing, geom.wavelength)
    return AzDictionary(mat, grid, geom)


def sense_columns(weights: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Per-strip measurement of dictionary columns: W_m^H applied to each.

    Fuses the strip products into one (strips*pilots, elements) by
    (elements, columns) matrix product, which is several times faster than
    looping over strips for large dictionaries.
    """
    strips, elems, pilots = weights.shape
    flat = weights.transpose(0, 2, 1).reshape(strips * pilots, elems).conj()
    return (flat @ matrix).reshape(strips, pilots, -1)


@dataclass(frozen=True)
class JointGrid:
    """Elevation grid crossed with a polar grid; elevation-major columns."""

    el_cos: np.ndarray
    polar: PolarGrid

    @classmethod
    def default(cls, geom: ArrayGeometry, polar: PolarGrid | None = None) -> "JointGrid":
        if polar is None:
            polar = PolarGrid.default(geom)
        return cls(build_el_grid(geom.num_strips), polar)

    @property
    def num_columns(self) -> int:
        return len(self.el_cos) * self.polar.num_columns

    def column_of(self, el_idx: int, angle_idx: int, range_idx: int) -> int:
        return el_idx * self.polar.num_columns + self.polar.column_of(angle_idx, range_idx)

    def params_of(self, column: int) -> tuple[float, float, float]:
        """(elevation cosine, azimuth cosine, inverse range) of one column."""
        e, rest = divmod(int(column), self.polar.num_columns)
        phi, inv_r = self.polar.params_of(rest)
        return float(self.el_cos[e]), phi, inv_r


class JointDictionary:
    """Lazy joint dictionary over (elevation, azimuth, inverse range) triples.

    Columns are Kronecker-factored under the ``oblong`` atom model, which is
    what makes on-demand generation and the structured sensing product cheap.
    The ``spherical`` atom model evaluates exact manifolds column by column.
    """

    def __init__(self, geom: ArrayGeometry, grid: JointGrid,
                 atom_model: str = "oblong",
                 memory_budget: int = DEFAULT_MEMORY_BUDGET):
        if atom_model not in ("oblong", "spherical"):
            raise ValueError("atom model must be 'oblong' or 'spherical'")
        self.geom = geom
        self.grid = grid
        self.atom_model = atom_model
        self.memory_budget = memory_budget

    @property
    def shape(self) -> tuple[int, int]:
        return (self.geom.size, self.grid.num_columns)

    def column(self, k: int) -> np.ndarray:
        el, phi, inv_r = self.grid.params_of(k)
        return self.atom(el, phi, inv_r)

    def atom(self, el_cos: float, az_cos: float, inv_range: float) -> np.ndarray:
        g = self.geom
        if self.atom_model == "oblong":
            a = steering_el(el_cos, g.num_strips, g.spacing, g.wavelength)
            b = steering_az_inv(az_cos, inv_range, g.elems_per_strip,
                                g.spacing, g.wavelength)
            return np.kron(a, b)
        r = np.inf if inv_range == 0 else 1.0 / inv_range
        return manifold_from_cosines(g, el_cos, az_cos, r, "spherical")

    def materialize(self) -> np.ndarray:
        rows, cols = self.shape
        required = rows * cols * _COMPLEX_BYTES
        if required > self.memory_budget:
            raise CapacityError(required, self.memory_budget)
        out = np.empty((rows, cols), dtype=complex)
        for k in range(cols):
            out[:, k] = self.column(k)
        return out

    def sensing_matrix(self, weights: np.ndarray) -> np.ndarray:
        """Stacked measurement of every atom: (M*P, num_columns).

        Row block m is W_m^H applied to the m-th strip slice of each atom.
        Under the oblong model the per-strip slice of an atom is the azimuth
        steering vector scaled by one elevation-steering entry, so the product
        reduces to reweighting W_m^H B across the elevation grid.
        """
        g = self.geom
        m, n, p = weights.shape
        cols = self.grid.num_columns
        required = m * p * cols * _COMPLEX_BYTES
        if required > self.memory_budget:
            raise CapacityError(required, self.memory_budget)
        out = np.empty((m * p, cols), dtype=complex)
        if self.atom_model == "oblong":
            az = build_az_dictionary(g, self.grid.polar).matrix
            sensed = sense_columns(weights, az)
            el_steer = np.stack([
                steering_el(float(e), m, g.spacing, g.wavelength)
                for e in self.grid.el_cos])          # (num_el, M)
            block = self.grid.polar.num_columns
            for e in range(len(self.grid.el_cos)):
                chunk = el_steer[e][:, None, None] * sensed
                out[:, e * block:(e + 1) * block] = chunk.reshape(m * p, block)
        else:
            for k in range(cols):
                atom = self.column(k).reshape(m, n)
                out[:, k] = np.concatenate(
                    [weights[i].conj().T @ atom[i] for i in range(m)])
        return out


def build_joint_dictionary(geom: ArrayGeometry, grid: JointGrid,
                           atom_model: str = "oblong",
                           memory_budget: int = DEFAULT_MEMORY_BUDGET) -> np.ndarray:
    """Dense (M*N, num_columns) joint dictionary; raises CapacityError when too big."""
    return JointDictionary(geom, grid, atom_model, memory_budget).materialize()
