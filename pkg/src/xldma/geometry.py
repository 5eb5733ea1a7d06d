"""Wavefront models, steering vectors, and manifolds for oblong uniform planar arrays.

The array is an M-by-N grid: M one-dimensional microstrips stacked along the
z axis, each carrying N elements along the y axis. Sources are parameterized
by two direction cosines (elevation along z, azimuth along y) and a range
measured from the reference element at the origin.

Four wavefront models of increasing coarseness are supported:

``spherical``
    exact element-to-source distance (the reference model, valid near to far
    field)
``taylor2``
    second-order Taylor expansion, including the elevation-azimuth cross term
``oblong``
    keeps the quadratic curvature term only on the long (azimuth) axis; the
    short elevation axis and the cross term are treated as planar, which
    factors the manifold into a Kronecker product of the two axes
``planar``
    far-field model, all quadratic terms dropped
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0

WAVEFRONT_MODELS = ("spherical", "taylor2", "oblong", "planar")


@dataclass(frozen=True)
class ArrayGeometry:
    """Physical layout of the M-microstrip, N-elements-per-strip planar array."""

    num_strips: int
    elems_per_strip: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        if self.num_strips < 1 or self.elems_per_strip < 1:
            raise ValueError("array must have at least one strip and one element")
        if not (self.spacing > 0 and self.wavelength > 0):
            raise ValueError("spacing and wavelength must be positive")

    @classmethod
    def from_carrier(cls, num_strips: int, elems_per_strip: int,
                     carrier_hz: float, spacing: float | None = None) -> "ArrayGeometry":
        """Build a geometry from a carrier frequency, defaulting to half-wave spacing."""
        lam = SPEED_OF_LIGHT / carrier_hz
        return cls(num_strips, elems_per_strip,
                   lam / 2 if spacing is None else spacing, lam)

    @property
    def size(self) -> int:
        return self.num_strips * self.elems_per_strip

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength


@dataclass(frozen=True)
class SourceParams:
    """Source location: elevation/azimuth direction cosines and range in meters.

    ``el_cos`` is the cosine along the strip-stacking (z) axis, ``az_cos``
    the cosine along the strip (y) axis. ``range_m`` may be ``inf`` as a
    far-field sentinel; the inverse range is the variable used by the
    off-grid refinement.
    """

    el_cos: float
    az_cos: float
    range_m: float

    def __post_init__(self):
        if abs(self.el_cos) > 1.0 or abs(self.az_cos) > 1.0:
            raise ValueError("direction cosines must lie in [-1, 1]")
        if self.el_cos ** 2 + self.az_cos ** 2 > 1.0 + 1e-12:
            raise ValueError("direction cosines must come from one unit vector")
        if not self.range_m > 0:
            raise ValueError("range must be positive")

    @property
    def inv_range(self) -> float:
        return 0.0 if np.isinf(self.range_m) else 1.0 / self.range_m


def _check_model(model: str) -> str:
    if model not in WAVEFRONT_MODELS:
        raise ValueError(f"unknown wavefront model {model!r}; "
                         f"expected one of {WAVEFRONT_MODELS}")
    return model


def wavefront_deltas(geom: ArrayGeometry, el_cos: float, az_cos: float,
                     range_m: float, model: str) -> np.ndarray:
    """Per-element excess distance r_(m,n) - r under the chosen model, shape (M, N).

    Takes raw direction cosines without requiring them to pair into one unit
    vector, since dictionary grids sample the two axes independently. The
    spherical delta is evaluated in the algebraically equivalent form
    (k^2 - 2*r*s) / (sqrt(r^2 - 2*r*s + k^2) + r) so it stays accurate when
    the quadratic terms are tiny compared to r (large range).
    """
    _check_model(model)
    d = geom.spacing
    y = np.arange(geom.elems_per_strip) * d          # offsets along strip
    z = np.arange(geom.num_strips) * d               # offsets across strips
    phi, theta = az_cos, el_cos
    lin = y[None, :] * phi + z[:, None] * theta      # first-order (planar) part

    if model == "planar":
        return -lin

    if model == "spherical":
        r = range_m
        if np.isinf(r):
            return -lin
        quad = y[None, :] ** 2 + z[:, None] ** 2
        dist = np.sqrt(r * r - 2.0 * r * lin + quad)
        return (quad - 2.0 * r * lin) / (dist + r)

    inv_r = 0.0 if np.isinf(range_m) else 1.0 / range_m
    delta = -lin + 0.5 * y[None, :] ** 2 * (1.0 - phi ** 2) * inv_r
    if model == "taylor2":
        delta = delta + 0.5 * z[:, None] ** 2 * (1.0 - theta ** 2) * inv_r \
            - (y[None, :] * z[:, None]) * phi * theta * inv_r
    return delta


def distance_deltas(geom: ArrayGeometry, src: SourceParams, model: str) -> np.ndarray:
    """Excess distances for a validated source, shape (M, N)."""
    return wavefront_deltas(geom, src.el_cos, src.az_cos, src.range_m, model)


def element_distance(geom: ArrayGeometry, src: SourceParams, model: str,
                     strip: int, elem: int) -> float:
    """Distance from element (strip, elem) to the source, indices counted from 1."""
    if not (1 <= strip <= geom.num_strips):
        raise IndexError(f"strip index {strip} outside 1..{geom.num_strips}")
    if not (1 <= elem <= geom.elems_per_strip):
        raise IndexError(f"element index {elem} outside 1..{geom.elems_per_strip}")
    delta = distance_deltas(geom, src, model)[strip - 1, elem - 1]
    return src.range_m + delta


def element_distances(geom: ArrayGeometry, src: SourceParams, model: str) -> np.ndarray:
    """All element distances as an (M, N) array."""
    return src.range_m + distance_deltas(geom, src, model)


def steering_el(el_cos: float, num_strips: int, spacing: float,
                wavelength: float) -> np.ndarray:
    """Unit-norm far-field steering vector across the M strips (elevation axis)."""
    if abs(el_cos) > 1.0:
        raise ValueError("elevation cosine must lie in [-1, 1]")
    k = 2.0 * np.pi / wavelength
    z = np.arange(num_strips) * spacing
    return np.exp(1j * k * z * el_cos) / np.sqrt(num_strips)


def steering_az_inv(az_cos: float, inv_range: float, num_elems: int,
                    spacing: float, wavelength: float) -> np.ndarray:
    """Unit-norm near-field steering vector along one strip, inverse-range form.

    Entry n carries phase (2*pi/lambda) * (u*az_cos - u^2*(1-az_cos^2)*inv_range/2)
    with u = (n-1)*spacing. ``inv_range = 0`` is the far-field limit.
    """
    if abs(az_cos) > 1.0:
        raise ValueError("azimuth cosine must lie in [-1, 1]")
    if inv_range < 0:
        raise ValueError("inverse range must be nonnegative")
    k = 2.0 * np.pi / wavelength
    u = np.arange(num_elems) * spacing
    phase = k * (u * az_cos - 0.5 * u ** 2 * (1.0 - az_cos ** 2) * inv_range)
    return np.exp(1j * phase) / np.sqrt(num_elems)


def steering_az(az_cos: float, range_m: float, num_elems: int,
                spacing: float, wavelength: float) -> np.ndarray:
    """Unit-norm near-field steering vector along one strip; range form.

    ``range_m = inf`` selects the far-field limit; any other nonpositive
    range is rejected.
    """
    if np.isinf(range_m):
        inv_range = 0.0
    elif range_m > 0:
        inv_range = 1.0 / range_m
    else:
        raise ValueError("range must be positive or +inf")
    return steering_az_inv(az_cos, inv_range, num_elems, spacing, wavelength)


def steering_az_derivatives(az_cos: float, inv_range: float, num_elems: int,
                            spacing: float, wavelength: float
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Analytic partials of the azimuth steering vector w.r.t. cosine and inverse range.

    Differentiating the entry phase psi_n = k*(u*phi - u^2*(1-phi^2)*R/2)
    gives d(psi)/d(phi) = k*(u + u^2*phi*R) and d(psi)/dR = -k*u^2*(1-phi^2)/2,
    so each derivative is j * (that factor) times the steering entry.
    """
    if abs(az_cos) > 1.0:
        raise ValueError("azimuth cosine must lie in [-1, 1]")
    if inv_range < 0:
        raise ValueError("inverse range must be nonnegative")
    k = 2.0 * np.pi / wavelength
    u = np.arange(num_elems) * spacing
    b = steering_az_inv(az_cos, inv_range, num_elems, spacing, wavelength)
    d_az = 1j * k * (u + u ** 2 * az_cos * inv_range) * b
    d_inv_range = -1j * k * 0.5 * u ** 2 * (1.0 - az_cos ** 2) * b
    return d_az, d_inv_range


def manifold_from_cosines(geom: ArrayGeometry, el_cos: float, az_cos: float,
                          range_m: float, model: str) -> np.ndarray:
    """Manifold for raw (possibly independently sampled) direction cosines."""
    deltas = wavefront_deltas(geom, el_cos, az_cos, range_m, model)
    g = np.exp(-1j * geom.wavenumber * deltas) / np.sqrt(geom.size)
    return g.reshape(-1)


def manifold(geom: ArrayGeometry, src: SourceParams, model: str) -> np.ndarray:
    """Unit-norm array manifold of length M*N, strip index outermost.

    Entry (m, n) is exp(-j*k*(r_(m,n) - r)) / sqrt(M*N). Under the ``oblong``
    model this equals the Kronecker product of the elevation and azimuth
    steering vectors.
    """
    return manifold_from_cosines(geom, src.el_cos, src.az_cos, src.range_m, model)


def beamforming_gain(g_ref: np.ndarray, g_test: np.ndarray) -> float:
    """Magnitude of the inner product of two unit-norm manifolds, in [0, 1]."""
    if g_ref.shape != g_test.shape:
        raise ValueError("manifolds must have equal length")
    return float(abs(np.vdot(g_test, g_ref)))
