"""Near-field multipath channel synthesis and the DMA pilot measurement model.

A channel realization is a sum of L spherical-wave paths. Each microstrip
observes its N-element slice of the channel through a measurement matrix
W_m = V_m^H Q_m, where Q_m holds per-pilot element weights and V_m the
diagonal waveguide propagation factors. The received pilot vector per strip
is y_m = W_m^H h_m + noise, with the noise entering element-wise before the
combining weights (so its per-pilot variance scales with the weight norm).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry, SourceParams, manifold


@dataclass
class PathSet:
    """L propagation paths: direction cosines, ranges, and complex gains."""

    el_cos: np.ndarray
    az_cos: np.ndarray
    range_m: np.ndarray
    gain: np.ndarray

    def __post_init__(self):
        n = len(self.el_cos)
        if n < 1:
            raise ValueError("a path set needs at least one path")
        if not (len(self.az_cos) == len(self.range_m) == len(self.gain) == n):
            raise ValueError("path parameter arrays must share one length")

    @property
    def num_paths(self) -> int:
        return len(self.gain)

    def source(self, l: int) -> SourceParams:
        return SourceParams(float(self.el_cos[l]), float(self.az_cos[l]),
                            float(self.range_m[l]))


def sample_paths(rng: np.random.Generator, num_paths: int = 3,
                 cos_bounds: tuple[float, float] = (-1.0, 1.0),
                 range_bounds: tuple[float, float] = (5.0, 100.0),
                 allow_nonphysical_cosines: bool = False) -> PathSet:
    """Draw a random path set: uniform cosines and ranges, unit-variance gains.

    Cosine pairs with el^2 + az^2 > 1 are redrawn unless
    ``allow_nonphysical_cosines`` is set (independent sampling).
    """
    if num_paths < 1:
        raise ValueError("need at least one path")
    lo, hi = cos_bounds
    r_lo, r_hi = range_bounds
    if not (lo < hi) or not (0 < r_lo < r_hi):
        raise ValueError("empty sampling range")
    el = np.empty(num_paths)
    az = np.empty(num_paths)
    for l in range(num_paths):
        while True:
            e, a = rng.uniform(lo, hi, size=2)
            if allow_nonphysical_cosines or e * e + a * a <= 1.0:
                el[l], az[l] = e, a
                break
    ranges = rng.uniform(r_lo, r_hi, size=num_paths)
    gains = (rng.standard_normal(num_paths)
             + 1j * rng.standard_normal(num_paths)) / np.sqrt(2)
    return PathSet(el, az, ranges, gains)


def synthesize_channel(paths: PathSet, geom: ArrayGeometry,
                       model: str = "spherical") -> np.ndarray:
    """Stacked channel of length M*N: sqrt(MN/L) times the gain-weighted manifolds."""
    h = np.zeros(geom.size, dtype=complex)
    for l in range(paths.num_paths):
        h += paths.gain[l] * manifold(geom, paths.source(l), model)
    return np.sqrt(geom.size / paths.num_paths) * h


@dataclass(frozen=True)
class DmaHardware:
    """Waveguide parameters: element positions, attenuation, guide wavenumber.

    ``positions`` is (M, N) in meters along each strip; ``attenuation`` (Np/m)
    and ``wavenumber`` (rad/m) are per strip.
    """

    positions: np.ndarray
    attenuation: np.ndarray
    wavenumber: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.positions, axis=1) < 0):
            raise ValueError("element positions must be non-decreasing along a strip")
        if np.any(self.attenuation < 0):
            raise ValueError("attenuation must be nonnegative")

    @classmethod
    def default(cls, geom: ArrayGeometry) -> "DmaHardware":
        """Lossless guide: positions (n-1)*d, zero attenuation, free-space wavenumber."""
        pos = np.tile(np.arange(geom.elems_per_strip) * geom.spacing,
                      (geom.num_strips, 1))
        return cls(pos, np.zeros(geom.num_strips),
                   np.full(geom.num_strips, geom.wavenumber))


def waveguide_diagonal(hw: DmaHardware, strip: int) -> np.ndarray:
    """Diagonal entries of V_m: exp(-rho * (alpha + j*beta)) per element."""
    rho = hw.positions[strip]
    return np.exp(-rho * (hw.attenuation[strip] + 1j * hw.wavenumber[strip]))


def waveguide_matrix(hw: DmaHardware, strip: int) -> np.ndarray:
    """V_m as a dense diagonal N-by-N matrix."""
    return np.diag(waveguide_diagonal(hw, strip))


LORENTZIAN_CENTER = 0.5j
LORENTZIAN_RADIUS = 0.5


@dataclass(frozen=True)
class LorentzianWeight:
    """A DMA element weight, parameterized by its configurable phase."""

    phase: float

    @property
    def weight(self) -> complex:
        return (1j + np.exp(1j * self.phase)) / 2


def lorentzian_weights(phases: np.ndarray) -> np.ndarray:
    """Map configurable phases to weights on the Lorentzian circle."""
    return (1j + np.exp(1j * np.asarray(phases))) / 2


def lorentzian_project(w: complex) -> LorentzianWeight:
    """Nearest point on the Lorentzian circle: phase of (w - j/2).

    The tie at the circle center maps to phase 0.
    """
    return LorentzianWeight(float(np.angle(w - LORENTZIAN_CENTER)))


@dataclass
class MeasurementBundle:
    """Per-strip pilot observations: y (M, P), W (M, N, P), noise variance."""

    geom: ArrayGeometry
    weights: np.ndarray
    pilots: np.ndarray
    noise_var: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m, n, p = self.weights.shape
        if self.pilots.shape != (m, p):
            raise ValueError("pilot array shape must be (strips, pilots)")
        if (m, n) != (self.geom.num_strips, self.geom.elems_per_strip):
            raise ValueError("weight array does not match the array geometry")

    @property
    def num_pilots(self) -> int:
        return self.weights.shape[2]

    @property
    def stacked_pilots(self) -> np.ndarray:
        return self.pilots.reshape(-1)


def measure(h_m: np.ndarray, w_m: np.ndarray, noise_var: float,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """One strip's received pilots y_m = W_m^H h_m + combined element noise.

    Element noise n_p ~ CN(0, noise_var * I) is drawn per pilot and combined
    through the same weights, so entry p has variance noise_var * ||w_p||^2.
    """
    n, p = w_m.shape
    if h_m.shape != (n,):
        raise ValueError("channel slice length must match the weight rows")
    y = w_m.conj().T @ h_m
    if noise_var > 0:
        if rng is None:
            raise ValueError("noisy measurement needs a random generator")
        noise = (rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p)))
        noise *= np.sqrt(noise_var / 2)
        y = y + np.sum(w_m.conj() * noise, axis=0)
    return y


def measure_bundle(h_bar: np.ndarray, weights: np.ndarray, geom: ArrayGeometry,
                   noise_var: float, rng: np.random.Generator | None = None,
                   ) -> MeasurementBundle:
    """Measure every strip of a stacked channel with its own weight matrix."""
    m = geom.num_strips
    h = h_bar.reshape(m, geom.elems_per_strip)
    pilots = np.stack([measure(h[i], weights[i], noise_var, rng)
                       for i in range(m)])
    return MeasurementBundle(geom, weights, pilots, noise_var)
