"""Measurement-matrix (beam-pilot) optimization under hardware weight constraints.

The design objective is the total coherence ||I - B^H W W^H B||_F^2 of the
effective measurement matrix W = V^H Q against a dictionary B. Optimization
is one-shot in two stages: first build a target product matrix whose singular
values are all equal (the Lagrange optimum of the unconstrained problem),
then fit the constrained weights to that target, either entrywise by phase
alignment (valid when B B^H is a scaled identity and V is unit-modulus) or by
cyclic element-wise coordinate descent for arbitrary dictionaries.

Two hardware modes share one code path through an affine weight
parameterization q = offset + scale * f with |f| = 1: the DMA mode uses
offset j/2, scale 1/2 (weights on the Lorentzian circle), the phased-array
mode offset 0, scale 1 (unit-modulus weights).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import DmaHardware, waveguide_diagonal
from .dictionaries import AzDictionary
from .geometry import ArrayGeometry

DESIGN_MODES = ("dma_optimized", "phased_optimized", "dma_random",
                "phased_random", "gaussian")

_MODE_PARAMS = {"dma": (0.5j, 0.5), "phased": (0.0, 1.0)}


class PhaseAlignmentUnavailable(ValueError):
    """The dictionary rows are not orthogonal; use coordinate descent instead."""


def total_coherence(w: np.ndarray, b: np.ndarray) -> float:
    """||I - B^H W W^H B||_F^2, the full-size coherence objective."""
    gram = b.conj().T @ (w @ (w.conj().T @ b))
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.sum(np.abs(gram) ** 2))


def total_coherence_reduced(w: np.ndarray, b: np.ndarray) -> float:
    """Algebraically equal form ||I_P - W^H B B^H W||_F^2 + (columns - pilots)."""
    cross = w.conj().T @ b
    gram = cross @ cross.conj().T
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.sum(np.abs(gram) ** 2) + b.shape[1] - w.shape[1])


def total_coherence_normalized(w: np.ndarray, b: np.ndarray) -> float:
    """Total coherence at the best global weight scale: min_c ||I - c*Gram||_F^2.

    Scaling the measurement matrix scales the received pilots and the
    combined noise identically, so estimation quality is invariant to it;
    this form compares Gram shape across hardware whose feasible sets force
    different weight powers (unit-modulus weights carry twice the average
    power of Lorentzian-circle weights).
    """
    cross = w.conj().T @ b
    gram = cross @ cross.conj().T
    trace = float(np.trace(gram).real)
    fro_sq = float(np.sum(np.abs(gram) ** 2))
    if fro_sq == 0:
        return float(b.shape[1])
    return float(b.shape[1] - trace * trace / fro_sq)


def _random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


@dataclass
class TargetGram:
    """Target product matrix with all singular values equal."""

    matrix: np.ndarray          # (pilots, columns)
    power: float
    u_left: np.ndarray          # (pilots, pilots)
    u_right: np.ndarray         # (columns, columns)


def target_gram(num_pilots: int, num_columns: int, power: float,
                rng: np.random.Generator) -> TargetGram:
    """Flat-spectrum target: sqrt(power/P) * U1 [I 0] U2^H.

    All P singular values equal sqrt(power/P), so the Frobenius norm squared
    is exactly ``power`` and ||I - T T^H||_F^2 attains the equal-power
    Lagrange optimum P*(1 - power/P)^2.
    """
    if num_pilots > num_columns:
        raise ValueError("need at least as many dictionary columns as pilots")
    if power <= 0:
        raise ValueError("power budget must be positive")
    u1 = _random_unitary(num_pilots, rng)
    u2 = _random_unitary(num_columns, rng)
    mat = np.sqrt(power / num_pilots) * (u1 @ u2[:, :num_pilots].conj().T)
    return TargetGram(mat, power, u1, u2)


def random_feasible_weights(num_elems: int, num_pilots: int, hardware_mode: str,
                            rng: np.random.Generator) -> np.ndarray:
    """Uniform random phases mapped through the hardware weight set."""
    offset, scale = _MODE_PARAMS[hardware_mode]
    x = rng.uniform(0.0, 2 * np.pi, size=(num_elems, num_pilots))
    return offset + scale * np.exp(1j * x)


def estimate_power_budget(v_diag: np.ndarray, b: np.ndarray, num_pilots: int,
                          hardware_mode: str, rng: np.random.Generator,
                          draws: int = 100) -> float:
    """Mean ||Q^H V B||_F^2 over random feasible weight draws."""
    vb = v_diag[:, None] * b
    total = 0.0
    for _ in range(draws):
        q = random_feasible_weights(len(v_diag), num_pilots, hardware_mode, rng)
        total += float(np.sum(np.abs(q.conj().T @ vb) ** 2))
    return total / draws


def solve_phase_alignment(target: np.ndarray, v_diag: np.ndarray, b: np.ndarray,
                          hardware_mode: str = "dma",
                          row_orthogonality_tol: float = 1e-6,
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise-optimal weights when B B^H is a scaled identity.

    Maps the (pilots, columns) target product back to a weight-space target
    through the dictionary's right inverse and the waveguide diagonal, then
    aligns each unit-modulus factor entry with the phase of its target.
    Returns (F, Q).
    """
    n, cols = b.shape
    gram = b @ b.conj().T
    scale_id = cols / n
    if np.max(np.abs(gram - scale_id * np.eye(n))) > row_orthogonality_tol * scale_id:
        raise PhaseAlignmentUnavailable(
            "dictionary rows are not orthogonal enough for phase alignment")
    offset, scale = _MODE_PARAMS[hardware_mode]
    w_target = (n / cols) * (b @ target.conj().T)       # (elements, pilots)
    q_target = w_target / v_diag.conj()[:, None]
    psi = (q_target - offset) / scale
    f = np.exp(1j * np.angle(psi))
    return f, offset + scale * f


def solve_coordinate_descent(target: np.ndarray, v_diag: np.ndarray,
                             b: np.ndarray, hardware_mode: str = "dma",
                             sweeps: int = 20, tol: float = 1e-8,
                             f_init: np.ndarray | None = None,
                             track_entries: bool = False,
                             ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cyclic element-wise minimization of ||target - Q^H V B||_F^2.

    Each (pilot, element) entry of the unit-modulus factor has the closed
    form nu/|nu| given the others, so every update is exactly optimal for its
    coordinate and the objective never increases. Returns (F, Q, objective
    history); with ``track_entries`` the history holds the quadratic-form
    objective after every single entry update, otherwise one value per sweep.
    """
    if sweeps < 1:
        raise ValueError("need at least one sweep")
    offset, scale = _MODE_PARAMS[hardware_mode]
    n, cols = b.shape
    pilots = target.shape[0]
    vb = v_diag[:, None] * b
    x1 = scale ** 2 * (vb @ vb.conj().T)                 # (elements, elements)
    excess = target - np.conj(offset) * np.sum(vb, axis=0)[None, :]
    x2 = scale * (excess @ vb.conj().T)                  # (pilots, elements)

    if f_init is None:
        fbar = np.exp(1j * np.angle(np.where(x2 == 0, 1.0, x2)))
    else:
        fbar = f_init.conj().T.copy()

    def objective(fb):
        return float((np.einsum("pn,pm,mn->", fb.conj(), fb, x1)
                      - 2 * np.einsum("pn,pn->", fb.conj(), x2)).real)

    history = [objective(fbar)]
    for _ in range(sweeps):
        before = history[-1]
        for p in range(pilots):
            for j in range(n):
                cross = fbar[p] @ x1[:, j] - fbar[p, j] * x1[j, j]
                nu = x2[p, j] - cross
                if nu != 0:
                    fbar[p, j] = nu / abs(nu)
                if track_entries:
                    history.append(objective(fbar))
        if not track_entries:
            history.append(objective(fbar))
        after = history[-1]
        if before - after <= tol * max(1.0, abs(before)):
            break
    f = fbar.conj().T
    return f, offset + scale * f, np.asarray(history)


@dataclass
class MeasurementDesign:
    """Per-strip weight matrices and the effective measurement matrices."""

    mode: str
    provenance: str
    weights: np.ndarray                  # W, shape (strips, elements, pilots)
    dma_weights: np.ndarray | None       # Q, same shape; None for gaussian mode
    guide_diag: np.ndarray | None        # V diagonals, shape (strips, elements)
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def check_feasible(self, tol: float = 1e-12) -> bool:
        """Weights lie on the hardware feasible set (circle or unit modulus)."""
        if self.dma_weights is None:
            return True
        if self.mode.startswith("dma"):
            return bool(np.all(np.abs(np.abs(self.dma_weights - 0.5j) - 0.5) < tol))
        return bool(np.all(np.abs(np.abs(self.dma_weights) - 1.0) < tol))


def make_design(mode: str, geom: ArrayGeometry, az_dict: AzDictionary,
                num_pilots: int, rng: np.random.Generator,
                hardware: DmaHardware | None = None, seed: int | None = None,
                power_draws: int = 100, cd_sweeps: int = 20,
                cd_tol: float = 1e-8) -> MeasurementDesign:
    """Build a measurement design of the requested mode, one strip at a time.

    Optimized modes draw a fresh flat-spectrum target per strip (the strips
    share the power budget estimated on the first strip's waveguide) and use
    phase alignment when the dictionary allows it, falling back to coordinate
    descent otherwise.
    """
    if mode not in DESIGN_MODES:
        raise ValueError(f"unknown design mode {mode!r}; expected one of {DESIGN_MODES}")
    if hardware is None:
        hardware = DmaHardware.default(geom)
    strips, n = geom.num_strips, geom.elems_per_strip
    b = az_dict.matrix
    w = np.empty((strips, n, num_pilots), dtype=complex)

    if mode == "gaussian":
        for m in range(strips):
            w[m] = (rng.standard_normal((n, num_pilots))
                    + 1j * rng.standard_normal((n, num_pilots))) / np.sqrt(2)
        return MeasurementDesign(mode, "random", w, None, None, seed)

    hardware_mode = "dma" if mode.startswith("dma") else "phased"
    q = np.empty((strips, n, num_pilots), dtype=complex)
    v = np.stack([waveguide_diagonal(hardware, m) for m in range(strips)])
    solver_used = []

    if mode.endswith("random"):
        for m in range(strips):
            q[m] = random_feasible_weights(n, num_pilots, hardware_mode, rng)
            w[m] = v[m].conj()[:, None] * q[m]
        return MeasurementDesign(mode, "random", w, q, v, seed)

    power = estimate_power_budget(v[0], b, num_pilots, hardware_mode, rng,
                                  draws=power_draws)
    for m in range(strips):
        tg = target_gram(num_pilots, b.shape[1], power, rng)
        try:
            _, q[m] = solve_phase_alignment(tg.matrix, v[m], b, hardware_mode)
            solver_used.append("phase_alignment")
        except PhaseAlignmentUnavailable:
            _, q[m], _ = solve_coordinate_descent(tg.matrix, v[m], b,
                                                  hardware_mode, cd_sweeps, cd_tol)
            solver_used.append("coordinate_descent")
        w[m] = v[m].conj()[:, None] * q[m]
    return MeasurementDesign(mode, "optimized", w, q, v, seed,
                             {"power_budget": power, "solver": solver_used})


def design_coherence(design: MeasurementDesign, az_dict: AzDictionary) -> float:
    """Total coherence of the design summed over strips."""
    return float(sum(total_coherence(design.weights[m], az_dict.matrix)
                     for m in range(design.weights.shape[0])))
