"""Sparse-recovery channel estimators for multi-strip near-field arrays.

Four frameworks are provided, all returning a :class:`FullEstimate`:

``el_az_joint``
    one orthogonal-least-squares pass over the joint
    elevation-azimuth-distance dictionary applied to the stacked pilots
``az_independent``
    per-strip OLS over the azimuth dictionary; no elevation estimate
``el_az_decoupled``
    distributed OLS over the azimuth dictionary (one shared support across
    strips), optional off-grid Gauss-Newton-style refinement of the azimuth
    cosine and inverse range, then a one-dimensional elevation search over
    the per-strip gain columns
``oracle_ls``
    least-squares gain fit at the true path parameters (lower bound)

Greedy selection always minimizes the post-projection residual energy, which
reduces to matched filtering only for orthonormal sensing columns.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .channel import MeasurementBundle, PathSet
from .dictionaries import AzDictionary, JointDictionary, build_el_grid, sense_columns
from .geometry import (
    ArrayGeometry,
    manifold_from_cosines,
    steering_az_derivatives,
    steering_az_inv,
    steering_el,
)

_RANK_TOL = 1e-10


class DegenerateSupportError(RuntimeError):
    """Every remaining candidate atom is numerically dependent on the support."""


@dataclass
class SupportEstimate:
    """Selected (azimuth cosine, inverse range) atoms and their sensed bases."""

    az_cos: np.ndarray
    inv_range: np.ndarray
    columns: np.ndarray
    bases: np.ndarray  # (strips, pilots, atoms)

    @property
    def range_m(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.inv_range > 0, 1.0 / self.inv_range, np.inf)


@dataclass
class FullEstimate:
    """Recovered path parameters, gains, reconstructed channel, and its NMSE."""

    el_cos: np.ndarray
    az_cos: np.ndarray
    range_m: np.ndarray
    gains: np.ndarray
    channel: np.ndarray
    nmse: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _column_energies(cands: np.ndarray) -> np.ndarray:
    return (np.einsum("ij,ij->j", cands.real, cands.real)
            + np.einsum("ij,ij->j", cands.imag, cands.imag))


def _selection_scores(y: np.ndarray, cands: np.ndarray,
                      selected: np.ndarray | None,
                      col_sq: np.ndarray | None = None,
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Residual energy after augmenting the selected basis with each candidate.

    Returns (scores, eligible). A candidate whose component orthogonal to the
    selected span is numerically zero cannot extend the basis and is marked
    ineligible (score +inf). ``col_sq`` may carry precomputed candidate
    column energies. The big candidate matrix is never conjugated: only the
    magnitude of each inner product matters.
    """
    if col_sq is None:
        col_sq = _column_energies(cands)
    if selected is None or selected.shape[1] == 0:
        resid = y
        base = float(np.vdot(y, y).real)
        perp_sq = col_sq
    else:
        u, _ = np.linalg.qr(selected)
        resid = y - u @ (u.conj().T @ y)
        base = float(np.vdot(resid, y).real)
        g = u.conj().T @ cands
        perp_sq = col_sq - (np.einsum("ij,ij->j", g.real, g.real)
                            + np.einsum("ij,ij->j", g.imag, g.imag))
    eligible = perp_sq > _RANK_TOL * np.maximum(col_sq, 1e-300)
    inner = resid.conj() @ cands
    scores = np.full(cands.shape[1], np.inf)
    gain = np.abs(inner[eligible]) ** 2 / perp_sq[eligible]
    scores[eligible] = np.maximum(base - gain, 0.0)
    return scores, eligible


def ols_recover(y: np.ndarray, sensing: np.ndarray, sparsity: int,
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Greedy OLS: select `sparsity` columns, each minimizing the new residual.

    Returns (support indices, least-squares coefficients on the support,
    residual energy after each selection).
    """
    rows, cols = sensing.shape
    if sparsity > min(rows, cols):
        raise ValueError("sparsity exceeds the sensing matrix dimensions")
    support: list[int] = []
    history = np.empty(sparsity)
    col_sq = _column_energies(sensing)
    for step in range(sparsity):
        selected = sensing[:, support] if support else None
        scores, eligible = _selection_scores(y, sensing, selected, col_sq)
        scores[support] = np.inf
        eligible[support] = False
        if not np.any(eligible):
            raise DegenerateSupportError(
                "no candidate column extends the current support")
        best = int(np.argmin(scores))
        support.append(best)
        history[step] = scores[best]
    basis = sensing[:, support]
    coefs, _, rank, _ = np.linalg.lstsq(basis, y, rcond=_RANK_TOL)
    if rank < len(support):
        raise DegenerateSupportError("selected basis is rank deficient")
    return np.asarray(support), coefs, history


def _distributed_scores(pilots: np.ndarray, sensed: np.ndarray,
                        selected: np.ndarray | None,
                        col_sq: np.ndarray | None = None) -> np.ndarray:
    """Across-strip sum of post-projection residual energies per candidate.

    Batched equivalent of running :func:`_selection_scores` per strip and
    summing. A candidate that cannot extend the basis on any single strip is
    treated as +inf for the whole sum.
    """
    strips = pilots.shape[0]
    if col_sq is None:
        col_sq = np.stack([_column_energies(sensed[m]) for m in range(strips)])
    if selected is None or selected.shape[2] == 0:
        resid = pilots
        base = (pilots.real ** 2 + pilots.imag ** 2).sum(axis=1)
        perp_sq = col_sq
    else:
        u = np.linalg.qr(selected)[0]                   # (M, P, k)
        u_h = u.conj().transpose(0, 2, 1)
        proj = (u_h @ pilots[:, :, None])[..., 0]
        resid = pilots - (u @ proj[:, :, None])[..., 0]
        base = (resid.conj() * pilots).sum(axis=1).real
        g = u_h @ sensed                                # (M, k, cols)
        perp_sq = col_sq - (g.real ** 2 + g.imag ** 2).sum(axis=1)
    eligible = perp_sq > _RANK_TOL * np.maximum(col_sq, 1e-300)
    inner = (resid.conj()[:, None, :] @ sensed)[:, 0, :]
    gain = (inner.real ** 2 + inner.imag ** 2) / np.where(eligible, perp_sq, 1.0)
    scores = np.maximum(base[:, None] - gain, 0.0)
    total = np.where(eligible, scores, 0.0).sum(axis=0)
    total[~eligible.all(axis=0)] = np.inf
    return total


def dols_select(bundle: MeasurementBundle, az_dict: AzDictionary,
                support: SupportEstimate | None = None,
                exclude: np.ndarray | None = None) -> int:
    """Pick the dictionary column minimizing the summed residual over strips."""
    sensed = sense_columns(bundle.weights, az_dict.matrix)
    selected = support.bases if support is not None else None
    scores = _distributed_scores(bundle.pilots, sensed, selected)
    if exclude is not None:
        scores[exclude] = np.inf
    if support is not None:
        scores[support.columns[support.columns >= 0]] = np.inf
    best = int(np.argmin(scores))
    if not np.isfinite(scores[best]):
        raise DegenerateSupportError("no candidate column is usable on all strips")
    return best


@dataclass(frozen=True)
class RefineOptions:
    """Knobs for the off-grid refinement loop.

    ``significance`` scales the acceptance threshold for a refinement step:
    a step fitting 2*atoms real parameters to an isotropic-noise residual of
    2*strips*pilots real dimensions reduces the residual energy by roughly
    their ratio, so steps are accepted only when the relative reduction
    exceeds ``significance`` times that noise-fitting floor. Zero disables
    the test and accepts any non-increasing step.
    """

    iters: int = 5
    min_range: float = 1.0        # inverse range is clamped to [0, 1/min_range]
    param_floor: float = 1e-6     # below this, multiplicative steps go additive
    az_step: float = 1e-2         # additive fallback step sizes, one grid cell
    inv_range_step: float = 1e-2
    significance: float = 3.0
    rcond: float = 1e-10

    @classmethod
    def for_grid(cls, az_dict: AzDictionary, iters: int = 5,
                 significance: float = 3.0) -> "RefineOptions":
        return cls(iters=iters,
                   az_step=az_dict.grid.angle_spacing,
                   inv_range_step=az_dict.grid.inv_range_spacing,
                   significance=significance)


@dataclass
class RefineResult:
    az_cos: np.ndarray
    inv_range: np.ndarray
    strip_gains: np.ndarray
    bases: np.ndarray
    objective: np.ndarray         # accepted stacked-residual energies
    rejected: int = 0
    skipped: int = 0


def _atom_matrix(geom: ArrayGeometry, az_cos: np.ndarray,
                 inv_range: np.ndarray) -> np.ndarray:
    """Azimuth steering vectors for several atoms at once, shape (N, atoms)."""
    az_cos = np.asarray(az_cos, dtype=float)
    inv_range = np.asarray(inv_range, dtype=float)
    u = np.arange(geom.elems_per_strip)[:, None] * geom.spacing
    phase = geom.wavenumber * (u * az_cos[None, :]
                               - 0.5 * u ** 2 * (1.0 - az_cos ** 2)[None, :]
                               * inv_range[None, :])
    return np.exp(1j * phase) / np.sqrt(geom.elems_per_strip)


def _atom_derivatives(geom: ArrayGeometry, az_cos: np.ndarray,
                      inv_range: np.ndarray, atoms: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Analytic atom partials, computed from the atom matrix in one shot."""
    u = np.arange(geom.elems_per_strip)[:, None] * geom.spacing
    k = geom.wavenumber
    d_az = 1j * k * (u + u ** 2 * (az_cos * inv_range)[None, :]) * atoms
    d_r = -1j * k * 0.5 * u ** 2 * (1.0 - az_cos ** 2)[None, :] * atoms
    return d_az, d_r


def _fit_gains_full(pilots: np.ndarray, bases: np.ndarray, rcond: float
                    ) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """Per-strip least-squares gains plus the residual and basis QR factor.

    Solves through a batched QR when every strip basis is well conditioned
    and falls back to the tolerance-cut pseudo-inverse near rank deficiency,
    so degenerate supports still produce the minimum-norm fit.
    """
    q, r = np.linalg.qr(bases)
    diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
    if diag.size and np.all(diag > np.sqrt(rcond) * diag.max(axis=1, keepdims=True)):
        proj = (q.conj().transpose(0, 2, 1) @ pilots[:, :, None])
        gains = np.linalg.solve(r, proj)[..., 0]
    else:
        gains = np.einsum("mlp,mp->ml",
                          np.linalg.pinv(bases, rcond=rcond), pilots)
    resid = pilots - (bases @ gains[:, :, None])[..., 0]
    return gains, float(np.sum(resid.real ** 2 + resid.imag ** 2)), resid, q


def _fit_gains(pilots: np.ndarray, bases: np.ndarray, rcond: float
               ) -> tuple[np.ndarray, float]:
    """Per-strip least-squares gains and the summed residual energy."""
    gains, obj, _, _ = _fit_gains_full(pilots, bases, rcond)
    return gains, obj


def og_refine(bundle: MeasurementBundle, az_cos: np.ndarray,
              inv_range: np.ndarray, strip_gains: np.ndarray | None = None,
              options: RefineOptions = RefineOptions()) -> RefineResult:
    """Jointly refine off-grid azimuth cosines and inverse ranges.

    Each iteration linearizes the stacked residual in small relative
    perturbations of the two parameter vectors and solves for both
    perturbations in one real-constrained least squares. Because the
    per-strip gains are refit after every update, the derivative columns are
    first projected orthogonal to the current support span (the separable
    least-squares Jacobian); without that projection the along-support
    component soaks up most of the step and the refinement stalls. An update
    that would increase the stacked residual is rejected and refinement
    stops; near-zero parameters use an additive fallback step so they are
    not frozen by the multiplicative update rule.
    """
    geom = bundle.geom
    az_cos = np.array(az_cos, dtype=float)
    inv_range = np.array(inv_range, dtype=float)
    strips = geom.num_strips
    num_atoms = len(az_cos)
    w_conj = bundle.weights.conj().transpose(0, 2, 1)   # (M, P, N)

    def build(az, inv_r):
        atoms = _atom_matrix(geom, az, inv_r)
        return atoms, w_conj @ atoms

    atoms, bases = build(az_cos, inv_range)
    strip_gains, obj, resid, basis_q = _fit_gains_full(bundle.pilots, bases,
                                                       options.rcond)
    objective = [obj]
    rejected = skipped = 0

    for _ in range(options.iters):
        az_scale = np.where(np.abs(az_cos) >= options.param_floor,
                            az_cos, options.az_step)
        r_scale = np.where(inv_range >= options.param_floor,
                           inv_range, options.inv_range_step)
        d_az, d_r = _atom_derivatives(geom, az_cos, inv_range, atoms)
        deriv = np.hstack([d_az * az_scale[None, :], d_r * r_scale[None, :]])
        block = (w_conj @ deriv) \
            * np.tile(strip_gains, 2)[:, None, :]       # (M, P, 2*atoms)
        block -= basis_q @ (basis_q.conj().transpose(0, 2, 1) @ block)
        jac = block.reshape(-1, 2 * num_atoms)
        # real-constrained least squares via its normal equations; the step
        # guard below catches any blow-up from a near-singular system
        gram = (jac.conj().T @ jac).real
        rhs = (jac.conj().T @ resid.reshape(-1)).real
        try:
            eta = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            try:
                eta = np.linalg.lstsq(gram, rhs, rcond=options.rcond)[0]
            except np.linalg.LinAlgError:
                skipped += 1
                continue

        new_az = np.clip(az_cos + eta[:num_atoms] * az_scale, -1.0, 1.0)
        new_r = np.clip(inv_range + eta[num_atoms:] * r_scale,
                        0.0, 1.0 / options.min_range)
        new_atoms, new_bases = build(new_az, new_r)
        new_gains, new_obj, new_resid, new_q = _fit_gains_full(
            bundle.pilots, new_bases, options.rcond)
        noise_floor = options.significance * obj * num_atoms \
            / (strips * bundle.num_pilots)
        if obj - new_obj > noise_floor or (options.significance == 0
                                           and new_obj <= obj * (1 + 1e-12)):
            az_cos, inv_range = new_az, new_r
            atoms, bases, obj = new_atoms, new_bases, new_obj
            strip_gains, resid, basis_q = new_gains, new_resid, new_q
            objective.append(obj)
        else:
            rejected += 1
            break

    return RefineResult(az_cos, inv_range, strip_gains, bases,
                        np.asarray(objective), rejected, skipped)


def og_dols(bundle: MeasurementBundle, az_dict: AzDictionary, sparsity: int,
            refine_iters: int = 0, options: RefineOptions | None = None,
            sensed: np.ndarray | None = None,
            sensed_sq: np.ndarray | None = None,
            ) -> tuple[SupportEstimate, np.ndarray, dict]:
    """Distributed OLS with optional per-step off-grid refinement.

    With ``refine_iters = 0`` this is plain distributed OLS (shared support
    across strips, residual-minimizing selection). Returns the support, the
    per-strip gain matrix (strips, sparsity), and diagnostics holding the
    accepted objective history of every refinement stage. ``sensed`` may hold
    the precomputed (strips, pilots, columns) products W_m^H B, which depend
    only on the design and the dictionary.
    """
    if sparsity < 1:
        raise ValueError("sparsity must be at least one")
    if options is None:
        options = RefineOptions.for_grid(az_dict, iters=refine_iters)
    else:
        options = dataclasses.replace(options, iters=refine_iters)
    geom = bundle.geom
    strips = geom.num_strips
    if sensed is None:
        sensed = sense_columns(bundle.weights, az_dict.matrix)
    if sensed_sq is None:
        sensed_sq = np.stack([_column_energies(sensed[m])
                              for m in range(strips)])
    available = np.ones(az_dict.grid.num_columns, dtype=bool)
    az_sel = np.empty(0)
    r_sel = np.empty(0)
    cols: list[int] = []
    bases = np.empty((strips, bundle.num_pilots, 0), dtype=complex)
    strip_gains = np.empty((strips, 0), dtype=complex)
    histories = []
    rejected = skipped = 0

    for _ in range(sparsity):
        scores = _distributed_scores(bundle.pilots, sensed,
                                     bases if cols else None, sensed_sq)
        scores[~available] = np.inf
        best = int(np.argmin(scores))
        if not np.isfinite(scores[best]):
            raise DegenerateSupportError(
                "no candidate column is usable on all strips")
        available[best] = False
        cols.append(best)
        phi, inv_r = az_dict.grid.params_of(best)
        az_sel = np.append(az_sel, phi)
        r_sel = np.append(r_sel, inv_r)

        if refine_iters > 0:
            res = og_refine(bundle, az_sel, r_sel, options=options)
            az_sel, r_sel = res.az_cos, res.inv_range
            strip_gains, bases = res.strip_gains, res.bases
            histories.append(res.objective)
            rejected += res.rejected
            skipped += res.skipped
        else:
            atoms = _atom_matrix(geom, az_sel, r_sel)
            bases = bundle.weights.conj().transpose(0, 2, 1) @ atoms
            strip_gains, obj = _fit_gains(bundle.pilots, bases, options.rcond)
            histories.append(np.array([obj]))

    support = SupportEstimate(az_sel, r_sel, np.asarray(cols), bases)
    diagnostics = {"objective_histories": histories,
                   "rejected_steps": rejected, "skipped_steps": skipped}
    return support, strip_gains, diagnostics


def el_steering_matrix(el_grid: np.ndarray, geom: ArrayGeometry) -> np.ndarray:
    """Elevation steering vectors over a search grid, shape (strips, grid)."""
    z = np.arange(geom.num_strips)[:, None] * geom.spacing
    return np.exp(1j * geom.wavenumber * z * np.asarray(el_grid)[None, :]) \
        / np.sqrt(geom.num_strips)


def estimate_el(strip_gains: np.ndarray, el_grid: np.ndarray,
                geom: ArrayGeometry, refine: bool = False,
                steer: np.ndarray | None = None) -> np.ndarray:
    """Per-path elevation cosine by correlation search over the grid.

    The gain matrix column of path l is proportional to the elevation
    steering vector, so the elevation cosine is the grid argmax of
    |a(cos)^H column|. With ``refine`` a three-point parabolic fit of the
    correlation magnitude around the argmax sharpens the estimate. ``steer``
    may carry the precomputed grid steering matrix.
    """
    el_grid = np.asarray(el_grid, dtype=float)
    if steer is None:
        steer = el_steering_matrix(el_grid, geom)
    corr = np.abs(steer.conj().T @ strip_gains)        # (grid, paths)
    out = np.empty(strip_gains.shape[1])
    for l in range(strip_gains.shape[1]):
        if not np.any(strip_gains[:, l]):
            raise ValueError("direction undefined for an all-zero gain column")
        i = int(np.argmax(corr[:, l]))
        est = el_grid[i]
        if refine and 0 < i < len(el_grid) - 1:
            c0, c1, c2 = corr[i - 1, l], corr[i, l], corr[i + 1, l]
            denom = c0 + c2 - 2 * c1
            if denom < 0:
                delta = np.clip((c0 - c2) / (2 * denom), -0.5, 0.5)
                est = est + delta * (el_grid[i + 1] - el_grid[i - 1]) / 2
        out[l] = np.clip(est, -1.0, 1.0)
    return out


def reconstruct(bundle: MeasurementBundle, el_cos: np.ndarray,
                az_cos: np.ndarray, range_m: np.ndarray,
                truth: np.ndarray | None = None, atom_model: str = "oblong",
                rcond: float = _RANK_TOL) -> FullEstimate:
    """Joint least-squares gain fit at given path parameters, then channel rebuild."""
    el_cos = np.atleast_1d(np.asarray(el_cos, dtype=float))
    az_cos = np.atleast_1d(np.asarray(az_cos, dtype=float))
    range_m = np.atleast_1d(np.asarray(range_m, dtype=float))
    num_paths = len(el_cos)
    if num_paths == 0:
        raise ValueError("need at least one path to reconstruct")
    geom = bundle.geom
    scale = np.sqrt(geom.size / num_paths)
    atoms = np.stack([
        manifold_from_cosines(geom, float(el_cos[l]), float(az_cos[l]),
                              float(range_m[l]), atom_model)
        for l in range(num_paths)], axis=1)            # (M*N, L)
    per_strip = atoms.reshape(geom.num_strips, geom.elems_per_strip, num_paths)
    sensed = np.concatenate([
        bundle.weights[m].conj().T @ per_strip[m]
        for m in range(geom.num_strips)]) * scale      # (M*P, L)
    gains, _, rank, _ = np.linalg.lstsq(sensed, bundle.stacked_pilots,
                                        rcond=rcond)
    h_hat = scale * (atoms @ gains)
    nmse = None
    if truth is not None:
        nmse = float(np.sum(np.abs(h_hat - truth) ** 2)
                     / np.sum(np.abs(truth) ** 2))
    return FullEstimate(el_cos, az_cos, range_m, gains, h_hat, nmse,
                        {"rank_deficient": bool(rank < num_paths)})


def el_az_joint(bundle: MeasurementBundle, joint: JointDictionary,
                sparsity: int, truth: np.ndarray | None = None,
                sensing: np.ndarray | None = None) -> FullEstimate:
    """OLS over the joint dictionary on the stacked pilots, then LS gains.

    ``sensing`` may carry a precomputed stacked sensing matrix (it only
    depends on the measurement design and the dictionary, not on the trial).
    """
    if sensing is None:
        sensing = joint.sensing_matrix(bundle.weights)
    support, _, history = ols_recover(bundle.stacked_pilots, sensing, sparsity)
    params = np.array([joint.grid.params_of(k) for k in support])
    with np.errstate(divide="ignore"):
        ranges = np.where(params[:, 2] > 0, 1.0 / params[:, 2], np.inf)
    est = reconstruct(bundle, params[:, 0], params[:, 1], ranges, truth,
                      atom_model=joint.atom_model)
    est.diagnostics.update({"support": support, "residual_history": history})
    return est


def az_independent(bundle: MeasurementBundle, az_dict: AzDictionary,
                   sparsity: int, truth: np.ndarray | None = None,
                   sensed: np.ndarray | None = None) -> FullEstimate:
    """Independent per-strip OLS; reconstructs each strip from its own atoms.

    No elevation parameter is estimated, so the elevation slots are NaN and
    the reported azimuth parameters are those selected by the first strip.
    """
    geom = bundle.geom
    supports = []
    h_hat = np.empty(geom.size, dtype=complex)
    n = geom.elems_per_strip
    if sensed is None:
        sensed = sense_columns(bundle.weights, az_dict.matrix)
    for m in range(geom.num_strips):
        support, coefs, _ = ols_recover(bundle.pilots[m], sensed[m], sparsity)
        supports.append(support)
        h_hat[m * n:(m + 1) * n] = az_dict.matrix[:, support] @ coefs
    nmse = None
    if truth is not None:
        nmse = float(np.sum(np.abs(h_hat - truth) ** 2)
                     / np.sum(np.abs(truth) ** 2))
    params = np.array([az_dict.grid.params_of(k) for k in supports[0]])
    with np.errstate(divide="ignore"):
        ranges = np.where(params[:, 1] > 0, 1.0 / params[:, 1], np.inf)
    return FullEstimate(np.full(sparsity, np.nan), params[:, 0], ranges,
                        np.full(sparsity, np.nan, dtype=complex), h_hat, nmse,
                        {"strip_supports": supports})


def el_az_decoupled(bundle: MeasurementBundle, az_dict: AzDictionary,
                    sparsity: int, refine_iters: int = 0,
                    el_search_grid: np.ndarray | None = None,
                    el_refine: bool = False,
                    truth: np.ndarray | None = None,
                    options: RefineOptions | None = None,
                    sensed: np.ndarray | None = None,
                    sensed_sq: np.ndarray | None = None,
                    el_steer: np.ndarray | None = None) -> FullEstimate:
    """Two-stage estimation: distributed (optionally off-grid) OLS, then elevation.

    ``refine_iters = 0`` gives the plain decoupled estimator; positive values
    enable the off-grid stage after every atom selection.
    """
    geom = bundle.geom
    support, strip_gains, diag = og_dols(bundle, az_dict, sparsity,
                                         refine_iters, options, sensed=sensed,
                                         sensed_sq=sensed_sq)
    if el_search_grid is None:
        el_search_grid = build_el_grid(geom.num_strips)
    el = estimate_el(strip_gains, el_search_grid, geom, refine=el_refine,
                     steer=el_steer)
    est = reconstruct(bundle, el, support.az_cos, support.range_m, truth)
    est.diagnostics.update(diag)
    est.diagnostics["support_columns"] = support.columns
    return est


def oracle_ls(bundle: MeasurementBundle, paths: PathSet,
              truth: np.ndarray | None = None,
              atom_model: str = "oblong") -> FullEstimate:
    """Gain fit with perfect knowledge of the path parameters (lower bound)."""
    return reconstruct(bundle, paths.el_cos, paths.az_cos, paths.range_m,
                       truth, atom_model=atom_model)
