"""Exponential decomposition of bath correlations by rational fitting of the noise power.

The noise power is sampled on a symmetric log-spaced grid, fitted with the
adaptive barycentric (AAA) algorithm, and the poles of the rational fit in
the lower half plane become the modes d_k exp(-z_k t) of C(t).

Real samples are fitted in real arithmetic, so poles and residues come in
conjugate pairs and 2 Re over the lower half plane reproduces the whole fit.
The decomposition also forces the fit to decay like 1/w^2: no constant term
survives that a finite mode sum could not carry, and C(0) stays real.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from heomkit.core.bath import BathError, NoiseSpectrum, correlation_quadrature
from heomkit.core.errors import NumericalError
from heomkit.core.types import ComplexArray, RealArray, Regression, ScanRow
from heomkit.models.modes import FrequencyWindow, Mode, ModeSet

logger = logging.getLogger(__name__)

DEFAULT_FROISSART_FLOOR = 1e-13
# Poles closer than this (relative) to the real axis cannot define a decaying mode
REAL_AXIS_TOLERANCE = 1e-14
# Share of delta a dropped out-of-window real pole may contribute on the window
REAL_POLE_BUDGET = 0.1


class ModeFitError(NumericalError):
    """Raised when the rational fit cannot meet its tolerance or yields unusable poles."""

    def __init__(self, message: str, best_residual: Optional[float] = None):
        super().__init__(message)
        self.best_residual = best_residual


class DegeneratePencilError(ModeFitError):
    """Raised when the pole pencil is singular, e.g. for repeated support points."""
    pass


@dataclass
class BarycentricFit:
    """Rational function in barycentric form r(w) = N(w) / D(w).

    Attributes:
        support_points: Support frequencies w_j.
        support_values: Sampled values f_j at the support points.
        weights: Barycentric weights (complex in general).
        residual: Max-norm error over every sample.
        errors: Max-norm error after each iteration.
        omega: All sampled frequencies.
        values: All sampled noise-power values.
        delta: Tolerance the fit was run to.
    """

    support_points: ComplexArray
    support_values: ComplexArray
    weights: ComplexArray
    residual: float
    errors: RealArray
    omega: RealArray
    values: RealArray
    delta: float

    @property
    def size(self) -> int:
        return int(len(self.support_points))

    def __call__(self, omega: Union[float, np.ndarray]) -> ComplexArray:
        z = np.atleast_1d(np.asarray(omega, dtype=np.complex128))
        with np.errstate(invalid="ignore", divide="ignore"):
            cauchy = 1.0 / np.subtract.outer(z, self.support_points)
            r = cauchy @ (self.weights * self.support_values) / (cauchy @ self.weights)
        # 0/0 at the support points themselves
        for idx in np.nonzero(~np.isfinite(r))[0]:
            hit = z[idx] == self.support_points
            if np.any(hit):
                r[idx] = self.support_values[hit][0]
        return r

    @property
    def value_at_infinity(self) -> complex:
        total = np.sum(self.weights)
        if total == 0:
            return 0.0j
        return complex(np.sum(self.weights * self.support_values) / total)


@dataclass
class PoleSet:
    """Poles and residues of a barycentric fit after Froissart cleanup."""

    poles: ComplexArray
    residues: ComplexArray
    constant: complex
    dropped: int
    residual: float
    fit: BarycentricFit


def sample_grid(window: FrequencyWindow) -> RealArray:
    """Log-uniform samples on [w_min, w_max] and their negatives.

    Both endpoints are included exactly and the grid is closed under negation.
    """
    count = max(1, int(round(window.decades * window.points_per_decade))) + 1
    positive = np.logspace(math.log10(window.omega_min), math.log10(window.omega_max), count)
    positive[0] = window.omega_min
    positive[-1] = window.omega_max
    return np.concatenate([-positive[::-1], positive])


def far_field_points(window: FrequencyWindow, decades: int) -> RealArray:
    """Anchor samples beyond the window, at the window's density.

    They carry the decaying tail of the noise power above omega_max into the
    fit and pin it to zero further out.
    """
    if decades <= 0:
        return np.empty(0)
    count = max(1, int(round(decades * window.points_per_decade)))
    positive = window.omega_max * np.logspace(0.0, float(decades), count + 1)[1:]
    return np.concatenate([-positive[::-1], positive])


def _decay_constraints(support: np.ndarray, support_values: np.ndarray, decay: int) -> List[np.ndarray]:
    """Linear conditions on the weights that remove the leading terms of r at infinity.

    sum_j w_j f_j = 0 removes the constant, sum_j w_j f_j x_j = 0 then removes the 1/w term.
    """
    rows = []
    for row in (support_values, support_values * support)[:decay]:
        norm = float(np.linalg.norm(row))
        if norm > 0:
            rows.append(row / norm)
    return rows


def _least_squares_weights(loewner: np.ndarray, constraints: List[np.ndarray]) -> np.ndarray:
    """Unit weight vector minimizing |loewner @ w| subject to constraints @ w = 0.

    Constraints are relaxed from the last one while they leave no admissible weights,
    which happens for the first one or two support points.
    """
    basis = None
    for count in range(len(constraints), 0, -1):
        candidate = scipy.linalg.null_space(np.vstack(constraints[:count]), check_finite=False)
        if candidate.shape[1] > 0:
            basis = candidate
            break
    matrix = loewner if basis is None else loewner @ basis
    if matrix.shape[0] >= matrix.shape[1]:
        _, s, vh = scipy.linalg.svd(matrix, full_matrices=False, check_finite=False)
        smallest = s == np.min(s)
        coefficients = vh.conj()[smallest, :].sum(axis=0) / np.sqrt(smallest.sum())
    else:
        null = scipy.linalg.null_space(matrix, check_finite=False)
        coefficients = null.sum(axis=-1) / np.sqrt(null.shape[-1])
    return coefficients if basis is None else basis @ coefficients


def aaa_fit(
    omega: RealArray,
    values: RealArray,
    delta: float,
    k_max: int,
    decay: int = 0,
) -> BarycentricFit:
    """Greedy barycentric rational fit of sampled values.

    Args:
        omega: Distinct sample frequencies.
        values: Samples of the function to fit.
        delta: Absolute max-norm stopping tolerance.
        k_max: Maximum number of support points.
        decay: Leading orders removed at infinity: 0 for a free fit, 1 for
            r(inf) = 0, 2 for r = O(1/w^2).

    Returns:
        BarycentricFit: Fit whose max-norm residual is at most delta. Real
        samples at real frequencies give real weights.

    Raises:
        ModeFitError: If the residual is still above delta after k_max support points.
    """
    z = np.asarray(omega, dtype=np.complex128)
    f = np.asarray(values, dtype=np.complex128)
    if z.ndim != 1 or z.shape != f.shape or len(z) == 0:
        raise ModeFitError("aaa_fit needs equal-length one-dimensional samples")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(f))):
        raise ModeFitError("aaa_fit samples must be finite")
    if len(np.unique(z)) != len(z):
        raise DegeneratePencilError("sample frequencies must be distinct")
    if not delta > 0 or k_max < 1:
        raise ModeFitError("aaa_fit needs delta > 0 and k_max >= 1")
    if decay not in (0, 1, 2):
        raise ModeFitError(f"aaa_fit decay must be 0, 1 or 2, got {decay}")
    real = not (np.any(z.imag) or np.any(f.imag))

    count = len(z)
    max_terms = min(k_max, count)
    mask = np.ones(count, dtype=bool)
    support = np.empty(max_terms, dtype=np.complex128)
    support_values = np.empty(max_terms, dtype=np.complex128)
    cauchy = np.empty((count, max_terms), dtype=np.complex128)
    loewner = np.empty((count, max_terms), dtype=np.complex128)
    errors = np.empty(max_terms)
    approx = np.repeat(np.mean(f), count)
    weights = np.ones(1, dtype=np.complex128)

    for m in range(max_terms):
        # argmax picks the lowest index on ties
        jj = int(np.argmax(np.abs(f[mask] - approx[mask])))
        support[m] = z[mask][jj]
        support_values[m] = f[mask][jj]
        with np.errstate(divide="ignore", invalid="ignore"):
            cauchy[:, m] = 1.0 / (z - support[m])
        mask[np.nonzero(mask)[0][jj]] = False
        with np.errstate(invalid="ignore"):
            loewner[:, m] = (f - support_values[m]) * cauchy[:, m]

        block = loewner[mask, : m + 1]
        points, point_values = support[: m + 1], support_values[: m + 1]
        if real:
            block, points, point_values = block.real, points.real, point_values.real
        constraints = _decay_constraints(points, point_values, decay)
        weights = _least_squares_weights(block, constraints).astype(np.complex128)

        nonzero = weights != 0
        with np.errstate(invalid="ignore"):
            numerator = cauchy[:, : m + 1][:, nonzero] @ (weights[nonzero] * support_values[: m + 1][nonzero])
            denominator = cauchy[:, : m + 1][:, nonzero] @ weights[nonzero]
        exact = ~np.isfinite(denominator)
        denominator[exact] = 1.0
        numerator[exact] = f[exact]
        approx = numerator / denominator

        errors[m] = float(np.max(np.abs(f - approx)))
        logger.debug(f"AAA step {m + 1}: residual {errors[m]:.3e}")
        if errors[m] <= delta:
            used = m + 1
            keep = weights != 0
            return BarycentricFit(
                support_points=support[:used][keep],
                support_values=support_values[:used][keep],
                weights=weights[keep].astype(np.complex128),
                residual=errors[m],
                errors=errors[:used].copy(),
                omega=np.asarray(omega, dtype=np.float64),
                values=np.asarray(values, dtype=np.float64),
                delta=delta,
            )

    best = float(np.min(errors[:max_terms]))
    raise ModeFitError(
        f"rational fit did not reach {delta:.3e} within {max_terms} support points "
        f"(best residual {best:.3e})",
        best_residual=best,
    )


def poles_residues(fit: BarycentricFit, froissart_floor: float = DEFAULT_FROISSART_FLOOR) -> PoleSet:
    """Poles and residues of a barycentric fit, with spurious pole pairs removed.

    Poles come from the arrowhead generalized eigenproblem; residues from
    N(pole) / D'(pole). Poles whose residue is below froissart_floor times the
    largest sample magnitude are dropped and the partial-fraction residual is
    recomputed over all samples.

    Raises:
        DegeneratePencilError: If support points repeat or the pencil yields no
            finite spectrum where one is expected.
    """
    support = fit.support_points
    if len(np.unique(support)) != len(support):
        raise DegeneratePencilError("repeated support points make the pole pencil singular")
    m = len(support)
    if m < 2:
        poles = np.empty(0, dtype=np.complex128)
        residues = np.empty(0, dtype=np.complex128)
    else:
        # a real pencil returns exact conjugate pairs
        real = not (np.any(fit.weights.imag) or np.any(support.imag))
        dtype = np.float64 if real else np.complex128
        pencil_b = np.eye(m + 1, dtype=dtype)
        pencil_b[0, 0] = 0.0
        pencil_e = np.zeros((m + 1, m + 1), dtype=dtype)
        pencil_e[0, 1:] = fit.weights.real if real else fit.weights
        pencil_e[1:, 0] = 1.0
        np.fill_diagonal(pencil_e[1:, 1:], support.real if real else support)
        try:
            eigenvalues = scipy.linalg.eigvals(pencil_e, pencil_b)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise DegeneratePencilError(f"pole pencil eigensolve failed: {str(e)}")
        poles = eigenvalues[np.isfinite(eigenvalues)].astype(np.complex128)
        with np.errstate(divide="ignore", invalid="ignore"):
            cauchy = 1.0 / np.subtract.outer(poles, support)
            numerator = cauchy @ (fit.support_values * fit.weights)
            derivative = -(cauchy ** 2) @ fit.weights
            residues = numerator / derivative
        finite = np.isfinite(residues)
        poles, residues = poles[finite], residues[finite]

    scale = float(np.max(np.abs(fit.values))) if fit.values.size else 1.0
    keep = np.abs(residues) >= froissart_floor * max(scale, np.finfo(float).tiny)
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        logger.warning(f"Dropped {dropped} spurious pole(s) below the residue floor")
    poles, residues = poles[keep], residues[keep]

    constant = fit.value_at_infinity
    approx = constant + (residues[None, :] / np.subtract.outer(fit.omega, poles)).sum(axis=1)
    residual = float(np.max(np.abs(approx - fit.values))) if fit.values.size else 0.0
    if dropped:
        logger.info(f"Partial-fraction residual after cleanup: {residual:.3e}")
    return PoleSet(poles, residues, constant, dropped, residual, fit)


def noise_power_from_modes(modes: Union[ModeSet, Sequence[Mode]], omega: Union[float, np.ndarray]) -> RealArray:
    """Noise power implied by a mode set: sum_k 2 Re[d_k / (z_k - i w)]."""
    w = np.atleast_1d(np.asarray(omega, dtype=np.float64))
    d = np.array([m.d for m in modes], dtype=np.complex128)
    z = np.array([m.z for m in modes], dtype=np.complex128)
    if d.size == 0:
        return np.zeros_like(w)
    terms = d[None, :] / (z[None, :] - 1j * w[:, None])
    return 2.0 * terms.sum(axis=1).real


def reconstruction_error(modes: Union[ModeSet, Sequence[Mode]], omega: RealArray, values: RealArray) -> float:
    """Max-norm difference between the mode noise power and the samples."""
    if len(omega) == 0:
        return 0.0
    return float(np.max(np.abs(noise_power_from_modes(modes, omega) - values)))


def select_modes(pole_set: PoleSet, window: FrequencyWindow) -> ModeSet:
    """Convert lower-half-plane poles into exponential modes.

    A pole W with Im W < 0 and residue rho becomes z = i W and d = -i rho.
    Real-axis poles beyond omega_max whose term rho / (w - W) stays below a
    tenth of delta across the window are dropped with a warning.

    Raises:
        ModeFitError: If any other pole lies on the real axis, where it cannot
            yield a decaying mode.
    """
    poles, residues = pole_set.poles, pole_set.residues
    fit = pole_set.fit
    scale = max(1.0, float(np.max(np.abs(poles)))) if poles.size else 1.0
    on_axis = np.abs(poles.imag) <= REAL_AXIS_TOLERANCE * scale
    if np.any(on_axis):
        distance = np.abs(poles.real) - window.omega_max
        with np.errstate(divide="ignore", invalid="ignore"):
            reach = np.where(distance > 0, np.abs(residues) / distance, np.inf)
        negligible = on_axis & (reach <= REAL_POLE_BUDGET * fit.delta)
        blocking = on_axis & ~negligible
        if np.any(blocking):
            raise ModeFitError(
                f"fit has {int(blocking.sum())} pole(s) on the real axis; gamma would not be positive",
                best_residual=pole_set.residual,
            )
        for pole, residue in zip(poles[negligible], residues[negligible]):
            logger.warning(
                f"Dropped real-axis pole at w={pole.real:.4g} outside the window "
                f"(residue {abs(residue):.3e})"
            )
        poles, residues = poles[~negligible], residues[~negligible]
    lower = poles.imag < 0
    z = 1j * poles[lower]
    d = -1j * residues[lower]
    order = np.lexsort((z.imag, z.real))
    modes = tuple(Mode(complex(d[k]), complex(z[k])) for k in order)

    inside = window.contains(fit.omega)
    achieved = reconstruction_error(modes, fit.omega[inside], fit.values[inside])
    return ModeSet(
        modes=modes,
        window=window,
        delta=fit.delta,
        achieved_error=achieved,
        grid_points=int(np.count_nonzero(inside)),
    )


def reconstruct_C(modes: Union[ModeSet, Sequence[Mode]], t: Union[float, np.ndarray]) -> Union[complex, ComplexArray]:
    """Evaluate C(t) = sum_k d_k exp(-z_k t) for t >= 0.

    Raises:
        ModeFitError: For negative times; use correlation_two_sided for those.
    """
    times = np.asarray(t, dtype=np.float64)
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ModeFitError("reconstruct_C is defined for finite t >= 0 only")
    d = np.array([m.d for m in modes], dtype=np.complex128)
    z = np.array([m.z for m in modes], dtype=np.complex128)
    values = np.exp(-np.multiply.outer(np.atleast_1d(times), z)) @ d
    return complex(values[0]) if np.ndim(t) == 0 else values.reshape(np.shape(times))


def correlation_two_sided(modes: Union[ModeSet, Sequence[Mode]], t: np.ndarray) -> ComplexArray:
    """C(t) on both signs of t via C(-t) = C(t)*."""
    times = np.asarray(t, dtype=np.float64)
    values = np.asarray(reconstruct_C(modes, np.abs(times)), dtype=np.complex128)
    return np.where(times < 0, values.conj(), values)


def decompose(
    bath: NoiseSpectrum,
    window: FrequencyWindow,
    delta: float,
    k_max: int = 150,
    froissart_floor: float = DEFAULT_FROISSART_FLOOR,
    far_field_decades: int = 3,
    max_refinements: int = 3,
) -> ModeSet:
    """Sample, fit and convert a noise power into a ModeSet meeting delta.

    The fit is constrained to decay like 1/w^2. Its target is tightened when
    the mode reconstruction misses delta after dropped poles, or when a pole
    lands on the real axis inside the window.

    Args:
        bath: Noise spectrum to decompose.
        window: Frequency window to sample.
        delta: Max-norm tolerance on the window samples.
        k_max: Maximum support points per fit.
        froissart_floor: Relative residue floor for spurious poles.
        far_field_decades: Decades of anchor samples beyond the window.
        max_refinements: Additional fits with a tenfold tighter target.

    Returns:
        ModeSet: Modes whose noise power is within delta of every window sample.

    Raises:
        ModeFitError: If no attempt reaches delta.
    """
    if not delta > 0:
        raise ModeFitError(f"delta must be positive, got {delta}")
    grid = sample_grid(window)
    grid_values = np.asarray(bath.noise_power(grid), dtype=np.float64)
    anchors = far_field_points(window, far_field_decades)
    try:
        anchor_values = np.asarray(bath.noise_power(anchors), dtype=np.float64)
    except BathError as e:
        logger.debug(f"Skipping far-field anchors: {str(e)}")
        anchors, anchor_values = np.empty(0), np.empty(0)
    omega = np.concatenate([grid, anchors])
    values = np.concatenate([grid_values, anchor_values])

    logger.info(
        f"Fitting noise power on {len(grid)} samples in [{window.omega_min:.3g}, "
        f"{window.omega_max:.3g}] to delta={delta:.3e}"
    )
    target = delta
    best: Optional[float] = None
    for attempt in range(max_refinements + 1):
        try:
            fit = aaa_fit(omega, values, target, k_max, decay=2)
        except DegeneratePencilError:
            raise
        except ModeFitError as e:
            best = e.best_residual if best is None else min(best, e.best_residual or best)
            break
        pole_set = poles_residues(fit, froissart_floor)
        try:
            mode_set = select_modes(pole_set, window)
        except ModeFitError as e:
            best = pole_set.residual if best is None else min(best, pole_set.residual)
            logger.info(f"Fit to {target:.1e} rejected: {str(e)}; tightening the fit target")
            target /= 10.0
            continue
        best = mode_set.achieved_error if best is None else min(best, mode_set.achieved_error)
        if mode_set.achieved_error <= delta:
            logger.info(
                f"Decomposition: K={mode_set.K} modes, achieved error "
                f"{mode_set.achieved_error:.3e} after {attempt + 1} fit(s)"
            )
            return replace(mode_set, delta=delta, grid_points=len(grid))
        logger.info(
            f"Mode reconstruction error {mode_set.achieved_error:.3e} exceeds "
            f"{delta:.3e}; tightening the fit target"
        )
        target /= 10.0
    raise ModeFitError(
        f"decomposition did not reach delta={delta:.3e} (best residual "
        f"{best if best is not None else float('nan'):.3e})",
        best_residual=best,
    )


def time_domain_fidelity(
    modes: ModeSet,
    bath: NoiseSpectrum,
    times: Sequence[float],
    tol: float = 1e-10,
    scheme: str = "auto",
) -> pd.DataFrame:
    """Compare C(t) from the modes with the quadrature reference.

    Returns:
        pd.DataFrame: Columns t, modes_re, modes_im, quadrature_re, quadrature_im
        and abs_error, one row per time.
    """
    grid = np.asarray(times, dtype=np.float64)
    from_modes = np.atleast_1d(reconstruct_C(modes, grid))
    reference = np.array([correlation_quadrature(bath, float(t), tol, scheme) for t in grid])
    frame = pd.DataFrame({
        "t": grid,
        "modes_re": from_modes.real,
        "modes_im": from_modes.imag,
        "quadrature_re": reference.real,
        "quadrature_im": reference.imag,
        "abs_error": np.abs(from_modes - reference),
    })
    logger.info(f"Max time-domain error over {len(grid)} points: {frame['abs_error'].max():.3e}")
    return frame


def _scan_one(
    bath: NoiseSpectrum,
    omega_min: float,
    omega_max: float,
    delta: float,
    points_per_decade: float,
    k_max: int,
) -> ScanRow:
    try:
        window = FrequencyWindow(omega_min, omega_max, points_per_decade)
        mode_set = decompose(bath, window, delta, k_max)
        return ScanRow(omega_min=omega_min, modes=mode_set.K,
                       achieved_error=mode_set.achieved_error, status="ok", message="")
    except ModeFitError as e:
        logger.warning(f"Scan point omega_min={omega_min:.3g} failed: {str(e)}")
        return ScanRow(omega_min=omega_min, modes=None, achieved_error=e.best_residual,
                       status="failed", message=str(e))


def mode_count_scan(
    bath: NoiseSpectrum,
    omega_min_values: Sequence[float],
    omega_max: float,
    delta: float,
    points_per_decade: float = 20.0,
    k_max: int = 150,
    threads: int = 1,
) -> List[ScanRow]:
    """Mode count K for each lower window edge, one independent fit per edge.

    Raises:
        ModeFitError: If the edge list is empty, not strictly decreasing or not positive.
    """
    edges = [float(v) for v in omega_min_values]
    if not edges:
        raise ModeFitError("mode-count scan needs at least one omega_min")
    if any(v <= 0 for v in edges) or any(b >= a for a, b in zip(edges, edges[1:])):
        raise ModeFitError("omega_min values must be positive and strictly decreasing")

    def run(edge: float) -> ScanRow:
        return _scan_one(bath, edge, omega_max, delta, points_per_decade, k_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, edges))
    return [run(edge) for edge in edges]


def fit_loglinear(rows: Sequence[ScanRow]) -> Regression:
    """Least-squares fit K = slope * ln(1/omega_min) + intercept over successful rows."""
    usable = [r for r in rows if r["status"] == "ok" and r["modes"] is not None]
    if len(usable) < 2:
        return Regression(slope=None, intercept=None, r_squared=None)
    x = np.log(1.0 / np.array([r["omega_min"] for r in usable]))
    y = np.array([r["modes"] for r in usable], dtype=np.float64)
    result = stats.linregress(x, y)
    return Regression(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue ** 2) if np.isfinite(result.rvalue) else None,
    )
