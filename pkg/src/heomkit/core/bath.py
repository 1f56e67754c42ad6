"""Bath spectral densities, thermal noise power and the correlation quadrature.

The noise power S(w) = 2 n_beta(w) J(w) is the Fourier transform of the bath
correlation function,

    C(t) = 1/(2 pi) * integral S(w) exp(-i w t) dw,

which is evaluated here by direct quadrature as the reference against which
the exponential mode decompositions are checked.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, linalg, special
from scipy.interpolate import PchipInterpolator
from typing_extensions import Protocol

from heomkit.core.errors import NumericalError
from heomkit.core.types import ComplexArray, RealArray

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

OHMIC = "ohmic-exponential-cutoff"
SUB_OHMIC = "sub-ohmic-exponential-cutoff"
LORENTZIAN_SUM = "lorentzian-sum"
TABULATED = "tabulated"
LORENTZIAN_NOISE = "lorentzian-noise"

FAMILY_ALIASES: Dict[str, str] = {
    "ohmic": OHMIC,
    OHMIC: OHMIC,
    "sub-ohmic": SUB_OHMIC,
    SUB_OHMIC: SUB_OHMIC,
    LORENTZIAN_SUM: LORENTZIAN_SUM,
    "lorentzian": LORENTZIAN_SUM,
    TABULATED: TABULATED,
}

# Below this |beta * w| the Bose factor switches to its Laurent expansion
LAURENT_THRESHOLD = 1e-3
# Share of the quadrature tolerance granted to the truncated tail
TAIL_FRACTION = 0.1
# Panels per oscillation used by the panel scheme: width <= pi / (4 t)
PANEL_DIVISOR = 4.0
# The auto scheme switches to oscillatory weights above this many panels
AUTO_PANEL_LIMIT = 64


class BathError(NumericalError):
    """Raised for invalid bath parameters or queries outside a density's support."""
    pass


class QuadratureError(NumericalError):
    """Raised when the correlation quadrature cannot reach its tolerance."""
    pass


class NoiseSpectrum(Protocol):
    """Anything with a noise power that the fitting and quadrature code can sample."""

    def noise_power(self, omega: ArrayLike) -> Union[float, RealArray]:
        ...

    def symmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        ...

    def antisymmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        ...

    def support_limit(self, tol: float) -> Optional[float]:
        ...


def _finite_frequencies(omega: ArrayLike) -> RealArray:
    w = np.asarray(omega, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise BathError("frequency arguments must be finite")
    return w


def _shaped(omega: ArrayLike, values: np.ndarray) -> Union[float, RealArray]:
    return float(values) if np.ndim(omega) == 0 else values


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Odd spectral density J(w) from one of the supported families.

    Attributes:
        family: ohmic-exponential-cutoff, sub-ohmic-exponential-cutoff,
            lorentzian-sum or tabulated.
        alpha: Coupling strength of the exponential-cutoff families.
        cutoff: Cutoff frequency w_c of the exponential-cutoff families.
        exponent: Low-frequency power eta; fixed to 1 for the ohmic family.
        lorentzians: (w0, gamma, r) terms of the lorentzian-sum family.
        table: (w, J) samples at positive frequencies for the tabulated family.
        extrapolate: Allow tabulated queries outside the sampled grid.
    """

    family: str
    alpha: float = 0.0
    cutoff: float = 1.0
    exponent: float = 1.0
    lorentzians: Tuple[Tuple[float, float, float], ...] = ()
    table: Optional[Tuple[RealArray, RealArray]] = None
    extrapolate: bool = False
    _interpolant: Optional[PchipInterpolator] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        family = FAMILY_ALIASES.get(self.family)
        if family is None:
            raise BathError(f"Unknown spectral density family: {self.family!r}")
        object.__setattr__(self, "family", family)

        if family in (OHMIC, SUB_OHMIC):
            if family == OHMIC:
                object.__setattr__(self, "exponent", 1.0)
            for name in ("alpha", "cutoff", "exponent"):
                value = float(getattr(self, name))
                if not math.isfinite(value):
                    raise BathError(f"{name} must be finite, got {value}")
                object.__setattr__(self, name, value)
            if self.alpha < 0:
                raise BathError(f"alpha must be non-negative, got {self.alpha}")
            if self.cutoff <= 0:
                raise BathError(f"cutoff must be positive, got {self.cutoff}")
            if self.exponent <= 0:
                raise BathError(f"exponent must be positive, got {self.exponent}")
        elif family == LORENTZIAN_SUM:
            terms = tuple(tuple(float(v) for v in term) for term in self.lorentzians)
            if not terms:
                raise BathError("lorentzian-sum density needs at least one term")
            for term in terms:
                if len(term) != 3 or not all(math.isfinite(v) for v in term):
                    raise BathError(f"lorentzian term must be finite (w0, gamma, r), got {term}")
                w0, gamma, r = term
                if gamma <= 0 or w0 < 0 or r < 0:
                    raise BathError(
                        f"lorentzian term needs gamma > 0, w0 >= 0 and r >= 0, got {term}"
                    )
            object.__setattr__(self, "lorentzians", terms)
        else:
            object.__setattr__(self, "_interpolant", self._build_interpolant())

    def _build_interpolant(self) -> PchipInterpolator:
        if self.table is None:
            raise BathError("tabulated density needs a (w, J) table")
        w = np.asarray(self.table[0], dtype=np.float64)
        values = np.asarray(self.table[1], dtype=np.float64)
        if w.ndim != 1 or w.shape != values.shape or len(w) < 2:
            raise BathError("tabulated density needs two equal-length columns of >= 2 rows")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(values))):
            raise BathError("tabulated density contains non-finite samples")
        if np.any(np.diff(w) <= 0):
            raise BathError("tabulated frequencies must be strictly increasing")
        keep = w > 0
        if not np.any(keep):
            raise BathError("tabulated density needs samples at positive frequencies")
        w, values = w[keep], values[keep]
        # antisymmetrize explicitly so J(-w) = -J(w) holds to rounding
        grid = np.concatenate([-w[::-1], [0.0], w])
        samples = np.concatenate([-values[::-1], [0.0], values])
        return PchipInterpolator(grid, samples, extrapolate=self.extrapolate)

    @property
    def grid_limit(self) -> Optional[float]:
        """Largest tabulated frequency, None for analytic families."""
        if self._interpolant is None:
            return None
        return float(self._interpolant.x[-1])

    def _positive(self, w: RealArray) -> RealArray:
        if self.family in (OHMIC, SUB_OHMIC):
            prefactor = self.alpha * self.cutoff ** (1.0 - self.exponent)
            return prefactor * np.power(w, self.exponent) * np.exp(-w / self.cutoff)
        total = np.zeros_like(w)
        for w0, gamma, r in self.lorentzians:
            total += r * (gamma / ((w - w0) ** 2 + gamma ** 2)
                          - gamma / ((w + w0) ** 2 + gamma ** 2))
        return total

    def __call__(self, omega: ArrayLike) -> Union[float, RealArray]:
        """Evaluate J at real frequencies.

        Raises:
            BathError: For non-finite frequencies or tabulated queries outside the
                grid when extrapolation is not enabled.
        """
        w = _finite_frequencies(omega)
        if self._interpolant is not None:
            limit = self._interpolant.x[-1]
            if not self.extrapolate and np.any(np.abs(w) > limit):
                raise BathError(
                    f"tabulated density queried at |w| > {limit:.6g} without extrapolation"
                )
            values = np.asarray(self._interpolant(w), dtype=np.float64)
            if self.extrapolate:
                # cubic extrapolation may overshoot the sign of J
                values = np.where(np.sign(values) == np.sign(w), values, 0.0)
            return _shaped(omega, values)
        return _shaped(omega, np.sign(w) * self._positive(np.abs(w)))

    def slope_at_zero(self) -> float:
        """Derivative J'(0), infinite for exponents below one."""
        if self.family in (OHMIC, SUB_OHMIC):
            if self.exponent < 1.0:
                return math.inf if self.alpha > 0 else 0.0
            return self.alpha if self.exponent == 1.0 else 0.0
        if self.family == LORENTZIAN_SUM:
            return float(sum(
                4.0 * r * gamma * w0 / (w0 ** 2 + gamma ** 2) ** 2
                for w0, gamma, r in self.lorentzians
            ))
        assert self._interpolant is not None
        return float(self._interpolant.derivative()(0.0))

    def tail_bound(self, omega_max: float) -> Optional[float]:
        """Upper bound on (1/pi) * integral of J above omega_max.

        Returns None when the family has no closed-form bound.
        """
        if self.family not in (OHMIC, SUB_OHMIC):
            return None
        eta = self.exponent
        scale = self.alpha * self.cutoff ** (1.0 - eta) * self.cutoff ** (eta + 1.0)
        upper_gamma = special.gammaincc(eta + 1.0, omega_max / self.cutoff) * special.gamma(eta + 1.0)
        return float(scale * upper_gamma / math.pi)


@dataclass(frozen=True, eq=False)
class BathSpec:
    """A spectral density at inverse temperature beta (math.inf for zero temperature)."""

    density: SpectralDensity
    beta: float

    def __post_init__(self) -> None:
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0:
            raise BathError(f"beta must be positive or infinite, got {self.beta}")
        object.__setattr__(self, "beta", beta)

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    def coth_half(self, omega: ArrayLike) -> Union[float, RealArray]:
        """Evaluate coth(beta w / 2), the symmetrizing thermal factor."""
        w = _finite_frequencies(omega)
        if self.zero_temperature:
            return _shaped(omega, np.sign(w).astype(np.float64))
        x = np.atleast_1d(self.beta * w)
        out = np.empty_like(x)
        small = np.abs(x) < LAURENT_THRESHOLD
        with np.errstate(divide="ignore"):
            xs = x[small]
            out[small] = 2.0 / xs + xs / 6.0 - xs ** 3 / 360.0
            out[~small] = 1.0 / np.tanh(x[~small] / 2.0)
        return _shaped(omega, out.reshape(np.shape(w)))

    def _zero_frequency_power(self) -> float:
        if self.zero_temperature:
            return 0.0
        slope = self.density.slope_at_zero()
        if math.isinf(slope):
            raise BathError(
                "noise power diverges at w = 0 for this density at finite temperature"
            )
        return 2.0 * slope / self.beta

    def noise_power(self, omega: ArrayLike) -> Union[float, RealArray]:
        """Evaluate S(w) = 2 n_beta(w) J(w).

        Args:
            omega: Real frequency or array of frequencies.

        Returns:
            Non-negative noise power, obeying S(w) / S(-w) = exp(beta w).

        Raises:
            BathError: For non-finite frequencies or a divergent zero-frequency limit.
        """
        w = np.atleast_1d(_finite_frequencies(omega))
        j = np.atleast_1d(np.asarray(self.density(w), dtype=np.float64))
        out = np.zeros_like(w)
        if self.zero_temperature:
            positive = w > 0
            out[positive] = 2.0 * j[positive]
            return _shaped(omega, out.reshape(np.shape(omega)))

        x = self.beta * w
        zero = x == 0
        small = (np.abs(x) < LAURENT_THRESHOLD) & ~zero
        regular = ~(small | zero)
        with np.errstate(over="ignore"):
            out[regular] = -2.0 * j[regular] / np.expm1(-x[regular])
        xs = x[small]
        out[small] = j[small] * (1.0 + 2.0 / xs + xs / 6.0 - xs ** 3 / 360.0)
        if np.any(zero):
            out[zero] = self._zero_frequency_power()
        return _shaped(omega, out.reshape(np.shape(omega)))

    def symmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        """(S(w) + S(-w)) / 2 = J(w) coth(beta w / 2)."""
        w = np.atleast_1d(_finite_frequencies(omega))
        out = np.zeros_like(w)
        nonzero = w != 0
        j = np.atleast_1d(np.asarray(self.density(w[nonzero]), dtype=np.float64))
        out[nonzero] = j * np.atleast_1d(self.coth_half(w[nonzero]))
        if np.any(~nonzero):
            out[~nonzero] = self._zero_frequency_power()
        return _shaped(omega, out.reshape(np.shape(omega)))

    def antisymmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        """(S(w) - S(-w)) / 2 = J(w)."""
        return self.density(omega)

    def support_limit(self, tol: float) -> Optional[float]:
        """Frequency above which the quadrature integrand is negligible.

        Returns None when the integrand must be integrated to infinity.
        """
        grid_limit = self.density.grid_limit
        if grid_limit is not None:
            if self.density.extrapolate:
                logger.warning("Quadrature of an extrapolated table stops at the grid edge")
            return grid_limit
        if self.density.tail_bound(1.0) is None:
            return None
        target = TAIL_FRACTION * tol
        omega_max = self.density.cutoff
        for _ in range(400):
            coth = 1.0 if self.zero_temperature else float(self.coth_half(omega_max))
            bound = self.density.tail_bound(omega_max)
            if bound is not None and bound * coth <= target:
                return omega_max
            omega_max *= 1.25
        raise BathError(f"no finite support limit meets tolerance {tol:.3e}")


@dataclass(frozen=True, eq=False)
class LorentzianNoise:
    """Noise power given directly as a sum of Lorentzians.

    Each (w0, gamma, r) term contributes 2 gamma r / ((w - w0)^2 + gamma^2),
    i.e. a correlation function r * exp(-(gamma + i w0) t).
    """

    terms: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        terms = tuple(tuple(float(v) for v in term) for term in self.terms)
        if not terms:
            raise BathError("lorentzian-noise needs at least one term")
        for term in terms:
            if len(term) != 3 or not all(math.isfinite(v) for v in term):
                raise BathError(f"lorentzian term must be finite (w0, gamma, r), got {term}")
            if term[1] <= 0 or term[2] < 0:
                raise BathError(f"lorentzian term needs gamma > 0 and r >= 0, got {term}")
        object.__setattr__(self, "terms", terms)

    def noise_power(self, omega: ArrayLike) -> Union[float, RealArray]:
        w = _finite_frequencies(omega)
        total = np.zeros(np.shape(w))
        for w0, gamma, r in self.terms:
            total = total + 2.0 * gamma * r / ((w - w0) ** 2 + gamma ** 2)
        return _shaped(omega, np.asarray(total, dtype=np.float64))

    def symmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        w = _finite_frequencies(omega)
        return _shaped(omega, 0.5 * (np.asarray(self.noise_power(w)) + np.asarray(self.noise_power(-w))))

    def antisymmetric_part(self, omega: ArrayLike) -> Union[float, RealArray]:
        w = _finite_frequencies(omega)
        return _shaped(omega, 0.5 * (np.asarray(self.noise_power(w)) - np.asarray(self.noise_power(-w))))

    def support_limit(self, tol: float) -> Optional[float]:
        return None

    def exact_correlation(self, t: ArrayLike) -> Union[complex, ComplexArray]:
        """Closed-form C(t) for t >= 0."""
        times = np.asarray(t, dtype=np.float64)
        total = np.zeros(np.shape(times), dtype=np.complex128)
        for w0, gamma, r in self.terms:
            total = total + r * np.exp(-(gamma + 1j * w0) * times)
        return complex(total) if np.ndim(t) == 0 else total


def _quad(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    epsabs: float,
    budget: int,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
) -> float:
    options: Dict[str, Any] = {"epsabs": epsabs, "epsrel": 0.0, "limit": budget, "full_output": 1}
    if weight is not None:
        options.update(weight=weight, wvar=wvar)
    result = integrate.quad(func, lower, upper, **options)
    if len(result) > 3:
        raise QuadratureError(
            f"quadrature on [{lower:.6g}, {upper:.6g}] did not converge "
            f"(error estimate {result[1]:.3e}): {result[3]}"
        )
    return float(result[0])


def _fourier_half(
    func: Callable[[float], float],
    kind: str,
    t: float,
    upper: Optional[float],
    target: float,
    scheme: str,
    budget: int,
) -> float:
    """Integral of func(w) * cos(w t) or sin(w t) over [0, upper]."""
    trig = math.cos if kind == "cos" else math.sin
    end = math.inf if upper is None else upper
    if t == 0:
        if kind == "sin":
            return 0.0
        return _quad(func, 0.0, end, target, budget)

    width = math.pi / (PANEL_DIVISOR * t)
    if scheme == "auto":
        scheme = "panel" if upper is not None and upper / width <= AUTO_PANEL_LIMIT else "oscillatory"

    def integrand(w: float) -> float:
        return func(w) * trig(w * t)

    if scheme == "panel":
        if upper is None:
            raise BathError("panel quadrature needs a finite support limit")
        panels = max(1, math.ceil(upper / width))
        if panels > budget:
            raise QuadratureError(
                f"panel quadrature needs {panels} panels, above the budget of {budget}"
            )
        edges = np.linspace(0.0, upper, panels + 1)
        return float(sum(
            _quad(integrand, float(a), float(b), target / panels, budget)
            for a, b in zip(edges[:-1], edges[1:])
        ))
    if scheme == "oscillatory":
        # plain Gauss-Kronrod near the origin keeps weighted rules off integrable singularities
        head_end = min(width, end)
        head = _quad(integrand, 0.0, head_end, target / 2.0, budget)
        if head_end >= end:
            return head
        tail = _quad(func, head_end, end, target / 2.0, budget, weight=kind, wvar=t)
        return head + tail
    raise BathError(f"Unknown quadrature scheme: {scheme!r}")


def correlation_quadrature(
    bath: NoiseSpectrum,
    t: float,
    tol: float = 1e-10,
    scheme: str = "auto",
    budget: int = 2000,
) -> complex:
    """Evaluate C(t) = (1/pi) * integral_0^inf [Ssym(w) cos(wt) - i Santi(w) sin(wt)] dw.

    Args:
        bath: Bath or noise spectrum to transform.
        t: Non-negative time.
        tol: Absolute tolerance on C(t).
        scheme: "panel", "oscillatory" or "auto".
        budget: Maximum subintervals (or panels) per integral.

    Returns:
        complex: C(t) within tol.

    Raises:
        BathError: For negative times, invalid tolerances or unknown schemes.
        QuadratureError: If the adaptive quadrature does not converge.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise BathError(f"correlation quadrature needs a finite t >= 0, got {t}")
    if not tol > 0:
        raise BathError(f"quadrature tolerance must be positive, got {tol}")
    upper = bath.support_limit(tol)
    # each half gets tol/2 after the 1/pi prefactor
    target = math.pi * tol * (1.0 - TAIL_FRACTION) / 2.0

    def symmetric(w: float) -> float:
        return float(bath.symmetric_part(w))

    def antisymmetric(w: float) -> float:
        return float(bath.antisymmetric_part(w))

    real = _fourier_half(symmetric, "cos", t, upper, target, scheme, budget)
    imag = _fourier_half(antisymmetric, "sin", t, upper, target, scheme, budget)
    return complex(real, -imag) / math.pi


def correlation_series(
    bath: NoiseSpectrum,
    times: ArrayLike,
    tol: float = 1e-10,
    scheme: str = "auto",
    budget: int = 2000,
) -> ComplexArray:
    """Evaluate correlation_quadrature on an array of times."""
    grid = np.atleast_1d(np.asarray(times, dtype=np.float64))
    return np.array(
        [correlation_quadrature(bath, float(t), tol, scheme, budget) for t in grid],
        dtype=np.complex128,
    )


def gibbs_state(hamiltonian: ComplexArray, beta: float) -> ComplexArray:
    """Thermal state exp(-beta H) / Z; the ground-state projector when beta is infinite."""
    energies, vectors = linalg.eigh(np.asarray(hamiltonian, dtype=np.complex128))
    shifted = energies - energies[0]
    if math.isinf(beta):
        weights = (np.abs(shifted) <= 1e-12 * max(1.0, abs(energies[0]))).astype(np.float64)
    else:
        weights = np.exp(-beta * shifted)
    weights /= weights.sum()
    return (vectors * weights) @ vectors.conj().T


def gibbs_deviation(density: ComplexArray, hamiltonian: ComplexArray, beta: float) -> float:
    """Largest difference between the populations of density and those of the Gibbs state.

    Populations are the diagonal entries in the basis hamiltonian is written in.
    """
    rho = np.asarray(density, dtype=np.complex128)
    thermal = gibbs_state(hamiltonian, beta)
    if rho.shape != thermal.shape:
        raise BathError(f"density of shape {rho.shape} does not match the Hamiltonian {thermal.shape}")
    return float(np.max(np.abs(np.diag(rho).real - np.diag(thermal).real)))


def load_tabulated(path: Union[str, Path], extrapolate: bool = False) -> SpectralDensity:
    """Load a two-column (w, J) table as a tabulated SpectralDensity.

    Args:
        path: Whitespace or comma separated file; '#' starts a comment.
        extrapolate: Allow queries beyond the largest tabulated frequency.

    Returns:
        SpectralDensity: The interpolated density.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Spectral density table not found: {path}")
    frame = pd.read_csv(path, sep=r"[,\s]+", header=None, comment="#", engine="python")
    if frame.shape[1] < 2:
        raise BathError(f"{path} must contain two columns (w, J)")
    logger.info(f"Loaded {len(frame)} spectral density samples from {path}")
    table = (frame.iloc[:, 0].to_numpy(dtype=np.float64), frame.iloc[:, 1].to_numpy(dtype=np.float64))
    return SpectralDensity(TABULATED, table=table, extrapolate=extrapolate)
