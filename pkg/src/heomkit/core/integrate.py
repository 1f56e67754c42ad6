"""Explicit Runge-Kutta integrators for the linear hierarchy equations."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from heomkit.core.errors import NumericalError

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]
Observer = Callable[[float, np.ndarray], None]

# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(NumericalError):
    """Raised on non-finite states or when the adaptive step underflows."""
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    Attributes:
        method: "rk4" (fixed step) or "rk45" (adaptive Dormand-Prince).
        step: Fixed step, or the initial step for rk45. None selects a default.
        rtol: Relative tolerance for rk45.
        atol: Absolute tolerance for rk45.
        min_step: Smallest step rk45 may take before giving up.
    """

    method: str = "rk4"
    step: Optional[float] = None
    rtol: float = 1e-8
    atol: float = 1e-10
    min_step: float = 1e-9

    def __post_init__(self) -> None:
        if self.method not in ("rk4", "rk45"):
            raise IntegrationError(f"Unknown integrator method: {self.method!r}")
        if self.step is not None and not self.step > 0:
            raise IntegrationError(f"step must be positive, got {self.step}")
        if not (self.rtol > 0 and self.atol > 0 and self.min_step > 0):
            raise IntegrationError("rtol, atol and min_step must be positive")

    def with_step(self, step: float) -> "IntegratorConfig":
        return IntegratorConfig(self.method, step, self.rtol, self.atol, self.min_step)


def rk4_step(rhs: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """Single classical fourth-order Runge-Kutta step."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def dopri_step(rhs: Rhs, t: float, y: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Dormand-Prince step returning the fifth-order solution and the error estimate."""
    stages = []
    for c, row in zip(_DP_C, _DP_A):
        increment = sum((a * k for a, k in zip(row, stages) if a != 0.0), np.zeros_like(y))
        stages.append(rhs(t + c * h, y + h * increment))
    y5 = y + h * sum((b * k for b, k in zip(_DP_B5, stages) if b != 0.0), np.zeros_like(y))
    y4 = y + h * sum((b * k for b, k in zip(_DP_B4, stages) if b != 0.0), np.zeros_like(y))
    return y5, y5 - y4


def _check_finite(y: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"state became non-finite at t={t:.6g}")


def _fixed(rhs: Rhs, y: np.ndarray, t0: float, t1: float, h: float, check: bool) -> np.ndarray:
    steps = max(1, math.ceil((t1 - t0) / h - 1e-9))
    h_eff = (t1 - t0) / steps
    for n in range(steps):
        y = rk4_step(rhs, t0 + n * h_eff, y, h_eff)
        if check:
            _check_finite(y, t0 + (n + 1) * h_eff)
    return y


def _adaptive(rhs: Rhs, y: np.ndarray, t0: float, t1: float, h: float,
              config: IntegratorConfig) -> Tuple[np.ndarray, float]:
    t = t0
    while t < t1:
        last = h >= t1 - t
        trial = t1 - t if last else h
        y_new, error = dopri_step(rhs, t, y, trial)
        scale = config.atol + config.rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = float(np.max(np.abs(error) / scale)) if y.size else 0.0
        if not math.isfinite(ratio):
            raise IntegrationError(f"state became non-finite at t={t:.6g}")
        if ratio <= 1.0:
            t = t1 if last else t + trial
            y = y_new
            if not last:
                h = trial * (MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2))
        else:
            h = trial * max(MIN_FACTOR, SAFETY * ratio ** -0.2)
            if h < config.min_step:
                raise IntegrationError(
                    f"adaptive step underflow at t={t:.6g} (step {h:.3e} < {config.min_step:.3e})"
                )
    return y, h


def integrate(
    rhs: Rhs,
    y0: np.ndarray,
    sample_times: Sequence[float],
    config: IntegratorConfig,
    observer: Optional[Observer] = None,
    check_finite: bool = True,
) -> np.ndarray:
    """Integrate dy/dt = rhs(t, y) through increasing sample times.

    The observer is called with (t, y) at every sample time, including the first.

    Args:
        rhs: Right-hand side.
        y0: State at sample_times[0].
        sample_times: Non-decreasing output times.
        config: Integrator settings; config.step must be set for rk4.
        observer: Callback receiving each sampled state.
        check_finite: Raise as soon as a fixed-step state becomes non-finite.

    Returns:
        np.ndarray: State at the last sample time.

    Raises:
        IntegrationError: On non-finite states, step underflow or a bad time grid.
    """
    times = np.asarray(sample_times, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0:
        raise IntegrationError("sample_times must be a non-empty one-dimensional sequence")
    if np.any(np.diff(times) < 0):
        raise IntegrationError("sample_times must be non-decreasing")
    step = config.step
    if step is None:
        raise IntegrationError("integrator step is not set")

    y = np.array(y0, dtype=np.complex128, copy=True)
    if observer is not None:
        observer(float(times[0]), y)
    h = step
    for t0, t1 in zip(times[:-1], times[1:]):
        if t1 > t0:
            if config.method == "rk4":
                y = _fixed(rhs, y, float(t0), float(t1), step, check_finite)
            else:
                y, h = _adaptive(rhs, y, float(t0), float(t1), h, config)
        if observer is not None:
            observer(float(t1), y)
    return y


def uniform_times(t_final: float, interval: float, t0: float = 0.0) -> np.ndarray:
    """Sample grid t0, t0 + interval, ..., ending exactly at t_final."""
    if not t_final >= t0:
        raise IntegrationError(f"t_final must not precede t0, got {t_final} < {t0}")
    if not interval > 0:
        raise IntegrationError(f"sample interval must be positive, got {interval}")
    count = max(1, int(round((t_final - t0) / interval)))
    if t_final == t0:
        return np.array([t0])
    return np.linspace(t0, t_final, count + 1)
