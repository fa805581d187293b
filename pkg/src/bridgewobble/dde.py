"""
Method-of-steps integrator for the full nonlinear delayed oscillator

    x1' = x2
    x2' = -x1 - alpha2 x2 + kappa tanh(k3 x2(t - tau))

with classical RK4 at a step ``h`` dividing ``tau``. Delayed values at the
half steps come from the cubic Hermite interpolant of the stored solution
(exact history on the first interval), so the scheme stays explicit and of
order four. The exact ``tanh`` is used throughout; nothing here depends on
the normal-form algebra.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .model import NormalizedModel

__all__ = [
    "SimulationDiverged",
    "ConstantHistory",
    "SinusoidalHistory",
    "TabulatedHistory",
    "SimConfig",
    "default_config",
    "Trajectory",
    "simulate",
    "AmplitudeMeasurement",
    "measure_amplitude",
    "FrequencyMeasurement",
    "measure_frequency",
    "Section",
    "poincare_section",
    "growth_rate",
    "summarize",
    "run_sweep",
    "worker_count",
]

BLOWUP = 1e6
NOISE_FLOOR = 1e-8


class SimulationDiverged(RuntimeError):
    def __init__(self, t: float, state):
        super().__init__(f"|state| exceeded {BLOWUP:g} at t={t:.6g}")
        self.t = t
        self.state = state


# --- initial functions ------------------------------------------------------------
# plain classes rather than closures so configurations pickle into worker processes


@dataclass(frozen=True)
class ConstantHistory:
    x1: float = 0.0
    x2: float = 0.0

    def __call__(self, t: float) -> tuple[float, float]:
        return self.x1, self.x2


@dataclass(frozen=True)
class SinusoidalHistory:
    """``(A cos(w t), -A w sin(w t))``: a small-amplitude seed along an oscillation."""

    amplitude: float
    omega: float

    def __call__(self, t: float) -> tuple[float, float]:
        a, w = self.amplitude, self.omega
        return a * math.cos(w * t), -a * w * math.sin(w * t)


@dataclass(frozen=True)
class TabulatedHistory:
    """Linear interpolation of samples on ``[-tau, 0]``."""

    t: tuple
    x1: tuple
    x2: tuple

    def __call__(self, t: float) -> tuple[float, float]:
        return float(np.interp(t, self.t, self.x1)), float(np.interp(t, self.t, self.x2))


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``steps_per_delay`` fixes ``h = tau / steps_per_delay`` when ``tau > 0``;
    for ``tau == 0`` the step ``h`` must be given.
    """

    duration: float
    transient: float
    history: Callable = field(default_factory=ConstantHistory)
    steps_per_delay: int = 200
    h: Optional[float] = None
    blowup: float = BLOWUP

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not 0 <= self.transient < self.duration:
            raise ValueError("need 0 <= transient < duration")
        if self.steps_per_delay < 1:
            raise ValueError("steps_per_delay must be positive")
        if self.h is not None and not self.h > 0:
            raise ValueError("h must be positive")

    def step_for(self, tau: float) -> tuple[float, int]:
        """Step size and steps per delay; enforces ``tau / h`` integral."""
        if tau == 0:
            if self.h is None:
                raise ValueError("tau = 0 needs an explicit step h")
            return self.h, 0
        if self.h is None:
            return tau / self.steps_per_delay, self.steps_per_delay
        n = round(tau / self.h)
        if n < 1 or abs(n * self.h - tau) > 1e-9 * tau:
            raise ValueError(f"tau/h = {tau / self.h} is not an integer")
        return tau / n, n


def default_config(model: NormalizedModel, omega0: float, amplitude: float = 0.05, periods: int = 400) -> SimConfig:
    """``h = tau/200``, ``T = periods * 2 pi / omega0``, ``T0 = 0.75 T`` and a sinusoidal seed."""
    duration = periods * 2.0 * math.pi / omega0
    return SimConfig(
        duration=duration,
        transient=0.75 * duration,
        history=SinusoidalHistory(amplitude, omega0),
        steps_per_delay=200,
        h=None if model.tau > 0 else 2.0 * math.pi / omega0 / 200,
    )


# --- integration -------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid solution with cubic Hermite dense output.

    ``t``, ``x1``, ``x2`` start at ``-tau`` (history samples); ``dx2``
    holds the right-hand side at each node for ``t >= 0`` so the
    interpolant reproduces the nodes exactly and is continuous.
    """

    tau: float
    h: float
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    dx2: np.ndarray
    n_history: int

    def solution(self, t0: float = 0.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Samples with ``t >= t0``."""
        i = max(self.n_history, int(math.ceil((t0 + self.tau) / self.h - 1e-9)))
        return self.t[i:], self.x1[i:], self.x2[i:]

    def __call__(self, t) -> np.ndarray:
        """Dense state at ``t`` (array-valued) for ``0 <= t <= t_end``."""
        t = np.asarray(t, dtype=float)
        pos = (t + self.tau) / self.h
        i = np.clip(np.floor(pos).astype(int), self.n_history, len(self.t) - 2)
        s = pos - i
        y0, y1 = self.x1[i], self.x1[i + 1]
        v0, v1 = self.x2[i], self.x2[i + 1]
        a0, a1 = self.dx2[i], self.dx2[i + 1]
        return np.stack([_hermite(y0, y1, v0, v1, s, self.h), _hermite(v0, v1, a0, a1, s, self.h)])


def _hermite(y0, y1, m0, m1, s, h):
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1


def simulate(model: NormalizedModel, cfg: SimConfig) -> Trajectory:
    """Integrate from the history in ``cfg`` up to ``cfg.duration``.

    Raises
    ------
    SimulationDiverged
        When ``max(|x1|, |x2|)`` exceeds ``cfg.blowup``.
    """
    tau = model.tau
    h, n_delay = cfg.step_for(tau)
    n = int(math.ceil(cfg.duration / h - 1e-9))
    a2, kap, k3 = model.alpha2, model.kappa, model.k3
    hist = cfg.history
    size = n_delay + n + 1
    x1 = np.empty(size)
    x2 = np.empty(size)
    f2 = np.zeros(size)
    for i in range(n_delay + 1):
        x1[i], x2[i] = hist((i - n_delay) * h)
    if not (np.all(np.isfinite(x1[: n_delay + 1])) and np.all(np.isfinite(x2[: n_delay + 1]))):
        raise ValueError("history must be finite")
    tanh = math.tanh
    limit = cfg.blowup

    def accel(p, v, d):
        return -p - a2 * v + kap * tanh(k3 * d)

    base = n_delay
    f2[base] = accel(x1[base], x2[base], x2[0])
    for k in range(base, base + n):
        p, v = x1[k], x2[k]
        if n_delay == 0:
            # no delay: the feedback acts on the current stage velocity
            k1p, k1v = v, accel(p, v, v)
            v2 = v + 0.5 * h * k1v
            k2p, k2v = v2, accel(p + 0.5 * h * k1p, v2, v2)
            v3 = v + 0.5 * h * k2v
            k3p, k3v = v3, accel(p + 0.5 * h * k2p, v3, v3)
            v4 = v + h * k3v
            k4p, k4v = v4, accel(p + h * k3p, v4, v4)
        else:
            j = k - n_delay
            d0, d1 = x2[j], x2[j + 1]
            if j < base:
                dm = hist((k - base + 0.5) * h - tau)[1]
            else:
                dm = 0.5 * (d0 + d1) + 0.125 * h * (f2[j] - f2[j + 1])
            k1p, k1v = v, accel(p, v, d0)
            k2p, k2v = v + 0.5 * h * k1v, accel(p + 0.5 * h * k1p, v + 0.5 * h * k1v, dm)
            k3p, k3v = v + 0.5 * h * k2v, accel(p + 0.5 * h * k2p, v + 0.5 * h * k2v, dm)
            k4p, k4v = v + h * k3v, accel(p + h * k3p, v + h * k3v, d1)
        p_new = p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        v_new = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (abs(p_new) <= limit and abs(v_new) <= limit):
            raise SimulationDiverged((k + 1 - base) * h, (p_new, v_new))
        x1[k + 1], x2[k + 1] = p_new, v_new
        f2[k + 1] = accel(p_new, v_new, x2[k + 1 - n_delay] if n_delay else v_new)
    t = (np.arange(size) - n_delay) * h
    return Trajectory(tau=tau, h=h, t=t, x1=x1, x2=x2, dx2=f2, n_history=n_delay)


# --- measurements -----------------------------------------------------------------


def _extrema(t: np.ndarray, y: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima (or minima) refined by a parabola through three samples."""
    s = 1.0 if kind == "max" else -1.0
    z = s * y
    i = np.nonzero((z[1:-1] > z[:-2]) & (z[1:-1] >= z[2:]))[0] + 1
    if i.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = z[i - 1], z[i], z[i + 1]
    den = ym - 2 * y0 + yp
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, 0.5 * (ym - yp) / den, 0.0)
    peak = y0 - 0.25 * (ym - yp) * off
    dt = t[1] - t[0]
    return t[i] + off * dt, s * peak


@dataclass(frozen=True)
class AmplitudeMeasurement:
    amplitude: float
    settled: bool
    drift: float
    n_maxima: int

    @property
    def inconclusive(self) -> bool:
        return not self.settled


def measure_amplitude(traj: Trajectory, t0: float, n_last: int = 20, rtol: float = 0.01) -> AmplitudeMeasurement:
    """Mean of ``|x1|`` at its local extrema after ``t0``.

    The run counts as settled when the last ``n_last`` maxima spread by less
    than ``rtol`` of their mean; ``drift`` is that relative spread. Below the
    noise floor the amplitude is reported as exactly 0.
    """
    t, x1, _ = traj.solution(t0)
    if t.size < 3 or np.max(np.abs(x1)) < NOISE_FLOOR:
        return AmplitudeMeasurement(0.0, True, 0.0, 0)
    _, mx = _extrema(t, x1, "max")
    _, mn = _extrema(t, x1, "min")
    if mx.size < 2 or mn.size < 1:
        return AmplitudeMeasurement(float(np.max(np.abs(x1))), False, math.inf, int(mx.size))
    amp = float(np.mean(np.abs(np.concatenate([mx, mn]))))
    if amp < NOISE_FLOOR:
        return AmplitudeMeasurement(0.0, True, 0.0, int(mx.size))
    last = mx[-n_last:]
    drift = float((last.max() - last.min()) / abs(last.mean()))
    return AmplitudeMeasurement(amp, bool(mx.size >= n_last and drift < rtol), drift, int(mx.size))


@dataclass(frozen=True)
class FrequencyMeasurement:
    omega: float
    omega_spectral: float
    agree: bool
    zero_amplitude: bool = False


def measure_frequency(traj: Trajectory, t0: float, rtol: float = 0.01) -> FrequencyMeasurement:
    """Angular frequency of ``x1`` from zero up-crossings, checked against the spectral peak."""
    t, x1, _ = traj.solution(t0)
    if t.size < 3 or np.max(np.abs(x1)) < NOISE_FLOOR:
        return FrequencyMeasurement(0.0, 0.0, False, True)
    i = np.nonzero((x1[:-1] < 0) & (x1[1:] >= 0))[0]
    if i.size < 2:
        return FrequencyMeasurement(0.0, 0.0, False, True)
    tc = t[i] - x1[i] * (t[i + 1] - t[i]) / (x1[i + 1] - x1[i])
    omega = 2.0 * math.pi * (tc.size - 1) / (tc[-1] - tc[0])
    dt = t[1] - t[0]
    y = (x1 - x1.mean()) * np.hanning(x1.size)
    nfft = 1 << int(math.ceil(math.log2(8 * x1.size)))
    spec = np.abs(np.fft.rfft(y, nfft))
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1:
        a, b, c = np.log(spec[k - 1 : k + 2] + 1e-300)
        k = k + 0.5 * (a - c) / (a - 2 * b + c)
    omega_fft = 2.0 * math.pi * k / (nfft * dt)
    return FrequencyMeasurement(float(omega), float(omega_fft), bool(abs(omega - omega_fft) <= rtol * omega))


@dataclass(frozen=True)
class Section:
    """Section points ``(x1, x2(t - tau))`` at up-crossings of the phase condition."""

    points: np.ndarray
    diameter: float
    insufficient: bool


def poincare_section(
    traj: Trajectory, t0: float, phase: Optional[Callable] = None, min_points: int = 5
) -> Section:
    """Sample the attractor where ``phase(x1, x2)`` crosses zero upward.

    The default phase is ``x2``, i.e. the minima of the displacement.
    """
    t, x1, x2 = traj.solution(t0)
    g = x2 if phase is None else np.asarray(phase(x1, x2))
    if t.size and np.max(np.abs(x1)) < NOISE_FLOOR:
        pts = np.zeros((1, 2))
        return Section(pts, 0.0, False)
    i = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    if i.size < min_points:
        return Section(np.empty((0, 2)), math.nan, True)
    tc = t[i] - g[i] * (t[i + 1] - t[i]) / (g[i + 1] - g[i])
    now = traj(tc)
    lagged = traj(tc - traj.tau) if np.all(tc - traj.tau >= 0) else now
    pts = np.column_stack([now[0], lagged[1]])
    diam = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1))) if len(pts) < 4000 else float(
        np.hypot(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
    )
    return Section(pts, diam, False)


def growth_rate(traj: Trajectory, t_start: float, t_end: float) -> float:
    """Exponential rate of the oscillation envelope from a log-linear fit to ``|x1|`` peaks."""
    t, x1, _ = traj.solution(t_start)
    keep = t <= t_end
    t, x1 = t[keep], x1[keep]
    tm, pm = _extrema(t, np.abs(x1), "max")
    good = pm > 0
    if np.count_nonzero(good) < 3:
        raise ValueError("too few envelope peaks for a growth-rate fit")
    slope, _ = np.polyfit(tm[good], np.log(pm[good]), 1)
    return float(slope)


# --- sweeps -------------------------------------------------------------------------


def summarize(traj: Trajectory, t0: float) -> dict:
    amp = measure_amplitude(traj, t0)
    freq = measure_frequency(traj, t0)
    return {
        "amplitude": amp.amplitude,
        "settled": amp.settled,
        "drift": amp.drift,
        "omega": freq.omega,
        "omega_spectral": freq.omega_spectral,
        "frequency_agree": freq.agree,
    }


def worker_count(requested: Optional[int] = None) -> int:
    """Worker processes for sweeps, capped by ``BRIDGEWOBBLE_THREADS`` when set."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("BRIDGEWOBBLE_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"BRIDGEWOBBLE_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def _run_one(job) -> dict:
    model, cfg = job
    try:
        traj = simulate(model, cfg)
    except SimulationDiverged as exc:
        return {"diverged": True, "t_fail": exc.t}
    out = summarize(traj, cfg.transient)
    out["diverged"] = False
    return out


def run_sweep(jobs: Sequence[tuple[NormalizedModel, SimConfig]], workers: Optional[int] = None) -> list[dict]:
    """Simulate independent runs in a process pool; results keep the job order."""
    n = worker_count(workers)
    if n == 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
        return list(pool.map(_run_one, jobs))
