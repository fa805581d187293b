"""
Spectral analysis of the linearized delayed oscillator.

The characteristic quasi-polynomial is

    h(lam, tau) = lam**2 + alpha2*lam + 1 - alpha3*lam*exp(-lam*tau)

and everything in this module is about where its roots sit relative to the
imaginary axis: crossing frequencies and delays, the direction of crossing,
root counts by the argument principle, Newton continuation of single roots,
the stability partition of the (alpha2, alpha3) quadrant, and the bilinear
pairing used to normalize center-space eigenfunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, optimize

from .model import NormalizedModel

__all__ = [
    "MarginalRootError",
    "characteristic",
    "characteristic_dlam",
    "char_fn",
    "omega_pm",
    "CriticalDelaySet",
    "critical_delays",
    "Crossing",
    "crossing_derivatives",
    "Ordering",
    "ordering",
    "c2_gap",
    "classify_region",
    "StabilityVerdict",
    "stability",
    "count_unstable_roots",
    "RootLocus",
    "track_root",
    "newton_root",
    "rightmost_root",
    "Eigenbasis",
    "eigenfunctions",
    "bilinear_form",
    "c2_curve",
    "stability_chart",
    "critical_delay_curves",
]

TWO_PI = 2.0 * math.pi
CRITICAL_TOL = 1e-9
RESONANCE_TOL = 1e-12
TANGENT_TOL = 1e-12


class MarginalRootError(ValueError):
    """A characteristic root lies on (or numerically on) the imaginary axis."""


# --- the quasi-polynomial --------------------------------------------------------


def characteristic(lam, tau, alpha2, alpha3):
    """h(lam, tau); vectorized over ``lam``."""
    return lam * lam + alpha2 * lam + 1.0 - alpha3 * lam * np.exp(-lam * tau)


def characteristic_dlam(lam, tau, alpha2, alpha3):
    """Partial derivative of h with respect to lam."""
    e = np.exp(-lam * tau)
    return 2.0 * lam + alpha2 - alpha3 * e + alpha3 * tau * lam * e


def _dh_dtau(lam, tau, alpha2, alpha3):
    return alpha3 * lam * lam * np.exp(-lam * tau)


def _dh_dalpha3(lam, tau, alpha2, alpha3):
    return -lam * np.exp(-lam * tau)


def char_fn(lam: complex, tau: float, model: NormalizedModel) -> complex:
    """Characteristic function of ``model`` at delay ``tau``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return complex(characteristic(complex(lam), tau, model.alpha2, model.alpha3))


# --- crossing frequencies and delays ------------------------------------------


def _check_alphas(alpha2: float, alpha3: float) -> None:
    if not (alpha2 > 0 and alpha3 > 0):
        raise ValueError(f"alpha2 and alpha3 must be positive, got {alpha2!r}, {alpha3!r}")


def _is_resonant(alpha2: float, alpha3: float) -> bool:
    return abs(alpha3 - alpha2) <= RESONANCE_TOL * max(alpha2, alpha3)


def omega_pm(alpha2: float, alpha3: float) -> Optional[tuple[float, float]]:
    """Positive roots of ``w**4 + (alpha2**2 - alpha3**2 - 2) w**2 + 1``.

    Returns ``(w_plus, w_minus)`` with ``w_plus >= w_minus``, ``(1, 1)`` on the
    line alpha3 == alpha2, and None below it (no imaginary roots for any delay).
    """
    _check_alphas(alpha2, alpha3)
    if _is_resonant(alpha2, alpha3):
        return 1.0, 1.0
    if alpha3 < alpha2:
        return None
    b = alpha3 * alpha3 - alpha2 * alpha2
    s = math.sqrt(4.0 + b)
    r = math.sqrt(b)
    return 0.5 * (s + r), 0.5 * (s - r)


class Ordering(NamedTuple):
    case: str  # interleaved | tangent | swapped | resonant | subcritical_none
    m: Optional[int] = None


@dataclass(frozen=True)
class CriticalDelaySet:
    """Crossing frequencies and the delays at which roots sit on the axis."""

    alpha2: float
    alpha3: float
    omega_plus: Optional[float]
    omega_minus: Optional[float]
    branch_plus: tuple[float, ...]
    branch_minus: tuple[float, ...]
    resonant_branch: Optional[tuple[float, ...]]
    ordering_case: str
    m: Optional[int] = None

    def delays(self, branch: str) -> tuple[float, ...]:
        if branch == "plus":
            return self.branch_plus
        if branch == "minus":
            return self.branch_minus
        if branch == "resonant":
            return self.resonant_branch or ()
        raise ValueError(f"unknown branch {branch!r}")

    def omega(self, branch: str) -> float:
        if branch == "plus":
            return self.omega_plus
        if branch == "minus":
            return self.omega_minus
        return 1.0


def _tau_plus(alpha2: float, alpha3: float, j, w_plus: float):
    return (TWO_PI - math.acos(alpha2 / alpha3) + TWO_PI * np.asarray(j)) / w_plus


def _tau_minus(alpha2: float, alpha3: float, j, w_minus: float):
    return (math.acos(alpha2 / alpha3) + TWO_PI * np.asarray(j)) / w_minus


def critical_delay(alpha2: float, alpha3: float, branch: str, j: int) -> float:
    """Single critical delay tau_j on the requested branch."""
    if j < 0:
        raise ValueError("j must be non-negative")
    if branch == "resonant":
        if not _is_resonant(alpha2, alpha3):
            raise ValueError("resonant branch requires alpha3 == alpha2")
        return TWO_PI * j
    w = omega_pm(alpha2, alpha3)
    if w is None or _is_resonant(alpha2, alpha3):
        raise ValueError(f"no {branch} branch for alpha3 <= alpha2")
    if branch == "plus":
        return float(_tau_plus(alpha2, alpha3, j, w[0]))
    if branch == "minus":
        return float(_tau_minus(alpha2, alpha3, j, w[1]))
    raise ValueError(f"unknown branch {branch!r}")


def critical_delays(alpha2: float, alpha3: float, j_max: int) -> CriticalDelaySet:
    """Critical delays ``tau_j^+``, ``tau_j^-`` (or ``tau_j``) for ``j = 0..j_max``."""
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    _check_alphas(alpha2, alpha3)
    w = omega_pm(alpha2, alpha3)
    if w is None:
        return CriticalDelaySet(alpha2, alpha3, None, None, (), (), None, "subcritical_none")
    if _is_resonant(alpha2, alpha3):
        taus = tuple(TWO_PI * j for j in range(j_max + 1))
        return CriticalDelaySet(alpha2, alpha3, 1.0, 1.0, (), (), taus, "resonant")
    js = np.arange(j_max + 1)
    plus = tuple(float(t) for t in _tau_plus(alpha2, alpha3, js, w[0]))
    minus = tuple(float(t) for t in _tau_minus(alpha2, alpha3, js, w[1]))
    order = ordering(alpha2, alpha3)
    return CriticalDelaySet(alpha2, alpha3, w[0], w[1], plus, minus, None, order.case, order.m)


class Crossing(NamedTuple):
    tau: float
    omega: float
    dsigma: float
    domega: float
    d2sigma: Optional[float] = None


def crossing_derivatives(alpha2: float, alpha3: float, branch: str, j: int) -> Crossing:
    """Velocity of the root ``sigma + i*omega`` crossing the axis at ``tau_j``.

    For the resonant line alpha3 == alpha2 the first derivative of the real
    part vanishes and the second derivative is returned as ``d2sigma``.
    """
    tau = critical_delay(alpha2, alpha3, branch, j)
    if branch == "resonant":
        k = 2.0 + alpha2 * tau
        # implicit second derivative of h(lam(tau), tau) = 0 at lam = i
        return Crossing(tau, 1.0, 0.0, -alpha2 / k, -4.0 * alpha2 / k**3)
    w = omega_pm(alpha2, alpha3)[0 if branch == "plus" else 1]
    w2 = w * w
    denom = 4.0 + alpha3**2 - alpha2**2 + 2.0 * tau * alpha2 + tau * (tau * alpha3**2 + 2.0 * alpha2) * w2
    dsigma = (w2 - 1.0) * (w2 + 1.0) / denom
    domega = -w * (tau * alpha3**2 * w2 + alpha2 * w2 + alpha2) / denom
    return Crossing(tau, w, dsigma, domega)


# --- ordering and the (alpha2, alpha3) partition ------------------------------


def c2_gap(alpha2: float, alpha3: float) -> float:
    """``alpha2/alpha3 - cos(pi (1 - sqrt(b/a)))``; positive in D2, zero on C2."""
    a = 4.0 + alpha3**2 - alpha2**2
    b = alpha3**2 - alpha2**2
    return alpha2 / alpha3 - math.cos(math.pi * (1.0 - math.sqrt(b / a)))


def ordering(alpha2: float, alpha3: float) -> Ordering:
    """Relative order of the two critical-delay progressions for alpha3 > alpha2.

    ``m`` (interleaved case only) is the last index with ``tau_m^- < tau_m^+``,
    found by walking both arithmetic progressions.
    """
    _check_alphas(alpha2, alpha3)
    if _is_resonant(alpha2, alpha3):
        return Ordering("resonant")
    if alpha3 < alpha2:
        return Ordering("subcritical_none")
    g = c2_gap(alpha2, alpha3)
    if abs(g) <= TANGENT_TOL:
        return Ordering("tangent")
    if g < 0:
        return Ordering("swapped")
    w_plus, w_minus = omega_pm(alpha2, alpha3)
    m = -1
    j = 0
    # differences shrink linearly, so this terminates
    while _tau_minus(alpha2, alpha3, j, w_minus) < _tau_plus(alpha2, alpha3, j, w_plus):
        m = j
        j += 1
    return Ordering("interleaved", max(m, 0))


def classify_region(alpha2: float, alpha3: float) -> str:
    """Label of the stability partition: D1, C1, D2, C2 or D3."""
    _check_alphas(alpha2, alpha3)
    if _is_resonant(alpha2, alpha3):
        return "C1"
    if alpha3 < alpha2:
        return "D1"
    g = c2_gap(alpha2, alpha3)
    if abs(g) <= TANGENT_TOL:
        return "C2"
    return "D2" if g > 0 else "D3"


# --- stability ----------------------------------------------------------------


@dataclass(frozen=True)
class StabilityVerdict:
    """Stability of the zero solution at one (alpha2, alpha3, tau).

    ``stability_windows`` lists the delay intervals of asymptotic stability:
    the ``m + 1`` windows ``(tau_j^-, tau_j^+)`` in D2, ``[(0, inf)]`` in D1,
    empty otherwise (on C1 stability holds off the discrete set ``2*pi*j``).
    """

    region: str
    unstable_root_pairs: int
    stable: bool
    stability_windows: tuple[tuple[float, float], ...]
    marginal: bool = False
    cross_checked: bool = False


def _count_below(tau: float, first: float, gap: float) -> int:
    if tau <= first:
        return 0
    return int(math.floor((tau - first) / gap)) + 1


def _near(tau: float, first: float, gap: float) -> bool:
    j = max(0, round((tau - first) / gap))
    return abs(tau - (first + j * gap)) < CRITICAL_TOL


def _unstable_pairs(alpha2: float, alpha3: float, tau: float) -> tuple[int, bool]:
    """Pairs in the right half-plane from crossing bookkeeping, and a marginal flag."""
    if alpha3 < alpha2 and not _is_resonant(alpha2, alpha3):
        return 0, False
    if _is_resonant(alpha2, alpha3):
        return 0, _near(tau, 0.0, TWO_PI)
    w_plus, w_minus = omega_pm(alpha2, alpha3)
    tp0 = float(_tau_plus(alpha2, alpha3, 0, w_plus))
    tm0 = float(_tau_minus(alpha2, alpha3, 0, w_minus))
    gp, gm = TWO_PI / w_plus, TWO_PI / w_minus
    marginal = _near(tau, tp0, gp) or _near(tau, tm0, gm)
    # one pair is unstable at tau = 0; plus crossings add a pair, minus crossings remove one
    return 1 + _count_below(tau, tp0, gp) - _count_below(tau, tm0, gm), marginal


def stability(alpha2: float, alpha3: float, tau: float, cross_check: bool = True) -> StabilityVerdict:
    """Stability verdict for the zero solution.

    The count of unstable pairs comes from the crossing directions of each
    critical delay. With ``cross_check`` the count is compared with an
    argument-principle count and a mismatch raises ``RuntimeError``.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    region = classify_region(alpha2, alpha3)
    pairs, marginal = _unstable_pairs(alpha2, alpha3, tau)
    if region == "D1":
        windows = ((0.0, math.inf),)
    elif region == "D2":
        w_plus, w_minus = omega_pm(alpha2, alpha3)
        m = ordering(alpha2, alpha3).m
        windows = tuple(
            (float(_tau_minus(alpha2, alpha3, j, w_minus)), float(_tau_plus(alpha2, alpha3, j, w_plus)))
            for j in range(m + 1)
        )
    else:
        windows = ()
    checked = False
    if cross_check and not marginal:
        try:
            n = count_unstable_roots(NormalizedModel.from_alphas(alpha2, alpha3), tau)
        except MarginalRootError:
            pass
        else:
            if n != 2 * pairs:
                raise RuntimeError(
                    f"crossing count gives {pairs} unstable pairs but argument principle gives {n} roots "
                    f"at alpha2={alpha2}, alpha3={alpha3}, tau={tau}"
                )
            checked = True
    return StabilityVerdict(
        region=region,
        unstable_root_pairs=pairs,
        stable=(pairs == 0 and not marginal),
        stability_windows=windows,
        marginal=marginal,
        cross_checked=checked,
    )


def count_unstable_roots(
    model: NormalizedModel,
    tau: Optional[float] = None,
    *,
    eps: float = 1e-6,
    tol: float = 1e-6,
) -> int:
    """Number of characteristic roots with ``Re(lam) > eps`` by the argument principle.

    The contour is the rectangle ``[eps, R] x [-R, R]`` with
    ``R = 1 + alpha2 + alpha3``; no root with non-negative real part can have
    a larger modulus. ``h'/h`` is integrated with panel-adaptive trapezoid
    rules refined by Richardson extrapolation, panel by panel.

    Raises
    ------
    MarginalRootError
        A root lies so close to the contour that the quadrature cannot
        resolve it (in practice: a root on the imaginary axis).
    """
    tau = model.tau if tau is None else tau
    a2, a3 = model.alpha2, model.alpha3
    R = 1.0 + a2 + a3
    corners = [complex(eps, -R), complex(R, -R), complex(R, R), complex(eps, R), complex(eps, -R)]
    n0 = 16 * max(4, int(math.ceil(2.0 * R * max(tau, 1.0))))

    def ratio(z):
        return characteristic_dlam(z, tau, a2, a3) / characteristic(z, tau, a2, a3)

    total = 0j
    for z0, z1 in zip(corners[:-1], corners[1:]):
        total += _adaptive_edge(ratio, z0, z1, n0, tol=1e-9)
    w = total / (2j * math.pi)
    n = round(w.real)
    if abs(w.real - n) > tol or abs(w.imag) > tol:
        raise RuntimeError(f"winding number {w} is not integral within {tol}")
    return int(n)


def _adaptive_edge(f: Callable, z0: complex, z1: complex, n0: int, tol: float, max_panels: int = 400_000) -> complex:
    # each panel carries f at 0, 1/2, 1 of its width; trapezoid sums on 1, 2 and 4
    # subintervals are combined by two Richardson steps
    dz = z1 - z0
    left = np.linspace(0.0, 1.0, n0 + 1)[:-1]
    width = np.full(n0, 1.0 / n0)
    fl = f(z0 + dz * left)
    fm = f(z0 + dz * (left + 0.5 * width))
    fr = f(z0 + dz * (left + width))
    total = 0j
    while left.size:
        fq1 = f(z0 + dz * (left + 0.25 * width))
        fq3 = f(z0 + dz * (left + 0.75 * width))
        if not all(np.all(np.isfinite(a)) for a in (fl, fm, fr, fq1, fq3)):
            raise MarginalRootError("characteristic function vanishes on the contour")
        scale = width * dz
        t1 = 0.5 * (fl + fr) * scale
        t2 = 0.5 * t1 + 0.5 * fm * scale
        t4 = 0.5 * t2 + 0.25 * (fq1 + fq3) * scale
        s1 = (4.0 * t2 - t1) / 3.0
        s2 = (4.0 * t4 - t2) / 3.0
        err = np.abs(s2 - s1)
        ok = err <= np.maximum(tol * width, 1e-10 * np.abs(s2))
        total += np.sum(s2[ok] + (s2[ok] - s1[ok]) / 15.0)
        bad = ~ok
        if not np.any(bad):
            break
        if np.min(width[bad]) < 1e-13 or 2 * np.count_nonzero(bad) > max_panels:
            raise MarginalRootError("root within quadrature resolution of the contour")
        l, w = left[bad], 0.5 * width[bad]
        left = np.concatenate([l, l + w])
        width = np.concatenate([w, w])
        fl, fm, fr = (
            np.concatenate([fl[bad], fm[bad]]),
            np.concatenate([fq1[bad], fq3[bad]]),
            np.concatenate([fm[bad], fr[bad]]),
        )
    return total


# --- root continuation ----------------------------------------------------------


@dataclass(frozen=True)
class RootLocus:
    """Samples of one characteristic root along a parameter path."""

    parameter: str
    values: np.ndarray
    roots: np.ndarray
    branch: str = ""
    failed_at: Optional[float] = None

    @property
    def complete(self) -> bool:
        return self.failed_at is None


def newton_root(lam, tau, alpha2, alpha3, tol=1e-13, max_iter=50) -> Optional[complex]:
    """Newton iteration on h(., tau); None if it does not converge."""
    lam = complex(lam)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            d = characteristic_dlam(lam, tau, alpha2, alpha3)
            if not np.isfinite(d) or abs(d) < 1e-14:
                return None
            step = characteristic(lam, tau, alpha2, alpha3) / d
            lam -= step
            if not np.isfinite(lam):
                return None
            if abs(step) <= tol * max(1.0, abs(lam)):
                return lam
    return None


def track_root(
    model: NormalizedModel,
    start: float,
    end: float,
    lam_seed: complex,
    *,
    parameter: str = "tau",
    branch: str = "",
    max_step: Optional[float] = None,
    residual_tol: float = 1e-10,
) -> RootLocus:
    """Follow a simple root of h while ``tau`` (or ``alpha3``) moves from start to end.

    Euler predictor along ``dlam/dp = -h_p / h_lam`` with a Newton corrector;
    the step halves on corrector failure and grows after easy steps. On
    breakdown the partial locus is returned with ``failed_at`` set.
    """
    if parameter not in ("tau", "alpha3"):
        raise ValueError("parameter must be 'tau' or 'alpha3'")
    a2 = model.alpha2

    def args(p):
        return (p, a2, model.alpha3) if parameter == "tau" else (model.tau, a2, p)

    def dp(lam, p):
        t, _, a3 = args(p)
        hp = _dh_dtau(lam, t, a2, a3) if parameter == "tau" else _dh_dalpha3(lam, t, a2, a3)
        return -hp / characteristic_dlam(lam, t, a2, a3)

    if abs(characteristic(lam_seed, *args(start))) > 1e-8:
        raise ValueError("seed is not a root at the start of the path")
    lam = newton_root(lam_seed, *args(start))
    if lam is None:
        return RootLocus(parameter, np.array([start]), np.array([lam_seed]), branch, failed_at=start)
    span = end - start
    if span == 0:
        return RootLocus(parameter, np.array([start]), np.array([lam]), branch)
    h_max = abs(span) / 20.0 if max_step is None else max_step
    step = h_max
    direction = math.copysign(1.0, span)
    p = start
    values, roots = [p], [lam]
    while direction * (end - p) > 0:
        h = min(step, direction * (end - p))
        p_new = p + direction * h
        try:
            guess = lam + dp(lam, p) * direction * h
        except ZeroDivisionError:
            return RootLocus(parameter, np.array(values), np.array(roots), branch, failed_at=p)
        new = newton_root(guess, *args(p_new), max_iter=8)
        ok = (
            new is not None
            and abs(new - guess) <= 0.1 * max(abs(lam), 1.0)
            and abs(characteristic(new, *args(p_new))) <= residual_tol
            and abs(characteristic_dlam(new, *args(p_new))) > 1e-10
        )
        if not ok:
            step *= 0.5
            if step < 1e-12 * max(1.0, abs(span)):
                return RootLocus(parameter, np.array(values), np.array(roots), branch, failed_at=p)
            continue
        p, lam = p_new, new
        values.append(p)
        roots.append(lam)
        step = min(step * 1.5, h_max)
    values[-1] = end
    return RootLocus(parameter, np.array(values), np.array(roots), branch)


def rightmost_root(alpha2: float, alpha3: float, tau: float) -> complex:
    """Root of h with the largest real part, by Newton from a grid of seeds."""
    R = 1.0 + alpha2 + alpha3
    found = []
    for x in np.linspace(-3.0, R, 16):
        for y in np.linspace(0.0, R + 3.0, 24):
            r = newton_root(complex(x, y), tau, alpha2, alpha3)
            if r is not None and abs(characteristic(r, tau, alpha2, alpha3)) < 1e-10:
                found.append(r)
    if not found:
        raise RuntimeError("no characteristic root found from the seed grid")
    best = max(found, key=lambda z: z.real)
    return complex(best.real, abs(best.imag))


# --- center-space eigenfunctions and the bilinear pairing --------------------


@dataclass(frozen=True)
class Eigenbasis:
    """Eigenfunction ``q`` on [-1, 0] and adjoint ``q_star`` on [0, 1] (rescaled time)."""

    omega: float
    tau0: float
    d: complex
    q: Callable = field(repr=False)
    q_star: Callable = field(repr=False)

    def q_bar(self, theta):
        return np.conj(self.q(theta))

    def q_star_bar(self, s):
        return np.conj(self.q_star(s))


def normalization_constant(alpha3: float, tau0: float, omega: float) -> complex:
    """``d = (1 + w^2 + tau0 alpha3 w^2 exp(-i tau0 w))^-1``."""
    return 1.0 / (1.0 + omega**2 + tau0 * alpha3 * omega**2 * np.exp(-1j * tau0 * omega))


def eigenfunctions(alpha3: float, tau0: float, omega: float) -> Eigenbasis:
    """Normalized eigenfunction pair for the root ``i*tau0*omega`` of the rescaled system."""
    d = normalization_constant(alpha3, tau0, omega)
    v = np.array([1.0, 1j * omega])
    u = d * np.array([1.0, -1j * omega])

    def q(theta):
        return v * np.exp(1j * tau0 * omega * theta)

    def q_star(s):
        return u * np.exp(-1j * tau0 * omega * s)

    return Eigenbasis(omega, tau0, d, q, q_star)


def bilinear_form(psi: Callable, phi: Callable, alpha3: float, tau0: float, *, epsabs: float = 1e-12) -> complex:
    """Pairing ``psi(0) phi(0) + tau0 * int_{-1}^{0} psi(xi + 1) A2 phi(xi) dxi``.

    ``A2 = diag(0, alpha3)`` is the delayed-feedback matrix; ``psi`` returns a
    row vector on [0, 1] and ``phi`` a column vector on [-1, 0].
    """
    a2mat = np.array([[0.0, 0.0], [0.0, alpha3]])

    def integrand(xi):
        return complex(np.asarray(psi(xi + 1.0)) @ a2mat @ np.asarray(phi(xi)))

    re, err_re = integrate.quad(lambda x: integrand(x).real, -1.0, 0.0, epsabs=epsabs, epsrel=1e-12, limit=200)
    im, err_im = integrate.quad(lambda x: integrand(x).imag, -1.0, 0.0, epsabs=epsabs, epsrel=1e-12, limit=200)
    if err_re > 1e3 * epsabs or err_im > 1e3 * epsabs:
        raise RuntimeError(f"bilinear-form quadrature did not converge (error {max(err_re, err_im):.2e})")
    head = complex(np.asarray(psi(0.0)) @ np.asarray(phi(0.0)))
    return head + tau0 * complex(re, im)


# --- charts ---------------------------------------------------------------------


def c2_curve(alpha2: float) -> float:
    """``alpha3`` on the tangency curve C2 for the given ``alpha2``."""
    hi = 2.0 * alpha2 + 1.0
    while c2_gap(alpha2, hi) > 0:
        hi *= 2.0
    return float(optimize.brentq(lambda a: c2_gap(alpha2, a), alpha2 * (1.0 + 1e-12), hi, xtol=1e-14))


def stability_chart(alpha2s, alpha3s, tau: float, cross_check: bool = False) -> list[tuple]:
    """Rows ``(alpha2, alpha3, tau, region, stable, unstable_root_pairs, marginal)``."""
    rows = []
    for a2 in alpha2s:
        for a3 in alpha3s:
            v = stability(float(a2), float(a3), tau, cross_check=cross_check)
            rows.append((float(a2), float(a3), tau, v.region, v.stable, v.unstable_root_pairs, v.marginal))
    return rows


def critical_delay_curves(alpha2: float, alpha3s, j_max: int) -> list[tuple]:
    """Rows ``(alpha3, branch, j, tau, omega)`` of the critical-delay curves for ``alpha3 > alpha2``."""
    rows = []
    for a3 in alpha3s:
        a3 = float(a3)
        if a3 <= alpha2 or _is_resonant(alpha2, a3):
            continue
        cds = critical_delays(alpha2, a3, j_max)
        for j in range(j_max + 1):
            rows.append((a3, "plus", j, cds.branch_plus[j], cds.omega_plus))
            rows.append((a3, "minus", j, cds.branch_minus[j], cds.omega_minus))
    return rows
