"""
Hopf normal forms and limit-cycle predictions.

Two unfoldings are covered:

* delay as parameter, ``mu = tau - tau_j^{+/-}`` at ``alpha3 > alpha2``;
* gain as parameter, ``mu = alpha3 - alpha2`` at the resonant delays
  ``tau0 = 2*pi*j``.

The center-manifold reduction is carried out in rescaled time ``s = t/tau``
where the delay is 1, and every prediction is converted back to the time of
the normalized model at the boundary. With the cubic normal form
``z' = lam(mu) z + f z |z|^2`` the cycle has ``|z|^2 = -Re(lam) / Re f`` and
the displacement amplitude is ``2|z|``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import spectrum
from .spectrum import TWO_PI

__all__ = [
    "DoubleHopfCoincidence",
    "HopfPoint",
    "hopf_in_tau",
    "hopf_in_alpha",
    "predicted_cycle_tau",
    "predicted_cycle_alpha",
    "amplitude_curve",
    "trust_bound",
]


class DoubleHopfCoincidence(ValueError):
    """Requested Hopf value is also a critical delay of the other branch."""


@dataclass(frozen=True)
class HopfPoint:
    """One Hopf value with its normal-form data.

    Attributes
    ----------
    case_tag : str
        ``tau_branch_plus``, ``tau_branch_minus`` or ``alpha_at_resonance``.
    dsigma : float
        Crossing speed of the real part in the time of the normalized model
        (per unit delay or per unit ``alpha3``).
    dsigma_rescaled : float
        The same speed in rescaled time, ``tau0 * dsigma``.
    domega : float
        Crossing speed of the imaginary part (normalized-model time).
    d0 : complex
        Eigenfunction normalization; real ``D0`` for the resonant case.
    dc : float
        ``(1 + w^2 + alpha2 tau0 w^2)^2 + tau0^2 w^2 (w^2 - 1)^2``; equals
        ``|1/d0|^2`` on the delay branches.
    f21 : complex
        Cubic normal-form coefficient in rescaled time.
    """

    case_tag: str
    alpha2: float
    alpha3: float
    kappa: float
    k3: float
    j: int
    tau0: float
    omega0: float
    d0: complex
    dc: float
    dsigma: float
    dsigma_rescaled: float
    domega: float
    f21: complex
    criticality: str
    cycle_stability: str
    mu_max: float

    @property
    def alpha4(self) -> float:
        return -self.kappa * self.k3**3 / 3.0

    @property
    def amplitude_coefficient(self) -> float:
        """``c`` in ``a(mu) = c * sqrt(|mu|)``."""
        return 2.0 * math.sqrt(abs(self.dsigma_rescaled / self.f21.real))

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("d0", "f21"):
            z = out.pop(key)
            out[key] = {"re": z.real, "im": z.imag}
        out["amplitude_coefficient"] = self.amplitude_coefficient
        return out


def trust_bound(alpha2: float, alpha3: float, tau0: float, j_max: int = 64) -> float:
    """One tenth of the distance from ``tau0`` to the nearest other critical delay."""
    cds = spectrum.critical_delays(alpha2, alpha3, j_max)
    others = [t for t in (*cds.branch_plus, *cds.branch_minus) if abs(t - tau0) > spectrum.CRITICAL_TOL]
    return 0.1 * min(abs(t - tau0) for t in others)


def _cubic_closed_form(alpha2, alpha3, alpha4, tau0, w, dc) -> complex:
    # real part carries alpha2 (1 + w^2); the projection below is the independent route
    pref = 3.0 * tau0 * alpha4 / (alpha3 * dc)
    re = pref * w**4 * (alpha2 * (1.0 + w**2) + tau0 * alpha3**2 * w**2)
    im = pref * w**3 * (w**2 + 1.0) * (w**2 - 1.0)
    return complex(re, im)


def hopf_in_tau(alpha2: float, alpha3: float, branch: str, j: int, k3: float = 1.0) -> HopfPoint:
    """Hopf point at ``tau0 = tau_j^{branch}`` with delay as bifurcation parameter.

    The cubic coefficient is obtained by projecting ``alpha4 * x2(t - tau)**3``
    on the adjoint eigenvector and checked against its closed form.

    Raises
    ------
    DoubleHopfCoincidence
        When ``tau0`` is also a critical delay of the opposite branch.
    """
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    if not alpha3 > alpha2 > 0:
        raise ValueError("delay-branch Hopf points need alpha3 > alpha2 > 0")
    if spectrum._is_resonant(alpha2, alpha3):
        raise ValueError("alpha3 == alpha2 is the resonant case; use hopf_in_alpha")
    cross = spectrum.crossing_derivatives(alpha2, alpha3, branch, j)
    tau0, w = cross.tau, cross.omega
    other = "minus" if branch == "plus" else "plus"
    w_other = spectrum.omega_pm(alpha2, alpha3)[1 if branch == "plus" else 0]
    first = spectrum.critical_delay(alpha2, alpha3, other, 0)
    k = max(0, round((tau0 - first) * w_other / TWO_PI))
    if abs(spectrum.critical_delay(alpha2, alpha3, other, k) - tau0) < spectrum.CRITICAL_TOL:
        raise DoubleHopfCoincidence(
            f"tau0={tau0} is a double-Hopf point ({branch} j={j}, {other} j={k}); use double_hopf"
        )
    kappa = alpha3 / k3
    alpha4 = -kappa * k3**3 / 3.0
    d0 = complex(spectrum.normalization_constant(alpha3, tau0, w))
    dc = (1.0 + w**2 + alpha2 * tau0 * w**2) ** 2 + tau0**2 * w**2 * (w**2 - 1.0) ** 2
    slope_r = tau0 * w**2 * (w**2 - 1.0) * (w**2 + 1.0) / dc
    # x2(s - 1) on the center space is i w z exp(-i tau0 w) + c.c.; its cube's z^2 conj(z)
    # part, weighted by the second component of conj(q*(0)), gives the coefficient
    f21 = 3.0 * tau0 * alpha4 * w**4 * d0 * np.exp(-1j * tau0 * w)
    closed = _cubic_closed_form(alpha2, alpha3, alpha4, tau0, w, dc)
    if abs(f21 - closed) > 1e-10 * max(1.0, abs(f21)):
        raise RuntimeError(f"cubic coefficient routes disagree: {f21} vs {closed}")
    if abs(slope_r - tau0 * cross.dsigma) > 1e-10 * max(1.0, abs(slope_r)):
        raise RuntimeError("crossing slope inconsistent with the characteristic-root derivative")
    order = spectrum.ordering(alpha2, alpha3)
    stable = order.case == "interleaved" and j <= order.m
    return HopfPoint(
        case_tag=f"tau_branch_{branch}",
        alpha2=alpha2,
        alpha3=alpha3,
        kappa=kappa,
        k3=k3,
        j=j,
        tau0=tau0,
        omega0=w,
        d0=d0,
        dc=dc,
        dsigma=cross.dsigma,
        dsigma_rescaled=slope_r,
        domega=cross.domega,
        f21=complex(f21),
        criticality="supercritical" if cross.dsigma > 0 else "subcritical",
        cycle_stability="stable" if stable else "unstable",
        mu_max=trust_bound(alpha2, alpha3, tau0, j_max=j + 64),
    )


def predicted_cycle_tau(h: HopfPoint, mu: float, warn: bool = True) -> tuple[float, float]:
    """Leading-order amplitude of ``x`` and angular frequency at ``tau = tau0 + mu``.

    The frequency keeps the linear drift of the critical root and the
    amplitude-dependent shift ``-Re(lam) Im f / Re f`` of the normal form,
    divided by ``tau0 + mu`` to undo the time rescaling.
    """
    if not h.case_tag.startswith("tau_branch"):
        raise ValueError("use predicted_cycle_alpha for the resonant case")
    if mu == 0:
        return 0.0, h.omega0
    growth = h.dsigma_rescaled * mu
    r2 = -growth / h.f21.real
    if r2 < 0:
        side = "positive" if h.dsigma > 0 else "negative"
        raise ValueError(f"no cycle for mu={mu}: the {h.case_tag} cycle exists for {side} mu")
    if warn and abs(mu) > h.mu_max:
        warnings.warn(f"|mu|={abs(mu)} exceeds the amplitude-law trust bound {h.mu_max:.4g}", stacklevel=2)
    amplitude = 2.0 * math.sqrt(r2)
    theta = h.tau0 * h.omega0 + mu * (h.omega0 + h.tau0 * h.domega) + h.f21.imag * r2
    return amplitude, theta / (h.tau0 + mu)


def hopf_in_alpha(alpha2: float, j: int, k3: float = 1.0, kappa: Optional[float] = None) -> HopfPoint:
    """Hopf point at ``alpha3 = alpha2`` with ``tau = 2*pi*j`` held fixed.

    ``kappa`` defaults to the critical gain ``alpha2 / k3``; it only enters
    through ``alpha4`` in the cubic coefficient.
    """
    if j < 1:
        raise ValueError("j must be at least 1 (tau = 0 carries no delay)")
    if alpha2 <= 0 or k3 <= 0:
        raise ValueError("alpha2 and k3 must be positive")
    kappa = alpha2 / k3 if kappa is None else kappa
    tau0 = TWO_PI * j
    big_d0 = 1.0 / (2.0 + tau0 * alpha2)
    alpha4 = -kappa * k3**3 / 3.0
    f21 = complex(3.0 * tau0 * alpha4 * big_d0, 0.0)
    return HopfPoint(
        case_tag="alpha_at_resonance",
        alpha2=alpha2,
        alpha3=alpha2,
        kappa=kappa,
        k3=k3,
        j=j,
        tau0=tau0,
        omega0=1.0,
        d0=complex(big_d0, 0.0),
        dc=(2.0 + alpha2 * tau0) ** 2,
        dsigma=big_d0,
        dsigma_rescaled=tau0 * big_d0,
        domega=0.0,
        f21=f21,
        criticality="supercritical",
        cycle_stability="stable",
        mu_max=0.1 * alpha2,
    )


def predicted_cycle_alpha(h: HopfPoint, mu: float, warn: bool = True) -> tuple[float, float]:
    """Amplitude ``2 sqrt(mu / (kappa k3^3))`` and frequency 1 at ``alpha3 = alpha2 + mu``.

    ``kappa`` is the gain at the perturbed point, ``(alpha2 + mu) / k3``.
    """
    if h.case_tag != "alpha_at_resonance":
        raise ValueError("use predicted_cycle_tau for delay branches")
    if mu < 0:
        raise ValueError("the resonant-case cycle exists for mu > 0 only")
    if warn and mu > h.mu_max:
        warnings.warn(f"mu={mu} exceeds the amplitude-law trust bound {h.mu_max:.4g}", stacklevel=2)
    kappa = (h.alpha2 + mu) / h.k3
    return 2.0 * math.sqrt(mu / (kappa * h.k3**3)), 1.0


def amplitude_curve(h: HopfPoint, mus) -> np.ndarray:
    """Rows ``(mu, amplitude, omega)`` over ``mus``; no trust-bound warnings."""
    rows = []
    for mu in np.asarray(mus, dtype=float):
        if h.case_tag == "alpha_at_resonance":
            a, w = predicted_cycle_alpha(h, mu, warn=False)
        else:
            a, w = predicted_cycle_tau(h, mu, warn=False)
        rows.append((mu, a, w))
    return np.array(rows)
