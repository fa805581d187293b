"""
Double-Hopf points, where a plus-branch and a minus-branch critical delay
coincide, and the unfolding of the resulting codimension-two singularity.

The unfolding parameters are ``mu = (mu1, mu2) = (tau - tau0, alpha3 - alpha30)``.
All normal-form coefficients live in rescaled time (delay 1). With
``rho_j = -a_jj r_j**2`` the cubic amplitude system becomes

    rho1' = 2 rho1 (sigma1 - rho1 - delta1 rho2)
    rho2' = 2 rho2 (sigma2 - delta2 rho1 - rho2)

with ``delta1 = a12/a22`` and ``delta2 = a21/a11`` so that
``delta1 * delta2 = 4`` holds identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from . import spectrum

__all__ = [
    "DoubleHopfNotFound",
    "ModelInconsistency",
    "DoubleHopfPoint",
    "find_double_hopf",
    "scan_double_hopf",
    "check_nonresonance",
    "crossing_identity_residuals",
    "CubicCoeffs",
    "cubic_coeffs",
    "LinearUnfolding",
    "linear_unfolding",
    "deltas",
    "classify_sigma_region",
    "amplitude_flow",
    "integrate_amplitude_flow",
    "AmplitudeEquilibria",
    "equilibria",
    "predicted_attractors",
    "KamReport",
    "kam_nondegeneracy",
    "UnfoldingCoeffs",
    "unfolding",
]

FORBIDDEN_GAPS = (1.0 / 6.0, 0.5, 4.0 / 3.0, 9.0 / 4.0, 16.0 / 5.0)
REGION_TOL = 1e-9


class DoubleHopfNotFound(ValueError):
    pass


class ModelInconsistency(RuntimeError):
    """A sign or identity that the analysis relies on does not hold."""


@dataclass(frozen=True)
class DoubleHopfPoint:
    k: int
    l: int
    alpha2: float
    alpha30: float
    tau0: float
    omega1: float
    omega2: float
    d1: complex
    d2: complex
    nonresonant: bool
    residuals: tuple[float, float] = (0.0, 0.0)

    @property
    def gap(self) -> float:
        """``alpha30**2 - alpha2**2``."""
        return self.alpha30**2 - self.alpha2**2

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "alpha2": self.alpha2,
            "alpha30": self.alpha30,
            "tau0": self.tau0,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "d1": {"re": self.d1.real, "im": self.d1.imag},
            "d2": {"re": self.d2.real, "im": self.d2.imag},
            "nonresonant": bool(self.nonresonant),
            "residuals": list(self.residuals),
        }


def _branch_gap(alpha2: float, alpha3: float, k: int, l: int) -> float:
    w_plus, w_minus = spectrum.omega_pm(alpha2, alpha3)
    return float(spectrum._tau_plus(alpha2, alpha3, k, w_plus) - spectrum._tau_minus(alpha2, alpha3, l, w_minus))


def _scan_brackets(alpha2: float, k: int, l: int, lo: float, hi: float, step: float) -> list[tuple[float, float]]:
    grid = np.arange(lo, hi + 0.5 * step, step)
    grid = grid[grid > alpha2 * (1.0 + 1e-9)]
    values = np.array([_branch_gap(alpha2, a, k, l) for a in grid])
    idx = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    return [(float(grid[i]), float(grid[i + 1])) for i in idx]


def _make_point(alpha2: float, alpha30: float, k: int, l: int) -> DoubleHopfPoint:
    w1, w2 = spectrum.omega_pm(alpha2, alpha30)
    tau0 = spectrum.critical_delay(alpha2, alpha30, "plus", k)
    d1 = complex(spectrum.normalization_constant(alpha30, tau0, w1))
    d2 = complex(spectrum.normalization_constant(alpha30, tau0, w2))
    res = (
        float(abs(spectrum.characteristic(1j * w1, tau0, alpha2, alpha30))),
        float(abs(spectrum.characteristic(1j * w2, tau0, alpha2, alpha30))),
    )
    return DoubleHopfPoint(
        k=k,
        l=l,
        alpha2=alpha2,
        alpha30=alpha30,
        tau0=tau0,
        omega1=w1,
        omega2=w2,
        d1=d1,
        d2=d2,
        nonresonant=check_nonresonance(alpha30**2 - alpha2**2),
        residuals=res,
    )


def find_double_hopf(
    alpha2: float,
    k: int,
    l: int,
    alpha3_bracket: Optional[tuple[float, float]] = None,
    step: float = 1e-2,
) -> DoubleHopfPoint:
    """Locate ``alpha30`` with ``tau_k^+(alpha30) = tau_l^-(alpha30)``.

    Without a bracket, ``alpha3`` in ``(alpha2, alpha2 + 5]`` is scanned with
    ``step`` and the first sign change is refined.

    Raises
    ------
    DoubleHopfNotFound
        No sign change of ``tau_k^+ - tau_l^-`` in the bracket.
    """
    if alpha2 <= 0 or k < 0 or l < 0:
        raise ValueError("need alpha2 > 0 and non-negative indices")
    if alpha3_bracket is None:
        brackets = _scan_brackets(alpha2, k, l, alpha2, alpha2 + 5.0, step)
    else:
        lo, hi = sorted(alpha3_bracket)
        lo = max(lo, alpha2 * (1.0 + 1e-9))
        if hi <= lo:
            raise DoubleHopfNotFound("bracket lies in alpha3 <= alpha2")
        g_lo, g_hi = _branch_gap(alpha2, lo, k, l), _branch_gap(alpha2, hi, k, l)
        brackets = [(lo, hi)] if g_lo * g_hi < 0 else _scan_brackets(alpha2, k, l, lo, hi, min(step, (hi - lo) / 50))
    if not brackets:
        raise DoubleHopfNotFound(f"tau_{k}^+ - tau_{l}^- does not change sign for alpha2={alpha2}")
    lo, hi = brackets[0]
    alpha30 = optimize.brentq(lambda a: _branch_gap(alpha2, a, k, l), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(_branch_gap(alpha2, alpha30, k, l)) > 1e-12 * max(1.0, spectrum.critical_delay(alpha2, alpha30, "plus", k)):
        raise DoubleHopfNotFound("refinement did not reach |tau_k^+ - tau_l^-| < 1e-12")
    return _make_point(alpha2, alpha30, k, l)


def scan_double_hopf(alpha2: float, k_max: int = 6, l_max: int = 6, step: float = 1e-2) -> list[DoubleHopfPoint]:
    """All intersections ``tau_k^+ = tau_l^-`` with ``alpha3`` in ``(alpha2, alpha2 + 5]``."""
    points = []
    for k in range(k_max + 1):
        for l in range(l_max + 1):
            for lo, hi in _scan_brackets(alpha2, k, l, alpha2, alpha2 + 5.0, step):
                points.append(find_double_hopf(alpha2, k, l, (lo, hi)))
    return points


def check_nonresonance(pt, tol: float = 1e-6) -> bool:
    """True unless ``alpha30**2 - alpha2**2`` is within ``tol`` of a low-order resonance.

    Accepts a DoubleHopfPoint or the value ``alpha30**2 - alpha2**2`` itself.
    """
    gap = pt.gap if isinstance(pt, DoubleHopfPoint) else float(pt)
    return all(abs(gap - g) > tol for g in FORBIDDEN_GAPS)


def crossing_identity_residuals(pt: DoubleHopfPoint) -> dict[str, float]:
    """Residuals of the algebraic identities tying the two frequencies together."""
    a2, a3, t0 = pt.alpha2, pt.alpha30, pt.tau0
    w1, w2 = pt.omega1, pt.omega2
    b, a = a3**2 - a2**2, 4.0 + a3**2 - a2**2
    root = math.sqrt(b * a)
    p1 = 1.0 + w1**2 + t0 * a2 * w1**2
    p2 = 1.0 + w2**2 + t0 * a2 * w2**2
    return {
        "omega1_sq": w1**2 - 0.5 * (2.0 + b + root),
        "omega2_sq": w2**2 - 0.5 * (2.0 + b - root),
        "product": w1 * w2 - 1.0,
        "sum": w1 + w2 - math.sqrt(a),
        "difference": w1 - w2 - math.sqrt(b),
        "sum_sq": w1**2 + w2**2 - (2.0 + b),
        "difference_sq": w1**2 - w2**2 - root,
        "cross1": (w1**2 - 1.0) * p2 - (w1**2 - w2**2 + t0 * a2 * (1.0 - w2**2)),
        "cross2": (w2**2 - 1.0) * p1 - (w2**2 - w1**2 + t0 * a2 * (1.0 - w1**2)),
        "cross_product": p1 * p2 - (1.0 + (1.0 + t0 * a2) ** 2 + (1.0 + t0 * a2) * (w1**2 + w2**2)),
    }


# --- cubic coefficients ---------------------------------------------------------


def _betas(pt: DoubleHopfPoint) -> np.ndarray:
    t0, a2 = pt.tau0, pt.alpha2
    return np.array(
        [(1.0 + w**2 + t0 * a2 * w**2) ** 2 + t0**2 * w**2 * (w**2 - 1.0) ** 2 for w in (pt.omega1, pt.omega2)]
    )


def _cubic_table(pt: DoubleHopfPoint, alpha4: float) -> dict[str, complex]:
    """Second components of the cubic Taylor coefficients ``F_k`` of the projected nonlinearity."""
    t0, w1, w2 = pt.tau0, pt.omega1, pt.omega2
    a1 = 1j * t0 * alpha4 * w1**3
    a2 = 3j * t0 * alpha4 * w1**2 * w2
    a3 = 3j * t0 * alpha4 * w1 * w2**2
    a4 = 1j * t0 * alpha4 * w2**3

    def e(x):
        return np.exp(-1j * t0 * x)

    return {
        "3000": -a1 * e(3 * w1),
        "2100": 3 * a1 * e(w1),
        "2010": -a2 * e(2 * w1 + w2),
        "2001": a2 * e(2 * w1 - w2),
        "1110": 2 * a2 * e(w2),
        "1020": -a3 * e(w1 + 2 * w2),
        "1011": 2 * a3 * e(w1),
        "1002": -a3 * e(w1 - 2 * w2),
        "0030": -a4 * e(3 * w2),
        "0021": 3 * a4 * e(w2),
    }


def _cubic_by_expansion(pt: DoubleHopfPoint, alpha4: float) -> dict[str, complex]:
    """Same table by expanding ``alpha4 tau0 y**3`` with ``y = x2(-1)`` on the center space."""
    t0, w1, w2 = pt.tau0, pt.omega1, pt.omega2
    # y = u z1 + conj(u) conj(z1) + v z2 + conj(v) conj(z2)
    u = 1j * w1 * np.exp(-1j * t0 * w1)
    v = 1j * w2 * np.exp(-1j * t0 * w2)
    basis = (u, np.conj(u), v, np.conj(v))
    out = {}
    for key in _cubic_table(pt, alpha4):
        ks = [int(c) for c in key]
        multinomial = math.factorial(3) / math.prod(math.factorial(n) for n in ks)
        out[key] = t0 * alpha4 * multinomial * math.prod(b**n for b, n in zip(basis, ks))
    return out


@dataclass(frozen=True)
class CubicCoeffs:
    """Cubic normal-form data at ``mu = 0``.

    ``p[0, 0], p[0, 1]`` multiply ``z1|z1|^2`` and ``z1|z2|^2`` in the first
    equation; ``p[1, 0], p[1, 1]`` multiply ``z2|z1|^2`` and ``z2|z2|^2`` in the
    second, so that ``a = Re p`` matches the amplitude equations row by row.
    """

    F: dict = field(repr=False)
    p: np.ndarray
    a: np.ndarray
    q: np.ndarray
    a_closed: np.ndarray
    q_closed: np.ndarray
    beta: np.ndarray
    table_residual: float
    path_residual: float
    omegas: tuple[float, float] = (1.0, 1.0)

    @property
    def ratio_residuals(self) -> dict[str, float]:
        return _ratio_residuals(self.a, self.q, self.omegas)


def _ratio_residuals(a, q, w) -> dict[str, float]:
    w1, w2 = w
    r1, r2 = w1**2 / (2.0 * w2**2), 2.0 * w1**2 / w2**2
    return {
        "a11/a12": float(a[0, 0] / a[0, 1] - r1),
        "a21/a22": float(a[1, 0] / a[1, 1] - r2),
        "q11/q12": float(q[0, 0] / q[0, 1] - r1),
        "q21/q22": float(q[1, 0] / q[1, 1] - r2),
    }


def cubic_coeffs(pt: DoubleHopfPoint, alpha4: Optional[float] = None, k3: float = 1.0, tol: float = 1e-10) -> CubicCoeffs:
    """Cubic coefficients by projection and by their closed forms.

    ``alpha4`` defaults to ``-alpha30 * k3**2 / 3`` (the gain at the point).

    Raises
    ------
    ModelInconsistency
        The two routes disagree beyond ``tol`` (relative), or the resonant
        cubic terms do not have the stabilizing sign.
    """
    if alpha4 is None:
        alpha4 = -pt.alpha30 * k3**2 / 3.0
    t0, a2, a3 = pt.tau0, pt.alpha2, pt.alpha30
    w1, w2 = pt.omega1, pt.omega2
    F = _cubic_table(pt, alpha4)
    expanded = _cubic_by_expansion(pt, alpha4)
    table_res = max(abs(F[k] - expanded[k]) for k in F)
    p = np.array(
        [
            [-1j * w1 * pt.d1 * F["2100"], -1j * w1 * pt.d1 * F["1011"]],
            [-1j * w2 * pt.d2 * F["1110"], -1j * w2 * pt.d2 * F["0021"]],
        ]
    )
    beta = _betas(pt)
    s = [a2 * (1.0 + w**2 + t0 * w**2 * a2) + t0 * (w**2 - 1.0) ** 2 for w in (w1, w2)]
    g = [(w**2 - 1.0) * (w**2 + 1.0) for w in (w1, w2)]
    c1 = t0 * alpha4 / (a3 * beta[0])
    c2 = t0 * alpha4 / (a3 * beta[1])
    a_closed = np.array(
        [
            [3 * c1 * w1**4 * s[0], 6 * c1 * w1**2 * w2**2 * s[0]],
            [6 * c2 * w1**2 * w2**2 * s[1], 3 * c2 * w2**4 * s[1]],
        ]
    )
    q_closed = np.array(
        [
            [3 * c1 * w1**3 * g[0], 6 * c1 * w1 * w2**2 * g[0]],
            [6 * c2 * w1**2 * w2 * g[1], 3 * c2 * w2**3 * g[1]],
        ]
    )
    scale = np.max(np.abs(p))
    path_res = max(np.max(np.abs(p.real - a_closed)), np.max(np.abs(p.imag - q_closed))) / scale
    if path_res > tol or table_res > tol * scale:
        raise ModelInconsistency(f"cubic coefficient routes disagree (relative {path_res:.3e})")
    if not (p[0, 0].real < 0 and p[1, 1].real < 0):
        raise ModelInconsistency("a11(0) and a22(0) must be negative")
    return CubicCoeffs(F, p, p.real.copy(), p.imag.copy(), a_closed, q_closed, beta, table_res, path_res, (w1, w2))


# --- linear unfolding ---------------------------------------------------------------


def j1_matrices(pt: DoubleHopfPoint) -> tuple[np.ndarray, np.ndarray]:
    """``J1(mu) = mu1 * M1 + mu2 * M2`` for the center-space linear part."""
    t0, w1, w2, d1, d2 = pt.tau0, pt.omega1, pt.omega2, pt.d1, pt.d2

    def e(sign, w):
        return np.exp(sign * 1j * t0 * w)

    m1 = np.zeros((4, 4), complex)
    m2 = np.zeros((4, 4), complex)
    m1[0, :] = [1j * d1 * w1 * (1 + w1**2), -1j * d1 * w1 * (1 - w1**2), 2j * d1 * w2, 0.0]
    m2[0, :] = [d1 * t0 * w1**2 * e(-1, w1), -d1 * t0 * w1**2 * e(1, w1), d1 * t0 * e(-1, w2), -d1 * t0 * e(1, w2)]
    m1[2, :] = [2j * d2 * w1, 0.0, 1j * d2 * w2 * (1 + w2**2), -1j * d2 * w2 * (1 - w2**2)]
    m2[2, :] = [d2 * t0 * e(-1, w1), -d2 * t0 * e(1, w1), d2 * t0 * w2**2 * e(-1, w2), -d2 * t0 * w2**2 * e(1, w2)]
    perm = [1, 0, 3, 2]
    for m in (m1, m2):
        m[1, :] = np.conj(m[0, perm])
        m[3, :] = np.conj(m[2, perm])
    return m1, m2


def _printed_ce(pt: DoubleHopfPoint) -> tuple[np.ndarray, np.ndarray]:
    """Closed forms for ``c_ij``, ``e_ij`` as printed alongside the double-Hopf reduction."""
    t0, w1, w2, d1, d2 = pt.tau0, pt.omega1, pt.omega2, pt.d1, pt.d2
    d1e, d2e = d1 * np.exp(-1j * t0 * w1), d2 * np.exp(-1j * t0 * w2)
    n1, n2 = 3 * w1**2 + w2**2, w1**2 + 3 * w2**2
    c = np.array(
        [
            [
                -(w1 * (1 + w1**2) * (w1**2 + w2**2) * d1.imag + 2 * (w1 + w2) * d2.imag) / n1,
                t0 * (2 * d2e.real + (1 + w1**4) * d1e.real) / n1,
            ],
            [
                -(w2 * (1 + w2**2) * (w1**2 + w2**2) * d2.imag + 2 * (w1 + w2) * d1.imag) / n2,
                t0 * (2 * d1e.real + (1 + w2**4) * d2e.real) / n2,
            ],
        ]
    )
    e = np.array(
        [
            [w1 * (1 + w1**2) * (w1**2 - w2**2) * d1.real / n1, t0 * w1**2 * (w1**2 - w2**2) * d1e.imag / n1],
            [w2 * (1 + w2**2) * (w2**2 - w1**2) * d2.real / n2, t0 * w2**2 * (w2**2 - w1**2) * d2e.imag / n2],
        ]
    )
    return c, e


@dataclass(frozen=True)
class LinearUnfolding:
    """First-order dependence of the critical eigenvalues on ``mu``.

    ``C[i, j] = d sigma_i / d mu_j`` and ``E[i, j] = d omega_i / d mu_j`` in
    rescaled time. Because ``J0`` is diagonal with simple entries, the
    derivatives are the ``(1, 1)`` and ``(3, 3)`` entries of ``M1``, ``M2``.
    ``C_printed``/``E_printed`` hold the published closed forms, which do
    not agree with these derivatives; they are kept for reporting only.
    """

    M1: np.ndarray = field(repr=False)
    M2: np.ndarray = field(repr=False)
    C: np.ndarray
    E: np.ndarray
    C_printed: np.ndarray
    E_printed: np.ndarray
    delta1_big: float
    det_C: float
    det_C_closed: float
    det_E: float
    det_E_closed: float

    @property
    def det_C_matches(self) -> bool:
        return abs(self.det_C - self.det_C_closed) <= 1e-10 * max(1.0, abs(self.det_C_closed))

    @property
    def det_E_positive(self) -> bool:
        return self.det_E > 0


def linear_unfolding(pt: DoubleHopfPoint) -> LinearUnfolding:
    m1, m2 = j1_matrices(pt)
    C = np.array([[m1[0, 0].real, m2[0, 0].real], [m1[2, 2].real, m2[2, 2].real]])
    E = np.array([[m1[0, 0].imag, m2[0, 0].imag], [m1[2, 2].imag, m2[2, 2].imag]])
    c_p, e_p = _printed_ce(pt)
    a2, a3, t0, w1, w2 = pt.alpha2, pt.alpha30, pt.tau0, pt.omega1, pt.omega2
    beta = _betas(pt)
    big1 = 4 * a2 + 2 * t0 * a3 + a2 * (a3**2 - a2**2)
    common = (w1**2 - w2**2) ** 3 / (a3 * beta[0] * beta[1] * (3 * w1**4 + 3 * w2**4 + 10))
    return LinearUnfolding(
        M1=m1,
        M2=m2,
        C=C,
        E=E,
        C_printed=c_p,
        E_printed=e_p,
        delta1_big=big1,
        det_C=float(np.linalg.det(C)),
        det_C_closed=t0**2 * common * big1,
        det_E=float(np.linalg.det(E)),
        det_E_closed=t0 * common * (2 + t0 * a2) * (w1**2 + w2**2 + 2),
    )


def center_eigenvalues(pt: DoubleHopfPoint, mu: Sequence[float]) -> tuple[complex, complex]:
    """Eigenvalues of ``J0 + J1(mu)`` continuing ``i tau0 w1`` and ``i tau0 w2``."""
    m1, m2 = j1_matrices(pt)
    j0 = np.diag([1j * pt.tau0 * pt.omega1, -1j * pt.tau0 * pt.omega1, 1j * pt.tau0 * pt.omega2, -1j * pt.tau0 * pt.omega2])
    ev = np.linalg.eigvals(j0 + mu[0] * m1 + mu[1] * m2)
    pick = [ev[np.argmin(np.abs(ev - 1j * pt.tau0 * w))] for w in (pt.omega1, pt.omega2)]
    return complex(pick[0]), complex(pick[1])


# --- amplitude system ---------------------------------------------------------------


def deltas(cubic: CubicCoeffs) -> tuple[float, float]:
    """``(delta1, delta2) = (a12/a22, a21/a11)``; checks positivity, product 4 and ordering."""
    a = cubic.a
    d1 = a[0, 1] / a[1, 1]
    d2 = a[1, 0] / a[0, 0]
    if not (d1 > 0 and d2 > 0 and abs(d1 * d2 - 4.0) <= 1e-10 and d1 > d2):
        raise ModelInconsistency(f"delta1={d1}, delta2={d2} violate positivity, product 4 or ordering")
    return float(d1), float(d2)


def classify_sigma_region(sigma1: float, sigma2: float, delta1: float, delta2: float, tol: float = REGION_TOL) -> str:
    """Region ``I``..``VI`` of the amplitude system, or a boundary ``H1, H2, T1, T2``."""
    if sigma1 == 0 and sigma2 == 0:
        raise ValueError("sigma = (0, 0) is the organizing center")
    scale = max(abs(sigma1), abs(sigma2))
    if abs(sigma1) <= tol * scale:
        return "H1"
    if abs(sigma2) <= tol * scale:
        return "H2"
    if sigma1 < 0:
        return "I" if sigma2 < 0 else "VI"
    if sigma2 < 0:
        return "II"
    if abs(sigma1 - delta1 * sigma2) <= tol * max(abs(sigma1), abs(delta1 * sigma2)):
        return "T1"
    if abs(sigma2 - delta2 * sigma1) <= tol * max(abs(sigma2), abs(delta2 * sigma1)):
        return "T2"
    if sigma1 > delta1 * sigma2:
        return "III"
    if sigma2 > delta2 * sigma1:
        return "V"
    return "IV"


def predicted_attractors(region: str) -> tuple[str, ...]:
    """Stable equilibria of the amplitude system in each open region."""
    table = {"I": ("E0",), "II": ("E1",), "III": ("E1",), "IV": ("E1", "E2"), "V": ("E2",), "VI": ("E2",)}
    if region not in table:
        raise ValueError(f"{region!r} is a boundary, not a region")
    return table[region]


def amplitude_flow(delta: Sequence[float], sigma: Sequence[float], rho: Sequence[float]) -> np.ndarray:
    """Right-hand side of the cubic amplitude system."""
    r1, r2 = rho
    if r1 < 0 or r2 < 0:
        raise ValueError("amplitudes must be non-negative")
    d1, d2 = delta
    s1, s2 = sigma
    return np.array([2.0 * r1 * (s1 - r1 - d1 * r2), 2.0 * r2 * (s2 - d2 * r1 - r2)])


def _flow_jacobian(delta, sigma, rho) -> np.ndarray:
    d1, d2 = delta
    s1, s2 = sigma
    r1, r2 = rho
    return np.array(
        [
            [2.0 * (s1 - 2.0 * r1 - d1 * r2), -2.0 * d1 * r1],
            [-2.0 * d2 * r2, 2.0 * (s2 - d2 * r1 - 2.0 * r2)],
        ]
    )


def integrate_amplitude_flow(delta, sigma, rho0, t_end: float = 200.0) -> np.ndarray:
    """State of the amplitude system at ``t_end`` starting from ``rho0``."""

    def rhs(_t, y):
        return amplitude_flow(delta, sigma, np.maximum(y, 0.0))

    sol = integrate.solve_ivp(rhs, (0.0, t_end), np.asarray(rho0, float), method="LSODA", rtol=1e-10, atol=1e-13)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[:, -1]


@dataclass(frozen=True)
class AmplitudeEquilibria:
    region: str
    points: dict
    eigenvalues: dict
    stable: dict
    torus_present: bool

    def jacobian_det(self, name: str) -> float:
        ev = self.eigenvalues[name]
        return float((ev[0] * ev[1]).real)


def equilibria(delta: Sequence[float], sigma: Sequence[float]) -> AmplitudeEquilibria:
    """Equilibria of the amplitude system in the closed positive quadrant.

    Raises ``ValueError`` when ``sigma`` lies on a bifurcation curve.
    """
    d1, d2 = delta
    s1, s2 = sigma
    region = classify_sigma_region(s1, s2, d1, d2)
    if region in ("H1", "H2", "T1", "T2"):
        raise ValueError(f"sigma lies on the bifurcation curve {region}")
    pts = {"E0": (0.0, 0.0)}
    if s1 > 0:
        pts["E1"] = (s1, 0.0)
    if s2 > 0:
        pts["E2"] = (0.0, s2)
    den = d1 * d2 - 1.0
    r1, r2 = -(s1 - d1 * s2) / den, (d2 * s1 - s2) / den
    if r1 > 0 and r2 > 0:
        pts["E3"] = (r1, r2)
    eig = {k: np.linalg.eigvals(_flow_jacobian(delta, sigma, v)) for k, v in pts.items()}
    stable = {k: bool(np.all(ev.real < 0)) for k, ev in eig.items()}
    return AmplitudeEquilibria(region, pts, eig, stable, torus_present=(region == "IV"))


# --- KAM non-degeneracy ---------------------------------------------------------


@dataclass(frozen=True)
class KamReport:
    """Checkable hypotheses for persistence of the region-IV tori.

    ``kam_det`` is ``det((E + D1 C) C^-1)`` from the matrices;
    ``kam_det_closed`` is the published closed form. ``omega0_trace`` and
    ``omega0_det`` belong to the amplitude Jacobian at the torus equilibrium
    for the supplied ``sigma``.
    """

    delta1_big: float
    delta2_big: float
    d1r: float
    d2r: float
    D1: np.ndarray
    kam_det: float
    kam_det_closed: float
    kam_det_printed: float
    sigma: tuple
    omega0_trace: float
    omega0_det: float

    @property
    def agree(self) -> bool:
        return abs(self.kam_det - self.kam_det_closed) <= 1e-8 * max(1.0, abs(self.kam_det_closed))

    @property
    def positive(self) -> bool:
        return self.kam_det > 0 and self.kam_det_closed > 0


def kam_nondegeneracy(
    pt: DoubleHopfPoint,
    lin: Optional[LinearUnfolding] = None,
    delta: Optional[Sequence[float]] = None,
    sigma: Sequence[float] = (1.0, 1.0),
) -> KamReport:
    """Evaluate the frequency-map determinant two ways and the torus hyperbolicity.

    Raises
    ------
    ModelInconsistency
        ``Re(d_j exp(-i tau0 w_j)) <= 0`` for some j, or ``sigma`` outside region IV.
    """
    lin = linear_unfolding(pt) if lin is None else lin
    delta = deltas(cubic_coeffs(pt)) if delta is None else delta
    a2, a3, t0 = pt.alpha2, pt.alpha30, pt.tau0
    de = [pt.d1 * np.exp(-1j * t0 * pt.omega1), pt.d2 * np.exp(-1j * t0 * pt.omega2)]
    d1r, d2r = de[0].real, de[1].real
    if d1r <= 0 or d2r <= 0:
        raise ModelInconsistency(f"d1r={d1r}, d2r={d2r}: both must be positive")
    D1 = np.diag([-de[0].imag / d1r, -de[1].imag / d2r])
    beta = _betas(pt)
    b = a3**2 - a2**2
    big2 = (
        a2 * (1 + (1 + t0 * a2) ** 2 + (1 + t0 * a2) * (2 + a3**2 + a2**2)) ** 2
        + t0**4 * a2 * (a3**2 + a2**2) * b
        + t0**2 * a2 * b * (4 + b) * (2 * t0 * a2 + 2 + b)
    )
    numeric = float(np.linalg.det((lin.E + D1 @ lin.C) @ np.linalg.inv(lin.C)))
    printed = float(np.linalg.det((lin.E_printed + D1 @ lin.C_printed) @ np.linalg.inv(lin.C_printed)))
    closed = 2 * (d1r + d2r) / (t0 * a3 * beta[0] * beta[1] * d1r * d2r) * big2 / lin.delta1_big
    eq = equilibria(delta, sigma)
    if "E3" not in eq.points:
        raise ModelInconsistency(f"sigma={tuple(sigma)} is in region {eq.region}, not IV")
    jac = _flow_jacobian(delta, sigma, eq.points["E3"])
    return KamReport(
        delta1_big=lin.delta1_big,
        delta2_big=big2,
        d1r=d1r,
        d2r=d2r,
        D1=D1,
        kam_det=numeric,
        kam_det_closed=float(closed),
        kam_det_printed=printed,
        sigma=tuple(sigma),
        omega0_trace=float(np.trace(jac)),
        omega0_det=float(np.linalg.det(jac)),
    )


def im_d_identity(pt: DoubleHopfPoint) -> tuple[float, float]:
    """Both sides of the unused identity between ``Im d_j`` and ``cos(tau0 w_k)``."""
    a2, a3, t0, w1, w2 = pt.alpha2, pt.alpha30, pt.tau0, pt.omega1, pt.omega2
    beta = _betas(pt)
    lhs = pt.d2.imag * math.cos(t0 * w1) - pt.d1.imag * math.cos(t0 * w2)
    rhs = t0 * (w1 - w2) / (a3 * beta[0] * beta[1]) * (
        a2 * (4 + 2 * t0 * a2 + a3**2 - a2**2) - 2 * t0 * (w1**2 - 1) * (w2**2 - 1)
    )
    return float(lhs), float(rhs)


# --- full record --------------------------------------------------------------------


@dataclass(frozen=True)
class UnfoldingCoeffs:
    point: DoubleHopfPoint
    cubic: CubicCoeffs
    linear: LinearUnfolding
    delta: tuple[float, float]
    kam: KamReport

    def checks(self) -> dict[str, bool]:
        """Named pass/fail results of every internal check."""
        ratios = self.cubic.ratio_residuals
        a_res = crossing_identity_residuals(self.point)
        out = {
            "residuals_below_1e-8": max(self.point.residuals) < 1e-8,
            "nonresonant": self.point.nonresonant,
            "crossing_identities": max(abs(v) for v in a_res.values()) < 1e-12,
            "ratios": max(abs(v) for v in ratios.values()) < 1e-12,
            "cubic_paths_agree": self.cubic.path_residual < 1e-10,
            "delta_product_4": abs(self.delta[0] * self.delta[1] - 4.0) < 1e-10,
            "delta1_gt_delta2_gt_0": self.delta[0] > self.delta[1] > 0,
            "det_C_positive": self.linear.det_C > 0,
            "det_C_matches_closed_form": self.linear.det_C_matches,
            "det_E_positive": self.linear.det_E_positive,
            "kam_paths_agree": self.kam.agree,
            "kam_det_positive": self.kam.positive,
            "Delta1_Delta2_positive": self.kam.delta1_big > 0 and self.kam.delta2_big > 0,
            "omega0_trace_negative": self.kam.omega0_trace < 0,
            "omega0_det_negative": self.kam.omega0_det < 0,
        }
        return {k: bool(v) for k, v in out.items()}

    def to_dict(self) -> dict:
        def cplx(m):
            return [[{"re": z.real, "im": z.imag} for z in row] for row in np.asarray(m)]

        return {
            "point": self.point.to_dict(),
            "p": cplx(self.cubic.p),
            "a": self.cubic.a.tolist(),
            "q": self.cubic.q.tolist(),
            "beta": self.cubic.beta.tolist(),
            "C": self.linear.C.tolist(),
            "E": self.linear.E.tolist(),
            "C_printed": self.linear.C_printed.tolist(),
            "E_printed": self.linear.E_printed.tolist(),
            "det_C": self.linear.det_C,
            "det_C_closed": self.linear.det_C_closed,
            "det_E": self.linear.det_E,
            "det_E_closed": self.linear.det_E_closed,
            "delta1": self.delta[0],
            "delta2": self.delta[1],
            "Delta1": self.kam.delta1_big,
            "Delta2": self.kam.delta2_big,
            "d1r": self.kam.d1r,
            "d2r": self.kam.d2r,
            "kam_det": self.kam.kam_det,
            "kam_det_closed": self.kam.kam_det_closed,
            "kam_det_printed": self.kam.kam_det_printed,
            "omega0_trace": self.kam.omega0_trace,
            "omega0_det": self.kam.omega0_det,
            "checks": self.checks(),
        }


def unfolding(pt: DoubleHopfPoint, k3: float = 1.0, sigma: Sequence[float] = (1.0, 1.0)) -> UnfoldingCoeffs:
    """Assemble the cubic, linear and KAM data for ``pt``."""
    cubic = cubic_coeffs(pt, k3=k3)
    lin = linear_unfolding(pt)
    delta = deltas(cubic)
    kam = kam_nondegeneracy(pt, lin, delta, sigma)
    return UnfoldingCoeffs(pt, cubic, lin, delta, kam)
