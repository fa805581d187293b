"""Acceptance criteria. Each test carries a ``criterion`` mark; conftest prints one verdict per criterion."""

import math

import numpy as np
import pytest

from bridgewobble import dde, double_hopf, hopf, spectrum
from bridgewobble.model import NormalizedModel

crit = pytest.mark.criterion

A2, A3 = 0.5, 1.0
# (alpha2, alpha3, branch, j) for the crossing-slope oracle
SLOPE_POINTS = [
    (0.5, 1.0, "plus", 0),
    (0.5, 1.0, "minus", 0),
    (0.5, 1.0, "plus", 2),
    (0.5, 0.6, "plus", 0),
    (0.5, 0.6, "minus", 1),
    (1.0, 1.5, "plus", 0),
    (1.0, 1.5, "minus", 0),
    (0.2, 3.0, "plus", 1),
    (0.3, 0.45, "minus", 2),
    (1.5, 4.0, "plus", 3),
]


def _settling_config(model, omega, rate, amplitude=0.05):
    """Default run length, stretched so the envelope relaxes by at least e^8 before the window."""
    duration = max(400 * 2 * math.pi / omega, 8.0 / (0.75 * 2.0 * abs(rate)))
    return dde.SimConfig(
        duration=duration,
        transient=0.75 * duration,
        history=dde.SinusoidalHistory(amplitude, omega),
        steps_per_delay=200,
    )


# --- 1 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def random_pairs():
    rng = np.random.default_rng(20240601)
    a2 = rng.uniform(0.01, 3.0, 1000)
    a3 = a2 + rng.uniform(1e-3, 5.0, 1000)
    return list(zip(a2, a3))


@crit(1, "spectral identities")
def test_c1_omega_product_and_quartic(random_pairs):
    worst = 0.0
    for a2, a3 in random_pairs:
        wp, wm = spectrum.omega_pm(a2, a3)
        b = a3**2 - a2**2
        worst = max(worst, abs(wp * wm - 1.0))
        for w in (wp, wm):
            worst = max(worst, abs((w**2 - 1) ** 2 - b * w**2) / max(1.0, b * w**2))
    assert worst < 1e-10


@crit(1, "spectral identities")
def test_c1_characteristic_vanishes_on_critical_delays(random_pairs):
    worst = 0.0
    for a2, a3 in random_pairs:
        cds = spectrum.critical_delays(a2, a3, 5)
        for branch in ("plus", "minus"):
            w = cds.omega(branch)
            scale = max(1.0, w**2, a3 * w)
            for tau in cds.delays(branch):
                worst = max(worst, abs(spectrum.characteristic(1j * w, tau, a2, a3)) / scale)
    assert worst < 1e-10


# --- 2 ----------------------------------------------------------------------------


def _fd_slope(a2, a3, branch, j, h=1e-5):
    cross = spectrum.crossing_derivatives(a2, a3, branch, j)
    model = NormalizedModel.from_alphas(a2, a3, tau=cross.tau)
    lo = spectrum.track_root(model, cross.tau, cross.tau - h, 1j * cross.omega, max_step=h)
    hi = spectrum.track_root(model, cross.tau, cross.tau + h, 1j * cross.omega, max_step=h)
    assert lo.complete and hi.complete
    d = (hi.roots[-1] - lo.roots[-1]) / (2 * h)
    return cross, d


@crit(2, "crossing-slope oracle")
@pytest.mark.parametrize("a2,a3,branch,j", SLOPE_POINTS)
def test_c2_slopes_match_tracked_roots(a2, a3, branch, j):
    cross, d = _fd_slope(a2, a3, branch, j)
    assert d.real == pytest.approx(cross.dsigma, rel=1e-4)
    assert d.imag == pytest.approx(cross.domega, rel=1e-4)


@crit(2, "crossing-slope oracle")
def test_c2_reference_slope():
    assert spectrum.crossing_derivatives(A2, A3, "plus", 0).dsigma == pytest.approx(0.100431, abs=5e-7)


# --- 3 ----------------------------------------------------------------------------


@crit(3, "stability verdict vs argument principle")
def test_c3_grid_agreement():
    # alpha2 = 0.5: three alpha3 values in each of D1, D2 (below C2 ~ 1.588) and D3, plus one on C1
    alpha3s = [0.2, 0.35, 0.45, 0.5, 0.7, 1.0, 1.4, 2.0, 3.0, 4.0]
    taus = np.linspace(0.05, 30.0, 50)
    regions = {spectrum.classify_region(0.5, a3) for a3 in alpha3s}
    assert {"D1", "D2", "D3"} <= regions
    mismatches, marginal = [], 0
    for a3 in alpha3s:
        for tau in taus:
            v = spectrum.stability(0.5, a3, float(tau), cross_check=False)
            try:
                n = spectrum.count_unstable_roots(NormalizedModel.from_alphas(0.5, a3), float(tau))
            except spectrum.MarginalRootError:
                marginal += 1
                continue
            if n != 2 * v.unstable_root_pairs or v.stable != (n == 0):
                mismatches.append((a3, tau, v.unstable_root_pairs, n))
    assert not mismatches
    assert marginal == 0


# --- 4 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def plus_branch_runs():
    hp = hopf.hopf_in_tau(A2, A3, "plus", 0)
    out = {}
    for mu in (0.0125, 0.025, 0.05):
        model = NormalizedModel(A2, 1.0, 1.0, hp.tau0 + mu)
        cfg = _settling_config(model, hp.omega0, hp.dsigma * mu)
        traj = dde.simulate(model, cfg)
        out[mu] = (
            hopf.predicted_cycle_tau(hp, mu),
            dde.measure_amplitude(traj, cfg.transient),
            dde.measure_frequency(traj, cfg.transient),
        )
    return hp, out


@crit(4, "supercritical amplitude law")
def test_c4_amplitudes_within_15pct_of_normal_form(plus_branch_runs):
    _, runs = plus_branch_runs
    for mu, ((a_pred, _), amp, _) in runs.items():
        assert amp.settled, mu
        assert abs(amp.amplitude - a_pred) <= 0.15 * a_pred, (mu, amp.amplitude, a_pred)


@crit(4, "supercritical amplitude law")
def test_c4_amplitudes_within_15pct_of_reference(plus_branch_runs):
    _, runs = plus_branch_runs
    for mu, (_, amp, _) in runs.items():
        ref = 0.187 * math.sqrt(mu / 0.05)
        assert abs(amp.amplitude - ref) <= 0.15 * ref, (mu, amp.amplitude, ref)


@crit(4, "supercritical amplitude law")
def test_c4_fitted_exponent(plus_branch_runs):
    _, runs = plus_branch_runs
    mus = np.array(sorted(runs))
    amps = np.array([runs[m][1].amplitude for m in mus])
    slope = np.polyfit(np.log(mus), np.log(amps), 1)[0]
    assert abs(slope - 0.5) <= 0.05


@crit(4, "supercritical amplitude law")
def test_c4_frequency_near_crossing(plus_branch_runs):
    hp, runs = plus_branch_runs
    assert hp.omega0 == pytest.approx(1.5227, abs=5e-5)
    for mu, (_, _, freq) in runs.items():
        assert freq.agree
        assert abs(freq.omega - hp.omega0) <= 0.05 * hp.omega0


# --- 5 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def minus_branch_run():
    hm = hopf.hopf_in_tau(A2, A3, "minus", 0)
    mu = -0.02
    model = NormalizedModel(A2, 1.0, 1.0, hm.tau0 + mu)
    cfg = _settling_config(model, hm.omega0, hm.dsigma * mu)
    traj = dde.simulate(model, cfg)
    return hm, hopf.predicted_cycle_tau(hm, mu), dde.measure_amplitude(traj, cfg.transient)


@crit(5, "minus-branch cycle")
def test_c5_within_20pct_of_reference(minus_branch_run):
    hm, _, amp = minus_branch_run
    assert hm.cycle_stability == "stable"
    assert amp.settled
    assert abs(amp.amplitude - 0.305) <= 0.2 * 0.305


@crit(5, "minus-branch cycle")
def test_c5_within_20pct_of_normal_form(minus_branch_run):
    _, (a_pred, _), amp = minus_branch_run
    assert abs(amp.amplitude - a_pred) <= 0.2 * a_pred


# --- 6 ----------------------------------------------------------------------------


@crit(6, "resonant-delay cycle")
def test_c6_resonant_case():
    h3 = hopf.hopf_in_alpha(0.5, 1, kappa=0.52)
    mu = 0.02
    a_pred, w_pred = hopf.predicted_cycle_alpha(h3, mu)
    assert a_pred == pytest.approx(0.392, abs=5e-4)
    model = NormalizedModel(0.5, 0.52, 1.0, 2 * math.pi)
    cfg = _settling_config(model, 1.0, h3.dsigma * mu)
    traj = dde.simulate(model, cfg)
    amp = dde.measure_amplitude(traj, cfg.transient)
    freq = dde.measure_frequency(traj, cfg.transient)
    assert amp.settled
    assert abs(freq.omega - 1.0) <= 0.05
    assert abs(amp.amplitude - a_pred) <= 0.2 * a_pred


# --- 7 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def dh_point():
    return double_hopf.find_double_hopf(0.5, 1, 1)


def _bisect_gap(a2, k, l, lo, hi):
    def gap(a3):
        wp, wm = spectrum.omega_pm(a2, a3)
        return spectrum.critical_delay(a2, a3, "plus", k) - spectrum.critical_delay(a2, a3, "minus", l)

    glo = gap(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = gap(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@crit(7, "double-Hopf point")
def test_c7_converges_with_small_residuals(dh_point):
    assert max(dh_point.residuals) < 1e-8
    ref = _bisect_gap(0.5, 1, 1, 0.6, 1.0)
    assert dh_point.alpha30 == pytest.approx(ref, abs=1e-10)
    assert dh_point.alpha30 == pytest.approx(0.7165912476951121, abs=1e-10)


@crit(7, "double-Hopf point")
def test_c7_nonresonant(dh_point):
    assert dh_point.nonresonant
    assert double_hopf.check_nonresonance(dh_point)


@crit(7, "double-Hopf point")
def test_c7_crossing_identities(dh_point):
    res = double_hopf.crossing_identity_residuals(dh_point)
    assert max(abs(v) for v in res.values()) < 1e-12


# --- 8 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def unf(dh_point):
    return double_hopf.unfolding(dh_point)


@crit(8, "unfolding algebra")
def test_c8_ratios(unf):
    assert max(abs(v) for v in unf.cubic.ratio_residuals.values()) < 1e-12


@crit(8, "unfolding algebra")
def test_c8_delta_product_and_order(unf):
    d1, d2 = unf.delta
    assert abs(d1 * d2 - 4.0) < 1e-10
    assert d1 > d2 > 0


@crit(8, "unfolding algebra")
def test_c8_dual_path_cubic(unf):
    assert unf.cubic.path_residual < 1e-10
    scale = np.max(np.abs(unf.cubic.p))
    assert np.max(np.abs(unf.cubic.a - unf.cubic.a_closed)) <= 1e-10 * scale
    assert np.max(np.abs(unf.cubic.q - unf.cubic.q_closed)) <= 1e-10 * scale


@crit(8, "unfolding algebra")
def test_c8_linear_coefficients_vs_eigenvalue_differences(dh_point, unf):
    h = 1e-6
    cols = []
    for mu in ((h, 0.0), (0.0, h)):
        plus = double_hopf.center_eigenvalues(dh_point, mu)
        minus = double_hopf.center_eigenvalues(dh_point, (-mu[0], -mu[1]))
        cols.append([(p - m) / (2 * h) for p, m in zip(plus, minus)])
    d = np.array(cols).T
    np.testing.assert_allclose(d.real, unf.linear.C, rtol=1e-3)
    np.testing.assert_allclose(d.imag, unf.linear.E, rtol=1e-3)


@crit(8, "unfolding algebra")
def test_c8_det_c_closed_form(unf):
    lin = unf.linear
    assert abs(lin.det_C - lin.det_C_closed) <= 1e-10 * max(1.0, abs(lin.det_C_closed))


# --- 9 ----------------------------------------------------------------------------


def _region_samples(d1, d2, per_region=20, margin=0.05, seed=7):
    rng = np.random.default_rng(seed)
    out = {r: [] for r in ("I", "II", "III", "IV", "V", "VI")}
    while min(len(v) for v in out.values()) < per_region:
        th = rng.uniform(0, 2 * math.pi)
        labels = {double_hopf.classify_sigma_region(math.cos(t), math.sin(t), d1, d2) for t in (th - margin, th, th + margin)}
        if len(labels) != 1:
            continue
        (r,) = labels
        if len(out[r]) < per_region:
            out[r].append((math.cos(th), math.sin(th)))
    return out


@crit(9, "amplitude-system phase portrait")
def test_c9_flow_reaches_predicted_attractor(unf):
    delta = unf.delta
    rng = np.random.default_rng(11)
    failures = []
    for region, sigmas in _region_samples(*delta).items():
        targets = double_hopf.predicted_attractors(region)
        for sigma in sigmas:
            eq = double_hopf.equilibria(delta, sigma)
            rho0 = rng.uniform(0.05, 1.0, 2)
            end = double_hopf.integrate_amplitude_flow(delta, sigma, rho0, t_end=2000.0)
            reached = [n for n in targets if np.linalg.norm(end - eq.points[n]) < 1e-6]
            if not reached or not all(eq.stable[n] for n in targets):
                failures.append((region, sigma, end))
    assert not failures


@crit(9, "amplitude-system phase portrait")
def test_c9_region_iv_torus_is_saddle(unf):
    delta = unf.delta
    for sigma in _region_samples(*delta)["IV"]:
        eq = double_hopf.equilibria(delta, sigma)
        r1, r2 = eq.points["E3"]
        assert r1 > 0 and r2 > 0
        assert eq.jacobian_det("E3") < 0


# --- 10 ---------------------------------------------------------------------------


@crit(10, "KAM non-degeneracy")
def test_c10_kam_paths_agree(unf):
    assert unf.kam.agree, (unf.kam.kam_det, unf.kam.kam_det_closed)


@crit(10, "KAM non-degeneracy")
def test_c10_kam_det_positive(unf):
    assert unf.kam.kam_det > 0 and unf.kam.kam_det_closed > 0


@crit(10, "KAM non-degeneracy")
def test_c10_big_deltas_positive(unf):
    assert unf.kam.delta1_big > 0 and unf.kam.delta2_big > 0


@crit(10, "KAM non-degeneracy")
def test_c10_torus_jacobian_signs(unf):
    assert double_hopf.classify_sigma_region(*unf.kam.sigma, *unf.delta) == "IV"
    assert unf.kam.omega0_trace < 0
    assert unf.kam.omega0_det < 0


# --- 11 ---------------------------------------------------------------------------


@crit(11, "integrator order and linear growth")
def test_c11_richardson_ratio():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    ends = []
    for n in (20, 40, 80):
        cfg = dde.SimConfig(duration=20.0, transient=10.0, history=dde.SinusoidalHistory(0.5, 1.0), steps_per_delay=n)
        tr = dde.simulate(model, cfg)
        i = int(np.argmin(np.abs(tr.t - 20.0)))
        ends.append(np.array([tr.x1[i], tr.x2[i]]))
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert abs(ratio - 16.0) <= 3.0


@crit(11, "integrator order and linear growth")
@pytest.mark.parametrize(
    "a2,a3,tau", [(0.5, 1.0, 1.0), (0.5, 1.0, 2.5), (0.5, 1.0, 5.0), (1.0, 0.5, 5.0), (0.5, 0.6, 3.0)]
)
def test_c11_growth_rate_matches_rightmost_root(a2, a3, tau):
    lam = spectrum.rightmost_root(a2, a3, tau)
    model = NormalizedModel.from_alphas(a2, a3, tau=tau)
    T = (60.0 if lam.real < 0 else 8.0) / abs(lam.real)
    cfg = dde.SimConfig(duration=T, transient=0.0, history=dde.SinusoidalHistory(1e-6, lam.imag), steps_per_delay=100)
    g = dde.growth_rate(dde.simulate(model, cfg), 0.3 * T, T)
    assert abs(g - lam.real) <= 0.02 * abs(lam.real)
