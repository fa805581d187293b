import math
import pickle

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from bridgewobble import dde, hopf
from bridgewobble.model import NormalizedModel


def test_histories():
    assert dde.ConstantHistory(0.1, -0.2)(-3.0) == (0.1, -0.2)
    x1, x2 = dde.SinusoidalHistory(0.5, 2.0)(-0.3)
    assert x1 == pytest.approx(0.5 * math.cos(-0.6)) and x2 == pytest.approx(-1.0 * math.sin(-0.6))
    tab = dde.TabulatedHistory((-1.0, 0.0), (0.0, 1.0), (2.0, 4.0))
    assert tab(-0.5) == (0.5, 3.0)
    assert pickle.loads(pickle.dumps(dde.SinusoidalHistory(1.0, 1.0))) == dde.SinusoidalHistory(1.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        dde.SimConfig(duration=0.0, transient=0.0)
    with pytest.raises(ValueError):
        dde.SimConfig(duration=10.0, transient=10.0)
    with pytest.raises(ValueError):
        dde.SimConfig(duration=10.0, transient=0.0, h=-1.0)
    cfg = dde.SimConfig(duration=10.0, transient=0.0, h=0.3)
    with pytest.raises(ValueError, match="integer"):
        cfg.step_for(1.0)
    assert cfg.step_for(0.9) == pytest.approx((0.3, 3))
    with pytest.raises(ValueError):
        dde.SimConfig(duration=10.0, transient=0.0).step_for(0.0)


def test_default_config():
    m = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    cfg = dde.default_config(m, 1.5)
    assert cfg.duration == pytest.approx(400 * 2 * math.pi / 1.5)
    assert cfg.transient == pytest.approx(0.75 * cfg.duration)
    assert cfg.step_for(2.0)[0] == pytest.approx(0.01)


def _method_of_steps_reference(model, history, n_intervals):
    """Chain ``solve_ivp`` over delay intervals, feeding each its predecessor's dense output."""
    a2, kap, k3, tau = model.alpha2, model.kappa, model.k3, model.tau
    prev = lambda t: history(t)[1]  # noqa: E731
    y0 = list(history(0.0))
    for k in range(n_intervals):
        lag = prev

        def rhs(t, y, lag=lag):
            return [y[1], -y[0] - a2 * y[1] + kap * math.tanh(k3 * lag(t - tau))]

        sol = solve_ivp(rhs, (k * tau, (k + 1) * tau), y0, rtol=1e-12, atol=1e-14, dense_output=True)
        prev = (lambda s: (lambda t: s.sol(t)[1]))(sol)
        y0 = sol.y[:, -1]
    return y0


def test_matches_method_of_steps_reference():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    hist = dde.SinusoidalHistory(0.5, 1.0)
    ref = _method_of_steps_reference(model, hist, 3)
    traj = dde.simulate(model, dde.SimConfig(duration=6.0, transient=0.0, history=hist, steps_per_delay=400))
    i = int(np.argmin(np.abs(traj.t - 6.0)))
    np.testing.assert_allclose([traj.x1[i], traj.x2[i]], ref, atol=1e-9)


def test_zero_delay_matches_ode():
    model = NormalizedModel(0.5, 0.8, 1.5, 0.0)

    def rhs(t, y):
        return [y[1], -y[0] - 0.5 * y[1] + 0.8 * math.tanh(1.5 * y[1])]

    ref = solve_ivp(rhs, (0.0, 10.0), [0.3, 0.0], rtol=1e-12, atol=1e-14).y[:, -1]
    traj = dde.simulate(model, dde.SimConfig(duration=10.0, transient=0.0, history=dde.ConstantHistory(0.3, 0.0), h=0.005))
    assert traj.t[-1] == pytest.approx(10.0)
    np.testing.assert_allclose([traj.x1[-1], traj.x2[-1]], ref, atol=1e-9)


def test_fourth_order_convergence():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    ends = []
    for n in (20, 40, 80):
        cfg = dde.SimConfig(duration=20.0, transient=10.0, history=dde.SinusoidalHistory(0.5, 1.0), steps_per_delay=n)
        tr = dde.simulate(model, cfg)
        i = int(np.argmin(np.abs(tr.t - 20.0)))
        ends.append(np.array([tr.x1[i], tr.x2[i]]))
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert ratio == pytest.approx(15.83, abs=0.05)


def test_dense_output():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    cfg = dde.SimConfig(duration=10.0, transient=0.0, history=dde.SinusoidalHistory(0.5, 1.0), steps_per_delay=100)
    tr = dde.simulate(model, cfg)
    nodes = tr.t[tr.n_history : tr.n_history + 50]
    np.testing.assert_allclose(tr(nodes)[0], tr.x1[tr.n_history : tr.n_history + 50], atol=1e-15)
    fine = dde.simulate(model, dde.SimConfig(duration=10.0, transient=0.0, history=cfg.history, steps_per_delay=800))
    mids = nodes[:-1] + 0.5 * tr.h
    j = np.rint((mids + fine.tau) / fine.h).astype(int)
    np.testing.assert_allclose(tr(mids)[0], fine.x1[j], atol=1e-6)
    np.testing.assert_allclose(tr(mids)[1], fine.x2[j], atol=1e-5)


def test_solution_window():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    tr = dde.simulate(model, dde.SimConfig(duration=10.0, transient=0.0))
    t, x1, x2 = tr.solution(5.0)
    assert t[0] >= 5.0 - 1e-12 and t[0] < 5.0 + tr.h
    assert x1.shape == x2.shape == t.shape
    assert tr.solution()[0][0] == 0.0


def test_divergence_raises():
    model = NormalizedModel(0.5, 1.0, 1.0, 1.0)
    cfg = dde.SimConfig(duration=200.0, transient=0.0, history=dde.SinusoidalHistory(0.01, 1.5), blowup=0.2)
    with pytest.raises(dde.SimulationDiverged) as err:
        dde.simulate(model, cfg)
    assert 0 < err.value.t < 200.0


def test_nonfinite_history_rejected():
    model = NormalizedModel(0.5, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        dde.simulate(model, dde.SimConfig(duration=5.0, transient=0.0, history=dde.ConstantHistory(math.nan, 0.0)))


def test_rest_state_measurements():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    tr = dde.simulate(model, dde.SimConfig(duration=50.0, transient=10.0))
    amp = dde.measure_amplitude(tr, 10.0)
    assert amp.amplitude == 0.0 and amp.settled
    assert dde.measure_frequency(tr, 10.0).zero_amplitude
    sec = dde.poincare_section(tr, 10.0)
    assert sec.diameter == 0.0


@pytest.fixture(scope="module")
def cycle():
    hp = hopf.hopf_in_tau(0.5, 1.0, "plus", 0)
    model = NormalizedModel(0.5, 1.0, 1.0, hp.tau0 + 0.05)
    cfg = dde.default_config(model, hp.omega0, amplitude=0.1)
    return hp, cfg, dde.simulate(model, cfg)


def test_cycle_measurements(cycle):
    hp, cfg, tr = cycle
    amp = dde.measure_amplitude(tr, cfg.transient)
    freq = dde.measure_frequency(tr, cfg.transient)
    assert amp.settled and amp.drift < 1e-3
    assert amp.amplitude == pytest.approx(0.201564, abs=5e-4)
    assert freq.agree
    assert freq.omega == pytest.approx(1.50472, abs=5e-4)


def test_cycle_section_collapses(cycle):
    _, cfg, tr = cycle
    sec = dde.poincare_section(tr, cfg.transient)
    assert not sec.insufficient and len(sec.points) > 50
    assert sec.diameter < 1e-3
    assert np.all(np.abs(sec.points[:, 1]) < 0.5)


def test_section_needs_enough_crossings():
    model = NormalizedModel(0.5, 1.0, 1.0, 3.5)
    tr = dde.simulate(model, dde.SimConfig(duration=3.0, transient=0.0, history=dde.SinusoidalHistory(0.1, 1.5)))
    sec = dde.poincare_section(tr, 0.0)
    assert sec.insufficient and math.isnan(sec.diameter)


def test_growth_rate_needs_peaks():
    model = NormalizedModel(0.5, 1.0, 1.0, 2.0)
    tr = dde.simulate(model, dde.SimConfig(duration=3.0, transient=0.0, history=dde.SinusoidalHistory(0.1, 1.0)))
    with pytest.raises(ValueError):
        dde.growth_rate(tr, 0.0, 3.0)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("BRIDGEWOBBLE_THREADS", "2")
    assert dde.worker_count(8) == 2
    monkeypatch.setenv("BRIDGEWOBBLE_THREADS", "many")
    with pytest.raises(ValueError):
        dde.worker_count()
    monkeypatch.delenv("BRIDGEWOBBLE_THREADS")
    assert dde.worker_count(3) == 3


def test_sweep_parallel_matches_serial(monkeypatch):
    monkeypatch.delenv("BRIDGEWOBBLE_THREADS", raising=False)
    jobs = []
    for tau in (3.0, 3.5, 3.6):
        m = NormalizedModel(0.5, 1.0, 1.0, tau)
        jobs.append((m, dde.SimConfig(duration=300.0, transient=200.0, history=dde.SinusoidalHistory(0.1, 1.5))))
    jobs.append((NormalizedModel(0.5, 1.0, 1.0, 1.0), dde.SimConfig(duration=300.0, transient=200.0, blowup=0.2,
                                                                      history=dde.SinusoidalHistory(0.1, 1.5))))
    serial = dde.run_sweep(jobs, workers=1)
    parallel = dde.run_sweep(jobs, workers=2)
    assert serial == parallel
    assert serial[0]["amplitude"] == 0.0 or serial[0]["amplitude"] < 1e-3
    assert serial[2]["amplitude"] > serial[1]["amplitude"] > 0
    assert serial[3]["diverged"]
