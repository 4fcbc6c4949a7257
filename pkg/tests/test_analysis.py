import math

import numpy as np
import pytest

from lwrnet import analysis
from lwrnet.analysis import (
    WindowTooShort,
    check_limit,
    empirical_rate,
    fit_line,
    predicted_limit,
    predicted_rate,
    rate_study,
)
from lwrnet.dynamics import SimConfig, Trajectory, simulate
from lwrnet.graph import Network, classify
from lwrnet.model import Model, kl_divergence, single_agent_rate

B = [[0.7, 0.3], [0.3, 0.7]]
KL_73 = 0.7 * math.log(0.7 / 0.3) + 0.3 * math.log(0.3 / 0.7)
P, Q = [0.8, 0.2], [0.2, 0.8]
IDENT = [[P, P, Q], [P, Q, P], [P, Q, Q]]


def synthetic(lam):
    """Two-state trajectory whose false-to-true log-ratio is ``lam``."""
    lam = np.asarray(lam, dtype=float)
    lb = np.stack([-np.logaddexp(0, lam), lam - np.logaddexp(0, lam)], axis=-1)
    return Trajectory(lb[None], np.zeros((1, lam.size), dtype=np.int64))


class TestFit:
    def test_exact_line(self):
        t = np.arange(5001)
        fit = empirical_rate(synthetic(-0.25 * t), 0, 0)
        assert fit.rate == pytest.approx(0.25, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_planted_slope_with_offset(self):
        t = np.arange(3001)
        fit = empirical_rate(synthetic(4.0 - 0.0731 * t), 0, 0, burn_in_fraction=0.5)
        assert abs(fit.rate - 0.0731) < 1e-12
        assert fit.points == 1501

    def test_fit_line_matches_lstsq(self):
        rng = np.random.default_rng(1)
        x = np.arange(200.0)
        y = 3 - 0.4 * x + rng.normal(size=200)
        b, r2, se = fit_line(x, y)
        A = np.c_[np.ones_like(x), x]
        coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
        assert b == pytest.approx(coef[1], abs=1e-12)
        assert r2 == pytest.approx(1 - res[0] / np.sum((y - y.mean()) ** 2), abs=1e-12)
        assert se == pytest.approx(math.sqrt(res[0] / 198 / np.sum((x - x.mean()) ** 2)), rel=1e-10)

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            empirical_rate(synthetic(-0.1 * np.arange(8)), 0, 0)

    def test_all_false_mass_zero(self):
        fit = empirical_rate(synthetic(np.full(100, -np.inf)), 0, 0)
        assert fit.degenerate and math.isinf(fit.rate)

    def test_uninformative(self):
        m = Model.from_arrays([0.5, 0.5], [[[0.4, 0.6]] * 2])
        rep = rate_study(m, Network((None,)), 0, 500, range(3))
        a = rep.agents[0]
        for s in rep.seeds:
            assert a.fits[s].rate == pytest.approx(0.0, abs=1e-12)
            assert not a.converged[s]
        assert a.empirical_mean is None and not a.all_converged


class TestPredicted:
    def test_isolated(self):
        m = Model.from_arrays([0.5, 0.5], [B])
        net = Network((None,))
        assert predicted_rate(m, net, classify(net), 0, 0) == (pytest.approx(KL_73, abs=1e-15), "private")

    def test_iid_circle_and_pendant(self):
        m = Model.from_arrays([0.5, 0.5], [B] * 4)
        net = Network((2, 0, 1, 0))
        shape = classify(net)
        for i in range(4):
            rate, kind = predicted_rate(m, net, shape, i, 0)
            assert rate == pytest.approx(KL_73, abs=1e-14) and kind == "circle"

    def test_tree_descendant_uses_root(self):
        m = Model.from_arrays([1 / 3] * 3, [[[0.6, 0.4], [0.3, 0.7], [0.1, 0.9]]] + IDENT[:2])
        net = Network((None, 0, 1))
        shape = classify(net)
        for i in (1, 2):
            rate, kind = predicted_rate(m, net, shape, i, 0)
            assert kind == "root" and rate == single_agent_rate(m, 0, 0)

    def test_identification_circle(self):
        m = Model.from_arrays([1 / 3] * 3, IDENT)
        net = Network((2, 0, 1))
        rate, _ = predicted_rate(m, net, classify(net), 0, 0)
        assert rate == pytest.approx(2 * kl_divergence(P, Q) / 3, abs=1e-14)

    def test_limits(self):
        m = Model.from_arrays([0.2, 0.5, 0.3], IDENT)
        iso = Network((None, None, None))
        s = classify(iso)
        assert predicted_limit(m, s, 0, 0) == pytest.approx([0.2 / 0.7, 0.5 / 0.7, 0])
        assert predicted_limit(m, s, 1, 0) == pytest.approx([0.4, 0, 0.6])
        assert predicted_limit(m, s, 2, 0) == pytest.approx([1, 0, 0])
        circ = Network((2, 0, 1))
        for i in range(3):
            assert np.array_equal(predicted_limit(m, classify(circ), i, 0), [1, 0, 0])


class TestCheckLimit:
    def test_isolated_learner(self):
        m = Model.from_arrays([0.5, 0.5], [B])
        net = Network((None,))
        traj = simulate(SimConfig(m, net, 0, 2000, 9))
        row = check_limit(traj, m, net, classify(net), 0, 0)
        assert row.max_deviation < 0.01 and row.ratio_deviation is None

    def test_isolated_identification(self):
        m = Model.from_arrays([1 / 3] * 3, [IDENT[0]])
        net = Network((None,))
        traj = simulate(SimConfig(m, net, 0, 2000, 4))
        row = check_limit(traj, m, net, classify(net), 0, 0)
        assert row.predicted == pytest.approx([0.5, 0.5, 0.0])
        assert row.max_deviation < 0.01
        assert row.ratio_deviation < 1e-9

    def test_circle_identification(self):
        m = Model.from_arrays([1 / 3] * 3, IDENT)
        net = Network((2, 0, 1))
        shape = classify(net)
        traj = simulate(SimConfig(m, net, 0, 3000, 12))
        for i in range(3):
            assert traj.belief(i, 3000)[0] > 0.99
            assert check_limit(traj, m, net, shape, i, 0).max_deviation < 0.01

    def test_window(self):
        m = Model.from_arrays([0.5, 0.5], [B])
        net = Network((None,))
        with pytest.raises(WindowTooShort):
            check_limit(simulate(SimConfig(m, net, 0, 20, 0)), m, net, classify(net), 0, 0)


class TestStudy:
    def test_single_agent_rate_recovery(self):
        m = Model.from_arrays([0.5, 0.5], [B])
        rep = rate_study(m, Network((None,)), 0, 5000, range(20))
        a = rep.agents[0]
        assert abs(a.empirical_mean - KL_73) < 0.1 * KL_73
        assert a.bound == a.private_rate == a.predicted

    def test_threads_do_not_change_results(self):
        m = Model.from_arrays([1 / 3] * 3, IDENT)
        net = Network((2, 0, 1))
        one = rate_study(m, net, 0, 400, range(6), workers=1)
        many = rate_study(m, net, 0, 400, range(6), workers=4)
        for a, b in zip(one.agents, many.agents):
            assert a.fits == b.fits and a.converged == b.converged

    def test_tree_bounds(self):
        m = Model.from_arrays([1 / 3] * 3, [[[0.6, 0.4], [0.3, 0.7], [0.1, 0.9]]] + IDENT[:2])
        net = Network((None, 0, 1))
        rep = rate_study(m, net, 0, 3000, range(40))
        for a in rep.agents:
            assert a.predicted <= a.bound + 1e-12
            assert a.empirical_mean <= a.bound + a.slack()
            assert abs(a.empirical_mean - a.predicted) < 0.1 * a.predicted


def test_defaults():
    assert analysis.BURN_IN_FRACTION == 0.2 and analysis.TAIL_FRACTION == 0.2
    assert analysis.TRUE_MASS_THRESHOLD == 0.99 and analysis.R_SQUARED_THRESHOLD == 0.9
