import numpy as np
import pytest

from kinetic.dynamics.nbody import nbody_integrate
from kinetic.dynamics.potentials import Potential
from kinetic.dynamics.residuals import Equation, loglog_slope, residual_study, weak_residual, weak_rhs
from kinetic.dynamics.vlasov import maxwellian_grid, vlasov_run
from kinetic.errors import ArityError, ConfigError, MissingLevelError
from kinetic.observables import Configuration
from kinetic.polyparse import parse_observable, parse_polynomial
from kinetic.states import iota_EM, iota_factorize, iota_Lio, random_dirac_state

HARMONIC = Potential.polynomial("x^2")


def lio_path(W, dt=1e-3, T=1.0):
    z0 = Configuration.from_pairs([((0.3,), (0.5,)), ((-0.4,), (0.1,)), ((1.1,), (-0.7,))])
    traj = nbody_integrate(z0, W, dt, int(round(T / dt)))
    return lambda t: iota_Lio(traj.at_time(t))


# ---------- Ecuaciones ----------

def test_parse_equations():
    assert Equation.parse("vlasov").level == 1
    assert Equation.parse("bbgky(2)", 3).level == 2
    assert Equation.parse(" vlh ( 3 ) ").level == 3
    assert Equation.parse("liouville", 4).level == 4
    assert str(Equation.parse("bbgky(2)", 3)) == "bbgky(2)"


@pytest.mark.parametrize("text, N", [("bbgky", 3), ("bbgky(4)", 3), ("liouville", None), ("boltzmann", 2)])
def test_parse_rejects(text, N):
    with pytest.raises(ConfigError):
        Equation.parse(text, N)


def test_rhs_rejects_observable_of_wrong_level(rng):
    with pytest.raises(ArityError):
        weak_rhs(Equation.parse("vlasov"), random_dirac_state(rng, 1, 1, 2), parse_observable("x1*x2", 2, 1), HARMONIC)


def test_vlh_rhs_on_factorized_state_is_vlasov(rng):
    gamma = random_dirac_state(rng, 1, 1, 3)
    f = parse_polynomial("x*v + v^2", 1, 1)
    W = Potential.polynomial("x^4 - x^2")
    assert weak_rhs(Equation.parse("vlh(1)"), iota_factorize(gamma), f, W) == weak_rhs(Equation.parse("vlasov"), gamma, f, W)


def test_vlh_rhs_on_grid_uses_mean_field():
    grid = maxwellian_grid(10.0, 8.0, 32, 32, 5.0, 1.0, drift=0.3)
    W = Potential.gaussian(1.0, 1.0)
    f = parse_polynomial("x*v", 1, 1)
    vlh = weak_rhs(Equation.parse("vlh(1)"), grid, f, W)
    assert vlh == pytest.approx(weak_rhs(Equation.parse("vlasov"), grid, f, W), abs=1e-12)


# ---------- Residuos ----------

def test_liouville_residual_is_second_order_in_h():
    W = Potential.polynomial("x^4 - x^2")
    path = lio_path(W)
    f = parse_observable("x1^2*v2 + v1*v2*v3", 3, 1)
    hs = [0.08, 0.04, 0.02]
    res = residual_study("liouville", path, f, 0.5, hs, W, N=3)
    assert max(res) < 1e-1
    assert loglog_slope(hs, res) == pytest.approx(2.0, abs=0.2)


@pytest.mark.parametrize("k", [1, 2])
def test_bbgky_residual_on_marginals(k):
    path = lio_path(HARMONIC)
    f = parse_observable("x1*v1" if k == 1 else "x1*v2 + x1^2", k, 1)
    assert abs(weak_residual(f"bbgky({k})", path, f, 0.5, 0.01, HARMONIC, N=3)) < 1e-3


def test_residual_needs_states_at_shifted_times():
    path = {0.0: random_dirac_state(np.random.default_rng(0), 1, 1, 2)}
    with pytest.raises(MissingLevelError):
        weak_residual("vlasov", path, parse_polynomial("x", 1, 1), 0.0, 0.1, HARMONIC)


def test_residual_rejects_nonpositive_step():
    with pytest.raises(ArityError):
        weak_residual("vlasov", {}, parse_polynomial("x", 1, 1), 0.0, 0.0, HARMONIC)


def test_loglog_slope_of_power_law():
    xs = [1.0, 0.5, 0.25, 0.125]
    assert loglog_slope(xs, [3 * x ** 2 for x in xs]) == pytest.approx(2.0)


@pytest.mark.slow
def test_vlasov_residual_of_empirical_measure_along_nbody_flow():
    W = Potential.polynomial("x^4 - x^2")
    z0 = Configuration.from_pairs([((0.3,), (0.5,)), ((-0.4,), (0.1,)), ((1.1,), (-0.7,))])
    traj = nbody_integrate(z0, W, 1e-3, 1000)
    path = lambda t: iota_EM(traj.at_time(t))
    f = parse_polynomial("x^2*v + v^3", 1, 1)
    hs = [0.08, 0.04, 0.02]
    res = residual_study("vlasov", path, f, 0.5, hs, W)
    assert loglog_slope(hs, res) >= 1.8


@pytest.mark.slow
def test_vlh2_residual_of_grid_solution_shrinks_with_refinement():
    W = Potential.gaussian(1.0, 1.0)
    f = parse_observable("x1*v2 + v1^2*v2^2", 2, 1)
    t = 0.1
    residuals = []
    for n in (64, 128):
        dt = 0.32 / n
        dt_fd = 4 * dt
        gamma0 = maxwellian_grid(10.0, 8.0, n, n, 5.0, 1.0, drift=0.3)
        run = vlasov_run(gamma0, W, dt, int(round((t + dt_fd) / dt)), diagnostics=False)
        residuals.append(abs(weak_residual("vlh(2)", run.at_time, f, t, dt_fd, W)))
    assert residuals[1] < residuals[0]
