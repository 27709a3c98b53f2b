# kinetic/dynamics/nbody.py
# Integración del sistema newtoniano ẍ_i = −(2/N) Σ_j ∇W(x_i − x_j) con Velocity Verlet.
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from kinetic.dynamics.potentials import Potential
from kinetic.errors import ArityError, NonFiniteStateError
from kinetic.observables import Configuration

log = logging.getLogger(__name__)

INTEGRATOR = "velocity-verlet"


@dataclass
class Trajectory:
    """Configuraciones en t_0..t_M con paso uniforme dt (x, v con forma (M+1, N, d))."""

    dt: float
    x: np.ndarray
    v: np.ndarray
    t0: float = 0.0
    integrator: str = INTEGRATOR
    record_every: int = 1
    times: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.x.shape != self.v.shape or self.x.ndim != 3:
            raise ArityError("x y v deben tener forma (M+1, N, d)")
        self.times = self.t0 + np.arange(self.x.shape[0]) * self.dt * self.record_every

    @property
    def n_steps(self) -> int:
        return self.x.shape[0]

    @property
    def n_particles(self) -> int:
        return self.x.shape[1]

    def configuration(self, i: int) -> Configuration:
        return Configuration.from_arrays(self.x[i], self.v[i])

    def index_of(self, t: float) -> int:
        i = int(round((t - self.t0) / (self.dt * self.record_every)))
        if not (0 <= i < self.n_steps) or abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(t)
        return i

    def at_time(self, t: float) -> Configuration:
        return self.configuration(self.index_of(t))

    @property
    def final(self) -> Configuration:
        return self.configuration(self.n_steps - 1)


def accelerations(x: np.ndarray, W: Potential) -> np.ndarray:
    """a_i = −(2/N) Σ_j ∇W(x_i − x_j); el término j = i se anula porque ∇W(0) = 0."""
    N = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    return -2.0 / N * W.gradient_array(diff).sum(axis=1)


def energy_new(x: np.ndarray, v: np.ndarray, W: Potential) -> float:
    """ℋ_New = (1/N)(½Σ|v_i|² + (1/N)Σ_{i,j} W(x_i − x_j)); la diagonal aporta el W(0)."""
    N = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    return float((0.5 * np.sum(v ** 2) + W.value_array(diff).sum() / N) / N)


def nbody_integrate(
    z0: Configuration, W: Potential, dt: float, steps: int, record_every: int = 1, t0: float = 0.0
) -> Trajectory:
    if dt <= 0:
        raise ArityError("dt > 0")
    if steps < 0 or record_every < 1:
        raise ArityError("steps >= 0 y record_every >= 1")
    if W.d != z0.d:
        raise ArityError(f"W de dimensión {W.d} con configuración de dimensión {z0.d}")
    x, v = z0.as_arrays()
    a = accelerations(x, W)
    xs: List[np.ndarray] = [x.copy()]
    vs: List[np.ndarray] = [v.copy()]
    for step in range(1, steps + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        a = accelerations(x, W)
        v = v_half + 0.5 * dt * a
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NonFiniteStateError(f"estado no finito en el paso {step} (t={t0 + step * dt:.6g})")
        if step % record_every == 0:
            xs.append(x.copy())
            vs.append(v.copy())
    log.debug("nbody: N=%d, %d pasos de dt=%g", z0.n, steps, dt)
    return Trajectory(dt, np.array(xs), np.array(vs), t0, INTEGRATOR, record_every)


def reverse_check(z0: Configuration, W: Potential, dt: float, steps: int) -> float:
    """Integra hacia adelante, invierte velocidades, vuelve; máximo desvío respecto de z0."""
    fwd = nbody_integrate(z0, W, dt, steps, record_every=max(steps, 1))
    x, v = fwd.x[-1], fwd.v[-1]
    back = nbody_integrate(Configuration.from_arrays(x, -v), W, dt, steps, record_every=max(steps, 1))
    x0, v0 = z0.as_arrays()
    return float(max(np.max(np.abs(back.x[-1] - x0)), np.max(np.abs(-back.v[-1] - v0))))


def energy_drift(traj: Trajectory, W: Potential) -> float:
    """max_t |ℋ_New(z^t) − ℋ_New(z^0)|."""
    e0 = energy_new(traj.x[0], traj.v[0], W)
    return float(max(abs(energy_new(x, v, W) - e0) for x, v in zip(traj.x, traj.v)))


def measure_period(traj: Trajectory, i: int = 0, j: int = 1, coord: int = 0) -> Optional[float]:
    """
    Período de r = x_i − x_j por cruces ascendentes de cero (interpolación lineal).
    None si hay menos de dos cruces.
    """
    r = traj.x[:, i, coord] - traj.x[:, j, coord]
    t = traj.times
    crossings = []
    for n in range(len(r) - 1):
        if r[n] < 0 <= r[n + 1]:
            alpha = -r[n] / (r[n + 1] - r[n])
            crossings.append(t[n] + alpha * (t[n + 1] - t[n]))
    if len(crossings) < 2:
        return None
    return float(np.mean(np.diff(crossings)))


def free_streaming(z0: Configuration, t: float) -> Configuration:
    """Solución exacta con W = 0: x(t) = x(0) + t·v(0)."""
    x, v = z0.as_arrays()
    return Configuration.from_arrays(x + t * v, v)


def total_momentum(traj: Trajectory) -> np.ndarray:
    """Σ_i v_i en cada paso, forma (M+1, d)."""
    return traj.v.sum(axis=1)
