# kinetic/dynamics/vlasov.py
# Solver semi-lagrangiano 1-D (Strang: x/2, v, x/2) para ∂_t γ + v ∂_x γ − 2(∇W∗ρ) ∂_v γ = 0.
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from kinetic.dynamics.potentials import Potential, convolve_density
from kinetic.errors import ArityError, NonFiniteStateError
from kinetic.observables import Polynomial
from kinetic.states import GridState1D

log = logging.getLogger(__name__)

# Fracción de V por encima de la cual se considera truncada la velocidad; las columnas con
# menos de OCCUPIED_TOL de la masa total no cuentan como ocupadas.
SPEED_FRACTION = 0.8
OCCUPIED_TOL = 1e-6


def force_field(grid: GridState1D, W: Potential) -> np.ndarray:
    """E(x_i) = −2 (∇W∗ρ)(x_i)."""
    return -2.0 * convolve_density(grid, W, gradient=True)


def advect_x(values: np.ndarray, v: np.ndarray, dx: float, tau: float) -> np.ndarray:
    """γ(x, v) ← γ(x − v τ, v) con interpolación lineal periódica en x (conservativa)."""
    Nx = values.shape[0]
    shift = v * tau / dx
    n = np.floor(shift).astype(int)
    alpha = shift - n
    rows = np.arange(Nx)[:, None]
    left = np.take_along_axis(values, (rows - n[None, :]) % Nx, axis=0)
    right = np.take_along_axis(values, (rows - n[None, :] - 1) % Nx, axis=0)
    return (1.0 - alpha)[None, :] * left + alpha[None, :] * right


def advect_v(values: np.ndarray, E: np.ndarray, dv: float, tau: float) -> np.ndarray:
    """γ(x, v) ← γ(x, v − E(x) τ) con interpolación lineal; fuera de [−V, V] vale 0."""
    Nv = values.shape[1]
    shift = E * tau / dv
    n = np.floor(shift).astype(int)
    alpha = shift - n
    cols = np.arange(Nv)[None, :]
    src_l = cols - n[:, None]
    src_r = src_l - 1
    padded = np.concatenate([values, np.zeros((values.shape[0], 1))], axis=1)
    left = np.take_along_axis(padded, np.where((src_l >= 0) & (src_l < Nv), src_l, Nv), axis=1)
    right = np.take_along_axis(padded, np.where((src_r >= 0) & (src_r < Nv), src_r, Nv), axis=1)
    return (1.0 - alpha)[:, None] * left + alpha[:, None] * right


def strang_step(grid: GridState1D, W: Potential, dt: float) -> GridState1D:
    values = advect_x(grid.values, grid.v, grid.dx, 0.5 * dt)
    half = grid.with_values(values)
    E = force_field(half, W)
    values = advect_v(values, E, grid.dv, dt)
    values = advect_x(values, grid.v, grid.dx, 0.5 * dt)
    return grid.with_values(values)


def max_speed(grid: GridState1D, tol: float = OCCUPIED_TOL) -> float:
    """Mayor |v| de celda con masa por encima de tol·masa total."""
    col = grid.values.sum(axis=0) * grid.dx * grid.dv
    occupied = np.nonzero(col > tol * max(grid.mass, 1e-300))[0]
    if occupied.size == 0:
        return 0.0
    return float(np.max(np.abs(grid.v[occupied])) + 0.5 * grid.dv)


def momentum(grid: GridState1D) -> float:
    return grid.pair(Polynomial.variable(1, 1, "v", 1, 1))


@dataclass
class VlasovRun:
    states: List[GridState1D]
    dt: float
    valid: bool = True
    diagnostics: List[Dict[str, float]] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.dt

    def at_time(self, t: float) -> GridState1D:
        i = int(round(t / self.dt))
        if not (0 <= i < len(self.states)) or abs(i * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(t)
        return self.states[i]

    def max_relative_mass_drift(self) -> float:
        m0 = self.states[0].mass
        return float(max(abs(s.mass - m0) for s in self.states) / m0)


def _advisories(grid: GridState1D, W: Potential, dt: float) -> None:
    if grid.V * abs(dt) > grid.dx:
        log.warning("CFL en x: V·dt = %.3g > dx = %.3g", grid.V * abs(dt), grid.dx)
    F_max = float(np.max(np.abs(force_field(grid, W)))) if W.kind != "zero" else 0.0
    if F_max * abs(dt) > grid.dv:
        log.warning("CFL en v: F_max·dt = %.3g > dv = %.3g", F_max * abs(dt), grid.dv)


def vlasov_run(gamma0: GridState1D, W: Potential, dt: float, steps: int, diagnostics: bool = True) -> VlasovRun:
    """Como vlasov_solve_1d, con diagnósticos por paso (masa, momento, energía) y la marca de validez."""
    from kinetic.lie_poisson import hamiltonian_vl

    if W.d != 1:
        raise ArityError("el solver de Vlasov es 1-D")
    if dt <= 0 or steps < 0:
        raise ArityError("dt > 0 y steps >= 0")
    _advisories(gamma0, W, dt)
    states = [gamma0]
    run = VlasovRun(states, dt)
    grid = gamma0
    for step in range(steps + 1):
        if step > 0:
            grid = strang_step(grid, W, dt)
            if not np.all(np.isfinite(grid.values)):
                raise NonFiniteStateError(f"valores no finitos en el paso {step}")
            states.append(grid)
        if run.valid and max_speed(grid) > SPEED_FRACTION * grid.V:
            log.warning("velocidad truncada en t=%.4g: |v| > %.2f·V; la corrida queda inválida", step * dt, SPEED_FRACTION)
            run.valid = False
        if diagnostics:
            run.diagnostics.append(
                {
                    "t": step * dt,
                    "mass": grid.mass,
                    "momentum": momentum(grid),
                    "energy": float(hamiltonian_vl(grid, W)),
                }
            )
    log.info("vlasov1d: deriva relativa de masa %.3e en %d pasos", run.max_relative_mass_drift(), steps)
    return run


def vlasov_solve_1d(gamma0: GridState1D, W: Potential, dt: float, steps: int) -> List[GridState1D]:
    return vlasov_run(gamma0, W, dt, steps, diagnostics=False).states


def shear(gamma0: GridState1D, t: float) -> GridState1D:
    """Transporte libre exacto evaluado en los centros: γ(x − v t, v), interpolado linealmente."""
    return gamma0.with_values(advect_x(gamma0.values, gamma0.v, gamma0.dx, t))


def maxwellian_grid(L: float, V: float, Nx: int, Nv: int, center: float, spread: float,
                    temperature: float = 1.0, drift: float = 0.0, perturbation: float = 0.0) -> GridState1D:
    """Densidad suave normalizada: gaussiana en x (centrada, ancho spread) por maxwelliana en v."""
    dx, dv = L / Nx, 2.0 * V / Nv
    x = (np.arange(Nx) + 0.5) * dx
    v = -V + (np.arange(Nv) + 0.5) * dv
    rho = np.exp(-((x - center) ** 2) / (2 * spread ** 2)) * (1.0 + perturbation * np.cos(2 * np.pi * x / L))
    f_v = np.exp(-((v - drift) ** 2) / (2 * temperature))
    values = rho[:, None] * f_v[None, :]
    values /= values.sum() * dx * dv
    return GridState1D(L, V, values)
