# kinetic/dynamics/meanfield.py
# Límite de campo medio: muestreo de N partículas desde una grilla, evolución newtoniana
# y comparación con la solución de Vlasov sobre un panel fijo de observables.
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from kinetic.dynamics.nbody import nbody_integrate
from kinetic.dynamics.potentials import Potential
from kinetic.dynamics.vlasov import vlasov_run
from kinetic.errors import ArityError, ConfigError
from kinetic.observables import Configuration
from kinetic.polyparse import format_polynomial, parse_polynomial
from kinetic.states import GridState1D, iota_EM

log = logging.getLogger(__name__)

DEFAULT_PANEL = ("x", "v", "x^2", "v^2", "x*v")
NORMALIZATION_TOL = 1e-6


def sample_from_grid(gamma0: GridState1D, N: int, seed: Union[int, np.random.SeedSequence]) -> Configuration:
    """
    N puntos i.i.d. de γ0: CDF inversa sobre la grilla aplanada y posición uniforme
    dentro de la celda elegida. Determinista dado el seed.
    """
    if N < 1:
        raise ArityError("N >= 1")
    if gamma0.mass <= 0:
        raise ConfigError("la grilla no tiene masa")
    if abs(gamma0.mass - 1.0) > NORMALIZATION_TOL:
        raise ConfigError(f"γ0 no está normalizada (masa {gamma0.mass:.6g})")
    if np.any(gamma0.values < 0):
        raise ConfigError("γ0 tiene valores negativos")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(gamma0.values.ravel())
    u = rng.random(N) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    ix, iv = np.unravel_index(idx, gamma0.values.shape)
    x = (ix + rng.random(N)) * gamma0.dx
    v = -gamma0.V + (iv + rng.random(N)) * gamma0.dv
    return Configuration.from_arrays(x[:, None], v[:, None])


@dataclass(frozen=True)
class MeanFieldRow:
    N: int
    seed: int
    observable: str
    empirical_value: float
    grid_value: float
    abs_error: float


def replica_seeds(seed: int, replicas: int) -> List[int]:
    """Semillas hijas de una SeedSequence raíz (una por réplica)."""
    children = np.random.SeedSequence(seed).spawn(replicas)
    return [int(c.generate_state(1)[0]) for c in children]


def meanfield_experiment(
    gamma0: GridState1D,
    W: Potential,
    N_list: Sequence[int],
    T: float,
    dt: float,
    seed: int,
    replicas: int = 20,
    panel: Sequence[str] = DEFAULT_PANEL,
    grid_dt: Optional[float] = None,
) -> List[MeanFieldRow]:
    """Tabla (N, seed, observable, empirical_value, grid_value, abs_error)."""
    if T < 0 or dt <= 0:
        raise ArityError("T >= 0 y dt > 0")
    steps = int(round(T / dt))
    observables = [parse_polynomial(p, 1, 1) for p in panel]
    g_dt = grid_dt or dt
    run = vlasov_run(gamma0, W, g_dt, int(round(T / g_dt)), diagnostics=False)
    if not run.valid:
        log.warning("la solución de grilla quedó marcada inválida (velocidad truncada)")
    final = run.states[-1]
    grid_values = [float(final.pair(f)) for f in observables]

    rows: List[MeanFieldRow] = []
    for N in N_list:
        for s in replica_seeds(seed, replicas):
            z0 = sample_from_grid(gamma0, N, s)
            zT = nbody_integrate(z0, W, dt, steps, record_every=max(steps, 1)).final
            emp = iota_EM(zT)
            for f, gv in zip(observables, grid_values):
                ev = float(emp.pair(f))
                rows.append(MeanFieldRow(N, s, format_polynomial(f), ev, gv, abs(ev - gv)))
        log.info("meanfield: N=%d listo (%d réplicas)", N, replicas)
    return rows


def median_errors(rows: Sequence[MeanFieldRow]) -> Dict[int, float]:
    """Mediana por N, sobre réplicas, del error medio del panel."""
    per: Dict[Tuple[int, int], List[float]] = {}
    for r in rows:
        per.setdefault((r.N, r.seed), []).append(r.abs_error)
    by_n: Dict[int, List[float]] = {}
    for (N, _), errs in per.items():
        by_n.setdefault(N, []).append(float(np.mean(errs)))
    return {N: float(np.median(v)) for N, v in sorted(by_n.items())}


def is_strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
