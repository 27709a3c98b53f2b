# kinetic/commands/nbody.py
# Integra el sistema newtoniano y escribe la trayectoria en CSV (t, particle, x_*, v_*).
# Con `report` escribe además un resumen JSON (energía, momento, período, reversibilidad).
import json
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from kinetic.dynamics.nbody import (
    energy_drift,
    energy_new,
    free_streaming,
    measure_period,
    nbody_integrate,
    reverse_check,
    total_momentum,
)
from kinetic.dynamics.potentials import Potential
from kinetic.errors import EXIT_OK, ConfigError
from kinetic.observables import Configuration
from kinetic.schemas import NBodyConfig, NBodySummary
from kinetic.serialization import configuration_from_dict, trajectory_to_csv, write_text
from kinetic.states import random_configuration

NAME = "nbody"
Config = NBodyConfig
HELP = "Velocity Verlet para el sistema de N cuerpos; trayectoria en CSV"

log = logging.getLogger(__name__)


def initial_configuration(cfg: NBodyConfig, rng) -> Configuration:
    if cfg.initial_file:
        path = Path(cfg.initial_file)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"no se pudo leer la configuración inicial {path}: {e}")
        z = configuration_from_dict(data)
        if z.n != cfg.N or z.d != cfg.d:
            raise ConfigError(f"la configuración inicial tiene N={z.n}, d={z.d}; se pidió N={cfg.N}, d={cfg.d}")
        return z
    if cfg.initial == "harmonic_pair":
        # r(0) = 1, ṙ(0) = 0, centro de masa quieto
        return Configuration.from_pairs([((Fraction(1, 2),), (0,)), ((Fraction(-1, 2),), (0,))])
    return random_configuration(rng, cfg.N, cfg.d, exact=False, scale=cfg.scale)


def run(cfg: NBodyConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    W = Potential.from_spec(cfg.potential, cfg.d)
    z0 = initial_configuration(cfg, rng)
    traj = nbody_integrate(z0, W, cfg.dt, cfg.steps, record_every=cfg.record_every)
    write_text(cfg.out, trajectory_to_csv(traj))

    e0 = energy_new(traj.x[0], traj.v[0], W)
    drift = energy_drift(traj, W)
    P = total_momentum(traj)
    summary = NBodySummary(
        command=NAME,
        seed=cfg.seed,
        mode=cfg.mode,
        passed=True,
        N=cfg.N,
        d=cfg.d,
        dt=cfg.dt,
        steps=cfg.steps,
        integrator=traj.integrator,
        potential=W.describe(),
        energy_initial=e0,
        energy_drift=drift,
        momentum_drift=float(np.max(np.abs(P - P[0]))),
    )
    if cfg.N >= 2:
        summary.period = measure_period(traj)
    if cfg.reverse_check:
        summary.reverse_error = reverse_check(z0, W, cfg.dt, cfg.steps)
    if W.kind == "zero":
        t_final = float(traj.times[-1])
        x_exact, _ = free_streaming(z0, t_final).as_arrays()
        summary.free_streaming_error = float(np.max(np.abs(traj.x[-1] - x_exact)))
    log.info("nbody: deriva de energía %.3e, período %s", drift, summary.period)
    if cfg.report:
        write_text(cfg.report, summary.to_json())
    return EXIT_OK
