# kinetic/commands/vlasov1d.py
# Solver semi-lagrangiano 1-D; CSV de diagnósticos por paso (t, mass, momentum, energy) y,
# con grid_out, la grilla final.
import logging
from pathlib import Path

from kinetic.dynamics.potentials import Potential
from kinetic.dynamics.vlasov import maxwellian_grid, vlasov_run
from kinetic.errors import EXIT_OK, ConfigError
from kinetic.schemas import Vlasov1dConfig
from kinetic.serialization import grid_from_csv, grid_to_csv, table_to_csv, write_text
from kinetic.states import GridState1D

NAME = "vlasov1d"
Config = Vlasov1dConfig
HELP = "solver de Vlasov 1-D (Strang, semi-lagrangiano) con diagnósticos de masa, momento y energía"

DIAGNOSTIC_COLUMNS = ("t", "mass", "momentum", "energy")

log = logging.getLogger(__name__)


def initial_grid(cfg) -> GridState1D:
    """Grilla inicial desde CSV o maxwelliana con los parámetros de la configuración."""
    if cfg.initial_file:
        try:
            return grid_from_csv(Path(cfg.initial_file).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"no se pudo leer la grilla inicial {cfg.initial_file}: {e}")
    return maxwellian_grid(cfg.L, cfg.V, cfg.Nx, cfg.Nv, cfg.center, cfg.spread,
                           cfg.temperature, cfg.drift, cfg.perturbation)


def run(cfg: Vlasov1dConfig) -> int:
    W = Potential.from_spec(cfg.potential, 1)
    gamma0 = initial_grid(cfg)
    result = vlasov_run(gamma0, W, cfg.dt, cfg.steps)
    rows = [[row[c] for c in DIAGNOSTIC_COLUMNS] for row in result.diagnostics]
    write_text(cfg.out, table_to_csv(DIAGNOSTIC_COLUMNS, rows))
    if cfg.grid_out:
        write_text(cfg.grid_out, grid_to_csv(result.states[-1]))
    if not result.valid:
        log.warning("vlasov1d: la corrida quedó marcada inválida (velocidad truncada)")
    return EXIT_OK
