# kinetic/commands/algebra_check.py
# Suites exactas de álgebras de Lie (g_k, G_N, G_∞) y de los mapas ε.
# Exit 0 si todas las identidades se cumplen; 1 con el primer contraejemplo serializado.
import logging
from contextlib import nullcontext

import numpy as np

from kinetic.errors import EXIT_OK, EXIT_VIOLATION
from kinetic.hierarchy import corrupted_coefficient
from kinetic.schemas import AlgebraCheckConfig, SuiteReport
from kinetic.serialization import write_text
from kinetic.suites import algebra_suites

NAME = "algebra-check"
Config = AlgebraCheckConfig
HELP = "antisimetría, bilinealidad, Jacobi, composición/inyectividad/filtración de ε"

log = logging.getLogger(__name__)


def run(cfg: AlgebraCheckConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    fault = corrupted_coefficient(*cfg.fault_injection) if cfg.fault_injection else nullcontext()
    with fault:
        results = algebra_suites(
            rng,
            d=cfg.d,
            degree=cfg.degree,
            triples=cfg.triples,
            gk_levels=cfg.gk_levels,
            gn_sizes=cfg.gn_sizes,
            ginf_top=cfg.ginf_top,
            eps_N_max=cfg.eps_N_max,
            eps_degree=cfg.eps_degree,
            filtration_lj_max=cfg.filtration_lj_max,
            rank_degree=cfg.rank_degree,
            definition_pairs=cfg.definition_pairs,
        )
    report = SuiteReport.from_results(NAME, cfg, results, cfg.fault_injection)
    write_text(cfg.out, report.to_json())
    log.info("algebra-check: %d chequeos, passed=%s", report.total_checks, report.passed)
    return EXIT_OK if report.passed else EXIT_VIOLATION
