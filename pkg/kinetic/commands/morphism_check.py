# kinetic/commands/morphism_check.py
# Morfismos de Poisson (ι_EM, ι_Lio, ι_mar, ι), identidades de pullback de los hamiltonianos
# y contrato de los campos hamiltonianos. Con trials_out, CSV con una fila por terna de morfismo
# (map, F, G, seed, residual).
import logging
from contextlib import nullcontext
from typing import List

import numpy as np

from kinetic.dynamics.potentials import Potential
from kinetic.errors import EXIT_OK, EXIT_VIOLATION
from kinetic.hierarchy import corrupted_coefficient
from kinetic.lie_poisson import Algebra
from kinetic.schemas import MorphismCheckConfig, SuiteReport
from kinetic.serialization import table_to_csv, write_text
from kinetic.suites import (
    MorphismTrial,
    SuiteResult,
    explicit_fields_suite,
    factorized_contract_suite,
    morphism_suite,
    pullback_suite,
    vector_field_suite,
)

NAME = "morphism-check"
Config = MorphismCheckConfig
HELP = "morfismos de Poisson, pullback de hamiltonianos y campos hamiltonianos"

MORPHISMS = ("iota_EM", "iota_Lio", "iota_mar", "iota_factorize")
TRIAL_COLUMNS = ("map", "F", "G", "seed", "residual")

log = logging.getLogger(__name__)


def run(cfg: MorphismCheckConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    exact = cfg.mode == "exact"
    W = Potential.from_spec(cfg.potential, cfg.d)
    fault = corrupted_coefficient(*cfg.fault_injection) if cfg.fault_injection else nullcontext()
    results: List[SuiteResult] = []
    trials: List[MorphismTrial] = []
    with fault:
        for name in MORPHISMS:
            results.append(
                morphism_suite(rng, name, cfg.count, d=cfg.d, degree=cfg.degree, N=cfg.N,
                               n_atoms=cfg.n_atoms, exact=exact, trials=trials)
            )
        results += pullback_suite(rng, W, cfg.count, d=cfg.d, N=cfg.N, n_atoms=cfg.n_atoms, exact=exact)
        if exact:
            # el contrato de los campos se verifica sólo con aritmética racional
            results.append(vector_field_suite(rng, Algebra.GN(cfg.N), cfg.contract_count, d=cfg.d,
                                              degree=cfg.degree, n_atoms=cfg.n_atoms))
            results.append(vector_field_suite(rng, Algebra.Ginf(), cfg.contract_count, d=cfg.d,
                                              degree=cfg.degree, n_atoms=cfg.n_atoms))
            results.append(factorized_contract_suite(rng, cfg.contract_count, d=cfg.d, degree=cfg.degree,
                                                     n_atoms=cfg.n_atoms))
            results += explicit_fields_suite(rng, W, cfg.contract_count, d=cfg.d, degree=cfg.degree,
                                             N_max=cfg.bbgky_N_max, n_atoms=cfg.n_atoms)
        else:
            log.info("modo float: se omiten las suites de campos hamiltonianos")
    report = SuiteReport.from_results(NAME, cfg, results, cfg.fault_injection)
    write_text(cfg.out, report.to_json())
    if cfg.trials_out:
        write_text(cfg.trials_out, table_to_csv(TRIAL_COLUMNS, trials))
    log.info("morphism-check: %d chequeos, passed=%s", report.total_checks, report.passed)
    return EXIT_OK if report.passed else EXIT_VIOLATION
