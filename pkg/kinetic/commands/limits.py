# kinetic/commands/limits.py
# Límites N → ∞: N^{r−1}·C_{ℓjNr} → 1, brecha bracket_GN − bracket_Ginf que se reduce a la
# mitad al duplicar N, y brecha de generadores W_BBGKY − W_VlH de orden 1/N.
import logging
from typing import List

import numpy as np

from kinetic.errors import EXIT_OK, EXIT_VIOLATION
from kinetic.hierarchy import BracketCoefficient, bracket_Ginf, coefficient_gap, random_hierarchy
from kinetic.lie_poisson import bbgky_generator_gap
from kinetic.schemas import CoefficientRow, GapRow, GeneratorGapRow, LimitsConfig, LimitsReport, RatioRow, potential_from_spec
from kinetic.serialization import write_text

NAME = "limits"
Config = LimitsConfig
HELP = "convergencia de coeficientes y corchetes de G_N hacia G_∞"

log = logging.getLogger(__name__)


def coefficient_rows(Ns: List[int], lj_max: int) -> List[CoefficientRow]:
    rows: List[CoefficientRow] = []
    for N in Ns:
        for l in range(1, min(lj_max, N) + 1):
            for j in range(1, min(lj_max, N) + 1):
                for c in BracketCoefficient.row(l, j, N):
                    rel = float(abs(c.scaled - 1))
                    bound = 10 * max(l, j) / N
                    rows.append(CoefficientRow(N=N, l=l, j=j, r=c.r, scaled=float(c.scaled),
                                               relative_error=rel, bound=bound, ok=rel <= bound))
    return rows


def run(cfg: LimitsConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    coefficients = coefficient_rows(cfg.coefficient_N, cfg.lj_max)

    N1, N2 = cfg.gap_N
    lo, hi = cfg.ratio_range
    gaps: List[GapRow] = []
    ratios: List[RatioRow] = []
    skipped = 0
    for p in range(cfg.pairs):
        F = random_hierarchy(rng, cfg.d, [1, 2], cfg.degree)
        G = random_hierarchy(rng, cfg.d, [1, 2], cfg.degree)
        found = False
        for k in bracket_Ginf(F, G).support():
            g1 = coefficient_gap(F, G, N1, k)
            g2 = coefficient_gap(F, G, N2, k)
            gaps.append(GapRow(pair=p, k=k, N=N1, gap=str(g1), gap_float=float(g1)))
            gaps.append(GapRow(pair=p, k=k, N=N2, gap=str(g2), gap_float=float(g2)))
            if g1 == 0 or g2 == 0:
                continue
            ratio = float(g1 / g2)
            ratios.append(RatioRow(pair=p, k=k, ratio=ratio, ok=lo <= ratio <= hi))
            found = True
        if not found:
            skipped += 1

    W = potential_from_spec(cfg.potential, cfg.d)
    generator_gaps = []
    for N in cfg.generator_N:
        gap = bbgky_generator_gap(W, N, cfg.d)
        generator_gaps.append(GeneratorGapRow(N=N, gap=str(gap), N_times_gap=float(N * gap)))

    passed = all(r.ok for r in coefficients) and all(r.ok for r in ratios) and bool(ratios)
    report = LimitsReport(
        command=NAME,
        seed=cfg.seed,
        mode=cfg.mode,
        passed=passed,
        coefficients=coefficients,
        gaps=gaps,
        ratios=ratios,
        generator_gaps=generator_gaps,
        skipped_pairs=skipped,
    )
    write_text(cfg.out, report.to_json())
    if not passed:
        log.error("limits: algún coeficiente o cociente de brechas quedó fuera de rango")
        return EXIT_VIOLATION
    return EXIT_OK
