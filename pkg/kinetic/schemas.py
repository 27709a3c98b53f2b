# kinetic/schemas.py
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kinetic import settings
from kinetic.dynamics.meanfield import DEFAULT_PANEL
from kinetic.dynamics.potentials import Potential
from kinetic.errors import ConfigError
from kinetic.serialization import SCHEMA_VERSION, dumps
from kinetic.suites import SuiteResult, first_failure

# -------------------------------------------------------------------
# Tipos comunes
# -------------------------------------------------------------------
Mode = Literal["exact", "float"]
Subcommand = Literal["algebra-check", "morphism-check", "nbody", "vlasov1d", "meanfield", "limits"]

U64_MAX = 2**64 - 1


def _positive_levels(values: List[int]) -> List[int]:
    if not values:
        raise ValueError("la lista no puede estar vacía")
    if any(v < 1 for v in values):
        raise ValueError("los niveles y tamaños deben ser >= 1")
    return values


def potential_from_spec(spec: str, d: int) -> Potential:
    try:
        return Potential.from_spec(spec, d)
    except ConfigError as e:
        raise ValueError(e.detail)


# -------------------------------------------------------------------
# Configuración (base)
# -------------------------------------------------------------------
class RunConfig(BaseModel):
    """Claves comunes; cada subcomando agrega las suyas y rechaza las desconocidas."""

    model_config = ConfigDict(extra="forbid", validate_default=True)

    seed: int = Field(0, ge=0, le=U64_MAX)
    out: Optional[str] = None
    mode: Mode = Field(default_factory=settings.default_mode)
    degree_cap: Optional[int] = Field(None, ge=0)

    def effective_cap(self) -> int:
        return self.degree_cap if self.degree_cap is not None else settings.get_degree_cap()

    def _require_cap(self, needed: int, what: str) -> None:
        cap = self.effective_cap()
        if needed > cap:
            raise ValueError(f"{what} llega a grado {needed} y el tope es {cap}")


class _PotentialMixin(BaseModel):
    potential: str = "polynomial:x^2"

    @field_validator("potential")
    @classmethod
    def check_potential(cls, v: str) -> str:
        potential_from_spec(v, 1)
        return v


# -------------------------------------------------------------------
# Subcomando: algebra-check
# -------------------------------------------------------------------
class AlgebraCheckConfig(RunConfig):
    d: int = Field(2, ge=1, le=2)
    degree: int = Field(3, ge=0, le=3)
    triples: int = Field(100, ge=1)
    gk_levels: List[int] = Field(default_factory=lambda: [1, 2, 3])
    gn_sizes: List[int] = Field(default_factory=lambda: [2, 3, 4])
    ginf_top: int = Field(2, ge=1, le=3)
    eps_N_max: int = Field(5, ge=1, le=6)
    eps_degree: int = Field(3, ge=0, le=3)
    filtration_lj_max: int = Field(3, ge=1, le=3)
    rank_degree: int = Field(2, ge=0, le=3)
    definition_pairs: int = Field(20, ge=1)
    fault_injection: Optional[Tuple[int, int, int]] = None

    check_levels = field_validator("gk_levels", "gn_sizes")(_positive_levels)

    @model_validator(mode="after")
    def check_ranges(self) -> "AlgebraCheckConfig":
        if self.mode != "exact":
            raise ValueError("algebra-check sólo corre en modo exact")
        # [f, [g, h]] baja dos grados por corchete
        self._require_cap(max(self.degree, 3 * self.degree - 4), "Jacobi")
        self._require_cap(max(self.eps_degree, 2 * self.eps_degree - 2, self.rank_degree), "la suite de ε")
        return self


# -------------------------------------------------------------------
# Subcomando: morphism-check
# -------------------------------------------------------------------
class MorphismCheckConfig(_PotentialMixin, RunConfig):
    d: int = Field(1, ge=1, le=2)
    degree: int = Field(2, ge=0, le=3)
    N: int = Field(3, ge=1, le=4)
    count: int = Field(50, ge=1)
    n_atoms: int = Field(2, ge=1)
    contract_count: int = Field(20, ge=1)
    bbgky_N_max: int = Field(4, ge=1, le=4)
    trials_out: Optional[str] = None
    fault_injection: Optional[Tuple[int, int, int]] = None

    @model_validator(mode="after")
    def check_ranges(self) -> "MorphismCheckConfig":
        W = potential_from_spec(self.potential, self.d)
        if self.mode == "exact" and not W.exact:
            raise ValueError("modo exact requiere un potencial polinomial o cero")
        self._require_cap(max(self.degree, W.degree), "los generadores")
        return self


# -------------------------------------------------------------------
# Subcomando: nbody
# -------------------------------------------------------------------
class NBodyConfig(_PotentialMixin, RunConfig):
    d: int = Field(1, ge=1, le=3)
    N: int = Field(2, ge=1)
    dt: float = Field(1e-3, gt=0)
    steps: int = Field(1000, ge=0)
    record_every: int = Field(10, ge=1)
    initial: Literal["random", "harmonic_pair"] = "random"
    initial_file: Optional[str] = None
    scale: float = Field(1.0, gt=0)
    reverse_check: bool = False
    report: Optional[str] = None

    @model_validator(mode="after")
    def check_ranges(self) -> "NBodyConfig":
        if self.initial == "harmonic_pair" and (self.N != 2 or self.d != 1):
            raise ValueError("harmonic_pair requiere N=2 y d=1")
        return self


# -------------------------------------------------------------------
# Subcomandos de grilla: vlasov1d y meanfield
# -------------------------------------------------------------------
class _GridMixin(BaseModel):
    L: float = Field(20.0, gt=0)
    V: float = Field(8.0, gt=0)
    Nx: int = Field(64, ge=4)
    Nv: int = Field(64, ge=4)
    center: float = 10.0
    spread: float = Field(1.0, gt=0)
    temperature: float = Field(1.0, gt=0)
    drift: float = 0.0
    perturbation: float = Field(0.0, ge=0, lt=1)
    initial_file: Optional[str] = None


class Vlasov1dConfig(_GridMixin, _PotentialMixin, RunConfig):
    potential: str = "gaussian:1:1"
    dt: float = Field(0.05, gt=0)
    steps: int = Field(100, ge=0)
    grid_out: Optional[str] = None


class MeanFieldConfig(_GridMixin, _PotentialMixin, RunConfig):
    potential: str = "gaussian:1:1"
    N_list: List[int] = Field(default_factory=lambda: [64, 256, 1024])
    T: float = Field(1.0, ge=0)
    dt: float = Field(0.01, gt=0)
    grid_dt: Optional[float] = Field(None, gt=0)
    replicas: int = Field(20, ge=1)
    panel: List[str] = Field(default_factory=lambda: list(DEFAULT_PANEL))
    require_monotone: bool = True
    report: Optional[str] = None

    check_sizes = field_validator("N_list")(_positive_levels)


# -------------------------------------------------------------------
# Subcomando: limits
# -------------------------------------------------------------------
class LimitsConfig(_PotentialMixin, RunConfig):
    d: int = Field(1, ge=1, le=2)
    degree: int = Field(2, ge=0, le=3)
    coefficient_N: List[int] = Field(default_factory=lambda: [10**3, 10**6])
    lj_max: int = Field(3, ge=1, le=6)
    gap_N: Tuple[int, int] = (100, 200)
    pairs: int = Field(10, ge=1)
    ratio_range: Tuple[float, float] = (1.8, 2.2)
    generator_N: List[int] = Field(default_factory=lambda: [10, 100, 1000])

    check_sizes = field_validator("coefficient_N", "generator_N")(_positive_levels)

    @model_validator(mode="after")
    def check_ranges(self) -> "LimitsConfig":
        if self.gap_N[0] < 4 or self.gap_N[1] <= self.gap_N[0]:
            raise ValueError("gap_N = (N1, N2) con 4 <= N1 < N2")
        if not potential_from_spec(self.potential, self.d).exact:
            raise ValueError("la brecha de generadores necesita un potencial polinomial o cero")
        self._require_cap(max(self.degree, 2 * self.degree - 2), "el corchete")
        return self


# -------------------------------------------------------------------
# Reportes
# -------------------------------------------------------------------
class ReportBase(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Subcommand
    seed: int
    mode: Mode
    passed: bool

    def to_json(self) -> str:
        return dumps(self.model_dump(mode="json", exclude_none=True))


class SuiteOut(BaseModel):
    name: str
    checks: int
    passed: bool
    max_residual: float
    counterexample: Optional[Dict[str, Any]] = None
    detail: Optional[Dict[str, Any]] = None


class SuiteReport(ReportBase):
    suites: List[SuiteOut]
    total_checks: int
    counterexample: Optional[Dict[str, Any]] = None
    fault_injection: Optional[Tuple[int, int, int]] = None

    @classmethod
    def from_results(cls, command: str, cfg: RunConfig, results: Sequence[SuiteResult],
                     fault: Optional[Tuple[int, int, int]] = None) -> "SuiteReport":
        failed = first_failure(results)
        return cls(
            command=command,
            seed=cfg.seed,
            mode=cfg.mode,
            passed=failed is None,
            suites=[SuiteOut(**r.as_dict()) for r in results],
            total_checks=sum(r.checks for r in results),
            counterexample=None if failed is None else {"suite": failed.name, **(failed.counterexample or {})},
            fault_injection=fault,
        )


class NBodySummary(ReportBase):
    N: int
    d: int
    dt: float
    steps: int
    integrator: str
    potential: str
    energy_initial: float
    energy_drift: float
    momentum_drift: float
    period: Optional[float] = None
    reverse_error: Optional[float] = None
    free_streaming_error: Optional[float] = None


class MeanFieldSummary(ReportBase):
    potential: str
    N_list: List[int]
    replicas: int
    median_errors: Dict[str, float]
    strictly_decreasing: bool


class CoefficientRow(BaseModel):
    N: int
    l: int
    j: int
    r: int
    scaled: float
    relative_error: float
    bound: float
    ok: bool


class GapRow(BaseModel):
    pair: int
    k: int
    N: int
    gap: str
    gap_float: float


class RatioRow(BaseModel):
    pair: int
    k: int
    ratio: float
    ok: bool


class GeneratorGapRow(BaseModel):
    N: int
    gap: str
    N_times_gap: float


class LimitsReport(ReportBase):
    coefficients: List[CoefficientRow]
    gaps: List[GapRow]
    ratios: List[RatioRow]
    generator_gaps: List[GeneratorGapRow]
    skipped_pairs: int = 0
