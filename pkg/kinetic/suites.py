# kinetic/suites.py
# Suites aleatorias de identidades exactas (álgebras de Lie, mapas ε, morfismos de Poisson,
# campos hamiltonianos). Cada suite corta en el primer contraejemplo y lo deja serializado.
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from kinetic.dynamics.potentials import Potential
from kinetic.functionals import (
    expectation_leaf,
    hierarchy_leaf,
    random_functional,
    tensor_leaf,
)
from kinetic.hierarchy import (
    ObservableHierarchy,
    bracket_GN,
    bracket_GN_by_definition,
    bracket_Ginf,
    epsilon_embed,
    epsilon_rank,
    filtration_h,
    random_hierarchy,
)
from kinetic.lie_poisson import (
    Algebra,
    bbgky_case_vf_weak,
    bbgky_functional,
    ham_vf_weak,
    morphism_sides,
    pullback_identities,
    vector_field_contract,
    vl_functional,
    vlasov_vf_weak,
    vlh_functional,
    vlh_vf_weak,
)
from kinetic.observables import Polynomial, Scalar, lie_bracket_gk, random_sym_observable, symmetrize
from kinetic.polyparse import format_polynomial
from kinetic.serialization import (
    configuration_to_dict,
    dirac_to_dict,
    functional_to_dict,
    functional_to_text,
    hierarchy_to_dict,
    scalar_out,
)
from kinetic.states import (
    DiracState,
    FactorizedState,
    random_configuration,
    random_dirac_state,
    random_state_hierarchy,
)

log = logging.getLogger(__name__)

FLOAT_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    passed: bool = True
    max_residual: float = 0.0
    counterexample: Optional[Dict[str, Any]] = None
    detail: Dict[str, Any] = field(default_factory=dict)

    def record(self, residual: Scalar, payload: Callable[[], Dict[str, Any]], tol: float = 0.0,
               scale: Scalar = 1) -> bool:
        """Suma un chequeo. Con tol = 0 el residuo tiene que ser exactamente 0."""
        self.checks += 1
        r = abs(residual)
        self.max_residual = max(self.max_residual, float(r))
        ok = r == 0 if tol == 0 else float(r) <= tol * max(1.0, abs(float(scale)))
        if not ok:
            self.passed = False
            self.counterexample = {"residual": scalar_out(residual), **payload()}
            log.error("suite %s: contraejemplo en el chequeo %d (residuo %s)", self.name, self.checks, residual)
        return ok

    def as_dict(self) -> Dict[str, Any]:
        out = {"name": self.name, "checks": self.checks, "passed": self.passed, "max_residual": self.max_residual}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.detail:
            out["detail"] = self.detail
        return out


def max_coefficient(x) -> Fraction:
    """Mayor |coef| de un polinomio o de una jerarquía; 0 si es nula."""
    if isinstance(x, ObservableHierarchy):
        return max((max_coefficient(f) for _, f in x.items()), default=Fraction(0))
    return max((abs(c) for c in x.terms.values()), default=Fraction(0))


def _random_levels(rng, top: int) -> List[int]:
    n = int(rng.integers(1, top + 1))
    return sorted(int(k) for k in rng.choice(range(1, top + 1), size=n, replace=False))


def _small_rational(rng) -> Fraction:
    return Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))


# ---------- Álgebras de Lie ----------

@dataclass(frozen=True)
class _LieAlgebra:
    name: str
    random: Callable[[Any], Any]
    bracket: Callable[[Any, Any], Any]
    encode: Callable[[Any], Any]


def _gk_algebra(k: int, d: int, degree: int) -> _LieAlgebra:
    return _LieAlgebra(
        f"g_{k}",
        lambda rng: random_sym_observable(rng, k, d, degree),
        lie_bracket_gk,
        format_polynomial,
    )


def _gn_algebra(N: int, d: int, degree: int, top: int) -> _LieAlgebra:
    return _LieAlgebra(
        f"G_{N}",
        lambda rng: random_hierarchy(rng, d, _random_levels(rng, min(top, N)), degree, N),
        lambda F, G: bracket_GN(F, G, N),
        hierarchy_to_dict,
    )


def _ginf_algebra(d: int, degree: int, top: int) -> _LieAlgebra:
    return _LieAlgebra(
        "G_inf",
        lambda rng: random_hierarchy(rng, d, _random_levels(rng, top), degree, None),
        bracket_Ginf,
        hierarchy_to_dict,
    )


def lie_suites(rng, algebra: _LieAlgebra, triples: int) -> List[SuiteResult]:
    """Antisimetría, bilinealidad y Jacobi sobre `triples` ternas aleatorias."""
    anti = SuiteResult(f"{algebra.name}:antisymmetry")
    bilin = SuiteResult(f"{algebra.name}:bilinearity")
    jacobi = SuiteResult(f"{algebra.name}:jacobi")
    br = algebra.bracket
    for _ in range(triples):
        f, g, h = algebra.random(rng), algebra.random(rng), algebra.random(rng)
        a, b = _small_rational(rng), _small_rational(rng)
        payload = lambda: {"f": algebra.encode(f), "g": algebra.encode(g), "h": algebra.encode(h),
                           "a": scalar_out(a), "b": scalar_out(b)}
        if anti.passed:
            anti.record(max_coefficient(br(f, g) + br(g, f)), payload)
        if bilin.passed:
            combo = f.scale(a) + h.scale(b)
            if isinstance(combo, Polynomial):
                combo = symmetrize(combo)
            bilin.record(max_coefficient(br(combo, g) - (br(f, g).scale(a) + br(h, g).scale(b))), payload)
        if jacobi.passed:
            total = br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g))
            jacobi.record(max_coefficient(total), payload)
        if not (anti.passed or bilin.passed or jacobi.passed):
            break
    log.info("%s: %d ternas", algebra.name, jacobi.checks)
    return [anti, bilin, jacobi]


# ---------- Mapas ε ----------

def epsilon_composition_suite(rng, d: int, degree: int, N_max: int) -> SuiteResult:
    """ε_{a,N} = ε_{b,N}∘ε_{a,b} para todo a <= b <= N <= N_max."""
    res = SuiteResult("epsilon:composition")
    for N in range(1, N_max + 1):
        for b in range(1, N + 1):
            for a in range(1, b + 1):
                f = random_sym_observable(rng, a, d, degree)
                diff = epsilon_embed(f, N) - epsilon_embed(epsilon_embed(f, b), N)
                if not res.record(max_coefficient(diff), lambda: {"a": a, "b": b, "N": N, "f": format_polynomial(f)}):
                    return res
    return res


def epsilon_injectivity_suite(d: int, degree: int, N_max: int) -> SuiteResult:
    """rango(ε_{k,N}) = dim del dominio en grado <= degree."""
    res = SuiteResult("epsilon:injectivity")
    for N in range(1, N_max + 1):
        for k in range(1, N + 1):
            rank, dim = epsilon_rank(k, N, d, degree)
            res.detail[f"{k},{N}"] = [rank, dim]
            if not res.record(Fraction(dim - rank), lambda: {"k": k, "N": N, "degree": degree, "rank": rank, "dim": dim}):
                return res
    return res


def filtration_suite(rng, d: int, degree: int, N_max: int, lj_max: int) -> SuiteResult:
    """ε_{k,N}(h) = [ε_{ℓ,N} f, ε_{j,N} g]_{g_N} con k = min(ℓ+j−1, N)."""
    res = SuiteResult("epsilon:filtration")
    for N in range(1, N_max + 1):
        for l in range(1, min(lj_max, N) + 1):
            for j in range(1, min(lj_max, N) + 1):
                f = random_sym_observable(rng, l, d, degree)
                g = random_sym_observable(rng, j, d, degree)
                lhs = epsilon_embed(filtration_h(f, g, N), N)
                rhs = lie_bracket_gk(epsilon_embed(f, N), epsilon_embed(g, N))
                payload = lambda: {"l": l, "j": j, "N": N, "f": format_polynomial(f), "g": format_polynomial(g)}
                if not res.record(max_coefficient(lhs - rhs), payload):
                    return res
    return res


def definition_suite(rng, d: int, degree: int, Ns: Sequence[int], pairs: int, top: int = 3) -> SuiteResult:
    """Fórmula explícita de [·,·]_{G_N} contra el camino ε^{-1}."""
    res = SuiteResult("G_N:explicit_vs_definition")
    for i in range(pairs):
        N = int(Ns[i % len(Ns)])
        F = random_hierarchy(rng, d, _random_levels(rng, min(top, N)), degree, N)
        G = random_hierarchy(rng, d, _random_levels(rng, min(top, N)), degree, N)
        diff = bracket_GN(F, G, N) - bracket_GN_by_definition(F, G, N)
        if not res.record(max_coefficient(diff), lambda: {"N": N, "F": hierarchy_to_dict(F), "G": hierarchy_to_dict(G)}):
            break
    return res


def algebra_suites(rng, *, d: int, degree: int, triples: int, gk_levels: Sequence[int], gn_sizes: Sequence[int],
                   ginf_top: int, eps_N_max: int, eps_degree: int, filtration_lj_max: int, rank_degree: int,
                   definition_pairs: int) -> List[SuiteResult]:
    results: List[SuiteResult] = []
    for k in gk_levels:
        results += lie_suites(rng, _gk_algebra(k, d, degree), triples)
    for N in gn_sizes:
        results += lie_suites(rng, _gn_algebra(N, d, degree, top=3), triples)
    results += lie_suites(rng, _ginf_algebra(d, degree, ginf_top), triples)
    results.append(epsilon_composition_suite(rng, d, eps_degree, eps_N_max))
    results.append(epsilon_injectivity_suite(d, rank_degree, eps_N_max))
    results.append(filtration_suite(rng, d, eps_degree, eps_N_max, filtration_lj_max))
    results.append(definition_suite(rng, d, degree, gn_sizes, definition_pairs))
    return results


# ---------- Morfismos de Poisson ----------

def _leaf_factory(name: str, d: int, degree: int, N: int):
    if name == "iota_EM":
        return tensor_leaf(d, [1, 2], degree)
    if name == "iota_Lio":
        return expectation_leaf(d, [N], degree)
    if name == "iota_mar":
        return hierarchy_leaf(d, list(range(1, min(2, N) + 1)), degree, N)
    return hierarchy_leaf(d, [1, 2], degree)


def _morphism_source(name: str, rng, d: int, N: int, n_atoms: int, exact: bool):
    if name in ("iota_EM", "iota_Lio"):
        return random_configuration(rng, N, d, exact)
    if name == "iota_mar":
        return random_dirac_state(rng, N, d, n_atoms, exact)
    return random_dirac_state(rng, 1, d, n_atoms, exact)


def _encode_source(source) -> Dict[str, Any]:
    if isinstance(source, DiracState):
        return {"state": dirac_to_dict(source)}
    return {"configuration": configuration_to_dict(source)}


class MorphismTrial(NamedTuple):
    map: str
    F: str
    G: str
    seed: int
    residual: Scalar


def morphism_suite(rng, name: str, count: int, *, d: int, degree: int, N: int, n_atoms: int,
                   exact: bool = True, trials: Optional[List[MorphismTrial]] = None) -> SuiteResult:
    """
    {map*𝒻, map*𝒢} = {𝒻, 𝒢}∘map sobre `count` ternas (𝒻, 𝒢, entrada). Cada terna sale de su
    propio generador; con `trials` se anota una fila por terna (la semilla la reproduce).
    """
    res = SuiteResult(f"morphism:{name}")
    make_leaf = _leaf_factory(name, d, degree, N)
    tol = 0.0 if exact else FLOAT_TOL
    for _ in range(count):
        seed = int(rng.integers(0, 2**63 - 1))
        trial_rng = np.random.default_rng(seed)
        F = random_functional(trial_rng, make_leaf)
        G = random_functional(trial_rng, make_leaf)
        source = _morphism_source(name, trial_rng, d, N, n_atoms, exact)
        dom, cod = morphism_sides(name, F, G, source)  # type: ignore[arg-type]
        if trials is not None:
            trials.append(MorphismTrial(name, functional_to_text(F), functional_to_text(G), seed, dom - cod))
        payload = lambda: {"seed": seed, "F": functional_to_dict(F), "G": functional_to_dict(G), **_encode_source(source)}
        if not res.record(dom - cod, payload, tol, scale=cod):
            break
    log.info("morfismo %s: %d ternas", name, res.checks)
    return res


def pullback_suite(rng, W: Potential, count: int, *, d: int, N: int, n_atoms: int, exact: bool = True) -> List[SuiteResult]:
    """Las cuatro identidades de pullback de hamiltonianos, una suite por identidad."""
    results: Dict[str, SuiteResult] = {}
    tol = 0.0 if exact else FLOAT_TOL
    for _ in range(count):
        z = random_configuration(rng, N, d, exact)
        gamma1 = random_dirac_state(rng, 1, d, n_atoms, exact)
        gammaN = random_dirac_state(rng, N, d, n_atoms, exact)
        payload = lambda: {"W": W.describe(), "configuration": configuration_to_dict(z),
                           "gamma1": dirac_to_dict(gamma1), "gammaN": dirac_to_dict(gammaN)}
        for key, residual in pullback_identities(W, z, gamma1, gammaN).items():
            res = results.setdefault(key, SuiteResult(f"pullback:{key}"))
            if res.passed:
                res.record(residual, payload, tol)
    return list(results.values())


# ---------- Campos hamiltonianos ----------

def vector_field_suite(rng, algebra: Algebra, count: int, *, d: int, degree: int, n_atoms: int) -> SuiteResult:
    """Σ_ℓ ⟨d𝒻[Γ]^{(ℓ)}, X_𝒢(Γ)^{(ℓ)}⟩ = {𝒻, 𝒢}(Γ) sobre jerarquías Dirac."""
    res = SuiteResult(f"vector_field:{algebra}")
    if algebra.kind == "GN":
        make_leaf = hierarchy_leaf(d, list(range(1, min(2, algebra.N) + 1)), degree, algebra.N)  # type: ignore[arg-type]
    else:
        make_leaf = hierarchy_leaf(d, [1, 2], degree)
    for _ in range(count):
        F = random_functional(rng, make_leaf)
        G = random_functional(rng, make_leaf)
        Gamma = random_state_hierarchy(rng, algebra.N, d, n_atoms)
        lhs, rhs = vector_field_contract(F, G, Gamma, algebra)
        payload = lambda: {"F": functional_to_dict(F), "G": functional_to_dict(G),
                           "levels": {str(k): dirac_to_dict(s) for k, s in Gamma.levels.items()}}
        if not res.record(lhs - rhs, payload):
            break
    return res


def explicit_fields_suite(rng, W: Potential, count: int, *, d: int, degree: int, N_max: int, n_atoms: int) -> List[SuiteResult]:
    """
    Campo de ham_vf_weak contra las fórmulas explícitas: ℋ_BBGKY por casos (N <= N_max),
    ℋ_VlH y ℋ_Vl.
    """
    bbgky = SuiteResult("explicit:H_BBGKY_cases")
    vlh = SuiteResult("explicit:H_VlH")
    vl = SuiteResult("explicit:H_Vl")
    for _ in range(count):
        for N in range(1, N_max + 1):
            Gamma = random_state_hierarchy(rng, N, d, n_atoms)
            X = ham_vf_weak(bbgky_functional(W, N, d), Gamma, Algebra.GN(N))
            for l in range(1, N + 1):
                f = random_sym_observable(rng, l, d, degree)
                diff = X.level(l).pair(f) - bbgky_case_vf_weak(Gamma, W, N, l).pair(f)
                if bbgky.passed:
                    bbgky.record(diff, lambda: {"W": W.describe(), "N": N, "l": l, "f": format_polynomial(f)})

        Gamma = random_state_hierarchy(rng, None, d, n_atoms)
        X = ham_vf_weak(vlh_functional(W, d), Gamma, Algebra.Ginf())
        for l in (1, 2):
            f = random_sym_observable(rng, l, d, degree)
            if vlh.passed:
                vlh.record(X.level(l).pair(f) - vlh_vf_weak(Gamma, W, l).pair(f),
                           lambda: {"W": W.describe(), "l": l, "f": format_polynomial(f)})

        gamma = random_dirac_state(rng, 1, d, n_atoms)
        f = random_sym_observable(rng, 1, d, degree)
        lhs = ham_vf_weak(vl_functional(W, d), gamma, Algebra.gk()).level(1).pair(f)
        if vl.passed:
            vl.record(lhs - vlasov_vf_weak(gamma, W).pair(f),
                      lambda: {"W": W.describe(), "state": dirac_to_dict(gamma), "f": format_polynomial(f)})
    return [bbgky, vlh, vl]


def factorized_contract_suite(rng, count: int, *, d: int, degree: int, n_atoms: int) -> SuiteResult:
    """Contrato del campo en G_∞* evaluado sobre estados factorizados ι(γ)."""
    res = SuiteResult("vector_field:G_inf_factorized")
    make_leaf = hierarchy_leaf(d, [1, 2], degree)
    for _ in range(count):
        F = random_functional(rng, make_leaf)
        G = random_functional(rng, make_leaf)
        gamma = random_dirac_state(rng, 1, d, n_atoms)
        lhs, rhs = vector_field_contract(F, G, FactorizedState(gamma), Algebra.Ginf())
        if not res.record(lhs - rhs, lambda: {"F": functional_to_dict(F), "G": functional_to_dict(G),
                                              "state": dirac_to_dict(gamma)}):
            break
    return res


def first_failure(results: Sequence[SuiteResult]) -> Optional[SuiteResult]:
    return next((r for r in results if not r.passed), None)
