# kinetic/lie_poisson.py
# Corchetes de Lie-Poisson sobre g_k*, G_N* y G_∞*, los cinco hamiltonianos, campos
# hamiltonianos en forma débil y los chequeos de morfismo de Poisson.
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Dict, Literal, Optional, Sequence, Tuple

import numpy as np
import sympy

from kinetic.dynamics.potentials import Potential, convolve_density
from kinetic.errors import ArityError
from kinetic.functionals import (
    Constant,
    Expectation,
    Functional,
    Product,
    Sum,
    TensorExpectation,
    pullback_factorize,
    pullback_marginal,
)
from kinetic.hierarchy import (
    ObservableHierarchy,
    bracket_coefficient,
    bracket_GN,
    bracket_Ginf,
    r_min,
    target_level,
)
from kinetic.observables import (
    Configuration,
    PhasePoint,
    Polynomial,
    Scalar,
    SymObservable,
    evaluate,
    kinetic_energy,
    lie_bracket_gk,
    poisson_bracket_standard,
    symmetric_basis,
    symmetrize,
)
from kinetic.states import (
    DiracState,
    FactorizedState,
    GridState1D,
    evaluate_on_mesh,
    iota_EM,
    iota_factorize,
    iota_Lio,
    iota_mar,
    level_of,
    marginal,
    pair_callable,
    pair_hierarchy,
)

log = logging.getLogger(__name__)

AlgebraKind = Literal["gk", "GN", "Ginf"]
MorphismName = Literal["iota_EM", "iota_Lio", "iota_mar", "iota_factorize"]


@dataclass(frozen=True)
class Algebra:
    kind: AlgebraKind
    N: Optional[int] = None

    @classmethod
    def gk(cls) -> "Algebra":
        return cls("gk")

    @classmethod
    def GN(cls, N: int) -> "Algebra":
        if N < 1:
            raise ArityError("N >= 1")
        return cls("GN", N)

    @classmethod
    def Ginf(cls) -> "Algebra":
        return cls("Ginf")

    def __str__(self) -> str:
        return f"G_{self.N}" if self.kind == "GN" else ("G_inf" if self.kind == "Ginf" else "g_k")


def _total(vals: Sequence[Scalar]) -> Scalar:
    if all(isinstance(v, Fraction) for v in vals):
        return sum(vals, Fraction(0))
    return math.fsum(float(v) for v in vals)


def _single_level(H: ObservableHierarchy, k: int) -> SymObservable:
    extra = [l for l in H.support() if l != k]
    if extra:
        raise ArityError(f"derivada con niveles {extra} sobre un estado de nivel {k}")
    return H.level(k)


# ---------- Corchete ----------

def lie_poisson_bracket(F: Functional, G: Functional, state, algebra: Algebra) -> Scalar:
    """{𝒻, 𝒢}(Γ) = ⟨[d𝒻[Γ], d𝒢[Γ]], Γ⟩ en el álgebra indicada."""
    dF = F.derivative(state)
    dG = G.derivative(state)
    if algebra.kind == "gk":
        k = state.k
        f = _single_level(dF, k)
        g = _single_level(dG, k)
        return state.pair(lie_bracket_gk(f, g))
    if algebra.kind == "GN":
        return pair_hierarchy(bracket_GN(dF, dG, algebra.N), state)  # type: ignore[arg-type]
    return pair_hierarchy(bracket_Ginf(dF, dG), state)


# ---------- Hamiltonianos ----------

def _check_potential(W: Potential, d: int) -> None:
    if W.d != d:
        raise ArityError(f"W es de dimensión {W.d} y el estado de dimensión {d}")


def _W_between(W: Potential, p: PhasePoint, q: PhasePoint):
    """W(x_p − x_q) para puntos con coordenadas escalares (exacto) o arrays de grilla."""
    if W.exact and not any(isinstance(c, np.ndarray) for c in (*p.x, *q.x)):
        return W.value([a - b for a, b in zip(p.x, q.x)])
    diff = np.stack([np.asarray(a, dtype=float) - np.asarray(b, dtype=float) for a, b in zip(p.x, q.x)], axis=-1)
    val = W.value_array(diff)
    return val if np.ndim(val) else float(val)


def hamiltonian_new(z: Configuration, W: Potential, N: Optional[int] = None) -> Scalar:
    """(1/N)(H_N + W(0)), H_N = ½Σ|v_i|² + (1/N)Σ_{i≠j} W(x_i − x_j)."""
    N = z.n if N is None else N
    if N != z.n:
        raise ArityError(f"N={N} no coincide con la configuración ({z.n} partículas)")
    _check_potential(W, z.d)
    exact = z.exact and W.exact
    one: Scalar = Fraction(1) if exact else 1.0
    kin = sum((one / 2 * c * c for p in z.points for c in p.v), 0 * one)
    pot = sum(
        (_W_between(W, z.points[i], z.points[j]) for i in range(N) for j in range(N) if i != j), 0 * one
    )
    H_N = kin + pot * one / N
    return (H_N + W.at_zero * one) * one / N


def lio_observable(W: Potential, N: int, d: int) -> SymObservable:
    """Observable de nivel N cuyo pairing es ℋ_Lio."""
    acc = Polynomial.zero(N, d) + kinetic_energy(N, d)
    pot = Polynomial.zero(N, d)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i != j:
                pot = pot + W.pair_observable(N, i, j)
    acc = acc + pot.scale(Fraction(1, N)) + W.at_zero
    return symmetrize(acc.scale(Fraction(1, N)))


def W_BBGKY(W: Potential, N: int, d: int) -> ObservableHierarchy:
    """(½|v_1|², ((N−1)/N) W(x_1−x_2) + W(0)/N, 0, ...); con N = 1 la constante pasa al nivel 1."""
    _check_potential(W, d)
    one = kinetic_energy(1, d)
    if N == 1:
        return ObservableHierarchy(d, {1: one + W.at_zero}, 1)
    two = W.pair_observable(2, 1, 2).scale(Fraction(N - 1, N)) + Fraction(W.at_zero) / N
    return ObservableHierarchy(d, {1: one, 2: two}, N)


def W_VlH(W: Potential, d: int) -> ObservableHierarchy:
    """(½|v|², W(x_1−x_2), 0, ...)."""
    _check_potential(W, d)
    return ObservableHierarchy(d, {1: kinetic_energy(1, d), 2: W.pair_observable(2, 1, 2)}, None)


def bbgky_generator_gap(W: Potential, N: int, d: int) -> Fraction:
    """max |coef(W_BBGKY) − coef(W_VlH)|; tiende a 0 como 1/N."""
    diff = W_BBGKY(W, N, d).with_max_level(None) - W_VlH(W, d)
    return max((abs(c) for _, f in diff.items() for c in f.terms.values()), default=Fraction(0))


def _pair_W(state, W: Potential, a: int = 1, b: int = 2) -> Scalar:
    """⟨W(x_a − x_b), γ⟩ para un estado de k >= 2 partículas."""
    if W.exact:
        return state.pair(W.pair_observable(state.k, a, b))
    return pair_callable(lambda pts: _W_between(W, pts[a - 1], pts[b - 1]), state)


def hamiltonian_lio(gamma, W: Potential) -> Scalar:
    """ℋ_Lio(γ) = ⟨(1/N)(½Σ|v_i|² + (1/N)Σ_{i≠j}W(x_i−x_j) + W(0)), γ⟩, γ de nivel N."""
    N, d = gamma.k, gamma.d
    _check_potential(W, d)
    if W.exact:
        return gamma.pair(lio_observable(W, N, d))
    kin = gamma.pair(kinetic_energy(N, d))
    pot = pair_callable(
        lambda pts: sum(_W_between(W, pts[i], pts[j]) for i in range(N) for j in range(N) if i != j),
        gamma,
    )
    return (float(kin) + pot / N + W.at_zero) / N


def hamiltonian_bbgky(Gamma, W: Potential, N: int) -> Scalar:
    if W.exact:
        return Expectation(W_BBGKY(W, N, Gamma.d)).evaluate(Gamma)
    kin = level_of(Gamma, 1).pair(kinetic_energy(1, Gamma.d))
    if N == 1:
        return float(kin) + W.at_zero
    pot = _pair_W(level_of(Gamma, 2), W)
    return float(kin) + (N - 1) / N * pot + W.at_zero / N * float(level_of(Gamma, 2).mass)


def hamiltonian_vlh(Gamma, W: Potential) -> Scalar:
    if W.exact:
        return Expectation(W_VlH(W, Gamma.d)).evaluate(Gamma)
    kin = level_of(Gamma, 1).pair(kinetic_energy(1, Gamma.d))
    return float(kin) + _pair_W(level_of(Gamma, 2), W)


def hamiltonian_vl(gamma, W: Potential) -> Scalar:
    """
    ℋ_Vl(γ) = ⟨½|v|², γ⟩ + ∫∫ W(x − y) γ(dz) γ(dz'). Dirac: doble suma sobre átomos;
    grilla: ⟨W∗ρ, ρ⟩ con la convolución periódica del solver.
    """
    if isinstance(gamma, FactorizedState):
        gamma = gamma.base
    _check_potential(W, gamma.d)
    kin = gamma.pair(kinetic_energy(1, gamma.d))
    if isinstance(gamma, GridState1D):
        rho = gamma.density()
        return float(kin) + float(np.sum(convolve_density(gamma, W) * rho) * gamma.dx)
    vals = []
    for a in gamma.atoms:
        for b in gamma.atoms:
            vals.append(a.weight * b.weight * _W_between(W, a.points[0], b.points[0]))
    return _total([kin] + vals)


def lio_functional(W: Potential, N: int, d: int) -> Functional:
    return Expectation(lio_observable(W, N, d))


def bbgky_functional(W: Potential, N: int, d: int) -> Functional:
    return Expectation(W_BBGKY(W, N, d))


def vlh_functional(W: Potential, d: int) -> Functional:
    return Expectation(W_VlH(W, d))


def vl_functional(W: Potential, d: int) -> Functional:
    return Expectation(kinetic_energy(1, d)) + TensorExpectation(W.pair_observable(2, 1, 2))


# ---------- Campos hamiltonianos débiles ----------

class WeakState:
    """f ↦ ⟨f, X^{(ℓ)}⟩ para observables de nivel ℓ. Lineal en f."""

    def __init__(self, level: int, action: Callable[[Polynomial], Scalar]):
        self.level = level
        self._action = action

    def pair(self, f: Polynomial) -> Scalar:
        if f.k != self.level:
            raise ArityError(f"observable de nivel {f.k} contra un campo de nivel {self.level}")
        return self._action(f)

    def __repr__(self) -> str:
        return f"WeakState(level={self.level})"


class WeakVectorField:
    """X_𝒢(Γ) nivel a nivel; levels es None cuando el soporte no está acotado (G_∞)."""

    def __init__(self, make_level: Callable[[int], WeakState], levels: Optional[Sequence[int]]):
        self._make = make_level
        self.levels = list(levels) if levels is not None else None
        self._cache: Dict[int, WeakState] = {}

    def level(self, l: int) -> WeakState:
        if self.levels is not None and l not in self.levels:
            raise ArityError(f"el campo no tiene nivel {l} (niveles {self.levels})")
        if l not in self._cache:
            self._cache[l] = self._make(l)
        return self._cache[l]

    def pair_hierarchy(self, F: ObservableHierarchy) -> Scalar:
        """Σ_ℓ ⟨f^{(ℓ)}, X^{(ℓ)}⟩."""
        return _total([self.level(l).pair(f) for l, f in F.items()])


def _pair_lifted(p: Polynomial, state_k) -> Scalar:
    """⟨ε_{n,k} Sym(p), γ^{(k)}⟩ para p de n <= k partículas."""
    n, k = p.k, state_k.k
    if n == k:
        return state_k.pair(p)
    if isinstance(state_k, DiracState):
        return marginal(state_k, n).pair(p)
    return state_k.pair(p.pad(k))


def _placed_sum(g: Polynomial, l: int, r: int, n: int) -> Polynomial:
    """Σ_{a ∈ P_r^ℓ} g_{(a, ℓ+1..n)}."""
    tail = list(range(l + 1, n + 1))
    acc = Polynomial.zero(n, g.d)
    for a in permutations(range(1, l + 1), r):
        acc = acc + g.relabel(list(a) + tail, n)
    return acc


def _gn_level(dG: ObservableHierarchy, Gamma, N: int, l: int) -> WeakState:
    def action(f: Polynomial) -> Scalar:
        vals = []
        for j, g in dG.items():
            state_k = level_of(Gamma, target_level(l, j, N))
            for r in range(r_min(l, j, N), min(l, j) + 1):
                n = l + j - r
                coef = bracket_coefficient(l, j, N, r) * math.comb(j, r)
                integrand = poisson_bracket_standard(f.pad(n), _placed_sum(g, l, r, n))
                if not integrand.is_zero():
                    vals.append(coef * _pair_lifted(integrand, state_k))
        return _total(vals)

    return WeakState(l, action)


def _ginf_level(dG: ObservableHierarchy, Gamma, l: int) -> WeakState:
    def action(f: Polynomial) -> Scalar:
        vals = []
        for j, g in dG.items():
            n = l + j - 1
            integrand = poisson_bracket_standard(f.pad(n), _placed_sum(g, l, 1, n))
            if not integrand.is_zero():
                vals.append(j * level_of(Gamma, n).pair(integrand))
        return _total(vals)

    return WeakState(l, action)


def ham_vf_weak(G: Functional, Gamma, algebra: Algebra) -> WeakVectorField:
    """
    X_𝒢(Γ) en forma débil: todas las derivadas caen sobre el observable de prueba y
    sobre los generadores de d𝒢[Γ], evaluados en los átomos del estado.
    """
    dG = G.derivative(Gamma)
    if algebra.kind == "gk":
        k = Gamma.k
        g = _single_level(dG, k)
        return WeakVectorField(
            lambda l: WeakState(l, lambda f: k * Gamma.pair(poisson_bracket_standard(f, g))), [k]
        )
    if algebra.kind == "GN":
        N = algebra.N
        if dG.top > N:  # type: ignore[operator]
            raise ArityError(f"generador con nivel {dG.top} > N={N}")
        return WeakVectorField(lambda l: _gn_level(dG, Gamma, N, l), range(1, N + 1))  # type: ignore[arg-type]
    return WeakVectorField(lambda l: _ginf_level(dG, Gamma, l), None)


def vector_field_contract(F: Functional, G: Functional, Gamma, algebra: Algebra) -> Tuple[Scalar, Scalar]:
    """(Σ_ℓ ⟨d𝒻[Γ]^{(ℓ)}, X_𝒢(Γ)^{(ℓ)}⟩, {𝒻, 𝒢}(Γ))."""
    X = ham_vf_weak(G, Gamma, algebra)
    return X.pair_hierarchy(F.derivative(Gamma)), lie_poisson_bracket(F, G, Gamma, algebra)


def _transport(f: Polynomial) -> Polynomial:
    """Σ_a v_a·∇_{x_a} f = {f, Σ_a ½|v_a|²}."""
    return poisson_bracket_standard(f, kinetic_energy(f.k, f.d))


def vlasov_vf_weak(gamma, W: Potential) -> WeakState:
    """
    ⟨f, X_{ℋ_Vl}(γ)⟩ = ⟨v·∇_x f, γ⟩ − 2⟨(∇W∗ρ)·∇_v f, γ⟩. En Dirac la fuerza se arma
    sumando sobre los átomos; en grilla con la convolución periódica.
    """
    _check_potential(W, gamma.d)
    d = gamma.d
    if isinstance(gamma, GridState1D):
        force = convolve_density(gamma, W, gradient=True)

        def grid_action(f: Polynomial) -> Scalar:
            X, V = gamma.mesh()
            dv = evaluate_on_mesh(f.derivative(1, 1, "v"), [(X, V)])
            return float(gamma.pair(_transport(f))) - 2 * gamma.pair_array(force[:, None] * dv)

        return WeakState(1, grid_action)

    forces = []
    for a in gamma.atoms:
        acc = [0 * a.weight] * d
        for b in gamma.atoms:
            grad = W.gradient([p - q for p, q in zip(a.points[0].x, b.points[0].x)])
            acc = [s + b.weight * g for s, g in zip(acc, grad)]
        forces.append(acc)

    def action(f: Polynomial) -> Scalar:
        f = symmetrize(f)
        vals = []
        for a, F_a in zip(gamma.atoms, forces):
            pt = a.points
            term = sum((c * evaluate(f.derivative(1, i + 1, "x"), pt) for i, c in enumerate(pt[0].v)), 0 * a.weight)
            term = term - 2 * sum((F_a[i] * evaluate(f.derivative(1, i + 1, "v"), pt) for i in range(d)), 0 * a.weight)
            vals.append(a.weight * term)
        return _total(vals)

    return WeakState(1, action)


def _coupling(f: Polynomial, W: Potential, l: int) -> Polynomial:
    """Σ_{a<=ℓ} (∇W)(x_a − x_{ℓ+1})·∇_{v_a}(f⊗1) sobre ℓ+1 partículas."""
    n = l + 1
    lifted = f.pad(n)
    acc = Polynomial.zero(n, f.d)
    for a in range(1, l + 1):
        for c in range(1, f.d + 1):
            acc = acc + W.gradient_observable(c, n, a, n) * lifted.derivative(a, c, "v")
    return acc


def vlh_vf_weak(Gamma, W: Potential, l: int) -> WeakState:
    """⟨f, X_{ℋ_VlH}(Γ)^{(ℓ)}⟩ = ⟨Σ_a v_a·∇_{x_a} f, γ^{(ℓ)}⟩ − 2⟨Σ_a ∇W(x_a−x_{ℓ+1})·∇_{v_a} f, γ^{(ℓ+1)}⟩."""

    def action(f: Polynomial) -> Scalar:
        kin = level_of(Gamma, l).pair(_transport(f))
        coup = level_of(Gamma, l + 1).pair(_coupling(f, W, l))
        return _total([kin, -2 * coup])

    return WeakState(l, action)


def _self_pairs(W: Potential, n: int, l: int) -> Polynomial:
    """Σ_{a≠b<=ℓ} W(x_a − x_b) sobre n partículas."""
    acc = Polynomial.zero(n, W.d)
    for a in range(1, l + 1):
        for b in range(1, l + 1):
            if a != b:
                acc = acc + W.pair_observable(n, a, b)
    return acc


def bbgky_case_vf_weak(Gamma, W: Potential, N: int, l: int) -> WeakState:
    """
    Campo de ℋ_BBGKY por casos:
      ℓ = 1:        ⟨{f, ½|v|²}, γ1⟩ + 2(N−1)/N ⟨{f⊗1, W(x1−x2)}, γ2⟩
      2 <= ℓ <= N−1: ⟨{f, Σ½|v_a|²}, γℓ⟩ + 2(N−ℓ)/N ⟨{f⊗1, Σ_a W(x_a−x_{ℓ+1})}, γ^{ℓ+1}⟩
                     + (1/N)⟨{f⊗1, Σ_{a≠b} W(x_a−x_b)}, γ^{ℓ+1}⟩
      ℓ = N:        ⟨{f, Σ½|v_a|² + (1/N)Σ_{a≠b} W(x_a−x_b)}, γN⟩
    """
    if not (1 <= l <= N):
        raise ArityError(f"nivel {l} fuera de 1..{N}")

    def action(f: Polynomial) -> Scalar:
        if l == N:
            h = kinetic_energy(N, f.d) + _self_pairs(W, N, N).scale(Fraction(1, N))
            return level_of(Gamma, N).pair(poisson_bracket_standard(f, h))
        lifted = f.pad(l + 1)
        kin = level_of(Gamma, l).pair(_transport(f))
        cross = Polynomial.zero(l + 1, f.d)
        for a in range(1, l + 1):
            cross = cross + W.pair_observable(l + 1, a, l + 1)
        vals = [kin, Fraction(2 * (N - l), N) * level_of(Gamma, l + 1).pair(poisson_bracket_standard(lifted, cross))]
        if l >= 2:
            self_term = poisson_bracket_standard(lifted, _self_pairs(W, l + 1, l))
            vals.append(Fraction(1, N) * level_of(Gamma, l + 1).pair(self_term))
        return _total(vals)

    return WeakState(l, action)


# ---------- Morfismos de Poisson ----------

def pullback_EM_polynomial(F: Functional, N: int, d: int) -> Polynomial:
    """ι_EM*𝒻 como polinomio en (R^{2d})^N; 𝒻 es un funcional sobre g_1*."""
    if isinstance(F, Constant):
        return Polynomial.constant(Fraction(F.value), N, d)
    if isinstance(F, Expectation):
        f = _single_level(F.generator, 1)
        acc = Polynomial.zero(N, d)
        for i in range(1, N + 1):
            acc = acc + f.relabel([i], N)
        return acc.scale(Fraction(1, N))
    if isinstance(F, TensorExpectation):
        acc = Polynomial.zero(N, d)
        for targets in product(range(1, N + 1), repeat=F.k):
            acc = acc + F.f.relabel(targets, N)
        return acc.scale(Fraction(1, N ** F.k))
    if isinstance(F, Sum):
        acc = Polynomial.zero(N, d)
        for t in F.terms:
            acc = acc + pullback_EM_polynomial(t, N, d)
        return acc
    if isinstance(F, Product):
        acc = Polynomial.constant(1, N, d)
        for f in F.factors:
            acc = acc * pullback_EM_polynomial(f, N, d)
        return acc
    raise ArityError(f"{type(F).__name__} no tiene pullback por ι_EM")


def pullback_Lio_polynomial(F: Functional, N: int, d: int) -> Polynomial:
    """ι_Lio*𝒻: los generadores de nivel N se evalúan directamente en z."""
    if isinstance(F, Constant):
        return Polynomial.constant(Fraction(F.value), N, d)
    if isinstance(F, Expectation):
        return _single_level(F.generator, N)
    if isinstance(F, Sum):
        acc = Polynomial.zero(N, d)
        for t in F.terms:
            acc = acc + pullback_Lio_polynomial(t, N, d)
        return acc
    if isinstance(F, Product):
        acc = Polynomial.constant(1, N, d)
        for f in F.factors:
            acc = acc * pullback_Lio_polynomial(f, N, d)
        return acc
    raise ArityError(f"{type(F).__name__} no tiene pullback por ι_Lio")


def _newtonian_bracket(P: Polynomial, Q: Polynomial, z: Configuration) -> Scalar:
    """N·{P, Q}_{(R^{2d})^N}(z)."""
    return z.n * evaluate(poisson_bracket_standard(P, Q), z)


def morphism_sides(name: MorphismName, F: Functional, G: Functional, source) -> Tuple[Scalar, Scalar]:
    """({map*𝒻, map*𝒢}_dominio(x), {𝒻, 𝒢}_codominio(map(x)))."""
    if name == "iota_EM":
        z: Configuration = source
        dom = _newtonian_bracket(pullback_EM_polynomial(F, z.n, z.d), pullback_EM_polynomial(G, z.n, z.d), z)
        cod = lie_poisson_bracket(F, G, iota_EM(z), Algebra.gk())
        return dom, cod
    if name == "iota_Lio":
        z = source
        dom = _newtonian_bracket(pullback_Lio_polynomial(F, z.n, z.d), pullback_Lio_polynomial(G, z.n, z.d), z)
        cod = lie_poisson_bracket(F, G, iota_Lio(z), Algebra.gk())
        return dom, cod
    if name == "iota_mar":
        gamma: DiracState = source
        N = gamma.k
        dom = lie_poisson_bracket(pullback_marginal(F, N), pullback_marginal(G, N), gamma, Algebra.gk())
        cod = lie_poisson_bracket(F, G, iota_mar(gamma), Algebra.GN(N))
        return dom, cod
    if name == "iota_factorize":
        gamma = source
        dom = lie_poisson_bracket(pullback_factorize(F), pullback_factorize(G), gamma, Algebra.gk())
        cod = lie_poisson_bracket(F, G, iota_factorize(gamma), Algebra.Ginf())
        return dom, cod
    raise ValueError(f"morfismo desconocido {name!r}")


def poisson_morphism_check(name: MorphismName, F: Functional, G: Functional, source) -> Scalar:
    """|{map*𝒻, map*𝒢}(x) − {𝒻, 𝒢}(map(x))|; 0 exacto en modo exacto."""
    dom, cod = morphism_sides(name, F, G, source)
    return abs(dom - cod)


def pullback_identities(W: Potential, z: Configuration, gamma1: DiracState, gammaN: DiracState) -> Dict[str, Scalar]:
    """
    Residuos de ι*ℋ_VlH = ℋ_Vl (en gamma1), ι_EM*ℋ_Vl = ℋ_New y ι_Lio*ℋ_Lio = ℋ_New (en z),
    ι_mar*ℋ_BBGKY = ℋ_Lio (en gammaN).
    """
    N = gammaN.k
    return {
        "iota_factorize:H_VlH=H_Vl": abs(hamiltonian_vlh(iota_factorize(gamma1), W) - hamiltonian_vl(gamma1, W)),
        "iota_EM:H_Vl=H_New": abs(hamiltonian_vl(iota_EM(z), W) - hamiltonian_new(z, W)),
        "iota_mar:H_BBGKY=H_Lio": abs(hamiltonian_bbgky(iota_mar(gammaN), W, N) - hamiltonian_lio(gammaN, W)),
        "iota_Lio:H_Lio=H_New": abs(hamiltonian_lio(iota_Lio(z), W) - hamiltonian_new(z, W)),
    }


# ---------- No degeneración ----------

def nondegeneracy_check(k: int, d: int, degree: int, rng) -> Tuple[int, int]:
    """
    (rango, dimensión) de la matriz de pairings de la base simétrica de grado <= degree
    contra estados Dirac simetrizados con puntos enteros aleatorios. Rango completo
    significa que un observable que se anula contra todos ellos es cero.
    """
    basis = symmetric_basis(k, d, degree)
    n_states = len(basis) + degree + 1
    M = sympy.zeros(n_states, len(basis))
    for row in range(n_states):
        pts = [
            PhasePoint(
                tuple(Fraction(int(rng.integers(-9, 10))) for _ in range(d)),
                tuple(Fraction(int(rng.integers(-9, 10))) for _ in range(d)),
            )
            for _ in range(k)
        ]
        state = DiracState(k, d, [(Fraction(1), pts)])
        for col, b in enumerate(basis):
            q = state.pair(b)
            M[row, col] = sympy.Rational(q.numerator, q.denominator)
    return M.rank(), len(basis)
