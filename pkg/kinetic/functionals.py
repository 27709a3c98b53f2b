# kinetic/functionals.py
# El álgebra A_∞: constantes, expectativas y sus sumas y productos, con evaluación,
# derivada de Gâteaux y los pullbacks por ι_ε (marginales) e ι (factorización).
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from kinetic.errors import ArityError, MissingLevelError
from kinetic.hierarchy import ObservableHierarchy, iota_epsilon, random_hierarchy, zero_hierarchy
from kinetic.observables import Polynomial, Scalar, random_sym_observable, symmetrize
from kinetic.states import (
    DiracState,
    FactorizedState,
    GridState1D,
    StateHierarchy,
    TensorPower,
    contract,
    level_of,
    perturb,
)

log = logging.getLogger(__name__)


def _exact_product(values: Sequence[Scalar]) -> Scalar:
    out: Scalar = Fraction(1)
    for v in values:
        out = out * v
    return out


class Functional:
    """Nodo de un árbol de A_∞. Los operadores +, −, * arman nuevos nodos."""

    def evaluate(self, state) -> Scalar:
        raise NotImplementedError

    def derivative(self, state) -> ObservableHierarchy:
        raise NotImplementedError

    def leaves(self) -> List["Functional"]:
        return [self]

    def __add__(self, other: Union["Functional", Scalar]) -> "Functional":
        return Sum([self, _lift(other)])

    __radd__ = __add__

    def __neg__(self) -> "Functional":
        return Product([Constant(-1), self])

    def __sub__(self, other: Union["Functional", Scalar]) -> "Functional":
        return Sum([self, -_lift(other)])

    def __mul__(self, other: Union["Functional", Scalar]) -> "Functional":
        return Product([self, _lift(other)])

    __rmul__ = __mul__


def _lift(x: Union[Functional, Scalar]) -> Functional:
    return x if isinstance(x, Functional) else Constant(x)


class Constant(Functional):
    def __init__(self, value: Scalar):
        self.value = value if isinstance(value, float) else Fraction(value)

    def evaluate(self, state) -> Scalar:
        return self.value

    def derivative(self, state) -> ObservableHierarchy:
        return zero_hierarchy(state.d)

    def __repr__(self) -> str:
        return f"Constant({self.value})"


class Expectation(Functional):
    """
    Γ ↦ Σ_k ⟨F^{(k)}, γ^{(k)}⟩. Sobre un estado de un solo nivel (g_k*) el generador
    tiene que vivir en ese nivel. La derivada es F, constante en Γ.
    """

    def __init__(self, generator: Union[ObservableHierarchy, Polynomial], max_level: Optional[int] = None):
        if isinstance(generator, Polynomial):
            generator = ObservableHierarchy.single(generator, max_level)
        self.generator = generator

    @property
    def levels(self) -> List[int]:
        return self.generator.support()

    def evaluate(self, state) -> Scalar:
        vals = []
        for k, f in self.generator.items():
            vals.append(level_of(state, k).pair(f))
        return sum(vals, Fraction(0)) if all(isinstance(v, Fraction) for v in vals) else math.fsum(map(float, vals))

    def derivative(self, state) -> ObservableHierarchy:
        return self.generator

    def __repr__(self) -> str:
        return f"Expectation({self.generator!r})"


class TensorExpectation(Functional):
    """γ ↦ ⟨f, γ^{⊗k}⟩ sobre g_1*; derivada k·⟨f(z, ·), γ^{⊗(k−1)}⟩."""

    def __init__(self, f: Polynomial):
        self.f = symmetrize(f)
        self.k = f.k

    @staticmethod
    def _base(state):
        if isinstance(state, FactorizedState):
            return state.base
        if isinstance(state, (DiracState, GridState1D)) and state.k == 1:
            return state
        raise ArityError("TensorExpectation se evalúa sobre estados de nivel 1")

    def evaluate(self, state) -> Scalar:
        return TensorPower(self._base(state), self.k).pair(self.f)

    def derivative(self, state) -> ObservableHierarchy:
        base = self._base(state)
        if self.k == 1:
            return ObservableHierarchy.single(self.f)
        return ObservableHierarchy.single(contract(self.f, base).scale(self.k))

    def __repr__(self) -> str:
        return f"TensorExpectation(k={self.k}, {self.f!r})"


class Sum(Functional):
    def __init__(self, terms: Sequence[Functional]):
        flat: List[Functional] = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, Sum) else [t])
        self.terms = flat

    def evaluate(self, state) -> Scalar:
        vals = [t.evaluate(state) for t in self.terms]
        if all(isinstance(v, Fraction) for v in vals):
            return sum(vals, Fraction(0))
        return math.fsum(map(float, vals))

    def derivative(self, state) -> ObservableHierarchy:
        acc = zero_hierarchy(state.d)
        for t in self.terms:
            acc = acc + t.derivative(state)
        return acc

    def leaves(self) -> List[Functional]:
        return [leaf for t in self.terms for leaf in t.leaves()]

    def __repr__(self) -> str:
        return "Sum(" + ", ".join(map(repr, self.terms)) + ")"


class Product(Functional):
    def __init__(self, factors: Sequence[Functional]):
        flat: List[Functional] = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, Product) else [f])
        self.factors = flat

    def evaluate(self, state) -> Scalar:
        vals = [f.evaluate(state) for f in self.factors]
        if all(isinstance(v, Fraction) for v in vals):
            return _exact_product(vals)
        return float(np.prod([float(v) for v in vals]))

    def derivative(self, state) -> ObservableHierarchy:
        # Leibniz: Σ_i (Π_{j≠i} 𝒢_j(Γ)) d𝒢_i[Γ]
        vals = [f.evaluate(state) for f in self.factors]
        acc = zero_hierarchy(state.d)
        for i, f in enumerate(self.factors):
            others = vals[:i] + vals[i + 1:]
            coef = _exact_product(others) if all(isinstance(v, Fraction) for v in others) else float(np.prod(others))
            if coef == 0:
                continue
            acc = acc + f.derivative(state).scale(coef)
        return acc

    def leaves(self) -> List[Functional]:
        return [leaf for f in self.factors for leaf in f.leaves()]

    def __repr__(self) -> str:
        return "Product(" + ", ".join(map(repr, self.factors)) + ")"


# ---------- Operaciones ----------

def eval_functional(F: Functional, state) -> Scalar:
    try:
        return F.evaluate(state)
    except MissingLevelError:
        log.debug("nivel faltante evaluando %r sobre %r", F, state)
        raise


def gateaux_derivative(F: Functional, state) -> ObservableHierarchy:
    return F.derivative(state)


def _rewrite(F: Functional, leaf_map) -> Functional:
    if isinstance(F, Sum):
        return Sum([_rewrite(t, leaf_map) for t in F.terms])
    if isinstance(F, Product):
        return Product([_rewrite(f, leaf_map) for f in F.factors])
    return leaf_map(F)


def pullback_marginal(F: Functional, N: int) -> Functional:
    """ι_mar*: Expectation(F) sobre G_N* pasa a Expectation(ι_ε F) sobre g_N*."""

    def leaf(x: Functional) -> Functional:
        if isinstance(x, Expectation):
            return Expectation(iota_epsilon(x.generator, N))
        if isinstance(x, Constant):
            return x
        raise ArityError(f"{type(x).__name__} no es un generador de A_∞ sobre G_N*")

    return _rewrite(F, leaf)


def pullback_factorize(F: Functional) -> Functional:
    """ι*: Expectation(F) sobre G_∞* pasa a Σ_k TensorExpectation(F^{(k)}) sobre g_1*."""

    def leaf(x: Functional) -> Functional:
        if isinstance(x, Expectation):
            terms: List[Functional] = [TensorExpectation(f) for _, f in x.generator.items()]
            return Sum(terms) if terms else Constant(0)
        if isinstance(x, Constant):
            return x
        raise ArityError(f"{type(x).__name__} no es un generador de A_∞ sobre G_∞*")

    return _rewrite(F, leaf)


# ---------- Chequeo de gradiente ----------

class GradientCheck:
    """Errores de la diferencia central contra ⟨d𝒻[γ], ν⟩ para cada paso h."""

    def __init__(self, steps: Sequence[Scalar], errors: Sequence[Scalar]):
        self.steps = list(steps)
        self.errors = list(errors)

    @property
    def exact(self) -> bool:
        return all(e == 0 for e in self.errors)

    @property
    def slope(self) -> Optional[float]:
        """Pendiente log-log del error; None si el acuerdo es exacto."""
        if self.exact:
            return None
        hs = np.log([float(h) for h in self.steps])
        es = np.log([float(abs(e)) for e in self.errors])
        return float(np.polyfit(hs, es, 1)[0])


def directional_derivative(F: Functional, state, nu) -> Scalar:
    """⟨d𝒻[Γ], ν⟩."""
    dF = F.derivative(state)
    vals = [level_of(nu, k).pair(f) for k, f in dF.items()]
    return sum(vals, Fraction(0)) if all(isinstance(v, Fraction) for v in vals) else math.fsum(map(float, vals))


def gradient_check(F: Functional, state, nu, steps: Sequence[Scalar] = (Fraction(1, 10**3), Fraction(1, 10**4), Fraction(1, 10**5))) -> GradientCheck:
    """(𝒻(Γ+hν) − 𝒻(Γ−hν))/(2h) − ⟨d𝒻[Γ], ν⟩ para estados Dirac; con h racional el error es exacto."""
    target = directional_derivative(F, state, nu)
    errors = []
    for h in steps:
        fd = (F.evaluate(perturb(state, nu, h)) - F.evaluate(perturb(state, nu, -h))) / (2 * h)
        errors.append(fd - target)
    return GradientCheck(steps, errors)


# ---------- Generadores ----------

def random_functional(rng, make_leaf, n_terms: int = 2, max_factors: int = 2) -> Functional:
    """Suma de productos de hojas; make_leaf(rng) produce una hoja."""
    terms: List[Functional] = []
    for _ in range(n_terms):
        n = int(rng.integers(1, max_factors + 1))
        factors = [make_leaf(rng) for _ in range(n)]
        c = Fraction(int(rng.integers(-3, 4)) or 1, int(rng.integers(1, 3)))
        terms.append(Product([Constant(c)] + factors))
    return Sum(terms)


def expectation_leaf(d: int, levels: Sequence[int], degree: int, max_level: Optional[int] = None):
    """Fábrica de hojas Expectation con generadores aleatorios en los niveles dados."""

    def make(rng) -> Functional:
        k = int(rng.choice(list(levels)))
        return Expectation(random_hierarchy(rng, d, [k], degree, max_level, n_terms=2))

    return make


def hierarchy_leaf(d: int, levels: Sequence[int], degree: int, max_level: Optional[int] = None):
    """Hojas Expectation con generadores en todos los niveles dados a la vez."""

    def make(rng) -> Functional:
        return Expectation(random_hierarchy(rng, d, levels, degree, max_level, n_terms=2))

    return make


def tensor_leaf(d: int, levels: Sequence[int], degree: int):
    def make(rng) -> Functional:
        k = int(rng.choice(list(levels)))
        f = random_sym_observable(rng, k, d, degree, n_terms=2)
        return TensorExpectation(f) if k > 1 else Expectation(f)

    return make
