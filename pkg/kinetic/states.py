# kinetic/states.py
# Estados con soporte compacto: sumas de Dirac, grillas 1-D periódicas en x y potencias
# tensoriales perezosas; pairings, marginales y los mapas ι_EM, ι_Lio, ι_mar, ι.
from __future__ import annotations

import logging
import math
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Dict, Iterable, List, Literal, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from sympy.utilities.iterables import multiset_permutations

from kinetic.errors import ArityError, MissingLevelError, ResourceCapError
from kinetic.observables import (
    Configuration,
    Monomial,
    PhasePoint,
    Polynomial,
    Scalar,
    SymObservable,
    _blocks,
    evaluate,
    symmetrize,
)

log = logging.getLogger(__name__)

Mode = Literal["exact", "float"]

# Tope de la cuadratura anidada sobre grillas.
GRID_NESTED_CAP = 3


def _is_exact(c: Scalar) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _total(values: Iterable[Scalar], exact: bool) -> Scalar:
    if exact:
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


# ---------- Dirac ----------

class Atom(NamedTuple):
    weight: Scalar
    points: Tuple[PhasePoint, ...]


class DiracState:
    """
    Σ_m w_m δ_{point_m} sobre (R^{2d})^k. El pairing siempre se hace contra la forma
    simétrica del observable, así un átomo no simetrizado representa a toda su órbita.
    """

    def __init__(self, k: int, d: int, atoms: Sequence[Tuple[Scalar, Sequence[PhasePoint]]]):
        if k < 1 or d < 1:
            raise ArityError(f"k y d deben ser positivos (k={k}, d={d})")
        self.k = k
        self.d = d
        clean: List[Atom] = []
        for w, pts in atoms:
            pts = tuple(PhasePoint(tuple(p[0]), tuple(p[1])) for p in pts)
            if len(pts) != k:
                raise ArityError(f"átomo con {len(pts)} puntos en un estado de nivel {k}")
            for p in pts:
                if len(p.x) != d or len(p.v) != d:
                    raise ArityError(f"punto de dimensión distinta a d={d}")
            if not _is_exact(w) and not math.isfinite(float(w)):
                raise ArityError("peso no finito")
            clean.append(Atom(w, pts))
        self.atoms: Tuple[Atom, ...] = tuple(clean)
        flags = {_is_exact(a.weight) and all(_is_exact(c) for p in a.points for c in (*p.x, *p.v)) for a in self.atoms}
        if len(flags) > 1:
            raise ArityError("estado mezcla datos exactos y float")
        self.exact = flags.pop() if flags else True
        self._moments: Dict[Monomial, Scalar] = {}

    @property
    def mode(self) -> Mode:
        return "exact" if self.exact else "float"

    @property
    def mass(self) -> Scalar:
        return _total((a.weight for a in self.atoms), self.exact)

    def pair(self, f: Polynomial) -> Scalar:
        if f.k != self.k or f.d != self.d:
            raise ArityError(f"observable (k={f.k}, d={f.d}) contra estado (k={self.k}, d={self.d})")
        f = symmetrize(f)
        return _total((a.weight * evaluate(f, a.points) for a in self.atoms), self.exact)

    def moment(self, block: Monomial) -> Scalar:
        """⟨Π x^e v^e', γ⟩ para un estado de nivel 1 (block de largo 2d)."""
        if self.k != 1:
            raise ArityError("los momentos por bloque son de estados de nivel 1")
        cached = self._moments.get(block)
        if cached is None:
            vals = []
            for a in self.atoms:
                p = a.points[0]
                coords = (*p.x, *p.v)
                term = a.weight
                for c, e in zip(coords, block):
                    if e:
                        term = term * c ** e
                vals.append(term)
            cached = self._moments[block] = _total(vals, self.exact)
        return cached

    def __repr__(self) -> str:
        return f"DiracState(k={self.k}, d={self.d}, atoms={len(self.atoms)}, mode={self.mode})"


# ---------- Grilla 1-D ----------

class GridState1D:
    """
    γ(x, v) en celdas de [0, L) × [−V, V] (x periódico), valores en centros de celda.
    Pairing por regla del punto medio.
    """

    k = 1
    d = 1
    exact = False

    def __init__(self, L: float, V: float, values: np.ndarray):
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise ArityError("values debe ser una matriz Nx × Nv")
        if L <= 0 or V <= 0:
            raise ArityError("L y V deben ser positivos")
        if not np.all(np.isfinite(values)):
            raise ArityError("valores no finitos en la grilla")
        self.L = float(L)
        self.V = float(V)
        self.values = values
        self.values.setflags(write=False)
        self.mass = float(values.sum() * self.dx * self.dv)
        self._moments: Dict[Monomial, float] = {}

    @property
    def Nx(self) -> int:
        return self.values.shape[0]

    @property
    def Nv(self) -> int:
        return self.values.shape[1]

    @property
    def dx(self) -> float:
        return self.L / self.values.shape[0]

    @property
    def dv(self) -> float:
        return 2.0 * self.V / self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.Nx) + 0.5) * self.dx

    @property
    def v(self) -> np.ndarray:
        return -self.V + (np.arange(self.Nv) + 0.5) * self.dv

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.v, indexing="ij")

    def density(self) -> np.ndarray:
        """ρ(x) = ∫ γ dv."""
        return self.values.sum(axis=1) * self.dv

    def with_values(self, values: np.ndarray) -> "GridState1D":
        return GridState1D(self.L, self.V, values)

    def pair(self, f: Polynomial) -> float:
        if f.k != 1 or f.d != 1:
            raise ArityError("la grilla sólo admite observables de nivel 1 con d = 1")
        X, Vm = self.mesh()
        vals = evaluate_on_mesh(f, [(X, Vm)])
        return float(np.sum(vals * self.values) * self.dx * self.dv)

    def pair_array(self, weights: np.ndarray) -> float:
        """Σ weights·γ·dx·dv para un integrando ya evaluado en la grilla."""
        return float(np.sum(weights * self.values) * self.dx * self.dv)

    def moment(self, block: Monomial) -> float:
        cached = self._moments.get(block)
        if cached is None:
            p, q = block
            X, Vm = self.mesh()
            cached = self._moments[block] = float(np.sum(X ** p * Vm ** q * self.values) * self.dx * self.dv)
        return cached

    def __repr__(self) -> str:
        return f"GridState1D(L={self.L}, V={self.V}, Nx={self.Nx}, Nv={self.Nv}, mass={self.mass:.6g})"


def evaluate_on_mesh(f: Polynomial, points: Sequence[Tuple[np.ndarray, np.ndarray]]):
    """Evalúa f (d = 1) con coordenadas array por partícula: [(x_1, v_1), (x_2, v_2), ...]."""
    coords: List[np.ndarray] = []
    for x, v in points:
        coords.extend([x, v])
    total = 0.0
    for m, c in f.terms.items():
        term = float(c)
        for idx, e in enumerate(m):
            if e:
                term = term * coords[idx] ** e
        total = total + term
    return total


# ---------- Potencias tensoriales ----------

BaseState = Union[DiracState, GridState1D]


class TensorPower:
    """γ^{⊗k} perezoso; el pairing de polinomios factoriza monomio a monomio."""

    def __init__(self, base: BaseState, k: int):
        if base.k != 1:
            raise ArityError("la base de una potencia tensorial debe ser de nivel 1")
        if k < 1:
            raise ArityError("k >= 1")
        self.base = base
        self.k = k
        self.d = base.d
        self.exact = base.exact

    @property
    def mass(self) -> Scalar:
        return self.base.mass ** self.k

    def pair(self, f: Polynomial) -> Scalar:
        if f.k != self.k or f.d != self.d:
            raise ArityError(f"observable (k={f.k}, d={f.d}) contra γ^⊗{self.k} (d={self.d})")
        vals = []
        for m, c in f.terms.items():
            term: Scalar = c if self.exact else float(c)
            for block in _blocks(m, self.k, self.d):
                term = term * self.base.moment(block)
            vals.append(term)
        return _total(vals, self.exact)

    def __repr__(self) -> str:
        return f"TensorPower({self.base!r}, k={self.k})"


class FactorizedState:
    """ι(γ) = (γ^{⊗k})_{k>=1}."""

    max_level: Optional[int] = None

    def __init__(self, base: BaseState):
        if base.k != 1:
            raise ArityError("la factorización parte de un estado de nivel 1")
        self.base = base
        self.d = base.d
        self.exact = base.exact

    def level(self, k: int) -> TensorPower:
        return TensorPower(self.base, k)

    def __repr__(self) -> str:
        return f"FactorizedState({self.base!r})"


def contract(f: Polynomial, base: BaseState) -> SymObservable:
    """⟨f(z, ·), γ^{⊗(k−1)}⟩ como observable de nivel 1 (f simétrica de nivel k)."""
    if base.k != 1 or f.d != base.d:
        raise ArityError("contract requiere base de nivel 1 y misma dimensión")
    f = symmetrize(f)
    out: Dict[Monomial, Fraction] = {}
    for m, c in f.terms.items():
        blocks = _blocks(m, f.k, f.d)
        factor: Scalar = c
        for block in blocks[1:]:
            factor = factor * base.moment(block)
        q = factor if isinstance(factor, Fraction) else Fraction(factor)
        out[blocks[0]] = out.get(blocks[0], Fraction(0)) + q
    return SymObservable._trusted(1, f.d, out)


# ---------- Jerarquías de estados ----------

LevelState = Union[DiracState, TensorPower]


class StateHierarchy:
    """Γ = (γ^{(k)})_k; el nivel k tiene k partículas."""

    def __init__(self, levels: Mapping[int, LevelState], max_level: Optional[int] = None):
        for k, s in levels.items():
            if s.k != k:
                raise ArityError(f"el nivel {k} trae un estado de {s.k} partículas")
        dims = {s.d for s in levels.values()}
        if len(dims) > 1:
            raise ArityError("niveles con dimensiones distintas")
        self.levels: Dict[int, LevelState] = dict(sorted(levels.items()))
        self.d = dims.pop() if dims else 1
        self.max_level = max_level if max_level is not None else max(self.levels, default=0)
        self.exact = all(s.exact for s in self.levels.values())

    def level(self, k: int) -> LevelState:
        s = self.levels.get(k)
        if s is None:
            raise MissingLevelError(f"falta el nivel {k} en la jerarquía de estados")
        return s

    def __repr__(self) -> str:
        return f"StateHierarchy(levels={list(self.levels)}, N={self.max_level})"


AnyState = Union[DiracState, GridState1D, TensorPower, StateHierarchy, FactorizedState]


def level_of(state: AnyState, k: int):
    """Estado de nivel k dentro de una jerarquía (o el propio estado si ya es de nivel k)."""
    if isinstance(state, (StateHierarchy, FactorizedState)):
        return state.level(k)
    if state.k != k:
        raise MissingLevelError(f"se pidió el nivel {k} a un estado de nivel {state.k}")
    return state


# ---------- Operaciones ----------

def pair(f: Polynomial, state, quadrature_spec: Optional[str] = None) -> Scalar:
    """⟨f, γ⟩. quadrature_spec sólo admite 'midpoint' (grillas)."""
    if quadrature_spec not in (None, "midpoint"):
        raise ValueError(f"cuadratura desconocida {quadrature_spec!r}")
    if isinstance(state, (StateHierarchy, FactorizedState)):
        state = state.level(f.k)
    if f.k != state.k:
        raise ArityError(f"observable de nivel {f.k} contra estado de nivel {state.k}")
    return state.pair(f)


def pair_hierarchy(F, state) -> Scalar:
    """Σ_k ⟨f^{(k)}, γ^{(k)}⟩ para una ObservableHierarchy."""
    vals = [pair(f, level_of(state, k)) for k, f in F.items()]
    return _total(vals, getattr(state, "exact", True))


def marginal(gamma: DiracState, k: int) -> DiracState:
    """
    Marginal de nivel k. Cada átomo reparte su peso en partes iguales entre los
    subconjuntos de k partículas; con pairing simétrico es el adjunto de ε_{k,N}.
    """
    N = gamma.k
    if not (1 <= k <= N):
        raise ArityError(f"marginal de nivel {k} de un estado de nivel {N}")
    if k == N:
        return gamma
    share = Fraction(1, math.comb(N, k)) if gamma.exact else 1.0 / math.comb(N, k)
    atoms = []
    for a in gamma.atoms:
        for idx in combinations(range(N), k):
            atoms.append((a.weight * share, tuple(a.points[i] for i in idx)))
    return DiracState(k, gamma.d, atoms)


def iota_EM(z: Configuration) -> DiracState:
    """(1/N) Σ_i δ_{z_i}."""
    N = z.n
    w: Scalar = Fraction(1, N) if z.exact else 1.0 / N
    return DiracState(1, z.d, [(w, (p,)) for p in z.points])


def iota_Lio(z: Configuration) -> DiracState:
    """(1/N!) Σ_π δ_{z_π}, guardado como un solo átomo con pairing simétrico."""
    w: Scalar = Fraction(1) if z.exact else 1.0
    return DiracState(z.n, z.d, [(w, z.points)])


def iota_mar(gamma: DiracState) -> StateHierarchy:
    N = gamma.k
    return StateHierarchy({k: marginal(gamma, k) for k in range(1, N + 1)}, N)


def iota_factorize(gamma: BaseState) -> FactorizedState:
    return FactorizedState(gamma)


# ---------- Integrandos no polinomiales ----------

Integrand = Callable[[Sequence[PhasePoint]], Scalar]


def _distinct_orders(points: Tuple[PhasePoint, ...]) -> List[Tuple[PhasePoint, ...]]:
    orders = multiset_permutations([(tuple(p.x), tuple(p.v)) for p in points])
    return [tuple(PhasePoint(x, v) for x, v in order) for order in orders]


def pair_callable(fn: Integrand, state, k: Optional[int] = None, *, symmetric: bool = False) -> Scalar:
    """
    ⟨fn, γ^{(k)}⟩ para integrandos numéricos. Dirac: suma sobre átomos, promediando sobre
    los órdenes de sus puntos salvo symmetric=True. Potencias tensoriales: suma anidada
    (Dirac) o cuadratura anidada con k <= 3 (grilla).
    """
    if k is not None:
        state = level_of(state, k)
    if isinstance(state, DiracState):
        vals = []
        for a in state.atoms:
            if symmetric or state.k == 1:
                vals.append(a.weight * fn(a.points))
            else:
                orders = _distinct_orders(a.points)
                vals.append(a.weight * _total((fn(o) for o in orders), False) / len(orders))
        return math.fsum(float(v) for v in vals)
    if isinstance(state, TensorPower):
        base = state.base
        if isinstance(base, DiracState):
            vals = []
            for combo in product(base.atoms, repeat=state.k):
                w = 1.0
                for a in combo:
                    w *= float(a.weight)
                vals.append(w * fn(tuple(a.points[0] for a in combo)))
            return math.fsum(vals)
        return _nested_grid(fn, base, state.k)
    if isinstance(state, GridState1D):
        return _nested_grid(fn, state, 1)
    raise TypeError(f"estado no soportado: {type(state).__name__}")


def _nested_grid(fn: Integrand, grid: GridState1D, k: int) -> float:
    if k > GRID_NESTED_CAP:
        raise ResourceCapError(f"cuadratura anidada sobre grilla limitada a k <= {GRID_NESTED_CAP} (pedido k={k})")
    X, Vm = grid.mesh()
    cell = grid.dx * grid.dv
    inner = PhasePoint((X,), (Vm,))
    if k == 1:
        return float(np.sum(fn((inner,)) * grid.values) * cell)
    # las primeras k−1 partículas recorren celdas; la última va vectorizada
    total = []
    cells = [(i, j) for i in range(grid.Nx) for j in range(grid.Nv) if grid.values[i, j] != 0.0]
    for outer in product(cells, repeat=k - 1):
        w = 1.0
        pts = []
        for i, j in outer:
            w *= grid.values[i, j] * cell
            pts.append(PhasePoint((float(X[i, j]),), (float(Vm[i, j]),)))
        vals = fn(tuple(pts) + (inner,))
        total.append(w * float(np.sum(vals * grid.values) * cell))
    return math.fsum(total)


# ---------- Generadores ----------

def _rand_rational(rng, lo: int = -3, hi: int = 3, max_den: int = 2) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, max_den + 1)))


def random_configuration(rng, N: int, d: int, exact: bool = True, scale: float = 1.0) -> Configuration:
    if exact:
        pairs = [
            (tuple(_rand_rational(rng) for _ in range(d)), tuple(_rand_rational(rng) for _ in range(d)))
            for _ in range(N)
        ]
    else:
        pairs = [(tuple(rng.normal(0.0, scale, d)), tuple(rng.normal(0.0, scale, d))) for _ in range(N)]
    return Configuration.from_pairs(pairs)


def random_dirac_state(rng, k: int, d: int, n_atoms: int, exact: bool = True, probability: bool = True) -> DiracState:
    atoms = []
    for _ in range(n_atoms):
        z = random_configuration(rng, k, d, exact)
        w: Scalar = Fraction(int(rng.integers(1, 5))) if exact else float(rng.uniform(0.5, 2.0))
        atoms.append((w, z.points))
    if probability:
        total = sum((a[0] for a in atoms), Fraction(0) if exact else 0.0)
        atoms = [(w / total, pts) for w, pts in atoms]
    return DiracState(k, d, atoms)


def random_state_hierarchy(rng, N: Optional[int], d: int, n_atoms: int, top: int = 3) -> StateHierarchy:
    """
    Jerarquía con niveles independientes (no necesariamente marginales entre sí): niveles
    1..N en 𝔊_N, o 1..top cuando N es None (𝔊_∞).
    """
    last = top if N is None else N
    return StateHierarchy({k: random_dirac_state(rng, k, d, n_atoms) for k in range(1, last + 1)}, N)


def perturb(state, nu, h: Scalar):
    """state + h·ν para estados Dirac (o jerarquías de Dirac nivel a nivel)."""
    if isinstance(state, StateHierarchy):
        levels = {}
        for k, s in state.levels.items():
            levels[k] = perturb(s, nu.levels[k], h) if isinstance(nu, StateHierarchy) and k in nu.levels else s
        return StateHierarchy(levels, state.max_level)
    if not isinstance(state, DiracState) or not isinstance(nu, DiracState):
        raise TypeError("perturb sólo combina estados Dirac")
    if state.k != nu.k or state.d != nu.d:
        raise ArityError("estados de distinto nivel o dimensión")
    atoms = [(a.weight, a.points) for a in state.atoms] + [(h * a.weight, a.points) for a in nu.atoms]
    return DiracState(state.k, state.d, atoms)
