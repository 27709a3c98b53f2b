# kinetic/dynamics/residuals.py
# Residuos débiles: diferencia central de ⟨f, γ^t⟩ menos el lado derecho de la ecuación
# (Vlasov, BBGKY(k), jerarquía de Vlasov(k), Liouville), con las derivadas pasadas a f.
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, List, Literal, Mapping, Optional, Sequence, Union

import numpy as np

from kinetic.dynamics.potentials import Potential, convolve_density
from kinetic.errors import ArityError, ConfigError, MissingLevelError
from kinetic.lie_poisson import _coupling, _transport, vlasov_vf_weak
from kinetic.observables import PhasePoint, Polynomial, Scalar, _blocks, evaluate, symmetrize
from kinetic.states import (
    DiracState,
    FactorizedState,
    GridState1D,
    StateHierarchy,
    TensorPower,
    marginal,
    pair_callable,
)

EquationKind = Literal["vlasov", "bbgky", "vlh", "liouville"]
StatePath = Union[Mapping[float, Any], Callable[[float], Any]]

_EQ_RE = re.compile(r"^\s*(vlasov|liouville|bbgky|vlh)\s*(?:\(\s*(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class Equation:
    kind: EquationKind
    k: Optional[int] = None
    N: Optional[int] = None

    @classmethod
    def parse(cls, text: str, N: Optional[int] = None) -> "Equation":
        m = _EQ_RE.match(text)
        if not m:
            raise ConfigError(f"ecuación desconocida {text!r}")
        kind, k = m.group(1), m.group(2)
        if kind in ("bbgky", "vlh") and k is None:
            raise ConfigError(f"{kind} necesita el nivel: {kind}(k)")
        eq = cls(kind, int(k) if k else None, N)  # type: ignore[arg-type]
        eq.validate()
        return eq

    def validate(self) -> None:
        if self.kind in ("bbgky", "liouville") and self.N is None:
            raise ConfigError(f"{self.kind} necesita N")
        if self.kind == "bbgky" and not (1 <= (self.k or 0) <= self.N):  # type: ignore[operator]
            raise ConfigError(f"bbgky({self.k}) con N={self.N}")

    @property
    def level(self) -> int:
        if self.kind == "vlasov":
            return 1
        if self.kind == "liouville":
            return self.N  # type: ignore[return-value]
        return self.k  # type: ignore[return-value]

    def __str__(self) -> str:
        return f"{self.kind}({self.k})" if self.k is not None else self.kind


def _state_at(path: StatePath, t: float):
    if callable(path):
        try:
            return path(t)
        except KeyError:
            raise MissingLevelError(f"falta el estado en t={t}")
    for key, state in path.items():
        if abs(key - t) <= 1e-9 * max(1.0, abs(t)):
            return state
    raise MissingLevelError(f"falta el estado en t={t}")


def _level(state, k: int):
    """Estado de nivel k: marginal de un Dirac de más partículas, nivel de jerarquía o potencia tensorial."""
    if isinstance(state, (StateHierarchy, FactorizedState)):
        return state.level(k)
    if isinstance(state, (DiracState, GridState1D)) and state.k == 1 and k > 1:
        return TensorPower(state, k)
    if isinstance(state, DiracState) and state.k > k:
        return marginal(state, k)
    if state.k != k:
        raise MissingLevelError(f"no hay nivel {k} en un estado de nivel {state.k}")
    return state


def _factorized_base(state):
    if isinstance(state, FactorizedState):
        return state.base
    if isinstance(state, (DiracState, GridState1D)) and state.k == 1:
        return state
    return None


# ---------- Lado derecho: interacción ----------

def _grad_v(f: Polynomial, i: int, c: int) -> Polynomial:
    return f.derivative(i, c, "v")


def _self_interaction(f: Polynomial, W: Potential) -> Polynomial:
    """Σ_{i,j<=k} ∇W(x_i − x_j)·∇_{v_i} f."""
    k = f.k
    acc = Polynomial.zero(k, f.d)
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j:
                for c in range(1, f.d + 1):
                    acc = acc + W.gradient_observable(c, k, i, j) * _grad_v(f, i, c)
    return acc


def _numeric_self(f: Polynomial, W: Potential) -> Callable[[Sequence[PhasePoint]], float]:
    k, d = f.k, f.d
    dv = {(i, c): _grad_v(f, i, c) for i in range(1, k + 1) for c in range(1, d + 1)}

    def fn(pts):
        total = 0.0
        for i in range(k):
            for j in range(k):
                if i != j:
                    g = W.gradient([float(a) - float(b) for a, b in zip(pts[i].x, pts[j].x)])
                    total += sum(float(g[c]) * float(evaluate(dv[(i + 1, c + 1)], pts)) for c in range(d))
        return total

    return fn


def _numeric_coupling(f: Polynomial, W: Potential) -> Callable[[Sequence[PhasePoint]], float]:
    """Σ_{i<=k} ∇W(x_i − x_{k+1})·∇_{v_i} f sobre k+1 puntos."""
    k, d = f.k, f.d
    dv = {(i, c): _grad_v(f, i, c) for i in range(1, k + 1) for c in range(1, d + 1)}

    def fn(pts):
        head, last = pts[:k], pts[k]
        total = 0.0
        for i in range(k):
            g = W.gradient([float(a) - float(b) for a, b in zip(head[i].x, last.x)])
            total += sum(float(g[c]) * float(evaluate(dv[(i + 1, c + 1)], head)) for c in range(d))
        return total

    return fn


def _point_forces(base, W: Potential):
    """(∇W∗γ) en cada átomo (Dirac) o en cada columna x de la grilla."""
    if isinstance(base, GridState1D):
        return convolve_density(base, W, gradient=True)
    forces = []
    for a in base.atoms:
        acc = [0.0] * base.d
        for b in base.atoms:
            g = W.gradient([float(p) - float(q) for p, q in zip(a.points[0].x, b.points[0].x)])
            acc = [s + float(b.weight) * float(x) for s, x in zip(acc, g)]
        forces.append(acc)
    return forces


def _weighted_moment(base, block, c: int, forces) -> float:
    """⟨F_c(x) x^p v^q, γ⟩."""
    if isinstance(base, GridState1D):
        p, q = block
        X, V = base.mesh()
        return base.pair_array(forces[:, None] * X ** p * V ** q)
    total = 0.0
    for a, F_a in zip(base.atoms, forces):
        coords = (*a.points[0].x, *a.points[0].v)
        term = float(a.weight) * F_a[c - 1]
        for x, e in zip(coords, block):
            if e:
                term *= float(x) ** e
        total += term
    return total


def _mean_field_coupling(f: Polynomial, base, forces) -> float:
    """Σ_i ⟨(∇W∗ρ)(x_i)·∇_{v_i} f, γ^{⊗k}⟩ factorizando monomio a monomio."""
    k, d = f.k, f.d
    total = 0.0
    for i in range(1, k + 1):
        for c in range(1, d + 1):
            for m, coef in _grad_v(f, i, c).terms.items():
                blocks = _blocks(m, k, d)
                term = float(coef) * _weighted_moment(base, blocks[i - 1], c, forces)
                for a, block in enumerate(blocks):
                    if a != i - 1:
                        term *= float(base.moment(block))
                total += term
    return total


def _pair(state, p) -> Scalar:
    if callable(p):
        return pair_callable(p, state)
    return state.pair(p)


def _total(vals: Sequence[Scalar]) -> Scalar:
    if all(isinstance(v, Fraction) for v in vals):
        return sum(vals, Fraction(0))
    return math.fsum(float(v) for v in vals)


def weak_rhs(eq: Equation, state, f: Polynomial, W: Potential) -> Scalar:
    """Lado derecho débil de la ecuación en el estado dado."""
    f = symmetrize(f)
    if f.k != eq.level:
        raise ArityError(f"observable de nivel {f.k} para {eq} (nivel {eq.level})")
    if eq.kind == "vlasov":
        base = _factorized_base(state)
        if base is None:
            raise ArityError("vlasov se evalúa sobre estados de nivel 1")
        return vlasov_vf_weak(base, W).pair(f)

    k = eq.level
    gamma_k = _level(state, k)
    kinetic = _pair(gamma_k, _transport(f))

    if eq.kind == "vlh":
        base = _factorized_base(state)
        if base is not None and (isinstance(base, GridState1D) or not W.exact):
            return float(kinetic) - 2.0 * _mean_field_coupling(f, base, _point_forces(base, W))
        coupling = _coupling(f, W, k) if W.exact else _numeric_coupling(f, W)
        return _total([kinetic, -2 * _pair(_level(state, k + 1), coupling)])

    # bbgky(k) y liouville (k = N)
    N = eq.N
    own = _self_interaction(f, W) if W.exact else _numeric_self(f, W)
    vals = [kinetic, -Fraction(2, N) * _pair(gamma_k, own)]  # type: ignore[arg-type]
    if k < N:  # type: ignore[operator]
        coupling = _coupling(f, W, k) if W.exact else _numeric_coupling(f, W)
        vals.append(-Fraction(2 * (N - k), N) * _pair(_level(state, k + 1), coupling))  # type: ignore[operator]
    return _total(vals)


def time_derivative(eq: Equation, path: StatePath, f: Polynomial, t: float, dt_fd: float) -> float:
    """(⟨f, γ^{t+h}⟩ − ⟨f, γ^{t−h}⟩) / 2h."""
    f = symmetrize(f)
    plus = _level(_state_at(path, t + dt_fd), eq.level).pair(f)
    minus = _level(_state_at(path, t - dt_fd), eq.level).pair(f)
    return (float(plus) - float(minus)) / (2 * dt_fd)


def weak_residual(eq: Union[Equation, str], path: StatePath, f: Polynomial, t: float, dt_fd: float,
                  W: Potential, N: Optional[int] = None) -> float:
    if isinstance(eq, str):
        eq = Equation.parse(eq, N)
    if dt_fd <= 0:
        raise ArityError("dt_fd > 0")
    return time_derivative(eq, path, f, t, dt_fd) - float(weak_rhs(eq, _state_at(path, t), f, W))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pendiente de ajuste lineal de log|y| contra log x."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.abs(np.asarray(ys, float))), 1)[0])


def residual_study(eq: Union[Equation, str], path: StatePath, f: Polynomial, t: float,
                   dt_fds: Sequence[float], W: Potential, N: Optional[int] = None) -> List[float]:
    """|residuo| para cada dt_fd (refinamiento)."""
    return [abs(weak_residual(eq, path, f, t, h, W, N)) for h in dt_fds]
