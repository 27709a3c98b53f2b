# kinetic/polyparse.py
# Sintaxis textual de polinomios: variables x<i>_<c>, v<i>_<c> (x<i>, v<i> si d = 1; x, v si k = d = 1),
# literales enteros, racionales (3/2) y decimales, operadores + - * ^ y paréntesis.
import re
from fractions import Fraction
from typing import List, Optional, Tuple

from kinetic.errors import PolynomialSyntaxError
from kinetic.observables import Polynomial, SymObservable, symmetrize

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^/()]))"
)
_VAR_RE = re.compile(r"^(?P<kind>[xv])(?P<i>\d+)?(?:_(?P<c>\d+))?$")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    pos = 0
    out: List[Tuple[str, str]] = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialSyntaxError(f"carácter inesperado en la posición {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup or ""
        out.append((kind, m.group(kind)))
    return out


class _Parser:
    def __init__(self, text: str, k: int, d: int, allow_velocity: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0
        self.k = k
        self.d = d
        self.allow_velocity = allow_velocity

    def _peek(self) -> Optional[Tuple[str, str]]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def _take(self) -> Tuple[str, str]:
        tok = self._peek()
        if tok is None:
            raise PolynomialSyntaxError(f"expresión incompleta: {self.text!r}")
        self.pos += 1
        return tok

    def _expect(self, op: str) -> None:
        tok = self._take()
        if tok != ("op", op):
            raise PolynomialSyntaxError(f"se esperaba {op!r} y vino {tok[1]!r}")

    def parse(self) -> Polynomial:
        if not self.toks:
            return Polynomial.zero(self.k, self.d)
        p = self._expr()
        if self._peek() is not None:
            raise PolynomialSyntaxError(f"sobra texto desde {self._peek()[1]!r}")  # type: ignore[index]
        return p

    def _expr(self) -> Polynomial:
        acc = self._term()
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._take()[1]
            rhs = self._term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def _term(self) -> Polynomial:
        acc = self._unary()
        while self._peek() == ("op", "*"):
            self._take()
            acc = acc * self._unary()
        return acc

    def _unary(self) -> Polynomial:
        tok = self._peek()
        if tok == ("op", "-"):
            self._take()
            return -self._unary()
        if tok == ("op", "+"):
            self._take()
            return self._unary()
        return self._power()

    def _power(self) -> Polynomial:
        base = self._atom()
        if self._peek() == ("op", "^"):
            self._take()
            kind, val = self._take()
            if kind != "num" or not val.isdigit():
                raise PolynomialSyntaxError(f"exponente inválido {val!r} (entero no negativo)")
            return base ** int(val)
        return base

    def _atom(self) -> Polynomial:
        kind, val = self._take()
        if kind == "num":
            q = Fraction(val)
            if self._peek() == ("op", "/"):
                self._take()
                k2, den = self._take()
                if k2 != "num" or not den.isdigit() or int(den) == 0:
                    raise PolynomialSyntaxError(f"denominador inválido {den!r}")
                q = q / int(den)
            return Polynomial.constant(q, self.k, self.d)
        if kind == "ident":
            return self._variable(val)
        if val == "(":
            inner = self._expr()
            self._expect(")")
            return inner
        raise PolynomialSyntaxError(f"token inesperado {val!r}")

    def _variable(self, name: str) -> Polynomial:
        m = _VAR_RE.match(name)
        if not m:
            raise PolynomialSyntaxError(f"identificador desconocido {name!r}")
        kind = m.group("kind")
        if m.group("i") is None and self.k != 1:
            raise PolynomialSyntaxError(f"{name!r}: falta el índice de partícula (k={self.k})")
        i = int(m.group("i") or 1)
        c = m.group("c")
        if c is None:
            if self.d != 1:
                raise PolynomialSyntaxError(f"{name!r}: falta la coordenada (d={self.d})")
            c_idx = 1
        else:
            c_idx = int(c)
        if not (1 <= i <= self.k and 1 <= c_idx <= self.d):
            raise PolynomialSyntaxError(f"identificador desconocido {name!r} (k={self.k}, d={self.d})")
        if kind == "v" and not self.allow_velocity:
            raise PolynomialSyntaxError(f"{name!r}: sólo se admiten posiciones")
        return Polynomial.variable(i, c_idx, kind, self.k, self.d)  # type: ignore[arg-type]


def parse_polynomial(text: str, k: int, d: int, *, allow_velocity: bool = True) -> Polynomial:
    return _Parser(text, k, d, allow_velocity).parse()


def parse_observable(text: str, k: int, d: int) -> SymObservable:
    """Parsea y simetriza (Sym_k)."""
    return symmetrize(parse_polynomial(text, k, d))


def _var_name(idx: int, d: int) -> str:
    w = 2 * d
    i = idx // w + 1
    r = idx % w
    kind = "x" if r < d else "v"
    c = r % d + 1
    return f"{kind}{i}_{c}"


def format_polynomial(p: Polynomial) -> str:
    """Inverso de parse_polynomial; orden graded-lex decreciente."""
    if p.is_zero():
        return "0"
    parts: List[str] = []
    for m, c in p.sorted_terms():
        factors = []
        for idx, e in enumerate(m):
            if e == 1:
                factors.append(_var_name(idx, p.d))
            elif e > 1:
                factors.append(f"{_var_name(idx, p.d)}^{e}")
        mag = abs(c)
        coef = str(mag)
        if factors:
            body = "*".join(factors) if mag == 1 else "*".join([coef] + factors)
        else:
            body = coef
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {body}")
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]
