"""Linear differential operators with rational-function coefficients.

A ``DiffOp`` is a finite sum of terms ``coefficient * mixed partial``,
stored expanded as a map from derivative multi-indices to coefficients.
Operators are bound to a coordinate chart (an ordered subset of their
ring's variables); composing operators from different charts is an error.

``reduce_mod_h`` divides on the left by a Hamiltonian whose principal part
is a scalar multiple of the chart Laplacian, returning the remainder and
the cofactor witness, so membership in the left ideal (H) is decidable.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Optional, Tuple

from bocher.errors import ChartMismatch, UnsupportedHamiltonian
from bocher.poly import Ring
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat

MultiIndex = Tuple[int, ...]


class Chart:
    """Ordered coordinate variables inside a ring, plus Laplacian shape.

    kind "cartesian": the chart Laplacian is sum of squared partials.
    kind "characteristic": two variables with Laplacian 4*d/dz d/dzbar.
    """

    def __init__(self, name: str, variables: Tuple[str, ...], kind: str = "cartesian"):
        self.name = name
        self.vars = tuple(variables)
        self.kind = kind

    def __repr__(self):
        return f"Chart({self.name}:{','.join(self.vars)})"


class DiffOp:
    __slots__ = ("ring", "chart", "terms")

    def __init__(self, ring: Ring, chart: Chart, terms: Dict[MultiIndex, RatFun]):
        self.ring = ring
        self.chart = chart
        self.terms = {a: c for a, c in terms.items() if not c.is_zero()}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring, chart: Chart) -> "DiffOp":
        return cls(ring, chart, {})

    @classmethod
    def identity(cls, ring: Ring, chart: Chart) -> "DiffOp":
        return cls(ring, chart, {(0,) * len(chart.vars): RatFun.const(ring, 1)})

    @classmethod
    def partial(cls, ring: Ring, chart: Chart, var: str, order: int = 1) -> "DiffOp":
        alpha = [0] * len(chart.vars)
        alpha[chart.vars.index(var)] = order
        return cls(ring, chart, {tuple(alpha): RatFun.const(ring, 1)})

    @classmethod
    def mult(cls, f: RatFun, chart: Chart) -> "DiffOp":
        return cls(f.ring, chart, {(0,) * len(chart.vars): f})

    # -- basic structure -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        if not self.terms:
            return -1
        return max(sum(a) for a in self.terms)

    def coefficient(self, alpha: MultiIndex) -> RatFun:
        return self.terms.get(tuple(alpha), RatFun.const(self.ring, 0))

    def order_part(self, k: int) -> Dict[MultiIndex, RatFun]:
        return {a: c for a, c in self.terms.items() if sum(a) == k}

    def _check(self, other: "DiffOp"):
        if self.chart is not other.chart or self.ring is not other.ring:
            raise ChartMismatch(
                f"operators on different charts: {self.chart!r} vs {other.chart!r}"
            )

    # -- linear operations -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, GaussRat, RatFun)):
            other = DiffOp.mult(self._scalar(other), self.chart)
        self._check(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            s = terms.get(a)
            terms[a] = c if s is None else s + c
        return DiffOp(self.ring, self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.ring, self.chart, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, GaussRat, RatFun)):
            other = DiffOp.mult(self._scalar(other), self.chart)
        return self + (-other)

    def _scalar(self, c) -> RatFun:
        if isinstance(c, RatFun):
            return c
        return RatFun.const(self.ring, c)

    def scale(self, c) -> "DiffOp":
        f = self._scalar(c)
        return DiffOp(self.ring, self.chart, {a: f * v for a, v in self.terms.items()})

    def __mul__(self, other):
        """Operator composition; scalars multiply from the left."""
        if isinstance(other, (int, GaussRat, RatFun)):
            return self.scale(other)
        return self.compose(other)

    def __rmul__(self, other):
        if isinstance(other, (int, GaussRat, RatFun)):
            return self.scale(other)
        return NotImplemented

    # -- composition -------------------------------------------------------------

    def compose(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        chart_vars = self.chart.vars
        out: Dict[MultiIndex, RatFun] = {}
        for alpha, ca in self.terms.items():
            for beta, cb in other.terms.items():
                for gamma, mult in _split_leibniz(alpha):
                    d = cb
                    skip = False
                    for i, g in enumerate(gamma):
                        for _ in range(g):
                            d = d.derivative(chart_vars[i])
                            if d.is_zero():
                                skip = True
                                break
                        if skip:
                            break
                    if skip:
                        continue
                    idx = tuple(a - g + b for a, g, b in zip(alpha, gamma, beta))
                    coeff = ca * d if mult == 1 else ca * d * mult
                    s = out.get(idx)
                    out[idx] = coeff if s is None else s + coeff
        return DiffOp(self.ring, self.chart, out)

    def commutator(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) - other.compose(self)

    def anticommutator(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) + other.compose(self)

    def __pow__(self, n: int):
        out = DiffOp.identity(self.ring, self.chart)
        for _ in range(n):
            out = out.compose(self)
        return out

    # -- adjoint ----------------------------------------------------------------------

    def formal_adjoint(self) -> "DiffOp":
        """Adjoint for the flat measure: (c * d^a)* = (-1)^|a| d^a . c."""
        out = DiffOp.zero(self.ring, self.chart)
        for alpha, c in self.terms.items():
            d_alpha = DiffOp(self.ring, self.chart, {alpha: RatFun.const(self.ring, 1)})
            term = d_alpha.compose(DiffOp.mult(c, self.chart))
            if sum(alpha) % 2:
                term = -term
            out = out + term
        return out

    # -- action on functions --------------------------------------------------------------

    def apply(self, f: RatFun) -> RatFun:
        total = RatFun.const(self.ring, 0)
        for alpha, c in self.terms.items():
            g = f
            for i, k in enumerate(alpha):
                for _ in range(k):
                    g = g.derivative(self.chart.vars[i])
            total = total + c * g
        return total

    # -- substitution on coefficients -------------------------------------------------------

    def map_coefficients(self, fn) -> "DiffOp":
        return DiffOp(self.ring, self.chart, {a: fn(c) for a, c in self.terms.items()})

    def subs_params(self, mapping: Dict[str, RatFun]) -> "DiffOp":
        """Substitute non-chart variables in every coefficient."""
        for name in mapping:
            if name in self.chart.vars:
                raise ValueError("cannot substitute a chart variable here")
        return self.map_coefficients(lambda c: c.subs(mapping, self.ring))

    # -- display -----------------------------------------------------------------------------

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha in sorted(self.terms, key=lambda a: (sum(a), a), reverse=True):
            c = self.terms[alpha]
            dtoks = []
            for i, k in enumerate(alpha):
                if k:
                    tok = f"D[{self.chart.vars[i]}]"
                    dtoks.append(tok if k == 1 else f"{tok}^{k}")
            body = c.serialize()
            parts.append("*".join([body] + dtoks) if dtoks else body)
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOp({self.serialize()})"


def _split_leibniz(alpha: MultiIndex):
    """All (gamma <= alpha, multinomial coefficient) pairs."""
    out = [((), 1)]
    for a in alpha:
        nxt = []
        for prefix, m in out:
            for g in range(a + 1):
                nxt.append((prefix + (g,), m * comb(a, g)))
        out = nxt
    return out


# -- reduction modulo a Hamiltonian ------------------------------------------------


class IdealWitness:
    """Cofactor R with s = R . h + remainder, exactly."""

    __slots__ = ("cofactor",)

    def __init__(self, cofactor: DiffOp):
        self.cofactor = cofactor


def _principal_scale(h: DiffOp) -> RatFun:
    """g with 2nd-order part of h equal to g * (chart Laplacian)."""
    chart = h.chart
    second = h.order_part(2)
    if h.order() != 2 or not second:
        raise UnsupportedHamiltonian("Hamiltonian must be of order 2")
    n = len(chart.vars)
    if chart.kind == "cartesian":
        if n < 2:
            raise UnsupportedHamiltonian("need at least two chart variables")
        idxs = [tuple(2 if j == i else 0 for j in range(n)) for i in range(n)]
        g = second.get(idxs[0])
        if g is None:
            raise UnsupportedHamiltonian("no pure second derivative in first variable")
        for idx in idxs[1:]:
            if second.get(idx) != g:
                raise UnsupportedHamiltonian("principal part is not a Laplacian multiple")
        if len(second) != n:
            raise UnsupportedHamiltonian("extra mixed second-order terms")
        return g
    if chart.kind == "characteristic":
        if n != 2:
            raise UnsupportedHamiltonian("characteristic chart must be 2D")
        mixed = second.get((1, 1))
        if mixed is None or len(second) != 1:
            raise UnsupportedHamiltonian("principal part is not c(x)*dz dzbar")
        return mixed
    raise UnsupportedHamiltonian(f"unsupported chart kind {chart.kind}")


def reduce_mod_h(s: DiffOp, h: DiffOp) -> Tuple[DiffOp, IdealWitness]:
    """Left division: s = cofactor . h + remainder, remainder symbol-reduced.

    In a cartesian chart the remainder has no term whose symbol is divisible
    by the principal symbol of h; reduction rewrites the highest power of
    the *last* chart variable using all the others.
    """
    s._check(h)
    g = _principal_scale(h)
    chart = s.chart
    ring = s.ring
    n = len(chart.vars)
    cofactor = DiffOp.zero(ring, chart)
    rem = s

    def pick(terms):
        if chart.kind == "cartesian":
            cands = [a for a in terms if a[-1] >= 2]
        else:
            cands = [a for a in terms if a[0] >= 1 and a[1] >= 1]
        if not cands:
            return None
        return max(cands, key=lambda a: (sum(a), a[-1] if chart.kind == "cartesian" else min(a)))

    while True:
        alpha = pick(rem.terms)
        if alpha is None:
            break
        c = rem.terms[alpha]
        if chart.kind == "cartesian":
            beta = alpha[:-1] + (alpha[-1] - 2,)
        else:
            beta = (alpha[0] - 1, alpha[1] - 1)
        q = DiffOp(ring, chart, {beta: c / g})
        cofactor = cofactor + q
        rem = rem - q.compose(h)
    return rem, IdealWitness(cofactor)


def is_conformal_symmetry(s: DiffOp, h: DiffOp):
    """True plus the first-order cofactor witness when [s,h] lies in (h)."""
    rem, wit = reduce_mod_h(s.commutator(h), h)
    return rem.is_zero(), wit.cofactor, rem


# -- linear change of chart ------------------------------------------------------------


def invert_matrix(m, ring: Ring):
    """Exact inverse of a square RatFun matrix by Gaussian elimination."""
    n = len(m)
    a = [[m[i][j] for j in range(n)] + [RatFun.const(ring, 1 if j == i else 0) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inv()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def transform_linear(op: DiffOp, matrix, new_chart: Chart, new_ring: Ring) -> DiffOp:
    """Push an operator through the linear substitution old = matrix . new.

    ``matrix[i][j]`` is the coefficient of the j-th new variable in the i-th
    old variable; entries must be free of the new chart variables (they may
    involve the deformation parameter and formal roots).  Coefficients are
    substituted, and each old partial becomes the matching constant-
    coefficient combination of new partials.
    """
    n = len(op.chart.vars)
    if len(new_chart.vars) != n:
        raise ChartMismatch("chart dimension mismatch")
    matrix = [[entry.cast(new_ring) if entry.ring is not new_ring else entry
               for entry in row] for row in matrix]
    minv = invert_matrix(matrix, new_ring)
    # old partial i = sum_j minv[j][i] * new partial j
    subs_map = {
        op.chart.vars[i]: sum(
            (matrix[i][j] * RatFun.var(new_ring, new_chart.vars[j]) for j in range(n)),
            RatFun.const(new_ring, 0),
        )
        for i in range(n)
    }
    out: Dict[MultiIndex, RatFun] = {}
    zero_idx = (0,) * n
    for alpha, c in op.terms.items():
        new_c = c.subs(subs_map, new_ring)
        # expand the product of (sum_j minv[j][i] d_j)^alpha_i
        partial_terms: Dict[MultiIndex, RatFun] = {zero_idx: new_c}
        for i, k in enumerate(alpha):
            for _ in range(k):
                nxt: Dict[MultiIndex, RatFun] = {}
                for idx, coeff in partial_terms.items():
                    for j in range(n):
                        mj = minv[j][i]
                        if mj.is_zero():
                            continue
                        nidx = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                        v = coeff * mj
                        s = nxt.get(nidx)
                        nxt[nidx] = v if s is None else s + v
                partial_terms = nxt
        for idx, coeff in partial_terms.items():
            s = out.get(idx)
            out[idx] = coeff if s is None else s + coeff
    return DiffOp(new_ring, new_chart, out)
