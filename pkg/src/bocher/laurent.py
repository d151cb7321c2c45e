"""Laurent expansion in a distinguished variable.

The expansion variable (``eps`` by convention) must be an ordinary ring
variable of the expression.  Coefficients are exact rational functions that
are free of the expansion variable; the principal part is always finite
because the inputs are rational.
"""

from __future__ import annotations

from typing import Dict

from bocher.errors import NotExpandable, ZeroToOrder
from bocher.poly import Poly
from bocher.ratfun import RatFun


class LaurentSeries:
    __slots__ = ("var", "coeffs", "order")

    def __init__(self, var: str, coeffs: Dict[int, RatFun], order: int):
        self.var = var
        self.coeffs = {k: c for k, c in coeffs.items() if not c.is_zero()}
        self.order = order

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> int:
        if not self.coeffs:
            raise ZeroToOrder(f"series is zero below order {self.order}")
        return min(self.coeffs)

    def __getitem__(self, k: int) -> RatFun:
        if k >= self.order:
            raise KeyError(f"order {k} beyond truncation {self.order}")
        return self.coeffs.get(k, None) or _zero_like(self)

    def eval(self, eps_value, point) -> object:
        """Exact value of the truncated series at a rational point."""
        total = None
        for k, c in self.coeffs.items():
            term = c.eval(point) * eps_value ** k
            total = term if total is None else total + term
        return total

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.var != other.var:
            raise ValueError("series in different variables")
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = coeffs.get(k)
            coeffs[k] = c if s is None else s + c
        return LaurentSeries(self.var, coeffs, min(self.order, other.order))

    def scale(self, c: RatFun) -> "LaurentSeries":
        return LaurentSeries(self.var, {k: c * v for k, v in self.coeffs.items()}, self.order)

    def shift(self, n: int) -> "LaurentSeries":
        return LaurentSeries(self.var, {k + n: v for k, v in self.coeffs.items()}, self.order + n)

    def serialize(self) -> str:
        if not self.coeffs:
            return "0"
        parts = [f"{self.var}^{k}: {self.coeffs[k].serialize()}" for k in sorted(self.coeffs)]
        return "; ".join(parts)

    def __repr__(self):
        return f"LaurentSeries(O({self.var}^{self.order}); {self.serialize()})"


def _zero_like(series: LaurentSeries) -> RatFun:
    some = next(iter(series.coeffs.values()))
    return RatFun.const(some.ring, 0)


def _split_by_var(p: Poly, idx: int) -> Dict[int, Poly]:
    out: Dict[int, Dict] = {}
    for e, c in p.terms.items():
        k = e[idx]
        out.setdefault(k, {})[e[:idx] + (0,) + e[idx + 1:]] = c
    return {k: Poly(p.ring, t) for k, t in out.items()}


def laurent_expand(expr: RatFun, order: int, var: str = "eps") -> LaurentSeries:
    """All coefficients with exponent < order of expr around var = 0."""
    ring = expr.ring
    if var not in ring.index:
        raise NotExpandable(f"variable {var} not in ring")
    idx = ring.index[var]
    if expr.is_zero():
        return LaurentSeries(var, {}, order)
    nums = _split_by_var(expr.num, idx)
    dens = _split_by_var(expr.den, idx)
    if not dens:
        raise NotExpandable("denominator identically zero in the expansion variable")
    v_num = min(nums)
    v_den = min(dens)
    lead = v_num - v_den
    if order <= lead:
        return LaurentSeries(var, {}, order)
    nterms = order - lead
    d0 = RatFun(dens[v_den])
    inv0 = d0.inv()
    # power-series inverse of den / eps^v_den
    inv = [inv0]
    for m in range(1, nterms):
        acc = None
        for j in range(1, m + 1):
            dj = dens.get(v_den + j)
            if dj is None:
                continue
            term = RatFun(dj) * inv[m - j]
            acc = term if acc is None else acc + term
        inv.append(-inv0 * acc if acc is not None else RatFun.const(ring, 0))
    coeffs: Dict[int, RatFun] = {}
    for k in range(nterms):
        acc = None
        for j in range(k + 1):
            nj = nums.get(v_num + j)
            if nj is None:
                continue
            term = RatFun(nj) * inv[k - j]
            acc = term if acc is None else acc + term
        if acc is not None and not acc.is_zero():
            coeffs[lead + k] = acc
    return LaurentSeries(var, coeffs, order)


def valuation(expr: RatFun, var: str = "eps") -> int:
    """Exact order of vanishing (negative for poles) at var = 0."""
    if expr.is_zero():
        raise ZeroToOrder("valuation of the zero function")
    idx = expr.ring.index[var]
    v_num = min(e[idx] for e in expr.num.terms)
    v_den = min(e[idx] for e in expr.den.terms)
    return v_num - v_den


def leading_term(series: LaurentSeries):
    """(alpha, coefficient) of the lowest nonzero order."""
    alpha = series.valuation()
    return alpha, series.coeffs[alpha]


DEFAULT_EXTRA_ORDERS = 6


def expand_leading(expr: RatFun, var: str = "eps", extra: int = DEFAULT_EXTRA_ORDERS):
    """Expand to the leading exponent plus ``extra`` orders."""
    v = valuation(expr, var)
    return laurent_expand(expr, v + extra, var)
