"""Normalized multivariate rational functions.

``RatFun`` keeps a canonical form: the denominator is nonzero, radical-free
(formal square roots are rationalized away), coprime to the numerator, and
monic under the graded-lex order.  Equal values therefore have identical
expanded representations, which the golden-file serialization relies on.

Internally the denominator is held as a product of monic, pairwise-coprime
factors with multiplicities.  The workloads in this package produce
denominators that are high powers of a few small polynomials, so keeping
the factorization makes every gcd a small one; the expanded denominator is
cached for equality, hashing and printing.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from bocher.errors import DivisionByZero
from bocher.poly import Poly, Ring, div_exact, poly_gcd
from bocher.scalars import GaussRat, ONE

Factors = Tuple[Tuple[Poly, int], ...]


class RatFun:
    __slots__ = ("num", "_fac", "_den")

    def __init__(self, num: Poly, den: Optional[Poly] = None, normalized: bool = False):
        if den is None:
            self.num = num
            self._fac: Factors = ()
            self._den = num.ring.one()
            return
        if num.ring is not den.ring:
            raise ValueError("numerator and denominator from different rings")
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if normalized and den.is_const() and den.const_value().is_one():
            self.num = num
            self._fac = ()
            self._den = den
            return
        num, fac = _rationalize(num, den)
        self.num, self._fac = _normalize(num, fac)
        self._den = None

    @classmethod
    def _make(cls, num: Poly, fac: Factors) -> "RatFun":
        self = object.__new__(cls)
        self.num, self._fac = _normalize(num, list(fac))
        self._den = None
        return self

    @property
    def den(self) -> Poly:
        if self._den is None:
            d = self.num.ring.one()
            for f, k in self._fac:
                d = d * f ** k
            self._den = d
        return self._den

    @property
    def ring(self) -> Ring:
        return self.num.ring

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, ring: Ring, c) -> "RatFun":
        return cls(ring.const(c))

    @classmethod
    def var(cls, ring: Ring, name: str) -> "RatFun":
        return cls(ring.var(name))

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and not self._fac

    def const_value(self) -> GaussRat:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.const_value()

    def is_poly(self) -> bool:
        return not self._fac

    def as_poly(self) -> Poly:
        if self._fac:
            raise ValueError("denominator is not constant")
        return self.num

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            return other
        if isinstance(other, Poly):
            return RatFun(other)
        if isinstance(other, (int, GaussRat)):
            return RatFun.const(self.ring, other)
        raise TypeError(f"cannot combine RatFun with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        if self._fac == o._fac:
            return RatFun._make(self.num + o.num, self._fac)
        lcm = _merge_lcm(self._fac, o._fac)
        n1 = self.num * _quotient(lcm, self._fac, self.ring)
        n2 = o.num * _quotient(lcm, o._fac, self.ring)
        return RatFun._make(n1 + n2, lcm)

    __radd__ = __add__

    def __neg__(self):
        out = object.__new__(RatFun)
        out.num = -self.num
        out._fac = self._fac
        out._den = self._den
        return out

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return RatFun(self.ring.zero())
        fac = list(self._fac) + list(o._fac)
        return RatFun._make(self.num * o.num, fac)

    __rmul__ = __mul__

    def inv(self) -> "RatFun":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        new_num = self.ring.one()
        for f, k in self._fac:
            new_num = new_num * f ** k
        num, fac = _rationalize(new_num, self.num)
        return RatFun._make(num, fac)

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        if n == 0:
            return RatFun.const(self.ring, 1)
        out = object.__new__(RatFun)
        out.num = self.num ** n
        out._fac = tuple((f, k * n) for f, k in self._fac)
        out._den = None
        return out

    def __eq__(self, other):
        if isinstance(other, (int, GaussRat, Poly)):
            other = self._coerce(other)
        if not isinstance(other, RatFun):
            return NotImplemented
        if self.num != other.num:
            return False
        return self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    # -- calculus ----------------------------------------------------------------

    def derivative(self, name: str) -> "RatFun":
        n = self.num
        dn = n.derivative(name)
        if not self._fac:
            return RatFun(dn)
        # d(n/prod f^k) = [n' prod f - n sum k f' prod_{j!=i} f] / prod f^(k+1)
        ring = self.ring
        fs = [f for f, _ in self._fac]
        total = ring.zero()
        prod_all = ring.one()
        for f in fs:
            prod_all = prod_all * f
        for i, (f, k) in enumerate(self._fac):
            df = f.derivative(name)
            if df.is_zero():
                continue
            rest = ring.one()
            for j, g in enumerate(fs):
                if j != i:
                    rest = rest * g
            total = total + n * df * rest * k
        new_num = dn * prod_all - total
        fac = [(f, k + 1) for f, k in self._fac]
        return RatFun._make(new_num, fac)

    # -- evaluation / substitution --------------------------------------------------

    def eval(self, point: Dict[str, GaussRat]) -> GaussRat:
        dv = ONE_G
        for f, k in self._fac:
            v = f.eval(point)
            if v.is_zero():
                raise DivisionByZero("denominator vanishes at the point")
            dv = dv * v ** k
        return self.num.eval(point) / dv

    def subs(self, mapping: Dict[str, "RatFun"], target: Optional[Ring] = None) -> "RatFun":
        """Substitute rational values for variables (by name)."""
        if target is None:
            target = next(iter(mapping.values())).ring if mapping else self.ring
        cache: Dict[tuple, RatFun] = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                name = self.ring.names[i]
                base = mapping.get(name)
                if base is None:
                    base = RatFun.var(target, name)
                out = base
                for _ in range(k - 1):
                    out = out * base
                cache[key] = out
            return cache[key]

        def eval_poly(p: Poly) -> RatFun:
            total = RatFun.const(target, 0)
            for e, c in p.terms.items():
                term = RatFun.const(target, c)
                for i, k in enumerate(e):
                    if k:
                        term = term * power(i, k)
                total = total + term
            return total

        out = eval_poly(self.num)
        for f, k in self._fac:
            out = out / eval_poly(f) ** k
        return out

    def cast(self, target: Ring) -> "RatFun":
        if target is self.ring:
            return self
        out = object.__new__(RatFun)
        out.num = self.num.cast(target)
        out._fac = tuple((f.cast(target), k) for f, k in self._fac)
        out._den = None
        return out

    # -- structure ---------------------------------------------------------------------

    def homogeneous_degree(self, names) -> Optional[int]:
        """Weighted degree in ``names`` when homogeneous there, else None."""
        idxs = [self.ring.index[n] for n in names]

        def hdeg(p: Poly) -> Optional[int]:
            degs = {sum(e[i] for i in idxs) for e in p.terms}
            return degs.pop() if len(degs) == 1 else None

        dn = hdeg(self.num)
        if dn is None:
            return None
        total = dn
        for f, k in self._fac:
            df = hdeg(f)
            if df is None:
                return None
            total -= df * k
        return total

    def denominator_factors(self) -> Factors:
        return self._fac

    def __repr__(self):
        return f"RatFun({self.serialize()})"

    def serialize(self) -> str:
        den = self.den
        if den.is_const() and den.const_value().is_one():
            return f"({self.num.serialize()})"
        return f"({self.num.serialize()})/({den.serialize()})"


ONE_G = GaussRat(1)


def _rationalize(num: Poly, den: Poly):
    """Clear formal roots from the denominator; return (num, factor list)."""
    ring = num.ring
    while den.has_radicals():
        idx = next(i for e in den.terms for i in ring.radicals if e[i])
        plain = {}
        times_r = {}
        for e, c in den.terms.items():
            if e[idx]:
                times_r[e[:idx] + (0,) + e[idx + 1:]] = c
            else:
                plain[e] = c
        p = Poly(ring, plain)
        q = Poly(ring, times_r)
        r = Poly(ring, {tuple(1 if i == idx else 0 for i in range(ring.nvars)): ONE})
        num = num * (p - r * q)
        den = p * p - ring.radical_power(idx, 1) * (q * q)
        if den.is_zero():
            raise DivisionByZero("denominator vanishes after rationalization")
    return num, [(den, 1)]


def _refine_coprime(fac, scalar):
    """Monic, consolidated, pairwise-coprime factor base."""
    queue = [(f, k) for f, k in fac if k]
    done: List[Tuple[Poly, int]] = []
    while queue:
        f, k = queue.pop()
        if f.is_const():
            scalar = scalar * f.const_value() ** k
            continue
        _, lc = f.leading()
        if not lc.is_one():
            scalar = scalar * lc ** k
            f = f.monic()
        merged = False
        for i, (g, m) in enumerate(done):
            if f == g:
                done[i] = (g, m + k)
                merged = True
                break
            h = poly_gcd(f, g)
            if not h.is_const():
                done.pop(i)
                queue.append((h, m + k))
                qg = div_exact(g, h)
                queue.append((qg, m))
                qf = div_exact(f, h)
                queue.append((qf, k))
                merged = True
                break
        if not merged:
            done.append((f, k))
    return done, scalar


def _normalize(num: Poly, fac: List[Tuple[Poly, int]]):
    """Monic pairwise-coprime factor base, fully cancelled against num."""
    if num.is_zero():
        return num, ()
    scalar = ONE_G
    work = [(f, k) for f, k in fac]
    while True:
        work, scalar = _refine_coprime(work, scalar)
        changed = False
        out: List[Tuple[Poly, int]] = []
        for f, k in work:
            g = _gcd_with_components(num, f)
            if g.is_const():
                out.append((f, k))
                continue
            t = 0
            while t < k:
                try:
                    num = div_exact(num, g)
                    t += 1
                except ValueError:
                    break
            if t == 0:
                out.append((f, k))
                continue
            changed = True
            if k - t:
                out.append((g, k - t))
            rest = div_exact(f, g)
            if not rest.is_const():
                out.append((rest, k))
            # f and g are monic, so a constant rest can only be 1
        work = out
        if not changed:
            break
    if not scalar.is_one():
        num = num * scalar.inv()
    work.sort(key=_factor_key)
    return num, tuple(work)


def _factor_key(entry):
    f, k = entry
    return (f.degree(), len(f.terms), sorted(f.terms), k)


def _gcd_with_components(num: Poly, f: Poly) -> Poly:
    """gcd of a (possibly radical-bearing) numerator with a plain factor."""
    g = f
    for comp in _radical_components(num):
        g = poly_gcd(g, comp)
        if g.is_const():
            break
    return g


def _merge_lcm(fa: Factors, fb: Factors) -> List[Tuple[Poly, int]]:
    out: List[Tuple[Poly, int]] = list(fa)
    for g, m in fb:
        placed = False
        for i, (f, k) in enumerate(out):
            if f == g:
                out[i] = (f, max(k, m))
                placed = True
                break
        if not placed:
            out.append((g, m))
    return out


def _quotient(lcm: List[Tuple[Poly, int]], fac: Factors, ring: Ring) -> Poly:
    """Product of lcm / fac as a polynomial (fac entries appear in lcm)."""
    out = ring.one()
    for f, k in lcm:
        k0 = 0
        for g, m in fac:
            if g == f:
                k0 = m
                break
        if k > k0:
            out = out * f ** (k - k0)
    return out


def _radical_components(p: Poly):
    """Split into radical-free polynomials keyed by radical monomial."""
    ring = p.ring
    if not ring.radicals:
        return [p] if not p.is_zero() else []
    comps: Dict[tuple, Dict] = {}
    for e, c in p.terms.items():
        key = tuple(e[i] for i in ring.radicals)
        stripped = list(e)
        for i in ring.radicals:
            stripped[i] = 0
        comps.setdefault(key, {})[tuple(stripped)] = c
    return [Poly(ring, t) for t in comps.values()]
