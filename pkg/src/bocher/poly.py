"""Sparse multivariate polynomials over the Gaussian rationals.

Variables live in a ``Ring``: an ordered, frozen registry of names.  A ring
may declare some variables as *formal square roots*: a radical variable
``r`` carries a radical-free polynomial radicand and satisfies exactly
``r**2 == radicand``.  Multiplication reduces every squared radical, so in
normal form no radical exponent exceeds one.  Distinct radicals are never
combined into a single root; their products stay square-free and formal.

Monomial order is graded lexicographic with respect to the ring's variable
order; it fixes leading terms, canonical (monic-denominator) normal forms
and the deterministic serialization used by golden-file tests.
"""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Tuple

from bocher.scalars import GaussRat, ONE, ZERO

Exponent = Tuple[int, ...]


class Ring:
    """Frozen ordered variable registry, optionally with radical variables."""

    _interned: Dict[Tuple[str, ...], "Ring"] = {}

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        self.index = {n: k for k, n in enumerate(self.names)}
        self.nvars = len(self.names)
        self._zero_exp = (0,) * self.nvars
        self.radicals: Dict[int, Poly] = {}
        self._radical_powers: Dict[Tuple[int, int], Poly] = {}

    def set_radical(self, name: str, radicand: "Poly") -> None:
        """Declare ``name**2 == radicand``; radicand must be radical-free."""
        idx = self.index[name]
        if radicand.ring is not self:
            raise ValueError("radicand must live in the same ring")
        if radicand.has_radicals():
            raise ValueError("nested radicals are not supported")
        if _is_perfect_square(radicand):
            raise ValueError(f"radicand of {name} is a perfect square")
        self.radicals[idx] = radicand

    def is_radical(self, idx: int) -> bool:
        return idx in self.radicals

    def radical_power(self, idx: int, k: int) -> "Poly":
        """radicand**k, cached."""
        if idx not in self.radicals:
            from bocher.errors import UnknownRadical

            raise UnknownRadical(f"variable {self.names[idx]} is not a registered radical")
        key = (idx, k)
        if key not in self._radical_powers:
            base = self.radicals[idx]
            out = self.one()
            for _ in range(k):
                out = out * base
            self._radical_powers[key] = out
        return self._radical_powers[key]

    # -- constructors ----------------------------------------------------

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly(self, {self._zero_exp: ONE})

    def const(self, c) -> "Poly":
        if isinstance(c, int):
            c = GaussRat(c)
        if c.is_zero():
            return self.zero()
        return Poly(self, {self._zero_exp: c})

    def var(self, name: str) -> "Poly":
        exp = [0] * self.nvars
        exp[self.index[name]] = 1
        return Poly(self, {tuple(exp): ONE})

    def monomial(self, exps: Dict[str, int], coeff=ONE) -> "Poly":
        exp = [0] * self.nvars
        for n, e in exps.items():
            exp[self.index[n]] = e
        if isinstance(coeff, int):
            coeff = GaussRat(coeff)
        return Poly(self, {tuple(exp): coeff}) if coeff else self.zero()

    def __repr__(self):
        return f"Ring({','.join(self.names)})"


class Poly:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Dict[Exponent, GaussRat], reduce: bool = False):
        self.ring = ring
        self.terms = _reduce_radicals(ring, terms) if reduce else terms

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring._zero_exp in self.terms)

    def const_value(self) -> GaussRat:
        if self.is_zero():
            return ZERO
        return self.terms[self.ring._zero_exp]

    def has_radicals(self) -> bool:
        rad = self.ring.radicals
        if not rad:
            return False
        return any(any(e[i] for i in rad) for e in self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        if not self.terms:
            return -1
        i = self.ring.index[name]
        return max(e[i] for e in self.terms)

    def variables(self) -> Tuple[str, ...]:
        used = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return tuple(self.ring.names[i] for i in sorted(used))

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.ring is not other.ring:
            raise ValueError("polynomials from different rings")

    def __add__(self, other):
        if isinstance(other, (int, GaussRat)):
            other = self.ring.const(other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return Poly(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, GaussRat)):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, GaussRat)):
            if isinstance(other, int):
                other = GaussRat(other)
            if other.is_zero():
                return self.ring.zero()
            return Poly(self.ring, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: Dict[Exponent, GaussRat] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                c = ca * cb
                s = out.get(e)
                if s is None:
                    out[e] = c
                else:
                    s = s + c
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Poly(self.ring, out, reduce=bool(self.ring.radicals))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, GaussRat)):
            other = self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.ring), frozenset(self.terms.items())))

    # -- calculus -------------------------------------------------------------

    def derivative(self, name: str) -> "Poly":
        i = self.ring.index[name]
        if i in self.ring.radicals:
            raise ValueError("cannot differentiate with respect to a radical")
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if not k:
                continue
            ne = e[:i] + (k - 1,) + e[i + 1:]
            nc = c * k
            s = out.get(ne)
            out[ne] = nc if s is None else s + nc
        return Poly(self.ring, {e: c for e, c in out.items() if c})

    # -- evaluation and substitution ---------------------------------------------

    def eval(self, point: Dict[str, GaussRat]) -> GaussRat:
        """Exact evaluation; the point must provide every used variable.

        Values supplied for radical variables are trusted; callers who care
        must check ``value**2 == radicand(point)`` themselves.
        """
        idx_val = {}
        for e in self.terms:
            for i, k in enumerate(e):
                if k and i not in idx_val:
                    name = self.ring.names[i]
                    if name not in point:
                        raise KeyError(f"no value for {name}")
                    v = point[name]
                    idx_val[i] = v if isinstance(v, GaussRat) else GaussRat(v)
        total = ZERO
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    term = term * idx_val[i] ** k
            total = total + term
        return total

    def subs_poly(self, mapping: Dict[str, "Poly"], target: Optional[Ring] = None) -> "Poly":
        """Substitute polynomial values; unmapped variables map by name."""
        if target is None:
            target = next(iter(mapping.values())).ring if mapping else self.ring
        cache: Dict[Tuple[int, int], Poly] = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                name = self.ring.names[i]
                base = mapping.get(name)
                if base is None:
                    base = target.var(name)
                cache[(i, 1)] = base
                out = base
                for _ in range(k - 1):
                    out = out * base
                cache[key] = out
            return cache[key]

        total = target.zero()
        for e, c in self.terms.items():
            term = target.const(c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            total = total + term
        return total

    def cast(self, target: Ring) -> "Poly":
        """Re-home into a ring that contains all used variables (by name)."""
        if target is self.ring:
            return self
        out = {}
        for e, c in self.terms.items():
            ne = [0] * target.nvars
            for i, k in enumerate(e):
                if k:
                    ne[target.index[self.ring.names[i]]] = k
            out[tuple(ne)] = c
        return Poly(target, out)

    # -- leading structure (grlex) ------------------------------------------------

    def leading(self) -> Tuple[Exponent, GaussRat]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        _, c = self.leading()
        inv = c.inv()
        return Poly(self.ring, {e: k * inv for e, k in self.terms.items()})

    # -- display ----------------------------------------------------------------

    def __repr__(self):
        return f"Poly({self.serialize()})"

    def serialize(self) -> str:
        """Deterministic fully-expanded form; ``sqrt{...}`` for radicals."""
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[e]
            factors = []
            for i, k in enumerate(e):
                if not k:
                    continue
                if i in self.ring.radicals:
                    tok = "sqrt{" + self.ring.radicals[i].serialize() + "}"
                else:
                    tok = self.ring.names[i]
                factors.append(tok if k == 1 else f"{tok}^{k}")
            cstr = str(c)
            if factors and c.is_one():
                body = "*".join(factors)
            elif factors and c == GaussRat(-1):
                body = "-" + "*".join(factors)
            else:
                if ("+" in cstr[1:]) or ("-" in cstr[1:]):
                    cstr = f"({cstr})"
                body = "*".join([cstr] + factors)
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out


def _grlex_key(e: Exponent):
    return (sum(e), e)


def _reduce_radicals(ring: Ring, terms: Dict[Exponent, GaussRat]) -> Dict[Exponent, GaussRat]:
    """Rewrite every radical exponent >= 2 using r**2 -> radicand."""
    rad = ring.radicals
    clean: Dict[Exponent, GaussRat] = {}
    queue = list(terms.items())
    while queue:
        e, c = queue.pop()
        hit = None
        for i in rad:
            if e[i] >= 2:
                hit = i
                break
        if hit is None:
            s = clean.get(e)
            if s is None:
                clean[e] = c
            else:
                s = s + c
                if s:
                    clean[e] = s
                else:
                    del clean[e]
            continue
        k, r = divmod(e[hit], 2)
        base = ring.radical_power(hit, k)
        stripped = e[:hit] + (r,) + e[hit + 1:]
        for eb, cb in base.terms.items():
            ne = tuple(x + y for x, y in zip(stripped, eb))
            queue.append((ne, c * cb))
    return clean


def _is_perfect_square(p: Poly) -> bool:
    """Cheap square test used at radical registration time."""
    if p.is_zero():
        return True
    if p.is_const():
        c = p.const_value()
        if not c.is_rational() or c.re < 0:
            return False
        num, den = c.re.numerator, c.re.denominator
        return _int_is_square(num) and _int_is_square(den)
    e, c = p.leading()
    if any(k % 2 for k in e):
        return False
    if p.degree() == 0:
        return False
    # Trial square root by leading-term peeling.
    try:
        half = {tuple(k // 2 for k in e): _sqrt_gauss(c)}
    except ValueError:
        return False
    root = Poly(p.ring, half)
    rem = p - root * root
    guard = len(p.terms) * 4 + 8
    while not rem.is_zero() and guard:
        guard -= 1
        er, cr = rem.leading()
        el, cl = root.leading()
        de = tuple(a - b for a, b in zip(er, el))
        if any(k < 0 for k in de):
            return False
        t = Poly(p.ring, {de: cr / (cl * 2)})
        root = root + t
        rem = p - root * root
    return rem.is_zero()


def _int_is_square(n: int) -> bool:
    if n < 0:
        return False
    r = int(n ** 0.5)
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r * r == n


def _sqrt_gauss(c: GaussRat) -> GaussRat:
    if not c.is_rational():
        raise ValueError("no rational square root")
    q = c.re
    if q < 0:
        raise ValueError("no rational square root")
    num, den = q.numerator, q.denominator
    if not (_int_is_square(num) and _int_is_square(den)):
        raise ValueError("no rational square root")
    return GaussRat.from_rational(int(num ** 0.5 + 0.5), int(den ** 0.5 + 0.5))


# -- division and gcd ---------------------------------------------------------


def div_exact(p: Poly, d: Poly) -> Poly:
    """Exact quotient p/d; raises ValueError when d does not divide p."""
    if d.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if p.is_zero():
        return p
    if d.is_const():
        inv = d.const_value().inv()
        return p * inv
    ring = p.ring
    ed, cd = d.leading()
    quot: Dict[Exponent, GaussRat] = {}
    rem = p
    guard = len(p.terms) * (p.degree() + 2) * 4 + 64
    while not rem.is_zero():
        guard -= 1
        if guard < 0:
            raise ValueError("not divisible")
        er, cr = rem.leading()
        de = tuple(a - b for a, b in zip(er, ed))
        if any(k < 0 for k in de):
            raise ValueError("not divisible")
        cq = cr / cd
        quot[de] = cq
        rem = rem - Poly(ring, {de: cq}) * d
    return Poly(ring, quot)


def divides(d: Poly, p: Poly) -> bool:
    try:
        div_exact(p, d)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def _monomial_content(p: Poly) -> Exponent:
    it = iter(p.terms)
    first = next(it)
    mins = list(first)
    for e in it:
        for i, k in enumerate(e):
            if k < mins[i]:
                mins[i] = k
    return tuple(mins)


def _strip_monomial(p: Poly, m: Exponent) -> Poly:
    return Poly(p.ring, {tuple(a - b for a, b in zip(e, m)): c for e, c in p.terms.items()})


def _to_univariate(p: Poly, i: int):
    """Dense coefficient list in variable i, coefficients are Polys."""
    by_deg: Dict[int, Dict[Exponent, GaussRat]] = {}
    for e, c in p.terms.items():
        k = e[i]
        rest = e[:i] + (0,) + e[i + 1:]
        by_deg.setdefault(k, {})[rest] = c
    n = max(by_deg) if by_deg else 0
    ring = p.ring
    return [Poly(ring, by_deg.get(k, {})) for k in range(n + 1)]


def _from_univariate(coeffs, i: int, ring: Ring) -> Poly:
    terms: Dict[Exponent, GaussRat] = {}
    for k, cp in enumerate(coeffs):
        for e, c in cp.terms.items():
            ne = e[:i] + (k,) + e[i + 1:]
            terms[ne] = c
    return Poly(ring, terms)


def _uni_trim(a):
    while a and a[-1].is_zero():
        a.pop()
    return a


def _uni_pseudo_rem(a, b, ring):
    """prem(a, b) = lc(b)^(deg a - deg b + 1) * a mod b, dense lists."""
    a = _uni_trim(list(a))
    db, lb = len(b) - 1, b[-1]
    if not a or len(a) - 1 < db:
        return a
    e = len(a) - 1 - db + 1
    while a and len(a) - 1 >= db:
        da = len(a) - 1
        la = a[-1]
        shift = da - db
        a = [c * lb for c in a]
        for k in range(db + 1):
            a[shift + k] = a[shift + k] - la * b[k]
        a.pop()  # the leading term cancels exactly
        a = _uni_trim(a)
        e -= 1
    for _ in range(e):
        a = [c * lb for c in a]
    return a


def _content_of_list(coeffs) -> Poly:
    live = [c for c in coeffs if not c.is_zero()]
    g = live[0]
    for c in live[1:]:
        g = poly_gcd(g, c)
        if g.is_const():
            break
    return g.monic()


def poly_content(p: Poly, i: int) -> Poly:
    return _content_of_list(_to_univariate(p, i))


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd of radical-free polynomials (subresultant PRS)."""
    if p.ring is not q.ring:
        raise ValueError("gcd across rings")
    if p.has_radicals() or q.has_radicals():
        raise ValueError("gcd is defined for radical-free polynomials")
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    ring = p.ring
    mp, mq = _monomial_content(p), _monomial_content(q)
    mg = tuple(min(a, b) for a, b in zip(mp, mq))
    p = _strip_monomial(p, mp)
    q = _strip_monomial(q, mq)
    g = _gcd_primitive(p, q)
    if any(mg):
        g = g * Poly(ring, {mg: ONE})
    return g.monic()


import random as _random

_probe_rng = _random.Random(0x5EED)


def _eval_univariate(p: Poly, i: int, point) -> list:
    """Dense GaussRat coefficient list in variable i at an integer point."""
    out: Dict[int, GaussRat] = {}
    for e, c in p.terms.items():
        v = c
        for j, k in enumerate(e):
            if k and j != i:
                v = v * point[j] ** k
        k = e[i]
        s = out.get(k)
        out[k] = v if s is None else s + v
    n = max(out) if out else 0
    return [out.get(k, ZERO) for k in range(n + 1)]


def _uni_gauss_gcd_deg(a, b) -> int:
    """Degree of gcd of two GaussRat coefficient lists (Euclid)."""

    def trim(u):
        while u and u[-1].is_zero():
            u.pop()
        return u

    a, b = trim(list(a)), trim(list(b))
    while b:
        inv = b[-1].inv()
        db = len(b) - 1
        while len(a) - 1 >= db and a:
            la = a[-1] * inv
            sh = len(a) - 1 - db
            for k in range(db + 1):
                a[sh + k] = a[sh + k] - la * b[k]
            a.pop()
            trim(a)
        a, b = b, a
    return len(a) - 1


def _probably_coprime(p: Poly, q: Poly, i: int) -> bool:
    """True only when provably coprime: a specialized gcd has degree 0.

    The gcd of a specialization contains the specialized gcd, so a
    degree-zero specialized gcd certifies triviality.  Degree drop under
    specialization only risks false negatives, never false positives.
    """
    dp, dq = p.degree_in(p.ring.names[i]), q.degree_in(p.ring.names[i])
    for _ in range(3):
        point = {j: GaussRat(_probe_rng.randint(2, 97)) for j in range(p.ring.nvars)}
        a = _eval_univariate(p, i, point)
        b = _eval_univariate(q, i, point)
        if len(a) - 1 != dp or len(b) - 1 != dq:
            continue  # leading coefficient vanished; resample
        if not a[-1] or not b[-1]:
            continue
        return _uni_gauss_gcd_deg(a, b) == 0
    return False


def _gcd_primitive(p: Poly, q: Poly) -> Poly:
    ring = p.ring
    if p.is_const() or q.is_const():
        return ring.one()
    # cheap exits
    if p == q:
        return p
    if divides(p, q):
        return p
    if divides(q, p):
        return q
    # main variable: first used by both
    used_p = {i for e in p.terms for i, k in enumerate(e) if k}
    used_q = {i for e in q.terms for i, k in enumerate(e) if k}
    shared = sorted(used_p & used_q)
    if not shared:
        return ring.one()
    i = shared[0]
    a, b = _to_univariate(p, i), _to_univariate(q, i)
    if len(a) < len(b):
        a, b = b, a
        p, q = q, p
    ca, cb = _content_of_list(a), _content_of_list(b)
    cg = _gcd_primitive(ca, cb) if not (ca.is_const() or cb.is_const()) else ring.one()
    if _probably_coprime(p, q, i):
        return cg
    a = [div_exact(c, ca) for c in a]
    b = [div_exact(c, cb) for c in b]
    # subresultant PRS
    g = ring.one()
    h = ring.one()
    while True:
        delta = len(a) - len(b)
        r = _uni_pseudo_rem(a, b, ring)
        if not r:
            gg = _from_univariate(b, i, ring)
            gg = div_exact(gg, _content_of_list(b))
            return gg * cg
        if len(r) == 1:
            return cg
        denom = g
        for _ in range(delta):
            denom = denom * h
        a, b = b, [div_exact(c, denom) for c in r]
        g = a[-1]
        if delta == 0:
            pass  # h unchanged
        elif delta == 1:
            h = g
        else:
            # h = g^delta / h^(delta-1), exact in the subresultant PRS
            num = g
            for _ in range(delta - 1):
                num = num * g
            den = h
            for _ in range(delta - 2):
                den = den * h
            h = div_exact(num, den)


def poly_lcm(p: Poly, q: Poly) -> Poly:
    g = poly_gcd(p, q)
    return div_exact(p * q, g)


def radical_reduce(p: Poly) -> Poly:
    """Normal form with every squared formal root rewritten to its radicand."""
    return Poly(p.ring, dict(p.terms), reduce=True)
