"""The six Bocher contractions as exact epsilon-substitutions.

Each contraction is a linear substitution x = M(eps) . x' on the null-cone
coordinates, with formal square roots of the deformation parameters kept
as ring elements.  Potentials contract by substitute-then-Laurent-expand;
operators contract by the induced linear change of chart followed by a
coefficientwise limit.  The deviation of the substituted quadric from the
primed quadric is computed exactly and reported, never assumed to vanish.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from bocher.catalog import FAMILIES, PotentialFamily
from bocher.diffop import Chart, DiffOp, transform_linear
from bocher.errors import NoLimit, ParseError, UnknownSystem, ZeroToOrder
from bocher.laurent import LaurentSeries, laurent_expand, leading_term, valuation
from bocher.poly import Ring
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, I, rational

# -- the shared contraction ring -----------------------------------------------------

X_VARS = ("x1", "x2", "x3", "x4")
XP_VARS = ("xp1", "xp2", "xp3", "xp4")
PAT_VARS = ("A1", "A2", "A3", "A4")

CON_RING = Ring(
    X_VARS
    + XP_VARS
    + ("eps", "A", "B", "q")
    + ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4")
    + PAT_VARS
    + ("mu", "nu")
    + ("r2", "rAB", "rA1B1", "rA", "rB", "rq")
)


def cvar(name: str) -> RatFun:
    return RatFun.var(CON_RING, name)


def cconst(c) -> RatFun:
    return RatFun.const(CON_RING, c)


def _setup_radicals():
    A, B, qv = (CON_RING.var(n) for n in ("A", "B", "q"))
    two = CON_RING.const(GaussRat(2))
    one = CON_RING.one()
    CON_RING.set_radical("r2", two)
    CON_RING.set_radical("rAB", two * A * B)
    CON_RING.set_radical("rA1B1", two * (A - one) * (B - one))
    CON_RING.set_radical("rA", two * A * (A - one) * (A - B))
    CON_RING.set_radical("rB", two * B * (B - one) * (B - A))
    CON_RING.set_radical("rq", qv * qv - one)


_setup_radicals()

CHART_TETRA_C = Chart("tetra_src", X_VARS)
CHART_TETRA_P = Chart("tetra_dst", XP_VARS)

EPS = cvar("eps")


def xp(i: int) -> RatFun:
    return cvar(f"xp{i}")


def _cone_poly():
    total = CON_RING.zero()
    for i in range(1, 5):
        total = total + CON_RING.var(f"xp{i}") * CON_RING.var(f"xp{i}")
    return total


CONE = _cone_poly()
_XP4 = CON_RING.index["xp4"]


def cone_remainder(p):
    """Canonical representative of a polynomial modulo the primed quadric.

    Rewrites xp4^2 -> -(xp1^2 + xp2^2 + xp3^2) until the xp4-degree is at
    most one; the result is the unique normal form mod (sum xp_i^2).
    """
    from bocher.poly import Poly

    rest = -(CONE - CON_RING.var("xp4") * CON_RING.var("xp4"))
    out = {}
    queue = list(p.terms.items())
    while queue:
        e, c = queue.pop()
        k = e[_XP4]
        if k < 2:
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            continue
        stripped = e[:_XP4] + (k - 2,) + e[_XP4 + 1:]
        for eb, cb in rest.terms.items():
            ne = tuple(a + b for a, b in zip(stripped, eb))
            queue.append((ne, c * cb))
    return Poly(CON_RING, out)


def is_zero_mod_cone(expr: RatFun) -> bool:
    """True when the rational function vanishes on the null cone."""
    if expr.is_zero():
        return True
    return cone_remainder(expr.num).is_zero()


def equal_mod_cone(a: RatFun, b: RatFun) -> bool:
    return is_zero_mod_cone(a - b)


# -- contraction maps -------------------------------------------------------------------


class ContractionMap:
    """x = coord_subst(x', eps): the exact null-cone substitution."""

    def __init__(self, name: str, coord_subst: Dict[str, RatFun],
                 free_params: Tuple[str, ...] = (), genericity: Optional[RatFun] = None):
        self.name = name
        self.coord_subst = coord_subst
        self.free_params = free_params
        self.genericity = genericity
        self._matrix = None

    def matrix(self) -> List[List[RatFun]]:
        """M with x_i = sum_j M[i][j] * xp_j (entries free of xp)."""
        if self._matrix is None:
            m = []
            for i in range(1, 5):
                expr = self.coord_subst[f"x{i}"]
                row = [expr.derivative(f"xp{j}") for j in range(1, 5)]
                for entry in row:
                    if any(entry.num.degree_in(v) > 0 or entry.den.degree_in(v) > 0
                           for v in XP_VARS):
                        raise ValueError("substitution is not linear in the new chart")
                m.append(row)
            self._matrix = m
        return self._matrix

    def quadric_deviation(self) -> RatFun:
        """sum x_i(x',eps)^2 - sum x'_i^2, exactly."""
        total = cconst(0)
        for i in range(1, 5):
            e = self.coord_subst[f"x{i}"]
            total = total + e * e
        for i in range(1, 5):
            total = total - xp(i) * xp(i)
        return total

    def substitute(self, expr: RatFun) -> RatFun:
        """Apply the coordinate substitution to a source-chart expression."""
        e = expr.cast(CON_RING) if expr.ring is not CON_RING else expr
        return e.subs(dict(self.coord_subst), CON_RING)

    def specialization(self, values: Dict[str, GaussRat]) -> Dict[str, RatFun]:
        """Substitution map for parameter values, including formal roots.

        Radicands must specialize to f^2 * m with squarefree m in
        {1, -1, 2, -2}; the branch with positive rational part is chosen.
        """
        out: Dict[str, RatFun] = {n: cconst(v) for n, v in values.items()}
        if self.genericity is not None:
            g = self.genericity.subs(dict(out), CON_RING)
            if g.is_zero():
                raise ValueError("specialization violates the genericity constraint")
        for idx, radicand in CON_RING.radicals.items():
            name = CON_RING.names[idx]
            rad = RatFun(radicand).subs(dict(out), CON_RING)
            if not rad.is_const():
                continue  # radical's parameters not being specialized
            val = rad.const_value()
            if not val.is_rational():
                raise ValueError(f"cannot specialize sqrt of {val}")
            root = _rational_sqrt_form(val)
            if root is None:
                raise ValueError(f"radicand {val} is not f^2*m with m in 1,2,-1,-2")
            out[name] = root
        return out


def _rational_sqrt_form(val) -> Optional[RatFun]:
    """sqrt(val) as c * r2^j * i^k with rational c > 0, if possible."""
    q = val.re
    if not q:
        return cconst(0)
    num, den = q.numerator, q.denominator
    sign = 1
    if num < 0:
        sign = -1
        num = -num
    # strip squarefree part
    def split(n):
        f, m = 1, 1
        d = 2
        while d * d <= n:
            while n % (d * d) == 0:
                n //= d * d
                f *= d
            if n % d == 0:
                n //= d
                m *= d
            d += 1
        if n > 1:
            m *= n
        return f, m

    fn, mn = split(int(num))
    fd, md = split(int(den))
    # sqrt(num/den) = (fn/fd) * sqrt(mn/md); require mn*md in {1, 2}
    m = mn * md
    if m not in (1, 2):
        return None
    c = rational(fn, fd * md)
    out = cconst(c)
    if m == 2:
        out = out * cvar("r2")
    if sign < 0:
        out = out * I
    return out


def _build_maps() -> Dict[str, ContractionMap]:
    one = cconst(1)
    half = cconst(rational(1, 2))
    r2, rAB, rA1B1, rA, rB, rq = (cvar(n) for n in ("r2", "rAB", "rA1B1", "rA", "rB", "rq"))
    A, B, qv = cvar("A"), cvar("B"), cvar("q")
    e = EPS
    u = xp(1) + I * xp(2)
    v = xp(1) - I * xp(2)
    s = xp(3) + I * xp(4)
    t = xp(3) - I * xp(4)

    maps = {}

    # [1,1,1,1] -> [2,1,1]: x1 + i x2 and x1 - i x2 are prescribed
    x1_plus = (I * r2 / e) * u + (I * e * r2 / 2) * v
    x1_minus = -(I * e * r2 / 2) * v
    maps["1111-211"] = ContractionMap(
        "1111-211",
        {
            "x1": (x1_plus + x1_minus) * half,
            "x2": (x1_plus - x1_minus) * half * (-I),
            "x3": xp(3),
            "x4": xp(4),
        },
    )

    # [1,1,1,1] -> [2,2]
    maps["1111-22"] = ContractionMap(
        "1111-22",
        {
            "x1": I * (r2 * half) / e * u,
            "x2": (r2 * half) * (u / e + e * v),
            "x3": I * (r2 * half) / e * s,
            "x4": (r2 * half) * (s / e + e * t),
        },
    )

    # [2,1,1] -> [3,1]
    w_plus = -(I * r2 * half) * e * xp(2) + (I * xp(1) - xp(3)) / e
    w_minus = (
        -e * (xp(3) + I * xp(1))
        + 3 * I * (r2 * half) * xp(2) / (2 * e)
        + (I * xp(1) - xp(3)) / (2 * e ** 3)
    )
    maps["211-31"] = ContractionMap(
        "211-31",
        {
            "x1": (w_plus + w_minus) * half,
            "x2": (w_plus - w_minus) * half * (-I),
            "x3": -xp(2) * half - r2 * (xp(1) + I * xp(3)) / (2 * e ** 2),
            "x4": xp(4),
        },
    )

    # [1,1,1,1] -> [4]  (two-parameter family A, B)
    genAB = RatFun(
        CON_RING.var("A") * CON_RING.var("B")
        * (CON_RING.one() - CON_RING.var("A"))
        * (CON_RING.one() - CON_RING.var("B"))
        * (CON_RING.var("A") - CON_RING.var("B"))
    )
    maps["1111-4"] = ContractionMap(
        "1111-4",
        {
            "x1": I * u / (rAB * e ** 3),
            "x2": (u + e ** 2 * s + e ** 4 * t + e ** 6 * v) / (rA1B1 * e ** 3),
            "x3": (u + A * e ** 2 * s + A ** 2 * e ** 4 * t + A ** 3 * e ** 6 * v) / (rA * e ** 3),
            "x4": (u + B * e ** 2 * s + B ** 2 * e ** 4 * t + B ** 3 * e ** 6 * v) / (rB * e ** 3),
        },
        free_params=("A", "B"),
        genericity=genAB,
    )

    # [2,2] -> [4]
    a_mi = xp(1) - I * xp(4)   # x'_1 - i x'_4
    a_pl = xp(1) + I * xp(4)
    b_mi = xp(2) - I * xp(3)
    b_pl = xp(2) + I * xp(3)
    maps["22-4"] = ContractionMap(
        "22-4",
        {
            "x1": half * (1 / e + 1 / e ** 2) * a_mi + half * e * a_pl
            - (one + 1 / (2 * e)) * b_mi + half * (e - 1) * b_pl,
            "x2": half * I * (1 / e - 1 / e ** 2) * a_mi - half * I * e * a_pl
            - I * (one - 1 / (2 * e)) * b_mi + half * I * (e + 1) * b_pl,
            "x3": half * (1 / e - 1 / e ** 2) * a_mi + (1 / e - half) * b_mi,
            "x4": half * I * (1 / e + 1 / e ** 2) * a_mi - I * (half + 1 / e) * b_mi,
        },
    )

    # [1,1,1,1] -> [3,1]  (one free parameter q, q(q-1) != 0; the second
    # coordinate pairs (x'_1, x'_3): the printed pairing breaks the quadric
    # at order eps^-2, the corrected one cancels it exactly)
    P = xp(1) + I * xp(3)
    Q = xp(1) - I * xp(3)
    gen_q = RatFun(CON_RING.var("q") * (CON_RING.var("q") - CON_RING.one()))
    maps["1111-31"] = ContractionMap(
        "1111-31",
        {
            "x1": P * r2 / (2 * qv * e) + xp(2) / qv + qv * e * Q * r2 * half,
            "x2": I * P * r2 / (2 * rq * e),
            "x3": -P * r2 / (2 * rq * qv * e) + rq * xp(2) / qv,
            "x4": xp(4),
        },
        free_params=("q",),
        genericity=gen_q,
    )

    return maps


MAPS = _build_maps()

MAP_NAMES = ("1111-211", "1111-22", "211-31", "1111-4", "22-4", "1111-31")


def get_map(name: str) -> ContractionMap:
    key = name.replace("->", "-").replace("_", "-")
    if key not in MAPS:
        raise ParseError(f"unknown contraction map {name!r}")
    return MAPS[key]


# -- potentials under contraction ---------------------------------------------------------


def family_con_potential(label: str, params: Optional[Sequence[RatFun]] = None,
                         primed: bool = False) -> RatFun:
    """Contraction-realization potential of a family, in CON_RING.

    With primed=True the function is written in the target chart variables.
    """
    if label not in FAMILIES:
        raise UnknownSystem(label)
    fam = FAMILIES[label]
    if params is None:
        params = [cvar(p) for p in ("a1", "a2", "a3", "a4")]
    total = cconst(0)
    for c, b in zip(params, fam.con_basis):
        term = b.cast(CON_RING)
        if primed:
            term = term.subs({f"x{i}": xp(i) for i in range(1, 5)}, CON_RING)
        total = total + c * term
    return total


def con_basis_in(label: str, primed: bool) -> List[RatFun]:
    fam = FAMILIES[label]
    out = []
    for b in fam.con_basis:
        e = b.cast(CON_RING)
        if primed:
            e = e.subs({f"x{i}": xp(i) for i in range(1, 5)}, CON_RING)
        out.append(e)
    return out


def _v4_dual_pairing_basis() -> List[RatFun]:
    """The quartic family in the (xp1 - i xp4, xp2 - i xp3) pairing.

    The [2,2] -> [4] substitution lands in this conformal frame rather
    than in the standard one; the two are related by a null-frame rotation.
    """
    a = xp(1) - I * xp(4)
    bm = xp(2) - I * xp(3)
    bp = xp(2) + I * xp(3)
    one = cconst(1)
    return [
        one / a ** 2,
        bm / a ** 3,
        (3 * bm ** 2 + 2 * a * bp) / a ** 4,
        (4 * a * (xp(2) ** 2 + xp(3) ** 2) + 2 * bm ** 3) / a ** 5,
    ]


def flow_target_basis(map_name: str, label: str) -> List[RatFun]:
    """Primed-chart realization the map's displayed flows aim at."""
    if map_name == "22-4" and label == "[4]":
        return _v4_dual_pairing_basis()
    return con_basis_in(label, primed=True)


def pattern_multiplier(label: str, pattern: Sequence[RatFun]) -> RatFun:
    """Source multiplier for a normalized pattern, in the map chart."""
    fam = FAMILIES[label]
    basis = con_basis_in(label, primed=False)
    total = cconst(0)
    for j, c in enumerate(pattern):
        total = total + c * basis[fam.norm_to_con_slot[j]]
    return total


def apply_to_potential(cmap: ContractionMap, V: RatFun, order: int,
                       specialize: Optional[Dict[str, GaussRat]] = None) -> LaurentSeries:
    """Exact substitution followed by Laurent expansion to the given order."""
    expr = cmap.substitute(V)
    if specialize:
        expr = expr.subs(cmap.specialization(specialize), CON_RING)
    return laurent_expand(expr, order)


def laurent_poly_parts(coeff: RatFun) -> Dict[int, RatFun]:
    """Split a Laurent-polynomial-in-eps coefficient into eps-free parts."""
    eps_idx = CON_RING.index["eps"]
    den_pow = min(e[eps_idx] for e in coeff.den.terms)
    from bocher.poly import Poly

    den_stripped = Poly(CON_RING, {
        e[:eps_idx] + (e[eps_idx] - den_pow,) + e[eps_idx + 1:]: c
        for e, c in coeff.den.terms.items()
    })
    if den_stripped.degree_in("eps") > 0:
        raise ValueError("coefficient is not a Laurent polynomial in eps")
    by_pow: Dict[int, Dict] = {}
    for e, c in coeff.num.terms.items():
        k = e[eps_idx]
        by_pow.setdefault(k, {})[e[:eps_idx] + (0,) + e[eps_idx + 1:]] = c
    return {k - den_pow: RatFun(Poly(CON_RING, t), den_stripped)
            for k, t in by_pow.items()}


def expand_termwise(cmap: ContractionMap, terms, order: int,
                    specialize: Optional[Dict[str, GaussRat]] = None) -> LaurentSeries:
    """Expand sum(coeff * B(x(eps))) term by term; keeps denominators small.

    Coefficients must be Laurent polynomials in eps (parameter flows are);
    the substituted base is expanded once and the coefficient acts by
    scaled shifts, which avoids normalizing one huge rational function.
    """
    spec = cmap.specialization(specialize) if specialize else None
    total = LaurentSeries("eps", {}, order)
    for coeff, base in terms:
        if coeff.is_zero():
            continue
        expr = cmap.substitute(base)
        if spec:
            expr = expr.subs(spec, CON_RING)
            coeff = coeff.subs(spec, CON_RING)
        parts = laurent_poly_parts(coeff)
        min_pow = min(parts)
        series = laurent_expand(expr, order - min_pow)
        for k, part in parts.items():
            shifted = series.scale(part).shift(k)
            total = total + LaurentSeries("eps", {m: c for m, c in shifted.coeffs.items()
                                                  if m < order}, order)
    return total


def expand_multiplier(cmap: ContractionMap, label: str, pattern: Sequence[RatFun],
                      order: int, specialize: Optional[Dict[str, GaussRat]] = None) -> LaurentSeries:
    """Laurent expansion of a normalized-pattern multiplier under the map."""
    fam = FAMILIES[label]
    basis = con_basis_in(label, primed=False)
    terms = [(c, basis[fam.norm_to_con_slot[j]]) for j, c in enumerate(pattern)
             if not (isinstance(c, RatFun) and c.is_zero())]
    return expand_termwise(cmap, terms, order, specialize)


DEFAULT_FLOW_ORDER = 1


class ParameterFlow:
    """Source parameters as Laurent expressions in target parameters."""

    def __init__(self, assignments: Dict[str, RatFun]):
        self.assignments = assignments

    def substitute_into(self, V: RatFun) -> RatFun:
        return V.subs(self.assignments, CON_RING)


def verify_parameter_flow(cmap: ContractionMap, source_label: str, target_label: str,
                          flow: ParameterFlow, order: int = DEFAULT_FLOW_ORDER) -> bool:
    """Source potential with the flow substituted equals target + O(eps).

    All identities are taken on the null cone: representatives may differ
    by multiples of the primed quadric.
    """
    series = flow_series(cmap, source_label, flow, order)
    for k, c in series.coeffs.items():
        if k < 0 and not is_zero_mod_cone(c):
            return False
    target_params = [cvar(p) for p in ("b1", "b2", "b3", "b4")]
    basis = flow_target_basis(cmap.name, target_label)
    v_tgt = cconst(0)
    for c, b in zip(target_params, basis):
        v_tgt = v_tgt + c * b
    got = series.coeffs.get(0)
    if got is None:
        return is_zero_mod_cone(v_tgt)
    return equal_mod_cone(got, v_tgt)


def flow_series(cmap: ContractionMap, source_label: str, flow: ParameterFlow,
                order: int = DEFAULT_FLOW_ORDER) -> LaurentSeries:
    basis = con_basis_in(source_label, primed=False)
    terms = [(flow.assignments[f"a{j + 1}"], basis[j]) for j in range(4)]
    return expand_termwise(cmap, terms, order)


# -- the six quoted parameter flows --------------------------------------------------------


def _quoted_flows() -> Dict[str, ParameterFlow]:
    e = EPS
    b1, b2, b3, b4 = (cvar(f"b{j}") for j in (1, 2, 3, 4))
    A, B = cvar("A"), cvar("B")
    r2 = cvar("r2")
    half = cconst(rational(1, 2))
    quarter = cconst(rational(1, 4))

    flows = {}
    flows["1111-211"] = ParameterFlow({
        "a1": -half * (b1 / e ** 2 + b2 / (2 * e ** 4)),
        "a2": -b2 / (4 * e ** 4),
        "a3": b3,
        "a4": b4,
    })
    flows["1111-22"] = ParameterFlow({
        "a1": -half * b1 / e ** 2 - b2 / (4 * e ** 4),
        "a2": -b2 / (4 * e ** 4),
        "a3": -half * b3 / e ** 2 - b4 / (4 * e ** 4),
        "a4": -b4 / (4 * e ** 4),
    })
    flows["211-31"] = ParameterFlow({
        "a1": b3 / e ** 6 + r2 * b2 / (4 * e ** 4) - b1 / e ** 2,
        "a2": -b3 / e ** 4 - r2 * b2 / (2 * e ** 2),
        "a3": b3 / (4 * e ** 8),
        "a4": b4,
    })
    flows["1111-4"] = ParameterFlow({
        "a1": -b4 / (4 * A ** 2 * B ** 2 * e ** 12)
        - b3 / (2 * A * B ** 2 * e ** 10)
        - b2 / (4 * A * B * e ** 8)
        - b1 / (2 * A * B * e ** 6),
        "a2": -b4 / (4 * (1 - A) ** 2 * (1 - B) ** 2 * e ** 12)
        + b3 / (2 * (1 - A) * (1 - B) ** 2 * e ** 10)
        - b2 / (4 * (1 - A) * (1 - B) * e ** 8),
        "a3": -b4 / (4 * A ** 2 * (1 - A) ** 2 * (A - B) ** 2 * e ** 12),
        "a4": -b4 / (4 * B ** 2 * (1 - B) ** 2 * (A - B) ** 2 * e ** 12)
        - b3 / (2 * B ** 2 * (1 - A) ** 2 * (A - B) * e ** 10),
    })
    flows["22-4"] = ParameterFlow({
        "a1": b1 / e ** 4 + 2 * b4 / e ** 7,
        "a2": -b2 / (4 * e ** 6) - b3 / (2 * e ** 7) - b4 / e ** 8,
        "a3": 2 * b3 / e ** 6 - 2 * b4 / e ** 7,
        "a4": -b2 / (4 * e ** 6) + 3 * b3 / (2 * e ** 7) - b4 / e ** 8,
    })
    q, rq = cvar("q"), cvar("rq")
    flows["1111-31"] = ParameterFlow({
        "a1": b1 / (2 * e ** 2) + b3 / (4 * q ** 4 * e ** 4),
        "a2": b2 / (4 * r2 * rq ** 4 * e ** 3) + b3 / (4 * rq ** 4 * e ** 4),
        "a3": b2 / (4 * r2 * rq ** 4 * q ** 2 * e ** 3) + b3 / (4 * rq ** 4 * q ** 4 * e ** 4),
        "a4": b4,
    })
    return flows


QUOTED_FLOWS = _quoted_flows()

# (map, source, target) for the six quoted flows; targets are the map names
QUOTED_FLOW_CASES = [
    ("1111-211", "[1,1,1,1]", "[2,1,1]"),
    ("1111-22", "[1,1,1,1]", "[2,2]"),
    ("211-31", "[2,1,1]", "[3,1]"),
    ("1111-4", "[1,1,1,1]", "[4]"),
    ("22-4", "[2,2]", "[4]"),
    ("1111-31", "[1,1,1,1]", "[3,1]"),
]


# -- flow solving ------------------------------------------------------------------------

MAX_POLE = {
    "1111-211": 4,
    "1111-22": 4,
    "211-31": 8,
    "1111-4": 12,
    "22-4": 8,
    "1111-31": 4,
}


def _function_rows(functions, extra_cols=()):
    """Scalar equation rows for sum(c_i * f_i) = 0 on the null cone.

    Clears denominators, cone-reduces, and matches coordinate monomials;
    row entries are rational functions of the residual parameters.
    """
    from bocher.poly import poly_lcm, div_exact

    live = [(i, f) for i, f in functions if not f.is_zero()]
    if not live:
        return {}
    lcm = None
    for _, f in live:
        lcm = f.den if lcm is None else poly_lcm(lcm, f.den)
    xp_idx = [CON_RING.index[v] for v in XP_VARS]
    rows: Dict[tuple, Dict[int, RatFun]] = {}
    for i, f in live:
        mult = div_exact(lcm, f.den)
        num = cone_remainder(f.num * mult)
        for e, c in num.terms.items():
            key = tuple(e[j] for j in xp_idx)
            rest = list(e)
            for j in xp_idx:
                rest[j] = 0
            from bocher.poly import Poly

            entry = RatFun(Poly(CON_RING, {tuple(rest): c}))
            row = rows.setdefault(key, {})
            row[i] = row.get(i, cconst(0)) + entry
    return rows


def solve_parameter_flow(cmap: ContractionMap, source_label: str, target_label: str,
                         max_pole: Optional[int] = None) -> Optional[ParameterFlow]:
    """Construct an exact parameter flow source -> target under the map.

    Unknowns are the Laurent coefficients of the four source parameters;
    one linear solve per target basis slot.  Returns None when some target
    slot is unreachable.
    """
    from bocher.linsolve import solve_field

    if max_pole is None:
        max_pole = MAX_POLE[cmap.name]
    src_basis = con_basis_in(source_label, primed=False)
    tgt_basis = flow_target_basis(cmap.name, target_label)
    series = [laurent_expand(cmap.substitute(b), max_pole + 1) for b in src_basis]
    vals = [s.valuation() for s in series]
    r_min = min(v - max_pole for v in vals)
    unknowns = [(j, k) for j in range(4) for k in range(0, max_pole + 1)]
    col = {u: n for n, u in enumerate(unknowns)}

    slot_flows = []
    for l in range(4):
        rows_all: List[Dict[int, RatFun]] = []
        rhs_all: List[RatFun] = []
        for r in range(r_min, 1):
            funcs = []
            for (j, k), n in col.items():
                beta = series[j].coeffs.get(k + r)
                if beta is not None:
                    funcs.append((n, beta))
            if r == 0:
                funcs.append((len(unknowns), tgt_basis[l]))
            rows = _function_rows(funcs)
            for key, row in rows.items():
                rhs = row.pop(len(unknowns), None)
                if row or rhs is not None:
                    rows_all.append(row)
                    rhs_all.append(rhs if rhs is not None else cconst(0))
        sol = solve_field(rows_all, rhs_all, len(unknowns), cconst(0))
        if sol is None:
            return None
        slot_flows.append(sol)

    bvars = [cvar(f"b{l + 1}") for l in range(4)]
    eps = EPS
    assignments = {}
    for j in range(4):
        total = cconst(0)
        for l in range(4):
            for k in range(max_pole + 1):
                g = slot_flows[l][col[(j, k)]]
                if not g.is_zero():
                    total = total + bvars[l] * g * eps ** (-k)
        assignments[f"a{j + 1}"] = total
    return ParameterFlow(assignments)


def reachable_targets(cmap: ContractionMap, source_label: str,
                      candidates: Sequence[str]) -> List[str]:
    """Target classes whose full four-parameter family is reachable."""
    out = []
    for tgt in candidates:
        flow = solve_parameter_flow(cmap, source_label, tgt)
        if flow is not None and verify_parameter_flow(cmap, source_label, tgt, flow):
            out.append(tgt)
    return out


# -- helmholtz multiplier contraction and target matching ----------------------------------


class HelmholtzContractionResult:
    """alpha and limiting multiplier of F(x(eps)), with the registry name."""

    def __init__(self, alpha, v_prime, target_name, pattern=None, status="verified"):
        self.alpha = alpha
        self.v_prime = v_prime
        self.target_name = target_name
        self.pattern = pattern
        self.status = status

    def as_record(self, map_name="", source="", multiplier=""):
        return {
            "map": map_name,
            "source": source,
            "multiplier_pattern": multiplier,
            "alpha": self.alpha,
            "v_prime": self.v_prime.serialize() if self.v_prime is not None else None,
            "target": self.target_name,
            "status": self.status,
        }


def cone_canonical(expr: RatFun) -> RatFun:
    num = cone_remainder(expr.num)
    if num.is_zero():
        return RatFun(CON_RING.zero())
    return RatFun(num, expr.den)


def contract_multiplier(cmap: ContractionMap, label: str, pattern: Sequence[RatFun],
                        extra: int = 8, max_extra: int = 40,
                        specialize: Optional[Dict[str, GaussRat]] = None,
                        targets: Optional[Sequence[str]] = None) -> HelmholtzContractionResult:
    """Leading Laurent data of a source multiplier under the contraction.

    alpha is the first order whose coefficient does not vanish on the null
    cone; the coefficient is matched against the candidate target families
    through conformal frame changes.
    """
    window = extra
    while True:
        fam = FAMILIES[label]
        basis = con_basis_in(label, primed=False)
        terms = [(c, basis[fam.norm_to_con_slot[j]]) for j, c in enumerate(pattern)
                 if not c.is_zero()]
        if not terms:
            raise ZeroToOrder("zero multiplier")
        raw_val = None
        for c, b in terms:
            expr = cmap.substitute(b)
            if specialize:
                expr = expr.subs(cmap.specialization(specialize), CON_RING)
                c = c.subs(cmap.specialization(specialize), CON_RING)
            parts = laurent_poly_parts(c)
            v = valuation(expr) + min(parts)
            raw_val = v if raw_val is None else min(raw_val, v)
        series = expand_termwise(cmap, terms, raw_val + window, specialize)
        alpha = None
        for k in sorted(series.coeffs):
            if not is_zero_mod_cone(series.coeffs[k]):
                alpha = k
                break
        if alpha is not None:
            break
        if window >= max_extra:
            raise ZeroToOrder(f"multiplier vanishes on the cone to order {raw_val + window}")
        window *= 2
    v_prime = cone_canonical(series.coeffs[alpha])
    name, patt, status = "unmatched", None, "unmatched"
    for tgt in (targets or []):
        matched = match_to_family(v_prime, tgt)
        if matched is not None:
            from bocher.catalog import classify_multiplier

            name = classify_multiplier(tgt, matched)
            patt = matched
            status = "verified"
            break
    return HelmholtzContractionResult(alpha, v_prime, name, pattern=patt, status=status)


# conformal frames: plane pairings of the primed coordinates with
# isotropic orientations and optional swaps
def _frames():
    partitions = [((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))]
    out = []
    for pair1, pair2 in partitions:
        for first in (0, 1):
            p, q = (pair1, pair2)[first], (pair1, pair2)[1 - first]
            for eta1 in (I, -I):
                for eta2 in (I, -I):
                    for swap_uv in (False, True):
                        for swap_st in (False, True):
                            out.append((p, q, eta1, eta2, swap_uv, swap_st))
    return out


FRAMES = _frames()


def frame_substitution(frame, mu: Optional[RatFun] = None) -> Dict[str, RatFun]:
    """x-variable images for a conformal frame, optionally mu-rescaled."""
    (p, q, eta1, eta2, swap_uv, swap_st) = frame
    U = xp(p[0]) + eta1 * xp(p[1])
    V = xp(p[0]) - eta1 * xp(p[1])
    if swap_uv:
        U, V = V, U
    if mu is not None:
        U = mu * U
        V = V / mu
    S = xp(q[0]) + eta2 * xp(q[1])
    T = xp(q[0]) - eta2 * xp(q[1])
    if swap_st:
        S, T = T, S
    half = cconst(rational(1, 2))
    mhalf_i = cconst(rational(-1, 2) * I)
    return {
        "x1": (U + V) * half,
        "x2": (U - V) * half * (-I),
        "x3": (S + T) * half,
        "x4": (S - T) * half * (-I),
    }


_FRAME_BASIS_CACHE: Dict[tuple, List[RatFun]] = {}


def _framed_basis(label: str, frame, mu_key=None, mu=None) -> List[RatFun]:
    key = (label, FRAMES.index(frame) if frame in FRAMES else frame, mu_key)
    if key not in _FRAME_BASIS_CACHE:
        subs = frame_substitution(frame, mu)
        fam = FAMILIES[label]
        _FRAME_BASIS_CACHE[key] = [
            b.cast(CON_RING).subs(subs, CON_RING) for b in fam.basis
        ]
    return _FRAME_BASIS_CACHE[key]


def span_solve(basis: Sequence[RatFun], expr: RatFun) -> Optional[List[RatFun]]:
    """expr = sum(c_j basis_j) on the cone; coefficients over the parameters."""
    from bocher.linsolve import solve_field

    funcs = [(j, b) for j, b in enumerate(basis)]
    funcs.append((len(basis), expr))
    rows = _function_rows(funcs)
    rows_all, rhs_all = [], []
    for key, row in rows.items():
        rhs = row.pop(len(basis), None)
        rows_all.append(row)
        rhs_all.append(rhs if rhs is not None else cconst(0))
    return solve_field(rows_all, rhs_all, len(basis), cconst(0))


def match_to_family(v_prime: RatFun, target_label: str) -> Optional[List[RatFun]]:
    """Pattern of v_prime in the target family, modulo conformal frames.

    Tries every isotropic plane pairing; a mu-rescaled retry handles the
    limits that need the scaling freedom of the contraction parameters.
    """
    for frame in FRAMES:
        basis = _framed_basis(target_label, frame)
        sol = span_solve(basis, v_prime)
        if sol is not None and any(not c.is_zero() for c in sol):
            return sol
    mu = cvar("mu")
    for frame in FRAMES:
        basis = [b.cast(CON_RING).subs(frame_substitution(frame, mu=mu), CON_RING)
                 for b in FAMILIES[target_label].basis]
        sol = _span_solve_with_scale(basis, v_prime)
        if sol is not None and any(not c.is_zero() for c in sol):
            return sol
    return None


def _span_solve_with_scale(basis: Sequence[RatFun], expr: RatFun) -> Optional[List[RatFun]]:
    """Span solve with the rescale symbol, eliminating it when forced.

    Gaussian elimination over the field including mu either succeeds for
    generic mu, or leaves linear-in-mu consistency conditions; a nonzero
    rational root of those conditions is substituted back and retried.
    """
    from bocher.linsolve import solve_field

    funcs = [(j, b) for j, b in enumerate(basis)]
    funcs.append((len(basis), expr))
    rows = _function_rows(funcs)
    rows_all, rhs_all = [], []
    for key, row in rows.items():
        rhs = row.pop(len(basis), None)
        rows_all.append(row)
        rhs_all.append(rhs if rhs is not None else cconst(0))
    sol = solve_field(rows_all, rhs_all, len(basis), cconst(0))
    if sol is not None:
        return sol
    # inconsistent for generic mu: hunt for the forced value
    candidates = _mu_candidates(rows_all, rhs_all, len(basis))
    for mu_val in candidates:
        if mu_val.is_zero():
            continue
        rows2 = [{c: v.subs({"mu": mu_val}, CON_RING) for c, v in r.items()} for r in rows_all]
        rhs2 = [v.subs({"mu": mu_val}, CON_RING) for v in rhs_all]
        sol = solve_field(rows2, rhs2, len(basis), cconst(0))
        if sol is not None:
            return sol
    return None


def _mu_candidates(rows, rhs, ncols) -> List[RatFun]:
    """Roots of mu-linear consistency conditions from a failed elimination."""
    from bocher.linsolve import solve_field

    # try eliminating with mu treated as opaque; conditions appear as rows
    # that reduce to 0 = f(mu).  Re-run elimination manually to collect.
    work = [dict(r) for r in rows]
    b = list(rhs)
    used = [False] * len(work)
    for col in range(ncols):
        k = None
        for i, r in enumerate(work):
            if not used[i] and col in r and not r[col].is_zero():
                k = i
                break
        if k is None:
            continue
        used[k] = True
        row = work[k]
        inv = row[col].inv()
        row = {c: v * inv for c, v in row.items() if not v.is_zero()}
        bk = b[k] * inv
        for i, r in enumerate(work):
            if used[i] or col not in r or r[col].is_zero():
                continue
            f = r.pop(col)
            for c, v in row.items():
                if c == col:
                    continue
                s = r.get(c, cconst(0)) - f * v
                if s.is_zero():
                    r.pop(c, None)
                else:
                    r[c] = s
            b[i] = b[i] - f * bk
        work[k] = row
        b[k] = bk
    out = []
    mu_idx = CON_RING.index["mu"]
    for i, r in enumerate(work):
        if used[i]:
            continue
        if all(v.is_zero() for v in r.values()) and not b[i].is_zero():
            num = b[i].num
            deg = num.degree_in("mu")
            if 1 <= deg <= 1:
                c1 = num.derivative("mu")
                c0 = {e: c for e, c in num.terms.items() if e[mu_idx] == 0}
                from bocher.poly import Poly

                root = -RatFun(Poly(CON_RING, c0)) / RatFun(c1)
                out.append(root)
    return out


# -- operator contraction -------------------------------------------------------------------


def contract_operator(cmap: ContractionMap, op: DiffOp, flow: Optional[ParameterFlow] = None,
                      prescale: Optional[RatFun] = None, shift: Optional[RatFun] = None) -> DiffOp:
    """The eps -> 0 limit of prescale * (transformed op) + shift.

    Raises NoLimit with the offending order when a pole survives.
    """
    work = op
    if op.ring is not CON_RING:
        work = DiffOp(CON_RING, CHART_TETRA_C,
                      {a: c.cast(CON_RING) for a, c in op.terms.items()})
    if flow is not None:
        work = work.subs_params(flow.assignments)
    moved = transform_linear(work, cmap.matrix(), CHART_TETRA_P, CON_RING)
    if shift is not None:
        moved = moved + DiffOp.mult(shift, CHART_TETRA_P)
    if prescale is not None:
        moved = moved.scale(prescale)
    out = {}
    for alpha, c in moved.terms.items():
        val = valuation(c)
        if val < 0:
            raise NoLimit(
                f"coefficient of {alpha} keeps a pole of order {-val}", offending_order=val
            )
        series = laurent_expand(c, 1)
        coeff = series.coeffs.get(0)
        if coeff is not None:
            out[alpha] = coeff
    return DiffOp(CON_RING, CHART_TETRA_P, out)


def killing_vector_src(j: int, k: int) -> DiffOp:
    xj, xk = cvar(f"x{j}"), cvar(f"x{k}")
    dj = DiffOp.partial(CON_RING, CHART_TETRA_C, f"x{j}")
    dk = DiffOp.partial(CON_RING, CHART_TETRA_C, f"x{k}")
    return DiffOp.mult(xj, CHART_TETRA_C) * dk - DiffOp.mult(xk, CHART_TETRA_C) * dj


def killing_vector_dst(j: int, k: int) -> DiffOp:
    xj, xk = xp(j), xp(k)
    dj = DiffOp.partial(CON_RING, CHART_TETRA_P, f"xp{j}")
    dk = DiffOp.partial(CON_RING, CHART_TETRA_P, f"xp{k}")
    return DiffOp.mult(xj, CHART_TETRA_P) * dk - DiffOp.mult(xk, CHART_TETRA_P) * dj


def lie_flow(cmap: ContractionMap, j: int, k: int):
    """Push L_jk through the substitution; split so(4) part and transverse rest.

    Returns (skew, transverse): skew is the dictionary {(l,m): coefficient}
    over primed rotations (l < m), transverse is the remaining first-order
    operator (symmetric part), both exact in eps.
    """
    moved = transform_linear(killing_vector_src(j, k), cmap.matrix(), CHART_TETRA_P, CON_RING)
    # first-order operator: coefficient of xp_l * d_m
    coeff = {}
    for alpha, c in moved.terms.items():
        m = alpha.index(1)
        # the coefficient is linear in xp by construction
        for l in range(4):
            d = c.derivative(f"xp{l + 1}")
            if not d.is_zero():
                coeff[(l, m)] = coeff.get((l, m), cconst(0)) + d
    skew = {}
    for l in range(4):
        for m in range(l + 1, 4):
            clm = coeff.get((l, m), cconst(0))
            cml = coeff.get((m, l), cconst(0))
            val = (clm - cml) / 2
            if not val.is_zero():
                skew[(l + 1, m + 1)] = val
    transverse = moved
    for (l, m), c in skew.items():
        transverse = transverse - killing_vector_dst(l, m).scale(c)
    return skew, transverse
