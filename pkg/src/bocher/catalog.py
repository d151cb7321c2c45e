"""Catalog of the eight 2D Laplace conformally superintegrable systems.

Each system carries its tetraspherical potential basis (the normalized
summary forms), the flat-chart potential obtained through the projective
substitution, and two generator symmetries realized as flat differential
operators through the conformal Killing vectors.  Generators are verified
to commute with the Hamiltonian modulo the left ideal (H), identically in
all four potential parameters, the first time a system is requested.

The singular families (1) and (2) are special cases of the arbitrary
holomorphic-potential system: they carry one second-order and one
first-order symmetry and no nondegenerate canonical system.
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional, Tuple

from bocher.diffop import Chart, DiffOp, is_conformal_symmetry
from bocher.errors import BadIndex, HomogeneityError, UnknownSystem
from bocher.poly import Ring
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, I, rational

# -- rings and charts -----------------------------------------------------------

PARAMS = ("a1", "a2", "a3", "a4")
AUX_PARAMS = ("b1", "b2", "b3", "b4", "E")

FLAT_RING = Ring(("x", "y") + PARAMS + AUX_PARAMS)
TETRA_RING = Ring(("x1", "x2", "x3", "x4") + PARAMS + AUX_PARAMS)
CHAR_RING = Ring(("z", "zb") + PARAMS)

CHART_FLAT = Chart("flat", ("x", "y"))
CHART_TETRA = Chart("tetra", ("x1", "x2", "x3", "x4"))
CHART_CHAR = Chart("char", ("z", "zb"), kind="characteristic")

TETRA_VARS = ("x1", "x2", "x3", "x4")


def fvar(name: str) -> RatFun:
    return RatFun.var(FLAT_RING, name)


def tvar(name: str) -> RatFun:
    return RatFun.var(TETRA_RING, name)


def fconst(c) -> RatFun:
    return RatFun.const(FLAT_RING, c)


def tconst(c) -> RatFun:
    return RatFun.const(TETRA_RING, c)


# -- conformal Killing vectors in the flat chart -----------------------------------


def _d(var: str) -> DiffOp:
    return DiffOp.partial(FLAT_RING, CHART_FLAT, var)


def _flat_conformal_basis() -> Dict[str, DiffOp]:
    x, y = fvar("x"), fvar("y")
    dx, dy = _d("x"), _d("y")
    P1, P2 = dx, dy
    J = DiffOp.mult(x, CHART_FLAT) * dy - DiffOp.mult(y, CHART_FLAT) * dx
    D = DiffOp.mult(x, CHART_FLAT) * dx + DiffOp.mult(y, CHART_FLAT) * dy
    K1 = DiffOp.mult(x * x - y * y, CHART_FLAT) * dx + DiffOp.mult(2 * x * y, CHART_FLAT) * dy
    K2 = DiffOp.mult(y * y - x * x, CHART_FLAT) * dy + DiffOp.mult(2 * x * y, CHART_FLAT) * dx
    return {"P1": P1, "P2": P2, "J": J, "D": D, "K1": K1, "K2": K2}


CONFORMAL_BASIS = _flat_conformal_basis()


def killing_vector(j: int, k: int) -> DiffOp:
    """Flat realization of the so(4) rotation in the (j,k) tetraspherical plane."""
    if not (1 <= j <= 4 and 1 <= k <= 4) or j == k:
        raise BadIndex(f"bad index pair ({j},{k})")
    if j > k:
        return -killing_vector(k, j)
    b = CONFORMAL_BASIS
    half = fconst(rational(1, 2))
    mhalf_i = fconst(rational(-1, 2) * I)
    table = {
        (1, 2): b["J"],
        (3, 4): b["D"].scale(-I),
        (1, 3): (b["P1"] + b["K1"]).scale(half),
        (1, 4): (b["P1"] - b["K1"]).scale(mhalf_i),
        (2, 3): (b["P2"] + b["K2"]).scale(half),
        (2, 4): (b["P2"] - b["K2"]).scale(mhalf_i),
    }
    return table[(j, k)]


def killing_vector_tetra(j: int, k: int) -> DiffOp:
    if not (1 <= j <= 4 and 1 <= k <= 4) or j == k:
        raise BadIndex(f"bad index pair ({j},{k})")
    xj = RatFun.var(TETRA_RING, f"x{j}")
    xk = RatFun.var(TETRA_RING, f"x{k}")
    dj = DiffOp.partial(TETRA_RING, CHART_TETRA, f"x{j}")
    dk = DiffOp.partial(TETRA_RING, CHART_TETRA, f"x{k}")
    return DiffOp.mult(xj, CHART_TETRA) * dk - DiffOp.mult(xk, CHART_TETRA) * dj


# -- charts and transition maps --------------------------------------------------------

# T = 1 slice of the null cone: the projective substitution into flat space.
_T1_SUBS = None


def t1_substitution() -> Dict[str, RatFun]:
    global _T1_SUBS
    if _T1_SUBS is None:
        x, y = fvar("x"), fvar("y")
        _T1_SUBS = {
            "x1": 2 * x,
            "x2": 2 * y,
            "x3": x * x + y * y - 1,
            "x4": I * (x * x + y * y + 1),
        }
    return _T1_SUBS


def to_flat(expr: RatFun) -> RatFun:
    """Flat form of a degree -2 homogeneous tetraspherical potential.

    Multiplies by (x3+i*x4)**2 and substitutes the T=1 parametrization;
    the factor equals 4 on that slice.
    """
    deg = expr.homogeneous_degree(TETRA_VARS)
    if deg != -2:
        raise HomogeneityError(f"expected homogeneity degree -2, got {deg}")
    return expr.subs(t1_substitution(), FLAT_RING) * 4


def to_flat_deg0(expr: RatFun) -> RatFun:
    """Flat value of a degree-0 tetraspherical expression (chart independent)."""
    deg = expr.homogeneous_degree(TETRA_VARS)
    if deg != 0:
        raise HomogeneityError(f"expected homogeneity degree 0, got {deg}")
    return expr.subs(t1_substitution(), FLAT_RING)


def sphere_coordinates() -> Dict[str, RatFun]:
    """2-sphere coordinates of a flat point (s1,s2,s3 with sum of squares 1)."""
    x, y = fvar("x"), fvar("y")
    r = x * x + y * y + 1
    return {"s1": 2 * x / r, "s2": 2 * y / r, "s3": (2 - r) / r}


def permute_tetra(expr: RatFun, perm: Tuple[int, int, int, int]) -> RatFun:
    """Substitute x_j -> x_perm[j-1]; perm is a tuple of target indices."""
    mapping = {f"x{j + 1}": tvar(f"x{perm[j]}") for j in range(4)}
    return expr.subs(mapping, TETRA_RING)


# -- potential families ------------------------------------------------------------------


class PotentialFamily:
    """Four-dimensional potential family with tetraspherical and flat bases."""

    def __init__(self, label: str, basis: List[RatFun], con_basis: Optional[List[RatFun]] = None,
                 norm_to_con_slot: Optional[Tuple[int, ...]] = None, singular: bool = False):
        self.label = label
        self.basis = basis
        self.flat_basis = [to_flat(b) for b in basis]
        # the realization used by the contraction sections, when different
        self.con_basis = con_basis if con_basis is not None else basis
        self.norm_to_con_slot = norm_to_con_slot or (0, 1, 2, 3)
        self.singular = singular
        self.parameter_names = PARAMS

    def potential(self, chart: str = "flat", params: Optional[List[RatFun]] = None) -> RatFun:
        basis = {"flat": self.flat_basis, "norm": self.basis, "con": self.con_basis}[chart]
        ring = basis[0].ring
        if params is None:
            params = [RatFun.var(ring, p) for p in PARAMS]
        total = RatFun.const(ring, 0)
        for c, b in zip(params, basis):
            total = total + c * b
        return total

    def con_multiplier(self, pattern: List[RatFun]) -> RatFun:
        """Multiplier for a normalized pattern, in the contraction realization."""
        total = RatFun.const(self.con_basis[0].ring, 0)
        for j, c in enumerate(pattern):
            total = total + c * self.con_basis[self.norm_to_con_slot[j]]
        return total


def _build_families() -> Dict[str, PotentialFamily]:
    x1, x2, x3, x4 = (tvar(n) for n in TETRA_VARS)
    one = tconst(1)
    w12, w12b = x1 + I * x2, x1 - I * x2
    w34, w34b = x3 + I * x4, x3 - I * x4
    w13 = x1 + I * x3

    fams: Dict[str, PotentialFamily] = {}

    fams["[1,1,1,1]"] = PotentialFamily(
        "[1,1,1,1]",
        [one / x1 ** 2, one / x2 ** 2, one / x3 ** 2, one / x4 ** 2],
    )

    # contraction realization pairs the (1,2) plane; slots follow a=(b3,b4,b2,b1)
    fams["[2,1,1]"] = PotentialFamily(
        "[2,1,1]",
        [one / x1 ** 2, one / x2 ** 2, w34b / w34 ** 3, one / w34 ** 2],
        con_basis=[one / w12 ** 2, w12b / w12 ** 3, one / x3 ** 2, one / x4 ** 2],
        norm_to_con_slot=(2, 3, 1, 0),
    )

    fams["[2,2]"] = PotentialFamily(
        "[2,2]",
        [one / w12 ** 2, w12b / w12 ** 3, one / w34 ** 2, w34b / w34 ** 3],
    )

    fams["[3,1]"] = PotentialFamily(
        "[3,1]",
        [one / w34 ** 2, x1 / w34 ** 3, (4 * x1 ** 2 + x2 ** 2) / w34 ** 4, one / x2 ** 2],
        con_basis=[one / w13 ** 2, x2 / w13 ** 3, (4 * x2 ** 2 + x4 ** 2) / w13 ** 4, one / x4 ** 2],
        norm_to_con_slot=(0, 1, 2, 3),
    )

    fams["[4]"] = PotentialFamily(
        "[4]",
        [
            one / w34 ** 2,
            w12 / w34 ** 3,
            (3 * w12 ** 2 - 2 * w34 * w12b) / w34 ** 4,
            (4 * w34 * (x3 ** 2 + x4 ** 2) + 2 * w12 ** 3) / w34 ** 5,
        ],
        con_basis=[
            one / w12 ** 2,
            w34 / w12 ** 3,
            (3 * w34 ** 2 - 2 * w12 * w34b) / w12 ** 4,
            (4 * w12 * (x1 ** 2 + x2 ** 2) + 2 * w34 ** 3) / w12 ** 5,
        ],
        norm_to_con_slot=(0, 1, 2, 3),
    )

    fams["[0]"] = PotentialFamily(
        "[0]",
        [one / w34 ** 2, x1 / w34 ** 3, x2 / w34 ** 3, (x1 ** 2 + x2 ** 2) / w34 ** 4],
        con_basis=[one / w12 ** 2, x3 / w12 ** 3, x4 / w12 ** 3, (x3 ** 2 + x4 ** 2) / w12 ** 4],
        norm_to_con_slot=(0, 1, 2, 3),
    )

    fams["(1)"] = PotentialFamily(
        "(1)",
        [one / w12 ** 2, one / w34 ** 2, w34 / w12 ** 3, w34 ** 2 / w12 ** 4],
        singular=True,
    )

    fams["(2)"] = PotentialFamily(
        "(2)",
        [one / w34 ** 2, w12 / w34 ** 3, w12 ** 2 / w34 ** 4, w12 ** 3 / w34 ** 5],
        singular=True,
    )

    return fams


FAMILIES = _build_families()


def arbitrary_function_family(max_power: int = 6) -> List[RatFun]:
    """Polynomial slice of the arbitrary-holomorphic-potential system.

    The family f((-x1-i*x2)/(x3+i*x4)) / (x3+i*x4)**2 with f a polynomial of
    bounded degree; exercises the singular system at desk scale.
    """
    x1, x2, x3, x4 = (tvar(n) for n in TETRA_VARS)
    w12, w34 = x1 + I * x2, x3 + I * x4
    t = -w12 / w34
    return [t ** k / w34 ** 2 for k in range(max_power + 1)]


# -- generator construction --------------------------------------------------------------


def _lq(*pairs) -> DiffOp:
    """Linear combination of symmetrized products of Killing vectors.

    pairs: (coeff, ops) with ops a list of one or two operator specs.  A
    spec is an index pair (j,k) for L_jk or a list of (scalar, (j,k)) for a
    linear combination.  One spec squares; two specs give (1/2){A,B}.
    """
    total = DiffOp.zero(FLAT_RING, CHART_FLAT)
    for coeff, ops in pairs:
        built = []
        for op in ops:
            if isinstance(op, list):
                acc = DiffOp.zero(FLAT_RING, CHART_FLAT)
                for c, (j, k) in op:
                    acc = acc + killing_vector(j, k).scale(fconst(c))
                built.append(acc)
            else:
                built.append(killing_vector(*op))
        if len(built) == 1:
            term = built[0] * built[0]
        else:
            term = built[0].anticommutator(built[1]).scale(fconst(rational(1, 2)))
        total = total + term.scale(fconst(coeff))
    return total


def _wpart(expr_tetra: RatFun) -> DiffOp:
    return DiffOp.mult(to_flat_deg0(expr_tetra), CHART_FLAT)


class LaplaceSystem:
    def __init__(self, label: str, family: PotentialFamily, hamiltonian: DiffOp,
                 generators: List[DiffOp], first_order: Optional[List[DiffOp]] = None):
        self.label = label
        self.family = family
        self.hamiltonian = hamiltonian
        self.generators = generators
        self.first_order = first_order or []
        self.singular = family.singular

    @property
    def flat_potential(self) -> RatFun:
        return self.family.potential("flat")

    def verify(self) -> None:
        for g in self.generators + self.first_order:
            ok, _, rem = is_conformal_symmetry(g, self.hamiltonian)
            if not ok:
                raise AssertionError(
                    f"generator of {self.label} fails symmetry check: residual {rem.serialize()}"
                )

    def dump(self) -> dict:
        return {
            "label": self.label,
            "parameters": list(PARAMS),
            "singular": self.singular,
            "flat_potential": self.flat_potential.serialize(),
            "tetra_basis": [b.serialize() for b in self.family.basis],
            "generators": [g.serialize() for g in self.generators],
            "first_order": [g.serialize() for g in self.first_order],
        }


def _flat_hamiltonian(family: PotentialFamily) -> DiffOp:
    h0 = _d("x") * _d("x") + _d("y") * _d("y")
    return h0 + DiffOp.mult(family.potential("flat"), CHART_FLAT)


def _a(j) -> RatFun:
    return tvar(f"a{j}")


def _build_system(label: str) -> LaplaceSystem:
    fam = FAMILIES[label]
    x1, x2, x3, x4 = (tvar(n) for n in TETRA_VARS)
    w12, w12b = x1 + I * x2, x1 - I * x2
    w34, w34b = x3 + I * x4, x3 - I * x4
    h = _flat_hamiltonian(fam)

    if label == "[1,1,1,1]":
        s1 = _lq((GaussRat(1), [(1, 2)])) + _wpart(_a(1) * x2 ** 2 / x1 ** 2 + _a(2) * x1 ** 2 / x2 ** 2)
        s2 = _lq((GaussRat(1), [(1, 3)])) + _wpart(_a(1) * x3 ** 2 / x1 ** 2 + _a(3) * x1 ** 2 / x3 ** 2)
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label == "[2,1,1]":
        ratio = w34b / w34
        s1 = _lq((GaussRat(1), [(3, 4)])) + _wpart(_a(4) * ratio + _a(3) * ratio ** 2)
        mix = [(GaussRat(1), (1, 4)), (-I, (1, 3))]
        s2 = _lq((GaussRat(1), [mix])) + _wpart(_a(3) * x1 ** 2 / w34 ** 2 - _a(1) * w34 ** 2 / x1 ** 2)
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label == "[2,2]":
        ratio = w12b / w12
        s1 = _lq((GaussRat(1), [(1, 2)])) + _wpart(_a(1) * ratio + _a(2) * ratio ** 2)
        mix = [(GaussRat(1), (1, 3)), (I, (1, 4)), (I, (2, 3)), (GaussRat(-1), (2, 4))]
        s2 = _lq((GaussRat(1), [mix])) + _wpart(
            -_a(2) * w34 ** 2 / w12 ** 2 - _a(4) * w12 ** 2 / w34 ** 2
        )
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label == "[3,1]":
        mix1 = [(GaussRat(1), (1, 3)), (I, (1, 4))]
        s1 = _lq((GaussRat(1), [mix1])) + _wpart(
            _a(2) * x1 / w34 + 4 * _a(3) * x1 ** 2 / w34 ** 2
        )
        mix2 = [(GaussRat(1), (1, 4)), (-I, (1, 3))]
        s2 = _lq((GaussRat(1), [[(GaussRat(1), (3, 4))], mix2])) + _wpart(
            _a(1) * x1 / w34
            + _a(2) * (x2 ** 2 + 4 * x1 ** 2) / (4 * w34 ** 2)
            + 2 * _a(3) * x1 * (x2 ** 2 + 2 * x1 ** 2) / w34 ** 3
        )
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label == "[4]":
        # first generator: the chiral square (-i L13 + i L24 + L14 + L23)^2,
        # a translation-type symmetry in disguise
        mix1 = [(GaussRat(1), (1, 4)), (GaussRat(1), (2, 3)), (-I, (1, 3)), (I, (2, 4))]
        s1 = _lq((GaussRat(1), [mix1])) + _wpart(
            4 * _a(3) * w12 / w34 + 4 * _a(4) * w12 ** 2 / w34 ** 2
        )
        # second generator found by exact linear solve over the conformal
        # Killing products; it completes {H, S1} to symbol rank 3
        b = CONFORMAL_BASIS
        half = fconst(rational(1, 2))

        def sym(p, q2):
            return p.anticommutator(q2).scale(half)

        s2_symbol = (
            (b["P1"] * b["P1"]).scale(fconst(2))
            + sym(b["P1"], b["P2"]).scale(fconst(-4 * I))
            + sym(b["P1"], b["J"]).scale(fconst(5 * I))
            + sym(b["P1"], b["D"]).scale(fconst(3))
            + (b["P2"] * b["P2"]).scale(fconst(-2))
            + sym(b["P2"], b["J"]).scale(fconst(-5))
            + sym(b["P2"], b["D"]).scale(fconst(3 * I))
        )
        fx, fy = fvar("x"), fvar("y")
        fz, fzb = fx + I * fy, fx - I * fy
        fa = {j: fvar(f"a{j}") for j in (1, 2, 3, 4)}
        w2 = (
            3 * fa[1] * fz
            - 4 * fa[2] * fzb
            - fa[2] * fz ** 2
            + 22 * fa[3] * fz * fzb
            + fa[3] * fz ** 3
            - 8 * fa[4] * fzb ** 2
            - 20 * fa[4] * fz ** 2 * fzb
        )
        s2 = s2_symbol + DiffOp.mult(w2, CHART_FLAT)
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label == "[0]":
        x, y = fvar("x"), fvar("y")
        a2, a3, a4 = fvar("a2"), fvar("a3"), fvar("a4")
        s1 = _d("x") * _d("x") + DiffOp.mult(a4 * x * x - a2 * x, CHART_FLAT)
        s2 = (_d("x") * _d("y")).scale(2) + DiffOp.mult(
            2 * a4 * x * y - a3 * x - a2 * y, CHART_FLAT
        )
        return LaplaceSystem(label, fam, h, [s1, s2])

    if label in ("(1)", "(2)"):
        half = fconst(rational(1, 2))
        dzbar = (_d("x") + _d("y").scale(I)).scale(half)
        s1 = dzbar * dzbar
        s2 = dzbar
        return LaplaceSystem(label, fam, h, [s1, s2], first_order=[s2])

    raise UnknownSystem(label)


ALL_LABELS = ("[1,1,1,1]", "[2,1,1]", "[2,2]", "[3,1]", "[4]", "[0]", "(1)", "(2)")
NONDEGENERATE_LABELS = ("[1,1,1,1]", "[2,1,1]", "[2,2]", "[3,1]", "[4]", "[0]")

_SYSTEMS: Dict[str, LaplaceSystem] = {}


def get_system(label: str, verify: bool = True) -> LaplaceSystem:
    if label not in FAMILIES:
        raise UnknownSystem(label)
    if label not in _SYSTEMS:
        sys = _build_system(label)
        if verify:
            sys.verify()
        _SYSTEMS[label] = sys
    return _SYSTEMS[label]


def dump_catalog() -> str:
    return json.dumps({lbl: get_system(lbl).dump() for lbl in ALL_LABELS},
                      indent=2, sort_keys=True)


# -- named Helmholtz target registry ---------------------------------------------------------


def _nz(c: RatFun) -> bool:
    return not c.is_zero()


def classify_multiplier(label: str, coeffs: List[RatFun]) -> str:
    """Helmholtz name for a normalized-pattern coefficient vector.

    Implements the published pattern lists for each family; the vector is
    understood projectively (up to one overall nonzero scalar).  Vectors
    outside every listed pattern fall through to the Koenigs family name.
    """
    c = coeffs
    support = tuple(j for j in range(4) if _nz(c[j]))

    if label == "[1,1,1,1]":
        if len(support) == 1:
            return "S9"
        if len(support) == 2:
            j, k = support
            if c[j] == c[k]:
                return "S7" if (j, k) in ((0, 1), (2, 3)) else "S8"
            return "D4B"
        if len(support) == 4:
            if c[0] == c[1] == c[2] == c[3]:
                return "S8"
            for pairing in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
                (j, k), (l, m) = pairing
                if c[j] == c[k] and c[l] == c[m]:
                    return "D4C"
        return "K[1,1,1,1]"

    if label == "[2,1,1]":
        if support == (0, 1):
            return "S4" if c[0] == c[1] else "D4A"
        if support in ((0,), (1,)):
            return "S2"
        if support == (3,):
            return "E1"
        if support == (2,):
            return "E16"
        if support == (2, 3):
            return "D3B"
        if support in ((0, 3), (1, 3)):
            return "D2B"
        if support == (0, 1, 2) and c[0] == c[1]:
            return "D2C"
        return "K[2,1,1]"

    if label == "[2,2]":
        if support == (2,):
            return "E8"
        if support == (3,):
            return "E17"
        if support in ((0,), (0, 2)):
            return "E7"
        if support in ((1,), (1, 3)):
            return "E19"
        if support == (2, 3):
            return "D3C"
        if support == (0, 1):
            return "D3D"
        return "K[2,2]"

    if label == "[3,1]":
        if support == (3,):
            return "S1"
        if support == (0,):
            return "E2"
        if support in ((1,), (0, 1)):
            return "D1B"
        if support == (2,):
            return "D2A"
        return "K[3,1]"

    if label == "[4]":
        if support in ((0,), (0, 1)):
            return "E10"
        if support == (1,):
            return "E9"
        if support == (3,):
            return "D1A"
        return "K[4]"

    if label == "[0]":
        disc = 4 * c[0] * c[3] - c[1] ** 2 - c[2] ** 2
        if _nz(c[3]):
            return "E20" if disc.is_zero() else "D3A"
        iso = c[1] ** 2 + c[2] ** 2
        if iso.is_zero():
            if _nz(c[1]) or _nz(c[2]):
                return "E11"
            return "E3'"
        return "D1C"

    if label in ("(1)", "(2)"):
        return "E15"

    raise UnknownSystem(label)


KOENIGS_NAMES = {
    "[1,1,1,1]": "K[1,1,1,1]",
    "[2,1,1]": "K[2,1,1]",
    "[2,2]": "K[2,2]",
    "[3,1]": "K[3,1]",
    "[4]": "K[4]",
    "[0]": "K[0]",
}

EQUIVALENCE_CLASSES = {
    "[1,1,1,1]": ["S9", "S8", "S7", "D4B", "D4C", "K[1,1,1,1]"],
    "[2,1,1]": ["S4", "S2", "E1", "E16", "D4A", "D3B", "D2B", "D2C", "K[2,1,1]"],
    "[2,2]": ["E8", "E17", "E7", "E19", "D3C", "D3D", "K[2,2]"],
    "[3,1]": ["S1", "E2", "D1B", "D2A", "K[3,1]"],
    "[4]": ["E10", "E9", "D1A", "K[4]"],
    "[0]": ["E20", "E11", "E3'", "D1C", "D3A", "K[0]"],
    "(1)": ["E15"],
    "(2)": ["E15"],
}
