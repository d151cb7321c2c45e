"""Bertrand-Darboux machinery and nondegeneracy of potential families.

From a pair of second-order generators the two Bertrand-Darboux equations
are solved for V_22 and V_12, giving the canonical first-order system for
the potential with six rational coefficient functions.  The potential
family is nondegenerate exactly when the matrix integrability conditions
of that system hold identically; everything here is decided by exact
rational identities, never by numerical integration.
"""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

from bocher.catalog import CHART_FLAT, FLAT_RING, fvar
from bocher.diffop import DiffOp
from bocher.errors import DegeneratePair
from bocher.linsolve import nullspace
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, rational

import random

_rng = random.Random(0xBD0C)


def quadratic_symbol(op: DiffOp) -> Tuple[RatFun, RatFun, RatFun]:
    """(a11, a12, a22) with the symmetric mixed coefficient halved."""
    zero = RatFun.const(op.ring, 0)
    a11 = op.terms.get((2, 0), zero)
    a22 = op.terms.get((0, 2), zero)
    a12 = op.terms.get((1, 1), zero) / 2
    return a11, a12, a22


def _bd_jet_coefficients(aij):
    """Jet coefficients (p, q, r, t, w) of the compatibility equation.

    The equation p*(V_xx - V_yy) + q*V_xy + r*V_x + t*V_y + w*V = 0 is the
    cross-derivative compatibility of the potential-part gradient of a
    second-order conformal symmetry with symbol aij.  For a conformal
    Killing symbol the first-derivative weights are 3*a12_x and -3*a12_y
    and the potential weight is (a12_xx - a12_yy).
    """
    a11, a12, a22 = aij

    def dx(f):
        return f.derivative("x")

    def dy(f):
        return f.derivative("y")

    p = a12
    q = a22 - a11
    r = 3 * dx(a12)
    t = -3 * dy(a12)
    w = dx(dx(a12)) - dy(dy(a12))
    return p, q, r, t, w


def bertrand_darboux_residual(aij: Tuple[RatFun, RatFun, RatFun], V: RatFun) -> RatFun:
    """Compatibility residual for (symbol, potential); zero iff solvable."""
    p, q, r, t, w = _bd_jet_coefficients(aij)

    def dx(f):
        return f.derivative("x")

    def dy(f):
        return f.derivative("y")

    V1, V2 = dx(V), dy(V)
    V11, V22, V12 = dx(V1), dy(V2), dy(V1)
    return p * (V11 - V22) + q * V12 + r * V1 + t * V2 + w * V


class CanonicalCoeffs:
    """The six rational coefficients of the canonical potential system.

    V_22 = V_11 + A22 V_1 + B22 V_2 + C22 V
    V_12 =        A12 V_1 + B12 V_2 + C12 V
    """

    __slots__ = ("A12", "B12", "C12", "A22", "B22", "C22", "D")

    def __init__(self, A12, B12, C12, A22, B22, C22, D):
        self.A12, self.B12, self.C12 = A12, B12, C12
        self.A22, self.B22, self.C22 = A22, B22, C22
        self.D = D


def _det2(a, b, c, d):
    return a * d - b * c


def canonical_coeffs(s1: DiffOp, s2: DiffOp) -> CanonicalCoeffs:
    """Solve the two compatibility equations for V_22 and V_12.

    Cramer's rule on the (V_yy, V_xy) pair; the determinant D must be a
    nonzero rational function, otherwise the pair is degenerate.  The
    coefficients depend only on the trace-free symbol parts, so they are
    invariant under changes of generator basis modulo the Hamiltonian.
    """
    p1, q1, r1, t1, w1 = _bd_jet_coefficients(quadratic_symbol(s1))
    p2, q2, r2, t2, w2 = _bd_jet_coefficients(quadratic_symbol(s2))
    D = p2 * q1 - p1 * q2
    if D.is_zero():
        raise DegeneratePair("generator pair does not determine the canonical system")
    return CanonicalCoeffs(
        A12=(p1 * r2 - p2 * r1) / D,
        B12=(p1 * t2 - p2 * t1) / D,
        C12=(p1 * w2 - p2 * w1) / D,
        A22=(r2 * q1 - r1 * q2) / D,
        B22=(t2 * q1 - t1 * q2) / D,
        C22=(w2 * q1 - w1 * q2) / D,
        D=D,
    )


class IntegrabilityMatrices:
    """The 4x4 matrices of the first-order system for (V, V1, V2, V11)."""

    def __init__(self, c: CanonicalCoeffs):
        def dx(f):
            return f.derivative("x")

        def dy(f):
            return f.derivative("y")

        A12, B12, C12 = c.A12, c.B12, c.C12
        A22, B22, C22 = c.A22, c.B22, c.C22
        self.A13 = dy(A12) - dx(A22) + B12 * A22 + A12 * A12 - B22 * A12 - C22
        self.B13 = dy(B12) - dx(B22) + A12 * B12 + C12
        self.C13 = dy(C12) - dx(C22) + A12 * C12 - B22 * C12 + B12 * C22
        self.A23 = dx(A12) + B12 * A12 + C12
        self.B23 = dx(B12) + B12 * B12
        self.C23 = B12 * C12 + dx(C12)
        ring = A12.ring
        zero = RatFun.const(ring, 0)
        one = RatFun.const(ring, 1)
        self.A1 = [
            [zero, one, zero, zero],
            [zero, zero, zero, one],
            [C12, A12, B12, zero],
            [self.C13, self.A13, self.B13, B12 - A22],
        ]
        self.A2 = [
            [zero, zero, one, zero],
            [C12, A12, B12, zero],
            [C22, A22, B22, one],
            [self.C23, self.A23, self.B23, A12],
        ]


def _mat_mul(a, b):
    n = len(a)
    return [
        [sum((a[i][k] * b[k][j] for k in range(n)), RatFun.const(a[0][0].ring, 0))
         for j in range(n)]
        for i in range(n)
    ]


def _mat_d(a, var):
    return [[e.derivative(var) for e in row] for row in a]


def integrability_residual(c: CanonicalCoeffs):
    """A2_x - A1_y - [A1, A2] entrywise; zero iff nondegenerate."""
    m = IntegrabilityMatrices(c)
    lhs = _mat_d(m.A2, "x")
    rhs = _mat_d(m.A1, "y")
    comm_ab = _mat_mul(m.A1, m.A2)
    comm_ba = _mat_mul(m.A2, m.A1)
    out = []
    for i in range(4):
        row = []
        for j in range(4):
            row.append(lhs[i][j] - rhs[i][j] - comm_ab[i][j] + comm_ba[i][j])
        out.append(row)
    return out


def check_integrability(c: CanonicalCoeffs) -> bool:
    return all(e.is_zero() for row in integrability_residual(c) for e in row)


def admits_nondegenerate_potential(s1: DiffOp, s2: DiffOp) -> bool:
    """True when the pair supports a full four-parameter potential."""
    try:
        c = canonical_coeffs(s1, s2)
    except DegeneratePair:
        return False
    return check_integrability(c)


def verify_potential(c: CanonicalCoeffs, V: RatFun) -> bool:
    def dx(f):
        return f.derivative("x")

    def dy(f):
        return f.derivative("y")

    V1, V2 = dx(V), dy(V)
    V11, V22, V12 = dx(V1), dy(V2), dy(V1)
    eq1 = V22 - V11 - c.A22 * V1 - c.B22 * V2 - c.C22 * V
    eq2 = V12 - c.A12 * V1 - c.B12 * V2 - c.C12 * V
    return eq1.is_zero() and eq2.is_zero()


def potential_solution_space(c: CanonicalCoeffs, pool: Sequence[RatFun]) -> List[RatFun]:
    """Maximal linearly independent subset of the pool solving the system."""
    members = [V for V in pool if verify_potential(c, V)]
    if not members:
        return []
    # independence by exact evaluation at random regular points
    chosen: List[RatFun] = []
    vectors: List[List[GaussRat]] = []
    pts = []
    while len(pts) < len(members) + 3:
        pt = {
            "x": rational(_rng.randint(2, 60), _rng.randint(1, 7)),
            "y": rational(_rng.randint(2, 60), _rng.randint(1, 7)),
        }
        try:
            for V in members:
                V.eval(pt)
        except ZeroDivisionError:
            continue
        pts.append(pt)
    for V in members:
        vec = [V.eval(pt) for pt in pts]
        trial = vectors + [vec]
        rows = [
            {i: trial[i][j] for i in range(len(trial)) if trial[i][j]}
            for j in range(len(pts))
        ]
        if len(nullspace(rows, len(trial))) == 0:
            chosen.append(V)
            vectors.append(vec)
    return chosen


# -- free-generator classification data ------------------------------------------


def _jk_flat() -> Dict[str, DiffOp]:
    from bocher.catalog import killing_vector

    half = RatFun.const(FLAT_RING, rational(1, 2))
    L = killing_vector
    return {
        "J1": (L(2, 3) - L(1, 4)).scale(half),
        "J2": (L(1, 3) + L(2, 4)).scale(half),
        "J3": (L(1, 2) - L(3, 4)).scale(half),
        "K1": (L(2, 3) + L(1, 4)).scale(half),
        "K2": (L(1, 3) - L(2, 4)).scale(half),
        "K3": (L(1, 2) + L(3, 4)).scale(half),
    }


def _sym(a: DiffOp, b: DiffOp) -> DiffOp:
    return a.anticommutator(b).scale(RatFun.const(FLAT_RING, rational(1, 2)))


def conjugacy_pair(index: int, side: str = "J") -> Tuple[DiffOp, DiffOp]:
    """The six representative free generator pairs, J-side or K-side."""
    from bocher.scalars import I

    ops = _jk_flat()
    A1, A2, A3 = ops[f"{side}1"], ops[f"{side}2"], ops[f"{side}3"]
    raised = A1 + A2.scale(I)
    pairs = {
        1: (A3 * A3, A1 * A1),
        2: (A3 * A3, _sym(raised, A3)),
        3: (A3 * A3, _sym(A1, A3)),
        4: (_sym(A2, A2 + A1.scale(I)), _sym(A2, A3)),
        5: (A3 * A3, raised * raised),
        6: (_sym(raised, A3), raised * raised),
    }
    return pairs[index]


def second_factor(letter: str, side: str = "K") -> DiffOp:
    """The five conjugacy representatives used as the added factor."""
    from bocher.scalars import I

    ops = _jk_flat()
    B1, B2, B3 = ops[f"{side}1"], ops[f"{side}2"], ops[f"{side}3"]
    raised = B1 + B2.scale(I)
    a = fvar("b1")  # free parameter, generic (not 0 or 1)
    table = {
        "a": B3 * B3,
        "b": B1 * B1 + (B2 * B2).scale(a),
        "c": raised * raised,
        "d": B3 * B3 + raised * raised,
        "e": _sym(B3, raised),
    }
    return table[letter]


def classification_case(case: int):
    """(pair-label, s1, s2, expected-nondegenerate) for the conjugacy survey."""
    out = []
    if case == 1:
        for idx in range(1, 7):
            s1, s2 = conjugacy_pair(idx)
            out.append((f"case1-{idx}", s1, s2, False))
    elif case == 2:
        expect = {2: True, 6: True}
        for idx in range(1, 7):
            j1, j2 = conjugacy_pair(idx)
            for letter in "abcde":
                s1 = j1 + second_factor(letter)
                out.append((f"case2-{idx}{letter}", s1, j2, expect.get(idx, False)))
    elif case == 3:
        expect = {5: True}
        for idx in range(1, 7):
            j1, j2 = conjugacy_pair(idx)
            for letter in "abcde":
                s2 = j2 + second_factor(letter)
                out.append((f"case3-{idx}{letter}", j1, s2, expect.get(idx, False)))
    elif case == 4:
        for la in "abcde":
            for lb in "abcde":
                s1 = second_factor(la, side="J")
                s2 = second_factor(lb, side="K")
                out.append((f"case4-{la}{lb}", s1, s2, True))
    elif case == 5:
        from bocher.scalars import I

        ops = _jk_flat()
        J1, J2, J3 = ops["J1"], ops["J2"], ops["J3"]
        K1, K2, K3 = ops["K1"], ops["K2"], ops["K3"]
        rj, rk = J1 + J2.scale(I), K1 + K2.scale(I)
        items = [
            ("case5-i", J1 * J1 + K1 * K1, J3 * J3 + K3 * K3, True),
            ("case5-ii", J3 * J3 + K3 * K3, _sym(J3, rj) + _sym(K3, rk), True),
            ("case5-iii", J3 * J3 + K3 * K3, _sym(J1, J3) + _sym(K1, K3), True),
            (
                "case5-iv",
                _sym(J1, J2 + J1.scale(I)) + _sym(K1, K2 + K1.scale(I)),
                _sym(J2, J3) + _sym(K2, K3),
                False,
            ),
            ("case5-v", rj * rj + rk * rk, J3 * J3 + K3 * K3, True),
            ("case5-vi", _sym(J3, rj) + _sym(K3, rk), rj * rj + rk * rk, True),
        ]
        out.extend(items)
    else:
        raise ValueError(f"no classification case {case}")
    return out
