"""Differential-operator algebra: composition, reduction, adjoints."""

import random

import pytest

from bocher.catalog import (
    CHART_CHAR,
    CHART_FLAT,
    CHAR_RING,
    CONFORMAL_BASIS,
    FLAT_RING,
    fconst,
    fvar,
    killing_vector,
)
from bocher.diffop import Chart, DiffOp, is_conformal_symmetry, reduce_mod_h, transform_linear
from bocher.errors import ChartMismatch, UnsupportedHamiltonian
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, I, rational

rng = random.Random(77)


def d(var):
    return DiffOp.partial(FLAT_RING, CHART_FLAT, var)


def mult(f):
    return DiffOp.mult(f, CHART_FLAT)


def x():
    return fvar("x")


def y():
    return fvar("y")


# characteristic-chart J and K operators (z-only / zbar-only realizations)
def char_ops():
    z = RatFun.var(CHAR_RING, "z")
    zb = RatFun.var(CHAR_RING, "zb")
    one = RatFun.const(CHAR_RING, 1)
    dz = DiffOp.partial(CHAR_RING, CHART_CHAR, "z")
    dzb = DiffOp.partial(CHAR_RING, CHART_CHAR, "zb")
    half_i = RatFun.const(CHAR_RING, rational(1, 2) * I)
    half = RatFun.const(CHAR_RING, rational(1, 2))
    J1 = DiffOp.mult(half_i * (one - z * z), CHART_CHAR) * dz
    J2 = DiffOp.mult(half * (one + z * z), CHART_CHAR) * dz
    J3 = DiffOp.mult(I * z, CHART_CHAR) * dz
    K1 = DiffOp.mult(-half_i * (one - zb * zb), CHART_CHAR) * dzb
    K2 = DiffOp.mult(half * (one + zb * zb), CHART_CHAR) * dzb
    K3 = DiffOp.mult(-I * zb, CHART_CHAR) * dzb
    H0 = dz * dzb * 4
    return {"J1": J1, "J2": J2, "J3": J3, "K1": K1, "K2": K2, "K3": K3, "H0": H0}


def rand_op(order=1, deg=2, nterms=2):
    out = DiffOp.zero(FLAT_RING, CHART_FLAT)
    for _ in range(nterms):
        alpha = (rng.randint(0, order), rng.randint(0, order))
        coeff = FLAT_RING.zero()
        for _ in range(2):
            coeff = coeff + FLAT_RING.monomial(
                {"x": rng.randint(0, deg), "y": rng.randint(0, deg)},
                rational(rng.randint(-5, 5), rng.randint(1, 3)),
            )
        out = out + DiffOp(FLAT_RING, CHART_FLAT, {alpha: RatFun(coeff)})
    return out


def test_compose_leibniz():
    assert (d("x") * mult(x())).serialize() == "(x)*D[x] + (1)"
    assert (d("x") * d("y")).terms == {(1, 1): fconst(1)}
    got = (mult(x()) * d("y")) * (mult(y()) * d("x"))
    want = mult(x() * y()) * d("x") * d("y") + mult(x()) * d("x")
    assert (got - want).is_zero()


def test_compose_chart_mismatch():
    a = d("x")
    b = DiffOp.partial(CHAR_RING, CHART_CHAR, "z")
    with pytest.raises(ChartMismatch):
        a.compose(b)


def test_commutator_translation_rotation():
    J = CONFORMAL_BASIS["J"]
    assert (d("x").commutator(J) - d("y")).is_zero()


def test_commutator_j3_raising():
    ops = char_ops()
    lhs = ops["J3"].commutator(ops["J1"] + ops["J2"].scale(I))
    dz = DiffOp.partial(CHAR_RING, CHART_CHAR, "z")
    # [J3, J1+iJ2] = J2 - iJ1 = -i(J1+iJ2) = dz exactly
    assert (lhs - dz).is_zero()


def test_anticommutator_square():
    for _ in range(5):
        a = rand_op()
        assert (a.anticommutator(a) - (a * a).scale(2)).is_zero()


def test_jacobi_identity_random():
    for _ in range(50):
        a, b, c = rand_op(2, 2, 2), rand_op(2, 2, 2), rand_op(2, 2, 2)
        j = (
            a.commutator(b).commutator(c)
            + b.commutator(c).commutator(a)
            + c.commutator(a).commutator(b)
        )
        assert j.is_zero()


def test_oracle_compose_против_pointwise():
    # composition agrees with acting twice on a polynomial test function
    for _ in range(10):
        a, b = rand_op(), rand_op()
        f = RatFun(FLAT_RING.monomial({"x": rng.randint(0, 3), "y": rng.randint(0, 3)}))
        assert (a * b).apply(f) == a.apply(b.apply(f))


def test_adjoint_basics():
    assert (d("x").formal_adjoint() + d("x")).is_zero()
    xdx = mult(x()) * d("x")
    assert (xdx.formal_adjoint() + xdx + DiffOp.identity(FLAT_RING, CHART_FLAT)).is_zero()
    for _ in range(6):
        a = rand_op(2, 2, 2)
        assert (a.formal_adjoint().formal_adjoint() - a).is_zero()


def test_catalog_generator_self_adjoint():
    from bocher.catalog import get_system

    s = get_system("[1,1,1,1]")
    q12 = s.generators[0]
    assert (q12.formal_adjoint() - q12).is_zero()


def test_reduce_self():
    h0 = d("x") * d("x") + d("y") * d("y")
    rem, wit = reduce_mod_h(h0, h0)
    assert rem.is_zero()
    assert (wit.cofactor - DiffOp.identity(FLAT_RING, CHART_FLAT)).is_zero()


def test_reduce_soundness_and_idempotence():
    h = d("x") * d("x") + d("y") * d("y") + mult(fvar("a1") * x())
    for _ in range(8):
        s = rand_op(3, 2, 3)
        rem, wit = reduce_mod_h(s, h)
        assert (wit.cofactor * h + rem - s).is_zero()
        rem2, _ = reduce_mod_h(rem, h)
        assert (rem2 - rem).is_zero()


def test_reduce_unsupported():
    bad = d("x") * d("x")  # rank-one principal symbol
    with pytest.raises(UnsupportedHamiltonian):
        reduce_mod_h(d("x"), bad)


def test_characteristic_chart_reduction():
    ops = char_ops()
    h0 = ops["H0"]
    # every mixed J.K product is congruent to 0 mod H0
    for a in ("J1", "J2", "J3"):
        for b in ("K1", "K2", "K3"):
            rem, wit = reduce_mod_h(ops[a] * ops[b], h0)
            assert rem.is_zero(), (a, b)


def test_casimir_identically_zero():
    ops = char_ops()
    cas = ops["J1"] * ops["J1"] + ops["J2"] * ops["J2"] + ops["J3"] * ops["J3"]
    assert cas.is_zero()
    cas_k = ops["K1"] * ops["K1"] + ops["K2"] * ops["K2"] + ops["K3"] * ops["K3"]
    assert cas_k.is_zero()


def _L(j, k):
    return killing_vector(j, k)


def test_congruent_to_h_list():
    # the 11 flat-realized combinations congruent to H0
    h0 = d("x") * d("x") + d("y") * d("y")
    half = fconst(rational(1, 2))

    def anti(a, b):
        return a.anticommutator(b)

    combos = [
        _L(1, 2) * _L(1, 2) - _L(3, 4) * _L(3, 4),
        _L(1, 3) * _L(1, 3) - _L(2, 4) * _L(2, 4),
        _L(2, 3) * _L(2, 3) - _L(1, 4) * _L(1, 4),
        _L(1, 2) * _L(1, 2) + _L(1, 3) * _L(1, 3) + _L(2, 3) * _L(2, 3),
        _L(1, 2) * _L(3, 4) + _L(2, 3) * _L(1, 4) - _L(1, 3) * _L(2, 4),
        anti(_L(1, 3), _L(1, 4)) + anti(_L(2, 3), _L(2, 4)),
        anti(_L(1, 3), _L(2, 3)) + anti(_L(1, 4), _L(2, 4)),
        anti(_L(1, 2), _L(1, 3)) + anti(_L(3, 4), _L(2, 4)),
        anti(_L(1, 2), _L(1, 4)) - anti(_L(3, 4), _L(2, 3)),
        anti(_L(1, 2), _L(2, 3)) - anti(_L(3, 4), _L(1, 4)),
        anti(_L(1, 2), _L(2, 4)) + anti(_L(3, 4), _L(1, 3)),
    ]
    for k, c in enumerate(combos):
        rem, _ = reduce_mod_h(c, h0)
        assert rem.is_zero(), f"combination {k} not congruent to 0 mod H0"


def test_so4_structure_flat():
    import itertools

    def abstract(j, k, l, m):
        terms = {}

        def add(a, b, s):
            if a == b:
                return
            if a > b:
                a, b, s = b, a, -s
            terms[(a, b)] = terms.get((a, b), 0) + s

        if k == l:
            add(j, m, 1)
        if j == l:
            add(k, m, -1)
        if k == m:
            add(j, l, -1)
        if j == m:
            add(k, l, 1)
        return {p: s for p, s in terms.items() if s}

    pairs = [(j, k) for j in range(1, 5) for k in range(j + 1, 5)]
    for (j, k), (l, m) in itertools.product(pairs, pairs):
        lhs = _L(j, k).commutator(_L(l, m))
        rhs = DiffOp.zero(FLAT_RING, CHART_FLAT)
        for (a, b), s in abstract(j, k, l, m).items():
            rhs = rhs + _L(a, b).scale(s)
        assert (lhs - rhs).is_zero(), ((j, k), (l, m))


def test_jk_split_commutes():
    half = fconst(rational(1, 2))
    J = [
        (_L(2, 3) - _L(1, 4)).scale(half),
        (_L(1, 3) + _L(2, 4)).scale(half),
        (_L(1, 2) - _L(3, 4)).scale(half),
    ]
    K = [
        (_L(2, 3) + _L(1, 4)).scale(half),
        (_L(1, 3) - _L(2, 4)).scale(half),
        (_L(1, 2) + _L(3, 4)).scale(half),
    ]
    eps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
    for (i, j), k in eps.items():
        assert (J[i].commutator(J[j]) - J[k]).is_zero()
        assert (K[i].commutator(K[j]) - K[k]).is_zero()
    for a in J:
        for b in K:
            assert a.commutator(b).is_zero()
    # Casimir of the flat realization vanishes identically
    casJ = J[0] * J[0] + J[1] * J[1] + J[2] * J[2]
    assert casJ.is_zero()


def test_is_conformal_symmetry_examples():
    from bocher.catalog import get_system

    s = get_system("[1,1,1,1]")
    h = s.hamiltonian
    ok, cof, _ = is_conformal_symmetry(h, h)
    assert ok and cof.is_zero()
    ok, cof, _ = is_conformal_symmetry(s.generators[0], h)
    assert ok
    assert cof.order() <= 1
    # J3^2 alone is not a symmetry of the full four-parameter system
    half = fconst(rational(1, 2))
    j3 = (_L(1, 2) - _L(3, 4)).scale(half)
    ok, _, rem = is_conformal_symmetry(j3 * j3, h)
    assert not ok
    pt = {"x": rational(2), "y": rational(5, 3), "a1": rational(1), "a2": rational(2),
          "a3": rational(3), "a4": rational(4)}
    assert any(not c.eval(pt).is_zero() for c in rem.terms.values())


def test_linear_transform_rotation():
    # rational rotation (3/5, 4/5): the Laplacian and J are invariant
    ring2 = FLAT_RING
    chart2 = Chart("flat2", ("xr", "yr"))
    from bocher.poly import Ring

    ringr = Ring(("xr", "yr"))
    c, s = rational(3, 5), rational(4, 5)
    m = [
        [RatFun.const(ringr, c), RatFun.const(ringr, -s)],
        [RatFun.const(ringr, s), RatFun.const(ringr, c)],
    ]
    h0 = d("x") * d("x") + d("y") * d("y")
    h0r = transform_linear(h0, m, chart2, ringr)
    dxr = DiffOp.partial(ringr, chart2, "xr")
    dyr = DiffOp.partial(ringr, chart2, "yr")
    assert (h0r - (dxr * dxr + dyr * dyr)).is_zero()
    J = CONFORMAL_BASIS["J"]
    jr = transform_linear(J, m, chart2, ringr)
    xr = RatFun.var(ringr, "xr")
    yr = RatFun.var(ringr, "yr")
    want = DiffOp.mult(xr, chart2) * dyr - DiffOp.mult(yr, chart2) * dxr
    assert (jr - want).is_zero()
