"""Catalog systems: potentials, charts, registry classification."""

import json
import random

import pytest

from bocher.catalog import (
    ALL_LABELS,
    CHART_FLAT,
    FLAT_RING,
    NONDEGENERATE_LABELS,
    TETRA_RING,
    arbitrary_function_family,
    classify_multiplier,
    dump_catalog,
    fvar,
    get_system,
    killing_vector,
    sphere_coordinates,
    t1_substitution,
    to_flat,
    to_flat_deg0,
    tvar,
)
from bocher.diffop import DiffOp, is_conformal_symmetry
from bocher.errors import BadIndex, HomogeneityError, UnknownSystem
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, I, rational

rng = random.Random(40408)


def _rand_point():
    return {
        "x": rational(rng.randint(2, 30), rng.randint(1, 7)),
        "y": rational(rng.randint(2, 30), rng.randint(1, 7)),
    }


def test_all_systems_verify():
    for label in ALL_LABELS:
        sys = get_system(label)  # construction-time verification
        assert sys.label == label


def test_unknown_system():
    with pytest.raises(UnknownSystem):
        get_system("bogus")


def test_flat_potentials_match_known_forms():
    x, y = fvar("x"), fvar("y")
    a1, a2, a3, a4 = (fvar(f"a{j}") for j in (1, 2, 3, 4))
    r2 = x * x + y * y
    v1111 = get_system("[1,1,1,1]").flat_potential
    want = a1 / x ** 2 + a2 / y ** 2 + 4 * a3 / (r2 - 1) ** 2 - 4 * a4 / (r2 + 1) ** 2
    assert v1111 == want
    v0 = get_system("[0]").flat_potential
    assert v0 == a1 - a2 * x - a3 * y + a4 * r2
    v211 = get_system("[2,1,1]").flat_potential
    assert v211 == a1 / x ** 2 + a2 / y ** 2 - a3 * r2 + a4
    z = x + I * y
    zb = x - I * y
    v22 = get_system("[2,2]").flat_potential
    assert v22 == a1 / z ** 2 + a2 * zb / z ** 3 + a3 - a4 * r2
    v31 = get_system("[3,1]").flat_potential
    assert v31 == a1 - a2 * x + a3 * (4 * x * x + y * y) + a4 / y ** 2
    v4 = get_system("[4]").flat_potential
    assert v4 == a1 - a2 * z + a3 * (3 * z ** 2 + 2 * zb) - a4 * (4 * r2 + 2 * z ** 3)
    # the T=1 slice fixes the odd-power signs of the singular family
    v2p = get_system("(2)").flat_potential
    assert v2p == a1 - a2 * z + a3 * z ** 2 - a4 * z ** 3
    v1p = get_system("(1)").flat_potential
    assert v1p == a1 / z ** 2 + a2 - a3 / z ** 3 + a4 / z ** 4


def test_to_flat_examples():
    x4 = tvar("x4")
    x3 = tvar("x3")
    a3, a4 = tvar("a3"), tvar("a4")
    x, y = fvar("x"), fvar("y")
    r2 = x * x + y * y
    assert to_flat(a4 / x4 ** 2) == -4 * fvar("a4") / (r2 + 1) ** 2
    assert to_flat(a3 / x3 ** 2) == 4 * fvar("a3") / (r2 - 1) ** 2
    w34 = x3 + I * x4
    assert to_flat(RatFun.const(TETRA_RING, 1) / w34 ** 2) == RatFun.const(FLAT_RING, 1)
    with pytest.raises(HomogeneityError):
        to_flat(tvar("x1"))
    with pytest.raises(HomogeneityError):
        to_flat_deg0(tvar("x1") / tvar("x2") ** 2)


def test_killing_vector_examples():
    x, y = fvar("x"), fvar("y")
    dx = DiffOp.partial(FLAT_RING, CHART_FLAT, "x")
    dy = DiffOp.partial(FLAT_RING, CHART_FLAT, "y")
    J = DiffOp.mult(x, CHART_FLAT) * dy - DiffOp.mult(y, CHART_FLAT) * dx
    assert (killing_vector(1, 2) - J).is_zero()
    half = RatFun.const(FLAT_RING, rational(1, 2))
    l13 = DiffOp.mult(half * (1 + x * x - y * y), CHART_FLAT) * dx + DiffOp.mult(
        half * 2 * x * y, CHART_FLAT
    ) * dy
    assert (killing_vector(1, 3) - l13).is_zero()
    D = DiffOp.mult(x, CHART_FLAT) * dx + DiffOp.mult(y, CHART_FLAT) * dy
    assert (killing_vector(3, 4) - D.scale(-I)).is_zero()
    assert (killing_vector(2, 1) + killing_vector(1, 2)).is_zero()
    with pytest.raises(BadIndex):
        killing_vector(1, 5)
    with pytest.raises(BadIndex):
        killing_vector(2, 2)


def test_t1_slice_on_null_cone():
    subs = t1_substitution()
    total = RatFun.const(FLAT_RING, 0)
    for n in ("x1", "x2", "x3", "x4"):
        total = total + subs[n] * subs[n]
    assert total.is_zero()


def test_sphere_chart_roundtrip():
    s = sphere_coordinates()
    total = s["s1"] ** 2 + s["s2"] ** 2 + s["s3"] ** 2
    assert total == RatFun.const(FLAT_RING, 1)
    # x = s1/(1+s3), y = s2/(1+s3) on a dense set
    x, y = fvar("x"), fvar("y")
    one = RatFun.const(FLAT_RING, 1)
    assert s["s1"] / (one + s["s3"]) == x
    assert s["s2"] / (one + s["s3"]) == y


def test_basis_linear_independence():
    # rank-4 evaluation test for each family's flat basis
    from bocher.linsolve import nullspace

    for label in ALL_LABELS:
        fam = get_system(label).family
        pts = []
        while len(pts) < 6:
            pt = _rand_point()
            try:
                pts.append([b.eval(pt) for b in fam.flat_basis])
            except ZeroDivisionError:
                continue
        rows = []
        for j in range(4):  # columns are basis members
            pass
        matrix_rows = [{j: pts[i][j] for j in range(4) if pts[i][j]} for i in range(6)]
        assert len(nullspace(matrix_rows, 4)) == 0, label


def test_generator_symbols_independent():
    from bocher.linsolve import nullspace

    pt = {"x": rational(3), "y": rational(5, 2)}
    zero_params = {f"a{j}": rational(0) for j in (1, 2, 3, 4)}
    pt.update(zero_params)
    for label in NONDEGENERATE_LABELS:
        sys = get_system(label)
        ops = [sys.hamiltonian] + sys.generators
        cols = []
        for op in ops:
            vec = []
            for idx in ((2, 0), (1, 1), (0, 2)):
                c = op.terms.get(idx)
                vec.append(c.eval(pt) if c is not None else GaussRat(0))
            cols.append(vec)
        rows = [{i: cols[i][j] for i in range(3) if cols[i][j]} for j in range(3)]
        assert len(nullspace(rows, 3)) == 0, label


def test_singular_systems_first_order():
    for label in ("(1)", "(2)"):
        sys = get_system(label)
        assert sys.singular
        assert sys.first_order
        L = sys.first_order[0]
        assert L.commutator(sys.hamiltonian).is_zero()


def test_arbitrary_function_family_members_are_symmetric():
    # every polynomial slice member admits the chiral second-order symmetry
    pool = arbitrary_function_family(4)
    h0 = None
    dx = DiffOp.partial(FLAT_RING, CHART_FLAT, "x")
    dy = DiffOp.partial(FLAT_RING, CHART_FLAT, "y")
    h0 = dx * dx + dy * dy
    half = RatFun.const(FLAT_RING, rational(1, 2))
    dzbar = (dx + dy.scale(I)).scale(half)
    s = dzbar * dzbar
    for member in pool[:4]:
        h = h0 + DiffOp.mult(to_flat(member), CHART_FLAT)
        ok, _, _ = is_conformal_symmetry(s, h)
        assert ok


PATTERN_CASES = [
    ("[1,1,1,1]", (1, 0, 0, 0), "S9"),
    ("[1,1,1,1]", (0, 0, 2, 0), "S9"),
    ("[1,1,1,1]", (1, 1, 0, 0), "S7"),
    ("[1,1,1,1]", (0, 0, 1, 1), "S7"),
    ("[1,1,1,1]", (1, 1, 1, 1), "S8"),
    ("[1,1,1,1]", (0, 1, 0, 1), "S8"),
    ("[1,1,1,1]", (1, 0, 1, 0), "S8"),
    ("[1,1,1,1]", (3, 5, 0, 0), "D4B"),
    ("[1,1,1,1]", (0, 0, 2, 7), "D4B"),
    ("[1,1,1,1]", (1, 1, 5, 5), "D4C"),
    ("[1,1,1,1]", (1, 5, 1, 5), "D4C"),
    ("[1,1,1,1]", (1, 2, 3, 4), "K[1,1,1,1]"),
    ("[2,1,1]", (1, 1, 0, 0), "S4"),
    ("[2,1,1]", (1, 0, 0, 0), "S2"),
    ("[2,1,1]", (0, 0, 0, 1), "E1"),
    ("[2,1,1]", (0, 0, 1, 0), "E16"),
    ("[2,1,1]", (2, 5, 0, 0), "D4A"),
    ("[2,1,1]", (0, 0, 3, 4), "D3B"),
    ("[2,1,1]", (5, 0, 0, 1), "D2B"),
    ("[2,1,1]", (0, 5, 0, 1), "D2B"),
    ("[2,1,1]", (1, 1, 7, 0), "D2C"),
    ("[2,1,1]", (1, 2, 3, 4), "K[2,1,1]"),
    ("[2,2]", (0, 0, 1, 0), "E8"),
    ("[2,2]", (0, 0, 0, 1), "E17"),
    ("[2,2]", (1, 0, 0, 0), "E7"),
    ("[2,2]", (1, 0, 5, 0), "E7"),
    ("[2,2]", (0, 1, 0, 5), "E19"),
    ("[2,2]", (0, 0, 2, 3), "D3C"),
    ("[2,2]", (2, 3, 0, 0), "D3D"),
    ("[2,2]", (1, 1, 1, 1), "K[2,2]"),
    ("[3,1]", (0, 0, 0, 1), "S1"),
    ("[3,1]", (1, 0, 0, 0), "E2"),
    ("[3,1]", (5, 1, 0, 0), "D1B"),
    ("[3,1]", (0, 0, 1, 0), "D2A"),
    ("[3,1]", (1, 0, 1, 0), "K[3,1]"),
    ("[4]", (1, 0, 0, 0), "E10"),
    ("[4]", (1, 5, 0, 0), "E10"),
    ("[4]", (0, 1, 0, 0), "E9"),
    ("[4]", (0, 0, 0, 1), "D1A"),
    ("[4]", (0, 0, 1, 0), "K[4]"),
    ("[0]", (1, 2, 0, 1), "E20"),  # 4*c1*c4 == c2^2+c3^2
    ("[0]", (1, 0, 0, 0), "E3'"),
    ("[0]", (0, 1, 2, 0), "D1C"),
    ("[0]", (3, 1, 2, 1), "D3A"),
    ("(1)", (1, 2, 3, 4), "E15"),
    ("(2)", (1, 0, 0, 0), "E15"),
]


@pytest.mark.parametrize("label,pattern,name", PATTERN_CASES)
def test_classify_multiplier(label, pattern, name):
    coeffs = [RatFun.const(FLAT_RING, c) for c in pattern]
    assert classify_multiplier(label, coeffs) == name


def test_classify_isotropic_pattern():
    coeffs = [
        RatFun.const(FLAT_RING, 0),
        RatFun.const(FLAT_RING, 1),
        RatFun.const(FLAT_RING, I),
        RatFun.const(FLAT_RING, 0),
    ]
    assert classify_multiplier("[0]", coeffs) == "E11"


def test_classify_symbolic_entries():
    b1, b2 = fvar("b1"), fvar("b2")
    zero = RatFun.const(FLAT_RING, 0)
    assert classify_multiplier("[1,1,1,1]", [b1, b2, zero, zero]) == "D4B"
    assert classify_multiplier("[1,1,1,1]", [b1, b1, b2, b2]) == "D4C"
    assert classify_multiplier("[2,1,1]", [zero, zero, b1, b2]) == "D3B"


def test_dump_catalog_deterministic():
    d1 = dump_catalog()
    d2 = dump_catalog()
    assert d1 == d2
    parsed = json.loads(d1)
    assert set(parsed) == set(ALL_LABELS)
    assert parsed["[0]"]["singular"] is False
    assert parsed["(1)"]["singular"] is True
