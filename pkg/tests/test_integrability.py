"""Canonical potential system, nondegeneracy, classification survey."""

import random

import pytest

from bocher.catalog import FLAT_RING, fconst, fvar, get_system
from bocher.errors import DegeneratePair
from bocher.integrability import (
    IntegrabilityMatrices,
    admits_nondegenerate_potential,
    bertrand_darboux_residual,
    canonical_coeffs,
    check_integrability,
    classification_case,
    potential_solution_space,
    quadratic_symbol,
    verify_potential,
)
from bocher.ratfun import RatFun
from bocher.scalars import GaussRat, rational

rng = random.Random(1123)

NONDEG = ("[1,1,1,1]", "[2,1,1]", "[2,2]", "[3,1]", "[4]", "[0]")


@pytest.fixture(scope="module")
def coeffs():
    return {lbl: canonical_coeffs(*get_system(lbl).generators) for lbl in NONDEG}


def test_bd_residual_catalog(coeffs):
    for lbl in NONDEG:
        s = get_system(lbl)
        V = s.flat_potential
        for g in s.generators:
            assert bertrand_darboux_residual(quadratic_symbol(g), V).is_zero(), lbl


def test_bd_residual_hamiltonian_trivial():
    s = get_system("[1,1,1,1]")
    aij = quadratic_symbol(s.hamiltonian)
    for V in (s.flat_potential, fvar("x") ** 3, fvar("x") * fvar("y")):
        assert bertrand_darboux_residual(aij, V).is_zero()


def test_bd_residual_nonmember():
    s = get_system("[1,1,1,1]")
    res = bertrand_darboux_residual(quadratic_symbol(s.generators[0]), fvar("x"))
    assert not res.is_zero()
    pt = {"x": rational(5, 2), "y": rational(7, 3)}
    assert not res.eval(pt).is_zero()


def test_canonical_coeffs_examples(coeffs):
    s = get_system("[1,1,1,1]")
    c = coeffs["[1,1,1,1]"]
    assert verify_potential(c, s.flat_potential)
    with pytest.raises(DegeneratePair):
        canonical_coeffs(s.generators[0], s.generators[0])
    c0 = coeffs["[0]"]
    assert verify_potential(c0, get_system("[0]").flat_potential)


def test_check_integrability_catalog(coeffs):
    for lbl in NONDEG:
        assert check_integrability(coeffs[lbl]), lbl


def test_singular_pairs_degenerate():
    for lbl in ("(1)", "(2)"):
        s = get_system(lbl)
        assert not admits_nondegenerate_potential(*s.generators)


def test_verify_potential_members(coeffs):
    for lbl in NONDEG:
        fam = get_system(lbl).family
        for b in fam.flat_basis:
            assert verify_potential(coeffs[lbl], b), lbl


def test_verify_potential_constants(coeffs):
    one = fconst(1)
    # five families contain the constant potential; the fully generic
    # family does not (its four members already span the solution space)
    for lbl in ("[2,1,1]", "[2,2]", "[3,1]", "[4]", "[0]"):
        assert verify_potential(coeffs[lbl], one), lbl
    assert not verify_potential(coeffs["[1,1,1,1]"], one)


def test_verify_potential_rejects(coeffs):
    assert not verify_potential(coeffs["[1,1,1,1]"], fvar("x") ** 3)


def test_solution_space_pools(coeffs):
    s = get_system("[1,1,1,1]")
    x, y = fvar("x"), fvar("y")
    pool = list(s.family.flat_basis) + [x, y, x * y]
    sol = potential_solution_space(coeffs["[1,1,1,1]"], pool)
    assert len(sol) == 4
    assert all(any(m == b for b in s.family.flat_basis) for m in sol)
    assert potential_solution_space(coeffs["[0]"], [fconst(1)]) == [fconst(1)]
    sol0 = potential_solution_space(coeffs["[0]"], get_system("[0]").family.flat_basis)
    assert len(sol0) == 4


def test_basis_independence(coeffs):
    s = get_system("[1,1,1,1]")
    h = s.hamiltonian
    s1, s2 = s.generators
    lam = fconst(rational(3, 7))
    alpha, beta = fconst(rational(-2, 5)), fconst(rational(4, 3))
    c_ref = coeffs["[1,1,1,1]"]
    c_new = canonical_coeffs(s1 + h.scale(lam), s1.scale(alpha) + s2.scale(beta))
    for attr in ("A12", "B12", "C12", "A22", "B22", "C22"):
        assert getattr(c_ref, attr) == getattr(c_new, attr), attr


def test_z_vector_property(coeffs):
    # the stored matrices propagate the jet of every verified potential:
    # d/dx z = A1 z and d/dy z = A2 z for z = (V, V1, V2, V11)
    for lbl in ("[2,2]", "[0]"):
        m = IntegrabilityMatrices(coeffs[lbl])
        V = get_system(lbl).flat_potential
        V1 = V.derivative("x")
        V2 = V.derivative("y")
        V11 = V1.derivative("x")
        z = [V, V1, V2, V11]
        for mat, var in ((m.A1, "x"), (m.A2, "y")):
            for i in range(4):
                lhs = z[i].derivative(var)
                rhs = sum((mat[i][j] * z[j] for j in range(4)), fconst(0))
                assert (lhs - rhs).is_zero(), (lbl, var, i)


def test_classification_case1():
    for lbl, s1, s2, expected in classification_case(1):
        assert admits_nondegenerate_potential(s1, s2) == expected, lbl


def test_classification_case5():
    for lbl, s1, s2, expected in classification_case(5):
        assert admits_nondegenerate_potential(s1, s2) == expected, lbl


def test_case5_i_extends_to_generic_family(coeffs):
    # the (J1^2+K1^2, J3^2+K3^2) pair carries the same canonical system as
    # the generic catalog entry: its four basis potentials all verify
    items = dict((lbl, (a, b)) for lbl, a, b, _ in classification_case(5))
    s1, s2 = items["case5-i"]
    c = canonical_coeffs(s1, s2)
    fam = get_system("[1,1,1,1]").family
    assert all(verify_potential(c, b) for b in fam.flat_basis)


@pytest.mark.slow
@pytest.mark.parametrize("case", [2, 3, 4])
def test_classification_cases_full(case):
    for lbl, s1, s2, expected in classification_case(case):
        assert admits_nondegenerate_potential(s1, s2) == expected, lbl


def test_classification_case2_representatives():
    items = classification_case(2)
    sample = [it for it in items if it[0] in ("case2-2a", "case2-2c", "case2-6b", "case2-1a", "case2-4e")]
    for lbl, s1, s2, expected in sample:
        assert admits_nondegenerate_potential(s1, s2) == expected, lbl


def test_classification_case4_representatives():
    items = classification_case(4)
    sample = [it for it in items if it[0] in ("case4-aa", "case4-be", "case4-dc")]
    for lbl, s1, s2, expected in sample:
        assert admits_nondegenerate_potential(s1, s2) == expected, lbl
