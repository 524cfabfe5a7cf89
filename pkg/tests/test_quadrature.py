import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricvol import catalog
from toricvol.errors import AdmissibilityError
from toricvol.polytope import build_polytope, polytope_from_dict
from toricvol.quadrature import (AffineFunction, Kernel, divided_difference, integrate_boundary,
                                 integrate_polytope, integrate_simplex, integrate_weighted_exp,
                                 numeric_fallback, polytope_moment)

from instances import instance_list

SIMPLEX = build_polytope(2, [(0, 0), (1, 0), (0, 1)])
SQUARE = build_polytope(2, [(-1, -1), (1, -1), (1, 1), (-1, 1)])


def test_divided_difference_exp(backend):
    # [0, 1] of exp's antiderivative
    assert divided_difference(Kernel.exp(), [0.0, 1.0]) == pytest.approx(math.e - 1, rel=1e-15)
    # fully confluent: G^(r)(0) / r! with G^(r) = exp
    assert divided_difference(Kernel.exp(), [0.0, 0.0, 0.0]) == pytest.approx(0.5, rel=1e-15)
    assert divided_difference(Kernel.exp(), [0.0, 0.0, 0.0, 0.0]) == pytest.approx(1 / 6, rel=1e-15)


def test_divided_difference_confluent_is_continuous(backend):
    k = Kernel.inv_power(4)
    exact = divided_difference(k, [1.0, 1.0, 2.0])
    for eps in (1e-3, 1e-6, 1e-9, 1e-12):
        assert divided_difference(k, [1.0, 1.0 + eps, 2.0]) == pytest.approx(exact, rel=5 * eps + 1e-13)


def test_unit_simplex_values(backend):
    one = AffineFunction.make([0, 0], 1.0)
    assert integrate_polytope(SIMPLEX, one, Kernel.monomial(0)) == pytest.approx(0.5, rel=1e-15)
    f = AffineFunction.make([1, 0], 0.0)
    # int x dx dy and int x^2 dx dy over the unit triangle
    assert integrate_polytope(SIMPLEX, f, Kernel.monomial(1)) == pytest.approx(1 / 6, rel=1e-14)
    assert integrate_polytope(SIMPLEX, f, Kernel.monomial(2)) == pytest.approx(1 / 12, rel=1e-14)


def test_weighted_exp_at_zero_is_first_moment(backend):
    assert integrate_weighted_exp(SIMPLEX, [0, 0], 0) == pytest.approx(1 / 6, rel=1e-14)


def test_square_exp_closed_form(backend):
    f = AffineFunction.make([1, 0], 0.0)
    val = integrate_polytope(SQUARE, f, Kernel.exp())
    assert val == pytest.approx(2 * (math.e - 1 / math.e), rel=1e-14)


def test_boundary_measure_and_boundary_integral(backend):
    one = AffineFunction.make([0, 0], 1.0)
    assert integrate_boundary(SIMPLEX, one, Kernel.monomial(0)) == pytest.approx(3.0, rel=1e-15)
    # the hypotenuse has lattice length 1, Euclidean length sqrt 2
    f = AffineFunction.make([1, 1], 1.0)
    # both legs give 1/2; f = 2 on the hypotenuse
    assert integrate_boundary(SIMPLEX, f, Kernel.inv_power(2)) == pytest.approx(1.25, rel=1e-14)


def test_inverse_power_on_boundary_against_quad(backend):
    from scipy.integrate import quad

    f = AffineFunction.make([1, 2], 1.0)
    k = Kernel.inv_power(2)
    # legs: x in [0,1] with y=0, y in [0,1] with x=0; hypotenuse with lattice length 1
    legs = quad(lambda x: (x + 1) ** -2, 0, 1)[0] + quad(lambda y: (2 * y + 1) ** -2, 0, 1)[0]
    hyp = quad(lambda s: (1 + (1 - s) + 2 * s) ** -2, 0, 1)[0]
    assert integrate_boundary(SIMPLEX, f, k) == pytest.approx(legs + hyp, rel=1e-12)


def test_moments_match_fallback(backend):
    P = polytope_from_dict(catalog.load_document("blowup_anticanonical"))
    c = np.array([0.3, -0.7])
    f = AffineFunction.make(c, 0.0)
    M = polytope_moment(P, f, Kernel.exp(), 2)
    num = np.zeros((3, 3))
    for s in P.interior_simplices:
        for i in range(3):
            for j in range(3):
                num[i, j] += numeric_fallback(
                    s, lambda y, i=i, j=j: np.exp(y @ c) * np.column_stack([y, np.ones(len(y))])[:, i]
                    * np.column_stack([y, np.ones(len(y))])[:, j])
    np.testing.assert_allclose(M, num, rtol=1e-11)


def test_cube_exp_separable(backend):
    P = polytope_from_dict(catalog.load_document("cube3"))
    c = np.array([0.5, -1.0, 2.0])
    expected = np.prod([(math.exp(x) - math.exp(-x)) / x for x in c])
    val = integrate_polytope(P, AffineFunction.make(c, 0), Kernel.exp())
    assert val == pytest.approx(expected, rel=1e-13)


def test_inverse_power_rejects_nonpositive():
    f = AffineFunction.make([1, 0], -0.5)
    with pytest.raises(AdmissibilityError, match="vertex"):
        integrate_polytope(SIMPLEX, f, Kernel.inv_power(3))


def test_random_instances_against_fallback(backend):
    for s, f, k in instance_list(150, 7, confluent_fraction=0.5):
        exact = integrate_simplex(s, f, k, rescue=False)
        num = numeric_fallback(s, lambda y: k(f(y)))
        assert exact == pytest.approx(num, rel=1e-9), (s, f, k)


def test_backends_agree():
    from toricvol import _core_py

    try:
        from toricvol import _core
    except ImportError:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(3)
    for s, f, k in instance_list(200, 11, confluent_fraction=0.5):
        nodes = f(s.float_vertices).tolist()
        a = _core.divdiff(k.code, k.param, nodes)
        b = _core_py.divdiff(k.code, k.param, nodes)
        assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-300)
    P = polytope_from_dict(catalog.load_document("cube3"))
    verts, w = P.interior_arrays
    for order in (0, 1, 2):
        g = rng.uniform(-0.3, 0.3, 3)
        a = _core.simplex_moments(verts, w, g, 2.0, 1, 6, order)
        b = _core_py.simplex_moments(verts, w, g, 2.0, 1, 6, order)
        np.testing.assert_allclose(a, b, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_exp_translation_identity(c1, c2, shift):
    f = AffineFunction.make([c1, c2], 0.0)
    g = AffineFunction.make([c1, c2], shift)
    a = integrate_polytope(SQUARE, g, Kernel.exp())
    b = math.exp(shift) * integrate_polytope(SQUARE, f, Kernel.exp())
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.integers(1, 6), st.floats(0.5, 4))
def test_inverse_power_homogeneity(k1, k2, k, lam):
    f = AffineFunction.make([k1, k2], 1.0)
    g = AffineFunction.make([lam * k1, lam * k2], lam)
    a = integrate_polytope(SQUARE, g, Kernel.inv_power(k))
    b = lam ** (-k) * integrate_polytope(SQUARE, f, Kernel.inv_power(k))
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([((1, 0), (0, 1)), ((1, 1), (0, 1)), ((2, 1), (1, 1)), ((0, -1), (1, 0))]),
       st.floats(-1, 1), st.floats(-1, 1))
def test_unimodular_equivariance(A, c1, c2):
    P = polytope_from_dict(catalog.load_document("blowup_anticanonical"))
    Q = P.transformed(A, (1, -2))
    A = np.array(A, dtype=float)
    c = np.array([c1, c2])
    # f(y) on P equals f(A^-1 (z - b)) on Q
    Ainv = np.linalg.inv(A)
    b = np.array([1.0, -2.0])
    cq = Ainv.T @ c
    fq = AffineFunction.make(cq, -cq @ b + 1.5)
    fp = AffineFunction.make(c, 1.5)
    for k in (Kernel.exp(), Kernel.monomial(3)):
        assert integrate_polytope(Q, fq, k) == pytest.approx(integrate_polytope(P, fp, k), rel=1e-11)
        assert integrate_boundary(Q, fq, k) == pytest.approx(integrate_boundary(P, fp, k), rel=1e-11)


def test_worked_examples(backend):
    from fractions import Fraction

    from toricvol.polytope import Simplex

    assert divided_difference(Kernel.exp(), [0.0, 0.0]) == pytest.approx(1.0, rel=1e-15)
    # second antiderivative of t^-4 is t^-2 / 6
    assert divided_difference(Kernel.inv_power(4), [1.0, 2.0, 2.0]) == pytest.approx(1 / 12, rel=1e-14)
    f = AffineFunction.make([1, 1], 1.0)
    assert integrate_polytope(SIMPLEX, f, Kernel.inv_power(4)) == pytest.approx(1 / 12, rel=1e-14)
    one = AffineFunction.make([0, 0], 1.0)
    assert integrate_polytope(SIMPLEX, one, Kernel.exp()) == pytest.approx(math.e / 2, rel=1e-15)
    seg = Simplex(1, ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), Fraction(1))
    assert integrate_simplex(seg, one, Kernel.inv_power(2)) == pytest.approx(1.0, rel=1e-15)
    assert integrate_boundary(SIMPLEX, one, Kernel.inv_power(2)) == pytest.approx(3.0, rel=1e-15)
    assert integrate_polytope(SIMPLEX, one, Kernel.inv_power(4)) == pytest.approx(0.5, rel=1e-15)
    big = build_polytope(2, [(-1, -1), (2, -1), (-1, 2)])
    assert integrate_polytope(big, AffineFunction.make([0, 0], 0), Kernel.exp()) == pytest.approx(4.5)


def test_weighted_exp_symmetry_and_derivative(backend):
    for i in range(2):
        assert integrate_weighted_exp(SQUARE, [0, 0], i) == pytest.approx(0, abs=1e-15)
    P = build_polytope(2, [(-1, 0), (0, -1), (2, -1), (-1, 2)])
    c = np.array([0.4, -0.3])
    for i in range(2):
        e = np.eye(2)[i] * 1e-5
        W = lambda v: integrate_polytope(P, AffineFunction.make(v, 0), Kernel.exp())
        assert integrate_weighted_exp(P, c, i) == pytest.approx((W(c + e) - W(c - e)) / 2e-5, rel=1e-8)


def test_fallback_constant_integrand_is_weight():
    for s in SIMPLEX.interior_simplices:
        assert numeric_fallback(s, lambda y: np.ones(len(y))) == pytest.approx(float(s.weight), rel=1e-15)


def test_additivity_over_subdivision(backend):
    # the square split into two triangles by the anti-diagonal
    tri_a = build_polytope(2, [(-1, -1), (1, -1), (-1, 1)])
    tri_b = build_polytope(2, [(1, -1), (1, 1), (-1, 1)])
    f = AffineFunction.make([0.3, 0.2], 2.0)
    for k in (Kernel.exp(), Kernel.inv_power(3), Kernel.monomial(2)):
        whole = integrate_polytope(SQUARE, f, k)
        assert integrate_polytope(tri_a, f, k) + integrate_polytope(tri_b, f, k) == pytest.approx(whole, rel=1e-13)


def test_non_unimodular_affine_map(backend):
    A = np.array([[2.0, 1.0], [0.0, 3.0]])
    Q = SQUARE.transformed(((2, 1), (0, 3)))
    c = np.array([0.2, -0.1])
    fq = AffineFunction.make(np.linalg.inv(A).T @ c, 1.0)
    fp = AffineFunction.make(c, 1.0)
    assert integrate_polytope(Q, fq, Kernel.exp()) == pytest.approx(6 * integrate_polytope(SQUARE, fp, Kernel.exp()), rel=1e-13)
