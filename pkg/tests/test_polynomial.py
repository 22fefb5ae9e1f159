import numpy as np
from hypothesis import given, settings, strategies as st

from releq.polynomial import Polynomial


def test_evaluate_and_derivatives():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    p = 3 * x * x * y - y ** 3 + 2.0
    pt = np.array([1.5, -0.5])
    assert np.isclose(p(pt), 3 * 2.25 * -0.5 + 0.125 + 2.0)
    np.testing.assert_allclose(p.gradient(pt), [6 * 1.5 * -0.5, 3 * 2.25 - 3 * 0.25])
    np.testing.assert_allclose(p.hessian(pt), [[6 * -0.5, 6 * 1.5], [6 * 1.5, -6 * -0.5]])


def test_from_term_list_merges_duplicates():
    p = Polynomial.from_term_list(2, [{"monomial": [1, 0], "coeff": 1.0},
                                      {"monomial": [1, 0], "coeff": 2.0},
                                      {"monomial": [0, 2], "coeff": 0.5}])
    assert np.isclose(p(np.array([2.0, 2.0])), 3 * 2 + 0.5 * 4)


def test_constant_and_subtraction():
    x = Polynomial.variable(1, 0)
    zero = x - x
    assert zero(np.array([3.0])) == 0.0
    assert np.all(zero.gradient(np.array([3.0])) == 0.0)
    assert Polynomial.constant(1, 4.0)(np.array([9.0])) == 4.0


coeffs = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2), coeffs),
                min_size=1, max_size=6),
       st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3))
def test_gradient_matches_central_differences(terms, point):
    p = Polynomial.from_term_list(3, [{"monomial": [a, b, c], "coeff": k} for a, b, c, k in terms])
    x = np.array(point)
    h = 1e-6
    fd = np.array([(p(x + h * e) - p(x - h * e)) / (2 * h) for e in np.eye(3)])
    g = p.gradient(x)
    assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=2))
def test_product_rule(point):
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    f = x * x + 2 * y
    g = x * y - 1.0
    pt = np.array(point)
    np.testing.assert_allclose((f * g).gradient(pt),
                               f.gradient(pt) * g(pt) + f(pt) * g.gradient(pt), atol=1e-12)
