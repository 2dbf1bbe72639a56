import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampsieve.sato_tate import (
    MinorantPoly,
    cheby_eval,
    cheby_table,
    chebyshev_poly,
    hecke_extend,
    lambda_big,
    minorant_graph,
    nu_integral,
    st_integral,
    verify_minorant,
)


def test_orthonormality_matrix():
    M = np.array([[st_integral(lambda x, m=m, n=n: cheby_eval(m, x) * cheby_eval(n, x)) for n in range(11)] for m in range(11)])
    assert np.max(np.abs(M - np.eye(11))) < 1e-9


def test_total_mass_and_high_degree():
    assert st_integral(lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-12)
    # degree-50 integrand: X_25^2 has mean one
    assert st_integral(lambda x: cheby_eval(25, x) ** 2) == pytest.approx(1.0, abs=1e-9)


def test_semicircle_moments():
    # even moments of the semicircle law on [-2, 2] are Catalan numbers
    for k, catalan in enumerate([1, 1, 2, 5, 14, 42]):
        assert st_integral(lambda x, k=k: x ** (2 * k)) == pytest.approx(catalan, abs=1e-9)


@pytest.mark.parametrize("m,x,expected", [(1, 1.5, 1.5), (2, 1.0, 0.0), (0, -2.0, 1.0), (5, 2.0, 6.0), (4, -2.0, 5.0)])
def test_cheby_examples(m, x, expected):
    assert cheby_eval(m, x) == pytest.approx(expected, abs=1e-13)


def test_cheby_endpoint_value():
    for m in range(30):
        assert cheby_eval(m, 2.0) == pytest.approx(m + 1, abs=1e-9)


def test_cheby_range_checked():
    with pytest.raises(ValueError):
        cheby_eval(2, 2.5)
    with pytest.raises(ValueError):
        cheby_eval(-1, 0.0)


def test_recurrence_vs_closed_form():
    theta = np.linspace(1e-3, math.pi - 1e-3, 1000)
    x = 2 * np.cos(theta)
    table = cheby_table(x, 20)
    for m in range(21):
        assert np.max(np.abs(table[m] - np.sin((m + 1) * theta) / np.sin(theta))) < 1e-10


def test_exact_monomial_recurrence():
    assert chebyshev_poly(2).coeffs == (-1, 0, 1)
    assert chebyshev_poly(3).coeffs == (0, -2, 0, 1)
    for m in range(1, 25):
        lhs = (Fraction(0),) + chebyshev_poly(m).coeffs
        prev = chebyshev_poly(m - 1).coeffs + (Fraction(0),) * 2
        assert chebyshev_poly(m + 1).coeffs == tuple(a - b for a, b in zip(lhs, prev))
    x = np.linspace(-2, 2, 101)
    for m in range(15):
        assert np.allclose(chebyshev_poly(m)(x), cheby_table(x, m)[m], atol=1e-9)


def test_product_orthonormality_d6():
    ms = [1, 2, 3, 4, 6, 9, 12]
    for i, m in enumerate(ms):
        for n in ms[i:]:
            value = nu_integral(lambda t, m=m, n=n: lambda_big(m, t) * lambda_big(n, t), [2, 3])
            assert abs(value - (m == n)) < 1e-8


def test_lambda_big_examples():
    assert lambda_big(1, {}) == 1.0
    a, b = 0.7, -1.3
    assert lambda_big(12, {2: a, 3: b}) == pytest.approx((a * a - 1) * b, abs=1e-14)
    theta = 0.4
    assert lambda_big(7, {7: 2 * math.cos(theta)}) == pytest.approx(math.sin(2 * theta) / math.sin(theta), abs=1e-14)
    with pytest.raises(KeyError):
        lambda_big(10, {2: 0.0})


@pytest.mark.parametrize("x", [-2.0, -0.3, 0.0, 1.7])
def test_hecke_extend_small(x):
    assert hecke_extend(x, 0) == 1.0
    assert hecke_extend(x, 1) == x
    assert hecke_extend(1.0, 2) == 0.0
    with pytest.raises(ValueError):
        hecke_extend(2.01, 1)


@given(st.integers(1, 100), st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_multiplicativity_and_hecke_recursion(m, seed):
    rng = np.random.default_rng(seed)
    t = {p: float(rng.uniform(-2, 2)) for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)}
    from ampsieve.arith import factorize

    fac = factorize(m)
    assert lambda_big(m, t) == math.prod((hecke_extend(t[p], e) for p, e in fac.items()), start=1.0)
    for p, e in fac.items():
        seq = [1.0, t[p]]
        for _ in range(e):
            seq.append(t[p] * seq[-1] - seq[-2])
        assert abs(hecke_extend(t[p], e) - seq[e]) < 1e-12


# --- minorants ---------------------------------------------------------------


def test_sign_minorant_constants(sign_poly):
    assert sign_poly.monomial() == (-1, Fraction(1, 2), Fraction(1, 4))
    assert sign_poly.beta0 == Fraction(-3, 4)
    assert sign_poly.delta == Fraction(1, 4)
    assert sign_poly.sigma2 == Fraction(5, 16)
    assert sign_poly.gamma == Fraction(1, 5)
    assert sign_poly.threshold == -1
    assert st_integral(sign_poly) == pytest.approx(-0.75, abs=1e-9)


def test_variance_identity(sign_poly):
    rng = np.random.default_rng(12)
    polys = [sign_poly] + [MinorantPoly(tuple(Fraction(int(k), 7) for k in rng.integers(-9, 10, size=5)), Fraction(1, 3)) for _ in range(5)]
    for Y in polys:
        mean = st_integral(Y)
        var = st_integral(lambda x: Y(x) ** 2) - mean**2
        assert mean == pytest.approx(float(Y.beta0), abs=1e-9)
        assert var == pytest.approx(float(Y.sigma2), abs=1e-9)


def test_verify_sign_minorant(sign_poly):
    report = verify_minorant(sign_poly)
    assert report.passed
    assert report.minorizes and report.exact_check and report.nonpositive_detects
    assert report.critical_points == (-1.0,)
    assert report.beta0_quadrature == pytest.approx(-0.75, abs=1e-9)
    assert report.max_violation == 0.0


def test_sign_minorant_touches_at_minus_two(sign_poly):
    x = np.linspace(-2, 0, 100_001)
    gap = np.sign(x) - sign_poly(x)
    assert gap.min() >= 0
    assert gap[0] == 0.0
    assert np.all(sign_poly(x) <= -1 + 1e-15)


def test_constant_minorant_flagged():
    Y = MinorantPoly((Fraction(-1),))
    report = verify_minorant(Y)
    assert report.minorizes
    assert report.mean_above_floor is False
    assert not report.passed
    assert Y.gamma is None


def test_violation_witness():
    Y = MinorantPoly((Fraction(0), Fraction(1)), Fraction(1, 4))  # Y = x crosses sgn on (0, 1)
    report = verify_minorant(Y)
    assert not report.minorizes and report.exact_check is False
    assert -2 <= report.witness <= 2
    assert report.max_violation > 0


def test_higher_degree_grid_only():
    Y = MinorantPoly(tuple(Fraction(c) for c in (-5, 0, 0, 0, Fraction(1, 100))))
    report = verify_minorant(Y)
    assert report.exact_check is None and report.minorizes


def test_custom_target():
    Y = MinorantPoly((Fraction(0), Fraction(1)))
    assert verify_minorant(Y, target=lambda x: x + 0.5).minorizes
    with pytest.raises(ValueError):
        verify_minorant(Y, target="cosine")


def test_minorant_json(tmp_path, sign_poly):
    data = sign_poly.to_json()
    assert data == {"beta": ["-3/4", "1/2", "1/4"], "delta": "1/4"}
    path = tmp_path / "y.json"
    path.write_text(json.dumps(data))
    assert MinorantPoly.load(path) == sign_poly


def test_graph_rows(sign_poly):
    rows = minorant_graph(sign_poly, 5)
    assert rows[0] == (-2.0, -1.0, -1.0)
    assert rows[2][0] == 0.0 and rows[2][1] == -1.0
    assert rows[-1] == (2.0, 1.0, 1.0)
