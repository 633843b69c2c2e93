import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snhopf.poly import (CENTER, DELAY_PLAIN, FULL, MU_INDEPENDENT,
                         NU_INDEPENDENT, VANISHING_AT_MU0, Monomial,
                         SpaceDesc, VectorPoly, check_reality, compose_linear,
                         enumerate_basis, basis_index, extend_mu, from_vec,
                         split_parameter, to_vec)


def test_monomial_validation():
    with pytest.raises(ValueError):
        Monomial((1, -1))
    assert Monomial((1, 2, 0)).degree == 3


def test_enumeration_counts():
    assert len(enumerate_basis(SpaceDesc(1, 0, 2, ncomp=3))) == 30
    assert len(enumerate_basis(SpaceDesc(1, 1, 2, ncomp=1))) == 15
    assert len(enumerate_basis(
        SpaceDesc(1, 0, 2, ncomp=1, flavor=NU_INDEPENDENT))) == 6


def test_enumeration_rejects_low_degree():
    with pytest.raises(ValueError):
        enumerate_basis(SpaceDesc(1, 0, 1, ncomp=1))


@given(st.integers(1, 2), st.integers(0, 1), st.integers(2, 4))
@settings(max_examples=20, deadline=None)
def test_enumeration_bijection(p, s, ell):
    space = SpaceDesc(p, s, ell, ncomp=2 * p + 1)
    basis = enumerate_basis(space)
    idx = basis_index(space)
    assert len(set(basis)) == len(basis)
    for i, km in enumerate(basis):
        assert idx[km] == i
    # monomials are emitted in their total order
    monos = [m for k, m in basis if k == 0]
    assert monos == sorted(monos)


@given(st.lists(st.integers(0, 5), min_size=3, max_size=3),
       st.lists(st.integers(0, 5), min_size=3, max_size=3))
@settings(max_examples=50, deadline=None)
def test_monomial_order_is_graded_lex(e1, e2):
    m1, m2 = Monomial(e1), Monomial(e2)
    if m1.degree != m2.degree:
        assert (m1 < m2) == (m1.degree < m2.degree)
    elif tuple(m1) != tuple(m2):
        # same degree: higher power on an earlier variable comes first
        assert (m1 < m2) == (tuple(m1) > tuple(m2))


def test_compose_identity():
    space = SpaceDesc(1, 0, 2, ncomp=1, layout=DELAY_PLAIN, nslots=2)
    f = VectorPoly.single(space, 0, (2, 0), 1.0)
    g = compose_linear(f, np.eye(2))
    assert (g - f).norm() == 0.0


def test_compose_binomial():
    space = SpaceDesc(1, 0, 2, ncomp=1, layout=DELAY_PLAIN, nslots=2)
    f = VectorPoly.single(space, 0, (1, 1), 1.0)  # v0 v1
    M = np.array([[1.0, 1.0], [1.0, -1.0]])  # v0 = x0+x1, v1 = x0-x1
    g = compose_linear(f, M)
    assert g.coeffs[0] == {Monomial((2, 0)): 1.0 + 0j,
                           Monomial((0, 2)): -1.0 + 0j}


def test_compose_center_row_expansion():
    # v0^2 through the first center-basis row: all 10 quadratic monomials
    tau = -0.7
    e = np.exp(1j * tau)
    space = SpaceDesc(1, 0, 2, ncomp=1, layout=DELAY_PLAIN, nslots=1)
    f = VectorPoly.single(space, 0, (2,), 1.0)
    M = np.array([[1.0, e, np.conj(e), tau]])
    out = compose_linear(f, M, SpaceDesc(1, 0, 2, ncomp=1, layout=CENTER))
    # oracle: expand (a+b+c+d)^2 by brute force over index pairs
    row = [1.0, e, np.conj(e), tau]
    expect: dict[tuple, complex] = {}
    for i, j in itertools.product(range(4), repeat=2):
        key = [0, 0, 0, 0]
        key[i] += 1
        key[j] += 1
        key = tuple(key)
        expect[key] = expect.get(key, 0.0) + row[i] * row[j]
    assert len(out.coeffs[0]) == 10
    for m, c in out.coeffs[0].items():
        assert c == pytest.approx(expect[tuple(m)], abs=1e-14)
    # and by random-point evaluation
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert out.eval(x)[0] == pytest.approx((M[0] @ x) ** 2, rel=1e-12)


def test_compose_associativity_random():
    rng = np.random.default_rng(42)
    space = SpaceDesc(1, 1, 4, ncomp=3, layout=CENTER)
    n = space.nstate
    basis = enumerate_basis(space)
    for _ in range(5):
        f = from_vec(space, rng.standard_normal(len(basis))
                     + 1j * rng.standard_normal(len(basis)))
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        N = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        left = compose_linear(compose_linear(f, M), N)
        right = compose_linear(f, M @ N)
        scale = max(1.0, right.norm())
        assert (left - right).norm() <= 1e-10 * scale


def test_split_parameter_examples():
    space = SpaceDesc(1, 1, 2, ncomp=1)
    f = VectorPoly(space, [{(2, 0, 0, 0, 0): 1.0, (1, 0, 0, 1, 0): 3.0,
                            (1, 0, 0, 0, 1): 2.0}])
    h, q = split_parameter(f)
    assert set(map(tuple, h.coeffs[0])) == {(2, 0, 0, 0, 0), (1, 0, 0, 1, 0)}
    assert set(map(tuple, q.coeffs[0])) == {(1, 0, 0, 0, 1)}
    z = VectorPoly.zero(space)
    hz, qz = split_parameter(z)
    assert hz.is_zero() and qz.is_zero()
    all_mu = VectorPoly(space, [{(1, 0, 0, 0, 1): 1.0, (0, 0, 0, 0, 2): 2.0}])
    h2, q2 = split_parameter(all_mu)
    assert h2.is_zero() and (q2 - all_mu).norm() == 0


def test_split_parameter_projection_pair():
    rng = np.random.default_rng(3)
    space = SpaceDesc(2, 1, 3, ncomp=5)
    basis = enumerate_basis(space)
    f = from_vec(space, rng.standard_normal(len(basis))
                 + 1j * rng.standard_normal(len(basis)))
    h, q = split_parameter(f)
    assert ((h + q) - f).norm() == 0.0
    hh, hq = split_parameter(h)
    qh, qq = split_parameter(q)
    assert (hh - h).norm() == 0.0 and hq.is_zero()
    assert qh.is_zero() and (qq - q).norm() == 0.0


def test_check_reality_examples():
    space = SpaceDesc(1, 0, 2, ncomp=3)
    good = VectorPoly(space, [
        {(0, 1, 1, 0): 1.0},
        {(1, 1, 0, 0): 1.0j},
        {(1, 0, 1, 0): -1.0j},
    ])
    ok, viol = check_reality(good)
    assert ok and viol is None
    bad = VectorPoly(space, [{(2, 0, 0, 0): 1.0j}, {}, {}])
    ok, viol = check_reality(bad)
    assert not ok
    assert viol[0] == 0 and tuple(viol[1]) == (2, 0, 0, 0)


def test_check_reality_of_lifted_field(data_p1):
    # real delayed polynomial lifted through the dual weights stays real
    from snhopf.realize import DelayTuple, embed_plain, lift_to_center
    space = SpaceDesc(1, 0, 2, ncomp=1, layout=DELAY_PLAIN, nslots=2)
    h = VectorPoly(space, [{(2, 0): 0.5, (1, 1): -1.25, (0, 2): 2.0}])
    f = lift_to_center(embed_plain(h), data_p1, DelayTuple((-0.2, -1.4)))
    ok, viol = check_reality(f)
    assert ok, viol


def test_check_reality_wrong_component_count():
    space = SpaceDesc(1, 0, 2, ncomp=2)
    with pytest.raises(ValueError):
        check_reality(VectorPoly.zero(space))


def test_compose_dimension_mismatch():
    space = SpaceDesc(1, 0, 2, ncomp=1, layout=DELAY_PLAIN, nslots=2)
    f = VectorPoly.single(space, 0, (2, 0), 1.0)
    with pytest.raises(ValueError):
        compose_linear(f, np.eye(3))


def test_vector_roundtrip_and_extend_mu():
    space = SpaceDesc(1, 1, 3, ncomp=3)
    rng = np.random.default_rng(11)
    basis = enumerate_basis(space)
    v = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    f = from_vec(space, v)
    assert np.allclose(to_vec(f), v)
    g = extend_mu(f, 3)
    assert g.space.s == 3 and g.norm() == pytest.approx(f.norm())
    with pytest.raises(ValueError):
        extend_mu(g, 1)
