import math

import numpy as np
import pytest

from snhopf.errors import PreconditionError
from snhopf.poly import (FULL, MU_INDEPENDENT, NU_INDEPENDENT, Monomial,
                         SpaceDesc, VectorPoly, enumerate_basis, from_vec,
                         split_parameter, to_vec)
from snhopf.symmetry import (FULL_GROUP, TORUS, RadialJet, angular_part,
                             equivariant_basis, project_equivariant,
                             project_equivariant_nu0, radial_part,
                             radial_space, time_average, zp2_equivariant_basis)

from oracles import fixed_subspace_dimension, haar_average_pointwise


def center(p, s, ell, flavor=FULL):
    return SpaceDesc(p, s, ell, ncomp=2 * p + 1, flavor=flavor)


class TestFrozenProjection:
    def test_equivariant_fixed_point(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (2, 0, 0, 0), 1.0)
        assert (project_equivariant_nu0(f) - f).norm() == 0.0

    def test_x1_squared_averages_to_zero(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (0, 2, 0, 0), 1.0)
        assert project_equivariant_nu0(f).is_zero()
        # pointwise Haar-quadrature oracle agrees
        rng = np.random.default_rng(0)
        pts = [rng.standard_normal(4) + 1j * rng.standard_normal(4)
               for _ in range(3)]
        avg = haar_average_pointwise(f, pts, freeze_nu=True)
        assert np.max(np.abs(avg)) < 1e-12

    def test_nu_monomial_frozen_out(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (1, 0, 0, 1), 1.0)
        assert project_equivariant_nu0(f).is_zero()

    def test_idempotent_and_matches_pointwise_oracle(self):
        rng = np.random.default_rng(5)
        space = center(1, 0, 3)
        basis = enumerate_basis(space)
        f = from_vec(space, rng.standard_normal(len(basis))
                     + 1j * rng.standard_normal(len(basis)))
        pf = project_equivariant_nu0(f)
        assert (project_equivariant_nu0(pf) - pf).norm() == 0.0
        pts = [rng.standard_normal(4) + 1j * rng.standard_normal(4)
               for _ in range(4)]
        oracle = haar_average_pointwise(f, pts, freeze_nu=True)
        for i, pt in enumerate(pts):
            assert np.allclose(pf.eval(pt), oracle[i], atol=1e-10)


class TestPlainProjection:
    def test_kept_and_killed(self):
        space = center(1, 0, 2, NU_INDEPENDENT)
        kept = VectorPoly.single(space, 1, (1, 1, 0, 0), 1.0)  # x0 x1 row x1
        assert (project_equivariant(kept) - kept).norm() == 0.0
        killed = VectorPoly.single(space, 1, (2, 0, 0, 0), 1.0)
        assert project_equivariant(killed).is_zero()
        rng = np.random.default_rng(1)
        pts = [rng.standard_normal(4) + 1j * rng.standard_normal(4)
               for _ in range(3)]
        for f, want_zero in ((kept, False), (killed, True)):
            avg = haar_average_pointwise(f, pts)
            direct = np.array([project_equivariant(f).eval(p) for p in pts])
            assert np.allclose(avg, direct, atol=1e-10)
            assert (np.max(np.abs(avg)) < 1e-12) == want_zero

    def test_zero(self):
        assert project_equivariant(
            VectorPoly.zero(center(1, 0, 2, NU_INDEPENDENT))).is_zero()

    def test_rejects_nu_dependence(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (1, 0, 0, 1), 1.0)
        with pytest.raises(PreconditionError):
            project_equivariant(f)


class TestEquivariantBasis:
    @pytest.mark.parametrize("ell,dim", [(2, 4), (3, 6)])
    def test_torus_dimension_vs_fixed_subspace(self, ell, dim):
        basis = equivariant_basis(1, 0, ell, TORUS)
        assert len(basis) == dim
        space = SpaceDesc(1, 0, ell, ncomp=3, flavor=NU_INDEPENDENT)
        assert fixed_subspace_dimension(space) == dim

    def test_torus_spans_projection_range(self):
        space = center(1, 0, 2)
        basis = enumerate_basis(space)
        eq = equivariant_basis(1, 0, 2, TORUS)
        # every projected monomial lies in the span of the returned basis
        full_eq_space = center(1, 0, 2, NU_INDEPENDENT)
        B = np.stack([to_vec(
            VectorPoly(full_eq_space, b.coeffs, _validate=False)) for b in eq],
            axis=1)
        for km in basis:
            f = VectorPoly.single(space, km[0], km[1], 1.0)
            pv = project_equivariant_nu0(f)
            if pv.is_zero():
                continue
            v = to_vec(VectorPoly(full_eq_space, pv.coeffs, _validate=False))
            resid = np.linalg.norm(
                v - B @ np.linalg.lstsq(B, v, rcond=None)[0])
            assert resid < 1e-12

    def test_full_group_divisibility_and_reality(self):
        from snhopf.poly import check_reality
        basis = equivariant_basis(1, 0, 2, FULL_GROUP)
        assert len(basis) == 5
        for b in basis:
            assert check_reality(b, tol=1e-9)[0]
            for k, m, c in b.terms():
                if k == 0 and m[0] == 0:
                    assert abs(c) < 1e-9


class TestRadialAngular:
    def test_radial_examples(self):
        f = VectorPoly.single(center(1, 0, 2, NU_INDEPENDENT), 0,
                              (0, 1, 1, 0), 1.0)
        r = radial_part(f)
        assert r.coeffs[0] == {Monomial((0, 2)): 1.0}
        alpha, beta = 0.7, -0.4
        g = VectorPoly(center(1, 0, 2, NU_INDEPENDENT), [
            {},
            {(1, 1, 0, 0): alpha + 1j * beta},
            {(1, 0, 1, 0): alpha - 1j * beta},
        ])
        r2 = radial_part(g)
        assert r2.coeffs[1] == {Monomial((1, 1)): pytest.approx(alpha)}

    def test_radial_rejects_nonequivariant(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (0, 2, 0, 0), 1.0)
        with pytest.raises(PreconditionError):
            radial_part(f)

    def test_radial_image_dimension(self):
        assert len(zp2_equivariant_basis(radial_space(1, 0, 3))) == 4

    def test_radial_surjective_on_equivariant_basis(self):
        for (p, s, ell) in [(1, 0, 2), (1, 0, 3), (1, 1, 2), (2, 0, 2)]:
            eq = equivariant_basis(p, s, ell, TORUS)
            tgt = zp2_equivariant_basis(radial_space(p, s, ell))
            idx = {km: i for i, km in enumerate(tgt)}
            cols = []
            for b in eq:
                r = radial_part(b)
                v = np.zeros(len(tgt))
                for k, m, c in r.terms():
                    v[idx[(k, m)]] = complex(c).real
                cols.append(v)
            M = np.stack(cols, axis=1)
            rank = np.linalg.matrix_rank(M, tol=1e-10)
            assert rank == len(tgt)

    def test_angular_examples(self):
        g = VectorPoly(center(1, 0, 2, NU_INDEPENDENT), [
            {}, {(1, 1, 0, 0): 1.0j}, {(1, 0, 1, 0): -1.0j}])
        a = angular_part(g)
        assert a.coeffs[0] == {Monomial((1, 0)): 1.0}
        real_g = VectorPoly(center(1, 0, 2, NU_INDEPENDENT), [
            {}, {(1, 1, 0, 0): 2.5}, {(1, 0, 1, 0): 2.5}])
        assert angular_part(real_g).is_zero()

    def test_angular_matches_closed_form(self, data_p1):
        from oracles import snhopf_degree2_angular_closed_form
        from snhopf.engine import saddle_node_hopf_example
        A = dict(A20=0.4, A11=0.9, A02=-0.3, A30=0.0, A21=0.0, A12=0.0,
                 A03=0.0)
        tau = (-0.5, -1.3)
        _, nf = saddle_node_hopf_example(A, tau, data_p1)
        got = complex(nf.angular[2].coeffs[0][Monomial((1, 0))]).real
        assert got == pytest.approx(
            snhopf_degree2_angular_closed_form(A, tau, data_p1), abs=1e-12)


class TestSplitCompatibility:
    def test_projection_preserves_parameter_split(self):
        rng = np.random.default_rng(8)
        space = center(1, 1, 3)
        basis = enumerate_basis(space)
        f = from_vec(space, rng.standard_normal(len(basis)))
        h, q = split_parameter(f)
        ph, pq = project_equivariant_nu0(h), project_equivariant_nu0(q)
        # restrictions are projections with images in the right blocks
        assert (project_equivariant_nu0(ph) - ph).norm() == 0.0
        assert (project_equivariant_nu0(pq) - pq).norm() == 0.0
        assert split_parameter(ph)[1].is_zero()
        assert split_parameter(pq)[0].is_zero()
        total = project_equivariant_nu0(f)
        assert ((ph + pq) - total).norm() < 1e-14


class TestTimeAverage:
    def test_equivariant_fixed_for_any_T(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (0, 1, 1, 0), 2.0)
        for T in (3.0, 17.0):
            g = time_average(f, (1.0,), T, 2000)
            assert (g - f).norm() < 1e-12

    def test_zero(self):
        assert time_average(VectorPoly.zero(center(1, 0, 2)), (1.0,), 10.0,
                            1000).is_zero()

    def test_exact_cesaro_remainder_for_x1_squared(self):
        # the T-average of a frequency-2 monomial misses the projection by
        # |sin T|/T exactly; the quadrature must reproduce that remainder
        f = VectorPoly.single(center(1, 0, 2), 0, (0, 2, 0, 0), 1.0)
        for T in (100.0, 200.0):
            n = int(math.ceil(40 * T * 3 / math.pi))
            err = (time_average(f, (1.0,), T, n)
                   - project_equivariant(f)).norm()
            assert err == pytest.approx(abs(math.sin(T)) / T, rel=2e-3)

    def test_nyquist_guard(self):
        f = VectorPoly.single(center(1, 0, 2), 0, (0, 2, 0, 0), 1.0)
        with pytest.raises(PreconditionError):
            time_average(f, (1.0,), 100.0, 30)

    def test_one_over_T_envelope(self):
        rng = np.random.default_rng(17)
        space = center(1, 0, 3)
        basis = enumerate_basis(space)
        nu = space.nu_index
        vec = rng.standard_normal(len(basis))
        for i, (k, m) in enumerate(basis):
            if m[nu] != 0:
                vec[i] = 0.0
        f = from_vec(space, vec)
        exact = project_equivariant(f)
        # fit C on a T grid, then check the envelope on a finer one
        errs = {}
        for T in (25.0, 50.0, 100.0, 200.0, 400.0):
            n = int(math.ceil(8 * T * 4 / math.pi))
            errs[T] = (time_average(f, (1.0,), T, n) - exact).norm()
        C = max(T * e for T, e in errs.items())
        for T, e in errs.items():
            assert e <= 1.0001 * C / T


def test_radial_jet_container():
    jet = RadialJet.zero(1, 0)
    term = VectorPoly(radial_space(1, 0, 2), [{(2, 0): 1.0}, {(1, 1): -2.0}])
    jet = jet.with_term(2, term)
    assert jet.degrees() == [2]
    assert jet.is_zp2_equivariant()
    assert (jet + jet).norm() == pytest.approx(2 * jet.norm())
    assert (jet - jet).norm() == 0.0
    bad = VectorPoly(radial_space(1, 0, 2), [{(1, 1): 1.0}, {}])
    assert not RadialJet(1, 0, {2: bad}).is_zp2_equivariant()
