import math

import numpy as np
import pytest

from snhopf.errors import PreconditionError
from snhopf.homological import (apply_homological, center_space,
                                homological_matrix, solve_homological,
                                verify_splitting)
from snhopf.poly import (Monomial, VectorPoly, enumerate_basis, from_vec,
                         to_vec)
from snhopf.symmetry import project_equivariant_nu0

from oracles import homological_fd, ladder_solve


class TestApply:
    def test_x0_squared_feeds_nu_shift(self):
        sp = center_space(1, 0, 2)
        f = VectorPoly.single(sp, 0, (2, 0, 0, 0), 1.0)
        img = apply_homological(f, (1.0,))
        assert img.coeffs[0] == {Monomial((1, 0, 0, 1)): 2.0 + 0j}

    def test_x1_squared_diagonal(self):
        sp = center_space(1, 0, 2)
        f = VectorPoly.single(sp, 0, (0, 2, 0, 0), 1.0)
        img = apply_homological(f, (1.0,))
        assert img.coeffs[0] == {Monomial((0, 2, 0, 0)): 2.0j}

    def test_x0x1_in_rotation_row(self):
        sp = center_space(1, 0, 2)
        f = VectorPoly.single(sp, 1, (1, 1, 0, 0), 1.0)
        img = apply_homological(f, (1.0,))
        assert img.coeffs[1] == {Monomial((0, 1, 0, 1)): 1.0 + 0j}

    def test_matches_flow_derivative(self):
        rng = np.random.default_rng(2)
        for (p, s, ell, omegas) in [(1, 0, 2, (1.0,)), (1, 1, 3, (1.3,)),
                                    (2, 0, 2, (1.0, math.sqrt(2.0)))]:
            sp = center_space(p, s, ell)
            basis = enumerate_basis(sp)
            f = from_vec(sp, rng.standard_normal(len(basis))
                         + 1j * rng.standard_normal(len(basis)))
            exact = apply_homological(f, omegas)
            fd = homological_fd(f, omegas)
            assert (exact - fd).norm() <= 1e-6 * max(1.0, exact.norm())


class TestMatrix:
    def test_structure(self):
        hm = homological_matrix(1, 0, 2, (1.0,))
        assert hm.matrix.shape == (30, 30)
        assert hm.max_nnz_per_column() <= 2
        assert hm.numerical_rank() == 26

    def test_nu_squared_column_is_zero(self):
        hm = homological_matrix(1, 0, 2, (1.0,))
        idx = {km: i for i, km in enumerate(enumerate_basis(hm.space))}
        col = hm.matrix[:, idx[(0, Monomial((0, 0, 0, 2)))]]
        assert np.all(col == 0)

    def test_matrix_matches_operator(self):
        rng = np.random.default_rng(9)
        hm = homological_matrix(1, 1, 3, (1.3,))
        basis = enumerate_basis(hm.space)
        f = from_vec(hm.space, rng.standard_normal(len(basis)))
        assert np.allclose(hm.matrix @ to_vec(f),
                           to_vec(apply_homological(f, (1.3,))))


class TestSolve:
    def test_zero(self):
        sp = center_space(1, 0, 2)
        h, resid = solve_homological(VectorPoly.zero(sp), (1.0,))
        assert h.is_zero() and resid == 0.0

    def test_diagonal_inversion(self):
        sp = center_space(1, 0, 2)
        g = VectorPoly.single(sp, 0, (0, 2, 0, 0), 1.0)
        h, resid = solve_homological(g, (1.0,))
        assert resid <= 1e-12
        assert h.coeffs[0][Monomial((0, 2, 0, 0))] == pytest.approx(-0.5j)
        assert (apply_homological(h, (1.0,)) - g).norm() < 1e-12

    def test_shift_inversion(self):
        sp = center_space(1, 0, 2)
        g = VectorPoly.single(sp, 0, (1, 0, 0, 1), 2.0)
        h, resid = solve_homological(g, (1.0,))
        assert (apply_homological(h, (1.0,)) - g).norm() < 1e-12
        assert h.coeffs[0][Monomial((2, 0, 0, 0))] == pytest.approx(1.0)

    def test_rejects_rhs_outside_kernel(self):
        sp = center_space(1, 0, 2)
        g = VectorPoly.single(sp, 0, (2, 0, 0, 0), 1.0)
        with pytest.raises(PreconditionError):
            solve_homological(g, (1.0,))

    def test_roundtrip_and_ladder_oracle(self):
        rng = np.random.default_rng(31)
        for (p, s, ell, omegas) in [(1, 0, 2, (1.0,)), (1, 0, 3, (1.0,)),
                                    (1, 1, 3, (1.3,)),
                                    (2, 0, 2, (1.0, math.sqrt(2.0)))]:
            sp = center_space(p, s, ell)
            basis = enumerate_basis(sp)
            f = from_vec(sp, rng.standard_normal(len(basis))
                         + 1j * rng.standard_normal(len(basis)))
            g = f - project_equivariant_nu0(f)
            h, resid = solve_homological(g, omegas)
            assert resid <= 1e-9
            assert (apply_homological(h, omegas) - g).norm() \
                <= 1e-9 * max(1.0, g.norm())
            # explicit elimination oracle solves the same equation...
            h2 = ladder_solve(g, omegas)
            assert (apply_homological(h2, omegas) - g).norm() \
                <= 1e-9 * max(1.0, g.norm())
            # ...and the production solution has minimal norm
            assert h.norm() <= h2.norm() + 1e-9


class TestSplitting:
    def test_p1_ell2(self):
        rep = verify_splitting(1, 0, 2, (1.0,))
        assert rep.dim_total == 30
        assert rep.dim_equivariant == 4
        assert rep.dim_range == 26
        assert rep.all_ok

    def test_p1_ell3(self):
        rep = verify_splitting(1, 0, 3, (1.0,))
        assert rep.dim_equivariant == 6
        assert rep.dim_total == rep.dim_equivariant + rep.dim_range
        assert rep.all_ok

    def test_parameter_refinement_p1_s1(self):
        rep = verify_splitting(1, 1, 2, (1.0,))
        assert rep.all_ok
        # the two restricted projections target the mu-independent and
        # mu-vanishing equivariant blocks
        assert rep.mu_independent_range_dim == rep.mu_independent_expected
        assert rep.mu_vanishing_range_dim == rep.mu_vanishing_expected
        assert rep.mu_split_preserved
