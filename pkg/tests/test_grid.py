import numpy as np
import pytest

from pairtunnel import (ComplexField2D, integrate, make_grid, normalize, overlap,
                        quadrant_powers, symmetry_deviation)
from pairtunnel.grid import anti_transpose, swap_transpose

from conftest import random_field
from oracles import axis_1d, right_half_power_1d


class TestGrid:
    def test_coordinates_and_spacing(self):
        g = make_grid(8, 4.0)
        assert g.dx == 1.0
        assert np.array_equal(g.axis(), np.arange(-4.0, 4.0))
        assert g.axis()[g.n // 2] == 0.0

    def test_default_scale_spacing(self):
        assert make_grid(512, 15.0).dx == 0.05859375

    @pytest.mark.parametrize("n", [7, 9, 4, 2])
    def test_bad_sizes_rejected(self, n):
        with pytest.raises(ValueError):
            make_grid(n, 15.0)

    def test_bad_half_width_rejected(self):
        with pytest.raises(ValueError):
            make_grid(64, -1.0)

    def test_field_shape_checked(self):
        g = make_grid(8, 2.0)
        with pytest.raises(ValueError):
            ComplexField2D(g, np.zeros((8, 9)))


class TestIntegrate:
    def test_constant_field(self):
        g = make_grid(8, 2.0)
        f = ComplexField2D(g, np.ones((8, 8)))
        assert integrate(f) == pytest.approx((2 * g.half_width) ** 2, rel=1e-14)

    def test_normalized_is_one(self, small_grid):
        f = normalize(random_field(small_grid, seed=1))
        assert integrate(f) == pytest.approx(1.0, abs=1e-14)

    def test_zero_field(self, small_grid):
        assert integrate(ComplexField2D(small_grid, np.zeros((64, 64)))) == 0.0


class TestOverlap:
    def test_self_overlap_of_normalized(self, small_grid):
        f = normalize(random_field(small_grid, seed=2))
        assert overlap(f, f) == pytest.approx(1.0, abs=1e-13)

    def test_even_odd_orthogonal(self, small_grid):
        x1, x2 = small_grid.mesh()
        even = ComplexField2D(small_grid, np.exp(-(x1**2 + x2**2)))
        odd = ComplexField2D(small_grid, x1 * np.exp(-(x1**2 + x2**2)))
        assert abs(overlap(even, odd)) < 1e-12

    def test_conjugate_symmetry(self, small_grid):
        f, g = random_field(small_grid, 3), random_field(small_grid, 4)
        assert overlap(f, g) == pytest.approx(np.conj(overlap(g, f)), abs=1e-12)

    def test_grid_mismatch_rejected(self):
        f = random_field(make_grid(16, 2.0), 0)
        g = random_field(make_grid(16, 3.0), 0)
        with pytest.raises(ValueError):
            overlap(f, g)

    def test_linearity_and_cauchy_schwarz(self, small_grid):
        f = random_field(small_grid, 5)
        g = random_field(small_grid, 6)
        h = random_field(small_grid, 7)
        lhs = overlap(f, ComplexField2D(small_grid, 2.0 * g.values + 1j * h.values))
        assert lhs == pytest.approx(2.0 * overlap(f, g) + 1j * overlap(f, h), rel=1e-12)
        assert abs(overlap(f, g)) ** 2 <= integrate(f) * integrate(g) * (1 + 1e-12)


class TestNormalize:
    def test_idempotent(self, small_grid):
        f = normalize(random_field(small_grid, 8))
        again = normalize(f)
        assert np.allclose(again.values, f.values, rtol=1e-14)

    def test_scale_invariance(self, small_grid):
        f = random_field(small_grid, 9)
        scaled = ComplexField2D(small_grid, 3.0 * f.values)
        assert np.allclose(normalize(f).values, normalize(scaled).values, rtol=1e-13)

    def test_zero_field_rejected(self, small_grid):
        with pytest.raises(ValueError):
            normalize(ComplexField2D(small_grid, np.zeros((64, 64))))


class TestQuadrantPowers:
    def test_centered_gaussian_quarters(self, small_grid):
        x1, x2 = small_grid.mesh()
        f = normalize(ComplexField2D(small_grid, np.exp(-(x1**2 + x2**2) / 2.0)))
        q = quadrant_powers(f)
        for val in (q.q_pp, q.q_pm, q.q_mp, q.q_mm):
            assert val == pytest.approx(0.25, abs=1e-12)
        assert q.p_right == pytest.approx(0.5, abs=1e-12)
        assert q.p_pair == pytest.approx(0.5, abs=1e-12)

    def test_offset_gaussian_in_one_quadrant(self):
        g = make_grid(128, 15.0)
        x1, x2 = g.mesh()
        f = normalize(ComplexField2D(g, np.exp(-((x1 - 5) ** 2 + (x2 - 5) ** 2) / 2.0)))
        q = quadrant_powers(f)
        assert q.q_pp > 1 - 1e-9
        assert q.p_right > 1 - 1e-9
        assert q.p_pair > 1 - 1e-9

    def test_product_state_against_1d_oracle(self):
        # p_R = q and p_2 = q^2 + (1-q)^2 for a product of one 1D profile
        g = make_grid(128, 12.0)
        x = g.axis()
        phi = np.exp(-((x - 1.3) ** 2) / 3.0)
        phi /= np.sqrt(np.sum(phi**2) * g.dx)
        q1 = right_half_power_1d(phi, x, g.dx)
        f = ComplexField2D(g, np.outer(phi, phi))
        q = quadrant_powers(f)
        assert q.p_right == pytest.approx(q1, abs=1e-12)
        assert q.p_pair == pytest.approx(q1**2 + (1 - q1) ** 2, abs=1e-12)
        assert q.p_pair >= 0.5  # q^2 + (1-q)^2 >= 1/2 for any split

    def test_quadrants_sum_to_total(self, small_grid):
        f = random_field(small_grid, 10)
        q = quadrant_powers(f)
        total = q.q_pp + q.q_pm + q.q_mp + q.q_mm
        assert total == pytest.approx(integrate(f), rel=1e-13)
        p_left = q.q_mp + q.q_mm
        assert q.p_right + p_left == pytest.approx(integrate(f), rel=1e-13)


class TestSymmetryDeviation:
    def test_symmetric_field_is_zero(self, small_grid):
        f = random_field(small_grid, 11)
        sym = ComplexField2D(small_grid, f.values + f.values.T)
        assert symmetry_deviation(sym) == 0.0

    def test_coordinate_field(self):
        g = make_grid(8, 2.0)
        x1, _ = g.mesh()
        f = ComplexField2D(g, np.broadcast_to(x1, (8, 8)).copy())
        # max|x1 - x2| = 2L - dx, max|x1| = L
        assert symmetry_deviation(f) == pytest.approx((2 * 2.0 - g.dx) / 2.0, rel=1e-14)

    def test_symmetrized_field(self, small_grid):
        f = random_field(small_grid, 12)
        sym = ComplexField2D(small_grid, 0.5 * (f.values + f.values.T))
        assert symmetry_deviation(sym) == 0.0

    def test_zero_field_convention(self, small_grid):
        assert symmetry_deviation(ComplexField2D(small_grid, np.zeros((64, 64)))) == 0.0


class TestReflections:
    def test_swap_is_involution(self, small_grid):
        v = random_field(small_grid, 13).values
        assert np.array_equal(swap_transpose(swap_transpose(v)), v)

    def test_anti_transpose_is_involution(self, small_grid):
        v = random_field(small_grid, 14).values
        assert np.array_equal(anti_transpose(anti_transpose(v)), v)

    def test_anti_transpose_maps_coordinates(self):
        g = make_grid(8, 4.0)
        x1, x2 = g.mesh()
        v = (10.0 * x1 + x2) * 1.0  # encodes the coordinates
        av = anti_transpose(v)
        x = g.axis()
        # interior point: psi'(x1, x2) = psi(-x2, -x1)
        i, j = 2, 5
        assert av[i, j] == 10.0 * (-x[j]) + (-x[i])
