import math

import numpy as np
import pytest

from phaselag import linalg
from phaselag.model import PhaseLagModel
from phaselag.operator import energy_terms
from phaselag.radial import RadialGrid, assemble_transmission, radial_laplacian, refine


def lap_error(R0, R, h, region, bc, f, lap_f):
    g = RadialGrid(R0, R, h)
    sl = g.index(region)
    r = g.nodes[sl]
    D = radial_laplacian(g, region, bc)
    return np.abs(D @ f(r) - lap_f(r)).max()


class TestGrid:
    def test_weights_sum_to_disc_area(self):
        for h in (1 / 16, 1 / 64, 1 / 256):
            g = RadialGrid(0.5, 1.0, h)
            assert abs(g.weights.sum() - math.pi) < 1e-12
            assert abs(g.weights[g.index("annulus")].sum() - math.pi * 0.75) < 1e-12

    def test_refine(self):
        g = RadialGrid(0.5, 1.0, 1 / 32)
        f = refine(g)
        assert f.h == 1 / 64 and f.n_cells == 2 * g.n_cells
        assert abs(f.weights.sum() - math.pi) < 1e-12

    def test_nodes_avoid_origin(self):
        g = RadialGrid(0.25, 1.0, 1 / 8)
        assert g.nodes[0] == pytest.approx(1 / 16)
        assert list(g.region[:2]) == ["elastic", "elastic"]
        assert g.region[-1] == "thermoelastic"

    @pytest.mark.parametrize("args", [(0.5, 1.0, 0.3), (0.0, 1.0, 0.1), (1.0, 1.0, 0.1), (0.5, 1.0, 0.0)])
    def test_rejects_bad_grids(self, args):
        with pytest.raises(ValueError):
            RadialGrid(*args)


class TestLaplacian:
    def test_quadratic_exact(self):
        g = RadialGrid(0.5, 1.0, 1 / 64)
        D = radial_laplacian(g, "full", ("neumann", "dirichlet"))
        lap = D @ g.nodes ** 2
        # every row not touching the Dirichlet face, including the row next to r = 0
        assert np.abs(lap[:-1] - 4.0).max() < 1e-10

    def test_constant_in_interior(self):
        g = RadialGrid(0.5, 1.0, 1 / 32)
        D = radial_laplacian(g, "full", ("neumann", "dirichlet"))
        lap = D @ np.ones(g.n_cells)
        assert np.abs(lap[:-1]).max() < 1e-9
        # boundary row sees the ghost value -1 beyond r = R
        r, h = g.nodes[-1], g.h
        assert lap[-1] == pytest.approx(-2 * g.R / (r * h * h), rel=1e-12)

    def test_second_order_full(self):
        a = math.pi / 2
        f = lambda r: np.cos(a * r)
        lap = lambda r: -a * a * np.cos(a * r) - a * np.sin(a * r) / r
        errs = [lap_error(0.5, 1.0, h, "full", ("neumann", "dirichlet"), f, lap)
                for h in (1 / 32, 1 / 64, 1 / 128)]
        orders = [math.log2(e1 / e2) for e1, e2 in zip(errs, errs[1:])]
        assert all(1.9 <= p <= 2.1 for p in orders), orders

    def test_second_order_annulus(self):
        f = lambda r: np.sin(2 * math.pi * (r - 0.5))
        lap = lambda r: (-(2 * math.pi) ** 2 * np.sin(2 * math.pi * (r - 0.5))
                         + 2 * math.pi * np.cos(2 * math.pi * (r - 0.5)) / r)
        errs = [lap_error(0.5, 1.0, h, "annulus", ("dirichlet", "dirichlet"), f, lap)
                for h in (1 / 32, 1 / 64, 1 / 128)]
        orders = [math.log2(e1 / e2) for e1, e2 in zip(errs, errs[1:])]
        assert all(1.9 <= p <= 2.1 for p in orders), orders

    @pytest.mark.parametrize("region,bc", [("full", ("neumann", "dirichlet")),
                                           ("annulus", ("dirichlet", "dirichlet")),
                                           ("disc", ("neumann", "neumann"))])
    def test_weighted_symmetry(self, region, bc):
        g = RadialGrid(0.5, 1.0, 1 / 64)
        D = radial_laplacian(g, region, bc)
        WD = g.weights[g.index(region)][:, None] * D
        assert np.abs(WD - WD.T).max() <= 1e-12 * np.abs(WD).max()

    def test_rejects_unknown_bc(self):
        with pytest.raises(ValueError):
            radial_laplacian(RadialGrid(0.5, 1.0, 0.125), "full", ("robin", "dirichlet"))


class TestTransmission:
    def test_layout_and_gram(self, case2_op, case2_grid):
        n_cells, n_ann = case2_grid.n_cells, case2_grid.n_annulus
        assert case2_op.dim == 2 * n_cells + 2 * n_ann
        idx = np.concatenate([case2_op.layout[k] for k in ("v", "u", "z", "w", "theta0", "theta1")])
        assert np.array_equal(np.sort(idx), np.arange(case2_op.dim))
        assert np.linalg.eigvalsh(case2_op.G.matrix).min() > 0

    def test_energy_identity_is_exact_algebra(self, case2_op):
        rng = np.random.default_rng(0)
        G, A = case2_op.G.matrix, case2_op.A
        for _ in range(10):
            x = rng.standard_normal(case2_op.dim) + 1j * rng.standard_normal(case2_op.dim)
            dE = np.vdot(x, G @ A @ x).real
            _, d1, d2 = energy_terms(case2_op, x)
            assert abs(dE - (d1 + d2)) <= 1e-12 * np.abs(G @ A).max() * np.vdot(x, x).real

    def test_decoupled_spectrum(self):
        m = PhaseLagModel((1.0,), (1.0,), kappa1=1.0, kappa2=1.0, beta=0.0)
        op = assemble_transmission(m, RadialGrid(0.5, 1.0, 1 / 32))
        ev = linalg.eigenvalues(op.A)
        scale = linalg.weighted_norm(op.A, op.G)
        on_axis = np.abs(ev.real) <= 1e-8 * scale
        neg_real = (np.abs(ev.imag) <= 1e-8 * scale) & (ev.real < 0)
        assert np.all(on_axis | neg_real)

    def test_plate_part_conservative_without_coupling(self):
        m = PhaseLagModel((1.0, 0.5), (1.0, 0.25), kappa1=1.0, kappa2=2.0, beta=0.0)
        op = assemble_transmission(m, RadialGrid(0.5, 1.0, 1 / 32))
        rng = np.random.default_rng(3)
        plate = np.concatenate([op.layout[k] for k in ("v", "u", "z", "w")])
        GA = op.G.matrix @ op.A
        for _ in range(1000):
            x = np.zeros(op.dim, dtype=complex)
            x[plate] = rng.standard_normal(plate.size) + 1j * rng.standard_normal(plate.size)
            assert np.vdot(x, GA @ x).real <= 1e-10 * np.vdot(x, x).real * np.abs(GA).max()

    def test_shifted_operator_dissipative(self, case2_op):
        c0 = max(0.0, linalg.numerical_abscissa(case2_op.A, case2_op.G))
        w = linalg.numerical_abscissa(case2_op.shifted(2 * c0), case2_op.G)
        assert w <= 1e-12 * linalg.weighted_norm(case2_op.A, case2_op.G)

    def test_slowest_cluster_refines(self, case2_model, case2_op, case2_grid):
        fine = assemble_transmission(case2_model, refine(case2_grid))
        near = [ev[np.argmin(np.abs(ev))] for ev in
                (linalg.eigenvalues(case2_op.A), linalg.eigenvalues(fine.A))]
        assert float(f"{near[0].real:.2g}") == float(f"{near[1].real:.2g}")

    def test_too_coarse(self, case2_model):
        with pytest.raises(ValueError, match="too coarse"):
            assemble_transmission(case2_model, RadialGrid(0.5, 1.0, 0.25))

    def test_literal_variant_changes_last_row_only(self, case2_model, case2_grid):
        fixed = assemble_transmission(case2_model, case2_grid)
        literal = assemble_transmission(case2_model, case2_grid, paper_literal=True)
        rows = np.flatnonzero(np.any(fixed.A != literal.A, axis=1))
        assert set(rows) <= set(fixed.layout["theta1"])
