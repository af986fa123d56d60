import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from test_linalg import match_multisets
from phaselag import linalg
from phaselag.model import Interval, PhaseLagModel, Rectangle
from phaselag.modal import (DirichletMode, assemble_block, assemble_blocks, assemble_full,
                            dirichlet_eigenvalues, direct_sum)
from phaselag.operator import energy_terms

PI2 = math.pi ** 2


def heat_roots(a, b, d):
    """Roots of s * sum a_j s^j + d * sum b_j s^j by an extended-precision root finder."""
    n = len(a) - 1
    coeffs = [0.0] * (n + 2)  # ascending powers
    for j in range(n + 1):
        coeffs[j + 1] += a[j]
        coeffs[j] += d * b[j]
    mpmath.mp.dps = 40
    roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=100)
    return np.array([complex(r) for r in roots])


class TestDirichletEigenvalues:
    def test_unit_square(self):
        d = [m.d for m in dirichlet_eigenvalues(Rectangle(1, 1), 3)]
        assert np.allclose(d, [2 * PI2, 5 * PI2, 5 * PI2], rtol=1e-15)
        assert abs(d[0] - 19.7392088) < 1e-6 and abs(d[1] - 49.3480220) < 1e-6

    def test_interval(self):
        d = [m.d for m in dirichlet_eigenvalues(Interval(math.pi), 2)]
        assert np.allclose(d, [1.0, 4.0], rtol=1e-15)

    def test_rectangle_aspect(self):
        assert abs(dirichlet_eigenvalues(Rectangle(1, 2), 1)[0].d - 1.25 * PI2) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.integers(1, 150))
    def test_rectangle_matches_brute_enumeration(self, L1, L2, K):
        got = [m.d for m in dirichlet_eigenvalues(Rectangle(L1, L2), K)]
        M = 4 * K
        brute = sorted(PI2 * (i * i / L1 ** 2 + j * j / L2 ** 2)
                       for i in range(1, M) for j in range(1, M))[:K]
        assert np.allclose(got, brute, rtol=1e-14)
        assert all(x <= y for x, y in zip(got, got[1:]))

    def test_rejects_bad_cutoff(self):
        with pytest.raises(ValueError):
            dirichlet_eigenvalues(Interval(1.0), 0)


class TestBlock:
    def test_decoupled_scalar_heat(self):
        m = PhaseLagModel((1.0,), (1.0,), kappa1=1.0, beta=0.0)
        blk = assemble_block(m, DirichletMode((1,), 4.0))
        assert match_multisets(linalg.eigenvalues(blk.A), [4j, -4j, -4.0]) < 1e-12
        assert np.allclose(blk.G.matrix, np.diag([16.0, 1.0, 1.0]))

    def test_decoupled_first_order_heat_quadratic(self):
        m = PhaseLagModel((1.0, 0.5), (1.0, 0.25), kappa1=1.0, beta=0.0)
        blk = assemble_block(m, DirichletMode((1,), 1.0))
        disc = 1.25 ** 2 - 4 * 0.5 * 1.0
        q = [(-1.25 + np.sqrt(complex(disc))) / 1.0, (-1.25 - np.sqrt(complex(disc))) / 1.0]
        ev = linalg.eigenvalues(blk.A)
        assert match_multisets(ev, [1j, -1j] + q) < 1e-12
        assert np.allclose(blk.G.matrix[2:, 2:], [[2.0, 0.5], [0.5, 0.25]], rtol=0, atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 3), st.floats(0.5, 20.0), st.floats(0.3, 3.0), st.integers(0, 10 ** 6))
    def test_decoupled_spectrum_closed_form(self, n, d, k1, seed):
        rng = np.random.default_rng(seed)
        a = tuple(rng.uniform(0.3, 2.0, n + 1))
        b = tuple(rng.uniform(0.3, 2.0, n + 1))
        blk = assemble_block(PhaseLagModel(a, b, kappa1=k1, beta=0.0), DirichletMode((1,), d))
        expected = np.concatenate([[1j * math.sqrt(k1) * d, -1j * math.sqrt(k1) * d],
                                   heat_roots(a, b, d)])
        assert match_multisets(linalg.eigenvalues(blk.A), expected) < 1e-10 * max(1.0, d)

    def test_gram_positive_definite(self, case1_model):
        for d in (1e-3, 1.0, 1e4):
            blk = assemble_block(case1_model, DirichletMode((1,), d))
            assert np.linalg.eigvalsh(blk.G.matrix).min() > 0

    @pytest.mark.parametrize("d", [2 * PI2, 50.0, 3000.0])
    def test_energy_identity_is_exact_algebra(self, case1_model, d):
        blk = assemble_block(case1_model, DirichletMode((1,), d))
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(blk.dim) + 1j * rng.standard_normal(blk.dim)
            dE = np.vdot(x, blk.G.matrix @ blk.A @ x).real
            _, d1, d2 = energy_terms(blk, x)
            assert abs(dE - (d1 + d2)) <= 1e-12 * blk.G.norm(x) ** 2 * d

    def test_literal_generator_differs_only_in_last_row(self, case1_model):
        mode = DirichletMode((1, 1), 2 * PI2)
        fixed = assemble_block(case1_model, mode)
        literal = assemble_block(case1_model, mode, paper_literal=True)
        diff = fixed.A - literal.A
        assert np.all(diff[:-1] == 0)
        # a_0 moves from Theta_1 to Theta_0 in the last row
        assert diff[-1, 2] == pytest.approx(case1_model.a[0] / case1_model.a[1])
        assert diff[-1, 3] == pytest.approx(-case1_model.a[0] / case1_model.a[1])

    def test_shift_moves_spectrum(self, case1_model):
        blk = assemble_block(case1_model, DirichletMode((1,), 7.0))
        ev = linalg.eigenvalues(blk.A)
        assert match_multisets(linalg.eigenvalues(blk.shifted(0.6)), ev - 0.6) < 1e-12

    def test_shifted_block_dissipative(self, case1_blocks):
        rng = np.random.default_rng(1)
        for blk in list(case1_blocks)[:: 20]:
            c0 = max(0.0, linalg.numerical_abscissa(blk.A, blk.G))
            B = blk.shifted(2 * c0)
            X = rng.standard_normal((1000, blk.dim)) + 1j * rng.standard_normal((1000, blk.dim))
            G = blk.G.matrix
            num = np.einsum("ki,ij,kj->k", X.conj(), G @ B, X).real
            den = np.einsum("ki,ij,kj->k", X.conj(), G, X).real
            assert np.all(num <= 1e-12 * np.abs(B).max() * den)


class TestAssembly:
    def test_single_block(self, case1_model):
        full = assemble_full(case1_model, Rectangle(1, 1), 1)
        blk = assemble_blocks(case1_model, Rectangle(1, 1), 1)[0]
        assert np.array_equal(full.A, blk.A) and np.array_equal(full.G.matrix, blk.G.matrix)

    def test_spectrum_is_union(self):
        m = PhaseLagModel((1.0,), (1.0,), beta=0.7)
        bs = assemble_blocks(m, Rectangle(1, 1), 3)
        full = direct_sum(bs)
        union = np.concatenate([linalg.eigenvalues(b.A) for b in bs])
        assert match_multisets(linalg.eigenvalues(full.A), union) < 1e-9

    def test_resolvent_is_max_over_blocks(self, case1_model):
        bs = assemble_blocks(case1_model, Rectangle(1, 1), 5)
        full = direct_sum(bs)
        per = max(linalg.weighted_resolvent_norm(b.A, b.G, 3j) for b in bs)
        whole = linalg.weighted_resolvent_norm(full.A, full.G, 3j)
        assert abs(per - whole) <= 1e-10 * whole

    def test_full_cutoff_limit(self, case1_model):
        with pytest.raises(ValueError):
            assemble_full(case1_model, Rectangle(1, 1), 201)

    def test_layout_concatenates(self, case1_model):
        full = assemble_full(case1_model, Rectangle(1, 1), 4)
        assert list(full.layout["u"]) == [0, 4, 8, 12]
        assert list(full.layout["theta1"]) == [3, 7, 11, 15]
