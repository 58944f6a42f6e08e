import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmkl.errors import NumericalError
from cmkl.numerics import (
    as_symmetric,
    generalized_eig,
    inv_sqrt_psd,
    nonneg_qp,
    numerical_rank,
    ridge_inverse,
    trace_norm,
)
from conftest import make_psd


class TestAsSymmetric:
    def test_accepts_and_symmetrizes(self):
        a = np.array([[1.0, 2.0], [2.0 + 1e-14, 3.0]])
        out = as_symmetric(a)
        assert np.array_equal(out, out.T)

    def test_rejects_asymmetric(self):
        with pytest.raises(NumericalError, match="not symmetric"):
            as_symmetric(np.array([[1.0, 2.0], [2.1, 3.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(NumericalError, match="square"):
            as_symmetric(np.zeros((2, 3)))


class TestGeneralizedEig:
    def test_identity_rhs_reduces_to_standard_eig(self):
        pair = generalized_eig(np.diag([2.0, 1.0]), np.eye(2), k=2)
        assert np.allclose(pair.values, [2.0, 1.0])
        assert np.allclose(np.abs(pair.vectors), np.eye(2))

    def test_equal_pencil_gives_unit_eigenvalues(self, rng):
        h = make_psd(rng, 5) + np.eye(5)
        pair = generalized_eig(h, h, k=5)
        assert np.allclose(pair.values, 1.0, atol=1e-10)

    def test_against_rayleigh_grid_oracle(self):
        # Oracle: scan the H-unit sphere w(theta) = (cos t, sin t / 2) on a fine
        # angular grid and maximize w' G w; closed form root of the pencil's
        # characteristic polynomial 4 l^2 - 15 l + 8 = 0 agrees to 2e-11.
        g = np.array([[3.0, 1.0], [1.0, 3.0]])
        h = np.diag([1.0, 4.0])
        pair = generalized_eig(g, h, k=1)
        assert pair.values[0] == pytest.approx(3.1061072252245134, rel=1e-10)
        theta = np.linspace(0, np.pi, 400_001)
        w = np.stack([np.cos(theta), np.sin(theta) / 2.0])
        grid_best = np.einsum("it,ij,jt->t", w, g, w).max()
        assert pair.values[0] == pytest.approx(grid_best, rel=1e-6)

    def test_h_orthonormality_and_residual(self, rng):
        g = make_psd(rng, 8)
        h = make_psd(rng, 8) + 0.5 * np.eye(8)
        pair = generalized_eig(g, h, k=8)
        gram = pair.vectors.T @ h @ pair.vectors
        assert np.max(np.abs(gram - np.eye(8))) < 1e-8
        for lam, v in zip(pair.values, pair.vectors.T):
            resid = g @ v - lam * h @ v
            assert np.linalg.norm(resid) <= 1e-6 * max(1.0, np.linalg.norm(g @ v))

    def test_sign_convention_first_entry_positive(self, rng):
        g = make_psd(rng, 6)
        h = make_psd(rng, 6) + np.eye(6)
        pair = generalized_eig(g, h, k=6)
        for v in pair.vectors.T:
            lead = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
            assert v[lead] > 0

    def test_k_out_of_range(self):
        with pytest.raises(NumericalError, match="k=3"):
            generalized_eig(np.eye(2), np.eye(2), k=3)

    def test_indefinite_rhs_names_matrix(self):
        g = np.eye(2)
        h = np.diag([1.0, -1.0])
        with pytest.raises(NumericalError, match="denominator pencil"):
            generalized_eig(g, h, k=1, h_name="denominator pencil")

    def test_singular_psd_rhs_recovered_by_jitter(self, rng):
        # rank-deficient PSD right-hand side is accepted via the one-shot jitter
        h = make_psd(rng, 6, rank=5)
        g = make_psd(rng, 6)
        pair = generalized_eig(g, h, k=3)
        assert np.all(np.isfinite(pair.values))


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(3)) == pytest.approx(3.0)

    def test_diag_absolute_values(self):
        assert trace_norm(np.diag([2.0, -2.0])) == pytest.approx(4.0)

    def test_shear_against_gram_eig_oracle(self):
        # Oracle: singular values are sqrt eigenvalues of A'A = [[1,1],[1,2]],
        # i.e. (3 +- sqrt 5)/2; their square roots sum to sqrt 5.
        a = np.array([[1.0, 1.0], [0.0, 1.0]])
        oracle = float(np.sqrt(np.linalg.eigvalsh(a.T @ a)).sum())
        assert oracle == pytest.approx(np.sqrt(5.0), rel=1e-12)
        assert trace_norm(a) == pytest.approx(2.23606797749979, rel=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(NumericalError, match="non-finite"):
            trace_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))

    @settings(deadline=None, max_examples=25)
    @given(
        seed=st.integers(0, 2**32 - 1),
        c=st.floats(-5, 5, allow_nan=False),
    )
    def test_transpose_and_scaling(self, seed, c):
        a = np.random.default_rng(seed).standard_normal((4, 3))
        assert trace_norm(a) == pytest.approx(trace_norm(a.T), rel=1e-10)
        assert trace_norm(c * a) == pytest.approx(abs(c) * trace_norm(a), abs=1e-9)


class TestRidgeInverse:
    def test_pseudo_inverse_of_singular_diag(self):
        out = ridge_inverse(np.diag([2.0, 0.0]), ridge=0.0, tol=1e-10)
        assert np.allclose(out, np.diag([0.5, 0.0]))

    def test_ridged_identity(self):
        out = ridge_inverse(np.eye(2), ridge=1.0)
        assert np.allclose(out, 0.5 * np.eye(2))

    def test_multiply_back(self, rng):
        a = make_psd(rng, 4)
        out = ridge_inverse(a, ridge=0.1)
        assert np.max(np.abs(out @ (a + 0.1 * np.eye(4)) - np.eye(4))) < 1e-8

    def test_negative_ridge_rejected(self):
        with pytest.raises(NumericalError, match="non-negative"):
            ridge_inverse(np.eye(2), ridge=-1.0)


class TestInvSqrtPsd:
    def test_whitens_full_rank(self, rng):
        a = make_psd(rng, 5) + np.eye(5)
        r = inv_sqrt_psd(a)
        assert np.max(np.abs(r @ a @ r - np.eye(5))) < 1e-9

    def test_rank_deficient_whitens_range_only(self, rng):
        a = make_psd(rng, 6, rank=3)
        r = inv_sqrt_psd(a)
        w = np.linalg.eigvalsh(r @ a @ r)
        assert np.sum(w > 0.5) == 3
        assert np.all((np.abs(w) < 1e-9) | (np.abs(w - 1) < 1e-9))


def _grid_min_2d(m, a, hi=5.0, step=1e-3):
    """Brute-force objective minimum of v'Mv - 2v'a over [0, hi]^2."""
    v1 = np.arange(0.0, hi + step, step)
    best = np.inf
    quad_diag = m[1, 1] * v1**2 - 2 * a[1] * v1  # reused per row as the v2 axis
    for x in v1:
        row = m[0, 0] * x * x - 2 * a[0] * x + 2 * m[0, 1] * x * v1 + quad_diag
        best = min(best, row.min())
    return best


def _objective(m, a, v):
    return float(v @ m @ v - 2 * v @ a)


class TestNonnegQp:
    def test_separable_clamps_negative(self):
        v = nonneg_qp(np.eye(2), np.array([1.0, -1.0]))
        assert np.allclose(v, [1.0, 0.0], atol=1e-10)

    def test_rank_one_mass_on_largest_coordinate(self):
        # objective (v1+v2)^2 - 2(3 v1 + v2): all mass on coordinate 1, s* = 3
        a_p = np.array([1.0, 1.0])
        m = np.outer(a_p, a_p)
        a = np.array([3.0, 1.0])
        v = nonneg_qp(m, a)
        assert np.allclose(v, [3.0, 0.0], atol=1e-8)
        grid = _grid_min_2d(m, a)
        assert _objective(m, a, v) <= grid + 1e-9
        assert abs(_objective(m, a, v) - grid) < 1e-3

    def test_random_psd_matches_two_stage_grid(self):
        rng = np.random.default_rng(7)
        m = make_psd(rng, 3) + 0.5 * np.eye(3)
        a = rng.standard_normal(3) + 1.0
        v = nonneg_qp(m, a)
        obj = _objective(m, a, v)
        # two-stage brute-force grid: coarse sweep then local refinement
        axis = np.linspace(0.0, 3.0, 61)
        pts = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        vals = np.einsum("pi,ij,pj->p", pts, m, pts) - 2 * pts @ a
        center = pts[vals.argmin()]
        step = axis[1] - axis[0]
        fine = [np.clip(np.linspace(c - step, c + step, 81), 0.0, None) for c in center]
        pts = np.stack(np.meshgrid(*fine, indexing="ij"), axis=-1).reshape(-1, 3)
        vals = np.einsum("pi,ij,pj->p", pts, m, pts) - 2 * pts @ a
        grid = vals.min()
        assert obj <= grid + 1e-9
        assert abs(obj - grid) < 1e-3

    def test_proportional_case_returns_min_norm_direction(self):
        # degenerate optimum face: solver settles on the minimum-norm point,
        # which is proportional to a_p
        a_p = np.array([1.0, 2.0, 2.0])
        m = np.outer(a_p, a_p)
        v = nonneg_qp(m, 3.0 * a_p)
        assert np.allclose(v / np.linalg.norm(v), a_p / np.linalg.norm(a_p), atol=1e-9)

    def test_unbounded_ray_detected(self):
        with pytest.raises(NumericalError, match="unbounded"):
            nonneg_qp(np.diag([1.0, 0.0]), np.array([1.0, 1.0]))

    def test_zero_matrix_nonpositive_gain(self):
        v = nonneg_qp(np.zeros((2, 2)), np.array([-1.0, 0.0]))
        assert np.allclose(v, 0.0)

    @settings(deadline=None, max_examples=40)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_kkt_conditions(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        m = make_psd(rng, n) + 0.1 * np.eye(n)
        a = rng.standard_normal(n)
        v = nonneg_qp(m, a)
        g = 2 * m @ v - 2 * a
        assert np.all(v >= 0)
        assert np.all(g[v == 0] >= -1e-8)
        assert np.all(np.abs(g[v > 0]) <= 1e-8)


class TestNumericalRank:
    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((3, 3))) == 0

    def test_outer_product(self, rng):
        u = rng.standard_normal(5)
        assert numerical_rank(np.outer(u, u)) == 1

    def test_projected_gram_bounded_by_columns(self, rng):
        # sandwich of a centered Gram by a 5-column projection has rank <= 5
        x = rng.standard_normal((30, 8))
        k = x @ x.T
        k = k - k.mean(0) - k.mean(1)[:, None] + k.mean()
        a = rng.standard_normal((30, 5))
        assert numerical_rank(k @ a @ a.T @ k) <= 5
