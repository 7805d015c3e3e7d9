"""Tests for the star-graph spectral module.

Oracles used here and nowhere inside the implementation under test:
  * dense symmetric generalized eigensolve of the pencil (Q, M),
  * direct evaluation of the secular function at candidate eigenvalues,
  * central finite differences of the forward map.
"""

import numpy as np
import pytest
import scipy.linalg

from starspec.errors import DegenerateSpectrumError, ValidationError
from starspec.graph import (
    StarWeights,
    TargetSpectrum,
    default_poles,
    forward_spectrum,
    jacobian_fd,
    jacobian_phi,
    laplacian_pair,
    normalize_for_construction,
    prescribe_weights,
    scale_weights,
    secular_values,
)

W2 = StarWeights(theta=1.5, theta_i=(0.5,), mu=(1.0, 0.25))
W3 = StarWeights(theta=16 / 9, theta_i=(5 / 18, 4 / 9), mu=(1.0, 5 / 27, 4 / 27))


def dense_pencil_eigs(w):
    """Oracle: eigenvalues of Q f = lam M f via scipy's dense solver."""
    Q, M = laplacian_pair(w)
    return np.sort(scipy.linalg.eigh(Q, M, eigvals_only=True))


class TestLaplacianPair:
    def test_single_vertex(self):
        Q, M = laplacian_pair(StarWeights(theta=2.0, theta_i=(), mu=(1.0,)))
        assert Q == pytest.approx(np.array([[2.0]]))
        assert M == pytest.approx(np.array([[1.0]]))

    def test_two_vertices(self):
        Q, M = laplacian_pair(W2)
        assert Q == pytest.approx(np.array([[2.0, -0.5], [-0.5, 0.5]]))
        assert M == pytest.approx(np.diag([1.0, 0.25]))

    def test_scaling_is_entrywise(self):
        Q, M = laplacian_pair(W2)
        Q2, M2 = laplacian_pair(scale_weights(W2, 2.0))
        assert Q2 == pytest.approx(2.0 * Q)
        assert M2 == pytest.approx(2.0 * M)

    @pytest.mark.parametrize(
        "bad",
        [
            dict(theta=-1.0, theta_i=(), mu=(1.0,)),
            dict(theta=1.0, theta_i=(0.0,), mu=(1.0, 1.0)),
            dict(theta=1.0, theta_i=(1.0,), mu=(1.0, -2.0)),
            dict(theta=1.0, theta_i=(1.0, 1.0), mu=(1.0, 1.0)),
        ],
    )
    def test_invalid_weights_rejected(self, bad):
        with pytest.raises(ValidationError):
            StarWeights(**bad)


class TestForwardSpectrum:
    def test_single_vertex(self):
        w = StarWeights(theta=2.0, theta_i=(), mu=(1.0,))
        assert forward_spectrum(w) == pytest.approx([2.0])

    def test_two_vertex_example(self):
        # pencil has trace 4 and determinant 3 in the mu-weighted basis
        lam = forward_spectrum(W2)
        assert lam == pytest.approx([1.0, 3.0], rel=1e-12)
        assert lam == pytest.approx(dense_pencil_eigs(W2), rel=1e-12)

    def test_three_vertex_example(self):
        lam = forward_spectrum(W3)
        # oracle: the secular function equals 1 at each claimed eigenvalue
        assert secular_values(W3, [1.0, 2.0, 4.0]) == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)
        assert lam == pytest.approx([1.0, 2.0, 4.0], rel=1e-12)

    def test_matches_dense_oracle_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 8))
            w = StarWeights(
                theta=float(rng.uniform(0.1, 10)),
                theta_i=tuple(rng.uniform(0.1, 10, size=n - 1)),
                mu=tuple(rng.uniform(0.1, 10, size=n)),
            )
            assert forward_spectrum(w) == pytest.approx(dense_pencil_eigs(w), rel=1e-9)

    def test_coincident_poles_fall_back_to_dense(self):
        # equal b_i = theta_i/mu_i on both spokes
        w = StarWeights(theta=1.0, theta_i=(2.0, 2.0), mu=(1.0, 1.0, 1.0))
        assert forward_spectrum(w) == pytest.approx(dense_pencil_eigs(w), rel=1e-10)

    def test_interlacing_with_poles(self):
        lam = forward_spectrum(W3)
        b = np.sort(W3.poles)
        assert 0 < lam[0] < b[0] < lam[1] < b[1] < lam[2]


class TestPrescribeWeights:
    def test_single_target(self):
        w = prescribe_weights([2.0])
        assert w.theta == pytest.approx(2.0)
        assert w.mu == (1.0,)

    def test_two_targets_hand_residues(self):
        w = prescribe_weights([1.0, 3.0], poles=[2.0])
        assert w.theta == pytest.approx(1.5)
        assert w.theta_i[0] == pytest.approx(0.5)
        assert w.mu[1] == pytest.approx(0.25)

    def test_three_targets_hand_residues(self):
        w = prescribe_weights([1.0, 2.0, 4.0], poles=[1.5, 3.0])
        assert w.theta == pytest.approx(16 / 9, rel=1e-14)
        assert w.theta_i == pytest.approx((5 / 18, 4 / 9), rel=1e-14)
        assert w.mu == pytest.approx((1.0, 5 / 27, 4 / 27), rel=1e-14)

    def test_round_trip_random_targets(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            a = np.sort(rng.uniform(0.1, 100.0, size=n))
            while n > 1 and np.min(np.diff(a)) < 1e-3 * a[-1]:
                a = np.sort(rng.uniform(0.1, 100.0, size=n))
            lam = forward_spectrum(prescribe_weights(a))
            assert lam == pytest.approx(a, rel=1e-10)

    def test_round_trip_with_custom_poles(self):
        a = np.array([0.5, 2.0, 5.0, 9.0])
        b = np.array([1.0, 3.0, 7.0])
        lam = forward_spectrum(prescribe_weights(a, poles=b))
        assert lam == pytest.approx(a, rel=1e-10)

    def test_default_poles_interlace(self):
        a = [0.3, 1.7, 8.0, 50.0]
        b = default_poles(a)
        assert np.all(a[:-1] < b) and np.all(b < a[1:])

    def test_interlacing_violation_rejected(self):
        with pytest.raises(ValidationError):
            prescribe_weights([1.0, 3.0], poles=[3.5])
        with pytest.raises(ValidationError):
            prescribe_weights([1.0, 2.0, 3.0], poles=[1.5, 1.6])

    def test_non_increasing_targets_rejected(self):
        with pytest.raises(ValidationError):
            TargetSpectrum((1.0, 1.0))
        with pytest.raises(ValidationError):
            prescribe_weights([2.0, 1.0])


class TestScaleAndNormalize:
    def test_scale_identity(self):
        assert scale_weights(W2, 1.0) == W2

    def test_scale_simple(self):
        w = scale_weights(StarWeights(theta=2.0, theta_i=(), mu=(1.0,)), 3.0)
        assert w.theta == pytest.approx(6.0)
        assert w.mu[0] == pytest.approx(3.0)
        assert forward_spectrum(w) == pytest.approx([2.0])

    def test_scale_invariance_of_spectrum(self):
        lam0 = forward_spectrum(W2)
        for t in (8.0, 0.03, 17.9):
            assert forward_spectrum(scale_weights(W2, t)) == pytest.approx(lam0, rel=1e-12)

    def test_scale_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            scale_weights(W2, 0.0)

    def test_normalize_single_vertex(self):
        w = normalize_for_construction(StarWeights(theta=2.0, theta_i=(), mu=(1.0,)))
        assert w.mu[0] == pytest.approx(2.0)
        assert w.theta == pytest.approx(4.0)

    def test_normalize_two_vertex(self):
        # t* = max(3/1, 2/(1/4)) = 8
        w = normalize_for_construction(W2)
        assert w.mu == pytest.approx((8.0, 2.0))
        assert w.theta == pytest.approx(12.0)
        assert w.theta_i[0] == pytest.approx(4.0)
        assert forward_spectrum(w) == pytest.approx([1.0, 3.0], rel=1e-12)

    def test_normalize_already_normalized(self):
        w = StarWeights(theta=1.0, theta_i=(1.0,), mu=(5.0, 3.0))
        assert normalize_for_construction(w) == w


class TestSecularIdentity:
    def test_equals_one_at_eigenvalues(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            a = np.sort(rng.uniform(0.5, 50.0, size=n))
            if np.min(np.diff(a)) < 1e-2:
                continue
            w = prescribe_weights(a)
            lam = forward_spectrum(w)
            assert secular_values(w, lam) == pytest.approx(np.ones(n), abs=1e-10)

    def test_scale_invariant(self):
        lam = forward_spectrum(W3)
        for t in (2.0, 100.0):
            assert secular_values(scale_weights(W3, t), lam) == pytest.approx(
                np.ones(3), abs=1e-12
            )


class TestJacobian:
    def test_single_vertex_closed_form(self):
        w = StarWeights(theta=2.0, theta_i=(), mu=(1.0,))
        J, smin = jacobian_phi(w)
        assert J == pytest.approx(np.array([[1.0, -2.0]]))
        assert smin > 1e-8

    def test_matches_finite_differences(self):
        for w in (W2, W3, normalize_for_construction(W2)):
            J, _ = jacobian_phi(w)
            J_fd = jacobian_fd(w, rel_step=1e-6)
            scale = np.max(np.abs(J))
            assert np.max(np.abs(J - J_fd)) <= 1e-5 * scale

    def test_rows_annihilate_parameter_vector(self):
        # lambda_k is invariant under joint scaling of all 2N parameters,
        # so each Jacobian row is orthogonal to the parameter vector
        for w in (W2, W3):
            J, _ = jacobian_phi(w)
            p = np.concatenate([[w.theta], w.theta_i, w.mu])
            assert J @ p == pytest.approx(np.zeros(w.n), abs=1e-10)

    def test_submersion_at_random_prescribed_points(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            a = np.sort(rng.uniform(0.5, 30.0, size=n))
            if n > 1 and np.min(np.diff(a)) < 0.05:
                continue
            _, smin = jacobian_phi(prescribe_weights(a))
            assert smin > 1e-8

    def test_degenerate_spectrum_raises(self):
        # three identical spokes carry two antisymmetric modes pinned at the
        # common pole b = theta_i/mu_i, a genuine double eigenvalue
        w = StarWeights(theta=1.0, theta_i=(1.0, 1.0, 1.0), mu=(1.0, 1.0, 1.0, 1.0))
        lam = forward_spectrum(w)
        assert np.min(np.diff(lam)) < 1e-8 * lam[-1]
        with pytest.raises(DegenerateSpectrumError):
            jacobian_phi(w)


class TestSerialization:
    def test_dict_round_trip(self):
        d = W3.to_dict()
        assert set(d) == {"theta", "theta_i", "mu"}
        assert StarWeights.from_dict(d) == W3

    def test_missing_key_rejected(self):
        with pytest.raises(ValidationError):
            StarWeights.from_dict({"theta": 1.0})
