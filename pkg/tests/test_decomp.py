import numpy as np
import pytest

from mmconc.algebra import FMatrix, Scalar, realify_comps
from mmconc.decomp import (
    dist_to_scaled_stiefel,
    gram_eigvals_batched,
    grassmann_dist,
    hermitian_eig,
    hopf_dist,
    orthonormalize,
    polar,
    polar_q_batched,
    singular_values,
    singular_values_batched,
    svd,
)
from mmconc.errors import NotHermitianError, ShapeMismatchError

FIELDS = (("R", 1), ("C", 2), ("H", 4))


def rand_matrix(rng, field, d, N, n):
    comps = np.zeros((N, n, 4))
    comps[..., :d] = rng.standard_normal((N, n, d))
    return FMatrix(field, comps)


def diag_fmatrix(field, vals, N):
    n = len(vals)
    comps = np.zeros((N, n, 4))
    comps[np.arange(n), np.arange(n), 0] = vals
    return FMatrix(field, comps)


class TestHermitianEig:
    def test_reconstruction_all_fields(self):
        rng = np.random.default_rng(0)
        for field, d in FIELDS:
            A = rand_matrix(rng, field, d, 6, 6)
            H = A + A.adjoint()
            P, sig = hermitian_eig(H)
            rec = P @ diag_fmatrix(field, sig, 6) @ P.adjoint()
            assert rec.allclose(H, 1e-9)
            eye = FMatrix.identity(field, 6)
            assert (P.adjoint() @ P).allclose(eye, 1e-9)
            assert np.all(np.diff(sig) <= 1e-12)  # non-increasing

    def test_matches_realified_spectrum(self):
        rng = np.random.default_rng(1)
        A = rand_matrix(rng, "H", 4, 5, 5)
        H = A + A.adjoint()
        _, sig = hermitian_eig(H)
        w = np.linalg.eigvalsh(realify_comps(H.comps, "H"))[::-1]
        # Quadruple degeneracy in the realified picture.
        np.testing.assert_allclose(np.repeat(sig, 4), w, atol=1e-9)

    def test_degenerate_spectrum(self):
        H = FMatrix.identity("C", 4)
        P, sig = hermitian_eig(H)
        np.testing.assert_allclose(sig, np.ones(4), atol=1e-12)
        assert (P.adjoint() @ P).allclose(FMatrix.identity("C", 4), 1e-10)

    def test_rejects_non_hermitian(self):
        rng = np.random.default_rng(2)
        A = rand_matrix(rng, "R", 1, 4, 4)
        with pytest.raises(NotHermitianError):
            hermitian_eig(A + A)

    def test_rejects_non_square(self):
        with pytest.raises(ShapeMismatchError):
            hermitian_eig(FMatrix("R", np.zeros((3, 2, 4))))


class TestSvdPolar:
    def test_reconstruction_and_frames(self):
        rng = np.random.default_rng(3)
        for field, d in FIELDS:
            for _ in range(10):
                N = int(rng.integers(2, 12))
                n = int(rng.integers(1, min(N, 5) + 1))
                Z = rand_matrix(rng, field, d, N, n)
                t = svd(Z)
                rec = t.u @ diag_fmatrix(field, t.lam, N) @ t.v.adjoint()
                assert rec.allclose(Z, 1e-8 * max(1.0, Z.norm))
                assert (t.u.adjoint() @ t.u).allclose(FMatrix.identity(field, N), 1e-8)
                assert (t.v.adjoint() @ t.v).allclose(FMatrix.identity(field, n), 1e-8)
                p = polar(Z)
                assert (p.q @ p.h).allclose(Z, 1e-8 * max(1.0, Z.norm))
                assert (p.q.adjoint() @ p.q).allclose(FMatrix.identity(field, n), 1e-8)

    def test_singular_values_match_gram(self):
        rng = np.random.default_rng(4)
        for field, d in FIELDS:
            Z = rand_matrix(rng, field, d, 9, 4)
            lam = singular_values(Z)
            G = realify_comps((Z.adjoint() @ Z).comps, field)
            w = np.sqrt(np.clip(np.linalg.eigvalsh(G), 0.0, None))[::-1]
            np.testing.assert_allclose(np.repeat(lam, d), w, atol=1e-9)

    def test_rank_deficient_polar_is_frame(self):
        rng = np.random.default_rng(5)
        for field, d in FIELDS:
            comps = np.zeros((8, 3, 4))
            comps[..., :d] = rng.standard_normal((8, 3, d))
            comps[:, 2, :] = comps[:, 0, :]  # exactly dependent columns
            Z = FMatrix(field, comps)
            p = polar(Z)
            dev = (p.q.adjoint() @ p.q - FMatrix.identity(field, 3)).norm
            assert dev < 1e-8
            assert (p.q @ p.h).allclose(Z, 1e-8 * max(1.0, Z.norm))

    def test_polar_of_frame_is_identity_factor(self):
        from mmconc.sampling import SamplerConfig, sample_haar_stiefel

        for field in ("R", "C", "H"):
            cfg = SamplerConfig(field, 7, 3, scaled=False, seed=9, count=1)
            Q = sample_haar_stiefel(cfg)[0]
            p = polar(Q)
            assert p.q.allclose(Q, 1e-9)
            assert p.h.allclose(FMatrix.identity(field, 3), 1e-9)

    def test_wide_matrix_rejected(self):
        with pytest.raises(ShapeMismatchError):
            svd(FMatrix("R", np.zeros((2, 3, 4))))


class TestOrthonormalize:
    def test_right_module_linearity(self):
        # Over H, Gram-Schmidt must put coefficients on the right: the
        # span of {b} as a right module contains b*s for any scalar s.
        rng = np.random.default_rng(6)
        b = rng.standard_normal((5, 4))
        b /= np.sqrt(np.sum(b**2))
        from mmconc.algebra import comp_mul

        s = np.array([0.3, -1.2, 0.5, 0.9])
        cand = comp_mul(b, s)  # b * s, right multiple
        got = orthonormalize("H", [cand], base=[b])
        assert got == []  # fully rejected: no new direction

    def test_completion(self):
        rng = np.random.default_rng(7)
        cols = [rng.standard_normal((6, 4)) for _ in range(2)]
        out = orthonormalize("H", cols)
        assert len(out) == 2
        from mmconc.algebra import column_inner

        assert np.abs(column_inner(out[0], out[1])).max() < 1e-12


class TestDistances:
    def test_dist_to_scaled_stiefel_consistency(self):
        rng = np.random.default_rng(8)
        for field, d in FIELDS:
            Z = rand_matrix(rng, field, d, 10, 3)
            r = 2.5
            closed = dist_to_scaled_stiefel(Z, r)
            direct = (Z - polar(Z).q.scale(r)).norm
            assert closed == pytest.approx(direct, abs=1e-9)

    def test_nearest_frame_optimality(self):
        rng = np.random.default_rng(9)
        from mmconc.sampling import SamplerConfig, sample_haar_stiefel

        for field, d in FIELDS:
            Z = rand_matrix(rng, field, d, 8, 2)
            r = 3.0
            best = dist_to_scaled_stiefel(Z, r)
            cfg = SamplerConfig(field, 8, 2, scaled=False, seed=13, count=50)
            for Q in sample_haar_stiefel(cfg):
                assert best <= (Z - Q.scale(r)).norm + 1e-9

    def test_quotient_distances_beat_search(self):
        rng = np.random.default_rng(10)
        for field, d in FIELDS:
            Z = rand_matrix(rng, field, d, 6, 2)
            W = rand_matrix(rng, field, d, 6, 2)
            g = grassmann_dist(Z, W)
            h = hopf_dist(Z, W)
            assert g <= (Z - W).norm + 1e-12
            assert h <= (Z - W).norm + 1e-12
            # Right-unitary search can only stay above the closed form.
            from mmconc.sampling import SamplerConfig, sample_haar_stiefel

            cfg = SamplerConfig(field, 2, 2, scaled=False, seed=17, count=200)
            for U in sample_haar_stiefel(cfg):
                assert g <= (Z - W @ U).norm + 1e-9
            # Unit-scalar search for the Hopf distance.
            for _ in range(200):
                s = rng.standard_normal(4)
                s[d:] = 0.0
                s /= np.sqrt(np.sum(s**2))
                t = Scalar(field, s)
                assert h <= (Z.scalar_left(t) - W).norm + 1e-9

    def test_quotient_invariances(self):
        rng = np.random.default_rng(11)
        from mmconc.sampling import SamplerConfig, sample_haar_stiefel

        field, d = "C", 2
        Z = rand_matrix(rng, field, d, 6, 2)
        W = rand_matrix(rng, field, d, 6, 2)
        U = sample_haar_stiefel(SamplerConfig(field, 2, 2, scaled=False, seed=19, count=1))[0]
        assert grassmann_dist(Z @ U, W) == pytest.approx(grassmann_dist(Z, W), abs=1e-9)
        t = Scalar.of(field, np.cos(0.7), np.sin(0.7))
        assert hopf_dist(Z.scalar_left(t), W) == pytest.approx(hopf_dist(Z, W), abs=1e-9)

    def test_zero_distance_on_same_orbit(self):
        rng = np.random.default_rng(12)
        Z = rand_matrix(rng, "H", 4, 5, 2)
        from mmconc.sampling import SamplerConfig, sample_haar_stiefel

        U = sample_haar_stiefel(SamplerConfig("H", 2, 2, scaled=False, seed=23, count=1))[0]
        assert grassmann_dist(Z, Z @ U) == pytest.approx(0.0, abs=1e-6)
        s = Scalar.of("H", 0.5, 0.5, 0.5, 0.5)
        assert hopf_dist(Z, Z.scalar_left(s)) == pytest.approx(0.0, abs=1e-6)


class TestBatchedKernels:
    def test_batched_matches_scalar(self):
        rng = np.random.default_rng(13)
        for field, d in FIELDS:
            comps = np.zeros((6, 7, 3, 4))
            comps[..., :d] = rng.standard_normal((6, 7, 3, d))
            lam_b = singular_values_batched(comps, field)
            q_b, lam_min = polar_q_batched(comps, field)
            for i in range(6):
                Z = FMatrix(field, comps[i])
                lam_s = singular_values(Z)
                np.testing.assert_allclose(lam_b[i], lam_s, atol=1e-8)
                assert lam_min[i] == pytest.approx(lam_s[-1], abs=1e-8)
                np.testing.assert_allclose(q_b[i], polar(Z).q.comps, atol=1e-8)

    def test_batched_n1(self):
        rng = np.random.default_rng(14)
        comps = np.zeros((5, 9, 1, 4))
        comps[..., :2] = rng.standard_normal((5, 9, 1, 2))
        q, lam = polar_q_batched(comps, "C")
        norms = np.sqrt(np.sum(q**2, axis=(-3, -2, -1)))
        np.testing.assert_allclose(norms, np.ones(5), atol=1e-12)
        np.testing.assert_allclose(
            lam, np.sqrt(np.sum(comps**2, axis=(-3, -2, -1))), atol=1e-12
        )

    def test_gram_eigvals_ascending(self):
        rng = np.random.default_rng(15)
        comps = np.zeros((4, 6, 3, 4))
        comps[..., :4] = rng.standard_normal((4, 6, 3, 4))
        w = gram_eigvals_batched(comps, "H")
        assert w.shape == (4, 3)
        assert np.all(np.diff(w, axis=-1) >= -1e-12)
