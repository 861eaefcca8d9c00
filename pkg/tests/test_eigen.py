import numpy as np
import pytest

from numerovcn.eigen import (EigenPair, EigenSolveError, check_proposition1,
                             generalized_eigenvalues, matrix_eigenvalues,
                             pencil_m_matrix, pencil_residual)
from numerovcn.mesh import ReplicationSpec, mesh_from_steps, replicate
from numerovcn.operators import assemble_pencil
from numerovcn.experiments import default_base_mesh

from oracles import (match_multisets, random_mesh_steps, spectrum_by_char_poly,
                     uniform_pencil_eigenvalues)


def test_single_interior_node_closed_form():
    report = generalized_eigenvalues(mesh_from_steps([0.5, 0.5]))
    assert len(report.pairs) == 1
    assert report.pairs[0].lam == pytest.approx(9.6, rel=1e-14)


@pytest.mark.parametrize("j", [2, 4, 8, 16, 32])
def test_uniform_closed_form(j):
    h = 1.0 / j
    report = generalized_eigenvalues(mesh_from_steps([h] * j))
    got = report.eigenvalues
    assert np.all(got.imag == 0.0)
    want = np.sort(uniform_pencil_eigenvalues(j, h))[::-1]
    np.testing.assert_allclose(got.real, want, rtol=1e-10)


def test_char_poly_oracle_equivalence_small_meshes():
    rng = np.random.default_rng(10)
    for _ in range(10):
        j = int(rng.integers(2, 9))
        mesh = mesh_from_steps(random_mesh_steps(rng, j))
        pencil = assemble_pencil(mesh)
        mu_oracle = spectrum_by_char_poly(pencil_m_matrix(pencil))
        lam_oracle = 1.0 / mu_oracle
        lam_qr = generalized_eigenvalues(mesh).eigenvalues
        match_multisets(lam_qr, lam_oracle, rtol=1e-8)


def test_scaling_covariance():
    # shrinking every step by 1/s multiplies each eigenvalue by s^2
    rng = np.random.default_rng(11)
    for s in [2.0, 3.7, 11.0]:
        steps = random_mesh_steps(rng, 9)
        lam = generalized_eigenvalues(mesh_from_steps(steps)).eigenvalues
        lam_scaled = generalized_eigenvalues(mesh_from_steps(steps / s)).eigenvalues
        np.testing.assert_allclose(lam_scaled, lam * s * s, rtol=1e-10)


def test_bundled_base_mesh_spectrum():
    report = generalized_eigenvalues(default_base_mesh())
    lams = report.eigenvalues
    assert len(lams) == 13
    assert abs(lams[0].imag) == 0.0
    assert lams[0].real == pytest.approx(9.91401, rel=1e-3)
    assert lams[1] == pytest.approx(2.57301 + 0.024621j, rel=1e-3)
    assert lams[2] == pytest.approx(np.conj(lams[1]), rel=0, abs=0)
    assert report.n_complex == 2
    assert report.n_real == 11
    # the listed three sit on top; the other ten are real again
    assert np.all(lams[3:].imag == 0.0)


def test_alternate_step_interpretation_does_not_match():
    # dividing the bundled pattern by 1.5 (length 32.67) scales the spectrum
    # by (30/49*1.5)^2 and misses the reference values
    pattern = np.asarray([1, 1, 1, 5, 3, 1, 3, 4, 5, 5, 5, 5, 5, 5], float)
    report = generalized_eigenvalues(mesh_from_steps(pattern / 1.5))
    assert report.eigenvalues[0].real != pytest.approx(9.91401, rel=1e-3)


def test_conjugate_pairing_and_ordering():
    rng = np.random.default_rng(12)
    for _ in range(20):
        mesh = mesh_from_steps(random_mesh_steps(rng, int(rng.integers(4, 16))))
        report = generalized_eigenvalues(mesh)
        lams = report.eigenvalues
        mods = np.abs(lams)
        assert np.all(mods[:-1] >= mods[1:] - 1e-12 * mods[0])
        complex_lams = lams[lams.imag != 0]
        for lam in complex_lams:
            assert np.conj(lam) in complex_lams


def test_vectors_unit_norm_zero_phase_residual():
    report = generalized_eigenvalues(default_base_mesh())
    for pair in report.pairs:
        assert np.linalg.norm(pair.vector) == pytest.approx(1.0, rel=1e-12)
        mags = np.abs(pair.vector)
        first = np.argmax(mags > 1e-8 * mags.max())
        assert pair.vector[first].imag == pytest.approx(0.0, abs=1e-12)
        assert pair.residual < 1e-10


def test_replicated_spectrum_contains_scaled_base():
    rng = np.random.default_rng(13)
    for k in (2, 3):
        for _ in range(3):
            j0 = int(rng.integers(2, 7))
            base = mesh_from_steps(random_mesh_steps(rng, j0))
            lam0 = generalized_eigenvalues(base).eigenvalues
            rep = replicate(ReplicationSpec(base, k))
            lam = generalized_eigenvalues(rep).eigenvalues
            for l0 in lam0:
                target = l0 * k * k
                assert np.min(np.abs(lam - target)) <= 1e-8 * abs(target)


def test_discarded_modes_counted_not_raised():
    # a pencil with a singular B yields an infinite eigenvalue, reported in
    # the discard count
    base = assemble_pencil(mesh_from_steps([1.0, 1.0, 1.0]))
    b_diag = base.b_diag.copy()
    b_lower = base.b_lower.copy()
    b_upper = base.b_upper.copy()
    b_diag[:] = [1.0, 0.0]
    b_lower[:] = 0.0
    b_upper[:] = 0.0
    doctored = type(base)(base.a_lower, base.a_diag, base.a_upper,
                          b_lower, b_diag, b_upper)
    mu = matrix_eigenvalues(pencil_m_matrix(doctored))
    assert np.min(np.abs(mu)) < 1e-14


class TestPencilResidual:
    def test_exact_pair_zero(self):
        mesh = mesh_from_steps([0.5, 0.5])
        assert pencil_residual(mesh, 9.6, np.array([1.0])) <= 1e-15

    def test_perturbed_lambda_visible(self):
        mesh = mesh_from_steps([0.5, 0.5])
        assert pencil_residual(mesh, 9.6 * 1.001, np.array([1.0])) > 1e-5

    def test_zero_vector_rejected(self):
        mesh = mesh_from_steps([0.5, 0.5])
        with pytest.raises(ValueError, match="zero vector"):
            pencil_residual(mesh, 1.0, np.array([0.0]))

    def test_lambda_zero_positive(self):
        rng = np.random.default_rng(14)
        mesh = mesh_from_steps(random_mesh_steps(rng, 6))
        v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert pencil_residual(mesh, 0.0, v) > 0.0

    def test_wrong_length_rejected(self):
        mesh = mesh_from_steps([0.5, 0.5])
        with pytest.raises(ValueError, match="length"):
            pencil_residual(mesh, 1.0, np.ones(3))


class TestProposition1:
    def test_k1_matches_base_residual(self):
        base = default_base_mesh()
        pair = generalized_eigenvalues(base).pairs[1]
        assert check_proposition1(base, pair, 1) <= 10 * max(pair.residual, 1e-15)

    def test_uniform_base_first_mode_k3(self):
        base = mesh_from_steps([0.25] * 4)
        report = generalized_eigenvalues(base)
        pair = report.pairs[-1]  # smallest modulus = first mode
        assert check_proposition1(base, pair, 3) <= 1e-10
        rep_lams = generalized_eigenvalues(replicate(ReplicationSpec(base, 3))).eigenvalues
        target = pair.lam * 9
        assert np.min(np.abs(rep_lams - target)) <= 1e-8 * abs(target)

    def test_bundled_complex_pair_k40(self):
        base = default_base_mesh()
        pair = generalized_eigenvalues(base).pairs[1]
        assert abs(pair.lam.imag) > 0
        assert check_proposition1(base, pair, 40) <= 1e-9

    def test_invalid_k(self):
        base = default_base_mesh()
        pair = generalized_eigenvalues(base).pairs[0]
        with pytest.raises(Exception):
            check_proposition1(base, pair, 0)
