import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mzi_twophase.errors import SingularFisherError, StructuralError
from mzi_twophase.fisher import (
    FisherMatrix,
    crb,
    crb_linear_combination,
    crb_noise_only,
    crb_pseudo,
    crb_total_closed_form,
    fim_exact,
    fim_exact_at,
    fim_noise_asymptotic,
    fim_noise_symmetric,
    fim_signal_asymptotic,
    fim_signal_symmetric,
    fim_total_asymptotic,
    pseudo_inverse,
    score,
)
from mzi_twophase.gaussian import make_probe
from mzi_twophase.homodyne import LoSetting, output_distribution, resolve_lo
from mzi_twophase.interferometer import PhasePair

# exact information at the fig2 operating point, frozen from oracles.fim_fd
FIG2_F_SS = 111.47287443512856
FIG2_F_DD = 142.61437672830814


def test_no_probe_no_information():
    f = fim_exact_at(PhasePair(0.7, 1.1), make_probe(0, 0, 0), 0.3, 0.4)
    assert np.allclose(f.matrix, 0.0, atol=1e-14)


def test_fig2_exact_information(fig2_probe, truth):
    f = fim_exact(truth, fig2_probe, LoSetting.tuned(0.25))
    assert f.kind == "exact"
    assert f.matrix[0, 0] == pytest.approx(FIG2_F_SS, rel=1e-8)
    assert f.matrix[1, 1] == pytest.approx(FIG2_F_DD, rel=1e-8)
    assert abs(f.matrix[0, 1]) < 1e-9
    assert np.allclose(f.signal.matrix + f.noise.matrix, f.matrix)
    # within O(1/N_s) of the asymptotic diag(98, 140)
    assert f.matrix[0, 0] / 98 - 1 < 2 / 7 and f.matrix[1, 1] / 140 - 1 < 1 / 7
    assert f.is_psd()


def test_matches_finite_difference_oracle():
    phases, probe = PhasePair(-0.4, 2.0), make_probe(1.2, 2.1, 0.9)
    t = (0.5, -1.1)
    f = fim_exact_at(phases, probe, *t).matrix
    ref = oracles.fim_fd(phases.as_array(), 1.2, 2.1, 0.9, *t)
    assert np.abs(f - ref).max() < 1e-6 * np.abs(ref).max()


@given(st.floats(-3, 3), st.floats(0.1, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0.05, 1.5))
def test_exact_information_is_symmetric_psd(s, d, a1, a2, r):
    probe = make_probe(a1, a2, r)
    f = fim_exact(PhasePair(s, d), probe, LoSetting.tuned(0.25)).matrix
    assert f[0, 1] == f[1, 0]
    assert np.linalg.eigvalsh(f).min() > -1e-9 * max(1.0, np.trace(f))


def test_score_has_zero_mean(fig2_probe, truth):
    t = resolve_lo(LoSetting.tuned(), truth, fig2_probe)
    dist = output_distribution(truth, fig2_probe, *t)
    x = np.random.default_rng(7).multivariate_normal(dist.mu, dist.sigma, size=10**5)
    sc = score(truth, fig2_probe, *t, x)
    se = sc.std(axis=0, ddof=1) / np.sqrt(len(sc))
    assert np.all(np.abs(sc.mean(axis=0)) < 4 * se)


class TestAsymptoticForms:
    def test_signal_fig2(self):
        f = fim_signal_asymptotic(0.0, 7, 10, 0.25, 0.25, 1.1).matrix
        assert np.allclose(f, [[0, 0], [0, 140]])

    def test_signal_beta_one_resolves_phi_s(self):
        f = fim_signal_asymptotic(1.0, 7, 10, 0.25, 0.25, 0.4).matrix
        assert f[0, 0] > 0 and f[0, 1] == 0 and f[1, 1] == 0

    def test_signal_symmetric_collapse(self):
        general = fim_signal_asymptotic(0.5, 7, 10, 0.25, 0.25, 0.3).matrix
        assert np.allclose(general, 70 * np.ones((2, 2)))
        assert np.allclose(general, fim_signal_symmetric(0.5, 7, 10, 0.25).matrix)
        vals, vecs = np.linalg.eigh(general)
        assert abs(abs(vecs[:, 1] @ [1, 1]) / np.sqrt(2) - 1) < 1e-12

    @given(st.floats(0, 1), st.floats(0.01, 2))
    def test_signal_rank_one(self, beta, k):
        f = fim_signal_asymptotic(beta, 12, 9, k, k, 0.7).matrix
        vals, vecs = np.linalg.eigh(f)
        assert abs(vals[0]) < 1e-12 * vals[1]
        assert abs(vecs[:, 0] @ [np.sqrt(beta), np.sqrt(1 - beta)]) < 1e-9

    def test_noise_symmetric(self):
        f = fim_noise_asymptotic(7, 0.25, 0.25, 1.1).matrix
        assert f[0, 0] == pytest.approx(98)
        assert f[0, 1] == 0
        assert np.allclose(fim_noise_symmetric(7, 0.25).matrix, [[98, 0], [0, 0]])

    def test_noise_vanishes_at_zero_offset(self):
        f = fim_noise_asymptotic(50, 0.0, 0.0, 0.9).matrix
        assert f[0, 0] == 0 and f[0, 1] == 0

    def test_general_k_noise_against_exact(self):
        n_s, k1, k2, phi_d = 1e3, 0.3, 0.1, 0.8
        probe = make_probe(0.0, np.sqrt(n_s), np.arcsinh(np.sqrt(n_s)))
        exact = fim_exact(PhasePair(0.5, phi_d), probe, LoSetting.tuned(k1, k2)).noise.matrix
        asym = fim_noise_asymptotic(n_s, k1, k2, phi_d).matrix
        rel = np.abs(asym - exact) / np.abs(exact)
        assert np.all(rel < 0.05)

    def test_total_fig2(self):
        assert np.allclose(fim_total_asymptotic(0.0, 7, 10, 0.25).matrix, np.diag([98, 140]))

    def test_total_trace_inverse_minimal_at_beta_zero(self):
        grid = np.linspace(0, 0.9, 10)
        traces = [np.trace(np.linalg.inv(fim_total_asymptotic(b, 7, 10, 0.25).matrix)) for b in grid]
        assert int(np.argmin(traces)) == 0

    @given(st.floats(0.0, 0.95), st.floats(0.05, 1.0))
    def test_total_bounds_match_closed_form(self, beta, k):
        f = fim_total_asymptotic(beta, 7, 10, k)
        r = crb(f, 2000)
        s, d = crb_total_closed_form(beta, 7, 10, k, 2000)
        assert r.var_phi_s == pytest.approx(s, rel=1e-9)
        assert r.var_phi_d == pytest.approx(d, rel=1e-9)


class TestBounds:
    def test_fig2_variances(self):
        r = crb(np.diag([98.0, 140.0]), 2000)
        assert r.var_phi_s == pytest.approx(5.102e-6, rel=1e-3)
        assert r.var_phi_d == pytest.approx(3.571e-6, rel=1e-3)
        assert r.std_phi_s == pytest.approx(0.002258769757263128, rel=1e-12)
        assert r.std_phi_d == pytest.approx(0.001889822365046136, rel=1e-12)

    def test_identity(self):
        r = crb(FisherMatrix(np.eye(2), "exact"), 1)
        assert (r.var_phi_s, r.var_phi_d) == (1.0, 1.0)

    def test_singular_matrix_rejected(self):
        with pytest.raises(SingularFisherError, match="crb_pseudo"):
            crb(fim_signal_symmetric(0.3, 7, 10, 0.25), 10)

    def test_nu_validation(self):
        with pytest.raises(ValueError):
            crb(np.eye(2), 0)
        with pytest.raises(ValueError):
            crb(np.eye(2), 2.5)

    def test_noise_only_reduces_to_symmetric_form(self):
        k, n_s, nu = 0.25, 7.0, 100
        var_s, _ = crb_noise_only(n_s, k, k + 1e-7, 0.9, nu)
        assert var_s == pytest.approx((16 * k**2 + 1) ** 2 / (128 * n_s**2 * k**2 * nu), rel=1e-5)

    @pytest.mark.parametrize("beta", [0.0, 0.36, 0.5, 0.9])
    def test_pseudo_inverse_linear_combination(self, beta):
        f = fim_signal_symmetric(beta, 7, 10, 0.25)
        w = (np.sqrt(beta), np.sqrt(1 - beta))
        expected = crb_linear_combination(7, 10, 0.25, 300)
        assert crb_pseudo(f, w, 300) == pytest.approx(expected, rel=1e-10)
        assert expected == pytest.approx(2 / (4 * 70 * 300))

    def test_pseudo_inverse_phi_d_at_beta_zero(self):
        f = fim_signal_symmetric(0.0, 7, 10, 0.25)
        assert crb_pseudo(f, (0, 1), 2000) == pytest.approx(crb(np.diag([98, 140]), 2000).var_phi_d)

    def test_pseudo_equals_inverse_for_full_rank(self):
        f = np.array([[3.0, 0.4], [0.4, 2.0]])
        assert crb_pseudo(f, (1, 0), 7) == pytest.approx(crb(f, 7).var_phi_s, rel=1e-12)

    def test_non_identifiable_combination(self):
        f = fim_signal_symmetric(0.36, 7, 10, 0.25)
        with pytest.raises(SingularFisherError, match="not identifiable"):
            crb_pseudo(f, (1, 0), 10)
        with pytest.raises(SingularFisherError):
            crb_pseudo(np.zeros((2, 2)), (1, 0), 10)
        with pytest.raises(StructuralError):
            crb_pseudo(f, (0, 0), 10)

    def test_pseudo_inverse_kernel(self):
        plus, kernel = pseudo_inverse(fim_signal_symmetric(0.5, 7, 10, 0.25))
        assert kernel.shape == (2, 1)
        assert np.allclose(np.abs(kernel[:, 0]), [1 / np.sqrt(2)] * 2)
        assert np.allclose(plus @ kernel, 0)
