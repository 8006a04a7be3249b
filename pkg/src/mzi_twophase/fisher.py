"""
Fisher information of the homodyne outcome distribution and Cramer-Rao bounds.

Matrices are expressed in the ``(phi_s, phi_d)`` basis. The information of a
Gaussian model splits into a *signal* part driven by ``d mu`` and a *noise*
part driven by ``d Sigma``::

    F_mn = dmu_m^T Sigma^-1 dmu_n + 1/2 tr(Sigma^-1 dSigma_m Sigma^-1 dSigma_n)

Besides the exact matrix, the large-``N_s`` forms under LO tuning
``theta_i = gamma_i1 + pi/2 + k_i/N_s`` are provided for general ``k_1, k_2``
and for the symmetric case ``k_1 = k_2 = k``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SingularFisherError, StructuralError
from .homodyne import moment_derivatives, output_distribution, resolve_lo

#: Relative eigenvalue cutoff used to decide the rank of a Fisher matrix.
PSEUDO_RANK_TOL = 1e-9

#: Largest condition number accepted by :func:`crb`.
MAX_CONDITION = 1e12

KINDS = (
    "exact",
    "signal_exact",
    "noise_exact",
    "signal_asymptotic",
    "noise_asymptotic",
    "total_asymptotic",
)


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """Symmetric 2x2 information matrix in the ``(phi_s, phi_d)`` basis.

    ``fim_exact`` fills ``signal`` and ``noise`` with the two contributions
    whose sum is ``matrix``.
    """

    matrix: np.ndarray
    kind: str
    signal: Optional["FisherMatrix"] = field(default=None, repr=False)
    noise: Optional["FisherMatrix"] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Fisher matrix kind {self.kind!r}")
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise StructuralError(f"Fisher matrix must be 2x2, got {m.shape}")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def is_psd(self, rtol=1e-8):
        lo = np.linalg.eigvalsh(self.matrix)[0]
        return lo >= -rtol * max(np.trace(self.matrix), 0.0)


@dataclass(frozen=True)
class CrbReport:
    """Per-parameter variance bounds for ``nu`` repetitions."""

    var_phi_s: float
    var_phi_d: float
    nu: int
    linear_combo_variance: Optional[float] = None
    weights: Optional[tuple] = None

    @property
    def std_phi_s(self):
        return float(np.sqrt(self.var_phi_s))

    @property
    def std_phi_d(self):
        return float(np.sqrt(self.var_phi_d))


def fisher_from_moments(precision, dmu, dsigma):
    """Signal and noise information from ``Sigma^-1`` and the moment derivatives."""
    prec = precision
    signal = np.einsum("mi,ij,nj->mn", dmu, prec, dmu)
    ps = np.einsum("ij,mjk->mik", prec, dsigma)
    noise = 0.5 * np.einsum("mij,nji->mn", ps, ps)
    return signal, noise


def fim_exact(phases, probe, lo):
    """Exact information of the homodyne outcomes at ``phases``.

    The LO angles are resolved at the operating point and then frozen: they
    are instrument settings, not functions of the unknown phases.
    """
    theta1, theta2 = resolve_lo(lo, phases, probe)
    return fim_exact_at(phases, probe, theta1, theta2)


def fim_exact_at(phases, probe, theta1, theta2):
    """:func:`fim_exact` for explicit LO angles."""
    dist = output_distribution(phases, probe, theta1, theta2)
    dmu, dsigma = moment_derivatives(phases, probe, theta1, theta2)
    signal, noise = fisher_from_moments(dist.precision, dmu, dsigma)
    return FisherMatrix(
        signal + noise,
        "exact",
        signal=FisherMatrix(signal, "signal_exact"),
        noise=FisherMatrix(noise, "noise_exact"),
    )


def score(phases, probe, theta1, theta2, x):
    """Gradient of ``log p(x | phi)`` with respect to ``(phi_s, phi_d)``.

    ``x`` has shape ``(..., 2)``; the result has shape ``(..., 2)``.
    """
    dist = output_distribution(phases, probe, theta1, theta2)
    dmu, dsigma = moment_derivatives(phases, probe, theta1, theta2)
    prec = dist.precision
    dev = np.asarray(x, dtype=float) - dist.mu
    w = dev @ prec
    lin = w @ dmu.T
    trace = np.einsum("ij,mji->m", prec, dsigma)
    quad = np.einsum("...i,mij,...j->...m", w, dsigma, w)
    return lin - 0.5 * trace + 0.5 * quad


def _general_k_denominator(k1, k2, phi_d):
    c = np.cos(phi_d)
    return 4 * c * ((k1 - k2) ** 2 * c + 2 * (k1**2 - k2**2)) + 4 * (k1 + k2) ** 2 + 1


def fim_signal_asymptotic(beta, n_s, n_c, k1, k2, phi_d):
    """Leading-order signal information under LO tuning (general ``k_1, k_2``).

    ``N_c1 = beta N_c`` enters the first port. For ``k_1 = k_2`` the result
    does not depend on ``phi_d`` and has rank one.
    """
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    n1, n2 = beta * n_c, (1 - beta) * n_c
    cross = np.sqrt(n1 * n2)
    m = 4 * n_s / _general_k_denominator(k1, k2, phi_d) * np.array([[n1, cross], [cross, n2]])
    return FisherMatrix(m, "signal_asymptotic")


def fim_noise_asymptotic(n_s, k1, k2, phi_d):
    """Noise information under LO tuning, leading term of each entry.

    ``F_ss`` is kept to ``O(N_s^2)`` and ``F_sd``, ``F_dd`` to ``O(N_s)``.
    Subleading constants are not available in closed form.
    """
    c = np.cos(phi_d)
    dk, sk = k1 - k2, k1 + k2
    den = 4 * dk * c * (dk * c + 2 * sk) + 4 * sk**2 + 1
    ss = 32 * n_s**2 * (dk * c + sk) ** 2 / den**2
    sd = (
        2
        * n_s
        * dk
        * (
            (15 * k1**2 + 18 * k1 * k2 + 15 * k2**2 - 1) * np.sin(phi_d)
            + 12 * (k1**2 - k2**2) * np.sin(2 * phi_d)
            + dk**2 * np.sin(3 * phi_d)
        )
        / den**2
    )
    dd = n_s / _noise_dd_denominator(k1, k2, phi_d)
    return FisherMatrix(np.array([[ss, sd], [sd, dd]]), "noise_asymptotic")


def _noise_dd_denominator(k1, k2, phi_d):
    return (
        1
        + 6 * k1**2
        + 6 * k2**2
        + 4 * k1 * k2
        + 8 * (k1**2 - k2**2) * np.cos(phi_d)
        + 2 * (k1 - k2) ** 2 * np.cos(2 * phi_d)
    )


def fim_noise_symmetric(n_s, k):
    """``k_1 = k_2 = k`` noise information kept to ``O(N_s^2)``: ``diag(128 N_s^2 k^2/(16k^2+1)^2, 0)``."""
    g = 16 * k**2 + 1
    return FisherMatrix(np.diag([128 * n_s**2 * k**2 / g**2, 0.0]), "noise_asymptotic")


def fim_signal_symmetric(beta, n_s, n_c, k):
    """``k_1 = k_2 = k`` signal information, ``4 N_s N_c/(16k^2+1) v v^T`` with ``v = (sqrt(beta), sqrt(1-beta))``."""
    v = np.array([np.sqrt(beta), np.sqrt(1 - beta)])
    return FisherMatrix(4 * n_s * n_c / (16 * k**2 + 1) * np.outer(v, v), "signal_asymptotic")


def fim_total_asymptotic(beta, n_s, n_c, k):
    """Signal plus noise information for ``k_1 = k_2 = k``; diagonal at ``beta = 0``."""
    g = 16 * k**2 + 1
    off = np.sqrt(beta * (1 - beta))
    m = 4 * n_s * n_c / g * np.array(
        [[beta + 32 * n_s * k**2 / (n_c * g), off], [off, 1 - beta]]
    )
    return FisherMatrix(m, "total_asymptotic")


def crb(f, nu):
    """Per-parameter Cramer-Rao bounds ``diag(F^-1)/nu``.

    Raises
    ------
    SingularFisherError
        If ``F`` is singular or its condition number exceeds 1e12; use
        :func:`crb_pseudo` for identifiable combinations instead.
    """
    m = np.asarray(f, dtype=float)
    _check_nu(nu)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularFisherError(
            f"Fisher matrix is singular or ill-conditioned (cond = {cond:.3e}); "
            "use crb_pseudo for a linear combination of the phases"
        )
    inv = np.linalg.inv(m)
    return CrbReport(var_phi_s=inv[0, 0] / nu, var_phi_d=inv[1, 1] / nu, nu=int(nu))


def pseudo_inverse(f, rtol=PSEUDO_RANK_TOL):
    """Moore-Penrose inverse through the eigendecomposition ``F = V D V^T``.

    Returns ``(F_plus, kernel)`` where ``kernel`` holds the eigenvectors whose
    eigenvalue falls below ``rtol * trace(F)``.
    """
    m = np.asarray(f, dtype=float)
    vals, vecs = np.linalg.eigh(m)
    cutoff = rtol * max(np.trace(m), 0.0)
    keep = vals > cutoff
    inv_vals = np.zeros_like(vals)
    inv_vals[keep] = 1.0 / vals[keep]
    return (vecs * inv_vals) @ vecs.T, vecs[:, ~keep]


def crb_pseudo(f, weights, nu, rtol=PSEUDO_RANK_TOL):
    """Bound on ``Phi = w_s phi_s + w_d phi_d``: ``w F^+ w^T / nu``.

    Raises
    ------
    SingularFisherError
        If the weights are not linearly independent of the kernel of ``F``,
        so ``Phi`` is not identifiable.
    """
    _check_nu(nu)
    w = np.asarray(weights, dtype=float)
    if w.shape != (2,) or not np.any(w):
        raise StructuralError(f"weights must be a nonzero 2-vector, got {weights!r}")
    plus, kernel = pseudo_inverse(f, rtol)
    if kernel.shape[1] == 2:
        raise SingularFisherError("Fisher matrix carries no information")
    if kernel.shape[1]:
        # Phi is identifiable only if w has no component along the kernel
        leak = np.abs(kernel.T @ w).max() / np.linalg.norm(w)
        if leak > np.sqrt(rtol):
            raise SingularFisherError(
                f"weights {tuple(w)} overlap the Fisher kernel {tuple(kernel[:, 0])}; "
                "the combination is not identifiable"
            )
    return float(w @ plus @ w) / nu


def crb_total_closed_form(beta, n_s, n_c, k, nu):
    """Closed-form ``(var phi_s, var phi_d)`` from the symmetric total information."""
    g = 16 * k**2 + 1
    var_s = g**2 / (128 * n_s**2 * k**2)
    var_d = g * (16 * k**2 * (beta * n_c + 2 * n_s) + beta * n_c) / (
        128 * n_c * n_s**2 * (1 - beta) * k**2
    )
    return var_s / nu, var_d / nu


def crb_linear_combination(n_s, n_c, k, nu):
    """Signal-only bound ``(16k^2+1)/(4 N_s N_c nu)`` on ``sqrt(beta) phi_s + sqrt(1-beta) phi_d``."""
    return (16 * k**2 + 1) / (4 * n_s * n_c * nu)


def crb_noise_only(n_s, k1, k2, phi_d, nu):
    """``diag((F^N)^-1)/nu`` from the general-``k`` noise information."""
    m = fim_noise_asymptotic(n_s, k1, k2, phi_d).matrix
    det = m[0, 0] * m[1, 1] - m[0, 1] ** 2
    return m[1, 1] / det / nu, m[0, 0] / det / nu


def _check_nu(nu):
    if int(nu) != nu or nu < 1:
        raise ValueError(f"nu must be a positive integer, got {nu!r}")
