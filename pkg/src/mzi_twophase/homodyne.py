"""
Joint distribution of the two homodyne outcomes at the interferometer output.

Two independent routes produce ``(mu, Sigma)``:

* :func:`output_distribution` evaluates the closed forms in terms of
  ``p_ij`` and ``gamma_ij``;
* :func:`output_distribution_propagated` pushes the probe moments through
  the MZI and a diagonal local-oscillator rotation ``diag(e^{-i theta})``
  and reads the ``q`` marginal.

They must agree; tests check this to 1e-10.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IndeterminatePhaseError, StructuralError
from .gaussian import apply_network
from .interferometer import decompose, mzi_unitary, mzi_unitary_derivatives

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class LoSetting:
    """Local oscillator phases, either given explicitly or tuned to the true phases.

    Tuned mode places ``theta_i = gamma_i1 + pi/2 + k_i / N_s``, i.e. a
    small offset from the minimum-variance quadrature. The tuning uses the
    true interferometer phases (oracle tuning); no acquisition step for
    ``gamma_i1`` is modelled.
    """

    mode: str = "tuned"
    theta1: float = 0.0
    theta2: float = 0.0
    k1: float = 0.25
    k2: float = 0.25

    def __post_init__(self):
        if self.mode not in ("explicit", "tuned"):
            raise ConfigurationError(
                f"LO mode must be 'explicit' or 'tuned', got {self.mode!r}", "lo.mode"
            )

    @classmethod
    def explicit(cls, theta1, theta2):
        return cls("explicit", theta1=float(theta1), theta2=float(theta2))

    @classmethod
    def tuned(cls, k1=0.25, k2=None):
        return cls("tuned", k1=float(k1), k2=float(k1 if k2 is None else k2))

    @property
    def k(self):
        if self.k1 != self.k2:
            raise ConfigurationError("k is only defined when k1 == k2", "lo.k")
        return self.k1


def resolve_lo(setting, phases, probe):
    """Return the LO angles ``(theta1, theta2)`` for ``setting`` at ``phases``."""
    if setting.mode == "explicit":
        return float(setting.theta1), float(setting.theta2)
    n_s = probe.n_s
    if not n_s > 0:
        raise ConfigurationError("tuned LO needs a squeezed probe (N_s > 0)", "probe.r")
    dec = decompose(phases)
    for i in range(2):
        if dec.indeterminate[i, 0]:
            raise IndeterminatePhaseError(
                f"tuned LO undefined: output {i + 1} receives no light from the "
                f"squeezed port (p_{i + 1}1 = {dec.p[i, 0]:.1e}) at phi_d = {phases.phi_d}",
                "truth.phi_d",
            )
    theta1 = dec.gamma[0, 0] + np.pi / 2 + setting.k1 / n_s
    theta2 = dec.gamma[1, 0] + np.pi / 2 + setting.k2 / n_s
    return float(theta1), float(theta2)


@dataclass(frozen=True, eq=False)
class HomodyneDistribution:
    """Bivariate normal outcome model ``N(mu, Sigma)``."""

    mu: np.ndarray
    sigma: np.ndarray
    det_sigma: float

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (2, 2):
            raise StructuralError(f"Sigma must be 2x2, got {sigma.shape}")
        if not (self.det_sigma > 0 and sigma[0, 0] > 0):
            raise StructuralError(
                f"Sigma is not positive definite (det = {self.det_sigma:.3e}); "
                "this indicates an upstream bug"
            )

    @property
    def cofactor(self):
        """``C = det(Sigma) Sigma^{-1}``."""
        s = self.sigma
        return np.array([[s[1, 1], -s[1, 0]], [-s[0, 1], s[0, 0]]])

    @property
    def precision(self):
        return self.cofactor / self.det_sigma


def _trig_moments(dec, probe, theta1, theta2):
    p1, p2 = dec.p1, dec.p2
    g = dec.gamma
    a1, a2, r = probe.alpha1, probe.alpha2, probe.r
    sh2, shch = np.sinh(r) ** 2, np.sinh(r) * np.cosh(r)
    sq1, sq2 = np.sqrt(p1), np.sqrt(p2)
    mu = _SQRT2 * np.array(
        [
            a1 * sq1 * np.cos(g[0, 0] - theta1) + a2 * sq2 * np.cos(g[0, 1] - theta1),
            a1 * sq2 * np.cos(g[1, 0] - theta2) + a2 * sq1 * np.cos(g[1, 1] - theta2),
        ]
    )
    x1, x2 = g[0, 0] - theta1, g[1, 0] - theta2
    s11 = 0.5 + p1 * (sh2 + np.cos(2 * x1) * shch)
    s22 = 0.5 + p2 * (sh2 + np.cos(2 * x2) * shch)
    s12 = sq1 * sq2 * (np.cos(x1 - x2) * sh2 + np.cos(x1 + x2) * shch)
    sigma = np.array([[s11, s12], [s12, s22]])
    det = (
        0.25
        + sh2 * (0.5 - p1 * p2 * np.sin(x1 - x2) ** 2)
        + 0.5 * shch * (p1 * np.cos(2 * x1) + p2 * np.cos(2 * x2))
    )
    return mu, sigma, det


def output_distribution(phases, probe, theta1, theta2):
    """Closed-form mean and covariance of the two homodyne outcomes."""
    dec = decompose(phases)
    mu, sigma, det = _trig_moments(dec, probe, theta1, theta2)
    return HomodyneDistribution(mu, sigma, float(det))


def lo_rotation(theta1, theta2):
    return np.diag(np.exp(-1j * np.array([theta1, theta2])))


def output_distribution_propagated(phases, probe, theta1, theta2):
    """Same distribution obtained by symplectic propagation of the probe moments."""
    u = lo_rotation(theta1, theta2) @ mzi_unitary(phases)
    out = apply_network(probe, u)
    mu, sigma = out.quadrature_block("q")
    return HomodyneDistribution(mu, sigma, float(np.linalg.det(sigma)))


def _amplitudes(dec, theta1, theta2, phases):
    """Amplitudes ``A_ij = sqrt(p_ij) e^{i(gamma_ij - theta_i)}`` and their derivatives.

    Derivatives come from ``dp`` and ``dgamma``; entries flagged
    indeterminate use the smooth derivative of ``U`` instead, since
    ``sqrt(p)`` has a kink there.
    """
    lo = np.exp(-1j * np.array([theta1, theta2]))[:, None]
    sq = np.sqrt(dec.p)
    phase = np.exp(1j * dec.gamma) * lo
    amp = sq * phase
    du_s, du_d = mzi_unitary_derivatives(phases)
    dsq = np.where(dec.indeterminate, 0.0, 1.0)
    safe = np.where(dec.indeterminate, 1.0, sq)
    damp = []
    for dp, dgamma, du in ((dec.dp_s, dec.dgamma_s, du_s), (dec.dp_d, dec.dgamma_d, du_d)):
        chain = (dsq * dp / (2 * safe) + 1j * sq * dgamma) * phase
        damp.append(np.where(dec.indeterminate, du * lo, chain))
    return amp, damp


def moment_derivatives(phases, probe, theta1, theta2):
    """Analytic derivatives of ``mu`` and ``Sigma`` with the LO angles held fixed.

    Returns
    -------
    dmu : ndarray, shape (2, 2)
        ``dmu[m]`` is ``d mu / d phi_m`` for ``m`` in ``(s, d)``.
    dsigma : ndarray, shape (2, 2, 2)
        ``dsigma[m]`` is ``d Sigma / d phi_m``.
    """
    dec = decompose(phases)
    amp, damp = _amplitudes(dec, theta1, theta2, phases)
    alpha = np.array([probe.alpha1, probe.alpha2])
    sh2, shch = np.sinh(probe.r) ** 2, np.sinh(probe.r) * np.cosh(probe.r)
    b1, b2 = amp[0, 0], amp[1, 0]
    dmu = np.empty((2, 2))
    dsigma = np.empty((2, 2, 2))
    for m, da in enumerate(damp):
        dmu[m] = _SQRT2 * (da @ alpha).real
        db1, db2 = da[0, 0], da[1, 0]
        d11 = 2 * sh2 * (b1.conjugate() * db1).real + 2 * shch * (b1 * db1).real
        d22 = 2 * sh2 * (b2.conjugate() * db2).real + 2 * shch * (b2 * db2).real
        d12 = sh2 * (db1 * b2.conjugate() + b1 * db2.conjugate()).real + shch * (
            db1 * b2 + b1 * db2
        ).real
        dsigma[m] = [[d11, d12], [d12, d22]]
    return dmu, dsigma


def det_sigma_expansion(phases, theta1, theta2):
    """Coefficients of ``det Sigma = N_s B1 + B2 + B3/N_s + O(N_s^-2)``.

    ``B1`` vanishes exactly when both LOs sit on the minimum-variance
    quadrature, ``theta_i = gamma_i1 + pi/2 (mod pi)``.
    """
    dec = decompose(phases)
    p1, p2 = dec.p1, dec.p2
    x1, x2 = dec.gamma[0, 0] - theta1, dec.gamma[1, 0] - theta2
    cos_sq = p1 * np.cos(x1) ** 2 + p2 * np.cos(x2) ** 2
    sin_2 = p1 * np.sin(2 * x1) + p2 * np.sin(2 * x2)
    cos_2 = p1 * np.cos(2 * x1) + p2 * np.cos(2 * x2)
    b1 = cos_sq**2 + 0.25 * sin_2**2
    b2 = 0.25 * (1 + cos_2)
    b3 = -cos_2 / 16
    return float(b1), float(b2), float(b3)


def tuned_det_limit(phases, k1, k2):
    """``rho = (p1 k1 + p2 k2)^2 + 1/16``, the limit of ``N_s det Sigma`` under tuning."""
    dec = decompose(phases)
    return (dec.p1 * k1 + dec.p2 * k2) ** 2 + 1.0 / 16


def log_density(dist, x):
    """Log of the bivariate normal density; ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    dev = x - dist.mu
    quad = np.einsum("...i,ij,...j->...", dev, dist.precision, dev)
    return -np.log(2 * np.pi * np.sqrt(dist.det_sigma)) - 0.5 * quad
