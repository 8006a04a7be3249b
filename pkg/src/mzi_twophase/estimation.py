"""
Sampling of homodyne outcomes and maximum-likelihood phase estimation.

Random streams
--------------
Every batch is drawn from ``numpy.random.Generator(PCG64(SeedSequence(seed,
spawn_key=stream)))``. ``seed`` is the user's 64-bit seed and ``stream`` a
tuple of non-negative integers identifying the draw, e.g. ``(point, trial)``
in a sweep. The mapping is stable across runs and independent of execution
order, so trials can be farmed out to workers freely.

Angle conventions
-----------------
Closed-form estimates are reported in ``(-pi, pi]``. ``phi_d`` is recovered
modulo ``2 pi``; the LO tuning fixes which half-plane the outcome means lie
in, so the LO angles (when given) select the sign convention. ``phi_s`` comes
from an arccos and is two-valued; see :func:`estimate_phi_s`.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimatorError, StructuralError
from .fisher import fim_exact_at
from .homodyne import moment_derivatives, output_distribution
from .interferometer import PhasePair

#: Tolerance beyond +-1 before the phi_s arccos argument is declared invalid.
ARCCOS_SLACK = 1e-6


def wrap_angle(x):
    """Reduce to ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def stream_rng(seed, stream=()):
    """Generator for the documented ``(seed, stream)`` mapping."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """``nu`` joint homodyne outcomes, one per row."""

    outcomes: np.ndarray
    seed: int = 0
    stream: tuple = ()
    digest: str = ""

    def __post_init__(self):
        x = np.asarray(self.outcomes, dtype=float)
        if x.ndim != 2 or x.shape[1] != 2 or x.shape[0] < 1:
            raise StructuralError(f"outcomes must have shape (nu, 2), got {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "outcomes", x)

    @property
    def nu(self):
        return self.outcomes.shape[0]

    @property
    def mean(self):
        return self.outcomes.mean(axis=0)

    @property
    def covariance(self):
        """Sample covariance with ``1/nu`` normalization."""
        dev = self.outcomes - self.mean
        return dev.T @ dev / self.nu


def _digest(dist):
    blob = np.concatenate([dist.mu, dist.sigma.ravel()]).tobytes()
    return hashlib.sha256(blob).hexdigest()[:16]


def sample(dist, nu, seed, stream=()):
    """Draw ``nu`` outcomes ``x = mu + L z`` with ``Sigma = L L^T``."""
    if int(nu) != nu or nu < 1:
        raise ValueError(f"nu must be a positive integer, got {nu!r}")
    try:
        chol = np.linalg.cholesky(dist.sigma)
    except np.linalg.LinAlgError as exc:
        raise StructuralError(f"Sigma is not positive definite: {exc}") from exc
    z = stream_rng(seed, stream).standard_normal((int(nu), 2))
    return SampleBatch(dist.mu + z @ chol.T, seed=int(seed), stream=tuple(stream), digest=_digest(dist))


@dataclass(frozen=True)
class EstimateRecord:
    phi_s_hat: float
    phi_d_hat: float
    method: str
    converged: bool = True
    branch: str = ""
    iterations: int = 0


def lo_branch_sign(theta1, theta2):
    """``sign(sin(theta2 - theta1))``: which side of the circle the tuned LOs put ``phi_d``."""
    return 1.0 if np.sin(theta2 - theta1) >= 0 else -1.0


def estimate_phi_d(mean, theta1=None, theta2=None):
    """Difference phase from the outcome means, ``2 atan2(-mu_1, mu_2)``.

    With tuned LOs the ratio of the means only fixes ``|tan(phi_d/2)|``; the
    sign is carried by the LO angles. When they are given, the sign of
    ``sin(theta2 - theta1)`` flips ``mu_1`` accordingly. Without them the
    bare expression is used, which is correct for ``sin(phi_d/2) > 0``.
    """
    m1, m2 = float(mean[0]), float(mean[1])
    if math.hypot(m1, m2) < 1e-12:
        raise EstimatorError("sample mean vanishes; phi_d is undefined")
    sign = 1.0 if theta1 is None else lo_branch_sign(theta1, theta2)
    return float(wrap_angle(2 * math.atan2(-sign * m1, m2)))


def phi_s_arccos_argument(cov, phi_d_hat, r):
    p1 = math.cos(phi_d_hat / 2) ** 2
    p2 = 1.0 - p1
    v = p1 * cov[0, 0] + p2 * cov[1, 1] + 2 * math.sqrt(p1 * p2) * cov[0, 1]
    return (2 * v - math.cosh(2 * r)) / math.sinh(2 * r)


def estimate_phi_s(cov, phi_d_hat, r, theta1, reference=None):
    """Sum phase from the sample covariance.

    The variance of ``sqrt(p1) x_1 + sqrt(p2) x_2`` determines
    ``cos(phi_s - 2 theta1)``, so two branches ``2 theta1 +- arccos(c)``
    exist. Without ``reference`` the ``+`` branch ``2 theta1 - 2 pi +
    arccos(c)`` is used; it contains the truth whenever the LO offset
    ``k`` is positive. With a ``reference`` angle, the branch and ``2 pi``
    shift closest to it are chosen.

    Returns
    -------
    (value, branch) : (float, str)
        ``branch`` is ``"+"`` or ``"-"``.
    """
    if r == 0:
        raise EstimatorError("phi_s estimator needs squeezing (sinh 2r = 0)")
    c = phi_s_arccos_argument(cov, phi_d_hat, r)
    if not abs(c) <= 1 + ARCCOS_SLACK:
        raise EstimatorError(f"arccos argument {c:.8f} outside [-1, 1]")
    acos = math.acos(min(1.0, max(-1.0, c)))
    if reference is None:
        return float(wrap_angle(2 * theta1 - 2 * np.pi + acos)), "+"
    best = None
    for branch, val in (("+", 2 * theta1 + acos), ("-", 2 * theta1 - acos)):
        shifted = reference + float(wrap_angle(val - reference))
        dist = abs(shifted - reference)
        if best is None or dist < best[0]:
            best = (dist, shifted, branch)
    return best[1], best[2]


def mle_phi_d(batch, theta1=None, theta2=None):
    """Closed-form estimator of ``phi_d`` (squeezed vacuum plus coherent probe, ``k_1 = k_2``)."""
    return estimate_phi_d(batch.mean, theta1, theta2)


def mle_phi_s(batch, phi_d_hat, r, theta1, reference=None):
    """Closed-form estimator of ``phi_s``; see :func:`estimate_phi_s`."""
    return estimate_phi_s(batch.covariance, phi_d_hat, r, theta1, reference)[0]


def closed_form_estimate(batch, r, theta1, theta2, reference=None):
    """Both closed-form estimates as an :class:`EstimateRecord`."""
    phi_d = estimate_phi_d(batch.mean, theta1, theta2)
    phi_s, branch = estimate_phi_s(batch.covariance, phi_d, r, theta1, reference)
    return EstimateRecord(phi_s, phi_d, "closed_form", True, branch)


def mean_log_likelihood(phases, probe, theta1, theta2, mean, cov):
    """``(1/nu) sum_i log p(x_i | phi)`` from the sample mean and ``1/nu`` covariance."""
    dist = output_distribution(phases, probe, theta1, theta2)
    dev = mean - dist.mu
    scatter = cov + np.outer(dev, dev)
    return -math.log(2 * math.pi * math.sqrt(dist.det_sigma)) - 0.5 * float(
        np.sum(dist.precision * scatter)
    )


def likelihood_gradient(phases, probe, theta1, theta2, mean, cov):
    """Gradient of :func:`mean_log_likelihood` (signal and noise terms)."""
    dist = output_distribution(phases, probe, theta1, theta2)
    dmu, dsigma = moment_derivatives(phases, probe, theta1, theta2)
    prec = dist.precision
    dev = mean - dist.mu
    scatter = cov + np.outer(dev, dev)
    signal = dmu @ (prec @ dev)
    # d(Sigma^-1) = -P dSigma P
    dprec = -np.einsum("ij,mjk,kl->mil", prec, dsigma, prec)
    noise = 0.5 * np.einsum("mij,ji->m", dprec, dist.sigma - scatter)
    return signal + noise


@dataclass
class NumericMleOptions:
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    max_iter: int = 200
    max_halvings: int = 40


def mle_numeric(batch, probe, lo, init, options=None):
    """Maximize the exact log-likelihood by Fisher scoring with backtracking.

    Parameters
    ----------
    batch : SampleBatch
    probe : ProbeState
    lo : tuple of float
        Frozen LO angles ``(theta1, theta2)``.
    init : PhasePair
        Starting point of the local search.

    Returns
    -------
    EstimateRecord
        ``converged`` is False when the iteration cap is hit; the best
        iterate is reported either way.
    """
    opts = options or NumericMleOptions()
    theta1, theta2 = lo
    mean, cov = batch.mean, batch.covariance
    phi = init.as_array().astype(float)

    def loglik(x):
        try:
            return mean_log_likelihood(PhasePair(*x), probe, theta1, theta2, mean, cov)
        except StructuralError:
            return -np.inf

    current = loglik(phi)
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        here = PhasePair(*phi)
        grad = likelihood_gradient(here, probe, theta1, theta2, mean, cov)
        if np.linalg.norm(grad) < opts.grad_tol:
            converged = True
            break
        info = fim_exact_at(here, probe, theta1, theta2).matrix
        step = np.linalg.lstsq(info, grad, rcond=1e-12)[0]
        if not np.any(step):
            step = grad
        t = 1.0
        for _ in range(opts.max_halvings):
            trial = phi + t * step
            value = loglik(trial)
            # rounding in the log-likelihood dominates once the step is tiny
            if value >= current - 1e-13 * (1.0 + abs(current)):
                break
            t *= 0.5
        else:
            break
        moved = np.linalg.norm(t * step)
        phi, current = trial, value
        if moved < opts.step_tol:
            converged = True
            break
    phi = wrap_angle(phi)
    return EstimateRecord(float(phi[0]), float(phi[1]), "numeric_mle", converged, "", it)


@dataclass(frozen=True)
class EstimatorStats:
    n: int
    bias_s: float
    bias_d: float
    rmse_s: float
    rmse_d: float
    stderr_s: float
    stderr_d: float
    rmse_stderr_s: float
    rmse_stderr_d: float


def _moments(errors):
    n = len(errors)
    bias = math.fsum(errors) / n
    mse = math.fsum(e * e for e in errors) / n
    var = math.fsum((e - bias) ** 2 for e in errors) / (n - 1)
    sq_var = math.fsum((e * e - mse) ** 2 for e in errors) / (n - 1)
    rmse = math.sqrt(mse)
    rmse_se = math.sqrt(sq_var / n) / (2 * rmse) if rmse > 0 else 0.0
    return bias, rmse, math.sqrt(var / n), rmse_se


def statistics(records, truth):
    """Bias, root-mean-square error and standard errors against ``truth``.

    Errors are circular differences in ``(-pi, pi]``. ``stderr_*`` is the
    standard error of the bias; ``rmse_stderr_*`` that of the rmse (delta
    method). Sums use ``math.fsum`` so the result does not depend on the
    order of the records.
    """
    if len(records) < 2:
        raise ValueError("statistics needs at least two estimates")
    err_s = [float(wrap_angle(r.phi_s_hat - truth.phi_s)) for r in records]
    err_d = [float(wrap_angle(r.phi_d_hat - truth.phi_d)) for r in records]
    bs, rs, ss, rss = _moments(err_s)
    bd, rd, sd, rsd = _moments(err_d)
    return EstimatorStats(len(records), bs, bd, rs, rd, ss, sd, rss, rsd)
