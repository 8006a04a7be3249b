"""
Gaussian bosonic states described by first and second moments.

Conventions (fixed throughout the package):

* hbar = 1, so the vacuum has quadrature variance 1/2 and covariance ``I/2``.
* Quadratures are ordered in blocks ``(q_1, ..., q_m, p_1, ..., p_m)``.
* A coherent amplitude ``alpha`` (real) displaces ``q`` by ``sqrt(2) * alpha``.
* Squeezing ``r`` on mode 1 enters the covariance as ``exp(+2r)/2`` on ``q_1``
  and ``exp(-2r)/2`` on ``p_1``.

Passive linear networks act on the moments through the real orthogonal and
symplectic matrix ``R = [[Re U, -Im U], [Im U, Re U]]``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PhysicalityError, StructuralError

#: Minimum eigenvalue allowed for ``Gamma + i Omega / 2``.
PSD_TOL = 1e-10


def symplectic_form(modes):
    """Return ``Omega = [[0, I], [-I, 0]]`` for ``modes`` modes."""
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [-eye, zero]])


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second moments of an ``m``-mode Gaussian state.

    Parameters
    ----------
    displacement : array_like, shape (2m,)
        Mean quadrature vector.
    covariance : array_like, shape (2m, 2m)
        Symmetric covariance matrix. It is symmetrized on construction and
        checked against the uncertainty relation.
    """

    displacement: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.displacement, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if d.ndim != 1 or d.size % 2 or cov.shape != (d.size, d.size):
            raise StructuralError(
                f"displacement of shape {d.shape} and covariance of shape "
                f"{cov.shape} do not describe an m-mode state"
            )
        cov = 0.5 * (cov + cov.T)
        check_uncertainty(cov)
        object.__setattr__(self, "displacement", _frozen(d))
        object.__setattr__(self, "covariance", _frozen(cov))

    @property
    def modes(self):
        return self.displacement.size // 2

    @classmethod
    def vacuum(cls, modes):
        return cls(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))

    def quadrature_block(self, block="q"):
        """Return ``(mean, covariance)`` of the ``q`` or ``p`` quadratures."""
        m = self.modes
        sl = slice(0, m) if block == "q" else slice(m, 2 * m)
        return self.displacement[sl].copy(), self.covariance[sl, sl].copy()

    def purity(self):
        """``1 / (2^m sqrt(det Gamma))``; equals 1 for pure states."""
        return 1.0 / (2**self.modes * np.sqrt(np.linalg.det(self.covariance)))


@dataclass(frozen=True, eq=False)
class ProbeState(GaussianState):
    """Two-mode probe: displaced squeezed state in mode 1, coherent state in mode 2.

    Keeps the preparation parameters so closed-form expressions can be
    evaluated alongside the generic moment description.
    """

    alpha1: float = 0.0
    alpha2: float = 0.0
    r: float = 0.0

    @property
    def n_c1(self):
        return self.alpha1**2

    @property
    def n_c2(self):
        return self.alpha2**2

    @property
    def n_c(self):
        """Photons carried by the displacements."""
        return self.n_c1 + self.n_c2

    @property
    def n_s(self):
        """Photons carried by the squeezing, ``sinh(r)**2``."""
        return np.sinh(self.r) ** 2

    @property
    def n_total(self):
        return self.n_c + self.n_s

    @property
    def beta(self):
        """Fraction of coherent photons entering the first port."""
        if self.n_c == 0:
            return 0.0
        return self.n_c1 / self.n_c


def check_uncertainty(covariance, tol=PSD_TOL):
    """Raise :class:`PhysicalityError` unless ``Gamma + i Omega/2 >= 0``."""
    m = covariance.shape[0] // 2
    herm = covariance + 0.5j * symplectic_form(m)
    lowest = np.linalg.eigvalsh(herm)[0]
    if lowest < -tol:
        raise PhysicalityError(
            f"covariance violates the uncertainty relation: minimum eigenvalue "
            f"of Gamma + i Omega/2 is {lowest:.3e}"
        )
    return lowest


def make_probe(alpha1, alpha2, r):
    """Prepare ``|alpha1, r> (x) |alpha2>`` with real amplitudes and squeezing."""
    alpha1, alpha2, r = float(alpha1), float(alpha2), float(r)
    d = np.sqrt(2.0) * np.array([alpha1, alpha2, 0.0, 0.0])
    cov = 0.5 * np.diag([np.exp(2 * r), 1.0, np.exp(-2 * r), 1.0])
    return ProbeState(d, cov, alpha1=alpha1, alpha2=alpha2, r=r)


@dataclass(frozen=True, eq=False)
class SymplecticRotation:
    """Real ``2m x 2m`` action of a passive unitary on quadratures."""

    matrix: np.ndarray

    @classmethod
    def from_unitary(cls, u):
        u = np.asarray(u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise StructuralError(f"mode unitary must be square, got {u.shape}")
        re, im = u.real, u.imag
        return cls(_frozen(np.block([[re, -im], [im, re]])))

    @property
    def modes(self):
        return self.matrix.shape[0] // 2


def apply_network(state, u):
    """Propagate ``state`` through the passive network with mode unitary ``u``.

    ``d' = R d`` and ``Gamma' = R Gamma R^T``. Returns a plain
    :class:`GaussianState`.
    """
    rot = SymplecticRotation.from_unitary(u)
    if rot.modes != state.modes:
        raise StructuralError(
            f"unitary acts on {rot.modes} modes but the state has {state.modes}"
        )
    R = rot.matrix
    return GaussianState(R @ state.displacement, R @ state.covariance @ R.T)


def mean_photon_number(state):
    """``(tr Gamma + |d|^2)/2 - m/2``."""
    d = state.displacement
    return 0.5 * (np.trace(state.covariance) + d @ d) - 0.5 * state.modes
