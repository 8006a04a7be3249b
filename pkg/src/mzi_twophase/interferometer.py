"""Balanced Mach-Zehnder interferometer in the (sum, difference) phase basis."""

from dataclasses import dataclass

import numpy as np

#: Entries with ``p_ij`` below this are treated as vanishing: their phase is
#: numerically unreliable for LO tuning and ``sqrt(p)`` is not differentiable.
DEGENERATE_P = 1e-12

SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])


@dataclass(frozen=True)
class PhasePair:
    """Phase sum ``phi_s = phi_1 + phi_2`` and difference ``phi_d = phi_1 - phi_2``."""

    phi_s: float
    phi_d: float

    @classmethod
    def from_arms(cls, phi1, phi2):
        return cls(phi1 + phi2, phi1 - phi2)

    @property
    def phi1(self):
        return 0.5 * (self.phi_s + self.phi_d)

    @property
    def phi2(self):
        return 0.5 * (self.phi_s - self.phi_d)

    def as_array(self):
        return np.array([self.phi_s, self.phi_d])


def beam_splitter():
    """50:50 splitter ``exp(i pi/4 sigma_y)``."""
    return np.cos(np.pi / 4) * np.eye(2) + 1j * np.sin(np.pi / 4) * SIGMA_Y


def phase_shifts(phi1, phi2):
    return np.diag(np.exp(1j * np.array([phi1, phi2])))


def mzi_unitary_factored(phases):
    """``U_BS^dagger U_PH U_BS`` built from its factors."""
    bs = beam_splitter()
    return bs.conj().T @ phase_shifts(phases.phi1, phases.phi2) @ bs


def mzi_unitary(phases):
    """Closed form ``exp(i phi_s/2) [[c, i s], [i s, c]]`` with ``c, s`` of ``phi_d/2``."""
    c, s = np.cos(phases.phi_d / 2), np.sin(phases.phi_d / 2)
    return np.exp(0.5j * phases.phi_s) * np.array([[c, 1j * s], [1j * s, c]])


def mzi_unitary_derivatives(phases):
    """Return ``(dU/dphi_s, dU/dphi_d)``; smooth everywhere, including degenerate points."""
    u = mzi_unitary(phases)
    c, s = np.cos(phases.phi_d / 2), np.sin(phases.phi_d / 2)
    du_d = 0.5 * np.exp(0.5j * phases.phi_s) * np.array([[-s, 1j * c], [1j * c, -s]])
    return 0.5j * u, du_d


@dataclass(frozen=True, eq=False)
class UnitaryDecomposition:
    """``U_ij = sqrt(p_ij) exp(i gamma_ij)`` with parameter derivatives.

    ``gamma`` lies in ``(-pi, pi]``. ``indeterminate`` marks entries with
    ``p_ij < DEGENERATE_P``. Their ``gamma`` is still the argument of ``U_ij``
    so that ``sqrt(p) e^{i gamma}`` reproduces ``U`` exactly; it is reported
    as 0 only where ``U_ij`` is exactly zero. ``dgamma`` is 0 on flagged
    entries.
    """

    p: np.ndarray
    gamma: np.ndarray
    dp_s: np.ndarray
    dp_d: np.ndarray
    dgamma_s: np.ndarray
    dgamma_d: np.ndarray
    indeterminate: np.ndarray

    @property
    def p1(self):
        return self.p[0, 0]

    @property
    def p2(self):
        return self.p[1, 0]


def _principal(angle):
    # numpy's angle lies in [-pi, pi]; fold -pi onto +pi
    return np.where(angle <= -np.pi, angle + 2 * np.pi, angle)


def decompose(phases):
    """Moduli, arguments and their analytic derivatives for the balanced MZI.

    ``p_1 = cos^2(phi_d/2)`` sits on the diagonal and ``p_2 = sin^2(phi_d/2)``
    off it. ``phi_s`` is a global phase, so ``dp/dphi_s = 0`` and
    ``dgamma/dphi_s = 1/2``; the arguments do not depend on ``phi_d`` away
    from the points where an entry vanishes.
    """
    u = mzi_unitary(phases)
    p = np.abs(u) ** 2
    bad = p < DEGENERATE_P
    # angle(0) is 0 in numpy, which is the convention for exactly vanishing entries
    gamma = _principal(np.angle(u))

    dp1 = -0.5 * np.sin(phases.phi_d)
    dp_d = np.array([[dp1, -dp1], [-dp1, dp1]])
    dgamma_s = np.where(bad, 0.0, 0.5)
    return UnitaryDecomposition(
        p=p,
        gamma=gamma,
        dp_s=np.zeros((2, 2)),
        dp_d=dp_d,
        dgamma_s=dgamma_s,
        dgamma_d=np.zeros((2, 2)),
        indeterminate=bad,
    )
