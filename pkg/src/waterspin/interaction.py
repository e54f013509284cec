"""Impulsive (delta-kick) interaction of a linearly polarized pulse with the rotor."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from waterspin.angular import rank2_matrix
from waterspin.constants import ANGSTROM3, C, C_CM_PER_S, EPS0, HBAR
from waterspin.errors import KickIntegrationError, NumericalError
from waterspin.rotor import EigenstateTable, MolecularSpec

log = logging.getLogger(__name__)

ISOMER_LEAK_TOL = 1e-12
NORM_DRIFT_TOL = 1e-10
DEFAULT_ODE_STEPS = 512


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian pulse with ``eps^2(t) = eps0^2 exp(-t^2 / 2 sigma^2)``.

    peak_intensity in W/cm^2, sigma in fs, t0 in ps.
    """

    peak_intensity: float = 3e13
    sigma: float = 20.0
    t0: float = 0.0

    def __post_init__(self):
        if self.peak_intensity < 0:
            raise ValueError(f"peak_intensity must be >= 0, got {self.peak_intensity}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def shortest_period_ratio(self, table: EigenstateTable) -> float:
        """sigma over the shortest Bohr period from the ground level in ``table``."""
        e_max = max(lv.energy for lv in table.levels)
        if e_max <= 0:
            return 0.0
        period_fs = 1e15 / (C_CM_PER_S * e_max)
        return self.sigma / period_fs

    def is_impulsive(self, table: EigenstateTable, threshold: float = 0.01) -> bool:
        ratio = self.shortest_period_ratio(table)
        if ratio > threshold:
            log.warning(
                "pulse sigma=%g fs is %.3g of the shortest rotational period in the basis "
                "(threshold %g); the delta-kick treatment is approximate",
                self.sigma, ratio, threshold,
            )
            return False
        return True


@dataclass(frozen=True)
class KickCoefficients:
    beta1: float
    beta2: float


def field_from_intensity(peak_intensity: float) -> float:
    """Peak field in V/m for an intensity in W/cm^2 (I = c eps0 E0^2 / 2)."""
    if peak_intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {peak_intensity}")
    return math.sqrt(2.0 * peak_intensity * 1e4 / (C * EPS0))


def kick_strengths(pulse: PulseSpec, spec: MolecularSpec) -> KickCoefficients:
    """Dimensionless kick strengths for the D^2_00 and D^2_{0,+-2} terms."""
    e0 = field_from_intensity(pulse.peak_intensity)
    fluence = math.sqrt(2.0 * math.pi) * pulse.sigma * 1e-15 * e0**2
    to_si = 4.0 * math.pi * EPS0 * ANGSTROM3
    a_ab = spec.alpha_aa - spec.alpha_bb
    a_ac = spec.alpha_aa - spec.alpha_cc
    a_cb = spec.alpha_cc - spec.alpha_bb
    scale = fluence * to_si / (4.0 * HBAR)
    return KickCoefficients(
        beta1=-scale * (a_ab + a_ac) / 3.0,
        beta2=scale * a_cb / math.sqrt(6.0),
    )


@dataclass(frozen=True)
class KickGenerator:
    """``G = beta1 D^2_00 + beta2 (D^2_02 + D^2_0-2)`` in the (J, tau) eigenbasis at fixed m."""

    m: int
    matrix: np.ndarray
    para_mask: np.ndarray

    def __post_init__(self):
        G = self.matrix
        if not np.allclose(G, G.T, atol=1e-12, rtol=0):
            raise NumericalError("kick generator is not symmetric")
        leak = np.abs(G[np.ix_(self.para_mask, ~self.para_mask)]).max(initial=0.0)
        if leak > ISOMER_LEAK_TOL:
            raise NumericalError(f"kick couples para and ortho states ({leak:.3g})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def propagator(self) -> np.ndarray:
        """exp(-iG) from the eigendecomposition of the real symmetric G."""
        lam, V = np.linalg.eigh(self.matrix)
        return (V * np.exp(-1j * lam)) @ V.T


def build_kick_generator(betas: KickCoefficients, table: EigenstateTable, m: int) -> KickGenerator:
    if abs(m) > table.jmax:
        raise ValueError(f"|m|={abs(m)} exceeds jmax={table.jmax}")
    V = table.eigenvector_matrix(m)
    sym_top = betas.beta1 * rank2_matrix(table.jmax, m, 0) + betas.beta2 * (
        rank2_matrix(table.jmax, m, 2) + rank2_matrix(table.jmax, m, -2)
    )
    G = V.T @ sym_top @ V
    G = 0.5 * (G + G.T)
    return KickGenerator(m=m, matrix=G, para_mask=table.para_mask(m))


def _as_amplitudes(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def _rewrap(state, amps):
    if hasattr(state, "amplitudes"):
        return replace(state, amplitudes=amps)
    return amps


def apply_kick_ode(state, G: KickGenerator, steps: int = DEFAULT_ODE_STEPS):
    """Integrate ``dc/dxi = -i G c`` from xi = 0 to 1 with fixed-step RK4.

    ``state`` is a :class:`~waterspin.dynamics.WavepacketState`, a vector, or
    a matrix whose columns are propagated together. No renormalization.
    """
    c = _as_amplitudes(state)
    A = -1j * G.matrix
    h = 1.0 / steps
    norm0 = np.linalg.norm(c, axis=0)
    for _ in range(steps):
        k1 = A @ c
        k2 = A @ (c + 0.5 * h * k1)
        k3 = A @ (c + 0.5 * h * k2)
        k4 = A @ (c + h * k3)
        c = c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = np.max(np.abs(np.linalg.norm(c, axis=0) - norm0))
    if drift >= NORM_DRIFT_TOL:
        raise KickIntegrationError(
            f"norm drift {drift:.3g} after {steps} RK4 steps; increase the step count"
        )
    return _rewrap(state, c)


def apply_kick_exact(state, G: KickGenerator):
    """``c+ = exp(-iG) c`` via eigendecomposition."""
    return _rewrap(state, G.propagator() @ _as_amplitudes(state))
