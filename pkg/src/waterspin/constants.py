"""Frozen CODATA constants (via scipy.constants) and derived unit factors."""

import math

from scipy import constants as _c

H = _c.h
HBAR = _c.hbar
C = _c.c
K_B = _c.k
EPS0 = _c.epsilon_0

C_CM_PER_S = 100.0 * C
C_CM_PER_PS = C_CM_PER_S * 1e-12
# k_B / (h c): kelvin -> cm^-1
KELVIN_TO_CM1 = K_B / (H * C_CM_PER_S)
# E[cm^-1] -> angular frequency [rad/ps]
CM1_TO_RAD_PER_PS = 2.0 * math.pi * C_CM_PER_PS
ANGSTROM3 = 1e-30


def rotational_constant(moment_kg_m2: float) -> float:
    """h / (8 pi^2 c I) in cm^-1."""
    return H / (8.0 * math.pi**2 * C_CM_PER_S * moment_kg_m2)
