"""Angular-momentum algebra for integer spins.

Wigner-D convention (z-y-z Euler angles, passive rotations)::

    D^J_{mk}(phi, theta, chi) = exp(-i m phi) d^J_{mk}(theta) exp(-i k chi)

Symmetric-top eigenfunctions are ``sqrt((2J+1)/8pi^2) * conj(D^J_{mk})``
with ``k`` the projection on the body ``a`` axis and ``m`` the projection on
the laboratory ``Z`` axis. With this choice

    <J k m|D^2_{0s}|J' k' m> = (-1)^(k'+m) sqrt((2J+1)(2J'+1))
                               (J 2 J'; m 0 -m) (J 2 J'; k s -k')

which :func:`dmatrix_quadrature_oracle` checks by brute-force integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

J_LIMIT = 60
RANK2_PROJECTIONS = (0, 2, -2)


@dataclass(frozen=True)
class AngularIndices:
    """Symmetric-top ket ``|J, k, m>``."""

    J: int
    k: int
    m: int

    def __post_init__(self):
        for name in ("J", "k", "m"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise TypeError(f"{name} must be an integer")
        if self.J < 0:
            raise ValueError(f"J must be non-negative, got {self.J}")
        if abs(self.k) > self.J or abs(self.m) > self.J:
            raise ValueError(f"|k| and |m| must not exceed J: {self}")


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _check_j(*js, limit=J_LIMIT):
    for j in js:
        if not isinstance(j, (int, np.integer)):
            raise TypeError(f"only integer angular momenta are supported, got {j!r}")
        if j < 0:
            raise ValueError(f"angular momentum must be non-negative, got {j}")
        if j > limit:
            raise ValueError(f"angular momentum {j} exceeds the configured limit {limit}")


@lru_cache(maxsize=200_000)
def _three_j_exact(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0

    # Racah's single-sum formula; the sum is an exact rational and the
    # prefactor enters squared so the result is one correctly rounded sqrt.
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            _fact(k)
            * _fact(j3 - j2 + k + m1)
            * _fact(j3 - j1 + k - m2)
            * _fact(j1 + j2 - j3 - k)
            * _fact(j1 - k - m1)
            * _fact(j2 - k + m2)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0

    squared_prefactor = Fraction(
        _fact(j1 + j2 - j3) * _fact(j1 - j2 + j3) * _fact(-j1 + j2 + j3),
        _fact(j1 + j2 + j3 + 1),
    ) * (
        _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2)
        * _fact(j2 - m2) * _fact(j3 + m3) * _fact(j3 - m3)
    )
    magnitude = math.sqrt(float(total * total * squared_prefactor))
    sign = 1 if total > 0 else -1
    if (j1 - j2 - m3) % 2:
        sign = -sign
    return sign * magnitude


def wigner_3j(j1, j2, j3, m1, m2, m3, *, limit=J_LIMIT) -> float:
    """Wigner 3-j symbol ``(j1 j2 j3; m1 m2 m3)`` for integer arguments.

    Returns exactly ``0.0`` when the projection sum or triangle condition fails.
    """
    _check_j(j1, j2, j3, limit=limit)
    for m in (m1, m2, m3):
        if not isinstance(m, (int, np.integer)):
            raise TypeError(f"only integer projections are supported, got {m!r}")
    return _three_j_exact(int(j1), int(j2), int(j3), int(m1), int(m2), int(m3))


def clebsch_gordan(j1, m1, j2, m2, j3, m3, *, limit=J_LIMIT) -> float:
    """``<j1 m1 j2 m2 | j3 m3>`` via its relation to the 3-j symbol."""
    three_j = wigner_3j(j1, j2, j3, m1, m2, -m3, limit=limit)
    if three_j == 0.0:
        return 0.0
    phase = -1 if (j1 - j2 + m3) % 2 else 1
    return phase * math.sqrt(2 * j3 + 1) * three_j


def dmatrix_element(bra: AngularIndices, s: int, ket: AngularIndices) -> float:
    """Symmetric-top matrix element ``<J k m|D^2_{0s}|J' k' m>``."""
    if s not in RANK2_PROJECTIONS:
        raise ValueError(f"s must be one of {RANK2_PROJECTIONS}, got {s}")
    if bra.m != ket.m:
        raise ValueError(f"D^2_0s conserves m; got bra.m={bra.m}, ket.m={ket.m}")
    return _dmatrix(bra.J, bra.k, ket.J, ket.k, bra.m, s)


@lru_cache(maxsize=None)
def _dmatrix(J, k, Jp, kp, m, s) -> float:
    if abs(J - Jp) > 2 or kp != k + s:
        return 0.0
    a = wigner_3j(J, 2, Jp, m, 0, -m)
    if a == 0.0:
        return 0.0
    b = wigner_3j(J, 2, Jp, k, s, -kp)
    if b == 0.0:
        return 0.0
    phase = -1 if (kp + m) % 2 else 1
    return phase * math.sqrt((2 * J + 1) * (2 * Jp + 1)) * a * b


def symmetric_top_basis(jmax: int, m: int) -> list[tuple[int, int]]:
    """``(J, k)`` pairs for ``|m| <= J <= jmax``, J-major, k ascending."""
    return [(J, k) for J in range(abs(m), jmax + 1) for k in range(-J, J + 1)]


@lru_cache(maxsize=256)
def rank2_matrix(jmax: int, m: int, s: int) -> np.ndarray:
    """Dense matrix of ``D^2_{0s}`` over :func:`symmetric_top_basis`."""
    if s not in RANK2_PROJECTIONS:
        raise ValueError(f"s must be one of {RANK2_PROJECTIONS}, got {s}")
    basis = symmetric_top_basis(jmax, m)
    index = {jk: i for i, jk in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)))
    for i, (J, k) in enumerate(basis):
        kp = k + s
        for Jp in range(max(abs(m), J - 2), min(jmax, J + 2) + 1):
            j = index.get((Jp, kp))
            if j is not None:
                out[i, j] = _dmatrix(J, k, Jp, kp, m, s)
    out.flags.writeable = False
    return out


# --- independent quadrature oracle -------------------------------------------


def wigner_small_d(J: int, mp: int, m: int, beta) -> np.ndarray:
    """``d^J_{m'm}(beta)`` from Wigner's explicit sum, float arithmetic."""
    beta = np.asarray(beta, dtype=float)
    c, s_ = np.cos(beta / 2), np.sin(beta / 2)
    pref = math.sqrt(_fact(J + mp) * _fact(J - mp) * _fact(J + m) * _fact(J - m))
    out = np.zeros_like(beta)
    for s in range(max(0, m - mp), min(J + m, J - mp) + 1):
        coef = (-1) ** (mp - m + s) * pref / (
            _fact(J + m - s) * _fact(s) * _fact(mp - m + s) * _fact(J - mp - s)
        )
        out = out + coef * c ** (2 * J + m - mp - 2 * s) * s_ ** (mp - m + 2 * s)
    return out


def wigner_D(J: int, mp: int, m: int, phi, theta, chi) -> np.ndarray:
    return np.exp(-1j * mp * phi) * wigner_small_d(J, mp, m, theta) * np.exp(-1j * m * chi)


def symmetric_top_wavefunction(J: int, k: int, m: int, phi, theta, chi) -> np.ndarray:
    return math.sqrt((2 * J + 1) / (8 * math.pi**2)) * np.conj(wigner_D(J, m, k, phi, theta, chi))


@lru_cache(maxsize=4)
def _euler_grid(n_theta: int, n_ang: int):
    """1D nodes and weights; the 3D rule is their tensor product."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = (x + 1) * math.pi / 2
    w_theta = w * math.pi / 2 * np.sin(theta)
    ang = np.arange(n_ang) * 2 * math.pi / n_ang
    w_ang = np.full(n_ang, 2 * math.pi / n_ang)
    return ang, theta, w_ang, w_theta


def dmatrix_quadrature_oracle(bra: AngularIndices, s: int, ket: AngularIndices) -> float:
    """Same element as :func:`dmatrix_element`, by direct Euler-angle quadrature.

    Gauss-Legendre in theta, uniform trapezoid in phi and chi (exact for the
    trigonometric polynomials that occur). With ``D = e^{-i m phi} d(theta)
    e^{-i k chi}`` every factor of the integrand splits over the three angles,
    so each is tabulated on its own axis and the weighted product is summed
    over the full grid. Restricted to J, J' <= 6.
    """
    if max(bra.J, ket.J) > 6:
        raise ValueError("quadrature oracle is limited to J <= 6")
    if s not in RANK2_PROJECTIONS:
        raise ValueError(f"s must be one of {RANK2_PROJECTIONS}, got {s}")
    ang, theta, w_ang, w_theta = _euler_grid(48, 24)
    norm = math.sqrt((2 * bra.J + 1) * (2 * ket.J + 1)) / (8 * math.pi**2)
    # conj(psi_bra) * D^2_0s * psi_ket, split as phi x theta x chi
    f_phi = np.exp(-1j * (bra.m - ket.m) * ang)
    f_theta = (
        wigner_small_d(bra.J, bra.m, bra.k, theta)
        * wigner_small_d(2, 0, s, theta)
        * wigner_small_d(ket.J, ket.m, ket.k, theta)
    )
    f_chi = np.exp(-1j * (bra.k + s - ket.k) * ang)
    value = norm * np.einsum("a,b,c,a,b,c->", w_ang, w_theta, w_ang, f_phi, f_theta, f_chi)
    if abs(value.imag) > 1e-9:
        raise AssertionError(f"oracle produced a complex element {value}")
    return float(value.real)
