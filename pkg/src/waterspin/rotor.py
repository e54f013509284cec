"""Rigid asymmetric-top eigenstates and their C2v(M) / ortho-para labels.

The symmetric-top basis is quantized along the ``a`` axis (smallest moment of
inertia). The ``b`` axis sits at chi = 0 and ``c`` at chi = pi/2, so the
operator ``B J_b^2 + C J_c^2`` couples ``k`` to ``k +- 2`` with a positive
``(B - C)/4`` prefactor.
"""

from __future__ import annotations

import csv
import enum
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from waterspin.constants import rotational_constant
from waterspin.errors import ClassificationError

PLANARITY_TOL = 1e-3
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class MolecularSpec:
    """Principal moments of inertia (kg m^2) and polarizability volumes (A^3)."""

    I_a: float
    I_b: float
    I_c: float
    alpha_aa: float
    alpha_bb: float
    alpha_cc: float

    def __post_init__(self):
        if not 0 < self.I_a < self.I_b < self.I_c:
            raise ValueError(
                f"moments of inertia must satisfy 0 < I_a < I_b < I_c, got "
                f"({self.I_a}, {self.I_b}, {self.I_c})"
            )
        if self.planarity_defect >= PLANARITY_TOL:
            raise ValueError(
                f"molecule is not planar: |I_c - I_a - I_b| / I_c = {self.planarity_defect:.3g}"
            )

    @property
    def planarity_defect(self) -> float:
        return abs(self.I_c - (self.I_a + self.I_b)) / self.I_c

    @property
    def rotational_constants(self) -> tuple[float, float, float]:
        """(A, B, C) in cm^-1."""
        return tuple(rotational_constant(i) for i in (self.I_a, self.I_b, self.I_c))


WATER = MolecularSpec(
    I_a=1.025e-47,
    I_b=1.921e-47,
    I_c=2.946e-47,
    alpha_aa=1.528,
    alpha_bb=1.468,
    alpha_cc=1.415,
)


class SpinIsomer(enum.Enum):
    PARA = "para"
    ORTHO = "ortho"

    @property
    def weight(self) -> int:
        """Nuclear-spin statistical weight."""
        return 1 if self is SpinIsomer.PARA else 3


class SymmetryLabel(enum.Enum):
    # characters over (E, (12), E*, (12)*) = (R^0, R_b^pi, R_c^pi, R_a^pi)
    A1 = (1, 1, 1, 1)
    A2 = (1, 1, -1, -1)
    B1 = (1, -1, -1, 1)
    B2 = (1, -1, 1, -1)

    @property
    def characters(self) -> tuple[int, int, int, int]:
        return self.value

    @property
    def isomer(self) -> SpinIsomer:
        return SpinIsomer.PARA if self in (SymmetryLabel.A1, SymmetryLabel.A2) else SpinIsomer.ORTHO


@dataclass(frozen=True)
class RotorEigenstate:
    J: int
    tau: int
    m: int
    energy: float
    coeffs: np.ndarray = field(repr=False, compare=False)
    symmetry: SymmetryLabel | None = None

    @property
    def isomer(self) -> SpinIsomer | None:
        return None if self.symmetry is None else self.symmetry.isomer


def rigid_rotor_block(A: float, B: float, C: float, J: int) -> np.ndarray:
    """``A J_a^2 + B J_b^2 + C J_c^2`` over ``|J, k>``, k = -J..J."""
    if J < 0:
        raise ValueError(f"J must be non-negative, got {J}")
    ks = np.arange(-J, J + 1)
    jj = J * (J + 1)
    H = np.diag((B + C) / 2 * (jj - ks**2) + A * ks**2).astype(float)
    for i, k in enumerate(ks[:-2]):
        v = (B - C) / 4 * math.sqrt((jj - k * (k + 1)) * (jj - (k + 1) * (k + 2)))
        H[i + 2, i] = H[i, i + 2] = v
    return H


def build_hamiltonian_block(spec: MolecularSpec, J: int) -> np.ndarray:
    """Rigid-rotor Hamiltonian block for one J, cm^-1."""
    return rigid_rotor_block(*spec.rotational_constants, J)


def apply_rotation(op: str, coeffs: np.ndarray, J: int) -> np.ndarray:
    """Act with a body-frame pi rotation on coefficients over k = -J..J.

    ``op`` is one of ``"R_a_pi"``, ``"R_b_pi"``, ``"R_c_pi"``.
    """
    coeffs = np.asarray(coeffs)
    ks = np.arange(-J, J + 1)
    k_parity = np.where(ks % 2, -1, 1)
    j_parity = -1 if J % 2 else 1
    if op == "R_a_pi":
        return k_parity * coeffs
    if op == "R_b_pi":
        return j_parity * coeffs[::-1]
    if op == "R_c_pi":
        return j_parity * k_parity * coeffs[::-1]
    raise ValueError(f"unknown rotation {op!r}")


def rotation_matrix(op: str, J: int) -> np.ndarray:
    return np.column_stack([apply_rotation(op, e, J) for e in np.eye(2 * J + 1)])


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    # largest-|c| entry positive; first index wins ties so the choice is reproducible
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mag = np.abs(col)
        idx = int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])
        if col[idx] < 0:
            out[:, j] = -col
    return out


def _symmetry_subspaces(J: int) -> list[np.ndarray]:
    # Orthonormal bases of the four joint eigenspaces of (R_b, R_c); the
    # Hamiltonian commutes with both, so it is block diagonal over them.
    Rb = rotation_matrix("R_b_pi", J)
    Rc = rotation_matrix("R_c_pi", J)
    eye = np.eye(2 * J + 1)
    out = []
    for label in SymmetryLabel:
        _, chi_b, chi_c, _ = label.characters
        P = (eye + chi_b * Rb) @ (eye + chi_c * Rc) / 4.0
        w, Q = np.linalg.eigh(P)
        out.append(Q[:, w > 0.5])
    return out


def solve_block(H: np.ndarray, J: int, m: int = 0) -> list[RotorEigenstate]:
    """Diagonalize one (J, m) block; tau runs -J..J in ascending energy.

    Diagonalization runs inside each D2 symmetry subspace so eigenvectors stay
    symmetry-pure even for the near-degenerate pairs of high-J water levels.
    """
    energies, vectors = [], []
    for Q in _symmetry_subspaces(J):
        if Q.shape[1] == 0:
            continue
        e, w = np.linalg.eigh(Q.T @ H @ Q)
        energies.extend(e)
        vectors.append(Q @ w)
    energies = np.array(energies)
    vecs = _fix_sign(np.hstack(vectors))
    # stable sort keeps exact degeneracies in A1, A2, B1, B2 order
    order = np.argsort(energies, kind="stable")
    return [
        RotorEigenstate(J=J, tau=i - J, m=m, energy=float(energies[j]), coeffs=vecs[:, j])
        for i, j in enumerate(order)
    ]


def classify_symmetry(state: RotorEigenstate) -> tuple[SymmetryLabel, SpinIsomer]:
    v = np.asarray(state.coeffs, dtype=float)
    chars = [1]
    for op in ("R_b_pi", "R_c_pi", "R_a_pi"):
        rv = apply_rotation(op, v, state.J)
        sign = 1 if float(v @ rv) > 0 else -1
        if np.linalg.norm(rv - sign * v) > SYMMETRY_TOL:
            raise ClassificationError(
                f"state J={state.J}, tau={state.tau} is not an eigenvector of {op}"
            )
        chars.append(sign)
    try:
        label = SymmetryLabel(tuple(chars))
    except ValueError:
        raise ClassificationError(f"characters {chars} match no C2v(M) species") from None
    return label, label.isomer


@dataclass(frozen=True)
class Level:
    """m-independent data for one (J, tau) level."""

    J: int
    tau: int
    energy: float
    coeffs: np.ndarray = field(repr=False, compare=False)
    symmetry: SymmetryLabel

    @property
    def isomer(self) -> SpinIsomer:
        return self.symmetry.isomer


@dataclass(frozen=True)
class EigenstateTable:
    """Classified rotor levels for J <= jmax. Energies in cm^-1 with E(0,0) = 0."""

    molecule: MolecularSpec
    jmax: int
    levels: tuple[Level, ...] = field(repr=False)

    @property
    def rotational_constants(self) -> tuple[float, float, float]:
        return self.molecule.rotational_constants

    def level(self, J: int, tau: int) -> Level:
        return self.levels[J * J + J + tau]

    def states(self, m: int) -> Iterator[RotorEigenstate]:
        """Eigenstates |J, tau, m> for |m| <= J <= jmax, in basis order."""
        for lv in self.levels:
            if lv.J >= abs(m):
                yield RotorEigenstate(lv.J, lv.tau, m, lv.energy, lv.coeffs, lv.symmetry)

    def basis(self, m: int) -> list[tuple[int, int]]:
        return [(lv.J, lv.tau) for lv in self.levels if lv.J >= abs(m)]

    def energies(self, m: int) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels if lv.J >= abs(m)])

    def para_mask(self, m: int) -> np.ndarray:
        return np.array([lv.isomer is SpinIsomer.PARA for lv in self.levels if lv.J >= abs(m)])

    def eigenvector_matrix(self, m: int) -> np.ndarray:
        """Columns: eigenstates; rows: symmetric-top kets (J, k), J >= |m|."""
        blocks = [lv for lv in self.levels if lv.J >= abs(m)]
        n = len(blocks)
        out = np.zeros((n, n))
        offset = 0
        J0 = abs(m)
        for J in range(J0, self.jmax + 1):
            size = 2 * J + 1
            for col in range(size):
                lv = blocks[offset + col]
                out[offset : offset + size, offset + col] = lv.coeffs
            offset += size
        return out


def build_eigentable(spec: MolecularSpec, jmax: int) -> EigenstateTable:
    if jmax < 0:
        raise ValueError(f"jmax must be non-negative, got {jmax}")
    levels = []
    for J in range(jmax + 1):
        for st in solve_block(build_hamiltonian_block(spec, J), J):
            label, _ = classify_symmetry(st)
            levels.append(Level(st.J, st.tau, st.energy, st.coeffs, label))
    e0 = levels[0].energy
    levels = [Level(lv.J, lv.tau, lv.energy - e0, lv.coeffs, lv.symmetry) for lv in levels]
    return EigenstateTable(spec, jmax, tuple(levels))


def write_levels_csv(table: EigenstateTable, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["J", "tau", "energy_cm1", "symmetry", "isomer"])
        for lv in table.levels:
            writer.writerow([lv.J, lv.tau, f"{lv.energy:.12g}", lv.symmetry.name, lv.isomer.value])
