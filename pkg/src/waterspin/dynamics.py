"""Field-free propagation, observables and delta-pulse sequencing for one wavepacket."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from waterspin.angular import rank2_matrix
from waterspin.constants import CM1_TO_RAD_PER_PS
from waterspin.interaction import (
    DEFAULT_ODE_STEPS,
    KickGenerator,
    PulseSpec,
    apply_kick_exact,
    apply_kick_ode,
    build_kick_generator,
    kick_strengths,
)
from waterspin.rotor import EigenstateTable, RotorEigenstate

NORM_TOL = 1e-10
IMAG_TOL = 1e-10
# pulses closer than this many sigmas overlap and cannot be treated as separate kicks
PULSE_SEPARATION_SIGMAS = 5.0


@dataclass(frozen=True)
class WavepacketState:
    """Amplitudes over the (J, tau) eigenbasis at fixed m; ``t`` in ps."""

    m: int
    amplitudes: np.ndarray = field(repr=False)
    t: float = 0.0

    @classmethod
    def from_eigenstate(cls, table: EigenstateTable, J: int, tau: int, m: int, t: float = 0.0):
        basis = table.basis(m)
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.index((J, tau))] = 1.0
        return cls(m=m, amplitudes=amps, t=t)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple[PulseSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        for a, b in zip(self.pulses, self.pulses[1:]):
            if not b.t0 > a.t0:
                raise ValueError("pulse arrival times must be strictly increasing")
            if (b.t0 - a.t0) * 1e3 <= PULSE_SEPARATION_SIGMAS * a.sigma:
                raise ValueError(
                    f"pulses at {a.t0} ps and {b.t0} ps overlap "
                    f"(separation must exceed {PULSE_SEPARATION_SIGMAS:g} sigma)"
                )

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)


def angular_frequencies(table: EigenstateTable, m: int) -> np.ndarray:
    """Level energies as angular frequencies, rad/ps."""
    return CM1_TO_RAD_PER_PS * table.energies(m)


def free_propagate(state: WavepacketState, table: EigenstateTable, dt: float) -> WavepacketState:
    phases = np.exp(-1j * angular_frequencies(table, state.m) * dt)
    return WavepacketState(state.m, phases * state.amplitudes, state.t + dt)


def cos2theta_matrix(table: EigenstateTable, m: int) -> np.ndarray:
    """``cos^2(theta) = (2 D^2_00 + 1) / 3`` in the (J, tau) eigenbasis."""
    V = table.eigenvector_matrix(m)
    D = V.T @ rank2_matrix(table.jmax, m, 0) @ V
    M = (2.0 * D + np.eye(len(D))) / 3.0
    return 0.5 * (M + M.T)


def expect_cos2(state, cos2_matrix: np.ndarray) -> float:
    c = np.asarray(getattr(state, "amplitudes", state))
    value = np.vdot(c, cos2_matrix @ c)
    assert abs(value.imag) <= IMAG_TOL, f"<cos^2> has imaginary part {value.imag}"
    return float(value.real)


def expect_energy(state, table: EigenstateTable) -> float:
    """Rotational energy expectation in cm^-1."""
    return float(np.sum(np.abs(state.amplitudes) ** 2 * table.energies(state.m)))


@dataclass(frozen=True)
class StateTrace:
    times: np.ndarray
    cos2: np.ndarray
    energy: np.ndarray


class KickBank:
    """Kick generators and propagators per (m, pulse), built once and reused."""

    def __init__(self, table: EigenstateTable, method: str = "exact", ode_steps: int = DEFAULT_ODE_STEPS):
        if method not in ("exact", "ode"):
            raise ValueError(f"kick method must be 'exact' or 'ode', got {method!r}")
        self.table = table
        self.method = method
        self.ode_steps = ode_steps
        self._generators: dict = {}
        self._propagators: dict = {}

    def generator(self, m: int, pulse: PulseSpec) -> KickGenerator:
        betas = kick_strengths(pulse, self.table.molecule)
        key = (m, betas)
        if key not in self._generators:
            self._generators[key] = build_kick_generator(betas, self.table, m)
        return self._generators[key]

    def kick(self, state: WavepacketState, pulse: PulseSpec) -> WavepacketState:
        G = self.generator(state.m, pulse)
        if self.method == "ode":
            return apply_kick_ode(state, G, self.ode_steps)
        return apply_kick_exact(state, G)

    def propagator(self, m: int, pulse: PulseSpec) -> np.ndarray:
        G = self.generator(m, pulse)
        key = (m, kick_strengths(pulse, self.table.molecule))
        if key not in self._propagators:
            if self.method == "ode":
                eye = np.eye(G.dim, dtype=complex)
                self._propagators[key] = apply_kick_ode(eye, G, self.ode_steps)
            else:
                self._propagators[key] = G.propagator()
        return self._propagators[key]


def _segments(times: np.ndarray, seq: PulseSequence):
    # sample index ranges between kicks; a sample at exactly t0 sees the kick (t0+)
    bounds = [np.searchsorted(times, p.t0, side="left") for p in seq]
    edges = [0, *bounds, len(times)]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def run_sequence(
    initial: RotorEigenstate,
    seq: PulseSequence,
    grid,
    table: EigenstateTable,
    *,
    kicks: KickBank | None = None,
    t_initial: float | None = None,
) -> StateTrace:
    """Trace of <cos^2 theta>(t) and E(t) for one initial eigenstate.

    Delta kicks act at each pulse's ``t0``; between kicks the evolution is the
    exact phase factor, so ``grid`` only sets the output resolution.
    """
    times = np.asarray(grid, dtype=float)
    kicks = kicks or KickBank(table)
    m = initial.m
    M = cos2theta_matrix(table, m)
    omega = angular_frequencies(table, m)
    energies = table.energies(m)
    t_ref = min([times[0], *(p.t0 for p in seq)]) if t_initial is None else t_initial
    if len(seq) and (seq.pulses[0].t0 < t_ref or seq.pulses[-1].t0 > times[-1]):
        raise ValueError("time grid must cover every pulse")

    state = WavepacketState.from_eigenstate(table, initial.J, initial.tau, m, t_ref)
    cos2 = np.empty_like(times)
    energy = np.empty_like(times)
    for i, (lo, hi) in enumerate(_segments(times, seq)):
        if i > 0:
            pulse = seq.pulses[i - 1]
            state = kicks.kick(free_propagate(state, table, pulse.t0 - state.t), pulse)
        if hi > lo:
            U = np.exp(-1j * np.outer(times[lo:hi] - state.t, omega)) * state.amplitudes
            values = np.einsum("ti,ij,tj->t", U.conj(), M, U)
            assert np.abs(values.imag).max() <= IMAG_TOL
            cos2[lo:hi] = values.real
            energy[lo:hi] = np.abs(state.amplitudes) ** 2 @ energies
    return StateTrace(times, cos2, energy)

