"""Thermal averaging over initial rotor eigenstates, one spin isomer at a time."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from waterspin.constants import KELVIN_TO_CM1
from waterspin.dynamics import (
    KickBank,
    PulseSequence,
    _segments,
    angular_frequencies,
    cos2theta_matrix,
)
from waterspin.errors import ConvergenceError
from waterspin.interaction import DEFAULT_ODE_STEPS
from waterspin.rotor import EigenstateTable, MolecularSpec, SpinIsomer, build_eigentable

log = logging.getLogger(__name__)

THREADS_ENV = "WATERSPIN_THREADS"
PRUNE_WEIGHT = 1e-8
JMAX_CAP = 30


@dataclass(frozen=True)
class ThermalSpec:
    temperature: float
    jmax: int = 12
    convergence_tol: float = 1e-4

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")
        if self.jmax < 0:
            raise ValueError(f"jmax must be >= 0, got {self.jmax}")

    @property
    def kT(self) -> float:
        """k_B T in cm^-1."""
        return self.temperature * KELVIN_TO_CM1


@dataclass(frozen=True)
class ThermalEnsemble:
    """Boltzmann-weighted initial states (J, tau, m) of one isomer.

    ``partition`` is the isomer's rotational partition function over the kept
    members, with energies measured from the isomer's lowest level.
    """

    isomer: SpinIsomer
    members: tuple[tuple[int, int, int], ...]
    weights: np.ndarray = field(repr=False)
    partition: float
    pruned_count: int = 0
    pruned_weight: float = 0.0


def boltzmann_weights(
    table: EigenstateTable, isomer: SpinIsomer, thermal: ThermalSpec, prune: float = PRUNE_WEIGHT
) -> ThermalEnsemble:
    if table.jmax < thermal.jmax:
        raise ValueError(f"table jmax {table.jmax} is below the thermal jmax {thermal.jmax}")
    levels = [lv for lv in table.levels if lv.isomer is isomer and lv.J <= thermal.jmax]
    e_min = min(lv.energy for lv in levels)
    members, boltz = [], []
    for lv in levels:
        w = np.exp(-(lv.energy - e_min) / thermal.kT)
        for m in range(-lv.J, lv.J + 1):
            members.append((lv.J, lv.tau, m))
            boltz.append(w)
    boltz = np.array(boltz)
    full = boltz / boltz.sum()
    keep = full >= prune
    kept = boltz[keep]
    return ThermalEnsemble(
        isomer=isomer,
        members=tuple(mb for mb, k in zip(members, keep) if k),
        weights=kept / kept.sum(),
        partition=float(kept.sum()),
        pruned_count=int((~keep).sum()),
        pruned_weight=float(full[~keep].sum()),
    )


@dataclass(frozen=True)
class AlignmentTrace:
    """Per-isomer <cos^2 theta>_T(t) and <E>_T(t) (cm^-1) on a time grid (ps)."""

    times: np.ndarray
    cos2: dict = field(default_factory=dict)
    energy: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def kick_energies(self, isomer: SpinIsomer) -> list[tuple[float, float]]:
        return self.meta[isomer]["kick_energies"]

    @property
    def isomers(self) -> list[SpinIsomer]:
        return [iso for iso in SpinIsomer if iso in self.cos2]

    def merge(self, other: AlignmentTrace) -> AlignmentTrace:
        if not np.array_equal(self.times, other.times):
            raise ValueError("cannot merge traces on different time grids")
        return AlignmentTrace(
            self.times,
            {**self.cos2, **other.cos2},
            {**self.energy, **other.energy},
            {**self.meta, **other.meta},
        )

    def max_abs_difference(self, other: AlignmentTrace) -> float:
        return max(
            float(np.max(np.abs(self.cos2[iso] - other.cos2[iso]))) for iso in self.isomers
        )


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _m_group_trace(table, isomer, m, weights_by_index, seq, times, kicks):
    sector = table.para_mask(m) == (isomer is SpinIsomer.PARA)
    idx = np.flatnonzero(sector)
    M = cos2theta_matrix(table, m)[np.ix_(idx, idx)]
    omega = angular_frequencies(table, m)[idx]
    energies = table.energies(m)[idx]
    rho = np.zeros((len(idx), len(idx)), dtype=complex)
    pos = {full: i for i, full in enumerate(idx)}
    for full_index, w in weights_by_index:
        rho[pos[full_index], pos[full_index]] += w

    cos2 = np.zeros_like(times)
    energy = np.zeros_like(times)
    kick_energies = np.zeros((len(seq), 2))
    # rho starts diagonal, so its reference time is arbitrary
    t_state = times[0]
    for i, (lo, hi) in enumerate(_segments(times, seq)):
        if i > 0:
            pulse = seq.pulses[i - 1]
            u = np.exp(-1j * omega * (pulse.t0 - t_state))
            rho = u[:, None] * rho * u.conj()[None, :]
            K = kicks.propagator(m, pulse)[np.ix_(idx, idx)]
            kick_energies[i - 1, 0] = np.real(np.diag(rho)) @ energies
            rho = K @ rho @ K.conj().T
            kick_energies[i - 1, 1] = np.real(np.diag(rho)) @ energies
            t_state = pulse.t0
        if hi > lo:
            U = np.exp(-1j * np.outer(times[lo:hi] - t_state, omega))
            A = M * rho.T
            values = np.einsum("ti,ij,tj->t", U.conj(), A, U, optimize=True)
            assert np.abs(values.imag).max(initial=0.0) <= 1e-10
            cos2[lo:hi] = values.real
            energy[lo:hi] = float(np.real(np.diag(rho)) @ energies)
    return cos2, energy, kick_energies


def thermal_trace(
    ensemble: ThermalEnsemble,
    seq: PulseSequence,
    grid,
    table: EigenstateTable,
    *,
    kicks: KickBank | None = None,
    m_symmetry: bool = True,
    threads: int | None = None,
) -> AlignmentTrace:
    """Boltzmann-weighted <cos^2 theta> and energy traces for one isomer.

    Members sharing m are propagated together as a density matrix restricted
    to the isomer's sector. With ``m_symmetry`` the m < 0 members are folded
    onto +|m|, whose traces are identical.
    """
    times = np.asarray(grid, dtype=float)
    if len(seq) and (seq.pulses[0].t0 < times[0] - 1e-12 or seq.pulses[-1].t0 > times[-1]):
        raise ValueError("time grid must cover every pulse")
    kicks = kicks or KickBank(table)
    by_m: dict[int, list] = {}
    for (J, tau, m), w in zip(ensemble.members, ensemble.weights):
        key = abs(m) if m_symmetry else m
        full_index = J * J + J + tau - abs(key) ** 2
        by_m.setdefault(key, []).append((full_index, w))
    ms = sorted(by_m)
    # fill generator caches serially; the KickBank dicts are not shared-write safe
    for m in ms:
        for pulse in seq:
            kicks.propagator(m, pulse)

    def work(m):
        return _m_group_trace(table, ensemble.isomer, m, by_m[m], seq, times, kicks)

    n_threads = threads or _thread_count()
    if n_threads > 1 and len(ms) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(work, ms))
    else:
        parts = [work(m) for m in ms]

    cos2 = np.zeros_like(times)
    energy = np.zeros_like(times)
    kick_energies = np.zeros((len(seq), 2))
    for c, e, k in parts:  # ordered reduction keeps results bit-stable
        cos2 += c
        energy += e
        kick_energies += k
    iso = ensemble.isomer
    return AlignmentTrace(
        times,
        {iso: cos2},
        {iso: energy},
        {
            iso: {
                "members": len(ensemble.members),
                "partition": ensemble.partition,
                "pruned_weight": ensemble.pruned_weight,
                "spin_weight": iso.weight,
                # (before, after) rotational energy for each kick, cm^-1
                "kick_energies": [tuple(map(float, row)) for row in kick_energies],
            }
        },
    )


@dataclass(frozen=True)
class Scenario:
    """Molecule, pulse train, output grid and isomers to simulate."""

    molecule: MolecularSpec
    sequence: PulseSequence
    times: np.ndarray = field(repr=False)
    isomers: tuple[SpinIsomer, ...] = (SpinIsomer.PARA, SpinIsomer.ORTHO)
    kick_method: str = "exact"
    ode_steps: int = DEFAULT_ODE_STEPS


def simulate_scenario(scenario: Scenario, thermal: ThermalSpec, table: EigenstateTable | None = None) -> AlignmentTrace:
    if table is None or table.jmax != thermal.jmax:
        table = build_eigentable(scenario.molecule, thermal.jmax)
    kicks = KickBank(table, method=scenario.kick_method, ode_steps=scenario.ode_steps)
    trace = None
    for iso in scenario.isomers:
        ens = boltzmann_weights(table, iso, thermal)
        part = thermal_trace(ens, scenario.sequence, scenario.times, table, kicks=kicks)
        trace = part if trace is None else trace.merge(part)
    return replace(trace, meta={**trace.meta, "jmax": thermal.jmax})


def converge_jmax(
    scenario: Scenario, thermal: ThermalSpec, start_jmax: int | None = None, cap: int = JMAX_CAP
) -> tuple[int, AlignmentTrace]:
    """Raise jmax in steps of 2 until consecutive traces agree to ``convergence_tol``.

    Returns the smaller jmax of the first agreeing pair and its trace.
    """
    jmax = thermal.jmax if start_jmax is None else start_jmax
    if jmax < 4:
        raise ValueError(f"start_jmax must be >= 4, got {jmax}")
    current = simulate_scenario(scenario, replace(thermal, jmax=jmax))
    while jmax + 2 <= cap:
        nxt = simulate_scenario(scenario, replace(thermal, jmax=jmax + 2))
        change = current.max_abs_difference(nxt)
        log.info("jmax %d -> %d: max trace change %.3g", jmax, jmax + 2, change)
        if change < thermal.convergence_tol:
            return jmax, current
        jmax, current = jmax + 2, nxt
    raise ConvergenceError(
        f"traces not converged to {thermal.convergence_tol:g} below the jmax cap {cap}"
    )
