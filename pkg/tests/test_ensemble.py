import numpy as np
import pytest

from waterspin.dynamics import KickBank, PulseSequence, run_sequence
from waterspin.ensemble import (
    Scenario,
    ThermalSpec,
    boltzmann_weights,
    converge_jmax,
    simulate_scenario,
    thermal_trace,
)
from waterspin.errors import ConvergenceError
from waterspin.interaction import PulseSpec
from waterspin.rotor import WATER, RotorEigenstate, SpinIsomer

PARA, ORTHO = SpinIsomer.PARA, SpinIsomer.ORTHO
ONE_PULSE = PulseSequence((PulseSpec(),))
SHORT_GRID = np.round(np.arange(0, 301) * 0.01, 12)
# converged basis size of the default single-pulse scenario at 20 K, tol 1e-4
CONVERGED_JMAX_20K = 4


def test_thermal_spec_validation():
    assert ThermalSpec(20.0).kT == pytest.approx(13.9, abs=0.05)
    with pytest.raises(ValueError):
        ThermalSpec(0.0)
    with pytest.raises(ValueError):
        ThermalSpec(10.0, jmax=-1)


def test_cold_para_is_ground_state(table6):
    ens = boltzmann_weights(table6, PARA, ThermalSpec(0.01, jmax=6))
    assert ens.members == ((0, 0, 0),)
    assert ens.weights.tolist() == [1.0]


def test_cold_ortho_is_lowest_b1_triplet(table6):
    ens = boltzmann_weights(table6, ORTHO, ThermalSpec(0.01, jmax=6))
    assert ens.members == ((1, -1, -1), (1, -1, 0), (1, -1, 1))
    assert np.allclose(ens.weights, 1 / 3, atol=1e-15)


def test_low_j_dominates_para_at_20k(table12):
    ens = boltzmann_weights(table12, PARA, ThermalSpec(20.0), prune=0.0)
    low = sum(w for (J, _, _), w in zip(ens.members, ens.weights) if J <= 4)
    assert low > 0.999


@pytest.mark.parametrize("T", [5.0, 20.0, 100.0])
@pytest.mark.parametrize("iso", [PARA, ORTHO])
def test_weights_normalized_and_m_complete(table12, T, iso):
    ens = boltzmann_weights(table12, iso, ThermalSpec(T))
    assert abs(ens.weights.sum() - 1) < 1e-12
    by_level = {}
    for (J, tau, m), w in zip(ens.members, ens.weights):
        assert table12.level(J, tau).isomer is iso
        by_level.setdefault((J, tau), []).append((m, w))
    for (J, _), entries in by_level.items():
        assert sorted(m for m, _ in entries) == list(range(-J, J + 1))
        assert np.ptp([w for _, w in entries]) == 0.0


def test_weights_follow_boltzmann_law(table12):
    thermal = ThermalSpec(20.0)
    ens = boltzmann_weights(table12, ORTHO, thermal, prune=0.0)
    e = np.array([table12.level(J, tau).energy for J, tau, _ in ens.members])
    expected = np.exp(-(e - e.min()) / thermal.kT)
    assert np.allclose(ens.weights, expected / expected.sum(), rtol=1e-12, atol=0)


def test_pruning_is_recorded(table12):
    ens = boltzmann_weights(table12, PARA, ThermalSpec(5.0))
    full = boltzmann_weights(table12, PARA, ThermalSpec(5.0), prune=0.0)
    assert ens.pruned_count > 0
    assert len(ens.members) + ens.pruned_count == len(full.members)
    assert 0 < ens.pruned_weight < 1e-6


def test_table_too_small_is_rejected(table6):
    with pytest.raises(ValueError):
        boltzmann_weights(table6, PARA, ThermalSpec(20.0, jmax=8))


@pytest.mark.parametrize("T", [5.0, 20.0, 100.0])
def test_zero_pulse_isotropy(table12, default_grid, T):
    thermal = ThermalSpec(T)
    for iso in (PARA, ORTHO):
        tr = thermal_trace(boltzmann_weights(table12, iso, thermal), PulseSequence(), default_grid, table12)
        assert np.max(np.abs(tr.cos2[iso] - 1 / 3)) < 1e-6


def test_pre_pulse_values(table12):
    grid = np.round(np.arange(-20, 101) * 0.01, 12)
    ens = boltzmann_weights(table12, ORTHO, ThermalSpec(20.0))
    tr = thermal_trace(ens, ONE_PULSE, grid, table12)
    pre = grid < 0
    e_thermal = sum(w * table12.level(J, tau).energy for (J, tau, _), w in zip(ens.members, ens.weights))
    assert np.max(np.abs(tr.cos2[ORTHO][pre] - 1 / 3)) < 1e-6
    assert np.allclose(tr.energy[ORTHO][pre], e_thermal, rtol=1e-12)
    assert tr.energy[ORTHO][-1] > e_thermal


@pytest.mark.parametrize("m", [1, 2, 3])
def test_m_and_minus_m_traces_agree(table12, m):
    kicks = KickBank(table12)
    for lv in table12.levels[m * m : m * m + 8]:
        plus = run_sequence(RotorEigenstate(lv.J, lv.tau, m, lv.energy, lv.coeffs), ONE_PULSE, SHORT_GRID, table12, kicks=kicks)
        minus = run_sequence(RotorEigenstate(lv.J, lv.tau, -m, lv.energy, lv.coeffs), ONE_PULSE, SHORT_GRID, table12, kicks=kicks)
        assert np.max(np.abs(plus.cos2 - minus.cos2)) < 1e-12


@pytest.mark.parametrize("iso", [PARA, ORTHO])
def test_trace_is_weighted_sum_of_members(table6, iso):
    ens = boltzmann_weights(table6, iso, ThermalSpec(10.0, jmax=6), prune=1e-4)
    seq = PulseSequence((PulseSpec(), PulseSpec(t0=1.9)))
    fast = thermal_trace(ens, seq, SHORT_GRID, table6)
    slow = thermal_trace(ens, seq, SHORT_GRID, table6, m_symmetry=False, threads=1)
    kicks = KickBank(table6)
    cos2 = np.zeros_like(SHORT_GRID)
    energy = np.zeros_like(SHORT_GRID)
    for (J, tau, m), w in zip(ens.members, ens.weights):
        lv = table6.level(J, tau)
        tr = run_sequence(RotorEigenstate(J, tau, m, lv.energy, lv.coeffs), seq, SHORT_GRID, table6, kicks=kicks)
        cos2 += w * tr.cos2
        energy += w * tr.energy
    for tr in (fast, slow):
        assert np.max(np.abs(tr.cos2[iso] - cos2)) < 1e-12
        assert np.max(np.abs(tr.energy[iso] - energy)) < 1e-10


def test_thread_count_does_not_change_bits(table12, default_grid, monkeypatch):
    ens = boltzmann_weights(table12, ORTHO, ThermalSpec(20.0))
    runs = []
    for n in ("1", "4"):
        monkeypatch.setenv("WATERSPIN_THREADS", n)
        runs.append(thermal_trace(ens, ONE_PULSE, default_grid, table12))
    assert np.array_equal(runs[0].cos2[ORTHO], runs[1].cos2[ORTHO])
    assert np.array_equal(runs[0].energy[ORTHO], runs[1].energy[ORTHO])


def test_simulate_scenario_metadata(table12, default_grid):
    tr = simulate_scenario(Scenario(WATER, ONE_PULSE, default_grid), ThermalSpec(20.0), table12)
    assert tr.isomers == [PARA, ORTHO]
    assert tr.meta["jmax"] == 12
    assert tr.meta[ORTHO]["spin_weight"] == 3 and tr.meta[PARA]["spin_weight"] == 1
    (before, after), = tr.kick_energies(ORTHO)
    assert after > before


def test_converge_zero_pulse_stops_at_start(default_grid):
    jmax, tr = converge_jmax(Scenario(WATER, PulseSequence(), default_grid), ThermalSpec(20.0), start_jmax=4)
    assert jmax == 4
    assert tr.meta["jmax"] == 4


def test_converge_unreachable_tolerance_raises():
    grid = np.round(np.arange(0, 101) * 0.02, 12)
    with pytest.raises(ConvergenceError):
        converge_jmax(Scenario(WATER, ONE_PULSE, grid), ThermalSpec(20.0, convergence_tol=0.0), start_jmax=4, cap=8)


def test_converge_start_must_be_at_least_four(default_grid):
    with pytest.raises(ValueError):
        converge_jmax(Scenario(WATER, ONE_PULSE, default_grid), ThermalSpec(20.0), start_jmax=2)


def test_converge_default_pulse_regression(default_grid):
    jmax, _ = converge_jmax(Scenario(WATER, ONE_PULSE, default_grid), ThermalSpec(20.0), start_jmax=4)
    assert jmax <= 14
    assert jmax == CONVERGED_JMAX_20K
