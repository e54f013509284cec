"""Command-line entry point: ``waterspin run|scan|levels``.

Exit status: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
The parallel ensemble map uses ``WATERSPIN_THREADS`` threads (default: CPU count).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from waterspin.config import RunConfig, ScanConfig, load_config
from waterspin.dynamics import PulseSequence
from waterspin.ensemble import AlignmentTrace, Scenario, converge_jmax, simulate_scenario
from waterspin.errors import ConfigError, NumericalError
from waterspin.interaction import PulseSpec, kick_strengths
from waterspin.rotor import SpinIsomer, build_eigentable, write_levels_csv

log = logging.getLogger("waterspin")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

CSV_COLUMNS = ("time_ps", "cos2_para", "cos2_ortho", "e_para_cm1", "e_ortho_cm1")
_FMT = "{:.12g}"


def _scenario(config: RunConfig, pulses: PulseSequence | None = None) -> Scenario:
    return Scenario(
        molecule=config.molecule,
        sequence=config.pulses if pulses is None else pulses,
        times=config.grid.times,
        isomers=config.isomers,
        kick_method=config.kick_method,
        ode_steps=config.ode_steps,
    )


def _extremum(times, values, fn):
    i = int(fn(values))
    return float(values[i]), float(times[i])


def simulate(config: RunConfig) -> tuple[AlignmentTrace, dict]:
    """Run one configured scenario; returns the trace and a summary record."""
    scenario = _scenario(config)
    if config.converge:
        jmax, trace = converge_jmax(scenario, config.thermal)
    else:
        jmax = config.thermal.jmax
        table = build_eigentable(config.molecule, jmax)
        for pulse in config.pulses:
            pulse.is_impulsive(table)
        trace = simulate_scenario(scenario, config.thermal, table)

    summary = {
        "temperature_k": config.thermal.temperature,
        "jmax": jmax,
        "converged": config.converge,
        "pulses": [
            {
                "t0_ps": p.t0,
                "intensity_w_cm2": p.peak_intensity,
                "sigma_fs": p.sigma,
                "beta1": kick_strengths(p, config.molecule).beta1,
                "beta2": kick_strengths(p, config.molecule).beta2,
            }
            for p in config.pulses
        ],
        "isomers": {},
    }
    for iso in trace.isomers:
        c2 = trace.cos2[iso]
        hi, t_hi = _extremum(trace.times, c2, np.argmax)
        lo, t_lo = _extremum(trace.times, c2, np.argmin)
        meta = trace.meta[iso]
        summary["isomers"][iso.value] = {
            "cos2_max": hi,
            "t_max_ps": t_hi,
            "cos2_min": lo,
            "t_min_ps": t_lo,
            "kick_energies_cm1": [
                {"before": b, "after": a} for b, a in meta["kick_energies"]
            ],
            "members": meta["members"],
            "pruned_weight": meta["pruned_weight"],
            "spin_weight": meta["spin_weight"],
        }
    return trace, summary


def write_csv(trace: AlignmentTrace, path) -> None:
    """Write the trace; species that were not simulated get no columns."""
    data = {"time_ps": trace.times}
    for iso in trace.isomers:
        data[f"cos2_{iso.value}"] = trace.cos2[iso]
        data[f"e_{iso.value}_cm1"] = trace.energy[iso]
    cols = [c for c in CSV_COLUMNS if c in data]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in zip(*(data[c] for c in cols)):
            writer.writerow([_FMT.format(float(v)) for v in row])


def read_csv(path) -> AlignmentTrace:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    data = {name: body[:, i] for i, name in enumerate(header)}
    cos2, energy = {}, {}
    for iso in SpinIsomer:
        if f"cos2_{iso.value}" in data:
            cos2[iso] = data[f"cos2_{iso.value}"]
            energy[iso] = data[f"e_{iso.value}_cm1"]
    return AlignmentTrace(data["time_ps"], cos2, energy)


def summary_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".summary.json")


def write_summary(summary: dict, csv_path) -> Path:
    out = summary_path(csv_path)
    out.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return out


@dataclass(frozen=True)
class ScanResult:
    objective: str
    delays: np.ndarray
    values: np.ndarray

    @property
    def best_index(self) -> int:
        if self.objective == "ortho_energy_suppression":
            return int(np.argmin(self.values))
        return int(np.argmax(self.values))

    @property
    def best_delay(self) -> float:
        return float(self.delays[self.best_index])


def scan_delay(config: ScanConfig) -> ScanResult:
    """Two identical pulses; score each delay of the second one by the objective."""
    base = config.base
    first = base.pulses.pulses[0]
    if config.objective == "ortho_energy_suppression":
        isomers = (SpinIsomer.ORTHO,)
    else:
        isomers = (SpinIsomer.PARA, SpinIsomer.ORTHO)
    table = build_eigentable(base.molecule, base.thermal.jmax)
    values = []
    for delay in config.delays:
        second = PulseSpec(first.peak_intensity, first.sigma, first.t0 + float(delay))
        scenario = replace(_scenario(base, PulseSequence((first, second))), isomers=isomers)
        trace = simulate_scenario(scenario, base.thermal, table)
        if config.objective == "ortho_energy_suppression":
            before, after = trace.kick_energies(SpinIsomer.ORTHO)[1]
            values.append(after - before)
        else:
            window = trace.times >= second.t0
            diff = trace.cos2[SpinIsomer.PARA][window] - trace.cos2[SpinIsomer.ORTHO][window]
            values.append(float(np.max(np.abs(diff))))
    return ScanResult(config.objective, np.asarray(config.delays), np.asarray(values))


def write_scan_csv(result: ScanResult, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delay_ps", result.objective])
        for d, v in zip(result.delays, result.values):
            writer.writerow([_FMT.format(float(d)), _FMT.format(float(v))])


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="CSV output path (overrides output_path)")
    common.add_argument("--jmax", type=int, help="basis truncation (overrides jmax)")
    common.add_argument("--converge", action="store_true", help="raise jmax until traces converge")
    common.add_argument("--species", choices=("para", "ortho", "both"))
    common.add_argument("--quiet", action="store_true", help="only report errors")

    parser = argparse.ArgumentParser(prog="waterspin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="simulate the configured pulse sequence")
    run.add_argument("config")
    scan = sub.add_parser("scan", parents=[common], help="scan the delay of an identical second pulse")
    scan.add_argument("config")
    levels = sub.add_parser("levels", help="dump classified rotor levels of the default molecule")
    levels.add_argument("--jmax", type=int, default=6)
    levels.add_argument("--output", default="levels.csv")
    return parser


def _apply_overrides(run: RunConfig, args) -> RunConfig:
    changes = {}
    if args.output:
        changes["output_path"] = args.output
    if args.species:
        changes["species"] = args.species
    if args.converge:
        changes["converge"] = True
    if args.jmax is not None:
        if args.jmax < 0:
            raise ConfigError("--jmax must be >= 0")
        changes["thermal"] = replace(run.thermal, jmax=args.jmax)
    return replace(run, **changes)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.ERROR if quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "levels":
            from waterspin.rotor import WATER

            write_levels_csv(build_eigentable(WATER, args.jmax), args.output)
            return EXIT_OK

        config = load_config(args.config)
        if args.command == "run":
            if isinstance(config, ScanConfig):
                config = config.base
            config = _apply_overrides(config, args)
            trace, summary = simulate(config)
            write_csv(trace, config.output_path)
            side = write_summary(summary, config.output_path)
            log.info("wrote %s and %s", config.output_path, side)
        else:
            if not isinstance(config, ScanConfig):
                raise ConfigError("scan requires a 'scan' section in the configuration")
            base = _apply_overrides(config.base, args)
            config = replace(config, base=base)
            result = scan_delay(config)
            write_scan_csv(result, base.output_path)
            summary = {
                "objective": result.objective,
                "best_delay_ps": result.best_delay,
                "best_value": float(result.values[result.best_index]),
                "jmax": base.thermal.jmax,
                "temperature_k": base.thermal.temperature,
            }
            write_summary(summary, base.output_path)
            log.info("best delay %.3f ps (%s = %.6g)", result.best_delay, result.objective,
                     summary["best_value"])
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
