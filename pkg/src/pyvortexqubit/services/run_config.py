"""
Experiment Runner

Dispatch from a validated `ExperimentConfig` to the matching experiment,
with every artifact written atomically and stamped with the config hash
and package version.

Supported Experiments
---------------------
- mz-prepare: interferometer settings and output ports
- chirp: chirped transfer in the harmonic trap
- stirap: pulsed transfer in the harmonic trap
- overlap-sweep: final F versus pulse separation
- mexican-hat: pulsed transfer with Thomas-Fermi modes
- detect: interference-pattern analysis of vortex superpositions
- validate-integrals: numeric versus closed-form harmonic integrals
- five-level-check: five-level versus eliminated model
"""

# Built-Ins
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Protocol
import logging
import math

# Dependencies
import numpy as np

# Local Imports
from pyvortexqubit import __version__
from pyvortexqubit.config import (
    DetectCase,
    ExperimentConfig,
    HarmonicTrapConfig,
    MexicanHatTrapConfig,
)
from pyvortexqubit.custom_types import (
    ExperimentName,
    OutputFormat,
    ProfileKind,
)
from pyvortexqubit.exceptions import (
    AnalysisError,
    ConfigurationError,
    StateError,
)
from pyvortexqubit.services.detection import (
    DensityGrid,
    HarmonicProfile,
    RadialProfile,
    ThomasFermiProfile,
    VortexSuperposition,
    count_lobes,
    disambiguate_amplitudes,
    peak_ring_radius,
    pattern_rotation,
    probe_shift,
    render_grid,
    visibility,
)
from pyvortexqubit.services.dynamics import Trajectory, transfer_time
from pyvortexqubit.services.experiments import (
    EXCITED_NOTE,
    overlap_sweep,
    require_five_level_bounds,
    run_chirp_experiment,
    run_five_level_check,
    run_general_experiment,
    run_mexican_hat_experiment,
    run_stirap_experiment,
    validate_harmonic_integrals,
)
from pyvortexqubit.services.oam_optics import (
    OamSuperposition,
    mach_zehnder,
    splitter_for_superposition,
)
from pyvortexqubit.services.spatial_integrals import (
    IntegralCache,
    harmonic_analytic_integrals,
)
from pyvortexqubit.services.traps import HarmonicTrap, MexicanHatTrap
from pyvortexqubit.services.write_outputs import (
    Provenance,
    write_summary,
    write_table,
)

logger = logging.getLogger(__name__)

CHIRP_TOLERANCE = 1e-12
DEFAULT_TOLERANCE = 1e-10
CHIRP_SAMPLES = 2001
DEFAULT_SAMPLES = 1001


# ---- Artifacts ----
@dataclass
class ArtifactSink:
    """Writes the artifacts of one run and remembers their paths."""

    directory: Path
    stem: str
    fmt: OutputFormat
    provenance: Provenance
    written: list[Path] = field(default_factory=list)

    def table(
        self,
        suffix: str,
        columns: Mapping[str, np.ndarray],
        metadata: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        path = write_table(
            self.directory / f"{self.stem}_{suffix}",
            columns,
            self.fmt,
            self.provenance,
            metadata,
        )
        self.written.append(path)
        return path

    def grid(self, suffix: str, grid: DensityGrid) -> Path:
        if self.fmt == "csv":
            return self.table(suffix, grid.to_csv_rows())
        path = write_summary(
            self.directory / f"{self.stem}_{suffix}",
            grid.to_json_dict(),
            self.provenance,
            key="grid",
        )
        self.written.append(path)
        return path

    def summary(self, summary: Mapping[str, Any]) -> Path:
        path = write_summary(
            self.directory / f"{self.stem}_summary", summary, self.provenance
        )
        self.written.append(path)
        return path


@dataclass(frozen=True)
class Outcome:
    """What an experiment reports back: a summary and a one-line headline."""

    summary: dict[str, Any]
    headline: str


@dataclass(frozen=True)
class RunResult:
    name: str
    experiment: ExperimentName
    config_hash: str
    artifacts: tuple[Path, ...]
    summary: dict[str, Any]
    headline: str

    def summary_line(self) -> str:
        return (
            f"{self.name} [{self.experiment}] {self.headline} "
            f"(config {self.config_hash[:12]}, v{__version__})"
        )


# ---- Helpers ----
def _tolerance(config: ExperimentConfig, default: float) -> float:
    tol = config.output.tolerance
    return default if tol is None else tol


def _samples(config: ExperimentConfig, default: int) -> int:
    samples = config.output.samples
    return default if samples is None else samples


def _harmonic_setup(config: ExperimentConfig) -> tuple[HarmonicTrap, float]:
    """Trap and κ; the config validator guarantees both sections."""
    assert isinstance(config.trap, HarmonicTrapConfig)
    assert config.condensate is not None
    trap = config.trap.build()
    return trap, config.condensate.kappa_for(trap)


def _trajectory_outcome(
    trajectory: Trajectory, extra: Optional[dict[str, Any]] = None
) -> Outcome:
    final = trajectory.final
    pops = final.populations()
    summary: dict[str, Any] = {
        "final_F": float(trajectory.f_values[-1]),
        "final_populations": {
            "alpha": float(pops[0]),
            "beta": float(pops[1]),
            "gamma": float(pops[2]),
        },
        "transfer_time": transfer_time(trajectory),
        "norm_drift": trajectory.metadata.get("norm_drift"),
    }
    summary.update(extra or {})
    headline = (
        f"final F={summary['final_F']:.6f} |α|²={pops[0]:.6f} "
        f"|β|²={pops[1]:.6f} |γ|²={pops[2]:.6f}"
    )
    return Outcome(summary, headline)


# ---- Runners ----
class ExperimentRunner(Protocol):
    def __call__(self, config: ExperimentConfig, sink: ArtifactSink) -> Outcome: ...

    """
    Run one experiment and write its artifacts through `sink`.

    Returns
    -------
    outcome: Outcome
        Summary values (also written to the summary artifact by the caller)
        and the headline printed by the CLI.
    """


def _run_mz_prepare(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    optics = config.optics
    assert optics is not None
    a_plus, a_minus = optics.amplitudes
    bs1, phase = splitter_for_superposition(a_plus, a_minus)
    ports = mach_zehnder(bs1, phase, optics.ell, optics.u0)
    charges = sorted(set(ports.port1.charges) | set(ports.port2.charges))
    p1 = np.array([ports.port1.amplitude(ell) for ell in charges])
    p2 = np.array([ports.port2.amplitude(ell) for ell in charges])
    sink.table(
        "ports",
        {
            "charge": np.array(charges, dtype=float),
            "re_port1": p1.real,
            "im_port1": p1.imag,
            "re_port2": p2.real,
            "im_port2": p2.imag,
        },
    )
    target = OamSuperposition({optics.ell: a_plus, -optics.ell: a_minus})
    emitted = ports.port1.normalize()
    overlap = sum(
        target.amplitude(ell).conjugate() * emitted.amplitude(ell)
        for ell in charges
    )
    fidelity = abs(overlap) ** 2
    summary = {
        "splitter": {"r_tilde": abs(bs1.r), "t_tilde": abs(bs1.t)},
        "phase": phase,
        "port1_populations": {
            str(k): v for k, v in emitted.populations().items()
        },
        "port1_power": ports.port1.norm() ** 2,
        "total_power": ports.total_norm_squared(),
        "fidelity": fidelity,
    }
    headline = f"fidelity={fidelity:.12f} phase={phase:.6f}"
    return Outcome(summary, headline)


def _run_chirp(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    chirp = config.chirp
    assert chirp is not None
    trap, kappa = _harmonic_setup(config)
    trajectory = run_chirp_experiment(
        kappa,
        trap.omega_perp,
        chirp.build(),
        *chirp.amplitudes,
        t_span=chirp.window,
        tol=_tolerance(config, CHIRP_TOLERANCE),
        samples=_samples(config, CHIRP_SAMPLES),
    )
    sink.table("trajectory", trajectory.columns(), trajectory.metadata)
    return _trajectory_outcome(trajectory, {"kappa": kappa})


def _run_stirap(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    drive_section, pulses_section = config.drive, config.pulses
    assert drive_section is not None and pulses_section is not None
    trap, kappa = _harmonic_setup(config)
    drive = drive_section.build()
    pulses = pulses_section.build()
    tol = _tolerance(config, DEFAULT_TOLERANCE)
    samples = _samples(config, DEFAULT_SAMPLES)
    if drive_section.beam_waist is None:
        trajectory = run_stirap_experiment(
            kappa,
            trap.omega_perp,
            drive,
            pulses,
            pulses_section.window,
            tol,
            samples,
        )
    else:
        integrals = harmonic_analytic_integrals(
            trap, kappa, drive_section.beam_waist
        )
        trajectory = run_general_experiment(
            integrals, drive, pulses, 0.0, pulses_section.window, tol, samples
        )
    sink.table("trajectory", trajectory.columns(), trajectory.metadata)
    return _trajectory_outcome(trajectory, {"kappa": kappa})


def _run_overlap_sweep(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    drive_section, pulses_section, sweep = (
        config.drive,
        config.pulses,
        config.sweep,
    )
    assert drive_section is not None and pulses_section is not None
    assert sweep is not None
    trap, kappa = _harmonic_setup(config)
    result = overlap_sweep(
        kappa,
        trap.omega_perp,
        drive_section.build(),
        pulses_section.build(),
        sweep.values(),
        sweep.midpoint,
        _tolerance(config, DEFAULT_TOLERANCE),
        sweep.max_workers,
    )
    sink.table("sweep", result.columns(), {"midpoint": result.midpoint})
    best_sep, best_f = result.best()
    summary = {
        "kappa": kappa,
        "best_separation": best_sep,
        "best_final_F": best_f,
        "final_F": dict(
            zip(
                (f"{s:.6g}" for s in result.separations),
                result.final_f.tolist(),
            )
        ),
    }
    headline = (
        f"best final F={best_f:.6f} at t1-t2={best_sep:.6g} "
        f"over {result.separations.size} separations"
    )
    return Outcome(summary, headline)


def _run_mexican_hat(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    drive_section, pulses_section = config.drive, config.pulses
    assert drive_section is not None and pulses_section is not None
    assert isinstance(config.trap, MexicanHatTrapConfig)
    assert config.condensate is not None
    trap = config.trap.build()
    condensate = config.condensate.build(trap.mass)
    cache_dir = config.quadrature.cache_dir
    trajectory = run_mexican_hat_experiment(
        trap,
        condensate,
        drive_section.build(),
        pulses_section.build(),
        drive_section.beam_waist,
        config.quadrature.build(),
        None if cache_dir is None else IntegralCache(cache_dir),
        pulses_section.window,
        _tolerance(config, DEFAULT_TOLERANCE),
        _samples(config, DEFAULT_SAMPLES),
    )
    sink.table("trajectory", trajectory.columns(), trajectory.metadata)
    meta = trajectory.metadata
    ratio = None
    if meta.get("transfer_time") and meta.get("harmonic_transfer_time"):
        ratio = meta["transfer_time"] / meta["harmonic_transfer_time"]
    return _trajectory_outcome(
        trajectory,
        {
            "mu": meta["mu"],
            "beam_waist": meta["beam_waist"],
            "harmonic_transfer_time": meta.get("harmonic_transfer_time"),
            "transfer_time_ratio": ratio,
        },
    )


def _detect_profile(config: ExperimentConfig) -> tuple[RadialProfile, float]:
    """Radial profile and its length unit in metres (1 for L⊥ units)."""
    detect = config.detect
    assert detect is not None
    match detect.profile:
        case ProfileKind.THOMAS_FERMI:
            assert isinstance(config.trap, MexicanHatTrapConfig)
            assert config.condensate is not None
            trap: MexicanHatTrap = config.trap.build()
            condensate = config.condensate.build(trap.mass)
            return ThomasFermiProfile.solved(trap, condensate), trap.l_perp
        case _:
            return HarmonicProfile(), 1.0


def _case_state(
    case: DetectCase, ell: int, profile: RadialProfile, theta: float
) -> VortexSuperposition:
    state = VortexSuperposition.from_populations(
        case.population_plus, theta, ell, profile
    )
    return probe_shift(state) if case.probe_shift else state


def _analyze_case(
    case: DetectCase,
    ell: int,
    profile: RadialProfile,
    n: int,
    extent: Optional[float],
    sink: Optional[ArtifactSink],
) -> dict[str, Any]:
    state = _case_state(case, ell, profile, case.theta)
    grid = render_grid(state, n, n, extent)
    if sink is not None:
        sink.grid(f"grid_{case.label}", grid)
    row: dict[str, Any] = {
        "label": case.label,
        "ell1": state.ell1,
        "ell2": state.ell2,
        "visibility_closed_form": visibility(state),
        "ring_radius": peak_ring_radius(grid),
    }
    try:
        row["visibility_grid"] = visibility(grid)
    except AnalysisError as err:
        logger.warning("Case %s: %s", case.label, err)
        row["visibility_grid"] = None
    try:
        row["lobe_count"] = count_lobes(grid)
    except AnalysisError as err:
        logger.warning("Case %s: %s", case.label, err)
        row["lobe_count"] = None
    row["rotation"] = 0.0
    if case.theta != 0.0:
        reference = render_grid(_case_state(case, ell, profile, 0.0), n, n, extent)
        try:
            row["rotation"] = pattern_rotation(grid, reference)
        except AnalysisError as err:
            logger.warning("Case %s: %s", case.label, err)
            row["rotation"] = None
    if case.probe_shift:
        unshifted = render_grid(
            VortexSuperposition.from_populations(
                case.population_plus, case.theta, ell, profile
            ),
            n,
            n,
            extent,
        )
        assignment = disambiguate_amplitudes(
            visibility(unshifted), grid, ell, profile
        )
        row["recovered_alpha"] = assignment.alpha
        row["recovered_beta"] = assignment.beta
        row["assignment_symmetric"] = assignment.symmetric
    return row


def _as_float(value: Any) -> float:
    return math.nan if value is None else float(value)


def _run_detect(config: ExperimentConfig, sink: ArtifactSink) -> Outcome:
    detect = config.detect
    assert detect is not None
    profile, unit = _detect_profile(config)
    extent = None if detect.extent is None else detect.extent * unit
    rows = [
        _analyze_case(
            case,
            detect.ell,
            profile,
            detect.grid,
            extent,
            sink if detect.save_grids else None,
        )
        for case in detect.cases
    ]
    columns = {
        "case": np.arange(len(rows), dtype=float),
        "population_plus": np.array([c.population_plus for c in detect.cases]),
        "theta": np.array([c.theta for c in detect.cases]),
        "probe_shift": np.array([float(c.probe_shift) for c in detect.cases]),
    }
    for key in (
        "ell1",
        "ell2",
        "visibility_closed_form",
        "visibility_grid",
        "lobe_count",
        "rotation",
        "ring_radius",
    ):
        columns[key] = np.array([_as_float(row[key]) for row in rows])
    sink.table(
        "analysis",
        columns,
        {"labels": [c.label for c in detect.cases], "profile": detect.profile},
    )
    errors = [
        abs(row["visibility_grid"] - row["visibility_closed_form"])
        for row in rows
        if row["visibility_grid"] is not None
    ]
    worst = max(errors, default=math.nan)
    summary = {
        "cases": rows,
        "max_visibility_error": worst,
        "grid": detect.grid,
    }
    lobes = ", ".join(f"{row['label']}={row['lobe_count']}" for row in rows)
    headline = f"{len(rows)} cases, max |ΔV|={worst:.3e}, lobes: {lobes}"
    return Outcome(summary, headline)


def _run_validate_integrals(
    config: ExperimentConfig, sink: ArtifactSink
) -> Outcome:
    assert isinstance(config.trap, HarmonicTrapConfig)
    assert config.condensate is not None
    trap = config.trap.build()
    condensate = config.condensate.build(trap.mass)
    w = None if config.drive is None else config.drive.beam_waist
    errors = validate_harmonic_integrals(
        trap,
        condensate,
        w,
        config.quadrature.build(),
        config.integral_check.rel_tol,
    )
    worst = max(errors, key=errors.__getitem__)
    summary = {
        "relative_errors": errors,
        "worst": worst,
        "rel_tol": config.integral_check.rel_tol,
    }
    headline = (
        f"{len(errors)} integrals within {config.integral_check.rel_tol:g}, "
        f"worst {worst}={errors[worst]:.3e}"
    )
    return Outcome(summary, headline)


def _run_five_level_check(
    config: ExperimentConfig, sink: ArtifactSink
) -> Outcome:
    drive_section, pulses_section = config.drive, config.pulses
    assert drive_section is not None and pulses_section is not None
    trap, kappa = _harmonic_setup(config)
    integrals = harmonic_analytic_integrals(trap, kappa, drive_section.beam_waist)
    report = run_five_level_check(
        integrals,
        drive_section.build(),
        pulses_section.build(),
        0.0,
        pulses_section.window,
        _tolerance(config, DEFAULT_TOLERANCE),
        _samples(config, DEFAULT_SAMPLES),
    )
    sink.table("three_level", report.three_level.columns())
    sink.table("five_level", report.five_level.columns())
    bounds = config.five_level
    summary: dict[str, Any] = dict(report.summary())
    summary["bounds"] = bounds.model_dump()
    if bounds.max_excited is not None:
        summary["excited_note"] = EXCITED_NOTE
    # summary goes out before the bounds check so a failing run stays inspectable
    sink.summary(summary)
    require_five_level_bounds(report, bounds.max_deviation, bounds.max_excited)
    headline = (
        f"max deviation={report.max_population_deviation:.3e} "
        f"max excited={report.max_excited_population:.3e}"
    )
    return Outcome(summary, headline)


EXPERIMENT_HANDLERS: dict[ExperimentName, ExperimentRunner] = {
    "mz-prepare": _run_mz_prepare,
    "chirp": _run_chirp,
    "stirap": _run_stirap,
    "overlap-sweep": _run_overlap_sweep,
    "mexican-hat": _run_mexican_hat,
    "detect": _run_detect,
    "validate-integrals": _run_validate_integrals,
    "five-level-check": _run_five_level_check,
}


def run_experiment(config: ExperimentConfig) -> RunResult:
    """
    Run the configured experiment and write its artifacts.

    Artifacts land in `config.output.directory` as `<name>_<part>.<fmt>`,
    plus `<name>_summary.json`.

    Raises
    ------
    ConfigurationError
        If the config cannot be turned into physical objects.
    AccuracyError, StiffnessError
        If a numerical tolerance cannot be met.
    """
    provenance = Provenance(config.config_hash(), __version__, config.experiment)
    sink = ArtifactSink(
        Path(config.output.directory),
        config.name,
        config.output.format,
        provenance,
    )
    logger.info(
        "Running %s (%s), config %s",
        config.name,
        config.experiment,
        provenance.config_hash[:12],
    )
    try:
        outcome = EXPERIMENT_HANDLERS[config.experiment](config, sink)
    except (ValueError, StateError) as err:
        if isinstance(err, ConfigurationError):
            raise
        raise ConfigurationError(str(err)) from err
    summary_path = sink.directory / f"{sink.stem}_summary.json"
    if summary_path not in sink.written:
        sink.summary(outcome.summary)
    return RunResult(
        config.name,
        config.experiment,
        provenance.config_hash,
        tuple(sink.written),
        outcome.summary,
        outcome.headline,
    )
