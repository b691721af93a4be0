"""
Experiment Configuration

Pydantic schema for one experiment run. Physical quantities are given as
strings with units ("132 Hz", "5.3 nm", "86.909 u") and stored in SI;
bare numbers are taken as SI already. Frequencies are angular rates, so
"132 Hz" means 132 s⁻¹.

Sections
--------
- trap: harmonic or mexican-hat, selected by `kind`
- condensate: κ directly, or atom number and scattering length
- drive: |Ω₀|, Δ, optical superposition and coupling ratio
- pulses / chirp / sweep: time dependence of the drive
- optics, detect, five_level, integral_check: experiment-specific settings
- quadrature, output: numerics and artifacts
"""

# Built-Ins
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union
import cmath
import hashlib
import json
import math

# Dependencies
import numpy as np
from astropy import units as u
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)
from scipy import constants

# Local Imports
from pyvortexqubit.custom_types import (
    ExperimentName,
    OutputFormat,
    ProfileKind,
    QuadratureScheme,
    TrapKind,
    experiment_names,
    is_valid_experiment,
    is_valid_output_format,
    is_valid_trap_kind,
    output_formats,
)
from pyvortexqubit.exceptions import ConfigurationError
from pyvortexqubit.services.dynamics import (
    ChirpSchedule,
    DriveConfig,
    PulseProfile,
)
from pyvortexqubit.services.experiments import CHIRP_WINDOW, SWEEP_MIDPOINT
from pyvortexqubit.services.spatial_integrals import QuadratureSpec
from pyvortexqubit.services.traps import (
    CondensateParams,
    HarmonicTrap,
    MexicanHatTrap,
    kappa_from,
)

RB87_MASS = 86.909180527 * constants.atomic_mass


# ---- Unit Parsing ----
def _parse_quantity(value: Any, unit: u.UnitBase, kind: str) -> float:
    if isinstance(value, bool):
        raise ValueError(f"Expected a {kind}, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"Expected a {kind} such as '1 {unit}', got {value!r}")
    try:
        quantity = u.Quantity(value)
    except (TypeError, ValueError) as err:
        raise ValueError(f"Cannot parse {value!r} as a {kind}") from err
    if quantity.unit == u.dimensionless_unscaled:
        return float(quantity.value)
    try:
        return float(quantity.to_value(unit))
    except u.UnitConversionError as err:
        raise ValueError(
            f"{value!r} has units of {quantity.unit}, not a {kind}"
        ) from err


def _rate(value: Any) -> float:
    return _parse_quantity(value, 1 / u.s, "rate")


def _length(value: Any) -> float:
    return _parse_quantity(value, u.m, "length")


def _mass(value: Any) -> float:
    return _parse_quantity(value, u.kg, "mass")


Rate = Annotated[float, BeforeValidator(_rate)]
Length = Annotated[float, BeforeValidator(_length)]
Mass = Annotated[float, BeforeValidator(_mass)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _superposition(
    population_plus: float, phase: float
) -> tuple[complex, complex]:
    """(a₊, a₋) with the relative phase carried on a₋."""
    a_minus = math.sqrt(1.0 - population_plus) * cmath.exp(1j * phase)
    return complex(math.sqrt(population_plus)), a_minus


# ---- Physical Sections ----
class HarmonicTrapConfig(_Section):
    kind: Literal["harmonic"]
    mass: Mass = RB87_MASS
    omega_perp: Rate = Field(gt=0)
    omega_z: Rate = Field(gt=0)

    def build(self) -> HarmonicTrap:
        return HarmonicTrap(self.mass, self.omega_perp, self.omega_z)


class MexicanHatTrapConfig(_Section):
    kind: Literal["mexican-hat"]
    sigma: float = Field(gt=0)
    lam: float = Field(gt=0)
    mass: Mass = RB87_MASS
    omega_perp: Rate = Field(gt=0)
    omega_z: Rate = Field(gt=0)

    def build(self) -> MexicanHatTrap:
        return MexicanHatTrap(
            self.sigma, self.lam, self.mass, self.omega_perp, self.omega_z
        )


TrapConfig = Annotated[
    Union[HarmonicTrapConfig, MexicanHatTrapConfig],
    Field(discriminator="kind"),
]


class CondensateConfig(_Section):
    """Either an interaction rate κ, or N and a_sc (or both)."""

    kappa: Optional[Rate] = Field(default=None, ge=0)
    n_atoms: Optional[float] = Field(default=None, gt=0)
    a_sc: Optional[Length] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_source(self) -> "CondensateConfig":
        if (self.n_atoms is None) != (self.a_sc is None):
            raise ValueError("n_atoms and a_sc must be given together")
        if self.kappa is None and self.n_atoms is None:
            raise ValueError("Give kappa, or n_atoms with a_sc")
        return self

    @property
    def has_scattering(self) -> bool:
        return self.n_atoms is not None

    def build(self, mass: float) -> CondensateParams:
        """
        Condensate parameters from N and a_sc.

        Raises
        ------
        ConfigurationError
            If N or a_sc is missing.
        """
        if self.n_atoms is None or self.a_sc is None:
            raise ConfigurationError(
                "This experiment needs n_atoms and a_sc", field="condensate"
            )
        return CondensateParams.from_scattering(self.n_atoms, self.a_sc, mass)

    def kappa_for(self, trap: HarmonicTrap) -> float:
        """κ as configured, otherwise from N and a_sc in `trap`."""
        if self.kappa is not None:
            return self.kappa
        return kappa_from(self.build(trap.mass), trap)


class DriveSection(_Section):
    omega0: Rate = Field(gt=0)
    delta_big: Rate
    population_plus: float = Field(default=0.6, ge=0, le=1)
    relative_phase: float = 0.0
    omega_c_ratio: float = Field(default=1.0, gt=0)
    ell: int = 2
    beam_waist: Optional[Length] = Field(default=None, gt=0)

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return _superposition(self.population_plus, self.relative_phase)

    def build(self) -> DriveConfig:
        a_plus, a_minus = self.amplitudes
        try:
            return DriveConfig(
                self.omega0,
                self.delta_big,
                a_plus,
                a_minus,
                self.omega_c_ratio,
                self.ell,
            )
        except ValueError as err:
            raise ConfigurationError(str(err), field="drive") from err


class PulsesSection(_Section):
    """Gaussian envelopes, times in units of 1/|Ω₀|."""

    f0: float = Field(gt=0)
    g0: float = Field(gt=0)
    t1: float
    t2: float
    sigma1: float = Field(gt=0)
    sigma2: float = Field(gt=0)
    window: Optional[tuple[float, float]] = None

    def build(self) -> PulseProfile:
        return PulseProfile(
            self.f0, self.g0, self.t1, self.t2, self.sigma1, self.sigma2
        )


class ChirpSection(_Section):
    """δ(t) = C(1 - Ω₀t) with C given relative to Ω₀."""

    omega0: Rate = Field(gt=0)
    c_over_omega0: float
    population_plus: float = Field(default=0.6, ge=0, le=1)
    relative_phase: float = 0.0
    window: tuple[float, float] = CHIRP_WINDOW

    @model_validator(mode="after")
    def _check_rate(self) -> "ChirpSection":
        if self.c_over_omega0 == 0:
            raise ValueError("c_over_omega0 must be non-zero")
        if not self.window[0] < self.window[1]:
            raise ValueError(f"window must be increasing, got {self.window}")
        return self

    @property
    def c_const(self) -> float:
        return self.c_over_omega0 * self.omega0

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return _superposition(self.population_plus, self.relative_phase)

    def build(self) -> ChirpSchedule:
        return ChirpSchedule(self.c_const, self.omega0)


class SweepSection(_Section):
    """Pulse separations t₁ - t₂, explicit or as a linspace."""

    separations: Optional[list[float]] = None
    start: float = 0.0
    stop: float = 2.0
    num: int = Field(default=21, ge=1)
    midpoint: float = SWEEP_MIDPOINT
    max_workers: Optional[int] = Field(default=None, ge=1)

    def values(self) -> np.ndarray:
        if self.separations is not None:
            return np.asarray(self.separations, dtype=float)
        return np.linspace(self.start, self.stop, self.num)


class OpticsSection(_Section):
    """Interferometric preparation of a₊|ℓ⟩ + a₋|-ℓ⟩."""

    ell: int = 2
    population_plus: float = Field(default=0.6, ge=0, le=1)
    relative_phase: float = 0.0
    u0: float = Field(default=1.0, gt=0)

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return _superposition(self.population_plus, self.relative_phase)


class DetectCase(_Section):
    label: str
    population_plus: float = Field(ge=0, le=1)
    theta: float = 0.0
    probe_shift: bool = False


class DetectSection(_Section):
    """Detection cases; `extent` is in units of the profile's length."""

    ell: int = Field(default=3, ge=1)
    grid: int = Field(default=512, ge=64)
    extent: Optional[float] = Field(default=None, gt=0)
    profile: ProfileKind = ProfileKind.HARMONIC
    save_grids: bool = False
    cases: list[DetectCase] = Field(min_length=1)


class FiveLevelSection(_Section):
    max_deviation: Optional[float] = Field(default=None, gt=0)
    max_excited: Optional[float] = Field(default=None, gt=0)


class IntegralCheckSection(_Section):
    rel_tol: float = Field(default=1e-6, gt=0)


class QuadratureSection(_Section):
    scheme: QuadratureScheme = "fixed-tensor"
    abs_tol: float = Field(default=1e-12, gt=0)
    rel_tol: float = Field(default=1e-10, gt=0)
    max_evals: int = Field(default=5_000_000, ge=1)
    cache_dir: Optional[Path] = None

    def build(self) -> QuadratureSpec:
        return QuadratureSpec(
            self.scheme, self.abs_tol, self.rel_tol, self.max_evals
        )


class OutputSection(_Section):
    """Artifacts; unset tolerance and samples fall back to experiment defaults."""

    directory: Path = Path("results")
    format: OutputFormat = "csv"
    tolerance: Optional[float] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, ge=2)


# ---- Experiment ----
REQUIRED_SECTIONS: dict[ExperimentName, tuple[str, ...]] = {
    "mz-prepare": ("optics",),
    "chirp": ("trap", "condensate", "chirp"),
    "stirap": ("trap", "condensate", "drive", "pulses"),
    "overlap-sweep": ("trap", "condensate", "drive", "pulses", "sweep"),
    "mexican-hat": ("trap", "condensate", "drive", "pulses"),
    "detect": ("detect",),
    "validate-integrals": ("trap", "condensate"),
    "five-level-check": ("trap", "condensate", "drive", "pulses"),
}

TRAP_KINDS: dict[ExperimentName, TrapKind] = {
    "chirp": "harmonic",
    "stirap": "harmonic",
    "overlap-sweep": "harmonic",
    "mexican-hat": "mexican-hat",
    "validate-integrals": "harmonic",
    "five-level-check": "harmonic",
}


class ExperimentConfig(_Section):
    experiment: ExperimentName
    name: str = "experiment"
    description: str = ""
    trap: Optional[TrapConfig] = None
    condensate: Optional[CondensateConfig] = None
    drive: Optional[DriveSection] = None
    pulses: Optional[PulsesSection] = None
    chirp: Optional[ChirpSection] = None
    sweep: Optional[SweepSection] = None
    optics: Optional[OpticsSection] = None
    detect: Optional[DetectSection] = None
    five_level: FiveLevelSection = FiveLevelSection()
    integral_check: IntegralCheckSection = IntegralCheckSection()
    quadrature: QuadratureSection = QuadratureSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_sections(self) -> "ExperimentConfig":
        for section in REQUIRED_SECTIONS[self.experiment]:
            if getattr(self, section) is None:
                raise ValueError(
                    f"{section}: required for the {self.experiment} experiment"
                )
        kind = TRAP_KINDS.get(self.experiment)
        if kind is not None and self.trap is not None and self.trap.kind != kind:
            raise ValueError(
                f"trap.kind: {self.experiment} needs a {kind} trap, "
                f"got {self.trap.kind}"
            )
        needs_scattering = self.experiment in ("mexican-hat", "validate-integrals")
        if (
            needs_scattering
            and self.condensate is not None
            and not self.condensate.has_scattering
        ):
            raise ValueError(
                f"condensate: {self.experiment} needs n_atoms and a_sc"
            )
        detect = self.detect
        if detect is not None and detect.profile == ProfileKind.THOMAS_FERMI:
            if self.trap is None or self.trap.kind != "mexican-hat":
                raise ValueError(
                    "trap: Thomas-Fermi detection needs a mexican-hat trap"
                )
            if self.condensate is None or not self.condensate.has_scattering:
                raise ValueError(
                    "condensate: Thomas-Fermi detection needs n_atoms and a_sc"
                )
        return self

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump, output directory excluded."""
        payload = self.model_dump(mode="json", exclude={"output": {"directory"}})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(
        self,
        output_dir: Optional[Path] = None,
        tolerance: Optional[float] = None,
        samples: Optional[int] = None,
        fmt: Optional[str] = None,
    ) -> "ExperimentConfig":
        """
        Copy with command-line overrides applied to the output section.

        Raises
        ------
        ConfigurationError
            If an override is invalid.
        """
        if fmt is not None and not is_valid_output_format(fmt):
            raise ConfigurationError(
                f"output.format: expected one of {', '.join(output_formats)}, "
                f"got {fmt!r}"
            )
        updates: dict[str, Any] = {
            "directory": output_dir,
            "tolerance": tolerance,
            "samples": samples,
            "format": fmt,
        }
        output = self.output.model_dump()
        output.update({k: v for k, v in updates.items() if v is not None})
        try:
            section = OutputSection.model_validate(output)
        except ValidationError as err:
            raise configuration_error(err, prefix="output") from err
        return self.model_copy(update={"output": section})


def configuration_error(
    err: ValidationError, prefix: Optional[str] = None
) -> ConfigurationError:
    """Fold pydantic errors into one `ConfigurationError` with field paths."""
    messages = []
    for detail in err.errors():
        loc = [str(part) for part in detail["loc"]]
        if prefix is not None:
            loc.insert(0, prefix)
        # discriminated-union tags add the variant name to the path
        loc = [part for part in loc if not is_valid_trap_kind(part)]
        path = ".".join(loc)
        message = detail["msg"].removeprefix("Value error, ")
        messages.append(f"{path}: {message}" if path else message)
    return ConfigurationError("; ".join(messages))


def load_config(data: dict[str, Any]) -> ExperimentConfig:
    """
    Validate a parsed config mapping.

    Raises
    ------
    ConfigurationError
        With every failing field path in the message.
    """
    experiment = data.get("experiment")
    if isinstance(experiment, str) and not is_valid_experiment(experiment):
        raise ConfigurationError(
            f"experiment: unknown experiment {experiment!r}, expected one of "
            f"{', '.join(experiment_names)}"
        )
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise configuration_error(err) from err
