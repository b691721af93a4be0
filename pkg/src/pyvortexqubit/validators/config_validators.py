"""
Physics sanity checks on a validated config.

The schema only guarantees that a config is well formed. The checks here
build the physical objects it describes and flag parameter regimes in
which the model is unreliable, without running anything. Each finding is
a warning or an error tied to a dotted field path.
"""

# Built-Ins
from dataclasses import dataclass
from typing import Literal, Optional
import math

# Local Imports
from pyvortexqubit.config import ExperimentConfig
from pyvortexqubit.exceptions import VortexQubitError
from pyvortexqubit.services.spatial_integrals import default_beam_waist
from pyvortexqubit.services.traps import HarmonicTrap, MexicanHatTrap, Trap

FAR_DETUNING_RATIO = 5.0
MIN_CHIRP_ADIABATICITY = 1.0


@dataclass(eq=True, frozen=True)
class Finding:
    level: Literal["warning", "error"]
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.level}: {self.field}: {self.message}"


def _validate_detuning(config: ExperimentConfig) -> list[Finding]:
    drive = config.drive
    if drive is None:
        return []
    ratio = abs(drive.delta_big) / drive.omega0
    if ratio < FAR_DETUNING_RATIO:
        return [
            Finding(
                "warning",
                "drive.delta_big",
                f"|Δ| = {ratio:.3g} Ω₀ is below {FAR_DETUNING_RATIO:g} Ω₀; "
                "adiabatic elimination questionable",
            )
        ]
    return []


def _validate_chirp_rate(config: ExperimentConfig) -> list[Finding]:
    """Landau-Zener parameter 2πω⊥²/(CΩ₀) for the chirped sweep."""
    chirp, trap = config.chirp, config.trap
    if chirp is None or trap is None:
        return []
    adiabaticity = (
        2 * math.pi * trap.omega_perp**2 / abs(chirp.c_const * chirp.omega0)
    )
    if adiabaticity < MIN_CHIRP_ADIABATICITY:
        return [
            Finding(
                "warning",
                "chirp.c_over_omega0",
                f"2πω⊥²/(CΩ₀) = {adiabaticity:.3g} < "
                f"{MIN_CHIRP_ADIABATICITY:g}; chirp too fast for adiabatic "
                "following",
            )
        ]
    return []


def _built_trap(config: ExperimentConfig) -> Optional[Trap]:
    """The configured trap, or None when it is absent or cannot be built."""
    if config.trap is None:
        return None
    try:
        return config.trap.build()
    except (VortexQubitError, ValueError):
        return None


def _validate_trap_shape(config: ExperimentConfig) -> list[Finding]:
    trap = _built_trap(config)
    if isinstance(trap, HarmonicTrap) and not trap.is_pancake:
        return [
            Finding(
                "warning",
                "trap.omega_z",
                "ω_z <= ω⊥; the trap is not pancake shaped and the "
                "two-dimensional mode ansatz is poor",
            )
        ]
    return []


def _validate_beam_waist(config: ExperimentConfig) -> list[Finding]:
    drive, trap = config.drive, _built_trap(config)
    if drive is None or drive.beam_waist is None or trap is None:
        return []
    match trap:
        case MexicanHatTrap():
            cloud = trap.minimum_radius
        case _:
            cloud = trap.l_perp
    if drive.beam_waist < cloud:
        default = default_beam_waist(trap)
        return [
            Finding(
                "warning",
                "drive.beam_waist",
                f"waist {drive.beam_waist:.3g} m is smaller than the cloud "
                f"({cloud:.3g} m); the default would be {default:.3g} m",
            )
        ]
    return []


def _validate_physics(config: ExperimentConfig) -> list[Finding]:
    """Build the physical objects and report any construction failure."""
    findings = []
    for section in ("trap", "drive", "pulses", "chirp"):
        block = getattr(config, section)
        if block is None:
            continue
        try:
            block.build()
        except (VortexQubitError, ValueError) as err:
            findings.append(Finding("error", section, str(err)))
    return findings


VALIDATORS = (
    _validate_physics,
    _validate_detuning,
    _validate_chirp_rate,
    _validate_trap_shape,
    _validate_beam_waist,
)


def check_config(config: ExperimentConfig) -> list[Finding]:
    """
    Physics sanity checks on a schema-valid config, without running it.

    Returns
    -------
    findings: list[Finding]
        Warnings and errors, in a fixed order.
    """
    findings: list[Finding] = []
    for validator in VALIDATORS:
        findings.extend(validator(config))
    return findings
