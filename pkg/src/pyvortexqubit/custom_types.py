from pathlib import Path
from typing import TypeAlias, Literal, TypeGuard
from enum import StrEnum

PathLike: TypeAlias = Path | str

ExperimentName: TypeAlias = Literal[
    "mz-prepare",
    "chirp",
    "stirap",
    "overlap-sweep",
    "mexican-hat",
    "detect",
    "validate-integrals",
    "five-level-check",
]
experiment_names: list[ExperimentName] = [
    "mz-prepare",
    "chirp",
    "stirap",
    "overlap-sweep",
    "mexican-hat",
    "detect",
    "validate-integrals",
    "five-level-check",
]


def is_valid_experiment(value: str) -> TypeGuard[ExperimentName]:
    return value in experiment_names


OutputFormat: TypeAlias = Literal["csv", "json"]
output_formats: list[OutputFormat] = ["csv", "json"]


def is_valid_output_format(value: str) -> TypeGuard[OutputFormat]:
    return value in output_formats


QuadratureScheme: TypeAlias = Literal["adaptive-nested", "fixed-tensor"]
quadrature_schemes: list[QuadratureScheme] = [
    "adaptive-nested",
    "fixed-tensor",
]


def is_valid_quadrature_scheme(value: str) -> TypeGuard[QuadratureScheme]:
    return value in quadrature_schemes


ConfigFileTypes: TypeAlias = Literal[".yaml", ".yml", ".json"]
config_file_types: list[ConfigFileTypes] = [".yaml", ".yml", ".json"]


def is_valid_config_file(value: str) -> TypeGuard[ConfigFileTypes]:
    return value in config_file_types


TrapKind: TypeAlias = Literal["harmonic", "mexican-hat"]
trap_kinds: list[TrapKind] = ["harmonic", "mexican-hat"]


def is_valid_trap_kind(value: str) -> TypeGuard[TrapKind]:
    return value in trap_kinds


class WavefunctionKind(StrEnum):
    HARMONIC_GROUND = "harmonic-ground"
    HARMONIC_VORTEX = "harmonic-vortex"
    TF_GROUND = "tf-ground"
    TF_VORTEX = "tf-vortex"


class ProfileKind(StrEnum):
    HARMONIC = "harmonic"
    THOMAS_FERMI = "thomas-fermi"
