"""Unit tests for the experiment configuration schema"""

from pathlib import Path

import numpy as np
import pytest

from pyvortexqubit.config import (
    RB87_MASS,
    ChirpSection,
    CondensateConfig,
    ExperimentConfig,
    HarmonicTrapConfig,
    SweepSection,
    load_config,
)
from pyvortexqubit.exceptions import ConfigurationError


# ============================================================================
# Fixtures
# ============================================================================


@pytest.fixture
def stirap_data() -> dict:
    """Raw mapping of a harmonic-trap pulse experiment"""
    return {
        "experiment": "stirap",
        "name": "test_stirap",
        "trap": {
            "kind": "harmonic",
            "omega_perp": "132 Hz",
            "omega_z": "373 Hz",
        },
        "condensate": {"kappa": "1.7 kHz"},
        "drive": {"omega0": "200 kHz", "delta_big": "2 MHz"},
        "pulses": {
            "f0": 50.0,
            "g0": 100.0,
            "t1": 1.0,
            "t2": 0.5,
            "sigma1": 0.25,
            "sigma2": 0.25,
        },
    }


# ============================================================================
# Tests for unit parsing
# ============================================================================


class TestUnits:
    def test_rates_in_hz_are_per_second(self, stirap_data):
        """'132 Hz' is stored as 132 s⁻¹"""
        config = load_config(stirap_data)
        assert config.trap.omega_perp == pytest.approx(132.0)
        assert config.drive.omega0 == pytest.approx(2e5)
        assert config.condensate.kappa == pytest.approx(1700.0)

    def test_lengths_and_masses(self):
        """Lengths go to metres and atomic masses to kilograms"""
        condensate = CondensateConfig(n_atoms=1e5, a_sc="5.3 nm")
        trap = HarmonicTrapConfig(
            kind="harmonic",
            mass="86.909180527 u",
            omega_perp=132.0,
            omega_z=373.0,
        )
        assert condensate.a_sc == pytest.approx(5.3e-9)
        assert trap.mass == pytest.approx(RB87_MASS, rel=1e-9)

    def test_bare_numbers_are_si(self, stirap_data):
        """Plain numbers are taken as SI values"""
        stirap_data["trap"]["omega_perp"] = 132
        config = load_config(stirap_data)
        assert config.trap.omega_perp == 132.0

    def test_wrong_dimension(self, stirap_data):
        """A length where a rate is expected names the field"""
        stirap_data["trap"]["omega_perp"] = "3 m"
        with pytest.raises(ConfigurationError, match="trap.omega_perp"):
            load_config(stirap_data)

    def test_unparseable(self, stirap_data):
        """Garbage strings are rejected"""
        stirap_data["drive"]["omega0"] = "fast"
        with pytest.raises(ConfigurationError, match="drive.omega0"):
            load_config(stirap_data)


# ============================================================================
# Tests for schema validation
# ============================================================================


class TestSchema:
    def test_valid(self, stirap_data):
        """A complete pulse config validates"""
        config = load_config(stirap_data)
        assert isinstance(config, ExperimentConfig)
        assert config.output.format == "csv"
        assert config.drive.population_plus == pytest.approx(0.6)

    def test_missing_delta(self, stirap_data):
        """A missing Δ is reported by its field path"""
        del stirap_data["drive"]["delta_big"]
        with pytest.raises(ConfigurationError, match="drive.delta_big"):
            load_config(stirap_data)

    def test_negative_sigma(self):
        """The Mexican-hat σ must be positive"""
        data = {
            "experiment": "mexican-hat",
            "trap": {
                "kind": "mexican-hat",
                "sigma": -2.0,
                "lam": 0.005,
                "omega_perp": "132 Hz",
                "omega_z": "373 Hz",
            },
        }
        with pytest.raises(ConfigurationError, match="trap.sigma"):
            load_config(data)

    def test_missing_section(self, stirap_data):
        """Experiments name the sections they need"""
        del stirap_data["pulses"]
        with pytest.raises(ConfigurationError, match="pulses: required"):
            load_config(stirap_data)

    def test_wrong_trap_kind(self, stirap_data):
        """Harmonic experiments reject the Mexican hat"""
        stirap_data["trap"] = {
            "kind": "mexican-hat",
            "sigma": 2.0,
            "lam": 0.005,
            "omega_perp": "132 Hz",
            "omega_z": "373 Hz",
        }
        with pytest.raises(ConfigurationError, match="needs a harmonic trap"):
            load_config(stirap_data)

    def test_unknown_field(self, stirap_data):
        """Typos in field names are errors"""
        stirap_data["drive"]["omega_0"] = "1 kHz"
        with pytest.raises(ConfigurationError, match="drive.omega_0"):
            load_config(stirap_data)

    def test_unknown_experiment(self, stirap_data):
        """Only the known experiments are accepted"""
        stirap_data["experiment"] = "teleport"
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(stirap_data)
        message = str(excinfo.value)
        assert message.startswith("experiment: unknown experiment 'teleport'")
        assert "five-level-check" in message

    def test_scattering_needed(self, stirap_data):
        """Integral validation needs N and a_sc, not just κ"""
        stirap_data["experiment"] = "validate-integrals"
        with pytest.raises(ConfigurationError, match="n_atoms and a_sc"):
            load_config(stirap_data)

    def test_thomas_fermi_detection_needs_hat(self):
        """Thomas-Fermi detection needs a Mexican-hat trap"""
        data = {
            "experiment": "detect",
            "detect": {
                "profile": "thomas-fermi",
                "cases": [{"label": "a", "population_plus": 0.5}],
            },
        }
        with pytest.raises(ConfigurationError, match="mexican-hat trap"):
            load_config(data)


# ============================================================================
# Tests for section helpers
# ============================================================================


class TestSections:
    def test_condensate_pairs(self):
        """N without a_sc is rejected"""
        with pytest.raises(ValueError, match="together"):
            CondensateConfig(n_atoms=1e5)

    def test_condensate_needs_source(self):
        """An empty condensate block is rejected"""
        with pytest.raises(ValueError, match="kappa"):
            CondensateConfig()

    def test_kappa_from_scattering(self):
        """κ from N and a_sc matches the configured-κ path"""
        trap = HarmonicTrapConfig(
            kind="harmonic", omega_perp=132.0, omega_z=373.0
        ).build()
        from_scattering = CondensateConfig(n_atoms=1e5, a_sc=5.3e-9)
        kappa = from_scattering.kappa_for(trap)
        assert kappa > 0
        direct = CondensateConfig(kappa=kappa)
        assert direct.kappa_for(trap) == kappa

    def test_build_without_scattering(self):
        """Building condensate parameters needs N and a_sc"""
        with pytest.raises(ConfigurationError, match="condensate"):
            CondensateConfig(kappa=1700.0).build(RB87_MASS)

    def test_chirp_rate_non_zero(self):
        """A zero chirp rate never crosses resonance"""
        with pytest.raises(ValueError, match="non-zero"):
            ChirpSection(omega0=3000.0, c_over_omega0=0.0)

    def test_chirp_constant(self):
        """C is given relative to Ω₀"""
        chirp = ChirpSection(omega0=3000.0, c_over_omega0=1e-3)
        assert chirp.c_const == pytest.approx(3.0)
        assert chirp.build().c_const == pytest.approx(3.0)

    def test_sweep_values(self):
        """Separations come from a list or a linspace"""
        np.testing.assert_allclose(
            SweepSection(start=0.0, stop=2.0, num=5).values(),
            [0.0, 0.5, 1.0, 1.5, 2.0],
        )
        np.testing.assert_array_equal(
            SweepSection(separations=[0.4, 0.2]).values(), [0.4, 0.2]
        )

    def test_drive_amplitudes(self, stirap_data):
        """The optical superposition follows the populations"""
        stirap_data["drive"]["population_plus"] = 0.6
        a_plus, a_minus = load_config(stirap_data).drive.amplitudes
        assert abs(a_plus) ** 2 == pytest.approx(0.6)
        assert abs(a_minus) ** 2 == pytest.approx(0.4)


# ============================================================================
# Tests for the config hash and overrides
# ============================================================================


class TestHash:
    def test_stable(self, stirap_data):
        """The same mapping always hashes the same"""
        first = load_config(stirap_data).config_hash()
        second = load_config(stirap_data).config_hash()
        assert first == second
        assert len(first) == 64

    def test_parameter_changes_hash(self, stirap_data):
        """Any changed parameter changes the hash"""
        base = load_config(stirap_data).config_hash()
        stirap_data["pulses"]["t1"] = 1.1
        assert load_config(stirap_data).config_hash() != base

    def test_output_directory_ignored(self, stirap_data):
        """Where artifacts go is not part of the run identity"""
        config = load_config(stirap_data)
        moved = config.with_overrides(output_dir=Path("elsewhere"))
        assert moved.output.directory == Path("elsewhere")
        assert moved.config_hash() == config.config_hash()

    def test_overrides_change_hash(self, stirap_data):
        """Tolerance and sample overrides are part of the identity"""
        config = load_config(stirap_data)
        tighter = config.with_overrides(tolerance=1e-12, samples=51, fmt="json")
        assert tighter.output.tolerance == 1e-12
        assert tighter.output.samples == 51
        assert tighter.output.format == "json"
        assert tighter.config_hash() != config.config_hash()

    def test_invalid_override(self, stirap_data):
        """Invalid overrides are configuration errors"""
        config = load_config(stirap_data)
        with pytest.raises(ConfigurationError, match="output.samples"):
            config.with_overrides(samples=1)

    def test_invalid_format_override(self, stirap_data):
        """Only the known output formats are accepted"""
        config = load_config(stirap_data)
        with pytest.raises(
            ConfigurationError, match="output.format: expected one of csv, json"
        ):
            config.with_overrides(fmt="xml")
