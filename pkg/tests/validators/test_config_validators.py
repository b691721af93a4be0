"""Unit tests for physics sanity checks on configs"""

import pytest

from pyvortexqubit.config import ExperimentConfig
from pyvortexqubit.services.read_config import open_config
from pyvortexqubit.validators import config_validators
from pyvortexqubit.validators.config_validators import Finding, check_config


# ============================================================================
# Fixtures
# ============================================================================


@pytest.fixture
def fig5() -> ExperimentConfig:
    """Bundled pulse-pair config"""
    return open_config("fig5_stirap")


def _with_section(
    config: ExperimentConfig, section: str, **changes
) -> ExperimentConfig:
    block = getattr(config, section).model_copy(update=changes)
    return config.model_copy(update={section: block})


# ============================================================================
# Tests for check_config
# ============================================================================


class TestCheckConfig:
    @pytest.mark.parametrize(
        "name", ["fig3_chirp", "fig5_stirap", "fig6_overlap", "fig8_mexican_hat"]
    )
    def test_bundled_clean(self, name):
        """Figure configs raise no findings"""
        assert check_config(open_config(name)) == []

    def test_near_resonant_drive(self, fig5):
        """Δ = Ω₀ warns about adiabatic elimination"""
        config = _with_section(fig5, "drive", delta_big=fig5.drive.omega0)
        findings = check_config(config)
        assert len(findings) == 1
        assert findings[0].level == "warning"
        assert findings[0].field == "drive.delta_big"
        assert "adiabatic elimination questionable" in findings[0].message

    def test_threshold(self, fig5):
        """Δ = 5Ω₀ sits on the safe side"""
        config = _with_section(fig5, "drive", delta_big=5 * fig5.drive.omega0)
        assert check_config(config) == []

    def test_fast_chirp(self):
        """C = 2Ω₀ is too fast for adiabatic following"""
        config = open_config("fig3_chirp")
        config = _with_section(config, "chirp", c_over_omega0=2.0)
        fields = [f.field for f in check_config(config)]
        assert fields == ["chirp.c_over_omega0"]

    def test_cigar_trap(self, fig5):
        """ω_z below ω⊥ is not a pancake"""
        config = _with_section(fig5, "trap", omega_z=50.0)
        fields = [f.field for f in check_config(config)]
        assert fields == ["trap.omega_z"]

    def test_narrow_beam(self, fig5):
        """A waist below L⊥ misses most of the cloud"""
        config = _with_section(fig5, "drive", beam_waist=1e-7)
        findings = check_config(config)
        assert [f.field for f in findings] == ["drive.beam_waist"]
        assert "smaller than the cloud" in findings[0].message

    def test_build_failure_is_error(self, fig5):
        """Values that fail construction become error findings"""
        config = _with_section(fig5, "drive", ell=0)
        findings = check_config(config)
        assert findings[0] == Finding(
            "error", "drive", "drive: OAM charge must be positive, got 0."
        )

    def test_finding_text(self):
        """Findings print as level, field and message"""
        finding = Finding("warning", "drive.delta_big", "too close")
        assert str(finding) == "warning: drive.delta_big: too close"

    def test_module_documented(self):
        """The validators module describes its checks"""
        assert config_validators.__doc__ is not None
        assert "sanity checks" in config_validators.__doc__
