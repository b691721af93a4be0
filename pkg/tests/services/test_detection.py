"""Unit tests for interference-pattern rendering and analysis"""

import math

import numpy as np
import pytest
from scipy import constants
from scipy.integrate import quad

from pyvortexqubit.exceptions import AnalysisError, StateError
from pyvortexqubit.services.detection import (
    AmplitudeAssignment,
    DensityGrid,
    HarmonicProfile,
    PatternAnalysis,
    ThomasFermiProfile,
    VortexSuperposition,
    amplitude_candidates,
    analyze_pattern,
    angular_profile,
    count_lobes,
    disambiguate_amplitudes,
    interference_density,
    pattern_rotation,
    peak_ring_radius,
    probe_shift,
    render_grid,
    visibility,
)
from pyvortexqubit.services.traps import (
    CondensateParams,
    MexicanHatTrap,
    tf_radii,
)


# ============================================================================
# Fixtures
# ============================================================================

RB87_MASS = 86.909180527 * constants.atomic_mass


@pytest.fixture
def equal_state() -> VortexSuperposition:
    """α = β = 1/√2, θ = 0, ℓ = 3"""
    return VortexSuperposition.from_populations(0.5, 0.0, 3)


@pytest.fixture
def unequal_state() -> VortexSuperposition:
    """α² = 0.1, β² = 0.9, ℓ = 3"""
    return VortexSuperposition.from_populations(0.1, 0.0, 3)


@pytest.fixture(scope="module")
def equal_grid() -> DensityGrid:
    """512² grid of the equal ℓ = 3 superposition"""
    return render_grid(VortexSuperposition.from_populations(0.5, 0.0, 3))


# ============================================================================
# Tests for radial profiles
# ============================================================================


class TestProfiles:
    @pytest.mark.parametrize("ell", [0, 1, 3, -4])
    def test_harmonic_normalised(self, ell):
        """∫u²2πρdρ = 1 for every charge"""
        profile = HarmonicProfile(2.0)
        value, _ = quad(
            lambda r: float(profile.amplitude(ell, r)) ** 2 * 2 * math.pi * r,
            0,
            60.0,
        )
        assert value == pytest.approx(1.0, rel=1e-7)

    def test_harmonic_peak(self):
        """|u_ℓ|² peaks at ρ = √|ℓ| L⊥"""
        profile = HarmonicProfile()
        rho = np.linspace(0.01, 4, 4000)
        peak = rho[np.argmax(profile.amplitude(3, rho))]
        assert peak == pytest.approx(math.sqrt(3), abs=1e-3)

    def test_bad_length(self):
        """Non-positive oscillator lengths are rejected"""
        with pytest.raises(ValueError, match="positive"):
            HarmonicProfile(0.0)

    def test_thomas_fermi_normalised(self):
        """The Mexican-hat ring profile is normalised on its support"""
        trap = MexicanHatTrap(2.0, 0.005, RB87_MASS, 132.0, 373.0)
        condensate = CondensateParams.from_scattering(1e5, 5.3e-9, RB87_MASS)
        profile = ThomasFermiProfile.solved(trap, condensate)
        assert condensate.mu is None
        r_minus, r_plus = tf_radii(trap, profile.condensate.mu)
        value, _ = quad(
            lambda r: float(profile.amplitude(2, r)) ** 2 * 2 * math.pi * r,
            r_minus,
            r_plus,
            limit=200,
        )
        assert profile.default_extent > r_plus
        assert value == pytest.approx(1.0, rel=1e-6)
        assert float(profile.amplitude(2, 0.0)) == 0.0

    def test_thomas_fermi_needs_mu(self):
        """An unsolved condensate is rejected"""
        trap = MexicanHatTrap(2.0, 0.005, RB87_MASS, 132.0, 373.0)
        condensate = CondensateParams.from_scattering(1e5, 5.3e-9, RB87_MASS)
        with pytest.raises(StateError, match="chemical potential"):
            ThomasFermiProfile(trap, condensate)


# ============================================================================
# Tests for VortexSuperposition and interference_density
# ============================================================================


class TestSuperposition:
    def test_validation(self):
        """Normalisation, sign and distinct charges are enforced"""
        with pytest.raises(ValueError, match="must equal 1"):
            VortexSuperposition(0.5, 0.5)
        with pytest.raises(ValueError, match="non-negative"):
            VortexSuperposition(-1.0, 0.0)
        with pytest.raises(ValueError, match="differ"):
            VortexSuperposition(1.0, 0.0, 0.0, 2, 2)

    def test_from_vortex_amplitudes(self):
        """Complex spinor amplitudes give magnitudes and a relative phase"""
        state = VortexSuperposition.from_vortex_amplitudes(
            0.6, 0.8j, 2
        )
        assert state.alpha == pytest.approx(0.6)
        assert state.beta == pytest.approx(0.8)
        assert state.theta == pytest.approx(math.pi / 2)
        assert (state.ell1, state.ell2) == (2, -2)
        with pytest.raises(StateError):
            VortexSuperposition.from_vortex_amplitudes(0, 0, 2)

    def test_equal_superposition_has_dark_fringes(self, equal_state):
        """V = 1 puts zeros between the lobes"""
        rho = math.sqrt(3)
        bright = interference_density(equal_state, rho, 0.0)
        dark = interference_density(equal_state, rho, math.pi / 6)
        assert bright > 0
        assert dark == pytest.approx(0.0, abs=1e-15)

    def test_opposite_charge_form(self, unequal_state):
        """For ℓ₂ = -ℓ₁ the density is A(ρ)[1 + 2αβcos(2ℓφ - θ)]"""
        rho, phi = 1.3, np.linspace(0, 2 * np.pi, 50)
        a = float(HarmonicProfile().amplitude(3, rho)) ** 2
        expected = a * (1 + 0.6 * np.cos(6 * phi))
        np.testing.assert_allclose(
            interference_density(unequal_state, rho, phi), expected, rtol=1e-12
        )

    def test_single_component_is_uniform(self):
        """β = 0 has no azimuthal structure"""
        state = VortexSuperposition(1.0, 0.0, 0.0, 3, -3)
        values = interference_density(state, 1.5, np.linspace(0, 6, 30))
        np.testing.assert_allclose(values, values[0], rtol=1e-14)

    def test_phase_rotates_maximum(self):
        """θ = π moves the φ = 0 maximum to φ = π/(2ℓ)"""
        state = VortexSuperposition.from_populations(0.5, math.pi, 3)
        rho = math.sqrt(3)
        assert interference_density(state, rho, 0.0) == pytest.approx(
            0.0, abs=1e-15
        )
        peak = interference_density(state, rho, math.pi / 6)
        assert peak == pytest.approx(
            2 * float(HarmonicProfile().amplitude(3, rho)) ** 2
        )


class TestProbeShift:
    def test_raises_both_charges(self, unequal_state):
        """(3, -3) becomes (4, -2) with amplitudes kept"""
        shifted = probe_shift(unequal_state)
        assert (shifted.ell1, shifted.ell2) == (4, -2)
        assert shifted.alpha == unequal_state.alpha
        assert shifted.beta == unequal_state.beta
        assert shifted.theta == unequal_state.theta

    def test_unit_charge(self):
        """(1, -1) becomes (2, 0)"""
        shifted = probe_shift(VortexSuperposition.from_populations(0.5, 0.0, 1))
        assert (shifted.ell1, shifted.ell2) == (2, 0)

    def test_needs_opposite_charges(self):
        """Only (ℓ, -ℓ) states are shifted"""
        with pytest.raises(ValueError, match="expects charges"):
            probe_shift(VortexSuperposition(1.0, 0.0, 0.0, 4, -2))


# ============================================================================
# Tests for render_grid and DensityGrid
# ============================================================================


class TestRenderGrid:
    def test_normalised(self, equal_grid):
        """The grid integrates to the state norm"""
        assert equal_grid.total() == pytest.approx(1.0, abs=1e-3)
        assert equal_grid.values.shape == (512, 512)
        assert np.all(equal_grid.values >= 0)

    def test_symmetric_axes(self, equal_grid):
        """Cell centres are symmetric about the origin"""
        np.testing.assert_array_equal(equal_grid.x, -equal_grid.x[::-1])
        assert equal_grid.extent == pytest.approx(6.0)

    def test_amplitude_swap_is_mirror(self, unequal_state):
        """Swapping α and β at θ = 0 mirrors the pattern in y"""
        grid = render_grid(unequal_state, 128, 128)
        swapped = render_grid(unequal_state.swapped(), 128, 128)
        np.testing.assert_allclose(
            swapped.values, grid.values[::-1, :], rtol=1e-12, atol=1e-15
        )

    def test_deterministic(self, unequal_state):
        """Rendering twice gives identical grids"""
        first = render_grid(unequal_state, 64, 64)
        second = render_grid(unequal_state, 64, 64)
        np.testing.assert_array_equal(first.values, second.values)

    def test_coarse_grid_normalised(self, equal_state):
        """Smooth, decayed profiles integrate accurately even at 64²"""
        grid = render_grid(equal_state, 64, 64, 6.0)
        assert grid.total() == pytest.approx(1.0, abs=1e-6)

    def test_too_small(self, equal_state):
        """Fewer than 64 cells per side is rejected"""
        with pytest.raises(ValueError, match="at least 64"):
            render_grid(equal_state, 32, 64)

    def test_grid_validation(self):
        """Negative densities and asymmetric axes are rejected"""
        axis = np.array([-1.0, 0.0, 1.0])
        with pytest.raises(ValueError, match="non-negative"):
            DensityGrid(axis, axis, -np.ones((3, 3)))
        with pytest.raises(ValueError, match="symmetric"):
            DensityGrid(axis + 0.5, axis, np.ones((3, 3)))
        with pytest.raises(ValueError, match="shape"):
            DensityGrid(axis, axis, np.ones((2, 3)))

    def test_serialisation(self):
        """CSV rows are row-major and JSON carries the shape"""
        axis = np.array([-0.5, 0.5])
        values = np.array([[1.0, 2.0], [3.0, 4.0]])
        grid = DensityGrid(axis, axis, values)
        rows = grid.to_csv_rows()
        np.testing.assert_array_equal(rows["x"], [-0.5, 0.5, -0.5, 0.5])
        np.testing.assert_array_equal(rows["y"], [-0.5, -0.5, 0.5, 0.5])
        np.testing.assert_array_equal(rows["density"], [1.0, 2.0, 3.0, 4.0])
        payload = grid.to_json_dict()
        assert payload["shape"] == [2, 2]
        assert payload["extent"] == pytest.approx(1.0)
        assert payload["values"] == [[1.0, 2.0], [3.0, 4.0]]


# ============================================================================
# Tests for pattern analysis
# ============================================================================


class TestVisibility:
    @pytest.mark.parametrize(
        "population, expected", [(0.5, 1.0), (0.1, 0.6), (0.9, 0.6), (1.0, 0.0)]
    )
    def test_closed_form(self, population, expected):
        """V = 2αβ"""
        state = VortexSuperposition.from_populations(population, 0.0, 3)
        assert visibility(state) == pytest.approx(expected, abs=1e-12)

    def test_grid_matches_closed_form(self):
        """Grid estimates agree with 2αβ for random states"""
        rng = np.random.default_rng(7)
        for _ in range(20):
            state = VortexSuperposition.from_populations(
                float(rng.uniform(0.02, 0.98)),
                float(rng.uniform(0, 2 * np.pi)),
                int(rng.integers(1, 6)),
            )
            grid = render_grid(state)
            assert visibility(grid) == pytest.approx(visibility(state), abs=1e-3)

    def test_empty_grid(self):
        """A grid without density cannot be analysed"""
        axis = np.linspace(-1, 1, 64)
        grid = DensityGrid(axis, axis, np.zeros((64, 64)))
        with pytest.raises(AnalysisError, match="empty"):
            visibility(grid)

    def test_peak_ring(self, equal_grid):
        """The ring of peak density sits at √ℓ L⊥"""
        assert peak_ring_radius(equal_grid) == pytest.approx(
            math.sqrt(3), abs=0.03
        )

    def test_angular_profile_bounds(self, equal_grid):
        """Radii outside the grid are rejected"""
        phi, values = angular_profile(equal_grid, 1.0, 90)
        assert phi.size == values.size == 90
        with pytest.raises(AnalysisError, match="outside"):
            angular_profile(equal_grid, 7.0)


class TestLobes:
    def test_equal_superposition(self, equal_grid):
        """ℓ = 3 shows 2ℓ = 6 lobes"""
        assert count_lobes(equal_grid) == 6

    def test_probe_shifted_state(self, equal_state):
        """The shifted (4, -2) state still shows 6 lobes"""
        assert count_lobes(render_grid(probe_shift(equal_state))) == 6

    def test_unit_charge(self):
        """ℓ = 1 shows two lobes"""
        grid = render_grid(VortexSuperposition.from_populations(0.5, 0.0, 1))
        assert count_lobes(grid) == 2

    @pytest.mark.parametrize("ell1, ell2", [(2, -1), (4, -1), (3, 1)])
    def test_general_charges(self, ell1, ell2):
        """Lobe count equals |ℓ₁ - ℓ₂|"""
        a = math.sqrt(0.5)
        grid = render_grid(VortexSuperposition(a, a, 0.0, ell1, ell2), 256, 256)
        assert count_lobes(grid) == abs(ell1 - ell2)

    def test_unresolvable(self):
        """A nearly pure state has no resolvable lobes"""
        state = VortexSuperposition.from_populations(0.999, 0.0, 3)
        with pytest.raises(AnalysisError, match="not resolvable"):
            count_lobes(render_grid(state, 128, 128))


class TestRotation:
    def test_half_turn_phase(self, equal_grid):
        """θ = π rotates the ℓ = 3 pattern by π/6"""
        rotated = render_grid(VortexSuperposition.from_populations(0.5, math.pi, 3))
        assert pattern_rotation(rotated, equal_grid) == pytest.approx(
            math.pi / 6, rel=0.01
        )

    @pytest.mark.parametrize("theta", [0.0, 2 * math.pi])
    def test_full_period(self, equal_grid, theta):
        """θ = 0 and θ = 2π give no rotation"""
        grid = render_grid(VortexSuperposition.from_populations(0.5, theta, 3))
        assert pattern_rotation(grid, equal_grid) == pytest.approx(0.0, abs=1e-6)

    def test_rotation_is_linear_in_phase(self):
        """Δθ rotates the pattern by Δθ/|ℓ₁ - ℓ₂|"""
        reference = render_grid(
            VortexSuperposition.from_populations(0.3, 0.0, 2), 256, 256
        )
        grid = render_grid(
            VortexSuperposition.from_populations(0.3, 1.0, 2), 256, 256
        )
        assert pattern_rotation(grid, reference) == pytest.approx(
            0.25, abs=2 * math.pi / 400
        )

    def test_featureless(self):
        """Single-component patterns have no defined rotation"""
        flat = render_grid(VortexSuperposition(1.0, 0.0, 0.0, 3, -3), 128, 128)
        with pytest.raises(AnalysisError, match="featureless"):
            pattern_rotation(flat, flat)

    def test_geometry_mismatch(self, equal_grid):
        """Grids of different shape are rejected"""
        small = render_grid(VortexSuperposition.from_populations(0.5, 0.0, 3), 64, 64)
        with pytest.raises(AnalysisError, match="same geometry"):
            pattern_rotation(small, equal_grid)

    def test_analyze_pattern(self, equal_grid):
        """All three quantities come back together"""
        result = analyze_pattern(equal_grid, equal_grid)
        assert isinstance(result, PatternAnalysis)
        assert result.visibility == pytest.approx(1.0, abs=1e-3)
        assert result.lobe_count == 6
        assert result.rotation == pytest.approx(0.0, abs=1e-9)


# ============================================================================
# Tests for disambiguate_amplitudes
# ============================================================================


class TestDisambiguation:
    def test_candidates(self):
        """V = 0.6 admits the 0.1 / 0.9 population split"""
        big, small = amplitude_candidates(0.6)
        assert big**2 == pytest.approx(0.9)
        assert small**2 == pytest.approx(0.1)
        assert amplitude_candidates(1.0) == pytest.approx(
            (math.sqrt(0.5), math.sqrt(0.5))
        )

    def test_unshifted_patterns_identical(self, unequal_state):
        """The two assignments are indistinguishable before the shift"""
        np.testing.assert_allclose(
            np.sort(render_grid(unequal_state, 128, 128).values.ravel()),
            np.sort(render_grid(unequal_state.swapped(), 128, 128).values.ravel()),
            rtol=1e-12,
            atol=1e-15,
        )

    @pytest.mark.parametrize("population", [0.1, 0.9])
    def test_shifted_patterns_resolve(self, population):
        """The shifted pattern picks out the right assignment"""
        state = VortexSuperposition.from_populations(population, 0.4, 3)
        after = render_grid(probe_shift(state), 256, 256)
        result = disambiguate_amplitudes(visibility(state), after, 3)
        assert isinstance(result, AmplitudeAssignment)
        assert not result.symmetric
        assert result.alpha == pytest.approx(state.alpha, abs=1e-9)
        assert result.beta == pytest.approx(state.beta, abs=1e-9)
        assert result.residual < 1e-3
        assert result.alternate_residual > 0.1

    def test_symmetric(self, equal_state):
        """V = 1 needs no disambiguation"""
        after = render_grid(probe_shift(equal_state), 128, 128)
        result = disambiguate_amplitudes(1.0, after, 3)
        assert result.symmetric
        assert result.alpha == result.beta == pytest.approx(math.sqrt(0.5))

    def test_bad_visibility(self, equal_grid):
        """Visibilities above 1 are rejected"""
        with pytest.raises(ValueError, match="Visibility"):
            disambiguate_amplitudes(1.5, equal_grid, 3)
