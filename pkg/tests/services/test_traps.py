"""Unit tests for trap models and condensate wavefunctions"""

import math

import numpy as np
import pytest
from scipy import constants
from scipy.integrate import dblquad, quad

from pyvortexqubit.custom_types import WavefunctionKind
from pyvortexqubit.exceptions import (
    ConfigurationError,
    NoCondensateError,
    StateError,
)
from pyvortexqubit.services.traps import (
    CondensateParams,
    HarmonicTrap,
    MexicanHatTrap,
    WavefunctionAnsatz,
    harmonic_wavefunction,
    kappa_from,
    n_atoms_for_kappa,
    potential_value,
    solve_chemical_potential,
    solve_thomas_fermi,
    tf_norm,
    tf_radii,
    tf_wavefunction,
)


# ============================================================================
# Fixtures
# ============================================================================

RB87_MASS = 86.909180527 * constants.atomic_mass
RB87_A_SC = 5.3e-9


@pytest.fixture
def rb_trap() -> HarmonicTrap:
    """Pancake trap with L⊥ = 2.35 μm and L_z = 1.4 μm for Rb-87"""
    return HarmonicTrap.from_lengths(RB87_MASS, 2.35e-6, 1.4e-6)


@pytest.fixture
def osc_trap() -> HarmonicTrap:
    """Harmonic trap in oscillator units"""
    return HarmonicTrap(mass=1.0, omega_perp=1.0, omega_z=3.0, hbar=1.0)


@pytest.fixture
def hat_osc() -> MexicanHatTrap:
    """Mexican hat in oscillator units with its minimum at ρ² = 400"""
    return MexicanHatTrap(
        sigma=2.0, lam=0.005, mass=1.0, omega_perp=1.0, omega_z=4.0, hbar=1.0
    )


@pytest.fixture
def hat_condensate(hat_osc) -> CondensateParams:
    """Condensate with a solved chemical potential in the hat"""
    params = CondensateParams(n_atoms=1e5, a_sc=1e-3, eta=2000.0)
    return params.with_mu(solve_chemical_potential(hat_osc, params.eta))


def _norm_3d(profile) -> float:
    value, _ = dblquad(
        lambda z, rho: profile(rho, z) ** 2 * rho,
        0,
        np.inf,
        -np.inf,
        np.inf,
        epsabs=1e-12,
        epsrel=1e-10,
    )
    return 2 * math.pi * value


# ============================================================================
# Tests for trap definitions
# ============================================================================


class TestHarmonicTrap:
    def test_rubidium_frequencies(self, rb_trap):
        """L⊥ = 2.35 μm corresponds to ω⊥ ≈ 132 rad/s"""
        assert rb_trap.omega_perp == pytest.approx(132.0, rel=0.01)
        assert rb_trap.omega_z == pytest.approx(373.0, rel=0.01)
        assert rb_trap.is_pancake

    def test_lengths_round_trip(self, rb_trap):
        """Derived lengths reproduce the construction inputs"""
        assert rb_trap.l_perp == pytest.approx(2.35e-6, rel=1e-12)
        assert rb_trap.l_z == pytest.approx(1.4e-6, rel=1e-12)

    def test_rejects_non_positive(self):
        """Frequencies and masses must be positive"""
        with pytest.raises(ValueError, match="omega_z must be positive"):
            HarmonicTrap(mass=1.0, omega_perp=1.0, omega_z=0.0)

    def test_potential(self, osc_trap):
        """V = ½mω⊥²ρ² + ½mω_z²z²"""
        assert potential_value(osc_trap, 2.0, 1.0) == pytest.approx(2.0 + 4.5)
        with pytest.raises(ValueError, match="non-negative"):
            potential_value(osc_trap, -1.0, 0.0)


class TestMexicanHatTrap:
    def test_minimum(self, hat_osc):
        """Hat minimum of -200 ħω⊥ at ρ = 20 L⊥"""
        assert hat_osc.minimum_radius == pytest.approx(20.0)
        assert hat_osc.minimum_energy == pytest.approx(-200.0)
        rho = np.linspace(0, 40, 40001)
        values = potential_value(hat_osc, rho, 0.0)
        assert rho[np.argmin(values)] == pytest.approx(20.0, abs=1e-3)

    def test_negative_sigma_rejected(self):
        """Non-positive hat parameters are rejected"""
        with pytest.raises(ValueError, match="sigma must be positive"):
            MexicanHatTrap(-1.0, 0.005, 1.0, 1.0, 4.0, 1.0)

    def test_oscillator_units(self):
        """Oscillator-unit copy keeps the dimensionless shape"""
        trap = MexicanHatTrap(2.0, 0.005, RB87_MASS, 132.0, 500.0)
        osc = trap.to_oscillator_units()
        assert osc.minimum_energy == pytest.approx(-200.0)
        assert trap.minimum_energy / (
            constants.hbar * 132.0
        ) == pytest.approx(-200.0, rel=1e-10)


# ============================================================================
# Tests for condensate parameters
# ============================================================================


class TestKappa:
    def test_forms_agree(self, rb_trap):
        """Scattering-length and eta forms of κ coincide"""
        params = CondensateParams.from_scattering(18000, RB87_A_SC, RB87_MASS)
        kappa = kappa_from(params, rb_trap)
        assert kappa > 0

    def test_atom_number_for_target(self, rb_trap):
        """κ = 1.7 kHz needs on the order of 2·10⁴ atoms"""
        n_atoms = n_atoms_for_kappa(1700.0, RB87_A_SC, rb_trap)
        assert 1e4 < n_atoms < 3e4
        params = CondensateParams.from_scattering(
            n_atoms, RB87_A_SC, RB87_MASS
        )
        assert kappa_from(params, rb_trap) == pytest.approx(1700.0, rel=1e-10)

    def test_zero_atoms(self, rb_trap):
        """N = 0 gives κ = 0"""
        params = CondensateParams.from_scattering(0, RB87_A_SC, RB87_MASS)
        assert kappa_from(params, rb_trap) == 0.0

    def test_inconsistent_eta(self, rb_trap):
        """An eta that does not match a_sc and N is rejected"""
        params = CondensateParams(n_atoms=18000, a_sc=RB87_A_SC, eta=1e-50)
        with pytest.raises(ConfigurationError, match="disagrees"):
            kappa_from(params, rb_trap)

    def test_attractive_rejected(self):
        """Negative eta is out of scope"""
        with pytest.raises(ValueError, match="repulsive"):
            CondensateParams(n_atoms=10, a_sc=-1e-9, eta=-1.0)


# ============================================================================
# Tests for harmonic wavefunctions
# ============================================================================


class TestHarmonicWavefunction:
    @pytest.mark.parametrize("ell", [0, 1, -2, 3])
    def test_unit_norm(self, osc_trap, ell):
        """Ground and vortex states are normalized"""
        ansatz = (
            WavefunctionAnsatz.harmonic_ground(osc_trap)
            if ell == 0
            else WavefunctionAnsatz.harmonic_vortex(osc_trap, ell)
        )
        assert _norm_3d(ansatz.profile) == pytest.approx(1.0, abs=1e-8)

    def test_phase_and_vortex_core(self, osc_trap):
        """Vortex carries e^{iℓφ} and vanishes on the axis"""
        psi = harmonic_wavefunction(osc_trap, 2, np.array([0.0, 1.0]), 0.5, 0.0)
        assert psi[0] == 0
        assert np.angle(psi[1]) == pytest.approx(1.0)

    def test_gradient_matches_finite_difference(self, osc_trap):
        """Analytic gradient agrees with central differences"""
        ansatz = WavefunctionAnsatz.harmonic_vortex(osc_trap, 2)
        rho, z, h = 1.3, 0.4, 1e-6
        d_rho, d_z = ansatz.gradient(rho, z)
        fd_rho = (ansatz.profile(rho + h, z) - ansatz.profile(rho - h, z)) / (
            2 * h
        )
        fd_z = (ansatz.profile(rho, z + h) - ansatz.profile(rho, z - h)) / (
            2 * h
        )
        assert d_rho == pytest.approx(fd_rho, rel=1e-7)
        assert d_z == pytest.approx(fd_z, rel=1e-7)

    def test_ansatz_validation(self, osc_trap, hat_osc):
        """Kind, charge and trap must be consistent"""
        with pytest.raises(ValueError, match="ell = 0"):
            WavefunctionAnsatz(WavefunctionKind.HARMONIC_GROUND, 1, osc_trap)
        with pytest.raises(ValueError, match="non-zero"):
            WavefunctionAnsatz(WavefunctionKind.HARMONIC_VORTEX, 0, osc_trap)
        with pytest.raises(TypeError):
            WavefunctionAnsatz.harmonic_ground(hat_osc)
        with pytest.raises(StateError):
            WavefunctionAnsatz.tf_ground(
                hat_osc, CondensateParams(n_atoms=1, a_sc=1.0, eta=1.0)
            )


# ============================================================================
# Tests for Thomas-Fermi solution
# ============================================================================


class TestThomasFermi:
    def test_radii_bracket_minimum(self, hat_osc):
        """R₋ < R_min < R₊ and the radii sit on the μ contour"""
        mu = -100.0
        r_minus, r_plus = tf_radii(hat_osc, mu)
        assert r_minus < hat_osc.minimum_radius < r_plus
        assert potential_value(hat_osc, r_minus, 0.0) == pytest.approx(mu)
        assert potential_value(hat_osc, r_plus, 0.0) == pytest.approx(mu)

    def test_radii_coincide_at_minimum(self, hat_osc):
        """μ at the hat minimum gives R₋ = R₊"""
        r_minus, r_plus = tf_radii(hat_osc, hat_osc.minimum_energy)
        assert r_minus == pytest.approx(r_plus)

    def test_inner_radius_vanishes_above_zero(self, hat_osc):
        """The density reaches the axis once μ >= 0"""
        assert tf_radii(hat_osc, 5.0)[0] == 0.0

    def test_below_minimum(self, hat_osc):
        """μ below the hat bottom has no condensate"""
        with pytest.raises(NoCondensateError):
            tf_radii(hat_osc, -250.0)

    def test_normalization_after_solve(self, hat_osc):
        """Solved μ normalizes the ground ansatz"""
        eta = 2000.0
        mu = solve_chemical_potential(hat_osc, eta)
        assert tf_norm(hat_osc, eta, mu) == pytest.approx(1.0, abs=1e-8)
        r_minus, r_plus = tf_radii(hat_osc, mu)

        def integrand(rho: float) -> float:
            return rho * (mu - float(potential_value(hat_osc, rho, 0.0))) / eta

        radial, _ = quad(integrand, r_minus, r_plus, epsrel=1e-12)
        assert 2 * math.pi**1.5 * radial == pytest.approx(1.0, abs=1e-8)

    def test_mu_monotone_in_eta(self, hat_osc):
        """μ decreases with η and grows for large η"""
        etas = [50.0, 200.0, 1000.0, 5000.0, 2e4]
        mus = [solve_chemical_potential(hat_osc, eta) for eta in etas]
        assert all(a < b for a, b in zip(mus, mus[1:]))
        big = [solve_chemical_potential(hat_osc, eta) for eta in (1e5, 1e6, 1e7)]
        assert big[0] < big[1] < big[2]
        assert big[2] > 0

    def test_bracket_failure(self, hat_osc):
        """An enormous η cannot be normalized inside the bracket"""
        with pytest.raises(ConfigurationError, match="No chemical potential"):
            solve_chemical_potential(hat_osc, 1e14)

    def test_unsolved_mu(self, hat_osc):
        """Evaluating without a solved μ is a state error"""
        params = CondensateParams(n_atoms=1e5, a_sc=1e-3, eta=2000.0)
        with pytest.raises(StateError, match="not solved"):
            tf_wavefunction(hat_osc, 0, params, 20.0, 0.0, 0.0)

    @pytest.mark.parametrize("ell", [0, 2])
    def test_ansatz_unit_norm(self, hat_osc, hat_condensate, ell):
        """Stored constants renormalize ground and vortex ansätze"""
        if ell == 0:
            ansatz = WavefunctionAnsatz.tf_ground(hat_osc, hat_condensate)
        else:
            ansatz = WavefunctionAnsatz.tf_vortex(hat_osc, ell, hat_condensate)
        r_minus, r_plus = tf_radii(hat_osc, hat_condensate.mu)
        value, _ = dblquad(
            lambda z, rho: ansatz.profile(rho, z) ** 2 * rho,
            r_minus,
            r_plus,
            -np.inf,
            np.inf,
            epsabs=1e-12,
            epsrel=1e-10,
        )
        assert 2 * math.pi * value == pytest.approx(1.0, abs=1e-7)
        assert not ansatz.has_kinetic

    def test_si_and_oscillator_agree(self):
        """Physical-unit evaluation is the rescaled oscillator evaluation"""
        trap = MexicanHatTrap(2.0, 0.005, RB87_MASS, 132.0, 500.0)
        params = CondensateParams.from_scattering(1e5, RB87_A_SC, RB87_MASS)
        state = solve_thomas_fermi(trap, params)
        params = params.with_mu(state.mu)
        ansatz = WavefunctionAnsatz.tf_ground(trap, params)
        osc = ansatz.in_oscillator_units()
        rho = 20.0 * trap.l_perp
        si_value = ansatz.profile(rho, 0.0)
        osc_value = osc.profile(20.0, 0.0)
        assert si_value * trap.l_perp**1.5 == pytest.approx(
            osc_value, rel=1e-9
        )
        assert state.r_minus < 20.0 * trap.l_perp < state.r_plus
