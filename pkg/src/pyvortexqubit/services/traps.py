"""
Trap Models and Condensate Wavefunctions

Trap potentials, condensate interaction parameters and the spatial ansätze
used to project the spinor equations onto mode amplitudes.

Supported Traps
---------------
- Harmonic (pancake) trap with Gaussian ground state and vortex ansätze
- Mexican-hat (toroidal) trap with Thomas-Fermi ground state and vortices

Thomas-Fermi quantities are computed internally in oscillator units
(ħ = m = ω⊥ = 1, lengths in L⊥) and converted back at the boundary.
"""

# Built-Ins
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, TypeAlias
import logging
import math

# Dependencies
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import constants
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln

# Local Imports
from pyvortexqubit.custom_types import WavefunctionKind
from pyvortexqubit.exceptions import (
    ConfigurationError,
    NoCondensateError,
    StateError,
)

logger = logging.getLogger(__name__)

HBAR: float = constants.hbar
KAPPA_AGREEMENT_TOL = 1e-12
MU_BRACKET_WIDTH = 1e4


# ---- Trap Definitions ----
@dataclass(eq=True, frozen=True)
class HarmonicTrap:
    """
    Axially symmetric harmonic trap.

    Attributes
    ----------
    mass: float
        Atomic mass (kg, or 1 in oscillator units).
    omega_perp: float
        Transverse trap frequency (rad/s).
    omega_z: float
        Axial trap frequency (rad/s).
    hbar: float
        Reduced Planck constant in the unit system of the other fields.
    l_perp, l_z: float
        Oscillator lengths √(ħ/(mω)), derived.
    """

    mass: float
    omega_perp: float
    omega_z: float
    hbar: float = HBAR
    l_perp: float = field(init=False)
    l_z: float = field(init=False)

    def __post_init__(self) -> None:
        _validate_positive(
            mass=self.mass,
            omega_perp=self.omega_perp,
            omega_z=self.omega_z,
            hbar=self.hbar,
        )
        object.__setattr__(
            self, "l_perp", math.sqrt(self.hbar / (self.mass * self.omega_perp))
        )
        object.__setattr__(
            self, "l_z", math.sqrt(self.hbar / (self.mass * self.omega_z))
        )

    @classmethod
    def from_lengths(
        cls, mass: float, l_perp: float, l_z: float, hbar: float = HBAR
    ) -> "HarmonicTrap":
        """Build the trap that has the given oscillator lengths."""
        _validate_positive(l_perp=l_perp, l_z=l_z)
        return cls(
            mass=mass,
            omega_perp=hbar / (mass * l_perp**2),
            omega_z=hbar / (mass * l_z**2),
            hbar=hbar,
        )

    @property
    def is_pancake(self) -> bool:
        return self.omega_perp < self.omega_z

    def to_oscillator_units(self) -> "HarmonicTrap":
        return HarmonicTrap(1.0, 1.0, self.omega_z / self.omega_perp, 1.0)


@dataclass(eq=True, frozen=True)
class MexicanHatTrap:
    """
    Quartic-minus-quadratic radial trap, harmonic along z.

    V(ρ, z) = -½σMρ² + ¼λgρ⁴ + ½mω_z²z² with M = mω⊥² and g = m²ω⊥³/ħ.

    Attributes
    ----------
    sigma: float
        Strength of the inverted quadratic term, > 0.
    lam: float
        Strength of the quartic term, > 0.
    mass, omega_perp, omega_z, hbar: float
        As for `HarmonicTrap`.
    """

    sigma: float
    lam: float
    mass: float
    omega_perp: float
    omega_z: float
    hbar: float = HBAR
    big_m: float = field(init=False)
    g: float = field(init=False)
    l_perp: float = field(init=False)
    l_z: float = field(init=False)

    def __post_init__(self) -> None:
        _validate_positive(
            sigma=self.sigma,
            lam=self.lam,
            mass=self.mass,
            omega_perp=self.omega_perp,
            omega_z=self.omega_z,
            hbar=self.hbar,
        )
        object.__setattr__(self, "big_m", self.mass * self.omega_perp**2)
        object.__setattr__(
            self, "g", self.mass**2 * self.omega_perp**3 / self.hbar
        )
        object.__setattr__(
            self, "l_perp", math.sqrt(self.hbar / (self.mass * self.omega_perp))
        )
        object.__setattr__(
            self, "l_z", math.sqrt(self.hbar / (self.mass * self.omega_z))
        )

    @property
    def minimum_radius(self) -> float:
        """Radius of the potential minimum in the z = 0 plane."""
        return math.sqrt(self.sigma * self.big_m / (self.lam * self.g))

    @property
    def minimum_energy(self) -> float:
        """Potential at the bottom of the hat, -σ²M²/(4λg)."""
        return -((self.sigma * self.big_m) ** 2) / (4 * self.lam * self.g)

    def to_oscillator_units(self) -> "MexicanHatTrap":
        return MexicanHatTrap(
            self.sigma,
            self.lam,
            1.0,
            1.0,
            self.omega_z / self.omega_perp,
            1.0,
        )


Trap: TypeAlias = HarmonicTrap | MexicanHatTrap


def _validate_positive(**values: float) -> None:
    """Raise if any named value is not strictly positive."""
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}.")


def energy_unit(trap: Trap) -> float:
    return trap.hbar * trap.omega_perp


# ---- Condensate Parameters ----
@dataclass(eq=True, frozen=True)
class CondensateParams:
    """
    Interaction parameters of a single-species condensate.

    Attributes
    ----------
    n_atoms: float
        Mean atom number N.
    a_sc: float
        s-wave scattering length (m).
    eta: float
        Interaction strength 4πħ²aN/m (J·m³), >= 0.
    kappa: float
        Harmonic-trap interaction rate (rad/s); 0 when not applicable.
    mu: float or None
        Chemical potential (J), None until solved.
    """

    n_atoms: float
    a_sc: float
    eta: float
    kappa: float = 0.0
    mu: Optional[float] = None

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise ValueError(
                f"Only repulsive condensates are modelled, eta={self.eta!r}."
            )
        if self.n_atoms < 0:
            raise ValueError(f"Atom number must be >= 0: {self.n_atoms!r}.")

    @classmethod
    def from_scattering(
        cls, n_atoms: float, a_sc: float, mass: float, hbar: float = HBAR
    ) -> "CondensateParams":
        """η = 4πħ²a_scN/m."""
        eta = 4 * math.pi * hbar**2 * a_sc * n_atoms / mass
        return cls(n_atoms=n_atoms, a_sc=a_sc, eta=eta)

    def with_mu(self, mu: float) -> "CondensateParams":
        return replace(self, mu=mu)

    def to_oscillator_units(self, trap: Trap) -> "CondensateParams":
        e_unit = energy_unit(trap)
        return CondensateParams(
            n_atoms=self.n_atoms,
            a_sc=self.a_sc / trap.l_perp,
            eta=self.eta / (e_unit * trap.l_perp**3),
            kappa=self.kappa / trap.omega_perp,
            mu=None if self.mu is None else self.mu / e_unit,
        )


def kappa_from(params: CondensateParams, trap: HarmonicTrap) -> float:
    """
    Harmonic-trap interaction rate κ.

    Evaluates both the scattering-length form πħa_scN/(m(2π)^{3/2}L⊥²L_z)
    and the interaction-strength form η/(4(2π)^{3/2}ħL⊥²L_z) and requires
    them to agree.

    Raises
    ------
    ConfigurationError
        If the two forms disagree beyond 1e-12 relative.
    """
    geometry = (2 * math.pi) ** 1.5 * trap.l_perp**2 * trap.l_z
    kappa_a = (
        math.pi * trap.hbar * params.a_sc * params.n_atoms
        / (trap.mass * geometry)
    )
    kappa_eta = params.eta / (4 * trap.hbar * geometry)
    scale = max(abs(kappa_a), abs(kappa_eta))
    if scale > 0 and abs(kappa_a - kappa_eta) > KAPPA_AGREEMENT_TOL * scale:
        raise ConfigurationError(
            f"Scattering-length kappa ({kappa_a:.12e}) disagrees with "
            f"eta kappa ({kappa_eta:.12e}); eta is not 4πħ²aN/m for this "
            "trap's mass.",
            field="condensate",
        )
    return kappa_eta


def n_atoms_for_kappa(kappa: float, a_sc: float, trap: HarmonicTrap) -> float:
    """Atom number that produces `kappa` in `trap`."""
    geometry = (2 * math.pi) ** 1.5 * trap.l_perp**2 * trap.l_z
    return kappa * trap.mass * geometry / (math.pi * trap.hbar * a_sc)


# ---- Potentials ----
def potential_value(trap: Trap, rho: ArrayLike, z: ArrayLike) -> NDArray:
    """
    Trap potential energy (J) at cylindrical position (ρ, z).

    Parameters
    ----------
    trap: HarmonicTrap or MexicanHatTrap
        Trap definition.
    rho: ArrayLike
        Radial distance, >= 0.
    z: ArrayLike
        Axial coordinate.
    """
    rho_arr = np.asarray(rho, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    if np.any(rho_arr < 0):
        raise ValueError("Radial coordinate must be non-negative.")
    axial = 0.5 * trap.mass * trap.omega_z**2 * z_arr**2
    match trap:
        case HarmonicTrap():
            radial = 0.5 * trap.mass * trap.omega_perp**2 * rho_arr**2
        case MexicanHatTrap():
            radial = (
                -0.5 * trap.sigma * trap.big_m * rho_arr**2
                + 0.25 * trap.lam * trap.g * rho_arr**4
            )
        case _:
            raise TypeError(f"Unsupported trap type: {type(trap)!r}")
    return radial + axial


# ---- Harmonic Wavefunctions ----
def harmonic_wavefunction(
    trap: HarmonicTrap,
    ell: int,
    rho: ArrayLike,
    phi: ArrayLike,
    z: ArrayLike,
) -> NDArray[np.complex128]:
    """
    Normalized harmonic-trap ground state (ℓ = 0) or vortex state.

    ψ_g = exp(-½[(ρ/L⊥)² + (z/L_z)²]) / (π^{3/4} L⊥ L_z^{1/2}) and
    ψ_v = ρ^{|ℓ|} e^{iℓφ} ψ_g / (√(|ℓ|!) L⊥^{|ℓ|}).
    """
    profile = _harmonic_profile(trap, ell, rho, z)
    return profile * np.exp(1j * ell * np.asarray(phi, dtype=float))


def _harmonic_profile(
    trap: HarmonicTrap, ell: int, rho: ArrayLike, z: ArrayLike
) -> NDArray[np.float64]:
    """Real, phase-free part of `harmonic_wavefunction`."""
    n = abs(ell)
    rho_s = np.asarray(rho, dtype=float) / trap.l_perp
    z_s = np.asarray(z, dtype=float) / trap.l_z
    norm = 1.0 / (math.pi**0.75 * trap.l_perp * math.sqrt(trap.l_z))
    vortex = np.exp(-0.5 * gammaln(n + 1)) * rho_s**n
    return norm * vortex * np.exp(-0.5 * (rho_s**2 + z_s**2))


def _harmonic_gradient(
    trap: HarmonicTrap, ell: int, rho: ArrayLike, z: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(∂ρ, ∂z) of the harmonic profile, safe at ρ = 0."""
    n = abs(ell)
    lp, lz = trap.l_perp, trap.l_z
    rho_arr = np.asarray(rho, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    base = (
        np.exp(-0.5 * gammaln(n + 1))
        / (math.pi**0.75 * lp * math.sqrt(lz) * lp**n)
        * np.exp(-0.5 * ((rho_arr / lp) ** 2 + (z_arr / lz) ** 2))
    )
    if n == 0:
        d_radial = -rho_arr / lp**2
    else:
        d_radial = n * rho_arr ** (n - 1) - rho_arr ** (n + 1) / lp**2
    d_rho = base * d_radial
    d_z = base * rho_arr**n * (-z_arr / lz**2)
    return d_rho, d_z


# ---- Thomas-Fermi (Mexican Hat) ----
@dataclass(eq=True, frozen=True)
class ThomasFermiState:
    """
    Result of a chemical-potential solve.

    Attributes
    ----------
    mu: float
        Chemical potential (J).
    r_minus, r_plus: float
        Inner and outer Thomas-Fermi radii (m).
    eta: float
        Interaction strength used in the solve (J·m³).
    """

    mu: float
    r_minus: float
    r_plus: float
    eta: float


def tf_radii(trap: MexicanHatTrap, mu: float) -> tuple[float, float]:
    """
    Inner and outer radii where μ = V(ρ, 0).

    R±² = (σM ± √(σ²M² + 4λgμ)) / (λg); the inner radius is reported as 0
    once μ >= 0 and the density reaches the axis.

    Raises
    ------
    NoCondensateError
        If μ lies below the bottom of the hat.
    """
    sm = trap.sigma * trap.big_m
    lg = trap.lam * trap.g
    disc = sm**2 + 4 * lg * mu
    if -1e-12 * sm**2 < disc < 0:
        disc = 0.0
    if disc < 0:
        raise NoCondensateError(
            f"Chemical potential {mu!r} lies below the trap minimum "
            f"{trap.minimum_energy!r}; no density anywhere."
        )
    root = math.sqrt(disc)
    r_plus_sq = (sm + root) / lg
    r_minus_sq = max((sm - root) / lg, 0.0)
    return math.sqrt(r_minus_sq), math.sqrt(r_plus_sq)


def _tf_radial_integral(
    trap_osc: MexicanHatTrap, n: int, mu: float
) -> float:
    """∫ u^n (μ - V(u)) du over the Thomas-Fermi support, u = ρ² (osc units)."""
    r_minus, r_plus = tf_radii(trap_osc, mu)
    half_sigma = 0.5 * trap_osc.sigma
    quarter_lam = 0.25 * trap_osc.lam

    def integrand(u: float) -> float:
        return u**n * (mu + half_sigma * u - quarter_lam * u**2)

    value, _ = quad(
        integrand, r_minus**2, r_plus**2, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return value


def tf_norm(trap: MexicanHatTrap, eta: float, mu: float, ell: int = 0) -> float:
    """
    ∫|ψ_TF|² d³r of the unscaled Thomas-Fermi ansatz.

    All arguments are in oscillator units; the Gaussian z-profile and the
    azimuthal integral are done in closed form.
    """
    n = abs(ell)
    radial = _tf_radial_integral(trap, n, mu)
    return math.pi**1.5 * radial / (eta * math.exp(gammaln(n + 1)))


def solve_chemical_potential(trap: MexicanHatTrap, eta: float) -> float:
    """
    Chemical potential that normalizes the ℓ = 0 Thomas-Fermi profile.

    Brent's method is run on μ ∈ (V_min, V_min + 10⁴ħω⊥) in oscillator
    units.

    Parameters
    ----------
    trap: MexicanHatTrap
        Trap definition.
    eta: float
        Interaction strength (J·m³), > 0.

    Returns
    -------
    mu: float
        Chemical potential (J).

    Raises
    ------
    ConfigurationError
        If `eta` is not positive or the bracket does not contain a root.
    """
    if not eta > 0:
        raise ConfigurationError(
            f"eta must be positive to solve for mu, got {eta!r}.",
            field="condensate",
        )
    trap_osc = trap.to_oscillator_units()
    eta_osc = eta / (energy_unit(trap) * trap.l_perp**3)
    lower = trap_osc.minimum_energy
    upper = lower + MU_BRACKET_WIDTH

    def residual(mu: float) -> float:
        return tf_norm(trap_osc, eta_osc, mu) - 1.0

    high = residual(upper)
    if high < 0:
        raise ConfigurationError(
            f"No chemical potential within {MU_BRACKET_WIDTH:g} ħω⊥ of the "
            f"hat minimum normalizes the condensate (norm at the upper "
            f"bracket is {high + 1.0:.6g}); reduce N or a_sc.",
            field="condensate",
        )
    mu_osc = brentq(residual, lower, upper, xtol=1e-14, rtol=1e-15)
    logger.info(
        "Solved chemical potential mu=%.12g hbar*omega_perp (eta=%.6g)",
        mu_osc,
        eta_osc,
    )
    return mu_osc * energy_unit(trap)


def solve_thomas_fermi(
    trap: MexicanHatTrap, params: CondensateParams
) -> ThomasFermiState:
    mu = solve_chemical_potential(trap, params.eta)
    r_minus, r_plus = tf_radii(trap, mu)
    return ThomasFermiState(mu=mu, r_minus=r_minus, r_plus=r_plus, eta=params.eta)


@lru_cache(maxsize=128)
def _tf_normalization(
    trap_osc: MexicanHatTrap, n: int, mu: float, eta: float
) -> float:
    """Stored constant that rescales the ansatz of charge |ℓ| = n to unit norm."""
    return 1.0 / math.sqrt(tf_norm(trap_osc, eta, mu, n))


def _tf_profile_osc(
    trap_osc: MexicanHatTrap,
    n: int,
    mu: float,
    eta: float,
    rho: ArrayLike,
    z: ArrayLike,
) -> NDArray[np.float64]:
    """Normalized real Thomas-Fermi profile in oscillator units."""
    rho_arr = np.asarray(rho, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    l_z = trap_osc.l_z
    v_plane = potential_value(trap_osc, rho_arr, 0.0)
    density = np.sqrt(np.maximum(mu - v_plane, 0.0) / eta)
    prefactor = np.exp(-0.5 * gammaln(n + 1)) / math.sqrt(l_z)
    axial = np.exp(-(z_arr**2) / (2 * l_z**2))
    unscaled = prefactor * rho_arr**n * axial * density
    return _tf_normalization(trap_osc, n, mu, eta) * unscaled


def tf_wavefunction(
    trap: MexicanHatTrap,
    ell: int,
    params: CondensateParams,
    rho: ArrayLike,
    phi: ArrayLike,
    z: ArrayLike,
) -> NDArray[np.complex128]:
    """
    Normalized Thomas-Fermi ansatz of charge ℓ in the Mexican-hat trap.

    (1/(L⊥√L_z)) (1/√|ℓ|!) (ρ/L⊥)^{|ℓ|} e^{-z²/(2L_z²)}
    · Max[Re √((μ - V(ρ, 0))/η), 0] · e^{iℓφ}, rescaled to unit norm.

    Raises
    ------
    StateError
        If `params.mu` has not been solved.
    """
    profile = _tf_profile(trap, ell, params, rho, z)
    return profile * np.exp(1j * ell * np.asarray(phi, dtype=float))


def _tf_profile(
    trap: MexicanHatTrap,
    ell: int,
    params: CondensateParams,
    rho: ArrayLike,
    z: ArrayLike,
) -> NDArray[np.float64]:
    if params.mu is None:
        raise StateError(
            "Chemical potential not solved; call solve_chemical_potential "
            "and attach it with CondensateParams.with_mu first."
        )
    trap_osc = trap.to_oscillator_units()
    osc = params.to_oscillator_units(trap)
    assert osc.mu is not None
    lp = trap.l_perp
    rho_osc = np.asarray(rho, dtype=float) / lp
    z_osc = np.asarray(z, dtype=float) / lp
    profile = _tf_profile_osc(
        trap_osc, abs(ell), osc.mu, osc.eta, rho_osc, z_osc
    )
    return profile / lp**1.5


# ---- Wavefunction Ansatz ----
@dataclass(eq=True, frozen=True)
class WavefunctionAnsatz:
    """
    A spatial mode ψ(ρ, φ, z) = profile(ρ, z) e^{iℓφ}.

    Attributes
    ----------
    kind: WavefunctionKind
        Which ansatz family this is.
    ell: int
        Vortex charge; 0 for the ground kinds.
    trap: HarmonicTrap or MexicanHatTrap
        Trap the ansatz belongs to.
    condensate: CondensateParams or None
        Required (with a solved μ) for the Thomas-Fermi kinds.
    """

    kind: WavefunctionKind
    ell: int
    trap: Trap
    condensate: Optional[CondensateParams] = None

    def __post_init__(self) -> None:
        ground = self.kind in (
            WavefunctionKind.HARMONIC_GROUND,
            WavefunctionKind.TF_GROUND,
        )
        if ground and self.ell != 0:
            raise ValueError(f"{self.kind} requires ell = 0, got {self.ell}.")
        if not ground and self.ell == 0:
            raise ValueError(f"{self.kind} requires a non-zero charge.")
        if self.is_thomas_fermi:
            if not isinstance(self.trap, MexicanHatTrap):
                raise TypeError("Thomas-Fermi ansätze need a MexicanHatTrap.")
            if self.condensate is None or self.condensate.mu is None:
                raise StateError(
                    "Thomas-Fermi ansätze need condensate parameters with a "
                    "solved chemical potential."
                )
        elif not isinstance(self.trap, HarmonicTrap):
            raise TypeError("Harmonic ansätze need a HarmonicTrap.")

    @classmethod
    def harmonic_ground(cls, trap: HarmonicTrap) -> "WavefunctionAnsatz":
        return cls(WavefunctionKind.HARMONIC_GROUND, 0, trap)

    @classmethod
    def harmonic_vortex(
        cls, trap: HarmonicTrap, ell: int
    ) -> "WavefunctionAnsatz":
        return cls(WavefunctionKind.HARMONIC_VORTEX, ell, trap)

    @classmethod
    def tf_ground(
        cls, trap: MexicanHatTrap, condensate: CondensateParams
    ) -> "WavefunctionAnsatz":
        return cls(WavefunctionKind.TF_GROUND, 0, trap, condensate)

    @classmethod
    def tf_vortex(
        cls, trap: MexicanHatTrap, ell: int, condensate: CondensateParams
    ) -> "WavefunctionAnsatz":
        return cls(WavefunctionKind.TF_VORTEX, ell, trap, condensate)

    @property
    def is_thomas_fermi(self) -> bool:
        return self.kind in (
            WavefunctionKind.TF_GROUND,
            WavefunctionKind.TF_VORTEX,
        )

    @property
    def has_kinetic(self) -> bool:
        """False for Thomas-Fermi kinds, whose kinetic energy is neglected."""
        return not self.is_thomas_fermi

    def profile(self, rho: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
        if self.is_thomas_fermi:
            assert isinstance(self.trap, MexicanHatTrap)
            assert self.condensate is not None
            return _tf_profile(self.trap, self.ell, self.condensate, rho, z)
        assert isinstance(self.trap, HarmonicTrap)
        return _harmonic_profile(self.trap, self.ell, rho, z)

    def gradient(
        self, rho: ArrayLike, z: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(∂ρ, ∂z) of the profile; harmonic kinds only."""
        if self.is_thomas_fermi:
            raise StateError(
                "Thomas-Fermi ansätze carry no kinetic energy gradient."
            )
        assert isinstance(self.trap, HarmonicTrap)
        return _harmonic_gradient(self.trap, self.ell, rho, z)

    def __call__(
        self, rho: ArrayLike, phi: ArrayLike, z: ArrayLike
    ) -> NDArray[np.complex128]:
        phase = np.exp(1j * self.ell * np.asarray(phi, dtype=float))
        return self.profile(rho, z) * phase

    def in_oscillator_units(self) -> "WavefunctionAnsatz":
        condensate = None
        if self.condensate is not None:
            condensate = self.condensate.to_oscillator_units(self.trap)
        return WavefunctionAnsatz(
            self.kind, self.ell, self.trap.to_oscillator_units(), condensate
        )
