"""
Vortex Superposition Detection

Renders the in-plane particle density of a two-charge vortex superposition
and analyses the resulting interference pattern.

Supported Analyses
------------------
- Fringe visibility, closed form or estimated from a density grid
- Lobe counting on the ring of peak density
- Pattern rotation relative to a reference grid
- Probe shift ℓ ↦ ℓ + 1 and amplitude disambiguation

Angular profiles are sampled on circles with cubic-spline interpolation of
the grid; fringe quantities come from the dominant azimuthal harmonic of
those profiles.
"""

# Built-Ins
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Optional, Protocol
import logging
import math

# Dependencies
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage, signal
from scipy.integrate import quad
from scipy.special import gammaln

# Local Imports
from pyvortexqubit.exceptions import AnalysisError, StateError
from pyvortexqubit.services.traps import (
    CondensateParams,
    HarmonicTrap,
    MexicanHatTrap,
    potential_value,
    solve_chemical_potential,
    tf_radii,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
MIN_GRID_SIZE = 64
DEFAULT_GRID_SIZE = 512
DEFAULT_ANGLES = 720
MIN_RESOLVABLE_VISIBILITY = 0.1
LOBE_HEIGHT_FRACTION = 0.5
SYMMETRIC_VISIBILITY = 1.0 - 1e-6
FEATURELESS_CONTRAST = 1e-4


# ---- Radial Profiles ----
class RadialProfile(Protocol):
    """Real in-plane radial amplitude u_ℓ(ρ), normalised so ∫u²2πρdρ = 1."""

    def amplitude(self, ell: int, rho: ArrayLike) -> NDArray[np.float64]: ...

    @property
    def default_extent(self) -> float: ...


@dataclass(eq=True, frozen=True)
class HarmonicProfile:
    """
    Harmonic-trap vortex profile in the z = 0 plane.

    u_ℓ(ρ) = (ρ/L⊥)^{|ℓ|} e^{-ρ²/(2L⊥²)} / (√(π|ℓ|!) L⊥)
    """

    l_perp: float = 1.0

    def __post_init__(self) -> None:
        if not self.l_perp > 0:
            raise ValueError(f"Oscillator length must be positive: {self.l_perp}")

    @classmethod
    def from_trap(cls, trap: HarmonicTrap) -> "HarmonicProfile":
        return cls(trap.l_perp)

    def amplitude(self, ell: int, rho: ArrayLike) -> NDArray[np.float64]:
        n = abs(ell)
        s = np.asarray(rho, dtype=float) / self.l_perp
        norm = np.exp(-0.5 * gammaln(n + 1)) / (math.sqrt(math.pi) * self.l_perp)
        return norm * s**n * np.exp(-0.5 * s**2)

    @property
    def default_extent(self) -> float:
        return 6.0 * self.l_perp


@lru_cache(maxsize=64)
def _planar_tf_norm(trap_osc: MexicanHatTrap, mu_osc: float, n: int) -> float:
    """π∫uⁿ(μ - V(√u, 0))du over the support, oscillator units."""
    r_minus, r_plus = tf_radii(trap_osc, mu_osc)

    def integrand(u: float) -> float:
        v = float(potential_value(trap_osc, math.sqrt(u), 0.0))
        return u**n * max(mu_osc - v, 0.0)

    value, _ = quad(
        integrand, r_minus**2, r_plus**2, epsabs=0.0, epsrel=1e-12, limit=200
    )
    return math.pi * value


@dataclass(eq=True, frozen=True)
class ThomasFermiProfile:
    """
    Thomas-Fermi vortex profile of the Mexican-hat trap in the z = 0 plane.

    u_ℓ(ρ) ∝ ρ^{|ℓ|} √max(μ - V(ρ, 0), 0), normalised in the plane.

    Raises
    ------
    StateError
        If the condensate has no solved chemical potential.
    """

    trap: MexicanHatTrap
    condensate: CondensateParams

    def __post_init__(self) -> None:
        if self.condensate.mu is None:
            raise StateError(
                "Thomas-Fermi profiles need a solved chemical potential; "
                "use ThomasFermiProfile.solved."
            )

    @classmethod
    def solved(
        cls, trap: MexicanHatTrap, condensate: CondensateParams
    ) -> "ThomasFermiProfile":
        """Solve μ first if the condensate does not carry one."""
        if condensate.mu is None:
            condensate = condensate.with_mu(
                solve_chemical_potential(trap, condensate.eta)
            )
        return cls(trap, condensate)

    def amplitude(self, ell: int, rho: ArrayLike) -> NDArray[np.float64]:
        assert self.condensate.mu is not None
        n = abs(ell)
        lp = self.trap.l_perp
        trap_osc = self.trap.to_oscillator_units()
        mu_osc = self.condensate.to_oscillator_units(self.trap).mu
        assert mu_osc is not None
        s = np.asarray(rho, dtype=float) / lp
        density = np.maximum(mu_osc - potential_value(trap_osc, s, 0.0), 0.0)
        norm = _planar_tf_norm(trap_osc, mu_osc, n)
        return s**n * np.sqrt(density / norm) / lp

    @property
    def default_extent(self) -> float:
        assert self.condensate.mu is not None
        _, r_plus = tf_radii(self.trap, self.condensate.mu)
        return 1.2 * r_plus


# ---- States ----
@dataclass(eq=True, frozen=True)
class VortexSuperposition:
    """
    α|ℓ₁⟩ + βe^{iθ}|ℓ₂⟩ with real, non-negative α and β.

    Attributes
    ----------
    alpha, beta: float
        Amplitudes with α² + β² = 1.
    theta: float
        Relative phase (radians).
    ell1, ell2: int
        Distinct vortex charges.
    profile: RadialProfile
        Radial shape of each charge; harmonic in units of L⊥ by default.
    """

    alpha: float
    beta: float
    theta: float = 0.0
    ell1: int = 3
    ell2: int = -3
    profile: RadialProfile = field(default_factory=HarmonicProfile)

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(
                f"Amplitudes must be non-negative: ({self.alpha}, {self.beta})"
            )
        norm = self.alpha**2 + self.beta**2
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"α² + β² must equal 1, got {norm!r}")
        if self.ell1 == self.ell2:
            raise ValueError(f"Charges must differ, both are {self.ell1}")

    @classmethod
    def from_populations(
        cls,
        population1: float,
        theta: float = 0.0,
        ell: int = 3,
        profile: Optional[RadialProfile] = None,
    ) -> "VortexSuperposition":
        """State with |α|² = `population1` on +ℓ and the rest on -ℓ."""
        if not 0.0 <= population1 <= 1.0:
            raise ValueError(f"Population must lie in [0, 1]: {population1}")
        return cls(
            math.sqrt(population1),
            math.sqrt(1.0 - population1),
            theta,
            ell,
            -ell,
            HarmonicProfile() if profile is None else profile,
        )

    @classmethod
    def from_vortex_amplitudes(
        cls,
        plus: complex,
        minus: complex,
        ell: int,
        profile: Optional[RadialProfile] = None,
    ) -> "VortexSuperposition":
        """Normalised qubit state from the complex ±ℓ amplitudes of a spinor."""
        plus, minus = complex(plus), complex(minus)
        norm = math.hypot(abs(plus), abs(minus))
        if norm == 0:
            raise StateError("No vortex population to detect.")
        alpha, beta = abs(plus) / norm, abs(minus) / norm
        theta = float(np.angle(minus) - np.angle(plus)) % (2 * math.pi)
        return cls(
            alpha / math.hypot(alpha, beta),
            beta / math.hypot(alpha, beta),
            theta,
            ell,
            -ell,
            HarmonicProfile() if profile is None else profile,
        )

    @property
    def fringe_order(self) -> int:
        """Number of lobes, |ℓ₁ - ℓ₂|."""
        return abs(self.ell1 - self.ell2)

    def swapped(self) -> "VortexSuperposition":
        """Exchange the two amplitudes, keeping charges and phase."""
        return VortexSuperposition(
            self.beta, self.alpha, self.theta, self.ell1, self.ell2, self.profile
        )


def interference_density(
    state: VortexSuperposition, rho: ArrayLike, phi: ArrayLike
) -> NDArray[np.float64]:
    """
    |αu₁(ρ)e^{iℓ₁φ} + βe^{iθ}u₂(ρ)e^{iℓ₂φ}|² at polar positions (ρ, φ).

    For ℓ₂ = -ℓ₁ this is A(ρ)[1 + 2αβcos(2ℓφ - θ)].
    """
    phi_arr = np.asarray(phi, dtype=float)
    a = state.alpha * state.profile.amplitude(state.ell1, rho)
    b = state.beta * state.profile.amplitude(state.ell2, rho)
    cross = np.cos((state.ell1 - state.ell2) * phi_arr - state.theta)
    return a**2 + b**2 + 2 * a * b * cross


def probe_shift(state: VortexSuperposition) -> VortexSuperposition:
    """
    Raise both charges by one, as an ℓ = +1 probe beam does.

    Raises
    ------
    ValueError
        If the charges are not opposite.
    """
    if state.ell2 != -state.ell1:
        raise ValueError(
            f"Probe shift expects charges (ℓ, -ℓ), got ({state.ell1}, {state.ell2})"
        )
    return VortexSuperposition(
        state.alpha,
        state.beta,
        state.theta,
        state.ell1 + 1,
        state.ell2 + 1,
        state.profile,
    )


# ---- Density Grids ----
@dataclass(frozen=True, eq=False)
class DensityGrid:
    """
    Particle density sampled at cell centres of a square, origin-centred grid.

    `values[j, i]` is the density at (x[i], y[j]); rows run along y.
    """

    x: NDArray[np.float64]
    y: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.values.shape != (self.y.size, self.x.size):
            raise ValueError(
                f"Grid values have shape {self.values.shape}, expected "
                f"{(self.y.size, self.x.size)}"
            )
        if np.any(self.values < 0):
            raise ValueError("Density values must be non-negative")
        for axis in (self.x, self.y):
            tol = 1e-12 * np.ptp(axis)
            if not np.allclose(axis, -axis[::-1], rtol=0, atol=tol):
                raise ValueError("Grid axes must be symmetric about the origin")

    @property
    def nx(self) -> int:
        return self.x.size

    @property
    def ny(self) -> int:
        return self.y.size

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dy(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def extent(self) -> float:
        """Half-width of the grid (outer cell edge)."""
        return float(self.x[-1] + 0.5 * self.dx)

    def total(self) -> float:
        """Midpoint-rule integral of the density."""
        return float(self.values.sum() * self.dx * self.dy)

    @cached_property
    def _spline_coefficients(self) -> NDArray[np.float64]:
        return ndimage.spline_filter(self.values, order=3, mode="nearest")

    def sample(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
        """Cubic-spline interpolation at arbitrary points inside the grid."""
        col = (np.asarray(x, dtype=float) - self.x[0]) / self.dx
        row = (np.asarray(y, dtype=float) - self.y[0]) / self.dy
        return ndimage.map_coordinates(
            self._spline_coefficients,
            [row, col],
            order=3,
            mode="nearest",
            prefilter=False,
        )

    def to_csv_rows(self) -> dict[str, NDArray[np.float64]]:
        """Flat (x, y, density) columns in row-major order."""
        xx, yy = np.meshgrid(self.x, self.y, indexing="xy")
        return {
            "x": xx.ravel(),
            "y": yy.ravel(),
            "density": self.values.ravel(),
        }

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "shape": [self.ny, self.nx],
            "extent": self.extent,
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "values": self.values.tolist(),
        }


def _centred_axis(n: int, extent: float) -> NDArray[np.float64]:
    step = 2.0 * extent / n
    return (np.arange(n) - 0.5 * (n - 1)) * step


def render_grid(
    state: VortexSuperposition,
    nx: int = DEFAULT_GRID_SIZE,
    ny: int = DEFAULT_GRID_SIZE,
    extent: Optional[float] = None,
) -> DensityGrid:
    """
    Sample the interference density on [-extent, extent]².

    Parameters
    ----------
    state: VortexSuperposition
        State to render.
    nx, ny: int
        Cell counts, each >= 64.
    extent: float, optional
        Half-width of the grid; defaults to the profile's default extent.
    """
    if nx < MIN_GRID_SIZE or ny < MIN_GRID_SIZE:
        raise ValueError(
            f"Grids need at least {MIN_GRID_SIZE} cells per side, got {nx}x{ny}"
        )
    extent = state.profile.default_extent if extent is None else extent
    if not extent > 0:
        raise ValueError(f"Grid extent must be positive: {extent}")
    x = _centred_axis(nx, extent)
    y = _centred_axis(ny, extent)
    xx, yy = np.meshgrid(x, y, indexing="xy")
    values = interference_density(state, np.hypot(xx, yy), np.arctan2(yy, xx))
    return DensityGrid(x, y, values)


# ---- Profiles on Circles ----
def angular_profile(
    grid: DensityGrid, radius: float, n_angles: int = DEFAULT_ANGLES
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Density on the circle of `radius`, sampled at equally spaced angles."""
    if not 0 <= radius < grid.extent:
        raise AnalysisError(
            f"Radius {radius!r} lies outside the grid (extent {grid.extent!r})"
        )
    phi = 2 * np.pi * np.arange(n_angles) / n_angles
    return phi, grid.sample(radius * np.cos(phi), radius * np.sin(phi))


def ring_averages(
    grid: DensityGrid, radii: ArrayLike, n_angles: int = DEFAULT_ANGLES
) -> NDArray[np.float64]:
    """Azimuthal mean of the density on each circle in `radii`."""
    r = np.ravel(np.asarray(radii, dtype=float))
    if np.any(r < 0) or np.any(r >= grid.extent):
        raise AnalysisError("Ring radii must lie inside the grid")
    phi = 2 * np.pi * np.arange(n_angles) / n_angles
    samples = grid.sample(np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi)))
    return samples.mean(axis=1)


def _ring_radii(grid: DensityGrid, n_radii: int = 256) -> NDArray[np.float64]:
    return np.linspace(0.0, grid.extent * (1 - 1e-9), n_radii, endpoint=False)


def peak_ring_radius(grid: DensityGrid, n_radii: int = 256) -> float:
    """
    Radius of maximum ring-averaged density.

    Raises
    ------
    AnalysisError
        If the grid holds no density.
    """
    if not np.any(grid.values > 0):
        raise AnalysisError("Density grid is empty")
    radii = _ring_radii(grid, n_radii)
    averages = ring_averages(grid, radii)
    k = int(np.argmax(averages))
    if 0 < k < radii.size - 1:
        left, centre, right = averages[k - 1 : k + 2]
        curvature = left - 2 * centre + right
        if curvature < 0:
            step = radii[1] - radii[0]
            return float(radii[k] + 0.5 * step * (left - right) / curvature)
    return float(radii[k])


def _harmonics(
    grid: DensityGrid, radius: float, n_angles: int
) -> NDArray[np.complex128]:
    _, profile = angular_profile(grid, radius, n_angles)
    return np.fft.rfft(profile)


def _dominant_order(spectrum: NDArray[np.complex128]) -> int:
    return int(np.argmax(np.abs(spectrum[1:]))) + 1


# ---- Pattern Analysis ----
@dataclass(eq=True, frozen=True)
class PatternAnalysis:
    """Summary of one density grid."""

    visibility: float
    lobe_count: int
    rotation: float
    ring_radius: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"Visibility must lie in [0, 1]: {self.visibility}")


def visibility(
    source: VortexSuperposition | DensityGrid,
    radius: Optional[float] = None,
    n_angles: int = DEFAULT_ANGLES,
) -> float:
    """
    Fringe visibility (I_max - I_min)/(I_max + I_min).

    For a state this is the closed form 2αβ. For a grid the angular profile
    on the ring of peak density is decomposed into azimuthal harmonics and
    the extremes of the dominant fringe harmonic give the estimate.

    Raises
    ------
    AnalysisError
        If the grid holds no density on the ring.
    """
    match source:
        case VortexSuperposition():
            return 2.0 * source.alpha * source.beta
        case DensityGrid():
            r = peak_ring_radius(source) if radius is None else radius
            spectrum = _harmonics(source, r, n_angles)
            mean = spectrum[0].real
            if not mean > 0:
                raise AnalysisError(f"No density on the ring at radius {r!r}")
            amplitude = 2 * abs(spectrum[_dominant_order(spectrum)])
            return float(min(amplitude / mean, 1.0))
        case _:
            raise TypeError(f"Cannot take the visibility of {type(source)!r}")


def count_lobes(grid: DensityGrid, n_angles: int = DEFAULT_ANGLES) -> int:
    """
    Number of azimuthal maxima on the ring of peak radial density.

    Peaks must exceed half of the ring maximum.

    Raises
    ------
    AnalysisError
        If the fringe visibility is too low to resolve lobes.
    """
    radius = peak_ring_radius(grid)
    v = visibility(grid, radius, n_angles)
    if v < MIN_RESOLVABLE_VISIBILITY:
        raise AnalysisError(
            f"Pattern visibility {v:.3g} is below "
            f"{MIN_RESOLVABLE_VISIBILITY}; lobes are not resolvable"
        )
    _, profile = angular_profile(grid, radius, n_angles)
    # start at the global minimum so no lobe straddles the wrap-around
    profile = np.roll(profile, -int(np.argmin(profile)))
    span = profile.max() - profile.min()
    peaks, _ = signal.find_peaks(
        profile,
        height=LOBE_HEIGHT_FRACTION * profile.max(),
        prominence=0.25 * span,
    )
    logger.debug("Found %d lobes at radius %.6g", peaks.size, radius)
    return int(peaks.size)


def pattern_rotation(
    grid: DensityGrid,
    reference: DensityGrid,
    n_angles: int = DEFAULT_ANGLES,
) -> float:
    """
    Rotation of `grid` relative to `reference`, in [0, 2π/m).

    The circular cross-correlation of the two angular profiles on the
    reference's ring is taken in Fourier space; the phase of its dominant
    harmonic m gives the shift modulo one fringe period 2π/m.

    Raises
    ------
    AnalysisError
        If either pattern has no fringes.
    """
    if grid.values.shape != reference.values.shape or not math.isclose(
        grid.extent, reference.extent
    ):
        raise AnalysisError("Rotation needs grids of the same geometry")
    radius = peak_ring_radius(reference)
    f_grid = _harmonics(grid, radius, n_angles)
    f_ref = _harmonics(reference, radius, n_angles)
    cross = f_grid * np.conj(f_ref)
    m = _dominant_order(cross)
    if not (f_grid[0].real > 0 and f_ref[0].real > 0):
        raise AnalysisError("Patterns are featureless; rotation is undefined")
    contrast = min(
        abs(f_grid[m]) / f_grid[0].real, abs(f_ref[m]) / f_ref[0].real
    )
    if contrast < FEATURELESS_CONTRAST:
        raise AnalysisError("Patterns are featureless; rotation is undefined")
    period = 2 * math.pi / m
    rotation = (-float(np.angle(cross[m])) / m) % period
    if math.isclose(rotation, period, abs_tol=1e-9):
        rotation = 0.0
    return rotation


def analyze_pattern(
    grid: DensityGrid, reference: Optional[DensityGrid] = None
) -> PatternAnalysis:
    """Visibility, lobe count and (with a reference) rotation of a grid."""
    radius = peak_ring_radius(grid)
    return PatternAnalysis(
        visibility=visibility(grid, radius),
        lobe_count=count_lobes(grid),
        rotation=0.0 if reference is None else pattern_rotation(grid, reference),
        ring_radius=radius,
    )


# ---- Amplitude Disambiguation ----
@dataclass(eq=True, frozen=True)
class AmplitudeAssignment:
    """
    Amplitudes recovered from a visibility and a probe-shifted pattern.

    Attributes
    ----------
    alpha, beta: float
        Amplitude on +ℓ and on -ℓ.
    residual: float
        Relative misfit of the chosen assignment to the shifted pattern.
    alternate_residual: float
        Misfit of the swapped assignment.
    symmetric: bool
        True when α ≈ β and no disambiguation is needed.
    """

    alpha: float
    beta: float
    residual: float
    alternate_residual: float
    symmetric: bool


def amplitude_candidates(v: float) -> tuple[float, float]:
    """Larger and smaller root of {α² + β² = 1, 2αβ = V}."""
    if not 0.0 <= v <= 1.0 + 1e-9:
        raise ValueError(f"Visibility must lie in [0, 1]: {v}")
    root = math.sqrt(max(1.0 - v**2, 0.0))
    return math.sqrt(0.5 * (1 + root)), math.sqrt(0.5 * (1 - root))


def _radial_residual(
    candidate: VortexSuperposition,
    radii: NDArray[np.float64],
    measured: NDArray[np.float64],
) -> float:
    u1 = candidate.profile.amplitude(candidate.ell1, radii)
    u2 = candidate.profile.amplitude(candidate.ell2, radii)
    model = (candidate.alpha * u1) ** 2 + (candidate.beta * u2) ** 2
    return float(np.linalg.norm(measured - model) / np.linalg.norm(measured))


def disambiguate_amplitudes(
    v_before: float,
    grid_after: DensityGrid,
    ell: int,
    profile: Optional[RadialProfile] = None,
) -> AmplitudeAssignment:
    """
    Decide which amplitude belongs to which charge.

    The unshifted visibility fixes {α, β} only up to exchange. After the
    probe shift the two charges ℓ + 1 and -ℓ + 1 have different radial
    profiles, so the ring-averaged density of `grid_after` is compared with
    both candidate assignments and the closer one wins.

    Parameters
    ----------
    v_before: float
        Visibility of the unshifted (ℓ, -ℓ) pattern.
    grid_after: DensityGrid
        Density of the probe-shifted state.
    ell: int
        Charge of the unshifted state, ℓ > 0.
    profile: RadialProfile, optional
        Radial model; harmonic in units of L⊥ by default.
    """
    profile = HarmonicProfile() if profile is None else profile
    big, small = amplitude_candidates(v_before)
    if v_before >= SYMMETRIC_VISIBILITY:
        a = math.sqrt(0.5)
        return AmplitudeAssignment(a, a, 0.0, 0.0, symmetric=True)
    radii = _ring_radii(grid_after)
    measured = ring_averages(grid_after, radii)
    if not np.any(measured > 0):
        raise AnalysisError("Shifted density grid is empty")
    first = probe_shift(VortexSuperposition(big, small, 0.0, ell, -ell, profile))
    second = first.swapped()
    r_first = _radial_residual(first, radii, measured)
    r_second = _radial_residual(second, radii, measured)
    logger.info(
        "Amplitude assignment residuals: %.3e (α > β), %.3e (α < β)",
        r_first,
        r_second,
    )
    if r_first <= r_second:
        return AmplitudeAssignment(big, small, r_first, r_second, False)
    return AmplitudeAssignment(small, big, r_second, r_first, False)
