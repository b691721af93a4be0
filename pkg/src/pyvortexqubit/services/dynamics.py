"""
Mode-Projected Population Dynamics

Right-hand sides for the amplitudes of the non-rotating mode (α) and the
two counter-rotating vortex modes (β, γ), plus the five-level model that
keeps the two excited amplitudes, and the adaptive integrator that turns
any of them into a `Trajectory`.

Every rhs is unit-agnostic: rates must be expressed in the inverse of the
time variable being integrated. The experiments integrate in τ = Ω₀t and
therefore pass every rate divided by Ω₀.

Supported Models
----------------
- "chirp": harmonic ℓ = 2 equations with Ω_c = Ω₀ and |Ω₀|²/Δ = ω⊥
- "stirap": harmonic ℓ = 2 equations with Gaussian pulses f(t), g(t)
- "general": coefficients from any `IntegralSet`
- "five-level": no adiabatic elimination, two excited amplitudes kept
"""

# Built-Ins
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, TypeAlias
import cmath
import logging
import math

# Dependencies
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

# Local Imports
from pyvortexqubit.exceptions import StiffnessError
from pyvortexqubit.services.spatial_integrals import IntegralSet

logger = logging.getLogger(__name__)

Rhs: TypeAlias = Callable[[float, NDArray[np.complex128]], NDArray[np.complex128]]

AMPLITUDE_TOL = 1e-12
NORM_DRIFT_BUDGET = 1e-8
ATOL_FACTOR = 1e-3


# ---- State ----
@dataclass(eq=True, frozen=True)
class SpinorAmplitudes:
    """
    Mode amplitudes of the condensate.

    Attributes
    ----------
    alpha, beta, gamma: complex
        Amplitudes of the ground, +ℓ and -ℓ modes.
    exc_i, exc_ip: complex, optional
        Excited amplitudes Ψ_i and Ψ_i′; both set in five-level mode.
    """

    alpha: complex
    beta: complex = 0j
    gamma: complex = 0j
    exc_i: Optional[complex] = None
    exc_ip: Optional[complex] = None

    def __post_init__(self) -> None:
        if (self.exc_i is None) != (self.exc_ip is None):
            raise ValueError("Both excited amplitudes must be set or neither.")

    @classmethod
    def ground(cls, five_level: bool = False) -> "SpinorAmplitudes":
        """All population in the non-rotating mode."""
        if five_level:
            return cls(1 + 0j, 0j, 0j, 0j, 0j)
        return cls(1 + 0j)

    @property
    def is_five_level(self) -> bool:
        return self.exc_i is not None

    def as_array(self) -> NDArray[np.complex128]:
        values = [self.alpha, self.beta, self.gamma]
        if self.is_five_level:
            values += [self.exc_i, self.exc_ip]
        return np.asarray(values, dtype=np.complex128)

    @classmethod
    def from_array(cls, values: ArrayLike) -> "SpinorAmplitudes":
        arr = np.asarray(values, dtype=np.complex128)
        match arr.shape:
            case (3,):
                return cls(complex(arr[0]), complex(arr[1]), complex(arr[2]))
            case (5,):
                return cls(*(complex(v) for v in arr))
            case _:
                raise ValueError(
                    f"Expected 3 or 5 amplitudes, got shape {arr.shape}."
                )

    def populations(self) -> NDArray[np.float64]:
        return np.abs(self.as_array()) ** 2

    def norm(self) -> float:
        """Total population over every component."""
        return float(np.sum(self.populations()))


def transfer_function(state: SpinorAmplitudes | ArrayLike) -> float:
    """F = |α|² - |β|² - |γ|²."""
    if isinstance(state, SpinorAmplitudes):
        arr = state.as_array()
    else:
        arr = np.asarray(state, dtype=np.complex128)
    pops = np.abs(arr[:3]) ** 2
    return float(pops[0] - pops[1] - pops[2])


# ---- Drive ----
@dataclass(eq=True, frozen=True)
class DriveConfig:
    """
    Optical drive of the Raman transitions.

    Attributes
    ----------
    omega0: float
        Peak OAM Rabi frequency |Ω₀| (rad/s), > 0.
    delta_big: float
        Single-photon detuning Δ (rad/s), non-zero.
    a_plus, a_minus: complex
        Vortex amplitudes of the optical superposition, |a₊|² + |a₋|² = 1.
    omega_c_ratio: float
        Ω_c/|Ω₀|.
    ell: int
        Optical OAM charge, > 0.
    """

    omega0: float
    delta_big: float
    a_plus: complex
    a_minus: complex
    omega_c_ratio: float = 1.0
    ell: int = 2

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ValueError(f"|Ω₀| must be positive, got {self.omega0!r}.")
        if self.delta_big == 0:
            raise ValueError("Single-photon detuning Δ must be non-zero.")
        weight = abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2
        if abs(weight - 1) > AMPLITUDE_TOL:
            raise ValueError(f"|a₊|² + |a₋|² must equal 1, got {weight!r}.")
        if self.ell < 1:
            raise ValueError(f"OAM charge must be positive, got {self.ell!r}.")

    @property
    def stark_rate(self) -> float:
        """|Ω₀|²/Δ, the two-photon rate scale after elimination."""
        return self.omega0**2 / self.delta_big

    def scaled_to(self, rate: float) -> "DriveConfig":
        """Divide every rate by `rate`; `scaled_to(omega0)` gives τ units."""
        return replace(
            self, omega0=self.omega0 / rate, delta_big=self.delta_big / rate
        )

    def mirrored(self) -> "DriveConfig":
        """Swap a₊ and a₋."""
        return replace(self, a_plus=self.a_minus, a_minus=self.a_plus)

    def rephased(self, chi: float) -> "DriveConfig":
        """Multiply both optical amplitudes by e^{iχ}."""
        phase = cmath.exp(1j * chi)
        return replace(
            self, a_plus=self.a_plus * phase, a_minus=self.a_minus * phase
        )


@dataclass(eq=True, frozen=True)
class ChirpSchedule:
    """Linear two-photon detuning δ(t) = C(1 - Ω₀t)."""

    c_const: float
    omega0: float

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ValueError(f"|Ω₀| must be positive, got {self.omega0!r}.")

    def delta(self, t: float) -> float:
        return self.c_const * (1 - self.omega0 * t)

    def scaled_to(self, rate: float) -> "ChirpSchedule":
        return ChirpSchedule(self.c_const / rate, self.omega0 / rate)

    def resonance_time(self, offset: float) -> float:
        """Time at which δ(t) equals `offset`."""
        if self.c_const == 0:
            raise ValueError("A zero chirp never sweeps through resonance.")
        return (1 - offset / self.c_const) / self.omega0


@dataclass(eq=True, frozen=True)
class PulseProfile:
    """
    Gaussian envelopes f(t) = f₀e^{-((t-t₁)/σ₁)²} and g(t) = g₀e^{-((t-t₂)/σ₂)²}.

    f scales the OAM field and g the coupling field. Times are in the same
    unit as the integration variable (1/Ω₀ for the experiments).
    """

    f0: float
    g0: float
    t1: float
    t2: float
    sigma1: float
    sigma2: float

    def __post_init__(self) -> None:
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError(
                f"Pulse widths must be positive, got σ₁={self.sigma1!r} "
                f"and σ₂={self.sigma2!r}."
            )

    def f(self, t: float) -> float:
        return self.f0 * math.exp(-(((t - self.t1) / self.sigma1) ** 2))

    def g(self, t: float) -> float:
        return self.g0 * math.exp(-(((t - self.t2) / self.sigma2) ** 2))

    @property
    def separation(self) -> float:
        """t₁ - t₂; positive for the counter-intuitive order."""
        return self.t1 - self.t2

    @property
    def is_counter_intuitive(self) -> bool:
        return self.t1 > self.t2

    def with_separation(self, separation: float, midpoint: float) -> "PulseProfile":
        """Same pulses centred on `midpoint`, `separation` apart."""
        return replace(
            self,
            t1=midpoint + 0.5 * separation,
            t2=midpoint - 0.5 * separation,
        )

    def window(self, n_widths: float = 4.0) -> tuple[float, float]:
        """Span covering both pulses out to `n_widths` widths."""
        width = n_widths * max(self.sigma1, self.sigma2)
        return min(self.t1, self.t2) - width, max(self.t1, self.t2) + width


# ---- Right-Hand Sides ----
def rhs_chirp(
    state: NDArray[np.complex128],
    kappa: float,
    omega_perp: float,
    delta_t: float,
    a_plus: complex,
    a_minus: complex,
) -> NDArray[np.complex128]:
    """
    Harmonic ℓ = 2 equations under Ω_c = Ω₀ and |Ω₀|²/Δ = ω⊥.

    iα̇ = 3κ|α|²α + ω⊥(a₊*β + a₋*γ)
    iβ̇ = (δ + 2ω⊥)β + ½κ(|β|² + |γ|²)β + ω⊥a₊α
    iγ̇ = (δ + 2ω⊥)γ + ½κ(|β|² + |γ|²)γ + ω⊥a₋α
    """
    alpha, beta, gamma = state.tolist()
    n_v = abs(beta) ** 2 + abs(gamma) ** 2
    d_vortex = delta_t + 2 * omega_perp + 0.5 * kappa * n_v
    d_alpha = 3 * kappa * abs(alpha) ** 2 * alpha + omega_perp * (
        a_plus.conjugate() * beta + a_minus.conjugate() * gamma
    )
    d_beta = d_vortex * beta + omega_perp * a_plus * alpha
    d_gamma = d_vortex * gamma + omega_perp * a_minus * alpha
    return -1j * np.array([d_alpha, d_beta, d_gamma], dtype=np.complex128)


def rhs_stirap(
    state: NDArray[np.complex128],
    kappa: float,
    omega_perp: float,
    drive: DriveConfig,
    pulses: PulseProfile,
    t: float,
) -> NDArray[np.complex128]:
    """
    Harmonic ℓ = 2 equations at δ = 0 with pulsed fields.

    With s = |Ω₀|²/Δ, Ω₀ → |Ω₀|f(t) and Ω_c → r|Ω₀|g(t):

    iα̇ = s f² α + 3κ|α|²α + s r f g (a₊*β + a₋*γ)
    iβ̇ = 2ω⊥β + ½κ(|β|² + |γ|²)β + s r² g² β + s r f g a₊α
    iγ̇ = 2ω⊥γ + ½κ(|β|² + |γ|²)γ + s r² g² γ + s r f g a₋α
    """
    alpha, beta, gamma = state.tolist()
    s = drive.stark_rate
    r = drive.omega_c_ratio
    f = pulses.f(t)
    g = pulses.g(t)
    raman = s * r * f * g
    n_v = abs(beta) ** 2 + abs(gamma) ** 2
    d_vortex = 2 * omega_perp + 0.5 * kappa * n_v + s * (r * g) ** 2
    d_alpha = (s * f**2 + 3 * kappa * abs(alpha) ** 2) * alpha + raman * (
        drive.a_plus.conjugate() * beta + drive.a_minus.conjugate() * gamma
    )
    d_beta = d_vortex * beta + raman * drive.a_plus * alpha
    d_gamma = d_vortex * gamma + raman * drive.a_minus * alpha
    return -1j * np.array([d_alpha, d_beta, d_gamma], dtype=np.complex128)


def _field_envelopes(
    pulses: Optional[PulseProfile], t: float
) -> tuple[float, float]:
    if pulses is None:
        return 1.0, 1.0
    return pulses.f(t), pulses.g(t)


def _common_shift(integrals: IntegralSet, total: float) -> float:
    """Gauge term (T_g + V_g) + I_g+·N shared by every diagonal entry."""
    return integrals.t_g + integrals.v_g + integrals.i_gp * total


def rhs_general(
    state: NDArray[np.complex128],
    integrals: IntegralSet,
    drive: DriveConfig,
    delta: float,
    t: float,
    pulses: Optional[PulseProfile] = None,
    remove_common: bool = False,
) -> NDArray[np.complex128]:
    """
    Mode-projected equations for an arbitrary trap.

    iα̇ = (T_g + V_g)α + (I_gg|α|² + I_g+|β|² + I_g-|γ|²)α
         + s f² I^(2ℓ)_gg α + s r f g (I^(ℓ)_g+ a₊*β + I^(ℓ)_g- a₋*γ)
    iβ̇ = (T_+ + V_+ + δ)β + (I_g+|α|² + I_++|β|² + I_+-|γ|²)β
         + s r² g² β + s r f g I^(ℓ)_+g a₊α

    and γ mirrors β with the minus-mode integrals. Without `pulses` the
    envelopes are f = g = 1.

    Parameters
    ----------
    state: NDArray
        (α, β, γ).
    integrals: IntegralSet
        Coefficients, rates in the same unit as `drive` and `delta`.
    drive: DriveConfig
        Field strengths and optical amplitudes.
    delta: float
        Two-photon detuning δ.
    t: float
        Time at which the pulse envelopes are evaluated.
    pulses: PulseProfile, optional
        Temporal envelopes.
    remove_common: bool
        Subtract the global-phase term (T_g + V_g) + I_g+·N from every
        diagonal entry.
    """
    alpha, beta, gamma = state.tolist()
    p_a, p_b, p_c = abs(alpha) ** 2, abs(beta) ** 2, abs(gamma) ** 2
    f, g = _field_envelopes(pulses, t)
    s = drive.stark_rate
    r = drive.omega_c_ratio
    raman = s * r * f * g
    shift = _common_shift(integrals, p_a + p_b + p_c) if remove_common else 0.0
    vortex_energy = integrals.t_pm + integrals.v_pm + delta + s * (r * g) ** 2

    d_alpha = (
        integrals.t_g
        + integrals.v_g
        + integrals.i_gg * p_a
        + integrals.i_gp * p_b
        + integrals.i_gm * p_c
        + s * f**2 * integrals.i2l_gg
        - shift
    ) * alpha + raman * (
        integrals.il_gp * drive.a_plus.conjugate() * beta
        + integrals.il_gm * drive.a_minus.conjugate() * gamma
    )
    d_beta = (
        vortex_energy
        + integrals.i_gp * p_a
        + integrals.i_pp * p_b
        + integrals.i_pm * p_c
        - shift
    ) * beta + raman * integrals.il_pg * drive.a_plus * alpha
    d_gamma = (
        vortex_energy
        + integrals.i_gm * p_a
        + integrals.i_pm * p_b
        + integrals.i_mm * p_c
        - shift
    ) * gamma + raman * integrals.il_mg * drive.a_minus * alpha
    return -1j * np.array([d_alpha, d_beta, d_gamma], dtype=np.complex128)


def rhs_five_level(
    state5: NDArray[np.complex128],
    integrals: IntegralSet,
    drive: DriveConfig,
    delta: float,
    t: float,
    pulses: Optional[PulseProfile] = None,
    remove_common: bool = False,
) -> NDArray[np.complex128]:
    """
    Equations without adiabatic elimination of Ψ_i and Ψ_i′.

    The excited amplitudes sit at -Δ and share the spatial mode of the
    vortex they connect to. The fields are projected through the same
    geometry factors as `rhs_general`:

    Ω₊ = a₊|Ω₀|f I^(ℓ)_+g,  Ω₋ = a₋|Ω₀|f I^(ℓ)_-g,  Ω_c = r|Ω₀|g

    iα̇ = E_α α + Ω₊* c_i + Ω₋* c_i′
    iβ̇ = E_β β + Ω_c c_i
    iċ_i = (-Δ + E_i) c_i + Ω_c β + Ω₊ α

    Interaction shifts include the excited populations. Eliminating c_i
    and c_i′ recovers `rhs_general` whenever I^(2ℓ)_gg = (I^(ℓ)_+g)², which
    holds for the harmonic ℓ = 2 integrals.
    """
    alpha, beta, gamma, c_i, c_ip = state5.tolist()
    p_a, p_b, p_c = abs(alpha) ** 2, abs(beta) ** 2, abs(gamma) ** 2
    p_i, p_ip = abs(c_i) ** 2, abs(c_ip) ** 2
    f, g = _field_envelopes(pulses, t)
    amp = drive.omega0
    omega_plus = drive.a_plus * amp * f * integrals.il_pg
    omega_minus = drive.a_minus * amp * f * integrals.il_mg
    omega_c = drive.omega_c_ratio * amp * g
    total = p_a + p_b + p_c + p_i + p_ip
    shift = _common_shift(integrals, total) if remove_common else 0.0

    vortex_energy = integrals.t_pm + integrals.v_pm
    plus_density = (
        integrals.i_gp * p_a
        + integrals.i_pp * (p_b + p_i)
        + integrals.i_pm * (p_c + p_ip)
    )
    minus_density = (
        integrals.i_gm * p_a
        + integrals.i_pm * (p_b + p_i)
        + integrals.i_mm * (p_c + p_ip)
    )
    e_alpha = (
        integrals.t_g
        + integrals.v_g
        + integrals.i_gg * p_a
        + integrals.i_gp * (p_b + p_i)
        + integrals.i_gm * (p_c + p_ip)
        - shift
    )
    e_beta = vortex_energy + delta + plus_density - shift
    e_gamma = vortex_energy + delta + minus_density - shift
    e_i = -drive.delta_big + vortex_energy + plus_density - shift
    e_ip = -drive.delta_big + vortex_energy + minus_density - shift

    d_alpha = (
        e_alpha * alpha
        + omega_plus.conjugate() * c_i
        + omega_minus.conjugate() * c_ip
    )
    d_beta = e_beta * beta + omega_c * c_i
    d_gamma = e_gamma * gamma + omega_c * c_ip
    d_i = e_i * c_i + omega_c * beta + omega_plus * alpha
    d_ip = e_ip * c_ip + omega_c * gamma + omega_minus * alpha
    return -1j * np.array(
        [d_alpha, d_beta, d_gamma, d_i, d_ip], dtype=np.complex128
    )


# ---- Integration ----
@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled solution of a population model.

    Attributes
    ----------
    times: NDArray
        Sample times in units of 1/Ω₀ (τ = Ω₀t), strictly increasing.
    states: NDArray
        Complex amplitudes, shape (n_times, 3) or (n_times, 5).
    f_values: NDArray
        Transfer function at each sample.
    omega0: float
        |Ω₀| in rad/s, used for the seconds axis.
    metadata: dict
        Solver statistics and run notes.
    """

    times: NDArray[np.float64]
    states: NDArray[np.complex128]
    f_values: NDArray[np.float64]
    omega0: float = 1.0
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.times)
        if self.states.shape[0] != n or len(self.f_values) != n:
            raise ValueError(
                f"Trajectory lengths disagree: {n} times, "
                f"{self.states.shape[0]} states, {len(self.f_values)} F values."
            )
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("Trajectory times must be strictly increasing.")

    @property
    def seconds(self) -> NDArray[np.float64]:
        return self.times / self.omega0

    @property
    def is_five_level(self) -> bool:
        return self.states.shape[1] == 5

    def populations(self) -> NDArray[np.float64]:
        return np.abs(self.states) ** 2

    def norms(self) -> NDArray[np.float64]:
        return self.populations().sum(axis=1)

    def state_at(self, index: int) -> SpinorAmplitudes:
        return SpinorAmplitudes.from_array(self.states[index])

    @property
    def final(self) -> SpinorAmplitudes:
        return self.state_at(-1)

    def columns(self) -> dict[str, NDArray[np.float64]]:
        """Flat real columns for the table writers."""
        names = ["alpha", "beta", "gamma", "exc_i", "exc_ip"]
        cols: dict[str, NDArray[np.float64]] = {
            "tau": self.times,
            "t_seconds": self.seconds,
        }
        pops = self.populations()
        for k in range(self.states.shape[1]):
            cols[f"re_{names[k]}"] = self.states[:, k].real
            cols[f"im_{names[k]}"] = self.states[:, k].imag
        for k in range(self.states.shape[1]):
            cols[f"pop_{names[k]}"] = pops[:, k]
        cols["F"] = self.f_values
        return cols


def integrate(
    rhs: Rhs,
    initial: SpinorAmplitudes,
    t_span: tuple[float, float],
    tol: float = 1e-9,
    samples: int = 1001,
    t_eval: Optional[ArrayLike] = None,
    omega0: float = 1.0,
) -> Trajectory:
    """
    Integrate a population model with an adaptive embedded Runge-Kutta pair.

    Uses DOP853 with rtol = `tol` and atol = 1e-3·`tol`. The solution is
    never renormalized; the largest norm deviation is stored in
    `metadata["norm_drift"]` and flagged when it exceeds 1e-8.

    Parameters
    ----------
    rhs: Rhs
        Callable (t, y) -> dy/dt on complex arrays.
    initial: SpinorAmplitudes
        State at `t_span[0]`.
    t_span: tuple[float, float]
        Integration interval, t0 < t1.
    tol: float
        Relative tolerance, > 0.
    samples: int
        Number of evenly spaced output times when `t_eval` is omitted.
    t_eval: ArrayLike, optional
        Explicit output times inside `t_span`.
    omega0: float
        |Ω₀| recorded on the trajectory for the seconds axis.

    Raises
    ------
    StiffnessError
        If the solver cannot advance (step-size underflow or failure).
    """
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol!r}.")
    t0, t1 = t_span
    if not t1 > t0:
        raise ValueError(f"Integration span must be increasing: {t_span!r}.")
    if t_eval is None:
        if samples < 2:
            raise ValueError(f"Need at least 2 samples, got {samples!r}.")
        t_eval = np.linspace(t0, t1, samples)
    y0 = initial.as_array()

    logger.debug(
        "Integrating %d amplitudes over [%g, %g] with tol=%g",
        y0.size,
        t0,
        t1,
        tol,
    )
    sol = solve_ivp(
        rhs,
        (t0, t1),
        y0,
        method="DOP853",
        t_eval=np.asarray(t_eval, dtype=float),
        rtol=tol,
        atol=ATOL_FACTOR * tol,
    )
    if not sol.success:
        reached = sol.t[-1] if sol.t.size else t0
        raise StiffnessError(
            f"DOP853 stopped at t={reached:.6g} of [{t0:.6g}, {t1:.6g}]: "
            f"{sol.message} (nfev={sol.nfev})"
        )

    states = sol.y.T.astype(np.complex128)
    f_values = np.array([transfer_function(s) for s in states])
    norms = (np.abs(states) ** 2).sum(axis=1)
    drift = float(np.max(np.abs(norms - initial.norm())))
    drift_ok = drift <= NORM_DRIFT_BUDGET
    if not drift_ok:
        logger.warning(
            "Norm drifted by %.3e (budget %.0e); tighten the tolerance.",
            drift,
            NORM_DRIFT_BUDGET,
        )
    logger.info(
        "Integration finished: %d samples, nfev=%d, final F=%.6f",
        len(sol.t),
        sol.nfev,
        f_values[-1],
    )
    metadata = {
        "method": "DOP853",
        "rtol": tol,
        "atol": ATOL_FACTOR * tol,
        "nfev": int(sol.nfev),
        "norm_drift": drift,
        "norm_drift_ok": drift_ok,
    }
    return Trajectory(sol.t, states, f_values, omega0, metadata)


def transfer_time(trajectory: Trajectory) -> Optional[float]:
    """
    First time (units of 1/Ω₀) at which F crosses zero.

    Linear interpolation between the bracketing samples; None if F never
    changes sign.
    """
    f = trajectory.f_values
    t = trajectory.times
    crossings = np.nonzero(np.signbit(f[1:]) != np.signbit(f[:-1]))[0]
    if crossings.size == 0:
        return None
    k = int(crossings[0])
    if f[k + 1] == f[k]:
        return float(t[k])
    return float(t[k] - f[k] * (t[k + 1] - t[k]) / (f[k + 1] - f[k]))
