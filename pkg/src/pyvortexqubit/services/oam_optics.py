"""
Optical OAM Utilities

Laguerre-Gaussian mode evaluation at the beam waist and the interferometric
preparation of two-component OAM superpositions.

Optical Elements
----------------
- Beam splitter (general unitary or symmetric)
- Dove prism (ℓ ↦ -ℓ)
- Phase shifter (arm phase e^{iφ})
- Fork hologram (ℓ ↦ ℓ + charge, idealised)

Only p = 0 modes are carried by `OamSuperposition`; the radial index is only
used when evaluating `lg_mode_amplitude` directly.
"""

# Built-Ins
from collections.abc import Mapping, Iterator
from dataclasses import dataclass
from types import MappingProxyType
from typing import Optional
import cmath
import math

# Dependencies
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

UNITARITY_TOL = 1e-12


# ---- Laguerre-Gaussian Modes ----
@dataclass(eq=True, frozen=True)
class LgModeParams:
    """
    Parameters of a Laguerre-Gaussian mode at its waist.

    Attributes
    ----------
    ell: int
        Winding number (any sign).
    p: int
        Number of non-axial radial nodes, p >= 0.
    w0: float
        Beam waist, same length unit as the radii it is evaluated at.
    """

    ell: int
    p: int = 0
    w0: float = 1.0

    def __post_init__(self) -> None:
        if self.p < 0:
            raise ValueError(f"Radial index must be non-negative: {self.p}")
        if not self.w0 > 0:
            raise ValueError(f"Beam waist must be positive: {self.w0}")


def assoc_laguerre(p: int, l: int, x: ArrayLike) -> NDArray[np.float64]:
    """
    Associated Laguerre polynomial L_p^l(x) as an explicit finite sum.

    Coefficients are built from log-gamma values so that large winding
    numbers do not overflow.

    Parameters
    ----------
    p: int
        Polynomial degree, p >= 0.
    l: int
        Upper index, l >= 0.
    x: ArrayLike
        Evaluation point(s).

    Returns
    -------
    value: np.ndarray
        L_p^l(x), same shape as `x`.

    Raises
    ------
    ValueError
        If `p` or `l` is negative.
    """
    if p < 0 or l < 0:
        raise ValueError(
            f"Laguerre indices must be non-negative, got p={p}, l={l}."
        )
    x_arr = np.asarray(x, dtype=float)
    total = np.zeros_like(x_arr)
    for m in range(p + 1):
        log_coeff = (
            gammaln(p + l + 1)
            - gammaln(p - m + 1)
            - gammaln(l + m + 1)
            - gammaln(m + 1)
        )
        total = total + (-1) ** m * np.exp(log_coeff) * x_arr**m
    return total


def lg_mode_amplitude(
    params: LgModeParams, rho: ArrayLike, phi: ArrayLike
) -> NDArray[np.complex128]:
    """
    Normalized LG_p^ℓ amplitude at z = 0.

    Parameters
    ----------
    params: LgModeParams
        Mode indices and waist.
    rho: ArrayLike
        Radial coordinate(s), rho >= 0.
    phi: ArrayLike
        Azimuth(s) in radians.

    Returns
    -------
    amplitude: np.ndarray
        Complex field amplitude, normalized so that ∫|LG|² ρ dρ dφ = 1.
    """
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0):
        raise ValueError("Radial coordinate must be non-negative.")
    abs_ell = abs(params.ell)
    w0 = params.w0
    log_norm = 0.5 * (
        math.log(2.0 / math.pi) + gammaln(params.p + 1)
        - gammaln(params.p + abs_ell + 1)
    )
    scaled = np.sqrt(2.0) * rho_arr / w0
    radial = (
        np.exp(log_norm)
        / w0
        * scaled**abs_ell
        * assoc_laguerre(params.p, abs_ell, scaled**2)
        * np.exp(-(rho_arr**2) / w0**2)
    )
    return radial * np.exp(1j * params.ell * np.asarray(phi, dtype=float))


def lg_intensity_grid(
    params: LgModeParams, n: int, extent: float
) -> NDArray[np.float64]:
    """|LG|² sampled at the cell centres of an n x n grid on [-extent, extent]²."""
    edges = np.linspace(-extent, extent, n + 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    xx, yy = np.meshgrid(centres, centres, indexing="xy")
    amp = lg_mode_amplitude(params, np.hypot(xx, yy), np.arctan2(yy, xx))
    return np.abs(amp) ** 2


# ---- OAM Superpositions ----
@dataclass(eq=True, frozen=True)
class OamSuperposition:
    """
    Complex amplitudes over integer winding numbers (p = 0 modes only).

    Attributes
    ----------
    terms: Mapping[int, complex]
        Winding number to amplitude. Must not be empty; a dark port is a
        superposition whose amplitudes are all zero.
    """

    terms: Mapping[int, complex]

    def __post_init__(self) -> None:
        if len(self.terms) == 0:
            raise ValueError("An OAM superposition needs at least one term.")
        frozen = MappingProxyType(
            {int(k): complex(v) for k, v in sorted(self.terms.items())}
        )
        object.__setattr__(self, "terms", frozen)

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __iter__(self) -> Iterator[tuple[int, complex]]:
        return iter(self.terms.items())

    @classmethod
    def single(cls, ell: int, amplitude: complex = 1.0) -> "OamSuperposition":
        return cls({ell: amplitude})

    @property
    def charges(self) -> tuple[int, ...]:
        return tuple(self.terms.keys())

    def amplitude(self, ell: int) -> complex:
        return self.terms.get(ell, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def populations(self) -> dict[int, float]:
        return {ell: abs(c) ** 2 for ell, c in self.terms.items()}

    def scaled(self, factor: complex) -> "OamSuperposition":
        return OamSuperposition(
            {ell: factor * c for ell, c in self.terms.items()}
        )

    def normalize(self) -> "OamSuperposition":
        """Return a copy with Σ|c_ℓ|² = 1."""
        norm = self.norm()
        if norm == 0.0:
            raise ValueError("Cannot normalize a superposition of zero norm.")
        return self.scaled(1.0 / norm)

    def __add__(self, other: "OamSuperposition") -> "OamSuperposition":
        keys = set(self.terms) | set(other.terms)
        return OamSuperposition(
            {k: self.amplitude(k) + other.amplitude(k) for k in keys}
        )


def dove_prism(state: OamSuperposition) -> OamSuperposition:
    """Reverse the handedness of every component: ℓ ↦ -ℓ."""
    return OamSuperposition({-ell: c for ell, c in state})


def hologram(state: OamSuperposition, charge: int) -> OamSuperposition:
    """
    Ideal fork hologram adding `charge` units of OAM to every component.

    A Gaussian input |0⟩ therefore becomes |charge⟩. Diffraction efficiency
    and unwanted orders are not modelled.
    """
    return OamSuperposition({ell + charge: c for ell, c in state})


def phase_shift(state: OamSuperposition, phase: float) -> OamSuperposition:
    return state.scaled(cmath.exp(1j * phase))


# ---- Beam Splitters ----
@dataclass(eq=True, frozen=True)
class BeamSplitter:
    """
    Lossless two-port beam splitter R = [[r, t'], [t, r']].

    Attributes
    ----------
    r, t: complex
        Reflection and transmission amplitudes for light entering port 1.
    r_prime, t_prime: complex
        The same for port 2. Unitarity with unit determinant requires
        r' = r* and t' = -t*.
    """

    r: complex
    t: complex
    r_prime: complex
    t_prime: complex

    def __post_init__(self) -> None:
        _validate_unitarity(self.r, self.t, self.r_prime, self.t_prime)

    @classmethod
    def from_amplitudes(cls, r: complex, t: complex) -> "BeamSplitter":
        """General splitter from its port-1 amplitudes."""
        r, t = complex(r), complex(t)
        return cls(r, t, r.conjugate(), -t.conjugate())

    @classmethod
    def symmetric(cls, r_tilde: float, t_tilde: float) -> "BeamSplitter":
        """
        Symmetric splitter [[r̃, i t̃], [i t̃, r̃]].

        Parameters
        ----------
        r_tilde: float
            Real, non-negative reflection amplitude.
        t_tilde: float
            Real transmission magnitude; the transmitted wave carries an
            extra factor i.
        """
        if r_tilde < 0:
            raise ValueError(
                f"Symmetric splitter needs r_tilde >= 0, got {r_tilde}."
            )
        t = 1j * float(t_tilde)
        return cls(complex(r_tilde), t, complex(r_tilde), t)

    @classmethod
    def fifty_fifty(cls) -> "BeamSplitter":
        return cls.symmetric(1 / math.sqrt(2), 1 / math.sqrt(2))

    @property
    def is_symmetric(self) -> bool:
        return (
            abs(self.r - self.r_prime) < UNITARITY_TOL
            and abs(self.t - self.t_prime) < UNITARITY_TOL
        )

    def matrix(self) -> NDArray[np.complex128]:
        return np.array(
            [[self.r, self.t_prime], [self.t, self.r_prime]], dtype=complex
        )


def _validate_unitarity(
    r: complex, t: complex, r_prime: complex, t_prime: complex
) -> None:
    """Reject splitter amplitudes that do not form a unit-determinant unitary."""
    power = abs(r) ** 2 + abs(t) ** 2
    if abs(power - 1.0) > UNITARITY_TOL:
        raise ValueError(f"|r|² + |t|² must equal 1, got {power!r}.")
    if abs(r_prime - complex(r).conjugate()) > UNITARITY_TOL:
        raise ValueError(f"r' must equal r*, got r={r!r}, r'={r_prime!r}.")
    if abs(t_prime + complex(t).conjugate()) > UNITARITY_TOL:
        raise ValueError(f"t' must equal -t*, got t={t!r}, t'={t_prime!r}.")


@dataclass(eq=True, frozen=True)
class TwoPortState:
    """
    Field amplitudes in the two ports of an interferometer stage.

    Attributes
    ----------
    port1, port2: OamSuperposition
        Unnormalized amplitudes; the pair carries the input norm jointly.
    """

    port1: OamSuperposition
    port2: OamSuperposition

    @classmethod
    def from_input(cls, ell: int, u0: complex = 1.0) -> "TwoPortState":
        """u0 |ℓ⟩ in port 1 and nothing in port 2."""
        return cls(
            OamSuperposition({ell: u0}), OamSuperposition({ell: 0.0})
        )

    def total_norm_squared(self) -> float:
        return self.port1.norm() ** 2 + self.port2.norm() ** 2


def beam_splitter_apply(bs: BeamSplitter, state: TwoPortState) -> TwoPortState:
    """
    Apply R = [[r, t'], [t, r']] port-wise to every winding number.

    Parameters
    ----------
    bs: BeamSplitter
        A splitter, already checked for unitarity at construction.
    state: TwoPortState
        Input amplitudes.

    Returns
    -------
    output: TwoPortState
        Output amplitudes, with the same total norm as the input.
    """
    charges = sorted(set(state.port1.charges) | set(state.port2.charges))
    out1: dict[int, complex] = {}
    out2: dict[int, complex] = {}
    for ell in charges:
        u1 = state.port1.amplitude(ell)
        u2 = state.port2.amplitude(ell)
        out1[ell] = bs.r * u1 + bs.t_prime * u2
        out2[ell] = bs.t * u1 + bs.r_prime * u2
    return TwoPortState(OamSuperposition(out1), OamSuperposition(out2))


# ---- Mach-Zehnder Compositions ----
def mach_zehnder(
    bs1: BeamSplitter,
    phase: float,
    input_ell: int,
    u0: complex = 1.0,
    bs2: Optional[BeamSplitter] = None,
) -> TwoPortState:
    """
    Mach-Zehnder interferometer with a Dove prism in one arm.

    Computes BS2 · diag(dove, 1) · diag(1, e^{iφ}) · BS1 acting on
    (u0 |ℓ⟩, 0). For a symmetric `bs1` with amplitudes (r̃, t̃) and the
    default 50/50 `bs2`, port 1 holds (r̃|-ℓ⟩ - e^{iφ} t̃|ℓ⟩) u0/√2.

    Parameters
    ----------
    bs1: BeamSplitter
        Input splitter; its imbalance sets the superposition weights.
    phase: float
        Phase shifter setting φ in radians, applied to port 2.
    input_ell: int
        Winding number of the input beam.
    u0: complex, optional
        Input amplitude.
    bs2: BeamSplitter, optional
        Output splitter, 50/50 symmetric by default.

    Returns
    -------
    output: TwoPortState
        Both output ports, unnormalized.
    """
    if bs2 is None:
        bs2 = BeamSplitter.fifty_fifty()
    state = beam_splitter_apply(bs1, TwoPortState.from_input(input_ell, u0))
    state = TwoPortState(state.port1, phase_shift(state.port2, phase))
    state = TwoPortState(dove_prism(state.port1), state.port2)
    return beam_splitter_apply(bs2, state)


def mach_zehnder_arbitrary(
    bs1: BeamSplitter,
    phase: float,
    ell_a: int,
    ell_b: int,
    u0: complex = 1.0,
    bs2: Optional[BeamSplitter] = None,
) -> TwoPortState:
    """
    Interferometer for an arbitrary pair of charges (ℓ_a, ℓ_b).

    A Gaussian beam enters, and holograms in both arms replace the Dove
    prism: port 1 arm receives ℓ_b and port 2 arm receives ℓ_a. With a
    symmetric `bs1` and the default 50/50 `bs2`, port 1 holds
    (r̃|ℓ_b⟩ - e^{iφ} t̃|ℓ_a⟩) u0/√2.
    """
    if bs2 is None:
        bs2 = BeamSplitter.fifty_fifty()
    state = beam_splitter_apply(bs1, TwoPortState.from_input(0, u0))
    state = TwoPortState(state.port1, phase_shift(state.port2, phase))
    state = TwoPortState(
        hologram(state.port1, ell_b), hologram(state.port2, ell_a)
    )
    return beam_splitter_apply(bs2, state)


def splitter_for_superposition(
    a_plus: complex, a_minus: complex
) -> tuple[BeamSplitter, float]:
    """
    Interferometer settings that emit a₊|ℓ⟩ + a₋|-ℓ⟩ from port 1.

    Parameters
    ----------
    a_plus, a_minus: complex
        Target amplitudes with |a₊|² + |a₋|² = 1.

    Returns
    -------
    bs1: BeamSplitter
        Symmetric splitter with t̃ = |a₊| and r̃ = |a₋|.
    phase: float
        Phase shifter setting; equals π for real non-negative amplitudes.
        Port 1 then matches the target up to a global phase and the 1/√2
        port loss.
    """
    weight = abs(a_plus) ** 2 + abs(a_minus) ** 2
    if abs(weight - 1.0) > UNITARITY_TOL:
        raise ValueError(f"|a₊|² + |a₋|² must equal 1, got {weight!r}.")
    bs1 = BeamSplitter.symmetric(abs(a_minus), abs(a_plus))
    relative = cmath.phase(a_plus) - cmath.phase(a_minus)
    phase = math.remainder(math.pi + relative, 2 * math.pi)
    return bs1, phase
