"""
Overlap Integrals for the Mode-Projected Equations

Kinetic, potential, self-interaction and light-coupling integrals between
the ground and vortex spatial modes. Harmonic traps at ℓ = 2 have closed
forms; every other case is integrated numerically over (ρ, z) after the
azimuthal integral is done analytically.

Quadrature Schemes
------------------
- "adaptive-nested": scipy `dblquad`, nested adaptive Gauss-Kronrod
- "fixed-tensor": Gauss-Legendre tensor rule, doubled until two orders agree
"""

# Built-Ins
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Optional, Protocol, TypeAlias
import hashlib
import json
import logging
import math
import warnings

# Dependencies
import numpy as np
from numpy.typing import NDArray
from scipy.integrate import IntegrationWarning, dblquad

# Local Imports
from pyvortexqubit.custom_types import (
    PathLike,
    QuadratureScheme,
    is_valid_quadrature_scheme,
)
from pyvortexqubit.exceptions import AccuracyError, ConfigurationError
from pyvortexqubit.services.traps import (
    HarmonicTrap,
    MexicanHatTrap,
    Trap,
    WavefunctionAnsatz,
    energy_unit,
    potential_value,
    tf_radii,
)
from pyvortexqubit.services.write_outputs import atomic_write_text

logger = logging.getLogger(__name__)

Integrand: TypeAlias = Callable[[NDArray, NDArray], NDArray]
Domain: TypeAlias = tuple[tuple[float, float], tuple[float, float]]

HARMONIC_RHO_CUTOFF = 12.0
AXIAL_CUTOFF = 10.0
MAX_CHARGE = 10
FIXED_TENSOR_START = 32


# ---- Quadrature ----
@dataclass(eq=True, frozen=True)
class QuadratureSpec:
    """
    Tolerances and scheme for 2-D quadrature.

    Attributes
    ----------
    scheme: QuadratureScheme
        "fixed-tensor" (default) or "adaptive-nested".
    abs_tol, rel_tol: float
        Target |value - true| <= max(abs_tol, rel_tol·|value|).
    max_evals: int
        Integrand evaluation budget.
    """

    scheme: QuadratureScheme = "fixed-tensor"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_evals: int = 5_000_000

    def __post_init__(self) -> None:
        if not is_valid_quadrature_scheme(self.scheme):
            raise ValueError(f"Unknown quadrature scheme: {self.scheme!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError(
                f"Tolerances must be positive, got abs_tol={self.abs_tol!r}"
                f" and rel_tol={self.rel_tol!r}."
            )
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1: {self.max_evals!r}")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


class QuadratureHandler(Protocol):
    def __call__(
        self, f: Integrand, domain: Domain, spec: QuadratureSpec
    ) -> tuple[float, float]: ...


class _CountingIntegrand:
    """Wraps an integrand and counts point evaluations."""

    def __init__(self, f: Integrand) -> None:
        self.f = f
        self.calls = 0

    def __call__(self, z: float, rho: float) -> float:
        self.calls += 1
        return float(self.f(np.asarray(rho), np.asarray(z)))


def _adaptive_nested(
    f: Integrand, domain: Domain, spec: QuadratureSpec
) -> tuple[float, float]:
    (rho0, rho1), (z0, z1) = domain
    counted = _CountingIntegrand(f)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, err = dblquad(
            counted,
            rho0,
            rho1,
            z0,
            z1,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
        )
    for warning in caught:
        logger.debug("dblquad: %s", warning.message)
    if counted.calls > spec.max_evals:
        raise AccuracyError(
            f"Adaptive quadrature used {counted.calls} evaluations, over "
            f"the budget of {spec.max_evals}",
            value,
            err,
        )
    if err > spec.target(value):
        raise AccuracyError(
            "Adaptive quadrature did not reach the requested tolerance",
            value,
            err,
        )
    return value, err


def _fixed_tensor(
    f: Integrand, domain: Domain, spec: QuadratureSpec
) -> tuple[float, float]:
    (rho0, rho1), (z0, z1) = domain
    if not all(map(math.isfinite, (rho0, rho1, z0, z1))):
        raise ValueError("The fixed-tensor scheme needs a finite domain.")

    def rule(n: int) -> float:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        rho = 0.5 * (rho1 - rho0) * nodes + 0.5 * (rho1 + rho0)
        z = 0.5 * (z1 - z0) * nodes + 0.5 * (z1 + z0)
        rr, zz = np.meshgrid(rho, z, indexing="ij")
        values = np.asarray(f(rr, zz), dtype=float)
        jacobian = 0.25 * (rho1 - rho0) * (z1 - z0)
        return float(jacobian * weights @ values @ weights)

    n = FIXED_TENSOR_START
    evals = n**2
    previous = rule(n)
    while True:
        n *= 2
        evals += n**2
        current = rule(n)
        err = abs(current - previous)
        if err <= spec.target(current):
            return current, err
        if evals + (2 * n) ** 2 > spec.max_evals:
            raise AccuracyError(
                f"Gauss-Legendre tensor rule did not converge by order {n}",
                current,
                err,
            )
        previous = current


QUADRATURE_HANDLERS: dict[QuadratureScheme, QuadratureHandler] = {
    "adaptive-nested": _adaptive_nested,
    "fixed-tensor": _fixed_tensor,
}


def quadrature_2d(
    f: Integrand, domain: Domain, spec: QuadratureSpec = QuadratureSpec()
) -> tuple[float, float]:
    """
    Integrate f(ρ, z) over a rectangle.

    Parameters
    ----------
    f: Integrand
        Vectorized integrand taking arrays of ρ and z.
    domain: Domain
        ((ρ0, ρ1), (z0, z1)); infinite limits only for "adaptive-nested".
    spec: QuadratureSpec
        Scheme and tolerances.

    Returns
    -------
    value: float
        Integral estimate.
    err_bound: float
        Reported error bound.

    Raises
    ------
    AccuracyError
        If the tolerance is not met within `spec.max_evals` evaluations.
    """
    return QUADRATURE_HANDLERS[spec.scheme](f, domain, spec)


# ---- Integral Set ----
@dataclass(eq=True, frozen=True)
class IntegralSet:
    """
    Coefficients of the mode-projected equations.

    Rates are in rad/s. The light-coupling geometry factors are
    dimensionless: each carries the (√2ρ/w)^ℓ weight of the beam profile,
    so i2l_gg is ⟨g|(√2ρ/w)^{2ℓ}|g⟩ and il_gp is ⟨g|(√2ρ/w)^ℓ|v+⟩.

    Attributes
    ----------
    t_g, v_g: float
        Kinetic and potential energy of the ground mode (rad/s).
    t_pm, v_pm: float
        The same for the vortex modes (equal for both signs).
    i_gg, i_gp, i_gm, i_pp, i_mm, i_pm: float
        Self- and cross-interaction rates (rad/s).
    i2l_gg, il_gp, il_pg, il_gm, il_mg: float
        Light-coupling geometry factors.
    beam_waist: float
        Beam waist w (m).
    ell: int
        Vortex charge.
    include_envelope: bool
        Whether the e^{-ρ²/w²} beam envelope was kept.
    """

    t_g: float
    v_g: float
    t_pm: float
    v_pm: float
    i_gg: float
    i_gp: float
    i_gm: float
    i_pp: float
    i_mm: float
    i_pm: float
    i2l_gg: float
    il_gp: float
    il_pg: float
    il_gm: float
    il_mg: float
    beam_waist: float
    ell: int = 2
    include_envelope: bool = False

    def __post_init__(self) -> None:
        for name in INTERACTION_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(
                    f"Self-interaction term {name} must be >= 0, "
                    f"got {getattr(self, name)!r}."
                )

    def scaled_to(self, rate: float) -> "IntegralSet":
        """Divide every rate entry by `rate` (e.g. Ω₀ to work in τ = Ω₀t)."""
        if not rate > 0:
            raise ValueError(f"Reference rate must be positive: {rate!r}")
        updates = {
            name: getattr(self, name) / rate
            for name in ENERGY_FIELDS + INTERACTION_FIELDS
        }
        return replace(self, **updates)

    def with_eta_scale(self, factor: float) -> "IntegralSet":
        """Multiply every self-interaction entry by `factor`."""
        updates = {
            name: getattr(self, name) * factor for name in INTERACTION_FIELDS
        }
        return replace(self, **updates)

    def unscaled_geometry(self) -> tuple[float, float]:
        """
        Geometry factors with the (√2/w) powers removed.

        Returns ⟨ρ^{2ℓ}⟩_g and ⟨g|ρ^ℓ|v+⟩ in m^{2ℓ} and m^ℓ.
        """
        scale = math.sqrt(2) / self.beam_waist
        return (
            self.i2l_gg / scale ** (2 * self.ell),
            self.il_gp / scale**self.ell,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "IntegralSet":
        payload = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"Unknown IntegralSet fields: {sorted(unknown)}")
        return cls(**payload)


ENERGY_FIELDS: tuple[str, ...] = ("t_g", "v_g", "t_pm", "v_pm")
INTERACTION_FIELDS: tuple[str, ...] = (
    "i_gg",
    "i_gp",
    "i_gm",
    "i_pp",
    "i_mm",
    "i_pm",
)
GEOMETRY_FIELDS: tuple[str, ...] = (
    "i2l_gg",
    "il_gp",
    "il_pg",
    "il_gm",
    "il_mg",
)


def default_beam_waist(trap: Trap) -> float:
    """
    Waist that makes the ℓ = 2 geometry factors of order one.

    Harmonic traps use w² = 2√2 L⊥², for which they are exactly 1; the
    Mexican hat uses w = √2 R_min so that (√2ρ/w) is 1 on the ring.
    """
    match trap:
        case MexicanHatTrap():
            return math.sqrt(2) * trap.minimum_radius
        case _:
            return math.sqrt(2 * math.sqrt(2)) * trap.l_perp


def geometry_scale(trap: Trap, w: float) -> float:
    """2√2 L⊥²/w²: the harmonic ℓ = 2 coupling factor for waist w."""
    return 2 * math.sqrt(2) * trap.l_perp**2 / w**2


# ---- Harmonic Closed Forms ----
def harmonic_analytic_integrals(
    trap: HarmonicTrap,
    kappa: float,
    w: Optional[float] = None,
    ell: int = 2,
) -> IntegralSet:
    """
    Closed-form integrals for the harmonic trap at ℓ = 2.

    The tabulated geometry factors ⟨ρ⁴⟩_g = 2L⊥⁴ and ⟨g|ρ²|v±⟩ = √2L⊥²
    omit the beam-profile powers of w; they are multiplied here by
    (√2/w)⁴ and (√2/w)² so that the result is the dimensionless
    8(L⊥²/w²)² and 2√2L⊥²/w² the equations consume.

    Parameters
    ----------
    trap: HarmonicTrap
        Trap with oscillator lengths.
    kappa: float
        Interaction rate κ (rad/s).
    w: float, optional
        Beam waist; `default_beam_waist(trap)` when omitted.
    ell: int
        Must be ±2.

    Raises
    ------
    ConfigurationError
        For any other charge; use `numeric_integrals` instead.
    """
    if abs(ell) != 2:
        raise ConfigurationError(
            f"Closed forms exist for |ell| = 2 only, got {ell}; "
            "use numeric_integrals.",
            field="drive.ell",
        )
    if w is None:
        w = default_beam_waist(trap)
    scale = geometry_scale(trap, w)
    e_ground = 0.25 * trap.omega_z + 0.5 * trap.omega_perp
    e_vortex = 0.25 * trap.omega_z + 1.5 * trap.omega_perp
    return IntegralSet(
        t_g=e_ground,
        v_g=e_ground,
        t_pm=e_vortex,
        v_pm=e_vortex,
        i_gg=4 * kappa,
        i_gp=kappa,
        i_gm=kappa,
        i_pp=1.5 * kappa,
        i_mm=1.5 * kappa,
        i_pm=1.5 * kappa,
        i2l_gg=scale**2,
        il_gp=scale,
        il_pg=scale,
        il_gm=scale,
        il_mg=scale,
        beam_waist=w,
        ell=abs(ell),
    )


# ---- Numeric Integrals ----
def _integration_domain(psi_g: WavefunctionAnsatz, trap_osc: Trap) -> Domain:
    """(ρ, z) rectangle in oscillator units covering the mode support."""
    z_max = AXIAL_CUTOFF * trap_osc.l_z
    if psi_g.is_thomas_fermi:
        assert isinstance(trap_osc, MexicanHatTrap)
        assert psi_g.condensate is not None and psi_g.condensate.mu is not None
        r_minus, r_plus = tf_radii(trap_osc, psi_g.condensate.mu)
        return (r_minus, r_plus), (-z_max, z_max)
    return (0.0, HARMONIC_RHO_CUTOFF), (-z_max, z_max)


def numeric_integrals(
    psi_g: WavefunctionAnsatz,
    psi_vp: WavefunctionAnsatz,
    psi_vm: WavefunctionAnsatz,
    trap: Trap,
    eta: float,
    w: float,
    ell: int,
    spec: QuadratureSpec = QuadratureSpec(),
    include_envelope: bool = False,
) -> IntegralSet:
    """
    Evaluate every overlap integral by 2-D quadrature.

    The integrands are built in oscillator units, where the azimuthal
    integral contributes 2π, and rates are converted back with ω⊥.
    Thomas-Fermi modes carry no kinetic energy.

    Parameters
    ----------
    psi_g, psi_vp, psi_vm: WavefunctionAnsatz
        Unit-normalized ground and vortex modes of charge 0, +ℓ and -ℓ.
    trap: HarmonicTrap or MexicanHatTrap
        Trap all three modes belong to.
    eta: float
        Interaction strength (J·m³) for the self-interaction terms.
    w: float
        Beam waist (m).
    ell: int
        Vortex charge, 1 <= |ℓ| <= 10.
    spec: QuadratureSpec
        Quadrature settings.
    include_envelope: bool
        Keep the e^{-ρ²/w²} envelope of each light field.

    Returns
    -------
    integrals: IntegralSet
        Rates in rad/s and dimensionless geometry factors.

    Raises
    ------
    AccuracyError
        Propagated from `quadrature_2d`.
    """
    if not 1 <= abs(ell) <= MAX_CHARGE:
        raise ConfigurationError(
            f"Vortex charge must satisfy 1 <= |ell| <= {MAX_CHARGE}: {ell}",
            field="drive.ell",
        )
    if (psi_vp.ell, psi_vm.ell) != (abs(ell), -abs(ell)):
        raise ValueError(
            f"Vortex modes must carry charges +{abs(ell)} and -{abs(ell)}, "
            f"got {psi_vp.ell} and {psi_vm.ell}."
        )
    n = abs(ell)
    g, vp, vm = (p.in_oscillator_units() for p in (psi_g, psi_vp, psi_vm))
    trap_osc = trap.to_oscillator_units()
    w_osc = w / trap.l_perp
    eta_osc = eta / (energy_unit(trap) * trap.l_perp**3)
    domain = _integration_domain(g, trap_osc)

    def integrate(f: Integrand) -> float:
        value, _ = quadrature_2d(
            lambda rho, z: 2 * math.pi * f(rho, z) * rho, domain, spec
        )
        return value

    def kinetic(mode: WavefunctionAnsatz) -> float:
        if not mode.has_kinetic:
            return 0.0

        def density(rho: NDArray, z: NDArray) -> NDArray:
            d_rho, d_z = mode.gradient(rho, z)
            total = d_rho**2 + d_z**2
            if mode.ell != 0:
                total = total + (mode.ell * mode.profile(rho, z) / rho) ** 2
            return 0.5 * total

        return integrate(density)

    def potential(mode: WavefunctionAnsatz) -> float:
        return integrate(
            lambda rho, z: potential_value(trap_osc, rho, z)
            * mode.profile(rho, z) ** 2
        )

    def interaction(a: WavefunctionAnsatz, b: WavefunctionAnsatz) -> float:
        return eta_osc * integrate(
            lambda rho, z: a.profile(rho, z) ** 2 * b.profile(rho, z) ** 2
        )

    def beam(rho: NDArray) -> NDArray:
        weight = (math.sqrt(2) * rho / w_osc) ** n
        if include_envelope:
            weight = weight * np.exp(-(rho**2) / w_osc**2)
        return weight

    def coupling(a: WavefunctionAnsatz, b: WavefunctionAnsatz) -> float:
        return integrate(
            lambda rho, z: a.profile(rho, z) * beam(rho) * b.profile(rho, z)
        )

    omega = trap.omega_perp
    integrals = IntegralSet(
        t_g=omega * kinetic(g),
        v_g=omega * potential(g),
        t_pm=omega * kinetic(vp),
        v_pm=omega * potential(vp),
        i_gg=omega * interaction(g, g),
        i_gp=omega * interaction(g, vp),
        i_gm=omega * interaction(g, vm),
        i_pp=omega * interaction(vp, vp),
        i_mm=omega * interaction(vm, vm),
        i_pm=omega * interaction(vp, vm),
        i2l_gg=integrate(lambda rho, z: beam(rho) ** 2 * g.profile(rho, z) ** 2),
        il_gp=coupling(g, vp),
        il_pg=coupling(vp, g),
        il_gm=coupling(g, vm),
        il_mg=coupling(vm, g),
        beam_waist=w,
        ell=n,
        include_envelope=include_envelope,
    )
    logger.info(
        "Computed %s overlap integrals for ell=%d (scheme=%s)",
        psi_g.kind,
        n,
        spec.scheme,
    )
    return integrals


# ---- Cache ----
class IntegralCache:
    """
    On-disk JSON cache of `IntegralSet` values.

    Entries are keyed by a SHA-256 over the trap, η, ℓ, waist, mode kinds,
    envelope flag and quadrature spec, so any change to the inputs misses.
    """

    def __init__(self, directory: PathLike) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(
        trap: Trap,
        eta: float,
        w: float,
        ell: int,
        kinds: tuple[str, ...],
        spec: QuadratureSpec,
        include_envelope: bool = False,
        mu: Optional[float] = None,
    ) -> str:
        payload = {
            "trap": {type(trap).__name__: asdict(trap)},
            "eta": eta,
            "w": w,
            "ell": ell,
            "kinds": list(kinds),
            "spec": asdict(spec),
            "envelope": include_envelope,
            "mu": mu,
        }
        text = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return Path(self.directory, key).with_suffix(".json")

    def get(self, key: str) -> Optional[IntegralSet]:
        path = self._path(key)
        if not path.exists():
            return None
        logger.debug("Integral cache hit: %s", path.name)
        return IntegralSet.from_json(path.read_text(encoding="utf-8"))

    def put(self, key: str, integrals: IntegralSet) -> None:
        atomic_write_text(self._path(key), integrals.to_json())


def cached_numeric_integrals(
    cache: Optional[IntegralCache],
    psi_g: WavefunctionAnsatz,
    psi_vp: WavefunctionAnsatz,
    psi_vm: WavefunctionAnsatz,
    trap: Trap,
    eta: float,
    w: float,
    ell: int,
    spec: QuadratureSpec = QuadratureSpec(),
    include_envelope: bool = False,
) -> IntegralSet:
    """`numeric_integrals` behind an optional `IntegralCache`."""
    if cache is None:
        return numeric_integrals(
            psi_g, psi_vp, psi_vm, trap, eta, w, ell, spec, include_envelope
        )
    mu = None if psi_g.condensate is None else psi_g.condensate.mu
    key = IntegralCache.key(
        trap,
        eta,
        w,
        ell,
        (psi_g.kind, psi_vp.kind, psi_vm.kind),
        spec,
        include_envelope,
        mu,
    )
    hit = cache.get(key)
    if hit is not None:
        return hit
    integrals = numeric_integrals(
        psi_g, psi_vp, psi_vm, trap, eta, w, ell, spec, include_envelope
    )
    cache.put(key, integrals)
    return integrals
