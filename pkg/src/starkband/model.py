"""Model parameters, derived scales, and closed-form effective-model predictions.

Everything here is pure arithmetic on immutable parameter records: the Rabi
formula for off-resonant inter-band oscillations, the resonant two-level
period, and the universal revival/collapse time estimates.  Energies are in
recoil units with hbar = 1, so times are inverse recoil energies; the Bloch
period T_B = 2*pi/F is the natural time unit of the driven problem.
"""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bessel import bessel_j

__all__ = [
    "ModelParams",
    "DerivedScales",
    "preset_v0_4",
    "PRESETS",
    "resonant_force",
    "rabi_occupation",
    "resonant_period",
    "revival_estimate_universal",
    "collapse_from_revival",
    "load_params",
]


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the tilted two-band Bose-Hubbard Hamiltonian.

    delta        band gap (recoil energies)
    c0           dimensionless inter-band coupling (enters as c0*force)
    t_a, t_b     hopping strengths of lower/upper band (recoil energies)
    w_a, w_b     on-site repulsion within lower/upper band
    w_x          inter-band two-body interaction strength
    g            dimensionless scale multiplying all interaction terms
    force        Stark force F (recoil energies)
    n_particles  total boson number N
    n_sites      sites per band L

    On-site energies are +-delta/2 + l*force; the tilt part is removed in the
    interaction picture used for the ring geometry.
    """

    delta: float
    c0: float
    t_a: float
    t_b: float
    w_a: float
    w_b: float
    w_x: float
    g: float
    force: float
    n_particles: int
    n_sites: int

    def __post_init__(self):
        if not (self.delta > 0):
            raise ValueError(f"band gap must be positive, got {self.delta}")
        if not (self.force > 0):
            raise ValueError(f"Stark force must be positive, got {self.force}")
        if not (self.t_a > 0 and self.t_b > 0):
            raise ValueError(f"hopping strengths must be positive, got t_a={self.t_a}, t_b={self.t_b}")
        if self.w_a < 0 or self.w_b < 0 or self.w_x < 0:
            raise ValueError("interaction strengths must be non-negative (repulsive)")
        if self.g < 0:
            raise ValueError(f"interaction scale g must be non-negative, got {self.g}")
        if self.n_particles < 1:
            raise ValueError(f"need at least one particle, got {self.n_particles}")
        # A single site still defines a valid (hopping-free) model; it is
        # needed for the smallest pair-exchange test systems.
        if self.n_sites < 1:
            raise ValueError(f"need at least one site per band, got {self.n_sites}")

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=g)

    def with_force(self, force: float) -> "ModelParams":
        return replace(self, force=force)

    @property
    def t_bloch(self) -> float:
        return 2.0 * math.pi / self.force


@dataclass(frozen=True)
class DerivedScales:
    """Dimensionless combinations and time scales derived from ModelParams."""

    t_bloch: float
    delta_tilde: float
    x_a: float
    x_b: float
    delta_x: float
    rabi_period: float
    resonance_order: int | None = None
    omega_res: float | None = None
    resonant_period: float | None = None

    @classmethod
    def from_params(cls, params: ModelParams, order: int | None = None) -> "DerivedScales":
        delta_tilde = math.hypot(params.delta, 2.0 * params.c0 * params.force)
        x_a = params.t_a / params.force
        x_b = params.t_b / params.force
        omega = period = None
        if order is not None:
            coupling = params.c0 * params.force * bessel_j(order, x_a + x_b)
            if coupling != 0.0:
                omega = 2.0 * abs(coupling)
                period = 2.0 * math.pi / omega
        return cls(
            t_bloch=params.t_bloch,
            delta_tilde=delta_tilde,
            x_a=x_a,
            x_b=x_b,
            delta_x=x_a + x_b,
            rabi_period=2.0 * math.pi / delta_tilde,
            resonance_order=order,
            omega_res=omega,
            resonant_period=period,
        )


def preset_v0_4(g: float = 0.0) -> ModelParams:
    """Parameter set for a lattice of depth 4 recoil energies, N = L = 5.

    The force 2.2207 is the tuned value sitting on the order-2 resonance of
    the finite system; the analytic resonance condition gives 2.2201 (see
    resonant_force).  The interaction scale g is the control knob and is left
    to the caller.
    """
    return ModelParams(
        delta=4.39,
        c0=-0.15,
        t_a=0.062,
        t_b=0.62,
        w_a=0.030,
        w_b=0.018,
        w_x=0.012,
        g=g,
        force=2.2207,
        n_particles=5,
        n_sites=5,
    )


PRESETS = {"v0_4": preset_v0_4}


def resonant_force(delta: float, c0: float, order: int) -> float:
    """Force at which the dressed gap equals an integer multiple of the force.

    Solves sqrt(delta^2 + 4 c0^2 F^2) = order * F for F > 0, giving
    F = delta / sqrt(order^2 - 4 c0^2).  Requires order > 2|c0|.
    """
    if order <= 0:
        raise ValueError(f"resonance order must be a positive integer, got {order}")
    disc = order * order - 4.0 * c0 * c0
    if disc <= 0:
        raise ValueError(
            f"no resonant force exists for order {order} with |c0| = {abs(c0)}: need order > 2|c0|"
        )
    return delta / math.sqrt(disc)


def rabi_occupation(t, params: ModelParams):
    """Off-resonant upper-band occupation [1 + dt^2/(4 c0^2 F^2)]^-1 sin^2(dt*t/2).

    dt is the dressed gap sqrt(delta^2 + 4 c0^2 F^2).  Accepts scalar or
    array times.  For c0 = 0 the oscillation amplitude vanishes identically
    and 0 is returned for all t instead of dividing by zero.
    """
    if params.c0 == 0.0:
        return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
    scales = DerivedScales.from_params(params)
    amplitude = 1.0 / (1.0 + scales.delta_tilde**2 / (4.0 * params.c0**2 * params.force**2))
    return amplitude * np.sin(0.5 * scales.delta_tilde * np.asarray(t)) ** 2


def resonant_period(params: ModelParams, order: int) -> float:
    """Full population-transfer period pi/|c0 F J_order(delta_x)| at resonance."""
    scales = DerivedScales.from_params(params, order)
    if scales.resonant_period is None:
        raise ValueError(
            f"inter-band coupling vanishes at order {order}: "
            f"c0*F*J_{order}({scales.delta_x:g}) = 0 gives an infinite period"
        )
    return math.pi / (0.5 * scales.omega_res)


def revival_estimate_universal(params: ModelParams) -> float:
    """System-size-independent revival time 4*pi / (g W_x J0^2(x_a) J0^2(x_b)).

    Exact 1/g scaling by construction.  Without interactions (g*w_x = 0) the
    oscillation never collapses, so no revival time exists.
    """
    if params.g * params.w_x == 0.0:
        raise ValueError("no revival without interactions: g*w_x must be positive")
    scales = DerivedScales.from_params(params)
    j0a = bessel_j(0, scales.x_a)
    j0b = bessel_j(0, scales.x_b)
    return 4.0 * math.pi / (params.g * params.w_x * j0a**2 * j0b**2)


def collapse_from_revival(t_rev: float, delta_n: float) -> float:
    """Collapse time t_rev / (pi * delta_n^2) from the coefficient-width delta_n."""
    if delta_n <= 0:
        raise ValueError(f"coefficient-distribution width must be positive, got {delta_n}")
    return t_rev / (math.pi * delta_n * delta_n)


_PARAM_KEYS = (
    "delta", "c0", "t_a", "t_b", "w_a", "w_b", "w_x", "g", "force",
    "n_particles", "n_sites",
)


def load_params(path) -> tuple[ModelParams, int | None]:
    """Read a ModelParams record from a JSON parameter file.

    The schema is strict: exactly the ModelParams field names, with `force`
    optionally replaced by `resonance_order` (the force is then computed from
    the analytic resonance condition).  Exactly one of the two must be given.
    Returns (params, resonance_order or None).
    """
    text = Path(path).read_text()
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError(f"parameter file {path} must hold a single JSON object")
    allowed = set(_PARAM_KEYS) | {"resonance_order"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ValueError(f"unknown keys in parameter file {path}: {', '.join(unknown)}")

    order = data.pop("resonance_order", None)
    if order is not None and not isinstance(order, int):
        raise ValueError(f"resonance_order must be an integer, got {order!r}")
    if "force" in data and order is not None:
        raise ValueError("give exactly one of 'force' and 'resonance_order', not both")
    if "force" not in data and order is None:
        raise ValueError("parameter file needs either 'force' or 'resonance_order'")

    missing = sorted(k for k in _PARAM_KEYS if k not in data and k != "force")
    if missing:
        raise ValueError(f"missing keys in parameter file {path}: {', '.join(missing)}")
    if "force" not in data:
        data["force"] = resonant_force(data["delta"], data["c0"], order)
    return ModelParams(**data), order
