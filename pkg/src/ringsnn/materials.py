"""GST optical constants and effective-medium mixing.

Partially crystallized GST is described by its degree of crystallization
p in [0, 1].  The complex permittivity of the mixture interpolates
between the amorphous and crystalline endpoint permittivities through a
Clausius-Mossotti style mixing rule,

    (eps_eff - 1)/(eps_eff + 2) = p*(eps_c - 1)/(eps_c + 2)
                                  + (1 - p)*(eps_a - 1)/(eps_a + 2)

which is solved in closed form by inverting the fraction.  Endpoint
values default to the standard single-wavelength GST indices
(crystalline 7.2 + 1.9i, amorphous 4.6 + 0.18i); dispersion is not
modelled.
"""

import cmath
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OpticalConstants",
    "GstState",
    "MaterialTable",
    "DegenerateMixtureError",
    "permittivity",
    "effective_permittivity",
    "refractive_index_of",
    "mixing_fraction",
]

# |1 - F| below this means the mixing rule has no finite solution;
# unreachable for physical GST endpoint values.
_DEGENERATE_TOL = 1e-12


class DegenerateMixtureError(ValueError):
    """Mixing fraction too close to 1 for a finite effective permittivity."""


@dataclass(frozen=True)
class OpticalConstants:
    """Complex refractive index n + i*kappa of one material state."""

    n: float
    kappa: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"refractive index n must be positive, got {self.n}")
        if self.kappa < 0:
            raise ValueError(f"extinction kappa must be >= 0, got {self.kappa}")

    @property
    def complex_index(self) -> complex:
        return complex(self.n, self.kappa)


@dataclass(frozen=True)
class GstState:
    """Degree of crystallization p: 0 = fully amorphous, 1 = fully crystalline."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"degree of crystallization must be in [0, 1], got {self.p}")

    @property
    def amorphization(self) -> float:
        return 1.0 - self.p


CRYSTALLINE = GstState(1.0)
AMORPHOUS = GstState(0.0)


@dataclass(frozen=True)
class MaterialTable:
    """Device material parameters (SI units unless noted).

    Defaults are the standard values for the Si/SiO2/GST stack:
    refractive indices, specific heats (J/kg.K), thermal conductivities
    (W/m.K), densities (kg/m^3) and the GST melting temperature (K).
    """

    n_si: float = 3.5
    n_sio2: float = 1.4
    gst_crystalline: OpticalConstants = field(
        default_factory=lambda: OpticalConstants(7.2, 1.9)
    )
    gst_amorphous: OpticalConstants = field(
        default_factory=lambda: OpticalConstants(4.6, 0.18)
    )
    specific_heat_crystalline: float = 217.0
    specific_heat_amorphous: float = 217.0
    thermal_conductivity_crystalline: float = 0.59
    thermal_conductivity_amorphous: float = 0.19
    density_crystalline: float = 6270.0
    density_amorphous: float = 5870.0
    melting_temperature: float = 877.0

    def __post_init__(self):
        for name in (
            "n_si",
            "n_sio2",
            "specific_heat_crystalline",
            "specific_heat_amorphous",
            "thermal_conductivity_crystalline",
            "thermal_conductivity_amorphous",
            "density_crystalline",
            "density_amorphous",
            "melting_temperature",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_config(cls, section) -> "MaterialTable":
        """Build from a key/value mapping (strings allowed, as read from INI)."""
        kwargs = {}
        scalar_keys = {
            "n_si",
            "n_sio2",
            "specific_heat_crystalline",
            "specific_heat_amorphous",
            "thermal_conductivity_crystalline",
            "thermal_conductivity_amorphous",
            "density_crystalline",
            "density_amorphous",
            "melting_temperature",
        }
        for key, value in dict(section).items():
            if key in scalar_keys:
                kwargs[key] = float(value)
            elif key == "gst_crystalline_n":
                kwargs.setdefault("_c", [0, 0])[0] = float(value)
            elif key == "gst_crystalline_kappa":
                kwargs.setdefault("_c", [0, 0])[1] = float(value)
            elif key == "gst_amorphous_n":
                kwargs.setdefault("_a", [0, 0])[0] = float(value)
            elif key == "gst_amorphous_kappa":
                kwargs.setdefault("_a", [0, 0])[1] = float(value)
            else:
                raise ValueError(f"unknown material parameter {key!r}")
        c_pair = kwargs.pop("_c", None)
        a_pair = kwargs.pop("_a", None)
        if c_pair is not None:
            kwargs["gst_crystalline"] = OpticalConstants(*c_pair)
        if a_pair is not None:
            kwargs["gst_amorphous"] = OpticalConstants(*a_pair)
        return cls(**kwargs)

    @property
    def eps_crystalline(self) -> complex:
        return permittivity(self.gst_crystalline)

    @property
    def eps_amorphous(self) -> complex:
        return permittivity(self.gst_amorphous)


DEFAULT_TABLE = MaterialTable()


def permittivity(constants: OpticalConstants) -> complex:
    """Complex permittivity eps = (n + i*kappa)^2."""
    return constants.complex_index**2


def mixing_fraction(p, eps_c: complex, eps_a: complex):
    """Right-hand side of the mixing rule; accepts scalar or array p."""
    fc = (eps_c - 1.0) / (eps_c + 2.0)
    fa = (eps_a - 1.0) / (eps_a + 2.0)
    return p * fc + (1.0 - p) * fa


def effective_permittivity(state, eps_c=None, eps_a=None):
    """Effective permittivity of partially crystallized GST.

    `state` is a GstState or a scalar/array p.  Solves the mixing rule
    in closed form: eps_eff = (1 + 2F)/(1 - F) with F the mixed
    Clausius-Mossotti fraction.
    """
    if eps_c is None:
        eps_c = DEFAULT_TABLE.eps_crystalline
    if eps_a is None:
        eps_a = DEFAULT_TABLE.eps_amorphous
    p = state.p if isinstance(state, GstState) else state
    F = mixing_fraction(p, eps_c, eps_a)
    denom = 1.0 - F
    if np.min(np.abs(denom)) < _DEGENERATE_TOL:
        raise DegenerateMixtureError(
            "mixing fraction approaches 1; no finite effective permittivity"
        )
    return (1.0 + 2.0 * F) / denom


def _principal_index(eps):
    """Square root of eps on the branch with positive real part."""
    if np.ndim(eps) == 0:
        root = cmath.sqrt(complex(eps))
        return -root if root.real < 0 else root
    root = np.sqrt(np.asarray(eps, dtype=complex))
    return np.where(root.real < 0, -root, root)


def refractive_index_of(state, table: MaterialTable = DEFAULT_TABLE) -> OpticalConstants:
    """Complex refractive index sqrt(eps_eff), branch with n > 0, kappa >= 0."""
    eps = effective_permittivity(state, table.eps_crystalline, table.eps_amorphous)
    root = _principal_index(eps)
    return OpticalConstants(root.real, root.imag)


def bulk_index_curve(p, table: MaterialTable = DEFAULT_TABLE):
    """Vector-friendly n + i*kappa of the mixture for array p (plumbing for
    the effective-index rescaling in the photonics layer)."""
    eps = effective_permittivity(p, table.eps_crystalline, table.eps_amorphous)
    return _principal_index(eps)
