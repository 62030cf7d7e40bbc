"""Physical constants, material parameters, and the unit system.

Single source of truth for every number the other modules consume.  The
working unit system is fixed to

    length      micrometer (um)
    time        nanosecond (ns)
    voltage     volt (V)
    energy      electronvolt (eV)
    frequency   gigahertz (GHz)
    B-field     gauss (G)
    temperature kelvin (K)

so transport figures (mobility in um^2/(V ns), diffusivity in um^2/ns,
densities in um^-3) read off without SI conversion noise.  Hyperfine
parameters are tabulated in MHz as usual and converted where consumed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from . import config as _config
from .errors import DomainError, ParameterError, UnitError

# fundamental constants in the um-ns-V-eV-G-K system
K_B = 8.617333262e-5            # Boltzmann constant, eV/K
SPEED_OF_LIGHT = 299792.458     # um/ns
ELECTRON_MASS = 510998.95 / SPEED_OF_LIGHT**2   # eV ns^2 / um^2
HC = 1.239841984                # photon energy * wavelength, eV um
MU_B_OVER_H = 1.3996245e-3      # Bohr magneton / h, GHz/G
MU_N_OVER_H = 7.6225932e-7      # nuclear magneton / h, GHz/G
COULOMB_E = 1.4399645e-3        # e/(4 pi eps0), V um
MILLIWATT = 6.241509074e6       # 1 mW in eV/ns

# electron gyromagnetic ratio, GHz/G; g_e is isotropic and free-electron-like
# for every center handled here, so one shared value is used throughout.
GAMMA_E = 2.8025e-3


@dataclass(frozen=True)
class UnitSystem:
    """The fixed unit system; exists so unit tags have one home."""

    length: str = "um"
    time: str = "ns"
    voltage: str = "V"
    energy: str = "eV"
    frequency: str = "GHz"
    magnetic_field: str = "G"
    temperature: str = "K"


UNITS = UnitSystem()


@dataclass(frozen=True)
class Quantity:
    """A number with a unit tag.  Addition across different tags is refused.

    Deliberately minimal: + and - require matching units, * and / accept
    plain numbers only.  Use .value once the tag has served its purpose.
    """

    value: float
    unit: str

    def _check(self, other: "Quantity") -> None:
        if not isinstance(other, Quantity):
            raise UnitError(f"cannot combine Quantity[{self.unit}] with bare number")
        if other.unit != self.unit:
            raise UnitError(f"unit mismatch: {self.unit!r} vs {other.unit!r}")

    def __add__(self, other):
        self._check(other)
        return Quantity(self.value + other.value, self.unit)

    def __sub__(self, other):
        self._check(other)
        return Quantity(self.value - other.value, self.unit)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            raise UnitError("Quantity*Quantity not supported; use .value explicitly")
        return Quantity(self.value * float(other), self.unit)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            raise UnitError("Quantity/Quantity not supported; use .value explicitly")
        return Quantity(self.value / float(other), self.unit)


@dataclass(frozen=True)
class DonorSpinParams:
    """Spin parameters of one substitutional donor isotope."""

    isotope: str
    orientation: str            # principal/defect axis family, '<111>' or '<100>'
    g_e: float
    g_n: float
    nuclear_spin: float         # I
    a_par_mhz: float            # axial magnetic hyperfine A_par
    a_perp_mhz: float           # transverse magnetic hyperfine A_perp
    q_mhz: float | None = None  # electric quadrupole parameter, I >= 1 only

    @property
    def gamma_n_ghz_per_g(self) -> float:
        return self.g_n * MU_N_OVER_H

    @property
    def dimension(self) -> int:
        return int(round(2 * self.nuclear_spin + 1)) * 2


# measured donor spin parameters (tabulated literature values)
DONOR_TABLE: Mapping[str, DonorSpinParams] = MappingProxyType({
    "14N_S0": DonorSpinParams("14N_S0", "<111>", 2.0, +0.40, 1.0, 114.0, 81.0, -3.97),
    "15N_S0": DonorSpinParams("15N_S0", "<111>", 2.0, -0.57, 0.5, -160.0, -114.0, None),
    "P_S0": DonorSpinParams("P_S0", "<100>", 2.0, +2.26, 0.5, 162.0, 33.9, None),
})


# unit tags for every numeric registry field
PARAMETER_UNITS: Mapping[str, str] = MappingProxyType({
    "mu_n": "um^2/(V ns)",
    "d_n": "um^2/ns",
    "t1_transport": "ns",
    "sigma_cap": "nm^2",
    "sigma_ion_donor": "A^2",
    "m_eff": "m_e",
    "epsilon_r": "1",
    "temperature": "K",
    "d_gs": "GHz",
    "d_es": "GHz",
    "gamma_e": "GHz/G",
})

# (min, max, min_inclusive) physical ranges for config validation
_RANGES = {
    "mu_n": (0.0, None, False),
    "d_n": (0.0, None, False),
    "t1_transport": (0.0, None, False),
    "sigma_cap": (0.0, None, False),
    "sigma_ion_donor": (0.0, None, True),
    "m_eff": (0.0, None, False),
    "epsilon_r": (1.0, None, True),
    "temperature": (0.0, None, False),
    "d_gs": (0.0, None, True),
    "d_es": (0.0, None, True),
    "gamma_e": (0.0, None, False),
}


@dataclass(frozen=True)
class PhysicalParameters:
    """Registry of material/defect constants in the fixed unit system.

    Defaults are the room-temperature high-purity-diamond values used across
    the toolkit.  Immutable; share freely across threads.
    """

    mu_n: float = 450.0          # electron mobility, um^2/(V ns)
    d_n: float = 11.0            # electron diffusivity, um^2/ns
    t1_transport: float = 180.0  # conduction-band spin relaxation time, ns
    sigma_cap: float = 5.0       # donor capture cross-section, nm^2 (measured 3-7)
    sigma_ion_donor: float = 0.75  # donor photoionization cross-section, A^2
    m_eff: float = 1.0           # effective electron mass / free mass
    epsilon_r: float = 5.7       # relative permittivity of diamond
    temperature: float = 300.0   # K
    d_gs: float = 2.87           # NV ground-state zero-field splitting, GHz
    d_es: float = 1.42           # NV excited-state zero-field splitting, GHz
    gamma_e: float = GAMMA_E     # GHz/G
    donors: Mapping[str, DonorSpinParams] = field(default=DONOR_TABLE)

    def __post_init__(self):
        for name, (lo, hi, lo_inc) in _RANGES.items():
            value = getattr(self, name)
            if isinstance(value, Quantity):
                if value.unit != PARAMETER_UNITS[name]:
                    raise UnitError(
                        f"{name}: expected unit {PARAMETER_UNITS[name]!r}, got {value.unit!r}")
                object.__setattr__(self, name, value.value)
                value = value.value
            ok = value >= lo if lo_inc else value > lo
            if hi is not None:
                ok = ok and value <= hi
            if not ok:
                raise ParameterError(f"{name} = {value} outside physical range")

    def quantity(self, name: str) -> Quantity:
        """The named parameter as a tagged Quantity."""
        if name not in PARAMETER_UNITS:
            raise ParameterError(f"unknown parameter {name!r}")
        return Quantity(getattr(self, name), PARAMETER_UNITS[name])

    def donor(self, isotope: str) -> DonorSpinParams:
        try:
            return self.donors[isotope]
        except KeyError:
            raise ParameterError(f"unknown donor isotope {isotope!r}") from None

    @property
    def thermal_voltage(self) -> float:
        """k_B T / e in volts."""
        return K_B * self.temperature

    @property
    def einstein_diffusivity(self) -> float:
        """Diffusivity implied by the Einstein relation mu_n k_B T / e, um^2/ns."""
        return self.mu_n * self.thermal_voltage

    @property
    def k_capture(self) -> float:
        """Capture rate per unit electron density, um^3/ns."""
        return self.sigma_cap * 1e-6 * thermal_velocity(self.temperature, self.m_eff)


def thermal_velocity(temperature: float, m_eff: float = 1.0) -> float:
    """Thermal electron speed sqrt(k_B T / m) in um/ns.

    temperature in K, m_eff in units of the free electron mass.
    """
    if temperature <= 0:
        raise DomainError(f"temperature must be > 0 K, got {temperature}")
    if m_eff <= 0:
        raise DomainError(f"m_eff must be > 0, got {m_eff}")
    return (K_B * temperature / (m_eff * ELECTRON_MASS)) ** 0.5


def load_parameters(source) -> PhysicalParameters:
    """Build a parameter registry from a config source.

    `source` may be a mapping of key -> value, a config-format string, or a
    path to a config file.  Keys follow the registry field names; values in
    the canonical units (see PARAMETER_UNITS).  A [parameters] section is
    used when present, otherwise top-level keys.  Unknown keys and
    out-of-range values raise ParameterError.
    """
    if isinstance(source, Mapping):
        overrides = dict(source)
    else:
        text = source
        if isinstance(source, (str, os.PathLike)) and os.path.exists(str(source)):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        sections = _config.parse_config_text(text)
        raw = sections.get("parameters", sections.get("", {}))
        extra_sections = set(sections) - {"parameters", ""}
        if extra_sections:
            raise ParameterError(f"unexpected sections {sorted(extra_sections)} in parameter source")
        overrides = {k: _config.parse_float("parameters", k, v) for k, v in raw.items()}

    unknown = set(overrides) - set(PARAMETER_UNITS)
    if unknown:
        raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")
    numeric = {}
    for key, value in overrides.items():
        if isinstance(value, Quantity):
            numeric[key] = value  # unit checked at construction
        else:
            try:
                numeric[key] = float(value)
            except (TypeError, ValueError):
                raise ParameterError(f"{key}: expected a number, got {value!r}") from None
    return PhysicalParameters(**numeric)


def serialize_parameters(params: PhysicalParameters) -> str:
    """Canonical config text for a registry (donor table is fixed, not emitted)."""
    body = {name: getattr(params, name) for name in PARAMETER_UNITS}
    return _config.format_config({"parameters": body})


def normalize_parameters(source) -> str:
    """Canonical form of any valid parameter source."""
    return serialize_parameters(load_parameters(source))
