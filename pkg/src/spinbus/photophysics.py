"""Cross-section tables, injection fidelity, ionization/capture rate laws,
charge-state selectivity rules, and spurious-electron estimates.

Defect species are identified by charge-state strings: "NV-", "N_S0", "P_S0"
(donor isotope keys like "14N_S0" alias to "N_S0"; the charge physics does
not depend on the nitrogen isotope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError, TableError, UndefinedFidelityError
from .params import HC, MILLIWATT, thermal_velocity

TABLE_KINDS = ("ionization", "optical-absorption")
UNITS_FLAGS = ("absolute", "relative")

_SPECIES_ALIASES = {"14N_S0": "N_S0", "15N_S0": "N_S0"}


@dataclass(frozen=True)
class CrossSectionTable:
    """Wavelength-sampled cross-section curve with linear interpolation.

    Wavelengths in nm, strictly increasing; sigma in A^2 for absolute tables
    or arbitrary-but-shared units for relative ones.  Relative tables carry a
    norm_tag naming their common normalization; two relative tables may only
    be combined when the tags match.
    """

    wavelengths_nm: np.ndarray
    sigmas: np.ndarray
    kind: str
    units_flag: str
    norm_tag: str = ""

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        sg = np.asarray(self.sigmas, dtype=float)
        if self.kind not in TABLE_KINDS:
            raise TableError(f"unknown table kind {self.kind!r}")
        if self.units_flag not in UNITS_FLAGS:
            raise TableError(f"unknown units flag {self.units_flag!r}")
        if self.units_flag == "relative" and not self.norm_tag:
            raise TableError("relative-unit table requires a norm_tag")
        if wl.ndim != 1 or wl.size < 2 or wl.shape != sg.shape:
            raise TableError("table needs >= 2 (wavelength, sigma) samples")
        if not np.all(np.diff(wl) > 0):
            raise TableError("wavelengths must be strictly increasing")
        if np.any(sg < 0):
            raise TableError("cross-sections must be >= 0")
        wl.flags.writeable = False
        sg.flags.writeable = False
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "sigmas", sg)

    @property
    def wavelength_range(self) -> tuple[float, float]:
        return float(self.wavelengths_nm[0]), float(self.wavelengths_nm[-1])

    def interpolate(self, wavelength_nm: float) -> float:
        lo, hi = self.wavelength_range
        if not lo <= wavelength_nm <= hi:
            raise TableError(
                f"wavelength {wavelength_nm} nm outside table range [{lo}, {hi}] nm")
        return float(np.interp(wavelength_nm, self.wavelengths_nm, self.sigmas))

    @classmethod
    def from_text(cls, text: str) -> "CrossSectionTable":
        """Parse the two-column plain-text format.

        '#' starts a comment; the first non-comment line is a header
        ``kind units_flag [norm_tag]``; each following line is
        ``wavelength_nm sigma``.
        """
        header = None
        wl, sg = [], []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            pos = raw.find("#")
            line = (raw if pos < 0 else raw[:pos]).strip()
            if not line:
                continue
            if header is None:
                parts = line.split()
                if len(parts) not in (2, 3):
                    raise TableError(f"line {lineno}: header must be 'kind units_flag [norm_tag]'")
                header = (parts[0], parts[1], parts[2] if len(parts) == 3 else "")
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TableError(f"line {lineno}: expected 'wavelength sigma', got {raw!r}")
            try:
                wl.append(float(parts[0]))
                sg.append(float(parts[1]))
            except ValueError:
                raise TableError(f"line {lineno}: non-numeric sample {raw!r}") from None
        if header is None:
            raise TableError("missing header line")
        return cls(np.array(wl), np.array(sg), header[0], header[1], header[2])

    @classmethod
    def from_file(cls, path) -> "CrossSectionTable":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise TableError(f"cannot read table file {path}: {exc}") from None

    def to_text(self) -> str:
        header = f"{self.kind} {self.units_flag} {self.norm_tag}".rstrip()
        lines = [header]
        lines += [f"{float(w)!r} {float(s)!r}" for w, s in zip(self.wavelengths_nm, self.sigmas)]
        return "\n".join(lines) + "\n"


_BUNDLED = {
    "nv_ionization": "nv_ionization_cross_section.txt",
    "nv_absorption": "nv_absorption_cross_section.txt",
}


def load_bundled_table(name: str) -> CrossSectionTable:
    """Load one of the shipped sample tables ('nv_ionization', 'nv_absorption').

    These are coarse, shape-calibrated sample curves; only the ratio of the
    two is meaningful.  Supply measured tables for quantitative work.
    """
    try:
        fname = _BUNDLED[name]
    except KeyError:
        raise TableError(f"no bundled table named {name!r}; have {sorted(_BUNDLED)}") from None
    text = resources.files("spinbus.data").joinpath(fname).read_text(encoding="utf-8")
    return CrossSectionTable.from_text(text)


def injection_fidelity(table_ion: CrossSectionTable, table_opt: CrossSectionTable,
                       wavelength_nm: float) -> float:
    """Coherent spin-injection fidelity sigma_ion/(sigma_ion + sigma_opt).

    The probability that an illuminated center photoionizes rather than
    merely reaching its optical excited state (where it would dephase).
    Ratio form: invariant under a common rescaling of both tables.
    """
    flags = {table_ion.units_flag, table_opt.units_flag}
    if "relative" in flags:
        if flags != {"relative"} or table_ion.norm_tag != table_opt.norm_tag:
            raise TableError(
                "relative-unit tables require both tables to share one norm_tag")
    sigma_ion = table_ion.interpolate(wavelength_nm)
    sigma_opt = table_opt.interpolate(wavelength_nm)
    total = sigma_ion + sigma_opt
    if total == 0.0:
        raise UndefinedFidelityError(
            f"both cross-sections vanish at {wavelength_nm} nm; fidelity undefined")
    return sigma_ion / total


def default_spot_area_um2(wavelength_nm: float) -> float:
    """Diffraction-limited spot area pi (lambda/2)^2 in um^2."""
    half = wavelength_nm * 1e-3 / 2.0
    return math.pi * half * half


def photoionization_rate(sigma_a2: float, power_mw: float, wavelength_nm: float,
                         spot_area_um2: float | None = None) -> float:
    """One-photon ionization rate sigma * photon flux, in 1/ns.

    Photon flux is P*lambda/(h*c*A); the spot area defaults to the
    diffraction-limited pi (lambda/2)^2, which assumes ideal focusing and
    should be overridden for a known optical setup.
    """
    if sigma_a2 < 0 or power_mw < 0:
        raise DomainError("cross-section and power must be >= 0")
    if wavelength_nm <= 0:
        raise DomainError("wavelength must be > 0 nm")
    if spot_area_um2 is None:
        spot_area_um2 = default_spot_area_um2(wavelength_nm)
    if spot_area_um2 <= 0:
        raise DomainError("spot area must be > 0 um^2")
    flux = power_mw * MILLIWATT * (wavelength_nm * 1e-3) / (HC * spot_area_um2)  # 1/(ns um^2)
    return sigma_a2 * 1e-8 * flux


def capture_rate(rho_um3: float, sigma_cap_nm2: float, temperature_k: float = 300.0,
                 m_eff: float = 1.0) -> tuple[float, float]:
    """Donor capture rate Gamma = rho * sigma_cap * sqrt(k_B T / m) and mean time.

    Returns (rate in 1/ns, mean capture time in ns); rho = 0 gives (0, inf).
    """
    if rho_um3 < 0:
        raise DomainError("electron density must be >= 0 um^-3")
    if sigma_cap_nm2 < 0:
        raise DomainError("capture cross-section must be >= 0 nm^2")
    gamma = rho_um3 * sigma_cap_nm2 * 1e-6 * thermal_velocity(temperature_k, m_eff)
    return gamma, (math.inf if gamma == 0.0 else 1.0 / gamma)


def recharge_time(rho_ensemble_um3: float, sigma_cap_nm2: float,
                  temperature_k: float = 300.0, target_probability: float = 0.63,
                  m_eff: float = 1.0) -> float:
    """Time to recapture an ensemble-photoionized electron with given probability.

    t = -ln(1 - p)/Gamma for the capture rate at the ensemble-supplied density.
    """
    if not 0.0 < target_probability < 1.0:
        raise DomainError("target probability must lie strictly between 0 and 1")
    gamma, _ = capture_rate(rho_ensemble_um3, sigma_cap_nm2, temperature_k, m_eff)
    if gamma == 0.0:
        raise DomainError("zero ensemble density never recharges the center")
    return -math.log1p(-target_probability) / gamma


# photon-energy window (eV) above an ionization threshold within which the
# final conduction-band orbitals are still spin-orbit-free, so the ejected
# electron keeps its spin
SPIN_CONSERVING_WINDOW_EV = 0.5


@dataclass(frozen=True)
class ChargeStateRules:
    """Single-photon charge-state thresholds (eV) per defect species."""

    ionization_ev: Mapping[str, float] = field(default=MappingProxyType({
        "NV-": 2.6,
        "N_S0": 1.7,
        "P_S0": 0.6,
    }))
    excitation_ev: Mapping[str, float] = field(default=MappingProxyType({
        "NV-": 1.946,   # zero-phonon line; excitation requires >= this
    }))
    restore_ev: Mapping[str, float] = field(default=MappingProxyType({
        "NV0": 2.94,    # one-photon NV0 -> NV- back-conversion
        "N_S+": 3.8,
        "P_S+": 4.9,
    }))
    spin_conserving_window_ev: float = SPIN_CONSERVING_WINDOW_EV

    def __post_init__(self):
        for table in (self.ionization_ev, self.excitation_ev, self.restore_ev):
            if any(v <= 0 for v in table.values()):
                raise DomainError("charge-state thresholds must be positive")

    def spin_conserving_limit(self, species: str) -> float:
        return self.ionization_ev[species] + self.spin_conserving_window_ev


DEFAULT_RULES = ChargeStateRules()


@dataclass(frozen=True)
class SelectivityReport:
    """What one photon energy does to one defect species."""

    species: str
    ionizes: bool
    excites: bool
    spin_conserving: bool

    @property
    def untouched(self) -> bool:
        return not (self.ionizes or self.excites)


def selectivity_check(photon_energy_ev: float, targets,
                      rules: ChargeStateRules = DEFAULT_RULES) -> dict[str, SelectivityReport]:
    """Apply the charge-state rules to each target species.

    Single-photon rules only: a species ionizes when the energy exceeds its
    threshold, excites (NV- only) at or above the zero-phonon line, and the
    ionization is spin-conserving within the 0.5 eV window above threshold.
    """
    if photon_energy_ev <= 0:
        raise DomainError("photon energy must be > 0 eV")
    reports = {}
    for target in targets:
        species = _SPECIES_ALIASES.get(target, target)
        if species not in rules.ionization_ev:
            raise DomainError(f"unknown defect species {target!r}")
        ionizes = photon_energy_ev > rules.ionization_ev[species]
        excites = (species in rules.excitation_ev
                   and photon_energy_ev >= rules.excitation_ev[species])
        conserving = ionizes and photon_energy_ev <= rules.spin_conserving_limit(species)
        reports[target] = SelectivityReport(species, ionizes, excites, conserving)
    return reports


def excitation_volume_um3(spot_diameter_um: float = 0.3, depth_um: float = 0.35) -> float:
    """Effective optical excitation volume: spot area times an axial depth.

    The depth is a calibration knob (no first-principles value); the default
    pairs with a 300 nm spot to give ~0.025 um^3.
    """
    if spot_diameter_um <= 0 or depth_um <= 0:
        raise DomainError("spot diameter and depth must be > 0 um")
    return math.pi * (spot_diameter_um / 2.0) ** 2 * depth_um


@dataclass(frozen=True)
class SpuriousElectronEstimate:
    expected_count: float
    probability_at_least_one: float


def spurious_electron_estimate(n_donor_um3: float, excitation_volume: float,
                               ionization_probability: float) -> SpuriousElectronEstimate:
    """Expected background electrons photoionized inside the excitation volume.

    Expected count n*V*p, plus the Poisson probability of ejecting at least
    one spurious capture candidate.
    """
    if n_donor_um3 < 0 or excitation_volume < 0:
        raise DomainError("density and volume must be >= 0")
    if not 0.0 <= ionization_probability <= 1.0:
        raise DomainError("ionization probability must lie in [0, 1]")
    expected = n_donor_um3 * excitation_volume * ionization_probability
    return SpuriousElectronEstimate(expected, -math.expm1(-expected))


@dataclass(frozen=True)
class TwoPhotonInjectionVerdict:
    """Qualitative verdict on two-photon ionization as a spin-injection route.

    The spin-selective ejection probability is capped at 66% by the equal
    chance of ejecting any of the three occupied excited-state orbitals, with
    further reductions from shelving and above-window ejection; no kinetic
    model is attached.
    """

    coherent_injection_disqualified: bool = True
    spin_selective_ceiling: float = 0.66


TWO_PHOTON_VERDICT = TwoPhotonInjectionVerdict()

# thermal free-electron background in high-purity material: the donor level
# is ~1.7 eV deep, so the thermally ionized population is negligible
THERMAL_FREE_ELECTRONS_PER_UM3 = 0.0
