"""Spin Hamiltonians of the NV and donor centers, and dephasing figures.

All Hamiltonians are dense complex matrices in GHz over an
(electron x nuclear) product basis with both projections listed in
descending order.  Magnetic fields are in gauss, times in ns, and the
time-evolution convention is psi(t) = exp(-2*pi*i*H*t) psi(0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DomainError,
    ParameterError,
    UnsupportedIsotopeError,
)
from .params import DONOR_TABLE, GAMMA_E, DonorSpinParams

TETRAHEDRAL_ANGLE = math.acos(-1.0 / 3.0)

HERMITICITY_TOL = 1e-12
EIG_DEGENERACY_TOL = 1e-10
NORMALIZATION_TOL = 1e-9

DEPHASING_MECHANISMS = (
    "hyperfine-ionization",
    "zero-field-D",
    "nuclear-flip",
    "transport-EY",
)


def spin_operators(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dimensionless spin matrices (Sx, Sy, Sz) for spin s, basis m = s..-s."""
    d = int(round(2 * s + 1))
    m = np.array([s - k for k in range(d)])
    sz = np.diag(m).astype(complex)
    sp = np.zeros((d, d), dtype=complex)
    for k in range(d - 1):
        sp[k, k + 1] = math.sqrt(s * (s + 1) - m[k + 1] * (m[k + 1] + 1))
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    return sx, sy, sz


@dataclass(frozen=True)
class SpinHamiltonian:
    """Dense Hermitian spin Hamiltonian with labeled product basis.

    basis_labels holds (m_s, m_I) pairs; m_I is None for a bare electron
    spin.  Eigenvalues are reported sorted ascending with degenerate values
    kept adjacent rather than re-ordered by any secondary rule.
    """

    matrix: np.ndarray
    basis_labels: tuple
    unit: str = "GHz"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"Hamiltonian must be square, got shape {m.shape}")
        if len(self.basis_labels) != m.shape[0]:
            raise DomainError("basis label count does not match matrix dimension")
        scale = max(1.0, float(np.linalg.norm(m)))
        if np.linalg.norm(m - m.conj().T) > HERMITICITY_TOL * scale:
            raise DomainError("matrix is not Hermitian to 1e-12 relative norm")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)

    def degenerate_groups(self, tol: float | None = None) -> list[list[int]]:
        """Indices of eigenvalues equal within tol (reported, not resolved)."""
        w = self.eigenvalues()
        if tol is None:
            tol = EIG_DEGENERACY_TOL * max(1.0, float(np.max(np.abs(w))))
        groups, current = [], [0]
        for i in range(1, len(w)):
            if w[i] - w[current[-1]] <= tol:
                current.append(i)
            else:
                groups.append(current)
                current = [i]
        groups.append(current)
        return groups


@dataclass(frozen=True)
class DephasingEstimate:
    """A dephasing timescale with its physical mechanism tag."""

    timescale: float            # ns; may be inf
    mechanism: str
    coherence_factor: float     # in [0, 1]

    def __post_init__(self):
        if self.mechanism not in DEPHASING_MECHANISMS:
            raise ParameterError(f"unknown dephasing mechanism {self.mechanism!r}")
        if not self.timescale > 0:
            raise DomainError("dephasing timescale must be positive")
        if not 0.0 <= self.coherence_factor <= 1.0:
            raise DomainError("coherence factor must lie in [0, 1]")


def _electron_labels_s1():
    return ((1, None), (0, None), (-1, None))


def nv_hamiltonian(d_ghz: float, b_gauss: float, gamma_e: float = GAMMA_E) -> SpinHamiltonian:
    """NV triplet Hamiltonian D(Sz^2 - 2/3) + gamma_e Sz B in the m_s = +1,0,-1 basis.

    Traceless by construction.  Hyperfine/electric/strain terms (~1 MHz) are
    deliberately not modeled at this level.
    """
    _, _, sz = spin_operators(1.0)
    h = d_ghz * (sz @ sz - (2.0 / 3.0) * np.eye(3)) + gamma_e * b_gauss * sz
    return SpinHamiltonian(h, _electron_labels_s1())


def _resolve_donor(donor) -> DonorSpinParams:
    if isinstance(donor, DonorSpinParams):
        return donor
    try:
        return DONOR_TABLE[donor]
    except KeyError:
        raise ParameterError(f"unknown donor isotope {donor!r}") from None


def _donor_labels(i_spin: float):
    ms_values = (0.5, -0.5)
    mi_values = [i_spin - k for k in range(int(round(2 * i_spin + 1)))]
    return tuple((ms, mi) for ms in ms_values for mi in mi_values)


def donor_hamiltonian(donor, b_gauss: float, orientation_angle: float = 0.0,
                      gamma_e: float = GAMMA_E) -> SpinHamiltonian:
    """Full donor ESR Hamiltonian with axial hyperfine and quadrupole tensors.

    H = gamma_e s_z B + s.A.I + I.Q.I + gamma_n I_z B, with the electron and
    nuclear quantization axes along B and the A/Q principal axis tilted by
    `orientation_angle` (radians) from B.  The quadrupole tensor is built
    axially symmetric and traceless, normalized so that in the aligned case
    it contributes Q*(I_z^2 - I(I+1)/3).  Quadrupole terms appear only for
    I >= 1.  Units: GHz.
    """
    rec = _resolve_donor(donor)
    if b_gauss < 0:
        raise DomainError("magnetic field must be >= 0 G")
    sx, sy, sz = spin_operators(0.5)
    ix, iy, iz = spin_operators(rec.nuclear_spin)
    dn = ix.shape[0]
    e2, en = np.eye(2), np.eye(dn)
    svec, ivec = (sx, sy, sz), (ix, iy, iz)

    n = np.array([math.sin(orientation_angle), 0.0, math.cos(orientation_angle)])
    a_par, a_perp = rec.a_par_mhz * 1e-3, rec.a_perp_mhz * 1e-3
    a_tensor = a_perp * np.eye(3) + (a_par - a_perp) * np.outer(n, n)

    h = gamma_e * b_gauss * np.kron(sz, en)
    h = h + rec.gamma_n_ghz_per_g * b_gauss * np.kron(e2, iz)
    for i in range(3):
        for j in range(3):
            if a_tensor[i, j] != 0.0:
                h = h + a_tensor[i, j] * np.kron(svec[i], ivec[j])
    if rec.nuclear_spin >= 1 and rec.q_mhz is not None:
        q_tensor = rec.q_mhz * 1e-3 * (np.outer(n, n) - np.eye(3) / 3.0)
        for i in range(3):
            for j in range(3):
                if q_tensor[i, j] != 0.0:
                    h = h + q_tensor[i, j] * np.kron(e2, ivec[i] @ ivec[j])
    return SpinHamiltonian(h, _donor_labels(rec.nuclear_spin))


def misalignment_angle(a_par_mhz: float, a_perp_mhz: float, aligned: bool) -> tuple[float, float]:
    """Nuclear quantization-axis rotation (alpha, chi) for a donor in field.

    Aligned defect axis: (0, 1).  Misaligned (tetrahedral-angle) axis:
    alpha = atan(-(A_par - A_perp) sin 2T / [A_par + A_perp + (A_par - A_perp) cos 2T])
    with T the tetrahedral angle, chi = sqrt(5)/3.  The principal branch of
    atan is taken; the denominator vanishing is a degenerate geometry.
    """
    if aligned:
        return 0.0, 1.0
    two_theta = 2.0 * TETRAHEDRAL_ANGLE
    num = -(a_par_mhz - a_perp_mhz) * math.sin(two_theta)
    den = a_par_mhz + a_perp_mhz + (a_par_mhz - a_perp_mhz) * math.cos(two_theta)
    scale = max(abs(a_par_mhz), abs(a_perp_mhz))
    if abs(den) <= 1e-12 * scale:
        raise DegenerateGeometryError("hyperfine geometry leaves the rotation angle undefined")
    return math.atan(num / den), math.sqrt(5.0) / 3.0


def _secular_terms(rec: DonorSpinParams, b_gauss: float, aligned: bool, gamma_e: float):
    """Static and flip-driving parts of the secular donor Hamiltonian, GHz."""
    alpha, chi = misalignment_angle(rec.a_par_mhz, rec.a_perp_mhz, aligned)
    # quadrupole axis angle in the rotated nuclear frame: the defect axis
    # sits at the tetrahedral angle from B, shifted by the frame rotation.
    q_angle = 0.0 if aligned else TETRAHEDRAL_ANGLE + alpha
    sx, sy, sz = spin_operators(0.5)
    ix, iy, iz = spin_operators(rec.nuclear_spin)
    e2, en = np.eye(2), np.eye(ix.shape[0])
    q = (rec.q_mhz or 0.0) * 1e-3
    gamma_n = rec.gamma_n_ghz_per_g

    static = (gamma_e * b_gauss * np.kron(sz, en)
              + chi * rec.a_par_mhz * 1e-3 * np.kron(sz, iz)
              + q * (math.cos(q_angle) ** 2 * np.kron(e2, iz @ iz)
                     + math.sin(q_angle) ** 2 * np.kron(e2, ix @ ix)
                     - (2.0 / 3.0) * np.eye(2 * en.shape[0]))
              + gamma_n * b_gauss * math.cos(alpha) * np.kron(e2, iz))
    flip = (-(q / 2.0) * math.sin(2.0 * q_angle) * np.kron(e2, ix @ iz + iz @ ix)
            + gamma_n * b_gauss * math.sin(alpha) * np.kron(e2, ix))
    return static, flip


def donor_secular_hamiltonian(donor, b_gauss: float, aligned: bool,
                              gamma_e: float = GAMMA_E) -> SpinHamiltonian:
    """Secular (high-field) donor Hamiltonian for the I = 1 nitrogen isotope.

    Electron spin-flip terms are dropped; the nuclear frame is rotated so the
    effective hyperfine field lies along z', leaving chi*A_par s_z I_z plus the
    rotated quadrupole and nuclear Zeeman terms, including the two
    nuclear-spin-flip-driving terms.  Valid for B well above A_perp/gamma_e
    (a warning is issued below 10x that scale).
    """
    rec = _resolve_donor(donor)
    if rec.nuclear_spin != 1:
        raise UnsupportedIsotopeError(
            f"secular form is specific to I = 1 nitrogen, got {rec.isotope} (I = {rec.nuclear_spin})")
    field_scale = abs(rec.a_perp_mhz) * 1e-3 / gamma_e
    if b_gauss < 10.0 * field_scale:
        warnings.warn(
            f"B = {b_gauss:.0f} G is below 10x A_perp/gamma_e = {10 * field_scale:.0f} G; "
            "secular approximation degrades", stacklevel=2)
    static, flip = _secular_terms(rec, b_gauss, aligned, gamma_e)
    return SpinHamiltonian(static + flip, _donor_labels(rec.nuclear_spin))


def nuclear_flip_drive_mhz(donor, b_gauss: float, aligned: bool,
                           gamma_e: float = GAMMA_E) -> float:
    """Operator norm (MHz) of the flip-driving terms of the secular Hamiltonian."""
    rec = _resolve_donor(donor)
    if rec.nuclear_spin != 1:
        raise UnsupportedIsotopeError("flip-driving terms defined for the I = 1 secular form only")
    _, flip = _secular_terms(rec, b_gauss, aligned, gamma_e)
    return float(np.linalg.norm(flip, 2)) * 1e3


def _check_normalized(alpha: complex, beta: complex):
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > NORMALIZATION_TOL:
        raise DomainError("state (alpha, beta) must be normalized to 1e-9")


def separated_nv_hamiltonian(alpha: complex, beta: complex, d_ghz: float,
                             b_gauss: float, gamma_e: float = GAMMA_E
                             ) -> tuple[SpinHamiltonian, DephasingEstimate]:
    """Single-electron Hamiltonian for each spin of the NV triplet product state.

    For the product state (alpha, beta) x (alpha, beta) the two electrons see
    identical Hamiltonians gamma_e s_z B + D(|alpha|^2 - |beta|^2) s_z.  The
    zero-field term imprints a relative phase at rate D*||alpha|^2 - |beta|^2|,
    so the dephasing timescale is its inverse (infinite on the balanced
    subspace).  The coherence factor is a worst-case tag: 1 when the term
    vanishes, else 0; pulse-aware comparisons live in the protocol layer.
    """
    _check_normalized(alpha, beta)
    _, _, sz = spin_operators(0.5)
    imbalance = abs(alpha) ** 2 - abs(beta) ** 2
    h = (gamma_e * b_gauss + d_ghz * imbalance) * sz
    rate = abs(d_ghz * imbalance)
    timescale = math.inf if rate == 0.0 else 1.0 / rate
    estimate = DephasingEstimate(timescale, "zero-field-D", 1.0 if rate == 0.0 else 0.0)
    labels = ((0.5, None), (-0.5, None))
    return SpinHamiltonian(h, labels), estimate


def product_state_expansion(alpha: complex, beta: complex) -> np.ndarray:
    """Triplet amplitudes (c_+1, c_0, c_-1) of the two-electron product state.

    (alpha, beta) x (alpha, beta) = alpha^2 |+1> + sqrt(2) alpha beta |0>
    + beta^2 |-1>; normalized whenever the input is.
    """
    _check_normalized(alpha, beta)
    return np.array([alpha**2, math.sqrt(2.0) * alpha * beta, beta**2], dtype=complex)


def ionization_dephasing(coupling_mhz: float, rate_per_ns: float) -> DephasingEstimate:
    """Electron-spin coherence surviving ionization at an uncertain instant.

    The hyperfine coupling (MHz) precesses the spin at omega = 2 pi f while
    the center waits to ionize; averaging exp(-i omega t) over an exponential
    ionization-time distribution of rate k gives |<.>| = k/sqrt(k^2 + omega^2).
    Timescale is 1/omega.
    """
    if rate_per_ns <= 0:
        raise DomainError("ionization rate must be > 0 /ns")
    if coupling_mhz < 0:
        raise DomainError("coupling must be >= 0 MHz")
    omega = 2.0 * math.pi * coupling_mhz * 1e-3  # rad/ns
    coherence = rate_per_ns / math.hypot(rate_per_ns, omega)
    timescale = math.inf if omega == 0.0 else 1.0 / omega
    return DephasingEstimate(timescale, "hyperfine-ionization", coherence)


def transport_relaxation_estimate(duration_ns: float, t2_ns: float = 180.0) -> DephasingEstimate:
    """Spin coherence exp(-t/T2) surviving conduction-band transport."""
    if duration_ns < 0 or t2_ns <= 0:
        raise DomainError("transport duration must be >= 0 and T2 > 0")
    return DephasingEstimate(t2_ns, "transport-EY", math.exp(-duration_ns / t2_ns))


def nuclear_flip_estimate(flip_rate_mhz: float, window_ns: float) -> DephasingEstimate:
    """Coherence exp(-r t) surviving a nuclear-spin-flip window."""
    if flip_rate_mhz < 0 or window_ns < 0:
        raise DomainError("flip rate and window must be >= 0")
    rate = flip_rate_mhz * 1e-3
    timescale = math.inf if rate == 0.0 else 1.0 / rate
    return DephasingEstimate(timescale, "nuclear-flip", math.exp(-rate * window_ns))


def evolve(hamiltonian: SpinHamiltonian, psi0: np.ndarray, t_ns: float) -> np.ndarray:
    """Evolve a state vector: psi(t) = exp(-2 pi i H t) psi0 (H in GHz, t in ns)."""
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (hamiltonian.dimension,):
        raise DomainError(
            f"state dimension {psi.shape} does not match Hamiltonian dimension {hamiltonian.dimension}")
    w, v = hamiltonian.eigensystem()
    phases = np.exp(-2j * math.pi * w * t_ns)
    return v @ (phases * (v.conj().T @ psi))
