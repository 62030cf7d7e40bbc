"""Drift-diffusion transport of the injected electron's probability density.

Explicit finite-volume solver (first-order upwind drift, centered diffusion)
for the coupled density/trap-occupation system, together with the closed-form
half-space and nanowire solutions used as oracles, and the (wire size, field)
feasibility map for sub-100 ns capture.

Conventions: the electron's drift velocity is -mu_n * E (negative carrier),
so a scalar "drive field" E > 0 stands for the applied vector (0, 0, -E) and
transports the electron toward +z at speed mu_n * E.  Zero-flux boundaries
are applied on every face of the computational box; for half-space geometry
the x = 0 face is the material surface, for the nanowire all faces are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    CFLViolationError,
    DomainError,
    GridError,
    NegativeDensityError,
)
from .params import COULOMB_E, PhysicalParameters

GEOMETRIES = ("half-space", "box-nanowire", "free-space")

MASS_TOL = 1e-6
NEGATIVE_DENSITY_GUARD = -1e-12
MIN_SEPARATION_CELLS = 8


def drive_field(e_scalar: float) -> tuple[float, float, float]:
    """Applied-field vector giving electron drift toward +z at speed mu_n*E."""
    return (0.0, 0.0, -float(e_scalar))


@dataclass(frozen=True)
class TransportDomain:
    """Rectilinear grid, applied field, and injector/capturer placement.

    shape is the cell count per axis, spacing the cell size in um; cell
    centers sit at (i + 1/2)*spacing.  e_applied is the applied electric
    field vector in V/um.
    """

    geometry: str
    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    e_applied: tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_injector: tuple[float, float, float] | None = None
    r_capturer: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise GridError(f"unknown geometry {self.geometry!r}; have {GEOMETRIES}")
        if len(self.shape) != 3 or any(int(n) < 2 for n in self.shape):
            raise GridError("shape must be three cell counts >= 2")
        if len(self.spacing) != 3 or any(d <= 0 for d in self.spacing):
            raise GridError("spacing must be three positive lengths")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "spacing", tuple(float(d) for d in self.spacing))
        object.__setattr__(self, "e_applied", tuple(float(e) for e in self.e_applied))
        for name in ("r_injector", "r_capturer"):
            pos = getattr(self, name)
            if pos is not None:
                pos = tuple(float(c) for c in pos)
                object.__setattr__(self, name, pos)
                self.cell_index(pos)  # raises GridError if outside
        if self.r_injector is not None and self.r_capturer is not None:
            sep = math.dist(self.r_injector, self.r_capturer)
            if sep < MIN_SEPARATION_CELLS * min(self.spacing):
                raise GridError(
                    f"injector/capturer separation {sep:g} um under-resolved: "
                    f"need >= {MIN_SEPARATION_CELLS} cells of {min(self.spacing):g} um")
        if self.geometry == "box-nanowire" and self.r_capturer is not None:
            lx, ly, lz = self.extents
            l_side = min(lx, ly)
            gap = lz - self.r_capturer[2]
            if abs(gap - l_side / 2.0) > self.spacing[2] / 2.0:
                raise GridError(
                    f"nanowire capturer must sit l/2 = {l_side / 2.0:g} um from the "
                    f"endface; got {gap:g} um")

    @property
    def extents(self) -> tuple[float, float, float]:
        return tuple(n * d for n, d in zip(self.shape, self.spacing))

    @property
    def cell_volume(self) -> float:
        dx, dy, dz = self.spacing
        return dx * dy * dz

    def axis_centers(self, axis: int) -> np.ndarray:
        return (np.arange(self.shape[axis]) + 0.5) * self.spacing[axis]

    def cell_index(self, point) -> tuple[int, int, int]:
        idx = []
        for c, n, d in zip(point, self.shape, self.spacing):
            i = int(math.floor(c / d))
            if not 0 <= i < n:
                raise GridError(f"point {tuple(point)} lies outside the grid")
            idx.append(i)
        return tuple(idx)


@dataclass(frozen=True)
class TransportState:
    """Density field plus injector/capturer occupations at one instant."""

    rho: np.ndarray
    n_injector: float
    n_capturer: float
    t: float

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if float(rho.min(initial=0.0)) < NEGATIVE_DENSITY_GUARD:
            raise DomainError("density must be >= 0 everywhere")
        if not 0.0 <= self.n_injector <= 1.0 or not 0.0 <= self.n_capturer <= 1.0:
            raise DomainError("occupation probabilities must lie in [0, 1]")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    def total_probability(self, domain: TransportDomain) -> float:
        return float(self.rho.sum()) * domain.cell_volume + self.n_injector + self.n_capturer

    def check_mass(self, domain: TransportDomain, tol: float = MASS_TOL) -> None:
        total = self.total_probability(domain)
        if abs(total - 1.0) > tol:
            raise DomainError(f"total probability {total} deviates from 1 by more than {tol}")

    def moments(self, domain: TransportDomain) -> dict[str, float]:
        """Mean position and isotropic spread of the free-density part."""
        return _density_moments(self.rho, domain)


def _density_moments(rho: np.ndarray, domain: TransportDomain) -> dict[str, float]:
    mass = float(rho.sum())
    out = {"free_mass": mass * domain.cell_volume}
    if mass == 0.0:
        out.update(mean_x=math.nan, mean_y=math.nan, mean_z=math.nan, spread=math.nan)
        return out
    variances = []
    for axis, name in enumerate(("mean_x", "mean_y", "mean_z")):
        other = tuple(a for a in range(3) if a != axis)
        weights = rho.sum(axis=other)
        centers = domain.axis_centers(axis)
        mean = float(np.dot(weights, centers)) / mass
        variances.append(float(np.dot(weights, (centers - mean) ** 2)) / mass)
        out[name] = mean
    out["spread"] = math.sqrt(sum(variances) / 3.0)
    return out


def gaussian_state(domain: TransportDomain, center, width: float,
                   n_injector: float = 0.0, n_capturer: float = 0.0) -> TransportState:
    """Normalized Gaussian density blob of the given 1-sigma width (um)."""
    if width <= 0:
        raise DomainError("width must be > 0 um")
    grids = np.meshgrid(*(domain.axis_centers(a) for a in range(3)), indexing="ij")
    r2 = sum((g - c) ** 2 for g, c in zip(grids, center))
    rho = np.exp(-r2 / (2.0 * width**2))
    free = 1.0 - n_injector - n_capturer
    rho *= free / (rho.sum() * domain.cell_volume)
    return TransportState(rho, n_injector, n_capturer, 0.0)


def state_from_density(domain: TransportDomain, rho: np.ndarray,
                       n_injector: float = 0.0, n_capturer: float = 0.0,
                       t: float = 0.0, normalize: bool = True) -> TransportState:
    """Wrap an arbitrary density field; by default rescale to unit total."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != domain.shape:
        raise GridError(f"density shape {rho.shape} does not match grid {domain.shape}")
    if normalize:
        mass = rho.sum() * domain.cell_volume
        free = 1.0 - n_injector - n_capturer
        if mass <= 0 and free > 0:
            raise DomainError("cannot normalize a zero density field")
        if mass > 0:
            rho = rho * (free / mass)
    state = TransportState(rho, n_injector, n_capturer, t)
    state.check_mass(domain)
    return state


def injector_loaded_state(domain: TransportDomain) -> TransportState:
    """All probability parked on the injecting center (pre-ionization)."""
    return TransportState(np.zeros(domain.shape), 1.0, 0.0, 0.0)


def rectangular_pulse(rate_per_ns: float, duration_ns: float) -> Callable[[float], float]:
    """Constant ionization-rate profile k_I(t) for 0 <= t < duration."""
    if rate_per_ns < 0 or duration_ns < 0:
        raise DomainError("pulse rate and duration must be >= 0")

    def profile(t: float) -> float:
        return rate_per_ns if 0.0 <= t < duration_ns else 0.0

    return profile


@dataclass(frozen=True)
class SolverOptions:
    """Approximation toggles and stepping control for the PDE solver."""

    include_coulomb: bool = True
    include_capture: bool = True
    cfl_safety: float = 0.9
    dt: float | None = None     # explicit step; validated against stability


@dataclass
class TransportResult:
    """Solver output: snapshots, a summary trajectory, and run diagnostics."""

    states: list[TransportState]
    trajectory: list[dict]
    dt: float
    n_steps: int
    conservation_max_drift: float

    @property
    def final(self) -> TransportState:
        return self.states[-1]


def _face_positions(domain: TransportDomain, axis: int):
    """Coordinates of interior face centers along `axis` (broadcastable)."""
    n = domain.shape[axis]
    d = domain.spacing[axis]
    face = np.arange(1, n) * d
    coords = []
    for a in range(3):
        if a == axis:
            c = face
        else:
            c = domain.axis_centers(a)
        shape = [1, 1, 1]
        shape[a] = -1
        coords.append(c.reshape(shape))
    return coords


def _coulomb_normal_field(domain: TransportDomain, axis: int, center,
                          epsilon_r: float) -> np.ndarray:
    """Unit-charge Coulomb field normal component on interior faces of `axis`.

    Field of a positive elementary charge at `center` in a medium of relative
    permittivity epsilon_r, with the source cell regularized by capping the
    distance at half the cell diagonal.
    """
    x, y, z = _face_positions(domain, axis)
    rx, ry, rz = x - center[0], y - center[1], z - center[2]
    r = np.sqrt(rx * rx + ry * ry + rz * rz)
    r_reg = 0.5 * math.sqrt(sum(d * d for d in domain.spacing))
    r = np.maximum(r, r_reg)
    comp = (rx, ry, rz)[axis]
    return (COULOMB_E / epsilon_r) * comp / r**3


def _stable_dt(domain: TransportDomain, d_n: float, vmax: Sequence[float],
               safety: float) -> float:
    diffusive = 2.0 * d_n * sum(1.0 / d**2 for d in domain.spacing)
    advective = sum(v / d for v, d in zip(vmax, domain.spacing))
    return safety / (diffusive + advective)


def solve_drift_diffusion(domain: TransportDomain, params: PhysicalParameters,
                          k_injection, k_capture: float | None, t_end: float,
                          state0: TransportState | None = None,
                          options: SolverOptions = SolverOptions(),
                          snapshot_times: Sequence[float] = (),
                          record_stride: int | None = None) -> TransportResult:
    """Evolve the drift-diffusion/trap-occupation system to t_end.

    Parameters
    ----------
    k_injection : float, callable t -> 1/ns, or None
        Photoionization rate of the injecting center (None means 0).
    k_capture : float or None
        Capture rate per unit density in um^3/ns; None takes the registry
        value sigma_cap * thermal velocity.
    state0 : initial TransportState; defaults to everything on the injector.
    snapshot_times : times (ns) at which to keep full density snapshots
        (rounded to step boundaries); the final state is always kept.
    record_stride : trajectory row every this many steps (auto if None).

    The density is advanced with upwinded drift and centered diffusion under
    zero-flux boundaries; injector/capturer exchange uses exponential
    (unconditionally positive) updates paired exactly with the density, so
    total probability is conserved to round-off.
    """
    if t_end <= 0:
        raise DomainError("t_end must be > 0 ns")
    mu, d_n = params.mu_n, params.d_n
    if k_capture is None:
        k_capture = params.k_capture
    if k_capture < 0:
        raise DomainError("capture coefficient must be >= 0 um^3/ns")
    if k_injection is None:
        k_injection = 0.0
    k_inj_fn = k_injection if callable(k_injection) else None
    if k_inj_fn is None and k_injection < 0:
        raise DomainError("injection rate must be >= 0 /ns")

    if state0 is None:
        state0 = injector_loaded_state(domain)
    state0.check_mass(domain)
    if state0.n_injector > 0 and domain.r_injector is None:
        raise GridError("initial state occupies an injector but none is placed")

    rho = np.array(state0.rho, dtype=float)
    n_inj, n_cap = float(state0.n_injector), float(state0.n_capturer)
    t0 = float(state0.t)
    vcell = domain.cell_volume
    inj_idx = domain.cell_index(domain.r_injector) if domain.r_injector else None
    cap_idx = domain.cell_index(domain.r_capturer) if domain.r_capturer else None

    # static drift velocity (electron: v = -mu E) plus unit-charge Coulomb
    # velocity shapes on interior faces, scaled each step by the live charges
    v_static = [-mu * domain.e_applied[a] for a in range(3)]
    coulomb = options.include_coulomb and (inj_idx is not None or cap_idx is not None)
    g_inj = g_cap = (None, None, None)
    if coulomb:
        g_inj = tuple(
            -mu * _coulomb_normal_field(domain, a, domain.r_injector, params.epsilon_r)
            if domain.r_injector else None for a in range(3))
        g_cap = tuple(
            -mu * _coulomb_normal_field(domain, a, domain.r_capturer, params.epsilon_r)
            if domain.r_capturer else None for a in range(3))

    vmax = []
    for a in range(3):
        m = abs(v_static[a])
        if coulomb:
            if g_inj[a] is not None:
                m += float(np.abs(g_inj[a]).max())
            if g_cap[a] is not None:
                m += float(np.abs(g_cap[a]).max())
        vmax.append(m)
    dt_stable = _stable_dt(domain, d_n, vmax, options.cfl_safety)
    if options.dt is not None:
        if options.dt > dt_stable / options.cfl_safety:
            raise CFLViolationError(
                f"dt = {options.dt:g} ns exceeds the stability limit {dt_stable / options.cfl_safety:g} ns")
        dt_stable = options.dt
    n_steps = max(1, math.ceil(t_end / dt_stable))
    dt = t_end / n_steps

    stride = record_stride or max(1, n_steps // 256)
    snap_steps = sorted({min(n_steps, max(0, round(ts / dt))) for ts in snapshot_times})

    spacing = domain.spacing
    slabs_lo = [tuple(slice(None) if a != ax else slice(0, -1) for a in range(3)) for ax in range(3)]
    slabs_hi = [tuple(slice(None) if a != ax else slice(1, None) for a in range(3)) for ax in range(3)]
    inv_spacing = [1.0 / d for d in spacing]
    diff_coef = [d_n * inv for inv in inv_spacing]
    div = np.zeros_like(rho)

    initial_total = rho.sum() * vcell + n_inj + n_cap
    max_drift = 0.0
    states: list[TransportState] = []
    trajectory: list[dict] = []

    def record_row(t: float):
        trajectory.append({"t": t, **_density_moments(rho, domain),
                           "n_injector": n_inj, "n_capturer": n_cap,
                           "total_probability": rho.sum() * vcell + n_inj + n_cap})

    record_row(t0)
    if 0 in snap_steps:
        states.append(TransportState(rho, n_inj, n_cap, t0))

    for step in range(n_steps):
        t = t0 + step * dt
        q_inj = 1.0 - n_inj if inj_idx is not None else 0.0
        q_cap = 1.0 - n_cap if cap_idx is not None else 0.0

        div.fill(0.0)
        for ax in range(3):
            v = v_static[ax]
            if coulomb:
                if g_inj[ax] is not None:
                    v = v + q_inj * g_inj[ax]
                if g_cap[ax] is not None:
                    v = v + q_cap * g_cap[ax]
            lo, hi = rho[slabs_lo[ax]], rho[slabs_hi[ax]]
            if isinstance(v, float):
                flux = v * lo if v >= 0.0 else v * hi
            else:
                flux = np.where(v > 0, v * lo, v * hi)
            flux -= diff_coef[ax] * (hi - lo)
            flux *= inv_spacing[ax]
            div[slabs_lo[ax]] += flux
            div[slabs_hi[ax]] -= flux
        rho -= dt * div

        if inj_idx is not None:
            k_i = k_inj_fn(t) if k_inj_fn else k_injection
            if k_i > 0 and n_inj > 0:
                released = n_inj * -math.expm1(-k_i * dt)
                n_inj -= released
                rho[inj_idx] += released / vcell
            if options.include_capture and k_capture > 0 and rho[inj_idx] > 0:
                recaptured = rho[inj_idx] * vcell * -math.expm1(-k_capture * (1.0 - n_inj) * dt / vcell)
                rho[inj_idx] -= recaptured / vcell
                n_inj += recaptured
        if cap_idx is not None and options.include_capture and k_capture > 0 and rho[cap_idx] > 0:
            captured = rho[cap_idx] * vcell * -math.expm1(-k_capture * (1.0 - n_cap) * dt / vcell)
            rho[cap_idx] -= captured / vcell
            n_cap += captured

        low = float(rho.min())
        if low < 0.0:
            if low < NEGATIVE_DENSITY_GUARD:
                raise NegativeDensityError(
                    f"density reached {low:g} at step {step + 1}; scheme guard tripped")
            np.clip(rho, 0.0, None, out=rho)

        total = rho.sum() * vcell + n_inj + n_cap
        max_drift = max(max_drift, abs(total - initial_total))

        done = step + 1
        if done % stride == 0 or done == n_steps:
            record_row(t0 + done * dt)
        if done in snap_steps:
            states.append(TransportState(rho, n_inj, n_cap, t0 + done * dt))

    if n_steps not in snap_steps:
        states.append(TransportState(rho, n_inj, n_cap, t0 + n_steps * dt))
    return TransportResult(states, trajectory, dt, n_steps, max_drift)


# ---------------------------------------------------------------------------
# closed-form solutions and derived figures

def analytic_half_space(x_injector: float, width: float, e_field: float, t: float,
                        x, y, z, params: PhysicalParameters = PhysicalParameters()):
    """Half-space drift-diffusion solution with an image source at x = 0.

    Gaussian of 1-sigma width `width` released at (x_injector, 0, 0); drive
    field magnitude e_field (drift toward +z at mu_n*E).  The image term
    enforces the zero-flux material surface at x = 0; the effective time
    t* = t + width^2/(2 D_n) folds the initial width into the kernel.
    Returns the density at (x, y, z), um^-3.
    """
    if width <= 0:
        raise DomainError("width must be > 0 um")
    if t < 0:
        raise DomainError("t must be >= 0 ns")
    d_n, mu = params.d_n, params.mu_n
    t_star = t + width**2 / (2.0 * d_n)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    norm = 1.0 / math.sqrt(4.0 * math.pi * d_n * t_star)
    four_dt = 4.0 * d_n * t_star
    xs = norm * (np.exp(-((x + x_injector) ** 2) / four_dt)
                 + np.exp(-((x - x_injector) ** 2) / four_dt))
    ys = norm * np.exp(-(y**2) / four_dt)
    drift = mu * e_field
    zs = norm * np.exp(-(z**2) / four_dt) * np.exp(drift * (2.0 * z - drift * t) / (4.0 * d_n))
    return xs * ys * zs


def spread_radius(t: float, width: float = 0.0,
                  params: PhysicalParameters = PhysicalParameters()) -> float:
    """Free-diffusion radius sqrt(2 D_n t + width^2) in um."""
    if t < 0 or width < 0:
        raise DomainError("t and width must be >= 0")
    return math.sqrt(2.0 * params.d_n * t + width**2)


def transport_distance(e_field: float, t: float,
                       params: PhysicalParameters = PhysicalParameters()) -> tuple[float, float]:
    """Drift distance mu_n*E*t and drift speed mu_n*E (um, um/ns)."""
    speed = params.mu_n * e_field
    return speed * t, speed


@dataclass(frozen=True)
class NanowireSteadyState:
    """Static end-face density profile in an l x l x L wire under drive E."""

    side: float
    length: float
    e_field: float
    prefactor: float        # density scale mu E/(D l^2), um^-3
    decay_per_um: float     # mu E / D

    def density(self, z):
        """Density at height z (0 at the far end, length at the endface)."""
        return self.prefactor * np.exp(-self.decay_per_um * (self.length - np.asarray(z)))

    @property
    def contained_probability(self) -> float:
        return -math.expm1(-self.decay_per_um * self.length)

    def validity_report(self, params: PhysicalParameters) -> dict:
        peclet = self.decay_per_um * self.length
        return {
            "peclet": peclet,
            "valid": peclet >= 5.0,
            "equilibration_transverse_ns": self.side**2 / params.d_n,
            "equilibration_drift_ns": self.length / (params.mu_n * self.e_field),
        }


def nanowire_steady_state(side: float, length: float, e_field: float,
                          params: PhysicalParameters = PhysicalParameters()) -> NanowireSteadyState:
    """Long-time density distribution in a nanowire (valid for mu E L / D >> 1)."""
    if side <= 0 or length <= 0:
        raise DomainError("wire dimensions must be > 0 um")
    if e_field <= 0:
        raise DomainError("drive field must be > 0 V/um")
    decay = params.mu_n * e_field / params.d_n
    prefactor = params.mu_n * e_field / (params.d_n * side**2)
    return NanowireSteadyState(side, length, e_field, prefactor, decay)


def capture_point_density(side: float, e_field: float,
                          params: PhysicalParameters = PhysicalParameters()) -> float:
    """Steady nanowire density at the capture point z = L - l/2, um^-3.

    Depends only on the distance l/2 to the endface, not the wire length:
    (mu E/(D l^2)) exp(-mu E l/(2 D)).
    """
    if side <= 0:
        raise DomainError("wire side must be > 0 um")
    if e_field <= 0:
        raise DomainError("drive field must be > 0 V/um")
    mu, d_n = params.mu_n, params.d_n
    return (mu * e_field / (d_n * side**2)) * math.exp(-mu * e_field * side / (2.0 * d_n))


def capture_feasible_field_range(side: float, rho_min: float = 50.0,
                                 params: PhysicalParameters = PhysicalParameters()
                                 ) -> tuple[float, float] | None:
    """Field window [E_lower, E_upper] where the capture-point density >= rho_min.

    The capture-point density g(E) = (mu E/(D l^2)) exp(-mu E l/(2 D)) is
    unimodal in E, so the condition g >= rho_min has a lower and an upper
    root; returns None when even the peak falls short.
    """
    if side <= 0:
        raise DomainError("wire side must be > 0 um")
    if rho_min < 0:
        raise DomainError("rho_min must be >= 0")
    mu, d_n = params.mu_n, params.d_n
    if rho_min == 0.0:
        return (0.0, math.inf)
    e_peak = 2.0 * d_n / (mu * side)

    def g(e):
        return capture_point_density(side, e, params) - rho_min

    if g(e_peak) < 0:
        return None
    e_lo_bracket = e_peak * 1e-9
    lower = brentq(g, e_lo_bracket, e_peak, xtol=1e-12, rtol=1e-12)
    e_hi = e_peak
    while g(e_hi) >= 0:
        e_hi *= 2.0
    upper = brentq(g, e_peak, e_hi, xtol=1e-12, rtol=1e-12)
    return float(lower), float(upper)


@dataclass(frozen=True)
class FeasibilityMap:
    """Capture-point density over a (wire size, field) grid with its boundary."""

    sides: np.ndarray           # um
    e_fields: np.ndarray        # V/um
    density: np.ndarray         # um^-3, shape (len(sides), len(e_fields))
    rho_min: float
    boundary: tuple             # rows (side, e_lower, e_upper); NaN when empty

    def scan_boundary(self) -> list[tuple[float, float, float]]:
        """Boundary estimated from the sampled grid (first/last feasible E)."""
        rows = []
        for i, side in enumerate(self.sides):
            feasible = np.nonzero(self.density[i] >= self.rho_min)[0]
            if feasible.size == 0:
                rows.append((float(side), math.nan, math.nan))
            else:
                rows.append((float(side), float(self.e_fields[feasible[0]]),
                             float(self.e_fields[feasible[-1]])))
        return rows


def feasibility_region(side_range: tuple[float, float], e_range: tuple[float, float],
                       rho_min: float = 50.0, n_side: int = 48, n_e: int = 48,
                       params: PhysicalParameters = PhysicalParameters()) -> FeasibilityMap:
    """Map the (l, E) region where the steady capture-point density >= rho_min."""
    if side_range[0] <= 0 or e_range[0] <= 0:
        raise DomainError("ranges must be positive")
    if side_range[1] <= side_range[0] or e_range[1] <= e_range[0]:
        raise DomainError("ranges must be increasing (lo, hi) pairs")
    sides = np.linspace(side_range[0], side_range[1], n_side)
    e_fields = np.linspace(e_range[0], e_range[1], n_e)
    mu, d_n = params.mu_n, params.d_n
    ll, ee = np.meshgrid(sides, e_fields, indexing="ij")
    density = (mu * ee / (d_n * ll**2)) * np.exp(-mu * ee * ll / (2.0 * d_n))
    boundary = []
    for side in sides:
        roots = capture_feasible_field_range(float(side), rho_min, params)
        if roots is None:
            boundary.append((float(side), math.nan, math.nan))
        else:
            boundary.append((float(side), roots[0], roots[1]))
    return FeasibilityMap(sides, e_fields, density, rho_min, tuple(boundary))


# ---------------------------------------------------------------------------
# plain-text output formats

def format_density_snapshot(state: TransportState, domain: TransportDomain) -> str:
    """Grid dump: header (dims, spacings, time) then one value per line, z-fastest."""
    nx, ny, nz = domain.shape
    dx, dy, dz = domain.spacing
    lines = [
        f"# dims {nx} {ny} {nz}",
        f"# spacing {dx!r} {dy!r} {dz!r}",
        f"# t {float(state.t)!r}",
        f"# n_injector {float(state.n_injector)!r}",
        f"# n_capturer {float(state.n_capturer)!r}",
    ]
    lines.extend(repr(float(v)) for v in state.rho.ravel(order="C"))
    return "\n".join(lines) + "\n"


TRAJECTORY_COLUMNS = ("t", "mean_x", "mean_y", "mean_z", "spread",
                      "n_injector", "n_capturer", "total_probability")


def format_trajectory_csv(trajectory: list[dict]) -> str:
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for row in trajectory:
        lines.append(",".join(repr(float(row[c])) for c in TRAJECTORY_COLUMNS))
    return "\n".join(lines) + "\n"
