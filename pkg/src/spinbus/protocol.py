"""Pulse timelines for spin injection, detection, and entanglement, with
timing-budget validation and a composite fidelity estimate.

Targets are written "<species>@<cluster>" (e.g. "NV-@A", "NS@B"); pulses on
the same (medium, cluster) channel must not overlap, while different clusters
own independent optical/microwave hardware and may run concurrently.  Waits
(transport, capture) are scheduling gaps marked by checkpoints rather than
pulses.  The critical nuclear-spin window runs from the nuclear_prep_done
checkpoint to the last operation on the transport electron; trailing optical
readout sits outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from types import MappingProxyType
from typing import Mapping

from .errors import DomainError, GateTooSlowError, TimelineError
from .photophysics import capture_rate, selectivity_check
from .spin import (
    ionization_dephasing,
    nuclear_flip_estimate,
    separated_nv_hamiltonian,
    transport_relaxation_estimate,
)

OPTICAL_BANDS: Mapping[str, tuple[float, float]] = MappingProxyType({
    "optical-red": (1.7, 1.946),
    "optical-green": (2.32, 2.32),
    "optical-blue": (2.8, 3.1),
})

# representative photon energy used when a pulse does not pin one explicitly
BAND_DEFAULT_EV: Mapping[str, float] = MappingProxyType({
    "optical-red": 1.82,
    "optical-green": 2.32,
    "optical-blue": 2.95,
})

PULSE_KINDS = tuple(OPTICAL_BANDS) + ("microwave",)
PULSE_LABELS = ("init", "nuclear-prep", "gate", "ionize", "readout", "wait")

NUCLEAR_WINDOW_NS = 1000.0
POST_INIT_WINDOW_NS = 500.0
ENTANGLEMENT_GATE_NS = 220.0
TRANSPORT_CAPTURE_NS = 180.0
TRANSPORT_ALLOCATION_NS = 80.0
CAPTURE_ALLOCATION_NS = 100.0

# "much faster than" margin used for the coherent-injection verdict
FAST_PULSE_FRACTION = 0.1


def gate_time_ns(coupling_mhz: float) -> float:
    """Two-qubit gate duration: 100 ns at 10 MHz dipolar coupling, ~ 1/coupling."""
    if coupling_mhz <= 0:
        raise DomainError("dipolar coupling must be > 0 MHz")
    return 1000.0 / coupling_mhz


@dataclass(frozen=True)
class Pulse:
    """One optical or microwave pulse.

    photon_energy_ev defaults to the band's representative energy and must
    lie within the band; conformance is enforced at validation time so that
    malformed timelines can be constructed and then rejected.
    """

    kind: str
    duration_ns: float
    target: str
    label: str
    photon_energy_ev: float | None = None

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise TimelineError(f"unknown pulse kind {self.kind!r}")
        if self.label not in PULSE_LABELS:
            raise TimelineError(f"unknown pulse label {self.label!r}")
        if not self.duration_ns > 0:
            raise TimelineError("pulse duration must be > 0 ns")
        if self.kind in OPTICAL_BANDS and self.photon_energy_ev is None:
            object.__setattr__(self, "photon_energy_ev", BAND_DEFAULT_EV[self.kind])

    @property
    def is_optical(self) -> bool:
        return self.kind in OPTICAL_BANDS

    @property
    def cluster(self) -> str:
        _, _, tag = self.target.partition("@")
        return tag

    @property
    def species(self) -> str:
        name, _, _ = self.target.partition("@")
        return name

    @property
    def channel(self) -> str:
        medium = "optical" if self.is_optical else "microwave"
        return f"{medium}@{self.cluster}"


@dataclass(frozen=True)
class ScheduledPulse:
    start_ns: float
    pulse: Pulse

    @property
    def end_ns(self) -> float:
        return self.start_ns + self.pulse.duration_ns


@dataclass(frozen=True)
class Budget:
    """A named time window with a limit, measured between two checkpoints."""

    name: str
    limit_ns: float
    start_checkpoint: str
    end_checkpoint: str


@dataclass(frozen=True)
class ProtocolTimeline:
    name: str
    pulses: tuple[ScheduledPulse, ...]
    checkpoints: Mapping[str, float]
    budgets: tuple[Budget, ...]
    clusters: Mapping[str, tuple[str, ...]]     # cluster tag -> defect species
    meta: Mapping[str, object] = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        object.__setattr__(self, "checkpoints", MappingProxyType(dict(self.checkpoints)))
        object.__setattr__(self, "budgets", tuple(self.budgets))
        object.__setattr__(self, "clusters",
                           MappingProxyType({k: tuple(v) for k, v in self.clusters.items()}))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def total_duration_ns(self) -> float:
        ends = [sp.end_ns for sp in self.pulses] + list(self.checkpoints.values())
        return max(ends) if ends else 0.0

    def budget_window(self, budget: Budget) -> float:
        try:
            start = self.checkpoints[budget.start_checkpoint]
            end = self.checkpoints[budget.end_checkpoint]
        except KeyError as exc:
            raise TimelineError(f"budget {budget.name!r} references missing checkpoint {exc}") from None
        return end - start

    def to_text(self) -> str:
        """One pulse per line: start, duration, kind, target, label."""
        lines = [f"# timeline {self.name}"]
        for sp in sorted(self.pulses, key=lambda s: (s.start_ns, s.pulse.channel)):
            p = sp.pulse
            lines.append(f"{sp.start_ns!r} {p.duration_ns!r} {p.kind} {p.target} {p.label}")
        for name in sorted(self.checkpoints):
            lines.append(f"# checkpoint {name} {self.checkpoints[name]!r}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["start_ns,duration_ns,kind,target,label,photon_energy_ev"]
        for sp in sorted(self.pulses, key=lambda s: (s.start_ns, s.pulse.channel)):
            p = sp.pulse
            energy = "" if p.photon_energy_ev is None else repr(p.photon_energy_ev)
            lines.append(f"{sp.start_ns!r},{p.duration_ns!r},{p.kind},{p.target},{p.label},{energy}")
        return "\n".join(lines) + "\n"


class _Builder:
    """Sequential per-channel scheduler with shared checkpoints."""

    def __init__(self, name: str, clusters: Mapping[str, tuple[str, ...]]):
        self.name = name
        self.clusters = dict(clusters)
        self.pulses: list[ScheduledPulse] = []
        self.checkpoints: dict[str, float] = {}
        self.budgets: list[Budget] = []
        self.cursor = 0.0

    def add(self, kind, duration, target, label, energy=None, *, concurrent=False):
        start = self.cursor
        pulse = Pulse(kind, duration, target, label, energy)
        self.pulses.append(ScheduledPulse(start, pulse))
        if not concurrent:
            self.cursor = start + duration
        return self

    def both(self, kind, duration, species, label, energy=None):
        """The same pulse on clusters A and B concurrently."""
        self.add(kind, duration, f"{species}@A", label, energy, concurrent=True)
        self.add(kind, duration, f"{species}@B", label, energy)
        return self

    def wait(self, duration):
        self.cursor += duration
        return self

    def checkpoint(self, name):
        self.checkpoints[name] = self.cursor
        return self

    def budget(self, name, limit, start_cp, end_cp):
        self.budgets.append(Budget(name, limit, start_cp, end_cp))
        return self

    def build(self, **meta) -> ProtocolTimeline:
        return ProtocolTimeline(self.name, tuple(self.pulses), self.checkpoints,
                                tuple(self.budgets), self.clusters, meta)


def build_injection_nv(alpha: complex, beta: complex, *, blue_ns: float = 1.0,
                       green_ns: float = 500.0, microwave_ns: float = 10.0,
                       n_microwave: int = 2, d_ghz: float = 2.87,
                       b_gauss: float = 0.0) -> ProtocolTimeline:
    """Spin injection through a bare NV center: polarize, prepare, photoionize.

    A green pulse polarizes the center, microwave pulses shape the triplet
    superposition for the target product state, and a blue pulse ejects one
    electron.  The build attaches the zero-field-term dephasing estimate and a
    coherent/incoherent verdict: the protocol is coherent only on the
    balanced |alpha| = |beta| subspace or when the blue pulse is much shorter
    than the dephasing timescale.
    """
    _, estimate = separated_nv_hamiltonian(alpha, beta, d_ghz, b_gauss)
    coherent = (math.isinf(estimate.timescale)
                or blue_ns <= FAST_PULSE_FRACTION * estimate.timescale)
    b = _Builder("inject-nv", {"A": ("NV-",)})
    b.add("optical-green", green_ns, "NV-@A", "init")
    b.checkpoint("init_done")
    for _ in range(n_microwave):
        b.add("microwave", microwave_ns, "NV-@A", "gate")
    b.checkpoint("prep_done")
    b.add("optical-blue", blue_ns, "NV-@A", "ionize")
    b.checkpoint("injection_done")
    b.checkpoint("last_electron_op")
    return b.build(dephasing_estimate=estimate, coherent_injection=coherent,
                   alpha=alpha, beta=beta, blue_ns=blue_ns)


def build_injection_pair(*, coupling_mhz: float = 10.0, min_coupling_mhz: float = 10.0,
                         projective_reinit: bool = False, green_ns: float = 500.0,
                         red_recharge_ns: float = 200.0, microwave_ns: float = 10.0,
                         nuclear_prep_gates: int = 2, prep_gates: int = 1,
                         ionize_ns: float = 1.0) -> ProtocolTimeline:
    """Spin injection through an NV / nitrogen-donor pair.

    Initialization charges the donor and prepares its nuclear spin to the
    projection with no magnetic hyperfine coupling; the NV is then
    re-polarized either optically (second green plus a recharge red, the
    default) or projectively through its own nuclear spin (microwaves only,
    no recharge).  Two-qubit gates write the electron spin state and a red
    pulse photoionizes the donor.  Everything after nuclear preparation must
    fit in the 1 us nuclear window.
    """
    if coupling_mhz < min_coupling_mhz:
        raise GateTooSlowError(
            f"dipolar coupling {coupling_mhz} MHz below configured minimum "
            f"{min_coupling_mhz} MHz: two-qubit gates too slow")
    gate_ns = gate_time_ns(coupling_mhz)
    b = _Builder("inject-pair", {"A": ("NV-", "N_S0")})
    b.add("optical-green", green_ns, "NV-@A", "init")
    b.add("optical-red", red_recharge_ns, "NS@A", "init")
    for _ in range(nuclear_prep_gates):
        b.add("microwave", gate_ns, "NS@A", "nuclear-prep")
    b.checkpoint("nuclear_prep_done")
    if projective_reinit:
        # NV electron re-initialized from its own nuclear spin; the donor
        # charge state is untouched, so no recharge pulse is needed
        b.add("microwave", microwave_ns, "NV-@A", "init")
        b.add("microwave", microwave_ns, "NV-@A", "init")
    else:
        b.add("optical-green", green_ns, "NV-@A", "init")
        b.add("optical-red", red_recharge_ns, "NS@A", "init")
    b.checkpoint("init_done")
    for _ in range(prep_gates):
        b.add("microwave", gate_ns, "NS@A", "gate")
    b.add("optical-red", ionize_ns, "NS@A", "ionize")
    b.checkpoint("injection_done")
    b.checkpoint("last_electron_op")
    b.budget("nuclear-window", NUCLEAR_WINDOW_NS, "nuclear_prep_done", "last_electron_op")
    return b.build(coupling_mhz=coupling_mhz, projective_reinit=projective_reinit,
                   gate_ns=gate_ns)


def build_detection_pair(transport_ns: float = TRANSPORT_ALLOCATION_NS,
                         capture_ns: float = CAPTURE_ALLOCATION_NS, *,
                         coupling_mhz: float = 10.0, green_ns: float = 500.0,
                         red_recharge_ns: float = 200.0, nuclear_prep_gates: int = 2,
                         readout_gates: int = 2) -> ProtocolTimeline:
    """Detection of a transported electron by an NV / nitrogen-donor pair.

    As injection-side initialization, except the donor is left ionized and
    ready to capture (the re-polarizing green pulse itself strips it).  After
    the transport wait and capture window, microwave gates map the captured
    spin onto the NV and a final green pulse reads it out; the readout pulse
    sits outside the nuclear window, which closes at the last electron gate.
    The transport-plus-capture time additionally carries its own relaxation
    budget, split into the standard transport and capture allocations.
    """
    if transport_ns < 0 or capture_ns < 0:
        raise DomainError("transport and capture times must be >= 0 ns")
    gate_ns = gate_time_ns(coupling_mhz)
    b = _Builder("detect-pair", {"B": ("NV-", "N_S0")})
    b.add("optical-green", green_ns, "NV-@B", "init")
    b.add("optical-red", red_recharge_ns, "NS@B", "init")
    for _ in range(nuclear_prep_gates):
        b.add("microwave", gate_ns, "NS@B", "nuclear-prep")
    b.checkpoint("nuclear_prep_done")
    b.add("optical-green", green_ns, "NV-@B", "init")
    b.checkpoint("init_done")
    b.checkpoint("injection_done")
    if transport_ns > 0:
        b.wait(transport_ns)
    b.checkpoint("transport_done")
    if capture_ns > 0:
        b.wait(capture_ns)
    b.checkpoint("capture_done")
    for _ in range(readout_gates):
        b.add("microwave", gate_ns, "NS@B", "readout")
    b.checkpoint("last_electron_op")
    b.add("optical-green", green_ns, "NV-@B", "readout")
    b.budget("nuclear-window", NUCLEAR_WINDOW_NS, "nuclear_prep_done", "last_electron_op")
    b.budget("transport+capture", TRANSPORT_CAPTURE_NS, "injection_done", "capture_done")
    b.budget("transport", TRANSPORT_ALLOCATION_NS, "injection_done", "transport_done")
    b.budget("capture", CAPTURE_ALLOCATION_NS, "transport_done", "capture_done")
    return b.build(transport_ns=transport_ns, capture_ns=capture_ns, gate_ns=gate_ns)


def build_entanglement(coupling_nv_ns_mhz: float = 10.0, coupling_nv_logic_mhz: float = 10.0,
                       transport_ns: float = TRANSPORT_ALLOCATION_NS,
                       capture_ns: float = CAPTURE_ALLOCATION_NS, *,
                       gate_ns: float | None = None, green_ns: float = 500.0,
                       red_recharge_ns: float = 200.0, microwave_ns: float = 10.0,
                       nuclear_prep_gates: int = 2, ionize_ns: float = 1.0) -> ProtocolTimeline:
    """Entanglement distribution between logic qubits in clusters A and B.

    Both clusters are initialized concurrently (projective NV re-init, whose
    lack of donor interference is what lets the post-initialization window
    close).  An entangling gate mediated by NV A links logic qubit A to the
    donor electron, which is then injected, transported, captured at B, and
    swapped onto logic qubit B by a final gate block.  The entangling gate is
    modeled as one gate segment per mediated coupling; the final swap runs at
    the slower of the two couplings.  gate_ns forces the entangling-gate
    duration (for budget exploration).
    """
    if coupling_nv_ns_mhz <= 0 or coupling_nv_logic_mhz <= 0:
        raise DomainError("couplings must be > 0 MHz")
    if transport_ns < 0 or capture_ns < 0:
        raise DomainError("transport and capture times must be >= 0 ns")
    ent_gate_ns = (gate_time_ns(coupling_nv_ns_mhz) + gate_time_ns(coupling_nv_logic_mhz)
                   if gate_ns is None else float(gate_ns))
    if ent_gate_ns <= 0:
        raise DomainError("entanglement gate duration must be > 0 ns")
    swap_ns = gate_time_ns(min(coupling_nv_ns_mhz, coupling_nv_logic_mhz))
    cluster_species = ("NV-", "N_S0")
    b = _Builder("entangle", {"A": cluster_species, "B": cluster_species})
    b.both("optical-green", green_ns, "NV-", "init")
    b.both("optical-red", red_recharge_ns, "NS", "init")
    gate_prep_ns = gate_time_ns(coupling_nv_ns_mhz)
    for _ in range(nuclear_prep_gates):
        b.add("microwave", gate_prep_ns, "NS@A", "nuclear-prep", concurrent=True)
        b.add("microwave", gate_prep_ns, "NS@B", "nuclear-prep")
    b.checkpoint("nuclear_prep_done")
    for _ in range(2):
        b.add("microwave", microwave_ns, "NV-@A", "init", concurrent=True)
        b.add("microwave", microwave_ns, "NV-@B", "init")
    b.checkpoint("init_done")
    b.add("microwave", ent_gate_ns, "NS@A", "gate")
    b.checkpoint("entanglement_gate_done")
    b.add("optical-red", ionize_ns, "NS@A", "ionize")
    b.checkpoint("injection_done")
    if transport_ns > 0:
        b.wait(transport_ns)
    b.checkpoint("transport_done")
    if capture_ns > 0:
        b.wait(capture_ns)
    b.checkpoint("capture_done")
    b.add("microwave", swap_ns, "NS@B", "gate")
    b.checkpoint("last_electron_op")
    b.add("optical-green", green_ns, "NV-@B", "readout")
    b.budget("nuclear-window", NUCLEAR_WINDOW_NS, "nuclear_prep_done", "last_electron_op")
    b.budget("post-init", POST_INIT_WINDOW_NS, "init_done", "last_electron_op")
    b.budget("entanglement-gate", ENTANGLEMENT_GATE_NS, "init_done", "entanglement_gate_done")
    b.budget("transport+capture", TRANSPORT_CAPTURE_NS, "injection_done", "capture_done")
    b.budget("transport", TRANSPORT_ALLOCATION_NS, "injection_done", "transport_done")
    b.budget("capture", CAPTURE_ALLOCATION_NS, "transport_done", "capture_done")
    return b.build(transport_ns=transport_ns, capture_ns=capture_ns,
                   entanglement_gate_ns=ent_gate_ns, swap_ns=swap_ns,
                   coupling_nv_ns_mhz=coupling_nv_ns_mhz,
                   coupling_nv_logic_mhz=coupling_nv_logic_mhz)


@dataclass(frozen=True)
class FidelityInputs:
    """Physics inputs for the composite fidelity estimate.

    Defaults describe the donor-pathway protocol with the nuclear spin
    correctly prepared: unit injection fidelity, no hyperfine coupling during
    ionization, and the capture rate at the 50 um^-3 design density.
    """

    injection_fidelity: float = 1.0
    ionization_coupling_mhz: float = 0.0
    ionization_rate_per_ns: float = 1.0
    t2_transport_ns: float = 180.0
    capture_gamma_per_ns: float = capture_rate(50.0, 5.0)[0]
    nuclear_flip_rate_mhz: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.injection_fidelity <= 1.0:
            raise DomainError("injection fidelity must lie in [0, 1]")


@dataclass(frozen=True)
class BudgetRow:
    name: str
    limit_ns: float
    used_ns: float

    @property
    def passed(self) -> bool:
        return self.used_ns <= self.limit_ns


@dataclass(frozen=True)
class BudgetReport:
    """Validation outcome: budget rows, selectivity findings, fidelity."""

    timeline_name: str
    rows: tuple[BudgetRow, ...]
    selectivity_failures: tuple[str, ...]
    fidelity: float
    fidelity_factors: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "selectivity_failures", tuple(self.selectivity_failures))
        object.__setattr__(self, "fidelity_factors",
                           MappingProxyType(dict(self.fidelity_factors)))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and not self.selectivity_failures

    def to_text(self) -> str:
        lines = [f"timeline: {self.timeline_name}",
                 f"verdict: {'PASS' if self.passed else 'FAIL'}",
                 "budgets:"]
        for row in self.rows:
            mark = "pass" if row.passed else "FAIL"
            lines.append(f"  {row.name}: used {row.used_ns!r} ns of {row.limit_ns!r} ns [{mark}]")
        lines.append("selectivity:")
        if self.selectivity_failures:
            lines.extend(f"  FAIL {msg}" for msg in self.selectivity_failures)
        else:
            lines.append("  all optical pulses pass")
        lines.append(f"fidelity: {self.fidelity!r}")
        lines.append("fidelity factors:")
        for name in sorted(self.fidelity_factors):
            lines.append(f"  {name}: {self.fidelity_factors[name]!r}")
        return "\n".join(lines) + "\n"


def _check_structure(timeline: ProtocolTimeline) -> None:
    by_channel: dict[str, list[ScheduledPulse]] = {}
    for sp in timeline.pulses:
        by_channel.setdefault(sp.pulse.channel, []).append(sp)
    for channel, pulses in by_channel.items():
        pulses.sort(key=lambda s: s.start_ns)
        for a, b in zip(pulses, pulses[1:]):
            if b.start_ns < a.end_ns - 1e-12:
                raise TimelineError(
                    f"overlapping pulses on channel {channel}: "
                    f"[{a.start_ns}, {a.end_ns}) and [{b.start_ns}, {b.end_ns})")
    for sp in timeline.pulses:
        p = sp.pulse
        if p.is_optical:
            lo, hi = OPTICAL_BANDS[p.kind]
            if not lo <= p.photon_energy_ev <= hi:
                raise TimelineError(
                    f"pulse {p.kind} at {p.photon_energy_ev} eV outside its band [{lo}, {hi}] eV")
    for budget in timeline.budgets:
        if timeline.budget_window(budget) < 0:
            raise TimelineError(f"budget {budget.name!r} has negative window")


def _selectivity_failures(timeline: ProtocolTimeline) -> list[str]:
    """Per-pulse charge-state selectivity against the pulse's own cluster.

    Rules: a red pulse must leave the NV- completely untouched; a green pulse
    must not one-photon-ionize it; a blue pulse may ionize it only
    spin-conservingly and only when that is the pulse's stated purpose.
    Donor ionization by red/green pulses is part of the protocols (recharge
    and strip steps) and is not flagged.
    """
    failures = []
    for sp in timeline.pulses:
        p = sp.pulse
        if not p.is_optical:
            continue
        species = timeline.clusters.get(p.cluster, ())
        if not species:
            continue
        reports = selectivity_check(p.photon_energy_ev, species)
        nv = reports.get("NV-")
        if nv is None:
            continue
        where = f"{p.kind} at {sp.start_ns} ns on cluster {p.cluster or '-'}"
        if p.kind == "optical-red" and not nv.untouched:
            failures.append(f"{where}: red light must leave NV- untouched")
        if p.kind == "optical-green" and nv.ionizes:
            failures.append(f"{where}: green light must not one-photon-ionize NV-")
        if nv.ionizes:
            intended = p.label == "ionize" and p.species.startswith("NV")
            if not intended:
                failures.append(f"{where}: unintended NV- ionization")
            elif not nv.spin_conserving:
                failures.append(f"{where}: NV- ionization outside the spin-conserving window")
    return failures


def fidelity_breakdown(timeline: ProtocolTimeline,
                       physics: FidelityInputs = FidelityInputs()) -> dict[str, float]:
    """Independent multiplicative fidelity factors for a timeline.

    Factors are reported separately (injection, ionization coherence,
    transport relaxation, capture probability, nuclear window survival) so
    they can be recombined under different noise assumptions; the composite
    estimate is simply their product.
    """
    factors = {"injection": physics.injection_fidelity}
    est = ionization_dephasing(physics.ionization_coupling_mhz, physics.ionization_rate_per_ns)
    factors["ionization_coherence"] = est.coherence_factor
    transport_ns = float(timeline.meta.get("transport_ns", 0.0))
    factors["transport"] = transport_relaxation_estimate(
        transport_ns, physics.t2_transport_ns).coherence_factor
    if "capture_ns" in timeline.meta:
        capture_ns = float(timeline.meta["capture_ns"])
        factors["capture"] = -math.expm1(-physics.capture_gamma_per_ns * capture_ns)
    window = next((b for b in timeline.budgets if b.name == "nuclear-window"), None)
    if window is not None:
        used = timeline.budget_window(window)
        factors["nuclear_window"] = nuclear_flip_estimate(
            physics.nuclear_flip_rate_mhz, used).coherence_factor
    return factors


def validate(timeline: ProtocolTimeline,
             physics: FidelityInputs = FidelityInputs()) -> BudgetReport:
    """Check structure, budgets, and optical selectivity; attach fidelity.

    Structural problems (overlapping same-channel pulses, out-of-band photon
    energies, inconsistent checkpoints) raise TimelineError; budget overruns
    and selectivity violations are reported as failures in the returned
    BudgetReport, whose verdict is the AND of all individual passes.
    """
    _check_structure(timeline)
    rows = [BudgetRow(b.name, b.limit_ns, timeline.budget_window(b))
            for b in timeline.budgets]
    failures = _selectivity_failures(timeline)
    factors = fidelity_breakdown(timeline, physics)
    fidelity = math.prod(factors.values())
    return BudgetReport(timeline.name, tuple(rows), tuple(failures), fidelity, factors)


def end_to_end_fidelity(timeline: ProtocolTimeline,
                        physics: FidelityInputs = FidelityInputs()
                        ) -> tuple[float, dict[str, float]]:
    """Composite fidelity of a validated timeline with its factor breakdown.

    The timeline is validated first; structurally malformed timelines raise.
    """
    report = validate(timeline, physics)
    return report.fidelity, dict(report.fidelity_factors)
