"""Computational layer: logical registers on excitation pairs and the
gate protocols built from fusion, braiding, offline squeezing and
measurement.

A register encodes a value ``r`` in a pair of like-type excitations with
charges ``(r, -r)``; the anchor record carries the value.  Topological
gates never touch second moments:

* displacement - create an auxiliary pair on the register's edge whose
  members sit on the register sites, and fuse each into its counterpart;
* controlled displacement (two registers of one type) - move the control
  anchor onto the target anchor and fuse, flipping the control's sign;
* controlled phase (one vertex-type and one face-type register) - braid
  an anchor of one around the other's anchor, picking up a state
  dependent phase while leaving both values unchanged.

Squeezing and the measurement-assisted Fourier rotation are
non-topological: they act on modes through the Gaussian engine and leave
a quadratic generator in the symbolic trace, which is what the gate
classification report inspects.  The cubic gate is symbolic only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gaussian, whalgebra
from .anyons import AnyonError, AnyonRecord, AnyonSim, BraidResult, _edge_alpha
from .gaussian import MeasurementRecord
from .whalgebra import GeneratorPoly, WHWord

__all__ = [
    "LogicalRegister",
    "encode",
    "gate_displace",
    "gate_sum",
    "gate_cz",
    "gate_squeeze",
    "gate_fourier",
    "fourier_via_measurement",
    "gate_cubic_symbolic",
    "squeezed_excitation_factor",
]


@dataclass
class LogicalRegister:
    """A value held by an excitation pair with charges ``(value, -value)``.

    After a controlled displacement has consumed the anchor of a
    register that had no partner left, the value survives only as ledger
    bookkeeping (``virtual_value``); it can no longer be read back from
    nullifier expectations.
    """

    name: str
    kind: str                       # "vertex" | "face"
    anchor: AnyonRecord | None
    partner: AnyonRecord | None
    spectators: list = field(default_factory=list)
    virtual_value: complex = 0j

    @property
    def value(self) -> complex:
        if self.anchor is not None and self.anchor.alive:
            return self.anchor.label
        return self.virtual_value

    @property
    def anchor_site(self) -> tuple:
        rec = self.anchor or self.partner
        if rec is None:
            raise AnyonError(f"register {self.name} has no live records")
        return rec.site

    def live_pair(self) -> bool:
        return (self.anchor is not None and self.anchor.alive
                and self.partner is not None and self.partner.alive)


_KIND_TO_ANYON = {"vertex": "e", "face": "m"}


def _shared_edge(sim: AnyonSim, kind: str, site_a: tuple, site_b: tuple) -> int:
    spec = sim.spec
    if kind == "vertex":
        edges_a = set(spec.star_edges(site_a))
        edges_b = set(spec.star_edges(site_b))
    else:
        edges_a = set(spec.face_edges(site_a))
        edges_b = set(spec.face_edges(site_b))
    shared = sorted(edges_a & edges_b)
    if not shared:
        raise AnyonError(f"sites {site_a} and {site_b} share no edge")
    return shared[0]


def _pair_amount(sim: AnyonSim, kind: str, edge: int, site: tuple, value: complex) -> complex:
    """Creation amount that puts charge ``value`` on ``site``."""
    chi = sim.chi((("v" if kind == "vertex" else "f"), site))
    amount = value * chi
    if kind == "face":
        amount *= _edge_alpha(sim.spec, edge)
    return amount


def encode(sim: AnyonSim, value: complex, kind: str,
           sites: tuple[tuple, tuple], name: str = "q") -> LogicalRegister:
    """Create a register of charge pair ``(value, -value)`` on two sites
    adjacent across a common edge."""
    if kind not in _KIND_TO_ANYON:
        raise AnyonError(f"unknown register kind {kind!r}")
    site_a, site_b = sites
    tag = "v" if kind == "vertex" else "f"
    occupied = {r.site for r in sim.live_records()}
    if (tag, site_a) in occupied or (tag, site_b) in occupied:
        raise AnyonError(f"sites {sites} already host excitations")
    edge = _shared_edge(sim, kind, site_a, site_b)
    amount = _pair_amount(sim, kind, edge, site_a, value)
    rec1, rec2 = sim.create_pair(_KIND_TO_ANYON[kind], edge, amount)
    if value == 0:
        # vacuum register: keep the records for site bookkeeping
        anchor = rec1 if rec1.site == (tag, site_a) else rec2
        partner = rec2 if anchor is rec1 else rec1
        anchor.site = (tag, site_a)
        partner.site = (tag, site_b)
        return LogicalRegister(name, kind, anchor, partner)
    anchor = rec1 if rec1.site == (tag, site_a) else rec2
    partner = rec2 if anchor is rec1 else rec1
    assert anchor.label == value
    return LogicalRegister(name, kind, anchor, partner)


def gate_displace(sim: AnyonSim, reg: LogicalRegister, s: complex) -> LogicalRegister:
    """Shift the register value by ``s`` through pair creation and fusion."""
    if s == 0:
        return reg
    tag = "v" if reg.kind == "vertex" else "f"
    if reg.live_pair():
        edge = _shared_edge(sim, reg.kind, reg.anchor.site[1], reg.partner.site[1])
        amount = _pair_amount(sim, reg.kind, edge, reg.anchor.site[1], s)
        aux1, aux2 = sim.create_pair(_KIND_TO_ANYON[reg.kind], edge, amount)
        at_anchor = aux1 if aux1.site == reg.anchor.site else aux2
        at_partner = aux2 if at_anchor is aux1 else aux1
        reg.anchor = _fuse_into(sim, reg.anchor, at_anchor)
        reg.partner = _fuse_into(sim, reg.partner, at_partner)
    elif reg.anchor is not None and reg.anchor.alive:
        site = reg.anchor.site[1]
        spec = sim.spec
        edge = (spec.star_edges(site) if reg.kind == "vertex"
                else spec.face_edges(site))[0]
        amount = _pair_amount(sim, reg.kind, edge, site, s)
        aux1, aux2 = sim.create_pair(_KIND_TO_ANYON[reg.kind], edge, amount)
        at_anchor = aux1 if aux1.site == reg.anchor.site else aux2
        other = aux2 if at_anchor is aux1 else aux1
        reg.anchor = _fuse_into(sim, reg.anchor, at_anchor)
        reg.spectators.append(other)
    else:
        raise AnyonError(f"register {reg.name} has no live anchor to displace")
    del tag
    return reg


def _fuse_into(sim: AnyonSim, target: AnyonRecord, incoming: AnyonRecord) -> AnyonRecord:
    """Fuse ``incoming`` into ``target``; a vacuum outcome keeps the record
    object (label zero) so the register stays addressable."""
    result = sim.fuse(target, incoming)
    if result.is_vacuum():
        result.alive = True
        if result not in sim.records:
            sim.records.append(result)
    return result


def gate_sum(sim: AnyonSim, control: LogicalRegister, target: LogicalRegister
             ) -> tuple[LogicalRegister, LogicalRegister]:
    """Controlled displacement: ``(s, t) -> (-s, s + t)``.

    The control anchor is walked onto the target anchor and fused; the
    control is afterwards read from its remaining partner, which flips
    its sign, and the target's partner is retired to spectator status
    (annihilated at the end of the computation).  No compensating
    displacement is applied for the control sign flip.
    """
    if control.kind != target.kind:
        raise AnyonError("controlled displacement needs registers of one type")
    if control.anchor is None or not control.anchor.alive:
        raise AnyonError(f"register {control.name} has no live anchor")
    if target.anchor is None or not target.anchor.alive:
        raise AnyonError(f"register {target.name} has no live anchor")
    moved_value = control.anchor.label
    target.anchor = _fuse_into(sim, target.anchor, control.anchor)
    if target.partner is not None and target.partner.alive:
        target.spectators.append(target.partner)
        target.partner = None
    if control.partner is not None and control.partner.alive:
        control.anchor = control.partner
        control.partner = None
    else:
        control.anchor = None
        control.virtual_value = -moved_value
    return control, target


def gate_cz(sim: AnyonSim, reg_e: LogicalRegister, reg_m: LogicalRegister) -> BraidResult:
    """Controlled phase by braiding: one vertex-type anchor is carried
    counterclockwise around one face-type anchor, producing the phase
    ``exp(-i * value_e * value_m)`` in the ideal limit.  Register values
    are unchanged.  Transport to and from the loop cancels exactly
    (inverse word), so anchors may sit anywhere on the lattice."""
    kinds = {reg_e.kind, reg_m.kind}
    if kinds != {"vertex", "face"}:
        raise AnyonError("controlled phase needs one vertex-type and one "
                         "face-type register (like types fuse instead)")
    if reg_e.kind != "vertex":
        reg_e, reg_m = reg_m, reg_e
    if not (reg_e.anchor and reg_e.anchor.alive and reg_m.anchor and reg_m.anchor.alive):
        raise AnyonError("both registers need live anchors to braid")
    spec = sim.spec
    face = reg_m.anchor.site[1]
    corner = face     # bottom-left corner vertex of the face
    home = reg_e.anchor.site[1]
    path = sim._staircase_path("e", home, corner)
    sim.move(reg_e.anchor, path)
    a, b = face
    loop = [
        spec.horizontal_edge(a, b),      # BL -> BR along the bottom
        spec.vertical_edge(a + 1, b),    # BR -> TR up the right side
        spec.horizontal_edge(a, b + 1),  # TR -> TL along the top
        spec.vertical_edge(a, b),        # TL -> BL down the left side
    ]
    result = sim.braid(reg_e.anchor, loop)
    sim.move(reg_e.anchor, list(reversed(path)))
    return result


def gate_squeeze(sim: AnyonSim, mode: int, eta: float) -> None:
    """Squeeze one ground-state mode: ``P(eta)`` through the Gaussian
    engine plus a quadratic generator in the symbolic trace.  Excitations
    created on the mode afterwards acquire the factor reported by
    :func:`squeezed_excitation_factor`."""
    if not math.isfinite(eta):
        raise ValueError("squeezing strength must be finite")
    if sim.state is not None:
        sim.state = gaussian.apply_gate(sim.state, ("P", mode, eta))
    sim.trace_gates.append(("P", mode, float(eta)))


def squeezed_excitation_factor(kind: str, amount: complex, eta: float, mode: int = 0
                               ) -> tuple[WHWord, complex]:
    """Effective excitation word on a squeezed ground-state mode.

    Commuting the creation displacement through the squeezer turns
    ``X(s)`` into ``exp(i eta s^2 / 2) Z(-eta s) X(s)`` while ``Z(t)``
    is untouched; derived by Heisenberg conjugation, not transcribed.
    Returns ``(residual_word, log_scalar)``.
    """
    word = (WHWord.x_op(mode, amount) if kind.upper() == "X"
            else WHWord.z_op(mode, amount))
    residual, _, log = whalgebra.commute_through_quadratic(word, ("P", mode, eta))
    return residual, log


def fourier_via_measurement(state, mode, ancilla_squeezing: float, *,
                            outcome: float | None = None,
                            rng: np.random.Generator | None = None):
    """Measurement-assisted Fourier rotation of one mode.

    Couples the mode to a fresh momentum-squeezed ancilla with a
    controlled-phase gate and measures the mode's momentum with outcome
    ``m``; the ancilla is then left carrying ``X(m) F |psi>``.  Returns
    ``(state, correction, ancilla_mode)`` with the correction record
    holding ``m`` - it is never applied silently.  The residual error of
    the rotation decays as ``e^{-2 r}`` in the ancilla squeezing.
    """
    numeric_modes = [m for m in state.modes if isinstance(m, int)]
    ancilla = (max(numeric_modes) + 1) if numeric_modes else 0
    state = gaussian.add_mode(state, ancilla, ancilla_squeezing)
    state = gaussian.apply_gate(state, ("CZ", mode, ancilla))
    state, record = gaussian.measure_homodyne(state, mode, "momentum",
                                              outcome=outcome, rng=rng)
    return state, record, ancilla


def gate_fourier(sim: AnyonSim, reg: LogicalRegister, *,
                 ancilla_squeezing: float | None = None,
                 outcome: float | None = None) -> MeasurementRecord:
    """Run the measurement-assisted Fourier protocol on the register's
    creation edge mode.  Numeric engine only; the register's anchor edge
    mode is consumed (measured) and replaced by the ancilla, so the
    register afterwards lives on an off-lattice mode and is no longer
    anyonic.  The correction record is returned for downstream undoing.
    """
    if sim.state is None:
        raise AnyonError("the Fourier protocol needs the numeric engine")
    if reg.anchor is None or not reg.anchor.alive:
        raise AnyonError(f"register {reg.name} has no live anchor")
    r_anc = ancilla_squeezing
    if r_anc is None:
        finite = [r for r in sim.squeezing.values() if not math.isinf(r)]
        r_anc = finite[0] if finite else 3.0
    mode = reg.anchor.edge
    sim.state, record, ancilla = fourier_via_measurement(
        sim.state, mode, r_anc, outcome=outcome,
        rng=None if outcome is not None else sim.rng)
    sim.trace_gates.append(("CZ", mode, ancilla))
    sim.trace_gates.append(("F", ancilla))
    reg.anchor.edge = ancilla
    return record


def gate_cubic_symbolic(s: complex, t: complex, gamma: float, mode: int = 0
                        ) -> tuple[WHWord, GeneratorPoly, complex]:
    """Normal-ordered decomposition of a displacement word commuted
    through the cubic gate on one mode; symbolic engine only (the
    numeric engine cannot represent the resulting non-Gaussian state).

    For the word ``X(s)Z(t)`` the residue generator is ``-3 gamma s x^2``
    with the linear and constant parts folded into the word and scalar.
    """
    word = whalgebra.normal_order([("X", mode, s), ("Z", mode, t)])
    return whalgebra.commute_through_cubic(word, gamma, mode)
