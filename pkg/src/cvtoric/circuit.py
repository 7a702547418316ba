"""Circuit text format, interpreter and run reports.

One instruction per line, ``#`` starts a comment::

    ENCODE q0 VERTEX 1.5
    ENCODE q1 VERTEX 2.0
    SUM q0 q1
    DECODE q1

Opcodes: ``ENCODE reg VERTEX|FACE value``, ``DISPLACE reg s``,
``SUM ctrl tgt``, ``CZ rege regm`` (alias ``BRAID``), ``SQUEEZE reg eta``,
``FOURIER reg [outcome]``, ``CUBIC reg gamma``, ``MEASURE reg X|P`` and
``DECODE reg``.  Registers must be encoded before use; the parser reports
file, line and column for every diagnostic.  ``CUBIC`` is symbolic-only
and rejected whenever a numeric state is active.

Registers are placed deterministically in encounter order: the k-th
register occupies the site pair ``((2k, 0), (2k, 1))`` of its kind, so a
circuit with ``n`` registers needs a lattice of width at least ``2n``.

Reports are plain data: per-step violation tables, braid phases, Fourier
corrections and decoded values, plus the gate-classification summary
(the residual generator degrees left in the symbolic trace).  A fixed
configuration and seed reproduce a report byte for byte.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from . import gates, whalgebra
from .anyons import AnyonError, AnyonSim, table_to_csv
from .lattice import LatticeSpec, build_lattice

__all__ = [
    "CircuitError",
    "Instruction",
    "Circuit",
    "parse_circuit",
    "run_circuit",
    "RunReport",
]


class CircuitError(Exception):
    """Parse or execution diagnostic carrying file, line and column."""

    def __init__(self, message: str, filename: str = "<circuit>",
                 line: int = 0, col: int = 0, instruction: str = ""):
        self.message = message
        self.filename = filename
        self.line = line
        self.col = col
        self.instruction = instruction
        where = f"{filename}:{line}:{col}"
        what = f" in {instruction!r}" if instruction else ""
        super().__init__(f"{where}: {message}{what}")


@dataclass(frozen=True)
class Instruction:
    op: str
    args: tuple
    line: int
    col: int
    text: str


@dataclass(frozen=True)
class Circuit:
    instructions: tuple
    filename: str = "<circuit>"

    def register_names(self) -> list[str]:
        names: list[str] = []
        for ins in self.instructions:
            if ins.op == "ENCODE" and ins.args[0] not in names:
                names.append(ins.args[0])
        return names


_ARITY = {
    "ENCODE": 3, "DISPLACE": 2, "SUM": 2, "CZ": 2, "BRAID": 2,
    "SQUEEZE": 2, "FOURIER": (1, 2), "CUBIC": 2, "MEASURE": 2, "DECODE": 1,
}


def _column(raw: str, token: str) -> int:
    return raw.index(token) + 1


def parse_circuit(text: str, filename: str = "<circuit>") -> Circuit:
    """Parse circuit text; raises :class:`CircuitError` with position
    diagnostics for unknown opcodes, malformed arguments or use of an
    unencoded register."""
    instructions: list[Instruction] = []
    defined: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0].rstrip()
        if not code.strip():
            continue
        tokens = code.split()
        op = tokens[0].upper()
        col = _column(raw, tokens[0])
        if op not in _ARITY:
            raise CircuitError(f"unknown opcode {tokens[0]!r}", filename, lineno, col)
        arity = _ARITY[op]
        arities = arity if isinstance(arity, tuple) else (arity,)
        if len(tokens) - 1 not in arities:
            raise CircuitError(
                f"{op} expects {' or '.join(str(a) for a in arities)} argument(s), "
                f"got {len(tokens) - 1}", filename, lineno, col)
        args: list = []
        if op == "ENCODE":
            reg, kind, value = tokens[1:4]
            kind = kind.lower()
            if kind not in ("vertex", "face"):
                raise CircuitError(f"unknown register kind {tokens[2]!r}",
                                   filename, lineno, _column(raw, tokens[2]))
            args = [reg, kind, _number(raw, filename, lineno, tokens[3])]
            defined.add(reg)
        elif op in ("DISPLACE", "SQUEEZE", "CUBIC"):
            reg = tokens[1]
            _require_defined(reg, defined, filename, lineno, _column(raw, reg))
            args = [reg, _number(raw, filename, lineno, tokens[2])]
        elif op in ("SUM", "CZ", "BRAID"):
            for reg in tokens[1:3]:
                _require_defined(reg, defined, filename, lineno, _column(raw, reg))
            args = tokens[1:3]
        elif op == "FOURIER":
            reg = tokens[1]
            _require_defined(reg, defined, filename, lineno, _column(raw, reg))
            args = [reg]
            if len(tokens) == 3:
                args.append(_number(raw, filename, lineno, tokens[2]))
        elif op == "MEASURE":
            reg, basis = tokens[1:3]
            _require_defined(reg, defined, filename, lineno, _column(raw, reg))
            basis = basis.upper()
            if basis not in ("X", "P"):
                raise CircuitError(f"measurement basis must be X or P, got {tokens[2]!r}",
                                   filename, lineno, _column(raw, tokens[2]))
            args = [reg, basis]
        elif op == "DECODE":
            reg = tokens[1]
            _require_defined(reg, defined, filename, lineno, _column(raw, reg))
            args = [reg]
        instructions.append(Instruction(op, tuple(args), lineno, col, code.strip()))
    return Circuit(tuple(instructions), filename)


def _require_defined(reg: str, defined: set, filename: str, line: int, col: int) -> None:
    if reg not in defined:
        raise CircuitError(f"register {reg!r} used before ENCODE", filename, line, col)


def _number(raw: str, filename: str, line: int, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise CircuitError(f"expected a number, got {token!r}", filename, line,
                           _column(raw, token)) from None


# -- execution --------------------------------------------------------------------


@dataclass
class StepReport:
    index: int
    text: str
    table: dict = field(default_factory=dict)
    phase: complex | None = None
    correction: float | None = None
    decoded: complex | None = None
    decoded_numeric: complex | None = None
    note: str = ""


@dataclass
class RunReport:
    engine: str
    seed: int
    steps: list
    final_values: dict
    classification: dict
    lattice: str

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"lattice {self.lattice}\n")
        out.write(f"engine {self.engine}\nseed {self.seed}\n\n")
        for step in self.steps:
            out.write(f"step {step.index}: {step.text}\n")
            if step.phase is not None:
                out.write(f"  phase {step.phase.real!r} {step.phase.imag!r}\n")
            if step.correction is not None:
                out.write(f"  correction X({step.correction!r})\n")
            if step.decoded is not None:
                out.write(f"  decoded {_c(step.decoded)}\n")
            if step.decoded_numeric is not None:
                out.write(f"  decoded-numeric {_c(step.decoded_numeric)}\n")
            if step.note:
                out.write(f"  note {step.note}\n")
            for site in sorted(step.table, key=repr):
                out.write(f"  violation {site[0]}{site[1]} {_c(step.table[site])}\n")
        out.write("\nfinal values\n")
        for name in sorted(self.final_values):
            out.write(f"  {name} = {_c(self.final_values[name])}\n")
        out.write("\nclassification\n")
        for key in sorted(self.classification):
            out.write(f"  {key} {self.classification[key]}\n")
        return out.getvalue()

    def registers_csv(self) -> str:
        lines = ["register,re,im"]
        for name in sorted(self.final_values):
            v = self.final_values[name]
            lines.append(f"{name},{v.real!r},{v.imag!r}")
        return "\n".join(lines) + "\n"

    def final_table_csv(self) -> str:
        return table_to_csv(self.steps[-1].table if self.steps else {})


def _c(z: complex) -> str:
    return f"{z.real!r}{z.imag:+}j"


def run_circuit(circuit: Circuit, *, spec: LatticeSpec | None = None,
                engine: str = "both", squeezing: float = 3.0,
                seed: int = 0) -> RunReport:
    """Execute a parsed circuit on a fresh code state.

    Raises :class:`CircuitError` (carrying the offending instruction's
    position) for register misuse, CUBIC with an active numeric engine,
    or MEASURE/FOURIER without one.
    """
    names = circuit.register_names()
    if spec is None:
        spec = build_lattice(max(4, 2 * max(1, len(names))), 4)
    if 2 * len(names) > spec.width:
        raise CircuitError(
            f"{len(names)} registers need lattice width >= {2 * len(names)}, "
            f"have {spec.width}", circuit.filename)
    sim = AnyonSim.ground(spec, squeezing, engine=engine, seed=seed)
    registers: dict[str, gates.LogicalRegister] = {}
    steps: list[StepReport] = []
    table_engine = "symbolic" if engine != "numeric" else "numeric"

    for idx, ins in enumerate(circuit.instructions):
        step = StepReport(index=idx, text=ins.text)
        try:
            _execute(ins, sim, registers, names, step, engine)
        except (AnyonError, ValueError) as exc:
            raise CircuitError(str(exc), circuit.filename, ins.line, ins.col,
                               ins.text) from exc
        step.table = sim.detect(table_engine)
        steps.append(step)

    final = {name: reg.value for name, reg in registers.items()}
    degrees = sorted({_degree(g) for g in sim.trace_gates})
    classification = {
        "wh_only": not sim.trace_gates,
        "generator_degrees": degrees,
        "max_generator_degree": max(degrees, default=0),
    }
    return RunReport(engine=engine, seed=seed, steps=steps, final_values=final,
                     classification=classification,
                     lattice=f"{spec.width}x{spec.height} {spec.boundary.value}")


def _degree(gate: tuple) -> int:
    return 3 if gate[0] == "CUBIC" else 2


def _execute(ins: Instruction, sim: AnyonSim, registers: dict,
             names: list, step: StepReport, engine: str) -> None:
    op = ins.op
    if op == "ENCODE":
        name, kind, value = ins.args
        slot = names.index(name)
        sites = ((2 * slot, 0), (2 * slot, 1))
        registers[name] = gates.encode(sim, value, kind, sites, name)
    elif op == "DISPLACE":
        name, amount = ins.args
        gates.gate_displace(sim, registers[name], amount)
    elif op == "SUM":
        ctrl, tgt = ins.args
        gates.gate_sum(sim, registers[ctrl], registers[tgt])
    elif op in ("CZ", "BRAID"):
        a, b = ins.args
        result = gates.gate_cz(sim, registers[a], registers[b])
        step.phase = result.phase
        if result.damping:
            step.note = f"damping {result.damping!r}"
    elif op == "SQUEEZE":
        name, eta = ins.args
        reg = registers[name]
        if reg.anchor is None:
            raise AnyonError(f"register {name} has no anchor mode")
        gates.gate_squeeze(sim, reg.anchor.edge, eta)
    elif op == "FOURIER":
        name = ins.args[0]
        outcome = ins.args[1] if len(ins.args) > 1 else None
        record = gates.gate_fourier(sim, registers[name], outcome=outcome)
        step.correction = record.outcome
    elif op == "CUBIC":
        name, gamma = ins.args
        if sim.state is not None:
            raise AnyonError("the cubic gate is symbolic-only; run with the "
                             "symbolic engine")
        reg = registers[name]
        mode = reg.anchor.edge if reg.anchor else 0
        sim.trace_gates.append(("CUBIC", mode, float(gamma)))
        sim.cubic_modes.add(mode)
    elif op == "MEASURE":
        name, basis = ins.args
        if sim.state is None:
            raise AnyonError("MEASURE needs the numeric engine")
        reg = registers[name]
        if reg.anchor is None:
            raise AnyonError(f"register {name} has no anchor mode")
        basis_name = "position" if basis == "X" else "momentum"
        sim.state, record = gaussian_measure(sim, reg.anchor.edge, basis_name)
        step.correction = record.outcome
    elif op == "DECODE":
        name = ins.args[0]
        reg = registers[name]
        step.decoded = reg.value
        if sim.state is not None and reg.anchor is not None and reg.anchor.alive:
            table = sim.detect("numeric")
            step.decoded_numeric = table.get(reg.anchor.site, 0j)
    else:  # pragma: no cover - parser guarantees coverage
        raise AnyonError(f"unhandled opcode {op}")


def gaussian_measure(sim: AnyonSim, mode: int, basis: str):
    from . import gaussian
    return gaussian.measure_homodyne(sim.state, mode, basis, rng=sim.rng)
