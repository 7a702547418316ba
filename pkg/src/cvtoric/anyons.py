"""Anyon lifecycle on a prepared code state.

Vertex-type excitations are created by momentum translations ``Z(s)`` on
an edge mode, face-type excitations by position translations ``X(t)``.
Raw generator violations are symmetric between the two sites of a pair
(stars are unsigned momentum sums), so the ledger translates them into
charge labels through the site-parity frame ``chi(site) = (-1)**(x+y)``:
``label = chi * raw``.  In this frame pair labels are ``(l, -l)``, labels
ride along unchanged under transport, fusion adds them, and a
counterclockwise braid of one anyon around opposite charges picks up
``exp(-i * moving * sum(enclosed))`` independent of positions.

Transport is forced by the physics: each step applies the unique
displacement cancelling the raw violation at the source site, which
flips the raw sign while the parity frame flips with it.  A closed
transport loop therefore assembles exactly into a product of stabilizer
words over the enclosed sites, which the braid routine verifies before
reducing it against the ground state:

* star loops act as the identity for every squeezing level;
* a plaquette loop of strength ``eta`` on a finitely squeezed face
  reduces to the damping ``exp(-eta**2 * L_f)`` with
  ``L_f = sum_j (-1)**(j+1) e^{-2 r_j}`` over the ordered boundary, times
  the imaginary position translations
  ``X_j(-i eta (-1)**(j+1) e^{-2 r_j})``, which are absorbed into the
  enclosed record's complex label rather than left on the state.

The numeric engine mirrors every real displacement and cross-checks
first moments; scalars and damping are the symbolic engine's output.
A simulation owns its state exclusively; independent simulations are
safe to run in parallel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import gaussian, whalgebra
from .lattice import (Boundary, LatticeSpec, StabilizerGen, cluster_graph,
                      code_generators, HORIZONTAL)
from .whalgebra import WHWord

__all__ = [
    "AnyonRecord",
    "BraidResult",
    "AnyonSim",
    "topological_factor",
    "topological_factor_log",
    "table_to_csv",
]


class AnyonError(ValueError):
    pass


@dataclass
class AnyonRecord:
    """A live excitation: type, site, complex charge label, provenance."""

    kind: str                   # "e" (vertex) | "m" (face)
    site: tuple                 # ("v", (x, y)) or ("f", (a, b))
    label: complex
    edge: int                   # creation edge
    orientation: int            # 1 vertical, 2 horizontal
    rid: int = -1
    alive: bool = True

    def is_vacuum(self) -> bool:
        return self.label == 0


@dataclass(frozen=True)
class BraidResult:
    """Scalar and residue bookkeeping of one closed transport loop.

    ``phase`` is the unit-modulus part, ``damping`` the nonnegative decay
    exponent (zero in the ideal-squeezing limit), so the full scalar is
    ``phase * exp(-damping)``.  ``residual_displacements`` lists the
    imaginary position translations produced by finitely squeezed
    plaquette reductions, already absorbed into the enclosed labels.
    """

    phase: complex
    damping: float
    residual_displacements: tuple
    moved: AnyonRecord
    enclosed: tuple
    log_scalar: complex

    @property
    def scalar(self) -> complex:
        return cmath.exp(self.log_scalar)


def _edge_alpha(spec: LatticeSpec, edge: int) -> int:
    """Plaquette boundary sign of an edge: +1 horizontal, -1 vertical,
    identical for both adjacent faces under the fixed face ordering."""
    return 1 if spec.orientation(edge) == HORIZONTAL else -1


def topological_factor_log(s: complex, t: float, squeezing4) -> complex:
    """Log of the closed-form braid scalar ``exp[i (s + i t L) t]`` with
    ``L = sum_j (-1)**(j+1) e^{-2 r_j}`` over the four boundary edges."""
    L = 0.0
    for j, r in enumerate(squeezing4):
        r = float(r)
        term = 0.0 if math.isinf(r) else math.exp(-2.0 * r)
        L += term if j % 2 == 0 else -term
    return 1j * (complex(s) + 1j * t * L) * t


def topological_factor(s: complex, t: float, squeezing4) -> complex:
    """Closed-form topological braiding scalar for a single plaquette loop."""
    return cmath.exp(topological_factor_log(s, t, squeezing4))


class AnyonSim:
    """A code state plus its excitation ledger, driven by both engines.

    ``engine`` is ``"symbolic"``, ``"numeric"`` or ``"both"``.  The
    symbolic side keeps the full applied displacement word (never
    reduced, so first-moment predictions include flat-direction shifts
    from closed loops); the numeric side holds the finitely squeezed
    Gaussian state built from the cluster by the measurement pattern.
    """

    def __init__(self, spec: LatticeSpec, squeezing, generators,
                 engine: str, state, rng):
        self.spec = spec
        self.squeezing = squeezing
        self.generators = list(generators)
        self.engine = engine
        self.state = state
        self.word = WHWord.identity()
        self.records: list[AnyonRecord] = []
        self.rng = rng
        self.trace_gates: list[tuple] = []     # residual quadratic/cubic generators
        self.cubic_modes: set[int] = set()
        self._next_rid = 0

    # -- construction ---------------------------------------------------------

    @classmethod
    def ground(cls, spec: LatticeSpec, squeezing=3.0, *, engine: str = "both",
               ancilla_squeezing: float | None = None, seed: int = 0,
               sample_outcomes: bool = False) -> "AnyonSim":
        """Prepare the code ground state.

        ``squeezing`` is a per-edge map or scalar; ``math.inf`` entries
        are allowed only for purely symbolic runs.  The cluster ancillas
        use ``ancilla_squeezing`` (default: the scalar edge value or 3).
        Measurement outcomes are forced to zero by default, which pins
        every nullifier expectation to zero exactly; set
        ``sample_outcomes`` for a randomly conditioned state.
        """
        if engine not in ("symbolic", "numeric", "both"):
            raise ValueError(f"unknown engine {engine!r}")
        edge_map = cls._edge_squeezing_map(spec, squeezing)
        generators = code_generators(spec, edge_map)
        rng = np.random.default_rng(seed)
        state = None
        if engine in ("numeric", "both"):
            if any(math.isinf(r) for r in edge_map.values()):
                raise ValueError("numeric engine requires finite squeezing")
            default_r = (ancilla_squeezing if ancilla_squeezing is not None
                         else (float(squeezing) if not isinstance(squeezing, dict) else 3.0))
            A, pattern = cluster_graph(spec)
            cluster_map = {m: default_r for m in range(spec.n_cluster_modes)}
            cluster_map.update(edge_map)
            state = gaussian.graph_from_cluster(A, cluster_map,
                                                modes=range(spec.n_cluster_modes))
            for mode, basis in pattern.measurements:
                if sample_outcomes:
                    state, _ = gaussian.measure_homodyne(state, mode, basis, rng=rng)
                else:
                    state, _ = gaussian.measure_homodyne(state, mode, basis, outcome=0.0)
            if pattern.fourier_survivors:
                state = gaussian.fourier_all(state)
        return cls(spec, edge_map, generators, engine, state, rng)

    @staticmethod
    def _edge_squeezing_map(spec: LatticeSpec, squeezing) -> dict[int, float]:
        if isinstance(squeezing, dict):
            missing = set(spec.edge_modes()) - set(squeezing)
            if missing:
                raise ValueError(f"squeezing map misses edges {sorted(missing)}")
            return {e: float(squeezing[e]) for e in spec.edge_modes()}
        return {e: float(squeezing) for e in spec.edge_modes()}

    # -- bookkeeping ------------------------------------------------------------

    def chi(self, site: tuple) -> int:
        return self.spec.checkerboard(site)

    def raw(self, record: AnyonRecord) -> complex:
        """Raw generator violation carried by the record at its site."""
        return self.chi(record.site) * record.label

    def damp(self, edge: int) -> float:
        r = self.squeezing[edge]
        return 0.0 if math.isinf(r) else math.exp(-2.0 * r)

    def live_records(self) -> list[AnyonRecord]:
        return [r for r in self.records if r.alive and not r.is_vacuum()]

    def _new_record(self, **kwargs) -> AnyonRecord:
        rec = AnyonRecord(rid=self._next_rid, **kwargs)
        self._next_rid += 1
        return rec

    def _apply_displacement(self, edge: int, kind: str, amount: complex) -> None:
        amount = complex(amount)
        if kind == "Z":
            self.word = WHWord.z_op(edge, amount) * self.word
        else:
            self.word = WHWord.x_op(edge, amount) * self.word
        if self.state is not None and amount.real != 0.0:
            self.state = gaussian.displace(self.state, edge, kind, amount.real)

    # -- creation ------------------------------------------------------------------

    def create_pair(self, kind: str, edge: int, amount: complex
                    ) -> tuple[AnyonRecord, AnyonRecord]:
        """Create an excitation pair by displacing one edge mode.

        ``kind`` is ``"e"`` (momentum translation, pair on the endpoint
        vertices) or ``"m"`` (position translation, pair on the adjacent
        faces).  Records are returned with the parity-positive site
        first; labels are ``(l, -l)`` with ``l = amount`` for e-pairs and
        ``l = (-1)**d * amount`` for m-pairs on a d-oriented edge.
        """
        if edge not in self.spec.edge_modes():
            raise AnyonError(f"no edge mode {edge}")
        if edge in self.cubic_modes:
            raise AnyonError(f"edge {edge} hosts an unresolved cubic residue")
        amount = complex(amount)
        if self.state is not None and amount.imag != 0.0:
            raise AnyonError("numeric engine requires real creation amounts")
        d = self.spec.orientation(edge)
        if kind == "e":
            sites = [("v", v) for v in self.spec.edge_endpoints(edge)]
            raw = amount
            self._apply_displacement(edge, "Z", amount)
        elif kind == "m":
            sites = [("f", f) for f in self.spec.edge_faces(edge)]
            raw = _edge_alpha(self.spec, edge) * amount
            self._apply_displacement(edge, "X", amount)
        else:
            raise AnyonError(f"unknown anyon kind {kind!r}")
        sites.sort(key=lambda s: -self.chi(s))
        recs = tuple(
            self._new_record(kind=kind, site=site, label=self.chi(site) * raw,
                             edge=edge, orientation=d)
            for site in sites
        )
        if amount != 0:
            self.records.extend(recs)
        return recs

    # -- detection ------------------------------------------------------------------

    def detect(self, engine: str | None = None) -> dict:
        """Violation table ``site -> complex label-frame value``.

        Each generator is evaluated (symbolically against the applied
        word, numerically from the state's first moments) and translated
        by the site parity; only nonzero entries are returned.  On the
        freshly built ground state the table is empty.
        """
        engine = engine or ("symbolic" if self.engine != "numeric" else "numeric")
        table: dict[tuple, complex] = {}
        for gen in self.generators:
            site = ("v", gen.site) if gen.kind == "star" else ("f", gen.site)
            if engine == "symbolic":
                value = whalgebra.violation(self.word, gen)
            else:
                # a generator whose support was consumed by measurement is
                # no longer monitored
                if any(mode not in self.state.modes for mode in gen.coeffs):
                    continue
                value, _ = gaussian.nullifier_stats(self.state, gen)
            value = self.chi(site) * value
            if abs(value) > 1e-12:
                table[site] = value
        return table

    # -- transport -------------------------------------------------------------------

    def _step_geometry(self, site: tuple, edge: int) -> tuple[tuple, tuple[int, int]]:
        """Destination site and unwrapped step direction for one move."""
        kind, coord = site
        x, y = coord
        spec = self.spec
        if kind == "v":
            candidates = {
                spec.horizontal_edge(x, y): (1, 0),
                spec.horizontal_edge(x - 1, y): (-1, 0),
                spec.vertical_edge(x, y): (0, 1),
                spec.vertical_edge(x, y - 1): (0, -1),
            }
        else:
            candidates = {
                spec.vertical_edge(x + 1, y): (1, 0),
                spec.vertical_edge(x, y): (-1, 0),
                spec.horizontal_edge(x, y + 1): (0, 1),
                spec.horizontal_edge(x, y): (0, -1),
            }
        candidates.pop(None, None)
        if edge not in candidates:
            raise AnyonError(f"edge {edge} is not adjacent to site {site}")
        dx, dy = candidates[edge]
        if spec.boundary is Boundary.TOROIDAL:
            dest = ((x + dx) % spec.width, (y + dy) % spec.height)
        else:
            dest = (x + dx, y + dy)
        return (kind, dest), (dx, dy)

    def _transport_step(self, record: AnyonRecord, edge: int) -> tuple[tuple, complex]:
        """Apply the unique displacement moving the record across ``edge``."""
        dest, _ = self._step_geometry(record.site, edge)
        raw = self.raw(record)
        if record.kind == "e":
            tau = -raw
            self._apply_displacement(edge, "Z", tau)
        else:
            tau = -raw * _edge_alpha(self.spec, edge)
            self._apply_displacement(edge, "X", tau)
        record.site = dest
        return dest, tau

    def move(self, record: AnyonRecord, path: list[int]) -> AnyonRecord:
        """Walk a record along consecutive edges; the label is invariant."""
        if not record.alive:
            raise AnyonError("record is no longer live")
        for edge in path:
            self._transport_step(record, edge)
        return record

    def _staircase_path(self, kind: str, src: tuple, dst: tuple) -> list[int]:
        """Deterministic default path: x-steps first, then y-steps, taking
        the shorter wrap and the positive direction on ties."""
        spec = self.spec
        path: list[int] = []
        site = ("v" if kind == "e" else "f", src)

        def signed_delta(a: int, b: int, period: int) -> int:
            if spec.boundary is not Boundary.TOROIDAL:
                return b - a
            d = (b - a) % period
            return d if d <= period - d else d - period

        dx = signed_delta(src[0], dst[0], spec.width)
        dy = signed_delta(src[1], dst[1], spec.height)
        x, y = src
        for _ in range(abs(dx)):
            step = 1 if dx > 0 else -1
            if kind == "e":
                edge = spec.horizontal_edge(x if step > 0 else x - 1, y)
            else:
                edge = spec.vertical_edge(x + 1 if step > 0 else x, y)
            path.append(edge)
            x = (x + step) % spec.width if spec.boundary is Boundary.TOROIDAL else x + step
        for _ in range(abs(dy)):
            step = 1 if dy > 0 else -1
            if kind == "e":
                edge = spec.vertical_edge(x, y if step > 0 else y - 1)
            else:
                edge = spec.horizontal_edge(x, y + 1 if step > 0 else y)
            path.append(edge)
            y = (y + step) % spec.height if spec.boundary is Boundary.TOROIDAL else y + step
        del site
        return path

    # -- fusion ---------------------------------------------------------------------

    def fuse(self, rec_a: AnyonRecord, rec_b: AnyonRecord) -> AnyonRecord:
        """Move ``rec_b`` to ``rec_a`` and combine charges; labels add.

        Opposite charges annihilate into a vacuum record, which is
        dropped from the ledger.
        """
        if rec_a.kind != rec_b.kind:
            raise AnyonError("cannot fuse excitations of different types")
        if rec_a is rec_b:
            raise AnyonError("cannot fuse a record with itself")
        if rec_b.site != rec_a.site:
            path = self._staircase_path(rec_b.kind, rec_b.site[1], rec_a.site[1])
            self.move(rec_b, path)
        rec_a.label = rec_a.label + rec_b.label
        rec_b.alive = False
        rec_b.label = 0j
        if rec_b in self.records:
            self.records.remove(rec_b)
        if rec_a.label == 0:
            rec_a.alive = False
            if rec_a in self.records:
                self.records.remove(rec_a)
        return rec_a

    # -- braiding ---------------------------------------------------------------------

    def braid(self, record: AnyonRecord, loop: list[int]) -> BraidResult:
        """Transport a record around a closed contractible loop of edges.

        The accumulated loop word is commuted through all pre-existing
        excitations (the exact swap scalar), decomposed into stabilizer
        words over the enclosed sites, and reduced by the ground-state
        rules.  Counterclockwise loops give ``exp(-i l_moving l_enclosed)``
        per enclosed opposite charge in the ideal limit.
        """
        if not loop:
            raise AnyonError("braid loop is empty")
        word_before = self.word
        start = record.site
        polygon = [self._site_point(start, (0, 0))]
        offset = (0, 0)
        loop_word = WHWord.identity()
        for edge in loop:
            _, (dx, dy) = self._step_geometry(record.site, edge)
            if record.kind == "e":
                step_word = WHWord.z_op(edge, -self.raw(record))
            else:
                step_word = WHWord.x_op(edge, -self.raw(record) * _edge_alpha(self.spec, edge))
            self._transport_step(record, edge)
            loop_word = step_word * loop_word
            offset = (offset[0] + dx, offset[1] + dy)
            polygon.append(self._site_point(record.site, offset, base=start))
        if record.site != start or offset != (0, 0):
            raise AnyonError("braid path must be closed and contractible")
        swap = whalgebra.swap_log(loop_word, word_before)
        enclosed_sites = self._enclosed_sites(record.kind, polygon)
        rule_log, residues, strengths = self._reduce_loop(record.kind, loop_word,
                                                          enclosed_sites)
        total = whalgebra._canon_log(swap + rule_log)
        enclosed_records = tuple(r for r in self.live_records()
                                 if r is not record and r.site in enclosed_sites)
        self._absorb_residues(strengths)
        return BraidResult(
            phase=cmath.exp(1j * total.imag),
            damping=-total.real if total.real != 0.0 else 0.0,
            residual_displacements=residues,
            moved=record,
            enclosed=enclosed_records,
            log_scalar=total,
        )

    def _site_point(self, site: tuple, offset: tuple[int, int],
                    base: tuple | None = None) -> tuple[float, float]:
        """Unwrapped planar center of a site reached with accumulated offset."""
        kind, coord = base if base is not None else site
        x0, y0 = coord
        half = 0.5 if kind == "f" else 0.0
        return (x0 + half + offset[0], y0 + half + offset[1])

    def _enclosed_sites(self, moving_kind: str, polygon) -> dict:
        """Opposite-type sites with nonzero winding under the loop polygon."""
        xs = [p[0] for p in polygon]
        ys = [p[1] for p in polygon]
        opp = "v" if moving_kind == "m" else "f"   # m walks faces around vertices
        half = 0.5 if opp == "f" else 0.0
        enclosed: dict[tuple, int] = {}
        for ix in range(int(math.floor(min(xs))) - 1, int(math.ceil(max(xs))) + 1):
            for iy in range(int(math.floor(min(ys))) - 1, int(math.ceil(max(ys))) + 1):
                w = _winding_number(polygon, (ix + half, iy + half))
                if w != 0:
                    spec = self.spec
                    if spec.boundary is Boundary.TOROIDAL:
                        coord = (ix % spec.width, iy % spec.height)
                    else:
                        coord = (ix, iy)
                    site = (opp, coord)
                    if site in enclosed:
                        raise AnyonError("loop wraps the torus; braid needs a contractible loop")
                    enclosed[site] = w
        return enclosed

    def _reduce_loop(self, moving_kind: str, loop_word: WHWord,
                     enclosed: dict) -> tuple[complex, tuple, dict]:
        """Verify the stabilizer decomposition of a closed loop word and
        apply the ground-state reduction rules.

        Returns ``(log_scalar, residual_displacements, strengths)`` where
        ``strengths`` maps each enclosed site to its stabilizer parameter.
        """
        if not loop_word.factors and not enclosed:
            return 0j, (), {}
        if any(abs(w) != 1 for w in enclosed.values()):
            raise AnyonError("multiply wound loops are not supported")
        # strengths alternate with site parity: kappa fixed by any loop edge
        kappa = None
        for site in enclosed:
            for edge in (self.spec.star_edges(site[1]) if site[0] == "v"
                         else self.spec.face_edges(site[1])):
                t, s = loop_word.param(edge)
                value = s if moving_kind == "m" else t
                if value != 0:
                    kappa = self._kappa_from_edge(site, edge, value)
                    break
            if kappa is not None:
                break
        if kappa is None:
            if loop_word.factors:
                raise AnyonError("loop word does not reduce to enclosed stabilizers")
            return 0j, (), {}
        expected = WHWord.identity()
        strengths = {}
        for site in enclosed:
            strengths[site] = self.chi(site) * kappa
            expected = expected * self._stabilizer_word(site, strengths[site])
        if not _words_close(expected, loop_word, 1e-9 * max(1.0, abs(kappa))):
            raise AnyonError("loop word does not match its enclosed stabilizers")
        if moving_kind == "m":
            return 0j, (), strengths   # star stabilizers hold at any squeezing
        log = 0j
        residue = WHWord.identity()
        for site, eta in strengths.items():
            face = site[1]
            face_word = self._stabilizer_word(site, eta)
            log += whalgebra.swap_log(face_word, residue)
            L = 0.0
            step = WHWord.identity()
            for edge, sgn in zip(self.spec.face_edges(face), self.spec.face_signs()):
                damp = self.damp(edge)
                L += sgn * damp
                if damp != 0.0:
                    step = step * WHWord.x_op(edge, -1j * eta * sgn * damp)
            log += -eta * eta * L
            residue = residue * step
        residues = tuple((edge, word_s) for edge, (_, word_s) in
                         sorted(residue.factors.items()))
        return whalgebra._canon_log(log + residue.log_scalar), residues, strengths

    def _kappa_from_edge(self, site: tuple, edge: int, value: complex) -> complex:
        if site[0] == "v":
            return value / self.chi(site)
        sgn = self.spec.face_sign(site[1], edge)
        return value / (-sgn * self.chi(site))

    def _stabilizer_word(self, site: tuple, strength: complex) -> WHWord:
        """Displacement word of ``exp(-i * strength * nullifier)`` for the
        star or plaquette at ``site``."""
        word = WHWord.identity()
        if site[0] == "v":
            for edge in self.spec.star_edges(site[1]):
                word = word * WHWord.x_op(edge, strength)
        else:
            for edge, sgn in zip(self.spec.face_edges(site[1]), self.spec.face_signs()):
                word = word * WHWord.z_op(edge, -sgn * strength)
        return word

    def _absorb_residues(self, strengths: dict) -> None:
        """Fold the imaginary plaquette residues into enclosed face labels:
        the enclosed record's charge becomes the redefined complex value."""
        for rec in self.live_records():
            if rec.kind == "m" and rec.site in strengths and rec.site[0] == "f":
                face = rec.site[1]
                L = sum(sgn * self.damp(edge)
                        for edge, sgn in zip(self.spec.face_edges(face),
                                             self.spec.face_signs()))
                if L:
                    rec.label = rec.label - 1j * strengths[rec.site] * L

    # -- cross-engine checks ---------------------------------------------------------

    def predicted_means(self) -> tuple[dict, dict]:
        """First moments implied by the applied displacement word."""
        mean_x: dict[int, float] = {}
        mean_p: dict[int, float] = {}
        for mode in self.word.modes:
            t, s = self.word.param(mode)
            mean_x[mode] = s.real
            mean_p[mode] = t.real
        return mean_x, mean_p

    def moment_deviation(self) -> float:
        """Max deviation between numeric first moments and the symbolic
        word's prediction."""
        if self.state is None:
            return 0.0
        mean_x, mean_p = self.predicted_means()
        worst = 0.0
        for k, mode in enumerate(self.state.modes):
            worst = max(worst,
                        abs(self.state.mean_x[k] - mean_x.get(mode, 0.0)),
                        abs(self.state.mean_p[k] - mean_p.get(mode, 0.0)))
        return worst


def _words_close(w1: WHWord, w2: WHWord, tol: float) -> bool:
    for mode in set(w1.factors) | set(w2.factors):
        t1, s1 = w1.param(mode)
        t2, s2 = w2.param(mode)
        if abs(t1 - t2) > tol or abs(s1 - s2) > tol:
            return False
    return True


def _winding_number(polygon, point) -> int:
    """Integer winding of a closed polyline around a point off its edges."""
    x0, y0 = point
    wn = 0
    for (x1, y1), (x2, y2) in zip(polygon, polygon[1:]):
        if y1 <= y0:
            if y2 > y0 and (x2 - x1) * (y0 - y1) - (y2 - y1) * (x0 - x1) > 0:
                wn += 1
        elif y2 <= y0 and (x2 - x1) * (y0 - y1) - (y2 - y1) * (x0 - x1) < 0:
            wn -= 1
    return wn


def table_to_csv(table: dict) -> str:
    """Violation table as ``site,re,im`` CSV rows (sites sorted)."""
    lines = ["site,re,im"]
    for site in sorted(table, key=repr):
        v = table[site]
        kind, (a, b) = site
        lines.append(f"{kind}({a};{b}),{v.real!r},{v.imag!r}")
    return "\n".join(lines) + "\n"
