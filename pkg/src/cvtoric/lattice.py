"""Square-lattice geometry for the continuous-variable surface code.

One qumode lives on every edge of a ``width x height`` lattice.  Vertex
(star) generators are sums of the four incident edge momenta; face
(plaquette) generators are alternating-sign sums of the four boundary
edge positions, with the boundary ordered counterclockwise starting from
the top edge and signs ``(+1, -1, +1, -1)`` over that order.  Under this
convention every horizontal edge enters its two faces with ``+1`` and
every vertical edge with ``-1``, and all star/plaquette pairs have a
vanishing canonical pairing.

The code state itself is prepared from a larger cluster: an extra
ancilla mode on every vertex and face, linked to the adjacent edge
modes.  Measuring vertex ancillas in the momentum basis and face
ancillas in the position basis, then Fourier-transforming all the
surviving edge modes, leaves exactly the star/plaquette correlations
above.  :func:`validate_code` is the arbiter for these conventions.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Boundary",
    "LatticeSpec",
    "MeasurementPattern",
    "StabilizerGen",
    "build_lattice",
    "cluster_graph",
    "code_generators",
    "validate_code",
]


class Boundary(enum.Enum):
    TOROIDAL = "toroidal"
    PLANAR = "planar"


#: Paper-style edge orientation label: 1 for vertical edges, 2 for horizontal.
VERTICAL = 1
HORIZONTAL = 2


@dataclass(frozen=True)
class StabilizerGen:
    """A nullifier generator: ``offset + sum_j (alpha_j x_j + beta_j p_j)``.

    ``coeffs`` maps edge-mode index to the ``(alpha, beta)`` coefficient
    pair.  The exponentiated stabilizer is ``exp(-i * param * nullifier)``.
    """

    kind: str                      # "star" | "plaquette"
    site: tuple                    # vertex or face coordinate
    coeffs: dict = field(default_factory=dict)
    offset: complex = 0j

    def coefficient_vectors(self, modes: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(alpha, beta)`` vectors over the given mode ordering."""
        index = {m: k for k, m in enumerate(modes)}
        alpha = np.zeros(len(modes), dtype=complex)
        beta = np.zeros(len(modes), dtype=complex)
        for mode, (a, b) in self.coeffs.items():
            if mode not in index:
                raise ValueError(f"generator touches mode {mode} absent from the state")
            alpha[index[mode]] = a
            beta[index[mode]] = b
        return alpha, beta


@dataclass(frozen=True)
class MeasurementPattern:
    """Single-mode measurements turning the cluster into the code state."""

    measurements: tuple            # ((mode, "position"|"momentum"), ...)
    surviving: tuple               # edge-mode indices, in index order
    fourier_survivors: bool = True # apply F to every surviving mode afterwards

    def basis_of(self, mode: int) -> str | None:
        for m, basis in self.measurements:
            if m == mode:
                return basis
        return None


class LatticeSpec:
    """Geometry of a ``width x height`` square lattice with edge modes.

    Mode indexing is deterministic: horizontal edge ``(x, y)`` (from vertex
    ``(x, y)`` toward ``(x+1, y)``) has index ``y*width + x``; vertical edge
    ``(x, y)`` (toward ``(x, y+1)``) has index ``n_h + y*width + x`` where
    ``n_h`` is the number of horizontal edges.  On the torus both families
    have ``width*height`` members.  The planar variant drops wrapping
    edges and is experimental: boundary stars then touch two or three
    edges.
    """

    def __init__(self, width: int, height: int, boundary: Boundary):
        self.width = width
        self.height = height
        self.boundary = boundary
        torus = boundary is Boundary.TOROIDAL
        if torus:
            h_cols, h_rows = width, height
            v_cols, v_rows = width, height
        else:
            h_cols, h_rows = width - 1, height
            v_cols, v_rows = width, height - 1
        self._h_cols, self._h_rows = h_cols, h_rows
        self._v_cols, self._v_rows = v_cols, v_rows
        self.n_horizontal = h_cols * h_rows
        self.n_vertical = v_cols * v_rows
        self.n_edges = self.n_horizontal + self.n_vertical
        self.vertices = [(x, y) for y in range(height) for x in range(width)]
        if torus:
            self.faces = [(a, b) for b in range(height) for a in range(width)]
        else:
            self.faces = [(a, b) for b in range(height - 1) for a in range(width - 1)]

    # -- edge indexing -------------------------------------------------------

    def _wrap(self, x: int, y: int) -> tuple[int, int]:
        return x % self.width, y % self.height

    def horizontal_edge(self, x: int, y: int) -> int | None:
        if self.boundary is Boundary.TOROIDAL:
            x, y = self._wrap(x, y)
            return y * self._h_cols + x
        if 0 <= x < self._h_cols and 0 <= y < self._h_rows:
            return y * self._h_cols + x
        return None

    def vertical_edge(self, x: int, y: int) -> int | None:
        if self.boundary is Boundary.TOROIDAL:
            x, y = self._wrap(x, y)
            return self.n_horizontal + y * self._v_cols + x
        if 0 <= x < self._v_cols and 0 <= y < self._v_rows:
            return self.n_horizontal + y * self._v_cols + x
        return None

    def edge_modes(self) -> tuple[int, ...]:
        return tuple(range(self.n_edges))

    def orientation(self, edge: int) -> int:
        """1 for vertical edges, 2 for horizontal edges."""
        return HORIZONTAL if edge < self.n_horizontal else VERTICAL

    def edge_location(self, edge: int) -> tuple[str, int, int]:
        if edge < self.n_horizontal:
            return ("h", edge % self._h_cols, edge // self._h_cols)
        e = edge - self.n_horizontal
        return ("v", e % self._v_cols, e // self._v_cols)

    def edge_endpoints(self, edge: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """Tail and head vertices (tail at the smaller coordinate)."""
        kind, x, y = self.edge_location(edge)
        if kind == "h":
            head = self._wrap(x + 1, y) if self.boundary is Boundary.TOROIDAL else (x + 1, y)
            return (x, y), head
        head = self._wrap(x, y + 1) if self.boundary is Boundary.TOROIDAL else (x, y + 1)
        return (x, y), head

    def edge_faces(self, edge: int) -> tuple[tuple[int, int], ...]:
        """Faces adjacent to an edge (two on the torus, one or two planar)."""
        kind, x, y = self.edge_location(edge)
        if kind == "h":
            cands = [(x, y - 1), (x, y)]     # face below has this edge on top
        else:
            cands = [(x - 1, y), (x, y)]     # face left has this edge on its right
        out = []
        for a, b in cands:
            if self.boundary is Boundary.TOROIDAL:
                out.append(self._wrap(a, b))
            elif (a, b) in set(self.faces):
                out.append((a, b))
        return tuple(out)

    # -- stars and faces -------------------------------------------------------

    def star_edges(self, vertex: tuple[int, int]) -> tuple[int, ...]:
        """Incident edges ordered (up, left, down, right); planar lattices
        drop missing ones."""
        x, y = vertex
        edges = (
            self.vertical_edge(x, y),
            self.horizontal_edge(x - 1, y),
            self.vertical_edge(x, y - 1),
            self.horizontal_edge(x, y),
        )
        return tuple(e for e in edges if e is not None)

    def face_edges(self, face: tuple[int, int]) -> tuple[int, ...]:
        """Boundary edges ordered counterclockwise from the top:
        (top, left, bottom, right)."""
        a, b = face
        edges = (
            self.horizontal_edge(a, b + 1),
            self.vertical_edge(a, b),
            self.horizontal_edge(a, b),
            self.vertical_edge(a + 1, b),
        )
        assert all(e is not None for e in edges)
        return edges  # type: ignore[return-value]

    @staticmethod
    def face_signs() -> tuple[int, int, int, int]:
        """Alternating boundary sign pattern over the ordered boundary."""
        return (1, -1, 1, -1)

    def face_sign(self, face: tuple[int, int], edge: int) -> int:
        for e, sgn in zip(self.face_edges(face), self.face_signs()):
            if e == edge:
                return sgn
        raise ValueError(f"edge {edge} not on face {face}")

    # -- site bookkeeping ------------------------------------------------------

    def checkerboard(self, site: tuple) -> int:
        """Site parity ``(-1)**(x+y)``, defined on vertices and faces alike.

        This is the frame translating raw generator violations into anyon
        labels; it is single-valued only when both torus dimensions are
        even.
        """
        kind, (x, y) = site
        if self.boundary is Boundary.TOROIDAL and (self.width % 2 or self.height % 2):
            raise ValueError("site parity needs even torus dimensions")
        return -1 if (x + y) % 2 else 1

    def vertex_neighbors(self, vertex: tuple[int, int]) -> list[tuple[int, tuple[int, int]]]:
        """(edge, other-endpoint) pairs for walking an excitation between
        vertices."""
        out = []
        for edge in self.star_edges(vertex):
            tail, head = self.edge_endpoints(edge)
            out.append((edge, head if tail == vertex else tail))
        return out

    def face_neighbors(self, face: tuple[int, int]) -> list[tuple[int, tuple[int, int]]]:
        out = []
        for edge in self.face_edges(face):
            others = [f for f in self.edge_faces(edge) if f != face]
            if others:
                out.append((edge, others[0]))
        return out

    # -- ancilla / cluster layout ----------------------------------------------

    def vertex_ancilla(self, vertex: tuple[int, int]) -> int:
        x, y = vertex
        return self.n_edges + y * self.width + x

    def face_ancilla(self, face: tuple[int, int]) -> int:
        a, b = face
        cols = self.width if self.boundary is Boundary.TOROIDAL else self.width - 1
        return self.n_edges + len(self.vertices) + b * cols + a

    @property
    def n_cluster_modes(self) -> int:
        return self.n_edges + len(self.vertices) + len(self.faces)

    def __repr__(self) -> str:
        return (f"LatticeSpec({self.width}x{self.height}, "
                f"{self.boundary.value}, {self.n_edges} edge modes)")


def build_lattice(width: int, height: int,
                  boundary: Boundary | str = Boundary.TOROIDAL) -> LatticeSpec:
    """Construct the lattice geometry.

    Toroidal lattices need ``width, height >= 2``; a 1-cell torus would
    identify the two edges of every star.
    """
    if isinstance(boundary, str):
        boundary = Boundary(boundary)
    if width < 2 or height < 2:
        raise ValueError("lattice dimensions must be at least 2")
    return LatticeSpec(int(width), int(height), boundary)


def cluster_graph(spec: LatticeSpec) -> tuple[np.ndarray, MeasurementPattern]:
    """Adjacency of the cluster precursor and the pattern reducing it.

    The cluster holds one mode per edge plus one ancilla per vertex and
    face; ancillas link to the adjacent edge modes with unit weight.
    Vertex ancillas are measured in the momentum basis (consuming their
    own cluster nullifier into an all-plus position correlation on the
    star) and face ancillas in the position basis (freeing the
    alternating momentum combination around each face); the subsequent
    Fourier transform of every surviving edge mode turns these into the
    star/plaquette forms.
    """
    n = spec.n_cluster_modes
    A = np.zeros((n, n))
    for vertex in spec.vertices:
        va = spec.vertex_ancilla(vertex)
        for edge in spec.star_edges(vertex):
            A[va, edge] = A[edge, va] = 1.0
    for face in spec.faces:
        fa = spec.face_ancilla(face)
        for edge in spec.face_edges(face):
            A[fa, edge] = A[edge, fa] = 1.0
    measurements = tuple(
        [(spec.vertex_ancilla(v), "momentum") for v in spec.vertices]
        + [(spec.face_ancilla(f), "position") for f in spec.faces]
    )
    pattern = MeasurementPattern(
        measurements=measurements,
        surviving=spec.edge_modes(),
        fourier_survivors=True,
    )
    return A, pattern


def _rate(squeezing, edge: int) -> float:
    if isinstance(squeezing, dict):
        r = squeezing[edge]
    else:
        r = squeezing
    r = float(r)
    if not (r > 0 or math.isinf(r)) and r != 0.0:
        raise ValueError(f"squeezing must be >= 0 or infinite, got {r}")
    return r


def code_generators(spec: LatticeSpec, squeezing) -> list[StabilizerGen]:
    """Star and plaquette nullifier generators.

    ``squeezing`` is a per-edge map (or a single value) of squeezing
    parameters; ``math.inf`` selects the ideal limit.  Stars are
    independent of squeezing.  A finitely squeezed plaquette carries an
    extra imaginary momentum coefficient ``-i e^{-2 r_j} (-1)^(j+1)`` on
    its j-th boundary edge, vanishing in the ideal limit.
    """
    if isinstance(squeezing, dict):
        unknown = set(squeezing) - set(spec.edge_modes())
        if unknown:
            raise ValueError(f"squeezing map names unknown modes {sorted(unknown)}")
    gens: list[StabilizerGen] = []
    for vertex in spec.vertices:
        coeffs = {edge: (0j, 1 + 0j) for edge in spec.star_edges(vertex)}
        gens.append(StabilizerGen(kind="star", site=vertex, coeffs=coeffs))
    for face in spec.faces:
        coeffs = {}
        for edge, sgn in zip(spec.face_edges(face), spec.face_signs()):
            r = _rate(squeezing, edge)
            damp = 0.0 if math.isinf(r) else math.exp(-2.0 * r)
            coeffs[edge] = (complex(sgn), -1j * damp * sgn)
        gens.append(StabilizerGen(kind="plaquette", site=face, coeffs=coeffs))
    return gens


def canonical_pairing(g1: StabilizerGen, g2: StabilizerGen) -> complex:
    """Symplectic pairing ``sum_j (a_j b'_j - b_j a'_j)`` of two nullifiers;
    zero exactly when the exponentiated stabilizers commute."""
    total = 0j
    for mode, (a1, b1) in g1.coeffs.items():
        if mode in g2.coeffs:
            a2, b2 = g2.coeffs[mode]
            total += a1 * b2 - b1 * a2
    return total


def validate_code(spec: LatticeSpec, generators: list[StabilizerGen]) -> dict:
    """Pairing of every generator pair; all-zero for a valid code.

    Returns ``{"pairings": {(site1, site2): value}, "max_abs": float,
    "valid": bool}`` with only nonzero entries listed.
    """
    pairings = {}
    max_abs = 0.0
    for i, g1 in enumerate(generators):
        for g2 in generators[i + 1:]:
            value = canonical_pairing(g1, g2)
            mag = abs(value)
            max_abs = max(max_abs, mag)
            if mag > 0:
                pairings[((g1.kind, g1.site), (g2.kind, g2.site))] = value
    return {"pairings": pairings, "max_abs": max_abs, "valid": max_abs == 0.0}


# -- text serialization -----------------------------------------------------


def spec_to_text(spec: LatticeSpec, squeezing=None) -> str:
    """Human-readable lattice description with optional per-mode squeezing."""
    out = io.StringIO()
    out.write(f"width {spec.width}\n")
    out.write(f"height {spec.height}\n")
    out.write(f"boundary {spec.boundary.value}\n")
    if squeezing is not None:
        for edge in spec.edge_modes():
            out.write(f"squeezing {edge} {_rate(squeezing, edge)!r}\n")
    return out.getvalue()


def spec_from_text(text: str) -> tuple[LatticeSpec, dict | None]:
    fields: dict[str, str] = {}
    squeezing: dict[int, float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, *rest = line.split()
        if key == "squeezing":
            squeezing[int(rest[0])] = float(rest[1])
        else:
            fields[key] = rest[0]
    spec = build_lattice(int(fields["width"]), int(fields["height"]),
                         fields.get("boundary", "toroidal"))
    return spec, (squeezing or None)


def describe_modes(spec: LatticeSpec) -> str:
    """Deterministic mode-index documentation (CLI ``lattice --describe``)."""
    lines = [f"# {spec!r}", "# edge modes"]
    for edge in spec.edge_modes():
        kind, x, y = spec.edge_location(edge)
        d = spec.orientation(edge)
        tail, head = spec.edge_endpoints(edge)
        lines.append(f"edge {edge} {kind} ({x},{y}) d={d} {tail}->{head}")
    lines.append("# vertex ancillas (measured in momentum basis)")
    for v in spec.vertices:
        lines.append(f"vertex-ancilla {spec.vertex_ancilla(v)} at {v}")
    lines.append("# face ancillas (measured in position basis)")
    for f in spec.faces:
        lines.append(f"face-ancilla {spec.face_ancilla(f)} at {f}")
    return "\n".join(lines) + "\n"
