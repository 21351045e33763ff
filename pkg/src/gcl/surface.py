"""Closed hyperbolic surfaces from gluing data, with hexagon decompositions.

A surface of genus g is described by a trivalent pants graph (2g-2 nodes,
3g-3 edges), a positive length per edge and a twist fraction per edge.
Each pair of pants is realized as two right-angled hexagons in explicit
half-plane charts; cuff translations come from products of reflections in
the seam lines, so the pants relation holds to machine precision.  Pants
are glued along cuffs by explicit transition maps carrying the twist.

The hexagon decomposition marks two antipodal points on every cuff and
slides each hexagon's feet along the cuff onto the marked points, so that
hexagons from both sides of a cuff meet along full edges.  The slid
hexagons have geodesic sides but are no longer right-angled; every side
carries a transfer isometry to its glued partner's chart, which is all the
developing machinery downstream needs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperbolic as hp
from .errors import DegenerateDecomposition, DegenerateSpec, InputError
from .hyperbolic import GeodesicLine, Isometry

SPEC_FORMAT = "surface-spec-v1"
GENERATOR_LETTERS = "abcdefghijklm"

# matrix of z -> -1/z: reverses the imaginary axis and swaps its sides
_FLIP = Isometry(np.array([[0.0, -1.0], [1.0, 0.0]]))


# ---------------------------------------------------------------------------
# surface specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSpec:
    genus: int
    pants_edges: tuple[tuple[int, int], ...]
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pants_edges",
                           tuple((int(a), int(b)) for a, b in self.pants_edges))
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "twists", tuple(float(x) for x in self.twists))
        self._validate()

    def _validate(self):
        g = self.genus
        if g < 2:
            raise DegenerateSpec("genus must be at least 2")
        n_nodes, n_edges = 2 * g - 2, 3 * g - 3
        if len(self.pants_edges) != n_edges:
            raise DegenerateSpec(f"expected {n_edges} edges, got {len(self.pants_edges)}")
        if len(self.lengths) != n_edges or len(self.twists) != n_edges:
            raise DegenerateSpec("lengths and twists must have one entry per edge")
        degree = [0] * n_nodes
        for a, b in self.pants_edges:
            if not (0 <= a < n_nodes and 0 <= b < n_nodes):
                raise DegenerateSpec("edge endpoint out of range")
            degree[a] += 1
            degree[b] += 1
        if any(d != 3 for d in degree):
            raise DegenerateSpec("pants graph must be trivalent")
        if not self._connected(n_nodes):
            raise DegenerateSpec("pants graph must be connected")
        for ell in self.lengths:
            if ell < 1e-6:
                raise DegenerateSpec("cuff length below 1e-6 is numerically untrustworthy")
        for t in self.twists:
            if not -0.5 <= t <= 0.5:
                raise DegenerateSpec("twists must be fractions in [-1/2, 1/2]")

    def _connected(self, n_nodes: int) -> bool:
        adj = [[] for _ in range(n_nodes)]
        for a, b in self.pants_edges:
            adj[a].append(b)
            adj[b].append(a)
        seen, stack = {0}, [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == n_nodes

    def node_slots(self) -> list[list[tuple[int, int]]]:
        """Per node, the incident (edge, end) pairs in edge-list order.

        Position in the list is the node's cuff slot (0, 1, 2).
        """
        slots = [[] for _ in range(2 * self.genus - 2)]
        for e, (a, b) in enumerate(self.pants_edges):
            slots[a].append((e, 0))
            slots[b].append((e, 1))
        return slots

    def to_json(self) -> str:
        doc = {"format": SPEC_FORMAT, "genus": self.genus,
               "pants_edges": [list(e) for e in self.pants_edges],
               "lengths": list(self.lengths), "twists": list(self.twists)}
        return json.dumps(doc, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "SurfaceSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"surface spec is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != SPEC_FORMAT:
            raise InputError(f"surface spec must declare format {SPEC_FORMAT!r}")
        try:
            return SurfaceSpec(genus=doc["genus"],
                               pants_edges=tuple(tuple(e) for e in doc["pants_edges"]),
                               lengths=tuple(doc["lengths"]),
                               twists=tuple(doc["twists"]))
        except DegenerateSpec:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed surface spec: {exc}") from exc


def default_spec() -> SurfaceSpec:
    """Genus-2 test surface: generic lengths and twists, theta pants graph."""
    return SurfaceSpec(genus=2,
                       pants_edges=((0, 1), (0, 1), (0, 1)),
                       lengths=(2.0, 2.3, 2.7),
                       twists=(0.11, -0.23, 0.05))


# ---------------------------------------------------------------------------
# pants charts
# ---------------------------------------------------------------------------

def _reflection(line: GeodesicLine) -> np.ndarray:
    """Matrix of the reflection in `line`, acting on conjugated coordinates.

    The product of two such matrices is the matrix of an ordinary
    orientation-preserving isometry.
    """
    a1, b1 = line.p_neg
    a2, b2 = line.p_pos
    m = np.array([[a1 * b2 + a2 * b1, -2.0 * a1 * a2],
                  [2.0 * b1 * b2, -(a1 * b2 + a2 * b1)]])
    return m / abs(a1 * b2 - a2 * b1)


class PantsChart:
    """Half-plane realization of one pair of pants.

    Hexagon 0 and (its mirror) hexagon 1 each live in their own chart;
    hexagon 0's chart doubles as the chart of the pants.  Cuff slot c of
    hexagon 0 occupies phases [0, L_c/2] of the cuff circle, hexagon 1 the
    complementary arc; phases grow along the hexagon walk direction.
    """

    def __init__(self, cuff_lengths: tuple[float, float, float]):
        self.cuff_lengths = cuff_lengths
        a = [ell / 2.0 for ell in cuff_lengths]
        s01 = hp.right_hexagon_sides(a[2], a[0], a[1])[0]
        s12 = hp.right_hexagon_sides(a[0], a[1], a[2])[0]
        s20 = hp.right_hexagon_sides(a[1], a[2], a[0])[0]
        self.hex_sides = [
            [a[0], s01, a[1], s12, a[2], s20],   # hexagon 0
            [a[0], s20, a[2], s12, a[1], s01],   # hexagon 1 (mirror)
        ]
        self.verts = []
        for sides in self.hex_sides:
            vs, end = hp.hexagon_walk(sides)
            if not end.is_identity(1e-7):
                raise DegenerateDecomposition("hexagon walk failed to close")
            self.verts.append(vs)
        # cuff slot -> side index within each hexagon
        self.cuff_side = [{0: 0, 1: 2, 2: 4}, {0: 0, 1: 4, 2: 2}]
        self.cuff_lines = []
        for which in (0, 1):
            lines = {}
            for c in range(3):
                j = self.cuff_side[which][c]
                vs = self.verts[which]
                lines[c] = hp.line_through(vs[j], vs[(j + 1) % 6])
            self.cuff_lines.append(lines)
        # phase origins: hexagon 0 starts its arc at circle phase 0,
        # hexagon 1 at phase L/2
        self.phase0 = []
        for which in (0, 1):
            offs = {}
            for c in range(3):
                j = self.cuff_side[which][c]
                base = hp.line_param(self.cuff_lines[which][c], self.verts[which][j])
                offs[c] = base - (0.0 if which == 0 else cuff_lengths[c] / 2.0)
            self.phase0.append(offs)
        self._seam_refls = [_reflection(hp.line_through(self.verts[0][j], self.verts[0][(j + 1) % 6]))
                            for j in (1, 3, 5)]
        self.cuff_translation = [
            Isometry(self._seam_refls[0] @ self._seam_refls[2]),
            Isometry(self._seam_refls[1] @ self._seam_refls[0]),
            Isometry(self._seam_refls[2] @ self._seam_refls[1]),
        ]
        for c in range(3):
            tr = self.cuff_translation[c].trace()
            if abs(tr - 2.0 * math.cosh(a[c])) > 1e-9:
                raise DegenerateDecomposition("cuff translation trace mismatch")
            v0 = self.verts[0][self.cuff_side[0][c]]
            moved = self.phase(0, c, self.cuff_translation[c].apply(v0))
            if abs(moved - cuff_lengths[c]) > 1e-9:
                raise DegenerateDecomposition("cuff translation direction mismatch")
        k = [hp.to_klein(v) for v in self.verts[0]]
        self.interior = hp.klein_to_halfplane(sum(k) / 6.0)

    def phase(self, which: int, c: int, z: complex) -> float:
        """Cuff-circle phase of a point on the cuff line of slot c."""
        return hp.line_param(self.cuff_lines[which][c], z) - self.phase0[which][c]

    def normalizer(self, c: int) -> Isometry:
        """Map sending slot c's cuff line to (0, inf), circle phase s to i e^s."""
        n = hp._to_standard(self.cuff_lines[0][c])
        return Isometry.translation(-self.phase0[0][c]) @ n


# ---------------------------------------------------------------------------
# holonomy
# ---------------------------------------------------------------------------

Word = tuple[int, ...]   # generator indices with sign for direction; 1-based


@dataclass(eq=False)
class Holonomy:
    genus: int
    generators: list[Isometry]
    generator_names: list[str]
    relators: list[Word]
    relator_defect: float
    pants_curve_words: list[Word]
    pants_curve_matrices: list[Isometry]
    basepoint: complex
    _charts: list[PantsChart] = field(repr=False, default_factory=list)
    _placements: list[Isometry] = field(repr=False, default_factory=list)
    _gluings: list[Isometry] = field(repr=False, default_factory=list)

    def matrix_of_word(self, word: Word) -> Isometry:
        m = Isometry.identity()
        for letter in word:
            g = self.generators[abs(letter) - 1]
            m = m @ (g if letter > 0 else g.inverse())
        return m

    def word_to_string(self, word: Word) -> str:
        out = []
        for letter in word:
            name = self.generator_names[abs(letter) - 1]
            out.append(name.upper() if letter < 0 else name)
        return "".join(out)

    def word_from_string(self, text: str) -> Word:
        word = []
        for ch in text:
            idx = GENERATOR_LETTERS.find(ch.lower())
            if idx < 0 or idx >= len(self.generators):
                raise InputError(f"unknown generator letter {ch!r}")
            word.append(-(idx + 1) if ch.isupper() else idx + 1)
        return tuple(word)


def invert_word(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def reduce_word(word: Word) -> Word:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _build_charts(spec: SurfaceSpec):
    slots = spec.node_slots()
    charts = []
    for k in range(2 * spec.genus - 2):
        lengths = tuple(spec.lengths[e] for e, _ in slots[k])
        charts.append(PantsChart(lengths))
    return charts, slots


def _edge_slots(spec: SurfaceSpec, slots) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Per edge, its two (node, cuff-slot) incidences (near end, far end)."""
    out = []
    for e, (a, b) in enumerate(spec.pants_edges):
        cu = slots[a].index((e, 0))
        cv = slots[b].index((e, 1))
        out.append(((a, cu), (b, cv)))
    return out


def _gluing_map(spec: SurfaceSpec, charts, edge_ends, e: int) -> Isometry:
    """Transition chart(far pants) -> chart(near pants) across edge e.

    Circle phases obey  phi_near = twist * L - phi_far : the two sides see
    the cuff with opposite orientations, and at zero twist the hexagon
    feet from both sides coincide.
    """
    (ku, cu), (kv, cv) = edge_ends[e]
    disp = spec.twists[e] * spec.lengths[e]
    n_u = charts[ku].normalizer(cu)
    n_v = charts[kv].normalizer(cv)
    g = n_u.inverse() @ Isometry.translation(disp) @ _FLIP @ n_v
    side_u = (n_u.apply(charts[ku].interior)).real
    side_v = (n_u.apply(g.apply(charts[kv].interior))).real
    if not (side_u < 0.0 < side_v):
        raise DegenerateDecomposition("gluing side convention violated")
    return g


def _place_pants(spec: SurfaceSpec, charts, edge_ends):
    """BFS placements of the pants charts; returns tree edges and visit order."""
    n = 2 * spec.genus - 2
    placements: list[Isometry | None] = [None] * n
    placements[0] = Isometry.identity()
    order = [0] * n
    tree_edge: set[int] = set()
    bfs = [0]
    queue = [0]
    while queue:
        k = queue.pop(0)
        for e, ((a, ca), (b, cb)) in enumerate(edge_ends):
            g = None
            if a == k and placements[b] is None:
                g = _gluing_map(spec, charts, edge_ends, e)
                placements[b] = placements[a] @ g
                child = b
            elif b == k and placements[a] is None:
                g = _gluing_map(spec, charts, edge_ends, e)
                placements[a] = placements[b] @ g.inverse()
                child = a
            if g is not None:
                tree_edge.add(e)
                order[child] = len(bfs)
                bfs.append(child)
                queue.append(child)
    return placements, tree_edge, bfs


def build_holonomy(spec: SurfaceSpec) -> Holonomy:
    """Holonomy representation of the surface group.

    Pants groups come from seam reflections (the pants relation is exact);
    gluing maps across cuffs carry the twists.  Cuff symbols and edge
    symbols are then eliminated down to 2g generators plus the surface
    relator, with matrices and words tracked through every step.
    """
    charts, slots = _build_charts(spec)
    edge_ends = _edge_slots(spec, slots)
    placements, tree_edges, bfs = _place_pants(spec, charts, edge_ends)
    gluings = [_gluing_map(spec, charts, edge_ends, e) for e in range(len(edge_ends))]

    sym_matrix: dict[tuple, Isometry] = {}
    for k, chart in enumerate(charts):
        for c in range(3):
            sym_matrix[("x", k, c)] = placements[k] @ chart.cuff_translation[c] @ placements[k].inverse()
    for e, ((ku, cu), (kv, cv)) in enumerate(edge_ends):
        if e not in tree_edges:
            sym_matrix[("u", e)] = placements[ku] @ gluings[e] @ placements[kv].inverse()

    # check the gluing relations  u x_far u^-1 x_near = id  numerically
    # (tree edges have u = id by choice of placements)
    for e, ((ku, cu), (kv, cv)) in enumerate(edge_ends):
        u = sym_matrix.get(("u", e), Isometry.identity())
        lhs = u @ sym_matrix[("x", kv, cv)] @ u.inverse() @ sym_matrix[("x", ku, cu)]
        if not lhs.is_identity(1e-8):
            raise DegenerateDecomposition("cuff gluing relation violated")

    defined: dict[tuple, list[tuple]] = {}

    def chases(sym, target, seen=None) -> bool:
        """Whether resolving `sym` would pass through `target`."""
        if sym == target:
            return True
        if sym not in defined:
            return False
        seen = seen or set()
        if sym in seen:
            return True
        seen.add(sym)
        return any(chases(s, target, seen) for s, _ in defined[sym])

    def pants_relation(k) -> list[tuple]:
        return [(("x", k, 2), 1), (("x", k, 1), 1), (("x", k, 0), 1)]

    def solve(rel: list[tuple], sym) -> list[tuple]:
        pos = [i for i, (s, _) in enumerate(rel) if s == sym][0]
        before, after = rel[:pos], rel[pos + 1:]
        return ([(s, -e) for (s, e) in reversed(before)]
                + [(s, -e) for (s, e) in reversed(after)])

    # walk the spanning tree: tie each child pants to its parent cuff, then
    # use each pants relation to name its remaining third cuff
    parent_slot = {}
    for e in tree_edges:
        (ku, cu), (kv, cv) = edge_ends[e]
        child = kv if bfs.index(kv) > bfs.index(ku) else ku
        parent_slot[child] = edge_ends[e] if child == kv else (edge_ends[e][1], edge_ends[e][0])
    for k in bfs:
        if k in parent_slot:
            (kp, cp), (kc, cc) = parent_slot[k]
            defined[("x", kc, cc)] = [(("x", kp, cp), -1)]
        free = [c for c in range(3) if ("x", k, c) not in defined]
        victim = ("x", k, free[-1])
        defined[victim] = solve(pants_relation(k), victim)

    relator_words: list[list[tuple]] = []
    for e in sorted(set(range(len(edge_ends))) - tree_edges):
        (ku, cu), (kv, cv) = edge_ends[e]
        su, sv, ue = ("x", ku, cu), ("x", kv, cv), ("u", e)
        rel = [(ue, 1), (sv, 1), (ue, -1), (su, 1)]
        if sv not in defined and not chases(su, sv):
            defined[sv] = [(ue, -1), (su, -1), (ue, 1)]
        elif su not in defined and not chases(sv, su):
            defined[su] = [(ue, 1), (sv, -1), (ue, -1)]
        else:
            relator_words.append(rel)

    generators = sorted(set(sym_matrix) - set(defined),
                        key=lambda s: (0 if s[0] == "x" else 1, s))
    if len(generators) != 2 * spec.genus:
        raise DegenerateDecomposition(
            f"generator elimination reached {len(generators)}, expected {2 * spec.genus}")
    gen_index = {s: i + 1 for i, s in enumerate(generators)}

    def resolve(sym, sign, depth=0) -> list[int]:
        if depth > 64:
            raise DegenerateDecomposition("cyclic generator elimination")
        if sym in gen_index:
            return [sign * gen_index[sym]]
        word = []
        for s, e in defined[sym]:
            word.extend(resolve(s, e, depth + 1))
        return word if sign > 0 else [-x for x in reversed(word)]

    relators = [reduce_word(tuple(x for (s, e) in rw for x in resolve(s, e)))
                for rw in relator_words]
    pants_words = [reduce_word(tuple(resolve(("x", ku, cu), 1)))
                   for (ku, cu), _ in edge_ends]

    gen_mats = [sym_matrix[s] for s in generators]
    names = [GENERATOR_LETTERS[i] for i in range(len(generators))]
    hol = Holonomy(genus=spec.genus, generators=gen_mats, generator_names=names,
                   relators=relators, relator_defect=0.0,
                   pants_curve_words=pants_words, pants_curve_matrices=[],
                   basepoint=charts[0].interior,
                   _charts=charts, _placements=placements, _gluings=gluings)

    defect = 0.0
    for rel in relators:
        m = hol.matrix_of_word(rel).m
        defect = max(defect, float(min(np.max(np.abs(m - np.eye(2))),
                                       np.max(np.abs(m + np.eye(2))))))
    hol.relator_defect = defect
    if defect > 1e-8:
        raise DegenerateDecomposition(f"relator defect {defect:.3e} exceeds 1e-8")
    for e, word in enumerate(pants_words):
        m = hol.matrix_of_word(word)
        want = 2.0 * math.cosh(spec.lengths[e] / 2.0)
        if abs(m.trace() - want) > 1e-8:
            raise DegenerateDecomposition("pants curve trace mismatch")
        hol.pants_curve_matrices.append(m)
    return hol


# ---------------------------------------------------------------------------
# hexagon decomposition
# ---------------------------------------------------------------------------

@dataclass
class Hexagon:
    index: int
    pants: int
    which: int
    verts: list[complex]                 # slid vertices, own chart, ccw
    side_kind: list[str]                 # 'cuff' | 'seam', per side
    side_edge: list[int | None]          # pants-graph edge for cuff sides
    side_lines: list[GeodesicLine]       # oriented vert[j] -> vert[j+1]
    placement: Isometry                  # chart -> surface coordinates
    interior: complex = 0j

    def side_segment(self, j: int) -> tuple[complex, complex]:
        return self.verts[j], self.verts[(j + 1) % 6]

    def klein_poly(self) -> list[complex]:
        return [hp.to_klein(v) for v in self.verts]


@dataclass
class HexagonDecomposition:
    genus: int
    hexagons: list[Hexagon]
    partner: list[int]                   # slot involution; slot = 6*hex + side
    transfers: list[Isometry]            # chart(partner hexagon) -> chart(hexagon)
    labels: list[str]
    twist_adjustments: dict[int, float]  # edge -> foot slide applied (length units)

    def n_slots(self) -> int:
        return len(self.partner)

    def slot(self, hexagon: int, side: int) -> int:
        return 6 * hexagon + side

    def hexagon_of_slot(self, slot: int) -> tuple[int, int]:
        return divmod(slot, 6)

    def kind(self, slot: int) -> str:
        h, j = self.hexagon_of_slot(slot)
        return self.hexagons[h].side_kind[j]

    def segment(self, slot: int) -> tuple[complex, complex]:
        h, j = self.hexagon_of_slot(slot)
        return self.hexagons[h].side_segment(j)

    def line(self, slot: int) -> GeodesicLine:
        h, j = self.hexagon_of_slot(slot)
        return self.hexagons[h].side_lines[j]

    def to_json(self) -> str:
        def disk(z: complex):
            w = (z - 1j) / (z + 1j)
            return [w.real, w.imag]

        hexes = []
        for h in self.hexagons:
            hexes.append({
                "index": h.index, "pants": h.pants, "mirror": h.which,
                "vertices_disk": [disk(v) for v in h.verts],
                "side_kind": h.side_kind,
                "side_edge": h.side_edge,
            })
        doc = {"format": "hexagon-decomposition-v1",
               "genus": self.genus,
               "hexagons": hexes,
               "labels": self.labels,
               "gluing": self.partner,
               "twist_adjustments": {str(k): v for k, v in sorted(self.twist_adjustments.items())}}
        return json.dumps(doc, sort_keys=True, indent=1)


def build_hexagon_decomposition(spec: SurfaceSpec, hol: Holonomy,
                                tol: float = hp.GEO_TOL) -> HexagonDecomposition:
    """Slide hexagon feet onto the marked cuff points and wire up the gluing."""
    charts, slots = hol._charts, spec.node_slots()
    edge_ends = _edge_slots(spec, slots)

    # Foot slide per (node, cuff slot); both feet of a side move by it.  The
    # marked pair sits near the middle of the two feet configurations but
    # deliberately off the exact midpoint: the symmetric choice places
    # marked points on short cross-cuff geodesics, which the coder would
    # then reject as vertex-degenerate.
    drag: dict[tuple[int, int], float] = {}
    adjustments: dict[int, float] = {}
    for e, ((ku, cu), (kv, cv)) in enumerate(edge_ends):
        ell = spec.lengths[e]
        rho = math.remainder(spec.twists[e] * ell, ell / 2.0)
        mu = rho / 2.0 + 0.0137 * ell
        drag[(ku, cu)] = mu
        drag[(kv, cv)] = math.remainder(spec.twists[e] * ell - mu, ell / 2.0)
        adjustments[e] = mu

    hexagons: list[Hexagon] = []
    for k, chart in enumerate(charts):
        for which in (0, 1):
            verts = list(chart.verts[which])
            kinds = ["cuff" if j % 2 == 0 else "seam" for j in range(6)]
            edges: list[int | None] = [None] * 6
            for c in range(3):
                j = chart.cuff_side[which][c]
                edges[j] = slots[k][c][0]
                mover = hp.translation_along(chart.cuff_lines[which][c], drag[(k, c)])
                verts[j] = mover.apply(verts[j])
                verts[(j + 1) % 6] = mover.apply(verts[(j + 1) % 6])
            lines = []
            for j in range(6):
                if kinds[j] == "cuff":
                    c = [c for c in range(3) if chart.cuff_side[which][c] == j][0]
                    lines.append(chart.cuff_lines[which][c])
                else:
                    if hp.distance(verts[j], verts[(j + 1) % 6]) < tol:
                        raise DegenerateDecomposition("seam side collapsed")
                    lines.append(hp.line_through(verts[j], verts[(j + 1) % 6]))
            hexagons.append(Hexagon(index=2 * k + which, pants=k, which=which,
                                    verts=verts, side_kind=kinds, side_edge=edges,
                                    side_lines=lines, placement=hol._placements[k]))
    _check_simple(hexagons)
    for h in hexagons:
        h.interior = _interior_point(h)

    n_slots = 6 * len(hexagons)
    partner = [-1] * n_slots
    transfers: list[Isometry | None] = [None] * n_slots

    def glue(slot_a: int, slot_b: int):
        if partner[slot_a] >= 0 or partner[slot_b] >= 0:
            raise DegenerateDecomposition("slot glued twice")
        ha, ja = divmod(slot_a, 6)
        hb, jb = divmod(slot_b, 6)
        pa0, pa1 = hexagons[ha].side_segment(ja)
        pb0, pb1 = hexagons[hb].side_segment(jb)
        partner[slot_a], partner[slot_b] = slot_b, slot_a
        # a shared edge carries opposite orientations from its two hexagons
        try:
            transfers[slot_a] = hp.isometry_taking(pb0, pb1, pa1, pa0)
            transfers[slot_b] = hp.isometry_taking(pa0, pa1, pb1, pb0)
        except ValueError as exc:
            raise DegenerateDecomposition(f"glued sides are not isometric: {exc}") from exc

    # seams pair a hexagon with its mirror inside the same pants
    for k in range(len(charts)):
        for j0, j1 in ((1, 5), (3, 3), (5, 1)):
            glue(6 * (2 * k) + j0, 6 * (2 * k + 1) + j1)

    # cuff arcs pair across pants-graph edges, matched by circle phase:
    # the far side sees phase  twist*L - phi, and arcs of length L/2 must
    # coincide on the circle
    for e, ((ku, cu), (kv, cv)) in enumerate(edge_ends):
        ell, disp = spec.lengths[e], spec.twists[e] * spec.lengths[e]
        near, far = [], []
        for which in (0, 1):
            j = charts[ku].cuff_side[which][cu]
            p0 = hexagons[2 * ku + which].verts[j]
            near.append((6 * (2 * ku + which) + j, charts[ku].phase(which, cu, p0)))
        for which in (0, 1):
            j = charts[kv].cuff_side[which][cv]
            p0 = hexagons[2 * kv + which].verts[j]
            far.append((6 * (2 * kv + which) + j, charts[kv].phase(which, cv, p0)))
        for slot_b, s_far in far:
            hits = [slot_a for slot_a, s_near in near
                    if abs(math.remainder(disp - s_far - ell / 2.0 - s_near, ell)) < 1e-7]
            if len(hits) != 1:
                raise DegenerateDecomposition("cuff arc matching failed")
            glue(hits[0], slot_b)

    if any(p < 0 for p in partner):
        raise DegenerateDecomposition("gluing is not a complete involution")
    # canonical lift of each mirror hexagon: adjacent to its sibling across
    # the first seam side
    for k in range(len(charts)):
        hexagons[2 * k + 1].placement = hexagons[2 * k].placement @ transfers[6 * (2 * k) + 1]
    labels = [f"e{i + 1}" for i in range(n_slots)]
    dec = HexagonDecomposition(genus=spec.genus, hexagons=hexagons, partner=partner,
                               transfers=[t for t in transfers], labels=labels,
                               twist_adjustments=adjustments)
    _validate_decomposition(dec)
    return dec


def _interior_point(h: Hexagon) -> complex:
    poly = h.klein_poly()
    cand = sum(poly) / 6.0
    if not hp.point_in_polygon(cand, poly):
        mids = [(poly[j] + poly[(j + 1) % 6]) / 2.0 for j in range(6)]
        cand = (mids[0] + mids[3]) / 2.0
        if not hp.point_in_polygon(cand, poly):
            raise DegenerateDecomposition("no interior point found for hexagon")
    return hp.klein_to_halfplane(cand)


def _check_simple(hexagons: list[Hexagon]):
    for h in hexagons:
        poly = h.klein_poly()
        for i in range(6):
            for j in range(i + 1, 6):
                if hp.segment_intersection(poly[i], poly[(i + 1) % 6],
                                           poly[j], poly[(j + 1) % 6]) is not None:
                    raise DegenerateDecomposition("hexagon sides cross after sliding")


def _validate_decomposition(dec: HexagonDecomposition):
    for slot in range(dec.n_slots()):
        back = dec.transfers[slot] @ dec.transfers[dec.partner[slot]]
        if not back.is_identity(1e-8):
            raise DegenerateDecomposition("transfer pair is not inverse")
    # composing transfers around any vertex must return to +-identity
    for h in dec.hexagons:
        for v in range(6):
            cur_h, cur_v = h.index, v
            total = Isometry.identity()
            for _ in range(16):
                slot = dec.slot(cur_h, cur_v)
                total = total @ dec.transfers[slot]
                p = dec.partner[slot]
                cur_h, side = dec.hexagon_of_slot(p)
                cur_v = (side + 1) % 6
                if cur_h == h.index and cur_v == v:
                    break
            else:
                raise DegenerateDecomposition("vertex cycle did not close")
            if not total.is_identity(1e-7):
                raise DegenerateDecomposition("vertex cycle holonomy differs from identity")


# ---------------------------------------------------------------------------
# constants ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsLedger:
    """Derived constants of the surface used by the verification suites.

    combinatorial_rate_bound caps coding letters per unit of geodesic
    length; census_base_bound and census_exponent_bound are the base and
    exponent coefficients of the census growth bound.  census_base_closed
    is the rounded closed form of the base and smaller_base records which
    of the two evaluation paths gives the smaller value.
    """

    genus: int
    systole: float
    interaction_bound: float
    pants_length_bound: float
    combinatorial_rate_bound: float
    census_base_bound: float
    census_base_closed: float
    smaller_base: str
    census_exponent_bound: float
    systole_log_flag: bool
    lengths_within_pants_bound: bool

    def to_json(self) -> str:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["format"] = "constants-ledger-v1"
        return json.dumps(doc, sort_keys=True, indent=1)


def constants_ledger(spec: SurfaceSpec, systole: float) -> ConstantsLedger:
    g = spec.genus
    interaction = 4.0 / systole ** 2
    bers = 26.0 * (g - 1)
    rate = interaction * (21 * g - 21) * bers + 12.0 / systole
    base = math.e * rate
    closed = 5974.0 * (g - 1) ** 2 / systole ** 2
    return ConstantsLedger(
        genus=g,
        systole=systole,
        interaction_bound=interaction,
        pants_length_bound=bers,
        combinatorial_rate_bound=rate,
        census_base_bound=base,
        census_base_closed=closed,
        smaller_base="closed" if closed < base else "exact",
        census_exponent_bound=385.0 * (g - 1),
        systole_log_flag=systole <= 2.0 * math.log(4 * g - 2) + 1e-12,
        lengths_within_pants_bound=all(ell <= bers for ell in spec.lengths),
    )
