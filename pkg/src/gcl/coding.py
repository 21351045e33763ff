"""Symbolic coding of closed geodesics by the hexagon decomposition.

A closed geodesic is developed through the hexagon tiling of the universal
cover: starting from a lift of the axis near the basepoint, the walk
crosses one glued side after another, applying the precomputed transfer
isometries so the active hexagon always sits in its own chart.  The word
records, in order, the sides through which the geodesic leaves each
glued edge into the next hexagon; one period is detected by returning to
the starting side orbit with holonomy matching the geodesic's matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import census as cn
from . import hyperbolic as hp
from .census import GroupBall, ClosedGeodesic
from .errors import BudgetExceeded, OnSkeleton, VertexDegeneracy
from .hyperbolic import Isometry
from .surface import HexagonDecomposition, Holonomy

VERTEX_TOL = 1e-7
HOLONOMY_TOL = 1e-7


@dataclass(frozen=True)
class Chord:
    """One geodesic sub-segment inside a hexagon, in that hexagon's chart."""

    hexagon: int
    entry: complex
    exit: complex


@dataclass
class SymbolicWord:
    """Cyclic coding of a closed geodesic over the edge-side alphabet.

    letters[t] is the slot through which the geodesic leaves the glued
    edge into hexagon chords[t].hexagon; placements[t] maps that chart
    onto the lift the development actually visited, and forward_points[t]
    is the forward ideal endpoint of the axis seen in chart coordinates.
    """

    letters: tuple[int, ...]
    labels: tuple[str, ...]
    chords: list[Chord]
    placements: list[Isometry]
    forward_points: list[np.ndarray]
    matrix: Isometry

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class ItineraryCursor:
    word: SymbolicWord
    position: int

    def __post_init__(self):
        if not 0 <= self.position < len(self.word):
            raise IndexError("cursor position out of range")

    def letter(self, t: int = 0) -> int:
        return self.word.letters[(self.position + t) % len(self.word)]


def combinatorial_length(word: SymbolicWord) -> int:
    return len(word.letters)


def forward_boundary_point(cursor: ItineraryCursor) -> np.ndarray:
    """Forward ideal endpoint of the developed axis, in chart coordinates."""
    return cursor.word.forward_points[cursor.position]


# ---------------------------------------------------------------------------
# tile location
# ---------------------------------------------------------------------------

def locate_tile(dec: HexagonDecomposition, ball: GroupBall,
                z: complex) -> tuple[int, Isometry] | None:
    """Hexagon index and placement of a tile containing the surface point z.

    Searches deck translates of the canonical hexagon lifts, nearest
    first; returns None when z sits on a tile boundary within tolerance.
    """
    order = np.argsort(ball.disp)
    for gi in order:
        g = Isometry(ball.mats[gi])
        for h in dec.hexagons:
            phi = g @ h.placement
            w = phi.inverse().apply(z)
            k = hp.to_klein(w)
            poly = h.klein_poly()
            if hp.point_in_polygon(k, poly):
                return h.index, phi
        if ball.disp[gi] > hp.distance(ball.o, z) + 2.0 * ball.dirichlet_radius + 1.0:
            break
    return None


# ---------------------------------------------------------------------------
# development
# ---------------------------------------------------------------------------

def _skeleton_check(hol: Holonomy, geo: ClosedGeodesic):
    for e, pm in enumerate(hol.pants_curve_matrices):
        ell = hp.translation_length(pm)
        k = round(geo.length / ell)
        if k >= 1 and abs(geo.length - k * ell) < 1e-7:
            ball = cn.ball_for_length(hol, geo.length + 0.1)
            word = hol.pants_curve_words[e] * k
            if cn.class_index(hol, ball, hol.matrix_of_word(word), word) == \
               cn.class_index(hol, ball, geo.matrix, geo.word):
                raise OnSkeleton(f"geodesic is the cuff class {e} to the power {k}")


def _crossings_in_chart(dec: HexagonDecomposition, h: int, line: hp.GeodesicLine):
    """Side crossings of the chart-coordinate axis with hexagon h.

    Returns (side, param, klein point) triples, parametrized along the
    Klein chord from the backward to the forward ideal endpoint.
    """
    a = hp.boundary_klein(line.p_neg)
    b = hp.boundary_klein(line.p_pos)
    poly = dec.hexagons[h].klein_poly()
    out = []
    for j in range(6):
        hit = hp.segment_intersection(a, b, poly[j], poly[(j + 1) % 6])
        if hit is not None:
            t, s, pt = hit
            out.append((j, t, pt))
    return out, (a, b)


def _vertex_guard(dec: HexagonDecomposition, h: int, pt_klein: complex, side: int):
    z = hp.klein_to_halfplane(pt_klein)
    for v in (dec.hexagons[h].verts[side], dec.hexagons[h].verts[(side + 1) % 6]):
        if hp.distance(z, v) < VERTEX_TOL:
            raise VertexDegeneracy(
                f"axis passes within {VERTEX_TOL} of a vertex of hexagon {h}")


def code_word(geo: ClosedGeodesic, dec: HexagonDecomposition, hol: Holonomy,
              max_steps: int | None = None) -> SymbolicWord:
    """Symbolic word of one period of the closed geodesic.

    Raises OnSkeleton for cuff classes and VertexDegeneracy when the axis
    passes too close to a hexagon vertex for reliable coding.
    """
    ball = cn.group_ball(hol, 7.0)
    _skeleton_check(hol, geo)
    mat, word = cn.accurate_element(ball, geo.matrix.m, geo.word)
    m_iso = Isometry(mat)
    line = hp.axis(m_iso)
    foot = hp.line_point(line, hp.line_param(line, ball.o))

    start = None
    for nudge in range(8):
        pt = hp.line_point(line, hp.line_param(line, ball.o) + 0.0137 * nudge)
        start = locate_tile(dec, ball, pt)
        if start is not None:
            foot = pt
            break
    if start is None:
        raise VertexDegeneracy("could not place the axis inside any tile")

    h, phi = start
    if max_steps is None:
        max_steps = int(200 * geo.length) + 64

    letters: list[int] = []
    chords: list[Chord] = []
    placements: list[Isometry] = []
    first_slot, first_phi = None, None
    entry_pt = None          # chart-coordinate entry point of the current chord
    entry_side = None

    for _ in range(max_steps):
        chart_line = line.transformed(phi.inverse())
        hits, (ka, kb) = _crossings_in_chart(dec, h, chart_line)
        if entry_pt is None:
            t0 = _chord_param(ka, kb, hp.to_klein(phi.inverse().apply(foot)))
            ahead = [hit for hit in hits if hit[1] > t0]
        else:
            t0 = _chord_param(ka, kb, hp.to_klein(entry_pt))
            # the axis meets each side line once, so dropping the entry
            # side leaves exactly the forward crossings
            ahead = [hit for hit in hits if hit[0] != entry_side and hit[1] > t0 - 1e-9]
        if not ahead:
            raise VertexDegeneracy("development lost the axis (no exit crossing)")
        j, _, kpt = min(ahead, key=lambda hit: hit[1])
        _vertex_guard(dec, h, kpt, j)
        exit_pt = hp.klein_to_halfplane(kpt)
        slot = dec.slot(h, j)

        if entry_pt is not None:
            chords.append(Chord(hexagon=h, entry=entry_pt, exit=exit_pt))
            placements.append(phi)
        if first_slot is None:
            first_slot, first_phi = slot, phi
        elif slot == first_slot:
            # one period closes when the deck element carrying the first
            # crossing to this one translates along the axis by the full
            # geodesic length (k-fold returns of a primitive root differ
            # in length, mid-period slot repeats differ in axis)
            deck = phi @ first_phi.inverse()
            if deck.trace() > 2.0 + hp.TRACE_TOL:
                dlen = hp.translation_length(deck)
                if abs(dlen - geo.length) < 1e-4:
                    dax = hp.axis(deck)
                    if hp.boundary_close(dax.p_neg, line.p_neg, 1e-5) and \
                       hp.boundary_close(dax.p_pos, line.p_pos, 1e-5):
                        m_iso = deck
                        break

        transfer = dec.transfers[slot]
        nxt_slot = dec.partner[slot]
        entry_pt = transfer.inverse().apply(exit_pt)
        entry_side = nxt_slot % 6
        letters.append(nxt_slot)
        phi = phi @ transfer
        h = dec.hexagon_of_slot(nxt_slot)[0]
    else:
        raise BudgetExceeded("development exceeded the step budget")

    if not letters or len(letters) != len(chords):
        raise VertexDegeneracy("inconsistent coding period")
    # forward endpoints from the closed-up holonomy, which is exact to the
    # accuracy of the transfer data
    att = hp.axis(m_iso).p_pos
    fpoints = [p.inverse().apply_boundary(att) for p in placements]
    return SymbolicWord(letters=tuple(letters),
                        labels=tuple(dec.labels[s] for s in letters),
                        chords=chords, placements=placements,
                        forward_points=fpoints, matrix=m_iso)


def _chord_param(a: complex, b: complex, p: complex) -> float:
    d = b - a
    return ((p.real - a.real) * d.real + (p.imag - a.imag) * d.imag) / (abs(d) ** 2)
