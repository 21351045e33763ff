"""Self- and pairwise intersection numbers of closed geodesics.

Two independent algorithms are provided.  The chord algorithm classifies
transverse crossings of the coded sub-segments inside each hexagon by
whether the two arcs share their start edge, their end edge, both or
neither.  The lift algorithm counts crossings of the axis with the other
lifts of the curve inside one period window on the axis; every unordered
pair of strands at a surface point contributes exactly two such window
crossings, so half the window count is the self-intersection number, with
multiplicity handled for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import census as cn
from . import coding as cdg
from . import hyperbolic as hp
from .census import ClosedGeodesic, GroupBall
from .coding import SymbolicWord
from .errors import EdgeAmbiguity, InputError, WindowTooSmall
from .hyperbolic import Isometry
from .surface import HexagonDecomposition, Holonomy

CROSSING_TYPES = ("1", "2a", "2b", "3")


@dataclass(frozen=True)
class ChordSpec:
    """A coded sub-segment with its start and end edge slots."""

    curve: int
    index: int
    hexagon: int
    entry: complex
    exit: complex
    start_slot: int
    end_slot: int


@dataclass(frozen=True)
class CrossingRecord:
    chord_a: ChordSpec
    chord_b: ChordSpec
    point: complex            # chart coordinates of the crossing
    kind: str                 # '1' | '2a' | '2b' | '3'


@dataclass(frozen=True)
class IntersectionCount:
    total: int
    by_type: dict[str, int]
    multiplicity_adjusted: bool = False

    def __post_init__(self):
        if sum(self.by_type.values()) != self.total:
            raise ValueError("type counts do not add up")


def chord_specs(word: SymbolicWord, dec: HexagonDecomposition, curve: int = 0) -> list[ChordSpec]:
    """Chord records of a coded curve: start edge, end edge, endpoints."""
    n = len(word)
    out = []
    for t in range(n):
        ch = word.chords[t]
        out.append(ChordSpec(curve=curve, index=t, hexagon=ch.hexagon,
                             entry=ch.entry, exit=ch.exit,
                             start_slot=word.letters[t],
                             end_slot=dec.partner[word.letters[(t + 1) % n]]))
    return out


def _kind(a: ChordSpec, b: ChordSpec) -> str:
    same_start = a.start_slot == b.start_slot
    same_end = a.end_slot == b.end_slot
    if same_start and same_end:
        return "3"
    if same_start:
        return "2a"
    if same_end:
        return "2b"
    return "1"


def classify_crossings(chords: list[ChordSpec], others: list[ChordSpec] | None = None,
                       dec: HexagonDecomposition | None = None,
                       tol: float = hp.GEO_TOL) -> list[CrossingRecord]:
    """Transverse crossings among chords, classified by shared edges.

    With `others` given, only crossings between the two families count.
    Chords are straight in the Klein chart of their hexagon, so a plain
    segment predicate decides; crossings within `tol` of a glued edge are
    deduplicated against the neighbouring hexagon when `dec` is provided.
    """
    by_hex: dict[int, list[ChordSpec]] = {}
    for c in (chords if others is None else chords + others):
        by_hex.setdefault(c.hexagon, []).append(c)
    records = []
    for h, fam in sorted(by_hex.items()):
        for i in range(len(fam)):
            for j in range(i + 1, len(fam)):
                a, b = fam[i], fam[j]
                if others is not None and a.curve == b.curve:
                    continue
                hit = hp.segment_intersection(hp.to_klein(a.entry), hp.to_klein(a.exit),
                                              hp.to_klein(b.entry), hp.to_klein(b.exit))
                if hit is None:
                    continue
                pt = hp.klein_to_halfplane(hit[2])
                records.append(CrossingRecord(chord_a=a, chord_b=b, point=pt,
                                              kind=_kind(a, b)))
    if dec is not None:
        records = _dedup_edge_crossings(records, dec, tol)
    records.sort(key=lambda r: (r.chord_a.curve, r.chord_a.index,
                                r.chord_b.curve, r.chord_b.index))
    return records


def _dedup_edge_crossings(records, dec: HexagonDecomposition, tol: float):
    """Single-count crossings that sit on a glued edge within tolerance.

    Such a crossing appears once from each adjacent hexagon; it is kept
    for the smaller hexagon index after checking the mirror copy exists.
    """
    out = []
    for r in records:
        near_slot = None
        for j in range(6):
            seg = dec.segment(dec.slot(r.chord_a.hexagon, j))
            if _dist_to_segment(r.point, seg) < tol:
                near_slot = dec.slot(r.chord_a.hexagon, j)
                break
        if near_slot is None:
            out.append(r)
            continue
        partner = dec.partner[near_slot]
        h2 = dec.hexagon_of_slot(partner)[0]
        mirror = dec.transfers[partner].apply(r.point)
        twins = [s for s in records
                 if s.chord_a.hexagon == h2 and hp.distance(s.point, mirror) < 10 * tol]
        if not twins:
            raise EdgeAmbiguity("crossing on a glued edge lacks its mirror copy")
        keep = (r.chord_a.hexagon, r.chord_a.index) <= (h2, min(t.chord_a.index for t in twins))
        if r.chord_a.hexagon == h2:
            keep = r.chord_a.index <= min(t.chord_a.index for t in twins)
        if keep:
            out.append(r)
    return out


def _dist_to_segment(z: complex, seg: tuple[complex, complex]) -> float:
    a, b = hp.to_klein(seg[0]), hp.to_klein(seg[1])
    k = hp.to_klein(z)
    d = b - a
    t = ((k.real - a.real) * d.real + (k.imag - a.imag) * d.imag) / (abs(d) ** 2)
    if not 0.0 <= t <= 1.0:
        return math.inf
    return hp.distance(z, hp.klein_to_halfplane(a + t * d))


# ---------------------------------------------------------------------------
# word periodicity (powers)
# ---------------------------------------------------------------------------

def word_root(word) -> tuple[tuple, int]:
    """Primitive cyclic root of a word and the power it is raised to."""
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[p:] + word[:p] == tuple(word):
            return tuple(word[:p]), n // p
    return tuple(word), 1


# ---------------------------------------------------------------------------
# chord-based intersection numbers
# ---------------------------------------------------------------------------

def self_intersection(geo: ClosedGeodesic, dec: HexagonDecomposition, hol: Holonomy,
                      word: SymbolicWord | None = None) -> IntersectionCount:
    """Geometric self-intersection number, computed from hexagon chords.

    Powers of a primitive class are scored as multiplicity-squared copies
    of the primitive count, matching the weighting of intersection points
    by the number of strand pairs through them.
    """
    root, k = word_root(geo.word)
    if k > 1:
        m = hol.matrix_of_word(root)
        base = ClosedGeodesic(word=root, word_str=hol.word_to_string(root),
                              matrix=m, length=hp.translation_length(m), primitive=True)
        inner = self_intersection(base, dec, hol)
        return IntersectionCount(total=k * k * inner.total,
                                 by_type={t: k * k * v for t, v in inner.by_type.items()},
                                 multiplicity_adjusted=True)
    if word is None:
        word = cdg.code_word(geo, dec, hol)
    chords = chord_specs(word, dec)
    records = classify_crossings(chords, dec=dec)
    by_type = {t: 0 for t in CROSSING_TYPES}
    for r in records:
        by_type[r.kind] += 1
    return IntersectionCount(total=len(records), by_type=by_type)


def pair_intersection(geo1: ClosedGeodesic, geo2: ClosedGeodesic,
                      dec: HexagonDecomposition, hol: Holonomy,
                      words: tuple[SymbolicWord, SymbolicWord] | None = None) -> IntersectionCount:
    """Geometric intersection number of two distinct classes."""
    ball = cn.ball_for_length(hol, max(geo1.length, geo2.length) + 0.1)
    if cn.class_index(hol, ball, geo1.matrix, geo1.word) == \
       cn.class_index(hol, ball, geo2.matrix, geo2.word):
        raise InputError("pair_intersection requires two distinct classes; "
                         "use self_intersection for a single class")
    root1, k1 = word_root(geo1.word)
    root2, k2 = word_root(geo2.word)
    if k1 > 1 or k2 > 1:
        g1 = _root_geodesic(geo1, root1, hol)
        g2 = _root_geodesic(geo2, root2, hol)
        inner = pair_intersection(g1, g2, dec, hol)
        return IntersectionCount(total=k1 * k2 * inner.total,
                                 by_type={t: k1 * k2 * v for t, v in inner.by_type.items()},
                                 multiplicity_adjusted=True)
    if words is None:
        words = (cdg.code_word(geo1, dec, hol), cdg.code_word(geo2, dec, hol))
    ch1 = chord_specs(words[0], dec, curve=0)
    ch2 = chord_specs(words[1], dec, curve=1)
    records = classify_crossings(ch1, ch2, dec=dec)
    by_type = {t: 0 for t in CROSSING_TYPES}
    for r in records:
        by_type[r.kind] += 1
    return IntersectionCount(total=len(records), by_type=by_type)


def _root_geodesic(geo: ClosedGeodesic, root, hol: Holonomy) -> ClosedGeodesic:
    m = hol.matrix_of_word(root)
    return ClosedGeodesic(word=tuple(root), word_str=hol.word_to_string(root),
                          matrix=m, length=hp.translation_length(m), primitive=True)


# ---------------------------------------------------------------------------
# linked-lift oracle
# ---------------------------------------------------------------------------

def _lift_radius(r_hat: float, period_length: float, lift_length: float) -> float:
    """Certified displacement radius producing every lift crossing the window.

    A lift crossing the centered period window passes within
    r_hat + period/2 of the basepoint; sliding its representative by deck
    powers bounds the orbit point via the two-point distance formula.
    """
    a = r_hat + period_length / 2.0
    val = (math.cosh(a) * math.cosh(r_hat) * math.cosh(lift_length / 2.0)
           + math.sinh(a) * math.sinh(r_hat))
    return math.acosh(val) + 0.2


def _axis_angles(mat: np.ndarray) -> tuple[float, float]:
    line = hp.axis(Isometry(mat))
    return hp.boundary_angle(line.p_neg), hp.boundary_angle(line.p_pos)


def _interleave(a1: float, a2: float, b1: float, b2: float) -> bool:
    """Whether unordered boundary pairs {a1,a2} and {b1,b2} link."""
    span = (a2 - a1) % (2.0 * math.pi)
    in1 = (b1 - a1) % (2.0 * math.pi) < span
    in2 = (b2 - a1) % (2.0 * math.pi) < span
    return in1 != in2


def _window_crossings(hol: Holonomy, target: ClosedGeodesic, lift_of: ClosedGeodesic,
                      window: float | None) -> int:
    """Crossings of lifts of `lift_of` with one period window on `target`'s axis."""
    ball0 = cn.group_ball(hol, 7.0)
    tmat, tword = cn.accurate_element(ball0, target.matrix.m, target.word)
    needed = _lift_radius(ball0.dirichlet_radius, target.length, lift_of.length)
    if window is None:
        window = needed
    elif window < needed - 1e-9:
        raise WindowTooSmall(f"window {window:.3f} below certified radius {needed:.3f}")
    ball = cn.group_ball(hol, window)
    lmat, _ = cn.accurate_element(ball, lift_of.matrix.m, lift_of.word)

    ax = hp.axis(Isometry(tmat))
    s0 = hp.line_param(ax, ball.o)
    a_neg, a_pos = _axis_angles(tmat)
    base_line = hp.axis(Isometry(lmat))
    ids = ball.within(window)
    mats = ball.mats[ids]
    pn = mats @ np.asarray(base_line.p_neg)
    pp = mats @ np.asarray(base_line.p_pos)
    ang_n = (-2.0 * np.arctan2(pn[:, 1], pn[:, 0])) % (2.0 * math.pi)
    ang_p = (-2.0 * np.arctan2(pp[:, 1], pp[:, 0])) % (2.0 * math.pi)

    seen = set()
    lifts = []
    for i in range(len(ids)):
        key = (round(ang_n[i], 8), round(ang_p[i], 8))
        if key in seen:
            continue
        seen.add(key)
        lifts.append((ang_n[i], ang_p[i], pn[i], pp[i]))

    for shift in range(64):
        lo = s0 - target.length / 2.0 + 1e-4 * 0.6180339887 * (1 + shift)
        hi = lo + target.length
        params = []
        ok = True
        for an, ap, vn, vp in lifts:
            same = (abs(an - a_neg) < 1e-9 and abs(ap - a_pos) < 1e-9) or \
                   (abs(an - a_pos) < 1e-9 and abs(ap - a_neg) < 1e-9)
            if same:
                continue
            if not _interleave(a_neg, a_pos, an, ap):
                continue
            pt = _line_crossing(ax, vn, vp)
            s = hp.line_param(ax, pt)
            if abs(s - lo) < 1e-7 or abs(s - hi) < 1e-7:
                ok = False
                break
            if lo <= s < hi:
                params.append(s)
        if ok:
            return len(params)
    raise EdgeAmbiguity("period window could not be separated from crossings")


def _line_crossing(line: hp.GeodesicLine, pn: np.ndarray, pp: np.ndarray) -> complex:
    a = hp.boundary_klein(line.p_neg)
    b = hp.boundary_klein(line.p_pos)
    c = hp.boundary_klein(hp.normalize_boundary(pn))
    d = hp.boundary_klein(hp.normalize_boundary(pp))
    r, s = b - a, d - c
    denom = r.real * s.imag - r.imag * s.real
    t = ((c - a).real * s.imag - (c - a).imag * s.real) / denom
    return hp.klein_to_halfplane(a + t * r)


def linking_oracle(geo1: ClosedGeodesic, geo2: ClosedGeodesic | None,
                   hol: Holonomy, window: float | None = None) -> int:
    """Intersection number from linked lift endpoints on the boundary circle.

    For a single curve, each unordered strand pair at a surface point is
    seen twice along one period of the axis, so the window count halves;
    powers contribute the square (or product) of their multiplicities.
    """
    root1, k1 = word_root(geo1.word)
    g1 = _root_geodesic(geo1, root1, hol) if k1 > 1 else geo1
    if geo2 is None:
        count = _window_crossings(hol, g1, g1, window)
        if count % 2 != 0:
            raise EdgeAmbiguity("odd window count in self-intersection oracle")
        return k1 * k1 * (count // 2)
    root2, k2 = word_root(geo2.word)
    g2 = _root_geodesic(geo2, root2, hol) if k2 > 1 else geo2
    return k1 * k2 * _window_crossings(hol, g1, g2, window)
