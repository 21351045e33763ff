"""Enumeration of closed geodesics up to a length cut-off.

Closed geodesics correspond to conjugacy classes of the deck group.  The
engine enumerates a full displacement ball  { g : d(o, g o) <= C }  by
breadth-first closure over a move set.  The radius C comes from the
circumradius of the Dirichlet domain at the basepoint: every geodesic of
length <= T has a lift passing within the circumradius of o, and the
conjugate translating along that lift has displacement
2 asinh(cosh(circumradius) sinh(T/2)).  The circumradius is found by
clipping perpendicular bisectors in the Klein chart, where they are
straight lines; a polygon cut from a subset of orbit points only
overestimates it, so the iteration is safe while it converges, and the
fixed point is audited by checking closure under products of short
elements.

Conjugacy classes are deduplicated geometrically: each element is pulled
to a conjugate whose axis passes near the basepoint, and the class key is
the smallest enumeration index among all near-axis conjugates reachable
with bounded conjugators.  That key is an integer invariant of the class,
immune to floating-point boundary effects.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from . import hyperbolic as hp
from .errors import BudgetExceeded, NotHyperbolic, RadiusTooSmall
from .hyperbolic import Isometry
from .surface import Holonomy, SurfaceSpec, Word, invert_word, reduce_word

LENGTH_TOL = 1e-9


# ---------------------------------------------------------------------------
# word utilities
# ---------------------------------------------------------------------------

def cyclic_reduce(word: Word) -> Word:
    w = reduce_word(word)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = reduce_word(w[1:-1])
    return w


def dedup_signature(word: Word) -> Word:
    """Canonical form shared by all conjugates and inverses of a word.

    Cyclically reduces, then takes the lexicographic minimum over all
    rotations of the word and of its inverse.
    """
    w = cyclic_reduce(tuple(word))
    if not w:
        return ()
    best = None
    for cand in (w, invert_word(w)):
        for r in range(len(cand)):
            rot = cand[r:] + cand[:r]
            if best is None or rot < best:
                best = rot
    return best


# ---------------------------------------------------------------------------
# distance helpers
# ---------------------------------------------------------------------------

def pair_distance_bound(a: float, b: float, s: float, same_side: bool = False) -> float:
    """Distance between points at distances a, b from a geodesic, feet s apart.

    cosh d = cosh a cosh b cosh s -+ sinh a sinh b; the opposite-side sign
    (+) dominates, so it serves as an upper bound when the side is unknown.
    """
    sign = -1.0 if same_side else 1.0
    val = math.cosh(a) * math.cosh(b) * math.cosh(s) + sign * math.sinh(a) * math.sinh(b)
    return math.acosh(max(val, 1.0))


def _displacements(mats: np.ndarray, o: complex) -> np.ndarray:
    num = mats[:, 0, 0] * o + mats[:, 0, 1]
    den = mats[:, 1, 0] * o + mats[:, 1, 1]
    z = num / den
    d2 = np.abs(z - o) ** 2
    arg = 1.0 + d2 / (2.0 * z.imag * o.imag)
    return np.arccosh(np.maximum(arg, 1.0))


def _sign_normalize(mats: np.ndarray) -> np.ndarray:
    tr = mats[:, 0, 0] + mats[:, 1, 1]
    sign = np.where(tr < 0, -1.0, 1.0)
    return mats * sign[:, None, None]


def _invert(mat: np.ndarray) -> np.ndarray:
    a, b, c, d = mat.ravel()
    return np.array([[d, -b], [-c, a]])


# ---------------------------------------------------------------------------
# robust matrix table
# ---------------------------------------------------------------------------

_CELL = 1e-5
_MATCH = 1e-8
_EDGE = 1e-3


class _MatrixTable:
    """Index det-1 matrices up to sign with integer-bucket hashing.

    Distinct deck transformations are far apart entrywise while repeated
    computations of one element differ by rounding noise only, so a coarse
    bucket plus neighbour probes near cell boundaries decides equality
    exactly.
    """

    def __init__(self):
        self.buckets: dict[tuple, list[int]] = {}
        self.flats: list[tuple] = []

    def __len__(self):
        return len(self.flats)

    def lookup_flat(self, flat) -> int | None:
        base = tuple(math.floor(x / _CELL) for x in flat)
        hit = self._match(base, flat)
        if hit is not None:
            return hit
        probes = [[b] for b in base]
        for i in range(4):
            f = flat[i] / _CELL - base[i]
            if f < _EDGE:
                probes[i].append(base[i] - 1)
            elif f > 1.0 - _EDGE:
                probes[i].append(base[i] + 1)
        for a in probes[0]:
            for b in probes[1]:
                for c in probes[2]:
                    for d in probes[3]:
                        key = (a, b, c, d)
                        if key != base:
                            hit = self._match(key, flat)
                            if hit is not None:
                                return hit
        return None

    def _match(self, key, flat) -> int | None:
        for idx in self.buckets.get(key, ()):
            s = self.flats[idx]
            if (abs(s[0] - flat[0]) < _MATCH and abs(s[1] - flat[1]) < _MATCH
                    and abs(s[2] - flat[2]) < _MATCH and abs(s[3] - flat[3]) < _MATCH):
                return idx
        return None

    def insert_flat(self, flat) -> int:
        idx = len(self.flats)
        self.flats.append(tuple(flat))
        key = tuple(math.floor(x / _CELL) for x in flat)
        self.buckets.setdefault(key, []).append(idx)
        return idx


# ---------------------------------------------------------------------------
# displacement ball
# ---------------------------------------------------------------------------

class GroupBall:
    """All deck transformations with displacement at most `coverage`.

    Every conjugacy class whose minimal-displacement conjugate fits in the
    coverage radius has a representative here; the guarantee rests on the
    Dirichlet circumradius at the basepoint and closure of the move set.
    """

    def __init__(self, hol: Holonomy, min_coverage: float, node_budget: int = 10 ** 8):
        self.hol = hol
        self.node_budget = node_budget
        self.o = hol.basepoint
        self._build(min_coverage)

    def _build(self, target: float):
        o = self.o
        gen_moves = []
        for i, g in enumerate(self.hol.generators):
            gen_moves.append((g.m, (i + 1,)))
            gen_moves.append((g.inverse().m, (-(i + 1),)))
        r_hat = 3.5
        self._fresh_table()
        moves = list(gen_moves)
        prune = target + r_hat + 0.25
        self._bfs(moves, prune, range(0, 1))
        for _ in range(12):
            r_new = self._dirichlet_radius()
            move_ids = [i for i in self.within(2.0 * r_new + 0.25) if self.disp[i] > 1e-9]
            new_prune = target + r_new + 0.25
            grew = new_prune > prune + 1e-9
            prune = max(prune, new_prune)
            new_moves = gen_moves + [(self.mats[i], self.words[i]) for i in move_ids]
            changed = len(new_moves) != len(moves) or grew
            moves = new_moves
            before = len(self.words)
            self._bfs(moves, prune, range(len(self.words)))
            if not changed and len(self.words) == before and self._closure_ok(move_ids, target):
                self.dirichlet_radius = r_new
                self.coverage = target
                self.prune = prune
                return
        raise BudgetExceeded("ball enumeration did not stabilize")

    def _fresh_table(self):
        self._table = _MatrixTable()
        self.words: list[Word] = []
        flat = (1.0, 0.0, 0.0, 1.0)
        self._table.insert_flat(flat)
        self.words.append(())
        self._sync_arrays()

    def _sync_arrays(self):
        self.mats = np.array(self._table.flats).reshape(-1, 2, 2)
        self.disp = _displacements(self.mats, self.o)
        num = self.mats[:, 0, 0] * self.o + self.mats[:, 0, 1]
        den = self.mats[:, 1, 0] * self.o + self.mats[:, 1, 1]
        self.orbit = num / den

    def _bfs(self, moves, prune, seed_indices):
        o = self.o
        table, words = self._table, self.words
        move_mats = np.array([m for m, _ in moves])
        move_words = [w for _, w in moves]
        queue = list(seed_indices)
        head = 0
        mats_list = [np.array(f).reshape(2, 2) for f in table.flats]
        while head < len(queue):
            layer = queue[head:head + 256]
            head += len(layer)
            base = np.array([mats_list[i] for i in layer])
            prods = _sign_normalize(np.einsum("fij,kjl->fkil", base, move_mats).reshape(-1, 2, 2))
            ds = _displacements(prods, o)
            ok = np.nonzero(ds <= prune)[0]
            flats = prods.reshape(-1, 4)
            for j in ok:
                if len(words) > self.node_budget:
                    raise BudgetExceeded("ball enumeration exceeded the node budget")
                flat = flats[j]
                idx = table.lookup_flat(flat)
                src = layer[j // len(moves)]
                word = reduce_word(words[src] + move_words[j % len(moves)])
                if idx is not None:
                    if len(word) < len(words[idx]):
                        words[idx] = word
                    continue
                idx = table.insert_flat(flat)
                words.append(word)
                mats_list.append(flat.reshape(2, 2))
                queue.append(idx)
        self._sync_arrays()

    def _dirichlet_radius(self) -> float:
        center = Isometry(np.array([[1.0, -self.o.real], [0.0, self.o.imag]]))
        order = np.argsort(self.disp)
        poly = [(1.0 - 1e-9) * complex(math.cos(2 * math.pi * t / 64),
                                       math.sin(2 * math.pi * t / 64)) for t in range(64)]
        rad = 1.0 - 1e-9
        for i in order:
            d = float(self.disp[i])
            if d <= 1e-9:
                continue
            if math.tanh(d / 2.0) > rad:
                break
            z = center.apply(complex(self.orbit[i]))
            w = (z - 1j) / (z + 1j)
            k = 2.0 * w / (1.0 + abs(w) ** 2)
            r = abs(k)
            if r < 1e-12:
                continue
            n = k / r
            c = math.tanh(d / 2.0)
            if any(v.real * n.real + v.imag * n.imag > c + 1e-15 for v in poly):
                poly = _clip_halfplane(poly, n, c)
                rad = max(min(abs(v), 1.0 - 1e-12) for v in poly)
        return math.atanh(rad)

    def _closure_ok(self, move_ids, target) -> bool:
        if not move_ids:
            return False
        sub = self.mats[move_ids]
        for i in range(len(move_ids)):
            prods = _sign_normalize(np.einsum("ij,kjl->kil", sub[i], sub))
            ds = _displacements(prods, self.o)
            flats = prods.reshape(-1, 4)
            for k in np.nonzero(ds <= target)[0]:
                if self._table.lookup_flat(flats[k]) is None:
                    return False
        return True

    # -- queries -----------------------------------------------------------

    def within(self, radius: float) -> np.ndarray:
        return np.nonzero(self.disp <= radius)[0]

    def lookup(self, mat: np.ndarray) -> int | None:
        return self._table.lookup_flat(_sign_normalize(mat[None])[0].ravel())

    def nearest_orbit(self, z: complex) -> int:
        d2 = np.abs(self.orbit - z) ** 2
        arg = 1.0 + d2 / (2.0 * self.orbit.imag * z.imag)
        return int(np.argmin(arg))

    def lengths(self) -> np.ndarray:
        tr = np.abs(self.mats[:, 0, 0] + self.mats[:, 1, 1])
        out = np.full(len(tr), np.inf)
        mask = tr > 2.0 + hp.TRACE_TOL
        out[mask] = 2.0 * np.arccosh(tr[mask] / 2.0)
        return out


def _clip_halfplane(poly, n: complex, c: float):
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        fa = a.real * n.real + a.imag * n.imag - c
        fb = b.real * n.real + b.imag * n.imag - c
        if fa <= 0:
            out.append(a)
        if (fa < 0 < fb) or (fb < 0 < fa):
            t = fa / (fa - fb)
            out.append(a + t * (b - a))
    return out


_BALL_CACHE: "weakref.WeakKeyDictionary[Holonomy, list]" = weakref.WeakKeyDictionary()


def group_ball(hol: Holonomy, min_coverage: float, node_budget: int = 10 ** 8) -> GroupBall:
    """Cached displacement-ball enumeration for the holonomy group."""
    entries = _BALL_CACHE.setdefault(hol, [])
    for cov, ball in entries:
        if cov >= min_coverage - 1e-12:
            return ball
    target = math.ceil(min_coverage * 2.0) / 2.0
    ball = GroupBall(hol, target, node_budget)
    entries.append((target, ball))
    entries.sort(key=lambda e: -e[0])
    return ball


def ball_for_length(hol: Holonomy, max_length: float, node_budget: int = 10 ** 8) -> GroupBall:
    """Ball guaranteed to contain a conjugate of every class of length <= max_length."""
    probe = group_ball(hol, 6.0, node_budget)
    r_hat = probe.dirichlet_radius
    cov = 2.0 * math.asinh(math.cosh(r_hat) * math.sinh(max_length / 2.0)) + 0.2
    return group_ball(hol, max(cov, 6.0), node_budget)


# ---------------------------------------------------------------------------
# conjugacy classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedGeodesic:
    """One unoriented free-homotopy class of closed geodesics."""

    word: Word
    word_str: str
    matrix: Isometry
    length: float
    primitive: bool


def _axis_foot(mat: np.ndarray, o: complex) -> complex:
    line = hp.axis(Isometry(mat))
    return hp.line_point(line, hp.line_param(line, o))


def _pull_near_axis(ball: GroupBall, mat: np.ndarray, word: Word) -> tuple[np.ndarray, Word]:
    """Conjugate until the axis passes within the Dirichlet radius of o."""
    for _ in range(12):
        foot = _axis_foot(mat, ball.o)
        if hp.distance(ball.o, foot) <= ball.dirichlet_radius + 1e-9:
            break
        v = ball.nearest_orbit(foot)
        if ball.disp[v] <= 1e-12:
            break
        vm = ball.mats[v]
        mat = _sign_normalize((_invert(vm) @ mat @ vm)[None])[0]
        word = reduce_word(invert_word(ball.words[v]) + word + ball.words[v])
    return mat, word


def accurate_element(ball: GroupBall, mat: np.ndarray, word: Word) -> tuple[np.ndarray, Word]:
    """Near-axis conjugate of the element, snapped to its enumerated copy.

    Long word products lose digits through large intermediate entries; the
    table entry for the same element was built from short chains and is
    accurate, so prefer it whenever the lookup hits.
    """
    mat, word = _pull_near_axis(ball, mat, word)
    idx = ball.lookup(mat)
    if idx is not None:
        return ball.mats[idx], word
    return mat, word


def _canonical_index(ball: GroupBall, mat: np.ndarray, word: Word,
                     length: float, cache: dict) -> tuple[int, Word]:
    """Smallest ball index over near-axis conjugates of the element."""
    mat, word = _pull_near_axis(ball, mat, word)
    self_idx = ball.lookup(mat)
    if self_idx is not None and self_idx in cache:
        return cache[self_idx]
    r = ball.dirichlet_radius
    conj_radius = pair_distance_bound(r, r, length / 2.0) + 0.1
    if conj_radius > ball.coverage + 1e-9:
        raise RadiusTooSmall("ball coverage below the conjugator radius for this length")
    ids = ball.within(conj_radius)
    sub = ball.mats[ids]
    inv = np.empty_like(sub)
    inv[:, 0, 0], inv[:, 0, 1] = sub[:, 1, 1], -sub[:, 0, 1]
    inv[:, 1, 0], inv[:, 1, 1] = -sub[:, 1, 0], sub[:, 0, 0]
    prods = _sign_normalize(np.einsum("kij,jl,klm->kim", sub, mat, inv))
    flats = prods.reshape(-1, 4)
    near_tol = r + 1e-6
    found = []
    for k in range(len(ids)):
        idx = ball._table.lookup_flat(flats[k])
        if idx is not None:
            found.append((idx, k))
    found.sort()
    best, best_word = None, None
    for idx, k in found:
        if best is not None:
            break
        foot = _axis_foot(ball.mats[idx], ball.o)
        if hp.distance(ball.o, foot) <= near_tol:
            u = ball.words[ids[k]]
            best, best_word = idx, reduce_word(u + word + invert_word(u))
    if best is None:
        best, best_word = (self_idx if self_idx is not None else -1), word
    result = (best, best_word)
    if self_idx is not None:
        cache[self_idx] = result
    cache[best] = result
    return result


def enumerate_geodesics(hol: Holonomy, max_length: float, primitive_only: bool = True,
                        node_budget: int = 10 ** 8) -> list[ClosedGeodesic]:
    """One representative per unoriented free-homotopy class of length <= max_length.

    Exhaustive by the coverage radius of the underlying displacement ball;
    sorted by (length, word); deterministic.
    """
    if max_length <= 0:
        raise RadiusTooSmall("max_length must be positive")
    ball = ball_for_length(hol, max_length, node_budget)
    lengths = ball.lengths()
    cand = np.nonzero(lengths <= max_length + LENGTH_TOL)[0]
    cache: dict = {}
    classes: dict[int, tuple[Word, float]] = {}
    for i in cand:
        if ball.disp[i] <= 1e-12:
            continue
        length = float(lengths[i])
        key, word = _canonical_index(ball, ball.mats[i], ball.words[i], length, cache)
        key2, word2 = _canonical_index(ball, _sign_normalize(_invert(ball.mats[i])[None])[0],
                                       invert_word(ball.words[i]), length, cache)
        if key2 < key:
            key, word = key2, word2
        if key not in classes:
            classes[key] = (word, length)

    # mark powers of shorter classes as non-primitive
    primitive: dict[int, bool] = {k: True for k in classes}
    items = sorted(classes.items(), key=lambda kv: (kv[1][1], kv[1][0]))
    for key, (word, length) in items:
        if not primitive[key]:
            continue
        k = 2
        while k * length <= max_length + 1e-6:
            pw = word * k
            pkey, _ = _canonical_index(ball, hol.matrix_of_word(pw).m, pw, k * length, cache)
            if pkey in primitive:
                primitive[pkey] = False
            k += 1

    out = []
    for key, (word, length) in items:
        if primitive_only and not primitive[key]:
            continue
        cword = dedup_signature(word)
        matrix = hol.matrix_of_word(cword)
        glen = hp.translation_length(matrix)
        if abs(glen - length) > 1e-7:
            raise NotHyperbolic("canonical word length mismatch")
        out.append(ClosedGeodesic(word=cword, word_str=hol.word_to_string(cword),
                                  matrix=matrix, length=glen, primitive=primitive[key]))
    out.sort(key=lambda g: (g.length, g.word))
    return out


def class_index(hol: Holonomy, ball: GroupBall, matrix: Isometry, word: Word) -> int:
    """Unoriented class key of an element, for identity checks across modules."""
    length = hp.translation_length(matrix)
    cache: dict = {}
    key, _ = _canonical_index(ball, matrix.m, word, length, cache)
    key2, _ = _canonical_index(ball, matrix.inverse().m, invert_word(word), length, cache)
    return min(key, key2)


def systole(spec: SurfaceSpec, hol: Holonomy, search_radius: float,
            node_budget: int = 10 ** 8) -> float:
    """Shortest translation length among all classes within the search radius."""
    if search_radius < max(spec.lengths):
        raise RadiusTooSmall("search radius below the longest cuff length")
    ball = ball_for_length(hol, search_radius, node_budget)
    lengths = ball.lengths()
    finite = lengths[lengths <= search_radius + LENGTH_TOL]
    if len(finite) == 0:
        raise RadiusTooSmall("no closed geodesic within the search radius")
    return float(np.min(finite))
