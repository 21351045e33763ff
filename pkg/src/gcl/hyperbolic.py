"""Hyperbolic-plane primitives.

Everything lives in the upper half-plane: points are complex numbers with
positive imaginary part, orientation-preserving isometries are real 2x2
matrices of determinant one acting by Mobius transformations (a matrix and
its negative act identically), and ideal boundary points are projective
pairs (a : b) standing for a/b on the extended real line.

For ordering questions on the circle at infinity, and for straight-line
predicates (segment crossings, point location), we pass to the Poincare
disk / Klein chart centered at i via the Cayley map.  Geodesics are
straight chords in the Klein chart, so planar predicates apply verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotHyperbolic

DET_TOL = 1e-12      # renormalize determinant past this drift
GEO_TOL = 1e-9       # generic geometric predicate tolerance
TRACE_TOL = 1e-9     # |tr|-2 margin separating hyperbolic from parabolic


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

def _normalize(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det <= 0:
        raise ValueError("matrix does not preserve orientation (det <= 0)")
    if abs(det - 1.0) > DET_TOL:
        m = m / math.sqrt(det)
    tr = m[0, 0] + m[1, 1]
    if tr < -TRACE_TOL or (abs(tr) <= TRACE_TOL and _first_significant(m) < 0):
        m = -m
    return m


def _first_significant(m: np.ndarray) -> float:
    for v in (m[0, 0], m[0, 1], m[1, 0], m[1, 1]):
        if abs(v) > TRACE_TOL:
            return v
    return 1.0


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry of H, stored with det = 1.

    The matrix sign is normalized (nonnegative trace) but no predicate
    ever reads it: m and -m are the same isometry.
    """

    m: np.ndarray

    def __post_init__(self):
        mm = _normalize(np.asarray(self.m, dtype=float))
        object.__setattr__(self, "m", mm)
        self.m.setflags(write=False)

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(np.eye(2))

    @staticmethod
    def translation(dist: float) -> "Isometry":
        """Translation by `dist` along the imaginary axis, toward infinity."""
        e = math.exp(dist / 2.0)
        return Isometry(np.array([[e, 0.0], [0.0, 1.0 / e]]))

    @staticmethod
    def rotation(angle: float) -> "Isometry":
        """Rotation about i by `angle`, counterclockwise."""
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return Isometry(np.array([[c, s], [-s, c]]))

    def compose(self, other: "Isometry") -> "Isometry":
        return Isometry(self.m @ other.m)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return self.compose(other)

    def inverse(self) -> "Isometry":
        a, b, c, d = self.m.ravel()
        return Isometry(np.array([[d, -b], [-c, a]]))

    def trace(self) -> float:
        return abs(self.m[0, 0] + self.m[1, 1])

    def apply(self, z: complex) -> complex:
        a, b, c, d = self.m.ravel()
        return (a * z + b) / (c * z + d)

    def apply_boundary(self, p: np.ndarray) -> np.ndarray:
        return normalize_boundary(self.m @ p)

    def is_identity(self, tol: float = 1e-9) -> bool:
        return projectively_close(self.m, np.eye(2), tol)

    def nearly_equal(self, other: "Isometry", tol: float = 1e-9) -> bool:
        return projectively_close(self.m, other.m, tol)


def projectively_close(m1: np.ndarray, m2: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(m1 - m2)) < tol or np.max(np.abs(m1 + m2)) < tol)


def translation_length(iso: Isometry, tol: float = TRACE_TOL) -> float:
    """Hyperbolic translation length, 2*arccosh(|tr|/2).

    Raises NotHyperbolic for parabolic/elliptic input (|tr| <= 2 + tol).
    """
    t = iso.trace()
    if t <= 2.0 + tol:
        raise NotHyperbolic(f"|trace| = {t:.12g} is not > 2")
    return 2.0 * math.acosh(t / 2.0)


def is_hyperbolic(iso: Isometry, tol: float = TRACE_TOL) -> bool:
    return iso.trace() > 2.0 + tol


# ---------------------------------------------------------------------------
# boundary points and geodesic lines
# ---------------------------------------------------------------------------

def normalize_boundary(p: np.ndarray) -> np.ndarray:
    """Canonical representative of a projective boundary point (a : b)."""
    p = np.asarray(p, dtype=float)
    n = math.hypot(p[0], p[1])
    if n == 0.0:
        raise ValueError("zero vector is not a boundary point")
    p = p / n
    if p[1] < 0 or (p[1] == 0 and p[0] < 0):
        p = -p
    p.setflags(write=False)
    return p


def boundary_point(x: float | None) -> np.ndarray:
    """Boundary point of the real line; None stands for infinity."""
    if x is None or math.isinf(x):
        return normalize_boundary(np.array([1.0, 0.0]))
    return normalize_boundary(np.array([float(x), 1.0]))


def boundary_angle(p: np.ndarray) -> float:
    """Angle in [0, 2pi) of the Cayley image of (a : b) on the unit circle.

    The Cayley map z -> (z - i)/(z + i) sends a/b to (a - ib)/(a + ib),
    whose argument is -2*atan2(b, a).
    """
    theta = (-2.0 * math.atan2(p[1], p[0])) % (2.0 * math.pi)
    return theta


def boundary_close(p: np.ndarray, q: np.ndarray, tol: float = GEO_TOL) -> bool:
    return abs(p[0] * q[1] - p[1] * q[0]) < tol


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented geodesic given by its ordered ideal endpoints (projective)."""

    p_neg: np.ndarray
    p_pos: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_neg", normalize_boundary(self.p_neg))
        object.__setattr__(self, "p_pos", normalize_boundary(self.p_pos))
        if boundary_close(self.p_neg, self.p_pos, 1e-14):
            raise ValueError("geodesic endpoints must be distinct")

    def reversed(self) -> "GeodesicLine":
        return GeodesicLine(self.p_pos, self.p_neg)

    def transformed(self, iso: Isometry) -> "GeodesicLine":
        return GeodesicLine(iso.apply_boundary(self.p_neg),
                            iso.apply_boundary(self.p_pos))


def axis(iso: Isometry, tol: float = TRACE_TOL) -> GeodesicLine:
    """Axis of a hyperbolic isometry, oriented (repelling, attracting).

    Fixed points are the eigenvectors of the matrix; the attracting one
    belongs to the eigenvalue of larger modulus.
    """
    if not is_hyperbolic(iso, tol):
        raise NotHyperbolic("axis requires a hyperbolic isometry")
    evals, evecs = np.linalg.eig(iso.m)
    i_att = int(np.argmax(np.abs(evals)))
    att = evecs[:, i_att].real
    rep = evecs[:, 1 - i_att].real
    return GeodesicLine(rep, att)


def line_through(z1: complex, z2: complex) -> GeodesicLine:
    """Geodesic through two interior points, oriented from z1 toward z2."""
    if abs(z1 - z2) < 1e-15:
        raise ValueError("points must be distinct")
    dx = z2.real - z1.real
    if abs(dx) < 1e-13 * (1.0 + abs(z1) + abs(z2)):
        x = 0.5 * (z1.real + z2.real)
        ends = (boundary_point(x), boundary_point(None))
        return GeodesicLine(*ends) if z2.imag > z1.imag else GeodesicLine(ends[1], ends[0])
    center = (abs(z2) ** 2 - abs(z1) ** 2) / (2.0 * dx)
    radius = abs(z1 - center)
    a, b = center - radius, center + radius
    # oriented so that walking z1 -> z2 runs from the first endpoint to the second
    return GeodesicLine(boundary_point(a), boundary_point(b)) if dx > 0 else \
        GeodesicLine(boundary_point(b), boundary_point(a))


def _to_standard(line: GeodesicLine) -> Isometry:
    """Isometry sending (p_neg, p_pos) to (0, infinity)."""
    a1, b1 = line.p_neg
    a2, b2 = line.p_pos
    m = np.array([[b1, -a1], [b2, -a2]])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det < 0:
        m = np.array([[-b1, a1], [b2, -a2]])
    return Isometry(m)


def translation_along(line: GeodesicLine, dist: float) -> Isometry:
    """Translation by `dist` along `line`, toward p_pos for dist > 0."""
    n = _to_standard(line)
    return n.inverse() @ Isometry.translation(dist) @ n


def line_param(line: GeodesicLine, z: complex) -> float:
    """Signed arclength parameter of the foot of z on the line.

    Zero parameter sits at the point mapped to i by the standardizing map;
    the parameter increases toward p_pos.
    """
    w = _to_standard(line).apply(z)
    return math.log(abs(w))


def line_point(line: GeodesicLine, s: float) -> complex:
    """Point of the line at signed parameter s (see line_param)."""
    n = _to_standard(line)
    return n.inverse().apply(1j * math.exp(s))


def dist_to_line(line: GeodesicLine, z: complex) -> float:
    w = _to_standard(line).apply(z)
    return math.asinh(abs(w.real) / w.imag)


def distance(z1: complex, z2: complex) -> float:
    d2 = (z2.real - z1.real) ** 2 + (z2.imag - z1.imag) ** 2
    return math.acosh(1.0 + d2 / (2.0 * z1.imag * z2.imag))


def isometry_taking(z1: complex, z2: complex, w1: complex, w2: complex) -> Isometry:
    """The orientation-preserving isometry with z1 -> w1, z2 -> w2.

    Requires d(z1, z2) = d(w1, w2); the map is then unique.
    """
    if abs(distance(z1, z2) - distance(w1, w2)) > 1e-7:
        raise ValueError("point pairs are not isometric")
    return _frame_to(w1, w2) @ _frame_to(z1, z2).inverse()


def _frame_to(z1: complex, z2: complex) -> Isometry:
    """Isometry sending i -> z1 with the geodesic toward z2 leaving i upward."""
    line = line_through(z1, z2)
    n = _to_standard(line)
    s = line_param(line, z1)
    return n.inverse() @ Isometry.translation(s)


# ---------------------------------------------------------------------------
# four-gon and hexagon trigonometry
# ---------------------------------------------------------------------------

def quad_fourth_side(t: float, delta: float) -> float:
    """Fourth side of the quadrilateral with two right angles.

    For the 4-gon with right angles at both ends of a side of length
    `delta`, and the two adjacent sides of equal length `t`, the side
    closing it up has length L with

        cosh(L) = cosh(t)^2 * (cosh(delta) - 1) + 1.
    """
    if t < 0 or delta < 0:
        raise ValueError("side lengths must be nonnegative")
    c = math.cosh(t) ** 2 * (math.cosh(delta) - 1.0) + 1.0
    return math.acosh(max(c, 1.0))


def right_hexagon_sides(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Alternating sides (a', b', c') of the right-angled hexagon.

    In a right-angled hexagon with sides a, c', b, a', c, b' in cyclic
    order, cosh(a') = (cosh a + cosh b cosh c) / (sinh b sinh c); the map
    (a, b, c) -> (a', b', c') is an involution.
    """
    if min(a, b, c) <= 0:
        raise ValueError("alternating sides must be positive")

    def opposite(x, y, z):
        val = (math.cosh(x) + math.cosh(y) * math.cosh(z)) / (math.sinh(y) * math.sinh(z))
        return math.acosh(max(val, 1.0))

    return opposite(a, b, c), opposite(b, c, a), opposite(c, a, b)


def hexagon_walk(sides: list[float], start: Isometry | None = None) -> tuple[list[complex], Isometry]:
    """Vertices of the right-angled polygon traced by the given side lengths.

    Walks counterclockwise turning left by pi/2 at every vertex; returns
    the vertex list and the final frame (= start frame iff the polygon
    closes up, which for consistent side data it does projectively).
    """
    frame = start if start is not None else Isometry.identity()
    turn = Isometry.rotation(math.pi / 2.0)
    verts = []
    for d in sides:
        verts.append(frame.apply(1j))
        frame = frame @ Isometry.translation(d) @ turn
    return verts, frame


# ---------------------------------------------------------------------------
# Klein chart predicates
# ---------------------------------------------------------------------------

def to_klein(z: complex) -> complex:
    """Klein-chart coordinates (centered at i) of an interior point."""
    w = (z - 1j) / (z + 1j)
    return 2.0 * w / (1.0 + abs(w) ** 2)


def boundary_klein(p: np.ndarray) -> complex:
    """Unit-circle position of a boundary point in the Klein chart."""
    return complex(math.cos(boundary_angle(p)), math.sin(boundary_angle(p)))


def _cross(o: complex, a: complex, b: complex) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def segment_intersection(p1: complex, p2: complex, q1: complex, q2: complex,
                         eps: float = 1e-14):
    """Proper intersection of two open straight segments (Klein chart).

    Returns (s, t, point) with parameters strictly inside (0, 1) on both
    segments, or None when the segments do not properly cross.
    """
    r = p2 - p1
    s = q2 - q1
    denom = r.real * s.imag - r.imag * s.real
    if abs(denom) < eps:
        return None
    qp = q1 - p1
    t1 = (qp.real * s.imag - qp.imag * s.real) / denom
    t2 = (qp.real * r.imag - qp.imag * r.real) / denom
    if eps < t1 < 1.0 - eps and eps < t2 < 1.0 - eps:
        return t1, t2, p1 + t1 * r
    return None


def point_in_polygon(pt: complex, poly: list[complex]) -> bool:
    """Ray-crossing containment test for a simple polygon (Klein chart)."""
    x, y = pt.real, pt.imag
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i].real, poly[i].imag
        x2, y2 = poly[(i + 1) % n].real, poly[(i + 1) % n].imag
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xi > x:
                inside = not inside
    return inside


def klein_to_halfplane(k: complex) -> complex:
    """Inverse of to_klein."""
    r2 = abs(k) ** 2
    if r2 >= 1.0:
        raise ValueError("not an interior Klein point")
    w = k / (1.0 + math.sqrt(1.0 - r2))
    return 1j * (1.0 + w) / (1.0 - w)
