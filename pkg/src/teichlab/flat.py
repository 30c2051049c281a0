"""Flat cone surfaces carrying the one-parameter family of singular
Euclidean metrics: polygons with translation edge pairings, a straight-line
trajectory tracer, cylinder decompositions in rational directions, flat and
expanding annuli with their moduli, and the two concrete constructions used
by the experiments (marked torus from a lattice, and two slit tori glued
along the slit).

Time slicing acts on all vertex coordinates by diag(e^t, e^-t), which
scales horizontal data by e^t and vertical data by e^-t while preserving
area exactly.
"""

from __future__ import annotations

import math

from .curves import (
    EmbeddedSlope,
    TorusSlope,
    WeightedMultiCurve,
    WordHandle,
)


class FlatSurfaceError(ValueError):
    pass


class SearchTimeoutError(RuntimeError):
    """Trajectory or saddle-connection search exceeded its budget."""


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def _dot(u, v):
    return u.real * v.real + u.imag * v.imag


class FlatSurface:
    """Planar polygons with translation edge pairings.

    polygons: list of CCW vertex lists (complex numbers)
    pairings: dict mapping (poly, edge) -> (poly', edge'); edge i runs from
              vertex i to vertex i+1; paired edges are parallel, of equal
              length, and traversed in opposite directions.
    """

    def __init__(self, polygons, pairings, normalize_area=True, cocycles=None,
                 marked_points=None):
        self.polygons = [[complex(v) for v in poly] for poly in polygons]
        self.pairings = dict(pairings)
        self.cocycles = dict(cocycles or {})
        self.marked_points = list(marked_points or [])
        self._validate_pairings()
        area = self.area()
        if area <= 0.0:
            raise FlatSurfaceError("total area must be positive")
        if normalize_area and abs(area - 1.0) > 1e-12:
            scale = 1.0 / math.sqrt(area)
            self.polygons = [[v * scale for v in poly] for poly in self.polygons]
            self.marked_points = [v * scale for v in self.marked_points]
        self._vertex_classes = None

    # -- bookkeeping ---------------------------------------------------------

    def edge_vector(self, pi, ei):
        poly = self.polygons[pi]
        return poly[(ei + 1) % len(poly)] - poly[ei]

    def _validate_pairings(self):
        seen = {}
        for (pi, ei), (qi, fi) in self.pairings.items():
            if self.pairings.get((qi, fi)) != (pi, ei):
                raise FlatSurfaceError("pairings must be involutive")
            v1 = self.edge_vector(pi, ei)
            v2 = self.edge_vector(qi, fi)
            if abs(v1 + v2) > 1e-9 * max(1.0, abs(v1)):
                raise FlatSurfaceError(
                    "paired edges (%d,%d)/(%d,%d) are not opposite translations"
                    % (pi, ei, qi, fi))
            seen[(pi, ei)] = True
        for pi, poly in enumerate(self.polygons):
            for ei in range(len(poly)):
                if (pi, ei) not in seen:
                    raise FlatSurfaceError("edge (%d,%d) is unpaired" % (pi, ei))

    def area(self):
        total = 0.0
        for poly in self.polygons:
            a = 0.0
            for i, v in enumerate(poly):
                w = poly[(i + 1) % len(poly)]
                a += v.real * w.imag - v.imag * w.real
            total += a / 2.0
        return total

    def diameter_bound(self):
        out = 0.0
        for poly in self.polygons:
            for v in poly:
                for w in poly:
                    out = max(out, abs(v - w))
        return out

    def vertex_classes(self):
        """Identified vertex classes with their total cone angles."""
        if self._vertex_classes is not None:
            return self._vertex_classes
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(x, y):
            parent.setdefault(x, x)
            parent.setdefault(y, y)
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for pi, poly in enumerate(self.polygons):
            for ei in range(len(poly)):
                qi, fi = self.pairings[(pi, ei)]
                n_q = len(self.polygons[qi])
                union((pi, ei), (qi, (fi + 1) % n_q))
                union((pi, (ei + 1) % len(poly)), (qi, fi))

        classes = {}
        for pi, poly in enumerate(self.polygons):
            n = len(poly)
            for vi in range(n):
                root = find((pi, vi))
                prev = poly[(vi - 1) % n] - poly[vi]
                nxt = poly[(vi + 1) % n] - poly[vi]
                ang = math.atan2(prev.imag, prev.real) - math.atan2(nxt.imag, nxt.real)
                ang %= 2.0 * math.pi
                if ang < 1e-12:
                    ang = 2.0 * math.pi if abs(prev + nxt) > 1e-12 else ang
                cls = classes.setdefault(root, {"members": [], "angle": 0.0})
                cls["members"].append((pi, vi))
                cls["angle"] += ang
        self._vertex_classes = classes
        return classes

    def cone_points(self):
        """Vertex classes whose total angle is not 2 pi."""
        out = []
        for root, cls in self.vertex_classes().items():
            if abs(cls["angle"] - 2.0 * math.pi) > 1e-8:
                out.append(cls)
        return out

    def genus(self):
        v = len(self.vertex_classes())
        e = len(self.pairings) // 2
        f = len(self.polygons)
        chi = v - e + f
        return (2 - chi) // 2

    def transformed(self, t):
        """The surface at family parameter t.

        The horizontal foliation (measured by |dy|) carries the weight e^t,
        so vertical coordinates stretch by e^t and horizontal ones contract
        by e^-t; the area is preserved exactly.
        """
        ex, ey = math.exp(-t), math.exp(t)

        def m(z):
            return complex(ex * z.real, ey * z.imag)

        return FlatSurface(
            [[m(v) for v in poly] for poly in self.polygons],
            self.pairings,
            normalize_area=False,
            cocycles=self.cocycles,
            marked_points=[m(z) for z in self.marked_points],
        )

    def to_json_dict(self):
        return {
            "polygons": [[[v.real, v.imag] for v in poly] for poly in self.polygons],
            "pairings": [[list(k), list(v)] for k, v in sorted(self.pairings.items())],
        }

    @classmethod
    def from_json_dict(cls, data, normalize_area=True):
        polys = [[complex(x, y) for x, y in poly] for poly in data["polygons"]]
        pairings = {}
        for k, v in data["pairings"]:
            pairings[tuple(k)] = tuple(v)
        return cls(polys, pairings, normalize_area=normalize_area)


class QDTimeSlice:
    """The flat surface at parameter t of the family diag(e^t, e^-t)."""

    def __init__(self, base, t):
        self.base = base
        self.t = t
        self.surface = base.transformed(t) if t != 0.0 else base

    def stretch(self, z):
        return complex(math.exp(-self.t) * z.real, math.exp(self.t) * z.imag)


# ---------------------------------------------------------------------------
# straight-line tracing


class TraceStep:
    __slots__ = ("poly", "entry", "exit", "edge_in", "edge_out", "length")

    def __init__(self, poly, entry, exit_, edge_in, edge_out, length):
        self.poly = poly
        self.entry = entry
        self.exit = exit_
        self.edge_in = edge_in
        self.edge_out = edge_out
        self.length = length


class VertexHit(Exception):
    """Trajectory ran into a cone point / blocked vertex."""

    def __init__(self, point, length):
        self.point = point
        self.length = length
        super().__init__("trajectory hit a vertex")


def _exit_edge(surface, pi, p, u, skip_edge, tol):
    """First edge of polygon pi hit by the ray p + s u, s > tol."""
    poly = surface.polygons[pi]
    n = len(poly)
    best = None
    for ei in range(n):
        if ei == skip_edge:
            continue
        a = poly[ei]
        b = poly[(ei + 1) % n]
        e = b - a
        denom = _cross(u, e)
        if abs(denom) < 1e-15:
            continue
        w = a - p
        s_ray = _cross(w, e) / denom
        s_edge = _cross(w, u) / denom
        if s_ray <= tol:
            continue
        if -1e-12 <= s_edge <= 1.0 + 1e-12:
            if best is None or s_ray < best[0]:
                best = (s_ray, ei, s_edge)
    if best is None:
        raise FlatSurfaceError("ray escaped polygon %d (geometry inconsistent)" % pi)
    return best


def trace(surface, pi, p, u, max_length, blocking=None, max_steps=200000):
    """Follow the straight trajectory from p in polygon pi with direction u.

    Yields TraceStep records until max_length is exceeded.  Raises VertexHit
    when the path runs into a vertex of a blocking class (default: every
    vertex class with cone angle != 2 pi).
    """
    if blocking is None:
        blocking = _blocking_corners(surface)
    u = u / abs(u)
    scale = surface.diameter_bound()
    tol = 1e-12 * max(1.0, scale)
    traveled = 0.0
    steps = 0
    edge_in = None
    while traveled < max_length:
        steps += 1
        if steps > max_steps:
            raise SearchTimeoutError("trace exceeded %d steps" % max_steps)
        s_ray, ei, s_edge = _exit_edge(surface, pi, p, u, edge_in, tol)
        poly = surface.polygons[pi]
        n = len(poly)
        a = poly[ei]
        b = poly[(ei + 1) % n]
        q = p + s_ray * u
        elen = abs(b - a)
        if s_edge * elen < 1e-9 or (1.0 - s_edge) * elen < 1e-9:
            vi = ei if s_edge * elen < 1e-9 else (ei + 1) % n
            if (pi, vi) in blocking:
                raise VertexHit(q, traveled + s_ray)
            # re-aim just past the non-singular vertex
        yield TraceStep(pi, p, q, edge_in, ei, s_ray)
        traveled += s_ray
        qi, fi = surface.pairings[(pi, ei)]
        # carry the point across the identification
        a2 = surface.polygons[qi][fi]
        b2 = surface.polygons[qi][(fi + 1) % len(surface.polygons[qi])]
        q2 = b2 + (q - a) / (b - a) * (a2 - b2) if abs(b - a) > 0 else a2
        pi, p, edge_in = qi, q2, fi


def _blocking_corners(surface):
    blocked = set()
    for cls in surface.vertex_classes().values():
        if abs(cls["angle"] - 2.0 * math.pi) > 1e-8:
            blocked.update(cls["members"])
    return blocked


# ---------------------------------------------------------------------------
# cylinders


class Cylinder:
    """A maximal Euclidean cylinder in a given direction.

    circumference, height: metric data (area = circumference * height)
    crossings: multiset of signed pairing crossings of the core curve
    homology: accumulated cocycle vector (None when no cocycles declared)
    """

    __slots__ = ("circumference", "height", "crossings", "homology")

    def __init__(self, circumference, height, crossings, homology):
        self.circumference = circumference
        self.height = height
        self.crossings = crossings
        self.homology = homology

    @property
    def modulus(self):
        return self.height / self.circumference

    def __repr__(self):
        return "Cylinder(c=%.6g, h=%.6g)" % (self.circumference, self.height)


def _closed_trace(surface, pi, p, u, budget, blocking, first_edge=None):
    """Trace from an edge point until the trajectory returns to it.

    Returns (length, visits, step_lengths, crossings, homology) when the
    path closes up, None when it runs into a vertex or exceeds the budget.
    `visits` lists (poly, edge, along-edge exit offset) per crossing and
    `step_lengths` the distances between consecutive crossings.
    """
    u = u / abs(u)
    scale = max(1.0, surface.diameter_bound())
    tol = 1e-12 * scale
    visits = []
    step_lengths = []
    crossings = {}
    homology = None
    if surface.cocycles:
        some = next(iter(surface.cocycles.values()))
        homology = [0.0] * len(some)
    length = 0.0
    steps = 0
    cur_pi, cur_p, edge_in = pi, p, first_edge
    start = (pi, first_edge, p)
    while True:
        steps += 1
        if steps > 100000:
            raise SearchTimeoutError("trajectory did not close within step limit")
        s_ray, ei, s_edge = _exit_edge(surface, cur_pi, cur_p, u, edge_in, tol)
        poly = surface.polygons[cur_pi]
        n = len(poly)
        a, b = poly[ei], poly[(ei + 1) % n]
        elen = abs(b - a)
        if s_edge * elen < 1e-9 * scale or (1.0 - s_edge) * elen < 1e-9 * scale:
            return None  # leaf through a vertex
        q = cur_p + s_ray * u
        key = (cur_pi, ei)
        crossings[key] = crossings.get(key, 0) + 1
        if homology is not None and key in surface.cocycles:
            homology = [h + x for h, x in zip(homology, surface.cocycles[key])]
        visits.append((cur_pi, ei, s_edge * elen))
        step_lengths.append(s_ray)
        length += s_ray
        if length > budget:
            return None
        qi, fi = surface.pairings[(cur_pi, ei)]
        a2 = surface.polygons[qi][fi]
        b2 = surface.polygons[qi][(fi + 1) % len(surface.polygons[qi])]
        q2 = b2 + (q - a) / (b - a) * (a2 - b2)
        cur_pi, cur_p, edge_in = qi, q2, fi
        if (cur_pi == start[0] and edge_in == start[1]
                and abs(cur_p - start[2]) < 1e-8 * scale):
            return length, visits, step_lengths, crossings, homology


def _wedge_contains(poly, vi, w):
    """Is direction w strictly inside the interior wedge at vertex vi?"""
    n = len(poly)
    v = poly[vi]
    d1 = poly[(vi + 1) % n] - v
    d2 = poly[(vi - 1) % n] - v
    a1 = math.atan2(d1.imag, d1.real)
    wedge = (math.atan2(d2.imag, d2.real) - a1) % (2.0 * math.pi)
    aw = (math.atan2(w.imag, w.real) - a1) % (2.0 * math.pi)
    return 1e-12 < aw < wedge - 1e-12


def _separatrix_crossings(surface, u, budget):
    """Edge-crossing positions of every vertex leaf in direction +-u.

    Every corner of every polygon launches a prong when +-u points into its
    wedge; each prong is traced until it runs into any vertex (the leaf's
    continuation there is traced by that vertex's own prongs).  Leaves of
    regular vertices do not bound cylinders but they do change the crossing
    itinerary, so they must cut the transversals as well.  Returns
    {edge: [x, ...]} with positions recorded on both members of each pair.
    """
    scale = max(1.0, surface.diameter_bound())
    tol = 1e-12 * scale
    cuts = {}
    for pi, poly in enumerate(surface.polygons):
        for vi in range(len(poly)):
            for w in (u, -u):
                if not _wedge_contains(poly, vi, w):
                    continue
                cur_pi, cur_p, edge_in = pi, poly[vi], None
                traveled = 0.0
                while True:
                    s_ray, ei, s_edge = _exit_edge(
                        surface, cur_pi, cur_p, w, edge_in, tol)
                    cpoly = surface.polygons[cur_pi]
                    n = len(cpoly)
                    a, b = cpoly[ei], cpoly[(ei + 1) % n]
                    elen = abs(b - a)
                    traveled += s_ray
                    if traveled > budget:
                        raise SearchTimeoutError(
                            "vertex leaf did not terminate (irrational direction?)")
                    hit_start = s_edge * elen < 1e-9 * scale
                    hit_end = (1.0 - s_edge) * elen < 1e-9 * scale
                    if hit_start or hit_end:
                        break  # reached a vertex; its prongs continue the leaf
                    cuts.setdefault((cur_pi, ei), []).append(s_edge * elen)
                    qi, fi = surface.pairings[(cur_pi, ei)]
                    q = cur_p + s_ray * w
                    a2 = surface.polygons[qi][fi]
                    b2 = surface.polygons[qi][(fi + 1) % len(surface.polygons[qi])]
                    qlen = abs(surface.edge_vector(qi, fi))
                    cuts.setdefault((qi, fi), []).append((1.0 - s_edge) * qlen)
                    cur_pi, cur_p, edge_in = qi, b2 + (q - a) / (b - a) * (a2 - b2), fi
    return cuts


def _seed_on_edge(surface, pi, ei, x, u):
    """Start data for a trace from the point at offset x on edge (pi, ei),
    flipping to the paired edge when the flow points out of the polygon."""
    poly = surface.polygons[pi]
    evec = surface.edge_vector(pi, ei)
    e_unit = evec / abs(evec)
    p0 = poly[ei] + x * e_unit
    if _cross(e_unit, u) >= 0.0:
        return pi, p0, ei
    qi, fi = surface.pairings[(pi, ei)]
    b = poly[(ei + 1) % len(poly)]
    a2 = surface.polygons[qi][fi]
    b2 = surface.polygons[qi][(fi + 1) % len(surface.polygons[qi])]
    return qi, b2 + (p0 - poly[ei]) / (b - poly[ei]) * (a2 - b2), fi


def cylinder_decomposition(slice_or_surface, direction, max_length=None):
    """Maximal cylinders in the given direction (rational w.r.t. holonomy).

    The singular leaves cut every transversal edge into intervals, each
    swept by one wrap of one cylinder.  One closed leaf is traced per
    unclaimed interval; intervals are merged into cylinders by the leaf
    invariants (circumference, homology), heights follow from the exactly
    accumulated swept area, and the total must reproduce the surface area.
    Raises SearchTimeoutError when a leaf or separatrix fails to terminate
    (an irrational direction, in practice).
    """
    surface = getattr(slice_or_surface, "surface", slice_or_surface)
    u = complex(direction[0], direction[1]) if not isinstance(direction, complex) else direction
    u = u / abs(u)
    if max_length is None:
        max_length = 400.0 * max(1.0, surface.diameter_bound())
    blocking = _blocking_corners(surface)
    area = surface.area()
    scale = max(1.0, surface.diameter_bound())

    cuts = _separatrix_crossings(surface, u, max_length)

    def canonical(key):
        return min(key, surface.pairings[key])

    def canonical_pos(key, x):
        if canonical(key) == key:
            return key, x
        other = surface.pairings[key]
        return other, abs(surface.edge_vector(*other)) - x

    # wrap intervals per canonical transversal edge
    parts = {}
    for pi, poly in enumerate(surface.polygons):
        for ei in range(len(poly)):
            key = (pi, ei)
            if canonical(key) != key:
                continue
            evec = surface.edge_vector(pi, ei)
            elen = abs(evec)
            if abs(_cross(u, evec / elen)) < 1e-12:
                continue
            pos = list(cuts.get(key, []))
            qkey = surface.pairings[key]
            pos += [elen - x for x in cuts.get(qkey, [])]
            xs = sorted([0.0] + pos + [elen])
            segs = []
            for a, b in zip(xs, xs[1:]):
                if b - a > 1e-9 * scale:
                    segs.append([a, b, None])  # third slot: claim mark
            parts[key] = segs

    groups = {}
    order = []
    for key, segs in sorted(parts.items()):
        pi, ei = key
        evec = surface.edge_vector(pi, ei)
        elen = abs(evec)
        cs = abs(_cross(u, evec / elen))
        for seg in segs:
            if seg[2] is not None:
                continue
            # an irrational offset inside the interval dodges the leaves
            # through regular (2 pi) vertices, which do not cut intervals
            mid = seg[0] + 0.6180339887498949 * (seg[1] - seg[0])
            spi, sp, se = _seed_on_edge(surface, pi, ei, mid, u)
            res = _closed_trace(surface, spi, sp, u, max_length,
                                blocking, first_edge=se)
            if res is None:
                raise SearchTimeoutError(
                    "leaf in a wrap interval failed to close; direction "
                    "not completely periodic?")
            length, visits, step_lengths, crossings, homology = res
            gkey = (
                round(length / scale, 10),
                tuple(round(h, 9) for h in homology) if homology is not None else None,
            )
            if gkey not in groups:
                groups[gkey] = {
                    "length": length, "crossings": crossings,
                    "homology": homology, "area": 0.0,
                }
                order.append(gkey)
            grp = groups[gkey]
            # every crossing contributes the strip (part width) x (flow to
            # the next crossing); a leaf may cross one part several times
            # (wraps truncated by edge endpoints), each time with its own
            # flow, but parts claimed by earlier leaves are already tiled
            nvis = len(visits)
            claimed_now = set()
            for i, (vp, ve, x_exit) in enumerate(visits):
                ckey, cx = canonical_pos((vp, ve), x_exit)
                flow = step_lengths[(i + 1) % nvis]
                for si, s in enumerate(parts.get(ckey, [])):
                    if not (s[0] - 1e-9 <= cx <= s[1] + 1e-9):
                        continue
                    if s[2] is None or (ckey, si) in claimed_now:
                        s[2] = gkey
                        claimed_now.add((ckey, si))
                        evec_c = surface.edge_vector(*ckey)
                        w_p = (s[1] - s[0]) * abs(_cross(u, evec_c / abs(evec_c)))
                        grp["area"] += w_p * flow
                    break
    cylinders = []
    for gkey in order:
        grp = groups[gkey]
        cylinders.append(Cylinder(
            grp["length"], grp["area"] / grp["length"],
            grp["crossings"], grp["homology"],
        ))
    total = sum(c.circumference * c.height for c in cylinders)
    if abs(total - area) > 1e-6 * area:
        raise FlatSurfaceError(
            "cylinder areas %.12g do not add up to surface area %.12g" % (total, area))
    return cylinders


# ---------------------------------------------------------------------------
# annuli data


class FlatAnnulusData:
    """Flat and expanding annuli around a curve with their moduli.

    flat_circumference  l_q of the geodesic representative
    flat_height         height of the maximal flat cylinder (0 when the
                        geodesic representative is unique)
    expanding           list of (distance d, Mod E = max(0, log(d / l_q)))
    """

    __slots__ = ("handle", "flat_circumference", "flat_height", "expanding")

    def __init__(self, handle, flat_circumference, flat_height, expanding):
        self.handle = handle
        self.flat_circumference = flat_circumference
        self.flat_height = flat_height
        self.expanding = expanding

    @property
    def mod_flat(self):
        return self.flat_height / self.flat_circumference

    def mod_expanding(self):
        return [max(0.0, math.log(d / self.flat_circumference)) for d, _ in self.expanding]

    def all_moduli(self):
        return [self.mod_flat] + self.mod_expanding()

    def dominant(self):
        """('flat'|'expanding', modulus); flat wins ties."""
        mods = self.mod_expanding()
        best_exp = max(mods) if mods else 0.0
        if self.mod_flat >= best_exp:
            return ("flat", self.mod_flat)
        return ("expanding", best_exp)


def reciprocal_modulus_proxy(ann):
    """Hyperbolic-length stand-in 1 / max(moduli); meaningful when < 1."""
    m = max(ann.all_moduli())
    if m <= 0.0:
        raise FlatSurfaceError("no positive modulus for %r" % (ann.handle,))
    return 1.0 / m


# ---------------------------------------------------------------------------
# concrete families


def make_flat_torus(e1, e2, marked=0j):
    """Torus R^2 / <e1, e2> as a single parallelogram with a marked point."""
    if not isinstance(e1, complex):
        e1 = complex(*e1)
    if not isinstance(e2, complex):
        e2 = complex(*e2)
    if _cross(e1, e2) <= 0.0:
        raise FlatSurfaceError("lattice basis must be positively oriented")
    poly = [0j, e1, e1 + e2, e2]
    pairings = {(0, 0): (0, 2), (0, 2): (0, 0), (0, 1): (0, 3), (0, 3): (0, 1)}
    cocycles = {(0, 0): (0.0, -1.0), (0, 2): (0.0, 1.0),
                (0, 1): (1.0, 0.0), (0, 3): (-1.0, 0.0)}
    return FlatSurface([poly], pairings, normalize_area=False,
                       cocycles=cocycles, marked_points=[marked])


class TorusFlatFamily:
    """Area-one flat torus family realizing a filling pair of weighted slopes
    as the horizontal and vertical directions.

    The period of the slope (p, q) at time t is diag(e^t, e^-t) applied to
    p*e1 + q*e2; its |Im| part is the weighted intersection with nu_plus and
    its |Re| part the weighted intersection with nu_minus.
    """

    def __init__(self, nu_plus, nu_minus):
        self.nu_plus = nu_plus
        self.nu_minus = nu_minus
        row_im = [0.0, 0.0]
        for g, w in nu_plus.components:
            row_im[0] += w * (-g.q)
            row_im[1] += w * g.p
        row_re = [0.0, 0.0]
        for g, w in nu_minus.components:
            row_re[0] += w * (-g.q)
            row_re[1] += w * g.p
        det = row_re[0] * row_im[1] - row_re[1] * row_im[0]
        if det == 0.0:
            raise FlatSurfaceError("slopes do not fill the torus")
        if det < 0.0:
            row_re = [-row_re[0], -row_re[1]]
            det = -det
        scale = 1.0 / math.sqrt(det)
        self.row_re = (row_re[0] * scale, row_re[1] * scale)
        self.row_im = (row_im[0] * scale, row_im[1] * scale)

    def period0(self, handle):
        x = self.row_re[0] * handle.p + self.row_re[1] * handle.q
        y = self.row_im[0] * handle.p + self.row_im[1] * handle.q
        return complex(x, y)

    def period(self, handle, t):
        z = self.period0(handle)
        return complex(math.exp(-t) * z.real, math.exp(t) * z.imag)

    def surface(self, t=0.0):
        e1 = self.period(TorusSlope(1, 0), t)
        e2 = self.period(TorusSlope(0, 1), t)
        if _cross(e1, e2) < 0.0:
            e1, e2 = e2, e1
        return make_flat_torus(e1, e2)

    def q_length(self, handle, t):
        """(l_q, h_q, v_q) of a slope at time t."""
        z = self.period(handle, t)
        return abs(z), abs(z.real), abs(z.imag)

    def cylinder(self, handle, t):
        c = abs(self.period(handle, t))
        return Cylinder(c, 1.0 / c, {}, None)

    def annuli(self, handle, t):
        c = abs(self.period(handle, t))
        return FlatAnnulusData(handle, c, 1.0 / c, [])

    def q_twist(self, nu_handle, alpha, t):
        """Signed wrap count of a slope leaf crossing the cylinder of alpha."""
        w = self.period(nu_handle, t)
        c = self.period(alpha, t)
        denom = _cross(c, w)
        if abs(denom) < 1e-15 * abs(w) * abs(c):
            raise FlatSurfaceError("leaf parallel to the cylinder core")
        # drift along the core while crossing the full cylinder, in core
        # units; the sign matches the metric-side twist convention, where
        # the plus-weighted foliation twists positively before its balance
        # time
        height = 1.0 / abs(c)
        wraps = height * _dot(w, c / abs(c)) / (denom / abs(c))
        return -wraps / abs(c)


def make_slit_pair(eps):
    """Two unit-area-1/2 square tori with central slits glued crosswise.

    The squares are axis-aligned with side 1/sqrt(2); each slit has length
    eps, runs at 45 degrees through the square's center, and the upper side
    of each slit is glued to the lower side of the other.  The horizontal
    and vertical foliations both meet the slit at 45 degrees; the result is
    a genus-two surface of area one whose two slit endpoints are cone
    points of angle 4 pi.
    """
    s = 1.0 / math.sqrt(2.0)
    if not (0.0 < eps < s / math.sqrt(2.0)):
        raise FlatSurfaceError("slit length must lie in (0, side/sqrt(2))")
    c = complex(s / 2.0, s / 2.0)
    u = (eps / (2.0 * math.sqrt(2.0))) * complex(1.0, 1.0)
    lo = [0j, complex(s, 0), complex(s, s), c + u, c - u]
    hi = [0j, c - u, c + u, complex(s, s), complex(0, s)]
    polygons = [list(lo), list(hi), list(lo), list(hi)]
    pairings = {}

    def pair(a, b):
        pairings[a] = b
        pairings[b] = a

    for k in (0, 1):
        plo, phi = 2 * k, 2 * k + 1
        pair((plo, 0), (phi, 3))  # bottom <-> top
        pair((plo, 1), (phi, 4))  # right <-> left
        pair((plo, 2), (phi, 2))  # upper diagonal cut
        pair((plo, 4), (phi, 0))  # lower diagonal cut
    # the slits are cross-glued between the two squares
    pair((0, 3), (3, 1))
    pair((2, 3), (1, 1))

    cocycles = {}
    zero = (0.0, 0.0, 0.0, 0.0)
    for key in pairings:
        cocycles[key] = zero
    for k in (0, 1):
        plo, phi = 2 * k, 2 * k + 1
        off = 2 * k
        b = [0.0] * 4
        b[off + 1] = -1.0
        cocycles[(plo, 0)] = tuple(b)
        cocycles[(phi, 3)] = tuple(-x for x in b)
        a = [0.0] * 4
        a[off] = 1.0
        cocycles[(plo, 1)] = tuple(a)
        cocycles[(phi, 4)] = tuple(-x for x in a)
    return FlatSurface(polygons, pairings, normalize_area=False, cocycles=cocycles)


class SlitPairFamily:
    """Exact flat geometry of the glued slit tori along the time family.

    Curve handles are those of the matching genus-2 group backend: the
    waist (the doubled slit), embedded slopes in either square torus, and
    the two families of slit-crossing curves parallel to the horizontal
    and vertical foliations.
    """

    def __init__(self, eps):
        self.eps = eps
        self.side = 1.0 / math.sqrt(2.0)
        self.surface = make_slit_pair(eps)
        self.slit_vector = (eps / math.sqrt(2.0)) * complex(1.0, 1.0)

    def slice(self, t):
        return QDTimeSlice(self.surface, t)

    def stretch(self, z, t):
        return complex(math.exp(-t) * z.real, math.exp(t) * z.imag)

    # -- lengths ---------------------------------------------------------------

    def waist_length(self, t):
        return 2.0 * abs(self.stretch(self.slit_vector, t))

    def slope_realizable(self, p, q):
        # a straight (p, q) family leaf in one square can avoid the slit iff
        # the slit's transverse shadow is smaller than the leaf spacing
        return self.eps * abs(p - q) < self.side * math.sqrt(2.0) - 1e-12

    def slope_length(self, p, q, t):
        if not self.slope_realizable(p, q):
            raise FlatSurfaceError(
                "slope (%d, %d) has no straight representative missing the slit"
                % (p, q))
        z = self.stretch(self.side * complex(p, q), t)
        return abs(z), abs(z.real), abs(z.imag)

    def transit_length(self, direction, t):
        """Length of the slit-crossing curve parallel to (1,0) or (0,1)."""
        if direction == (1, 0):
            return 2.0 * self.side * math.exp(-t)
        if direction == (0, 1):
            return 2.0 * self.side * math.exp(t)
        raise FlatSurfaceError("transit curves exist in the foliation directions")

    def q_length(self, handle, t):
        """(l_q, h_q, v_q) for a handle of the genus-2 backend."""
        if isinstance(handle, WordHandle):
            if handle.name == "waist":
                l = self.waist_length(t)
                z = self.stretch(self.slit_vector, t)
                return l, 2.0 * abs(z.real), 2.0 * abs(z.imag)
            if handle.name == "hplus":
                l = self.transit_length((1, 0), t)
                return l, l, 0.0
            if handle.name == "vminus":
                l = self.transit_length((0, 1), t)
                return l, 0.0, l
            raise FlatSurfaceError("no flat realization stored for %r" % (handle,))
        if isinstance(handle, EmbeddedSlope):
            return self.slope_length(handle.p, handle.q, t)
        raise FlatSurfaceError("unsupported handle %r" % (handle,))

    # -- structure -------------------------------------------------------------

    def horizontal_cylinders(self, t=0.0):
        """(free cylinder in each square, slit-crossing cylinder) at time t:
        circumference/height pairs in the horizontal direction."""
        s, eps = self.side, self.eps
        shadow = eps / math.sqrt(2.0)
        free = (s * math.exp(-t), (s - shadow) * math.exp(t))
        crossing = (2.0 * s * math.exp(-t), shadow * math.exp(t))
        return free, crossing

    def vertical_cylinders(self, t=0.0):
        s, eps = self.side, self.eps
        shadow = eps / math.sqrt(2.0)
        free = (s * math.exp(t), (s - shadow) * math.exp(-t))
        crossing = (2.0 * s * math.exp(t), shadow * math.exp(-t))
        return free, crossing

    def piece_systole(self, t, radius=None):
        """Shortest closed flat geodesic in a slit torus avoiding the slit."""
        if radius is None:
            radius = 3 + int(math.ceil(3.0 * math.exp(2.0 * abs(t))))
        best = None
        for p in range(-radius, radius + 1):
            for q in range(0, radius + 1):
                if (p, q) == (0, 0) or (q == 0 and p != 1):
                    continue
                if math.gcd(abs(p), q) != 1:
                    continue
                if not self.slope_realizable(p, q):
                    continue
                l = abs(self.stretch(self.side * complex(p, q), t))
                if best is None or l < best:
                    best = l
        if best is None:
            raise SearchTimeoutError("no realizable slope found for the systole")
        return best

    def flat_complexity(self, t):
        """max over the two pieces of lambda / l_q(waist)."""
        lam = self.piece_systole(t)  # the two pieces are isometric
        return lam / self.waist_length(t)

    def waist_expanding_distance(self, t, radius=6):
        """Half the shortest essential straight arc from the slit to itself
        within one square, found over lattice translates of the slit.

        The search develops the square torus in the plane: candidate arcs
        are the distance-realizing segments between the slit and its lattice
        translates, rejected when they pass through an intermediate copy."""
        s = self.side
        ends0 = (complex(s / 2, s / 2) - self.slit_vector / 2.0,
                 complex(s / 2, s / 2) + self.slit_vector / 2.0)
        a0 = self.stretch(ends0[0], t)
        b0 = self.stretch(ends0[1], t)
        best = None
        for m in range(-radius, radius + 1):
            for n in range(-radius, radius + 1):
                if (m, n) == (0, 0):
                    continue
                shift = self.stretch(complex(m * s, n * s), t)
                cand, p1, p2 = _segment_distance_points(a0, b0, a0 + shift, b0 + shift)
                if best is not None and cand >= best:
                    continue
                blocked = False
                for mm in range(-radius, radius + 1):
                    for nn in range(-radius, radius + 1):
                        if (mm, nn) in ((0, 0), (m, n)):
                            continue
                        mid = self.stretch(complex(mm * s, nn * s), t)
                        if _segments_intersect(p1, p2, a0 + mid, b0 + mid):
                            blocked = True
                            break
                    if blocked:
                        break
                if not blocked:
                    best = cand
        if best is None:
            raise SearchTimeoutError("no essential arc found; enlarge the radius")
        return best / 2.0

    def waist_annuli(self, t):
        """Flat annulus (degenerate) plus the two expanding annuli."""
        l = self.waist_length(t)
        d = self.waist_expanding_distance(t)
        return FlatAnnulusData("waist", l, 0.0, [(d, None), (d, None)])

    def geodesic_length_proxy(self, t):
        return reciprocal_modulus_proxy(self.waist_annuli(t))


def _segment_distance_points(a1, b1, a2, b2):
    """(distance, p1, p2): a realizing pair for two closed segments."""

    def project(p, a, b):
        ab = b - a
        denom = _dot(ab, ab)
        if denom < 1e-300:
            return a
        lam = max(0.0, min(1.0, _dot(p - a, ab) / denom))
        return a + lam * ab

    if _segments_intersect(a1, b1, a2, b2):
        return 0.0, a1, a1
    best = None
    for p, a, b, flip in ((a1, a2, b2, False), (b1, a2, b2, False),
                          (a2, a1, b1, True), (b2, a1, b1, True)):
        q = project(p, a, b)
        d = abs(p - q)
        if best is None or d < best[0]:
            best = (d, q, p) if flip else (d, p, q)
    return best


def _segment_distance(a1, b1, a2, b2):
    """Euclidean distance between two closed segments."""
    return _segment_distance_points(a1, b1, a2, b2)[0]


def _segments_intersect(a1, b1, a2, b2):
    d1 = _cross(b1 - a1, a2 - a1)
    d2 = _cross(b1 - a1, b2 - a1)
    d3 = _cross(b2 - a2, a1 - a2)
    d4 = _cross(b2 - a2, b1 - a2)
    return (d1 * d2 < 0.0) and (d3 * d4 < 0.0)
