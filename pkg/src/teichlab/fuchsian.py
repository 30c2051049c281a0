"""Matrix groups realizing Fenchel-Nielsen points, and everything measured
through them: curve lengths, crossing angles, twists, short markings,
thick-thin decompositions and collar-decomposition length estimates.

Two gluing patterns are realized exactly: the once-punctured torus (one
pants curve) and the genus-two surface made of two one-holed tori glued
along a waist curve (three pants curves).  Both come with exact word maps
for slope curves, so traces never involve any approximation beyond double
precision.
"""

from __future__ import annotations

import math

from .curves import (
    CUSP,
    BackendError,
    EmbeddedSlope,
    Marking,
    PantsDecomposition,
    SurfaceSig,
    TorusSlope,
    WeightedMultiCurve,
    WordHandle,
    intersection_number,
    marking_duals,
)
from .hyperbolic import (
    INF,
    DomainError,
    GeodesicH,
    Isometry,
    NoAxisError,
    acosh_stable,
    axis_distance,
    cross_axis,
    std_map,
)


class AssemblyError(RuntimeError):
    """Numerical assembly failed its own consistency checks."""


class PeripheralError(ValueError):
    """The word is parabolic (a puncture or boundary), so it has no length."""


class SearchExhaustedError(RuntimeError):
    """Crossing-lift search ended before the expected crossings were found."""


# ---------------------------------------------------------------------------
# Fenchel-Nielsen points


class FNPoint:
    """Per pants curve: a geodesic length l_i > 0 and a twist displacement
    tau_i in length units.  The normalized twist is s_i = tau_i / l_i."""

    __slots__ = ("lengths", "twists")

    def __init__(self, lengths, twists):
        self.lengths = [float(x) for x in lengths]
        self.twists = [float(x) for x in twists]
        if len(self.lengths) != len(self.twists):
            raise ValueError("need one twist per length")
        for l in self.lengths:
            if not (l > 0.0) or not math.isfinite(l):
                raise DomainError("FN length must be positive and finite, got %r" % (l,))

    @property
    def s(self):
        return [t / l for t, l in zip(self.twists, self.lengths)]

    def to_vector(self):
        """Chart (log l_0, tau_0, log l_1, tau_1, ...)."""
        out = []
        for l, t in zip(self.lengths, self.twists):
            out.extend((math.log(l), t))
        return out

    @classmethod
    def from_vector(cls, vec):
        ls = [math.exp(v) for v in vec[0::2]]
        ts = list(vec[1::2])
        return cls(ls, ts)

    def perturbed(self, rng, scale):
        return FNPoint.from_vector(
            [v + rng.uniform(-scale, scale) for v in self.to_vector()]
        )

    def __repr__(self):
        return "FNPoint(l=%s, tau=%s)" % (
            ["%.6g" % x for x in self.lengths],
            ["%.6g" % x for x in self.twists],
        )


# ---------------------------------------------------------------------------
# words for slope curves


def christoffel(m, n):
    """Balanced 0/1 sequence with m zeros and n ones (m, n coprime)."""
    if m < 0 or n < 0 or m + n == 0:
        raise ValueError("need nonnegative counts, not both zero")
    if math.gcd(m, n) > 1:
        raise ValueError("(%d, %d) is not primitive" % (m, n))
    total = m + n
    word = []
    for k in range(1, total + 1):
        if (k * m) // total > ((k - 1) * m) // total:
            word.append(0)
        else:
            word.append(1)
    return word


def slope_word(e0, e1):
    """Simple-curve word with signed exponent counts e0, e1 of two generators.

    Returns a tuple of (letter, +-1) pairs following the balanced
    (Christoffel) interleaving, which represents the simple closed curve
    with the given homology on a (one-holed) torus.
    """
    s0 = 1 if e0 >= 0 else -1
    s1 = 1 if e1 >= 0 else -1
    seq = christoffel(abs(e0), abs(e1))
    return tuple((0, s0) if b == 0 else (1, s1) for b in seq)


def word_inverse(word):
    return tuple((g, -e) for g, e in reversed(word))


def word_reduce(word):
    """Free reduction, merging adjacent powers of the same generator."""
    out = []
    for g, e in word:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            s = out[-1][1] + e
            out.pop()
            if s != 0:
                out.append((g, s))
        else:
            out.append((g, e))
    return tuple(out)


# ---------------------------------------------------------------------------
# assembled representations


class FuchsianRep:
    """A discrete group realizing an FN point on a fixed decomposition.

    `gens` are the group generators; `curve_mats` holds the holonomy of each
    pants curve; `relator_residual` measures how far the defining relations
    are from the identity (should be at noise level).
    """

    def __init__(self, system, fn, gens, curve_mats, relator_residual):
        self.system = system
        self.fn = fn
        self.gens = gens
        self.curve_mats = curve_mats
        self.relator_residual = relator_residual
        self._mat_cache = {}

    # -- words and matrices --------------------------------------------------

    def word_for(self, handle):
        return self.system.word_for(handle)

    def matrix_for_word(self, word):
        # merging adjacent powers lets long twist blocks go through
        # exponentiation by squaring, which keeps rounding noise flat
        out = None
        for g, e in word_reduce(word):
            m = self.gens[g] ** e
            out = m if out is None else out * m
        return out if out is not None else Isometry.identity()

    def matrix_for(self, handle):
        key = handle
        try:
            return self._mat_cache[key]
        except (KeyError, TypeError):
            m = self.matrix_for_word(self.word_for(handle))
            try:
                self._mat_cache[key] = m
            except TypeError:
                pass
            return m

    # -- lengths --------------------------------------------------------------

    def curve_length(self, handle):
        m = self.matrix_for(handle)
        lt = m.trace_abs_log()
        if lt <= math.log(2.0) + 1e-12:
            raise PeripheralError("word for %r is not hyperbolic (|tr| <= 2)" % (handle,))
        return m.translation_length()

    def lamination_length(self, nu):
        if not isinstance(nu, WeightedMultiCurve):
            return self.curve_length(nu)
        return sum(w * self.curve_length(g) for g, w in nu.components)

    def pants_curve_length(self, cid):
        return self.curve_mats[cid].translation_length()


def curve_length(rep, handle):
    return rep.curve_length(handle)


def lamination_length(rep, nu):
    return rep.lamination_length(nu)


def _relator_residual(mat, factor_scales=()):
    """Distance of the actual matrix from +-identity, relative to the size
    of the factors that produced it (the absolute defect of a word that
    cancels down from entries of size kappa carries rounding noise of
    order kappa^2 eps, so that is the meaningful yardstick)."""
    s = math.exp(mat.logscale) if abs(mat.logscale) < 300.0 else INF
    a, b, c, d = mat.a * s, mat.b * s, mat.c * s, mat.d * s
    rp = max(abs(a - 1.0), abs(b), abs(c), abs(d - 1.0))
    rm = max(abs(a + 1.0), abs(b), abs(c), abs(d + 1.0))
    norm = 1.0
    for f in factor_scales:
        norm *= max(1.0, f)
    return min(rp, rm) / norm


def _matrix_scale(m):
    return math.exp(m.logscale) * max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))


def _one_holed_torus_pair(l, tau, boundary_length):
    """Generators (A, B) of a one-holed torus with inner curve FN data
    (l, tau) and boundary geodesic of length `boundary_length` (0 = cusp).

    A translates along (0, infinity); at tau = 0 the axis of B crosses it
    perpendicularly at i.  The commutator [A, B] is the boundary."""
    sh = math.sinh(l / 2.0)
    ch_m = math.sqrt(math.cosh(boundary_length / 4.0) ** 2 + sh * sh) / sh
    A = Isometry.std_translation(l)
    B = Isometry.std_translation(tau) * Isometry.perp_translation(2.0 * acosh_stable(ch_m))
    return A, B


def _commutator(x, y):
    return x * y * x.inverse() * y.inverse()


_ROT = Isometry(0.0, -1.0, 1.0, 0.0)


def _foot_normalizer(w, reference_axis_start=None):
    """Map the axis of w to (0, infinity), attracting end up, placing the
    foot of the perpendicular from the imaginary axis at i."""
    ax = w.axis()
    n = std_map(ax)
    # image of the imaginary axis under n
    u = n.apply(0.0)
    v = n.apply(INF)
    if u == INF or v == INF:
        pos = math.log(abs(u if v == INF else v))
    else:
        if (u < 0.0) != (v < 0.0):
            raise AssemblyError("inner-curve axis crosses the boundary axis")
        pos = 0.5 * (math.log(abs(u)) + math.log(abs(v)))
    return Isometry.std_translation(-pos) * n


class OncePuncturedTorus:
    """Backend for the once-punctured torus with pants curve the (0,1) slope.

    Slope (p, q) maps to exponents (q, p) of the generators (A, B); the
    commutator [A, B] is the puncture word.
    """

    def __init__(self):
        self.sig = SurfaceSig(1, 1)
        self.alpha = TorusSlope(0, 1)
        self.delta = TorusSlope(1, 0)
        self.decomposition = PantsDecomposition(
            self.sig,
            [self.alpha],
            [(("curve", 0, 0), ("curve", 0, 1), CUSP)],
        )
        self.intersection_table = {}
        self._reference = None

    # the pants curve handle of index cid
    def pants_curve(self, cid):
        return self.alpha

    def word_for(self, handle):
        if isinstance(handle, WordHandle):
            return handle.word
        if not isinstance(handle, TorusSlope):
            raise BackendError("unsupported handle %r" % (handle,))
        return slope_word(handle.q, handle.p)

    def assemble(self, fn):
        if len(fn.lengths) != 1:
            raise ValueError("once-punctured torus has a single FN pair")
        l, tau = fn.lengths[0], fn.twists[0]
        A, B = _one_holed_torus_pair(l, tau, 0.0)
        # the puncture relation in trace form: x^2 + y^2 + z^2 = xyz, which
        # stays meaningful at machine precision for arbitrarily short curves
        x = A.trace()
        y = B.trace()
        z = (A * B).trace()
        ssq = x * x + y * y + z * z
        residual = abs(ssq - x * y * z) / ssq
        rep = FuchsianRep(self, fn, [A, B], {0: A}, residual)
        _validate_rep(rep)
        return rep

    def reference_rep(self):
        if self._reference is None:
            self._reference = self.assemble(FNPoint([1.0], [0.0]))
        return self._reference

    def fn_size(self):
        return 1

    def dual_candidates(self, cid, twist_range=5, chosen=None):
        base = self.alpha if chosen is None else chosen[cid]
        r, s = _dual_slope(base.p, base.q)
        for k in range(-twist_range, twist_range + 1):
            yield TorusSlope(r + k * base.p, s + k * base.q), k

    def marking_for(self, rep, chosen, twist_range=5):
        dec = PantsDecomposition(
            self.sig, list(chosen), [(("curve", 0, 0), ("curve", 0, 1), CUSP)]
        )
        return _marking_with_expansion(self, rep, dec, chosen, twist_range)

    def curve_pool(self, radius):
        out = []
        for q in range(0, radius + 1):
            for p in range(-radius, radius + 1):
                if (p, q) == (0, 0) or (q == 0 and p != 1) or math.gcd(abs(p), q) != 1:
                    continue
                out.append(TorusSlope(p, q))
        return out

    def order_pants_system(self, chosen):
        return chosen

    def thick_components(self, short_ids):
        if short_ids:
            return [ThickComponent("pants", boundary_ids=[0, 0], is_pants=True)]
        return [ThickComponent("whole", boundary_ids=[], is_pants=False)]


class GenusTwoTorusPair:
    """Backend for the genus-2 surface built from two one-holed tori glued
    along a separating waist curve.

    Pants curves: 0 = waist, 1 = inner curve of piece 1, 2 = inner curve of
    piece 2.  The inner pants curve of piece i is the embedded slope
    `inner_slope`; slopes (p, q) in a piece map to exponents of (G_i, H_i)
    by the inverse of the basis matrix [inner_slope | dual_slope].
    """

    def __init__(self, inner_slope=(1, 1), dual_slope=(1, 0)):
        self.sig = SurfaceSig(2, 0)
        self.inner_slope = inner_slope
        self.dual_slope = dual_slope
        det = inner_slope[0] * dual_slope[1] - inner_slope[1] * dual_slope[0]
        if abs(det) != 1:
            raise ValueError("inner and dual slopes must form a basis")
        self._basis_det = det
        self.waist = WordHandle("waist", (), system=self)
        self.decomposition = PantsDecomposition(
            self.sig,
            [self.waist,
             EmbeddedSlope(1, *inner_slope),
             EmbeddedSlope(2, *inner_slope)],
            [
                (("curve", 1, 0), ("curve", 1, 1), ("curve", 0, 0)),
                (("curve", 2, 0), ("curve", 2, 1), ("curve", 0, 1)),
            ],
        )
        self.intersection_table = {}
        self._reference = None
        self._register_base_intersections()

    def _register_base_intersections(self):
        t = self.intersection_table
        for piece in (1, 2):
            inner = EmbeddedSlope(piece, *self.inner_slope)
            t[_pair(self.waist, inner)] = 0
        t[_pair(self.waist, self.waist)] = 0

    def pants_curve(self, cid):
        return self.decomposition.curves[cid]

    def structural_intersection(self, h1, h2):
        """Intersections forced by the topology: any slope supported in one
        piece is disjoint from the separating waist."""
        handles = (h1, h2)
        if any(isinstance(h, WordHandle) and h.name == "waist" for h in handles):
            other = h1 if isinstance(h2, WordHandle) and h2.name == "waist" else h2
            if isinstance(other, EmbeddedSlope):
                return 0
        return None

    # -- word maps -------------------------------------------------------------

    def _slope_exponents(self, p, q):
        # solve (p, q) = x * inner + y * dual
        (gp, gq), (hp, hq) = self.inner_slope, self.dual_slope
        x = (p * hq - q * hp) / self._basis_det
        y = (gp * q - gq * p) / self._basis_det
        xi, yi = int(round(x)), int(round(y))
        if xi != x or yi != y:
            raise BackendError("slope (%d, %d) not integral in basis" % (p, q))
        return xi, yi

    def word_for(self, handle):
        if isinstance(handle, WordHandle):
            if handle.name == "waist":
                return self.waist_word(1)
            return handle.word
        if isinstance(handle, EmbeddedSlope):
            x, y = self._slope_exponents(handle.p, handle.q)
            base = slope_word(x, y)
            off = 0 if handle.piece == 1 else 2
            return tuple((g + off, e) for g, e in base)
        raise BackendError("unsupported handle %r" % (handle,))

    def waist_word(self, piece):
        g, h = (0, 1) if piece == 1 else (2, 3)
        return ((g, 1), (h, 1), (g, -1), (h, -1))

    def dehn_twist_handle(self, handle, alpha, n):
        """Twist of a word handle around the waist: conjugate the piece-2
        letters by the waist word n times."""
        if not (isinstance(alpha, WordHandle) and alpha.name == "waist"):
            raise BackendError("word-handle twisting supported along the waist only")
        if not isinstance(handle, WordHandle):
            raise BackendError("cannot twist %r via words" % (handle,))
        cw = self.waist_word(1)
        cpow = tuple((g, e * n) for g, e in cw) if n >= 0 else tuple(
            (g, -e * abs(n)) for g, e in reversed(cw)
        )
        cinv = word_inverse(cpow)
        out = []
        i = 0
        word = handle.word
        while i < len(word):
            g, e = word[i]
            if g >= 2:
                block = []
                while i < len(word) and word[i][0] >= 2:
                    block.append(word[i])
                    i += 1
                out.extend(cpow)
                out.extend(block)
                out.extend(cinv)
            else:
                out.append((g, e))
                i += 1
        new = word_reduce(out)
        twisted = WordHandle("%s|Tw%+d" % (handle.name, n), new, system=self)
        # intersections with curves disjoint from the waist are unchanged
        t = self.intersection_table
        for cid in range(3):
            pc = self.pants_curve(cid)
            key = _pair(handle, pc)
            if key in t:
                t[_pair(twisted, pc)] = t[key]
        return twisted

    # -- assembly ----------------------------------------------------------------

    def assemble(self, fn):
        if len(fn.lengths) != 3:
            raise ValueError("this genus-2 pattern has three FN pairs")
        L0, l1, l2 = fn.lengths
        t0, t1, t2 = fn.twists
        # build each piece in the frame where its boundary runs along
        # (0, infinity): the gluing matrix is then small, which keeps the
        # conjugated generators well conditioned
        A1, B1 = _one_holed_torus_pair(l1, t1, L0)
        A2, B2 = _one_holed_torus_pair(l2, t2, L0)
        M1 = _foot_normalizer(_commutator(A1, B1))
        M2 = _foot_normalizer(_commutator(A2, B2))
        A1, B1 = A1.conjugated_by(M1), B1.conjugated_by(M1)
        A2, B2 = A2.conjugated_by(M2), B2.conjugated_by(M2)
        # the rotation flips the axis orientation, so the twist enters with a
        # minus sign to keep the +tau direction consistent across all curves
        G = _ROT * Isometry.std_translation(-t0)
        a2 = G * A2 * G.inverse()
        b2 = G * B2 * G.inverse()
        C1 = _commutator(A1, B1)
        C2g = _commutator(a2, b2)
        rel = C1 * C2g
        # the relator is the one word that cancels from large intermediates
        # down to the identity, so its defect is measured against the
        # conditioning of those intermediates
        cond = max(_matrix_scale(A1) * _matrix_scale(B1),
                   _matrix_scale(a2) * _matrix_scale(b2))
        residual = _relator_residual(rel, (cond,))
        gens = [A1, B1, a2, b2]
        curve_mats = {0: C1, 1: A1, 2: a2}
        rep = FuchsianRep(self, fn, gens, curve_mats, residual)
        _validate_rep(rep)
        return rep

    def reference_rep(self):
        if self._reference is None:
            self._reference = self.assemble(FNPoint([1.0] * 3, [0.0] * 3))
        return self._reference

    def fn_size(self):
        return 3

    def dual_candidates(self, cid, twist_range=5, chosen=None):
        if cid in (1, 2):
            base = (EmbeddedSlope(cid, *self.inner_slope) if chosen is None
                    else chosen[cid])
            r, s = _dual_slope(base.p, base.q)
            for k in range(-twist_range, twist_range + 1):
                yield EmbeddedSlope(base.piece, r + k * base.p, s + k * base.q), k
            return
        # waist duals: a loop through both pieces, twisted and half-twisted;
        # the through-loops run parallel to the inner pants curves so the
        # dual stays disjoint from them
        inner1 = (EmbeddedSlope(1, *self.inner_slope) if chosen is None else chosen[1])
        inner2 = (EmbeddedSlope(2, *self.inner_slope) if chosen is None else chosen[2])
        w1 = self.word_for(inner1)
        w2 = self.word_for(inner2)
        for k in range(-twist_range, twist_range + 1):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    u1 = w1 if s1 > 0 else word_inverse(w1)
                    u2 = w2 if s2 > 0 else word_inverse(w2)
                    word = word_reduce(_conjugate_insert(u1, u2, self.waist_word(1), k))
                    name = "waistdual|%+d%+d|k%+d|%s%s" % (
                        s1, s2, k, _slope_tag(inner1), _slope_tag(inner2))
                    h = WordHandle(name, word, system=self)
                    t = self.intersection_table
                    t[_pair(h, self.waist)] = 2
                    t[_pair(h, inner1)] = 0
                    t[_pair(h, inner2)] = 0
                    yield h, k

    def marking_for(self, rep, chosen, twist_range=5):
        dec = PantsDecomposition(
            self.sig, list(chosen),
            [
                (("curve", 1, 0), ("curve", 1, 1), ("curve", 0, 0)),
                (("curve", 2, 0), ("curve", 2, 1), ("curve", 0, 1)),
            ],
        )
        return _marking_with_expansion(self, rep, dec, chosen, twist_range)

    def curve_pool(self, radius):
        out = [self.waist]
        for piece in (1, 2):
            for q in range(0, radius + 1):
                for p in range(-radius, radius + 1):
                    if (p, q) == (0, 0) or (q == 0 and p != 1) or math.gcd(abs(p), q) != 1:
                        continue
                    out.append(EmbeddedSlope(piece, p, q))
        return out

    def order_pants_system(self, chosen):
        waist = [h for h in chosen if isinstance(h, WordHandle)]
        p1 = [h for h in chosen if isinstance(h, EmbeddedSlope) and h.piece == 1]
        p2 = [h for h in chosen if isinstance(h, EmbeddedSlope) and h.piece == 2]
        if len(waist) != 1 or len(p1) != 1 or len(p2) != 1:
            raise SearchExhaustedError(
                "greedy pants system %r does not match the two-piece pattern" % (chosen,)
            )
        return [waist[0], p1[0], p2[0]]

    def thick_components(self, short_ids):
        if 0 in short_ids:
            return [
                ThickComponent("piece1", boundary_ids=[0], is_pants=False, piece=1),
                ThickComponent("piece2", boundary_ids=[0], is_pants=False, piece=2),
            ]
        return [ThickComponent("whole", boundary_ids=[], is_pants=False)]


def _pair(h1, h2):
    k1, k2 = repr(h1), repr(h2)
    return (k1, k2) if k1 <= k2 else (k2, k1)


def _marking_with_expansion(system, rep, dec, chosen, twist_range, cap=640):
    """Shortest duals with the twist-orbit range widened until no selected
    dual sits on the search boundary (a boundary pick means the true
    minimum may lie further out)."""
    r = twist_range
    while True:
        m = marking_duals(
            dec,
            rep.curve_length,
            lambda cid: system.dual_candidates(cid, r, chosen),
        )
        if all(abs(k) < r for k in m.dual_twists):
            return m
        r *= 2
        if r > cap:
            raise SearchExhaustedError("dual twist search did not stabilize")


def _dual_slope(p, q):
    """A slope (r, s) with p*s - q*r = 1."""
    g, s, r = _ext_gcd(p, q)
    if g != 1:
        raise ValueError("slope not primitive")
    return -r, s


def _ext_gcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_s, s = s, old_s - qq * s
        old_t, t = t, old_t - qq * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _slope_tag(handle):
    return "%d.%d" % (handle.p, handle.q)


def _conjugate_insert(u1, u2, cword, k):
    """u1 . cword^k . u2 . cword^-k as a letter sequence."""
    cpow = []
    if k > 0:
        for _ in range(k):
            cpow.extend(cword)
    elif k < 0:
        for _ in range(-k):
            cpow.extend(word_inverse(cword))
    out = list(u1)
    out.extend(cpow)
    out.extend(u2)
    out.extend(word_inverse(tuple(cpow)))
    return tuple(out)


def assemble_rep(decomposition_or_system, fn):
    """Build the matrix group for an FN point.

    Accepts a backend system (OncePuncturedTorus, GenusTwoTorusPair) or a
    PantsDecomposition produced by one of them.
    """
    system = decomposition_or_system
    if isinstance(system, PantsDecomposition):
        raise BackendError(
            "assemble_rep needs the backend system that owns the decomposition"
        )
    return system.assemble(fn)


def _validate_rep(rep):
    if rep.relator_residual > 1e-9:
        raise AssemblyError("relator residual %g too large" % rep.relator_residual)
    for cid, mat in rep.curve_mats.items():
        want = 2.0 * math.cosh(rep.fn.lengths[cid] / 2.0)
        got = abs(mat.trace())
        if abs(got - want) > 1e-8 * max(1.0, want):
            raise AssemblyError(
                "pants curve %d: trace %.12g does not match length (want %.12g)"
                % (cid, got, want)
            )


# ---------------------------------------------------------------------------
# crossings and twists

def _cluster_reps(entries, period, want):
    """Group circular positions into crossing clusters.

    `entries` is a discovery-ordered list of (position, payload).  Distinct
    crossings are separated by a definite fraction of the period while
    re-detections of one crossing through different conjugators agree far
    more closely, so with a known crossing count the clusters are split at
    the `want` largest circular gaps.  The first-found payload per cluster
    (shortest conjugator, hence best conditioned) is returned.  Returns
    None when the data cannot yet support `want` clusters.
    """
    if not entries:
        return None if want else []
    if want is None:
        tol = 1e-3 * period
        reps = []
        for pos, pay in entries:
            away = all(
                min(abs(pos - rp), period - abs(pos - rp)) > tol for rp, _ in reps
            )
            if away:
                reps.append((pos, pay))
        return reps
    order = sorted(range(len(entries)), key=lambda i: entries[i][0])
    if want == 1:
        return [entries[0]]
    if len(order) < want:
        return None
    gaps = []
    for j in range(len(order)):
        p1 = entries[order[j]][0]
        p2 = entries[order[(j + 1) % len(order)]][0]
        if j == len(order) - 1:
            p2 += period
        gaps.append((p2 - p1, j))
    by_size = sorted(gaps, reverse=True)
    splits = sorted(j for _, j in by_size[:want])
    if len(order) > want:
        smallest_split = by_size[want - 1][0]
        largest_internal = by_size[want][0]
        if largest_internal > 0.25 * smallest_split and largest_internal > 1e-9 * period:
            return None  # clusters not clearly separated yet
    clusters = []
    start = splits[-1] + 1
    for s in splits:
        members = []
        j = start % len(order)
        while True:
            members.append(order[j])
            if j == s:
                break
            j = (j + 1) % len(order)
        clusters.append(min(members))  # first-discovered representative
        start = s + 1
    return [entries[i] for i in sorted(clusters)]


class Crossing:
    """One transverse crossing of the reference curve by a lamination leaf."""

    __slots__ = ("handle", "weight", "position", "tw", "cos_angle", "leaf_axis")

    def __init__(self, handle, weight, position, tw, cos_angle, leaf_axis):
        self.handle = handle
        self.weight = weight
        self.position = position
        self.tw = tw
        self.cos_angle = cos_angle
        self.leaf_axis = leaf_axis


class CrossingData:
    """All crossings of a multicurve with a curve, plus the aggregates."""

    __slots__ = ("alpha", "l_alpha", "crossings", "tw", "spread")

    def __init__(self, alpha, l_alpha, crossings):
        self.alpha = alpha
        self.l_alpha = l_alpha
        self.crossings = crossings
        tws = [c.tw for c in crossings]
        self.tw = min(tws) if tws else 0.0
        self.spread = (max(tws) - min(tws)) if tws else 0.0

    @property
    def Tw(self):
        return abs(self.tw)

    @property
    def total_weight(self):
        return sum(c.weight for c in self.crossings)

    def cos_average(self):
        """Weighted average cosine of the crossing angles."""
        tot = self.total_weight
        if tot == 0.0:
            raise ValueError("no crossings")
        return sum(c.weight * c.cos_angle for c in self.crossings) / tot

    def cos_sum(self):
        """Weighted sum of crossing cosines (the twist derivative of length)."""
        return sum(c.weight * c.cos_angle for c in self.crossings)


def _conjugator_candidates(rep, word, depth):
    """Conjugators likely to expose all crossing lifts: prefixes of the word
    (two periods, both directions), padded with a generator ball."""
    cands = [Isometry.identity()]
    pref = Isometry.identity()
    letters = list(word) + list(word)
    for g, e in letters:
        step = 1 if e > 0 else -1
        for _ in range(abs(e)):
            pref = pref * (rep.gens[g] ** step)
            if abs(pref.logscale) > 340.0:
                break  # conjugators this large only produce rounding fog
            cands.append(pref)
        else:
            continue
        break
    suf = Isometry.identity()
    for g, e in reversed(letters):
        step = -1 if e > 0 else 1
        for _ in range(abs(e)):
            suf = suf * (rep.gens[g] ** step)
            if abs(suf.logscale) > 340.0:
                break
            cands.append(suf)
        else:
            continue
        break
    if depth > 0:
        exp_total = sum(abs(e) for _, e in word_reduce(word))
        ball = [Isometry.identity()]
        frontier = [Isometry.identity()]
        for _ in range(depth):
            new = []
            for h in frontier:
                for g in rep.gens:
                    for m in (g, g.inverse()):
                        new.append(h * m)
            ball.extend(new)
            frontier = new
        # crossings of a multi-strand word against a short curve hide behind
        # mixed-power translates g_i^a g_j^b, one per strand of the word
        if exp_total <= 64:
            span = min(16, exp_total + 4)
            powers = []
            for g in rep.gens:
                row = {0: Isometry.identity()}
                acc_p, acc_m = g, g.inverse()
                for m in range(1, span + 1):
                    row[m] = acc_p
                    row[-m] = acc_m
                    acc_p = acc_p * g
                    acc_m = acc_m * g.inverse()
                powers.append(row)
            for i, row_i in enumerate(powers):
                for a in (-2, -1, 1, 2):
                    ball.append(row_i[a] if abs(a) <= span else row_i[span])
                for j, row_j in enumerate(powers):
                    if i == j:
                        continue
                    for a in (-2, -1, 1, 2):
                        if abs(a) > span:
                            continue
                        for b in range(-span, span + 1):
                            if b == 0:
                                continue
                            ball.append(row_i[a] * row_j[b])
        base = list(cands)
        cands = []
        for h in ball:
            for p in base:
                cands.append(h * p)
    return cands


def geodesic_twist(rep, nu, alpha, expected=None, max_depth=2):
    """Crossing data of the multicurve `nu` around the curve `alpha`.

    For each component, conjugate lifts whose axes cross the axis of alpha
    are located, each crossing contributing a signed twist
    (distance between the projected endpoints) / l(alpha) and an angle
    satisfying cos(theta) = tanh(tw * l / 2).  The aggregate twist is the
    minimum over all crossings.  `expected` overrides the crossing count
    per component (defaults to the backend intersection number).
    """
    if not isinstance(nu, WeightedMultiCurve):
        nu = WeightedMultiCurve([(nu, 1.0)])
    a_mat = rep.matrix_for(alpha)
    try:
        a_axis = a_mat.axis()
    except NoAxisError:
        raise PeripheralError("twisting curve %r is not hyperbolic" % (alpha,))
    l_alpha = a_mat.translation_length()
    crossings = []
    for handle, weight in nu.components:
        try:
            want = expected if expected is not None else intersection_number(handle, alpha)
        except Exception:
            want = None
        if want == 0:
            continue
        word = rep.word_for(handle)
        g_mat = rep.matrix_for(handle)
        if not g_mat.is_hyperbolic(tol=0.0):
            raise PeripheralError("leaf %r is not hyperbolic" % (handle,))
        base_len = g_mat.translation_length()
        len_tol = 1e-8 * max(1.0, base_len)
        raw = []
        seen_keys = set()
        reps = None
        for depth in range(max_depth + 1):
            for h in _conjugator_candidates(rep, word, depth):
                try:
                    lift = h * g_mat * h.inverse()
                    hu, hv = lift.fixed_points()
                except (NoAxisError, DomainError):
                    continue
                if hu == hv:
                    continue
                # an accurately conjugated lift preserves translation length;
                # ill-conditioned conjugators corrupt it along with the axis
                if abs(lift.translation_length() - base_len) > len_tol:
                    continue
                xing = cross_axis(a_axis, GeodesicH(hu, hv))
                if xing is None or not math.isfinite(xing.position):
                    continue
                pos = math.fmod(xing.position, l_alpha)
                if pos < 0.0:
                    pos += l_alpha
                key = round(pos / l_alpha * 1e9)
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                raw.append((pos, Crossing(
                    handle, weight, pos, xing.twist_num / l_alpha,
                    xing.cos_angle, GeodesicH(hu, hv),
                )))
            reps = _cluster_reps(raw, l_alpha, want)
            if reps is not None and (want is None or len(reps) == want):
                break
        if reps is None or (want is not None and len(reps) != want):
            raise SearchExhaustedError(
                "found %d crossing candidates, want %s, of %r with %r"
                % (len(raw), want, handle, alpha)
            )
        if want is None and not reps:
            raise SearchExhaustedError(
                "no crossings of %r with %r found (disjoint, or raise max_depth)"
                % (handle, alpha)
            )
        crossings.extend(c for _, c in reps)
    if not crossings:
        raise SearchExhaustedError("multicurve does not cross %r" % (alpha,))
    return CrossingData(alpha, l_alpha, crossings)


def twist_length_derivative(rep, nu, alpha):
    """Analytic d l(nu) / d tau_alpha: the weighted sum of crossing cosines."""
    return geodesic_twist(rep, nu, alpha).cos_sum()


# ---------------------------------------------------------------------------
# markings, thick-thin, capmarking


class ThickComponent:
    """A component of the thick part: boundary pants-curve ids plus tags."""

    __slots__ = ("name", "boundary_ids", "is_pants", "piece")

    def __init__(self, name, boundary_ids, is_pants, piece=None):
        self.name = name
        self.boundary_ids = boundary_ids
        self.is_pants = is_pants
        self.piece = piece

    def __repr__(self):
        return "ThickComponent(%s)" % (self.name,)


def short_pants_and_marking(rep, radius=8, max_radius=32, twist_range=5):
    """Greedy short pants system plus shortest dual curves.

    Enumerates the backend's curve pool by length, picking the shortest
    curve disjoint from those already chosen until a full pants system is
    assembled, then selects shortest duals from the twist-orbit candidates.
    """
    system = rep.system
    want = system.sig.complexity
    r = radius
    while True:
        pool = sorted(system.curve_pool(r), key=rep.curve_length)
        chosen = []
        for h in pool:
            if len(chosen) == want:
                break
            try:
                if all(intersection_number(h, c) == 0 and h != c for c in chosen):
                    chosen.append(h)
            except Exception:
                continue
        if len(chosen) == want:
            break
        r *= 2
        if r > max_radius:
            raise SearchExhaustedError("pants system not found within pool radius")
    chosen = system.order_pants_system(chosen)
    return system.marking_for(rep, chosen, twist_range)


def thick_thin(rep, eps0=0.1):
    """(short pants curves, thick components) of the decomposition."""
    short_ids = [
        cid for cid in range(len(rep.system.decomposition.curves))
        if rep.pants_curve_length(cid) < eps0
    ]
    return short_ids, rep.system.thick_components(short_ids)


def capmarking_check(rep, xi, marking_curves, table=None):
    """Ratio l(xi) / i(M, xi) against a short marking M on a thick surface."""
    total_i = sum(intersection_number(m, xi, table) for m in marking_curves)
    if total_i == 0:
        raise ValueError("marking does not intersect the curve")
    return rep.curve_length(xi) / total_i


# ---------------------------------------------------------------------------
# collar decomposition estimate


class CollarDecomposition:
    """Reconstruction of l(xi) from perpendicular arcs plus collar travel.

    bracket       sum of arc lengths + sum over curves of l * Tw * i
    direct        the geodesic length of xi
    defect        |direct - bracket|
    defect_bound  K * i(xi, boundary of the cut surface) with K as given
    collar_terms  per curve: (measured one-sided collar length,
                  [log(1/l) + l*Tw/2] * i estimate)
    """

    __slots__ = ("bracket", "direct", "defect", "crossing_total",
                 "arc_lengths", "collar_terms")

    def __init__(self, bracket, direct, arc_lengths, collar_terms):
        self.bracket = bracket
        self.direct = direct
        self.defect = abs(direct - bracket)
        self.arc_lengths = arc_lengths
        self.collar_terms = collar_terms
        self.crossing_total = sum(n for (_, _, n) in collar_terms)


def collar_decomposition_estimate(rep, xi, alpha_ids, eps0=0.1, collar_len=0.3):
    """Split l(xi) into perpendicular arcs between crossed curve lifts plus
    twisting travel along the crossed curves.

    `alpha_ids` are pants-curve ids to cut along.  Returns a
    CollarDecomposition; the defect is bounded by a uniform constant times
    i(xi, boundary) = 2 * sum of crossing numbers.
    """
    xi_mat = rep.matrix_for(xi)
    l_xi = xi_mat.translation_length()
    xi_axis = xi_mat.axis()

    events = []  # (position along xi, normalized lift axis)
    collar_terms = []
    for cid in alpha_ids:
        alpha = rep.system.pants_curve(cid)
        n_cross = intersection_number(xi, alpha)
        l_a = rep.pants_curve_length(cid)
        if n_cross == 0:
            continue
        data = geodesic_twist(rep, xi, alpha)
        # one-sided collar segments: sinh(seg) * sin(theta) = sinh(width)
        if l_a < eps0:
            width = acosh_stable(collar_len / l_a)
            measured = 0.0
            for c in data.crossings:
                s = abs(c.cos_angle)
                sin_theta = math.sqrt(max(1e-300, 1.0 - s * s))
                measured += math.asinh(math.sinh(width) / sin_theta)
            est = (math.log(1.0 / l_a) + l_a * data.Tw / 2.0) * n_cross
            collar_terms.append((measured, est, n_cross))
        else:
            collar_terms.append((0.0, 0.0, n_cross))

        # lifts of alpha crossing the axis of xi, normalized to one period
        a_mat = rep.curve_mats[cid]
        base_len = a_mat.translation_length()
        len_tol = 1e-8 * max(1.0, base_len)
        word = rep.word_for(xi)
        raw = []
        seen_keys = set()
        reps = None
        for depth in range(3):
            for h in _conjugator_candidates(rep, word, depth):
                try:
                    lift = h * a_mat * h.inverse()
                    hu, hv = lift.fixed_points()
                except (NoAxisError, DomainError):
                    continue
                if hu == hv:
                    continue
                if abs(lift.translation_length() - base_len) > len_tol:
                    continue
                xing = cross_axis(xi_axis, GeodesicH(hu, hv))
                if xing is None or not math.isfinite(xing.position):
                    continue
                k = math.floor(xing.position / l_xi)
                pos = xing.position - k * l_xi
                key = round(pos / l_xi * 1e9)
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                shifted = (xi_mat ** (-k)) * lift * (xi_mat ** k)
                try:
                    su, sv = shifted.fixed_points()
                except NoAxisError:
                    continue
                raw.append((pos, GeodesicH(su, sv)))
            reps = _cluster_reps(raw, l_xi, n_cross)
            if reps is not None and len(reps) == n_cross:
                break
        if reps is None or len(reps) != n_cross:
            raise SearchExhaustedError(
                "found %d lift candidates of curve %d along %r, want %d"
                % (len(raw), cid, xi, n_cross)
            )
        events.extend(reps)

    if not events:
        return CollarDecomposition(l_xi, l_xi, [], [])

    events.sort(key=lambda e: e[0])
    arcs = []
    for i in range(len(events)):
        if i + 1 < len(events):
            arcs.append(axis_distance(events[i][1], events[i + 1][1]))
        else:
            nxt = events[0][1]
            wrapped = GeodesicH(xi_mat.apply(nxt.start), xi_mat.apply(nxt.end))
            arcs.append(axis_distance(events[i][1], wrapped))

    twist_travel = 0.0
    for cid in alpha_ids:
        alpha = rep.system.pants_curve(cid)
        n_cross = intersection_number(xi, alpha)
        if n_cross == 0:
            continue
        l_a = rep.pants_curve_length(cid)
        tw = geodesic_twist(rep, xi, alpha).Tw
        twist_travel += l_a * tw * n_cross

    bracket = sum(arcs) + twist_travel
    return CollarDecomposition(bracket, l_xi, arcs, collar_terms)
