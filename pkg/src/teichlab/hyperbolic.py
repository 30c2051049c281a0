"""Exact hyperbolic trigonometry and upper half-plane primitives.

Everything here is plain double-precision scalar math: right-angled
hexagon/pentagon identities for pairs of pants, the half-plane factor
metric, and 2x2 isometries with a log-scale factor so that traces of
very long words never overflow.
"""

import cmath
import math

INF = float("inf")


class DomainError(ValueError):
    """Input outside the geometric domain (non-positive length, boundary point, ...)."""


class DegeneratePentagonError(DomainError):
    """sinh(l)*sinh(d) <= 1: the right-angled pentagon does not exist."""


class NoAxisError(DomainError):
    """Isometry is not hyperbolic, so it has no axis or translation length."""


def acosh_stable(x):
    """arccosh that keeps full relative accuracy for x near 1 and for huge x."""
    if x < 1.0:
        if x > 1.0 - 1e-12:
            return 0.0
        raise DomainError("acosh argument %r < 1" % (x,))
    u = x - 1.0
    if u < 1e-4:
        # acosh(1+u) = sqrt(2u) * (1 - u/12 + 3u^2/160 - ...)
        return math.sqrt(2.0 * u) * (1.0 - u / 12.0 + 3.0 * u * u / 160.0)
    if x > 1e8:
        return math.log(2.0 * x)
    return math.log(x + math.sqrt(x * x - 1.0))


def acosh_from_log(logx):
    """arccosh(x) given log(x), valid for x >= 1; log form for large x."""
    if logx > 18.0:
        # acosh(x) = log(2x) - 1/(4x^2) - ...; the correction is below 1e-16 here
        return logx + math.log(2.0)
    x = math.exp(logx)
    return acosh_stable(x)


def hexagon_opposite_side(l1, l2, l3):
    """Side opposite l3 in the right-angled hexagon with alternate sides l1, l2, l3.

    cosh d3 = (cosh l3 + cosh l1 cosh l2) / (sinh l1 sinh l2)
    """
    for v in (l1, l2, l3):
        if not (v > 0.0) or not math.isfinite(v):
            raise DomainError("hexagon side must be positive and finite, got %r" % (v,))
    num = math.cosh(l3) + math.cosh(l1) * math.cosh(l2)
    den = math.sinh(l1) * math.sinh(l2)
    return acosh_stable(num / den)


def hexagon_opposites(l1, l2, l3):
    """All three opposite sides (d1, d2, d3), d_i facing l_i."""
    return (
        hexagon_opposite_side(l2, l3, l1),
        hexagon_opposite_side(l3, l1, l2),
        hexagon_opposite_side(l1, l2, l3),
    )


def pentagon_perp(l, d):
    """Fifth side x of a right-angled pentagon: cosh x = sinh l sinh d."""
    if not (l > 0.0 and d > 0.0) or not (math.isfinite(l) and math.isfinite(d)):
        raise DomainError("pentagon sides must be positive and finite")
    p = math.sinh(l) * math.sinh(d)
    if p <= 1.0:
        raise DegeneratePentagonError(
            "sinh(%g)*sinh(%g) = %g <= 1, no common perpendicular" % (l, d, p)
        )
    return acosh_stable(p)


def hexagon_perp_between_opposite(sides, n):
    """Perpendicular between sides n and n+3 (cyclic) of a right-angled hexagon.

    `sides` lists the six side lengths in cyclic order.  The perpendicular
    satisfies cosh p = sinh s_{n+1} sinh s_{n+2} (and the same from the
    other half, a useful consistency check).
    """
    s = sides
    p1 = math.sinh(s[(n + 1) % 6]) * math.sinh(s[(n + 2) % 6])
    if p1 <= 1.0:
        raise DegeneratePentagonError("opposite sides of hexagon have no perpendicular")
    return acosh_stable(p1)


def _seam(lx, ly, lz):
    # common perpendicular between boundaries x and y of a pants with
    # boundary lengths (lx, ly, lz); lz = 0 is allowed and means a cusp
    num = math.cosh(lz / 2.0) + math.cosh(lx / 2.0) * math.cosh(ly / 2.0)
    den = math.sinh(lx / 2.0) * math.sinh(ly / 2.0)
    return acosh_stable(num / den)


class PantsGeometry:
    """Seams and self-perpendiculars of a hyperbolic pair of pants.

    Boundary lengths (la, lb, lc) > 0.  Fields:
      seam_ab, seam_ac, seam_bc           common perpendiculars between boundaries
      self_a_around_b, self_a_around_c    perpendicular from a to itself cutting off b (resp. c)
      (likewise for b and c)

    For the gluing configuration in which the b-slot carries the same
    surface curve as the a-slot, the seam between the two copies is
    seam_ab; the remaining labels are unchanged.
    """

    __slots__ = (
        "la", "lb", "lc",
        "seam_ab", "seam_ac", "seam_bc",
        "self_a_around_b", "self_a_around_c",
        "self_b_around_a", "self_b_around_c",
        "self_c_around_a", "self_c_around_b",
    )

    def __init__(self, la, lb, lc):
        for v in (la, lb, lc):
            if not (v > 0.0) or not math.isfinite(v):
                raise DomainError("pants boundary length must be positive, got %r" % (v,))
        self.la, self.lb, self.lc = la, lb, lc
        self.seam_ab = _seam(la, lb, lc)
        self.seam_ac = _seam(la, lc, lb)
        self.seam_bc = _seam(lb, lc, la)
        self.self_a_around_b = 2.0 * pentagon_perp(lb / 2.0, self.seam_ab)
        self.self_a_around_c = 2.0 * pentagon_perp(lc / 2.0, self.seam_ac)
        self.self_b_around_a = 2.0 * pentagon_perp(la / 2.0, self.seam_ab)
        self.self_b_around_c = 2.0 * pentagon_perp(lc / 2.0, self.seam_bc)
        self.self_c_around_a = 2.0 * pentagon_perp(la / 2.0, self.seam_ac)
        self.self_c_around_b = 2.0 * pentagon_perp(lb / 2.0, self.seam_bc)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}


def pants_geometry(la, lb, lc):
    """All seam and self-perpendicular lengths of the pants (la, lb, lc)."""
    return PantsGeometry(la, lb, lc)


def _seam_ac_derivative(la, lb, lc, tied):
    # d/d(la) of the seam between the a- and c-boundaries; `tied` means the
    # b-slot carries the same curve as the a-slot so lb == la varies too.
    u, b, g = la / 2.0, lb / 2.0, lc / 2.0
    num = math.cosh(b) + math.cosh(u) * math.cosh(g)
    den = math.sinh(u) * math.sinh(g)
    dnum = 0.5 * math.sinh(u) * math.cosh(g)
    if tied:
        dnum += 0.5 * math.sinh(b)
    dden = 0.5 * math.cosh(u) * math.sinh(g)
    d = acosh_stable(num / den)
    return (dnum * den - num * dden) / (den * den * math.sinh(d))


def _seam_bc_derivative(la, lb, lc):
    # d/d(la) of the seam between the b- and c-boundaries (a enters only
    # through the numerator cosh(la/2) term)
    u, b, g = la / 2.0, lb / 2.0, lc / 2.0
    num = math.cosh(u) + math.cosh(b) * math.cosh(g)
    den = math.sinh(b) * math.sinh(g)
    d = acosh_stable(num / den)
    return 0.5 * math.sinh(u) / (den * math.sinh(d))


class PerpDerivatives:
    """d/d(l(alpha)) of pants perpendiculars, in closed form.

    `same_pair` selects the gluing in which two boundary slots of the pants
    carry the same surface curve alpha (so both half-lengths vary); the
    third boundary is gamma.  Otherwise the slots are (alpha, beta, gamma)
    with three distinct curves.

    Fields (None where the quantity does not exist in the configuration):
      d_seam        seam alpha<->gamma
      hat_seam      seam alpha<->beta (the doubled-alpha seam when same_pair)
      self_alpha    perpendicular from alpha to itself around gamma
      self_gamma    perpendicular from gamma to itself around alpha
      far_seam      seam beta<->gamma (distinct configuration only)
    """

    __slots__ = ("d_seam", "hat_seam", "self_alpha", "self_gamma", "far_seam")

    def __init__(self, la, lb, lc, same_pair):
        if same_pair:
            lb = la
        u, g = la / 2.0, lc / 2.0
        d_ac = _seam(la, lc, lb)
        d_ab = _seam(la, lb, lc)

        self.d_seam = _seam_ac_derivative(la, lb, lc, tied=same_pair)

        # seam between the alpha- and beta-slots; when same_pair both ends vary
        ub = lb / 2.0
        num = math.cosh(g) + math.cosh(u) * math.cosh(ub)
        den = math.sinh(u) * math.sinh(ub)
        if same_pair:
            dnum = math.sinh(u) * math.cosh(u)
            dden = math.cosh(u) * math.sinh(u)
        else:
            dnum = 0.5 * math.sinh(u) * math.cosh(ub)
            dden = 0.5 * math.cosh(u) * math.sinh(ub)
        self.hat_seam = (dnum * den - num * dden) / (den * den * math.sinh(d_ab))

        # self-perp of alpha around gamma: cosh(h/2) = sinh(d_ac) sinh(g)
        half = pentagon_perp(g, d_ac)
        self.self_alpha = 2.0 * math.cosh(d_ac) * math.sinh(g) * self.d_seam / math.sinh(half)

        # self-perp of gamma around alpha: cosh(z) = sinh(d_ac) sinh(u)
        z = pentagon_perp(u, d_ac)
        self.self_gamma = 2.0 * (
            math.cosh(d_ac) * math.sinh(u) * self.d_seam
            + math.sinh(d_ac) * 0.5 * math.cosh(u)
        ) / math.sinh(z)

        self.far_seam = None if same_pair else _seam_bc_derivative(la, lb, lc)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}


def perp_derivatives(la, lb, lc, same_pair=False):
    """Closed-form d/d(l(alpha)) of the pants perpendiculars; see PerpDerivatives."""
    for v in (la, lb, lc):
        if not (v > 0.0) or not math.isfinite(v):
            raise DomainError("pants boundary length must be positive, got %r" % (v,))
    return PerpDerivatives(la, lb, lc, same_pair)


def halfplane_factor_distance(z1, z2):
    """Half the hyperbolic distance between two upper half-plane points.

    cosh(2d) = 1 + |z1 - z2|^2 / (2 Im z1 Im z2)
    """
    z1, z2 = complex(z1), complex(z2)
    if z1.imag <= 0.0 or z2.imag <= 0.0:
        raise DomainError("points must lie in the open upper half-plane")
    u = abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag)
    return 0.5 * acosh_stable(1.0 + u)


def hyperbolic_distance(z1, z2):
    """The usual hyperbolic distance in the upper half-plane."""
    return 2.0 * halfplane_factor_distance(z1, z2)


# ---------------------------------------------------------------------------
# isometries and axes


class GeodesicH:
    """Oriented geodesic of the upper half-plane, given by two ideal endpoints.

    Endpoints live in R + {INF}; orientation runs start -> end.
    """

    __slots__ = ("start", "end")

    def __init__(self, start, end):
        if start == end:
            raise DomainError("geodesic endpoints must be distinct")
        self.start = start
        self.end = end

    def reversed(self):
        return GeodesicH(self.end, self.start)

    def __repr__(self):
        return "GeodesicH(%r, %r)" % (self.start, self.end)


def _solve_fixed_points(a, b, c, d):
    # fixed points of z -> (az+b)/(cz+d) on the ideal boundary; the root of
    # smaller magnitude comes from the product formula, because the direct
    # quadratic cancels catastrophically for nearly tangent configurations
    if abs(c) < 1e-300:
        # z = inf and the finite solution of (a-d) z = -b
        if abs(a - d) < 1e-300:
            return (INF, INF)
        return (INF, -b / (a - d))
    disc = (a - d) * (a - d) + 4.0 * b * c
    if disc < 0.0:
        raise NoAxisError("elliptic isometry has no boundary fixed points")
    r = math.sqrt(disc)
    s = (a - d) + r if (a - d) >= 0.0 else (a - d) - r
    if s == 0.0:
        x1 = ((a - d) + r) / (2.0 * c)
        return (x1, -x1)
    x_big = s / (2.0 * c)
    x_small = (-b / c) / x_big if x_big != 0.0 else (-b) / c
    return (x_big, x_small)


class Isometry:
    """Orientation-preserving isometry of H^2 as a scaled 2x2 real matrix.

    The actual matrix is exp(logscale) * [[a, b], [c, d]] and has
    determinant 1; entries are kept at unit scale so that words of length
    in the thousands (traces ~ e^1000) never overflow.
    """

    __slots__ = ("a", "b", "c", "d", "logscale")

    def __init__(self, a, b, c, d, logscale=0.0, _normalized=False):
        if not _normalized:
            det = a * d - b * c
            if det <= 0.0:
                raise DomainError("matrix must have positive determinant")
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
            logscale = 0.0
        self.a, self.b, self.c, self.d = a, b, c, d
        self.logscale = logscale

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0, 0.0, _normalized=True)

    @classmethod
    def std_translation(cls, l):
        """Translation by length l along the imaginary axis, oriented to infinity.

        Built as exactly unimodular: dividing by the float a*d - b*c here
        would inject pure cancellation noise for large entries."""
        return cls(math.exp(l / 2.0), 0.0, 0.0, math.exp(-l / 2.0), 0.0,
                   _normalized=True)

    @classmethod
    def perp_translation(cls, m):
        """Translation by m along the unit circle (-1, 1), oriented toward +1."""
        ch, sh = math.cosh(m / 2.0), math.sinh(m / 2.0)
        return cls(ch, sh, sh, ch, 0.0, _normalized=True)

    # -- bookkeeping --------------------------------------------------------

    def _renormalized(self):
        m = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if m == 0.0 or not math.isfinite(m):
            raise DomainError("matrix underflowed or overflowed")
        a, b, c, d = self.a / m, self.b / m, self.c / m, self.d / m
        logscale = self.logscale + math.log(m)
        # re-impose det(actual) = 1 against drift; a*d - b*c loses a digit
        # per unit of logscale to cancellation, so correct only while the
        # correction itself is cleaner than the drift it removes
        if abs(logscale) < 1.0:
            det = a * d - b * c
            target = math.exp(-2.0 * logscale)
            if det > 0.0:
                corr = math.sqrt(det / target)
                a, b, c, d = a / corr, b / corr, c / corr, d / corr
        return Isometry(a, b, c, d, logscale, _normalized=True)

    def det_residual(self):
        """|log det(actual)|; meaningful while the scale factor is moderate."""
        det_entries = self.a * self.d - self.b * self.c
        if det_entries <= 0.0:
            return INF
        return abs(math.log(det_entries) + 2.0 * self.logscale)

    # -- algebra ------------------------------------------------------------

    def __mul__(self, other):
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        out = Isometry(a, b, c, d, self.logscale + other.logscale, _normalized=True)
        return out._renormalized()

    def inverse(self):
        # actual inverse = [[d, -b], [-c, a]] at the same scale
        return Isometry(self.d, -self.b, -self.c, self.a, self.logscale, _normalized=True)

    def __pow__(self, n):
        if n == 0:
            return Isometry.identity()
        base = self if n > 0 else self.inverse()
        n = abs(n)
        out = None
        while n:
            if n & 1:
                out = base if out is None else out * base
            base = base * base
            n >>= 1
        return out

    def conjugated_by(self, h):
        """h * self * h^-1."""
        return h * self * h.inverse()

    # -- geometry -----------------------------------------------------------

    def trace(self):
        t = (self.a + self.d) * (math.exp(self.logscale) if self.logscale < 700.0 else INF)
        return t

    def trace_abs_log(self):
        """log |trace| of the actual matrix (useful when it overflows)."""
        t = abs(self.a + self.d)
        if t == 0.0:
            return -INF
        return self.logscale + math.log(t)

    def is_hyperbolic(self, tol=1e-9):
        return self.trace_abs_log() > math.log(2.0) + tol

    def translation_length(self):
        """2 arccosh(|tr|/2); raises NoAxisError unless hyperbolic."""
        lt = self.trace_abs_log()
        if lt <= math.log(2.0) + 1e-12:
            if lt >= math.log(2.0) - 1e-12:
                raise NoAxisError("parabolic isometry (|tr| = 2)")
            raise NoAxisError("elliptic isometry (|tr| < 2)")
        if lt > 40.0:
            return 2.0 * lt
        return 2.0 * acosh_stable(abs(self.a + self.d) * math.exp(self.logscale) / 2.0)

    def fixed_points(self):
        """(repelling, attracting) ideal fixed points of a hyperbolic isometry."""
        if not self.is_hyperbolic(tol=0.0):
            raise NoAxisError("no axis: |trace| <= 2")
        a, b, c, d = self.a, self.b, self.c, self.d
        x1, x2 = _solve_fixed_points(a, b, c, d)

        # |derivative| at x is det/(cx+d)^2 with the same det at both fixed
        # points, so the attracting one simply has the larger |cx+d|
        def denom_abs(x):
            if x == INF:
                return abs(a)  # derivative at inf ~ (d/a)^2; larger |a| attracts
            return abs(c * x + d)

        # the attracting fixed point has the smaller |derivative|
        if denom_abs(x1) > denom_abs(x2):
            return (x2, x1)
        return (x1, x2)

    def axis(self):
        rep, att = self.fixed_points()
        return GeodesicH(rep, att)

    def apply(self, z):
        """Apply to a boundary point (real or INF) or an interior complex point."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if z == INF:
            if c == 0.0:
                return INF
            return a / c
        num = a * z + b
        den = c * z + d
        if isinstance(z, complex):
            return num / den
        if den == 0.0:
            return INF
        return num / den


def axis_and_length(g):
    """(oriented axis, translation length) of a hyperbolic isometry."""
    return g.axis(), g.translation_length()


def std_map(axis):
    """Isometry sending axis.start -> 0 and axis.end -> infinity."""
    u, v = axis.start, axis.end
    if u == INF:
        # z -> -1/(z - v) sends inf -> 0, v -> inf
        return Isometry(0.0, -1.0, 1.0, -v)
    if v == INF:
        return Isometry(1.0, -u, 0.0, 1.0)
    # z -> (z - u)/(-z + v) has det (v - u); for u > v use (z - u)/(z - v)
    if v > u:
        return Isometry(1.0, -u, -1.0, v)
    return Isometry(1.0, -u, 1.0, -v)


def project_to_axis(x, axis):
    """Signed position along the oriented axis of the foot of the perpendicular
    from ideal point x; position 0 is the point sent to i by std_map."""
    n = std_map(axis)
    y = n.apply(x)
    if y == INF:
        return INF
    if y == 0.0:
        return -INF
    return math.log(abs(y))


def axis_distance(axis1, axis2):
    """Distance between two disjoint geodesics (0 if they cross or share an endpoint)."""
    n = std_map(axis1)
    u, v = n.apply(axis2.start), n.apply(axis2.end)
    if u == INF or v == INF:
        return 0.0
    if u == 0.0 or v == 0.0 or (u < 0.0) != (v < 0.0):
        return 0.0
    num = abs(u + v)
    den = abs(v - u)
    if num <= den:
        return 0.0
    return acosh_stable(num / den)


class AxisCrossing:
    """Data of one transverse crossing of an oriented axis by another geodesic.

    position   signed coordinate of the crossing point along the reference axis
    twist_num  signed distance between the feet of the perpendiculars from the
               two endpoints (positive when the right-side foot is ahead)
    cos_angle  cosine of the angle from the crossing geodesic to the axis
    """

    __slots__ = ("position", "twist_num", "cos_angle")

    def __init__(self, position, twist_num, cos_angle):
        self.position = position
        self.twist_num = twist_num
        self.cos_angle = cos_angle


def cross_axis(axis, other):
    """Crossing data of `other` against the oriented `axis`, or None if disjoint.

    With the axis normalized to (0, infinity) oriented upward, the right
    side is the positive half-line; for endpoints u < 0 < v the twist
    numerator is log v - log|u| and cos(theta) = (u + v)/(v - u), which
    satisfies cos(theta) = tanh(twist_num / 2).
    """
    n = std_map(axis)
    u, v = n.apply(other.start), n.apply(other.end)
    if u == INF:
        u, v = v, u
    if v == INF:
        if u >= 0.0:
            return None
        return AxisCrossing(INF, INF, 1.0)
    if u == INF or u == 0.0 or v == 0.0:
        return None
    if (u < 0.0) == (v < 0.0):
        return None
    if u > 0.0:
        u, v = v, u  # u negative, v positive; crossing is unoriented
    pos = 0.5 * (math.log(-u) + math.log(v))
    tw = math.log(v) - math.log(-u)
    cosang = (u + v) / (v - u)
    return AxisCrossing(pos, tw, cosang)
