"""The two concrete experiment instances: a once-punctured torus with a
twisting family of multicurves, and the genus-two surface glued from two
slit tori, whose plus/minus multicurves are the horizontal and vertical
cylinder cores of the flat construction.

An instance bundles the group backend, the flat family, the pair of
weighted multicurves with exact intersection data, and the declared thick
components, so the comparison layer can ask either side anything it needs.
"""

from __future__ import annotations

import math

from .curves import (
    EmbeddedSlope,
    TorusSlope,
    WeightedMultiCurve,
    WordHandle,
    dehn_twist,
)
from .flat import SlitPairFamily, TorusFlatFamily
from .fuchsian import (
    FNPoint,
    GenusTwoTorusPair,
    OncePuncturedTorus,
    _pair,
    word_inverse,
    word_reduce,
)


class TorusTwistInstance:
    """nu+ = the (1,0) curve, nu- = its image under -n twists around (0,1).

    The balance time of the twisting curve alpha = (0,1) is 0; the relative
    twisting of the pair around alpha is n up to a bounded error.
    """

    def __init__(self, n, w_plus=1.0, w_minus=1.0):
        self.n = n
        self.system = OncePuncturedTorus()
        self.alpha = TorusSlope(0, 1)
        base = TorusSlope(1, 0)
        self.nu_plus = WeightedMultiCurve([(base, w_plus)])
        self.nu_minus = WeightedMultiCurve(
            [(dehn_twist(base, self.alpha, -n), w_minus)])
        self.flat = TorusFlatFamily(self.nu_plus, self.nu_minus)
        self.start = FNPoint([0.5], [0.0])

    def chart(self, target):
        """A unimodular remarking sending `target` to the chart curve (0,1).

        Far along the family the short curve is a component of the pair
        rather than the chart curve, and the fixed chart turns ill
        conditioned; minimizing in the remarked chart and mapping curves
        through it recovers well-conditioned certificates.  Returns
        (nu_plus', nu_minus', map) with map acting on slope handles.
        """
        p, q = target.p, target.q
        # solve [[a, b], [c, d]] (p, q)^T = (0, 1)^T with det 1
        g, x, y = _ext_gcd_pair(p, q)
        if g != 1:
            raise ValueError("chart target must be primitive")
        a, b = q, -p
        c, d = x, y

        def mapped(h):
            return TorusSlope(a * h.p + b * h.q, c * h.p + d * h.q)

        def map_multi(nu):
            return WeightedMultiCurve([(mapped(h), w) for h, w in nu.components])

        return map_multi(self.nu_plus), map_multi(self.nu_minus), mapped

    def short_curve_candidates(self):
        return [self.alpha]

    def q_length(self, handle, t):
        return self.flat.q_length(handle, t)

    def annuli(self, handle, t):
        return self.flat.annuli(handle, t)

    def q_twist(self, nu, handle, t):
        # single-component multicurves: twist of the component's leaf
        if isinstance(nu, WeightedMultiCurve):
            nu = nu.components[0][0]
        return self.flat.q_twist(nu, handle, t)

    def flat_complexity(self, handle, t):
        """K for the once-punctured torus: every thick piece is a pants
        whose boundary is the curve itself, so the ratio is 1."""
        return 1.0

    def pants_ratio_set(self, marking, alpha_id):
        return list(marking.decomposition.curves)


def _ext_gcd_pair(a, b):
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


class SlitPairInstance:
    """Two unit-area-1/2 slit tori glued crosswise; the plus multicurve is
    the horizontal cylinder system, the minus one the vertical system.

    Weights are the exact cylinder heights at t = 0; the slit-crossing
    components are realized as words through the waist, calibrated so the
    pair twists oppositely and boundedly around it.
    """

    def __init__(self, eps):
        self.eps = eps
        self.flat = SlitPairFamily(eps)
        self.system = GenusTwoTorusPair(inner_slope=(1, 1), dual_slope=(1, 0))
        self.alpha = self.system.waist

        free_h, crossing_h = self.flat.horizontal_cylinders(0.0)
        w_free, w_cross = free_h[1], crossing_h[1]

        self.h_transit = WordHandle("hplus", self._transit_word(
            ((1, 1),), ((3, 1),), 0), system=self.system)
        self.v_transit = WordHandle("vminus", self._transit_word(
            ((0, 1), (1, -1)), ((2, 1), (3, -1)), -1), system=self.system)
        self._register_intersections()

        self.nu_plus = WeightedMultiCurve([
            (EmbeddedSlope(1, 1, 0), w_free),
            (EmbeddedSlope(2, 1, 0), w_free),
            (self.h_transit, w_cross),
        ])
        self.nu_minus = WeightedMultiCurve([
            (EmbeddedSlope(1, 0, 1), w_free),
            (EmbeddedSlope(2, 0, 1), w_free),
            (self.v_transit, w_cross),
        ])
        self.start = FNPoint([0.3, 1.0, 1.0], [0.0, 0.0, 0.0])

    def _transit_word(self, loop1, loop2, k):
        cw = list(self.system.waist_word(1))
        cpow = []
        for _ in range(max(0, k)):
            cpow += cw
        for _ in range(max(0, -k)):
            cpow += word_inverse(tuple(cw))
        word = list(loop1) + cpow + list(loop2) + list(word_inverse(tuple(cpow)))
        return word_reduce(tuple(word))

    def _register_intersections(self):
        t = self.system.intersection_table
        waist = self.system.waist
        hp, vm = self.h_transit, self.v_transit
        t[_pair(hp, waist)] = 2
        t[_pair(vm, waist)] = 2
        # a transit makes one full loop in each piece: a horizontal loop
        # meets the (p, q) family |q| times, a vertical one |p| times
        for piece in (1, 2):
            for p, q in ((1, 1), (1, 0), (0, 1), (1, -1), (2, 1), (1, 2)):
                s = EmbeddedSlope(piece, p, q)
                t[_pair(hp, s)] = abs(s.q)
                t[_pair(vm, s)] = abs(s.p)
        t[_pair(hp, vm)] = 2

    def short_curve_candidates(self):
        return [self.alpha]

    def q_length(self, handle, t):
        return self.flat.q_length(handle, t)

    def annuli(self, handle, t):
        if isinstance(handle, WordHandle) and handle.name == "waist":
            return self.flat.waist_annuli(t)
        raise NotImplementedError("annuli tracked for the waist only")

    def q_twist(self, nu, handle, t):
        from .flat import FlatSurfaceError

        raise FlatSurfaceError(
            "the waist has a degenerate flat annulus: no flat twist data")

    def flat_complexity(self, handle, t):
        return self.flat.flat_complexity(t)

    def pants_ratio_set(self, marking, alpha_id):
        dec = marking.decomposition
        return [dec.curves[c]
                for c in dec.boundary_curves_of_adjacent_pants(alpha_id)]
