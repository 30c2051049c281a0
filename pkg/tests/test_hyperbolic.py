import math
import random

import pytest

from teichlab import hyperbolic as hyp
from teichlab.hyperbolic import (
    GeodesicH,
    INF,
    Isometry,
    acosh_stable,
    axis_distance,
    cross_axis,
    halfplane_factor_distance,
    hexagon_opposite_side,
    hexagon_opposites,
    hexagon_perp_between_opposite,
    pants_geometry,
    pentagon_perp,
    perp_derivatives,
    project_to_axis,
    std_map,
)


def test_regular_hexagon_fixed_point():
    s = math.acosh(2.0)
    assert abs(hexagon_opposite_side(s, s, s) - s) < 1e-12
    assert abs(s - 1.3169578969248166) < 1e-12


def test_hexagon_unit_sides():
    assert abs(hexagon_opposite_side(1.0, 1.0, 1.0) - 1.7049128323580138) < 1e-9


def test_hexagon_small_sides_log_asymptotic():
    d3 = hexagon_opposite_side(0.01, 0.01, 1.0)
    assert abs(d3 - 10.836869736328103) < 1e-9
    assert abs(d3 - 2.0 * math.log(100.0)) < 2.0


def test_hexagon_round_trip_random():
    rng = random.Random(101)
    for _ in range(1000):
        l = [rng.uniform(0.01, 3.0) for _ in range(3)]
        d = hexagon_opposites(*l)
        back = hexagon_opposites(*d)
        for x, y in zip(l, back):
            assert abs(x - y) <= 1e-9 * x


def test_hexagon_rejects_bad_input():
    with pytest.raises(hyp.DomainError):
        hexagon_opposite_side(-1.0, 1.0, 1.0)
    with pytest.raises(hyp.DomainError):
        hexagon_opposite_side(1.0, float("nan"), 1.0)


def test_small_side_band_stays_narrow():
    # the defect d3 - log(1/l1) - log(1/l2) settles into a band of width < 3
    vals = []
    l = 0.05
    while l > 1e-5:
        d3 = hexagon_opposite_side(l, l, 1.0)
        vals.append(d3 - 2.0 * math.log(1.0 / l))
        l /= 2.0
    assert max(vals) - min(vals) < 3.0


def test_pentagon_values():
    assert abs(pentagon_perp(1.0, 2.0) - 2.1288997257139064) < 1e-9
    l, d = 0.7, 1.1
    # formula inversion: sinh l sinh d = cosh(0.5) gives back 0.5
    target = math.cosh(0.5)
    dd = math.asinh(target / math.sinh(l))
    assert abs(pentagon_perp(l, dd) - 0.5) < 1e-12


def test_pentagon_self_perp_log_estimate():
    # foot of the self-perpendicular for a very short curve: x = log(1/l) + O(1)
    l1 = 0.005
    d = math.asinh(1.0 / (l1 * 0.02))
    x = pentagon_perp(l1, d)
    assert abs(x - math.log(1.0 / 0.01)) < 2.5


def test_pentagon_degenerate():
    with pytest.raises(hyp.DegeneratePentagonError):
        pentagon_perp(0.1, 0.1)


def test_hexagon_perp_consistency():
    sides_l = (0.7, 1.1, 0.9)
    d1, d2, d3 = hexagon_opposites(*sides_l)
    sides = [sides_l[0], d3, sides_l[1], d1, sides_l[2], d2]
    for n in range(6):
        p1 = hexagon_perp_between_opposite(sides, n)
        alt = math.sinh(sides[(n + 4) % 6]) * math.sinh(sides[(n + 5) % 6])
        assert abs(math.cosh(p1) - alt) < 1e-9 * alt


def test_hexderiv_identity():
    # (cosh p_{n,n+3}) l_n' = l_{n+3}' - cosh(l_{n-2}) l_{n-1}' - cosh(l_{n+2}) l_{n+1}'
    def hexsides(l1, l2, l3):
        d1, d2, d3 = hexagon_opposites(l1, l2, l3)
        return [l1, d3, l2, d1, l3, d2]

    l0 = [0.7, 1.1, 0.9]
    vel = [0.3, -0.2, 0.5]
    h = 1e-6
    sp = hexsides(*[l0[i] + h * vel[i] for i in range(3)])
    sm = hexsides(*[l0[i] - h * vel[i] for i in range(3)])
    s0 = hexsides(*l0)
    sd = [(a - b) / (2 * h) for a, b in zip(sp, sm)]
    for n in range(6):
        p = hexagon_perp_between_opposite(s0, n)
        lhs = math.cosh(p) * sd[n]
        rhs = (sd[(n + 3) % 6]
               - math.cosh(s0[(n - 2) % 6]) * sd[(n - 1) % 6]
               - math.cosh(s0[(n + 2) % 6]) * sd[(n + 1) % 6])
        assert abs(lhs - rhs) < 1e-5 * max(1.0, abs(lhs))


def test_pants_geometry_symmetric():
    g = pants_geometry(1.0, 1.0, 1.0)
    assert abs(g.seam_ab - g.seam_ac) < 1e-12
    assert abs(g.seam_ab - g.seam_bc) < 1e-12


def test_pants_geometry_short_curve_asymptotics():
    g = pants_geometry(0.01, 0.5, 0.5)
    # seam between the short curve and another boundary ~ log(1/la) + log(1/lc)
    assert abs(g.seam_ac - (math.log(1 / 0.01) + math.log(1 / 0.5))) < 3.0
    # dual-style self-perpendicular ~ 2 log(1/la)
    assert abs(g.self_a_around_c - 2.0 * math.log(1 / 0.01)) < 5.0


def test_pants_geometry_identities():
    # every reported value satisfies its defining hexagon/pentagon identity
    la, lb, lc = 0.3, 0.9, 1.7
    g = pants_geometry(la, lb, lc)
    want = (math.cosh(lc / 2) + math.cosh(la / 2) * math.cosh(lb / 2)) / (
        math.sinh(la / 2) * math.sinh(lb / 2))
    assert abs(math.cosh(g.seam_ab) - want) < 1e-9 * want
    assert abs(math.cosh(g.self_a_around_c / 2)
               - math.sinh(g.seam_ac) * math.sinh(lc / 2)) < 1e-9


@pytest.mark.parametrize("same_pair", [False, True])
def test_perp_derivatives_match_finite_differences(same_pair):
    rng = random.Random(77)
    for _ in range(1000):
        la = rng.uniform(0.01, 1.5)
        lb = rng.uniform(0.05, 3.0)
        lc = rng.uniform(0.05, 3.0)
        der = perp_derivatives(la, lb, lc, same_pair=same_pair)
        h = 1e-6 * max(1.0, la)

        def seam_ac(x):
            return hyp._seam(x, lc, x if same_pair else lb)

        def self_gamma(x):
            return pants_geometry(x, x if same_pair else lb, lc).self_c_around_a

        fd = (seam_ac(la + h) - seam_ac(la - h)) / (2 * h)
        assert abs(der.d_seam - fd) <= 1e-5 * max(1e-6, abs(fd))
        fd = (self_gamma(la + h) - self_gamma(la - h)) / (2 * h)
        assert abs(der.self_gamma - fd) <= 1e-5 * max(1e-6, abs(fd))
        if not same_pair:
            def far(x):
                return hyp._seam(lb, lc, x)
            fd = (far(la + h) - far(la - h)) / (2 * h)
            assert abs(der.far_seam - fd) <= 1e-5 * max(1e-6, abs(fd))


def test_perp_derivative_bands_for_short_curve():
    # adjacent perpendicular shrinks like -1/l, the far seam grows like l
    der = perp_derivatives(0.01, 0.5, 0.5, same_pair=False)
    assert -16.0 < der.d_seam * 0.01 < -1.0 / 16.0
    assert 1.0 / 16.0 < der.far_seam / 0.01 < 16.0


def test_halfplane_factor_distance_values():
    assert halfplane_factor_distance(1j, 1j) == 0.0
    assert abs(halfplane_factor_distance(1j, 4j) - math.log(2.0)) < 1e-12
    # shared real part: half of |log(y1/y2)|
    z1, z2 = 0.3 + 1j / 0.2, 0.3 + 1j / 0.7
    assert abs(halfplane_factor_distance(z1, z2) - 0.5 * abs(math.log(0.7 / 0.2))) < 1e-12
    with pytest.raises(hyp.DomainError):
        halfplane_factor_distance(1.0, 1j)


def test_halfplane_triangle_inequality_and_symmetry():
    rng = random.Random(5)
    for _ in range(200):
        pts = [complex(rng.uniform(-3, 3), rng.uniform(0.05, 4.0)) for _ in range(3)]
        d01 = halfplane_factor_distance(pts[0], pts[1])
        d12 = halfplane_factor_distance(pts[1], pts[2])
        d02 = halfplane_factor_distance(pts[0], pts[2])
        assert d02 <= d01 + d12 + 1e-12
        assert abs(d01 - halfplane_factor_distance(pts[1], pts[0])) < 1e-14


def test_isometry_axis_and_length():
    g = Isometry.std_translation(1.5)
    ax = g.axis()
    assert ax.end == INF and abs(ax.start) < 1e-12
    assert abs(g.translation_length() - 1.5) < 1e-12
    g3 = Isometry(2.0, 1.0, 1.0, 1.0)  # trace 3
    assert abs(g3.translation_length() - 2.0 * math.acosh(1.5)) < 1e-12


def test_isometry_composition_and_conjugation_invariance():
    rng = random.Random(11)
    for _ in range(100):
        g = Isometry.std_translation(rng.uniform(0.2, 2.0)) * Isometry.perp_translation(
            rng.uniform(-1.5, 1.5))
        h = Isometry.perp_translation(rng.uniform(-2, 2)) * Isometry.std_translation(
            rng.uniform(-1, 1))
        assert g.det_residual() < 1e-12
        conj = g.conjugated_by(h)
        assert abs(conj.translation_length() - g.translation_length()) < 1e-10


def test_isometry_no_axis_errors():
    with pytest.raises(hyp.NoAxisError):
        Isometry(1.0, 1.0, 0.0, 1.0).translation_length()  # parabolic
    with pytest.raises(hyp.NoAxisError):
        Isometry(math.cos(0.3), -math.sin(0.3), math.sin(0.3), math.cos(0.3)).axis()


def test_isometry_big_words_stay_finite():
    g = Isometry.std_translation(1.7)
    h = Isometry.perp_translation(0.9)
    w = (g * h) ** 512
    per = (g * h).translation_length()
    assert abs(w.translation_length() - 512 * per) < 1e-6 * 512 * per


def test_project_to_axis():
    axis = GeodesicH(0.0, INF)
    assert abs(project_to_axis(1.0, axis)) < 1e-12
    assert abs(project_to_axis(math.e, axis) - 1.0) < 1e-12
    assert abs(project_to_axis(-math.e, axis) - 1.0) < 1e-12


def test_axis_distance():
    # distance from (0, inf) to the semicircle over (c, d): cosh d = (c+d)/(d-c)
    a1 = GeodesicH(0.0, INF)
    a2 = GeodesicH(1.0, 4.0)
    assert abs(axis_distance(a1, a2) - acosh_stable(5.0 / 3.0)) < 1e-12
    assert axis_distance(a1, GeodesicH(-1.0, 1.0)) == 0.0


def test_cross_axis_sign_and_angle():
    axis = GeodesicH(0.0, INF)
    x = cross_axis(axis, GeodesicH(-1.0, math.e ** 2))
    assert x is not None
    assert abs(x.twist_num - 2.0) < 1e-12
    assert abs(x.cos_angle - math.tanh(1.0)) < 1e-12
    assert cross_axis(axis, GeodesicH(1.0, 4.0)) is None


def test_std_map_orientations():
    for u, v in [(-2.0, 3.0), (3.0, -2.0), (0.5, 4.0), (4.0, 0.5), (INF, 1.0), (1.0, INF)]:
        n = std_map(GeodesicH(u, v))
        assert abs(n.apply(u)) < 1e-12 or u == INF
        assert n.apply(v) == INF or abs(n.apply(v)) > 1e12


def test_acosh_stable_near_one():
    for u0 in (1e-14, 1e-10, 1e-6, 1e-3):
        x = 1.0 + u0
        u = x - 1.0  # the representable increment
        want = math.sqrt(2 * u) * (1 - u / 12.0 + 3 * u * u / 160.0)
        assert abs(acosh_stable(x) - want) < 1e-10 * max(want, 1e-10)
        # agreement with the plain formula where it is still accurate
        if u > 1e-8:
            plain = math.log(x + math.sqrt(x * x - 1.0))
            assert abs(acosh_stable(x) - plain) < 1e-7 * plain
    assert acosh_stable(1e12) == math.log(2e12)
