import math
import random

import pytest

from teichlab import fuchsian as fu
from teichlab.curves import (
    EmbeddedSlope,
    TorusSlope,
    WeightedMultiCurve,
    dehn_twist,
    intersection_number,
    relative_twist,
)
from teichlab.fuchsian import (
    FNPoint,
    GenusTwoTorusPair,
    OncePuncturedTorus,
    christoffel,
    collar_decomposition_estimate,
    geodesic_twist,
    short_pants_and_marking,
    slope_word,
    thick_thin,
)

TORUS = OncePuncturedTorus()
G2 = GenusTwoTorusPair()


def test_christoffel_words():
    assert christoffel(1, 0) == [0]
    assert christoffel(0, 1) == [1]
    assert christoffel(2, 1).count(0) == 2
    assert christoffel(3, 5).count(1) == 5
    with pytest.raises(ValueError):
        christoffel(2, 4)
    w = slope_word(2, -3)
    assert sum(1 for g, e in w if g == 0 and e == 1) == 2
    assert sum(1 for g, e in w if g == 1 and e == -1) == 3


def test_torus_assembly_fidelity():
    rng = random.Random(11)
    worst_cusp, worst_trace = 0.0, 0.0
    for _ in range(100):
        l = rng.uniform(0.02, 3.0)
        tau = rng.uniform(-2 * l, 2 * l)
        rep = TORUS.assemble(FNPoint([l], [tau]))
        worst_cusp = max(worst_cusp, rep.relator_residual)
        worst_trace = max(
            worst_trace,
            abs(abs(rep.curve_mats[0].trace()) - 2 * math.cosh(l / 2)))
    assert worst_cusp < 1e-9
    assert worst_trace < 1e-8


def test_torus_symmetric_point():
    # at tau = 0 the dual crosses perpendicularly; equal trace pair needs
    # l with cosh(m/2) = coth(l/2) solved by sinh(l/2) = 1
    l = 2.0 * math.asinh(1.0)
    rep = TORUS.assemble(FNPoint([l], [0.0]))
    a = rep.curve_length(TorusSlope(0, 1))
    b = rep.curve_length(TorusSlope(1, 0))
    assert abs(a - l) < 1e-12
    assert abs(a - b) < 1e-12
    assert abs(rep.curve_length(TorusSlope(1, 1))
               - rep.curve_length(TorusSlope(1, -1))) < 1e-12


def test_torus_trace_triple_identity():
    # tr[A,B] = trA^2 + trB^2 + trAB^2 - trA trB trAB - 2 = -2 at a cusp
    rep = TORUS.assemble(FNPoint([1.3], [0.4]))
    x = rep.matrix_for(TorusSlope(0, 1)).trace()
    y = rep.matrix_for(TorusSlope(1, 0)).trace()
    z = rep.matrix_for(TorusSlope(1, 1)).trace()
    assert abs(x * x + y * y + z * z - x * y * z) < 1e-9


def test_torus_equal_trace_point():
    # the point with three systoles of trace 3 sits at a half twist
    l = 2.0 * math.acosh(1.5)
    rep = TORUS.assemble(FNPoint([l], [l / 2.0]))
    traces = sorted(
        abs(rep.matrix_for(TorusSlope(*pq)).trace())
        for pq in [(0, 1), (1, 0), (1, -1)])
    assert max(abs(t - 3.0) for t in traces) < 1e-9
    assert abs(rep.curve_length(TorusSlope(0, 1)) - 1.9248473002384139) < 1e-9


def test_lamination_length_linearity():
    rep = TORUS.assemble(FNPoint([0.9], [0.2]))
    g = TorusSlope(1, 2)
    nu = WeightedMultiCurve([(g, 2.0)])
    assert abs(rep.lamination_length(nu) - 2.0 * rep.curve_length(g)) < 1e-12


def test_peripheral_word_rejected():
    from teichlab.curves import WordHandle

    rep = TORUS.assemble(FNPoint([1.0], [0.0]))
    cusp = WordHandle("cusp", ((0, 1), (1, 1), (0, -1), (1, -1)))
    with pytest.raises(fu.PeripheralError):
        rep.curve_length(cusp)


def test_twisted_curve_length_growth():
    # l(T_alpha^n beta) grows affinely in n with slope i(alpha, beta) l(alpha)
    rep = TORUS.assemble(FNPoint([1.1], [0.3]))
    alpha = TorusSlope(0, 1)
    beta = TorusSlope(1, 0)
    l_alpha = rep.curve_length(alpha)
    l64 = rep.curve_length(dehn_twist(beta, alpha, 64))
    l128 = rep.curve_length(dehn_twist(beta, alpha, 128))
    slope = (l128 - l64) / 64.0
    assert abs(slope - l_alpha) < 0.05 * l_alpha


def test_big_twists_no_overflow():
    rep = TORUS.assemble(FNPoint([1.0], [0.0]))
    h = dehn_twist(TorusSlope(1, 0), TorusSlope(0, 1), -1024)
    l = rep.curve_length(h)
    assert 1020 * rep.curve_length(TorusSlope(0, 1)) < l < 1030 * rep.curve_length(
        TorusSlope(0, 1))


def test_fn_twist_matches_dehn_twist():
    # moving tau by +l re-marks the surface by one positive twist
    alpha = TorusSlope(0, 1)
    rep0 = TORUS.assemble(FNPoint([1.0], [0.2]))
    rep1 = TORUS.assemble(FNPoint([1.0], [1.2]))
    for pq in [(1, 0), (1, 1), (2, 3), (1, -2)]:
        h = TorusSlope(*pq)
        assert abs(rep1.curve_length(h)
                   - rep0.curve_length(dehn_twist(h, alpha, 1))) < 1e-9


def test_geodesic_twist_symmetric_zero():
    rep = TORUS.assemble(FNPoint([2.0 * math.asinh(1.0)], [0.0]))
    data = geodesic_twist(rep, TorusSlope(1, 0), TorusSlope(0, 1))
    assert abs(data.tw) <= 1.0
    assert len(data.crossings) == 1


def test_geodesic_twist_dehn_twist_shift():
    rep = TORUS.assemble(FNPoint([1.0], [0.0]))
    alpha = TorusSlope(0, 1)
    nu = TorusSlope(1, 0)
    base = geodesic_twist(rep, nu, alpha).tw
    for n in (1, 3, -2, 8):
        tw_n = geodesic_twist(rep, dehn_twist(nu, alpha, n), alpha).tw
        assert abs(tw_n - base - n) <= 1.0


def test_crossing_angle_identity():
    # cos(theta) = tanh(tw(p) l(alpha) / 2) at every crossing
    rep = TORUS.assemble(FNPoint([0.8], [0.45]))
    alpha = TorusSlope(0, 1)
    data = geodesic_twist(rep, TorusSlope(2, 5), alpha)
    assert len(data.crossings) == intersection_number(TorusSlope(2, 5), alpha)
    for c in data.crossings:
        assert abs(c.cos_angle - math.tanh(c.tw * data.l_alpha / 2.0)) < 1e-8


def test_crossing_spread_bound():
    # crossings of one simple curve differ in twist by at most 1
    rng = random.Random(2)
    for _ in range(20):
        rep = TORUS.assemble(FNPoint([rng.uniform(0.4, 2.0)],
                                     [rng.uniform(-3, 3)]))
        data = geodesic_twist(rep, TorusSlope(3, 5), TorusSlope(0, 1))
        assert data.spread <= 1.0 + 1e-9


def test_twist_fn_coherence_minsky_bound():
    # |(tw_a - tw_b) - (s_a - s_b)| <= 4 across twist changes
    rng = random.Random(7)
    nu = TorusSlope(2, 3)
    alpha = TorusSlope(0, 1)
    for _ in range(100):
        l = rng.uniform(0.3, 1.5)
        t1, t2 = rng.uniform(-6, 6), rng.uniform(-6, 6)
        ra = TORUS.assemble(FNPoint([l], [t1]))
        rb = TORUS.assemble(FNPoint([l], [t2]))
        d_tw = geodesic_twist(ra, nu, alpha).tw - geodesic_twist(rb, nu, alpha).tw
        assert abs(d_tw - (t1 - t2) / l) <= 4.0


def test_wolpert_twist_derivative():
    # d l(nu) / d tau = sum of crossing cosines, against central differences
    alpha = TorusSlope(0, 1)
    rng = random.Random(23)
    for _ in range(50):
        l = rng.uniform(0.5, 2.0)
        tau = rng.uniform(-1.5, 1.5)
        pq = (rng.randint(1, 3), rng.randint(-4, 4))
        if math.gcd(pq[0], abs(pq[1])) != 1:
            continue
        h = TorusSlope(*pq)
        eps = 1e-6
        lp = TORUS.assemble(FNPoint([l], [tau + eps])).curve_length(h)
        lm = TORUS.assemble(FNPoint([l], [tau - eps])).curve_length(h)
        fd = (lp - lm) / (2 * eps)
        an = geodesic_twist(TORUS.assemble(FNPoint([l], [tau])), h, alpha).cos_sum()
        assert abs(fd - an) < 1e-4 * max(1.0, abs(an))


def test_relative_twist_properties():
    rep = TORUS.reference_rep()
    alpha = TorusSlope(0, 1)
    nu1 = WeightedMultiCurve([(TorusSlope(1, 0), 1.0)])
    d0, _s0 = relative_twist(nu1, nu1, alpha, rep)
    assert d0 <= 1.0
    for n in (3, 7):
        nu2 = WeightedMultiCurve([(dehn_twist(TorusSlope(1, 0), alpha, n), 1.0)])
        d, s = relative_twist(nu2, nu1, alpha, rep)
        assert abs(s - n) <= 2.0
        assert abs(d - n) <= 2.0


def test_relative_twist_metric_independence():
    # two random metrics give the same relative twist within a band of 6
    alpha = TorusSlope(0, 1)
    nu1 = WeightedMultiCurve([(TorusSlope(1, 0), 1.0)])
    nu2 = WeightedMultiCurve([(TorusSlope(3, 1), 1.0)])
    rng = random.Random(31)
    vals = []
    for _ in range(8):
        rep = TORUS.assemble(FNPoint([rng.uniform(0.3, 2.0)],
                                     [rng.uniform(-3, 3)]))
        vals.append(relative_twist(nu1, nu2, alpha, rep)[1])
    assert max(vals) - min(vals) <= 6.0


def test_genus2_assembly_fidelity():
    rng = random.Random(5)
    for _ in range(60):
        fn = FNPoint([rng.uniform(0.05, 2.5) for _ in range(3)],
                     [rng.uniform(-2.0, 2.0) for _ in range(3)])
        rep = G2.assemble(fn)
        assert rep.relator_residual < 1e-9
        for cid in range(3):
            want = 2.0 * math.cosh(fn.lengths[cid] / 2.0)
            assert abs(abs(rep.curve_mats[cid].trace()) - want) < 1e-8 * want


def test_genus2_lengths_consistent():
    fn = FNPoint([0.8, 1.1, 1.3], [0.2, -0.3, 0.5])
    rep = G2.assemble(fn)
    assert abs(rep.curve_length(G2.waist) - 0.8) < 1e-9
    assert abs(rep.curve_length(EmbeddedSlope(1, 1, 1)) - 1.1) < 1e-9
    assert abs(rep.curve_length(EmbeddedSlope(2, 1, 1)) - 1.3) < 1e-9


def test_genus2_fn_twist_matches_dehn_twist():
    fnA = FNPoint([0.8, 1.1, 1.3], [0.2, -0.3, 0.5])
    fnB = FNPoint([0.8, 1.1, 1.3], [1.0, -0.3, 0.5])
    repA, repB = G2.assemble(fnA), G2.assemble(fnB)
    wd = next(iter(G2.dual_candidates(0, 0)))[0]
    th = G2.dehn_twist_handle(wd, G2.waist, 1)
    assert abs(repA.curve_length(th) - repB.curve_length(wd)) < 1e-7


def test_genus2_twist_coordinate_orientation():
    rng = random.Random(9)
    wd = next(iter(G2.dual_candidates(0, 0)))[0]
    for _ in range(6):
        base = [rng.uniform(0.4, 1.5) for _ in range(3)]
        t1, t2 = rng.uniform(-3, 3), rng.uniform(-3, 3)
        ra = G2.assemble(FNPoint(base, [t1, 0.1, -0.2]))
        rb = G2.assemble(FNPoint(base, [t2, 0.1, -0.2]))
        d_tw = geodesic_twist(ra, wd, G2.waist).tw - geodesic_twist(
            rb, wd, G2.waist).tw
        assert abs(d_tw - (t1 - t2) / base[0]) <= 4.0


def test_short_pants_and_marking_torus():
    rep = TORUS.assemble(FNPoint([0.001], [0.0]))
    marking = short_pants_and_marking(rep)
    assert marking.decomposition.curves[0] == TorusSlope(0, 1)
    # dual length law: l(dual) = i * 2 log(1/l) + O(1), i = 1 on this torus
    dual_len = rep.curve_length(marking.duals[0])
    assert abs(dual_len - 2.0 * math.log(1000.0)) < 6.0
    marking.validate_intersections()


def test_short_marking_dual_twist_bound():
    # the selected shortest dual curve twists boundedly around its curve
    rng = random.Random(13)
    for _ in range(10):
        rep = TORUS.assemble(FNPoint([rng.uniform(0.05, 1.0)],
                                     [rng.uniform(-4, 4)]))
        marking = short_pants_and_marking(rep)
        alpha = marking.decomposition.curves[0]
        tw = geodesic_twist(rep, marking.duals[0], alpha).Tw
        assert tw < 4.0


def test_dual_length_law_band():
    # l(dual) - 2 i log(1/l) stays bounded over four decades
    vals = []
    for l in (1e-1, 1e-2, 1e-3, 1e-4):
        rep = TORUS.assemble(FNPoint([l], [0.0]))
        marking = short_pants_and_marking(rep)
        vals.append(rep.curve_length(marking.duals[0]) - 2.0 * math.log(1.0 / l))
    assert max(vals) - min(vals) < 3.0


def test_thick_thin():
    rep = TORUS.assemble(FNPoint([0.01], [0.0]))
    short_ids, comps = thick_thin(rep, 0.1)
    assert short_ids == [0]
    assert len(comps) == 1 and comps[0].is_pants
    rep2 = TORUS.assemble(FNPoint([1.5], [0.0]))
    short_ids2, comps2 = thick_thin(rep2, 0.1)
    assert short_ids2 == []
    fn = FNPoint([0.02, 0.9, 1.1], [0.0, 0.1, 0.2])
    short3, comps3 = thick_thin(G2.assemble(fn), 0.1)
    assert short3 == [0] and len(comps3) == 2


def test_capmarking_thick_band():
    rep = TORUS.assemble(FNPoint([2.0 * math.asinh(1.0)], [0.0]))
    marking = short_pants_and_marking(rep)
    curves = marking.curves()
    rng = random.Random(3)
    for _ in range(40):
        p, q = rng.randint(-50, 50), rng.randint(0, 50)
        if (p, q) == (0, 0) or math.gcd(abs(p), q) != 1 or (q == 0 and p != 1):
            continue
        xi = TorusSlope(p, q)
        ratio = fu.capmarking_check(rep, xi, curves)
        assert 1.0 / 10.0 < ratio < 10.0


def test_collar_decomposition_estimate():
    # reconstruct l(xi) from perpendicular arcs plus twisting travel
    rep = TORUS.assemble(FNPoint([0.01], [0.0]))
    alpha = TorusSlope(0, 1)
    for k in (0, 2, 8, 32):
        xi = dehn_twist(TorusSlope(1, 0), alpha, k)
        out = collar_decomposition_estimate(rep, xi, [0])
        n_cross = intersection_number(xi, alpha)
        assert out.defect <= 10.0 * 2 * n_cross
        # collar segments match the [log(1/l) + l Tw/2] i estimate
        for measured, est, n in out.collar_terms:
            assert abs(measured - est) <= 10.0 * n


def test_collar_estimate_linearity_and_disjoint():
    rep = TORUS.assemble(FNPoint([0.01], [0.0]))
    out = collar_decomposition_estimate(rep, TorusSlope(0, 1), [0])
    # xi = alpha itself has no crossings: bracket is the direct length
    assert out.defect < 1e-9
    assert out.crossing_total == 0
