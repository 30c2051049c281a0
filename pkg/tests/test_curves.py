import math
import random

import pytest

from teichlab import curves as cv
from teichlab.curves import (
    CUSP,
    BalanceData,
    FillingError,
    PantsDecomposition,
    SurfaceSig,
    TorusSlope,
    EmbeddedSlope,
    WeightedMultiCurve,
    WordHandle,
    balance_time,
    dehn_twist,
    intersection_number,
    twist_decay,
)


def test_surface_signature():
    sig = SurfaceSig(1, 1)
    assert sig.complexity == 1 and sig.num_pants == 1
    sig2 = SurfaceSig(2, 0)
    assert sig2.complexity == 3 and sig2.num_pants == 2
    with pytest.raises(ValueError):
        SurfaceSig(0, 3)  # no pants system


def test_slope_normalization_and_parse():
    assert TorusSlope(2, -4) == TorusSlope(-1, 2)
    assert TorusSlope.parse("3/5") == TorusSlope(3, 5)
    assert TorusSlope(-1, 0) == TorusSlope(1, 0)
    with pytest.raises(ValueError):
        TorusSlope(0, 0)


def test_intersection_numbers_slopes():
    assert intersection_number(TorusSlope(0, 1), TorusSlope(1, 0)) == 1
    assert intersection_number(TorusSlope(1, 2), TorusSlope(3, 5)) == 1
    assert intersection_number(TorusSlope(2, 3), TorusSlope(2, 3)) == 0
    # symmetry on random pairs
    rng = random.Random(3)
    for _ in range(100):
        a = TorusSlope(rng.randint(-6, 6), rng.randint(1, 6))
        b = TorusSlope(rng.randint(-6, 6), rng.randint(1, 6))
        assert intersection_number(a, b) == intersection_number(b, a)


def test_intersection_embedded_and_word():
    a = EmbeddedSlope(1, 1, 0)
    b = EmbeddedSlope(1, 0, 1)
    c = EmbeddedSlope(2, 0, 1)
    assert intersection_number(a, b) == 1
    assert intersection_number(a, c) == 0
    w = WordHandle("x", ((0, 1),))
    with pytest.raises(cv.MissingIntersectionError):
        intersection_number(w, a)
    table = {cv._pair_key(w, a): 3}
    assert intersection_number(w, a, table) == 3
    with pytest.raises(cv.BackendError):
        intersection_number(TorusSlope(1, 0), a)


def test_multicurve_weights():
    nu = WeightedMultiCurve([(TorusSlope(1, 0), 2.0), (TorusSlope(1, 0), 0.5)])
    assert nu.intersection(TorusSlope(0, 1)) == 2.5
    with pytest.raises(ValueError):
        WeightedMultiCurve([(TorusSlope(1, 0), 0.0)])
    assert nu.scaled(2.0).intersection(TorusSlope(0, 1)) == 5.0


def test_dehn_twist_slopes():
    alpha = TorusSlope(0, 1)
    nu = TorusSlope(1, 0)
    assert dehn_twist(nu, alpha, 0) == nu
    assert dehn_twist(nu, alpha, -3) == TorusSlope(1, -3)
    # i(T^n nu, alpha) is preserved, i with a transversal grows linearly
    beta = TorusSlope(1, 0)
    for n in (1, 4, 9):
        tw = dehn_twist(nu, alpha, n)
        assert intersection_number(tw, alpha) == intersection_number(nu, alpha)
        assert intersection_number(tw, beta) == n * intersection_number(
            nu, alpha) * intersection_number(alpha, beta)
    # group action: twist then untwist
    assert dehn_twist(dehn_twist(nu, alpha, 5), alpha, -5) == nu
    assert dehn_twist(dehn_twist(nu, alpha, 2), alpha, 3) == dehn_twist(nu, alpha, 5)


def test_balance_time():
    alpha = TorusSlope(0, 1)
    nup = WeightedMultiCurve([(TorusSlope(1, 0), 2.0)])
    num = WeightedMultiCurve([(TorusSlope(1, 0), 2.0)])
    assert balance_time(alpha, nup, num).t_alpha == 0.0
    num4 = WeightedMultiCurve([(TorusSlope(1, 0), 4.0)])
    nup1 = WeightedMultiCurve([(TorusSlope(1, 0), 1.0)])
    bal = balance_time(alpha, nup1, num4)
    assert abs(bal.t_alpha - math.log(2.0)) < 1e-12
    # vertical flag when the minus-side intersection vanishes
    par = WeightedMultiCurve([(TorusSlope(0, 1), 1.0)])
    bal_v = balance_time(alpha, nup1, par)
    assert bal_v.flag == cv.VERTICAL and not bal_v.is_generic
    bal_h = balance_time(alpha, par, nup1)
    assert bal_h.flag == cv.HORIZONTAL
    with pytest.raises(FillingError):
        balance_time(alpha, par, par)


def test_balance_equivariance():
    # scaling (nu+, nu-) by (e^s, e^-s) advances the family clock by s, so
    # every balance time shifts by exactly -s
    alpha = TorusSlope(0, 1)
    nup = WeightedMultiCurve([(TorusSlope(1, 0), 1.3)])
    num = WeightedMultiCurve([(TorusSlope(1, -5), 0.7)])
    base = balance_time(alpha, nup, num).t_alpha
    s = 0.8312
    shifted = balance_time(alpha, nup.scaled(math.exp(s)),
                           num.scaled(math.exp(-s))).t_alpha
    assert abs(shifted - (base - s)) < 1e-12


def test_twist_decay_shape():
    assert twist_decay(1.0, 1.0) == 1.0
    assert abs(twist_decay(1.5, 1.0) - math.exp(-1.0)) < 1e-15
    # maximized at the balance time, exact e^-2 decay per unit
    vals = [twist_decay(t, 0.25) for t in (-1.0, 0.25, 2.0)]
    assert vals[1] == max(vals)
    assert abs(twist_decay(1.25, 0.25) / twist_decay(2.25, 0.25) - math.e ** 2) < 1e-12


def test_pants_decomposition_validation():
    sig = SurfaceSig(1, 1)
    dec = PantsDecomposition(sig, [TorusSlope(0, 1)],
                             [(("curve", 0, 0), ("curve", 0, 1), CUSP)])
    assert dec.pants_adjacent_to(0) == [0]
    assert dec.curve_bounds_single_pants(0)
    with pytest.raises(ValueError):
        PantsDecomposition(sig, [TorusSlope(0, 1)],
                           [(("curve", 0, 0), ("curve", 0, 0), CUSP)])
    sig2 = SurfaceSig(2, 0)
    dec2 = PantsDecomposition(
        sig2,
        [WordHandle("w", ()), EmbeddedSlope(1, 1, 1), EmbeddedSlope(2, 1, 1)],
        [
            (("curve", 1, 0), ("curve", 1, 1), ("curve", 0, 0)),
            (("curve", 2, 0), ("curve", 2, 1), ("curve", 0, 1)),
        ],
    )
    assert dec2.boundary_curves_of_adjacent_pants(0) == [0, 1, 2]
    assert not dec2.curve_bounds_single_pants(0)
    assert dec2.curve_bounds_single_pants(1)


def test_marking_duals_selection():
    sig = SurfaceSig(1, 1)
    dec = PantsDecomposition(sig, [TorusSlope(0, 1)],
                             [(("curve", 0, 0), ("curve", 0, 1), CUSP)])

    lengths = {TorusSlope(1, k): 2.0 + abs(k - 1) for k in range(-3, 4)}

    def candidates(cid):
        return [(TorusSlope(1, k), k) for k in range(-3, 4)]

    m = cv.marking_duals(dec, lambda h: lengths[h], candidates)
    assert m.duals[0] == TorusSlope(1, 1)
    assert m.dual_twists[0] == 1
    # tie: equal lengths pick the smaller twist index
    m2 = cv.marking_duals(dec, lambda h: 1.0, candidates)
    assert m2.dual_twists[0] == 0


def test_marking_intersection_validation():
    sig = SurfaceSig(1, 1)
    dec = PantsDecomposition(sig, [TorusSlope(0, 1)],
                             [(("curve", 0, 0), ("curve", 0, 1), CUSP)])
    good = cv.Marking(dec, [TorusSlope(1, 0)])
    good.validate_intersections()
    bad = cv.Marking(dec, [TorusSlope(1, 2)])
    bad.validate_intersections()  # i = 1 still
    worse = cv.Marking(dec, [TorusSlope(2, 1)])
    with pytest.raises(ValueError):
        worse.validate_intersections()
