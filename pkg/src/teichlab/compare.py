"""Assemble the two sides of the comparison: per-short-curve reports with
the twisting and complexity quantities, twist-bound checks, and the two
Teichmueller-distance estimators (product-region factors and the length
ratio), cross-validated against each other.

All flat-versus-hyperbolic comparisons are coarse by nature; the band
constants gathered in BandConfig were frozen at bring-up and every check
reports against them.
"""

from __future__ import annotations

import math

from .curves import (
    VERTICAL,
    HORIZONTAL,
    WeightedMultiCurve,
    balance_time,
    intersection_number,
    relative_twist,
    twist_decay,
)
from .fuchsian import geodesic_twist, short_pants_and_marking, thick_thin
from .hyperbolic import halfplane_factor_distance


class BandConfig:
    """Frozen comparison bands: multiplicative ratio bands and additive
    slack for twist-type quantities."""

    def __init__(self, ratio=16.0, additive=4.0, eps0=0.1, eps_short=0.05,
                 collar_c=0.3, twist_product=8.0, coherence=4.0):
        self.ratio = ratio
        self.additive = additive
        self.eps0 = eps0
        self.eps_short = eps_short
        self.collar_c = collar_c
        self.twist_product = twist_product
        self.coherence = coherence

    def as_dict(self):
        return dict(self.__dict__)


class ShortCurveReport:
    """Everything measured about one short curve at one time."""

    def __init__(self, curve_id, handle, t):
        self.curve_id = curve_id
        self.handle = handle
        self.t = t
        self.t_alpha = None
        self.flag = None            # None | "vertical" | "horizontal"
        self.l_min = None           # hyperbolic length at the minimizer
        self.proxy = None           # reciprocal-modulus stand-in for the flat side
        self.twist_term = None      # e^{-2|t-t_alpha|} d(nu+, nu-)
        self.flat_ratio = None      # max lambda_Y / l_q
        self.pants_ratio = None     # sup l_q(beta) / l_q(alpha)
        self.tw_plus = None
        self.tw_minus = None
        self.tw_prod_plus = None    # Tw(nu+) * l at the minimizer
        self.tw_prod_minus = None
        self.dominant = None
        self.q_twist_plus = None
        self.q_twist_minus = None

    def estimate_geo(self):
        """max(twist term, log flat ratio): the flat-side reciprocal length."""
        return max(self.twist_term, math.log(max(self.flat_ratio, 1.0)))

    def estimate_min_k(self):
        """max(twist term, sqrt flat ratio): the minimizer-side reciprocal."""
        return max(self.twist_term, math.sqrt(self.flat_ratio))

    def estimate_min_h(self):
        return max(self.twist_term, math.sqrt(self.pants_ratio))

    def as_dict(self):
        keys = ("curve_id", "t", "t_alpha", "flag", "l_min", "proxy",
                "twist_term", "flat_ratio", "pants_ratio", "tw_plus",
                "tw_minus", "tw_prod_plus", "tw_prod_minus", "dominant",
                "q_twist_plus", "q_twist_minus")
        out = {k: getattr(self, k) for k in keys}
        out["est_geo"] = self.estimate_geo()
        out["est_min_k"] = self.estimate_min_k()
        out["est_min_h"] = self.estimate_min_h()
        return out


def pants_boundary_ratio(instance, marking, alpha_id, t, table=None):
    """sup over boundary curves of adjacent pants of l_q(beta) / l_q(alpha).

    Uses direct flat lengths where the curve has a realization, otherwise
    the weighted-intersection approximation; the choice made per curve is
    returned alongside the value.
    """
    curves = instance.pants_ratio_set(marking, alpha_id)
    alpha = marking.decomposition.curves[alpha_id]
    l_alpha = _q_length_or_proxy(instance, alpha, t, table)[0]
    best, used = 0.0, []
    for beta in curves:
        val, how = _q_length_or_proxy(instance, beta, t, table)
        used.append((repr(beta), how))
        best = max(best, val / l_alpha)
    return best, used


def _q_length_or_proxy(instance, handle, t, table=None):
    try:
        return instance.q_length(handle, t)[0], "flat"
    except Exception:
        pass
    ip = instance.nu_plus.intersection(handle, table) * math.exp(t)
    im = instance.nu_minus.intersection(handle, table) * math.exp(-t)
    return ip + im, "intersections"


def short_curve_report(instance, point, bands=None, include=None):
    """Reports for every curve that is short at the accepted minimizer.

    `point` is a certified MinimaPathPoint; the flat side is evaluated at
    the same parameter.  Curves in `include` are reported even when not
    short (sweeps track the designated curve through its thick range).
    """
    bands = bands or BandConfig()
    include = set(include or ())
    t = point.t
    rep = instance.system.assemble(point.x)
    ref = instance.system.reference_rep()
    reports = []
    for cid in range(len(instance.system.decomposition.curves)):
        handle = instance.system.pants_curve(cid)
        l_min = point.x.lengths[cid]
        try:
            ann = instance.annuli(handle, t)
            proxy = 1.0 / max(ann.all_moduli()) if max(ann.all_moduli()) > 0 else None
            dominant = ann.dominant()[0]
        except Exception:
            ann, proxy, dominant = None, None, None
        is_short = l_min < bands.eps0 or (proxy is not None and proxy < bands.eps0)
        if not is_short and handle not in include:
            continue
        out = ShortCurveReport(cid, handle, t)
        out.l_min = l_min
        out.proxy = proxy
        out.dominant = dominant
        bal = balance_time(handle, instance.nu_plus, instance.nu_minus)
        if bal.is_generic:
            out.t_alpha = bal.t_alpha
            d_alpha, _ = relative_twist(
                instance.nu_plus, instance.nu_minus, handle, ref)
            out.twist_term = twist_decay(t, bal.t_alpha) * d_alpha
        else:
            out.flag = bal.flag
            # vertical variant: e^{-2t} Mod F_0 takes over the twist slot
            if ann is not None:
                decay = math.exp(-2.0 * t) if bal.flag == VERTICAL else math.exp(2.0 * t)
                out.twist_term = decay * ann.mod_flat
            else:
                out.twist_term = 0.0
        out.flat_ratio = instance.flat_complexity(handle, t)
        marking = short_pants_and_marking(rep)
        aid = _locate_curve(marking, handle)
        if aid is None:
            # a force-included curve can fall out of the short pants system
            # in its thick range; measure its boundary ratio in the backend
            # chart, where it is a pants curve by construction
            marking = instance.system.marking_for(
                rep, list(instance.system.decomposition.curves))
            aid = _locate_curve(marking, handle)
        out.pants_ratio, _ = pants_boundary_ratio(instance, marking, aid, t)
        cp = geodesic_twist(rep, instance.nu_plus, handle)
        cm = geodesic_twist(rep, instance.nu_minus, handle)
        out.tw_plus, out.tw_minus = cp.tw, cm.tw
        out.tw_prod_plus = cp.Tw * l_min
        out.tw_prod_minus = cm.Tw * l_min
        try:
            out.q_twist_plus = instance.q_twist(instance.nu_plus, handle, t)
            out.q_twist_minus = instance.q_twist(instance.nu_minus, handle, t)
        except Exception:
            pass
        reports.append(out)
    return reports


def _locate_curve(marking, handle):
    for i, c in enumerate(marking.decomposition.curves):
        if c == handle:
            return i
    return None


class DistanceEstimate:
    """Product-region factors and the length-ratio estimator."""

    def __init__(self, factors, thick_flag, estimator):
        self.factors = factors        # {curve id: half-plane factor distance}
        self.thick_flag = thick_flag  # True when the short set is empty
        self.estimator = estimator    # (1/2) log max length ratio, or None

    @property
    def aggregate(self):
        if not self.factors:
            return 0.0
        return max(self.factors.values())

    def as_dict(self):
        return {"factors": {str(k): v for k, v in self.factors.items()},
                "thick_flag": self.thick_flag,
                "aggregate": self.aggregate,
                "estimator": self.estimator}


def product_region_distance(reports, point):
    """Half-plane factor distances between the flat-side data and the
    minimizer, per short curve.

    The twist coordinate on each side is the twist of the bounded-twisting
    multicurve (the plus side at or past the balance time, the minus side
    before it); on the flat side the cylinder twist stands in, falling back
    to zero with the degenerate-annulus flag when there is none.
    """
    factors = {}
    for r in reports:
        use_plus = (r.flag == VERTICAL) or (
            r.flag is None and r.t >= (r.t_alpha or 0.0))
        tw_min = r.tw_plus if use_plus else r.tw_minus
        tw_geo = r.q_twist_plus if use_plus else r.q_twist_minus
        if tw_geo is None:
            tw_geo = 0.0
        if r.proxy is None:
            continue
        z_min = complex(tw_min, 1.0 / r.l_min)
        z_geo = complex(tw_geo, 1.0 / r.proxy)
        factors[r.curve_id] = halfplane_factor_distance(z_min, z_geo)
    thick = not factors
    est = distance_estimator(reports)
    return DistanceEstimate(factors, thick, est)


def distance_estimator(reports):
    """(1/2) log of the largest flat-to-minimizer length ratio over the
    short curves; None on an empty short set (the thick case)."""
    best = None
    for r in reports:
        if r.proxy is None or r.l_min is None:
            continue
        val = 0.5 * abs(math.log(r.proxy / r.l_min))
        best = val if best is None else max(best, val)
    return best


def twist_bound_check(reports, bands=None):
    """Bounded-twisting checks on both sides of every report.

    Past the balance time the plus-side twist-length product must be
    bounded; before it, the minus side; vertical and horizontal curves
    carry an O(1) bound on their surviving side.  The flat-side analogue
    uses the cylinder twist against the flat modulus when available.
    """
    bands = bands or BandConfig()
    rows = []
    for r in reports:
        checks = {}
        if r.flag is None:
            T = r.t - r.t_alpha
            if T >= 0.0:
                checks["min_side_plus"] = r.tw_prod_plus <= bands.twist_product
            if T <= 0.0:
                checks["min_side_minus"] = r.tw_prod_minus <= bands.twist_product
            if r.q_twist_plus is not None:
                decay = math.exp(-2.0 * T)
                mod = max(r.twist_term, 1.0)
                checks["flat_side_plus"] = (
                    abs(r.q_twist_plus) <= decay * mod + bands.additive)
        else:
            prod = r.tw_prod_plus if r.flag == VERTICAL else r.tw_prod_minus
            checks["surviving_side"] = prod <= bands.twist_product
            tw = abs(r.tw_plus if r.flag == VERTICAL else r.tw_minus)
            checks["surviving_twist_bounded"] = tw <= bands.twist_product
        rows.append((r.curve_id, checks, all(checks.values())))
    return rows


def short_set_agreement(reports, bands=None):
    """Mutual inclusion of the short sets on the two sides.

    Returns (ok, measured eps'), where eps' is the largest minimizer-side
    length whose curve already has a small flat proxy (the empirical
    threshold playing the role of the second inclusion constant).
    """
    bands = bands or BandConfig()
    eps_measured = None
    ok = True
    for r in reports:
        if r.proxy is not None and r.proxy < bands.eps_short:
            if r.l_min >= bands.eps0:
                ok = False
        if r.l_min is not None and r.proxy is not None and r.l_min < bands.eps0:
            eps_measured = max(eps_measured or 0.0, r.l_min) if (
                r.proxy < bands.eps_short) else eps_measured
    return ok, eps_measured


def ratio_band_check(values, ratio):
    """Do all values sit in one multiplicative band of the given ratio?"""
    vals = [v for v in values if v is not None]
    if not vals:
        return True, None
    lo, hi = min(vals), max(vals)
    if lo <= 0.0:
        return False, None
    return hi / lo <= ratio, hi / lo


def hk_band(reports, bands=None):
    """The pants-boundary ratio against the flat complexity, per report."""
    bands = bands or BandConfig()
    rows = []
    for r in reports:
        if r.pants_ratio is None or r.flat_ratio is None:
            continue
        ratio = r.pants_ratio / r.flat_ratio
        rows.append((r.curve_id, ratio,
                     1.0 / bands.ratio <= ratio <= bands.ratio))
    return rows


def minimality_diagnostics(instance, point, bands=None):
    """Thick-part cross checks at an accepted minimizer.

    Reports, per thick component: the flat length of the minimizer's short
    marking restricted to the component divided by the component's flat
    systole (bounded when the two geometries agree on the thick part), and
    the smallest minimizer-length of a non-peripheral curve there (bounded
    below).
    """
    bands = bands or BandConfig()
    rep = instance.system.assemble(point.x)
    short_ids, comps = thick_thin(rep, bands.eps0)
    marking = short_pants_and_marking(rep)
    out = []
    for comp in comps:
        lam = None
        try:
            lam = instance.flat.piece_systole(point.t) if hasattr(
                instance.flat, "piece_systole") else None
        except Exception:
            lam = None
        cross = []
        min_len = None
        for i, c in enumerate(marking.decomposition.curves):
            if i in short_ids:
                continue
            piece_ok = comp.piece is None or (
                hasattr(c, "piece") and c.piece == comp.piece)
            if not piece_ok:
                continue
            l_here = rep.curve_length(c)
            min_len = l_here if min_len is None else min(min_len, l_here)
            try:
                lq = instance.q_length(c, point.t)[0]
                # the flat-to-hyperbolic conversion by the component systole
                # only holds for curves living in the flat thick part
                if lam and lq >= bands.eps0 * lam:
                    cross.append(lq / lam)
            except Exception:
                pass
        out.append({
            "component": comp.name,
            "marking_flat_over_systole": cross,
            "min_nonperipheral_length": min_len,
        })
    return out
