"""Topological bookkeeping: surfaces, pants decompositions, markings,
weighted multicurves, intersection numbers, Dehn twists and balance times.

Curve handles come in three flavors:

* ``TorusSlope(p, q)`` -- a slope on the once-punctured torus (or
  four-punctured sphere), with exact intersection arithmetic.
* ``EmbeddedSlope(piece, p, q)`` -- a slope supported in one labelled
  one-holed torus of a larger surface.
* ``WordHandle`` -- a named curve given by a cyclic word in the ambient
  group's generators, with cached intersection data supplied by whoever
  built the curve system.
"""

from __future__ import annotations

import math


class BackendError(ValueError):
    """Handles from different backends, or an unsupported operation."""


class MissingIntersectionError(KeyError):
    """No cached intersection number for this pair of word handles."""


class FillingError(ValueError):
    """A pair of multicurves fails to fill where filling is required."""


def _gcd(a, b):
    return math.gcd(abs(a), abs(b))


def _normalize_slope(p, q):
    g = _gcd(p, q)
    if g == 0:
        raise ValueError("slope (0, 0) is not a curve")
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q


class TorusSlope:
    """Unoriented simple closed curve of slope (p, q) on the once-punctured torus."""

    __slots__ = ("p", "q")
    kind = "torus-slope"

    def __init__(self, p, q):
        self.p, self.q = _normalize_slope(p, q)

    @classmethod
    def parse(cls, text):
        """Parse 'p/q' notation."""
        num, _, den = text.partition("/")
        return cls(int(num), int(den))

    def det_with(self, other):
        return self.p * other.q - self.q * other.p

    def __eq__(self, other):
        return isinstance(other, TorusSlope) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self):
        return hash(("torus-slope", self.p, self.q))

    def __repr__(self):
        return "TorusSlope(%d/%d)" % (self.p, self.q)


class EmbeddedSlope:
    """Slope (p, q) supported in the labelled one-holed torus `piece`."""

    __slots__ = ("piece", "p", "q")
    kind = "embedded-slope"

    def __init__(self, piece, p, q):
        self.piece = piece
        self.p, self.q = _normalize_slope(p, q)

    def det_with(self, other):
        return self.p * other.q - self.q * other.p

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddedSlope)
            and (self.piece, self.p, self.q) == (other.piece, other.p, other.q)
        )

    def __hash__(self):
        return hash(("embedded-slope", self.piece, self.p, self.q))

    def __repr__(self):
        return "EmbeddedSlope(%s, %d/%d)" % (self.piece, self.p, self.q)


class WordHandle:
    """Named curve carried by a cyclic word in ambient group generators.

    `word` is a tuple of (generator index, exponent) pairs; intersection
    numbers with other handles are looked up in the owning system's cache.
    """

    __slots__ = ("name", "word", "system")
    kind = "word"

    def __init__(self, name, word, system=None):
        self.name = name
        self.word = tuple(word)
        self.system = system

    def __eq__(self, other):
        return isinstance(other, WordHandle) and self.name == other.name

    def __hash__(self):
        return hash(("word", self.name))

    def __repr__(self):
        return "WordHandle(%s)" % (self.name,)


def _pair_key(h1, h2):
    k1, k2 = repr(h1), repr(h2)
    return (k1, k2) if k1 <= k2 else (k2, k1)


def intersection_number(h1, h2, table=None):
    """Geometric intersection number of two curve handles.

    Slope pairs use |p s - q r|; word handles use the cached `table`
    (or the table carried by their system).  Mixed backends are an error.
    """
    if isinstance(h1, TorusSlope) and isinstance(h2, TorusSlope):
        return abs(h1.det_with(h2))
    if isinstance(h1, EmbeddedSlope) and isinstance(h2, EmbeddedSlope):
        if h1.piece != h2.piece:
            return 0
        return abs(h1.det_with(h2))
    if isinstance(h1, TorusSlope) or isinstance(h2, TorusSlope):
        raise BackendError("cannot intersect %r with %r" % (h1, h2))
    # at least one word handle: consult the cache
    if table is None:
        for h in (h1, h2):
            sys_ = getattr(h, "system", None)
            if sys_ is not None:
                table = sys_.intersection_table
                break
    if table is None:
        raise MissingIntersectionError("no intersection table for %r, %r" % (h1, h2))
    key = _pair_key(h1, h2)
    if key not in table:
        for h in (h1, h2):
            sys_ = getattr(h, "system", None)
            if sys_ is not None and hasattr(sys_, "structural_intersection"):
                val = sys_.structural_intersection(h1, h2)
                if val is not None:
                    return val
        raise MissingIntersectionError("no cached intersection for %r" % (key,))
    return table[key]


class WeightedMultiCurve:
    """Disjoint curves with positive weights (a rational measured lamination)."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = []
        for handle, weight in components:
            w = float(weight)
            if not (w > 0.0) or not math.isfinite(w):
                raise ValueError("weight must be positive and finite, got %r" % (weight,))
            comps.append((handle, w))
        if not comps:
            raise ValueError("multicurve needs at least one component")
        self.components = tuple(comps)

    def intersection(self, handle, table=None):
        """Weighted intersection number with a single curve handle."""
        return sum(w * intersection_number(g, handle, table) for g, w in self.components)

    def scaled(self, factor):
        return WeightedMultiCurve([(g, w * factor) for g, w in self.components])

    def handles(self):
        return [g for g, _ in self.components]

    def __repr__(self):
        return "WeightedMultiCurve(%s)" % (", ".join(
            "%r:%g" % (g, w) for g, w in self.components),)


def dehn_twist_slope(handle, alpha, n):
    # gamma + n <gamma, alpha> alpha on first homology
    det = handle.det_with(alpha)
    p = handle.p + n * det * alpha.p
    q = handle.q + n * det * alpha.q
    return (p, q)


def dehn_twist(nu, alpha, n, system=None):
    """n-fold Dehn twist of a handle or multicurve around alpha."""
    if isinstance(nu, WeightedMultiCurve):
        return WeightedMultiCurve(
            [(dehn_twist(g, alpha, n, system), w) for g, w in nu.components]
        )
    if n == 0:
        return nu
    if isinstance(nu, TorusSlope) and isinstance(alpha, TorusSlope):
        return TorusSlope(*dehn_twist_slope(nu, alpha, n))
    if isinstance(nu, EmbeddedSlope) and isinstance(alpha, EmbeddedSlope):
        if nu.piece != alpha.piece:
            return nu
        return EmbeddedSlope(nu.piece, *dehn_twist_slope(nu, alpha, n))
    sys_ = system or getattr(nu, "system", None) or getattr(alpha, "system", None)
    if sys_ is not None and hasattr(sys_, "dehn_twist_handle"):
        return sys_.dehn_twist_handle(nu, alpha, n)
    raise BackendError("no Dehn twist action for %r around %r" % (nu, alpha))


VERTICAL = "vertical"
HORIZONTAL = "horizontal"


class BalanceData:
    """Balance time of a curve against a filling pair, or its vertical/horizontal flag."""

    __slots__ = ("alpha", "i_plus", "i_minus", "t_alpha", "flag")

    def __init__(self, alpha, i_plus, i_minus):
        self.alpha = alpha
        self.i_plus = i_plus
        self.i_minus = i_minus
        if i_plus == 0.0 and i_minus == 0.0:
            raise FillingError("curve %r misses both multicurves; pair cannot fill" % (alpha,))
        if i_minus == 0.0:
            self.flag, self.t_alpha = VERTICAL, None
        elif i_plus == 0.0:
            self.flag, self.t_alpha = HORIZONTAL, None
        else:
            self.flag = None
            self.t_alpha = 0.5 * math.log(i_minus / i_plus)

    @property
    def is_generic(self):
        return self.flag is None

    def __repr__(self):
        if self.flag:
            return "BalanceData(%r, %s)" % (self.alpha, self.flag)
        return "BalanceData(%r, t=%.6g)" % (self.alpha, self.t_alpha)


def balance_time(alpha, nu_plus, nu_minus, table=None):
    """Balance data of alpha: the t at which e^t i(a,nu+) = e^-t i(a,nu-)."""
    return BalanceData(
        alpha,
        nu_plus.intersection(alpha, table),
        nu_minus.intersection(alpha, table),
    )


def twist_decay(t, t_alpha):
    """The factor e^{-2|t - t_alpha|}."""
    return math.exp(-2.0 * abs(t - t_alpha))


def relative_twist(nu1, nu2, alpha, rep):
    """Relative twisting of two multicurves around alpha in the metric `rep`.

    Returns (unsigned, signed): the signed value is the difference of the
    minimal twists of the two multicurves around alpha; it is independent
    of the metric up to a bounded additive error.
    """
    from . import fuchsian  # local import; fuchsian builds on this module

    c1 = fuchsian.geodesic_twist(rep, nu1, alpha)
    c2 = fuchsian.geodesic_twist(rep, nu2, alpha)
    signed = c1.tw - c2.tw
    return abs(signed), signed


def twist_term(alpha, nu_plus, nu_minus, t, rep, table=None):
    """The decaying twist quantity e^{-2|t - t_alpha|} d_alpha(nu+, nu-).

    Raises FillingError with the vertical/horizontal flag attached when the
    balance time does not exist (use the flat-side vertical variant then).
    """
    bal = balance_time(alpha, nu_plus, nu_minus, table)
    if not bal.is_generic:
        err = FillingError("curve %r is %s; no balance time" % (alpha, bal.flag))
        err.flag = bal.flag
        raise err
    d_alpha, _ = relative_twist(nu_plus, nu_minus, alpha, rep)
    return twist_decay(t, bal.t_alpha) * d_alpha


# ---------------------------------------------------------------------------
# surfaces, decompositions, markings


class SurfaceSig:
    """Topological type: orientable genus-g surface with p punctures."""

    __slots__ = ("genus", "punctures")

    def __init__(self, genus, punctures):
        if genus < 0 or punctures < 0:
            raise ValueError("genus and punctures must be nonnegative")
        if 3 * genus - 3 + punctures < 1:
            raise ValueError("surface too simple: no pants curve system exists")
        self.genus = genus
        self.punctures = punctures

    @property
    def complexity(self):
        return 3 * self.genus - 3 + self.punctures

    @property
    def num_pants(self):
        return 2 * self.genus - 2 + self.punctures

    def __repr__(self):
        return "SurfaceSig(genus=%d, punctures=%d)" % (self.genus, self.punctures)


CUSP = ("cusp",)


class PantsDecomposition:
    """Pants curves plus the gluing pattern of the complementary pants.

    `pants` is a list of 3-slot tuples; a slot is either ("curve", curve_id,
    side) with side in {0, 1} or the CUSP marker.  Every curve id must occur
    in exactly two slots.
    """

    __slots__ = ("sig", "curves", "pants")

    def __init__(self, sig, curves, pants):
        self.sig = sig
        self.curves = list(curves)
        self.pants = [tuple(p) for p in pants]
        self._validate()

    def _validate(self):
        if len(self.curves) != self.sig.complexity:
            raise ValueError(
                "expected %d pants curves, got %d" % (self.sig.complexity, len(self.curves))
            )
        if len(self.pants) != self.sig.num_pants:
            raise ValueError(
                "expected %d pants, got %d" % (self.sig.num_pants, len(self.pants))
            )
        seen = {}
        cusps = 0
        for pi, pants in enumerate(self.pants):
            if len(pants) != 3:
                raise ValueError("each pants has exactly three boundary slots")
            for slot in pants:
                if slot == CUSP:
                    cusps += 1
                    continue
                tag, cid, side = slot
                if tag != "curve" or side not in (0, 1):
                    raise ValueError("bad slot %r" % (slot,))
                seen.setdefault(cid, []).append((pi, side))
        if cusps != self.sig.punctures:
            raise ValueError("cusp slots (%d) must match punctures (%d)" % (cusps, self.sig.punctures))
        for cid in range(len(self.curves)):
            occ = seen.get(cid, [])
            if len(occ) != 2 or {s for _, s in occ} != {0, 1}:
                raise ValueError("curve %d must fill exactly two slots (sides 0 and 1)" % cid)
        # connectivity of the gluing graph
        adj = {i: set() for i in range(len(self.pants))}
        for cid, occ in seen.items():
            (p1, _), (p2, _) = occ
            adj[p1].add(p2)
            adj[p2].add(p1)
        reached, stack = {0}, [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in reached:
                    reached.add(nxt)
                    stack.append(nxt)
        if len(reached) != len(self.pants):
            raise ValueError("pants gluing graph is disconnected")

    def pants_adjacent_to(self, cid):
        """Indices of the pants having curve cid on their boundary."""
        out = []
        for pi, pants in enumerate(self.pants):
            if any(slot != CUSP and slot[1] == cid for slot in pants):
                out.append(pi)
        return out

    def boundary_curves_of_adjacent_pants(self, cid):
        """Ids of all pants curves bounding a pants adjacent to curve cid."""
        ids = set()
        for pi in self.pants_adjacent_to(cid):
            for slot in self.pants[pi]:
                if slot != CUSP:
                    ids.add(slot[1])
        return sorted(ids)

    def curve_bounds_single_pants(self, cid):
        """True when both sides of the curve lie on one pair of pants."""
        return len(self.pants_adjacent_to(cid)) == 1


class Marking:
    """Pants decomposition plus one dual curve per pants curve."""

    __slots__ = ("decomposition", "duals", "dual_twists")

    def __init__(self, decomposition, duals, dual_twists=None):
        self.decomposition = decomposition
        self.duals = list(duals)
        self.dual_twists = list(dual_twists) if dual_twists is not None else [None] * len(duals)
        if len(self.duals) != len(decomposition.curves):
            raise ValueError("need one dual curve per pants curve")

    def curves(self):
        """All marking curves: pants curves then duals."""
        return list(self.decomposition.curves) + list(self.duals)

    def validate_intersections(self, table=None):
        dec = self.decomposition
        for i, alpha in enumerate(dec.curves):
            want = 1 if dec.curve_bounds_single_pants(i) else 2
            got = intersection_number(alpha, self.duals[i], table)
            if got != want:
                raise ValueError(
                    "dual of curve %d must cross it %d times, crosses %d" % (i, want, got)
                )
            for j, beta in enumerate(dec.curves):
                if j != i and intersection_number(beta, self.duals[i], table) != 0:
                    raise ValueError("dual of curve %d crosses pants curve %d" % (i, j))


def marking_duals(decomposition, length_oracle, candidates_fn):
    """Choose the shortest dual curve for each pants curve.

    `candidates_fn(cid)` yields (handle, twist_index) candidates for the
    dual of curve cid (the twist orbit, including any half-twist variants);
    `length_oracle(handle)` measures them.  Ties go to the candidate with
    the smaller |twist_index|.
    """
    duals, twists = [], []
    for cid in range(len(decomposition.curves)):
        best = None
        for handle, k in candidates_fn(cid):
            key = (length_oracle(handle), abs(k))
            if best is None or key < best[0]:
                best = (key, handle, k)
        if best is None:
            raise ValueError("no dual candidates for curve %d" % cid)
        duals.append(best[1])
        twists.append(best[2])
    return Marking(decomposition, duals, twists)
