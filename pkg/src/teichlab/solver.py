"""Minimize the weighted length of a filling pair over Fenchel-Nielsen
coordinates and trace the resulting one-parameter family of minimizers.

The objective at parameter t is

    F_t(x) = e^t l_x(nu_plus) + e^-t l_x(nu_minus)

minimized over the chart (log l_i, tau_i), which keeps lengths positive and
tames the 1/l blowup of the length-gradient at short curves.  A BFGS
quasi-Newton iteration with a backtracking line search does the work;
certification of an accepted minimizer consists of the gradient norm, the
per-short-curve balance identity e^T cos(Theta+) + e^-T cos(Theta-) = 0,
and optionally agreement of re-runs from perturbed starts.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .curves import BalanceData, WeightedMultiCurve, balance_time
from .fuchsian import FNPoint, geodesic_twist


class SolverError(RuntimeError):
    pass


class NonFillingSuspectedError(SolverError):
    """Lengths collapse while the objective keeps dropping: the pair most
    likely fails to fill the surface."""


class CertificationError(SolverError):
    """A required certificate (gradient, balance, multi-start) failed."""


class SolverConfig:
    """Tolerances and budgets for one minimization."""

    def __init__(self, gtol=1e-8, btol=1e-4, max_iter=400, fd_step=1e-5,
                 multistart=0, multistart_tol=1e-6, multistart_scale=0.05,
                 eps0=0.1, length_floor=1e-9, max_step=2.0, seed=0):
        self.gtol = gtol
        self.btol = btol
        self.max_iter = max_iter
        self.fd_step = fd_step
        self.multistart = multistart
        self.multistart_tol = multistart_tol
        self.multistart_scale = multistart_scale
        self.eps0 = eps0
        self.length_floor = length_floor
        self.max_step = max_step
        self.seed = seed

    def replace(self, **kw):
        out = SolverConfig(**{**self.__dict__, **kw})
        return out


class Objective:
    """e^t l(nu+) + e^-t l(nu-) over the FN chart of a backend system."""

    def __init__(self, system, nu_plus, nu_minus, t):
        self.system = system
        self.nu_plus = nu_plus
        self.nu_minus = nu_minus
        self.t = t
        self._check_filling()

    def _check_filling(self):
        # heuristic: every pants curve and dual must cross the pair somewhere
        rep = self.system.reference_rep()
        marking = self.system.marking_for(
            rep, list(self.system.decomposition.curves))
        for h in marking.curves():
            total = 0.0
            for nu in (self.nu_plus, self.nu_minus):
                try:
                    total += nu.intersection(h)
                except Exception:
                    total += 1.0  # unknown pairs do not veto the check
            if total <= 0.0:
                raise NonFillingSuspectedError(
                    "marking curve %r misses both multicurves" % (h,))

    def rep_at(self, x):
        return self.system.assemble(x)

    def value_at_rep(self, rep):
        return (math.exp(self.t) * rep.lamination_length(self.nu_plus)
                + math.exp(-self.t) * rep.lamination_length(self.nu_minus))

    def value(self, x):
        return self.value_at_rep(self.rep_at(x))

    def value_vec(self, vec):
        return self.value(FNPoint.from_vector(vec))


def objective_value(x, obj):
    return obj.value(x)


def gradient(obj, vec, fd_step=1e-5, order=2):
    """Finite-difference gradient of the objective in the (log l, tau) chart.

    order=2 is the cheap workhorse; order=4 (Richardson) with a larger step
    keeps truncation negligible while dividing the evaluation noise by a
    step two orders of magnitude bigger, which is what the final gradient
    certificate needs.
    """
    g = np.zeros(len(vec))
    for i in range(len(vec)):
        h = fd_step  # the (log l, tau) chart has order-one curvature scales
        if order == 2:
            up = list(vec)
            dn = list(vec)
            up[i] += h
            dn[i] -= h
            g[i] = (obj.value_vec(up) - obj.value_vec(dn)) / (2.0 * h)
        else:
            vals = []
            for k in (-2, -1, 1, 2):
                v = list(vec)
                v[i] += k * h
                vals.append(obj.value_vec(v))
            f_m2, f_m1, f_p1, f_p2 = vals
            g[i] = (8.0 * (f_p1 - f_m1) - (f_p2 - f_m2)) / (12.0 * h)
    return g


def twist_gradient_analytic(obj, x):
    """The tau-components of the gradient from crossing-angle sums.

    d F / d tau_i = e^t sum over nu+ crossings of cos(theta) + e^-t (...);
    used to certify the finite-difference gradient.
    """
    rep = obj.rep_at(x)
    out = []
    for cid in range(len(obj.system.decomposition.curves)):
        alpha = obj.system.pants_curve(cid)
        total = 0.0
        for nu, w_t in ((obj.nu_plus, math.exp(obj.t)),
                        (obj.nu_minus, math.exp(-obj.t))):
            crossing_weight = sum(
                w for g, w in nu.components
                if _crosses(g, alpha))
            if crossing_weight == 0.0:
                continue
            total += w_t * geodesic_twist(rep, nu, alpha).cos_sum()
        out.append(total)
    return out


def _crosses(handle, alpha):
    from .curves import intersection_number

    try:
        return intersection_number(handle, alpha) > 0
    except Exception:
        return True


class MinimaPathPoint:
    """An accepted minimizer with its certificates."""

    __slots__ = ("t", "x", "value", "grad_norm", "balance", "short_ids",
                 "iterations", "multistart_spread")

    def __init__(self, t, x, value, grad_norm, balance, short_ids, iterations,
                 multistart_spread):
        self.t = t
        self.x = x
        self.value = value
        self.grad_norm = grad_norm
        self.balance = balance          # {curve id: residual}
        self.short_ids = short_ids
        self.iterations = iterations
        self.multistart_spread = multistart_spread

    def __repr__(self):
        return "MinimaPathPoint(t=%.4g, F=%.8g, |g|=%.2e)" % (
            self.t, self.value, self.grad_norm)


def _bfgs(obj, vec0, cfg):
    """BFGS with backtracking Armijo line search; returns (vec, value, g, iters)."""
    n = len(vec0)
    vec = np.array(vec0, dtype=float)
    f = obj.value_vec(vec)
    g = gradient(obj, vec, cfg.fd_step)
    H = np.eye(n)
    best_drop_streak = 0
    stall = 0
    resets = 0
    it = 0
    for it in range(cfg.max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm < cfg.gtol:
            return vec, f, g, it
        d = -H.dot(g)
        slope = float(g.dot(d))
        if slope >= 0.0:
            H = np.eye(n)
            d = -g
            slope = -gnorm * gnorm
        # trust-region style cap: a huge first step in the log chart would
        # overshoot into the length-collapse region
        dnorm = float(np.linalg.norm(d))
        if dnorm > cfg.max_step:
            d = d * (cfg.max_step / dnorm)
            slope *= cfg.max_step / dnorm
        step = 1.0
        f_new, vec_new = None, None
        for _ in range(60):
            trial = vec + step * d
            try:
                f_trial = obj.value_vec(trial)
            except Exception:
                step *= 0.5
                continue
            if f_trial <= f + 1e-4 * step * slope:
                f_new, vec_new = f_trial, trial
                break
            step *= 0.5
        if f_new is None:
            # line search failed along this direction: a long march over a
            # clamped quasi-Newton metric can corrupt it, so retry fresh
            if gnorm > 1e3 * cfg.gtol and resets < 12:
                H = np.eye(n)
                resets += 1
                continue
            break
        try:
            g_new = gradient(obj, vec_new, cfg.fd_step)
        except Exception as e:
            raise NonFillingSuspectedError(
                "geometry degenerated while optimizing (%s); the pair most "
                "likely fails to fill" % (e,))
        s = vec_new - vec
        y = g_new - g
        sy = float(s.dot(y))
        if sy > 1e-14 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            rho = 1.0 / sy
            I = np.eye(n)
            V = I - rho * np.outer(s, y)
            H = V.dot(H).dot(V.T) + rho * np.outer(s, s)
        if f - f_new < 1e-14 * max(1.0, abs(f)):
            stall += 1
        else:
            stall = 0
        vec, f, g = vec_new, f_new, g_new
        if stall >= 6:
            if float(np.linalg.norm(g)) > 1e3 * cfg.gtol and resets < 12:
                H = np.eye(n)
                resets += 1
                stall = 0
                continue
            break
        # divergence detector: an FN length running off to 0 or infinity
        # while the objective keeps decreasing means the pair cannot fill
        log_floor = math.log(cfg.length_floor)
        if min(vec[0::2]) < log_floor or max(vec[0::2]) > -log_floor:
            best_drop_streak += 1
            if best_drop_streak > 20:
                raise NonFillingSuspectedError(
                    "a length ran past the floor %g while the objective "
                    "kept decreasing" % cfg.length_floor)
        else:
            best_drop_streak = 0
    else:
        it = cfg.max_iter
    return _newton_polish(obj, vec, f, g, cfg, it)


def _accurate_gradient(obj, vec, cfg):
    # fourth-order differences leave no appreciable truncation at this
    # step, and the wide step divides the evaluation noise far below gtol
    return gradient(obj, vec, max(1e-3, 20.0 * cfg.fd_step), order=4)


def _newton_polish(obj, vec, f, g, cfg, iters, rounds=6):
    """Finish with Newton steps on a finite-difference Hessian: quadratic
    convergence pushes the gradient down to the noise floor, which plain
    quasi-Newton steps cannot reliably reach with noisy gradients."""
    n = len(vec)
    g = _accurate_gradient(obj, list(vec), cfg)
    for _ in range(rounds):
        gnorm = float(np.linalg.norm(g))
        if gnorm < 0.5 * cfg.gtol:
            break
        H = np.zeros((n, n))
        for i in range(n):
            # wide columns: curvature can be as small as the square of a
            # short-curve length, and must stay above the differencing noise
            h = max(0.02, 10.0 * cfg.fd_step)
            up = np.array(vec)
            dn = np.array(vec)
            up[i] += h
            dn[i] -= h
            gu = gradient(obj, list(up), cfg.fd_step)
            gd = gradient(obj, list(dn), cfg.fd_step)
            H[:, i] = (gu - gd) / (2.0 * h)
        H = 0.5 * (H + H.T)
        try:
            evals = np.linalg.eigvalsh(H)
            if min(evals) <= 0.0:
                break
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        trial = np.array(vec) + step
        try:
            f_trial = obj.value_vec(list(trial))
        except Exception:
            break
        g_trial = _accurate_gradient(obj, list(trial), cfg)
        if float(np.linalg.norm(g_trial)) >= gnorm:
            break
        vec, f, g = trial, f_trial, g_trial
        iters += 1
    return np.array(vec), f, np.array(g), iters


def balance_residuals(obj, x, eps0=0.1):
    """Per-short-curve residual of e^T cos(Theta+) + e^-T cos(Theta-).

    T = t - t_alpha; vertical or horizontal curves instead satisfy
    cos(Theta) = 0 on their crossing side, reported the same way.
    """
    rep = obj.rep_at(x)
    out = {}
    for cid in range(len(obj.system.decomposition.curves)):
        if x.lengths[cid] >= eps0:
            continue
        alpha = obj.system.pants_curve(cid)
        bal = balance_time(alpha, obj.nu_plus, obj.nu_minus)
        if bal.is_generic:
            T = obj.t - bal.t_alpha
            cp = geodesic_twist(rep, obj.nu_plus, alpha).cos_average()
            cm = geodesic_twist(rep, obj.nu_minus, alpha).cos_average()
            out[cid] = math.exp(T) * cp + math.exp(-T) * cm
        else:
            nu = obj.nu_plus if bal.flag == "vertical" else obj.nu_minus
            out[cid] = geodesic_twist(rep, nu, alpha).cos_average()
    return out


def minimize(obj, x0, cfg=None):
    """Minimize the objective from x0 and certify the result.

    Certificates: gradient norm below gtol; the balance identity below btol
    at every curve shorter than eps0; agreement of perturbed restarts below
    multistart_tol when cfg.multistart > 0.
    """
    cfg = cfg or SolverConfig()
    vec, f, g, iters = _bfgs(obj, x0.to_vector(), cfg)
    gnorm = float(np.linalg.norm(g))
    if gnorm >= cfg.gtol:
        raise CertificationError(
            "gradient norm %.3g did not reach gtol %.3g" % (gnorm, cfg.gtol))
    x = FNPoint.from_vector(list(vec))
    bal = balance_residuals(obj, x, cfg.eps0)
    for cid, r in bal.items():
        if abs(r) >= cfg.btol:
            raise CertificationError(
                "balance residual %.3g at curve %d exceeds btol %.3g"
                % (r, cid, cfg.btol))
    spread = 0.0
    if cfg.multistart > 0:
        rng = random.Random(cfg.seed)
        for _ in range(cfg.multistart):
            start = x0.perturbed(rng, cfg.multistart_scale)
            vec2, _f2, g2, _ = _bfgs(obj, start.to_vector(), cfg)
            if float(np.linalg.norm(g2)) >= cfg.gtol:
                raise CertificationError("a perturbed restart failed to converge")
            spread = max(spread, float(np.max(np.abs(vec2 - vec))))
        if spread >= cfg.multistart_tol:
            raise CertificationError(
                "restarts disagree by %.3g (tol %.3g): minimizer not unique "
                "at this precision" % (spread, cfg.multistart_tol))
    short_ids = [cid for cid in range(len(x.lengths)) if x.lengths[cid] < cfg.eps0]
    return MinimaPathPoint(obj.t, x, f, gnorm, bal, short_ids, iters, spread)


def trace_path(system, nu_plus, nu_minus, t_values, x0, cfg=None,
               jump_bound=None):
    """Warm-started continuation of the minimizer along a monotone t grid."""
    cfg = cfg or SolverConfig()
    ts = list(t_values)
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t grid must be strictly increasing")
    out = []
    x_prev = x0
    for i, t in enumerate(ts):
        obj = Objective(system, nu_plus, nu_minus, t)
        try:
            point = minimize(obj, x_prev, cfg)
        except SolverError:
            if x_prev is x0:
                raise
            point = minimize(obj, x0, cfg)  # cold-start fallback
        if out and jump_bound is not None:
            prev_vec = np.array(out[-1].x.to_vector())
            jump = float(np.max(np.abs(np.array(point.x.to_vector()) - prev_vec)))
            dt = t - ts[i - 1]
            if jump > jump_bound * max(dt, 1e-9):
                raise SolverError(
                    "continuation jump %.3g at t=%.4g exceeds the bound" % (jump, t))
        out.append(point)
        x_prev = point.x
    return out
