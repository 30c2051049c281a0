"""Experiment runner: loads a JSON config, runs the requested sweep, and
emits a JSON report plus a flat CSV for plotting.

Exit codes: 0 all certifications pass, 2 a certification failed, 3 bad
config, 4 a computation failed, 5 I/O trouble.  Reports are byte-identical
for identical config and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .compare import (
    BandConfig,
    distance_estimator,
    hk_band,
    product_region_distance,
    ratio_band_check,
    short_curve_report,
    short_set_agreement,
    twist_bound_check,
)
from .solver import CertificationError, Objective, SolverConfig, SolverError, minimize
from .experiments import SlitPairInstance, TorusTwistInstance

EXIT_OK = 0
EXIT_CERTIFICATION = 2
EXIT_CONFIG = 3
EXIT_COMPUTE = 4
EXIT_IO = 5


class ConfigError(ValueError):
    pass


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise OSError("cannot read config: %s" % e)
    except json.JSONDecodeError as e:
        raise ConfigError("config is not valid JSON: %s" % e)
    return validate_config(raw)


def validate_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("instance", {}).get("kind")
    if kind not in ("torus-twisting", "slit-pair"):
        raise ConfigError("instance.kind must be torus-twisting or slit-pair")
    inst = raw["instance"]
    if kind == "torus-twisting":
        ns = inst.get("n", [])
        if not ns or not all(isinstance(n, int) and n > 0 for n in ns):
            raise ConfigError("instance.n must be a nonempty list of positive ints")
    else:
        eps = inst.get("epsilon", [])
        side = 1.0 / math.sqrt(2.0)
        if not eps or not all(0.0 < e < side / math.sqrt(2.0) for e in eps):
            raise ConfigError("instance.epsilon must be a nonempty list in (0, side/sqrt 2)")
    grid = raw.get("t_grid", [0.0])
    if isinstance(grid, dict):
        start, stop, step = grid["start"], grid["stop"], grid["step"]
        if step <= 0 or stop < start:
            raise ConfigError("t_grid start/stop/step malformed")
        count = int(round((stop - start) / step))
        grid = [start + i * step for i in range(count + 1)]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("t_grid must be strictly increasing and nonempty")
    raw["t_grid"] = grid
    raw.setdefault("solver", {})
    raw.setdefault("bands", {})
    raw.setdefault("seed", 0)
    return raw


def solver_config(raw, seed):
    known = {"gtol", "btol", "max_iter", "fd_step", "multistart",
             "multistart_tol", "multistart_scale", "eps0", "length_floor",
             "max_step"}
    extra = set(raw) - known
    if extra:
        raise ConfigError("unknown solver options: %s" % sorted(extra))
    return SolverConfig(seed=seed, **raw)


def band_config(raw):
    known = {"ratio", "additive", "eps0", "eps_short", "collar_c",
             "twist_product", "coherence"}
    extra = set(raw) - known
    if extra:
        raise ConfigError("unknown band options: %s" % sorted(extra))
    return BandConfig(**raw)


def _round_floats(obj, digits=12):
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def run_point(instance, param, t, scfg, bands):
    obj = Objective(instance.system, instance.nu_plus, instance.nu_minus, t)
    point = minimize(obj, instance.start, scfg)
    reports = short_curve_report(instance, point, bands,
                                 include=instance.short_curve_candidates())
    dist = product_region_distance(reports, point)
    twist_rows = twist_bound_check(reports, bands)
    hk_rows = hk_band(reports, bands)
    agree_ok, eps_measured = short_set_agreement(reports, bands)
    certs = {
        "twist_bounds": all(ok for _, _, ok in twist_rows),
        "hk_band": all(ok for _, _, ok in hk_rows),
        "short_set_agreement": agree_ok,
    }
    record = {
        "param": param,
        "t": t,
        "fn_lengths": list(point.x.lengths),
        "fn_twists": list(point.x.twists),
        "objective": point.value,
        "grad_norm": point.grad_norm,
        "balance": {str(k): v for k, v in point.balance.items()},
        "multistart_spread": point.multistart_spread,
        "short_curves": [r.as_dict() for r in reports],
        "distance": dist.as_dict(),
        "eps_prime_measured": eps_measured,
        "certifications": certs,
    }
    return record, all(certs.values())


def run_experiment(cfg, jobs=1):
    kind = cfg["instance"]["kind"]
    scfg = solver_config(cfg["solver"], cfg["seed"])
    bands = band_config(cfg["bands"])
    grid = cfg["t_grid"]
    if kind == "torus-twisting":
        params = cfg["instance"]["n"]
        make = lambda n: TorusTwistInstance(
            n,
            cfg["instance"].get("w_plus", 1.0),
            cfg["instance"].get("w_minus", 1.0),
        )
    else:
        params = cfg["instance"]["epsilon"]
        make = SlitPairInstance

    tasks = [(p, t) for p in params for t in grid]

    def work(task):
        p, t = task
        return run_point(make(p), p, t, scfg, bands)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(task) for task in tasks]

    records = [r for r, _ in results]
    ok = all(flag for _, flag in results)
    sweep_checks, sweep_ok = sweep_certifications(kind, records, bands)
    report = {
        "version": __version__,
        "config": cfg,
        "bands": bands.as_dict(),
        "points": _round_floats(records),
        "sweep_certifications": sweep_checks,
        "all_passed": bool(ok and sweep_ok),
        "failures": [
            {"param": r["param"], "t": r["t"],
             "failed": sorted(k for k, v in r["certifications"].items() if not v)}
            for r, flag in results if not flag
        ],
    }
    return report


def sweep_certifications(kind, records, bands):
    """Cross-point scaling laws: the quantities that must sit in one band."""
    checks = {}
    if kind == "torus-twisting":
        at_balance = [r for r in records if abs(r["t"]) < 1e-9]
        prods = [r["param"] * r["fn_lengths"][0] for r in at_balance]
        ok, ratio = ratio_band_check(prods, bands.ratio)
        checks["length_times_n_band"] = {"ok": ok, "ratio": ratio, "values": prods}
    else:
        at_zero = [r for r in records if abs(r["t"]) < 1e-9]
        k_eps, proxy_log, l_sqrt, ests = [], [], [], []
        for r in at_zero:
            eps = r["param"]
            sc = r["short_curves"][0] if r["short_curves"] else None
            if sc is None:
                continue
            k_eps.append(sc["flat_ratio"] * eps)
            proxy_log.append((1.0 / sc["proxy"]) / math.log(1.0 / eps))
            l_sqrt.append(sc["l_min"] / math.sqrt(eps))
            ests.append(r["distance"]["estimator"])
        for name, vals in (("k_times_eps_band", k_eps),
                           ("proxy_reciprocal_over_log_band", proxy_log),
                           ("length_over_sqrt_eps_band", l_sqrt)):
            ok, ratio = ratio_band_check(vals, bands.ratio)
            checks[name] = {"ok": ok, "ratio": ratio, "values": vals}
        checks["distance_estimators"] = {"values": ests}
    ok_all = all(v.get("ok", True) for v in checks.values())
    return _round_floats(checks), ok_all


def write_report(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(out_dir, "sweep.csv")
    cols = ["param", "t", "l_min", "proxy", "D", "K", "H", "est_geo",
            "est_min_k", "est_min_h", "tw_prod_plus", "tw_prod_minus",
            "distance_estimator", "distance_aggregate"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in report["points"]:
        sc = rec["short_curves"][0] if rec["short_curves"] else {}
        writer.writerow([
            rec["param"], rec["t"],
            sc.get("l_min"), sc.get("proxy"), sc.get("twist_term"),
            sc.get("flat_ratio"), sc.get("pants_ratio"), sc.get("est_geo"),
            sc.get("est_min_k"), sc.get("est_min_h"),
            sc.get("tw_prod_plus"), sc.get("tw_prod_minus"),
            rec["distance"]["estimator"], rec["distance"]["aggregate"],
        ])
    with open(csv_path, "w") as fh:
        fh.write(buf.getvalue())
    return json_path, csv_path


def selfcheck():
    """Fast invariant sweep over the kernel machinery."""
    import random
    import numpy as np

    from . import flat as fl
    from . import fuchsian as fu
    from .curves import TorusSlope, WeightedMultiCurve
    from .hyperbolic import hexagon_opposites, perp_derivatives, _seam

    failures = []
    rng = random.Random(0)
    worst = 0.0
    for _ in range(500):
        l = [rng.uniform(0.01, 3.0) for _ in range(3)]
        back = hexagon_opposites(*hexagon_opposites(*l))
        worst = max(worst, max(abs(x - y) / x for x, y in zip(l, back)))
    if worst > 1e-9:
        failures.append("hexagon-round-trip")

    worst = 0.0
    for _ in range(200):
        la, lb, lc = (rng.uniform(0.01, 1.5), rng.uniform(0.05, 3.0),
                      rng.uniform(0.05, 3.0))
        der = perp_derivatives(la, lb, lc)
        h = 1e-6
        fd = (_seam(la + h, lc, lb) - _seam(la - h, lc, lb)) / (2 * h)
        worst = max(worst, abs(der.d_seam - fd) / max(1e-9, abs(fd)))
    if worst > 1e-5:
        failures.append("perpendicular-derivatives")

    sys15 = fu.OncePuncturedTorus()
    worst = 0.0
    for _ in range(50):
        l = rng.uniform(0.05, 2.5)
        rep = sys15.assemble(fu.FNPoint([l], [rng.uniform(-2, 2)]))
        worst = max(worst, rep.relator_residual)
    if worst > 1e-9:
        failures.append("relator-residual")

    surf = fl.make_slit_pair(0.05)
    for direction in ((1, 0), (0, 1)):
        cyls = fl.cylinder_decomposition(surf, direction)
        total = sum(c.circumference * c.height for c in cyls)
        if abs(total - 1.0) > 1e-9:
            failures.append("cylinder-area")
    if abs(fl.QDTimeSlice(surf, 1.3).surface.area() - 1.0) > 1e-12:
        failures.append("area-preservation")
    return failures


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="teichlab",
        description="run flat-versus-minimizer comparison experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment config")
    runp.add_argument("config")
    runp.add_argument("--out", default="reports")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--jobs", type=int, default=1)
    sub.add_parser("selfcheck", help="run the fast kernel invariant suites")
    args = parser.parse_args(argv)

    if args.command == "selfcheck":
        failures = selfcheck()
        if failures:
            print("selfcheck FAILED: %s" % ", ".join(failures))
            return EXIT_CERTIFICATION
        print("selfcheck passed")
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print("io error: %s" % e, file=sys.stderr)
        return EXIT_IO
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        report = run_experiment(cfg, jobs=max(1, args.jobs))
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except (CertificationError,) as e:
        print("certification error: %s" % e, file=sys.stderr)
        return EXIT_CERTIFICATION
    except (SolverError, ArithmeticError, RuntimeError, ValueError) as e:
        print("computation error: %s" % e, file=sys.stderr)
        return EXIT_COMPUTE
    try:
        json_path, csv_path = write_report(report, args.out)
    except OSError as e:
        print("io error: %s" % e, file=sys.stderr)
        return EXIT_IO
    print("wrote %s and %s" % (json_path, csv_path))
    if not report["all_passed"]:
        print("certification failures: %s" % json.dumps(report["failures"]),
              file=sys.stderr)
        return EXIT_CERTIFICATION
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
