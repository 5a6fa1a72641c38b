"""Command-line driver: reproducible experiment recipes and reports.

Exit codes: 0 success, 1 invalid configuration, 2 a verification fell
outside its envelope, 3 numeric-integrity failure (e.g. Weil bound).
"""

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, cache, coeffs, kloosterman, progressions, smoothing, stats
from ._kernels import BACKEND
from .config import SCHEMA_VERSION, ValidationError, load_config
from .kloosterman import IntegrityError
from .quadrature import QuadratureError

_CHECK_FAIL = 2
_INTEGRITY_FAIL = 3


def _add_common(sub):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--kind", help="d, f, or d,f")
    sub.add_argument("--prime", dest="primes", help="comma-separated primes")
    sub.add_argument("--prime-range", dest="prime_range", help="lo:hi")
    sub.add_argument("--x", help="explicit window X")
    sub.add_argument("--phi-c", dest="phi_c", help="phi rule constant")
    sub.add_argument("--phi-e", dest="phi_e", help="phi rule log exponent")
    sub.add_argument("--profile", help="named weight profile")
    sub.add_argument("--w0", help="custom support left endpoint")
    sub.add_argument("--w1", help="custom support right endpoint")
    sub.add_argument("--gamma", help="projective map a,b,c,d")
    sub.add_argument("--kappa-max", dest="kappa_max", help="largest moment")
    sub.add_argument("--lambda-max", dest="lambda_max", help="largest mixed moment")
    sub.add_argument("--residues", help="residues per voronoi check")
    sub.add_argument("--tuples", help="random tuples per prime")
    sub.add_argument("--seed", help="rng seed for random tuples")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", help="parallel (kind, p) jobs")
    sub.add_argument("--format", dest="format", help="csv or json dumps")
    sub.add_argument("--cache-dir", dest="cache_dir", help="coefficient cache dir")


def build_parser():
    parser = argparse.ArgumentParser(prog="apmoments")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sieve-dump", "build and cache coefficient tables"),
        ("bessel-selftest", "transform identity checks and decay audit"),
        ("voronoi-check", "dual-expansion verification per residue"),
        ("kloosterman", "tables, configuration sums, angle statistics"),
        ("moments", "empirical vs predicted moments"),
        ("mixed", "mixed moments and covariance for a projective map"),
        ("clt-sweep", "KS distances across a prime sweep"),
    ):
        sub = subs.add_parser(name, help=help_text)
        _add_common(sub)
        if name == "sieve-dump":
            sub.add_argument("--n-max", dest="n_max", type=int, default=100000)
            sub.add_argument("--csv-limit", dest="csv_limit", type=int, default=10000)
    return parser


def _config_from_args(args):
    keys = (
        "kind primes prime_range x phi_c phi_e profile w0 w1 gamma "
        "kappa_max lambda_max residues tuples seed out workers format"
    ).split()
    overrides = {k: getattr(args, k, None) for k in keys}
    return load_config(args.config, overrides)


def _report_skeleton(cfg, caches=()):
    return {
        "schema_version": SCHEMA_VERSION,
        "generator": f"apmoments {__version__}",
        "backend": BACKEND,
        "numpy_version": np.__version__,
        "config": cfg.emit(),
        "coefficient_caches": list(caches),
        "results": [],
    }


def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def _profile_for(cfg):
    w0, w1 = cfg.weight_bounds()
    return smoothing.default_weight(w0, w1)


def _coefficient_table(kind, n_need, cfg, caches, cache_dir=None):
    granule = 100_000
    n_max = max(granule, ((n_need + granule - 1) // granule) * granule)
    cache_dir = cache_dir or str(Path(cfg.out) / "cache")
    table = coeffs.load_or_build_table(kind, n_max, cache_dir)
    path = cache.cache_path(cache_dir, kind, table.weight, n_max)
    info = cache.header_info(path)
    caches.append(
        {
            "kind": kind,
            "weight": table.weight,
            "n_max": n_max,
            "crc": info[3] if info else None,
        }
    )
    return table


def _require_primes(cfg):
    if not cfg.primes:
        raise ValidationError("this command needs at least one prime")


def cmd_sieve_dump(args):
    cfg = _config_from_args(args)
    out = Path(cfg.out)
    caches = []
    rows = []
    for kind in cfg.kinds:
        table = _coefficient_table(kind, args.n_max, cfg, caches, args.cache_dir)
        limit = min(args.csv_limit, table.n_max)
        for n in range(1, limit + 1):
            rows.append((kind, n, table.value(n)))
    report = _report_skeleton(cfg, caches)
    report["results"] = [{"kinds": list(cfg.kinds), "n_max_requested": args.n_max}]
    _write_json(out / "sieve_dump.json", report)
    _write_csv(out / "coefficients.csv", ("kind", "n", "value"), rows)
    return 0


def cmd_bessel_selftest(args):
    cfg = _config_from_args(args)
    profile = _profile_for(cfg)
    out = Path(cfg.out)
    rows = []
    results = []
    failed = False
    for kind in cfg.kinds:
        pl = smoothing.plancherel_check(kind, profile)
        crosses = []
        for m, n in ((1, 2), (2, 3), (1, -1), (2, -3)):
            c = smoothing.cross_product_check(kind, m, n, profile)
            crosses.append({"m": m, "n": n, "lhs": c.lhs, "rhs": c.rhs, "diff": c.diff})
            failed |= c.diff > 1e-6
        failed |= pl.diff > 1e-6
        for y in np.geomspace(1e-3, 1000.0, 25):
            for s in (1.0, -1.0):
                wv = smoothing.transform_W(kind, s * y, profile, 1e-10)
                env = abs(wv) * y**3 if y >= 1 else abs(wv) / (1 + abs(math.log(y)))
                rows.append((kind, s * y, wv, env))
        results.append(
            {
                "kind": kind,
                "plancherel": {"lhs": pl.lhs, "rhs": pl.rhs, "diff": pl.diff},
                "cross_products": crosses,
                "tail_constant_a5": smoothing.tail_constant(kind, profile),
            }
        )
    report = _report_skeleton(cfg)
    report["results"] = results
    _write_json(out / "bessel_selftest.json", report)
    _write_csv(out / "bessel_selftest.csv", ("kind", "y", "W", "bound_check"), rows)
    return _CHECK_FAIL if failed else 0


def cmd_voronoi_check(args):
    cfg = _config_from_args(args)
    _require_primes(cfg)
    profile = _profile_for(cfg)
    out = Path(cfg.out)
    caches = []
    jobs = [(kind, p) for kind in cfg.kinds for p in cfg.primes]
    n_need = max(int(math.ceil(profile.w1 * cfg.x_for(p))) for p in cfg.primes)
    tables = {
        kind: _coefficient_table(kind, n_need, cfg, caches, args.cache_dir)
        for kind in cfg.kinds
    }

    def run_job(job):
        kind, p = job
        x = cfg.x_for(p)
        table = tables[kind]
        ev = progressions.progression_sums(table, x, p, profile)
        klrow = kloosterman.kl_table(p)
        n_dual = progressions.voronoi_truncation_length(kind, x, p, profile)
        tt = smoothing.build_transform_table(kind, ev.scale_y, n_dual, profile)
        rows = []
        rng = np.random.default_rng(cfg.seed)
        residues = rng.choice(np.arange(1, p), size=min(cfg.residues, p - 1), replace=False)
        for a in sorted(int(a) for a in residues):
            vc = progressions.voronoi_check(ev, table, profile, a, ttable=tt, kl_row=klrow)
            rows.append((kind, p, x, a, vc.lhs, vc.rhs, vc.diff, vc.tail_bound, vc.n_used))
        return rows

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        all_rows = list(pool.map(run_job, jobs))
    rows = [r for chunk in all_rows for r in chunk]
    failed = any(r[6] > r[7] + 1e-3 for r in rows)
    report = _report_skeleton(cfg, caches)
    report["results"] = [
        dict(zip(("kind", "p", "x", "a", "lhs", "rhs", "diff", "tail_bound", "n_used"), r))
        for r in rows
    ]
    _write_json(out / "voronoi_check.json", report)
    _write_csv(
        out / "voronoi_check.csv",
        ("kind", "p", "x", "a", "lhs", "rhs", "diff", "tail_bound", "n_used"),
        rows,
    )
    return _CHECK_FAIL if failed else 0


def cmd_kloosterman(args):
    cfg = _config_from_args(args)
    _require_primes(cfg)
    out = Path(cfg.out)
    angle_rows = []
    results = []
    for p in cfg.primes:
        table = kloosterman.kl_table(p)
        weil_max = float(np.max(np.abs(table[1:])))
        if weil_max > 2.0 + 1e-9:
            raise IntegrityError(f"Weil bound violated at p={p}")
        angles = kloosterman.sato_tate_angles(p, table)
        ks = stats.ks_statistic(angles, kloosterman.sato_tate_cdf)
        for a in range(1, p):
            angle_rows.append((p, a, table[a], angles[a - 1]))
        rng = np.random.default_rng(cfg.seed)
        tuple_reports = []
        for mirror in (True, False):
            for _ in range(cfg.tuples):
                kappa = int(rng.integers(1, 4)) * 2 if mirror else int(rng.integers(1, 7))
                maps = kloosterman.random_tuple(p, kappa, mirror, rng)
                r = kloosterman.configuration_sum(maps, p, table)
                tuple_reports.append(
                    {
                        "p": p,
                        "kappa": kappa,
                        "config": list(r.config.mults),
                        "A": r.a_const,
                        "S": r.value,
                        "ratio": r.deviation_ratio,
                        "excluded_count": r.excluded,
                    }
                )
        results.append(
            {
                "p": p,
                "weil_max": weil_max,
                "ks_sato_tate": ks,
                "tuples": tuple_reports,
            }
        )
    report = _report_skeleton(cfg)
    report["results"] = results
    _write_json(out / "kloosterman.json", report)
    _write_csv(out / "angles.csv", ("p", "a", "kl", "theta"), angle_rows)
    return 0


def _moment_entry(table, ev, profile, cfg, ttable):
    p, x = ev.p, ev.x_window
    kind = table.kind
    c_emp = progressions.normalization_constant(table, x, p, profile, "empirical", ttable)
    c_ana = progressions.normalization_constant(table, x, p, profile, "analytic")
    entries = []
    for kappa in range(1, cfg.kappa_max + 1):
        emp = progressions.empirical_moment(ev, kappa)
        pred = stats.gaussian_moment(kappa) * c_emp.value ** (kappa / 2.0)
        pred_a = stats.gaussian_moment(kappa) * c_ana.value ** (kappa / 2.0)
        entries.append(
            {
                "kappa": kappa,
                "empirical": emp,
                "predicted": pred,
                "predicted_analytic": pred_a,
                "envelope": progressions.mark_envelope(kappa, x, p),
            }
        )
    z = ev.errors[1:] / math.sqrt(c_emp.value)
    summary = stats.DistributionSummary.from_samples(z)
    entry = {
        "kind": kind,
        "p": p,
        "x": x,
        "y": ev.scale_y,
        "c_empirical": c_emp.value,
        "c_analytic": c_ana.value,
        "normalization": "empirical",
        "moments": entries,
        "distribution": summary.to_dict(),
        "main_term": ev.main_term,
        "partition_residual": abs(float(np.sum(ev.sums)) - ev.smoothed_total),
    }
    if kind == "f":
        entry["main_term_decay_diagnostic"] = ev.main_term_decay_diagnostic
    return entry


def _residue_rows(ev, kind):
    return [
        (ev.p, int(ev.x_window), kind, a, ev.sums[a], ev.errors[a])
        for a in range(1, ev.p)
    ]


def cmd_moments(args):
    cfg = _config_from_args(args)
    _require_primes(cfg)
    profile = _profile_for(cfg)
    out = Path(cfg.out)
    caches = []
    n_need = max(
        int(math.ceil(profile.w1 * cfg.x_for(p))) for p in cfg.primes
    )
    tables = {
        kind: _coefficient_table(kind, n_need, cfg, caches, args.cache_dir)
        for kind in cfg.kinds
    }
    jobs = [(kind, p) for kind in cfg.kinds for p in cfg.primes]

    def run_job(job):
        kind, p = job
        table = tables[kind]
        x = cfg.x_for(p)
        ev = progressions.progression_sums(table, x, p, profile)
        tt = smoothing.build_transform_table(kind, ev.scale_y, (p - 1) // 2, profile)
        return _moment_entry(table, ev, profile, cfg, tt), _residue_rows(ev, kind)

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        outputs = list(pool.map(run_job, jobs))
    report = _report_skeleton(cfg, caches)
    report["results"] = [entry for entry, _ in outputs]
    _write_json(out / "moments.json", report)
    if cfg.fmt == "csv":
        rows = [r for _, chunk in outputs for r in chunk]
        _write_csv(out / "residues.csv", ("p", "X", "kind", "a", "S", "E"), rows)
        hist_rows = []
        for entry, _ in outputs:
            h = entry["distribution"]["histogram"]
            lo = h["lo"]
            for i, count in enumerate(h["counts"]):
                hist_rows.append(
                    (
                        entry["kind"],
                        entry["p"],
                        lo + i * h["width"],
                        lo + (i + 1) * h["width"],
                        count,
                    )
                )
            hist_rows.append((entry["kind"], entry["p"], "-inf", lo, h["underflow"]))
            hist_rows.append((entry["kind"], entry["p"], h["hi"], "+inf", h["overflow"]))
        _write_csv(
            out / "histogram.csv",
            ("kind", "p", "bin_lo", "bin_hi", "count"),
            hist_rows,
        )
    return 0


def cmd_mixed(args):
    cfg = _config_from_args(args)
    _require_primes(cfg)
    profile = _profile_for(cfg)
    gamma = cfg.gamma_map()
    out = Path(cfg.out)
    caches = []
    n_need = max(int(math.ceil(profile.w1 * cfg.x_for(p))) for p in cfg.primes)
    tables = {
        kind: _coefficient_table(kind, n_need, cfg, caches, args.cache_dir)
        for kind in cfg.kinds
    }
    jobs = [(kind, p) for kind in cfg.kinds for p in cfg.primes]

    def run_job(job):
        kind, p = job
        table = tables[kind]
        x = cfg.x_for(p)
        ev = progressions.progression_sums(table, x, p, profile)
        tt = smoothing.build_transform_table(kind, ev.scale_y, (p - 1) // 2, profile)
        grid = []
        excluded = 0
        for kappa in range(1, cfg.kappa_max + 1):
            for lam in range(1, cfg.lambda_max + 1):
                mm = progressions.mixed_moment(ev, gamma, kappa, lam)
                pm = progressions.predicted_mixed(
                    table, kappa, lam, gamma, x, p, profile, "empirical", tt
                )
                excluded = p - mm.domain_size
                grid.append(
                    {
                        "kappa": kappa,
                        "lambda": lam,
                        "empirical": mm.value,
                        "predicted": pm.value,
                        "domain_size": mm.domain_size,
                    }
                )
        pm11 = progressions.predicted_mixed(
            table, 1, 1, gamma, x, p, profile, "empirical", tt
        )
        avec = np.arange(p, dtype=np.int64)
        img = kloosterman.apply_map_vec(gamma, avec, p)
        alive = (avec != 0) & (img != 0) & (img != p)
        pairs = np.stack([ev.errors[avec[alive]], ev.errors[img[alive]]], axis=1)
        return {
            "kind": kind,
            "p": p,
            "x": x,
            "gamma": list(cfg.gamma),
            "diagonal": gamma.is_diagonal,
            "covariance_G": pm11.covariance,
            "correlation_empirical": stats.correlation(pairs),
            "c": pm11.c,
            "c_tilde": pm11.c_tilde,
            "grid": grid,
            "excluded_count": excluded,
        }

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(run_job, jobs))
    report = _report_skeleton(cfg, caches)
    report["results"] = results
    _write_json(out / "mixed.json", report)
    return 0


def cmd_clt_sweep(args):
    cfg = _config_from_args(args)
    _require_primes(cfg)
    profile = _profile_for(cfg)
    out = Path(cfg.out)
    caches = []
    n_need = max(int(math.ceil(profile.w1 * cfg.x_for(p))) for p in cfg.primes)
    tables = {
        kind: _coefficient_table(kind, n_need, cfg, caches, args.cache_dir)
        for kind in cfg.kinds
    }
    series = []
    rows = []
    for kind in cfg.kinds:
        for p in sorted(cfg.primes):
            x = cfg.x_for(p)
            ev = progressions.progression_sums(tables[kind], x, p, profile)
            tt = smoothing.build_transform_table(
                kind, ev.scale_y, (p - 1) // 2, profile
            )
            c_emp = progressions.normalization_constant(
                tables[kind], x, p, profile, "empirical", tt
            )
            z = ev.errors[1:] / math.sqrt(c_emp.value)
            ks = stats.ks_statistic(z, stats.normal_cdf)
            series.append(
                {"kind": kind, "p": p, "x": x, "ks": ks, "c_empirical": c_emp.value}
            )
            rows.append((kind, p, x, ks, c_emp.value))
    by_kind = {}
    for s in series:
        by_kind.setdefault(s["kind"], []).append(s["ks"])
    monotone = {k: all(b < a for a, b in zip(v, v[1:])) for k, v in by_kind.items()}
    report = _report_skeleton(cfg, caches)
    report["results"] = [{"series": series, "ks_monotone_decreasing": monotone}]
    _write_json(out / "clt_sweep.json", report)
    _write_csv(out / "clt_sweep.csv", ("kind", "p", "x", "ks", "c_empirical"), rows)
    return 0


_COMMANDS = {
    "sieve-dump": cmd_sieve_dump,
    "bessel-selftest": cmd_bessel_selftest,
    "voronoi-check": cmd_voronoi_check,
    "kloosterman": cmd_kloosterman,
    "moments": cmd_moments,
    "mixed": cmd_mixed,
    "clt-sweep": cmd_clt_sweep,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return _INTEGRITY_FAIL
    except QuadratureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return _INTEGRITY_FAIL


if __name__ == "__main__":
    sys.exit(main())
