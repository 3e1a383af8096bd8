"""``ginprod`` command-line interface.

Every command emits one table, as CSV (``#`` metadata lines, then a
header row) or JSON (``metadata``, ``columns``, ``rows``). Exit status:
0 success, 1 failed verification, 2 usage error, 3 numerical failure,
4 unsupported parameter range.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import montecarlo as mc
from . import verify
from .config import load_config, parse_grid
from .errors import DomainError, GinprodError, UnsupportedRangeError
from .meijer import CoefficientCache, coeff_a, coeff_a_oracle, default_cache
from .moments import (
    density_scaled,
    expected_real_count,
    moment_exact,
    moment_table,
)

log = logging.getLogger("ginprod")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class Report:
    def __init__(self, command, config, columns, rows, extra=None):
        self.command = command
        self.config = config
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.extra = extra or {}

    def metadata(self, wall_time):
        meta = {"ginprod_version": __version__, "command": self.command,
                "config": self.config.as_dict(), "wall_time_s": round(wall_time, 6)}
        meta.update(self.extra)
        return meta

    def render(self, fmt, wall_time):
        meta = self.metadata(wall_time)
        if fmt == "json":
            return json.dumps({"metadata": meta, "columns": self.columns, "rows": self.rows},
                              indent=2, default=_json_default) + "\n"
        buf = io.StringIO()
        for key, value in meta.items():
            text = json.dumps(value, sort_keys=True, default=_json_default) if isinstance(value, dict) else value
            buf.write(f"# {key}={text}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _cell(v):
    # repr of a Python float is locale-independent and round-trips exactly
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _resolve_seed(config):
    if config.seed is not None:
        return config.seed
    return int(np.random.SeedSequence().entropy) & mc.SEED_MASK


def cmd_expected_count(config, cache, args):
    p = config.params
    exact = expected_real_count(p, config.quadrature, cache)
    pred = asy.expected_count_asymptotic(p)
    columns = ["n", "m", "exact", "asymptotic", "ratio"]
    row = [p.n, p.m, exact, pred, exact / pred]
    extra = {}
    if config.trials:
        seed = _resolve_seed(config)
        res = mc.simulate(p, config.trials, seed, workers=config.workers)
        mean, se = mc.empirical_moment(res, 0)
        columns += ["mc_mean", "mc_stderr"]
        row += [mean, se]
        extra = {"seed": seed, "discarded": len(res.discarded)}
    return Report("expected-count", config, columns, [row], extra)


def cmd_moments(config, cache, args):
    table = moment_table(config.params, config.k_max, config.quadrature, cache)
    return Report("moments", config, ["k", "exact", "asymptotic", "limit"], table.rows())


def cmd_density(config, cache, args):
    p = config.params
    pts, dropped = parse_grid(config.grid, p.m)
    if dropped:
        log.warning("x = 0 removed from the grid: the density is singular there for m >= 2")
    x = np.asarray(pts)
    scaled = density_scaled(p, x, config.quadrature)
    mass = expected_real_count(p, config.quadrature, cache)
    with np.errstate(divide="ignore"):
        unscaled = scaled / p.scale
    limit = asy.limit_density(p.m, x)
    rows = zip(x.tolist(), unscaled.tolist(), scaled.tolist(), (scaled / mass).tolist(),
               np.atleast_1d(limit).tolist())
    return Report("density", config, ["x", "rho_unscaled", "rho_scaled", "h", "h_limit"], rows,
                  {"note": "rho_unscaled is rho_1 at the unscaled point x * N^(m/2)"})


def cmd_simulate(config, cache, args):
    p = config.params
    trials = config.trials or 1000
    seed = _resolve_seed(config)
    res = mc.simulate(p, trials, seed, workers=config.workers)
    if args.dump_counts:
        mc.write_counts_csv(res, args.dump_counts)
    if args.dump_samples:
        mc.write_samples_csv(res, args.dump_samples)
    rows = []
    for k in range(0, config.k_max + 1, 2):
        est, se = mc.empirical_moment(res, k)
        try:
            exact = moment_exact(p, k, config.quadrature, cache)
        except UnsupportedRangeError:
            exact = float("nan")
        rows.append([k, est, se, exact])
    extra = {"seed": seed, "trials": trials, "kept": res.kept,
             "discarded": len(res.discarded), "simulation_s": round(res.elapsed, 6)}
    return Report("simulate", config, ["k", "mc_moment", "mc_stderr", "exact"], rows, extra)


def cmd_coeff(config, cache, args):
    spec = config.quadrature
    m, j, k = config.m, args.j, args.k
    a = coeff_a(m, j, k, spec, cache).value
    plain = a.to_real() if a.log_mag < 700 else float("inf")
    columns = ["m", "j", "k", "log_a", "a"]
    row = [m, j, k, a.log_mag, plain]
    if args.oracle:
        b = coeff_a_oracle(m, j, k, spec)
        columns += ["oracle_log_a", "rel_diff"]
        row += [b.log_mag, abs(math.expm1(a.log_mag - b.log_mag))]
    return Report("coeff", config, columns, [row])


def cmd_verify(config, cache, args):
    numbers = None
    if args.criteria:
        try:
            numbers = sorted({int(c) for c in args.criteria.split(",")})
        except ValueError as exc:
            raise DomainError("--criteria takes a comma-separated list of numbers") from exc
        unknown = [c for c in numbers if c not in verify.CRITERIA]
        if unknown:
            raise DomainError(f"unknown criteria: {unknown}")
    kwargs = {"spec": config.quadrature, "workers": config.workers, "a0_factor": args.inject_a0_factor}
    if config.seed is not None:
        kwargs["seed"] = config.seed
    results = []
    for n in numbers or sorted(verify.CRITERIA):
        r = verify.run_criterion(n, **kwargs)
        print(r.line(), file=sys.stderr, flush=True)
        results.append(r)
    rows = [[r.number, r.name, r.measured, r.required, "pass" if r.passed else "fail",
             round(r.elapsed, 3)] for r in results]
    rep = Report("verify", config, ["criterion", "name", "measured", "required", "status", "elapsed_s"],
                 rows, {"all_passed": all(r.passed for r in results)})
    rep.exit_code = EXIT_OK if all(r.passed for r in results) else EXIT_FAILED
    return rep


COMMANDS = {
    "expected-count": cmd_expected_count,
    "moments": cmd_moments,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "coeff": cmd_coeff,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise DomainError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="matrix size N (even)")
    common.add_argument("--m", type=int, help="number of factors")
    common.add_argument("--k-max", type=int, help="largest moment order")
    common.add_argument("--grid", help="density grid start:stop:num in scaled units")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--seed", type=int, help="64-bit Monte Carlo seed")
    common.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
    common.add_argument("--cache", help="coefficient cache file (read and updated)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--workers", type=int, help="Monte Carlo worker threads")
    common.add_argument("--config", help="flat key = value config file")

    parser = _Parser(prog="ginprod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ginprod {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("expected-count", parents=[common], help="E N_R: exact, asymptotic, optional MC")
    sub.add_parser("moments", parents=[common], help="moment table up to --k-max")
    sub.add_parser("density", parents=[common], help="density of real eigenvalues on --grid")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo summary")
    p.add_argument("--dump-counts", help="CSV of per-trial counts")
    p.add_argument("--dump-samples", help="CSV of scaled real eigenvalues")
    p = sub.add_parser("coeff", parents=[common], help="coefficient a_{j,k}")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also evaluate the real-integral oracle")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,10")
    p.add_argument("--inject-a0-factor", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


FLAG_KEYS = ("n", "m", "k_max", "grid", "trials", "seed", "rel_tol", "cache", "format", "out", "workers")


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="ginprod: %(levelname)s: %(message)s")
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        config = load_config({k: getattr(args, k) for k in FLAG_KEYS}, args.config)
        config.params  # validate N and m up front
        cache = CoefficientCache(config.cache) if config.cache else default_cache
        report = COMMANDS[args.command](config, cache, args)
        if config.cache:
            cache.save(config.cache)
        text = report.render(config.format, time.perf_counter() - t0)
        if config.out:
            with open(config.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return getattr(report, "exit_code", EXIT_OK)
    except GinprodError as exc:
        print(f"ginprod: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ginprod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
