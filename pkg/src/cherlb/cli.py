"""Command-line front end.

    cherlb bound --dof 4 --noncentrality 10 --variance 1 --epsilon 1e-6 --verify
    cherlb sweep --var m2 --start 0 --stop 200 --step 2 --methods cherlb exact polylb
    cherlb mimo --tx 16 32 --rx 2 --stat rho-prob --trials 100000 --output rho.csv
    cherlb ris --nr 16 64 --kappa 3 --epsilon 1e-5 --trials 10000000 --output ris.csv
    cherlb selftest

Exit codes: 0 ok, 1 selftest failure, 2 invalid arguments, 3 iteration cap,
4 insufficient samples.  A ``--config`` file of key=value lines supplies
defaults for any long flag; flags on the command line win.
"""

import argparse
import math
import shlex
import sys

from . import __version__
from .baselines import approx_threshold, poly_lb_central, poly_lb_noncentral, regression_fit, regression_predict
from .chernoff import SolverConfig, solve_central, solve_general, solve_noncentral, verify
from .chi2 import GeneralizedChiSquareSpec, NoncentralChiSquareSpec, ReliabilityTarget, noncentral_cdf, numeric_quantile
from .errors import DomainError, InsufficientSamplesError, IterationLimitError
from .output import RunManifest, render, write_csv

EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_ITER = 3
EXIT_SAMPLES = 4

APPROX_TAGS = {"z1": "sankaran_z1", "z2": "sankaran_z2", "aty1": "abdelaty_first", "aty2": "abdelaty_closer"}
BOUND_METHODS = ("cherlb", "polylb", "z1", "z2", "aty1", "aty2")
SWEEP_METHODS = BOUND_METHODS + ("exact", "reg", "reg0")

MIMO_COLUMNS = ("M", "N", "epsilon", "trial_count", "statistic_name", "value", "stderr")
RIS_COLUMNS = (
    "N_R", "kappa", "epsilon", "bound", "empirical_threshold",
    "ratio", "achieved_outage", "normalized_gain", "trials",
)
SWEEP_COLUMNS = ("variable", "x", "K", "M2", "var", "epsilon", "method", "value", "valid", "verified_cdf", "lambda")


def progress(msg):
    print(msg, file=sys.stderr, flush=True)


# -- argument types -------------------------------------------------------------

def positive_int(text):
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value != float(text) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _real(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def positive_real(text):
    value = _real(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def nonneg_real(text):
    value = _real(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return value


def probability(text):
    value = _real(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1), got {text!r}")
    return value


def components(text):
    """'mu:var,mu:var,...'"""
    comps = []
    for item in text.split(","):
        try:
            mu, var = item.split(":")
            comps.append((float(mu), float(var)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad component {item!r}; expected mu:var")
    return comps


# -- parser ---------------------------------------------------------------------

def _solver_flags(p):
    p.add_argument("--delta-beta", type=positive_real, default=1e-4, help="beta bisection tolerance (fraction of the mean)")
    p.add_argument("--absolute-tolerance", action="store_true", help="treat --delta-beta as absolute")
    p.add_argument("--max-iters", type=positive_int, default=4000)


def build_parser():
    parser = argparse.ArgumentParser(prog="cherlb", description="Chernoff lower bounds on outage thresholds.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file supplying defaults for long flags")
    parser.add_argument("--workers", type=positive_int, default=None, help="worker threads (default: $CHERLB_WORKERS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="bound for one distribution")
    p.add_argument("--dof", type=positive_int, default=4)
    p.add_argument("--noncentrality", type=nonneg_real, default=0.0)
    p.add_argument("--variance", type=positive_real, default=1.0)
    p.add_argument("--components", type=components, help="generalized spec as mu:var,mu:var,...")
    p.add_argument("--epsilon", type=probability, default=1e-6)
    p.add_argument("--method", choices=BOUND_METHODS, default="cherlb")
    p.add_argument("--verify", action="store_true", help="report the exact CDF at the result")
    p.add_argument("--output", help="also write the result row as CSV")
    _solver_flags(p)

    p = sub.add_parser("sweep", help="methods over a grid of one variable")
    p.add_argument("--var", choices=("m2", "rho", "epsilon", "dof"), default="m2")
    p.add_argument("--start", type=_real)
    p.add_argument("--stop", type=_real)
    p.add_argument("--step", type=positive_real)
    p.add_argument("--values", type=_real, nargs="+", help="explicit grid instead of start/stop/step")
    p.add_argument("--dof", type=positive_int, default=4)
    p.add_argument("--noncentrality", type=nonneg_real, default=0.0)
    p.add_argument("--variance", type=positive_real, default=1.0)
    p.add_argument("--rho-per-dof", type=nonneg_real, help="fix rho / K (dof sweeps)")
    p.add_argument("--epsilon", type=probability, default=1e-6)
    p.add_argument("--epsilon-per-pair", type=probability, help="use eps = e^(K/2) (diversity chains)")
    p.add_argument("--methods", nargs="+", choices=SWEEP_METHODS, default=["cherlb", "exact"])
    p.add_argument("--verify", action="store_true")
    p.add_argument("--output", help="CSV path (default: standard output)")
    _solver_flags(p)

    p = sub.add_parser("mimo", help="single-stream MIMO experiments")
    p.add_argument("--tx", type=positive_int, nargs="+", default=[16])
    p.add_argument("--rx", type=positive_int, default=2)
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=probability, default=1e-6)
    p.add_argument("--stat", choices=("rho-prob", "bounds", "power", "reliability", "ks"), default="rho-prob")
    p.add_argument("--rho-threshold", type=positive_real, default=120.0)
    p.add_argument("--carrier", type=positive_real, default=3.5e9, help="Hz")
    p.add_argument("--velocity", type=nonneg_real, default=20.0, help="m/s")
    p.add_argument("--lag", type=positive_real, default=0.5e-3, help="s")
    p.add_argument("--output", default="mimo.csv")
    _solver_flags(p)

    p = sub.add_parser("ris", help="RIS conservativeness experiments")
    p.add_argument("--nr", type=positive_int, nargs="+", default=[64])
    p.add_argument("--kappa", type=nonneg_real, nargs="+", default=[3.0])
    p.add_argument("--epsilon", type=probability, nargs="+", default=[1e-5])
    p.add_argument("--trials", type=positive_int, default=100_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="ris.csv")
    _solver_flags(p)

    p = sub.add_parser("selftest", help="fast invariant checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config_argv(path, parser, command):
    """Translate a key=value file into long flags for ``command``."""
    sub = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest: a for a in sub._actions}
    argv = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            dest = key.strip().replace("-", "_")
            if not sep or dest not in known:
                raise DomainError(f"{path}:{lineno}: unknown setting {key.strip()!r}")
            flag = known[dest].option_strings[-1]
            value = value.strip()
            if known[dest].nargs == 0:
                if value.lower() in ("1", "true", "yes", "on"):
                    argv.append(flag)
                continue
            argv += [flag] + shlex.split(value)
    return argv


def parse_args(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            extra = _config_argv(args.config, parser, args.command)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except DomainError as exc:
            parser.error(str(exc))
        pos = argv.index(args.command)
        # file settings first so command-line flags override them
        args = parser.parse_args(argv[: pos + 1] + extra + argv[pos + 1 :])
    return args


def _solver_cfg(args):
    return SolverConfig(delta_beta=args.delta_beta, max_iters=args.max_iters, relative=not args.absolute_tolerance)


# -- bound ----------------------------------------------------------------------

def _threshold(method, spec, eps, cfg):
    """(value, valid, lambda) for one method on a non-central spec."""
    if method == "cherlb":
        b = solve_noncentral(spec, eps, cfg).bound
        return b, True, b / spec.mean()
    if method == "polylb":
        b = poly_lb_central(spec.K, spec.var, eps) if spec.M2 == 0 else poly_lb_noncentral(spec, eps)
        return b, True, b / spec.mean()
    if method == "exact":
        b = numeric_quantile(spec, eps)
        return b, True, b / spec.mean()
    a = approx_threshold(APPROX_TAGS[method], spec, eps)
    return a.value, a.valid, a.value / spec.mean()


def cmd_bound(args):
    eps = ReliabilityTarget(args.epsilon).epsilon
    cfg = _solver_cfg(args)
    if args.components:
        gspec = GeneralizedChiSquareSpec(tuple(args.components))
        if args.method != "cherlb":
            if not gspec.is_equal_variance():
                raise DomainError(f"--method {args.method} needs equal component variances")
            spec = gspec.as_noncentral()
        else:
            spec = gspec
    else:
        spec = NoncentralChiSquareSpec(args.dof, args.noncentrality, args.variance)

    verified = None
    if args.method == "cherlb":
        if isinstance(spec, GeneralizedChiSquareSpec):
            report = solve_general(spec, eps, cfg)
        elif spec.M2 == 0:
            report = solve_central(spec.K, spec.var, eps, cfg)
        else:
            report = solve_noncentral(spec, eps, cfg)
        value, valid, label = report.bound, True, report.method
        if args.verify:
            if isinstance(spec, GeneralizedChiSquareSpec) and not spec.is_equal_variance():
                progress("verify: exact CDF is only available for equal component variances; skipped")
            else:
                verified = verify(report, spec).verified_cdf
        extra = f"nu*={report.nu_star:.6g} s(nu*,b)={report.objective_at_bound:.6g} iterations={report.iterations}"
        if report.resolution_limited:
            extra += " (below bisection resolution; found by geometric descent)"
    else:
        value, valid, _ = _threshold(args.method, spec, eps, cfg)
        label, extra = args.method, ("" if valid else "INVALID: Gaussian quantile of the transform is negative")
        if args.verify and value > 0:
            verified = noncentral_cdf(spec, value)

    print(f"method={label} epsilon={eps:g} bound={value:.12g}")
    if extra:
        print(extra)
    if verified is not None:
        status = "ok" if verified <= eps else "EXCEEDS epsilon"
        print(f"verified CDF at bound = {verified:.6g} ({status})")
    columns = ("method", "epsilon", "value", "valid", "verified_cdf")
    row = (label, eps, float(value), bool(valid), float("nan") if verified is None else float(verified))
    if args.output:
        manifest = RunManifest("bound", _params(args), 0, __version__)
        write_csv(args.output, columns, [row], manifest.finish())
    else:
        sys.stdout.write(render(columns, [row]))
    return 0


# -- sweep ----------------------------------------------------------------------

def _grid(args):
    if args.values:
        grid = list(args.values)
    else:
        if args.start is None or args.stop is None or args.step is None:
            raise DomainError("give --values or all of --start/--stop/--step")
        n = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
        grid = [args.start + i * args.step for i in range(max(n, 0))]
    if not grid:
        raise DomainError("empty sweep range")
    return grid


def _sweep_point(args, x):
    K, var, eps = args.dof, args.variance, args.epsilon
    M2 = args.noncentrality
    if args.var == "m2":
        M2 = x
    elif args.var == "rho":
        M2 = x * var
    elif args.var == "epsilon":
        eps = x
    elif args.var == "dof":
        if x != int(x) or x < 1:
            raise DomainError(f"dof grid values must be positive integers, got {x}")
        K = int(x)
    if args.rho_per_dof is not None:
        M2 = args.rho_per_dof * K * var
    if args.epsilon_per_pair is not None:
        eps = args.epsilon_per_pair ** (K / 2.0)
    return NoncentralChiSquareSpec(K, M2, var), ReliabilityTarget(eps).epsilon


def cmd_sweep(args):
    cfg = _solver_cfg(args)
    grid = _grid(args)
    points = [_sweep_point(args, x) for x in grid]  # validates every point up front
    need_exact = any(m in ("exact", "reg", "reg0") for m in args.methods)
    rows = []
    exact = {}
    if need_exact:
        exact = {i: numeric_quantile(spec, eps) for i, (spec, eps) in enumerate(points)}
    fits = {}
    for tag in ("reg", "reg0"):
        if tag in args.methods:
            if args.var != "m2":
                raise DomainError("regression baselines need an m2 sweep")
            pairs = [(spec.M2, exact[i]) for i, (spec, _) in enumerate(points)]
            fits[tag] = regression_fit(pairs, anchored=(tag == "reg0"))

    for method in args.methods:
        progress(f"sweep: {method}")
        for i, (x, (spec, eps)) in enumerate(zip(grid, points)):
            if method == "exact":
                value, valid = exact[i], True
            elif method in fits:
                value = regression_predict(fits[method], spec.M2)
                valid = value > 0
            else:
                value, valid, _ = _threshold(method, spec, eps, cfg)
            cdf = float("nan")
            if (args.verify or method == "cherlb") and value > 0:
                cdf = noncentral_cdf(spec, value)
            rows.append((args.var, float(x), spec.K, spec.M2, spec.var, eps, method, float(value), bool(valid), cdf, value / spec.mean()))
    manifest = RunManifest("sweep", _params(args), 0, __version__)
    if args.output:
        write_csv(args.output, SWEEP_COLUMNS, rows, manifest.finish())
    else:
        sys.stdout.write(render(SWEEP_COLUMNS, rows, manifest.finish()))
    return 0


# -- experiments ------------------------------------------------------------------

def cmd_mimo(args):
    from . import mimo

    params = mimo.MarkovChannelParams(args.carrier, args.velocity, args.lag)
    eps = ReliabilityTarget(args.epsilon).epsilon
    cfg = _solver_cfg(args)
    configs = [mimo.MimoConfig(M, args.rx, args.trials, args.seed) for M in args.tx]
    if args.stat in ("rho-prob", "power", "reliability") and args.trials < mimo.MIN_TRIALS:
        raise InsufficientSamplesError(f"--stat {args.stat} needs at least {mimo.MIN_TRIALS} trials")
    if args.stat == "reliability" and args.trials * eps < 10:
        raise InsufficientSamplesError("trials * epsilon < 10: outage events would not be observable")

    rows = []
    for mc in configs:
        progress(f"mimo: M={mc.M} N={mc.N} stat={args.stat} trials={mc.trials}")
        if args.stat == "rho-prob":
            stats = [mimo.experiment_rho_probability(mc, params, args.rho_threshold, args.workers)]
        elif args.stat == "bounds":
            stats = mimo.experiment_bounds(mc, params, eps, cfg, args.workers)
        elif args.stat == "power":
            stats = mimo.experiment_power(mc, params, eps, cfg, args.workers)
        elif args.stat == "reliability":
            stats = [mimo.experiment_reliability(mc, params, eps, cfg, args.workers)]
        else:
            H = mimo.sample_channel(mc)
            res = mimo.ks_gain_law(H, params, mc.trials, mc.seed, args.workers)
            stats = [
                mimo.MonteCarloStat("ks_statistic", float(res.statistic), float("nan"), mc.trials),
                mimo.MonteCarloStat("ks_pvalue", float(res.pvalue), float("nan"), mc.trials),
            ]
        for s in stats:
            rows.append((mc.M, mc.N, eps, s.trials, s.name, float(s.value), float(s.stderr)))
    manifest = RunManifest("mimo", _params(args), args.seed, __version__)
    write_csv(args.output, MIMO_COLUMNS, rows, manifest.finish())
    progress(f"mimo: wrote {len(rows)} rows to {args.output}")
    return 0


def cmd_ris(args):
    from . import ris

    cfg = _solver_cfg(args)
    jobs = [
        (ris.RisConfig(nr, k, k, args.trials, args.seed), ReliabilityTarget(e).epsilon)
        for k in args.kappa
        for nr in args.nr
        for e in args.epsilon
    ]
    for rc, eps in jobs:
        if rc.trials * eps < ris.MIN_TAIL_COUNT:
            raise InsufficientSamplesError(
                f"trials * epsilon = {rc.trials * eps:g} below {ris.MIN_TAIL_COUNT} for epsilon={eps:g}"
            )
    rows = []
    for rc, eps in jobs:
        progress(f"ris: N_R={rc.N_R} kappa={rc.kappa_h:g} epsilon={eps:g} trials={rc.trials}")
        r = ris.ris_experiment(rc, eps, cfg, args.workers)
        rows.append((r.N_R, float(rc.kappa_h), r.epsilon, r.bound, r.empirical_threshold, r.ratio,
                     r.achieved_outage, r.normalized_gain, r.trials))
    manifest = RunManifest("ris", _params(args), args.seed, __version__)
    write_csv(args.output, RIS_COLUMNS, rows, manifest.finish())
    progress(f"ris: wrote {len(rows)} rows to {args.output}")
    return 0


def cmd_selftest(args):
    from .selftest import run

    results = run(seed=args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
    failed = sum(not ok for _, ok, _ in results)
    print(f"selftest: {len(results) - failed}/{len(results)} passed")
    return EXIT_SELFTEST if failed else 0


def _params(args):
    skip = {"command", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


COMMANDS = {"bound": cmd_bound, "sweep": cmd_sweep, "mimo": cmd_mimo, "ris": cmd_ris, "selftest": cmd_selftest}


def main(argv=None):
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InsufficientSamplesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except IterationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ITER
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
