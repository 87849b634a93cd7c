"""Command-line front end.

    switchheat closed-form dn-slope --r0 2
    switchheat sample stationary --example dn --N 100 --output out.csv
    switchheat verify marginals --k 1,2,3 --config run.json

Exit codes: 0 success, 1 I/O, 2 usage or parameters, 3 numerical
non-convergence, 4 statistical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import closed_forms as cf
from .config import RunConfig
from .engine import FlowPair, exponential_flow, process_at, stationary_batch, pullback_batch
from .spectral import SpectralField, evaluate, interior_grid, make_flow_pair
from .switching import ConfigurationError, EnvironmentBatch, NumericalError, environment_stream_id, sample_environment

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC, EXIT_STAT = 0, 1, 2, 3, 4
CLOSED_FORMS = ("dn-slope", "dd-mean", "dd-variance", "beta-marginal", "joint-moment", "flux")
SUITES = ("all", "slope", "marginals", "variance", "joint", "age", "invariance", "pde", "sandwich", "oracles")
SMOKE_N = 1000


class UsageError(Exception):
    pass


# --- helpers ----------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("modes must be positive")
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = RunConfig.from_json(Path(args.config).read_text())
    overrides = {k: getattr(args, f"cfg_{k}") for k in RunConfig.keys()}
    if getattr(args, "samples", None) is not None:
        overrides["N"] = args.samples
    return cfg.override(**overrides)


class _Output:
    """stdout for ``-``, otherwise a file written atomically at the end."""

    def __init__(self, path: str, suffix: str | None = None):
        self.path = path
        if suffix and path != "-":
            self.path = str(Path(path).with_suffix(suffix))
        self.buf = io.StringIO()

    def write(self, text: str) -> None:
        self.buf.write(text)

    def close(self) -> None:
        if self.path == "-":
            sys.stdout.write(self.buf.getvalue())
            sys.stdout.flush()
        else:
            Path(self.path).write_text(self.buf.getvalue())


def _ode1d_pair(cfg: RunConfig) -> FlowPair:
    p = cfg.params
    beta = float(cf.dd_eigenvalue(p, 1))
    c1 = float(cf.dd_ramp_coeff(p, 1))
    return FlowPair(exponential_flow(beta, c1), exponential_flow(beta, 0.0), norm=np.abs, origin=0.0)


def _pair(cfg: RunConfig) -> FlowPair:
    if cfg.example == "ode1d":
        return _ode1d_pair(cfg)
    return make_flow_pair(cfg.example.upper(), cfg.params, cfg.K)


def _fmt(v) -> str:
    return repr(float(v))


# --- closed-form ------------------------------------------------------------------------


def cmd_closed_form(cfg: RunConfig, args) -> int:
    p = cfg.params
    name = args.name
    if name == "dn-slope":
        value = cf.dn_slope(p)
    elif name == "flux":
        value = cf.insect_flux(p)
    elif name == "dd-mean":
        value = cf.dd_mean(p, p.L if args.x is None else args.x)
    elif name == "dd-variance":
        value = cf.dd_l2_variance(p)
    elif name == "beta-marginal":
        a, b, c = cf.beta_marginal(p, args.k or 1, args.which)
        value = {"alpha": a, "beta": b, "scale": c}
    elif name == "joint-moment":
        value = cf.dd_joint_second_moment(p, args.n, args.m)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(name)
    print(json.dumps({"name": name, "params": p.to_dict(), "value": value}))
    return EXIT_OK


# --- sample -------------------------------------------------------------------------------


def _values_on_grid(cfg: RunConfig, states, x) -> np.ndarray:
    if cfg.example == "ode1d":
        return np.asarray(states, dtype=float).reshape(-1, 1)
    return evaluate(states, x)


def cmd_sample(cfg: RunConfig, args, threads: int = 1) -> int:
    pair = _pair(cfg)
    x = interior_grid(cfg.L, cfg.G)
    cols = ["u"] if cfg.example == "ode1d" else [f"x={_fmt(v)}" for v in x]
    csv = _Output(cfg.output)
    dump = _Output(cfg.output, ".jsonl") if cfg.output != "-" and cfg.example != "ode1d" else None

    if args.kind == "path":
        env = sample_environment(cfg.params.laws(), cfg.seed, 0)
        csv.write(",".join(["t"] + cols) + "\n")
        for t in args.times:
            u = process_at(pair, env, pair.origin, t)
            row = _values_on_grid(cfg, u, x).reshape(-1)
            csv.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")
            if dump:
                dump.write(json.dumps({"t": t, **u.to_dict()}) + "\n")
    else:
        idx = np.arange(cfg.N, dtype=np.uint64)
        if args.kind == "stationary":
            states = stationary_batch(pair, cfg.params.laws(), cfg.seed, idx, tol=cfg.tol).values
        else:
            batch = EnvironmentBatch(cfg.params.laws(), cfg.seed, environment_stream_id(idx))
            states = pullback_batch(pair, batch, pair.origin, cfg.tol, target=args.target).values
        vals = _values_on_grid(cfg, states, x)
        csv.write(",".join(["sample"] + cols) + "\n")
        for i, row in enumerate(vals):
            csv.write(",".join([str(i)] + [_fmt(v) for v in row]) + "\n")
            if dump:
                dump.write(json.dumps({"sample": i, **states[i].to_dict()}) + "\n")
    csv.close()
    if dump:
        dump.close()
    return EXIT_OK


# --- verify -------------------------------------------------------------------------------


def _record(report, suite: str) -> dict:
    from .verify.stats import KSReport, StatReport

    if isinstance(report, StatReport):
        return {"suite": suite, "test": report.test, "estimate": report.estimate, "target": report.target,
                "stderr": report.stderr, "n": report.n, "z": report.z, "pass": report.passed, **report.extra}
    if isinstance(report, KSReport):
        return {"suite": suite, "test": report.test, "ks": report.statistic, "critical": report.critical,
                "n": report.n, "alpha": report.alpha, "pass": report.passed, **report.extra}
    return {"suite": suite, **report}


def run_suite(name: str, cfg: RunConfig, ks, threads: int = 1) -> list[dict]:
    from .verify import suites as vs

    p, n, seed, K = cfg.params, cfg.N, cfg.seed, cfg.K
    out: list[dict] = []
    if name == "slope":
        res = vs.estimate_mean_field("DN", p, max(n, 100), cfg.G, K, seed, cfg.tol, threads)
        out.append(_record(res.slope, "slope"))
        series = cf.dn_slope_series(p, 100_000)
        closed = cf.dn_slope(p)
        rel = abs(series.value - closed) / closed
        out.append({"suite": "slope", "test": "series vs closed form", "estimate": series.value, "target": closed,
                    "relative_error": rel, "pass": rel <= 1e-4})
    elif name == "marginals":
        for k in ks:
            for which in ("Y0", "Y1"):
                out.append(_record(vs.ks_beta_marginal(p, k, which, n, 0.01, K, seed), "marginals"))
    elif name == "variance":
        out.append(_record(vs.estimate_l2_variance(p, n, K, seed, cfg.tol, threads), "variance"))
    elif name == "joint":
        for a, b in ((1, 2), (1, 3), (2, 3)):
            out.append(_record(vs.estimate_joint_moment(p, a, b, n, K, seed), "joint"))
        for k in ks:
            gap = abs(cf.dd_joint_second_moment(p, k, k) - float(cf.dd_ramp_coeff(p, k)) ** 2 * cf.beta_second_moment(p, k, "Y0"))
            out.append({"suite": "joint", "test": f"diagonal k={k} vs Beta moment", "estimate": gap, "target": 0.0, "pass": gap <= 1e-12})
    elif name == "age":
        t_large = 50 * max(1 / p.r0, 1 / p.r1)
        out.extend(_record(r, "age") for r in vs.age_distribution_test(p.laws(), t_large, n, 0.01, seed))
    elif name == "invariance":
        example = "DN" if cfg.example == "dn" else "DD"
        for k in ks:
            out.append(_record(vs.invariance_two_sample(p, k, n, 0.01, example, K, seed), "invariance"))
    elif name == "pde":
        out.append(_record(vs.weak_mean_pde_residual("DD", p, 0.5, 1e-3, n, K=K, seed=seed, threads=threads), "pde"))
        out.append(_record(vs.stationary_generator_test("DD", p, n, K=K, seed=seed, threads=threads), "pde"))
    elif name == "sandwich":
        r = vs.sandwich_pathwise_check(p, n, K=K, seed=seed, grid=cfg.G)
        out.append({"suite": "sandwich", "test": "sandwich region", "estimate": r.sandwich_fraction, "target": 1.0,
                    "pass": r.sandwich_fraction == 1.0})
        out.append({"suite": "sandwich", "test": "sup-norm ball", "estimate": r.sup_fraction, "target": 1.0,
                    "eps": r.eps, "worst": r.worst_sup, "pass": r.sup_fraction == 1.0})
        reg = vs.holding_time_regression(p.__class__(p.r0, p.r1, 5e-3, p.L, p.b), min(n, 1000), K=K, seed=seed)
        out.append({"suite": "sandwich", "test": "first-holding-time regression (D=5e-3)", "estimate": reg.slope,
                    "target": 1.0, "dropped": reg.dropped, "pass": reg.passed})
    elif name == "oracles":
        r = vs.oracle_triangle(p, seed)
        out.append({"suite": "oracles", "test": "rk4 vs spectral", "estimate": r.rk4_gap, "target": 0.0, "pass": r.rk4_gap <= 1e-8})
        out.append({"suite": "oracles", "test": "fd vs spectral (DN, t=1)", "estimate": r.fd_gap, "target": 0.0,
                    "budget": r.fd_budget, "pass": r.fd_gap <= r.fd_budget})
        out.append({"suite": "oracles", "test": "fd observed order", "estimate": r.order, "target": 2.0,
                    "pass": 1.7 <= r.order <= 2.3})
        c = vs.contraction_test(p, seed=seed, tol=cfg.tol, K=K)
        out.append({"suite": "oracles", "test": "contraction ratio", "estimate": c.ratio, "target": c.target,
                    "stderr": c.stderr, "pass": c.passed})
    else:
        raise UsageError(f"unknown suite {name!r}")
    return out


def cmd_verify(cfg: RunConfig, args, threads: int = 1) -> int:
    names = SUITES[1:] if args.suite == "all" else (args.suite,)
    smoke = cfg.N < SMOKE_N
    out = _Output(cfg.output)
    failed = []
    records = []
    for name in names:
        for rec in run_suite(name, cfg, args.k, threads):
            if smoke:
                rec["smoke"] = True
            records.append(rec)
            if not rec["pass"]:
                failed.append(rec)
    # failing reports go last so the tail of the log shows them
    records = [r for r in records if r["pass"]] + [r for r in records if not r["pass"]]
    for rec in records:
        out.write(json.dumps(rec, default=_json_default) + "\n")
    out.close()
    if failed and not smoke:
        return EXIT_STAT
    return EXIT_OK


def _json_default(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    raise TypeError(type(v))


# --- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    for key in RunConfig.keys():
        common.add_argument(f"--{key}", dest=f"cfg_{key}", default=None, metavar=key.upper())

    parser = argparse.ArgumentParser(prog="switchheat", description="Heat equation with a randomly switching boundary.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("closed-form", parents=[common], help="evaluate a closed-form statistic")
    p.add_argument("name", choices=CLOSED_FORMS)
    p.add_argument("--x", type=float, help="position for dd-mean (default L)")
    p.add_argument("--k", type=int, default=1, help="mode for beta-marginal")
    p.add_argument("--which", choices=("Y0", "Y1"), default="Y0")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=2)

    p = sub.add_parser("sample", parents=[common], help="draw paths, pullbacks or stationary fields")
    p.add_argument("kind", choices=("path", "pullback", "stationary"))
    p.add_argument("--times", type=_float_list, default=[0.0, 0.5, 1.0], help="comma-separated times for kind=path")
    p.add_argument("--target", choices=("Y0", "Y1"), default="Y1", help="pullback limit for kind=pullback")
    p.add_argument("--samples", type=int, help="alias for --N")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--k", type=_int_list, default=[1, 2], help="comma-separated modes")
    p.add_argument("--samples", type=int, help="alias for --N")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        if args.threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        if args.command == "closed-form":
            return cmd_closed_form(cfg, args)
        if args.command == "sample":
            return cmd_sample(cfg, args, args.threads)
        return cmd_verify(cfg, args, args.threads)
    except (ConfigurationError, UsageError, ValueError) as exc:
        print(f"switchheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"switchheat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"switchheat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
