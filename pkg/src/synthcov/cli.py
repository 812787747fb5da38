"""Command-line front end.

Subcommands: synthesize, nulldist, test, ci, coverage, export-dist.
Exit codes: 0 success, 2 usage/validation error, 3 numeric failure
(singular input), 4 I/O error. Decisions are data, not failures: a
rejected hypothesis still exits 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .dataio import (
    dumps_json,
    fmt17,
    atomic_write_text,
    read_data_csv,
    read_dist_cache,
    write_data_csv,
    write_dist_cache,
)
from .errors import (
    BadBlockSize,
    BadDof,
    BadProbability,
    DimensionMismatch,
    MetadataMismatch,
    NotPositiveDefinite,
    ParseError,
    SingularSample,
    TooFewRows,
)
from .experiments import (
    MU,
    ScenarioConfig,
    builtin_scenarios,
    builtin_sigmas,
    export_distributions,
    run_coverage_suite,
)
from .inference import (
    gv_confidence_interval,
    gv_test,
    independence_test,
    regression_test,
    sphericity_test,
)
from .linalg import SpdMatrix
from .nulldist import simulate_null, quantile
from .randgen import RngState
from .synthesis import fit, sim_multiple
from .teststats import CoefficientMatrix, summarize

QUANTILE_GRID = (0.0, 0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99, 1.0)

_STAT_NAMES = {
    "gv": "gv_statistic",
    "sph": "sphericity_statistic",
    "ind": "independence_statistic",
    "cano": "regression_statistic",
}


class _UsageError(Exception):
    """Invalid flag combination detected after argparse."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthcov",
        description="Plug-in sampling synthetic data and exact covariance-structure tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_syn = sub.add_parser("synthesize", help="generate synthetic replicates of a CSV dataset")
    p_syn.add_argument("--input", required=True, help="original data CSV (header row, n x p)")
    p_syn.add_argument("--n-imp", type=int, default=None, help="synthetic rows (default: n)")
    p_syn.add_argument("--m", type=int, default=1, help="number of replicates (default 1)")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--output", required=True, help="output CSV (suffix _k added when m > 1)")
    p_syn.set_defaults(func=_cmd_synthesize)

    p_null = sub.add_parser("nulldist", help="simulate a null distribution and cache it")
    p_null.add_argument("--test", required=True, choices=("gv", "sph", "ind", "cano"))
    p_null.add_argument("--n", type=int, required=True, help="sample size")
    p_null.add_argument("--p", type=int, required=True, help="number of variables")
    p_null.add_argument("--part", type=int, default=None, help="leading block size (ind/cano)")
    p_null.add_argument("--iterations", type=int, default=10000)
    p_null.add_argument("--seed", type=int, default=0)
    p_null.add_argument("--cache", required=True, help="cache file to write (JSON)")
    p_null.set_defaults(func=_cmd_nulldist)

    p_test = sub.add_parser("test", help="run a covariance-structure test on synthetic data")
    p_test.add_argument("--test", required=True, choices=("gv", "sph", "ind", "cano"))
    p_test.add_argument("--input", required=True, help="synthetic data CSV")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--sigma0", default=None, help="hypothesized covariance CSV (gv)")
    p_test.add_argument("--delta0", default=None, help="hypothesized coefficient CSV (cano)")
    p_test.add_argument("--part", type=int, default=None, help="leading block size (ind/cano)")
    p_test.add_argument("--cache", default=None, help="null-distribution cache to use/create")
    p_test.add_argument("--iterations", type=int, default=10000)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.set_defaults(func=_cmd_test)

    p_ci = sub.add_parser("ci", help="confidence interval for the generalized variance")
    p_ci.add_argument("--input", required=True, help="synthetic data CSV")
    p_ci.add_argument("--alpha", type=float, default=0.05)
    p_ci.add_argument("--cache", default=None)
    p_ci.add_argument("--iterations", type=int, default=10000)
    p_ci.add_argument("--seed", type=int, default=0)
    p_ci.set_defaults(func=_cmd_ci)

    p_cov = sub.add_parser("coverage", help="run a coverage study and write a report")
    group = p_cov.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", action="store_true", help="use the 32 built-in scenarios")
    group.add_argument("--config", default=None, help="JSON scenario config file")
    p_cov.add_argument("--reps", type=int, default=10000)
    p_cov.add_argument("--iterations", type=int, default=10000)
    p_cov.add_argument("--alpha", type=float, default=0.05)
    p_cov.add_argument("--seed", type=int, default=0)
    p_cov.add_argument("--workers", type=int, default=1)
    p_cov.add_argument("--out", required=True, help="report file to write")
    p_cov.add_argument("--format", choices=("csv", "json"), default="csv")
    p_cov.set_defaults(func=_cmd_coverage)

    p_exp = sub.add_parser(
        "export-dist", help="export observed vs null statistic samples for plotting"
    )
    p_exp.add_argument("--test", required=True, choices=("gv", "sph", "ind", "cano"))
    p_exp.add_argument(
        "--sigma", required=True, help="builtin label (sigma1..sigma4) or covariance CSV path"
    )
    p_exp.add_argument("--n", type=int, required=True)
    p_exp.add_argument("--part", type=int, default=None)
    p_exp.add_argument("--reps", type=int, default=10000)
    p_exp.add_argument("--iterations", type=int, default=10000)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=_cmd_export_dist)

    return parser


def _check_part_flag(test: str, part) -> None:
    if test in ("ind", "cano") and part is None:
        raise _UsageError(f"--part is required for --test {test}")
    if test in ("gv", "sph") and part is not None:
        raise _UsageError(f"--part is not valid for --test {test}")


def _cmd_synthesize(args) -> int:
    if args.m < 1:
        raise _UsageError(f"--m must be >= 1, got {args.m}")
    if args.n_imp is not None and args.n_imp < 1:
        raise _UsageError(f"--n-imp must be >= 1, got {args.n_imp}")
    header, x = read_data_csv(args.input)
    model = fit(x)
    datasets = sim_multiple(model, RngState(args.seed), args.m, args.n_imp)
    if args.m == 1:
        paths = [args.output]
    else:
        base, ext = os.path.splitext(args.output)
        paths = [f"{base}_{k}{ext}" for k in range(1, args.m + 1)]
    for path, data in zip(paths, datasets):
        write_data_csv(path, header, data)
        print(f"wrote {path}")
    return 0


def _cmd_nulldist(args) -> int:
    _check_part_flag(args.test, args.part)
    dist = simulate_null(
        args.test, args.n, args.p, args.part, args.iterations, RngState(args.seed)
    )
    write_dist_cache(args.cache, dist)
    print("gamma,quantile")
    for gamma in QUANTILE_GRID:
        print(f"{gamma:g},{fmt17(quantile(dist, gamma))}")
    return 0


def _read_matrix(path: str) -> np.ndarray:
    _, a = read_data_csv(path)
    return a


def _get_distribution(args, kind: str, n: int, p: int, part):
    if args.cache and os.path.exists(args.cache):
        expect = {"kind": kind, "nsample": n, "pvariates": p, "part": part}
        return read_dist_cache(args.cache, expect=expect)
    dist = simulate_null(kind, n, p, part, args.iterations, RngState(args.seed))
    if args.cache:
        write_dist_cache(args.cache, dist)
    return dist


def _cmd_test(args) -> int:
    _check_part_flag(args.test, args.part)
    if args.test == "gv" and args.sigma0 is None:
        raise _UsageError("--sigma0 is required for --test gv")
    if args.test == "cano" and args.delta0 is None:
        raise _UsageError("--delta0 is required for --test cano")
    _, v = read_data_csv(args.input)
    s = summarize(v)
    dist = _get_distribution(args, args.test, s.n, s.p, args.part)
    if args.test == "gv":
        outcome = gv_test(s, SpdMatrix(_read_matrix(args.sigma0)), args.alpha, dist)
    elif args.test == "sph":
        outcome = sphericity_test(s, args.alpha, dist)
    elif args.test == "ind":
        outcome = independence_test(s, args.part, args.alpha, dist)
    else:
        delta0 = CoefficientMatrix(_read_matrix(args.delta0))
        outcome = regression_test(s, args.part, delta0, args.alpha, dist)
    print(
        dumps_json(
            {
                "kind": outcome.kind,
                "observed": outcome.observed,
                "alpha": outcome.alpha,
                "thresholds": list(outcome.thresholds),
                "reject": outcome.reject,
                "p_value": outcome.p_value,
                "dist_meta": outcome.dist_meta,
            }
        )
    )
    return 0


def _cmd_ci(args) -> int:
    _, v = read_data_csv(args.input)
    s = summarize(v)
    dist = _get_distribution(args, "gv", s.n, s.p, None)
    interval = gv_confidence_interval(s, args.alpha, dist)
    print(
        dumps_json(
            {
                "lower": interval.lower,
                "upper": interval.upper,
                "alpha": interval.alpha,
                "target": interval.target,
            }
        )
    )
    return 0


def _scenario_from_config(entry: dict, args) -> ScenarioConfig:
    if not isinstance(entry, dict):
        raise ParseError("each scenario must be a JSON object")
    if "test" not in entry or "n" not in entry or "sigma" not in entry:
        raise ParseError("scenario needs at least 'test', 'n' and 'sigma'")
    sigma_spec = entry["sigma"]
    sigmas = builtin_sigmas()
    if isinstance(sigma_spec, str):
        if sigma_spec not in sigmas:
            raise ParseError(f"unknown builtin sigma {sigma_spec!r}")
        sigma = sigmas[sigma_spec]
        label = entry.get("label", sigma_spec)
        mu = np.asarray(entry.get("mu", MU), dtype=float)
    else:
        sigma = SpdMatrix(np.asarray(sigma_spec, dtype=float))
        label = entry.get("label", "custom")
        mu = np.asarray(entry.get("mu", np.zeros(sigma.dim)), dtype=float)
    return ScenarioConfig(
        test=entry["test"],
        sigma=sigma,
        sigma_label=label,
        n=int(entry["n"]),
        mu=mu,
        part=entry.get("part"),
        alpha=float(entry.get("alpha", args.alpha)),
        reps=int(entry.get("reps", args.reps)),
        mc_iterations=int(entry.get("mc_iterations", args.iterations)),
        seed=int(entry.get("seed", args.seed)),
    )


def _load_scenarios(args) -> list[ScenarioConfig]:
    if args.builtin:
        return builtin_scenarios(args.reps, args.iterations, args.alpha, args.seed)
    with open(args.config) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: invalid JSON: {exc}") from None
    entries = doc.get("scenarios") if isinstance(doc, dict) and "scenarios" in doc else [doc]
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{args.config}: expected a scenario object or a 'scenarios' list")
    return [_scenario_from_config(entry, args) for entry in entries]


def _cmd_coverage(args) -> int:
    if args.workers < 1:
        raise _UsageError(f"--workers must be >= 1, got {args.workers}")
    scenarios = _load_scenarios(args)
    results = run_coverage_suite(scenarios, workers=args.workers)
    if args.format == "csv":
        lines = ["test,sigma,p1,n,cov,stderr"]
        for r in results:
            p1 = "" if r.part is None else str(r.part)
            lines.append(
                f"{r.test},{r.sigma_label},{p1},{r.n},{fmt17(r.coverage)},{fmt17(r.std_error)}"
            )
        text = "\n".join(lines) + "\n"
    else:
        rows = [
            {
                "test": r.test,
                "sigma": r.sigma_label,
                "p1": r.part,
                "n": r.n,
                "cov": r.coverage,
                "stderr": r.std_error,
            }
            for r in results
        ]
        text = dumps_json({"scenarios": rows}) + "\n"
    atomic_write_text(args.out, text)
    print(f"wrote {args.out}")
    return 0


def _cmd_export_dist(args) -> int:
    _check_part_flag(args.test, args.part)
    sigmas = builtin_sigmas()
    if args.sigma in sigmas:
        sigma, label, mu = sigmas[args.sigma], args.sigma, MU
    else:
        sigma = SpdMatrix(_read_matrix(args.sigma))
        label, mu = "custom", np.zeros(sigma.dim)
    cfg = ScenarioConfig(
        test=args.test,
        sigma=sigma,
        sigma_label=label,
        n=args.n,
        mu=mu,
        part=args.part,
        reps=args.reps,
        mc_iterations=args.iterations,
        seed=args.seed,
    )
    observed, null_values = export_distributions(cfg)
    slug = f"{_STAT_NAMES[args.test]}.{label}.n{args.n}"
    if args.part is not None:
        slug += f".p1_{args.part}"
    lines = [f"sample_kind,{slug}"]
    lines.extend(f"observed,{fmt17(v)}" for v in observed)
    lines.extend(f"null,{fmt17(v)}" for v in null_values)
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        _UsageError,
        ParseError,
        MetadataMismatch,
        BadDof,
        BadBlockSize,
        BadProbability,
        TooFewRows,
        DimensionMismatch,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotPositiveDefinite, SingularSample) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
