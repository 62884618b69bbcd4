"""Command line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 statistical gate
failure (a verify suite failed, or --strict simulation did not converge).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, verify
from .configchain import build_transition_matrix
from .kernel import available_backends
from .limitcoeff import limit_coefficient
from .limitlaw import MixtureLaw
from .model import ModelConfig, Variant
from .montecarlo import (
    ExperimentSpec,
    compare_layers,
    run_checkpoint_experiment,
    run_experiment,
    summarize,
    write_summary_json,
)
from .randomness import RNG_ALGORITHM
from .stationary import moment_table, stationary_linear, stationary_tree_theorem


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _write_or_print(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_simulate(args) -> int:
    model = ModelConfig(
        population_size=args.pop_size,
        parent_count=args.parents,
        variant=Variant(args.variant),
        seed=args.seed,
    )
    spec = ExperimentSpec(
        model=model,
        replicates=args.replicates,
        tracked_count=args.track,
        epsilon=args.eps,
        n_max=args.max_steps,
        check_every=args.check_every,
        checkpoints=tuple(args.checkpoints or ()),
    )
    if args.trajectory is not None and not spec.checkpoints:
        raise ValueError("--trajectory requires --checkpoints")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    backend = None if args.backend == "auto" else args.backend
    samples = run_experiment(spec, jobs=args.jobs, backend=backend)
    summary = summarize(samples)
    report = compare_layers(samples, k_max=2)
    samples.to_csv(out_dir / "samples.csv")
    write_summary_json(
        samples, summary, out_dir / "summary.json", extra={"layers": report.to_json_dict()}
    )
    written = ["samples.csv", "summary.json"]
    if spec.checkpoints:
        checkpoint_set = run_checkpoint_experiment(spec, jobs=args.jobs, backend=backend)
        replicate = args.trajectory if args.trajectory is not None else 0
        if not 0 <= replicate < spec.replicates:
            raise ValueError(f"--trajectory index out of range [0, {spec.replicates})")
        checkpoint_set.trajectory_csv(out_dir / "trajectory.csv", replicate=replicate)
        written.append("trajectory.csv")
    print(
        f"N={model.population_size} m={model.parent_count} variant={model.variant.value} "
        f"replicates={spec.replicates} tracked={spec.tracked_count} backend={samples.backend}"
    )
    print(
        f"converged {int(samples.converged.sum())}/{spec.replicates} "
        f"({100.0 * samples.converged_fraction:.1f}%), mean steps {samples.steps.mean():.1f}"
    )
    for col in range(spec.tracked_count):
        lo, hi = summary.moment_cis[1][col]
        print(
            f"ancestor {col + 1}: mean={summary.moments[1][col]:.4f} "
            f"[{lo:.4f}, {hi:.4f}], second moment={summary.moments[2][col]:.4f}, "
            f"zero fraction={summary.zero_fraction[col]:.4f}, "
            f"ks={summary.ks_to_limit[col]:.4f}"
        )
    for row in report.rows:
        exact = f"{float(row.exact):.6f}" if row.exact is not None else "n/a"
        print(
            f"moment {row.exponents}: mc={row.monte_carlo:.6f} "
            f"ci=[{row.ci[0]:.6f}, {row.ci[1]:.6f}] exact={exact} "
            f"limit={float(row.limit):.6f}"
        )
    print(f"wrote {', '.join(written)} in {out_dir}")
    if args.strict and not bool(samples.converged.all()):
        print("strict mode: not every replicate converged", file=sys.stderr)
        return 2
    return 0


def _cmd_exact(args) -> int:
    chain = build_transition_matrix(args.pop_size, args.parents, args.order)
    if args.tree_theorem:
        nu = stationary_tree_theorem(chain)
    else:
        nu = stationary_linear(chain)
    labels = [state.label for state in chain.states]
    if args.rational:
        matrix = [[_frac_str(p) for p in row] for row in chain.matrix]
    else:
        matrix = [[float(p) for p in row] for row in chain.matrix]
    payload = {
        "meta": {
            "version": __version__,
            "rng": RNG_ALGORITHM,
            "method": nu.method,
        },
        "N": args.pop_size,
        "m": args.parents,
        "k": args.order,
        "states": labels,
        "matrix": matrix,
        "nu": {
            state.label: _frac_str(nu[i]) for i, state in enumerate(chain.states)
        },
        "moments": {
            label: _frac_str(value) for label, value in moment_table(chain, nu).items()
        },
        "K": {
            state.label: _frac_str(limit_coefficient(state, args.parents))
            for state in chain.states
        },
    }
    _write_or_print(payload, args.out)
    return 0


def _cmd_limit(args) -> int:
    law = MixtureLaw(args.parents)
    payload = {
        "meta": {"version": __version__, "rng": RNG_ALGORITHM},
        "m": args.parents,
        "atom_mass": _frac_str(law.atom_mass),
        "exponential_mass": _frac_str(law.exponential_mass),
        "rate": _frac_str(law.rate),
        "moments": {str(k): _frac_str(law.moment(k)) for k in range(1, args.moments + 1)},
    }
    if args.cdf:
        payload["cdf"] = {repr(t): float(law.cdf(t)) for t in args.cdf}
    if args.quantile:
        payload["quantile"] = {repr(q): law.quantile(q) for q in args.quantile}
    if args.samples:
        rng = np.random.default_rng(args.seed)
        draws = law.sample(args.samples, rng)
        payload["samples"] = {
            "count": args.samples,
            "seed": args.seed,
            "mean": float(draws.mean()),
            "second_moment": float((draws**2).mean()),
            "zero_fraction": float((draws == 0.0).mean()),
            "ks_distance": law.ks_distance(draws),
        }
    _write_or_print(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    suites = args.suite or ["all"]
    results = verify.run(suites)
    print(verify.format_report(results))
    if args.out:
        payload = {
            "meta": {"version": __version__, "rng": RNG_ALGORITHM},
            "suites": [result.to_json_dict() for result in results],
            "passed": all(result.passed for result in results),
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0 if all(result.passed for result in results) else 2


def build_parser() -> _Parser:
    parser = _Parser(prog="moranweights", description=__doc__)
    parser.add_argument("--version", action="version", version=f"moranweights {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser(
        "simulate", help="run independent replicates to convergence and summarize"
    )
    simulate.add_argument("--pop-size", type=int, required=True, help="population size N")
    simulate.add_argument("--parents", type=int, default=2, help="parents per birth (default 2)")
    simulate.add_argument(
        "--variant",
        choices=[v.value for v in Variant],
        default=Variant.DISTINCT.value,
        help="how the individuals of a step are drawn",
    )
    simulate.add_argument("--replicates", type=int, default=1000)
    simulate.add_argument(
        "--track", type=int, default=1, help="number of ancestors whose weights are tracked"
    )
    simulate.add_argument("--eps", type=float, default=1e-9, help="convergence threshold")
    simulate.add_argument(
        "--max-steps", type=int, default=None, help="event cap per replicate (default 100 N^2)"
    )
    simulate.add_argument("--seed", type=int, default=0, help="master seed")
    simulate.add_argument(
        "--check-every", type=int, default=None, help="events between convergence scans"
    )
    simulate.add_argument("--jobs", type=int, default=1, help="worker processes")
    simulate.add_argument(
        "--backend", choices=["auto", *available_backends()], default="auto"
    )
    simulate.add_argument(
        "--checkpoints",
        type=int,
        nargs="+",
        default=None,
        help="also record marginals at these event counts",
    )
    simulate.add_argument(
        "--trajectory",
        type=int,
        default=None,
        metavar="REPLICATE",
        help="write trajectory.csv for this replicate (needs --checkpoints)",
    )
    simulate.add_argument(
        "--strict", action="store_true", help="exit 2 unless every replicate converged"
    )
    simulate.add_argument(
        "--out-dir",
        default=os.environ.get("MORANWEIGHTS_OUT", "."),
        help="output directory (default $MORANWEIGHTS_OUT or .)",
    )
    simulate.set_defaults(func=_cmd_simulate)

    exact = sub.add_parser(
        "exact", help="build the lumped chain and solve for its stationary law"
    )
    exact.add_argument("--pop-size", type=int, required=True, help="population size N")
    exact.add_argument("--order", type=int, required=True, help="number of particles k")
    exact.add_argument("--parents", type=int, default=2)
    exact.add_argument(
        "--rational", action="store_true", help="emit matrix entries as exact fractions"
    )
    exact.add_argument(
        "--tree-theorem",
        action="store_true",
        help="solve with spanning-tree minors instead of elimination",
    )
    exact.add_argument("--out", default=None, help="write JSON here instead of stdout")
    exact.set_defaults(func=_cmd_exact)

    limit = sub.add_parser("limit", help="evaluate the limiting mixture law")
    limit.add_argument("--parents", type=int, default=2)
    limit.add_argument("--moments", type=int, default=4, help="report moments up to this order")
    limit.add_argument("--cdf", type=float, nargs="+", default=None)
    limit.add_argument("--quantile", type=float, nargs="+", default=None)
    limit.add_argument("--samples", type=int, default=None, help="draw and summarize samples")
    limit.add_argument("--seed", type=int, default=0)
    limit.add_argument("--out", default=None, help="write JSON here instead of stdout")
    limit.set_defaults(func=_cmd_limit)

    check = sub.add_parser("verify", help="run deterministic consistency suites")
    check.add_argument(
        "--suite",
        action="append",
        choices=["all"] + list(verify.SUITES),
        help="suite to run (repeatable, default all)",
    )
    check.add_argument("--out", default=None, help="also write a JSON report here")
    check.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ImportError) as exc:
        print(f"moranweights: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
