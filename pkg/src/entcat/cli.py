"""Command-line front end.

Exit codes: ``decide`` and ``lemma1`` return 0 for Possible, 1 for Impossible and
2 for Unknown; other commands return 0 on success and 1 when a check fails.
Malformed input and invalid hypotheses exit with 64 or above.
"""

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import presets
from .catalysis import (CatalystSearchConfig, catalysis_free_radius, catalyst_search,
                        close_mixed_catalysis_pair, elocc_with_catalyst)
from .config import DEFAULT
from .errors import DimensionError, EntcatError, StateError
from .io import StateFormatError, dumps_spectrum, loads_spectrum, loads_state, read_state, \
    write_state
from .majorize import epsilon_order_radius, is_majorized
from .mixedcat import (build_class, elocc_protocol_execute, epsilon_family_spec,
                       epsilon_threshold, f_elocc_lower_bound, f_locc_upper_bound, lemma1_check,
                       separation_threshold)
from .purify import KentClassState, isotropic_noise, lambda0_bisect, random_separable_attack
from .qcore import PureState, schmidt_spectrum
from .transform import Decision, locc_pure

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_HYPOTHESIS = 64, 66

DECISION_EXIT = {Decision.POSSIBLE: 0, Decision.IMPOSSIBLE: 1, Decision.UNKNOWN: 2}

# the worked rank-two example: source, target, product component, catalyst
PAPER_SEC3 = "paper-sec3"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage, which would read as Unknown."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Decision):
        return obj.value
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(obj) -> None:
    print(json.dumps(obj, default=_default))


def load_state_arg(text: str) -> PureState:
    """A preset name, a path to a JSON state file, or inline state JSON."""
    try:
        return presets.lookup(text)
    except KeyError:
        pass
    except ValueError as exc:
        raise StateFormatError(str(exc)) from None
    if text.lstrip().startswith("{"):
        state = loads_state(text)
    elif os.path.exists(text):
        state = read_state(text)
    else:
        raise StateFormatError(f"{text!r} is neither a preset, a file, nor inline JSON")
    if not isinstance(state, PureState):
        raise StateFormatError("expected a pure state")
    return state


def load_spectrum_or_state(text: str) -> np.ndarray:
    if text.lstrip().startswith("["):
        return loads_spectrum(text)
    return schmidt_spectrum(load_state_arg(text))


def _worked_spec(lam: float):
    return build_class(lam, presets.source_state(), presets.target_state(),
                       presets.product_state())


def _spec_from_args(args):
    if args.preset == PAPER_SEC3:
        return _worked_spec(args.lam)
    if not (args.psi and args.phi and args.eta):
        raise UsageError("give --preset paper-sec3 or all of --psi, --phi, --eta")
    return build_class(args.lam, load_state_arg(args.psi), load_state_arg(args.phi),
                       load_state_arg(args.eta))


def _tol(args) -> float:
    return DEFAULT.majorization if args.tol is None else args.tol


def cmd_schmidt(args) -> int:
    spectrum = schmidt_spectrum(load_state_arg(args.state))
    if args.json:
        _emit({"command": "schmidt", "input": args.state, "spectrum": spectrum})
    else:
        print(dumps_spectrum(spectrum))
    return EXIT_OK


def cmd_majorize(args) -> int:
    result = is_majorized(load_spectrum_or_state(args.alpha),
                          load_spectrum_or_state(args.beta), _tol(args))
    if args.json:
        _emit({"command": "majorize", "tol": _tol(args), **result.as_dict()})
    elif result:
        print("alpha is majorized by beta")
    else:
        print(f"not majorized: k={result.k} prefix {result.alpha_sum!r} > {result.beta_sum!r}")
    return EXIT_OK if result else EXIT_FAIL


def cmd_decide(args) -> int:
    alpha, beta = load_spectrum_or_state(args.source), load_spectrum_or_state(args.target)
    tol = _tol(args)
    if args.catalyst is not None:
        verdict = elocc_with_catalyst(alpha, beta, load_spectrum_or_state(args.catalyst), tol)
    elif args.search_dim is not None:
        cfg = CatalystSearchConfig(max_dim=args.search_dim, grid_steps=args.grid or 40,
                                   seed=args.seed)
        verdict = catalyst_search(alpha, beta, cfg, tol)
    else:
        verdict = locc_pure(alpha, beta, tol)
    if args.json:
        _emit({"command": "decide", "source": args.source, "target": args.target, **verdict.as_dict()})
    else:
        print(verdict.decision.value)
        cert = verdict.certificate
        if "catalyst" in cert and verdict.possible:
            print("catalyst " + dumps_spectrum(cert["catalyst"]))
        if cert.get("violating_k") is not None:
            print(f"violating k={cert['violating_k']}: "
                  f"{cert['alpha_sum']!r} > {cert['beta_sum']!r}")
        if "budget" in cert:
            print("search budget exhausted: " + json.dumps(cert["budget"]))
    return DECISION_EXIT[verdict.decision]


def cmd_lemma1(args) -> int:
    spec, _, _ = _spec_from_args(args)
    verdict = lemma1_check(spec, DEFAULT.with_overrides(majorization=_tol(args)))
    if args.json:
        _emit({"command": "lemma1", "lambda": args.lam, **verdict.as_dict()})
    else:
        cert = verdict.certificate
        print(f"{verdict.decision.value} under LOCC (tr chi = {cert['chi_trace']:.12g}, "
              f"product vectors in span = {cert['product_vector_count']})")
        if verdict.impossible:
            print(f"violating k={cert['violating_k']}: "
                  f"{cert['alpha_sum']!r} > {cert['beta_sum']!r}")
    return DECISION_EXIT[verdict.decision]


def cmd_protocol(args) -> int:
    spec, _, _ = _spec_from_args(args)
    catalyst = load_spectrum_or_state(args.catalyst)
    _, transcript = elocc_protocol_execute(spec, catalyst)
    ok = transcript["trace_distance_to_rho"] <= 1e-10
    if args.json:
        _emit({"command": "protocol", "lambda": args.lam, "pass": ok, **transcript})
    else:
        p1, p2 = transcript["branch_probabilities"]
        print(f"branch probabilities {p1:.12g} {p2:.12g}")
        print(f"trace distance to rho {transcript['trace_distance_to_rho']:.3e}")
        print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bounds(args) -> int:
    core, phi = presets.core_state(), presets.target_state()
    eps_tilde = epsilon_threshold(core, phi)
    threshold = separation_threshold(core, phi)
    eps_values = args.eps or [1.0]
    lams = args.lambdas or [round(0.1 * k, 10) for k in range(1, 10)]
    rows = []
    for eps in eps_values:
        for lam in lams:
            lower = f_elocc_lower_bound(lam, eps).value
            upper = f_locc_upper_bound(epsilon_family_spec(lam, eps))
            rows.append({"eps": eps, "lambda": lam, "elocc_lower": lower, "locc_upper": upper,
                         "separated": lower > upper})
    if args.json:
        _emit({"command": "bounds", "eps_tilde": eps_tilde, "separation_threshold": threshold,
               "rows": rows})
    else:
        print(f"eps_tilde {eps_tilde:.12g}  separation threshold {threshold:.12g}")
        print(f"{'eps':>8} {'lambda':>7} {'ELOCC lower':>14} {'LOCC upper':>14}  separated")
        for r in rows:
            print(f"{r['eps']:8.5f} {r['lambda']:7.3f} {r['elocc_lower']:14.10f} "
                  f"{r['locc_upper']:14.10f}  {r['separated']}")
    return EXIT_OK


def cmd_radius(args) -> int:
    alpha = load_spectrum_or_state(args.alpha)
    gamma = load_spectrum_or_state(args.gamma)
    eps = epsilon_order_radius(alpha, gamma)
    delta = catalysis_free_radius(alpha, gamma)
    if args.json:
        _emit({"command": "radius", "eps": None if np.isinf(eps) else eps, "delta": delta})
    else:
        print(f"eps {eps!r}")
        print(f"delta {delta!r}")
    return EXIT_OK


def cmd_close_pair(args) -> int:
    pair = close_mixed_catalysis_pair(args.delta)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        write_state(pair.sigma, os.path.join(args.out_dir, "sigma.json"))
        write_state(pair.rho, os.path.join(args.out_dir, "rho.json"))
    if args.json:
        _emit({"command": "close-pair", "delta": args.delta, "lambda": pair.lam,
               "fidelity": pair.fidelity, "lemma1": pair.lemma1.as_dict(),
               "catalysis": pair.catalysis.as_dict()})
    else:
        print(f"lambda {pair.lam!r}")
        print(f"fidelity {pair.fidelity!r}")
        print(f"LOCC (necessary condition): {pair.lemma1.decision.value}")
        print(f"ELOCC with catalyst: {pair.catalysis.decision.value}")
    return EXIT_OK


def cmd_attack(args) -> int:
    psi = presets.bell_state()
    zeta = isotropic_noise(psi)
    l0 = lambda0_bisect(psi, zeta)
    lam = {"lambda0": l0.value, "mid": (l0.value + 1) / 2}.get(args.lam)
    if lam is None:
        try:
            lam = float(args.lam)
        except ValueError:
            raise UsageError("--lambda must be lambda0, mid, or a number") from None
    state = KentClassState.build(lam, psi, zeta, l0.value)
    omega = presets.bell_state() if args.catalyst == "bell" else None
    report = random_separable_attack(state, omega, args.trials, args.seed,
                                     keep_records=args.records)
    ok = report.excess <= 1e-9
    if args.records:
        for r in report.records:
            _emit({"trial": r["trial"], "branch_count": r["branch_count"], "branch": r["branch"],
                   "prob": r["prob"],
                   "fidelity_out": r["fidelity_out"], "admissible": r["admissible"]})
    summary = {"lambda": lam, "lambda0": l0.value, "catalyst": args.catalyst,
               "trials": report.trials, "seed": args.seed,
               "input_fidelity": report.input_fidelity, "max_fidelity": report.max_fidelity,
               "max_fidelity_including_consumed_catalyst": report.max_fidelity_any,
               "admissible": report.admissible_results,
               "inadmissible": report.inadmissible_results, "pass": ok}
    if args.json or args.records:
        _emit({"summary": summary})
    else:
        for key, value in summary.items():
            print(f"{key:42s} {value}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_paper_repro(args) -> int:
    from .repro import run_all

    def progress(check):
        if not args.json:
            print(f"{'PASS' if check.passed else 'FAIL'}  {check.name:34s} {check.seconds:8.2f} s",
                  flush=True)

    report = run_all(tol=_tol(args), seed=args.seed, trials=args.trials or 10_000,
                     samples=args.samples, progress=progress)
    if args.json:
        _emit(report.as_dict())
    else:
        if args.tol is not None:
            print(f"majorization tolerance overridden: {args.tol!r}")
        failed = [c.name for c in report.checks if not c.passed]
        print("all checks passed" if not failed else "failed: " + ", ".join(failed))
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="majorization tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = _Parser(prog="entcat", description="Entanglement transformation toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("schmidt", parents=[common], help="Schmidt spectrum of a pure state")
    p.add_argument("state", help="preset name, JSON file, or inline JSON")
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("majorize", parents=[common], help="test alpha < beta")
    p.add_argument("alpha")
    p.add_argument("beta")
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("decide", parents=[common], help="LOCC / ELOCC decision")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--catalyst", help="catalyst spectrum or state")
    p.add_argument("--search-dim", type=int, help="search catalysts up to this dimension")
    p.add_argument("--grid", type=int, help="grid steps for the catalyst search")
    p.set_defaults(func=cmd_decide)

    for name, func, text in (("lemma1", cmd_lemma1, "rank-two necessary condition"),
                             ("protocol", cmd_protocol, "run the catalysed protocol")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--preset", choices=[PAPER_SEC3])
        p.add_argument("--psi")
        p.add_argument("--phi")
        p.add_argument("--eta")
        p.add_argument("--lambda", dest="lam", type=float, default=presets.EXAMPLE_LAMBDA)
        if name == "protocol":
            p.add_argument("--catalyst", default=dumps_spectrum(presets.CATALYST_SPECTRUM))
        p.set_defaults(func=func)

    p = sub.add_parser("bounds", parents=[common], help="ELOCC lower vs LOCC upper bound")
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--lambdas", type=float, nargs="+")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("radius", parents=[common], help="catalysis-free overlap radius")
    p.add_argument("alpha")
    p.add_argument("gamma")
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("close-pair", parents=[common], help="close mixed pair needing a catalyst")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--out-dir", help="write sigma.json and rho.json here")
    p.set_defaults(func=cmd_close_pair)

    p = sub.add_parser("attack", parents=[common], help="random separable attacks")
    p.add_argument("--lambda", dest="lam", default="lambda0")
    p.add_argument("--catalyst", choices=["none", "bell"], default="none")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--records", action="store_true", help="emit one JSON line per result")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("paper-repro", parents=[common], help="rerun every worked example")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_paper_repro)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateFormatError, StateError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EntcatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
