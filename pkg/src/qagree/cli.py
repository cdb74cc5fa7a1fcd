"""Command-line interface.

Exit codes: 0 success or verified, 1 input error, 2 verification failed.
Reports go to stdout as canonical JSON (or TSV for ``agents run``);
diagnostics go to stderr.
"""

import argparse
import sys

import numpy as np

from . import agents, dilation, instruments, ozawa
from .errors import InvariantViolation, QAgreeError, ScenarioSyntaxError
from .linalg import TOL_UNITARY, unitary_deviation
from .sampling import haar_state, random_orthonormal_basis, rng_for
from .serialization import (
    digest,
    dump_scenario,
    dumps,
    loads_scenario,
    read_text,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2

# dilate --check thresholds
PROB_TOL = 1e-10
OVERLAP_TOL = 1e-9
MIN_BRANCH_PROB = 1e-6


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _load(path, require_unitary=True):
    try:
        raw = read_text(path)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        obj = loads_scenario(raw, require_unitary)
    except (ScenarioSyntaxError, InvariantViolation) as exc:
        raise InputError(f"{path}: {exc}") from exc
    return obj, digest(raw)


def _expect(obj, cls, kind):
    if not isinstance(obj, cls):
        raise InputError(f"expected a {kind!r} scenario, got {type(obj).__name__}")


def _report(command, inputs_digest, results, tolerances=None, seed=None):
    rep = {"command": command, "inputs_digest": inputs_digest, "results": results}
    rep["tolerances"] = tolerances or {}
    if seed is not None:
        rep["seed"] = seed
    return rep


def cmd_validate(args):
    obj, dig = _load(args.path)
    results = {"valid": True}
    if isinstance(obj, instruments.KrausInstrument):
        results.update(
            kind="instrument",
            dim=obj.dim,
            num_outcomes=obj.num_outcomes,
            completeness_deviation=obj.deviation,
            **{"class": instruments.classify(obj).value},
        )
    elif isinstance(obj, dilation.DilationModel):
        results.update(
            kind="dilation",
            system_dim=obj.system_dim,
            meter_dim=obj.meter_dim,
            **{"class": instruments.classify(obj.instrument).value},
        )
    elif isinstance(obj, ozawa.OzawaScenario):
        results.update(kind="ozawa", dims=list(obj.dims), num_outcomes=obj.num_outcomes)
    else:
        results.update(
            kind="agents",
            dim=obj.dim,
            alice_outcomes=obj.num_outcomes,
            bob_outcomes=obj.bob_instrument.num_outcomes,
        )
    return EXIT_OK, _report("validate", dig, results)


def cmd_dilate(args):
    obj, dig = _load(args.path)
    _expect(obj, instruments.KrausInstrument, "instrument")
    model = dilation.build_dilation(obj)
    results = {
        "system_dim": model.system_dim,
        "meter_dim": model.meter_dim,
        "unitary_deviation": unitary_deviation(model.unitary),
    }
    code = EXIT_OK
    if args.check:
        max_dev, min_overlap = 0.0, 1.0
        for k in range(args.states):
            psi = haar_state(model.system_dim, rng_for(args.seed, k))
            direct = instruments.outcome_probabilities(obj, psi)
            dilated = dilation.dilated_probabilities(model, psi)
            max_dev = max(max_dev, float(np.max(np.abs(direct - dilated))))
            for x in range(1, obj.num_outcomes + 1):
                if direct[x - 1] < MIN_BRANCH_PROB:
                    continue
                a = instruments.post_state(obj, psi, x)
                b = dilation.dilated_post_state(model, psi, x)
                min_overlap = min(min_overlap, abs(np.vdot(a, b)))
        passed = max_dev <= PROB_TOL and min_overlap >= 1 - OVERLAP_TOL
        results.update(
            states=args.states,
            max_probability_deviation=max_dev,
            min_post_state_overlap=min_overlap,
            passed=passed,
        )
        code = EXIT_OK if passed else EXIT_FAILED
    if args.out:
        dump_scenario(model, args.out)
        results["output"] = args.out
    tolerances = {"probability": PROB_TOL, "overlap": OVERLAP_TOL, "min_branch_probability": MIN_BRANCH_PROB}
    return code, _report("dilate", dig, results, tolerances, args.seed if args.check else None)


def cmd_ozawa_verify(args):
    scn, dig = _load(args.path, require_unitary=False)
    _expect(scn, ozawa.OzawaScenario, "ozawa")
    u_dev = unitary_deviation(scn.unitary)
    results = {"dims": list(scn.dims), "unitary_deviation": u_dev, "unitary": u_dev <= TOL_UNITARY}
    tolerances = {"unitary": TOL_UNITARY, "reproducibility": args.repro_tol, "off_diagonal": args.tol}
    if not results["unitary"]:
        results["verdict"] = "not unitary"
        return EXIT_FAILED, _report("ozawa verify", dig, results, tolerances, args.seed)

    rep = ozawa.check_reproducibility(scn, args.repro_tol)
    results.update(
        reproducible=rep.holds,
        max_deviation=rep.max_deviation,
        per_outcome_deviations={"meter1": list(rep.per_outcome_deviations[0]),
                                "meter2": list(rep.per_outcome_deviations[1])},
    )
    if not rep.holds:
        results["verdict"] = "not reproducible"
        return EXIT_FAILED, _report("ozawa verify", dig, results, tolerances, args.seed)

    mass = ozawa.verify_intersubjectivity(scn, args.states, args.seed, args.repro_tol, args.workers)
    ok = mass <= args.tol
    results.update(states=args.states, off_diagonal_mass=mass,
                   verdict="outcomes agree" if ok else "outcomes disagree")
    return (EXIT_OK if ok else EXIT_FAILED), _report("ozawa verify", dig, results, tolerances, args.seed)


def build_cli_scenario(dim, seed=None):
    """Scenario emitted by ``ozawa build``: canonical bases, or random ones when seeded."""
    if seed is None:
        return ozawa.build_reproducible_scenario(dim)
    rng = rng_for(seed, 0)
    psi_out = [haar_state(dim, rng) for _ in range(dim)]
    phi1 = random_orthonormal_basis(dim, rng)
    phi2 = random_orthonormal_basis(dim, rng)
    xi1 = haar_state(dim, rng)
    xi2 = haar_state(dim, rng)
    return ozawa.build_reproducible_scenario(dim, psi_out, phi1, phi2, xi1, xi2)


def cmd_ozawa_build(args):
    if args.dim < 1:
        raise InputError("--dim must be >= 1")
    scn = build_cli_scenario(args.dim, args.seed)
    try:
        text = dump_scenario(scn, args.out)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from None
    results = {"dims": list(scn.dims), "output": args.out, "output_digest": digest(text)}
    return EXIT_OK, _report("ozawa build", None, results, seed=args.seed)


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, (list, tuple)) and any(isinstance(v, (list, tuple, dict)) for v in value):
        for i, v in enumerate(value, start=1):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out.append((prefix, value))


def to_tsv(report):
    """Tab-separated ``key<TAB>value`` lines; nested keys joined by dots."""
    rows = []
    _flatten("", report, rows)
    # reuse the canonical number formatting from the JSON dumper
    return "".join(f"{k}\t{dumps(v).strip()}\n" for k, v in rows)


def cmd_agents_run(args):
    scn, dig = _load(args.path)
    _expect(scn, agents.AgentScenario, "agents")
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    rep = agents.run_trials(scn, args.trials, args.seed, args.workers)
    results = {
        "num_trials": rep.num_trials,
        "agreement_count": rep.agreement_count,
        "empirical_frequency": rep.empirical_frequency,
        "predicted_probability": rep.predicted_probability,
        "three_sigma_band": list(rep.three_sigma_band),
        "within_band": rep.within_band(),
        "contingency": rep.contingency.tolist(),
    }
    return EXIT_OK, _report("agents run", dig, results, seed=args.seed)


def build_parser():
    p = _Parser(prog="qagree", description="Generalized measurement and agreement checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a scenario file and classify instruments")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("dilate", help="build the meter unitary of an instrument")
    d.add_argument("path")
    d.add_argument("--check", action="store_true", help="compare dilated and direct statistics")
    d.add_argument("--states", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", help="write the dilation as a scenario file")
    d.set_defaults(func=cmd_dilate)

    oz = sub.add_parser("ozawa", help="system plus two meters").add_subparsers(
        dest="ozawa_command", required=True, parser_class=_Parser
    )
    ov = oz.add_parser("verify", help="check reproducibility and sample outcome agreement")
    ov.add_argument("path")
    ov.add_argument("--states", type=int, default=100)
    ov.add_argument("--tol", type=float, default=1e-9, help="max off-diagonal joint mass")
    ov.add_argument("--repro-tol", type=float, default=ozawa.TOL_REPRODUCIBLE)
    ov.add_argument("--seed", type=int, default=0)
    ov.add_argument("--workers", type=int, default=1)
    ov.set_defaults(func=cmd_ozawa_verify)
    ob = oz.add_parser("build", help="write a reproducible scenario")
    ob.add_argument("--dim", type=int, required=True)
    ob.add_argument("--out", required=True)
    ob.add_argument("--seed", type=int, default=None, help="randomize bases and output states")
    ob.set_defaults(func=cmd_ozawa_build)

    ag = sub.add_parser("agents", help="sequential two-agent scenario").add_subparsers(
        dest="agents_command", required=True, parser_class=_Parser
    )
    ar = ag.add_parser("run", help="Monte Carlo agreement statistics")
    ar.add_argument("path")
    ar.add_argument("--trials", type=int, default=10000)
    ar.add_argument("--seed", type=int, default=0)
    ar.add_argument("--format", choices=("json", "tsv"), default="json")
    ar.add_argument("--workers", type=int, default=1)
    ar.set_defaults(func=cmd_agents_run)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, report = args.func(args)
    except (InputError, QAgreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(dumps({"error": str(exc)}), end="")
        return EXIT_INPUT
    if getattr(args, "format", "json") == "tsv":
        sys.stdout.write(to_tsv(report))
    else:
        sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
