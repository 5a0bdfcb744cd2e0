"""Command-line front end.

Subcommands: ``calculus``, ``verify``, ``gram``, ``bessel``, ``study`` and
``rerun``.  Every report embeds the argument list that produced it, and
``rerun REPORT`` replays it.  Exit codes: 0 success, 1 violations found,
2 usage error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bessel_estimator import (
    assemble_gram,
    bessel_constant,
    family_growth_study,
    growth_schedule,
    save_gram,
    stress_test_bessel,
    study_to_csv,
)
from .errors import CatalogLookupError, ConvergenceError, DomainError, PreconditionError
from .function_catalog import parse_function_spec
from .holder_calculus import (
    ConditionProfile,
    DecayProfile,
    HolderDecayProfile,
    HolderGrowthProfile,
    certify_holder_decay,
    condition_from_profiles,
    condition_I_to_III,
    gradient_to_holder,
    lemma1_rescale,
    normalize_to_unit,
    profile_to_dict,
)
from .modulus_verifier import (
    PairSamplingPlan,
    check_condition,
    check_decay,
    check_holder_decay,
    check_holder_growth,
)
from .vaguelet_engine import QuadratureSpec, cube_range, default_quadrature

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    return {"argv": list(args.replay_argv), "seed": args.seed, "threads": args.threads}


def _parse_gens(text: str) -> list:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(g) for g in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad generation range {text!r}; use e.g. 0..3") from exc


# -- calculus ------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"calculus --op {args.op}: missing --{', --'.join(missing)}")


def cmd_calculus(args) -> int:
    op = args.op
    if op == "theorem2":
        _need(args, "D1", "alpha", "R", "Rprime")
        decay = DecayProfile(R=args.R, C=args.C)
        growth = HolderGrowthProfile(alpha=args.alpha, D1=args.D1, M=args.M)
        result = profile_to_dict(certify_holder_decay(decay, growth, args.Rprime))
        result["scale"] = decay.C
    elif op == "lemma1":
        _need(args, "D1", "alpha", "rho")
        growth = HolderGrowthProfile(alpha=args.alpha, D1=args.D1, M=args.M)
        result = profile_to_dict(lemma1_rescale(growth, args.rho, sup_bound_ok=args.sup_bound_ok))
    elif op == "normalize":
        _need(args, "D1", "alpha", "R")
        scale, decay, growth = normalize_to_unit(
            DecayProfile(R=args.R, C=args.C), HolderGrowthProfile(alpha=args.alpha, D1=args.D1, M=args.M)
        )
        result = {"scale": scale, "decay": profile_to_dict(decay), "growth": profile_to_dict(growth)}
    elif op == "gradient":
        _need(args, "C2")
        growth = gradient_to_holder(args.C2, args.M)
        result = profile_to_dict(growth)
        if args.R is not None and args.Rprime is not None:
            result["holder_decay"] = profile_to_dict(certify_holder_decay(DecayProfile(R=args.R, C=args.C), growth, args.Rprime))
    else:  # I-to-III
        _need(args, "epsilon", "alpha", "d")
        p = ConditionProfile(kind="I", epsilon=args.epsilon, alpha=args.alpha, d=args.d, M=args.M, constant=args.constant)
        result = profile_to_dict(condition_I_to_III(p, args.epsilon_prime))
    result["op"] = op
    result["config"] = _config(args)
    _emit(args, result)
    return EXIT_OK


# -- verify --------------------------------------------------------------------

def _claimed_decay(f, args):
    base = f.claimed_decay
    R = args.R if args.R is not None else (base.R if base else None)
    C = args.C if args.C is not None else (base.C if base and args.R is None else 1.0)
    if R is None:
        raise UsageError(f"{f.spec} has no claimed decay; pass --R")
    return DecayProfile(R=R, C=C)


def _claimed_growth(f, args):
    base = f.claimed_growth
    if base is None and (args.D1 is None or args.alpha is None):
        raise UsageError(f"{f.spec} has no claimed Hölder profile; pass --D1 and --alpha")
    return HolderGrowthProfile(
        alpha=args.alpha if args.alpha is not None else base.alpha,
        D1=args.D1 if args.D1 is not None else base.D1,
        M=args.M if args.M is not None else base.M,
    )


def cmd_verify(args) -> int:
    f = parse_function_spec(args.f, args.d)
    plan = PairSamplingPlan(
        d=args.d, pair_count=args.pairs, near_fraction=args.near_fraction, T=args.T, seed=args.seed, radial=args.radial
    )
    reports = {}
    kind = args.profile
    if kind == "decay":
        reports["decay"] = check_decay(f, _claimed_decay(f, args), plan, args.threads)
    elif kind == "growth":
        reports["growth"] = check_holder_growth(f, _claimed_growth(f, args), plan, args.threads)
    elif kind == "holder-decay":
        if args.beta is None or args.D2 is None:
            raise UsageError("--profile holder-decay needs --beta and --D2")
        p = HolderDecayProfile(beta=args.beta, D2=args.D2, Rprime=args.Rprime or 0.0)
        reports["holder_decay"] = check_holder_decay(f, p, plan, args.threads)
    elif kind in ("theorem2", "corollary"):
        decay = _claimed_decay(f, args)
        if kind == "corollary":
            if f.gradient_bound is None:
                raise UsageError(f"{f.spec} carries no gradient bound")
            growth = gradient_to_holder(*f.gradient_bound)
        else:
            growth = _claimed_growth(f, args)
        reports["decay"] = check_decay(f, decay, plan, args.threads)
        reports["growth"] = check_holder_growth(f, growth, plan, args.threads)
        p = certify_holder_decay(decay, growth, args.Rprime or 0.0)
        reports["holder_decay"] = check_holder_decay(f, p, plan, args.threads)
    else:  # condition-III
        kind_one = condition_from_profiles(_claimed_decay(f, args), _claimed_growth(f, args), args.d)
        upgraded = condition_I_to_III(kind_one)
        for name, rep in check_condition(f, kind_one, plan, args.threads).items():
            reports[f"I_{name}"] = rep
        for name, rep in check_condition(f, upgraded, plan, args.threads).items():
            reports[f"III_{name}"] = rep

    violations = sum(r.violation_count for r in reports.values())
    payload = {
        "function": f.spec,
        "plan": plan.to_json(),
        "reports": {name: r.to_json() for name, r in reports.items()},
        "violations": violations,
        "config": _config(args),
    }
    _emit(args, payload)
    return EXIT_VIOLATION if violations else EXIT_OK


# -- gram / bessel / study -----------------------------------------------------

def _family(args):
    mother = parse_function_spec(args.mother, args.d)
    cubes = cube_range(args.j_min, args.j_max, args.K, args.d)
    q = default_quadrature(cubes)
    if args.quad_T is not None or args.h is not None:
        q = QuadratureSpec(T=args.quad_T if args.quad_T is not None else q.T, h=args.h if args.h is not None else q.h)
    return mother, cubes, q


def cmd_gram(args) -> int:
    mother, cubes, q = _family(args)
    g = assemble_gram(mother, cubes, q, args.threads)
    diag = np.real(np.diag(g.entries))
    payload = {
        "mother": mother.spec,
        "n": len(g),
        "quadrature": q.to_json(),
        "diag_min": float(diag.min()),
        "diag_max": float(diag.max()),
        "tail_bound_max": g.tail_bound_max,
        "asymmetry": g.asymmetry,
        "cubes": [c.to_json() for c in g.cubes],
        "config": _config(args),
    }
    if args.dump:
        save_gram(g, args.dump)
        payload["dump"] = os.path.basename(args.dump)
    _emit(args, payload)
    return EXIT_OK


def cmd_bessel(args) -> int:
    mother, cubes, q = _family(args)
    g = assemble_gram(mother, cubes, q, args.threads)
    est = bessel_constant(g, tol=args.tol, max_iter=args.max_iter)
    report = stress_test_bessel(
        mother, cubes, q, trials=args.trials, seed=args.seed, threads=args.threads, refine=args.refine, gram=g
    )
    payload = {
        "mother": mother.spec,
        "n": len(cubes),
        "quadrature": q.to_json(),
        "A_emp": est.A_emp,
        "iterations": est.iterations,
        "tail_bound": est.tail_bound,
        "stress": report.to_json(),
        "config": _config(args),
    }
    _emit(args, payload)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_study(args) -> int:
    mother = parse_function_spec(args.mother, args.d)
    schedule = growth_schedule(args.gens, args.d, args.width)
    rows, last_step = family_growth_study(mother, schedule, threads=args.threads, tol=args.tol, max_iter=args.max_iter)
    monotone = all(b.A_emp >= a.A_emp * (1 - 10 * args.tol) for a, b in zip(rows, rows[1:]))
    text = study_to_csv(rows)
    meta = {
        "mother": mother.spec,
        "generations": list(args.gens),
        "last_step_relative_increase": last_step,
        "nondecreasing": monotone,
        "config": _config(args),
    }
    if args.out:
        _write_atomic(args.out, text)
        _write_atomic(args.out + ".json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK if monotone else EXIT_VIOLATION


def cmd_rerun(args) -> int:
    path = args.report
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError:
            data = None
    if data is None or "config" not in data:
        sidecar = path + ".json"
        if not os.path.exists(sidecar):
            raise UsageError(f"{path} carries no embedded config")
        with open(sidecar, encoding="utf-8") as fh:
            data = json.load(fh)
    argv = list(data["config"]["argv"])
    if args.out:
        argv += ["--out", args.out]
    return main(argv)


# -- parser --------------------------------------------------------------------

def _common(p):
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all cores")


def _family_args(p):
    p.add_argument("--mother", required=True, help='mother function, e.g. "gaussian_second_deriv"')
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--j-min", type=int, default=-2)
    p.add_argument("--j-max", type=int, default=2)
    p.add_argument("--K", type=int, default=3, help="positions k in [-K, K]^d")
    p.add_argument("--T", dest="quad_T", type=float, default=None, help="quadrature half-width")
    p.add_argument("--h", type=float, default=None, help="quadrature spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vaguelets", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calculus", help="closed-form exponent/constant conversions")
    _common(p)
    p.add_argument("--op", choices=["theorem2", "lemma1", "normalize", "gradient", "I-to-III"], default="theorem2")
    p.add_argument("--D1", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--M", type=float, default=0.0)
    p.add_argument("--R", type=float)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--Rprime", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--sup-bound-ok", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--C2", type=float, help="gradient bound constant")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--epsilon-prime", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--constant", type=float, default=1.0)
    p.set_defaults(func=cmd_calculus)

    p = sub.add_parser("verify", help="sample a catalog function against a profile")
    _common(p)
    p.add_argument("--f", required=True, help='function spec, e.g. "slow_holder(2)"')
    p.add_argument("--d", type=int, default=1)
    p.add_argument(
        "--profile",
        choices=["decay", "growth", "holder-decay", "theorem2", "corollary", "condition-III"],
        default="decay",
    )
    for name in ("R", "C", "D1", "alpha", "M", "beta", "D2", "Rprime"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--pairs", type=int, default=100_000)
    p.add_argument("--near-fraction", type=float, default=0.5)
    p.add_argument("--T", type=float, default=1e3, help="sampling radius cap")
    p.add_argument("--radial", choices=["ball", "log"], default="ball")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gram", help="assemble a Gram matrix")
    _common(p)
    _family_args(p)
    p.add_argument("--dump", default=None, help="write entries as binary (real, imag) doubles")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("bessel", help="Bessel constant plus random-coefficient stress test")
    _common(p)
    _family_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--refine", type=int, default=1, help="grid refinement for the direct route")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_bessel)

    p = sub.add_parser("study", help="Bessel constant along nested families (CSV)")
    _common(p)
    p.add_argument("--mother", required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--gens", type=_parse_gens, default=[0, 1, 2, 3], help="generation spans, e.g. 0..3")
    p.add_argument("--width", type=int, default=4, help="k in [-width 2^g, width 2^g]")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("rerun", help="replay the config embedded in a report")
    p.add_argument("report")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rerun)
    return parser


def _strip_out(argv):
    out, skip = [], False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.replay_argv = _strip_out(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"vaguelets {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, PreconditionError, CatalogLookupError) as exc:
        print(f"vaguelets {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"vaguelets {args.command}: {exc} (last estimate {exc.last_estimate})", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
