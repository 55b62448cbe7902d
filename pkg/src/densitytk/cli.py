"""Command-line entry point.

One executable, one JSON report per invocation on standard output.
Reports are deterministic functions of the inputs and flags (stable key
order, no timestamps), every claimed inequality is embedded with its
exact sides, and the exit code is 0 exactly when all of them hold.

Exit codes: 0 all certificate inequalities hold; 1 the report contains a
failed inequality; 2 parse or validation problem; 3 hypothesis or tail
violation at the truncation; 4 selector/oracle size mismatch;
5 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from .bergelson import (
    ORACLE_PREFIX_LIMIT,
    SetFamily,
    averaging_identity_check,
    default_ratio_threshold,
    density_ratio_certificate,
    fip_oracle,
    select_common_point,
)
from .density import (
    FiniteIndexSet,
    IndexSet,
    PeriodicIndexSet,
    SampledIndexSet,
    d_lim_verdict,
    default_checkpoints,
    upper_density,
)
from .errors import (
    CertificateError,
    ParseError,
    ToolkitError,
    ValidationError,
)
from .instances import GenerationProfile, bundle_to_json, generate_instance, parse_instance
from .jsonio import (
    bounded_family_from_json,
    estimate_to_json,
    format_rational,
    functional_from_json,
    index_set_from_json,
    index_set_to_json,
    parse_rational,
    sequence_from_json,
    sets_file_from_json,
    space_from_json,
    space_to_json,
)
from .measure import FiniteMeasureSpace, Functional
from .reports import Check, checks_to_json, verify_report
from .witness import (
    backward_pipeline,
    default_witness_parameters,
    forward_functional,
    weak_d_convergence_check,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CERT_FAILED = 1
EXIT_INVALID = 2
EXIT_HYPOTHESIS = 3
EXIT_ORACLE_MISMATCH = 4
EXIT_INTERNAL = 5

DEFAULT_DENSITY_HORIZON = 4096

ZERO = Fraction(0)


def _load_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _rational(text: str) -> Fraction:
    return parse_rational(text, "argument")


def _checkpoints_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"bad checkpoint list {text!r}; expected comma-separated integers") from None


def _emit(report: dict, pretty: bool) -> None:
    if pretty:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
        for rec in report.get("inequalities", []):
            status = "ok " if rec["holds"] else "FAIL"
            sys.stderr.write(
                f"{status} {rec['label']}: {rec['lhs']} {rec['relation']} {rec['rhs']}\n"
            )
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")


def _finish(report: dict, checks: list[Check], args, exit_code: int | None = None) -> int:
    records, verified = checks_to_json(checks)
    report["inequalities"] = records
    report["verified"] = verified
    if getattr(args, "verify", False):
        ok, failures = verify_report(json.loads(json.dumps(report)))
        report["self_verified"] = ok
        if ok != verified or (verified and failures):
            raise ToolkitError(f"self-verification disagreed with the report: {failures}")
    _emit(report, getattr(args, "pretty", False))
    if exit_code is not None:
        return exit_code
    return EXIT_OK if verified else EXIT_CERT_FAILED


# ---------------------------------------------------------------------------
# input resolution


def _resolve_index_set(args) -> IndexSet:
    return index_set_from_json(_load_json(args.index_set), "/index_set")


def _resolve_set_family(args) -> SetFamily:
    if args.bundle:
        bundle = parse_instance(args.bundle)
        family = bundle.lookup("families", args.name)
        a = getattr(args, "a", None)
        if a is not None and a != family.a:
            family = SetFamily(
                space=family.space,
                index_set=family.index_set,
                horizon=family.horizon,
                sets=dict(family.sets),
                a=a,
            )
        return family
    if not (args.space and args.family):
        raise ValidationError("provide either --bundle or both --space and --family")
    space = space_from_json(_load_json(args.space), "/space")
    sets = sets_file_from_json(_load_json(args.family), space, "/family")
    if getattr(args, "index_set", None):
        index_set = index_set_from_json(_load_json(args.index_set), "/index_set")
    else:
        index_set = FiniteIndexSet(tuple(sorted(sets)))
    horizon = getattr(args, "eta", None) or getattr(args, "N", None) or max(sets, default=1)
    a = getattr(args, "a", None)
    if a is None:
        a = ZERO
    return SetFamily(space=space, index_set=index_set, horizon=horizon, sets=sets, a=a)


def _resolve_bounded(args):
    space = space_from_json(_load_json(args.space), "/space")
    family = bounded_family_from_json(_load_json(args.family_f), space, "/family_f")
    return space, family


# ---------------------------------------------------------------------------
# commands


def _cmd_density(args) -> int:
    index_set = _resolve_index_set(args)
    if args.checkpoints:
        checkpoints = args.checkpoints
    else:
        if isinstance(index_set, SampledIndexSet):
            horizon = args.horizon or index_set.horizon
        else:
            horizon = args.horizon or DEFAULT_DENSITY_HORIZON
        checkpoints = default_checkpoints(horizon)
    estimate = upper_density(index_set, checkpoints)
    report = {"command": "density", "index_set": index_set_to_json(index_set)}
    report.update(estimate_to_json(estimate))
    checks = [
        Check("lower_at_horizon <= upper_at_horizon", estimate.lower_at_horizon, "<=", estimate.upper_at_horizon),
        Check("upper_at_horizon <= 1", estimate.upper_at_horizon, "<=", Fraction(1)),
    ]
    if estimate.exact is not None:
        checks.append(Check("exact density within [0, 1]", estimate.exact, "<=", Fraction(1)))
    return _finish(report, checks, args)


def _cmd_dlim(args) -> int:
    seq = sequence_from_json(_load_json(args.sequence), "/sequence")
    horizon = args.N
    if horizon is None:
        if seq.tail is not None:
            raise ValidationError("--N is required when the sequence has a tail rule")
        horizon = len(seq.prefix)
    verdict = d_lim_verdict(seq, args.L, args.r, horizon, tolerance=args.tolerance)
    report = {
        "command": "dlim",
        "holds": verdict.holds,
        "exception_set": index_set_to_json(verdict.exception_set),
        "density": estimate_to_json(verdict.density),
        "L": format_rational(args.L),
        "r": format_rational(args.r),
        "N": horizon,
        "tolerance": format_rational(args.tolerance),
    }
    checks = [
        Check(
            "exception density (exact when representable, else upper at horizon) <= tolerance",
            verdict.density.verdict_value,
            "<=",
            args.tolerance,
        )
    ]
    return _finish(report, checks, args)


def _bergelson_checks(family: SetFamily, selection, identity) -> list[Check]:
    bound = selection.cardinality_bound
    violations = sum(
        1 for n in selection.selected.elements if selection.witness not in family.sets[n]
    )
    return [
        Check(
            "|selected| >= a * |I0 ∧ N|",
            Fraction(bound.selected_size),
            ">=",
            bound.bound,
        ),
        Check("witness membership violations == 0", Fraction(violations), "==", ZERO),
        Check(
            "|selected| == F(witness) * |I0 ∧ N|",
            Fraction(bound.selected_size),
            "==",
            selection.f_value * bound.prefix_size,
        ),
        Check("averaging identity: ∫ F dμ == mean of μ(A_k)", identity.lhs, "==", identity.rhs),
        Check("weighted mean of F >= a", identity.lhs, ">=", family.a),
    ]


def _cmd_bergelson(args) -> int:
    family = _resolve_set_family(args)
    eta = args.eta or family.horizon
    selection = select_common_point(family, eta, restrict_positive=args.positive)
    identity = averaging_identity_check(family, eta)
    checks = _bergelson_checks(family, selection, identity)
    report = {
        "command": "bergelson",
        "eta": eta,
        "a": format_rational(family.a),
        "positive": args.positive,
        "witness": selection.witness,
        "f_value": format_rational(selection.f_value),
        "selected": index_set_to_json(selection.selected),
        "prefix_size": selection.cardinality_bound.prefix_size,
        "selected_size": selection.cardinality_bound.selected_size,
        "identity": {
            "lhs": format_rational(identity.lhs),
            "rhs": format_rational(identity.rhs),
        },
    }
    if args.positive:
        witness_weight = family.space.weight(selection.witness)
        common = family.space.full_set
        for n in selection.selected.elements:
            common = common.intersection(family.sets[n])
        checks.append(Check("witness weight > 0", witness_weight, ">", ZERO))
        checks.append(
            Check(
                "μ(∩ selected sets) >= witness weight",
                family.space.measure(common),
                ">=",
                witness_weight,
            )
        )
    b = args.b
    if b is None and isinstance(family.index_set, PeriodicIndexSet):
        b = default_ratio_threshold(family.index_set)
    if b is not None and b > 0:
        certificate = density_ratio_certificate(family, selection, eta, b)
        report["ratio_certificate"] = {
            "eta": certificate.eta,
            "b": format_rational(certificate.b),
            "selected_count": certificate.selected_count,
            "index_prefix_count": certificate.index_prefix_count,
            "selected_ratio": format_rational(certificate.selected_ratio),
            "prefix_ratio": format_rational(certificate.prefix_ratio),
            "f_value": format_rational(certificate.f_value),
            "candidate_bounds": {
                "declared": format_rational(certificate.declared_bound),
                "profile": format_rational(certificate.profile_bound),
            },
        }
        checks.extend(
            [
                Check("admission: |I0 ∧ η|/η > b", certificate.prefix_ratio, ">", certificate.b),
                Check(
                    "factorization: |I ∧ η|/η == F(witness) * |I0 ∧ η|/η",
                    certificate.selected_ratio,
                    "==",
                    certificate.f_value * certificate.prefix_ratio,
                ),
                Check("profile above the floor: F(witness) >= a", certificate.f_value, ">=", certificate.a),
                Check("|I ∧ η|/η > a*b", certificate.selected_ratio, ">", certificate.declared_bound),
                Check("|I ∧ η|/η > F(witness)*b", certificate.selected_ratio, ">", certificate.profile_bound),
            ]
        )
    exit_code = None
    if args.oracle:
        oracle = fip_oracle(family, eta)
        report["oracle"] = {"max_size": oracle.max_size, "best_subset": list(oracle.best_subset)}
        checks.append(
            Check(
                "selector size == oracle maximum",
                Fraction(selection.cardinality_bound.selected_size),
                "==",
                Fraction(oracle.max_size),
            )
        )
        if selection.cardinality_bound.selected_size != oracle.max_size:
            exit_code = EXIT_ORACLE_MISMATCH
    return _finish(report, checks, args, exit_code=exit_code)


def _cmd_oracle(args) -> int:
    family = _resolve_set_family(args)
    n = args.N or family.horizon
    oracle = fip_oracle(family, n)
    report = {
        "command": "oracle",
        "N": n,
        "max_size": oracle.max_size,
        "best_subset": list(oracle.best_subset),
        "prefix_limit": ORACLE_PREFIX_LIMIT,
    }
    return _finish(report, [], args)


def _cmd_witness_backward(args) -> int:
    space, family = _resolve_bounded(args)
    functional = functional_from_json(_load_json(args.functional), space, "/functional")
    index_set = index_set_from_json(_load_json(args.I), "/I")
    n = args.N or family.size
    certificate = backward_pipeline(
        family, functional, index_set, n, args.r, s=args.s, delta=args.delta
    )
    level = certificate.level_sets
    mus = {k: level.space.measure(level.sets[k]) for k in level.prefix_indices}
    report = {
        "command": "witness-backward",
        "r": format_rational(certificate.r),
        "s": format_rational(certificate.s),
        "delta": format_rational(certificate.delta),
        "T_total": format_rational(functional.total),
        "N": n,
        "J": index_set_to_json(certificate.selected),
        "points": list(certificate.points),
        "level_set_measures": {str(k): format_rational(v) for k, v in mus.items()},
        "tail_min": {str(k): format_rational(v) for k, v in certificate.tail_min.items()},
        "measure_floor": format_rational(level.a),
    }
    checks = [
        Check("δ·T(1) < s", certificate.delta * functional.total, "<", certificate.s),
        Check("s < r", certificate.s, "<", certificate.r),
    ]
    if mus:
        k_min = min(mus, key=lambda k: (mus[k], k))
        checks.append(
            Check(f"min μ(A_n) over I ∧ N (at n={k_min}) > (r-s)/M", mus[k_min], ">", level.a)
        )
    if certificate.tail_min:
        k_min = min(certificate.tail_min, key=lambda k: (certificate.tail_min[k], k))
        checks.append(
            Check(
                f"min tail |f_n(witness)| over J ∧ N (at n={k_min}) >= δ",
                certificate.tail_min[k_min],
                ">=",
                certificate.delta,
            )
        )
    return _finish(report, checks, args)


def _cmd_witness_forward(args) -> int:
    space, family = _resolve_bounded(args)
    raw_points = _load_json(args.points)
    if not isinstance(raw_points, list) or not all(isinstance(p, str) for p in raw_points):
        raise ParseError("/points: expected an array of point names")
    index_set = index_set_from_json(_load_json(args.I), "/I")
    n = args.N or family.size
    certificate = forward_functional(family, raw_points, index_set, n, args.r)
    evaluations = {
        k: abs(certificate.functional.apply(family.functions[k])) for k in certificate.checked
    }
    report = {
        "command": "witness-forward",
        "r": format_rational(args.r),
        "N": n,
        "K": certificate.tail_index,
        "functional": {
            "weights": {
                p: format_rational(w)
                for p, w in zip(certificate.functional.points, certificate.functional.weights)
            }
        },
        "checked": list(certificate.checked),
        "evaluations": {str(k): format_rational(v) for k, v in evaluations.items()},
    }
    checks = []
    if evaluations:
        k_min = min(evaluations, key=lambda k: (evaluations[k], k))
        checks.append(
            Check(f"min |T(f_n)| over I ∧ N (at n={k_min}) > r", evaluations[k_min], ">", args.r)
        )
    return _finish(report, checks, args)


def _cmd_dconv(args) -> int:
    space, family = _resolve_bounded(args)
    raw = _load_json(args.functionals)
    if not isinstance(raw, dict):
        raise ParseError("/functionals: expected an object mapping names to functionals")
    names = list(raw)
    functionals = [functional_from_json(raw[name], space, f"/functionals/{name}") for name in names]
    n = args.N or family.size
    verdicts = weak_d_convergence_check(family, functionals, args.r, n, tolerance=args.tolerance)
    report = {
        "command": "dconv",
        "r": format_rational(args.r),
        "N": n,
        "tolerance": format_rational(args.tolerance),
        "verdicts": {},
    }
    checks = []
    for name, verdict in zip(names, verdicts):
        report["verdicts"][name] = {
            "holds": verdict.holds,
            "exception_set": index_set_to_json(verdict.exception_set),
            "density": estimate_to_json(verdict.density),
        }
        checks.append(
            Check(
                f"exception density for {name} <= tolerance",
                verdict.density.verdict_value,
                "<=",
                args.tolerance,
            )
        )
    return _finish(report, checks, args)


def _cmd_generate(args) -> int:
    profile = GenerationProfile(points=args.points, family_size=args.sets, a=args.a, b=args.b)
    bundle = generate_instance(args.seed, profile)
    payload = bundle_to_json(bundle)
    text = json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text if not args.pretty else json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.report == "-":
        try:
            data = json.load(sys.stdin)
        except json.JSONDecodeError as exc:
            raise ParseError(f"stdin: invalid JSON: {exc.msg}") from None
    else:
        data = _load_json(args.report)
    ok, failures = verify_report(data)
    report = {"command": "verify", "ok": ok, "failures": failures}
    _emit(report, args.pretty)
    return EXIT_OK if ok else EXIT_CERT_FAILED


# ---------------------------------------------------------------------------
# parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pretty", action="store_true", help="indent the report and summarize to stderr")
    parser.add_argument("--verify", action="store_true", help="re-verify the emitted report in-process")


def _add_family_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bundle", help="instance bundle file")
    parser.add_argument("--name", help="family name inside the bundle")
    parser.add_argument("--space", help="measure-space file")
    parser.add_argument("--family", help="family file: index -> member points")
    parser.add_argument("--index-set", dest="index_set", help="index-set file for I0")
    parser.add_argument("--a", type=_rational, help="declared measure floor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densitytk",
        description="Exact density arithmetic, d-limit verdicts, common-point selection, and witness certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="density estimate of an index set")
    p.add_argument("--index-set", dest="index_set", required=True)
    p.add_argument("--checkpoints", type=_checkpoints_arg)
    p.add_argument("--horizon", type=int)
    _add_common(p)
    p.set_defaults(handler=_cmd_density)

    p = sub.add_parser("dlim", help="zero-density limit verdict for a sequence")
    p.add_argument("--sequence", required=True)
    p.add_argument("--L", type=_rational, required=True)
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--tolerance", type=_rational, required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_dlim)

    p = sub.add_parser("bergelson", help="common-point selection with certificates")
    _add_family_inputs(p)
    p.add_argument("--eta", type=int, help="selection horizon (defaults to the family horizon)")
    p.add_argument("--b", type=_rational, help="prefix-ratio threshold for the ratio certificate")
    p.add_argument("--positive", action="store_true", help="restrict the witness to positive-weight points")
    p.add_argument("--oracle", action="store_true", help="cross-check against the exhaustive oracle")
    _add_common(p)
    p.set_defaults(handler=_cmd_bergelson)

    p = sub.add_parser("oracle", help="exhaustive maximum subfamily with a common point")
    _add_family_inputs(p)
    p.add_argument("--N", type=int)
    _add_common(p)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("witness", help="witness pipelines")
    wsub = p.add_subparsers(dest="direction", required=True)

    pb = wsub.add_parser("backward", help="functional -> level sets -> witness points")
    pb.add_argument("--space", required=True)
    pb.add_argument("--family-f", dest="family_f", required=True)
    pb.add_argument("--functional", required=True)
    pb.add_argument("--I", dest="I", required=True)
    pb.add_argument("--r", type=_rational, required=True)
    pb.add_argument("--s", type=_rational)
    pb.add_argument("--delta", type=_rational)
    pb.add_argument("--N", type=int)
    _add_common(pb)
    pb.set_defaults(handler=_cmd_witness_backward)

    pf = wsub.add_parser("forward", help="witness points -> evaluation functional")
    pf.add_argument("--space", required=True)
    pf.add_argument("--family-f", dest="family_f", required=True)
    pf.add_argument("--points", required=True)
    pf.add_argument("--I", dest="I", required=True)
    pf.add_argument("--r", type=_rational, required=True)
    pf.add_argument("--N", type=int)
    _add_common(pf)
    pf.set_defaults(handler=_cmd_witness_forward)

    p = sub.add_parser("dconv", help="weak d-convergence verdicts per functional")
    p.add_argument("--space", required=True)
    p.add_argument("--family-f", dest="family_f", required=True)
    p.add_argument("--functionals", required=True)
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--tolerance", type=_rational, required=True)
    p.add_argument("--N", type=int)
    _add_common(p)
    p.set_defaults(handler=_cmd_dconv)

    p = sub.add_parser("generate", help="deterministic seeded instance bundle")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--sets", type=int, default=8)
    p.add_argument("--a", type=_rational, default=Fraction(1, 2))
    p.add_argument("--b", type=_rational, default=Fraction(1, 4))
    p.add_argument("--out", help="also write the bundle to this file")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("verify", help="re-check the inequalities of an emitted report")
    p.add_argument("report", help="report file, or - for stdin")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(handler=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = getattr(args, "command", None)
    try:
        return args.handler(args)
    except CertificateError as exc:
        _emit_error(command, exc)
        return EXIT_HYPOTHESIS
    except (ParseError, ValidationError) as exc:
        _emit_error(command, exc)
        return EXIT_INVALID
    except ToolkitError as exc:
        _emit_error(command, exc)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error(command, exc)
        return EXIT_INTERNAL


def _emit_error(command: str | None, exc: Exception) -> None:
    report = {
        "command": command,
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }
    sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
    sys.stderr.write(f"{type(exc).__name__}: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
