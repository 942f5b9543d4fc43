"""Command-line interface exposing every computation with stable JSON/CSV
output for scripting and golden-file tests.

Exit codes: 0 — success; 1 — usage or input error; 2 — an identity check ran
and failed (tutte-check / hurwitz-check / bounds-check / master-check /
mc-verify beyond tolerance).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .expansion import (
    AlternationError,
    Potential,
    bounds_check,
    canonical_word_tuples,
    cumulant_haar,
    formal_radius,
    genus_coefficient,
    hurwitz_reduction,
    genus_value,
    master_operator_check,
    moment_haar,
    tutte_check,
)
from .maps import EnumerationBudgetError, diagnostics, enumerate_maps, map_to_json
from .ncpoly import (
    DeterministicWordError,
    NCWord,
    TraceExpression,
    evaluate_trace_expression,
    parse_word,
)
from .oracle import MatrixTuple, empirical_joint_cumulant
from .perm_core import Permutation, SignVector
from .walks import hurwitz_genus_to_steps, monotone_triple_hurwitz
from .weingarten import WeingartenRegimeError, get_table

__all__ = ["run", "main"]


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_cycle_type(text: str, total: int | None = None) -> tuple[int, ...]:
    """Parse a partition like ``"2+1+1"`` into a sorted cycle type."""
    text = text.strip()
    if text.lower() in {"id", "identity"} and total is not None:
        return (1,) * total
    try:
        parts = tuple(sorted((int(p) for p in text.split("+")), reverse=True))
    except ValueError:
        raise ValueError(f"cannot parse cycle type {text!r}; expected like '2+1+1'")
    if any(p < 1 for p in parts):
        raise ValueError("cycle lengths must be positive")
    if total is not None and sum(parts) != total:
        raise ValueError(f"cycle type {text!r} does not sum to {total}")
    return parts


def _perm_of_type(cycle_type: tuple[int, ...]) -> Permutation:
    """Representative permutation with consecutive cycles of the given type."""
    n = sum(cycle_type)
    cycles, start = [], 1
    for length in sorted(cycle_type, reverse=True):
        cycles.append(tuple(range(start, start + length)))
        start += length
    return Permutation.from_cycles(cycles, range(1, n + 1))


def _csv_print(header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _trace_expression_rows(value: TraceExpression) -> list[list[str]]:
    rows = []
    for key, coeff in value.items():
        rows.append([str(coeff), " ".join(f"tr({w.format()})" for w in key)])
    return rows


def _emit_trace_expression(args, value: TraceExpression, meta: dict) -> None:
    if args.format == "json":
        payload = dict(meta)
        payload["value"] = value.to_json()
        print(json.dumps(payload, sort_keys=True))
    elif args.format == "csv":
        _csv_print(["coefficient", "traces"], _trace_expression_rows(value))
    else:
        print(value.format())


def _words(arguments: list[str]) -> tuple[NCWord, ...]:
    return tuple(parse_word(text) for text in arguments)


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------


def _cmd_wg(args) -> int:
    cycle_type = _parse_cycle_type(args.cls, args.q)
    table = get_table(args.q, args.n)
    value = table.values[cycle_type]
    if args.format == "json":
        print(
            json.dumps(
                {
                    "q": args.q,
                    "n": args.n,
                    "class": list(cycle_type),
                    "value": str(value),
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["q", "n", "class", "value"],
            [[args.q, args.n, "+".join(map(str, cycle_type)), str(value)]],
        )
    else:
        print(value)
    return 0


def _cmd_moment(args) -> int:
    words = _words(args.words)
    value = moment_haar(words, args.n, threads=args.threads, max_work=args.max_work)
    _emit_trace_expression(
        args, value, {"N": args.n, "words": [w.format() for w in words]}
    )
    return 0


def _cmd_cumulant(args) -> int:
    words = _words(args.words)
    value = cumulant_haar(words, args.n, threads=args.threads, max_work=args.max_work)
    _emit_trace_expression(
        args, value, {"N": args.n, "words": [w.format() for w in words]}
    )
    return 0


def _cmd_genus_coeff(args) -> int:
    words = _words(args.words)
    coeff = genus_coefficient(
        args.g, words, threads=args.threads, max_work=args.max_work
    )
    _emit_trace_expression(
        args,
        coeff.value,
        {"g": coeff.g, "l": coeff.l, "words": [w.format() for w in words]},
    )
    return 0


def _cmd_enumerate_maps(args) -> int:
    eps = SignVector.from_string(args.eps)
    labels = tuple(range(1, args.labels + 1))
    if eps.domain != labels:
        raise ValueError(
            f"--eps has {len(eps.domain)} signs but --labels is {args.labels}"
        )
    rho = Permutation.from_cycle_string(args.rho, labels)
    colors = None
    if args.colors:
        parts = [int(x) for x in args.colors.split(",")]
        if len(parts) != args.labels:
            raise ValueError("--colors must list one color per label")
        colors = {i + 1: parts[i] for i in range(args.labels)}
    kwargs = dict(connected_only=args.connected, max_work=args.max_work)
    if args.r is not None:
        maps = enumerate_maps(labels, eps, rho, colors, by_r=args.r, **kwargs)
    else:
        maps = enumerate_maps(labels, eps, rho, colors, by_genus=args.genus, **kwargs)
    if args.format == "json":
        for m in maps:
            print(json.dumps(map_to_json(m)))
    elif args.format == "csv":
        rows = []
        for idx, m in enumerate(maps):
            diag = diagnostics(m)
            walks = ";".join(
                f"{c}:" + " ".join(f"({i} {j})" for i, j in w.as_pairs())
                for c, w in sorted(m.walks.items())
            )
            rows.append(
                [idx, m.pi.to_cycle_string(), walks, diag.genus, diag.connected]
            )
        _csv_print(["index", "pi", "walks", "genus", "connected"], rows)
    else:
        print(f"{len(maps)} map(s)")
        for m in maps:
            diag = diagnostics(m)
            walks = "; ".join(
                f"color {c}: " + " ".join(f"({i} {j})" for i, j in w.as_pairs())
                for c, w in sorted(m.walks.items())
            )
            print(
                f"pi={m.pi.to_cycle_string()} genus={diag.genus} "
                f"connected={diag.connected} walks=[{walks}]"
            )
    return 0


def _cmd_hurwitz(args) -> int:
    rho_t = _parse_cycle_type(args.rho, args.m)
    gamma_t = _parse_cycle_type(args.gamma, args.m)
    sigma_t = _parse_cycle_type(args.sigma, args.m)
    rho = _perm_of_type(rho_t)
    gamma = _perm_of_type(gamma_t)
    sigma = _perm_of_type(sigma_t)
    if args.r is not None:
        r = args.r
        num = r - (len(rho_t) + len(gamma_t) + len(sigma_t)) + args.m + 2
        g = num // 2 if num % 2 == 0 and num >= 0 else None
    else:
        g = args.g
        r = hurwitz_genus_to_steps(rho, gamma, sigma, g)
    count = monotone_triple_hurwitz(rho, gamma, sigma, r) if r >= 0 else 0
    types = "|".join("+".join(map(str, t)) for t in (rho_t, gamma_t, sigma_t))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "m": args.m,
                    "rho": list(rho_t),
                    "gamma": list(gamma_t),
                    "sigma": list(sigma_t),
                    "g": g,
                    "r": r,
                    "count": count,
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["m", "cycle types", "g", "r", "count"],
            [[args.m, types, "" if g is None else g, r, count]],
        )
    else:
        print(count)
    return 0


def _cmd_tutte_check(args) -> int:
    if args.grid:
        if args.words or args.potential:
            raise ValueError("--grid takes no positional words or --potential")
        return _run_tutte_grid(args)
    if not args.words:
        raise ValueError("provide words to check, or use --grid")
    words = _words(args.words)
    potential = None
    if args.potential:
        potential = Potential(tuple(parse_word(q) for q in args.potential))
    result = tutte_check(
        args.g,
        words,
        color=args.color,
        form=args.form,
        potential=potential,
        z_cap=args.z_cap,
        max_work=args.max_work,
    )
    if potential is None:
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "form": result.form,
                        "g": args.g,
                        "equal": result.equal,
                        "lhs": result.lhs.to_json(),
                        "rhs": result.rhs.to_json(),
                    },
                    sort_keys=True,
                )
            )
        elif args.format == "csv":
            _csv_print(
                ["side", "value"],
                [
                    ["lhs", result.lhs.format()],
                    ["rhs", result.rhs.format()],
                    ["equal", result.equal],
                ],
            )
        else:
            print(f"lhs: {result.lhs.format()}")
            print(f"rhs: {result.rhs.format()}")
            print(f"equal: {result.equal}")
    else:
        indices = sorted(result.lhs)
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "form": result.form,
                        "g": args.g,
                        "equal": result.equal,
                        "coefficients": [
                            {
                                "n": list(n),
                                "lhs": result.lhs[n].to_json(),
                                "rhs": result.rhs[n].to_json(),
                            }
                            for n in indices
                        ],
                    },
                    sort_keys=True,
                )
            )
        elif args.format == "csv":
            rows = [
                ["+".join(map(str, n)), result.lhs[n].format(), result.rhs[n].format()]
                for n in indices
            ]
            _csv_print(["n", "lhs", "rhs"], rows)
        else:
            for n in indices:
                print(f"z^{n}: lhs={result.lhs[n].format()} rhs={result.rhs[n].format()}")
            print(f"equal: {result.equal}")
    return 0 if result.equal else 2


def _run_tutte_grid(args) -> int:
    tuples = canonical_word_tuples(args.max_degree, args.max_l)
    failures = []
    checked = 0
    for words in tuples:
        split_color = words[-1].letters[-1].index
        for form in ("theorem", "corollary"):
            result = tutte_check(
                args.g, words, color=split_color, form=form, max_work=args.max_work
            )
            checked += 1
            if not result.equal:
                failures.append((form, [w.format() for w in words]))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "g": args.g,
                    "max_degree": args.max_degree,
                    "max_l": args.max_l,
                    "tuples": len(tuples),
                    "checks": checked,
                    "failures": [
                        {"form": form, "words": ws} for form, ws in failures
                    ],
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["g", "tuples", "checks", "failures"],
            [[args.g, len(tuples), checked, len(failures)]],
        )
    else:
        print(
            f"g={args.g}: {checked} checks over {len(tuples)} tuples, "
            f"{len(failures)} failure(s)"
        )
        for form, ws in failures:
            print(f"  FAILED [{form}]: {ws}")
    return 0 if not failures else 2


def _cmd_hurwitz_check(args) -> int:
    words = _words(args.words)
    via_hurwitz = hurwitz_reduction(args.g, words, max_work=args.max_work)
    direct = genus_value(args.g, words, threads=args.threads, max_work=args.max_work)
    equal = via_hurwitz == direct
    if args.format == "json":
        print(
            json.dumps(
                {
                    "g": args.g,
                    "equal": equal,
                    "hurwitz": via_hurwitz.to_json(),
                    "direct": direct.to_json(),
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["side", "value"],
            [
                ["hurwitz", via_hurwitz.format()],
                ["direct", direct.format()],
                ["equal", equal],
            ],
        )
    else:
        print(f"hurwitz: {via_hurwitz.format()}")
        print(f"direct : {direct.format()}")
        print(f"equal  : {equal}")
    return 0 if equal else 2


def _cmd_bounds_check(args) -> int:
    words = _words(args.words)
    q_words = tuple(parse_word(q) for q in (args.q or []))
    if args.n:
        n = tuple(int(x) for x in args.n.split(","))
    else:
        n = (0,) * len(q_words)
    lhs, rhs, holds = bounds_check(args.g, len(words), n, words, q_words)
    radius = (
        str(formal_radius(len(q_words), max(q.degree() for q in q_words)))
        if q_words
        else None
    )
    if args.format == "json":
        print(
            json.dumps(
                {
                    "g": args.g,
                    "l": len(words),
                    "n": list(n),
                    "lhs": str(lhs),
                    "rhs": str(rhs),
                    "holds": holds,
                    "formal_radius": radius,
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["lhs", "rhs", "holds", "formal_radius"],
            [[str(lhs), str(rhs), holds, radius or ""]],
        )
    else:
        print(f"lhs: {lhs}")
        print(f"rhs: {rhs}")
        print(f"holds: {holds}")
        if radius is not None:
            print(f"formal radius (lower bound): {radius}")
    return 0 if holds else 2


def _cmd_master_check(args) -> int:
    P1 = parse_word(args.word1)
    P2 = parse_word(args.word2)
    result = master_operator_check(P1, P2, max_work=args.max_work)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "equal": result.equal,
                    "lhs": result.lhs.to_json(),
                    "rhs": result.rhs.to_json(),
                },
                sort_keys=True,
            )
        )
    elif args.format == "csv":
        _csv_print(
            ["side", "value"],
            [
                ["lhs", result.lhs.format()],
                ["rhs", result.rhs.format()],
                ["equal", result.equal],
            ],
        )
    else:
        print(f"lhs: {result.lhs.format()}")
        print(f"rhs: {result.rhs.format()}")
        print(f"equal: {result.equal}")
    return 0 if result.equal else 2


def _cmd_mc_verify(args) -> int:
    words = _words(args.word)
    if args.matrices:
        with open(args.matrices, "r", encoding="utf-8") as fh:
            A = MatrixTuple.from_json(json.load(fh))
        if A.N != args.n:
            raise ValueError(f"--n {args.n} disagrees with matrices file N={A.N}")
    else:
        needed = {
            ltr.index
            for w in words
            for ltr in w.letters
            if ltr.kind in ("a", "a*")
        }
        if needed:
            raise ValueError(
                "words use deterministic letters "
                + ", ".join(f"a{j}" for j in sorted(needed))
                + "; provide --matrices"
            )
        A = MatrixTuple(args.n, {})
    if args.target is not None:
        re_s, _, im_s = args.target.partition(",")
        target = complex(float(re_s), float(im_s or 0))
    else:
        exact = cumulant_haar(
            words, args.n, threads=args.threads, max_work=args.max_work
        )
        target = evaluate_trace_expression(exact, A.A, args.n)
    report = empirical_joint_cumulant(
        words, None, A, args.samples, args.seed, target=target
    )
    payload = report.to_json()
    payload["words"] = [w.format() for w in words]
    payload["N"] = args.n
    payload["seed"] = args.seed
    within = bool(report.sigma_distance <= args.sigma)
    payload["within_tolerance"] = within
    if args.format == "csv":
        _csv_print(
            ["estimate_re", "estimate_im", "stderr", "samples", "target_re",
             "target_im", "sigma_distance", "within_tolerance"],
            [[report.estimate.real, report.estimate.imag, report.stderr,
              report.samples, target.real, target.imag, report.sigma_distance,
              within]],
        )
    else:
        print(json.dumps(payload, sort_keys=True))
    return 0 if within else 2


# --------------------------------------------------------------------------
# parser assembly
# --------------------------------------------------------------------------


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--format",
        choices=["json", "csv", "pretty"],
        default="pretty",
        help="output format (default: pretty)",
    )
    common.add_argument(
        "--threads",
        type=int,
        default=max(1, os.cpu_count() or 1),
        help="worker threads for permutation sums (output is independent of it)",
    )
    common.add_argument(
        "--max-work",
        type=int,
        default=None,
        help="cap on the number of sign-compatible permutations iterated; "
        "exceeding it is an error",
    )

    parser = _Parser(
        prog="haarmaps",
        description="Exact Haar-unitary moments, genus coefficients, map "
        "enumeration, and Monte Carlo verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wg", parents=[common], help="exact Weingarten value")
    p.add_argument("--q", type=int, required=True, help="number of letter pairs")
    p.add_argument("--n", type=int, required=True, help="matrix dimension N")
    p.add_argument(
        "--class", dest="cls", required=True, help="cycle type, e.g. '2+1'"
    )
    p.set_defaults(func=_cmd_wg)

    p = sub.add_parser(
        "moment", parents=[common], help="exact joint moment of traces"
    )
    p.add_argument("--n", type=int, required=True, help="matrix dimension N")
    p.add_argument("words", nargs="+", help="one word per trace factor")
    p.set_defaults(func=_cmd_moment)

    p = sub.add_parser(
        "cumulant", parents=[common], help="exact joint cumulant of traces"
    )
    p.add_argument("--n", type=int, required=True, help="matrix dimension N")
    p.add_argument("words", nargs="+", help="one word per trace factor")
    p.set_defaults(func=_cmd_cumulant)

    p = sub.add_parser(
        "genus-coeff",
        parents=[common],
        help="genus-g coefficient of the 1/N² expansion (N-free)",
    )
    p.add_argument("--g", type=int, required=True, help="genus")
    p.add_argument("words", nargs="+", help="one word per trace factor")
    p.set_defaults(func=_cmd_genus_coeff)

    p = sub.add_parser(
        "enumerate-maps", parents=[common], help="enumerate maps of unitary type"
    )
    p.add_argument("--labels", type=int, required=True, help="number of labels")
    p.add_argument("--eps", required=True, help="sign string, e.g. '+-+-'")
    p.add_argument("--rho", required=True, help="white permutation, e.g. '(1 2)(3 4)'")
    p.add_argument("--colors", default=None, help="comma list of per-label colors")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--r", type=int, default=None, help="number of black vertices")
    group.add_argument("--genus", type=int, default=None, help="fix the genus")
    p.add_argument(
        "--connected", action="store_true", help="keep connected maps only"
    )
    p.set_defaults(func=_cmd_enumerate_maps)

    p = sub.add_parser(
        "hurwitz", parents=[common], help="monotone triple Hurwitz numbers"
    )
    p.add_argument("--m", type=int, required=True, help="symmetric group degree")
    p.add_argument("--rho", required=True, help="cycle type, e.g. '2+1'")
    p.add_argument("--gamma", required=True, help="cycle type or 'id'")
    p.add_argument("--sigma", required=True, help="cycle type, e.g. '3'")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--r", type=int, default=None, help="number of transpositions")
    group.add_argument("--g", type=int, default=None, help="genus")
    p.set_defaults(func=_cmd_hurwitz)

    p = sub.add_parser(
        "tutte-check",
        parents=[common],
        help="verify the induction identity on a tuple of words",
    )
    p.add_argument("--g", type=int, required=True, help="genus")
    p.add_argument(
        "--form",
        choices=["theorem", "corollary"],
        default="theorem",
        help="which formulation to check",
    )
    p.add_argument("--color", type=int, default=1, help="unitary color to split on")
    p.add_argument(
        "--potential",
        action="append",
        default=None,
        help="potential monomial (repeatable); switches to the series check",
    )
    p.add_argument(
        "--z-cap", type=int, default=1, help="series truncation order (with potential)"
    )
    p.add_argument(
        "--grid",
        action="store_true",
        help="check both forms over every canonical word tuple up to the caps",
    )
    p.add_argument(
        "--max-degree", type=int, default=4, help="grid cap on total unitary degree"
    )
    p.add_argument("--max-l", type=int, default=2, help="grid cap on tuple length")
    p.add_argument(
        "words", nargs="*", help="tuple of words; last must end in u<color>"
    )
    p.set_defaults(func=_cmd_tutte_check)

    p = sub.add_parser(
        "hurwitz-check",
        parents=[common],
        help="compare the Hurwitz reduction against direct enumeration",
    )
    p.add_argument("--g", type=int, required=True, help="genus")
    p.add_argument("words", nargs="+", help="alternated words")
    p.set_defaults(func=_cmd_hurwitz_check)

    p = sub.add_parser(
        "bounds-check", parents=[common], help="verify the coefficient norm bound"
    )
    p.add_argument("--g", type=int, required=True, help="genus")
    p.add_argument("--n", default=None, help="comma multi-index, e.g. '1,0'")
    p.add_argument(
        "--q", action="append", default=None, help="potential monomial (repeatable)"
    )
    p.add_argument("words", nargs="+", help="argument words")
    p.set_defaults(func=_cmd_bounds_check)

    p = sub.add_parser(
        "master-check",
        parents=[common],
        help="verify the planar master-operator identity on a pair of words",
    )
    p.add_argument("word1")
    p.add_argument("word2")
    p.set_defaults(func=_cmd_master_check)

    p = sub.add_parser(
        "mc-verify",
        parents=[common],
        help="Monte Carlo estimate vs the exact prediction",
    )
    p.add_argument(
        "--word", action="append", required=True, help="word (repeat for cumulants)"
    )
    p.add_argument("--n", type=int, required=True, help="matrix dimension N")
    p.add_argument("--samples", type=int, default=10000, help="sample count")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--matrices", default=None, help="JSON file with matrices")
    p.add_argument(
        "--target", default=None, help="override target as 're,im' (default: exact)"
    )
    p.add_argument(
        "--sigma", type=float, default=4.0, help="tolerance in standard errors"
    )
    p.set_defaults(func=_cmd_mc_verify)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        ValueError,
        DeterministicWordError,
        AlternationError,
        WeingartenRegimeError,
        EnumerationBudgetError,
        KeyError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
