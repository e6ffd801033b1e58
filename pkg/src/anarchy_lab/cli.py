"""Command-line front end: generate, validate, analyze and simulate.

Subcommands: gen, check, pne, poa, bounds, search, lll. Every run is fully
determined by its arguments, input files and seeds; numeric output uses
full-precision reprs for values and 6 significant digits in tables, so
outputs are byte-stable. Exit codes: 0 success, 2 validation failure,
3 size-cap refusal, 4 bound violation detected.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import equilibrium as eq
from . import instances as inst
from . import learning
from .game import (
    Compromise,
    GameInstance,
    ModelIncompleteError,
    SizeCapError,
    UnsupportedUtilityError,
    ValidationError,
    Utility,
    check_submodular,
    check_vug,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SIZE_CAP = 3
EXIT_BOUND_VIOLATION = 4


def _value(x: float) -> str:
    return repr(float(x))


def _cell(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _profile_json(profile):
    if profile is None:
        return None
    return [sorted(a) for a in profile]


def _print_table(headers, rows, out=None):
    out = out if out is not None else sys.stdout
    cells = [[_cell(h) for h in headers]] + [[_cell(c) for c in row] for row in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(headers))]
    for idx, row in enumerate(cells):
        line = "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row))
        print(line.rstrip(), file=out)
        if idx == 0:
            print("  ".join("-" * w for w in widths), file=out)


def _read_instance(path: str) -> GameInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return inst.parse(fh.read())


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_labels(spec: Optional[str], k: int):
    """'blind' applies to every compromised agent; or a comma list of k."""
    if spec is None:
        return None
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if len(parts) == 1 and k != 1:
        parts = parts * k
    return tuple(Compromise(p) for p in parts)


def _parse_k_range(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def _parse_temps(spec: str):
    """Comma list, or start:stop:count with an optional (log)/(lin) suffix."""
    spec = spec.strip()
    if ":" in spec:
        mode = "log"
        if spec.endswith("(log)"):
            spec = spec[: -len("(log)")]
        elif spec.endswith("(lin)"):
            spec = spec[: -len("(lin)")]
            mode = "lin"
        start_s, stop_s, count_s = spec.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
        if count < 2:
            return [start]
        if mode == "log":
            if start <= 0 or stop <= 0:
                raise ValueError("log-spaced temperatures must be positive")
            import math

            la, lb = math.log(start), math.log(stop)
            return [math.exp(la + (lb - la) * i / (count - 1)) for i in range(count)]
        return [start + (stop - start) * i / (count - 1) for i in range(count)]
    return [float(t) for t in spec.split(",") if t]


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    params = inst.FamilyParams(
        family=args.family,
        n=args.n,
        k=args.k,
        labels=_parse_labels(args.labels, args.k if args.family != "fig1" else 3) or (),
        eps=args.eps,
        delta=args.delta,
        seed=args.seed,
        values=tuple(float(v) for v in args.values.split(",")) if args.values else (),
        max_resources=args.max_resources,
        max_actions=args.max_actions,
    )
    game = inst.gen_family(params)
    _write_text(args.out, inst.serialize(game))
    return EXIT_OK


def cmd_check(args) -> int:
    game = _read_instance(args.instance)
    sub = check_submodular(game, cap=args.cap)
    vug = check_vug(game, cap=args.cap)
    print(f"agents: {game.n}  resources: {game.num_resources}")
    print(f"welfare submodular/nondecreasing/normalized: {_cell(sub.ok)}")
    print(f"utilities dominate marginal contributions:   {_cell(vug.utility_dominates_marginal)}")
    print(f"utility sums bounded by welfare:             {_cell(vug.utility_sum_bounded)}")
    print(f"utility sums tight everywhere:               {_cell(vug.utility_sum_tight)}")
    failure = sub.failure or vug.failure
    if failure is not None:
        print(f"violation [{failure.kind}]: {failure.message}")
        if failure.witness:
            print(f"witness: {json.dumps(failure.witness, sort_keys=True)}")
    return EXIT_OK if (sub.ok and vug.ok) else EXIT_VALIDATION


def cmd_pne(args) -> int:
    game = _read_instance(args.instance)
    eqs = eq.enumerate_pne(game, cap=args.cap)
    rows = [
        (idx, w, json.dumps(_profile_json(p)))
        for idx, (p, w) in enumerate(zip(eqs.profiles, eqs.welfares))
    ]
    print(f"pure Nash equilibria: {len(rows)}")
    if rows:
        _print_table(("#", "welfare", "profile"), rows)
    if args.json:
        doc = {
            "count": len(rows),
            "equilibria": [
                {"profile": _profile_json(p), "welfare": w}
                for p, w in zip(eqs.profiles, eqs.welfares)
            ],
        }
        _write_text(args.json, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _poa_doc(report: eq.PoAReport) -> dict:
    return {
        "opt_welfare": report.opt_welfare,
        "opt_profile": _profile_json(report.opt_profile),
        "worst_ne_welfare": report.worst_ne_welfare,
        "worst_ne_profile": _profile_json(report.worst_ne_profile),
        "ratio": report.ratio,
        "theoretical_bound": report.theoretical_bound,
        "bound_satisfied": report.bound_satisfied,
        "pne_count": report.pne_count,
    }


def cmd_poa(args) -> int:
    game = _read_instance(args.instance)
    report = eq.instance_poa(game, cap=args.cap)
    print(f"optimal welfare:     {_value(report.opt_welfare)}")
    print(f"equilibria found:    {report.pne_count}")
    if report.ratio is None:
        print("anarchy ratio:       undefined (no equilibrium or zero optimum)")
    else:
        print(f"worst NE welfare:    {_value(report.worst_ne_welfare)}")
        print(f"anarchy ratio:       {_value(report.ratio)}")
    print(f"theoretical bound:   {_value(report.theoretical_bound)}")
    print(f"bound satisfied:     {_cell(report.bound_satisfied)}")
    if args.json:
        _write_text(args.json, json.dumps(_poa_doc(report), indent=2) + "\n")
    if report.bound_satisfied is False:
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def _label_mixes(family: str, k: int, forced):
    if forced is not None:
        mix = forced if len(forced) == k else forced[:1] * k
        if len(mix) != k:
            raise ValueError(f"need {k} labels for k={k}")
        return [mix]
    if k == 0 or family == "mc_noblind":
        return [()] if k == 0 else [(Compromise.ISOLATED,) * k]
    mixes = [(Compromise.BLIND,) * k, (Compromise.ISOLATED,) * k]
    if k >= 2:
        mixes.append(
            tuple(
                Compromise.BLIND if i % 2 == 0 else Compromise.ISOLATED
                for i in range(k)
            )
        )
    return mixes


def _gen_for_bounds(family: str, n: int, k: int, labels, eps: float, delta: float):
    # the families take blind/isolated labels; other mixes (e.g. disabled)
    # are applied by relabeling afterwards
    gen_labels = labels if all(
        l in (Compromise.BLIND, Compromise.ISOLATED) for l in labels
    ) else None
    if family == "k_blind":
        game = inst.gen_k_blind(n, k, eps, delta, gen_labels or None)
    elif family == "mc_blind":
        game = inst.gen_mc_blind(n, k, eps, gen_labels or None)
    elif family == "mc_noblind":
        game = inst.gen_mc_noblind(n, k, eps)
    elif family == "sim":
        game = inst.gen_sim_game(n, k, eps, gen_labels or None)
    else:
        raise ValueError(f"family {family!r} has no bounds sweep")
    if labels and gen_labels is None:
        import dataclasses

        compromise = list(labels) + [Compromise.NORMAL] * (n - k)
        game = dataclasses.replace(game, compromise=tuple(compromise))
    return game


def _chains_ok(game: GameInstance, report: eq.PoAReport) -> Optional[bool]:
    if report.ratio is None or game.agents_with(Compromise.DISABLED):
        return None
    certs = []
    certs.append(
        eq.check_bound_chain_general(
            game, report.worst_ne_profile, report.opt_profile, validate=False
        )
    )
    if all(u is Utility.MARGINAL_CONTRIBUTION for u in game.utilities) and game.agents_with(
        Compromise.BLIND
    ):
        certs.append(
            eq.check_bound_chain_mc(
                game, report.worst_ne_profile, report.opt_profile, validate=False
            )
        )
    return all(c.holds for c in certs)


def cmd_bounds(args) -> int:
    spec = args.k if args.k is not None else args.sweep
    if spec is None:
        raise ValueError("one of --k or --sweep is required")
    if spec.startswith("k="):
        spec = spec[2:]
    ks = _parse_k_range(spec)
    forced = _parse_labels(args.labels, max(ks)) if args.labels else None
    rows = []
    docs = []
    any_violation = False
    for k in ks:
        for labels in _label_mixes(args.family, k, forced):
            game = _gen_for_bounds(args.family, args.n, k, labels, args.eps, args.delta)
            report = eq.instance_poa(game, cap=args.cap)
            chains = _chains_ok(game, report)
            mix = ",".join(l.value for l in labels) if labels else "-"
            rows.append(
                (
                    k,
                    mix,
                    report.ratio,
                    report.theoretical_bound,
                    report.bound_satisfied,
                    chains,
                )
            )
            docs.append(
                {
                    "k": k,
                    "labels": [l.value for l in labels],
                    "report": _poa_doc(report),
                    "chains_hold": chains,
                }
            )
            if report.bound_satisfied is False or chains is False:
                any_violation = True
    _print_table(
        ("k", "labels", "ratio", "bound", "satisfied", "chains"), rows
    )
    if args.json:
        _write_text(args.json, json.dumps(docs, indent=2) + "\n")
    return EXIT_BOUND_VIOLATION if any_violation else EXIT_OK


def cmd_search(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    config = eq.SearchConfig(
        n=int(raw["n"]),
        k=int(raw.get("k", 0)),
        labels=tuple(Compromise(l) for l in raw.get("labels", [])),
        utility_class=eq.UtilityClass(raw.get("utility_class", "vug")),
        value_grid=tuple(float(v) for v in raw["value_grid"]),
        budget=int(raw.get("budget", 200)),
        seed=int(raw.get("seed", 0)),
        max_resources=int(raw.get("max_resources", 4)),
        max_actions=int(raw.get("max_actions", 3)),
    )
    game, report = eq.worst_case_search(config)
    print(f"candidates examined: {config.budget}")
    print(f"worst ratio found:   {_value(report.ratio)}")
    print(f"theoretical bound:   {_value(report.theoretical_bound)}")
    print(f"bound satisfied:     {_cell(report.bound_satisfied)}")
    if args.out:
        _write_text(args.out, inst.serialize(game))
    if args.report:
        _write_text(args.report, json.dumps(_poa_doc(report), indent=2) + "\n")
    if report.bound_satisfied is False:
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_lll(args) -> int:
    game = _read_instance(args.instance)
    temps = _parse_temps(args.temps)
    a0 = None
    if args.init == "worst-ne":
        eqs = eq.enumerate_pne(game, cap=args.cap)
        worst = eqs.worst()
        if worst is None:
            print("no equilibrium to start from", file=sys.stderr)
            return EXIT_VALIDATION
        a0 = worst[1]
    result = learning.temperature_sweep(
        game,
        temps,
        steps=args.steps,
        trials=args.trials,
        seed=args.seed,
        a0=a0,
        burn_in=args.burn_in,
        workers=args.workers,
    )
    if args.out:
        _write_text(args.out, result.to_csv())
    rows = [
        (T, result.pooled_mean(T))
        for T in result.temperatures()
    ]
    _print_table(("temperature", "mean_welfare"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anarchy-lab",
        description=(
            "Resource-allocation games with blind, isolated or disabled "
            "agents: generation, validation, equilibrium analysis, "
            "worst-case bounds and log-linear learning."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a canonical instance family member")
    p.add_argument("--family", required=True, choices=inst.FAMILY_NAMES)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--labels", help="compromise label, or comma list of k labels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--values",
        default="1.0,0.7,0.3,0.4,2.0,0.8",
        help="six comma-separated resource values (fig1 family)",
    )
    p.add_argument("--max-resources", type=int, default=4)
    p.add_argument("--max-actions", type=int, default=4)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="validate an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=250_000)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("pne", help="enumerate all pure Nash equilibria")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=eq.DEFAULT_ENUM_CAP)
    p.add_argument("--json", help="write a JSON report here")
    p.set_defaults(func=cmd_pne)

    p = sub.add_parser("poa", help="anarchy ratio against the class bound")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=eq.DEFAULT_ENUM_CAP)
    p.add_argument("--json", help="write a JSON report here")
    p.set_defaults(func=cmd_poa)

    p = sub.add_parser(
        "bounds", help="sweep a family over k and compare with the bounds"
    )
    p.add_argument("--family", required=True, choices=("k_blind", "mc_blind", "mc_noblind", "sim"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", help="single value or range lo..hi")
    p.add_argument("--sweep", help="alias for --k, accepts k=lo..hi")
    p.add_argument("--labels", help="force one label mix (e.g. 'disabled')")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--cap", type=int, default=eq.DEFAULT_ENUM_CAP)
    p.add_argument("--json", help="write a JSON report here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("search", help="randomized worst-case instance search")
    p.add_argument("--config", required=True, help="JSON search configuration")
    p.add_argument("--out", help="write the worst instance here")
    p.add_argument("--report", help="write its JSON report here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("lll", help="log-linear learning temperature sweep")
    p.add_argument("--instance", required=True)
    p.add_argument("--temps", required=True, help="list 0.001,0.01 or start:stop:count(log)")
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    p.add_argument("--init", choices=("empty", "worst-ne"), default="empty")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--cap", type=int, default=eq.DEFAULT_ENUM_CAP)
    p.add_argument("--out", help="write the CSV here")
    p.set_defaults(func=cmd_lll)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (
        inst.ParseError,
        ValidationError,
        UnsupportedUtilityError,
        ModelIncompleteError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
