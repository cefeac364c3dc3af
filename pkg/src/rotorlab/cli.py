"""Command-line front end.

Subcommands: goldbug, rotor, sandpile, idla, discrepancy, verify.  Every
stats output echoes the full effective configuration; seeds default to 0 and
are always recorded.  "-" as an output path means standard output.  Exit
codes: 0 success, 1 invariant violation or simulation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import discrepancy as dc
from . import goldbug as gb
from . import idla, render, rotor, sandpile, verify
from .errors import RotorlabError
from .sandpile import SandVariant


def _write_text(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _emit_json(obj: dict, path: str) -> None:
    _write_text(json.dumps(obj, indent=2) + "\n", path)


def _order_arg(value: str) -> tuple[str, int]:
    if value == "systematic":
        return ("systematic", 0)
    if value.startswith("random:"):
        try:
            return ("random", int(value.split(":", 1)[1]))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        "order must be 'systematic' or 'random:<seed>'")


def _rotor_init_arg(value: str) -> tuple[str, int]:
    if value == "constant":
        return ("constant", 0)
    if value.startswith("random:"):
        try:
            return ("random", int(value.split(":", 1)[1]))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        "rotor-init must be 'constant' or 'random:<seed>'")


def _cmd_goldbug(args) -> int:
    s = gb.GoldbugSystem()
    gb.run_bugs(args.bugs, s)
    out = {"config": {"command": "goldbug", "bugs": args.bugs}}
    out.update(gb.report(s))
    _emit_json(out, args.report)
    return 0


def _cmd_rotor(args) -> int:
    config = {"command": "rotor", "bugs": args.bugs,
              "mode": "swarm" if args.swarm_seed is not None else "sequential",
              "swarm_seed": args.swarm_seed}
    if args.swarm_seed is not None:
        blob = rotor.run_swarm(args.bugs, args.swarm_seed)
        st = rotor.stats(blob)
    else:
        blob, st = rotor.run(args.bugs)
    wrote = False
    if args.image:
        render.write_output(render.render_rotor(blob), args.image)
        wrote = True
    if args.cards:
        _write_text(rotor.cards_from_blob(blob).to_text(), args.cards)
        wrote = True
    if args.stats or not wrote:
        _emit_json({"config": config, **st.to_dict()}, args.stats or "-")
    return 0


def _cmd_sandpile(args) -> int:
    variant = SandVariant(args.variant)
    order, seed = args.order
    config = {"command": "sandpile", "grains": args.grains,
              "variant": variant.value, "order": order, "seed": seed}
    g = sandpile.stabilize(args.grains, variant, order, seed=seed)
    if args.image:
        render.write_output(render.render_sandpile(g), args.image)
    ever = int(g.ever.sum())
    _emit_json({
        "config": config,
        "total_grains": g.total_grains(),
        "ever_occupied_sites": ever,
        "max_height": int(g.heights.max()),
        "topples": getattr(g, "topples", None),
    }, args.stats or "-")
    return 0


def _cmd_idla(args) -> int:
    config = {"command": "idla", "bugs": args.bugs, "seed": args.seed,
              "cards": args.cards}
    if args.cards:
        with open(args.cards) as f:
            cards = rotor.CardStacks.from_text(f.read())
        res = idla.run_coupled(cards, args.bugs, args.seed)
        _emit_json({"config": config, **res.to_dict()}, args.stats or "-")
    else:
        blob = idla.run_idla(args.bugs, args.seed)
        rep = idla.roundness(blob)
        _emit_json({"config": config, **rep.to_dict()}, args.stats or "-")
    return 0


def _cmd_discrepancy(args) -> int:
    kind, seed = args.rotor_init
    config = {"command": "discrepancy", "dim": args.dim, "steps": args.steps,
              "rotor_init": kind, "seed": seed,
              "load": "1 bug at the origin"}
    load = {0: 1} if args.dim == 1 else {(0, 0): 1}
    field = dc.RotorField(args.dim, kind, value=0, seed=seed)
    trace = dc.max_discrepancy(dc.BugDistribution(args.dim, load), field,
                               args.steps)
    if args.trace:
        lines = ["# " + json.dumps(config) + "\n", "t,discrepancy\n"]
        lines += [f"{t},{trace[t]:.12g}\n" for t in range(len(trace))]
        _write_text("".join(lines), args.trace)
    _emit_json({
        "config": config,
        "max_discrepancy": float(trace.max()),
        "max_discrepancy_to_100": float(trace[:101].max()),
        "final_discrepancy": float(trace[-1]),
    }, "-")
    return 0


def _cmd_verify(args) -> int:
    results, ok = verify.run_level(args.level)
    for r in results:
        mark = "  ok  " if r.ok else " FAIL "
        line = f"[{mark}] {r.name}"
        if r.detail:
            line += f" — {r.detail}"
        print(line)
    print("verify:", "all checks passed" if ok else "CHECKS FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rotorlab",
        description="Deterministic rotor-routed lattice walk experiments")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("goldbug", help="run the 1D goldbug accumulator")
    g.add_argument("--bugs", type=int, required=True)
    g.add_argument("--report", default="-", metavar="PATH")
    g.set_defaults(func=_cmd_goldbug)

    r = sub.add_parser("rotor", help="grow a rotor-router blob")
    r.add_argument("--bugs", type=int, required=True)
    r.add_argument("--image", metavar="PATH")
    r.add_argument("--stats", metavar="PATH")
    r.add_argument("--cards", metavar="PATH")
    r.add_argument("--swarm-seed", type=int, default=None, metavar="S")
    r.set_defaults(func=_cmd_rotor)

    s = sub.add_parser("sandpile", help="stabilize a sandpile at the origin")
    s.add_argument("--grains", type=int, required=True)
    s.add_argument("--variant", choices=["greedy", "standard"],
                   required=True)
    s.add_argument("--image", metavar="PATH")
    s.add_argument("--stats", metavar="PATH")
    s.add_argument("--order", type=_order_arg, default=("systematic", 0),
                   metavar="systematic|random:S")
    s.set_defaults(func=_cmd_sandpile)

    i = sub.add_parser("idla", help="internal DLA, plain or card-coupled")
    i.add_argument("--bugs", type=int, required=True)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--cards", metavar="PATH",
                   help="card-stack file recorded from a rotor run; "
                        "switches to the coupled experiment")
    i.add_argument("--stats", metavar="PATH")
    i.set_defaults(func=_cmd_idla)

    d = sub.add_parser("discrepancy",
                       help="rotor vs expected random-walk evolution")
    d.add_argument("--dim", type=int, choices=[1, 2], required=True)
    d.add_argument("--steps", type=int, required=True)
    d.add_argument("--rotor-init", type=_rotor_init_arg,
                   default=("constant", 0), metavar="constant|random:S")
    d.add_argument("--trace", metavar="PATH")
    d.set_defaults(func=_cmd_discrepancy)

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--level", choices=["quick", "full", "slow"],
                   default="quick")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RotorlabError as exc:
        print(f"rotorlab: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"rotorlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
