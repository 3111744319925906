"""Command-line front end: ``endspace <subcommand> --source <spec> --depth <n>``."""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path

from . import ends as E
from . import quotient as Q
from . import tours as T
from .errors import BadParams, Certainty, EndspaceError, count_json
from .sources import Source, load_source, solidity_check

SUBCOMMANDS = (
    "info",
    "quotients",
    "ends",
    "limit-edges",
    "basic-open",
    "necklace",
    "rank",
    "check-euler",
    "euler-tour",
    "span-walk",
    "verify",
)


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    value = _non_negative(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endspace",
        description="Finite approximations of the end space of infinite digraphs.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--source", required=True, help="path to a source file, or builtin:<name>[:k=v,...]")
    parser.add_argument("--depth", required=True, type=_non_negative, help="number of enumerated vertices to separate")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--dot", metavar="DIR", help="write levelN.dot files (quotients)")
    parser.add_argument("--r-max", type=_non_negative, default=3, help="largest rank tried (rank)")
    parser.add_argument("--sep-bound", type=_non_negative, default=2, help="extra separator vertices per rank step")
    parser.add_argument("--beads", type=_positive, default=5, help="beads to find (necklace)")
    parser.add_argument("--tour-limit", type=_positive, default=64, help="Euler tours tried per level (euler-tour)")
    parser.add_argument("--U", dest="sets", action="append", metavar="NAME",
                        help="designated vertex set (repeatable); default V")
    parser.add_argument("--end", type=_non_negative, default=0, help="end index (basic-open)")
    parser.add_argument("--level", type=_non_negative, help="level for basic-open (default: depth)")
    parser.add_argument("--check", choices=("system", "euler-tour", "span-walk", "necklace"), default="system",
                        help="what verify re-checks")
    return parser


def _source_certainty(source: Source) -> Certainty:
    return Certainty.EXACT if source.exact else Certainty.PROVISIONAL


# -- subcommands; each returns (json object, text lines) ----------------------


def cmd_info(source: Source, args) -> tuple[dict, list[str]]:
    prefix = source.prefix(args.depth)
    g = source.truncation(args.depth)
    empty = solidity_check(source, (), args.depth)
    full = solidity_check(source, prefix, args.depth)
    out = {
        "source": source.name,
        "period": source.period,
        "finite_size": source.size,
        "custom_chain": source.has_custom_chain,
        "declared_solid": source.solid,
        "sets": list(source.designated_sets()),
        "prefix": list(prefix),
        "truncation_edges": len(g.edges),
        "solidity": [empty.to_json(), full.to_json()],
        "certainty": Certainty.weakest(_source_certainty(source), empty.certainty, full.certainty).value,
    }
    text = [
        f"source {source.name} (period {source.period}, {'finite, ' + str(source.size) + ' vertices' if source.size is not None else 'infinite'})",
        f"designated sets: {', '.join(out['sets'])}",
        f"first {len(prefix)} vertices: {' '.join(prefix)}",
        f"edges among them: {len(g.edges)}",
        empty.describe(),
        full.describe(),
    ]
    return out, text


def cmd_quotients(source: Source, args) -> tuple[dict, list[str]]:
    levels = Q.build_chain(source, args.depth)
    verdict = Q.verify_levels(levels)
    if args.dot:
        target = Path(args.dot)
        target.mkdir(parents=True, exist_ok=True)
        for lv in levels:
            (target / f"level{lv.n}.dot").write_text(Q.export_dot(lv), encoding="utf-8")
    certainty = Certainty.weakest(*(lv.certainty for lv in levels))
    out = {
        "levels": [lv.to_json() for lv in levels],
        "system": verdict.to_json(),
        "certainty": certainty.value,
    }
    text = []
    for lv in levels:
        parts = []
        for c in lv.classes:
            parts.append(c.id if c.kind == "singleton" else f"{c.id}[{count_json(c.size)}]")
        text.append(f"level {lv.n}: {len(lv.classes)} classes ({' '.join(parts)}), {len(lv.graph.edges)} edges")
        for e in lv.graph.edges:
            text.append(f"  {e.id}: {e.tail} -> {e.head}{' (inf)' if e.kind.value == 'quotient' else ''}")
    text.append("inverse system: " + ("ok" if verdict.ok else f"{verdict.violation} at level {verdict.index}"))
    return out, text


def _thread_text(t) -> str:
    if isinstance(t, E.EndThread):
        return f"end {t.index}: " + " > ".join(t.components)
    ends = lambda p: f"end {p[1]}" if p[0] == "end" else f"vertex {p[1]}"
    steps = " | ".join(ref for _, ref in t.levels)
    return f"limit edge {ends(t.tail)} -> {ends(t.head)}: {steps}"


def cmd_ends(source: Source, args) -> tuple[dict, list[str]]:
    space = E.analyse_ends(source, args.depth)
    text = [
        f"{len(space.ends)} end(s), {len(space.limit_edges)} limit edge(s) at depth {space.depth} ({space.certainty.value})",
        "ends per level: " + " ".join(map(str, space.ends_per_level())),
    ]
    text += [_thread_text(t) for t in space.ends + space.limit_edges]
    return space.to_json(), text


def cmd_limit_edges(source: Source, args) -> tuple[dict, list[str]]:
    space = E.analyse_ends(source, args.depth)
    out = {
        "limit_edges": len(space.limit_edges),
        "threads": [t.to_json() for t in space.limit_edges],
        "certainty": space.certainty.value,
    }
    text = [f"{len(space.limit_edges)} limit edge(s) at depth {space.depth} ({space.certainty.value})"]
    text += [_thread_text(t) for t in space.limit_edges]
    return out, text


def cmd_basic_open(source: Source, args) -> tuple[dict, list[str]]:
    n = args.depth if args.level is None else args.level
    b = E.basic_open(source, args.end, n, args.depth)
    text = [
        f"end {args.end} at level {b.n}: component {b.component} (from {b.representative})",
        f"ends inside: {', '.join(map(str, b.ends)) or 'none'}",
        f"limit edges inside: {', '.join(map(str, b.limit_edges)) or 'none'}",
        "boundary: " + (", ".join(f"{i} ({t} -> {h})" for i, t, h, _ in b.boundary) or "none"),
    ]
    return b.to_json(), text


def cmd_necklace(source: Source, args) -> tuple[dict, list[str]]:
    sets = E.resolve_sets(source, args.sets)
    found = E.necklace_search(source, sets, args.beads, args.depth)
    certainty = _source_certainty(source)
    if found is None:
        out = {"found": False, "sets": [u.name for u in sets], "certainty": certainty.value}
        return out, [f"no necklace with {args.beads} beads attached to {', '.join(u.name for u in sets)} within depth {args.depth}"]
    verdict = E.verify_necklace(source, found, found.depth, sets)
    out = {"found": True, "necklace": found.to_json(), "verified": verdict.ok, "certainty": certainty.value}
    text = [f"necklace with {len(found.beads)} beads ({'verified' if verdict.ok else 'NOT verified'})"]
    for i, bead in enumerate(found.beads):
        text.append(f"  bead {i}: {{{', '.join(bead)}}} meets {', '.join(found.attachment[i]) or 'nothing'}")
    return out, text


def cmd_rank(source: Source, args) -> tuple[dict, list[str]]:
    sets = E.resolve_sets(source, args.sets)
    result = E.rank_search(source, sets, args.r_max, args.sep_bound, args.depth)
    if result.rank is None:
        text = [f"no rank up to {args.r_max} ({result.certainty.value})"]
    else:
        sep = result.witness.get("separator", [])
        text = [f"rank {result.rank} with X = {{{', '.join(sep)}}} ({result.certainty.value})"]
    return result.to_json(), text


def cmd_check_euler(source: Source, args) -> tuple[dict, list[str]]:
    check = T.check_euler(source, args.depth)
    text = ["ok: no obstruction up to depth " + str(args.depth)] if check.ok else [check.witness.describe()]
    text[0] += f" ({check.certainty.value})"
    return check.to_json(), text


def _thread_output(thread, verdict) -> tuple[dict, list[str]]:
    out = thread.to_json()
    out["verified"] = verdict.ok
    text = [
        f"{thread.kind} thread to depth {thread.depth}"
        + ("" if thread.complete else f" (requested {thread.requested}; no compatible extension found)")
        + f", {'verified' if verdict.ok else 'NOT verified'} ({thread.certainty.value})"
    ]
    for i, w in enumerate(thread.walks):
        text.append(f"  level {thread.first + i}: " + " ".join(w.to_list()))
    return out, text


def cmd_euler_tour(source: Source, args) -> tuple[dict, list[str]]:
    thread = T.lift_euler(source, args.depth, tour_limit=args.tour_limit)
    return _thread_output(thread, T.verify_thread(thread))


def cmd_span_walk(source: Source, args) -> tuple[dict, list[str]]:
    thread = T.span_walk(source, args.depth)
    return _thread_output(thread, T.verify_thread(thread))


def cmd_verify(source: Source, args) -> tuple[dict, list[str]]:
    if args.check == "system":
        levels = Q.build_chain(source, args.depth)
        verdict = Q.verify_levels(levels)
        certainty = Certainty.weakest(*(lv.certainty for lv in levels))
    elif args.check in ("euler-tour", "span-walk"):
        thread = (
            T.lift_euler(source, args.depth, tour_limit=args.tour_limit)
            if args.check == "euler-tour" else T.span_walk(source, args.depth)
        )
        verdict, certainty = T.verify_thread(thread), thread.certainty
    else:
        sets = E.resolve_sets(source, args.sets)
        found = E.necklace_search(source, sets, args.beads, args.depth)
        if found is None:
            raise BadParams("no necklace found to verify")
        verdict, certainty = E.verify_necklace(source, found, found.depth, sets), _source_certainty(source)
    out = {"check": args.check, "verdict": verdict.to_json(), "certainty": certainty.value}
    if verdict.ok:
        text = [f"{args.check}: ok ({certainty.value})"]
    else:
        text = [f"{args.check}: {verdict.violation} at {verdict.index} {verdict.detail}"]
    return out, text


HANDLERS = {
    "info": cmd_info,
    "quotients": cmd_quotients,
    "ends": cmd_ends,
    "limit-edges": cmd_limit_edges,
    "basic-open": cmd_basic_open,
    "necklace": cmd_necklace,
    "rank": cmd_rank,
    "check-euler": cmd_check_euler,
    "euler-tour": cmd_euler_tour,
    "span-walk": cmd_span_walk,
    "verify": cmd_verify,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        source = load_source(args.source)
        out, text = HANDLERS[args.subcommand](source, args)
    except EndspaceError as exc:
        print(f"endspace: {exc}", file=stderr)
        return exc.exit_code
    except RecursionError:
        print("endspace: search too deep for this depth", file=stderr)
        return 3
    except Exception as exc:  # anything else is a bug
        print(f"endspace: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return 4
    if args.format == "json":
        stdout.write(json.dumps(out, separators=(",", ":")) + "\n")
    else:
        stdout.write("\n".join(text) + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
