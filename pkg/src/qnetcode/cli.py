"""Command-line front end: analyze, simulate, sweep and example."""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import catalog, codec, protocol, qsim
from .attacks import (build_copy_attack, build_pauli_attack, build_random_unitary_attack,
                      build_swap_attack)
from .netmodel import EdgeSets, NetworkError, ParseError, dump_network, load_network

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qnetcode", description="Secure quantum network coding from classical linear codes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, attacks_default):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--builtin", choices=sorted(catalog.CATALOG))
        src.add_argument("--network", help="JSON network description")
        p.add_argument("--q", type=int)
        p.add_argument("--n", type=int, help="size parameter for nsource builtins")
        p.add_argument("--protected", help="comma-separated protected edges (overrides the network's)")
        p.add_argument("--attacks", default=None,
                       help="none | all-singles | all-pairs | explicit list like '6,9;5' "
                            f"(default: the file's attacked set, else {attacks_default})")
        p.set_defaults(attacks_default=attacks_default)
        p.add_argument("--tol", type=_positive, default=protocol.SECURITY_TOL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument("--budget", type=int, help="amplitude budget override (default 2^26)")

    a = sub.add_parser("analyze", help="classical secrecy and recoverability verdicts")
    common(a, "all-singles")

    s = sub.add_parser("simulate", help="run the quantum protocol once per attack")
    common(s, "none")
    s.add_argument("--attack", action="append", default=[],
                   help="KIND:eJ[,eK] with KIND in none, copy, swap, pauli, inject, random[:SEED]")
    s.add_argument("--mode", choices=("mixture", "purified"), default="mixture")
    s.add_argument("--no-randomness", action="store_true", help="force b = 0 (negative control)")

    w = sub.add_parser("sweep", help="classical verdicts plus the quantum attack suite")
    common(w, "all-singles")
    w.add_argument("--suite", default="copy,swap,random:5")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--mode", choices=("mixture", "purified"), default="mixture")

    e = sub.add_parser("example", help="export a builtin network as JSON")
    e.add_argument("name", choices=sorted(catalog.CATALOG))
    e.add_argument("--q", type=int)
    e.add_argument("--n", type=int)
    e.add_argument("--out")
    return ap


def _load(args) -> tuple:
    if args.builtin:
        try:
            net, prot = catalog.load_builtin(args.builtin, args.q, args.n)
        except (catalog.IllegalFieldOrder, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        sets = EdgeSets.build(net, prot, ())
    else:
        net, sets = load_network(args.network)
        if args.q is not None and args.q != net.ctx.q:
            raise UsageError("--q conflicts with the network file's field")
    protected = sets.protected
    if args.protected is not None:
        protected = tuple(int(x.strip().lstrip("e")) for x in args.protected.split(",") if x.strip())
        try:
            sets = EdgeSets.build(net, protected, ())
        except NetworkError as exc:
            raise UsageError(str(exc)) from exc
    return net, sets.protected, sets.attacked


def _candidates(net, args, file_attacked) -> list[tuple[int, ...]]:
    sel = args.attacks
    if sel is None:
        if file_attacked:
            return [tuple(file_attacked)]
        sel = args.attacks_default
    try:
        cands = protocol.candidate_sets(net, sel)
    except ValueError as exc:
        raise UsageError(f"bad --attacks value {sel!r}") from exc
    for c in cands:
        for e in c:
            if e not in net.physical_edges:
                raise UsageError(f"e{e} is not a physical channel")
    return cands


def _parse_attack(ctx, spec: str):
    kind, _, edges = spec.partition(":")
    kind = kind.strip()
    seed = None
    if kind.startswith("random") and edges and not edges.lstrip().startswith("e"):
        # random:SEED:eJ
        seed_text, _, edges = edges.partition(":")
        seed = int(seed_text)
    try:
        ea = tuple(sorted(int(e.strip().lstrip("e")) for e in edges.split(",") if e.strip()))
    except ValueError as exc:
        raise UsageError(f"bad attack spec {spec!r}") from exc
    if kind == "none":
        return None, ()
    if not ea:
        raise UsageError(f"attack {spec!r} names no edges")
    h = len(ea)
    if kind == "copy":
        att = build_copy_attack(ctx, h)
    elif kind == "swap":
        att = build_swap_attack(ctx, h)
    elif kind == "pauli":
        att = build_copy_attack(ctx, h, x=1, z=1)
    elif kind == "inject":
        att = build_pauli_attack(ctx, h, x=1, z=1)
    elif kind == "random":
        att = build_random_unitary_attack(ctx, h, ctx.q, 0 if seed is None else seed)
    else:
        raise UsageError(f"unknown attack kind {kind!r}")
    return att, ea


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "attacks_default"}


def _emit(args, doc: dict, lines: list[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) if args.format == "machine" else "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _verdict_line(v: codec.Verdict) -> str:
    ea = ",".join(f"e{e}" for e in v.attacked) or "-"
    flag = "PASS" if v.ok else "FAIL"
    return f"{flag}  E_A={{{ea}}}  secure={v.secure}  recoverable={v.recoverable}"


def cmd_analyze(args) -> int:
    net, protected, file_attacked = _load(args)
    cands = _candidates(net, args, file_attacked)
    verdicts = [codec.analyze(net, ea, protected) for ea in cands]
    ok = all(v.ok for v in verdicts)
    M0 = codec.compute_m0(net)
    doc = {"schema_version": SCHEMA_VERSION, "command": "analyze", "config": _config(args),
           "q": net.ctx.q, "protected_edges": list(protected),
           "multiple_unicast": codec.is_multiple_unicast(net, M0),
           "verdicts": [v.to_doc() for v in verdicts], "passed": ok}
    lines = [f"network q={net.ctx.q} N={net.N} n={net.n} n'={net.n_rand}  E_P={list(protected)}"]
    lines += [_verdict_line(v) for v in verdicts]
    lines.append(f"{sum(v.ok for v in verdicts)}/{len(verdicts)} secure and recoverable")
    _emit(args, doc, lines)
    return EXIT_PASS if ok else EXIT_FAIL


def _outcome_line(o: protocol.ProtocolOutcome, ok: bool) -> str:
    ea = ",".join(f"e{e}" for e in o.attacked) or "-"
    fid = "" if o.fidelities is None else "  fidelities=" + ",".join(f"{f:.12f}" for f in o.fidelities)
    return (f"{'PASS' if ok else 'FAIL'}  attack={o.attack} E_A={{{ea}}}  gap={o.security_gap:.3e}  "
            f"mi={o.mutual_info:.3e}  marginal={o.input_marginal_gap:.3e}{fid}")


def cmd_simulate(args) -> int:
    net, protected, _ = _load(args)
    specs = args.attack or ["none"]
    outcomes, ok_all, lines = [], True, []
    for spec in specs:
        att, ea = _parse_attack(net.ctx, spec)
        if att is not None:
            att = att.at(ea)
        o = protocol.run(net, protected, att, mode=args.mode, randomness=not args.no_randomness,
                         fidelity=att is None)
        ok = protocol.verify_security(o, args.tol) and o.mutual_info <= protocol.MI_TOL
        if o.fidelities is not None:
            ok = ok and protocol.verify_correctness(o)
        ok_all &= ok
        d = o.to_doc()
        d["passed"] = ok
        outcomes.append(d)
        lines.append(_outcome_line(o, ok))
    doc = {"schema_version": SCHEMA_VERSION, "command": "simulate", "config": _config(args),
           "q": net.ctx.q, "protected_edges": list(protected), "runs": outcomes, "passed": ok_all}
    _emit(args, doc, lines)
    return EXIT_PASS if ok_all else EXIT_FAIL


def cmd_sweep(args) -> int:
    net, protected, file_attacked = _load(args)
    cands = _candidates(net, args, file_attacked)
    suite = [s for s in args.suite.split(",") if s.strip()]
    try:
        protocol.build_suite(net.ctx, 1, suite, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    entries = protocol.sweep(net, protected, suite, cands, seed=args.seed, workers=args.workers, mode=args.mode)
    passed = [e.passed(args.tol) for e in entries]
    lines = [f"network q={net.ctx.q}  E_P={list(protected)}  suite={','.join(suite)}"]
    for e, ok in zip(entries, passed):
        lines.append(f"{_verdict_line(e.verdict)}  runs={len(e.outcomes)}  max_gap={e.max_gap:.3e}  "
                     f"max_mi={e.max_mi:.3e}" + ("" if ok or not e.verdict.ok else "  QUANTUM-FAIL"))
    lines.append(f"{sum(passed)}/{len(entries)} attacked sets pass")
    doc = {"schema_version": SCHEMA_VERSION, "command": "sweep", "config": _config(args),
           "q": net.ctx.q, "protected_edges": list(protected),
           "entries": [dict(e.to_doc(), passed=ok) for e, ok in zip(entries, passed)],
           "passed": all(passed)}
    _emit(args, doc, lines)
    return EXIT_PASS if all(passed) else EXIT_FAIL


def cmd_example(args) -> int:
    try:
        net, prot = catalog.load_builtin(args.name, args.q, args.n)
    except (catalog.IllegalFieldOrder, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    text = dump_network(net, EdgeSets.build(net, prot, ()))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_PASS


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep, "example": cmd_example}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    saved = os.environ.get("QNETCODE_BUDGET")
    if getattr(args, "budget", None) is not None:
        os.environ["QNETCODE_BUDGET"] = str(args.budget)
    try:
        return _dispatch(args)
    finally:
        if saved is None:
            os.environ.pop("QNETCODE_BUDGET", None)
        else:
            os.environ["QNETCODE_BUDGET"] = saved


def _dispatch(args) -> int:
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, NetworkError, protocol.PreconditionViolated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except qsim.BudgetExceeded as exc:
        print(f"error: {exc}; raise it with --budget or QNETCODE_BUDGET", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
