"""Command-line front end.

Subcommands: ``check`` (assumptions, diagnosability, uncontrolled
isolatability), ``diagnoser`` (build and report), ``synth`` (full synthesis
pipeline), ``simulate`` (closed-loop runs) and ``explain`` (replay an
observation sequence through the runtime engine).

Exit codes: 0 success/solvable, 2 model error, 3 assumption failure,
4 not diagnosable, 5 not solvable, 6 runtime protocol error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import diagnosis, dotexport, modelio, runtime, synthesis
from .automata import check_assumptions
from .errors import (
    AssumptionError,
    FaultIsoError,
    ModelError,
    NotDiagnosableError,
    ProtocolError,
    SchedulerError,
    SynthesisError,
)

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_ASSUMPTIONS = 3
EXIT_NOT_DIAGNOSABLE = 4
EXIT_NOT_SOLVABLE = 5
EXIT_PROTOCOL = 6


def _load_model(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None
    doc = modelio.parse_model_document(text)
    aut, table = modelio.to_system(doc)
    return doc, aut, table


def _labeled(aut):
    return diagnosis.build_labeled_plant(aut)


def _cmd_check(args) -> int:
    doc, aut, table = _load_model(args.model)
    print(f"model: {doc.name or args.model} ({len(aut.states)} states, "
          f"{len(table.events)} events, {len(aut.transitions)} transitions)")
    report = check_assumptions(aut)
    print(f"assumptions: {report.explain()}")
    if not report.passing:
        return EXIT_ASSUMPTIONS
    plant = _labeled(aut)
    diag_report = diagnosis.check_diagnosability(plant)
    print(f"diagnosable: {'yes' if diag_report.diagnosable else 'no'}")
    if not diag_report.diagnosable:
        faulty, normal = diag_report.witness
        print(f"  confusable runs: faulty [{' '.join(faulty)}] "
              f"vs normal [{' '.join(normal)}] (extendable forever)")
        return EXIT_NOT_DIAGNOSABLE
    iso = diagnosis.check_isolatability(plant)
    print(f"isolatable (uncontrolled): {'yes' if iso.isolatable else 'no'}")
    if not iso.isolatable:
        print(f"  mixed cycle: {iso.witness_text()}")
    return EXIT_OK


def _cmd_diagnoser(args) -> int:
    doc, aut, table = _load_model(args.model)
    plant = _labeled(aut)
    diag = diagnosis.build_diagnoser(plant)
    print(f"diagnoser: {len(diag.states)} states, {len(diag.alphabet)} events, "
          f"{len(diag.transitions)} transitions")
    print(f"initial: {diag.initial}")
    if args.dot:
        Path(args.dot).write_text(dotexport.export_diagnoser_dot(diag), encoding="utf-8")
        print(f"dot written to {args.dot}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    doc, aut, table = _load_model(args.model)
    plant = _labeled(aut)
    bts = synthesis.build_bts(plant)
    deadlocks = synthesis.find_deadlocks(plant, bts)
    bts_liv = synthesis.prune_live(bts, deadlocks)
    result = synthesis.good_fixpoint(bts_liv, deadlocks, tie_break=args.tie_break)
    print("Y0: " + " ".join(str(y) for y in sorted(bts.initial, key=str)))
    print("Ym: " + " ".join(str(y) for y in sorted(bts.marked, key=str)))
    print(f"deadlock Z-states: {len(deadlocks)}")
    print(f"good Y-states: {len(result.good_y)}")
    print(f"isolation bound: {result.isolation_bound if result.solvable else '-'}")
    print(f"solvable: {'yes' if result.solvable else 'no'}")
    if args.dot:
        Path(args.dot).write_text(
            dotexport.export_bts_dot(bts_liv, deadlocks=deadlocks, result=result),
            encoding="utf-8")
        print(f"dot written to {args.dot}")
    if not result.solvable:
        for y in sorted(bts.initial - result.good_y, key=str):
            print(f"not good: {y}")
            for dec in bts_liv.decisions_of(y):
                z = bts_liv.yz_edges[(y, dec)]
                misses = [str(dst) for _, dst in bts_liv.observations_of(z)
                          if dst not in result.good_y]
                if misses:
                    print(f"  {dec} can reach non-good: {' '.join(misses)}")
        return EXIT_NOT_SOLVABLE
    policy = synthesis.extract_supervisor(result, bts_liv)
    for y in sorted(policy.decisions, key=str):
        print(f"decision {y}: {policy.decisions[y]}")
    if args.out:
        sup_doc = modelio.supervisor_document(policy, doc, args.tie_break,
                                              result.isolation_bound)
        Path(args.out).write_text(modelio.serialize_supervisor(sup_doc), encoding="utf-8")
        print(f"supervisor written to {args.out}")
    return EXIT_OK


def _load_closed_loop(model_path: str, supervisor_path: str):
    doc, aut, table = _load_model(model_path)
    plant = _labeled(aut)
    try:
        text = Path(supervisor_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read supervisor {supervisor_path}: {exc}") from None
    policy = modelio.load_supervisor(text, plant, doc)
    return plant, policy


def _cmd_simulate(args) -> int:
    plant, policy = _load_closed_loop(args.model, args.supervisor)
    cl = runtime.build_closed_loop(plant, policy)
    script = args.script.split(",") if args.script else None
    trace = runtime.simulate(cl, args.steps, script=script, seed=args.seed)
    sys.stdout.write(trace)
    return EXIT_OK


def _cmd_explain(args) -> int:
    plant, policy = _load_closed_loop(args.model, args.supervisor)
    observations = args.obs.split(",") if args.obs else []
    states = runtime.replay(plant, policy, observations)
    for obs, st in zip(observations, states[1:]):
        dec = st.active_decision
        dec_text = f" decision={dec}" if dec is not None else ""
        print(f"obs {obs} -> estimate {st.estimate} phase={st.phase}"
              f"{dec_text} verdict={st.verdict}")
    print(f"final verdict: {states[-1].verdict.isolation}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultiso",
        description="Synthesise and run active fault-isolation supervisors "
                    "for discrete event systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="assumptions, diagnosability, isolatability")
    p.add_argument("model")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("diagnoser", help="build the diagnoser")
    p.add_argument("model")
    p.add_argument("--dot", help="write diagnoser DOT to this file")
    p.set_defaults(func=_cmd_diagnoser)

    p = sub.add_parser("synth", help="synthesise an isolation supervisor")
    p.add_argument("model")
    p.add_argument("--tie-break", choices=list(synthesis.TIE_BREAK_MODES),
                   default="default")
    p.add_argument("--out", help="write the supervisor document to this file")
    p.add_argument("--dot", help="write the pruned bipartite system DOT to this file")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("simulate", help="run the closed loop")
    p.add_argument("model")
    p.add_argument("supervisor")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--script", help="comma-separated plant events to execute")
    group.add_argument("--seed", type=int, help="seed for the random scheduler")
    p.add_argument("--steps", type=int, default=20)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("explain", help="replay observations through the engine")
    p.add_argument("model")
    p.add_argument("supervisor")
    p.add_argument("--obs", required=True, help="comma-separated observations")
    p.set_defaults(func=_cmd_explain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except AssumptionError as exc:
        print(f"error: assumptions: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTIONS
    except NotDiagnosableError as exc:
        print(f"error: not diagnosable: {exc}", file=sys.stderr)
        return EXIT_NOT_DIAGNOSABLE
    except SynthesisError as exc:
        print(f"error: not solvable: {exc}", file=sys.stderr)
        return EXIT_NOT_SOLVABLE
    except (ProtocolError, SchedulerError) as exc:
        print(f"error: runtime: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except FaultIsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
