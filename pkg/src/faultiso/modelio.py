"""Plant model text format and supervisor documents.

Model grammar (one directive per line, ``#`` starts a comment):

    name <text>                optional metadata
    desc <text>                optional metadata
    event <name> [obs] [ctrl] [forc] [fault=<i>]
    state <name>               optional; states may also appear implicitly
    init <name>
    trans <src> <event> <dst>

Duplicate transitions for the same (source, event) are rejected, as are
undeclared events and observable fault events.  Supervisor documents are
canonical JSON bound to the model by a content digest.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

from .automata import Automaton, Event, EventTable
from .diagnosis import LabeledPlant, LabeledState, StateEstimate
from .errors import ModelError
from .synthesis import ControlDecision, SupervisorPolicy, canonical_decision


@dataclass(frozen=True)
class ModelDocument:
    """Parsed model text, order-preserving so that serialisation round-trips."""

    name: Optional[str]
    description: Optional[str]
    events: tuple[Event, ...]
    explicit_states: tuple[str, ...]
    initial: str
    transitions: tuple[tuple[str, str, str], ...]

    def all_states(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for s in self.explicit_states:
            seen.setdefault(s)
        seen.setdefault(self.initial)
        for src, _, dst in self.transitions:
            seen.setdefault(src)
            seen.setdefault(dst)
        return tuple(seen)


_EVENT_FLAGS = ("obs", "ctrl", "forc")


def parse_model_document(text: str) -> ModelDocument:
    name = None
    description = None
    events: list[Event] = []
    states: list[str] = []
    initial = None
    transitions: list[tuple[str, str, str]] = []
    declared_events: set[str] = set()
    seen_pairs: dict[tuple[str, str], int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        where = f"line {lineno}"
        if kind == "name":
            if not args:
                raise ModelError(f"{where}: name needs a value")
            name = " ".join(args)
        elif kind == "desc":
            if not args:
                raise ModelError(f"{where}: desc needs a value")
            description = " ".join(args)
        elif kind == "event":
            if not args:
                raise ModelError(f"{where}: event needs a name")
            ev_name, flags = args[0], args[1:]
            if ev_name in declared_events:
                raise ModelError(f"{where}: event {ev_name} declared twice")
            observable = controllable = forcible = False
            fault_type = None
            for flag in flags:
                if flag == "obs":
                    observable = True
                elif flag == "ctrl":
                    controllable = True
                elif flag == "forc":
                    forcible = True
                elif flag.startswith("fault="):
                    try:
                        fault_type = int(flag.split("=", 1)[1])
                    except ValueError:
                        raise ModelError(f"{where}: bad fault index in {flag!r}") from None
                else:
                    raise ModelError(f"{where}: unknown event flag {flag!r}")
            if fault_type is not None and observable:
                raise ModelError(f"{where}: fault event {ev_name} cannot be observable")
            declared_events.add(ev_name)
            events.append(Event(ev_name, observable, controllable, forcible, fault_type))
        elif kind == "state":
            if len(args) != 1:
                raise ModelError(f"{where}: state takes exactly one name")
            states.append(args[0])
        elif kind == "init":
            if len(args) != 1:
                raise ModelError(f"{where}: init takes exactly one name")
            if initial is not None:
                raise ModelError(f"{where}: init declared twice")
            initial = args[0]
        elif kind == "trans":
            if len(args) != 3:
                raise ModelError(f"{where}: trans takes source, event, target")
            src, ev, dst = args
            if ev not in declared_events:
                raise ModelError(f"{where}: undeclared event {ev}")
            if (src, ev) in seen_pairs:
                raise ModelError(
                    f"{where}: duplicate transition from {src} on {ev} "
                    f"(first at line {seen_pairs[(src, ev)]}); automata are deterministic")
            seen_pairs[(src, ev)] = lineno
            transitions.append((src, ev, dst))
        else:
            raise ModelError(f"{where}: unknown directive {kind!r}")
    if initial is None:
        raise ModelError("model has no init line")
    return ModelDocument(name, description, tuple(events), tuple(states),
                         initial, tuple(transitions))


def serialize_model(doc: ModelDocument) -> str:
    lines = []
    if doc.name is not None:
        lines.append(f"name {doc.name}")
    if doc.description is not None:
        lines.append(f"desc {doc.description}")
    for e in doc.events:
        flags = []
        if e.observable:
            flags.append("obs")
        if e.controllable:
            flags.append("ctrl")
        if e.forcible:
            flags.append("forc")
        if e.fault_type is not None:
            flags.append(f"fault={e.fault_type}")
        lines.append(" ".join(["event", e.name] + flags))
    for s in doc.explicit_states:
        lines.append(f"state {s}")
    lines.append(f"init {doc.initial}")
    for src, ev, dst in doc.transitions:
        lines.append(f"trans {src} {ev} {dst}")
    return "\n".join(lines) + "\n"


def to_system(doc: ModelDocument) -> tuple[Automaton, EventTable]:
    table = EventTable(doc.events)
    states = frozenset(doc.all_states())
    trans = {(src, ev): dst for src, ev, dst in doc.transitions}
    return Automaton(table, states, doc.initial, trans), table


def parse_model(text: str) -> tuple[Automaton, EventTable]:
    """Parse model text straight to an automaton and its alphabet."""
    return to_system(parse_model_document(text))


def canonical_document(doc: ModelDocument) -> ModelDocument:
    """Sorted variant used for hashing, invariant under cosmetic reordering."""
    return ModelDocument(
        doc.name,
        doc.description,
        tuple(sorted(doc.events, key=lambda e: e.name)),
        tuple(sorted(doc.all_states())),
        doc.initial,
        tuple(sorted(doc.transitions)),
    )


def model_digest(doc: ModelDocument) -> str:
    text = serialize_model(canonical_document(doc))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- supervisor documents -------------------------------------------------------

@dataclass(frozen=True)
class SupervisorDocument:
    """Serialisable supervisor: a decision table plus provenance."""

    model_hash: str
    tie_break: str
    isolation_bound: Optional[int]
    frontier: tuple[StateEstimate, ...]
    decisions: tuple[tuple[StateEstimate, ControlDecision], ...]


def _estimate_to_json(est: StateEstimate) -> list[list[str]]:
    return [[m.base, m.label] for m in est]


def _estimate_from_json(data) -> StateEstimate:
    return StateEstimate.of(LabeledState(base, label) for base, label in data)


def serialize_supervisor(doc: SupervisorDocument) -> str:
    payload = {
        "format": "faultiso-supervisor-v1",
        "model_hash": doc.model_hash,
        "tie_break": doc.tie_break,
        "isolation_bound": doc.isolation_bound,
        "frontier": [_estimate_to_json(e) for e in doc.frontier],
        "decisions": [
            {
                "estimate": _estimate_to_json(est),
                "enforce": dec.enforce,
                "disable": sorted(dec.disable),
            }
            for est, dec in doc.decisions
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def parse_supervisor(text: str) -> SupervisorDocument:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"supervisor document is not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != "faultiso-supervisor-v1":
        raise ModelError("not a faultiso supervisor document")
    try:
        frontier = tuple(sorted((_estimate_from_json(e) for e in payload["frontier"]),
                                key=str))
        decisions = tuple(sorted(
            ((_estimate_from_json(d["estimate"]),
              ControlDecision(d["enforce"], frozenset(d["disable"])))
             for d in payload["decisions"]), key=lambda p: str(p[0])))
        return SupervisorDocument(
            model_hash=payload["model_hash"],
            tie_break=payload["tie_break"],
            isolation_bound=payload["isolation_bound"],
            frontier=frontier,
            decisions=decisions,
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"supervisor document is malformed: {exc!r}") from None


def supervisor_document(policy: SupervisorPolicy, model_doc: ModelDocument,
                        tie_break: str, isolation_bound: Optional[int]) -> SupervisorDocument:
    return SupervisorDocument(
        model_hash=model_digest(model_doc),
        tie_break=tie_break,
        isolation_bound=isolation_bound,
        frontier=tuple(sorted(policy.initial_frontier, key=str)),
        decisions=tuple(sorted(policy.decisions.items(), key=lambda p: str(p[0]))),
    )


def load_supervisor(text: str, plant: LabeledPlant,
                    model_doc: ModelDocument) -> SupervisorPolicy:
    """Parse, bind to the model, and verify the policy is closed.

    The document's hash must match the model; every estimate reachable from
    the frontier under the policy must carry an explicit decision and its
    decision must be feasible there.
    """
    from .synthesis import policy_graph  # local to avoid an import cycle at startup

    doc = parse_supervisor(text)
    digest = model_digest(model_doc)
    if doc.model_hash != digest:
        raise ModelError("supervisor was synthesised for a different model "
                         f"(hash {doc.model_hash[:12]}.. != {digest[:12]}..)")
    decisions = {}
    for est, dec in doc.decisions:
        for m in est:
            if (m.base, m.label) not in plant.id_of:
                raise ModelError(f"supervisor references unknown labelled state {m}")
        decisions[est] = canonical_decision(plant, dec.enforce, dec.disable)
    policy = SupervisorPolicy(frozenset(doc.frontier), decisions)
    reachable = policy_graph(plant, policy)
    missing = sorted((str(e) for e in reachable if e not in decisions))
    if missing:
        raise ModelError("supervisor decision table is not closed under its own "
                         "reachable estimates; missing: " + ", ".join(missing))
    return policy
