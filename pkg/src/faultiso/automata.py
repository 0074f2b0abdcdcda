"""Finite-automaton core: event attributes, deterministic automata, composition.

A plant is a deterministic finite automaton over an alphabet whose events
carry observability, controllability, forcibility and fault-type attributes.
Everything here is immutable after construction and all operations are pure
functions, so values can be shared freely between threads.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import AssumptionError, ModelError


@dataclass(frozen=True)
class Event:
    """One alphabet symbol and its control/observation attributes.

    ``fault_type`` is a positive index identifying which fault class the
    event belongs to, or ``None`` for regular events.
    """

    name: str
    observable: bool = False
    controllable: bool = False
    forcible: bool = False
    fault_type: Optional[int] = None


@dataclass(frozen=True)
class EventTable:
    """Alphabet with derived attribute sets.

    Invariants enforced at construction: event names are unique and
    non-empty, fault events are unobservable, and fault-type indices are
    positive.  Component alphabets may type only a slice of the fault
    classes; a complete model needs the gap-free range ``1..k``, which is
    checked where the fault labelling is built.
    """

    events: tuple[Event, ...]

    def __post_init__(self):
        names = [e.name for e in self.events]
        if any(not n for n in names):
            raise ModelError("event names must be non-empty")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ModelError(f"duplicate event names: {', '.join(dup)}")
        for e in self.events:
            if e.fault_type is not None:
                if e.fault_type < 1:
                    raise ModelError(f"event {e.name}: fault type must be >= 1")
                if e.observable:
                    raise ModelError(f"fault event {e.name} must be unobservable")
        types = sorted({e.fault_type for e in self.events if e.fault_type is not None})
        by_name = {e.name: e for e in self.events}
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "observable_events",
                           frozenset(e.name for e in self.events if e.observable))
        object.__setattr__(self, "unobservable_events",
                           frozenset(e.name for e in self.events if not e.observable))
        object.__setattr__(self, "controllable_events",
                           frozenset(e.name for e in self.events if e.controllable))
        object.__setattr__(self, "enforceable_events",
                           frozenset(e.name for e in self.events if e.forcible))
        object.__setattr__(self, "fault_events",
                           frozenset(e.name for e in self.events if e.fault_type is not None))
        object.__setattr__(self, "fault_types", tuple(types))
        object.__setattr__(self, "fault_type_count", len(types))

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> Event:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"unknown event: {name}") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.events)

    def fault_type_of(self, name: str) -> Optional[int]:
        return self[name].fault_type

    def fault_events_of_type(self, i: int) -> frozenset[str]:
        return frozenset(e.name for e in self.events if e.fault_type == i)

    def require(self, name: str) -> str:
        """Return ``name`` if it is in the alphabet, else raise ValueError."""
        if name not in self:
            raise ValueError(f"unknown event: {name}")
        return name

    def merged_with(self, other: "EventTable") -> "EventTable":
        """Union of two alphabets; shared names must agree on attributes."""
        combined = {e.name: e for e in self.events}
        for e in other.events:
            if e.name in combined and combined[e.name] != e:
                raise ModelError(f"event {e.name} declared with conflicting attributes")
            combined.setdefault(e.name, e)
        return EventTable(tuple(combined[n] for n in sorted(combined)))


@dataclass(frozen=True)
class Automaton:
    """Deterministic finite automaton with a partial transition function.

    ``transitions`` maps ``(state, event) -> state``.  State identifiers are
    opaque strings.  Transitions are stored in sorted order so every
    downstream construction iterates deterministically.
    """

    table: EventTable
    states: frozenset[str]
    initial: str
    transitions: Mapping[tuple[str, str], str]

    def __post_init__(self):
        if self.initial not in self.states:
            raise ModelError(f"initial state {self.initial!r} not in state set")
        ordered = {}
        for (src, ev), dst in sorted(self.transitions.items()):
            if src not in self.states or dst not in self.states:
                raise ModelError(f"transition {src} -{ev}-> {dst} uses unknown state")
            if ev not in self.table:
                raise ModelError(f"transition {src} -{ev}-> {dst} uses unknown event")
            ordered[(src, ev)] = dst
        object.__setattr__(self, "transitions", ordered)
        outgoing: dict[str, list[tuple[str, str]]] = {q: [] for q in self.states}
        for (src, ev), dst in ordered.items():
            outgoing[src].append((ev, dst))
        object.__setattr__(self, "_outgoing", {q: tuple(v) for q, v in outgoing.items()})

    def step(self, q: str, event: str) -> Optional[str]:
        """One transition; ``None`` when undefined (partiality is semantic)."""
        self.table.require(event)
        return self.transitions.get((q, event))

    def outgoing(self, q: str) -> tuple[tuple[str, str], ...]:
        """Sorted ``(event, target)`` pairs leaving ``q``."""
        return self._outgoing[q]

    def sorted_states(self) -> list[str]:
        return sorted(self.states)


def active_events(aut: Automaton, q: str) -> frozenset[str]:
    """Events with a transition defined at ``q``."""
    if q not in aut.states:
        raise ValueError(f"unknown state: {q}")
    return frozenset(ev for ev, _ in aut.outgoing(q))


def run(aut: Automaton, s: Sequence[str]) -> Optional[str]:
    """Follow ``s`` from the initial state; ``None`` once a step is undefined."""
    q: Optional[str] = aut.initial
    for ev in s:
        aut.table.require(ev)
        if q is None:
            return None
        q = aut.transitions.get((q, ev))
    return q


def project(table: EventTable, s: Sequence[str]) -> tuple[str, ...]:
    """Natural projection: erase unobservable events, preserve order."""
    out = []
    for ev in s:
        table.require(ev)
        if ev in table.observable_events:
            out.append(ev)
    return tuple(out)


def unobservable_reach(aut: Automaton, x: Iterable[str],
                       disabled: Iterable[str] = ()) -> frozenset[str]:
    """Closure of ``x`` under unobservable transitions not in ``disabled``.

    Includes ``x`` itself.  Disabled observable events are irrelevant here but
    accepted, so callers can pass a raw disablement set.
    """
    disabled = frozenset(disabled)
    for ev in disabled:
        aut.table.require(ev)
    frontier = []
    for q in x:
        if q not in aut.states:
            raise ValueError(f"unknown state: {q}")
        frontier.append(q)
    seen = set(frontier)
    unobs = aut.table.unobservable_events
    while frontier:
        q = frontier.pop()
        for ev, dst in aut.outgoing(q):
            if ev in unobs and ev not in disabled and dst not in seen:
                seen.add(dst)
                frontier.append(dst)
    return frozenset(seen)


def accessible_part(aut: Automaton) -> Automaton:
    """Restrict to states reachable from the initial state."""
    seen = {aut.initial}
    queue = deque([aut.initial])
    while queue:
        q = queue.popleft()
        for _, dst in aut.outgoing(q):
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    trans = {(s, e): d for (s, e), d in aut.transitions.items() if s in seen}
    return Automaton(aut.table, frozenset(seen), aut.initial, trans)


def compose_with_map(a: Automaton, b: Automaton) -> tuple[Automaton, dict[str, tuple[str, str]]]:
    """Synchronous composition, returning the accessible product and a map
    from composite state name back to its ``(a_state, b_state)`` pair.

    Shared events synchronise, private events interleave.  Composite names
    render as ``(a,b)`` in canonical component order.
    """
    table = a.table.merged_with(b.table)
    a_events = frozenset(a.table.names)
    b_events = frozenset(b.table.names)

    def name(pair):
        return f"({pair[0]},{pair[1]})"

    init = (a.initial, b.initial)
    pairs = {init}
    queue = deque([init])
    trans: dict[tuple[str, str], str] = {}
    while queue:
        qa, qb = queue.popleft()
        src = name((qa, qb))
        moves = []
        for ev in table.names:
            in_a, in_b = ev in a_events, ev in b_events
            if in_a and in_b:
                da, db = a.transitions.get((qa, ev)), b.transitions.get((qb, ev))
                if da is not None and db is not None:
                    moves.append((ev, (da, db)))
            elif in_a:
                da = a.transitions.get((qa, ev))
                if da is not None:
                    moves.append((ev, (da, qb)))
            else:
                db = b.transitions.get((qb, ev))
                if db is not None:
                    moves.append((ev, (qa, db)))
        for ev, dst in moves:
            trans[(src, ev)] = name(dst)
            if dst not in pairs:
                pairs.add(dst)
                queue.append(dst)
    states = frozenset(name(p) for p in pairs)
    aut = Automaton(table, states, name(init), trans)
    return aut, {name(p): p for p in pairs}


def parallel_compose(a: Automaton, b: Automaton) -> Automaton:
    """Synchronous composition on shared events, interleaving on private ones."""
    return compose_with_map(a, b)[0]


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the standing-assumption checks.

    ``live`` fails when some state has no outgoing transition;
    ``unobservable_cycle`` is an alternating ``[state, event, ..., state]``
    witness of a cycle of unobservable events; ``multi_fault_witness`` is an
    event string along which two distinct fault types occur.
    """

    live: bool
    non_live_states: tuple[str, ...]
    unobservable_cycle: Optional[tuple[str, ...]]
    multi_fault_witness: Optional[tuple[str, ...]]

    @property
    def passing(self) -> bool:
        return self.live and self.unobservable_cycle is None \
            and self.multi_fault_witness is None

    def explain(self) -> str:
        if self.passing:
            return "pass (live; no unobservable cycles; single fault type per run)"
        parts = []
        if not self.live:
            parts.append(f"non-live states: {', '.join(self.non_live_states)}")
        if self.unobservable_cycle is not None:
            parts.append("unobservable cycle: " + " ".join(self.unobservable_cycle))
        if self.multi_fault_witness is not None:
            parts.append("two fault types along: " + " ".join(self.multi_fault_witness))
        return "fail (" + "; ".join(parts) + ")"


def _find_unobservable_cycle(aut: Automaton) -> Optional[tuple[str, ...]]:
    # Iterative DFS over the unobservable-edge subgraph; returns the first
    # cycle in deterministic order as [q0, e1, q1, ..., qk] with qk == q0.
    unobs = aut.table.unobservable_events
    color: dict[str, int] = {}  # 1 = on stack, 2 = done
    for root in aut.sorted_states():
        if color.get(root):
            continue
        stack = [(root, iter(aut.outgoing(root)))]
        color[root] = 1
        path: list[tuple[str, str]] = []  # (edge event, target)
        while stack:
            q, it = stack[-1]
            advanced = False
            for ev, dst in it:
                if ev not in unobs:
                    continue
                if color.get(dst) == 1:
                    # unwind the stack back to dst and close the loop
                    tail = [q2 for q2, _ in stack]
                    start = tail.index(dst)
                    events = [e for e, _ in path][start:]
                    out: list[str] = [dst]
                    for e, s2 in zip(events, tail[start + 1:]):
                        out.extend([e, s2])
                    out.extend([ev, dst])
                    return tuple(out)
                if color.get(dst) is None:
                    color[dst] = 1
                    stack.append((dst, iter(aut.outgoing(dst))))
                    path.append((ev, dst))
                    advanced = True
                    break
            if not advanced:
                color[q] = 2
                stack.pop()
                if path:
                    path.pop()
    return None


def _find_multi_fault_path(aut: Automaton) -> Optional[tuple[str, ...]]:
    # BFS over (state, fault type seen); a second distinct type yields the
    # shortest witness string.
    start = (aut.initial, None)
    parents: dict[tuple, tuple] = {start: None}
    queue = deque([start])
    while queue:
        q, seen_type = queue.popleft()
        for ev, dst in aut.outgoing(q):
            t = aut.table.fault_type_of(ev)
            if t is not None and seen_type is not None and t != seen_type:
                events = [ev]
                node = (q, seen_type)
                while parents[node] is not None:
                    pnode, pev = parents[node]
                    events.append(pev)
                    node = pnode
                return tuple(reversed(events))
            nxt = (dst, t if t is not None else seen_type)
            if nxt not in parents:
                parents[nxt] = ((q, seen_type), ev)
                queue.append(nxt)
    return None


def check_assumptions(aut: Automaton) -> AssumptionReport:
    """Check liveness, absence of unobservable cycles, and single-fault-type
    behaviour; findings are reported, never raised."""
    non_live = tuple(q for q in aut.sorted_states() if not aut.outgoing(q))
    cycle = _find_unobservable_cycle(aut)
    multi = _find_multi_fault_path(aut)
    return AssumptionReport(
        live=not non_live,
        non_live_states=non_live,
        unobservable_cycle=cycle,
        multi_fault_witness=multi,
    )


def require_assumptions(aut: Automaton) -> AssumptionReport:
    """Raise AssumptionError unless all standing assumptions hold."""
    report = check_assumptions(aut)
    if not report.passing:
        raise AssumptionError(f"assumption check failed: {report.explain()}", report)
    return report


def enumerate_language(aut: Automaton, max_len: int) -> set[tuple[str, ...]]:
    """All strings of length <= max_len generated from the initial state.

    Exponential; intended for tests and small demonstrations only.
    """
    out: set[tuple[str, ...]] = {()}
    layer = [((), aut.initial)]
    for _ in range(max_len):
        nxt = []
        for s, q in layer:
            for ev, dst in aut.outgoing(q):
                s2 = s + (ev,)
                out.add(s2)
                nxt.append((s2, dst))
        layer = nxt
    return out
