"""Fault labelling, state estimation, diagnosers, and the two verification
questions that drive everything else: can the occurrence of a fault always be
detected, and can its type always be pinned down?

Fault labels are plain strings: ``"N"`` for no fault, ``"F1" .. "Fk"`` for the
fault classes declared in the event table.  A labelled plant pairs every plant
state with the label of the fault class seen so far; labels never revert.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .automata import (
    Automaton,
    EventTable,
    compose_with_map,
    require_assumptions,
    unobservable_reach,
)
from .errors import ModelError, NotDiagnosableError, ResourceLimitError

NORMAL = "N"


def label_for_type(i: int) -> str:
    return f"F{i}"


@dataclass(frozen=True, order=True)
class LabeledState:
    """A plant state together with the fault label accumulated so far."""

    base: str
    label: str

    def __str__(self):
        return f"{self.base}{self.label}"


@dataclass(frozen=True)
class StateEstimate:
    """Canonically ordered set of labelled states; the currency of all
    estimation.  Equality and hashing are structural."""

    members: tuple[LabeledState, ...]

    @classmethod
    def of(cls, members: Iterable[LabeledState]) -> "StateEstimate":
        return cls(tuple(sorted(set(members))))

    def __post_init__(self):
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("estimate members must be sorted and unique; use StateEstimate.of")

    def __str__(self):
        return "{" + ",".join(str(m) for m in self.members) + "}"

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def empty(self) -> bool:
        return not self.members

    def labels(self) -> frozenset[str]:
        return frozenset(m.label for m in self.members)

    def fault_labels(self) -> frozenset[str]:
        return frozenset(l for l in self.labels() if l != NORMAL)

    @property
    def mixed(self) -> bool:
        """True when two distinct fault classes are still possible."""
        return len(self.fault_labels()) >= 2


@dataclass(frozen=True)
class DiagnosisVerdict:
    """Joint output of the detection and isolation agents.

    ``detection`` is ``N`` (surely no fault), ``F`` (surely some fault) or
    ``U`` (cannot tell).  ``isolation`` is a specific class label once the
    estimate is pure, ``FU`` otherwise.
    """

    detection: str
    isolation: str

    def __post_init__(self):
        if self.detection not in ("N", "F", "U"):
            raise ValueError(f"bad detection verdict: {self.detection}")
        if self.isolation != "FU" and self.detection != "F":
            raise ValueError("a specific fault class implies detection F")

    def __str__(self):
        return f"{self.detection}/{self.isolation}"


def classify(est: StateEstimate) -> DiagnosisVerdict:
    """Classify an estimate: N/F/U detection and FU/F_i isolation."""
    if est.empty:
        raise ValueError("cannot classify an empty estimate")
    labels = est.labels()
    if labels == {NORMAL}:
        detection = "N"
    elif NORMAL not in labels:
        detection = "F"
    else:
        detection = "U"
    fault = est.fault_labels()
    if detection == "F" and len(fault) == 1:
        isolation = next(iter(fault))
    else:
        isolation = "FU"
    return DiagnosisVerdict(detection, isolation)


def build_label_automaton(table: EventTable) -> Automaton:
    """Fault-tracking automaton over the fault alphabet.

    ``N`` moves to ``Fi`` on any class-``i`` fault and each ``Fi`` absorbs
    further class-``i`` faults; faults of other classes are undefined there,
    which leaves the composition with any single-fault-type plant unaffected.
    """
    k = table.fault_type_count
    if k == 0:
        raise ModelError("no fault events declared; nothing to label")
    if table.fault_types != tuple(range(1, k + 1)):
        raise ModelError("a complete model must number its fault types 1..k "
                         f"without gaps, got {list(table.fault_types)}")
    events = tuple(table[name] for name in sorted(table.fault_events))
    fault_table = EventTable(events)
    states = {NORMAL} | {label_for_type(i) for i in range(1, k + 1)}
    trans = {}
    for ev in events:
        lab = label_for_type(ev.fault_type)
        trans[(NORMAL, ev.name)] = lab
        trans[(lab, ev.name)] = lab
    return Automaton(fault_table, frozenset(states), NORMAL, trans)


@dataclass(frozen=True)
class LabeledPlant:
    """A plant whose states carry fault labels.

    ``automaton`` is the composed system; ``base_of``/``label_of`` decompose
    each composite state; ``id_of`` inverts the pair back to the composite
    state identifier.
    """

    automaton: Automaton
    base_of: Mapping[str, str]
    label_of: Mapping[str, str]
    id_of: Mapping[tuple[str, str], str]

    @property
    def table(self) -> EventTable:
        return self.automaton.table

    def member_of(self, state_id: str) -> LabeledState:
        return LabeledState(self.base_of[state_id], self.label_of[state_id])

    def estimate_of(self, state_ids: Iterable[str]) -> StateEstimate:
        return StateEstimate.of(self.member_of(s) for s in state_ids)

    def ids_of(self, est: StateEstimate) -> frozenset[str]:
        return frozenset(self.id_of[(m.base, m.label)] for m in est)

    @property
    def initial_estimate(self) -> StateEstimate:
        return self.estimate_of([self.automaton.initial])


def build_labeled_plant(g: Automaton) -> LabeledPlant:
    """Compose the plant with the label automaton.

    The composition preserves the plant language (the label component never
    blocks a plant move under the standing assumptions, which are checked
    first).  Composite states are renamed ``<state><label>`` when that is
    unambiguous, matching the conventional rendering of labelled states.
    """
    require_assumptions(g)
    labeller = build_label_automaton(g.table)
    composed, pair_of = compose_with_map(g, labeller)

    renames = {}
    compact = {cid: f"{pair[0]}{pair[1]}" for cid, pair in pair_of.items()}
    if len(set(compact.values())) == len(compact):
        renames = compact
    else:  # pathological state names; keep the explicit pair rendering
        renames = {cid: cid for cid in pair_of}

    states = frozenset(renames[c] for c in composed.states)
    trans = {(renames[s], e): renames[d] for (s, e), d in composed.transitions.items()}
    aut = Automaton(composed.table, states, renames[composed.initial], trans)
    base_of = {renames[c]: pair_of[c][0] for c in composed.states}
    label_of = {renames[c]: pair_of[c][1] for c in composed.states}
    id_of = {(pair_of[c][0], pair_of[c][1]): renames[c] for c in composed.states}
    return LabeledPlant(aut, base_of, label_of, id_of)


# -- state estimation ---------------------------------------------------------

def _observable_step(aut: Automaton, ids: frozenset[str], obs: str) -> frozenset[str]:
    return frozenset(dst for q in ids
                     if (dst := aut.transitions.get((q, obs))) is not None)


def diagnoser_step_ids(plant: LabeledPlant, ids: frozenset[str], obs: str) -> frozenset[str]:
    """Uncontrolled estimate update: unobservable closure, then one step."""
    plant.table.require(obs)
    if obs not in plant.table.observable_events:
        raise ValueError(f"event {obs} is not observable")
    closure = unobservable_reach(plant.automaton, ids)
    return _observable_step(plant.automaton, closure, obs)


def estimate_after(plant: LabeledPlant, t: Sequence[str]) -> StateEstimate:
    """Estimate after observing ``t``, starting from the labelled initial
    state.  An empty result means the observation is infeasible."""
    ids = frozenset([plant.automaton.initial])
    for obs in t:
        ids = diagnoser_step_ids(plant, ids, obs)
        if not ids:
            return StateEstimate(())
    return plant.estimate_of(ids)


@dataclass(frozen=True)
class Diagnoser:
    """Deterministic estimate automaton over the observable alphabet."""

    states: tuple[StateEstimate, ...]
    alphabet: frozenset[str]
    transitions: Mapping[tuple[StateEstimate, str], StateEstimate]
    initial: StateEstimate

    def __post_init__(self):
        adj: dict[StateEstimate, list[tuple[str, StateEstimate]]] = \
            {est: [] for est in self.states}
        for (src, obs), dst in self.transitions.items():
            adj[src].append((obs, dst))
        for edges in adj.values():
            edges.sort()
        object.__setattr__(self, "_adj", {e: tuple(v) for e, v in adj.items()})

    def step(self, est: StateEstimate, obs: str) -> Optional[StateEstimate]:
        return self.transitions.get((est, obs))

    def walk(self, t: Sequence[str]) -> StateEstimate:
        est = self.initial
        for obs in t:
            nxt = self.step(est, obs)
            if nxt is None:
                raise ValueError(f"observation infeasible: {' '.join(t)} (at {obs})")
            est = nxt
        return est

    def successors(self, est: StateEstimate) -> tuple[tuple[str, StateEstimate], ...]:
        return self._adj[est]


def build_diagnoser(plant: LabeledPlant, max_states: int = 1_000_000) -> Diagnoser:
    """Worklist determinisation of the labelled plant over observations."""
    aut = plant.automaton
    initial = plant.initial_estimate
    table = {initial: frozenset([aut.initial])}
    queue = deque([initial])
    trans: dict[tuple[StateEstimate, str], StateEstimate] = {}
    order = [initial]
    while queue:
        est = queue.popleft()
        ids = table[est]
        closure = unobservable_reach(aut, ids)
        for obs in sorted(plant.table.observable_events):
            nxt_ids = _observable_step(aut, closure, obs)
            if not nxt_ids:
                continue
            nxt = plant.estimate_of(nxt_ids)
            trans[(est, obs)] = nxt
            if nxt not in table:
                if len(table) >= max_states:
                    raise ResourceLimitError(
                        f"diagnoser exceeded {max_states} states",
                        stats={"states": len(table), "transitions": len(trans)})
                table[nxt] = nxt_ids
                order.append(nxt)
                queue.append(nxt)
    return Diagnoser(tuple(order), plant.table.observable_events, trans, initial)


# -- diagnosability (twin construction) ---------------------------------------

@dataclass(frozen=True)
class DiagnosabilityReport:
    diagnosable: bool
    # (faulty run, observation-equivalent normal run), present when not diagnosable
    witness: Optional[tuple[tuple[str, ...], tuple[str, ...]]]


def _normal_region(plant: LabeledPlant) -> frozenset[str]:
    return frozenset(q for q in plant.automaton.states if plant.label_of[q] == NORMAL)


def check_diagnosability(plant: LabeledPlant) -> DiagnosabilityReport:
    """Twin construction: pair every run with a label-normal run carrying the
    same observation.  The plant is not diagnosable exactly when the pairing
    can cycle while the first component is label-faulty; with no unobservable
    cycles, every such product cycle extends both runs indefinitely.
    """
    aut = plant.automaton
    normal = _normal_region(plant)
    obs_events = plant.table.observable_events
    init = (aut.initial, aut.initial)

    succ: dict[tuple[str, str], list[tuple[str, str, tuple[str, str]]]] = {}
    seen = {init}
    queue = deque([init])
    while queue:
        q1, q2 = queue.popleft()
        edges = []
        for ev, dst in aut.outgoing(q1):
            if ev in obs_events:
                dst2 = aut.transitions.get((q2, ev))
                if dst2 is not None and dst2 in normal:
                    edges.append((ev, "both", (dst, dst2)))
            else:
                edges.append((ev, "run", (dst, q2)))
        for ev, dst2 in aut.outgoing(q2):
            if ev not in obs_events and dst2 in normal:
                edges.append((ev, "twin", (q1, dst2)))
        succ[(q1, q2)] = edges
        for _, _, nxt in edges:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)

    faulty = {p for p in seen if plant.label_of[p[0]] != NORMAL}

    # cycle detection inside the label-faulty part of the product
    color: dict[tuple[str, str], int] = {}
    cycle_node = None
    for root in sorted(faulty):
        if color.get(root):
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack and cycle_node is None:
            node, it = stack[-1]
            advanced = False
            for _, _, nxt in it:
                if nxt not in faulty:
                    continue
                if color.get(nxt) == 1:
                    cycle_node = nxt
                    break
                if color.get(nxt) is None:
                    color[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if cycle_node is None and not advanced:
                color[node] = 2
                stack.pop()
        if cycle_node is not None:
            break

    if cycle_node is None:
        return DiagnosabilityReport(True, None)

    def bfs_path(start, goal, within_faulty):
        # shortest edge path from start to goal, optionally confined to the
        # label-faulty part of the product
        if start == goal:
            return []
        parents = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for ev, side, nxt in succ[node]:
                if nxt in parents:
                    continue
                if within_faulty and nxt not in faulty:
                    continue
                parents[nxt] = (node, ev, side)
                if nxt == goal:
                    steps = []
                    cur = nxt
                    while parents[cur] is not None:
                        prev, e, sd = parents[cur]
                        steps.append((e, sd))
                        cur = prev
                    return list(reversed(steps))
                queue.append(nxt)
        return None

    stem = bfs_path(init, cycle_node, within_faulty=False)
    # force at least one edge around the loop, staying in the faulty part
    loop = None
    for ev, side, nxt in succ[cycle_node]:
        if nxt not in faulty:
            continue
        if nxt == cycle_node:
            loop = [(ev, side)]
            break
        rest = bfs_path(nxt, cycle_node, within_faulty=True)
        if rest is not None:
            loop = [(ev, side)] + rest
            break
    steps = stem + (loop or [])
    faulty_run = tuple(ev for ev, side in steps if side in ("run", "both"))
    normal_run = tuple(ev for ev, side in steps if side in ("twin", "both"))
    return DiagnosabilityReport(False, (faulty_run, normal_run))


# -- isolatability -------------------------------------------------------------

@dataclass(frozen=True)
class IsolatabilityReport:
    isolatable: bool
    # alternating [estimate, event, ..., estimate] cycle through a mixed estimate
    witness_cycle: Optional[tuple] = None

    def witness_text(self) -> str:
        if self.witness_cycle is None:
            return ""
        return " -> ".join(x if isinstance(x, str) else str(x)
                           for x in self.witness_cycle)


def fault_certain_frontier(diag: Diagnoser) -> frozenset[StateEstimate]:
    """Estimates first reached with fault certainty: breadth-first search that
    stops expanding as soon as certainty is reached."""
    frontier = set()
    seen = {diag.initial}
    queue = deque([diag.initial])
    while queue:
        est = queue.popleft()
        if classify(est).detection == "F":
            frontier.add(est)
            continue
        for _, nxt in diag.successors(est):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(frontier)


def _estimate_graph_from(diag: Diagnoser,
                         roots: Iterable[StateEstimate]) -> dict[StateEstimate, tuple]:
    graph = {}
    queue = deque(sorted(roots, key=str))
    seen = set(queue)
    while queue:
        est = queue.popleft()
        edges = diag.successors(est)
        graph[est] = edges
        for _, nxt in edges:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return graph


def _shortest_cycle(graph, node) -> Optional[tuple]:
    # shortest alternating cycle node -> ... -> node (at least one edge)
    parents = {}
    queue = deque()
    for obs, nxt in graph.get(node, ()):
        if nxt == node:
            return (node, obs, node)
        if nxt in graph and nxt not in parents:
            parents[nxt] = (node, obs)
            queue.append(nxt)
    while queue:
        cur = queue.popleft()
        for obs, nxt in graph.get(cur, ()):
            if nxt == node:
                steps = [(cur, obs)]
                back = cur
                while parents[back][0] != node:
                    prev, e = parents[back]
                    steps.append((prev, e))
                    back = prev
                steps.append((node, parents[back][1]))
                out = []
                for st, e in reversed(steps):
                    out.extend([st, e])
                out.append(node)
                return tuple(out)
            if nxt in graph and nxt not in parents:
                parents[nxt] = (cur, obs)
                queue.append(nxt)
    return None


def check_isolatability(plant: LabeledPlant) -> IsolatabilityReport:
    """Decide whether continued observation always pins down the fault class.

    Characterisation: once fault certainty is reached, every estimate member
    is label-faulty and labels never change, so the class stays ambiguous
    forever exactly when the estimate graph reachable from the certainty
    frontier contains a cycle through a mixed estimate.  The reported witness
    prefers a cycle among estimates that cannot reach purity at all (a trap,
    where no amount of luck isolates) over a merely revisitable ambiguity.
    """
    diag_report = check_diagnosability(plant)
    if not diag_report.diagnosable:
        raise NotDiagnosableError(
            "isolatability is only defined for diagnosable systems",
            witness=diag_report.witness)
    diag = build_diagnoser(plant)
    frontier = fault_certain_frontier(diag)
    graph = _estimate_graph_from(diag, frontier)

    on_cycle = [est for est in sorted(graph, key=str)
                if est.mixed and _shortest_cycle(graph, est) is not None]
    if not on_cycle:
        return IsolatabilityReport(True, None)

    pure = {est for est in graph if not est.mixed}
    reach_pure = set(pure)
    changed = True
    while changed:
        changed = False
        for est, edges in graph.items():
            if est not in reach_pure and any(nxt in reach_pure for _, nxt in edges):
                reach_pure.add(est)
                changed = True
    trapped = [est for est in on_cycle if est not in reach_pure]
    chosen = (trapped or on_cycle)[0]
    return IsolatabilityReport(False, _shortest_cycle(graph, chosen))


# -- observation agents --------------------------------------------------------

def detection_agent(diag: Diagnoser, t: Sequence[str]) -> str:
    """N, F, or U after observing ``t`` without control."""
    return classify(diag.walk(t)).detection


def isolation_agent(source: Union[Diagnoser, tuple], t: Sequence[str]) -> str:
    """Fault class after observing ``t``: ``FU`` or a specific label.

    ``source`` is either an uncontrolled diagnoser, or a ``(plant, policy)``
    pair whose estimates follow the controlled recursion of the runtime
    engine.
    """
    if isinstance(source, Diagnoser):
        return classify(source.walk(t)).isolation
    from .runtime import initial_engine_state, engine_step  # cycle-free at call time
    plant, policy = source
    state = initial_engine_state(plant)
    for obs in t:
        state = engine_step(plant, policy, state, obs)
    return state.verdict.isolation
