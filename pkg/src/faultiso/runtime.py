"""Closed-loop execution: the detect-then-isolate architecture at runtime.

A run starts uncontrolled.  The detection agent tracks the uncontrolled
estimate; the moment it reports a fault with certainty, the switch flips and
the isolation supervisor starts issuing decisions, one per observation.

``engine_step`` is the pure observation-by-observation transition used for
online execution and replay.  ``build_closed_loop`` materialises the whole
controlled behaviour as an automaton for model checking, and ``simulate``
drives it with a scripted or seeded-random scheduler.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .automata import Automaton
from .diagnosis import (
    DiagnosisVerdict,
    LabeledPlant,
    StateEstimate,
    check_isolatability,
    classify,
    diagnoser_step_ids,
    fault_certain_frontier,
    build_diagnoser,
)
from .errors import (
    ProtocolError,
    ResourceLimitError,
    SchedulerError,
    SupervisorIntegrityError,
)
from .synthesis import ControlDecision, SupervisorPolicy, observable_reach

DETECTION = "detection"
ISOLATION = "isolation"


@dataclass(frozen=True)
class EngineState:
    """Supervisor-side view of a run: phase, current estimate, logs, verdict."""

    phase: str
    estimate: StateEstimate
    observation_log: tuple[str, ...]
    decision_log: tuple[ControlDecision, ...]
    verdict: DiagnosisVerdict

    @property
    def active_decision(self) -> Optional[ControlDecision]:
        return self.decision_log[-1] if self.phase == ISOLATION else None


def initial_engine_state(plant: LabeledPlant) -> EngineState:
    est = plant.initial_estimate
    return EngineState(DETECTION, est, (), (), classify(est))


def engine_step(plant: LabeledPlant, policy: SupervisorPolicy,
                state: EngineState, obs: str) -> EngineState:
    """Consume one observation.

    In the detection phase the estimate follows the uncontrolled diagnoser;
    when the verdict turns to certain fault, the phase switches and the
    policy's decision for the frontier estimate is emitted.  In the isolation
    phase the estimate follows the observable reach under the decision in
    force, and the next decision is emitted.
    """
    plant.table.require(obs)
    if obs not in plant.table.observable_events:
        raise ProtocolError(f"event {obs} is not observable")
    if state.phase == DETECTION:
        ids = diagnoser_step_ids(plant, plant.ids_of(state.estimate), obs)
        if not ids:
            raise ProtocolError(f"observation {obs} is infeasible at {state.estimate}")
        est = plant.estimate_of(ids)
        verdict = classify(est)
        if verdict.detection == "F":
            return EngineState(ISOLATION, est,
                               state.observation_log + (obs,),
                               state.decision_log + (policy.decision_for(est),),
                               verdict)
        return EngineState(DETECTION, est, state.observation_log + (obs,),
                           state.decision_log, verdict)

    dec = state.decision_log[-1]
    if dec.enforce is not None and dec.enforce in plant.table.observable_events \
            and obs != dec.enforce:
        raise ProtocolError(f"decision {dec} enforces {dec.enforce} "
                            f"but {obs} was observed")
    if obs in dec.disable:
        raise ProtocolError(f"disabled event {obs} was observed under {dec}")
    nxt = observable_reach(plant, state.estimate, dec, obs)
    if nxt is None:
        raise ProtocolError(f"observation {obs} is infeasible at "
                            f"{state.estimate} under {dec}")
    return EngineState(ISOLATION, nxt,
                       state.observation_log + (obs,),
                       state.decision_log + (policy.decision_for(nxt),),
                       classify(nxt))


def replay(plant: LabeledPlant, policy: SupervisorPolicy,
           observations: Sequence[str]) -> list[EngineState]:
    """States after each observation (initial state first)."""
    states = [initial_engine_state(plant)]
    for obs in observations:
        states.append(engine_step(plant, policy, states[-1], obs))
    return states


# -- closed-loop automaton -----------------------------------------------------

_AWAIT = "await"
_FREE = "free"


@dataclass(frozen=True)
class _LoopState:
    plant_state: str
    estimate: StateEstimate
    certain: bool
    pending: bool  # an enforced event is owed before anything else

    def render(self) -> str:
        mark = "!" if self.pending else ""
        return f"{self.plant_state}@{self.estimate}{mark}"


@dataclass(frozen=True)
class ClosedLoopAutomaton:
    """The controlled behaviour, with the supervisor memory in the state.

    ``label_of`` carries the plant fault labels, so the diagnosis checks run
    on the closed loop unchanged.
    """

    automaton: Automaton
    label_of: Mapping[str, str]
    estimate_of: Mapping[str, StateEstimate]
    certain_of: Mapping[str, bool]
    plant_state_of: Mapping[str, str]
    policy: SupervisorPolicy

    def as_labeled_plant(self) -> LabeledPlant:
        base_of = {q: q for q in self.automaton.states}
        id_of = {(q, self.label_of[q]): q for q in self.automaton.states}
        return LabeledPlant(self.automaton, base_of, dict(self.label_of), id_of)


def build_closed_loop(plant: LabeledPlant, policy: SupervisorPolicy,
                      max_states: int = 1_000_000) -> ClosedLoopAutomaton:
    """Product of the plant with the estimate-tracking supervisor.

    Before certainty every plant move is admissible.  At certainty, and after
    every later observation, the decision for the current estimate applies:
    an enforced event is the sole admissible move at that point (even if
    disabled), after which undisabled events run until the next observation.
    """
    aut = plant.automaton
    obs_events = plant.table.observable_events

    def decision_at(est: StateEstimate) -> ControlDecision:
        return policy.decision_for(est)

    def enter(est: StateEstimate, pid: str, certain: bool) -> _LoopState:
        pending = certain and decision_at(est).enforce is not None
        return _LoopState(pid, est, certain, pending)

    init = _LoopState(aut.initial, plant.initial_estimate, False, False)
    states: dict[_LoopState, str] = {init: init.render()}
    order = [init]
    queue = deque([init])
    trans: dict[tuple[str, str], str] = {}

    def push(src: _LoopState, ev: str, dst: _LoopState):
        if dst not in states:
            if len(states) >= max_states:
                raise ResourceLimitError(
                    f"closed loop exceeded {max_states} states",
                    stats={"states": len(states)})
            states[dst] = dst.render()
            order.append(dst)
            queue.append(dst)
        trans[(states[src], ev)] = states[dst]

    while queue:
        st = queue.popleft()
        pid = st.plant_state
        if not st.certain:
            for ev, dst in aut.outgoing(pid):
                if ev in obs_events:
                    ids = diagnoser_step_ids(plant, plant.ids_of(st.estimate), ev)
                    est = plant.estimate_of(ids)
                    certain = classify(est).detection == "F"
                    push(st, ev, enter(est, dst, certain))
                else:
                    push(st, ev, _LoopState(dst, st.estimate, False, False))
            continue
        dec = decision_at(st.estimate)
        if st.pending:
            ev = dec.enforce
            dst = aut.transitions.get((pid, ev))
            if dst is None:
                raise SupervisorIntegrityError(
                    f"supervisor enforces {ev} at {st.estimate} but the plant "
                    f"state {pid} cannot execute it")
            if ev in obs_events:
                est = observable_reach(plant, st.estimate, dec, ev)
                push(st, ev, enter(est, dst, True))
            else:
                push(st, ev, _LoopState(dst, st.estimate, True, False))
            continue
        for ev, dst in aut.outgoing(pid):
            if ev in dec.disable:
                continue
            if ev in obs_events:
                est = observable_reach(plant, st.estimate, dec, ev)
                if est is None:  # cannot happen for a true plant successor
                    raise SupervisorIntegrityError(
                        f"estimate tracking lost the plant at {pid} under {dec}")
                push(st, ev, enter(est, dst, True))
            else:
                push(st, ev, _LoopState(dst, st.estimate, True, False))

    names = frozenset(states.values())
    cl_aut = Automaton(plant.table, names, states[init], trans)
    label_of = {states[s]: plant.label_of[s.plant_state] for s in order}
    estimate_of = {states[s]: s.estimate for s in order}
    certain_of = {states[s]: s.certain for s in order}
    plant_state_of = {states[s]: s.plant_state for s in order}
    return ClosedLoopAutomaton(cl_aut, label_of, estimate_of, certain_of,
                               plant_state_of, policy)


@dataclass(frozen=True)
class ClosedLoopReport:
    live: bool
    nonlive_states: tuple[str, ...]
    isolatable: bool
    isolation_witness: Optional[tuple]
    bound: Optional[int]


def _mixed_path_bound(cl: ClosedLoopAutomaton) -> Optional[int]:
    # longest chain of consecutive mixed estimates in the controlled
    # observation graph; None when a mixed cycle makes it unbounded
    lp = cl.as_labeled_plant()
    diag = build_diagnoser(lp)
    frontier = fault_certain_frontier(diag)
    graph: dict[StateEstimate, list[StateEstimate]] = {}
    queue = deque(sorted(frontier, key=str))
    seen = set(queue)

    def mixed(est: StateEstimate) -> bool:
        return est.mixed

    while queue:
        est = queue.popleft()
        graph[est] = [dst for _, dst in diag.successors(est)]
        for dst in graph[est]:
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    mixed_nodes = [e for e in graph if mixed(e)]
    memo: dict[StateEstimate, Optional[int]] = {}
    visiting = object()

    def longest(est) -> Optional[int]:
        got = memo.get(est, None)
        if got is visiting:
            return None  # cycle
        if est in memo:
            return got
        memo[est] = visiting
        best = 0
        for nxt in graph[est]:
            if not mixed(nxt):
                continue
            sub = longest(nxt)
            if sub is None:
                memo[est] = None
                return None
            best = max(best, 1 + sub)
        memo[est] = best
        return best

    best = 0
    for est in sorted(mixed_nodes, key=str):
        got = longest(est)
        if got is None:
            return None
        best = max(best, got)
    return best


def verify_closed_loop(cl: ClosedLoopAutomaton) -> ClosedLoopReport:
    """Model-check the controlled behaviour.

    Liveness: no reachable fault-certain state may lack a successor.
    Isolatability: the diagnosis check, run on the closed loop itself.
    ``bound``: longest run of consecutive mixed estimates after certainty.
    """
    nonlive = tuple(q for q in cl.automaton.sorted_states()
                    if cl.certain_of[q] and not cl.automaton.outgoing(q))
    iso = check_isolatability(cl.as_labeled_plant())
    bound = _mixed_path_bound(cl)
    return ClosedLoopReport(not nonlive, nonlive, iso.isolatable,
                            iso.witness_cycle, bound)


# -- simulation ----------------------------------------------------------------

def simulate(cl: ClosedLoopAutomaton, max_steps: int,
             script: Optional[Sequence[str]] = None,
             seed: Optional[int] = None) -> str:
    """Generate one run of the closed loop as a line-oriented trace.

    Exactly one of ``script`` (events to execute, checked for admissibility)
    or ``seed`` (uniform choice among admissible events) must be given.
    Trace records: ``SEED n``, ``EVT e``, ``OBS e``,
    ``DEC enforce=<e|~> disable={...}``, ``VERDICT det=<N|F|U> iso=<...>``.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if (script is None) == (seed is None):
        raise ValueError("exactly one of script or seed is required")
    rng = random.Random(seed) if seed is not None else None
    lines: list[str] = []
    if seed is not None:
        lines.append(f"SEED {seed}")
    obs_events = cl.automaton.table.observable_events
    state = cl.automaton.initial
    scripted = deque(script or ())
    for _ in range(max_steps):
        admissible = [ev for ev, _ in cl.automaton.outgoing(state)]
        if not admissible:
            break
        if rng is not None:
            ev = rng.choice(sorted(admissible))
        else:
            if not scripted:
                break
            ev = scripted.popleft()
            if ev not in admissible:
                raise SchedulerError(
                    f"scripted event {ev} is not admissible at {state}; "
                    f"admissible: {', '.join(sorted(admissible))}")
        state = cl.automaton.transitions[(state, ev)]
        lines.append(f"EVT {ev}")
        if ev in obs_events:
            lines.append(f"OBS {ev}")
            est = cl.estimate_of[state]
            if cl.certain_of[state]:
                dec = cl.policy.decision_for(est)
                dis = ",".join(sorted(dec.disable))
                lines.append(f"DEC enforce={dec.enforce or '~'} disable={{{dis}}}")
            verdict = classify(est)
            lines.append(f"VERDICT det={verdict.detection} iso={verdict.isolation}")
    return "\n".join(lines) + "\n"
