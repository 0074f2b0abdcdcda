#!/usr/bin/env python3
"""Model a plant and ask the two verification questions.

The twin-branch system has two silent fault classes whose behaviours look
identical to the observer: after either fault the plant emits o1/o2 loops,
then may drift into a shared o3 trap.  Detection is easy; telling the classes
apart is not.
"""
import faultiso as fi
from faultiso.gallery import twin_branch

aut, table = twin_branch()
print(f"plant: {len(aut.states)} states over {len(table.events)} events")
print(f"observable: {sorted(table.observable_events)}")
print(f"controllable: {sorted(table.controllable_events)}")
print(f"forcible: {sorted(table.enforceable_events)}")
print(f"fault classes: {table.fault_type_count}")
print()

report = fi.check_assumptions(aut)
print("standing assumptions:", report.explain())

plant = fi.build_labeled_plant(aut)
print("labelled states:", " ".join(sorted(plant.automaton.states)))
print()

diag = fi.check_diagnosability(plant)
print("diagnosable?", diag.diagnosable)
print("  (any fault is detected with certainty at the first o1/o2)")

iso = fi.check_isolatability(plant)
print("isolatable without control?", iso.isolatable)
if not iso.isolatable:
    print("  witness:", iso.witness_text())
    print("  once the plant sits in the o3 trap, both fault classes stay")
    print("  possible forever; passive observation can never separate them.")
