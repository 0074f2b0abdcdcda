#!/usr/bin/env python3
"""State estimation and the diagnoser.

An estimate is the set of labelled states the plant could be in given what
was observed.  The diagnoser is the automaton of all reachable estimates, and
the detection/isolation agents just classify its current state.
"""
import faultiso as fi
from faultiso.gallery import twin_branch

aut, _ = twin_branch()
plant = fi.build_labeled_plant(aut)

for t in ([], ["o2"], ["o2", "o3"], ["o2", "o4"], ["o2", "o4", "o3"]):
    est = fi.estimate_after(plant, t)
    verdict = fi.classify(est)
    print(f"after {' '.join(t) or '(nothing)':<12} estimate {str(est):<14} verdict {verdict}")
print()

diag = fi.build_diagnoser(plant)
print(f"diagnoser: {len(diag.states)} estimates, {len(diag.transitions)} transitions")
for (src, obs), dst in sorted(diag.transitions.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
    print(f"  {str(src):<14} --{obs}--> {dst}")
print()

print("detection agent after o2:", fi.detection_agent(diag, ["o2"]))
print("isolation agent after o2:", fi.isolation_agent(diag, ["o2"]))
print("isolation agent after o2 o4 o3 o3:", fi.isolation_agent(diag, ["o2", "o4", "o3", "o3"]))
print("  ... still ambiguous, and it will stay that way without control.")
