"""Independent oracles and data builders shared across the test modules.

Everything here deliberately re-derives results by the dumbest correct
means available (recursive path walks, per-cell rasterization, sliding
window scans) so the library code is checked against something that does
not share its shortcuts.
"""

from __future__ import annotations

import random

from hypothesis import strategies as st

from stpt import (
    ActionSpec,
    And,
    Box,
    CollisionWitness,
    FalseAtom,
    Implies,
    Not,
    Observation,
    OccupancyFact,
    OccupyBox,
    OccupyPoint,
    Or,
    Owner,
    State,
    StateModel,
    TimeInterval,
    TimeWindow,
    TrueAtom,
)
from stpt.suts import (
    OP_CURSOR_UP,
    OP_SELECT_ELECTRON,
    OP_SELECT_PHOTON,
)


# ---------------------------------------------------------------------------
# Behaviour enumeration oracle


def oracle_behaviours(model: StateModel, depth: int) -> set:
    """Depth-first recursive enumeration of (states, actions) pairs.

    Mirrors the declared step semantics from scratch: per operation name,
    the distinct effect results of enabled same-named actions.
    """
    names = sorted({a.name for a in model.actions})

    def successors(s, name):
        out = []
        for action in model.actions:
            if action.name == name and action.guard(s):
                nxt = action.effect(s)
                if nxt not in out:
                    out.append(nxt)
        return out

    seen = set()

    def walk(states, actions, remaining):
        seen.add((states, actions))
        if remaining == 0:
            return
        for name in names:
            for nxt in successors(states[-1], name):
                walk(states + (nxt,), actions + (name,), remaining - 1)

    for s0 in model.init:
        walk((s0,), (), depth)
    return seen


def random_model(seed: int) -> StateModel:
    """Small random modular-arithmetic model, at most 100 reachable states.

    Mixes always-true, sometimes-true, and never-true guards, identity
    effects, and the occasional repeated action name (nondeterminism).
    """
    rnd = random.Random(seed)
    two_vars = rnd.random() < 0.4
    if two_vars:
        domain = rnd.randint(2, 10)  # domain^2 <= 100
        variables = ("x", "y")
    else:
        domain = rnd.randint(2, 100)
        variables = ("x",)

    def make_state(values):
        return State(dict(zip(variables, values)))

    init_count = rnd.randint(1, 3)
    init = []
    for _ in range(init_count):
        init.append(
            make_state([rnd.randrange(domain) for _ in variables])
        )

    def make_guard():
        kind = rnd.random()
        if kind < 0.5:
            return lambda s: True
        if kind < 0.9:
            k = rnd.randint(2, 4)
            r = rnd.randrange(k)
            return lambda s, k=k, r=r: s["x"] % k == r
        return lambda s: False

    def make_effect():
        if rnd.random() < 0.15:
            return lambda s: s
        a = rnd.randint(1, domain - 1) if domain > 1 else 1
        b = rnd.randrange(domain)
        if two_vars and rnd.random() < 0.5:
            return lambda s, a=a, b=b: s.assign(y=(s["y"] * a + b) % domain)
        return lambda s, a=a, b=b: s.assign(x=(s["x"] * a + b) % domain)

    names = ["alpha", "beta", "gamma", "delta"]
    action_count = rnd.randint(2, 6)
    actions = []
    for _ in range(action_count):
        actions.append(
            ActionSpec(rnd.choice(names), make_guard(), make_effect())
        )
    return StateModel(variables, init, actions)


# ---------------------------------------------------------------------------
# Collision detection oracle


def oracle_collisions(facts) -> list[CollisionWitness]:
    """Brute force over every (tick, cell) pair of every two-owner fact pair."""
    out = []
    for i in range(len(facts)):
        for j in range(i + 1, len(facts)):
            a, b = facts[i], facts[j]
            if a.owner == b.owner:
                continue
            ticks = [
                t
                for t in range(
                    min(a.window.start, b.window.start),
                    max(a.window.end, b.window.end) + 1,
                )
                if a.window.contains(t) and b.window.contains(t)
            ]
            shared = sorted(set(a.box.cells()) & set(b.box.cells()))
            if not ticks or not shared:
                continue
            xs = [c[0] for c in shared]
            ys = [c[1] for c in shared]
            owner_a, owner_b = sorted((a.owner, b.owner))
            out.append(
                CollisionWitness(
                    owner_a,
                    owner_b,
                    TimeWindow(min(ticks), max(ticks)),
                    Box(min(xs), min(ys), max(xs), max(ys)),
                )
            )
    out.sort(
        key=lambda w: (w.owner_a, w.owner_b, w.overlap_window, w.overlap_box)
    )
    return out


def covered_cells_bruteforce(boxes) -> set:
    cells = set()
    for box in boxes:
        cells.update(box.normalized().cells())
    return cells


# ---------------------------------------------------------------------------
# Therac trigger oracle


def therac_first_disagreement(ops_with_times, window=8):
    """Index of the first electron selection hit by the stale-beam defect.

    Sliding scan over (op, time) pairs: the latest selection before an
    electron one must be a photon selection at most ``window`` ticks
    earlier, with a cursor-up strictly between the two. None if the
    defect never fires.
    """
    for k, (op, t3) in enumerate(ops_with_times):
        if op != OP_SELECT_ELECTRON:
            continue
        prior = [
            (o, t)
            for o, t in ops_with_times[:k]
            if o in (OP_SELECT_PHOTON, OP_SELECT_ELECTRON)
        ]
        if not prior or prior[-1][0] != OP_SELECT_PHOTON:
            continue
        t1 = prior[-1][1]
        if t3 - t1 > window:
            continue
        if any(
            o == OP_CURSOR_UP and t1 < t < t3 for o, t in ops_with_times[:k]
        ):
            return k
    return None


# ---------------------------------------------------------------------------
# Hypothesis strategies

coords = st.integers(min_value=-50, max_value=50)
ticks = st.integers(min_value=-100, max_value=100)
owner_names = st.sampled_from(["arm", "gantry", "AreaOfInterest", "cart"])

boxes = st.builds(Box, coords, coords, coords, coords)
windows = st.builds(TimeWindow, ticks, ticks)

_atoms = st.one_of(
    st.just(TrueAtom()),
    st.just(FalseAtom()),
    st.builds(TimeInterval, windows),
    st.builds(Owner, owner_names),
    st.builds(OccupyBox, boxes),
    st.builds(OccupyPoint, coords, coords),
)

invariants = st.recursive(
    _atoms,
    lambda children: st.one_of(
        st.builds(Not, children),
        st.builds(Implies, children, children),
        st.lists(children, min_size=1, max_size=4).map(And),
        st.lists(children, min_size=1, max_size=4).map(Or),
    ),
    max_leaves=25,
)

observations = st.builds(
    Observation,
    ticks,
    owner_names,
    st.lists(boxes, max_size=4).map(tuple),
)

occupancy_facts = st.builds(OccupancyFact, owner_names, windows, boxes)
