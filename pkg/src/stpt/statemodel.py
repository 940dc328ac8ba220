"""Behavioral specifications as init-state sets plus guarded actions.

A :class:`StateModel` declares its variables, a finite set of initial
states, and named actions (guard plus deterministic effect). An operation
with several same-named actions is nondeterministic: stepping it yields
every enabled effect result. Bounded enumeration produces all behaviours
up to a depth; a consistency scan flags suspicious specifications.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

Value = Union[bool, int, str]

DEFAULT_STATE_CAP = 100_000


class StateCapExceeded(RuntimeError):
    """The model has more distinct states than explicit enumeration allows."""

    def __init__(self, cap: int, visited: int):
        super().__init__(f"visited {visited} distinct states, cap is {cap}")
        self.cap = cap
        self.visited = visited


def _check_value(name: str, value: Value) -> None:
    if not isinstance(value, (bool, int, str)):
        raise TypeError(f"variable {name!r} bound to unsupported value {value!r}")


def _tag(value: Value) -> tuple[str, Value]:
    # bool is an int subclass, so equality and ordering go through the
    # class name tag to keep True distinct from 1.
    return (value.__class__.__name__, value)


class State:
    """Immutable binding of variable names to values.

    Equality is structural and variant-exact: an int binding never equals a
    bool binding even when Python would compare the raw values equal.
    """

    __slots__ = ("_items", "_tagged")

    def __init__(self, bindings: Mapping[str, Value]):
        items = tuple(sorted(bindings.items()))
        for name, value in items:
            _check_value(name, value)
        object.__setattr__(self, "_items", items)
        object.__setattr__(
            self, "_tagged", tuple((k, *_tag(v)) for k, v in items)
        )

    def __getitem__(self, name: str) -> Value:
        for key, value in self._items:
            if key == name:
                return value
        raise KeyError(name)

    def get(self, name: str, default: Optional[Value] = None) -> Optional[Value]:
        try:
            return self[name]
        except KeyError:
            return default

    def __contains__(self, name: str) -> bool:
        return any(key == name for key, _ in self._items)

    def __iter__(self):
        return iter(name for name, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self._items)

    def items(self) -> tuple[tuple[str, Value], ...]:
        return self._items

    def assign(self, **changes: Value) -> State:
        """New state with the given existing variables rebound."""
        bindings = dict(self._items)
        for name, value in changes.items():
            if name not in bindings:
                raise KeyError(f"cannot assign undeclared variable {name!r}")
            bindings[name] = value
        return State(bindings)

    @property
    def sort_key(self) -> tuple:
        """Total, deterministic ordering key (repr-based across variants)."""
        return tuple((k, tag, repr(v)) for k, tag, v in self._tagged)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self._tagged == other._tagged

    def __hash__(self) -> int:
        return hash(self._tagged)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._items)
        return f"State({inner})"


@dataclass(frozen=True, eq=False)
class ActionSpec:
    """Named guarded transition. Guard and effect must be pure."""

    name: str
    guard: Callable[[State], bool]
    effect: Callable[[State], State]


class StepOutcome:
    """Result of applying one operation name in one state."""

    __slots__ = ()


@dataclass(frozen=True)
class NextStates(StepOutcome):
    states: tuple[State, ...]


@dataclass(frozen=True)
class Disabled(StepOutcome):
    pass


@dataclass(frozen=True)
class UnknownOperation(StepOutcome):
    pass


@dataclass(frozen=True)
class Behaviour:
    """A legal run: states starting in init, one action name per step."""

    states: tuple[State, ...]
    actions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("a behaviour has at least one state")
        if len(self.actions) != len(self.states) - 1:
            raise ValueError("need exactly one action name per transition")


@dataclass(frozen=True)
class StateModel:
    """Declared variables, finite init set, and guarded named actions.

    Init is stored deduplicated in a canonical order so every derived
    collection is deterministic. An empty init is constructible (the
    consistency scan reports it) but yields no behaviours.
    """

    variables: tuple[str, ...]
    init: tuple[State, ...]
    actions: tuple[ActionSpec, ...] = ()

    def __init__(
        self,
        variables: Iterable[str],
        init: Iterable[State],
        actions: Iterable[ActionSpec] = (),
    ):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        states = []
        for s in init:
            self._require_binds(variables, s)
            if s not in states:
                states.append(s)
        states.sort(key=lambda s: s.sort_key)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "init", tuple(states))
        object.__setattr__(self, "actions", tuple(actions))

    @staticmethod
    def _require_binds(variables: tuple[str, ...], s: State) -> None:
        if set(s.variables) != set(variables):
            raise ValueError(
                f"state binds {s.variables}, model declares {variables}"
            )

    def check_state(self, s: State) -> None:
        self._require_binds(self.variables, s)

    @property
    def action_names(self) -> tuple[str, ...]:
        """Distinct action names in declaration order."""
        seen = []
        for action in self.actions:
            if action.name not in seen:
                seen.append(action.name)
        return tuple(seen)


# ---------------------------------------------------------------------------
# Warnings from the consistency scan


@dataclass(frozen=True)
class SpecWarning:
    pass


@dataclass(frozen=True)
class EmptyInit(SpecWarning):
    pass


@dataclass(frozen=True)
class NeverEnabled(SpecWarning):
    action: str


@dataclass(frozen=True)
class NoOpEffect(SpecWarning):
    action: str


# ---------------------------------------------------------------------------
# Operations


def step(model: StateModel, s: State, op_name: str) -> StepOutcome:
    """Apply one operation name: unknown, disabled, or its successor states.

    Successors are the distinct effect results of every enabled action with
    that name, in declaration order.
    """
    model.check_state(s)
    named = [a for a in model.actions if a.name == op_name]
    if not named:
        return UnknownOperation()
    enabled = [a for a in named if a.guard(s)]
    if not enabled:
        return Disabled()
    states: list[State] = []
    for action in enabled:
        result = action.effect(s)
        model.check_state(result)
        if result not in states:
            states.append(result)
    return NextStates(tuple(states))


def enabled_actions(model: StateModel, s: State) -> list[str]:
    """Duplicate-free action names with a true guard at ``s``, declaration order."""
    model.check_state(s)
    names = []
    for action in model.actions:
        if action.name not in names and action.guard(s):
            names.append(action.name)
    return names


def correct_behaviours(
    model: StateModel, depth: int, state_cap: int = DEFAULT_STATE_CAP
) -> tuple[Behaviour, ...]:
    """All behaviours with at most ``depth`` transitions, prefixes included.

    Breadth-first from every init state, expanding every enabled action.
    Output is ordered lexicographically by action-name sequence. Raises
    :class:`StateCapExceeded` when the distinct states seen pass the cap.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if state_cap < 1:
        raise ValueError("state_cap must be positive")
    visited = set(model.init)
    if len(visited) > state_cap:
        raise StateCapExceeded(state_cap, len(visited))
    frontier = [Behaviour((s,), ()) for s in model.init]
    out = list(frontier)
    names = sorted(set(model.action_names))
    for _ in range(depth):
        grown = []
        for behaviour in frontier:
            last = behaviour.states[-1]
            for name in names:
                outcome = step(model, last, name)
                if not isinstance(outcome, NextStates):
                    continue
                for nxt in outcome.states:
                    if nxt not in visited:
                        visited.add(nxt)
                        if len(visited) > state_cap:
                            raise StateCapExceeded(state_cap, len(visited))
                    grown.append(
                        Behaviour(
                            behaviour.states + (nxt,),
                            behaviour.actions + (name,),
                        )
                    )
        out.extend(grown)
        frontier = grown
        if not frontier:
            break
    out.sort(key=lambda b: b.actions)
    return tuple(out)


def _reachable_states(model: StateModel, state_cap: int) -> list[State]:
    """Closure of init under all enabled actions, in first-visit order."""
    seen = list(model.init)
    seen_set = set(seen)
    if len(seen_set) > state_cap:
        raise StateCapExceeded(state_cap, len(seen_set))
    queue = list(seen)
    while queue:
        current = queue.pop(0)
        for action in model.actions:
            if not action.guard(current):
                continue
            nxt = action.effect(current)
            model.check_state(nxt)
            if nxt in seen_set:
                continue
            seen_set.add(nxt)
            if len(seen_set) > state_cap:
                raise StateCapExceeded(state_cap, len(seen_set))
            seen.append(nxt)
            queue.append(nxt)
    return seen


def spec_consistency(
    model: StateModel,
    state_cap: int = DEFAULT_STATE_CAP,
    suppress_noop: Iterable[str] = (),
) -> list[SpecWarning]:
    """Scan every reachable state for specification smells.

    Reports an empty init set, actions whose guard never holds, and actions
    that never change the state anywhere they are enabled. Operations that
    are deliberate observers can be excluded from the no-op check through
    ``suppress_noop``.
    """
    suppress = set(suppress_noop)
    warnings: list[SpecWarning] = []
    if not model.init:
        warnings.append(EmptyInit())
    reachable = _reachable_states(model, state_cap)
    enabled_somewhere: set[str] = set()
    changed_somewhere: set[str] = set()
    for action in model.actions:
        for s in reachable:
            if not action.guard(s):
                continue
            enabled_somewhere.add(action.name)
            if action.effect(s) != s:
                changed_somewhere.add(action.name)
    for name in model.action_names:
        if name not in enabled_somewhere:
            warnings.append(NeverEnabled(name))
    for name in model.action_names:
        if name in enabled_somewhere and name not in changed_somewhere:
            if name not in suppress:
                warnings.append(NoOpEffect(name))
    return warnings


# ---------------------------------------------------------------------------
# Deterministic export


def _format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_state(s: State) -> str:
    return " ".join(f"{k}={_format_value(v)}" for k, v in s.items())


def format_behaviours(behaviours: Sequence[Behaviour]) -> str:
    """Stable text rendering of a behaviour set, one record per behaviour."""
    lines = [f"# behaviours: {len(behaviours)}"]
    for index, behaviour in enumerate(behaviours):
        lines.append(f"behaviour {index}")
        lines.append(f"  init: {format_state(behaviour.states[0])}")
        actions = ", ".join(behaviour.actions) if behaviour.actions else "(none)"
        lines.append(f"  actions: {actions}")
        states = " | ".join(format_state(s) for s in behaviour.states)
        lines.append(f"  states: {states}")
    return "\n".join(lines) + "\n"
