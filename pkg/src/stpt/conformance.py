"""Conformance checking of a running system against a state model.

A command sequence is replayed against both the model and the system
under test (SUT). The SUT side is asynchronous: every applied command
yields a :class:`Deferred` that completes with a raw observation. An
abstraction function maps raw observations back into model states, and a
subset construction tracks which model states remain consistent. Spatial
obligations are evaluated against the occupancy facts each observation
reports. Failures carry a witness and a coarse classification of where
the blame likely lies.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Generic, Optional, Protocol, TypeVar, Union

from .genrand import Command, CommandSequence, Generator, NotFailing, Rng, shrink_sequence
from .spatial import Invariant, Observation, OccupancyFact, evaluate, normalize
from .statemodel import (
    NextStates,
    State,
    StateModel,
    UnknownOperation,
    step,
)

A = TypeVar("A")


class AlreadyCompleted(RuntimeError):
    """A deferred result can be resolved exactly once."""


class NotAFailure(ValueError):
    """classify() was handed a passing result."""


class Deferred(Generic[A]):
    """Single-assignment asynchronous result.

    Resolve with :meth:`complete` or :meth:`fail`; consume with
    :meth:`wait` or a single :meth:`on_complete` callback. The callback
    fires on the resolving thread (or immediately if already resolved).
    """

    def __init__(self) -> None:
        self._event = threading.Event()
        self._lock = threading.Lock()
        self._outcome: Optional[tuple[str, Any]] = None
        self._callback: Optional[Callable[[tuple[str, Any]], None]] = None

    @classmethod
    def successful(cls, value: A) -> Deferred[A]:
        d: Deferred[A] = cls()
        d.complete(value)
        return d

    @classmethod
    def failed(cls, error: BaseException) -> Deferred[A]:
        d: Deferred[A] = cls()
        d.fail(error)
        return d

    def complete(self, value: A) -> None:
        self._resolve(("ok", value))

    def fail(self, error: BaseException) -> None:
        self._resolve(("failed", error))

    def _resolve(self, outcome: tuple[str, Any]) -> None:
        with self._lock:
            if self._outcome is not None:
                raise AlreadyCompleted("deferred already resolved")
            self._outcome = outcome
            callback = self._callback
        self._event.set()
        if callback is not None:
            callback(outcome)

    def on_complete(self, callback: Callable[[tuple[str, Any]], None]) -> None:
        with self._lock:
            if self._callback is not None:
                raise ValueError("on_complete supports a single callback")
            if self._outcome is None:
                self._callback = callback
                return
            outcome = self._outcome
        callback(outcome)

    def wait(self, timeout: Optional[float] = None) -> Optional[tuple[str, Any]]:
        """Outcome tuple ("ok", value) / ("failed", error), or None on timeout."""
        if not self._event.wait(timeout):
            return None
        return self._outcome


@dataclass(frozen=True)
class RawObservation:
    """What the SUT reports after a step: payload, occupancy claims, clock."""

    payload: Any
    occupancy: tuple[OccupancyFact, ...] = ()
    clock: int = 0


class SutAdapter(Protocol):
    def reset(self) -> Deferred[RawObservation]: ...

    def apply(self, command: Command, at_time: int) -> Deferred[RawObservation]: ...

    def vocabulary(self) -> tuple[str, ...]: ...


Abstraction = Callable[[RawObservation], State]


class FailKind(str, Enum):
    SUT_MISMATCH = "SutMismatch"
    INIT_MISMATCH = "InitMismatch"
    DISABLED_ACTION = "DisabledAction"
    UNKNOWN_OPERATION = "UnknownOperation"
    SPATIAL_VIOLATION = "SpatialViolation"
    TIMEOUT = "Timeout"
    SUT_ERROR = "SutError"


@dataclass(frozen=True)
class Witness:
    """Everything needed to understand (and replay) one failure."""

    sequence: CommandSequence
    fail_index: Optional[int]  # None when the initial state already diverges
    expected_states: tuple[State, ...] = ()
    observed_state: Optional[State] = None
    invariant: Optional[Invariant] = None
    observation: Optional[Observation] = None
    note: str = ""


@dataclass(frozen=True)
class Pass:
    pass


@dataclass(frozen=True)
class Fail:
    kind: FailKind
    witness: Witness


CheckResult = Union[Pass, Fail]


def _spatial_observations(raw: RawObservation) -> list[Observation]:
    """Current occupancy grouped per owner, at the observation's clock."""
    per_owner: dict[str, list] = {}
    for fact in raw.occupancy:
        if fact.window.contains(raw.clock):
            per_owner.setdefault(fact.owner, []).append(fact.box)
    return [
        Observation(time=raw.clock, owner=owner, occupied=tuple(boxes))
        for owner, boxes in sorted(per_owner.items())
    ]


def check_against(
    model: StateModel,
    adapter: SutAdapter,
    abstraction: Abstraction,
    seq: CommandSequence,
    st_invariants: tuple[Invariant, ...] = (),
    timeout: float = 5.0,
) -> CheckResult:
    """Replay ``seq`` against model and SUT; first divergence wins.

    Per command the model side is consulted first, so an operation the
    model rejects (unknown or disabled everywhere in the consistent set)
    fails before it ever reaches the SUT.
    """
    invariants = tuple(normalize(inv) for inv in st_invariants)
    settled = adapter.reset().wait(timeout)
    if settled is None:
        return Fail(
            FailKind.TIMEOUT,
            Witness(
                sequence=seq,
                fail_index=None,
                expected_states=model.init,
                note=f"reset did not complete within {timeout}s",
            ),
        )
    status, value = settled
    if status == "failed":
        return Fail(
            FailKind.SUT_ERROR,
            Witness(
                sequence=seq,
                fail_index=None,
                expected_states=model.init,
                note=f"SUT reset raised {value!r}",
            ),
        )
    raw = value
    observed = abstraction(raw)
    consistent = [s for s in model.init if s == observed]
    if not consistent:
        return Fail(
            FailKind.INIT_MISMATCH,
            Witness(
                sequence=seq,
                fail_index=None,
                expected_states=model.init,
                observed_state=observed,
                note="initial SUT state is not an init state of the model",
            ),
        )
    for index, (command, at_time) in enumerate(zip(seq, seq.timestamps)):
        outcomes = [step(model, s, command.op) for s in consistent]
        if all(isinstance(o, UnknownOperation) for o in outcomes):
            return Fail(
                FailKind.UNKNOWN_OPERATION,
                Witness(
                    sequence=seq,
                    fail_index=index,
                    expected_states=tuple(consistent),
                    note=f"operation {command.op!r} not declared in model",
                ),
            )
        successors: list[State] = []
        for outcome in outcomes:
            if isinstance(outcome, NextStates):
                for s in outcome.states:
                    if s not in successors:
                        successors.append(s)
        if not successors:
            return Fail(
                FailKind.DISABLED_ACTION,
                Witness(
                    sequence=seq,
                    fail_index=index,
                    expected_states=tuple(consistent),
                    note=(
                        "specification inconsistency: operation "
                        f"{command.op!r} not enabled in model"
                    ),
                ),
            )
        deferred = adapter.apply(command, at_time)
        settled = deferred.wait(timeout)
        if settled is None:
            return Fail(
                FailKind.TIMEOUT,
                Witness(
                    sequence=seq,
                    fail_index=index,
                    expected_states=tuple(successors),
                    note=f"no completion within {timeout}s",
                ),
            )
        status, value = settled
        if status == "failed":
            return Fail(
                FailKind.SUT_ERROR,
                Witness(
                    sequence=seq,
                    fail_index=index,
                    expected_states=tuple(successors),
                    note=f"SUT raised {value!r}",
                ),
            )
        raw = value
        observed = abstraction(raw)
        consistent = [s for s in successors if s == observed]
        if not consistent:
            return Fail(
                FailKind.SUT_MISMATCH,
                Witness(
                    sequence=seq,
                    fail_index=index,
                    expected_states=tuple(
                        sorted(successors, key=lambda s: s.sort_key)
                    ),
                    observed_state=observed,
                    note="observed state matches no model successor",
                ),
            )
        for invariant in invariants:
            for observation in _spatial_observations(raw):
                if not evaluate(invariant, observation):
                    return Fail(
                        FailKind.SPATIAL_VIOLATION,
                        Witness(
                            sequence=seq,
                            fail_index=index,
                            expected_states=tuple(consistent),
                            observed_state=observed,
                            invariant=invariant,
                            observation=observation,
                            note="spatial obligation violated",
                        ),
                    )
    return Pass()


_SPEC_SUSPECT = "suspect: specification"
_SUT_SUSPECT = "suspect: system under test (or spec; engineer judgment)"
_SPATIAL_SUSPECT = "suspect: system under test spatial behaviour"

_CLASSIFICATION = {
    FailKind.INIT_MISMATCH: _SPEC_SUSPECT,
    FailKind.DISABLED_ACTION: _SPEC_SUSPECT,
    FailKind.UNKNOWN_OPERATION: _SPEC_SUSPECT,
    FailKind.SUT_MISMATCH: _SUT_SUSPECT,
    FailKind.SUT_ERROR: _SUT_SUSPECT,
    FailKind.TIMEOUT: _SUT_SUSPECT,
    FailKind.SPATIAL_VIOLATION: _SPATIAL_SUSPECT,
}


def classify(result) -> str:
    """Rough blame assignment for a failure; raises on a passing result."""
    if isinstance(result, Pass):
        raise NotAFailure("cannot classify a passing result")
    if isinstance(result, Fail):
        return _CLASSIFICATION[result.kind]
    if isinstance(result, FailKind):
        return _CLASSIFICATION[result]
    raise TypeError(f"expected a check result, got {result!r}")


@dataclass(frozen=True)
class FailureRecord:
    test_index: int
    kind: FailKind
    classification: str
    original: Witness
    shrunk: Witness


@dataclass(frozen=True)
class RunReport:
    seed: int
    tests_run: int
    tests_failed: int
    failures: tuple[FailureRecord, ...]
    wall_ms: float


def run_property(
    model: StateModel,
    adapter: Optional[SutAdapter],
    abstraction: Abstraction,
    cmd_gen: Generator[CommandSequence],
    st_invariants: tuple[Invariant, ...] = (),
    num_tests: int = 100,
    seed: int = 0,
    timeout: float = 5.0,
    workers: int = 1,
    adapter_factory: Optional[Callable[[], SutAdapter]] = None,
) -> RunReport:
    """Run ``num_tests`` random sequences; shrink and record every failure.

    Each test draws from its own split of the root Rng, so results do not
    depend on the worker count, only on the seed. With ``workers > 1`` an
    ``adapter_factory`` must supply one adapter per worker thread.
    """
    if num_tests < 1:
        raise ValueError("num_tests must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if adapter is None and adapter_factory is None:
        raise ValueError("need an adapter or an adapter_factory")
    if workers > 1 and adapter_factory is None:
        raise ValueError("parallel runs need an adapter_factory")

    started = time.monotonic()
    root = Rng.from_seed(seed)
    test_rngs = []
    for _ in range(num_tests):
        root, child = root.split()
        test_rngs.append(child)

    local = threading.local()

    def worker_adapter() -> SutAdapter:
        if adapter_factory is None:
            return adapter  # type: ignore[return-value]
        if not hasattr(local, "adapter"):
            local.adapter = adapter_factory()
        return local.adapter

    def run_one(test_index: int) -> Optional[FailureRecord]:
        sut = worker_adapter()
        seq, _ = cmd_gen.run(test_rngs[test_index])
        result = check_against(
            model, sut, abstraction, seq, st_invariants, timeout
        )
        if isinstance(result, Pass):
            return None
        kind = result.kind

        def still_fails(candidate: CommandSequence) -> bool:
            rerun = check_against(
                model, sut, abstraction, candidate, st_invariants, timeout
            )
            return isinstance(rerun, Fail) and rerun.kind == kind

        try:
            smaller = shrink_sequence(seq, still_fails)
        except NotFailing:
            # flaky SUT: keep the original witness
            smaller = seq
        if smaller is seq:
            shrunk_witness = result.witness
        else:
            shrunk = check_against(
                model, sut, abstraction, smaller, st_invariants, timeout
            )
            assert isinstance(shrunk, Fail) and shrunk.kind == kind
            shrunk_witness = shrunk.witness
        return FailureRecord(
            test_index=test_index,
            kind=kind,
            classification=classify(result),
            original=result.witness,
            shrunk=shrunk_witness,
        )

    records: list[Optional[FailureRecord]]
    if workers == 1:
        records = [run_one(i) for i in range(num_tests)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_one, range(num_tests)))

    failures = tuple(r for r in records if r is not None)
    wall_ms = (time.monotonic() - started) * 1000.0
    return RunReport(
        seed=seed,
        tests_run=num_tests,
        tests_failed=len(failures),
        failures=failures,
        wall_ms=wall_ms,
    )
