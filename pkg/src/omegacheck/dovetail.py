"""Dovetailed proof search against a step-metered verifier, and the
three-thread halting search built on top of it.

The search enumerates candidate byte strings in shortlex order and runs the
verifier on them triangularly: in round r, candidates 0..r each receive one
verifier step (already-decided candidates are final and step vacuously).
This keeps a candidate the verifier diverges on from blocking everything
behind it.

The halting search for (m, n) spins up three fair logical threads hunting
proofs of "halts with yes", "halts with no" and "never halts". It is a
deterministic round-robin over single verifier steps; anything calling
itself parallel must be observationally identical to that. In pure mode
each thread is the dovetailed search itself, which at desk scale never
reaches interesting proofs and exists to demonstrate exactly that. In
witness mode candidates are generated from simulation and the certificate
builder, then pushed through the same unmodified verifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generator, Optional

from . import wire
from .arithmetize import halts_no_formula, halts_yes_formula, loops_formula
from .kernel import (
    Proof,
    ProofStep,
    RULE_EVAL_TRUE,
    RULE_LOGIC,
    RULE_MP,
    check_step,
)
from .machines import Halted, MachineDesc, StuckConfiguration, initial_config, step
from .omega import (
    DEFAULT_INSTANCE_BUDGET,
    DEFAULT_OMEGA_BOUND,
    OmegaProof,
    OmegaStep,
    build_loops_certificate,
    check_instance,
    deserialize_omega_proof,
    serialize_omega_proof,
)
from .syntax import Exists, Formula, Implies, numeral, substitute


@dataclass(frozen=True)
class SearchBudget:
    max_total_oracle_steps: int = 200_000
    max_candidates: int = 20_000

    def __post_init__(self):
        if self.max_total_oracle_steps < 1 or self.max_candidates < 1:
            raise ValueError("budgets must be >= 1")


DEFAULT_BUDGET = SearchBudget()


class OracleRun:
    """One candidate under verification: deterministic single-stepping,
    final once yes or no."""

    def __init__(self, work: Generator[None, None, bool]):
        self._work = work
        self.state = "running"

    def step(self) -> str:
        if self.state != "running":
            return self.state
        try:
            next(self._work)
        except StopIteration as stop:
            self.state = "yes" if stop.value else "no"
        return self.state


class VerifierOracle:
    def open(self, candidate: bytes, target: Formula) -> OracleRun:
        raise NotImplementedError


class RealProofOracle(VerifierOracle):
    """The kernel as a stepped oracle: one step to deserialize, one per
    proof step; the last step also settles the target comparison."""

    def __init__(self, gamma=frozenset()):
        self.gamma = frozenset(gamma)

    def open(self, candidate: bytes, target: Formula) -> OracleRun:
        return OracleRun(self._verify(candidate, target))

    def _verify(self, candidate: bytes, target: Formula):
        try:
            proof = wire.deserialize_proof(candidate)
        except wire.MalformedEncoding:
            return False
        conclusions: list[Formula] = []
        dependencies: list[frozenset] = []
        for index, s in enumerate(proof.steps):
            yield
            bad, deps = check_step(s, index, conclusions, self.gamma, dependencies)
            if bad is not None:
                return False
            conclusions.append(s.conclusion)
            dependencies.append(deps)
        return conclusions[-1] == target


class OmegaVerifierOracle(VerifierOracle):
    """Verifier that also understands omega steps, metering them one
    instance per oracle step. A yes on a proof containing an omega step
    means "all instances up to k verified" and nothing more; the oracle
    interface has no way to say anything stronger, which is the point."""

    def __init__(
        self,
        gamma=frozenset(),
        k: int = DEFAULT_OMEGA_BOUND,
        per_instance_budget: int = DEFAULT_INSTANCE_BUDGET,
    ):
        self.gamma = frozenset(gamma)
        self.k = k
        self.per_instance_budget = per_instance_budget

    def open(self, candidate: bytes, target: Formula) -> OracleRun:
        return OracleRun(self._verify(candidate, target))

    def _verify(self, candidate: bytes, target: Formula):
        try:
            proof = deserialize_omega_proof(candidate)
        except wire.MalformedEncoding:
            return False
        conclusions: list[Formula] = []
        dependencies: list[frozenset] = []
        for index, s in enumerate(proof.steps):
            yield
            if isinstance(s, OmegaStep):
                if not s.gamma <= self.gamma:
                    return False
                for instance in range(self.k + 1):
                    if check_instance(s, instance, self.per_instance_budget):
                        return False
                    if instance < self.k:
                        yield
                conclusions.append(s.conclusion)
                dependencies.append(s.gamma)
            else:
                bad, deps = check_step(
                    s, index, conclusions, self.gamma, dependencies
                )
                if bad is not None:
                    return False
                conclusions.append(s.conclusion)
                dependencies.append(deps)
        return conclusions[-1] == target


@dataclass(frozen=True)
class SearchResult:
    found: bool
    index: Optional[int] = None
    proof: Optional[bytes] = None
    rounds: int = 0
    steps: int = 0


def _bfs_units(
    target: Formula,
    oracle: VerifierOracle,
    max_candidates: int,
    alphabet: tuple[int, ...],
) -> Generator[int, None, Optional[tuple[int, bytes]]]:
    """Triangular dovetailing. Yields the current round number once per
    oracle step taken; the step that elicits a yes is reported by the
    return value instead of a final yield."""
    candidates: list[bytes] = []
    runs: list[OracleRun] = []
    active: list[int] = []
    round_index = 0
    while True:
        if round_index < max_candidates:
            data = wire.proof_at_index(round_index, alphabet)
            candidates.append(data)
            runs.append(oracle.open(data, target))
            active.append(round_index)
        still = []
        for i in active:
            answer = runs[i].step()
            if answer == "yes":
                return (i, candidates[i])
            yield round_index
            if answer == "running":
                still.append(i)
        active = still
        round_index += 1
        if not active and round_index >= max_candidates:
            return None


def bfs_search(
    target: Formula,
    oracle: VerifierOracle,
    budget: SearchBudget = DEFAULT_BUDGET,
    alphabet: tuple[int, ...] = wire.DEFAULT_ALPHABET,
) -> SearchResult:
    """Dovetailed shortlex search for a candidate the oracle accepts.

    Deterministic given the oracle and budget; the result carries the
    candidate's enumeration index so callers can audit where it was found.
    """
    units = _bfs_units(target, oracle, budget.max_candidates, alphabet)
    steps = 0
    rounds = 0
    while True:
        if steps >= budget.max_total_oracle_steps:
            return SearchResult(False, rounds=rounds, steps=steps)
        try:
            seen_round = next(units)
        except StopIteration as stop:
            steps += 1
            if stop.value is None:
                return SearchResult(False, rounds=rounds, steps=steps - 1)
            index, data = stop.value
            return SearchResult(True, index, data, rounds, steps)
        steps += 1
        rounds = seen_round + 1


# ---------------------------------------------------------------------------
# The three-thread halting search


@dataclass(frozen=True)
class ThreadProgress:
    units: int
    done: bool


@dataclass(frozen=True)
class HOutcome:
    kind: str  # halts_yes | halts_no | loops | budget_exhausted
    proof: Optional[bytes] = None
    thread: Optional[int] = None
    candidate_index: Optional[int] = None
    omega_bound: Optional[int] = None
    progress: tuple[ThreadProgress, ...] = ()

    KINDS = frozenset({"halts_yes", "halts_no", "loops", "budget_exhausted"})


def existence_proof(body: Formula, var: str, witness: int) -> Proof:
    """instance, instance -> exists, modus ponens."""
    target = Exists(var, body)
    instance = substitute(body, var, numeral(witness))
    steps = (
        ProofStep(instance, RULE_EVAL_TRUE),
        ProofStep(
            Implies(instance, target),
            RULE_LOGIC,
            payload=("exists-intro", (var, body, numeral(witness))),
        ),
        ProofStep(target, RULE_MP, premises=(1, 0)),
    )
    return Proof(steps, target)


def _idle() -> Generator[int, None, None]:
    while True:
        yield 0


def _witness_halt_thread(
    m: MachineDesc,
    n: int,
    wanted: str,
    target: Formula,
    oracle: VerifierOracle,
) -> Generator[int, None, Optional[tuple[bytes, Optional[int]]]]:
    """Simulate (one unit per observed step); on halting the wanted way,
    assemble the instance-plus-introduction proof and verify it."""
    config = initial_config(m, n)
    used = 0
    outcome: Optional[str] = None
    while outcome is None:
        try:
            result = step(m, config)
        except StuckConfiguration:
            yield from _idle()
        used += 1
        if isinstance(result, Halted):
            outcome = result.outcome
        else:
            config = result
            yield used
    if outcome != wanted:
        yield from _idle()
    yield used  # the unit that observed the halt
    assert isinstance(target, Exists)
    proof = existence_proof(target.body, target.var, used)
    data = wire.serialize_proof(proof)
    run_ = oracle.open(data, target)
    while True:
        answer = run_.step()
        if answer == "yes":
            return (data, None)
        if answer == "no":
            yield from _idle()
        yield used


def _witness_loops_thread(
    m: MachineDesc,
    n: int,
    target: Formula,
    k: int,
    instance_budget: int,
) -> Generator[int, None, Optional[tuple[bytes, Optional[int]]]]:
    """Check the loops certificate one instance per unit; instances still
    flow through the unmodified kernel."""
    cert = build_loops_certificate(m, n)
    if cert.conclusion != target:
        yield from _idle()
    for instance in range(k + 1):
        if check_instance(cert, instance, instance_budget) is not None:
            yield from _idle()
        if instance < k:
            yield instance
    proof = OmegaProof((cert,), target)
    return (serialize_omega_proof(proof), k)


def halting_search(
    m: MachineDesc,
    n: int,
    budget: SearchBudget = DEFAULT_BUDGET,
    mode: str = "witness",
    omega_bound: int = DEFAULT_OMEGA_BOUND,
    instance_budget: int = DEFAULT_INSTANCE_BUDGET,
    oracle_factory: Optional[Callable[[int, Formula], VerifierOracle]] = None,
    alphabet: tuple[int, ...] = wire.DEFAULT_ALPHABET,
) -> HOutcome:
    """Search for a proof of one of the three halting statements for (m, n);
    the first thread to verify a candidate wins.

    Scheduling is a deterministic round-robin granting each thread one
    verifier/simulation unit per round, so outcomes are reproducible and
    per-thread effort stays within one round of equal at every prefix.
    """
    if mode not in ("pure", "witness"):
        raise ValueError("mode is 'pure' or 'witness'")
    q_yes = halts_yes_formula(m, n)
    q_no = halts_no_formula(m, n)
    q_loops = loops_formula(m, n)
    targets = (q_yes, q_no, q_loops)
    if oracle_factory is None:

        def oracle_factory(thread: int, _target: Formula) -> VerifierOracle:
            if thread == 3:
                return OmegaVerifierOracle(
                    k=omega_bound, per_instance_budget=instance_budget
                )
            return RealProofOracle()

    if mode == "pure":
        threads = [
            _bfs_units(
                targets[i],
                oracle_factory(i + 1, targets[i]),
                budget.max_candidates,
                alphabet,
            )
            for i in range(3)
        ]
    else:
        threads = [
            _witness_halt_thread(m, n, "yes", q_yes, oracle_factory(1, q_yes)),
            _witness_halt_thread(m, n, "no", q_no, oracle_factory(2, q_no)),
            _witness_loops_thread(m, n, q_loops, omega_bound, instance_budget),
        ]
    units = [0, 0, 0]
    finished = [False, False, False]
    kinds = ("halts_yes", "halts_no", "loops")
    total = 0
    while total < budget.max_total_oracle_steps and not all(finished):
        for thread_index in range(3):
            if total >= budget.max_total_oracle_steps:
                break
            if finished[thread_index]:
                continue
            units[thread_index] += 1
            total += 1
            try:
                next(threads[thread_index])
            except StopIteration as stop:
                finished[thread_index] = True
                if stop.value is None:
                    continue
                progress = tuple(
                    ThreadProgress(units[i], finished[i]) for i in range(3)
                )
                if mode == "pure":
                    index, data = stop.value
                    return HOutcome(
                        kinds[thread_index],
                        proof=data,
                        thread=thread_index + 1,
                        candidate_index=index,
                        omega_bound=omega_bound if thread_index == 2 else None,
                        progress=progress,
                    )
                data, bound = stop.value
                return HOutcome(
                    kinds[thread_index],
                    proof=data,
                    thread=thread_index + 1,
                    omega_bound=bound,
                    progress=progress,
                )
    return HOutcome(
        "budget_exhausted",
        progress=tuple(ThreadProgress(units[i], finished[i]) for i in range(3)),
    )
