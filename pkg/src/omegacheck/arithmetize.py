"""Arithmetic statements about machine runs.

Two layers:

* `halted_by_formula(m, n, t, outcome)` builds a closed bounded sentence
  that is true in the standard model exactly when the machine reaches the
  chosen accepting state within t observed steps. It encodes the digit
  string of the run's configuration history: one bounded quantifier per
  tape-window digit, each pinned to the unique value the transition table
  allows given the previous row. Pinning keeps naive enumeration linear in
  the digit count, so truth really is computed by arithmetic evaluation,
  not by trusting the simulator.

* `halts_yes_formula` / `halts_no_formula` / `loops_formula` need a single
  formula with a free step-count variable, which cannot grow with t. They
  are built from a host-side run analysis (halt, exact configuration
  repeat, or a right-running translation pattern). A halting run embeds
  the full digit tableau at its actual halting point, so instances still
  carry checkable arithmetic content; a non-halting run yields a body that
  is false at every instance.

Quantifier bounds throughout are numeral constants computed here from the
machine, input and step budget; the window of tape positions is trimmed to
the cells the run actually visits (a sound bound, since heads move one
cell per step).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

from .machines import (
    Config,
    MachineDesc,
    StuckConfiguration,
    initial_config,
    step,
)
from .syntax import (
    Add,
    And,
    BoundedExists,
    Eq,
    Exists,
    ForAll,
    Formula,
    Le,
    Not,
    Or,
    Succ,
    Term,
    Var,
    ZERO,
    numeral,
)

DEFAULT_MAX_TRACE_STEPS = 128
DEFAULT_HORIZON = 5000

LOOPS_VAR = "t"


class EncodingOverflow(Exception):
    """The bounded coding cannot represent a trace of the requested length."""


class RunAnalysisError(Exception):
    """The run neither halted nor showed a recognized repetition pattern
    within the analysis horizon, so no faithful open formula can be built."""


FALSE_SENTENCE: Formula = Le(Succ(ZERO), ZERO)  # 1 <= 0


# ---------------------------------------------------------------------------
# Configuration coding


@dataclass(frozen=True)
class TraceEncoding:
    """Positional coding of configurations in a fixed window of cells.

    A plain cell holds its symbol's code (0 .. S-1); the head cell holds
    S + state_index * S + symbol_index. The base S * (Q + 1) therefore
    exceeds the alphabet x states product and the map is injective for
    configurations whose support fits the window.
    """

    machine: MachineDesc

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self.machine.alphabet))

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(sorted(self.machine.states))

    @property
    def base(self) -> int:
        return len(self.symbols) * (len(self.states) + 1)

    def cell_code(self, symbol: str) -> int:
        return self.symbols.index(symbol)

    def head_code(self, state: str, symbol: str) -> int:
        s = len(self.symbols)
        return s + self.states.index(state) * s + self.symbols.index(symbol)

    def config_digits(self, c: Config, lo: int, hi: int) -> list[int]:
        if not lo <= c.head <= hi:
            raise EncodingOverflow(f"head {c.head} outside window [{lo}, {hi}]")
        for pos, sym in c.tape.items():
            if sym != self.machine.blank and not lo <= pos <= hi:
                raise EncodingOverflow(f"cell {pos} outside window [{lo}, {hi}]")
        digits = []
        for pos in range(lo, hi + 1):
            sym = c.tape.get(pos, self.machine.blank)
            if pos == c.head:
                digits.append(self.head_code(c.state, sym))
            else:
                digits.append(self.cell_code(sym))
        return digits

    def encode_config(self, c: Config, lo: int, hi: int) -> int:
        value = 0
        for digit in reversed(self.config_digits(c, lo, hi)):
            value = value * self.base + digit
        return value

    def decode_config(self, code: int, lo: int, hi: int) -> Config:
        s = len(self.symbols)
        tape: dict[int, str] = {}
        head: Optional[int] = None
        state: Optional[str] = None
        for pos in range(lo, hi + 1):
            code, digit = divmod(code, self.base)
            if digit >= s:
                if head is not None:
                    raise EncodingOverflow("two head digits")
                state_index, sym_index = divmod(digit - s, s)
                head = pos
                state = self.states[state_index]
                sym = self.symbols[sym_index]
            else:
                sym = self.symbols[digit]
            if sym != self.machine.blank:
                tape[pos] = sym
        if code or head is None or state is None:
            raise EncodingOverflow("not a configuration code for this window")
        return Config(state, tape, head)


# ---------------------------------------------------------------------------
# Trace prefix and window


def trace_prefix(m: MachineDesc, n: int, t: int) -> tuple[list[Config], Optional[str]]:
    """Up to t configurations of the run; second value is the outcome if the
    machine was observed halting within those t steps ('stuck' for a dead
    non-accepting configuration)."""
    configs: list[Config] = []
    if t <= 0:
        return configs, None
    c = initial_config(m, n)
    configs.append(c)
    while len(configs) < t:
        if c.state in (m.accept_yes, m.accept_no):
            break
        try:
            result = step(m, c)
        except StuckConfiguration:
            return configs, "stuck"
        assert isinstance(result, Config)
        c = result
        configs.append(c)
    if c.state == m.accept_yes:
        return configs, "yes"
    if c.state == m.accept_no:
        return configs, "no"
    return configs, None


def trace_window(m: MachineDesc, n: int, t: int) -> tuple[int, int]:
    """Cell window covering every position the length-<=t run can touch,
    padded one cell on each side so neighbor lookups stay inside."""
    configs, _ = trace_prefix(m, n, t)
    heads = [c.head for c in configs] or [0]
    lo = min(0, min(heads)) - 1
    hi = max(max(heads), n - 1 if n > 0 else 0) + 1
    return lo, hi


# ---------------------------------------------------------------------------
# The bounded "halted within t steps" sentence

_CONST = "const"
_VAR = "var"


def _digit_name(row: int, col: int) -> str:
    return f"d{row}_{col}"


class _TableauBuilder:
    def __init__(self, m: MachineDesc, n: int, t: int):
        self.m = m
        self.enc = TraceEncoding(m)
        self.lo, self.hi = trace_window(m, n, t)
        self.t = t
        self.width = self.hi - self.lo + 1
        self.n_symbols = len(self.enc.symbols)
        init = initial_config(m, n)
        self.row0 = self.enc.config_digits(init, self.lo, self.hi)
        # Head codes, by what they mean for a neighboring cell.
        self.deliver_right: list[tuple[int, int]] = []  # (head code, new state idx)
        self.deliver_left: list[tuple[int, int]] = []
        self.stay_codes: list[int] = []  # accepting heads: row copies itself
        self.center_next: list[tuple[int, int]] = []  # (head code, written cell code)
        s = self.n_symbols
        for state in self.enc.states:
            for sym in self.enc.symbols:
                code = self.enc.head_code(state, sym)
                if state in (m.accept_yes, m.accept_no):
                    self.stay_codes.append(code)
                    continue
                move = m.transition.get((state, sym))
                if move is None:
                    continue  # stuck head: no successor case at all
                nstate, write, direction = move
                self.center_next.append((code, self.enc.cell_code(write)))
                if direction == "R":
                    self.deliver_right.append((code, self.enc.states.index(nstate)))
                else:
                    self.deliver_left.append((code, self.enc.states.index(nstate)))
        self.deliver_right_codes = sorted(code for code, _ in self.deliver_right)
        self.deliver_left_codes = sorted(code for code, _ in self.deliver_left)

    # Cells are (kind, value): kind 'const' carries an int, 'var' a name.

    def prev_cell(self, row_vars: list[tuple[str, object]], col: int):
        if 0 <= col < self.width:
            return row_vars[col]
        return (_CONST, self.enc.cell_code(self.m.blank))

    @staticmethod
    def _cell_term(cell) -> Term:
        kind, value = cell
        return numeral(value) if kind == _CONST else Var(value)

    @staticmethod
    def _eq_const(cell, value: int):
        """Partial-evaluated `cell == value`: a bool for constants."""
        kind, cur = cell
        if kind == _CONST:
            return cur == value
        return Eq(Var(cur), numeral(value))

    def _is_plain(self, cell):
        kind, cur = cell
        if kind == _CONST:
            return cur < self.n_symbols
        return Le(Var(cur), numeral(self.n_symbols - 1))

    def _member(self, cell, codes: list[int]):
        """Partial-evaluated disjunction `cell in codes`."""
        kind, cur = cell
        if kind == _CONST:
            return cur in codes
        out = None
        for code in codes:
            atom = Eq(Var(cur), numeral(code))
            out = atom if out is None else Or(out, atom)
        return out if out is not None else False

    def _no_incoming(self, cell, side: str):
        """The neighbor does not hand the head to this cell."""
        kind, cur = cell
        codes = (
            self.deliver_right_codes if side == "left" else self.deliver_left_codes
        )
        if kind == _CONST:
            return cur not in codes
        member = self._member(cell, codes)
        if member is False:
            return True
        return Not(member)

    def pin_cases(self, a, b, c, d_name: str) -> list[list[Formula]]:
        """All ways the digit below (a, b, c) can be justified.

        Each case is a conjunct list whose first element mentions the new
        digit variable, so enumeration rejects wrong values immediately.
        Statically false cases are dropped; statically true conjuncts are
        omitted.
        """
        d = Var(d_name)
        cases: list[list[Formula]] = []

        def add(conjuncts) -> None:
            out = []
            for item in conjuncts:
                if item is True:
                    continue
                if item is False:
                    return
                out.append(item)
            cases.append(out)

        # Plain cell keeps its symbol: nothing moves in.
        b_kind, b_val = b
        d_copy = Eq(d, self._cell_term(b))
        add(
            [
                d_copy,
                self._is_plain(b),
                self._no_incoming(a, "left"),
                self._no_incoming(c, "right"),
            ]
        )
        # The head sits here and fires a transition: cell gets the write.
        for code, write_code in self.center_next:
            add([Eq(d, numeral(write_code)), self._eq_const(b, code)])
        # The head sits here in an accepting state: the row repeats.
        stay = self._member(b, self.stay_codes)
        add([d_copy, stay])
        # The head arrives from the left (it moved right) or from the right.
        s = self.n_symbols
        for code, nstate_idx in self.deliver_right:
            offset = s * (1 + nstate_idx)
            if b_kind == _CONST:
                arrival = Eq(d, numeral(offset + b_val))
            else:
                arrival = Eq(d, Add(numeral(offset), Var(b_val)))
            add([arrival, self._is_plain(b), self._eq_const(a, code)])
        for code, nstate_idx in self.deliver_left:
            offset = s * (1 + nstate_idx)
            if b_kind == _CONST:
                arrival = Eq(d, numeral(offset + b_val))
            else:
                arrival = Eq(d, Add(numeral(offset), Var(b_val)))
            add([arrival, self._is_plain(b), self._eq_const(c, code)])
        return cases

    def build(self, outcome: str) -> Formula:
        accept_state = (
            self.m.accept_yes if outcome == "yes" else self.m.accept_no
        )
        accept_codes = [
            self.enc.head_code(accept_state, sym) for sym in self.enc.symbols
        ]
        rows: list[list[tuple[str, object]]] = [
            [(_CONST, v) for v in self.row0]
        ]
        # Pins, in quantifier order (row major, rows 1 .. t-1).
        pinned: list[tuple[str, Formula]] = []
        dead = False
        for row in range(1, self.t):
            prev = rows[-1]
            current: list[tuple[str, object]] = []
            for col in range(self.width):
                name = _digit_name(row, col)
                cases = self.pin_cases(
                    self.prev_cell(prev, col - 1),
                    self.prev_cell(prev, col),
                    self.prev_cell(prev, col + 1),
                    name,
                )
                if not cases:
                    dead = True
                    break
                pin: Formula | None = None
                for conjuncts in cases:
                    clause: Formula | None = None
                    for item in conjuncts:
                        clause = item if clause is None else And(clause, item)
                    if clause is None:
                        continue
                    pin = clause if pin is None else Or(pin, clause)
                if pin is None:
                    dead = True
                    break
                pinned.append((name, pin))
                current.append((_VAR, name))
            if dead:
                break
            rows.append(current)
        if dead:
            return FALSE_SENTENCE
        # The last row's head digit must be an accepting head of the right kind.
        final = rows[-1]
        accept: Formula | None = None
        for cell in final:
            for code in accept_codes:
                atom = Eq(self._cell_term(cell), numeral(code))
                accept = atom if accept is None else Or(accept, atom)
        assert accept is not None
        body = accept
        bound = numeral(self.enc.base - 1)
        for name, pin in reversed(pinned):
            body = BoundedExists(name, bound, And(pin, body))
        return body


def halted_by_formula(
    m: MachineDesc,
    n: int,
    t: int,
    outcome: str,
    max_steps: int = DEFAULT_MAX_TRACE_STEPS,
) -> Formula:
    """Closed bounded sentence: the run reaches the `outcome` accepting
    state within t observed steps (a history of at most t configurations).
    """
    if outcome not in ("yes", "no"):
        raise ValueError("outcome must be 'yes' or 'no'")
    if t < 0 or n < 0:
        raise ValueError("t and n are naturals")
    if t > max_steps:
        raise EncodingOverflow(
            f"trace length {t} exceeds the coding limit of {max_steps} steps"
        )
    if t == 0:
        return FALSE_SENTENCE
    return _TableauBuilder(m, n, t).build(outcome)


# ---------------------------------------------------------------------------
# Run analysis and the open halting bodies


@dataclass(frozen=True)
class RunSummary:
    kind: Literal["halts", "cycle", "runner", "stuck"]
    outcome: Optional[str] = None  # for "halts"
    steps: Optional[int] = None  # observed steps to halt / repeat / stuck


def analyze_run(m: MachineDesc, n: int, horizon: int = DEFAULT_HORIZON) -> RunSummary:
    """Classify the run on input n by simulating up to `horizon` steps.

    Detected non-halting patterns: an exact configuration repeat (state,
    head and tape all equal) and a right-runner (the head enters fresh
    blank territory twice in the same state with every intervening move
    to the right, after which behavior repeats shifted forever).
    """
    c = initial_config(m, n)
    seen: dict[tuple, int] = {}
    records: dict[str, tuple[int, int]] = {}  # state -> (step index, head)
    max_head = -1
    for index in range(horizon):
        if c.state == m.accept_yes:
            return RunSummary("halts", "yes", index + 1)
        if c.state == m.accept_no:
            return RunSummary("halts", "no", index + 1)
        key = (c.state, c.head, frozenset(c.tape.items()))
        if key in seen:
            return RunSummary("cycle", steps=index)
        seen[key] = index
        if c.head > max_head:
            max_head = c.head
            if c.head >= n:
                prior = records.get(c.state)
                if prior is not None and index - prior[0] == c.head - prior[1]:
                    return RunSummary("runner", steps=index)
                records[c.state] = (index, c.head)
        try:
            result = step(m, c)
        except StuckConfiguration:
            return RunSummary("stuck", steps=index + 1)
        assert isinstance(result, Config)
        c = result
    raise RunAnalysisError(
        f"no halt or repetition pattern within {horizon} steps"
    )


def halting_body(
    m: MachineDesc,
    n: int,
    outcome: str,
    var: str = LOOPS_VAR,
    horizon: int = DEFAULT_HORIZON,
    max_steps: int = DEFAULT_MAX_TRACE_STEPS,
) -> Formula:
    """Open formula in `var`: the run halts with `outcome` within var steps.

    For a run that halts this way at step u the body is
    `u <= var & <digit tableau at u>`; otherwise it is `var + 1 <= var`,
    false at every numeral.
    """
    summary = analyze_run(m, n, horizon)
    if summary.kind == "halts" and summary.outcome == outcome:
        witness = And(
            Le(numeral(summary.steps), Var(var)),
            halted_by_formula(m, n, summary.steps, outcome, max_steps=max_steps),
        )
        return witness
    return Le(Succ(Var(var)), Var(var))


def halts_yes_formula(m: MachineDesc, n: int, var: str = LOOPS_VAR) -> Formula:
    """One unbounded exists over a bounded body: the run halts with yes."""
    return Exists(var, halting_body(m, n, "yes", var))


def halts_no_formula(m: MachineDesc, n: int, var: str = LOOPS_VAR) -> Formula:
    return Exists(var, halting_body(m, n, "no", var))


def loops_formula(m: MachineDesc, n: int, var: str = LOOPS_VAR) -> Formula:
    """One unbounded forall over a bounded body: the run never halts."""
    return ForAll(
        var,
        Not(Or(halting_body(m, n, "yes", var), halting_body(m, n, "no", var))),
    )
