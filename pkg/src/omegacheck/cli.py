"""Command line front end.

Subcommands: check, encode, simulate, hsearch, omega-check. Exit codes are
uniform so shell harnesses can assert outcomes:

    0  accepted / decided / emitted
    2  rejected / answered no
    3  budget or step limit exhausted / timeout
    4  unparseable input (position reported where available)
    5  encoding limits exceeded

Reports are line oriented. With --format records every line is `key=value`
with a stable key order, and each acceptance report names the inputs and
bounds needed to reproduce the verdict.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading
from pathlib import Path
from typing import Optional

from . import arithmetize, dovetail, kernel, machines, omega, wire
from .syntax import (
    Formula,
    SyntaxError_,
    free_vars,
    parse_formula,
    parse_term,
    print_formula,
)

ENV_K = "OMEGACHECK_K"
ENV_INSTANCE_BUDGET = "OMEGACHECK_INSTANCE_BUDGET"
ENV_SEARCH_STEPS = "OMEGACHECK_SEARCH_STEPS"
ENV_SEARCH_CANDIDATES = "OMEGACHECK_SEARCH_CANDIDATES"

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_EXHAUSTED = 3
EXIT_PARSE = 4
EXIT_OVERFLOW = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class Report:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.pairs: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        self.pairs.append((key, str(value)))

    def emit(self, out=None) -> None:
        out = out or sys.stdout
        for key, value in self.pairs:
            if self.fmt == "records":
                print(f"{key}={value}", file=out)
            else:
                print(f"{key}: {value}", file=out)


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        return fallback


def _read_file(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"no such file: {path}", EXIT_PARSE)
    return p.read_bytes()


def _load_machine(path: str) -> machines.MachineDesc:
    try:
        return machines.parse_machine(_read_file(path).decode("utf-8"))
    except (machines.MachineFormatError, UnicodeDecodeError) as exc:
        raise CliError(f"machine file: {exc}", EXIT_PARSE)


def _parse_formula_arg(text: str) -> Formula:
    try:
        formula = parse_formula(text)
    except SyntaxError_ as exc:
        raise CliError(f"formula: {exc}", EXIT_PARSE)
    unbound = free_vars(formula)
    if unbound:
        print(
            f"warning: unbound variables in formula: {', '.join(sorted(unbound))}",
            file=sys.stderr,
        )
    return formula


def _require_positive(report_name: str, value: int) -> int:
    if value < 1:
        raise CliError(f"{report_name} must be positive", EXIT_PARSE)
    return value


def _load_gamma(path: Optional[str]) -> frozenset[Formula]:
    if path is None:
        return frozenset()
    out = []
    for lineno, line in enumerate(_read_file(path).decode("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(parse_formula(line))
        except SyntaxError_ as exc:
            raise CliError(f"gamma line {lineno}: {exc}", EXIT_PARSE)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Human proof text


_RULE_TO_TEXT = {
    kernel.RULE_PA_AXIOM: "axiom",
    kernel.RULE_EQ_AXIOM: "eq-axiom",
    kernel.RULE_EVAL_TRUE: "eval",
    kernel.RULE_PREMISE: "premise",
}


def proof_to_text(proof: kernel.Proof) -> str:
    """One step per line: `k. <formula> BY <rule ...>`; step numbers and
    premise references are 1-based in text."""
    lines = []
    for i, s in enumerate(proof.steps, start=1):
        formula = print_formula(s.conclusion)
        if s.rule in (kernel.RULE_PA_AXIOM, kernel.RULE_EQ_AXIOM):
            spec = f"{_RULE_TO_TEXT[s.rule]} {s.payload}"
        elif s.rule == kernel.RULE_EVAL_TRUE:
            spec = "eval"
        elif s.rule == kernel.RULE_PREMISE:
            spec = "premise"
        elif s.rule == kernel.RULE_MP:
            spec = f"mp {s.premises[0] + 1} {s.premises[1] + 1}"
        elif s.rule == kernel.RULE_GEN:
            spec = f"gen {s.payload} {s.premises[0] + 1}"
        elif s.rule == kernel.RULE_INST:
            from .syntax import print_term

            spec = f"inst {print_term(s.payload)} ; {s.premises[0] + 1}"
        elif s.rule == kernel.RULE_INDUCTION:
            var, phi = s.payload
            spec = f"induction {var} ; {print_formula(phi)}"
        elif s.rule == kernel.RULE_LOGIC:
            scheme, items = s.payload
            parts = [f"logic {scheme}"]
            for kind, item in zip(kernel.LOGIC_SCHEMES[scheme], items):
                if kind == "v":
                    parts.append(item)
                elif kind == "t":
                    from .syntax import print_term

                    parts.append(print_term(item))
                else:
                    parts.append(print_formula(item))
            spec = " ; ".join(parts)
        else:
            raise ValueError(f"no text form for rule {s.rule!r}")
        lines.append(f"{i}. {formula} BY {spec}")
    return "\n".join(lines) + "\n"


def _parse_step_spec(spec: str, lineno: int) -> tuple[str, tuple[int, ...], object]:
    def err(msg: str) -> CliError:
        return CliError(f"proof line {lineno}: {msg}", EXIT_PARSE)

    parts = [p.strip() for p in spec.split(";")]
    head = parts[0].split()
    if not head:
        raise err("missing rule")
    name = head[0]
    try:
        if name == "eval" and len(head) == 1 and len(parts) == 1:
            return kernel.RULE_EVAL_TRUE, (), None
        if name == "premise" and len(head) == 1 and len(parts) == 1:
            return kernel.RULE_PREMISE, (), None
        if name == "axiom" and len(head) == 2:
            return kernel.RULE_PA_AXIOM, (), int(head[1])
        if name == "eq-axiom" and len(head) == 2:
            return kernel.RULE_EQ_AXIOM, (), int(head[1])
        if name == "mp" and len(head) == 3:
            return kernel.RULE_MP, (int(head[1]) - 1, int(head[2]) - 1), None
        if name == "gen" and len(head) == 3:
            return kernel.RULE_GEN, (int(head[2]) - 1,), head[1]
        if name == "inst" and len(parts) == 2:
            term_text = parts[0][len("inst") :].strip()
            return kernel.RULE_INST, (int(parts[1]) - 1,), parse_term(term_text)
        if name == "induction" and len(head) == 2 and len(parts) == 2:
            return kernel.RULE_INDUCTION, (), (head[1], parse_formula(parts[1]))
        if name == "logic" and len(head) == 2:
            scheme = head[1]
            kinds = kernel.LOGIC_SCHEMES.get(scheme)
            if kinds is None:
                raise err(f"unknown scheme {scheme!r}")
            items = parts[1:]
            if len(items) != len(kinds):
                raise err(f"scheme {scheme!r} takes {len(kinds)} items")
            done = []
            for kind, item in zip(kinds, items):
                if kind == "v":
                    done.append(item)
                elif kind == "t":
                    done.append(parse_term(item))
                else:
                    done.append(parse_formula(item))
            return kernel.RULE_LOGIC, (), (scheme, tuple(done))
    except SyntaxError_ as exc:
        raise err(str(exc))
    except ValueError as exc:
        raise err(str(exc))
    raise err(f"cannot read rule specification {spec!r}")


def parse_proof_text(text: str) -> kernel.Proof:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        number, dot, rest = line.partition(".")
        if not dot or not number.strip().isdigit():
            raise CliError(f"proof line {lineno}: expected `k. ...`", EXIT_PARSE)
        body = rest.strip()
        split_at = body.rfind(" BY ")
        if split_at < 0:
            raise CliError(f"proof line {lineno}: missing BY", EXIT_PARSE)
        formula_text = body[:split_at].strip()
        spec = body[split_at + len(" BY ") :].strip()
        try:
            conclusion = parse_formula(formula_text)
        except SyntaxError_ as exc:
            raise CliError(f"proof line {lineno}: {exc}", EXIT_PARSE)
        rule, premises, payload = _parse_step_spec(spec, lineno)
        steps.append(kernel.ProofStep(conclusion, rule, premises, payload))
    if not steps:
        raise CliError("proof file has no steps", EXIT_PARSE)
    return kernel.Proof(tuple(steps), steps[-1].conclusion)


def _load_omega_proof(path: str) -> omega.OmegaProof:
    data = _read_file(path)
    first = data[:1]
    binary_tags = set(wire.TAG_TO_RULE) | {wire.OMEGA_STEP_TAG}
    if first and first[0] in binary_tags:
        try:
            return omega.deserialize_omega_proof(data)
        except wire.MalformedEncoding as exc:
            raise CliError(f"proof file: {exc}", EXIT_PARSE)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise CliError("proof file: neither valid binary nor text", EXIT_PARSE)
    proof = parse_proof_text(text)
    return omega.OmegaProof(proof.steps, proof.target)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    _require_positive("--k", args.k + 1)  # k = 0 is a legal instance bound
    _require_positive("--instance-budget", args.instance_budget)
    report = Report(args.format)
    gamma = _load_gamma(args.gamma)
    target = _parse_formula_arg(args.target)
    proof = _load_omega_proof(args.proof)
    report.add("proof", args.proof)
    report.add("target", print_formula(target))
    report.add("k", args.k)
    report.add("instance-budget", args.instance_budget)
    if proof.omega_step_count == 0:
        finitary = kernel.Proof(tuple(proof.steps), proof.target)
        verdict = kernel.check_proof(gamma, finitary, target)
        if verdict.accepted:
            report.add("verdict", "accepted")
            report.emit()
            return EXIT_OK
        report.add("verdict", "rejected")
        report.add("step", verdict.step + 1)
        report.add("reason", verdict.reason)
        if verdict.detail:
            report.add("detail", verdict.detail)
        report.emit()
        return EXIT_REJECTED
    verdict = omega.check_omega_proof(
        gamma, proof, target, k=args.k, per_instance_budget=args.instance_budget
    )
    if verdict.kind == "accepted_conditional":
        report.add("verdict", "accepted")
        report.add("conditional", f"conditional on k={verdict.bound}")
        report.emit()
        return EXIT_OK
    if verdict.kind == "rejected":
        report.add("verdict", "rejected")
        report.add("step", verdict.step + 1)
        if verdict.instance is not None:
            report.add("instance", verdict.instance)
        report.add("reason", verdict.reason)
        report.emit()
        return EXIT_REJECTED
    report.add("verdict", "budget-exhausted")
    report.add("step", verdict.step + 1)
    report.add("instance", verdict.instance)
    report.emit()
    return EXIT_EXHAUSTED


def cmd_encode(args) -> int:
    m = _load_machine(args.machine)
    try:
        if args.which == "q1":
            f = arithmetize.halts_yes_formula(m, args.n)
        elif args.which == "q2":
            f = arithmetize.halts_no_formula(m, args.n)
        elif args.which == "q3":
            f = arithmetize.loops_formula(m, args.n)
        else:
            if args.t is None or args.outcome is None:
                raise CliError("haltedby needs --t and --outcome", EXIT_PARSE)
            f = arithmetize.halted_by_formula(m, args.n, args.t, args.outcome)
    except arithmetize.EncodingOverflow as exc:
        print(f"encoding overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except arithmetize.RunAnalysisError as exc:
        print(f"encoding failed: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    print(print_formula(f))
    return EXIT_OK


def cmd_simulate(args) -> int:
    _require_positive("--budget", args.budget)
    m = _load_machine(args.machine)
    result = machines.run(m, args.n, args.budget)
    report = Report(args.format)
    report.add("machine", args.machine)
    report.add("input", args.n)
    report.add("budget", args.budget)
    report.add("outcome", result.outcome)
    if result.steps is not None:
        report.add("steps", result.steps)
    report.emit()
    if result.outcome == "yes":
        return EXIT_OK
    if result.outcome == "no":
        return EXIT_REJECTED
    return EXIT_EXHAUSTED


def cmd_hsearch(args) -> int:
    _require_positive("--budget-steps", args.budget_steps)
    _require_positive("--budget-candidates", args.budget_candidates)
    _require_positive("--k", args.k + 1)
    _require_positive("--instance-budget", args.instance_budget)
    m = _load_machine(args.machine)
    budget = dovetail.SearchBudget(args.budget_steps, args.budget_candidates)
    outcome = dovetail.halting_search(
        m,
        args.n,
        budget=budget,
        mode=args.mode,
        omega_bound=args.k,
        instance_budget=args.instance_budget,
    )
    report = Report(args.format)
    report.add("machine", args.machine)
    report.add("input", args.n)
    report.add("mode", args.mode)
    report.add("budget-steps", budget.max_total_oracle_steps)
    report.add("budget-candidates", budget.max_candidates)
    report.add("k", args.k)
    report.add("outcome", outcome.kind)
    if outcome.thread is not None:
        report.add("thread", outcome.thread)
    if outcome.candidate_index is not None:
        report.add("candidate-index", outcome.candidate_index)
    if outcome.omega_bound is not None:
        report.add("omega-bound", outcome.omega_bound)
    for i, progress in enumerate(outcome.progress, start=1):
        report.add(f"thread{i}-units", progress.units)
    if outcome.proof is not None and args.out:
        Path(args.out).write_bytes(outcome.proof)
        report.add("proof-file", args.out)
    report.emit()
    return EXIT_OK if outcome.kind != "budget_exhausted" else EXIT_EXHAUSTED


def cmd_omega_check(args) -> int:
    _require_positive("--k", args.k + 1)
    _require_positive("--instance-budget", args.instance_budget)
    m = _load_machine(args.machine)
    cert = omega.build_loops_certificate(m, args.n)
    verdict = omega.check_omega_bounded(cert, args.k, args.instance_budget)
    report = Report(args.format)
    report.add("machine", args.machine)
    report.add("input", args.n)
    report.add("k", args.k)
    report.add("instance-budget", args.instance_budget)
    report.add("verdict", verdict.kind)
    if verdict.kind == "accepted_up_to":
        report.add("bound", verdict.bound)
        report.emit()
        return EXIT_OK
    report.add("instance", verdict.index)
    if verdict.reason:
        report.add("reason", verdict.reason)
    report.emit()
    return EXIT_REJECTED if verdict.kind == "rejected" else EXIT_EXHAUSTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omegacheck",
        description="Proof checking, machine arithmetization and halting search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    default_k = _env_int(ENV_K, omega.DEFAULT_OMEGA_BOUND)
    default_ib = _env_int(ENV_INSTANCE_BUDGET, omega.DEFAULT_INSTANCE_BUDGET)
    default_steps = _env_int(ENV_SEARCH_STEPS, dovetail.DEFAULT_BUDGET.max_total_oracle_steps)
    default_cand = _env_int(
        ENV_SEARCH_CANDIDATES, dovetail.DEFAULT_BUDGET.max_candidates
    )

    def add_format(p):
        p.add_argument(
            "--format", choices=("text", "records"), default="text",
            help="report style: human text or key=value records",
        )

    p = sub.add_parser("check", help="verify a proof file against a target formula")
    p.add_argument("proof", help="proof file (binary canonical or text format)")
    p.add_argument("--target", required=True, help="target formula text")
    p.add_argument("--gamma", help="file of assumption formulas, one per line")
    p.add_argument("--k", type=int, default=default_k, help="omega instance bound")
    p.add_argument("--instance-budget", type=int, default=default_ib)
    add_format(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("encode", help="emit halting statements as formulas")
    p.add_argument("machine", help="machine description file")
    p.add_argument("n", type=int, help="input value")
    p.add_argument("which", choices=("q1", "q2", "q3", "haltedby"))
    p.add_argument("--t", type=int, help="step bound for haltedby")
    p.add_argument("--outcome", choices=("yes", "no"), help="outcome for haltedby")
    add_format(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("simulate", help="run a machine with a step budget")
    p.add_argument("machine")
    p.add_argument("n", type=int)
    p.add_argument("--budget", type=int, default=10_000)
    add_format(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("hsearch", help="three-thread halting search")
    p.add_argument("machine")
    p.add_argument("n", type=int)
    p.add_argument("--mode", choices=("pure", "witness"), default="witness")
    p.add_argument("--budget-steps", type=int, default=default_steps)
    p.add_argument("--budget-candidates", type=int, default=default_cand)
    p.add_argument("--k", type=int, default=default_k)
    p.add_argument("--instance-budget", type=int, default=default_ib)
    p.add_argument("--out", help="write the winning proof's bytes here")
    add_format(p)
    p.set_defaults(fn=cmd_hsearch)

    p = sub.add_parser(
        "omega-check", help="build and check the loops certificate for (machine, n)"
    )
    p.add_argument("machine")
    p.add_argument("n", type=int)
    p.add_argument("--k", type=int, default=default_k)
    p.add_argument("--instance-budget", type=int, default=default_ib)
    add_format(p)
    p.set_defaults(fn=cmd_omega_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except (arithmetize.EncodingOverflow, arithmetize.RunAnalysisError) as exc:
        print(f"encoding failed: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


def entry() -> None:
    # Deep formula trees mean deep recursion in parsing; give the worker a
    # generous stack rather than trusting the platform default.
    code: list[int] = []
    threading.stack_size(256 * 1024 * 1024)
    worker = threading.Thread(target=lambda: code.append(main()))
    worker.start()
    worker.join()
    sys.exit(code[0] if code else 1)


if __name__ == "__main__":
    entry()
