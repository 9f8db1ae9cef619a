"""Canonical binary encoding of terms, formulas and proofs, plus the
shortlex enumeration of byte strings that proof search crawls.

Layout: one tag byte per node, children in fixed order, names and counts
length-prefixed (lengths big-endian). A proof is the bare concatenation of
its steps; the target is implicit as the final step's conclusion, which
keeps encodings short and makes the encoding canonical.
"""

from __future__ import annotations

from . import syntax as S
from . import kernel as K


class MalformedEncoding(Exception):
    """Bytes that do not decode; search treats these as rejections."""


# Term tags
_T_ZERO, _T_SUCC, _T_ADD, _T_MUL, _T_VAR = 0x01, 0x02, 0x03, 0x04, 0x05
# Formula tags
_F_EQ, _F_LE, _F_NOT, _F_AND, _F_OR, _F_IMPLIES = 0x10, 0x11, 0x12, 0x13, 0x14, 0x15
_F_FORALL, _F_EXISTS, _F_BFORALL, _F_BEXISTS = 0x16, 0x17, 0x18, 0x19
# Step tags
STEP_TAGS = {
    K.RULE_PA_AXIOM: 0x20,
    K.RULE_EQ_AXIOM: 0x21,
    K.RULE_LOGIC: 0x22,
    K.RULE_INDUCTION: 0x23,
    K.RULE_MP: 0x24,
    K.RULE_GEN: 0x25,
    K.RULE_INST: 0x26,
    K.RULE_EVAL_TRUE: 0x27,
    K.RULE_PREMISE: 0x28,
}
TAG_TO_RULE = {v: k for k, v in STEP_TAGS.items()}
OMEGA_STEP_TAG = 0x30

_SCHEME_IDS = {name: i for i, name in enumerate(sorted(K.LOGIC_SCHEMES))}
_ID_SCHEMES = {i: name for name, i in _SCHEME_IDS.items()}


def _put_name(out: bytearray, name: str) -> None:
    data = name.encode("ascii")
    if not 0 < len(data) < 256:
        raise ValueError("name length out of range")
    out.append(len(data))
    out += data


def encode_term(t: S.Term, out: bytearray) -> None:
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, S.Zero):
            out.append(_T_ZERO)
        elif isinstance(node, S.Succ):
            out.append(_T_SUCC)
            stack.append(node.arg)
        elif isinstance(node, S.Add):
            out.append(_T_ADD)
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, S.Mul):
            out.append(_T_MUL)
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(_T_VAR)
            _put_name(out, node.name)


def encode_formula(f: S.Formula, out: bytearray) -> None:
    stack: list[object] = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, S.Eq):
            out.append(_F_EQ)
            encode_term(node.left, out)
            stack.append(node.right)
            continue
        if isinstance(node, (S.Zero, S.Succ, S.Add, S.Mul, S.Var)):
            encode_term(node, out)
            continue
        if isinstance(node, S.Le):
            out.append(_F_LE)
            encode_term(node.left, out)
            stack.append(node.right)
        elif isinstance(node, S.Not):
            out.append(_F_NOT)
            stack.append(node.body)
        elif isinstance(node, (S.And, S.Or, S.Implies)):
            out.append(
                _F_AND
                if isinstance(node, S.And)
                else _F_OR if isinstance(node, S.Or) else _F_IMPLIES
            )
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, S.ForAll):
            out.append(_F_FORALL)
            _put_name(out, node.var)
            stack.append(node.body)
        elif isinstance(node, S.Exists):
            out.append(_F_EXISTS)
            _put_name(out, node.var)
            stack.append(node.body)
        elif isinstance(node, S.BoundedForAll):
            out.append(_F_BFORALL)
            _put_name(out, node.var)
            encode_term(node.bound, out)
            stack.append(node.body)
        elif isinstance(node, S.BoundedExists):
            out.append(_F_BEXISTS)
            _put_name(out, node.var)
            encode_term(node.bound, out)
            stack.append(node.body)
        else:
            raise ValueError(f"cannot encode {node!r}")


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u8(self) -> int:
        if self.pos >= len(self.data):
            raise MalformedEncoding("unexpected end of input")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def u16(self) -> int:
        if self.pos + 2 > len(self.data):
            raise MalformedEncoding("unexpected end of input")
        v = int.from_bytes(self.data[self.pos : self.pos + 2], "big")
        self.pos += 2
        return v

    def u32(self) -> int:
        if self.pos + 4 > len(self.data):
            raise MalformedEncoding("unexpected end of input")
        v = int.from_bytes(self.data[self.pos : self.pos + 4], "big")
        self.pos += 4
        return v

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedEncoding("unexpected end of input")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def name(self) -> str:
        n = self.u8()
        if n == 0:
            raise MalformedEncoding("empty name")
        raw = self.take(n)
        try:
            text = raw.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedEncoding("non-ascii name") from exc
        if not S.is_identifier(text):
            raise MalformedEncoding(f"bad name {text!r}")
        return text

    def at_end(self) -> bool:
        return self.pos >= len(self.data)


def decode_term(r: Reader) -> S.Term:
    tag = r.u8()
    if tag == _T_ZERO:
        return S.ZERO
    if tag == _T_SUCC:
        return S.Succ(decode_term(r))
    if tag == _T_ADD:
        left = decode_term(r)
        return S.Add(left, decode_term(r))
    if tag == _T_MUL:
        left = decode_term(r)
        return S.Mul(left, decode_term(r))
    if tag == _T_VAR:
        return S.Var(r.name())
    raise MalformedEncoding(f"bad term tag 0x{tag:02x}")


def decode_formula(r: Reader) -> S.Formula:
    tag = r.u8()
    if tag == _F_EQ:
        left = decode_term(r)
        return S.Eq(left, decode_term(r))
    if tag == _F_LE:
        left = decode_term(r)
        return S.Le(left, decode_term(r))
    if tag == _F_NOT:
        return S.Not(decode_formula(r))
    if tag == _F_AND:
        left = decode_formula(r)
        return S.And(left, decode_formula(r))
    if tag == _F_OR:
        left = decode_formula(r)
        return S.Or(left, decode_formula(r))
    if tag == _F_IMPLIES:
        left = decode_formula(r)
        return S.Implies(left, decode_formula(r))
    if tag == _F_FORALL:
        var = r.name()
        return S.ForAll(var, decode_formula(r))
    if tag == _F_EXISTS:
        var = r.name()
        return S.Exists(var, decode_formula(r))
    if tag in (_F_BFORALL, _F_BEXISTS):
        var = r.name()
        bound = decode_term(r)
        body = decode_formula(r)
        try:
            if tag == _F_BFORALL:
                return S.BoundedForAll(var, bound, body)
            return S.BoundedExists(var, bound, body)
        except ValueError as exc:
            raise MalformedEncoding(str(exc)) from exc
    raise MalformedEncoding(f"bad formula tag 0x{tag:02x}")


def encode_step(step: K.ProofStep, out: bytearray) -> None:
    tag = STEP_TAGS.get(step.rule)
    if tag is None:
        raise ValueError(f"unknown rule {step.rule!r}")
    out.append(tag)
    if step.rule in (K.RULE_PA_AXIOM, K.RULE_EQ_AXIOM):
        if not isinstance(step.payload, int) or not 0 <= step.payload < 256:
            raise ValueError("axiom index out of range")
        out.append(step.payload)
    elif step.rule == K.RULE_LOGIC:
        scheme, items = step.payload
        out.append(_SCHEME_IDS[scheme])
        for kind, item in zip(K.LOGIC_SCHEMES[scheme], items):
            if kind == "f":
                encode_formula(item, out)
            elif kind == "t":
                encode_term(item, out)
            else:
                _put_name(out, item)
    elif step.rule == K.RULE_INDUCTION:
        var, phi = step.payload
        _put_name(out, var)
        encode_formula(phi, out)
    elif step.rule == K.RULE_MP:
        out += step.premises[0].to_bytes(2, "big")
        out += step.premises[1].to_bytes(2, "big")
    elif step.rule == K.RULE_GEN:
        _put_name(out, step.payload)
        out += step.premises[0].to_bytes(2, "big")
    elif step.rule == K.RULE_INST:
        encode_term(step.payload, out)
        out += step.premises[0].to_bytes(2, "big")
    encode_formula(step.conclusion, out)


def decode_step(r: Reader) -> K.ProofStep:
    tag = r.u8()
    rule = TAG_TO_RULE.get(tag)
    if rule is None:
        raise MalformedEncoding(f"bad step tag 0x{tag:02x}")
    premises: tuple[int, ...] = ()
    payload: object = None
    if rule in (K.RULE_PA_AXIOM, K.RULE_EQ_AXIOM):
        payload = r.u8()
    elif rule == K.RULE_LOGIC:
        scheme = _ID_SCHEMES.get(r.u8())
        if scheme is None:
            raise MalformedEncoding("bad scheme id")
        items = []
        for kind in K.LOGIC_SCHEMES[scheme]:
            if kind == "f":
                items.append(decode_formula(r))
            elif kind == "t":
                items.append(decode_term(r))
            else:
                items.append(r.name())
        payload = (scheme, tuple(items))
    elif rule == K.RULE_INDUCTION:
        var = r.name()
        payload = (var, decode_formula(r))
    elif rule == K.RULE_MP:
        premises = (r.u16(), r.u16())
    elif rule == K.RULE_GEN:
        payload = r.name()
        premises = (r.u16(),)
    elif rule == K.RULE_INST:
        payload = decode_term(r)
        premises = (r.u16(),)
    conclusion = decode_formula(r)
    return K.ProofStep(conclusion, rule, premises, payload)


def serialize_proof(proof: K.Proof) -> bytes:
    out = bytearray()
    for step in proof.steps:
        encode_step(step, out)
    return bytes(out)


def deserialize_proof(data: bytes) -> K.Proof:
    r = Reader(data)
    steps: list[K.ProofStep] = []
    if r.at_end():
        raise MalformedEncoding("empty input")
    while not r.at_end():
        steps.append(decode_step(r))
    return K.Proof(tuple(steps), steps[-1].conclusion)


# ---------------------------------------------------------------------------
# Shortlex enumeration

DEFAULT_ALPHABET: tuple[int, ...] = tuple(range(256))


def _check_alphabet(alphabet: tuple[int, ...]) -> tuple[int, ...]:
    if len(alphabet) < 2 or sorted(set(alphabet)) != list(alphabet):
        raise ValueError("alphabet must be >= 2 distinct sorted byte values")
    return alphabet


def string_at_index(i: int, alphabet: tuple[int, ...] = DEFAULT_ALPHABET) -> bytes:
    """The i-th byte string in shortlex order over `alphabet` (0 -> b'')."""
    alphabet = _check_alphabet(alphabet)
    if i < 0:
        raise ValueError("index must be a natural number")
    base = len(alphabet)
    length = 0
    count = 1  # number of strings of the current length
    while i >= count:
        i -= count
        length += 1
        count *= base
    digits = []
    for _ in range(length):
        i, d = divmod(i, base)
        digits.append(alphabet[d])
    return bytes(reversed(digits))


def index_of_string(data: bytes, alphabet: tuple[int, ...] = DEFAULT_ALPHABET) -> int:
    """Inverse of string_at_index; ValueError on out-of-alphabet bytes."""
    alphabet = _check_alphabet(alphabet)
    base = len(alphabet)
    positions = {b: k for k, b in enumerate(alphabet)}
    below = 0
    count = 1
    for _ in range(len(data)):
        below += count
        count *= base
    rank = 0
    for b in data:
        if b not in positions:
            raise ValueError(f"byte 0x{b:02x} not in alphabet")
        rank = rank * base + positions[b]
    return below + rank


def proof_at_index(i: int, alphabet: tuple[int, ...] = DEFAULT_ALPHABET) -> bytes:
    """Candidate bytes for proof search: total, injective, shortlex order."""
    return string_at_index(i, alphabet)
