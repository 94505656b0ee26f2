"""Boolean circuits with nondeterministic witness inputs.

Nodes are numbered from 0: the ``n_std`` standard inputs first, then the
``n_wit`` witness inputs, then one node per gate in topological order.
Evaluation over whole input spaces is bit-sliced: every node carries one
Python integer whose bit ``a`` is the node's value on assignment ``a``, where
``a = x * 2**n_wit + w`` and both ``x`` and ``w`` read most-significant-bit
first.  Witnesses therefore enumerate lexicographically, all-zeros first.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .bits import BitString, check, from_int, to_int
from .errors import ArityError, CapExceeded, ModeError, NetlistError, TotalityError


class Op(str, enum.Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"
    XOR = "XOR"
    CONST0 = "CONST0"
    CONST1 = "CONST1"


ARITY = {Op.AND: 2, Op.OR: 2, Op.XOR: 2, Op.NOT: 1, Op.CONST0: 0, Op.CONST1: 0}


class EvalMode(str, enum.Enum):
    DET = "det"
    NONDET = "nondet"
    CONONDET = "conondet"
    FUNC = "func"


class TriBit(enum.IntEnum):
    ZERO = 0
    ONE = 1
    BOT = 2


BOT = TriBit.BOT

# Enumeration cap on n_std + n_wit for a single evaluation.
DEFAULT_CAP = 24
_cap: contextvars.ContextVar[int] = contextvars.ContextVar("enumeration_cap", default=DEFAULT_CAP)


def enumeration_cap() -> int:
    return _cap.get()


@contextlib.contextmanager
def cap_limit(bits: int) -> Iterator[None]:
    token = _cap.set(bits)
    try:
        yield
    finally:
        _cap.reset(token)


def require_cap(bits: int, what: str = "enumeration") -> None:
    if bits > _cap.get():
        raise CapExceeded(f"{what} needs {bits} bits, cap is {_cap.get()}")


@dataclass(frozen=True, eq=False)
class Circuit:
    name: str
    n_std: int
    n_wit: int
    gates: tuple[tuple[Op, tuple[int, ...]], ...]
    outputs: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.n_std < 0 or self.n_wit < 0:
            raise ValueError("input counts must be non-negative")
        base = self.n_std + self.n_wit
        for j, (op, args) in enumerate(self.gates):
            if len(args) != ARITY[op]:
                raise ValueError(f"gate {j + 1}: {op.value} takes {ARITY[op]} operands")
            for a in args:
                if not 0 <= a < base + j:
                    raise ValueError(f"gate {j + 1}: operand {a} does not precede it")
        if not self.outputs:
            raise ValueError("circuit needs at least one output")
        for o in self.outputs:
            if not 0 <= o < base + len(self.gates):
                raise ValueError(f"output index {o} out of range")

    @property
    def size(self) -> int:
        """Gate count including input gates (standard and witness)."""
        return self.n_std + self.n_wit + len(self.gates)

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    def __repr__(self) -> str:
        return (
            f"Circuit({self.name!r}, n_std={self.n_std}, n_wit={self.n_wit}, "
            f"size={self.size}, n_out={self.n_out})"
        )


def check_mode(c: Circuit, mode: EvalMode) -> None:
    if mode is EvalMode.DET and c.n_wit:
        raise ModeError(f"{c.name}: deterministic evaluation needs n_wit = 0, got {c.n_wit}")
    if mode is EvalMode.FUNC:
        if c.n_out != 2:
            raise ModeError(f"{c.name}: function-computing mode needs 2 outputs")
    elif c.n_out != 1:
        raise ModeError(f"{c.name}: {mode.value} mode needs a single output")


# ---------------------------------------------------------------- netlists

_HEADER = re.compile(r"circuit\s+(\S+)\s+in=(\d+)\s+wit=(\d+)\s+out=(\S+)$")
_GATE = re.compile(r"(g\d+)\s*=\s*([A-Z0-9]+)((?:\s+\S+)*)$")
_REF = re.compile(r"([iwg])(\d+)$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_circuits(text: str, first_line: int = 1) -> list[Circuit]:
    """Parse every ``circuit`` block in ``text``."""
    blocks: list[list[tuple[int, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=first_line):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("circuit"):
            blocks.append([])
        elif not blocks:
            raise NetlistError("expected a 'circuit' header", lineno)
        blocks[-1].append((lineno, line))
    if not blocks:
        raise NetlistError("no circuit header found", first_line)
    return [_parse_block(b) for b in blocks]


def parse_circuit(text: str) -> Circuit:
    circuits = parse_circuits(text)
    if len(circuits) != 1:
        raise NetlistError(f"expected one circuit, found {len(circuits)}")
    return circuits[0]


def _parse_block(lines: list[tuple[int, str]]) -> Circuit:
    hline, header = lines[0]
    m = _HEADER.match(header)
    if not m:
        raise NetlistError("malformed header, expected "
                           "'circuit <name> in=<n> wit=<k> out=<ref>[,<ref>]'", hline)
    name, n_std, n_wit = m.group(1), int(m.group(2)), int(m.group(3))
    out_refs = m.group(4).split(",")

    defs: list[tuple[int, str, Op, list[str]]] = []
    seen: dict[str, int] = {}
    for lineno, line in lines[1:]:
        gm = _GATE.match(line)
        if not gm:
            raise NetlistError(f"syntax error: {line!r}", lineno)
        gname, opname, rest = gm.group(1), gm.group(2), gm.group(3).split()
        try:
            op = Op(opname)
        except ValueError:
            raise NetlistError(f"unknown operator {opname!r}", lineno) from None
        if len(rest) != ARITY[op]:
            raise NetlistError(f"{op.value} takes {ARITY[op]} operand(s), got {len(rest)}", lineno)
        if gname in seen:
            raise NetlistError(f"gate {gname} defined twice", lineno)
        seen[gname] = len(defs)
        defs.append((lineno, gname, op, rest))

    base = n_std + n_wit

    def resolve(ref: str, lineno: int, position: int | None) -> int:
        rm = _REF.match(ref)
        if not rm:
            raise NetlistError(f"bad reference {ref!r}", lineno)
        kind, t = rm.group(1), int(rm.group(2))
        if kind == "i":
            if not 1 <= t <= n_std:
                raise NetlistError(f"dangling reference {ref}: only {n_std} standard inputs", lineno)
            return t - 1
        if kind == "w":
            if not 1 <= t <= n_wit:
                raise NetlistError(f"dangling reference {ref}: only {n_wit} witness inputs", lineno)
            return n_std + t - 1
        if ref not in seen:
            raise NetlistError(f"dangling reference {ref}: no such gate", lineno)
        j = seen[ref]
        if position is not None and j >= position:
            raise NetlistError(f"cycle: {ref} is not defined before its use", lineno)
        return base + j

    gates = []
    for position, (lineno, _, op, rest) in enumerate(defs):
        gates.append((op, tuple(resolve(r, lineno, position) for r in rest)))
    outputs = tuple(resolve(r, hline, None) for r in out_refs)
    return Circuit(name, n_std, n_wit, tuple(gates), outputs)


def _ref_name(c: Circuit, node: int) -> str:
    if node < c.n_std:
        return f"i{node + 1}"
    if node < c.n_std + c.n_wit:
        return f"w{node - c.n_std + 1}"
    return f"g{node - c.n_std - c.n_wit + 1}"


def format_circuit(c: Circuit) -> str:
    outs = ",".join(_ref_name(c, o) for o in c.outputs)
    lines = [f"circuit {c.name} in={c.n_std} wit={c.n_wit} out={outs}"]
    base = c.n_std + c.n_wit
    for j, (op, args) in enumerate(c.gates):
        operands = "".join(" " + _ref_name(c, a) for a in args)
        lines.append(f"{_ref_name(c, base + j)} = {op.value}{operands}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- evaluation

def _apply(op: Op, vals: Sequence[int], mask: int) -> int:
    if op is Op.AND:
        return vals[0] & vals[1]
    if op is Op.OR:
        return vals[0] | vals[1]
    if op is Op.XOR:
        return vals[0] ^ vals[1]
    if op is Op.NOT:
        return mask ^ vals[0]
    return 0 if op is Op.CONST0 else mask


def eval_raw(c: Circuit, x: BitString, w: BitString = "") -> BitString:
    """Output bits of ``c`` on standard input ``x`` and witness ``w``."""
    check(x), check(w)
    if len(x) != c.n_std or len(w) != c.n_wit:
        raise ArityError(f"{c.name}: expected |x|={c.n_std}, |w|={c.n_wit}; got {len(x)}, {len(w)}")
    vals = [int(ch) for ch in x + w]
    for op, args in c.gates:
        vals.append(_apply(op, [vals[a] for a in args], 1))
    return "".join(str(vals[o]) for o in c.outputs)


@lru_cache(maxsize=512)
def _pattern(tv: int, p: int) -> int:
    # Bit a of the result is bit p (0 = most significant of tv bits) of a.
    s = 1 << (tv - 1 - p)
    block = ((1 << s) - 1) << s
    repunit = ((1 << (1 << tv)) - 1) // ((1 << (2 * s)) - 1)
    return block * repunit


def _last_uses(c: Circuit) -> list[list[int]]:
    plan = c._cache.get("plan")
    if plan is None:
        last: dict[int, int] = {}
        for j, (_, args) in enumerate(c.gates):
            for a in args:
                last[a] = j
        keep = set(c.outputs)
        plan = [[] for _ in c.gates]
        for node, j in last.items():
            if node not in keep:
                plan[j].append(node)
        c._cache["plan"] = plan
    return plan


def _to_bools(v: int, nbits: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((nbits + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:nbits].astype(bool)


def _slice_outputs(c: Circuit, n_fixed: int, prefix: int) -> list[np.ndarray]:
    """Outputs with the first ``n_fixed`` standard inputs set to ``prefix``.

    Each array has shape ``(2**(n_std - n_fixed), 2**n_wit)``.
    """
    tv = c.n_std + c.n_wit - n_fixed
    nbits = 1 << tv
    mask = (1 << nbits) - 1
    vals: dict[int, int] = {}
    for node in range(c.n_std + c.n_wit):
        if node < n_fixed:
            vals[node] = mask if (prefix >> (n_fixed - 1 - node)) & 1 else 0
        else:
            vals[node] = _pattern(tv, node - n_fixed)
    base = c.n_std + c.n_wit
    plan = _last_uses(c)
    for j, (op, args) in enumerate(c.gates):
        vals[base + j] = _apply(op, [vals[a] for a in args], mask)
        for dead in plan[j]:
            del vals[dead]
    shape = (1 << (c.n_std - n_fixed), 1 << c.n_wit)
    return [_to_bools(vals[o], nbits).reshape(shape) for o in c.outputs]


_CHUNK_BITS = 20


def output_slices(c: Circuit) -> list[np.ndarray]:
    """Per output, a bool array of shape ``(2**n_std, 2**n_wit)``."""
    require_cap(c.n_std + c.n_wit, f"circuit {c.name}")
    n_fixed = max(0, min(c.n_std, c.n_std + c.n_wit - _CHUNK_BITS))
    if n_fixed == 0:
        return _slice_outputs(c, 0, 0)
    parts = [_slice_outputs(c, n_fixed, p) for p in range(1 << n_fixed)]
    return [np.concatenate([part[k] for part in parts]) for k in range(c.n_out)]


def _collapse(c: Circuit, mode: EvalMode, outs: list[np.ndarray]) -> np.ndarray:
    if mode is EvalMode.DET:
        return outs[0][:, 0].astype(np.int8)
    if mode is EvalMode.NONDET:
        return outs[0].any(axis=1).astype(np.int8)
    if mode is EvalMode.CONONDET:
        return outs[0].all(axis=1).astype(np.int8)
    flag, value = outs
    has1 = (flag & value).any(axis=1)
    has0 = (flag & ~value).any(axis=1)
    dead = ~(has0 | has1)
    if dead.any():
        x = int(np.flatnonzero(dead)[0])
        raise TotalityError(f"{c.name}: every branch yields bottom on x={from_int(x, c.n_std)}")
    table = np.where(has1, 1, 0).astype(np.int8)
    table[has0 & has1] = int(BOT)
    return table


def truth_table(c: Circuit, mode: EvalMode) -> np.ndarray:
    """Tri-valued truth table (0, 1, or 2 for bottom) indexed by input integer."""
    check_mode(c, mode)
    key = ("tt", mode)
    table = c._cache.get(key)
    if table is None:
        table = _collapse(c, mode, output_slices(c))
        table.setflags(write=False)
        c._cache[key] = table
    return table


def evaluate(c: Circuit, mode: EvalMode, x: BitString) -> TriBit:
    """Value of ``c`` on ``x`` under ``mode``, enumerating all witnesses."""
    check(x)
    check_mode(c, mode)
    if len(x) != c.n_std:
        raise ArityError(f"{c.name}: expected {c.n_std} input bits, got {len(x)}")
    require_cap(c.n_std + c.n_wit, f"circuit {c.name}")
    outs = _slice_outputs(c, c.n_std, to_int(x))
    return TriBit(int(_collapse(c, mode, outs)[0]))


def output_table(c: Circuit) -> np.ndarray:
    """For a witness-free circuit, the output string of every input as an integer."""
    if c.n_wit:
        raise ModeError(f"{c.name}: output tables need a deterministic circuit")
    table = c._cache.get("out")
    if table is None:
        outs = output_slices(c)
        table = np.zeros(1 << c.n_std, dtype=np.int64)
        for k, col in enumerate(outs):
            table |= col[:, 0].astype(np.int64) << (c.n_out - 1 - k)
        table.setflags(write=False)
        c._cache["out"] = table
    return table


# ---------------------------------------------------------------- building

Ref = tuple  # ("i", t) | ("w", t) | ("g", j) | ("c", bit), all 0-based

ZERO: Ref = ("c", 0)
ONE: Ref = ("c", 1)
_COMMUTATIVE = {Op.AND, Op.OR, Op.XOR}


class CircuitBuilder:
    """Incremental circuit construction with constant folding and structural hashing."""

    def __init__(self, n_std: int, n_wit: int = 0):
        self.n_std = n_std
        self.n_wit = n_wit
        self._gates: list[tuple[Op, tuple[Ref, ...]]] = []
        self._memo: dict[tuple, Ref] = {}
        self._neg: dict[Ref, Ref] = {ZERO: ONE, ONE: ZERO}

    def inp(self, t: int) -> Ref:
        """Standard input ``t`` (1-based)."""
        if not 1 <= t <= self.n_std:
            raise IndexError(t)
        return ("i", t - 1)

    def inputs(self) -> list[Ref]:
        return [("i", t) for t in range(self.n_std)]

    def new_witnesses(self, k: int) -> list[Ref]:
        refs = [("w", self.n_wit + t) for t in range(k)]
        self.n_wit += k
        return refs

    def const(self, b: int) -> Ref:
        return ONE if b else ZERO

    def _gate(self, op: Op, args: tuple[Ref, ...]) -> Ref:
        key_args = tuple(sorted(args)) if op in _COMMUTATIVE else args
        key = (op, key_args)
        ref = self._memo.get(key)
        if ref is None:
            ref = ("g", len(self._gates))
            self._gates.append((op, args))
            self._memo[key] = ref
        return ref

    def not_(self, a: Ref) -> Ref:
        if a in self._neg:
            return self._neg[a]
        r = self._gate(Op.NOT, (a,))
        self._neg[a], self._neg[r] = r, a
        return r

    def and_(self, a: Ref, b: Ref) -> Ref:
        if a == ZERO or b == ZERO or self._neg.get(a) == b:
            return ZERO
        if a == ONE or a == b:
            return b
        if b == ONE:
            return a
        return self._gate(Op.AND, (a, b))

    def or_(self, a: Ref, b: Ref) -> Ref:
        if a == ONE or b == ONE or self._neg.get(a) == b:
            return ONE
        if a == ZERO or a == b:
            return b
        if b == ZERO:
            return a
        return self._gate(Op.OR, (a, b))

    def xor(self, a: Ref, b: Ref) -> Ref:
        if a == ZERO:
            return b
        if b == ZERO:
            return a
        if a == ONE:
            return self.not_(b)
        if b == ONE:
            return self.not_(a)
        if a == b:
            return ZERO
        if self._neg.get(a) == b:
            return ONE
        return self._gate(Op.XOR, (a, b))

    def mux(self, s: Ref, hi: Ref, lo: Ref) -> Ref:
        """``hi`` when ``s`` is 1, else ``lo``."""
        if hi == lo:
            return hi
        if lo == ZERO:
            return self.and_(s, hi)
        if hi == ZERO:
            return self.and_(self.not_(s), lo)
        if hi == ONE:
            return self.or_(s, lo)
        if lo == ONE:
            return self.or_(self.not_(s), hi)
        if self._neg.get(hi) == lo:
            return self.xor(s, lo)
        return self.xor(lo, self.and_(s, self.xor(lo, hi)))

    def and_all(self, refs: Iterable[Ref]) -> Ref:
        acc = ONE
        for r in refs:
            acc = self.and_(acc, r)
        return acc

    def equal(self, xs: Sequence[Ref], ys: Sequence[Ref]) -> Ref:
        return self.and_all(self.not_(self.xor(a, b)) for a, b in zip(xs, ys, strict=True))

    def embed(self, c: Circuit, std: Sequence[Ref], wit: Sequence[Ref] | None = None) -> list[Ref]:
        """Wire a copy of ``c`` into this circuit; returns its output refs.

        Without ``wit``, fresh witness inputs are allocated for ``c``'s witnesses.
        """
        if len(std) != c.n_std:
            raise ArityError(f"{c.name}: {c.n_std} standard inputs, {len(std)} supplied")
        if wit is None:
            wit = self.new_witnesses(c.n_wit)
        if len(wit) != c.n_wit:
            raise ArityError(f"{c.name}: {c.n_wit} witness inputs, {len(wit)} supplied")
        node: list[Ref] = list(std) + list(wit)
        for op, args in c.gates:
            a = [node[k] for k in args]
            if op is Op.AND:
                node.append(self.and_(*a))
            elif op is Op.OR:
                node.append(self.or_(*a))
            elif op is Op.XOR:
                node.append(self.xor(*a))
            elif op is Op.NOT:
                node.append(self.not_(a[0]))
            else:
                node.append(self.const(op is Op.CONST1))
        return [node[o] for o in c.outputs]

    def table(self, values: Sequence[int] | np.ndarray, n_out: int, std: Sequence[Ref]) -> list[Ref]:
        """Compile an explicit table (entry ``x`` = output integer) into gates over ``std``."""
        values = np.asarray(values, dtype=np.int64)
        if len(values) != 1 << len(std):
            raise ArityError(f"table of {len(values)} rows for {len(std)} inputs")
        memo: dict[bytes, Ref] = {}

        def shannon(col: np.ndarray, level: int) -> Ref:
            if not col.any():
                return ZERO
            if col.all():
                return ONE
            key = col.tobytes()
            hit = memo.get(key)
            if hit is None:
                half = len(col) // 2
                hi = shannon(col[half:], level + 1)
                lo = shannon(col[:half], level + 1)
                hit = memo[key] = self.mux(std[level], hi, lo)
            return hit

        return [shannon(((values >> (n_out - 1 - k)) & 1).astype(bool), 0) for k in range(n_out)]

    def build(self, outputs: Sequence[Ref], name: str) -> Circuit:
        # Keep only gates reachable from the outputs; materialise constants.
        live: set[int] = set()
        stack = [r[1] for r in outputs if r[0] == "g"]
        while stack:
            j = stack.pop()
            if j in live:
                continue
            live.add(j)
            stack.extend(a[1] for a in self._gates[j][1] if a[0] == "g")
        base = self.n_std + self.n_wit
        index: dict[Ref, int] = {}
        gates: list[tuple[Op, tuple[int, ...]]] = []
        for j in sorted(live):
            op, args = self._gates[j]
            index[("g", j)] = base + len(gates)
            gates.append((op, tuple(self._node(a, index) for a in args)))

        out_nodes = []
        for r in outputs:
            if r[0] == "c":
                if r not in index:
                    index[r] = base + len(gates)
                    gates.append((Op.CONST1 if r[1] else Op.CONST0, ()))
                out_nodes.append(index[r])
            else:
                out_nodes.append(self._node(r, index))
        return Circuit(name, self.n_std, self.n_wit, tuple(gates), tuple(out_nodes))

    def _node(self, r: Ref, index: Mapping[Ref, int]) -> int:
        kind, t = r
        if kind == "i":
            return t
        if kind == "w":
            return self.n_std + t
        if kind == "g":
            return index[r]
        raise AssertionError("constants are folded before gates use them")


# ---------------------------------------------------------------- common circuits

def table_circuit(values: Sequence[int] | np.ndarray, n_in: int, n_out: int, name: str) -> Circuit:
    b = CircuitBuilder(n_in)
    return b.build(b.table(values, n_out, b.inputs()), name)


def acceptor(accepted: Iterable[BitString] | Iterable[int], n: int, name: str) -> Circuit:
    """Deterministic circuit on ``n`` inputs accepting exactly the given strings."""
    table = np.zeros(1 << n, dtype=np.int64)
    for s in accepted:
        table[to_int(s) if isinstance(s, str) else int(s)] = 1
    return table_circuit(table, n, 1, name)


def constant(n: int, value: int, name: str | None = None) -> Circuit:
    b = CircuitBuilder(n)
    return b.build([b.const(value)], name or f"const{value}_{n}")


def negate(c: Circuit, name: str | None = None) -> Circuit:
    """Same inputs and witnesses, single output complemented."""
    if c.n_out != 1:
        raise ModeError("negate needs a single-output circuit")
    b = CircuitBuilder(c.n_std, c.n_wit)
    (out,) = b.embed(c, b.inputs(), [("w", t) for t in range(c.n_wit)])
    return b.build([b.not_(out)], name or f"not_{c.name}")


def restrict(c: Circuit, fixed: Mapping[int, int], name: str | None = None) -> Circuit:
    """Fix some standard inputs (1-based positions) to constants.

    The remaining standard inputs keep their relative order; witnesses are kept.
    """
    free = [t for t in range(1, c.n_std + 1) if t not in fixed]
    b = CircuitBuilder(len(free), c.n_wit)
    pos = {t: k for k, t in enumerate(free)}
    std = [b.const(fixed[t]) if t in fixed else ("i", pos[t]) for t in range(1, c.n_std + 1)]
    outs = b.embed(c, std, [("w", t) for t in range(c.n_wit)])
    return b.build(outs, name or f"{c.name}_restricted")
