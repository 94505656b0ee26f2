"""Generators as total stretch maps, and the constructions built from them."""

from __future__ import annotations

import re
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .bits import BitString, check, from_int, to_int
from .circuit import Circuit, CircuitBuilder, output_table, require_cap
from .errors import ArityError, FormatError, ModeError, PreconditionError


@dataclass(frozen=True, eq=False)
class Table:
    """An explicit total map ``{0,1}^n_in -> {0,1}^n_out``.

    ``values[x]`` is the output, as an integer, of the input whose integer is ``x``.
    """

    n_in: int
    n_out: int
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.int64)
        if values.shape != (1 << self.n_in,):
            raise ArityError(f"table {self.label!r}: need {1 << self.n_in} rows, got {values.shape}")
        if values.size and (values.min() < 0 or values.max() >= 1 << self.n_out):
            raise ArityError(f"table {self.label!r}: entries exceed {self.n_out} output bits")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, x: BitString) -> BitString:
        check(x)
        if len(x) != self.n_in:
            raise ArityError(f"table {self.label!r}: input length {len(x)} != {self.n_in}")
        return from_int(int(self.values[to_int(x)]), self.n_out)

    @classmethod
    def from_function(cls, fn: Callable[[BitString], BitString], n_in: int, n_out: int,
                      label: str = "") -> Table:
        vals = []
        for v in range(1 << n_in):
            y = check(fn(from_int(v, n_in)))
            if len(y) != n_out:
                raise ArityError(f"function {label!r} returned {len(y)} bits, expected {n_out}")
            vals.append(to_int(y))
        return cls(n_in, n_out, np.array(vals, dtype=np.int64), label)

    @classmethod
    def from_strings(cls, outputs: Sequence[BitString], label: str = "") -> Table:
        n_in = (len(outputs) - 1).bit_length()
        if len(outputs) != 1 << n_in:
            raise ArityError("number of outputs must be a power of two")
        n_out = len(outputs[0])
        if any(len(o) != n_out for o in outputs):
            raise ArityError("outputs of differing lengths")
        return cls(n_in, n_out, np.array([to_int(check(o)) for o in outputs], dtype=np.int64), label)

    def strings(self) -> list[BitString]:
        return [from_int(int(v), self.n_out) for v in self.values]

    def is_injective(self) -> bool:
        return len(np.unique(self.values)) == len(self.values)


class Generator:
    """A stretching map ``{0,1}^n -> {0,1}^l`` with ``l > n``.

    Backed by a witness-free circuit or an explicit table; circuit-backed
    generators materialise their table once, on first use.
    """

    def __init__(self, n: int, l: int, *, table: np.ndarray | Sequence[int] | None = None,
                 circuit: Circuit | None = None, label: str = "g"):
        if l <= n:
            raise ArityError(f"generator {label!r}: output length {l} must exceed seed length {n}")
        if (table is None) == (circuit is None):
            raise ValueError("give exactly one of table or circuit")
        if circuit is not None:
            if circuit.n_wit:
                raise ModeError(f"generator {label!r}: backing circuit must be deterministic")
            if circuit.n_std != n or circuit.n_out != l:
                raise ArityError(f"generator {label!r}: circuit has {circuit.n_std} inputs and "
                                 f"{circuit.n_out} outputs, expected {n} and {l}")
        self.n, self.l, self.label = n, l, label
        self.circuit = circuit
        self._table = None if table is None else Table(n, l, np.asarray(table), label)
        self._lock = threading.Lock()
        self._compiled: Circuit | None = circuit

    @property
    def table(self) -> Table:
        if self._table is None:
            with self._lock:
                if self._table is None:
                    require_cap(self.n, f"generator {self.label}")
                    self._table = Table(self.n, self.l, output_table(self.circuit), self.label)
        return self._table

    @property
    def values(self) -> np.ndarray:
        return self.table.values

    def __call__(self, x: BitString) -> BitString:
        return self.table(x)

    def to_circuit(self) -> Circuit:
        """A witness-free circuit computing the generator (compiled from the table if needed)."""
        if self._compiled is None:
            with self._lock:
                if self._compiled is None:
                    b = CircuitBuilder(self.n)
                    self._compiled = b.build(b.table(self._table.values, self.l, b.inputs()),
                                             f"{self.label}_circ")
        return self._compiled

    @classmethod
    def from_table(cls, table: Table, label: str | None = None) -> Generator:
        return cls(table.n_in, table.n_out, table=table.values, label=label or table.label or "g")

    @classmethod
    def from_function(cls, fn: Callable[[BitString], BitString], n: int, l: int,
                      label: str = "g") -> Generator:
        return cls.from_table(Table.from_function(fn, n, l, label), label)

    def __repr__(self) -> str:
        backing = "circuit" if self.circuit is not None else "table"
        return f"Generator({self.label!r}, n={self.n}, l={self.l}, {backing})"


# ---------------------------------------------------------------- stretching

def _ceil_power(N: int, c: Fraction) -> int:
    """Least integer m with m >= N**c, decided exactly as m**q >= N**p."""
    p, q = c.numerator, c.denominator
    target = N ** p
    m = max(1, int(round(N ** float(c))))
    while m ** q < target:
        m += 1
    while m > 1 and (m - 1) ** q >= target:
        m -= 1
    return m


@dataclass(frozen=True)
class StretchParams:
    N: int
    c: Fraction

    def __post_init__(self) -> None:
        c = Fraction(self.c)
        object.__setattr__(self, "c", c)
        if not 0 < c < 1:
            raise ValueError(f"exponent c must lie in (0, 1), got {c}")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.n < 1:
            raise ValueError(f"N={self.N}, c={c}: block length floor(N/m) is 0")

    @property
    def m(self) -> int:
        return _ceil_power(self.N, self.c)

    @property
    def n(self) -> int:
        return self.N // self.m

    @property
    def rem(self) -> int:
        return self.N - self.m * self.n

    @property
    def out_len(self) -> int:
        return self.N + self.m


def stretch(b: Generator, p: StretchParams) -> Generator:
    """Apply the one-bit generator to each of m seed blocks, then copy the remainder."""
    if b.l != b.n + 1:
        raise ArityError(f"base generator must stretch by one bit, has n={b.n}, l={b.l}")
    if b.n != p.n:
        raise ArityError(f"base generator seed length {b.n} != block length {p.n}")
    m, n, rem, N = p.m, p.n, p.rem, p.N
    label = f"stretch({b.label},N={N},c={p.c})"
    if b.circuit is not None:
        bld = CircuitBuilder(N)
        xs = bld.inputs()
        outs = []
        for j in range(m):
            outs += bld.embed(b.circuit, xs[j * n:(j + 1) * n])
        outs += xs[m * n:]
        return Generator(N, N + m, circuit=bld.build(outs, label), label=label)
    require_cap(N, label)
    seeds = np.arange(1 << N, dtype=np.int64)
    out = np.zeros_like(seeds)
    for j in range(m):
        block = (seeds >> (N - (j + 1) * n)) & ((1 << n) - 1)
        out = (out << (n + 1)) | b.values[block]
    out = (out << rem) | (seeds & ((1 << rem) - 1))
    return Generator(N, N + m, table=out, label=label)


# ---------------------------------------------------------------- one-bit splits

def concat_bit(f: Table, b_pred: Table, label: str | None = None) -> Generator:
    """``g(x) = f(x) b(x)`` for a length-preserving ``f`` and a predicate ``b``."""
    if f.n_out != f.n_in:
        raise ArityError(f"f must be length-preserving, maps {f.n_in} to {f.n_out} bits")
    if b_pred.n_in != f.n_in or b_pred.n_out != 1:
        raise ArityError("predicate table must map the same inputs to one bit")
    vals = (f.values << 1) | b_pred.values
    return Generator(f.n_in, f.n_in + 1, table=vals,
                     label=label or f"{f.label or 'f'}.{b_pred.label or 'b'}")


def split_last(g: Generator) -> tuple[Table, Table]:
    """Split a one-bit-stretch generator into its first n bits and its last bit."""
    if g.l != g.n + 1:
        raise ArityError(f"split_last needs l = n + 1, got n={g.n}, l={g.l}")
    v = g.values
    return Table(g.n, g.n, v >> 1, f"{g.label}[1..{g.n}]"), Table(g.n, 1, v & 1, f"{g.label}[-1]")


# ---------------------------------------------------------------- G_{m,C}

def gmc(m: int, C: Circuit) -> Generator:
    """Interleave m seed blocks with the circuit's verdict on each block."""
    if C.n_wit or C.n_out != 1:
        raise ModeError(f"{C.name}: G_m,C needs a deterministic single-output circuit")
    if m < 1:
        raise ValueError("m must be positive")
    n = C.n_std
    require_cap(m * n, "G_m,C seed")
    bld = CircuitBuilder(m * n)
    xs = bld.inputs()
    outs = []
    for j in range(m):
        block = xs[j * n:(j + 1) * n]
        outs += block + bld.embed(C, block)
    label = f"G[{m},{C.name}]"
    return Generator(m * n, m * (n + 1), circuit=bld.build(outs, label), label=label)


# ---------------------------------------------------------------- i.o. patching

def patch_member(family: Sequence[Generator], n: int) -> Generator:
    """The family member with the largest seed length not exceeding n."""
    usable = [g for g in family if g.n <= n]
    if not usable:
        raise PreconditionError(f"no generator in the family has seed length <= {n}")
    return max(usable, key=lambda g: g.n)


def io_patch(family: Sequence[Generator], n: int) -> Generator:
    """``G(x) = g(x[1..n_i]) . x[n_i+1..n]`` with n_i the largest family length <= n."""
    stretches = {g.l - g.n for g in family}
    if len(stretches) != 1:
        raise ArityError(f"family members stretch by differing amounts: {sorted(stretches)}")
    g = patch_member(family, n)
    require_cap(n, "patched generator")
    tail = n - g.n
    seeds = np.arange(1 << n, dtype=np.int64)
    vals = (g.values[seeds >> tail] << tail) | (seeds & ((1 << tail) - 1))
    c = g.l - g.n
    return Generator(n, n + c, table=vals, label=f"patch({g.label},n={n})")


# ---------------------------------------------------------------- images

def image(g: Generator) -> frozenset[BitString]:
    require_cap(g.n, f"image of {g.label}")
    return frozenset(from_int(int(v), g.l) for v in np.unique(g.values))


def image_counts(g: Generator) -> Counter:
    """Image with multiplicities (number of seeds per output)."""
    require_cap(g.n, f"image of {g.label}")
    vals, counts = np.unique(g.values, return_counts=True)
    return Counter({from_int(int(v), g.l): int(k) for v, k in zip(vals, counts)})


def image_mask(g: Generator) -> np.ndarray:
    """Boolean indicator of the image over ``{0,1}^l``."""
    require_cap(g.l, f"image of {g.label}")
    mask = np.zeros(1 << g.l, dtype=bool)
    mask[g.values] = True
    return mask


# ---------------------------------------------------------------- file format

_GEN_HEADER = re.compile(r"(generator|function)\s+(\S+)\s+n=(\d+)\s+l=(\d+)$")


def parse_tables(text: str, circuits: Mapping[str, Circuit] | None = None,
                 first_line: int = 1) -> list[Generator | Table]:
    """Parse ``generator`` blocks (returned as Generators) and ``function`` blocks (Tables).

    A block is a header followed by either ``circuit <name>`` or ``2**n`` lines
    ``map <seed> <output>``.
    """
    circuits = circuits or {}
    blocks: list[list[tuple[int, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=first_line):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if _GEN_HEADER.match(line):
            blocks.append([])
        elif not blocks:
            raise FormatError(f"line {lineno}: expected a 'generator' header")
        blocks[-1].append((lineno, line))
    return [_parse_table_block(b, circuits) for b in blocks]


def _parse_table_block(lines: list[tuple[int, str]], circuits: Mapping[str, Circuit]):
    hline, header = lines[0]
    kind, name, n, l = _GEN_HEADER.match(header).groups()
    n, l = int(n), int(l)
    body = lines[1:]
    if len(body) == 1 and body[0][1].startswith("circuit"):
        parts = body[0][1].split()
        if len(parts) != 2:
            raise FormatError(f"line {body[0][0]}: expected 'circuit <name>'")
        if parts[1] not in circuits:
            raise FormatError(f"line {body[0][0]}: unknown circuit {parts[1]!r}")
        c = circuits[parts[1]]
        if kind == "function":
            return Table(n, l, output_table(c), name)
        return Generator(n, l, circuit=c, label=name)
    table = np.full(1 << n, -1, dtype=np.int64)
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 3 or parts[0] != "map":
            raise FormatError(f"line {lineno}: expected 'map <seed> <output>'")
        seed, out = parts[1], parts[2]
        if set(seed + out) - {"0", "1"} or len(seed) != n or len(out) != l:
            raise FormatError(f"line {lineno}: seed/output lengths must be {n}/{l}")
        if table[to_int(seed)] != -1:
            raise FormatError(f"line {lineno}: seed {seed} mapped twice")
        table[to_int(seed)] = to_int(out)
    if (table < 0).any():
        raise FormatError(f"line {hline}: {name} is not total, "
                          f"{int((table < 0).sum())} seeds unmapped")
    if kind == "function":
        return Table(n, l, table, name)
    return Generator(n, l, table=table, label=name)


def format_generator(g: Generator | Table) -> str:
    if isinstance(g, Table):
        lines = [f"function {g.label} n={g.n_in} l={g.n_out}"]
        n, l, vals = g.n_in, g.n_out, g.values
    else:
        lines = [f"generator {g.label} n={g.n} l={g.l}"]
        if g.circuit is not None:
            return "\n".join(lines + [f"circuit {g.circuit.name}"]) + "\n"
        n, l, vals = g.n, g.l, g.values
    lines += [f"map {from_int(s, n)} {from_int(int(v), l)}" for s, v in enumerate(vals)]
    return "\n".join(lines) + "\n"
