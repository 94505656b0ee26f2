"""Small shared builders for the test suite."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import numpy as np
from hypothesis import strategies as st

from demibits.bits import all_strings
from demibits.circuit import ARITY, Circuit, EvalMode, Op, acceptor, table_circuit
from demibits.generator import Generator, Table
from demibits.measure import Adversary


def xor_bits(x: str) -> str:
    return str(sum(map(int, x)) % 2)


def parity_gen() -> Generator:
    """g(x1 x2) = x1 x2 (x1 xor x2)."""
    return Generator.from_function(lambda x: x + xor_bits(x), 2, 3, label="par")


def dup_gen() -> Generator:
    return Generator.from_function(lambda x: x + x, 1, 2, label="dup")


def det_acceptor(strings: Iterable[str], n: int, name: str = "D") -> Adversary:
    return Adversary(acceptor(list(strings), n, name), EvalMode.DET)


def complement_acceptor(g: Generator, name: str = "Dc") -> Adversary:
    img = {g(x) for x in all_strings(g.n)}
    return det_acceptor([y for y in all_strings(g.l) if y not in img], g.l, name)


def det_fn(fn, n: int, name: str) -> Adversary:
    """Deterministic single-output adversary from a Python predicate on bit strings."""
    vals = [int(fn(x)) for x in all_strings(n)]
    return Adversary(table_circuit(vals, n, 1, name), EvalMode.DET)


def table_of(fn, n_in: int, n_out: int, label: str = "t") -> Table:
    return Table.from_function(fn, n_in, n_out, label)


def brute_p(fn, n: int) -> Fraction:
    """P over uniform n-bit strings of a Python predicate, by explicit loop."""
    return Fraction(sum(int(fn(x)) for x in all_strings(n)), 1 << n)


@st.composite
def circuits(draw, n_std=st.integers(0, 3), n_wit=st.integers(0, 2), n_out: int = 1,
             max_gates: int = 8) -> Circuit:
    """Random well-formed circuits built directly from gate records."""
    k = draw(n_std)
    w = draw(n_wit)
    gates = []
    for j in range(draw(st.integers(0 if k + w else 1, max_gates))):
        op = draw(st.sampled_from(list(Op)))
        avail = k + w + j
        if avail == 0:
            op = draw(st.sampled_from([Op.CONST0, Op.CONST1]))
        args = tuple(draw(st.integers(0, avail - 1)) for _ in range(ARITY[op]))
        gates.append((op, args))
    total = k + w + len(gates)
    outs = tuple(draw(st.integers(0, total - 1)) for _ in range(n_out))
    return Circuit("h", k, w, tuple(gates), outs)


def random_tables(rng: np.random.Generator, n_in: int, n_out: int, count: int, label: str = "r"):
    for k in range(count):
        yield Table(n_in, n_out, rng.integers(0, 1 << n_out, size=1 << n_in).astype(np.int64), f"{label}{k}")


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    """Remember one acceptance verdict; the session summary prints them all."""
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
