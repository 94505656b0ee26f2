"""Adversary families and batch sweeps for the stretch reduction.

The family for each (b, params) pair:

* output length <= ``exhaustive_len``: every nonempty subset of the image
  complement, as a deterministic acceptor (these are exactly the deterministic
  acceptors that demi-break the stretch);
* longer outputs: the full complement, every single non-image point when the
  base seed length is 1, and a few seeded random complement subsets;
* seeded random nondeterministic circuits masked off the image.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .bits import from_int
from .circuit import CircuitBuilder, EvalMode, Op, acceptor
from .errors import WorkbenchError
from .generator import Generator, StretchParams, Table, image_mask, stretch
from .measure import Adversary, demi_break
from .reduction import stretch_reduction


def canonical_exponent(N: int, m: int) -> Fraction | None:
    """Smallest-denominator c in (0, 1) with ceil(N^c) = m, if any."""
    for d in range(2, 33):
        for k in range(1, d):
            c = Fraction(k, d)
            if c.denominator != d:
                continue
            try:
                p = StretchParams(N, c)
            except ValueError:
                continue
            if p.m == m:
                return c
    return None


def stretch_configs(N_max: int) -> list[StretchParams]:
    out = []
    for N in range(1, N_max + 1):
        for m in range(1, N + 1):
            c = canonical_exponent(N, m)
            if c is not None:
                out.append(StretchParams(N, c))
    return out


def base_generators(n: int) -> Iterator[Generator]:
    """Every table {0,1}^n -> {0,1}^(n+1), in lexicographic order of the value list."""
    for k, values in enumerate(itertools.product(range(1 << (n + 1)), repeat=1 << n)):
        label = f"b{n}_{k}"
        yield Generator.from_table(Table(n, n + 1, np.array(values, dtype=np.int64), label), label)


def random_gates(rng: np.random.Generator, bld: CircuitBuilder, pool: list, gates: int) -> list:
    """Append ``gates`` random fan-in-2 gates over ``pool``; returns the grown pool."""
    pool = list(pool)
    ops = (Op.AND, Op.OR, Op.XOR, Op.NOT)
    for _ in range(gates):
        op = ops[int(rng.integers(len(ops)))]
        a = pool[int(rng.integers(len(pool)))]
        if op is Op.NOT:
            pool.append(bld.not_(a))
            continue
        b = pool[int(rng.integers(len(pool)))]
        pool.append({Op.AND: bld.and_, Op.OR: bld.or_, Op.XOR: bld.xor}[op](a, b))
    return pool


def random_circuit(rng: np.random.Generator, n_std: int, n_wit: int, gates: int):
    """A random circuit over fresh inputs and witnesses; returns (builder, last gate ref)."""
    bld = CircuitBuilder(n_std, 0)
    pool = random_gates(rng, bld, bld.inputs() + bld.new_witnesses(n_wit), gates)
    return bld, pool[-1]


def masked_random_adversary(rng: np.random.Generator, g: Generator, n_wit: int, name: str) -> Adversary:
    """Random nondeterministic circuit ANDed with a check that its input is outside image(g)."""
    bld, out = random_circuit(rng, g.l, n_wit, int(rng.integers(3, 10)))
    mask = (~image_mask(g)).astype(np.int64)
    (off_image,) = bld.table(mask, 1, bld.inputs())
    return Adversary(bld.build([bld.and_(out, off_image)], name), EvalMode.NONDET)


@dataclass(frozen=True)
class SweepCase:
    base: Generator
    params: StretchParams
    adversary: Adversary
    family: str


def _complement_acceptors(g: Generator, exhaustive_len: int, rng: np.random.Generator,
                          single_points: bool, random_subsets: int) -> Iterator[tuple[Adversary, str]]:
    comp = [int(v) for v in np.flatnonzero(~image_mask(g))]
    l = g.l
    if l <= exhaustive_len:
        for mask in range(1, 1 << len(comp)):
            members = [v for k, v in enumerate(comp) if mask >> k & 1]
            yield Adversary(acceptor(members, l, f"S{mask}"), EvalMode.DET), "subset"
        return
    yield Adversary(acceptor(comp, l, "Sall"), EvalMode.DET), "complement"
    if single_points:
        for v in comp:
            yield Adversary(acceptor([v], l, f"P{from_int(v, l)}"), EvalMode.DET), "point"
    for k in range(random_subsets):
        keep = rng.random(len(comp)) < 0.5
        members = [v for v, flag in zip(comp, keep) if flag] or [comp[0]]
        yield Adversary(acceptor(members, l, f"R{k}"), EvalMode.DET), "random-subset"


def sweep_cases(seed: int, n_values: tuple[int, ...] = (1, 2), N_max: int = 4, exhaustive_len: int = 4,
                random_subsets: int = 2, random_circuits: int = 120, max_wit: int = 3) -> Iterator[SweepCase]:
    """The adversary family of the stretch-soundness sweep, deterministic in ``seed``."""
    ss = np.random.SeedSequence(seed)
    subset_seq, circuit_seq = ss.spawn(2)
    rng = np.random.default_rng(subset_seq)
    configs = stretch_configs(N_max)
    for n in n_values:
        params = [p for p in configs if p.n == n]
        if not params:
            continue
        bases = list(base_generators(n))
        for b in bases:
            for p in params:
                g = stretch(b, p)
                for D, family in _complement_acceptors(g, exhaustive_len, rng, n == 1, random_subsets):
                    yield SweepCase(b, p, D, family)
    crng = np.random.default_rng(circuit_seq)
    pairs = [(n, p) for n in n_values for p in configs if p.n == n]
    made = 0
    attempts = 0
    while made < random_circuits:
        attempts += 1
        if attempts > 50 * random_circuits:
            raise WorkbenchError("random circuit family failed to produce enough demi-breakers")
        n, p = pairs[int(crng.integers(len(pairs)))]
        values = crng.integers(0, 1 << (n + 1), size=1 << n)
        b = Generator.from_table(Table(n, n + 1, values.astype(np.int64), "brand"), f"b{n}_r{made}")
        g = stretch(b, p)
        D = masked_random_adversary(crng, g, int(crng.integers(1, max_wit + 1)), f"N{made}")
        if demi_break(D, g).is_break:
            made += 1
            yield SweepCase(b, p, D, "random-nondet")


@dataclass(frozen=True)
class SweepSummary:
    cases: int
    failures: int
    by_family: dict[str, int]
    telescoping_ok: bool
    padding_ok: bool

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.telescoping_ok and self.padding_ok and self.cases > 0


def run_stretch_sweep(seed: int, rows: list[str] | None = None, reducer=stretch_reduction,
                      **kwargs) -> SweepSummary:
    """Run the reduction on every case; append one deterministic CSV row per case to ``rows``."""
    cases = failures = 0
    by_family: dict[str, int] = {}
    tele = pad = True
    for case in sweep_cases(seed, **kwargs):
        C, cert = reducer(case.adversary, case.base, case.params)
        cases += 1
        by_family[case.family] = by_family.get(case.family, 0) + 1
        failures += not cert.holds
        tele &= cert.trace.telescopes
        pad &= bool(cert.extras["padding_ignored"])
        if rows is not None:
            p = case.params
            first, second = cert.clauses[0], cert.clauses[1]
            rows.append(",".join([
                case.base.label, str(p.N), str(p.c), case.adversary.name, case.family,
                case.adversary.mode.value, str(cert.trace.i_star), cert.extras["suffix"],
                str(first.lhs), str(first.rhs), str(second.lhs), str(cert.holds).lower(),
            ]))
    return SweepSummary(cases, failures, by_family, tele, pad)


SWEEP_HEADER = "base,N,c,adversary,family,mode,i_star,suffix,p_C_random,bound,p_C_image,holds"
