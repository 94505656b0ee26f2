"""Learning a circuit from membership queries by breaking the interleaving generator G[m,C].

A run fixes a block index i, random bits r and every seed block but the i-th,
queries the target on the blocks before i, and hard-wires all of it around the
distinguisher.  The hypothesis answers ``r_i`` flipped exactly when D accepts.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .bits import BitString, all_strings, from_int
from .circuit import Circuit, CircuitBuilder, EvalMode, output_table
from .errors import ArityError, ContractViolation, ModeError, OracleInconsistency, PreconditionError
from .generator import gmc
from .measure import DECISION_MODES, Adversary, frac, least_s, super_advantage
from .reduction import HybridTrace

EXHAUSTIVE_LIMIT = 1 << 20


class RecordingOracle:
    """Membership oracle that logs every query and insists on consistent answers."""

    def __init__(self, answer: Circuit | Callable[[BitString], int]) -> None:
        if isinstance(answer, Circuit):
            table = output_table(answer)
            self._answer = lambda x: int(table[int(x, 2) if x else 0])
        else:
            self._answer = answer
        self.log: list[tuple[BitString, int]] = []
        self._seen: dict[BitString, int] = {}

    def __call__(self, x: BitString) -> int:
        bit = int(self._answer(x))
        if bit not in (0, 1):
            raise OracleInconsistency(f"oracle answered {bit!r} on {x}")
        prev = self._seen.setdefault(x, bit)
        if prev != bit:
            raise OracleInconsistency(f"oracle answered {prev} and then {bit} on {x}")
        self.log.append((x, bit))
        return bit


@dataclass(frozen=True)
class LearnerRun:
    i: int
    r: BitString
    x_blocks: tuple[BitString, ...]
    queries: tuple[tuple[BitString, int], ...]
    hypothesis: Adversary
    rng_seed: int | None = None


def _flip(mode: EvalMode) -> EvalMode:
    return {EvalMode.NONDET: EvalMode.CONONDET, EvalMode.CONONDET: EvalMode.NONDET}.get(mode, mode)


def _check(D: Adversary, C: Circuit, m: int) -> int:
    if D.mode not in DECISION_MODES:
        raise ModeError(f"{D.name}: the learner embeds decision circuits only")
    if C.n_wit or C.n_out != 1:
        raise ModeError(f"{C.name}: the target must be a deterministic single-output circuit")
    if m < 1:
        raise ValueError("m must be positive")
    n = C.n_std
    if D.n_std != m * (n + 1):
        raise ArityError(f"{D.name} reads {D.n_std} bits, G[{m},{C.name}] outputs {m * (n + 1)}")
    return n


def hypothesis_for(D: Adversary, m: int, n: int, i: int, r: BitString,
                   x_blocks: tuple[BitString, ...], answers: tuple[int, ...]) -> Adversary:
    """C'(x) = r_i XOR D(x_1 a_1 .. x_{i-1} a_{i-1} x r_i x_{i+1} r_{i+1} .. x_m r_m)."""
    bld = CircuitBuilder(n)
    xs = bld.inputs()
    feed = []
    others = iter(x_blocks)
    for j in range(1, m + 1):
        if j == i:
            feed += xs + [bld.const(int(r[j - 1]))]
            continue
        block = next(others)
        tail = answers[j - 1] if j < i else int(r[j - 1])
        feed += [bld.const(int(ch)) for ch in block] + [bld.const(tail)]
    (out,) = bld.embed(D.circuit, feed)
    flip = r[i - 1] == "1"
    if flip:
        out = bld.not_(out)
    mode = _flip(D.mode) if flip else D.mode
    return Adversary(bld.build([out], f"h[{D.name},i={i},r={r}]"), mode)


def learn_with(D: Adversary, C: Circuit, m: int, i: int, r: BitString,
               x_blocks: tuple[BitString, ...], oracle: Callable[[BitString], int] | None = None,
               rng_seed: int | None = None) -> LearnerRun:
    """One run with explicitly chosen randomness; the oracle sees only blocks 1..i-1."""
    n = _check(D, C, m)
    if not 1 <= i <= m or len(r) != m or len(x_blocks) != m - 1:
        raise ArityError(f"need 1 <= i <= {m}, |r| = {m} and {m - 1} fixed blocks")
    if any(len(x) != n for x in x_blocks):
        raise ArityError(f"fixed blocks must have {n} bits")
    ask = oracle if oracle is not None else RecordingOracle(C)
    queries = tuple((x, ask(x)) for x in x_blocks[:i - 1])
    answers = tuple(a for _, a in queries)
    h = hypothesis_for(D, m, n, i, r, x_blocks, answers)
    return LearnerRun(i, r, tuple(x_blocks), queries, h, rng_seed)


def learn(D: Adversary, C: Circuit, m: int, rng_seed: int,
          oracle: Callable[[BitString], int] | None = None) -> LearnerRun:
    n = _check(D, C, m)
    rng = np.random.default_rng(rng_seed)
    i = int(rng.integers(1, m + 1))
    r = "".join(str(int(v)) for v in rng.integers(0, 2, size=m))
    blocks = tuple("".join(str(int(v)) for v in rng.integers(0, 2, size=n)) for _ in range(m - 1))
    return learn_with(D, C, m, i, r, blocks, oracle, rng_seed)


def hypothesis_accuracy(run: LearnerRun, C: Circuit) -> Fraction:
    """P_x[C'(x) = C(x)], from the hypothesis circuit itself."""
    return frac(run.hypothesis.table() == output_table(C))


def hybrid_probabilities(D: Adversary, C: Circuit, m: int) -> list[Fraction]:
    """p_1 .. p_{m+1}: p_i has real verdict bits in blocks 1..i-1 and random bits after."""
    n = _check(D, C, m)
    g = gmc(m, C)
    acc = D.accepts().astype(np.int64)
    l = g.l
    weights = [1 << (l - 1 - (j * (n + 1) + n)) for j in range(m)]
    out = []
    for i in range(1, m + 2):
        free = weights[i - 1:]
        base = g.values & ~np.int64(sum(free))
        total = 0
        for pattern in range(1 << len(free)):
            add = sum(w for k, w in enumerate(free) if pattern >> (len(free) - 1 - k) & 1)
            total += int(acc[base | add].sum())
        out.append(Fraction(total, (1 << g.n) << len(free)))
    return out


def hybrid_gap_scan(D: Adversary, C: Circuit, m: int) -> HybridTrace:
    p = hybrid_probabilities(D, C, m)
    gaps = tuple(p[k] - p[k + 1] for k in range(m))
    best = max(range(m), key=lambda k: (gaps[k], -k))
    adv = p[0] - p[-1]
    trace = HybridTrace(best + 1, gaps, p[0], p[-1], adv / m, start=1)
    if not trace.telescopes or gaps[best] < adv / m:
        raise ContractViolation("hybrid gaps do not average to the advantage")
    return trace


class VerifyMode(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class RunAccuracy:
    i: int
    r: BitString
    x_blocks: tuple[BitString, ...]
    accuracy: Fraction


@dataclass(frozen=True)
class LearnOutcome:
    mode: VerifyMode
    advantage: Fraction
    s: int
    m: int
    runs: tuple[RunAccuracy, ...]
    accuracy_threshold: Fraction
    confidence: Fraction
    statement_bound: Fraction
    proof_bound: Fraction
    per_index_accuracy: tuple[Fraction, ...] = ()
    seed: int | None = None
    samples: int | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def meets_bound(self) -> bool:
        return self.confidence >= self.statement_bound

    @property
    def meets_proof_bound(self) -> bool:
        return self.confidence >= self.proof_bound

    @property
    def is_estimate(self) -> bool:
        return self.mode is VerifyMode.SAMPLED

    @property
    def best_accuracy(self) -> Fraction:
        return max(run.accuracy for run in self.runs)


def _run_accuracies(acc: np.ndarray, ctab: np.ndarray, m: int, n: int, i: int, r: BitString,
                    blocks: np.ndarray) -> np.ndarray:
    """Accuracy numerators (out of 2^n) for every row of fixed blocks, straight from D's table."""
    l = m * (n + 1)
    base = np.zeros(len(blocks), dtype=np.int64)
    others = [j for j in range(1, m + 1) if j != i]
    for col, j in enumerate(others):
        shift = l - j * (n + 1)
        x = blocks[:, col]
        tail = ctab[x] if j < i else np.full_like(x, int(r[j - 1]))
        base |= ((x << 1) | tail) << shift
    base |= np.int64(int(r[i - 1])) << (l - i * (n + 1))
    xs = np.arange(1 << n, dtype=np.int64) << (l - i * (n + 1) + 1)
    hyp = acc[base[:, None] | xs[None, :]] ^ int(r[i - 1])
    return (hyp == ctab[None, :]).sum(axis=1)


def verify_learning_bound(D: Adversary, C: Circuit, m: int, s: int | None = None,
                          mode: VerifyMode | str = VerifyMode.EXHAUSTIVE, samples: int = 0,
                          seed: int = 0, limit: int = EXHAUSTIVE_LIMIT) -> LearnOutcome:
    """Fraction of runs whose hypothesis is (1/2 + 1/(2ms))-accurate, against 1/(2 m^2 s) and 1/(m^2 s)."""
    n = _check(D, C, m)
    mode = VerifyMode(mode)
    adv = super_advantage(D, gmc(m, C))
    if s is None:
        s = least_s(adv)
    if adv <= 0 or s is None or adv < Fraction(1, s):
        raise PreconditionError(f"{D.name} has advantage {adv} on G[{m},{C.name}], needs >= 1/{s}")
    threshold = Fraction(1, 2) + Fraction(1, 2 * m * s)
    acc = (D.table() == 1).astype(np.int64)
    ctab = output_table(C).astype(np.int64)
    runs: list[RunAccuracy] = []
    per_index: list[Fraction] = []
    notes: list[str] = []
    if mode is VerifyMode.EXHAUSTIVE:
        space = m * (1 << m) * (1 << (n * (m - 1)))
        if space > limit:
            raise PreconditionError(f"{space} runs exceed the exhaustive limit {limit}; use sampled mode")
        grid = np.array(list(itertools.product(range(1 << n), repeat=m - 1)), dtype=np.int64)
        strings = [tuple(from_int(int(v), n) for v in row) for row in grid]
        trace = hybrid_gap_scan(D, C, m)
        for i in range(1, m + 1):
            total = 0
            for r in all_strings(m):
                hits = _run_accuracies(acc, ctab, m, n, i, r, grid)
                total += int(hits.sum())
                runs += [RunAccuracy(i, r, blk, Fraction(int(h), 1 << n)) for blk, h in zip(strings, hits)]
            mean = Fraction(total, (1 << n) * (1 << m) * len(grid))
            per_index.append(mean)
            if mean != Fraction(1, 2) + trace.gaps[i - 1]:
                raise ContractViolation(f"index {i}: mean accuracy {mean} != 1/2 + gap {trace.gaps[i - 1]}")
        hits = sum(run.accuracy >= threshold for run in runs)
        confidence = Fraction(hits, len(runs))
    else:
        if samples <= 0:
            raise ValueError("sampled mode needs a positive sample count")
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            i = int(rng.integers(1, m + 1))
            r = "".join(str(int(v)) for v in rng.integers(0, 2, size=m))
            row = rng.integers(0, 1 << n, size=(1, m - 1)).astype(np.int64)
            h = _run_accuracies(acc, ctab, m, n, i, r, row)[0]
            runs.append(RunAccuracy(i, r, tuple(from_int(int(v), n) for v in row[0]), Fraction(int(h), 1 << n)))
        confidence = Fraction(sum(run.accuracy >= threshold for run in runs), samples)
        notes.append(f"estimate from {samples} sampled runs, seed {seed}")
    return LearnOutcome(mode, adv, s, m, tuple(runs), threshold, confidence,
                        Fraction(1, 2 * m * m * s), Fraction(1, m * m * s), tuple(per_index),
                        seed if mode is VerifyMode.SAMPLED else None,
                        samples if mode is VerifyMode.SAMPLED else None, tuple(notes))

