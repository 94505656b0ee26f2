"""Exact-rational hardness, break, prediction and super-core quantities.

Every probability is a :class:`fractions.Fraction` computed by full
enumeration, so "probability exactly 0" is a decidable statement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bits import BitString
from .circuit import Circuit, EvalMode, TriBit, check_mode, evaluate, truth_table
from .errors import ArityError, ModeError
from .generator import Generator, Table

Prob = Fraction

DECISION_MODES = (EvalMode.DET, EvalMode.NONDET, EvalMode.CONONDET)


@dataclass(frozen=True)
class Adversary:
    """A circuit together with the semantics it is run under."""

    circuit: Circuit
    mode: EvalMode

    def __post_init__(self) -> None:
        check_mode(self.circuit, self.mode)

    @property
    def name(self) -> str:
        return self.circuit.name

    @property
    def n_std(self) -> int:
        return self.circuit.n_std

    @property
    def size(self) -> int:
        return self.circuit.size

    def table(self) -> np.ndarray:
        return truth_table(self.circuit, self.mode)

    def accepts(self) -> np.ndarray:
        return self.table() == 1

    def __call__(self, x: BitString) -> TriBit:
        return evaluate(self.circuit, self.mode, x)

    def __repr__(self) -> str:
        return f"Adversary({self.circuit.name!r}, {self.mode.value})"


def det(c: Circuit) -> Adversary:
    return Adversary(c, EvalMode.DET)


def nondet(c: Circuit) -> Adversary:
    return Adversary(c, EvalMode.NONDET)


def conondet(c: Circuit) -> Adversary:
    return Adversary(c, EvalMode.CONONDET)


def func(c: Circuit) -> Adversary:
    return Adversary(c, EvalMode.FUNC)


def frac(mask: np.ndarray) -> Prob:
    """Fraction of True entries, exactly."""
    return Fraction(int(np.count_nonzero(mask)), int(mask.size))


def least_s(p: Fraction) -> int | None:
    """Least integer s with p >= 1/s, or None when p <= 0."""
    if p <= 0:
        return None
    return math.ceil(1 / p)


def _distinguisher(D: Adversary, g: Generator) -> None:
    if D.mode not in DECISION_MODES:
        raise ModeError(f"{D.name}: distinguishers run in det/nondet/conondet mode, not {D.mode.value}")
    if D.n_std != g.l:
        raise ArityError(f"{D.name} reads {D.n_std} bits, generator {g.label} outputs {g.l}")


def p_random(D: Adversary) -> Prob:
    """P_y[D(y) = 1] over uniform y."""
    return frac(D.accepts())


def p_on(D: Adversary, g: Generator | Table) -> Prob:
    """P_x[D(g(x)) = 1] over uniform seeds."""
    return frac(D.accepts()[g.values])


def super_advantage(D: Adversary, g: Generator) -> Fraction:
    """P[D(y)=1] - P[D(g(x))=1], signed, in that order."""
    _distinguisher(D, g)
    return p_random(D) - p_on(D, g)


def std_advantage(D: Adversary, g: Generator) -> Fraction:
    if D.mode is not EvalMode.DET:
        raise ModeError(f"{D.name}: standard advantage is defined for deterministic distinguishers")
    return abs(super_advantage(D, g))


class BreakKind(str, enum.Enum):
    SUPER_ADVANTAGE = "SuperAdvantage"
    DEMI_BREAK = "DemiBreak"
    STD_ADVANTAGE = "StdAdvantage"
    HSG_MISS = "HSGMiss"


@dataclass(frozen=True)
class BreakReport:
    kind: BreakKind
    generator: str
    adversary: str
    advantage: Fraction
    p_random: Prob
    p_image: Prob
    zero_on_image: bool
    is_break: bool
    s_witness: int | None
    adversary_size: int

    @property
    def size_ok(self) -> bool | None:
        """Whether |D| <= s as well, reported apart from the advantage threshold."""
        return None if self.s_witness is None else self.adversary_size <= self.s_witness

    def csv_row(self) -> list[str]:
        return [self.kind.value, self.generator, self.adversary,
                str(self.advantage.numerator), str(self.advantage.denominator),
                str(self.zero_on_image).lower(),
                "" if self.s_witness is None else str(self.s_witness)]


CSV_HEADER = ["kind", "generator", "adversary", "advantage_num", "advantage_den",
              "zero_on_image", "s_witness"]


def demi_break(D: Adversary, g: Generator) -> BreakReport:
    """Does D accept a noticeable share of random strings and no generated one?"""
    _distinguisher(D, g)
    pr, pg = p_random(D), p_on(D, g)
    zero = pg == 0
    is_break = zero and pr > 0
    return BreakReport(BreakKind.DEMI_BREAK, g.label, D.name, pr, pr, pg, zero, is_break,
                       least_s(pr) if is_break else None, D.size)


def super_report(D: Adversary, g: Generator) -> BreakReport:
    _distinguisher(D, g)
    pr, pg = p_random(D), p_on(D, g)
    adv = pr - pg
    return BreakReport(BreakKind.SUPER_ADVANTAGE, g.label, D.name, adv, pr, pg, pg == 0, adv > 0,
                       least_s(adv), D.size)


def std_report(D: Adversary, g: Generator) -> BreakReport:
    adv = std_advantage(D, g)
    pr, pg = p_random(D), p_on(D, g)
    return BreakReport(BreakKind.STD_ADVANTAGE, g.label, D.name, adv, pr, pg, pg == 0, adv > 0,
                       least_s(adv), D.size)


class HSGResult(str, enum.Enum):
    HIT = "Hit"
    MISS = "Miss"
    NOT_DENSE = "NotDense"


def hsg_check(g: Generator, D: Adversary, density_threshold: Fraction) -> HSGResult:
    """Whether the image of g intersects the set D decides, if that set is dense enough."""
    _distinguisher(D, g)
    if p_random(D) < density_threshold:
        return HSGResult.NOT_DENSE
    return HSGResult.HIT if D.accepts()[g.values].any() else HSGResult.MISS


def hsg_report(g: Generator, D: Adversary, density_threshold: Fraction) -> BreakReport:
    verdict = hsg_check(g, D, density_threshold)
    pr, pg = p_random(D), p_on(D, g)
    miss = verdict is HSGResult.MISS
    return BreakReport(BreakKind.HSG_MISS, g.label, D.name, pr, pr, pg, pg == 0, miss,
                       least_s(pr) if miss else None, D.size)


def predictor_success(A: Adversary, g: Generator, i: int) -> Prob:
    """P_x[A(g(x)[1..i]) = g(x)[i+1]]; a bottom answer never counts."""
    if not 0 <= i < g.l:
        raise IndexError(f"prefix length {i} out of range for output length {g.l}")
    if A.n_std != i:
        raise ArityError(f"{A.name} reads {A.n_std} bits, prefix has {i}")
    vals = g.values
    prefix = vals >> (g.l - i)
    target = (vals >> (g.l - i - 1)) & 1
    return frac(A.table()[prefix] == target)


@dataclass(frozen=True)
class SuperCoreTerms:
    t1: Prob
    t2: Prob
    t3: Prob
    t4: Prob
    star: bool | None = None
    diamond: bool | None = None

    @property
    def total(self) -> Fraction:
        return self.t1 + self.t2 + self.t3 + self.t4


def _predicate_pair(f: Table, b_pred: Table) -> None:
    if b_pred.n_out != 1 or b_pred.n_in != f.n_in:
        raise ArityError("predicate table must map f's inputs to one bit")


def super_core_terms(A1: Adversary, A2: Adversary, f: Table, b_pred: Table,
                     inv_p: Fraction | None = None) -> SuperCoreTerms:
    """The four super-core terms for a nondeterministic/co-nondeterministic predictor pair.

    With ``inv_p`` given, also decide the two threshold inequalities
    ``t1 + t3 >= 1/2 + inv_p`` and ``t2 + t4 >= 1/2 + inv_p``.
    """
    _predicate_pair(f, b_pred)
    for A in (A1, A2):
        if A.mode not in DECISION_MODES:
            raise ModeError(f"{A.name}: super-core predictors are decision circuits")
        if A.n_std != f.n_out:
            raise ArityError(f"{A.name} reads {A.n_std} bits, f outputs {f.n_out}")
    b = b_pred.values
    a1 = A1.table()
    a2 = A2.table()
    t1 = frac((a1[f.values] == 0) & (b == 0))
    t2 = frac((a2[f.values] == 1) & (b == 1))
    t3 = frac(a1 == 1) / 2
    t4 = frac(a2 == 0) / 2
    star = diamond = None
    if inv_p is not None:
        star = t1 + t3 >= Fraction(1, 2) + inv_p
        diamond = t2 + t4 >= Fraction(1, 2) + inv_p
    return SuperCoreTerms(t1, t2, t3, t4, star, diamond)


def table_success(A: Adversary, f: Table, b_pred: Table) -> Prob:
    """P_x[A(f(x)) = b(x)], the hard-core prediction success."""
    _predicate_pair(f, b_pred)
    if A.n_std != f.n_out:
        raise ArityError(f"{A.name} reads {A.n_std} bits, f outputs {f.n_out}")
    return frac(A.table()[f.values] == b_pred.values)
