"""Executable adversary-to-adversary constructions with exactly checked contracts.

Each construction returns the adversaries it builds (genuine circuits) and a
:class:`ReductionCertificate`.  Certificate clauses are evaluated by the
measure module on the returned adversaries, never from the construction's
own bookkeeping; hybrid scans are recorded separately in a :class:`HybridTrace`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .bits import BitString, from_int
from .circuit import Circuit, CircuitBuilder, EvalMode, format_circuit, negate, restrict
from .errors import ArityError, ContractViolation, ModeError, PreconditionError
from .generator import (Generator, StretchParams, Table, concat_bit, io_patch, patch_member,
                        stretch)
from .measure import (Adversary, demi_break, frac, p_on, p_random, predictor_success,
                      super_advantage, super_core_terms, table_success)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Clause:
    contract: str
    lhs: Fraction
    relation: str
    rhs: Fraction

    @property
    def holds(self) -> bool:
        if self.relation == ">=":
            return self.lhs >= self.rhs
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == "=":
            return self.lhs == self.rhs
        raise ValueError(self.relation)


@dataclass(frozen=True)
class HybridTrace:
    """Gaps between consecutive hybrids; ``gaps[k]`` is hybrid ``start+k`` minus ``start+k+1``."""

    i_star: int
    gaps: tuple[Fraction, ...]
    first: Fraction
    last: Fraction
    threshold: Fraction
    start: int = 0
    suffix: BitString | None = None

    @property
    def telescopes(self) -> bool:
        return sum(self.gaps, Fraction(0)) == self.first - self.last

    @property
    def chosen_gap(self) -> Fraction:
        return self.gaps[self.i_star - self.start]


@dataclass(frozen=True)
class ReductionCertificate:
    construction: str
    input_adversary: str
    outputs: tuple[tuple[str, Adversary], ...]
    clauses: tuple[Clause, ...]
    trace: HybridTrace | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.clauses) and (self.trace is None or self.trace.telescopes)

    @property
    def lhs(self) -> Fraction:
        return self.clauses[0].lhs

    @property
    def rhs(self) -> Fraction:
        return self.clauses[0].rhs

    def failing(self) -> list[Clause]:
        return [c for c in self.clauses if not c.holds]

    def render(self) -> str:
        lines = [f"construction: {self.construction}", f"input: {self.input_adversary}"]
        for c in self.clauses:
            lines.append(f"contract: {c.contract}")
            lines.append(f"  lhs = {c.lhs.numerator}/{c.lhs.denominator} {c.relation} "
                         f"rhs = {c.rhs.numerator}/{c.rhs.denominator}  "
                         f"[{'holds' if c.holds else 'VIOLATED'}]")
        if self.trace is not None:
            t = self.trace
            gaps = " ".join(f"{g.numerator}/{g.denominator}" for g in t.gaps)
            lines.append(f"trace: i*={t.i_star} gaps=[{gaps}] threshold={t.threshold} "
                         f"suffix={t.suffix or '-'} "
                         f"telescopes={str(t.telescopes).lower()}")
        for key in sorted(self.extras):
            value = self.extras[key]
            lines.append(f"{key}: {str(value).lower() if isinstance(value, bool) else value}")
        lines.append(f"holds: {str(self.holds).lower()}")
        for label, adv in self.outputs:
            lines.append(f"adversary {label} mode={adv.mode.value}")
            lines.append(format_circuit(adv.circuit).rstrip("\n"))
        return "\n".join(lines) + "\n"


def _require(adv: Adversary, modes: Sequence[EvalMode], what: str) -> None:
    if adv.mode not in modes:
        allowed = "/".join(m.value for m in modes)
        raise ModeError(f"{adv.name}: {what} needs a {allowed} adversary, got {adv.mode.value}")


def _argmax_first(values: Sequence[Fraction]) -> int:
    best = 0
    for k, v in enumerate(values):
        if v > values[best]:
            best = k
    return best


def _nondet_like(c: Circuit, base: EvalMode) -> Adversary:
    if base is EvalMode.DET and c.n_wit == 0:
        return Adversary(c, EvalMode.DET)
    return Adversary(c, EvalMode.NONDET)


def _conondet_like(c: Circuit, base: EvalMode) -> Adversary:
    if base is EvalMode.DET and c.n_wit == 0:
        return Adversary(c, EvalMode.DET)
    return Adversary(c, EvalMode.CONONDET)


def _fix(positions: range, bits: BitString) -> dict[int, int]:
    return {p: int(ch) for p, ch in zip(positions, bits, strict=True)}


# ---------------------------------------------------------------- stretching

def guessing_distinguisher(D: Adversary, b: Generator, p: StretchParams, i: int) -> Adversary:
    """D' at index i: guess seeds for the first i blocks and run D on b(x_1)..b(x_i) y_{i+1}..

    The first ``i*(n+1)`` input bits are read by no gate.
    """
    _require(D, (EvalMode.DET, EvalMode.NONDET), "seed guessing")
    n, bc = p.n, b.to_circuit()
    bld = CircuitBuilder(p.out_len)
    ys = bld.inputs()
    guesses = bld.new_witnesses(i * n)
    feed = []
    for j in range(i):
        feed += bld.embed(bc, guesses[j * n:(j + 1) * n], [])
    feed += ys[i * (n + 1):]
    (out,) = bld.embed(D.circuit, feed)
    return Adversary(bld.build([out], f"{D.name}'[{i}]"), EvalMode.NONDET)


def stretch_reduction(D: Adversary, b: Generator, p: StretchParams) -> tuple[Adversary, ReductionCertificate]:
    """From a demi-break of ``stretch(b, p)`` build a demi-break of ``b``."""
    g = stretch(b, p)
    report = demi_break(D, g)
    if not report.is_break:
        raise PreconditionError(f"{D.name} does not demi-break {g.label}: "
                                f"P[D(y)=1]={report.p_random}, P[D(g(x))=1]={report.p_image}")
    _require(D, (EvalMode.DET, EvalMode.NONDET), "stretch reduction")
    m, n = p.m, p.n
    primes = [guessing_distinguisher(D, b, p, i) for i in range(m + 1)]
    hyb = [p_random(Dp) for Dp in primes]
    gaps = tuple(hyb[i - 1] - hyb[i] for i in range(1, m + 1))
    threshold = report.p_random / m
    i_star = 1 + _argmax_first(gaps)
    if hyb[m] != 0:
        raise ContractViolation(f"last hybrid accepts with probability {hyb[m]}, expected 0")
    if gaps[i_star - 1] < threshold:
        raise ContractViolation(f"largest hybrid gap {gaps[i_star - 1]} below {threshold}")

    pad = (i_star - 1) * (n + 1)
    suffix_len = p.out_len - i_star * (n + 1)
    # S1 = suffixes some guessed prefix b(x_1)..b(x_i*) completes to an accepted string.
    in_s1 = primes[i_star].accepts()[:1 << suffix_len]
    prev = primes[i_star - 1].accepts()
    window = prev[:1 << (suffix_len + n + 1)].reshape(1 << (n + 1), 1 << suffix_len)
    hits = window.sum(axis=0)
    best = None
    for s in np.flatnonzero(~in_s1):
        if best is None or hits[s] > hits[best]:
            best = int(s)
    if best is None:
        raise ContractViolation("S2 is empty although the hybrid gap is positive")
    suffix = from_int(best, suffix_len)
    if Fraction(int(hits[best]), 1 << (n + 1)) < threshold:
        raise ContractViolation(f"no suffix in S2 reaches conditional acceptance {threshold}")

    fixed = {t: 0 for t in range(1, pad + 1)}
    fixed.update(_fix(range(pad + n + 2, p.out_len + 1), suffix))
    c_circ = restrict(primes[i_star - 1].circuit, fixed, f"C[{D.name},i={i_star}]")
    C = _nondet_like(c_circ, D.mode)

    rows = prev.reshape(1 << pad, -1)
    padding_ignored = bool((rows == rows[0]).all())
    trace = HybridTrace(i_star, gaps, hyb[0], hyb[m], threshold, start=1, suffix=suffix)
    clauses = (
        Clause("P[C(U_{n+1})=1] >= 1/(m*s'), s' = 1/P[D(U_{N+m})=1]", p_random(C), ">=", threshold),
        Clause("P[C(b(U_n))=1] = 0", p_on(C, b), "=", Fraction(0)),
        Clause("P[C(U_{n+1})=1] >= P_{i-1} - P_i", p_random(C), ">=", trace.chosen_gap),
    )
    extras = {
        "m": m, "n": n, "rem": p.rem, "i_star": i_star, "suffix": suffix or "-",
        "s1_size": int(in_s1.sum()), "padding_ignored": padding_ignored,
        "hybrids": " ".join(str(h) for h in hyb), "distinguisher_size": D.size,
    }
    return C, ReductionCertificate("stretch_reduction", D.name, (("C", C),), clauses, trace, extras)


# ---------------------------------------------------------------- i.o. patching

def io_reduction(D: Adversary, family: Sequence[Generator], n: int,
                 s: int | None = None) -> tuple[Adversary, ReductionCertificate]:
    """From a distinguisher for the patched generator at length n, one for the member at n_i."""
    G = io_patch(family, n)
    g = patch_member(family, n)
    adv = super_advantage(D, G)
    bound = Fraction(1, s) if s is not None else adv
    if adv < bound or adv <= 0:
        raise PreconditionError(f"{D.name} has advantage {adv} on {G.label}, needs >= {bound} > 0")
    t = n - g.n
    table = D.accepts().reshape(1 << g.l, 1 << t).astype(np.int64)
    rand_counts = table.sum(axis=0) * (1 << g.n)
    gen_counts = table[g.values].sum(axis=0) * (1 << g.l)
    gaps = [Fraction(int(r - q), 1 << (g.l + g.n)) for r, q in zip(rand_counts, gen_counts)]
    w_idx = _argmax_first(gaps)
    w = from_int(w_idx, t)
    Dp = Adversary(restrict(D.circuit, _fix(range(g.l + 1, g.l + t + 1), w), f"{D.name}|w={w or '-'}"),
                   D.mode)
    got = super_advantage(Dp, g)
    clauses = (
        Clause("P[D'(U_{m_i})=1] - P[D'(g(U_{n_i}))=1] >= 1/s", got, ">=", bound),
        Clause("gap at chosen w >= mean gap over w = advantage of D on G", got, ">=", adv),
    )
    return Dp, ReductionCertificate("io_reduction", D.name, (("D'", Dp),), clauses,
                                    extras={"w": w or "-", "n_i": g.n, "member": g.label})


# ---------------------------------------------------------------- predictability

def cap_predictor_to_distinguisher(A: Adversary, g: Generator, i: int) -> tuple[Adversary, ReductionCertificate]:
    """A function-computing next-bit predictor becomes a nondeterministic distinguisher.

    D guesses a branch of A on Y[1..i] and accepts when that branch answers a bit
    different from Y[i+1]; on inputs where A is bottom some branch disagrees, so D
    accepts there.
    """
    _require(A, (EvalMode.FUNC,), "the cap-predictor transform")
    success = predictor_success(A, g, i)
    delta = success - HALF
    if delta <= 0:
        raise PreconditionError(f"{A.name} predicts bit {i + 1} with success {success} <= 1/2")
    bld = CircuitBuilder(g.l)
    ys = bld.inputs()
    flag, value = bld.embed(A.circuit, ys[:i])
    out = bld.and_(flag, bld.xor(value, ys[i]))
    D = Adversary(bld.build([out], f"D[{A.name},i={i}]"), EvalMode.NONDET)
    f_bot = frac(A.table() == 2)
    pr, pg = p_random(D), p_on(D, g)
    clauses = (
        Clause("P[D(U_l)=1] = f + (1-f)/2, f = P[A(U_i)=bot]", pr, "=", f_bot + (1 - f_bot) / 2),
        Clause("P[D(U_l)=1] >= 1/2", pr, ">=", HALF),
        Clause("P[D(g(x))=1] = 1 - P[A(g(x)[1..i]) = g(x)[i+1]]", pg, "=", 1 - success),
        Clause("P[D(g(x))=1] <= 1/2 - delta", pg, "<=", HALF - delta),
        Clause("P[D(U_l)=1] - P[D(g(x))=1] >= success(A) - 1/2", super_advantage(D, g), ">=", delta),
    )
    return D, ReductionCertificate("cap_predictor_to_distinguisher", A.name, (("D", D),), clauses,
                                   extras={"i": i, "bottom_fraction": f_bot})


def hybrid_probabilities(D: Adversary, g: Generator) -> list[Fraction]:
    """P[D(H_i)=1] for H_i = g(U_n)[1..i] . U_{l-i}, i = 0..l."""
    acc = D.accepts().astype(np.int64)
    out = []
    for i in range(g.l + 1):
        counts = acc.reshape(1 << i, 1 << (g.l - i)).sum(axis=1)
        total = int(counts[g.values >> (g.l - i)].sum())
        out.append(Fraction(total, (1 << g.n) * (1 << (g.l - i))))
    return out


def _bit_gap(D: Adversary, g: Generator, i: int) -> list[Fraction]:
    """For each w: P[D(Z_i b w)=1] - P[D(Z_{i+1} w)=1], with b a uniform bit."""
    t = g.l - i - 1
    acc = D.accepts().astype(np.int64).reshape(1 << i, 2, 1 << t)
    z = g.values >> (g.l - i)
    nxt = (g.values >> t) & 1
    rand_part = acc[z].sum(axis=(0, 1))
    gen_part = acc[z, nxt].sum(axis=0)
    return [Fraction(int(r - 2 * q), 2 << g.n) for r, q in zip(rand_part, gen_part)]


def cup_predictors_at(D: Adversary, g: Generator, i: int, w: BitString) -> tuple[Adversary, Adversary, ReductionCertificate]:
    """A1(Y) = D(Y 0 w) and A2(Y) = not D(Y 1 w) predicting bit i+1; identity holds for any i, w."""
    _require(D, (EvalMode.DET, EvalMode.NONDET), "the cup-predictor transform")
    if D.n_std != g.l:
        raise ArityError(f"{D.name} reads {D.n_std} bits, generator outputs {g.l}")
    if not 0 <= i < g.l or len(w) != g.l - i - 1:
        raise ArityError(f"need 0 <= i < {g.l} and |w| = l - i - 1")
    rest = _fix(range(i + 2, g.l + 1), w)
    a1 = restrict(D.circuit, {i + 1: 0, **rest}, f"A1[{D.name},i={i}]")
    a2 = negate(restrict(D.circuit, {i + 1: 1, **rest}), f"A2[{D.name},i={i}]")
    A1, A2 = _nondet_like(a1, D.mode), _conondet_like(a2, D.mode)
    s1, s2 = predictor_success(A1, g, i), predictor_success(A2, g, i)
    gap = _bit_gap(D, g, i)[int(w, 2) if w else 0]
    clauses = (
        Clause("success(A1) + success(A2) = 1 + 2*(P[D(Z_i b w)=1] - P[D(Z_{i+1} w)=1])",
               s1 + s2, "=", 1 + 2 * gap),
    )
    cert = ReductionCertificate("cup_predictors_at", D.name, (("A1", A1), ("A2", A2)), clauses,
                                extras={"i": i, "w": w or "-", "success_A1": s1, "success_A2": s2})
    return A1, A2, cert


def distinguisher_to_cup_predictors(D: Adversary, g: Generator) -> tuple[Adversary, Adversary, int, BitString, ReductionCertificate]:
    """From positive nondeterministic advantage, a nondeterministic or co-nondeterministic next-bit predictor."""
    _require(D, (EvalMode.DET, EvalMode.NONDET), "the cup-predictor transform")
    adv = super_advantage(D, g)
    if adv <= 0:
        raise PreconditionError(f"{D.name} has advantage {adv} <= 0 on {g.label}")
    hyb = hybrid_probabilities(D, g)
    gaps = tuple(hyb[k] - hyb[k + 1] for k in range(g.l))
    i = _argmax_first(gaps)
    wgaps = _bit_gap(D, g, i)
    w = from_int(_argmax_first(wgaps), g.l - i - 1)
    trace = HybridTrace(i, gaps, hyb[0], hyb[-1], adv / g.l, start=0, suffix=w)
    A1, A2, inner = cup_predictors_at(D, g, i, w)
    total = inner.extras["success_A1"] + inner.extras["success_A2"]
    clauses = inner.clauses + (
        Clause("success(A1) + success(A2) >= 1 + 2*adv(D,g)/l", total, ">=", 1 + 2 * adv / g.l),
        Clause("success(A1) + success(A2) >= 1 + 2*(P[D(H_i)=1] - P[D(H_{i+1})=1])",
               total, ">=", 1 + 2 * trace.chosen_gap),
    )
    cert = ReductionCertificate("distinguisher_to_cup_predictors", D.name, inner.outputs, clauses,
                                trace, dict(inner.extras))
    return A1, A2, i, w, cert


def cap_to_both(A: Adversary, g: Generator, i: int) -> tuple[Adversary, Adversary, ReductionCertificate]:
    """Split a function-computing predictor into a nondeterministic and a co-nondeterministic one.

    A1 accepts when some branch answers 1, A0 rejects when some branch answers 0;
    they agree with A wherever A is a bit, and A_j answers j where A is bottom.
    """
    _require(A, (EvalMode.FUNC,), "the cap-to-both transform")
    if A.n_std != i:
        raise ArityError(f"{A.name} reads {A.n_std} bits, prefix has {i}")
    b1 = CircuitBuilder(i)
    flag, value = b1.embed(A.circuit, b1.inputs())
    A1 = Adversary(b1.build([b1.and_(flag, value)], f"A1[{A.name}]"), EvalMode.NONDET)
    b0 = CircuitBuilder(i)
    flag, value = b0.embed(A.circuit, b0.inputs())
    A0 = Adversary(b0.build([b0.or_(b0.not_(flag), value)], f"A0[{A.name}]"), EvalMode.CONONDET)
    s, s1, s0 = (predictor_success(X, g, i) for X in (A, A1, A0))
    bot = A.table()[g.values >> (g.l - i)] == 2
    nxt = (g.values >> (g.l - i - 1)) & 1
    clauses = (
        Clause("success(A1) >= success(A)", s1, ">=", s),
        Clause("success(A0) >= success(A)", s0, ">=", s),
        Clause("success(A1) = success(A) + P[A(Z_i)=bot and z_{i+1}=1]", s1, "=", s + frac(bot & (nxt == 1))),
        Clause("success(A0) = success(A) + P[A(Z_i)=bot and z_{i+1}=0]", s0, "=", s + frac(bot & (nxt == 0))),
    )
    return A1, A0, ReductionCertificate("cap_to_both", A.name, (("A1", A1), ("A0", A0)), clauses)


# ---------------------------------------------------------------- super-cores

def supercore_attack_from_distinguisher(D: Adversary, f: Table, b_pred: Table) -> tuple[Adversary, Adversary, ReductionCertificate]:
    """A1(Y) = D(Y0) and A2(Y) = not D(Y1) against the super-core inequalities."""
    g = concat_bit(f, b_pred)
    _require(D, (EvalMode.DET, EvalMode.NONDET), "the super-core attack")
    if D.n_std != g.l:
        raise ArityError(f"{D.name} reads {D.n_std} bits, f(x)b(x) has {g.l}")
    n = f.n_in
    A1 = _nondet_like(restrict(D.circuit, {n + 1: 0}, f"A1[{D.name}]"), D.mode)
    A2 = _conondet_like(negate(restrict(D.circuit, {n + 1: 1}), f"A2[{D.name}]"), D.mode)
    terms = super_core_terms(A1, A2, f, b_pred)
    pr, pg = p_random(D), p_on(D, g)
    clauses = (
        Clause("t1(A1) + t2(A2) = 1 - P[D(g(x))=1]", terms.t1 + terms.t2, "=", 1 - pg),
        Clause("t3(A1) + t4(A2) = P[D(U_{n+1})=1]", terms.t3 + terms.t4, "=", pr),
        Clause("t1 + t2 + t3 + t4 = 1 + adv(D, g)", terms.total, "=", 1 + super_advantage(D, g)),
    )
    extras = {"t1": terms.t1, "t2": terms.t2, "t3": terms.t3, "t4": terms.t4}
    return A1, A2, ReductionCertificate("supercore_attack_from_distinguisher", D.name,
                                        (("A1", A1), ("A2", A2)), clauses, extras=extras)


def distinguisher_from_supercore_attack(A: Adversary, f: Table, b_pred: Table,
                                        side: str = "star") -> tuple[Adversary, ReductionCertificate]:
    """Turn a predictor meeting one super-core inequality into a distinguisher for f(x)b(x).

    ``side="star"``: A nondeterministic, D(Y) = [Y[n+1] = 0 and A(Y[1..n]) = 1].
    ``side="diamond"``: A co-nondeterministic, D(Y) = [Y[n+1] = 1 and A(Y[1..n]) = 0].
    """
    g = concat_bit(f, b_pred)
    n = f.n_in
    if A.n_std != n:
        raise ArityError(f"{A.name} reads {A.n_std} bits, f outputs {n}")
    bld = CircuitBuilder(n + 1)
    ys = bld.inputs()
    (a,) = bld.embed(A.circuit, ys[:n])
    if side == "star":
        _require(A, (EvalMode.DET, EvalMode.NONDET), "the star-side distinguisher")
        out = bld.and_(bld.not_(ys[n]), a)
    elif side == "diamond":
        _require(A, (EvalMode.DET, EvalMode.CONONDET), "the diamond-side distinguisher")
        out = bld.and_(ys[n], bld.not_(a))
    else:
        raise ValueError(f"side must be 'star' or 'diamond', got {side!r}")
    D = _nondet_like(bld.build([out], f"D[{A.name},{side}]"), A.mode)
    terms = super_core_terms(A, A, f, b_pred)
    b = b_pred.values
    if side == "star":
        rhs = terms.t1 + terms.t3 - frac(b == 0)
        text = "P[D(U_{n+1})=1] - P[D(g(x))=1] = t1(A) + t3(A) - P[b(x)=0]"
    else:
        rhs = terms.t2 + terms.t4 - frac(b == 1)
        text = "P[D(U_{n+1})=1] - P[D(g(x))=1] = t2(A) + t4(A) - P[b(x)=1]"
    clauses = (Clause(text, super_advantage(D, g), "=", rhs),)
    return D, ReductionCertificate("distinguisher_from_supercore_attack", A.name, (("D", D),), clauses,
                                   extras={"side": side})


def distinguisher_from_hardbit_predictor(A: Adversary, f: Table, b_pred: Table) -> tuple[Adversary, ReductionCertificate]:
    """D(Y) = 1 iff A(Y[1..n]) = Y[n+1]."""
    _require(A, (EvalMode.DET,), "the hard-core distinguisher")
    g = concat_bit(f, b_pred)
    n = f.n_in
    if A.n_std != n:
        raise ArityError(f"{A.name} reads {A.n_std} bits, f outputs {n}")
    bld = CircuitBuilder(n + 1)
    ys = bld.inputs()
    (a,) = bld.embed(A.circuit, ys[:n])
    D = Adversary(bld.build([bld.not_(bld.xor(a, ys[n]))], f"D[{A.name},eq]"), EvalMode.DET)
    success = table_success(A, f, b_pred)
    clauses = (
        Clause("P[D(g(x))=1] - P[D(U_{n+1})=1] = success(A) - 1/2",
               p_on(D, g) - p_random(D), "=", success - HALF),
    )
    return D, ReductionCertificate("distinguisher_from_hardbit_predictor", A.name, (("D", D),), clauses,
                                   extras={"success": success})


def preimage_guessers(f: Table, b_pred: Table) -> tuple[Adversary, Adversary]:
    """A1 accepts y when some x' with f(x') = y has b(x') = 1; A0 rejects when some has b(x') = 0."""
    n, k = f.n_in, f.n_out
    circuits = []
    for j in (1, 0):
        bld = CircuitBuilder(k)
        ys = bld.inputs()
        xs = bld.new_witnesses(n)
        fx = bld.table(f.values, k, xs)
        (bx,) = bld.table(b_pred.values, 1, xs)
        hit = bld.equal(fx, ys)
        if j == 1:
            out = bld.and_(hit, bx)
        else:
            out = bld.not_(bld.and_(hit, bld.not_(bx)))
        circuits.append(bld.build([out], f"A{j}[preimage:{f.label or 'f'}]"))
    return Adversary(circuits[0], EvalMode.NONDET), Adversary(circuits[1], EvalMode.CONONDET)


def injective_attack(f: Table, b_pred: Table, inv_p: Fraction | None = None) -> tuple[Adversary, Adversary, ReductionCertificate]:
    """Preimage-guessing predictors; their super-core sum is bounded below by the unique-preimage share."""
    n = f.n_in
    c = f.n_out - n
    if c < 0:
        raise ArityError(f"f must not shrink its input: maps {n} to {f.n_out} bits")
    if b_pred.n_in != n or b_pred.n_out != 1:
        raise ArityError("predicate table must map f's inputs to one bit")
    A1, A0 = preimage_guessers(f, b_pred)
    terms = super_core_terms(A1, A0, f, b_pred)
    _, inverse, counts = np.unique(f.values, return_inverse=True, return_counts=True)
    t1_share = frac(counts[inverse] == 1)
    factor = Fraction((1 << (1 + c)) + 1, 1 << (1 + c))
    threshold = Fraction(1 << (1 + c), (1 << (1 + c)) + 1)
    clauses = (
        Clause("t1(A1) + t2(A0) + t3(A1) + t4(A0) >= |T1|/2^n + (1/2)|T1|/2^(n+c)",
               terms.total, ">=", factor * t1_share),
    )
    margin = inv_p if inv_p is not None else Fraction(0)
    extras = {
        "t1": terms.t1, "t2": terms.t2, "t3": terms.t3, "t4": terms.t4,
        "T1_share": t1_share, "threshold": threshold,
        "exceeds_threshold": t1_share >= threshold + margin if inv_p is not None else t1_share > threshold,
        "star_or_diamond": max(terms.t1 + terms.t3, terms.t2 + terms.t4) >= HALF + margin / 2,
    }
    return A1, A0, ReductionCertificate("injective_attack", f.label or "f", (("A1", A1), ("A0", A0)),
                                        clauses, extras=extras)


def supercore_implies_hardcore_check(f: Table, b_pred: Table, A: Adversary) -> ReductionCertificate:
    """A deterministic hard-core predictor meets one of the two super-core inequalities."""
    _require(A, (EvalMode.DET,), "the hard-core check")
    terms = super_core_terms(A, A, f, b_pred)
    success = table_success(A, f, b_pred)
    delta = success - HALF
    clauses = (
        Clause("t1 + t2 + t3 + t4 = success(A) + 1/2", terms.total, "=", success + HALF),
        Clause("max(t1 + t3, t2 + t4) >= 1/2 + delta/2",
               max(terms.t1 + terms.t3, terms.t2 + terms.t4), ">=", HALF + delta / 2),
    )
    return ReductionCertificate("supercore_implies_hardcore_check", A.name, (("A", A),), clauses,
                                extras={"delta": delta})
