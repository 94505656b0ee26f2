"""Built-in exhaustive invariant suite, small enough to run in seconds."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterator, TextIO

import numpy as np

from . import reduction as R
from .bits import all_strings, from_int
from .circuit import (CircuitBuilder, EvalMode, acceptor, eval_raw, format_circuit, negate,
                      parse_circuit, restrict, table_circuit, truth_table)
from .errors import NetlistError
from .generator import Generator, StretchParams, Table, concat_bit, gmc, image_mask, stretch
from .learner import RecordingOracle, hybrid_gap_scan, learn_with, verify_learning_bound
from .measure import Adversary, HSGResult, demi_break, hsg_check, p_on, p_random
from .sweeps import random_gates, run_stretch_sweep

Check = Callable[[], tuple[bool, str]]

CORRUPTED_NETLIST = """\
circuit broken in=2 wit=0 out=g2
g1 = AND i1 i2
g2 = OR g1 g3
g3 = NOT i1
"""


def _random_circuits(seed: int, count: int, n_std: int, n_wit: int, n_out: int = 1):
    rng = np.random.default_rng(seed)
    for k in range(count):
        bld = CircuitBuilder(n_std)
        base = bld.inputs() + bld.new_witnesses(n_wit)
        pool = random_gates(rng, bld, base, int(rng.integers(2, 9)))
        outs = [pool[int(rng.integers(len(base), len(pool)))] for _ in range(n_out)]
        yield bld.build(outs, f"r{k}")


def _parity() -> Generator:
    return Generator.from_function(lambda x: x + str(int(x[0]) ^ int(x[1])), 2, 3, label="par")


def _tables(n_in: int, n_out: int) -> Iterator[Table]:
    for k, vals in enumerate(itertools.product(range(1 << n_out), repeat=1 << n_in)):
        yield Table(n_in, n_out, np.array(vals, dtype=np.int64), f"t{k}")


def check_modes_agree() -> tuple[bool, str]:
    count = 0
    for c in _random_circuits(1, 60, 3, 0):
        t = truth_table(c, EvalMode.DET)
        if not (np.array_equal(t, truth_table(c, EvalMode.NONDET))
                and np.array_equal(t, truth_table(c, EvalMode.CONONDET))):
            return False, f"{c.name} disagrees"
        count += 1
    return True, f"{count} witness-free circuits"


def check_duality() -> tuple[bool, str]:
    for c in _random_circuits(2, 60, 3, 2):
        if not np.array_equal(truth_table(c, EvalMode.CONONDET),
                              1 - truth_table(negate(c), EvalMode.NONDET)):
            return False, c.name
    return True, "60 circuits with 2 witness bits"


def check_func_agreement() -> tuple[bool, str]:
    checked = 0
    for c in _random_circuits(3, 80, 2, 2, n_out=2):
        try:
            table = truth_table(c, EvalMode.FUNC)
        except Exception:  # totality violations are legitimate here
            continue
        for x in range(4):
            if table[x] == 2:
                continue
            for w in all_strings(2):
                flag, val = eval_raw(c, from_int(x, 2), w)
                if flag == "1" and int(val) != table[x]:
                    return False, c.name
        checked += 1
    return checked > 0, f"{checked} total function-computing circuits"


def check_netlist_roundtrip() -> tuple[bool, str]:
    for c in _random_circuits(4, 40, 3, 1):
        again = parse_circuit(format_circuit(c))
        if not np.array_equal(truth_table(again, EvalMode.NONDET), truth_table(c, EvalMode.NONDET)):
            return False, c.name
    return True, "40 circuits"


def check_corrupted_netlist() -> tuple[bool, str]:
    try:
        parse_circuit(CORRUPTED_NETLIST)
    except NetlistError as exc:
        return exc.line == 3, f"rejected: {exc}"
    return False, "corrupted netlist was accepted"


def check_stretch_blocks() -> tuple[bool, str]:
    for b in (Generator.from_function(lambda x: x + x, 1, 2, label="dup"), _parity()):
        for N in range(b.n, 5):
            for c in (Fraction(1, 2), Fraction(2, 3), Fraction(4, 5)):
                try:
                    p = StretchParams(N, c)
                except ValueError:
                    continue
                if p.n != b.n:
                    continue
                g = stretch(b, p)
                for x in all_strings(N):
                    blocks = [x[j * p.n:(j + 1) * p.n] for j in range(p.m)]
                    want = "".join(b(blk) for blk in blocks) + x[p.m * p.n:]
                    if g(x) != want:
                        return False, f"{g.label} at {x}"
    return True, "blockwise definition"


def check_hsg_equivalence() -> tuple[bool, str]:
    pairs = 0
    for n in (1, 2):
        l = n + 1
        for t in itertools.islice(_tables(n, l), 0, None, 1 if n == 1 else 61):
            g = Generator.from_table(t)
            for mask in range(1 << (1 << l)):
                D = Adversary(acceptor([v for v in range(1 << l) if mask >> v & 1], l, "S"), EvalMode.DET)
                rep = demi_break(D, g)
                miss = hsg_check(g, D, Fraction(1, l)) is HSGResult.MISS
                if (rep.is_break and rep.p_random >= Fraction(1, l)) != miss:
                    return False, f"{t.label} mask {mask}"
                pairs += 1
    return True, f"{pairs} generator/set pairs"


def check_stretch_soundness(reduce=R.stretch_reduction) -> tuple[bool, str]:
    summary = run_stretch_sweep(0, None, n_values=(1,), N_max=3, exhaustive_len=2,
                                random_subsets=1, random_circuits=20, reducer=reduce)
    return summary.passed, f"{summary.cases} cases, {summary.failures} failures"


def check_identities() -> tuple[bool, str]:
    checked = 0
    rng = np.random.default_rng(5)
    for n in (1, 2):
        for f in _tables(n, n) if n == 1 else (Table(n, n, rng.integers(0, 4, 4), f"f{k}") for k in range(12)):
            for b in _tables(n, 1):
                g = concat_bit(f, b)
                for D in (Adversary(c, EvalMode.NONDET) for c in _random_circuits(checked, 3, n + 1, 1)):
                    if not R.supercore_attack_from_distinguisher(D, f, b)[-1].holds:
                        return False, "supercore attack identity"
                    for i in range(g.l):
                        for w in all_strings(g.l - i - 1):
                            if not R.cup_predictors_at(D, g, i, w)[-1].holds:
                                return False, "cup predictor identity"
                for A in (Adversary(c, EvalMode.DET) for c in _random_circuits(checked + 99, 3, n, 0)):
                    if not R.distinguisher_from_hardbit_predictor(A, f, b)[-1].holds:
                        return False, "hard-bit identity"
                    cert = R.supercore_implies_hardcore_check(f, b, A)
                    if not cert.clauses[0].holds or (cert.extras["delta"] > 0 and not cert.holds):
                        return False, "hard-core check"
                    side = R.distinguisher_from_supercore_attack(A, f, b, "star")[-1]
                    if not side.holds:
                        return False, "star identity"
                checked += 1
    return True, f"{checked} (f, b) pairs"


def check_injective_attack() -> tuple[bool, str]:
    count = 0
    for n in (1, 2):
        for perm in itertools.permutations(range(1 << n)):
            f = Table(n, n, np.array(perm, dtype=np.int64), "perm")
            for b in _tables(n, 1):
                _, _, cert = R.injective_attack(f, b)
                if not cert.holds or cert.extras["t1"] + cert.extras["t2"] + cert.extras["t3"] \
                        + cert.extras["t4"] != Fraction(3, 2):
                    return False, f"n={n} perm {perm}"
                count += 1
    return True, f"{count} injective f with predicates"


def check_learner() -> tuple[bool, str]:
    for name, vals in (("id", (0, 1)), ("not", (1, 0)), ("zero", (0, 0)), ("one", (1, 1))):
        C = table_circuit(vals, 1, 1, name)
        g = gmc(2, C)
        D = Adversary(acceptor(np.flatnonzero(~image_mask(g)), 4, "D"), EvalMode.DET)
        out = verify_learning_bound(D, C, 2)
        if not out.meets_bound or not hybrid_gap_scan(D, C, 2).telescopes:
            return False, f"bound fails for {name}"
        for i, r, x in itertools.product((1, 2), all_strings(2), all_strings(1)):
            oracle = RecordingOracle(C)
            learn_with(D, C, 2, i, r, (x,), oracle)
            if [q for q, _ in oracle.log] != [x][:i - 1]:
                return False, "oracle queried outside the blocks before i"
    return True, "n=1, m=2, four targets"


def miswired_stretch_reduction(D, b, p):
    """Mutation fixture: freezes the suffix correctly but restricts the wrong hybrid."""
    _, cert = R.stretch_reduction(D, b, p)
    i = cert.trace.i_star
    pad = (i - 1) * (p.n + 1)
    suffix = cert.extras["suffix"].replace("-", "")
    wrong = R.guessing_distinguisher(D, b, p, i)
    fixed = {t: 0 for t in range(1, pad + 1)}
    fixed.update({pad + p.n + 2 + k: int(ch) for k, ch in enumerate(suffix)})
    C = Adversary(restrict(wrong.circuit, fixed, "C[miswired]"), EvalMode.NONDET)
    clauses = (
        R.Clause("P[C(U_{n+1})=1] >= 1/(m*s')", p_random(C), ">=", cert.clauses[0].rhs),
        R.Clause("P[C(b(U_n))=1] = 0", p_on(C, b), "=", Fraction(0)),
    )
    return C, R.ReductionCertificate("stretch_reduction[miswired]", D.name, (("C", C),), clauses,
                                     cert.trace, cert.extras)


CHECKS: list[tuple[str, Check]] = [
    ("circuit: witness-free modes agree", check_modes_agree),
    ("circuit: co-nondeterministic duality", check_duality),
    ("circuit: function-computing agreement", check_func_agreement),
    ("circuit: netlist round trip", check_netlist_roundtrip),
    ("circuit: corrupted netlist rejected", check_corrupted_netlist),
    ("generator: stretch blockwise", check_stretch_blocks),
    ("measure: demi-break iff hitting-set miss", check_hsg_equivalence),
    ("reduction: stretch soundness", check_stretch_soundness),
    ("reduction: exact identities", check_identities),
    ("reduction: injective attack reaches 3/2", check_injective_attack),
    ("learner: confidence bound and query log", check_learner),
]

MUTANTS = {"miswired-stretch": ("reduction: stretch soundness",
                                lambda: check_stretch_soundness(miswired_stretch_reduction))}


def run_selftest(mutant: str | None = None, seed: int = 0, out: TextIO | None = None) -> int:
    checks = list(CHECKS)
    if mutant is not None:
        target, fn = MUTANTS[mutant]
        checks = [(name, fn if name == target else check) for name, check in checks]
    failed = []
    lines = []
    for name, check in checks:
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001 - a crash is a failed property
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        if not ok:
            failed.append(name)
    if out is not None:
        out.write("\n".join(lines) + "\n")
        if failed:
            out.write("failing properties: " + "; ".join(failed) + "\n")
        else:
            out.write(f"all {len(checks)} properties hold\n")
    return 1 if failed else 0
