import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from demibits.bits import all_strings
from demibits.circuit import EvalMode, constant, evaluate, parse_circuit
from demibits.errors import ArityError, ModeError, PreconditionError
from demibits.generator import Generator, StretchParams, Table, concat_bit, io_patch, stretch
from demibits.measure import (Adversary, demi_break, p_on, p_random, predictor_success, super_advantage,
                              super_core_terms)
from demibits import reduction as R

from helpers import (circuits, complement_acceptor, det_acceptor, det_fn, dup_gen, parity_gen,
                     table_of, xor_bits)

HALF = Fraction(1, 2)


def func_adversary(text: str) -> Adversary:
    return Adversary(parse_circuit(text), EvalMode.FUNC)


FXOR = "circuit fx in=2 wit=0 out=g1,g2\ng1 = CONST1\ng2 = XOR i1 i2\n"
ALWAYS_BOT = "circuit bot in={k} wit=1 out=g1,w1\ng1 = CONST1\n"


# ---------------------------------------------------------------- stretch reduction

def _oracle_s1(D: Adversary, b: Generator, p: StretchParams, i: int) -> set[str]:
    """Suffixes completed to an accepted string by some guessed prefix b(x_1)..b(x_i)."""
    tail = p.out_len - i * (p.n + 1)
    out = set()
    for z in all_strings(tail):
        for seeds in itertools.product(all_strings(p.n), repeat=i):
            if D("".join(b(s) for s in seeds) + z) == 1:
                out.add(z)
                break
    return out


def test_stretch_reduction_doubling_example():
    b, p = dup_gen(), StretchParams(2, HALF)
    g = stretch(b, p)
    D = complement_acceptor(g)
    assert p_random(D) == Fraction(12, 16)
    C, cert = R.stretch_reduction(D, b, p)
    assert cert.holds
    # brute-force evaluation of the returned circuit on every 2-bit string
    accepted = [y for y in all_strings(2) if evaluate(C.circuit, C.mode, y) == 1]
    assert accepted and all(y != b(x) for y in accepted for x in "01")
    i = cert.trace.i_star
    suffix = cert.extras["suffix"].replace("-", "")
    assert suffix not in _oracle_s1(D, b, p, i)
    # C is D'_{i-1} with zero padding and the suffix frozen
    pad = "0" * ((i - 1) * (p.n + 1))
    for y in all_strings(2):
        guessed = any(D("".join(b(s) for s in seeds) + y + suffix) == 1
                      for seeds in itertools.product("01", repeat=i - 1))
        assert (evaluate(C.circuit, C.mode, y) == 1) == guessed
    assert cert.extras["padding_ignored"]
    assert len(pad) == (i - 1) * 2


def test_single_block_returns_the_distinguisher():
    b = dup_gen()
    p = StretchParams(1, HALF)
    assert p.m == 1
    D = complement_acceptor(b)
    C, cert = R.stretch_reduction(D, b, p)
    assert np.array_equal(C.accepts(), D.accepts())
    assert demi_break(C, b).advantage == demi_break(D, b).advantage
    assert cert.extras["suffix"] == "-"


def test_reduction_requires_a_demi_break():
    b, p = dup_gen(), StretchParams(2, HALF)
    g = stretch(b, p)
    with pytest.raises(PreconditionError):
        R.stretch_reduction(det_acceptor([g("01"), "0110"], 4), b, p)


def test_reduction_with_remainder_bits():
    b, p = dup_gen(), StretchParams(3, HALF)
    assert (p.m, p.rem) == (2, 1)
    g = stretch(b, p)
    for members in (["01000", "01001"], ["11100"], [y for y in all_strings(5) if y[2:4] == "10"]):
        D = det_acceptor(members, 5)
        assert demi_break(D, g).is_break
        C, cert = R.stretch_reduction(D, b, p)
        assert cert.holds
        assert p_on(C, b) == 0 and p_random(C) > 0


def test_guessing_distinguisher_endpoints():
    b, p = parity_gen(), StretchParams(4, HALF)
    g = stretch(b, p)
    D = complement_acceptor(g)
    assert np.array_equal(R.guessing_distinguisher(D, b, p, 0).accepts(), D.accepts())
    assert p_random(R.guessing_distinguisher(D, b, p, p.m)) == p_on(D, g) == 0


def test_certificate_render():
    b, p = dup_gen(), StretchParams(2, HALF)
    _, cert = R.stretch_reduction(complement_acceptor(stretch(b, p)), b, p)
    text = cert.render()
    assert "holds: true" in text and "telescopes=true" in text
    assert "adversary C mode=" in text


# ---------------------------------------------------------------- i.o. patching

def _parity_family():
    return [Generator.from_function(lambda x: x + xor_bits(x), 2, 3, label="p2")]


def test_io_exact_length_keeps_the_distinguisher():
    fam = _parity_family()
    D = complement_acceptor(fam[0])
    Dp, cert = R.io_reduction(D, fam, 2)
    assert cert.extras["w"] == "-"
    assert np.array_equal(Dp.accepts(), D.accepts())


def test_io_finds_planted_suffix():
    fam = _parity_family()
    G = io_patch(fam, 4)
    img = {fam[0](x) for x in all_strings(2)}
    D = det_acceptor([y for y in all_strings(5) if y[3:] == "10" and y[:3] not in img], 5)
    assert super_advantage(D, G) > 0
    Dp, cert = R.io_reduction(D, fam, 4, s=16)
    assert cert.extras["w"] == "10"
    assert cert.holds
    assert super_advantage(Dp, fam[0]) == HALF


def test_io_requires_advantage():
    fam = _parity_family()
    with pytest.raises(PreconditionError):
        R.io_reduction(Adversary(constant(4, 0), EvalMode.DET), fam, 3)
    with pytest.raises(PreconditionError):
        R.io_reduction(Adversary(constant(4, 0), EvalMode.DET), fam, 1)


# ---------------------------------------------------------------- predictors

def test_cap_predictor_parity_example():
    A = func_adversary(FXOR)
    D, cert = R.cap_predictor_to_distinguisher(A, parity_gen(), 2)
    assert cert.holds
    assert p_on(D, parity_gen()) == 0
    assert super_advantage(D, parity_gen()) == HALF


def test_cap_predictor_preconditions():
    g = parity_gen()
    with pytest.raises(PreconditionError):
        R.cap_predictor_to_distinguisher(func_adversary(ALWAYS_BOT.format(k=2)), g, 2)
    with pytest.raises(ModeError):
        R.cap_predictor_to_distinguisher(det_fn(lambda x: xor_bits(x) == "1", 2, "x"), g, 2)


@settings(max_examples=60, deadline=None)
@given(circuits(n_std=st.just(3), n_wit=st.integers(0, 2)), st.lists(st.integers(0, 7), min_size=4, max_size=4))
def test_cup_identity_holds_everywhere(c, vals):
    g = Generator(2, 3, table=vals)
    D = Adversary(c, EvalMode.NONDET)
    for i in range(3):
        for w in all_strings(2 - i):
            *_, cert = R.cup_predictors_at(D, g, i, w)
            assert cert.holds


def test_cup_predictors_on_parity_breaker():
    g = parity_gen()
    D = complement_acceptor(g)
    A1, A2, i, w, cert = R.distinguisher_to_cup_predictors(D, g)
    assert cert.holds and cert.trace.telescopes
    gap = cert.trace.chosen_gap
    assert max(predictor_success(A1, g, i), predictor_success(A2, g, i)) >= HALF + gap / 2


def test_cup_predictors_zero_gap_when_bit_ignored():
    g = parity_gen()
    D = Adversary(det_fn(lambda y: y[0] == "1" and y[2] == "0", 3, "skip").circuit, EvalMode.NONDET)
    A1, A2, cert = R.cup_predictors_at(D, g, 1, "0")
    assert predictor_success(A1, g, 1) + predictor_success(A2, g, 1) == 1


def test_cup_predictors_need_advantage():
    with pytest.raises(PreconditionError):
        R.distinguisher_to_cup_predictors(Adversary(constant(3, 0), EvalMode.NONDET), parity_gen())


def test_cap_to_both_without_bottom():
    g = parity_gen()
    A = func_adversary(FXOR)
    A1, A0, cert = R.cap_to_both(A, g, 2)
    assert cert.holds
    assert predictor_success(A1, g, 2) == predictor_success(A0, g, 2) == predictor_success(A, g, 2)


def test_cap_to_both_always_bottom():
    g = parity_gen()
    A1, A0, cert = R.cap_to_both(func_adversary(ALWAYS_BOT.format(k=2)), g, 2)
    # every branch pair answers both bits, so A1 finds a 1 and A0 finds a 0
    assert (A1.table() == 1).all() and (A0.table() == 0).all()
    assert cert.holds


def test_cap_to_both_mixed_bottom():
    g = parity_gen()
    mixed = func_adversary("circuit m in=2 wit=1 out=g2,g3\ng1 = AND i1 w1\ng2 = CONST1\n"
                           "g3 = XOR g1 i2\n")
    assert (mixed.table() == 2).any() and (mixed.table() != 2).any()
    _, _, cert = R.cap_to_both(mixed, g, 2)
    assert cert.holds


# ---------------------------------------------------------------- super-cores

def _id_parity():
    return table_of(lambda x: x, 2, 2, "id2"), table_of(xor_bits, 2, 1, "par")


@pytest.mark.parametrize("value, t12, t34", [(0, 1, 0), (1, 0, 1)])
def test_supercore_attack_constant_distinguishers(value, t12, t34):
    f, b = _id_parity()
    _, _, cert = R.supercore_attack_from_distinguisher(Adversary(constant(3, value), EvalMode.NONDET), f, b)
    assert cert.holds
    e = cert.extras
    assert e["t1"] + e["t2"] == t12
    assert e["t3"] + e["t4"] == t34


def test_supercore_attack_on_parity_breaker():
    f, b = _id_parity()
    g = concat_bit(f, b)
    _, _, cert = R.supercore_attack_from_distinguisher(complement_acceptor(g), f, b)
    assert cert.holds
    assert sum(cert.extras[k] for k in ("t1", "t2", "t3", "t4")) == Fraction(3, 2)


def test_supercore_side_distinguishers():
    f = table_of(lambda x: x[0] + x[0], 2, 2, "dup1")
    b = table_of(lambda x: x[1], 2, 1, "last")
    A = det_fn(lambda y: y[0] == "1", 2, "a")
    D, cert = R.distinguisher_from_supercore_attack(A, f, b, "star")
    terms = super_core_terms(A, A, f, b)
    assert terms.t1 + terms.t3 == HALF
    assert cert.holds and super_advantage(D, concat_bit(f, b)) == 0
    one = Table.from_function(lambda x: "1", 2, 1, "one")
    D1, cert1 = R.distinguisher_from_supercore_attack(Adversary(constant(2, 1), EvalMode.NONDET), f, one)
    assert cert1.holds and super_advantage(D1, concat_bit(f, one)) == HALF


def test_supercore_diamond_side_with_preimage_guesser():
    f = table_of(lambda x: {"00": "10", "01": "00", "10": "11", "11": "01"}[x], 2, 2, "swap")
    b = table_of(lambda x: x[0], 2, 1, "first")
    A1, A0 = R.preimage_guessers(f, b)
    _, star = R.distinguisher_from_supercore_attack(A1, f, b, "star")
    _, diamond = R.distinguisher_from_supercore_attack(A0, f, b, "diamond")
    assert star.holds and diamond.holds
    with pytest.raises(ModeError):
        R.distinguisher_from_supercore_attack(A1, f, b, "diamond")


@pytest.mark.parametrize("fn, label, expected", [
    (lambda y: "0", "zero", None),
    (xor_bits, "par", HALF),
])
def test_hardbit_distinguisher(fn, label, expected):
    f, par = _id_parity()
    A = det_fn(lambda y: fn(y) == "1", 2, label)
    D, cert = R.distinguisher_from_hardbit_predictor(A, f, par)
    assert cert.holds
    adv = -super_advantage(D, concat_bit(f, par))
    assert adv == (0 if expected is None else expected)


def test_hardbit_biased_predicate():
    f = table_of(lambda x: x, 2, 2, "id2")
    b = table_of(lambda x: str(int(x == "11")), 2, 1, "and")
    A = Adversary(constant(2, 0), EvalMode.DET)
    _, cert = R.distinguisher_from_hardbit_predictor(A, f, b)
    assert cert.extras["success"] - HALF == Fraction(1, 4)
    assert cert.holds


def test_injective_attack_on_identity():
    f, b = _id_parity()
    _, _, cert = R.injective_attack(f, b)
    assert cert.holds
    e = cert.extras
    assert e["t1"] + e["t2"] + e["t3"] + e["t4"] == Fraction(3, 2)
    assert e["T1_share"] == 1 and e["threshold"] == Fraction(2, 3)
    assert e["exceeds_threshold"] and e["star_or_diamond"]


def test_injective_attack_constant_function():
    f = table_of(lambda x: "00", 2, 2, "c")
    _, _, cert = R.injective_attack(f, table_of(xor_bits, 2, 1))
    assert cert.extras["T1_share"] == 0 and cert.clauses[0].rhs == 0


def test_injective_attack_swapped_points():
    f = table_of(lambda x: {"01": "10", "10": "01"}.get(x, x), 2, 2, "swap")
    for b in (table_of(xor_bits, 2, 1), table_of(lambda x: x[0], 2, 1)):
        _, _, cert = R.injective_attack(f, b)
        e = cert.extras
        assert e["t1"] + e["t2"] + e["t3"] + e["t4"] == Fraction(3, 2)


def test_injective_attack_shrinking_f():
    with pytest.raises(ArityError):
        R.injective_attack(table_of(lambda x: x[0], 2, 1), table_of(xor_bits, 2, 1))


def test_preimage_guessers_brute_force():
    f = table_of(lambda x: x[:1] + "1", 2, 2, "half")
    b = table_of(xor_bits, 2, 1)
    A1, A0 = R.preimage_guessers(f, b)
    for y in all_strings(2):
        pre = [x for x in all_strings(2) if f(x) == y]
        assert A1(y) == int(any(b(x) == "1" for x in pre))
        assert A0(y) == int(not any(b(x) == "0" for x in pre))


@pytest.mark.parametrize("fn, b_fn, delta", [
    (lambda y: "1", xor_bits, 0),
    (xor_bits, xor_bits, HALF),
    (lambda y: "0", lambda x: str(int(x == "11")), Fraction(1, 4)),
])
def test_supercore_implies_hardcore(fn, b_fn, delta):
    f = table_of(lambda x: x, 2, 2, "id2")
    b = table_of(b_fn, 2, 1)
    A = det_fn(lambda y: fn(y) == "1", 2, "A")
    cert = R.supercore_implies_hardcore_check(f, b, A)
    assert cert.extras["delta"] == delta
    assert cert.holds
    if delta == HALF:
        assert cert.clauses[0].lhs == Fraction(3, 2)
        assert cert.clauses[1].lhs >= Fraction(3, 4)


def test_clause_relations():
    assert R.Clause("x", Fraction(1), ">=", Fraction(1)).holds
    assert not R.Clause("x", Fraction(0), "=", Fraction(1)).holds
    with pytest.raises(ValueError):
        R.Clause("x", Fraction(0), "<", Fraction(1)).holds
