import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from demibits.bits import all_strings
from demibits.circuit import (BOT, Circuit, CircuitBuilder, EvalMode, Op, TriBit, acceptor, cap_limit,
                              constant, eval_raw, evaluate, format_circuit, negate, output_table,
                              parse_circuit, parse_circuits, restrict, table_circuit, truth_table)
from demibits.errors import ArityError, CapExceeded, ModeError, NetlistError, TotalityError

from helpers import circuits

AND = "circuit and2 in=2 wit=0 out=g1\ng1 = AND i1 i2\n"
XOR = "circuit xor2 in=2 wit=0 out=g1\ng1 = XOR i1 i2\n"


# ---------------------------------------------------------------- parsing

def test_identity_netlist():
    c = parse_circuit("circuit id in=1 wit=0 out=i1")
    assert (c.n_std, c.n_wit, c.size) == (1, 0, 1)


def test_and_netlist_size_counts_input_gates():
    assert parse_circuit(AND).size == 3


def test_comments_and_blank_lines_ignored():
    c = parse_circuit("# header comment\n\ncircuit a in=2 wit=0 out=g1  # trailing\ng1 = OR i1 i2 # x\n")
    assert eval_raw(c, "01") == "1"


def test_forward_reference_is_a_cycle_error_with_line():
    with pytest.raises(NetlistError) as err:
        parse_circuit("circuit bad in=1 wit=0 out=g2\ng1 = NOT g2\ng2 = NOT i1\n")
    assert err.value.line == 2
    assert "cycle" in str(err.value)


@pytest.mark.parametrize("text, line", [
    ("circuit x in=1 wit=0 out=g1\ng1 = NAND i1 i1\n", 2),
    ("circuit x in=1 wit=0 out=g1\ng1 = AND i1\n", 2),
    ("circuit x in=1 wit=0 out=g1\ng1 = NOT i2\n", 2),
    ("circuit x in=1 wit=0 out=g1\ng1 = NOT w1\n", 2),
    ("circuit x in=1 wit=0 out=g1\ng1 = NOT i1\ng1 = NOT i1\n", 3),
    ("circuit x in=1 wit=0 out=g1\ng1 NOT i1\n", 2),
    ("circuit x in=1 out=i1\n", 1),
    ("circuit x in=1 wit=0 out=g3\ng1 = NOT i1\n", 1),
])
def test_malformed_netlists_report_line(text, line):
    with pytest.raises(NetlistError) as err:
        parse_circuit(text)
    assert err.value.line == line


def test_several_blocks():
    cs = parse_circuits(AND + "\n" + XOR)
    assert [c.name for c in cs] == ["and2", "xor2"]
    with pytest.raises(NetlistError):
        parse_circuit(AND + XOR)


@settings(max_examples=150, deadline=None)
@given(circuits(n_out=2))
def test_format_parse_roundtrip(c):
    again = parse_circuit(format_circuit(c))
    assert (again.n_std, again.n_wit, again.size, again.n_out) == (c.n_std, c.n_wit, c.size, c.n_out)
    for x in all_strings(c.n_std):
        for w in all_strings(c.n_wit):
            assert eval_raw(again, x, w) == eval_raw(c, x, w)


# ---------------------------------------------------------------- evaluation

def test_eval_raw_truth_tables():
    ident = parse_circuit("circuit id in=1 wit=0 out=i1")
    assert eval_raw(ident, "1") == "1"
    assert eval_raw(parse_circuit(AND), "10") == "0"
    assert eval_raw(parse_circuit(XOR), "11") == "0"


def test_eval_raw_length_mismatch():
    with pytest.raises(ArityError):
        eval_raw(parse_circuit(AND), "1")


def test_nondet_and_conondet_on_witness_bit():
    c = parse_circuit("circuit w in=1 wit=1 out=w1")
    for x in "01":
        assert evaluate(c, EvalMode.NONDET, x) == TriBit.ONE
        assert evaluate(c, EvalMode.CONONDET, x) == TriBit.ZERO


def test_func_branch_semantics():
    both = parse_circuit("circuit f in=1 wit=1 out=g1,w1\ng1 = CONST1\n")
    assert evaluate(both, EvalMode.FUNC, "0") is BOT
    copy = parse_circuit("circuit f in=1 wit=1 out=g1,i1\ng1 = CONST1\n")
    assert evaluate(copy, EvalMode.FUNC, "1") == TriBit.ONE
    # branches with flag 0 are ignored as long as one branch answers
    gated = parse_circuit("circuit f in=1 wit=1 out=w1,i1\n")
    assert evaluate(gated, EvalMode.FUNC, "0") == TriBit.ZERO


def test_func_totality_violation():
    dead = parse_circuit("circuit f in=1 wit=1 out=g1,i1\ng1 = CONST0\n")
    with pytest.raises(TotalityError):
        evaluate(dead, EvalMode.FUNC, "1")


def test_mode_compatibility():
    c = parse_circuit("circuit w in=1 wit=1 out=w1")
    with pytest.raises(ModeError):
        evaluate(c, EvalMode.DET, "0")
    with pytest.raises(ModeError):
        evaluate(c, EvalMode.FUNC, "0")


def test_enumeration_cap():
    c = constant(6, 1)
    with cap_limit(5):
        with pytest.raises(CapExceeded):
            truth_table(c, EvalMode.DET)
    assert truth_table(c, EvalMode.DET).sum() == 64


def test_wide_circuit_uses_chunks():
    """More than 20 variables are split into chunks; results must match a direct parity."""
    b = CircuitBuilder(22)
    acc = b.const(0)
    for r in b.inputs():
        acc = b.xor(acc, r)
    c = b.build([acc], "parity22")
    t = truth_table(c, EvalMode.DET)
    idx = np.arange(1 << 22, dtype=np.int64)
    pop = np.zeros_like(idx)
    for k in range(22):
        pop ^= (idx >> k) & 1
    assert np.array_equal(t, pop)


@settings(max_examples=200, deadline=None)
@given(circuits(n_wit=st.just(0)))
def test_witness_free_modes_agree(c):
    t = truth_table(c, EvalMode.DET)
    assert np.array_equal(t, truth_table(c, EvalMode.NONDET))
    assert np.array_equal(t, truth_table(c, EvalMode.CONONDET))


@settings(max_examples=200, deadline=None)
@given(circuits())
def test_conondet_duality(c):
    assert np.array_equal(truth_table(c, EvalMode.CONONDET), 1 - truth_table(negate(c), EvalMode.NONDET))


@settings(max_examples=200, deadline=None)
@given(circuits())
def test_tables_match_brute_force_enumeration(c):
    nd, cn = truth_table(c, EvalMode.NONDET), truth_table(c, EvalMode.CONONDET)
    for v, x in enumerate(all_strings(c.n_std)):
        outs = [eval_raw(c, x, w) for w in all_strings(c.n_wit)]
        assert nd[v] == int("1" in outs)
        assert cn[v] == int("0" not in outs)


@settings(max_examples=200, deadline=None)
@given(circuits(n_out=2))
def test_func_agreement(c):
    try:
        t = truth_table(c, EvalMode.FUNC)
    except TotalityError:
        return
    for v, x in enumerate(all_strings(c.n_std)):
        answers = {eval_raw(c, x, w)[1] for w in all_strings(c.n_wit) if eval_raw(c, x, w)[0] == "1"}
        if t[v] == BOT:
            assert answers == {"0", "1"}
        else:
            assert answers == {str(t[v])}


@given(circuits(n_wit=st.just(0)))
def test_eval_is_referentially_transparent(c):
    for x in all_strings(c.n_std):
        assert eval_raw(c, x) == eval_raw(c, x)
        assert evaluate(c, EvalMode.DET, x) == evaluate(c, EvalMode.DET, x)


# ---------------------------------------------------------------- construction

def test_table_circuit_roundtrip():
    vals = [3, 0, 2, 1, 1, 2, 0, 3]
    c = table_circuit(vals, 3, 2, "t")
    assert list(output_table(c)) == vals
    assert c.n_wit == 0


def test_acceptor_accepts_exactly():
    c = acceptor(["010", "111"], 3, "A")
    assert [s for s in all_strings(3) if eval_raw(c, s) == "1"] == ["010", "111"]


def test_builder_folds_constants_and_hashes():
    b = CircuitBuilder(2)
    x, y = b.inputs()
    assert b.and_(x, b.const(0)) == b.const(0)
    assert b.or_(x, b.const(0)) == x
    assert b.and_(x, y) == b.and_(y, x)
    assert b.not_(b.not_(x)) == x
    assert b.xor(x, x) == b.const(0)


def test_builder_prunes_dead_gates():
    b = CircuitBuilder(2)
    x, y = b.inputs()
    b.and_(x, y)
    c = b.build([b.xor(x, y)], "x")
    assert len(c.gates) == 1 and c.size == 3


def test_constant_output_materialized():
    c = constant(2, 1)
    assert all(eval_raw(c, x) == "1" for x in all_strings(2))


@settings(max_examples=100, deadline=None)
@given(circuits(n_std=st.integers(1, 3)), st.data())
def test_restrict_fixes_positions(c, data):
    pos = data.draw(st.integers(1, c.n_std))
    val = data.draw(st.integers(0, 1))
    r = restrict(c, {pos: val})
    assert r.n_std == c.n_std - 1
    for x in all_strings(r.n_std):
        full = x[:pos - 1] + str(val) + x[pos - 1:]
        assert evaluate(r, EvalMode.NONDET, x) == evaluate(c, EvalMode.NONDET, full)


@settings(max_examples=100, deadline=None)
@given(circuits())
def test_embed_with_fresh_witnesses(inner):
    """Embedding a nondeterministic circuit keeps its existential semantics."""
    b = CircuitBuilder(inner.n_std)
    (o,) = b.embed(inner, b.inputs())
    c = b.build([o], "e")
    assert np.array_equal(truth_table(c, EvalMode.NONDET), truth_table(inner, EvalMode.NONDET))


def test_circuit_rejects_forward_operands():
    with pytest.raises(ValueError):
        Circuit("bad", 1, 0, ((Op.NOT, (1,)),), (1,))
