import random

import pytest
from hypothesis import given, settings, strategies as st

from clvm import ir
from clvm.ir import (
    Cond, Const, Function, IfCmp, Load, ParseError, Program, Return, TableSwitch,
    format_program, load_program, parse_program, validate,
)
from progen import generate_program

CORPUS = "corpus"


def test_minimal_program():
    p = parse_program("fn main/0:\n  const 1\n  return")
    assert list(p.functions) == ["main"]
    assert p.entry_function.body == (Const(1), Return())


@pytest.mark.parametrize("cond", list(Cond))
def test_negation_is_an_involution(cond):
    assert cond.negate() is not cond
    assert cond.negate().negate() is cond
    for a in range(-2, 3):
        for b in range(-2, 3):
            assert cond.holds(a, b) != cond.negate().holds(a, b)
            assert cond.holds(a, b) == cond.swap().holds(b, a)


def test_flip_two_coins_mirrors_the_javac_layout():
    p = load_program(f"{CORPUS}/flip_two_coins.mas")
    body = p.entry_function.body
    assert len(body) == 13
    branches = [(i, ins) for i, ins in enumerate(body) if isinstance(ins, IfCmp)]
    assert [(i, ins.cond, ins.target) for i, ins in branches] == [
        (4, Cond.NE, 7), (9, Cond.NE, 11),
    ]
    assert isinstance(body[7], Load) and body[7].slot == 1
    assert isinstance(body[10], ir.Fail)


def test_unresolved_label():
    with pytest.raises(ParseError, match="unresolved label"):
        parse_program("fn main/0:\n  goto missing")


@pytest.mark.parametrize("text, fragment", [
    ("", "no functions"),
    ("const 1", "outside of a function"),
    ("fn main/0:\n  bogus", "unknown mnemonic"),
    ("fn main/0:\n  const", "const"),
    ("fn main/0:\n  const 99999999999\n  return", "32-bit"),
    ("fn main/1:\n  load 3\n  return", "slot"),
    ("fn main/0:\n  call nowhere\n  return", "nowhere"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as e:
        parse_program(text)
    assert fragment in str(e.value)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_program("fn main/0:\n  const 1\n  frobnicate\n")
    assert e.value.line == 3


def test_validate_known_good_corpus():
    for name in ("flip_coin", "flip_two_coins", "non_terminating_coin", "send_more_money",
                 "three_partition", "water_jugs"):
        assert validate(load_program(f"{CORPUS}/{name}.mas")) == []


def test_validate_fall_off_end():
    p = parse_program("fn main/0:\n  const 1\n  const 2\n  add", check=False)
    assert [d.code for d in validate(p)] == ["fall-off-end"]


def test_validate_tableswitch_arity():
    f = Function("main", 1, (Load(0), TableSwitch(0, 2, (2, 3), 2), Const(0), Return()))
    diags = validate(Program({"main": f}, "main"))
    assert [(d.code, d.index) for d in diags] == [("arity", 1)]


def test_validate_empty_program():
    assert [d.code for d in validate(Program({}, "main"))] == ["empty"]


def test_lookupswitch_keys_distinct():
    with pytest.raises(ParseError):
        parse_program("fn main/1:\n  load 0\n  lookupswitch 1:a 1:a default a\na:\n  const 0\n  return")


def test_comments_and_strings():
    p = parse_program('fn main/0:   ; header\n  throw "a ; not a comment"  ; trailing\n')
    assert p.entry_function.body[0].message == "a ; not a comment"


def test_locals_names_and_entry():
    p = parse_program(".entry g\nfn f/0:\n  const 0\n  return\nfn g/2:\n  .locals a b\n  load b\n  return")
    assert p.entry == "g"
    assert p.entry_function.body[0] == Load(1)
    assert p.entry_function.slot_name(0) == "a"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_format_round_trip(seed):
    p = parse_program(generate_program(random.Random(seed)))
    q = parse_program(format_program(p))
    assert q.entry == p.entry
    assert {n: f.body for n, f in q.functions.items()} == {n: f.body for n, f in p.functions.items()}
