"""Instruction set, program model and the textual assembly format (``.mas``).

Grammar, one item per line::

    ; comment (also allowed after an instruction)
    .entry main                 ; optional, defaults to `main` or the first function
    fn flip_coin/1:             ; header: name/locals_count
      .locals coin              ; optional slot names, slot i gets the i-th name
      free coin
      load coin
      ifne heads
      const 0
      return
    heads:
      const 1
      return

Slots may be referenced by index or by their ``.locals`` name. Branch targets
are labels local to the enclosing function.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import ClassVar, Iterable, Union

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1


class Cond(enum.Enum):
    EQ = "eq"
    NE = "ne"
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"

    def negate(self) -> "Cond":
        return _NEGATION[self]

    def swap(self) -> "Cond":
        """Condition with operands exchanged: ``a < b`` iff ``b > a``."""
        return _SWAPPED[self]

    def holds(self, a: int, b: int) -> bool:
        return _CHECK[self](a, b)

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_NEGATION = {
    Cond.EQ: Cond.NE, Cond.NE: Cond.EQ,
    Cond.LT: Cond.GE, Cond.GE: Cond.LT,
    Cond.GT: Cond.LE, Cond.LE: Cond.GT,
}
_SWAPPED = {
    Cond.EQ: Cond.EQ, Cond.NE: Cond.NE,
    Cond.LT: Cond.GT, Cond.GT: Cond.LT,
    Cond.LE: Cond.GE, Cond.GE: Cond.LE,
}
_CHECK = {
    Cond.EQ: lambda a, b: a == b,
    Cond.NE: lambda a, b: a != b,
    Cond.LT: lambda a, b: a < b,
    Cond.LE: lambda a, b: a <= b,
    Cond.GT: lambda a, b: a > b,
    Cond.GE: lambda a, b: a >= b,
}
_SYMBOLS = {
    Cond.EQ: "==", Cond.NE: "!=", Cond.LT: "<",
    Cond.LE: "<=", Cond.GT: ">", Cond.GE: ">=",
}


# Opcodes, used by the interpreter for dispatch.
OP_CONST, OP_LOAD, OP_STORE, OP_FREE = 0, 1, 2, 3
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_REM, OP_NEG = 4, 5, 6, 7, 8, 9
OP_IFZERO, OP_IFCMP, OP_GOTO, OP_TABLESWITCH, OP_LOOKUPSWITCH = 10, 11, 12, 13, 14
OP_CALL, OP_RETURN, OP_THROW, OP_FAIL = 15, 16, 17, 18


@dataclass(frozen=True, slots=True)
class Const:
    value: int
    opcode: ClassVar[int] = OP_CONST


@dataclass(frozen=True, slots=True)
class Load:
    slot: int
    opcode: ClassVar[int] = OP_LOAD


@dataclass(frozen=True, slots=True)
class Store:
    slot: int
    opcode: ClassVar[int] = OP_STORE


@dataclass(frozen=True, slots=True)
class Free:
    slot: int
    opcode: ClassVar[int] = OP_FREE


@dataclass(frozen=True, slots=True)
class Add:
    opcode: ClassVar[int] = OP_ADD


@dataclass(frozen=True, slots=True)
class Sub:
    opcode: ClassVar[int] = OP_SUB


@dataclass(frozen=True, slots=True)
class Mul:
    opcode: ClassVar[int] = OP_MUL


@dataclass(frozen=True, slots=True)
class Div:
    opcode: ClassVar[int] = OP_DIV


@dataclass(frozen=True, slots=True)
class Rem:
    opcode: ClassVar[int] = OP_REM


@dataclass(frozen=True, slots=True)
class Neg:
    opcode: ClassVar[int] = OP_NEG


@dataclass(frozen=True, slots=True)
class IfZero:
    """Compare the popped value against zero; jump to `target` when `cond` holds."""

    cond: Cond
    target: int
    opcode: ClassVar[int] = OP_IFZERO


@dataclass(frozen=True, slots=True)
class IfCmp:
    """Pop ``b`` then ``a``; jump to `target` when ``a cond b`` holds."""

    cond: Cond
    target: int
    opcode: ClassVar[int] = OP_IFCMP


@dataclass(frozen=True, slots=True)
class Goto:
    target: int
    opcode: ClassVar[int] = OP_GOTO


@dataclass(frozen=True, slots=True)
class TableSwitch:
    lo: int
    hi: int
    targets: tuple[int, ...]
    default: int
    opcode: ClassVar[int] = OP_TABLESWITCH


@dataclass(frozen=True, slots=True)
class LookupSwitch:
    pairs: tuple[tuple[int, int], ...]
    default: int
    opcode: ClassVar[int] = OP_LOOKUPSWITCH


@dataclass(frozen=True, slots=True)
class Call:
    function: str
    opcode: ClassVar[int] = OP_CALL


@dataclass(frozen=True, slots=True)
class Return:
    opcode: ClassVar[int] = OP_RETURN


@dataclass(frozen=True, slots=True)
class Throw:
    message: str
    opcode: ClassVar[int] = OP_THROW


@dataclass(frozen=True, slots=True)
class Fail:
    opcode: ClassVar[int] = OP_FAIL


Instruction = Union[
    Const, Load, Store, Free, Add, Sub, Mul, Div, Rem, Neg, IfZero, IfCmp,
    Goto, TableSwitch, LookupSwitch, Call, Return, Throw, Fail,
]

BRANCHES = (IfZero, IfCmp, TableSwitch, LookupSwitch)
# Instructions after which control never falls through to the next index.
TERMINATORS = (Return, Throw, Fail, Goto, TableSwitch, LookupSwitch)


@dataclass(frozen=True)
class Function:
    name: str
    locals_count: int
    body: tuple[Instruction, ...]
    local_names: tuple[str, ...] = ()

    def slot_name(self, slot: int) -> str:
        if slot < len(self.local_names):
            return self.local_names[slot]
        return f"v{slot}"


@dataclass(frozen=True)
class Program:
    functions: dict[str, Function]
    entry: str

    @property
    def entry_function(self) -> Function:
        return self.functions[self.entry]

    def instruction_count(self) -> int:
        return sum(len(f.body) for f in self.functions.values())


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class Diagnostic:
    function: str
    index: int | None
    code: str
    message: str

    def __str__(self) -> str:
        at = f"{self.function}" if self.index is None else f"{self.function}@{self.index}"
        return f"{at}: [{self.code}] {self.message}"


# ---------------------------------------------------------------------------
# parsing

_HEADER = re.compile(r"fn\s+([A-Za-z_][\w.$]*)\s*/\s*(\d+)\s*:\s*$")
_LABEL = re.compile(r"([A-Za-z_.$][\w.$]*)\s*:(?!\S)")
_IDENT = re.compile(r"[A-Za-z_][\w.$]*$")
_CMP = {c.value: c for c in Cond}
_SIMPLE = {
    "add": Add, "sub": Sub, "mul": Mul, "div": Div, "rem": Rem, "neg": Neg,
    "return": Return, "fail": Fail,
}


@dataclass
class _Pending:
    """Instruction whose label operands are not resolved yet."""

    mnemonic: str
    args: list
    line: int
    column: int


@dataclass
class _FunctionBuilder:
    name: str
    locals_count: int
    line: int
    local_names: list[str] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)
    items: list = field(default_factory=list)


def _strip_comment(line: str) -> str:
    # `;` inside a string literal does not start a comment.
    in_string = False
    escaped = False
    for i, ch in enumerate(line):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == ";":
            return line[:i]
    return line


def _int_literal(tok: str, line: int, col: int) -> int:
    try:
        value = int(tok, 0)
    except ValueError:
        raise ParseError(f"expected integer, got {tok!r}", line, col) from None
    if not INT_MIN <= value <= INT_MAX:
        raise ParseError(f"integer {value} outside 32-bit range", line, col)
    return value


def parse_program(text: str | bytes, *, check: bool = True) -> Program:
    """Parse assembly source into a :class:`Program`.

    Syntax errors, unknown mnemonics, unresolved labels, duplicate function
    names and switch arity problems raise :class:`ParseError` carrying the
    line and column. With ``check`` (default) the result is also run through
    :func:`validate`, and the first diagnostic is raised as a ParseError.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"source is not UTF-8: {exc.reason}") from None

    builders: list[_FunctionBuilder] = []
    entry: str | None = None
    current: _FunctionBuilder | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1

        if stripped.startswith("fn ") or stripped == "fn":
            m = _HEADER.match(stripped)
            if not m:
                raise ParseError("malformed function header, expected `fn name/locals:`", lineno, col)
            name = m.group(1)
            if any(b.name == name for b in builders):
                raise ParseError(f"duplicate function name {name!r}", lineno, col)
            current = _FunctionBuilder(name, int(m.group(2)), lineno)
            builders.append(current)
            continue

        if stripped.startswith(".entry"):
            parts = stripped.split()
            if len(parts) != 2 or not _IDENT.match(parts[1]):
                raise ParseError("expected `.entry <function>`", lineno, col)
            entry = parts[1]
            continue

        if current is None:
            raise ParseError("instruction outside of a function", lineno, col)

        if stripped.startswith(".locals"):
            names = stripped.split()[1:]
            if current.items or current.local_names:
                raise ParseError("`.locals` must directly follow the function header", lineno, col)
            if len(names) > current.locals_count:
                raise ParseError(
                    f"{len(names)} local names for {current.locals_count} slots", lineno, col)
            for n in names:
                if not _IDENT.match(n):
                    raise ParseError(f"invalid local name {n!r}", lineno, col)
            if len(set(names)) != len(names):
                raise ParseError("duplicate local name", lineno, col)
            current.local_names = names
            continue

        m = _LABEL.match(stripped)
        if m:
            label = m.group(1)
            if label in current.labels:
                raise ParseError(f"duplicate label {label!r}", lineno, col)
            current.labels[label] = len(current.items)
            rest = stripped[m.end():].strip()
            if not rest:
                continue
            col += len(stripped) - len(stripped[m.end():].lstrip())
            stripped = rest

        current.items.append(_tokenize_instruction(stripped, lineno, col))

    if not builders:
        raise ParseError("program defines no functions")

    names = {b.name for b in builders}
    if entry is None:
        entry = "main" if "main" in names else builders[0].name

    functions = {}
    for b in builders:
        body = tuple(_resolve(p, b) for p in b.items)
        functions[b.name] = Function(b.name, b.locals_count, body, tuple(b.local_names))
    program = Program(functions, entry)

    if check:
        diagnostics = validate(program)
        if diagnostics:
            d = diagnostics[0]
            line = next((b.line for b in builders if b.name == d.function), 0)
            raise ParseError(str(d), line, 1)
    return program


def _tokenize_instruction(text: str, line: int, col: int) -> _Pending:
    mnemonic, _, rest = text.partition(" ")
    mnemonic = mnemonic.lower()
    rest = rest.strip()
    if mnemonic == "throw":
        if not rest:
            raise ParseError("throw needs a string message", line, col)
        try:
            message = json.loads(rest)
        except json.JSONDecodeError:
            raise ParseError("throw message must be a double-quoted string", line, col) from None
        if not isinstance(message, str):
            raise ParseError("throw message must be a double-quoted string", line, col)
        return _Pending(mnemonic, [message], line, col)
    return _Pending(mnemonic, rest.split(), line, col)


def _resolve(p: _Pending, fb: _FunctionBuilder) -> Instruction:
    line, col, args, m = p.line, p.column, p.args, p.mnemonic

    def arity(n: int) -> None:
        if len(args) != n:
            raise ParseError(f"`{m}` takes {n} operand(s), got {len(args)}", line, col)

    def label(tok: str) -> int:
        if tok not in fb.labels:
            raise ParseError(f"unresolved label {tok!r}", line, col)
        return fb.labels[tok]

    def slot(tok: str) -> int:
        if tok in fb.local_names:
            return fb.local_names.index(tok)
        if tok.isdigit():
            return int(tok)
        raise ParseError(f"unknown local {tok!r}", line, col)

    if m in _SIMPLE:
        arity(0)
        return _SIMPLE[m]()
    if m == "const":
        arity(1)
        return Const(_int_literal(args[0], line, col))
    if m in ("load", "store", "free"):
        arity(1)
        return {"load": Load, "store": Store, "free": Free}[m](slot(args[0]))
    if m == "goto":
        arity(1)
        return Goto(label(args[0]))
    if m == "call":
        arity(1)
        return Call(args[0])
    if m == "throw":
        return Throw(args[0])
    if m.startswith("if_icmp") and m[7:] in _CMP:
        arity(1)
        return IfCmp(_CMP[m[7:]], label(args[0]))
    if m.startswith("if") and m[2:] in _CMP:
        arity(1)
        return IfZero(_CMP[m[2:]], label(args[0]))
    if m == "tableswitch":
        # tableswitch <lo> <hi> <L_lo> ... <L_hi> default <L>
        if len(args) < 4 or args[-2] != "default":
            raise ParseError("expected `tableswitch lo hi <labels...> default <label>`", line, col)
        lo = _int_literal(args[0], line, col)
        hi = _int_literal(args[1], line, col)
        if hi < lo:
            raise ParseError("tableswitch hi must not be below lo", line, col)
        targets = args[2:-2]
        if len(targets) != hi - lo + 1:
            raise ParseError(
                f"tableswitch {lo}..{hi} needs {hi - lo + 1} targets, got {len(targets)}", line, col)
        return TableSwitch(lo, hi, tuple(label(t) for t in targets), label(args[-1]))
    if m == "lookupswitch":
        # lookupswitch <key>:<label> ... default <label>
        if len(args) < 2 or args[-2] != "default":
            raise ParseError("expected `lookupswitch k:label ... default <label>`", line, col)
        pairs = []
        for tok in args[:-2]:
            key, sep, lab = tok.partition(":")
            if not sep:
                raise ParseError(f"malformed lookupswitch case {tok!r}", line, col)
            pairs.append((_int_literal(key, line, col), label(lab)))
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ParseError("lookupswitch keys must be distinct", line, col)
        return LookupSwitch(tuple(pairs), label(args[-1]))
    raise ParseError(f"unknown mnemonic {m!r}", line, col)


# ---------------------------------------------------------------------------
# validation


def validate(program: Program) -> list[Diagnostic]:
    """Check structural invariants; returns one diagnostic per violation."""
    out: list[Diagnostic] = []
    if not program.functions:
        out.append(Diagnostic("<program>", None, "empty", "program defines no functions"))
        return out
    if program.entry not in program.functions:
        out.append(Diagnostic("<program>", None, "entry", f"entry function {program.entry!r} not defined"))

    for fn in program.functions.values():
        n = len(fn.body)
        if fn.locals_count < 0:
            out.append(Diagnostic(fn.name, None, "locals", "negative locals count"))
        if n == 0:
            out.append(Diagnostic(fn.name, None, "empty-body", "function has no instructions"))
            continue

        def bad_target(i: int, t: int) -> None:
            if not 0 <= t < n:
                out.append(Diagnostic(fn.name, i, "label", f"branch target {t} outside 0..{n - 1}"))

        for i, ins in enumerate(fn.body):
            if isinstance(ins, (Load, Store, Free)) and not 0 <= ins.slot < fn.locals_count:
                out.append(Diagnostic(fn.name, i, "slot", f"slot {ins.slot} outside 0..{fn.locals_count - 1}"))
            elif isinstance(ins, Const) and not INT_MIN <= ins.value <= INT_MAX:
                out.append(Diagnostic(fn.name, i, "const", f"constant {ins.value} outside 32-bit range"))
            elif isinstance(ins, (IfZero, IfCmp, Goto)):
                bad_target(i, ins.target)
            elif isinstance(ins, TableSwitch):
                if len(ins.targets) != ins.hi - ins.lo + 1:
                    out.append(Diagnostic(
                        fn.name, i, "arity",
                        f"tableswitch {ins.lo}..{ins.hi} has {len(ins.targets)} targets, "
                        f"expected {ins.hi - ins.lo + 1}"))
                for t in ins.targets:
                    bad_target(i, t)
                bad_target(i, ins.default)
            elif isinstance(ins, LookupSwitch):
                keys = [k for k, _ in ins.pairs]
                if len(set(keys)) != len(keys):
                    out.append(Diagnostic(fn.name, i, "arity", "lookupswitch keys are not distinct"))
                for _, t in ins.pairs:
                    bad_target(i, t)
                bad_target(i, ins.default)
            elif isinstance(ins, Call) and ins.function not in program.functions:
                out.append(Diagnostic(fn.name, i, "call", f"call to undefined function {ins.function!r}"))

        if not isinstance(fn.body[-1], TERMINATORS):
            out.append(Diagnostic(
                fn.name, n - 1, "fall-off-end",
                f"control can fall off the end after `{mnemonic(fn.body[-1])}`"))
    return out


# ---------------------------------------------------------------------------
# printing


def mnemonic(ins: Instruction) -> str:
    if isinstance(ins, IfZero):
        return "if" + ins.cond.value
    if isinstance(ins, IfCmp):
        return "if_icmp" + ins.cond.value
    return type(ins).__name__.lower()


def _jump_targets(fn: Function) -> set[int]:
    targets: set[int] = set()
    for ins in fn.body:
        if isinstance(ins, (IfZero, IfCmp, Goto)):
            targets.add(ins.target)
        elif isinstance(ins, TableSwitch):
            targets.update(ins.targets)
            targets.add(ins.default)
        elif isinstance(ins, LookupSwitch):
            targets.update(t for _, t in ins.pairs)
            targets.add(ins.default)
    return targets


def format_instruction(ins: Instruction, fn: Function | None = None) -> str:
    def slot(s: int) -> str:
        if fn is not None and s < len(fn.local_names):
            return fn.local_names[s]
        return str(s)

    def lab(t: int) -> str:
        return f"L{t}"

    if isinstance(ins, Const):
        return f"const {ins.value}"
    if isinstance(ins, (Load, Store, Free)):
        return f"{mnemonic(ins)} {slot(ins.slot)}"
    if isinstance(ins, (IfZero, IfCmp, Goto)):
        return f"{mnemonic(ins)} {lab(ins.target)}"
    if isinstance(ins, TableSwitch):
        labels = " ".join(lab(t) for t in ins.targets)
        return f"tableswitch {ins.lo} {ins.hi} {labels} default {lab(ins.default)}"
    if isinstance(ins, LookupSwitch):
        cases = " ".join(f"{k}:{lab(t)}" for k, t in ins.pairs)
        return f"lookupswitch {cases} default {lab(ins.default)}".replace("  ", " ")
    if isinstance(ins, Call):
        return f"call {ins.function}"
    if isinstance(ins, Throw):
        return f"throw {json.dumps(ins.message)}"
    return mnemonic(ins)


def format_program(program: Program) -> str:
    """Pretty-print; ``parse_program(format_program(p)) == p``."""
    lines = []
    if program.entry != "main" or "main" not in program.functions:
        lines.append(f".entry {program.entry}")
    for fn in program.functions.values():
        lines.append(f"fn {fn.name}/{fn.locals_count}:")
        if fn.local_names:
            lines.append("  .locals " + " ".join(fn.local_names))
        targets = _jump_targets(fn)
        for i, ins in enumerate(fn.body):
            if i in targets:
                lines.append(f"L{i}:")
            lines.append("  " + format_instruction(ins, fn))
        lines.append("")
    return "\n".join(lines)


def load_program(path: str, *, check: bool = True) -> Program:
    with open(path, "rb") as fh:
        return parse_program(fh.read(), check=check)


def iter_instructions(program: Program) -> Iterable[tuple[Function, int, Instruction]]:
    for fn in program.functions.values():
        for i, ins in enumerate(fn.body):
            yield fn, i, ins
