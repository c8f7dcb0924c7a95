"""Deterministic execution with full trail recording.

:func:`execute_until_event` runs the active frame until something the search
tree has to know about happens: a non-deterministic branch (``Choice``), a
top-level return, an uncaught throw, or an explicit failure. Every mutation
of VM state along the way is appended to the caller's trail as an undo
record; :func:`apply_trail` replays such records and hands back the inverse
trail, so state can be moved up and down a search-tree path without
re-executing code.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence, Union

from clvm import ir
from clvm.constraints import (
    AllOf,
    AnyOf,
    BinOp,
    Constraint,
    ConstraintExpression,
    ConstraintStack,
    LabelingExhausted,
    Negate,
    Var,
    Verdict,
    apply_op,
    eval_term,
    wrap32,
)
from clvm.ir import (
    OP_ADD, OP_CALL, OP_CONST, OP_DIV, OP_FAIL, OP_FREE, OP_GOTO, OP_IFCMP, OP_IFZERO, OP_LOAD,
    OP_LOOKUPSWITCH, OP_NEG, OP_REM, OP_RETURN, OP_STORE, OP_TABLESWITCH, OP_THROW, Cond,
)

Value = Union[int, Var, BinOp, Negate]  # ints are concrete, the rest symbolic


class EngineError(RuntimeError):
    """Internal bookkeeping went out of sync (trail, frames, navigation)."""


class BudgetExceeded(Exception):
    """The step or wall-time budget ran out in the middle of a run."""


# ---------------------------------------------------------------------------
# state


class Frame:
    __slots__ = ("function", "pc", "locals", "operands", "frame_id")

    def __init__(self, function: ir.Function, frame_id: int, pc: int = 0):
        self.function = function
        self.pc = pc
        self.locals: list = [0] * function.locals_count
        self.operands: list = []
        self.frame_id = frame_id

    def __repr__(self) -> str:
        return f"Frame({self.function.name}#{self.frame_id} pc={self.pc})"


class VmState:
    """Frame stack, constraint stack and the fresh-variable counter.

    ``vars`` lists the variables minted along the current path; its length is
    the fresh-variable counter and it is restored by the trail like any
    other state. The step counter is monotone and is not part of the trail.
    """

    def __init__(self, program: ir.Program, constraints: ConstraintStack | None = None,
                 max_steps: int | None = None):
        self.program = program
        self.constraints = constraints if constraints is not None else ConstraintStack()
        self.vars: list[Var] = []
        self.steps = 0
        self.max_steps = max_steps if max_steps is not None else float("inf")
        self.deadline: float | None = None
        self._frame_ids = 0
        self.frames: list[Frame] = [Frame(program.entry_function, self.new_frame_id())]

    def new_frame_id(self) -> int:
        fid = self._frame_ids
        self._frame_ids += 1
        return fid

    @property
    def top(self) -> Frame:
        return self.frames[-1]

    def jump(self, frame_id: int, pc: int, trail: list) -> None:
        """Move the active frame to `pc`, recording the move."""
        frame = self.frames[-1]
        if frame.frame_id != frame_id:
            raise EngineError(f"active frame is #{frame.frame_id}, node expects #{frame_id}")
        trail.append(PcMoved(frame_id, frame.pc))
        frame.pc = pc

    def __deepcopy__(self, memo):
        import copy

        memo[id(self.program)] = self.program
        for fn in self.program.functions.values():
            memo[id(fn)] = fn
        new = VmState.__new__(VmState)
        for k, v in self.__dict__.items():
            setattr(new, k, copy.deepcopy(v, memo))
        return new


def fingerprint(state: VmState) -> tuple:
    """Structural snapshot: frames, locals, operands, pcs, minted variables
    and the constraint-stack entries (interval store excluded)."""
    return (
        tuple(
            (f.frame_id, f.function.name, f.pc, tuple(f.locals), tuple(f.operands))
            for f in state.frames
        ),
        len(state.vars),
        tuple((v.id, v.name) for v in state.vars),
        tuple(state.constraints.entries),
    )


def state_hash(state: VmState) -> int:
    return hash(fingerprint(state))


# ---------------------------------------------------------------------------
# trail elements
#
# An element records a mutation that has happened. ``apply`` undoes it and
# returns the element that redoes it.


def _frame(state: VmState, fid: int) -> Frame:
    frame = state.frames[-1]
    if frame.frame_id != fid:
        raise EngineError(f"trail expects frame #{fid} on top, found #{frame.frame_id}")
    return frame


@dataclass(slots=True)
class LocalWritten:
    frame_id: int
    slot: int
    previous: Value

    def apply(self, state: VmState):
        locs = _frame(state, self.frame_id).locals
        cur = locs[self.slot]
        locs[self.slot] = self.previous
        return LocalWritten(self.frame_id, self.slot, cur)


@dataclass(slots=True)
class OperandPushed:
    frame_id: int

    def apply(self, state: VmState):
        ops = _frame(state, self.frame_id).operands
        if not ops:
            raise EngineError("trail pops an empty operand stack")
        return OperandPopped(self.frame_id, ops.pop())


@dataclass(slots=True)
class OperandPopped:
    frame_id: int
    value: Value

    def apply(self, state: VmState):
        _frame(state, self.frame_id).operands.append(self.value)
        return OperandPushed(self.frame_id)


@dataclass(slots=True)
class FramePushed:
    frame_id: int

    def apply(self, state: VmState):
        frame = _frame(state, self.frame_id)
        if len(state.frames) == 1:
            raise EngineError("trail pops the last frame")
        state.frames.pop()
        return FramePopped(frame)


@dataclass(slots=True)
class FramePopped:
    frame: Frame

    def apply(self, state: VmState):
        state.frames.append(self.frame)
        return FramePushed(self.frame.frame_id)


@dataclass(slots=True)
class PcMoved:
    frame_id: int
    previous: int

    def apply(self, state: VmState):
        frame = _frame(state, self.frame_id)
        cur = frame.pc
        frame.pc = self.previous
        return PcMoved(self.frame_id, cur)


@dataclass(slots=True)
class VarMinted:
    var: Var

    def apply(self, state: VmState):
        if not state.vars or state.vars[-1] != self.var:
            raise EngineError(f"trail un-mints {self.var} which is not the newest variable")
        state.vars.pop()
        return VarUnminted(self.var)


@dataclass(slots=True)
class VarUnminted:
    var: Var

    def apply(self, state: VmState):
        if len(state.vars) != self.var.id:
            raise EngineError(f"re-minting {self.var} at counter {len(state.vars)}")
        state.vars.append(self.var)
        return VarMinted(self.var)


@dataclass(slots=True)
class ConstraintPushed:
    """A guard imposed mid-run (symbolic divisor != 0)."""

    constraint: ConstraintExpression

    def apply(self, state: VmState):
        if state.constraints.retract() is not self.constraint:
            raise EngineError("trail retracts a constraint it did not impose")
        return ConstraintPopped(self.constraint)


@dataclass(slots=True)
class ConstraintPopped:
    constraint: ConstraintExpression

    def apply(self, state: VmState):
        state.constraints.impose(self.constraint)
        return ConstraintPushed(self.constraint)


TrailElement = Union[
    LocalWritten, OperandPushed, OperandPopped, FramePushed, FramePopped,
    PcMoved, VarMinted, VarUnminted, ConstraintPushed, ConstraintPopped,
]
Trail = list  # of TrailElement, in the order the mutations happened


def apply_trail(state: VmState, trail: Sequence[TrailElement]) -> Trail:
    """Undo `trail` (newest first) and return the trail that redoes it."""
    return [e.apply(state) for e in reversed(trail)]


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True, slots=True)
class DecisionAlternative:
    constraint: ConstraintExpression
    resume_pc: int


@dataclass(frozen=True, slots=True)
class Choice:
    alternatives: tuple[DecisionAlternative, ...]


@dataclass(frozen=True, slots=True)
class ValueReturned:
    value: Value


@dataclass(frozen=True, slots=True)
class ExceptionThrown:
    message: str


@dataclass(frozen=True, slots=True)
class Failed:
    reason: str = "fail"  # "fail" (explicit) or "inconsistent"


Event = Union[Choice, ValueReturned, ExceptionThrown, Failed]

DIVIDE_BY_ZERO = "java.lang.ArithmeticException: / by zero"


def decide_alternatives(instr: ir.Instruction, operands: Sequence[Value], pc: int,
                        constraints: ConstraintStack | None = None) -> list[DecisionAlternative]:
    """Decision alternatives of a branch over at least one symbolic operand.

    Order: for if-instructions ``[taken, fall-through]``; for switches one per
    case in listed order, then the default. With `constraints`, alternatives
    that are immediately inconsistent with the stack are dropped.
    """
    if isinstance(instr, ir.IfZero):
        (v,) = operands
        taken = Constraint(instr.cond, v, 0)
        alts = [DecisionAlternative(taken, instr.target),
                DecisionAlternative(taken.negate(), pc + 1)]
    elif isinstance(instr, ir.IfCmp):
        a, b = operands
        taken = Constraint(instr.cond, a, b)
        alts = [DecisionAlternative(taken, instr.target),
                DecisionAlternative(taken.negate(), pc + 1)]
    elif isinstance(instr, ir.TableSwitch):
        (v,) = operands
        alts = [DecisionAlternative(Constraint(Cond.EQ, v, instr.lo + i), t)
                for i, t in enumerate(instr.targets)]
        default = AnyOf((Constraint(Cond.LT, v, instr.lo), Constraint(Cond.GT, v, instr.hi)))
        alts.append(DecisionAlternative(default, instr.default))
    elif isinstance(instr, ir.LookupSwitch):
        (v,) = operands
        alts = [DecisionAlternative(Constraint(Cond.EQ, v, k), t) for k, t in instr.pairs]
        if instr.pairs:
            default = AllOf(tuple(Constraint(Cond.NE, v, k) for k, _ in instr.pairs))
            alts.append(DecisionAlternative(default, instr.default))
        else:
            alts.append(DecisionAlternative(AllOf(()), instr.default))
    else:
        raise TypeError(f"{ir.mnemonic(instr)} is not a branch instruction")

    if constraints is None:
        return alts
    return [alt for alt in alts if not constraints.refutes(alt.constraint)]


def _concrete_target(instr: ir.Instruction, operands: Sequence[int], pc: int) -> int:
    if isinstance(instr, ir.IfZero):
        return instr.target if instr.cond.holds(operands[0], 0) else pc + 1
    if isinstance(instr, ir.IfCmp):
        return instr.target if instr.cond.holds(operands[0], operands[1]) else pc + 1
    v = operands[0]
    if isinstance(instr, ir.TableSwitch):
        if instr.lo <= v <= instr.hi:
            return instr.targets[v - instr.lo]
        return instr.default
    for k, t in instr.pairs:
        if k == v:
            return t
    return instr.default


def _arith(op: str, a: Value, b: Value) -> Value:
    if type(a) is int and type(b) is int:
        return apply_op(op, a, b)
    return BinOp(op, a, b)


_ARITH_OPS = {ir.OP_ADD: "+", ir.OP_SUB: "-", ir.OP_MUL: "*", ir.OP_DIV: "/", ir.OP_REM: "%"}
_TIME_CHECK_MASK = 0x3FF
_BRANCH_OPS = frozenset((OP_IFZERO, OP_IFCMP, OP_TABLESWITCH, OP_LOOKUPSWITCH))


def execute_until_event(state: VmState, trail: list) -> Event:
    """Run from the active frame's pc until the next search-relevant event.

    Branches over concrete operands, and symbolic branches with a single
    surviving alternative, execute deterministically. Raises
    :class:`BudgetExceeded` when the step budget or deadline runs out; the
    trail is then complete up to the interruption point.
    """
    frames = state.frames
    program = state.program
    cstack = state.constraints
    rec = trail.append

    frame = frames[-1]
    fid = frame.frame_id
    code = frame.function.body
    ops = frame.operands
    locs = frame.locals
    pc = frame.pc
    steps = state.steps
    limit = state.max_steps
    deadline = state.deadline

    def sync() -> None:
        if frame.pc != pc:
            rec(PcMoved(fid, frame.pc))
            frame.pc = pc
        state.steps = steps

    while True:
        if steps >= limit or (
            deadline is not None and not steps & _TIME_CHECK_MASK and time.monotonic() > deadline
        ):
            sync()
            raise BudgetExceeded(f"budget exhausted after {steps} steps")
        steps += 1
        ins = code[pc]
        op = ins.opcode

        if op == OP_LOAD:
            ops.append(locs[ins.slot])
            rec(OperandPushed(fid))
            pc += 1
        elif op == OP_CONST:
            ops.append(ins.value)
            rec(OperandPushed(fid))
            pc += 1
        elif op == OP_STORE:
            v = ops.pop()
            rec(OperandPopped(fid, v))
            rec(LocalWritten(fid, ins.slot, locs[ins.slot]))
            locs[ins.slot] = v
            pc += 1
        elif op in _BRANCH_OPS:
            if op == OP_IFCMP:
                b = ops.pop()
                a = ops.pop()
                rec(OperandPopped(fid, b))
                rec(OperandPopped(fid, a))
                operands = (a, b)
                concrete = type(a) is int and type(b) is int
            else:
                v = ops.pop()
                rec(OperandPopped(fid, v))
                operands = (v,)
                concrete = type(v) is int
            if concrete:
                pc = _concrete_target(ins, operands, pc)
                continue
            alts = decide_alternatives(ins, operands, pc, cstack)
            if len(alts) == 1:
                pc = alts[0].resume_pc
                continue
            sync()
            if not alts:
                return Failed("inconsistent")
            return Choice(tuple(alts))
        elif OP_ADD <= op <= OP_REM:
            b = ops.pop()
            a = ops.pop()
            rec(OperandPopped(fid, b))
            rec(OperandPopped(fid, a))
            if op == OP_DIV or op == OP_REM:
                if type(b) is int:
                    if b == 0:
                        sync()
                        return ExceptionThrown(DIVIDE_BY_ZERO)
                else:
                    iv = cstack.bounds(b)
                    if iv is None or iv[0] <= 0 <= iv[1]:
                        guard = Constraint(Cond.NE, b, 0)
                        if cstack.impose(guard) is Verdict.INCONSISTENT:
                            cstack.retract()
                            sync()
                            return Failed("inconsistent")
                        rec(ConstraintPushed(guard))
            ops.append(_arith(_ARITH_OPS[op], a, b))
            rec(OperandPushed(fid))
            pc += 1
        elif op == OP_NEG:
            v = ops.pop()
            rec(OperandPopped(fid, v))
            ops.append(wrap32(-v) if type(v) is int else Negate(v))
            rec(OperandPushed(fid))
            pc += 1
        elif op == OP_FREE:
            var = Var(len(state.vars), frame.function.slot_name(ins.slot))
            state.vars.append(var)
            rec(VarMinted(var))
            rec(LocalWritten(fid, ins.slot, locs[ins.slot]))
            locs[ins.slot] = var
            pc += 1
        elif op == OP_GOTO:
            pc = ins.target
        elif op == OP_CALL:
            callee = program.functions[ins.function]
            pc += 1
            sync()
            new = Frame(callee, state.new_frame_id())
            frames.append(new)
            rec(FramePushed(new.frame_id))
            frame, fid, code, ops, locs, pc = new, new.frame_id, callee.body, new.operands, new.locals, 0
        elif op == OP_RETURN:
            v = ops.pop()
            rec(OperandPopped(fid, v))
            if len(frames) == 1:
                sync()
                return ValueReturned(v)
            frames.pop()
            rec(FramePopped(frame))
            frame = frames[-1]
            fid, code, ops, locs, pc = frame.frame_id, frame.function.body, frame.operands, frame.locals, frame.pc
            ops.append(v)
            rec(OperandPushed(fid))
        elif op == OP_THROW:
            sync()
            return ExceptionThrown(ins.message)
        elif op == OP_FAIL:
            sync()
            return Failed("fail")
        else:  # pragma: no cover
            raise EngineError(f"unknown opcode {op}")


# ---------------------------------------------------------------------------
# solutions


@dataclass
class Solution:
    """A value or exception produced by one search-tree path.

    ``binding`` grounds every variable minted on the path. It is None only
    when labeling ran out of budget (``grounded`` is then False).
    """

    kind: str  # "value" or "exception"
    payload: int | str | None
    binding: dict[Var, int] | None
    grounded: bool = True

    def binding_by_name(self) -> dict[str, int]:
        if not self.binding:
            return {}
        names = [str(v) for v in self.binding]
        dup = {n for n in names if names.count(n) > 1}
        return {(f"{v}#{v.id}" if str(v) in dup else str(v)): x for v, x in self.binding.items()}


def ground(state: VmState, value: Value | None, label_budget: int) -> tuple | None:
    """Label every path variable. Returns ``(payload, binding, grounded)`` or
    None when the path constraints have no integer model."""
    try:
        binding = state.constraints.label(state.vars, label_budget)
    except LabelingExhausted:
        return (value if type(value) is int else None), None, False
    if binding is None:
        return None
    payload = value
    if value is not None and type(value) is not int:
        payload = eval_term(value, binding)
    return payload, binding, True


def run_oracle(program: ir.Program, budget: int, label_budget: int = 1_000_000,
               cap: int | None = None) -> tuple[list[Solution], bool]:
    """Reference explorer: deep-copies the whole state at every choice and
    explores alternatives left to right, with no trails and no tree.

    Returns ``(solutions, truncated)``; `truncated` is set when the step
    budget ran out.
    """
    import copy

    root = VmState(program, ConstraintStack(cap) if cap else None, max_steps=budget)
    pending: list[tuple[VmState, DecisionAlternative | None]] = [(root, None)]
    solutions: list[Solution] = []
    steps = 0
    while pending:
        state, alt = pending.pop()
        state.steps = steps
        if alt is not None:
            state.constraints.impose(alt.constraint)
            state.frames[-1].pc = alt.resume_pc
        scratch: list = []
        try:
            event = execute_until_event(state, scratch)
        except BudgetExceeded:
            return solutions, True
        steps = state.steps
        if isinstance(event, Choice):
            for a in reversed(event.alternatives):
                pending.append((copy.deepcopy(state), a))
        elif isinstance(event, ValueReturned):
            g = ground(state, event.value, label_budget)
            if g is not None:
                solutions.append(Solution("value", g[0], g[1], g[2]))
        elif isinstance(event, ExceptionThrown):
            g = ground(state, None, label_budget)
            if g is not None:
                solutions.append(Solution("exception", event.message, g[1], g[2]))
    return solutions, False
