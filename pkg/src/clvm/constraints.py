"""Symbolic integer terms, relational constraints and the constraint stack.

Consistency is checked by bounds propagation over per-variable intervals
(HC4-style forward evaluation / backward narrowing of term trees). Terms use
32-bit wrapping arithmetic, so a sub-term whose exact value range leaves the
32-bit range is treated as opaque: its interval is the full range and nothing
below it is narrowed. Propagation is sound but incomplete; :meth:`label`
is the complete backstop.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from clvm.ir import INT_MAX, INT_MIN, Cond

DEFAULT_CAP = 10_000
DEFAULT_LABEL_BUDGET = 1_000_000
FULL = (INT_MIN, INT_MAX)


def wrap32(x: int) -> int:
    return ((x + 2**31) & 0xFFFFFFFF) - 2**31


def java_div(a: int, b: int) -> int:
    """Truncating division with 32-bit wrap; caller guarantees ``b != 0``."""
    q = abs(a) // abs(b)
    return wrap32(q if (a < 0) == (b < 0) else -q)


def java_rem(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return -r if a < 0 else r


# ---------------------------------------------------------------------------
# terms


class _Immutable:
    """Terms and constraints are shared, never copied."""

    __slots__ = ()

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


@dataclass(frozen=True, slots=True)
class Var(_Immutable):
    """A logic variable. Identity is the integer id; the name is for display."""

    id: int
    name: str = field(default="", compare=False)

    def __hash__(self) -> int:
        return self.id

    def __str__(self) -> str:
        return self.name or f"_{self.id}"


@dataclass(frozen=True, slots=True)
class BinOp(_Immutable):
    op: str  # one of + - * / %
    lhs: "Term"
    rhs: "Term"

    def __str__(self) -> str:
        return f"({_fmt(self.lhs)} {self.op} {_fmt(self.rhs)})"


@dataclass(frozen=True, slots=True)
class Negate(_Immutable):
    operand: "Term"

    def __str__(self) -> str:
        return f"-{_fmt(self.operand)}"


# Plain ints are constant leaves.
Term = Union[int, Var, BinOp, Negate]


def _fmt(t: Term) -> str:
    return str(t)


class ArithmeticFailure(Exception):
    """Division or remainder by zero while evaluating a term."""


def eval_term(t: Term, binding: Mapping[Var, int]) -> int:
    if type(t) is int:
        return t
    if type(t) is Var:
        try:
            return binding[t]
        except KeyError:
            raise LookupError(f"variable {t} is unbound") from None
    if type(t) is Negate:
        return wrap32(-eval_term(t.operand, binding))
    a = eval_term(t.lhs, binding)
    b = eval_term(t.rhs, binding)
    return apply_op(t.op, a, b)


def apply_op(op: str, a: int, b: int) -> int:
    if op == "+":
        return wrap32(a + b)
    if op == "-":
        return wrap32(a - b)
    if op == "*":
        return wrap32(a * b)
    if b == 0:
        raise ArithmeticFailure("/ by zero")
    if op == "/":
        return java_div(a, b)
    return java_rem(a, b)


def term_vars(t: Term, out: dict[Var, None] | None = None) -> dict[Var, None]:
    """Variables of `t` in first-occurrence order (dict used as ordered set)."""
    if out is None:
        out = {}
    stack = [t]
    while stack:
        t = stack.pop()
        tt = type(t)
        if tt is Var:
            out.setdefault(t)
        elif tt is BinOp:
            stack.append(t.rhs)
            stack.append(t.lhs)
        elif tt is Negate:
            stack.append(t.operand)
    return out


# ---------------------------------------------------------------------------
# constraint expressions


@dataclass(frozen=True, slots=True)
class Constraint(_Immutable):
    cond: Cond
    lhs: Term
    rhs: Term

    def negate(self) -> "Constraint":
        return Constraint(self.cond.negate(), self.lhs, self.rhs)

    def holds(self, binding: Mapping[Var, int]) -> bool:
        try:
            return self.cond.holds(eval_term(self.lhs, binding), eval_term(self.rhs, binding))
        except ArithmeticFailure:
            return False

    def variables(self) -> dict[Var, None]:
        return term_vars(self.rhs, term_vars(self.lhs))

    def __str__(self) -> str:
        return f"{_fmt(self.lhs)} {self.cond.symbol} {_fmt(self.rhs)}"


@dataclass(frozen=True, slots=True)
class AnyOf(_Immutable):
    """Disjunction; only produced for a tableswitch default guard."""

    parts: tuple[Constraint, ...]

    def negate(self) -> "AllOf":
        return AllOf(tuple(p.negate() for p in self.parts))

    def holds(self, binding: Mapping[Var, int]) -> bool:
        return any(p.holds(binding) for p in self.parts)

    def variables(self) -> dict[Var, None]:
        out: dict[Var, None] = {}
        for p in self.parts:
            term_vars(p.rhs, term_vars(p.lhs, out))
        return out

    def __str__(self) -> str:
        return " || ".join(f"({p})" for p in self.parts)


@dataclass(frozen=True, slots=True)
class AllOf(_Immutable):
    """Conjunction; only produced for a lookupswitch default guard."""

    parts: tuple[Constraint, ...]

    def negate(self) -> AnyOf:
        return AnyOf(tuple(p.negate() for p in self.parts))

    def holds(self, binding: Mapping[Var, int]) -> bool:
        return all(p.holds(binding) for p in self.parts)

    def variables(self) -> dict[Var, None]:
        out: dict[Var, None] = {}
        for p in self.parts:
            term_vars(p.rhs, term_vars(p.lhs, out))
        return out

    def __str__(self) -> str:
        return " && ".join(f"({p})" for p in self.parts)


ConstraintExpression = Union[Constraint, AnyOf, AllOf]


class Verdict(enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNKNOWN = "unknown"


class LabelingExhausted(Exception):
    """The labeling node budget ran out before the search was decided."""


# ---------------------------------------------------------------------------
# interval reasoning


class _Empty(Exception):
    pass


_EMPTY = _Empty()


def _in_range(lo: int, hi: int) -> bool:
    return INT_MIN <= lo and hi <= INT_MAX


def _fwd(t: Term, dom) -> tuple[int, int]:
    """Interval of the wrapped value of `t` over the box `dom`."""
    tt = type(t)
    if tt is int:
        return t, t
    if tt is Var:
        return dom.get(t.id, FULL)
    if tt is Negate:
        lo, hi = _fwd(t.operand, dom)
        if lo == hi:
            return wrap32(-lo), wrap32(-lo)
        if lo == INT_MIN:
            return FULL
        return -hi, -lo
    alo, ahi = _fwd(t.lhs, dom)
    blo, bhi = _fwd(t.rhs, dom)
    return _combine(t.op, alo, ahi, blo, bhi)


def _combine(op: str, alo: int, ahi: int, blo: int, bhi: int) -> tuple[int, int]:
    if alo == ahi and blo == bhi:
        try:
            v = apply_op(op, alo, blo)
        except ArithmeticFailure:
            raise _EMPTY from None
        return v, v
    if op == "+":
        lo, hi = alo + blo, ahi + bhi
    elif op == "-":
        lo, hi = alo - bhi, ahi - blo
    elif op == "*":
        c = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        lo, hi = min(c), max(c)
    elif op == "/":
        pieces = _nonzero_pieces(blo, bhi)
        cands = [
            _trunc_div(a, b) for plo, phi in pieces for b in (plo, phi) for a in (alo, ahi)
        ]
        lo, hi = min(cands), max(cands)
    else:
        pieces = _nonzero_pieces(blo, bhi)
        m = max(max(abs(plo), abs(phi)) for plo, phi in pieces) - 1
        if alo >= 0:
            return 0, min(ahi, m)
        if ahi <= 0:
            return max(alo, -m), 0
        return max(alo, -m), min(ahi, m)
    if _in_range(lo, hi):
        return lo, hi
    return FULL


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _nonzero_pieces(lo: int, hi: int) -> list[tuple[int, int]]:
    pieces = []
    if lo <= -1:
        pieces.append((lo, min(hi, -1)))
    if hi >= 1:
        pieces.append((max(lo, 1), hi))
    if not pieces:
        raise _EMPTY
    return pieces


class _Narrower:
    """Applies interval narrowings to a domain map, logging previous values."""

    __slots__ = ("dom", "log", "changed")

    def __init__(self, dom, log):
        self.dom = dom
        self.log = log
        self.changed: list[int] = []

    def var(self, vid: int, lo: int, hi: int) -> None:
        cur = self.dom.get(vid, FULL)
        nlo = lo if lo > cur[0] else cur[0]
        nhi = hi if hi < cur[1] else cur[1]
        if nlo > nhi:
            raise _EMPTY
        if nlo == cur[0] and nhi == cur[1]:
            return
        if self.log is not None and vid not in self.log:
            self.log[vid] = self.dom.get(vid)
        self.dom[vid] = (nlo, nhi)
        self.changed.append(vid)

    def term(self, t: Term, lo: int, hi: int) -> None:
        """Narrow the variables of `t` so that its value lies in [lo, hi]."""
        tt = type(t)
        if tt is int:
            if not lo <= t <= hi:
                raise _EMPTY
            return
        if tt is Var:
            self.var(t.id, lo, hi)
            return
        dom = self.dom
        if tt is Negate:
            olo, ohi = _fwd(t.operand, dom)
            if olo == ohi:
                v = wrap32(-olo)
                if not lo <= v <= hi:
                    raise _EMPTY
                return
            if olo == INT_MIN:
                return
            if -ohi > hi or -olo < lo:
                self.term(t.operand, -hi, -lo)
            return
        a, b, op = t.lhs, t.rhs, t.op
        alo, ahi = _fwd(a, dom)
        blo, bhi = _fwd(b, dom)
        nlo, nhi = _combine(op, alo, ahi, blo, bhi)
        if nhi < lo or nlo > hi:
            raise _EMPTY
        if nlo >= lo and nhi <= hi:
            return  # already entailed
        if nlo == nhi:
            return  # exact singleton, checked above
        if op == "+":
            if (nlo, nhi) == FULL and not _in_range(alo + blo, ahi + bhi):
                return
            self.term(a, lo - bhi, hi - blo)
            alo, ahi = _fwd(a, dom)
            self.term(b, lo - ahi, hi - alo)
        elif op == "-":
            if (nlo, nhi) == FULL and not _in_range(alo - bhi, ahi - blo):
                return
            self.term(a, lo + blo, hi + bhi)
            alo, ahi = _fwd(a, dom)
            self.term(b, alo - hi, ahi - lo)
        elif op == "*":
            c = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            if not _in_range(min(c), max(c)):
                return
            if blo == bhi and blo != 0:
                self.term(a, *_div_bounds(lo, hi, blo))
            elif alo == ahi and alo != 0:
                self.term(b, *_div_bounds(lo, hi, alo))
        # division and remainder: forward only


def _div_bounds(lo: int, hi: int, k: int) -> tuple[int, int]:
    """Range of x with ``lo <= x * k <= hi`` for a nonzero constant k."""
    if k > 0:
        return -((-lo) // k), hi // k
    return -((-hi) // k), lo // k


def _relation(n: _Narrower, cond: Cond, lhs: Term, rhs: Term) -> None:
    a, b = _fwd(lhs, n.dom)
    c, d = _fwd(rhs, n.dom)
    if cond is Cond.EQ:
        lo, hi = max(a, c), min(b, d)
        if lo > hi:
            raise _EMPTY
        if (lo, hi) != (a, b):
            n.term(lhs, lo, hi)
        if (lo, hi) != (c, d):
            n.term(rhs, lo, hi)
    elif cond is Cond.NE:
        if a == b:
            if c == d == a:
                raise _EMPTY
            if c == a:
                n.term(rhs, c + 1, d)
            elif d == a:
                n.term(rhs, c, d - 1)
        elif c == d:
            if a == c:
                n.term(lhs, a + 1, b)
            elif b == c:
                n.term(lhs, a, b - 1)
    else:
        if cond is Cond.GT or cond is Cond.GE:
            cond = cond.swap()
            lhs, rhs, a, b, c, d = rhs, lhs, c, d, a, b
        strict = 1 if cond is Cond.LT else 0
        # lhs <= rhs - strict
        if b > d - strict:
            n.term(lhs, a, d - strict)
        if c < a + strict:
            n.term(rhs, a + strict, d)


def _revise(n: _Narrower, c: ConstraintExpression) -> None:
    tc = type(c)
    if tc is Constraint:
        _relation(n, c.cond, c.lhs, c.rhs)
    elif tc is AllOf:
        for p in c.parts:
            _relation(n, p.cond, p.lhs, p.rhs)
    else:
        alive = [p for p in c.parts if _feasible(p, n.dom)]
        if not alive:
            raise _EMPTY
        if len(alive) == 1:
            p = alive[0]
            _relation(n, p.cond, p.lhs, p.rhs)


def _feasible(c: Constraint, dom) -> bool:
    trial = _Narrower(_Overlay(dom), None)
    try:
        _relation(trial, c.cond, c.lhs, c.rhs)
    except _Empty:
        return False
    return True


class _Overlay(dict):
    """Copy-on-write view of a domain map used for trial propagation."""

    def __init__(self, base):
        super().__init__()
        self.base = base

    def get(self, key, default=None):
        if dict.__contains__(self, key):
            return dict.__getitem__(self, key)
        return self.base.get(key, default)


# ---------------------------------------------------------------------------
# the stack


class ConstraintStack:
    """Ordered constraints with conjunction semantics and an interval store.

    Every push records the previous interval of each variable it narrows, so
    :meth:`retract` restores the store exactly.
    """

    def __init__(self, cap: int = DEFAULT_CAP):
        self.cap = cap
        self.entries: list[ConstraintExpression] = []
        self._entry_vars: list[tuple[int, ...]] = []
        self._entry_unary: list[tuple[int, Cond, int] | None] = []
        self._saved: list[dict | None] = []
        self._dom: dict[int, tuple[int, int]] = {}
        self._watch: dict[int, list[int]] = {}
        self._known_vars: dict[int, Var] = {}
        self._failed_at: int | None = None  # depth at which an Inconsistent push sits

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ConstraintExpression]:
        return iter(self.entries)

    def domain(self, v: Var | int) -> tuple[int, int]:
        vid = v.id if isinstance(v, Var) else v
        return self._dom.get(vid, FULL)

    def domains(self) -> dict[int, tuple[int, int]]:
        return dict(self._dom)

    def bounds(self, t: Term) -> tuple[int, int] | None:
        """Interval of `t` under the current store, None if provably empty."""
        try:
            return _fwd(t, self._dom)
        except _Empty:
            return None

    def impose(self, c: ConstraintExpression) -> Verdict:
        """Push `c` and propagate. `c` stays on the stack whatever the verdict."""
        idx = len(self.entries)
        u = _simple_unary(c)
        # a constant comparison on a variable nothing else watches narrows
        # that one interval and cannot cascade
        lone = u is not None and u[0] not in self._watch
        if lone:
            v = c.lhs if type(c.lhs) is Var else c.rhs
            self._known_vars.setdefault(v.id, v)
            self._watch[v.id] = [idx]
            vids: tuple[int, ...] = (v.id,)
        else:
            vs = c.variables()
            vids = tuple(v.id for v in vs)
            for v in vs:
                self._known_vars.setdefault(v.id, v)
                self._watch.setdefault(v.id, []).append(idx)
        self.entries.append(c)
        self._entry_vars.append(vids)
        self._entry_unary.append(u)
        log: dict = {}
        self._saved.append(log)
        if self._failed_at is not None:
            return Verdict.INCONSISTENT
        if lone:
            try:
                _relation(_Narrower(self._dom, log), c.cond, c.lhs, c.rhs)
                verdict = Verdict.CONSISTENT
            except _Empty:
                verdict = Verdict.INCONSISTENT
        else:
            verdict = self._propagate(deque([idx]), log)
        if not log:
            self._saved[-1] = None
        if verdict is Verdict.INCONSISTENT:
            self._failed_at = idx
        return verdict

    def refutes(self, c: ConstraintExpression) -> bool:
        """Whether :meth:`impose` of `c` would report Inconsistent right now.

        Leaves the stack untouched. A comparison of an unconstrained variable
        with a constant is decided by one trial revise; anything else is
        pushed and retracted.
        """
        if self._failed_at is not None:
            return True
        if type(c) is Constraint:
            u = _simple_unary(c)
            if u is not None and u[0] not in self._watch:
                return _label_unary(self._dom.get(u[0], FULL), ((u[1], u[2]),)) is None
        verdict = self.impose(c)
        self.retract()
        return verdict is Verdict.INCONSISTENT

    def retract(self) -> ConstraintExpression:
        if not self.entries:
            raise IndexError("retract on an empty constraint stack")
        c = self.entries.pop()
        idx = len(self.entries)
        self._entry_unary.pop()
        for vid in self._entry_vars.pop():
            lst = self._watch[vid]
            lst.pop()
            if not lst:
                del self._watch[vid]
        log = self._saved.pop()
        if log:
            dom = self._dom
            for vid, old in log.items():
                if old is None:
                    dom.pop(vid, None)
                else:
                    dom[vid] = old
        if self._failed_at is not None and self._failed_at >= idx:
            self._failed_at = None
        return c

    def check(self) -> Verdict:
        """Propagate all entries from scratch without touching this stack."""
        trial = ConstraintStack(self.cap)
        trial._load(self.entries)
        return trial._propagate(deque(range(len(self.entries))), {})

    def _load(self, entries: Iterable[ConstraintExpression]) -> None:
        for c in entries:
            idx = len(self.entries)
            vs = c.variables()
            for v in vs:
                self._known_vars.setdefault(v.id, v)
                self._watch.setdefault(v.id, []).append(idx)
            self.entries.append(c)
            self._entry_vars.append(tuple(v.id for v in vs))
            self._entry_unary.append(_simple_unary(c))
            self._saved.append(None)

    def _propagate(self, pending: deque, log: dict) -> Verdict:
        queued = set(pending)
        n = _Narrower(self._dom, log)
        budget = self.cap
        entries, watch = self.entries, self._watch
        while pending:
            idx = pending.popleft()
            queued.discard(idx)
            n.changed.clear()
            try:
                _revise(n, entries[idx])
            except _Empty:
                return Verdict.INCONSISTENT
            for vid in n.changed:
                budget -= 1
                if budget < 0:
                    return Verdict.UNKNOWN
                for j in watch.get(vid, ()):
                    if j not in queued:
                        queued.add(j)
                        pending.append(j)
        return Verdict.CONSISTENT

    def variables(self) -> list[Var]:
        """Variables occurring in the current entries, by id."""
        return [self._known_vars[vid] for vid in sorted(self._watch)]

    # -- labeling ---------------------------------------------------------

    def label(self, vars: Iterable[Var], budget: int = DEFAULT_LABEL_BUDGET) -> dict[Var, int] | None:
        """Smallest satisfying assignment to `vars`, or None if none exists.

        Variables are assigned in the given order, each trying values upward
        from its current lower bound; other variables of the stack are
        labelled afterwards (by id) so the full conjunction is witnessed.
        Raises :class:`LabelingExhausted` once `budget` search nodes are used.
        """
        wanted = list(dict.fromkeys(vars))
        if self._failed_at is not None:
            return None
        for i, vids in enumerate(self._entry_vars):
            if not vids and not self.entries[i].holds({}):
                return None
        seen = set(wanted)
        order = wanted + [v for v in self.variables() if v not in seen]

        # variables constrained only by comparisons with constants are
        # labelled in closed form; everything else goes through search
        hard: set[int] = set()
        for u, vids in zip(self._entry_unary, self._entry_vars):
            if u is None:
                hard.update(vids)
        unary: dict[int, list[tuple[Cond, int]]] = {}
        hard_entries: list[tuple[ConstraintExpression, tuple[int, ...]]] = []
        for c, u, vids in zip(self.entries, self._entry_unary, self._entry_vars):
            if u is not None and u[0] not in hard:
                unary.setdefault(u[0], []).append((u[1], u[2]))
            elif vids:
                hard_entries.append((c, vids))

        binding: dict[Var, int] = {}
        hard_vars = []
        for v in order:
            if v.id in hard:
                hard_vars.append(v)
                continue
            x = _label_unary(self._dom.get(v.id, FULL), unary.get(v.id, ()))
            if x is None:
                return None
            binding[v] = x
        nodes = [budget]
        for comp_vars, comp_entries in _components(hard_vars, hard_entries):
            sub = _label_component(self, comp_vars, comp_entries, nodes)
            if sub is None:
                return None
            binding.update(sub)
        return {v: binding[v] for v in wanted}


def _label_unary(dom: tuple[int, int], tests) -> int | None:
    """Smallest value in `dom` passing every ``(cond, k)`` comparison."""
    lo, hi = dom
    banned = set()
    for cond, k in tests:
        if cond is Cond.EQ:
            lo, hi = max(lo, k), min(hi, k)
        elif cond is Cond.NE:
            banned.add(k)
        elif cond is Cond.LT:
            hi = min(hi, k - 1)
        elif cond is Cond.LE:
            hi = min(hi, k)
        elif cond is Cond.GT:
            lo = max(lo, k + 1)
        else:
            lo = max(lo, k)
    while lo in banned:
        lo += 1
    return lo if lo <= hi else None


def _components(order: list[Var], entries) -> list[tuple[list[Var], list[ConstraintExpression]]]:
    parent = {v.id: v.id for v in order}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, vids in entries:
        if len(vids) > 1:
            r = find(vids[0])
            for o in vids[1:]:
                ro = find(o)
                if ro != r:
                    parent[ro] = r
    groups: dict[int, list[Var]] = {}
    for v in order:
        groups.setdefault(find(v.id), []).append(v)
    members: dict[int, list[ConstraintExpression]] = {}
    for c, vids in entries:
        members.setdefault(find(vids[0]), []).append(c)
    return [(vs, members.get(root, [])) for root, vs in groups.items()]


def _simple_unary(c: ConstraintExpression) -> tuple[int, Cond, int] | None:
    if type(c) is not Constraint:
        return None
    if type(c.lhs) is Var and type(c.rhs) is int:
        return c.lhs.id, c.cond, c.rhs
    if type(c.rhs) is Var and type(c.lhs) is int:
        return c.rhs.id, c.cond.swap(), c.lhs
    return None


def _label_component(stack: ConstraintStack, order: list[Var], entries, nodes: list[int]):
    if _difference_infeasible(entries, stack._dom):
        return None

    sub = ConstraintStack(stack.cap)
    for v in order:
        if v.id in stack._dom:
            sub._dom[v.id] = stack._dom[v.id]
    sub._load(entries)
    if sub._propagate(deque(range(len(entries))), {}) is Verdict.INCONSISTENT:
        return None
    binding: dict[Var, int] = {}
    if _search(sub, order, 0, binding, entries, nodes):
        return binding
    return None


def _search(sub: ConstraintStack, order: list[Var], i: int, binding: dict, entries, nodes: list[int]) -> bool:
    if i == len(order):
        return all(c.holds(binding) for c in entries)
    v = order[i]
    pushed = 0
    try:
        while True:
            nodes[0] -= 1
            if nodes[0] < 0:
                raise LabelingExhausted(f"labeling budget exhausted at {v}")
            lo, hi = sub.domain(v)
            if sub.impose(Constraint(Cond.EQ, v, lo)) is not Verdict.INCONSISTENT:
                binding[v] = lo
                if _search(sub, order, i + 1, binding, entries, nodes):
                    sub.retract()
                    return True
                del binding[v]
            sub.retract()
            if lo == hi:
                return False
            pushed += 1
            if sub.impose(Constraint(Cond.GT, v, lo)) is Verdict.INCONSISTENT:
                return False
    finally:
        for _ in range(pushed):
            sub.retract()


def _difference_infeasible(entries, dom) -> bool:
    """Negative-cycle test over the ``x - y <= k`` fragment (Bellman-Ford).

    Catches cyclic strict orderings such as ``x < y, y < x`` whose bounds
    propagation would otherwise creep one unit at a time.
    """
    edges: list[tuple[int, int, int]] = []  # (u, v, w): v - u <= w
    nodes: set[int] = set()
    for c in entries:
        if type(c) is not Constraint or type(c.lhs) is not Var or type(c.rhs) is not Var:
            continue
        x, y, cond = c.lhs.id, c.rhs.id, c.cond
        if cond is Cond.GT or cond is Cond.GE:
            x, y, cond = y, x, cond.swap()
        if cond is Cond.LT:
            edges.append((y, x, -1))
        elif cond is Cond.LE:
            edges.append((y, x, 0))
        elif cond is Cond.EQ:
            edges.append((y, x, 0))
            edges.append((x, y, 0))
        else:
            continue
        nodes.update((x, y))
    if not edges:
        return False
    zero = None  # the origin node for interval bounds
    for vid in nodes:
        lo, hi = dom.get(vid, FULL)
        edges.append((zero, vid, hi))
        edges.append((vid, zero, -lo))
    dist = {n: 0 for n in nodes}
    dist[zero] = 0
    for _ in range(len(dist)):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return False
    return True


def brute_force_models(entries: list[ConstraintExpression], vars: list[Var], lo: int, hi: int) -> Iterator[dict[Var, int]]:
    """All assignments of `vars` over ``[lo, hi]`` satisfying every entry.

    Small-scale reference only: the box size grows as ``(hi-lo+1)**len(vars)``.
    """
    import itertools

    for values in itertools.product(range(lo, hi + 1), repeat=len(vars)):
        b = dict(zip(vars, values))
        if all(c.holds(b) for c in entries):
            yield b
