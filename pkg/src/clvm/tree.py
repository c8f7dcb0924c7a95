"""Explicit, lazily expanded search tree.

Every node remembers where its region of execution starts (active frame id,
pc and the constraint on the edge from its parent) plus two trails, exactly
one of which is populated once the node has run. ``backward_trail`` holds
undo records while the VM state includes the node's effects;
``forward_trail`` holds redo records once navigation has moved above it.

The first record of a node's trail is the jump of the active frame to the
node's resume pc, so undoing a node's trail restores its parent's state
exactly, pc included.
"""

from __future__ import annotations

from typing import Iterator

from clvm import ir
from clvm.constraints import ConstraintExpression, DEFAULT_LABEL_BUDGET
from clvm.vm import (
    BudgetExceeded,
    Choice,
    EngineError,
    ExceptionThrown,
    Failed,
    Solution,
    ValueReturned,
    VmState,
    apply_trail,
    execute_until_event,
    ground,
)

_NO_TRAIL: tuple = ()


class STNode:
    __slots__ = (
        "node_id", "parent", "index", "depth", "frame_ref", "pc", "constraint",
        "backward_trail", "forward_trail",
    )

    kind = "node"

    def __init__(self, node_id: int, parent: "ChoiceNode | None", index: int, depth: int,
                 frame_ref: int, pc: int, constraint: ConstraintExpression | None):
        self.node_id = node_id
        self.parent = parent
        self.index = index  # position among the parent's children
        self.depth = depth  # number of Choice ancestors
        self.frame_ref = frame_ref
        self.pc = pc
        self.constraint = constraint
        self.backward_trail: list | tuple = _NO_TRAIL
        self.forward_trail: list | tuple = _NO_TRAIL

    def _adopt(self, other: "STNode") -> None:
        for name in ("node_id", "parent", "index", "depth", "frame_ref", "pc", "constraint"):
            setattr(self, name, getattr(other, name))

    def ancestors(self) -> Iterator["STNode"]:
        """The node itself, then its ancestors up to the root."""
        n: STNode | None = self
        while n is not None:
            yield n
            n = n.parent

    def __repr__(self) -> str:
        return f"{type(self).__name__}#{self.node_id}(depth={self.depth}, pc={self.pc})"


class Unevaluated(STNode):
    __slots__ = ()
    kind = "unevaluated"


class ChoiceNode(STNode):
    __slots__ = ("children",)
    kind = "choice"

    def __init__(self, *args):
        super().__init__(*args)
        self.children: list[STNode] = []

    @property
    def next_unexplored(self) -> int:
        """Index of the first child not evaluated yet (len(children) if none)."""
        for i, c in enumerate(self.children):
            if isinstance(c, Unevaluated):
                return i
        return len(self.children)


class ValueNode(STNode):
    __slots__ = ("solution",)
    kind = "value"


class ExceptionNode(STNode):
    __slots__ = ("solution",)
    kind = "exception"


class FailNode(STNode):
    __slots__ = ("reason",)
    kind = "fail"


class SearchTree:
    """Holds the root and hands out stable node ids."""

    def __init__(self, program: ir.Program, state: VmState):
        self.program = program
        self._next_id = 0
        self.root: STNode = Unevaluated(self.new_id(), None, 0, 0, state.frames[-1].frame_id,
                                        state.frames[-1].pc, None)

    def new_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def nodes(self) -> Iterator[STNode]:
        """Pre-order walk, children left to right."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            if isinstance(n, ChoiceNode):
                stack.extend(reversed(n.children))

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in ("choice", "value", "exception", "fail", "unevaluated")}
        for n in self.nodes():
            out[n.kind] += 1
        return out


def new_root(program: ir.Program, state: VmState | None = None) -> tuple[SearchTree, VmState]:
    state = state if state is not None else VmState(program)
    return SearchTree(program, state), state


def evaluate_node(tree: SearchTree, node: Unevaluated, state: VmState,
                  label_budget: int = DEFAULT_LABEL_BUDGET) -> STNode:
    """Run `node`'s region and splice its evaluated counterpart into the tree.

    The VM must sit at `node` (its constraint imposed). On
    :class:`BudgetExceeded` the partial run is undone, the node stays
    unevaluated and the exception propagates.
    """
    if not isinstance(node, Unevaluated):
        raise EngineError(f"{node!r} is already evaluated")
    if node.forward_trail:
        raise EngineError(f"the VM is not positioned at {node!r}")
    trail = node.backward_trail
    if not trail:
        trail = []
        state.jump(node.frame_ref, node.pc, trail)
        node.backward_trail = trail
    mark = len(trail)
    try:
        event = execute_until_event(state, trail)
    except BudgetExceeded:
        apply_trail(state, trail[mark:])
        del trail[mark:]
        raise

    args = (node.node_id, node.parent, node.index, node.depth, node.frame_ref, node.pc,
            node.constraint)
    new: STNode
    if isinstance(event, Choice):
        new = ChoiceNode(*args)
        fid = state.frames[-1].frame_id
        new.children = [
            Unevaluated(tree.new_id(), new, i, node.depth + 1, fid, alt.resume_pc, alt.constraint)
            for i, alt in enumerate(event.alternatives)
        ]
    elif isinstance(event, Failed):
        new = FailNode(*args)
        new.reason = event.reason
    else:
        is_value = isinstance(event, ValueReturned)
        g = ground(state, event.value if is_value else None, label_budget)
        if g is None:
            new = FailNode(*args)
            new.reason = "no-model"
        elif is_value:
            new = ValueNode(*args)
            new.solution = Solution("value", g[0], g[1], g[2])
        else:
            new = ExceptionNode(*args)
            new.solution = Solution("exception", event.message, g[1], g[2])
    new.backward_trail = trail
    node.backward_trail = _NO_TRAIL
    if new.parent is None:
        tree.root = new
    else:
        new.parent.children[new.index] = new
    return new


# ---------------------------------------------------------------------------
# navigation


def navigate_upwards(frm: STNode, to: STNode, state: VmState) -> None:
    """Undo every node from `frm` (inclusive) up to `to` (exclusive)."""
    n = frm
    while n is not to:
        if n is None:
            raise EngineError(f"{to!r} is not an ancestor of {frm!r}")
        if n.forward_trail:
            raise EngineError(f"{n!r} is not applied to the VM")
        if n.backward_trail:
            n.forward_trail = apply_trail(state, n.backward_trail)
            n.backward_trail = _NO_TRAIL
        if n.constraint is not None and state.constraints.retract() is not n.constraint:
            raise EngineError(f"constraint stack out of sync at {n!r}")
        n = n.parent


def navigate_downwards(frm: STNode, to: STNode, state: VmState) -> None:
    """Redo every node below `frm` down to `to` (inclusive)."""
    path = []
    n = to
    while n is not frm:
        if n is None:
            raise EngineError(f"{frm!r} is not an ancestor of {to!r}")
        path.append(n)
        n = n.parent
    for n in reversed(path):
        if n.backward_trail:
            raise EngineError(f"{n!r} is already applied to the VM")
        if n.constraint is not None:
            state.constraints.impose(n.constraint)
        if n.forward_trail:
            n.backward_trail = apply_trail(state, n.forward_trail)
            n.forward_trail = _NO_TRAIL


def find_common_ancestor(a: STNode, b: STNode) -> STNode:
    """Deepest node that is an ancestor-or-self of both `a` and `b`.

    Costs O(distance between the nodes), not O(depth).
    """
    while a.depth > b.depth:
        a = a.parent
    while b.depth > a.depth:
        b = b.parent
    while a is not b:
        a, b = a.parent, b.parent
        if a is None or b is None:
            raise EngineError("nodes belong to different trees")
    return a


def move(frm: STNode, to: STNode, state: VmState) -> None:
    """Reposition the VM from node `frm` to node `to` via their common ancestor."""
    if frm is to:
        return
    anc = find_common_ancestor(frm, to)
    navigate_upwards(frm, anc, state)
    navigate_downwards(anc, to, state)


# ---------------------------------------------------------------------------
# export


def _label(n: STNode) -> str:
    if isinstance(n, ChoiceNode):
        return "choice"
    if isinstance(n, ValueNode):
        s = n.solution
        return f"value {s.payload}" if s.grounded else "value (ungrounded)"
    if isinstance(n, ExceptionNode):
        return f"throw {n.solution.payload}"
    if isinstance(n, FailNode):
        return f"fail ({n.reason})"
    return "?"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(tree: SearchTree) -> str:
    """Graphviz rendering; node names are the stable node ids and edges
    carry the decision constraint."""
    shapes = {"choice": "diamond", "value": "box", "exception": "octagon",
              "fail": "box", "unevaluated": "ellipse"}
    lines = ["digraph search_tree {", "  node [fontname=monospace];"]
    for n in tree.nodes():
        attrs = f'label="{_dot_escape(_label(n))}", shape={shapes[n.kind]}'
        if n.kind == "fail":
            attrs += ", style=dashed"
        elif n.kind == "unevaluated":
            attrs += ", style=dotted"
        lines.append(f"  n{n.node_id} [{attrs}];")
        if n.parent is not None:
            lines.append(f'  n{n.parent.node_id} -> n{n.node_id} [label="{_dot_escape(str(n.constraint))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
