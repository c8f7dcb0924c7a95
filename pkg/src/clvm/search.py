"""Search strategies and the pull-based solution stream."""

from __future__ import annotations

import enum
import gc
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Union

from clvm import ir
from clvm.constraints import DEFAULT_CAP, DEFAULT_LABEL_BUDGET, ConstraintStack
from clvm.tree import (
    ChoiceNode,
    ExceptionNode,
    SearchTree,
    STNode,
    ValueNode,
    evaluate_node,
    move,
    navigate_upwards,
)
from clvm.vm import BudgetExceeded, Solution, VmState


class Strategy(enum.Enum):
    DFS = "dfs"
    BFS = "bfs"
    IDDFS = "iddfs"


class StreamStatus(enum.Enum):
    EXHAUSTED = "exhausted"
    BUDGET_EXCEEDED = "budget_exceeded"


EXHAUSTED = StreamStatus.EXHAUSTED
BUDGET_EXCEEDED = StreamStatus.BUDGET_EXCEEDED


@dataclass
class SearchBudget:
    max_steps: int = 1_000_000
    max_solutions: int | None = None
    wall_time: float | None = None  # seconds
    label_budget: int = DEFAULT_LABEL_BUDGET

    def __post_init__(self) -> None:
        for name in ("max_steps", "max_solutions", "wall_time", "label_budget"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")


# ---------------------------------------------------------------------------
# frontiers


class _DepthFirst:
    def __init__(self, root: STNode):
        self.stack: list[STNode] = [root]

    def pop(self) -> STNode | None:
        return self.stack.pop() if self.stack else None

    def push_back(self, node: STNode) -> None:
        self.stack.append(node)

    def expand(self, node: ChoiceNode) -> None:
        self.stack.extend(reversed(node.children))

    def pending(self) -> list[STNode]:
        return list(self.stack)


class _BreadthFirst:
    def __init__(self, root: STNode):
        self.queue: deque[STNode] = deque([root])

    def pop(self) -> STNode | None:
        return self.queue.popleft() if self.queue else None

    def push_back(self, node: STNode) -> None:
        self.queue.appendleft(node)

    def expand(self, node: ChoiceNode) -> None:
        self.queue.extend(node.children)

    def pending(self) -> list[STNode]:
        return list(self.queue)


class _IterativeDeepening(_DepthFirst):
    """Depth-bounded DFS; nodes at the bound wait until the bound is raised."""

    def __init__(self, root: STNode, start: int, increment: int):
        if start < 1 or increment < 1:
            raise ValueError("iterative deepening needs start >= 1 and increment >= 1")
        super().__init__(root)
        self.bound = start
        self.increment = increment
        self.deferred: list[STNode] = []

    def pop(self) -> STNode | None:
        while True:
            while self.stack:
                node = self.stack.pop()
                if node.depth < self.bound:
                    return node
                self.deferred.append(node)
            if not self.deferred:
                return None
            self.bound += self.increment
            self.stack = self.deferred[::-1]
            self.deferred = []

    def pending(self) -> list[STNode]:
        return self.stack + self.deferred


# ---------------------------------------------------------------------------
# stream


class SolutionStream:
    """Lazily produces solutions of `program` in strategy order.

    Each pull does only the work needed for the next solution. With
    `strict_revert` the VM returns to the root after each emitted solution
    instead of staying parked at the leaf.
    """

    def __init__(self, program: ir.Program, strategy: Strategy | str = Strategy.DFS,
                 budget: SearchBudget | None = None, iddfs: tuple[int, int] = (3, 2),
                 strict_revert: bool = False, cap: int = DEFAULT_CAP):
        self.program = program
        self.strategy = Strategy(strategy)
        self.budget = budget if budget is not None else SearchBudget()
        self.strict_revert = strict_revert
        self.state = VmState(program, ConstraintStack(cap), self.budget.max_steps)
        self.tree = SearchTree(program, self.state)
        self.cursor: STNode = self.tree.root
        if self.strategy is Strategy.DFS:
            self.frontier = _DepthFirst(self.tree.root)
        elif self.strategy is Strategy.BFS:
            self.frontier = _BreadthFirst(self.tree.root)
        else:
            self.frontier = _IterativeDeepening(self.tree.root, *iddfs)
        self.evaluations = 0
        self.emitted = 0
        self.elapsed = 0.0
        self._started: float | None = None
        self._exhausted = False

    @property
    def steps(self) -> int:
        return self.state.steps

    def extend_budget(self, max_steps: int | None = None, wall_time: float | None = None) -> None:
        """Raise the limits so a stream stopped by its budget can resume."""
        if max_steps is not None:
            self.budget.max_steps = max_steps
            self.state.max_steps = max_steps
        if wall_time is not None:
            self.budget.wall_time = wall_time
            if self._started is not None:
                self.state.deadline = self._started + wall_time

    def _over_budget(self) -> bool:
        s = self.state
        if s.steps >= s.max_steps:
            return True
        return s.deadline is not None and time.monotonic() > s.deadline

    def next_solution(self) -> Union[Solution, StreamStatus]:
        if self._exhausted:
            return EXHAUSTED
        if self._started is None:
            self._started = time.monotonic()
            if self.budget.wall_time is not None:
                self.state.deadline = self._started + self.budget.wall_time
        t0 = time.perf_counter()
        # the retained tree holds millions of small objects and no garbage
        # cycles; letting the cyclic collector rescan it costs more than the
        # search itself on deep trees
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            return self._pull()
        finally:
            if gc_was_enabled:
                gc.enable()
            self.elapsed += time.perf_counter() - t0

    def _pull(self) -> Union[Solution, StreamStatus]:
        state = self.state
        while True:
            if self._over_budget():
                return BUDGET_EXCEEDED
            node = self.frontier.pop()
            if node is None:
                self._exhausted = True
                return EXHAUSTED
            move(self.cursor, node, state)
            self.cursor = node
            try:
                new = evaluate_node(self.tree, node, state, self.budget.label_budget)
            except BudgetExceeded:
                self.frontier.push_back(node)
                return BUDGET_EXCEEDED
            self.evaluations += 1
            self.cursor = new
            if isinstance(new, ChoiceNode):
                self.frontier.expand(new)
            elif isinstance(new, (ValueNode, ExceptionNode)):
                self.emitted += 1
                if self.strict_revert:
                    navigate_upwards(new, self.tree.root, state)
                    self.cursor = self.tree.root
                return new.solution

    def __iter__(self) -> Iterator[Solution]:
        while True:
            r = self.next_solution()
            if isinstance(r, StreamStatus):
                return
            yield r

    @property
    def exhausted(self) -> bool:
        return self._exhausted

    def pending(self) -> list[STNode]:
        return self.frontier.pending()


def open_stream(program: ir.Program, strategy: Strategy | str = Strategy.DFS,
                budget: SearchBudget | None = None, iddfs: tuple[int, int] = (3, 2),
                **kwargs) -> SolutionStream:
    return SolutionStream(program, strategy, budget, iddfs, **kwargs)


def next_solution(stream: SolutionStream) -> Union[Solution, StreamStatus]:
    return stream.next_solution()


def collect_all(stream: SolutionStream, limit: int | None = None) -> tuple[list[Solution], bool]:
    """Pull up to `limit` solutions. Returns ``(solutions, truncated)``;
    `truncated` is set when the budget stopped the search."""
    out: list[Solution] = []
    if limit is None:
        limit = stream.budget.max_solutions
    while limit is None or len(out) < limit:
        r = stream.next_solution()
        if r is EXHAUSTED:
            return out, False
        if r is BUDGET_EXCEEDED:
            return out, True
        out.append(r)
    return out, False
