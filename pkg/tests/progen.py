"""Random finite programs in assembly text.

Termination is structural: jumps only go forward and function `f<i>` only
calls `f<j>` with j > i. Every free variable is boxed into a small range
right after it is minted (out-of-range paths fail), so labeling always
works over tiny domains.
"""

from __future__ import annotations

import random

CONDS = ["eq", "ne", "lt", "le", "gt", "ge"]


class _Fn:
    def __init__(self, name: str, nlocals: int):
        self.name = name
        self.nlocals = nlocals
        self.lines: list[str] = []
        self.labels = 0
        self.size = 0

    def emit(self, text: str) -> None:
        self.lines.append(f"  {text}")
        self.size += 1

    def label(self) -> str:
        self.labels += 1
        return f"l{self.labels}"

    def place(self, label: str) -> None:
        self.lines.append(f"{label}:")


def generate_program(rng: random.Random, max_free: int = 6, max_instructions: int = 40,
                     helpers: int | None = None, allow_throw: bool = True,
                     allow_division: bool = True, box: int = 3) -> str:
    """Assembly for a random terminating program with at most `max_free`
    `free` instructions in total and at most `max_instructions` per function."""
    if helpers is None:
        helpers = rng.randint(0, 2)
    names = [f"f{i}" for i in range(helpers + 1)]
    free_left = [max_free]
    out = [f".entry {names[0]}"]
    for i, name in enumerate(names):
        fn = _Fn(name, rng.randint(2, 4))
        _body(rng, fn, names[i + 1:], free_left, max_instructions, allow_throw, allow_division, box)
        out.append(f"fn {name}/{fn.nlocals}:")
        out.extend(fn.lines)
    return "\n".join(out) + "\n"


def _body(rng, fn: _Fn, callees, free_left, max_instructions, allow_throw, allow_division, box):
    pending: list[str] = []  # forward labels not placed yet
    budget = max_instructions - 4  # room for the final return and the fail block
    fail_label = "bad"

    minted: list[int] = []  # slots that received a free variable

    def slot() -> int:
        if minted and rng.random() < 0.85:
            return rng.choice(minted)
        return rng.randrange(fn.nlocals)

    def operand() -> None:
        if rng.random() < 0.3:
            fn.emit(f"const {rng.randint(-box, box)}")
        else:
            fn.emit(f"load {slot()}")

    while fn.size < budget:
        room = budget - fn.size
        if room < 4:
            break
        kind = "free" if not minted and free_left[0] > 0 else rng.choices(
            ["free", "arith", "branch", "ifzero", "switch", "call", "land", "exit"],
            weights=[6 if not minted else 2, 3, 4, 2, 1, 1 if callees else 0, 2 if pending else 0,
                     0.5],
        )[0]
        if kind == "free" and free_left[0] > 0 and room >= 8:
            s = rng.randrange(fn.nlocals)
            minted.append(s)
            lo = rng.randint(-box, 0)
            hi = rng.randint(0, box)
            free_left[0] -= 1
            fn.emit(f"free {s}")
            fn.emit(f"load {s}")
            fn.emit(f"const {lo}")
            fn.emit(f"if_icmplt {fail_label}")
            fn.emit(f"load {s}")
            fn.emit(f"const {hi}")
            fn.emit(f"if_icmpgt {fail_label}")
        elif kind == "arith" and room >= 4:
            ops = ["add", "sub", "mul", "neg"] + (["div", "rem"] if allow_division else [])
            op = rng.choice(ops)
            operand()
            if op != "neg":
                operand()
            fn.emit(op)
            fn.emit(f"store {slot()}")
        elif kind == "branch" and room >= 3:
            operand()
            operand()
            target = fn.label()
            pending.append(target)
            fn.emit(f"if_icmp{rng.choice(CONDS)} {target}")
        elif kind == "ifzero" and room >= 2:
            fn.emit(f"load {slot()}")
            target = fn.label()
            pending.append(target)
            fn.emit(f"if{rng.choice(CONDS)} {target}")
        elif kind == "switch" and room >= 2:
            fn.emit(f"load {slot()}")
            labels = [fn.label() for _ in range(rng.randint(1, 3))]
            pending.extend(labels)
            default = rng.choice(labels + [fail_label])
            if rng.random() < 0.5:
                lo = rng.randint(-1, 1)
                fn.emit(f"tableswitch {lo} {lo + len(labels) - 1} {' '.join(labels)} default {default}")
            else:
                keys = rng.sample(range(-box, box + 1), len(labels))
                pairs = " ".join(f"{k}:{l}" for k, l in zip(keys, labels))
                fn.emit(f"lookupswitch {pairs} default {default}")
        elif kind == "call" and room >= 2:
            fn.emit(f"call {rng.choice(callees)}")
            fn.emit(f"store {slot()}")
        elif kind == "land":
            fn.place(pending.pop(rng.randrange(len(pending))))
        elif kind == "exit" and room >= 2:
            end = rng.random()
            if end < 0.5:
                fn.emit(f"load {slot()}")
                fn.emit("return")
            elif end < 0.75 or not allow_throw:
                fn.emit("fail")
            else:
                fn.emit(f'throw "t{rng.randint(0, 9)}"')
    for label in pending:
        fn.place(label)
    fn.emit(f"load {slot()}")
    fn.emit("return")
    fn.place(fail_label)
    fn.emit("fail")


def random_program(seed: int, **kwargs):
    from clvm.ir import parse_program

    return parse_program(generate_program(random.Random(seed), **kwargs))


def random_tree(rng: random.Random, size: int) -> list:
    """Bare choice nodes wired into a random tree; returns them in creation order.
    Half the parents come from the 50 newest nodes, which makes deep chains."""
    from clvm.tree import ChoiceNode

    root = ChoiceNode(0, None, 0, 0, 0, 0, None)
    nodes = [root]
    for i in range(1, size):
        parent = rng.choice(nodes[-50:] if rng.random() < 0.5 else nodes)
        node = ChoiceNode(i, parent, len(parent.children), parent.depth + 1, 0, 0, None)
        parent.children.append(node)
        nodes.append(node)
    return nodes
