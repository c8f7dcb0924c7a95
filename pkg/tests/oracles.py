"""Reference computations that share no code with the package.

Used to derive the values frozen into the tests and to cross-check the
engine in property sweeps.
"""

from __future__ import annotations

import ctypes
import itertools
import operator


def int32(x: int) -> int:
    """Two's-complement wrap via the C type."""
    return ctypes.c_int32(x).value


def jvm_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError
    q = abs(a) // abs(b)
    return int32(q if (a < 0) == (b < 0) else -q)


def jvm_rem(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError
    return int32(a - b * int32(jvm_div(a, b)))


_ARITH = {
    "+": lambda a, b: int32(a + b),
    "-": lambda a, b: int32(a - b),
    "*": lambda a, b: int32(a * b),
    "/": jvm_div,
    "%": jvm_rem,
}
_CMP = {"eq": operator.eq, "ne": operator.ne, "lt": operator.lt,
        "le": operator.le, "gt": operator.gt, "ge": operator.ge}


def evaluate(term, env: dict[int, int]) -> int:
    """Evaluate a term tree by duck typing: ints, `.id` variables,
    `.op/.lhs/.rhs` binary nodes and `.operand` negations."""
    if isinstance(term, int):
        return term
    if hasattr(term, "id"):
        return env[term.id]
    if hasattr(term, "operand"):
        return int32(-evaluate(term.operand, env))
    return _ARITH[term.op](evaluate(term.lhs, env), evaluate(term.rhs, env))


def satisfied(expr, env: dict[int, int]) -> bool:
    """Truth of a constraint expression; division by zero counts as false."""
    if hasattr(expr, "parts"):
        results = [satisfied(p, env) for p in expr.parts]
        return any(results) if type(expr).__name__ == "AnyOf" else all(results)
    try:
        return _CMP[expr.cond.value](evaluate(expr.lhs, env), evaluate(expr.rhs, env))
    except ZeroDivisionError:
        return False


def models(exprs, var_ids: list[int], lo: int = -20, hi: int = 20):
    """Every assignment of `var_ids` over [lo, hi] satisfying all `exprs`."""
    for values in itertools.product(range(lo, hi + 1), repeat=len(var_ids)):
        env = dict(zip(var_ids, values))
        if all(satisfied(e, env) for e in exprs):
            yield env


def send_more_money() -> list[dict[str, int]]:
    """All digit assignments of SEND + MORE = MONEY with S, M nonzero."""
    out = []
    for digits in itertools.permutations(range(10), 8):
        s, e, n, d, m, o, r, y = digits
        if s == 0 or m == 0:
            continue
        send = 1000 * s + 100 * e + 10 * n + d
        more = 1000 * m + 100 * o + 10 * r + e
        money = 10000 * m + 1000 * o + 100 * n + 10 * e + y
        if send + more == money:
            out.append(dict(zip("SENDMORY", digits)))
    return out


def common_ancestor_by_paths(a, b):
    """Deepest node on both root paths (parent links only)."""
    def root_path(n):
        path = []
        while n is not None:
            path.append(n)
            n = n.parent
        return path[::-1]

    pa, pb = root_path(a), root_path(b)
    common = None
    for x, y in zip(pa, pb):
        if x is not y:
            break
        common = x
    return common


def three_partitions(items: list[int]) -> int:
    """Number of ordered assignments of items to 3 bins with equal sums."""
    target, rem = divmod(sum(items), 3)
    if rem:
        return 0
    count = 0
    for bins in itertools.product(range(3), repeat=len(items)):
        sums = [0, 0, 0]
        for w, b in zip(items, bins):
            sums[b] += w
        count += sums == [target] * 3
    return count
