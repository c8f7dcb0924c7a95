"""Acceptance criteria. Each test prints one ``[PASS]``/``[FAIL]`` line
(visible even under output capture) before asserting."""

import collections
import random
import statistics
import time

import pytest

from clvm.constraints import BinOp, Constraint, ConstraintStack, Negate, Var, Verdict
from clvm.ir import Cond, load_program
from clvm.search import SearchBudget, Strategy, collect_all, open_stream
from clvm.tree import FailNode, find_common_ancestor, move, navigate_downwards, navigate_upwards
from clvm.vm import fingerprint, run_oracle
import oracles
from progen import random_program, random_tree

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}  {detail}")
        assert ok, detail
    return report


def corpus(name):
    return load_program(f"corpus/{name}.mas")


def multiset(solutions):
    return collections.Counter(
        (s.kind, s.payload, tuple(sorted((v.id, k) for v, k in (s.binding or {}).items())))
        for s in solutions)


def test_two_coins_tree(verdict):
    t0 = time.perf_counter()
    s = open_stream(corpus("flip_two_coins"))
    sols, truncated = collect_all(s)
    elapsed = time.perf_counter() - t0
    counts = s.tree.counts()
    edges = sorted(str(n.constraint) for n in s.tree.nodes() if n.constraint is not None)
    fails = [n for n in s.tree.nodes() if isinstance(n, FailNode)]
    ok = (counts["choice"] == 2 and counts["value"] == 2 and counts["fail"] == 1
          and counts["unevaluated"] == 0 and len(fails) == 1
          and edges == ["coin1 != 0", "coin1 == 0", "coin2 != 0", "coin2 == 0"]
          and [x.payload for x in sols] == [1, 0] and not truncated and elapsed < 1.0)
    verdict(1, "two-coin tree shape and order", ok,
            f"nodes={counts} order={[x.payload for x in sols]} {elapsed:.3f}s")


def test_non_terminating_coin(verdict):
    p = corpus("non_terminating_coin")
    found, times = {}, {}
    for strategy in Strategy:
        t0 = time.perf_counter()
        sols, truncated = collect_all(open_stream(p, strategy, SearchBudget(max_steps=10**6)))
        times[strategy.value] = time.perf_counter() - t0
        found[strategy.value] = len(sols)
        assert truncated
    ok = (found["dfs"] == 0 and found["bfs"] >= 100 and found["iddfs"] >= 100
          and found["iddfs"] >= 0.9 * found["bfs"] and all(t < 10 for t in times.values()))
    detail = " ".join(f"{k}={found[k]} ({times[k]:.1f}s)" for k in found)
    verdict(2, "non-terminating coin at 1e6 steps", ok, detail)


def test_trail_round_trip(verdict):
    checked = bad = 0
    for seed in range(1000):
        s = open_stream(random_program(seed), budget=SearchBudget(max_steps=20_000))
        collect_all(s)
        state, root, cursor = s.state, s.tree.root, s.cursor
        move(cursor, root, state)
        root_hash = fingerprint(state)
        for node in s.tree.nodes():
            navigate_downwards(root, node, state)
            h = fingerprint(state)
            navigate_upwards(node, root, state)
            bad += fingerprint(state) != root_hash
            navigate_downwards(root, node, state)
            bad += fingerprint(state) != h
            navigate_upwards(node, root, state)
            checked += 1
    verdict(3, "trail round trip on 1000 programs", bad == 0, f"{checked} nodes, {bad} mismatches")


def test_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    mismatches, total = [], 0
    for seed in range(50):
        p = random_program(10_000 + seed, max_free=7, max_instructions=80)
        expected, truncated = run_oracle(p, 200_000)
        runs = {s: collect_all(open_stream(p, s, SearchBudget(max_steps=200_000))) for s in Strategy}
        dfs = runs[Strategy.DFS][0]
        agree = (dfs == expected
                 and multiset(runs[Strategy.BFS][0]) == multiset(dfs) == multiset(runs[Strategy.IDDFS][0]))
        if truncated or any(t for _, t in runs.values()) or not agree:
            mismatches.append(seed)
        total += len(expected)
    elapsed = time.perf_counter() - t0
    verdict(4, "DFS equals the reference explorer", not mismatches and elapsed < 30,
            f"{total} solutions, mismatched seeds={mismatches} {elapsed:.1f}s")


def test_common_ancestor(verdict):
    rng = random.Random(2024)
    pairs = wrong = 0
    for size in (10, 100, 1000, 10_000):
        nodes = random_tree(rng, size)
        for _ in range(2500):
            a, b = rng.choice(nodes), rng.choice(nodes)
            wrong += find_common_ancestor(a, b) is not oracles.common_ancestor_by_paths(a, b)
            pairs += 1
    verdict(5, "common ancestor against root paths", wrong == 0, f"{pairs} pairs, {wrong} wrong")


def test_send_more_money(verdict):
    expected = oracles.send_more_money()
    t0 = time.perf_counter()
    sols, truncated = collect_all(open_stream(corpus("send_more_money")))
    elapsed = time.perf_counter() - t0
    got = [x.binding_by_name() for x in sols]
    ok = got == expected and not truncated and elapsed < 60
    verdict(6, "SEND+MORE=MONEY", ok, f"{got} {elapsed:.2f}s")


def random_system(rng):
    x, y = Var(0, "x"), Var(1, "y")

    def term(depth):
        r = rng.random()
        if depth == 0 or r < 0.4:
            return rng.choice([x, y, rng.randint(-20, 20)])
        if r < 0.5:
            return Negate(term(depth - 1))
        return BinOp(rng.choice("+-*"), term(depth - 1), term(depth - 1))

    box = [Constraint(Cond.GE, v, -20) for v in (x, y)] + [Constraint(Cond.LE, v, 20) for v in (x, y)]
    extra = [Constraint(rng.choice(list(Cond)), term(2), term(2)) for _ in range(rng.randint(1, 4))]
    return (x, y), box + extra


def test_constraint_soundness(verdict):
    rng = random.Random(77)
    disagreements = []
    for i in range(500):
        vs, system = random_system(rng)
        truth = list(oracles.models(system, [0, 1], -20, 20))
        s = ConstraintStack()
        verdicts = [s.impose(c) for c in system]
        got = s.label(list(vs))
        if Verdict.INCONSISTENT in verdicts and truth:
            disagreements.append((i, "inconsistent"))
        if got is None and truth:
            disagreements.append((i, "missed model"))
        if got is not None:
            env = {v.id: k for v, k in got.items()}
            if env not in truth:
                disagreements.append((i, "bad model"))
    verdict(7, "500 random systems against brute force", not disagreements, f"{disagreements[:5]}")


def test_three_partition_speed(verdict):
    p = corpus("three_partition")
    budget = 2_000_000

    def time_dfs():
        t0 = time.perf_counter()
        sols, _ = collect_all(open_stream(p, "dfs", SearchBudget(max_steps=budget)))
        return time.perf_counter() - t0, sols

    def time_oracle():
        t0 = time.perf_counter()
        sols, _ = run_oracle(p, budget)
        return time.perf_counter() - t0, sols

    for _ in range(2):
        time_dfs()
        time_oracle()
    dfs_times, oracle_times = [], []
    for _ in range(20):
        t, dfs = time_dfs()
        dfs_times.append(t)
        t, ref = time_oracle()
        oracle_times.append(t)
    ratio = statistics.median(dfs_times) / statistics.median(oracle_times)
    ok = dfs == ref and len(dfs) == oracles.three_partitions(list(range(1, 10))) and ratio <= 3
    verdict(8, "three-partition DFS against reference", ok,
            f"dfs {statistics.median(dfs_times):.2f}s oracle {statistics.median(oracle_times):.2f}s "
            f"ratio {ratio:.2f}")
