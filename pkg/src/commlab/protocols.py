"""Deterministic protocol trees and public-coin randomized protocols.

A :class:`ProtocolTree` is a binary tree whose internal nodes say who speaks
(``"alice"`` or ``"bob"``) and, through a message table indexed by that
player's input, which bit is sent.  Nodes are immutable, so subtrees may be
shared; the tree semantics are those of the fully expanded tree.

A :class:`RandomizedProtocol` maps shared random seeds to trees.  Its seed
space is either a finite product of digit ranges (``radices``), which makes
exact error computation possible by enumeration, or 64-bit integer seeds,
which only supports Monte Carlo estimation.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, Sequence

import numpy as np

from ._seeds import default_workers, derive_seed, rng_for
from .bitmatrix import BooleanMatrix

ALICE = "alice"
BOB = "bob"

#: Largest finite seed domain that :func:`error_exact` will enumerate.
MAX_EXACT_SEEDS = 2**24


class MalformedTreeError(ValueError):
    pass


class DomainMismatchError(ValueError):
    pass


class SeedDomainTooLargeError(ValueError):
    pass


class DerandomizationError(RuntimeError):
    """No majority of sampled trees matched the matrix within the attempt budget."""


# -- trees -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Leaf:
    out: int

    def __post_init__(self):
        if self.out not in (0, 1):
            raise MalformedTreeError(f"leaf output must be 0 or 1, got {self.out!r}")


@dataclass(frozen=True, eq=False)
class Node:
    owner: str
    table: tuple[int, ...]
    zero: "Leaf | Node"
    one: "Leaf | Node"
    mask: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.owner not in (ALICE, BOB):
            raise MalformedTreeError(f"unknown owner {self.owner!r}")
        table = tuple(int(b) for b in self.table)
        if any(b not in (0, 1) for b in table):
            raise MalformedTreeError("message table entries must be bits")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "mask", sum(1 << x for x, b in enumerate(table) if b))


TreeNode = Leaf | Node


@dataclass(frozen=True, eq=False)
class ProtocolTree:
    root: TreeNode
    n_rows: int
    n_cols: int

    def __post_init__(self):
        for node in self.nodes:
            if isinstance(node, Node):
                size = self.n_rows if node.owner == ALICE else self.n_cols
                if len(node.table) != size:
                    raise MalformedTreeError(
                        f"{node.owner} table has {len(node.table)} entries, domain is {size}"
                    )
                if not isinstance(node.zero, (Leaf, Node)) or not isinstance(node.one, (Leaf, Node)):
                    raise MalformedTreeError("internal node needs two children")
            elif not isinstance(node, Leaf):
                raise MalformedTreeError(f"unexpected tree element {node!r}")

    @cached_property
    def nodes(self) -> list[TreeNode]:
        """Distinct nodes in topological order (every parent before its children)."""
        seen: set[int] = set()
        post: list[TreeNode] = []
        stack: list[tuple[TreeNode, bool]] = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                post.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            if isinstance(node, Node):
                stack.append((node.one, False))
                stack.append((node.zero, False))
        post.reverse()
        return post

    @cached_property
    def depth(self) -> int:
        """Communication cost: the longest root-to-leaf path."""
        height: dict[int, int] = {}
        for node in reversed(self.nodes):
            if isinstance(node, Leaf):
                height[id(node)] = 0
            else:
                height[id(node)] = 1 + max(height[id(node.zero)], height[id(node.one)])
        return height[id(self.root)]

    @property
    def cost(self) -> int:
        return self.depth

    def output_matrix(self) -> BooleanMatrix:
        """The matrix this tree computes, evaluated for all inputs at once."""
        order = self.nodes
        full = (1 << self.n_cols) - 1
        rows = []
        for i in range(self.n_rows):
            pending: dict[int, int] = {id(self.root): full}
            out = 0
            for node in order:
                cols = pending.pop(id(node), 0)
                if not cols:
                    continue
                if isinstance(node, Leaf):
                    if node.out:
                        out |= cols
                elif node.owner == ALICE:
                    nxt = node.one if node.table[i] else node.zero
                    pending[id(nxt)] = pending.get(id(nxt), 0) | cols
                else:
                    if cols & node.mask:
                        pending[id(node.one)] = pending.get(id(node.one), 0) | (cols & node.mask)
                    if cols & ~node.mask:
                        pending[id(node.zero)] = pending.get(id(node.zero), 0) | (cols & ~node.mask)
            rows.append(out)
        return BooleanMatrix(self.n_rows, self.n_cols, tuple(rows))


@dataclass(frozen=True)
class RunResult:
    output: int
    cost: int
    transcript: str


def run_deterministic(tree: ProtocolTree, i: int, j: int) -> RunResult:
    """Walk the tree on input (i, j), recording every communicated bit."""
    if not (0 <= i < tree.n_rows and 0 <= j < tree.n_cols):
        raise IndexError(f"input {(i, j)} outside the {tree.n_rows}x{tree.n_cols} domain")
    node = tree.root
    bits = []
    while isinstance(node, Node):
        b = node.table[i] if node.owner == ALICE else node.table[j]
        bits.append("1" if b else "0")
        node = node.one if b else node.zero
    if not isinstance(node, Leaf):
        raise MalformedTreeError(f"unexpected tree element {node!r}")
    return RunResult(node.out, len(bits), "".join(bits))


def _check_domain(n_rows: int, n_cols: int, m: BooleanMatrix) -> None:
    if (n_rows, n_cols) != m.shape:
        raise DomainMismatchError(f"protocol domain {(n_rows, n_cols)} does not match matrix {m.shape}")


def computes(tree: ProtocolTree, m: BooleanMatrix) -> bool:
    _check_domain(tree.n_rows, tree.n_cols, m)
    return tree.output_matrix() == m


def constant_tree(n_rows: int, n_cols: int, value: int) -> ProtocolTree:
    return ProtocolTree(Leaf(value), n_rows, n_cols)


def send_row_tree(m: BooleanMatrix) -> ProtocolTree:
    """Alice sends her index in binary (most significant bit first), Bob replies with the entry."""
    width = (m.n_rows - 1).bit_length()
    leaves = (Leaf(0), Leaf(1))

    def build(depth: int, prefix: int) -> TreeNode:
        if depth == width:
            if prefix >= m.n_rows:
                return leaves[0]
            return Node(BOB, tuple(m.row(prefix)), leaves[0], leaves[1])
        shift = width - 1 - depth
        table = tuple((i >> shift) & 1 for i in range(m.n_rows))
        return Node(ALICE, table, build(depth + 1, prefix << 1), build(depth + 1, (prefix << 1) | 1))

    return ProtocolTree(build(0, 0), m.n_rows, m.n_cols)


# -- serialization ---------------------------------------------------------


def tree_to_dict(tree: ProtocolTree) -> dict:
    def enc(node: TreeNode) -> dict:
        if isinstance(node, Leaf):
            return {"out": node.out}
        return {"owner": node.owner, "table": list(node.table), "children": [enc(node.zero), enc(node.one)]}

    return {"n_rows": tree.n_rows, "n_cols": tree.n_cols, "root": enc(tree.root)}


def tree_from_dict(doc: dict) -> ProtocolTree:
    def dec(d: dict) -> TreeNode:
        if "out" in d:
            return Leaf(int(d["out"]))
        try:
            zero, one = d["children"]
            return Node(d["owner"], tuple(d["table"]), dec(zero), dec(one))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTreeError(f"bad tree node: {exc}") from None

    return ProtocolTree(dec(doc["root"]), int(doc["n_rows"]), int(doc["n_cols"]))


def dumps_tree(tree: ProtocolTree) -> str:
    return json.dumps(tree_to_dict(tree), separators=(",", ":"))


def loads_tree(text: str) -> ProtocolTree:
    return tree_from_dict(json.loads(text))


# -- randomized protocols --------------------------------------------------


@dataclass(frozen=True, eq=False)
class RandomizedProtocol:
    """Distribution over cost-bounded trees, indexed by shared seeds.

    ``radices`` describes a finite seed space: a seed is a vector of digits
    with ``seed[k] in range(radices[k])``, drawn uniformly.  With
    ``radices=None`` a seed is a single unsigned 64-bit integer.  ``batch``
    is an optional vectorised evaluator returning, for a ``(S, L)`` array of
    seeds, the ``(S, n_rows, n_cols)`` outputs; it must agree with
    ``sampler`` tree by tree.
    """

    n_rows: int
    n_cols: int
    cost_bound: int
    sampler: Callable[[np.ndarray], ProtocolTree]
    radices: tuple[int, ...] | None = None
    batch: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    @property
    def finite(self) -> bool:
        return self.radices is not None

    @property
    def seed_width(self) -> int:
        return len(self.radices) if self.radices is not None else 1

    @property
    def domain_size(self) -> int | None:
        return math.prod(self.radices) if self.radices is not None else None

    def tree(self, seed) -> ProtocolTree:
        seed = np.asarray(seed).reshape(-1)
        if seed.shape[0] != self.seed_width:
            raise ValueError(f"seed must have {self.seed_width} digits")
        t = self.sampler(seed)
        if t.depth > self.cost_bound or (t.n_rows, t.n_cols) != (self.n_rows, self.n_cols):
            raise MalformedTreeError("sampled tree violates the protocol's cost bound or domain")
        return t

    def outputs(self, seeds: np.ndarray) -> np.ndarray:
        seeds = np.asarray(seeds)
        if seeds.ndim == 1:
            seeds = seeds.reshape(-1, self.seed_width)
        if self.batch is not None:
            return self.batch(seeds)
        out = np.empty((seeds.shape[0], self.n_rows, self.n_cols), dtype=bool)
        for s, seed in enumerate(seeds):
            out[s] = self.tree(seed).output_matrix().to_numpy()
        return out

    def draw_seeds(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.radices is None:
            return rng.integers(0, 2**64, size=(count, 1), dtype=np.uint64)
        if not self.radices:
            return np.zeros((count, 0), dtype=np.int64)
        return rng.integers(0, np.asarray(self.radices, dtype=np.int64), size=(count, len(self.radices)))

    def enumerate_seeds(self, chunk: int) -> Iterator[np.ndarray]:
        """Every seed of a finite domain exactly once, in mixed-radix order."""
        if self.radices is None:
            raise SeedDomainTooLargeError("64-bit seeded protocols cannot be enumerated")
        size = self.domain_size
        radices = np.asarray(self.radices, dtype=np.int64)
        strides = np.ones(len(radices), dtype=np.int64)
        for k in range(len(radices) - 2, -1, -1):
            strides[k] = strides[k + 1] * radices[k + 1]
        for start in range(0, size, chunk):
            idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
            yield (idx[:, None] // strides[None, :]) % radices[None, :]


def deterministic(tree: ProtocolTree, name: str = "") -> RandomizedProtocol:
    """Point-mass randomized protocol on a single tree."""
    table = tree.output_matrix().to_numpy()

    def batch(seeds):
        return np.broadcast_to(table, (len(seeds),) + table.shape).copy()

    return RandomizedProtocol(
        tree.n_rows, tree.n_cols, tree.depth, lambda seed: tree, radices=(), batch=batch, name=name
    )


@dataclass(frozen=True, eq=False)
class ErrorReport:
    max_error: Fraction | float
    worst_input: tuple[int, int]
    method: str
    wrong: np.ndarray
    trials: int
    radius: float = 0.0
    confidence: float | None = None

    @property
    def per_input(self) -> np.ndarray:
        return self.wrong / self.trials

    def error_at(self, i: int, j: int) -> Fraction | float:
        if self.method == "exact":
            return Fraction(int(self.wrong[i, j]), self.trials)
        return float(self.wrong[i, j]) / self.trials

    def to_dict(self) -> dict:
        value = self.max_error
        doc = {
            "method": self.method,
            "max_error": str(value) if isinstance(value, Fraction) else value,
            "worst_input": list(self.worst_input),
            "trials": self.trials,
        }
        if self.method == "monte_carlo":
            doc["radius"] = self.radius
            doc["confidence"] = self.confidence
        return doc


def _worst(wrong: np.ndarray) -> tuple[int, tuple[int, int]]:
    flat = int(np.argmax(wrong))  # first maximum in row-major order = lexicographically smallest
    i, j = divmod(flat, wrong.shape[1])
    return int(wrong[i, j]), (i, j)


def _chunk_size(m: BooleanMatrix, cap: int = 1 << 22) -> int:
    return max(1, cap // (m.n_rows * m.n_cols))


def error_exact(rp: RandomizedProtocol, m: BooleanMatrix) -> ErrorReport:
    """Exact worst-case error, enumerating the whole finite seed domain."""
    _check_domain(rp.n_rows, rp.n_cols, m)
    if not rp.finite:
        raise SeedDomainTooLargeError("protocol has a 64-bit seed space; use error_monte_carlo")
    size = rp.domain_size
    if size > MAX_EXACT_SEEDS:
        raise SeedDomainTooLargeError(f"seed domain of size {size} exceeds {MAX_EXACT_SEEDS}; use error_monte_carlo")
    target = m.to_numpy()
    wrong = np.zeros(m.shape, dtype=np.int64)
    for seeds in rp.enumerate_seeds(_chunk_size(m)):
        wrong += (rp.outputs(seeds) != target).sum(axis=0)
    count, worst = _worst(wrong)
    return ErrorReport(Fraction(count, size), worst, "exact", wrong, size)


def hoeffding_radius(samples: int, confidence: float) -> float:
    """Two-sided Hoeffding radius for a mean of ``samples`` values in [0, 1]."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


def error_monte_carlo(
    rp: RandomizedProtocol,
    m: BooleanMatrix,
    samples_per_input: int,
    seed: int,
    confidence: float = 0.99,
    workers: int | None = None,
) -> ErrorReport:
    """Estimate the per-input error from shared seed samples.

    Every input is evaluated on the same ``samples_per_input`` sampled
    protocols.  Seeds are drawn chunk by chunk from streams derived from
    ``(seed, chunk)``, so the report does not depend on ``workers``.
    """
    if samples_per_input < 1:
        raise ValueError("samples_per_input must be >= 1")
    _check_domain(rp.n_rows, rp.n_cols, m)
    target = m.to_numpy()
    chunk = _chunk_size(m)
    starts = list(range(0, samples_per_input, chunk))

    def run(c: int) -> np.ndarray:
        count = min(chunk, samples_per_input - starts[c])
        seeds = rp.draw_seeds(rng_for(seed, c), count)
        return (rp.outputs(seeds) != target).sum(axis=0)

    workers = workers or default_workers()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(starts))))
    else:
        parts = [run(c) for c in range(len(starts))]
    wrong = np.sum(parts, axis=0, dtype=np.int64)
    count, worst = _worst(wrong)
    return ErrorReport(
        count / samples_per_input,
        worst,
        "monte_carlo",
        wrong,
        samples_per_input,
        radius=hoeffding_radius(samples_per_input, confidence),
        confidence=confidence,
    )


# -- transformations -------------------------------------------------------


def majority_tree(trees: Sequence[ProtocolTree]) -> ProtocolTree:
    """Run the trees one after another and output the majority of their outputs.

    Both players see every transcript, so the majority is known to both and
    no extra bit is sent.
    """
    if not trees:
        raise ValueError("need at least one tree")
    n_rows, n_cols = trees[0].n_rows, trees[0].n_cols
    if any((t.n_rows, t.n_cols) != (n_rows, n_cols) for t in trees):
        raise DomainMismatchError("trees have different domains")
    reps = len(trees)
    memo: dict[tuple, TreeNode] = {}
    finals = (Leaf(0), Leaf(1))

    def cont(idx: int, ones: int) -> TreeNode:
        if idx == reps:
            return finals[1] if 2 * ones > reps else finals[0]
        return rebuild(trees[idx].root, idx, ones)

    def rebuild(node: TreeNode, idx: int, ones: int) -> TreeNode:
        key = (id(node), idx, ones)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Leaf):
            res = cont(idx + 1, ones + node.out)
        else:
            res = Node(node.owner, node.table, rebuild(node.zero, idx, ones), rebuild(node.one, idx, ones))
        memo[key] = res
        return res

    return ProtocolTree(cont(0, 0), n_rows, n_cols)


def amplify(rp: RandomizedProtocol, repetitions: int) -> RandomizedProtocol:
    """Majority of ``repetitions`` independent runs; cost multiplies by ``repetitions``."""
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValueError("repetitions must be an odd positive integer")
    if repetitions == 1:
        return rp
    width = rp.seed_width

    def split(seed: np.ndarray) -> list[np.ndarray]:
        if rp.finite:
            return [seed[k * width : (k + 1) * width] for k in range(repetitions)]
        return [np.array([derive_seed(int(seed[0]), k)], dtype=np.uint64) for k in range(repetitions)]

    def sampler(seed):
        return majority_tree([rp.tree(s) for s in split(seed)])

    def batch(seeds):
        votes = np.zeros((seeds.shape[0], rp.n_rows, rp.n_cols), dtype=np.int32)
        if rp.finite:
            for k in range(repetitions):
                votes += rp.outputs(seeds[:, k * width : (k + 1) * width])
        else:
            for k in range(repetitions):
                sub = np.array([[derive_seed(int(s[0]), k)] for s in seeds], dtype=np.uint64)
                votes += rp.outputs(sub)
        return 2 * votes > repetitions

    return RandomizedProtocol(
        rp.n_rows,
        rp.n_cols,
        rp.cost_bound * repetitions,
        sampler,
        radices=rp.radices * repetitions if rp.finite else None,
        batch=batch,
        name=f"{rp.name}^maj{repetitions}" if rp.name else "",
    )


def majority_error(epsilon: Fraction | float, repetitions: int) -> Fraction | float:
    """P[Binomial(repetitions, epsilon) > repetitions / 2]."""
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValueError("repetitions must be an odd positive integer")
    return sum(
        math.comb(repetitions, k) * epsilon**k * (1 - epsilon) ** (repetitions - k)
        for k in range(repetitions // 2 + 1, repetitions + 1)
    )


def lift_row_zeroing(rp: RandomizedProtocol, row: int) -> RandomizedProtocol:
    """Protocol for the matrix with ``row`` replaced by zeros, at one extra bit.

    Alice first announces whether her input is ``row``; if so both output 0,
    otherwise they run ``rp`` on the same seed.
    """
    if not 0 <= row < rp.n_rows:
        raise IndexError(f"row {row} out of range")
    flag = tuple(1 if i == row else 0 for i in range(rp.n_rows))
    zero_leaf = Leaf(0)

    def sampler(seed):
        inner = rp.tree(seed)
        return ProtocolTree(Node(ALICE, flag, inner.root, zero_leaf), rp.n_rows, rp.n_cols)

    def batch(seeds):
        out = np.array(rp.outputs(seeds), dtype=bool, copy=True)
        out[:, row, :] = False
        return out

    return RandomizedProtocol(
        rp.n_rows, rp.n_cols, rp.cost_bound + 1, sampler, radices=rp.radices, batch=batch,
        name=f"{rp.name}/zero{row}" if rp.name else "",
    )


def derandomize_majority(
    m: BooleanMatrix, rp: RandomizedProtocol, t: int, attempts: int = 50, seed: int = 0
) -> list[ProtocolTree]:
    """Sample ``t`` trees whose entrywise majority equals ``m`` exactly.

    Each attempt draws ``t`` i.i.d. seeds and checks the majority over the
    full input sweep.  Raises :class:`DerandomizationError` when no attempt
    succeeds.
    """
    if t < 1 or t % 2 == 0:
        raise ValueError("t must be an odd positive integer")
    _check_domain(rp.n_rows, rp.n_cols, m)
    target = m.to_numpy()
    for attempt in range(attempts):
        seeds = rp.draw_seeds(rng_for(seed, attempt), t)
        trees = [rp.tree(s) for s in seeds]
        votes = sum(tr.output_matrix().to_numpy().astype(np.int32) for tr in trees)
        if np.array_equal(2 * votes > t, target):
            return trees
    raise DerandomizationError(f"no majority of {t} sampled trees computed the matrix in {attempts} attempts")


# -- tiny-scale exhaustive oracles -------------------------------------------


def enumerate_cost_c_matrices(n: int, c: int) -> set[BooleanMatrix]:
    """All n x n matrices computed by some protocol tree of depth <= c."""
    if not 1 <= n <= 4 or not 0 <= c <= 3:
        raise ValueError("enumeration is limited to n <= 4 and c <= 3")
    cells = n * n
    full = (1 << cells) - 1
    row_full = (1 << n) - 1
    tables = []
    for sub in range(1 << n):
        alice = sum(row_full << (i * n) for i in range(n) if (sub >> i) & 1)
        bob = sum(1 << (i * n + j) for i in range(n) for j in range(n) if (sub >> j) & 1)
        tables.extend((alice, bob))
    tables = sorted(set(tables))

    level = np.array([0, full], dtype=np.int64)
    for _ in range(c):
        seen = np.zeros(1 << cells, dtype=bool)
        seen[level] = True
        for mask in tables:
            ones = np.unique(level & mask)
            zeros = np.unique(level & (full ^ mask))
            seen[(ones[:, None] | zeros[None, :]).ravel()] = True
        level = np.flatnonzero(seen).astype(np.int64)
    return {
        BooleanMatrix(n, n, tuple((int(v) >> (i * n)) & row_full for i in range(n))) for v in level
    }


def _dedupe(rows: Sequence[int], n_cols: int) -> tuple[tuple[int, ...], int]:
    """Drop duplicate rows and columns; the result has the same deterministic cost."""
    rows = sorted(set(rows))
    cols = sorted({sum(((r >> j) & 1) << i for i, r in enumerate(rows)) for j in range(n_cols)})
    packed = tuple(sorted(sum(((c >> i) & 1) << j for j, c in enumerate(cols)) for i in range(len(rows))))
    return packed, len(cols)


def deterministic_cc_exact(m: BooleanMatrix) -> int:
    """Exact deterministic communication complexity for matrices up to 8 x 8.

    Memoised recursion over sub-rectangles: a constant rectangle costs 0,
    otherwise one player splits its side in two and the cost is one plus the
    worse half.  Duplicate rows and columns are merged before lookup.
    """
    if m.n_rows > 8 or m.n_cols > 8:
        raise ValueError("deterministic_cc_exact supports at most 8 x 8 matrices")
    memo: dict[tuple[tuple[int, ...], int], int] = {}

    def solve(rows: tuple[int, ...], n_cols: int) -> int:
        key = (rows, n_cols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        full = (1 << n_cols) - 1
        if len(rows) == 1 and rows[0] in (0, full):
            memo[key] = 0
            return 0
        # upper bound: one side announces its (deduplicated) index, the other answers
        best = 1 + min((len(rows) - 1).bit_length(), (n_cols - 1).bit_length())
        if best > 1:
            best = _split_rows(rows, n_cols, best)
        if best > 1:
            cols = [sum(((r >> j) & 1) << i for i, r in enumerate(rows)) for j in range(n_cols)]
            t_rows, t_cols = _dedupe(cols, len(rows))
            best = _split_rows(t_rows, t_cols, best)
        memo[key] = best
        return best

    def _split_rows(rows: tuple[int, ...], n_cols: int, best: int) -> int:
        a = len(rows)
        for sub in range((1 << (a - 1)) - 1):
            part1 = [rows[0]] + [rows[x + 1] for x in range(a - 1) if (sub >> x) & 1]
            part2 = [rows[x + 1] for x in range(a - 1) if not (sub >> x) & 1]
            d1 = solve(*_dedupe(part1, n_cols))
            if 1 + d1 >= best:
                continue
            d2 = solve(*_dedupe(part2, n_cols))
            best = min(best, 1 + max(d1, d2))
            if best == 1:
                break
        return best

    return solve(*_dedupe(m.rows, m.n_cols))
