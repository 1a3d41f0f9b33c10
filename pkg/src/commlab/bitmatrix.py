"""Dense Boolean matrices with bit-packed rows.

Row ``i`` is stored as a Python int whose bit ``j`` is ``m[i][j]``.  All
indices are 0-based.  Matrices are immutable and hashable, so they can be
shared freely between workers and collected into sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BooleanMatrix",
    "Rectangle",
    "ConstructionParams",
    "GTSearchResult",
    "gen_row_regular",
    "gen_identity",
    "gen_gt",
    "gen_constant",
    "submatrix",
    "contains_gt",
    "zero_out_row",
    "read_bmat",
    "write_bmat",
    "parse_bmat",
    "format_bmat",
]


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class BooleanMatrix:
    n_rows: int
    n_cols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.rows) != self.n_rows:
            raise ValueError(f"expected {self.n_rows} rows, got {len(self.rows)}")
        limit = 1 << self.n_cols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row bits exceed the column count")

    # -- construction -------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BooleanMatrix":
        """Build from nested 0/1 sequences."""
        rows = [list(r) for r in rows]
        if not rows:
            raise ValueError("empty matrix")
        n_cols = len(rows[0])
        packed = []
        for r in rows:
            if len(r) != n_cols:
                raise ValueError("ragged rows")
            v = 0
            for j, x in enumerate(r):
                if x not in (0, 1, True, False):
                    raise ValueError(f"entry {x!r} is not Boolean")
                if x:
                    v |= 1 << j
            packed.append(v)
        return cls(len(rows), n_cols, tuple(packed))

    @classmethod
    def from_numpy(cls, arr) -> "BooleanMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls.from_rows(arr.astype(bool).astype(int).tolist())

    @classmethod
    def from_masks(cls, masks: Iterable[int], n_cols: int) -> "BooleanMatrix":
        masks = tuple(masks)
        return cls(len(masks), n_cols, masks)

    # -- access -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
            raise IndexError(f"entry {(i, j)} out of range for {self.shape}")
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> list[int]:
        return [(self.rows[i] >> j) & 1 for j in range(self.n_cols)]

    def col_mask(self, j: int) -> int:
        """Column ``j`` packed as a bitmask over row indices."""
        v = 0
        for i, r in enumerate(self.rows):
            if (r >> j) & 1:
                v |= 1 << i
        return v

    def row_popcounts(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def col_popcounts(self) -> list[int]:
        return [self.col_mask(j).bit_count() for j in range(self.n_cols)]

    def count_ones(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def ones(self) -> list[tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.rows) for j in _bits(r)]

    def is_constant(self) -> bool:
        full = (1 << self.n_cols) - 1
        return all(r == 0 for r in self.rows) or all(r == full for r in self.rows)

    def to_list(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.n_rows)]

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=bool)
        for i, r in enumerate(self.rows):
            if r:
                out[i, _bits(r)] = True
        return out

    def transpose(self) -> "BooleanMatrix":
        return BooleanMatrix(self.n_cols, self.n_rows, tuple(self.col_mask(j) for j in range(self.n_cols)))

    def complement(self) -> "BooleanMatrix":
        full = (1 << self.n_cols) - 1
        return BooleanMatrix(self.n_rows, self.n_cols, tuple(full ^ r for r in self.rows))

    def reverse(self) -> "BooleanMatrix":
        """Reverse both the row order and the column order."""
        rev = []
        for r in reversed(self.rows):
            v = 0
            for j in _bits(r):
                v |= 1 << (self.n_cols - 1 - j)
            rev.append(v)
        return BooleanMatrix(self.n_rows, self.n_cols, tuple(rev))

    def __str__(self) -> str:
        return "\n".join("".join(str(x) for x in self.row(i)) for i in range(self.n_rows))


@dataclass(frozen=True)
class Rectangle:
    """Product set ``rows x cols`` with strictly increasing index tuples."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(i) for i in self.rows))
        object.__setattr__(self, "cols", tuple(int(j) for j in self.cols))
        for name, idx in (("rows", self.rows), ("cols", self.cols)):
            if not idx:
                raise ValueError(f"rectangle {name} must be non-empty")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"rectangle {name} must be strictly increasing")
            if idx[0] < 0:
                raise ValueError(f"negative index in rectangle {name}")

    @classmethod
    def full(cls, m: BooleanMatrix) -> "Rectangle":
        return cls(tuple(range(m.n_rows)), tuple(range(m.n_cols)))

    @classmethod
    def from_masks(cls, row_mask: int, col_mask: int) -> "Rectangle":
        return cls(tuple(_bits(row_mask)), tuple(_bits(col_mask)))

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.rows), len(self.cols))

    @property
    def row_mask(self) -> int:
        return sum(1 << i for i in self.rows)

    @property
    def col_mask(self) -> int:
        return sum(1 << j for j in self.cols)

    def check(self, m: BooleanMatrix) -> None:
        if self.rows[-1] >= m.n_rows or self.cols[-1] >= m.n_cols:
            raise IndexError(f"rectangle out of range for a {m.n_rows}x{m.n_cols} matrix")


@dataclass(frozen=True)
class ConstructionParams:
    n: int
    r: int
    seed: int
    w: int | None = None

    @classmethod
    def from_w(cls, n: int, w: int, seed: int) -> "ConstructionParams":
        if w < 0:
            raise ValueError("w must be non-negative")
        return cls(n=n, r=2 ** (3 * w), seed=seed, w=w)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.r <= self.n:
            raise ValueError(f"need 1 <= r <= n, got r={self.r}, n={self.n}")
        if self.w is not None and self.r != 2 ** (3 * self.w):
            raise ValueError("r must equal 2**(3w) when w is given")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


# -- generators ----------------------------------------------------------


def gen_row_regular(params: ConstructionParams) -> BooleanMatrix:
    """Uniform n x n matrix with exactly r ones in every row.

    Each row is an independent uniform r-subset of the columns, drawn by a
    partial Fisher-Yates shuffle.  The draws come from a Philox stream keyed
    by the seed; row ``i`` consumes the ``i``-th block of r bounded integers.
    """
    n, r = params.n, params.r
    rng = np.random.Generator(np.random.Philox(key=params.seed))
    if r == n:
        return gen_constant(n, n, 1)
    picks = rng.integers(np.arange(r), n, size=(n, r)).tolist()
    rows = []
    for draws in picks:
        # sparse partial shuffle: only displaced positions are stored
        moved: dict[int, int] = {}
        mask = 0
        for k, j in enumerate(draws):
            vk = moved.get(k, k)
            vj = moved.get(j, j)
            moved[j] = vk
            mask |= 1 << vj
        rows.append(mask)
    return BooleanMatrix(n, n, tuple(rows))


def gen_identity(n: int) -> BooleanMatrix:
    if n < 1:
        raise ValueError("n must be positive")
    return BooleanMatrix(n, n, tuple(1 << i for i in range(n)))


def gen_gt(k: int) -> BooleanMatrix:
    """Greater-Than pattern: entry (i, j) is 1 iff i <= j."""
    if k < 1:
        raise ValueError("k must be positive")
    full = (1 << k) - 1
    return BooleanMatrix(k, k, tuple(full ^ ((1 << i) - 1) for i in range(k)))


def gen_constant(n_rows: int, n_cols: int, value: int) -> BooleanMatrix:
    row = (1 << n_cols) - 1 if value else 0
    return BooleanMatrix(n_rows, n_cols, (row,) * n_rows)


# -- operations ----------------------------------------------------------


def _gather(mask: int, cols: Sequence[int]) -> int:
    v = 0
    for t, j in enumerate(cols):
        if (mask >> j) & 1:
            v |= 1 << t
    return v


def submatrix(m: BooleanMatrix, rect: Rectangle) -> BooleanMatrix:
    """Order-preserving selection of ``rect.rows`` x ``rect.cols``."""
    rect.check(m)
    if rect.cols == tuple(range(m.n_cols)):
        return BooleanMatrix(len(rect.rows), m.n_cols, tuple(m.rows[i] for i in rect.rows))
    return BooleanMatrix(
        len(rect.rows), len(rect.cols), tuple(_gather(m.rows[i], rect.cols) for i in rect.rows)
    )


def zero_out_row(m: BooleanMatrix, i: int) -> BooleanMatrix:
    if not 0 <= i < m.n_rows:
        raise IndexError(f"row {i} out of range")
    rows = list(m.rows)
    rows[i] = 0
    return BooleanMatrix(m.n_rows, m.n_cols, tuple(rows))


@dataclass(frozen=True)
class GTSearchResult:
    status: str  # "found" | "not_found" | "budget_exhausted"
    witness: Rectangle | None = None
    nodes: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


class _Budget(Exception):
    pass


def contains_gt(m: BooleanMatrix, k: int, budget: int = 10**7) -> GTSearchResult:
    """Search for GT_k as an order-preserving submatrix of ``m``.

    Depth-first over rows; at depth ``s`` a row ``i_s`` and column ``j_s``
    are chosen so that ``m[i_s][j_t] = 0`` for every earlier column and
    ``m[i_t][j_s] = 1`` for every earlier row.  ``budget`` caps the number
    of (row, column) extensions tried.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n_rows, n_cols = m.n_rows, m.n_cols
    if k > n_rows or k > n_cols:
        return GTSearchResult("not_found")
    nodes = 0
    rows_chosen: list[int] = []
    cols_chosen: list[int] = []

    def extend(depth: int, last_row: int, last_col: int, common: int, used_cols: int) -> bool:
        # common: columns that are 1 in every chosen row
        # used_cols: chosen columns, each must read 0 in the new row
        nonlocal nodes
        if depth == k:
            return True
        need = k - depth
        for i in range(last_row + 1, n_rows - need + 1):
            row = m.rows[i]
            if row & used_cols:
                continue
            cand = row & common & ~((1 << (last_col + 1)) - 1)
            for j in _bits(cand):
                if n_cols - j < need:
                    break
                nodes += 1
                if nodes > budget:
                    raise _Budget
                rows_chosen.append(i)
                cols_chosen.append(j)
                if extend(depth + 1, i, j, common & row, used_cols | (1 << j)):
                    return True
                rows_chosen.pop()
                cols_chosen.pop()
        return False

    try:
        ok = extend(0, -1, -1, (1 << n_cols) - 1, 0)
    except _Budget:
        return GTSearchResult("budget_exhausted", nodes=nodes)
    if ok:
        return GTSearchResult("found", Rectangle(tuple(rows_chosen), tuple(cols_chosen)), nodes)
    return GTSearchResult("not_found", nodes=nodes)


# -- BMAT v1 text format -------------------------------------------------


def format_bmat(m: BooleanMatrix) -> str:
    return f"{m.n_rows} {m.n_cols}\n" + "".join(
        "".join("1" if (r >> j) & 1 else "0" for j in range(m.n_cols)) + "\n" for r in m.rows
    )


def parse_bmat(text: str) -> BooleanMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValueError("empty BMAT document")
    try:
        n_rows, n_cols = (int(x) for x in lines[0].split())
    except ValueError:
        raise ValueError(f"bad BMAT header {lines[0]!r}") from None
    body = lines[1:]
    if len(body) != n_rows:
        raise ValueError(f"BMAT header declares {n_rows} rows, found {len(body)}")
    rows = []
    for k, line in enumerate(body):
        if len(line) != n_cols or set(line) - {"0", "1"}:
            raise ValueError(f"bad BMAT row {k}: {line!r}")
        rows.append(int(line[::-1], 2))
    return BooleanMatrix(n_rows, n_cols, tuple(rows))


def write_bmat(m: BooleanMatrix, path: str | Path) -> None:
    Path(path).write_text(format_bmat(m), encoding="ascii", newline="\n")


def read_bmat(path: str | Path) -> BooleanMatrix:
    return parse_bmat(Path(path).read_text(encoding="ascii"))
