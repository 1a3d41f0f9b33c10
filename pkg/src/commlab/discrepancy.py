"""Rectangle discrepancy under the balanced hard distribution.

The distribution puts total mass 1/2 uniformly on the 1-entries and 1/2
uniformly on the 0-entries.  All masses and discrepancies are exact
fractions; internally the search works with the integer numerators over the
common denominator ``2 * ones * zeros``, where a 1-entry weighs ``zeros``
and a 0-entry weighs ``-ones``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._seeds import rng_for
from .bitmatrix import BooleanMatrix, Rectangle

MAX_EXACT_SIDE = 24


class DegenerateDistributionError(ValueError):
    """The matrix is constant, so one half of the distribution has no support."""


@dataclass(frozen=True)
class HardDistribution:
    mass_one: Fraction
    mass_zero: Fraction
    n_ones: int
    n_zeros: int

    @property
    def total(self) -> Fraction:
        return self.mass_one * self.n_ones + self.mass_zero * self.n_zeros


@dataclass(frozen=True)
class DiscReport:
    value: Fraction
    argmax_rect: Rectangle
    method: str  # "exact" | "local_search"
    restarts: int | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "value": str(self.value),
            "value_num": self.value.numerator,
            "value_den": self.value.denominator,
            "value_float": float(self.value),
            "argmax_rows": list(self.argmax_rect.rows),
            "argmax_cols": list(self.argmax_rect.cols),
            "restarts": self.restarts,
        }


def mu_from_matrix(m: BooleanMatrix) -> HardDistribution:
    ones = m.count_ones()
    zeros = m.n_rows * m.n_cols - ones
    if ones == 0 or zeros == 0:
        raise DegenerateDistributionError("the hard distribution needs at least one 0-entry and one 1-entry")
    return HardDistribution(Fraction(1, 2 * ones), Fraction(1, 2 * zeros), ones, zeros)


def disc_rect(m: BooleanMatrix, mu: HardDistribution, rect: Rectangle) -> Fraction:
    """|mu(1-entries in rect) - mu(0-entries in rect)|, exactly."""
    rect.check(m)
    col_mask = rect.col_mask
    ones = sum((m.rows[i] & col_mask).bit_count() for i in rect.rows)
    zeros = len(rect.rows) * len(rect.cols) - ones
    return abs(ones * mu.mass_one - zeros * mu.mass_zero)


def _weights(m: BooleanMatrix, mu: HardDistribution) -> tuple[np.ndarray, int]:
    """Integer entry weights and their common denominator."""
    x = m.to_numpy().astype(np.int64)
    w = np.where(x == 1, mu.n_zeros, -mu.n_ones).astype(np.int64)
    return w, 2 * mu.n_ones * mu.n_zeros


def _subset_sums(w: np.ndarray) -> np.ndarray:
    """Row ``mask`` of the result is the sum of the rows of ``w`` selected by ``mask``."""
    table = np.zeros((1, w.shape[1]), dtype=np.int64)
    for row in w:
        table = np.concatenate([table, table + row[None, :]])
    return table


def _best_cols(col_sums: np.ndarray) -> tuple[int, tuple[int, ...]]:
    """Optimal column set for fixed rows: all strictly positive or all strictly negative sums."""
    pos = tuple(np.flatnonzero(col_sums > 0).tolist())
    neg = tuple(np.flatnonzero(col_sums < 0).tolist())
    vp = int(col_sums[col_sums > 0].sum())
    vn = int(-col_sums[col_sums < 0].sum())
    if vp > vn or (vp == vn and pos <= neg):
        return vp, pos
    return vn, neg


def disc_exact(m: BooleanMatrix, mu: HardDistribution | None = None) -> DiscReport:
    """Maximum discrepancy over all non-empty rectangles.

    Every subset of the smaller side is enumerated; for a fixed subset the
    best opposite side keeps exactly the lines whose signed mass has the
    winning sign.  Ties go to the lexicographically smallest row tuple, then
    column tuple.
    """
    mu = mu or mu_from_matrix(m)
    if min(m.n_rows, m.n_cols) > MAX_EXACT_SIDE:
        raise ValueError(f"disc_exact enumerates 2^min(rows, cols) subsets; limit is {MAX_EXACT_SIDE}")
    w, denom = _weights(m, mu)
    transposed = m.n_cols < m.n_rows
    if transposed:
        w = w.T
    n_side = w.shape[0]
    low = min(n_side, 12)
    low_sums = _subset_sums(w[:low])
    high_sums = _subset_sums(w[low:])
    chunk = max(1, (1 << 22) // (low_sums.shape[0] * w.shape[1]))
    best = -1
    ties: list[int] = []
    for h0 in range(0, high_sums.shape[0], chunk):
        block = low_sums[None, :, :] + high_sums[h0 : h0 + chunk, None, :]
        total = block.sum(axis=2)
        pos = np.maximum(block, 0).sum(axis=2)
        val = np.maximum(pos, pos - total)
        if h0 == 0:
            val[0, 0] = -1  # empty row set
        top = int(val.max())
        if top < best:
            continue
        hs, ls = np.nonzero(val == top)
        masks = [int(l) | ((h0 + int(h)) << low) for h, l in zip(hs, ls)]
        if top > best:
            best, ties = top, masks
        else:
            ties.extend(masks)

    def rect_for(mask: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        side = tuple(i for i in range(n_side) if (mask >> i) & 1)
        _, other = _best_cols(w[list(side)].sum(axis=0))
        return (other, side) if transposed else (side, other)

    if transposed:
        # ties on the enumerated side do not order the original rows; compare full rectangles
        rows, cols = min(rect_for(mask) for mask in ties)
    else:
        mask = min(ties, key=lambda x: tuple(i for i in range(n_side) if (x >> i) & 1))
        rows, cols = rect_for(mask)
    return DiscReport(Fraction(best, denom), Rectangle(rows, cols), "exact")


def disc_local_search(
    m: BooleanMatrix, mu: HardDistribution | None = None, restarts: int = 0, seed: int = 0
) -> DiscReport:
    """Alternating maximisation, best over ``restarts + 1`` ascents.

    The first ascent starts from row 0 alone; restart ``k`` starts from a
    random non-empty row set drawn from ``(seed, k)``.  Each ascent fixes
    rows, takes the best columns for either sign, then the best rows for the
    chosen sign and columns, until the value stops increasing.
    """
    mu = mu or mu_from_matrix(m)
    if restarts < 0:
        raise ValueError("restarts must be >= 0")
    w, denom = _weights(m, mu)
    n_rows = w.shape[0]

    def ascend(rows: np.ndarray) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
        value, cols = _best_cols(w[rows].sum(axis=0))
        best = (value, tuple(np.flatnonzero(rows).tolist()), cols)
        while cols:
            sign = 1 if int(w[np.ix_(rows, list(cols))].sum()) >= 0 else -1
            row_sums = sign * w[:, list(cols)].sum(axis=1)
            new_rows = row_sums > 0
            if not new_rows.any():
                break
            value, cols = _best_cols(w[new_rows].sum(axis=0))
            if value <= best[0]:
                break
            rows = new_rows
            best = (value, tuple(np.flatnonzero(rows).tolist()), cols)
        return best

    start = np.zeros(n_rows, dtype=bool)
    start[0] = True
    results = [ascend(start)]
    for k in range(restarts):
        rng = rng_for(seed, k)
        rows = rng.random(n_rows) < 0.5
        if not rows.any():
            rows[rng.integers(n_rows)] = True
        results.append(ascend(rows))
    value, rows, cols = results[0]
    for cand in results[1:]:
        if cand[0] > value:
            value, rows, cols = cand
    if not cols:
        # only possible when every single-row column sum vanishes; fall back to one entry
        rows, cols = (0,), (0,)
        value = abs(int(w[0, 0]))
    return DiscReport(Fraction(value, denom), Rectangle(rows, cols), "local_search", restarts)


def rcc_lower_bound(disc_value: Fraction | float, epsilon: Fraction | float = Fraction(1, 6)) -> float:
    """log2(2 * epsilon / disc): bound on the cost of any protocol with error 1/2 - epsilon.

    ``epsilon = 1/6`` gives the bound for error 1/3.  A zero discrepancy
    returns ``math.inf``.
    """
    if not 0 < epsilon < Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2)")
    if disc_value < 0:
        raise ValueError("discrepancy is non-negative")
    if disc_value == 0:
        return math.inf
    return math.log2(float(Fraction(2) * Fraction(epsilon) / Fraction(disc_value)))


def bernstein_bound(delta: float, variance: float, c: float) -> float:
    """Bernstein: P[|X - EX| >= delta] <= 2 exp(-(delta^2 / 2) / (Var + c delta / 3))."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta == 0:
        return 2.0
    return 2.0 * math.exp(-(delta * delta / 2.0) / (variance + c * delta / 3.0))


def bernstein_tail(n: int, r: int, t: float, check_range: bool = True) -> float:
    """2 exp(-t^2 / (4 n r)), valid for 0 <= t <= n r.

    With ``check_range=False`` the expression is evaluated for any t >= 0,
    though it is only a proven bound inside the range.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    if t < 0 or (check_range and t > n * r):
        raise ValueError(f"t must lie in [0, n*r] = [0, {n * r}]")
    return 2.0 * math.exp(-(t * t) / (4.0 * n * r))


def bernstein_tail_intermediate(n: int, r: int, t: float) -> float:
    """2 exp(-(t^2 / 2) / (n r + t)): Bernstein with Var <= n r, c = 1 and the c t / 3 term relaxed to t."""
    if not 0 <= t <= n * r:
        raise ValueError(f"t must lie in [0, n*r] = [0, {n * r}]")
    if t == 0:
        return 2.0
    return 2.0 * math.exp(-(t * t / 2.0) / (n * r + t))


def expected_rect_mass(n: int, r: int, dims: tuple[int, int]) -> Fraction:
    """Expected number of ones in a fixed a x b rectangle of a row-regular matrix: (r/n) a b."""
    a, b = dims
    if not (0 <= a <= n and 0 <= b <= n):
        raise ValueError("rectangle dimensions must not exceed n")
    return Fraction(r, n) * a * b


DISC_CSV_FIELDS = ["n", "r", "seed", "method", "value_num", "value_den", "bound"]


def disc_csv_row(report: DiscReport, n: int, r: int | None, seed: int | None, epsilon=Fraction(1, 6)) -> dict:
    return {
        "n": n,
        "r": "" if r is None else r,
        "seed": "" if seed is None else seed,
        "method": report.method,
        "value_num": report.value.numerator,
        "value_den": report.value.denominator,
        "bound": f"{rcc_lower_bound(report.value, epsilon):.12g}",
    }
