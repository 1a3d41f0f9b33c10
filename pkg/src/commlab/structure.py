"""Sparse-structure certificates for Boolean matrices.

A matrix ``F`` is read as a bipartite graph: row ``i`` and column ``j`` are
vertices, every 1-entry is an edge.  Vertex ids put the rows first
(``0 .. n_rows-1``) and the columns after them (``n_rows + j``).

Pipeline: :func:`peel` removes lines with at most two ones until nothing
is left (or returns the (3,3)-core as a witness); :func:`forest_decompose`
turns the peel trace into two edge-disjoint forests; :func:`star_decompose`
splits a forest into two vertex-disjoint unions of stars.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._seeds import default_workers, rng_for
from .bitmatrix import BooleanMatrix, Rectangle, _bits, submatrix

Edge = tuple[int, int]  # (row, col) of a 1-entry


class CertificateError(ValueError):
    """A decomposition failed validation or was requested for a non-peelable matrix."""


@dataclass(frozen=True)
class PeelStep:
    axis: str  # "row" | "col"
    index: int
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class PeelTrace:
    shape: tuple[int, int]
    steps: tuple[PeelStep, ...]


@dataclass(frozen=True)
class CoreWitness:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def size(self) -> tuple[int, int]:
        return (len(self.rows), len(self.cols))

    def verify(self, m: BooleanMatrix) -> bool:
        if not self.rows or not self.cols:
            return False
        col_mask = sum(1 << j for j in self.cols)
        row_mask = sum(1 << i for i in self.rows)
        return all((m.rows[i] & col_mask).bit_count() >= 3 for i in self.rows) and all(
            (m.col_mask(j) & row_mask).bit_count() >= 3 for j in self.cols
        )


@dataclass(frozen=True)
class ForestDecomposition:
    shape: tuple[int, int]
    forest_1: tuple[Edge, ...]
    forest_2: tuple[Edge, ...]


@dataclass(frozen=True)
class Star:
    center: int  # vertex id
    leaves: tuple[int, ...]


@dataclass(frozen=True)
class StarUnion:
    shape: tuple[int, int]
    stars: tuple[Star, ...]

    def index_map(self) -> dict[int, int]:
        """Vertex id -> star index, for every vertex covered by some star."""
        out = {}
        for k, s in enumerate(self.stars):
            out[s.center] = k
            for v in s.leaves:
                out[v] = k
        return out

    def edges(self) -> set[Edge]:
        n_rows = self.shape[0]
        out = set()
        for s in self.stars:
            for v in s.leaves:
                a, b = sorted((s.center, v))
                out.add((a, b - n_rows))
        return out


@dataclass(frozen=True)
class Certificate:
    trace: PeelTrace
    forests: ForestDecomposition
    star_unions: tuple[StarUnion, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.trace.shape


# -- peeling ------------------------------------------------------------------


def peel(f: BooleanMatrix, order: Sequence[tuple[str, int]] | None = None) -> PeelTrace | CoreWitness:
    """Repeatedly delete a row or column with at most two ones.

    By default the lowest-index peelable row is taken, then the lowest
    peelable column.  ``order`` overrides this with a priority list of
    ``(axis, index)`` pairs (earlier = preferred), which is how tests check
    order independence.  Returns the trace when everything is removed,
    otherwise the remaining core, whose lines all have >= 3 ones.
    """
    n_rows, n_cols = f.shape
    row_bits = list(f.rows)
    col_bits = [f.col_mask(j) for j in range(n_cols)]
    alive_rows = (1 << n_rows) - 1
    alive_cols = (1 << n_cols) - 1
    if order is None:
        prio = {("row", i): i for i in range(n_rows)}
        prio.update({("col", j): n_rows + j for j in range(n_cols)})
    else:
        prio = {key: k for k, key in enumerate(order)}
        if len(prio) != n_rows + n_cols:
            raise ValueError("order must list every row and column exactly once")
    heap = [(prio[("row", i)], "row", i) for i in range(n_rows) if row_bits[i].bit_count() <= 2]
    heap += [(prio[("col", j)], "col", j) for j in range(n_cols) if col_bits[j].bit_count() <= 2]
    heapq.heapify(heap)
    steps = []
    while heap:
        _, axis, idx = heapq.heappop(heap)
        if axis == "row":
            if not (alive_rows >> idx) & 1:
                continue
            cols = _bits(row_bits[idx] & alive_cols)
            alive_rows &= ~(1 << idx)
            steps.append(PeelStep("row", idx, tuple((idx, j) for j in cols)))
            for j in cols:
                if (col_bits[j] & alive_rows).bit_count() == 2:
                    heapq.heappush(heap, (prio[("col", j)], "col", j))
        else:
            if not (alive_cols >> idx) & 1:
                continue
            rows = _bits(col_bits[idx] & alive_rows)
            alive_cols &= ~(1 << idx)
            steps.append(PeelStep("col", idx, tuple((i, idx) for i in rows)))
            for i in rows:
                if (row_bits[i] & alive_cols).bit_count() == 2:
                    heapq.heappush(heap, (prio[("row", i)], "row", i))
    if alive_rows == 0 and alive_cols == 0:
        return PeelTrace(f.shape, tuple(steps))
    witness = CoreWitness(tuple(_bits(alive_rows)), tuple(_bits(alive_cols)))
    if not witness.verify(f):
        raise AssertionError("peeling left a core that violates the >= 3 ones invariant")
    return witness


# -- forests ------------------------------------------------------------------


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def is_forest(edges: Iterable[Edge], shape: tuple[int, int]) -> bool:
    dsu = _DSU(shape[0] + shape[1])
    return all(dsu.union(i, shape[0] + j) for i, j in edges)


def forest_decompose(f: BooleanMatrix, trace: PeelTrace | None = None) -> ForestDecomposition:
    """Two edge-disjoint forests whose union is every 1-entry of ``f``.

    Replays the peel trace backwards: each restored line brings at most two
    edges; the first goes to forest 1, the second to forest 2.  The restored
    line is a fresh vertex, so neither forest can close a cycle.
    """
    if trace is None:
        res = peel(f)
        if isinstance(res, CoreWitness):
            raise CertificateError(f"matrix is not peelable; core of size {res.size}")
        trace = res
    f1: list[Edge] = []
    f2: list[Edge] = []
    for step in reversed(trace.steps):
        if len(step.edges) > 2:
            raise CertificateError(f"peel step {step} removed more than two ones")
        if step.edges:
            f1.append(step.edges[0])
        if len(step.edges) == 2:
            f2.append(step.edges[1])
    dec = ForestDecomposition(f.shape, tuple(sorted(f1)), tuple(sorted(f2)))
    validate_forests(f, dec)
    return dec


def validate_forests(f: BooleanMatrix, dec: ForestDecomposition) -> None:
    s1, s2 = set(dec.forest_1), set(dec.forest_2)
    if len(s1) != len(dec.forest_1) or len(s2) != len(dec.forest_2):
        raise CertificateError("repeated edge in a forest")
    if s1 & s2:
        raise CertificateError("forests share an edge")
    if s1 | s2 != set(f.ones()):
        raise CertificateError("forests do not cover exactly the 1-entries")
    for name, edges in (("forest_1", dec.forest_1), ("forest_2", dec.forest_2)):
        if not is_forest(edges, f.shape):
            raise CertificateError(f"{name} contains a cycle")


# -- stars --------------------------------------------------------------------


def star_decompose(forest: Sequence[Edge], shape: tuple[int, int]) -> tuple[StarUnion, StarUnion]:
    """Split a forest into two vertex-disjoint unions of stars.

    Each tree is rooted at its smallest vertex id; an edge goes to class
    ``depth(parent) % 2`` and joins the star centred at its parent.
    """
    n_rows, n_cols = shape
    if not is_forest(forest, shape):
        raise CertificateError("star_decompose needs an acyclic edge set")
    adj: dict[int, list[int]] = {}
    for i, j in forest:
        adj.setdefault(i, []).append(n_rows + j)
        adj.setdefault(n_rows + j, []).append(i)
    depth: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    for root in sorted(adj):
        if root in depth:
            continue
        depth[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for v in sorted(adj[u]):
                if v not in depth:
                    depth[v] = depth[u] + 1
                    children.setdefault(u, []).append(v)
                    stack.append(v)
    classes: tuple[list[Star], list[Star]] = ([], [])
    for center in sorted(children):
        classes[depth[center] % 2].append(Star(center, tuple(sorted(children[center]))))
    unions = (StarUnion(shape, tuple(classes[0])), StarUnion(shape, tuple(classes[1])))
    for u in unions:
        validate_star_union(u)
    if unions[0].edges() | unions[1].edges() != set(forest) or unions[0].edges() & unions[1].edges():
        raise CertificateError("star classes do not partition the forest")
    return unions


def validate_star_union(u: StarUnion) -> None:
    n_rows, n_cols = u.shape
    seen: set[int] = set()
    for s in u.stars:
        if not s.leaves:
            raise CertificateError("empty star")
        members = (s.center,) + s.leaves
        if seen & set(members) or len(set(members)) != len(members):
            raise CertificateError("stars are not vertex-disjoint")
        seen.update(members)
        center_is_row = s.center < n_rows
        for v in s.leaves:
            if (v < n_rows) == center_is_row:
                raise CertificateError("star edge joins two vertices on the same side")
        if not all(0 <= v < n_rows + n_cols for v in members):
            raise CertificateError("star vertex out of range")


def validate_certificate(f: BooleanMatrix, cert: Certificate) -> None:
    validate_forests(f, cert.forests)
    if len(cert.star_unions) != 4:
        raise CertificateError("expected four star unions")
    for u in cert.star_unions:
        validate_star_union(u)
    e = [u.edges() for u in cert.star_unions]
    if e[0] | e[1] != set(cert.forests.forest_1) or e[0] & e[1]:
        raise CertificateError("first two star unions do not partition forest_1")
    if e[2] | e[3] != set(cert.forests.forest_2) or e[2] & e[3]:
        raise CertificateError("last two star unions do not partition forest_2")


def certify(f: BooleanMatrix) -> Certificate | CoreWitness:
    """Full sparse certificate (trace, two forests, four star unions) or a core witness."""
    res = peel(f)
    if isinstance(res, CoreWitness):
        return res
    forests = forest_decompose(f, res)
    unions = star_decompose(forests.forest_1, f.shape) + star_decompose(forests.forest_2, f.shape)
    cert = Certificate(res, forests, unions)
    validate_certificate(f, cert)
    return cert


# -- exhaustive bounded search ----------------------------------------------------


def find_dense_block(m: BooleanMatrix, k: int) -> CoreWitness | None:
    """Exhaustively look for an a x b block, a, b <= k, whose lines all have >= 3 ones.

    Any such block lies in the (3,3)-core of some A x B with |A| = min(k, rows)
    and |B| = min(k, cols), so only maximal-size candidates are tried, pruning
    A when the core of A x (all columns) is already empty.
    """
    if m.n_rows > 16 or m.n_cols > 16:
        raise ValueError("find_dense_block is limited to matrices with at most 16 rows and columns")
    a_size, b_size = min(k, m.n_rows), min(k, m.n_cols)
    if a_size < 3 or b_size < 3:
        return None
    for rows in itertools.combinations(range(m.n_rows), a_size):
        sub = submatrix(m, Rectangle(rows, tuple(range(m.n_cols))))
        core = peel(sub)
        if not isinstance(core, CoreWitness):
            continue
        core_cols = core.cols
        if len(core_cols) <= b_size:
            return CoreWitness(tuple(rows[i] for i in core.rows), core_cols)
        for cols in itertools.combinations(core_cols, b_size):
            block = peel(submatrix(m, Rectangle(rows, cols)))
            if isinstance(block, CoreWitness):
                return CoreWitness(tuple(rows[i] for i in block.rows), tuple(cols[j] for j in block.cols))
    return None


# -- survey -------------------------------------------------------------------


@dataclass(frozen=True)
class SurveyRecord:
    sample: int
    rect: Rectangle
    peelable: bool
    certificate: Certificate | None
    witness: CoreWitness | None


@dataclass(frozen=True)
class SurveyReport:
    k: int
    seed: int
    records: tuple[SurveyRecord, ...]

    @property
    def peelable_fraction(self) -> float:
        return sum(r.peelable for r in self.records) / len(self.records) if self.records else 1.0

    @property
    def witnesses(self) -> list[tuple[int, CoreWitness]]:
        return [(r.sample, r.witness) for r in self.records if r.witness is not None]


def sample_rectangle(n_rows: int, n_cols: int, k: int, seed: int, index: int) -> Rectangle:
    rng = rng_for(seed, index)
    rows = sorted(rng.choice(n_rows, size=k, replace=False).tolist())
    cols = sorted(rng.choice(n_cols, size=k, replace=False).tolist())
    return Rectangle(tuple(rows), tuple(cols))


def _survey_one(m: BooleanMatrix, k: int, seed: int, index: int) -> SurveyRecord:
    rect = sample_rectangle(m.n_rows, m.n_cols, k, seed, index)
    res = certify(submatrix(m, rect))
    if isinstance(res, CoreWitness):
        return SurveyRecord(index, rect, False, None, res)
    return SurveyRecord(index, rect, True, res, None)


def _survey_range(args) -> list[SurveyRecord]:
    m, k, seed, lo, hi = args
    return [_survey_one(m, k, seed, s) for s in range(lo, hi)]


def survey_submatrices(
    m: BooleanMatrix, k: int, samples: int, seed: int, workers: int | None = None
) -> SurveyReport:
    """Certify ``samples`` uniformly random k x k submatrices.

    Sample ``s`` uses a stream derived from ``(seed, s)``; records come back
    in sample order whatever the worker count.
    """
    if not 1 <= k <= min(m.n_rows, m.n_cols):
        raise ValueError(f"k must lie in [1, {min(m.n_rows, m.n_cols)}]")
    workers = workers or default_workers()
    if workers > 1 and samples > 1:
        step = -(-samples // workers)
        jobs = [(m, k, seed, lo, min(samples, lo + step)) for lo in range(0, samples, step)]
        with ProcessPoolExecutor(workers) as pool:
            records = [r for part in pool.map(_survey_range, jobs) for r in part]
    else:
        records = _survey_range((m, k, seed, 0, samples))
    return SurveyReport(k, seed, tuple(records))


# -- serialization ------------------------------------------------------------


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "shape": list(cert.shape),
        "trace": [{"axis": s.axis, "index": s.index, "edges": [list(e) for e in s.edges]} for s in cert.trace.steps],
        "forest_1": [list(e) for e in cert.forests.forest_1],
        "forest_2": [list(e) for e in cert.forests.forest_2],
        "star_unions": [
            [{"center": s.center, "leaves": list(s.leaves)} for s in u.stars] for u in cert.star_unions
        ],
    }


def certificate_from_dict(doc: dict) -> Certificate:
    shape = tuple(doc["shape"])
    trace = PeelTrace(
        shape,
        tuple(PeelStep(s["axis"], s["index"], tuple(tuple(e) for e in s["edges"])) for s in doc["trace"]),
    )
    forests = ForestDecomposition(
        shape, tuple(tuple(e) for e in doc["forest_1"]), tuple(tuple(e) for e in doc["forest_2"])
    )
    unions = tuple(
        StarUnion(shape, tuple(Star(s["center"], tuple(s["leaves"])) for s in u)) for u in doc["star_unions"]
    )
    return Certificate(trace, forests, unions)


def dumps_certificate(cert: Certificate) -> str:
    return json.dumps(certificate_to_dict(cert), separators=(",", ":"))


SURVEY_FIELDS = ["sample", "rows", "cols", "peelable", "witness_rows", "witness_cols"]


def survey_rows(report: SurveyReport) -> list[dict]:
    out = []
    for r in report.records:
        out.append(
            {
                "sample": r.sample,
                "rows": " ".join(map(str, r.rect.rows)),
                "cols": " ".join(map(str, r.rect.cols)),
                "peelable": int(r.peelable),
                "witness_rows": len(r.witness.rows) if r.witness else 0,
                "witness_cols": len(r.witness.cols) if r.witness else 0,
            }
        )
    return out


def survey_csv(report: SurveyReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SURVEY_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(survey_rows(report))
    return buf.getvalue()
