"""Concrete public-coin protocols.

All protocols here reduce to equality checks on integer keys: Alice holds
``row_key[u]``, Bob holds ``col_key[v]``, and they compare t-bit
fingerprints of their keys.  Fingerprint bit ``d`` of key ``x`` is
membership of ``x`` in a shared random subset ``S_d``.  Alice sends her t
bits, Bob replies whether they match his.  Equal keys always match, so
errors only happen on unequal keys, each with probability exactly 2^-t.

Two subset families are available:

``"affine"``
    ``S = {x : <a, x> xor b = 1}`` for uniform ``a`` in {0,1}^L and ``b`` in
    {0,1}; pairwise independent and enough for the exact 1/2 separation,
    with only 2^(L+1) outcomes per subset.
``"uniform"``
    every subset of the key domain equally likely.
``"exact"``
    no randomness: the subsets are the binary digits of the key, so the
    check is a full index exchange and never errs (t is ignored).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitmatrix import BooleanMatrix
from .protocols import ALICE, BOB, Leaf, Node, ProtocolTree, RandomizedProtocol, TreeNode
from .structure import Certificate, StarUnion, validate_certificate, validate_star_union

FAMILIES = ("affine", "uniform", "exact")


@dataclass(frozen=True)
class EqualityProtocolParams:
    domain_size: int
    t: int
    family: str = "affine"

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError("domain_size must be positive")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")


class _Fingerprints:
    """t shared random subsets of ``range(domain)``, encoded as seed digits (all binary)."""

    def __init__(self, domain: int, t: int, family: str):
        self.width = (domain - 1).bit_length()
        if family == "exact":
            t = max(1, self.width)
        self.domain, self.t, self.family = domain, t, family
        self.digits_per_subset = {"affine": self.width + 1, "uniform": domain, "exact": 0}[family]
        self.n_digits = t * self.digits_per_subset
        self._keys = np.arange(domain, dtype=np.int64)

    def membership(self, digits: np.ndarray) -> np.ndarray:
        """(S, n_digits) seed digits -> (S, t, domain) membership bits."""
        d = digits.reshape(digits.shape[0], self.t, self.digits_per_subset)
        if self.family == "exact":
            bits = (np.arange(self.domain)[None, :] >> np.arange(self.t)[:, None]) & 1
            return np.broadcast_to(bits.astype(np.uint8), (digits.shape[0],) + bits.shape)
        if self.family == "uniform":
            return d.astype(np.uint8)
        a = (d[..., : self.width] << np.arange(self.width, dtype=np.int64)).sum(axis=-1)
        b = d[..., self.width].astype(np.uint8)
        parity = (np.bitwise_count(a[..., None] & self._keys) & 1).astype(np.uint8)
        return parity ^ b[..., None]

    def codes(self, digits: np.ndarray) -> np.ndarray:
        """(S, n_digits) -> (S, domain) integer fingerprints."""
        bits = self.membership(digits)
        dtype = np.uint8 if self.t <= 8 else np.uint16 if self.t <= 16 else np.int64
        code = np.zeros((bits.shape[0], self.domain), dtype=dtype)
        for d in range(self.t):
            code |= bits[:, d, :].astype(code.dtype) << d
        return code


def _check_chain(
    checks: Sequence[tuple[Sequence[int], Sequence[int], np.ndarray]], n_rows: int, n_cols: int
) -> ProtocolTree:
    """Tree running the equality checks in order and outputting their OR.

    Each entry is ``(row_key, col_key, membership)`` with membership of shape
    ``(t, domain)``.  Alice sends her t fingerprint bits, Bob replies 1 on a
    match; a 1 reply ends the protocol with output 1, a 0 reply moves on to
    the next check.  The reply after the last check is the output.
    """
    leaves = (Leaf(0), Leaf(1))
    nxt: TreeNode = leaves[0]
    for row_key, col_key, member in reversed(checks):
        t = member.shape[0]
        alice_bits = [tuple(int(member[d, row_key[u]]) for u in range(n_rows)) for d in range(t)]
        col_codes = [sum(int(member[d, col_key[v]]) << d for d in range(t)) for v in range(n_cols)]

        def build(depth: int, prefix: int, after: TreeNode) -> TreeNode:
            if depth == t:
                table = tuple(1 if code == prefix else 0 for code in col_codes)
                return Node(BOB, table, after, leaves[1])
            return Node(
                ALICE,
                alice_bits[depth],
                build(depth + 1, prefix, after),
                build(depth + 1, prefix | (1 << depth), after),
            )

        nxt = build(0, 0, nxt)
    return ProtocolTree(nxt, n_rows, n_cols)


def key_match_protocol(
    row_keys: Sequence[Sequence[int]],
    col_keys: Sequence[Sequence[int]],
    t: int,
    family: str = "affine",
    name: str = "",
) -> RandomizedProtocol:
    """OR over checks of ``[row_keys[c][u] == col_keys[c][v]]``, each by t-bit fingerprints."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if len(row_keys) != len(col_keys) or not row_keys:
        raise ValueError("need the same positive number of row and column key maps")
    n_rows, n_cols = len(row_keys[0]), len(col_keys[0])
    rk = [np.asarray(k, dtype=np.int64) for k in row_keys]
    ck = [np.asarray(k, dtype=np.int64) for k in col_keys]
    if any(len(k) != n_rows for k in rk) or any(len(k) != n_cols for k in ck):
        raise ValueError("key maps must be total over each side")
    if any((k < 0).any() for k in rk + ck):
        raise ValueError("keys must be non-negative")
    domain = int(max(max(k.max() for k in rk), max(k.max() for k in ck))) + 1
    fps = _Fingerprints(domain, t, family)
    n_checks = len(rk)
    per = fps.n_digits

    def sampler(seed):
        seed = np.asarray(seed, dtype=np.int64).reshape(n_checks, per)
        checks = [(rk[c], ck[c], fps.membership(seed[c][None, :])[0]) for c in range(n_checks)]
        return _check_chain(checks, n_rows, n_cols)

    def batch(seeds):
        seeds = np.asarray(seeds, dtype=np.int64)
        out = np.zeros((seeds.shape[0], n_rows, n_cols), dtype=bool)
        hit = np.empty_like(out)
        for c in range(n_checks):
            codes = fps.codes(seeds[:, c * per : (c + 1) * per])
            np.equal(codes[:, rk[c], None], codes[:, None, ck[c]], out=hit)
            out |= hit
        return out

    return RandomizedProtocol(
        n_rows, n_cols, n_checks * (fps.t + 1), sampler, radices=(2,) * (n_checks * per), batch=batch, name=name
    )


def equality_protocol(params: EqualityProtocolParams) -> RandomizedProtocol:
    """Public-coin protocol for the identity matrix with one-sided error 2^-t and cost t + 1."""
    keys = list(range(params.domain_size))
    return key_match_protocol([keys], [keys], params.t, params.family, name=f"eq(n={params.domain_size},t={params.t})")


def star_membership_protocol(
    partition: Sequence[int], t: int, col_partition: Sequence[int] | None = None, family: str = "affine"
) -> RandomizedProtocol:
    """Decide whether the two inputs carry the same star index."""
    cols = partition if col_partition is None else col_partition
    return key_match_protocol([list(partition)], [list(cols)], t, family, name="star")


def star_membership_matrix(partition: Sequence[int], col_partition: Sequence[int] | None = None) -> BooleanMatrix:
    cols = partition if col_partition is None else col_partition
    return BooleanMatrix.from_rows([[1 if a == b else 0 for b in cols] for a in partition])


# -- compiled protocols for sparse certificates --------------------------------


@dataclass(frozen=True, eq=False)
class CompiledSparseProtocol:
    """OR of star-membership checks, one per star union of a certificate.

    Row vertex ``u`` and column vertex ``v`` are adjacent in a star union
    exactly when they lie in the same star, because every star edge joins
    the centre to a leaf on the other side.  Vertices outside every star of
    a union get their own sentinel index past the star indices, so they
    never match anything.
    """

    star_unions: tuple[StarUnion, ...]
    t_check: int | None
    row_keys: tuple[tuple[int, ...], ...]
    col_keys: tuple[tuple[int, ...], ...]
    protocol: RandomizedProtocol

    @property
    def cost(self) -> int:
        return self.protocol.cost_bound


def star_keys(union: StarUnion) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Per-side star indices with unique sentinels for uncovered vertices."""
    n_rows, n_cols = union.shape
    index = union.index_map()
    base = len(union.stars)
    rows = tuple(index.get(u, base + u) for u in range(n_rows))
    cols = tuple(index.get(n_rows + v, base + n_rows + v) for v in range(n_cols))
    return rows, cols


def compile_sparse_protocol(
    cert: Certificate, t_check: int | None = 4, family: str = "affine", f: BooleanMatrix | None = None
) -> CompiledSparseProtocol:
    """Constant-cost protocol computing the matrix certified by ``cert``.

    Runs one fingerprinted equality check per star union (four of them) and
    outputs the OR, at cost ``4 * (t_check + 1)``.  ``t_check=None`` swaps
    fingerprints for a full exchange of star indices, giving an error-free
    protocol.  If ``f`` is given the certificate is validated against it.
    """
    if f is not None:
        validate_certificate(f, cert)
    for u in cert.star_unions:
        validate_star_union(u)
    keys = [star_keys(u) for u in cert.star_unions]
    row_keys = tuple(k[0] for k in keys)
    col_keys = tuple(k[1] for k in keys)
    if t_check is None:
        rp = key_match_protocol(row_keys, col_keys, 1, "exact", name="sparse-exact")
    else:
        rp = key_match_protocol(row_keys, col_keys, t_check, family, name=f"sparse(t={t_check})")
    return CompiledSparseProtocol(tuple(cert.star_unions), t_check, row_keys, col_keys, rp)
