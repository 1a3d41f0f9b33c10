import functools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commlab.bitmatrix import BooleanMatrix, gen_constant, gen_identity, zero_out_row
from commlab.protocols import (
    ALICE,
    BOB,
    DerandomizationError,
    DomainMismatchError,
    Leaf,
    MalformedTreeError,
    Node,
    ProtocolTree,
    SeedDomainTooLargeError,
    amplify,
    computes,
    constant_tree,
    derandomize_majority,
    deterministic,
    deterministic_cc_exact,
    dumps_tree,
    enumerate_cost_c_matrices,
    error_exact,
    error_monte_carlo,
    lift_row_zeroing,
    loads_tree,
    majority_error,
    majority_tree,
    run_deterministic,
    send_row_tree,
    tree_from_dict,
    tree_to_dict,
)
from commlab.zoo import EqualityProtocolParams, equality_protocol, star_membership_protocol

from oracles import all_matrices, exact_error_by_trees, matrices_by_tree_enumeration


def eq(n, t, family="affine"):
    return equality_protocol(EqualityProtocolParams(n, t, family))


@st.composite
def small_matrices(draw, max_side=5):
    n_rows = draw(st.integers(1, max_side))
    n_cols = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.lists(st.integers(0, 1), min_size=n_cols, max_size=n_cols), min_size=n_rows, max_size=n_rows))
    return BooleanMatrix.from_rows(bits)


# -- trees -------------------------------------------------------------------


def test_single_leaf_run():
    tree = constant_tree(3, 3, 1)
    assert tree.depth == 0
    for i in range(3):
        for j in range(3):
            r = run_deterministic(tree, i, j)
            assert (r.output, r.cost, r.transcript) == (1, 0, "")


def test_send_index_tree_on_identity_2():
    tree = send_row_tree(gen_identity(2))
    r = run_deterministic(tree, 0, 1)
    assert (r.output, r.cost, r.transcript) == (0, 2, "00")
    r = run_deterministic(tree, 1, 1)
    assert (r.output, r.cost, r.transcript) == (1, 2, "11")


@given(small_matrices(6))
def test_send_row_tree_computes_and_run_costs_bounded(m):
    tree = send_row_tree(m)
    assert computes(tree, m)
    assert tree.depth == math.ceil(math.log2(m.n_rows)) + 1
    for i in range(m.n_rows):
        for j in range(m.n_cols):
            r = run_deterministic(tree, i, j)
            assert r.cost == len(r.transcript) <= tree.depth
            assert r.output == m[i, j]
    assert error_exact(deterministic(tree), m).max_error == 0


def test_computes_examples():
    ones = constant_tree(2, 2, 1)
    assert computes(ones, gen_constant(2, 2, 1))
    assert not computes(ones, gen_identity(2))
    assert computes(send_row_tree(gen_identity(4)), gen_identity(4))
    with pytest.raises(DomainMismatchError):
        computes(ones, gen_identity(3))


def test_malformed_trees_rejected():
    with pytest.raises(MalformedTreeError):
        ProtocolTree(Node(ALICE, (0, 1, 1), Leaf(0), Leaf(1)), 2, 2)
    with pytest.raises(MalformedTreeError):
        Node("carol", (0, 1), Leaf(0), Leaf(1))
    with pytest.raises(MalformedTreeError):
        Leaf(2)
    with pytest.raises(MalformedTreeError):
        tree_from_dict({"n_rows": 2, "n_cols": 2, "root": {"owner": ALICE, "table": [0, 1]}})


def test_run_rejects_out_of_domain():
    with pytest.raises(IndexError):
        run_deterministic(constant_tree(2, 2, 0), 2, 0)


@given(small_matrices(5))
def test_tree_serialization_round_trip(m):
    tree = send_row_tree(m)
    back = loads_tree(dumps_tree(tree))
    assert back.output_matrix() == tree.output_matrix()
    assert back.depth == tree.depth
    assert tree_to_dict(back) == tree_to_dict(tree)


def test_serialization_of_dag_expands_to_tree():
    rp = eq(4, 2)
    tree = rp.tree(np.zeros(rp.seed_width, dtype=np.int64))
    doc = tree_to_dict(tree)
    assert tree_to_dict(tree_from_dict(doc)) == doc
    assert tree_from_dict(doc).output_matrix() == tree.output_matrix()


# -- exact and Monte Carlo error ----------------------------------------------


@pytest.mark.parametrize("n", range(4, 9))
def test_equality_t2_error_is_quarter(n):
    rep = error_exact(eq(n, 2), gen_identity(n))
    assert rep.max_error == Fraction(1, 4)
    assert rep.worst_input == (0, 1)
    per = rep.per_input
    assert np.all(np.diag(per) == 0)
    off = ~np.eye(n, dtype=bool)
    assert np.all(per[off] == 0.25)


@pytest.mark.parametrize("n,t,family", [(3, 1, "affine"), (4, 2, "affine"), (3, 1, "uniform"), (3, 2, "uniform"), (4, 1, "exact")])
def test_error_exact_matches_tree_walk_oracle(n, t, family):
    rp = eq(n, t, family)
    rep = error_exact(rp, gen_identity(n))
    oracle = exact_error_by_trees(rp, gen_identity(n))
    for i in range(n):
        for j in range(n):
            assert rep.error_at(i, j) == oracle[i][j]
    assert rep.max_error == max(max(row) for row in oracle)


def test_batch_agrees_with_sampled_trees():
    rng = np.random.default_rng(5)
    for rp in (eq(7, 3), eq(5, 2, "uniform"), amplify(eq(4, 2), 3), lift_row_zeroing(eq(6, 2), 3)):
        seeds = rp.draw_seeds(rng, 25)
        batch = rp.outputs(seeds)
        for s, seed in enumerate(seeds):
            assert np.array_equal(rp.tree(seed).output_matrix().to_numpy(), batch[s])


def test_error_exact_refuses_large_or_unbounded_domains():
    with pytest.raises(SeedDomainTooLargeError):
        error_exact(eq(16, 8, "uniform"), gen_identity(16))


def test_monte_carlo_deterministic_protocol_has_zero_error():
    m = gen_identity(5)
    rep = error_monte_carlo(deterministic(send_row_tree(m)), m, 300, seed=1)
    assert rep.max_error == 0
    assert 0 < rep.radius < 0.1


def test_monte_carlo_equality_on_identity_16():
    rep = error_monte_carlo(eq(16, 2), gen_identity(16), 100_000, seed=11)
    assert abs(rep.max_error - 0.25) <= 0.01
    assert np.all(np.diag(rep.per_input) == 0)


def test_monte_carlo_amplified_equality_on_identity_16():
    rep = error_monte_carlo(amplify(eq(16, 2), 3), gen_identity(16), 100_000, seed=12)
    assert abs(rep.max_error - 5 / 32) <= 0.01


def test_monte_carlo_independent_of_workers():
    rp, m = eq(8, 2), gen_identity(8)
    a = error_monte_carlo(rp, m, 200_000, seed=3, workers=1)
    b = error_monte_carlo(rp, m, 200_000, seed=3, workers=4)
    assert np.array_equal(a.wrong, b.wrong)
    assert a.worst_input == b.worst_input


def test_exact_and_monte_carlo_agree_on_100_pairs():
    rng = np.random.default_rng(2024)
    for k in range(100):
        n = int(rng.integers(2, 7))
        t = int(rng.integers(1, 4))
        if k % 2:
            part = rng.integers(0, max(1, n // 2) + 1, size=n).tolist()
            rp = star_membership_protocol(part, t)
            m = BooleanMatrix.from_rows([[int(a == b) for b in part] for a in part])
        else:
            rp, m = eq(n, t), gen_identity(n)
        exact = error_exact(rp, m)
        mc = error_monte_carlo(rp, m, 4000, seed=k)
        diff = np.abs(mc.per_input - exact.per_input)
        assert np.all(diff <= mc.radius), (k, n, t)


# -- amplification -------------------------------------------------------------


def test_majority_error_arithmetic():
    q = Fraction(1, 4)
    assert majority_error(q, 1) == q
    assert majority_error(q, 3) == Fraction(10, 64)
    assert majority_error(q, 5) == Fraction(106, 1024)


def test_amplify_one_is_identity_and_even_rejected():
    rp = eq(4, 2)
    assert amplify(rp, 1) is rp
    for reps in (0, 2, 4):
        with pytest.raises(ValueError):
            amplify(rp, reps)


def test_amplify_matches_exact_binomial():
    rp = eq(4, 2)
    amp = amplify(rp, 3)
    assert amp.cost_bound == 3 * rp.cost_bound
    base = error_exact(rp, gen_identity(4))
    rep = error_exact(amp, gen_identity(4))
    assert rep.max_error == Fraction(10, 64)
    for i in range(4):
        for j in range(4):
            assert rep.error_at(i, j) == majority_error(base.error_at(i, j), 3)


def test_amplify_five_fold_monte_carlo():
    rep = error_monte_carlo(amplify(eq(6, 2), 5), gen_identity(6), 100_000, seed=8)
    assert abs(rep.max_error - 106 / 1024) <= rep.radius


def test_amplified_tree_depth():
    amp = amplify(eq(5, 2), 3)
    tree = amp.tree(np.ones(amp.seed_width, dtype=np.int64))
    assert tree.depth <= amp.cost_bound == 9


def test_majority_tree_on_deterministic_trees():
    m = gen_identity(3)
    trees = [send_row_tree(m), constant_tree(3, 3, 0), send_row_tree(m)]
    assert computes(majority_tree(trees), m)
    assert majority_tree(trees).depth == 2 * send_row_tree(m).depth


# -- row zeroing -------------------------------------------------------------


def test_lift_on_exact_identity_2():
    m = gen_identity(2)
    rp = deterministic(send_row_tree(m))
    lifted = lift_row_zeroing(rp, 0)
    assert lifted.cost_bound == rp.cost_bound + 1
    target = zero_out_row(m, 0)
    assert target.to_list() == [[0, 0], [0, 1]]
    assert error_exact(lifted, target).max_error == 0
    assert computes(lifted.tree([]), target)


@pytest.mark.parametrize("n,row", [(4, 0), (5, 3), (6, 5)])
def test_lift_error_entrywise(n, row):
    rp = eq(n, 2)
    lifted = lift_row_zeroing(rp, row)
    before = error_exact(rp, gen_identity(n))
    after = error_exact(lifted, zero_out_row(gen_identity(n), row))
    assert np.all(after.wrong[row] == 0)
    assert np.all(after.wrong <= before.wrong)
    assert after.max_error <= before.max_error


# -- derandomization -----------------------------------------------------------


def test_derandomize_identity_4_with_33_trees():
    m = gen_identity(4)
    trees = derandomize_majority(m, eq(4, 2), 33, attempts=50, seed=0)
    assert len(trees) == 33
    for i in range(4):
        for j in range(4):
            votes = sum(run_deterministic(tr, i, j).output for tr in trees)
            assert int(2 * votes > 33) == m[i, j]


def test_derandomize_single_deterministic_tree():
    m = gen_identity(4)
    tree = send_row_tree(m)
    (only,) = derandomize_majority(m, deterministic(tree), 1)
    assert only is tree


def test_derandomize_rejects_even_t():
    with pytest.raises(ValueError):
        derandomize_majority(gen_identity(4), eq(4, 2), 2)


def test_derandomize_reports_failure_when_no_single_tree_works():
    # 2-bit fingerprints cannot separate 8 keys, so every single tree errs
    with pytest.raises(DerandomizationError):
        derandomize_majority(gen_identity(8), eq(8, 2), 1, attempts=20)


# -- enumeration and exact deterministic cost ------------------------------------


@functools.lru_cache(maxsize=None)
def enum(n, c):
    return enumerate_cost_c_matrices(n, c)


def test_enumeration_small_examples():
    assert enum(1, 0) == {gen_constant(1, 1, 0), gen_constant(1, 1, 1)}
    assert len(enum(2, 1)) == 6
    assert [len(enum(2, c)) for c in range(4)] == [2, 6, 16, 16]


@pytest.mark.parametrize("n,c", [(2, 0), (2, 1), (2, 2), (3, 0), (3, 1)])
def test_enumeration_matches_explicit_tree_enumeration(n, c):
    assert enum(n, c) == matrices_by_tree_enumeration(n, c)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_enumeration_monotone(n):
    for c in range(3):
        assert enum(n, c) <= enum(n, c + 1)


def test_enumeration_size_guard():
    with pytest.raises(ValueError):
        enumerate_cost_c_matrices(5, 1)
    with pytest.raises(ValueError):
        enumerate_cost_c_matrices(2, 4)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_deterministic_cc_of_identity(n):
    assert deterministic_cc_exact(gen_identity(n)) == math.ceil(math.log2(n)) + 1


def test_deterministic_cc_of_constants():
    assert deterministic_cc_exact(gen_constant(5, 3, 0)) == 0
    assert deterministic_cc_exact(gen_constant(8, 8, 1)) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_deterministic_cc_matches_enumeration_on_every_matrix(n):
    for m in all_matrices(n, n):
        d = deterministic_cc_exact(m)
        assert m in enum(n, d)
        assert d == 0 or m not in enum(n, d - 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**16 - 1))
def test_deterministic_cc_matches_enumeration_4x4(bits):
    m = BooleanMatrix.from_rows([[(bits >> (4 * i + j)) & 1 for j in range(4)] for i in range(4)])
    d = deterministic_cc_exact(m)
    assert d <= 3
    assert m in enum(4, d)
    assert d == 0 or m not in enum(4, d - 1)


@given(small_matrices(6))
def test_deterministic_cc_bounded_by_send_row(m):
    d = deterministic_cc_exact(m)
    assert d <= send_row_tree(m).depth
    assert d <= send_row_tree(m.transpose()).depth
    assert d == deterministic_cc_exact(m.transpose())


def test_deterministic_cc_size_guard():
    with pytest.raises(ValueError):
        deterministic_cc_exact(gen_identity(9))
