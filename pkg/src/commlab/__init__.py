"""Two-party communication complexity workbench."""

from .bitmatrix import (
    BooleanMatrix,
    ConstructionParams,
    Rectangle,
    contains_gt,
    gen_gt,
    gen_identity,
    gen_row_regular,
    read_bmat,
    submatrix,
    write_bmat,
    zero_out_row,
)
from .discrepancy import (
    bernstein_tail,
    disc_exact,
    disc_local_search,
    disc_rect,
    expected_rect_mass,
    mu_from_matrix,
    rcc_lower_bound,
)
from .protocols import (
    ProtocolTree,
    RandomizedProtocol,
    amplify,
    computes,
    derandomize_majority,
    deterministic_cc_exact,
    enumerate_cost_c_matrices,
    error_exact,
    error_monte_carlo,
    lift_row_zeroing,
    run_deterministic,
)
from .structure import certify, forest_decompose, peel, star_decompose, survey_submatrices
from .zoo import EqualityProtocolParams, compile_sparse_protocol, equality_protocol, star_membership_protocol

__version__ = "0.1.0"
