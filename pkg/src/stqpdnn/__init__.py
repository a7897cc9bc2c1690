"""Standard quadratic programs: exact solutions, DNN relaxations, exactness certificates."""

from .conic import ConicProgram, ConicSolution, SolverOptions, solve_conic
from .exact import (
    KktCertificate,
    SolveResult,
    check_kkt,
    check_second_order,
    copositive_zeros,
    is_copositive,
    optimal_set,
    solve_stqp,
)
from .families import (
    ExactRecipe,
    FamilyVerdict,
    GapRecipe,
    MgwRecipe,
    family_verdict,
    gen_exact,
    gen_gap,
    gen_mgw,
    in_Q1,
    in_Q2,
    in_Q3,
    in_concave,
)
from .graphs import (
    CliqueBounds,
    Graph,
    clique_bounds,
    convexity_graph,
    is_perfect,
    is_spn_completable,
    max_weight_clique,
    maximal_cliques,
    spn_completable_exactness,
    theta,
    theta_prime,
)
from .matrices import (
    SimplexPoint,
    SymMatrix,
    all_ones,
    diag_scale,
    horn,
    identity,
    permute,
    principal_submatrix,
    quadratic_form,
    read_matrix,
    shift,
    write_matrix,
)
from .relax import (
    ExactnessReport,
    RelaxResult,
    SpnCertificate,
    classify_exactness,
    ell,
    in_Qx,
    is_spn,
    search_exact_witness,
    special_support_exactness,
)

__version__ = "0.1.0"
