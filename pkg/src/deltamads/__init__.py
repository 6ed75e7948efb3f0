"""Mixed-variable derivative-free optimization toolkit.

A mesh-adaptive poll engine hybridized with a Delaunay-surrogate search over
the continuous subspace, plus builtin benchmarks, a subprocess blackbox
protocol, and reporting utilities.
"""

from .driver import (
    ALGORITHMS,
    DriverConfig,
    EvaluationFailed,
    InitialPointFailed,
    RunResult,
    optimize,
    run_algorithm,
    run_random,
)
from .mesh import (
    BudgetExhausted,
    Mesh,
    extended_poll,
    generate_directions,
    initial_mesh,
    opportunistic_poll,
    poll_candidates,
    update_mesh,
)
from .metrics import ClassScores, ConfusionCounts, convergence_table, mean_f1, prf1
from .problems import BenchmarkProblem, builtin_suite, get_problem
from .space import (
    Cache,
    Evaluation,
    Kind,
    Point,
    SearchSpace,
    SpaceError,
    Step,
    StructuralError,
    VariableSpec,
    builtin_vae_space,
    canonical_key,
    merge,
    project_bounds,
    space_from_json,
    space_to_json,
    split,
)
from .surrogate import (
    Interpolant,
    NoCandidate,
    SearchModel,
    build_search_model,
    fit_interpolant,
    search_minimize,
)
from .triangulation import (
    DimensionTooHigh,
    NotEnoughPoints,
    OutsideHull,
    Triangulation,
    circumsphere,
    triangulate,
    uncertainty,
)

__version__ = "0.1.0"
