"""Oscillation seminorms, total variation, and disjoint cube packing on
uniform 1D/2D grid functions.

The package computes means and mean oscillations over (possibly rotated)
cubes with exact cell-overlap geometry, certified lower bounds of the
packing suprema that drive them, lattice projections and their variation
bounds, and desk-scale convergence/compactness experiments.
"""

from .cubes import (
    Cube,
    CubeFamily,
    cell_overlap_weights,
    family_score,
    mean,
    mean_oscillation,
    oscillation,
    verify_disjoint,
)
from .errors import (
    BmotvError,
    BudgetExceededError,
    DimensionError,
    GridParseError,
    IncompatibleLatticeError,
    InvalidSpecError,
    LatticeError,
    OverlappingFamilyError,
    ResolutionMismatchError,
    SupportError,
)
from .gamma import (
    CheckReport,
    DecompositionSpec,
    SweepReport,
    compactness_demo,
    recovery_sequence,
    remark_counterexample,
    run_lemma_suite,
    sweep_keps,
    verify_convolution_monotonicity,
    verify_eps_close,
    verify_halving,
    verify_lemma_1d,
    verify_lemma_nd,
)
from .grid import (
    FunctionSpec,
    GridFunction,
    generate,
    l1_distance,
    lp_norm,
    read_grid,
    write_grid,
)
from .kernels import backend_name
from .meshes import (
    Mesh,
    blowup_ratio,
    directional_tv,
    mollify,
    project,
    total_variation,
)
from .packing import (
    PackingSolution,
    bbm_seminorm,
    ieps,
    keps_1d_dp,
    keps_greedy,
    keps_lattice,
    keps_oracle,
    solve_keps,
)

__version__ = "0.1.0"
