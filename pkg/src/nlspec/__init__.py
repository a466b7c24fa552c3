"""Two-sided spectra of weighted nonlocal eigenvalue problems on an interval."""

from .discretization import (
    DiscreteOperator,
    Mesh,
    QuadratureSettings,
    Weight,
    assemble_stiffness,
    assemble_weight,
    block_surrogate,
    quadrature_drift,
)
from .errors import (
    AssemblyError,
    ConfigError,
    ExperimentError,
    InadmissibleIndexError,
    KernelError,
    MinimaxError,
    NlspecError,
    PencilError,
)
from .experiments import compare_weights, continuity_sweep, rev_construct, zero_set
from .kernel import Kernel, eval_kernel, tail_integral, validate_kernel
from .minimax import Subspace, a_orthogonal_complement, rayleigh_extrema, verify_Eminus, verify_Eplus
from .pencil import Pencil, Spectrum, admissible_indices, operator_distance, solve_spectrum

__version__ = "0.1.0"
