"""2-D inverse medium scattering toolkit: forward Helmholtz simulation,
reciprocity-based data processing, the disk prolate spheroidal wave function
(PSWF) spectral basis, and low-rank regularized inverse Born reconstruction.
"""

from .grids import (
    FULL_APERTURE,
    ContrastGrid,
    DirectionSet,
    FarFieldMatrix,
    PolarGrid,
    ProcessedData,
)
from .pswf import PswfBasis, build_basis, load_basis, save_basis
from .forward import (
    LippmannSchwingerSolver,
    SolverConvergenceError,
    born_far_field,
    degree_of_nonlinearity,
    full_far_field,
    solve_scattered,
)
from .pipeline import (
    add_noise,
    apply_limited_aperture,
    process_far_field,
    process_limited,
    rotate_contrast,
    rotate_processed,
)
from .inverse import (
    EmptyCutoffError,
    SpectralCoefficients,
    filter_profile,
    invert_eta,
    invert_sl,
    project,
)

__version__ = "0.1.0"
