"""Computational complex dynamics of cubic Siegel polynomials and their
degree-5 Blaschke models: rotation numbers, parameter-space classification,
Boettcher/Green structure, constructive surgery stages, and rendering."""

__version__ = "0.1.0"

from .arith import (
    GOLDEN_MEAN,
    BlaschkeCircleLift,
    CalibrationResult,
    CircleMapLift,
    RotationAngle,
    RotationEstimate,
    calibrate_t,
    refine_t,
    continued_fraction,
    golden_mean,
    rigid_lift,
    rotation_number,
)
from .blaschke import (
    BlaschkeParams,
    C5Class,
    blaschke_eval,
    classify_c5,
    critical_residuals,
    first_entry_time,
    sharpen_rotation,
    solve_blaschke,
    standard_f_theta,
)
from .boettcher import (
    SCubic,
    boettcher_map,
    green_function,
    phi,
    phi_asymptotic,
    phi_winding,
    winding_degree,
)
from .cubic import (
    CubicMap,
    LinearizerSeries,
    OrbitClass,
    capture_probe,
    classify_cubic,
    linearizer,
    quadratic_eval,
    superattracting_center,
)
from .errors import (
    BracketError,
    BranchError,
    BudgetExhaustedError,
    ExtensionError,
    InversionError,
    PoleError,
    RationalInputError,
    SampleError,
    SiegelError,
    SolverFailureError,
    WindingError,
)
from .render import (
    MapSpec,
    Raster,
    Window,
    orbit_dump,
    render_julia,
    render_parameter_blaschke,
    render_parameter_cubic,
)
from .surgery import (
    CircleConjugacy,
    DiskExtension,
    beltrami_sample,
    circle_conjugacy,
    douady_earle_eval,
    invert_extension,
    modified_blaschke_eval,
)
