"""Numerical tools for deciding whether Hölder maps factor through trees."""
from .curves import (
    HolderEstimate,
    Modulus,
    SampledCurve,
    estimate_holder_constant,
    loop_erase,
    reparameterize_by_variation,
    sigma_variation,
    smooth_modulus,
)
from .exceptions import InvalidInputError, ModulusRangeError, NotATreeError, SizeLimitError
from .heisenberg import (
    HeisenbergPoint,
    heisenberg_square_check,
    horizontal_lift,
    koranyi_distance,
    lifting_identity_residuals,
)
from .surface import (
    ConvergenceReport,
    RoughSquareData,
    SquareField,
    compute_square_data,
    degree_pairing_check,
    surface_integral_first_order,
    surface_integral_second_order,
)
from .tree import (
    MetricGraphMap,
    PropertyTCertificate,
    QuotientTree,
    build_quotient_tree,
    cone_extension,
    contraction,
    property_t_check,
    pseudo_metric_D_exact,
    pseudo_metric_D_surrogate,
)
from .winding import (
    WindingField,
    WindingMoments,
    current_pairing,
    winding_field,
    winding_moments,
    winding_number,
)
from .young import SampledFunction, YoungResult, boundary_integral, young_integral

__version__ = "0.1.0"
