"""Linking, writhe, twist, Biot-Savart and helicity integrals on R^3, S^3 and H^3."""
from ._backend import backend_name
from .curves import (CANONICAL, ClosedCurve, Framing, canonical_curve, check_simple, curve_from_points, make_framing,
                     min_distance, resample, ribbon_edge)
from .electro import (biot_savart, circulation, conv_A, conv_B, conv_G, convolution_laplacian_residuals,
                      electric_field, greens_operator, key_lemma_residual, maxwell_residuals, potential, volume_grid)
from .errors import (CurvedLinkError, CurvesTooClose, IncompatibleFormat, InvalidInput, NotOnManifold,
                     NumericalFailure, SelfIntersectionSuspected, TagMismatch)
from .fields import (FieldSpec, ScalarSpec, curl, divergence, eval_field, field_from_name, gradient_field, l2_inner,
                     l2_norm, left_invariant, right_invariant, vector_laplacian)
from .helicity import (DomainSpec, ball_radius_for_volume, ball_volume, bound_N, check_helicity_bound,
                       curl_eigen_bound, helicity)
from .kernels import KERNELS, KernelId, average_value, get_kernel, kernel_value, radial_laplacian
from .linking import Flavor, Format, linking_number, ltw_check, twist, writhe
from .quadrature import PairGrid, PolarGrid, S3Grid, convergence_sweep, integrate_curve, integrate_volume
from .space import Point, SpaceTag, TangentVec, geometry

__version__ = "0.1.0"
