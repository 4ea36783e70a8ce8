"""Generalized Jacobians and theta functions of singular curves.

Construct generalized-Jacobian data from desingularisation descriptions,
evaluate the associated theta sections (rational, nodal, cuspidal, general),
locate their zeros, and verify the generalized Abel theorems numerically.
"""

from .curves import (
    INF,
    CurveSpec,
    GenusReport,
    SingularPoint,
    genus_accounting,
    parse_curve_spec,
    serialize_curve_spec,
)
from .errors import (
    ChartError,
    DegenerateShiftError,
    GenThetaError,
    GeometryError,
    ParseError,
    PoleError,
    PrecisionError,
    SizeError,
    ValidationError,
)
from .p1 import (
    AbelPoint,
    ChartIndex,
    HigherOrder,
    SimplePair,
    abel_map_p1,
    enumerate_higher,
    enumerate_pairs,
    exp_xi,
    exp_xi_inv,
    form_value,
    zeta,
    zeta_inv,
)
from .periods import (
    PeriodData,
    TorusCurve,
    abel_map_torus,
    build_period_data,
    parse_period_data,
    serialize_period_data,
    theta1,
    torus_primitives,
    validate_periods,
)
from .sections import (
    ShiftParams,
    ThetaValue,
    gen_theta_cusp,
    gen_theta_from_abel,
    gen_theta_general,
    gen_theta_node,
    gen_theta_rational,
    transition,
)
from .theta import (
    MultiIndexSet,
    RiemannMatrix,
    TruncationPolicy,
    check_lemma2,
    periodicity_factor,
    riemann_theta,
    theta_D,
)

__version__ = "0.1.0"
