"""Three coupled phase oscillators on an isosceles triangle with signed coupling."""
from .model import Coupling, DiffCoords, diff_coords, energy, gradient, jacobian, rhs, wrap_angle
from .equilibria import (
    CriticalPointId,
    ParamRegion,
    Stability,
    classify_region,
    closed_form_spectrum,
    enumerate_critical_points,
    figure1_data,
    numeric_spectrum,
)
from .integrate import IntegratorConfig, Method, StopReason, energy_monotonicity_check, integrate, limit_point
from .diameter import (
    TranslatedState,
    certify_decay,
    check_proof_inequalities,
    decay_bound,
    diameter,
    dini_closed_form,
    region_membership,
    translate,
)
from .basin import SweepConfig, basin_report, sweep, verify_region_subset

__version__ = "0.1.0"
