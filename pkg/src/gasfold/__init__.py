"""
Exact multivalued solutions of homentropic 1-D gas dynamics.

Thermodynamic models, the 2-form description of the Euler system, a
separated solution family built from two quadratures, and its caustics and
shock fronts.
"""
from .errors import (
    ConfigError,
    ContinuationStall,
    DegenerateFamily,
    DomainError,
    GasfoldError,
    HyperbolicityError,
    OracleError,
    OutsideSupport,
    ReductionError,
    SingularCharacteristic,
    SingularOperator,
)
from .family import (
    ProfileSample,
    SolutionFamily,
    branch_u,
    branch_x,
    fold_count,
    fold_indicator,
    profile,
    solution_surface,
    t_of,
    x_of,
)
from .geometry import classify, effective_forms, euler_forms, restrict_2form
from .singularity import caustic, cut_profile, potential_H, shock_front, shock_fronts
from .thermo import (
    HomentropicModel,
    IdealGasParams,
    ThermodynamicModel,
    homentropic_reduce,
    ideal_gas_model,
    model_from_pressure,
    model_from_sound_speed,
    power_law_model,
)

__version__ = "0.1.0"
