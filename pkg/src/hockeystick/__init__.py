"""Hockey-stick divergence toolkit for quantum differential privacy."""

from .core import (
    Channel,
    CPMap,
    ValidationError,
    amplitude_damping,
    depolarizing,
    fidelity,
    identity_channel,
    local_depolarizing,
    sample_channel,
    sample_state,
    unitary_channel,
)
from .divergences import (
    PreconditionError,
    d_max,
    hockey_stick,
    property_check,
    renyi_divergence,
    smooth_dmax_witness,
    trace_distance,
)
from .contraction import (
    ContractionEstimate,
    MethodError,
    estimate_contraction,
    eta_choi_upper,
    eta_depolarizing_closed,
    eta_lower_optimize,
)
from .privacy import (
    DpBudget,
    LayeredAlgorithm,
    NeighborRelation,
    NoiseSpec,
    RenyiBudget,
    SoundnessError,
    certify_pair,
    delta_global_depolarizing,
    delta_layered_generic,
    delta_local_depolarizing,
    delta_qubit_noise,
)
from .hypothesis import (
    ErrorPoint,
    PrivacyRegion,
    region_contains,
    region_subset_check,
    relax_budget,
    sample_channel_region,
)

__version__ = "0.1.0"
