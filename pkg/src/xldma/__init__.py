"""Near-field modeling, channel estimation, and measurement design for XL-DMA arrays."""

from .geometry import (
    ArrayGeometry,
    SourceParams,
    WAVEFRONT_MODELS,
    beamforming_gain,
    element_distance,
    element_distances,
    manifold,
    steering_az,
    steering_az_derivatives,
    steering_az_inv,
    steering_el,
)
from .channel import (
    DmaHardware,
    LorentzianWeight,
    MeasurementBundle,
    PathSet,
    lorentzian_project,
    lorentzian_weights,
    measure,
    measure_bundle,
    sample_paths,
    synthesize_channel,
    waveguide_diagonal,
    waveguide_matrix,
)
from .dictionaries import (
    AzDictionary,
    CapacityError,
    JointDictionary,
    JointGrid,
    PolarGrid,
    build_az_dictionary,
    build_el_grid,
    build_joint_dictionary,
)
from .estimators import (
    DegenerateSupportError,
    FullEstimate,
    RefineOptions,
    SupportEstimate,
    az_independent,
    dols_select,
    el_az_decoupled,
    el_az_joint,
    estimate_el,
    og_dols,
    og_refine,
    ols_recover,
    oracle_ls,
    reconstruct,
)
from .mmo import (
    DESIGN_MODES,
    MeasurementDesign,
    PhaseAlignmentUnavailable,
    TargetGram,
    design_coherence,
    estimate_power_budget,
    make_design,
    solve_coordinate_descent,
    solve_phase_alignment,
    target_gram,
    total_coherence,
    total_coherence_reduced,
)
from .config import ConfigError, ExperimentConfig, load_config

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
