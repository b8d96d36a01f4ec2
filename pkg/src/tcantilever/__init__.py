"""Design and verification toolkit for T-shaped microcantilever resonators."""

__version__ = "0.1.0"

from .core import (
    BEAM_MASS_COEFF,
    CLASSICAL_BEAM_MASS_COEFF,
    DeflectionCurve,
    LumpedPrediction,
    MaterialSpec,
    SectionInertia,
    TGeometry,
    deflection_curve,
    lumped_prediction,
    mass_sensitivity,
    resonance_frequency,
    section_inertias,
    segment_masses,
    spring_constant_rect,
    spring_constant_t,
    tip_deflection,
)
from .devices import (
    ComparisonReport,
    DeviceRecord,
    FitResult,
    MeasurementRecord,
    compare,
    fit_coefficients,
    load_catalog,
    load_measurements,
    shipped_catalog,
    shipped_measurements,
)
from .estimators import EffectiveMassCalibrator, ResonatorFrequencyModel
from .exceptions import ConvergenceError, DataFormatError, GeometryError, NoTransitionError
from .modal import (
    ModalResult,
    SteppedBeamMesh,
    build_mesh,
    effective_mass_from_modal,
    first_mode,
    modal_analysis,
    static_tip_stiffness,
)
from .regime import Regime, SweepResult, SweepSpec, classify_regime, find_transition, sweep
