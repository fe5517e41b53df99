"""jjaging: Josephson junction resistance aging, annealing, and prediction.

The package simulates junction resistance trajectories through storage
environment schedules and discrete anneal events, fits measured time series
to logarithmic aging models, runs chip-level variability Monte Carlo, and
predicts resistance / critical-current / qubit-frequency drift at a future
cooldown time.
"""

from .errors import (
    ConfigurationError,
    InsufficientDataError,
    JJAgingError,
    ParameterError,
    ParseError,
    ValidationError,
)
from .model import (
    AMBIENT,
    DEFAULT_CONSTANTS,
    GLOVEBOX,
    VACUUM,
    AgingParams,
    BarrierParams,
    Environment,
    EnvironmentKind,
    PhysicalConstants,
    TwoLogParams,
    barrier_kappa,
    critical_current_from_resistance,
    effective_tau,
    eval_single_log,
    eval_two_log,
    qubit_frequency_shift,
    resistance_ratio_from_barrier,
)
from .trajectory import (
    DAY_S,
    AnnealEvent,
    JunctionProfile,
    SimConfig,
    StorageSchedule,
    ThermalAnneal,
    TrajectoryState,
    VoltageAnneal,
    apply_thermal_anneal,
    apply_voltage_anneal,
    bound_curve,
    measurement_exposure,
    resume_trajectory,
    simulate_trajectory,
)
from .ensemble import (
    OPEN_RESISTANCE_THRESHOLD_OHM,
    ChipDataset,
    ChipSpec,
    DrawnChip,
    MeasurementRecord,
    aggregate_series,
    coefficient_of_variation,
    draw_chip,
    simulate_chip,
)
from .fitting import (
    ChipFitResult,
    FitOptions,
    FitResult,
    fit_chip,
    fit_single_log,
    fit_two_log,
    grid_search_oracle,
    parameter_histogram,
)
from .dataio import (
    FitReport,
    IVSweep,
    build_fit_report,
    export_plot_data,
    load_events,
    load_measurements,
    load_schedule,
    read_report,
    resistance_from_iv,
    save_measurements,
    write_report,
)
from .presets import PRESET_NAMES, ChipPreset, chip_preset

__version__ = "0.1.0"
