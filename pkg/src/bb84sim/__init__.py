"""bb84sim: photon-level BB84 Monte Carlo and analytic link budgets.

The package splits along the physical chain: `optics` (polarization
algebra), `channel` (Beer-Lambert attenuation and the atmosphere
table), `detector` (windowed SPAD click model), `protocol` (the BB84
run/sift/QBER engine), `budget` (closed-form expectations, calibration,
verdicts, presets), and `scenario`/`report`/`cli` as the front end.
"""

from .budget import (
    CalibrationResult,
    LimitingFactor,
    LinkBudgetReport,
    LinkScenario,
    SecurityThresholds,
    analytic_qber,
    assess,
    calibrate,
    calibrated_detector,
    calibrated_optics,
    calibrated_source,
    default_calibration,
    link_budget,
    preset,
    presets,
)
from .channel import (
    AbsorbanceConvention,
    Aerosol,
    AtmosphereProfile,
    BromineCell,
    BromineChannel,
    ChannelModel,
    ExplicitTransmittance,
    ProfilePath,
    Season,
    bromine_transmittance,
    equivalent_path,
    load_profiles,
    lookup_profile,
    loss_db,
    profile_table,
    quoted_path_km,
    transmittance,
)
from .detector import (
    DetectorParams,
    SourceParams,
    WindowOutcome,
    click_probability,
    simulate_window,
)
from .errors import (
    CalibrationError,
    DomainError,
    NoFinitePathError,
    ScenarioError,
)
from .optics import (
    ALICE_HWP_SETTINGS,
    BOB_LR_SELECTOR,
    Basis,
    HwpSetting,
    OpticalChain,
    PolarizationState,
    encode,
    hwp_transform,
    matched_basis_error,
    misalignment_for_matched_error,
    pbs_probabilities,
)
from .protocol import (
    CellCounts,
    ProtocolConfig,
    QberEstimate,
    RunCounts,
    RunMode,
    qber,
    run,
    sift,
)
from .report import build_report, path_table_rows, render_human, render_machine
from .scenario import PROFILE_TABLE_ENV, build_scenario, load_scenario

__version__ = "1.0.0"
