"""Order exchange between logistics providers under individual rationality."""

from gatx.model import (
    Instance,
    InfeasibleInstanceError,
    LspParams,
    Order,
    Solution,
    StructuralError,
    TimeDistanceMatrix,
    Vehicle,
    VehicleSchedule,
    Waypoint,
    evaluate_schedule,
    lsp_profit,
    social_welfare,
)

__version__ = "0.1.0"
