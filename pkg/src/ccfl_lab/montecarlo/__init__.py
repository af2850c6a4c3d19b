from __future__ import annotations

from ccfl_lab.montecarlo.detection import (
    DEFAULT_RATIOS,
    CovertCheck,
    McReport,
    simulate_detection,
    simulate_traffic_detection,
    validate_allocation,
    validate_covert_grid,
)
from ccfl_lab.montecarlo.fedavg import FedAvgTrace, run_fedavg_demo

__all__ = [
    "DEFAULT_RATIOS",
    "CovertCheck",
    "FedAvgTrace",
    "McReport",
    "run_fedavg_demo",
    "simulate_detection",
    "simulate_traffic_detection",
    "validate_allocation",
    "validate_covert_grid",
]
