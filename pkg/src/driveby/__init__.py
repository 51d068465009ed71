"""Drive-by bridge monitoring: vehicle-bridge interaction simulation and
parameter identification from vehicle accelerations."""
from .bridge import BridgeParams
from .config import ConfigError, ExperimentConfig
from .kernels import BACKEND
from .road import RoadUnevenness, generate_road
from .simulate import SimConfig, SimRecord, simulate
from .vehicle import VehicleParams

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BridgeParams", "ConfigError", "ExperimentConfig", "RoadUnevenness",
    "SimConfig", "SimRecord", "VehicleParams", "generate_road", "simulate",
]
