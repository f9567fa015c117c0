"""Full-duplex cell-free massive MIMO beamforming simulator.

Library surface: scenario configuration (config), channel generation
(topology), SINR/MSE evaluation (metrics), the perfect-CSI alternating
optimizer (perfect_csi), the distributed over-the-air training protocol
(ota), comparison schemes (baselines), and the Monte-Carlo harness + CLI
(harness, cli).
"""

from .config import NetworkConfig, desk_config, paper_config
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["NetworkConfig", "desk_config", "paper_config", "KERNEL_BACKEND"]
__version__ = "0.1.0"
