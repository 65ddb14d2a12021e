"""Simulator and channel composer for a cavity-based multiport Raman quantum memory."""

from .channel import (ChannelMatrix, SignalSchedule, UnitarySpec, compose_channel,
                      simulate_sequence, verify_single_oscillator_reduction)
from .dynamics import (CavityParams, CouplingSchedule, LinearMap, SimState, TemporalMode,
                       TimeGrid, Trajectory, build_linear_map, readout_profile,
                       simulate_dynamics, write_in_coefficient)
from .gaussian import (GaussianState, QuadratureChannel, apply_channel, channel_to_quadratures,
                       duan_value, log_negativity, make_squeezed_inputs)
from .modes import exponential_mode, gaussian_mode
from .shaping import (ShapingProblem, ShapingSolution, max_readout_efficiency, readout_branches,
                      shape_readout_coupling, shape_writein_coupling)
from .spatial import DensityProfile, SpinWaveBasis, crosstalk_metric, gram_matrix

__version__ = "0.1.0"

__all__ = [
    "CavityParams", "ChannelMatrix", "CouplingSchedule", "DensityProfile", "GaussianState",
    "LinearMap", "QuadratureChannel", "ShapingProblem", "ShapingSolution", "SignalSchedule",
    "SimState", "SpinWaveBasis", "TemporalMode", "TimeGrid", "Trajectory", "UnitarySpec",
    "apply_channel", "build_linear_map", "channel_to_quadratures", "compose_channel",
    "crosstalk_metric", "duan_value", "exponential_mode", "gaussian_mode", "gram_matrix",
    "log_negativity", "make_squeezed_inputs", "max_readout_efficiency", "readout_branches",
    "readout_profile", "shape_readout_coupling", "shape_writein_coupling", "simulate_dynamics",
    "simulate_sequence", "verify_single_oscillator_reduction", "write_in_coefficient",
]
