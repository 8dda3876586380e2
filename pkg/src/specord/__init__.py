"""Spectrally precoded MIMO OFDM: correlated channels, LSN/PLM precoders,
block-reflector application and ergodic capacity."""

__version__ = "0.1.0"

from .capacity import (CapacityResult, EffectiveChannel, assemble_effective_channel,
                       ergodic_capacity, instantaneous_capacity)
from .channel import (ChannelRealization, CorrelationMatrix, CorrelationSpec,
                      correlation_matrices, frequency_response, generate_channel,
                      spatial_correlation, tapped_channel)
from .grid import NotchSpec, SubcarrierGrid, spectral_response
from .ofdm import OfdmSymbol, PsdTrace, ofdm_modulate, psd_estimate
from .precoder import (LeakageMatrix, Precoder, apply_precoder, block_reflector_factorize,
                       constraint_matrix, leakage_matrix, lsn_precoder, plm_precoder)
from .scenario import Scenario, load_scenarios, preset_scenarios
