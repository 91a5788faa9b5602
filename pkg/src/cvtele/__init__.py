"""Simulation toolkit for teleporting non-Gaussian wave packets of light."""

from .fock_core import DensityMatrix, PureState, fidelity, fidelity_pure, ladder_operators
from .states import (
    coherent,
    loss_channel,
    mixture_model1,
    model3_state,
    odd_cat,
    photon_subtracted_sv,
    squeezed_vacuum,
)
from .teleport import TeleporterParams, gaussian_fidelity, squeezing_db_to_r, teleport_fock
from .wigner import PhaseSpaceGrid, WignerGrid, wigner_from_rho

__version__ = "0.1.0"
