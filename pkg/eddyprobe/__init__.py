###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""eddyprobe - Eddy-current inclusion detection and imaging simulator"""

__version__ = "2026.10.0"
"""The version in use of the eddyprobe package."""

from .geometry import green_hessian, dipole_field, CoincidentPointsError
from .forward import (PolarizationData, SensorArray, ResponseMatrix,
                      derive_params, response_matrix, unit_response)
from .acquisition import hadamard, acquire_standard, acquire_hadamard
from .tracywidom import TracyWidomTable, build_table, shared_table
from .detection import ratio_statistic, threshold, detect
from .detection import pod_theoretical, pod_empirical
from .imaging import SearchGrid, signal_projector, music_scan, locate
from .characterization import fit_strength, multi_frequency_fit, MTable
from .config import load_config
from .models import InclusionModel, NoiseModel, ScenarioConfig
