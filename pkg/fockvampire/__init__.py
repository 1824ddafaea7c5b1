#  Copyright 2024 The fockvampire Contributors
#
#  This file is part of fockvampire.
#
#  fockvampire is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  fockvampire is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with fockvampire.  If not, see <https://www.gnu.org/licenses/>.
from fockvampire.fock_core import ModeSet, PureState, MixedState
from fockvampire.linear_optics import BeamSplitter, InterferometerPlan
from fockvampire.channels import DetectorModel, AttenuationChannel
from fockvampire.scenarios import ExperimentConfig, SubtractionMechanism, ShadowMechanism

__all__ = [
    "ModeSet",
    "PureState",
    "MixedState",
    "BeamSplitter",
    "InterferometerPlan",
    "DetectorModel",
    "AttenuationChannel",
    "ExperimentConfig",
    "SubtractionMechanism",
    "ShadowMechanism",
]
