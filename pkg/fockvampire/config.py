"""
Flat ``key = value`` experiment configuration files.

Lines starting with ``#`` are comments. Absent keys take the :class:`ExperimentConfig` defaults.
Complex values are Python complex literals, ``phases`` is a comma separated list of radians and
booleans are ``true`` / ``false``.
"""

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
from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Any

from fockvampire.channels import DetectorModel
from fockvampire.errors import ArgumentError, ConfigError
from fockvampire.scenarios import ExperimentConfig

logger = logging.getLogger(__name__)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered not in ("true", "false"):
        raise ValueError(f"expected true or false, got '{text}'")
    return lowered == "true"


def _parse_phases(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


_PARSERS: dict[str, Callable[[str], Any]] = {
    "squeezing": float,
    "herald_efficiency": float,
    "herald_dark_prob": float,
    "tap_reflectivity": float,
    "subtraction_efficiency": float,
    "subtraction_dark_prob": float,
    "subtraction_number_resolving": _parse_bool,
    "split_mu": complex,
    "split_lambda": complex,
    "detection_efficiency": float,
    "samples_per_phase": int,
    "phases": _parse_phases,
    "cutoff": int,
    "seed": int,
}
CONFIG_KEYS = tuple(_PARSERS)

_DETECTOR_KEYS = {
    "herald": ("herald_efficiency", "herald_dark_prob", None),
    "subtraction": (
        "subtraction_efficiency",
        "subtraction_dark_prob",
        "subtraction_number_resolving",
    ),
}


def _read_pairs(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError("expected 'key = value'", line=number)
        if key not in _PARSERS:
            raise ConfigError("unknown key", field=key, line=number)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", field=key, line=number)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as err:
            raise ConfigError(f"cannot parse '{value}': {err}", field=key, line=number) from err
        lines[key] = number
    return values, lines


def _detector(prefix: str, values: dict[str, Any], lines: dict[str, int], default: DetectorModel) -> DetectorModel:
    eff_key, dark_key, resolving_key = _DETECTOR_KEYS[prefix]
    kwargs = {
        "efficiency": values.get(eff_key, default.efficiency),
        "dark_prob": values.get(dark_key, default.dark_prob),
        "number_resolving": values.get(resolving_key, default.number_resolving)
        if resolving_key
        else default.number_resolving,
    }
    try:
        return DetectorModel(**kwargs)
    except ArgumentError as err:
        key = eff_key if err.field == "efficiency" else dark_key
        raise ConfigError(err.message, field=key, line=lines.get(key)) from err


def parse_config(text: str) -> ExperimentConfig:
    """
    Read a configuration document.

    :raises ConfigError: For malformed lines, unknown or duplicate keys and out-of-range values.
    """
    values, lines = _read_pairs(text)
    defaults = ExperimentConfig()
    kwargs = {
        key: value
        for key, value in values.items()
        if key in ExperimentConfig.__dataclass_fields__
    }
    kwargs["herald_detector"] = _detector("herald", values, lines, defaults.herald_detector)
    kwargs["subtraction_detector"] = _detector(
        "subtraction", values, lines, defaults.subtraction_detector
    )
    try:
        config = ExperimentConfig(**kwargs)
    except ArgumentError as err:
        raise ConfigError(err.message, field=err.field, line=lines.get(err.field or "")) from err
    logger.debug(f"Parsed configuration with {len(values)} explicit keys.")
    return config


def serialize_config(config: ExperimentConfig) -> str:
    """Write every key, so that :func:`parse_config` reads back an equal configuration."""
    herald, sub = config.herald_detector, config.subtraction_detector
    entries = {
        "squeezing": repr(config.squeezing),
        "herald_efficiency": repr(herald.efficiency),
        "herald_dark_prob": repr(herald.dark_prob),
        "tap_reflectivity": repr(config.tap_reflectivity),
        "subtraction_efficiency": repr(sub.efficiency),
        "subtraction_dark_prob": repr(sub.dark_prob),
        "subtraction_number_resolving": "true" if sub.number_resolving else "false",
        "split_mu": repr(complex(config.split_mu)),
        "split_lambda": repr(complex(config.split_lambda)),
        "detection_efficiency": repr(config.detection_efficiency),
        "samples_per_phase": str(config.samples_per_phase),
        "phases": ", ".join(repr(float(p)) for p in config.phases),
        "cutoff": str(config.cutoff),
        "seed": str(config.seed),
    }
    return "".join(f"{key} = {value}\n" for key, value in entries.items())
