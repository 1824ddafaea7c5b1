"""Exceptions and warnings raised by the simulator."""

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


class VampireError(RuntimeError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.message = message
        self.field = field

    def __str__(self):
        if self.field is None:
            return self.message
        return f"{self.field}: {self.message}"


class ArgumentError(VampireError, ValueError):
    """An argument is outside of its documented range."""


class CutoffViolationError(VampireError):
    """A requested occupation exceeds the Fock cutoff."""


class TruncationRiskError(VampireError):
    """The requested state cannot be represented faithfully at the given cutoff."""


class ZeroNormError(VampireError):
    """A state with zero norm (or trace) was asked to be normalized."""


class UndefinedExpectationError(VampireError):
    """An expectation value was requested of a zero-norm state."""


class ImpossibleEventError(VampireError):
    """A conditioning event has (numerically) zero probability."""


class IllPosedDataError(VampireError):
    """Observed data has support where no physical state predicts any probability."""


class ConfigError(VampireError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message, field)
        self.line = line

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else ""
        return where + super().__str__()


class TruncationWarning(UserWarning):
    """Amplitude was pushed beyond the cutoff and dropped."""
