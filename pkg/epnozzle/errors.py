# coding=utf-8
# Copyright 2026 The epnozzle Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exceptions raised by the nozzle solver.

Validation problems subclass `ValueError`; failures of the numerical model
subclass `ArithmeticError` or `RuntimeError`. Physical guard errors carry the
offending grid node as `(r, phi)` when it is known.
"""

from typing import Any


class NozzleError(Exception):
  """Base class for all solver errors."""

  def __init__(self, message: str, node: tuple[float, float] | None = None):
    if node is not None:
      message = f'{message} at (r={node[0]:.6g}, phi={node[1]:.6g})'
    super().__init__(message)
    self.node = node


class ValidationError(NozzleError, ValueError):
  """An input violates a documented invariant."""


class ParseError(NozzleError, ValueError):
  """A case file is malformed."""

  def __init__(self, message: str, line: int = 0, column: int = 0):
    super().__init__(f'{line}:{column}: {message}')
    self.line = line
    self.column = column


class AdmissibilityError(ValidationError):
  """Background data lie outside the supersonic admissibility window."""


class CompatibilityError(ValidationError):
  """Boundary profiles fail the compatibility conditions."""

  def __init__(self, failures: list[str]):
    super().__init__('incompatible boundary data: ' + '; '.join(failures))
    self.failures = failures


class GridMismatchError(ValidationError):
  """Fields passed together are not sampled on a common grid."""


class OutOfDomainError(ValidationError):
  """An evaluation point lies outside the wedge."""


class InsufficientGridError(ValidationError):
  """A grid is too small for the requested stencil."""


class AxisRegularityError(ValidationError):
  """A field that must vanish on the axis does not."""


class CavitationError(NozzleError, ArithmeticError):
  """The Bernoulli head is nonpositive, so the density would vanish."""


class BackflowError(NozzleError, ArithmeticError):
  """The radial velocity is not positive."""


class SonicSingularityError(NozzleError, ArithmeticError):
  """The radial ODE hits its sonic denominator."""


class SonicApproachError(NozzleError, ArithmeticError):
  """The flow comes closer to sonic than the configured margin."""


class HorizonBeforeExitError(NozzleError, RuntimeError):
  """The background solution stops existing before the exit radius."""

  def __init__(self, message: str, horizon: float):
    super().__init__(message)
    self.horizon = horizon


class SingularSystemError(NozzleError, RuntimeError):
  """A sparse linear system could not be factorized."""

  def __init__(self, message: str, pivot: float = 0.0):
    super().__init__(f'{message} (smallest pivot {pivot:.3e})')
    self.pivot = pivot


class ResolutionError(NozzleError, RuntimeError):
  """A discretization is not converged at the requested accuracy."""


class NonConvergenceError(NozzleError, RuntimeError):
  """A fixed-point loop failed to converge or left its norm budget."""

  def __init__(self, message: str, history: Any = None):
    super().__init__(message)
    self.history = history


class IoError(NozzleError, OSError):
  """Writing or reading an archive failed."""
