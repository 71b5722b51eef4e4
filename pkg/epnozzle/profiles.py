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

"""Boundary profile families on the polar interval [0, phi0].

Profiles are shapes of boundary perturbations; a case scales them by its
amplitude eps and adds the background value. The closed-form families satisfy
the wall conditions identically:

  CosineSeries        sum_n a_n cos(n pi phi / phi0)         flat at the wall
  SineSquaredSeries   sum_n a_n sin^2(n pi phi / phi0)        zero and flat at
                                                              axis and wall
  TaperedSineSeries   sum_k a_k sin^2((2k-1) pi phi / (2 phi0))  zero on the
                                                              axis, flat at
                                                              the wall

Tabulated profiles use monotone cubic (PCHIP) interpolation, so transported
values never overshoot the table.
"""

import abc
import dataclasses
from typing import Callable, Sequence

from epnozzle import errors
import numpy as np
from scipy import interpolate


class Profile(abc.ABC):
  """A smooth function of the polar angle."""

  @abc.abstractmethod
  def __call__(self, phi) -> np.ndarray:
    """Profile values."""

  @abc.abstractmethod
  def derivative(self, phi) -> np.ndarray:
    """Profile phi-derivative."""

  @property
  def is_zero(self) -> bool:
    return False

  def scaled(self, factor: float) -> 'Profile':
    return Affine(self, scale=factor, offset=0.0)

  def shifted(self, offset: float) -> 'Profile':
    return Affine(self, scale=1.0, offset=offset)


@dataclasses.dataclass(frozen=True)
class Zero(Profile):

  def __call__(self, phi) -> np.ndarray:
    return np.zeros_like(np.asarray(phi, dtype=np.float64))

  def derivative(self, phi) -> np.ndarray:
    return np.zeros_like(np.asarray(phi, dtype=np.float64))

  @property
  def is_zero(self) -> bool:
    return True


@dataclasses.dataclass(frozen=True)
class Affine(Profile):
  """offset + scale * base."""

  base: Profile
  scale: float = 1.0
  offset: float = 0.0

  def __call__(self, phi) -> np.ndarray:
    return self.offset + self.scale * self.base(phi)

  def derivative(self, phi) -> np.ndarray:
    return self.scale * self.base.derivative(phi)

  @property
  def is_zero(self) -> bool:
    return self.offset == 0.0 and (self.scale == 0.0 or self.base.is_zero)


def _as_tuple(coefficients: Sequence[float]) -> tuple[float, ...]:
  values = tuple(float(a) for a in coefficients)
  if not values:
    raise errors.ValidationError('a profile series needs coefficients')
  return values


@dataclasses.dataclass(frozen=True)
class CosineSeries(Profile):
  """sum_n a_n cos(n pi phi / phi0), n = 0, 1, ..."""

  coefficients: tuple[float, ...]
  phi0: float

  def __post_init__(self):
    object.__setattr__(self, 'coefficients', _as_tuple(self.coefficients))

  def _k(self) -> np.ndarray:
    return np.arange(len(self.coefficients)) * np.pi / self.phi0

  def __call__(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    k = self._k()
    return np.cos(np.multiply.outer(phi, k)) @ np.asarray(self.coefficients)

  def derivative(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    k = self._k()
    return -np.sin(np.multiply.outer(phi, k)) @ (
        k * np.asarray(self.coefficients)
    )


@dataclasses.dataclass(frozen=True)
class SineSquaredSeries(Profile):
  """sum_n a_n sin^2(n pi phi / phi0), n = 1, 2, ..."""

  coefficients: tuple[float, ...]
  phi0: float

  def __post_init__(self):
    object.__setattr__(self, 'coefficients', _as_tuple(self.coefficients))

  def _k(self) -> np.ndarray:
    return np.arange(1, len(self.coefficients) + 1) * np.pi / self.phi0

  def __call__(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    return np.sin(np.multiply.outer(phi, self._k())) ** 2 @ np.asarray(
        self.coefficients
    )

  def derivative(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    k = self._k()
    # d/dphi sin^2(k phi) = k sin(2 k phi).
    return np.sin(2.0 * np.multiply.outer(phi, k)) @ (
        k * np.asarray(self.coefficients)
    )


@dataclasses.dataclass(frozen=True)
class TaperedSineSeries(Profile):
  """sum_k a_k sin^2((2k - 1) pi phi / (2 phi0)), k = 1, 2, ..."""

  coefficients: tuple[float, ...]
  phi0: float

  def __post_init__(self):
    object.__setattr__(self, 'coefficients', _as_tuple(self.coefficients))

  def _k(self) -> np.ndarray:
    odd = 2 * np.arange(1, len(self.coefficients) + 1) - 1
    return odd * np.pi / (2.0 * self.phi0)

  def __call__(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    return np.sin(np.multiply.outer(phi, self._k())) ** 2 @ np.asarray(
        self.coefficients
    )

  def derivative(self, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    k = self._k()
    return np.sin(2.0 * np.multiply.outer(phi, k)) @ (
        k * np.asarray(self.coefficients)
    )


@dataclasses.dataclass(frozen=True, eq=False)
class Tabulated(Profile):
  """Monotone cubic interpolation of (phi, value) samples."""

  phi: tuple[float, ...]
  values: tuple[float, ...]

  def __post_init__(self):
    phi = np.asarray(self.phi, dtype=np.float64)
    values = np.asarray(self.values, dtype=np.float64)
    if phi.ndim != 1 or phi.shape != values.shape or phi.size < 2:
      raise errors.ValidationError('a table needs matching phi and values')
    if np.any(np.diff(phi) <= 0.0):
      raise errors.ValidationError('table angles must increase')
    object.__setattr__(
        self, '_interpolant', interpolate.PchipInterpolator(phi, values)
    )

  def __call__(self, phi) -> np.ndarray:
    return self._interpolant(np.asarray(phi, dtype=np.float64))

  def derivative(self, phi) -> np.ndarray:
    return self._interpolant.derivative()(np.asarray(phi, dtype=np.float64))


@dataclasses.dataclass(frozen=True, eq=False)
class Function(Profile):
  """A profile given by a callable and its derivative."""

  fn: Callable[[np.ndarray], np.ndarray]
  dfn: Callable[[np.ndarray], np.ndarray]

  def __call__(self, phi) -> np.ndarray:
    return np.asarray(self.fn(np.asarray(phi, dtype=np.float64)), dtype=float)

  def derivative(self, phi) -> np.ndarray:
    return np.asarray(self.dfn(np.asarray(phi, dtype=np.float64)), dtype=float)


@dataclasses.dataclass(frozen=True)
class DopingField:
  """Ion density perturbation profile(phi) times a radial factor.

  Attributes:
    profile: Polar shape.
    radial: 'uniform' for a factor 1, 'bump' for sin^2(pi (r - r_en) / L).
  """

  profile: Profile
  radial: str = 'uniform'

  def __post_init__(self):
    if self.radial not in ('uniform', 'bump'):
      raise errors.ValidationError(
          f"radial must be 'uniform' or 'bump', got {self.radial!r}"
      )

  def radial_factor(self, r, r_en: float, r_ex: float) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if self.radial == 'uniform':
      return np.ones_like(r)
    return np.sin(np.pi * (r - r_en) / (r_ex - r_en)) ** 2

  def __call__(self, r, phi, r_en: float, r_ex: float) -> np.ndarray:
    return self.radial_factor(r, r_en, r_ex) * self.profile(phi)

  def phi_derivative(self, r, phi, r_en: float, r_ex: float) -> np.ndarray:
    return self.radial_factor(r, r_en, r_ex) * self.profile.derivative(phi)
