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

"""Tensor grids on the nozzle wedge and the solver's difference stencils.

Fields are arrays of shape (n_r, n_phi) sampled on a uniform grid over
[r_en, r_ex] x [0, phi0]; axis 0 is radial. First and second derivatives use
fourth-order central stencils in the interior and third-order one-sided
stencils at the ends. At the axis phi = 0 a field of known parity can instead
be continued by reflection, which keeps the central stencil there.
"""

import dataclasses
import enum
import re

from epnozzle import errors
import numpy as np
from scipy import integrate


class Parity(enum.Enum):
  """Symmetry of an axisymmetric field under phi -> -phi."""

  EVEN = 1
  ODD = -1


_D1_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# One-sided rows for the first and second node from the boundary.
_D1_EDGE = (
    np.array([-11.0, 18.0, -9.0, 2.0]) / 6.0,
    np.array([-2.0, -3.0, 6.0, -1.0]) / 6.0,
)
_D2_EDGE = (
    np.array([35.0, -104.0, 114.0, -56.0, 11.0]) / 12.0,
    np.array([11.0, -20.0, 6.0, 4.0, -1.0]) / 12.0,
)

_GRID_SPEC = re.compile(r'^\s*(\d+)\s*[xX]\s*(\d+)\s*$')


@dataclasses.dataclass(frozen=True, eq=False)
class Grid:
  """Uniform tensor-product grid.

  Attributes:
    r: Radial nodes, including both ends.
    phi: Polar nodes, from the axis to the wall inclusive.
  """

  r: np.ndarray
  phi: np.ndarray

  @classmethod
  def uniform(
      cls, r_en: float, r_ex: float, phi0: float, n_r: int, n_phi: int
  ) -> 'Grid':
    if n_r < 5 or n_phi < 5:
      raise errors.InsufficientGridError(
          f'grid {n_r}x{n_phi} is smaller than the 5-point stencil'
      )
    return cls(
        r=np.linspace(r_en, r_ex, n_r), phi=np.linspace(0.0, phi0, n_phi)
    )

  @property
  def shape(self) -> tuple[int, int]:
    return (self.r.size, self.phi.size)

  @property
  def hr(self) -> float:
    return float(self.r[1] - self.r[0])

  @property
  def hphi(self) -> float:
    return float(self.phi[1] - self.phi[0])

  @property
  def r_en(self) -> float:
    return float(self.r[0])

  @property
  def r_ex(self) -> float:
    return float(self.r[-1])

  @property
  def phi0(self) -> float:
    return float(self.phi[-1])

  def mesh(self) -> tuple[np.ndarray, np.ndarray]:
    return np.meshgrid(self.r, self.phi, indexing='ij')

  def node(self, index: tuple[int, int]) -> tuple[float, float]:
    return (float(self.r[index[0]]), float(self.phi[index[1]]))

  def refined(self) -> 'Grid':
    """Halves both spacings, keeping the existing nodes."""
    n_r, n_phi = self.shape
    return Grid.uniform(
        self.r_en, self.r_ex, self.phi0, 2 * n_r - 1, 2 * n_phi - 1
    )

  def check(self, *fields: np.ndarray) -> None:
    for field in fields:
      if np.shape(field) != self.shape:
        raise errors.GridMismatchError(
            f'field of shape {np.shape(field)} on grid {self.shape}'
        )


def parse_grid_spec(spec: str) -> tuple[int, int]:
  """Parses an `NRxNPHI` string such as `64x16`."""
  match = _GRID_SPEC.match(spec)
  if match is None:
    raise errors.ValidationError(f'grid must look like NRxNPHI, got {spec!r}')
  return int(match.group(1)), int(match.group(2))


def derivative(
    f: np.ndarray,
    h: float,
    axis: int = 0,
    order: int = 1,
    parity: Parity | None = None,
) -> np.ndarray:
  """Differentiates a sampled field along one axis.

  Args:
    f: Samples on a uniform grid.
    h: Grid spacing along `axis`.
    axis: Axis to differentiate along.
    order: 1 or 2.
    parity: If given, the start of `axis` is a symmetry axis and the field is
      continued by reflection with this parity instead of using one-sided
      stencils there.

  Returns:
    The derivative, with the same shape as `f`.
  """
  if order not in (1, 2):
    raise ValueError(f'unsupported derivative order {order}')
  f = np.moveaxis(np.asarray(f, dtype=np.float64), axis, 0)
  n = f.shape[0]
  if n < 5:
    raise errors.InsufficientGridError(f'{n} nodes cannot carry the stencil')
  central = _D1_CENTRAL if order == 1 else _D2_CENTRAL
  edge = _D1_EDGE if order == 1 else _D2_EDGE
  # A first derivative flips sign when the stencil is mirrored.
  mirror = -1.0 if order == 1 else 1.0

  if parity is None:
    extended, start = f, 2
  else:
    sign = float(parity.value)
    extended, start = np.concatenate([sign * f[2:0:-1], f]), 0
  m = extended.shape[0]
  out = np.empty_like(f)
  inner = sum(w * extended[k : m - 4 + k] for k, w in enumerate(central))
  out[start : start + inner.shape[0]] = inner
  for i, weights in enumerate(edge):
    if parity is None:
      out[i] = sum(w * f[k] for k, w in enumerate(weights))
    tail = sum(w * f[n - 1 - k] for k, w in enumerate(weights))
    out[n - 1 - i] = mirror * tail
  out /= h**order
  return np.moveaxis(out, 0, axis)


def divide_by_sin(
    f_phi: np.ndarray, f_phiphi: np.ndarray, phi: np.ndarray
) -> np.ndarray:
  """Returns f_phi / sin(phi), using the axis limit f_phiphi at phi = 0."""
  sin = np.sin(phi)
  safe = np.where(sin > 0.0, sin, 1.0)
  return np.where(sin > 0.0, f_phi / safe, f_phiphi)


def laplacian(
    f: np.ndarray, grid: Grid, parity: Parity = Parity.EVEN
) -> np.ndarray:
  """Axisymmetric spherical Laplacian of a field that is even on the axis."""
  r, phi = grid.mesh()
  f_r = derivative(f, grid.hr, axis=0)
  f_rr = derivative(f, grid.hr, axis=0, order=2)
  f_p = derivative(f, grid.hphi, axis=1, parity=parity)
  f_pp = derivative(f, grid.hphi, axis=1, order=2, parity=parity)
  cot_term = np.cos(phi) * divide_by_sin(f_p, f_pp, phi)
  return f_rr + 2.0 * f_r / r + (f_pp + cot_term) / r**2


def volume_integral(f: np.ndarray, grid: Grid) -> float:
  """Integrates over the nozzle with the volume element 2 pi r^2 sin(phi)."""
  r, phi = grid.mesh()
  integrand = np.asarray(f) * r**2 * np.sin(phi)
  inner = integrate.simpson(integrand, x=grid.phi, axis=1)
  return float(2.0 * np.pi * integrate.simpson(inner, x=grid.r))


def h1_norm(f: np.ndarray, grid: Grid, parity: Parity | None = None) -> float:
  """Discrete weighted H^1 norm used by the iteration monitors."""
  r, _ = grid.mesh()
  f_r = derivative(f, grid.hr, axis=0)
  f_p = derivative(f, grid.hphi, axis=1, parity=parity)
  density = f**2 + f_r**2 + (f_p / r) ** 2
  return float(np.sqrt(max(volume_integral(density, grid), 0.0)))
