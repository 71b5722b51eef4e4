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

"""A-posteriori checks of a solution against the full Euler-Poisson system.

Derivatives here come from their own fourth-order stencil table, built from
Vandermonde systems, and are never shared with the solver's stencils.
"""

import dataclasses
import functools
import math
from typing import Any

from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
import numpy as np
from scipy import integrate

Parity = grid_utils.Parity


@functools.lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], order: int) -> np.ndarray:
  """Weights w with sum_j w_j f(x + o_j h) ~ h^order f^(order)(x)."""
  offsets = np.asarray(offsets, dtype=np.float64)
  vander = np.vander(offsets, offsets.size, increasing=True).T
  rhs = np.zeros(offsets.size)
  rhs[order] = math.factorial(order)
  return np.linalg.solve(vander, rhs)


def derivative4(
    f: np.ndarray,
    h: float,
    axis: int = 0,
    order: int = 1,
    parity: Parity | None = None,
) -> np.ndarray:
  """Fourth-order derivative: 5-point centered, 5 or 6 points one-sided."""
  f = np.moveaxis(np.asarray(f, dtype=np.float64), axis, 0)
  n = f.shape[0]
  width = 5 if order == 1 else 6
  if n < width + 1:
    raise errors.InsufficientGridError(
        f'{n} nodes cannot carry a {width}-point stencil'
    )
  if parity is None:
    extended, shift = f, 0
  else:
    extended, shift = np.concatenate([parity.value * f[2:0:-1], f]), 2
  m = extended.shape[0]
  out = np.empty_like(f)
  for j in range(n):
    k = j + shift
    if 2 <= k <= m - 3:
      start, size = k - 2, 5
    else:
      start, size = (0 if k < 2 else m - width), width
    window = np.arange(start, start + size)
    weights = fd_weights(tuple(int(o) for o in window - k), order)
    out[j] = np.tensordot(weights, extended[window], axes=1)
  return np.moveaxis(out / h**order, 0, axis)


def _weighted_norm(f: np.ndarray, grid: grid_utils.Grid) -> float:
  return float(np.sqrt(max(grid_utils.volume_integral(f**2, grid), 0.0)))


def _safe_divide_sin(f: np.ndarray, phi: np.ndarray) -> np.ndarray:
  sin = np.sin(phi)
  return np.where(sin > 0.0, f / np.where(sin > 0.0, sin, 1.0), 0.0)


@dataclasses.dataclass(frozen=True)
class ResidualReport:
  """Weighted L^2 residuals and conservation diagnostics of a solution.

  Attributes:
    continuity: Residual of the mass balance.
    momentum_phi: Residual of the polar momentum balance.
    entropy: Residual of entropy transport.
    angular_momentum: Residual of angular momentum transport.
    poisson: Residual of the Poisson equation.
    mass_flux_spread: Relative spread of the cross-sectional mass flux.
    bernoulli_defect: max |B - Phi|.
    min_mach_margin: min (M - 1).
    margin_node: (r, phi) where the margin is attained.
    grid: (n_r, n_phi).
  """

  continuity: float
  momentum_phi: float
  entropy: float
  angular_momentum: float
  poisson: float
  mass_flux_spread: float
  bernoulli_defect: float
  min_mach_margin: float
  margin_node: tuple[float, float]
  grid: tuple[int, int]

  @property
  def total(self) -> float:
    return float(
        np.sqrt(
            self.continuity**2
            + self.momentum_phi**2
            + self.entropy**2
            + self.angular_momentum**2
            + self.poisson**2
        )
    )

  def to_dict(self) -> dict[str, Any]:
    out = dataclasses.asdict(self)
    out['margin_node'] = list(self.margin_node)
    out['grid'] = list(self.grid)
    out['total'] = self.total
    return out


def _primitives(fields: core_model.FlowFields) -> core_model.PrimitiveFields:
  if fields.primitives is None:
    raise errors.ValidationError('fields carry no primitive variables')
  return fields.primitives


def transport_residual(
    fields: core_model.FlowFields, q: np.ndarray
) -> np.ndarray:
  """(r^2 sin rho u_r) d_r q + (r sin rho u_phi) d_phi q for an even q."""
  grid = fields.grid
  prim = _primitives(fields)
  r, phi = grid.mesh()
  sin = np.sin(phi)
  flux_r = r**2 * sin * prim.rho * prim.velocity.u_r
  flux_phi = r * sin * prim.rho * prim.velocity.u_phi
  return flux_r * derivative4(q, grid.hr, axis=0) + flux_phi * derivative4(
      q, grid.hphi, axis=1, parity=Parity.EVEN
  )


def equation_residuals(
    fields: core_model.FlowFields, doping: np.ndarray
) -> dict[str, np.ndarray]:
  """Pointwise residuals of the five equations."""
  grid = fields.grid
  grid.check(doping)
  prim = _primitives(fields)
  r, phi = grid.mesh()
  hr, hphi = grid.hr, grid.hphi
  sin = np.sin(phi)
  rho, u = prim.rho, prim.velocity
  lam = r * sin * u.u_theta

  flux_r = r**2 * sin * rho * u.u_r
  flux_phi = r * sin * rho * u.u_phi
  continuity = derivative4(flux_r, hr, axis=0) + derivative4(
      flux_phi, hphi, axis=1, parity=Parity.EVEN
  )

  du_phi_r = derivative4(u.u_phi, hr, axis=0)
  du_phi_p = derivative4(u.u_phi, hphi, axis=1, parity=Parity.ODD)
  dp_p = derivative4(prim.pressure, hphi, axis=1, parity=Parity.EVEN)
  dPhi_p = derivative4(prim.Phi, hphi, axis=1, parity=Parity.EVEN)  # pylint: disable=invalid-name
  swirl = u.u_theta**2 * np.cos(phi)
  momentum_phi = (
      rho * u.u_r * du_phi_r
      + rho * u.u_phi * du_phi_p / r
      + dp_p / r
      + rho * u.u_r * u.u_phi / r
      - rho / r * _safe_divide_sin(swirl, phi)
      - rho * dPhi_p / r
  )

  Phi = prim.Phi  # pylint: disable=invalid-name
  Phi_r = derivative4(Phi, hr, axis=0)  # pylint: disable=invalid-name
  Phi_rr = derivative4(Phi, hr, axis=0, order=2)  # pylint: disable=invalid-name
  Phi_pp = derivative4(Phi, hphi, axis=1, order=2, parity=Parity.EVEN)  # pylint: disable=invalid-name
  cot_term = np.where(
      sin > 0.0, np.cos(phi) * _safe_divide_sin(dPhi_p, phi), Phi_pp
  )
  poisson = Phi_rr + 2.0 * Phi_r / r + (Phi_pp + cot_term) / r**2
  poisson = poisson - rho + doping
  return {
      'continuity': continuity,
      'momentum_phi': momentum_phi,
      'entropy': transport_residual(fields, prim.S),
      'angular_momentum': transport_residual(fields, lam),
      'poisson': poisson,
  }


def mass_flux(fields: core_model.FlowFields) -> np.ndarray:
  """m(r) = int_0^phi0 rho u_r r^2 sin(phi) dphi at every radial station."""
  prim = _primitives(fields)
  r, phi = fields.grid.mesh()
  integrand = prim.rho * prim.velocity.u_r * r**2 * np.sin(phi)
  return integrate.simpson(integrand, x=fields.grid.phi, axis=1)


def bernoulli_defect(fields: core_model.FlowFields) -> float:
  """max |B - Phi| with B = |u|^2 / 2 + gamma / (gamma - 1) S rho^(gamma-1)."""
  prim = _primitives(fields)
  g = prim.gas.gamma
  bernoulli = 0.5 * prim.velocity.speed_sq + g / (g - 1.0) * prim.S * (
      prim.rho ** (g - 1.0)
  )
  return float(np.max(np.abs(bernoulli - prim.Phi)))


def conservation_report(fields: core_model.FlowFields) -> dict[str, Any]:
  """Mass flux per station, Bernoulli defect and transport residuals."""
  grid = fields.grid
  prim = _primitives(fields)
  flux = mass_flux(fields)
  mean = float(np.mean(flux))
  spread = float((np.max(flux) - np.min(flux)) / abs(mean)) if mean else 0.0
  r, phi = grid.mesh()
  lam = r * np.sin(phi) * prim.velocity.u_theta
  return {
      'mass_flux': [float(m) for m in flux],
      'mass_flux_spread': spread,
      'bernoulli_defect': bernoulli_defect(fields),
      'entropy_transport': _weighted_norm(
          transport_residual(fields, prim.S), grid
      ),
      'angular_momentum_transport': _weighted_norm(
          transport_residual(fields, lam), grid
      ),
      'entropy_range': [float(np.min(prim.S)), float(np.max(prim.S))],
  }


def supersonic_margin(
    fields: core_model.FlowFields,
) -> tuple[float, tuple[float, float]]:
  """min (M - 1) over the grid and the node where it is attained."""
  prim = _primitives(fields)
  margin = prim.mach - 1.0
  index = np.unravel_index(np.argmin(margin), margin.shape)
  return float(margin[index]), fields.grid.node(index)


def residual_euler_poisson(
    fields: core_model.FlowFields, doping: np.ndarray
) -> ResidualReport:
  """Evaluates the full system on a solution.

  Args:
    fields: Solution with primitive variables attached.
    doping: Ion density b on the grid.

  Returns:
    The residual report. Large residuals are reported, never raised.
  """
  grid = fields.grid
  residuals = equation_residuals(fields, doping)
  norms = {
      name: _weighted_norm(value, grid) for name, value in residuals.items()
  }
  conservation = conservation_report(fields)
  margin, node = supersonic_margin(fields)
  return ResidualReport(
      mass_flux_spread=conservation['mass_flux_spread'],
      bernoulli_defect=conservation['bernoulli_defect'],
      min_mach_margin=margin,
      margin_node=node,
      grid=grid.shape,
      **norms,
  )


def hk_star_norm(
    field: np.ndarray,
    grid: grid_utils.Grid,
    k: int,
    parity: Parity | None = Parity.EVEN,
) -> float:
  """||u||_{H^(k-1)} + ||d_r u||_{H^(k-1)} with weighted discrete integrals.

  Args:
    field: Samples on the grid.
    grid: Sampling grid.
    k: Order, 1 to 4.
    parity: Parity of the field across the axis; None for one-sided stencils.

  Returns:
    The discrete norm.

  Raises:
    InsufficientGridError: If the grid is too small for the derivatives.
  """
  if k not in (1, 2, 3, 4):
    raise errors.ValidationError(f'k must be in 1..4, got {k}')
  grid.check(field)
  if min(grid.shape) < k + 5:
    raise errors.InsufficientGridError(
        f'grid {grid.shape} is too small for H^{k}_* derivatives'
    )

  def flip(p):
    return None if p is None else Parity(-p.value)

  def sobolev(f, p, order):
    total = 0.0
    # Level j holds d_r^(j - b) d_phi^b f for b = 0..j.
    rows = [(f, p)]
    for level in range(order + 1):
      total += sum(_weighted_norm(g, grid) ** 2 for g, _ in rows)
      if level == order:
        break
      rows = [(derivative4(g, grid.hr, axis=0), q) for g, q in rows] + [
          (derivative4(rows[-1][0], grid.hphi, axis=1, parity=rows[-1][1]),
           flip(rows[-1][1]))
      ]
    return float(np.sqrt(total))

  f = np.asarray(field, dtype=np.float64)
  f_r = derivative4(f, grid.hr, axis=0)
  return sobolev(f, parity, k - 1) + sobolev(f_r, parity, k - 1)
