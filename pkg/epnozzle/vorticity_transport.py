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

"""Swirl stream function and transport of entropy and angular momentum."""

import dataclasses

from absl import logging
from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import profiles
from epnozzle import radial_background
import numpy as np
from scipy import integrate
from scipy import interpolate
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

Parity = grid_utils.Parity

# Flags of a traced streamline.
FOOT_INTERIOR = 0
FOOT_AXIS = 1
FOOT_WALL = 2


def composed_velocity(
    fields: core_model.FlowFields,
    sample: radial_background.BackgroundSample,
) -> core_model.VelocityTriple:
  """Full velocity grad(phi_bar + chi) + curl(psi e_theta) + V e_theta."""
  grid = fields.grid
  grad = core_model.potential_gradient(fields.chi, grid)
  return core_model.compose_velocity(
      (grad[0] + sample.u[:, None], grad[1]),
      core_model.curl_theta(fields.psi, grid),
      fields.v_swirl,
  )


def swirl_source_field(
    gas: core_model.GasLaw,
    fields: core_model.FlowFields,
    sample: radial_background.BackgroundSample,
) -> np.ndarray:
  """Source G of the psi equation at the current state."""
  grid = fields.grid
  r, phi = grid.mesh()
  dS_dphi = grid_utils.derivative(  # pylint: disable=invalid-name
      fields.S, grid.hphi, axis=1, parity=Parity.EVEN
  )
  dv_dphi = grid_utils.derivative(
      fields.v_swirl, grid.hphi, axis=1, parity=Parity.ODD
  )
  velocity = composed_velocity(fields, sample)
  z = sample.Phi_bar[:, None] + fields.Psi
  return core_model.swirl_source(
      gas, r, phi, fields.S, dS_dphi, fields.v_swirl, dv_dphi, z, velocity
  )


def solve_psi(
    source: np.ndarray,
    grid: grid_utils.Grid,
    entrance_flux: np.ndarray | None = None,
) -> np.ndarray:
  """Solves -(Lap - 1 / (r sin(phi))^2) psi = G in the nozzle.

  The equation is discretized for u = r psi, for which it reads
  u_rr + ((sin u_phi)_phi / sin - u / sin^2) / r^2 = -r G, with
  conservative half-point differences in phi. psi vanishes on the axis, the
  wall and the exit; at the entrance d_r(r psi) = entrance_flux, zero unless
  given. The matrix is an M-matrix, so G >= 0 gives psi >= 0.

  Args:
    source: G on the grid.
    grid: Sampling grid.
    entrance_flux: Optional d_r(r psi) at r_en on the polar nodes.

  Returns:
    psi on the grid.

  Raises:
    SingularSystemError: If the sparse factorization fails.
  """
  grid.check(source)
  if not np.all(np.isfinite(source)):
    raise errors.ValidationError('psi source has non-finite samples')
  n_r, n_phi = grid.shape
  hr, hphi = grid.hr, grid.hphi
  if entrance_flux is None:
    entrance_flux = np.zeros(n_phi)
  rows_r = np.arange(n_r - 1)
  cols_phi = np.arange(1, n_phi - 1)
  nu, nv = rows_r.size, cols_phi.size
  ii, jj = np.meshgrid(rows_r, cols_phi, indexing='ij')
  index = ii * nv + (jj - 1)
  r = grid.r[ii]
  sin = np.sin(grid.phi[jj])
  sin_up = np.sin(grid.phi[jj] + 0.5 * hphi)
  sin_dn = np.sin(grid.phi[jj] - 0.5 * hphi)
  polar = 1.0 / (r**2 * sin * hphi**2)

  rows, cols, vals = [], [], []

  def add(mask, col, val):
    val = np.broadcast_to(val, mask.shape)
    rows.append(index[mask])
    cols.append(col[mask])
    vals.append(val[mask])

  everywhere = np.ones(index.shape, dtype=bool)
  add(
      everywhere,
      index,
      2.0 / hr**2 + polar * (sin_up + sin_dn) + 1.0 / (r * sin) ** 2,
  )
  add(ii > 0, index - nv, -1.0 / hr**2)
  # Entrance ghost node: u_{-1} = u_1 - 2 hr flux.
  add(ii < nu - 1, index + nv, np.where(ii == 0, -2.0, -1.0) / hr**2)
  add(jj > 1, index - 1, -polar * sin_dn)
  add(jj < n_phi - 2, index + 1, -polar * sin_up)

  rhs = r * source[ii, jj]
  rhs[0] -= 2.0 * entrance_flux[cols_phi] / hr
  matrix = sparse.coo_matrix(
      (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
      shape=(nu * nv, nu * nv),
  ).tocsc()
  try:
    solution = sparse_linalg.spsolve(matrix, rhs.ravel())
  except RuntimeError as e:
    raise errors.SingularSystemError(str(e)) from e
  if not np.all(np.isfinite(solution)):
    raise errors.SingularSystemError('psi solve returned non-finite values')
  psi = np.zeros(grid.shape)
  psi[ii, jj] = solution.reshape(nu, nv) / r
  return psi


@dataclasses.dataclass(frozen=True, eq=False)
class StreamlineFoot:
  """Entrance angle reached by the streamline through each node.

  Attributes:
    phi_foot: Entrance angle, clamped to [0, phi0].
    status: FOOT_INTERIOR, or FOOT_AXIS / FOOT_WALL if the trace was clamped.
  """

  phi_foot: np.ndarray
  status: np.ndarray


def _streamline_rhs(radial, polar, r_start, span, grid):
  """dphi/dtau along r = r_start - tau span, with phi clamped to the wedge."""

  def rhs(tau, phi):
    r = np.clip(r_start - tau * span, grid.r_en, grid.r_ex)
    at = np.stack([r, np.clip(phi, 0.0, grid.phi0)], axis=-1)
    ur = radial(at)
    if np.any(ur <= 0.0):
      k = int(np.argmax(ur <= 0.0))
      raise errors.BackflowError(
          'nonpositive radial velocity on a streamline',
          node=(float(at[k, 0]), float(at[k, 1])),
      )
    return -span * polar(at) / (r * ur)

  return rhs


def _boundary_event(level, direction):
  def event(tau, phi):
    del tau
    return phi[0] - level

  event.terminal = True
  event.direction = direction
  return event


def trace_streamline(
    velocity: core_model.VelocityTriple,
    grid: grid_utils.Grid,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> StreamlineFoot:
  """Traces the streamline through every node back to the entrance.

  All nodes are integrated together in a pseudo-time tau in [0, 1], with
  r = r_i - tau (r_i - r_en) and dphi/dr = u_phi / (r u_r). The velocity is
  interpolated bilinearly. Axis and wall nodes are streamlines and keep
  their angle. Streamlines that leave the wedge at any step of the batch
  are traced again one by one with terminal events at phi = 0 and
  phi = phi0; their foot is the boundary they hit first.

  Args:
    velocity: Velocity on the grid.
    grid: Sampling grid.
    rtol: Relative tolerance of the integrator.
    atol: Absolute tolerance of the integrator.

  Returns:
    The streamline feet.

  Raises:
    BackflowError: If u_r <= 0 on the grid or along a path.
  """
  u_r = np.asarray(velocity.u_r)
  u_phi = np.asarray(velocity.u_phi)
  grid.check(u_r, u_phi)
  if np.any(u_r <= 0.0):
    index = tuple(np.argwhere(u_r <= 0.0)[0])
    raise errors.BackflowError(
        'nonpositive radial velocity', node=grid.node(index)
    )
  phi0 = grid.phi0
  points = (grid.r, grid.phi)
  radial = interpolate.RegularGridInterpolator(points, u_r)
  polar = interpolate.RegularGridInterpolator(points, u_phi)
  r_mesh, phi_mesh = grid.mesh()
  span = (r_mesh - grid.r_en).ravel()
  r_start = r_mesh.ravel()

  solution = integrate.solve_ivp(
      _streamline_rhs(radial, polar, r_start, span, grid),
      (0.0, 1.0),
      phi_mesh.ravel(),
      method='RK45',
      rtol=rtol,
      atol=atol,
  )
  if not solution.success:
    raise errors.NonConvergenceError(
        f'streamline tracing failed: {solution.message}'
    )
  foot = solution.y[:, -1].copy()
  status = np.full(foot.shape, FOOT_INTERIOR, dtype=np.int8)
  on_boundary = np.zeros(grid.shape, dtype=bool)
  on_boundary[:, 0] = on_boundary[:, -1] = True
  left = (
      (np.min(solution.y, axis=1) < 0.0) | (np.max(solution.y, axis=1) > phi0)
  ) & ~on_boundary.ravel()
  events = [_boundary_event(0.0, -1.0), _boundary_event(phi0, 1.0)]
  for i in np.flatnonzero(left):
    single = integrate.solve_ivp(
        _streamline_rhs(
            radial, polar, r_start[i : i + 1], span[i : i + 1], grid
        ),
        (0.0, 1.0),
        [phi_mesh.flat[i]],
        method='RK45',
        rtol=rtol,
        atol=atol,
        events=events,
    )
    if single.status == 1:
      hit_axis = single.t_events[0].size > 0
      status[i] = FOOT_AXIS if hit_axis else FOOT_WALL
      foot[i] = 0.0 if hit_axis else phi0
    else:
      foot[i] = single.y[0, -1]
  foot = np.clip(foot, 0.0, phi0).reshape(grid.shape)
  status = status.reshape(grid.shape)
  foot[:, 0] = 0.0
  foot[:, -1] = phi0
  clamped = int(np.count_nonzero(status))
  if clamped:
    logging.info('%d streamlines end on the axis or wall.', clamped)
  return StreamlineFoot(phi_foot=foot, status=status)


def transport_scalars(
    feet: StreamlineFoot,
    S_en: profiles.Profile,  # pylint: disable=invalid-name
    w_en: profiles.Profile,
    grid: grid_utils.Grid,
    compat_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
  """Carries entrance entropy and angular momentum along streamlines.

  Args:
    feet: Streamline feet on the grid.
    S_en: Entrance entropy profile.
    w_en: Entrance swirl velocity profile; must vanish on the axis.
    grid: Sampling grid.
    compat_tol: Tolerance for w_en(0) = 0.

  Returns:
    (S, V) with V = Lambda / (r sin(phi)) and V = 0 on the axis.

  Raises:
    CompatibilityError: If w_en(0) != 0.
  """
  w_axis = float(w_en(0.0))
  if abs(w_axis) > compat_tol:
    raise errors.CompatibilityError([f'w_en(0) = 0 (got {w_axis:.3e})'])
  foot = feet.phi_foot
  grid.check(foot)
  r, phi = grid.mesh()
  S = np.asarray(S_en(foot), dtype=np.float64)  # pylint: disable=invalid-name
  momentum = grid.r_en * np.sin(foot) * w_en(foot)
  sin = np.sin(phi)
  v_swirl = np.where(
      sin > 0.0, momentum / (r * np.where(sin > 0.0, sin, 1.0)), 0.0
  )
  return S, v_swirl
