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

"""Physical state types and pointwise closures of the Euler-Poisson model.

The flow is described by the velocity potential perturbation chi, the
electric potential perturbation Psi, the swirl stream component psi, the
entropy S and the swirl velocity V = Lambda / (r sin phi). Density is never
stored: the pseudo-Bernoulli invariant B - Phi is normalized to zero, so

  rho = [(gamma - 1) / (gamma S) (Phi - |u|^2 / 2)]^(1 / (gamma - 1)).
"""

import dataclasses

from epnozzle import errors
from epnozzle import grid_utils
import numpy as np

Parity = grid_utils.Parity


@dataclasses.dataclass(frozen=True)
class GasLaw:
  """Polytropic gas with pressure p = S rho^gamma."""

  gamma: float

  def __post_init__(self):
    if not self.gamma > 1.0:
      raise errors.ValidationError('gamma must exceed 1')


@dataclasses.dataclass(frozen=True)
class NozzleGeometry:
  """Conical wedge r_en < r < r_ex, 0 <= phi < phi0."""

  r_en: float
  r_ex: float
  phi0: float

  def __post_init__(self):
    if not 1.0 < self.r_en < self.r_ex:
      raise errors.ValidationError(
          f'geometry needs 1 < r_en < r_ex, got {self.r_en}, {self.r_ex}'
      )
    if not 0.0 < self.phi0 < np.pi:
      raise errors.ValidationError(
          f'phi0 must lie in (0, pi), got {self.phi0}'
      )

  @property
  def length(self) -> float:
    return self.r_ex - self.r_en


@dataclasses.dataclass(frozen=True, eq=False)
class VelocityTriple:
  """Velocity components in the orthonormal frame (e_r, e_phi, e_theta)."""

  u_r: np.ndarray
  u_phi: np.ndarray
  u_theta: np.ndarray

  @property
  def speed_sq(self) -> np.ndarray:
    return self.u_r**2 + self.u_phi**2 + self.u_theta**2


@dataclasses.dataclass(frozen=True, eq=False)
class PrimitiveFields:
  """Physical variables derived from a FlowFields state."""

  gas: GasLaw
  rho: np.ndarray
  velocity: VelocityTriple
  S: np.ndarray  # pylint: disable=invalid-name
  Phi: np.ndarray  # pylint: disable=invalid-name
  c_sq: np.ndarray

  @property
  def mach(self) -> np.ndarray:
    return np.sqrt(self.velocity.speed_sq / self.c_sq)

  @property
  def pressure(self) -> np.ndarray:
    return self.S * self.rho**self.gas.gamma


@dataclasses.dataclass(frozen=True, eq=False)
class FlowFields:
  """Iterated unknowns on a tensor grid.

  Attributes:
    grid: Sampling grid.
    chi: Velocity potential minus the background potential.
    Psi: Electric potential minus the background potential.
    psi: e_theta component of the vector potential; zero on axis and wall.
    S: Entropy.
    v_swirl: Swirl velocity u_theta = Lambda / (r sin phi); zero on the axis.
    primitives: Derived physical variables, attached once a solve ends.
  """

  grid: grid_utils.Grid
  chi: np.ndarray
  Psi: np.ndarray  # pylint: disable=invalid-name
  psi: np.ndarray
  S: np.ndarray  # pylint: disable=invalid-name
  v_swirl: np.ndarray
  primitives: PrimitiveFields | None = None

  def __post_init__(self):
    self.grid.check(self.chi, self.Psi, self.psi, self.S, self.v_swirl)
    for name in ('chi', 'Psi', 'psi', 'S', 'v_swirl'):
      if not np.all(np.isfinite(getattr(self, name))):
        raise errors.ValidationError(f'{name} has non-finite samples')

  @classmethod
  def background(cls, grid: grid_utils.Grid, s0: float) -> 'FlowFields':
    zeros = np.zeros(grid.shape)
    return cls(
        grid=grid,
        chi=zeros,
        Psi=zeros,
        psi=zeros,
        S=np.full(grid.shape, s0),
        v_swirl=zeros,
    )

  @property
  def angular_momentum(self) -> np.ndarray:
    r, phi = self.grid.mesh()
    return r * np.sin(phi) * self.v_swirl

  def replace(self, **changes) -> 'FlowFields':
    return dataclasses.replace(self, **changes)


def _first_bad_node(mask: np.ndarray) -> tuple[int, ...] | None:
  if not np.any(mask):
    return None
  return tuple(int(i) for i in np.argwhere(mask)[0])


def _bernoulli_head(z, q_sq, nodes=None) -> np.ndarray:
  head = np.asarray(z, dtype=np.float64) - 0.5 * np.asarray(q_sq)
  bad = _first_bad_node(~(head > 0.0))
  if bad is not None:
    node = None
    if nodes is not None and len(bad) == 2:
      node = nodes.node(bad)
    raise errors.CavitationError('nonpositive Bernoulli head', node=node)
  return head


def density_closure(
    gas: GasLaw, eta, z, q_sq, grid: grid_utils.Grid | None = None
) -> np.ndarray:
  """Density from entropy, potential and squared speed.

  Args:
    gas: Gas law.
    eta: Entropy, positive.
    z: Electric potential value (the absolute Bernoulli head).
    q_sq: Squared speed |p|^2.
    grid: If given and the inputs are grid fields, used to locate failures.

  Returns:
    [(gamma - 1) / (gamma eta) (z - |p|^2 / 2)]^(1 / (gamma - 1)).

  Raises:
    CavitationError: If z - |p|^2 / 2 <= 0 somewhere.
  """
  head = _bernoulli_head(z, q_sq, grid)
  g = gas.gamma
  return ((g - 1.0) / (g * np.asarray(eta)) * head) ** (1.0 / (g - 1.0))


def sound_speed_sq(
    gas: GasLaw, z, q_sq, grid: grid_utils.Grid | None = None
) -> np.ndarray:
  """Squared sound speed (gamma - 1)(z - |q|^2 / 2)."""
  return (gas.gamma - 1.0) * _bernoulli_head(z, q_sq, grid)


def curl_theta(
    psi: np.ndarray, grid: grid_utils.Grid, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
  """Curl of psi e_theta in the meridional plane.

  The r-component d_phi(psi sin phi) / (r sin phi) takes its axis limit
  2 d_phi psi / r, which requires psi to vanish on the axis.

  Args:
    psi: Samples of psi.
    grid: Sampling grid.
    tol: Allowed axis value relative to max |psi|.

  Returns:
    The r- and phi-components.
  """
  grid.check(psi)
  scale = 1.0 + float(np.max(np.abs(psi)))
  if np.max(np.abs(psi[:, 0])) > tol * scale:
    raise errors.AxisRegularityError('psi does not vanish on the axis')
  r, phi = grid.mesh()
  psi_r = grid_utils.derivative(psi, grid.hr, axis=0)
  psi_p = grid_utils.derivative(psi, grid.hphi, axis=1, parity=Parity.ODD)
  sin = np.sin(phi)
  quotient = np.where(sin > 0.0, psi / np.where(sin > 0.0, sin, 1.0), psi_p)
  curl_r = (psi_p + np.cos(phi) * quotient) / r
  curl_phi = -(psi + r * psi_r) / r
  return curl_r, curl_phi


def potential_gradient(
    potential: np.ndarray, grid: grid_utils.Grid
) -> tuple[np.ndarray, np.ndarray]:
  """Returns (d_r f, d_phi f / r) for a field that is even on the axis."""
  r, _ = grid.mesh()
  return (
      grid_utils.derivative(potential, grid.hr, axis=0),
      grid_utils.derivative(
          potential, grid.hphi, axis=1, parity=Parity.EVEN
      ) / r,
  )


def compose_velocity(
    grad_potential: tuple[np.ndarray, np.ndarray],
    curl_part: tuple[np.ndarray, np.ndarray],
    v_swirl: np.ndarray,
) -> VelocityTriple:
  """Helmholtz reconstruction u = grad(phi) + curl(psi e_theta) + V e_theta."""
  shape = np.shape(v_swirl)
  for part in (*grad_potential, *curl_part):
    if np.shape(part) != shape:
      raise errors.GridMismatchError(
          f'velocity parts of shape {np.shape(part)} and {shape}'
      )
  return VelocityTriple(
      u_r=grad_potential[0] + curl_part[0],
      u_phi=grad_potential[1] + curl_part[1],
      u_theta=np.asarray(v_swirl),
  )


def swirl_source(
    gas: GasLaw,
    r,
    phi,
    S,  # pylint: disable=invalid-name
    dS_dphi,  # pylint: disable=invalid-name
    v_swirl,
    dv_dphi,
    z,
    velocity: VelocityTriple,
) -> np.ndarray:
  """Source term G of the swirl stream equation.

  G = (d_phi S rho^(gamma-1) / (gamma-1) + V^2 cot(phi) + V d_phi V) / (r u_r),
  which equals the angular momentum form Lambda d_phi Lambda / (r sin phi)^2
  away from the axis and stays finite on it.
  """
  u_r = np.asarray(velocity.u_r)
  bad = _first_bad_node(~(u_r > 0.0))
  if bad is not None:
    r_at, phi_at = (np.broadcast_to(x, u_r.shape)[bad] for x in (r, phi))
    raise errors.BackflowError(
        'nonpositive radial velocity in swirl source',
        node=(float(r_at), float(phi_at)),
    )
  rho = density_closure(gas, S, z, velocity.speed_sq)
  sin = np.sin(phi)
  cot_term = np.where(
      sin > 0.0,
      np.asarray(v_swirl) ** 2 * np.cos(phi) / np.where(sin > 0.0, sin, 1.0),
      0.0,
  )
  entropy_term = dS_dphi * rho ** (gas.gamma - 1.0) / (gas.gamma - 1.0)
  return (entropy_term + cot_term + v_swirl * dv_dphi) / (r * u_r)


def axisymmetric_divergence(
    a_r: np.ndarray, a_phi: np.ndarray, grid: grid_utils.Grid
) -> np.ndarray:
  """Divergence of a_r e_r + a_phi e_phi, with a_phi odd on the axis."""
  r, phi = grid.mesh()
  radial = grid_utils.derivative(r**2 * a_r, grid.hr, axis=0) / r**2
  flux = np.sin(phi) * a_phi
  flux_p = grid_utils.derivative(flux, grid.hphi, axis=1, parity=Parity.EVEN)
  a_phi_p = grid_utils.derivative(a_phi, grid.hphi, axis=1, parity=Parity.ODD)
  # d_phi(sin a) / sin -> 2 d_phi a on the axis.
  polar = np.where(
      np.sin(phi) > 0.0,
      flux_p / np.where(np.sin(phi) > 0.0, np.sin(phi), 1.0),
      2.0 * a_phi_p,
  )
  return radial + polar / r


def primitive_fields(
    gas: GasLaw,
    fields: FlowFields,
    u_bar: np.ndarray,
    Phi_bar: np.ndarray,  # pylint: disable=invalid-name
) -> PrimitiveFields:
  """Reconstructs (rho, u, S, Phi) from a state and its background.

  Args:
    gas: Gas law.
    fields: Perturbation state.
    u_bar: Background radial velocity at the radial nodes.
    Phi_bar: Background electric potential at the radial nodes.

  Returns:
    The primitive variables on the state's grid.
  """
  grid = fields.grid
  grad = potential_gradient(fields.chi, grid)
  grad = (grad[0] + u_bar[:, None], grad[1])
  velocity = compose_velocity(
      grad, curl_theta(fields.psi, grid), fields.v_swirl
  )
  Phi = Phi_bar[:, None] + fields.Psi  # pylint: disable=invalid-name
  rho = density_closure(gas, fields.S, Phi, velocity.speed_sq, grid)
  c_sq = sound_speed_sq(gas, Phi, velocity.speed_sq, grid)
  return PrimitiveFields(
      gas=gas, rho=rho, velocity=velocity, S=fields.S, Phi=Phi, c_sq=c_sq
  )
