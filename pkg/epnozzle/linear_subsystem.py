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

"""Frozen-coefficient linear step for the potentials (chi, Psi).

Around a frozen state (chi*, Psi*), the continuity equation divided by
(q_r^2 - c^2) and the Poisson equation are linearized to

  L1(chi, Psi) = chi_rr + 2 a12 chi_rphi + a22 chi_phiphi + (a1 - alpha1) chi_r
                 + a2 chi_phi - b1 Psi_r - c Psi = F,
  L2(chi, Psi) = Lap Psi - g0 Psi - h1 chi_r = f.

The coefficients a_ij, a_i are taken at the frozen state; alpha1, b1, c, g0
and h1 are derivatives of the radial equations at the background and depend
on r only. F = L1(chi*, Psi*) - N(chi*, Psi*) where N is the full nonlinear
continuity residual, so a fixed point of the step solves N = 0. N is written
in the same quasi-linear form as L1, so the derivatives of chi cancel in F
before any stencil is applied; F then holds only first derivatives of chi,
taken with the velocity stencils.

Boundary data are absorbed by liftings; the homogeneous remainder is expanded
in the Neumann eigenbasis, giving coupled ODEs in r for the mode amplitudes
that are solved as one block-sparse finite-difference system.
"""

import dataclasses

from absl import logging
from epnozzle import core_model
from epnozzle import eigenbasis
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import profiles
from epnozzle import radial_background
import jax
from jax import numpy as jnp
from jax.experimental import enable_x64
import numpy as np
from scipy import interpolate
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

Parity = grid_utils.Parity
_QUADRATURE_ORDER = 24


def _radial_continuity(q1, dq1, z, dz, r, gamma):
  """Continuity residual of a radial flow, divided by (q1^2 - c^2)."""
  c_sq = (gamma - 1.0) * (z - 0.5 * q1**2)
  numerator = q1**2 * dq1 - c_sq * (dq1 + 2.0 * q1 / r) - q1 * dz
  return numerator / (q1**2 - c_sq)


def _density(z, q1, s, gamma):
  return ((gamma - 1.0) / (gamma * s) * (z - 0.5 * q1**2)) ** (
      1.0 / (gamma - 1.0)
  )


@dataclasses.dataclass(frozen=True, eq=False)
class RadialCoefficients:
  """Coefficients taken at the background, one value per radial node."""

  alpha1: np.ndarray
  b1: np.ndarray
  c: np.ndarray
  g0: np.ndarray
  h1: np.ndarray


def radial_coefficients(
    gas: core_model.GasLaw,
    s0: float,
    sample: radial_background.BackgroundSample,
) -> RadialCoefficients:
  """Differentiates the radial equations at the background with jax."""
  with enable_x64():
    q1, dq1, z, dz, r = (
        jnp.asarray(a, dtype=jnp.float64)
        for a in (sample.u, sample.du, sample.Phi_bar, sample.E, sample.r)
    )
    continuity_grad = jax.vmap(
        jax.grad(_radial_continuity, argnums=(0, 2, 3)),
        in_axes=(0, 0, 0, 0, 0, None),
    )
    d_q1, d_z, d_dz = continuity_grad(q1, dq1, z, dz, r, gas.gamma)
    density_grad = jax.vmap(
        jax.grad(_density, argnums=(0, 1)), in_axes=(0, 0, None, None)
    )
    g0, h1 = density_grad(z, q1, s0, gas.gamma)
    d_q1, d_z, d_dz, g0, h1 = (
        np.asarray(a, dtype=np.float64) for a in (d_q1, d_z, d_dz, g0, h1)
    )
  c_sq = (gas.gamma - 1.0) * (sample.Phi_bar - 0.5 * sample.u**2)
  a1 = -2.0 * c_sq / (sample.r * (sample.u**2 - c_sq))
  return RadialCoefficients(alpha1=a1 - d_q1, b1=-d_dz, c=-d_z, g0=g0, h1=h1)


@dataclasses.dataclass(frozen=True, eq=False)
class CoefficientFields:
  """Coefficients and right-hand sides of the linear step on the grid.

  The coefficient a2 contains cot(phi) and is stored multiplied by sin(phi).
  """

  grid: grid_utils.Grid
  a12: np.ndarray
  a22: np.ndarray
  a1: np.ndarray
  a2_sin: np.ndarray
  radial: RadialCoefficients
  F: np.ndarray  # pylint: disable=invalid-name
  frak_f: np.ndarray

  @property
  def a11(self) -> float:
    return 1.0

  @property
  def a21(self) -> np.ndarray:
    return self.a12

  @property
  def g22(self) -> np.ndarray:
    return 1.0 / self.grid.mesh()[0] ** 2

  @property
  def g1(self) -> np.ndarray:
    return 2.0 / self.grid.mesh()[0]

  @property
  def g2_sin(self) -> np.ndarray:
    r, phi = self.grid.mesh()
    return np.cos(phi) / r**2


@dataclasses.dataclass(frozen=True, eq=False)
class _FrozenFlow:
  """Velocity and thermodynamics of a frozen state on the grid.

  `source` is the continuity residual N without its terms in first and
  second derivatives of chi, divided by q_r^2 - c^2.
  """

  q_r: np.ndarray
  q_phi: np.ndarray
  c_sq: np.ndarray
  rho: np.ndarray
  chi_r: np.ndarray
  Psi_r: np.ndarray  # pylint: disable=invalid-name
  source: np.ndarray


def _frozen_flow(
    state: core_model.FlowFields,
    sample: radial_background.BackgroundSample,
    gas: core_model.GasLaw,
    sonic_margin: float,
) -> _FrozenFlow:
  """Evaluates the velocity, the guards and the chi-free part of N."""
  grid = state.grid
  r, _ = grid.mesh()
  hr, hphi = grid.hr, grid.hphi
  u_bar = sample.u[:, None]
  du_bar = sample.du[:, None]

  chi_r, chi_p = core_model.potential_gradient(state.chi, grid)
  curl_r, curl_p = core_model.curl_theta(state.psi, grid)
  q_r = u_bar + chi_r + curl_r
  q_p = chi_p + curl_p
  swirl = state.v_swirl
  q_sq = q_r**2 + q_p**2 + swirl**2
  bad = ~(q_r > 0.0)
  if np.any(bad):
    node = grid.node(tuple(np.argwhere(bad)[0]))
    raise errors.BackflowError('nonpositive radial velocity', node=node)
  z = sample.Phi_bar[:, None] + state.Psi
  rho = core_model.density_closure(gas, state.S, z, q_sq, grid)
  c_sq = core_model.sound_speed_sq(gas, z, q_sq, grid)
  denominator = q_r**2 - c_sq
  margin = denominator / c_sq
  if np.min(margin) < sonic_margin:
    index = np.unravel_index(np.argmin(margin), margin.shape)
    raise errors.SonicApproachError(
        f'radial Mach margin {float(margin[index]):.3e} below {sonic_margin}',
        node=grid.node(index),
    )

  def d_r(f):
    return grid_utils.derivative(f, hr, axis=0)

  def d_phi(f, parity):
    return grid_utils.derivative(f, hphi, axis=1, parity=parity)

  # q . grad(|q|^2 / 2) with the chi derivatives left out; they belong to the
  # principal part and to a1, a2, which the linear step carries itself.
  Psi_r = d_r(state.Psi)  # pylint: disable=invalid-name
  kinetic = q_r * (
      q_r * (du_bar + d_r(curl_r)) + q_p * d_r(curl_p) + swirl * d_r(swirl)
  ) + q_p / r * (
      q_r * d_phi(curl_r, Parity.EVEN)
      + q_p * d_phi(curl_p, Parity.ODD)
      + swirl * d_phi(swirl, Parity.ODD)
  )
  field = q_r * (sample.E[:, None] + Psi_r) + q_p * d_phi(
      state.Psi, Parity.EVEN
  ) / r
  entropy = q_r * d_r(state.S) + q_p * d_phi(state.S, Parity.EVEN) / r
  numerator = (
      kinetic
      - c_sq * (du_bar + 2.0 * u_bar / r)
      - field
      + c_sq / ((gas.gamma - 1.0) * state.S) * entropy
  )
  return _FrozenFlow(
      q_r=q_r,
      q_phi=q_p,
      c_sq=c_sq,
      rho=rho,
      chi_r=chi_r,
      Psi_r=Psi_r,
      source=numerator / denominator,
  )


def apply_operators(
    coeffs: CoefficientFields,
    chi: np.ndarray,
    Psi: np.ndarray,  # pylint: disable=invalid-name
) -> tuple[np.ndarray, np.ndarray]:
  """Applies (L1, L2) to grid fields with the solver's stencils."""
  grid = coeffs.grid
  _, phi = grid.mesh()
  hr, hphi = grid.hr, grid.hphi
  radial = coeffs.radial
  chi_r = grid_utils.derivative(chi, hr, axis=0)
  chi_rr = grid_utils.derivative(chi, hr, axis=0, order=2)
  chi_p = grid_utils.derivative(chi, hphi, axis=1, parity=Parity.EVEN)
  chi_pp = grid_utils.derivative(
      chi, hphi, axis=1, order=2, parity=Parity.EVEN
  )
  chi_rp = grid_utils.derivative(chi_r, hphi, axis=1, parity=Parity.EVEN)
  Psi_r = grid_utils.derivative(Psi, hr, axis=0)  # pylint: disable=invalid-name
  l1 = (
      chi_rr
      + 2.0 * coeffs.a12 * chi_rp
      + coeffs.a22 * chi_pp
      + (coeffs.a1 - radial.alpha1[:, None]) * chi_r
      + coeffs.a2_sin * grid_utils.divide_by_sin(chi_p, chi_pp, phi)
      - radial.b1[:, None] * Psi_r
      - radial.c[:, None] * Psi
  )
  l2 = (
      grid_utils.laplacian(Psi, grid)
      - radial.g0[:, None] * Psi
      - radial.h1[:, None] * chi_r
  )
  return l1, l2


def assemble_coefficients(
    state: core_model.FlowFields,
    sample: radial_background.BackgroundSample,
    radial: RadialCoefficients,
    gas: core_model.GasLaw,
    doping: np.ndarray,
    sonic_margin: float = 1e-2,
) -> CoefficientFields:
  """Coefficients and right-hand sides at a frozen state.

  Args:
    state: Frozen (chi*, Psi*, psi*, S*, V*).
    sample: Background sampled at the grid radii.
    radial: Background coefficients from `radial_coefficients`.
    gas: Gas law.
    doping: Ion density b on the grid.
    sonic_margin: Smallest allowed (q_r^2 - c^2) / c^2.

  Returns:
    The coefficient fields with F and the Poisson right-hand side.

  Raises:
    SonicApproachError, BackflowError, CavitationError: From the guards.
  """
  grid = state.grid
  grid.check(doping)
  r, phi = grid.mesh()
  flow = _frozen_flow(state, sample, gas, sonic_margin)
  q_r, q_p, c_sq = flow.q_r, flow.q_phi, flow.c_sq
  denominator = q_r**2 - c_sq
  # L1(chi*, Psi*) - N(chi*, Psi*) with the chi terms of both cancelled.
  F = (  # pylint: disable=invalid-name
      -radial.alpha1[:, None] * flow.chi_r
      - radial.b1[:, None] * flow.Psi_r
      - radial.c[:, None] * state.Psi
      - flow.source
  )
  frak_f = (
      flow.rho
      - sample.rho[:, None]
      - (doping - sample.b_bar[:, None])
      - radial.g0[:, None] * state.Psi
      - radial.h1[:, None] * flow.chi_r
  )
  return CoefficientFields(
      grid=grid,
      a12=q_r * q_p / (r * denominator),
      a22=(q_p**2 - c_sq) / (r**2 * denominator),
      a1=-2.0 * c_sq / (r * denominator),
      a2_sin=-(q_r * q_p * np.sin(phi) + c_sq * np.cos(phi))
      / (r**2 * denominator),
      radial=radial,
      F=F,
      frak_f=frak_f,
  )


@dataclasses.dataclass(frozen=True)
class BoundaryData:
  """Boundary perturbations relative to the background.

  Attributes:
    u_en: Entrance radial velocity minus the background velocity.
    v_en: Entrance polar velocity.
    E_en: Entrance radial field minus E0.
    Phi_ex: Exit radial field minus the background field at r_ex.
  """

  u_en: profiles.Profile = profiles.Zero()
  v_en: profiles.Profile = profiles.Zero()
  E_en: profiles.Profile = profiles.Zero()  # pylint: disable=invalid-name
  Phi_ex: profiles.Profile = profiles.Zero()  # pylint: disable=invalid-name


@dataclasses.dataclass(frozen=True, eq=False)
class Lifting:
  """Fields carrying the inhomogeneous boundary data."""

  chi_bd: np.ndarray
  Psi_bd: np.ndarray  # pylint: disable=invalid-name
  entrance_trace: np.ndarray


def cutoff(r, r_en: float, r_ex: float) -> np.ndarray:
  """Quintic smoothstep: 1 at r_en, 0 at r_ex, flat to second order."""
  x = np.clip((np.asarray(r, dtype=np.float64) - r_en) / (r_ex - r_en), 0, 1)
  return 1.0 - x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def entrance_potential(
    v_en: profiles.Profile, r_en: float, phi: np.ndarray
) -> np.ndarray:
  """r_en * int_0^phi v_en, the entrance potential minus its axis value."""
  phi = np.asarray(phi, dtype=np.float64)
  x, w = np.polynomial.legendre.leggauss(_QUADRATURE_ORDER)
  t = np.multiply.outer(phi, 0.5 * (x + 1.0))
  return r_en * 0.5 * phi * (v_en(t) @ w)


def lift_boundary(
    grid: grid_utils.Grid, boundary: BoundaryData, tol: float = 1e-8
) -> Lifting:
  """Builds liftings chi_bd, Psi_bd of the boundary data.

  chi_bd = eta(r) r_en int_0^phi v_en matches the entrance trace with zero
  radial derivative. Psi_bd is quadratic in r with d_r Psi_bd = E_en - E0 at
  r_en and the exit field perturbation at r_ex.

  Args:
    grid: Sampling grid.
    boundary: Boundary perturbations.
    tol: Tolerance of the wall conditions.

  Returns:
    The liftings on the grid.

  Raises:
    CompatibilityError: If the data violate the wall conditions.
  """
  phi0 = grid.phi0
  checks = {
      'v_en(phi0) = 0': boundary.v_en(phi0),
      "v_en'(phi0) = 0": boundary.v_en.derivative(phi0),
      "E_en'(phi0) = 0": boundary.E_en.derivative(phi0),
      "Phi_ex'(phi0) = 0": boundary.Phi_ex.derivative(phi0),
  }
  failures = [
      f'{name} (got {float(value):.3e})'
      for name, value in checks.items()
      if abs(float(value)) > tol
  ]
  if failures:
    raise errors.CompatibilityError(failures)
  r, phi = grid.mesh()
  r_en, r_ex = grid.r_en, grid.r_ex
  length = r_ex - r_en
  trace = entrance_potential(boundary.v_en, r_en, grid.phi)
  chi_bd = cutoff(r, r_en, r_ex) * trace[None, :]
  a = boundary.E_en(phi)
  b = boundary.Phi_ex(phi)
  Psi_bd = (r * (r_ex * a - r_en * b) + 0.5 * r**2 * (b - a)) / length  # pylint: disable=invalid-name
  return Lifting(chi_bd=chi_bd, Psi_bd=Psi_bd, entrance_trace=trace)


@dataclasses.dataclass(frozen=True, eq=False)
class ModalSystem:
  """Coupled ODEs in r for the mode amplitudes (v_k, w_k).

  v_k'' + sum_j (A12 + A1)_kj v_j' + (A22 + A2)_kj v_j - b1 w_k' - c w_k = F_k
  w_k'' + 2 w_k' / r - omega_k w_k / r^2 - g0 w_k - h1 v_k' = f_k

  with v_k(r_en) = 0, v_k'(r_en) = g_k and w_k'(r_en) = w_k'(r_ex) = 0.
  Matrices have shape (n_r, m + 1, m + 1), indexed [node, k, j].
  """

  r: np.ndarray
  omegas: np.ndarray
  A12: np.ndarray  # pylint: disable=invalid-name
  A22: np.ndarray  # pylint: disable=invalid-name
  A1: np.ndarray  # pylint: disable=invalid-name
  A2: np.ndarray  # pylint: disable=invalid-name
  b1: np.ndarray
  c: np.ndarray
  g0: np.ndarray
  h1: np.ndarray
  F: np.ndarray  # pylint: disable=invalid-name
  f: np.ndarray
  g: np.ndarray

  @property
  def num_modes(self) -> int:
    return self.omegas.size


@dataclasses.dataclass(frozen=True, eq=False)
class ModalSolution:
  v: np.ndarray
  w: np.ndarray


def _to_nodes(field: np.ndarray, grid: grid_utils.Grid, nodes: np.ndarray):
  return interpolate.CubicSpline(grid.phi, field, axis=-1)(nodes)


def _reduce(coeffs, basis, f_h, frak_h, entrance):
  grid = coeffs.grid
  nodes, w = basis.nodes, basis.weights
  xi, xi_s = basis.xis, basis.dxis_s
  sin, cos = np.sin(nodes), np.cos(nodes)
  a12 = _to_nodes(coeffs.a12, grid, nodes)
  a22 = _to_nodes(coeffs.a22, grid, nodes)
  a1 = _to_nodes(coeffs.a1, grid, nodes) - coeffs.radial.alpha1[:, None]
  a2_sin = _to_nodes(coeffs.a2_sin, grid, nodes)
  # xi_j'' = -omega_j xi_j + cos(phi) xi_j,s and xi_j' = -sin(phi) xi_j,s.
  second = -basis.omegas[:, None] * xi + cos * xi_s
  first = -sin * xi_s
  matrices = {
      'A12': np.einsum('iq,kq,jq->ikj', 2.0 * a12 * w, xi, first),
      'A22': np.einsum('iq,kq,jq->ikj', a22 * w, xi, second),
      'A1': np.einsum('iq,kq,jq->ikj', a1 * w, xi, xi),
      'A2': np.einsum('iq,kq,jq->ikj', a2_sin * w, xi, -xi_s),
  }
  rhs = {
      'F': _to_nodes(f_h, grid, nodes) * w @ xi.T,
      'f': _to_nodes(frak_h, grid, nodes) * w @ xi.T,
      'g': _to_nodes(entrance, grid, nodes) * w @ xi.T,
  }
  return matrices, rhs


def galerkin_reduce(
    coeffs: CoefficientFields,
    basis: eigenbasis.EigenBasis,
    lifting: Lifting | None = None,
    entrance: np.ndarray | None = None,
    check_resolution: bool = False,
) -> ModalSystem:
  """Projects the homogeneous linear problem onto the eigenbasis.

  Args:
    coeffs: Coefficient fields on the grid.
    basis: Eigenbasis with the same phi0.
    lifting: Boundary liftings; their operator action is moved to the
      right-hand side.
    entrance: Radial derivative of chi at r_en on the polar grid nodes.
    check_resolution: Recompute with twice the quadrature nodes and raise if
      any matrix entry moves by more than 1e-8.

  Returns:
    The modal system.
  """
  grid = coeffs.grid
  if abs(basis.phi0 - grid.phi0) > 1e-12:
    raise errors.GridMismatchError('basis and grid have different phi0')
  f_h, frak_h = coeffs.F, coeffs.frak_f
  if lifting is not None:
    l1, l2 = apply_operators(coeffs, lifting.chi_bd, lifting.Psi_bd)
    f_h, frak_h = f_h - l1, frak_h - l2
  if entrance is None:
    entrance = np.zeros(grid.phi.size)
  matrices, rhs = _reduce(coeffs, basis, f_h, frak_h, entrance)
  if check_resolution:
    finer = eigenbasis.build_basis(
        basis.phi0,
        basis.num_modes - 1,
        2 * basis.nodes.size,
        check_resolution=False,
    )
    finer_matrices, _ = _reduce(coeffs, finer, f_h, frak_h, entrance)
    for name, matrix in matrices.items():
      change = np.max(np.abs(finer_matrices[name] - matrix))
      if change > 1e-8 * (1.0 + np.max(np.abs(matrix))):
        raise errors.ResolutionError(
            f'{name} changes by {change:.2e} under node doubling'
        )
  radial = coeffs.radial
  return ModalSystem(
      r=grid.r,
      omegas=basis.omegas,
      b1=radial.b1,
      c=radial.c,
      g0=radial.g0,
      h1=radial.h1,
      **matrices,
      **rhs,
  )


def solve_modal_system(system: ModalSystem) -> ModalSolution:
  """Solves the modal boundary value problem as one sparse system.

  Both families are discretized with second-order centered differences on
  the uniform r-grid. The v-block has two conditions at r_en and no exit
  condition; the w-block has second-order one-sided Neumann rows at both
  ends.

  Args:
    system: The modal system.

  Returns:
    Mode amplitudes v, w of shape (n_r, m + 1).

  Raises:
    SingularSystemError: If the factorization fails.
  """
  r = system.r
  n, m = r.size, system.num_modes
  h = float(r[1] - r[0])
  if n < 4:
    raise errors.InsufficientGridError('the modal solve needs 4 radial nodes')
  size = 2 * n * m
  modes = np.arange(m)

  def v(i, k):
    return np.asarray(i) * m + k

  def w(i, k):
    return n * m + np.asarray(i) * m + k

  rows, cols, vals = [], [], []

  def add(row, col, val):
    row, col, val = np.broadcast_arrays(row, col, val)
    rows.append(row.ravel())
    cols.append(col.ravel())
    vals.append(val.ravel().astype(np.float64))

  rhs = np.zeros(size)
  inner = np.arange(1, n - 1)
  ii, kk = np.meshgrid(inner, modes, indexing='ij')
  p_matrix = system.A12 + system.A1
  q_matrix = system.A22 + system.A2

  # v-equations at interior nodes.
  row = v(ii, kk)
  add(row, v(ii - 1, kk), 1.0 / h**2)
  add(row, v(ii, kk), -2.0 / h**2)
  add(row, v(ii + 1, kk), 1.0 / h**2)
  iii, kkk, jjj = np.meshgrid(inner, modes, modes, indexing='ij')
  row3 = v(iii, kkk)
  p_inner = p_matrix[inner]
  add(row3, v(iii + 1, jjj), p_inner / (2.0 * h))
  add(row3, v(iii - 1, jjj), -p_inner / (2.0 * h))
  add(row3, v(iii, jjj), q_matrix[inner])
  b1 = system.b1[inner][:, None]
  add(row, w(ii + 1, kk), -b1 / (2.0 * h))
  add(row, w(ii - 1, kk), b1 / (2.0 * h))
  add(row, w(ii, kk), -system.c[inner][:, None])
  rhs[row.ravel()] = system.F[inner].ravel()

  # w-equations at interior nodes.
  row = w(ii, kk)
  r_in = r[inner][:, None]
  add(row, w(ii - 1, kk), 1.0 / h**2 - 1.0 / (r_in * h))
  add(row, w(ii + 1, kk), 1.0 / h**2 + 1.0 / (r_in * h))
  add(
      row,
      w(ii, kk),
      -2.0 / h**2
      - system.omegas[None, :] / r_in**2
      - system.g0[inner][:, None],
  )
  h1 = system.h1[inner][:, None]
  add(row, v(ii + 1, kk), -h1 / (2.0 * h))
  add(row, v(ii - 1, kk), h1 / (2.0 * h))
  rhs[row.ravel()] = system.f[inner].ravel()

  # Entrance conditions for v; the second one takes the unused exit row.
  add(v(0, modes), v(0, modes), 1.0)
  rhs[v(0, modes)] = 0.0
  last = v(n - 1, modes)
  add(last, v(0, modes), -1.5 / h)
  add(last, v(1, modes), 2.0 / h)
  add(last, v(2, modes), -0.5 / h)
  rhs[last] = system.g

  # Neumann rows for w.
  first = w(0, modes)
  add(first, w(0, modes), -1.5 / h)
  add(first, w(1, modes), 2.0 / h)
  add(first, w(2, modes), -0.5 / h)
  rhs[first] = 0.0
  last = w(n - 1, modes)
  add(last, w(n - 1, modes), 1.5 / h)
  add(last, w(n - 2, modes), -2.0 / h)
  add(last, w(n - 3, modes), 0.5 / h)
  rhs[last] = 0.0

  matrix = sparse.coo_matrix(
      (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
      shape=(size, size),
  ).tocsc()
  x = _sparse_solve(matrix, rhs)
  return ModalSolution(
      v=x[: n * m].reshape(n, m), w=x[n * m :].reshape(n, m)
  )


def _sparse_solve(matrix: sparse.csc_matrix, rhs: np.ndarray) -> np.ndarray:
  """LU solve that reports the smallest pivot on failure."""
  try:
    lu = sparse_linalg.splu(matrix)
  except RuntimeError as e:
    raise errors.SingularSystemError(str(e), pivot=0.0) from e
  pivots = np.abs(lu.U.diagonal())
  if pivots.min() <= 1e-14 * pivots.max():
    raise errors.SingularSystemError(
        'numerically singular system', pivot=float(pivots.min())
    )
  x = lu.solve(rhs)
  if not np.all(np.isfinite(x)):
    raise errors.SingularSystemError(
        'non-finite solution', pivot=float(pivots.min())
    )
  return x


def reconstruct_fields(
    solution: ModalSolution,
    basis: eigenbasis.EigenBasis,
    lifting: Lifting,
    grid: grid_utils.Grid,
) -> tuple[np.ndarray, np.ndarray]:
  """chi = sum v_k xi_k + chi_bd and Psi = sum w_k xi_k + Psi_bd on the grid."""
  xi = basis.values(grid.phi)
  chi = solution.v @ xi + lifting.chi_bd
  Psi = solution.w @ xi + lifting.Psi_bd  # pylint: disable=invalid-name
  trace_error = float(np.max(np.abs(chi[0] - lifting.entrance_trace)))
  if trace_error > 1e-10 * (1.0 + float(np.max(np.abs(chi)))):
    logging.warning('Entrance trace of chi is off by %.3e.', trace_error)
  return chi, Psi


def linear_step(
    coeffs: CoefficientFields,
    basis: eigenbasis.EigenBasis,
    lifting: Lifting,
    entrance: np.ndarray,
    check_resolution: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
  """One application of the potential map: reduce, solve, reconstruct."""
  system = galerkin_reduce(
      coeffs, basis, lifting, entrance, check_resolution=check_resolution
  )
  solution = solve_modal_system(system)
  return reconstruct_fields(solution, basis, lifting, coeffs.grid)
