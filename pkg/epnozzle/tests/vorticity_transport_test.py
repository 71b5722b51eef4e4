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


"""Tests for the swirl stream function and scalar transport."""

from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import profiles
from epnozzle import radial_background
from epnozzle import vorticity_transport
import numpy as np

from absl.testing import absltest
from absl.testing import parameterized

_R_EN, _R_EX, _PHI0 = 2.0, 2.5, 0.5


def _grid(n_r, n_phi):
  return grid_utils.Grid.uniform(_R_EN, _R_EX, _PHI0, n_r, n_phi)


def _manufactured(grid):
  """psi = sin(k (r - r_en)) sin(m phi) sin(phi) and its source."""
  k = np.pi / (_R_EX - _R_EN)
  m = np.pi / _PHI0
  r, phi = grid.mesh()
  radial = np.sin(k * (r - _R_EN))
  d_radial = k * np.cos(k * (r - _R_EN))
  polar = np.sin(m * phi) * np.sin(phi)
  # (P'' + cot P' - P / sin^2) for P = sin(m phi) sin(phi).
  angular = -(m**2 + 2.0) * np.sin(m * phi) * np.sin(phi) + 3.0 * m * np.cos(
      m * phi
  ) * np.cos(phi)
  psi = radial * polar
  source = -(
      -(k**2) * radial * polar
      + 2.0 / r * d_radial * polar
      + radial * angular / r**2
  )
  flux = _R_EN * k * np.sin(m * grid.phi) * np.sin(grid.phi)
  return psi, source, flux


class SolvePsiTest(parameterized.TestCase):

  def test_zero_source(self):
    grid = _grid(17, 9)
    psi = vorticity_transport.solve_psi(np.zeros(grid.shape), grid)
    np.testing.assert_array_equal(psi, 0.0)

  def test_manufactured_solution_converges(self):
    errors_ = []
    for n in (17, 33, 65, 129):
      grid = _grid(n, n)
      exact, source, flux = _manufactured(grid)
      psi = vorticity_transport.solve_psi(source, grid, entrance_flux=flux)
      errors_.append(np.max(np.abs(psi - exact)))
    orders = np.log2(np.array(errors_[:-1]) / np.array(errors_[1:]))
    self.assertGreaterEqual(orders.min(), 1.9)
    self.assertLess(errors_[-1], 1e-4)

  def test_boundary_values(self):
    grid = _grid(17, 17)
    psi = vorticity_transport.solve_psi(np.ones(grid.shape), grid)
    np.testing.assert_array_equal(psi[:, 0], 0.0)
    np.testing.assert_array_equal(psi[:, -1], 0.0)
    np.testing.assert_array_equal(psi[-1], 0.0)
    # d_r(r psi) = 0 at the entrance, to second order.
    u = grid.r[:, None] * psi
    flux = (-1.5 * u[0] + 2.0 * u[1] - 0.5 * u[2]) / grid.hr
    self.assertLess(np.max(np.abs(flux)), 0.05 * np.max(np.abs(u[1])) / grid.hr)

  def test_maximum_principle(self):
    grid = _grid(13, 9)
    r, phi = grid.mesh()
    source = np.exp(-((r - 2.2) ** 2) / 0.01) * np.sin(phi / _PHI0 * np.pi)
    psi = vorticity_transport.solve_psi(source, grid)
    self.assertGreaterEqual(psi.min(), 0.0)
    self.assertGreater(psi.max(), 0.0)

  def test_rejects_non_finite_source(self):
    grid = _grid(9, 9)
    source = np.zeros(grid.shape)
    source[4, 4] = np.inf
    with self.assertRaises(errors.ValidationError):
      vorticity_transport.solve_psi(source, grid)


class StreamlineTest(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    self.grid = _grid(11, 11)
    self.r, self.phi = self.grid.mesh()

  def velocity(self, u_r, u_phi):
    return core_model.VelocityTriple(
        u_r=u_r, u_phi=u_phi, u_theta=np.zeros(self.grid.shape)
    )

  def test_radial_flow_keeps_the_angle(self):
    velocity = self.velocity(1.0 + self.r, np.zeros(self.grid.shape))
    feet = vorticity_transport.trace_streamline(velocity, self.grid)
    np.testing.assert_allclose(feet.phi_foot, self.phi, atol=1e-12)
    np.testing.assert_array_equal(
        feet.status, vorticity_transport.FOOT_INTERIOR
    )

  def test_linear_characteristics(self):
    # u_r = 1, u_phi = r gives dphi/dr = 1.
    velocity = self.velocity(np.ones(self.grid.shape), self.r.copy())
    feet = vorticity_transport.trace_streamline(velocity, self.grid)
    expected = self.phi - (self.r - _R_EN)
    inside = (expected > 0.0) & (self.phi < _PHI0)
    np.testing.assert_allclose(
        feet.phi_foot[inside], expected[inside], atol=1e-7
    )
    below = expected < -1e-9
    self.assertTrue(np.any(below))
    np.testing.assert_array_equal(feet.phi_foot[below], 0.0)
    np.testing.assert_array_equal(
        feet.status[below], vorticity_transport.FOOT_AXIS
    )
    np.testing.assert_array_equal(feet.phi_foot[:, -1], _PHI0)
    np.testing.assert_array_equal(feet.phi_foot[:, 0], 0.0)

  def test_wall_crossing_ends_on_the_wall(self):
    # u_phi = -r gives dphi/dr = -1; feet above phi0 stop on the wall.
    velocity = self.velocity(np.ones(self.grid.shape), -self.r)
    feet = vorticity_transport.trace_streamline(velocity, self.grid)
    expected = self.phi + (self.r - _R_EN)
    interior = np.zeros(self.grid.shape, dtype=bool)
    interior[:, 1:-1] = True
    above = interior & (expected > _PHI0 + 1e-9)
    self.assertTrue(np.any(above))
    np.testing.assert_array_equal(feet.phi_foot[above], _PHI0)
    np.testing.assert_array_equal(
        feet.status[above], vorticity_transport.FOOT_WALL
    )
    inside = interior & (expected < _PHI0 - 1e-9)
    np.testing.assert_allclose(
        feet.phi_foot[inside], expected[inside], atol=1e-7
    )

  def test_streamline_leaving_and_reentering_ends_on_the_axis(self):
    grid = _grid(41, 11)
    r, _ = grid.mesh()
    width = _R_EX - _R_EN
    # dphi/dr = -sin(2 pi (r - r_en) / width) integrates to zero over the
    # nozzle, but dips below the axis halfway from the exit.
    velocity = core_model.VelocityTriple(
        u_r=np.ones(grid.shape),
        u_phi=-r * np.sin(2.0 * np.pi * (r - _R_EN) / width),
        u_theta=np.zeros(grid.shape),
    )
    feet = vorticity_transport.trace_streamline(velocity, grid)
    self.assertEqual(feet.status[-1, 1], vorticity_transport.FOOT_AXIS)
    self.assertEqual(feet.phi_foot[-1, 1], 0.0)
    # Streamlines far from the axis come back to their angle.
    self.assertEqual(feet.status[-1, 5], vorticity_transport.FOOT_INTERIOR)
    self.assertAlmostEqual(feet.phi_foot[-1, 5], grid.phi[5], delta=5e-3)


  def test_backflow(self):
    u_r = np.ones(self.grid.shape)
    u_r[5, 5] = -0.1
    with self.assertRaises(errors.BackflowError) as cm:
      vorticity_transport.trace_streamline(
          self.velocity(u_r, np.zeros(self.grid.shape)), self.grid
      )
    self.assertEqual(cm.exception.node, self.grid.node((5, 5)))


class TransportTest(absltest.TestCase):

  def setUp(self):
    super().setUp()
    self.grid = _grid(11, 11)
    self.r, self.phi = self.grid.mesh()
    self.radial_feet = vorticity_transport.StreamlineFoot(
        phi_foot=self.phi.copy(),
        status=np.zeros(self.grid.shape, dtype=np.int8),
    )

  def test_uniform_entrance_data(self):
    s, v = vorticity_transport.transport_scalars(
        self.radial_feet, profiles.Zero().shifted(1.0), profiles.Zero(),
        self.grid,
    )
    np.testing.assert_array_equal(s, 1.0)
    np.testing.assert_array_equal(v, 0.0)

  def test_radial_flow_carries_profiles(self):
    s_en = profiles.Function(fn=lambda p: 1.0 + p**2, dfn=lambda p: 2.0 * p)
    w_en = profiles.Function(fn=np.sin, dfn=np.cos)
    s, v = vorticity_transport.transport_scalars(
        self.radial_feet, s_en, w_en, self.grid
    )
    np.testing.assert_allclose(s, 1.0 + self.phi**2)
    np.testing.assert_allclose(v, _R_EN * np.sin(self.phi) / self.r)
    np.testing.assert_array_equal(v[:, 0], 0.0)

  def test_linear_characteristics_transport(self):
    velocity = core_model.VelocityTriple(
        u_r=np.ones(self.grid.shape),
        u_phi=self.r.copy(),
        u_theta=np.zeros(self.grid.shape),
    )
    feet = vorticity_transport.trace_streamline(velocity, self.grid)
    s_en = profiles.Function(fn=lambda p: p**2, dfn=lambda p: 2.0 * p)
    s, _ = vorticity_transport.transport_scalars(
        feet, s_en, profiles.Zero(), self.grid
    )
    expected = self.phi - (self.r - _R_EN)
    inside = (expected > 0.0) & (self.phi < _PHI0)
    np.testing.assert_allclose(s[inside], expected[inside] ** 2, atol=1e-7)

  def test_range_is_preserved(self):
    s_en = profiles.Tabulated(
        phi=(0.0, 0.2, 0.3, 0.5), values=(1.0, 1.0, 2.0, 2.0)
    )
    velocity = core_model.VelocityTriple(
        u_r=np.ones(self.grid.shape),
        u_phi=0.3 * self.r * np.sin(np.pi * self.phi / _PHI0),
        u_theta=np.zeros(self.grid.shape),
    )
    feet = vorticity_transport.trace_streamline(velocity, self.grid)
    s, _ = vorticity_transport.transport_scalars(
        feet, s_en, profiles.Zero(), self.grid
    )
    self.assertGreaterEqual(s.min(), 1.0)
    self.assertLessEqual(s.max(), 2.0)

  def test_swirl_must_vanish_on_the_axis(self):
    with self.assertRaises(errors.CompatibilityError):
      vorticity_transport.transport_scalars(
          self.radial_feet,
          profiles.Zero().shifted(1.0),
          profiles.CosineSeries((0.1,), _PHI0),
          self.grid,
      )


class SourceTest(absltest.TestCase):

  def test_background_has_no_swirl_source(self):
    params = radial_background.BackgroundParams(
        gas=core_model.GasLaw(gamma=5.0 / 3.0),
        m0=10.0,
        S0=1.0,
        rho0=1.0,
        E0=0.0,
        b0=0.5,
    )
    bg = radial_background.integrate_background(params, (_R_EN, _R_EX))
    grid = _grid(9, 9)
    sample = bg.evaluate(grid.r)
    fields = core_model.FlowFields.background(grid, 1.0)
    source = vorticity_transport.swirl_source_field(params.gas, fields, sample)
    np.testing.assert_allclose(source, 0.0, atol=1e-12)
    velocity = vorticity_transport.composed_velocity(fields, sample)
    np.testing.assert_allclose(
        velocity.u_r, np.broadcast_to(sample.u[:, None], grid.shape)
    )


if __name__ == '__main__':
  absltest.main()
