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


"""Tests for the a-posteriori residual checks."""

from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import radial_background
from epnozzle import verify_report
import numpy as np

from absl.testing import absltest
from absl.testing import parameterized

_GAS = core_model.GasLaw(gamma=5.0 / 3.0)


def background_fields(n_r=33, n_phi=17):
  params = radial_background.BackgroundParams(
      gas=_GAS, m0=10.0, S0=1.0, rho0=1.0, E0=0.0, b0=0.5
  )
  bg = radial_background.integrate_background(params, (2.0, 2.5))
  grid = grid_utils.Grid.uniform(2.0, 2.5, 0.5, n_r, n_phi)
  sample = bg.evaluate(grid.r)
  fields = core_model.FlowFields.background(grid, 1.0)
  prim = core_model.primitive_fields(_GAS, fields, sample.u, sample.Phi_bar)
  return fields.replace(primitives=prim), sample


class StencilTest(parameterized.TestCase):

  def test_centered_weights(self):
    np.testing.assert_allclose(
        verify_report.fd_weights((-2, -1, 0, 1, 2), 1),
        np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
        atol=1e-14,
    )
    np.testing.assert_allclose(
        verify_report.fd_weights((-2, -1, 0, 1, 2), 2),
        np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
        atol=1e-13,
    )

  @parameterized.parameters(1, 2)
  def test_weights_annihilate_constants(self, order):
    self.assertAlmostEqual(
        float(np.sum(verify_report.fd_weights((0, 1, 2, 3, 4, 5), order))),
        0.0,
        places=10,
    )

  def test_exact_for_quartics(self):
    x = np.linspace(0.0, 1.0, 11)
    h = x[1] - x[0]
    f = x**4 - 2.0 * x**3 + x
    np.testing.assert_allclose(
        verify_report.derivative4(f, h), 4.0 * x**3 - 6.0 * x**2 + 1.0,
        atol=1e-10,
    )

  def test_fourth_order(self):
    errors_by_n = []
    for n in (21, 41):
      x = np.linspace(0.0, 1.0, n)
      d = verify_report.derivative4(np.sin(3.0 * x), x[1] - x[0], order=2)
      errors_by_n.append(np.max(np.abs(d + 9.0 * np.sin(3.0 * x))))
    self.assertGreater(errors_by_n[0] / errors_by_n[1], 12.0)

  def test_parity(self):
    phi = np.linspace(0.0, 0.5, 17)
    h = phi[1] - phi[0]
    np.testing.assert_allclose(
        verify_report.derivative4(
            np.cos(phi), h, parity=verify_report.Parity.EVEN
        )[:4],
        -np.sin(phi[:4]),
        atol=1e-8,
    )
    d = verify_report.derivative4(
        np.sin(phi), h, parity=verify_report.Parity.ODD
    )
    self.assertAlmostEqual(d[0], 1.0, places=6)

  def test_too_few_nodes(self):
    with self.assertRaises(errors.InsufficientGridError):
      verify_report.derivative4(np.ones(5), 0.1)


class HkStarTest(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    self.grid = grid_utils.Grid.uniform(2.0, 2.5, 0.5, 17, 17)

  @parameterized.parameters(1, 2, 3, 4)
  def test_constant(self, k):
    # Only the L^2 part survives; its square is the wedge volume.
    volume = 2.0 * np.pi / 3.0 * (2.5**3 - 2.0**3) * (1.0 - np.cos(0.5))
    norm = verify_report.hk_star_norm(np.ones(self.grid.shape), self.grid, k)
    self.assertAlmostEqual(norm, np.sqrt(volume), places=4)

  def test_radial_growth(self):
    r, _ = self.grid.mesh()
    self.assertGreater(
        verify_report.hk_star_norm(r, self.grid, 2),
        verify_report.hk_star_norm(r, self.grid, 1),
    )

  def test_rejects(self):
    with self.assertRaises(errors.ValidationError):
      verify_report.hk_star_norm(np.ones(self.grid.shape), self.grid, 5)
    small = grid_utils.Grid.uniform(2.0, 2.5, 0.5, 8, 8)
    with self.assertRaises(errors.InsufficientGridError):
      verify_report.hk_star_norm(np.ones(small.shape), small, 4)


class ResidualTest(absltest.TestCase):

  @classmethod
  def setUpClass(cls):
    super().setUpClass()
    cls.fields, cls.sample = background_fields()

  def test_background_residuals(self):
    report = verify_report.residual_euler_poisson(
        self.fields, np.full(self.fields.grid.shape, 0.5)
    )
    self.assertLess(report.continuity, 1e-4)
    self.assertLess(report.momentum_phi, 1e-10)
    self.assertLess(report.entropy, 1e-10)
    self.assertLess(report.angular_momentum, 1e-12)
    self.assertLess(report.poisson, 1e-3)
    self.assertLess(report.mass_flux_spread, 1e-6)
    self.assertGreater(report.min_mach_margin, 0.0)
    self.assertEqual(report.grid, (33, 17))
    self.assertIn('total', report.to_dict())

  def test_wrong_doping_shows_in_poisson(self):
    report = verify_report.residual_euler_poisson(
        self.fields, np.full(self.fields.grid.shape, 0.6)
    )
    self.assertGreater(report.poisson, 0.05)

  def test_bernoulli_defect(self):
    self.assertLess(verify_report.bernoulli_defect(self.fields), 1e-10)

  def test_mass_flux(self):
    # m0 times int_0^phi0 sin = 1 - cos(phi0).
    np.testing.assert_allclose(
        verify_report.mass_flux(self.fields),
        10.0 * (1.0 - np.cos(0.5)),
        rtol=1e-6,
    )

  def test_conservation_report(self):
    report = verify_report.conservation_report(self.fields)
    self.assertLen(report['mass_flux'], 33)
    self.assertEqual(report['entropy_range'], [1.0, 1.0])

  def test_supersonic_margin(self):
    margin, node = verify_report.supersonic_margin(self.fields)
    mach = self.fields.primitives.mach
    self.assertAlmostEqual(margin, float(np.min(mach)) - 1.0)
    self.assertIn(node[0], self.fields.grid.r)
    self.assertGreater(margin, 0.0)

  def test_needs_primitives(self):
    with self.assertRaises(errors.ValidationError):
      verify_report.mass_flux(self.fields.replace(primitives=None))


if __name__ == '__main__':
  absltest.main()
