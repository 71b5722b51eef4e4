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


"""Tests for the polar Neumann eigenbasis."""

from epnozzle import eigenbasis
from epnozzle import errors
import numpy as np

from absl.testing import absltest
from absl.testing import parameterized


class EigenBasisTest(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super().setUpClass()
    cls.basis = eigenbasis.build_basis(0.5, 4, 48)

  def test_full_sphere_spectrum(self):
    basis = eigenbasis.build_basis(np.pi, 5, 24)
    k = np.arange(6)
    np.testing.assert_allclose(basis.omegas, k * (k + 1), atol=1e-9)

  def test_hemisphere_spectrum(self):
    # Only even Legendre polynomials are flat at the equator.
    basis = eigenbasis.build_basis(np.pi / 2, 3, 16)
    n = np.arange(4)
    np.testing.assert_allclose(
        basis.omegas, 2 * n * (2 * n + 1), atol=1e-9
    )

  def test_full_sphere_modes_are_legendre(self):
    basis = eigenbasis.build_basis(np.pi, 3, 16)
    phi = np.linspace(0.0, np.pi, 7)
    p2 = 0.5 * (3.0 * np.cos(phi) ** 2 - 1.0)
    np.testing.assert_allclose(
        basis.values(phi)[2], np.sqrt(5.0 / 2.0) * p2, atol=1e-10
    )

  def test_spectrum_is_ordered(self):
    self.assertLen(self.basis.omegas, 5)
    self.assertEqual(self.basis.omegas[0], 0.0)
    self.assertTrue(np.all(np.diff(self.basis.omegas) > 0.0))

  def test_orthonormality(self):
    self.assertLessEqual(eigenbasis.gram_defect(self.basis), 1e-10)
    self.assertLessEqual(eigenbasis.check_derivative_basis(self.basis), 1e-8)

  def test_constant_mode(self):
    np.testing.assert_allclose(
        self.basis.xis[0], 1.0 / np.sqrt(1.0 - np.cos(0.5)), rtol=1e-10
    )
    self.assertGreater(self.basis.values(0.0)[3, 0], 0.0)

  def test_neumann_conditions(self):
    d_axis = self.basis.derivatives(0.0)[:, 0]
    d_wall = self.basis.derivatives(0.5)[:, 0]
    scale = np.max(np.abs(self.basis.dxis))
    np.testing.assert_allclose(d_axis, 0.0, atol=1e-12)
    np.testing.assert_allclose(d_wall, 0.0, atol=1e-6 * scale)

  def test_eigen_equation(self):
    # -(sin xi')' = omega sin xi, checked by differences at interior angles.
    phi = np.linspace(0.1, 0.4, 601)
    h = phi[1] - phi[0]
    flux = np.sin(phi) * self.basis.derivatives(phi)
    lhs = -np.gradient(flux, h, axis=1)[:, 1:-1]
    rhs = (
        self.basis.omegas[:, None]
        * np.sin(phi)[1:-1]
        * self.basis.values(phi)[:, 1:-1]
    )
    scale = np.max(np.abs(rhs))
    np.testing.assert_allclose(lhs, rhs, atol=2e-3 * scale)

  def test_project_and_evaluate(self):
    coeffs = np.array([0.3, -1.0, 0.0, 2.0, 0.5])
    phi = self.basis.nodes
    samples = eigenbasis.evaluate(coeffs, self.basis, phi)
    projected = eigenbasis.project(samples, self.basis)
    np.testing.assert_allclose(projected[:5], coeffs, atol=1e-10)
    np.testing.assert_allclose(projected[5:], 0.0, atol=1e-10)
    with self.assertRaises(errors.ValidationError):
      eigenbasis.evaluate(np.ones(6), self.basis, phi)

  def test_project_callable(self):
    projected = eigenbasis.project(np.ones_like, self.basis)
    np.testing.assert_allclose(
        projected[0], np.sqrt(1.0 - np.cos(0.5)), rtol=1e-12
    )
    np.testing.assert_allclose(projected[1:], 0.0, atol=1e-10)

  def test_outside_domain(self):
    with self.assertRaises(errors.OutOfDomainError):
      self.basis.values([0.6])

  @parameterized.named_parameters(
      ('no_opening', 0.0, 4, 32),
      ('beyond_sphere', 3.5, 4, 32),
      ('no_modes', 0.5, 0, 32),
      ('few_nodes', 0.5, 8, 31),
  )
  def test_invalid_arguments(self, phi0, m_modes, n_nodes):
    with self.assertRaises(errors.ValidationError):
      eigenbasis.build_basis(phi0, m_modes, n_nodes)


if __name__ == '__main__':
  absltest.main()
