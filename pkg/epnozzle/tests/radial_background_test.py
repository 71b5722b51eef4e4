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


"""Tests for the radial background."""

import dataclasses

from epnozzle import core_model
from epnozzle import errors
from epnozzle import radial_background
import numpy as np
from scipy import integrate

from absl.testing import absltest
from absl.testing import parameterized

_GAS = core_model.GasLaw(gamma=5.0 / 3.0)
_SPAN = (2.0, 2.5)


def default_params(**changes) -> radial_background.BackgroundParams:
  params = radial_background.BackgroundParams(
      gas=_GAS, m0=10.0, S0=1.0, rho0=1.0, E0=0.0, b0=0.5
  )
  return dataclasses.replace(params, **changes)


class BackgroundParamsTest(parameterized.TestCase):

  def test_window_constants(self):
    params = default_params()
    self.assertAlmostEqual(
        float(params.sonic_density(2.0)), (100.0 / (5.0 / 3.0 * 16.0)) ** 0.375
    )
    self.assertAlmostEqual(params.entrance_mach_sq(2.0), 3.75)
    self.assertAlmostEqual(
        float(params.charge_bound(2.5, 2.0)), 0.7155, delta=1e-3
    )
    params.check_admissible(*_SPAN)

  @parameterized.named_parameters(
      ('dense', dict(rho0=1.7)),
      ('sonic', dict(rho0=float(default_params().sonic_density(2.0)))),
      ('vacuum', dict(rho0=0.0)),
      ('heavy_ions', dict(b0=0.9)),
      ('no_ions', dict(b0=0.0)),
  )
  def test_inadmissible(self, changes):
    with self.assertRaises(errors.AdmissibilityError):
      default_params(**changes).check_admissible(*_SPAN)

  def test_invalid_data(self):
    with self.assertRaises(errors.ValidationError):
      default_params(m0=0.0)
    with self.assertRaises(errors.ValidationError):
      default_params(S0=-1.0)
    with self.assertRaises(errors.ValidationError):
      default_params(b_table=((2.0, 0.5), (2.5, 0.5)))

  def test_b_table(self):
    table = tuple((r, 0.4 + 0.1 * (r - 2.0)) for r in np.linspace(2, 2.5, 6))
    params = default_params(b_table=table)
    np.testing.assert_allclose(
        params.b_bar([2.0, 2.25, 2.5]), [0.4, 0.425, 0.45]
    )


class IntegrateBackgroundTest(absltest.TestCase):

  @classmethod
  def setUpClass(cls):
    super().setUpClass()
    cls.bg = radial_background.integrate_background(default_params(), _SPAN)

  def test_supersonic_on_span(self):
    self.assertEqual(self.bg.r_en, 2.0)
    self.assertAlmostEqual(self.bg.r_end, 2.5)
    self.assertIsNone(self.bg.horizon)
    self.assertTrue(np.all(self.bg.mach_sq > 1.0))
    self.assertAlmostEqual(float(self.bg.mach_sq[0]), 3.75, places=10)

  def test_crossform_agreement(self):
    self.assertLessEqual(radial_background.crossform_check(self.bg), 1e-8)

  def test_bernoulli_matches_potential(self):
    np.testing.assert_allclose(self.bg.bernoulli, self.bg.Phi_bar, atol=1e-7)

  def test_background_potentials(self):
    phi_bar, Phi_bar = radial_background.background_potentials(self.bg)  # pylint: disable=invalid-name
    # u(r_en) = m0 / (r_en^2 rho0) and B(r_en) = u^2 / 2 + 5/2 S rho0^(2/3).
    self.assertAlmostEqual(float(phi_bar[0]), 2.5)
    self.assertAlmostEqual(float(Phi_bar[0]), 5.625)
    self.assertTrue(np.all(np.diff(phi_bar) > 0.0))
    np.testing.assert_array_equal(phi_bar, self.bg.phi_bar)

  def test_evaluate(self):
    r = np.linspace(2.0, 2.5, 7)
    sample = self.bg.evaluate(r)
    np.testing.assert_allclose(r**2 * sample.rho * sample.u, 10.0, rtol=1e-12)
    np.testing.assert_allclose(sample.b_bar, 0.5)
    # phi_bar' = u and Phi_bar' = E.
    fine = np.linspace(2.1, 2.4, 301)
    h = fine[1] - fine[0]
    dense = self.bg.evaluate(fine)
    np.testing.assert_allclose(
        np.gradient(dense.phi_bar, h)[1:-1], dense.u[1:-1], rtol=1e-5
    )
    np.testing.assert_allclose(
        np.gradient(dense.Phi_bar, h)[1:-1], dense.E[1:-1], atol=1e-5
    )
    np.testing.assert_allclose(
        np.gradient(dense.rho, h)[1:-1], dense.drho[1:-1], rtol=1e-4
    )

  def test_potential_interpolant_solves_poisson(self):
    r = np.linspace(2.0, 2.5, 1001)
    sample = self.bg.evaluate(r)
    spline = self.bg.splines['Phi_bar']
    laplacian = spline(r, 2) + 2.0 * spline(r, 1) / r
    np.testing.assert_allclose(
        laplacian, sample.rho - sample.b_bar, rtol=0.0, atol=1e-8
    )

  def test_evaluate_outside_span(self):
    with self.assertRaises(errors.OutOfDomainError):
      self.bg.evaluate([1.9])

  def test_fixed_step_agrees(self):
    rk4 = radial_background.integrate_background(
        default_params(), _SPAN, stepper='rk4', n_steps=400
    )
    self.assertAlmostEqual(float(rk4.rho[-1]), float(self.bg.rho[-1]), 9)
    self.assertAlmostEqual(float(rk4.E[-1]), float(self.bg.E[-1]), 9)

  def test_unknown_stepper(self):
    with self.assertRaises(ValueError):
      radial_background.integrate_background(
          default_params(), _SPAN, stepper='euler'
      )

  def test_zero_length_span(self):
    bg = radial_background.integrate_background(default_params(), (2.0, 2.0))
    self.assertEqual(bg.r.size, 1)
    np.testing.assert_allclose(bg.evaluate([2.0]).rho, [1.0])


class HorizonTest(absltest.TestCase):

  def test_strong_retarding_field_reaches_sonic(self):
    params = default_params(E0=-20.0)
    horizon = radial_background.find_horizon(params, 2.0, 2.5)
    self.assertIsNotNone(horizon)
    self.assertBetween(horizon, 2.0, 2.5)
    with self.assertRaises(errors.HorizonBeforeExitError) as cm:
      radial_background.integrate_background(params, _SPAN)
    self.assertAlmostEqual(cm.exception.horizon, horizon, places=6)

  def test_truncated_background(self):
    params = default_params(E0=-20.0)
    bg = radial_background.integrate_background(
        params, _SPAN, require_full_span=False
    )
    self.assertEqual(bg.horizon_reason, 'density near sonic')
    self.assertLess(bg.r_end, bg.horizon + 1e-12)
    self.assertTrue(np.all(bg.mach_sq > 1.0))

  def test_horizon_is_a_root_of_the_window_bound(self):
    params = default_params(E0=-20.0)
    horizon = radial_background.find_horizon(params, 2.0, 2.5)
    solution = integrate.solve_ivp(
        lambda r, y: radial_background.rhs_rho_E(r, y[0], y[1], params),
        (2.0, horizon),
        [params.rho0, params.E0],
        rtol=1e-13,
        atol=1e-15,
    )
    delta = 1e-3 * float(params.sonic_density(2.0))
    gap = float(params.sonic_density(horizon)) - delta - solution.y[0, -1]
    self.assertLess(abs(gap), 1e-8)

  def test_default_data_have_no_horizon(self):
    self.assertIsNone(
        radial_background.find_horizon(default_params(), 2.0, 2.5)
    )

  def test_sonic_right_hand_side(self):
    params = default_params()
    rho_s = float(params.sonic_density(2.0))
    with self.assertRaises(errors.SonicSingularityError):
      radial_background.rhs_rho_E(2.0, rho_s, 0.0, params)
    with self.assertRaises(errors.SonicSingularityError):
      radial_background.rhs_mach_E(2.0, 1.0, 0.0, params)


if __name__ == '__main__':
  absltest.main()
