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


"""Tests for boundary profile families."""

from epnozzle import errors
from epnozzle import profiles
import numpy as np

from absl.testing import absltest
from absl.testing import parameterized

_PHI0 = 0.5


def _series():
  return {
      'cosine': profiles.CosineSeries((0.2, 1.0, -0.5), _PHI0),
      'sine_squared': profiles.SineSquaredSeries((1.0, 0.3), _PHI0),
      'tapered_sine': profiles.TaperedSineSeries((1.0, -0.25), _PHI0),
  }


class SeriesTest(parameterized.TestCase):

  @parameterized.parameters('cosine', 'sine_squared', 'tapered_sine')
  def test_derivative_matches_differences(self, family):
    profile = _series()[family]
    phi = np.linspace(0.05, 0.45, 9)
    h = 1e-6
    numeric = (profile(phi + h) - profile(phi - h)) / (2.0 * h)
    np.testing.assert_allclose(profile.derivative(phi), numeric, atol=1e-6)

  @parameterized.parameters('cosine', 'sine_squared', 'tapered_sine')
  def test_flat_at_the_wall(self, family):
    self.assertAlmostEqual(
        float(_series()[family].derivative(_PHI0)), 0.0, places=12
    )

  def test_cosine_values(self):
    profile = _series()['cosine']
    np.testing.assert_allclose(profile([0.0, _PHI0]), [0.7, 0.2 - 1.0 - 0.5])

  def test_sine_squared_vanishes_at_both_ends(self):
    profile = _series()['sine_squared']
    np.testing.assert_allclose(profile([0.0, _PHI0]), 0.0, atol=1e-15)
    self.assertAlmostEqual(float(profile.derivative(0.0)), 0.0)

  def test_tapered_sine_vanishes_on_the_axis(self):
    profile = _series()['tapered_sine']
    self.assertEqual(float(profile(0.0)), 0.0)
    self.assertAlmostEqual(float(profile(_PHI0)), 0.75)

  def test_empty_series(self):
    with self.assertRaises(errors.ValidationError):
      profiles.CosineSeries((), _PHI0)

  def test_broadcasts_over_grids(self):
    phi = np.tile(np.linspace(0.0, _PHI0, 5), (3, 1))
    self.assertEqual(_series()['cosine'](phi).shape, (3, 5))


class AffineTest(absltest.TestCase):

  def test_scaled_and_shifted(self):
    base = profiles.CosineSeries((0.0, 1.0), _PHI0)
    profile = base.scaled(2.0).shifted(1.0)
    np.testing.assert_allclose(profile(0.0), 3.0)
    np.testing.assert_allclose(profile.derivative(0.25), -2.0 * np.pi / _PHI0)

  def test_is_zero(self):
    self.assertTrue(profiles.Zero().is_zero)
    self.assertTrue(profiles.Zero().scaled(3.0).is_zero)
    self.assertTrue(_series()['cosine'].scaled(0.0).is_zero)
    self.assertFalse(profiles.Zero().shifted(1.0).is_zero)
    self.assertFalse(_series()['cosine'].is_zero)


class TabulatedTest(absltest.TestCase):

  def test_monotone_interpolation(self):
    table = profiles.Tabulated(
        phi=(0.0, 0.1, 0.2, 0.5), values=(0.0, 0.0, 1.0, 1.0)
    )
    phi = np.linspace(0.0, 0.5, 201)
    values = table(phi)
    self.assertGreaterEqual(values.min(), 0.0)
    self.assertLessEqual(values.max(), 1.0)
    self.assertAlmostEqual(float(table.derivative(0.5)), 0.0)

  def test_invalid_tables(self):
    with self.assertRaises(errors.ValidationError):
      profiles.Tabulated(phi=(0.0, 0.3, 0.2), values=(0.0, 1.0, 2.0))
    with self.assertRaises(errors.ValidationError):
      profiles.Tabulated(phi=(0.0,), values=(1.0,))
    with self.assertRaises(errors.ValidationError):
      profiles.Tabulated(phi=(0.0, 0.5), values=(1.0, 2.0, 3.0))


class FunctionTest(absltest.TestCase):

  def test_callable_profile(self):
    profile = profiles.Function(fn=np.sin, dfn=np.cos)
    np.testing.assert_allclose(profile([0.0, 0.3]), np.sin([0.0, 0.3]))
    np.testing.assert_allclose(profile.derivative(0.3), np.cos(0.3))


class DopingFieldTest(absltest.TestCase):

  def test_bump_vanishes_at_the_ends(self):
    doping = profiles.DopingField(
        profiles.CosineSeries((1.0,), _PHI0), radial='bump'
    )
    r = np.array([2.0, 2.25, 2.5])
    np.testing.assert_allclose(
        doping(r, 0.1, 2.0, 2.5), [0.0, 1.0, 0.0], atol=1e-15
    )
    np.testing.assert_allclose(
        doping.phi_derivative(r, 0.1, 2.0, 2.5), 0.0, atol=1e-15
    )

  def test_uniform(self):
    doping = profiles.DopingField(profiles.CosineSeries((1.0, 0.5), _PHI0))
    np.testing.assert_allclose(doping(2.3, 0.0, 2.0, 2.5), 1.5)

  def test_invalid_radial_factor(self):
    with self.assertRaises(errors.ValidationError):
      profiles.DopingField(profiles.Zero(), radial='gaussian')


if __name__ == '__main__':
  absltest.main()
