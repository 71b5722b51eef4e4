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


"""Tests for config_utils and path_utils."""

from epnozzle import config_utils
from epnozzle import path_utils
from epnozzle import profiles
from epnozzle.configs import config_globals
from epnozzle.configs import solver
from ml_collections import config_dict

from absl.testing import absltest


class ConfigUtilsTest(absltest.TestCase):

  def test_parse_config(self):
    config = config_dict.ConfigDict()
    config.entrance = config_utils.callable_config(
        'profiles.CosineSeries', coefficients=(1.0, 0.5), phi0=0.5
    )
    config.wall = config_utils.object_config('profiles.Zero()')
    config.shapes = [
        config_utils.object_config('profiles.Zero()'),
        config_utils.callable_config(
            'profiles.TaperedSineSeries', coefficients=(1.0,), phi0=0.5
        ),
    ]
    config.label = 'mixed'
    config = config_utils.parse_config(config, config_globals.get_globals())
    self.assertIsInstance(config.entrance, profiles.CosineSeries)
    self.assertEqual(config.entrance.coefficients, (1.0, 0.5))
    self.assertIsInstance(config.wall, profiles.Zero)
    self.assertIsInstance(config.shapes[1], profiles.TaperedSineSeries)
    self.assertEqual(config.label, 'mixed')

  def test_nested_constructor(self):
    config = config_utils.callable_config(
        'profiles.Affine',
        base=config_utils.callable_config(
            'profiles.CosineSeries', coefficients=(2.0,), phi0=0.5
        ),
        scale=0.5,
    )
    profile = config_utils.resolve_value(config, config_globals.get_globals())
    self.assertIsInstance(profile, profiles.Affine)
    self.assertAlmostEqual(float(profile(0.1)), 1.0)

  def test_is_object_spec(self):
    self.assertTrue(config_utils.is_object_spec({'__object': 'np.pi'}))
    self.assertTrue(
        config_utils.is_object_spec({'__constructor': 'f', '__config': {}})
    )
    self.assertFalse(config_utils.is_object_spec({'family': 'cosine'}))
    self.assertFalse(config_utils.is_object_spec(1.0))

  def test_plain_values_pass_through(self):
    self.assertEqual(config_utils.resolve_value(3, {}), 3)

  def test_solver_defaults(self):
    config = solver.get_config(modes=4)
    self.assertEqual(config.modes, 4)
    self.assertEqual((config.grid.n_r, config.grid.n_phi), (64, 16))
    self.assertLess(config.relax_fallback, config.relax)


class PathUtilsTest(absltest.TestCase):

  def test_bundled_cases(self):
    cases = path_utils.bundled_cases()
    self.assertIn('zero.case', cases)
    self.assertIn('swirl.case', cases)
    self.assertEqual(cases, sorted(cases))

  def test_resolve_bundled_case(self):
    path = path_utils.resolve_case_path('zero.case')
    self.assertTrue(path.exists())
    self.assertEqual(path.parent.name, 'cases')

  def test_resolve_missing_case(self):
    path = path_utils.resolve_case_path('missing.case')
    self.assertFalse(path.exists())
    self.assertEqual(path.name, 'missing.case')


if __name__ == '__main__':
  absltest.main()
