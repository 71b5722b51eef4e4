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


"""Tests for errors."""

from epnozzle import errors

from absl.testing import absltest
from absl.testing import parameterized


class ErrorsTest(parameterized.TestCase):

  def test_node_is_appended(self):
    error = errors.CavitationError('density vanishes', node=(2.25, 0.125))
    self.assertEqual(str(error), 'density vanishes at (r=2.25, phi=0.125)')
    self.assertEqual(error.node, (2.25, 0.125))

  def test_no_node(self):
    error = errors.BackflowError('u_r <= 0')
    self.assertEqual(str(error), 'u_r <= 0')
    self.assertIsNone(error.node)

  def test_parse_error_location(self):
    error = errors.ParseError('invalid value', line=3, column=7)
    self.assertEqual(str(error), '3:7: invalid value')
    self.assertEqual((error.line, error.column), (3, 7))

  def test_compatibility_failures(self):
    failures = ['w_en(0) = 0 (got 1.000e-03)', "v_en'(phi0) = 0 (got 2e-3)"]
    error = errors.CompatibilityError(failures)
    self.assertEqual(error.failures, failures)
    self.assertIn('; ', str(error))

  def test_payloads(self):
    self.assertEqual(errors.HorizonBeforeExitError('x', 2.13).horizon, 2.13)
    self.assertEqual(errors.SingularSystemError('x', 1e-17).pivot, 1e-17)
    self.assertIn('1.000e-17', str(errors.SingularSystemError('x', 1e-17)))
    self.assertEqual(errors.NonConvergenceError('x', [1.0]).history, [1.0])

  @parameterized.parameters(
      (errors.ValidationError, ValueError),
      (errors.ParseError, ValueError),
      (errors.AdmissibilityError, errors.ValidationError),
      (errors.CompatibilityError, errors.ValidationError),
      (errors.GridMismatchError, errors.ValidationError),
      (errors.OutOfDomainError, errors.ValidationError),
      (errors.InsufficientGridError, errors.ValidationError),
      (errors.AxisRegularityError, errors.ValidationError),
      (errors.CavitationError, ArithmeticError),
      (errors.BackflowError, ArithmeticError),
      (errors.SonicSingularityError, ArithmeticError),
      (errors.SonicApproachError, ArithmeticError),
      (errors.HorizonBeforeExitError, RuntimeError),
      (errors.SingularSystemError, RuntimeError),
      (errors.ResolutionError, RuntimeError),
      (errors.NonConvergenceError, RuntimeError),
      (errors.IoError, OSError),
  )
  def test_hierarchy(self, error_type, base):
    self.assertTrue(issubclass(error_type, base))
    self.assertTrue(issubclass(error_type, errors.NozzleError))


if __name__ == '__main__':
  absltest.main()
